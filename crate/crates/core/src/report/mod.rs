//! Parameter sweeps, convergence tables and the batch of identity checks.

mod config;
mod svg;
mod verify;

pub use config::{parse_config, ConfigMap};
pub use verify::{run_verify, Check, CheckResult, VerifyOptions, VerifyReport};

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotic::{theorem_eval, AsymptoticOptions};
use crate::error::{domain, Error, Result};
use crate::exponent::Exponent;
use crate::sequence::PsiSequence;
use crate::worstcase::{ClassSpec, ModulusOfContinuity, WorstCaseOptions};

/// What the index range of a sweep enumerates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IndexRange {
    /// `n − p + 1`.
    FirstIndex(Vec<u64>),
    /// `n`.
    N(Vec<u64>),
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    /// Family templates without `q`: `geometric`, `neumann`, `polyharmonic:m=3`.
    pub families: Vec<String>,
    pub qs: Vec<f64>,
    pub ps: Vec<u64>,
    pub index: IndexRange,
    pub betas: Vec<f64>,
    pub classes: Vec<ClassSpec>,
    pub options: WorstCaseOptions,
    pub jobs: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let index_empty = match &self.index {
            IndexRange::FirstIndex(v) | IndexRange::N(v) => v.is_empty(),
        };
        if self.families.is_empty()
            || self.qs.is_empty()
            || self.ps.is_empty()
            || index_empty
            || self.betas.is_empty()
            || self.classes.is_empty()
        {
            return domain("every sweep range must be nonempty");
        }
        if self.jobs == 0 {
            return domain("--jobs must be at least 1");
        }
        Ok(())
    }

    /// Builds `family:q=...` descriptors.
    pub fn sequence(family: &str, q: f64) -> Result<PsiSequence> {
        let (name, rest) = family.split_once(':').unwrap_or((family, ""));
        let spec = if rest.is_empty() { format!("{name}:q={q}") } else { format!("{name}:q={q},{rest}") };
        PsiSequence::from_spec(&spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub seq: String,
    pub q: f64,
    pub n: u64,
    pub p: u64,
    pub m: u64,
    pub beta: f64,
    pub class: String,
    pub exact: Option<f64>,
    pub main_term: Option<f64>,
    pub remainder_envelope: Option<f64>,
    pub ratio: Option<f64>,
    pub residual_over_envelope: Option<f64>,
    pub error_estimate: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<Row>,
}

struct Task {
    family: String,
    q: f64,
    n: u64,
    p: u64,
    beta: f64,
    class: ClassSpec,
}

fn tasks(sweep: &SweepSpec) -> Vec<Task> {
    let mut out = Vec::new();
    for family in &sweep.families {
        for &q in &sweep.qs {
            for class in &sweep.classes {
                for &beta in &sweep.betas {
                    for &p in &sweep.ps {
                        let ns: Vec<u64> = match &sweep.index {
                            IndexRange::FirstIndex(ms) => ms.iter().map(|&m| m + p - 1).collect(),
                            IndexRange::N(ns) => ns.clone(),
                        };
                        for n in ns {
                            out.push(Task { family: family.clone(), q, n, p, beta, class: class.clone() });
                        }
                    }
                }
            }
        }
    }
    out
}

fn run_task(t: &Task, opts: &WorstCaseOptions) -> Row {
    let mut row = Row {
        seq: t.family.clone(),
        q: t.q,
        n: t.n,
        p: t.p,
        m: (t.n + 1).saturating_sub(t.p),
        beta: t.beta,
        class: t.class.to_string(),
        exact: None,
        main_term: None,
        remainder_envelope: None,
        ratio: None,
        residual_over_envelope: None,
        error_estimate: None,
        status: "ok".into(),
    };
    if t.p > t.n {
        row.status = "skipped: p exceeds n".into();
        return row;
    }
    let result = SweepSpec::sequence(&t.family, t.q).and_then(|seq| {
        row.seq = seq.to_string();
        let exact = crate::worstcase::worstcase(&seq, t.n, t.p, t.beta, &t.class, opts)?;
        let rep = theorem_eval(&seq, t.n, t.p, t.beta, &t.class, &AsymptoticOptions { worst: *opts, exact: false })?;
        let scale = seq.psi(t.n - t.p + 1)?;
        let main_norm = rep.main_term / scale;
        let residual = (exact.normalized - main_norm).abs();
        row.exact = Some(exact.value);
        row.main_term = Some(rep.main_term);
        row.remainder_envelope = Some(rep.remainder_envelope);
        row.ratio = Some(exact.normalized / main_norm);
        row.residual_over_envelope = (rep.remainder_envelope > 0.0).then(|| residual * scale / rep.remainder_envelope);
        row.error_estimate = Some(exact.error_estimate);
        Ok::<(), Error>(())
    });
    if let Err(e) = result {
        row.status = format!("error: {e}");
    }
    row
}

/// Runs every instance of the sweep; rows come back in parameter order.
pub fn run_convergence(sweep: &SweepSpec) -> Result<ConvergenceTable> {
    sweep.validate()?;
    let tasks = tasks(sweep);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(sweep.jobs)
        .build()
        .map_err(|e| Error::Domain(format!("cannot start worker pool: {e}")))?;
    let rows = pool.install(|| tasks.par_iter().map(|t| run_task(t, &sweep.options)).collect());
    Ok(ConvergenceTable { rows })
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Fixed 17-significant-digit formatting.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "seq,q,n,p,m,beta,class,exact,main_term,remainder_envelope,ratio,residual_over_envelope,error_estimate,status\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                csv_field(&r.seq),
                fmt_float(r.q),
                r.n,
                r.p,
                r.m,
                fmt_float(r.beta),
                csv_field(&r.class),
                opt(r.exact),
                opt(r.main_term),
                opt(r.remainder_envelope),
                opt(r.ratio),
                opt(r.residual_over_envelope),
                opt(r.error_estimate),
                csv_field(&r.status)
            );
        }
        out
    }

    /// Ratio `exact/main` against `n − p + 1`, one polyline per
    /// `(sequence, p, β, class)`.
    pub fn to_svg(&self) -> String {
        svg::ratio_plot(&self.rows)
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.status.starts_with("error")).count()
    }
}

/// Parses a comma-separated list.
pub fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse().map_err(|_| Error::Parse(format!("invalid {what} '{x}'"))))
        .collect()
}

/// Parses `;`-separated modulus specs (commas belong to the specs).
pub fn parse_omegas(s: &str) -> Result<Vec<ModulusOfContinuity>> {
    s.split(';').map(str::trim).filter(|x| !x.is_empty()).map(ModulusOfContinuity::from_spec).collect()
}

pub fn parse_exponents(s: &str) -> Result<Vec<Exponent>> {
    parse_list(s, "exponent")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_sweep() -> SweepSpec {
        SweepSpec {
            families: vec!["geometric".into()],
            qs: vec![0.5],
            ps: vec![1, 2],
            index: IndexRange::FirstIndex(vec![10, 20]),
            betas: vec![0.0],
            classes: vec![ClassSpec::Us(Exponent::INFINITY)],
            options: WorstCaseOptions::default(),
            jobs: 2,
        }
    }

    #[test]
    fn deterministic_csv() {
        let a = run_convergence(&small_sweep()).unwrap().to_csv();
        let b = run_convergence(&SweepSpec { jobs: 1, ..small_sweep() }).unwrap().to_csv();
        assert_eq!(a, b);
        assert_eq!(a.lines().count(), 5);
        assert!(a.lines().nth(1).unwrap().starts_with("geometric:q=0.5,5.0000000000000000e-1,10,1,10,"));
    }

    #[test]
    fn empty_range_rejected() {
        let s = SweepSpec { ps: vec![], ..small_sweep() };
        assert!(run_convergence(&s).is_err());
    }

    #[test]
    fn p_exceeding_n_is_skipped() {
        let s = SweepSpec { index: IndexRange::N(vec![3]), ps: vec![5], ..small_sweep() };
        let t = run_convergence(&s).unwrap();
        assert_eq!(t.rows[0].status, "skipped: p exceeds n");
    }

    #[test]
    fn svg_has_one_series_per_p() {
        let t = run_convergence(&small_sweep()).unwrap();
        let svg = t.to_svg();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 2);
    }
}

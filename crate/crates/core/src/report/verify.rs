use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::asymptotic::{gamma_exponent, k_qp, k_qp_elliptic, sigma_exponent};
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::fourier::{deviation_poly, partial_sum, tau_weight, vp_image, vp_sum, TrigPoly};
use crate::sequence::PsiSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    Elliptic,
    Sigma,
    NeumannEps,
    Vp,
}

impl Check {
    pub const ALL: [Check; 4] = [Check::Elliptic, Check::Sigma, Check::NeumannEps, Check::Vp];
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Check::Elliptic => "elliptic",
            Check::Sigma => "sigma",
            Check::NeumannEps => "neumann-eps",
            Check::Vp => "vp",
        })
    }
}

impl FromStr for Check {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "elliptic" => Ok(Check::Elliptic),
            "sigma" | "gamma" => Ok(Check::Sigma),
            "neumann-eps" | "neumann" | "epsilon" => Ok(Check::NeumannEps),
            "vp" | "tau" => Ok(Check::Vp),
            other => Err(Error::Parse(format!("unknown check '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    /// Restrict to these checks; all when empty.
    pub only: Vec<Check>,
    /// Relative perturbation applied to the quadrature value of `K_{q,p}(1)`.
    pub perturb_kqp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub check: Check,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub results: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }
}

fn elliptic(perturb: f64) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut at = (0.0, 0);
    for i in 1..=9 {
        let q = i as f64 / 10.0;
        for p in 1..=8u64 {
            let quad = k_qp(q, p, Exponent::ONE, 1e-13)? * (1.0 + perturb);
            let closed = k_qp_elliptic(q, p)?;
            let rel = (quad - closed).abs() / quad;
            if rel > worst {
                worst = rel;
                at = (q, p);
            }
        }
    }
    Ok(CheckResult {
        check: Check::Elliptic,
        passed: worst <= 1e-10,
        detail: format!("max relative difference {worst:.3e} at q = {}, p = {} (limit 1e-10)", at.0, at.1),
    })
}

fn sigma() -> CheckResult {
    let mut bad = Vec::new();
    for sp in [Exponent::ONE, Exponent::TWO, Exponent::INFINITY] {
        for p in 1..=10u64 {
            let expect = if p >= 2 {
                3
            } else if sp.is_one() {
                1
            } else {
                2
            };
            if sigma_exponent(sp, p) != expect {
                bad.push(format!("σ({sp}, {p})"));
            }
        }
    }
    for p in 1..=10u64 {
        if gamma_exponent(p) != if p == 1 { 2 } else { 3 } {
            bad.push(format!("γ({p})"));
        }
    }
    CheckResult {
        check: Check::Sigma,
        passed: bad.is_empty(),
        detail: if bad.is_empty() { "40 table entries match".into() } else { format!("mismatch: {}", bad.join(", ")) },
    }
}

fn neumann_eps() -> Result<CheckResult> {
    let mut worst = 0.0f64;
    for q in [0.2, 0.5, 0.8] {
        let seq = PsiSequence::neumann(q)?;
        for m in [5u64, 50, 500] {
            let scan = seq.ratio_scan_sup(m, 10_000)?;
            worst = worst.max((scan - q / (m as f64 + 1.0)).abs());
        }
    }
    let mut poly_ok = true;
    for order in [2u32, 3, 4] {
        for q in [0.2, 0.5, 0.8] {
            let seq = PsiSequence::polyharmonic(q, order)?;
            for m in [5u64, 50, 500] {
                let bound = (2.0 * order as f64 - 3.0) * q / m as f64;
                if seq.ratio_scan_sup(m, 10_000)? > bound {
                    poly_ok = false;
                }
            }
        }
    }
    Ok(CheckResult {
        check: Check::NeumannEps,
        passed: worst <= 1e-14 && poly_ok,
        detail: format!(
            "Neumann scan vs q/(m+1): max difference {worst:.3e}; polyharmonic scans within (2m−3)q/(n−p+1): {poly_ok}"
        ),
    })
}

fn sample_poly(seed: usize, degree: usize) -> Result<TrigPoly> {
    let c = |k: usize, j: usize| ((seed * 131 + k * 17 + j * 7) as f64 * 0.618_033_988_75).sin();
    TrigPoly::new(c(0, 1), (1..=degree).map(|k| (c(k, 2), c(k, 3))).collect())
}

fn vp() -> Result<CheckResult> {
    let mut failures = Vec::new();
    for seed in 0..100 {
        let f = sample_poly(seed, 30)?;
        for n in [5u64, 12, 31] {
            let x = 0.1 + seed as f64 * 0.3;
            if vp_sum(&f, n, 1, x)? != partial_sum(&f, n as usize - 1, x) {
                failures.push(format!("V_{{{n},1}} ≠ S_{{{}}} (seed {seed})", n - 1));
            }
            for p in 1..=n {
                let low = f.truncate((n - p) as usize);
                if vp_image(&low, n, p)? != low {
                    failures.push(format!("V_{{{n},{p}}} does not reproduce degree {}", n - p));
                }
                let dev = deviation_poly(&f, n, p)?;
                for k in 1..=f.degree() {
                    let (a, b) = f.coeff(k);
                    let (da, db) = dev.coeff(k);
                    let w = if k as u64 + p > n { tau_weight(n, p, k as u64)? } else { 0.0 };
                    if (da - w * a).abs() > 1e-14 || (db - w * b).abs() > 1e-14 {
                        failures.push(format!("deviation coefficient {k} for n = {n}, p = {p}"));
                    }
                }
            }
        }
    }
    Ok(CheckResult {
        check: Check::Vp,
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            "V_{n,1} = S_{n-1}, reproduction and deviation weights hold on 100 polynomials".into()
        } else {
            format!("{} failures, first: {}", failures.len(), failures[0])
        },
    })
}

pub fn run_verify(opts: &VerifyOptions) -> Result<VerifyReport> {
    let selected: Vec<Check> = if opts.only.is_empty() { Check::ALL.to_vec() } else { opts.only.clone() };
    let mut results = Vec::new();
    for c in Check::ALL {
        if !selected.contains(&c) {
            continue;
        }
        results.push(match c {
            Check::Elliptic => elliptic(opts.perturb_kqp)?,
            Check::Sigma => sigma(),
            Check::NeumannEps => neumann_eps()?,
            Check::Vp => vp()?,
        });
    }
    Ok(VerifyReport { results })
}

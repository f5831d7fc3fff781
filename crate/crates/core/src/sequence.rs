//! Coefficient families `ψ(k)` with limit ratio `q ∈ (0, 1)`.
//!
//! Every family exposes `ψ(k)`, the consecutive ratio `ψ(k+1)/ψ(k)`, relative
//! values `ψ(k)/ψ(base)` that stay representable when `ψ(k)` itself would
//! underflow, and the tail quantity
//!
//! ```text
//! ε_m = sup_{k ≥ m} |ψ(k+1)/ψ(k) − q|
//! ```
//!
//! which controls every remainder term downstream.

use std::fmt;
use std::path::Path;

use crate::error::{domain, Error, Result};

/// Largest `k·ln q` for which `q^k` is evaluated directly.
const DIRECT_POW_LIMIT: f64 = -600.0;

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `ψ(k) = q^k` (Poisson kernel).
    Geometric,
    /// `ψ(k) = q^k / k` (Neumann kernel).
    Neumann,
    /// Polyharmonic Poisson kernel coefficients of the given order.
    Polyharmonic { order: u32 },
    /// Explicit values `ψ(1), ψ(2), …` with a declared limit ratio.
    Table(Vec<f64>),
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Geometric => "geometric",
            Family::Neumann => "neumann",
            Family::Polyharmonic { .. } => "polyharmonic",
            Family::Table(_) => "table",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsiSequence {
    family: Family,
    q: f64,
}

/// `ε_m` for one starting index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonTail {
    /// Starting index `m`.
    pub start: u64,
    /// Exact value where a closed form exists, otherwise the observed scan sup.
    pub value: f64,
    /// A proved upper bound, when the family has one.
    pub certified: Option<f64>,
}

fn check_q(q: f64) -> Result<()> {
    if !(q > 0.0 && q < 1.0) {
        return domain(format!("q = {q} must lie in (0, 1)"));
    }
    Ok(())
}

impl PsiSequence {
    pub fn geometric(q: f64) -> Result<Self> {
        check_q(q)?;
        Ok(PsiSequence { family: Family::Geometric, q })
    }

    pub fn neumann(q: f64) -> Result<Self> {
        check_q(q)?;
        Ok(PsiSequence { family: Family::Neumann, q })
    }

    pub fn polyharmonic(q: f64, order: u32) -> Result<Self> {
        check_q(q)?;
        if order == 0 {
            return domain("polyharmonic order must be at least 1");
        }
        Ok(PsiSequence { family: Family::Polyharmonic { order }, q })
    }

    /// `values[0]` is `ψ(1)`.
    pub fn from_table(q: f64, values: Vec<f64>) -> Result<Self> {
        check_q(q)?;
        if values.is_empty() {
            return domain("coefficient table is empty");
        }
        if let Some(bad) = values.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return domain(format!("table entry {} is not a positive number", bad + 1));
        }
        Ok(PsiSequence { family: Family::Table(values), q })
    }

    /// Parses `geometric:q=0.5`, `neumann:q=0.5`, `polyharmonic:q=0.5,m=3`
    /// or `table:@path`.
    pub fn from_spec(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
        if name == "table" {
            let path = args
                .strip_prefix('@')
                .ok_or_else(|| Error::Parse("table sequences are given as table:@path".into()))?;
            return Self::from_table_file(path);
        }
        let mut q = None;
        let mut order = None;
        for kv in args.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got '{kv}'")))?;
            match k.trim() {
                "q" => {
                    q = Some(v.trim().parse::<f64>().map_err(|_| {
                        Error::Parse(format!("invalid q '{v}'"))
                    })?)
                }
                "m" => {
                    order = Some(v.trim().parse::<u32>().map_err(|_| {
                        Error::Parse(format!("invalid order '{v}'"))
                    })?)
                }
                other => return Err(Error::Parse(format!("unknown sequence parameter '{other}'"))),
            }
        }
        let q = q.ok_or_else(|| Error::Parse(format!("sequence '{spec}' needs q=<value>")))?;
        match name {
            "geometric" | "poisson" => Self::geometric(q),
            "neumann" => Self::neumann(q),
            "polyharmonic" => Self::polyharmonic(q, order.unwrap_or(1)),
            other => Err(Error::Parse(format!("unknown sequence family '{other}'"))),
        }
    }

    /// Table file: a `q=<value>` header followed by one positive decimal per
    /// line. Blank lines and `#` comments are ignored.
    pub fn from_table_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_table_str(&text)
    }

    pub fn from_table_str(text: &str) -> Result<Self> {
        let mut q = None;
        let mut values = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(v) = line.strip_prefix("q=") {
                if q.is_some() || !values.is_empty() {
                    return Err(Error::Parse(format!("line {}: misplaced q header", lineno + 1)));
                }
                q = Some(v.trim().parse::<f64>().map_err(|_| {
                    Error::Parse(format!("line {}: invalid q '{v}'", lineno + 1))
                })?);
                continue;
            }
            let v: f64 = line
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: invalid value '{line}'", lineno + 1)))?;
            values.push(v);
        }
        let q = q.ok_or_else(|| Error::Parse("table is missing its q=<value> header".into()))?;
        Self::from_table(q, values)
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn is_geometric(&self) -> bool {
        matches!(self.family, Family::Geometric | Family::Polyharmonic { order: 1 })
    }

    /// Largest admissible index for table sequences.
    pub fn max_index(&self) -> Option<u64> {
        match &self.family {
            Family::Table(t) => Some(t.len() as u64),
            _ => None,
        }
    }

    /// Same family with a different limit ratio. Tables are rejected.
    pub fn with_q(&self, q: f64) -> Result<Self> {
        match self.family {
            Family::Table(_) => domain("a table sequence has a fixed q"),
            ref f => {
                check_q(q)?;
                Ok(PsiSequence { family: f.clone(), q })
            }
        }
    }

    fn check_index(&self, k: u64) -> Result<()> {
        if k == 0 {
            return domain("coefficient index must be at least 1");
        }
        if let Some(len) = self.max_index() {
            if k > len {
                return domain(format!("index {k} beyond table length {len}"));
            }
        }
        Ok(())
    }

    /// Polynomial factor `1 + Σ_{j=1}^{r−1} (1−q²)^j/(j! 2^j) ∏_{l<j}(k+2l)`.
    fn poly_factor(&self, order: u32, k: u64) -> f64 {
        let c = 1.0 - self.q * self.q;
        let kf = k as f64;
        let mut term = 1.0;
        let mut sum = 1.0;
        for j in 1..order {
            let jf = j as f64;
            term *= c / (2.0 * jf) * (kf + 2.0 * (jf - 1.0));
            sum += term;
        }
        sum
    }

    fn qpow(&self, e: f64) -> f64 {
        if e * self.q.ln() > DIRECT_POW_LIMIT && e.fract() == 0.0 && e.abs() < i32::MAX as f64 {
            self.q.powi(e as i32)
        } else {
            (e * self.q.ln()).exp()
        }
    }

    /// `ψ(k)`; may underflow to zero for very large `k`.
    pub fn psi(&self, k: u64) -> Result<f64> {
        self.check_index(k)?;
        let kf = k as f64;
        Ok(match &self.family {
            Family::Geometric => self.qpow(kf),
            Family::Neumann => self.qpow(kf) / kf,
            Family::Polyharmonic { order } => self.qpow(kf) * self.poly_factor(*order, k),
            Family::Table(t) => t[(k - 1) as usize],
        })
    }

    pub fn ln_psi(&self, k: u64) -> Result<f64> {
        self.check_index(k)?;
        let kf = k as f64;
        let lq = self.q.ln();
        Ok(match &self.family {
            Family::Geometric => kf * lq,
            Family::Neumann => kf * lq - kf.ln(),
            Family::Polyharmonic { order } => kf * lq + self.poly_factor(*order, k).ln(),
            Family::Table(t) => t[(k - 1) as usize].ln(),
        })
    }

    /// `ψ(k+1)/ψ(k)` in closed form.
    pub fn ratio(&self, k: u64) -> Result<f64> {
        self.check_index(k)?;
        self.check_index(k + 1)?;
        let kf = k as f64;
        Ok(match &self.family {
            Family::Geometric => self.q,
            Family::Neumann => self.q * kf / (kf + 1.0),
            Family::Polyharmonic { order } => {
                self.q * self.poly_factor(*order, k + 1) / self.poly_factor(*order, k)
            }
            Family::Table(t) => t[k as usize] / t[(k - 1) as usize],
        })
    }

    /// `ψ(k)/ψ(base)`, computed without forming either value.
    pub fn relative(&self, k: u64, base: u64) -> Result<f64> {
        self.check_index(k)?;
        self.check_index(base)?;
        let d = k as f64 - base as f64;
        Ok(match &self.family {
            Family::Geometric => self.qpow(d),
            Family::Neumann => self.qpow(d) * (base as f64 / k as f64),
            Family::Polyharmonic { order } => {
                self.qpow(d) * self.poly_factor(*order, k) / self.poly_factor(*order, base)
            }
            Family::Table(t) => t[(k - 1) as usize] / t[(base - 1) as usize],
        })
    }

    /// `sup_{m ≤ k ≤ horizon} |ψ(k+1)/ψ(k) − q|` by direct scan of the ratios.
    pub fn ratio_scan_sup(&self, m: u64, horizon: u64) -> Result<f64> {
        if m == 0 {
            return domain("tail start must be at least 1");
        }
        if horizon < m {
            return domain(format!("scan horizon {horizon} is below the start index {m}"));
        }
        let last = match self.max_index() {
            Some(len) if len <= m => {
                return domain(format!("table of length {len} has no ratio at index {m}"))
            }
            Some(len) => horizon.min(len - 1),
            None => horizon,
        };
        let mut sup = 0.0f64;
        for k in m..=last {
            sup = sup.max((self.ratio(k)? - self.q).abs());
        }
        Ok(sup)
    }

    /// Proved upper bound for `ε_m`, where the family has one.
    pub fn epsilon_certified(&self, m: u64) -> Option<f64> {
        let mf = m.max(1) as f64;
        match self.family {
            Family::Geometric | Family::Polyharmonic { order: 1 } => Some(0.0),
            Family::Neumann => Some(self.q / (mf + 1.0)),
            Family::Polyharmonic { order } => Some((2.0 * order as f64 - 3.0) * self.q / mf),
            Family::Table(_) => None,
        }
    }

    /// `ε_m`: closed form for geometric and Neumann families, ratio scan on
    /// `[m, horizon]` otherwise.
    pub fn epsilon_tail(&self, m: u64, horizon: u64) -> Result<EpsilonTail> {
        if m == 0 {
            return domain("tail start must be at least 1");
        }
        if horizon < m {
            return domain(format!("scan horizon {horizon} is below the start index {m}"));
        }
        let certified = self.epsilon_certified(m);
        let value = match self.family {
            Family::Geometric | Family::Polyharmonic { order: 1 } => 0.0,
            Family::Neumann => self.q / (m as f64 + 1.0),
            _ => self.ratio_scan_sup(m, horizon)?,
        };
        Ok(EpsilonTail { start: m, value, certified })
    }

    /// `ε_m` with the default scan horizon `10·m`.
    pub fn epsilon(&self, m: u64) -> Result<f64> {
        let horizon = match self.max_index() {
            Some(len) => (10 * m).min(len.saturating_sub(1)).max(m),
            None => 10 * m,
        };
        Ok(self.epsilon_tail(m, horizon)?.value)
    }

    /// `|∏_{l<k} ψ(m+l+1)/ψ(m+l) − q^k|`; bounded by `(q+ε_m)^k − q^k`.
    pub fn product_ratio_gap(&self, m: u64, k: u64) -> Result<f64> {
        if k == 0 {
            return domain("product length must be at least 1");
        }
        let mut prod = 1.0;
        for l in 0..k {
            prod *= self.ratio(m + l)?;
        }
        Ok((prod - self.qpow(k as f64)).abs())
    }
}

impl fmt::Display for PsiSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::Geometric => write!(f, "geometric:q={}", self.q),
            Family::Neumann => write!(f, "neumann:q={}", self.q),
            Family::Polyharmonic { order } => write!(f, "polyharmonic:q={},m={}", self.q, order),
            Family::Table(t) => write!(f, "table:q={},len={}", self.q, t.len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn psi_examples() {
        let g = PsiSequence::geometric(0.5).unwrap();
        assert_eq!(g.psi(3).unwrap(), 0.125);
        let n = PsiSequence::neumann(0.5).unwrap();
        assert_eq!(n.psi(2).unwrap(), 0.125);
        let p1 = PsiSequence::polyharmonic(0.5, 1).unwrap();
        assert_eq!(p1.psi(4).unwrap(), 0.0625);
        let p2 = PsiSequence::polyharmonic(0.5, 2).unwrap();
        assert_relative_eq!(p2.psi(1).unwrap(), 0.6875, epsilon = 1e-15);
    }

    #[test]
    fn polyharmonic_matches_direct_expansion() {
        // ψ_3(k) = q^k (1 + c k/2 + c² k(k+2)/8), c = 1 − q².
        let q = 0.4;
        let s = PsiSequence::polyharmonic(q, 3).unwrap();
        let c = 1.0 - q * q;
        for k in 1..30u64 {
            let kf = k as f64;
            let direct = q.powi(k as i32) * (1.0 + c * kf / 2.0 + c * c * kf * (kf + 2.0) / 8.0);
            assert_relative_eq!(s.psi(k).unwrap(), direct, max_relative = 1e-14);
        }
    }

    #[test]
    fn index_errors() {
        let g = PsiSequence::geometric(0.5).unwrap();
        assert!(matches!(g.psi(0), Err(Error::Domain(_))));
        let t = PsiSequence::from_table(0.5, vec![1.0, 0.5, 0.25]).unwrap();
        assert!(t.psi(3).is_ok());
        assert!(matches!(t.psi(4), Err(Error::Domain(_))));
        assert!(PsiSequence::geometric(1.0).is_err());
        assert!(PsiSequence::from_table(0.5, vec![1.0, -1.0]).is_err());
    }

    #[test]
    fn epsilon_examples() {
        let g = PsiSequence::geometric(0.5).unwrap();
        assert_eq!(g.epsilon_tail(10, 100).unwrap().value, 0.0);
        let n = PsiSequence::neumann(0.5).unwrap();
        assert_relative_eq!(n.epsilon_tail(9, 90).unwrap().value, 0.05, epsilon = 1e-16);
        let p = PsiSequence::polyharmonic(0.5, 2).unwrap();
        let e = p.epsilon_tail(20, 200).unwrap();
        assert!(e.value <= 0.025);
        assert_eq!(e.certified, Some(0.025));
        assert!(n.epsilon_tail(10, 5).is_err());
    }

    #[test]
    fn product_gap_examples() {
        let g = PsiSequence::geometric(0.3).unwrap();
        assert!(g.product_ratio_gap(5, 7).unwrap() < 1e-17);
        let n = PsiSequence::neumann(0.5).unwrap();
        let gap = n.product_ratio_gap(4, 1).unwrap();
        assert_relative_eq!(gap, 0.1, epsilon = 1e-15);
        let eps = n.epsilon(4).unwrap();
        assert_relative_eq!((0.5 + eps) - 0.5, gap, epsilon = 1e-15);
    }

    #[test]
    fn relative_matches_quotient() {
        for s in [
            PsiSequence::geometric(0.7).unwrap(),
            PsiSequence::neumann(0.3).unwrap(),
            PsiSequence::polyharmonic(0.6, 4).unwrap(),
        ] {
            for (k, b) in [(10u64, 3u64), (3, 10), (40, 40)] {
                let direct = s.psi(k).unwrap() / s.psi(b).unwrap();
                assert_relative_eq!(s.relative(k, b).unwrap(), direct, max_relative = 1e-13);
            }
        }
        // far beyond the underflow point of ψ itself
        let n = PsiSequence::neumann(0.5).unwrap();
        assert_eq!(n.psi(2000).unwrap(), 0.0);
        assert_relative_eq!(n.relative(2001, 2000).unwrap(), 0.5 * 2000.0 / 2001.0, max_relative = 1e-14);
    }

    #[test]
    fn spec_strings() {
        assert_eq!(
            PsiSequence::from_spec("geometric:q=0.5").unwrap(),
            PsiSequence::geometric(0.5).unwrap()
        );
        assert_eq!(
            PsiSequence::from_spec("polyharmonic:q=0.5,m=3").unwrap(),
            PsiSequence::polyharmonic(0.5, 3).unwrap()
        );
        assert!(PsiSequence::from_spec("neumann").is_err());
        assert!(PsiSequence::from_spec("cauchy:q=0.5").is_err());
        let t = PsiSequence::from_table_str("# coefficients\nq=0.5\n1.0\n0.5\n\n0.25\n").unwrap();
        assert_eq!(t.max_index(), Some(3));
        assert!(PsiSequence::from_table_str("1.0\n0.5\n").is_err());
    }

    #[test]
    fn table_file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("psi.txt");
        std::fs::write(&path, "q=0.5\n0.5\n0.25\n0.125\n").unwrap();
        let s = PsiSequence::from_spec(&format!("table:@{}", path.display())).unwrap();
        assert_eq!(s.psi(2).unwrap(), 0.25);
        assert_eq!(s.ratio_scan_sup(1, 10).unwrap(), 0.0);
    }
}

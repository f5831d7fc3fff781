//! Trigonometric polynomials, partial sums, de la Vallée Poussin sums and the
//! `(ψ,β)`-derivative, all applied in coefficient space.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{domain, Error, Result};
use crate::exponent::Exponent;
use crate::kernel::{phase, KernelSpec};
use crate::sequence::PsiSequence;

/// Largest supported degree.
pub const MAX_DEGREE: usize = 1_000_000;

/// `a0/2 + Σ_{k=1}^{N} (a_k cos kx + b_k sin kx)`.
#[derive(Debug, Clone)]
pub struct TrigPoly {
    a0: f64,
    coeffs: Vec<(f64, f64)>,
}

/// Equality of the polynomials as functions: trailing zero harmonics are ignored.
impl PartialEq for TrigPoly {
    fn eq(&self, other: &Self) -> bool {
        let n = self.coeffs.len().max(other.coeffs.len());
        self.a0 == other.a0 && (1..=n).all(|k| self.coeff(k) == other.coeff(k))
    }
}

impl TrigPoly {
    /// `coeffs[k-1] = (a_k, b_k)`.
    pub fn new(a0: f64, coeffs: Vec<(f64, f64)>) -> Result<Self> {
        if coeffs.len() > MAX_DEGREE {
            return domain(format!("degree {} exceeds the cap {MAX_DEGREE}", coeffs.len()));
        }
        if !a0.is_finite() || coeffs.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
            return domain("coefficients must be finite");
        }
        Ok(TrigPoly { a0, coeffs })
    }

    pub fn zero() -> Self {
        TrigPoly { a0: 0.0, coeffs: Vec::new() }
    }

    /// `a cos kx + b sin kx` (for `k = 0`, the constant `a`).
    pub fn harmonic(k: usize, a: f64, b: f64) -> Result<Self> {
        if k == 0 {
            return TrigPoly::new(2.0 * a, Vec::new());
        }
        let mut coeffs = vec![(0.0, 0.0); k];
        coeffs[k - 1] = (a, b);
        TrigPoly::new(0.0, coeffs)
    }

    pub fn cos(k: usize) -> Result<Self> {
        Self::harmonic(k, 1.0, 0.0)
    }

    pub fn sin(k: usize) -> Result<Self> {
        Self::harmonic(k, 0.0, 1.0)
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[(f64, f64)] {
        &self.coeffs
    }

    /// `(a_k, b_k)`, zero above the degree; `k = 0` gives `(a0, 0)`.
    pub fn coeff(&self, k: usize) -> (f64, f64) {
        if k == 0 {
            (self.a0, 0.0)
        } else {
            self.coeffs.get(k - 1).copied().unwrap_or((0.0, 0.0))
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().enumerate().fold(0.5 * self.a0, |acc, (j, &(a, b))| {
            let (s, c) = ((j + 1) as f64 * x).sin_cos();
            acc + a * c + b * s
        })
    }

    /// Coefficientwise map `(k, a_k, b_k) ↦ (a, b)` over `k ≥ 1`.
    fn map(&self, a0: f64, f: impl Fn(usize, f64, f64) -> (f64, f64)) -> TrigPoly {
        let coeffs = self.coeffs.iter().enumerate().map(|(j, &(a, b))| f(j + 1, a, b)).collect();
        TrigPoly { a0, coeffs }
    }

    pub fn scale(&self, c: f64) -> TrigPoly {
        self.map(c * self.a0, |_, a, b| (c * a, c * b))
    }

    pub fn add(&self, other: &TrigPoly) -> TrigPoly {
        let n = self.degree().max(other.degree());
        let coeffs = (1..=n)
            .map(|k| {
                let (a1, b1) = self.coeff(k);
                let (a2, b2) = other.coeff(k);
                (a1 + a2, b1 + b2)
            })
            .collect();
        TrigPoly { a0: self.a0 + other.a0, coeffs }
    }

    /// `S_k(f)` as a polynomial.
    pub fn truncate(&self, k: usize) -> TrigPoly {
        TrigPoly { a0: self.a0, coeffs: self.coeffs[..k.min(self.degree())].to_vec() }
    }

    /// Drops the constant term.
    pub fn without_mean(&self) -> TrigPoly {
        TrigPoly { a0: 0.0, coeffs: self.coeffs.clone() }
    }

    /// Rows `k,a_k,b_k`; the `k = 0` row carries `a0`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,a_k,b_k\n");
        let _ = writeln!(out, "0,{:.16e},{:.16e}", self.a0, 0.0);
        for (j, (a, b)) in self.coeffs.iter().enumerate() {
            let _ = writeln!(out, "{},{a:.16e},{b:.16e}", j + 1);
        }
        out
    }

    /// Parses [`TrigPoly::to_csv`] output. Rows may appear in any order;
    /// missing harmonics are zero and a header line is optional.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut a0 = 0.0;
        let mut rows: Vec<(usize, f64, f64)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with('k') {
                continue;
            }
            let bad = || Error::Parse(format!("line {}: expected 'k,a_k,b_k', got '{line}'", lineno + 1));
            let mut it = line.split(',').map(str::trim);
            let k: usize = it.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
            let a: f64 = it.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
            let b: f64 = it.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
            if it.next().is_some() {
                return Err(bad());
            }
            if k == 0 {
                a0 = a;
            } else {
                rows.push((k, a, b));
            }
        }
        let degree = rows.iter().map(|r| r.0).max().unwrap_or(0);
        if degree > MAX_DEGREE {
            return domain(format!("degree {degree} exceeds the cap {MAX_DEGREE}"));
        }
        let mut coeffs = vec![(0.0, 0.0); degree];
        for (k, a, b) in rows {
            coeffs[k - 1] = (a, b);
        }
        TrigPoly::new(a0, coeffs)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv(&std::fs::read_to_string(path)?)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// One worst-case instance `(n, p, β, s)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct VpConfig {
    pub n: u64,
    pub p: u64,
    pub beta: f64,
    pub s: Exponent,
}

impl VpConfig {
    pub fn new(n: u64, p: u64, beta: f64, s: Exponent) -> Result<Self> {
        check_np(n, p)?;
        if !beta.is_finite() {
            return domain("β must be finite");
        }
        Ok(VpConfig { n, p, beta, s })
    }

    pub fn first_index(&self) -> u64 {
        self.n - self.p + 1
    }

    /// `s'`.
    pub fn s_prime(&self) -> Exponent {
        self.s.conjugate()
    }
}

fn check_np(n: u64, p: u64) -> Result<()> {
    if p == 0 || p > n {
        return domain(format!("need 1 ≤ p ≤ n, got n = {n}, p = {p}"));
    }
    Ok(())
}

/// `τ_{n,p}(k)` for `k ≥ n − p + 1`.
pub fn tau_weight(n: u64, p: u64, k: u64) -> Result<f64> {
    check_np(n, p)?;
    if k + p <= n {
        return domain(format!("τ_{{{n},{p}}}({k}) is defined only for k ≥ {}", n - p + 1));
    }
    Ok(if k >= n { 1.0 } else { 1.0 - (n - k) as f64 / p as f64 })
}

/// Multiplier of harmonic `k` in `V_{n,p}`: `min{1, (n−k)/p}` clipped at 0.
pub fn vp_multiplier(n: u64, p: u64, k: u64) -> f64 {
    if k >= n {
        0.0
    } else {
        ((n - k) as f64 / p as f64).min(1.0)
    }
}

pub fn partial_sum(f: &TrigPoly, k: usize, x: f64) -> f64 {
    f.truncate(k).eval(x)
}

/// `V_{n,p}(f)` as a polynomial.
pub fn vp_image(f: &TrigPoly, n: u64, p: u64) -> Result<TrigPoly> {
    check_np(n, p)?;
    Ok(f.map(f.a0, |k, a, b| {
        let w = vp_multiplier(n, p, k as u64);
        (w * a, w * b)
    }))
}

pub fn vp_sum(f: &TrigPoly, n: u64, p: u64, x: f64) -> Result<f64> {
    Ok(vp_image(f, n, p)?.eval(x))
}

/// `f − V_{n,p}(f)` as a polynomial.
pub fn deviation_poly(f: &TrigPoly, n: u64, p: u64) -> Result<TrigPoly> {
    check_np(n, p)?;
    Ok(f.map(0.0, |k, a, b| {
        let w = 1.0 - vp_multiplier(n, p, k as u64);
        (w * a, w * b)
    }))
}

pub fn deviation(f: &TrigPoly, n: u64, p: u64, x: f64) -> Result<f64> {
    Ok(deviation_poly(f, n, p)?.eval(x))
}

/// The `(ψ,β)`-derivative: its value is `Σ ψ(k)^{-1}[a_k cos(kx+θ) + b_k sin(kx+θ)]`
/// with `θ = βπ/2`; the constant term is dropped.
pub fn psi_beta_derivative(f: &TrigPoly, seq: &PsiSequence, beta: f64) -> Result<TrigPoly> {
    let (c, s) = phase(beta);
    let mut coeffs = Vec::with_capacity(f.degree());
    for (j, &(a, b)) in f.coeffs.iter().enumerate() {
        let psi = seq.psi(j as u64 + 1)?;
        coeffs.push(((a * c + b * s) / psi, (b * c - a * s) / psi));
    }
    TrigPoly::new(0.0, coeffs)
}

/// `(1/π)∫ φ(x−t) Ψ_β(t) dt` computed on coefficients; requires `a0 = 0`.
pub fn convolve_with_kernel(phi: &TrigPoly, spec: &KernelSpec) -> Result<TrigPoly> {
    if phi.a0 != 0.0 {
        return domain("φ must have zero mean (a0 = 0)");
    }
    let (c, s) = phase(spec.beta);
    let mut coeffs = Vec::with_capacity(phi.degree());
    for (j, &(a, b)) in phi.coeffs.iter().enumerate() {
        let psi = spec.seq.psi(j as u64 + 1)?;
        coeffs.push((psi * (a * c - b * s), psi * (b * c + a * s)));
    }
    TrigPoly::new(0.0, coeffs)
}

/// `f_m = Ψ_β * sin(mx + βπ/2)/‖sin‖_s`, `m = n − p + 1`: the function whose
/// deviation attains `ψ(m)/(p‖sin‖_s)` in the uniform norm.
pub fn extremal_candidate(seq: &PsiSequence, n: u64, p: u64, beta: f64, s: Exponent) -> Result<TrigPoly> {
    check_np(n, p)?;
    let m = (n - p + 1) as usize;
    let (c, sn) = phase(beta);
    let norm = crate::quad::sin_norm(s)?;
    let phi = TrigPoly::harmonic(m, sn / norm, c / norm)?;
    convolve_with_kernel(&phi, &KernelSpec::new(seq.clone(), beta))
}

//! Generating kernels `Ψ_β`, the de la Vallée Poussin tail kernel and the
//! residual kernel `r_{n,p}`.
//!
//! All three are cosine series `Σ c_k cos(kt − βπ/2)`. Series are truncated
//! with the geometric majorant `ψ(K)(q+ε_K)/(1−q−ε_K)`; the Poisson and
//! Neumann kernels and the Poisson tail kernel also have closed forms in
//! `z = e^{it}`, which are used for evaluation.

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::fourier::tau_weight;
use crate::sequence::{Family, PsiSequence};

/// Default absolute truncation tolerance.
pub const DEFAULT_TOL: f64 = 1e-12;

const MAX_TERMS: u64 = 5_000_000;

/// `(cos βπ/2, sin βπ/2)`, exact when `β` is an integer.
pub fn phase(beta: f64) -> (f64, f64) {
    let r = beta.rem_euclid(4.0);
    if r.fract() == 0.0 {
        match r as u32 {
            0 => (1.0, 0.0),
            1 => (0.0, 1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, -1.0),
        }
    } else {
        let th = beta * std::f64::consts::FRAC_PI_2;
        (th.cos(), th.sin())
    }
}

/// `Re(e^{-iβπ/2} w)`.
fn rotate_re(w: Complex64, ph: (f64, f64)) -> f64 {
    w.re * ph.0 + w.im * ph.1
}

/// `conj(1 − q e^{it})` and `|1 − q e^{it}|²` in cancellation-free form.
fn one_minus_qz(q: f64, t: f64) -> (Complex64, f64) {
    let s = (0.5 * t).sin();
    let s2 = s * s;
    let conj = Complex64::new((1.0 - q) + 2.0 * q * s2, q * t.sin());
    let d = (1.0 - q) * (1.0 - q) + 4.0 * q * s2;
    (conj, d)
}

#[derive(Debug, Clone)]
pub struct KernelSpec {
    pub seq: PsiSequence,
    pub beta: f64,
}

impl KernelSpec {
    pub fn new(seq: PsiSequence, beta: f64) -> Self {
        KernelSpec { seq, beta }
    }
}

/// Tail kernel parameters; `1 ≤ p ≤ n` is enforced on construction.
#[derive(Debug, Clone)]
pub struct TailKernelSpec {
    seq: PsiSequence,
    n: u64,
    p: u64,
    beta: f64,
}

impl TailKernelSpec {
    pub fn new(seq: PsiSequence, n: u64, p: u64, beta: f64) -> Result<Self> {
        if p == 0 || p > n {
            return domain(format!("need 1 ≤ p ≤ n, got n = {n}, p = {p}"));
        }
        Ok(TailKernelSpec { seq, n, p, beta })
    }

    pub fn seq(&self) -> &PsiSequence {
        &self.seq
    }
    pub fn n(&self) -> u64 {
        self.n
    }
    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    /// First retained harmonic `n − p + 1`.
    pub fn first_index(&self) -> u64 {
        self.n - self.p + 1
    }

    /// Same `(n, p, β)` with a different coefficient sequence.
    pub fn with_seq(&self, seq: PsiSequence) -> Self {
        TailKernelSpec { seq, ..self.clone() }
    }
}

/// Suffix maxima of `|ψ(k+1)/ψ(k) − q|` for table sequences.
fn table_tail_eps(seq: &PsiSequence) -> Result<Vec<f64>> {
    let len = seq.max_index().unwrap_or(0);
    let mut out = vec![0.0; len as usize + 1];
    let mut run = 0.0f64;
    for k in (1..len).rev() {
        run = run.max((seq.ratio(k)? - seq.q()).abs());
        out[k as usize] = run;
    }
    Ok(out)
}

/// Truncated cosine series `Σ_{k ≥ first} c_k cos(kt − βπ/2)`.
#[derive(Debug, Clone)]
pub struct CosineSeries {
    first: u64,
    coeffs: Vec<f64>,
    phase: (f64, f64),
    remainder_bound: f64,
}

impl CosineSeries {
    pub fn first(&self) -> u64 {
        self.first
    }

    /// Number of retained harmonics.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Bound on the sum of the absolute values of the dropped coefficients.
    pub fn remainder_bound(&self) -> f64 {
        self.remainder_bound
    }

    /// `(k, c_k)` pairs.
    pub fn harmonics(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.coeffs.iter().enumerate().map(move |(j, &c)| (self.first + j as u64, c))
    }

    pub fn eval(&self, t: f64) -> f64 {
        let z = Complex64::from_polar(1.0, t);
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        let lead = Complex64::from_polar(1.0, self.first as f64 * t);
        rotate_re(acc * lead, self.phase)
    }
}

/// Sums `w(k) ψ(k)/ψ(first)` for `k ≥ first` until the majorant of the
/// dropped part is below `rel_tol`. `weight` may return values in `[0, 1]`.
fn build_series(
    seq: &PsiSequence,
    first: u64,
    beta: f64,
    rel_tol: f64,
    weight: impl Fn(u64) -> f64,
) -> Result<CosineSeries> {
    if !(rel_tol > 0.0) {
        return domain("tolerance must be positive");
    }
    let q = seq.q();
    let table_eps = match seq.family() {
        Family::Table(_) => Some(table_tail_eps(seq)?),
        _ => None,
    };
    let mut coeffs = Vec::new();
    let mut k = first;
    loop {
        let rel = seq.relative(k, first)?;
        coeffs.push(weight(k) * rel);
        let eps = match &table_eps {
            Some(tab) => {
                if k as usize + 1 >= tab.len() {
                    return Err(Error::Convergence(format!(
                        "coefficient table ends at k = {k} before the tail is below {rel_tol:e}"
                    )));
                }
                tab[k as usize]
            }
            None => seq.epsilon_certified(k).unwrap_or(0.0),
        };
        if q + eps < 1.0 {
            let remainder = rel * (q + eps) / (1.0 - q - eps);
            if remainder <= rel_tol {
                return Ok(CosineSeries {
                    first,
                    coeffs,
                    phase: phase(beta),
                    remainder_bound: remainder,
                });
            }
        }
        k += 1;
        if k - first > MAX_TERMS {
            return Err(Error::Convergence(format!(
                "series majorant not certified within {MAX_TERMS} terms (ε_K ≥ 1 − q)"
            )));
        }
    }
}

/// `Ψ_β(t) = Σ_{k≥1} ψ(k) cos(kt − βπ/2)` to absolute error `tol`.
pub fn kernel_eval(spec: &KernelSpec, t: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return domain("tolerance must be positive");
    }
    let q = spec.seq.q();
    let ph = phase(spec.beta);
    match spec.seq.family() {
        Family::Geometric | Family::Polyharmonic { order: 1 } => {
            // q z / (1 − q z) = (q e^{it} − q²) / |1 − q z|²
            let (_, d) = one_minus_qz(q, t);
            let w = Complex64::new(q * t.cos() - q * q, q * t.sin()) / d;
            Ok(rotate_re(w, ph))
        }
        Family::Neumann => {
            // −log(1 − q z)
            let (conj, d) = one_minus_qz(q, t);
            let w = Complex64::new(-0.5 * d.ln(), conj.im.atan2(conj.re));
            Ok(rotate_re(w, ph))
        }
        _ => {
            let psi1 = spec.seq.psi(1)?;
            let series = build_series(&spec.seq, 1, spec.beta, tol / psi1, |_| 1.0)?;
            Ok(psi1 * series.eval(t))
        }
    }
}

/// The tail kernel `Σ_{k≥n−p+1} τ_{n,p}(k) ψ(k) cos(kt − βπ/2)`, stored
/// normalised by `ψ(n−p+1)` so that large `n − p` does not underflow.
#[derive(Debug, Clone)]
pub struct TailKernel {
    spec: TailKernelSpec,
    series: CosineSeries,
    scale: f64,
    closed_form: bool,
}

impl TailKernel {
    /// `rel_tol` bounds the truncation error of the normalised kernel.
    pub fn new(spec: &TailKernelSpec, rel_tol: f64) -> Result<Self> {
        let (n, p) = (spec.n, spec.p);
        let first = spec.first_index();
        let series = build_series(&spec.seq, first, spec.beta, rel_tol, |k| {
            tau_weight(n, p, k).unwrap_or(1.0)
        })?;
        Ok(TailKernel {
            spec: spec.clone(),
            series,
            scale: spec.seq.psi(first)?,
            closed_form: spec.seq.is_geometric(),
        })
    }

    pub fn spec(&self) -> &TailKernelSpec {
        &self.spec
    }

    /// `ψ(n − p + 1)`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Normalised coefficients `τ(k) ψ(k)/ψ(n−p+1)`.
    pub fn series(&self) -> &CosineSeries {
        &self.series
    }

    /// Highest retained harmonic.
    pub fn max_harmonic(&self) -> u64 {
        self.series.first + self.series.coeffs.len() as u64 - 1
    }

    /// Kernel divided by `ψ(n − p + 1)`.
    pub fn eval_normalized(&self, t: f64) -> f64 {
        if self.closed_form {
            geometric_tail_normalized(self.spec.seq.q(), self.spec.n, self.spec.p, self.spec.beta, t)
        } else {
            self.series.eval(t)
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.scale * self.eval_normalized(t)
    }
}

/// `Re[e^{-iβπ/2} z^m (1 − (qz)^p) / (p (1 − qz)²)]`, `m = n − p + 1`.
fn geometric_tail_normalized(q: f64, n: u64, p: u64, beta: f64, t: f64) -> f64 {
    let m = n - p + 1;
    let (conj, d) = one_minus_qz(q, t);
    let inv = conj / d;
    let qp = q.powi(p as i32);
    let sp = (0.5 * p as f64 * t).sin();
    let num = Complex64::new((1.0 - qp) + 2.0 * qp * sp * sp, -qp * (p as f64 * t).sin());
    let zm = Complex64::from_polar(1.0, m as f64 * t);
    rotate_re(zm * num * inv * inv / p as f64, phase(beta))
}

/// Tail kernel at `t` to absolute error `tol`.
pub fn vp_tail_kernel(spec: &TailKernelSpec, t: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return domain("tolerance must be positive");
    }
    let scale = spec.seq.psi(spec.first_index())?;
    if spec.seq.is_geometric() {
        return Ok(scale * geometric_tail_normalized(spec.seq.q(), spec.n, spec.p, spec.beta, t));
    }
    let rel = if scale > 0.0 { (tol / scale).max(1e-300) } else { 1.0 };
    let series = build_series(&spec.seq, spec.first_index(), spec.beta, rel, |k| {
        tau_weight(spec.n, spec.p, k).unwrap_or(1.0)
    })?;
    Ok(scale * series.eval(t))
}

/// `r_{n,p}(t) = Σ_{k≥n−p+2} τ(k)(ψ(k)/ψ(n−p+1) − q^{k−n+p−1}) cos(kt − βπ/2)`.
#[derive(Debug, Clone)]
pub struct ResidualKernel {
    series: Option<CosineSeries>,
}

impl ResidualKernel {
    pub fn new(spec: &TailKernelSpec, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return domain("tolerance must be positive");
        }
        if spec.seq.is_geometric() {
            return Ok(ResidualKernel { series: None });
        }
        let m = spec.first_index();
        let q = spec.seq.q();
        let psi_part = build_series(&spec.seq, m, spec.beta, 0.5 * tol, |k| {
            tau_weight(spec.n, spec.p, k).unwrap_or(1.0)
        })?;
        // the geometric part must be carried at least as far, and its own
        // tail q^{K−m+1}/(1−q) below tol/2
        let mut len = psi_part.coeffs.len();
        while q.powi(len as i32) / (1.0 - q) > 0.5 * tol {
            len += 1;
        }
        let mut coeffs = Vec::with_capacity(len);
        for j in 0..len {
            let k = m + j as u64;
            let psi_rel = psi_part.coeffs.get(j).copied().map(Ok).unwrap_or_else(|| {
                Ok::<f64, Error>(tau_weight(spec.n, spec.p, k)? * spec.seq.relative(k, m)?)
            })?;
            let geo = tau_weight(spec.n, spec.p, k)? * q.powi(j as i32);
            coeffs.push(if j == 0 { 0.0 } else { psi_rel - geo });
        }
        let remainder_bound = psi_part.remainder_bound + q.powi(len as i32) / (1.0 - q);
        Ok(ResidualKernel {
            series: Some(CosineSeries { first: m, coeffs, phase: phase(spec.beta), remainder_bound }),
        })
    }

    pub fn series(&self) -> Option<&CosineSeries> {
        self.series.as_ref()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.series.as_ref().map_or(0.0, |s| s.eval(t))
    }
}

pub fn residual_kernel(spec: &TailKernelSpec, t: f64, tol: f64) -> Result<f64> {
    Ok(ResidualKernel::new(spec, tol)?.eval(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn direct_sum(seq: &PsiSequence, beta: f64, t: f64, from: u64, to: u64, w: impl Fn(u64) -> f64) -> f64 {
        let th = beta * std::f64::consts::FRAC_PI_2;
        (from..=to).map(|k| w(k) * seq.psi(k).unwrap() * (k as f64 * t - th).cos()).sum()
    }

    #[test]
    fn kernel_examples() {
        let g = KernelSpec::new(PsiSequence::geometric(0.5).unwrap(), 0.0);
        assert_relative_eq!(kernel_eval(&g, 0.0, 1e-12).unwrap(), 1.0, epsilon = 1e-15);
        let n = KernelSpec::new(PsiSequence::neumann(0.5).unwrap(), 0.0);
        assert_relative_eq!(kernel_eval(&n, 0.0, 1e-12).unwrap(), 2f64.ln(), epsilon = 1e-15);
        let g3 = PsiSequence::geometric(0.3).unwrap();
        let spec = KernelSpec::new(g3.clone(), 1.0);
        let oracle = direct_sum(&g3, 1.0, 0.7, 1, 200, |_| 1.0);
        assert_relative_eq!(kernel_eval(&spec, 0.7, 1e-12).unwrap(), oracle, epsilon = 1e-12);
        assert!(kernel_eval(&spec, 0.7, 0.0).is_err());
    }

    #[test]
    fn series_kernels_match_direct_sums() {
        for seq in [PsiSequence::neumann(0.6).unwrap(), PsiSequence::polyharmonic(0.5, 3).unwrap()] {
            let spec = KernelSpec::new(seq.clone(), 0.37);
            for t in [0.0, 0.3, 2.0, 5.5] {
                let oracle = direct_sum(&seq, 0.37, t, 1, 400, |_| 1.0);
                assert_relative_eq!(kernel_eval(&spec, t, 1e-13).unwrap(), oracle, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn tail_examples() {
        let g = PsiSequence::geometric(0.5).unwrap();
        let spec = TailKernelSpec::new(g.clone(), 6, 1, 0.0).unwrap();
        assert_relative_eq!(vp_tail_kernel(&spec, 0.0, 1e-14).unwrap(), 0.03125, epsilon = 1e-16);
        let spec = TailKernelSpec::new(g.clone(), 8, 3, 0.0).unwrap();
        for t in [0.0, 0.1, 1.0, 3.0] {
            let oracle = direct_sum(&g, 0.0, t, 6, 70, |k| tau_weight(8, 3, k).unwrap());
            assert_relative_eq!(vp_tail_kernel(&spec, t, 1e-15).unwrap(), oracle, epsilon = 1e-13);
        }
        assert!(TailKernelSpec::new(g, 3, 4, 0.0).is_err());
    }

    #[test]
    fn tail_magnitude_bound() {
        let q: f64 = 0.6;
        let (n, p) = (12u64, 4u64);
        let spec = TailKernelSpec::new(PsiSequence::geometric(q).unwrap(), n, p, 0.4).unwrap();
        for i in 0..50 {
            let t = 0.13 * i as f64;
            let v = vp_tail_kernel(&spec, t, 1e-15).unwrap();
            let qp = q.powi(p as i32);
            let mag = q.powi((n - p + 1) as i32) * (1.0 - 2.0 * qp * (p as f64 * t).cos() + qp * qp).sqrt()
                / (p as f64 * (1.0 - 2.0 * q * t.cos() + q * q));
            assert!(v.abs() <= mag * (1.0 + 1e-12));
        }
    }

    #[test]
    fn residual_geometric_is_zero() {
        let spec = TailKernelSpec::new(PsiSequence::geometric(0.5).unwrap(), 10, 3, 0.0).unwrap();
        assert_eq!(residual_kernel(&spec, 1.3, 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn residual_matches_difference_of_tails() {
        let q = 0.5;
        let (n, p) = (20u64, 5u64);
        let neu = TailKernelSpec::new(PsiSequence::neumann(q).unwrap(), n, p, 0.3).unwrap();
        let geo = neu.with_seq(PsiSequence::geometric(q).unwrap());
        let kn = TailKernel::new(&neu, 1e-15).unwrap();
        let kg = TailKernel::new(&geo, 1e-15).unwrap();
        let r = ResidualKernel::new(&neu, 1e-14).unwrap();
        for t in [0.0, 0.5, 2.5] {
            let diff = kn.eval_normalized(t) - kg.eval_normalized(t);
            assert_relative_eq!(r.eval(t), diff, epsilon = 1e-13);
        }
    }

    #[test]
    fn phase_is_exact_at_integers() {
        assert_eq!(phase(1.0), (0.0, 1.0));
        assert_eq!(phase(-1.0), (0.0, -1.0));
        assert_eq!(phase(6.0), (-1.0, 0.0));
    }
}

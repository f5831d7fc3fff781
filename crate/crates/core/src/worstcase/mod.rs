//! Exact worst-case deviations `E(𝔑; V_{n,p}) = sup_{f∈𝔑} ‖f − V_{n,p}(f)‖_C`.
//!
//! For `𝔑 = C^ψ_{β,s}` the deviation is `(1/π)∫ φ(x−t) K(t) dt` with `K` the
//! tail kernel and `φ` ranging over the zero-mean unit ball of `L_s`, so the
//! worst case is `(1/π) min_c ‖K − c‖_{s'}`. For `𝔑 = C^ψ_β H_ω` it is a
//! linear program over `ω`-continuous `φ` (see [`lp`]).

pub mod lp;
pub mod modulus;
pub mod transport;

use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

pub use modulus::{DivergenceCheck, ModulusDiagnostics, ModulusKind, ModulusOfContinuity};

use crate::error::{domain, Error, Result};
use crate::exponent::Exponent;
use crate::fourier::VpConfig;
use crate::kernel::{TailKernel, TailKernelSpec, DEFAULT_TOL};
use crate::quad::{extrema_periodic, integrate_panels, lp_norm_periodic_with, sin_norm, NormOptions};
use crate::sequence::PsiSequence;

/// The smoothness class: `U_s` (unit ball of `L_s`) or `H_ω`.
#[derive(Debug, Clone)]
pub enum ClassSpec {
    Us(Exponent),
    Homega(ModulusOfContinuity),
}

impl fmt::Display for ClassSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassSpec::Us(s) => write!(f, "s={s}"),
            ClassSpec::Homega(w) => write!(f, "omega={w}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    DualNorm,
    Lp,
    LowerBoundCandidate,
}

/// Parameters echoed with every result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Instance {
    pub seq: String,
    pub n: u64,
    pub p: u64,
    pub beta: f64,
    pub class: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstCaseResult {
    /// `E(𝔑; V_{n,p})`.
    pub value: f64,
    /// `value / ψ(n − p + 1)`.
    pub normalized: f64,
    pub method: Method,
    /// Absolute error estimate for `value`.
    pub error_estimate: f64,
    pub instance: Instance,
    /// Certified lower bound (extremal candidate), absolute.
    pub lower_bound: Option<f64>,
    /// Certified upper bound, absolute.
    pub upper_bound: Option<f64>,
    /// LP grid size.
    pub grid: Option<usize>,
}

#[derive(Debug, Clone, Copy)]
pub struct WorstCaseOptions {
    /// Relative accuracy target for norms and kernel truncation.
    pub tol: f64,
    /// Norm sampling grid; default `max(8192, 16 n)`.
    pub grid: Option<usize>,
    /// LP grid; default `max(512, 32 (n − p + 1))`.
    pub lp_grid: Option<usize>,
    /// Shift of the LP sampling grid.
    pub lp_offset: f64,
}

impl Default for WorstCaseOptions {
    fn default() -> Self {
        WorstCaseOptions { tol: DEFAULT_TOL, grid: None, lp_grid: None, lp_offset: 0.0 }
    }
}

fn instance(seq: &PsiSequence, n: u64, p: u64, beta: f64, class: &ClassSpec) -> Instance {
    Instance { seq: seq.to_string(), n, p, beta, class: class.to_string() }
}

fn kernel_for(seq: &PsiSequence, n: u64, p: u64, beta: f64, tol: f64) -> Result<TailKernel> {
    let spec = TailKernelSpec::new(seq.clone(), n, p, beta)?;
    TailKernel::new(&spec, (1e-3 * tol).max(1e-17))
}

/// `(1/π) min_c ‖K − c‖_{s'}` for the normalised kernel, with an error estimate
/// and the plain norm `(1/π)‖K‖_{s'}`.
struct DualNorm {
    value: f64,
    error: f64,
    plain: f64,
}

fn dual_norm(kernel: &TailKernel, s_prime: Exponent, opts: &NormOptions) -> Result<DualNorm> {
    let k = |t: f64| kernel.eval_normalized(t);
    let trunc = kernel.series().remainder_bound();
    if s_prime.is_infinite() {
        let e = extrema_periodic(k, opts.grid);
        let value = 0.5 * (e.max - e.min) / PI;
        let plain = e.max.max(-e.min) / PI;
        return Ok(DualNorm { value, error: (1e-14 * value + trunc) / PI, plain });
    }
    if s_prime.value() == 2.0 {
        // zero mean, so the best constant is 0; Parseval gives the norm
        let sq: f64 = kernel.series().harmonics().map(|(_, c)| c * c).sum();
        let value = (PI * sq).sqrt() / PI;
        let error = ((2.0 * PI).sqrt() * trunc) / PI + 1e-15 * value;
        return Ok(DualNorm { value, error, plain: value });
    }
    let plain_r = lp_norm_periodic_with(k, s_prime, opts)?;
    let plain = plain_r.value / PI;
    let e = extrema_periodic(k, opts.grid);
    let sv = s_prime.value();
    let norm_about = |c: f64| -> Result<(f64, f64)> {
        let r = lp_norm_periodic_with(|t| k(t) - c, s_prime, opts)?;
        Ok((r.value, r.abs_error_estimate))
    };
    // ‖K − c‖ is convex in c; start from the sampled median for s' = 1 and
    // from 0 otherwise, and bracket the minimiser
    let centre = if sv == 1.0 {
        let grid = opts.grid;
        let mut samples: Vec<f64> = (0..grid).map(|i| k(2.0 * PI * i as f64 / grid as f64)).collect();
        samples.sort_by(|a, b| a.total_cmp(b));
        0.5 * (samples[grid / 2 - 1] + samples[grid / 2])
    } else {
        0.0
    };
    let width = (e.max - e.min) * 16.0 / opts.grid as f64;
    let (mut lo, mut hi) = (centre - width, centre + width);
    let f_c = norm_about(centre)?.0;
    if norm_about(lo)?.0 < f_c || norm_about(hi)?.0 < f_c {
        lo = e.min;
        hi = e.max;
    }
    const R: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - R * (hi - lo);
    let mut x2 = lo + R * (hi - lo);
    let mut f1 = norm_about(x1)?;
    let mut f2 = norm_about(x2)?;
    for _ in 0..40 {
        if f1.0 > f2.0 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + R * (hi - lo);
            f2 = norm_about(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - R * (hi - lo);
            f1 = norm_about(x1)?;
        }
    }
    let best = if f1.0 <= f2.0 { f1 } else { f2 };
    let best = if best.0 <= f_c { best } else { (f_c, 0.0) };
    let value = best.0 / PI;
    let error = (best.1 + (2.0 * PI).powf(1.0 / sv) * trunc) / PI + 1e-13 * value;
    Ok(DualNorm { value, error, plain })
}

/// Worst case over `C^ψ_{β,s}`.
pub fn worstcase_us(seq: &PsiSequence, cfg: &VpConfig, opts: &WorstCaseOptions) -> Result<WorstCaseResult> {
    if !(opts.tol > 0.0) {
        return domain("tolerance must be positive");
    }
    let kernel = kernel_for(seq, cfg.n, cfg.p, cfg.beta, opts.tol)?;
    let scale = kernel.scale();
    let norm_opts = NormOptions {
        grid: opts.grid.unwrap_or_else(|| (8192usize).max(16 * cfg.n as usize)),
        tol: opts.tol,
    };
    let d = dual_norm(&kernel, cfg.s_prime(), &norm_opts)?;
    let lower = 1.0 / (cfg.p as f64 * sin_norm(cfg.s)?);
    Ok(WorstCaseResult {
        value: scale * d.value,
        normalized: d.value,
        method: Method::DualNorm,
        error_estimate: scale * d.error,
        instance: instance(seq, cfg.n, cfg.p, cfg.beta, &ClassSpec::Us(cfg.s)),
        lower_bound: Some(scale * lower),
        upper_bound: Some(scale * d.plain),
        grid: None,
    })
}

/// `ψ(m)/(p ‖sin‖_s)`: the deviation of the extremal candidate.
pub fn candidate_lower_bound(seq: &PsiSequence, cfg: &VpConfig) -> Result<WorstCaseResult> {
    let scale = seq.psi(cfg.first_index())?;
    let normalized = 1.0 / (cfg.p as f64 * sin_norm(cfg.s)?);
    Ok(WorstCaseResult {
        value: scale * normalized,
        normalized,
        method: Method::LowerBoundCandidate,
        error_estimate: 0.0,
        instance: instance(seq, cfg.n, cfg.p, cfg.beta, &ClassSpec::Us(cfg.s)),
        lower_bound: Some(scale * normalized),
        upper_bound: None,
        grid: None,
    })
}

/// Default LP grid `max(512, 32 (n − p + 1))`.
pub fn default_lp_grid(n: u64, p: u64) -> usize {
    512usize.max(32 * (n - p + 1) as usize)
}

/// Worst case over `C^ψ_β H_ω` by the discretised LP at `N` and `N/2`.
pub fn worstcase_homega_lp(
    seq: &PsiSequence,
    n: u64,
    p: u64,
    beta: f64,
    omega: &ModulusOfContinuity,
    opts: &WorstCaseOptions,
) -> Result<WorstCaseResult> {
    let kernel = kernel_for(seq, n, p, beta, opts.tol)?;
    let grid = opts.lp_grid.unwrap_or_else(|| default_lp_grid(n, p));
    if grid < 64 || !grid.is_multiple_of(2) {
        return domain(format!("LP grid {grid} must be even and at least 64"));
    }
    let scale = kernel.scale();
    let fine = lp::solve_lp(&kernel, omega, grid, opts.lp_offset)?;
    let coarse = lp::solve_lp(&kernel, omega, grid / 2, opts.lp_offset)?;
    let gap = (fine.primal - fine.dual).abs();
    if gap > 1e-6 * fine.dual.abs().max(1e-300) {
        return Err(Error::Accuracy {
            message: format!("LP duality gap {gap:e} exceeds tolerance"),
            estimate: scale * fine.primal,
        });
    }
    let value = fine.primal.max(0.0);
    let error = (fine.primal - coarse.primal).abs() + gap + fine.truncation;
    // φ = ω(π/m)/π · cos(m t + θ) is in H_ω for concave ω
    let m = (n - p + 1) as f64;
    let lower = omega.eval(PI / m) / (PI * p as f64);
    Ok(WorstCaseResult {
        value: scale * value,
        normalized: value,
        method: Method::Lp,
        error_estimate: scale * error,
        instance: instance(seq, n, p, beta, &ClassSpec::Homega(omega.clone())),
        lower_bound: omega.is_convex().then_some(scale * lower),
        upper_bound: None,
        grid: Some(grid),
    })
}

/// Dispatches on the class.
pub fn worstcase(
    seq: &PsiSequence,
    n: u64,
    p: u64,
    beta: f64,
    class: &ClassSpec,
    opts: &WorstCaseOptions,
) -> Result<WorstCaseResult> {
    match class {
        ClassSpec::Us(s) => worstcase_us(seq, &VpConfig::new(n, p, beta, *s)?, opts),
        ClassSpec::Homega(w) => {
            VpConfig::new(n, p, beta, Exponent::INFINITY)?;
            worstcase_homega_lp(seq, n, p, beta, w, opts)
        }
    }
}

/// `p q^{−m} E` against a priori two-sided bounds, Poisson kernel only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub instance: Instance,
    /// `p q^{−(n−p+1)} E`.
    pub normalized: f64,
    /// `1` for `U_s`, `ω(1/(n−p+1))` for `H_ω`.
    pub unit: f64,
    /// Lower bound from the extremal candidate.
    pub candidate_lower: f64,
    /// Upper bound from `|K| ≤ Σ τ(k) q^k < q^m/(p(1−q)²)`.
    pub a_priori_upper: f64,
    /// `normalized / unit`: the largest admissible `C⁽¹⁾` for this instance.
    pub c1_fit: f64,
    /// `normalized (1−q)² / unit`: the smallest admissible `C⁽²⁾`.
    pub c2_fit: f64,
    pub consistent: bool,
}

pub fn normalized_bounds_check(
    seq: &PsiSequence,
    n: u64,
    p: u64,
    beta: f64,
    class: &ClassSpec,
    opts: &WorstCaseOptions,
) -> Result<BoundsReport> {
    if !seq.is_geometric() {
        return domain("the normalised bounds check applies to the Poisson kernel ψ(k) = q^k");
    }
    let q = seq.q();
    let m = (n - p.min(n) + 1) as f64;
    let r = worstcase(seq, n, p, beta, class, opts)?;
    let normalized = p as f64 * r.normalized;
    let (unit, candidate_lower, a_priori_upper) = match class {
        ClassSpec::Us(s) => {
            let sp = s.conjugate();
            let mass = if sp.is_infinite() { 1.0 } else { (2.0 * PI).powf(1.0 / sp.value()) };
            (1.0, 1.0 / sin_norm(*s)?, mass / (PI * (1.0 - q).powi(2)))
        }
        ClassSpec::Homega(w) => {
            // E ≤ (1/π)∫|φ(x−t) − φ(x)||K(t)| dt ≤ (1/π)‖K‖_∞ 2∫_0^π ω
            let int = integrate_panels(&|t| w.eval(t), &[0.0, PI], 1e-12)?.value;
            (w.eval(1.0 / m), w.eval(PI / m) / PI, 2.0 * int / (PI * (1.0 - q).powi(2)))
        }
    };
    let slack = 1e-9 * normalized.abs().max(1e-300) + p as f64 * r.error_estimate / r.value.max(1e-300) * normalized;
    let consistent = normalized + slack >= candidate_lower && normalized <= a_priori_upper + slack;
    Ok(BoundsReport {
        instance: r.instance,
        normalized,
        unit,
        candidate_lower,
        a_priori_upper,
        c1_fit: normalized / unit,
        c2_fit: normalized * (1.0 - q).powi(2) / unit,
        consistent,
    })
}

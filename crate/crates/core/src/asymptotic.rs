//! Main terms and remainder envelopes of the asymptotic equalities for
//! `E(C^ψ_{β,s}; V_{n,p})` and `E(C^ψ_β H_ω; V_{n,p})`.
//!
//! Envelopes are the bracketed expressions multiplying the unspecified
//! bounded factor; they are reported, never treated as error bounds.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::elliptic::elliptic_k_checked;
use crate::error::{domain, Result};
use crate::exponent::Exponent;
use crate::quad::{cos_norm, integrate, lp_norm_periodic_with, omega_sine_integral, NormOptions};
use crate::sequence::{Family, PsiSequence};
use crate::worstcase::{
    worstcase, ClassSpec, Instance, ModulusOfContinuity, WorstCaseOptions, WorstCaseResult,
};

/// `q^p` above this value is reported as outside the large-`p` regime.
pub const LARGE_P_THRESHOLD: f64 = 0.1;

/// `K_{q,p}(s') = 2^{−1/s'} ‖√(1 − 2q^p cos pt + q^{2p}) / (1 − 2q cos t + q²)‖_{s'}`.
pub fn k_qp(q: f64, p: u64, s_prime: Exponent, tol: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return domain(format!("q = {q} must lie in (0, 1)"));
    }
    if p == 0 {
        return domain("p must be at least 1");
    }
    let qp = q.powi(p as i32);
    let pf = p as f64;
    let g = |t: f64| {
        let a = (0.5 * pf * t).sin();
        let b = (0.5 * t).sin();
        ((1.0 - qp) * (1.0 - qp) + 4.0 * qp * a * a).sqrt() / ((1.0 - q) * (1.0 - q) + 4.0 * q * b * b)
    };
    let opts = NormOptions { grid: 8192usize.max(64 * p as usize), tol };
    let norm = lp_norm_periodic_with(g, s_prime, &opts)?.value;
    Ok(norm * 2f64.powf(-s_prime.reciprocal()))
}

/// `2(1 − q^{2p})/(1 − q²) K(q^p)`, the closed form of `K_{q,p}(1)`.
pub fn k_qp_elliptic(q: f64, p: u64) -> Result<f64> {
    let qp = q.powi(p as i32);
    Ok(2.0 * (1.0 - qp * qp) / (1.0 - q * q) * elliptic_k_checked(qp)?.value)
}

/// `σ(s', p)`.
pub fn sigma_exponent(s_prime: Exponent, p: u64) -> u32 {
    match (s_prime.is_one(), p) {
        (_, p) if p >= 2 => 3,
        (true, _) => 1,
        (false, _) => 2,
    }
}

/// `γ(p)`.
pub fn gamma_exponent(p: u64) -> u32 {
    if p == 1 {
        2
    } else {
        3
    }
}

/// `ε_{n−p+1}` as used in envelopes: the certified bound where one exists,
/// otherwise the observed scan.
pub fn envelope_epsilon(seq: &PsiSequence, m: u64) -> Result<f64> {
    match seq.epsilon_certified(m) {
        Some(e) => Ok(e),
        None => seq.epsilon(m),
    }
}

fn check_np(n: u64, p: u64) -> Result<u64> {
    if p == 0 || p > n {
        return domain(format!("need 1 ≤ p ≤ n, got n = {n}, p = {p}"));
    }
    Ok(n - p + 1)
}

fn transfer_factor(q: f64, p: u64) -> f64 {
    (p as f64).min(1.0 / (1.0 - q)) / (1.0 - q).powi(2)
}

/// `(‖cos‖_{s'}/π^{1+1/s'}) K_{q,p}(s') / p`: the main term divided by `ψ(n−p+1)`.
pub fn thm2_main_normalized(q: f64, p: u64, s: Exponent, tol: f64) -> Result<f64> {
    let sp = s.conjugate();
    let c = cos_norm(sp)? / PI.powf(1.0 + sp.reciprocal());
    Ok(c * k_qp(q, p, sp, tol)? / p as f64)
}

/// `(ψ(n−p+1)/p)(‖cos‖_{s'}/π^{1+1/s'}) K_{q,p}(s')`.
pub fn thm2_main_term(seq: &PsiSequence, n: u64, p: u64, s: Exponent, tol: f64) -> Result<f64> {
    let m = check_np(n, p)?;
    Ok(seq.psi(m)? * thm2_main_normalized(seq.q(), p, s, tol)?)
}

/// `(ψ(m)/p)[1/(m(1−q)^σ) + (ε_m/(1−q)²) min{p, 1/(1−q)}]`, `m = n−p+1`.
pub fn thm2_remainder_envelope(seq: &PsiSequence, n: u64, p: u64, s: Exponent) -> Result<f64> {
    let m = check_np(n, p)?;
    let q = seq.q();
    let sigma = sigma_exponent(s.conjugate(), p);
    let eps = envelope_epsilon(seq, m)?;
    let bracket = 1.0 / (m as f64 * (1.0 - q).powi(sigma as i32)) + eps * transfer_factor(q, p);
    Ok(seq.psi(m)? / p as f64 * bracket)
}

/// The `s = ∞`, `p → ∞` form `(ψ(m)/p)·4/(π(1 − q²))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LargePReport {
    pub main_term: f64,
    /// `(ψ(m)/p)[q^p/(1−q) + 1/(m(1−q)^{σ(1,p)}) + ε_m/(1−q)³]`.
    pub remainder_envelope: f64,
    /// `q^p ≤ 0.1`.
    pub in_regime: bool,
}

pub fn thm2_large_p(seq: &PsiSequence, n: u64, p: u64) -> Result<LargePReport> {
    let m = check_np(n, p)?;
    let q = seq.q();
    let pre = seq.psi(m)? / p as f64;
    let qp = q.powi(p as i32);
    let eps = envelope_epsilon(seq, m)?;
    let sigma = sigma_exponent(Exponent::ONE, p);
    Ok(LargePReport {
        main_term: pre * 4.0 / (PI * (1.0 - q * q)),
        remainder_envelope: pre
            * (qp / (1.0 - q) + 1.0 / (m as f64 * (1.0 - q).powi(sigma as i32)) + eps / (1.0 - q).powi(3)),
        in_regime: qp <= LARGE_P_THRESHOLD,
    })
}

/// Warnings for the hypotheses on `ω`.
pub fn omega_warnings(omega: &ModulusOfContinuity) -> Vec<String> {
    let mut out = Vec::new();
    if !omega.is_convex() {
        out.push(format!("{omega} is not flagged convex"));
    }
    let d = omega.divergence_check();
    if !d.diverges && !omega.is_zero() {
        out.push(format!(
            "ω(t)/t does not appear to diverge as t → 0 (ω(2^-40)·2^40 = {:.3e}); the main term does not dominate",
            d.last_ratio
        ));
    }
    out
}

/// Main term over `H_ω` divided by `ψ(n−p+1)`.
pub fn thm3_main_normalized(q: f64, p: u64, m: u64, omega: &ModulusOfContinuity, tol: f64) -> Result<f64> {
    let qp = q.powi(p as i32);
    let k = elliptic_k_checked(qp)?.value;
    let c = 4.0 / (PI * PI) * (1.0 - qp * qp) / (1.0 - q * q) * k;
    Ok(c * omega_sine_integral(omega, m, tol)? / p as f64)
}

/// `(ψ(m)/p)(4/π²)((1−q^{2p})/(1−q²)) K(q^p) ∫_0^{π/2} ω(2t/m) sin t dt`.
pub fn thm3_main_term(seq: &PsiSequence, n: u64, p: u64, omega: &ModulusOfContinuity, tol: f64) -> Result<f64> {
    let m = check_np(n, p)?;
    Ok(seq.psi(m)? * thm3_main_normalized(seq.q(), p, m, omega, tol)?)
}

/// `(ψ(m)/p)[ω(π)/((1−q)^γ m) + (ε_m/(1−q)²) min{p, 1/(1−q)} ω(1/m)]`.
pub fn thm3_remainder_envelope(seq: &PsiSequence, n: u64, p: u64, omega: &ModulusOfContinuity) -> Result<f64> {
    let m = check_np(n, p)?;
    let q = seq.q();
    let mf = m as f64;
    let eps = envelope_epsilon(seq, m)?;
    let bracket = omega.eval(PI) / ((1.0 - q).powi(gamma_exponent(p) as i32) * mf)
        + eps * transfer_factor(q, p) * omega.eval(1.0 / mf);
    Ok(seq.psi(m)? / p as f64 * bracket)
}

/// Hölder-class form of the `H_ω` main term, `ω(t) = t^α`.
pub fn holder_main_term(seq: &PsiSequence, n: u64, p: u64, alpha: f64, tol: f64) -> Result<f64> {
    let m = check_np(n, p)?;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return domain(format!("Hölder exponent {alpha} must lie in (0, 1]"));
    }
    let q = seq.q();
    let qp = q.powi(p as i32);
    let k = elliptic_k_checked(qp)?.value;
    let int = integrate(|t| t.powf(alpha) * t.sin(), 0.0, FRAC_PI_2, tol)?.value;
    let pre = seq.psi(m)? / (p as f64 * (m as f64).powf(alpha));
    Ok(pre * 2f64.powf(2.0 + alpha) / (PI * PI) * (1.0 - qp * qp) / (1.0 - q * q) * k * int)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticReport {
    pub theorem: String,
    pub instance: Instance,
    pub main_term: f64,
    pub remainder_envelope: f64,
    pub exact_value: Option<f64>,
    /// `exact_value / main_term`.
    pub ratio: Option<f64>,
    /// `|exact − main| / ψ(n−p+1)`.
    pub residual: Option<f64>,
    /// `|exact − main| / remainder_envelope`.
    pub residual_ratio: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
pub struct AsymptoticOptions {
    pub worst: WorstCaseOptions,
    /// Compute the exact worst case alongside the main term.
    pub exact: bool,
}

impl Default for AsymptoticOptions {
    fn default() -> Self {
        AsymptoticOptions { worst: WorstCaseOptions::default(), exact: true }
    }
}

fn instance(seq: &PsiSequence, n: u64, p: u64, beta: f64, class: &ClassSpec) -> Instance {
    Instance { seq: seq.to_string(), n, p, beta, class: class.to_string() }
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    theorem: &str,
    seq: &PsiSequence,
    n: u64,
    p: u64,
    beta: f64,
    class: &ClassSpec,
    main_norm: f64,
    envelope: f64,
    exact: Option<WorstCaseResult>,
    warnings: Vec<String>,
) -> Result<AsymptoticReport> {
    let scale = seq.psi(n - p + 1)?;
    let main_term = scale * main_norm;
    let (exact_value, ratio, residual, residual_ratio) = match exact {
        Some(r) => {
            let res = (r.normalized - main_norm).abs();
            let env_norm = envelope / scale;
            (Some(r.value), Some(r.normalized / main_norm), Some(res), (env_norm > 0.0).then(|| res / env_norm))
        }
        None => (None, None, None, None),
    };
    Ok(AsymptoticReport {
        theorem: theorem.to_string(),
        instance: instance(seq, n, p, beta, class),
        main_term,
        remainder_envelope: envelope,
        exact_value,
        ratio,
        residual,
        residual_ratio,
        warnings,
    })
}

fn large_p_warning(q: f64, p: u64, s: Exponent) -> Vec<String> {
    let qp = q.powi(p as i32);
    if s.is_infinite() && qp > LARGE_P_THRESHOLD {
        vec![format!("q^p = {qp:.3e} > {LARGE_P_THRESHOLD}: outside the large-p regime of the simplified s = ∞ form")]
    } else {
        Vec::new()
    }
}

/// Theorem 2 (`U_s`) or Theorem 3 (`H_ω`) for any sequence.
pub fn theorem_eval(
    seq: &PsiSequence,
    n: u64,
    p: u64,
    beta: f64,
    class: &ClassSpec,
    opts: &AsymptoticOptions,
) -> Result<AsymptoticReport> {
    let m = check_np(n, p)?;
    let tol = opts.worst.tol;
    let exact = if opts.exact { Some(worstcase(seq, n, p, beta, class, &opts.worst)?) } else { None };
    match class {
        ClassSpec::Us(s) => {
            let main = thm2_main_normalized(seq.q(), p, *s, tol)?;
            let env = thm2_remainder_envelope(seq, n, p, *s)?;
            assemble("2", seq, n, p, beta, class, main, env, exact, large_p_warning(seq.q(), p, *s))
        }
        ClassSpec::Homega(w) => {
            let main = thm3_main_normalized(seq.q(), p, m, w, tol)?;
            let env = thm3_remainder_envelope(seq, n, p, w)?;
            assemble("3", seq, n, p, beta, class, main, env, exact, omega_warnings(w))
        }
    }
}

/// Compares the exact worst case for `ψ` with the one for the Poisson kernel
/// with the same `q`, both divided by their first retained coefficient.
pub fn thm1_transfer(
    seq: &PsiSequence,
    n: u64,
    p: u64,
    beta: f64,
    class: &ClassSpec,
    opts: &WorstCaseOptions,
) -> Result<AsymptoticReport> {
    let m = check_np(n, p)?;
    let q = seq.q();
    let geo = PsiSequence::geometric(q)?;
    let exact = worstcase(seq, n, p, beta, class, opts)?;
    let companion = if seq.is_geometric() { exact.clone() } else { worstcase(&geo, n, p, beta, class, opts)? };
    let eps = envelope_epsilon(seq, m)?;
    let mut env_norm = eps / p as f64 * transfer_factor(q, p);
    let mut warnings = Vec::new();
    if let ClassSpec::Homega(w) = class {
        env_norm *= w.eval(1.0 / m as f64);
        warnings = omega_warnings(w);
    }
    if eps >= 0.5 * (1.0 - q) {
        warnings.push(format!("ε_{m} = {eps:.3e} is not below (1−q)/2; the residual bound is not yet in force"));
    }
    let scale = seq.psi(m)?;
    let main_norm = companion.normalized;
    let res = (exact.normalized - main_norm).abs();
    Ok(AsymptoticReport {
        theorem: "1".into(),
        instance: instance(seq, n, p, beta, class),
        main_term: scale * main_norm,
        remainder_envelope: scale * env_norm,
        exact_value: Some(exact.value),
        ratio: Some(exact.normalized / main_norm),
        residual: Some(res),
        residual_ratio: (env_norm > 0.0).then(|| res / env_norm),
        warnings,
    })
}

/// Corollary forms for the Neumann and polyharmonic Poisson kernels: the
/// theorem main term with the corollary-specific remainder envelope.
pub fn corollary_eval(
    seq: &PsiSequence,
    n: u64,
    p: u64,
    beta: f64,
    class: &ClassSpec,
    opts: &AsymptoticOptions,
) -> Result<AsymptoticReport> {
    let (label, c) = match seq.family() {
        Family::Neumann => ("cor1", 1.0),
        Family::Polyharmonic { order } => ("cor2", *order as f64),
        _ => return domain("corollaries apply to the Neumann and polyharmonic Poisson kernels"),
    };
    let m = check_np(n, p)?;
    let q = seq.q();
    let mf = m as f64;
    let mut report = theorem_eval(seq, n, p, beta, class, opts)?;
    let pre = seq.psi(m)? / p as f64;
    let tail = c * q * transfer_factor(q, p);
    let envelope = match class {
        ClassSpec::Us(s) => {
            let sigma = sigma_exponent(s.conjugate(), p);
            pre / mf * (1.0 / (1.0 - q).powi(sigma as i32) + tail)
        }
        ClassSpec::Homega(w) => {
            let gamma = gamma_exponent(p);
            pre / mf * (w.eval(PI) / (1.0 - q).powi(gamma as i32) + tail * w.eval(1.0 / mf))
        }
    };
    report.theorem = label.into();
    report.remainder_envelope = envelope;
    if let (Some(exact), true) = (report.exact_value, envelope > 0.0) {
        report.residual_ratio = Some((exact - report.main_term).abs() / envelope);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponent_tables() {
        let inf = Exponent::INFINITY;
        assert_eq!(sigma_exponent(Exponent::ONE, 1), 1);
        assert_eq!(sigma_exponent(Exponent::TWO, 1), 2);
        assert_eq!(sigma_exponent(inf, 1), 2);
        assert_eq!(sigma_exponent(Exponent::ONE, 3), 3);
        assert_eq!(gamma_exponent(1), 2);
        assert_eq!(gamma_exponent(2), 3);
        assert_eq!(gamma_exponent(17), 3);
    }

    #[test]
    fn elliptic_identity_spot() {
        for (q, p) in [(0.1, 1), (0.5, 3), (0.9, 8)] {
            let a = k_qp(q, p, Exponent::ONE, 1e-13).unwrap();
            let b = k_qp_elliptic(q, p).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-10);
        }
    }

    #[test]
    fn neumann_envelope_example() {
        // m = 9, p = 2, q = 0.5: ε = 0.05 and the ε addend is 0.4
        let seq = PsiSequence::neumann(0.5).unwrap();
        let env = thm2_remainder_envelope(&seq, 10, 2, Exponent::INFINITY).unwrap();
        let pre = seq.psi(9).unwrap() / 2.0;
        let sigma = sigma_exponent(Exponent::ONE, 2);
        assert_relative_eq!(env / pre - 1.0 / (9.0 * 0.5f64.powi(sigma as i32)), 0.4, epsilon = 1e-14);
    }

    #[test]
    fn holder_matches_thm3() {
        let seq = PsiSequence::geometric(0.5).unwrap();
        for alpha in [0.25, 0.5, 0.75] {
            let w = ModulusOfContinuity::power(alpha).unwrap();
            let a = thm3_main_term(&seq, 20, 3, &w, 1e-15).unwrap();
            let b = holder_main_term(&seq, 20, 3, alpha, 1e-15).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn thm2_s_infinity_substitution() {
        let seq = PsiSequence::geometric(0.4).unwrap();
        let main = thm2_main_term(&seq, 12, 3, Exponent::INFINITY, 1e-13).unwrap();
        let expect = seq.psi(10).unwrap() / 3.0 * 4.0 / (PI * PI) * k_qp_elliptic(0.4, 3).unwrap();
        assert_relative_eq!(main, expect, max_relative = 1e-11);
    }
}

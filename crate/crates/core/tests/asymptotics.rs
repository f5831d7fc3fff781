use std::f64::consts::PI;

use vpdev::asymptotic::{
    corollary_eval, holder_main_term, k_qp, k_qp_elliptic, theorem_eval, thm1_transfer, thm2_large_p, thm2_main_term,
    thm3_main_term, AsymptoticOptions,
};
use vpdev::quad::integrate;
use vpdev::{ClassSpec, Exponent, ModulusOfContinuity, PsiSequence, WorstCaseOptions};

#[test]
fn k_qp_two_by_parseval() {
    // g has Fourier series (1/(1−q)) Σ... ; check ‖g‖₂ against a plain quadrature of g²
    for (q, p) in [(0.3, 1u64), (0.5, 3), (0.8, 6)] {
        let qp: f64 = f64::powi(q, p as i32);
        let g = |t: f64| {
            ((1.0 - qp).powi(2) + 4.0 * qp * (p as f64 * t / 2.0).sin().powi(2)).sqrt()
                / ((1.0 - q).powi(2) + 4.0 * q * (t / 2.0).sin().powi(2))
        };
        let l2 = integrate(|t| g(t).powi(2), 0.0, 2.0 * PI, 1e-13).unwrap().value.sqrt();
        let k = k_qp(q, p, Exponent::TWO, 1e-12).unwrap();
        assert!((k - l2 / 2f64.sqrt()).abs() <= 1e-10 * k, "{k} vs {}", l2 / 2f64.sqrt());
    }
}

#[test]
fn elliptic_identity_off_grid() {
    for q in [0.05, 0.37, 0.93, 0.97] {
        for p in [1u64, 5, 13] {
            let a = k_qp(q, p, Exponent::ONE, 1e-13).unwrap();
            let b = k_qp_elliptic(q, p).unwrap();
            assert!((a - b).abs() <= 1e-10 * a, "q={q} p={p}: {a} vs {b}");
        }
    }
}

#[test]
fn main_terms_positive_and_decaying() {
    let seq = PsiSequence::neumann(0.5).unwrap();
    let w = ModulusOfContinuity::power(0.5).unwrap();
    for p in [1u64, 2, 5] {
        for s in [Exponent::ONE, Exponent::TWO, Exponent::INFINITY] {
            let v: Vec<f64> = [10u64, 20, 40].iter().map(|&m| thm2_main_term(&seq, m + p - 1, p, s, 1e-12).unwrap()).collect();
            assert!(v[0] > v[1] && v[1] > v[2] && v[2] > 0.0);
        }
        let v: Vec<f64> = [10u64, 20, 40].iter().map(|&m| thm3_main_term(&seq, m + p - 1, p, &w, 1e-12).unwrap()).collect();
        assert!(v[0] > v[1] && v[1] > v[2] && v[2] > 0.0);
    }
}

#[test]
fn geometric_ratio_within_fitted_rate() {
    let seq = PsiSequence::geometric(0.5).unwrap();
    let opts = AsymptoticOptions::default();
    for p in [1u64, 2, 4] {
        for s in [Exponent::ONE, Exponent::TWO, Exponent::INFINITY] {
            let dev: Vec<(f64, f64)> = [25u64, 50, 100, 200]
                .iter()
                .map(|&m| {
                    let r = theorem_eval(&seq, m + p - 1, p, 0.0, &ClassSpec::Us(s), &opts).unwrap();
                    (m as f64, (r.ratio.unwrap() - 1.0).abs())
                })
                .collect();
            let c = dev[..2].iter().map(|(m, d)| m * d).fold(0.0, f64::max);
            for &(m, d) in &dev[2..] {
                assert!(d <= c / m + 1e-9, "p={p} s={s} m={m}: |ratio − 1| = {d:e} above {c}/m");
            }
        }
    }
}

#[test]
fn holder_form_matches_theorem3() {
    let seq = PsiSequence::polyharmonic(0.6, 2).unwrap();
    for alpha in [0.25, 0.5, 0.75] {
        let w = ModulusOfContinuity::power(alpha).unwrap();
        for (n, p) in [(20u64, 1u64), (40, 7)] {
            let a = holder_main_term(&seq, n, p, alpha, 1e-14).unwrap();
            let b = thm3_main_term(&seq, n, p, &w, 1e-14).unwrap();
            assert!((a - b).abs() <= 1e-12 * b, "α={alpha}: {a} vs {b}");
        }
    }
}

#[test]
fn transfer_is_exact_for_geometric() {
    let seq = PsiSequence::geometric(0.4).unwrap();
    let r = thm1_transfer(&seq, 30, 4, 0.0, &ClassSpec::Us(Exponent::INFINITY), &WorstCaseOptions::default()).unwrap();
    assert_eq!(r.residual, Some(0.0));
    assert_eq!(r.ratio, Some(1.0));
}

#[test]
fn transfer_envelope_neumann_homega() {
    let seq = PsiSequence::neumann(0.5).unwrap();
    let w = ModulusOfContinuity::power(0.5).unwrap();
    let opts = WorstCaseOptions { lp_grid: Some(512), ..Default::default() };
    for p in [1u64, 4] {
        let r = thm1_transfer(&seq, 12 + p - 1, p, 0.0, &ClassSpec::Homega(w.clone()), &opts).unwrap();
        assert!(r.residual_ratio.unwrap() < 16.0, "p={p}: {:?}", r.residual_ratio);
    }
}

#[test]
fn large_p_regime_flag() {
    let seq = PsiSequence::geometric(0.5).unwrap();
    assert!(!thm2_large_p(&seq, 40, 2).unwrap().in_regime);
    let r = thm2_large_p(&seq, 40, 10).unwrap();
    assert!(r.in_regime);
    let main = thm2_main_term(&seq, 40, 10, Exponent::INFINITY, 1e-12).unwrap();
    assert!((r.main_term - main).abs() <= r.remainder_envelope);
}

#[test]
fn corollaries_dispatch_on_family() {
    let opts = AsymptoticOptions { exact: false, ..Default::default() };
    let class = ClassSpec::Us(Exponent::TWO);
    let c1 = corollary_eval(&PsiSequence::neumann(0.5).unwrap(), 30, 3, 0.0, &class, &opts).unwrap();
    assert_eq!(c1.theorem, "cor1");
    let c2 = corollary_eval(&PsiSequence::polyharmonic(0.5, 3).unwrap(), 30, 3, 0.0, &class, &opts).unwrap();
    assert_eq!(c2.theorem, "cor2");
    assert!(corollary_eval(&PsiSequence::geometric(0.5).unwrap(), 30, 3, 0.0, &class, &opts).is_err());
}

#[test]
fn corollary_residual_inside_envelope() {
    let opts = AsymptoticOptions::default();
    for seq in [PsiSequence::neumann(0.5).unwrap(), PsiSequence::polyharmonic(0.5, 2).unwrap()] {
        for p in [1u64, 3] {
            let r = corollary_eval(&seq, 60 + p - 1, p, 0.0, &ClassSpec::Us(Exponent::INFINITY), &opts).unwrap();
            assert!(r.residual_ratio.unwrap() < 1.0, "{seq} p={p}: {:?}", r.residual_ratio);
        }
    }
}

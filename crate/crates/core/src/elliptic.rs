//! Complete elliptic integral of the first kind.

use std::f64::consts::FRAC_PI_2;

use crate::error::{domain, Result};

/// Below this distance from `ρ = 1` the value is reported as ill-conditioned.
pub const CONDITIONING_THRESHOLD: f64 = 1e-8;

/// `K(ρ)` together with a note when `ρ` is close enough to 1 that the
/// logarithmic singularity amplifies input rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticValue {
    pub value: f64,
    pub warning: Option<String>,
}

/// `K(ρ) = ∫_0^{π/2} dt / √(1 − ρ² sin² t)` by the arithmetic-geometric mean.
pub fn elliptic_k(rho: f64) -> Result<f64> {
    Ok(elliptic_k_checked(rho)?.value)
}

pub fn elliptic_k_checked(rho: f64) -> Result<EllipticValue> {
    if !(0.0..1.0).contains(&rho) {
        return domain(format!("elliptic modulus ρ = {rho} must lie in [0, 1)"));
    }
    // k' computed as √((1−ρ)(1+ρ)) keeps the digits of 1 − ρ
    let mut a = 1.0f64;
    let mut b = ((1.0 - rho) * (1.0 + rho)).sqrt();
    for _ in 0..64 {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let m = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = m;
    }
    let value = FRAC_PI_2 / a;
    let warning = (1.0 - rho < CONDITIONING_THRESHOLD).then(|| {
        format!(
            "ρ = {rho} is within {:.1e} of 1; relative sensitivity of K is about {:.1e}",
            1.0 - rho,
            1.0 / ((1.0 - rho) * value)
        )
    });
    Ok(EllipticValue { value, warning })
}

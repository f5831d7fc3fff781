use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Error, Result};

#[derive(Clone)]
pub enum ModulusKind {
    /// `t^α`, `α ∈ (0, 1]` (Hölder class).
    Power { alpha: f64 },
    /// `ln^β(1 + t)`, `β ∈ (0, 1)`.
    Log { beta: f64 },
    /// `t`.
    Linear,
    /// `ω ≡ 0`: only constants belong to `H_ω`.
    Zero,
    Custom { label: String, f: Arc<dyn Fn(f64) -> f64 + Send + Sync> },
}

/// A majorant `ω(t)` of modulus-of-continuity type, optionally scaled.
#[derive(Clone)]
pub struct ModulusOfContinuity {
    kind: ModulusKind,
    scale: f64,
    convex: bool,
}

impl fmt::Debug for ModulusOfContinuity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ModulusOfContinuity({self})")
    }
}

/// Sampled structural checks of a modulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulusDiagnostics {
    pub zero_at_origin: bool,
    pub nondecreasing: bool,
    pub subadditive: bool,
    /// `ω((x+y)/2) ≥ (ω(x)+ω(y))/2` on all sampled pairs (convex upwards).
    pub midpoint_concave: bool,
}

impl ModulusDiagnostics {
    pub fn is_modulus(&self) -> bool {
        self.zero_at_origin && self.nondecreasing && self.subadditive
    }
}

/// Sampled test of `ω(t)/t → ∞` as `t → 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceCheck {
    pub diverges: bool,
    /// `ω(2^{-40})·2^{40}`.
    pub last_ratio: f64,
    /// Mean growth of `ln(ω(t)/t)` per halving over the last ten samples.
    pub growth_per_halving: f64,
}

impl ModulusOfContinuity {
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return domain(format!("Hölder exponent {alpha} must lie in (0, 1]"));
        }
        Ok(ModulusOfContinuity { kind: ModulusKind::Power { alpha }, scale: 1.0, convex: true })
    }

    pub fn log(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return domain(format!("log exponent {beta} must lie in (0, 1)"));
        }
        Ok(ModulusOfContinuity { kind: ModulusKind::Log { beta }, scale: 1.0, convex: true })
    }

    pub fn linear() -> Self {
        ModulusOfContinuity { kind: ModulusKind::Linear, scale: 1.0, convex: true }
    }

    pub fn zero() -> Self {
        ModulusOfContinuity { kind: ModulusKind::Zero, scale: 1.0, convex: true }
    }

    pub fn custom(
        label: impl Into<String>,
        convex: bool,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        ModulusOfContinuity {
            kind: ModulusKind::Custom { label: label.into(), f: Arc::new(f) },
            scale: 1.0,
            convex,
        }
    }

    /// `c·ω`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return domain(format!("scale {c} must be a finite nonnegative number"));
        }
        Ok(ModulusOfContinuity { scale: self.scale * c, ..self.clone() })
    }

    /// Parses `power:alpha=0.5`, `log:beta=0.5`, `linear` or `zero`, each with
    /// an optional `scale=<c>`.
    pub fn from_spec(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
        let mut alpha = None;
        let mut beta = None;
        let mut scale = 1.0;
        for kv in args.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got '{kv}'")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("invalid number '{v}' in modulus spec")))?;
            match k.trim() {
                "alpha" => alpha = Some(v),
                "beta" => beta = Some(v),
                "scale" => scale = v,
                other => return Err(Error::Parse(format!("unknown modulus parameter '{other}'"))),
            }
        }
        let base = match name {
            "power" | "holder" => Self::power(
                alpha.ok_or_else(|| Error::Parse("power modulus needs alpha=<value>".into()))?,
            )?,
            "log" => Self::log(
                beta.ok_or_else(|| Error::Parse("log modulus needs beta=<value>".into()))?,
            )?,
            "linear" => Self::linear(),
            "zero" => Self::zero(),
            other => return Err(Error::Parse(format!("unknown modulus '{other}'"))),
        };
        base.scaled(scale)
    }

    pub fn kind(&self) -> &ModulusKind {
        &self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn is_convex(&self) -> bool {
        self.convex
    }

    pub fn is_zero(&self) -> bool {
        self.scale == 0.0 || matches!(self.kind, ModulusKind::Zero)
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let base = match &self.kind {
            ModulusKind::Power { alpha } => t.powf(*alpha),
            ModulusKind::Log { beta } => t.ln_1p().powf(*beta),
            ModulusKind::Linear => t,
            ModulusKind::Zero => 0.0,
            ModulusKind::Custom { f, .. } => f(t),
        };
        self.scale * base
    }

    pub fn diagnostics(&self) -> ModulusDiagnostics {
        const SAMPLES: usize = 64;
        let tol = 1e-12 * (1.0 + self.eval(std::f64::consts::PI));
        let ts: Vec<f64> = (0..=SAMPLES)
            .map(|i| std::f64::consts::PI * i as f64 / SAMPLES as f64)
            .collect();
        let ws: Vec<f64> = ts.iter().map(|&t| self.eval(t)).collect();
        let zero_at_origin = ws[0] == 0.0;
        let nondecreasing = ws.windows(2).all(|w| w[1] + tol >= w[0]);
        let mut subadditive = true;
        let mut midpoint_concave = true;
        for i in 0..=SAMPLES {
            for j in i..=SAMPLES {
                let (x, y) = (ts[i], ts[j]);
                if self.eval(x + y) > ws[i] + ws[j] + tol {
                    subadditive = false;
                }
                if self.eval(0.5 * (x + y)) + tol < 0.5 * (ws[i] + ws[j]) {
                    midpoint_concave = false;
                }
            }
        }
        ModulusDiagnostics { zero_at_origin, nondecreasing, subadditive, midpoint_concave }
    }

    /// Samples `ω(t)/t` at `t = 2^{-j}`, `j = 1..40`, and reports divergence
    /// when `ln(ω(t)/t)` still grows by at least `1e-3` per halving at the end.
    pub fn divergence_check(&self) -> DivergenceCheck {
        let ratios: Vec<f64> = (1..=40)
            .map(|j| {
                let t = 0.5f64.powi(j);
                self.eval(t) / t
            })
            .collect();
        let last_ratio = *ratios.last().expect("forty samples");
        if ratios.iter().any(|r| !(*r > 0.0)) {
            return DivergenceCheck { diverges: false, last_ratio, growth_per_halving: 0.0 };
        }
        let tail = &ratios[29..];
        let growth = tail.windows(2).map(|w| (w[1] / w[0]).ln()).sum::<f64>() / (tail.len() - 1) as f64;
        DivergenceCheck { diverges: growth >= 1e-3, last_ratio, growth_per_halving: growth }
    }
}

impl fmt::Display for ModulusOfContinuity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ModulusKind::Power { alpha } => write!(f, "power:alpha={alpha}")?,
            ModulusKind::Log { beta } => write!(f, "log:beta={beta}")?,
            ModulusKind::Linear => f.write_str("linear")?,
            ModulusKind::Zero => f.write_str("zero")?,
            ModulusKind::Custom { label, .. } => write!(f, "custom:{label}")?,
        }
        if self.scale != 1.0 {
            let sep = if matches!(self.kind, ModulusKind::Linear | ModulusKind::Zero) { ':' } else { ',' };
            write!(f, "{sep}scale={}", self.scale)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_moduli_pass_diagnostics() {
        for w in [
            ModulusOfContinuity::power(0.5).unwrap(),
            ModulusOfContinuity::log(0.5).unwrap(),
            ModulusOfContinuity::linear(),
            ModulusOfContinuity::zero(),
        ] {
            let d = w.diagnostics();
            assert!(d.is_modulus(), "{w}");
            assert!(d.midpoint_concave, "{w}");
        }
        let bad = ModulusOfContinuity::custom("t^2", false, |t| t * t);
        let d = bad.diagnostics();
        assert!(!d.subadditive);
        assert!(!d.midpoint_concave);
    }

    #[test]
    fn divergence_condition() {
        assert!(ModulusOfContinuity::power(0.5).unwrap().divergence_check().diverges);
        assert!(ModulusOfContinuity::power(0.95).unwrap().divergence_check().diverges);
        assert!(ModulusOfContinuity::log(0.5).unwrap().divergence_check().diverges);
        assert!(!ModulusOfContinuity::linear().divergence_check().diverges);
        assert!(!ModulusOfContinuity::zero().divergence_check().diverges);
        let log1 = ModulusOfContinuity::custom("ln(1+t)", true, f64::ln_1p);
        assert!(!log1.divergence_check().diverges);
    }

    #[test]
    fn spec_roundtrip() {
        let w = ModulusOfContinuity::from_spec("power:alpha=0.5,scale=2").unwrap();
        assert_eq!(w.eval(0.25), 1.0);
        assert_eq!(w.to_string(), "power:alpha=0.5,scale=2");
        let z = ModulusOfContinuity::from_spec("zero").unwrap();
        assert!(z.is_zero());
        assert!(ModulusOfContinuity::from_spec("power").is_err());
        assert!(ModulusOfContinuity::from_spec("power:alpha=1.5").is_err());
        let l = ModulusOfContinuity::from_spec(&ModulusOfContinuity::linear().scaled(3.0).unwrap().to_string()).unwrap();
        assert_eq!(l.eval(1.0), 3.0);
    }
}

//! Definite integrals and periodic `L_s` norms on `[0, 2π]`.
//!
//! Integrals use globally adaptive 15-point Gauss–Kronrod. Periodic norms
//! split the period at the sign changes of the integrand, so `|g|^s` is smooth
//! on every panel and the rule keeps its geometric convergence. The sup norm is
//! a dense grid maximum polished by golden-section search.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::exponent::Exponent;
use crate::worstcase::ModulusOfContinuity;

/// Default number of grid points for periodic norms.
pub const DEFAULT_GRID: usize = 8192;

const MAX_INTERVALS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct NormOptions {
    /// Sampling grid used to locate sign changes and extrema.
    pub grid: usize,
    /// Relative tolerance on the norm.
    pub tol: f64,
}

impl Default for NormOptions {
    fn default() -> Self {
        NormOptions { grid: DEFAULT_GRID, tol: 1e-12 }
    }
}

// Kronrod abscissae on [-1, 1]; odd indices are the Gauss nodes.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One Gauss–Kronrod 7/15 panel: `(integral, error estimate)`.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = resk * 0.5;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let result = resk * h;
    let resabs = resabs * h.abs();
    let resasc = resasc * h.abs();
    let mut err = ((resk - resg) * h).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (result, err)
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .partial_cmp(&other.err)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.a.partial_cmp(&self.a).unwrap_or(Ordering::Equal))
    }
}

/// Globally adaptive integration over the panels delimited by `breaks`
/// (sorted, at least two entries) to absolute tolerance `abs_tol`.
pub(crate) fn integrate_panels<F: Fn(f64) -> f64>(
    f: &F,
    breaks: &[f64],
    abs_tol: f64,
) -> Result<QuadratureResult> {
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (value, err) = gk15(f, w[0], w[1]);
            evaluations += 15;
            heap.push(Panel { a: w[0], b: w[1], value, err });
        }
    }
    let totals = |heap: &BinaryHeap<Panel>| {
        // fixed order so the sum does not depend on heap layout
        let mut items: Vec<(f64, f64, f64)> = heap.iter().map(|p| (p.a, p.value, p.err)).collect();
        items.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(Ordering::Equal));
        items.iter().fold((0.0, 0.0), |(v, e), p| (v + p.1, e + p.2))
    };
    let mut err_sum: f64 = heap.iter().map(|p| p.err).sum();
    let mut mass: f64 = heap.iter().map(|p| p.value.abs()).sum();
    loop {
        // below a few hundred ulps of the magnitude the estimate is roundoff
        if err_sum <= abs_tol.max(256.0 * f64::EPSILON * mass) {
            let (value, err) = totals(&heap);
            return Ok(QuadratureResult { value, abs_error_estimate: err, evaluations });
        }
        if heap.len() >= MAX_INTERVALS {
            let (value, err) = totals(&heap);
            return Err(Error::Accuracy {
                message: format!("adaptive quadrature stalled with error {err:e} > {abs_tol:e}"),
                estimate: value,
            });
        }
        let worst = heap.pop().expect("non-empty panel set");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // cannot split further; accept what we have
            heap.push(Panel { err: 0.0, ..worst });
            err_sum = heap.iter().map(|p| p.err).sum();
            continue;
        }
        let (v1, e1) = gk15(f, worst.a, mid);
        let (v2, e2) = gk15(f, mid, worst.b);
        evaluations += 30;
        err_sum += e1 + e2 - worst.err;
        mass += v1.abs() + v2.abs() - worst.value.abs();
        heap.push(Panel { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, err: e2 });
        if heap.len() % 64 == 0 {
            // resynchronise the running sum against drift
            err_sum = heap.iter().map(|p| p.err).sum();
            mass = heap.iter().map(|p| p.value.abs()).sum();
        }
    }
}

/// `∫_a^b g` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(g: F, a: f64, b: f64, tol: f64) -> Result<QuadratureResult> {
    if !(a < b) {
        return domain(format!("integration bounds [{a}, {b}] are not increasing"));
    }
    if !(tol > 0.0) {
        return domain("tolerance must be positive");
    }
    integrate_panels(&g, &[a, b], tol)
}

/// Root of `f` in `[a, b]` given a sign change, by the Illinois method.
pub(crate) fn refine_root<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut fa: f64, mut b: f64, mut fb: f64) -> f64 {
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    let mut side = 0i8;
    let mut c = a;
    for _ in 0..100 {
        c = (a * fb - b * fa) / (fb - fa);
        if !(c > a.min(b) && c < a.max(b)) {
            c = 0.5 * (a + b);
        }
        let fc = f(c);
        if fc == 0.0 || (b - a).abs() <= 4.0 * f64::EPSILON * c.abs().max(1.0) {
            return c;
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    c
}

/// Maximises `f` on `[a, b]` by golden-section search.
fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> (f64, f64) {
    const R: f64 = 0.618_033_988_749_894_8;
    let mut x1 = b - R * (b - a);
    let mut x2 = a + R * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a) > 1e-13 * (1.0 + a.abs()) {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + R * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - R * (b - a);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

fn sample_period<F: Fn(f64) -> f64>(g: &F, grid: usize) -> (f64, Vec<f64>) {
    let h = TAU / grid as f64;
    let vals = (0..grid).map(|i| g(i as f64 * h)).collect();
    (h, vals)
}

/// Largest value of `f` over one period: grid maximum refined around the
/// best `candidates` local maxima.
fn polished_max<F: Fn(f64) -> f64>(f: &F, grid: usize, candidates: usize) -> (f64, f64) {
    let (h, vals) = sample_period(f, grid);
    let n = vals.len();
    let mut peaks: Vec<usize> = (0..n)
        .filter(|&i| vals[i] >= vals[(i + n - 1) % n] && vals[i] >= vals[(i + 1) % n])
        .collect();
    peaks.sort_by(|&i, &j| vals[j].partial_cmp(&vals[i]).unwrap_or(Ordering::Equal).then(i.cmp(&j)));
    let mut best = (0.0, f64::NEG_INFINITY);
    for &i in peaks.iter().take(candidates.max(1)) {
        let c = i as f64 * h;
        let (x, v) = golden_max(f, c - h, c + h);
        let (x, v) = if vals[i] > v { (c, vals[i]) } else { (x, v) };
        if v > best.1 {
            best = (x, v);
        }
    }
    if peaks.is_empty() {
        // constant sample; any point is a maximiser
        best = (0.0, vals[0]);
    }
    best
}

/// Extremes of a periodic function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrema {
    pub max: f64,
    pub argmax: f64,
    pub min: f64,
    pub argmin: f64,
}

pub fn extrema_periodic<F: Fn(f64) -> f64>(g: F, grid: usize) -> Extrema {
    let (argmax, max) = polished_max(&g, grid, 16);
    let (argmin, negmin) = polished_max(&|t| -g(t), grid, 16);
    Extrema { max, argmax, min: -negmin, argmin }
}

/// Panel boundaries on `[0, 2π]`: uniform panels plus every sign change of
/// `g` found on the sampling grid.
fn periodic_breaks<F: Fn(f64) -> f64>(g: &F, grid: usize) -> (Vec<f64>, f64) {
    let (h, vals) = sample_period(g, grid);
    let n = vals.len();
    let panel_stride = 8usize;
    let mut breaks = Vec::with_capacity(n / panel_stride + n / 4 + 2);
    for i in 0..n {
        if i % panel_stride == 0 {
            breaks.push(i as f64 * h);
        }
        let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
        let (fa, fb) = (vals[i], vals[(i + 1) % n]);
        if fa != 0.0 && fb != 0.0 && fa.signum() != fb.signum() {
            let r = refine_root(g, a, fa, b, fb);
            if r > a && r < b {
                breaks.push(r);
            }
        }
    }
    breaks.push(TAU);
    breaks.sort_by(|x, y| x.partial_cmp(y).unwrap_or(Ordering::Equal));
    breaks.dedup();
    // trapezoid estimate of ∫|g|, used to scale tolerances
    let mass = vals.iter().map(|v| v.abs()).sum::<f64>() * h;
    (breaks, mass)
}

/// `‖g‖_s` over one period `[0, 2π]` with default options.
pub fn lp_norm_periodic<F: Fn(f64) -> f64>(g: F, s: Exponent, tol: f64) -> Result<QuadratureResult> {
    lp_norm_periodic_with(g, s, &NormOptions { tol, ..NormOptions::default() })
}

pub fn lp_norm_periodic_with<F: Fn(f64) -> f64>(
    g: F,
    s: Exponent,
    opts: &NormOptions,
) -> Result<QuadratureResult> {
    if !(opts.tol > 0.0) {
        return domain("tolerance must be positive");
    }
    if opts.grid < 16 {
        return domain("norm grid needs at least 16 points");
    }
    if s.is_infinite() {
        let (_, v) = polished_max(&|t| g(t).abs(), opts.grid, 16);
        return Ok(QuadratureResult {
            value: v,
            abs_error_estimate: v * 1e-15,
            evaluations: opts.grid * 2 + 16 * 120,
        });
    }
    let sv = s.value();
    let (breaks, mass) = periodic_breaks(&g, opts.grid);
    let integrand = |t: f64| {
        let v = g(t).abs();
        if sv == 1.0 {
            v
        } else if sv == 2.0 {
            v * v
        } else {
            v.powf(sv)
        }
    };
    // rough size of ∫|g|^s from the grid, for a relative stopping rule
    let scale = if sv == 1.0 {
        mass
    } else {
        let (h, vals) = sample_period(&g, opts.grid);
        vals.iter().map(|v| v.abs().powf(sv)).sum::<f64>() * h
    };
    if scale == 0.0 {
        let r = integrate_panels(&integrand, &breaks, f64::MIN_POSITIVE)?;
        return Ok(QuadratureResult { value: r.value.powf(1.0 / sv), ..r });
    }
    let r = integrate_panels(&integrand, &breaks, opts.tol * scale)?;
    let value = r.value.max(0.0).powf(1.0 / sv);
    let rel = if r.value > 0.0 { r.abs_error_estimate / r.value } else { 0.0 };
    Ok(QuadratureResult {
        value,
        abs_error_estimate: value * rel / sv,
        evaluations: r.evaluations + opts.grid,
    })
}

/// `∫_0^{π/2} ω(2t/N) sin t dt`.
pub fn omega_sine_integral(omega: &ModulusOfContinuity, n: u64, tol: f64) -> Result<f64> {
    if n == 0 {
        return domain("N must be at least 1");
    }
    let nf = n as f64;
    let r = integrate(|t| omega.eval(2.0 * t / nf) * t.sin(), 0.0, FRAC_PI_2, tol)?;
    Ok(r.value)
}

/// `‖cos t‖_s` over `[0, 2π]`; closed form for `s ∈ {1, 2, ∞}`.
pub fn cos_norm(s: Exponent) -> Result<f64> {
    if s.is_infinite() {
        return Ok(1.0);
    }
    let sv = s.value();
    if sv == 1.0 {
        return Ok(4.0);
    }
    if sv == 2.0 {
        return Ok(PI.sqrt());
    }
    let r = integrate(|t| t.cos().powf(sv), 0.0, FRAC_PI_2, 1e-15)?;
    Ok((4.0 * r.value).powf(1.0 / sv))
}

/// `‖sin t‖_s`, equal to `‖cos t‖_s` by translation.
pub fn sin_norm(s: Exponent) -> Result<f64> {
    cos_norm(s)
}

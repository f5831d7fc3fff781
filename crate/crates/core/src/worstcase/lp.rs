//! Discretised worst case over `H_ω`.
//!
//! `φ` ranges over continuous piecewise-linear functions on the uniform grid
//! `t_j = 2πj/N` whose nodal values satisfy `|φ_i − φ_j| ≤ ω(d(t_i, t_j))` for
//! every pair, `d` the circular distance. For concave `ω` every such
//! interpolant lies in `H_ω`, so the optimum is a lower bound for the exact
//! worst case, and it is nondecreasing under grid doubling.
//!
//! The functional `(1/π)∫ φ K` reduces to `(1/π) Σ w_j φ_j` with
//! `w_j = h Σ_k c_k sinc²(kh/2) cos(k t_j − θ)`. The LP is solved through its
//! dual, a transportation problem from `{w > 0}` to `{w < 0}` with costs
//! `ω(d)`; the primal `φ` is recovered from the dual prices and extended to
//! the whole grid, and both objective values are reported.

use std::f64::consts::{PI, TAU};

use crate::error::{domain, Error, Result};
use crate::kernel::{phase, TailKernel};
use crate::worstcase::modulus::ModulusOfContinuity;
use crate::worstcase::transport::solve_transport;

/// Outcome of one LP solve.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub grid: usize,
    /// Primal objective `(1/π) Σ w_j φ_j` of the extended primal solution,
    /// for the kernel normalised by `ψ(n − p + 1)`.
    pub primal: f64,
    /// Dual objective (transport cost).
    pub dual: f64,
    /// Largest violation of `|φ_i − φ_j| ≤ ω(d_ij)` over all pairs.
    pub max_violation: f64,
    /// Bound on the effect of truncating the kernel series.
    pub truncation: f64,
    pub pivots: usize,
    /// Nodal values of the maximiser.
    pub phi: Vec<f64>,
}

/// Hat-function weights `w_j` of the normalised tail kernel, with the
/// grid shifted by `offset`.
pub fn hat_weights(kernel: &TailKernel, grid: usize, offset: f64) -> Vec<f64> {
    let h = TAU / grid as f64;
    let (c, s) = phase(kernel.spec().beta());
    let harmonics: Vec<(f64, f64)> = kernel
        .series()
        .harmonics()
        .map(|(k, ck)| {
            let x = 0.5 * k as f64 * h;
            let sinc = x.sin() / x;
            (k as f64, h * ck * sinc * sinc)
        })
        .collect();
    (0..grid)
        .map(|j| {
            let t = j as f64 * h + offset;
            harmonics
                .iter()
                .map(|&(k, a)| {
                    let (sn, cs) = (k * t).sin_cos();
                    a * (cs * c + sn * s)
                })
                .sum()
        })
        .collect()
}

/// Circular grid distance `min(|i − j|, N − |i − j|)`.
fn grid_distance(i: usize, j: usize, n: usize) -> usize {
    let d = i.abs_diff(j);
    d.min(n - d)
}

/// Solves the discretised problem on `grid` points.
pub fn solve_lp(kernel: &TailKernel, omega: &ModulusOfContinuity, grid: usize, offset: f64) -> Result<LpSolution> {
    if grid < 4 {
        return domain("LP grid needs at least 4 points");
    }
    let h = TAU / grid as f64;
    let omega_table: Vec<f64> = (0..=grid / 2).map(|d| omega.eval(d as f64 * h)).collect();
    let truncation = 2.0 * omega.eval(PI) * kernel.series().remainder_bound();

    let mut w = hat_weights(kernel, grid, offset);
    let wmax = w.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    if wmax == 0.0 || omega.is_zero() {
        return Ok(LpSolution {
            grid,
            primal: 0.0,
            dual: 0.0,
            max_violation: 0.0,
            truncation,
            pivots: 0,
            phi: vec![0.0; grid],
        });
    }
    // exact zero sum on the normalised scale
    for x in w.iter_mut() {
        *x /= wmax;
    }
    let mean = w.iter().sum::<f64>() / grid as f64;
    for x in w.iter_mut() {
        *x -= mean;
    }
    let mut sources = Vec::new();
    let mut sinks = Vec::new();
    for (j, &x) in w.iter().enumerate() {
        if x > 0.0 {
            sources.push(j);
        } else if x < 0.0 {
            sinks.push(j);
        }
    }
    let mut supply: Vec<f64> = sources.iter().map(|&j| w[j]).collect();
    let demand: Vec<f64> = sinks.iter().map(|&j| -w[j]).collect();
    let residual = demand.iter().sum::<f64>() - supply.iter().sum::<f64>();
    let last = supply.len() - 1;
    supply[last] += residual;
    if !(supply[last] > 0.0) {
        return Err(Error::Accuracy {
            message: "hat weights are not balanced to working precision".into(),
            estimate: residual.abs(),
        });
    }

    let cost = |i: usize, j: usize| omega_table[grid_distance(sources[i], sinks[j], grid)];
    let max_pivots = 200 * grid * grid;
    let sol = solve_transport(&supply, &demand, &cost, max_pivots)?;

    // φ = −(potential) on the support: φ_source = u, φ_sink = −v, shifted
    // so that φ_i − φ_j ≤ c_ij; extend by the lower McShane envelope
    let sink_phi: Vec<f64> = sol.v.iter().map(|v| -v).collect();
    let phi: Vec<f64> = (0..grid)
        .map(|x| {
            sinks
                .iter()
                .zip(&sink_phi)
                .map(|(&s, &f)| f + omega_table[grid_distance(x, s, grid)])
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mut max_violation = 0.0f64;
    for i in 0..grid {
        for j in (i + 1)..grid {
            let v = (phi[i] - phi[j]).abs() - omega_table[grid_distance(i, j, grid)];
            max_violation = max_violation.max(v);
        }
    }
    let scale = wmax / PI;
    let primal = scale * w.iter().zip(&phi).map(|(a, b)| a * b).sum::<f64>();
    let dual = scale * sol.cost;
    Ok(LpSolution {
        grid,
        primal,
        dual,
        max_violation,
        truncation,
        pivots: sol.pivots,
        phi,
    })
}

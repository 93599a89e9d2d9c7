//! Memory quadrature, stabilizing coefficients and the monotone right-hand side.
//!
//! The memory term `g(t, x) = ∫₀ᵗ g₀(t, x, s, u(t, x), u(s, x)) ds` is evaluated
//! with the composite trapezoidal rule on the stored time levels. Its weights are
//! nonnegative, which is what lets the discrete `F1` inherit monotonicity from
//! `g₀` being nondecreasing in `η2`.

use crate::discretization::{Field, Grid1D, Subrange};
use crate::error::{Error, Result};
use crate::model::{ProblemSpec, VolterraKernel};

pub const DEFAULT_MARGIN: f64 = 1e-6;
pub const DEFAULT_SAMPLES: usize = 8;

/// `c = max(c̲ + b̲ + margin, 0)` on every grid point, with `b̲` kept for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilizerField {
    pub c_total: Field,
    pub b_under: Field,
}

/// Trapezoidal weight of level `m` in an integral over `[0, t_k]`, without `dt`.
fn trapezoid_weight(m: usize, k: usize) -> f64 {
    if m == 0 || m == k {
        0.5
    } else {
        1.0
    }
}

/// Trapezoidal approximation of the memory integral at `(t_k, x_i)`.
pub fn eval_g(kernel: &VolterraKernel, u: &Field, k: usize, i: usize, grid: &Grid1D) -> f64 {
    if k == 0 || kernel.vanishes {
        return 0.0;
    }
    let t = grid.t(k);
    let x = grid.x(i);
    let eta1 = u.get(k, i);
    let g0 = &kernel.g0;
    let mut sum = 0.0;
    for m in 0..=k {
        sum += trapezoid_weight(m, k) * g0(t, x, grid.t(m), eta1, u.get(m, i));
    }
    sum * grid.dt
}

/// [`eval_g`] for every node of level `k`.
pub fn eval_g_row(kernel: &VolterraKernel, u: &Field, k: usize, grid: &Grid1D) -> Vec<f64> {
    (0..grid.nodes())
        .map(|i| eval_g(kernel, u, k, i, grid))
        .collect()
}

fn samples(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |j| {
        if j + 1 == n {
            hi
        } else {
            lo + (hi - lo) * j as f64 / (n - 1) as f64
        }
    })
}

/// Sampled `c̲ = sup(-f_u)` and `b̲ = ∫₀ᵗ sup(-∂g₀/∂η1) ds` over the bracket
/// fields, combined into the clamped shift `c`.
///
/// `margin` is added before the clamp to cover sampled suprema that fall short
/// of the true ones.
pub fn compute_stabilizers(
    spec: &ProblemSpec,
    grid: &Grid1D,
    u_hat: &Field,
    u_tilde: &Field,
    n_samples: usize,
    margin: f64,
) -> Result<StabilizerField> {
    if n_samples < 2 {
        return Err(Error::Stabilizer(format!(
            "n_samples = {n_samples}, at least 2 required"
        )));
    }
    for k in 0..grid.levels() {
        for i in 0..grid.nodes() {
            let (lo, hi) = (u_hat.get(k, i), u_tilde.get(k, i));
            if !(lo <= hi) {
                return Err(Error::BracketOrder {
                    step: k,
                    node: i,
                    lower: lo,
                    upper: hi,
                });
            }
        }
    }

    let mut c_total = Field::on_grid(grid);
    let mut b_under = Field::on_grid(grid);
    for k in 0..grid.levels() {
        let t = grid.t(k);
        for i in 0..grid.nodes() {
            let x = grid.x(i);
            let c_under = reaction_sup(spec, t, x, u_hat.get(k, i), u_tilde.get(k, i), n_samples)
                .ok_or_else(|| {
                    Error::Stabilizer(format!(
                        "zero-width bracket at level {k}, node {i} and no analytic f_u or c bound"
                    ))
                })?;
            let b = memory_sup(spec, grid, u_hat, u_tilde, k, i, n_samples)?;
            b_under.set(k, i, b);
            c_total.set(k, i, (c_under + b + margin).max(0.0));
        }
    }
    Ok(StabilizerField { c_total, b_under })
}

fn reaction_sup(spec: &ProblemSpec, t: f64, x: f64, lo: f64, hi: f64, n: usize) -> Option<f64> {
    let reaction = &spec.reaction;
    if let Some(bound) = reaction.c_bar_bound {
        return Some(bound);
    }
    let width = hi - lo;
    let eps = 1e-6 * width;
    let neg_slope = |u: f64| match &reaction.f_u {
        Some(f_u) => -f_u(t, x, u),
        None => -((reaction.f)(t, x, u + eps) - (reaction.f)(t, x, u - eps)) / (2.0 * eps),
    };
    if reaction.f_u.is_none() && !(width > 0.0) {
        return None;
    }
    Some(samples(lo, hi, n).map(neg_slope).fold(f64::NEG_INFINITY, f64::max))
}

fn memory_sup(
    spec: &ProblemSpec,
    grid: &Grid1D,
    u_hat: &Field,
    u_tilde: &Field,
    k: usize,
    i: usize,
    n: usize,
) -> Result<f64> {
    let kernel = &spec.kernel;
    if k == 0 || kernel.vanishes {
        return Ok(0.0);
    }
    let t = grid.t(k);
    let x = grid.x(i);
    let (lo1, hi1) = (u_hat.get(k, i), u_tilde.get(k, i));
    let eps = 1e-6 * (hi1 - lo1);
    if kernel.dg0_deta1.is_none() && !(eps > 0.0) {
        return Err(Error::Stabilizer(format!(
            "zero-width bracket at level {k}, node {i} and no analytic dg0/deta1"
        )));
    }
    let neg_slope = |s: f64, e1: f64, e2: f64| match &kernel.dg0_deta1 {
        Some(d) => -d(t, x, s, e1, e2),
        None => -((kernel.g0)(t, x, s, e1 + eps, e2) - (kernel.g0)(t, x, s, e1 - eps, e2)) / (2.0 * eps),
    };
    let eta1: Vec<f64> = samples(lo1, hi1, n).collect();
    let mut sum = 0.0;
    for m in 0..=k {
        let s = grid.t(m);
        let mut sup = f64::NEG_INFINITY;
        for e2 in samples(u_hat.get(m, i), u_tilde.get(m, i), n) {
            for &e1 in &eta1 {
                sup = sup.max(neg_slope(s, e1, e2));
            }
        }
        sum += trapezoid_weight(m, k) * sup;
    }
    Ok(sum * grid.dt)
}

fn f1_at(spec: &ProblemSpec, stab: &StabilizerField, u: &Field, k: usize, i: usize, grid: &Grid1D) -> f64 {
    let value = u.get(k, i);
    stab.c_total.get(k, i) * value
        + (spec.reaction.f)(grid.t(k), grid.x(i), value)
        + eval_g(&spec.kernel, u, k, i, grid)
}

/// `F1 = c u + f(t, x, u) + g(t, x, u)` on every node of level `k`.
pub fn eval_f1(spec: &ProblemSpec, stab: &StabilizerField, u: &Field, k: usize, grid: &Grid1D) -> Vec<f64> {
    (0..grid.nodes())
        .map(|i| f1_at(spec, stab, u, k, i, grid))
        .collect()
}

/// `F1` of `u` at every level, restricted to the columns of `window`.
/// Other columns are left at zero.
pub fn eval_f1_window(
    spec: &ProblemSpec,
    stab: &StabilizerField,
    u: &Field,
    grid: &Grid1D,
    window: Subrange,
) -> Field {
    let mut out = Field::on_grid(grid);
    for k in 0..grid.levels() {
        let row = out.row_mut(k);
        for i in window.lo..=window.hi {
            row[i] = f1_at(spec, stab, u, k, i, grid);
        }
    }
    out
}

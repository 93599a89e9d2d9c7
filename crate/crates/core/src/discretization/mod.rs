//! Uniform space-time grid and the implicit upwind discretization of
//! `∂/∂t - L + c`.
//!
//! Subdomains are index windows of a single shared grid, so traces and
//! extensions move between them without interpolation.

mod tridiag;

pub use tridiag::{thomas_solve, TridiagonalSystem};

use crate::error::{Error, Result};
use crate::model::{BoundaryCondition, EllipticCoefficients, SpaceTimeDomain};
use crate::verify::m_matrix_check;

pub const MIN_INTERVALS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub nx: usize,
    pub nt: usize,
    pub dx: f64,
    pub dt: f64,
    pub x_left: f64,
    pub x_right: f64,
    pub t_final: f64,
}

impl Grid1D {
    /// Spatial node `i`; the last node is exactly `x_right`.
    pub fn x(&self, i: usize) -> f64 {
        if i == self.nx {
            self.x_right
        } else {
            self.x_left + i as f64 * self.dx
        }
    }

    /// Time level `k`; the last level is exactly `T`.
    pub fn t(&self, k: usize) -> f64 {
        if k == self.nt {
            self.t_final
        } else {
            k as f64 * self.dt
        }
    }

    pub fn nodes(&self) -> usize {
        self.nx + 1
    }

    pub fn levels(&self) -> usize {
        self.nt + 1
    }

    pub fn full_window(&self) -> Subrange {
        Subrange { lo: 0, hi: self.nx }
    }
}

pub fn build_grid(domain: SpaceTimeDomain, nx: usize, nt: usize) -> Result<Grid1D> {
    if !domain.is_valid() {
        return Err(Error::InvalidGrid(format!(
            "degenerate domain [{}, {}] x (0, {}]",
            domain.x_left, domain.x_right, domain.t_final
        )));
    }
    if nx < MIN_INTERVALS {
        return Err(Error::InvalidGrid(format!(
            "nx = {nx} is below the minimum of {MIN_INTERVALS}"
        )));
    }
    if nt < 1 {
        return Err(Error::InvalidGrid("nt must be at least 1".into()));
    }
    Ok(Grid1D {
        nx,
        nt,
        dx: (domain.x_right - domain.x_left) / nx as f64,
        dt: domain.t_final / nt as f64,
        x_left: domain.x_left,
        x_right: domain.x_right,
        t_final: domain.t_final,
    })
}

/// Values indexed by `(time level, node)`, stored row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        }
    }

    pub fn on_grid(grid: &Grid1D) -> Self {
        Self::zeros(grid.levels(), grid.nodes())
    }

    /// Samples `f(t, x)` at every grid point.
    pub fn from_fn(grid: &Grid1D, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut field = Self::on_grid(grid);
        for k in 0..grid.levels() {
            let t = grid.t(k);
            for (i, v) in field.row_mut(k).iter_mut().enumerate() {
                *v = f(t, grid.x(i));
            }
        }
        field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, k: usize, i: usize) -> f64 {
        self.values[k * self.cols + i]
    }

    pub fn set(&mut self, k: usize, i: usize, value: f64) {
        self.values[k * self.cols + i] = value;
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.cols..(k + 1) * self.cols]
    }

    pub fn row_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.values[k * self.cols..(k + 1) * self.cols]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn same_shape(&self, other: &Field) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        debug_assert!(self.same_shape(other));
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// First non-finite entry as `(level, node)`.
    pub fn find_non_finite(&self) -> Option<(usize, usize)> {
        self.values
            .iter()
            .position(|v| !v.is_finite())
            .map(|p| (p / self.cols, p % self.cols))
    }

    /// Copies the columns of `local` (a window-sized field) into `window`.
    pub fn paste_window(&mut self, window: Subrange, local: &Field) {
        debug_assert_eq!(local.cols, window.len());
        for k in 0..self.rows {
            self.row_mut(k)[window.lo..=window.hi].copy_from_slice(local.row(k));
        }
    }

    /// Point-wise midpoint of two fields.
    pub fn midpoint(a: &Field, b: &Field) -> Field {
        debug_assert!(a.same_shape(b));
        Field {
            rows: a.rows,
            cols: a.cols,
            values: a
                .values
                .iter()
                .zip(&b.values)
                .map(|(x, y)| 0.5 * (x + y))
                .collect(),
        }
    }
}

/// Inclusive node window `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Subrange {
    pub lo: usize,
    pub hi: usize,
}

impl Subrange {
    pub fn new(lo: usize, hi: usize, nx: usize) -> Result<Self> {
        if lo >= hi || hi > nx || hi - lo < 2 {
            return Err(Error::InvalidWindow { lo, hi, nx });
        }
        Ok(Self { lo, hi })
    }

    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, i: usize) -> bool {
        self.lo <= i && i <= self.hi
    }
}

/// Condition imposed at one end of a window at a single time level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EndCondition {
    /// Value row `u = value`.
    Pinned(f64),
    /// One-sided `α (u_end - u_inner)/dx + β u_end = h`.
    Robin { alpha: f64, beta: f64, h: f64 },
}

/// Condition at one end of a window for every time level.
#[derive(Clone, Copy)]
pub enum BoundaryClosure<'a> {
    /// The physical boundary operator.
    Physical(&'a BoundaryCondition),
    /// Artificial interface: Dirichlet trace indexed by time level.
    Pinned(&'a [f64]),
}

impl BoundaryClosure<'_> {
    pub fn at(&self, k: usize, t: f64) -> EndCondition {
        match self {
            BoundaryClosure::Pinned(trace) => EndCondition::Pinned(trace[k]),
            BoundaryClosure::Physical(bc) => {
                let alpha = (bc.alpha0)(t);
                let beta = (bc.beta0)(t);
                let h = (bc.h)(t);
                if alpha == 0.0 {
                    EndCondition::Pinned(h / beta)
                } else {
                    EndCondition::Robin { alpha, beta, h }
                }
            }
        }
    }
}

/// Matrix and boundary right-hand side of one implicit Euler step of
/// `(∂/∂t - a ∂²/∂x² - b ∂/∂x + c) u` on `window` at level `t`.
///
/// `c_row` is indexed by global node. Interior rows carry a zero right-hand
/// side; the caller adds `u_prev/dt + q`.
pub fn assemble_step(
    grid: &Grid1D,
    coeffs: &EllipticCoefficients,
    c_row: &[f64],
    t: f64,
    left: EndCondition,
    right: EndCondition,
    window: Subrange,
) -> Result<TridiagonalSystem> {
    if window.lo >= window.hi || window.hi > grid.nx || window.hi - window.lo < 2 {
        return Err(Error::InvalidWindow {
            lo: window.lo,
            hi: window.hi,
            nx: grid.nx,
        });
    }
    let n = window.len();
    let mut sys = TridiagonalSystem::zeros(n);
    let inv_dt = 1.0 / grid.dt;
    let inv_dx = 1.0 / grid.dx;
    let inv_dx2 = inv_dx * inv_dx;

    for r in 1..n - 1 {
        let i = window.lo + r;
        let x = grid.x(i);
        let a = (coeffs.diffusion)(t, x);
        if !(a > 0.0) {
            return Err(Error::NonPositiveDiffusion {
                value: a,
                t,
                node: i,
            });
        }
        let b = (coeffs.advection)(t, x);
        let mut sub = -a * inv_dx2;
        let mut sup = -a * inv_dx2;
        // -b u_x, upwinded so both neighbours keep a nonpositive weight.
        if b > 0.0 {
            sup -= b * inv_dx;
        } else if b < 0.0 {
            sub += b * inv_dx;
        }
        sys.sub[r] = sub;
        sys.sup[r] = sup;
        sys.diag[r] = inv_dt + 2.0 * a * inv_dx2 + b.abs() * inv_dx + c_row[i];
    }

    match left {
        EndCondition::Pinned(value) => {
            sys.diag[0] = 1.0;
            sys.rhs[0] = value;
        }
        EndCondition::Robin { alpha, beta, h } => {
            sys.diag[0] = alpha * inv_dx + beta;
            sys.sup[0] = -alpha * inv_dx;
            sys.rhs[0] = h;
        }
    }
    match right {
        EndCondition::Pinned(value) => {
            sys.diag[n - 1] = 1.0;
            sys.rhs[n - 1] = value;
        }
        EndCondition::Robin { alpha, beta, h } => {
            sys.diag[n - 1] = alpha * inv_dx + beta;
            sys.sub[n - 1] = -alpha * inv_dx;
            sys.rhs[n - 1] = h;
        }
    }
    Ok(sys)
}

/// Time-marches `(∂/∂t - L + c) u = q` on `window` with implicit Euler.
///
/// `c_field` and `q_field` live on the whole grid; only the window columns are
/// read. Row 0 of the result is `initial_row`. With `audit` set, every
/// assembled matrix must pass [`m_matrix_check`].
#[allow(clippy::too_many_arguments)]
pub fn solve_linear_parabolic(
    grid: &Grid1D,
    window: Subrange,
    coeffs: &EllipticCoefficients,
    c_field: &Field,
    q_field: &Field,
    left: BoundaryClosure<'_>,
    right: BoundaryClosure<'_>,
    initial_row: &[f64],
    audit: bool,
) -> Result<Field> {
    let n = window.len();
    debug_assert_eq!(initial_row.len(), n);
    let inv_dt = 1.0 / grid.dt;
    let mut out = Field::zeros(grid.levels(), n);
    out.row_mut(0).copy_from_slice(initial_row);

    for k in 1..grid.levels() {
        let t = grid.t(k);
        let mut sys = assemble_step(
            grid,
            coeffs,
            c_field.row(k),
            t,
            left.at(k, t),
            right.at(k, t),
            window,
        )?;
        if audit {
            let report = m_matrix_check(&sys);
            if !report.is_m_matrix {
                return Err(Error::MMatrixAudit {
                    step: k,
                    row: report.worst_row,
                    detail: report.reason.unwrap_or_default(),
                });
            }
        }
        let q = q_field.row(k);
        {
            let prev = out.row(k - 1);
            for r in 1..n - 1 {
                sys.rhs[r] = prev[r] * inv_dt + q[window.lo + r];
            }
        }
        let solution = thomas_solve(&sys)?;
        if let Some(r) = solution.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                step: k,
                node: window.lo + r,
            });
        }
        out.row_mut(k).copy_from_slice(&solution);
    }
    Ok(out)
}

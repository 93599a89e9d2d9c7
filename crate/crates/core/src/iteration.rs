//! Monotone two-subdomain alternating Schwarz iteration.
//!
//! Four fields are carried: `u1j` is the composite iterate after the
//! subdomain-1 solve, `u2j` after the subdomain-2 solve, with `j = 1` the branch
//! started from the subsolution and `j = 2` the one started from the
//! supersolution. One sweep, per branch:
//!
//! 1. solve `(∂t - L + c) u1j' = F1(u1j)` on `[0, i1_hi]`, pinning node `i1_hi`
//!    to the trace of `u2j`, and take `u2j` outside the window;
//! 2. solve `(∂t - L + c) u2j' = F1(u2j)` on `[i2_lo, nx]`, pinning node
//!    `i2_lo` to the fresh `u1j'`, and take `u1j'` outside the window.
//!
//! The two branches share nothing and may run on separate threads.

use std::thread;
use std::time::Instant;

use crate::discretization::{solve_linear_parabolic, BoundaryClosure, Field, Grid1D, Subrange};
use crate::error::{Error, Result};
use crate::model::ProblemSpec;
use crate::verify::chain_summary;
use crate::volterra::{compute_stabilizers, eval_f1_window, StabilizerField, DEFAULT_MARGIN, DEFAULT_SAMPLES};

/// Subdomain 1 is `[0, i1_hi]`, subdomain 2 is `[i2_lo, nx]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decomposition {
    pub i1_hi: usize,
    pub i2_lo: usize,
}

impl Decomposition {
    pub fn new(i1_hi: usize, i2_lo: usize, nx: usize) -> Result<Self> {
        if i2_lo == 0 {
            return Err(Error::InvalidDecomposition("i2_lo must be positive".into()));
        }
        if i1_hi >= nx {
            return Err(Error::InvalidDecomposition(format!(
                "i1_hi = {i1_hi} must be below nx = {nx}"
            )));
        }
        if i2_lo >= i1_hi || i1_hi - i2_lo < 2 {
            return Err(Error::InvalidDecomposition(format!(
                "i2_lo = {i2_lo} must be at least 2 nodes left of i1_hi = {i1_hi}"
            )));
        }
        Ok(Self { i1_hi, i2_lo })
    }

    /// Interfaces at the given fractions of `nx`, rounded to nodes.
    pub fn proportional(nx: usize, i2_lo_frac: f64, i1_hi_frac: f64) -> Result<Self> {
        let at = |f: f64| (f * nx as f64).round() as usize;
        Self::new(at(i1_hi_frac), at(i2_lo_frac), nx)
    }

    pub fn windows(&self, nx: usize) -> (Subrange, Subrange) {
        (
            Subrange { lo: 0, hi: self.i1_hi },
            Subrange { lo: self.i2_lo, hi: nx },
        )
    }

    pub fn overlap(&self) -> Subrange {
        Subrange {
            lo: self.i2_lo,
            hi: self.i1_hi,
        }
    }

    /// Decomposition of the grid reflected through its midpoint.
    pub fn mirrored(&self, nx: usize) -> Result<Self> {
        Self::new(nx - self.i2_lo, nx - self.i1_hi, nx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// Degenerate decomposition: one window covering the whole grid.
    Single,
    Split(Decomposition),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationState {
    pub u11: Field,
    pub u12: Field,
    pub u21: Field,
    pub u22: Field,
    pub sweep_index: usize,
}

impl IterationState {
    /// Largest enclosure width, `max(u22 - u21, u12 - u11)` over the grid.
    pub fn gap(&self) -> f64 {
        let pairs = [(&self.u21, &self.u22), (&self.u11, &self.u12)];
        pairs
            .iter()
            .flat_map(|(lo, hi)| hi.values().iter().zip(lo.values()).map(|(h, l)| h - l))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_update(&self, prev: &IterationState) -> f64 {
        [
            self.u11.max_abs_diff(&prev.u11),
            self.u12.max_abs_diff(&prev.u12),
            self.u21.max_abs_diff(&prev.u21),
            self.u22.max_abs_diff(&prev.u22),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_sweeps: usize,
    pub c_margin: f64,
    pub n_samples: usize,
    /// Slack for the monotone-chain links.
    pub chain_slack: f64,
    /// Stop with [`Error::ChainViolation`] when a link fails beyond the slack.
    pub abort_on_chain_violation: bool,
    /// Run [`crate::verify::m_matrix_check`] on every assembled system.
    pub audit_mmatrix: bool,
    /// Run the lower and upper branches on separate threads.
    pub parallel_branches: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_sweeps: 200,
            c_margin: DEFAULT_MARGIN,
            n_samples: DEFAULT_SAMPLES,
            chain_slack: 1e-10,
            abort_on_chain_violation: true,
            audit_mmatrix: false,
            parallel_branches: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    pub sweep: usize,
    pub gap_lower_upper: f64,
    pub max_update: f64,
    /// Smallest margin over all chain links and nodes; negative means a violation.
    pub chain_violation: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceHistory {
    pub sweeps: Vec<SweepRecord>,
    /// Number of chain-link failures beyond the slack, over all sweeps.
    pub chain_failures: usize,
    pub systems_solved: usize,
    pub systems_audited: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub u: Field,
    pub u_lower: Field,
    pub u_upper: Field,
    pub converged: bool,
    pub sweeps_used: usize,
}

/// `u11 = u21 = û`, `u12 = u22 = ũ` sampled on the grid.
pub fn init_state(spec: &ProblemSpec, grid: &Grid1D) -> Result<IterationState> {
    let lower = Field::from_fn(grid, |t, x| (spec.bracket.u_hat)(t, x));
    let upper = Field::from_fn(grid, |t, x| (spec.bracket.u_tilde)(t, x));
    for k in 0..grid.levels() {
        for i in 0..grid.nodes() {
            let (lo, hi) = (lower.get(k, i), upper.get(k, i));
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
    Ok(IterationState {
        u11: lower.clone(),
        u21: lower,
        u12: upper.clone(),
        u22: upper,
        sweep_index: 0,
    })
}

struct SweepContext<'a> {
    spec: &'a ProblemSpec,
    grid: &'a Grid1D,
    stab: &'a StabilizerField,
    audit: bool,
}

impl SweepContext<'_> {
    fn initial_row(&self, window: Subrange) -> Vec<f64> {
        (window.lo..=window.hi)
            .map(|i| (self.spec.u0)(self.grid.x(i)))
            .collect()
    }

    fn solve(
        &self,
        window: Subrange,
        rhs_of: &Field,
        left: BoundaryClosure<'_>,
        right: BoundaryClosure<'_>,
    ) -> Result<Field> {
        let q = eval_f1_window(self.spec, self.stab, rhs_of, self.grid, window);
        solve_linear_parabolic(
            self.grid,
            window,
            &self.spec.coeffs,
            &self.stab.c_total,
            &q,
            left,
            right,
            &self.initial_row(window),
            self.audit,
        )
    }

    fn trace(field: &Field, node: usize) -> Vec<f64> {
        (0..field.rows()).map(|k| field.get(k, node)).collect()
    }

    /// One branch of a sweep: `(u1j, u2j) -> (u1j', u2j')`.
    fn branch(&self, layout: Layout, u1: &Field, u2: &Field) -> Result<(Field, Field)> {
        let spec = self.spec;
        match layout {
            Layout::Single => {
                let window = self.grid.full_window();
                let new = self.solve(
                    window,
                    u1,
                    BoundaryClosure::Physical(&spec.bc_left),
                    BoundaryClosure::Physical(&spec.bc_right),
                )?;
                Ok((new.clone(), new))
            }
            Layout::Split(decomp) => {
                let (w1, w2) = decomp.windows(self.grid.nx);

                let trace1 = Self::trace(u2, decomp.i1_hi);
                let local1 = self.solve(
                    w1,
                    u1,
                    BoundaryClosure::Physical(&spec.bc_left),
                    BoundaryClosure::Pinned(&trace1),
                )?;
                let mut new1 = u2.clone();
                new1.paste_window(w1, &local1);

                let trace2 = Self::trace(&new1, decomp.i2_lo);
                let local2 = self.solve(
                    w2,
                    u2,
                    BoundaryClosure::Pinned(&trace2),
                    BoundaryClosure::Physical(&spec.bc_right),
                )?;
                let mut new2 = new1.clone();
                new2.paste_window(w2, &local2);
                Ok((new1, new2))
            }
        }
    }

    fn systems_per_branch(&self, layout: Layout) -> usize {
        match layout {
            Layout::Single => self.grid.nt,
            Layout::Split(_) => 2 * self.grid.nt,
        }
    }
}

/// One sweep of both branches. `stab` must come from the initial bracket.
pub fn sweep(
    state: &IterationState,
    spec: &ProblemSpec,
    grid: &Grid1D,
    layout: Layout,
    stab: &StabilizerField,
    opts: &SolveOptions,
) -> Result<IterationState> {
    let ctx = SweepContext {
        spec,
        grid,
        stab,
        audit: opts.audit_mmatrix,
    };
    let ((u11, u21), (u12, u22)) = if opts.parallel_branches {
        thread::scope(|scope| {
            let upper = scope.spawn(|| ctx.branch(layout, &state.u12, &state.u22));
            let lower = ctx.branch(layout, &state.u11, &state.u21);
            let upper = upper.join().expect("upper branch panicked");
            Ok::<_, Error>((lower?, upper?))
        })?
    } else {
        (
            ctx.branch(layout, &state.u11, &state.u21)?,
            ctx.branch(layout, &state.u12, &state.u22)?,
        )
    };
    Ok(IterationState {
        u11,
        u12,
        u21,
        u22,
        sweep_index: state.sweep_index + 1,
    })
}

/// One sweep of the two-subdomain scheme.
pub fn dd_sweep(
    state: &IterationState,
    spec: &ProblemSpec,
    grid: &Grid1D,
    decomp: &Decomposition,
    stab: &StabilizerField,
    opts: &SolveOptions,
) -> Result<IterationState> {
    sweep(state, spec, grid, Layout::Split(*decomp), stab, opts)
}

/// Iterates until the bracket gap and the update size are both within `tol`,
/// or `max_sweeps` is reached. `observer` sees the initial state and every
/// state after a sweep.
pub fn run_observed(
    spec: &ProblemSpec,
    grid: &Grid1D,
    layout: Layout,
    opts: &SolveOptions,
    observer: &mut dyn FnMut(&IterationState),
) -> Result<(Solution, ConvergenceHistory)> {
    let mut state = init_state(spec, grid)?;
    let u_hat = state.u11.clone();
    let u_tilde = state.u12.clone();
    let stab = compute_stabilizers(spec, grid, &u_hat, &u_tilde, opts.n_samples, opts.c_margin)?;
    let ctx = SweepContext {
        spec,
        grid,
        stab: &stab,
        audit: opts.audit_mmatrix,
    };
    let systems_per_sweep = 2 * ctx.systems_per_branch(layout);

    observer(&state);
    let mut history = ConvergenceHistory::default();
    let mut converged = false;
    while state.sweep_index < opts.max_sweeps {
        let start = Instant::now();
        let number = state.sweep_index + 1;
        let at_sweep = |e: Error| Error::AtSweep {
            sweep: number,
            source: Box::new(e),
        };
        let next = sweep(&state, spec, grid, layout, &stab, opts).map_err(at_sweep)?;
        history.systems_solved += systems_per_sweep;
        if opts.audit_mmatrix {
            history.systems_audited += systems_per_sweep;
        }
        for field in [&next.u11, &next.u12, &next.u21, &next.u22] {
            if let Some((step, node)) = field.find_non_finite() {
                return Err(at_sweep(Error::NonFinite { step, node }));
            }
        }

        let chain = chain_summary(&state, &next, &u_hat, &u_tilde, opts.chain_slack)?;
        history.chain_failures += chain.violations.len();
        if opts.abort_on_chain_violation {
            if let Some(worst) = chain.worst_violation() {
                return Err(Error::ChainViolation {
                    sweep: number,
                    link: worst.link.to_string(),
                    step: worst.step,
                    node: worst.node,
                    margin: worst.margin,
                });
            }
        }

        let record = SweepRecord {
            sweep: number,
            gap_lower_upper: next.gap(),
            max_update: next.max_update(&state),
            chain_violation: chain.min_margin,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        };
        history.sweeps.push(record);
        state = next;
        observer(&state);
        if record.gap_lower_upper <= opts.tol && record.max_update <= opts.tol {
            converged = true;
            break;
        }
    }

    let solution = Solution {
        u: Field::midpoint(&state.u21, &state.u22),
        u_lower: state.u21,
        u_upper: state.u22,
        converged,
        sweeps_used: state.sweep_index,
    };
    Ok((solution, history))
}

pub fn run(
    spec: &ProblemSpec,
    grid: &Grid1D,
    layout: Layout,
    opts: &SolveOptions,
) -> Result<(Solution, ConvergenceHistory)> {
    run_observed(spec, grid, layout, opts, &mut |_| {})
}

pub fn run_dd(
    spec: &ProblemSpec,
    grid: &Grid1D,
    decomp: &Decomposition,
    opts: &SolveOptions,
) -> Result<(Solution, ConvergenceHistory)> {
    run(spec, grid, Layout::Split(*decomp), opts)
}

/// Classical two-sequence monotone iteration on the whole interval.
pub fn run_single_domain(
    spec: &ProblemSpec,
    grid: &Grid1D,
    opts: &SolveOptions,
) -> Result<(Solution, ConvergenceHistory)> {
    run(spec, grid, Layout::Single, opts)
}

//! Discrete verification: sub/supersolution residuals, the monotone chain,
//! M-matrix structure and empirical convergence orders.

use crate::discretization::{
    assemble_step, EndCondition, Field, Grid1D, TridiagonalSystem,
};
use crate::error::{Error, Result};
use crate::iteration::{run, IterationState, Layout, SolveOptions};
use crate::model::ProblemSpec;
use crate::volterra::eval_g;

pub const DEFAULT_RESIDUAL_SLACK: f64 = 1e-9;
pub const DEFAULT_CHAIN_SLACK: f64 = 1e-10;

/// Relative tolerance used when comparing a diagonal with its off-diagonal sum.
const DOMINANCE_RTOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct MMatrixReport {
    pub is_m_matrix: bool,
    /// First failing row, or the row with the smallest dominance margin.
    pub worst_row: usize,
    /// `diag - |sub| - |sup|` at `worst_row`.
    pub worst_margin: f64,
    pub reason: Option<String>,
}

/// Checks positive diagonal, nonpositive off-diagonals and diagonal dominance.
///
/// Every row must be weakly dominant. Rows that are only weakly dominant (a
/// zero-flux Robin end, say) must reach a strictly dominant row through nonzero
/// off-diagonal couplings; such a matrix is a nonsingular M-matrix, so its
/// inverse is entrywise nonnegative.
pub fn m_matrix_check(sys: &TridiagonalSystem) -> MMatrixReport {
    let n = sys.len();
    let margin = |i: usize| sys.diag[i] - sys.sub[i].abs() - sys.sup[i].abs();
    let fail = |row: usize, reason: String| MMatrixReport {
        is_m_matrix: false,
        worst_row: row,
        worst_margin: margin(row),
        reason: Some(reason),
    };

    let mut strict = vec![false; n];
    for i in 0..n {
        if !(sys.diag[i] > 0.0) {
            return fail(i, format!("diagonal {} is not positive", sys.diag[i]));
        }
        if sys.sub[i] > 0.0 || sys.sup[i] > 0.0 {
            return fail(
                i,
                format!("positive off-diagonal ({}, {})", sys.sub[i], sys.sup[i]),
            );
        }
        let m = margin(i);
        let tol = DOMINANCE_RTOL * sys.diag[i];
        if m < -tol {
            return fail(i, format!("not diagonally dominant (margin {m:e})"));
        }
        strict[i] = m > tol;
    }

    // Propagate strictness along nonzero couplings, in both directions.
    let mut reach = strict.clone();
    for i in 1..n {
        if !reach[i] && reach[i - 1] && sys.sub[i] != 0.0 {
            reach[i] = true;
        }
    }
    for i in (0..n.saturating_sub(1)).rev() {
        if !reach[i] && reach[i + 1] && sys.sup[i] != 0.0 {
            reach[i] = true;
        }
    }
    if let Some(i) = reach.iter().position(|r| !r) {
        return fail(
            i,
            "weakly dominant row not connected to a strictly dominant row".into(),
        );
    }

    let worst_row = (0..n)
        .min_by(|&a, &b| margin(a).total_cmp(&margin(b)))
        .unwrap_or(0);
    MMatrixReport {
        is_m_matrix: true,
        worst_row,
        worst_margin: if n > 0 { margin(worst_row) } else { 0.0 },
        reason: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BracketKind {
    Super,
    Sub,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum End {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    /// `(value, level, node)`.
    pub worst_interior: (f64, usize, usize),
    /// `(value, level, end)`.
    pub worst_boundary: (f64, usize, End),
    /// `(value, node)`.
    pub worst_initial: (f64, usize),
    pub slack: f64,
    pub passed: bool,
}

/// Signed residuals of a candidate super- or subsolution, computed with the
/// solver's own stencils and quadrature. Positive means the inequality holds.
pub fn check_bracket(
    spec: &ProblemSpec,
    grid: &Grid1D,
    candidate: &Field,
    kind: BracketKind,
    slack: f64,
) -> Result<ResidualReport> {
    if candidate.rows() != grid.levels() || candidate.cols() != grid.nodes() {
        return Err(Error::GridMismatch(format!(
            "candidate is {}x{}, grid is {}x{}",
            candidate.rows(),
            candidate.cols(),
            grid.levels(),
            grid.nodes()
        )));
    }
    let sign = match kind {
        BracketKind::Super => 1.0,
        BracketKind::Sub => -1.0,
    };
    let nx = grid.nx;
    let zero_c = vec![0.0; grid.nodes()];

    let mut interior = (f64::INFINITY, 0, 0);
    let mut boundary = (f64::INFINITY, 0, End::Left);
    for k in 1..grid.levels() {
        let t = grid.t(k);
        let sys = assemble_step(
            grid,
            &spec.coeffs,
            &zero_c,
            t,
            EndCondition::Pinned(0.0),
            EndCondition::Pinned(0.0),
            grid.full_window(),
        )?;
        let row = candidate.row(k);
        let prev = candidate.row(k - 1);
        let applied = sys.apply(row);
        for i in 1..nx {
            let r = applied[i]
                - prev[i] / grid.dt
                - (spec.reaction.f)(t, grid.x(i), row[i])
                - eval_g(&spec.kernel, candidate, k, i, grid);
            let r = sign * r;
            if r < interior.0 {
                interior = (r, k, i);
            }
        }
        for (end, bc, outer, inner) in [
            (End::Left, &spec.bc_left, 0, 1),
            (End::Right, &spec.bc_right, nx, nx - 1),
        ] {
            let alpha = (bc.alpha0)(t);
            let beta = (bc.beta0)(t);
            let r = alpha * (row[outer] - row[inner]) / grid.dx + beta * row[outer] - (bc.h)(t);
            let r = sign * r;
            if r < boundary.0 {
                boundary = (r, k, end);
            }
        }
    }

    let mut initial = (f64::INFINITY, 0);
    for i in 0..grid.nodes() {
        let r = sign * (candidate.get(0, i) - (spec.u0)(grid.x(i)));
        if r < initial.0 {
            initial = (r, i);
        }
    }

    let passed = interior.0 >= -slack && boundary.0 >= -slack && initial.0 >= -slack;
    Ok(ResidualReport {
        worst_interior: interior,
        worst_boundary: boundary,
        worst_initial: initial,
        slack,
        passed,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainViolation {
    pub link: &'static str,
    pub step: usize,
    pub node: usize,
    /// `right - left`; negative beyond the slack.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainSummary {
    pub min_margin: f64,
    pub violations: Vec<ChainViolation>,
}

impl ChainSummary {
    pub fn worst_violation(&self) -> Option<&ChainViolation> {
        self.violations
            .iter()
            .min_by(|a, b| a.margin.total_cmp(&b.margin))
    }
}

pub const CHAIN_LINKS: [&str; 7] = [
    "u_hat <= u11(n)",
    "u11(n) <= u21(n)",
    "u21(n) <= u11(n+1)",
    "u11(n+1) <= u12(n+1)",
    "u12(n+1) <= u22(n)",
    "u22(n) <= u12(n)",
    "u12(n) <= u_tilde",
];

/// Evaluates every link of
/// `û ≤ u11(n) ≤ u21(n) ≤ u11(n+1) ≤ u12(n+1) ≤ u22(n) ≤ u12(n) ≤ ũ`.
pub fn chain_summary(
    prev: &IterationState,
    next: &IterationState,
    u_hat: &Field,
    u_tilde: &Field,
    slack: f64,
) -> Result<ChainSummary> {
    let chain: [&Field; 8] = [
        u_hat, &prev.u11, &prev.u21, &next.u11, &next.u12, &prev.u22, &prev.u12, u_tilde,
    ];
    if chain.iter().any(|f| !f.same_shape(u_hat)) {
        return Err(Error::GridMismatch(
            "chain states do not share one grid".into(),
        ));
    }
    let cols = u_hat.cols();
    let mut min_margin = f64::INFINITY;
    let mut violations = Vec::new();
    for (link, pair) in chain.windows(2).enumerate() {
        for (p, (lo, hi)) in pair[0].values().iter().zip(pair[1].values()).enumerate() {
            let margin = hi - lo;
            min_margin = min_margin.min(margin);
            if margin < -slack {
                violations.push(ChainViolation {
                    link: CHAIN_LINKS[link],
                    step: p / cols,
                    node: p % cols,
                    margin,
                });
            }
        }
    }
    Ok(ChainSummary {
        min_margin,
        violations,
    })
}

/// Every chain link that fails by more than `slack`, with its node.
pub fn check_monotone_chain(
    prev: &IterationState,
    next: &IterationState,
    u_hat: &Field,
    u_tilde: &Field,
    slack: f64,
) -> Result<Vec<ChainViolation>> {
    Ok(chain_summary(prev, next, u_hat, u_tilde, slack)?.violations)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridError {
    pub nx: usize,
    pub nt: usize,
    pub max_error: f64,
    pub sweeps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderStudy {
    pub errors: Vec<GridError>,
    /// `log2(e_coarse / e_fine)` for each consecutive pair of grids.
    pub orders: Vec<f64>,
}

/// Solves on each grid and compares against the closed-form solution in the
/// maximum norm over all space-time nodes.
pub fn order_study(
    spec: &ProblemSpec,
    grids: &[(usize, usize)],
    layout_for: &dyn Fn(&Grid1D) -> Result<Layout>,
    opts: &SolveOptions,
) -> Result<OrderStudy> {
    let exact = spec.exact.as_ref().ok_or_else(|| Error::InvalidParameter {
        problem: spec.name.clone(),
        param: "exact".into(),
        reason: "no closed-form solution attached".into(),
    })?;
    let mut errors = Vec::with_capacity(grids.len());
    for &(nx, nt) in grids {
        let grid = crate::discretization::build_grid(spec.domain, nx, nt)?;
        let (solution, _) = run(spec, &grid, layout_for(&grid)?, opts)?;
        if !solution.converged {
            return Err(Error::NotConverged {
                nx,
                nt,
                sweeps: solution.sweeps_used,
            });
        }
        let reference = Field::from_fn(&grid, |t, x| exact(t, x));
        errors.push(GridError {
            nx,
            nt,
            max_error: solution.u.max_abs_diff(&reference),
            sweeps: solution.sweeps_used,
        });
    }
    let orders = errors
        .windows(2)
        .map(|w| (w[0].max_error / w[1].max_error).log2())
        .collect();
    Ok(OrderStudy { errors, orders })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::build_grid;
    use crate::model::{catalog_lookup, Params};

    fn three_rows(sub: f64, diag: f64, sup: f64) -> TridiagonalSystem {
        TridiagonalSystem {
            sub: vec![0.0, sub, 0.0],
            diag: vec![1.0, diag, 1.0],
            sup: vec![0.0, sup, 0.0],
            rhs: vec![0.0; 3],
        }
    }

    #[test]
    fn m_matrix_rows() {
        assert!(m_matrix_check(&three_rows(-4.0, 9.0, -4.0)).is_m_matrix);
        let weak = m_matrix_check(&three_rows(-4.0, 7.0, -4.0));
        assert!(!weak.is_m_matrix);
        assert_eq!(weak.worst_row, 1);
        let sign = m_matrix_check(&three_rows(1.0, 9.0, -4.0));
        assert!(!sign.is_m_matrix);
        assert!(sign.reason.unwrap().contains("off-diagonal"));
    }

    #[test]
    fn weak_rows_need_a_strict_neighbour() {
        // Zero-flux ends coupled to a strictly dominant interior.
        let chained = TridiagonalSystem {
            sub: vec![0.0, -1.0, -4.0],
            diag: vec![4.0, 3.0, 4.0],
            sup: vec![-4.0, -1.0, 0.0],
            rhs: vec![0.0; 3],
        };
        assert!(m_matrix_check(&chained).is_m_matrix);
        // A weakly dominant block with no strict row is singular.
        let singular = TridiagonalSystem {
            sub: vec![0.0, -1.0, 0.0],
            diag: vec![1.0, 1.0, 1.0],
            sup: vec![-1.0, 0.0, 0.0],
            rhs: vec![0.0; 3],
        };
        assert!(!m_matrix_check(&singular).is_m_matrix);
    }

    fn logistic() -> ProblemSpec {
        let params = Params::from([
            ("lambda".to_string(), 1.0),
            ("kappa".to_string(), 0.5),
            ("sigma".to_string(), 0.5),
        ]);
        catalog_lookup("logistic_memory", &params).unwrap()
    }

    #[test]
    fn logistic_bracket_halves() {
        let spec = logistic();
        let g = build_grid(spec.domain, 32, 32).unwrap();
        let lo = Field::from_fn(&g, |t, x| (spec.bracket.u_hat)(t, x));
        let hi = Field::from_fn(&g, |t, x| (spec.bracket.u_tilde)(t, x));
        let sub = check_bracket(&spec, &g, &lo, BracketKind::Sub, 1e-9).unwrap();
        assert!(sub.passed, "{sub:?}");
        let sup = check_bracket(&spec, &g, &hi, BracketKind::Super, 1e-9).unwrap();
        assert!(sup.passed, "{sup:?}");

        let low = Field::from_fn(&g, |_, _| 0.1);
        let report = check_bracket(&spec, &g, &low, BracketKind::Super, 1e-9).unwrap();
        assert!(!report.passed);
        assert_eq!(report.worst_initial.1, 16);
        assert!((report.worst_initial.0 + 0.4).abs() < 1e-12);
    }

    #[test]
    fn chain_on_hand_built_states() {
        let spec = logistic();
        let g = build_grid(spec.domain, 8, 4).unwrap();
        let zero = Field::on_grid(&g);
        let state = IterationState {
            u11: zero.clone(),
            u12: zero.clone(),
            u21: zero.clone(),
            u22: zero.clone(),
            sweep_index: 0,
        };
        assert!(check_monotone_chain(&state, &state, &zero, &zero, 0.0)
            .unwrap()
            .is_empty());

        let ones = Field::from_fn(&g, |_, _| 1.0);
        let mut next = IterationState {
            u11: zero.clone(),
            u12: ones.clone(),
            u21: zero.clone(),
            u22: ones.clone(),
            sweep_index: 1,
        };
        let prev = next.clone();
        next.u11.set(2, 3, 1.5);
        let found = check_monotone_chain(&prev, &next, &zero, &ones, 1e-10).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].link, "u11(n+1) <= u12(n+1)");
        assert_eq!((found[0].step, found[0].node), (2, 3));
    }

    #[test]
    fn single_grid_has_no_orders() {
        let spec = catalog_lookup("linear_heat", &Params::new()).unwrap();
        let study = order_study(
            &spec,
            &[(8, 8)],
            &|_| Ok(Layout::Single),
            &SolveOptions::default(),
        )
        .unwrap();
        assert_eq!(study.errors.len(), 1);
        assert!(study.orders.is_empty());

        let logistic = logistic();
        assert!(order_study(&logistic, &[(8, 8)], &|_| Ok(Layout::Single), &SolveOptions::default()).is_err());
    }
}

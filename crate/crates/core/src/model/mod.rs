//! The continuous problem: coefficients, nonlinearities, boundary data,
//! initial data and the sub/supersolution bracket.
//!
//! All functions enter as shared, thread-safe callables so a [`ProblemSpec`]
//! can be evaluated from several branches at once.

use std::fmt;
use std::sync::Arc;

mod catalog;

pub use catalog::{catalog_lookup, catalog_names, Params};

/// `t -> value` or `x -> value`.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
/// `(t, x) -> value`.
pub type FieldFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
/// `(t, x, u) -> value`.
pub type ReactionFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
/// `(t, x, s, η1, η2) -> value`.
pub type KernelFn = Arc<dyn Fn(f64, f64, f64, f64, f64) -> f64 + Send + Sync>;

pub fn constant_fn(value: f64) -> ScalarFn {
    Arc::new(move |_| value)
}

pub fn constant_field(value: f64) -> FieldFn {
    Arc::new(move |_, _| value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceTimeDomain {
    pub x_left: f64,
    pub x_right: f64,
    pub t_final: f64,
}

impl SpaceTimeDomain {
    pub fn new(x_left: f64, x_right: f64, t_final: f64) -> Self {
        Self {
            x_left,
            x_right,
            t_final,
        }
    }

    pub fn unit() -> Self {
        Self::new(0.0, 1.0, 1.0)
    }

    pub fn is_valid(&self) -> bool {
        self.x_left < self.x_right && self.t_final > 0.0
    }
}

/// `L u = a(t, x) u_xx + b(t, x) u_x`.
#[derive(Clone)]
pub struct EllipticCoefficients {
    pub diffusion: FieldFn,
    pub advection: FieldFn,
}

impl EllipticCoefficients {
    pub fn constant(a: f64, b: f64) -> Self {
        Self {
            diffusion: constant_field(a),
            advection: constant_field(b),
        }
    }
}

/// Local nonlinearity `f(t, x, u)`.
#[derive(Clone)]
pub struct Reaction {
    pub f: ReactionFn,
    /// Analytic `∂f/∂u`; centered differences are used when absent.
    pub f_u: Option<ReactionFn>,
    /// Upper bound for `sup(-∂f/∂u)` over the bracket. Overrides sampling.
    pub c_bar_bound: Option<f64>,
}

impl Reaction {
    pub fn zero() -> Self {
        Self {
            f: Arc::new(|_, _, _| 0.0),
            f_u: Some(Arc::new(|_, _, _| 0.0)),
            c_bar_bound: None,
        }
    }
}

/// Memory integrand `g₀(t, x, s, η1, η2)` with `η1 = u(t, x)`, `η2 = u(s, x)`.
#[derive(Clone)]
pub struct VolterraKernel {
    pub g0: KernelFn,
    /// Analytic `∂g₀/∂η1`; centered differences are used when absent.
    pub dg0_deta1: Option<KernelFn>,
    /// Lipschitz constant in both η arguments. Only checked, never used.
    pub lipschitz_k0: Option<f64>,
    /// Set for `g₀ ≡ 0`; quadrature and stabilizer sampling are skipped.
    pub vanishes: bool,
}

impl VolterraKernel {
    pub fn zero() -> Self {
        Self {
            g0: Arc::new(|_, _, _, _, _| 0.0),
            dg0_deta1: Some(Arc::new(|_, _, _, _, _| 0.0)),
            lipschitz_k0: Some(0.0),
            vanishes: true,
        }
    }
}

/// `α₀(t) ∂u/∂ν + β₀(t) u = h(t)` at one physical endpoint, `ν` the outward normal.
#[derive(Clone)]
pub struct BoundaryCondition {
    pub alpha0: ScalarFn,
    pub beta0: ScalarFn,
    pub h: ScalarFn,
}

impl BoundaryCondition {
    pub fn dirichlet(h: ScalarFn) -> Self {
        Self {
            alpha0: constant_fn(0.0),
            beta0: constant_fn(1.0),
            h,
        }
    }

    pub fn homogeneous_dirichlet() -> Self {
        Self::dirichlet(constant_fn(0.0))
    }

    pub fn robin(alpha0: f64, beta0: f64, h: ScalarFn) -> Self {
        Self {
            alpha0: constant_fn(alpha0),
            beta0: constant_fn(beta0),
            h,
        }
    }
}

#[derive(Clone)]
pub struct Bracket {
    /// Subsolution candidate.
    pub u_hat: FieldFn,
    /// Supersolution candidate.
    pub u_tilde: FieldFn,
}

impl Bracket {
    pub fn constant(lower: f64, upper: f64) -> Self {
        Self {
            u_hat: constant_field(lower),
            u_tilde: constant_field(upper),
        }
    }
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub domain: SpaceTimeDomain,
    pub coeffs: EllipticCoefficients,
    pub reaction: Reaction,
    pub kernel: VolterraKernel,
    pub bc_left: BoundaryCondition,
    pub bc_right: BoundaryCondition,
    pub u0: ScalarFn,
    pub bracket: Bracket,
    /// Closed-form solution, when one is known.
    pub exact: Option<FieldFn>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("has_exact", &self.exact.is_some())
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub name: &'static str,
    pub detail: String,
}

pub const DIFFUSION_NOT_POSITIVE: &str = "diffusion not positive";
pub const BOUNDARY_BOTH_ZERO: &str = "boundary coefficients both zero";
pub const BOUNDARY_NEGATIVE: &str = "boundary coefficient negative";
pub const BRACKET_NOT_ORDERED: &str = "bracket not ordered";
pub const DOMAIN_INVALID: &str = "domain invalid";
pub const REACTION_DERIVATIVE_MISMATCH: &str = "reaction derivative mismatch";
pub const KERNEL_NOT_MONOTONE: &str = "kernel not nondecreasing in eta2";
pub const KERNEL_LIPSCHITZ: &str = "kernel lipschitz bound exceeded";
pub const DIRICHLET_INCOMPATIBLE: &str = "dirichlet data incompatible with u0";

fn lattice(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let n = n.max(2);
    (0..n).map(move |j| lo + (hi - lo) * j as f64 / (n - 1) as f64)
}

/// Samples every hypothesis of the problem class and reports the ones that fail.
///
/// `(t, x)` runs over a `sampling × sampling` lattice of the closed domain, η
/// values over `sampling` points of the bracket at the relevant point. An empty
/// report means no violation was found.
pub fn validate_problem(spec: &ProblemSpec, sampling: usize) -> Vec<Violation> {
    let mut report = Vec::new();
    let dom = spec.domain;
    if !dom.is_valid() {
        report.push(Violation {
            name: DOMAIN_INVALID,
            detail: format!(
                "x_left = {}, x_right = {}, T = {}",
                dom.x_left, dom.x_right, dom.t_final
            ),
        });
        return report;
    }
    let n = sampling.max(2);
    let ts: Vec<f64> = lattice(0.0, dom.t_final, n).collect();
    let xs: Vec<f64> = lattice(dom.x_left, dom.x_right, n).collect();

    'diffusion: for &t in &ts {
        for &x in &xs {
            let a = (spec.coeffs.diffusion)(t, x);
            if !(a > 0.0) {
                report.push(Violation {
                    name: DIFFUSION_NOT_POSITIVE,
                    detail: format!("a({t}, {x}) = {a}"),
                });
                break 'diffusion;
            }
        }
    }

    for (side, bc, x_end) in [
        ("left", &spec.bc_left, dom.x_left),
        ("right", &spec.bc_right, dom.x_right),
    ] {
        for &t in &ts {
            let alpha = (bc.alpha0)(t);
            let beta = (bc.beta0)(t);
            if alpha < 0.0 || beta < 0.0 {
                report.push(Violation {
                    name: BOUNDARY_NEGATIVE,
                    detail: format!("{side} end at t = {t}: alpha0 = {alpha}, beta0 = {beta}"),
                });
                break;
            }
            if !(alpha + beta > 0.0) {
                report.push(Violation {
                    name: BOUNDARY_BOTH_ZERO,
                    detail: format!("{side} end at t = {t}"),
                });
                break;
            }
        }
        if (bc.alpha0)(0.0) == 0.0 {
            let mismatch = (bc.beta0)(0.0) * (spec.u0)(x_end) - (bc.h)(0.0);
            if mismatch.abs() > 1e-10 {
                report.push(Violation {
                    name: DIRICHLET_INCOMPATIBLE,
                    detail: format!("{side} end: beta0(0) u0 - h(0) = {mismatch:e}"),
                });
            }
        }
    }

    'order: for &t in &ts {
        for &x in &xs {
            let lo = (spec.bracket.u_hat)(t, x);
            let hi = (spec.bracket.u_tilde)(t, x);
            if !(lo <= hi) {
                report.push(Violation {
                    name: BRACKET_NOT_ORDERED,
                    detail: format!("u_hat({t}, {x}) = {lo} > u_tilde = {hi}"),
                });
                break 'order;
            }
        }
    }

    if let Some(f_u) = &spec.reaction.f_u {
        'deriv: for &t in &ts {
            for &x in &xs {
                let lo = (spec.bracket.u_hat)(t, x);
                let hi = (spec.bracket.u_tilde)(t, x);
                let width = hi - lo;
                if !(width > 0.0) {
                    continue;
                }
                let eps = 1e-6 * width;
                for u in lattice(lo, hi, n) {
                    let fd = ((spec.reaction.f)(t, x, u + eps) - (spec.reaction.f)(t, x, u - eps))
                        / (2.0 * eps);
                    let exact = f_u(t, x, u);
                    if (fd - exact).abs() > 10.0 * eps {
                        report.push(Violation {
                            name: REACTION_DERIVATIVE_MISMATCH,
                            detail: format!(
                                "at (t, x, u) = ({t}, {x}, {u}): f_u = {exact}, difference quotient = {fd}"
                            ),
                        });
                        break 'deriv;
                    }
                }
            }
        }
    }

    if !spec.kernel.vanishes {
        check_kernel(spec, &ts, &xs, n, &mut report);
    }
    report
}

fn check_kernel(spec: &ProblemSpec, ts: &[f64], xs: &[f64], n: usize, report: &mut Vec<Violation>) {
    let g0 = &spec.kernel.g0;
    let bracket = &spec.bracket;
    let mut monotone_ok = true;
    let mut lipschitz_ok = true;
    for &t in ts {
        for &x in xs {
            let eta1s: Vec<f64> =
                lattice((bracket.u_hat)(t, x), (bracket.u_tilde)(t, x), n).collect();
            for s in lattice(0.0, t, n) {
                let eta2s: Vec<f64> =
                    lattice((bracket.u_hat)(s, x), (bracket.u_tilde)(s, x), n).collect();
                for &e1 in &eta1s {
                    let values: Vec<f64> = eta2s.iter().map(|&e2| g0(t, x, s, e1, e2)).collect();
                    if monotone_ok {
                        if let Some(j) = (1..values.len()).find(|&j| values[j] < values[j - 1]) {
                            monotone_ok = false;
                            report.push(Violation {
                                name: KERNEL_NOT_MONOTONE,
                                detail: format!(
                                    "at (t, x, s, eta1) = ({t}, {x}, {s}, {e1}): g0({}) = {} < g0({}) = {}",
                                    eta2s[j], values[j], eta2s[j - 1], values[j - 1]
                                ),
                            });
                        }
                    }
                    if lipschitz_ok {
                        if let Some(k0) = spec.kernel.lipschitz_k0 {
                            let e1b = eta1s[eta1s.len() - 1];
                            for (&e2, &v) in eta2s.iter().zip(&values) {
                                let e2b = eta2s[0];
                                let lhs = (v - g0(t, x, s, e1b, e2b)).abs();
                                let rhs = k0 * ((e1 - e1b).abs() + (e2 - e2b).abs());
                                if lhs > rhs * (1.0 + 1e-9) + 1e-12 {
                                    lipschitz_ok = false;
                                    report.push(Violation {
                                        name: KERNEL_LIPSCHITZ,
                                        detail: format!(
                                            "at (t, x, s) = ({t}, {x}, {s}): |dg0| = {lhs} > K0 |d eta| = {rhs}"
                                        ),
                                    });
                                    break;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(report: &[Violation]) -> Vec<&'static str> {
        report.iter().map(|v| v.name).collect()
    }

    #[test]
    fn dirichlet_zero_problem_is_valid() {
        let spec = catalog_lookup("linear_heat", &Params::new()).unwrap();
        assert!(validate_problem(&spec, 16).is_empty());
    }

    #[test]
    fn both_boundary_coefficients_zero() {
        let mut spec = catalog_lookup("linear_heat", &Params::new()).unwrap();
        spec.bc_left = BoundaryCondition::robin(0.0, 0.0, constant_fn(0.0));
        assert!(names(&validate_problem(&spec, 16)).contains(&BOUNDARY_BOTH_ZERO));
    }

    #[test]
    fn negative_diffusion() {
        let mut spec = catalog_lookup("linear_heat", &Params::new()).unwrap();
        spec.coeffs = EllipticCoefficients::constant(-1.0, 0.0);
        assert!(names(&validate_problem(&spec, 16)).contains(&DIFFUSION_NOT_POSITIVE));
    }

    #[test]
    fn decreasing_kernel_is_rejected() {
        let mut spec = catalog_lookup("manufactured_1", &Params::new()).unwrap();
        spec.kernel.g0 = Arc::new(|_, _, _, _, e2| -e2);
        spec.kernel.lipschitz_k0 = None;
        assert_eq!(names(&validate_problem(&spec, 8)), vec![KERNEL_NOT_MONOTONE]);
    }

    #[test]
    fn lipschitz_constant_too_small() {
        let mut spec = catalog_lookup("manufactured_1", &Params::new()).unwrap();
        spec.kernel.lipschitz_k0 = Some(0.5);
        assert_eq!(names(&validate_problem(&spec, 8)), vec![KERNEL_LIPSCHITZ]);
    }

    #[test]
    fn wrong_reaction_derivative() {
        let mut spec = catalog_lookup("manufactured_1", &Params::new()).unwrap();
        spec.reaction.f_u = Some(Arc::new(|_, _, u| 2.0 * u));
        assert_eq!(
            names(&validate_problem(&spec, 8)),
            vec![REACTION_DERIVATIVE_MISMATCH]
        );
    }

    #[test]
    fn incompatible_dirichlet_and_crossed_bracket() {
        let mut spec = catalog_lookup("linear_heat", &Params::new()).unwrap();
        spec.u0 = Arc::new(|x| (std::f64::consts::PI * x).sin() + 0.5);
        spec.bracket = Bracket::constant(1.0, 0.0);
        let found = names(&validate_problem(&spec, 8));
        assert!(found.contains(&DIRICHLET_INCOMPATIBLE));
        assert!(found.contains(&BRACKET_NOT_ORDERED));
    }

    #[test]
    fn catalog_entries_validate() {
        let mut logistic = Params::new();
        logistic.insert("lambda".into(), 1.0);
        logistic.insert("kappa".into(), 0.5);
        logistic.insert("sigma".into(), 0.5);
        for (name, params) in [
            ("linear_heat", Params::new()),
            ("logistic_memory", logistic),
            ("manufactured_1", Params::new()),
        ] {
            let spec = catalog_lookup(name, &params).unwrap();
            let report = validate_problem(&spec, 16);
            assert!(report.is_empty(), "{name}: {report:?}");
        }
    }
}

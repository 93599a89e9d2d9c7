//! Named, parameterized problems reachable from a config file.
//!
//! Every entry accepts the optional overrides `T` (final time), `u_hat` and
//! `u_tilde` (constant bracket halves) in addition to its own parameters.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use super::{
    Bracket, BoundaryCondition, EllipticCoefficients, ProblemSpec, Reaction,
    SpaceTimeDomain, VolterraKernel,
};
use crate::error::{Error, Result};

pub type Params = BTreeMap<String, f64>;

const COMMON: &[&str] = &["T", "u_hat", "u_tilde"];

pub fn catalog_names() -> &'static [&'static str] {
    &["linear_heat", "logistic_memory", "manufactured_1"]
}

struct Reader<'a> {
    problem: &'a str,
    params: &'a Params,
}

impl Reader<'_> {
    fn required(&self, key: &str) -> Result<f64> {
        self.params
            .get(key)
            .copied()
            .ok_or_else(|| Error::MissingParameter {
                problem: self.problem.to_string(),
                param: key.to_string(),
            })
    }

    fn optional(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }

    fn invalid(&self, key: &str, reason: &str) -> Error {
        Error::InvalidParameter {
            problem: self.problem.to_string(),
            param: key.to_string(),
            reason: reason.to_string(),
        }
    }

    fn reject_unknown(&self, own: &[&str]) -> Result<()> {
        for key in self.params.keys() {
            if !own.contains(&key.as_str()) && !COMMON.contains(&key.as_str()) {
                return Err(self.invalid(key, "not a parameter of this problem"));
            }
        }
        for (key, value) in self.params {
            if !value.is_finite() {
                return Err(self.invalid(key, "must be finite"));
            }
        }
        Ok(())
    }

    fn domain(&self) -> Result<SpaceTimeDomain> {
        let t_final = self.optional("T", 1.0);
        if !(t_final > 0.0) {
            return Err(self.invalid("T", "must be positive"));
        }
        Ok(SpaceTimeDomain::new(0.0, 1.0, t_final))
    }

    fn bracket(&self, lower: f64, upper: f64) -> Bracket {
        Bracket::constant(
            self.optional("u_hat", lower),
            self.optional("u_tilde", upper),
        )
    }
}

/// Builds a named problem from its parameters.
///
/// * `linear_heat`: `u_t = u_xx`, `u₀ = sin(πx)`, exact `e^{-π²t} sin(πx)`.
/// * `logistic_memory` (`lambda`, `kappa`, `sigma`): `f = λu(1-u)`,
///   `g₀ = κ e^{-(t-s)} η2`, `u₀ = σ sin(πx)`, bracket `[0, max(1 + κ/λ, σ)]`.
/// * `manufactured_1`: `f = -u² + q`, `g₀ = e^{-(t-s)} η2`, with `q` chosen so
///   that `e^{-t} sin(πx)` is the exact solution; bracket `[0, 4]`.
///
/// All three use homogeneous Dirichlet data on `[0, 1]`.
pub fn catalog_lookup(name: &str, params: &Params) -> Result<ProblemSpec> {
    let reader = Reader {
        problem: name,
        params,
    };
    match name {
        "linear_heat" => linear_heat(&reader),
        "logistic_memory" => logistic_memory(&reader),
        "manufactured_1" => manufactured(&reader),
        other => Err(Error::UnknownProblem(other.to_string())),
    }
}

fn linear_heat(reader: &Reader) -> Result<ProblemSpec> {
    reader.reject_unknown(&[])?;
    Ok(ProblemSpec {
        name: "linear_heat".into(),
        domain: reader.domain()?,
        coeffs: EllipticCoefficients::constant(1.0, 0.0),
        reaction: Reaction::zero(),
        kernel: VolterraKernel::zero(),
        bc_left: BoundaryCondition::homogeneous_dirichlet(),
        bc_right: BoundaryCondition::homogeneous_dirichlet(),
        u0: Arc::new(|x| (PI * x).sin()),
        bracket: reader.bracket(0.0, 1.0),
        exact: Some(Arc::new(|t, x| (-PI * PI * t).exp() * (PI * x).sin())),
    })
}

fn logistic_memory(reader: &Reader) -> Result<ProblemSpec> {
    reader.reject_unknown(&["lambda", "kappa", "sigma"])?;
    let lambda = reader.required("lambda")?;
    let kappa = reader.required("kappa")?;
    let sigma = reader.required("sigma")?;
    if !(lambda > 0.0) {
        return Err(reader.invalid("lambda", "must be positive"));
    }
    if kappa < 0.0 {
        return Err(reader.invalid("kappa", "must be nonnegative"));
    }
    if sigma < 0.0 {
        return Err(reader.invalid("sigma", "must be nonnegative"));
    }
    Ok(ProblemSpec {
        name: "logistic_memory".into(),
        domain: reader.domain()?,
        coeffs: EllipticCoefficients::constant(1.0, 0.0),
        reaction: Reaction {
            f: Arc::new(move |_, _, u| lambda * u * (1.0 - u)),
            f_u: Some(Arc::new(move |_, _, u| lambda * (1.0 - 2.0 * u))),
            c_bar_bound: None,
        },
        kernel: VolterraKernel {
            g0: Arc::new(move |t, _, s, _, eta2| kappa * (-(t - s)).exp() * eta2),
            dg0_deta1: Some(Arc::new(|_, _, _, _, _| 0.0)),
            lipschitz_k0: Some(kappa),
            vanishes: kappa == 0.0,
        },
        bc_left: BoundaryCondition::homogeneous_dirichlet(),
        bc_right: BoundaryCondition::homogeneous_dirichlet(),
        u0: Arc::new(move |x| sigma * (PI * x).sin()),
        bracket: reader.bracket(0.0, (1.0 + kappa / lambda).max(sigma)),
        exact: None,
    })
}

/// `u*(t, x) = e^{-t} sin(πx)`.
fn manufactured_exact(t: f64, x: f64) -> f64 {
    (-t).exp() * (PI * x).sin()
}

/// Forcing for `u*`: `u*_t - u*_xx = -u*² + q + t u*`, since the memory term
/// `∫₀ᵗ e^{-(t-s)} u*(s, x) ds` equals `t u*(t, x)`.
fn manufactured_forcing(t: f64, x: f64) -> f64 {
    let u = manufactured_exact(t, x);
    (PI * PI - 1.0 - t) * u + u * u
}

fn manufactured(reader: &Reader) -> Result<ProblemSpec> {
    reader.reject_unknown(&[])?;
    Ok(ProblemSpec {
        name: "manufactured_1".into(),
        domain: reader.domain()?,
        coeffs: EllipticCoefficients::constant(1.0, 0.0),
        reaction: Reaction {
            f: Arc::new(|t, x, u| -u * u + manufactured_forcing(t, x)),
            f_u: Some(Arc::new(|_, _, u| -2.0 * u)),
            c_bar_bound: None,
        },
        kernel: VolterraKernel {
            g0: Arc::new(|t, _, s, _, eta2| (-(t - s)).exp() * eta2),
            dg0_deta1: Some(Arc::new(|_, _, _, _, _| 0.0)),
            lipschitz_k0: Some(1.0),
            vanishes: false,
        },
        bc_left: BoundaryCondition::homogeneous_dirichlet(),
        bc_right: BoundaryCondition::homogeneous_dirichlet(),
        u0: Arc::new(|x| (PI * x).sin()),
        bracket: reader.bracket(0.0, 4.0),
        exact: Some(Arc::new(manufactured_exact)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn logistic_params(lambda: f64, kappa: f64, sigma: f64) -> Params {
        Params::from([
            ("lambda".to_string(), lambda),
            ("kappa".to_string(), kappa),
            ("sigma".to_string(), sigma),
        ])
    }

    #[test]
    fn logistic_upper_bracket() {
        let spec = catalog_lookup("logistic_memory", &logistic_params(1.0, 0.5, 0.5)).unwrap();
        assert_eq!((spec.bracket.u_tilde)(0.3, 0.7), 1.5);
        assert_eq!((spec.bracket.u_hat)(0.3, 0.7), 0.0);
        let tall = catalog_lookup("logistic_memory", &logistic_params(1.0, 0.5, 3.0)).unwrap();
        assert_eq!((tall.bracket.u_tilde)(0.0, 0.5), 3.0);
    }

    #[test]
    fn linear_heat_has_no_nonlinearity() {
        let spec = catalog_lookup("linear_heat", &Params::new()).unwrap();
        assert_eq!((spec.reaction.f)(0.2, 0.4, 3.0), 0.0);
        assert!(spec.kernel.vanishes);
        assert_eq!((spec.kernel.g0)(0.5, 0.5, 0.1, 1.0, 1.0), 0.0);
        let lower = catalog_lookup("linear_heat", &Params::from([("u_hat".into(), -1.0)])).unwrap();
        assert_eq!((lower.bracket.u_hat)(0.0, 0.0), -1.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            catalog_lookup("nope", &Params::new()),
            Err(Error::UnknownProblem(_))
        ));
        let mut params = logistic_params(1.0, 0.5, 0.5);
        params.remove("kappa");
        assert!(matches!(
            catalog_lookup("logistic_memory", &params),
            Err(Error::MissingParameter { ref param, .. }) if param == "kappa"
        ));
        assert!(matches!(
            catalog_lookup("linear_heat", &Params::from([("lambda".into(), 1.0)])),
            Err(Error::InvalidParameter { .. })
        ));
        assert!(matches!(
            catalog_lookup("logistic_memory", &logistic_params(0.0, 0.5, 0.5)),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn manufactured_forcing_satisfies_equation() {
        // Residual of u* with exact calculus and a closed-form memory integral.
        for &t in &[0.0, 0.25, 0.6, 1.0] {
            for &x in &[0.1, 0.5, 0.8] {
                let u = manufactured_exact(t, x);
                let u_t = -u;
                let u_xx = -PI * PI * u;
                let memory = t * u;
                let f = -u * u + manufactured_forcing(t, x);
                let residual = u_t - u_xx - f - memory;
                assert!(residual.abs() < 1e-13, "{residual}");
                assert!(manufactured_forcing(t, x) >= 0.0);
            }
        }
    }
}

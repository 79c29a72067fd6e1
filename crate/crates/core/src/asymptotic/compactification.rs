use std::fmt;
use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::linalg::Matrix;
use crate::regularity::linear_surjection_rate;
use crate::semialg::{norm, MapSpec, Polynomial};

type Scalar = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A radial change of variables `x = ψ(|u|) u / |u|` with inverse
/// `u = φ(|x|) x / |x|`, and the weight `η = 1 / φ'`.
#[derive(Clone)]
pub struct CompactificationSpec {
    pub name: String,
    pub phi: Scalar,
    pub psi: Scalar,
    pub dphi: Scalar,
    pub dpsi: Scalar,
}

impl fmt::Debug for CompactificationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CompactificationSpec").field("name", &self.name).finish()
    }
}

impl CompactificationSpec {
    pub fn phi(&self, t: f64) -> f64 {
        (self.phi)(t)
    }

    pub fn psi(&self, s: f64) -> f64 {
        (self.psi)(s)
    }

    pub fn eta(&self, t: f64) -> f64 {
        1.0 / (self.dphi)(t)
    }

    /// `∫_0^T 1/η` by the trapezoid rule on `steps` uniform steps.
    pub fn inverse_eta_integral(&self, upper: f64, steps: usize) -> f64 {
        let h = upper / steps as f64;
        let f = |t: f64| 1.0 / self.eta(t);
        let inner: f64 = (1..steps).map(|i| f(i as f64 * h)).sum();
        h * (0.5 * (f(0.0) + f(upper)) + inner)
    }
}

/// `φ(t) = t / (1 + t)`, `ψ(s) = s / (1 - s)`, `η(t) = (1 + t)^2`.
pub fn default_compactification() -> CompactificationSpec {
    CompactificationSpec {
        name: "phi-default".into(),
        phi: Arc::new(|t| t / (1.0 + t)),
        psi: Arc::new(|s| s / (1.0 - s)),
        dphi: Arc::new(|t| 1.0 / ((1.0 + t) * (1.0 + t))),
        dpsi: Arc::new(|s| 1.0 / ((1.0 - s) * (1.0 - s))),
    }
}

/// Weight functions for asymptotic scans.
#[derive(Clone, Debug, PartialEq)]
pub enum Eta {
    /// `η(t) = t`.
    Linear,
    /// `η(t) = (1 + t)^2`, from the default compactification.
    PhiDefault,
    /// A univariate polynomial.
    Custom(Polynomial),
}

impl Eta {
    pub fn custom(p: Polynomial) -> Result<Self> {
        check_dim(1, p.num_vars())?;
        Ok(Eta::Custom(p))
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Eta::Linear => t,
            Eta::PhiDefault => (1.0 + t) * (1.0 + t),
            Eta::Custom(p) => p.value(&[t]),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Eta::Linear => "linear".into(),
            Eta::PhiDefault => "phi-default".into(),
            Eta::Custom(p) => format!("custom:{p}"),
        }
    }
}

/// `F` seen through the compactification: `G(u) = F(ψ(|u|) u / |u|)` on the
/// punctured open unit ball.
#[derive(Clone, Debug)]
pub struct CompactifiedMap {
    spec: MapSpec,
    c: CompactificationSpec,
}

pub fn compactify_map(spec: &MapSpec, c: &CompactificationSpec) -> CompactifiedMap {
    CompactifiedMap {
        spec: spec.clone(),
        c: c.clone(),
    }
}

impl CompactifiedMap {
    pub fn spec(&self) -> &MapSpec {
        &self.spec
    }

    /// `x = ψ(|u|) u / |u|`; requires `0 < |u| < 1`.
    pub fn to_x(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.spec.n(), u.len())?;
        let s = norm(u);
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::Domain(format!("|u| = {s} is outside (0, 1)")));
        }
        let k = self.c.psi(s) / s;
        Ok(u.iter().map(|v| k * v).collect())
    }

    /// `u = φ(|x|) x / |x|`; requires `x ≠ 0`.
    pub fn to_u(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.spec.n(), x.len())?;
        let t = norm(x);
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("|x| = {t} cannot be compactified")));
        }
        let k = self.c.phi(t) / t;
        Ok(x.iter().map(|v| k * v).collect())
    }

    /// `(u, y)` is in the graph of `G` iff `(x(u), y)` is in that of `F`.
    pub fn contains(&self, u: &[f64], y: &[f64], tol_eq: f64) -> Result<bool> {
        let x = self.to_x(u)?;
        self.spec.contains(&x, y, tol_eq)
    }

    /// Derivative of `u -> x(u)`:
    /// `(ψ(s)/s) I + (ψ'(s) - ψ(s)/s) û ûᵀ` with `s = |u|`, `û = u / s`.
    pub fn chart_jacobian(&self, u: &[f64]) -> Result<Matrix> {
        let s = norm(u);
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::Domain(format!("|u| = {s} is outside (0, 1)")));
        }
        let n = u.len();
        let a = self.c.psi(s) / s;
        let b = (self.c.dpsi)(s) - a;
        let mut d = Matrix::identity(n).scale(a);
        for i in 0..n {
            for j in 0..n {
                d[(i, j)] += b * u[i] * u[j] / (s * s);
            }
        }
        Ok(d)
    }

    /// `sur G(u) = σ_min(∇F(x(u)) Dx(u))` for polynomial maps.
    pub fn rate(&self, u: &[f64]) -> Result<f64> {
        let f = self
            .spec
            .functional()
            .ok_or_else(|| Error::InvalidInput("exact compactified rates need a polynomial map".into()))?;
        let x = self.to_x(u)?;
        let jac = f.jacobian(&x)?.matmul(&self.chart_jacobian(u)?);
        Ok(linear_surjection_rate(&jac))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn default_values() {
        let c = default_compactification();
        assert_eq!(c.phi(1.0), 0.5);
        assert_eq!(c.psi(0.5), 1.0);
        assert_eq!(c.eta(1.0), 4.0);
        assert!(c.eta(1e3) / 1e3 > 1e2);
        assert!(c.inverse_eta_integral(1e4, 200_000) < 1.0 + 1e-3);
    }

    #[test]
    fn chart_round_trips() {
        let g = compactify_map(&catalog::identity(2), &default_compactification());
        assert_eq!(g.to_x(&[0.5, 0.0]).unwrap(), vec![1.0, 0.0]);
        let u = g.to_u(&[0.0, 3.0]).unwrap();
        assert!((u[1] - 0.75).abs() < 1e-15);
        let x = g.to_x(&u).unwrap();
        assert!((x[1] - 3.0).abs() < 1e-9);
        assert!(matches!(g.to_x(&[1.0, 0.0]), Err(Error::Domain(_))));
        assert!(matches!(g.to_x(&[0.0, 0.0]), Err(Error::Domain(_))));
        assert!(g.contains(&[0.5, 0.0], &[1.0, 0.0], 1e-9).unwrap());
    }

    #[test]
    fn chart_jacobian_matches_differences() {
        let g = compactify_map(&catalog::identity(2), &default_compactification());
        let u = [0.3, -0.4];
        let d = g.chart_jacobian(&u).unwrap();
        let h = 1e-6;
        for j in 0..2 {
            let mut up = u;
            let mut dn = u;
            up[j] += h;
            dn[j] -= h;
            let (a, b) = (g.to_x(&up).unwrap(), g.to_x(&dn).unwrap());
            for i in 0..2 {
                assert!(((a[i] - b[i]) / (2.0 * h) - d[(i, j)]).abs() < 1e-6);
            }
        }
    }
}

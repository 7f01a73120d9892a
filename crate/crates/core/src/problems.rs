//! Manufactured solutions with hand-derived sources.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::mesh::Point;

pub type ScalarField = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
pub type VectorField = Arc<dyn Fn(Point) -> [f64; 2] + Send + Sync>;

#[derive(Clone)]
pub struct ExactSolution {
    pub u: ScalarField,
    pub grad: VectorField,
}

/// Right-hand side data of `-Δu = f` in Ω, `u = g_D` on Γ.
#[derive(Clone)]
pub struct ProblemData {
    pub id: ExampleId,
    pub source: ScalarField,
    pub dirichlet: ScalarField,
    pub exact: Option<ExactSolution>,
}

impl fmt::Debug for ProblemData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemData")
            .field("id", &self.id)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExampleId {
    Example1,
    Example2,
    LinearPatch,
    Custom,
}

impl FromStr for ExampleId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "1" | "example1" => Ok(ExampleId::Example1),
            "2" | "example2" => Ok(ExampleId::Example2),
            "patch" | "linear_patch" => Ok(ExampleId::LinearPatch),
            other => Err(format!("unknown example '{other}' (expected 1, 2 or patch)")),
        }
    }
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExampleId::Example1 => "example1",
            ExampleId::Example2 => "example2",
            ExampleId::LinearPatch => "linear_patch",
            ExampleId::Custom => "custom",
        })
    }
}

impl ProblemData {
    /// Builds a problem from an exact solution, its gradient and `f = -Δu`;
    /// the Dirichlet data is the trace of `u`.
    pub fn manufactured(id: ExampleId, u: ScalarField, grad: VectorField, source: ScalarField) -> Self {
        ProblemData {
            id,
            source,
            dirichlet: u.clone(),
            exact: Some(ExactSolution { u, grad }),
        }
    }

    /// The data for a built-in example. `LinearPatch` uses `1 + 2x + 3y`.
    pub fn builtin(id: ExampleId) -> Option<Self> {
        match id {
            ExampleId::Example1 => Some(example1()),
            ExampleId::Example2 => Some(example2()),
            ExampleId::LinearPatch => Some(linear_patch(1.0, 2.0, 3.0)),
            ExampleId::Custom => None,
        }
    }
}

/// `u = xy(1-x)(1-y)`, vanishing on the boundary.
pub fn example1() -> ProblemData {
    let mut p = ProblemData::manufactured(
        ExampleId::Example1,
        Arc::new(|[x, y]| x * y * (1.0 - x) * (1.0 - y)),
        Arc::new(|[x, y]| [y * (1.0 - y) * (1.0 - 2.0 * x), x * (1.0 - x) * (1.0 - 2.0 * y)]),
        Arc::new(|[x, y]| 2.0 * x * (1.0 - x) + 2.0 * y * (1.0 - y)),
    );
    p.dirichlet = Arc::new(|_| 0.0);
    p
}

/// `u = exp(x² + y²) + y² cos(xy) + x² sin(xy)`.
pub fn example2() -> ProblemData {
    ProblemData::manufactured(
        ExampleId::Example2,
        Arc::new(|[x, y]| (x * x + y * y).exp() + y * y * (x * y).cos() + x * x * (x * y).sin()),
        Arc::new(|[x, y]| {
            let (e, s, c) = ((x * x + y * y).exp(), (x * y).sin(), (x * y).cos());
            [
                2.0 * x * e - y.powi(3) * s + 2.0 * x * s + x * x * y * c,
                2.0 * y * e + 2.0 * y * c - x * y * y * s + x.powi(3) * c,
            ]
        }),
        Arc::new(|[x, y]| {
            let (e, s, c) = ((x * x + y * y).exp(), (x * y).sin(), (x * y).cos());
            let (xy, x2y2) = (x * y, x * x * y * y);
            -(4.0 * (1.0 + x * x + y * y) * e
                + c * (2.0 + 4.0 * xy - y.powi(4) - x2y2)
                + s * (2.0 - 4.0 * xy - x2y2 - x.powi(4)))
        }),
    )
}

/// `u = a + bx + cy` with `f = 0`.
pub fn linear_patch(a: f64, b: f64, c: f64) -> ProblemData {
    ProblemData::manufactured(
        ExampleId::LinearPatch,
        Arc::new(move |[x, y]| a + b * x + c * y),
        Arc::new(move |_| [b, c]),
        Arc::new(|_| 0.0),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fd_laplacian(u: &ScalarField, [x, y]: Point) -> f64 {
        let h = 1e-4;
        (u([x + h, y]) + u([x - h, y]) + u([x, y + h]) + u([x, y - h]) - 4.0 * u([x, y])) / (h * h)
    }

    fn fd_gradient(u: &ScalarField, [x, y]: Point) -> [f64; 2] {
        let h = 1e-6;
        [(u([x + h, y]) - u([x - h, y])) / (2.0 * h), (u([x, y + h]) - u([x, y - h])) / (2.0 * h)]
    }

    fn check_consistency(p: &ProblemData) {
        let ex = p.exact.as_ref().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut pts: Vec<Point> = (0..10).map(|_| [rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95)]).collect();
        pts.push([0.3, 0.7]);
        for pt in pts {
            let lap = fd_laplacian(&ex.u, pt);
            let f = (p.source)(pt);
            assert!((lap + f).abs() <= 1e-6 * f.abs().max(1.0), "at {pt:?}: -lap={} f={f}", -lap);
            let g = (ex.grad)(pt);
            let fd = fd_gradient(&ex.u, pt);
            for k in 0..2 {
                assert!((g[k] - fd[k]).abs() <= 1e-6 * g[k].abs().max(1.0));
            }
        }
        for _ in 0..20 {
            let t: f64 = rng.gen();
            for pt in [[t, 0.0], [t, 1.0], [0.0, t], [1.0, t]] {
                assert_eq!((p.dirichlet)(pt), (ex.u)(pt));
            }
        }
    }

    #[test]
    fn example1_values() {
        let p = example1();
        let ex = p.exact.as_ref().unwrap();
        assert_abs_diff_eq!((ex.u)([0.5, 0.5]), 0.0625, epsilon = 1e-16);
        assert_abs_diff_eq!((p.source)([0.5, 0.5]), 1.0, epsilon = 1e-16);
        assert_eq!((p.dirichlet)([0.3, 0.0]), 0.0);
        check_consistency(&p);
    }

    #[test]
    fn example2_values() {
        let p = example2();
        let ex = p.exact.as_ref().unwrap();
        assert_eq!((ex.u)([0.0, 0.0]), 1.0);
        assert_abs_diff_eq!((ex.u)([1.0, 0.0]), std::f64::consts::E, epsilon = 1e-15);
        check_consistency(&p);
    }

    #[test]
    fn linear_patch_values() {
        let zero = linear_patch(0.0, 0.0, 0.0);
        assert_eq!((zero.exact.as_ref().unwrap().u)([0.4, 0.9]), 0.0);
        assert_eq!((zero.source)([0.4, 0.9]), 0.0);
        let p = linear_patch(1.0, 2.0, 3.0);
        assert_eq!((p.exact.as_ref().unwrap().u)([1.0, 1.0]), 6.0);
        check_consistency(&p);
    }

    #[test]
    fn parse_ids() {
        assert_eq!("1".parse::<ExampleId>().unwrap(), ExampleId::Example1);
        assert_eq!("example2".parse::<ExampleId>().unwrap(), ExampleId::Example2);
        assert_eq!("patch".parse::<ExampleId>().unwrap(), ExampleId::LinearPatch);
        assert!("3".parse::<ExampleId>().is_err());
        assert!(ProblemData::builtin(ExampleId::Custom).is_none());
    }
}

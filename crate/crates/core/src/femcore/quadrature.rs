// tabulated rule constants are kept at full printed precision
#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};

/// A quadrature rule on the reference triangle (barycentric points, weights
/// summing to 1/2) or on the reference edge `[0, 1]` (weights summing to 1).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<P> {
    pub points: Vec<P>,
    pub weights: Vec<f64>,
    /// Highest total polynomial degree integrated exactly.
    pub degree: usize,
}

pub type TriangleRule = QuadratureRule<[f64; 3]>;
pub type EdgeRule = QuadratureRule<f64>;

impl<P: Copy> QuadratureRule<P> {
    pub fn iter(&self) -> impl Iterator<Item = (P, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

const TRIANGLE_DEGREES: [usize; 4] = [1, 2, 4, 6];
const EDGE_DEGREES: [usize; 4] = [1, 3, 5, 7];

/// Symmetric triangle rules. Requests are rounded up to the next supported
/// degree (1, 2, 4 or 6).
pub fn triangle_quadrature(degree: usize) -> Result<TriangleRule> {
    let degree = *TRIANGLE_DEGREES
        .iter()
        .find(|&&d| d >= degree)
        .ok_or(Error::UnsupportedDegree {
            domain: "triangle",
            degree,
        })?;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    // weights below are normalised to sum to 1
    let mut orbit3 = |a: f64, w: f64| {
        let b = 1.0 - 2.0 * a;
        for p in [[b, a, a], [a, b, a], [a, a, b]] {
            points.push(p);
            weights.push(w);
        }
    };
    match degree {
        1 => {}
        2 => orbit3(0.5, 1.0 / 3.0),
        4 => {
            orbit3(0.445_948_490_915_964_886_3, 0.223_381_589_678_011_465_7);
            orbit3(0.091_576_213_509_770_743_46, 0.109_951_743_655_321_867_6);
        }
        6 => {
            orbit3(0.249_286_745_170_910_421_3, 0.116_786_275_726_379_366_0);
            orbit3(0.063_089_014_491_502_228_34, 0.050_844_906_370_206_816_92);
        }
        _ => unreachable!(),
    }
    if degree == 1 {
        points.push([1.0 / 3.0; 3]);
        weights.push(1.0);
    }
    if degree == 6 {
        let (a, b) = (0.310_352_451_033_784_405_4, 0.053_145_049_844_816_947_35);
        let c = 1.0 - a - b;
        let w = 0.082_851_075_618_373_575_19;
        for p in [[a, b, c], [b, a, c], [c, a, b], [a, c, b], [b, c, a], [c, b, a]] {
            points.push(p);
            weights.push(w);
        }
    }
    weights.iter_mut().for_each(|w| *w *= 0.5);
    Ok(QuadratureRule {
        points,
        weights,
        degree,
    })
}

/// Gauss-Legendre rules on `[0, 1]`. Requests are rounded up to the next
/// supported odd degree (1, 3, 5 or 7).
pub fn edge_quadrature(degree: usize) -> Result<EdgeRule> {
    let degree = *EDGE_DEGREES
        .iter()
        .find(|&&d| d >= degree)
        .ok_or(Error::UnsupportedDegree {
            domain: "edge",
            degree,
        })?;
    // nodes and weights on [-1, 1]
    let (x, w): (Vec<f64>, Vec<f64>) = match degree {
        1 => (vec![0.0], vec![2.0]),
        3 => {
            let a = 1.0 / 3.0_f64.sqrt();
            (vec![-a, a], vec![1.0, 1.0])
        }
        5 => {
            let a = 0.6_f64.sqrt();
            (vec![-a, 0.0, a], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
        }
        7 => {
            let s = (6.0 / 5.0_f64).sqrt();
            let a = ((3.0 - 2.0 * s) / 7.0).sqrt();
            let b = ((3.0 + 2.0 * s) / 7.0).sqrt();
            let wa = (18.0 + 30.0_f64.sqrt()) / 36.0;
            let wb = (18.0 - 30.0_f64.sqrt()) / 36.0;
            (vec![-b, -a, a, b], vec![wb, wa, wa, wb])
        }
        _ => unreachable!(),
    };
    Ok(QuadratureRule {
        points: x.iter().map(|x| 0.5 * (x + 1.0)).collect(),
        weights: w.iter().map(|w| 0.5 * w).collect(),
        degree,
    })
}

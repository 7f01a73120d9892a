//! Structured triangulations of the unit square.
//!
//! The grid has `n x n` cells, vertices numbered row-major
//! (`index = j * (n + 1) + i` for the vertex at `(i/n, j/n)`), and every
//! cell is split along its lower-left to upper-right diagonal into two
//! counterclockwise triangles.

use std::io::Write;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    /// Index of the triangle the edge belongs to.
    pub triangle: usize,
    /// Outward unit normal of the square on this edge.
    pub normal: [f64; 2],
    pub length: f64,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    level: usize,
}

/// Area and barycentric-coordinate gradients of one triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry {
    pub area: f64,
    pub grad_lambda: [[f64; 2]; 3],
}

impl ElementGeometry {
    /// Geometry of the triangle with the given (counterclockwise) corners.
    pub fn from_corners(p: [Point; 3]) -> Self {
        let [a, b, c] = p;
        let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        // grad lambda_i = rot90(opposite edge) / det
        let grad = |p: Point, q: Point| [(p[1] - q[1]) / det, (q[0] - p[0]) / det];
        ElementGeometry {
            area: 0.5 * det,
            grad_lambda: [grad(b, c), grad(c, a), grad(a, b)],
        }
    }

    /// Physical coordinates of a barycentric point.
    pub fn map(corners: &[Point; 3], bary: [f64; 3]) -> Point {
        let mut x = [0.0; 2];
        for (c, l) in corners.iter().zip(bary) {
            x[0] += l * c[0];
            x[1] += l * c[1];
        }
        x
    }
}

pub fn build_structured_unit_square(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "mesh level must be at least 1".into(),
        ));
    }
    let h = 1.0 / n as f64;
    let row = n + 1;
    let vid = |i: usize, j: usize| j * row + i;

    let mut vertices = Vec::with_capacity(row * row);
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 * h, j as f64 * h]);
        }
    }
    // Snap the last row/column so the boundary lies exactly on x=1 / y=1.
    for v in vertices.iter_mut() {
        for c in v.iter_mut() {
            if (*c - 1.0).abs() < 1e-14 {
                *c = 1.0;
            }
        }
    }

    let mut triangles = Vec::with_capacity(2 * n * n);
    let mut boundary_edges = Vec::with_capacity(4 * n);
    for j in 0..n {
        for i in 0..n {
            let (v00, v10, v01, v11) = (vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1));
            let lower = triangles.len();
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
            let upper = lower + 1;
            if j == 0 {
                boundary_edges.push((vec![v00, v10], lower, [0.0, -1.0]));
            }
            if i + 1 == n {
                boundary_edges.push((vec![v10, v11], lower, [1.0, 0.0]));
            }
            if j + 1 == n {
                boundary_edges.push((vec![v11, v01], upper, [0.0, 1.0]));
            }
            if i == 0 {
                boundary_edges.push((vec![v01, v00], upper, [-1.0, 0.0]));
            }
        }
    }
    let boundary_edges = boundary_edges
        .into_iter()
        .map(|(v, triangle, normal)| {
            let (a, b) = (vertices[v[0]], vertices[v[1]]);
            BoundaryEdge {
                vertices: [v[0], v[1]],
                triangle,
                normal,
                length: (b[0] - a[0]).hypot(b[1] - a[1]),
            }
        })
        .collect();

    Ok(Mesh {
        vertices,
        triangles,
        boundary_edges,
        level: n,
    })
}

impl Mesh {
    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn corners(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn element_geometry(&self, t: usize) -> Result<ElementGeometry> {
        if t >= self.triangles.len() {
            return Err(Error::IndexOutOfRange {
                index: t,
                len: self.triangles.len(),
            });
        }
        Ok(ElementGeometry::from_corners(self.corners(t)))
    }

    /// Marks vertices lying on the boundary.
    pub fn boundary_vertex_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.vertices.len()];
        for e in &self.boundary_edges {
            mask[e.vertices[0]] = true;
            mask[e.vertices[1]] = true;
        }
        mask
    }

    /// Writes one vertex per line as `x y`.
    pub fn write_nodes<W: Write>(&self, mut w: W) -> Result<()> {
        for v in &self.vertices {
            writeln!(w, "{:.17e} {:.17e}", v[0], v[1])?;
        }
        Ok(())
    }

    /// Writes one triangle per line as zero-based `i j k`.
    pub fn write_elements<W: Write>(&self, mut w: W) -> Result<()> {
        for t in &self.triangles {
            writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }
}

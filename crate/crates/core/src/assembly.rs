//! Assembly of the block saddle-point system.
//!
//! With `N` vertices, scalar unknowns have one dof per vertex and vector
//! unknowns are stored as two stacked scalar blocks: dof `c * N + j` is
//! component `c` at vertex `j`.

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::femcore::{edge_quadrature, p1_shape, triangle_quadrature, DualBasis};
use crate::linsolve::CsrMatrix;
use crate::mesh::{ElementGeometry, Mesh, Point};
use crate::problems::ProblemData;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyOptions {
    /// Nitsche penalty weight.
    pub alpha: f64,
    /// Triangle quadrature degree for element integrals, loads included.
    pub element_degree: usize,
    /// Edge quadrature degree for boundary integrals.
    pub edge_degree: usize,
    /// Uniform rescaling of the dual basis.
    pub dual_scale: f64,
    pub execution: Execution,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        AssemblyOptions {
            alpha: 10.0,
            element_degree: 2,
            edge_degree: 3,
            dual_scale: 1.0,
            execution: Execution::default(),
        }
    }
}

impl AssemblyOptions {
    pub fn with_alpha(alpha: f64) -> Self {
        AssemblyOptions {
            alpha,
            ..Default::default()
        }
    }
}

/// The matrices and load vectors of the block system
///
/// ```text
/// [ (1-r)S + αC   -A    -B ] [x_u]   [ f1]
/// [ -Aᵀ           rM     D ] [x_σ] = [-f2]
/// [ -Bᵀ            D     0 ] [x_φ]   [  0]
/// ```
#[derive(Debug, Clone)]
pub struct BlockSystem {
    /// Number of vertices `N`.
    pub n: usize,
    /// `S`, N x N: `∫ ∇u·∇v`.
    pub stiffness: CsrMatrix,
    /// `M`, 2N x 2N: `∫ σ·τ`.
    pub mass: CsrMatrix,
    /// Diagonal of `D`, 2N: `∫ τ·φ` with φ in the dual space.
    pub pairing: Vec<f64>,
    /// `A`, N x 2N: `∫_Γ (σ·n) u`.
    pub boundary: CsrMatrix,
    /// `B`, N x 2N: `∫ ∇v·φ`.
    pub gradient: CsrMatrix,
    /// `C`, N x N: `Σ_e h_e⁻¹ ∫_e u v`.
    pub penalty: CsrMatrix,
    /// `∫ f v + α ⟨g_D, v⟩_{1/2,h}`.
    pub f1: Vec<f64>,
    /// `∫_Γ (τ·n) g_D`.
    pub f2: Vec<f64>,
    pub alpha: f64,
}

struct ElementBlock {
    stiffness: [[f64; 3]; 3],
    mass: [[f64; 3]; 3],
    /// `gradient[c][i][j] = ∫ ∂_c λ_i μ_j`
    gradient: [[[f64; 3]; 3]; 2],
    pairing: [f64; 3],
    load: [f64; 3],
}

fn element_block(mesh: &Mesh, t: usize, data: &ProblemData, dual: &DualBasis, rule: &crate::femcore::quadrature::TriangleRule) -> ElementBlock {
    let corners = mesh.corners(t);
    let geom = ElementGeometry::from_corners(corners);
    let jac = 2.0 * geom.area;
    let g = geom.grad_lambda;
    let mut blk = ElementBlock {
        stiffness: [[0.0; 3]; 3],
        mass: [[0.0; 3]; 3],
        gradient: [[[0.0; 3]; 3]; 2],
        pairing: [0.0; 3],
        load: [0.0; 3],
    };
    for i in 0..3 {
        for j in 0..3 {
            blk.stiffness[i][j] = geom.area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
        }
    }
    for (p, w) in rule.iter() {
        let wq = w * jac;
        let phi = p1_shape(p);
        let mu = dual.values(p);
        let f = (data.source)(ElementGeometry::map(&corners, p));
        for i in 0..3 {
            for j in 0..3 {
                blk.mass[i][j] += wq * phi[i] * phi[j];
                for c in 0..2 {
                    blk.gradient[c][i][j] += wq * g[i][c] * mu[j];
                }
            }
            blk.pairing[i] += wq * phi[i] * mu[i];
            blk.load[i] += wq * f * phi[i];
        }
    }
    blk
}

/// Values of `∫_e ρ_a ρ_b` and `∫_e g ρ_a` on one boundary edge.
fn edge_block(p0: Point, p1: Point, length: f64, g: &dyn Fn(Point) -> f64, rule: &crate::femcore::quadrature::EdgeRule) -> ([[f64; 2]; 2], [f64; 2]) {
    let mut mass = [[0.0; 2]; 2];
    let mut load = [0.0; 2];
    for (s, w) in rule.iter() {
        let phi = [1.0 - s, s];
        let x = [(1.0 - s) * p0[0] + s * p1[0], (1.0 - s) * p0[1] + s * p1[1]];
        let gw = w * length * g(x);
        for a in 0..2 {
            for b in 0..2 {
                mass[a][b] += w * length * phi[a] * phi[b];
            }
            load[a] += gw * phi[a];
        }
    }
    (mass, load)
}

pub fn assemble(mesh: &Mesh, data: &ProblemData, alpha: f64) -> Result<BlockSystem> {
    assemble_with(mesh, data, &AssemblyOptions::with_alpha(alpha))
}

pub fn assemble_with(mesh: &Mesh, data: &ProblemData, opts: &AssemblyOptions) -> Result<BlockSystem> {
    if !(opts.alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {}", opts.alpha)));
    }
    assemble_unchecked(mesh, data, opts)
}

/// Assembly without the `α > 0` precondition, for negative tests that probe
/// loss of definiteness.
pub fn assemble_unchecked(mesh: &Mesh, data: &ProblemData, opts: &AssemblyOptions) -> Result<BlockSystem> {
    if !(opts.dual_scale > 0.0) {
        return Err(Error::InvalidArgument(format!("dual scale must be positive, got {}", opts.dual_scale)));
    }
    let n = mesh.num_vertices();
    let tri_rule = triangle_quadrature(opts.element_degree)?;
    let edge_rule = edge_quadrature(opts.edge_degree)?;
    let dual = DualBasis::scaled(opts.dual_scale);

    let blocks = opts
        .execution
        .map(mesh.num_triangles(), |t| element_block(mesh, t, data, &dual, &tri_rule));

    let ne = mesh.num_triangles();
    let mut s_t = Vec::with_capacity(9 * ne);
    let mut m_t = Vec::with_capacity(18 * ne);
    let mut b_t = Vec::with_capacity(18 * ne);
    let mut pairing = vec![0.0; 2 * n];
    let mut f1 = vec![0.0; n];
    for (tri, blk) in mesh.triangles().iter().zip(&blocks) {
        for i in 0..3 {
            let vi = tri[i];
            for j in 0..3 {
                let vj = tri[j];
                s_t.push((vi, vj, blk.stiffness[i][j]));
                for c in 0..2 {
                    m_t.push((c * n + vi, c * n + vj, blk.mass[i][j]));
                    b_t.push((vi, c * n + vj, blk.gradient[c][i][j]));
                }
            }
            pairing[vi] += blk.pairing[i];
            pairing[n + vi] += blk.pairing[i];
            f1[vi] += blk.load[i];
        }
    }

    let mut c_t = Vec::new();
    let mut a_t = Vec::new();
    let mut f2 = vec![0.0; 2 * n];
    let verts = mesh.vertices();
    for e in mesh.boundary_edges() {
        let [v0, v1] = e.vertices;
        let (mass, load) = edge_block(verts[v0], verts[v1], e.length, &*data.dirichlet, &edge_rule);
        let ends = [v0, v1];
        for a in 0..2 {
            for b in 0..2 {
                c_t.push((ends[a], ends[b], mass[a][b] / e.length));
                for c in 0..2 {
                    if e.normal[c] != 0.0 {
                        a_t.push((ends[a], c * n + ends[b], e.normal[c] * mass[a][b]));
                    }
                }
            }
            f1[ends[a]] += opts.alpha * load[a] / e.length;
            for c in 0..2 {
                f2[c * n + ends[a]] += e.normal[c] * load[a];
            }
        }
    }

    Ok(BlockSystem {
        n,
        stiffness: CsrMatrix::from_triplets(n, n, &s_t)?,
        mass: CsrMatrix::from_triplets(2 * n, 2 * n, &m_t)?,
        pairing,
        boundary: CsrMatrix::from_triplets(n, 2 * n, &a_t)?,
        gradient: CsrMatrix::from_triplets(n, 2 * n, &b_t)?,
        penalty: CsrMatrix::from_triplets(n, n, &c_t)?,
        f1,
        f2,
        alpha: opts.alpha,
    })
}

/// The full scalar pairing matrix `∫ ρ_i μ_j`, off-diagonal terms included.
pub fn biorthogonality_matrix(mesh: &Mesh, dual: &DualBasis, degree: usize) -> Result<CsrMatrix> {
    let rule = triangle_quadrature(degree)?;
    let n = mesh.num_vertices();
    let mut t = Vec::with_capacity(9 * mesh.num_triangles());
    for (k, tri) in mesh.triangles().iter().enumerate() {
        let jac = 2.0 * mesh.element_geometry(k)?.area;
        let mut local = [[0.0; 3]; 3];
        for (p, w) in rule.iter() {
            let (phi, mu) = (p1_shape(p), dual.values(p));
            for i in 0..3 {
                for j in 0..3 {
                    local[i][j] += w * jac * phi[i] * mu[j];
                }
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                t.push((tri[i], tri[j], local[i][j]));
            }
        }
    }
    CsrMatrix::from_triplets(n, n, &t)
}

/// `⟨u, v⟩_{1/2,h} = Σ_e h_e⁻¹ ∫_e u v` for P1 fields given by nodal values,
/// evaluated by edge quadrature.
pub fn assemble_penalty_norm_product(mesh: &Mesh, u: &[f64], v: &[f64]) -> Result<f64> {
    let n = mesh.num_vertices();
    if u.len() != n || v.len() != n {
        return Err(Error::ShapeMismatch {
            op: "penalty_norm_product",
            lhs: (u.len(), 1),
            rhs: (v.len(), 1),
        });
    }
    let rule = edge_quadrature(3)?;
    let mut sum = 0.0;
    for e in mesh.boundary_edges() {
        let [a, b] = e.vertices;
        let edge: f64 = rule
            .iter()
            .map(|(s, w)| {
                let uh = (1.0 - s) * u[a] + s * u[b];
                let vh = (1.0 - s) * v[a] + s * v[b];
                w * e.length * uh * vh
            })
            .sum();
        sum += edge / e.length;
    }
    Ok(sum)
}

//! Finite-element assembly of the operators of the coupled problem.
//!
//! Every field argument is a coefficient vector over the free degrees of
//! freedom of [`DofMap`]; Dirichlet nodes carry zero. The prescribed
//! potential `φ_b` enters through its nodal interpolant, which is nonzero on
//! the Dirichlet part as well. Triangles use the three-point rule with
//! barycentric points `(2/3, 1/6, 1/6)`, edges two-point Gauss.

use nalgebra::DVector;
use nalgebra_sparse::{CooMatrix, CsrMatrix};

use crate::linalg::{self, SparseMatrix};
use crate::materials::{BoundaryData, ElasticTensor, FrictionModel, MaterialModel, ThermalConductivity};
use crate::mesh::{BoundaryEdge, BoundaryTag, DofMap, Mesh, Point};

/// Barycentric coordinates of the triangle quadrature points.
pub const TRIANGLE_POINTS: [[f64; 3]; 3] = [
    [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
    [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
    [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
];

/// Edge Gauss points as the parameter along the edge from its first node.
pub fn edge_points() -> [f64; 2] {
    let d = 0.5 / 3f64.sqrt();
    [0.5 - d, 0.5 + d]
}

/// Geometry of one P1 triangle.
#[derive(Debug, Clone, Copy)]
pub struct Element {
    pub nodes: [usize; 3],
    pub vertices: [Point; 3],
    pub area: f64,
    /// Constant gradients of the three nodal basis functions.
    pub grads: [Point; 3],
}

impl Element {
    pub fn new(mesh: &Mesh, t: usize) -> Element {
        let nodes = mesh.triangles()[t];
        let [p0, p1, p2] = nodes.map(|i| mesh.nodes()[i]);
        let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
        let grads = [
            [(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det],
            [(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det],
            [(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det],
        ];
        Element {
            nodes,
            vertices: [p0, p1, p2],
            area: 0.5 * det,
            grads,
        }
    }

    pub fn point(&self, bary: &[f64; 3]) -> Point {
        let v = &self.vertices;
        [
            bary[0] * v[0][0] + bary[1] * v[1][0] + bary[2] * v[2][0],
            bary[0] * v[0][1] + bary[1] * v[1][1] + bary[2] * v[2][1],
        ]
    }

    /// Gradient of the P1 function with the given nodal values.
    pub fn gradient(&self, nodal: &[f64]) -> Point {
        let mut g = [0.0, 0.0];
        for k in 0..3 {
            let c = nodal[self.nodes[k]];
            g[0] += c * self.grads[k][0];
            g[1] += c * self.grads[k][1];
        }
        g
    }

    /// Gradient matrix `∂v_i/∂x_j` of a nodal vector field.
    pub fn vector_gradient(&self, nodal: &[Point]) -> [[f64; 2]; 2] {
        let mut g = [[0.0; 2]; 2];
        for k in 0..3 {
            let c = nodal[self.nodes[k]];
            for (i, gi) in g.iter_mut().enumerate() {
                gi[0] += c[i] * self.grads[k][0];
                gi[1] += c[i] * self.grads[k][1];
            }
        }
        g
    }

    pub fn value(&self, nodal: &[f64], bary: &[f64; 3]) -> f64 {
        (0..3).map(|k| bary[k] * nodal[self.nodes[k]]).sum()
    }
}

pub fn elements(mesh: &Mesh) -> impl Iterator<Item = Element> + '_ {
    (0..mesh.triangles().len()).map(move |t| Element::new(mesh, t))
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// A sparse operator on free degrees of freedom with an optional affine part.
#[derive(Debug, Clone)]
pub struct AssembledOperator {
    pub matrix: SparseMatrix,
    pub load: Option<DVector<f64>>,
}

impl AssembledOperator {
    pub fn asymmetry(&self) -> f64 {
        linalg::max_asymmetry(&self.matrix)
    }
}

/// Collects element contributions, dropping rows and columns of
/// eliminated degrees of freedom.
struct Triplets {
    coo: CooMatrix<f64>,
}

impl Triplets {
    fn new(n: usize) -> Self {
        Triplets {
            coo: CooMatrix::new(n, n),
        }
    }

    fn add(&mut self, row: Option<usize>, col: Option<usize>, v: f64) {
        if let (Some(i), Some(j)) = (row, col) {
            self.coo.push(i, j, v);
        }
    }

    fn finish(self) -> SparseMatrix {
        CsrMatrix::from(&self.coo)
    }
}

/// Nodal values of the interpolant of `φ_b` at every node.
pub fn potential_nodes(mesh: &Mesh, bd: &BoundaryData) -> Vec<f64> {
    mesh.nodes().iter().map(|&x| (bd.phi_b)(x)).collect()
}

/// Consistent P1 mass matrix on `V_h`.
pub fn scalar_mass(mesh: &Mesh, dofs: &DofMap) -> SparseMatrix {
    let mut t = Triplets::new(dofs.n_scalar());
    for el in elements(mesh) {
        for a in 0..3 {
            for b in 0..3 {
                let m = if a == b { el.area / 6.0 } else { el.area / 12.0 };
                t.add(dofs.scalar_dof(el.nodes[a]), dofs.scalar_dof(el.nodes[b]), m);
            }
        }
    }
    t.finish()
}

/// `∫ ∇z·∇w` on `V_h`.
pub fn laplace_stiffness(mesh: &Mesh, dofs: &DofMap) -> SparseMatrix {
    let mut t = Triplets::new(dofs.n_scalar());
    for el in elements(mesh) {
        for a in 0..3 {
            for b in 0..3 {
                let v = el.area * dot(el.grads[a], el.grads[b]);
                t.add(dofs.scalar_dof(el.nodes[a]), dofs.scalar_dof(el.nodes[b]), v);
            }
        }
    }
    t.finish()
}

/// `∫ k_ij(θ) ∂z/∂x_i ∂w/∂x_j` with `k` evaluated at the quadrature points.
pub fn thermal_stiffness(
    mesh: &Mesh,
    dofs: &DofMap,
    conductivity: &ThermalConductivity,
    theta_eval: &DVector<f64>,
) -> SparseMatrix {
    let theta = dofs.expand_scalar(theta_eval);
    let mut t = Triplets::new(dofs.n_scalar());
    for el in elements(mesh) {
        let mut k = [[0.0; 2]; 2];
        for q in &TRIANGLE_POINTS {
            let kq = conductivity.eval(el.value(&theta, q));
            for i in 0..2 {
                for j in 0..2 {
                    k[i][j] += kq[i][j] * el.area / 3.0;
                }
            }
        }
        for a in 0..3 {
            for b in 0..3 {
                let (gw, gz) = (el.grads[a], el.grads[b]);
                let mut v = 0.0;
                for i in 0..2 {
                    for j in 0..2 {
                        v += k[i][j] * gz[i] * gw[j];
                    }
                }
                t.add(dofs.scalar_dof(el.nodes[a]), dofs.scalar_dof(el.nodes[b]), v);
            }
        }
    }
    t.finish()
}

/// Visits the two Gauss points of an edge: `(x, [N_first, N_second], weight)`.
fn edge_quadrature(mesh: &Mesh, e: &BoundaryEdge, mut f: impl FnMut(Point, [f64; 2], f64)) {
    let (p, q) = (mesh.nodes()[e.nodes[0]], mesh.nodes()[e.nodes[1]]);
    let w = 0.5 * mesh.edge_length(e);
    for s in edge_points() {
        let x = [p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])];
        f(x, [1.0 - s, s], w);
    }
}

/// `∫ c(x) z w dΓ` over edges with one of the given tags.
pub fn boundary_mass(
    mesh: &Mesh,
    dofs: &DofMap,
    tags: &[BoundaryTag],
    weight: impl Fn(Point) -> f64,
) -> SparseMatrix {
    robin_mass(mesh, dofs, |tag, x| if tags.contains(&tag) { weight(x) } else { 0.0 })
}

/// `∫ c(tag, x) z w dΓ` over every non-Dirichlet boundary edge.
pub fn robin_mass(mesh: &Mesh, dofs: &DofMap, weight: impl Fn(BoundaryTag, Point) -> f64) -> SparseMatrix {
    let mut t = Triplets::new(dofs.n_scalar());
    for e in mesh.boundary_edges() {
        if e.tag == BoundaryTag::Dirichlet {
            continue;
        }
        let rows = e.nodes.map(|n| dofs.scalar_dof(n));
        edge_quadrature(mesh, e, |x, n, w| {
            let c = weight(e.tag, x);
            if c == 0.0 {
                return;
            }
            for a in 0..2 {
                for b in 0..2 {
                    t.add(rows[a], rows[b], c * w * n[a] * n[b]);
                }
            }
        });
    }
    t.finish()
}

/// Heat exchange operator `P`: weights `h_N` on `Γ_N`, `h_C(F)` on `Γ_C`.
pub fn thermal_robin(mesh: &Mesh, dofs: &DofMap, bd: &BoundaryData, fric: &FrictionModel, t: f64) -> SparseMatrix {
    robin_mass(mesh, dofs, |tag, x| match tag {
        BoundaryTag::Neumann => bd.heat_transfer_n,
        BoundaryTag::Contact => bd.heat_transfer_c.eval(fric.traction.eval(x, t)),
        BoundaryTag::Dirichlet => 0.0,
    })
}

fn current_weight<'a>(bd: &'a BoundaryData, fric: &FrictionModel, t: f64) -> impl Fn(BoundaryTag, Point) -> f64 + 'a {
    let traction = fric.traction.clone();
    move |tag, x| match tag {
        BoundaryTag::Neumann => bd.current_transfer_n,
        BoundaryTag::Contact => bd.current_transfer_c.eval(traction.eval(x, t)),
        BoundaryTag::Dirichlet => 0.0,
    }
}

/// Matrix and load of the electric problem for the shifted potential
/// `φ = φ_total − φ_b`: `σ_el(θ)` stiffness plus `H_N`, `H_C(F)` boundary
/// mass; the load moves every `φ_b` term to the right-hand side.
pub fn electric_system(
    mesh: &Mesh,
    dofs: &DofMap,
    mat: &MaterialModel,
    fric: &FrictionModel,
    bd: &BoundaryData,
    theta: &DVector<f64>,
    t: f64,
) -> AssembledOperator {
    let theta = dofs.expand_scalar(theta);
    let phi_b = potential_nodes(mesh, bd);
    let n = dofs.n_scalar();
    let mut trip = Triplets::new(n);
    let mut load = DVector::zeros(n);
    for el in elements(mesh) {
        let sigma: f64 = TRIANGLE_POINTS
            .iter()
            .map(|q| mat.electric.eval(el.value(&theta, q)) * el.area / 3.0)
            .sum();
        let gb = el.gradient(&phi_b);
        for a in 0..3 {
            let row = dofs.scalar_dof(el.nodes[a]);
            for b in 0..3 {
                trip.add(row, dofs.scalar_dof(el.nodes[b]), sigma * dot(el.grads[a], el.grads[b]));
            }
            if let Some(r) = row {
                load[r] -= sigma * dot(gb, el.grads[a]);
            }
        }
    }
    let weight = current_weight(bd, fric, t);
    for e in mesh.boundary_edges() {
        if e.tag == BoundaryTag::Dirichlet {
            continue;
        }
        let rows = e.nodes.map(|n| dofs.scalar_dof(n));
        let pb = e.nodes.map(|n| phi_b[n]);
        edge_quadrature(mesh, e, |x, nv, w| {
            let c = weight(e.tag, x);
            let pbq = nv[0] * pb[0] + nv[1] * pb[1];
            for a in 0..2 {
                for b in 0..2 {
                    trip.add(rows[a], rows[b], c * w * nv[a] * nv[b]);
                }
                if let Some(r) = rows[a] {
                    load[r] -= c * w * pbq * nv[a];
                }
            }
        });
    }
    AssembledOperator {
        matrix: trip.finish(),
        load: Some(load),
    }
}

/// Direct Joule load `∫ σ_el(θ) |∇φ + ∇φ_b|² w`.
pub fn joule_load_direct(
    mesh: &Mesh,
    dofs: &DofMap,
    mat: &MaterialModel,
    bd: &BoundaryData,
    theta_del: &DVector<f64>,
    phi_del: &DVector<f64>,
) -> DVector<f64> {
    let theta = dofs.expand_scalar(theta_del);
    let phi = dofs.expand_scalar(phi_del);
    let phi_b = potential_nodes(mesh, bd);
    let mut out = DVector::zeros(dofs.n_scalar());
    for el in elements(mesh) {
        let g = el.gradient(&phi);
        let gb = el.gradient(&phi_b);
        let total = [g[0] + gb[0], g[1] + gb[1]];
        let g2 = dot(total, total);
        for q in &TRIANGLE_POINTS {
            let s = mat.electric.eval(el.value(&theta, q)) * g2 * el.area / 3.0;
            for a in 0..3 {
                if let Some(r) = dofs.scalar_dof(el.nodes[a]) {
                    out[r] += s * q[a];
                }
            }
        }
    }
    out
}

/// Joule load rewritten by testing the electric equation with `φ w`:
/// `∫σ∇φ·∇φ_b w + ∫σ|∇φ_b|² w − ∫σφ(∇φ + ∇φ_b)·∇w − ∫ H (φ² + φφ_b) w dΓ`.
/// Agrees with [`joule_load_direct`] for exact solutions only.
pub fn joule_load_reformulated(
    mesh: &Mesh,
    dofs: &DofMap,
    mat: &MaterialModel,
    fric: &FrictionModel,
    bd: &BoundaryData,
    theta_del: &DVector<f64>,
    phi_del: &DVector<f64>,
    t: f64,
) -> DVector<f64> {
    let theta = dofs.expand_scalar(theta_del);
    let phi = dofs.expand_scalar(phi_del);
    let phi_b = potential_nodes(mesh, bd);
    let mut out = DVector::zeros(dofs.n_scalar());
    for el in elements(mesh) {
        let g = el.gradient(&phi);
        let gb = el.gradient(&phi_b);
        let cross = dot(g, gb);
        let gb2 = dot(gb, gb);
        for q in &TRIANGLE_POINTS {
            let wq = el.area / 3.0;
            let sigma = mat.electric.eval(el.value(&theta, q));
            let phi_q = el.value(&phi, q);
            for a in 0..3 {
                if let Some(r) = dofs.scalar_dof(el.nodes[a]) {
                    let grad_w = el.grads[a];
                    out[r] += wq * sigma * (cross + gb2) * q[a];
                    out[r] -= wq * sigma * phi_q * (dot(g, grad_w) + dot(gb, grad_w));
                }
            }
        }
    }
    let weight = current_weight(bd, fric, t);
    for e in mesh.boundary_edges() {
        if e.tag == BoundaryTag::Dirichlet {
            continue;
        }
        let rows = e.nodes.map(|n| dofs.scalar_dof(n));
        let (p, pb) = (e.nodes.map(|n| phi[n]), e.nodes.map(|n| phi_b[n]));
        edge_quadrature(mesh, e, |x, nv, w| {
            let c = weight(e.tag, x);
            let pq = nv[0] * p[0] + nv[1] * p[1];
            let pbq = nv[0] * pb[0] + nv[1] * pb[1];
            for a in 0..2 {
                if let Some(r) = rows[a] {
                    out[r] -= c * w * (pq * pq + pq * pbq) * nv[a];
                }
            }
        });
    }
    out
}

/// `∫ c_ijkl ∂u_k/∂x_l ∂η_i/∂x_j` on `E_h`.
pub fn elastic_stiffness(mesh: &Mesh, dofs: &DofMap, c: &ElasticTensor) -> SparseMatrix {
    let mut t = Triplets::new(dofs.n_vector());
    for el in elements(mesh) {
        for a in 0..3 {
            for b in 0..3 {
                let (ga, gb) = (el.grads[a], el.grads[b]);
                for i in 0..2 {
                    for k in 0..2 {
                        let mut v = 0.0;
                        for j in 0..2 {
                            for l in 0..2 {
                                v += c.get(i, j, k, l) * gb[l] * ga[j];
                            }
                        }
                        t.add(
                            dofs.vector_dof(el.nodes[a], i),
                            dofs.vector_dof(el.nodes[b], k),
                            el.area * v,
                        );
                    }
                }
            }
        }
    }
    t.finish()
}

/// `∫ ∇v : ∇η` on `E_h`, the matrix of the velocity-space norm.
pub fn vector_stiffness(mesh: &Mesh, dofs: &DofMap) -> SparseMatrix {
    let mut t = Triplets::new(dofs.n_vector());
    for el in elements(mesh) {
        for a in 0..3 {
            for b in 0..3 {
                let v = el.area * dot(el.grads[a], el.grads[b]);
                for i in 0..2 {
                    t.add(dofs.vector_dof(el.nodes[a], i), dofs.vector_dof(el.nodes[b], i), v);
                }
            }
        }
    }
    t.finish()
}

/// Consistent P1 mass on `E_h`.
pub fn vector_mass(mesh: &Mesh, dofs: &DofMap) -> SparseMatrix {
    let mut t = Triplets::new(dofs.n_vector());
    for el in elements(mesh) {
        for a in 0..3 {
            for b in 0..3 {
                let m = if a == b { el.area / 6.0 } else { el.area / 12.0 };
                for i in 0..2 {
                    t.add(dofs.vector_dof(el.nodes[a], i), dofs.vector_dof(el.nodes[b], i), m);
                }
            }
        }
    }
    t.finish()
}

/// `∫_{Γ_C} v_τ η_τ dΓ` with the tangent of each edge.
pub fn contact_tangential_mass(mesh: &Mesh, dofs: &DofMap) -> SparseMatrix {
    let mut t = Triplets::new(dofs.n_vector());
    for e in mesh.edges_tagged(BoundaryTag::Contact) {
        let tau = e.tangent();
        edge_quadrature(mesh, e, |_, nv, w| {
            for a in 0..2 {
                for b in 0..2 {
                    for i in 0..2 {
                        for k in 0..2 {
                            t.add(
                                dofs.vector_dof(e.nodes[a], i),
                                dofs.vector_dof(e.nodes[b], k),
                                w * nv[a] * nv[b] * tau[i] * tau[k],
                            );
                        }
                    }
                }
            }
        });
    }
    t.finish()
}

/// Rectangular coupling `C` with `C[(a,i), b] = −∫ m_ij N_b ∂N_a/∂x_j`, so
/// that `L_d θ = C θ` and `G(v) = θ_ref Cᵀ v`.
pub fn thermal_coupling_matrix(mesh: &Mesh, dofs: &DofMap, mat: &MaterialModel) -> SparseMatrix {
    let mut coo = CooMatrix::new(dofs.n_vector(), dofs.n_scalar());
    let m = mat.expansion;
    for el in elements(mesh) {
        for a in 0..3 {
            for b in 0..3 {
                let Some(col) = dofs.scalar_dof(el.nodes[b]) else {
                    continue;
                };
                // ∫ N_b = area / 3
                for i in 0..2 {
                    if let Some(row) = dofs.vector_dof(el.nodes[a], i) {
                        let v = -(m[i][0] * el.grads[a][0] + m[i][1] * el.grads[a][1]) * el.area / 3.0;
                        coo.push(row, col, v);
                    }
                }
            }
        }
    }
    CsrMatrix::from(&coo)
}

/// `L_d θ`.
pub fn thermal_coupling_load(mesh: &Mesh, dofs: &DofMap, mat: &MaterialModel, theta: &DVector<f64>) -> DVector<f64> {
    linalg::matvec(&thermal_coupling_matrix(mesh, dofs, mat), theta)
}

/// `G(v)`: `−∫ m_ij θ_ref ∂v_i/∂x_j w`.
pub fn velocity_heat_load(mesh: &Mesh, dofs: &DofMap, mat: &MaterialModel, v: &DVector<f64>) -> DVector<f64> {
    let c = thermal_coupling_matrix(mesh, dofs, mat);
    mat.theta_ref * linalg::matvec(&c.transpose(), v)
}

/// Frictional heat `R(v)`: `∫_{Γ_C} μ(|v_τ|) F |v_τ| w dΓ`.
pub fn frictional_heat_load(
    mesh: &Mesh,
    dofs: &DofMap,
    fric: &FrictionModel,
    v: &DVector<f64>,
    t: f64,
) -> DVector<f64> {
    let vel = dofs.expand_vector(v);
    let mut out = DVector::zeros(dofs.n_scalar());
    for e in mesh.edges_tagged(BoundaryTag::Contact) {
        let tau = e.tangent();
        let rows = e.nodes.map(|n| dofs.scalar_dof(n));
        let (v0, v1) = (vel[e.nodes[0]], vel[e.nodes[1]]);
        edge_quadrature(mesh, e, |x, nv, w| {
            let vq = [nv[0] * v0[0] + nv[1] * v1[0], nv[0] * v0[1] + nv[1] * v1[1]];
            let s = dot(vq, tau).abs();
            let q = fric.mu(s) * fric.traction.eval(x, t) * s;
            for a in 0..2 {
                if let Some(r) = rows[a] {
                    out[r] += w * q * nv[a];
                }
            }
        });
    }
    out
}

/// Residual `∫|∇θ|²∇θ·∇w` of the 4-Laplacian and its exact Jacobian.
pub fn p_laplacian(mesh: &Mesh, dofs: &DofMap, theta: &DVector<f64>) -> (DVector<f64>, SparseMatrix) {
    let nodal = dofs.expand_scalar(theta);
    let mut r = DVector::zeros(dofs.n_scalar());
    let mut t = Triplets::new(dofs.n_scalar());
    for el in elements(mesh) {
        let g = el.gradient(&nodal);
        let g2 = dot(g, g);
        for a in 0..3 {
            let row = dofs.scalar_dof(el.nodes[a]);
            let ga = el.grads[a];
            if let Some(i) = row {
                r[i] += el.area * g2 * dot(g, ga);
            }
            for b in 0..3 {
                let gb = el.grads[b];
                let v = el.area * (g2 * dot(ga, gb) + 2.0 * dot(g, ga) * dot(g, gb));
                t.add(row, dofs.scalar_dof(el.nodes[b]), v);
            }
        }
    }
    (r, t.finish())
}

/// `∫|∇θ|⁴`, exact for P1 fields.
pub fn gradient_fourth_power(mesh: &Mesh, dofs: &DofMap, theta: &DVector<f64>) -> f64 {
    let nodal = dofs.expand_scalar(theta);
    elements(mesh)
        .map(|el| {
            let g = el.gradient(&nodal);
            el.area * dot(g, g).powi(2)
        })
        .sum()
}

/// `𝓕`: `∫ f_0·η + ∫_{Γ_N} f_2·η dΓ − ∫_{Γ_C} F η_ν dΓ`.
pub fn mech_load(mesh: &Mesh, dofs: &DofMap, bd: &BoundaryData, fric: &FrictionModel, t: f64) -> DVector<f64> {
    let mut out = DVector::zeros(dofs.n_vector());
    for el in elements(mesh) {
        for q in &TRIANGLE_POINTS {
            let f = (bd.body_force)(el.point(q), t);
            for a in 0..3 {
                for i in 0..2 {
                    if let Some(r) = dofs.vector_dof(el.nodes[a], i) {
                        out[r] += el.area / 3.0 * f[i] * q[a];
                    }
                }
            }
        }
    }
    for e in mesh.boundary_edges() {
        let normal = e.normal;
        edge_quadrature(mesh, e, |x, nv, w| {
            let f = match e.tag {
                BoundaryTag::Neumann => (bd.surface_traction)(x, t),
                BoundaryTag::Contact => {
                    let p = fric.traction.eval(x, t);
                    [-p * normal[0], -p * normal[1]]
                }
                BoundaryTag::Dirichlet => return,
            };
            for a in 0..2 {
                for i in 0..2 {
                    if let Some(r) = dofs.vector_dof(e.nodes[a], i) {
                        out[r] += w * f[i] * nv[a];
                    }
                }
            }
        });
    }
    out
}

//! Dense reference assembly written independently of the library's sparse
//! path. Matrices are indexed by mesh node (vector fields interleaved as
//! `2 * node + component`), so comparisons never depend on DOF numbering.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use thermistor::mesh::{BoundaryTag, DofMap, Mesh};

pub type P = [f64; 2];

pub struct Tri {
    pub nodes: [usize; 3],
    pub area: f64,
    pub grads: [P; 3],
}

pub struct Edge {
    pub nodes: [usize; 2],
    pub tag: BoundaryTag,
    pub length: f64,
    pub normal: P,
    pub tangent: P,
}

pub struct Dense {
    pub n: usize,
    pub xy: Vec<P>,
    pub tris: Vec<Tri>,
    pub edges: Vec<Edge>,
    pub free: Vec<bool>,
}

/// Edge midpoints in barycentric form, weights `area / 3`; exact for
/// quadratics.
const MIDPOINTS: [[f64; 3]; 3] = [[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]];

/// Interior rule used wherever a nonlinear coefficient must be sampled
/// exactly as the discrete equations prescribe.
const INTERIOR: [[f64; 3]; 3] = [
    [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
    [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
    [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
];

impl Dense {
    pub fn new(mesh: &Mesh) -> Dense {
        let xy: Vec<P> = mesh.nodes().to_vec();
        let tris: Vec<Tri> = mesh
            .triangles()
            .iter()
            .map(|&t| {
                let [p0, p1, p2] = t.map(|i| xy[i]);
                let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
                let p = [p0, p1, p2];
                let grads = [0, 1, 2].map(|a| {
                    let (b, c) = (p[(a + 1) % 3], p[(a + 2) % 3]);
                    [(b[1] - c[1]) / det, (c[0] - b[0]) / det]
                });
                Tri {
                    nodes: t,
                    area: 0.5 * det,
                    grads,
                }
            })
            .collect();
        let edges: Vec<Edge> = mesh
            .boundary_edges()
            .iter()
            .map(|e| {
                let [a, b] = e.nodes;
                let (p, q) = (xy[a], xy[b]);
                let d = [q[0] - p[0], q[1] - p[1]];
                let length = d[0].hypot(d[1]);
                let tangent = [d[0] / length, d[1] / length];
                let owner = tris
                    .iter()
                    .find(|t| t.nodes.contains(&a) && t.nodes.contains(&b))
                    .expect("boundary edge belongs to a triangle");
                let third = owner.nodes.iter().copied().find(|&k| k != a && k != b).unwrap();
                let mut normal = [tangent[1], -tangent[0]];
                let away = [xy[third][0] - p[0], xy[third][1] - p[1]];
                if normal[0] * away[0] + normal[1] * away[1] > 0.0 {
                    normal = [-normal[0], -normal[1]];
                }
                Edge {
                    nodes: e.nodes,
                    tag: e.tag,
                    length,
                    normal,
                    tangent,
                }
            })
            .collect();
        let mut free = vec![true; xy.len()];
        for e in &edges {
            if e.tag == BoundaryTag::Dirichlet {
                for &k in &e.nodes {
                    free[k] = false;
                }
            }
        }
        Dense {
            n: xy.len(),
            xy,
            tris,
            edges,
            free,
        }
    }

    pub fn free_nodes(&self) -> Vec<usize> {
        (0..self.n).filter(|&k| self.free[k]).collect()
    }

    pub fn free_vector(&self) -> Vec<usize> {
        self.free_nodes().iter().flat_map(|&k| [2 * k, 2 * k + 1]).collect()
    }

    pub fn mass(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for t in &self.tris {
            for q in &MIDPOINTS {
                for a in 0..3 {
                    for b in 0..3 {
                        m[(t.nodes[a], t.nodes[b])] += t.area / 3.0 * q[a] * q[b];
                    }
                }
            }
        }
        m
    }

    pub fn stiffness(&self) -> DMatrix<f64> {
        self.conduction(|_| [[1.0, 0.0], [0.0, 1.0]], &vec![0.0; self.n])
    }

    /// `∫ k(θ) ∇z · ∇w` with `k` averaged over the interior rule.
    pub fn conduction(&self, k: impl Fn(f64) -> [[f64; 2]; 2], theta: &[f64]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for t in &self.tris {
            let mut kbar = [[0.0; 2]; 2];
            for q in &INTERIOR {
                let th: f64 = (0..3).map(|a| q[a] * theta[t.nodes[a]]).sum();
                let kq = k(th);
                for i in 0..2 {
                    for j in 0..2 {
                        kbar[i][j] += t.area / 3.0 * kq[i][j];
                    }
                }
            }
            for a in 0..3 {
                for b in 0..3 {
                    let (ga, gb) = (t.grads[a], t.grads[b]);
                    let mut v = 0.0;
                    for i in 0..2 {
                        for j in 0..2 {
                            v += kbar[i][j] * gb[i] * ga[j];
                        }
                    }
                    m[(t.nodes[a], t.nodes[b])] += v;
                }
            }
        }
        m
    }

    /// `Σ_edges c(tag) ∫ z w dΓ`, closed form for linear traces.
    pub fn edge_mass(&self, c: impl Fn(BoundaryTag) -> f64) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            let w = c(e.tag) * e.length / 6.0;
            let [a, b] = e.nodes;
            m[(a, a)] += 2.0 * w;
            m[(b, b)] += 2.0 * w;
            m[(a, b)] += w;
            m[(b, a)] += w;
        }
        m
    }

    /// Isotropic tensor with Lamé constants: `∫ σ(∇u) : ∇η`.
    pub fn elastic(&self, lambda: f64, mu: f64) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(2 * self.n, 2 * self.n);
        for t in &self.tris {
            for a in 0..3 {
                for b in 0..3 {
                    let (ga, gb) = (t.grads[a], t.grads[b]);
                    for k in 0..2 {
                        // ∇(N_b e_k) has row k equal to ∇N_b
                        let mut g = [[0.0; 2]; 2];
                        g[k] = gb;
                        let eps = [
                            [g[0][0], 0.5 * (g[0][1] + g[1][0])],
                            [0.5 * (g[0][1] + g[1][0]), g[1][1]],
                        ];
                        let tr = eps[0][0] + eps[1][1];
                        for i in 0..2 {
                            let mut v = 0.0;
                            for j in 0..2 {
                                let sigma = 2.0 * mu * eps[i][j] + if i == j { lambda * tr } else { 0.0 };
                                v += sigma * ga[j];
                            }
                            m[(2 * t.nodes[a] + i, 2 * t.nodes[b] + k)] += t.area * v;
                        }
                    }
                }
            }
        }
        m
    }

    fn componentwise(&self, s: &DMatrix<f64>) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(2 * self.n, 2 * self.n);
        for a in 0..self.n {
            for b in 0..self.n {
                for i in 0..2 {
                    m[(2 * a + i, 2 * b + i)] = s[(a, b)];
                }
            }
        }
        m
    }

    pub fn vector_mass(&self) -> DMatrix<f64> {
        self.componentwise(&self.mass())
    }

    pub fn vector_stiffness(&self) -> DMatrix<f64> {
        self.componentwise(&self.stiffness())
    }

    pub fn contact_tangential_mass(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(2 * self.n, 2 * self.n);
        for e in self.edges.iter().filter(|e| e.tag == BoundaryTag::Contact) {
            let tau = e.tangent;
            for (a, na) in e.nodes.iter().enumerate() {
                for (b, nb) in e.nodes.iter().enumerate() {
                    let w = e.length / 6.0 * if a == b { 2.0 } else { 1.0 };
                    for i in 0..2 {
                        for k in 0..2 {
                            m[(2 * na + i, 2 * nb + k)] += w * tau[i] * tau[k];
                        }
                    }
                }
            }
        }
        m
    }

    /// `C[(a,i), b] = −∫ m N_b ∂N_a/∂x_i` for isotropic expansion `m I`.
    pub fn coupling(&self, expansion: f64) -> DMatrix<f64> {
        let mut c = DMatrix::zeros(2 * self.n, self.n);
        for t in &self.tris {
            for b in 0..3 {
                let integral: f64 = MIDPOINTS.iter().map(|q| t.area / 3.0 * q[b]).sum();
                for a in 0..3 {
                    for i in 0..2 {
                        c[(2 * t.nodes[a] + i, t.nodes[b])] -= expansion * t.grads[a][i] * integral;
                    }
                }
            }
        }
        c
    }

    /// `∫ σ |∇φ|² w` for constant `σ` and a nodal total potential.
    pub fn joule(&self, sigma: f64, phi_total: &[f64]) -> DVector<f64> {
        let mut out = DVector::zeros(self.n);
        for t in &self.tris {
            let mut g = [0.0; 2];
            for a in 0..3 {
                for i in 0..2 {
                    g[i] += phi_total[t.nodes[a]] * t.grads[a][i];
                }
            }
            let s = sigma * (g[0] * g[0] + g[1] * g[1]);
            for b in 0..3 {
                let integral: f64 = MIDPOINTS.iter().map(|q| t.area / 3.0 * q[b]).sum();
                out[t.nodes[b]] += s * integral;
            }
        }
        out
    }

    /// Surface traction on `Γ_N` and the normal pressure `−F ν` on `Γ_C`.
    pub fn mech_load(&self, traction_n: P, pressure: f64) -> DVector<f64> {
        let mut out = DVector::zeros(2 * self.n);
        for e in &self.edges {
            let f = match e.tag {
                BoundaryTag::Neumann => traction_n,
                BoundaryTag::Contact => [-pressure * e.normal[0], -pressure * e.normal[1]],
                BoundaryTag::Dirichlet => continue,
            };
            for &k in &e.nodes {
                for i in 0..2 {
                    out[2 * k + i] += f[i] * e.length / 2.0;
                }
            }
        }
        out
    }
}

/// Rows and columns `idx` of `m`.
pub fn restrict(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

pub fn restrict_vec(v: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    DVector::from_fn(idx.len(), |i, _| v[idx[i]])
}

/// Largest entrywise difference between a library matrix on free DOFs and a
/// node-indexed dense matrix.
pub fn scalar_mismatch(lib: &DMatrix<f64>, dofs: &DofMap, dense: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for a in 0..dofs.n_nodes() {
        for b in 0..dofs.n_nodes() {
            if let (Some(i), Some(j)) = (dofs.scalar_dof(a), dofs.scalar_dof(b)) {
                worst = worst.max((lib[(i, j)] - dense[(a, b)]).abs());
            }
        }
    }
    worst
}

pub fn vector_mismatch(lib: &DMatrix<f64>, dofs: &DofMap, dense: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for a in 0..dofs.n_nodes() {
        for b in 0..dofs.n_nodes() {
            for i in 0..2 {
                for k in 0..2 {
                    if let (Some(r), Some(c)) = (dofs.vector_dof(a, i), dofs.vector_dof(b, k)) {
                        worst = worst.max((lib[(r, c)] - dense[(2 * a + i, 2 * b + k)]).abs());
                    }
                }
            }
        }
    }
    worst
}

/// Parameters of a frictionless, unregularized scenario with constant
/// electric conductivity, in the form the monolithic oracle consumes.
pub struct Scenario {
    pub rho: f64,
    pub c_p: f64,
    pub theta_ref: f64,
    pub viscosity: (f64, f64),
    pub elasticity: (f64, f64),
    pub expansion: f64,
    pub conductivity: Box<dyn Fn(f64) -> [[f64; 2]; 2]>,
    pub sigma: f64,
    pub heat_n: f64,
    pub heat_c: f64,
    pub current_n: f64,
    pub current_c: f64,
    pub pressure: f64,
    pub traction_n: P,
    /// Nodal interpolant of the electrode potential.
    pub phi_b: Vec<f64>,
}

/// Nodal fields; `phi` is the shifted potential. Dirichlet entries are zero.
#[derive(Clone, Debug)]
pub struct Fields {
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    pub u: Vec<P>,
    pub v: Vec<P>,
}

fn flat(v: &[P]) -> DVector<f64> {
    DVector::from_iterator(2 * v.len(), v.iter().flat_map(|p| *p))
}

impl Dense {
    fn robin(&self, on_n: f64, on_c: f64) -> DMatrix<f64> {
        self.edge_mass(|tag| match tag {
            BoundaryTag::Neumann => on_n,
            BoundaryTag::Contact => on_c,
            BoundaryTag::Dirichlet => 0.0,
        })
    }

    /// Shifted potential solving the electric problem.
    pub fn electric(&self, sc: &Scenario) -> Vec<f64> {
        let free = self.free_nodes();
        let s = sc.sigma * self.stiffness() + self.robin(sc.current_n, sc.current_c);
        let rhs = -(&s * DVector::from_vec(sc.phi_b.clone()));
        let x = restrict(&s, &free, &free)
            .lu()
            .solve(&restrict_vec(&rhs, &free))
            .expect("electric block is regular");
        let mut phi = vec![0.0; self.n];
        for (k, &node) in free.iter().enumerate() {
            phi[node] = x[k];
        }
        phi
    }

    /// One step of the discrete equations, assembled as a single block
    /// system in `(θ, φ, v)` and solved densely.
    pub fn monolithic_step(&self, sc: &Scenario, prev: &Fields, del: &Fields, dt: f64) -> Fields {
        let fs = self.free_nodes();
        let fv = self.free_vector();
        let (ns, nv) = (fs.len(), fv.len());
        let size = 2 * ns + nv;
        let mut big = DMatrix::zeros(size, size);
        let mut rhs = DVector::zeros(size);

        let mass = self.mass();
        let coupling = self.coupling(sc.expansion);
        let c = sc.rho * sc.c_p / dt;
        let heat = c * &mass + self.conduction(&sc.conductivity, &del.theta) + self.robin(sc.heat_n, sc.heat_c);
        let phi_total: Vec<f64> = del.phi.iter().zip(&sc.phi_b).map(|(a, b)| a + b).collect();
        let heat_rhs = c * &mass * DVector::from_vec(prev.theta.clone())
            + self.joule(sc.sigma, &phi_total)
            + sc.theta_ref * coupling.transpose() * flat(&del.v);

        let electric = sc.sigma * self.stiffness() + self.robin(sc.current_n, sc.current_c);
        let electric_rhs = -(&electric * DVector::from_vec(sc.phi_b.clone()));

        let vmass = self.vector_mass();
        let b = self.elastic(sc.elasticity.0, sc.elasticity.1);
        let mech = sc.rho / dt * &vmass + self.elastic(sc.viscosity.0, sc.viscosity.1) + dt * &b;
        let mech_rhs = sc.rho / dt * &vmass * flat(&prev.v) - &b * flat(&prev.u)
            - &coupling * DVector::from_vec(del.theta.clone())
            + self.mech_load(sc.traction_n, sc.pressure);

        big.view_mut((0, 0), (ns, ns)).copy_from(&restrict(&heat, &fs, &fs));
        big.view_mut((ns, ns), (ns, ns)).copy_from(&restrict(&electric, &fs, &fs));
        big.view_mut((2 * ns, 2 * ns), (nv, nv)).copy_from(&restrict(&mech, &fv, &fv));
        rhs.rows_mut(0, ns).copy_from(&restrict_vec(&heat_rhs, &fs));
        rhs.rows_mut(ns, ns).copy_from(&restrict_vec(&electric_rhs, &fs));
        rhs.rows_mut(2 * ns, nv).copy_from(&restrict_vec(&mech_rhs, &fv));
        let x = big.lu().solve(&rhs).expect("monolithic system is regular");

        let mut out = Fields {
            theta: vec![0.0; self.n],
            phi: vec![0.0; self.n],
            u: prev.u.clone(),
            v: vec![[0.0; 2]; self.n],
        };
        for (k, &node) in fs.iter().enumerate() {
            out.theta[node] = x[k];
            out.phi[node] = x[ns + k];
        }
        for (k, &dof) in fv.iter().enumerate() {
            out.v[dof / 2][dof % 2] = x[2 * ns + k];
        }
        for (u, v) in out.u.iter_mut().zip(&out.v) {
            u[0] += dt * v[0];
            u[1] += dt * v[1];
        }
        out
    }
}

/// Largest generalized eigenvalue of `(a, b)` with `b` SPD, by dense
/// Cholesky reduction and a symmetric eigensolver.
pub fn dense_generalized_max(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let l = b.clone().cholesky().expect("SPD").l();
    let li = l.try_inverse().expect("regular factor");
    let reduced = &li * a * li.transpose();
    let sym = 0.5 * (&reduced + reduced.transpose());
    sym.symmetric_eigen().eigenvalues.max()
}

/// Relative distance `max|a − b| / max|b|`.
pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let diff = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

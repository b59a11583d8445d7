//! Nonmonotone Coulomb friction: the pseudo-potential `J`, its regularized
//! subgradient, and the implicit momentum step containing it.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly;
use crate::error::{Error, Result};
use crate::linalg::{self, SparseMatrix};
use crate::materials::{FrictionCoefficient, FrictionModel};
use crate::mesh::{BoundaryTag, DofMap, Mesh, Point};

pub const DEFAULT_EPSILON: f64 = 1e-6;

/// `∫₀^r μ(s) ds`, in closed form when the law provides one.
pub fn mu_primitive(mu: &FrictionCoefficient, r: f64) -> f64 {
    mu.primitive(r)
        .unwrap_or_else(|| adaptive_simpson(&|s| mu.eval(s), 0.0, r, 1e-12, 40))
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, max_depth: u32) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    recurse(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, max_depth)
}

/// `J(v) = ∫_{Γ_C} F ∫₀^{|v_τ|} μ(s) ds dΓ` for a velocity field on `E_h`.
pub fn j_value(mesh: &Mesh, dofs: &DofMap, fric: &FrictionModel, v: &DVector<f64>, t: f64) -> f64 {
    let vel = dofs.expand_vector(v);
    let mut total = 0.0;
    for e in mesh.edges_tagged(BoundaryTag::Contact) {
        let tau = e.tangent();
        let (p, q) = (mesh.nodes()[e.nodes[0]], mesh.nodes()[e.nodes[1]]);
        let w = 0.5 * mesh.edge_length(e);
        let (v0, v1) = (vel[e.nodes[0]], vel[e.nodes[1]]);
        for s in assembly::edge_points() {
            let x = [p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])];
            let vt = ((1.0 - s) * v0[0] + s * v1[0]) * tau[0] + ((1.0 - s) * v0[1] + s * v1[1]) * tau[1];
            total += w * fric.traction.eval(x, t) * mu_primitive(&fric.coefficient, vt.abs());
        }
    }
    total
}

/// `ξ = μ(r) F v_τ / r` with `r = sqrt(|v_τ|² + ε²)`.
pub fn xi_regularized(mu: &FrictionCoefficient, v_tau: Point, f_val: f64, eps: f64) -> Point {
    let r = (v_tau[0] * v_tau[0] + v_tau[1] * v_tau[1] + eps * eps).sqrt();
    let c = mu.eval(r) * f_val / r;
    [c * v_tau[0], c * v_tau[1]]
}

/// Friction model with its smoothing length.
#[derive(Clone)]
pub struct RegularizedFriction {
    pub model: FrictionModel,
    pub epsilon: f64,
}

impl RegularizedFriction {
    pub fn new(model: FrictionModel, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::Config(format!("friction regularization must be positive, got {epsilon}")));
        }
        Ok(RegularizedFriction { model, epsilon })
    }

    /// Tangential traction for signed tangential speed `s`.
    pub fn traction(&self, s: f64, f_val: f64) -> f64 {
        let r = s.hypot(self.epsilon);
        self.model.mu(r) * f_val * s / r
    }

    /// `dξ/ds = F [μ'(r) s²/r² + μ(r) ε²/r³]`.
    pub fn traction_derivative(&self, s: f64, f_val: f64) -> f64 {
        let r = s.hypot(self.epsilon);
        let mu = &self.model.coefficient;
        f_val * (mu.derivative(r) * s * s / (r * r) + mu.eval(r) * self.epsilon * self.epsilon / (r * r * r))
    }

    /// Tractions `ξ` at the contact nodes for a velocity on `E_h`.
    pub fn nodal_tractions(&self, mesh: &Mesh, dofs: &DofMap, v: &DVector<f64>, t: f64) -> Vec<Point> {
        dofs.contact_nodes()
            .iter()
            .map(|c| {
                let s = tangential_speed(dofs, v, c.node, c.tangent);
                let f = self.model.traction.eval(mesh.nodes()[c.node], t);
                let xi = self.traction(s, f);
                [xi * c.tangent[0], xi * c.tangent[1]]
            })
            .collect()
    }
}

fn tangential_speed(dofs: &DofMap, v: &DVector<f64>, node: usize, tau: Point) -> f64 {
    match dofs.scalar_dof(node) {
        Some(k) => v[2 * k] * tau[0] + v[2 * k + 1] * tau[1],
        None => 0.0,
    }
}

/// Newton settings for the momentum step.
#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tolerance: 1e-10,
            max_iterations: 50,
            max_halvings: 20,
        }
    }
}

/// One implicit Euler step of the momentum inclusion:
/// `(m/dt) M (v − v_prev) + A_d v + B_d (u_prev + dt v) + L_d θ_del + Ξ(v) = 𝓕`.
pub struct MomentumProblem<'a> {
    pub mesh: &'a Mesh,
    pub dofs: &'a DofMap,
    pub mass: &'a SparseMatrix,
    pub viscosity: &'a SparseMatrix,
    pub elasticity: &'a SparseMatrix,
    pub friction: &'a RegularizedFriction,
    pub mass_coefficient: f64,
    pub dt: f64,
    pub t: f64,
    pub u_prev: &'a DVector<f64>,
    pub v_prev: &'a DVector<f64>,
    /// `L_d θ_del`.
    pub thermal_load: &'a DVector<f64>,
    /// `𝓕` at the new time.
    pub load: &'a DVector<f64>,
}

#[derive(Debug, Clone)]
pub struct MomentumSolution {
    pub v: DVector<f64>,
    pub u: DVector<f64>,
    pub xi: Vec<Point>,
    pub iterations: usize,
    pub residual: f64,
}

impl MomentumProblem<'_> {
    fn contact_data(&self) -> impl Iterator<Item = (usize, Point, f64, f64)> + '_ {
        self.dofs.contact_nodes().iter().map(|c| {
            let f = self.friction.model.traction.eval(self.mesh.nodes()[c.node], self.t);
            (c.node, c.tangent, c.weight, f)
        })
    }

    pub fn residual(&self, v: &DVector<f64>) -> DVector<f64> {
        let m = self.mass_coefficient / self.dt;
        let u = self.u_prev + self.dt * v;
        let mut r = m * linalg::matvec(self.mass, &(v - self.v_prev))
            + linalg::matvec(self.viscosity, v)
            + linalg::matvec(self.elasticity, &u)
            + self.thermal_load
            - self.load;
        for (node, tau, weight, f) in self.contact_data() {
            let Some(k) = self.dofs.scalar_dof(node) else { continue };
            let s = v[2 * k] * tau[0] + v[2 * k + 1] * tau[1];
            let xi = weight * self.friction.traction(s, f);
            r[2 * k] += xi * tau[0];
            r[2 * k + 1] += xi * tau[1];
        }
        r
    }

    /// Linear part of the Jacobian, independent of `v`.
    pub fn linear_jacobian(&self) -> SparseMatrix {
        linalg::combine(&[
            (self.mass_coefficient / self.dt, self.mass),
            (1.0, self.viscosity),
            (self.dt, self.elasticity),
        ])
    }

    pub fn jacobian(&self, v: &DVector<f64>) -> SparseMatrix {
        self.jacobian_from(&self.linear_jacobian(), v)
    }

    fn jacobian_from(&self, linear: &SparseMatrix, v: &DVector<f64>) -> SparseMatrix {
        let mut coo = nalgebra_sparse::CooMatrix::new(v.len(), v.len());
        for (node, tau, weight, f) in self.contact_data() {
            let Some(k) = self.dofs.scalar_dof(node) else { continue };
            let s = v[2 * k] * tau[0] + v[2 * k + 1] * tau[1];
            let d = weight * self.friction.traction_derivative(s, f);
            for i in 0..2 {
                for j in 0..2 {
                    coo.push(2 * k + i, 2 * k + j, d * tau[i] * tau[j]);
                }
            }
        }
        let friction = nalgebra_sparse::CsrMatrix::from(&coo);
        linalg::combine(&[(1.0, linear), (1.0, &friction)])
    }

    /// Newton with backtracking on the residual norm, started from `v_prev`.
    pub fn solve(&self, opts: &NewtonOptions) -> Result<MomentumSolution> {
        let linear = self.linear_jacobian();
        let threshold = opts.tolerance * (1.0 + self.load.norm());
        let mut v = self.v_prev.clone();
        let mut r = self.residual(&v);
        let mut norm = r.norm();
        let mut iterations = 0;
        while norm > threshold {
            if iterations == opts.max_iterations {
                return Err(Error::Newton {
                    solve: "momentum step",
                    iterations,
                    residual: norm,
                });
            }
            iterations += 1;
            let jac = self.jacobian_from(&linear, &v);
            let step = linalg::solve_symmetric(&jac, &(-&r))?;
            let mut alpha = 1.0;
            let mut trial = &v + &step;
            let mut trial_r = self.residual(&trial);
            for _ in 0..opts.max_halvings {
                if trial_r.norm() < norm {
                    break;
                }
                alpha *= 0.5;
                trial = &v + alpha * &step;
                trial_r = self.residual(&trial);
            }
            v = trial;
            r = trial_r;
            norm = r.norm();
            if !norm.is_finite() {
                return Err(Error::Newton {
                    solve: "momentum step",
                    iterations,
                    residual: norm,
                });
            }
        }
        let u = self.u_prev + self.dt * &v;
        let xi = self.friction.nodal_tractions(self.mesh, self.dofs, &v, self.t);
        Ok(MomentumSolution {
            v,
            u,
            xi,
            iterations,
            residual: norm,
        })
    }
}

/// Sampled verification of the bound `|ξ| ≤ F̄μ̄` and of the relaxed
/// monotonicity `⟨ξ₁ − ξ₂, v₁ − v₂⟩ ≥ −F̄ d_μ |v₁ − v₂|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgradientReport {
    pub samples: usize,
    pub bound_margin: f64,
    pub monotonicity_margin: f64,
    pub bound_violations: usize,
    pub monotonicity_violations: usize,
    pub witness: Option<String>,
}

impl SubgradientReport {
    pub fn passed(&self) -> bool {
        self.bound_violations == 0 && self.monotonicity_violations == 0
    }
}

pub fn check_subgradient_properties(
    fric: &FrictionModel,
    epsilon: f64,
    seed: u64,
    samples: usize,
) -> SubgradientReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mu = &fric.coefficient;
    let (mu_bar, d_mu, f_bar) = (fric.mu_bar(), fric.d_mu(), fric.f_bar());
    let mut report = SubgradientReport {
        samples,
        bound_margin: f64::INFINITY,
        monotonicity_margin: f64::INFINITY,
        bound_violations: 0,
        monotonicity_violations: 0,
        witness: None,
    };
    let random_velocity = |rng: &mut ChaCha8Rng| {
        let speed: f64 = rng.random_range(0.0..3.0);
        let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        [speed * angle.cos(), speed * angle.sin()]
    };
    for k in 0..samples {
        let f = rng.random_range(0.0..=f_bar.max(0.0));
        let v1 = random_velocity(&mut rng);
        // half the pairs are close together, where a jump in μ shows up
        let v2 = if k % 2 == 0 {
            random_velocity(&mut rng)
        } else {
            let scale = 1.0 + rng.random_range(-1e-2..1e-2);
            [v1[0] * scale, v1[1] * scale]
        };
        let (x1, x2) = (xi_regularized(mu, v1, f, epsilon), xi_regularized(mu, v2, f, epsilon));
        for x in [x1, x2] {
            let slack = mu_bar * f_bar * (1.0 + 1e-12) - x[0].hypot(x[1]);
            report.bound_margin = report.bound_margin.min(slack);
            if slack < 0.0 {
                report.bound_violations += 1;
                report.witness.get_or_insert_with(|| format!("|ξ| = {:e} at F = {f:e}", x[0].hypot(x[1])));
            }
        }
        let dv = [v1[0] - v2[0], v1[1] - v2[1]];
        let dv2 = dv[0] * dv[0] + dv[1] * dv[1];
        let lhs = (x1[0] - x2[0]) * dv[0] + (x1[1] - x2[1]) * dv[1];
        let slack = lhs + f_bar * d_mu * dv2 + 1e-12 * f_bar * mu_bar * dv2.sqrt();
        report.monotonicity_margin = report.monotonicity_margin.min(slack);
        if slack < 0.0 {
            report.monotonicity_violations += 1;
            report.witness.get_or_insert_with(|| {
                format!("⟨ξ₁−ξ₂, v₁−v₂⟩ = {lhs:e} < −F̄d_μ|v₁−v₂|² = {:e} at v₁ = {v1:?}, v₂ = {v2:?}", -f_bar * d_mu * dv2)
            });
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::{default_ptc_model, NormalTraction};
    use std::sync::Arc;

    #[test]
    fn primitive_closed_form_matches_simpson() {
        let (_, fric, _) = default_ptc_model();
        let mu = &fric.coefficient;
        for r in [0.0, 0.3, 1.0, 4.5] {
            let q = adaptive_simpson(&|s| mu.eval(s), 0.0, r, 1e-13, 40);
            assert!((q - mu.primitive(r).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn xi_limits() {
        let mu = FrictionCoefficient::Constant(0.3);
        assert_eq!(xi_regularized(&mu, [0.0, 0.0], 2.0, 1e-6), [0.0, 0.0]);
        let x = xi_regularized(&mu, [0.0, 1.0], 2.0, 1e-8);
        assert!((x[1] - 0.6).abs() < 0.6 * 1e-8);
    }

    #[test]
    fn xi_grows_as_epsilon_shrinks() {
        let (_, fric, _) = default_ptc_model();
        let mu = &fric.coefficient;
        let mags: Vec<f64> = [1e-2, 1e-4, 1e-6]
            .iter()
            .map(|&e| xi_regularized(mu, [0.5, 0.0], 1.0, e)[0])
            .collect();
        assert!(mags[0] < mags[1] && mags[1] < mags[2]);
        assert!(mags[2] <= mu.eval(0.5) && mu.eval(0.5) - mags[2] < 1e-10);
    }

    #[test]
    fn derivative_matches_differences() {
        let (_, fric, _) = default_ptc_model();
        let rf = RegularizedFriction::new(fric, 1e-3).unwrap();
        for s in [-2.0, -1e-3, 0.0, 2e-4, 0.7] {
            let h = 1e-7;
            let fd = (rf.traction(s + h, 0.1) - rf.traction(s - h, 0.1)) / (2.0 * h);
            let d = rf.traction_derivative(s, 0.1);
            assert!((fd - d).abs() <= 1e-6 * d.abs().max(1e-3), "s = {s}: {fd} vs {d}");
        }
    }

    #[test]
    fn default_subgradient_properties_hold() {
        let (_, fric, _) = default_ptc_model();
        let report = check_subgradient_properties(&fric, DEFAULT_EPSILON, 7, 10_000);
        assert!(report.passed(), "{report:?}");
        assert!(report.monotonicity_margin.is_finite());
    }

    #[test]
    fn step_law_breaks_relaxed_monotonicity() {
        let (_, mut fric, _) = default_ptc_model();
        fric.coefficient = FrictionCoefficient::Custom {
            law: Arc::new(|s| if s < 1.0 { 0.4 } else { 0.2 }),
            mu_bar: 0.4,
            d_mu: 0.2,
            lipschitz: f64::INFINITY,
        };
        let report = check_subgradient_properties(&fric, DEFAULT_EPSILON, 7, 10_000);
        assert!(report.monotonicity_violations > 0);
        assert!(report.witness.is_some());
    }

    #[test]
    fn constant_mu_is_monotone() {
        let fric = FrictionModel {
            coefficient: FrictionCoefficient::Constant(0.3),
            traction: NormalTraction::Constant(1.0),
        };
        let mu = &fric.coefficient;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let v1 = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            let v2 = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            let (a, b) = (xi_regularized(mu, v1, 1.0, 1e-6), xi_regularized(mu, v2, 1.0, 1e-6));
            assert!((a[0] - b[0]) * (v1[0] - v2[0]) + (a[1] - b[1]) * (v1[1] - v2[1]) >= -1e-15);
        }
    }

    #[test]
    fn j_of_constant_mu() {
        let mesh = Mesh::unit_square(4, crate::mesh::SideTags::thermistor()).unwrap();
        let dofs = DofMap::new(&mesh);
        let fric = FrictionModel {
            coefficient: FrictionCoefficient::Constant(0.3),
            traction: NormalTraction::Constant(2.0),
        };
        assert_eq!(j_value(&mesh, &dofs, &fric, &DVector::zeros(dofs.n_vector()), 0.0), 0.0);
        // uniform slip on the bottom except at the clamped corners
        let v = dofs.interpolate_vector(&mesh, |_| [0.5, 0.0]);
        let j = j_value(&mesh, &dofs, &fric, &v, 0.0);
        // two corner edges carry a linear ramp, the two middle ones are full speed
        let expected = 0.3 * 2.0 * 0.5 * (0.25 + 0.25 + 0.125 + 0.125);
        assert!((j - expected).abs() < 1e-14, "{j} vs {expected}");
    }
}

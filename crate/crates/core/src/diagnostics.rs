//! Computable counterparts of the a priori estimates: the potential bound
//! and its constant, the weighted Joule integral, the energy quantities of
//! the velocity and temperature estimates, the size of the 4-Laplacian term,
//! and the gap between the two forms of the Joule heat.

use nalgebra::DVector;

use crate::assembly::{self, elements, TRIANGLE_POINTS};
use crate::error::{Error, Result};
use crate::linalg;
use crate::mesh::{self, BoundaryTag, DofMap, Mesh, Point};
use crate::scheme::{Discretization, Models, SolverConfig, SystemState};

/// Discrete norms on the scalar and vector spaces.
pub fn h_norm(disc: &Discretization, theta: &DVector<f64>) -> f64 {
    linalg::quad_form(&disc.scalar_mass, theta).max(0.0).sqrt()
}

pub fn v_norm(disc: &Discretization, theta: &DVector<f64>) -> f64 {
    linalg::quad_form(&disc.laplace, theta).max(0.0).sqrt()
}

pub fn q_norm(disc: &Discretization, v: &DVector<f64>) -> f64 {
    linalg::quad_form(&disc.vector_mass, v).max(0.0).sqrt()
}

pub fn e_norm(disc: &Discretization, v: &DVector<f64>) -> f64 {
    linalg::quad_form(&disc.vector_stiffness, v).max(0.0).sqrt()
}

/// `‖θ‖_U⁴ = ∫|∇θ|⁴`.
pub fn u_norm4(disc: &Discretization, theta: &DVector<f64>) -> f64 {
    assembly::gradient_fourth_power(&disc.mesh, &disc.dofs, theta)
}

/// Both sides of the potential estimate `‖φ‖_V ≤ C` with
/// `C = (M‖φ_b‖_{H¹} + H_N‖φ_b‖_{L²(Γ_N)}‖γ‖ + H̄_C‖φ_b‖_{L²(Γ_C)}‖γ‖) / σ_*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialBound {
    pub lhs: f64,
    pub rhs: f64,
}

impl PotentialBound {
    pub fn holds(&self, rel_tol: f64) -> bool {
        self.lhs <= self.rhs * (1.0 + rel_tol)
    }
}

/// The parts of the potential constant that do not depend on the state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialConstant {
    pub phi_b_h1: f64,
    pub phi_b_neumann: f64,
    pub phi_b_contact: f64,
    /// Norm of the scalar trace onto `Γ_N ∪ Γ_C`.
    pub trace_norm: f64,
    pub sigma_star: f64,
    pub sigma_max: f64,
    pub h_n: f64,
    pub h_c_bar: f64,
}

impl PotentialConstant {
    pub fn new(mesh: &Mesh, dofs: &DofMap, models: &Models) -> Result<Self> {
        let phi_b = assembly::potential_nodes(mesh, &models.boundary);
        let mut h1 = 0.0;
        for el in elements(mesh) {
            let g = el.gradient(&phi_b);
            h1 += el.area * (g[0] * g[0] + g[1] * g[1]);
            h1 += TRIANGLE_POINTS.iter().map(|q| el.value(&phi_b, q).powi(2)).sum::<f64>() * el.area / 3.0;
        }
        let boundary_l2 = |tag: BoundaryTag| {
            let mut s = 0.0;
            for e in mesh.edges_tagged(tag) {
                let w = 0.5 * mesh.edge_length(e);
                for p in assembly::edge_points() {
                    let val = (1.0 - p) * phi_b[e.nodes[0]] + p * phi_b[e.nodes[1]];
                    s += w * val * val;
                }
            }
            s.sqrt()
        };
        let el = &models.material.electric;
        Ok(PotentialConstant {
            phi_b_h1: h1.sqrt(),
            phi_b_neumann: boundary_l2(BoundaryTag::Neumann),
            phi_b_contact: boundary_l2(BoundaryTag::Contact),
            trace_norm: mesh::estimate_scalar_trace_norm(mesh, dofs)?.norm,
            sigma_star: el.lower_bound(),
            sigma_max: el.upper_bound(),
            h_n: models.boundary.current_transfer_n,
            h_c_bar: models.boundary.current_transfer_c.sup(),
        })
    }

    pub fn value(&self) -> f64 {
        (self.sigma_max * self.phi_b_h1
            + self.h_n * self.phi_b_neumann * self.trace_norm
            + self.h_c_bar * self.phi_b_contact * self.trace_norm)
            / self.sigma_star
    }
}

pub fn potential_bound(disc: &Discretization, constant: &PotentialConstant, state: &SystemState) -> PotentialBound {
    PotentialBound {
        lhs: v_norm(disc, &state.phi),
        rhs: constant.value(),
    }
}

/// `∫ σ_el(θ) φ² |∇φ|²` for nodal fields.
pub fn weighted_gradient_integral_nodal(
    mesh: &Mesh,
    sigma: impl Fn(f64) -> f64,
    theta: &[f64],
    phi: &[f64],
) -> f64 {
    let mut total = 0.0;
    for el in elements(mesh) {
        let g = el.gradient(phi);
        let g2 = g[0] * g[0] + g[1] * g[1];
        for q in &TRIANGLE_POINTS {
            let p = el.value(phi, q);
            total += el.area / 3.0 * sigma(el.value(theta, q)) * p * p * g2;
        }
    }
    total
}

pub fn weighted_gradient_integral(disc: &Discretization, models: &Models, state: &SystemState) -> f64 {
    let theta = disc.dofs.expand_scalar(&state.theta);
    let phi = disc.dofs.expand_scalar(&state.phi);
    weighted_gradient_integral_nodal(&disc.mesh, |s| models.material.electric.eval(s), &theta, &phi)
}

/// Largest entry of `|direct − reformulated|` Joule load.
pub fn joule_gap(disc: &Discretization, models: &Models, theta: &DVector<f64>, phi: &DVector<f64>, t: f64) -> f64 {
    let (mesh, dofs) = (&disc.mesh, &disc.dofs);
    let direct = assembly::joule_load_direct(mesh, dofs, &models.material, &models.boundary, theta, phi);
    let reform = assembly::joule_load_reformulated(
        mesh,
        dofs,
        &models.material,
        &models.friction,
        &models.boundary,
        theta,
        phi,
        t,
    );
    (direct - reform).amax()
}

/// Dual norm of a load vector `r` with respect to `w ↦ ‖∇w‖_{L⁴}` on the
/// free nodes. The minimizer `w` of `¼∫|∇w|⁴ − rᵀw` satisfies `F(w) = r`,
/// and the dual norm is `(rᵀw)^{3/4}`.
pub fn dual_norm_w14(disc: &Discretization, r: &DVector<f64>) -> Result<f64> {
    if r.amax() == 0.0 {
        return Ok(0.0);
    }
    let (mesh, dofs) = (&disc.mesh, &disc.dofs);
    let lap = linalg::SpdSolver::new(&disc.laplace)?;
    // best multiple of the Laplace solution as a starting guess
    let w0 = lap.solve(r);
    let scale = (r.dot(&w0) / assembly::gradient_fourth_power(mesh, dofs, &w0)).cbrt();
    let mut w = scale * w0;
    let energy = |w: &DVector<f64>| 0.25 * assembly::gradient_fourth_power(mesh, dofs, w) - r.dot(w);
    let tol = 1e-8 * r.norm();
    let mut previous = f64::INFINITY;
    for _ in 0..200 {
        let (f, jac) = assembly::p_laplacian(mesh, dofs, &w);
        let grad = &f - r;
        let gnorm = grad.norm();
        // Newton converges quadratically, so a stalled residual sits at the rounding floor
        if gnorm <= tol || (gnorm <= 1e-6 * r.norm() && gnorm >= 0.5 * previous) {
            return Ok(r.dot(&w).max(0.0).powf(0.75));
        }
        previous = gnorm;
        // a small multiple of the Laplacian keeps the Hessian definite where ∇w vanishes
        let shift = 1e-12 * linalg::diagonal_max(&jac).max(f64::MIN_POSITIVE);
        let hess = linalg::combine(&[(1.0, &jac), (shift, &disc.laplace)]);
        let step = linalg::solve_symmetric(&hess, &(-&grad))?;
        if step.norm() <= 1e-12 * w.norm() {
            // stagnated at rounding level
            return Ok(r.dot(&w).max(0.0).powf(0.75));
        }
        let e0 = energy(&w);
        let slope = grad.dot(&step);
        let mut alpha = 1.0;
        let mut trial = &w + &step;
        let mut accepted = false;
        for _ in 0..40 {
            if energy(&trial) <= e0 + 1e-4 * alpha * slope {
                accepted = true;
                break;
            }
            alpha *= 0.5;
            trial = &w + alpha * &step;
        }
        if !accepted {
            // the energy no longer decreases in floating point: w is a minimizer to rounding
            if grad.norm() <= 1e-6 * r.norm() {
                return Ok(r.dot(&w).max(0.0).powf(0.75));
            }
            break;
        }
        w = trial;
    }
    let (f, _) = assembly::p_laplacian(mesh, dofs, &w);
    Err(Error::Newton {
        solve: "dual norm",
        iterations: 200,
        residual: (f - r).norm(),
    })
}

/// Lower bound of the same dual norm from single basis functions:
/// `max_i |r_i| / ‖∇N_i‖_{L⁴}`.
pub fn dual_norm_surrogate(disc: &Discretization, r: &DVector<f64>) -> f64 {
    let mut norm4 = vec![0.0; disc.dofs.n_scalar()];
    for el in elements(&disc.mesh) {
        for a in 0..3 {
            if let Some(i) = disc.dofs.scalar_dof(el.nodes[a]) {
                let g = el.grads[a];
                norm4[i] += el.area * (g[0] * g[0] + g[1] * g[1]).powi(2);
            }
        }
    }
    r.iter()
        .zip(&norm4)
        .map(|(ri, n)| ri.abs() / n.powf(0.25))
        .fold(0.0, f64::max)
}

/// Size of the regularizing term `h F θ` for one temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRegularizer {
    pub dual: f64,
    pub surrogate: f64,
}

pub fn regularizer_magnitude(disc: &Discretization, theta: &DVector<f64>, h: f64) -> Result<StepRegularizer> {
    let (f, _) = assembly::p_laplacian(&disc.mesh, &disc.dofs, theta);
    let r = h * f;
    Ok(StepRegularizer {
        dual: dual_norm_w14(disc, &r)?,
        surrogate: dual_norm_surrogate(disc, &r),
    })
}

/// Size of `h F θ` over a whole run: the majorant
/// `h^{1/4} (h Σ dt ∫|∇θ|⁴)^{3/4}` and the `L^{4/3}`-in-time sums of the
/// per-step dual estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizerMagnitude {
    pub majorant: f64,
    pub dual: f64,
    pub surrogate: f64,
}

pub fn regularizer_magnitude_trajectory(
    disc: &Discretization,
    trajectory: &[SystemState],
    config: &SolverConfig,
) -> Result<RegularizerMagnitude> {
    let h = config.regularizer_coefficient();
    let dt = config.dt;
    let (mut u4, mut dual, mut surrogate) = (0.0, 0.0, 0.0);
    for s in trajectory.iter().skip(1) {
        u4 += dt * u_norm4(disc, &s.theta);
        let step = regularizer_magnitude(disc, &s.theta, h)?;
        dual += dt * step.dual.powf(4.0 / 3.0);
        surrogate += dt * step.surrogate.powf(4.0 / 3.0);
    }
    Ok(RegularizerMagnitude {
        majorant: h.powf(0.25) * (h * u4).powf(0.75),
        dual: dual.powf(0.75),
        surrogate: surrogate.powf(0.75),
    })
}

/// Left-hand sides of the velocity and temperature estimates at one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRow {
    pub step: usize,
    pub t: f64,
    /// `‖v‖²_Q`.
    pub kinetic: f64,
    /// `Σ dt ‖v‖²_E`.
    pub dissipation: f64,
    /// `‖u‖²_E`.
    pub elastic: f64,
    pub mechanical_lhs: f64,
    /// `‖θ‖²_H`.
    pub theta_h2: f64,
    /// `Σ dt ‖θ‖²_V`.
    pub theta_v_integral: f64,
    /// `h Σ dt ‖θ‖⁴_U`.
    pub theta_u4_integral: f64,
    pub thermal_lhs: f64,
}

/// Running sums over a trajectory; each step adds the value at the end of
/// its cell, matching backward Euler.
pub struct EnergyAccumulator<'a> {
    disc: &'a Discretization,
    dt: f64,
    h: f64,
    dissipation: f64,
    theta_v: f64,
    theta_u4: f64,
}

impl<'a> EnergyAccumulator<'a> {
    pub fn new(disc: &'a Discretization, dt: f64, regularizer: f64) -> Self {
        EnergyAccumulator {
            disc,
            dt,
            h: regularizer,
            dissipation: 0.0,
            theta_v: 0.0,
            theta_u4: 0.0,
        }
    }

    pub fn push(&mut self, s: &SystemState) -> EnergyRow {
        let d = self.disc;
        if s.step > 0 {
            self.dissipation += self.dt * e_norm(d, &s.v).powi(2);
            self.theta_v += self.dt * v_norm(d, &s.theta).powi(2);
            self.theta_u4 += self.h * self.dt * u_norm4(d, &s.theta);
        }
        let kinetic = q_norm(d, &s.v).powi(2);
        let elastic = e_norm(d, &s.u).powi(2);
        let theta_h2 = h_norm(d, &s.theta).powi(2);
        EnergyRow {
            step: s.step,
            t: s.t,
            kinetic,
            dissipation: self.dissipation,
            elastic,
            mechanical_lhs: kinetic + self.dissipation + elastic,
            theta_h2,
            theta_v_integral: self.theta_v,
            theta_u4_integral: self.theta_u4,
            thermal_lhs: theta_h2 + self.theta_v + self.theta_u4,
        }
    }
}

/// All per-step diagnostics, one CSV row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRow {
    pub energy: EnergyRow,
    pub phi_v: f64,
    pub potential_constant: f64,
    pub weighted_joule: f64,
    pub regularizer_dual: f64,
    pub regularizer_surrogate: f64,
    pub joule_gap: f64,
    pub xi_max: f64,
    pub xi_bound: f64,
    pub min_heat_load: f64,
}

impl DiagnosticsRow {
    pub const HEADER: &'static str = "level,step,t,phi_v,potential_constant,weighted_joule,kinetic,dissipation,elastic,mechanical_lhs,theta_h2,theta_v_integral,theta_u4_integral,thermal_lhs,regularizer_dual,regularizer_surrogate,joule_gap,xi_max,xi_bound,min_heat_load";

    pub fn csv(&self, level: f64) -> String {
        let e = &self.energy;
        format!(
            "{level:e},{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            e.step,
            e.t,
            self.phi_v,
            self.potential_constant,
            self.weighted_joule,
            e.kinetic,
            e.dissipation,
            e.elastic,
            e.mechanical_lhs,
            e.theta_h2,
            e.theta_v_integral,
            e.theta_u4_integral,
            e.thermal_lhs,
            self.regularizer_dual,
            self.regularizer_surrogate,
            self.joule_gap,
            self.xi_max,
            self.xi_bound,
            self.min_heat_load,
        )
    }
}

/// An invariant that failed at some step.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub step: usize,
    pub t: f64,
    pub what: String,
}

/// Streams states through every diagnostic and collects violations of the
/// invariants that must hold at each accepted step.
pub struct DiagnosticsAccumulator<'a> {
    disc: &'a Discretization,
    models: &'a Models,
    regularizer: f64,
    constant: PotentialConstant,
    energy: EnergyAccumulator<'a>,
    pub violations: Vec<Violation>,
}

impl<'a> DiagnosticsAccumulator<'a> {
    pub fn new(disc: &'a Discretization, models: &'a Models, config: &SolverConfig) -> Result<Self> {
        Ok(DiagnosticsAccumulator {
            disc,
            models,
            regularizer: config.regularizer_coefficient(),
            constant: PotentialConstant::new(&disc.mesh, &disc.dofs, models)?,
            energy: EnergyAccumulator::new(disc, config.dt, config.regularizer_coefficient()),
            violations: Vec::new(),
        })
    }

    pub fn potential_constant(&self) -> &PotentialConstant {
        &self.constant
    }

    pub fn push(&mut self, s: &SystemState) -> Result<DiagnosticsRow> {
        let (d, m) = (self.disc, self.models);
        let bound = potential_bound(d, &self.constant, s);
        let reg = regularizer_magnitude(d, &s.theta, self.regularizer)?;
        let xi_max = s.xi.iter().map(|x| x[0].hypot(x[1])).fold(0.0, f64::max);
        let xi_bound = m.friction.mu_bar() * m.friction.f_bar();
        let joule = assembly::joule_load_direct(&d.mesh, &d.dofs, &m.material, &m.boundary, &s.theta, &s.phi);
        let frictional = assembly::frictional_heat_load(&d.mesh, &d.dofs, &m.friction, &s.v, s.t);
        let min_heat_load = joule.iter().chain(frictional.iter()).copied().fold(f64::INFINITY, f64::min);
        let mut flag = |what: String| {
            self.violations.push(Violation { step: s.step, t: s.t, what });
        };
        if !bound.holds(1e-8) {
            flag(format!("potential bound: ‖φ‖_V = {:e} > C = {:e}", bound.lhs, bound.rhs));
        }
        if xi_max > xi_bound * (1.0 + 1e-10) {
            flag(format!("friction bound: |ξ| = {xi_max:e} > μ̄F̄ = {xi_bound:e}"));
        }
        if min_heat_load < -1e-14 {
            flag(format!("negative heat source entry {min_heat_load:e}"));
        }
        if !s.is_finite() {
            flag("non-finite field".to_string());
        }
        Ok(DiagnosticsRow {
            energy: self.energy.push(s),
            phi_v: bound.lhs,
            potential_constant: bound.rhs,
            weighted_joule: weighted_gradient_integral(d, m, s),
            regularizer_dual: reg.dual,
            regularizer_surrogate: reg.surrogate,
            joule_gap: joule_gap(d, m, &s.theta, &s.phi, s.t),
            xi_max,
            xi_bound,
            min_heat_load: if min_heat_load.is_finite() { min_heat_load } else { 0.0 },
        })
    }
}

/// Six-point rule exact for quadratics and beyond:
/// `(barycentric point, weight relative to area)`.
const DUNAVANT4: [([f64; 3], f64); 6] = [
    ([0.108103018168070, 0.445948490915965, 0.445948490915965], 0.223381589678011),
    ([0.445948490915965, 0.108103018168070, 0.445948490915965], 0.223381589678011),
    ([0.445948490915965, 0.445948490915965, 0.108103018168070], 0.223381589678011),
    ([0.816847572980459, 0.091576213509771, 0.091576213509771], 0.109951743655322),
    ([0.091576213509771, 0.816847572980459, 0.091576213509771], 0.109951743655322),
    ([0.091576213509771, 0.091576213509771, 0.816847572980459], 0.109951743655322),
];

/// `L²` and gradient errors of a nodal P1 field against a smooth function.
pub fn p1_errors(
    mesh: &Mesh,
    nodal: &[f64],
    exact: impl Fn(Point) -> f64,
    exact_gradient: impl Fn(Point) -> Point,
) -> (f64, f64) {
    let (mut l2, mut h1) = (0.0, 0.0);
    for el in elements(mesh) {
        let g = el.gradient(nodal);
        for (q, w) in &DUNAVANT4 {
            let x = el.point(q);
            let e = el.value(nodal, q) - exact(x);
            let ge = exact_gradient(x);
            l2 += w * el.area * e * e;
            h1 += w * el.area * ((g[0] - ge[0]).powi(2) + (g[1] - ge[1]).powi(2));
        }
    }
    (l2.sqrt(), h1.sqrt())
}

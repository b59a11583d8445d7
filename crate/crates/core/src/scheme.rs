//! The time-retarded staggered scheme.
//!
//! Each grid step solves, in order, the heat equation with delayed
//! coefficients and sources, the electric problem at the new temperature, and
//! the momentum inclusion with the delayed temperature. Delayed lookups read
//! the state `k = h/dt` steps back, or the initial state during the first
//! slab.

use std::collections::VecDeque;

use nalgebra::DVector;

use crate::assembly;
use crate::diagnostics::{self, EnergyAccumulator, EnergyRow, RegularizerMagnitude};
use crate::error::{Error, Result};
use crate::friction::{self, MomentumProblem, NewtonOptions, RegularizedFriction};
use crate::linalg::{self, SparseMatrix};
use crate::materials::{default_ptc_model, BoundaryData, FrictionModel, MaterialModel};
use crate::mesh::{DofMap, Mesh, Point};

/// The three model components, bundled.
#[derive(Clone)]
pub struct Models {
    pub material: MaterialModel,
    pub friction: FrictionModel,
    pub boundary: BoundaryData,
}

impl Models {
    pub fn default_ptc() -> Self {
        let (material, friction, boundary) = default_ptc_model();
        Models {
            material,
            friction,
            boundary,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JouleMode {
    Direct,
    Reformulated,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Final time `T`.
    pub horizon: f64,
    /// Delay `h`.
    pub delay: f64,
    pub dt: f64,
    /// Friction smoothing length.
    pub epsilon: f64,
    pub temperature_newton: NewtonOptions,
    pub momentum_newton: NewtonOptions,
    pub joule_mode: JouleMode,
    /// Coefficient of the 4-Laplacian; `None` ties it to the delay.
    pub regularizer: Option<f64>,
    pub cascade_levels: Vec<f64>,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            horizon: 0.5,
            delay: 0.05,
            dt: 0.0125,
            epsilon: friction::DEFAULT_EPSILON,
            temperature_newton: NewtonOptions::default(),
            momentum_newton: NewtonOptions::default(),
            joule_mode: JouleMode::Direct,
            regularizer: None,
            cascade_levels: Vec::new(),
            seed: 0,
        }
    }
}

/// `x / dt` when it is an integer up to rounding.
fn grid_multiple(x: f64, dt: f64) -> Option<usize> {
    let k = (x / dt).round();
    ((k * dt - x).abs() <= 1e-9 * x.abs().max(dt)).then_some(k as usize)
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let (t, h, dt) = (self.horizon, self.delay, self.dt);
        if !(dt > 0.0 && dt <= h && h < t) || ![t, h, dt].iter().all(|x| x.is_finite()) {
            return Err(Error::Config(format!(
                "need 0 < dt <= h < T, got dt = {dt}, h = {h}, T = {t}"
            )));
        }
        if grid_multiple(h, dt).is_none() {
            return Err(Error::Config(format!("delay h = {h} is not an integer multiple of dt = {dt}")));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Config(format!("friction regularization must be positive, got {}", self.epsilon)));
        }
        for (name, o) in [("temperature", &self.temperature_newton), ("momentum", &self.momentum_newton)] {
            if !(o.tolerance > 0.0) || o.max_iterations == 0 {
                return Err(Error::Config(format!("{name} Newton settings must be positive")));
            }
        }
        if let Some(r) = self.regularizer {
            if !(r >= 0.0) {
                return Err(Error::Config(format!("regularizer coefficient must be nonnegative, got {r}")));
            }
        }
        if self.cascade_levels.windows(2).any(|w| !(w[0] > w[1])) {
            return Err(Error::Config("cascade levels must be strictly decreasing".into()));
        }
        for &level in &self.cascade_levels {
            if !(level >= dt && level < t) || grid_multiple(level, dt).is_none() {
                return Err(Error::Config(format!(
                    "cascade level {level} must be a multiple of dt = {dt} below T = {t}"
                )));
            }
        }
        Ok(())
    }

    pub fn delay_steps(&self) -> usize {
        grid_multiple(self.delay, self.dt).unwrap_or(0).max(1)
    }

    /// Number of grid steps with `t_n ≤ T`.
    pub fn steps(&self) -> usize {
        (self.horizon / self.dt * (1.0 + 1e-12)).floor() as usize
    }

    pub fn regularizer_coefficient(&self) -> f64 {
        self.regularizer.unwrap_or(self.delay)
    }

    pub fn time(&self, step: usize) -> f64 {
        step as f64 * self.dt
    }

    pub fn with_delay(&self, delay: f64) -> SolverConfig {
        SolverConfig {
            delay,
            ..self.clone()
        }
    }
}

/// Fields at one grid time. `phi` is the shifted potential `φ_total − φ_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    pub step: usize,
    pub t: f64,
    pub theta: DVector<f64>,
    pub phi: DVector<f64>,
    pub u: DVector<f64>,
    pub v: DVector<f64>,
    /// Friction traction at each contact node.
    pub xi: Vec<Point>,
}

impl SystemState {
    pub fn is_finite(&self) -> bool {
        [&self.theta, &self.phi, &self.u, &self.v]
            .iter()
            .all(|f| f.iter().all(|x| x.is_finite()))
            && self.xi.iter().flatten().all(|x| x.is_finite())
    }
}

/// The last `k + 1` states together with the initial one.
#[derive(Debug, Clone)]
pub struct DelayBuffer {
    initial: SystemState,
    recent: VecDeque<SystemState>,
    delay_steps: usize,
    dt: f64,
}

impl DelayBuffer {
    pub fn new(initial: SystemState, delay_steps: usize, dt: f64) -> Self {
        let mut recent = VecDeque::with_capacity(delay_steps + 2);
        recent.push_back(initial.clone());
        DelayBuffer {
            initial,
            recent,
            delay_steps: delay_steps.max(1),
            dt,
        }
    }

    pub fn delay_steps(&self) -> usize {
        self.delay_steps
    }

    pub fn initial(&self) -> &SystemState {
        &self.initial
    }

    pub fn latest(&self) -> &SystemState {
        self.recent.back().expect("buffer is never empty")
    }

    pub fn push(&mut self, state: SystemState) {
        self.recent.push_back(state);
        while self.recent.len() > self.delay_steps + 1 {
            self.recent.pop_front();
        }
    }

    /// The delayed state seen at grid step `step`: the initial state while
    /// `step ≤ k`, otherwise the state `k` steps back. Valid up to one step
    /// past the latest stored state.
    pub fn delayed(&self, step: usize) -> Result<&SystemState> {
        let latest = self.latest().step;
        if step > latest + 1 {
            return Err(Error::DelayOutOfRange { step, latest });
        }
        if step <= self.delay_steps {
            return Ok(&self.initial);
        }
        let target = step - self.delay_steps;
        self.recent
            .iter()
            .find(|s| s.step == target)
            .ok_or(Error::DelayOutOfRange { step, latest })
    }

    /// [`Self::delayed`] addressed by a grid time.
    pub fn delayed_at(&self, t: f64) -> Result<&SystemState> {
        let step = grid_multiple(t, self.dt).ok_or_else(|| Error::Config(format!("t = {t} is not a grid time")))?;
        self.delayed(step)
    }
}

/// Left and right sides of the discrete delay inequality
/// `Σ dt |g_h(t_i)|² ≤ h |g(0)|² + Σ dt |g(t_i)|²` for squared norms
/// `history[i] = |g(t_i)|²`, `i = 0..=N`, with sums over `i = 1..=N`.
pub fn delay_inequality(history: &[f64], delay_steps: usize, dt: f64) -> (f64, f64) {
    let k = delay_steps;
    let h = k as f64 * dt;
    let mut lhs = 0.0;
    let mut rhs = h * history.first().copied().unwrap_or(0.0);
    for i in 1..history.len() {
        let delayed = if i <= k { history[0] } else { history[i - k] };
        lhs += dt * delayed;
        rhs += dt * history[i];
    }
    (lhs, rhs)
}

/// Mesh, degree-of-freedom map and every constant operator.
pub struct Discretization {
    pub mesh: Mesh,
    pub dofs: DofMap,
    pub scalar_mass: SparseMatrix,
    pub laplace: SparseMatrix,
    pub vector_mass: SparseMatrix,
    pub vector_stiffness: SparseMatrix,
    /// `A_d`.
    pub viscosity: SparseMatrix,
    /// `B_d`.
    pub elasticity: SparseMatrix,
    /// `C` with `L_d θ = C θ`, `G(v) = θ_ref Cᵀ v`.
    pub coupling: SparseMatrix,
    pub coupling_t: SparseMatrix,
}

impl Discretization {
    pub fn new(mesh: Mesh, material: &MaterialModel) -> Self {
        let dofs = DofMap::new(&mesh);
        let coupling = assembly::thermal_coupling_matrix(&mesh, &dofs, material);
        Discretization {
            scalar_mass: assembly::scalar_mass(&mesh, &dofs),
            laplace: assembly::laplace_stiffness(&mesh, &dofs),
            vector_mass: assembly::vector_mass(&mesh, &dofs),
            vector_stiffness: assembly::vector_stiffness(&mesh, &dofs),
            viscosity: assembly::elastic_stiffness(&mesh, &dofs, &material.viscosity),
            elasticity: assembly::elastic_stiffness(&mesh, &dofs, &material.elasticity),
            coupling_t: coupling.transpose(),
            coupling,
            dofs,
            mesh,
        }
    }
}

/// Temperature and potential of the step in progress, exposed to hooks
/// between the electric and the momentum solve.
#[derive(Debug, Clone)]
pub struct StagedFields {
    pub theta: DVector<f64>,
    pub phi: DVector<f64>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StepStats {
    pub temperature_iterations: usize,
    pub temperature_residual: f64,
    pub momentum_iterations: usize,
    pub momentum_residual: f64,
    pub electric_residual: f64,
}

pub struct Simulation {
    pub disc: Discretization,
    pub models: Models,
    pub config: SolverConfig,
    friction: RegularizedFriction,
    buffer: DelayBuffer,
    last_stats: StepStats,
}

impl Simulation {
    /// Solves for `φ(0)` at `θ₀` and seeds the delay buffer.
    pub fn initialize(
        mesh: Mesh,
        models: Models,
        config: SolverConfig,
        u0: impl Fn(Point) -> Point,
        v0: impl Fn(Point) -> Point,
        theta0: impl Fn(Point) -> f64,
    ) -> Result<Simulation> {
        config.validate()?;
        let disc = Discretization::new(mesh, &models.material);
        let friction = RegularizedFriction::new(models.friction.clone(), config.epsilon)?;
        let (mesh, dofs) = (&disc.mesh, &disc.dofs);
        let theta = dofs.interpolate_scalar(mesh, theta0);
        let u = dofs.interpolate_vector(mesh, u0);
        let v = dofs.interpolate_vector(mesh, v0);
        let (phi, electric_residual) = solve_electric(&disc, &models, &theta, 0.0)?;
        let xi = friction.nodal_tractions(mesh, dofs, &v, 0.0);
        let initial = SystemState {
            step: 0,
            t: 0.0,
            theta,
            phi,
            u,
            v,
            xi,
        };
        let buffer = DelayBuffer::new(initial, config.delay_steps(), config.dt);
        Ok(Simulation {
            disc,
            models,
            config,
            friction,
            buffer,
            last_stats: StepStats {
                electric_residual,
                ..StepStats::default()
            },
        })
    }

    /// Zero initial data.
    pub fn initialize_at_rest(mesh: Mesh, models: Models, config: SolverConfig) -> Result<Simulation> {
        Simulation::initialize(mesh, models, config, |_| [0.0, 0.0], |_| [0.0, 0.0], |_| 0.0)
    }

    pub fn buffer(&self) -> &DelayBuffer {
        &self.buffer
    }

    pub fn current(&self) -> &SystemState {
        self.buffer.latest()
    }

    pub fn last_stats(&self) -> StepStats {
        self.last_stats
    }

    pub fn friction(&self) -> &RegularizedFriction {
        &self.friction
    }

    pub fn finished(&self) -> bool {
        self.current().step >= self.config.steps()
    }

    /// Backward Euler step of the heat equation at grid step `step`, with
    /// conductivity, Joule heat, coupling heat and frictional heat all taken
    /// from the delayed state.
    pub fn solve_temperature_step(&self, step: usize) -> Result<(DVector<f64>, usize, f64)> {
        let disc = &self.disc;
        let (mesh, dofs) = (&disc.mesh, &disc.dofs);
        let m = &self.models;
        let prev = self.buffer.latest();
        let del = self.buffer.delayed(step)?;
        let (dt, t) = (self.config.dt, self.config.time(step));
        let c = m.material.mass_thermal() / dt;
        let conduction = assembly::thermal_stiffness(mesh, dofs, &m.material.thermal, &del.theta);
        let robin = assembly::thermal_robin(mesh, dofs, &m.boundary, &m.friction, t);
        let linear = linalg::combine(&[(c, &disc.scalar_mass), (1.0, &conduction), (1.0, &robin)]);
        let joule = match self.config.joule_mode {
            JouleMode::Direct => assembly::joule_load_direct(mesh, dofs, &m.material, &m.boundary, &del.theta, &del.phi),
            JouleMode::Reformulated => assembly::joule_load_reformulated(
                mesh,
                dofs,
                &m.material,
                &m.friction,
                &m.boundary,
                &del.theta,
                &del.phi,
                del.t,
            ),
        };
        let heat = m.material.theta_ref * linalg::matvec(&disc.coupling_t, &del.v);
        let frictional = assembly::frictional_heat_load(mesh, dofs, &m.friction, &del.v, t);
        let rhs = c * linalg::matvec(&disc.scalar_mass, &prev.theta) + joule + heat + frictional;
        let reg = self.config.regularizer_coefficient();
        temperature_newton(mesh, dofs, &linear, &rhs, reg, &prev.theta, &self.config.temperature_newton)
    }

    /// Advances one grid step; `hook` may inspect or alter the new
    /// temperature and potential before the momentum solve.
    pub fn step_with(&mut self, hook: impl FnOnce(&mut StagedFields)) -> Result<&SystemState> {
        let step = self.current().step + 1;
        let t = self.config.time(step);
        self.try_step(step, hook).map_err(|e| e.at_time(t))?;
        Ok(self.current())
    }

    pub fn step(&mut self) -> Result<&SystemState> {
        self.step_with(|_| {})
    }

    fn try_step(&mut self, step: usize, hook: impl FnOnce(&mut StagedFields)) -> Result<()> {
        let t = self.config.time(step);
        let (theta, t_iter, t_res) = self.solve_temperature_step(step)?;
        let (phi, e_res) = solve_electric(&self.disc, &self.models, &theta, t)?;
        let mut staged = StagedFields { theta, phi };
        hook(&mut staged);

        let disc = &self.disc;
        let prev = self.buffer.latest();
        let del = self.buffer.delayed(step)?;
        let thermal_load = linalg::matvec(&disc.coupling, &del.theta);
        let load = assembly::mech_load(&disc.mesh, &disc.dofs, &self.models.boundary, &self.models.friction, t);
        let problem = MomentumProblem {
            mesh: &disc.mesh,
            dofs: &disc.dofs,
            mass: &disc.vector_mass,
            viscosity: &disc.viscosity,
            elasticity: &disc.elasticity,
            friction: &self.friction,
            mass_coefficient: self.models.material.mass_mech(),
            dt: self.config.dt,
            t,
            u_prev: &prev.u,
            v_prev: &prev.v,
            thermal_load: &thermal_load,
            load: &load,
        };
        let mech = problem.solve(&self.config.momentum_newton)?;
        let state = SystemState {
            step,
            t,
            theta: staged.theta,
            phi: staged.phi,
            u: mech.u,
            v: mech.v,
            xi: mech.xi,
        };
        if !state.is_finite() {
            return Err(Error::Solver("non-finite field after step".into()));
        }
        self.last_stats = StepStats {
            temperature_iterations: t_iter,
            temperature_residual: t_res,
            momentum_iterations: mech.iterations,
            momentum_residual: mech.residual,
            electric_residual: e_res,
        };
        self.buffer.push(state);
        Ok(())
    }

    /// Runs to the horizon, handing every state (the initial one first) to
    /// `observer`.
    pub fn advance(&mut self, mut observer: impl FnMut(&Simulation, &SystemState) -> Result<()>) -> Result<()> {
        if self.current().step == 0 {
            observer(self, self.current())?;
        }
        while !self.finished() {
            self.step()?;
            observer(self, self.current())?;
        }
        Ok(())
    }

    /// Runs to the horizon and returns the whole trajectory.
    pub fn run(&mut self) -> Result<Vec<SystemState>> {
        let mut out = Vec::with_capacity(self.config.steps() + 1);
        self.advance(|_, s| {
            out.push(s.clone());
            Ok(())
        })?;
        Ok(out)
    }
}

/// Newton on `linear θ + reg F(θ) = rhs`, started from `start`.
fn temperature_newton(
    mesh: &Mesh,
    dofs: &DofMap,
    linear: &SparseMatrix,
    rhs: &DVector<f64>,
    reg: f64,
    start: &DVector<f64>,
    opts: &NewtonOptions,
) -> Result<(DVector<f64>, usize, f64)> {
    let residual = |theta: &DVector<f64>| -> (DVector<f64>, Option<SparseMatrix>) {
        let mut r = linalg::matvec(linear, theta) - rhs;
        if reg == 0.0 {
            return (r, None);
        }
        let (f, jac) = assembly::p_laplacian(mesh, dofs, theta);
        r += reg * f;
        (r, Some(jac))
    };
    let threshold = opts.tolerance * (1.0 + rhs.norm());
    let mut theta = start.clone();
    let (mut r, mut jac) = residual(&theta);
    let mut norm = r.norm();
    let mut iterations = 0;
    while norm > threshold {
        if iterations == opts.max_iterations || !norm.is_finite() {
            return Err(Error::Newton {
                solve: "temperature step",
                iterations,
                residual: norm,
            });
        }
        iterations += 1;
        let full = match &jac {
            Some(j) => linalg::combine(&[(1.0, linear), (reg, j)]),
            None => linear.clone(),
        };
        let delta = linalg::solve_symmetric(&full, &(-&r))?;
        let mut alpha = 1.0;
        let mut trial = &theta + &delta;
        let mut evaluated = residual(&trial);
        for _ in 0..opts.max_halvings {
            if evaluated.0.norm() < norm {
                break;
            }
            alpha *= 0.5;
            trial = &theta + alpha * &delta;
            evaluated = residual(&trial);
        }
        theta = trial;
        (r, jac) = evaluated;
        norm = r.norm();
    }
    Ok((theta, iterations, norm))
}

/// Solves the electric problem at temperature `theta`; returns the shifted
/// potential and the relative residual.
pub fn solve_electric(disc: &Discretization, models: &Models, theta: &DVector<f64>, t: f64) -> Result<(DVector<f64>, f64)> {
    let sys = assembly::electric_system(
        &disc.mesh,
        &disc.dofs,
        &models.material,
        &models.friction,
        &models.boundary,
        theta,
        t,
    );
    let load = sys.load.expect("electric system carries a load");
    let phi = linalg::SpdSolver::new(&sys.matrix)?.solve(&load);
    let res = (linalg::matvec(&sys.matrix, &phi) - &load).norm() / load.norm().max(f64::MIN_POSITIVE);
    if !phi.iter().all(|x| x.is_finite()) {
        return Err(Error::Solver("electric solve produced non-finite values".into()));
    }
    Ok((phi, res))
}

/// Per-level outcome of a cascade.
#[derive(Debug, Clone)]
pub struct CascadeLevel {
    pub delay: f64,
    pub trajectory: Vec<SystemState>,
    pub energy: Vec<EnergyRow>,
    pub regularizer: RegularizerMagnitude,
}

impl CascadeLevel {
    /// Largest value over time of the velocity and temperature energies.
    pub fn energy_maxima(&self) -> (f64, f64) {
        self.energy.iter().fold((0.0, 0.0), |(a, b), r| (a.max(r.mechanical_lhs), b.max(r.thermal_lhs)))
    }
}

/// Differences between consecutive levels in `L²(0,T;H)`, `L²(0,T;V)` and
/// `L²(0,T;E)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchyRow {
    pub coarse: f64,
    pub fine: f64,
    pub theta: f64,
    pub phi: f64,
    pub v: f64,
}

#[derive(Debug, Clone)]
pub struct CascadeReport {
    pub levels: Vec<CascadeLevel>,
    pub cauchy: Vec<CauchyRow>,
}

/// Solves the problem once per delay in `config.cascade_levels` at the
/// shared step `config.dt` and compares consecutive levels.
pub fn run_cascade(mesh: &Mesh, models: &Models, config: &SolverConfig) -> Result<CascadeReport> {
    config.validate()?;
    let mut levels = Vec::with_capacity(config.cascade_levels.len());
    for &delay in &config.cascade_levels {
        let cfg = config.with_delay(delay);
        let mut sim = Simulation::initialize_at_rest(mesh.clone(), models.clone(), cfg.clone())?;
        let trajectory = sim.run()?;
        let mut acc = EnergyAccumulator::new(&sim.disc, cfg.dt, cfg.regularizer_coefficient());
        let energy: Vec<EnergyRow> = trajectory.iter().map(|s| acc.push(s)).collect();
        let regularizer = diagnostics::regularizer_magnitude_trajectory(&sim.disc, &trajectory, &cfg)?;
        levels.push(CascadeLevel {
            delay,
            trajectory,
            energy,
            regularizer,
        });
    }
    let disc = Discretization::new(mesh.clone(), &models.material);
    let cauchy = levels
        .windows(2)
        .map(|w| cauchy_row(&disc, &w[0], &w[1], config.dt))
        .collect();
    Ok(CascadeReport { levels, cauchy })
}

fn cauchy_row(disc: &Discretization, a: &CascadeLevel, b: &CascadeLevel, dt: f64) -> CauchyRow {
    let mut sums = [0.0; 3];
    for (x, y) in a.trajectory.iter().zip(&b.trajectory).skip(1) {
        sums[0] += dt * linalg::quad_form(&disc.scalar_mass, &(&x.theta - &y.theta));
        sums[1] += dt * linalg::quad_form(&disc.laplace, &(&x.phi - &y.phi));
        sums[2] += dt * linalg::quad_form(&disc.vector_stiffness, &(&x.v - &y.v));
    }
    CauchyRow {
        coarse: a.delay,
        fine: b.delay,
        theta: sums[0].sqrt(),
        phi: sums[1].sqrt(),
        v: sums[2].sqrt(),
    }
}

//! Configuration files, scenario execution and CSV output behind the command
//! line tool.
//!
//! A configuration is a TOML file with the tables `[mesh]`, `[material]`,
//! `[friction]`, `[boundary]`, `[initial]`, `[solver]`, `[validation]` and
//! `[output]`. Every key has a default, so an empty file describes the
//! reference scenario. Unknown keys are rejected.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diagnostics::{DiagnosticsAccumulator, DiagnosticsRow};
use crate::error::{Error, Result};
use crate::friction::NewtonOptions;
use crate::materials::{
    validate_assumptions, ElasticTensor, ElectricConductivity, ExchangeLaw, FrictionCoefficient, FrictionModel,
    MaterialModel, NormalTraction, ThermalConductivity, ValidationOptions, ValidationReport,
};
use crate::mesh::{estimate_scalar_trace_norm, estimate_trace_norm, Mesh, Point, SideTags, TraceNorm};
use crate::scheme::{run_cascade, CascadeReport, Discretization, JouleMode, Models, Simulation, SolverConfig, SystemState};

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const CONFIG: u8 = 2;
    pub const SOLVER: u8 = 3;
    pub const VIOLATION: u8 = 4;
}

/// Exit code for a failed command.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::MeshParse { .. }
        | Error::EmptyDirichlet
        | Error::Orientation(_)
        | Error::InvalidMesh(_)
        | Error::EmptyContact
        | Error::Config(_)
        | Error::Io(_) => exit::CONFIG,
        Error::PowerIteration { .. }
        | Error::Solver(_)
        | Error::Newton { .. }
        | Error::DelayOutOfRange { .. }
        | Error::Step { .. } => exit::SOLVER,
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshSection {
    /// Cells per side of the built-in unit square.
    pub n: usize,
    /// Mesh file, relative to the configuration file; overrides `n`.
    pub file: Option<PathBuf>,
}

impl Default for MeshSection {
    fn default() -> Self {
        MeshSection { n: 8, file: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ElectricLaw {
    Ptc,
    /// `σ ≡ sigma_star`.
    Constant,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialSection {
    pub rho: f64,
    pub c_p: f64,
    pub theta_ref: f64,
    pub delta: f64,
    pub viscosity_lambda: f64,
    pub viscosity_mu: f64,
    pub elasticity_lambda: f64,
    pub elasticity_mu: f64,
    /// Isotropic thermal expansion `m = expansion · I`.
    pub expansion: f64,
    /// Conductivity `k(s) = (k_base + k_amplitude s²/(1+s²)) I`.
    pub k_base: f64,
    pub k_amplitude: f64,
    pub electric: ElectricLaw,
    pub sigma_star: f64,
    pub sigma_max: f64,
    pub steepness: f64,
    pub switch_temperature: f64,
}

impl Default for MaterialSection {
    fn default() -> Self {
        MaterialSection {
            rho: 1.0,
            c_p: 1.0,
            theta_ref: 1.0,
            delta: 1.0,
            viscosity_lambda: 0.5,
            viscosity_mu: 0.5,
            elasticity_lambda: 1.0,
            elasticity_mu: 0.5,
            expansion: 0.05,
            k_base: 1.0,
            k_amplitude: 0.1,
            electric: ElectricLaw::Ptc,
            sigma_star: 0.1,
            sigma_max: 1.0,
            steepness: 2.0,
            switch_temperature: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FrictionLaw {
    SlipWeakening,
    /// `μ ≡ mu_s`.
    Constant,
    /// No tangential traction.
    None,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrictionSection {
    pub law: FrictionLaw,
    pub mu_s: f64,
    pub mu_d: f64,
    pub decay: f64,
    /// Declared one-sided Lipschitz constant, replacing the one derived from
    /// the law.
    pub d_mu: Option<f64>,
    /// Constant normal traction `F`.
    pub traction: f64,
}

impl Default for FrictionSection {
    fn default() -> Self {
        FrictionSection {
            law: FrictionLaw::SlipWeakening,
            mu_s: 0.4,
            mu_d: 0.2,
            decay: 1.0,
            d_mu: None,
            traction: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExchangeKind {
    /// `scale / (1 + F)`.
    Reciprocal,
    Constant,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundarySection {
    pub heat_transfer_n: f64,
    pub current_transfer_n: f64,
    pub contact_exchange: ExchangeKind,
    pub heat_transfer_c: f64,
    pub current_transfer_c: f64,
    /// `φ_b(x) = potential_gradient · x + potential_offset`.
    pub potential_gradient: Point,
    pub potential_offset: f64,
    pub body_force: Point,
    pub surface_traction: Point,
}

impl Default for BoundarySection {
    fn default() -> Self {
        BoundarySection {
            heat_transfer_n: 1.0,
            current_transfer_n: 1.0,
            contact_exchange: ExchangeKind::Reciprocal,
            heat_transfer_c: 1.0,
            current_transfer_c: 1.0,
            potential_gradient: [1.0, 0.0],
            potential_offset: 0.0,
            body_force: [0.0, 0.0],
            surface_traction: [0.1, 0.0],
        }
    }
}

/// Constant initial fields.
#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialSection {
    pub theta: f64,
    pub displacement: Point,
    pub velocity: Point,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JouleForm {
    Direct,
    Reformulated,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub horizon: f64,
    pub delay: f64,
    pub dt: f64,
    pub epsilon: f64,
    /// Coefficient of the 4-Laplacian; defaults to the delay.
    pub regularizer: Option<f64>,
    pub joule: JouleForm,
    pub newton_tolerance: f64,
    pub newton_max_iterations: usize,
    /// Delays of the refinement cascade, strictly decreasing.
    pub cascade_levels: Vec<f64>,
    pub seed: u64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = SolverConfig::default();
        SolverSection {
            horizon: s.horizon,
            delay: s.delay,
            dt: s.dt,
            epsilon: s.epsilon,
            regularizer: s.regularizer,
            joule: JouleForm::Direct,
            newton_tolerance: s.momentum_newton.tolerance,
            newton_max_iterations: s.momentum_newton.max_iterations,
            cascade_levels: s.cascade_levels,
            seed: s.seed,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidationSection {
    pub seed: u64,
    pub samples: usize,
}

impl Default for ValidationSection {
    fn default() -> Self {
        let o = ValidationOptions::default();
        ValidationSection {
            seed: o.seed,
            samples: o.samples,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    /// Output directory, relative to the working directory. Not part of the
    /// configuration hash.
    #[serde(skip_serializing)]
    pub dir: PathBuf,
    /// Write every `stride`-th state to the trajectory file.
    pub stride: usize,
    pub diagnostics: bool,
    /// Fail with exit code 4 on any assumption or invariant violation. Not
    /// part of the configuration hash, since it leaves the output unchanged.
    #[serde(skip_serializing)]
    pub assert: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("out"),
            stride: 1,
            diagnostics: true,
            assert: false,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mesh: MeshSection,
    pub material: MaterialSection,
    pub friction: FrictionSection,
    pub boundary: BoundarySection,
    pub initial: InitialSection,
    pub solver: SolverSection,
    pub validation: ValidationSection,
    pub output: OutputSection,
    /// Directory against which relative mesh paths resolve.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<RunConfig> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = RunConfig::parse(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    /// SHA-256 of the effective configuration in canonical TOML form, so
    /// overrides applied after loading are reflected.
    pub fn hash(&self) -> String {
        let canonical = toml::to_string(self).expect("configuration serializes");
        sha256_hex(canonical.as_bytes())
    }

    fn validate(&self) -> Result<()> {
        if self.mesh.file.is_none() && self.mesh.n == 0 {
            return Err(Error::Config("mesh.n must be positive".into()));
        }
        if self.output.stride == 0 {
            return Err(Error::Config("output.stride must be positive".into()));
        }
        if self.friction.d_mu.is_some_and(|d| !(d >= 0.0)) {
            return Err(Error::Config("friction.d_mu must be nonnegative".into()));
        }
        self.solver_config().validate()
    }

    pub fn mesh(&self) -> Result<Mesh> {
        match &self.mesh.file {
            Some(file) => {
                let path = self.base_dir.join(file);
                if !path.is_file() {
                    return Err(Error::Config(format!("mesh file {} does not exist", path.display())));
                }
                Mesh::load(path)
            }
            None => Mesh::unit_square(self.mesh.n, SideTags::thermistor()),
        }
    }

    pub fn models(&self) -> Models {
        let m = &self.material;
        let material = MaterialModel {
            rho: m.rho,
            c_p: m.c_p,
            theta_ref: m.theta_ref,
            viscosity: ElasticTensor::isotropic(m.viscosity_lambda, m.viscosity_mu),
            elasticity: ElasticTensor::isotropic(m.elasticity_lambda, m.elasticity_mu),
            expansion: [[m.expansion, 0.0], [0.0, m.expansion]],
            thermal: ThermalConductivity::Saturating {
                base: m.k_base,
                amplitude: m.k_amplitude,
            },
            electric: match m.electric {
                ElectricLaw::Ptc => ElectricConductivity::Ptc {
                    sigma_star: m.sigma_star,
                    sigma_max: m.sigma_max,
                    steepness: m.steepness,
                    switch_temperature: m.switch_temperature,
                },
                ElectricLaw::Constant => ElectricConductivity::Constant(m.sigma_star),
            },
            delta: m.delta,
        };

        let f = &self.friction;
        let law = match f.law {
            FrictionLaw::SlipWeakening | FrictionLaw::None => FrictionCoefficient::SlipWeakening {
                static_mu: f.mu_s,
                dynamic_mu: f.mu_d,
                decay: f.decay,
            },
            FrictionLaw::Constant => FrictionCoefficient::Constant(f.mu_s),
        };
        let coefficient = match f.d_mu {
            Some(d_mu) => {
                let (mu_bar, lipschitz) = (law.mu_bar(), law.lipschitz());
                let eval = law.clone();
                FrictionCoefficient::Custom {
                    law: Arc::new(move |s| eval.eval(s)),
                    mu_bar,
                    d_mu,
                    lipschitz,
                }
            }
            None => law,
        };
        let mut friction = FrictionModel {
            coefficient,
            traction: NormalTraction::Constant(f.traction),
        };
        if f.law == FrictionLaw::None {
            friction = friction.frictionless();
        }

        let b = &self.boundary;
        let exchange = |c| match b.contact_exchange {
            ExchangeKind::Reciprocal => ExchangeLaw::Reciprocal { scale: c },
            ExchangeKind::Constant => ExchangeLaw::Constant(c),
        };
        let mut boundary = Models::default_ptc()
            .boundary
            .with_linear_potential(b.potential_gradient, b.potential_offset)
            .with_constant_loads(b.body_force, b.surface_traction);
        boundary.heat_transfer_n = b.heat_transfer_n;
        boundary.current_transfer_n = b.current_transfer_n;
        boundary.heat_transfer_c = exchange(b.heat_transfer_c);
        boundary.current_transfer_c = exchange(b.current_transfer_c);

        Models {
            material,
            friction,
            boundary,
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        let s = &self.solver;
        let newton = NewtonOptions {
            tolerance: s.newton_tolerance,
            max_iterations: s.newton_max_iterations,
            ..NewtonOptions::default()
        };
        SolverConfig {
            horizon: s.horizon,
            delay: s.delay,
            dt: s.dt,
            epsilon: s.epsilon,
            temperature_newton: newton,
            momentum_newton: newton,
            joule_mode: match s.joule {
                JouleForm::Direct => JouleMode::Direct,
                JouleForm::Reformulated => JouleMode::Reformulated,
            },
            regularizer: s.regularizer,
            cascade_levels: s.cascade_levels.clone(),
            seed: s.seed,
        }
    }

    pub fn validation_options(&self) -> ValidationOptions {
        ValidationOptions {
            seed: self.validation.seed,
            samples: self.validation.samples,
            horizon: self.solver.horizon,
            ..ValidationOptions::default()
        }
    }
}

/// Outcome of the assumption pre-flight.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub report: ValidationReport,
    pub trace: TraceNorm,
    pub scalar_trace: TraceNorm,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.report.all_passed()
    }

    /// One line per failed assumption, naming it.
    pub fn failure_lines(&self) -> Vec<String> {
        self.report
            .failures()
            .map(|c| format!("{} violated: margin {:e}, {}", c.assumption, c.margin, c.detail))
            .collect()
    }
}

/// Validates the model hypotheses against the discrete trace norm of the
/// configured mesh.
pub fn check(cfg: &RunConfig) -> Result<CheckReport> {
    let mesh = cfg.mesh()?;
    let dofs = crate::mesh::DofMap::new(&mesh);
    let trace = estimate_trace_norm(&mesh, &dofs)?;
    let scalar_trace = estimate_scalar_trace_norm(&mesh, &dofs)?;
    let models = cfg.models();
    let report = validate_assumptions(
        &models.material,
        &models.friction,
        &models.boundary,
        trace.norm,
        &cfg.validation_options(),
    );
    Ok(CheckReport {
        report,
        trace,
        scalar_trace,
    })
}

/// Outcome of a full run.
#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub steps: usize,
    pub files: Vec<PathBuf>,
    /// Assumption failures and per-step invariant violations.
    pub violations: Vec<String>,
    pub cascade: Option<CascadeSummary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeSummary {
    pub delays: Vec<f64>,
    pub majorants: Vec<f64>,
    pub mechanical_maxima: Vec<f64>,
    pub thermal_maxima: Vec<f64>,
}

struct CsvFile {
    path: PathBuf,
    out: BufWriter<File>,
}

impl CsvFile {
    fn create(dir: &Path, name: &str, hash: &str, header: &str) -> Result<CsvFile> {
        let path = dir.join(name);
        let mut out = BufWriter::new(File::create(&path)?);
        writeln!(out, "# config_hash={hash}")?;
        writeln!(out, "{header}")?;
        Ok(CsvFile { path, out })
    }

    fn row(&mut self, line: &str) -> Result<()> {
        writeln!(self.out, "{line}")?;
        Ok(())
    }

    fn finish(mut self) -> Result<PathBuf> {
        self.out.flush()?;
        Ok(self.path)
    }
}

fn trajectory_header(n: usize) -> String {
    let mut h = String::from("step,t");
    for field in ["theta", "phi"] {
        for i in 0..n {
            let _ = write!(h, ",{field}_{i}");
        }
    }
    for field in ["u", "v"] {
        for i in 0..n {
            let _ = write!(h, ",{field}_{i}_x,{field}_{i}_y");
        }
    }
    h
}

/// Nodal `θ`, total potential, `u` and `v`.
fn nodal_fields(sim: &Simulation, s: &SystemState) -> (Vec<f64>, Vec<f64>, Vec<Point>, Vec<Point>) {
    let (mesh, dofs) = (&sim.disc.mesh, &sim.disc.dofs);
    let phi_b = &sim.models.boundary.phi_b;
    let phi = dofs
        .expand_scalar(&s.phi)
        .into_iter()
        .zip(mesh.nodes())
        .map(|(p, &x)| p + phi_b(x))
        .collect();
    (dofs.expand_scalar(&s.theta), phi, dofs.expand_vector(&s.u), dofs.expand_vector(&s.v))
}

fn trajectory_row(sim: &Simulation, s: &SystemState) -> String {
    let (theta, phi, u, v) = nodal_fields(sim, s);
    let mut row = format!("{},{:e}", s.step, s.t);
    for x in theta.iter().chain(&phi) {
        let _ = write!(row, ",{x:e}");
    }
    for p in u.iter().chain(&v) {
        let _ = write!(row, ",{:e},{:e}", p[0], p[1]);
    }
    row
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Config(format!("cannot create {}: {e}", dir.display())))
}

/// Simulates the configured scenario, streaming the trajectory and per-step
/// diagnostics to `cfg.output.dir`, then runs the cascade when levels are
/// configured.
pub fn run(cfg: &RunConfig) -> Result<RunSummary> {
    let out_dir = cfg.output.dir.clone();
    ensure_dir(&out_dir)?;
    let mut summary = RunSummary::default();

    let pre = check(cfg)?;
    summary.violations.extend(pre.failure_lines());
    if cfg.output.assert && !summary.violations.is_empty() {
        return Ok(summary);
    }

    let mesh = cfg.mesh()?;
    let models = cfg.models();
    let config = cfg.solver_config();
    let init = &cfg.initial;
    let mut sim = Simulation::initialize(
        mesh.clone(),
        models.clone(),
        config.clone(),
        |_| init.displacement,
        |_| init.velocity,
        |_| init.theta,
    )?;

    let disc = Discretization::new(mesh.clone(), &models.material);
    let mut acc = if cfg.output.diagnostics {
        Some(DiagnosticsAccumulator::new(&disc, &models, &config)?)
    } else {
        None
    };
    let hash = &cfg.hash();
    let mut trajectory = CsvFile::create(&out_dir, "trajectory.csv", hash, &trajectory_header(mesh.nodes().len()))?;
    let mut diagnostics = match acc {
        Some(_) => Some(CsvFile::create(&out_dir, "diagnostics.csv", hash, DiagnosticsRow::HEADER)?),
        None => None,
    };
    let stride = cfg.output.stride;
    let last = config.steps();
    let level = config.delay;
    sim.advance(|sim, s| {
        if s.step % stride == 0 || s.step == last {
            trajectory.row(&trajectory_row(sim, s))?;
        }
        if let (Some(acc), Some(file)) = (acc.as_mut(), diagnostics.as_mut()) {
            file.row(&acc.push(s)?.csv(level))?;
        }
        Ok(())
    })?;
    summary.steps = sim.current().step;
    summary.files.push(trajectory.finish()?);
    if let Some(file) = diagnostics {
        summary.files.push(file.finish()?);
    }
    if let Some(acc) = acc {
        summary
            .violations
            .extend(acc.violations.iter().map(|v| format!("step {} (t = {:e}): {}", v.step, v.t, v.what)));
    }
    summary.files.push(write_fields(&out_dir, hash, &sim)?);

    if !config.cascade_levels.is_empty() {
        let (files, cascade) = cascade_to(cfg, &mesh, &models, &config)?;
        summary.files.extend(files);
        summary.cascade = Some(cascade);
    }
    Ok(summary)
}

/// Per-node snapshot of the final state.
fn write_fields(dir: &Path, hash: &str, sim: &Simulation) -> Result<PathBuf> {
    let mut file = CsvFile::create(dir, "fields.csv", hash, "node,x,y,theta,phi,u_x,u_y,v_x,v_y")?;
    let s = sim.current();
    let (theta, phi, u, v) = nodal_fields(sim, s);
    for (i, x) in sim.disc.mesh.nodes().iter().enumerate() {
        file.row(&format!(
            "{i},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            x[0], x[1], theta[i], phi[i], u[i][0], u[i][1], v[i][0], v[i][1]
        ))?;
    }
    file.finish()
}

/// Runs only the cascade of the configured scenario.
pub fn cascade(cfg: &RunConfig) -> Result<(Vec<PathBuf>, CascadeSummary)> {
    if cfg.solver.cascade_levels.len() < 2 {
        return Err(Error::Config("solver.cascade_levels needs at least two delays".into()));
    }
    ensure_dir(&cfg.output.dir)?;
    cascade_to(cfg, &cfg.mesh()?, &cfg.models(), &cfg.solver_config())
}

fn cascade_to(
    cfg: &RunConfig,
    mesh: &Mesh,
    models: &Models,
    config: &SolverConfig,
) -> Result<(Vec<PathBuf>, CascadeSummary)> {
    let report = run_cascade(mesh, models, config)?;
    let dir = &cfg.output.dir;
    let hash = cfg.hash();
    let mut rows = CsvFile::create(dir, "cascade.csv", &hash, "coarse,fine,theta_l2h,phi_l2v,v_l2e")?;
    for r in &report.cauchy {
        rows.row(&format!("{:e},{:e},{:e},{:e},{:e}", r.coarse, r.fine, r.theta, r.phi, r.v))?;
    }
    let mut levels = CsvFile::create(
        dir,
        "cascade_levels.csv",
        &hash,
        "delay,max_mechanical_lhs,max_thermal_lhs,majorant,dual,surrogate",
    )?;
    for l in &report.levels {
        let (mech, thermal) = l.energy_maxima();
        let r = &l.regularizer;
        levels.row(&format!(
            "{:e},{mech:e},{thermal:e},{:e},{:e},{:e}",
            l.delay, r.majorant, r.dual, r.surrogate
        ))?;
    }
    Ok((vec![rows.finish()?, levels.finish()?], summarize(&report)))
}

fn summarize(report: &CascadeReport) -> CascadeSummary {
    let mut s = CascadeSummary {
        delays: Vec::new(),
        majorants: Vec::new(),
        mechanical_maxima: Vec::new(),
        thermal_maxima: Vec::new(),
    };
    for l in &report.levels {
        let (mech, thermal) = l.energy_maxima();
        s.delays.push(l.delay);
        s.majorants.push(l.regularizer.majorant);
        s.mechanical_maxima.push(mech);
        s.thermal_maxima.push(thermal);
    }
    s
}

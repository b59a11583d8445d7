//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

mod common;

use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thermistor::assembly;
use thermistor::diagnostics::{self, PotentialConstant};
use thermistor::friction::{check_subgradient_properties, MomentumProblem, RegularizedFriction};
use thermistor::linalg;
use thermistor::materials::ElectricConductivity;
use thermistor::mesh::{BoundaryTag, DofMap, Mesh, Point, SideTags};
use thermistor::scheme::{self, delay_inequality, run_cascade, Discretization, Models, Simulation, SolverConfig};
use thermistor::RunConfig;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn default_mesh() -> Mesh {
    Mesh::unit_square(8, SideTags::thermistor()).unwrap()
}

fn default_trajectory() -> (Discretization, Models, Vec<scheme::SystemState>) {
    let models = Models::default_ptc();
    let mut sim = Simulation::initialize_at_rest(default_mesh(), models.clone(), SolverConfig::default()).unwrap();
    let traj = sim.run().unwrap();
    (sim.disc, models, traj)
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

fn c1_manufactured_potential() -> Outcome {
    let exact = |x: Point| x[0] * x[1];
    let mut models = Models::default_ptc();
    models.material.electric = ElectricConductivity::Constant(1.0);
    models.boundary.phi_b = Arc::new(exact);
    let mut errors = Vec::new();
    for n in [4, 8, 16] {
        let mesh = Mesh::unit_square(n, SideTags::uniform(BoundaryTag::Dirichlet)).unwrap();
        let disc = Discretization::new(mesh, &models.material);
        let theta = DVector::zeros(disc.dofs.n_scalar());
        let (phi, _) = scheme::solve_electric(&disc, &models, &theta, 0.0).unwrap();
        let total: Vec<f64> = disc
            .dofs
            .expand_scalar(&phi)
            .iter()
            .zip(disc.mesh.nodes())
            .map(|(p, &x)| p + exact(x))
            .collect();
        errors.push(diagnostics::p1_errors(&disc.mesh, &total, exact, |x| [x[1], x[0]]));
    }
    let l2 = [order(errors[0].0, errors[1].0), order(errors[1].0, errors[2].0)];
    let h1 = [order(errors[0].1, errors[1].1), order(errors[1].1, errors[2].1)];
    let ok = l2.iter().all(|p| (1.7..=2.3).contains(p)) && h1.iter().all(|p| (0.8..=1.2).contains(p));
    outcome(ok, format!("L2 orders {:.3}, {:.3}; energy orders {:.3}, {:.3}", l2[0], l2[1], h1[0], h1[1]))
}

fn c2_potential_bound(disc: &Discretization, models: &Models, traj: &[scheme::SystemState]) -> Outcome {
    let constant = PotentialConstant::new(&disc.mesh, &disc.dofs, models).unwrap();
    let mut worst: f64 = 0.0;
    let mut held = 0;
    for s in traj {
        let b = diagnostics::potential_bound(disc, &constant, s);
        held += usize::from(b.holds(1e-8));
        worst = worst.max(b.lhs / b.rhs);
    }
    outcome(
        held == traj.len(),
        format!("{held}/{} steps, max ‖φ‖_V / C = {worst:.4e}", traj.len()),
    )
}

fn c3_friction_bound(models: &Models, traj: &[scheme::SystemState]) -> Outcome {
    let bound = models.friction.mu_bar() * models.friction.f_bar();
    let mut worst: f64 = 0.0;
    let mut violations = 0;
    for s in traj {
        for x in &s.xi {
            let m = x[0].hypot(x[1]);
            worst = worst.max(m);
            violations += usize::from(m > bound * (1.0 + 1e-10));
        }
    }
    let report = check_subgradient_properties(&models.friction, SolverConfig::default().epsilon, 20_240_601, 10_000);
    outcome(
        violations == 0 && worst > 0.0 && report.passed(),
        format!(
            "max |ξ| = {worst:.4e} vs μ̄F̄ = {bound:.4e}; {} sampled pairs, {} bound and {} monotonicity violations",
            report.samples, report.bound_violations, report.monotonicity_violations
        ),
    )
}

fn c4_delay_inequality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut violations = 0;
    for _ in 0..100 {
        let len = rng.random_range(1..200);
        let k = rng.random_range(1..40);
        let dt = rng.random_range(1e-3..0.1);
        let dim = rng.random_range(1..20);
        let history: Vec<f64> = (0..=len)
            .map(|_| (0..dim).map(|_| rng.random_range(-1.0f64..1.0).powi(2)).sum())
            .collect();
        let (lhs, rhs) = delay_inequality(&history, k, dt);
        violations += usize::from(lhs > rhs * (1.0 + 1e-12));
    }
    outcome(violations == 0, format!("100 histories, {violations} violations"))
}

fn cascade_outcomes() -> (Outcome, Outcome, Outcome) {
    let config = SolverConfig {
        cascade_levels: vec![0.1, 0.05, 0.025, 0.0125],
        ..SolverConfig::default()
    };
    let report = run_cascade(&default_mesh(), &Models::default_ptc(), &config).unwrap();

    let maxima: Vec<(f64, f64)> = report.levels.iter().take(3).map(|l| l.energy_maxima()).collect();
    let spread = |v: Vec<f64>| {
        let (lo, hi) = v.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        ((hi - lo) / lo, v.iter().all(|&x| x <= 10.0 * v[0] && x.is_finite()))
    };
    let (mech, mech_ok) = spread(maxima.iter().map(|m| m.0).collect());
    let (thermal, thermal_ok) = spread(maxima.iter().map(|m| m.1).collect());
    let c5 = outcome(
        mech < 0.5 && thermal < 0.5 && mech_ok && thermal_ok,
        format!("spread over h = 0.1, 0.05, 0.025: velocity {:.3}%, temperature {:.3}%", 100.0 * mech, 100.0 * thermal),
    );

    let theta: Vec<f64> = report.cauchy.iter().map(|r| r.theta).collect();
    let v: Vec<f64> = report.cauchy.iter().map(|r| r.v).collect();
    let ratios = |x: &[f64]| x.windows(2).map(|w| w[1] / w[0]).collect::<Vec<_>>();
    let (rt, rv) = (ratios(&theta), ratios(&v));
    let c6 = outcome(
        rt.len() >= 2 && rt.iter().chain(&rv).all(|&r| r < 1.0),
        format!("θ ratios {rt:.3?}, v ratios {rv:.3?}"),
    );

    let majorants: Vec<f64> = report.levels.iter().map(|l| l.regularizer.majorant).collect();
    let c7 = outcome(
        majorants.windows(2).all(|w| w[1] < w[0]),
        format!("majorants {}", sci(&majorants)),
    );
    (c5, c6, c7)
}

fn c8_joule_gap() -> Outcome {
    let models = Models::default_ptc();
    let theta_s = |x: Point| 1.0 + (std::f64::consts::PI * x[0]).sin() * (std::f64::consts::PI * x[1]).sin();
    let mut gaps = Vec::new();
    let mut zero_gap: f64 = 0.0;
    for n in [4, 8, 16] {
        let disc = Discretization::new(Mesh::unit_square(n, SideTags::thermistor()).unwrap(), &models.material);
        let theta = disc.dofs.interpolate_scalar(&disc.mesh, theta_s);
        let (phi, _) = scheme::solve_electric(&disc, &models, &theta, 0.0).unwrap();
        gaps.push(diagnostics::joule_gap(&disc, &models, &theta, &phi, 0.0));
        let zero = DVector::zeros(disc.dofs.n_scalar());
        zero_gap = zero_gap.max(diagnostics::joule_gap(&disc, &models, &theta, &zero, 0.0));
    }
    outcome(
        gaps.windows(2).all(|w| w[1] < w[0]) && zero_gap <= 1e-12,
        format!("gaps n = 4, 8, 16: {}; with φ ≡ 0: {zero_gap:.1e}", sci(&gaps)),
    )
}

fn c9_monolithic_oracle() -> Outcome {
    let cfg = RunConfig::parse(
        "[material]\nelectric = \"constant\"\nsigma_star = 0.8\n\
         [friction]\nlaw = \"none\"\n\
         [solver]\nhorizon = 0.1\ndelay = 0.025\ndt = 0.0125\nregularizer = 0.0\n",
    )
    .unwrap();
    let mesh = Mesh::unit_square(2, SideTags::thermistor()).unwrap();
    let d = common::Dense::new(&mesh);
    let m = &cfg.material;
    let b = &cfg.boundary;
    let f = cfg.friction.traction;
    let (k_base, k_amp) = (m.k_base, m.k_amplitude);
    let sc = common::Scenario {
        rho: m.rho,
        c_p: m.c_p,
        theta_ref: m.theta_ref,
        viscosity: (m.viscosity_lambda, m.viscosity_mu),
        elasticity: (m.elasticity_lambda, m.elasticity_mu),
        expansion: m.expansion,
        conductivity: Box::new(move |s| {
            let c = k_base + k_amp * s * s / (1.0 + s * s);
            [[c, 0.0], [0.0, c]]
        }),
        sigma: m.sigma_star,
        heat_n: b.heat_transfer_n,
        heat_c: b.heat_transfer_c / (1.0 + f),
        current_n: b.current_transfer_n,
        current_c: b.current_transfer_c / (1.0 + f),
        pressure: f,
        traction_n: b.surface_traction,
        phi_b: mesh.nodes().iter().map(|x| b.potential_gradient[0] * x[0] + b.potential_gradient[1] * x[1]).collect(),
    };
    let theta0 = |x: Point| x[0] * (1.0 - x[0]) + 0.5 * x[1];
    let v0 = |x: Point| [0.1 * x[1], -0.05 * x[0] * x[1]];
    let u0 = |x: Point| [0.01 * x[0] * x[1], 0.02 * x[1]];
    let config = cfg.solver_config();
    let mut sim = Simulation::initialize(mesh.clone(), cfg.models(), config.clone(), u0, v0, theta0).unwrap();
    let on_free = |k: usize| d.free[k];
    let initial = common::Fields {
        theta: mesh.nodes().iter().enumerate().map(|(k, &x)| if on_free(k) { theta0(x) } else { 0.0 }).collect(),
        phi: d.electric(&sc),
        u: mesh.nodes().iter().enumerate().map(|(k, &x)| if on_free(k) { u0(x) } else { [0.0; 2] }).collect(),
        v: mesh.nodes().iter().enumerate().map(|(k, &x)| if on_free(k) { v0(x) } else { [0.0; 2] }).collect(),
    };
    let mut history = vec![initial];
    let k = config.delay_steps();
    let mut worst: f64 = 0.0;
    let flat = |v: &[Point]| v.iter().flat_map(|p| *p).collect::<Vec<f64>>();
    for n in 1..=config.steps() {
        let next = d.monolithic_step(&sc, &history[n - 1], &history[n.saturating_sub(k)], config.dt);
        let s = sim.step().unwrap().clone();
        let dofs = &sim.disc.dofs;
        worst = worst
            .max(common::rel_diff(&dofs.expand_scalar(&s.theta), &next.theta))
            .max(common::rel_diff(&dofs.expand_scalar(&s.phi), &next.phi))
            .max(common::rel_diff(&flat(&dofs.expand_vector(&s.u)), &flat(&next.u)))
            .max(common::rel_diff(&flat(&dofs.expand_vector(&s.v)), &flat(&next.v)));
        history.push(next);
    }
    outcome(
        worst <= 1e-10,
        format!("{} steps on n = 2, max relative difference {worst:.2e}", config.steps()),
    )
}

fn c10_jacobians() -> Outcome {
    let mesh = Mesh::unit_square(2, SideTags::thermistor()).unwrap();
    let dofs = DofMap::new(&mesh);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut p_worst: f64 = 0.0;
    for _ in 0..20 {
        let theta = DVector::from_fn(dofs.n_scalar(), |_, _| rng.random_range(-1.0..1.0));
        let jac = linalg::to_dense(&assembly::p_laplacian(&mesh, &dofs, &theta).1);
        let h = 1e-5;
        for j in 0..dofs.n_scalar() {
            let (mut a, mut b) = (theta.clone(), theta.clone());
            a[j] += h;
            b[j] -= h;
            let fd = (assembly::p_laplacian(&mesh, &dofs, &a).0 - assembly::p_laplacian(&mesh, &dofs, &b).0) / (2.0 * h);
            p_worst = p_worst.max((&fd - jac.column(j)).amax() / jac.amax());
        }
    }

    let models = Models::default_ptc();
    let disc = Discretization::new(mesh.clone(), &models.material);
    let friction = RegularizedFriction::new(models.friction.clone(), 1e-3).unwrap();
    let n = disc.dofs.n_vector();
    let zeros = DVector::zeros(n);
    let thermal = DVector::from_fn(n, |_, _| rng.random_range(-0.1..0.1));
    let load = assembly::mech_load(&mesh, &disc.dofs, &models.boundary, &models.friction, 0.1);
    let problem = MomentumProblem {
        mesh: &disc.mesh,
        dofs: &disc.dofs,
        mass: &disc.vector_mass,
        viscosity: &disc.viscosity,
        elasticity: &disc.elasticity,
        friction: &friction,
        mass_coefficient: 1.0,
        dt: 0.0125,
        t: 0.1,
        u_prev: &zeros,
        v_prev: &zeros,
        thermal_load: &thermal,
        load: &load,
    };
    let mut f_worst: f64 = 0.0;
    for _ in 0..20 {
        let v = DVector::from_fn(n, |_, _| rng.random_range(-0.2..0.2));
        let jac = linalg::to_dense(&problem.jacobian(&v));
        let h = 1e-6;
        for j in 0..n {
            let (mut a, mut b) = (v.clone(), v.clone());
            a[j] += h;
            b[j] -= h;
            let fd = (problem.residual(&a) - problem.residual(&b)) / (2.0 * h);
            f_worst = f_worst.max((&fd - jac.column(j)).amax() / jac.amax());
        }
    }
    outcome(
        p_worst <= 1e-6 && f_worst <= 1e-5,
        format!("4-Laplacian {p_worst:.2e}, friction step {f_worst:.2e}"),
    )
}

fn cli(args: &[&str], config: &std::path::Path) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_thermistor"))
        .args(args)
        .arg("--config")
        .arg(config)
        .output()
        .unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn c11_a8_gate() -> Outcome {
    let dir = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance_a8");
    std::fs::create_dir_all(&dir).unwrap();
    let default = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/default.cfg");
    let (ok_code, _) = cli(&["check"], &default);
    let inflated = dir.join("inflated.cfg");
    let d_mu = 1e6 * Models::default_ptc().friction.d_mu();
    let text = std::fs::read_to_string(&default).unwrap().replace("[friction]", &format!("[friction]\nd_mu = {d_mu:e}"));
    std::fs::write(&inflated, text).unwrap();
    let (bad_code, stderr) = cli(&["check"], &inflated);
    outcome(
        ok_code == 0 && bad_code == 4 && stderr.contains("(A8)"),
        format!("default exit {ok_code}, inflated d_μ exit {bad_code}, (A8) named: {}", stderr.contains("(A8)")),
    )
}

fn c12_zero_and_determinism() -> Outcome {
    let zero = RunConfig::parse(
        "[friction]\ntraction = 0.0\n[boundary]\npotential_gradient = [0.0, 0.0]\nsurface_traction = [0.0, 0.0]\n",
    )
    .unwrap();
    let mut sim = Simulation::initialize_at_rest(zero.mesh().unwrap(), zero.models(), zero.solver_config()).unwrap();
    let traj = sim.run().unwrap();
    let all_zero = traj
        .iter()
        .all(|s| s.theta.iter().chain(&s.phi).chain(&s.u).chain(&s.v).all(|&x| x == 0.0));

    let base = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance_determinism");
    let mut cfg = RunConfig::load(std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/default.cfg")).unwrap();
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        cfg.output.dir = base.join(run);
        let summary = thermistor::driver::run(&cfg).unwrap();
        outputs.push(
            summary
                .files
                .iter()
                .map(|p| std::fs::read(p).unwrap())
                .collect::<Vec<_>>(),
        );
    }
    let identical = outputs[0] == outputs[1];
    outcome(
        all_zero && identical,
        format!(
            "zero data: {} states all zero = {all_zero}; {} output files byte-identical = {identical}",
            traj.len(),
            outputs[0].len()
        ),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(u32, &str, Outcome, Duration)> = Vec::new();
    let mut timed = |id: u32, name: &'static str, limit: Option<Duration>, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let mut o = f();
        let took = start.elapsed();
        if let Some(limit) = limit {
            if took > limit {
                o.passed = false;
                o.detail.push_str(&format!("; exceeded {limit:?}"));
            }
        }
        results.push((id, name, o, took));
    };

    timed(1, "manufactured potential convergence", Some(Duration::from_secs(10)), &mut c1_manufactured_potential);
    let mut run = None;
    timed(2, "discrete potential bound", Some(Duration::from_secs(60)), &mut || {
        let (disc, models, traj) = default_trajectory();
        let o = c2_potential_bound(&disc, &models, &traj);
        run = Some((models, traj));
        o
    });
    let (models, traj) = run.expect("default run finished");
    timed(3, "friction subgradient bound", None, &mut || c3_friction_bound(&models, &traj));
    timed(4, "delay-operator inequality", None, &mut c4_delay_inequality);
    let mut later = None;
    timed(5, "uniform energy bounds across the cascade", Some(Duration::from_secs(300)), &mut || {
        let (c5, c6, c7) = cascade_outcomes();
        later = Some((c6, c7));
        c5
    });
    let (c6, c7) = later.expect("cascade finished");
    let mut c6 = Some(c6);
    timed(6, "Cauchy convergence in the delay", None, &mut || c6.take().unwrap());
    let mut c7 = Some(c7);
    timed(7, "vanishing regularizer majorant", None, &mut || c7.take().unwrap());
    timed(8, "Joule reformulation consistency", None, &mut c8_joule_gap);
    timed(9, "staggered step equals monolithic oracle", None, &mut c9_monolithic_oracle);
    timed(10, "Jacobians against central differences", None, &mut c10_jacobians);
    timed(11, "(A8) gate in check", None, &mut c11_a8_gate);
    timed(12, "zero fixed point and determinism", None, &mut c12_zero_and_determinism);

    let mut failed = 0;
    for (id, name, o, took) in &results {
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        failed += usize::from(!o.passed);
        println!("{verdict} {id:>2} {name}: {} [{:.2}s]", o.detail, took.as_secs_f64());
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

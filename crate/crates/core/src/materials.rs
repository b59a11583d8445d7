//! Material, friction and boundary-data models, plus sampled checks of the
//! standing hypotheses on them.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mesh::Point;

pub type ScalarLaw = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type MatrixLaw = Arc<dyn Fn(f64) -> [[f64; 2]; 2] + Send + Sync>;
pub type SpaceTimeScalar = Arc<dyn Fn(Point, f64) -> f64 + Send + Sync>;
pub type SpaceTimeVector = Arc<dyn Fn(Point, f64) -> Point + Send + Sync>;
pub type SpaceScalar = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

/// Temperature-dependent electric conductivity `σ_el(s)`.
#[derive(Clone)]
pub enum ElectricConductivity {
    /// Positive temperature coefficient switch:
    /// `σ_* + (M − σ_*) / (1 + exp(κ (s − s_c)))`.
    Ptc {
        sigma_star: f64,
        sigma_max: f64,
        steepness: f64,
        switch_temperature: f64,
    },
    Constant(f64),
    Custom {
        law: ScalarLaw,
        lower: f64,
        upper: f64,
        lipschitz: f64,
    },
}

impl ElectricConductivity {
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            ElectricConductivity::Ptc {
                sigma_star,
                sigma_max,
                steepness,
                switch_temperature,
            } => {
                let z = steepness * (s - switch_temperature);
                // 1/(1+e^z) written to stay finite for large |z|
                let logistic = if z > 0.0 {
                    let e = (-z).exp();
                    e / (1.0 + e)
                } else {
                    1.0 / (1.0 + z.exp())
                };
                sigma_star + (sigma_max - sigma_star) * logistic
            }
            ElectricConductivity::Constant(c) => *c,
            ElectricConductivity::Custom { law, .. } => law(s),
        }
    }

    /// Declared `σ_*`.
    pub fn lower_bound(&self) -> f64 {
        match self {
            ElectricConductivity::Ptc { sigma_star, .. } => *sigma_star,
            ElectricConductivity::Constant(c) => *c,
            ElectricConductivity::Custom { lower, .. } => *lower,
        }
    }

    /// Declared `M`.
    pub fn upper_bound(&self) -> f64 {
        match self {
            ElectricConductivity::Ptc { sigma_max, .. } => *sigma_max,
            ElectricConductivity::Constant(c) => *c,
            ElectricConductivity::Custom { upper, .. } => *upper,
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match self {
            ElectricConductivity::Ptc {
                sigma_star,
                sigma_max,
                steepness,
                ..
            } => (sigma_max - sigma_star).abs() * steepness.abs() / 4.0,
            ElectricConductivity::Constant(_) => 0.0,
            ElectricConductivity::Custom { lipschitz, .. } => *lipschitz,
        }
    }
}

/// Temperature-dependent heat conductivity matrix `k_ij(s)`.
#[derive(Clone)]
pub enum ThermalConductivity {
    /// `(base + amplitude · s²/(1+s²)) I`.
    Saturating { base: f64, amplitude: f64 },
    Constant([[f64; 2]; 2]),
    Custom {
        law: MatrixLaw,
        /// Upper bound on the spectral norm of `k(s)`.
        upper: f64,
        lipschitz: f64,
    },
}

impl ThermalConductivity {
    pub fn eval(&self, s: f64) -> [[f64; 2]; 2] {
        match self {
            ThermalConductivity::Saturating { base, amplitude } => {
                let s2 = s * s;
                let c = base + amplitude * (s2 / (1.0 + s2));
                [[c, 0.0], [0.0, c]]
            }
            ThermalConductivity::Constant(k) => *k,
            ThermalConductivity::Custom { law, .. } => law(s),
        }
    }

    pub fn upper_bound(&self) -> f64 {
        match self {
            ThermalConductivity::Saturating { base, amplitude } => base + amplitude.max(0.0),
            ThermalConductivity::Constant(k) => spectral_norm(k),
            ThermalConductivity::Custom { upper, .. } => *upper,
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match self {
            // max of d/ds s²/(1+s²) is 3√3/8, reached at s = 1/√3
            ThermalConductivity::Saturating { amplitude, .. } => {
                amplitude.abs() * 3.0 * 3f64.sqrt() / 8.0
            }
            ThermalConductivity::Constant(_) => 0.0,
            ThermalConductivity::Custom { lipschitz, .. } => *lipschitz,
        }
    }
}

fn spectral_norm(k: &[[f64; 2]; 2]) -> f64 {
    // largest singular value of a 2×2 matrix
    let (a, b, c, d) = (k[0][0], k[0][1], k[1][0], k[1][1]);
    let s1 = a * a + b * b + c * c + d * d;
    let det = a * d - b * c;
    ((s1 + (s1 * s1 - 4.0 * det * det).max(0.0).sqrt()) / 2.0).sqrt()
}

/// Constant fourth-order tensor in two dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticTensor {
    c: [[[[f64; 2]; 2]; 2]; 2],
}

impl ElasticTensor {
    /// `λ δ_ij δ_kl + μ (δ_ik δ_jl + δ_il δ_jk)`.
    pub fn isotropic(lambda: f64, mu: f64) -> Self {
        let d = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
        let mut c = [[[[0.0; 2]; 2]; 2]; 2];
        for (i, ci) in c.iter_mut().enumerate() {
            for (j, cij) in ci.iter_mut().enumerate() {
                for (k, cijk) in cij.iter_mut().enumerate() {
                    for (l, v) in cijk.iter_mut().enumerate() {
                        *v = lambda * d(i, j) * d(k, l) + mu * (d(i, k) * d(j, l) + d(i, l) * d(j, k));
                    }
                }
            }
        }
        ElasticTensor { c }
    }

    pub fn from_components(c: [[[[f64; 2]; 2]; 2]; 2]) -> Self {
        ElasticTensor { c }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.c[i][j][k][l]
    }

    /// `c_ijkl ξ_ij ζ_kl`.
    pub fn contract(&self, xi: &[[f64; 2]; 2], zeta: &[[f64; 2]; 2]) -> f64 {
        let mut s = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        s += self.c[i][j][k][l] * xi[i][j] * zeta[k][l];
                    }
                }
            }
        }
        s
    }

    /// Largest violation of `c_ijkl = c_jikl = c_klij`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let v = self.c[i][j][k][l];
                        worst = worst
                            .max((v - self.c[j][i][k][l]).abs())
                            .max((v - self.c[k][l][i][j]).abs());
                    }
                }
            }
        }
        worst
    }
}

/// Bulk material: Kelvin-Voigt thermoviscoelasticity with temperature
/// dependent heat and electric conductivities.
#[derive(Clone)]
pub struct MaterialModel {
    pub rho: f64,
    pub c_p: f64,
    pub theta_ref: f64,
    pub viscosity: ElasticTensor,
    pub elasticity: ElasticTensor,
    pub expansion: [[f64; 2]; 2],
    pub thermal: ThermalConductivity,
    pub electric: ElectricConductivity,
    /// Common ellipticity constant for `k`, `a` and `b`.
    pub delta: f64,
}

impl MaterialModel {
    /// Coefficient of `θ̇` in the heat equation.
    pub fn mass_thermal(&self) -> f64 {
        self.rho * self.c_p
    }

    /// Coefficient of `v̇` in the momentum equation.
    pub fn mass_mech(&self) -> f64 {
        self.rho
    }
}

/// Friction coefficient `μ` as a function of slip speed.
#[derive(Clone)]
pub enum FrictionCoefficient {
    /// `μ_d + (μ_s − μ_d) e^{−β s}`.
    SlipWeakening {
        static_mu: f64,
        dynamic_mu: f64,
        decay: f64,
    },
    Constant(f64),
    Custom {
        law: ScalarLaw,
        mu_bar: f64,
        d_mu: f64,
        lipschitz: f64,
    },
}

impl FrictionCoefficient {
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            FrictionCoefficient::SlipWeakening {
                static_mu,
                dynamic_mu,
                decay,
            } => dynamic_mu + (static_mu - dynamic_mu) * (-decay * s).exp(),
            FrictionCoefficient::Constant(m) => *m,
            FrictionCoefficient::Custom { law, .. } => law(s),
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        match self {
            FrictionCoefficient::SlipWeakening {
                static_mu,
                dynamic_mu,
                decay,
            } => -decay * (static_mu - dynamic_mu) * (-decay * s).exp(),
            FrictionCoefficient::Constant(_) => 0.0,
            FrictionCoefficient::Custom { law, .. } => {
                let h = 1e-6 * (1.0 + s.abs());
                let lo = (s - h).max(0.0);
                (law(s + h) - law(lo)) / (s + h - lo)
            }
        }
    }

    /// `∫₀^r μ(s) ds` in closed form, when one is known.
    pub fn primitive(&self, r: f64) -> Option<f64> {
        match self {
            FrictionCoefficient::SlipWeakening {
                static_mu,
                dynamic_mu,
                decay,
            } => Some(dynamic_mu * r + (static_mu - dynamic_mu) * (-(-decay * r).exp_m1()) / decay),
            FrictionCoefficient::Constant(m) => Some(m * r),
            FrictionCoefficient::Custom { .. } => None,
        }
    }

    pub fn mu_bar(&self) -> f64 {
        match self {
            FrictionCoefficient::SlipWeakening {
                static_mu,
                dynamic_mu,
                ..
            } => static_mu.max(*dynamic_mu),
            FrictionCoefficient::Constant(m) => *m,
            FrictionCoefficient::Custom { mu_bar, .. } => *mu_bar,
        }
    }

    /// Constant `d_μ` of the one-sided Lipschitz condition.
    pub fn d_mu(&self) -> f64 {
        match self {
            FrictionCoefficient::SlipWeakening {
                static_mu,
                dynamic_mu,
                decay,
            } => (decay * (static_mu - dynamic_mu)).max(0.0),
            FrictionCoefficient::Constant(_) => 0.0,
            FrictionCoefficient::Custom { d_mu, .. } => *d_mu,
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match self {
            FrictionCoefficient::SlipWeakening {
                static_mu,
                dynamic_mu,
                decay,
            } => (decay * (static_mu - dynamic_mu)).abs(),
            FrictionCoefficient::Constant(_) => 0.0,
            FrictionCoefficient::Custom { lipschitz, .. } => *lipschitz,
        }
    }
}

/// Prescribed normal contact traction `F(x, t) ≥ 0`.
#[derive(Clone)]
pub enum NormalTraction {
    Constant(f64),
    Custom { law: SpaceTimeScalar, sup: f64 },
}

impl NormalTraction {
    pub fn eval(&self, x: Point, t: f64) -> f64 {
        match self {
            NormalTraction::Constant(f) => *f,
            NormalTraction::Custom { law, .. } => law(x, t),
        }
    }

    /// Declared `F̄`.
    pub fn sup(&self) -> f64 {
        match self {
            NormalTraction::Constant(f) => *f,
            NormalTraction::Custom { sup, .. } => *sup,
        }
    }
}

#[derive(Clone)]
pub struct FrictionModel {
    pub coefficient: FrictionCoefficient,
    pub traction: NormalTraction,
}

impl FrictionModel {
    pub fn mu(&self, s: f64) -> f64 {
        self.coefficient.eval(s)
    }

    pub fn mu_bar(&self) -> f64 {
        self.coefficient.mu_bar()
    }

    pub fn d_mu(&self) -> f64 {
        self.coefficient.d_mu()
    }

    pub fn f_bar(&self) -> f64 {
        self.traction.sup()
    }

    /// Same traction, friction switched off.
    pub fn frictionless(&self) -> Self {
        FrictionModel {
            coefficient: FrictionCoefficient::Constant(0.0),
            traction: self.traction.clone(),
        }
    }
}

/// Exchange coefficient on the contact boundary as a function of `F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExchangeLaw {
    Constant(f64),
    /// `scale / (1 + F)`.
    Reciprocal { scale: f64 },
}

impl ExchangeLaw {
    pub fn eval(&self, f: f64) -> f64 {
        match *self {
            ExchangeLaw::Constant(c) => c,
            ExchangeLaw::Reciprocal { scale } => scale / (1.0 + f),
        }
    }

    /// Supremum over `F ∈ [0, ∞)`.
    pub fn sup(&self) -> f64 {
        match *self {
            ExchangeLaw::Constant(c) => c,
            ExchangeLaw::Reciprocal { scale } => scale.max(0.0),
        }
    }
}

/// Exchange coefficients, prescribed potential and mechanical loads.
#[derive(Clone)]
pub struct BoundaryData {
    /// `h_N`.
    pub heat_transfer_n: f64,
    /// `H_N`.
    pub current_transfer_n: f64,
    /// `h_C(F)`.
    pub heat_transfer_c: ExchangeLaw,
    /// `H_C(F)`.
    pub current_transfer_c: ExchangeLaw,
    /// Extension of the electrode potential into the body.
    pub phi_b: SpaceScalar,
    /// `f_0`.
    pub body_force: SpaceTimeVector,
    /// `f_2` on the Neumann part.
    pub surface_traction: SpaceTimeVector,
}

impl BoundaryData {
    pub fn with_linear_potential(mut self, gradient: Point, offset: f64) -> Self {
        self.phi_b = Arc::new(move |x: Point| gradient[0] * x[0] + gradient[1] * x[1] + offset);
        self
    }

    pub fn with_constant_loads(mut self, body: Point, surface: Point) -> Self {
        self.body_force = Arc::new(move |_, _| body);
        self.surface_traction = Arc::new(move |_, _| surface);
        self
    }

    pub fn without_loads(self) -> Self {
        self.with_constant_loads([0.0, 0.0], [0.0, 0.0])
    }
}

/// The reference PTC thermistor with slip-weakening friction.
pub fn default_ptc_model() -> (MaterialModel, FrictionModel, BoundaryData) {
    let material = MaterialModel {
        rho: 1.0,
        c_p: 1.0,
        theta_ref: 1.0,
        viscosity: ElasticTensor::isotropic(0.5, 0.5),
        elasticity: ElasticTensor::isotropic(1.0, 0.5),
        expansion: [[0.05, 0.0], [0.0, 0.05]],
        thermal: ThermalConductivity::Saturating {
            base: 1.0,
            amplitude: 0.1,
        },
        electric: ElectricConductivity::Ptc {
            sigma_star: 0.1,
            sigma_max: 1.0,
            steepness: 2.0,
            switch_temperature: 1.0,
        },
        delta: 1.0,
    };
    let friction = FrictionModel {
        coefficient: FrictionCoefficient::SlipWeakening {
            static_mu: 0.4,
            dynamic_mu: 0.2,
            decay: 1.0,
        },
        traction: NormalTraction::Constant(0.1),
    };
    let boundary = BoundaryData {
        heat_transfer_n: 1.0,
        current_transfer_n: 1.0,
        heat_transfer_c: ExchangeLaw::Reciprocal { scale: 1.0 },
        current_transfer_c: ExchangeLaw::Reciprocal { scale: 1.0 },
        phi_b: Arc::new(|x: Point| x[0]),
        body_force: Arc::new(|_, _| [0.0, 0.0]),
        surface_traction: Arc::new(|_, _| [0.0, 0.0]),
    }
    .with_constant_loads([0.0, 0.0], [0.1, 0.0]);
    (material, friction, boundary)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Assumption {
    A2,
    A3,
    A4,
    A5,
    A6,
    A7,
    A8,
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = match self {
            Assumption::A2 => 2,
            Assumption::A3 => 3,
            Assumption::A4 => 4,
            Assumption::A5 => 5,
            Assumption::A6 => 6,
            Assumption::A7 => 7,
            Assumption::A8 => 8,
        };
        write!(f, "(A{n})")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionCheck {
    pub assumption: Assumption,
    pub passed: bool,
    /// Smallest slack observed over all samples; negative on failure.
    pub margin: f64,
    pub detail: String,
    /// The first sample that violated the inequality.
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<AssumptionCheck>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, a: Assumption) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.assumption == a)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AssumptionCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            write!(
                f,
                "{} {:<4} margin {:+.6e}  {}",
                c.assumption,
                if c.passed { "ok" } else { "FAIL" },
                c.margin,
                c.detail
            )?;
            if let Some(w) = &c.witness {
                write!(f, "  [witness: {w}]")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ValidationOptions {
    pub seed: u64,
    pub samples: usize,
    /// Time window over which `F`, `f_0`, `f_2` are sampled.
    pub horizon: f64,
    /// Points of `Γ_C` at which `F` is sampled.
    pub contact_points: Vec<Point>,
    /// Points of `Ω̄` at which the loads are sampled.
    pub body_points: Vec<Point>,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        let grid: Vec<Point> = (0..=4)
            .flat_map(|j| (0..=4).map(move |i| [i as f64 / 4.0, j as f64 / 4.0]))
            .collect();
        ValidationOptions {
            seed: 20_240_601,
            samples: 10_000,
            horizon: 1.0,
            contact_points: grid.clone(),
            body_points: grid,
        }
    }
}

/// Tracks the minimum slack of a family of sampled inequalities.
struct SlackTracker {
    margin: f64,
    witness: Option<String>,
}

impl SlackTracker {
    fn new() -> Self {
        SlackTracker {
            margin: f64::INFINITY,
            witness: None,
        }
    }

    fn observe(&mut self, slack: f64, describe: impl FnOnce() -> String) {
        let slack = if slack.is_nan() { f64::NEG_INFINITY } else { slack };
        if slack < 0.0 && self.witness.is_none() {
            self.witness = Some(describe());
        }
        self.margin = self.margin.min(slack);
    }

    fn finish(self, assumption: Assumption, detail: String) -> AssumptionCheck {
        AssumptionCheck {
            assumption,
            passed: self.margin >= 0.0,
            margin: self.margin,
            detail,
            witness: self.witness,
        }
    }
}

const REL: f64 = 1e-12;

/// Slack of a strict positivity requirement: zero counts as a violation.
fn strict(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        x.min(0.0) - f64::MIN_POSITIVE
    }
}

/// Sampled verification of the standing hypotheses. `trace_norm` is the
/// discrete contact trace norm from [`crate::mesh::estimate_trace_norm`].
pub fn validate_assumptions(
    mat: &MaterialModel,
    fric: &FrictionModel,
    bd: &BoundaryData,
    trace_norm: f64,
    opts: &ValidationOptions,
) -> ValidationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let n = opts.samples.max(1);
    let sample_temperature = |rng: &mut ChaCha8Rng, k: usize| {
        if k % 2 == 0 {
            rng.random_range(-1e6..1e6)
        } else {
            rng.random_range(-20.0..20.0)
        }
    };

    // (A2)
    let el = &mat.electric;
    let (lo, hi, lip) = (el.lower_bound(), el.upper_bound(), el.lipschitz());
    let mut a2 = SlackTracker::new();
    a2.observe(strict(lo), || format!("declared σ_* = {lo} is not positive"));
    for k in 0..n {
        let s = sample_temperature(&mut rng, k);
        let v = el.eval(s);
        a2.observe(v - lo, || format!("σ_el({s:e}) = {v:e} < σ_* = {lo:e}"));
        a2.observe(hi - v, || format!("σ_el({s:e}) = {v:e} > M = {hi:e}"));
        let d = rng.random_range(1e-4..1e-2);
        let q = (el.eval(s + d) - v).abs() / d;
        a2.observe(1.01 * lip - q, || {
            format!("difference quotient {q:e} at s = {s:e} exceeds Lipschitz {lip:e}")
        });
    }
    let a2 = a2.finish(
        Assumption::A2,
        format!("σ_* = {lo}, M = {hi}, Lipschitz = {lip:.6}"),
    );

    // (A3)
    let th = &mat.thermal;
    let (upper, lip) = (th.upper_bound(), th.lipschitz());
    let mut a3 = SlackTracker::new();
    a3.observe(strict(mat.delta), || format!("δ = {} is not positive", mat.delta));
    for k in 0..n {
        let s = sample_temperature(&mut rng, k);
        let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let scale: f64 = rng.random_range(0.1..10.0);
        let xi = [scale * angle.cos(), scale * angle.sin()];
        let kk = th.eval(s);
        let form = xi[0] * (kk[0][0] * xi[0] + kk[0][1] * xi[1])
            + xi[1] * (kk[1][0] * xi[0] + kk[1][1] * xi[1]);
        let xi2 = scale * scale;
        a3.observe(form - mat.delta * xi2 * (1.0 - REL), || {
            format!("k({s:e}) ξ·ξ = {form:e} < δ|ξ|² = {:e}", mat.delta * xi2)
        });
        let norm = spectral_norm(&kk);
        a3.observe(upper * (1.0 + REL) - norm, || {
            format!("|k({s:e})| = {norm:e} exceeds declared bound {upper:e}")
        });
        let d = rng.random_range(1e-4..1e-2);
        let k2 = th.eval(s + d);
        let q = (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| (k2[i][j] - kk[i][j]).abs() / d)
            .fold(0.0, f64::max);
        a3.observe(1.01 * lip - q, || {
            format!("difference quotient {q:e} at s = {s:e} exceeds Lipschitz {lip:e}")
        });
    }
    let a3 = a3.finish(
        Assumption::A3,
        format!("δ = {}, bound = {upper}, Lipschitz = {lip:.6}", mat.delta),
    );

    // (A4)
    let mut a4 = SlackTracker::new();
    for (name, c) in [("a", &mat.viscosity), ("b", &mat.elasticity)] {
        let asym = c.asymmetry();
        a4.observe(1e-14 - asym, || format!("{name} violates the symmetries by {asym:e}"));
        for _ in 0..n {
            let (x, y, z): (f64, f64, f64) = (
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let xi = [[x, z], [z, y]];
            let xi2 = x * x + y * y + 2.0 * z * z;
            let form = c.contract(&xi, &xi);
            a4.observe(form - mat.delta * xi2 * (1.0 - REL), || {
                format!("{name} ξ:ξ = {form:e} < δ|ξ|² = {:e} at ξ = {xi:?}", mat.delta * xi2)
            });
        }
    }
    let a4 = a4.finish(Assumption::A4, format!("δ = {} for a and b", mat.delta));

    // (A5)
    let f_bar = fric.f_bar();
    let mut a5 = SlackTracker::new();
    for k in 0..n {
        let t = rng.random_range(0.0..=opts.horizon.max(0.0));
        if !opts.contact_points.is_empty() {
            let x = opts.contact_points[k % opts.contact_points.len()];
            let f = fric.traction.eval(x, t);
            a5.observe(f, || format!("F({x:?}, {t:e}) = {f:e} < 0"));
            a5.observe(f_bar * (1.0 + REL) - f, || {
                format!("F({x:?}, {t:e}) = {f:e} exceeds F̄ = {f_bar:e}")
            });
        }
        if !opts.body_points.is_empty() {
            let x = opts.body_points[k % opts.body_points.len()];
            let f0 = (bd.body_force)(x, t);
            let f2 = (bd.surface_traction)(x, t);
            let finite = f0.iter().chain(f2.iter()).all(|v| v.is_finite());
            a5.observe(if finite { f64::INFINITY } else { -1.0 }, || {
                format!("non-finite load at {x:?}, t = {t:e}")
            });
        }
    }
    let a5 = a5.finish(Assumption::A5, format!("F̄ = {f_bar}"));

    // (A6)
    let mut a6 = SlackTracker::new();
    a6.observe(strict(bd.heat_transfer_n), || format!("h_N = {} not positive", bd.heat_transfer_n));
    a6.observe(strict(bd.current_transfer_n), || {
        format!("H_N = {} not positive", bd.current_transfer_n)
    });
    let finite_theta = mat.theta_ref.is_finite() && mat.expansion.iter().flatten().all(|m| m.is_finite());
    a6.observe(if finite_theta { f64::INFINITY } else { -1.0 }, || {
        "θ_ref or m_ij not finite".to_string()
    });
    for (name, law) in [("h_C", bd.heat_transfer_c), ("H_C", bd.current_transfer_c)] {
        let sup = law.sup();
        for _ in 0..n / 10 {
            let f = rng.random_range(0.0..=f_bar.max(0.0));
            let v = law.eval(f);
            a6.observe(v, || format!("{name}({f:e}) = {v:e} < 0"));
            a6.observe(sup * (1.0 + REL) - v, || {
                format!("{name}({f:e}) = {v:e} exceeds its bound {sup:e}")
            });
        }
    }
    let a6 = a6.finish(
        Assumption::A6,
        format!("h_N = {}, H_N = {}", bd.heat_transfer_n, bd.current_transfer_n),
    );

    // (A7)
    let mu = &fric.coefficient;
    let (mu_bar, d_mu) = (mu.mu_bar(), mu.d_mu());
    let mut a7 = SlackTracker::new();
    a7.observe(d_mu, || format!("d_μ = {d_mu} is negative"));
    for k in 0..n {
        let s = rng.random_range(0.0..100.0);
        let m = mu.eval(s);
        a7.observe(m, || format!("μ({s:e}) = {m:e} < 0"));
        a7.observe(mu_bar * (1.0 + REL) - m, || format!("μ({s:e}) = {m:e} > μ̄ = {mu_bar:e}"));
        let s1: f64 = rng.random_range(0.0..20.0);
        let s2: f64 = if k % 2 == 0 {
            rng.random_range(0.0..20.0)
        } else {
            (s1 + rng.random_range(-1e-2..1e-2)).max(0.0)
        };
        let lhs = (mu.eval(s1) - mu.eval(s2)) * (s1 - s2);
        let rhs = -d_mu * (s1 - s2).powi(2);
        a7.observe(lhs - rhs + REL * (s1 - s2).powi(2), || {
            format!("(μ(s₁)−μ(s₂))(s₁−s₂) = {lhs:e} < −d_μ|s₁−s₂|² = {rhs:e} at s₁ = {s1:e}, s₂ = {s2:e}")
        });
    }
    let a7 = a7.finish(Assumption::A7, format!("μ̄ = {mu_bar}, d_μ = {d_mu}"));

    // (A8)
    let rhs = f_bar * d_mu * trace_norm * trace_norm;
    let margin = mat.delta - rhs;
    let a8 = AssumptionCheck {
        assumption: Assumption::A8,
        passed: margin > 0.0,
        margin,
        detail: format!(
            "δ = {} vs F̄·d_μ·‖γ‖² = {} · {} · {:.6}² = {:.6e}",
            mat.delta, f_bar, d_mu, trace_norm, rhs
        ),
        witness: (margin <= 0.0).then(|| format!("δ − F̄ d_μ ‖γ‖² = {margin:e}")),
    };

    ValidationReport {
        checks: vec![a2, a3, a4, a5, a6, a7, a8],
    }
}

//! Tabulates the slip-weakening coefficient and its regularized traction,
//! then samples the bound and relaxed-monotonicity properties.

use thermistor::friction::{check_subgradient_properties, xi_regularized, DEFAULT_EPSILON};
use thermistor::Models;

fn main() {
    let fric = Models::default_ptc().friction;
    let f = fric.f_bar();
    println!("{:>8} {:>10} {:>14} {:>14}", "speed", "mu", "xi (eps=1e-6)", "xi (eps=1e-1)");
    for speed in [0.0, 1e-4, 1e-2, 0.1, 0.5, 1.0, 2.0, 5.0] {
        let fine = xi_regularized(&fric.coefficient, [speed, 0.0], f, DEFAULT_EPSILON)[0];
        let coarse = xi_regularized(&fric.coefficient, [speed, 0.0], f, 0.1)[0];
        println!("{speed:>8} {:>10.6} {fine:>14.6e} {coarse:>14.6e}", fric.mu(speed));
    }
    let report = check_subgradient_properties(&fric, DEFAULT_EPSILON, 7, 10_000);
    println!(
        "\nmu_bar F_bar = {:e}, d_mu = {}; {} pairs: bound margin {:e}, monotonicity margin {:e}, passed {}",
        fric.mu_bar() * f,
        fric.d_mu(),
        report.samples,
        report.bound_margin,
        report.monotonicity_margin,
        report.passed()
    );
}

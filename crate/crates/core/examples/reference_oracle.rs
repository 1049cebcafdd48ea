//! The step-halving reference solver on problems with and without a closed form.
//!
//! ```text
//! cargo run --example reference_oracle
//! ```

use rk_error_lab::{integrate, reference_solution, ControllerConfig, IVProblem, MethodPair};

fn main() {
    // riccati with the closed form left off, so the oracle has to integrate
    let blind = IVProblem::new(
        "riccati_blind",
        |_x, y, d| d[0] = -y[0] * y[0],
        0.0,
        vec![1.0],
        5.0,
    )
    .unwrap();
    for x in [1.0, 2.5, 5.0] {
        let y = reference_solution(&blind, x, 1e-12).unwrap()[0];
        println!("y({x}) = {y:.15} (closed form {:.15})", 1.0 / (1.0 + x));
    }

    let p = IVProblem::builtin("unit_slope").unwrap();
    let pair = MethodPair::builtin("rk3_rk4").unwrap();
    let trace = integrate(&pair, &p, &ControllerConfig::for_problem(&p, 1e-8)).unwrap();
    let last = trace.records.last().unwrap();
    let truth = reference_solution(&p, last.x, 1e-12).unwrap()[0];
    println!(
        "unit_slope: {} steps, diagnostics recorded: {}, w(2) - y(2) = {:e}",
        trace.records.len(),
        trace.has_diagnostics(),
        last.w_higher[0] - truth
    );
}

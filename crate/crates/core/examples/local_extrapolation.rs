//! One trial step of the RK3/RK4 pair: the difference of the two candidates
//! estimates the RK3 error coefficient, and the proposed stepsize follows from it.
//!
//! ```text
//! cargo run --example local_extrapolation
//! ```

use rk_error_lab::{
    attempt_step, local_error_exact, propose_stepsize, ControllerConfig, IVProblem, MethodPair,
};

fn main() {
    let pair = MethodPair::builtin("rk3_rk4").unwrap();
    let p = IVProblem::builtin("decay").unwrap();
    let cfg = ControllerConfig::for_problem(&p, 1e-8);
    let z = pair.lower().order();

    println!(
        "{:>8} {:>14} {:>14} {:>10} {:>12}",
        "h", "beta est", "beta true", "rel err", "h proposed"
    );
    for h in [0.4, 0.2, 0.1, 0.05, 0.025] {
        let a = attempt_step(&pair, p.rhs(), 0.0, p.y0(), h).unwrap();
        let truth = local_error_exact(pair.lower(), &p, 0.0, h).unwrap()[0] / h.powi(z as i32 + 1);
        let est = a.beta[0];
        println!(
            "{h:>8} {est:>14.6e} {truth:>14.6e} {:>10.3e} {:>12.6}",
            ((est - truth) / truth).abs(),
            propose_stepsize(est.abs(), &cfg, z)
        );
    }
    println!("beta -> -1/24 = {:.6e} as h -> 0", -1.0 / 24.0);
}

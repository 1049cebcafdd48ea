//! Proportional stepsize updates against shrink-only control, across tolerances.
//!
//! ```text
//! cargo run --example policy_comparison
//! ```

use rk_error_lab::{integrate, ControllerConfig, IVProblem, MethodPair, StepPolicy};

fn main() {
    let pair = MethodPair::builtin("rk3_rk4").unwrap();
    let p = IVProblem::builtin("paper_exponential").unwrap();
    println!(
        "{:>7} {:>13} {:>9} {:>9} {:>7} {:>9} {:>9}",
        "delta", "policy", "accepted", "rejected", "cross i", "cross x", "final/d"
    );
    for delta in [1e-6, 1e-7, 1e-8, 1e-9, 1e-10] {
        for policy in [StepPolicy::Proportional, StepPolicy::RejectOnly] {
            let cfg = ControllerConfig::for_problem(&p, delta).with_policy(policy);
            let t = integrate(&pair, &p, &cfg).unwrap();
            let c = t.crossing().unwrap();
            println!(
                "{delta:>7.0e} {policy:>13} {:>9} {:>9} {:>7} {:>9.3} {:>9.1}",
                t.summary.accepted,
                t.summary.rejected,
                c.index,
                c.x,
                t.final_error_ratio().unwrap()
            );
        }
    }
}

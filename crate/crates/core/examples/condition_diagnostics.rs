//! The breakdown condition `|beta_3| h^4 > i |mean beta_4| h^5` along a run,
//! next to the sigma bound on the global error.
//!
//! ```text
//! cargo run --example condition_diagnostics [delta]
//! ```

use rk_error_lab::{integrate, ControllerConfig, IVProblem, MethodPair};

fn main() {
    let delta: f64 = std::env::args()
        .nth(1)
        .map_or(1e-8, |s| s.parse().expect("delta"));
    let pair = MethodPair::builtin("rk3_rk4").unwrap();
    let p = IVProblem::builtin("paper_exponential").unwrap();
    let trace = integrate(&pair, &p, &ControllerConfig::for_problem(&p, delta)).unwrap();

    let bound = trace.records[0].bound;
    println!("bound (sigma^4 + sigma^5) delta = {bound:.4e}");
    println!(
        "{:>6} {:>8} {:>12} {:>12} {:>8} {:>12}",
        "i", "x", "lhs", "rhs", "lhs/rhs", "|D_3|/bound"
    );
    let mut min_ratio = f64::INFINITY;
    for r in &trace.records {
        let (lhs, rhs) = (r.cond_lhs.unwrap(), r.cond_rhs.unwrap());
        min_ratio = min_ratio.min(lhs / rhs);
        if r.i == 1 || r.i % 100 == 0 || r.i == trace.records.len() {
            println!(
                "{:>6} {:>8.3} {:>12.4e} {:>12.4e} {:>8.2} {:>12.2}",
                r.i,
                r.x,
                lhs,
                rhs,
                lhs / rhs,
                r.abs_delta_lower().unwrap() / bound
            );
        }
    }
    match trace.summary.condition_violation_index {
        Some(i) => println!("condition first violated at step {i}"),
        None => println!("condition never violated; smallest lhs/rhs = {min_ratio:.3}"),
    }
    if let Some(c) = trace.crossing() {
        println!(
            "global error crossed delta at step {} (x = {:.3})",
            c.index, c.x
        );
    }
}

//! Local control on `y' = y ln(1000)/100`, `y(0) = 1`, over [0, 100] with
//! delta = 1e-8: every local error stays below delta while the global error
//! ends up almost a hundred times larger.
//!
//! ```text
//! cargo run --example global_error_growth [out_dir]
//! ```
//!
//! With `out_dir`, writes `trace.csv`, `summary.json` and `figure1.csv` there.

use std::path::PathBuf;

use rk_error_lab::report::{csv_export, figure1_export, json_export};
use rk_error_lab::{integrate, ControllerConfig, IVProblem, MethodPair};

fn main() {
    let pair = MethodPair::builtin("rk3_rk4").unwrap();
    let p = IVProblem::builtin("paper_exponential").unwrap();
    let cfg = ControllerConfig::for_problem(&p, 1e-8);
    let trace = integrate(&pair, &p, &cfg).unwrap();

    let max_eps = trace
        .records
        .iter()
        .filter_map(|r| r.abs_eps_lower())
        .fold(0.0, f64::max);
    println!(
        "{} accepted steps, {} rejected",
        trace.summary.accepted, trace.summary.rejected
    );
    println!("largest local error |eps_3| = {max_eps:.3e}");
    if let Some(c) = trace.crossing() {
        println!(
            "global error first exceeds delta at step {} (x = {:.3})",
            c.index, c.x
        );
    }
    println!(
        "|global error| / delta at x = 100: {:.1}",
        trace.final_error_ratio().unwrap()
    );

    println!(
        "\n{:>8} {:>12} {:>12} {:>12}",
        "x", "|eps_3|", "|alpha D|", "|D_3|"
    );
    let stride = trace.records.len() / 10;
    for r in trace
        .records
        .iter()
        .step_by(stride.max(1))
        .chain(trace.records.last())
    {
        println!(
            "{:>8.3} {:>12.3e} {:>12.3e} {:>12.3e}",
            r.x,
            r.abs_eps_lower().unwrap(),
            r.abs_alpha_term().unwrap(),
            r.abs_delta_lower().unwrap()
        );
    }

    if let Some(dir) = std::env::args().nth(1).map(PathBuf::from) {
        std::fs::create_dir_all(&dir).unwrap();
        csv_export(&trace, dir.join("trace.csv")).unwrap();
        json_export(&trace, dir.join("summary.json")).unwrap();
        figure1_export(&trace, dir.join("figure1.csv")).unwrap();
        println!(
            "\nwrote trace.csv, summary.json, figure1.csv to {}",
            dir.display()
        );
    }
}

//! Log-log slopes of one-step and global errors against h.
//!
//! ```text
//! cargo run --example convergence_orders
//! ```

use rk_error_lab::{empirical_order, ButcherTableau, IVProblem, OrderMode};

fn main() {
    let ladders = [("decay", 3), ("riccati_simple", 5)];
    for (name, first) in ladders {
        let p = IVProblem::builtin(name).unwrap();
        let hs: Vec<f64> = (first..first + 4).map(|k| 2f64.powi(-k)).collect();
        println!("{name}, h = 2^-{first} .. 2^-{}", first + 3);
        for t in ButcherTableau::builtin_names()
            .iter()
            .map(|n| ButcherTableau::builtin(n).unwrap())
        {
            let local = empirical_order(&t, &p, OrderMode::Local, &hs).unwrap();
            let global = empirical_order(&t, &p, OrderMode::Global, &hs).unwrap();
            println!(
                "  {:>8}: local {local:.3} (expect {}), global {global:.3} (expect {})",
                t.name(),
                t.order() + 1,
                t.order()
            );
        }
    }
}

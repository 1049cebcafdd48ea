//! Built-in Butcher tableaus, validation, and one step on `y' = y`.
//!
//! ```text
//! cargo run --example tableaus
//! ```

use rk_error_lab::{validate_tableau, ButcherTableau, ValidationOptions};

fn main() {
    let f = |_x: f64, y: &[f64], d: &mut [f64]| d[0] = y[0];
    for name in ButcherTableau::builtin_names() {
        let t = ButcherTableau::builtin(name).unwrap().validate().unwrap();
        let y1 = t.step(&f, 0.0, &[1.0], 0.1).unwrap()[0];
        println!(
            "{name:>8}: order {}, {} stages, c = {:?}, step(0.1) = {y1:.16} (error {:+.3e})",
            t.order(),
            t.stages(),
            t.c(),
            y1 - 0.1f64.exp()
        );
    }

    // c_3 = 0.9 breaks the row-sum rule; the flag lets it through
    let odd = ButcherTableau::new(
        "odd_kutta",
        vec![
            vec![0.0, 0.0, 0.0],
            vec![0.5, 0.0, 0.0],
            vec![-1.0, 2.0, 0.0],
        ],
        vec![1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
        vec![0.0, 0.5, 0.9],
        3,
    );
    match validate_tableau(odd.clone(), ValidationOptions::default()) {
        Ok(_) => println!("odd_kutta accepted"),
        Err(e) => println!("odd_kutta rejected: {e}"),
    }
    let relaxed = ValidationOptions {
        allow_nonstandard_abscissae: true,
    };
    println!("with the flag: {}", validate_tableau(odd, relaxed).is_ok());
}

//! Per-layer power caps: the closed form breaks a micro cap, and the LP
//! finds the cheapest allocation within the caps.
//!
//! `cargo run --example lp_caps`

use nalgebra::{DMatrix, DVector};

use multilayer_power::gain_matrix::{build_two_layer, LayeredGains};
use multilayer_power::solvers::{select_solver, solve_two_layer, PowerCaps, SolverMode};

fn main() -> multilayer_power::Result<()> {
    let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.1, 1.0]);
    let h = DMatrix::from_row_slice(2, 2, &[0.9, 0.05, 0.05, 0.9]);
    let gains = LayeredGains::new(
        vec![g, h],
        DVector::from_element(2, 1.0),
        DVector::from_element(2, 1.0),
    )?;
    let sys = build_two_layer(&gains)?;

    let closed = solve_two_layer(&sys)?;
    println!(
        "closed form: {:?}, total {:.4} W",
        closed.powers_w, closed.total_power_w
    );

    let caps = PowerCaps {
        per_layer_w: vec![20.0, 0.2],
    };
    let auto = select_solver(&sys, &caps, SolverMode::Auto)?;
    println!(
        "auto with caps {:?}: {:?} via {}, total {:.4} W (closed form was {:.4} W)",
        caps.per_layer_w,
        auto.powers_w,
        auto.path.as_str(),
        auto.total_power_w,
        auto.analytic_total_w.unwrap_or(f64::NAN)
    );

    let uncapped = select_solver(&sys, &PowerCaps::uncapped(2), SolverMode::Lp)?;
    println!(
        "LP without caps: {:?}, total {:.4} W",
        uncapped.powers_w, uncapped.total_power_w
    );

    let tight = PowerCaps {
        per_layer_w: vec![0.5, 0.2],
    };
    match select_solver(&sys, &tight, SolverMode::Auto) {
        Ok(a) => println!("tight caps solved: {:?}", a.powers_w),
        Err(e) => println!("tight caps: {e}"),
    }
    Ok(())
}

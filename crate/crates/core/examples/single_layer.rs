//! Macro-only power control: feasibility from the spectral radius, the
//! closed-form allocation, and the distributed fixed-point iteration that
//! converges to it.
//!
//! `cargo run --example single_layer`

use nalgebra::{DMatrix, DVector};

use multilayer_power::gain_matrix::{build_single_layer, LayeredGains};
use multilayer_power::solvers::{
    iterate_distributed, solve_single_layer, spectral_radius, IterationOptions,
};

fn main() -> multilayer_power::Result<()> {
    // three users, unit serving gains, symmetric cross gains eps
    for eps in [0.3, 0.45, 0.6] {
        let g = DMatrix::from_fn(3, 3, |i, j| if i == j { 1.0 } else { eps });
        let gains = LayeredGains::new(
            vec![g],
            DVector::from_element(3, 1.0),
            DVector::from_element(3, 0.1),
        )?;
        let sys = build_single_layer(&gains)?;
        let rho = spectral_radius(&sys.f())?.spectral_radius;
        println!("eps {eps}: rho(F) = {rho:.6}");
        match solve_single_layer(&sys) {
            Ok(a) => {
                println!(
                    "  closed form p = {:?}, total {:.6} W",
                    a.powers_w, a.total_power_w
                );
                for start in [0.0, 5.0] {
                    let out = iterate_distributed(
                        &sys,
                        &DVector::from_element(3, start),
                        IterationOptions::default(),
                    )?;
                    let gap = (DVector::from_vec(out.allocation.powers_w.clone())
                        - DVector::from_vec(a.powers_w.clone()))
                    .amax();
                    println!(
                        "  iteration from {start}: {} steps, max gap {gap:.2e}",
                        out.iterations
                    );
                }
            }
            Err(e) => {
                println!("  closed form: {e}");
                let out =
                    iterate_distributed(&sys, &DVector::zeros(3), IterationOptions::default());
                println!(
                    "  iteration: {}",
                    out.err().map_or("converged".into(), |e| e.to_string())
                );
            }
        }
    }
    Ok(())
}

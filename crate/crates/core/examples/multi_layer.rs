//! Three layers (macro, micro, pico) through the general closed form, and
//! its reduction to the two-layer solution when the third layer is silent.
//!
//! `cargo run --example multi_layer`

use nalgebra::{DMatrix, DVector};

use multilayer_power::gain_matrix::{build_multi_layer, LayeredGains};
use multilayer_power::solvers::{solve_multi_layer, solve_two_layer};

fn main() -> multilayer_power::Result<()> {
    let n = 4;
    let macro_g = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.08 });
    let micro_g = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            2.0
        } else {
            0.02 * (1 + i + j) as f64
        }
    });
    let pico_g = DMatrix::from_fn(n, n, |i, j| if i == j { 3.0 } else { 0.01 });
    let gamma = DVector::from_element(n, 1.0);
    let noise = DVector::from_element(n, 0.01);

    let three = LayeredGains::new(
        vec![macro_g.clone(), micro_g.clone(), pico_g],
        gamma.clone(),
        noise.clone(),
    )?;
    let alloc = solve_multi_layer(&build_multi_layer(&three, 3)?)?;
    for l in 0..3 {
        println!("layer {l}: {:?}", alloc.layer_powers(l));
    }
    println!(
        "total {:.6} W, residual {:.2e}",
        alloc.total_power_w, alloc.residual
    );

    let silent = LayeredGains::new(
        vec![macro_g.clone(), micro_g.clone(), DMatrix::zeros(n, n)],
        gamma.clone(),
        noise.clone(),
    )?;
    let reduced = solve_multi_layer(&build_multi_layer(&silent, 3)?)?;
    let two = LayeredGains::new(vec![macro_g, micro_g], gamma, noise)?;
    let reference = solve_two_layer(&build_multi_layer(&two, 2)?)?;
    let gap = reduced.powers_w[..2 * n]
        .iter()
        .zip(&reference.powers_w)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("silent pico layer: max gap to two-layer solution {gap:.2e}");
    Ok(())
}

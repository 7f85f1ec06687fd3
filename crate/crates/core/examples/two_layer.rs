//! Macro plus microcell power control on one simulated drop: learning phase,
//! discarding, and the baseline versus two-layer totals.
//!
//! `cargo run --release --example two_layer -- [seed]`

use multilayer_power::gain_matrix::{build_single_layer, build_two_layer, write_gains};
use multilayer_power::harness::{discard_users, run_learning_phase, Deployment, ScenarioConfig};
use multilayer_power::solvers::{right_pseudo_inverse, select_solver, spectral_radius};

fn main() -> multilayer_power::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .map_or(1, |s| s.parse().expect("seed"));
    let config = ScenarioConfig::default();
    let dep = Deployment::new(&config)?;
    let drop = dep.place_users(seed)?;
    let learning = run_learning_phase(&dep, &drop)?;
    let (gains, discarded) = discard_users(
        &learning.gains,
        3,
        config.discard_metric,
        config.learning_power_w,
    )?;
    println!("discarded users {discarded:?}, {} remain", gains.users());

    let base = build_single_layer(&gains.truncated(1))?;
    let two = build_two_layer(&gains)?;
    let rho_f = spectral_radius(&base.f())?.spectral_radius;
    let rho_b = spectral_radius(&(right_pseudo_inverse(&two.m)? * &two.n))?.spectral_radius;
    println!("rho(F) = {rho_f:.4}, rho(M+ N) = {rho_b:.4}");

    let b = select_solver(&base, &config.caps(1), config.solver)?;
    let t = select_solver(&two, &config.caps(2), config.solver)?;
    println!("baseline  {:.4} W via {}", b.total_power_w, b.path.as_str());
    println!(
        "two-layer {:.4} W via {} (macro {:.4} W, micro {:.4} W)",
        t.total_power_w,
        t.path.as_str(),
        t.layer_total(0),
        t.layer_total(1)
    );
    let asleep = t
        .macro_asleep(config.sleep_threshold_w)
        .iter()
        .filter(|&&s| s)
        .count();
    println!("{asleep} of {} macro sectors below 1 mW", gains.users());
    println!(
        "gain {:.2} dB",
        10.0 * (b.total_power_w / t.total_power_w).log10()
    );
    let min_sinr = t
        .achieved_sinr
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    println!(
        "lowest achieved SINR {min_sinr:.9} (target {})",
        config.sinr_target()
    );

    // the reduced instance in the text format read by `multilayer-power solve`
    let text = write_gains(&gains);
    println!("gains file: {} lines", text.lines().count());
    Ok(())
}

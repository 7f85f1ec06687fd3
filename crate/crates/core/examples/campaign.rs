//! Reference drop campaign: gain of the microcell overlay over a macro-only
//! network as the number of discarded users grows.
//!
//! `cargo run --release --example campaign -- [drops] [base_seed]`

use multilayer_power::harness::{run_campaign, ScenarioConfig};

fn main() -> multilayer_power::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = ScenarioConfig {
        drops: args.next().map_or(20, |s| s.parse().expect("drops")),
        base_seed: args.next().map_or(1, |s| s.parse().expect("seed")),
        ..Default::default()
    };
    let campaign = run_campaign(&config)?;
    let s = &campaign.summary;
    println!(
        "{} users, {} microcells, SINR target {}, {} drops per level",
        s.users, s.microcells, s.sinr_target, config.drops
    );
    println!("outage %  solved  infeasible  mean gain dB  std dB  LP drops  macros asleep");
    for l in &s.levels {
        println!(
            "{:8.2}  {:6}  {:10}  {:>12}  {:>6}  {:8}  {:>13}",
            l.outage_pct,
            l.solved,
            l.infeasible,
            l.mean_gain_db.map_or("-".into(), |g| format!("{g:.2}")),
            l.std_gain_db.map_or("-".into(), |g| format!("{g:.2}")),
            l.twolayer_lp_drops,
            l.mean_macro_asleep
                .map_or("-".into(), |g| format!("{g:.1}")),
        );
    }
    Ok(())
}

//! CSV and JSON renderings of a campaign.
//!
//! Every CSV starts with `#` comment lines carrying the version, base seed,
//! SINR target and the fully resolved config as one-line JSON. Floats use
//! the shortest representation that round-trips, so logged totals reproduce
//! the gain column exactly.

use std::fmt::Write as _;

use serde::Serialize;

use super::{Campaign, CampaignSummary, DropResult, ScenarioConfig};

pub const DROPS_HEADER: &str =
    "outage_pct,drop,seed,baseline_W,twolayer_W,gain_dB,solver_path,feasible";
pub const SUMMARY_HEADER: &str = "outage_pct,discard_count,drops,solved,infeasible,\
mean_gain_dB,std_gain_dB,mean_baseline_W,mean_twolayer_W,twolayer_lp_drops,mean_macro_asleep";
pub const PLOT_HEADER: &str = "outage_pct,mean_gain_dB,std_gain_dB";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn provenance(config: &ScenarioConfig) -> String {
    format!(
        "# multilayer-power {}\n# base_seed = {}\n# sinr_target = {}\n# config = {}\n",
        crate::VERSION,
        config.base_seed,
        config.sinr_target(),
        serde_json::to_string(config).expect("config serializes"),
    )
}

fn drop_row(d: &DropResult) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        d.outage_pct,
        d.drop,
        d.seed,
        opt(d.baseline.total_w),
        opt(d.twolayer.total_w),
        opt(d.gain_db),
        d.solver_path(),
        d.feasible,
    )
}

/// One row per drop and discard level.
pub fn drops_csv(config: &ScenarioConfig, campaign: &Campaign) -> String {
    let mut out = provenance(config);
    out.push_str(DROPS_HEADER);
    out.push('\n');
    for d in &campaign.drops {
        out.push_str(&drop_row(d));
        out.push('\n');
    }
    out
}

/// One row per discard level.
pub fn summary_csv(config: &ScenarioConfig, summary: &CampaignSummary) -> String {
    let mut out = provenance(config);
    out.push_str(SUMMARY_HEADER);
    out.push('\n');
    for l in &summary.levels {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            l.outage_pct,
            l.discard_count,
            l.drops,
            l.solved,
            l.infeasible,
            opt(l.mean_gain_db),
            opt(l.std_gain_db),
            opt(l.mean_baseline_w),
            opt(l.mean_twolayer_w),
            l.twolayer_lp_drops,
            opt(l.mean_macro_asleep),
        );
    }
    out
}

/// Mean gain with its standard deviation against outage; empty levels are
/// left out.
pub fn plot_csv(config: &ScenarioConfig, summary: &CampaignSummary) -> String {
    let mut out = provenance(config);
    out.push_str(PLOT_HEADER);
    out.push('\n');
    for l in summary.levels.iter().filter(|l| !l.empty) {
        let _ = writeln!(
            out,
            "{},{},{}",
            l.outage_pct,
            opt(l.mean_gain_db),
            opt(l.std_gain_db)
        );
    }
    out
}

#[derive(Serialize)]
pub struct CampaignReport<'a> {
    pub version: &'a str,
    pub base_seed: u64,
    pub config: &'a ScenarioConfig,
    pub summary: &'a CampaignSummary,
    pub drops: &'a [DropResult],
}

pub fn campaign_json(config: &ScenarioConfig, campaign: &Campaign) -> String {
    let report = CampaignReport {
        version: crate::VERSION,
        base_seed: config.base_seed,
        config,
        summary: &campaign.summary,
        drops: &campaign.drops,
    };
    let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
    s.push('\n');
    s
}

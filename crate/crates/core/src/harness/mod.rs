//! Monte Carlo drop campaigns.
//!
//! One drop places a user in every macro sector, measures every link at the
//! learning power, discards the worst users, and then solves the power
//! balance twice on the same channel realization: macro layer only
//! (baseline) and macro plus microcell overlay (two-layer). The gain is
//! `10 log10(baseline total / two-layer total)`.

mod config;
mod output;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gain_matrix::{
    build_single_layer, build_two_layer, microcell_association_mask, LayeredGains,
};
use crate::geometry::{
    build_hex_layout, build_manhattan_overlay, drop_users, HexLayout, ManhattanOverlay, UserDrop,
    WrapAround,
};
use crate::propagation::{link_gain, Transmitter};
use crate::solvers::{select_solver, PowerAllocation, SolverPath};

pub use config::{CapsDbm, DiscardMetric, MicroAssignment, NoiseConfig, ScenarioConfig};
pub use output::{
    campaign_json, drops_csv, plot_csv, summary_csv, CampaignReport, DROPS_HEADER, PLOT_HEADER,
    SUMMARY_HEADER,
};

/// RNG stream for microcell shadowing, after placement (0) and macro
/// shadowing (1), so the overlay never perturbs macro draws.
pub const STREAM_MICRO_SHADOW: u64 = 2;

/// Static geometry shared by every drop of a campaign.
#[derive(Clone, Debug)]
pub struct Deployment {
    pub config: ScenarioConfig,
    pub layout: HexLayout,
    pub wrap: WrapAround,
    pub overlay: Option<ManhattanOverlay>,
    macro_tx: Vec<Transmitter>,
    micro_tx: Vec<Transmitter>,
}

impl Deployment {
    pub fn new(config: &ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let layout = build_hex_layout(config.cell_count, config.cell_radius_km)?;
        let wrap = WrapAround::for_layout(&layout);
        let overlay = if config.overlay {
            Some(build_manhattan_overlay(
                &layout,
                config.block_size_m,
                config.street_width_m,
            )?)
        } else {
            None
        };
        let macro_tx = layout.sectors();
        let micro_tx = overlay.as_ref().map_or_else(Vec::new, |o| o.transmitters());
        Ok(Deployment {
            config: config.clone(),
            layout,
            wrap,
            overlay,
            macro_tx,
            micro_tx,
        })
    }

    pub fn users(&self) -> usize {
        self.macro_tx.len()
    }

    pub fn place_users(&self, seed: u64) -> Result<UserDrop> {
        drop_users(
            &self.layout,
            &self.wrap,
            &self.config.propagation,
            seed,
            self.config.max_placement_attempts,
        )
    }
}

/// Channel knowledge gathered in the learning phase.
#[derive(Clone, Debug, PartialEq)]
pub struct LearningPhase {
    /// Layer 0 is the macro layer; layer 1, present with the overlay, pairs
    /// each user with its assigned microcell.
    pub gains: LayeredGains,
    /// Microcell index assigned to each user. Under
    /// [`MicroAssignment::Best`] two users can share a microcell, and each
    /// pairing is then its own power variable.
    pub micro_assignment: Vec<usize>,
}

/// Strongest microcell of every user; ties go to the lower index.
fn best_microcells(gain: &DMatrix<f64>) -> Vec<usize> {
    gain.row_iter()
        .map(|row| {
            let mut best = 0;
            for (m, &g) in row.iter().enumerate() {
                if g > row[best] {
                    best = m;
                }
            }
            best
        })
        .collect()
}

/// Pairs users with distinct microcells, strongest link first. Ties go to the
/// lower user index, then the lower microcell index.
fn unique_microcells(gain: &DMatrix<f64>) -> Vec<usize> {
    let (users, micros) = gain.shape();
    let mut pairs: Vec<(usize, usize)> = (0..users)
        .flat_map(|i| (0..micros).map(move |m| (i, m)))
        .collect();
    pairs.sort_by(|a, b| gain[*b].total_cmp(&gain[*a]).then(a.cmp(b)));
    let mut user_of_micro = vec![false; micros];
    let mut assignment = vec![usize::MAX; users];
    let mut left = users;
    for (i, m) in pairs {
        if assignment[i] == usize::MAX && !user_of_micro[m] {
            assignment[i] = m;
            user_of_micro[m] = true;
            left -= 1;
            if left == 0 {
                break;
            }
        }
    }
    assignment
}

/// Measures every link of `drop` with exact channel knowledge.
///
/// Macro shadowing comes from the drop itself; microcell shadowing is drawn
/// here from the drop seed's dedicated stream, `[user][micro]` order.
pub fn run_learning_phase(dep: &Deployment, drop: &UserDrop) -> Result<LearningPhase> {
    let cfg = &dep.config;
    let params = &cfg.propagation;
    let n = dep.users();
    if drop.user_positions.len() != n {
        return Err(Error::Domain(format!(
            "drop has {} users, deployment has {n} sectors",
            drop.user_positions.len()
        )));
    }
    // user j is served by sector serving_sector[j]
    let macro_gain = DMatrix::from_fn(n, n, |i, j| {
        let k = drop.serving_sector[j];
        link_gain(
            &dep.macro_tx[k],
            drop.user_positions[i],
            drop.macro_shadow_db[i][k],
            params,
            &dep.wrap,
        )
        .gain_linear
    });
    let mut layers = vec![macro_gain];
    let mut micro_assignment = Vec::new();

    if !dep.micro_tx.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(drop.rng_seed);
        rng.set_stream(STREAM_MICRO_SHADOW);
        let shadow = (params.shadow_sigma_db > 0.0)
            .then(|| Normal::new(0.0, params.shadow_sigma_db).expect("sigma validated"));
        let micros = dep.micro_tx.len();
        let mut all = DMatrix::zeros(n, micros);
        for i in 0..n {
            for m in 0..micros {
                let s = shadow.map_or(0.0, |d| d.sample(&mut rng));
                all[(i, m)] = link_gain(
                    &dep.micro_tx[m],
                    drop.user_positions[i],
                    s,
                    params,
                    &dep.wrap,
                )
                .gain_linear;
            }
        }
        micro_assignment = match cfg.micro_assignment {
            MicroAssignment::Best => best_microcells(&all),
            MicroAssignment::Unique => unique_microcells(&all),
        };
        layers.push(DMatrix::from_fn(n, n, |i, j| all[(i, micro_assignment[j])]));
    }

    let gains = LayeredGains::new(
        layers,
        DVector::from_element(n, cfg.sinr_target()),
        DVector::from_element(n, cfg.noise_w()),
    )?;
    Ok(LearningPhase {
        gains,
        micro_assignment,
    })
}

/// Macro-only SINR of every user with all sectors at `power_w`.
pub fn learning_sinr(gains: &LayeredGains, power_w: f64) -> Vec<f64> {
    let g = &gains.layers[0];
    (0..gains.users())
        .map(|i| {
            let interference: f64 = (0..gains.users())
                .filter(|&j| j != i)
                .map(|j| g[(i, j)])
                .sum();
            power_w * g[(i, i)] / (power_w * interference + gains.noise_w[i])
        })
        .collect()
}

/// Removes the `k` worst users and returns the reduced system with the
/// removed (original) indices in ascending order.
///
/// Ranking uses the macro layer only, so both scenarios of a drop serve the
/// same users. Exact ties discard the lower index first.
pub fn discard_users(
    gains: &LayeredGains,
    k: usize,
    metric: DiscardMetric,
    learning_power_w: f64,
) -> Result<(LayeredGains, Vec<usize>)> {
    let n = gains.users();
    if k >= n {
        return Err(Error::config(
            "discard_count",
            format!("cannot discard {k} of {n} users"),
        ));
    }
    let score: Vec<f64> = match metric {
        DiscardMetric::Sinr => learning_sinr(gains, learning_power_w),
        DiscardMetric::PathLoss => (0..n).map(|i| gains.layers[0][(i, i)]).collect(),
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| score[a].total_cmp(&score[b]).then(a.cmp(&b)));
    let mut discarded = order[..k].to_vec();
    discarded.sort_unstable();
    let keep: Vec<usize> = (0..n)
        .filter(|i| discarded.binary_search(i).is_err())
        .collect();
    Ok((gains.restrict(&keep), discarded))
}

/// What one scenario of a drop produced.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioOutcome {
    pub total_w: Option<f64>,
    pub path: Option<SolverPath>,
    pub spectral_radius: Option<f64>,
    /// Closed-form total when the LP replaced a cap-violating closed form.
    pub analytic_total_w: Option<f64>,
    /// Macro transmitters below the sleep threshold.
    pub macro_asleep: usize,
    /// Why the scenario has no allocation.
    pub cause: Option<String>,
    /// The failure was numerical rather than an infeasible target set.
    pub numerical_failure: bool,
}

impl ScenarioOutcome {
    fn solved(a: &PowerAllocation, sleep_threshold_w: f64) -> Self {
        ScenarioOutcome {
            total_w: Some(a.total_power_w),
            path: Some(a.path),
            spectral_radius: a.spectral_radius,
            analytic_total_w: a.analytic_total_w,
            macro_asleep: a
                .macro_asleep(sleep_threshold_w)
                .iter()
                .filter(|&&s| s)
                .count(),
            cause: None,
            numerical_failure: false,
        }
    }

    fn failed(e: &Error) -> Self {
        let spectral_radius = match e {
            Error::Infeasible { spectral_radius } => Some(*spectral_radius),
            Error::Unsatisfiable {
                spectral_radius, ..
            } => *spectral_radius,
            _ => None,
        };
        ScenarioOutcome {
            total_w: None,
            path: None,
            spectral_radius,
            analytic_total_w: None,
            macro_asleep: 0,
            cause: Some(e.to_string()),
            numerical_failure: !e.is_infeasible(),
        }
    }

    pub fn path_str(&self) -> &'static str {
        self.path.map_or("none", SolverPath::as_str)
    }
}

/// Solves the baseline (layer 0 only) and two-layer scenarios on the same
/// gains. Without a second layer both scenarios are the baseline.
pub fn compare_scenarios(
    gains: &LayeredGains,
    config: &ScenarioConfig,
) -> Result<(ScenarioOutcome, ScenarioOutcome)> {
    let thr = config.sleep_threshold_w;
    let outcome = |r: Result<PowerAllocation>| match r {
        Ok(a) => ScenarioOutcome::solved(&a, thr),
        Err(e) => ScenarioOutcome::failed(&e),
    };
    let base_sys = build_single_layer(&gains.truncated(1))?;
    let baseline = outcome(select_solver(&base_sys, &config.caps(1), config.solver));
    if gains.layer_count() < 2 {
        return Ok((baseline.clone(), baseline));
    }
    let mut sys = build_two_layer(&gains.truncated(2))?;
    if config.force_macro_sleep {
        sys = sys.with_forced_sleep(&microcell_association_mask(gains));
    }
    let twolayer = outcome(select_solver(&sys, &config.caps(2), config.solver));
    Ok((baseline, twolayer))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DropResult {
    pub drop: usize,
    pub seed: u64,
    pub discard_count: usize,
    pub outage_pct: f64,
    /// Original indices of the discarded users, ascending.
    pub discarded: Vec<usize>,
    pub baseline: ScenarioOutcome,
    pub twolayer: ScenarioOutcome,
    /// Present only when both scenarios solved.
    pub gain_db: Option<f64>,
    pub feasible: bool,
}

impl DropResult {
    fn new(
        drop: usize,
        seed: u64,
        config: &ScenarioConfig,
        discarded: Vec<usize>,
        (baseline, twolayer): (ScenarioOutcome, ScenarioOutcome),
    ) -> Self {
        let gain_db = match (baseline.total_w, twolayer.total_w) {
            (Some(b), Some(t)) if b > 0.0 && t > 0.0 => Some(10.0 * (b / t).log10()),
            _ => None,
        };
        DropResult {
            drop,
            seed,
            discard_count: discarded.len(),
            outage_pct: config.outage_pct(discarded.len()),
            discarded,
            baseline,
            twolayer,
            feasible: gain_db.is_some(),
            gain_db,
        }
    }

    /// Solver routes as `baseline/two-layer`.
    pub fn solver_path(&self) -> String {
        format!("{}/{}", self.baseline.path_str(), self.twolayer.path_str())
    }
}

/// Seed of drop `index`.
pub fn drop_seed(base_seed: u64, index: usize) -> u64 {
    base_seed.wrapping_add(index as u64)
}

/// Runs one drop at every discard level in `levels`, reusing the placement
/// and learning phase across levels.
pub fn run_drop_levels(
    dep: &Deployment,
    index: usize,
    levels: impl IntoIterator<Item = usize>,
) -> Result<Vec<DropResult>> {
    let cfg = &dep.config;
    let seed = drop_seed(cfg.base_seed, index);
    let drop = dep.place_users(seed)?;
    let learning = run_learning_phase(dep, &drop)?;
    levels
        .into_iter()
        .map(|k| {
            let (reduced, discarded) =
                discard_users(&learning.gains, k, cfg.discard_metric, cfg.learning_power_w)?;
            let outcomes = compare_scenarios(&reduced, cfg)?;
            Ok(DropResult::new(index, seed, cfg, discarded, outcomes))
        })
        .collect()
}

/// One drop with `seed` at `discard_count`.
pub fn run_drop(seed: u64, discard_count: usize, config: &ScenarioConfig) -> Result<DropResult> {
    let cfg = ScenarioConfig {
        base_seed: seed,
        ..config.clone()
    };
    let dep = Deployment::new(&cfg)?;
    Ok(run_drop_levels(&dep, 0, [discard_count])?.remove(0))
}

/// Aggregates for one discard level.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelSummary {
    pub discard_count: usize,
    pub outage_pct: f64,
    pub drops: usize,
    pub solved: usize,
    pub infeasible: usize,
    /// Unsolved drops whose failure was numerical; included in `infeasible`.
    pub numerical_failures: usize,
    /// No drop solved at this level.
    pub empty: bool,
    pub mean_gain_db: Option<f64>,
    /// Sample standard deviation; zero for a single solved drop.
    pub std_gain_db: Option<f64>,
    pub mean_baseline_w: Option<f64>,
    pub mean_twolayer_w: Option<f64>,
    /// Solved drops whose two-layer allocation came from the LP.
    pub twolayer_lp_drops: usize,
    pub mean_macro_asleep: Option<f64>,
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

impl LevelSummary {
    pub fn from_drops(discard_count: usize, outage_pct: f64, drops: &[&DropResult]) -> Self {
        let solved: Vec<&DropResult> = drops.iter().copied().filter(|d| d.feasible).collect();
        let gains: Vec<f64> = solved.iter().filter_map(|d| d.gain_db).collect();
        let mean_gain_db = mean(&gains);
        let std_gain_db = mean_gain_db.map(|m| {
            if gains.len() < 2 {
                0.0
            } else {
                let ss: f64 = gains.iter().map(|g| (g - m) * (g - m)).sum();
                (ss / (gains.len() - 1) as f64).sqrt()
            }
        });
        let collect = |f: &dyn Fn(&DropResult) -> Option<f64>| -> Vec<f64> {
            solved.iter().filter_map(|d| f(d)).collect()
        };
        LevelSummary {
            discard_count,
            outage_pct,
            drops: drops.len(),
            solved: solved.len(),
            infeasible: drops.len() - solved.len(),
            numerical_failures: drops
                .iter()
                .filter(|d| d.baseline.numerical_failure || d.twolayer.numerical_failure)
                .count(),
            empty: solved.is_empty(),
            mean_gain_db,
            std_gain_db,
            mean_baseline_w: mean(&collect(&|d| d.baseline.total_w)),
            mean_twolayer_w: mean(&collect(&|d| d.twolayer.total_w)),
            twolayer_lp_drops: solved
                .iter()
                .filter(|d| {
                    matches!(
                        d.twolayer.path,
                        Some(SolverPath::Lp | SolverPath::LpFallback)
                    )
                })
                .count(),
            mean_macro_asleep: mean(&collect(&|d| Some(d.twolayer.macro_asleep as f64))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CampaignSummary {
    pub users: usize,
    pub microcells: usize,
    pub sinr_target: f64,
    pub noise_w: f64,
    pub levels: Vec<LevelSummary>,
}

impl CampaignSummary {
    /// True when no level solved a single drop.
    pub fn all_empty(&self) -> bool {
        self.levels.iter().all(|l| l.empty)
    }
}

/// Every per-drop record plus the aggregates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Campaign {
    pub summary: CampaignSummary,
    /// Ordered by discard level, then drop index.
    pub drops: Vec<DropResult>,
}

/// Runs `config.drops` drops at every discard level.
///
/// Drops execute in parallel; results are gathered in drop order, so the
/// output does not depend on scheduling.
pub fn run_campaign(config: &ScenarioConfig) -> Result<Campaign> {
    let dep = Deployment::new(config)?;
    let levels: Vec<usize> = config.discard_levels().collect();
    let per_drop: Vec<Vec<DropResult>> = (0..config.drops)
        .into_par_iter()
        .map(|d| run_drop_levels(&dep, d, levels.iter().copied()))
        .collect::<Result<_>>()?;

    let mut drops = Vec::with_capacity(levels.len() * config.drops);
    let mut summaries = Vec::with_capacity(levels.len());
    for (li, &k) in levels.iter().enumerate() {
        let at_level: Vec<&DropResult> = per_drop.iter().map(|v| &v[li]).collect();
        summaries.push(LevelSummary::from_drops(k, config.outage_pct(k), &at_level));
        drops.extend(at_level.into_iter().cloned());
    }
    Ok(Campaign {
        summary: CampaignSummary {
            users: dep.users(),
            microcells: dep.overlay.as_ref().map_or(0, |o| o.total()),
            sinr_target: config.sinr_target(),
            noise_w: config.noise_w(),
            levels: summaries,
        },
        drops,
    })
}

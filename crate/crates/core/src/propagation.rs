//! Link budget: path loss per layer, horizontal sector pattern, log-normal
//! shadowing and minimum coupling loss, folded into a linear channel gain.
//!
//! Shadowing values are drawn by the caller and passed in, so everything
//! here is a pure function of its inputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, WrapAround};

/// Distances below this (km) are treated as this value; MCL clamps the result.
const MIN_DISTANCE_KM: f64 = 1e-6;

/// Largest allowed gap between a reduced-formula constant and its general form.
pub const REDUCTION_TOLERANCE_DB: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    Macro,
    Micro,
    Pico,
}

impl Layer {
    pub fn index(self) -> usize {
        match self {
            Layer::Macro => 0,
            Layer::Micro => 1,
            Layer::Pico => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Layer> {
        match i {
            0 => Some(Layer::Macro),
            1 => Some(Layer::Micro),
            2 => Some(Layer::Pico),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Layer::Macro => "macro",
            Layer::Micro => "micro",
            Layer::Pico => "pico",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagationParams {
    pub carrier_mhz: f64,
    /// Macro antenna height above average rooftop (m).
    pub macro_delta_h_bs_m: f64,
    /// Reduced macro model `slope * log10(d_km) + intercept`.
    pub macro_slope_db: f64,
    pub macro_intercept_db: f64,
    /// Reduced micro model `40 * log10(d_km) + intercept`.
    pub micro_intercept_db: f64,
    /// Extra loss applied on top of the micro model for picocells.
    /// Not a published value; zero by default.
    pub pico_offset_db: f64,
    pub shadow_sigma_db: f64,
    pub mcl_macro_db: f64,
    pub mcl_micro_db: f64,
    pub g_tx_macro_dbi: f64,
    pub g_tx_micro_dbi: f64,
    pub g_rx_dbi: f64,
    pub theta_3db_deg: f64,
    pub a_max_db: f64,
}

impl Default for PropagationParams {
    fn default() -> Self {
        PropagationParams {
            carrier_mhz: 2000.0,
            macro_delta_h_bs_m: 15.0,
            macro_slope_db: 37.6,
            macro_intercept_db: 128.15,
            micro_intercept_db: 148.0,
            pico_offset_db: 0.0,
            shadow_sigma_db: 10.0,
            mcl_macro_db: 70.0,
            mcl_micro_db: 53.0,
            g_tx_macro_dbi: 11.0,
            g_tx_micro_dbi: 11.0,
            g_rx_dbi: 0.0,
            theta_3db_deg: 65.0,
            a_max_db: 20.0,
        }
    }
}

impl PropagationParams {
    /// Parameters whose reduced-form constants are recomputed from the
    /// general macro/micro formulas at the given carrier and antenna height.
    pub fn derived(carrier_mhz: f64, macro_delta_h_bs_m: f64) -> Self {
        PropagationParams {
            carrier_mhz,
            macro_delta_h_bs_m,
            macro_slope_db: macro_slope_general(macro_delta_h_bs_m),
            macro_intercept_db: macro_path_loss_general_db(1.0, macro_delta_h_bs_m, carrier_mhz)
                .expect("d = 1 km is in the domain"),
            micro_intercept_db: micro_path_loss_general_db(1.0, carrier_mhz)
                .expect("d = 1 km is in the domain"),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("propagation.carrier_mhz", self.carrier_mhz),
            ("propagation.macro_delta_h_bs_m", self.macro_delta_h_bs_m),
            ("propagation.mcl_macro_db", self.mcl_macro_db),
            ("propagation.mcl_micro_db", self.mcl_micro_db),
            ("propagation.theta_3db_deg", self.theta_3db_deg),
        ];
        for (field, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(field, format!("must be positive, got {v}")));
            }
        }
        let finite = [
            ("propagation.macro_slope_db", self.macro_slope_db),
            ("propagation.macro_intercept_db", self.macro_intercept_db),
            ("propagation.micro_intercept_db", self.micro_intercept_db),
            ("propagation.pico_offset_db", self.pico_offset_db),
            ("propagation.g_tx_macro_dbi", self.g_tx_macro_dbi),
            ("propagation.g_tx_micro_dbi", self.g_tx_micro_dbi),
            ("propagation.g_rx_dbi", self.g_rx_dbi),
            ("propagation.a_max_db", self.a_max_db),
        ];
        for (field, v) in finite {
            if !v.is_finite() {
                return Err(Error::config(field, "must be finite"));
            }
        }
        if !(self.shadow_sigma_db.is_finite() && self.shadow_sigma_db >= 0.0) {
            return Err(Error::config(
                "propagation.shadow_sigma_db",
                "must be a finite value >= 0",
            ));
        }
        if self.a_max_db < 0.0 {
            return Err(Error::config("propagation.a_max_db", "must be >= 0"));
        }

        let slope = macro_slope_general(self.macro_delta_h_bs_m);
        let intercept = macro_path_loss_general_db(1.0, self.macro_delta_h_bs_m, self.carrier_mhz)?;
        let micro = micro_path_loss_general_db(1.0, self.carrier_mhz)?;
        let checks = [
            ("propagation.macro_slope_db", self.macro_slope_db, slope),
            (
                "propagation.macro_intercept_db",
                self.macro_intercept_db,
                intercept,
            ),
            (
                "propagation.micro_intercept_db",
                self.micro_intercept_db,
                micro,
            ),
        ];
        for (field, reduced, general) in checks {
            if (reduced - general).abs() > REDUCTION_TOLERANCE_DB {
                return Err(Error::config(
                    field,
                    format!(
                        "{reduced} disagrees with the general model ({general:.3}) at \
                         f = {} MHz, dh = {} m",
                        self.carrier_mhz, self.macro_delta_h_bs_m
                    ),
                ));
            }
        }
        Ok(())
    }

    pub fn mcl_db(&self, layer: Layer) -> f64 {
        match layer {
            Layer::Macro => self.mcl_macro_db,
            Layer::Micro | Layer::Pico => self.mcl_micro_db,
        }
    }

    pub fn g_tx_dbi(&self, layer: Layer) -> f64 {
        match layer {
            Layer::Macro => self.g_tx_macro_dbi,
            Layer::Micro | Layer::Pico => self.g_tx_micro_dbi,
        }
    }

    /// Distance-dependent loss for a layer, without shadowing or gains.
    pub fn path_loss_db(&self, layer: Layer, d_km: f64) -> Result<f64> {
        check_distance(d_km)?;
        let lg = d_km.log10();
        Ok(match layer {
            Layer::Macro => self.macro_slope_db * lg + self.macro_intercept_db,
            Layer::Micro => 40.0 * lg + self.micro_intercept_db,
            Layer::Pico => 40.0 * lg + self.micro_intercept_db + self.pico_offset_db,
        })
    }

    /// Sector pattern with this parameter set's beamwidth and floor.
    pub fn antenna_gain_db(&self, theta_deg: f64) -> f64 {
        pattern_db(theta_deg, self.theta_3db_deg, self.a_max_db)
    }
}

fn check_distance(d_km: f64) -> Result<()> {
    if d_km.is_finite() && d_km > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "distance must be > 0 km, got {d_km}"
        )))
    }
}

/// Urban macro loss with the reference constants: `37.6 log10(d) + 128.15`.
pub fn macro_path_loss_db(d_km: f64) -> Result<f64> {
    check_distance(d_km)?;
    Ok(37.6 * d_km.log10() + 128.15)
}

fn macro_slope_general(delta_h_bs_m: f64) -> f64 {
    40.0 * (1.0 - 4e-3 * delta_h_bs_m)
}

/// General urban macro model with antenna height above rooftop `delta_h_bs_m`
/// and carrier `f_mhz`.
pub fn macro_path_loss_general_db(d_km: f64, delta_h_bs_m: f64, f_mhz: f64) -> Result<f64> {
    check_distance(d_km)?;
    if !(delta_h_bs_m > 0.0 && f_mhz > 0.0) {
        return Err(Error::Domain(
            "antenna height and carrier must be positive".into(),
        ));
    }
    Ok(
        macro_slope_general(delta_h_bs_m) * d_km.log10() - 18.0 * delta_h_bs_m.log10()
            + 21.0 * f_mhz.log10()
            + 80.0,
    )
}

/// Outdoor microcell loss at 2 GHz: `40 log10(d) + 148`.
pub fn micro_path_loss_db(d_km: f64) -> Result<f64> {
    check_distance(d_km)?;
    Ok(40.0 * d_km.log10() + 148.0)
}

/// Microcell model before fixing the carrier: `40 log10(d) + 30 log10(f) + 49`.
pub fn micro_path_loss_general_db(d_km: f64, f_mhz: f64) -> Result<f64> {
    check_distance(d_km)?;
    if !(f_mhz > 0.0) {
        return Err(Error::Domain("carrier must be positive".into()));
    }
    Ok(40.0 * d_km.log10() + 30.0 * f_mhz.log10() + 49.0)
}

/// Wraps an angle in degrees into [-180, 180].
pub fn normalize_angle_deg(theta: f64) -> f64 {
    let t = (theta + 180.0).rem_euclid(360.0) - 180.0;
    if t == -180.0 && theta > 0.0 {
        180.0
    } else {
        t
    }
}

fn pattern_db(theta_deg: f64, theta_3db: f64, a_max: f64) -> f64 {
    let t = normalize_angle_deg(theta_deg);
    // `0.0 - x` rather than `-x` keeps boresight at +0
    0.0 - (12.0 * (t / theta_3db).powi(2)).min(a_max)
}

/// Three-sector horizontal pattern with 65 deg beamwidth and 20 dB floor.
pub fn sector_antenna_gain_db(theta_deg: f64) -> f64 {
    pattern_db(theta_deg, 65.0, 20.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transmitter {
    pub layer: Layer,
    pub position: Point,
    /// Sector boresight (deg); `None` for omnidirectional antennas.
    pub boresight_deg: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinkGain {
    /// Effective loss after the MCL clamp.
    pub loss_db: f64,
    pub gain_linear: f64,
    pub path_loss_db: f64,
    /// Total antenna gain: transmit gain plus pattern plus receive gain.
    pub antenna_db: f64,
    pub shadow_db: f64,
    pub mcl_applied: bool,
}

impl LinkGain {
    /// Combines components as `max(PL + shadow - antennas, MCL)`.
    pub fn compose(path_loss_db: f64, antenna_db: f64, shadow_db: f64, mcl_db: f64) -> Self {
        let raw = path_loss_db + shadow_db - antenna_db;
        let mcl_applied = raw < mcl_db;
        let loss_db = if mcl_applied { mcl_db } else { raw };
        LinkGain {
            loss_db,
            gain_linear: 10f64.powf(-loss_db / 10.0),
            path_loss_db,
            antenna_db,
            shadow_db,
            mcl_applied,
        }
    }
}

/// Gain from `tx` to a user at `user`, using the nearest wrap-around image
/// of the transmitter for both distance and bearing.
pub fn link_gain(
    tx: &Transmitter,
    user: Point,
    shadow_db: f64,
    params: &PropagationParams,
    wrap: &WrapAround,
) -> LinkGain {
    let image = wrap.nearest_image(user, tx.position);
    let d = image.distance(user).max(MIN_DISTANCE_KM);
    let path_loss = params
        .path_loss_db(tx.layer, d)
        .expect("distance clamped positive");
    let pattern = match tx.boresight_deg {
        Some(boresight) => {
            let bearing = (user.y - image.y).atan2(user.x - image.x).to_degrees();
            params.antenna_gain_db(bearing - boresight)
        }
        None => 0.0,
    };
    let antenna = params.g_tx_dbi(tx.layer) + pattern + params.g_rx_dbi;
    LinkGain::compose(path_loss, antenna, shadow_db, params.mcl_db(tx.layer))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::WrapAround;
    use proptest::prelude::*;

    fn no_wrap() -> WrapAround {
        WrapAround::identity()
    }

    #[test]
    fn macro_reference_values() {
        assert_eq!(macro_path_loss_db(1.0).unwrap(), 128.15);
        assert!((macro_path_loss_db(10.0).unwrap() - 165.75).abs() < 1e-12);
        let general = macro_path_loss_general_db(1.0, 15.0, 2000.0).unwrap();
        assert!(
            (general - 128.15).abs() < REDUCTION_TOLERANCE_DB,
            "{general}"
        );
    }

    #[test]
    fn micro_reference_values() {
        assert_eq!(micro_path_loss_db(1.0).unwrap(), 148.0);
        assert!((micro_path_loss_db(0.1).unwrap() - 108.0).abs() < 1e-12);
        let general = micro_path_loss_general_db(1.0, 2000.0).unwrap();
        // 49 + 30 log10(2000) = 148.0309
        assert!((general - 148.0309).abs() < 1e-4);
        assert!((general - 148.0).abs() < REDUCTION_TOLERANCE_DB);
    }

    #[test]
    fn non_positive_distance_is_a_domain_error() {
        assert!(matches!(macro_path_loss_db(0.0), Err(Error::Domain(_))));
        assert!(matches!(micro_path_loss_db(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn antenna_pattern_points() {
        assert_eq!(sector_antenna_gain_db(0.0), 0.0);
        assert!((sector_antenna_gain_db(65.0) + 12.0).abs() < 1e-12);
        assert_eq!(sector_antenna_gain_db(180.0), -20.0);
        assert_eq!(sector_antenna_gain_db(-180.0), -20.0);
        assert_eq!(sector_antenna_gain_db(420.0), sector_antenna_gain_db(60.0));
    }

    #[test]
    fn default_params_validate_and_match_derived() {
        let p = PropagationParams::default();
        p.validate().unwrap();
        let d = PropagationParams::derived(2000.0, 15.0);
        assert!((d.macro_slope_db - 37.6).abs() < 1e-12);
        assert!((d.macro_intercept_db - p.macro_intercept_db).abs() < REDUCTION_TOLERANCE_DB);
    }

    #[test]
    fn inconsistent_intercept_is_rejected() {
        let p = PropagationParams {
            carrier_mhz: 900.0,
            ..Default::default()
        };
        match p.validate() {
            Err(Error::Config { field, .. }) => assert_eq!(field, "propagation.macro_intercept_db"),
            other => panic!("unexpected {other:?}"),
        }
        PropagationParams::derived(900.0, 15.0).validate().unwrap();
    }

    #[test]
    fn mcl_clamp_case() {
        let g = LinkGain::compose(61.0, 11.0, 0.0, 70.0);
        assert!(g.mcl_applied);
        assert_eq!(g.loss_db, 70.0);
        assert!((g.gain_linear / 1e-7 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn micro_link_at_100m() {
        let p = PropagationParams {
            g_tx_micro_dbi: 0.0,
            ..Default::default()
        };
        let tx = Transmitter {
            layer: Layer::Micro,
            position: Point::new(0.0, 0.0),
            boresight_deg: None,
        };
        let g = link_gain(&tx, Point::new(0.1, 0.0), 0.0, &p, &no_wrap());
        assert!(!g.mcl_applied);
        assert!((g.loss_db - 108.0).abs() < 1e-9);
        assert!((g.gain_linear / 10f64.powf(-10.8) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn macro_link_on_boresight_at_1km() {
        let p = PropagationParams::default();
        let tx = Transmitter {
            layer: Layer::Macro,
            position: Point::new(0.0, 0.0),
            boresight_deg: Some(30.0),
        };
        let user = Point::new(30f64.to_radians().cos(), 30f64.to_radians().sin());
        let g = link_gain(&tx, user, 0.0, &p, &no_wrap());
        // hand evaluation: 37.6 * log10(1) + 128.15 - 11 (G_TX) - 0 (pattern) - 0 (G_RX)
        let hand = 128.15 - 11.0;
        assert!((g.loss_db - hand).abs() < 1e-9, "{}", g.loss_db);
        assert!((g.loss_db - 117.15).abs() < 1e-9);
    }

    #[test]
    fn coincident_positions_clamp_to_mcl() {
        let p = PropagationParams::default();
        let tx = Transmitter {
            layer: Layer::Micro,
            position: Point::new(0.3, 0.3),
            boresight_deg: None,
        };
        let g = link_gain(&tx, Point::new(0.3, 0.3), 0.0, &p, &no_wrap());
        assert!(g.mcl_applied);
        assert_eq!(g.loss_db, p.mcl_micro_db);
        assert!(g.gain_linear.is_finite());
    }

    proptest! {
        #[test]
        fn path_loss_strictly_increasing(a in 1e-3f64..50.0, b in 1e-3f64..50.0) {
            prop_assume!((a - b).abs() > 1e-9);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(macro_path_loss_db(lo).unwrap() < macro_path_loss_db(hi).unwrap());
            prop_assert!(micro_path_loss_db(lo).unwrap() < micro_path_loss_db(hi).unwrap());
        }

        #[test]
        fn pattern_even_and_bounded(theta in -720.0f64..720.0) {
            let a = sector_antenna_gain_db(theta);
            prop_assert!((a - sector_antenna_gain_db(-theta)).abs() < 1e-9);
            prop_assert!((-20.0..=0.0).contains(&a));
        }

        #[test]
        fn gain_never_exceeds_mcl(
            x in -3.0f64..3.0, y in -3.0f64..3.0, shadow in -40.0f64..40.0,
            bore in -180.0f64..180.0, micro in any::<bool>(),
        ) {
            let p = PropagationParams::default();
            let layer = if micro { Layer::Micro } else { Layer::Macro };
            let tx = Transmitter {
                layer,
                position: Point::new(0.0, 0.0),
                boresight_deg: (!micro).then_some(bore),
            };
            let g = link_gain(&tx, Point::new(x, y), shadow, &p, &no_wrap());
            prop_assert!(g.gain_linear <= 10f64.powf(-p.mcl_db(layer) / 10.0));
            prop_assert!(g.gain_linear > 0.0);
            // recomposition from logged components is exact
            let recomposed = (g.path_loss_db + g.shadow_db - g.antenna_db).max(p.mcl_db(layer));
            prop_assert_eq!(g.loss_db, recomposed);
            // sigma = 0 draws are deterministic
            let again = link_gain(&tx, Point::new(x, y), shadow, &p, &no_wrap());
            prop_assert_eq!(g.gain_linear.to_bits(), again.gain_linear.to_bits());
        }
    }
}

//! dB / linear conversions.

#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[inline]
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[inline]
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

#[inline]
pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

/// Thermal noise power in watts for a bandwidth and receiver noise figure.
pub fn thermal_noise_watts(density_dbm_hz: f64, bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    dbm_to_watts(density_dbm_hz + 10.0 * bandwidth_hz.log10() + noise_figure_db)
}

/// SINR target for a Shannon rate in bit/s/Hz.
pub fn sinr_for_rate(rate_bps_hz: f64) -> f64 {
    2f64.powf(rate_bps_hz) - 1.0
}

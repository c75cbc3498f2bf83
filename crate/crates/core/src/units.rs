//! Decibel conversions and physical constants.

/// Thermal noise power spectral density at 290 K.
pub const THERMAL_NOISE_DBM_PER_HZ: f64 = -174.0;

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
    db_to_linear(dbm) * 1e-3
}

#[inline]
pub fn watts_to_dbm(w: f64) -> f64 {
    linear_to_db(w * 1e3)
}

#[inline]
pub fn deg_to_rad(deg: f64) -> f64 {
    deg.to_radians()
}

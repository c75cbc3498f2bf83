//! Effective beamforming gain of Gaussian-beam arrays under angular spread.
//!
//! A beam with RMS widths `(B_h, B_v)` has peak gain `2/(B_h B_v)`. An array
//! of `N` elements of linear gain `G_e` has nominal widths fixed by
//! `N G_e = 2/(B_h0 B_v0)`; channel spread widens each dimension in
//! quadrature, `B = sqrt(B_0^2 + sigma^2)`, so the gain saturates at
//! `2/(sigma_h sigma_v)` however large the array grows.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{db_to_linear, dbm_to_watts, linear_to_db};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayConfig {
    pub n_h: usize,
    pub n_v: usize,
    pub element_gain_dbi: f64,
    #[serde(default)]
    pub per_element_power_dbm: Option<f64>,
}

impl ArrayConfig {
    pub fn new(n_h: usize, n_v: usize, element_gain_dbi: f64) -> Result<Self> {
        if n_h == 0 || n_v == 0 {
            return Err(Error::InvalidArgument(format!("array {n_h}x{n_v} needs at least one element per dimension")));
        }
        Ok(Self { n_h, n_v, element_gain_dbi, per_element_power_dbm: None })
    }

    /// Square-ish layout for `n` elements: the most balanced `n_h x n_v`
    /// factorization with `n_h >= n_v`.
    pub fn with_elements(n: usize, element_gain_dbi: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("array needs at least one element".into()));
        }
        let mut n_v = (n as f64).sqrt().floor() as usize;
        while n % n_v != 0 {
            n_v -= 1;
        }
        Self::new(n / n_v, n_v, element_gain_dbi)
    }

    pub fn with_element_power_dbm(mut self, dbm: f64) -> Self {
        self.per_element_power_dbm = Some(dbm);
        self
    }

    pub fn elements(&self) -> usize {
        self.n_h * self.n_v
    }

    /// `N * G_e` in linear units.
    pub fn max_gain_linear(&self) -> f64 {
        self.elements() as f64 * db_to_linear(self.element_gain_dbi)
    }

    pub fn max_gain_dbi(&self) -> f64 {
        linear_to_db(self.max_gain_linear())
    }

    /// Total RF power of the array, if a per-element power is set.
    pub fn total_power_w(&self) -> Option<f64> {
        self.per_element_power_dbm.map(|dbm| self.elements() as f64 * dbm_to_watts(dbm))
    }
}

/// RMS angular spread of departure, in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AngularSpread {
    pub asd: f64,
    pub zsd: f64,
}

impl AngularSpread {
    pub fn new(asd: f64, zsd: f64) -> Result<Self> {
        if !(asd >= 0.0) || !(zsd >= 0.0) {
            return Err(Error::InvalidArgument(format!("angular spreads ({asd}, {zsd}) must be nonnegative")));
        }
        Ok(Self { asd, zsd })
    }

    pub fn from_degrees(asd_deg: f64, zsd_deg: f64) -> Result<Self> {
        Self::new(asd_deg.to_radians(), zsd_deg.to_radians())
    }
}

/// Gaussian beam pattern with RMS widths `b_h`, `b_v` (linear gain).
pub fn gaussian_pattern(phi: f64, theta: f64, b_h: f64, b_v: f64) -> f64 {
    2.0 / (b_h * b_v) * (-phi * phi / (2.0 * b_h * b_h)).exp() * (-theta * theta / (2.0 * b_v * b_v)).exp()
}

fn check_width(name: &str, width: f64) -> Result<()> {
    if width > FRAC_PI_2 {
        return Err(Error::ModelValidity(format!("{name} beamwidth {:.3} rad exceeds pi/2", width)));
    }
    Ok(())
}

/// Nominal RMS beamwidths `(B_h0, B_v0)` in radians.
///
/// The product is pinned by the peak gain; the split follows the aperture,
/// each width inversely proportional to the element count along it.
pub fn nominal_beamwidths(cfg: &ArrayConfig) -> Result<(f64, f64)> {
    let product = 2.0 / cfg.max_gain_linear();
    let aspect = cfg.n_v as f64 / cfg.n_h as f64;
    let b_h = (product * aspect).sqrt();
    let b_v = (product / aspect).sqrt();
    check_width("azimuth", b_h)?;
    check_width("elevation", b_v)?;
    Ok((b_h, b_v))
}

/// Effective widths after convolving with the channel angular spectrum.
pub fn effective_beamwidths(cfg: &ArrayConfig, spread: &AngularSpread) -> Result<(f64, f64)> {
    let (b_h0, b_v0) = nominal_beamwidths(cfg)?;
    let b_h = b_h0.hypot(spread.asd);
    let b_v = b_v0.hypot(spread.zsd);
    check_width("effective azimuth", b_h)?;
    check_width("effective elevation", b_v)?;
    Ok((b_h, b_v))
}

/// Effective peak gain in dBi under `spread`.
pub fn effective_gain(cfg: &ArrayConfig, spread: &AngularSpread) -> Result<f64> {
    if spread.asd == 0.0 && spread.zsd == 0.0 {
        nominal_beamwidths(cfg)?;
        return Ok(cfg.max_gain_dbi());
    }
    let (b_h, b_v) = effective_beamwidths(cfg, spread)?;
    Ok(linear_to_db(2.0 / (b_h * b_v)))
}

/// Joint link gain and transmit power for a link between two arrays.
///
/// Spread is applied on the departure side only; the receive array
/// contributes its full gain.
pub fn array_link_gain(tx: &ArrayConfig, rx: &ArrayConfig, spread: &AngularSpread) -> Result<(f64, f64)> {
    let tx_power = tx
        .total_power_w()
        .ok_or_else(|| Error::InvalidArgument("transmit array has no per-element power".into()))?;
    let joint = effective_gain(tx, spread)? + rx.max_gain_dbi();
    Ok((joint, tx_power))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn street_canyon_spread() -> AngularSpread {
        AngularSpread::from_degrees(14.0, 0.6).unwrap()
    }

    #[test]
    fn pattern_peak_and_one_sigma() {
        let (bh, bv) = (0.1, 0.05);
        assert!((gaussian_pattern(0.0, 0.0, bh, bv) - 2.0 / (bh * bv)).abs() < 1e-12);
        let ratio = gaussian_pattern(bh, 0.0, bh, bv) / gaussian_pattern(0.0, 0.0, bh, bv);
        assert!((ratio - (-0.5f64).exp()).abs() < 1e-15);
        let g = gaussian_pattern(0.0, 0.0, 0.0352, 0.0352);
        assert!((g - 1614.0).abs() < 2.0, "{g}");
        assert!((linear_to_db(g) - 32.1).abs() < 0.05);
    }

    #[test]
    fn nominal_widths() {
        let big = ArrayConfig::new(16, 16, 8.0).unwrap();
        let (h, v) = nominal_beamwidths(&big).unwrap();
        let oracle = (2.0 / (256.0 * 10f64.powf(0.8))).sqrt();
        assert!((h - oracle).abs() < 1e-15 && (v - oracle).abs() < 1e-15);
        assert!((h.to_degrees() - 2.02).abs() < 0.01);
        let small = ArrayConfig::new(4, 4, 8.0).unwrap();
        let (h, _) = nominal_beamwidths(&small).unwrap();
        assert!((h.to_degrees() - 8.06).abs() < 0.01, "{}", h.to_degrees());
        let single = ArrayConfig::new(1, 1, linear_to_db(2.0)).unwrap();
        let (h, v) = nominal_beamwidths(&single).unwrap();
        assert!((h - 1.0).abs() < 1e-12 && (v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rectangular_split_follows_aperture() {
        let cfg = ArrayConfig::new(16, 4, 8.0).unwrap();
        let (h, v) = nominal_beamwidths(&cfg).unwrap();
        assert!((h / v - 4.0 / 16.0).abs() < 1e-12);
        assert!((h * v - 2.0 / cfg.max_gain_linear()).abs() < 1e-15);
    }

    #[test]
    fn wide_beam_rejected() {
        let cfg = ArrayConfig::new(1, 1, -3.0).unwrap();
        assert!(matches!(nominal_beamwidths(&cfg), Err(Error::ModelValidity(_))));
        let ok = ArrayConfig::new(8, 8, 8.0).unwrap();
        let huge = AngularSpread::from_degrees(100.0, 1.0).unwrap();
        assert!(matches!(effective_gain(&ok, &huge), Err(Error::ModelValidity(_))));
    }

    #[test]
    fn zero_spread_is_max_gain() {
        let cfg = ArrayConfig::new(8, 8, 8.0).unwrap();
        let g = effective_gain(&cfg, &AngularSpread::default()).unwrap();
        assert_eq!(g, 10.0 * (64.0 * 10f64.powf(0.8)).log10());
    }

    #[test]
    fn degradation_at_14_degrees() {
        let big = ArrayConfig::new(16, 16, 8.0).unwrap();
        let small = ArrayConfig::new(4, 4, 8.0).unwrap();
        let d_big = big.max_gain_dbi() - effective_gain(&big, &street_canyon_spread()).unwrap();
        let d_small = small.max_gain_dbi() - effective_gain(&small, &street_canyon_spread()).unwrap();
        assert!((d_big - 9.0).abs() < 0.7, "{d_big}");
        assert!((d_small - 3.0).abs() < 0.5, "{d_small}");
    }

    #[test]
    fn link_gain_and_power() {
        let spread = AngularSpread::default();
        let rx = ArrayConfig::new(2, 1, 5.0).unwrap();
        let tx = ArrayConfig::with_elements(64, 8.0).unwrap().with_element_power_dbm(20.0);
        let (_, p) = array_link_gain(&tx, &rx, &spread).unwrap();
        assert!((p - 6.4).abs() < 1e-12);
        let tx = ArrayConfig::with_elements(100, 8.0).unwrap().with_element_power_dbm(10.0);
        let (g, p) = array_link_gain(&tx, &rx, &spread).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
        let rx_part = 10.0 * (2.0 * 10f64.powf(0.5)).log10();
        assert!((rx_part - 8.01).abs() < 0.005);
        assert!((g - (tx.max_gain_dbi() + rx_part)).abs() < 1e-12);
        let no_power = ArrayConfig::new(8, 8, 8.0).unwrap();
        assert!(array_link_gain(&no_power, &rx, &spread).is_err());
    }

    #[test]
    fn element_layouts() {
        let a = ArrayConfig::with_elements(64, 8.0).unwrap();
        assert_eq!((a.n_h, a.n_v), (8, 8));
        let a = ArrayConfig::with_elements(2, 5.0).unwrap();
        assert_eq!((a.n_h, a.n_v), (2, 1));
        let a = ArrayConfig::with_elements(32, 5.0).unwrap();
        assert_eq!((a.n_h, a.n_v), (8, 4));
    }

    #[test]
    fn gain_saturates_at_spread_limit() {
        let spread = AngularSpread::from_degrees(10.0, 2.0).unwrap();
        let limit = linear_to_db(2.0 / (spread.asd * spread.zsd));
        let huge = ArrayConfig::new(256, 256, 8.0).unwrap();
        let g = effective_gain(&huge, &spread).unwrap();
        assert!(g < limit && limit - g < 0.05, "{g} {limit}");
    }

    #[test]
    fn pattern_integral_is_constant() {
        // midpoint rule over +-8 sigma; the integral is 4*pi for any widths
        for (bh, bv) in [(0.02, 0.05), (0.1, 0.1), (0.3, 0.01)] {
            let n = 800;
            let (hx, hy) = (16.0 * bh / n as f64, 16.0 * bv / n as f64);
            let mut sum = 0.0;
            for i in 0..n {
                let phi = -8.0 * bh + (i as f64 + 0.5) * hx;
                for j in 0..n {
                    let theta = -8.0 * bv + (j as f64 + 0.5) * hy;
                    sum += gaussian_pattern(phi, theta, bh, bv);
                }
            }
            let integral = sum * hx * hy;
            assert!((integral - 4.0 * std::f64::consts::PI).abs() < 1e-6, "{integral}");
        }
    }

    proptest! {
        #[test]
        fn gain_monotone_in_spread(n in 1usize..32, asd1 in 0.0f64..30.0, asd2 in 0.0f64..30.0, zsd1 in 0.0f64..10.0, zsd2 in 0.0f64..10.0) {
            let cfg = ArrayConfig::new(n, n, 8.0).unwrap();
            prop_assume!(nominal_beamwidths(&cfg).is_ok());
            let lo = AngularSpread::from_degrees(asd1.min(asd2), zsd1.min(zsd2)).unwrap();
            let hi = AngularSpread::from_degrees(asd1.max(asd2), zsd1.max(zsd2)).unwrap();
            let g_lo = effective_gain(&cfg, &lo).unwrap();
            let g_hi = effective_gain(&cfg, &hi).unwrap();
            prop_assert!(g_hi <= g_lo + 1e-12);
            prop_assert!(g_lo <= cfg.max_gain_dbi() + 1e-12);
        }
    }
}

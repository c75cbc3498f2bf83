//! Path-loss models and link-budget arithmetic.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{db_to_linear, THERMAL_NOISE_DBM_PER_HZ};

/// Large-scale propagation models at mmWave carrier frequencies.
///
/// Distances are in meters, carrier frequencies in GHz. Every model is a
/// closed-form log-distance expression with no random shadowing term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathLossModel {
    /// Free-space loss plus a fixed 25 dB blockage margin.
    LosPlus25,
    /// Urban macro NLOS, alpha-beta-gamma form.
    UmaNlos,
    /// Urban micro NLOS.
    UmiNlos,
    /// Urban micro street canyon NLOS; the distance argument is the 3D distance.
    UmiStreet,
}

impl PathLossModel {
    pub const ALL: [PathLossModel; 4] =
        [PathLossModel::LosPlus25, PathLossModel::UmaNlos, PathLossModel::UmiNlos, PathLossModel::UmiStreet];

    pub fn name(&self) -> &'static str {
        match self {
            PathLossModel::LosPlus25 => "los-plus-25",
            PathLossModel::UmaNlos => "uma-nlos",
            PathLossModel::UmiNlos => "umi-nlos",
            PathLossModel::UmiStreet => "umi-street",
        }
    }

    /// Whether the model is parameterized by 3D rather than ground distance.
    pub fn uses_3d_distance(&self) -> bool {
        matches!(self, PathLossModel::UmiStreet)
    }
}

impl fmt::Display for PathLossModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PathLossModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "los-plus-25" | "los+25" | "los25" | "los-25" => Ok(PathLossModel::LosPlus25),
            "uma-nlos" | "uma" => Ok(PathLossModel::UmaNlos),
            "umi-nlos" | "umi" => Ok(PathLossModel::UmiNlos),
            "umi-street" | "umi-street-canyon" => Ok(PathLossModel::UmiStreet),
            other => Err(Error::InvalidArgument(format!("unknown path loss model '{other}'"))),
        }
    }
}

/// Path loss in dB for `model` at distance `d_m` and carrier `fc_ghz`.
///
/// Distances below the 1 m reference are rejected.
pub fn path_loss_db(model: PathLossModel, d_m: f64, fc_ghz: f64) -> Result<f64> {
    if !(d_m >= 1.0) || !d_m.is_finite() {
        return Err(Error::Domain(format!("distance {d_m} m is below the 1 m reference distance")));
    }
    if !(fc_ghz > 0.0) || !fc_ghz.is_finite() {
        return Err(Error::Domain(format!("carrier frequency {fc_ghz} GHz must be positive")));
    }
    let ld = d_m.log10();
    let lf = fc_ghz.log10();
    let pl = match model {
        PathLossModel::LosPlus25 => 20.0 * ld + 20.0 * lf + 20.0 * (4.0 * PI / 0.3).log10() + 25.0,
        PathLossModel::UmaNlos => 34.0 * ld + 23.0 * lf + 19.2,
        PathLossModel::UmiNlos => 36.7 * ld + 26.0 * lf + 22.7,
        PathLossModel::UmiStreet => 35.3 * ld + 21.3 * lf + 22.4,
    };
    Ok(pl)
}

/// 3D separation of two antennas at heights `h_tx_m`, `h_rx_m` that are
/// `ground_m` apart horizontally.
pub fn distance_3d(ground_m: f64, h_tx_m: f64, h_rx_m: f64) -> f64 {
    ground_m.hypot(h_tx_m - h_rx_m)
}

/// Power budget of a single point-to-point link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub tx_power_w: f64,
    /// Combined transmit and receive directional gain.
    pub joint_gain_dbi: f64,
    pub path_loss_db: f64,
    /// Thermal floor plus noise figure.
    pub noise_psd_dbm_hz: f64,
    pub distance_m: f64,
}

impl LinkBudget {
    pub fn new(tx_power_w: f64, joint_gain_dbi: f64, path_loss_db: f64, noise_figure_db: f64, distance_m: f64) -> Result<Self> {
        if !(tx_power_w > 0.0) || !tx_power_w.is_finite() {
            return Err(Error::Domain(format!("transmit power {tx_power_w} W must be positive")));
        }
        Ok(Self {
            tx_power_w,
            joint_gain_dbi,
            path_loss_db,
            noise_psd_dbm_hz: THERMAL_NOISE_DBM_PER_HZ + noise_figure_db,
            distance_m,
        })
    }

    /// Budget for a link evaluated with a path-loss model.
    pub fn from_model(
        model: PathLossModel,
        distance_m: f64,
        fc_ghz: f64,
        tx_power_w: f64,
        joint_gain_dbi: f64,
        noise_figure_db: f64,
    ) -> Result<Self> {
        let pl = path_loss_db(model, distance_m, fc_ghz)?;
        Self::new(tx_power_w, joint_gain_dbi, pl, noise_figure_db, distance_m)
    }

    pub fn with_tx_power(&self, tx_power_w: f64) -> Self {
        Self { tx_power_w, ..*self }
    }

    /// Noise PSD in W/Hz.
    pub fn noise_psd_w_hz(&self) -> f64 {
        db_to_linear(self.noise_psd_dbm_hz) * 1e-3
    }

    /// Linear channel gain including antennas, `10^((G - PL)/10)`.
    pub fn channel_gain(&self) -> f64 {
        db_to_linear(self.joint_gain_dbi - self.path_loss_db)
    }

    pub fn received_power_w(&self) -> f64 {
        self.tx_power_w * self.channel_gain()
    }

    /// Received power over noise PSD, in Hz. The SNR at bandwidth `W` is this
    /// quantity divided by `W`.
    pub fn snr_bandwidth_hz(&self) -> f64 {
        self.received_power_w() / self.noise_psd_w_hz()
    }

    /// Same as [`snr_bandwidth_hz`](Self::snr_bandwidth_hz) per watt of
    /// transmit power.
    pub fn snr_bandwidth_per_watt(&self) -> f64 {
        self.channel_gain() / self.noise_psd_w_hz()
    }
}

/// Linear SNR of `budget` over bandwidth `w_hz`.
pub fn snr_linear(budget: &LinkBudget, w_hz: f64) -> Result<f64> {
    if !(w_hz > 0.0) {
        return Err(Error::Domain(format!("bandwidth {w_hz} Hz must be positive")));
    }
    Ok(budget.snr_bandwidth_hz() / w_hz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn los_plus_25_at_reference() {
        // oracle: 20log10(1) + 20log10(1) + 20log10(4*pi/0.3) + 25, term by term
        let fspl_const = 20.0 * (4.0 * std::f64::consts::PI / 0.3_f64).log10();
        assert!((fspl_const - 32.441_772_186_048_67).abs() < 1e-12);
        let pl = path_loss_db(PathLossModel::LosPlus25, 1.0, 1.0).unwrap();
        assert!((pl - 57.441_772_186_048_67).abs() < 1e-10);
    }

    #[test]
    fn uma_nlos_100m_28ghz() {
        // 34*2 + 23*log10(28) + 19.2
        let pl = path_loss_db(PathLossModel::UmaNlos, 100.0, 28.0).unwrap();
        assert!((pl - 120.484_634_720_871).abs() < 1e-9, "{pl}");
    }

    #[test]
    fn umi_worse_than_uma_by_13db() {
        let gap = path_loss_db(PathLossModel::UmiNlos, 100.0, 28.0).unwrap()
            - path_loss_db(PathLossModel::UmaNlos, 100.0, 28.0).unwrap();
        assert!((13.0..=13.5).contains(&gap), "{gap}");
    }

    #[test]
    fn below_reference_distance_rejected() {
        for m in PathLossModel::ALL {
            assert!(matches!(path_loss_db(m, 0.5, 28.0), Err(Error::Domain(_))));
        }
        assert!(path_loss_db(PathLossModel::UmaNlos, 10.0, 0.0).is_err());
    }

    #[test]
    fn snr_unity_by_cancellation() {
        let b = LinkBudget::new(1.0, 90.0, 90.0, 9.0, 100.0).unwrap();
        let w = 1e8;
        let b = b.with_tx_power(b.noise_psd_w_hz() * w);
        assert!((snr_linear(&b, w).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn access_link_snr() {
        // 1 W, 25 dBi, UMa-NLOS 100 m at 28 GHz, NF 9 dB, 219 MHz
        let b = LinkBudget::from_model(PathLossModel::UmaNlos, 100.0, 28.0, 1.0, 25.0, 9.0).unwrap();
        let snr_db = 10.0 * snr_linear(&b, 219e6).unwrap().log10();
        // 30 dBm - 95.4846 dB + 165 dBm/Hz - 10log10(219e6)
        let oracle = 30.0 - (120.484_634_720_871 - 25.0) + 165.0 - 10.0 * 219e6_f64.log10();
        assert!((snr_db - oracle).abs() < 1e-9);
        assert!((snr_db - 16.1).abs() < 0.05, "{snr_db}");
    }

    #[test]
    fn doubling_bandwidth_halves_snr() {
        let b = LinkBudget::from_model(PathLossModel::LosPlus25, 400.0, 28.0, 0.25, 50.0, 9.0).unwrap();
        let s1 = snr_linear(&b, 1e8).unwrap();
        let s2 = snr_linear(&b, 2e8).unwrap();
        assert!((s1 / s2 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn noise_psd_exact() {
        let b = LinkBudget::new(1.0, 0.0, 0.0, 9.0, 1.0).unwrap();
        assert_eq!(b.noise_psd_dbm_hz, -165.0);
        assert!(LinkBudget::new(0.0, 0.0, 0.0, 9.0, 1.0).is_err());
    }

    #[test]
    fn model_names_round_trip() {
        for m in PathLossModel::ALL {
            assert_eq!(m.name().parse::<PathLossModel>().unwrap(), m);
        }
    }

    proptest! {
        #[test]
        fn increasing_in_distance(model in 0usize..4, d1 in 1.0f64..5000.0, d2 in 1.0f64..5000.0, fc in 1.0f64..100.0) {
            prop_assume!((d1 - d2).abs() > 1e-6);
            let m = PathLossModel::ALL[model];
            let (lo, hi) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
            let a = path_loss_db(m, lo, fc).unwrap();
            let b = path_loss_db(m, hi, fc).unwrap();
            prop_assert!(a < b);
            prop_assert!(a.is_finite() && a > 0.0);
        }

        #[test]
        fn increasing_in_frequency(model in 0usize..4, d in 1.0f64..5000.0, f1 in 1.0f64..100.0, f2 in 1.0f64..100.0) {
            prop_assume!((f1 - f2).abs() > 1e-6);
            let m = PathLossModel::ALL[model];
            let (lo, hi) = if f1 < f2 { (f1, f2) } else { (f2, f1) };
            prop_assert!(path_loss_db(m, d, lo).unwrap() < path_loss_db(m, d, hi).unwrap());
        }

        #[test]
        fn received_power_independent_of_bandwidth(w1 in 1e3f64..1e11, w2 in 1e3f64..1e11, p in 1e-3f64..10.0) {
            let b = LinkBudget::from_model(PathLossModel::UmiStreet, 150.0, 28.0, p, 30.0, 9.0).unwrap();
            let a = snr_linear(&b, w1).unwrap() * w1;
            let c = snr_linear(&b, w2).unwrap() * w2;
            prop_assert!((a - c).abs() <= 1e-12 * a.abs());
        }
    }
}

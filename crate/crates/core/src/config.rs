//! Scenario configuration files and the built-in figure presets.
//!
//! Configurations are flat TOML tables. Every physical quantity carries its
//! unit in the key name; omitted keys take the common simulation defaults
//! and unknown keys are rejected. When `tx_array_nh` is set, the array keys
//! determine both joint gains and both power budgets, replacing
//! `backhaul_gain_dbi`, `access_gain_dbi`, `pb_w` and `pa_w`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::beam::{array_link_gain, AngularSpread, ArrayConfig};
use crate::channel::PathLossModel;
use crate::error::{Error, Result};
use crate::netgraph::{build_linear_scenario, Heights, NetworkScenario, ScenarioParams};
use crate::rate::RateModel;
use crate::solver::Scheme;

pub const PRESET_NAMES: [&str; 6] = ["fig3", "fig4", "fig5", "fig6", "fig7", "fig8"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateModelKind {
    Ideal,
    Pilot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub n_relays: usize,
    pub spacing_m: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relay_positions_m: Option<Vec<f64>>,
    pub access_range_m: f64,
    pub pathloss: PathLossModel,
    pub fc_ghz: f64,
    pub backhaul_gain_dbi: f64,
    pub access_gain_dbi: f64,
    pub pb_w: f64,
    pub pa_w: f64,
    pub noise_figure_db: f64,
    pub rate_model: RateModelKind,
    pub coherence_length: f64,
    pub access_reuse: usize,
    pub bs_height_m: f64,
    pub relay_height_m: f64,
    pub user_height_m: f64,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub tx_array_nh: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tx_array_nv: Option<usize>,
    pub tx_element_gain_dbi: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_element_power_dbm: Option<f64>,
    pub rx_elements: usize,
    pub rx_element_gain_dbi: f64,
    pub asd_deg: f64,
    pub zsd_deg: f64,

    pub rates_bps: Vec<f64>,
    pub bandwidths_hz: Vec<f64>,
    pub schemes: Vec<String>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let p = ScenarioParams::default();
        Self {
            n_relays: p.n_relays,
            spacing_m: p.spacing_m,
            relay_positions_m: None,
            access_range_m: p.access_range_m,
            pathloss: p.pathloss_model,
            fc_ghz: p.fc_ghz,
            backhaul_gain_dbi: p.backhaul_gain_dbi,
            access_gain_dbi: p.access_gain_dbi,
            pb_w: p.backhaul_power_w,
            pa_w: p.access_power_w,
            noise_figure_db: p.noise_figure_db,
            rate_model: RateModelKind::Ideal,
            coherence_length: 38000.0,
            access_reuse: p.access_reuse,
            bs_height_m: p.heights.bs_m,
            relay_height_m: p.heights.relay_m,
            user_height_m: p.heights.user_m,
            tx_array_nh: None,
            tx_array_nv: None,
            tx_element_gain_dbi: 8.0,
            per_element_power_dbm: None,
            rx_elements: 2,
            rx_element_gain_dbi: 5.0,
            asd_deg: 0.0,
            zsd_deg: 0.0,
            rates_bps: grid(1e8, 1.2e9, 12),
            bandwidths_hz: Vec::new(),
            schemes: vec!["single-hop".into(), "nearest-neighbor".into(), "full".into()],
        }
    }
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn preset(name: &str) -> Result<Self> {
        let base = Self::default();
        let cfg = match name {
            // single hop, equal power split, favorable path loss
            "fig3" => Self {
                pathloss: PathLossModel::LosPlus25,
                schemes: vec!["single-hop-equal-power".into()],
                rates_bps: grid(1e8, 1.2e9, 12),
                bandwidths_hz: grid(2.5e8, 2.5e9, 10),
                ..base
            },
            "fig4" => Self {
                pathloss: PathLossModel::LosPlus25,
                rates_bps: grid(2e8, 1.6e9, 8),
                bandwidths_hz: grid(2.5e8, 2.5e9, 10),
                ..base
            },
            "fig5" => Self {
                pathloss: PathLossModel::UmiNlos,
                rates_bps: grid(2e7, 3e8, 15),
                bandwidths_hz: grid(2.5e8, 2.5e9, 10),
                ..base
            },
            "fig6" => Self {
                pathloss: PathLossModel::UmaNlos,
                schemes: vec!["single-hop-equal-power".into(), "single-hop".into(), "full".into()],
                rates_bps: grid(1e8, 1.4e9, 14),
                bandwidths_hz: grid(2.5e8, 2.5e9, 10),
                ..base
            },
            "fig7" => Self {
                pathloss: PathLossModel::UmaNlos,
                schemes: vec!["full".into()],
                rates_bps: vec![1.18e9],
                bandwidths_hz: vec![1.487e9],
                ..base
            },
            "fig8" => Self {
                pathloss: PathLossModel::UmiStreet,
                rate_model: RateModelKind::Pilot,
                coherence_length: 38000.0,
                tx_array_nh: Some(8),
                tx_array_nv: Some(8),
                tx_element_gain_dbi: 8.0,
                per_element_power_dbm: Some(20.0),
                rx_elements: 2,
                rx_element_gain_dbi: 5.0,
                asd_deg: 15.6,
                zsd_deg: 1.6,
                schemes: vec!["full".into()],
                rates_bps: grid(2e8, 1.2e9, 6),
                bandwidths_hz: grid(4e8, 2e9, 9),
                ..base
            },
            other => {
                return Err(Error::Config(format!("unknown preset '{other}' (known: {})", PRESET_NAMES.join(", "))))
            }
        };
        Ok(cfg)
    }

    pub fn rate_model(&self) -> Result<RateModel> {
        match self.rate_model {
            RateModelKind::Ideal => Ok(RateModel::Ideal),
            RateModelKind::Pilot => RateModel::pilot(self.coherence_length),
        }
    }

    pub fn parsed_schemes(&self) -> Result<Vec<Scheme>> {
        self.schemes.iter().map(|s| s.parse()).collect()
    }

    /// Joint gains `(backhaul, access)` in dBi and budgets `(P_b, P_a)` in W,
    /// derived from the arrays when configured.
    pub fn gains_and_powers(&self) -> Result<((f64, f64), (f64, f64))> {
        let Some(nh) = self.tx_array_nh else {
            return Ok(((self.backhaul_gain_dbi, self.access_gain_dbi), (self.pb_w, self.pa_w)));
        };
        let nv = self.tx_array_nv.ok_or_else(|| Error::Config("tx_array_nv is required with tx_array_nh".into()))?;
        let dbm = self
            .per_element_power_dbm
            .ok_or_else(|| Error::Config("per_element_power_dbm is required with tx_array_nh".into()))?;
        let tx = ArrayConfig::new(nh, nv, self.tx_element_gain_dbi)?.with_element_power_dbm(dbm);
        let relay_rx = ArrayConfig::new(nh, nv, self.tx_element_gain_dbi)?;
        let user_rx = ArrayConfig::with_elements(self.rx_elements, self.rx_element_gain_dbi)?;
        let spread = AngularSpread::from_degrees(self.asd_deg, self.zsd_deg)?;
        let (backhaul, power) = array_link_gain(&tx, &relay_rx, &spread)?;
        let (access, _) = array_link_gain(&tx, &user_rx, &spread)?;
        Ok(((backhaul, access), (power, power)))
    }

    pub fn scenario_params(&self) -> Result<ScenarioParams> {
        let ((backhaul_gain_dbi, access_gain_dbi), (backhaul_power_w, access_power_w)) = self.gains_and_powers()?;
        Ok(ScenarioParams {
            n_relays: self.relay_positions_m.as_ref().map_or(self.n_relays, Vec::len),
            spacing_m: self.spacing_m,
            relay_positions_m: self.relay_positions_m.clone(),
            access_range_m: self.access_range_m,
            pathloss_model: self.pathloss,
            fc_ghz: self.fc_ghz,
            backhaul_gain_dbi,
            access_gain_dbi,
            backhaul_power_w,
            access_power_w,
            noise_figure_db: self.noise_figure_db,
            rate_model: self.rate_model()?,
            access_reuse: self.access_reuse,
            heights: Heights { bs_m: self.bs_height_m, relay_m: self.relay_height_m, user_m: self.user_height_m },
        })
    }

    pub fn scenario(&self) -> Result<NetworkScenario> {
        build_linear_scenario(&self.scenario_params()?)
    }
}

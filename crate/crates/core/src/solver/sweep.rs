//! Rate sweeps, the dual rate-at-bandwidth curve and scheme comparison.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    minimize_total_bandwidth, single_hop_equal_power, single_hop_optimized_power, topology_rate_limit, SolveOptions,
    SolveReport, Status,
};
use crate::error::{Error, Result};
use crate::netgraph::{NetworkScenario, Topology};

/// Objectives closer than this (relative) count as tied in comparisons.
pub const TIE_TOLERANCE: f64 = 1e-4;

/// An allocation strategy: a fixed baseline or the optimizer over a
/// topology's links.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    SingleHopEqualPower,
    Optimized(Topology),
}

impl Scheme {
    pub fn name(&self) -> String {
        match self {
            Scheme::SingleHopEqualPower => "single-hop-equal-power".into(),
            Scheme::Optimized(t) => t.name(),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "single-hop-equal-power" | "equal-power" => Ok(Scheme::SingleHopEqualPower),
            _ => s.parse().map(Scheme::Optimized),
        }
    }
}

pub fn solve_scheme(scenario: &NetworkScenario, scheme: &Scheme, r_star_bps: f64, options: &SolveOptions) -> Result<SolveReport> {
    match scheme {
        Scheme::SingleHopEqualPower => single_hop_equal_power(scenario, r_star_bps),
        Scheme::Optimized(Topology::SingleHop) => single_hop_optimized_power(scenario, r_star_bps, options),
        Scheme::Optimized(t) => minimize_total_bandwidth(scenario, t, r_star_bps, options),
    }
}

/// Largest equal per-user rate the scheme sustains with unlimited bandwidth.
pub fn max_sustainable_rate(scenario: &NetworkScenario, scheme: &Scheme, options: &SolveOptions) -> Result<f64> {
    match scheme {
        Scheme::SingleHopEqualPower => {
            let probe = single_hop_equal_power(scenario, f64::MIN_POSITIVE.sqrt())?;
            Ok(probe.max_sustainable_rate_bps.unwrap_or(0.0))
        }
        Scheme::Optimized(t) => topology_rate_limit(scenario, t, options.seed),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub scheme: String,
    pub r_star_bps: f64,
    pub status: Status,
    pub total_bw_hz: Option<f64>,
    pub backhaul_bw_hz: Option<f64>,
    pub access_bw_hz: Option<f64>,
    pub active_links: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// Ordered by scheme, then by rate as given.
    pub points: Vec<SweepPoint>,
    /// Whether every scheme's bandwidth is nondecreasing in the rate.
    pub monotone: bool,
}

pub const SWEEP_CSV_HEADER: [&str; 6] = ["topology", "r_star_bps", "total_bw_hz", "backhaul_bw_hz", "access_bw_hz", "status"];

impl SweepResult {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::InvalidArgument(format!("csv: {e}"));
        w.write_record(SWEEP_CSV_HEADER).map_err(err)?;
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        for p in &self.points {
            w.write_record([
                p.scheme.clone(),
                format!("{}", p.r_star_bps),
                opt(p.total_bw_hz),
                opt(p.backhaul_bw_hz),
                opt(p.access_bw_hz),
                p.status.name().to_string(),
            ])
            .map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::InvalidArgument(e.to_string()))
    }
}

fn point(scheme: &Scheme, report: &SolveReport) -> SweepPoint {
    let a = report.allocation.as_ref();
    SweepPoint {
        scheme: scheme.name(),
        r_star_bps: report.r_star_bps,
        status: report.status,
        total_bw_hz: a.map(|a| a.objective_hz),
        backhaul_bw_hz: a.map(|a| a.backhaul_hz),
        access_bw_hz: a.map(|a| a.access_hz),
        active_links: report.active_links.clone(),
    }
}

/// Minimum total bandwidth of every scheme at every rate. Points are solved
/// concurrently; infeasible points are recorded and the sweep continues.
pub fn sweep_rate_bandwidth(
    scenario: &NetworkScenario,
    schemes: &[Scheme],
    rates_bps: &[f64],
    options: &SolveOptions,
) -> Result<SweepResult> {
    if schemes.is_empty() || rates_bps.is_empty() {
        return Err(Error::InvalidArgument("sweep needs at least one scheme and one rate".into()));
    }
    let jobs: Vec<(&Scheme, f64)> = schemes.iter().flat_map(|s| rates_bps.iter().map(move |&r| (s, r))).collect();
    let points = jobs
        .par_iter()
        .map(|(s, r)| solve_scheme(scenario, s, *r, options).map(|rep| point(s, &rep)))
        .collect::<Result<Vec<_>>>()?;
    let mut monotone = true;
    for s in schemes {
        let mut feasible: Vec<(f64, f64)> = points
            .iter()
            .filter(|p| p.scheme == s.name())
            .filter_map(|p| p.total_bw_hz.map(|w| (p.r_star_bps, w)))
            .collect();
        feasible.sort_by(|a, b| a.0.total_cmp(&b.0));
        for pair in feasible.windows(2) {
            if pair[1].1 < pair[0].1 * (1.0 - 1e-6) {
                monotone = false;
            }
        }
    }
    Ok(SweepResult { points, monotone })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub bandwidth_hz: f64,
    /// Largest equal per-user rate whose minimum bandwidth fits the budget.
    pub r_star_bps: f64,
    /// Whether the budget exceeds what the power-limited ceiling can use.
    pub power_limited: bool,
}

/// Inverts the sweep: bisects the target rate until the scheme's minimum
/// total bandwidth meets `bandwidth_hz` to a relative `1e-6` in rate.
pub fn rate_at_bandwidth(
    scenario: &NetworkScenario,
    scheme: &Scheme,
    bandwidth_hz: f64,
    options: &SolveOptions,
) -> Result<RatePoint> {
    if !(bandwidth_hz > 0.0) {
        return Err(Error::InvalidArgument(format!("bandwidth {bandwidth_hz} must be positive")));
    }
    let ceiling = max_sustainable_rate(scenario, scheme, options)?;
    let fits = |r: f64| -> Result<bool> {
        let rep = solve_scheme(scenario, scheme, r, options)?;
        Ok(rep.objective_hz().is_some_and(|w| w <= bandwidth_hz))
    };
    let mut hi = ceiling * (1.0 - 1e-9);
    if fits(hi)? {
        return Ok(RatePoint { bandwidth_hz, r_star_bps: hi, power_limited: true });
    }
    let mut lo = 0.0;
    while hi - lo > 1e-6 * hi {
        let mid = 0.5 * (lo + hi);
        if fits(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(RatePoint { bandwidth_hz, r_star_bps: lo, power_limited: false })
}

/// Dual curve: rate at each total bandwidth, solved concurrently.
pub fn rate_bandwidth_curve(
    scenario: &NetworkScenario,
    scheme: &Scheme,
    bandwidths_hz: &[f64],
    options: &SolveOptions,
) -> Result<Vec<RatePoint>> {
    bandwidths_hz.par_iter().map(|&b| rate_at_bandwidth(scenario, scheme, b, options)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub reports: Vec<SolveReport>,
    /// Index of the scheme with the smallest bandwidth; near-ties go to the
    /// one with fewer active backhaul links.
    pub best: Option<usize>,
}

pub fn compare_schemes(
    scenario: &NetworkScenario,
    schemes: &[Scheme],
    r_star_bps: f64,
    options: &SolveOptions,
) -> Result<Comparison> {
    if schemes.is_empty() {
        return Err(Error::InvalidArgument("nothing to compare".into()));
    }
    let reports = schemes.par_iter().map(|s| solve_scheme(scenario, s, r_star_bps, options)).collect::<Result<Vec<_>>>()?;
    let best = pick_best(&reports);
    Ok(Comparison { reports, best })
}

fn pick_best(reports: &[SolveReport]) -> Option<usize> {
    let min = reports.iter().filter_map(SolveReport::objective_hz).fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return None;
    }
    reports
        .iter()
        .enumerate()
        .filter(|(_, r)| r.objective_hz().is_some_and(|w| w <= min * (1.0 + TIE_TOLERANCE)))
        .min_by(|a, b| {
            a.1.n_active_backhaul()
                .cmp(&b.1.n_active_backhaul())
                .then(a.1.objective_hz().unwrap_or(f64::INFINITY).total_cmp(&b.1.objective_hz().unwrap_or(f64::INFINITY)))
        })
        .map(|(i, _)| i)
}

//! Joint routing, bandwidth and power allocation.
//!
//! Each link's bandwidth is eliminated by inverting its rate function, so the
//! optimizer works over per-link rates and powers only. Access links are fixed
//! by the user targets and decouple; backhaul links are solved with a
//! log-barrier Newton method from several starts.

mod barrier;
mod oracle;
mod sweep;

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netgraph::{
    access_band_partition, access_bandwidth_hz, check_allocation, flow_system, FlowSystem, Link, LinkKind,
    NetworkScenario, Residuals, Topology,
};
use crate::rate::LinkCurve;
use barrier::{AffineRow, BarrierSettings, Smooth};

pub use oracle::{brute_force_oracle, OracleResult};
pub use sweep::{
    compare_schemes, max_sustainable_rate, rate_at_bandwidth, rate_bandwidth_curve, solve_scheme,
    sweep_rate_bandwidth, Comparison, RatePoint, Scheme, SweepPoint, SweepResult,
};

/// Links below this bandwidth are dropped from the reported topology.
pub const ACTIVE_LINK_THRESHOLD_HZ: f64 = 1e3;
/// Largest residual accepted for an `Optimal` status.
pub const RESIDUAL_TOL: f64 = 1e-6;
pub const MIN_STARTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Optimal,
    Infeasible,
    ToleranceNotMet,
}

impl Status {
    pub fn name(&self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::ToleranceNotMet => "tolerance-not-met",
        }
    }
}

/// Per-link resources in column order of the flow system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub w_hz: Vec<f64>,
    pub p_w: Vec<f64>,
    pub r_bps: Vec<f64>,
    /// Backhaul bandwidth plus access bandwidth under band sharing.
    pub objective_hz: f64,
    pub backhaul_hz: f64,
    pub access_hz: f64,
    pub residuals: Residuals,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: Status,
    pub scheme: String,
    pub r_star_bps: f64,
    pub links: Vec<Link>,
    pub allocation: Option<Allocation>,
    /// Labels of backhaul links carrying at least the active threshold.
    pub active_links: Vec<String>,
    /// Largest equal per-user rate this scheme can sustain at any bandwidth.
    pub max_sustainable_rate_bps: Option<f64>,
    pub seeds: Vec<u64>,
    pub best_start: Option<usize>,
    pub iterations: usize,
    /// Duality-gap bound of the returned point, in Hz.
    pub gap_bound_hz: f64,
    pub wall_time_s: f64,
}

impl SolveReport {
    pub fn objective_hz(&self) -> Option<f64> {
        self.allocation.as_ref().map(|a| a.objective_hz)
    }

    pub fn is_feasible(&self) -> bool {
        self.status != Status::Infeasible
    }

    pub fn n_active_backhaul(&self) -> usize {
        self.active_links.len()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidArgument(e.to_string()))
    }

    /// One line per link with rate, power and bandwidth.
    pub fn summary(&self) -> String {
        let mut out = format!("scheme {}  target {:.4} Gbps/user  status {}\n", self.scheme, self.r_star_bps / 1e9, self.status.name());
        let Some(a) = &self.allocation else {
            if let Some(m) = self.max_sustainable_rate_bps {
                out.push_str(&format!("max sustainable rate {:.4} Gbps/user\n", m / 1e9));
            }
            return out;
        };
        out.push_str(&format!("{:<12} {:>12} {:>10} {:>12}\n", "link", "rate Gbps", "power W", "bw MHz"));
        for (j, l) in self.links.iter().enumerate() {
            if l.kind == LinkKind::Backhaul && a.w_hz[j] < ACTIVE_LINK_THRESHOLD_HZ {
                continue;
            }
            out.push_str(&format!(
                "{:<12} {:>12.4} {:>10.4} {:>12.2}\n",
                l.label(),
                a.r_bps[j] / 1e9,
                a.p_w[j],
                a.w_hz[j] / 1e6
            ));
        }
        out.push_str(&format!(
            "backhaul {:.2} MHz  access {:.2} MHz  total {:.2} MHz\n",
            a.backhaul_hz / 1e6,
            a.access_hz / 1e6,
            a.objective_hz / 1e6
        ));
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub starts: usize,
    pub seed: u64,
    /// Relative duality-gap tolerance of the barrier method.
    pub tolerance: f64,
    pub max_newton: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { starts: MIN_STARTS, seed: 20170, tolerance: 1e-8, max_newton: 4000 }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if self.starts < MIN_STARTS {
            return Err(Error::InvalidArgument(format!("at least {MIN_STARTS} starts are required, got {}", self.starts)));
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(Error::InvalidArgument(format!("tolerance {} must lie in (0, 1)", self.tolerance)));
        }
        Ok(())
    }

    fn barrier(&self) -> BarrierSettings {
        BarrierSettings { gap_rel: self.tolerance, max_newton: self.max_newton, ..BarrierSettings::default() }
    }
}

/// Scenario data shared by every solve of one (scenario, topology, R*).
struct Problem<'a> {
    scenario: &'a NetworkScenario,
    system: FlowSystem,
    curves: Vec<LinkCurve>,
    n_backhaul: usize,
    /// Backhaul link indices grouped by transmitting node.
    groups: Vec<Vec<usize>>,
    r_star: f64,
}

impl<'a> Problem<'a> {
    fn new(scenario: &'a NetworkScenario, topology: &Topology, r_star: f64) -> Result<Self> {
        let system = flow_system(scenario, topology, r_star)?;
        let curves = system.links.iter().map(|l| scenario.link_curve(l)).collect::<Result<Vec<_>>>()?;
        let n_backhaul = system.n_backhaul();
        let groups = (0..scenario.n_nodes())
            .map(|node| (0..n_backhaul).filter(|&j| system.links[j].src == node).collect::<Vec<_>>())
            .filter(|g| !g.is_empty())
            .collect();
        Ok(Self { scenario, system, curves, n_backhaul, groups, r_star })
    }

    fn pb(&self) -> f64 {
        self.scenario.backhaul_power_w
    }

    /// Power fraction a backhaul link needs per unit normalized rate at
    /// unlimited bandwidth.
    fn kappa(&self, j: usize) -> f64 {
        self.r_star / (self.curves[j].max_rate_per_watt() * self.pb())
    }

    /// Relay rows of `A` scaled to integer entries.
    fn relay_matrix(&self) -> DMatrix<f64> {
        let n = self.scenario.n_relays();
        DMatrix::from_fn(n, self.n_backhaul, |i, j| (self.system.a[(i, j)] * self.r_star).round())
    }

    fn access_widths(&self) -> Option<Vec<f64>> {
        (self.n_backhaul..self.system.n_links())
            .map(|j| self.curves[j].bandwidth_exact(self.r_star, self.scenario.access_power_w))
            .collect()
    }

    fn access_rate_limit(&self) -> f64 {
        (self.n_backhaul..self.system.n_links())
            .map(|j| self.curves[j].max_rate_per_watt() * self.scenario.access_power_w)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Random strictly positive routing of unit demand at every relay: each
/// relay's inflow, processed far to near, is split over its incoming links
/// with Dirichlet(1) weights, or equally when no generator is given.
fn random_flow(links: &[Link], n_relays: usize, rng: Option<&mut ChaCha8Rng>) -> Vec<f64> {
    let mut r = vec![0.0; links.len()];
    let mut rng = rng;
    for node in (1..=n_relays).rev() {
        let out: f64 = links.iter().zip(&r).filter(|(l, _)| l.src == node).map(|(_, v)| v).sum();
        let inflow = 1.0 + out;
        let incoming: Vec<usize> = (0..links.len()).filter(|&j| links[j].dst == node).collect();
        let weights: Vec<f64> = match rng.as_deref_mut() {
            Some(g) => incoming.iter().map(|_| -(1.0 - g.gen::<f64>()).ln() + 1e-9).collect(),
            None => vec![1.0; incoming.len()],
        };
        let total: f64 = weights.iter().sum();
        for (&j, w) in incoming.iter().zip(&weights) {
            r[j] = inflow * w / total;
        }
    }
    r
}

struct LoadObjective {
    index: usize,
}

impl Smooth for LoadObjective {
    fn value(&self, x: &DVector<f64>) -> Option<f64> {
        Some(x[self.index])
    }
    fn derivatives(&self, x: &DVector<f64>) -> Option<(f64, DVector<f64>, DMatrix<f64>)> {
        let mut g = DVector::zeros(x.len());
        g[self.index] = 1.0;
        Some((x[self.index], g, DMatrix::zeros(x.len(), x.len())))
    }
}

/// Smallest achievable worst-node power load `max_n sum kappa_l r_l` over
/// all routings, with an interior routing attaining it closely. A load of
/// one or more means the targets exceed the power-limited capacity.
fn min_power_load(problem: &Problem, rng: &mut ChaCha8Rng) -> (f64, Vec<f64>) {
    let nb = problem.n_backhaul;
    let links = &problem.system.links[..nb];
    let r0 = random_flow(links, problem.scenario.n_relays(), Some(rng));
    let load = |r: &[f64]| {
        problem.groups.iter().map(|g| g.iter().map(|&j| problem.kappa(j) * r[j]).sum::<f64>()).fold(0.0, f64::max)
    };
    // the load variable is measured in units of the starting load
    let unit = load(&r0);
    let mut rows: Vec<AffineRow> = (0..nb).map(|j| AffineRow { coeffs: vec![(j, 1.0)], offset: 0.0 }).collect();
    for g in &problem.groups {
        let mut coeffs: Vec<(usize, f64)> = g.iter().map(|&j| (j, -problem.kappa(j) / unit)).collect();
        coeffs.push((nb, 1.0));
        rows.push(AffineRow { coeffs, offset: 0.0 });
    }
    let mut eq = DMatrix::zeros(problem.scenario.n_relays(), nb + 1);
    eq.view_mut((0, 0), (problem.scenario.n_relays(), nb)).copy_from(&problem.relay_matrix());
    let basis = barrier::nullspace(&eq, nb + 1);
    let x0 = DVector::from_vec(r0).push(1.5);
    let settings = BarrierSettings { gap_rel: 1e-10, ..BarrierSettings::default() };
    let out = barrier::minimize(&LoadObjective { index: nb }, &rows, &basis, x0, &settings);
    let r: Vec<f64> = out.x.iter().take(nb).copied().collect();
    (load(&r), r)
}

struct BackhaulCost<'p, 'a> {
    problem: &'p Problem<'a>,
}

impl BackhaulCost<'_, '_> {
    fn unpack(&self, x: &DVector<f64>, j: usize) -> (f64, f64) {
        let nb = self.problem.n_backhaul;
        (x[j] * self.problem.r_star, x[nb + j] * self.problem.pb())
    }
}

impl Smooth for BackhaulCost<'_, '_> {
    fn value(&self, x: &DVector<f64>) -> Option<f64> {
        let mut total = 0.0;
        for j in 0..self.problem.n_backhaul {
            let (r, p) = self.unpack(x, j);
            if !(r > 0.0 && p > 0.0) {
                return None;
            }
            total += self.problem.curves[j].bandwidth_exact(r, p)?;
        }
        Some(total / self.problem.r_star)
    }

    fn derivatives(&self, x: &DVector<f64>) -> Option<(f64, DVector<f64>, DMatrix<f64>)> {
        let nb = self.problem.n_backhaul;
        let (rs, pb) = (self.problem.r_star, self.problem.pb());
        let mut g = DVector::zeros(2 * nb);
        let mut h = DMatrix::zeros(2 * nb, 2 * nb);
        let mut total = 0.0;
        for j in 0..nb {
            let (r, p) = self.unpack(x, j);
            if !(r > 0.0 && p > 0.0) {
                return None;
            }
            let d = self.problem.curves[j].bandwidth_derivs(r, p)?;
            total += d.w;
            g[j] = d.d_r;
            g[nb + j] = d.d_p * pb / rs;
            h[(j, j)] = d.d_rr * rs;
            h[(j, nb + j)] = d.d_rp * pb;
            h[(nb + j, j)] = d.d_rp * pb;
            h[(nb + j, nb + j)] = d.d_pp * pb * pb / rs;
        }
        Some((total / rs, g, h))
    }
}

struct StartResult {
    x: DVector<f64>,
    value: f64,
    gap: f64,
    iterations: usize,
    converged: bool,
}

fn start_point(problem: &Problem, phase_one: &[f64], load: f64, seed: Option<u64>) -> DVector<f64> {
    let nb = problem.n_backhaul;
    let target = 0.5 * (1.0 + load);
    let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
    let r: Vec<f64> = match rng.as_mut() {
        None => phase_one.to_vec(),
        Some(g) => {
            let rand = random_flow(&problem.system.links[..nb], problem.scenario.n_relays(), Some(g));
            let s_rand = problem
                .groups
                .iter()
                .map(|grp| grp.iter().map(|&j| problem.kappa(j) * rand[j]).sum::<f64>())
                .fold(0.0, f64::max);
            let theta = if s_rand <= target { 0.0 } else { ((s_rand - target) / (s_rand - load)).clamp(0.0, 1.0) };
            phase_one.iter().zip(&rand).map(|(a, b)| theta * a + (1.0 - theta) * b).collect()
        }
    };
    let mut p = vec![0.0; nb];
    for grp in &problem.groups {
        let used: f64 = grp.iter().map(|&j| problem.kappa(j) * r[j]).sum();
        let slack = 1.0 - used;
        let weights: Vec<f64> = match rng.as_mut() {
            Some(g) => grp.iter().map(|_| -(1.0 - g.gen::<f64>()).ln() + 1e-9).collect(),
            None => vec![1.0; grp.len()],
        };
        let total: f64 = weights.iter().sum();
        for (&j, w) in grp.iter().zip(&weights) {
            p[j] = problem.kappa(j) * r[j] + 0.9 * slack * w / total;
        }
    }
    DVector::from_iterator(2 * nb, r.into_iter().chain(p))
}

fn run_start(problem: &Problem, x0: DVector<f64>, options: &SolveOptions) -> StartResult {
    let nb = problem.n_backhaul;
    let mut rows = Vec::with_capacity(3 * nb + problem.groups.len());
    for j in 0..nb {
        rows.push(AffineRow { coeffs: vec![(j, 1.0)], offset: 0.0 });
        rows.push(AffineRow { coeffs: vec![(nb + j, 1.0)], offset: 0.0 });
        // stay below the power-limited rate ceiling
        rows.push(AffineRow { coeffs: vec![(nb + j, 1.0 / problem.kappa(j)), (j, -1.0)], offset: 0.0 });
    }
    for g in &problem.groups {
        rows.push(AffineRow { coeffs: g.iter().map(|&j| (nb + j, -1.0)).collect(), offset: 1.0 });
    }
    let mut eq = DMatrix::zeros(problem.scenario.n_relays(), 2 * nb);
    eq.view_mut((0, 0), (problem.scenario.n_relays(), nb)).copy_from(&problem.relay_matrix());
    let basis = barrier::nullspace(&eq, 2 * nb);
    let out = barrier::minimize(&BackhaulCost { problem }, &rows, &basis, x0, &options.barrier());
    StartResult { x: out.x, value: out.value, gap: out.gap_bound, iterations: out.newton_iterations, converged: out.converged }
}

/// Builds a checked allocation from per-link rates and powers: computes
/// bandwidths by inversion, prunes backhaul links under the activity
/// threshold, restores flow conservation on the survivors and evaluates the
/// residuals independently.
fn finalize(problem: &Problem, mut r: Vec<f64>, mut p: Vec<f64>, prune: bool) -> Result<Allocation> {
    let nb = problem.n_backhaul;
    let m = problem.system.n_links();
    let width = |j: usize, r: &[f64], p: &[f64]| -> f64 {
        if r[j] <= 0.0 {
            0.0
        } else {
            problem.curves[j].bandwidth_exact(r[j], p[j]).unwrap_or(f64::INFINITY)
        }
    };
    let mut w: Vec<f64> = (0..m).map(|j| width(j, &r, &p)).collect();
    if prune {
        for j in 0..nb {
            if w[j] < ACTIVE_LINK_THRESHOLD_HZ {
                r[j] = 0.0;
                p[j] = 0.0;
                w[j] = 0.0;
            }
        }
        let active: Vec<usize> = (0..nb).filter(|&j| w[j] > 0.0).collect();
        let n = problem.scenario.n_relays();
        if n > 0 && !active.is_empty() {
            let full = problem.relay_matrix();
            let a = DMatrix::from_fn(n, active.len(), |i, k| full[(i, active[k])]);
            let ra = DVector::from_iterator(active.len(), active.iter().map(|&j| r[j] / problem.r_star));
            let target = DVector::from_iterator(n, (0..n).map(|i| problem.system.b[i]));
            let res = &target - &a * &ra;
            let svd = a.svd(true, true);
            if let Ok(delta) = svd.solve(&res, 1e-12) {
                for (k, &j) in active.iter().enumerate() {
                    r[j] = ((ra[k] + delta[k]) * problem.r_star).max(0.0);
                }
            }
            for &j in &active {
                w[j] = width(j, &r, &p);
            }
        }
    }
    let backhaul_hz: f64 = w[..nb].iter().sum();
    let bands = access_band_partition(problem.scenario);
    let access_hz = access_bandwidth_hz(&bands, &w[nb..]);
    let residuals = check_allocation(problem.scenario, &problem.system, &w, &p, &r)?;
    Ok(Allocation { objective_hz: backhaul_hz + access_hz, backhaul_hz, access_hz, w_hz: w, p_w: p, r_bps: r, residuals })
}

fn active_labels(links: &[Link], alloc: &Allocation) -> Vec<String> {
    links
        .iter()
        .enumerate()
        .filter(|(j, l)| l.kind == LinkKind::Backhaul && alloc.w_hz[*j] >= ACTIVE_LINK_THRESHOLD_HZ)
        .map(|(_, l)| l.label())
        .collect()
}

fn check_rate(r_star_bps: f64) -> Result<()> {
    if r_star_bps > 0.0 && r_star_bps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("target rate {r_star_bps} must be positive")))
    }
}

fn infeasible(scheme: &str, problem: &Problem, max_rate: f64, started: Instant) -> SolveReport {
    SolveReport {
        status: Status::Infeasible,
        scheme: scheme.to_string(),
        r_star_bps: problem.r_star,
        links: problem.system.links.clone(),
        allocation: None,
        active_links: Vec::new(),
        max_sustainable_rate_bps: Some(max_rate),
        seeds: Vec::new(),
        best_start: None,
        iterations: 0,
        gap_bound_hz: 0.0,
        wall_time_s: started.elapsed().as_secs_f64(),
    }
}

/// Largest equal per-user rate routable over `topology` at unlimited
/// bandwidth with the scenario's power budgets.
pub(crate) fn topology_rate_limit(scenario: &NetworkScenario, topology: &Topology, seed: u64) -> Result<f64> {
    let problem = Problem::new(scenario, topology, 1.0)?;
    let access = problem.access_rate_limit();
    if problem.n_backhaul == 0 {
        return Ok(access);
    }
    let (load, _) = min_power_load(&problem, &mut ChaCha8Rng::seed_from_u64(seed));
    Ok(access.min(1.0 / load))
}

/// Minimizes total bandwidth over routing, bandwidth and power with the
/// links of `topology` available.
pub fn minimize_total_bandwidth(
    scenario: &NetworkScenario,
    topology: &Topology,
    r_star_bps: f64,
    options: &SolveOptions,
) -> Result<SolveReport> {
    solve_with_label(scenario, topology, r_star_bps, options, &topology.name())
}

/// Single-hop routing with the base station's power split optimized.
pub fn single_hop_optimized_power(scenario: &NetworkScenario, r_star_bps: f64, options: &SolveOptions) -> Result<SolveReport> {
    solve_with_label(scenario, &Topology::SingleHop, r_star_bps, options, "single-hop")
}

fn solve_with_label(
    scenario: &NetworkScenario,
    topology: &Topology,
    r_star_bps: f64,
    options: &SolveOptions,
    label: &str,
) -> Result<SolveReport> {
    let started = Instant::now();
    options.validate()?;
    check_rate(r_star_bps)?;
    let problem = Problem::new(scenario, topology, r_star_bps)?;
    let nb = problem.n_backhaul;
    let access_limit = problem.access_rate_limit();
    let access = problem.access_widths();

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let (load, phase_one) = if nb > 0 { min_power_load(&problem, &mut rng) } else { (0.0, Vec::new()) };
    let max_rate = if nb > 0 { access_limit.min(r_star_bps / load) } else { access_limit };
    if access.is_none() || load >= 1.0 {
        return Ok(infeasible(label, &problem, max_rate, started));
    }
    let access = access.unwrap_or_default();

    let seeds: Vec<u64> = (0..options.starts as u64).map(|i| options.seed.wrapping_add(i)).collect();
    let (x, best_start, iterations, gap, converged) = if nb == 0 {
        (DVector::zeros(0), None, 0, 0.0, true)
    } else {
        let results: Vec<StartResult> = seeds
            .par_iter()
            .enumerate()
            .map(|(i, &seed)| {
                let x0 = start_point(&problem, &phase_one, load, if i == 0 { None } else { Some(seed) });
                run_start(&problem, x0, options)
            })
            .collect();
        let iterations = results.iter().map(|s| s.iterations).sum();
        let any_converged = results.iter().any(|s| s.converged);
        let best = results
            .iter()
            .enumerate()
            .filter(|(_, s)| s.converged || !any_converged)
            .filter(|(_, s)| s.value.is_finite())
            .min_by(|a, b| a.1.value.total_cmp(&b.1.value))
            .map(|(i, _)| i);
        match best {
            Some(i) => {
                let s = &results[i];
                (s.x.clone(), Some(i), iterations, s.gap * r_star_bps, s.converged)
            }
            None => {
                let x0 = start_point(&problem, &phase_one, load, None);
                (x0, None, iterations, f64::INFINITY, false)
            }
        }
    };

    let m = problem.system.n_links();
    let mut r = vec![0.0; m];
    let mut p = vec![0.0; m];
    for j in 0..nb {
        r[j] = x[j] * r_star_bps;
        p[j] = x[nb + j] * scenario.backhaul_power_w;
    }
    for j in nb..m {
        r[j] = r_star_bps;
        p[j] = scenario.access_power_w;
    }
    debug_assert_eq!(access.len(), m - nb);
    let alloc = finalize(&problem, r, p, true)?;
    let ok = converged && alloc.residuals.max() <= RESIDUAL_TOL;
    Ok(SolveReport {
        status: if ok { Status::Optimal } else { Status::ToleranceNotMet },
        scheme: label.to_string(),
        r_star_bps,
        active_links: active_labels(&problem.system.links, &alloc),
        links: problem.system.links.clone(),
        allocation: Some(alloc),
        max_sustainable_rate_bps: Some(max_rate),
        seeds,
        best_start,
        iterations,
        gap_bound_hz: gap,
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}

/// Single-hop routing with the base station's budget split equally over
/// its links. Closed form: every backhaul link carries one user's target.
pub fn single_hop_equal_power(scenario: &NetworkScenario, r_star_bps: f64) -> Result<SolveReport> {
    let started = Instant::now();
    check_rate(r_star_bps)?;
    let problem = Problem::new(scenario, &Topology::SingleHop, r_star_bps)?;
    let nb = problem.n_backhaul;
    let share = scenario.backhaul_power_w / nb.max(1) as f64;
    let backhaul_limit =
        (0..nb).map(|j| problem.curves[j].max_rate_per_watt() * share).fold(f64::INFINITY, f64::min);
    let max_rate = backhaul_limit.min(problem.access_rate_limit());
    let label = "single-hop-equal-power";
    if !(r_star_bps < max_rate) || problem.access_widths().is_none() {
        return Ok(infeasible(label, &problem, max_rate, started));
    }
    let m = problem.system.n_links();
    let r = vec![r_star_bps; m];
    let p: Vec<f64> = (0..m).map(|j| if j < nb { share } else { scenario.access_power_w }).collect();
    let alloc = finalize(&problem, r, p, false)?;
    let status = if alloc.residuals.max() <= RESIDUAL_TOL { Status::Optimal } else { Status::ToleranceNotMet };
    Ok(SolveReport {
        status,
        scheme: label.to_string(),
        r_star_bps,
        active_links: active_labels(&problem.system.links, &alloc),
        links: problem.system.links.clone(),
        allocation: Some(alloc),
        max_sustainable_rate_bps: Some(max_rate),
        seeds: Vec::new(),
        best_start: None,
        iterations: 0,
        gap_bound_hz: 0.0,
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}

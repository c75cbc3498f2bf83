//! Linear relay deployments and their flow-network constraint matrices.
//!
//! Node 0 is the wired base station and nodes `1..=n` are relays ordered by
//! distance from it. Every node serves one user over an access link. Backhaul
//! links point away from the base station.
//!
//! Column order of the constraint matrices: enabled backhaul links sorted by
//! hop count, then by source node, followed by the access links in node
//! order. For four relays with full connectivity this numbers the base
//! station's links 1, 5, 8 and 10.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::channel::{distance_3d, LinkBudget, PathLossModel};
use crate::error::{Error, Result};
use crate::rate::{LinkCurve, RateModel};

/// Antenna heights, used only by models parameterized by 3D distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Heights {
    pub bs_m: f64,
    pub relay_m: f64,
    pub user_m: f64,
}

impl Default for Heights {
    fn default() -> Self {
        Self { bs_m: 10.0, relay_m: 10.0, user_m: 1.5 }
    }
}

/// Inputs to [`build_linear_scenario`]. Defaults follow the common
/// simulation parameters: four relays 200 m apart, users 100 m out, 28 GHz,
/// 1 W and 50 dBi for backhaul, 1 W and 25 dBi for access, 9 dB noise figure.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    pub n_relays: usize,
    pub spacing_m: f64,
    /// Explicit relay positions along the street; overrides `n_relays` and
    /// `spacing_m` when set.
    pub relay_positions_m: Option<Vec<f64>>,
    pub access_range_m: f64,
    pub pathloss_model: PathLossModel,
    pub fc_ghz: f64,
    pub backhaul_gain_dbi: f64,
    pub access_gain_dbi: f64,
    pub backhaul_power_w: f64,
    pub access_power_w: f64,
    pub noise_figure_db: f64,
    pub rate_model: RateModel,
    pub access_reuse: usize,
    pub heights: Heights,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            n_relays: 4,
            spacing_m: 200.0,
            relay_positions_m: None,
            access_range_m: 100.0,
            pathloss_model: PathLossModel::UmaNlos,
            fc_ghz: 28.0,
            backhaul_gain_dbi: 50.0,
            access_gain_dbi: 25.0,
            backhaul_power_w: 1.0,
            access_power_w: 1.0,
            noise_figure_db: 9.0,
            rate_model: RateModel::Ideal,
            access_reuse: 2,
            heights: Heights::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkScenario {
    /// Relay positions in meters from the base station, increasing.
    pub relay_positions_m: Vec<f64>,
    pub access_range_m: f64,
    pub pathloss_model: PathLossModel,
    pub fc_ghz: f64,
    pub backhaul_gain_dbi: f64,
    pub access_gain_dbi: f64,
    pub backhaul_power_w: f64,
    pub access_power_w: f64,
    pub noise_figure_db: f64,
    pub rate_model: RateModel,
    pub access_reuse: usize,
    pub heights: Heights,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Geometry(format!("{name} must be positive, got {v}")))
    }
}

/// Places relays on a line and validates the scenario.
pub fn build_linear_scenario(params: &ScenarioParams) -> Result<NetworkScenario> {
    let positions = match &params.relay_positions_m {
        Some(p) => p.clone(),
        None => {
            if params.n_relays > 0 {
                positive("relay spacing", params.spacing_m)?;
            }
            (1..=params.n_relays).map(|k| k as f64 * params.spacing_m).collect()
        }
    };
    let mut prev = 0.0;
    for (k, &x) in positions.iter().enumerate() {
        if !(x > prev) || !x.is_finite() {
            return Err(Error::Geometry(format!(
                "relay {} at {x} m must lie beyond the previous node at {prev} m",
                k + 1
            )));
        }
        prev = x;
    }
    positive("access range", params.access_range_m)?;
    positive("carrier frequency", params.fc_ghz)?;
    if !(params.backhaul_power_w > 0.0) || !(params.access_power_w > 0.0) {
        return Err(Error::InvalidArgument("power budgets must be positive".into()));
    }
    if params.access_reuse == 0 {
        return Err(Error::InvalidArgument("access reuse factor must be at least 1".into()));
    }
    params.rate_model.validate()?;
    Ok(NetworkScenario {
        relay_positions_m: positions,
        access_range_m: params.access_range_m,
        pathloss_model: params.pathloss_model,
        fc_ghz: params.fc_ghz,
        backhaul_gain_dbi: params.backhaul_gain_dbi,
        access_gain_dbi: params.access_gain_dbi,
        backhaul_power_w: params.backhaul_power_w,
        access_power_w: params.access_power_w,
        noise_figure_db: params.noise_figure_db,
        rate_model: params.rate_model,
        access_reuse: params.access_reuse,
        heights: params.heights,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinkKind {
    Backhaul,
    Access,
}

/// A directed wireless link. For access links `dst` is the serving node,
/// whose user is the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub src: usize,
    pub dst: usize,
    pub kind: LinkKind,
    pub distance_m: f64,
}

pub fn node_name(node: usize) -> String {
    if node == 0 {
        "BS".to_string()
    } else {
        format!("R{node}")
    }
}

impl Link {
    pub fn label(&self) -> String {
        match self.kind {
            LinkKind::Backhaul => format!("{}->{}", node_name(self.src), node_name(self.dst)),
            LinkKind::Access => format!("{}->UE{}", node_name(self.src), self.dst + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    /// Base station to every relay.
    SingleHop,
    /// A chain: each relay backhauled by its predecessor.
    NearestNeighbor,
    /// All outward pairs enabled; the optimizer prunes what it does not use.
    FullConnectivity,
    /// Mask over the full-connectivity backhaul links in column order.
    Custom(Vec<bool>),
}

impl Topology {
    pub fn name(&self) -> String {
        match self {
            Topology::SingleHop => "single-hop".into(),
            Topology::NearestNeighbor => "nearest-neighbor".into(),
            Topology::FullConnectivity => "full".into(),
            Topology::Custom(mask) => {
                format!("custom:{}", mask.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>())
            }
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase().replace('_', "-");
        match lower.as_str() {
            "single-hop" | "star" => Ok(Topology::SingleHop),
            "nearest-neighbor" | "chain" => Ok(Topology::NearestNeighbor),
            "full" | "full-connectivity" | "optimal" => Ok(Topology::FullConnectivity),
            other => {
                if let Some(bits) = other.strip_prefix("custom:") {
                    bits.chars()
                        .map(|c| match c {
                            '1' => Ok(true),
                            '0' => Ok(false),
                            _ => Err(Error::InvalidArgument(format!("bad custom mask '{bits}'"))),
                        })
                        .collect::<Result<Vec<_>>>()
                        .map(Topology::Custom)
                } else {
                    Err(Error::InvalidArgument(format!("unknown topology '{s}'")))
                }
            }
        }
    }
}

/// Backhaul `(src, dst)` pairs of the full-connectivity graph in column order.
pub fn full_backhaul_pairs(n_relays: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(n_relays * (n_relays + 1) / 2);
    for hop in 1..=n_relays {
        for src in 0..=(n_relays - hop) {
            pairs.push((src, src + hop));
        }
    }
    pairs
}

impl NetworkScenario {
    pub fn n_relays(&self) -> usize {
        self.relay_positions_m.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.n_relays() + 1
    }

    pub fn position_m(&self, node: usize) -> f64 {
        if node == 0 {
            0.0
        } else {
            self.relay_positions_m[node - 1]
        }
    }

    fn node_height_m(&self, node: usize) -> f64 {
        if node == 0 {
            self.heights.bs_m
        } else {
            self.heights.relay_m
        }
    }

    /// Enabled backhaul links, after checking every relay is reachable.
    pub fn backhaul_links(&self, topology: &Topology) -> Result<Vec<Link>> {
        let n = self.n_relays();
        let pairs = full_backhaul_pairs(n);
        let enabled: Vec<bool> = match topology {
            Topology::SingleHop => pairs.iter().map(|&(s, _)| s == 0).collect(),
            Topology::NearestNeighbor => pairs.iter().map(|&(s, d)| d == s + 1).collect(),
            Topology::FullConnectivity => vec![true; pairs.len()],
            Topology::Custom(mask) => {
                if mask.len() != pairs.len() {
                    return Err(Error::InvalidArgument(format!(
                        "custom mask has {} entries, {} relays need {}",
                        mask.len(),
                        n,
                        pairs.len()
                    )));
                }
                mask.clone()
            }
        };
        let links: Vec<Link> = pairs
            .iter()
            .zip(&enabled)
            .filter(|(_, &on)| on)
            .map(|(&(src, dst), _)| Link {
                src,
                dst,
                kind: LinkKind::Backhaul,
                distance_m: self.position_m(dst) - self.position_m(src),
            })
            .collect();
        // links point outward, so one pass in node order settles reachability
        let mut reached = vec![false; n + 1];
        reached[0] = true;
        for node in 1..=n {
            reached[node] = links.iter().any(|l| l.dst == node && reached[l.src]);
            if !reached[node] {
                return Err(Error::Disconnected(node));
            }
        }
        Ok(links)
    }

    pub fn access_links(&self) -> Vec<Link> {
        (0..self.n_nodes())
            .map(|k| Link { src: k, dst: k, kind: LinkKind::Access, distance_m: self.access_range_m })
            .collect()
    }

    /// All links in column order.
    pub fn links(&self, topology: &Topology) -> Result<Vec<Link>> {
        let mut links = self.backhaul_links(topology)?;
        links.extend(self.access_links());
        Ok(links)
    }

    /// Distance fed to the path-loss model for `link`.
    pub fn model_distance_m(&self, link: &Link) -> f64 {
        if !self.pathloss_model.uses_3d_distance() {
            return link.distance_m;
        }
        let h_tx = self.node_height_m(link.src);
        let h_rx = match link.kind {
            LinkKind::Backhaul => self.node_height_m(link.dst),
            LinkKind::Access => self.heights.user_m,
        };
        distance_3d(link.distance_m, h_tx, h_rx)
    }

    pub fn joint_gain_dbi(&self, kind: LinkKind) -> f64 {
        match kind {
            LinkKind::Backhaul => self.backhaul_gain_dbi,
            LinkKind::Access => self.access_gain_dbi,
        }
    }

    pub fn power_budget_w(&self, kind: LinkKind) -> f64 {
        match kind {
            LinkKind::Backhaul => self.backhaul_power_w,
            LinkKind::Access => self.access_power_w,
        }
    }

    pub fn link_budget(&self, link: &Link, tx_power_w: f64) -> Result<LinkBudget> {
        LinkBudget::from_model(
            self.pathloss_model,
            self.model_distance_m(link),
            self.fc_ghz,
            tx_power_w,
            self.joint_gain_dbi(link.kind),
            self.noise_figure_db,
        )
    }

    pub fn link_curve(&self, link: &Link) -> Result<LinkCurve> {
        Ok(LinkCurve::from_budget(&self.link_budget(link, 1.0)?, self.rate_model))
    }

    /// Same scenario with a different rate model.
    pub fn with_rate_model(&self, model: RateModel) -> Self {
        Self { rate_model: model, ..self.clone() }
    }
}

/// One row of the power-constraint matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub node: usize,
    pub kind: LinkKind,
    pub budget_w: f64,
}

/// Linear constraints of the joint optimization: `A R = b`, `D P <= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSystem {
    /// Rows: relays `1..=n` then users `1..=n+1`; entries `+-1/R*`.
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub d: DMatrix<f64>,
    pub links: Vec<Link>,
    pub power_rows: Vec<PowerRow>,
    pub r_star_bps: f64,
    pub n_relays: usize,
}

impl FlowSystem {
    pub fn n_backhaul(&self) -> usize {
        self.links.iter().filter(|l| l.kind == LinkKind::Backhaul).count()
    }

    pub fn n_links(&self) -> usize {
        self.links.len()
    }

    /// Per-user delivered rate implied by a link-rate vector: the inflow of
    /// each user row, in bits/s.
    pub fn user_rates(&self, r: &[f64]) -> Vec<f64> {
        (0..=self.n_relays)
            .map(|u| {
                let row = self.n_relays + u;
                (0..self.n_links()).map(|j| self.a[(row, j)] * r[j]).sum::<f64>() * self.r_star_bps
            })
            .collect()
    }

    /// Row labels of `A`.
    pub fn flow_row_labels(&self) -> Vec<String> {
        (1..=self.n_relays)
            .map(|k| format!("relay R{k}"))
            .chain((0..=self.n_relays).map(|u| format!("user UE{}", u + 1)))
            .collect()
    }

    pub fn power_row_labels(&self) -> Vec<String> {
        self.power_rows
            .iter()
            .map(|r| match r.kind {
                LinkKind::Backhaul => format!("{} backhaul", node_name(r.node)),
                LinkKind::Access => format!("{} access", node_name(r.node)),
            })
            .collect()
    }

    /// Dense CSV of `A` (with `b` as the last column) or `D`, with link
    /// labels as the header.
    pub fn to_csv(&self, which: MatrixKind) -> Result<String> {
        let (m, labels, rhs) = match which {
            MatrixKind::Flow => (&self.a, self.flow_row_labels(), Some(&self.b)),
            MatrixKind::Power => (&self.d, self.power_row_labels(), None),
        };
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["row".to_string()];
        header.extend(self.links.iter().map(Link::label));
        if rhs.is_some() {
            header.push("rhs".into());
        }
        w.write_record(&header).map_err(csv_err)?;
        for (i, label) in labels.iter().enumerate() {
            let mut rec = vec![label.clone()];
            rec.extend((0..m.ncols()).map(|j| format!("{:e}", m[(i, j)])));
            if let Some(b) = rhs {
                rec.push(format!("{:e}", b[i]));
            }
            w.write_record(&rec).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::InvalidArgument(e.to_string()))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidArgument(format!("csv: {e}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    Flow,
    Power,
}

/// Flow system for equal per-user targets `r_star_bps`.
pub fn flow_system(scenario: &NetworkScenario, topology: &Topology, r_star_bps: f64) -> Result<FlowSystem> {
    let targets = vec![r_star_bps; scenario.n_nodes()];
    flow_system_with_targets(scenario, topology, r_star_bps, &targets)
}

/// Flow system with per-user targets; `A` keeps the `1/R*` scaling and the
/// targets enter through `b`.
pub fn flow_system_with_targets(
    scenario: &NetworkScenario,
    topology: &Topology,
    r_star_bps: f64,
    targets_bps: &[f64],
) -> Result<FlowSystem> {
    if !(r_star_bps > 0.0) || !r_star_bps.is_finite() {
        return Err(Error::InvalidArgument(format!("target rate {r_star_bps} must be positive")));
    }
    let n = scenario.n_relays();
    if targets_bps.len() != n + 1 || targets_bps.iter().any(|&t| !(t >= 0.0)) {
        return Err(Error::InvalidArgument(format!("need {} nonnegative user targets", n + 1)));
    }
    let links = scenario.links(topology)?;
    let cols = links.len();
    let mut a = DMatrix::zeros(2 * n + 1, cols);
    let inv = 1.0 / r_star_bps;
    for (j, l) in links.iter().enumerate() {
        match l.kind {
            LinkKind::Backhaul => {
                a[(l.dst - 1, j)] += inv;
                if l.src > 0 {
                    a[(l.src - 1, j)] -= inv;
                }
            }
            LinkKind::Access => a[(n + l.dst, j)] = inv,
        }
    }
    let b = DVector::from_iterator(
        2 * n + 1,
        (1..=n).map(|k| targets_bps[k] * inv).chain(targets_bps.iter().map(|t| t * inv)),
    );
    let (d, power_rows) = power_matrix(scenario, &links);
    Ok(FlowSystem { a, b, d, links, power_rows, r_star_bps, n_relays: n })
}

fn power_matrix(scenario: &NetworkScenario, links: &[Link]) -> (DMatrix<f64>, Vec<PowerRow>) {
    let mut rows = Vec::new();
    for node in 0..scenario.n_nodes() {
        if links.iter().any(|l| l.kind == LinkKind::Backhaul && l.src == node) {
            rows.push(PowerRow { node, kind: LinkKind::Backhaul, budget_w: scenario.backhaul_power_w });
        }
    }
    for l in links.iter().filter(|l| l.kind == LinkKind::Access) {
        rows.push(PowerRow { node: l.src, kind: LinkKind::Access, budget_w: scenario.access_power_w });
    }
    let mut d = DMatrix::zeros(rows.len(), links.len());
    for (i, row) in rows.iter().enumerate() {
        for (j, l) in links.iter().enumerate() {
            if l.kind == row.kind && l.src == row.node {
                d[(i, j)] = 1.0 / row.budget_w;
            }
        }
    }
    (d, rows)
}

/// Power-constraint matrix `D`: one row per backhaul transmitter with
/// entries `1/P_b`, one row per access link with `1/P_a`.
pub fn power_system(scenario: &NetworkScenario, topology: &Topology) -> Result<DMatrix<f64>> {
    let links = scenario.links(topology)?;
    Ok(power_matrix(scenario, &links).0)
}

/// Band index of each access link (node order), alternating along the line.
pub fn access_band_partition(scenario: &NetworkScenario) -> Vec<usize> {
    (0..scenario.n_nodes()).map(|k| k % scenario.access_reuse).collect()
}

/// Spectrum consumed by access links sharing bands: the sum over bands of the
/// widest member link.
pub fn access_bandwidth_hz(bands: &[usize], widths_hz: &[f64]) -> f64 {
    let n_bands = bands.iter().copied().max().map_or(0, |m| m + 1);
    let mut widest = vec![0.0f64; n_bands];
    for (&band, &w) in bands.iter().zip(widths_hz) {
        widest[band] = widest[band].max(w);
    }
    widest.iter().sum()
}

/// Constraint violations of an allocation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Residuals {
    /// `max |A R - b|`, relative to the target rate.
    pub flow: f64,
    /// `max (D P - 1)+`.
    pub power: f64,
    /// `max |R - f(W, P)| / R` over links with bandwidth; a link carrying
    /// rate without bandwidth counts as 1.
    pub rate: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.flow.max(self.power).max(self.rate)
    }
}

/// Checks an allocation against the constraints using only the matrices and
/// the rate functions.
pub fn check_allocation(
    scenario: &NetworkScenario,
    system: &FlowSystem,
    w_hz: &[f64],
    p_w: &[f64],
    r_bps: &[f64],
) -> Result<Residuals> {
    let m = system.n_links();
    if w_hz.len() != m || p_w.len() != m || r_bps.len() != m {
        return Err(Error::InvalidArgument(format!("allocation vectors must have {m} entries")));
    }
    let r = DVector::from_column_slice(r_bps);
    let p = DVector::from_column_slice(p_w);
    let flow = (&system.a * &r - &system.b).amax();
    let power = (&system.d * &p).iter().map(|v| (v - 1.0).max(0.0)).fold(0.0, f64::max);
    let mut rate = 0.0f64;
    for (j, link) in system.links.iter().enumerate() {
        if w_hz[j] < 0.0 || p_w[j] < 0.0 || r_bps[j] < 0.0 {
            rate = rate.max(1.0);
            continue;
        }
        if w_hz[j] == 0.0 || p_w[j] == 0.0 {
            if r_bps[j] > 0.0 {
                rate = rate.max(1.0);
            }
            continue;
        }
        let budget = scenario.link_budget(link, p_w[j])?;
        let achievable = crate::rate::rate(&budget, w_hz[j], scenario.rate_model)?;
        if r_bps[j] > 0.0 {
            rate = rate.max((r_bps[j] - achievable).abs() / r_bps[j]);
        }
    }
    Ok(Residuals { flow, power, rate })
}

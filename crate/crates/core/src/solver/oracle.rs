//! Exhaustive grid search over routing and power splits for networks with
//! at most two relays.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{barrier::nullspace, finalize, Allocation, Problem};
use crate::error::{Error, Result};
use crate::netgraph::{access_band_partition, access_bandwidth_hz, NetworkScenario, Topology};

const MAX_ORACLE_RELAYS: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub allocation: Allocation,
    /// Largest objective change between the best cell and its grid
    /// neighbours; the declared accuracy of the oracle.
    pub cell_tolerance_hz: f64,
    pub cells_evaluated: usize,
}

/// Grid-minimal allocation with `resolution` steps per searched dimension.
/// Flows range over the feasible segment of the (at most one-dimensional)
/// routing freedom; a node with two outgoing links splits its budget on a
/// grid, a node with one link uses its full budget. Returns `Ok(None)` when
/// no grid cell is feasible.
pub fn brute_force_oracle(
    scenario: &NetworkScenario,
    topology: &Topology,
    r_star_bps: f64,
    resolution: usize,
) -> Result<Option<OracleResult>> {
    if scenario.n_relays() > MAX_ORACLE_RELAYS {
        return Err(Error::OracleTooLarge(scenario.n_relays()));
    }
    if resolution < 2 {
        return Err(Error::InvalidArgument("oracle resolution must be at least 2".into()));
    }
    super::check_rate(r_star_bps)?;
    let problem = Problem::new(scenario, topology, r_star_bps)?;
    let nb = problem.n_backhaul;
    let m = problem.system.n_links();
    let pa = scenario.access_power_w;
    let pb = scenario.backhaul_power_w;
    let Some(access) = problem.access_widths() else { return Ok(None) };
    let access_hz = access_bandwidth_hz(&access_band_partition(scenario), &access);

    // particular routing plus the nullspace direction, in normalized rates
    let a = problem.relay_matrix();
    let n = scenario.n_relays();
    let base: Vec<f64> = if nb == 0 {
        Vec::new()
    } else {
        let svd = a.clone().svd(true, true);
        let rhs = DMatrix::from_element(n, 1, 1.0);
        let sol = svd.solve(&rhs, 1e-12).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        sol.iter().copied().collect()
    };
    let dirs = if nb == 0 { DMatrix::zeros(0, 0) } else { nullspace(&a, nb) };
    let (dir, theta_range) = match dirs.ncols() {
        0 => (vec![0.0; nb], (0.0, 0.0)),
        1 => {
            let d: Vec<f64> = dirs.column(0).iter().copied().collect();
            let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
            for j in 0..nb {
                if d[j].abs() > 1e-14 {
                    let bound = -base[j] / d[j];
                    if d[j] > 0.0 {
                        lo = lo.max(bound);
                    } else {
                        hi = hi.min(bound);
                    }
                }
            }
            (d, (lo, hi))
        }
        k => return Err(Error::InvalidArgument(format!("routing freedom of dimension {k} exceeds the oracle"))),
    };
    let flow_steps = if dirs.ncols() == 1 { resolution } else { 0 };
    let split_node = problem.groups.iter().position(|g| g.len() == 2);
    let split_steps = if split_node.is_some() { resolution } else { 0 };
    if problem.groups.iter().any(|g| g.len() > 2) {
        return Err(Error::InvalidArgument("oracle supports at most two links per transmitter".into()));
    }

    let cell = |fi: usize, si: usize| -> Option<(f64, Vec<f64>, Vec<f64>)> {
        let theta = if flow_steps == 0 {
            0.0
        } else {
            theta_range.0 + (theta_range.1 - theta_range.0) * fi as f64 / flow_steps as f64
        };
        let mut r = vec![0.0; m];
        let mut p = vec![0.0; m];
        for j in 0..nb {
            r[j] = ((base[j] + theta * dir[j]) * r_star_bps).max(0.0);
        }
        for (gi, g) in problem.groups.iter().enumerate() {
            if Some(gi) == split_node {
                let q = si as f64 / split_steps as f64;
                p[g[0]] = q * pb;
                p[g[1]] = (1.0 - q) * pb;
            } else {
                p[g[0]] = pb;
            }
        }
        let mut total = access_hz;
        for j in 0..nb {
            if r[j] > 1e-9 * r_star_bps {
                total += problem.curves[j].bandwidth_exact(r[j], p[j])?;
            } else {
                r[j] = 0.0;
            }
        }
        for j in nb..m {
            r[j] = r_star_bps;
            p[j] = pa;
        }
        Some((total, r, p))
    };

    let mut grid = vec![vec![f64::INFINITY; split_steps + 1]; flow_steps + 1];
    let mut best: Option<(usize, usize)> = None;
    let mut cells = 0;
    for fi in 0..=flow_steps {
        for si in 0..=split_steps {
            cells += 1;
            if let Some((v, _, _)) = cell(fi, si) {
                grid[fi][si] = v;
                if best.map_or(true, |(bf, bs)| v < grid[bf][bs]) {
                    best = Some((fi, si));
                }
            }
        }
    }
    let Some((bf, bs)) = best else { return Ok(None) };
    let best_v = grid[bf][bs];
    let mut cell_tol = 0.0f64;
    for df in -1i64..=1 {
        for ds in -1i64..=1 {
            let (f, s) = (bf as i64 + df, bs as i64 + ds);
            if f < 0 || s < 0 || f > flow_steps as i64 || s > split_steps as i64 {
                continue;
            }
            let v = grid[f as usize][s as usize];
            if v.is_finite() {
                cell_tol = cell_tol.max((v - best_v).abs());
            }
        }
    }
    let (_, r, p) = cell(bf, bs).expect("best cell is feasible");
    let allocation = finalize(&problem, r, p, false)?;
    Ok(Some(OracleResult { allocation, cell_tolerance_hz: cell_tol, cells_evaluated: cells }))
}

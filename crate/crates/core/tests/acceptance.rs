//! Acceptance suite. Every criterion prints one `PASS`/`FAIL` line; run with
//! `cargo test --test acceptance -- --nocapture --test-threads 1` to see them
//! in order.

use std::cell::Cell;
use std::f64::consts::LN_2;
use std::time::Instant;

use backhaul::beam::{effective_gain, AngularSpread, ArrayConfig};
use backhaul::channel::{path_loss_db, LinkBudget, PathLossModel};
use backhaul::config::ScenarioConfig;
use backhaul::netgraph::{access_band_partition, build_linear_scenario, LinkKind, NetworkScenario, ScenarioParams, Topology};
use backhaul::rate::{efficiency, LinkCurve, ideal_rate, penalized_rate, required_bandwidth, RateModel, Requirement};
use backhaul::solver::{
    brute_force_oracle, max_sustainable_rate, minimize_total_bandwidth, rate_at_bandwidth, single_hop_optimized_power,
    Scheme, SolveOptions, SolveReport, Status,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

fn report(id: &str, pass: bool, detail: String) -> bool {
    println!("[{id}] {} {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

fn preset(name: &str) -> NetworkScenario {
    ScenarioConfig::preset(name).unwrap().scenario().unwrap()
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(Config { cases, failure_persistence: None, ..Config::default() }, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn total(rep: &SolveReport) -> f64 {
    rep.objective_hz().unwrap_or(f64::NAN)
}

fn rel_gap(worse: f64, best: f64) -> f64 {
    (worse - best) / best
}

#[test]
fn c01_umi_uma_path_loss_gap() {
    let umi = path_loss_db(PathLossModel::UmiNlos, 100.0, 28.0).unwrap();
    let uma = path_loss_db(PathLossModel::UmaNlos, 100.0, 28.0).unwrap();
    let expected_umi = 36.7 * 2.0 + 26.0 * 28f64.log10() + 22.7;
    let expected_uma = 34.0 * 2.0 + 23.0 * 28f64.log10() + 19.2;
    assert!((umi - expected_umi).abs() < 1e-9 && (uma - expected_uma).abs() < 1e-9);
    let gap = umi - uma;
    assert!(report("1", (13.0..=13.5).contains(&gap), format!("UMi - UMa at 100 m, 28 GHz = {gap:.3} dB (target [13.0, 13.5])")));
}

#[test]
fn c02_angular_spread_saturation() {
    let spread = AngularSpread::from_degrees(14.0, 0.6).unwrap();
    let loss = |n: usize| {
        let cfg = ArrayConfig::new(n, n, 8.0).unwrap();
        cfg.max_gain_dbi() - effective_gain(&cfg, &spread).unwrap()
    };
    let (big, small) = (loss(16), loss(4));
    let ok_big = report("2a", (big - 9.0).abs() <= 0.7, format!("16x16 degradation = {big:.3} dB (target 9 +- 0.7)"));
    let ok_small = report("2b", (small - 3.0).abs() <= 0.5, format!("4x4 degradation = {small:.3} dB (target 3 +- 0.5)"));
    assert!(ok_big && ok_small);
}

#[test]
fn c03_access_link_rate() {
    let w: f64 = 219e6;
    let pl = 34.0 * 2.0 + 23.0 * 28f64.log10() + 19.2;
    let snr = 10f64.powf((30.0 + 25.0 - pl - (-174.0 + 9.0) - 10.0 * w.log10()) / 10.0);
    let oracle = w * (1.0 + snr).log2();
    let budget = LinkBudget::from_model(PathLossModel::UmaNlos, 100.0, 28.0, 1.0, 25.0, 9.0).unwrap();
    let r = ideal_rate(&budget, w).unwrap();
    assert!((r - oracle).abs() < 1e-6 * oracle, "{r} vs {oracle}");
    assert!(report("3", (r - 1.18e9).abs() <= 0.02e9, format!("access rate at 219 MHz = {:.4} Gbps (target 1.18 +- 0.02)", r / 1e9)));
}

#[test]
fn c04_relayed_topology_at_1_18_gbps() {
    let s = preset("fig7");
    let start = Instant::now();
    let rep = minimize_total_bandwidth(&s, &Topology::FullConnectivity, 1.18e9, &SolveOptions::default()).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let a = rep.allocation.as_ref().expect("feasible");
    let bands = access_band_partition(&s);
    let mut widest = vec![0.0f64; s.access_reuse];
    for (link, w) in rep.links.iter().zip(&a.w_hz) {
        if link.kind == LinkKind::Access {
            widest[bands[link.src]] = widest[bands[link.src]].max(*w);
        }
    }
    let no_direct = !rep.active_links.iter().any(|l| l == "BS->R3" || l == "BS->R4");
    let checks = [
        report("4a", rep.status == Status::Optimal && (a.objective_hz / 1487e6 - 1.0).abs() <= 0.015,
            format!("total = {:.2} MHz (target 1487 +- 1.5%), status {}", a.objective_hz / 1e6, rep.status.name())),
        report("4b", (a.backhaul_hz / 1049e6 - 1.0).abs() <= 0.02, format!("backhaul = {:.2} MHz (target 1049 +- 2%)", a.backhaul_hz / 1e6)),
        report("4c", widest.iter().all(|w| (w / 219e6 - 1.0).abs() <= 0.01),
            format!("access bands = {:?} MHz (target 219 +- 1%)", widest.iter().map(|w| (w / 1e4).round() / 100.0).collect::<Vec<_>>())),
        report("4d", no_direct, format!("active backhaul = {:?}", rep.active_links.iter().filter(|l| !l.contains("UE")).collect::<Vec<_>>())),
        report("4e", elapsed < 60.0, format!("runtime = {elapsed:.3} s (target < 60 s)")),
    ];
    assert!(checks.iter().all(|&c| c));
}

#[test]
fn c05_equal_power_star() {
    let cfg = ScenarioConfig::preset("fig3").unwrap();
    let start = Instant::now();
    let high = ScenarioConfig { backhaul_gain_dbi: 50.0, ..cfg.clone() }.scenario().unwrap();
    let low = ScenarioConfig { backhaul_gain_dbi: 40.0, ..cfg }.scenario().unwrap();
    let options = SolveOptions::default();
    let w = total(&backhaul::solver::single_hop_equal_power(&high, 1e9).unwrap());
    let ceiling = max_sustainable_rate(&low, &Scheme::SingleHopEqualPower, &options).unwrap();
    let at_3ghz = rate_at_bandwidth(&low, &Scheme::SingleHopEqualPower, 3e9, &options).unwrap().r_star_bps;
    let elapsed = start.elapsed().as_secs_f64();
    let a = report("5a", (w / 1.5e9 - 1.0).abs() <= 0.05, format!("50 dBi: bandwidth for 1 Gbps/user = {:.1} MHz (target 1500 +- 5%)", w / 1e6));
    let b = report("5b", ceiling < 400e6,
        format!("40 dBi: sustainable-rate ceiling = {:.1} Mbps/user (target < 400); rate at 3 GHz = {:.1} Mbps", ceiling / 1e6, at_3ghz / 1e6));
    let c = report("5c", elapsed < 10.0, format!("runtime = {elapsed:.3} s (target < 10 s)"));
    assert!(a && b && c);
}

fn sweep_totals(s: &NetworkScenario, topology: &Topology, rates: &[f64]) -> Vec<f64> {
    let options = SolveOptions::default();
    rates.iter().map(|&r| total(&minimize_total_bandwidth(s, topology, r, &options).unwrap())).collect()
}

fn rate_loss_line(s: &NetworkScenario, label: &str, bandwidths: &[f64]) {
    let options = SolveOptions::default();
    let rate = |t: Topology, b: f64| rate_at_bandwidth(s, &Scheme::Optimized(t), b, &options).unwrap().r_star_bps;
    let cells: Vec<String> = bandwidths
        .iter()
        .map(|&b| {
            let best = rate(Topology::FullConnectivity, b);
            let sh = rate(Topology::SingleHop, b);
            let nn = rate(Topology::NearestNeighbor, b);
            format!("{:.2} GHz: SH -{:.1}% NN -{:.1}%", b / 1e9, 100.0 * (1.0 - sh / best), 100.0 * (1.0 - nn / best))
        })
        .collect();
    println!("[6 info] {label} rate loss at fixed bandwidth: {}", cells.join("; "));
}

#[test]
fn c06_topology_transition() {
    let start = Instant::now();
    let los = preset("fig4");
    let rates = [0.2e9, 0.4e9, 0.6e9, 0.8e9, 1.0e9, 1.2e9];
    let best = sweep_totals(&los, &Topology::FullConnectivity, &rates);
    let sh = sweep_totals(&los, &Topology::SingleHop, &rates);
    let nn = sweep_totals(&los, &Topology::NearestNeighbor, &rates);
    let sh_gap: Vec<f64> = sh.iter().zip(&best).map(|(w, b)| rel_gap(*w, *b)).collect();
    let nn_gap: Vec<f64> = nn.iter().zip(&best).map(|(w, b)| rel_gap(*w, *b)).collect();
    let pct = |g: &[f64]| g.iter().map(|x| format!("{:.2}%", 100.0 * x)).collect::<Vec<_>>().join(", ");
    let a = report("6a", sh_gap.iter().all(|g| *g <= 0.025), format!("LOS+25 single-hop excess bandwidth at {rates:?}: [{}] (target <= 2.5%)", pct(&sh_gap)));
    let b = report("6b", nn_gap.iter().all(|g| (0.12..=0.25).contains(g)),
        format!("LOS+25 nearest-neighbor excess bandwidth: [{}] (target 12%..25%)", pct(&nn_gap)));
    rate_loss_line(&los, "LOS+25", &[1.0e9, 2.0e9, 3.0e9]);

    let umi = preset("fig5");
    let rates = [0.05e9, 0.1e9, 0.15e9, 0.2e9, 0.25e9, 0.3e9];
    let best = sweep_totals(&umi, &Topology::FullConnectivity, &rates);
    let nn = sweep_totals(&umi, &Topology::NearestNeighbor, &rates);
    let nn_gap: Vec<f64> = nn.iter().zip(&best).map(|(w, b)| rel_gap(*w, *b)).collect();
    let c = report("6c", nn_gap.iter().all(|g| *g <= 0.02), format!("UMi nearest-neighbor excess bandwidth at {rates:?}: [{}] (target <= 2%)", pct(&nn_gap)));
    let ceiling = max_sustainable_rate(&umi, &Scheme::Optimized(Topology::SingleHop), &SolveOptions::default()).unwrap();
    let d = report("6d", ceiling < 70e6, format!("UMi single-hop ceiling = {:.2} Mbps/user (target < 70)", ceiling / 1e6));
    rate_loss_line(&umi, "UMi", &[0.5e9, 1.0e9, 2.0e9]);
    let elapsed = start.elapsed().as_secs_f64();
    let e = report("6e", elapsed < 300.0, format!("runtime = {elapsed:.1} s (target < 300 s)"));
    assert!(a && b && c && d && e);
}

#[test]
fn c07_power_optimization_gain() {
    let start = Instant::now();
    let s = preset("fig6");
    let options = SolveOptions::default();
    let rate = |scheme: Scheme, b: f64| rate_at_bandwidth(&s, &scheme, b, &options).unwrap().r_star_bps;
    let mut ok = true;
    for b in [1.5e9, 2.0e9] {
        let equal = rate(Scheme::SingleHopEqualPower, b);
        let sh = rate(Scheme::Optimized(Topology::SingleHop), b);
        let full = rate(Scheme::Optimized(Topology::FullConnectivity), b);
        ok &= report("7a", sh / equal >= 1.35,
            format!("{:.1} GHz: single-hop optimized / equal power = {:.3} ({:.1} vs {:.1} Mbps, target >= 1.35)", b / 1e9, sh / equal, sh / 1e6, equal / 1e6));
        ok &= report("7b", full / equal >= 1.7,
            format!("{:.1} GHz: optimal connectivity / equal power = {:.3} ({:.1} Mbps, target >= 1.7)", b / 1e9, full / equal, full / 1e6));
    }
    let elapsed = start.elapsed().as_secs_f64();
    ok &= report("7c", elapsed < 120.0, format!("runtime = {elapsed:.1} s (target < 120 s)"));
    assert!(ok);
}

fn small_scenario() -> impl Strategy<Value = (ScenarioParams, f64)> {
    let models = prop_oneof![Just(PathLossModel::LosPlus25), Just(PathLossModel::UmaNlos), Just(PathLossModel::UmiNlos)];
    (0usize..=2, 100.0..300.0f64, models, 40.0..55.0f64, 0.1..0.8f64).prop_map(|(n, spacing, model, gain, frac)| {
        let params = ScenarioParams { n_relays: n, spacing_m: spacing, pathloss_model: model, backhaul_gain_dbi: gain, ..Default::default() };
        (params, frac)
    })
}

#[test]
fn c08_oracle_equivalence() {
    let start = Instant::now();
    let options = SolveOptions::default();
    let worst = Cell::new((f64::NEG_INFINITY, f64::INFINITY));
    let outcome = runner(20).run(&small_scenario(), |(params, frac)| {
        let s = build_linear_scenario(&params).unwrap();
        let ceiling = max_sustainable_rate(&s, &Scheme::Optimized(Topology::FullConnectivity), &options).unwrap();
        let r = frac * ceiling;
        let rep = minimize_total_bandwidth(&s, &Topology::FullConnectivity, r, &options).unwrap();
        let oracle = brute_force_oracle(&s, &Topology::FullConnectivity, r, 200).unwrap().expect("oracle grid has a feasible cell");
        let (sol, orc) = (total(&rep), oracle.allocation.objective_hz);
        let excess = (sol - orc - oracle.cell_tolerance_hz) / orc;
        let deficit = (orc - sol) / orc;
        let (e, d) = worst.get();
        worst.set((e.max(excess), d.min(-deficit)));
        prop_assert!(sol <= orc + oracle.cell_tolerance_hz + 1.0, "{params:?} r={r}: solver {sol} > oracle {orc} + cell {}", oracle.cell_tolerance_hz);
        prop_assert!(sol >= orc * 0.995, "{params:?} r={r}: solver {sol} < 99.5% of oracle {orc}");
        Ok(())
    });
    let elapsed = start.elapsed().as_secs_f64();
    let detail = match &outcome {
        Ok(()) => format!("20 scenarios; worst excess over oracle+cell = {:.2e}, worst deficit = {:.2e} (relative); {elapsed:.1} s", worst.get().0, -worst.get().1),
        Err(e) => format!("{e}"),
    };
    let ok = report("8", outcome.is_ok() && elapsed < 300.0, detail);
    assert!(ok);
}

fn run_invariant<S: Strategy>(name: &str, cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> bool
where
    S::Value: std::fmt::Debug,
{
    let outcome = runner(cases).run(&strategy, test);
    let detail = match &outcome {
        Ok(()) => format!("{name}: {cases} cases"),
        Err(e) => format!("{name}: {e}"),
    };
    report("9", outcome.is_ok(), detail)
}

fn snr_budget() -> impl Strategy<Value = LinkBudget> {
    (0.01..4.0f64, 0.0..55.0f64, 60.0..150.0f64).prop_map(|(p, g, pl)| LinkBudget::new(p, g, pl, 9.0, 100.0).unwrap())
}

fn solver_scenario() -> impl Strategy<Value = (ScenarioParams, f64)> {
    let models = prop_oneof![Just(PathLossModel::LosPlus25), Just(PathLossModel::UmaNlos), Just(PathLossModel::UmiNlos)];
    (1usize..=4, 120.0..250.0f64, models, 42.0..52.0f64, 0.1..0.6f64).prop_map(|(n, spacing, model, gain, frac)| {
        (ScenarioParams { n_relays: n, spacing_m: spacing, pathloss_model: model, backhaul_gain_dbi: gain, ..Default::default() }, frac)
    })
}

#[test]
fn c09_invariant_suite() {
    let start = Instant::now();
    let options = SolveOptions::default();
    let mut ok = true;

    ok &= run_invariant("rate concave in bandwidth", 256, (snr_budget(), 1e6..5e9f64, 0.05..0.95f64), |(b, w, t)| {
        let (w1, w2) = (w * 0.3, w * 1.7);
        let mid = t * w1 + (1.0 - t) * w2;
        let chord = t * ideal_rate(&b, w1).unwrap() + (1.0 - t) * ideal_rate(&b, w2).unwrap();
        prop_assert!(ideal_rate(&b, mid).unwrap() >= chord * (1.0 - 1e-12));
        Ok(())
    });

    ok &= run_invariant("pilot rate concave in pilot ratio", 256, (snr_budget(), 1e6..5e9f64, 0.001..0.999f64, 0.001..0.999f64, 100.0..1e5f64), |(b, w, a1, a2, lc)| {
        let mid = 0.5 * (a1 + a2);
        let chord = 0.5 * (penalized_rate(&b, w, a1, lc).unwrap() + penalized_rate(&b, w, a2, lc).unwrap());
        prop_assert!(penalized_rate(&b, w, mid, lc).unwrap() >= chord - 1e-9 * chord.abs() - 1e-6);
        Ok(())
    });

    ok &= run_invariant("penalized rate at most ideal", 256, (snr_budget(), 1e6..5e9f64, 0.001..0.999f64, 10.0..1e5f64), |(b, w, a, lc)| {
        prop_assert!(penalized_rate(&b, w, a, lc).unwrap() <= ideal_rate(&b, w).unwrap() * (1.0 + 1e-12));
        let snr = b.snr_bandwidth_hz() / w;
        prop_assert!(efficiency(RateModel::pilot(lc).unwrap(), snr).value <= snr.ln_1p() / LN_2 * (1.0 + 1e-12));
        Ok(())
    });

    ok &= run_invariant("required bandwidth round trip", 256, (snr_budget(), 0.001..0.999f64, prop::bool::ANY), |(b, frac, pilot)| {
        let model = if pilot { RateModel::pilot(38000.0).unwrap() } else { RateModel::Ideal };
        let peak = LinkCurve::from_budget(&b, model).peak_bandwidth(b.tx_power_w);
        let w0 = if peak.is_finite() { frac * peak } else { 1e3 + frac * 5e9 };
        let target = backhaul::rate::rate(&b, w0, model).unwrap();
        match required_bandwidth(target, &b, model).unwrap() {
            Requirement::Bandwidth { hz } => {
                prop_assert!((hz - w0).abs() <= 1.0f64.max(1e-9 * w0) * (1.0 + 1e-9), "{hz} vs {w0}");
            }
            other => prop_assert!(false, "unexpected {other:?}"),
        }
        Ok(())
    });

    ok &= run_invariant("flow residual of solver outputs", 16, solver_scenario(), |(params, frac)| {
        let s = build_linear_scenario(&params).unwrap();
        let ceiling = max_sustainable_rate(&s, &Scheme::Optimized(Topology::FullConnectivity), &options).unwrap();
        for topology in [Topology::SingleHop, Topology::NearestNeighbor, Topology::FullConnectivity] {
            let rep = minimize_total_bandwidth(&s, &topology, frac * ceiling, &options).unwrap();
            if let Some(a) = &rep.allocation {
                prop_assert!(a.residuals.flow <= 1e-6, "{topology}: flow residual {}", a.residuals.flow);
            }
        }
        Ok(())
    });

    ok &= run_invariant("topology dominance", 16, solver_scenario(), |(params, frac)| {
        let s = build_linear_scenario(&params).unwrap();
        let ceiling = max_sustainable_rate(&s, &Scheme::Optimized(Topology::FullConnectivity), &options).unwrap();
        let r = frac * ceiling;
        let full = total(&minimize_total_bandwidth(&s, &Topology::FullConnectivity, r, &options).unwrap());
        prop_assert!(full.is_finite());
        for topology in [Topology::SingleHop, Topology::NearestNeighbor] {
            let w = minimize_total_bandwidth(&s, &topology, r, &options).unwrap().objective_hz();
            if let Some(w) = w {
                prop_assert!(full <= w * (1.0 + 1e-6), "{topology}: full {full} > {w}");
            }
        }
        let sh = single_hop_optimized_power(&s, r, &options).unwrap().objective_hz();
        let eq = backhaul::solver::single_hop_equal_power(&s, r).unwrap().objective_hz();
        if let (Some(sh), Some(eq)) = (sh, eq) {
            prop_assert!(sh <= eq * (1.0 + 1e-6), "single-hop optimized {sh} > equal power {eq}");
        }
        Ok(())
    });

    ok &= run_invariant("monotone rate-bandwidth curves", 8, solver_scenario(), |(params, _)| {
        let s = build_linear_scenario(&params).unwrap();
        let ceiling = max_sustainable_rate(&s, &Scheme::Optimized(Topology::FullConnectivity), &options).unwrap();
        let mut last = 0.0;
        for k in 1..=6 {
            let w = total(&minimize_total_bandwidth(&s, &Topology::FullConnectivity, ceiling * k as f64 / 7.0, &options).unwrap());
            prop_assert!(w >= last * (1.0 - 1e-6), "bandwidth decreased from {last} to {w}");
            last = w;
        }
        Ok(())
    });

    let elapsed = start.elapsed().as_secs_f64();
    ok &= report("9", elapsed < 120.0, format!("runtime = {elapsed:.1} s (target < 120 s)"));
    assert!(ok);
}

#[test]
fn c10_pilot_limited_street_canyon() {
    let start = Instant::now();
    let s = preset("fig8");
    let p = rate_at_bandwidth(&s, &Scheme::Optimized(Topology::FullConnectivity), 1.2e9, &SolveOptions::default()).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let a = report("10a", (0.8e9..=1.2e9).contains(&p.r_star_bps),
        format!("rate at 1.2 GHz = {:.3} Gbps/user (target [0.8, 1.2]); joint gains {:.2}/{:.2} dBi", p.r_star_bps / 1e9, s.backhaul_gain_dbi, s.access_gain_dbi));
    let b = report("10b", elapsed < 120.0, format!("runtime = {elapsed:.1} s (target < 120 s)"));
    assert!(a && b);
}

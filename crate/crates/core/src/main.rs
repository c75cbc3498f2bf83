use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use backhaul::beam::{effective_gain, AngularSpread, ArrayConfig};
use backhaul::channel::{path_loss_db, PathLossModel};
use backhaul::config::ScenarioConfig;
use backhaul::error::{Error, Result};
use backhaul::netgraph::Topology;
use backhaul::solver::{
    compare_schemes, rate_bandwidth_curve, single_hop_equal_power, solve_scheme, sweep_rate_bandwidth, Scheme,
    SolveOptions, Status,
};

const EXIT_INFEASIBLE: u8 = 2;
const EXIT_TOLERANCE: u8 = 3;
const EXIT_CONFIG: u8 = 4;

#[derive(Parser)]
#[command(name = "backhaul", version, about = "Relay backhaul planning for mmWave linear networks")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Scenario file (TOML)
    #[arg(long, global = true, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario: fig3 ... fig8
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Write CSV or JSON output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Base seed of the multi-start optimizer
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Relative optimality tolerance
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Number of optimizer starts (at least 8)
    #[arg(long, global = true)]
    starts: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Path loss in dB for one or all models
    Pathloss {
        #[arg(long)]
        model: Option<PathLossModel>,
        /// Distance(s) in meters
        #[arg(long = "d", num_args = 1.., value_delimiter = ',')]
        d: Vec<f64>,
        /// Carrier frequency in GHz
        #[arg(long, default_value_t = 28.0)]
        fc: f64,
    },
    /// Effective array gain versus azimuth spread (CSV)
    Gain {
        /// Arrays as NHxNV, comma separated
        #[arg(long, value_delimiter = ',', default_value = "4x4,8x8,16x16")]
        arrays: Vec<String>,
        #[arg(long, default_value_t = 8.0)]
        element_gain_dbi: f64,
        /// Elevation spread in degrees
        #[arg(long, default_value_t = 0.6)]
        zsd: f64,
        /// Azimuth spreads in degrees; defaults to 0..=30 in 1 degree steps
        #[arg(long, value_delimiter = ',')]
        asd: Vec<f64>,
    },
    /// Optimize one target rate and print the allocation
    Plan {
        /// Per-user target in bits/s; defaults to the first configured rate
        #[arg(long)]
        rate: Option<f64>,
        /// single-hop, nearest-neighbor, full or custom:<mask>
        #[arg(long)]
        topology: Option<String>,
        /// Single hop with the base-station budget split equally
        #[arg(long)]
        equal_power: bool,
        /// Emit the full report as JSON
        #[arg(long)]
        json: bool,
    },
    /// Minimum total bandwidth over the configured schemes and rates (CSV)
    Sweep {
        /// Emit rate at each configured total bandwidth instead
        #[arg(long)]
        dual: bool,
    },
    /// Compare the configured schemes at one rate
    Compare {
        #[arg(long)]
        rate: Option<f64>,
    },
    /// Print the resolved configuration as TOML
    ShowConfig,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn load_config(g: &GlobalArgs) -> Result<ScenarioConfig> {
    match (&g.config, &g.preset) {
        (Some(path), _) => ScenarioConfig::load(path),
        (None, Some(name)) => ScenarioConfig::preset(name),
        (None, None) => Ok(ScenarioConfig::default()),
    }
}

fn options(g: &GlobalArgs) -> Result<SolveOptions> {
    let mut o = SolveOptions::default();
    if let Some(s) = g.seed {
        o.seed = s;
    }
    if let Some(t) = g.tolerance {
        o.tolerance = t;
    }
    if let Some(n) = g.starts {
        o.starts = n;
    }
    o.validate()?;
    Ok(o)
}

fn emit(g: &GlobalArgs, text: &str) -> Result<()> {
    match &g.out {
        Some(path) => fs::write(path, text).map_err(|e| Error::Config(format!("{}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| Error::Config(e.to_string()))
        }
    }
}

fn status_code(status: Status) -> u8 {
    match status {
        Status::Optimal => 0,
        Status::Infeasible => EXIT_INFEASIBLE,
        Status::ToleranceNotMet => EXIT_TOLERANCE,
    }
}

fn first_rate(cfg: &ScenarioConfig, rate: Option<f64>) -> Result<f64> {
    rate.or_else(|| cfg.rates_bps.first().copied())
        .ok_or_else(|| Error::Config("no target rate given and rates_bps is empty".into()))
}

fn parse_array(spec: &str, gain: f64) -> Result<ArrayConfig> {
    let bad = || Error::InvalidArgument(format!("array '{spec}' must look like 16x16"));
    let (h, v) = spec.trim().split_once(['x', 'X']).ok_or_else(bad)?;
    ArrayConfig::new(h.parse().map_err(|_| bad())?, v.parse().map_err(|_| bad())?, gain)
}

fn run(cli: Cli) -> Result<u8> {
    let g = &cli.global;
    match &cli.command {
        Command::Pathloss { model, d, fc } => {
            let models: Vec<PathLossModel> = model.map_or(PathLossModel::ALL.to_vec(), |m| vec![m]);
            let distances = if d.is_empty() { vec![10.0, 50.0, 100.0, 200.0, 400.0, 600.0, 800.0, 1000.0] } else { d.clone() };
            let mut text = String::from("model,d_m,fc_ghz,path_loss_db\n");
            for m in &models {
                for &dist in &distances {
                    let pl = path_loss_db(*m, dist, *fc)?;
                    text.push_str(&format!("{},{},{},{:.4}\n", m.name(), dist, fc, pl));
                }
            }
            emit(g, &text)?;
            Ok(0)
        }
        Command::Gain { arrays, element_gain_dbi, zsd, asd } => {
            let configs = arrays.iter().map(|a| parse_array(a, *element_gain_dbi)).collect::<Result<Vec<_>>>()?;
            let asds = if asd.is_empty() { (0..=30).map(f64::from).collect() } else { asd.clone() };
            let mut text = String::from("asd_deg");
            for a in arrays {
                text.push_str(&format!(",gain_dbi_{}", a.trim()));
            }
            text.push('\n');
            for &x in &asds {
                let spread = AngularSpread::from_degrees(x, *zsd)?;
                text.push_str(&format!("{x}"));
                for c in &configs {
                    text.push_str(&format!(",{:.4}", effective_gain(c, &spread)?));
                }
                text.push('\n');
            }
            emit(g, &text)?;
            Ok(0)
        }
        Command::Plan { rate, topology, equal_power, json } => {
            let cfg = load_config(g)?;
            let opts = options(g)?;
            let scenario = cfg.scenario()?;
            let r = first_rate(&cfg, *rate)?;
            let topology: Option<Topology> = topology.as_deref().map(str::parse).transpose()?;
            let report = if *equal_power {
                if topology.as_ref().is_some_and(|t| *t != Topology::SingleHop) {
                    return Err(Error::InvalidArgument("--equal-power applies to the single-hop topology".into()));
                }
                single_hop_equal_power(&scenario, r)?
            } else {
                let t = topology.unwrap_or(Topology::FullConnectivity);
                solve_scheme(&scenario, &Scheme::Optimized(t), r, &opts)?
            };
            if *json {
                emit(g, &report.to_json()?)?;
            } else {
                emit(g, &report.summary())?;
            }
            if report.status != Status::Optimal {
                eprintln!("status: {}", report.status.name());
            }
            Ok(status_code(report.status))
        }
        Command::Sweep { dual } => {
            let cfg = load_config(g)?;
            let opts = options(g)?;
            let scenario = cfg.scenario()?;
            let schemes = cfg.parsed_schemes()?;
            if *dual {
                if cfg.bandwidths_hz.is_empty() {
                    return Err(Error::Config("bandwidths_hz is empty".into()));
                }
                let mut text = String::from("topology,total_bw_hz,r_star_bps,power_limited\n");
                for s in &schemes {
                    for p in rate_bandwidth_curve(&scenario, s, &cfg.bandwidths_hz, &opts)? {
                        text.push_str(&format!("{},{},{:.3},{}\n", s.name(), p.bandwidth_hz, p.r_star_bps, p.power_limited));
                    }
                }
                emit(g, &text)?;
            } else {
                if cfg.rates_bps.is_empty() {
                    return Err(Error::Config("rates_bps is empty".into()));
                }
                let result = sweep_rate_bandwidth(&scenario, &schemes, &cfg.rates_bps, &opts)?;
                if !result.monotone {
                    eprintln!("warning: bandwidth is not monotone in rate for some scheme");
                }
                emit(g, &result.to_csv()?)?;
            }
            Ok(0)
        }
        Command::Compare { rate } => {
            let cfg = load_config(g)?;
            let opts = options(g)?;
            let scenario = cfg.scenario()?;
            let r = first_rate(&cfg, *rate)?;
            let schemes = cfg.parsed_schemes()?;
            let cmp = compare_schemes(&scenario, &schemes, r, &opts)?;
            let mut text = format!("{:<24} {:>18} {:>14} {:>8}\n", "scheme", "total_bw_mhz", "status", "links");
            for (i, rep) in cmp.reports.iter().enumerate() {
                let bw = rep.objective_hz().map_or("-".to_string(), |w| format!("{:.3}", w / 1e6));
                let mark = if cmp.best == Some(i) { " *" } else { "" };
                text.push_str(&format!(
                    "{:<24} {:>18} {:>14} {:>8}{mark}\n",
                    rep.scheme,
                    bw,
                    rep.status.name(),
                    rep.n_active_backhaul()
                ));
            }
            emit(g, &text)?;
            Ok(if cmp.best.is_some() { 0 } else { EXIT_INFEASIBLE })
        }
        Command::ShowConfig => {
            let cfg = load_config(g)?;
            emit(g, &cfg.to_toml()?)?;
            Ok(0)
        }
    }
}

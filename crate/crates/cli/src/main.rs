//! `randsec` — secrecy-rate bounds for half-duplex two-way channels
//! under randomized scheduling and power allocation.
//!
//! Subcommands: `rates` (single-point bound), `sweep` (distance-ratio
//! curve), `simulate` (symbol-level validation run), `optimize`
//! (max-min grid search). All output is bit-reproducible for a fixed
//! config and seed, at any worker count.

mod config;
mod output;

use clap::{Parser, Subcommand, ValueEnum};
use config::{parse_config, RunConfig};
use output::OutputRecord;
use randsec::montecarlo::{
    compare_tdm, compare_twoway, simulate_tdm, simulate_tdm_traced, simulate_twoway,
    simulate_twoway_traced, ComparisonReport, SchemeConfig, SimConfig, TraceRow,
};
use randsec::optimizer::{
    linspace, optimize_tdm, optimize_twoway, sweep_ratio, OptimizeEnv,
};
use randsec::profile::{misclass_profile_opts, tdm_detection_profile_opts, ProfileMethod};
use randsec::{Error, Result, Scheme};
use serde_json::json;
use std::io::Write;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Parser)]
#[command(name = "randsec", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Configuration file (flat key = value); defaults apply if omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output path; stdout if omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format. CSV applies to sweep only.
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Override the simulated interval count.
    #[arg(long, global = true)]
    frames: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate the analytic rate bound at a single parameter point.
    Rates,
    /// Distance-ratio sweep: secrecy rate vs Eve's distance ratio.
    Sweep {
        #[arg(long)]
        ratio_min: Option<f64>,
        #[arg(long)]
        ratio_max: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Symbol-level simulation plus analytic comparison.
    Simulate,
    /// Max-min grid search over legitimate and adversary parameters.
    Optimize,
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Contract(_) => 3,
                _ => 2,
            }
        }
    });
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }

    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?,
        None => String::new(),
    };
    let mut cfg = parse_config(&text)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
        cfg.echo.insert("seed".into(), seed.to_string());
    }
    if let Some(frames) = cli.frames {
        if frames == 0 {
            return Err(Error::Config("--frames must be >= 1".into()));
        }
        cfg.frames = frames;
        cfg.echo.insert("frames".into(), frames.to_string());
    }

    if cli.format == Format::Csv && !matches!(cli.cmd, Cmd::Sweep { .. }) {
        return Err(Error::Config("--format csv is only supported by the sweep subcommand".into()));
    }

    let rendered = match &cli.cmd {
        Cmd::Rates => cmd_rates(&cfg)?.to_json(),
        Cmd::Simulate => cmd_simulate(&cfg)?.to_json(),
        Cmd::Optimize => cmd_optimize(&cfg)?.to_json(),
        Cmd::Sweep { ratio_min, ratio_max, steps } => {
            if let Some(v) = ratio_min {
                cfg.ratio_min = *v;
                cfg.echo.insert("sweep.ratio_min".into(), format!("{v}"));
            }
            if let Some(v) = ratio_max {
                cfg.ratio_max = *v;
                cfg.echo.insert("sweep.ratio_max".into(), format!("{v}"));
            }
            if let Some(v) = steps {
                if *v == 0 {
                    return Err(Error::Config("--steps must be >= 1".into()));
                }
                cfg.steps = *v;
                cfg.echo.insert("sweep.steps".into(), v.to_string());
            }
            let (record, rows) = cmd_sweep(&cfg)?;
            match cli.format {
                Format::Json => record.to_json(),
                Format::Csv => output::sweep_to_csv(&rows),
            }
        }
    };

    match &cli.out {
        Some(path) => std::fs::write(path, rendered)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{rendered}");
            std::io::stdout().flush().ok();
            Ok(())
        }
    }
}

fn comparison_json(report: &ComparisonReport) -> serde_json::Value {
    json!({
        "entries": report.entries,
        "sigma": report.sigma,
        "pass_fraction": report.pass_fraction(),
        "max_z": report.max_z(),
        "passed": report.passed(),
    })
}

fn cmd_rates(cfg: &RunConfig) -> Result<OutputRecord> {
    let payload = match cfg.scheme.single()? {
        Scheme::TwoWay => {
            let cls = cfg.classifier.instantiate_twoway(&cfg.geometry, &cfg.data_law)?;
            let profile = misclass_profile_opts(
                &cfg.geometry,
                &cfg.data_law,
                &cls,
                &cfg.channel,
                ProfileMethod::Analytic,
                &cfg.grid.quad,
            )?;
            let breakdown = randsec::twoway_bounds(
                cfg.sched_param,
                &profile,
                &cfg.geometry,
                cfg.data_law.rho_min(),
                cfg.fec,
            )?;
            json!({ "scheme": "twoway", "p_t": cfg.sched_param, "profile": profile, "breakdown": breakdown })
        }
        Scheme::Tdm => {
            let window = cfg.classifier.instantiate_tdm_window(&cfg.geometry, &cfg.data_law)?;
            let profile = tdm_detection_profile_opts(
                &cfg.geometry,
                &cfg.data_law,
                &cfg.feedback_law,
                &window,
                &cfg.channel,
                ProfileMethod::Analytic,
                &cfg.grid.quad,
            )?;
            let breakdown = randsec::tdm_bounds(
                cfg.sched_param,
                &profile,
                &cfg.geometry,
                cfg.data_law.rho_min(),
                cfg.fec,
            )?;
            json!({ "scheme": "tdm", "beta": cfg.sched_param, "window": window, "profile": profile, "breakdown": breakdown })
        }
    };
    Ok(OutputRecord::new(cfg.seed, cfg.echo.clone(), payload))
}

fn sim_config(cfg: &RunConfig, scheme: Scheme) -> Result<SimConfig> {
    let scheme_cfg = match scheme {
        Scheme::TwoWay => SchemeConfig::TwoWay {
            p_t: cfg.sched_param,
            classifier: cfg.classifier.instantiate_twoway(&cfg.geometry, &cfg.data_law)?,
        },
        Scheme::Tdm => SchemeConfig::Tdm {
            beta: cfg.sched_param,
            feedback_law: cfg.feedback_law.clone(),
            window: cfg.classifier.instantiate_tdm_window(&cfg.geometry, &cfg.data_law)?,
        },
    };
    Ok(SimConfig {
        frames: cfg.frames,
        seed: cfg.seed,
        geometry: cfg.geometry,
        channel: cfg.channel,
        data_law: cfg.data_law.clone(),
        fec: cfg.fec,
        scheme: scheme_cfg,
    })
}

/// Open the trace sink when configured. Rows stream in interval order.
fn trace_writer(cfg: &RunConfig) -> Result<Option<std::io::BufWriter<std::fs::File>>> {
    let Some(path) = &cfg.trace_path else { return Ok(None) };
    let file = std::fs::File::create(path)
        .map_err(|e| Error::Config(format!("cannot create trace file {}: {e}", path.display())))?;
    let mut w = std::io::BufWriter::new(file);
    writeln!(w, "index,a_active,b_active,p_a_rx_db,p_b_rx_db,obs_db,outcome,decode_correct")
        .map_err(|e| Error::Config(format!("trace write failed: {e}")))?;
    Ok(Some(w))
}

fn write_trace_row(w: &mut std::io::BufWriter<std::fs::File>, r: &TraceRow) {
    let decode = match r.decode_correct {
        Some(true) => "true",
        Some(false) => "false",
        None => "",
    };
    let _ = writeln!(
        w,
        "{},{},{},{},{},{},{},{}",
        r.index, r.a_active, r.b_active, r.p_a_rx_db, r.p_b_rx_db, r.obs_db, r.outcome, decode
    );
}

fn cmd_simulate(cfg: &RunConfig) -> Result<OutputRecord> {
    let scheme = cfg.scheme.single()?;
    let sim = sim_config(cfg, scheme)?;
    let mut trace = trace_writer(cfg)?;

    let payload = match scheme {
        Scheme::TwoWay => {
            let (emp, breakdown) = match &mut trace {
                Some(w) => simulate_twoway_traced(&sim, &mut |r| write_trace_row(w, &r))?,
                None => simulate_twoway(&sim)?,
            };
            let cls = cfg.classifier.instantiate_twoway(&cfg.geometry, &cfg.data_law)?;
            let analytic = misclass_profile_opts(
                &cfg.geometry,
                &cfg.data_law,
                &cls,
                &cfg.channel,
                ProfileMethod::Analytic,
                &cfg.grid.quad,
            )?;
            let comparison = compare_twoway(&analytic, &emp, 3.0);
            json!({
                "scheme": "twoway",
                "empirical": emp,
                "empirical_profile": emp.to_profile(),
                "breakdown": breakdown,
                "analytic_profile": analytic,
                "comparison": comparison_json(&comparison),
            })
        }
        Scheme::Tdm => {
            let (emp, breakdown) = match &mut trace {
                Some(w) => simulate_tdm_traced(&sim, &mut |r| write_trace_row(w, &r))?,
                None => simulate_tdm(&sim)?,
            };
            let window = cfg.classifier.instantiate_tdm_window(&cfg.geometry, &cfg.data_law)?;
            let analytic = tdm_detection_profile_opts(
                &cfg.geometry,
                &cfg.data_law,
                &cfg.feedback_law,
                &window,
                &cfg.channel,
                ProfileMethod::Analytic,
                &cfg.grid.quad,
            )?;
            let comparison = compare_tdm(&analytic, &emp, 3.0);
            json!({
                "scheme": "tdm",
                "empirical": emp,
                "empirical_profile": emp.to_profile(),
                "breakdown": breakdown,
                "analytic_profile": analytic,
                "comparison": comparison_json(&comparison),
            })
        }
    };
    if let Some(w) = &mut trace {
        w.flush().map_err(|e| Error::Config(format!("trace write failed: {e}")))?;
    }
    Ok(OutputRecord::new(cfg.seed, cfg.echo.clone(), payload))
}

fn optimize_env(cfg: &RunConfig) -> OptimizeEnv {
    OptimizeEnv {
        d_ab: cfg.geometry.d_ab,
        r_e: cfg.geometry.r_e,
        alpha: cfg.geometry.alpha,
        channel: cfg.channel,
        fec: cfg.fec,
    }
}

fn cmd_optimize(cfg: &RunConfig) -> Result<OutputRecord> {
    let env = optimize_env(cfg);
    let result = match cfg.scheme.single()? {
        Scheme::TwoWay => optimize_twoway(&env, &cfg.grid)?,
        Scheme::Tdm => optimize_tdm(&env, &cfg.grid)?,
    };
    let payload = serde_json::to_value(&result).expect("result serializes");
    Ok(OutputRecord::new(cfg.seed, cfg.echo.clone(), payload))
}

fn cmd_sweep(cfg: &RunConfig) -> Result<(OutputRecord, Vec<randsec::SweepPoint>)> {
    if !(cfg.ratio_min > 0.0 && cfg.ratio_min <= cfg.ratio_max && cfg.ratio_max <= 1.0) {
        return Err(Error::Config(format!(
            "sweep ratio range [{}, {}] must satisfy 0 < min <= max <= 1",
            cfg.ratio_min, cfg.ratio_max
        )));
    }
    let ratios = linspace(cfg.ratio_min, cfg.ratio_max, cfg.steps);
    let schemes = cfg.scheme.schemes();
    let env = optimize_env(cfg);
    let rows = sweep_ratio(&schemes, &ratios, &env, &cfg.grid, cfg.placement);
    let payload = json!({ "rows": rows });
    Ok((OutputRecord::new(cfg.seed, cfg.echo.clone(), payload), rows))
}

use std::fs::File;
use std::io::{BufWriter, Write};

use log::{error, info};

use crate::config::{Config, ScenarioFilter};
use crate::sim::{run_experiment, Scenario, SimResult};

use super::manifest::{RunManifest, ScenarioTiming};
use super::{runtime, thread_pool, CliError, SimulateArgs};

pub const RESULTS_HEADER: &str =
    "scenario_id,regression,error_dist,rho,n,method,coverage,coverage_se,mean_rel_length,frac_infinite,runtime_s";

pub const RESULTS_FILE: &str = "results.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

fn fmt_opt(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}

fn result_row(scn: &Scenario, r: &SimResult, timings: bool) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        scn.id(),
        scn.regression,
        scn.error_dist,
        scn.rho,
        scn.n,
        scn.method,
        r.coverage,
        r.coverage_se,
        fmt_opt(r.mean_rel_length),
        r.frac_infinite,
        if timings { format!("{:.3}", r.runtime_s) } else { String::new() },
    )
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let mut cfg = match &args.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(r) = args.replications {
        cfg.replications = r;
    }
    cfg.validate()?;
    let filter: ScenarioFilter = args.only.as_deref().unwrap_or("").parse()?;
    let scenarios: Vec<Scenario> = cfg.scenarios().into_iter().filter(|s| filter.matches(s)).collect();
    if scenarios.is_empty() {
        return Err(CliError::Usage("no scenario matches the grid and filter".into()));
    }

    std::fs::create_dir_all(&args.out_dir).map_err(|e| runtime(format!("{}: {e}", args.out_dir.display())))?;
    let results_path = args.out_dir.join(RESULTS_FILE);
    let manifest_path = args.out_dir.join(MANIFEST_FILE);
    let pool = thread_pool(args.threads)?;

    let mut manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        replications: cfg.replications,
        threads: pool.current_num_threads(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        status: "running".into(),
        scenarios_planned: scenarios.len(),
        scenarios_completed: 0,
        outputs: vec![results_path.display().to_string(), manifest_path.display().to_string()],
        timings: Vec::new(),
    };

    let file = File::create(&results_path).map_err(|e| runtime(format!("{}: {e}", results_path.display())))?;
    let mut out = BufWriter::new(file);
    let io_err = |e: std::io::Error| runtime(format!("{}: {e}", results_path.display()));
    writeln!(out, "{RESULTS_HEADER}").map_err(io_err)?;
    out.flush().map_err(io_err)?;

    let total = scenarios.len();
    for (i, scn) in scenarios.iter().enumerate() {
        match pool.install(|| run_experiment(scn)) {
            Ok(r) => {
                writeln!(out, "{}", result_row(scn, &r, args.timings)).map_err(io_err)?;
                out.flush().map_err(io_err)?;
                manifest.scenarios_completed += 1;
                manifest.timings.push(ScenarioTiming {
                    scenario_id: scn.id(),
                    runtime_s: r.runtime_s,
                });
                info!(
                    "[{}/{total}] {} coverage={:.3} rel_length={:.3} ({:.1}s)",
                    i + 1,
                    scn.id(),
                    r.coverage,
                    r.mean_rel_length,
                    r.runtime_s
                );
            }
            Err(e) => {
                error!("scenario {} failed: {e}", scn.id());
                manifest.status = "failed".into();
                manifest.write_atomic(&manifest_path).map_err(runtime)?;
                return Err(runtime(format!("scenario {} failed: {e}", scn.id())));
            }
        }
    }
    manifest.status = "complete".into();
    manifest.write_atomic(&manifest_path).map_err(runtime)?;
    info!("wrote {} and {}", results_path.display(), manifest_path.display());
    Ok(())
}

use std::fs::File;
use std::io::{BufWriter, Write};

use crate::config::Config;
use crate::data::{read_probes, Dataset};
use crate::ite::ArmIntervalBuilder;

use super::{input_error, runtime, thread_pool, CliError, PredictArgs};

pub const PREDICT_HEADER: &str = "lo,hi,arm_plus_lo,arm_plus_hi,arm_minus_lo,arm_minus_hi,degenerate";

fn effective_config(args: &PredictArgs) -> Result<Config, CliError> {
    let mut cfg = match &args.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(a) = args.alpha {
        cfg.alpha = a;
    }
    if let Some(r) = args.rule {
        cfg.ite.rule = r;
    }
    if let Some(m) = args.mode {
        cfg.conformal.mode = m.into();
    }
    if let Some(p) = args.predictor {
        cfg.predictor = p.into();
    }
    if let Some(k) = args.nonconformity {
        cfg.nonconformity = k.into();
    }
    if let Some(s) = args.grid_step {
        cfg.conformal.grid.step = s;
    }
    if args.split_frac.is_some() {
        cfg.conformal.split_frac = args.split_frac;
    }
    if let Some(s) = args.seed {
        cfg.nn.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn cmd_predict(args: &PredictArgs) -> Result<(), CliError> {
    let cfg = effective_config(args)?;
    let train = Dataset::read_csv_path(&args.train).map_err(input_error)?;
    let probe_file = File::open(&args.probes).map_err(|e| CliError::Usage(format!("{}: {e}", args.probes.display())))?;
    let (d, probes) = read_probes(probe_file, &args.probes).map_err(input_error)?;
    if d != train.dim() {
        return Err(CliError::Usage(format!(
            "{} has {d} covariates but {} has {}",
            args.probes.display(),
            args.train.display(),
            train.dim()
        )));
    }

    let pipeline = cfg.pipeline();
    let method = cfg.ite_method();
    let pool = thread_pool(args.threads)?;
    let rows = pool.install(|| -> crate::error::Result<Vec<String>> {
        let builder = ArmIntervalBuilder::new(&train, &pipeline)?;
        probes
            .iter()
            .map(|x| {
                let iv = builder.ite_interval(method, x)?;
                let p = &iv.arm_pair;
                Ok(format!(
                    "{},{},{},{},{},{},{}",
                    iv.interval.lo(),
                    iv.interval.hi(),
                    p.interval_plus.lo(),
                    p.interval_plus.hi(),
                    p.interval_minus.lo(),
                    p.interval_minus.hi(),
                    iv.is_degenerate()
                ))
            })
            .collect()
    });
    let rows = rows.map_err(runtime)?;

    let mut out: Box<dyn Write> = match &args.out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| runtime(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    };
    writeln!(out, "{PREDICT_HEADER}").map_err(runtime)?;
    for r in rows {
        writeln!(out, "{r}").map_err(runtime)?;
    }
    out.flush().map_err(runtime)
}

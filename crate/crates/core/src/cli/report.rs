use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use log::{info, warn};

use crate::sim::{ErrorDist, Method, Regression};

use super::simulate::RESULTS_HEADER;
use super::{runtime, CliError, ReportArgs};

/// Relative length of the oracle interval.
pub const REFERENCE_LENGTH: f64 = 1.0;

struct Row {
    regression: Regression,
    error_dist: ErrorDist,
    rho: String,
    n: usize,
    method: Method,
    coverage: f64,
    rel_length: Option<f64>,
}

type Panel = BTreeMap<usize, BTreeMap<Method, (f64, Option<f64>)>>;

fn read_rows(path: &Path) -> Result<Vec<Row>, CliError> {
    let bad = |line: usize, msg: String| CliError::Usage(format!("{}:{line}: {msg}", path.display()));
    let file = File::open(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let mut rdr = csv::ReaderBuilder::new().from_reader(file);
    let header = rdr.headers().map_err(|e| bad(1, e.to_string()))?.clone();
    let expected: Vec<&str> = RESULTS_HEADER.split(',').collect();
    if header.iter().collect::<Vec<_>>() != expected {
        return Err(bad(1, format!("expected header {RESULTS_HEADER}")));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| bad(line, e.to_string()))?;
        let parse_f = |k: usize| rec[k].parse::<f64>().map_err(|_| bad(line, format!("bad number {:?}", &rec[k])));
        let rho = rec[3].to_string();
        rho.parse::<f64>().map_err(|_| bad(line, format!("bad rho {rho:?}")))?;
        rows.push(Row {
            regression: rec[1].parse().map_err(|e| bad(line, e))?,
            error_dist: rec[2].parse().map_err(|e| bad(line, e))?,
            rho,
            n: rec[4].parse().map_err(|_| bad(line, format!("bad n {:?}", &rec[4])))?,
            method: rec[5].parse().map_err(|e| bad(line, e))?,
            coverage: parse_f(6)?,
            rel_length: if rec[8].is_empty() { None } else { Some(parse_f(8)?) },
        });
    }
    if rows.is_empty() {
        return Err(bad(2, "no result rows".into()));
    }
    Ok(rows)
}

fn write_panel(path: &Path, header: &str, panel: &Panel, pick: impl Fn(&(f64, Option<f64>)) -> Option<f64>) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{header}")?;
    let cols: Vec<String> = Method::STUDY.iter().map(|m| m.to_string()).collect();
    writeln!(w, "n,{}", cols.join(","))?;
    for (n, by_method) in panel {
        let cells: Vec<String> = Method::STUDY
            .iter()
            .map(|m| by_method.get(m).and_then(&pick).map(|v| v.to_string()).unwrap_or_default())
            .collect();
        writeln!(w, "{n},{}", cells.join(","))?;
    }
    w.flush()
}

pub fn cmd_report(args: &ReportArgs) -> Result<(), CliError> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(CliError::Usage(format!("alpha must lie in (0, 1), got {}", args.alpha)));
    }
    let rows = read_rows(&args.results)?;
    let mut order: Vec<(Regression, ErrorDist, String)> = Vec::new();
    let mut panels: Vec<Panel> = Vec::new();
    for r in rows {
        if !Method::STUDY.contains(&r.method) {
            warn!("skipping {} row", r.method);
            continue;
        }
        let key = (r.regression, r.error_dist, r.rho.clone());
        let idx = match order.iter().position(|k| *k == key) {
            Some(i) => i,
            None => {
                order.push(key);
                panels.push(Panel::new());
                order.len() - 1
            }
        };
        panels[idx].entry(r.n).or_default().insert(r.method, (r.coverage, r.rel_length));
    }

    std::fs::create_dir_all(&args.out_dir).map_err(|e| runtime(format!("{}: {e}", args.out_dir.display())))?;
    let nominal = 1.0 - args.alpha;
    for ((reg, dist, rho), panel) in order.iter().zip(&panels) {
        let stem = format!("{reg}_{dist}_rho{rho}");
        let cov = args.out_dir.join(format!("coverage_{stem}.csv"));
        let len = args.out_dir.join(format!("length_{stem}.csv"));
        let head = format!("# reference: nominal={nominal} oracle={REFERENCE_LENGTH}");
        write_panel(&cov, &head, panel, |v| Some(v.0)).map_err(|e| runtime(format!("{}: {e}", cov.display())))?;
        write_panel(&len, &head, panel, |v| v.1).map_err(|e| runtime(format!("{}: {e}", len.display())))?;
    }
    info!("wrote {} panel files to {}", 2 * order.len(), args.out_dir.display());
    Ok(())
}

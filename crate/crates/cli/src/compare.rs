use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context};
use entroland::solvers::{read_trace_csv, TraceMeta};

use crate::EXIT_CONFIG;

struct Column {
    name: String,
    values: Vec<(usize, Option<f64>)>,
}

fn load(traces: &[impl AsRef<Path>]) -> anyhow::Result<Vec<Column>> {
    let mut problem: Option<String> = None;
    let mut columns: Vec<Column> = Vec::new();
    for path in traces {
        let path = path.as_ref();
        let sidecar = crate::sidecar_path(path);
        let meta = TraceMeta::read_json(File::open(&sidecar).with_context(|| format!("opening {}", sidecar.display()))?)
            .with_context(|| format!("reading {}", sidecar.display()))?;
        match &problem {
            Some(p) if *p != meta.problem_id => {
                bail!("trace {} belongs to problem {}, expected {p}", path.display(), meta.problem_id)
            }
            _ => problem = Some(meta.problem_id.clone()),
        }
        let records = read_trace_csv(File::open(path).with_context(|| format!("opening {}", path.display()))?)
            .with_context(|| format!("reading {}", path.display()))?;
        let mut name = format!("l1_error_{}", meta.method);
        let mut n = 2;
        while columns.iter().any(|c| c.name == name) {
            name = format!("l1_error_{}_{n}", meta.method);
            n += 1;
        }
        columns.push(Column { name, values: records.iter().map(|r| (r.k, r.l1_error)).collect() });
    }
    Ok(columns)
}

/// Wide CSV `k,l1_error_<method>,…`; shorter traces are padded with empty cells.
fn write_wide<W: Write>(columns: &[Column], out: W) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["k".to_string()];
    header.extend(columns.iter().map(|c| c.name.clone()));
    w.write_record(&header)?;
    let max_k = columns.iter().flat_map(|c| c.values.iter().map(|v| v.0)).max();
    if let Some(max_k) = max_k {
        for k in 0..=max_k {
            let mut row = vec![k.to_string()];
            for c in columns {
                let cell = c.values.iter().find(|v| v.0 == k).and_then(|v| v.1);
                row.push(cell.map(|x| x.to_string()).unwrap_or_default());
            }
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_compare(traces: &[impl AsRef<Path>], out: Option<&Path>) -> ExitCode {
    let columns = match load(traces) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let written = match out {
        Some(p) => File::create(p).map_err(anyhow::Error::from).and_then(|f| write_wide(&columns, f)),
        None => write_wide(&columns, std::io::stdout().lock()),
    };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

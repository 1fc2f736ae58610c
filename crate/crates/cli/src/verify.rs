use std::fs::File;
use std::path::Path;
use std::process::ExitCode;

use entroland::solvers::{check_monotonicity, read_trace_csv, TraceMeta};

use crate::EXIT_CONFIG;

pub fn cmd_verify(trace: &Path, sidecar: Option<&Path>) -> ExitCode {
    let sidecar = sidecar.map_or_else(|| crate::sidecar_path(trace), Path::to_path_buf);
    let meta = match File::open(&sidecar).map_err(entroland::Error::from).and_then(TraceMeta::read_json) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {}: {e}", sidecar.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let records = match File::open(trace).map_err(entroland::Error::from).and_then(read_trace_csv) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}: {e}", trace.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match check_monotonicity(&records, meta.delta) {
        Ok(report) => match report.first_violation {
            None => {
                println!("ok: {} rows, {} comparisons, delta = {:e}", records.len(), report.comparisons, meta.delta);
                ExitCode::SUCCESS
            }
            Some(v) => {
                println!("violation: {v}");
                ExitCode::from(1)
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

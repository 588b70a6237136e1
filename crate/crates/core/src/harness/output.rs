use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

pub const SUMMARY_HEADER: &str = "mode,policy,m,replications,horizon,experts,realized_regret_mean,realized_regret_std,pseudo_regret_mean,pseudo_regret_std,baseline";
pub const TRACE_HEADER: &str = "mode,policy,m,replication,round,leader,decision_correct,cum_realized_regret,cum_pseudo_regret";
pub const LEMMA_HEADER: &str = "policy,committee_size,p_committee,horizon,phi,bound,empirical_pseudo_regret";

/// Nine significant digits in scientific notation, the same on every platform.
pub fn fmt_float(x: f64) -> String {
    if x == 0.0 {
        // no negative zero in output
        return format!("{:.8e}", 0.0);
    }
    format!("{x:.8e}")
}

/// Rounds where decimated traces keep a row: ten per decade plus the last one.
pub fn checkpoints(horizon: u64) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::new();
    let mut k = 0u32;
    loop {
        let r = 10f64.powf(f64::from(k) / 10.0).round() as u64;
        if r > horizon {
            break;
        }
        if out.last() != Some(&r) {
            out.push(r);
        }
        k += 1;
    }
    if out.last() != Some(&horizon) {
        out.push(horizon);
    }
    out
}

pub(crate) fn write_lines(path: &Path, header: &str, lines: impl IntoIterator<Item = String>) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{header}")?;
    for line in lines {
        writeln!(w, "{line}")?;
    }
    w.flush()
}

//! CSV emission for sweep results.
//!
//! One row per distance bin, probabilities and derived throughput in
//! fixed 6-decimal form so identical runs emit identical bytes. No field
//! ever needs quoting; a naive comma split parses every line.

use std::io::Write;

use crate::engine::CurveEstimate;
use crate::error::Result;

pub const CSV_HEADER: &str =
    "distance_km,p_h1,p_h1_ci,p_h2,p_h2_ci,p_success,p_success_ci,trials,sf,throughput_bps";

/// Write the curve estimate as CSV to `sink`.
pub fn emit_curves<W: Write>(result: &CurveEstimate, mut sink: W) -> Result<()> {
    sink.write_all(curves_to_string(result).as_bytes())?;
    Ok(())
}

/// The exact CSV document for a curve estimate.
pub fn curves_to_string(result: &CurveEstimate) -> String {
    let mut out = String::with_capacity(64 * (result.bins.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for bin in &result.bins {
        out.push_str(&format!(
            "{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{},{},{:.6}\n",
            bin.distance_km,
            bin.p_h1,
            bin.p_h1_ci,
            bin.p_h2,
            bin.p_h2_ci,
            bin.p_success,
            bin.p_success_ci,
            bin.trials,
            bin.sf,
            bin.throughput_bps,
        ));
    }
    out
}

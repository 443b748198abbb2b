use std::io::Write;

use super::PlatformSeries;
use crate::centrality::format_sig;
use crate::error::{Error, Result};

/// One row per (window, measure) with `window_start,measure,value,team_mean`.
/// Gaps leave the cell empty.
pub fn write_member_csv<W: Write>(series: &PlatformSeries, member: &str, out: W) -> Result<()> {
    let values = series
        .values
        .get(member)
        .ok_or_else(|| Error::UnknownMember(member.to_owned()))?;
    let cell = |x: Option<f64>| x.map(format_sig).unwrap_or_default();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["window_start", "measure", "value", "team_mean"])?;
    for (t, window) in series.windows.iter().enumerate() {
        for m in &series.measures {
            w.write_record([
                window.start.to_string(),
                m.name().to_owned(),
                cell(values[m][t]),
                cell(series.means[m][t]),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

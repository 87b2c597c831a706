use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};

/// One row of a metric report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricRow {
    pub condition: String,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub azimuth_deg: f64,
    /// Frequency in Hz or a band label such as `100-1600`.
    pub band: String,
    pub metric: String,
    pub value: f64,
    pub excluded: usize,
}

/// Writes rows as CSV with a header line.
pub fn write_metric_csv<W: Write>(out: W, rows: &[MetricRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
    }
    if rows.is_empty() {
        w.write_record(["condition", "x", "y", "z", "azimuth_deg", "band", "metric", "value", "excluded"])
            .map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
    }
    w.flush()?;
    Ok(())
}

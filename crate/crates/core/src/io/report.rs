//! CSV cross-validation reports.

use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::format_db;
use crate::train::CrossvalReport;

pub const REPORT_HEADER: [&str; 3] = ["image_id", "bilinear_db", "refined_db"];

/// One row per image (`id, bilinear dB, refined dB`, four decimals or `inf`)
/// followed by an `average` row.
pub fn report_csv(report: &CrossvalReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::InvalidValue(format!("csv: {e}"));
    w.write_record(REPORT_HEADER).map_err(csv_err)?;
    for row in &report.rows {
        w.write_record([row.id.as_str(), &format_db(row.bilinear_db), &format_db(row.refined_db)])
            .map_err(csv_err)?;
    }
    w.write_record([
        "average",
        &format_db(report.mean_bilinear_db),
        &format_db(report.mean_refined_db),
    ])
    .map_err(csv_err)?;
    let bytes = w.into_inner().map_err(|e| Error::InvalidValue(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output of UTF-8 fields is UTF-8"))
}

pub fn write_report(path: impl AsRef<Path>, report: &CrossvalReport) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, report_csv(report)?).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::train::CrossvalRow;

    #[test]
    fn layout() {
        let report = CrossvalReport {
            rows: vec![
                CrossvalRow { id: "a".into(), fold: 0, bilinear_db: 30.0, refined_db: 31.23456 },
                CrossvalRow { id: "b,c".into(), fold: 1, bilinear_db: f64::INFINITY, refined_db: 40.0 },
            ],
            mean_bilinear_db: f64::INFINITY,
            mean_refined_db: 35.61728,
            fold_losses: vec![],
        };
        assert_eq!(
            report_csv(&report).unwrap(),
            "image_id,bilinear_db,refined_db\na,30.0000,31.2346\n\"b,c\",inf,40.0000\naverage,inf,35.6173\n"
        );
    }
}

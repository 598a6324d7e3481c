//! CSV time series, run summary sidecar and config echo.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::diagnostics::DiagnosticsRecord;
use crate::error::HarnessError;
use crate::solver::{RunSummary, StopReason};

pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const CONFIG_ECHO_FILE: &str = "config.resolved";

/// C `%.12e`: twelve fraction digits, signed exponent of at least two digits.
pub fn format_sci(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{v:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let (sign, digits) = match exp.strip_prefix('-') {
        Some(d) => ('-', d),
        None => ('+', exp),
    };
    format!("{mantissa}e{sign}{digits:0>2}")
}

/// Streams records to a CSV file with a header row.
pub struct CsvSink {
    writer: csv::Writer<File>,
    path: PathBuf,
    rows: usize,
}

impl CsvSink {
    pub fn create(path: &Path, p_list: &[f64]) -> Result<Self, HarnessError> {
        let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
        let mut writer = csv::Writer::from_writer(file);
        writer.write_record(DiagnosticsRecord::header(p_list))?;
        Ok(CsvSink {
            writer,
            path: path.to_path_buf(),
            rows: 0,
        })
    }

    pub fn write(&mut self, record: &DiagnosticsRecord) -> Result<(), HarnessError> {
        self.writer
            .write_record(record.values().iter().map(|v| format_sci(*v)))?;
        self.rows += 1;
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn finish(mut self) -> Result<(), HarnessError> {
        self.writer
            .flush()
            .map_err(|e| HarnessError::io(&self.path, e))
    }
}

/// A numeric CSV table.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self, HarnessError> {
        let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_reader(file)
    }

    pub fn from_reader(reader: impl std::io::Read) -> Result<Self, HarnessError> {
        let mut rdr = csv::Reader::from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(|s| s.trim().to_string()).collect();
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|s| {
                    s.trim().parse::<f64>().map_err(|_| {
                        HarnessError::Usage(format!("row {}: '{}' is not a number", i + 1, s))
                    })
                })
                .collect::<Result<Vec<f64>, _>>()?;
            rows.push(row);
        }
        Ok(Table { header, rows })
    }

    pub fn column_index(&self, name: &str) -> Result<usize, HarnessError> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| HarnessError::MissingColumn(name.to_string()))
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>, HarnessError> {
        let j = self.column_index(name)?;
        Ok(self.rows.iter().map(|r| r[j]).collect())
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<(), HarnessError> {
    let mut f = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    f.write_all(text.as_bytes())
        .map_err(|e| HarnessError::io(path, e))
}

/// `key=value` sidecar with the stop reason, step count and wall time.
pub fn summary_text(summary: &RunSummary, wall_seconds: f64) -> String {
    let mut s = format!(
        "stop_reason={}\nsteps={}\nrecords={}\nfinal_t={}\nwall_seconds={:.3}\n",
        summary.stop_reason, summary.steps, summary.records, format_sci(summary.final_t), wall_seconds
    );
    if let StopReason::BlowUp { t } = summary.stop_reason {
        s.push_str(&format!("blow_up_t={}\n", format_sci(t)));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_style_scientific() {
        assert_eq!(format_sci(0.0), "0.000000000000e+00");
        assert_eq!(format_sci(1.5), "1.500000000000e+00");
        assert_eq!(format_sci(-2.5e-7), "-2.500000000000e-07");
        assert_eq!(format_sci(6.02e123), "6.020000000000e+123");
        assert_eq!(format_sci(f64::NAN), "nan");
        assert_eq!("1.234567890123e-05".parse::<f64>().unwrap(), 1.234567890123e-5);
    }

    #[test]
    fn table_parsing() {
        let t = Table::from_reader("t,a\n0.0e+00,1\n1.0e+00,2\n".as_bytes()).unwrap();
        assert_eq!(t.column("a").unwrap(), vec![1.0, 2.0]);
        assert!(matches!(t.column("b"), Err(HarnessError::MissingColumn(_))));
        assert!(Table::from_reader("t\nx\n".as_bytes()).is_err());
    }
}

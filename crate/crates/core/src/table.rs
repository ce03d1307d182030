//! Plain numeric CSV tables with a fixed, round-trippable float format.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Formats with 17 significant digits so values survive a text round trip.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Table { headers: headers.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.headers.len(), "row width does not match header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.headers.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.headers.join(",");
        s.push('\n');
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                let _ = write!(s, "{}", format_value(*v));
            }
            s.push('\n');
        }
        s
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse { context: "csv".into(), message: "missing header".into() })?;
        let mut table = Table::new(header.split(',').map(str::trim));
        for (i, line) in lines.enumerate() {
            let row = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| Error::Parse { context: format!("csv row {}", i + 1), message: e.to_string() })?;
            if row.len() != table.headers.len() {
                return Err(Error::Parse {
                    context: format!("csv row {}", i + 1),
                    message: format!("{} fields, expected {}", row.len(), table.headers.len()),
                });
            }
            table.rows.push(row);
        }
        Ok(table)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Table::parse_csv(&std::fs::read_to_string(path)?)
    }
}

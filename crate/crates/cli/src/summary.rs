//! Summary CSV: one row per reported quantity.
//!
//! Scalars fill the `max` column only; field statistics fill all three.

use std::fmt::Write as _;
use std::path::Path;

use desitter_twistor::chart::Stats;

use crate::error::CliError;

pub const SUMMARY_VERSION: u32 = 1;
pub const HEADER: &str = "summary_version,command,quantity,max,mean,l2";

/// Quantity, max, and mean with l2 for field statistics.
type Row = (String, f64, Option<(f64, f64)>);

#[derive(Clone, Debug, Default)]
pub struct Summary {
    command: String,
    rows: Vec<Row>,
}

impl Summary {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            rows: Vec::new(),
        }
    }

    pub fn scalar(&mut self, quantity: &str, value: f64) {
        self.rows.push((quantity.to_string(), value, None));
    }

    pub fn stats(&mut self, quantity: &str, s: Stats) {
        self.rows.push((quantity.to_string(), s.max, Some((s.mean, s.l2))));
    }

    pub fn rows(&self) -> impl Iterator<Item = (&str, f64)> {
        self.rows.iter().map(|(q, v, _)| (q.as_str(), *v))
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{HEADER}");
        for (q, max, rest) in &self.rows {
            let (mean, l2) = match rest {
                Some((m, l)) => (format!("{m:e}"), format!("{l:e}")),
                None => (String::new(), String::new()),
            };
            let _ = writeln!(out, "{SUMMARY_VERSION},{},{q},{max:e},{mean},{l2}", self.command);
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.render()).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Aligned `quantity  value` lines for the terminal.
    pub fn print(&self) {
        let width = self.rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
        for (q, v, rest) in &self.rows {
            match rest {
                Some((m, l)) => println!("{q:width$}  max {v:.6e}  mean {m:.6e}  l2 {l:.6e}"),
                None => println!("{q:width$}  {v:.6e}"),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_follow_the_header() {
        let mut s = Summary::new("energy");
        s.scalar("twistor_energy", -0.5);
        s.stats(
            "gauss",
            Stats {
                max: 1.0,
                mean: 0.5,
                l2: 0.75,
            },
        );
        let text = s.render();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], HEADER);
        assert_eq!(lines[1], "1,energy,twistor_energy,-5e-1,,");
        assert_eq!(lines[2], "1,energy,gauss,1e0,5e-1,7.5e-1");
    }
}

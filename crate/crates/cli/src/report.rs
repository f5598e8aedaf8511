use std::fmt::Display;

use clap::ValueEnum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    /// Aligned `key  value` lines for people.
    Text,
    /// One `key=value` per line for scripts.
    Kv,
}

/// Ordered key/value lines printed after a command finishes.
#[derive(Debug, Default)]
pub struct Report {
    entries: Vec<(String, String)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, key: impl Into<String>, value: impl Display) -> &mut Self {
        self.entries.push((key.into(), value.to_string()));
        self
    }

    pub fn extend(&mut self, other: Report) {
        self.entries.extend(other.entries);
    }

    pub fn render(&self, format: ReportFormat) -> String {
        let width = self.entries.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in &self.entries {
            match format {
                ReportFormat::Text => out.push_str(&format!("{k:<width$}  {v}\n")),
                // keep each entry on a single line
                ReportFormat::Kv => out.push_str(&format!("{k}={}\n", v.replace('\n', " "))),
            }
        }
        out
    }
}

/// Formats a ratio with enough digits to compare runs.
pub fn ratio(num: usize, den: usize) -> String {
    if den == 0 {
        "nan".into()
    } else {
        format!("{:.4}", num as f64 / den as f64)
    }
}

//! Tabulated curves with provenance, emitted as CSV or JSON for plotting.
//!
//! CSV dialect: `#`-prefixed `key: value` header lines, one column-name row,
//! then comma-separated values in `{:.11e}` (12 significant digits). The body
//! depends only on the data, so identical runs give identical bodies.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub const VERSION: &str = concat!("cachecast ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrialCount {
    Analytic,
    MonteCarlo(u64),
}

impl std::fmt::Display for TrialCount {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TrialCount::Analytic => f.write_str("analytic"),
            TrialCount::MonteCarlo(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub trials: TrialCount,
    pub version: String,
    /// Free-form parameters echoed into the header, sorted by key.
    pub parameters: BTreeMap<String, String>,
    /// Wall-clock stamp; kept out of the CSV body.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub generated_at: Option<String>,
}

impl Provenance {
    pub fn new(config_hash: impl Into<String>, seed: u64, trials: TrialCount) -> Self {
        Self {
            config_hash: config_hash.into(),
            seed,
            trials,
            version: VERSION.to_string(),
            parameters: BTreeMap::new(),
            generated_at: None,
        }
    }

    pub fn with(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.parameters.insert(key.into(), value.to_string());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveTable {
    pub title: String,
    pub x_label: String,
    pub y_labels: Vec<String>,
    pub x: Vec<f64>,
    /// `columns[j][i]` is `y_j(x_i)`.
    pub columns: Vec<Vec<f64>>,
    pub provenance: Provenance,
}

fn check_label(s: &str) -> Result<()> {
    if s.is_empty() || s.contains([',', '\n', '\r', '"']) {
        return invalid(format!("column label {s:?} must be non-empty without commas, quotes or newlines"));
    }
    Ok(())
}

impl CurveTable {
    pub fn new(
        title: impl Into<String>,
        x_label: impl Into<String>,
        x: Vec<f64>,
        provenance: Provenance,
    ) -> Result<Self> {
        let x_label = x_label.into();
        check_label(&x_label)?;
        if x.iter().any(|v| !v.is_finite()) {
            return invalid("x values must be finite");
        }
        if let Some(w) = x.windows(2).find(|w| w[1] <= w[0]) {
            return invalid(format!("x must be strictly increasing, found {} then {}", w[0], w[1]));
        }
        Ok(Self {
            title: title.into(),
            x_label,
            y_labels: Vec::new(),
            x,
            columns: Vec::new(),
            provenance,
        })
    }

    pub fn push_column(&mut self, label: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let label = label.into();
        check_label(&label)?;
        if values.len() != self.x.len() {
            return invalid(format!(
                "column {label} has {} values for {} x points",
                values.len(),
                self.x.len()
            ));
        }
        self.y_labels.push(label);
        self.columns.push(values);
        Ok(())
    }

    pub fn with_column(mut self, label: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        self.push_column(label, values)?;
        Ok(self)
    }

    pub fn column(&self, label: &str) -> Option<&[f64]> {
        self.y_labels.iter().position(|l| l == label).map(|i| self.columns[i].as_slice())
    }

    /// Header comments (provenance).
    pub fn csv_header(&self) -> String {
        let p = &self.provenance;
        let mut s = String::new();
        let title = self.title.replace(['\n', '\r'], " ");
        let _ = writeln!(s, "# title: {title}");
        let _ = writeln!(s, "# config_hash: {}", p.config_hash);
        let _ = writeln!(s, "# seed: {}", p.seed);
        let _ = writeln!(s, "# trials: {}", p.trials);
        let _ = writeln!(s, "# version: {}", p.version);
        for (k, v) in &p.parameters {
            let _ = writeln!(s, "# {k}: {}", v.replace(['\n', '\r'], " "));
        }
        if let Some(t) = &p.generated_at {
            let _ = writeln!(s, "# generated_at: {t}");
        }
        s
    }

    /// Column-name row and data rows.
    pub fn csv_body(&self) -> String {
        let mut s = String::new();
        s.push_str(&self.x_label);
        for l in &self.y_labels {
            s.push(',');
            s.push_str(l);
        }
        s.push('\n');
        for (i, x) in self.x.iter().enumerate() {
            let _ = write!(s, "{x:.11e}");
            for c in &self.columns {
                let _ = write!(s, ",{:.11e}", c[i]);
            }
            s.push('\n');
        }
        s
    }

    pub fn to_csv(&self) -> String {
        self.csv_header() + &self.csv_body()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(self.to_csv().as_bytes())
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}

/// Splits a CSV produced by [`CurveTable::to_csv`] and returns the body only.
pub fn csv_body_of(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .flat_map(|l| [l, "\n"])
        .collect()
}

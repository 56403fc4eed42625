//! Verification reports: per-cell residuals against a tolerance.

use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellResidual {
    pub index: Vec<usize>,
    /// Lattice direction for edge-based checks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<usize>,
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub check: String,
    /// `default` or `custom` when the tolerance was overridden.
    pub profile: String,
    pub tolerance: f64,
    pub cells: Vec<CellResidual>,
    pub max: f64,
    pub mean: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst: Option<Vec<usize>>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl VerificationReport {
    /// Passes iff the largest residual is within `tolerance`.
    pub fn from_cells(check: &str, profile: &str, tolerance: f64, cells: Vec<CellResidual>) -> Self {
        let max = cells.iter().map(|c| c.residual).fold(0.0, f64::max);
        let mean = if cells.is_empty() {
            0.0
        } else {
            cells.iter().map(|c| c.residual).sum::<f64>() / cells.len() as f64
        };
        let worst = cells
            .iter()
            .max_by(|a, b| a.residual.total_cmp(&b.residual))
            .map(|c| c.index.clone());
        let pass = cells.iter().all(|c| c.residual <= tolerance);
        VerificationReport {
            check: check.into(),
            profile: profile.into(),
            tolerance,
            cells,
            max,
            mean,
            worst,
            pass,
            notes: Vec::new(),
        }
    }

    pub fn note(mut self, s: impl Into<String>) -> Self {
        self.notes.push(s.into());
        self
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
                s.push('\n');
                s
            }
            ReportFormat::Text => {
                let mut s = format!("check: {}\n", self.check);
                s += &format!("tolerance: {:e} ({})\n", self.tolerance, self.profile);
                s += &format!("cells: {}\n", self.cells.len());
                match &self.worst {
                    Some(u) => s += &format!("max residual: {:e} at {u:?}\n", self.max),
                    None => s += &format!("max residual: {:e}\n", self.max),
                }
                s += &format!("mean residual: {:e}\n", self.mean);
                for n in &self.notes {
                    s += &format!("{n}\n");
                }
                s += if self.pass { "result: PASS\n" } else { "result: FAIL\n" };
                s
            }
        }
    }
}

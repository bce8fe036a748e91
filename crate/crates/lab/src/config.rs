//! Experiment configuration shared by every subcommand.

use crate::error::{LabError, LabResult};
use crate::report::{Format, Value};

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub command: String,
    pub inputs: Vec<String>,
    /// Nodes per torus dimension.
    pub grid: Option<usize>,
    pub scales: Vec<usize>,
    pub tolerances: Vec<(String, f64)>,
    pub seed: u64,
    pub output: Option<String>,
    pub format: Format,
}

impl ExperimentConfig {
    pub fn new(command: &str, format: Format, output: Option<String>) -> Self {
        ExperimentConfig {
            command: command.into(),
            inputs: Vec::new(),
            grid: None,
            scales: Vec::new(),
            tolerances: Vec::new(),
            seed: 0,
            output,
            format,
        }
    }

    pub fn validate(&self) -> LabResult<()> {
        if let Some(n) = self.grid {
            if n < 2 {
                return Err(LabError::Usage(format!("grid must have at least 2 nodes, got {n}")));
            }
        }
        if self.scales.first() == Some(&0) || self.scales.windows(2).any(|w| w[0] >= w[1]) {
            return Err(LabError::Usage(format!("scales must be positive and increasing: {:?}", self.scales)));
        }
        for (k, v) in &self.tolerances {
            if !v.is_finite() {
                return Err(LabError::Usage(format!("{k} must be finite")));
            }
        }
        Ok(())
    }

    /// Entries echoed into JSON reports. Output path and format are left
    /// out so the report bytes depend only on the experiment.
    pub fn entries(&self) -> Vec<(String, Value)> {
        let mut out = vec![("seed".to_string(), Value::Int(self.seed as i64))];
        if !self.inputs.is_empty() {
            out.push(("inputs".into(), Value::Text(self.inputs.join(";"))));
        }
        if let Some(g) = self.grid {
            out.push(("grid".into(), Value::Int(g as i64)));
        }
        if !self.scales.is_empty() {
            out.push(("scales".into(), Value::Text(self.scales.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(";"))));
        }
        for (k, v) in &self.tolerances {
            out.push((k.clone(), Value::Float(*v)));
        }
        out
    }
}

//! Machine-readable experiment reports.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::metric_graph::Model;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDescriptor {
    pub name: String,
    pub vertices: usize,
    pub edges: usize,
    pub genus: usize,
}

impl ModelDescriptor {
    pub fn of(m: &Model) -> Self {
        ModelDescriptor {
            name: m.name().to_string(),
            vertices: m.vertex_count(),
            edges: m.edge_count(),
            genus: m.genus(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub model: ModelDescriptor,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub checks: Vec<CheckOutcome>,
    pub certificates: Vec<Value>,
    /// Wall-clock time; not part of the reproducible content.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u64>,
}

impl ExperimentReport {
    pub fn new(m: &Model, command: impl Into<String>, seed: Option<u64>) -> Self {
        ExperimentReport {
            model: ModelDescriptor::of(m),
            command: command.into(),
            seed,
            checks: Vec::new(),
            certificates: Vec::new(),
            timing_ms: None,
        }
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Serialize) {
        self.checks.push(CheckOutcome {
            name: name.into(),
            passed,
            detail: serde_json::to_value(detail).expect("detail serialises"),
        });
    }

    pub fn certificate(&mut self, c: impl Serialize) {
        self.certificates.push(serde_json::to_value(c).expect("certificate serialises"));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// JSON without the timing field, for reproducibility comparisons.
    pub fn reproducible_json(&self) -> String {
        ExperimentReport {
            timing_ms: None,
            ..self.clone()
        }
        .to_json()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::families;

    #[test]
    fn timing_is_excluded() {
        let m = families::complete_graph(4);
        let mut a = ExperimentReport::new(&m, "genus", None);
        a.check("genus", true, 3);
        let mut b = a.clone();
        a.timing_ms = Some(5);
        b.timing_ms = Some(17);
        assert_ne!(a.to_json(), b.to_json());
        assert_eq!(a.reproducible_json(), b.reproducible_json());
        assert!(a.passed());
        let back: ExperimentReport = serde_json::from_str(&a.to_json()).unwrap();
        assert_eq!(back, a);
    }
}

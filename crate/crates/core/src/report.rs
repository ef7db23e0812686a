//! Named bound values and the law each one targets.

use std::collections::BTreeMap;

/// The approximating law a bound refers to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    Poisson { lambda: f64 },
    NegativeBinomial { r: f64, p: f64 },
}

/// What the bound measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    TotalVariation,
    /// A bound on `sup_k |P(S_n = k) - P(Y = k)|`, not on total variation.
    Pointwise,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundEntry {
    pub method: String,
    pub value: f64,
    /// Whether `value` is a rigorous upper bound for the metric, truncation
    /// included. Literature comparison values are reported uncertified.
    pub certified: bool,
    pub metric: Metric,
    pub target: Target,
    pub params: BTreeMap<String, f64>,
    pub note: Option<String>,
}

impl BoundEntry {
    pub fn new(method: impl Into<String>, value: f64, target: Target) -> Self {
        Self {
            method: method.into(),
            value,
            certified: true,
            metric: Metric::TotalVariation,
            target,
            params: BTreeMap::new(),
            note: None,
        }
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn uncertified(mut self, note: impl Into<String>) -> Self {
        self.certified = false;
        self.note = Some(note.into());
        self
    }

    pub fn pointwise(mut self) -> Self {
        self.metric = Metric::Pointwise;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoundReport {
    pub entries: Vec<BoundEntry>,
    pub lambda_used: f64,
}

impl BoundReport {
    pub fn new(lambda_used: f64) -> Self {
        Self {
            entries: Vec::new(),
            lambda_used,
        }
    }

    pub fn push(&mut self, entry: BoundEntry) {
        self.entries.push(entry);
    }

    pub fn get(&self, method: &str) -> Option<&BoundEntry> {
        self.entries.iter().find(|e| e.method == method)
    }
}

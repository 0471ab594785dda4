//! Input files besides scenarios: mechanism reports and market outcomes.

use std::path::Path;

use serde::Deserialize;
use tecoord_core::{Error, MarketOutcome, Prices, Result, Scenario, Theta};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportsDoc {
    pub reports: Vec<Theta>,
}

/// Parses a reports file: `{"reports": [{"alpha": .., "beta": ..}, ..]}`.
pub fn parse_reports(text: &str) -> Result<Vec<Theta>> {
    let doc: ReportsDoc = serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("reports file: {e}")))?;
    for (i, t) in doc.reports.iter().enumerate() {
        if !(t.alpha.is_finite() && t.beta.is_finite() && t.beta > 0.0) {
            return Err(Error::InvalidInput(format!(
                "report {} has alpha {} and beta {}",
                i + 1,
                t.alpha,
                t.beta
            )));
        }
    }
    Ok(doc.reports)
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutcomeDoc {
    pub allocations: Vec<f64>,
    pub supply: f64,
    pub price: f64,
}

/// Parses a candidate market outcome: allocations, supply and a uniform price.
pub fn parse_outcome(text: &str) -> Result<MarketOutcome> {
    let doc: OutcomeDoc = serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("outcome file: {e}")))?;
    let finite = doc
        .allocations
        .iter()
        .chain([&doc.supply, &doc.price])
        .all(|v| v.is_finite());
    if !finite {
        return Err(Error::InvalidInput("outcome values must be finite".into()));
    }
    Ok(MarketOutcome {
        payments: doc.allocations.iter().map(|a| -doc.price * a).collect(),
        supply: doc.supply,
        prices: Prices::Uniform(doc.price),
        allocations: doc.allocations,
    })
}

pub(crate) fn read_input(path: &Path) -> std::result::Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn load_scenario(path: &Path) -> std::result::Result<Scenario, CliError> {
    let text = read_input(path)?;
    Scenario::from_json(&text).map_err(|e| CliError::Core(e).context(path))
}

//! Scenario-driven verification of the ambient-core engine: load a scenario,
//! run the requested suites, and emit a report.

pub mod bundled;
pub mod report;
pub mod scenario;
pub mod suites;

use std::collections::BTreeMap;
use std::time::Instant;

pub use report::{CheckRecord, Row, ToleranceSource, VerificationReport, Witness};
pub use scenario::{load_scenario, parse_scenario, GaussBonnetSpec, ScenarioError, ScenarioSpec};
pub use suites::{run_suites, Suite, CATALOG};

/// Command-line adjustments applied on top of a scenario.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Restrict to these suites; empty means the scenario's own list.
    pub suites: Vec<Suite>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub tolerances: BTreeMap<String, f64>,
}

pub fn verify(
    spec: &ScenarioSpec,
    options: &RunOptions,
) -> Result<VerificationReport, ScenarioError> {
    let start = Instant::now();
    for key in options.tolerances.keys() {
        if suites::catalog(key).is_none() {
            return Err(ScenarioError::Invalid {
                key: format!("--tolerance {key}"),
                message: "unknown check id".into(),
            });
        }
    }
    let mut spec = spec.clone();
    if let Some(seed) = options.seed {
        spec.seed = seed;
    }
    if let Some(n) = options.samples {
        if n == 0 {
            return Err(ScenarioError::Invalid {
                key: "--samples".into(),
                message: "must be positive".into(),
            });
        }
        spec.points = n;
        spec.points_per_scale = n;
    }
    let selected: Vec<Suite> = if options.suites.is_empty() {
        spec.suites.clone()
    } else {
        let mut s = options.suites.clone();
        s.sort();
        s.dedup();
        s
    };
    for s in &selected {
        let missing = match s {
            Suite::Minkowski => spec.embedding.is_none(),
            Suite::GaussBonnet => spec.gauss_bonnet.is_none(),
            _ => false,
        };
        if missing {
            return Err(ScenarioError::Invalid {
                key: s.name().into(),
                message: format!("suite `{}` needs a [{}] section", s.name(), s.name()),
            });
        }
    }
    let checks = run_suites(&spec, &selected, &options.tolerances)?;
    Ok(VerificationReport {
        scenario: spec.name.clone(),
        seed: spec.seed,
        samples: spec.points,
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_ms: start.elapsed().as_millis() as u64,
        checks,
    })
}

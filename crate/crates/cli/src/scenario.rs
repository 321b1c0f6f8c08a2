//! Scenario files: TOML with the sections `[manifold]`, `[alpha]`, `[scale]`,
//! `[suites]`, `[sampling]` and the optional `[tolerances]`, `[minkowski]`,
//! `[expectations]` and `[gauss_bonnet]`.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use ambient_core::{
    AlphaFamily, Chart, Expr, GeomError, Interval, MetricField, ScalarField, Scope, Signature,
};
use serde::Deserialize;
use thiserror::Error;

use crate::bundled;
use crate::suites::{Suite, CATALOG};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("{key}: {message}")]
    Invalid { key: String, message: String },

    #[error("{key}: {source}")]
    Geometry { key: String, source: GeomError },
}

fn invalid(key: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        key: key.into(),
        message: message.into(),
    }
}

fn geometry(key: impl Into<String>) -> impl FnOnce(GeomError) -> ScenarioError {
    let key = key.into();
    move |source| ScenarioError::Geometry { key, source }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Bound {
    Number(f64),
    Text(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    #[serde(default)]
    description: String,
    manifold: RawManifold,
    alpha: RawAlpha,
    scale: RawScale,
    suites: RawSuites,
    #[serde(default)]
    sampling: RawSampling,
    #[serde(default)]
    tolerances: BTreeMap<String, f64>,
    minkowski: Option<RawMinkowski>,
    #[serde(default)]
    expectations: RawExpectations,
    gauss_bonnet: Option<RawGaussBonnet>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifold {
    coordinates: Vec<String>,
    bounds: Vec<[Bound; 2]>,
    metric: Vec<Vec<String>>,
    #[serde(default)]
    constants: BTreeMap<String, f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAlpha {
    components: Vec<Vec<String>>,
    epsilon: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScale {
    u: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSuites {
    run: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSampling {
    #[serde(default = "default_seed")]
    seed: u64,
    #[serde(default = "default_points")]
    points: usize,
    #[serde(default = "default_points_per_scale")]
    points_per_scale: usize,
}

impl Default for RawSampling {
    fn default() -> Self {
        RawSampling {
            seed: default_seed(),
            points: default_points(),
            points_per_scale: default_points_per_scale(),
        }
    }
}

fn default_seed() -> u64 {
    1
}

fn default_points() -> usize {
    200
}

fn default_points_per_scale() -> usize {
    100
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMinkowski {
    embedding: Vec<String>,
}

/// Properties the scenario author asserts, each enabling an extra check.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExpectations {
    #[serde(default)]
    flat_moebius: bool,
    #[serde(default)]
    ricci_flat: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGaussBonnet {
    domain: [[Bound; 2]; 2],
    euler_characteristic: i32,
    #[serde(default = "default_nodes")]
    nodes: usize,
}

fn default_nodes() -> usize {
    400
}

#[derive(Debug, Clone)]
pub struct GaussBonnetSpec {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub euler_characteristic: i32,
    pub nodes: usize,
}

/// A fully parsed and validated scenario.
#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    pub name: String,
    pub description: String,
    pub metric: MetricField,
    pub alpha: AlphaFamily,
    pub scales: Vec<ScalarField>,
    pub suites: Vec<Suite>,
    pub seed: u64,
    pub points: usize,
    pub points_per_scale: usize,
    pub tolerances: BTreeMap<String, f64>,
    pub embedding: Option<Vec<String>>,
    pub flat_moebius: bool,
    pub ricci_flat: bool,
    pub gauss_bonnet: Option<GaussBonnetSpec>,
}

impl ScenarioSpec {
    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    pub fn chart(&self) -> &Arc<Chart> {
        self.metric.chart()
    }
}

/// Loads a scenario from a path, or from the bundled set when `source`
/// names one and no such file exists.
pub fn load_scenario(source: &str) -> Result<ScenarioSpec, ScenarioError> {
    let path = Path::new(source);
    if !path.exists() {
        if let Some(text) = bundled::lookup(source) {
            return parse_scenario(text);
        }
    }
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
        path: source.to_string(),
        source: e,
    })?;
    parse_scenario(&text)
}

fn constant_scope(constants: &BTreeMap<String, f64>) -> Scope {
    Scope::new::<&str>(&[]).with_constants(constants)
}

fn bound_value(b: &Bound, scope: &Scope, key: &str) -> Result<f64, ScenarioError> {
    match b {
        Bound::Number(v) => Ok(*v),
        Bound::Text(s) => match s.trim() {
            "inf" | "+inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            src => Expr::parse(src, scope)
                .and_then(|e| e.eval(&[]))
                .map_err(geometry(key)),
        },
    }
}

fn matrix(rows: &[Vec<String>], n: usize, key: &str) -> Result<Vec<String>, ScenarioError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(invalid(key, format!("expected a {n}x{n} matrix")));
    }
    Ok(rows.iter().flatten().cloned().collect())
}

pub fn parse_scenario(text: &str) -> Result<ScenarioSpec, ScenarioError> {
    let raw: RawScenario =
        toml::from_str(text).map_err(|e| ScenarioError::Schema(e.to_string()))?;
    let m = &raw.manifold;
    let n = m.coordinates.len();
    if n < 2 {
        return Err(invalid(
            "manifold.coordinates",
            "at least two coordinates are required",
        ));
    }
    if m.bounds.len() != n {
        return Err(invalid(
            "manifold.bounds",
            format!("expected {n} intervals, got {}", m.bounds.len()),
        ));
    }
    let scope = constant_scope(&m.constants);
    let bounds = m
        .bounds
        .iter()
        .enumerate()
        .map(|(i, [lo, hi])| {
            let key = format!("manifold.bounds[{i}]");
            Ok(Interval::new(
                bound_value(lo, &scope, &key)?,
                bound_value(hi, &scope, &key)?,
            ))
        })
        .collect::<Result<Vec<_>, ScenarioError>>()?;
    let chart = Chart::new(&raw.name, &m.coordinates, bounds)
        .and_then(|c| c.with_constants(m.constants.clone()))
        .map_err(geometry("manifold"))?;
    let metric = MetricField::parse(
        &chart,
        &matrix(&m.metric, n, "manifold.metric")?,
        Signature::Riemannian,
    )
    .map_err(geometry("manifold.metric"))?;

    if !(raw.alpha.epsilon > 0.0) {
        return Err(invalid(
            "alpha.epsilon",
            format!("must be positive, got {}", raw.alpha.epsilon),
        ));
    }
    let alpha = AlphaFamily::parse(
        &metric,
        &matrix(&raw.alpha.components, n, "alpha.components")?,
        raw.alpha.epsilon,
    )
    .map_err(geometry("alpha"))?;

    if raw.scale.u.is_empty() {
        return Err(invalid(
            "scale.u",
            "at least one scale function is required",
        ));
    }
    let cscope = chart.scope();
    let scales = raw
        .scale
        .u
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let e = Expr::parse(s, &cscope).map_err(geometry(format!("scale.u[{i}]")))?;
            ScalarField::new(&chart, e).map_err(geometry(format!("scale.u[{i}]")))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut suites = Vec::new();
    for (i, s) in raw.suites.run.iter().enumerate() {
        let suite = Suite::parse(s)
            .ok_or_else(|| invalid(format!("suites.run[{i}]"), format!("unknown suite `{s}`")))?;
        if !suites.contains(&suite) {
            suites.push(suite);
        }
    }
    suites.sort();

    for (key, v) in &raw.tolerances {
        if !CATALOG.iter().any(|c| c.id == key) {
            return Err(invalid(format!("tolerances.{key}"), "unknown check id"));
        }
        if !(*v >= 0.0) {
            return Err(invalid(
                format!("tolerances.{key}"),
                "tolerance must be non-negative",
            ));
        }
    }
    if raw.sampling.points == 0 || raw.sampling.points_per_scale == 0 {
        return Err(invalid("sampling.points", "must be positive"));
    }

    let embedding = match &raw.minkowski {
        Some(mk) => {
            if mk.embedding.len() != n + 1 {
                return Err(invalid(
                    "minkowski.embedding",
                    format!("expected {} components", n + 1),
                ));
            }
            for (i, s) in mk.embedding.iter().enumerate() {
                Expr::parse(s, &cscope).map_err(geometry(format!("minkowski.embedding[{i}]")))?;
            }
            Some(mk.embedding.clone())
        }
        None => None,
    };
    let gauss_bonnet = match &raw.gauss_bonnet {
        Some(gb) => {
            if n != 2 {
                return Err(invalid(
                    "gauss_bonnet",
                    "quadrature is only defined for surfaces",
                ));
            }
            let mut lo = [0.0; 2];
            let mut hi = [0.0; 2];
            for i in 0..2 {
                let key = format!("gauss_bonnet.domain[{i}]");
                lo[i] = bound_value(&gb.domain[i][0], &scope, &key)?;
                hi[i] = bound_value(&gb.domain[i][1], &scope, &key)?;
                if !(lo[i] < hi[i]) || !lo[i].is_finite() || !hi[i].is_finite() {
                    return Err(invalid(key, "expected a finite interval"));
                }
            }
            if gb.nodes == 0 {
                return Err(invalid("gauss_bonnet.nodes", "must be positive"));
            }
            Some(GaussBonnetSpec {
                lo,
                hi,
                euler_characteristic: gb.euler_characteristic,
                nodes: gb.nodes,
            })
        }
        None => None,
    };
    for suite in &suites {
        match suite {
            Suite::Minkowski if embedding.is_none() => {
                return Err(invalid(
                    "minkowski",
                    "suite `minkowski` needs a [minkowski] section",
                ))
            }
            Suite::GaussBonnet if gauss_bonnet.is_none() => {
                return Err(invalid(
                    "gauss_bonnet",
                    "suite `gauss_bonnet` needs a [gauss_bonnet] section",
                ))
            }
            _ => {}
        }
    }

    Ok(ScenarioSpec {
        name: raw.name,
        description: raw.description,
        metric,
        alpha,
        scales,
        suites,
        seed: raw.sampling.seed,
        points: raw.sampling.points,
        points_per_scale: raw.sampling.points_per_scale,
        tolerances: raw.tolerances,
        embedding,
        flat_moebius: raw.expectations.flat_moebius,
        ricci_flat: raw.expectations.ricci_flat,
        gauss_bonnet,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "mini"
[manifold]
coordinates = ["x", "y"]
bounds = [[-1, 1], ["-inf", "inf"]]
metric = [["1", "0"], ["0", "1"]]
[alpha]
components = [["1", "0"], ["0", "1"]]
epsilon = 1.0
[scale]
u = ["0"]
[suites]
run = ["ambient_axioms"]
"#;

    #[test]
    fn minimal_scenario_loads() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.dim(), 2);
        assert_eq!(s.seed, 1);
        assert!(s.chart().bounds()[1].hi.is_infinite());
    }

    #[test]
    fn zero_epsilon_is_rejected() {
        let text = MINIMAL.replace("epsilon = 1.0", "epsilon = 0");
        assert!(
            matches!(parse_scenario(&text), Err(ScenarioError::Invalid { ref key, .. }) if key == "alpha.epsilon")
        );
    }

    #[test]
    fn malformed_expression_reports_location() {
        let text = MINIMAL.replace(
            r#"metric = [["1", "0"], ["0", "1"]]"#,
            r#"metric = [["x +", "0"], ["0", "1"]]"#,
        );
        let err = parse_scenario(&text).unwrap_err();
        match err {
            ScenarioError::Geometry {
                key,
                source: GeomError::Syntax { line, column, .. },
            } => {
                assert_eq!(key, "manifold.metric");
                assert_eq!((line, column), (1, 4));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_schema_errors() {
        let text = MINIMAL.replace("[scale]", "[scale]\nv = 3");
        assert!(matches!(
            parse_scenario(&text),
            Err(ScenarioError::Schema(_))
        ));
    }
}

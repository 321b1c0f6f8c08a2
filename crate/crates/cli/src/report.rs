use serde::{Deserialize, Serialize};

use crate::suites::CheckSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToleranceSource {
    Default,
    Scenario,
    Override,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub point: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub scale: Option<usize>,
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub point: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub scale: Option<usize>,
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub id: String,
    pub anchor: String,
    pub samples: usize,
    pub max_defect: f64,
    pub tolerance: f64,
    pub tolerance_source: ToleranceSource,
    pub pass: bool,
    /// Present exactly when the check fails.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Witness>,
    /// Largest magnitude of the quantity under test, when one is meaningful.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_reference: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    pub rows: Vec<Row>,
}

impl CheckRecord {
    pub(crate) fn new(
        spec: &CheckSpec,
        tolerance: f64,
        tolerance_source: ToleranceSource,
        rows: Vec<Row>,
        max_reference: Option<f64>,
        error: Option<String>,
    ) -> CheckRecord {
        let worst = rows
            .iter()
            .enumerate()
            .fold(None::<(usize, f64)>, |acc, (i, r)| match acc {
                Some((_, d)) if d >= r.defect => acc,
                _ => Some((i, r.defect)),
            });
        let max_defect = worst.map_or(0.0, |(_, d)| d);
        let pass = max_defect <= tolerance;
        let witness = match worst {
            Some((i, d)) if !pass => Some(Witness {
                point: rows[i].point.clone(),
                scale: rows[i].scale,
                defect: d,
            }),
            _ => None,
        };
        CheckRecord {
            id: spec.id.to_string(),
            anchor: spec.anchor.to_string(),
            samples: rows.len(),
            max_defect,
            tolerance,
            tolerance_source,
            pass,
            witness,
            max_reference: max_reference.map(crate::suites::clamp),
            error,
            rows,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub scenario: String,
    pub seed: u64,
    pub samples: usize,
    pub version: String,
    pub wall_time_ms: u64,
    pub checks: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, id: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports contain only finite numbers")
    }

    /// JSON without the timing field, for byte-level comparisons.
    pub fn canonical_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("reports contain only finite numbers");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("wall_time_ms");
        }
        serde_json::to_string(&v).expect("serialising a value cannot fail")
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "scenario {} (seed {}, {} samples)\n",
            self.scenario, self.seed, self.samples
        );
        for c in &self.checks {
            out.push_str(&format!(
                "{} {:<40} max {:.3e}  tol {:.1e}  n={}\n",
                if c.pass { "PASS" } else { "FAIL" },
                c.id,
                c.max_defect,
                c.tolerance,
                c.samples
            ));
            if let Some(w) = &c.witness {
                let pt: Vec<String> = w.point.iter().map(|x| format!("{x:.6}")).collect();
                let scale = w.scale.map(|k| format!(" scale #{k}")).unwrap_or_default();
                out.push_str(&format!(
                    "     witness ({}){scale}  defect {:.3e}\n",
                    pt.join(", "),
                    w.defect
                ));
            }
            if let Some(e) = &c.error {
                out.push_str(&format!("     error: {e}\n"));
            }
        }
        let failed = self.checks.iter().filter(|c| !c.pass).count();
        out.push_str(&format!(
            "{} checks, {} failed\n",
            self.checks.len(),
            failed
        ));
        out
    }

    /// One line per sample: check id, sample index, defect, then coordinates.
    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::WriterBuilder::new()
            .flexible(true)
            .from_writer(Vec::new());
        w.write_record(["check", "sample", "defect", "coords"])?;
        for c in &self.checks {
            for (i, r) in c.rows.iter().enumerate() {
                let mut rec = vec![c.id.clone(), i.to_string(), format!("{:e}", r.defect)];
                rec.extend(r.point.iter().map(|x| x.to_string()));
                w.write_record(&rec)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::suites::catalog;

    fn rows(defects: &[f64]) -> Vec<Row> {
        defects
            .iter()
            .enumerate()
            .map(|(i, &d)| Row {
                point: vec![i as f64],
                scale: None,
                defect: d,
            })
            .collect()
    }

    #[test]
    fn witness_present_exactly_on_failure() {
        let spec = catalog("gauss.sectional").unwrap();
        let ok = CheckRecord::new(
            spec,
            1e-6,
            ToleranceSource::Default,
            rows(&[1e-9, 2e-9]),
            None,
            None,
        );
        assert!(ok.pass && ok.witness.is_none());
        let bad = CheckRecord::new(
            spec,
            1e-6,
            ToleranceSource::Default,
            rows(&[1e-9, 3e-3, 1e-4]),
            None,
            None,
        );
        assert!(!bad.pass);
        let w = bad.witness.unwrap();
        assert_eq!((w.point, w.defect), (vec![1.0], 3e-3));
    }

    #[test]
    fn boundary_defect_passes() {
        let spec = catalog("gauss.sectional").unwrap();
        let r = CheckRecord::new(
            spec,
            1e-6,
            ToleranceSource::Override,
            rows(&[1e-6]),
            None,
            None,
        );
        assert!(r.pass);
    }

    #[test]
    fn canonical_json_drops_timing() {
        let mut r = VerificationReport {
            scenario: "s".into(),
            seed: 1,
            samples: 0,
            version: "0".into(),
            wall_time_ms: 5,
            checks: vec![],
        };
        let a = r.canonical_json();
        r.wall_time_ms = 900;
        assert_eq!(a, r.canonical_json());
        assert!(!a.contains("wall_time_ms"));
        let back: VerificationReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}

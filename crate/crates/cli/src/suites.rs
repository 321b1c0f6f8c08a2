//! Check catalog and the suite runners.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use ambient_core::ambient::{
    alpha_trace_free_part, ambient_ricci, closed_form_connection, cone_defect, degeneracy_defect,
    fiber_second_fundamental_form, fiber_second_fundamental_form_numeric, fiber_umbilicity_defect,
    homothety_defect, minkowski_cross_check, mixed_curvature_defect, numeric_connection,
    omega_and_exterior_derivative, pullback_defect, ricci_along_q, slice_radical,
};
use ambient_core::linalg::{identity, max_abs, max_abs_diff};
use ambient_core::riemann::scalar_curvature;
use ambient_core::{
    build_ambient, cotton_york, immerse, moebius_from_alpha, rescale_metric, schouten,
    AmbientSpace, ConformalRep, ConnectionCase, GeomError, LinearExtension, MinkowskiMap,
    MoebiusStructure, Point, Sampler,
};
use rayon::prelude::*;

use crate::report::{CheckRecord, Row, ToleranceSource};
use crate::scenario::{ScenarioError, ScenarioSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    AmbientAxioms,
    Connection,
    RicciQ,
    Weingarten,
    Recovery,
    Cotton,
    Gauss,
    Fibers,
    Minkowski,
    GaussBonnet,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::AmbientAxioms,
        Suite::Connection,
        Suite::RicciQ,
        Suite::Weingarten,
        Suite::Recovery,
        Suite::Cotton,
        Suite::Gauss,
        Suite::Fibers,
        Suite::Minkowski,
        Suite::GaussBonnet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::AmbientAxioms => "ambient_axioms",
            Suite::Connection => "connection",
            Suite::RicciQ => "ricci_Q",
            Suite::Weingarten => "weingarten",
            Suite::Recovery => "recovery",
            Suite::Cotton => "cotton",
            Suite::Gauss => "gauss",
            Suite::Fibers => "fibers",
            Suite::Minkowski => "minkowski",
            Suite::GaussBonnet => "gauss_bonnet",
        }
    }

    pub fn parse(s: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|x| x.name() == s)
    }

    fn salt(self) -> u64 {
        (self as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
    }
}

pub struct CheckSpec {
    pub id: &'static str,
    pub anchor: &'static str,
    pub tolerance: f64,
}

const fn check(id: &'static str, anchor: &'static str, tolerance: f64) -> CheckSpec {
    CheckSpec {
        id,
        anchor,
        tolerance,
    }
}

pub const CATALOG: &[CheckSpec] = &[
    check(
        "ambient_axioms.homothety",
        "L_Z g~ = 2 g~ with Z = t ∂t",
        1e-9,
    ),
    check(
        "ambient_axioms.omega",
        "ω = g~(Z,·) = 2tρ dt + t² dρ and dω = 0",
        1e-10,
    ),
    check(
        "ambient_axioms.null_frame",
        "g~(T,T) = −2, g~(E,E) = 2, g~(T,E) = 0",
        1e-10,
    ),
    check(
        "ambient_axioms.pullback",
        "i*g~ = t² g on Q = {ρ = 0}",
        1e-10,
    ),
    check("ambient_axioms.degeneracy", "i*g~(Z, ·) = 0 on Q", 1e-10),
    check(
        "ambient_axioms.radical",
        "rad(i*g~) = span(∂t) with rank n",
        1e-9,
    ),
    check("connection.t_t", "∇~_{∂t} ∂t = 0", 1e-8),
    check("connection.rho_rho", "∇~_{∂ρ} ∂ρ = 0", 1e-8),
    check("connection.t_rho", "∇~_{∂t} ∂ρ = (1/t) ∂ρ", 1e-8),
    check("connection.t_v", "∇~_{∂t} V = (1/t) V", 1e-8),
    check("connection.rho_v", "∇~_{∂ρ} V = ½ α⁻¹α' V", 1e-8),
    check(
        "connection.v_w",
        "∇~_V W = ∇_V W − (t/2) g(α'(0)V,W) ∂t − g(V,W) ∂ρ on Q",
        1e-8,
    ),
    check(
        "ricci_Q.closed_form",
        "Ric~(V,W) = Ric(V,W) − ½tr α'(0) g(V,W) − (n−2)/2 g(α'(0)V,W) on Q",
        1e-7,
    ),
    check(
        "ricci_Q.t_components",
        "Ric~(∂t,∂t) = Ric~(∂t,V) = 0 on Q",
        1e-8,
    ),
    check(
        "ricci_Q.mixed_curvature",
        "g~(R~(∂t,V)W,∂ρ) + g~(R~(∂ρ,V)W,∂t) = 0",
        1e-8,
    ),
    check("ricci_Q.tangential", "Ric~(V,W) = 0 on Q", 1e-7),
    check("ricci_Q.vanishing", "Ric~ = 0 along Q", 1e-7),
    check(
        "weingarten.frame",
        "g~(ξ,ξ) = g~(η,η) = 0, g~(ξ,η) = −1, ξ,η ⊥ TΨ",
        1e-10,
    ),
    check("weingarten.induced_metric", "Ψ^u* g~ = e^{2u} g", 1e-10),
    check("weingarten.a_xi", "A_ξ = −Id", 1e-9),
    check(
        "weingarten.a_eta",
        "A_η = e^{−2u}(α'(0)/2 − ∇²u + du⊗du − ½|du|² Id)",
        1e-8,
    ),
    check(
        "weingarten.self_adjoint",
        "e^{2u} g(A_η X, Y) = e^{2u} g(X, A_η Y)",
        1e-9,
    ),
    check(
        "weingarten.second_fundamental_form",
        "II(V,W) = (∇~_{TΨV} TΨW)^⊥ in closed form",
        1e-8,
    ),
    check("weingarten.ii_symmetry", "II(V,W) = II(W,V)", 1e-9),
    check(
        "weingarten.mean_curvature",
        "H = (1/n) tr II = c ξ + η",
        1e-8,
    ),
    check(
        "weingarten.normal_connection",
        "(∇~_{TΨV} ξ)^⊥ = (∇~_{TΨV} η)^⊥ = 0",
        1e-9,
    ),
    check(
        "weingarten.normal_curvature",
        "R^⊥ = dθ = 0 with θ = −g~(∇~ξ, η)",
        1e-8,
    ),
    check(
        "recovery.hypothesis",
        "g(α'(0)·,·) = 2P and tr_g α'(0) = 2K",
        1e-6,
    ),
    check("recovery.moebius", "P(e^{2u}g) = e^{2u} g(A_η·,·)", 1e-6),
    check(
        "recovery.schouten",
        "P^{e^{2u}g} = e^{2u} g(A_η·,·) via curvature",
        1e-6,
    ),
    check(
        "recovery.mean_curvature_norm",
        "|H|² = scal(e^{2u}g) / (n(n−1))",
        1e-6,
    ),
    check("cotton.codazzi", "(R~(TΨU,TΨV)TΨW)^⊥ = C(V,U,W) ξ", 1e-6),
    check("cotton.antisymmetry", "C(U,V,W) = −C(V,U,W)", 1e-9),
    check(
        "cotton.derivative",
        "(∇_U II)(V,W) − (∇_V II)(U,W) = C(V,U,W) ξ",
        1e-6,
    ),
    check("cotton.invariance", "C(P(e^{2u}g)) = C(P(g))", 1e-6),
    check(
        "cotton.normal_part",
        "(R~(TΨU,TΨV)TΨW)^⊥ = 0 for flat Möbius structures",
        1e-7,
    ),
    check(
        "cotton.tensoriality",
        "(∇_U II)(V,W) independent of the extensions of V, W",
        1e-9,
    ),
    check("gauss.sectional", "K~(TΨe₁, TΨe₂) = 0", 1e-6),
    check(
        "gauss.identity",
        "(K − Δu) e^{−2u} = tr_{e^{2u}g} P(e^{2u}g)",
        1e-6,
    ),
    check(
        "fibers.closed_form",
        "II_F(V,W) = −g~(α⁻¹α'V,W)/(2t) ∂t − (g~(V,W) − ρ g~(α⁻¹α'V,W))/t² ∂ρ",
        1e-7,
    ),
    check("fibers.umbilicity", "α⁻¹α' = f Id ⇔ fibers umbilical", 1e-8),
    check("minkowski.pullback", "F*η = g~", 1e-9),
    check("minkowski.cone", "F(Q) ⊂ null cone", 1e-10),
    check(
        "minkowski.equivariance",
        "F(τt, ρ, x) = τ F(t, ρ, x)",
        1e-10,
    ),
    check("gauss_bonnet.integral", "∫ |H|² dμ = 2π χ", 1e-3),
];

pub fn catalog(id: &str) -> Option<&'static CheckSpec> {
    CATALOG.iter().find(|c| c.id == id)
}

/// One evaluated sample before aggregation.
struct Sample {
    point: Vec<f64>,
    scale: Option<usize>,
    defect: f64,
    reference: Option<f64>,
    error: Option<String>,
}

/// Runs every requested suite and returns the check records sorted by id.
pub fn run_suites(
    spec: &ScenarioSpec,
    suites: &[Suite],
    overrides: &BTreeMap<String, f64>,
) -> Result<Vec<CheckRecord>, ScenarioError> {
    let ambient =
        build_ambient(&spec.metric, &spec.alpha).map_err(|source| ScenarioError::Geometry {
            key: "alpha".into(),
            source,
        })?;
    let ctx = Ctx {
        spec,
        ambient: &ambient,
        overrides,
    };
    let mut out = Vec::new();
    for &suite in suites {
        let mut sampler = Sampler::new(spec.seed ^ suite.salt());
        let records = match suite {
            Suite::AmbientAxioms => ctx.ambient_axioms(&mut sampler),
            Suite::Connection => ctx.connection(&mut sampler),
            Suite::RicciQ => ctx.ricci_q(&mut sampler),
            Suite::Weingarten => ctx.weingarten(&mut sampler),
            Suite::Recovery => ctx.recovery(&mut sampler),
            Suite::Cotton => ctx.cotton(&mut sampler),
            Suite::Gauss => ctx.gauss(&mut sampler),
            Suite::Fibers => ctx.fibers(&mut sampler),
            Suite::Minkowski => ctx.minkowski(&mut sampler)?,
            Suite::GaussBonnet => ctx.gauss_bonnet(),
        };
        out.extend(records.map_err(|source| ScenarioError::Geometry {
            key: format!("suites.{}", suite.name()),
            source,
        })?);
    }
    out.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(out)
}

type Values = Vec<(f64, Option<f64>)>;

struct Ctx<'a> {
    spec: &'a ScenarioSpec,
    ambient: &'a AmbientSpace,
    overrides: &'a BTreeMap<String, f64>,
}

/// Why checks that need a Möbius structure could not run.
struct Blocked {
    message: String,
    location: Vec<f64>,
    record: CheckRecord,
}

/// An item to evaluate: a point plus random tangent data.
struct Item {
    point: Point,
    scale: Option<usize>,
    vectors: Vec<Vec<f64>>,
}

impl<'a> Ctx<'a> {
    fn n(&self) -> usize {
        self.ambient.dim()
    }

    fn items(&self, points: Vec<Point>, sampler: &mut Sampler, vectors: usize) -> Vec<Item> {
        let n = self.n();
        points
            .into_iter()
            .map(|point| Item {
                point,
                scale: None,
                vectors: (0..vectors).map(|_| sampler.normal_vector(n)).collect(),
            })
            .collect()
    }

    fn band(&self, sampler: &mut Sampler, vectors: usize) -> Result<Vec<Item>, GeomError> {
        let pts = self.ambient.sample_band(sampler, self.spec.points)?;
        Ok(self.items(pts, sampler, vectors))
    }

    fn slice(&self, sampler: &mut Sampler, vectors: usize) -> Result<Vec<Item>, GeomError> {
        let pts = self.ambient.sample_slice(sampler, self.spec.points)?;
        Ok(self.items(pts, sampler, vectors))
    }

    /// Base points crossed with every scale function.
    fn scaled(&self, sampler: &mut Sampler, vectors: usize) -> Result<Vec<Item>, GeomError> {
        let pts = sampler.points(self.ambient.base_chart(), self.spec.points_per_scale)?;
        let mut out = Vec::new();
        for k in 0..self.spec.scales.len() {
            for mut item in self.items(pts.clone(), sampler, vectors) {
                item.scale = Some(k);
                out.push(item);
            }
        }
        Ok(out)
    }

    /// Evaluates `f` on every item in parallel and splits the values into
    /// one record per id. An error marks every id at that item.
    fn evaluate<F>(&self, ids: &[&str], items: &[Item], f: F) -> Vec<CheckRecord>
    where
        F: Fn(&Item) -> Result<Values, GeomError> + Sync,
    {
        let results: Vec<Result<Values, GeomError>> = items.par_iter().map(&f).collect();
        let mut per_id: Vec<Vec<Sample>> = ids
            .iter()
            .map(|_| Vec::with_capacity(items.len()))
            .collect();
        for (item, res) in items.iter().zip(results) {
            match res {
                Ok(values) => {
                    for (k, (defect, reference)) in values.into_iter().enumerate() {
                        per_id[k].push(Sample {
                            point: item.point.coords().to_vec(),
                            scale: item.scale,
                            defect,
                            reference,
                            error: None,
                        });
                    }
                }
                Err(e) => {
                    for samples in per_id.iter_mut() {
                        samples.push(Sample {
                            point: item.point.coords().to_vec(),
                            scale: item.scale,
                            defect: f64::INFINITY,
                            reference: None,
                            error: Some(e.to_string()),
                        });
                    }
                }
            }
        }
        ids.iter()
            .zip(per_id)
            .map(|(id, samples)| self.record(id, samples))
            .collect()
    }

    fn record(&self, id: &str, samples: Vec<Sample>) -> CheckRecord {
        let spec = catalog(id).expect("check id in catalog");
        let (tolerance, tolerance_source) = match self.overrides.get(id) {
            Some(&v) => (v, ToleranceSource::Override),
            None => match self.spec.tolerances.get(id) {
                Some(&v) => (v, ToleranceSource::Scenario),
                None => (spec.tolerance, ToleranceSource::Default),
            },
        };
        let error = samples.iter().find_map(|s| s.error.clone());
        let reference = samples
            .iter()
            .filter_map(|s| s.reference)
            .map(f64::abs)
            .reduce(f64::max);
        let rows: Vec<Row> = samples
            .into_iter()
            .map(|s| Row {
                point: s.point,
                scale: s.scale,
                defect: clamp(s.defect),
            })
            .collect();
        CheckRecord::new(spec, tolerance, tolerance_source, rows, reference, error)
    }

    /// Records a check that could not run because a hypothesis failed.
    fn blocked(&self, id: &str, message: &str, location: &[f64]) -> CheckRecord {
        self.record(
            id,
            vec![Sample {
                point: location.to_vec(),
                scale: None,
                defect: f64::INFINITY,
                reference: None,
                error: Some(message.to_string()),
            }],
        )
    }

    fn ambient_axioms(&self, sampler: &mut Sampler) -> Result<Vec<CheckRecord>, GeomError> {
        let a = self.ambient;
        let band = self.band(sampler, 0)?;
        let mut out = self.evaluate(
            &[
                "ambient_axioms.homothety",
                "ambient_axioms.omega",
                "ambient_axioms.null_frame",
            ],
            &band,
            |it| {
                let p = &it.point;
                let (t, rho) = (p.coords()[0], p.coords()[1]);
                let (w, d) = omega_and_exterior_derivative(a, p)?;
                let mut expect = vec![0.0; w.len()];
                expect[0] = 2.0 * t * rho;
                expect[1] = t * t;
                let omega = max_abs_diff(&w, &expect).max(max_abs(&d));
                let (tf, ef) = (a.t_field_at(p), a.e_field_at(p));
                let frame = (a.inner(p, &tf, &tf)? + 2.0)
                    .abs()
                    .max((a.inner(p, &ef, &ef)? - 2.0).abs())
                    .max(a.inner(p, &tf, &ef)?.abs());
                Ok(vec![
                    (homothety_defect(a, p)?, None),
                    (omega, None),
                    (frame, None),
                ])
            },
        );
        let slice = self.slice(sampler, 0)?;
        out.extend(self.evaluate(
            &[
                "ambient_axioms.pullback",
                "ambient_axioms.degeneracy",
                "ambient_axioms.radical",
            ],
            &slice,
            |it| {
                let p = &it.point;
                let r = slice_radical(a, p)?;
                let radical = if r.rank == a.dim() {
                    r.misalignment
                } else {
                    1.0 + r.rank.abs_diff(a.dim()) as f64
                };
                Ok(vec![
                    (pullback_defect(a, p)?, None),
                    (degeneracy_defect(a, p)?, None),
                    (radical, None),
                ])
            },
        ));
        Ok(out)
    }

    fn connection(&self, sampler: &mut Sampler) -> Result<Vec<CheckRecord>, GeomError> {
        let a = self.ambient;
        let band = self.band(sampler, 1)?;
        let mut out = self.evaluate(
            &[
                "connection.t_t",
                "connection.rho_rho",
                "connection.t_rho",
                "connection.t_v",
                "connection.rho_v",
            ],
            &band,
            |it| {
                let v = &it.vectors[0];
                [
                    ConnectionCase::TT,
                    ConnectionCase::RhoRho,
                    ConnectionCase::TRho,
                    ConnectionCase::TV(v.clone()),
                    ConnectionCase::RhoV(v.clone()),
                ]
                .iter()
                .map(|c| connection_defect(a, &it.point, c))
                .collect()
            },
        );
        let slice = self.slice(sampler, 2)?;
        out.extend(self.evaluate(&["connection.v_w"], &slice, |it| {
            let c = ConnectionCase::VW(it.vectors[0].clone(), it.vectors[1].clone());
            Ok(vec![connection_defect(a, &it.point, &c)?])
        }));
        Ok(out)
    }

    fn ricci_q(&self, sampler: &mut Sampler) -> Result<Vec<CheckRecord>, GeomError> {
        let a = self.ambient;
        let m = self.n() + 2;
        let slice = self.slice(sampler, 2)?;
        let mut ids = vec![
            "ricci_Q.closed_form",
            "ricci_Q.t_components",
            "ricci_Q.mixed_curvature",
            "ricci_Q.tangential",
        ];
        if self.spec.ricci_flat {
            ids.push("ricci_Q.vanishing");
        }
        Ok(self.evaluate(&ids, &slice, |it| {
            let p = &it.point;
            let (v, w) = (&it.vectors[0], &it.vectors[1]);
            let ric = ambient_ricci(a, p)?;
            let (lv, lw) = (a.lift(v), a.lift(w));
            let numeric: f64 = (0..m)
                .flat_map(|i| (0..m).map(move |j| (i, j)))
                .map(|(i, j)| ric[i * m + j] * lv[i] * lw[j])
                .sum();
            let closed = ricci_along_q(a, p, v, w)?;
            let t_part = (0..m)
                .filter(|&j| j != 1)
                .map(|j| ric[j].abs())
                .fold(0.0, f64::max);
            let tangential = (2..m)
                .flat_map(|i| (2..m).map(move |j| (i, j)))
                .map(|(i, j)| ric[i * m + j].abs())
                .fold(0.0, f64::max);
            let mut out = vec![
                ((numeric - closed).abs(), Some(closed)),
                (t_part, None),
                (mixed_curvature_defect(a, p, v, w)?.abs(), None),
                (tangential, None),
            ];
            if self.spec.ricci_flat {
                out.push((max_abs(&ric), None));
            }
            Ok(out)
        }))
    }

    fn weingarten(&self, sampler: &mut Sampler) -> Result<Vec<CheckRecord>, GeomError> {
        let a = self.ambient;
        let n = self.n();
        let items = self.scaled(sampler, 2)?;
        let ids = [
            "weingarten.frame",
            "weingarten.induced_metric",
            "weingarten.a_xi",
            "weingarten.a_eta",
            "weingarten.self_adjoint",
            "weingarten.second_fundamental_form",
            "weingarten.ii_symmetry",
            "weingarten.mean_curvature",
            "weingarten.normal_connection",
            "weingarten.normal_curvature",
        ];
        let minus_id: Vec<f64> = identity(n).iter().map(|v| -v).collect();
        Ok(self.evaluate(&ids, &items, |it| {
            let im = immerse(a, &self.spec.scales[it.scale.unwrap_or(0)])?;
            let x = &it.point;
            let (v, w) = (&it.vectors[0], &it.vectors[1]);
            let ip = im.at(x)?;
            let an = ip.weingarten_eta();
            let closed = ip.second_fundamental_form(a, v, w)?;
            let numeric = ip.second_fundamental_form_numeric(v, w);
            let swapped = ip.second_fundamental_form_numeric(w, v);
            let pair_diff = |p: (f64, f64), q: (f64, f64)| (p.0 - q.0).abs().max((p.1 - q.1).abs());
            let h = im.mean_curvature(x)?;
            let (tr_xi, tr_eta) = im.mean_curvature_from_trace(x)?;
            let (d_xi, d_eta) = im.normal_connection_defect(x, v)?;
            Ok(vec![
                (ip.frame_defect(), None),
                (
                    max_abs_diff(&ip.induced_metric(), &ip.rescaled_metric()),
                    None,
                ),
                (max_abs_diff(&ip.weingarten_xi(), &minus_id), None),
                (
                    max_abs_diff(&an, &ip.weingarten_eta_closed(a)?),
                    Some(max_abs(&an)),
                ),
                (ip.self_adjointness_defect(&an), None),
                (pair_diff(closed, numeric), None),
                (pair_diff(numeric, swapped), None),
                (
                    (h.xi_coefficient - tr_xi).abs().max((tr_eta - 1.0).abs()),
                    None,
                ),
                (d_xi.max(d_eta), None),
                (im.normal_curvature_defect(x)?, None),
            ])
        }))
    }

    /// The Möbius structure induced by `α`, or a record describing why the
    /// hypothesis fails.
    fn structure(&self) -> Result<MoebiusStructure, Box<Blocked>> {
        match moebius_from_alpha(&self.spec.metric, &self.spec.alpha) {
            Ok(m) => Ok(m),
            Err(GeomError::Hypothesis {
                hypothesis,
                defect,
                location,
            }) => {
                let rec = self.record(
                    "recovery.hypothesis",
                    vec![Sample {
                        point: location.clone(),
                        scale: None,
                        defect,
                        reference: None,
                        error: None,
                    }],
                );
                Err(Box::new(Blocked {
                    message: format!("hypothesis `{hypothesis}` violated"),
                    location,
                    record: rec,
                }))
            }
            Err(e) => Err(Box::new(Blocked {
                message: e.to_string(),
                location: Vec::new(),
                record: self.blocked("recovery.hypothesis", &e.to_string(), &[]),
            })),
        }
    }

    fn recovery(&self, sampler: &mut Sampler) -> Result<Vec<CheckRecord>, GeomError> {
        let a = self.ambient;
        let n = self.n();
        let mut ids = vec!["recovery.moebius", "recovery.mean_curvature_norm"];
        if n >= 3 {
            ids.push("recovery.schouten");
        }
        let m = match self.structure() {
            Ok(m) => m,
            Err(b) => {
                let mut out = vec![b.record.clone()];
                out.extend(
                    ids.iter()
                        .map(|id| self.blocked(id, &b.message, &b.location)),
                );
                return Ok(out);
            }
        };
        let items = self.scaled(sampler, 0)?;
        let hypothesis = self.record(
            "recovery.hypothesis",
            sampler
                .points(a.base_chart(), self.spec.points)?
                .into_iter()
                .map(|p| {
                    let d = if n == 2 {
                        m.trace_defect(&p).map(f64::abs)
                    } else {
                        m.tensor(&p)
                            .and_then(|t| Ok(max_abs_diff(&t, &schouten(&self.spec.metric, &p)?)))
                    };
                    Sample {
                        point: p.coords().to_vec(),
                        scale: None,
                        defect: *d.as_ref().unwrap_or(&f64::INFINITY),
                        reference: None,
                        error: d.err().map(|e| e.to_string()),
                    }
                })
                .collect(),
        );
        let mut out = vec![hypothesis];
        out.extend(self.evaluate(&ids, &items, |it| {
            let u = &self.spec.scales[it.scale.unwrap_or(0)];
            let im = immerse(a, u)?;
            let x = &it.point;
            let rescaled = rescale_metric(&ConformalRep::new(&self.spec.metric, u)?);
            let scal = scalar_curvature(&rescaled, x)?;
            let h = im.mean_curvature(x)?;
            let mut v = vec![
                (im.moebius_recovery_defect(x, &m)?, None),
                (
                    (h.norm_sq - scal / (n * (n - 1)) as f64).abs(),
                    Some(h.norm_sq),
                ),
            ];
            if n >= 3 {
                v.push((im.schouten_recovery_defect(x, &m)?, None));
            }
            Ok(v)
        }));
        Ok(out)
    }

    fn cotton(&self, sampler: &mut Sampler) -> Result<Vec<CheckRecord>, GeomError> {
        let a = self.ambient;
        let n = self.n();
        let mut ids = vec![
            "cotton.codazzi",
            "cotton.antisymmetry",
            "cotton.derivative",
            "cotton.tensoriality",
        ];
        if n == 2 {
            ids.push("cotton.invariance");
        }
        if self.spec.flat_moebius {
            ids.push("cotton.normal_part");
        }
        let m = match self.structure() {
            Ok(m) => m,
            Err(b) => {
                return Ok(ids
                    .iter()
                    .map(|id| self.blocked(id, &b.message, &b.location))
                    .collect())
            }
        };
        // Three directions, then the rows of the slopes of the extensions of V and W.
        let items = self.scaled(sampler, 3 + 2 * n)?;
        Ok(self.evaluate(&ids, &items, |it| {
            let u = &self.spec.scales[it.scale.unwrap_or(0)];
            let im = immerse(a, u)?;
            let x = &it.point;
            let (uu, vv, ww) = (&it.vectors[0], &it.vectors[1], &it.vectors[2]);
            let cz = im.codazzi_cotton_defect(x, &m, uu, vv, ww)?;
            let anti = (cotton_york(&m, x, uu, vv, ww)? + cotton_york(&m, x, vv, uu, ww)?).abs();
            let dz = im.codazzi_derivative_defect(x, &m, uu, vv, ww)?;
            let extension = |value: &[f64], rows: &[Vec<f64>]| LinearExtension {
                value: value.to_vec(),
                slope: rows.concat(),
            };
            let ev = extension(vv, &it.vectors[3..3 + n]);
            let ew = extension(ww, &it.vectors[3 + n..3 + 2 * n]);
            let tensoriality = im.second_fundamental_form_tensoriality(x, uu, &ev, &ew)?;
            let mut v = vec![
                (cz.defect, Some(cz.cotton)),
                (anti, None),
                (dz.defect, Some(dz.cotton)),
                (tensoriality, None),
            ];
            if n == 2 {
                let base = m.cotton_tensor(x)?;
                v.push((
                    max_abs_diff(&base, &m.rescaled(u)?.cotton_tensor(x)?),
                    Some(max_abs(&base)),
                ));
            }
            if self.spec.flat_moebius {
                v.push((im.curvature_invariance_defect(x, uu, vv, ww)?, None));
            }
            Ok(v)
        }))
    }

    fn gauss(&self, sampler: &mut Sampler) -> Result<Vec<CheckRecord>, GeomError> {
        if self.n() != 2 {
            return Ok(Vec::new());
        }
        let a = self.ambient;
        let ids = ["gauss.sectional", "gauss.identity"];
        let m = match self.structure() {
            Ok(m) => m,
            Err(b) => {
                return Ok(ids
                    .iter()
                    .map(|id| self.blocked(id, &b.message, &b.location))
                    .collect())
            }
        };
        let items = self.scaled(sampler, 0)?;
        Ok(self.evaluate(&ids, &items, |it| {
            let im = immerse(a, &self.spec.scales[it.scale.unwrap_or(0)])?;
            let x = &it.point;
            Ok(vec![
                (im.gauss_sectional_defect(x)?, None),
                (im.gauss_identity_defect(x, &m)?.abs(), None),
            ])
        }))
    }

    fn fibers(&self, sampler: &mut Sampler) -> Result<Vec<CheckRecord>, GeomError> {
        let a = self.ambient;
        let band = self.band(sampler, 2)?;
        Ok(
            self.evaluate(&["fibers.closed_form", "fibers.umbilicity"], &band, |it| {
                let p = &it.point;
                let (v, w) = (&it.vectors[0], &it.vectors[1]);
                let d = max_abs_diff(
                    &fiber_second_fundamental_form(a, p, v, w)?,
                    &fiber_second_fundamental_form_numeric(a, p, v, w)?,
                );
                let pure = alpha_trace_free_part(a, p)? < 1e-12;
                let umbilic = fiber_umbilicity_defect(a, p)?;
                let agreement = match (pure, umbilic < 1e-8) {
                    (true, _) => umbilic,
                    (false, false) => 0.0,
                    (false, true) => 1.0,
                };
                Ok(vec![(d, None), (agreement, Some(umbilic))])
            }),
        )
    }

    fn minkowski(
        &self,
        sampler: &mut Sampler,
    ) -> Result<Result<Vec<CheckRecord>, GeomError>, ScenarioError> {
        let a = self.ambient;
        let sources = self
            .spec
            .embedding
            .as_ref()
            .ok_or_else(|| ScenarioError::Invalid {
                key: "minkowski".into(),
                message: "suite `minkowski` needs a [minkowski] section".into(),
            })?;
        let f = MinkowskiMap::parse(a, sources).map_err(|source| ScenarioError::Geometry {
            key: "minkowski.embedding".into(),
            source,
        })?;
        let mut run = || -> Result<Vec<CheckRecord>, GeomError> {
            let band = self.band(sampler, 0)?;
            let taus: Vec<f64> = (0..band.len()).map(|_| sampler.uniform(0.5, 2.0)).collect();
            let indexed: Vec<Item> = band
                .into_iter()
                .zip(&taus)
                .map(|(it, &tau)| Item {
                    point: it.point,
                    scale: None,
                    vectors: vec![vec![tau]],
                })
                .collect();
            let mut out = self.evaluate(
                &["minkowski.pullback", "minkowski.equivariance"],
                &indexed,
                |it| {
                    let p = &it.point;
                    let tau = it.vectors[0][0];
                    let c = p.coords();
                    let scaled = a.point(tau * c[0], c[1], &c[2..])?;
                    let fp: Vec<f64> = f.eval(p)?.iter().map(|v| tau * v).collect();
                    let eq = max_abs_diff(&f.eval(&scaled)?, &fp) / tau.max(1.0);
                    Ok(vec![(minkowski_cross_check(a, &f, p)?, None), (eq, None)])
                },
            );
            let slice = self.slice(sampler, 0)?;
            out.extend(self.evaluate(&["minkowski.cone"], &slice, |it| {
                Ok(vec![(cone_defect(a, &f, &it.point)?, None)])
            }));
            Ok(out)
        };
        Ok(run())
    }

    fn gauss_bonnet(&self) -> Result<Vec<CheckRecord>, GeomError> {
        let gb = self
            .spec
            .gauss_bonnet
            .as_ref()
            .expect("validated at load time");
        let target = 2.0 * PI * gb.euler_characteristic as f64;
        let centre = vec![0.5 * (gb.lo[0] + gb.hi[0]), 0.5 * (gb.lo[1] + gb.hi[1])];
        let samples: Vec<Sample> = (0..self.spec.scales.len())
            .into_par_iter()
            .map(|k| {
                let res = immerse(self.ambient, &self.spec.scales[k])
                    .and_then(|im| im.total_mean_curvature(gb.lo, gb.hi, gb.nodes));
                match res {
                    Ok(total) => Sample {
                        point: centre.clone(),
                        scale: Some(k),
                        defect: ((total - target) / target.abs().max(1.0)).abs(),
                        reference: Some(total),
                        error: None,
                    },
                    Err(e) => Sample {
                        point: centre.clone(),
                        scale: Some(k),
                        defect: f64::INFINITY,
                        reference: None,
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect();
        Ok(vec![self.record("gauss_bonnet.integral", samples)])
    }
}

fn connection_defect(
    a: &AmbientSpace,
    p: &Point,
    c: &ConnectionCase,
) -> Result<(f64, Option<f64>), GeomError> {
    let (x, y) = c.operands(a);
    let closed = closed_form_connection(a, p, c)?;
    Ok((
        max_abs_diff(&closed, &numeric_connection(a, p, &x, &y)?),
        Some(max_abs(&closed)),
    ))
}

/// Non-finite defects become `f64::MAX` so reports stay valid JSON.
pub fn clamp(d: f64) -> f64 {
    if d.is_finite() {
        d
    } else {
        f64::MAX
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn catalog_ids_are_unique_and_prefixed_by_a_suite() {
        let mut seen = HashSet::new();
        for c in CATALOG {
            assert!(seen.insert(c.id), "duplicate {}", c.id);
            let (suite, _) = c.id.split_once('.').unwrap();
            assert!(Suite::parse(suite).is_some(), "{}", c.id);
            assert!(c.tolerance > 0.0);
        }
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(Suite::parse(s.name()), Some(s));
        }
        assert_eq!(Suite::parse("nope"), None);
    }

    #[test]
    fn clamp_replaces_non_finite_values() {
        assert_eq!(clamp(f64::NAN), f64::MAX);
        assert_eq!(clamp(f64::NEG_INFINITY), f64::MAX);
        assert_eq!(clamp(0.5), 0.5);
    }
}

//! Conformal rescaling, the Schouten tensor, Möbius structures and the
//! Cotton–York tensor.
//!
//! A Möbius structure is represented by a metric `g` of the class and the
//! tensor `P(g)`; every other representative is reached through
//!
//! ```text
//! P(e^{2u} g) = P(g) − (‖∇u‖²/2) g − Hess u + du ⊗ du.
//! ```

use std::sync::Arc;

use crate::ambient::AlphaFamily;
use crate::chart::{Point, ScalarField, TensorField};
use crate::error::{GeomError, Result};
use crate::expr::Expr;
use crate::jet::Jet;
use crate::linalg;
use crate::riemann::{LeviCivita, MetricField, Signature};
use crate::sampling::{Sampler, DEFAULT_SEED};

/// Trace-condition tolerance used when a structure is built from a tensor.
pub const TRACE_TOLERANCE: f64 = 1e-8;

/// Tolerance of the curvature hypothesis behind [`moebius_from_alpha`].
pub const HYPOTHESIS_TOLERANCE: f64 = 1e-6;

/// Number of seeded points used by construction-time checks.
pub const HYPOTHESIS_SAMPLES: usize = 100;

/// The metric `e^{2u} g` of the conformal class of `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalRep {
    base: MetricField,
    log_factor: ScalarField,
}

impl ConformalRep {
    pub fn new(base: &MetricField, log_factor: &ScalarField) -> Result<ConformalRep> {
        if log_factor.chart() != base.chart() {
            return Err(GeomError::Dimension(
                "conformal factor lives on a different chart".into(),
            ));
        }
        Ok(ConformalRep {
            base: base.clone(),
            log_factor: log_factor.clone(),
        })
    }

    pub fn base_metric(&self) -> &MetricField {
        &self.base
    }

    pub fn log_factor(&self) -> &ScalarField {
        &self.log_factor
    }
}

pub fn rescale_metric(rep: &ConformalRep) -> MetricField {
    let factor = (&Expr::constant(2.0) * rep.log_factor.body()).exp();
    let comps = rep
        .base
        .components()
        .components()
        .iter()
        .map(|c| if c.is_zero() { c.clone() } else { &factor * c })
        .collect();
    let tensor =
        TensorField::new(rep.base.chart(), 0, 2, comps).expect("same shape as the base metric");
    MetricField::new(tensor, Signature::Riemannian).expect("rescaling preserves symmetry")
}

/// Schouten tensor as jets, from a connection with metric jets of order >= 2.
pub fn schouten_jets(lc: &LeviCivita) -> Result<Vec<Jet>> {
    let n = lc.dim();
    if n < 3 {
        return Err(GeomError::Dimension(format!(
            "the Schouten tensor needs dimension >= 3, got {n}"
        )));
    }
    let r = lc.riemann()?;
    let ric = lc.ricci_from(&r);
    let scal = lc.scalar_from(&ric);
    let c = &scal * (1.0 / (2.0 * (n as f64 - 1.0)));
    let k = 1.0 / (n as f64 - 2.0);
    Ok(ric
        .iter()
        .zip(lc.metric())
        .map(|(rij, gij)| (rij - &(&c * gij)) * k)
        .collect())
}

pub fn schouten(g: &MetricField, p: &Point) -> Result<Vec<f64>> {
    if g.dim() < 3 {
        return Err(GeomError::Dimension(format!(
            "the Schouten tensor needs dimension >= 3, got {}",
            g.dim()
        )));
    }
    Ok(schouten_jets(&g.connection(p, 2)?)?
        .iter()
        .map(Jet::value)
        .collect())
}

/// Applies the transformation law to jets of `P(g)` with `u` given to at
/// least two orders more than the result.
pub fn transform_jets(p0: &[Jet], lc: &LeviCivita, u: &Jet) -> Vec<Jet> {
    let n = lc.dim();
    let du: Vec<Jet> = (0..n).map(|i| u.partial(i)).collect();
    let grad = lc.gradient(u);
    let mut norm = du[0].lift(0.0);
    for i in 0..n {
        norm += &(&du[i] * &grad[i]);
    }
    let half_norm = norm * 0.5;
    let hess = lc.hessian(u);
    let g = lc.metric();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let v = &(&(&p0[i * n + j] - &(&half_norm * &g[i * n + j])) - &hess[i * n + j])
                + &(&du[i] * &du[j]);
            out.push(v);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Source {
    Tensor(TensorField),
    Schouten,
    AlphaVelocity(AlphaFamily),
    Rescaled {
        inner: Arc<MoebiusStructure>,
        u: ScalarField,
    },
}

/// A metric `g` together with `P(g)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MoebiusStructure {
    metric: MetricField,
    source: Source,
}

impl MoebiusStructure {
    /// Builds a structure from an explicit symmetric tensor, checking the
    /// trace condition `trace_g P = scal/(2(n−1))` at seeded points.
    pub fn new(metric: &MetricField, p0: TensorField) -> Result<MoebiusStructure> {
        if p0.rank() != (0, 2) || p0.chart() != metric.chart() {
            return Err(GeomError::InvalidTensor(
                "Möbius tensor must be a (0,2) field on the metric's chart".into(),
            ));
        }
        let n = metric.dim();
        let c = p0.components();
        for i in 0..n {
            for j in (i + 1)..n {
                if c[i * n + j] != c[j * n + i] {
                    return Err(GeomError::InvalidTensor(format!(
                        "Möbius tensor is not symmetric in ({i},{j})"
                    )));
                }
            }
        }
        let m = MoebiusStructure {
            metric: metric.clone(),
            source: Source::Tensor(p0),
        };
        m.check_trace(TRACE_TOLERANCE, "trace_g P = scal/(2(n-1))")?;
        Ok(m)
    }

    /// The canonical structure `P(g) = Schouten(g)`, for `n >= 3`.
    pub fn canonical(metric: &MetricField) -> Result<MoebiusStructure> {
        if metric.dim() < 3 {
            return Err(GeomError::Dimension(
                "the canonical Möbius structure needs dimension >= 3".into(),
            ));
        }
        Ok(MoebiusStructure {
            metric: metric.clone(),
            source: Source::Schouten,
        })
    }

    pub fn metric(&self) -> &MetricField {
        &self.metric
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    /// Jets of `P(g)` of the given order (0 or 1).
    pub fn tensor_jets(&self, p: &Point, order: u8) -> Result<Vec<Jet>> {
        let n = self.dim();
        match &self.source {
            Source::Tensor(t) => t.jets(p, order),
            Source::Schouten => schouten_jets(&self.metric.connection(p, order + 2)?),
            Source::AlphaVelocity(alpha) => {
                let a = alpha.velocity_jets(p, order)?;
                let g = self.metric.jets(p, order)?;
                let mut out: Vec<Jet> = Vec::with_capacity(n * n);
                for i in 0..n {
                    for j in 0..n {
                        if j < i {
                            out.push(out[j * n + i].clone());
                            continue;
                        }
                        let mut s = g[0].lift(0.0);
                        for k in 0..n {
                            s += &(&a[k * n + i] * &g[k * n + j]);
                        }
                        out.push(s * 0.5);
                    }
                }
                Ok(out)
            }
            Source::Rescaled { inner, u } => {
                let p0 = inner.tensor_jets(p, order)?;
                let lc = inner.metric.connection(p, order + 1)?;
                Ok(transform_jets(&p0, &lc, &u.jet(p, order + 2)?))
            }
        }
    }

    pub fn tensor(&self, p: &Point) -> Result<Vec<f64>> {
        Ok(self.tensor_jets(p, 0)?.iter().map(Jet::value).collect())
    }

    /// The same structure seen from the representative `e^{2u} g`.
    pub fn rescaled(&self, u: &ScalarField) -> Result<MoebiusStructure> {
        let metric = rescale_metric(&ConformalRep::new(&self.metric, u)?);
        Ok(MoebiusStructure {
            metric,
            source: Source::Rescaled {
                inner: Arc::new(self.clone()),
                u: u.clone(),
            },
        })
    }

    /// `trace_g P − scal/(2(n−1))` at `p`.
    pub fn trace_defect(&self, p: &Point) -> Result<f64> {
        let n = self.dim();
        let lc = self.metric.connection(p, 2)?;
        let r = lc.riemann()?;
        let scal = lc.scalar_from(&lc.ricci_from(&r)).value();
        let pv = self.tensor(p)?;
        let gi = lc.inverse_values();
        let tr: f64 = pv.iter().zip(&gi).map(|(a, b)| a * b).sum();
        Ok(tr - scal / (2.0 * (n as f64 - 1.0)))
    }

    fn check_trace(&self, tol: f64, name: &str) -> Result<()> {
        let mut sampler = Sampler::new(DEFAULT_SEED);
        let mut worst = (0.0f64, Vec::new());
        for p in sampler.points(self.metric.chart(), HYPOTHESIS_SAMPLES)? {
            let d = self.trace_defect(&p)?.abs();
            if !(d <= worst.0) {
                worst = (d, p.coords().to_vec());
            }
        }
        if !(worst.0 <= tol) {
            return Err(GeomError::Hypothesis {
                hypothesis: name.to_string(),
                defect: worst.0,
                location: worst.1,
            });
        }
        Ok(())
    }

    /// `C_{abc} = (∇_a P)_{bc} − (∇_b P)_{ac}` at `p`, row-major.
    pub fn cotton_tensor(&self, p: &Point) -> Result<Vec<f64>> {
        let n = self.dim();
        let pj = self.tensor_jets(p, 1)?;
        let lc = self.metric.connection(p, 1)?;
        let d = lc.covariant_derivative_02(&pj);
        let mut out = vec![0.0; n * n * n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    out[(a * n + b) * n + c] =
                        d[(a * n + b) * n + c].value() - d[(b * n + a) * n + c].value();
                }
            }
        }
        Ok(out)
    }
}

/// `P(e^{2u} g)` at `p`.
pub fn moebius_transform(m: &MoebiusStructure, u: &ScalarField, p: &Point) -> Result<Vec<f64>> {
    let p0 = m.tensor_jets(p, 0)?;
    let lc = m.metric.connection(p, 1)?;
    Ok(transform_jets(&p0, &lc, &u.jet(p, 2)?)
        .iter()
        .map(Jet::value)
        .collect())
}

/// `‖P_{u1 then u2} − P_{u1+u2}‖∞` at `p`.
pub fn cocycle_check(
    m: &MoebiusStructure,
    u1: &ScalarField,
    u2: &ScalarField,
    p: &Point,
) -> Result<f64> {
    let stepwise = moebius_transform(&m.rescaled(u1)?, u2, p)?;
    let direct = moebius_transform(m, &u1.add(u2), p)?;
    Ok(linalg::max_abs_diff(&stepwise, &direct))
}

/// `C(g)(U, V, W) = g((∇_U P̂)V − (∇_V P̂)U, W)`.
pub fn cotton_york(
    m: &MoebiusStructure,
    p: &Point,
    u: &[f64],
    v: &[f64],
    w: &[f64],
) -> Result<f64> {
    let n = m.dim();
    let c = m.cotton_tensor(p)?;
    let mut s = 0.0;
    for a in 0..n {
        for b in 0..n {
            for k in 0..n {
                s += c[(a * n + b) * n + k] * u[a] * v[b] * w[k];
            }
        }
    }
    Ok(s)
}

/// The structure `P(g) = ½ g(α̇(0)·,·)`, after checking `tr α̇(0) = 2K` for
/// surfaces or `g(α̇(0)·,·) = 2P^g` in higher dimension.
pub fn moebius_from_alpha(g: &MetricField, alpha: &AlphaFamily) -> Result<MoebiusStructure> {
    let n = g.dim();
    let m = MoebiusStructure {
        metric: g.clone(),
        source: Source::AlphaVelocity(alpha.clone()),
    };
    if n == 2 {
        m.check_trace(HYPOTHESIS_TOLERANCE, "trace(alpha'(0)) = 2K")?;
        return Ok(m);
    }
    let mut sampler = Sampler::new(DEFAULT_SEED);
    let mut worst = (0.0f64, Vec::new());
    for p in sampler.points(g.chart(), HYPOTHESIS_SAMPLES)? {
        let d = linalg::max_abs_diff(&m.tensor(&p)?, &schouten(g, &p)?);
        if !(d <= worst.0) {
            worst = (d, p.coords().to_vec());
        }
    }
    if !(worst.0 <= HYPOTHESIS_TOLERANCE) {
        return Err(GeomError::Hypothesis {
            hypothesis: "g(alpha'(0)., .) = 2P".into(),
            defect: worst.0,
            location: worst.1,
        });
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{parse_expression, Chart, Interval};
    use crate::riemann::gauss_curvature;
    use std::f64::consts::PI;

    fn plane() -> MetricField {
        MetricField::flat(&Chart::euclidean("r2", &["x", "y"]).unwrap())
    }

    #[test]
    fn rescale_examples() {
        let g = plane();
        let c = g.chart().clone();
        let p = Point::new(&c, vec![0.2, 0.7]).unwrap();
        let zero = ScalarField::constant(&c, 0.0);
        assert_eq!(
            rescale_metric(&ConformalRep::new(&g, &zero).unwrap())
                .values(&p)
                .unwrap(),
            g.values(&p).unwrap()
        );
        let l2 = parse_expression("log(2)", &c).unwrap();
        let v = rescale_metric(&ConformalRep::new(&g, &l2).unwrap())
            .values(&p)
            .unwrap();
        assert!(linalg::max_abs_diff(&v, &[4.0, 0.0, 0.0, 4.0]) < 1e-14);
        let s = parse_expression("log(2/(1+x^2+y^2))", &c).unwrap();
        let round = rescale_metric(&ConformalRep::new(&g, &s).unwrap());
        assert!((gauss_curvature(&round, &p).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn schouten_examples() {
        let c = Chart::new(
            "s3",
            &["a", "b", "c"],
            vec![
                Interval::new(0.0, PI),
                Interval::new(0.0, PI),
                Interval::new(-PI, PI),
            ],
        )
        .unwrap();
        let g = MetricField::parse(
            &c,
            &[
                "1",
                "0",
                "0",
                "0",
                "sin(a)^2",
                "0",
                "0",
                "0",
                "sin(a)^2*sin(b)^2",
            ],
            Signature::Riemannian,
        )
        .unwrap();
        let p = Point::new(&c, vec![1.2, 0.4, 0.0]).unwrap();
        let half: Vec<f64> = g.values(&p).unwrap().iter().map(|x| x / 2.0).collect();
        assert!(linalg::max_abs_diff(&schouten(&g, &p).unwrap(), &half) < 1e-12);
        let flat = MetricField::flat(&Chart::euclidean("r3", &["x", "y", "z"]).unwrap());
        let q = Point::new(flat.chart(), vec![0.0, 1.0, 2.0]).unwrap();
        assert_eq!(schouten(&flat, &q).unwrap(), vec![0.0; 9]);
        let g2 = plane();
        let q2 = Point::new(g2.chart(), vec![0.0, 1.0]).unwrap();
        assert!(matches!(schouten(&g2, &q2), Err(GeomError::Dimension(_))));
    }

    #[test]
    fn transform_examples() {
        let g = plane();
        let c = g.chart().clone();
        let m = MoebiusStructure::new(
            &g,
            TensorField::parse(&c, 0, 2, &["0", "0", "0", "0"]).unwrap(),
        )
        .unwrap();
        let p = Point::new(&c, vec![0.3, -0.2]).unwrap();
        let u = parse_expression("1.5*x", &c).unwrap();
        let v = moebius_transform(&m, &u, &p).unwrap();
        assert!(linalg::max_abs_diff(&v, &[1.125, 0.0, 0.0, -1.125]) < 1e-14);
        let zero = ScalarField::constant(&c, 0.0);
        assert_eq!(moebius_transform(&m, &zero, &p).unwrap(), vec![0.0; 4]);
        let u1 = parse_expression("sin(x)*y", &c).unwrap();
        let u2 = parse_expression("x^2 - cos(y)", &c).unwrap();
        assert!(cocycle_check(&m, &u1, &u2, &p).unwrap() < 1e-12);
        let r = m.rescaled(&u1).unwrap();
        assert!(r.trace_defect(&p).unwrap().abs() < 1e-12);
    }

    #[test]
    fn trace_condition_enforced() {
        let g = plane();
        let bad = TensorField::parse(g.chart(), 0, 2, &["1", "0", "0", "0"]).unwrap();
        assert!(matches!(
            MoebiusStructure::new(&g, bad),
            Err(GeomError::Hypothesis { .. })
        ));
    }

    #[test]
    fn cotton_examples() {
        let g = plane();
        let c = g.chart().clone();
        let p = Point::new(&c, vec![0.3, -0.2]).unwrap();
        let m = MoebiusStructure::new(
            &g,
            TensorField::parse(&c, 0, 2, &["x*y", "sin(x)", "sin(x)", "-x*y"]).unwrap(),
        )
        .unwrap();
        // C_{xyx} = ∂x P_yx − ∂y P_xx = cos x − x
        let v = cotton_york(&m, &p, &[1.0, 0.0], &[0.0, 1.0], &[1.0, 0.0]).unwrap();
        assert!((v - (0.3f64.cos() - 0.3)).abs() < 1e-14);
        let w = cotton_york(&m, &p, &[0.0, 1.0], &[1.0, 0.0], &[1.0, 0.0]).unwrap();
        assert_eq!(v, -w);
        let zero = MoebiusStructure::new(
            &g,
            TensorField::parse(&c, 0, 2, &["0", "0", "0", "0"]).unwrap(),
        )
        .unwrap();
        assert_eq!(zero.cotton_tensor(&p).unwrap(), vec![0.0; 8]);
    }

    #[test]
    fn alpha_structures() {
        let c = Chart::new(
            "s2",
            &["th", "ph"],
            vec![Interval::new(0.0, PI), Interval::new(0.0, 2.0 * PI)],
        )
        .unwrap();
        let g =
            MetricField::parse(&c, &["1", "0", "0", "sin(th)^2"], Signature::Riemannian).unwrap();
        let al = AlphaFamily::parse(&g, &["(1+rho/2)^2", "0", "0", "(1+rho/2)^2"], 2.0).unwrap();
        let m = moebius_from_alpha(&g, &al).unwrap();
        let p = Point::new(&c, vec![1.0, 1.0]).unwrap();
        let half: Vec<f64> = g.values(&p).unwrap().iter().map(|x| x / 2.0).collect();
        assert!(linalg::max_abs_diff(&m.tensor(&p).unwrap(), &half) < 1e-14);
        assert!(linalg::max_abs(&m.cotton_tensor(&p).unwrap()) < 1e-13);
        let id = AlphaFamily::identity(&g, 1.0).unwrap();
        assert!(matches!(
            moebius_from_alpha(&g, &id),
            Err(GeomError::Hypothesis { .. })
        ));
    }
}

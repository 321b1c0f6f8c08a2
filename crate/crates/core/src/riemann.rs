//! Levi-Civita connection and curvature of a metric given in coordinates.
//!
//! Curvature convention: `R(X,Y)Z = ∇_X ∇_Y Z − ∇_Y ∇_X Z − ∇_[X,Y] Z`, with
//! components `R^a_{bcd} = dx^a(R(∂_c, ∂_d) ∂_b)`. In coordinates
//!
//! ```text
//! R^a_{bcd} = ∂_c Γ^a_{db} − ∂_d Γ^a_{cb} + Γ^a_{ce} Γ^e_{db} − Γ^a_{de} Γ^e_{cb}
//! Ric_{bd}  = R^a_{bad}
//! K(v, w)   = g(R(v, w) w, v) / (g(v,v) g(w,w) − g(v,w)^2)
//! ```
//!
//! so that the unit round sphere has sectional curvature `+1`.
//!
//! Every operator is computed on [`Jet`]s: a metric jet of order `k` yields
//! Christoffel symbols of order `k − 1` and curvature of order `k − 2`, which
//! is how derivatives of curvature become available downstream.

use std::sync::Arc;

use crate::chart::{Chart, Point, ScalarField, TensorField};
use crate::error::{GeomError, Result};
use crate::expr::Expr;
use crate::jet::Jet;
use crate::linalg;
use crate::sampling::{Sampler, DEFAULT_SEED};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signature {
    Riemannian,
    Lorentzian,
}

impl Signature {
    fn name(self) -> &'static str {
        match self {
            Signature::Riemannian => "riemannian",
            Signature::Lorentzian => "lorentzian",
        }
    }
}

/// A symmetric `(0,2)` tensor field used as a metric.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricField {
    components: TensorField,
    signature: Signature,
}

impl MetricField {
    /// Builds a metric from `(0,2)` components. Off-diagonal pairs must agree
    /// as fields; the upper triangle is mirrored so the stored components are
    /// structurally symmetric.
    pub fn new(components: TensorField, signature: Signature) -> Result<MetricField> {
        if components.rank() != (0, 2) {
            return Err(GeomError::InvalidTensor(format!(
                "metric must be a (0,2) tensor, got {:?}",
                components.rank()
            )));
        }
        let chart = components.chart().clone();
        let n = chart.dim();
        let comps = components.components();
        let mut sampler = Sampler::new(DEFAULT_SEED);
        let probes = sampler.points(&chart, 20)?;
        let mut sym = comps.to_vec();
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (&comps[i * n + j], &comps[j * n + i]);
                if a != b {
                    for p in &probes {
                        let (va, vb) = (a.eval(p.coords()), b.eval(p.coords()));
                        if let (Ok(va), Ok(vb)) = (va, vb) {
                            if (va - vb).abs() > 1e-12 * (1.0 + va.abs()) {
                                return Err(GeomError::InvalidTensor(format!(
                                    "metric components ({i},{j}) and ({j},{i}) differ at {p}"
                                )));
                            }
                        }
                    }
                }
                sym[j * n + i] = a.clone();
            }
        }
        Ok(MetricField {
            components: TensorField::new(&chart, 0, 2, sym)?,
            signature,
        })
    }

    pub fn parse<S: AsRef<str>>(
        chart: &Arc<Chart>,
        sources: &[S],
        signature: Signature,
    ) -> Result<MetricField> {
        MetricField::new(TensorField::parse(chart, 0, 2, sources)?, signature)
    }

    /// `δ_ij` on the chart.
    pub fn flat(chart: &Arc<Chart>) -> MetricField {
        let n = chart.dim();
        let comps = (0..n * n)
            .map(|k| Expr::constant(if k / n == k % n { 1.0 } else { 0.0 }))
            .collect();
        MetricField {
            components: TensorField::new(chart, 0, 2, comps)
                .expect("flat metric has n^2 components"),
            signature: Signature::Riemannian,
        }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        self.components.chart()
    }

    pub fn dim(&self) -> usize {
        self.chart().dim()
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn components(&self) -> &TensorField {
        &self.components
    }

    pub fn component(&self, i: usize, j: usize) -> &Expr {
        &self.components.components()[i * self.dim() + j]
    }

    pub fn values(&self, p: &Point) -> Result<Vec<f64>> {
        self.components.values(p)
    }

    pub fn jets(&self, p: &Point, order: u8) -> Result<Vec<Jet>> {
        self.components.jets(p, order)
    }

    /// Checks invertibility and the declared eigenvalue signs at `p`;
    /// returns the eigenvalues.
    pub fn check_signature(&self, p: &Point) -> Result<Vec<f64>> {
        let g = self.values(p)?;
        let n = self.dim();
        linalg::Lu::new(&g, n)?;
        let ev = linalg::symmetric_eigenvalues(&g, n);
        let negatives = ev.iter().filter(|&&e| e < 0.0).count();
        let ok = match self.signature {
            Signature::Riemannian => negatives == 0,
            Signature::Lorentzian => negatives == 1,
        };
        if ok && ev.iter().all(|e| e.abs() > 0.0) {
            Ok(ev)
        } else {
            Err(GeomError::Signature {
                expected: self.signature.name(),
                eigenvalues: ev,
            })
        }
    }

    /// Levi-Civita data from metric jets of the given order (at least 1).
    pub fn connection(&self, p: &Point, order: u8) -> Result<LeviCivita> {
        LeviCivita::from_jets(self.jets(p, order)?, self.dim())
    }
}

/// Metric, inverse metric and Christoffel symbols as jets at one point.
#[derive(Debug, Clone)]
pub struct LeviCivita {
    n: usize,
    g: Vec<Jet>,
    ginv: Vec<Jet>,
    gamma: Vec<Jet>,
}

impl LeviCivita {
    pub fn from_jets(g: Vec<Jet>, n: usize) -> Result<LeviCivita> {
        assert_eq!(g.len(), n * n);
        let order = g[0].order();
        if order == 0 {
            return Err(GeomError::Dimension(
                "Christoffel symbols need metric jets of order >= 1".into(),
            ));
        }
        let ginv = linalg::inverse(&g, n)?;
        let dg: Vec<Vec<Jet>> = (0..n)
            .map(|c| g.iter().map(|gij| gij.partial(c)).collect())
            .collect();
        let ginv_low: Vec<Jet> = ginv.iter().map(|j| j.truncated(order - 1)).collect();
        // first kind: Γ_{d,bc} = ½(∂_b g_dc + ∂_c g_db − ∂_d g_bc)
        let mut first_kind = Vec::with_capacity(n * n * n);
        for d in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let v = &(&dg[b][d * n + c] + &dg[c][d * n + b]) - &dg[d][b * n + c];
                    first_kind.push(v * 0.5);
                }
            }
        }
        let mut gamma: Vec<Jet> = Vec::with_capacity(n * n * n);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let mut s = ginv_low[a * n].lift(0.0);
                    if c < b {
                        // torsion-free: reuse the mirrored entry bit-for-bit
                        gamma.push(gamma[(a * n + c) * n + b].clone());
                        continue;
                    }
                    for d in 0..n {
                        s += &(&ginv_low[a * n + d] * &first_kind[(d * n + b) * n + c]);
                    }
                    gamma.push(s);
                }
            }
        }
        Ok(LeviCivita { n, g, ginv, gamma })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Order of the metric jets this was built from.
    pub fn order(&self) -> u8 {
        self.g[0].order()
    }

    pub fn metric(&self) -> &[Jet] {
        &self.g
    }

    pub fn inverse_metric(&self) -> &[Jet] {
        &self.ginv
    }

    /// `Γ^a_{bc}`
    pub fn gamma(&self, a: usize, b: usize, c: usize) -> &Jet {
        &self.gamma[(a * self.n + b) * self.n + c]
    }

    pub fn metric_values(&self) -> Vec<f64> {
        self.g.iter().map(Jet::value).collect()
    }

    pub fn inverse_values(&self) -> Vec<f64> {
        self.ginv.iter().map(Jet::value).collect()
    }

    pub fn christoffel_values(&self) -> Vec<f64> {
        self.gamma.iter().map(Jet::value).collect()
    }

    /// `∇_X Y` for coordinate-constant fields with components `x`, `y`.
    pub fn covariant(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|a| {
                let mut s = 0.0;
                for b in 0..n {
                    for c in 0..n {
                        s += self.gamma(a, b, c).value() * x[b] * y[c];
                    }
                }
                s
            })
            .collect()
    }

    /// `R^a_{bcd}` jets, row-major in `(a, b, c, d)`. Needs metric order >= 2.
    pub fn riemann(&self) -> Result<Vec<Jet>> {
        let n = self.n;
        if self.order() < 2 {
            return Err(GeomError::Dimension(
                "curvature needs metric jets of order >= 2".into(),
            ));
        }
        let low = self.order() - 2;
        let dgamma: Vec<Vec<Jet>> = (0..n)
            .map(|c| self.gamma.iter().map(|j| j.partial(c)).collect())
            .collect();
        let gl: Vec<Jet> = self.gamma.iter().map(|j| j.truncated(low)).collect();
        let idx = |a: usize, b: usize, c: usize| (a * n + b) * n + c;
        let mut out: Vec<Jet> = Vec::with_capacity(n.pow(4));
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        if d < c {
                            out.push(-&out[((a * n + b) * n + d) * n + c]);
                            continue;
                        }
                        if d == c {
                            out.push(gl[0].lift(0.0));
                            continue;
                        }
                        let mut s = &dgamma[c][idx(a, d, b)] - &dgamma[d][idx(a, c, b)];
                        for e in 0..n {
                            s += &(&(&gl[idx(a, c, e)] * &gl[idx(e, d, b)])
                                - &(&gl[idx(a, d, e)] * &gl[idx(e, c, b)]));
                        }
                        out.push(s);
                    }
                }
            }
        }
        Ok(out)
    }

    /// `Ric_{bd} = R^a_{bad}`.
    pub fn ricci_from(&self, riemann: &[Jet]) -> Vec<Jet> {
        let n = self.n;
        let mut out: Vec<Jet> = Vec::with_capacity(n * n);
        for b in 0..n {
            for d in 0..n {
                if d < b {
                    out.push(out[d * n + b].clone());
                    continue;
                }
                let mut s = riemann[0].lift(0.0);
                for a in 0..n {
                    s += &riemann[((a * n + b) * n + a) * n + d];
                }
                out.push(s);
            }
        }
        out
    }

    pub fn scalar_from(&self, ricci: &[Jet]) -> Jet {
        let n = self.n;
        let order = ricci[0].order();
        let mut s = ricci[0].lift(0.0);
        for b in 0..n {
            for d in 0..n {
                s += &(&self.ginv[b * n + d].truncated(order) * &ricci[b * n + d]);
            }
        }
        s
    }

    /// Gradient components `g^{ij} ∂_j u` as jets (order of `du`).
    pub fn gradient(&self, u: &Jet) -> Vec<Jet> {
        let n = self.n;
        let du: Vec<Jet> = (0..n).map(|j| u.partial(j)).collect();
        (0..n)
            .map(|i| {
                let mut s = du[0].lift(0.0);
                for j in 0..n {
                    s += &(&self.ginv[i * n + j] * &du[j]);
                }
                s
            })
            .collect()
    }

    /// `Hess_ij u = ∂_ij u − Γ^k_ij ∂_k u` as jets.
    pub fn hessian(&self, u: &Jet) -> Vec<Jet> {
        let n = self.n;
        let du: Vec<Jet> = (0..n).map(|j| u.partial(j)).collect();
        let mut out: Vec<Jet> = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                if j < i {
                    out.push(out[j * n + i].clone());
                    continue;
                }
                let mut s = du[i].partial(j);
                for k in 0..n {
                    s = &s - &(self.gamma(k, i, j) * &du[k]);
                }
                out.push(s);
            }
        }
        out
    }

    /// `∇_k T_ij` for a `(0,2)` tensor given as jets; index `(k, i, j)`.
    pub fn covariant_derivative_02(&self, t: &[Jet]) -> Vec<Jet> {
        let n = self.n;
        let mut out = Vec::with_capacity(n * n * n);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut s = t[i * n + j].partial(k);
                    for l in 0..n {
                        s = &s - &(self.gamma(l, k, i) * &t[l * n + j]);
                        s = &s - &(self.gamma(l, k, j) * &t[i * n + l]);
                    }
                    out.push(s);
                }
            }
        }
        out
    }

    /// `∇_k T^i_j` for a `(1,1)` tensor given as jets; index `(k, i, j)`.
    pub fn covariant_derivative_11(&self, t: &[Jet]) -> Vec<Jet> {
        let n = self.n;
        let mut out = Vec::with_capacity(n * n * n);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut s = t[i * n + j].partial(k);
                    for l in 0..n {
                        s += &(self.gamma(i, k, l) * &t[l * n + j]);
                        s = &s - &(self.gamma(l, k, j) * &t[i * n + l]);
                    }
                    out.push(s);
                }
            }
        }
        out
    }
}

/// Riemann, Ricci and scalar curvature values at one point.
#[derive(Debug, Clone)]
pub struct CurvatureSlice {
    pub point: Point,
    /// `R^a_{bcd}`, row-major.
    pub riemann: Vec<f64>,
    pub ricci: Vec<f64>,
    pub scalar: f64,
}

impl CurvatureSlice {
    pub fn dim(&self) -> usize {
        self.point.dim()
    }

    pub fn r(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let n = self.dim();
        self.riemann[((a * n + b) * n + c) * n + d]
    }

    /// Components of `R(x, y) z`.
    pub fn apply(&self, x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|a| {
                let mut s = 0.0;
                for b in 0..n {
                    for c in 0..n {
                        for d in 0..n {
                            s += self.r(a, b, c, d) * z[b] * x[c] * y[d];
                        }
                    }
                }
                s
            })
            .collect()
    }
}

fn values(j: &[Jet]) -> Vec<f64> {
    j.iter().map(Jet::value).collect()
}

/// `Γ^a_{bc}` row-major in `(a, b, c)`.
pub fn christoffel(g: &MetricField, p: &Point) -> Result<Vec<f64>> {
    Ok(g.connection(p, 1)?.christoffel_values())
}

pub fn riemann(g: &MetricField, p: &Point) -> Result<CurvatureSlice> {
    let lc = g.connection(p, 2)?;
    let r = lc.riemann()?;
    let ric = lc.ricci_from(&r);
    let scal = lc.scalar_from(&ric);
    Ok(CurvatureSlice {
        point: p.clone(),
        riemann: values(&r),
        ricci: values(&ric),
        scalar: scal.value(),
    })
}

pub fn ricci(g: &MetricField, p: &Point) -> Result<Vec<f64>> {
    Ok(riemann(g, p)?.ricci)
}

pub fn scalar_curvature(g: &MetricField, p: &Point) -> Result<f64> {
    Ok(riemann(g, p)?.scalar)
}

/// Gauss curvature of a surface (`scal / 2`).
pub fn gauss_curvature(g: &MetricField, p: &Point) -> Result<f64> {
    if g.dim() != 2 {
        return Err(GeomError::Dimension(format!(
            "Gauss curvature needs a surface, got dimension {}",
            g.dim()
        )));
    }
    Ok(0.5 * scalar_curvature(g, p)?)
}

/// Sectional curvature from curvature values and the metric at the point.
pub fn sectional_from(curv: &CurvatureSlice, gmat: &[f64], v: &[f64], w: &[f64]) -> Result<f64> {
    let gram =
        linalg::pair(gmat, v, v) * linalg::pair(gmat, w, w) - linalg::pair(gmat, v, w).powi(2);
    if gram.abs() < 1e-12 {
        return Err(GeomError::DegeneratePlane { gram });
    }
    let rvw = curv.apply(v, w, w);
    Ok(linalg::pair(gmat, &rvw, v) / gram)
}

pub fn sectional_curvature(g: &MetricField, p: &Point, v: &[f64], w: &[f64]) -> Result<f64> {
    let curv = riemann(g, p)?;
    sectional_from(&curv, &g.values(p)?, v, w)
}

pub fn gradient(g: &MetricField, u: &ScalarField, p: &Point) -> Result<Vec<f64>> {
    let lc = g.connection(p, 1)?;
    Ok(values(&lc.gradient(&u.jet(p, 1)?)))
}

pub fn hessian(g: &MetricField, u: &ScalarField, p: &Point) -> Result<Vec<f64>> {
    let lc = g.connection(p, 1)?;
    Ok(values(&lc.hessian(&u.jet(p, 2)?)))
}

pub fn laplacian(g: &MetricField, u: &ScalarField, p: &Point) -> Result<f64> {
    let lc = g.connection(p, 1)?;
    let h = lc.hessian(&u.jet(p, 2)?);
    let gi = lc.inverse_values();
    Ok(h.iter().zip(&gi).map(|(a, b)| a.value() * b).sum())
}

pub fn grad_norm_sq(g: &MetricField, u: &ScalarField, p: &Point) -> Result<f64> {
    let gi = linalg::inverse(&g.values(p)?, g.dim())?;
    let du = u.jet(p, 1)?;
    Ok(linalg::pair(&gi, du.first(), du.first()))
}

/// `(L_X g)_ij = X^k ∂_k g_ij + g_kj ∂_i X^k + g_ik ∂_j X^k` for a vector
/// field `X` given as a `(1,0)` tensor field.
pub fn lie_derivative_metric(g: &MetricField, x: &TensorField, p: &Point) -> Result<Vec<f64>> {
    if x.rank() != (1, 0) {
        return Err(GeomError::InvalidTensor(
            "Lie derivative needs a vector field".into(),
        ));
    }
    let n = g.dim();
    let gj = g.jets(p, 1)?;
    let xj = x.jets(p, 1)?;
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let mut s = 0.0;
            for k in 0..n {
                s += xj[k].value() * gj[i * n + j].d(k);
                s += gj[k * n + j].value() * xj[k].d(i);
                s += gj[i * n + k].value() * xj[k].d(j);
            }
            out[i * n + j] = s;
            out[j * n + i] = s;
        }
    }
    Ok(out)
}

/// Covariant derivative of a `(1,1)` or `(0,2)` tensor field, index `(k, i, j)`
/// meaning `(∇_{∂_k} T)` component `ij`.
pub fn covariant_derivative_tensor(
    g: &MetricField,
    t: &TensorField,
    p: &Point,
) -> Result<Vec<f64>> {
    let lc = g.connection(p, 1)?;
    let tj = t.jets(p, 1)?;
    let out = match t.rank() {
        (0, 2) => lc.covariant_derivative_02(&tj),
        (1, 1) => lc.covariant_derivative_11(&tj),
        r => {
            return Err(GeomError::InvalidTensor(format!(
                "covariant derivative supports (1,1) and (0,2), got {r:?}"
            )))
        }
    };
    Ok(values(&out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{parse_expression, Interval};
    use std::f64::consts::PI;

    fn sphere() -> MetricField {
        let c = Chart::new(
            "s2",
            &["th", "ph"],
            vec![Interval::new(0.0, PI), Interval::new(-PI, PI)],
        )
        .unwrap();
        MetricField::parse(&c, &["1", "0", "0", "sin(th)^2"], Signature::Riemannian).unwrap()
    }

    #[test]
    fn flat_has_no_christoffels() {
        let c = Chart::euclidean("r2", &["x", "y"]).unwrap();
        let g = MetricField::flat(&c);
        let p = Point::new(&c, vec![0.3, -1.0]).unwrap();
        assert!(christoffel(&g, &p).unwrap().iter().all(|&v| v == 0.0));
        assert_eq!(scalar_curvature(&g, &p).unwrap(), 0.0);
    }

    #[test]
    fn sphere_christoffels_at_equator() {
        let g = sphere();
        let p = Point::new(g.chart(), vec![PI / 2.0, 0.0]).unwrap();
        let gam = christoffel(&g, &p).unwrap();
        // Γ^θ_φφ = −sinθcosθ at index 3, Γ^φ_θφ = cotθ at index 5
        assert!(gam[3].abs() < 1e-15);
        assert!(gam[5].abs() < 1e-15);
        let q = Point::new(g.chart(), vec![0.7, 0.0]).unwrap();
        let gam = christoffel(&g, &q).unwrap();
        assert!((gam[3] + 0.7f64.sin() * 0.7f64.cos()).abs() < 1e-14);
        assert!((gam[5] - 1.0 / 0.7f64.tan()).abs() < 1e-14);
    }

    #[test]
    fn sphere_curvature_sign() {
        let g = sphere();
        let p = Point::new(g.chart(), vec![1.1, 0.4]).unwrap();
        assert!((scalar_curvature(&g, &p).unwrap() - 2.0).abs() < 1e-12);
        let k = sectional_curvature(&g, &p, &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!((k - 1.0).abs() < 1e-12);
        let k2 = sectional_curvature(&g, &p, &[2.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!((k2 - 1.0).abs() < 1e-12);
        assert!(matches!(
            sectional_curvature(&g, &p, &[1.0, 0.0], &[2.0, 0.0]),
            Err(GeomError::DegeneratePlane { .. })
        ));
    }

    #[test]
    fn three_sphere_is_einstein() {
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
        let p = Point::new(&c, vec![1.0, 2.0, 0.5]).unwrap();
        let curv = riemann(&g, &p).unwrap();
        let gv = g.values(&p).unwrap();
        assert!((curv.scalar - 6.0).abs() < 1e-12);
        assert!(
            linalg::max_abs_diff(&curv.ricci, &gv.iter().map(|x| 2.0 * x).collect::<Vec<_>>())
                < 1e-12
        );
    }

    #[test]
    fn gradient_hessian_laplacian() {
        let c = Chart::euclidean("r2", &["x", "y"]).unwrap();
        let g = MetricField::flat(&c);
        let p = Point::new(&c, vec![0.5, 2.0]).unwrap();
        let u = parse_expression("x^2 + y^2", &c).unwrap();
        assert_eq!(laplacian(&g, &u, &p).unwrap(), 4.0);
        assert_eq!(hessian(&g, &u, &p).unwrap(), vec![2.0, 0.0, 0.0, 2.0]);
        let lin = parse_expression("3*x", &c).unwrap();
        assert_eq!(hessian(&g, &lin, &p).unwrap(), vec![0.0; 4]);
        assert_eq!(grad_norm_sq(&g, &lin, &p).unwrap(), 9.0);
        let k = ScalarField::constant(&c, 2.0);
        assert_eq!(gradient(&g, &k, &p).unwrap(), vec![0.0, 0.0]);
        assert_eq!(laplacian(&g, &k, &p).unwrap(), 0.0);
    }

    #[test]
    fn lie_derivative_examples() {
        let c = Chart::euclidean("r3", &["x", "y", "z"]).unwrap();
        let g = MetricField::flat(&c);
        let p = Point::new(&c, vec![0.5, -1.0, 2.0]).unwrap();
        let killing = TensorField::parse(&c, 1, 0, &["1", "0", "0"]).unwrap();
        assert_eq!(
            lie_derivative_metric(&g, &killing, &p).unwrap(),
            vec![0.0; 9]
        );
        let euler = TensorField::parse(&c, 1, 0, &["x", "y", "z"]).unwrap();
        let l = lie_derivative_metric(&g, &euler, &p).unwrap();
        assert_eq!(l, vec![2.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 2.0]);
    }

    #[test]
    fn covariant_derivative_examples() {
        let g = sphere();
        let p = Point::new(g.chart(), vec![0.9, 0.3]).unwrap();
        let id = TensorField::parse(g.chart(), 1, 1, &["1", "0", "0", "1"]).unwrap();
        assert!(linalg::max_abs(&covariant_derivative_tensor(&g, &id, &p).unwrap()) < 1e-15);
        let c = Chart::euclidean("r2", &["x", "y"]).unwrap();
        let t = TensorField::parse(&c, 0, 2, &["1", "2", "2", "3"]).unwrap();
        let q = Point::new(&c, vec![0.0, 0.0]).unwrap();
        assert_eq!(
            covariant_derivative_tensor(&MetricField::flat(&c), &t, &q).unwrap(),
            vec![0.0; 8]
        );
        // ∇g = 0 on the sphere
        let gt = g.components().clone();
        assert!(linalg::max_abs(&covariant_derivative_tensor(&g, &gt, &p).unwrap()) < 1e-14);
    }

    #[test]
    fn asymmetric_metric_rejected() {
        let c = Chart::euclidean("r2", &["x", "y"]).unwrap();
        assert!(MetricField::parse(&c, &["1", "x", "0", "1"], Signature::Riemannian).is_err());
    }
}

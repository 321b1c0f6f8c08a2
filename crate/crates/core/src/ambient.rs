//! The ambient manifold `B × M`, `B = (0,∞) × (−ε, ε)`, with the Lorentzian
//! metric
//!
//! ```text
//! g̃ = 2ρ dt² + 2t dt dρ + t² g(α(ρ)·,·)
//! ```
//!
//! built from a base metric `g` and a one-parameter family `α(ρ)` of
//! `g`-self-adjoint endomorphisms with `α(0) = Id`. Product-chart coordinates
//! are ordered `(t, rho, x¹, …, xⁿ)`; ambient vectors use the same order.

use std::sync::Arc;

use crate::chart::{Chart, Interval, Point, TensorField};
use crate::error::{GeomError, Result};
use crate::expr::{Expr, Scope};
use crate::jet::Jet;
use crate::linalg;
use crate::riemann::{self, MetricField, Signature};
use crate::sampling::{Sampler, DEFAULT_SEED};

/// Range of `t` used when sampling band points.
pub const T_SAMPLE_RANGE: (f64, f64) = (0.2, 5.0);

/// Eigenvalue floor certifying positivity of `g(α(ρ)·,·)`.
pub const POSITIVITY_FLOOR: f64 = 1e-8;

/// Singular values above this count towards the rank of the slice Gram matrix.
pub const RANK_THRESHOLD: f64 = 1e-9;

/// `α(ρ)` as `(1,1)` component expressions in `(rho, x¹, …, xⁿ)`, row-major
/// with `(α v)^k = Σ_i α[k][i] v^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaFamily {
    chart: Arc<Chart>,
    components: Vec<Expr>,
    epsilon: f64,
}

impl AlphaFamily {
    /// Validates `α(0) = Id`, self-adjointness and positivity against `g`.
    pub fn new(g: &MetricField, components: Vec<Expr>, epsilon: f64) -> Result<AlphaFamily> {
        let chart = g.chart().clone();
        let n = chart.dim();
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(GeomError::InvalidAlpha(format!(
                "epsilon must be a positive real, got {epsilon}"
            )));
        }
        if components.len() != n * n {
            return Err(GeomError::InvalidAlpha(format!(
                "expected {} components, got {}",
                n * n,
                components.len()
            )));
        }
        if let Some(m) = components.iter().filter_map(Expr::max_var).max() {
            if m > n {
                return Err(GeomError::InvalidAlpha(
                    "component references a variable outside (rho, coordinates)".into(),
                ));
            }
        }
        let alpha = AlphaFamily {
            chart,
            components,
            epsilon,
        };
        alpha.validate(g)?;
        Ok(alpha)
    }

    /// Parses components on the scope `(rho, coordinates…)` plus chart constants.
    pub fn parse<S: AsRef<str>>(
        g: &MetricField,
        sources: &[S],
        epsilon: f64,
    ) -> Result<AlphaFamily> {
        let scope = AlphaFamily::scope(g.chart());
        let comps = sources
            .iter()
            .map(|s| Expr::parse(s.as_ref(), &scope))
            .collect::<Result<Vec<_>>>()?;
        AlphaFamily::new(g, comps, epsilon)
    }

    pub fn scope(chart: &Chart) -> Scope {
        let mut vars = vec!["rho".to_string()];
        vars.extend(chart.coordinates().iter().cloned());
        Scope::new(&vars).with_constants(chart.constants())
    }

    pub fn identity(g: &MetricField, epsilon: f64) -> Result<AlphaFamily> {
        let n = g.dim();
        let comps = (0..n * n)
            .map(|k| Expr::constant(if k / n == k % n { 1.0 } else { 0.0 }))
            .collect();
        AlphaFamily::new(g, comps, epsilon)
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    fn args(rho: f64, x: &[f64]) -> Vec<f64> {
        let mut v = Vec::with_capacity(x.len() + 1);
        v.push(rho);
        v.extend_from_slice(x);
        v
    }

    pub fn values(&self, rho: f64, x: &[f64]) -> Result<Vec<f64>> {
        let args = AlphaFamily::args(rho, x);
        self.components.iter().map(|c| c.eval(&args)).collect()
    }

    /// Jets of `α` in the `n + 1` variables `(rho, x…)`.
    pub fn jets(&self, rho: f64, x: &[f64], order: u8) -> Result<Vec<Jet>> {
        let vars = Jet::seed(&AlphaFamily::args(rho, x), order);
        self.components.iter().map(|c| c.eval_jet(&vars)).collect()
    }

    /// Jets of `α̇(ρ)` in the base variables, of the given order (at most 2).
    pub fn velocity_jets_at(&self, rho: f64, x: &[f64], order: u8) -> Result<Vec<Jet>> {
        let n = self.dim();
        let base: Vec<usize> = (1..=n).collect();
        Ok(self
            .jets(rho, x, order + 1)?
            .iter()
            .map(|j| j.partial(0).restrict(&base))
            .collect())
    }

    /// Jets of `α̇(0)` in the base variables.
    pub fn velocity_jets(&self, p: &Point, order: u8) -> Result<Vec<Jet>> {
        p.check_chart(&self.chart)?;
        self.velocity_jets_at(0.0, p.coords(), order)
    }

    pub fn velocity_values(&self, rho: f64, x: &[f64]) -> Result<Vec<f64>> {
        let args = AlphaFamily::args(rho, x);
        let vars = Jet::seed(&args, 1);
        self.components
            .iter()
            .map(|c| Ok(c.eval_jet(&vars)?.d(0)))
            .collect()
    }

    /// `α̇(0)` at a base point.
    pub fn velocity(&self, p: &Point) -> Result<Vec<f64>> {
        p.check_chart(&self.chart)?;
        self.velocity_values(0.0, p.coords())
    }

    fn validate(&self, g: &MetricField) -> Result<()> {
        let n = self.dim();
        let mut sampler = Sampler::new(DEFAULT_SEED);
        let id = linalg::identity(n);
        for p in sampler.points(&self.chart, 50)? {
            let a0 = self.values(0.0, p.coords())?;
            let d = linalg::max_abs_diff(&a0, &id);
            if d > 1e-12 {
                return Err(GeomError::InvalidAlpha(format!(
                    "alpha(0) differs from the identity by {d:e} at {p}"
                )));
            }
        }
        let band = Interval::new(-self.epsilon, self.epsilon);
        for _ in 0..200 {
            let rho = sampler.in_interval(&band);
            let p = sampler.point(&self.chart)?;
            let form = bilinear(&g.values(&p)?, &self.values(rho, p.coords())?, n);
            let asym = (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .fold(0.0f64, |m, (i, j)| {
                    m.max((form[i * n + j] - form[j * n + i]).abs())
                });
            if asym > 1e-10 {
                return Err(GeomError::InvalidAlpha(format!(
                    "alpha is not g-self-adjoint at rho = {rho}, {p}: defect {asym:e}"
                )));
            }
            let lowest = linalg::symmetric_eigenvalues(&form, n)[0];
            if !(lowest > POSITIVITY_FLOOR) {
                return Err(GeomError::Positivity {
                    point: AlphaFamily::args(rho, p.coords()),
                    eigenvalue: lowest,
                });
            }
        }
        Ok(())
    }
}

/// Matrix of `(V, W) ↦ g(A V, W)`, i.e. `Aᵀ g`.
fn bilinear(g: &[f64], a: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = (0..n).map(|k| a[k * n + i] * g[k * n + j]).sum();
        }
    }
    out
}

/// The ambient manifold together with its metric.
#[derive(Debug, Clone)]
pub struct AmbientSpace {
    base: MetricField,
    alpha: AlphaFamily,
    chart: Arc<Chart>,
    metric: MetricField,
}

fn shifted(e: &Expr, shift: usize, names: &[String]) -> Expr {
    e.remap(&|i| (i + shift, names[i + shift].clone()))
}

fn is_one(e: &Expr) -> bool {
    e.max_var().is_none() && e.eval(&[]).is_ok_and(|v| v == 1.0)
}

fn product(a: &Expr, b: &Expr) -> Option<Expr> {
    if a.is_zero() || b.is_zero() {
        None
    } else if is_one(a) {
        Some(b.clone())
    } else if is_one(b) {
        Some(a.clone())
    } else {
        Some(a * b)
    }
}

pub fn build_ambient(g: &MetricField, alpha: &AlphaFamily) -> Result<AmbientSpace> {
    let base_chart = g.chart();
    if alpha.chart().name() != base_chart.name() || alpha.dim() != g.dim() {
        return Err(GeomError::InvalidAlpha(
            "alpha is defined on a different chart".into(),
        ));
    }
    if base_chart
        .coordinates()
        .iter()
        .any(|c| c == "t" || c == "rho")
    {
        return Err(GeomError::InvalidChart(
            "base coordinates may not be named `t` or `rho`".into(),
        ));
    }
    let n = g.dim();
    let mut names = vec!["t".to_string(), "rho".to_string()];
    names.extend(base_chart.coordinates().iter().cloned());
    let mut bounds = vec![
        Interval::new(0.0, f64::INFINITY),
        Interval::new(-alpha.epsilon(), alpha.epsilon()),
    ];
    bounds.extend_from_slice(base_chart.bounds());
    let chart = Chart::new(&format!("{}~ambient", base_chart.name()), &names, bounds)?
        .with_constants(base_chart.constants().clone())?;

    let t = Expr::var(0, "t");
    let rho = Expr::var(1, "rho");
    let zero = Expr::constant(0.0);
    let al: Vec<Expr> = alpha
        .components()
        .iter()
        .map(|e| shifted(e, 1, &names))
        .collect();
    let gb: Vec<Expr> = g
        .components()
        .components()
        .iter()
        .map(|e| shifted(e, 2, &names))
        .collect();
    let t2 = t.powi(2);
    let m = n + 2;
    let mut comps = vec![zero.clone(); m * m];
    comps[0] = &Expr::constant(2.0) * &rho;
    comps[1] = t.clone();
    comps[m] = t.clone();
    for i in 0..n {
        for j in i..n {
            let terms: Vec<Expr> = (0..n)
                .filter_map(|k| product(&al[k * n + i], &gb[k * n + j]))
                .collect();
            let e = match terms.split_first() {
                None => zero.clone(),
                Some((first, rest)) => {
                    let sum = rest.iter().fold(first.clone(), |acc, x| &acc + x);
                    &t2 * &sum
                }
            };
            comps[(i + 2) * m + j + 2] = e.clone();
            comps[(j + 2) * m + i + 2] = e;
        }
    }
    let metric = MetricField::new(
        TensorField::new(&chart, 0, 2, comps)?,
        Signature::Lorentzian,
    )?;
    let space = AmbientSpace {
        base: g.clone(),
        alpha: alpha.clone(),
        chart,
        metric,
    };

    let mut sampler = Sampler::new(DEFAULT_SEED);
    for p in space.sample_band(&mut sampler, 50)? {
        let v = space.metric.values(&p)?;
        let (tv, rv) = (p.coords()[0], p.coords()[1]);
        if (v[0] - 2.0 * rv).abs() > 1e-14 * (1.0 + rv.abs()) || (v[1] - tv).abs() > 1e-14 * tv {
            return Err(GeomError::InvalidTensor(format!(
                "ambient metric does not expand d(rho t) correctly at {p}"
            )));
        }
        space.metric.check_signature(&p)?;
    }
    Ok(space)
}

impl AmbientSpace {
    pub fn base_metric(&self) -> &MetricField {
        &self.base
    }

    pub fn alpha(&self) -> &AlphaFamily {
        &self.alpha
    }

    pub fn base_chart(&self) -> &Arc<Chart> {
        self.base.chart()
    }

    pub fn product_chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn metric(&self) -> &MetricField {
        &self.metric
    }

    /// Dimension of the base `M`.
    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn epsilon(&self) -> f64 {
        self.alpha.epsilon()
    }

    pub fn point(&self, t: f64, rho: f64, x: &[f64]) -> Result<Point> {
        let mut c = vec![t, rho];
        c.extend_from_slice(x);
        Point::new(&self.chart, c)
    }

    /// Base point of an ambient point.
    pub fn base_point(&self, p: &Point) -> Result<Point> {
        p.check_chart(&self.chart)?;
        Point::new(self.base.chart(), p.coords()[2..].to_vec())
    }

    /// `(0, 0, v)`: the natural lift of a base vector.
    pub fn lift(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0, 0.0];
        out.extend_from_slice(v);
        out
    }

    pub fn sample_band(&self, sampler: &mut Sampler, count: usize) -> Result<Vec<Point>> {
        let band = Interval::new(-self.epsilon(), self.epsilon());
        (0..count)
            .map(|_| {
                let t = sampler.uniform(T_SAMPLE_RANGE.0, T_SAMPLE_RANGE.1);
                let rho = sampler.in_interval(&band);
                let x = sampler.point(self.base.chart())?;
                self.point(t, rho, x.coords())
            })
            .collect()
    }

    pub fn sample_slice(&self, sampler: &mut Sampler, count: usize) -> Result<Vec<Point>> {
        (0..count)
            .map(|_| {
                let t = sampler.uniform(T_SAMPLE_RANGE.0, T_SAMPLE_RANGE.1);
                let x = sampler.point(self.base.chart())?;
                self.point(t, 0.0, x.coords())
            })
            .collect()
    }

    fn require_slice(&self, p: &Point) -> Result<()> {
        p.check_chart(&self.chart)?;
        if p.coords()[1] != 0.0 {
            return Err(GeomError::OffSlice {
                coords: p.coords().to_vec(),
            });
        }
        Ok(())
    }

    /// `Z = t ∂t` at `p`.
    pub fn z_at(&self, p: &Point) -> Vec<f64> {
        let mut v = vec![0.0; self.dim() + 2];
        v[0] = p.coords()[0];
        v
    }

    /// `T = (1/t) ∂t − (1 + ρ/t²) ∂ρ`, with `g̃(T,T) = −2`.
    pub fn t_field_at(&self, p: &Point) -> Vec<f64> {
        let (t, rho) = (p.coords()[0], p.coords()[1]);
        let mut v = vec![0.0; self.dim() + 2];
        v[0] = 1.0 / t;
        v[1] = -(1.0 + rho / (t * t));
        v
    }

    /// `E = (1/t) ∂t + (1 − ρ/t²) ∂ρ`, with `g̃(E,E) = 2`.
    pub fn e_field_at(&self, p: &Point) -> Vec<f64> {
        let (t, rho) = (p.coords()[0], p.coords()[1]);
        let mut v = vec![0.0; self.dim() + 2];
        v[0] = 1.0 / t;
        v[1] = 1.0 - rho / (t * t);
        v
    }

    pub fn inner(&self, p: &Point, v: &[f64], w: &[f64]) -> Result<f64> {
        Ok(linalg::pair(&self.metric.values(p)?, v, w))
    }
}

/// `Z = t ∂t` as a vector field on the product chart.
pub fn fundamental_field(a: &AmbientSpace) -> TensorField {
    let m = a.dim() + 2;
    let mut comps = vec![Expr::constant(0.0); m];
    comps[0] = Expr::var(0, "t");
    TensorField::new(a.product_chart(), 1, 0, comps).expect("vector field has n + 2 components")
}

/// `ω = g̃(Z,·)` and `dω` (as the antisymmetric matrix `∂_a ω_b − ∂_b ω_a`).
pub fn omega_and_exterior_derivative(a: &AmbientSpace, p: &Point) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = a.dim() + 2;
    let g = a.metric().jets(p, 1)?;
    let t = Jet::variable(m, 1, 0, p.coords()[0]);
    let omega: Vec<Jet> = (0..m).map(|b| &g[b] * &t).collect();
    let mut d = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            d[i * m + j] = omega[j].d(i) - omega[i].d(j);
        }
    }
    Ok((omega.iter().map(Jet::value).collect(), d))
}

/// `‖𝓛_Z g̃ − 2 g̃‖∞` at `p`.
pub fn homothety_defect(a: &AmbientSpace, p: &Point) -> Result<f64> {
    let l = riemann::lie_derivative_metric(a.metric(), &fundamental_field(a), p)?;
    let g = a.metric().values(p)?;
    Ok(l.iter()
        .zip(&g)
        .fold(0.0f64, |m, (x, y)| m.max((x - 2.0 * y).abs())))
}

/// Gram matrix of the slice `ρ = 0` in the coordinates `(t, x…)` of `Q`.
pub fn slice_pullback(a: &AmbientSpace, p: &Point) -> Result<Vec<f64>> {
    a.require_slice(p)?;
    let m = a.dim() + 2;
    let g = a.metric().values(p)?;
    let q: Vec<usize> = std::iter::once(0).chain(2..m).collect();
    let k = q.len();
    let mut out = vec![0.0; k * k];
    for (i, &qi) in q.iter().enumerate() {
        for (j, &qj) in q.iter().enumerate() {
            out[i * k + j] = g[qi * m + qj];
        }
    }
    Ok(out)
}

/// `‖ι*g̃ − h‖∞` with `h` the tautological tensor `t² g(Tπ·, Tπ·)` on `Q`.
pub fn pullback_defect(a: &AmbientSpace, p: &Point) -> Result<f64> {
    let pull = slice_pullback(a, p)?;
    let n = a.dim();
    let k = n + 1;
    let t = p.coords()[0];
    let g = a.base_metric().values(&a.base_point(p)?)?;
    let mut expected = vec![0.0; k * k];
    for i in 0..n {
        for j in 0..n {
            expected[(i + 1) * k + j + 1] = t * t * g[i * n + j];
        }
    }
    Ok(linalg::max_abs_diff(&pull, &expected))
}

/// `max_j |ι*g̃(Z_Q, ∂_j)|`.
pub fn degeneracy_defect(a: &AmbientSpace, p: &Point) -> Result<f64> {
    let pull = slice_pullback(a, p)?;
    let k = a.dim() + 1;
    let t = p.coords()[0];
    Ok((0..k).fold(0.0f64, |m, j| m.max((t * pull[j]).abs())))
}

/// Rank and radical of the slice Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Radical {
    pub rank: usize,
    pub singular_values: Vec<f64>,
    /// Unit kernel vector in `(t, x…)` coordinates.
    pub kernel: Vec<f64>,
    /// `1 − |cos|` of the angle between the kernel and `∂t`.
    pub misalignment: f64,
}

pub fn slice_radical(a: &AmbientSpace, p: &Point) -> Result<Radical> {
    let pull = slice_pullback(a, p)?;
    let k = a.dim() + 1;
    let (sv, kernel) = linalg::singular_values_with_kernel(&pull, k);
    let rank = sv.iter().filter(|&&s| s > RANK_THRESHOLD).count();
    let norm = kernel.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(Radical {
        rank,
        misalignment: 1.0 - kernel[0].abs() / norm,
        singular_values: sv,
        kernel,
    })
}

/// Which closed-form covariant derivative to evaluate. Base vectors are
/// lifted and extended as coordinate-constant fields.
#[derive(Debug, Clone, PartialEq)]
pub enum ConnectionCase {
    /// `∇̃_{∂t} ∂t`
    TT,
    /// `∇̃_{∂ρ} ∂ρ`
    RhoRho,
    /// `∇̃_{∂t} ∂ρ`
    TRho,
    /// `∇̃_{∂t} V`
    TV(Vec<f64>),
    /// `∇̃_{∂ρ} V`
    RhoV(Vec<f64>),
    /// `∇̃_V W`, only along `ρ = 0`
    VW(Vec<f64>, Vec<f64>),
}

impl ConnectionCase {
    /// Direction and argument of the derivative as ambient vectors.
    pub fn operands(&self, a: &AmbientSpace) -> (Vec<f64>, Vec<f64>) {
        let m = a.dim() + 2;
        let e = |i: usize| {
            let mut v = vec![0.0; m];
            v[i] = 1.0;
            v
        };
        match self {
            ConnectionCase::TT => (e(0), e(0)),
            ConnectionCase::RhoRho => (e(1), e(1)),
            ConnectionCase::TRho => (e(0), e(1)),
            ConnectionCase::TV(v) => (e(0), a.lift(v)),
            ConnectionCase::RhoV(v) => (e(1), a.lift(v)),
            ConnectionCase::VW(v, w) => (a.lift(v), a.lift(w)),
        }
    }
}

pub fn closed_form_connection(
    a: &AmbientSpace,
    p: &Point,
    which: &ConnectionCase,
) -> Result<Vec<f64>> {
    p.check_chart(a.product_chart())?;
    let n = a.dim();
    let m = n + 2;
    let (t, rho) = (p.coords()[0], p.coords()[1]);
    let x = &p.coords()[2..];
    let mut out = vec![0.0; m];
    match which {
        ConnectionCase::TT | ConnectionCase::RhoRho => {}
        ConnectionCase::TRho => out[1] = 1.0 / t,
        ConnectionCase::TV(v) => {
            for i in 0..n {
                out[i + 2] = v[i] / t;
            }
        }
        ConnectionCase::RhoV(v) => {
            let al = a.alpha().values(rho, x)?;
            let dot = a.alpha().velocity_values(rho, x)?;
            let w = linalg::solve(&al, n, &linalg::mat_vec(&dot, v))?;
            for i in 0..n {
                out[i + 2] = 0.5 * w[i];
            }
        }
        ConnectionCase::VW(v, w) => {
            a.require_slice(p)?;
            let bp = a.base_point(p)?;
            let g = a.base_metric().values(&bp)?;
            let dot = a.alpha().velocity(&bp)?;
            let lc = a.base_metric().connection(&bp, 1)?;
            let t2 = t * t;
            out[0] = -(1.0 / (2.0 * t)) * t2 * linalg::pair(&g, &linalg::mat_vec(&dot, v), w);
            out[1] = -(1.0 / t2) * t2 * linalg::pair(&g, v, w);
            for (i, c) in lc.covariant(v, w).into_iter().enumerate() {
                out[i + 2] = c;
            }
        }
    }
    Ok(out)
}

/// `Γ̃^a_{bc} X^b Y^c`.
pub fn numeric_connection(a: &AmbientSpace, p: &Point, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    Ok(a.metric().connection(p, 1)?.covariant(x, y))
}

/// Numeric ambient Ricci tensor at `p`, `(n+2) × (n+2)`.
pub fn ambient_ricci(a: &AmbientSpace, p: &Point) -> Result<Vec<f64>> {
    riemann::ricci(a.metric(), p)
}

/// `Ric^g(V,W) − (tr α̇(0)/2) g(V,W) − ((n−2)/2) g(α̇(0)V, W)` along `Q`.
pub fn ricci_along_q(a: &AmbientSpace, p: &Point, v: &[f64], w: &[f64]) -> Result<f64> {
    a.require_slice(p)?;
    let n = a.dim();
    let bp = a.base_point(p)?;
    let g = a.base_metric().values(&bp)?;
    let ric = riemann::ricci(a.base_metric(), &bp)?;
    let dot = a.alpha().velocity(&bp)?;
    let tr: f64 = (0..n).map(|i| dot[i * n + i]).sum();
    Ok(linalg::pair(&ric, v, w)
        - 0.5 * tr * linalg::pair(&g, v, w)
        - 0.5 * (n as f64 - 2.0) * linalg::pair(&g, &linalg::mat_vec(&dot, v), w))
}

/// `g̃(R̃(∂t,V)W, ∂ρ) + g̃(R̃(∂ρ,V)W, ∂t)` for lifted `V`, `W`.
pub fn mixed_curvature_defect(a: &AmbientSpace, p: &Point, v: &[f64], w: &[f64]) -> Result<f64> {
    let m = a.dim() + 2;
    let curv = riemann::riemann(a.metric(), p)?;
    let g = a.metric().values(p)?;
    let (lv, lw) = (a.lift(v), a.lift(w));
    let e = |i: usize| {
        let mut x = vec![0.0; m];
        x[i] = 1.0;
        x
    };
    let r1 = curv.apply(&e(0), &lv, &lw);
    let r2 = curv.apply(&e(1), &lv, &lw);
    Ok(linalg::pair(&g, &r1, &e(1)) + linalg::pair(&g, &r2, &e(0)))
}

/// Second fundamental form of the fiber `{(t,ρ)} × M` from the closed form.
pub fn fiber_second_fundamental_form(
    a: &AmbientSpace,
    p: &Point,
    v: &[f64],
    w: &[f64],
) -> Result<Vec<f64>> {
    p.check_chart(a.product_chart())?;
    let n = a.dim();
    let (t, rho) = (p.coords()[0], p.coords()[1]);
    let x = &p.coords()[2..];
    let gt = a.metric().values(p)?;
    let al = a.alpha().values(rho, x)?;
    let dot = a.alpha().velocity_values(rho, x)?;
    let s = a.lift(&linalg::solve(&al, n, &linalg::mat_vec(&dot, v))?);
    let (lv, lw) = (a.lift(v), a.lift(w));
    let gs = linalg::pair(&gt, &s, &lw);
    let gvw = linalg::pair(&gt, &lv, &lw);
    let mut out = vec![0.0; n + 2];
    out[0] = -gs / (2.0 * t);
    out[1] = -(gvw - rho * gs) / (t * t);
    Ok(out)
}

/// Normal part of `∇̃_V W` for the fiber, via `X^⊥ = ½g̃(X,E)E − ½g̃(X,T)T`.
pub fn fiber_second_fundamental_form_numeric(
    a: &AmbientSpace,
    p: &Point,
    v: &[f64],
    w: &[f64],
) -> Result<Vec<f64>> {
    let nabla = numeric_connection(a, p, &a.lift(v), &a.lift(w))?;
    let gt = a.metric().values(p)?;
    let (tf, ef) = (a.t_field_at(p), a.e_field_at(p));
    let ce = 0.5 * linalg::pair(&gt, &nabla, &ef);
    let ct = -0.5 * linalg::pair(&gt, &nabla, &tf);
    Ok(ef.iter().zip(&tf).map(|(e, t)| ce * e + ct * t).collect())
}

/// `max |II_F(∂_i,∂_j) − g̃_ij H_F|` with `H_F` the fiber mean curvature.
pub fn fiber_umbilicity_defect(a: &AmbientSpace, p: &Point) -> Result<f64> {
    let n = a.dim();
    let m = n + 2;
    let gt = a.metric().values(p)?;
    let gf: Vec<f64> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| gt[(i + 2) * m + j + 2])
        .collect();
    let gi = linalg::inverse(&gf, n)?;
    let e = |i: usize| {
        let mut x = vec![0.0; n];
        x[i] = 1.0;
        x
    };
    let mut ii = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            ii.push(fiber_second_fundamental_form_numeric(a, p, &e(i), &e(j))?);
        }
    }
    let mut h = vec![0.0; m];
    for i in 0..n {
        for j in 0..n {
            for c in 0..m {
                h[c] += gi[i * n + j] * ii[i * n + j][c] / n as f64;
            }
        }
    }
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            for c in 0..m {
                worst = worst.max((ii[i * n + j][c] - gf[i * n + j] * h[c]).abs());
            }
        }
    }
    Ok(worst)
}

/// `‖α⁻¹α̇ − (tr(α⁻¹α̇)/n) Id‖∞` at the band point `p`.
pub fn alpha_trace_free_part(a: &AmbientSpace, p: &Point) -> Result<f64> {
    let n = a.dim();
    let (rho, x) = (p.coords()[1], &p.coords()[2..]);
    let al = a.alpha().values(rho, x)?;
    let dot = a.alpha().velocity_values(rho, x)?;
    let s = linalg::mat_mul(&linalg::inverse(&al, n)?, &dot, n);
    let tr: f64 = (0..n).map(|i| s[i * n + i]).sum::<f64>() / n as f64;
    let scalar: Vec<f64> = linalg::identity(n).iter().map(|d| d * tr).collect();
    Ok(linalg::max_abs_diff(&s, &scalar))
}

/// The map `F(t, ρ, x) = ((1 − ρ/2) t, (1 + ρ/2) t X(x))` into Minkowski
/// space `ℝ^{1,n+1}`, where `X` is an isometric embedding of the base into
/// the unit sphere.
#[derive(Debug, Clone)]
pub struct MinkowskiMap {
    components: Vec<Expr>,
}

impl MinkowskiMap {
    /// `embedding` holds the `n + 1` components of `X` on the base chart.
    pub fn new(a: &AmbientSpace, embedding: &[Expr]) -> Result<MinkowskiMap> {
        let n = a.dim();
        if embedding.len() != n + 1 {
            return Err(GeomError::Dimension(format!(
                "sphere embedding needs {} components, got {}",
                n + 1,
                embedding.len()
            )));
        }
        let names = a.product_chart().coordinates().to_vec();
        let t = Expr::var(0, "t");
        let rho = Expr::var(1, "rho");
        let half = Expr::constant(0.5);
        let one = Expr::constant(1.0);
        let mut components = vec![&(&one - &(&half * &rho)) * &t];
        let outer = &(&one + &(&half * &rho)) * &t;
        for e in embedding {
            components.push(&outer * &shifted(e, 2, &names));
        }
        Ok(MinkowskiMap { components })
    }

    pub fn parse<S: AsRef<str>>(a: &AmbientSpace, embedding: &[S]) -> Result<MinkowskiMap> {
        let scope = a.base_chart().scope();
        let exprs = embedding
            .iter()
            .map(|s| Expr::parse(s.as_ref(), &scope))
            .collect::<Result<Vec<_>>>()?;
        MinkowskiMap::new(a, &exprs)
    }

    pub fn eval(&self, p: &Point) -> Result<Vec<f64>> {
        self.components.iter().map(|c| c.eval(p.coords())).collect()
    }

    /// `g_L(F, F)` with `g_L = diag(−1, 1, …, 1)`.
    pub fn lorentz_square(&self, p: &Point) -> Result<f64> {
        let f = self.eval(p)?;
        Ok(-f[0] * f[0] + f[1..].iter().map(|x| x * x).sum::<f64>())
    }

    /// Components of `F*(g_L)` on the product chart.
    pub fn pullback(&self, p: &Point) -> Result<Vec<f64>> {
        let vars = Jet::seed(p.coords(), 1);
        let jets = self
            .components
            .iter()
            .map(|c| c.eval_jet(&vars))
            .collect::<Result<Vec<_>>>()?;
        let m = p.dim();
        let mut out = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                out[i * m + j] = jets
                    .iter()
                    .enumerate()
                    .map(|(k, f)| if k == 0 { -1.0 } else { 1.0 } * f.d(i) * f.d(j))
                    .sum();
            }
        }
        Ok(out)
    }
}

/// `‖F*(g_L) − g̃‖∞` at `p`.
pub fn minkowski_cross_check(a: &AmbientSpace, f: &MinkowskiMap, p: &Point) -> Result<f64> {
    Ok(linalg::max_abs_diff(
        &f.pullback(p)?,
        &a.metric().values(p)?,
    ))
}

/// `|g_L(F, F)|` at a slice point.
pub fn cone_defect(a: &AmbientSpace, f: &MinkowskiMap, p: &Point) -> Result<f64> {
    a.require_slice(p)?;
    Ok(f.lorentz_square(p)?.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn flat() -> AmbientSpace {
        let c = Chart::euclidean("r2", &["x", "y"]).unwrap();
        let g = MetricField::flat(&c);
        build_ambient(&g, &AlphaFamily::identity(&g, 1.0).unwrap()).unwrap()
    }

    fn sphere() -> AmbientSpace {
        let c = Chart::new(
            "s2",
            &["th", "ph"],
            vec![Interval::new(0.0, PI), Interval::new(0.0, 2.0 * PI)],
        )
        .unwrap();
        let g =
            MetricField::parse(&c, &["1", "0", "0", "sin(th)^2"], Signature::Riemannian).unwrap();
        let al = AlphaFamily::parse(&g, &["(1+rho/2)^2", "0", "0", "(1+rho/2)^2"], 2.0).unwrap();
        build_ambient(&g, &al).unwrap()
    }

    #[test]
    fn flat_ambient_matrix() {
        let a = flat();
        let p = a.point(2.0, 0.3, &[0.1, -0.4]).unwrap();
        let v = a.metric().values(&p).unwrap();
        assert_eq!(
            v,
            vec![0.6, 2.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 4.0, 0.0, 0.0, 0.0, 0.0, 4.0]
        );
    }

    #[test]
    fn null_frame_of_b() {
        let a = sphere();
        for p in a.sample_band(&mut Sampler::new(3), 100).unwrap() {
            let (tf, ef) = (a.t_field_at(&p), a.e_field_at(&p));
            assert!((a.inner(&p, &tf, &tf).unwrap() + 2.0).abs() < 1e-12);
            assert!((a.inner(&p, &ef, &ef).unwrap() - 2.0).abs() < 1e-12);
            assert!(a.inner(&p, &tf, &ef).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn omega_is_closed() {
        let a = sphere();
        let p = a.point(1.0, 0.0, &[1.0, 1.0]).unwrap();
        let (w, d) = omega_and_exterior_derivative(&a, &p).unwrap();
        assert_eq!(w, vec![0.0, 1.0, 0.0, 0.0]);
        assert!(linalg::max_abs(&d) < 1e-12);
        let q = a.point(1.5, 0.7, &[1.0, 1.0]).unwrap();
        let (w, _) = omega_and_exterior_derivative(&a, &q).unwrap();
        assert!((w[0] - 2.0 * 1.5 * 0.7).abs() < 1e-14 && (w[1] - 2.25).abs() < 1e-14);
    }

    #[test]
    fn homothety_and_slice() {
        let a = sphere();
        let mut s = Sampler::new(11);
        for p in a.sample_band(&mut s, 20).unwrap() {
            assert!(homothety_defect(&a, &p).unwrap() < 1e-9);
        }
        for p in a.sample_slice(&mut s, 20).unwrap() {
            assert!(pullback_defect(&a, &p).unwrap() < 1e-10);
            assert!(degeneracy_defect(&a, &p).unwrap() < 1e-10);
            let r = slice_radical(&a, &p).unwrap();
            assert_eq!(r.rank, 2);
            assert!(r.misalignment < 1e-9);
        }
    }

    #[test]
    fn connection_cases() {
        let a = sphere();
        let p = a.point(2.0, 0.0, &[1.0, 2.0]).unwrap();
        assert_eq!(
            closed_form_connection(&a, &p, &ConnectionCase::TRho).unwrap()[1],
            0.5
        );
        let off = a.point(2.0, 0.1, &[1.0, 2.0]).unwrap();
        let vw = ConnectionCase::VW(vec![1.0, 0.0], vec![0.0, 1.0]);
        assert!(matches!(
            closed_form_connection(&a, &off, &vw),
            Err(GeomError::OffSlice { .. })
        ));
        let cases = [
            ConnectionCase::TT,
            ConnectionCase::RhoRho,
            ConnectionCase::TRho,
            ConnectionCase::TV(vec![0.3, -1.0]),
            ConnectionCase::RhoV(vec![0.3, -1.0]),
            ConnectionCase::VW(vec![0.3, -1.0], vec![1.2, 0.4]),
        ];
        for c in &cases {
            let (x, y) = c.operands(&a);
            let closed = closed_form_connection(&a, &p, c).unwrap();
            let numeric = numeric_connection(&a, &p, &x, &y).unwrap();
            assert!(linalg::max_abs_diff(&closed, &numeric) < 1e-12, "{c:?}");
        }
    }

    #[test]
    fn ricci_vanishes_for_warped_sphere() {
        let a = sphere();
        let p = a.point(1.3, 0.0, &[0.8, 2.0]).unwrap();
        let ric = ambient_ricci(&a, &p).unwrap();
        assert!(linalg::max_abs(&ric) < 1e-10, "{ric:?}");
        assert!(
            ricci_along_q(&a, &p, &[1.0, 0.5], &[0.2, 1.0])
                .unwrap()
                .abs()
                < 1e-12
        );
    }

    #[test]
    fn fiber_form_matches_projection() {
        let a = sphere();
        let p = a.point(1.0, 0.0, &[0.8, 2.0]).unwrap();
        let v = [1.0, 0.0];
        let closed = fiber_second_fundamental_form(&a, &p, &v, &v).unwrap();
        assert!((closed[0] + 0.5).abs() < 1e-14 && (closed[1] + 1.0).abs() < 1e-14);
        let q = a.point(1.7, -0.6, &[0.8, 2.0]).unwrap();
        let w = [0.3, 0.9];
        let diff = linalg::max_abs_diff(
            &fiber_second_fundamental_form(&a, &q, &v, &w).unwrap(),
            &fiber_second_fundamental_form_numeric(&a, &q, &v, &w).unwrap(),
        );
        assert!(diff < 1e-12);
        assert!(fiber_umbilicity_defect(&a, &q).unwrap() < 1e-10);
    }

    #[test]
    fn minkowski_pullback() {
        let a = sphere();
        let f =
            MinkowskiMap::parse(&a, &["sin(th)*cos(ph)", "sin(th)*sin(ph)", "cos(th)"]).unwrap();
        let p = a.point(1.0, 0.0, &[1.0, 2.0]).unwrap();
        assert!(minkowski_cross_check(&a, &f, &p).unwrap() < 1e-12);
        assert!(cone_defect(&a, &f, &p).unwrap() < 1e-12);
        let q = a.point(3.0, 1.5, &[0.4, 5.0]).unwrap();
        assert!(minkowski_cross_check(&a, &f, &q).unwrap() < 1e-12);
    }

    #[test]
    fn invalid_alpha_rejected() {
        let c = Chart::euclidean("r2", &["x", "y"]).unwrap();
        let g = MetricField::flat(&c);
        assert!(matches!(
            AlphaFamily::parse(&g, &["2", "0", "0", "1"], 1.0),
            Err(GeomError::InvalidAlpha(_))
        ));
        assert!(matches!(
            AlphaFamily::parse(&g, &["1", "rho", "0", "1"], 1.0),
            Err(GeomError::InvalidAlpha(_))
        ));
        assert!(matches!(
            AlphaFamily::parse(&g, &["1-rho", "0", "0", "1"], 2.0),
            Err(GeomError::Positivity { .. })
        ));
        assert!(AlphaFamily::identity(&g, 0.0).is_err());
    }
}

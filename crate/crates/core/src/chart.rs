//! Coordinate charts, points and fields defined by expressions.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{GeomError, Result};
use crate::expr::{Expr, Scope};
use crate::jet::Jet;

/// Open interval `(lo, hi)`; either endpoint may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn unbounded() -> Self {
        Interval {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    name: String,
    coordinates: Vec<String>,
    bounds: Vec<Interval>,
    constants: BTreeMap<String, f64>,
}

impl Chart {
    pub fn new<S: AsRef<str>>(
        name: &str,
        coordinates: &[S],
        bounds: Vec<Interval>,
    ) -> Result<Arc<Chart>> {
        let coordinates: Vec<String> = coordinates.iter().map(|s| s.as_ref().to_string()).collect();
        if coordinates.is_empty() {
            return Err(GeomError::InvalidChart(
                "a chart needs at least one coordinate".into(),
            ));
        }
        if coordinates.len() != bounds.len() {
            return Err(GeomError::InvalidChart(format!(
                "{} coordinates but {} bounds",
                coordinates.len(),
                bounds.len()
            )));
        }
        for (i, c) in coordinates.iter().enumerate() {
            if c.is_empty() || !c.chars().all(|ch| ch.is_alphanumeric() || ch == '_') {
                return Err(GeomError::InvalidChart(format!(
                    "`{c}` is not an identifier"
                )));
            }
            if coordinates[..i].contains(c) {
                return Err(GeomError::InvalidChart(format!(
                    "duplicate coordinate `{c}`"
                )));
            }
        }
        for (c, b) in coordinates.iter().zip(&bounds) {
            if b.lo.is_nan() || b.hi.is_nan() || b.lo >= b.hi {
                return Err(GeomError::InvalidChart(format!("empty interval for `{c}`")));
            }
        }
        Ok(Arc::new(Chart {
            name: name.to_string(),
            coordinates,
            bounds,
            constants: BTreeMap::new(),
        }))
    }

    /// Unbounded chart `R^n`.
    pub fn euclidean<S: AsRef<str>>(name: &str, coordinates: &[S]) -> Result<Arc<Chart>> {
        Chart::new(
            name,
            coordinates,
            vec![Interval::unbounded(); coordinates.len()],
        )
    }

    /// Adds named constants visible to expressions parsed on this chart.
    pub fn with_constants(self: Arc<Self>, constants: BTreeMap<String, f64>) -> Result<Arc<Chart>> {
        let mut c = (*self).clone();
        for name in constants.keys() {
            if c.coordinates.contains(name) {
                return Err(GeomError::InvalidChart(format!(
                    "constant `{name}` shadows a coordinate"
                )));
            }
        }
        c.constants.extend(constants);
        Ok(Arc::new(c))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.coordinates.len()
    }

    pub fn coordinates(&self) -> &[String] {
        &self.coordinates
    }

    pub fn bounds(&self) -> &[Interval] {
        &self.bounds
    }

    pub fn constants(&self) -> &BTreeMap<String, f64> {
        &self.constants
    }

    pub fn contains(&self, coords: &[f64]) -> bool {
        coords.len() == self.dim() && coords.iter().zip(&self.bounds).all(|(&x, b)| b.contains(x))
    }

    /// Parser scope: the coordinates plus declared constants.
    pub fn scope(&self) -> Scope {
        Scope::new(&self.coordinates).with_constants(&self.constants)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    chart: Arc<Chart>,
    coords: Vec<f64>,
}

impl Point {
    pub fn new(chart: &Arc<Chart>, coords: Vec<f64>) -> Result<Point> {
        if !chart.contains(&coords) {
            return Err(GeomError::OutOfBounds {
                chart: chart.name().to_string(),
                coords,
            });
        }
        Ok(Point {
            chart: chart.clone(),
            coords,
        })
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn check_chart(&self, chart: &Chart) -> Result<()> {
        if self.chart.dim() != chart.dim() || self.chart.name() != chart.name() {
            return Err(GeomError::Dimension(format!(
                "point on chart `{}` used with a field on chart `{}`",
                self.chart.name(),
                chart.name()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    chart: Arc<Chart>,
    body: Expr,
}

impl ScalarField {
    /// Wraps an expression whose variables index the chart coordinates.
    pub fn new(chart: &Arc<Chart>, body: Expr) -> Result<ScalarField> {
        if body.max_var().is_some_and(|m| m >= chart.dim()) {
            return Err(GeomError::Dimension(format!(
                "expression `{body}` references a variable outside chart `{}`",
                chart.name()
            )));
        }
        Ok(ScalarField {
            chart: chart.clone(),
            body,
        })
    }

    pub fn constant(chart: &Arc<Chart>, v: f64) -> ScalarField {
        ScalarField {
            chart: chart.clone(),
            body: Expr::constant(v),
        }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn body(&self) -> &Expr {
        &self.body
    }

    pub fn eval(&self, p: &Point) -> Result<f64> {
        p.check_chart(&self.chart)?;
        self.body.eval(p.coords())
    }

    pub fn jet(&self, p: &Point, order: u8) -> Result<Jet> {
        eval_jet(self, p, order)
    }

    pub fn add(&self, other: &ScalarField) -> ScalarField {
        ScalarField {
            chart: self.chart.clone(),
            body: &self.body + &other.body,
        }
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.body)
    }
}

/// Tensor field of type `(r, s)` with `n^(r+s)` expression components stored
/// in row-major multi-index order, contravariant indices first.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    chart: Arc<Chart>,
    contravariant: usize,
    covariant: usize,
    components: Vec<Expr>,
}

impl TensorField {
    pub fn new(
        chart: &Arc<Chart>,
        contravariant: usize,
        covariant: usize,
        components: Vec<Expr>,
    ) -> Result<TensorField> {
        let expected = chart.dim().pow((contravariant + covariant) as u32);
        if components.len() != expected {
            return Err(GeomError::InvalidTensor(format!(
                "type ({contravariant},{covariant}) on a {}-dimensional chart needs {expected} components, got {}",
                chart.dim(),
                components.len()
            )));
        }
        for c in &components {
            if c.max_var().is_some_and(|m| m >= chart.dim()) {
                return Err(GeomError::InvalidTensor(format!(
                    "component `{c}` references a variable outside the chart"
                )));
            }
        }
        Ok(TensorField {
            chart: chart.clone(),
            contravariant,
            covariant,
            components,
        })
    }

    /// Parses every component on the chart's scope.
    pub fn parse<S: AsRef<str>>(
        chart: &Arc<Chart>,
        contravariant: usize,
        covariant: usize,
        sources: &[S],
    ) -> Result<TensorField> {
        let scope = chart.scope();
        let components = sources
            .iter()
            .map(|s| Expr::parse(s.as_ref(), &scope))
            .collect::<Result<Vec<_>>>()?;
        TensorField::new(chart, contravariant, covariant, components)
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn rank(&self) -> (usize, usize) {
        (self.contravariant, self.covariant)
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn values(&self, p: &Point) -> Result<Vec<f64>> {
        p.check_chart(&self.chart)?;
        self.components.iter().map(|c| c.eval(p.coords())).collect()
    }

    pub fn jets(&self, p: &Point, order: u8) -> Result<Vec<Jet>> {
        p.check_chart(&self.chart)?;
        let vars = Jet::seed(p.coords(), order);
        self.components.iter().map(|c| c.eval_jet(&vars)).collect()
    }
}

pub fn parse_expression(src: &str, chart: &Arc<Chart>) -> Result<ScalarField> {
    let body = Expr::parse(src, &chart.scope())?;
    Ok(ScalarField {
        chart: chart.clone(),
        body,
    })
}

/// Exact value and partial derivatives of `f` at `p` up to `order`.
pub fn eval_jet(f: &ScalarField, p: &Point, order: u8) -> Result<Jet> {
    if !(1..=3).contains(&order) {
        return Err(GeomError::Dimension(format!(
            "jet order must be 1, 2 or 3, got {order}"
        )));
    }
    p.check_chart(&f.chart)?;
    f.body.eval_jet(&Jet::seed(p.coords(), order))
}

/// Central-difference approximation of the jet of `f` at `p`. Only meant as
/// an independent oracle for [`eval_jet`].
pub fn finite_difference_jet(f: &ScalarField, p: &Point, order: u8, h: f64) -> Result<Jet> {
    if !(1..=2).contains(&order) {
        return Err(GeomError::Dimension(format!(
            "finite-difference order must be 1 or 2, got {order}"
        )));
    }
    p.check_chart(&f.chart)?;
    let radius = order as f64 * h;
    let x = p.coords();
    let n = x.len();
    let inside = f
        .chart
        .bounds()
        .iter()
        .zip(x)
        .all(|(b, &xi)| xi - radius > b.lo && xi + radius < b.hi);
    if !inside {
        return Err(GeomError::StencilOutsideBounds {
            coords: x.to_vec(),
            radius,
        });
    }
    let at = |offsets: &[(usize, f64)]| -> Result<f64> {
        let mut y = x.to_vec();
        for &(i, d) in offsets {
            y[i] += d;
        }
        f.body.eval(&y)
    };
    let f0 = at(&[])?;
    let mut first = vec![0.0; n];
    for i in 0..n {
        first[i] = (at(&[(i, h)])? - at(&[(i, -h)])?) / (2.0 * h);
    }
    let mut second = Vec::new();
    if order == 2 {
        second = vec![0.0; n * n];
        for i in 0..n {
            second[i * n + i] = (at(&[(i, h)])? - 2.0 * f0 + at(&[(i, -h)])?) / (h * h);
            for j in (i + 1)..n {
                let v =
                    (at(&[(i, h), (j, h)])? - at(&[(i, h), (j, -h)])? - at(&[(i, -h), (j, h)])?
                        + at(&[(i, -h), (j, -h)])?)
                        / (4.0 * h * h);
                second[i * n + j] = v;
                second[j * n + i] = v;
            }
        }
    }
    Ok(Jet::from_parts(n, order, f0, first, second, Vec::new()))
}

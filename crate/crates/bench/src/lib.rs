//! Fixtures shared by the benchmarks: the round sphere with its flat-cone
//! family, the round 3-sphere, and a non-flat Möbius structure on the plane.

use std::sync::Arc;

use ambient_core::{
    build_ambient, AlphaFamily, AmbientSpace, Chart, Interval, MetricField, Point, Result,
    ScalarField, Signature,
};

pub fn sphere_ambient() -> Result<AmbientSpace> {
    let c = Chart::new(
        "s2",
        &["th", "ph"],
        vec![
            Interval::new(0.0, std::f64::consts::PI),
            Interval::new(0.0, 2.0 * std::f64::consts::PI),
        ],
    )?;
    let g = MetricField::parse(&c, &["1", "0", "0", "sin(th)^2"], Signature::Riemannian)?;
    let alpha = AlphaFamily::parse(&g, &["(1 + rho/2)^2", "0", "0", "(1 + rho/2)^2"], 2.0)?;
    build_ambient(&g, &alpha)
}

pub fn three_sphere_ambient() -> Result<AmbientSpace> {
    let pi = std::f64::consts::PI;
    let c = Chart::new(
        "s3",
        &["a", "b", "c"],
        vec![
            Interval::new(0.0, pi),
            Interval::new(0.0, pi),
            Interval::new(0.0, 2.0 * pi),
        ],
    )?;
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
    )?;
    let f = "(1 + rho/2)^2";
    let alpha = AlphaFamily::parse(&g, &[f, "0", "0", "0", f, "0", "0", "0", f], 2.0)?;
    build_ambient(&g, &alpha)
}

pub fn nonflat_moebius_ambient() -> Result<AmbientSpace> {
    let c = Chart::new(
        "plane",
        &["x", "y"],
        vec![Interval::new(-2.0, 2.0), Interval::new(-2.0, 2.0)],
    )?;
    let g = MetricField::flat(&c);
    let a = "0.3*sin(x + 2*y)";
    let b = "0.2*cos(x*y)";
    let comps = [
        format!("1 + rho*{a}"),
        format!("rho*{b}"),
        format!("rho*{b}"),
        format!("1 - rho*{a}"),
    ];
    let alpha = AlphaFamily::parse(&g, &comps, 1.5)?;
    build_ambient(&g, &alpha)
}

/// A point on the `ρ = 0` slice above `x`.
pub fn slice_point(a: &AmbientSpace, x: &[f64]) -> Result<Point> {
    a.point(1.3, 0.0, x)
}

pub fn scale(chart: &Arc<Chart>, src: &str) -> Result<ScalarField> {
    ambient_core::parse_expression(src, chart)
}

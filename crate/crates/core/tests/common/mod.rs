#![allow(dead_code)]

use ambient_core::{
    build_ambient, AlphaFamily, AmbientSpace, Chart, Interval, MetricField, Signature,
};
use std::f64::consts::PI;
use std::sync::Arc;

pub fn sphere_chart() -> Arc<Chart> {
    Chart::new(
        "s2",
        &["th", "ph"],
        vec![Interval::new(0.0, PI), Interval::new(0.0, 2.0 * PI)],
    )
    .unwrap()
}

pub fn sphere_metric() -> MetricField {
    MetricField::parse(
        &sphere_chart(),
        &["1", "0", "0", "sin(th)^2"],
        Signature::Riemannian,
    )
    .unwrap()
}

pub fn three_sphere_metric() -> MetricField {
    let c = Chart::new(
        "s3",
        &["a", "b", "c"],
        vec![
            Interval::new(0.0, PI),
            Interval::new(0.0, PI),
            Interval::new(0.0, 2.0 * PI),
        ],
    )
    .unwrap();
    MetricField::parse(
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
    .unwrap()
}

pub fn plane_metric() -> MetricField {
    let c = Chart::new("plane", &["x", "y"], vec![Interval::new(-2.0, 2.0); 2]).unwrap();
    MetricField::flat(&c)
}

pub fn warped(g: &MetricField, k: &str, epsilon: f64) -> AlphaFamily {
    let n = g.dim();
    let f = format!("(1 + {k}*rho/2)^2");
    let comps: Vec<String> = (0..n * n)
        .map(|i| {
            if i / n == i % n {
                f.clone()
            } else {
                "0".into()
            }
        })
        .collect();
    AlphaFamily::parse(g, &comps, epsilon).unwrap()
}

pub fn sphere_ambient() -> AmbientSpace {
    let g = sphere_metric();
    build_ambient(&g, &warped(&g, "1", 2.0)).unwrap()
}

pub fn three_sphere_ambient() -> AmbientSpace {
    let g = three_sphere_metric();
    build_ambient(&g, &warped(&g, "1", 2.0)).unwrap()
}

/// Flat plane with a trace-free, non-parallel first-order term in alpha.
pub fn nonflat_moebius_ambient() -> AmbientSpace {
    let g = plane_metric();
    let a = "0.3*sin(x + 2*y)";
    let b = "0.2*cos(x*y)";
    let comps = [
        format!("1 + rho*{a}"),
        format!("rho*{b}"),
        format!("rho*{b}"),
        format!("1 - rho*{a}"),
    ];
    build_ambient(&g, &AlphaFamily::parse(&g, &comps, 1.5).unwrap()).unwrap()
}

pub const SCALES_2D_SPHERE: [&str; 3] = [
    "0.3*sin(th)*cos(ph)",
    "0.2*cos(th) - 0.1*sin(th)^2*sin(2*ph)",
    "log(1.2 + 0.5*cos(th))",
];
pub const SCALES_PLANE: [&str; 3] = ["0.4*x - 0.2*y", "0.3*sin(x)*cos(y)", "0.1*(x^2 + y^2)"];
pub const SCALES_S3: [&str; 3] = [
    "0.3*cos(a)",
    "0.2*sin(a)*cos(b)",
    "0.1*sin(a)*sin(b)*sin(c)",
];

use ambient_bench::{
    nonflat_moebius_ambient, scale, slice_point, sphere_ambient, three_sphere_ambient,
};
use ambient_core::{ambient::ambient_ricci, eval_jet, immerse, moebius_from_alpha, riemann, Point};
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn jets(c: &mut Criterion) {
    let a = sphere_ambient().unwrap();
    let f = scale(
        a.base_chart(),
        "log(1.2 + 0.5*cos(th)) * sin(th)^2 * exp(0.3*sin(ph))",
    )
    .unwrap();
    let p = Point::new(a.base_chart(), vec![1.1, 2.3]).unwrap();
    let mut g = c.benchmark_group("jet");
    for order in 1..=3u8 {
        g.bench_function(format!("order_{order}"), |b| {
            b.iter(|| eval_jet(&f, black_box(&p), order).unwrap())
        });
    }
    g.finish();
}

fn curvature(c: &mut Criterion) {
    let s3 = three_sphere_ambient().unwrap();
    let p = Point::new(s3.base_chart(), vec![1.0, 1.2, 2.0]).unwrap();
    c.bench_function("riemann/s3_base", |b| {
        b.iter(|| riemann(s3.base_metric(), black_box(&p)).unwrap())
    });
    let q = slice_point(&s3, &[1.0, 1.2, 2.0]).unwrap();
    c.bench_function("riemann/s3_ambient_ricci", |b| {
        b.iter(|| ambient_ricci(&s3, black_box(&q)).unwrap())
    });
}

fn immersion(c: &mut Criterion) {
    let a = sphere_ambient().unwrap();
    let u = scale(a.base_chart(), "0.3*sin(th)*cos(ph)").unwrap();
    let im = immerse(&a, &u).unwrap();
    let x = Point::new(a.base_chart(), vec![1.1, 2.3]).unwrap();
    c.bench_function("immersion/point", |b| {
        b.iter(|| im.at(black_box(&x)).unwrap())
    });
    c.bench_function("immersion/mean_curvature", |b| {
        b.iter(|| im.mean_curvature(black_box(&x)).unwrap())
    });

    let n = nonflat_moebius_ambient().unwrap();
    let m = moebius_from_alpha(n.base_metric(), n.alpha()).unwrap();
    let un = scale(n.base_chart(), "0.3*sin(x)*cos(y)").unwrap();
    let imn = immerse(&n, &un).unwrap();
    let xn = Point::new(n.base_chart(), vec![0.4, -0.7]).unwrap();
    let (e1, e2) = ([1.0, 0.0], [0.0, 1.0]);
    c.bench_function("immersion/codazzi_cotton", |b| {
        b.iter(|| {
            imn.codazzi_cotton_defect(black_box(&xn), &m, &e1, &e2, &e1)
                .unwrap()
        })
    });
    c.bench_function("immersion/codazzi_derivative", |b| {
        b.iter(|| {
            imn.codazzi_derivative_defect(black_box(&xn), &m, &e1, &e2, &e1)
                .unwrap()
        })
    });
}

fn quadrature(c: &mut Criterion) {
    let a = sphere_ambient().unwrap();
    let u = scale(a.base_chart(), "0").unwrap();
    let im = immerse(&a, &u).unwrap();
    let mut g = c.benchmark_group("quadrature");
    g.sample_size(10);
    g.bench_function("gauss_bonnet_50", |b| {
        b.iter(|| {
            im.total_mean_curvature(
                [1e-3, 0.0],
                [std::f64::consts::PI - 1e-3, 2.0 * std::f64::consts::PI],
                50,
            )
            .unwrap()
        })
    });
    g.finish();
}

criterion_group!(benches, jets, curvature, immersion, quadrature);
criterion_main!(benches);

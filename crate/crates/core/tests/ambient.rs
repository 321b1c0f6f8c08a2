mod common;

use ambient_core::ambient::{
    alpha_trace_free_part, ambient_ricci, closed_form_connection, degeneracy_defect,
    fiber_second_fundamental_form, fiber_second_fundamental_form_numeric, fiber_umbilicity_defect,
    fundamental_field, homothety_defect, mixed_curvature_defect, numeric_connection,
    omega_and_exterior_derivative, pullback_defect, ricci_along_q, slice_radical,
};
use ambient_core::linalg::{max_abs, max_abs_diff};
use ambient_core::sampling::Sampler;
use ambient_core::{build_ambient, AlphaFamily, AmbientSpace, ConnectionCase, GeomError};
use common::*;

fn corpus() -> Vec<(&'static str, AmbientSpace)> {
    vec![
        ("sphere", sphere_ambient()),
        ("s3", three_sphere_ambient()),
        ("nonflat", nonflat_moebius_ambient()),
    ]
}

#[test]
fn homothety_and_pullback_axioms() {
    for (name, a) in corpus() {
        let mut s = Sampler::new(10);
        for p in a.sample_band(&mut s, 50).unwrap() {
            assert!(homothety_defect(&a, &p).unwrap() <= 1e-9, "{name} {p}");
            let (w, d) = omega_and_exterior_derivative(&a, &p).unwrap();
            let (t, rho) = (p.coords()[0], p.coords()[1]);
            assert!((w[0] - 2.0 * t * rho).abs() < 1e-12 && (w[1] - t * t).abs() < 1e-12);
            assert!(max_abs(&w[2..]) == 0.0);
            assert!(max_abs(&d) <= 1e-10);
        }
        for p in a.sample_slice(&mut s, 50).unwrap() {
            assert!(pullback_defect(&a, &p).unwrap() <= 1e-10, "{name}");
            assert!(degeneracy_defect(&a, &p).unwrap() <= 1e-10, "{name}");
            let r = slice_radical(&a, &p).unwrap();
            assert_eq!(r.rank, a.dim(), "{name}");
            assert!(r.misalignment < 1e-9);
        }
    }
}

#[test]
fn fundamental_field_components() {
    let a = sphere_ambient();
    let z = fundamental_field(&a);
    let p = a.point(2.0, 0.0, &[1.0, 1.0]).unwrap();
    assert_eq!(z.values(&p).unwrap(), vec![2.0, 0.0, 0.0, 0.0]);
}

#[test]
fn closed_form_connection_matches_christoffels() {
    for (name, a) in corpus() {
        let n = a.dim();
        let mut s = Sampler::new(11);
        let band = a.sample_band(&mut s, 40).unwrap();
        let slice = a.sample_slice(&mut s, 40).unwrap();
        for (p, q) in band.iter().zip(&slice) {
            let v = s.normal_vector(n);
            let w = s.normal_vector(n);
            let cases = [
                ConnectionCase::TT,
                ConnectionCase::RhoRho,
                ConnectionCase::TRho,
                ConnectionCase::TV(v.clone()),
                ConnectionCase::RhoV(v.clone()),
            ];
            for c in &cases {
                let (x, y) = c.operands(&a);
                let d = max_abs_diff(
                    &closed_form_connection(&a, p, c).unwrap(),
                    &numeric_connection(&a, p, &x, &y).unwrap(),
                );
                assert!(d <= 1e-8, "{name} {c:?} {d}");
            }
            let vw = ConnectionCase::VW(v, w);
            let (x, y) = vw.operands(&a);
            let d = max_abs_diff(
                &closed_form_connection(&a, q, &vw).unwrap(),
                &numeric_connection(&a, q, &x, &y).unwrap(),
            );
            assert!(d <= 1e-8, "{name} VW {d}");
            assert!(
                matches!(
                    closed_form_connection(&a, p, &vw),
                    Err(GeomError::OffSlice { .. })
                ) || p.coords()[1] == 0.0
            );
        }
    }
}

#[test]
fn ricci_along_slice() {
    for (name, a) in corpus() {
        let n = a.dim();
        let m = n + 2;
        let mut s = Sampler::new(12);
        for p in a.sample_slice(&mut s, 20).unwrap() {
            let ric = ambient_ricci(&a, &p).unwrap();
            let v = s.normal_vector(n);
            let w = s.normal_vector(n);
            let (lv, lw) = (a.lift(&v), a.lift(&w));
            let numeric: f64 = (0..m)
                .flat_map(|i| (0..m).map(move |j| (i, j)))
                .map(|(i, j)| ric[i * m + j] * lv[i] * lw[j])
                .sum();
            assert!(
                (numeric - ricci_along_q(&a, &p, &v, &w).unwrap()).abs() <= 1e-7,
                "{name}"
            );
            assert!(ric[0].abs() <= 1e-8);
            for v in &ric[2..m] {
                assert!(v.abs() <= 1e-8, "{name}");
            }
            assert!(
                mixed_curvature_defect(&a, &p, &v, &w).unwrap().abs() <= 1e-8,
                "{name}"
            );
            if name != "nonflat" {
                assert!(max_abs(&ric) <= 1e-7, "{name} {ric:?}");
            }
        }
    }
}

#[test]
fn violation_scenario_has_large_ricci() {
    let g = sphere_metric();
    let a = build_ambient(&g, &AlphaFamily::identity(&g, 1.0).unwrap()).unwrap();
    let worst = a
        .sample_slice(&mut Sampler::new(13), 50)
        .unwrap()
        .iter()
        .map(|p| max_abs(&ambient_ricci(&a, p).unwrap()))
        .fold(0.0f64, f64::max);
    assert!(worst >= 0.5, "{worst}");
}

#[test]
fn fiber_second_fundamental_form_and_umbilicity() {
    for (name, a) in corpus() {
        let n = a.dim();
        let mut s = Sampler::new(14);
        for p in a.sample_band(&mut s, 30).unwrap() {
            let v = s.normal_vector(n);
            let w = s.normal_vector(n);
            let d = max_abs_diff(
                &fiber_second_fundamental_form(&a, &p, &v, &w).unwrap(),
                &fiber_second_fundamental_form_numeric(&a, &p, &v, &w).unwrap(),
            );
            assert!(d <= 1e-7, "{name}");
            let pure = alpha_trace_free_part(&a, &p).unwrap() < 1e-12;
            let umbilic = fiber_umbilicity_defect(&a, &p).unwrap() < 1e-8;
            assert_eq!(pure, umbilic, "{name} {p}");
        }
    }
}

//! Dense helpers for the small (n <= 8) matrices that show up per point.
//! Matrices are row-major `Vec`s.

use crate::error::{GeomError, Result};
use crate::jet::Jet;

/// Pivots below this magnitude are treated as singular.
pub const PIVOT_THRESHOLD: f64 = 1e-12;

/// Ring operations needed by the elimination routines.
pub trait Scalar: Clone {
    fn val(&self) -> f64;
    fn like(&self, v: f64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
}

impl Scalar for f64 {
    fn val(&self) -> f64 {
        *self
    }
    fn like(&self, v: f64) -> Self {
        v
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
}

impl Scalar for Jet {
    fn val(&self) -> f64 {
        self.value()
    }
    fn like(&self, v: f64) -> Self {
        self.lift(v)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
}

/// Partial-pivot LU factorisation `P A = L U`.
pub struct Lu<S> {
    n: usize,
    lu: Vec<S>,
    perm: Vec<usize>,
}

impl<S: Scalar> Lu<S> {
    pub fn new(a: &[S], n: usize) -> Result<Self> {
        assert_eq!(a.len(), n * n);
        let mut lu = a.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (piv, mag) =
                (k..n)
                    .map(|r| (r, lu[r * n + k].val().abs()))
                    .fold(
                        (k, -1.0),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            if !(mag >= PIVOT_THRESHOLD) {
                return Err(GeomError::SingularMetric {
                    pivot: mag.max(0.0),
                });
            }
            if piv != k {
                for c in 0..n {
                    lu.swap(k * n + c, piv * n + c);
                }
                perm.swap(k, piv);
            }
            let pivot = lu[k * n + k].clone();
            for r in (k + 1)..n {
                let f = lu[r * n + k].div(&pivot);
                for c in (k + 1)..n {
                    let v = lu[r * n + c].sub(&f.mul(&lu[k * n + c]));
                    lu[r * n + c] = v;
                }
                lu[r * n + k] = f;
            }
        }
        Ok(Lu { n, lu, perm })
    }

    pub fn solve(&self, b: &[S]) -> Vec<S> {
        let n = self.n;
        let mut y: Vec<S> = self.perm.iter().map(|&p| b[p].clone()).collect();
        for r in 0..n {
            for c in 0..r {
                y[r] = y[r].sub(&self.lu[r * n + c].mul(&y[c]));
            }
        }
        for r in (0..n).rev() {
            for c in (r + 1)..n {
                y[r] = y[r].sub(&self.lu[r * n + c].mul(&y[c]));
            }
            y[r] = y[r].div(&self.lu[r * n + r]);
        }
        y
    }

    pub fn inverse(&self) -> Vec<S> {
        let n = self.n;
        let zero = self.lu[0].like(0.0);
        let mut inv = vec![zero.clone(); n * n];
        for c in 0..n {
            let mut e = vec![zero.clone(); n];
            e[c] = zero.like(1.0);
            let col = self.solve(&e);
            for r in 0..n {
                inv[r * n + c] = col[r].clone();
            }
        }
        inv
    }
}

pub fn inverse<S: Scalar>(a: &[S], n: usize) -> Result<Vec<S>> {
    Ok(Lu::new(a, n)?.inverse())
}

pub fn solve(a: &[f64], n: usize, b: &[f64]) -> Result<Vec<f64>> {
    Ok(Lu::new(a, n)?.solve(b))
}

pub fn mat_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

pub fn mat_vec(a: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| (0..n).map(|j| a[i * n + j] * v[j]).sum())
        .collect()
}

/// Bilinear pairing `v^T a w`.
pub fn pair(a: &[f64], v: &[f64], w: &[f64]) -> f64 {
    let n = v.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += v[i] * a[i * n + j] * w[j];
        }
    }
    s
}

pub fn transpose(a: &[f64], n: usize) -> Vec<f64> {
    let mut t = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            t[j * n + i] = a[i * n + j];
        }
    }
    t
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

pub fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    let m = nalgebra::DMatrix::from_row_slice(n, n, a);
    let sym = (&m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Singular values (descending) and the right singular vector of the
/// smallest one.
pub fn singular_values_with_kernel(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let m = nalgebra::DMatrix::from_row_slice(n, n, a);
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("requested right singular vectors");
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let (imin, _) =
        sv.iter().enumerate().fold(
            (0, f64::INFINITY),
            |b, (i, &s)| if s < b.1 { (i, s) } else { b },
        );
    let kernel: Vec<f64> = (0..n).map(|c| vt[(imin, c)]).collect();
    let mut sorted = sv;
    sorted.sort_by(|a, b| b.total_cmp(a));
    (sorted, kernel)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip() {
        let a = vec![0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0];
        let inv = inverse(&a, 3).unwrap();
        let id = mat_mul(&a, &inv, 3);
        assert!(max_abs_diff(&id, &identity(3)) < 1e-14);
    }

    #[test]
    fn singular_is_rejected() {
        let a = vec![1.0, 2.0, 2.0, 4.0];
        assert!(matches!(
            inverse(&a, 2),
            Err(GeomError::SingularMetric { .. })
        ));
    }

    #[test]
    fn jet_inverse_derivative() {
        // d/dx (1/(1+x^2)) at x = 0.5 via a 1x1 jet LU.
        let x = Jet::variable(1, 2, 0, 0.5);
        let a = vec![&(&x * &x) + 1.0];
        let inv = inverse(&a, 1).unwrap();
        let q: f64 = 1.0 / 1.25;
        assert!((inv[0].d(0) + 2.0 * 0.5 * q * q).abs() < 1e-15);
    }

    #[test]
    fn eigen_and_kernel() {
        let a = vec![0.0, 0.0, 0.0, 2.0];
        assert_eq!(symmetric_eigenvalues(&a, 2), vec![0.0, 2.0]);
        let (sv, k) = singular_values_with_kernel(&a, 2);
        assert!(sv[1].abs() < 1e-15);
        assert!((k[0].abs() - 1.0).abs() < 1e-15);
    }
}

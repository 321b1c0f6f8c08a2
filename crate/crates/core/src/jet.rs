//! Truncated multivariate Taylor jets up to order three.
//!
//! A [`Jet`] carries the value of a scalar function together with all of its
//! partial derivatives up to a fixed order at one point. Arithmetic on jets
//! applies the product and chain rules exactly, so derivatives of composed
//! expressions are correct to roundoff with no step-size tuning.
//!
//! Mixed partials are only ever computed for sorted index tuples and then
//! mirrored, which makes the second and third derivative arrays symmetric
//! bit-for-bit.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

/// Highest derivative order carried by a jet.
pub const MAX_ORDER: u8 = 3;

#[derive(Clone, PartialEq)]
pub struct Jet {
    dim: usize,
    order: u8,
    value: f64,
    first: Vec<f64>,
    second: Vec<f64>,
    third: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = f.debug_struct("Jet");
        s.field("dim", &self.dim)
            .field("order", &self.order)
            .field("value", &self.value);
        if self.order >= 1 {
            s.field("first", &self.first);
        }
        if self.order >= 2 {
            s.field("second", &self.second);
        }
        if self.order >= 3 {
            s.field("third", &self.third);
        }
        s.finish()
    }
}

fn sizes(dim: usize, order: u8) -> (usize, usize, usize) {
    (
        if order >= 1 { dim } else { 0 },
        if order >= 2 { dim * dim } else { 0 },
        if order >= 3 { dim * dim * dim } else { 0 },
    )
}

impl Jet {
    /// A jet of a constant function.
    pub fn constant(dim: usize, order: u8, value: f64) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        let (a, b, c) = sizes(dim, order);
        Jet {
            dim,
            order,
            value,
            first: vec![0.0; a],
            second: vec![0.0; b],
            third: vec![0.0; c],
        }
    }

    /// The jet of the coordinate function `x_index` at `value`.
    pub fn variable(dim: usize, order: u8, index: usize, value: f64) -> Self {
        assert!(index < dim);
        let mut j = Jet::constant(dim, order, value);
        if order >= 1 {
            j.first[index] = 1.0;
        }
        j
    }

    /// Coordinate jets for every variable at `point`.
    pub fn seed(point: &[f64], order: u8) -> Vec<Jet> {
        let dim = point.len();
        point
            .iter()
            .enumerate()
            .map(|(i, &v)| Jet::variable(dim, order, i, v))
            .collect()
    }

    /// Builds a jet from explicit derivative arrays. Panics if the arrays do
    /// not have the sizes implied by `dim` and `order`.
    pub fn from_parts(
        dim: usize,
        order: u8,
        value: f64,
        first: Vec<f64>,
        second: Vec<f64>,
        third: Vec<f64>,
    ) -> Self {
        let (a, b, c) = sizes(dim, order);
        assert!(
            first.len() == a && second.len() == b && third.len() == c,
            "jet part sizes do not match dim/order"
        );
        Jet {
            dim,
            order,
            value,
            first,
            second,
            third,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn first(&self) -> &[f64] {
        &self.first
    }

    pub fn second(&self) -> &[f64] {
        &self.second
    }

    pub fn third(&self) -> &[f64] {
        &self.third
    }

    pub fn d(&self, i: usize) -> f64 {
        self.first[i]
    }

    pub fn d2(&self, i: usize, j: usize) -> f64 {
        self.second[i * self.dim + j]
    }

    pub fn d3(&self, i: usize, j: usize, k: usize) -> f64 {
        self.third[(i * self.dim + j) * self.dim + k]
    }

    /// Same jet with derivatives above `order` dropped.
    pub fn truncated(&self, order: u8) -> Jet {
        if order >= self.order {
            return self.clone();
        }
        let (a, b, c) = sizes(self.dim, order);
        Jet {
            dim: self.dim,
            order,
            value: self.value,
            first: self.first[..a].to_vec(),
            second: self.second[..b].to_vec(),
            third: self.third[..c].to_vec(),
        }
    }

    /// A constant with the same shape as `self`.
    pub fn lift(&self, value: f64) -> Jet {
        Jet::constant(self.dim, self.order, value)
    }

    /// The jet of `∂f/∂x_k`, one order lower.
    pub fn partial(&self, k: usize) -> Jet {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let n = self.dim;
        let order = self.order - 1;
        let (a, b, _) = sizes(n, order);
        let mut first = vec![0.0; a];
        let mut second = vec![0.0; b];
        if order >= 1 {
            for i in 0..n {
                first[i] = self.second[k * n + i];
            }
        }
        if order >= 2 {
            for i in 0..n {
                for j in 0..n {
                    second[i * n + j] = self.third[(k * n + i) * n + j];
                }
            }
        }
        Jet {
            dim: n,
            order,
            value: self.first[k],
            first,
            second,
            third: Vec::new(),
        }
    }

    /// Re-expresses the jet in the subset of variables `vars` (all other
    /// variables are held fixed).
    pub fn restrict(&self, vars: &[usize]) -> Jet {
        let n = self.dim;
        let m = vars.len();
        let (a, b, c) = sizes(m, self.order);
        let mut out = Jet {
            dim: m,
            order: self.order,
            value: self.value,
            first: vec![0.0; a],
            second: vec![0.0; b],
            third: vec![0.0; c],
        };
        for (i, &vi) in vars.iter().enumerate() {
            if self.order >= 1 {
                out.first[i] = self.first[vi];
            }
            for (j, &vj) in vars.iter().enumerate() {
                if self.order >= 2 {
                    out.second[i * m + j] = self.second[vi * n + vj];
                }
                for (k, &vk) in vars.iter().enumerate() {
                    if self.order >= 3 {
                        out.third[(i * m + j) * m + k] = self.third[(vi * n + vj) * n + vk];
                    }
                }
            }
        }
        out
    }

    /// Composition `self ∘ inner`: `self` is a jet in `inner.len()` variables
    /// at the point `inner[a].value()`, and `inner` are jets of the
    /// coordinate functions in some other set of variables.
    pub fn compose(&self, inner: &[Jet]) -> Jet {
        assert_eq!(self.dim, inner.len(), "composition arity mismatch");
        assert!(!inner.is_empty());
        let m = self.dim;
        let order = inner
            .iter()
            .map(|j| j.order)
            .min()
            .unwrap_or(0)
            .min(self.order);
        let base = inner[0].truncated(order);
        let deltas: Vec<Jet> = inner
            .iter()
            .map(|j| {
                let mut d = j.truncated(order);
                d.value = 0.0;
                d
            })
            .collect();
        let mut out = base.lift(self.value);
        if order == 0 {
            return out;
        }
        for a in 0..m {
            out += &(&deltas[a] * self.first[a]);
        }
        if order >= 2 {
            for a in 0..m {
                for b in 0..m {
                    let c = self.second[a * m + b];
                    if c != 0.0 {
                        out += &(&(&deltas[a] * &deltas[b]) * (0.5 * c));
                    }
                }
            }
        }
        if order >= 3 {
            for a in 0..m {
                for b in 0..m {
                    let ab = &deltas[a] * &deltas[b];
                    for c in 0..m {
                        let k = self.third[(a * m + b) * m + c];
                        if k != 0.0 {
                            out += &(&(&ab * &deltas[c]) * (k / 6.0));
                        }
                    }
                }
            }
        }
        out
    }

    /// Applies a smooth univariate function given its value and first three
    /// derivatives at `self.value()`.
    pub fn map(&self, d: [f64; 4]) -> Jet {
        let n = self.dim;
        let mut out = self.lift(d[0]);
        if self.order >= 1 {
            for i in 0..n {
                out.first[i] = d[1] * self.first[i];
            }
        }
        if self.order >= 2 {
            for i in 0..n {
                for j in i..n {
                    let v = d[2] * self.first[i] * self.first[j] + d[1] * self.second[i * n + j];
                    out.set2(i, j, v);
                }
            }
        }
        if self.order >= 3 {
            let f = &self.first;
            for i in 0..n {
                for j in i..n {
                    for k in j..n {
                        let v = d[3] * f[i] * f[j] * f[k]
                            + d[2]
                                * (self.d2(i, j) * f[k]
                                    + self.d2(i, k) * f[j]
                                    + self.d2(j, k) * f[i])
                            + d[1] * self.d3(i, j, k);
                        out.set3(i, j, k, v);
                    }
                }
            }
        }
        out
    }

    fn set2(&mut self, i: usize, j: usize, v: f64) {
        let n = self.dim;
        self.second[i * n + j] = v;
        self.second[j * n + i] = v;
    }

    fn set3(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let n = self.dim;
        for (a, b, c) in [
            (i, j, k),
            (i, k, j),
            (j, i, k),
            (j, k, i),
            (k, i, j),
            (k, j, i),
        ] {
            self.third[(a * n + b) * n + c] = v;
        }
    }

    pub fn recip(&self) -> Jet {
        let x = self.value;
        let r = 1.0 / x;
        self.map([r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r])
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value.sin_cos();
        self.map([s, c, -s, -c])
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value.sin_cos();
        self.map([c, -s, -c, s])
    }

    pub fn tan(&self) -> Jet {
        let t = self.value.tan();
        let s2 = 1.0 + t * t;
        self.map([t, s2, 2.0 * t * s2, 2.0 * s2 * (1.0 + 3.0 * t * t)])
    }

    pub fn exp(&self) -> Jet {
        let e = self.value.exp();
        self.map([e, e, e, e])
    }

    pub fn ln(&self) -> Jet {
        let x = self.value;
        let r = 1.0 / x;
        self.map([x.ln(), r, -r * r, 2.0 * r * r * r])
    }

    pub fn sqrt(&self) -> Jet {
        let s = self.value.sqrt();
        let x = self.value;
        self.map([s, 0.5 / s, -0.25 / (s * x), 0.375 / (s * x * x)])
    }

    pub fn atan(&self) -> Jet {
        let x = self.value;
        let q = 1.0 / (1.0 + x * x);
        self.map([
            x.atan(),
            q,
            -2.0 * x * q * q,
            (6.0 * x * x - 2.0) * q * q * q,
        ])
    }

    /// Integer power by repeated multiplication (negative exponents go
    /// through the reciprocal).
    pub fn powi(&self, e: i32) -> Jet {
        if e < 0 {
            return self.powi(-e).recip();
        }
        let mut out = self.lift(1.0);
        let mut base = self.clone();
        let mut k = e as u32;
        while k > 0 {
            if k & 1 == 1 {
                out = &out * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        out
    }

    pub fn scale(&self, c: f64) -> Jet {
        Jet {
            dim: self.dim,
            order: self.order,
            value: self.value * c,
            first: self.first.iter().map(|v| v * c).collect(),
            second: self.second.iter().map(|v| v * c).collect(),
            third: self.third.iter().map(|v| v * c).collect(),
        }
    }

    fn zip(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        assert_eq!(self.dim, other.dim, "jet dimension mismatch");
        let order = self.order.min(other.order);
        let (a, b, c) = sizes(self.dim, order);
        Jet {
            dim: self.dim,
            order,
            value: f(self.value, other.value),
            first: (0..a).map(|i| f(self.first[i], other.first[i])).collect(),
            second: (0..b).map(|i| f(self.second[i], other.second[i])).collect(),
            third: (0..c).map(|i| f(self.third[i], other.third[i])).collect(),
        }
    }

    fn product(&self, o: &Jet) -> Jet {
        assert_eq!(self.dim, o.dim, "jet dimension mismatch");
        let n = self.dim;
        let order = self.order.min(o.order);
        let (a0, b0) = (self.value, o.value);
        let mut out = Jet::constant(n, order, a0 * b0);
        if order >= 1 {
            for i in 0..n {
                out.first[i] = self.first[i] * b0 + a0 * o.first[i];
            }
        }
        if order >= 2 {
            for i in 0..n {
                for j in i..n {
                    let v = self.d2(i, j) * b0
                        + self.first[i] * o.first[j]
                        + self.first[j] * o.first[i]
                        + a0 * o.d2(i, j);
                    out.set2(i, j, v);
                }
            }
        }
        if order >= 3 {
            let (fa, fb) = (&self.first, &o.first);
            for i in 0..n {
                for j in i..n {
                    for k in j..n {
                        let v = self.d3(i, j, k) * b0
                            + self.d2(i, j) * fb[k]
                            + self.d2(i, k) * fb[j]
                            + self.d2(j, k) * fb[i]
                            + fa[i] * o.d2(j, k)
                            + fa[j] * o.d2(i, k)
                            + fa[k] * o.d2(i, j)
                            + a0 * o.d3(i, j, k);
                        out.set3(i, j, k, v);
                    }
                }
            }
        }
        out
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        *self = self.zip(rhs, |a, b| a + b);
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl $tr<&Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                let f: fn(&Jet, &Jet) -> Jet = $body;
                f(self, rhs)
            }
        }
        impl $tr<Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                (&self).$m(rhs)
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                self.$m(&rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| a.zip(b, |x, y| x + y));
binop!(Sub, sub, |a, b| a.zip(b, |x, y| x - y));
binop!(Mul, mul, |a, b| a.product(b));
binop!(Div, div, |a, b| a.product(&b.recip()));

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, c: f64) -> Jet {
        self.scale(c)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, c: f64) -> Jet {
        self.scale(c)
    }
}

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, c: f64) -> Jet {
        let mut out = self.clone();
        out.value += c;
        out
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy(x: f64, y: f64, order: u8) -> (Jet, Jet) {
        let v = Jet::seed(&[x, y], order);
        (v[0].clone(), v[1].clone())
    }

    #[test]
    fn product_of_coordinates() {
        let (x, y) = xy(2.0, 3.0, 2);
        let f = &x * &y;
        assert_eq!(f.value(), 6.0);
        assert_eq!(f.d(0), 3.0);
        assert_eq!(f.d(1), 2.0);
        assert_eq!(f.d2(0, 1), 1.0);
        assert_eq!(f.d2(0, 0), 0.0);
    }

    #[test]
    fn exp_at_zero_has_unit_derivatives() {
        let x = Jet::variable(1, 3, 0, 0.0);
        let e = x.exp();
        assert_eq!([e.value(), e.d(0), e.d2(0, 0), e.d3(0, 0, 0)], [1.0; 4]);
    }

    #[test]
    fn reciprocal_cube() {
        let x = Jet::variable(1, 3, 0, 2.0);
        let r = x.powi(-1);
        assert!((r.d3(0, 0, 0) + 6.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn third_derivatives_are_symmetric() {
        let v = Jet::seed(&[0.3, -0.7, 1.1], 3);
        let f = (&(&v[0] * &v[1]).sin() * &v[2].exp()) / (&(&v[1] * &v[1]) + 2.0);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(f.d2(i, j), f.d2(j, i));
                for k in 0..3 {
                    assert_eq!(f.d3(i, j, k), f.d3(k, i, j));
                    assert_eq!(f.d3(i, j, k), f.d3(j, i, k));
                }
            }
        }
    }

    #[test]
    fn partial_shifts_order() {
        let (x, y) = xy(1.5, -0.5, 3);
        let f = &(&x * &x) * &y;
        let fx = f.partial(0);
        assert_eq!(fx.order(), 2);
        assert!((fx.value() - 2.0 * 1.5 * -0.5).abs() < 1e-15);
        assert!((fx.d2(0, 1) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn composition_matches_direct_evaluation() {
        // outer(a, b) = sin(a) * b, inner a = x*y, b = exp(x)
        let p = [0.4, 0.9];
        let v = Jet::seed(&p, 3);
        let a = &v[0] * &v[1];
        let b = v[0].exp();
        let direct = &a.sin() * &b;

        let w = Jet::seed(&[a.value(), b.value()], 3);
        let outer = &w[0].sin() * &w[1];
        let composed = outer.compose(&[a, b]);
        for i in 0..2 {
            assert!((direct.d(i) - composed.d(i)).abs() < 1e-14);
            for j in 0..2 {
                assert!((direct.d2(i, j) - composed.d2(i, j)).abs() < 1e-14);
                for k in 0..2 {
                    assert!((direct.d3(i, j, k) - composed.d3(i, j, k)).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn restrict_drops_variables() {
        let v = Jet::seed(&[1.0, 2.0, 3.0], 2);
        let f = &v[0] * &v[2];
        let r = f.restrict(&[2, 0]);
        assert_eq!(r.dim(), 2);
        assert_eq!(r.d(0), 1.0);
        assert_eq!(r.d(1), 3.0);
        assert_eq!(r.d2(0, 1), 1.0);
    }
}

//! Codimension-two spacelike immersions `Ψ^u(x) = (e^{u(x)}, 0, x)` into the
//! ambient space, their lightlike normal frame
//!
//! ```text
//! ξ = e^u ∂t
//! η = e^{−u} (‖∇u‖²/2) ∂t − e^{−2u} ∂ρ + e^{−2u} ∇u
//! ```
//!
//! with `g̃(ξ,η) = −1`, and the extrinsic quantities built from them.
//!
//! Tangent and normal parts use the frame identities
//! `X^⊤ = X + g̃(X,ξ)η + g̃(X,η)ξ` and `X^⊥ = −g̃(X,ξ)η − g̃(X,η)ξ`.
//! Normal vectors are reported by their frame coefficients `(a, b)` in
//! `X^⊥ = a ξ + b η`.

use crate::ambient::AmbientSpace;
use crate::chart::{Point, ScalarField};
use crate::conformal::{
    moebius_transform, rescale_metric, schouten, ConformalRep, MoebiusStructure,
};
use crate::error::{GeomError, Result};
use crate::jet::Jet;
use crate::linalg;
use crate::riemann::{self, LeviCivita};

/// The immersion `Ψ^u` of the base into an ambient space.
#[derive(Debug, Clone)]
pub struct SpacelikeImmersion<'a> {
    ambient: &'a AmbientSpace,
    u: ScalarField,
}

pub fn immerse<'a>(a: &'a AmbientSpace, u: &ScalarField) -> Result<SpacelikeImmersion<'a>> {
    if u.chart() != a.base_chart() {
        return Err(GeomError::Dimension(
            "scale function lives on a different chart".into(),
        ));
    }
    Ok(SpacelikeImmersion {
        ambient: a,
        u: u.clone(),
    })
}

/// A null pair normalised by `g̃(ξ,η) = −1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LightlikeNormalFrame {
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
}

/// Mean curvature `H = c ξ + η` in closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanCurvature {
    pub xi_coefficient: f64,
    pub vector: Vec<f64>,
    pub norm_sq: f64,
}

/// One evaluation of the reduced Codazzi identity.
#[derive(Debug, Clone, PartialEq)]
pub struct CodazziSample {
    /// Frame coefficients of `(R̃(TΨU, TΨV) TΨW)^⊥`.
    pub normal: (f64, f64),
    /// `C(g)(V, U, W)`.
    pub cotton: f64,
    pub defect: f64,
}

/// A vector field on the chart that is affine in the coordinates,
/// `V(x) = value + slope·(x − x₀)` with `slope[l * n + i] = ∂_i V^l`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearExtension {
    pub value: Vec<f64>,
    pub slope: Vec<f64>,
}

impl LinearExtension {
    /// The coordinate-constant extension.
    pub fn constant(value: &[f64]) -> Self {
        LinearExtension {
            value: value.to_vec(),
            slope: vec![0.0; value.len() * value.len()],
        }
    }

    fn jets(&self, n: usize) -> Vec<Jet> {
        (0..n)
            .map(|l| {
                Jet::from_parts(
                    n,
                    1,
                    self.value[l],
                    self.slope[l * n..(l + 1) * n].to_vec(),
                    Vec::new(),
                    Vec::new(),
                )
            })
            .collect()
    }
}

/// Everything needed at one base point, computed once.
#[derive(Debug, Clone)]
pub struct ImmersionPoint {
    pub x: Point,
    pub psi: Point,
    n: usize,
    u: Jet,
    psi_jets: Vec<Jet>,
    ambient: LeviCivita,
    /// `Γ̃^a_{bc}` along `Ψ` as jets in the base variables.
    gamma_along: Vec<Jet>,
    /// `g̃_ab` along `Ψ` as jets in the base variables.
    metric_along: Vec<Jet>,
    base: LeviCivita,
    xi: Vec<Jet>,
    eta: Vec<Jet>,
}

impl<'a> SpacelikeImmersion<'a> {
    pub fn ambient(&self) -> &'a AmbientSpace {
        self.ambient
    }

    pub fn log_factor(&self) -> &ScalarField {
        &self.u
    }

    pub fn dim(&self) -> usize {
        self.ambient.dim()
    }

    /// `Ψ^u(x)`.
    pub fn map(&self, x: &Point) -> Result<Point> {
        let u = self.u.eval(x)?;
        self.ambient.point(u.exp(), 0.0, x.coords())
    }

    pub fn at(&self, x: &Point) -> Result<ImmersionPoint> {
        x.check_chart(self.ambient.base_chart())?;
        let n = self.dim();
        let m = n + 2;
        let u = self.u.jet(x, 3)?;
        let eu = u.exp();
        let mut psi_jets = vec![eu.clone(), eu.lift(0.0)];
        psi_jets.extend(Jet::seed(x.coords(), 3));
        let psi = self.ambient.point(eu.value(), 0.0, x.coords())?;
        let ambient = self.ambient.metric().connection(&psi, 2)?;
        let inner: Vec<Jet> = psi_jets.iter().map(|j| j.truncated(1)).collect();
        let gamma_along = (0..m * m * m)
            .map(|k| {
                ambient
                    .gamma(k / (m * m), (k / m) % m, k % m)
                    .compose(&inner)
            })
            .collect();
        let metric_along = ambient.metric().iter().map(|g| g.compose(&inner)).collect();
        let base = self.ambient.base_metric().connection(x, 2)?;

        let zero = u.lift(0.0).truncated(2);
        let mut xi = vec![zero.clone(); m];
        xi[0] = eu.truncated(2);
        let du: Vec<Jet> = (0..n).map(|i| u.partial(i)).collect();
        let grad = base.gradient(&u.truncated(3));
        let mut norm = zero.clone();
        for i in 0..n {
            norm += &(&du[i] * &grad[i]);
        }
        let emu = (-&u).exp().truncated(2);
        let em2u = &emu * &emu;
        let mut eta = vec![zero; m];
        eta[0] = &(&emu * &norm) * 0.5;
        eta[1] = -&em2u;
        for i in 0..n {
            eta[i + 2] = &em2u * &grad[i];
        }
        Ok(ImmersionPoint {
            x: x.clone(),
            psi,
            n,
            u,
            psi_jets,
            ambient,
            gamma_along,
            metric_along,
            base,
            xi,
            eta,
        })
    }

    pub fn normal_frame(&self, x: &Point) -> Result<LightlikeNormalFrame> {
        Ok(self.at(x)?.frame())
    }

    /// `‖(Ψ^u)*g̃ − e^{2u} g‖∞`.
    pub fn induced_metric_defect(&self, x: &Point) -> Result<f64> {
        let ip = self.at(x)?;
        Ok(linalg::max_abs_diff(
            &ip.induced_metric(),
            &ip.rescaled_metric(),
        ))
    }

    /// Numeric Weingarten endomorphism of `η` when `eta` is set, else of `ξ`.
    pub fn weingarten(&self, x: &Point, eta: bool) -> Result<Vec<f64>> {
        let ip = self.at(x)?;
        Ok(if eta {
            ip.weingarten(&ip.eta)
        } else {
            ip.weingarten(&ip.xi)
        })
    }

    pub fn weingarten_eta_closed(&self, x: &Point) -> Result<Vec<f64>> {
        self.at(x)?.weingarten_eta_closed(self.ambient)
    }

    pub fn second_fundamental_form(&self, x: &Point, v: &[f64], w: &[f64]) -> Result<(f64, f64)> {
        self.at(x)?.second_fundamental_form(self.ambient, v, w)
    }

    pub fn second_fundamental_form_numeric(
        &self,
        x: &Point,
        v: &[f64],
        w: &[f64],
    ) -> Result<(f64, f64)> {
        Ok(self.at(x)?.second_fundamental_form_numeric(v, w))
    }

    /// Closed-form mean curvature; only needs second jets of `u`.
    pub fn mean_curvature(&self, x: &Point) -> Result<MeanCurvature> {
        let n = self.dim();
        let lc = self.ambient.base_metric().connection(x, 1)?;
        let u = self.u.jet(x, 2)?;
        let gi = lc.inverse_values();
        let hess = lc.hessian(&u);
        let lap: f64 = hess.iter().zip(&gi).map(|(h, g)| h.value() * g).sum();
        let norm = linalg::pair(&gi, u.first(), u.first());
        let dot = self.ambient.alpha().velocity(x)?;
        let tr: f64 = (0..n).map(|i| dot[i * n + i]).sum();
        let c = (-2.0 * u.value()).exp() / n as f64 * (lap - 0.5 * (tr - (n as f64 - 2.0) * norm));
        let e = (-u.value()).exp();
        let mut vector = vec![0.0; n + 2];
        vector[0] = c * u.value().exp() + e * norm * 0.5;
        vector[1] = -e * e;
        for (i, g) in linalg::mat_vec(&gi, u.first()).iter().enumerate() {
            vector[i + 2] = e * e * g;
        }
        Ok(MeanCurvature {
            xi_coefficient: c,
            vector,
            norm_sq: -2.0 * c,
        })
    }

    /// `(1/n) trace_{e^{2u}g} II` from the numeric second fundamental form,
    /// as frame coefficients.
    pub fn mean_curvature_from_trace(&self, x: &Point) -> Result<(f64, f64)> {
        let ip = self.at(x)?;
        let n = self.dim();
        let gi = linalg::inverse(&ip.rescaled_metric(), n)?;
        let (mut a, mut b) = (0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                let (ai, bi) = ip.second_fundamental_form_numeric(&unit(n, i), &unit(n, j));
                a += gi[i * n + j] * ai;
                b += gi[i * n + j] * bi;
            }
        }
        Ok((a / n as f64, b / n as f64))
    }

    /// Frame coefficients of `(∇̃_{TΨV} ξ)^⊥` and `(∇̃_{TΨV} η)^⊥`, each
    /// measured by the larger absolute coefficient.
    pub fn normal_connection_defect(&self, x: &Point, v: &[f64]) -> Result<(f64, f64)> {
        let ip = self.at(x)?;
        let dxi = ip.derivative(&ip.xi, v);
        let deta = ip.derivative(&ip.eta, v);
        let size = |c: (f64, f64)| c.0.abs().max(c.1.abs());
        Ok((
            size(ip.normal_coefficients(&dxi)),
            size(ip.normal_coefficients(&deta)),
        ))
    }

    /// `max_{ij} |R^⊥_{ij}|` from the normal connection form
    /// `θ_j = −g̃(∇̃_{∂j} ξ, η)`.
    pub fn normal_curvature_defect(&self, x: &Point) -> Result<f64> {
        let ip = self.at(x)?;
        let n = self.dim();
        let theta: Vec<Jet> = (0..n)
            .map(|j| -&ip.pair_along(&ip.derivative_jets(&ip.xi, j), &ip.eta))
            .collect();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((theta[j].d(i) - theta[i].d(j)).abs());
            }
        }
        Ok(worst)
    }

    /// `‖P^{e^{2u}g} − e^{2u} g(A_η·,·)‖∞` with the left side from the
    /// curvature of the rescaled metric. `m` certifies the hypothesis.
    pub fn schouten_recovery_defect(&self, x: &Point, m: &MoebiusStructure) -> Result<f64> {
        self.require_structure(m)?;
        let rescaled = rescale_metric(&ConformalRep::new(self.ambient.base_metric(), &self.u)?);
        let lhs = schouten(&rescaled, x)?;
        Ok(linalg::max_abs_diff(&lhs, &self.at(x)?.recovered_tensor()))
    }

    /// `‖P(e^{2u}g) − e^{2u} g(A_η·,·)‖∞` with the left side from the
    /// transformation law.
    pub fn moebius_recovery_defect(&self, x: &Point, m: &MoebiusStructure) -> Result<f64> {
        self.require_structure(m)?;
        let lhs = moebius_transform(m, &self.u, x)?;
        Ok(linalg::max_abs_diff(&lhs, &self.at(x)?.recovered_tensor()))
    }

    /// Compares `(R̃(TΨU,TΨV)TΨW)^⊥` with `C(g)(V,U,W) ξ`.
    pub fn codazzi_cotton_defect(
        &self,
        x: &Point,
        m: &MoebiusStructure,
        u: &[f64],
        v: &[f64],
        w: &[f64],
    ) -> Result<CodazziSample> {
        self.require_structure(m)?;
        let ip = self.at(x)?;
        let normal = ip.curvature_normal_part(u, v, w)?;
        let cotton = crate::conformal::cotton_york(m, x, v, u, w)?;
        let defect = (normal.0 - cotton).abs().max(normal.1.abs());
        Ok(CodazziSample {
            normal,
            cotton,
            defect,
        })
    }

    /// Compares `(∇_U II)(V,W) − (∇_V II)(U,W)` with `C(g)(V,U,W) ξ`, with
    /// `∇II` differentiated along `Ψ` using coordinate-constant extensions.
    pub fn codazzi_derivative_defect(
        &self,
        x: &Point,
        m: &MoebiusStructure,
        u: &[f64],
        v: &[f64],
        w: &[f64],
    ) -> Result<CodazziSample> {
        self.require_structure(m)?;
        let ip = self.at(x)?;
        let normal = ip.codazzi_difference(u, v, w);
        let cotton = crate::conformal::cotton_york(m, x, v, u, w)?;
        let defect = (normal.0 - cotton).abs().max(normal.1.abs());
        Ok(CodazziSample {
            normal,
            cotton,
            defect,
        })
    }

    /// Change in `(∇_U II)(V,W)` when the coordinate-constant extensions of
    /// `V` and `W` are replaced by `ev` and `ew`, measured by the larger
    /// frame coefficient.
    pub fn second_fundamental_form_tensoriality(
        &self,
        x: &Point,
        u: &[f64],
        ev: &LinearExtension,
        ew: &LinearExtension,
    ) -> Result<f64> {
        let ip = self.at(x)?;
        let a = ip.second_fundamental_form_derivative(
            u,
            &LinearExtension::constant(&ev.value),
            &LinearExtension::constant(&ew.value),
        );
        let b = ip.second_fundamental_form_derivative(u, ev, ew);
        Ok((a.0 - b.0).abs().max((a.1 - b.1).abs()))
    }

    /// Size of the normal part of `R̃` on a tangent triple.
    pub fn curvature_invariance_defect(
        &self,
        x: &Point,
        u: &[f64],
        v: &[f64],
        w: &[f64],
    ) -> Result<f64> {
        let (a, b) = self.at(x)?.curvature_normal_part(u, v, w)?;
        Ok(a.abs().max(b.abs()))
    }

    /// `|K̃(TΨ e₁, TΨ e₂)|` for surfaces.
    pub fn gauss_sectional_defect(&self, x: &Point) -> Result<f64> {
        let n = self.dim();
        if n != 2 {
            return Err(GeomError::Dimension(
                "the Gauss sectional check is for surfaces".into(),
            ));
        }
        let ip = self.at(x)?;
        let curv = riemann::riemann(self.ambient.metric(), &ip.psi)?;
        let gt = ip.ambient.metric_values();
        let e1 = ip.tangent(&unit(n, 0));
        let e2 = ip.tangent(&unit(n, 1));
        Ok(riemann::sectional_from(&curv, &gt, &e1, &e2)?.abs())
    }

    /// `(K − Δu) e^{−2u} − trace_{e^{2u}g} P(e^{2u}g)` for surfaces.
    pub fn gauss_identity_defect(&self, x: &Point, m: &MoebiusStructure) -> Result<f64> {
        self.require_structure(m)?;
        if self.dim() != 2 {
            return Err(GeomError::Dimension(
                "the Gauss identity check is for surfaces".into(),
            ));
        }
        let g = self.ambient.base_metric();
        let k = riemann::gauss_curvature(g, x)?;
        let lap = riemann::laplacian(g, &self.u, x)?;
        let e2u = (2.0 * self.u.eval(x)?).exp();
        let p = moebius_transform(m, &self.u, x)?;
        let gi = linalg::inverse(&g.values(x)?, 2)?;
        let tr: f64 = p.iter().zip(&gi).map(|(a, b)| a * b).sum::<f64>() / e2u;
        Ok((k - lap) / e2u - tr)
    }

    /// Midpoint-rule integral of `‖H‖² dμ_{e^{2u}g}` over a coordinate box
    /// with `nodes × nodes` cells.
    pub fn total_mean_curvature(&self, lo: [f64; 2], hi: [f64; 2], nodes: usize) -> Result<f64> {
        if self.dim() != 2 {
            return Err(GeomError::Dimension(
                "quadrature is implemented for surfaces".into(),
            ));
        }
        let chart = self.ambient.base_chart();
        let (h0, h1) = (
            (hi[0] - lo[0]) / nodes as f64,
            (hi[1] - lo[1]) / nodes as f64,
        );
        let mut total = 0.0;
        for i in 0..nodes {
            let mut row = 0.0;
            for j in 0..nodes {
                let x = Point::new(
                    chart,
                    vec![lo[0] + (i as f64 + 0.5) * h0, lo[1] + (j as f64 + 0.5) * h1],
                )?;
                let h = self.mean_curvature(&x)?;
                let g = self.ambient.base_metric().values(&x)?;
                let det = (g[0] * g[3] - g[1] * g[2]) * (4.0 * self.u.eval(&x)?).exp();
                row += h.norm_sq * det.sqrt();
            }
            total += row;
        }
        Ok(total * h0 * h1)
    }

    fn require_structure(&self, m: &MoebiusStructure) -> Result<()> {
        if m.metric() != self.ambient.base_metric() {
            return Err(GeomError::Hypothesis {
                hypothesis: "Möbius structure built on the ambient base metric".into(),
                defect: f64::INFINITY,
                location: Vec::new(),
            });
        }
        Ok(())
    }
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

fn is_null(j: &Jet) -> bool {
    j.value() == 0.0
        && j.first()
            .iter()
            .chain(j.second())
            .chain(j.third())
            .all(|&d| d == 0.0)
}

fn values(j: &[Jet]) -> Vec<f64> {
    j.iter().map(Jet::value).collect()
}

impl ImmersionPoint {
    pub fn frame(&self) -> LightlikeNormalFrame {
        LightlikeNormalFrame {
            xi: values(&self.xi),
            eta: values(&self.eta),
        }
    }

    pub fn ambient_metric(&self) -> Vec<f64> {
        self.ambient.metric_values()
    }

    fn g_pair(&self, v: &[f64], w: &[f64]) -> f64 {
        linalg::pair(&self.ambient.metric_values(), v, w)
    }

    /// `TΨ·V = V(u) e^u ∂t + V`.
    pub fn tangent(&self, v: &[f64]) -> Vec<f64> {
        let m = self.n + 2;
        (0..m)
            .map(|a| (0..self.n).map(|j| self.psi_jets[a].d(j) * v[j]).sum())
            .collect()
    }

    /// `X^⊤` in base components.
    pub fn tangent_part(&self, x: &[f64]) -> Vec<f64> {
        let (xi, eta) = (values(&self.xi), values(&self.eta));
        let (a, b) = (self.g_pair(x, &xi), self.g_pair(x, &eta));
        (0..self.n)
            .map(|i| x[i + 2] + a * eta[i + 2] + b * xi[i + 2])
            .collect()
    }

    /// `(a, b)` with `X^⊥ = a ξ + b η`.
    pub fn normal_coefficients(&self, x: &[f64]) -> (f64, f64) {
        let (xi, eta) = (values(&self.xi), values(&self.eta));
        (-self.g_pair(x, &eta), -self.g_pair(x, &xi))
    }

    /// `∇̃_{∂_j}` of an ambient field along `Ψ`, as jets one order lower.
    fn derivative_jets(&self, field: &[Jet], j: usize) -> Vec<Jet> {
        let m = self.n + 2;
        let dpsi: Vec<Jet> = self.psi_jets.iter().map(|p| p.partial(j)).collect();
        (0..m)
            .map(|a| {
                let mut s = field[a].partial(j);
                for b in 0..m {
                    if is_null(&dpsi[b]) {
                        continue;
                    }
                    for c in 0..m {
                        let k = &self.gamma_along[(a * m + b) * m + c];
                        if !is_null(k) {
                            s += &(&(k * &dpsi[b]) * &field[c]);
                        }
                    }
                }
                s
            })
            .collect()
    }

    /// `∇̃_{TΨV}` of an ambient field along `Ψ` (values).
    fn derivative(&self, field: &[Jet], v: &[f64]) -> Vec<f64> {
        let m = self.n + 2;
        let mut out = vec![0.0; m];
        for (j, &vj) in v.iter().enumerate() {
            if vj == 0.0 {
                continue;
            }
            for (a, d) in self.derivative_jets(field, j).iter().enumerate() {
                out[a] += vj * d.value();
            }
        }
        out
    }

    fn pair_along(&self, x: &[Jet], y: &[Jet]) -> Jet {
        let m = self.n + 2;
        let mut s = x[0].lift(0.0).truncated(x[0].order().min(y[0].order()));
        for a in 0..m {
            for b in 0..m {
                let g = &self.metric_along[a * m + b];
                if !is_null(g) {
                    s += &(&(g * &x[a]) * &y[b]);
                }
            }
        }
        s
    }

    /// `(Ψ^u)*g̃`.
    pub fn induced_metric(&self) -> Vec<f64> {
        let n = self.n;
        let cols: Vec<Vec<f64>> = (0..n).map(|j| self.tangent(&unit(n, j))).collect();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = self.g_pair(&cols[i], &cols[j]);
            }
        }
        out
    }

    /// `e^{2u} g`.
    pub fn rescaled_metric(&self) -> Vec<f64> {
        let e = (2.0 * self.u.value()).exp();
        self.base.metric_values().iter().map(|g| e * g).collect()
    }

    /// `A_ν` as a matrix `A[i][j] = dx^i(A_ν ∂_j)`.
    pub fn weingarten(&self, nu: &[Jet]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for j in 0..n {
            let d: Vec<f64> = self.derivative_jets(nu, j).iter().map(Jet::value).collect();
            let t = self.tangent_part(&d);
            for i in 0..n {
                out[i * n + j] = -t[i];
            }
        }
        out
    }

    pub fn weingarten_xi(&self) -> Vec<f64> {
        self.weingarten(&self.xi)
    }

    pub fn weingarten_eta(&self) -> Vec<f64> {
        self.weingarten(&self.eta)
    }

    /// `e^{−2u}[(α̇(0) − ‖∇u‖² Id)/2 + ∇u ⊗ du − ∇∇u]`.
    pub fn weingarten_eta_closed(&self, a: &AmbientSpace) -> Result<Vec<f64>> {
        let n = self.n;
        let dot = a.alpha().velocity(&self.x)?;
        let gi = self.base.inverse_values();
        let du: Vec<f64> = self.u.first().to_vec();
        let grad = linalg::mat_vec(&gi, &du);
        let norm = linalg::pair(&gi, &du, &du);
        let hess: Vec<f64> = values(&self.base.hessian(&self.u.truncated(2)));
        let e = (-2.0 * self.u.value()).exp();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let hij: f64 = (0..n).map(|k| gi[i * n + k] * hess[k * n + j]).sum();
                let id = if i == j { 1.0 } else { 0.0 };
                out[i * n + j] = e * (0.5 * (dot[i * n + j] - norm * id) + grad[i] * du[j] - hij);
            }
        }
        Ok(out)
    }

    /// `max |ḡ(A V, W) − ḡ(V, A W)|` over basis pairs, `ḡ = e^{2u} g`.
    pub fn self_adjointness_defect(&self, a: &[f64]) -> f64 {
        let n = self.n;
        let gb = self.rescaled_metric();
        let low = linalg::mat_mul(&linalg::transpose(a, n), &gb, n);
        linalg::max_abs_diff(&low, &linalg::transpose(&low, n))
    }

    /// `e^{2u} g(A_η ·, ·)` from the numeric Weingarten map.
    pub fn recovered_tensor(&self) -> Vec<f64> {
        let n = self.n;
        let a = self.weingarten_eta();
        let gb = self.rescaled_metric();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = (0..n).map(|k| a[k * n + i] * gb[k * n + j]).sum();
            }
        }
        out
    }

    /// Closed-form `II(V,W)` as frame coefficients.
    pub fn second_fundamental_form(
        &self,
        a: &AmbientSpace,
        v: &[f64],
        w: &[f64],
    ) -> Result<(f64, f64)> {
        let aeta = self.weingarten_eta_closed(a)?;
        let gb = self.rescaled_metric();
        Ok((
            -linalg::pair(&gb, &linalg::mat_vec(&aeta, v), w),
            linalg::pair(&gb, v, w),
        ))
    }

    /// Normal part of `∇̃_{TΨV}(TΨW)` as frame coefficients.
    pub fn second_fundamental_form_numeric(&self, v: &[f64], w: &[f64]) -> (f64, f64) {
        let m = self.n + 2;
        let field: Vec<Jet> = (0..m)
            .map(|a| {
                let mut s = self.psi_jets[a].lift(0.0).truncated(2);
                for (j, &wj) in w.iter().enumerate() {
                    s += &(&self.psi_jets[a].partial(j) * wj);
                }
                s
            })
            .collect();
        self.normal_coefficients(&self.derivative(&field, v))
    }

    /// `∇̃_{∂j}(TΨ·∂k)` along `Ψ` as order-one jets, indexed `j * n + k`.
    fn coordinate_hessians(&self) -> Vec<Vec<Jet>> {
        let n = self.n;
        let fields: Vec<Vec<Jet>> = (0..n)
            .map(|k| self.psi_jets.iter().map(|p| p.partial(k)).collect())
            .collect();
        (0..n * n)
            .map(|jk| self.derivative_jets(&fields[jk % n], jk / n))
            .collect()
    }

    /// Christoffel symbols of the induced connection read off the tangent
    /// part of `∇̃`, indexed `(l * n + j) * n + k`.
    pub fn induced_christoffel(&self) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n * n];
        for (jk, h) in self.coordinate_hessians().iter().enumerate() {
            for (l, t) in self.tangent_part(&values(h)).into_iter().enumerate() {
                out[l * n * n + jk] = t;
            }
        }
        out
    }

    /// Frame-coefficient jets `(a_jk, b_jk)` of `II(∂j, ∂k) = a ξ + b η`.
    fn second_fundamental_jets(&self) -> (Vec<Jet>, Vec<Jet>) {
        self.coordinate_hessians()
            .iter()
            .map(|h| {
                (
                    -&self.pair_along(h, &self.eta),
                    -&self.pair_along(h, &self.xi),
                )
            })
            .unzip()
    }

    /// Frame coefficients of `(∇_U II)(V,W) = ∇^⊥_U(II(V,W)) − II(∇_U V, W) −
    /// II(V, ∇_U W)` for the given extensions of `V` and `W`.
    pub fn second_fundamental_form_derivative(
        &self,
        u: &[f64],
        v: &LinearExtension,
        w: &LinearExtension,
    ) -> (f64, f64) {
        let n = self.n;
        let m = n + 2;
        let (a, b) = self.second_fundamental_jets();
        let (vj, wj) = (v.jets(n), w.jets(n));
        let mut ca = vj[0].lift(0.0);
        let mut cb = ca.clone();
        for j in 0..n {
            for k in 0..n {
                let vw = &vj[j] * &wj[k];
                ca += &(&vw * &a[j * n + k]);
                cb += &(&vw * &b[j * n + k]);
            }
        }
        let field: Vec<Jet> = (0..m)
            .map(|c| &(&ca * &self.xi[c]) + &(&cb * &self.eta[c]))
            .collect();
        let (mut pa, mut pb) = self.normal_coefficients(&self.derivative(&field, u));

        let gam = self.induced_christoffel();
        let along = |e: &LinearExtension| -> Vec<f64> {
            (0..n)
                .map(|l| {
                    (0..n)
                        .map(|i| {
                            u[i] * (e.slope[l * n + i]
                                + (0..n)
                                    .map(|j| gam[(l * n + i) * n + j] * e.value[j])
                                    .sum::<f64>())
                        })
                        .sum()
                })
                .collect()
        };
        let (dv, dw) = (along(v), along(w));
        for j in 0..n {
            for k in 0..n {
                let c = dv[j] * w.value[k] + v.value[j] * dw[k];
                pa -= c * a[j * n + k].value();
                pb -= c * b[j * n + k].value();
            }
        }
        (pa, pb)
    }

    /// `(∇_U II)(V,W) − (∇_V II)(U,W)` as frame coefficients.
    pub fn codazzi_difference(&self, u: &[f64], v: &[f64], w: &[f64]) -> (f64, f64) {
        let c = LinearExtension::constant;
        let x = self.second_fundamental_form_derivative(u, &c(v), &c(w));
        let y = self.second_fundamental_form_derivative(v, &c(u), &c(w));
        (x.0 - y.0, x.1 - y.1)
    }

    /// Frame coefficients of `(R̃(TΨU,TΨV)TΨW)^⊥`.
    pub fn curvature_normal_part(&self, u: &[f64], v: &[f64], w: &[f64]) -> Result<(f64, f64)> {
        let r = self.ambient.riemann()?;
        let m = self.n + 2;
        let (tu, tv, tw) = (self.tangent(u), self.tangent(v), self.tangent(w));
        let mut out = vec![0.0; m];
        for a in 0..m {
            for b in 0..m {
                if tw[b] == 0.0 {
                    continue;
                }
                for c in 0..m {
                    for d in 0..m {
                        out[a] += r[((a * m + b) * m + c) * m + d].value() * tw[b] * tu[c] * tv[d];
                    }
                }
            }
        }
        Ok(self.normal_coefficients(&out))
    }

    /// Largest violation of the null-frame relations and of orthogonality to
    /// the tangent space.
    pub fn frame_defect(&self) -> f64 {
        let (xi, eta) = (values(&self.xi), values(&self.eta));
        let mut worst = self
            .g_pair(&xi, &xi)
            .abs()
            .max(self.g_pair(&eta, &eta).abs())
            .max((self.g_pair(&xi, &eta) + 1.0).abs());
        for j in 0..self.n {
            let t = self.tangent(&unit(self.n, j));
            worst = worst
                .max(self.g_pair(&t, &xi).abs())
                .max(self.g_pair(&t, &eta).abs());
        }
        worst
    }
}

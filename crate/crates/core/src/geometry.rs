//! Contravariant metrics, their Levi-Civita connections and curvature, Lie
//! derivatives, and certification of flat and quasihomogeneous pencils.
//!
//! Tensors with rational-function entries are stored as numerator arrays over
//! one common denominator. Every identity is certified on its numerators,
//! which is the statement "holds wherever the denominator is nonzero".

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactalg::{fmt_rational, polymat, CheckMode, Matrix, QPoly, RatFunc, Rational};
use crate::report::{index_label, unflatten, Certificate};

/// A symmetric matrix `g^{ij}` of quasi-polynomials.
///
/// `n` is the number of coordinates; entries may live in more variables
/// (the pencil parameter is appended as an extra variable) but derivatives
/// only run over the first `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContraMetric {
    n: usize,
    g: Vec<Vec<QPoly>>,
    det: QPoly,
}

impl ContraMetric {
    /// Checks shape and symmetry. A vanishing determinant is allowed here
    /// (degenerate forms are reported, not rejected) and caught by the
    /// operations that need an inverse.
    pub fn new(g: Vec<Vec<QPoly>>) -> Result<Self> {
        let n = g.len();
        if n == 0 || g.iter().any(|r| r.len() != n) {
            return Err(Error::Input("metric must be a nonempty square matrix".into()));
        }
        let nvars = g[0][0].nvars();
        if nvars < n || g.iter().flatten().any(|x| x.nvars() != nvars) {
            return Err(Error::Input("metric entries have inconsistent variable counts".into()));
        }
        for i in 0..n {
            for j in i + 1..n {
                if g[i][j] != g[j][i] {
                    return Err(Error::Input(format!(
                        "metric is not symmetric at {}",
                        index_label(&[i, j])
                    )));
                }
            }
        }
        let det = polymat::det(&g);
        Ok(ContraMetric { n, g, det })
    }

    pub fn constant(eta: &[Vec<Rational>], nvars: usize) -> Result<Self> {
        ContraMetric::new(polymat::from_rational(eta, nvars))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nvars(&self) -> usize {
        self.g[0][0].nvars()
    }

    pub fn entry(&self, i: usize, j: usize) -> &QPoly {
        &self.g[i][j]
    }

    pub fn entries(&self) -> &[Vec<QPoly>] {
        &self.g
    }

    pub fn det(&self) -> &QPoly {
        &self.det
    }

    pub fn is_degenerate(&self) -> bool {
        self.det.is_zero()
    }

    /// The constant matrix when no entry depends on the coordinates.
    pub fn as_constant(&self) -> Option<Matrix> {
        polymat::to_rational(&self.g)
    }

    pub fn extend_vars(&self, extra: usize) -> ContraMetric {
        let g = self
            .g
            .iter()
            .map(|r| r.iter().map(|x| x.extend_vars(extra)).collect())
            .collect();
        ContraMetric {
            n: self.n,
            g,
            det: self.det.extend_vars(extra),
        }
    }

    pub fn sub_scaled(&self, other: &ContraMetric, lambda: &QPoly) -> Result<ContraMetric> {
        let g = (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| &self.g[i][j] - &(&other.g[i][j] * lambda))
                    .collect()
            })
            .collect();
        let mut m = ContraMetric::new(g)?;
        m.n = self.n;
        Ok(m)
    }
}

/// Coefficients `Γ_k^{ij} = num[k][i][j] / den`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Connection {
    n: usize,
    num: Vec<QPoly>,
    den: QPoly,
}

impl Connection {
    pub fn new(n: usize, num: Vec<QPoly>, den: QPoly) -> Self {
        assert_eq!(num.len(), n * n * n);
        assert!(!den.is_zero());
        let lead = den.leading_term().map(|(_, c)| c.clone()).unwrap();
        let mut c = if lead.is_one() {
            Connection { n, num, den }
        } else {
            let inv = lead.recip();
            Connection {
                n,
                num: num.iter().map(|x| x.scale(&inv)).collect(),
                den: den.scale(&inv),
            }
        };
        c.reduce();
        c
    }

    /// Polynomial connection `Γ_k^{ij} = entries[k][i][j]`.
    pub fn from_poly(n: usize, entries: Vec<QPoly>) -> Self {
        let nvars = entries[0].nvars();
        Connection::new(n, entries, QPoly::one(nvars))
    }

    pub fn zero(n: usize, nvars: usize) -> Self {
        Connection::from_poly(n, vec![QPoly::zero(nvars); n * n * n])
    }

    fn reduce(&mut self) {
        if self.den.is_constant() {
            if let Some(c) = self.den.as_constant() {
                if !c.is_one() {
                    let inv = c.recip();
                    self.num = self.num.iter().map(|x| x.scale(&inv)).collect();
                    self.den = QPoly::one(self.den.nvars());
                }
            }
            return;
        }
        let q: Option<Vec<QPoly>> = self.num.iter().map(|x| x.div_exact(&self.den)).collect();
        if let Some(q) = q {
            self.num = q;
            self.den = QPoly::one(self.den.nvars());
        }
    }

    fn idx(&self, k: usize, i: usize, j: usize) -> usize {
        (k * self.n + i) * self.n + j
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nvars(&self) -> usize {
        self.den.nvars()
    }

    pub fn num(&self, k: usize, i: usize, j: usize) -> &QPoly {
        &self.num[self.idx(k, i, j)]
    }

    pub fn den(&self) -> &QPoly {
        &self.den
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> RatFunc {
        RatFunc::new(self.num(k, i, j).clone(), self.den.clone())
    }

    /// `Γ_k^{ij}` as a quasi-polynomial when the connection is polynomial.
    pub fn poly(&self, k: usize, i: usize, j: usize) -> Option<QPoly> {
        if self.den.is_one_poly() {
            Some(self.num(k, i, j).clone())
        } else {
            self.num(k, i, j).div_exact(&self.den)
        }
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one_poly()
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(QPoly::is_zero)
    }

    pub fn extend_vars(&self, extra: usize) -> Connection {
        Connection {
            n: self.n,
            num: self.num.iter().map(|x| x.extend_vars(extra)).collect(),
            den: self.den.extend_vars(extra),
        }
    }

    /// `self - lambda * other` over the product of denominators.
    pub fn sub_scaled(&self, other: &Connection, lambda: &QPoly) -> Connection {
        let same = self.den == other.den;
        let num = self
            .num
            .iter()
            .zip(&other.num)
            .map(|(a, b)| {
                if same {
                    a - &(b * lambda)
                } else {
                    &(a * &other.den) - &(&(b * lambda) * &self.den)
                }
            })
            .collect();
        let den = if same { self.den.clone() } else { &self.den * &other.den };
        Connection::new(self.n, num, den)
    }
}

/// `R_l^{ijk} = num[l][i][j][k] / den`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Curvature {
    n: usize,
    num: Vec<QPoly>,
    den: QPoly,
}

impl Curvature {
    pub fn num(&self, l: usize, i: usize, j: usize, k: usize) -> &QPoly {
        let n = self.n;
        &self.num[((l * n + i) * n + j) * n + k]
    }

    pub fn numerators(&self) -> &[QPoly] {
        &self.num
    }

    pub fn den(&self) -> &QPoly {
        &self.den
    }

    pub fn get(&self, l: usize, i: usize, j: usize, k: usize) -> RatFunc {
        RatFunc::new(self.num(l, i, j, k).clone(), self.den.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(QPoly::is_zero)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorField {
    pub components: Vec<QPoly>,
}

impl VectorField {
    pub fn new(components: Vec<QPoly>) -> Self {
        VectorField { components }
    }

    pub fn n(&self) -> usize {
        self.components.len()
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(QPoly::is_zero)
    }

    /// Coordinate field `∂/∂t^i`.
    pub fn coordinate(n: usize, nvars: usize, i: usize) -> Self {
        VectorField {
            components: (0..n)
                .map(|j| if i == j { QPoly::one(nvars) } else { QPoly::zero(nvars) })
                .collect(),
        }
    }

    /// Directional derivative `X^s ∂_s f`.
    pub fn apply(&self, f: &QPoly) -> QPoly {
        let mut out = QPoly::zero(f.nvars());
        for (s, x) in self.components.iter().enumerate() {
            if !x.is_zero() {
                out += &(x * &f.diff(s));
            }
        }
        out
    }
}

impl std::fmt::Display for VectorField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .components
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| format!("({c})*d{}", i + 1))
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// `∂_s g^{ij}` for all `s < n`.
fn metric_derivatives(g: &ContraMetric) -> Vec<Vec<Vec<QPoly>>> {
    (0..g.n)
        .map(|s| {
            (0..g.n)
                .map(|i| (0..g.n).map(|j| g.g[i][j].diff(s)).collect())
                .collect()
        })
        .collect()
}

/// Numerators of the two Levi-Civita conditions for `Γ = num/den`:
/// symmetry `g^{is}Γ_s^{jk} - g^{js}Γ_s^{ik}` indexed by `(i,j,k)` and
/// metricity `Γ_k^{ij} + Γ_k^{ji} - ∂_k g^{ij}` indexed by `(k,i,j)`.
pub fn levi_civita_residuals(g: &ContraMetric, gamma: &Connection) -> (Vec<QPoly>, Vec<QPoly>) {
    let n = g.n;
    let nv = g.nvars();
    let mut sym = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut acc = QPoly::zero(nv);
                for s in 0..n {
                    acc += &(&g.g[i][s] * gamma.num(s, j, k));
                    acc -= &(&g.g[j][s] * gamma.num(s, i, k));
                }
                sym.push(acc);
            }
        }
    }
    let mut metric = Vec::with_capacity(n * n * n);
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let lhs = gamma.num(k, i, j) + gamma.num(k, j, i);
                metric.push(&lhs - &(&gamma.den * &g.g[i][j].diff(k)));
            }
        }
    }
    (sym, metric)
}

/// The contravariant Levi-Civita connection.
///
/// Closed form used: with `D = det g^{..}` and `adj` the adjugate (so the
/// covariant metric is `adj/D`),
/// `Γ_k^{ij} = ½ ∂_k g^{ij} + (1/2D) adj_{kq} (g^{is} ∂_s g^{jq} - g^{js} ∂_s g^{iq})`.
/// The result is re-checked against the defining linear system.
pub fn levi_civita(g: &ContraMetric) -> Result<Connection> {
    let n = g.n;
    if g.det.is_zero() {
        return Err(Error::SingularMetric);
    }
    let dg = metric_derivatives(g);
    let nv = g.nvars();
    let gamma = build_gamma(g, &dg, nv);
    let (sym, metric) = levi_civita_residuals(g, &gamma);
    if let Some(i) = sym.iter().position(|x| !x.is_zero()) {
        return Err(Error::Verification(format!(
            "Levi-Civita symmetry residual at {}",
            index_label(&unflatten(i, n, 3))
        )));
    }
    if let Some(i) = metric.iter().position(|x| !x.is_zero()) {
        return Err(Error::Verification(format!(
            "Levi-Civita metricity residual at {}",
            index_label(&unflatten(i, n, 3))
        )));
    }
    Ok(gamma)
}

fn build_gamma(g: &ContraMetric, dg: &[Vec<Vec<QPoly>>], nv: usize) -> Connection {
    let n = g.n;
    let adj = polymat::adjugate(&g.g);
    // h[i][j][q] = g^{is} ∂_s g^{jq}
    let mut h = vec![vec![vec![QPoly::zero(nv); n]; n]; n];
    for (i, hi) in h.iter_mut().enumerate() {
        for (j, hij) in hi.iter_mut().enumerate() {
            for (q, x) in hij.iter_mut().enumerate() {
                for s in 0..n {
                    if !g.g[i][s].is_zero() && !dg[s][j][q].is_zero() {
                        *x += &(&g.g[i][s] * &dg[s][j][q]);
                    }
                }
            }
        }
    }
    let mut num = Vec::with_capacity(n * n * n);
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut acc = &g.det * &dg[k][i][j];
                for q in 0..n {
                    let diff = &h[i][j][q] - &h[j][i][q];
                    if !diff.is_zero() && !adj[k][q].is_zero() {
                        acc += &(&adj[k][q] * &diff);
                    }
                }
                num.push(acc);
            }
        }
    }
    Connection::new(n, num, g.det.scale(&Rational::from_integer(2.into())))
}

/// `R_l^{ijk} = g^{is}(∂_sΓ_l^{kj} - ∂_lΓ_s^{kj}) + Γ_s^{ij}Γ_l^{sk} - Γ_s^{ik}Γ_l^{sj}`.
///
/// Note the `kj` order in the derivative term. With `jk` there the
/// expression vanishes for the curved metric `dx^2 + dy^2/x^2`; with `kj` it
/// equals `-g^{js}g^{kt}R^i_{lst}` for the classical Riemann tensor.
pub fn curvature(g: &ContraMetric, gamma: &Connection) -> Curvature {
    let n = g.n;
    let nv = g.nvars();
    let d = &gamma.den;
    let const_den = d.is_constant();
    // dn[s][l][j][k] = ∂_s N_l^{jk}
    let dn: Vec<Vec<QPoly>> = (0..n).map(|s| gamma.num.iter().map(|x| x.diff(s)).collect()).collect();
    let dd: Vec<QPoly> = (0..n).map(|s| d.diff(s)).collect();
    let at = |l: usize, j: usize, k: usize| (l * n + j) * n + k;
    // g^{is}[(∂_sN_l^{kj} - ∂_lN_s^{kj}) D - (N_l^{kj} ∂_sD - N_s^{kj} ∂_lD)] + N N - N N
    let mut num = Vec::with_capacity(n * n * n * n);
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut acc = QPoly::zero(nv);
                    for s in 0..n {
                        let gis = &g.g[i][s];
                        if gis.is_zero() {
                            continue;
                        }
                        let mut inner = &(&dn[s][at(l, k, j)] - &dn[l][at(s, k, j)]) * d;
                        if !const_den {
                            inner -= &(&gamma.num[at(l, k, j)] * &dd[s]);
                            inner += &(&gamma.num[at(s, k, j)] * &dd[l]);
                        }
                        acc += &(gis * &inner);
                    }
                    for s in 0..n {
                        acc += &(&gamma.num[at(s, i, j)] * &gamma.num[at(l, s, k)]);
                        acc -= &(&gamma.num[at(s, i, k)] * &gamma.num[at(l, s, j)]);
                    }
                    num.push(acc);
                }
            }
        }
    }
    Curvature { n, num, den: d * d }
}

/// Certifies vanishing of the curvature of `g`.
pub fn is_flat(g: &ContraMetric, mode: CheckMode) -> Result<Certificate> {
    let gamma = levi_civita(g)?;
    let r = curvature(g, &gamma);
    let n = g.n;
    Certificate::vanishing(
        "curvature vanishes",
        r.numerators(),
        |i| format!("R_l^(ijk) at (l,i,j,k) = {}", index_label(&unflatten(i, n, 4))),
        &[r.den()],
        mode,
    )
}

/// `(L_X g)^{ij} = X^s∂_s g^{ij} - g^{sj}∂_s X^i - g^{is}∂_s X^j`.
pub fn lie_derivative_metric(x: &VectorField, g: &ContraMetric) -> Vec<Vec<QPoly>> {
    let n = g.n;
    let dx: Vec<Vec<QPoly>> = x
        .components
        .iter()
        .map(|c| (0..n).map(|s| c.diff(s)).collect())
        .collect();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut acc = x.apply(&g.g[i][j]);
                    for s in 0..n {
                        acc -= &(&g.g[s][j] * &dx[i][s]);
                        acc -= &(&g.g[i][s] * &dx[j][s]);
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// `[X,Y]^i = X^s∂_sY^i - Y^s∂_sX^i`.
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> VectorField {
    VectorField {
        components: x
            .components
            .iter()
            .zip(&y.components)
            .map(|(xi, yi)| &x.apply(yi) - &y.apply(xi))
            .collect(),
    }
}

/// Contravariant gradient `g^{is}∂_s f`.
pub fn gradient(g: &ContraMetric, f: &QPoly) -> VectorField {
    let n = g.n;
    let df: Vec<QPoly> = (0..n).map(|s| f.diff(s)).collect();
    VectorField {
        components: (0..n)
            .map(|i| {
                let mut acc = QPoly::zero(f.nvars());
                for s in 0..n {
                    acc += &(&g.g[i][s] * &df[s]);
                }
                acc
            })
            .collect(),
    }
}

/// A pair of contravariant metrics with optional quasihomogeneity data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PencilData {
    pub g1: ContraMetric,
    pub g2: ContraMetric,
    pub tau: Option<QPoly>,
    pub d: Option<Rational>,
}

impl PencilData {
    pub fn new(g1: ContraMetric, g2: ContraMetric) -> Result<Self> {
        if g1.n != g2.n || g1.nvars() != g2.nvars() {
            return Err(Error::Input("pencil metrics have different dimensions".into()));
        }
        Ok(PencilData {
            g1,
            g2,
            tau: None,
            d: None,
        })
    }

    pub fn with_tau(mut self, tau: QPoly) -> Self {
        self.tau = Some(tau);
        self
    }

    pub fn with_d(mut self, d: Rational) -> Self {
        self.d = Some(d);
        self
    }

    pub fn n(&self) -> usize {
        self.g1.n
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PencilReport {
    /// Defining conditions in order: nondegenerate combination, linear
    /// connection, flat combination.
    pub certificates: Vec<Certificate>,
}

impl PencilReport {
    pub fn passed(&self) -> bool {
        crate::report::all_pass(&self.certificates)
    }
}

/// Connections of both members, in the pencil's own coordinates.
pub struct PencilConnections {
    pub gamma1: Connection,
    pub gamma2: Connection,
}

pub fn pencil_connections(p: &PencilData) -> Result<PencilConnections> {
    let gamma2 = levi_civita(&p.g2)?;
    let gamma1 = levi_civita(&p.g1)?;
    Ok(PencilConnections { gamma1, gamma2 })
}

/// Splits a residual polynomial in the appended pencil variable into its
/// lowest nonzero coefficient for the witness text.
fn lambda_witness(p: &QPoly, lambda_var: usize) -> String {
    let coeffs = p.coefficients_in(lambda_var);
    for (k, c) in coeffs.iter().enumerate() {
        if !c.is_zero() {
            return format!("lambda^{k} coefficient");
        }
    }
    "zero".into()
}

/// Certifies the three pencil conditions with the pencil parameter `λ`
/// carried as an extra polynomial variable, so each identity holds for all
/// `λ` iff its numerator vanishes as a polynomial in `(t, λ)`.
pub fn check_flat_pencil(p: &PencilData, mode: CheckMode) -> Result<PencilReport> {
    let conns = pencil_connections(p)?;
    check_flat_pencil_with(p, &conns.gamma1, &conns.gamma2, mode)
}

/// As [`check_flat_pencil`] but with caller-supplied connections; used to
/// certify that a given pair of connections (for instance a perturbed one)
/// makes up a flat pencil.
pub fn check_flat_pencil_with(
    p: &PencilData,
    gamma1: &Connection,
    gamma2: &Connection,
    mode: CheckMode,
) -> Result<PencilReport> {
    let n = p.n();
    let nv = p.g1.nvars();
    let lam = QPoly::var(nv + 1, nv);
    let g1 = p.g1.extend_vars(1);
    let g2 = p.g2.extend_vars(1);
    let gl = g1.sub_scaled(&g2, &lam)?;
    let gam = gamma1.extend_vars(1).sub_scaled(&gamma2.extend_vars(1), &lam);
    let mut certs = Vec::new();

    certs.push(if gl.det.is_zero() {
        Certificate::fail(
            "pencil: det(g1 - lambda g2) nonzero",
            mode,
            "determinant vanishes identically in (t, lambda)",
        )
    } else {
        Certificate::pass("pencil: det(g1 - lambda g2) nonzero", mode)
    });

    let (sym, metric) = levi_civita_residuals(&gl, &gam);
    let mut residuals = sym;
    residuals.extend(metric);
    let half = n * n * n;
    certs.push(Certificate::vanishing(
        "pencil: Gamma1 - lambda Gamma2 is the Levi-Civita connection of g1 - lambda g2",
        &residuals,
        |i| {
            let (kind, idx) = if i < half {
                ("symmetry (i,j,k)", unflatten(i, n, 3))
            } else {
                ("metricity (k,i,j)", unflatten(i - half, n, 3))
            };
            format!("{kind} = {}, {}", index_label(&idx), lambda_witness(&residuals[i], nv))
        },
        &[gam.den()],
        mode,
    )?);

    let r = curvature(&gl, &gam);
    certs.push(Certificate::vanishing(
        "pencil: curvature of g1 - lambda g2 vanishes at lambda^0, lambda^1, lambda^2",
        r.numerators(),
        |i| {
            format!(
                "R_l^(ijk) at (l,i,j,k) = {}, {}",
                index_label(&unflatten(i, n, 4)),
                lambda_witness(&r.numerators()[i], nv)
            )
        },
        &[r.den()],
        mode,
    )?);
    Ok(PencilReport { certificates: certs })
}

#[derive(Clone, Debug)]
pub struct QuasihomReport {
    pub euler: VectorField,
    pub unity: VectorField,
    pub d: Rational,
    pub certificates: Vec<Certificate>,
}

impl QuasihomReport {
    pub fn passed(&self) -> bool {
        crate::report::all_pass(&self.certificates)
    }
}

fn matrix_entries(m: &[Vec<QPoly>]) -> Vec<QPoly> {
    m.iter().flatten().cloned().collect()
}

/// Infers `d` from `L_E g1 = (d-1) g1` using the first nonzero entry.
pub fn infer_degree(lie: &[Vec<QPoly>], g1: &ContraMetric) -> Result<Rational> {
    let n = g1.n;
    for i in 0..n {
        for j in 0..n {
            let g = &g1.g[i][j];
            if g.is_zero() {
                continue;
            }
            let l = &lie[i][j];
            let ratio = if l.is_zero() {
                Some(Rational::zero())
            } else {
                l.div_exact(g).and_then(|q| q.as_constant())
            };
            let Some(r) = ratio else {
                return Err(Error::Inference(format!(
                    "(L_E g1)/g1 at {} is not constant: ({l}) / ({g})",
                    index_label(&[i, j])
                )));
            };
            let d = r + Rational::one();
            for a in 0..n {
                for b in 0..n {
                    let res = &lie[a][b] - &g1.g[a][b].scale(&(&d - Rational::one()));
                    if !res.is_zero() {
                        return Err(Error::Inference(format!(
                            "d = {} from entry {} fails at {}",
                            fmt_rational(&d),
                            index_label(&[i, j]),
                            index_label(&[a, b])
                        )));
                    }
                }
            }
            return Ok(d);
        }
    }
    Err(Error::Inference("g1 vanishes identically".into()))
}

/// Certifies `[e,E] = e`, `L_E g1 = (d-1)g1`, `L_e g1 = g2`, `L_e g2 = 0`
/// for `E = g1 dτ`, `e = g2 dτ`.
pub fn check_quasihomogeneous(p: &PencilData, mode: CheckMode) -> Result<QuasihomReport> {
    let tau = p
        .tau
        .as_ref()
        .ok_or_else(|| Error::Input("quasihomogeneity needs tau".into()))?;
    let n = p.n();
    let euler = gradient(&p.g1, tau);
    let unity = gradient(&p.g2, tau);
    let le_g1 = lie_derivative_metric(&euler, &p.g1);
    let d = infer_degree(&le_g1, &p.g1)?;
    if let Some(given) = &p.d {
        if *given != d {
            return Err(Error::ChargeMismatch {
                given: fmt_rational(given),
                found: fmt_rational(&d),
            });
        }
    }
    let mut certs = Vec::new();
    let br = lie_bracket(&unity, &euler);
    let res: Vec<QPoly> = br
        .components
        .iter()
        .zip(&unity.components)
        .map(|(a, b)| a - b)
        .collect();
    certs.push(Certificate::vanishing(
        "quasihomogeneity: [e,E] = e",
        &res,
        |i| format!("component {}", i + 1),
        &[],
        mode,
    )?);
    let dm1 = &d - Rational::one();
    let res: Vec<QPoly> = matrix_entries(&le_g1)
        .iter()
        .zip(matrix_entries(&p.g1.g))
        .map(|(a, b)| a - &b.scale(&dm1))
        .collect();
    let pair = |i: usize| format!("entry {}", index_label(&unflatten(i, n, 2)));
    certs.push(
        Certificate::vanishing("quasihomogeneity: L_E g1 = (d-1) g1", &res, pair, &[], mode)?
            .with_detail(format!("d = {}", fmt_rational(&d))),
    );
    let le1 = lie_derivative_metric(&unity, &p.g1);
    let res: Vec<QPoly> = matrix_entries(&le1)
        .iter()
        .zip(matrix_entries(&p.g2.g))
        .map(|(a, b)| a - &b)
        .collect();
    certs.push(Certificate::vanishing(
        "quasihomogeneity: L_e g1 = g2",
        &res,
        pair,
        &[],
        mode,
    )?);
    let le2 = matrix_entries(&lie_derivative_metric(&unity, &p.g2));
    certs.push(Certificate::vanishing(
        "quasihomogeneity: L_e g2 = 0",
        &le2,
        pair,
        &[],
        mode,
    )?);
    Ok(QuasihomReport {
        euler,
        unity,
        d,
        certificates: certs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::parse::{parse_expr, ExpGen};
    use crate::exactalg::rat;

    fn metric(rows: &[&[&str]], n: usize, expgens: &[ExpGen]) -> ContraMetric {
        ContraMetric::new(
            rows.iter()
                .map(|r| r.iter().map(|s| parse_expr(s, n, expgens).unwrap()).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn constant_metric_has_zero_connection() {
        let g = metric(&[&["0", "1"], &["1", "0"]], 2, &[]);
        let gamma = levi_civita(&g).unwrap();
        assert!(gamma.is_zero());
        assert!(curvature(&g, &gamma).is_zero());
    }

    #[test]
    fn one_dimensional_connection() {
        // Oracle: d_1 g^11 = 1 = 2 Γ^11_1 from metricity.
        let g = metric(&[&["t1"]], 1, &[]);
        let gamma = levi_civita(&g).unwrap();
        assert_eq!(gamma.poly(0, 0, 0), Some(QPoly::constant(1, rat(1, 2))));
        assert!(is_flat(&g, CheckMode::Exact).unwrap().passed());
    }

    #[test]
    fn polar_type_metric_is_flat_hyperbolic_is_not() {
        // diag(1, 1/r^2) is the Euclidean plane in polar coordinates and
        // diag(r^2, 1) is the same plane in (log r, theta); both flat.
        let polar = metric(&[&["t1^2", "0"], &["0", "1"]], 2, &[]);
        assert!(is_flat(&polar, CheckMode::Exact).unwrap().passed());
        // diag(1, r^2) is dr^2 + dθ^2/r^2 with Gaussian curvature -2/r^2
        let curved = metric(&[&["1", "0"], &["0", "t1^2"]], 2, &[]);
        let cert = is_flat(&curved, CheckMode::Exact).unwrap();
        assert!(!cert.passed());
        assert!(cert.witness.is_some());
    }

    #[test]
    fn lie_derivative_one_dimensional() {
        let g = metric(&[&["t1"]], 1, &[]);
        let x = VectorField::new(vec![QPoly::var(1, 0)]);
        // t d/dt t - 2 t * 1 = -t
        assert_eq!(lie_derivative_metric(&x, &g)[0][0], -QPoly::var(1, 0));
    }

    #[test]
    fn bracket_of_translation_and_dilation() {
        let d = VectorField::coordinate(1, 1, 0);
        let e = VectorField::new(vec![QPoly::var(1, 0)]);
        assert_eq!(lie_bracket(&d, &e), d);
        assert!(lie_bracket(&d, &d).is_zero());
    }

    #[test]
    fn one_dimensional_pencil_is_quasihomogeneous() {
        let p = PencilData::new(metric(&[&["t1"]], 1, &[]), metric(&[&["1"]], 1, &[]))
            .unwrap()
            .with_tau(QPoly::var(1, 0));
        assert!(check_flat_pencil(&p, CheckMode::Exact).unwrap().passed());
        let q = check_quasihomogeneous(&p, CheckMode::Exact).unwrap();
        assert!(q.passed());
        assert_eq!(q.d, rat(0, 1));
        assert_eq!(q.euler.components[0], QPoly::var(1, 0));
        assert_eq!(q.unity.components[0], QPoly::one(1));
    }

    #[test]
    fn cp1_intersection_form_connection() {
        let eg = [ExpGen::one(1)];
        let g = metric(&[&["2*exp(t2)", "t1"], &["t1", "2"]], 2, &eg);
        let gamma = levi_civita(&g).unwrap();
        assert!(gamma.is_polynomial());
        assert!(is_flat(&g, CheckMode::Exact).unwrap().passed());
    }

    #[test]
    fn degenerate_metric_is_singular() {
        let g = metric(&[&["t1", "t1"], &["t1", "t1"]], 2, &[]);
        assert_eq!(levi_civita(&g), Err(Error::SingularMetric));
    }

    #[test]
    fn asymmetric_metric_rejected() {
        let rows = vec![
            vec![QPoly::one(2), QPoly::var(2, 0)],
            vec![QPoly::zero(2), QPoly::one(2)],
        ];
        assert!(ContraMetric::new(rows).is_err());
    }
}

//! Hydrodynamic Poisson brackets
//! `{x^i(s1), x^j(s2)} = g^{ij} δ'(s1-s2) + Γ_k^{ij} ẋ^k δ(s1-s2)`.
//!
//! Distributional identities are never manipulated at run time. A change of
//! fields `y = y(x)` is applied through the coefficient rule obtained from
//! `f(s2) δ'(s1-s2) = f(s1) δ'(s1-s2) + f'(s1) δ(s1-s2)`:
//!
//! ```text
//! g'^{pq}   = A^p_i A^q_j g^{ij}
//! Γ'^{pq}_r = (A^p_i ∂_k A^q_j g^{ij} + A^p_i A^q_j Γ_k^{ij}) ∂x^k/∂y^r
//! ```
//!
//! with `A^p_i = ∂y^p/∂x^i`.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactalg::{delta, fmt_rational, linalg, rat, CheckMode, Matrix, QPoly, Rational};
use crate::frobenius::FrobeniusData;
use crate::geometry::{
    check_flat_pencil_with, is_flat, levi_civita, Connection, ContraMetric, PencilData, PencilReport,
};
use crate::reconstruction::{constant_g2, integrate_gradient};
use crate::report::{index_label, unflatten, Certificate};

/// A degree-one bracket: `g` and its contravariant Levi-Civita connection.
#[derive(Clone, Debug)]
pub struct HydroBracket {
    pub g: ContraMetric,
    pub gamma: Connection,
    /// Flatness of `g`, which together with the Levi-Civita property is the
    /// Poisson condition for brackets of this type.
    pub flatness: Certificate,
}

impl HydroBracket {
    /// Graded degree of the bracket: the `δ'` coefficient carries no
    /// derivatives and the `δ` coefficient is linear in `ẋ`, so `D = 1`.
    pub fn degree(&self) -> usize {
        1
    }
}

pub fn bracket_from_metric(g: &ContraMetric, mode: CheckMode) -> Result<HydroBracket> {
    let flatness = is_flat(g, mode)?;
    if !flatness.passed() {
        return Err(Error::NotFlat(flatness.witness.unwrap_or_default()));
    }
    Ok(HydroBracket {
        g: g.clone(),
        gamma: levi_civita(g)?,
        flatness,
    })
}

/// Compatibility of two brackets is the flat pencil condition on their
/// metrics, with the brackets' own connections.
pub fn check_compatibility(b1: &HydroBracket, b2: &HydroBracket, mode: CheckMode) -> Result<PencilReport> {
    let p = PencilData::new(b1.g.clone(), b2.g.clone())?;
    check_flat_pencil_with(&p, &b1.gamma, &b2.gamma, mode)
}

fn poly_gamma(gamma: &Connection) -> Result<Vec<QPoly>> {
    let n = gamma.n();
    (0..n * n * n)
        .map(|i| {
            let v = unflatten(i, n, 3);
            gamma
                .poly(v[0], v[1], v[2])
                .ok_or_else(|| Error::Transform("connection is not a quasi-polynomial".into()))
        })
        .collect()
}

/// `A^p_i ∂_k A^q_j g^{ij} + A^p_i A^q_j Γ_k^{ij}` as functions of `x`,
/// flattened `[p][q][k]`.
fn delta_coefficients(b: &HydroBracket, y: &[QPoly]) -> Result<(Vec<Vec<QPoly>>, Vec<QPoly>)> {
    let n = b.g.n();
    let nv = b.g.nvars();
    let gp = poly_gamma(&b.gamma)?;
    let a: Vec<Vec<QPoly>> = y.iter().map(|f| (0..n).map(|i| f.diff(i)).collect()).collect();
    let mut gprime = vec![vec![QPoly::zero(nv); n]; n];
    let mut c = vec![QPoly::zero(nv); n * n * n];
    for p in 0..n {
        for q in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let aa = &a[p][i] * &a[q][j];
                    gprime[p][q] += &(&aa * b.g.entry(i, j));
                    for k in 0..n {
                        let idx = (p * n + q) * n + k;
                        c[idx] += &(&(&a[p][i] * &a[q][j].diff(k)) * b.g.entry(i, j));
                        c[idx] += &(&aa * &gp[(k * n + i) * n + j]);
                    }
                }
            }
        }
    }
    Ok((gprime, c))
}

/// Rewrites the bracket in new fields `y(x)` with polynomial inverse `x(y)`.
/// The result is checked against the Levi-Civita connection of the new
/// metric.
pub fn transform_bracket(b: &HydroBracket, y: &[QPoly], x_of_y: &[QPoly]) -> Result<HydroBracket> {
    let n = b.g.n();
    if y.len() != n || x_of_y.len() != n {
        return Err(Error::Transform("coordinate change has the wrong dimension".into()));
    }
    for (k, xk) in x_of_y.iter().enumerate() {
        let back = xk
            .compose(y)
            .ok_or_else(|| Error::Transform("coordinate change is not polynomial".into()))?;
        if back != QPoly::var(n, k) {
            return Err(Error::Transform(format!(
                "x{}(y(x)) = {} is not x{}",
                k + 1,
                back,
                k + 1
            )));
        }
    }
    let (gp, c) = delta_coefficients(b, y)?;
    let sub = |f: &QPoly| {
        f.compose(x_of_y)
            .ok_or_else(|| Error::Transform("non-polynomial coefficient".into()))
    };
    let g_new: Vec<Vec<QPoly>> = gp
        .iter()
        .map(|r| r.iter().map(sub).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    let bm: Vec<Vec<QPoly>> = x_of_y.iter().map(|f| (0..n).map(|r| f.diff(r)).collect()).collect();
    let c_new: Vec<QPoly> = c.iter().map(sub).collect::<Result<_>>()?;
    let mut entries = vec![QPoly::zero(n); n * n * n];
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                let mut acc = QPoly::zero(n);
                for k in 0..n {
                    acc += &(&c_new[(p * n + q) * n + k] * &bm[k][r]);
                }
                entries[(r * n + p) * n + q] = acc;
            }
        }
    }
    let g = ContraMetric::new(g_new)?;
    let gamma = Connection::from_poly(n, entries);
    let lc = poly_gamma(&levi_civita(&g)?)?;
    if lc != poly_gamma(&gamma)? {
        return Err(Error::Transform(
            "transformed delta coefficient is not the Levi-Civita connection".into(),
        ));
    }
    let flatness = b.flatness.clone();
    Ok(HydroBracket { g, gamma, flatness })
}

/// In flat coordinates `t(x)` the bracket is `η^{αβ} δ'`: certifies that the
/// `δ'` coefficient is constant and the `δ` coefficient vanishes.
pub fn casimir_check(b: &HydroBracket, flat: &[QPoly], mode: CheckMode) -> Result<Vec<Certificate>> {
    let n = b.g.n();
    if flat.len() != n {
        return Err(Error::Transform("wrong number of flat coordinates".into()));
    }
    let (gp, c) = delta_coefficients(b, flat)?;
    let jac: Vec<Vec<QPoly>> = flat.iter().map(|f| (0..n).map(|i| f.diff(i)).collect()).collect();
    if crate::exactalg::polymat::det(&jac).is_zero() {
        return Err(Error::Transform("flat coordinates are not independent".into()));
    }
    let nonconst: Vec<QPoly> = gp
        .iter()
        .flatten()
        .map(|x| {
            let one = crate::exactalg::Monomial::one(x.nvars());
            let mut y = x.clone();
            y.add_term(one.clone(), -x.coeff(&one));
            y
        })
        .collect();
    let g_cert = Certificate::vanishing(
        "Casimirs: delta' coefficient is constant in flat coordinates",
        &nonconst,
        |i| format!("entry {}", index_label(&unflatten(i, n, 2))),
        &[],
        mode,
    )?;
    let gamma_cert = Certificate::vanishing(
        "Casimirs: delta coefficient vanishes in flat coordinates",
        &c,
        |i| format!("(p,q,k) = {}", index_label(&unflatten(i, n, 3))),
        &[],
        mode,
    )?;
    if !gamma_cert.passed() {
        return Err(Error::Transform(gamma_cert.witness.unwrap_or_default()));
    }
    Ok(vec![g_cert, gamma_cert])
}

/// Certifies `{T, T}_1 = [T(s1) + T(s2)] δ'` and the displayed form of
/// `{t^α, T}_1` for `T = 2τ/(1-d)`.
pub fn virasoro_check(m: &FrobeniusData, p: &PencilData, mode: CheckMode) -> Result<Vec<Certificate>> {
    if m.d.is_one() {
        return Err(Error::DEqualsOne);
    }
    let n = m.n;
    let k = Rational::from_integer(2.into()) / (Rational::one() - &m.d);
    let tau = m.tau();
    let dtau: Vec<Rational> = (0..n)
        .map(|i| tau.diff(i).as_constant().expect("tau is linear"))
        .collect();
    let t_field = tau.scale(&k);
    let gamma = poly_gamma(&levi_civita(&p.g1)?)?;
    let at = |k: usize, i: usize, j: usize| (k * n + i) * n + j;
    let form = |name: &str, res: Vec<QPoly>, label: &dyn Fn(usize) -> String| -> Result<Certificate> {
        let c = Certificate::vanishing(name, &res, label, &[], mode)?;
        if !c.passed() {
            return Err(Error::FormMismatch(format!(
                "{name}: {}",
                c.witness.unwrap_or_default()
            )));
        }
        Ok(c)
    };
    let mut certs = Vec::new();

    let mut gtt = t_field.scale(&rat(-2, 1));
    for i in 0..n {
        for j in 0..n {
            let c = &(&k * &k) * &(&dtau[i] * &dtau[j]);
            if !c.is_zero() {
                gtt += &p.g1.entry(i, j).scale(&c);
            }
        }
    }
    certs.push(form("Virasoro: g^(TT) = 2T", vec![gtt], &|_| "g^(TT)".into())?);

    let mut ttk = Vec::new();
    for kk in 0..n {
        let mut r = QPoly::constant(n, -(&k * &dtau[kk]));
        for i in 0..n {
            for j in 0..n {
                let c = &(&k * &k) * &(&dtau[i] * &dtau[j]);
                if !c.is_zero() {
                    r += &gamma[at(kk, i, j)].scale(&c);
                }
            }
        }
        ttk.push(r);
    }
    certs.push(form("Virasoro: delta coefficient of {T,T} is dT/ds", ttk, &|i| {
        format!("xdot^{}", i + 1)
    })?);

    let e = m.euler();
    let mut te = Vec::new();
    for a in 0..n {
        let mut r = -e.components[a].clone();
        for (j, tj) in dtau.iter().enumerate() {
            if !tj.is_zero() {
                r += &p.g1.entry(a, j).scale(tj);
            }
        }
        te.push(r);
    }
    certs.push(form(
        "Virasoro: delta' coefficient of {t^a,T} is 2/(1-d) E^a",
        te,
        &|i| format!("alpha = {}", i + 1),
    )?);

    let mut td = Vec::new();
    for a in 0..n {
        for kk in 0..n {
            let mut r = QPoly::constant(n, -delta(a, kk));
            for (j, tj) in dtau.iter().enumerate() {
                if !tj.is_zero() {
                    r += &gamma[at(kk, a, j)].scale(&(&k * tj));
                }
            }
            td.push(r);
        }
    }
    certs.push(form("Virasoro: delta coefficient of {t^a,T} is dt^a/ds", td, &|i| {
        format!("(alpha,k) = {}", index_label(&unflatten(i, n, 2)))
    })?);
    Ok(certs)
}

/// One step `η^{αε} ∂_ε∂_γ h' = g1^{αε} ∂_ε∂_γ h + Γ1_γ^{αε} ∂_ε h`, with
/// affine terms of `h'` set to zero.
pub fn recursion_step(p: &PencilData, h: &QPoly, mode: CheckMode) -> Result<(QPoly, Certificate)> {
    let n = p.n();
    let eta_up = constant_g2(p)?;
    let eta = linalg::inverse(&eta_up).ok_or(Error::SingularMetric)?;
    let gamma = poly_gamma(&levi_civita(&p.g1)?)?;
    let dh: Vec<QPoly> = (0..n).map(|e| h.diff(e)).collect();
    let rhs: Vec<Vec<QPoly>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|g| {
                    let mut acc = QPoly::zero(n);
                    for e in 0..n {
                        acc += &(p.g1.entry(a, e) * &dh[e].diff(g));
                        acc += &(&gamma[(g * n + a) * n + e] * &dh[e]);
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let hess: Vec<Vec<QPoly>> = (0..n)
        .map(|e| {
            (0..n)
                .map(|g| {
                    let mut acc = QPoly::zero(n);
                    for a in 0..n {
                        if !eta[e][a].is_zero() {
                            acc += &rhs[a][g].scale(&eta[e][a]);
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let mut integ = Vec::new();
    for e in 0..n {
        for g in 0..n {
            integ.push(&hess[e][g] - &hess[g][e]);
            for dl in 0..n {
                integ.push(&hess[e][g].diff(dl) - &hess[dl][g].diff(e));
            }
        }
    }
    let ic = Certificate::vanishing(
        "recursion: right-hand side is a Hessian",
        &integ,
        |i| format!("entry {i}"),
        &[],
        mode,
    )?;
    if !ic.passed() {
        return Err(Error::Integrability(ic.witness.unwrap_or_default()));
    }
    let grads: Vec<QPoly> = hess.iter().map(|row| integrate_gradient(row)).collect();
    let mut next = integrate_gradient(&grads);
    let affine: Vec<_> = next
        .terms()
        .filter(|(m, _)| m.is_polynomial() && m.total_degree() <= 1)
        .map(|(m, c)| (m.clone(), c.clone()))
        .collect();
    for (m, c) in affine {
        next.add_term(m, -c);
    }
    let mut res = Vec::new();
    for a in 0..n {
        for g in 0..n {
            let mut r = -rhs[a][g].clone();
            for e in 0..n {
                if !eta_up[a][e].is_zero() {
                    r += &next.diff(e).diff(g).scale(&eta_up[a][e]);
                }
            }
            res.push(r);
        }
    }
    let cert = Certificate::vanishing(
        "recursion: eta d d h' = g1 d d h + Gamma1 d h",
        &res,
        |i| format!("(alpha,gamma) = {}", index_label(&unflatten(i, n, 2))),
        &[],
        mode,
    )?;
    if !cert.passed() {
        return Err(Error::Integrability(cert.witness.unwrap_or_default()));
    }
    Ok((next, cert))
}

#[derive(Clone, Debug, Serialize)]
pub struct CentralChargeReport {
    #[serde(serialize_with = "crate::report::ser_rational")]
    pub c_formula: Rational,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "ser_opt")]
    pub c_lie: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equal: Option<bool>,
}

fn ser_opt<S: serde::Serializer>(r: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&fmt_rational(r)),
        None => s.serialize_none(),
    }
}

/// `Λ = (d-2)/2 + K` with `K[α][β] = ∂_α E^β`, acting on covectors.
pub fn lambda_operator(m: &FrobeniusData) -> Matrix {
    let n = m.n;
    let c = (&m.d - Rational::from_integer(2.into())) / Rational::from_integer(2.into());
    (0..n)
        .map(|a| (0..n).map(|b| &c * delta(a, b) + &m.euler_linear[b][a]).collect())
        .collect()
}

/// `|ρ|^2` for `A_k`, with `ρ` half the sum of the positive roots
/// `e_i - e_j` (`i < j`) in `R^{k+1}`, so that roots have length² 2.
pub fn weyl_vector_norm_a(k: usize) -> Rational {
    let dim = k + 1;
    let mut rho = vec![Rational::zero(); dim];
    for i in 0..dim {
        for j in i + 1..dim {
            rho[i] += rat(1, 2);
            rho[j] -= rat(1, 2);
        }
    }
    rho.iter().map(|x| x * x).sum()
}

/// `c = 12/(1-d)^2 (n/2 - 2 tr Λ^2)`, compared with `12 ρ^2` for `A_k`.
pub fn central_charge(m: &FrobeniusData, coxeter_rank: Option<usize>) -> Result<CentralChargeReport> {
    if m.d.is_one() {
        return Err(Error::DEqualsOne);
    }
    let l = lambda_operator(m);
    let tr2 = linalg::trace(&linalg::mat_mul(&l, &l));
    let omd = Rational::one() - &m.d;
    let c_formula = rat(12, 1) / (&omd * &omd) * (rat(m.n as i64, 2) - rat(2, 1) * tr2);
    let c_lie = coxeter_rank.map(|k| rat(12, 1) * weyl_vector_norm_a(k));
    let equal = c_lie.as_ref().map(|c| *c == c_formula);
    Ok(CentralChargeReport {
        c_formula,
        c_lie,
        equal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::parse::parse_expr;
    use crate::frobenius::to_flat_pencil;

    fn n1_cubic() -> FrobeniusData {
        FrobeniusData {
            n: 1,
            eta: vec![vec![rat(1, 1)]],
            potential: parse_expr("t1^3/6", 1, &[]).unwrap(),
            euler_linear: vec![vec![rat(1, 1)]],
            euler_constant: vec![rat(0, 1)],
            unity_index: 0,
            d: rat(0, 1),
            expgens: vec![],
        }
    }

    fn metric(rows: &[&[&str]], n: usize) -> ContraMetric {
        ContraMetric::new(
            rows.iter()
                .map(|r| r.iter().map(|s| parse_expr(s, n, &[]).unwrap()).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn brackets_from_metrics() {
        let b = bracket_from_metric(&metric(&[&["t1"]], 1), CheckMode::Exact).unwrap();
        assert_eq!(b.gamma.poly(0, 0, 0), Some(QPoly::constant(1, rat(1, 2))));
        let c = bracket_from_metric(&metric(&[&["0", "1"], &["1", "0"]], 2), CheckMode::Exact).unwrap();
        assert!(c.gamma.is_zero());
        assert!(matches!(
            bracket_from_metric(&metric(&[&["1", "0"], &["0", "t1^2"]], 2), CheckMode::Exact),
            Err(Error::NotFlat(_))
        ));
    }

    #[test]
    fn compatibility() {
        let b1 = bracket_from_metric(&metric(&[&["t1"]], 1), CheckMode::Exact).unwrap();
        let b2 = bracket_from_metric(&metric(&[&["1"]], 1), CheckMode::Exact).unwrap();
        assert!(check_compatibility(&b1, &b2, CheckMode::Exact).unwrap().passed());
        assert!(check_compatibility(&b2, &b1, CheckMode::Exact).unwrap().passed());
        let g1 = metric(&[&["1", "-2*t1"], &["-2*t1", "1+4*t1^2"]], 2);
        let g2 = metric(&[&["1", "0"], &["0", "1"]], 2);
        let b1 = bracket_from_metric(&g1, CheckMode::Exact).unwrap();
        let b2 = bracket_from_metric(&g2, CheckMode::Exact).unwrap();
        let r = check_compatibility(&b1, &b2, CheckMode::Exact).unwrap();
        assert!(!r.passed());
    }

    #[test]
    fn casimirs() {
        let b = bracket_from_metric(&metric(&[&["0", "1"], &["1", "0"]], 2), CheckMode::Exact).unwrap();
        let flat = [QPoly::var(2, 0), QPoly::var(2, 1)];
        assert!(casimir_check(&b, &flat, CheckMode::Exact)
            .unwrap()
            .iter()
            .all(Certificate::passed));
        // g = t has flat coordinate 2 sqrt(t), outside the ring
        assert!(matches!(parse_expr("2*t1^(1/2)", 1, &[]), Err(Error::OutOfRing { .. })));
        // polar form diag(1, 1/r^2) is not available; the polynomial chart
        // of the identity y = (x1, x2 + x1^2) is
        let g1 = metric(&[&["1", "-2*t1"], &["-2*t1", "1+4*t1^2"]], 2);
        let b = bracket_from_metric(&g1, CheckMode::Exact).unwrap();
        let flat = [QPoly::var(2, 0), &QPoly::var(2, 1) + &QPoly::var(2, 0).pow(2)];
        assert!(casimir_check(&b, &flat, CheckMode::Exact)
            .unwrap()
            .iter()
            .all(Certificate::passed));
        let not_flat = [QPoly::var(2, 0), &QPoly::var(2, 1) + &QPoly::var(2, 0).pow(3)];
        assert!(matches!(
            casimir_check(&b, &not_flat, CheckMode::Exact),
            Err(Error::Transform(_))
        ));
    }

    #[test]
    fn virasoro_change_of_variable() {
        // T = 2t turns g = t, Γ = 1/2 into g' = 2T, Γ' = 1
        let b = bracket_from_metric(&metric(&[&["t1"]], 1), CheckMode::Exact).unwrap();
        let y = [QPoly::var(1, 0).scale(&rat(2, 1))];
        let x = [QPoly::var(1, 0).scale(&rat(1, 2))];
        let t = transform_bracket(&b, &y, &x).unwrap();
        assert_eq!(t.g.entry(0, 0), &QPoly::var(1, 0).scale(&rat(2, 1)));
        assert_eq!(t.gamma.poly(0, 0, 0), Some(QPoly::one(1)));
        assert_eq!(t.degree(), 1);
    }

    #[test]
    fn virasoro_forms() {
        let m = n1_cubic();
        let p = to_flat_pencil(&m, CheckMode::Exact).unwrap();
        assert!(virasoro_check(&m, &p, CheckMode::Exact)
            .unwrap()
            .iter()
            .all(Certificate::passed));
        let mut m1 = m.clone();
        m1.d = rat(1, 1);
        assert!(matches!(
            virasoro_check(&m1, &p, CheckMode::Exact),
            Err(Error::DEqualsOne)
        ));
    }

    #[test]
    fn recursion() {
        let p = to_flat_pencil(&n1_cubic(), CheckMode::Exact).unwrap();
        let (h1, c) = recursion_step(&p, &QPoly::var(1, 0), CheckMode::Exact).unwrap();
        assert!(c.passed());
        assert_eq!(h1, QPoly::var(1, 0).pow(2).scale(&rat(1, 4)));
        let (h0, _) = recursion_step(&p, &QPoly::from_int(1, 5), CheckMode::Exact).unwrap();
        assert!(h0.is_zero());
    }

    #[test]
    fn central_charges() {
        let r = central_charge(&n1_cubic(), Some(1)).unwrap();
        assert_eq!(r.c_formula, rat(6, 1));
        assert_eq!(r.equal, Some(true));
        for k in 1..=4 {
            let kk = k as i64;
            assert_eq!(weyl_vector_norm_a(k), rat(kk * (kk + 1) * (kk + 2), 12));
        }
    }

    #[test]
    fn coxeter_virasoro_and_charges() {
        for (k, c) in [(2usize, 24i64), (3, 60)] {
            let (_, r) = crate::coxeter::coxeter_pencil(k, CheckMode::Exact).unwrap();
            let certs = virasoro_check(&r.frobenius, &r.pencil, CheckMode::Exact).unwrap();
            assert!(certs.iter().all(Certificate::passed));
            let cc = central_charge(&r.frobenius, Some(k)).unwrap();
            assert_eq!(cc.c_formula, rat(c, 1));
            assert_eq!(cc.equal, Some(true));
        }
    }
}

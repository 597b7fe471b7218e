//! Type A orbit spaces: invariants, the Arnold and Saito metrics, flat
//! Saito coordinates and the resulting polynomial Frobenius structure.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exactalg::{fmt_rational, linalg, polymat, rat, rat_int, CheckMode, Matrix, Monomial, QPoly, Rational};
use crate::geometry::{
    check_flat_pencil, check_quasihomogeneous, is_flat, levi_civita, lie_derivative_metric, ContraMetric, PencilData,
    VectorField,
};
use crate::reconstruction::{reconstruct_frobenius, ReconstructionResult};
use crate::report::{all_pass, index_label, Certificate};

pub const MAX_RANK: usize = 4;

/// `A_n` acting on the zero-sum hyperplane of `C^{n+1}`, in the chart
/// `y_i = z_i` (`i ≤ n`), `y_{n+1} = -Σ z_i`.
#[derive(Clone, Debug)]
pub struct OrbitChart {
    pub rank: usize,
    pub h: usize,
    /// `p_a = Σ y_i^{h+1-a}` as polynomials in `z`; `deg p_1 = h`.
    pub invariants: Vec<QPoly>,
    pub degrees: Vec<usize>,
    /// Inverse Gram matrix of the chart, `I - 11^T/(n+1)`.
    pub gram_inv: Matrix,
    /// `det ∂p_a/∂z_i`.
    pub jacobian: QPoly,
}

pub fn build_orbit_chart(n: usize) -> Result<OrbitChart> {
    if n == 0 || n > MAX_RANK {
        return Err(Error::RankOutOfRange(n));
    }
    let h = n + 1;
    let mut ys: Vec<QPoly> = (0..n).map(|i| QPoly::var(n, i)).collect();
    let mut last = QPoly::zero(n);
    for y in &ys {
        last -= y;
    }
    ys.push(last);
    let degrees: Vec<usize> = (0..n).map(|a| h - a).collect();
    let invariants: Vec<QPoly> = degrees
        .iter()
        .map(|&k| {
            let mut s = QPoly::zero(n);
            for y in &ys {
                s += &y.pow(k as u32);
            }
            s
        })
        .collect();
    let jac: Vec<Vec<QPoly>> = invariants.iter().map(|p| (0..n).map(|i| p.diff(i)).collect()).collect();
    let jacobian = polymat::det(&jac);
    if jacobian.is_zero() {
        return Err(Error::Verification("invariants are algebraically dependent".into()));
    }
    let inv_h = rat(1, h as i64);
    let gram_inv = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Rational::one() - &inv_h
                    } else {
                        -inv_h.clone()
                    }
                })
                .collect()
        })
        .collect();
    Ok(OrbitChart {
        rank: n,
        h,
        invariants,
        degrees,
        gram_inv,
        jacobian,
    })
}

/// Monomials `p^k` with `Σ k_a w_a = target`.
fn weighted_monomials(weights: &[usize], target: usize) -> Vec<Vec<u32>> {
    fn rec(w: &[usize], i: usize, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == w.len() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let mut k = 0;
        while k * w[i] <= left {
            cur.push(k as u32);
            rec(w, i + 1, left - k * w[i], cur, out);
            cur.pop();
            k += 1;
        }
    }
    let mut out = Vec::new();
    rec(weights, 0, target, &mut Vec::new(), &mut out);
    out
}

/// Coefficient matrix of the linear map `c ↦ Σ_k c_k cols[k]`, one row per
/// (component, monomial).
fn coefficient_matrix(cols: &[Vec<QPoly>]) -> (Matrix, Vec<(usize, Monomial)>) {
    let mut keys: Vec<(usize, Monomial)> = Vec::new();
    for col in cols {
        for (comp, p) in col.iter().enumerate() {
            for (m, _) in p.terms() {
                keys.push((comp, m.clone()));
            }
        }
    }
    keys.sort();
    keys.dedup();
    let rows = keys
        .iter()
        .map(|(comp, m)| cols.iter().map(|col| col[*comp].coeff(m)).collect())
        .collect();
    (rows, keys)
}

/// Rewrites an invariant polynomial `f(z)` as a polynomial in the `p_a`
/// by a linear solve over the weighted monomials of the right degree.
pub fn rewrite_in_invariants(chart: &OrbitChart, f: &QPoly) -> Result<QPoly> {
    let n = chart.rank;
    if f.is_zero() {
        return Ok(QPoly::zero(n));
    }
    let deg = f.total_degree().unwrap_or(0) as usize;
    let monos = weighted_monomials(&chart.degrees, deg);
    let expand = |k: &Vec<u32>| -> QPoly {
        let mut acc = QPoly::one(n);
        for (a, e) in k.iter().enumerate() {
            acc = &acc * &chart.invariants[a].pow(*e);
        }
        acc
    };
    let cols: Vec<Vec<QPoly>> = monos.iter().map(|k| vec![expand(k)]).collect();
    let mut all = cols.clone();
    all.push(vec![f.clone()]);
    let (mat, _) = coefficient_matrix(&all);
    let a: Matrix = mat.iter().map(|r| r[..monos.len()].to_vec()).collect();
    let b: Vec<Rational> = mat.iter().map(|r| r[monos.len()].clone()).collect();
    let c = linalg::solve_particular(&a, &b)
        .ok_or_else(|| Error::Rewrite(format!("{f} is not a polynomial in the invariants")))?;
    let mut out = QPoly::zero(n);
    let mut check = QPoly::zero(n);
    for (k, ck) in monos.iter().zip(&c) {
        if !ck.is_zero() {
            out.add_term(Monomial::from_parts(k.clone(), Vec::new()), ck.clone());
            check += &cols[monos.iter().position(|x| x == k).unwrap()][0].scale(ck);
        }
    }
    if check != *f {
        return Err(Error::Rewrite(format!("rewrite of {f} does not reproduce it")));
    }
    Ok(out)
}

/// `(dp_a, dp_b) = G^{ij} ∂_i p_a ∂_j p_b`, rewritten in the invariants.
pub fn arnold_metric(chart: &OrbitChart) -> Result<ContraMetric> {
    let n = chart.rank;
    let grads: Vec<Vec<QPoly>> = chart
        .invariants
        .iter()
        .map(|p| (0..n).map(|i| p.diff(i)).collect())
        .collect();
    let mut g = vec![vec![QPoly::zero(n); n]; n];
    for a in 0..n {
        for b in a..n {
            let mut x = QPoly::zero(n);
            for i in 0..n {
                for j in 0..n {
                    if !chart.gram_inv[i][j].is_zero() {
                        x += &(&grads[a][i] * &grads[b][j]).scale(&chart.gram_inv[i][j]);
                    }
                }
            }
            let y = rewrite_in_invariants(chart, &x)?;
            g[a][b] = y.clone();
            g[b][a] = y;
        }
    }
    ContraMetric::new(g)
}

/// `E = Σ (deg p_a / h) p_a ∂_a`, `e = ∂/∂p_1` and `τ = (x,x)/(2h) = p_n/(2h)`.
pub fn fields_and_tau(chart: &OrbitChart) -> (VectorField, VectorField, QPoly) {
    let n = chart.rank;
    let h = chart.h as i64;
    let euler = VectorField::new(
        (0..n)
            .map(|a| QPoly::var(n, a).scale(&rat(chart.degrees[a] as i64, h)))
            .collect(),
    );
    let unity = VectorField::coordinate(n, n, 0);
    let tau = QPoly::var(n, n - 1).scale(&rat(1, 2 * h));
    (euler, unity, tau)
}

/// `g2 = L_{k e} g1`.
pub fn saito_metric(g1: &ContraMetric, unity: &VectorField, scale: &Rational) -> Result<ContraMetric> {
    let e = VectorField::new(unity.components.iter().map(|c| c.scale(scale)).collect());
    ContraMetric::new(lie_derivative_metric(&e, g1))
}

/// Flat coordinates `t^α(p)` of `g2`, weighted homogeneous with
/// `deg t^α = deg p_α`: each is the solution of `∇ dt = 0` in the space of
/// weighted polynomials of that degree, scaled by `scales[α]` on `p_α`.
pub fn saito_flat_coordinates(chart: &OrbitChart, g2: &ContraMetric, scales: &[Rational]) -> Result<Vec<QPoly>> {
    let n = chart.rank;
    let gamma = levi_civita(g2)?;
    let gp: Vec<QPoly> = (0..n * n * n)
        .map(|i| {
            let (k, r) = (i / (n * n), i % (n * n));
            gamma
                .poly(k, r / n, r % n)
                .ok_or_else(|| Error::GradingObstruction("connection of the Saito metric is not polynomial".into()))
        })
        .collect::<Result<_>>()?;
    let at = |k: usize, i: usize, j: usize| (k * n + i) * n + j;
    // g^{is} ∂_s∂_j t + Γ_j^{is} ∂_s t for all (i, j)
    let residual = |t: &QPoly| -> Vec<QPoly> {
        let dt: Vec<QPoly> = (0..n).map(|s| t.diff(s)).collect();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = QPoly::zero(n);
                for s in 0..n {
                    acc += &(g2.entry(i, s) * &dt[s].diff(j));
                    acc += &(&gp[at(j, i, s)] * &dt[s]);
                }
                out.push(acc);
            }
        }
        out
    };
    let mut coords = Vec::with_capacity(n);
    for alpha in 0..n {
        let monos = weighted_monomials(&chart.degrees, chart.degrees[alpha]);
        let basis: Vec<QPoly> = monos
            .iter()
            .map(|k| QPoly::from_term(Monomial::from_parts(k.clone(), Vec::new()), Rational::one()))
            .collect();
        let cols: Vec<Vec<QPoly>> = basis.iter().map(residual).collect();
        let (mat, _) = coefficient_matrix(&cols);
        let ns = if mat.is_empty() {
            linalg::identity(basis.len())
        } else {
            linalg::null_space(&mat, basis.len())
        };
        let lead = monos
            .iter()
            .position(|k| k.iter().enumerate().all(|(a, &e)| e == u32::from(a == alpha)))
            .expect("p_alpha is a monomial of its own degree");
        let v = ns.iter().find(|v| !v[lead].is_zero()).ok_or_else(|| {
            Error::GradingObstruction(format!(
                "no flat coordinate of degree {} with a p_{} term",
                chart.degrees[alpha],
                alpha + 1
            ))
        })?;
        if ns.len() != 1 {
            return Err(Error::GradingObstruction(format!(
                "{} independent flat coordinates of degree {}",
                ns.len(),
                chart.degrees[alpha]
            )));
        }
        let norm = &scales[alpha] / &v[lead];
        let mut t = QPoly::zero(n);
        for (b, c) in basis.iter().zip(v) {
            t += &b.scale(&(c * &norm));
        }
        coords.push(t);
    }
    Ok(coords)
}

/// Inverts triangular graded coordinates: `p_α` as polynomials in `t`.
fn invert_coordinates(chart: &OrbitChart, t: &[QPoly]) -> Result<Vec<QPoly>> {
    let n = chart.rank;
    let mut p: Vec<Option<QPoly>> = vec![None; n];
    // lower degree first: p_n, p_{n-1}, ...
    for alpha in (0..n).rev() {
        let mut lead = Rational::zero();
        let mut rest = t[alpha].clone();
        let pm = Monomial::from_parts((0..n).map(|a| u32::from(a == alpha)).collect(), Vec::new());
        lead += rest.coeff(&pm);
        rest.add_term(pm, -lead.clone());
        if lead.is_zero() || !(0..=alpha).all(|a| rest.is_free_of(a)) {
            return Err(Error::Transform(format!("t^{} is not triangular in p", alpha + 1)));
        }
        let subs: Vec<QPoly> = (0..n).map(|a| p[a].clone().unwrap_or_else(|| QPoly::zero(n))).collect();
        let rest_t = rest
            .compose(&subs)
            .ok_or_else(|| Error::Transform("non-polynomial coordinate".into()))?;
        p[alpha] = Some((&QPoly::var(n, alpha) - &rest_t).scale(&lead.recip()));
    }
    Ok(p.into_iter().map(Option::unwrap).collect())
}

/// `g^{αβ}(t) = ∂_a t^α ∂_b t^β g^{ab}(p(t))`.
fn metric_in_flat(g: &ContraMetric, t: &[QPoly], p_of_t: &[QPoly]) -> Result<ContraMetric> {
    let n = g.n();
    let jac: Vec<Vec<QPoly>> = t.iter().map(|x| (0..n).map(|a| x.diff(a)).collect()).collect();
    let mut out = vec![vec![QPoly::zero(n); n]; n];
    for al in 0..n {
        for be in 0..n {
            let mut acc = QPoly::zero(n);
            for a in 0..n {
                for b in 0..n {
                    acc += &(&(&jac[al][a] * &jac[be][b]) * g.entry(a, b));
                }
            }
            out[al][be] = acc
                .compose(p_of_t)
                .ok_or_else(|| Error::Transform("non-polynomial metric entry".into()))?;
        }
    }
    ContraMetric::new(out)
}

/// Everything produced for one rank.
#[derive(Clone, Debug)]
pub struct CoxeterPencil {
    pub chart: OrbitChart,
    /// Arnold and Saito metrics in invariant coordinates.
    pub g1_invariant: ContraMetric,
    pub g2_invariant: ContraMetric,
    /// `e = scale · ∂/∂p_1`.
    pub unity_scale: Rational,
    /// Flat coordinates `t^α(p)`.
    pub flat_coordinates: Vec<QPoly>,
    /// The pencil in flat coordinates, with `τ = t^n` and `d = 1 - 2/h`.
    pub pencil: PencilData,
    pub d: Rational,
    pub certificates: Vec<Certificate>,
}

pub fn coxeter_pencil(n: usize, mode: CheckMode) -> Result<(CoxeterPencil, ReconstructionResult)> {
    let chart = build_orbit_chart(n)?;
    let h = chart.h as i64;
    let mut certs = vec![
        Certificate::pass("orbit chart: Jacobian of the invariants is nonzero", CheckMode::Exact)
            .with_detail(format!("degrees {:?}", chart.degrees)),
    ];
    let g1 = arnold_metric(&chart)?;
    let expected: usize = chart.degrees.iter().map(|d| 2 * d - 2).sum();
    let weights: Vec<Rational> = chart.degrees.iter().map(|&d| rat_int(d as i64)).collect();
    let det_deg = g1.det().weighted_degree(&weights);
    certs.push(Certificate::from_bool(
        "Arnold metric: weighted degree of det g1 is sum(2 deg p_a - 2)",
        det_deg == Some(rat_int(expected as i64)),
        || {
            format!(
                "weighted degree {:?}, expected {expected}",
                det_deg.as_ref().map(fmt_rational)
            )
        },
    ));
    let (euler, unity, tau) = fields_and_tau(&chart);
    // n = 1 has p_1 = p_n, so τ = t^1 fixes the scale of e; otherwise e = ∂/∂p_1.
    let unity_scale = if n == 1 { rat_int(2 * h) } else { Rational::one() };
    let g2 = saito_metric(&g1, &unity, &unity_scale)?;
    let det2 = g2.det().as_constant();
    certs.push(Certificate::from_bool(
        "Saito metric: det g2 is a nonzero constant",
        det2.as_ref().is_some_and(|d| !d.is_zero()),
        || format!("det g2 = {}", g2.det()),
    ));
    if !certs.last().unwrap().passed() {
        return Err(Error::Verification("Saito metric degenerates".into()));
    }
    let flat2 = is_flat(&g2, mode)?;
    certs.push(flat2);
    let mut p_pencil = PencilData::new(g1.clone(), g2.clone())?.with_tau(tau.clone());
    p_pencil.d = Some(Rational::one() - rat(2, h));
    let q = check_quasihomogeneous(&p_pencil, mode)?;
    let grad_ok = q.euler == euler;
    certs.push(Certificate::from_bool(
        "invariant coordinates: g1 dtau = sum (deg p_a / h) p_a d/dp_a",
        grad_ok,
        || format!("g1 dtau = {}", q.euler),
    ));
    certs.extend(q.certificates.into_iter().map(|mut c| {
        c.name = format!("invariant coordinates: {}", c.name);
        c
    }));

    let mut scales = vec![Rational::one(); n];
    scales[n - 1] = rat(1, 2 * h);
    if n == 1 {
        scales[0] = rat(1, 2 * h);
    }
    let t = saito_flat_coordinates(&chart, &g2, &scales)?;
    let p_of_t = invert_coordinates(&chart, &t)?;
    let g1t = metric_in_flat(&g1, &t, &p_of_t)?;
    let g2t = metric_in_flat(&g2, &t, &p_of_t)?;
    let eta_ok = g2t.as_constant().is_some();
    certs.push(Certificate::from_bool(
        "flat coordinates: (dt^a, dt^b)_2 constant",
        eta_ok,
        || {
            let bad = (0..n)
                .flat_map(|a| (0..n).map(move |b| (a, b)))
                .find(|&(a, b)| !g2t.entry(a, b).is_constant())
                .unwrap();
            format!("entry {} = {}", index_label(&[bad.0, bad.1]), g2t.entry(bad.0, bad.1))
        },
    ));
    if !eta_ok {
        return Err(Error::GradingObstruction(
            "g2 is not constant in the solved coordinates".into(),
        ));
    }
    let d = Rational::one() - rat(2, h);
    let pencil = PencilData::new(g1t, g2t)?
        .with_tau(QPoly::var(n, n - 1))
        .with_d(d.clone());
    certs.extend(check_flat_pencil(&pencil, mode)?.certificates);
    let qt = check_quasihomogeneous(&pencil, mode)?;
    certs.push(Certificate::from_bool("charge: d = 1 - 2/h", qt.d == d, || {
        format!("inferred d = {}", fmt_rational(&qt.d))
    }));
    certs.extend(qt.certificates);
    let rec = reconstruct_frobenius(&pencil, mode)?;
    certs.push(Certificate::from_bool(
        "potential is a polynomial",
        rec.potential.is_polynomial(),
        || format!("F = {}", rec.potential),
    ));
    let cp = CoxeterPencil {
        chart,
        g1_invariant: g1,
        g2_invariant: g2,
        unity_scale,
        flat_coordinates: t,
        pencil,
        d,
        certificates: certs,
    };
    Ok((cp, rec))
}

impl CoxeterPencil {
    pub fn passed(&self) -> bool {
        all_pass(&self.certificates)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reconstruction::ReconstructionMode;

    #[test]
    fn chart_degrees() {
        assert_eq!(build_orbit_chart(1).unwrap().degrees, vec![2]);
        assert_eq!(build_orbit_chart(2).unwrap().degrees, vec![3, 2]);
        assert_eq!(build_orbit_chart(3).unwrap().degrees, vec![4, 3, 2]);
        assert!(matches!(build_orbit_chart(5), Err(Error::RankOutOfRange(5))));
        assert!(matches!(build_orbit_chart(0), Err(Error::RankOutOfRange(0))));
    }

    #[test]
    fn a1_arnold_and_saito() {
        let c = build_orbit_chart(1).unwrap();
        let g1 = arnold_metric(&c).unwrap();
        assert_eq!(g1.entry(0, 0), &QPoly::var(1, 0).scale(&rat(4, 1)));
        let (_, e, _) = fields_and_tau(&c);
        let g2 = saito_metric(&g1, &e, &Rational::one()).unwrap();
        assert_eq!(g2.as_constant(), Some(vec![vec![rat(4, 1)]]));
    }

    #[test]
    fn a2_arnold_grading() {
        let c = build_orbit_chart(2).unwrap();
        let g1 = arnold_metric(&c).unwrap();
        let w = [rat(3, 1), rat(2, 1)];
        for a in 0..2 {
            for b in 0..2 {
                let expect = rat((c.degrees[a] + c.degrees[b] - 2) as i64, 1);
                assert_eq!(g1.entry(a, b).weighted_degree(&w), Some(expect));
            }
        }
    }

    #[test]
    fn rewrite_rejects_non_invariants() {
        let c = build_orbit_chart(2).unwrap();
        assert!(matches!(
            rewrite_in_invariants(&c, &QPoly::var(2, 0)),
            Err(Error::Rewrite(_))
        ));
    }

    #[test]
    fn a1_pipeline() {
        let (cp, rec) = coxeter_pencil(1, CheckMode::Exact).unwrap();
        assert!(cp.passed(), "{:?}", cp.certificates);
        assert!(rec.passed());
        assert_eq!(cp.d, rat(0, 1));
        assert_eq!(rec.potential, QPoly::var(1, 0).pow(3).scale(&rat(1, 6)));
    }

    #[test]
    fn a2_pipeline() {
        let (cp, rec) = coxeter_pencil(2, CheckMode::Exact).unwrap();
        assert!(cp.passed(), "{:?}", cp.certificates);
        assert!(rec.passed(), "{:?}", rec.certificates);
        assert_eq!(cp.d, rat(1, 3));
        assert_eq!(rec.mode, ReconstructionMode::Regular);
        assert_eq!(
            rec.operators.k,
            vec![vec![rat(1, 1), rat(0, 1)], vec![rat(0, 1), rat(2, 3)]]
        );
        assert_eq!(
            rec.operators.lambda,
            vec![vec![rat(1, 6), rat(0, 1)], vec![rat(0, 1), rat(-1, 6)]]
        );
        assert!(rec.potential.is_polynomial());
    }

    #[test]
    fn a3_pipeline() {
        let (cp, rec) = coxeter_pencil(3, CheckMode::Exact).unwrap();
        assert!(cp.passed(), "{:?}", cp.certificates);
        assert!(rec.passed(), "{:?}", rec.certificates);
        assert_eq!(cp.d, rat(1, 2));
        let diag = |v: [Rational; 3]| -> Matrix {
            (0..3)
                .map(|i| (0..3).map(|j| if i == j { v[i].clone() } else { rat(0, 1) }).collect())
                .collect()
        };
        assert_eq!(rec.operators.k, diag([rat(1, 1), rat(3, 4), rat(1, 2)]));
        assert_eq!(rec.operators.lambda, diag([rat(1, 4), rat(0, 1), rat(-1, 4)]));
        let w = [rat(4, 1), rat(3, 1), rat(2, 1)];
        // L_E F = (3 - d) F with weights deg t / h, so weighted degree (3 - d) h = 10
        assert_eq!(rec.potential.weighted_degree(&w), Some(rat(10, 1)));
    }

    #[test]
    fn a4_pipeline() {
        let (cp, rec) = coxeter_pencil(4, CheckMode::Exact).unwrap();
        assert!(cp.passed(), "{:?}", cp.certificates);
        assert!(rec.passed(), "{:?}", rec.certificates);
        assert_eq!(cp.d, rat(3, 5));
    }
}

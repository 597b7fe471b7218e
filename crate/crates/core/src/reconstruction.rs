//! Inverse construction: from a regular quasihomogeneous flat pencil given in
//! flat coordinates of `g2`, rebuild the multiplication, the Frobenius
//! structure and its potential. Non-regular pencils with a one-dimensional
//! `V_{-1/2}` spanned by `dτ` go through the `d = 1` path.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactalg::parse::ExpGen;
use crate::exactalg::{delta, fmt_rational, linalg, rat, CheckMode, Matrix, QPoly, Rational};
use crate::frobenius::{
    check_quasihomogeneity, fm2_certificate, intersection_form, structure_constants, FrobeniusData, QuasihomConstants,
    StructureConstants,
};
use crate::geometry::{
    check_flat_pencil, check_quasihomogeneous, gradient, levi_civita, Connection, ContraMetric, PencilData, VectorField,
};
use crate::report::{all_pass, index_label, unflatten, Certificate};

/// `Δ_k^{ij}` (equal to the contravariant connection of `g1` in flat
/// coordinates of `g2`) and `Δ^{ijk} = g2^{is} Δ_s^{jk}`, over one common
/// denominator.
#[derive(Clone, Debug)]
pub struct DeltaTensor {
    pub n: usize,
    mixed: Connection,
    up: Vec<QPoly>,
}

impl DeltaTensor {
    /// Wraps a given connection as `Δ_k^{ij}`; `g2` must be constant.
    pub fn from_connection(g2: &Matrix, mixed: Connection) -> Self {
        let n = mixed.n();
        let nv = mixed.nvars();
        let mut up = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut acc = QPoly::zero(nv);
                    for (s, g) in g2[i].iter().enumerate() {
                        if !g.is_zero() {
                            acc += &mixed.num(s, j, k).scale(g);
                        }
                    }
                    up.push(acc);
                }
            }
        }
        DeltaTensor { n, mixed, up }
    }

    /// Numerator of `Δ_k^{ij}`.
    pub fn mixed_num(&self, k: usize, i: usize, j: usize) -> &QPoly {
        self.mixed.num(k, i, j)
    }

    /// Numerator of `Δ^{ijk}`.
    pub fn up_num(&self, i: usize, j: usize, k: usize) -> &QPoly {
        &self.up[(i * self.n + j) * self.n + k]
    }

    pub fn den(&self) -> &QPoly {
        self.mixed.den()
    }

    pub fn connection(&self) -> &Connection {
        &self.mixed
    }
}

pub(crate) fn constant_g2(p: &PencilData) -> Result<Matrix> {
    p.g2.as_constant().ok_or_else(|| {
        let n = p.n();
        let (i, j) = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .find(|&(i, j)| !p.g2.entry(i, j).is_constant())
            .unwrap_or((0, 0));
        Error::NotFlatCoordinates(format!(
            "g2{} = {} is not constant",
            index_label(&[i, j]),
            p.g2.entry(i, j)
        ))
    })
}

pub fn delta_tensor(p: &PencilData) -> Result<DeltaTensor> {
    let g2 = constant_g2(p)?;
    if linalg::det(&g2).is_zero() {
        return Err(Error::SingularMetric);
    }
    Ok(DeltaTensor::from_connection(&g2, levi_civita(&p.g1)?))
}

/// Euler and unity fields, their linear parts and the charge, read off a
/// pencil that carries `τ`.
struct Fields {
    euler: VectorField,
    unity: VectorField,
    d: Rational,
}

fn fields(p: &PencilData, mode: CheckMode) -> Result<(Fields, Vec<Certificate>)> {
    let q = check_quasihomogeneous(p, mode)?;
    let certs = q.certificates.clone();
    if !all_pass(&certs) {
        let w = certs
            .iter()
            .find(|c| !c.passed())
            .and_then(|c| c.witness.clone())
            .unwrap_or_default();
        return Err(Error::NotQuasihomogeneous(w));
    }
    Ok((
        Fields {
            euler: q.euler,
            unity: q.unity,
            d: q.d,
        },
        certs,
    ))
}

/// Certifies the symmetry identities for both metrics, right-symmetry, the
/// curl condition and, when `τ` is present, `L_E Δ = (d-1)Δ` and `L_e Δ = 0`.
pub fn check_delta_properties(p: &PencilData, dt: &DeltaTensor, mode: CheckMode) -> Result<Vec<Certificate>> {
    let n = dt.n;
    let g2 = constant_g2(p)?;
    let den = dt.den().clone();
    let nv = den.nvars();
    let dens = [&den];
    let mut certs = Vec::new();
    let n3 = |i: usize| format!("(a,b,c) = {}", index_label(&unflatten(i, n, 3)));

    // (Δ(u,v),w)_1 = (u,Δ(w,v))_1 on basis covectors dt^a, dt^b, dt^c
    let mut sym1 = Vec::new();
    let mut sym2 = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let mut r1 = QPoly::zero(nv);
                let mut r2 = QPoly::zero(nv);
                for k in 0..n {
                    r1 += &(dt.mixed_num(k, a, b) * p.g1.entry(k, c));
                    r1 -= &(p.g1.entry(a, k) * dt.mixed_num(k, c, b));
                    if !g2[k][c].is_zero() {
                        r2 += &dt.mixed_num(k, a, b).scale(&g2[k][c]);
                    }
                    if !g2[a][k].is_zero() {
                        r2 -= &dt.mixed_num(k, c, b).scale(&g2[a][k]);
                    }
                }
                sym1.push(r1);
                sym2.push(r2);
            }
        }
    }
    certs.push(Certificate::vanishing(
        "Delta: (D(u,v),w)_1 = (u,D(w,v))_1",
        &sym1,
        n3,
        &dens,
        mode,
    )?);
    certs.push(Certificate::vanishing(
        "Delta: (D(u,v),w)_2 = (u,D(w,v))_2",
        &sym2,
        n3,
        &dens,
        mode,
    )?);

    // Δ(Δ(u,v),w) = Δ(Δ(u,w),v)
    let mut rs = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for m in 0..n {
                    let mut r = QPoly::zero(nv);
                    for k in 0..n {
                        r += &(dt.mixed_num(k, a, b) * dt.mixed_num(m, k, c));
                        r -= &(dt.mixed_num(k, a, c) * dt.mixed_num(m, k, b));
                    }
                    rs.push(r);
                }
            }
        }
    }
    certs.push(Certificate::vanishing(
        "Delta: right-symmetry D(D(u,v),w) = D(D(u,w),v)",
        &rs,
        |i| format!("(a,b,c,m) = {}", index_label(&unflatten(i, n, 4))),
        &dens,
        mode,
    )?);

    // ∂_s Δ_l^{jk} = ∂_l Δ_s^{jk}
    let dd: Vec<QPoly> = (0..n).map(|s| den.diff(s)).collect();
    let mut curl = Vec::new();
    for s in 0..n {
        for l in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let nl = dt.mixed_num(l, j, k);
                    let ns = dt.mixed_num(s, j, k);
                    let mut r = &(&nl.diff(s) - &ns.diff(l)) * &den;
                    r -= &(&(nl * &dd[s]) - &(ns * &dd[l]));
                    curl.push(r);
                }
            }
        }
    }
    certs.push(Certificate::vanishing(
        "Delta: curl condition d_s D_l^(jk) = d_l D_s^(jk)",
        &curl,
        |i| format!("(s,l,j,k) = {}", index_label(&unflatten(i, n, 4))),
        &dens,
        mode,
    )?);

    if p.tau.is_none() {
        certs.push(Certificate::skipped("Delta: L_E D = (d-1) D", "pencil has no tau"));
        certs.push(Certificate::skipped("Delta: L_e D = 0", "pencil has no tau"));
        return Ok(certs);
    }
    let (f, _) = fields(p, mode)?;
    let dm1 = &f.d - Rational::one();
    // K[ε][α] = ∂_ε E^α as functions
    let k: Vec<Vec<QPoly>> = (0..n)
        .map(|e| (0..n).map(|a| f.euler.components[a].diff(e)).collect())
        .collect();
    let ed = f.euler.apply(&den);
    let ud = f.unity.apply(&den);
    let mut le = Vec::new();
    let mut lu = Vec::new();
    for g in 0..n {
        for a in 0..n {
            for b in 0..n {
                let nab = dt.mixed_num(g, a, b);
                let mut lin = QPoly::zero(nv);
                for e in 0..n {
                    lin -= &(&k[e][a] * dt.mixed_num(g, e, b));
                    lin -= &(dt.mixed_num(g, a, e) * &k[e][b]);
                    lin += &(&k[g][e] * dt.mixed_num(e, a, b));
                }
                let mut r = &(&f.euler.apply(nab) * &den) - &(nab * &ed);
                r += &(&lin * &den);
                r -= &(nab * &den).scale(&dm1);
                le.push(r);
                lu.push(&(&f.unity.apply(nab) * &den) - &(nab * &ud));
            }
        }
    }
    let lab = |i: usize| format!("(gamma,alpha,beta) = {}", index_label(&unflatten(i, n, 3)));
    certs.push(Certificate::vanishing("Delta: L_E D = (d-1) D", &le, lab, &dens, mode)?);
    certs.push(Certificate::vanishing("Delta: L_e D = 0", &lu, lab, &dens, mode)?);
    Ok(certs)
}

/// One root subspace of `Λ` acting on covectors.
#[derive(Clone, Debug, Serialize)]
pub struct RootSpace {
    #[serde(serialize_with = "crate::report::ser_rational")]
    pub eigenvalue: Rational,
    pub multiplicity: usize,
    #[serde(serialize_with = "crate::report::ser_matrix")]
    pub basis: Matrix,
}

/// Constant operators of a quasihomogeneous flat pencil. Matrices act on
/// covectors: `(K u)_α = K[α][β] u_β` with `K[α][β] = ∂_α E^β`.
#[derive(Clone, Debug)]
pub struct OperatorPair {
    pub k: Matrix,
    pub r: Matrix,
    pub lambda: Matrix,
    pub d: Rational,
    /// Constant components of `dτ`.
    pub dtau: Vec<Rational>,
    /// Constant components of `e = g2 dτ`.
    pub unity: Vec<Rational>,
    /// Root decomposition of `Λ`; `None` when the spectrum is not rational.
    pub spectrum: Option<Vec<RootSpace>>,
    pub certificates: Vec<Certificate>,
}

impl OperatorPair {
    pub fn is_regular(&self) -> bool {
        !linalg::det(&self.r).is_zero()
    }
}

fn constant_gradient(tau: &QPoly, n: usize) -> Result<Vec<Rational>> {
    for i in 0..n {
        for j in 0..n {
            let h = tau.diff(i).diff(j);
            if !h.is_zero() {
                return Err(Error::TauHessianNonzero(format!("d{}d{} tau = {}", i + 1, j + 1, h)));
            }
        }
    }
    Ok((0..n)
        .map(|i| tau.diff(i).as_constant().expect("Hessian vanishes"))
        .collect())
}

fn tau_of(p: &PencilData) -> Result<&QPoly> {
    p.tau
        .as_ref()
        .ok_or_else(|| Error::Input("reconstruction needs tau".into()))
}

/// Zero-based index `u` when `v` is the unit vector `δ_u`.
fn unit_index(v: &[Rational]) -> Option<usize> {
    let nz: Vec<usize> = (0..v.len()).filter(|&i| !v[i].is_zero()).collect();
    match nz.as_slice() {
        [u] if v[*u].is_one() => Some(*u),
        _ => None,
    }
}

pub fn operator_pair(p: &PencilData, mode: CheckMode) -> Result<OperatorPair> {
    let n = p.n();
    let g2 = constant_g2(p)?;
    let dtau = constant_gradient(tau_of(p)?, n)?;
    let euler = gradient(&p.g1, tau_of(p)?);
    for (a, comp) in euler.components.iter().enumerate() {
        for i in 0..n {
            for j in 0..n {
                let h = comp.diff(i).diff(j);
                if !h.is_zero() {
                    return Err(Error::NonlinearEuler(format!(
                        "d{}d{} E^{} = {}",
                        i + 1,
                        j + 1,
                        a + 1,
                        h
                    )));
                }
            }
        }
    }
    let (f, mut certs) = fields(p, mode)?;
    let d = f.d;
    let k: Matrix = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| euler.components[b].diff(a).as_constant().expect("affine"))
                .collect()
        })
        .collect();
    let half = (&d - Rational::one()) / Rational::from_integer(2.into());
    let r: Matrix = (0..n)
        .map(|a| (0..n).map(|b| &half * delta(a, b) + &k[a][b]).collect())
        .collect();
    let lambda: Matrix = (0..n)
        .map(|a| (0..n).map(|b| &r[a][b] - rat(1, 2) * delta(a, b)).collect())
        .collect();
    let unity = linalg::mat_vec(&g2, &dtau);

    let kt = linalg::mat_vec(&k, &dtau);
    let one_minus_d = Rational::one() - &d;
    let ok = kt.iter().zip(&dtau).all(|(x, t)| *x == &one_minus_d * t);
    certs.push(Certificate::from_bool("operators: K dtau = (1-d) dtau", ok, || {
        format!("K dtau = {:?}", kt.iter().map(fmt_rational).collect::<Vec<_>>())
    }));

    let skew = linalg::mat_add(
        &linalg::mat_mul(&linalg::transpose(&lambda), &g2),
        &linalg::mat_mul(&g2, &lambda),
    );
    certs.push(Certificate::from_bool(
        "operators: Lambda skew-symmetric for g2",
        linalg::is_zero_matrix(&skew),
        || "Lambda^T g2 + g2 Lambda != 0".into(),
    ));

    let spectrum = linalg::rational_roots(&linalg::char_poly(&lambda)).and_then(|(roots, rest)| {
        (rest == 0).then(|| {
            roots
                .into_iter()
                .map(|(ev, m)| RootSpace {
                    basis: linalg::root_subspace(&lambda, &ev, m),
                    eigenvalue: ev,
                    multiplicity: m,
                })
                .collect::<Vec<_>>()
        })
    });
    certs.push(match &spectrum {
        None => Certificate::skipped(
            "operators: root subspaces of Lambda paired by g2",
            "irrational spectrum",
        ),
        Some(sp) => {
            let pair = |u: &Matrix, v: &Matrix| -> Matrix {
                u.iter()
                    .map(|x| {
                        v.iter()
                            .map(|y| linalg::vec_mat(x, &g2).iter().zip(y).map(|(a, b)| a * b).sum())
                            .collect()
                    })
                    .collect()
            };
            let mut bad = None;
            for a in sp {
                for b in sp {
                    let m = pair(&a.basis, &b.basis);
                    let sum = &a.eigenvalue + &b.eigenvalue;
                    if !sum.is_zero() && !linalg::is_zero_matrix(&m) {
                        bad = Some(format!(
                            "V_{} and V_{} are not orthogonal",
                            fmt_rational(&a.eigenvalue),
                            fmt_rational(&b.eigenvalue)
                        ));
                    }
                    if sum.is_zero() && linalg::rank(&m) != a.basis.len() {
                        bad = Some(format!(
                            "pairing V_{} x V_{} degenerates",
                            fmt_rational(&a.eigenvalue),
                            fmt_rational(&b.eigenvalue)
                        ));
                    }
                }
            }
            Certificate::from_bool(
                "operators: root subspaces of Lambda paired by g2",
                bad.is_none(),
                || bad.clone().unwrap_or_default(),
            )
        }
    });
    Ok(OperatorPair {
        k,
        r,
        lambda,
        d,
        dtau,
        unity,
        spectrum,
        certificates: certs,
    })
}

/// A pencil in normalized flat coordinates `s = P t`, with the unity
/// field equal to `∂/∂s^u`.
#[derive(Clone, Debug)]
pub struct Normalized {
    pub pencil: PencilData,
    /// `s = P t`.
    pub p: Matrix,
    /// Zero-based unity index.
    pub unity_index: usize,
}

/// `g'^{ab}(s) = P^a_i P^b_j g^{ij}(P^{-1} s)`.
pub fn transform_metric(g: &ContraMetric, p: &Matrix, pinv: &Matrix) -> Result<ContraMetric> {
    let n = g.n();
    let sub: Vec<Vec<QPoly>> = (0..n)
        .map(|i| (0..n).map(|j| g.entry(i, j).linear_substitute(pinv)).collect())
        .collect();
    let nv = g.nvars();
    let out: Vec<Vec<QPoly>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    let mut acc = QPoly::zero(nv);
                    for i in 0..n {
                        for j in 0..n {
                            let c = &p[a][i] * &p[b][j];
                            if !c.is_zero() {
                                acc += &sub[i][j].scale(&c);
                            }
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect();
    ContraMetric::new(out)
}

/// Linear change of flat coordinates after which `e = ∂/∂s^u` and
/// `τ = η_{uα} s^α` up to a constant. When `e` is already a coordinate
/// field the change is the identity. Otherwise, if `(e,e) = 0` the unity
/// becomes `∂/∂s^1` and `τ = s^n`; if `(e,e) ≠ 0` it becomes `∂/∂s^n`.
pub fn normalize_flat_coordinates(p: &PencilData) -> Result<Normalized> {
    let n = p.n();
    let g2 = constant_g2(p)?;
    let tau = tau_of(p)?;
    let dtau = constant_gradient(tau, n)?;
    let e = linalg::mat_vec(&g2, &dtau);
    if e.iter().all(Zero::is_zero) {
        return Err(Error::NoValidNormalization(
            "the unity field e = g2 dtau vanishes".into(),
        ));
    }
    if let Some(u) = unit_index(&e) {
        return Ok(Normalized {
            pencil: p.clone(),
            p: linalg::identity(n),
            unity_index: u,
        });
    }
    let c: Rational = dtau.iter().zip(&e).map(|(a, b)| a * b).sum();
    let ann = linalg::null_space(std::slice::from_ref(&e), n);
    let (rows, u) = if c.is_zero() {
        // ann(e) contains dτ; complete dτ to a basis of ann(e)
        let mut basis = vec![dtau.clone()];
        for b in &ann {
            if basis.len() == n - 1 {
                break;
            }
            let mut trial = basis.clone();
            trial.push(b.clone());
            if linalg::rank(&trial) == trial.len() {
                basis = trial;
            }
        }
        let rest: Vec<Vec<Rational>> = basis.into_iter().skip(1).collect();
        let k = (0..n).find(|&i| !e[i].is_zero()).expect("e nonzero");
        let mut w = vec![Rational::zero(); n];
        w[k] = e[k].recip();
        let mut rows = vec![w];
        rows.extend(rest);
        rows.push(dtau.clone());
        (rows, 0)
    } else {
        let mut rows = ann;
        rows.push(dtau.iter().map(|x| x / &c).collect());
        (rows, n - 1)
    };
    let pinv =
        linalg::inverse(&rows).ok_or_else(|| Error::NoValidNormalization("normalizing change is singular".into()))?;
    let g1 = transform_metric(&p.g1, &rows, &pinv)?;
    let g2n = transform_metric(&p.g2, &rows, &pinv)?;
    let mut pencil = PencilData::new(g1, g2n)?.with_tau(tau.linear_substitute(&pinv));
    pencil.d = p.d.clone();
    Ok(Normalized {
        pencil,
        p: rows,
        unity_index: u,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReconstructionMode {
    Regular,
    D1Remark,
}

#[derive(Clone, Debug)]
pub struct Multiplication {
    pub c: StructureConstants,
    pub mode: ReconstructionMode,
    pub certificates: Vec<Certificate>,
}

fn poly_delta(dt: &DeltaTensor) -> Result<Vec<QPoly>> {
    let n = dt.n;
    let mut out = Vec::with_capacity(n * n * n);
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                out.push(dt.connection().poly(k, i, j).ok_or_else(|| {
                    Error::Verification(format!(
                        "Delta_{}^({},{}) is not a quasi-polynomial",
                        k + 1,
                        i + 1,
                        j + 1
                    ))
                })?);
            }
        }
    }
    Ok(out)
}

/// Multiplication of covectors `u·v = Δ(u, R^{-1} v)`, or on the `d = 1`
/// path `u·(R w + a dτ) = Δ(u, w) + a u`.
pub fn multiplication(p: &PencilData, ops: &OperatorPair, dt: &DeltaTensor, mode: CheckMode) -> Result<Multiplication> {
    let n = dt.n;
    let g2 = constant_g2(p)?;
    let delta_p = poly_delta(dt)?;
    let nv = delta_p[0].nvars();
    let at = |k: usize, i: usize, j: usize| (k * n + i) * n + j;
    // columns[β] = (w_β, a_β) with dt^β = R w_β + a_β dτ
    let (cols, rmode): (Vec<(Vec<Rational>, Rational)>, _) = if let Some(rinv) = linalg::inverse(&ops.r) {
        (
            (0..n)
                .map(|b| ((0..n).map(|e| rinv[e][b].clone()).collect(), Rational::zero()))
                .collect(),
            ReconstructionMode::Regular,
        )
    } else {
        let cp = linalg::char_poly(&ops.r);
        let mult = cp.iter().take_while(|c| c.is_zero()).count();
        let ker = linalg::root_subspace(&ops.r, &Rational::zero(), mult);
        if ker.len() != 1 {
            return Err(Error::NotRegular { kernel_dim: ker.len() });
        }
        if linalg::rank(&[ker[0].clone(), ops.dtau.clone()]) != 1 {
            return Err(Error::KernelNotDtau);
        }
        let a: Matrix = (0..n)
            .map(|i| {
                let mut row = ops.r[i].clone();
                row.push(ops.dtau[i].clone());
                row
            })
            .collect();
        let cols = (0..n)
            .map(|b| {
                let rhs: Vec<Rational> = (0..n).map(|i| delta(i, b)).collect();
                let x = linalg::solve_particular(&a, &rhs)
                    .ok_or_else(|| Error::Verification("dt^beta is not in R(V) + span(dtau)".into()))?;
                Ok((x[..n].to_vec(), x[n].clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        (cols, ReconstructionMode::D1Remark)
    };
    let mut c = vec![QPoly::zero(nv); n * n * n];
    for a in 0..n {
        for (b, (w, coef)) in cols.iter().enumerate() {
            for g in 0..n {
                let mut acc = QPoly::zero(nv);
                for (e, we) in w.iter().enumerate() {
                    if !we.is_zero() {
                        acc += &delta_p[at(g, a, e)].scale(we);
                    }
                }
                if a == g && !coef.is_zero() {
                    acc += &QPoly::constant(nv, coef.clone());
                }
                c[at(a, b, g)] = acc;
            }
        }
    }
    let eta_low = linalg::inverse(&g2).ok_or(Error::SingularMetric)?;
    let sc = StructureConstants::from_mixed(n, c, &eta_low);
    let mut certs = Vec::new();
    let n3 = |i: usize| format!("(alpha,beta,gamma) = {}", index_label(&unflatten(i, n, 3)));

    let comm: Vec<QPoly> = (0..n * n * n)
        .map(|i| {
            let v = unflatten(i, n, 3);
            sc.mixed(v[0], v[1], v[2]) - sc.mixed(v[1], v[0], v[2])
        })
        .collect();
    let cert = Certificate::vanishing("multiplication: commutative", &comm, n3, &[], mode)?;
    if !cert.passed() {
        return Err(Error::Commutativity(cert.witness.unwrap_or_default()));
    }
    certs.push(cert);

    let mut assoc = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for g in 0..n {
                for m in 0..n {
                    let mut r = QPoly::zero(nv);
                    for e in 0..n {
                        r += &(sc.mixed(a, e, m) * sc.mixed(b, g, e));
                        r -= &(sc.mixed(b, e, m) * sc.mixed(a, g, e));
                    }
                    assoc.push(r);
                }
            }
        }
    }
    certs.push(Certificate::vanishing(
        "multiplication: associative",
        &assoc,
        |i| format!("(alpha,beta,gamma,mu) = {}", index_label(&unflatten(i, n, 4))),
        &[],
        mode,
    )?);

    let mut unit = Vec::new();
    for a in 0..n {
        for g in 0..n {
            let mut r = QPoly::constant(nv, -delta(a, g));
            for (nu, t) in ops.dtau.iter().enumerate() {
                if !t.is_zero() {
                    r += &sc.mixed(a, nu, g).scale(t);
                }
            }
            unit.push(r);
        }
    }
    certs.push(Certificate::vanishing(
        "multiplication: dtau is the unity",
        &unit,
        |i| format!("(alpha,gamma) = {}", index_label(&unflatten(i, n, 2))),
        &[],
        mode,
    )?);

    // u·R(v) + R(u)·v = d(u,v) for u = dt^α, v = dt^β
    let mut key = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for g in 0..n {
                let mut r = -p.g1.entry(a, b).diff(g);
                for i in 0..n {
                    r += &sc.mixed(a, i, g).scale(&ops.r[i][b]);
                    r += &sc.mixed(i, b, g).scale(&ops.r[i][a]);
                }
                key.push(r);
            }
        }
    }
    certs.push(Certificate::vanishing(
        "multiplication: u.R(v) + R(u).v = d(u,v)_1",
        &key,
        |i| format!("(alpha,beta,gamma) = {}", index_label(&unflatten(i, n, 3))),
        &[],
        mode,
    )?);
    Ok(Multiplication {
        c: sc,
        mode: rmode,
        certificates: certs,
    })
}

/// Closed 1-form `ω` integrated along coordinate axes, without constant.
pub(crate) fn integrate_gradient(omega: &[QPoly]) -> QPoly {
    let nv = omega[0].nvars();
    let mut f = QPoly::zero(nv);
    for (g, w) in omega.iter().enumerate() {
        let r = w - &f.diff(g);
        // drop the part already accounted for (free of t^g after subtraction)
        f += &r.integrate(g);
    }
    f
}

/// `F` with `∂_α∂_β∂_γ F = c_{αβγ}`, quadratic and lower terms set to zero.
pub fn recover_potential(sc: &StructureConstants, mode: CheckMode) -> Result<QPoly> {
    let n = sc.n;
    let cert = fm2_certificate(sc, mode)?;
    if !cert.passed() {
        return Err(Error::Integrability(cert.witness.unwrap_or_default()));
    }
    let h: Vec<Vec<QPoly>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    let w: Vec<QPoly> = (0..n).map(|g| sc.low(a, b, g).clone()).collect();
                    integrate_gradient(&w)
                })
                .collect()
        })
        .collect();
    let g: Vec<QPoly> = (0..n).map(|a| integrate_gradient(&h[a])).collect();
    let f = integrate_gradient(&g).strip_quadratic();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let r = &f.diff(a).diff(b).diff(c) - sc.low(a, b, c);
                if !r.is_zero() {
                    return Err(Error::Integrability(format!(
                        "third derivative {} of the integrated potential differs by {}",
                        index_label(&[a, b, c]),
                        r
                    )));
                }
            }
        }
    }
    Ok(f)
}

/// One generator per coordinate carrying exponentials, with rate equal to
/// the gcd of the rates that occur.
pub fn expgens_for<'a>(polys: impl IntoIterator<Item = &'a QPoly>) -> Vec<ExpGen> {
    use num_integer::Integer;
    let mut out: Vec<ExpGen> = Vec::new();
    for (var, rate) in polys.into_iter().flat_map(QPoly::exp_generators) {
        let rate = if rate < Rational::zero() { -rate } else { rate };
        match out.iter_mut().find(|g| g.var == var) {
            Some(g) => {
                let den = g.rate.denom().lcm(rate.denom());
                let a = g.rate.numer() * (&den / g.rate.denom());
                let b = rate.numer() * (&den / rate.denom());
                g.rate = Rational::new(a.gcd(&b), den);
            }
            None => out.push(ExpGen { var, rate }),
        }
    }
    out.sort_by_key(|g| g.var);
    out
}

#[derive(Clone, Debug)]
pub struct ReconstructionResult {
    /// Pencil in the normalized flat coordinates.
    pub pencil: PencilData,
    /// `s = P t` from the input coordinates.
    pub transform: Matrix,
    pub operators: OperatorPair,
    pub structure: StructureConstants,
    pub potential: QPoly,
    pub frobenius: FrobeniusData,
    pub constants: QuasihomConstants,
    pub mode: ReconstructionMode,
    pub certificates: Vec<Certificate>,
}

impl ReconstructionResult {
    pub fn passed(&self) -> bool {
        all_pass(&self.certificates)
    }
}

pub fn reconstruct_frobenius(p: &PencilData, mode: CheckMode) -> Result<ReconstructionResult> {
    let n = p.n();
    let mut certs = check_flat_pencil(p, mode)?.certificates;
    if let Some(c) = certs.iter().find(|c| !c.passed()) {
        return Err(Error::NotFlat(format!(
            "{}: {}",
            c.name,
            c.witness.clone().unwrap_or_default()
        )));
    }
    constant_g2(p)?;
    let norm = normalize_flat_coordinates(p)?;
    let q = &norm.pencil;
    let u = norm.unity_index;
    let dt = delta_tensor(q)?;
    let ops = operator_pair(q, mode)?;
    certs.extend(ops.certificates.iter().cloned());
    certs.extend(check_delta_properties(q, &dt, mode)?);

    // slices Δ(·, dτ) = (1-d)/2 id and Δ(dτ, ·) = R
    let delta_p = poly_delta(&dt)?;
    let at = |k: usize, i: usize, j: usize| (k * n + i) * n + j;
    let half = (Rational::one() - &ops.d) * rat(1, 2);
    let mut right = Vec::new();
    let mut left = Vec::new();
    for b in 0..n {
        for a in 0..n {
            let mut r1 = QPoly::constant(n, -(&half * delta(a, b)));
            let mut r2 = QPoly::constant(n, -ops.r[b][a].clone());
            for (nu, t) in ops.dtau.iter().enumerate() {
                if !t.is_zero() {
                    r1 += &delta_p[at(b, a, nu)].scale(t);
                    r2 += &delta_p[at(b, nu, a)].scale(t);
                }
            }
            right.push(r1);
            left.push(r2);
        }
    }
    let lab = |i: usize| format!("(beta,alpha) = {}", index_label(&unflatten(i, n, 2)));
    certs.push(Certificate::vanishing(
        "slices: Delta(u, dtau) = (1-d)/2 u",
        &right,
        lab,
        &[],
        mode,
    )?);
    certs.push(Certificate::vanishing(
        "slices: Delta(dtau, u) = R(u)",
        &left,
        lab,
        &[],
        mode,
    )?);

    let mult = multiplication(q, &ops, &dt, mode)?;
    certs.extend(mult.certificates.iter().cloned());
    if mult.mode == ReconstructionMode::Regular {
        certs.push(Certificate::from_bool(
            "regular pencil has d != 1",
            !ops.d.is_one(),
            || "d = 1 with det R != 0".into(),
        ));
    }
    let potential = recover_potential(&mult.c, mode)?;
    certs.push(Certificate::pass("potential: d^3 F = c_abg", CheckMode::Exact));

    let g2 = constant_g2(q)?;
    let eta = linalg::inverse(&g2).ok_or(Error::SingularMetric)?;
    let euler = gradient(&q.g1, q.tau.as_ref().expect("normalized pencil keeps tau"));
    let zero = vec![Rational::zero(); n];
    let frobenius = FrobeniusData {
        n,
        eta,
        euler_linear: (0..n).map(|a| (0..n).map(|b| ops.k[b][a].clone()).collect()).collect(),
        euler_constant: euler.components.iter().map(|c| c.eval(&zero, &[])).collect(),
        unity_index: u,
        d: ops.d.clone(),
        expgens: expgens_for([&potential]),
        potential: potential.clone(),
    };

    let sc = structure_constants(&frobenius)?;
    let res: Vec<QPoly> = sc
        .mixed_entries()
        .iter()
        .zip(mult.c.mixed_entries())
        .map(|(a, b)| a - b)
        .collect();
    certs.push(Certificate::vanishing(
        "round trip: structure constants of F equal the multiplication",
        &res,
        |i| format!("(alpha,beta,gamma) = {}", index_label(&unflatten(i, n, 3))),
        &[],
        mode,
    )?);
    let (constants, qc) = check_quasihomogeneity(&frobenius)?;
    certs.extend(qc);
    let form = intersection_form(&frobenius, mode)?;
    certs.extend(form.certificates.iter().cloned());
    for a in 0..n {
        for b in 0..n {
            let r = form.metric.entry(a, b) - q.g1.entry(a, b);
            if !r.is_zero() {
                return Err(Error::ClosingIdentity(format!(
                    "entry {}: difference {}",
                    index_label(&[a, b]),
                    r
                )));
            }
        }
    }
    certs.push(Certificate::pass(
        "closing identity: intersection form equals g1",
        CheckMode::Exact,
    ));
    Ok(ReconstructionResult {
        pencil: q.clone(),
        transform: norm.p,
        operators: ops,
        structure: mult.c,
        potential,
        frobenius,
        constants,
        mode: mult.mode,
        certificates: certs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::parse::parse_expr;
    use crate::exactalg::rat_int;
    use crate::frobenius::to_flat_pencil;

    fn anti(n: usize) -> Matrix {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i + j == n - 1 { rat(1, 1) } else { rat(0, 1) })
                    .collect()
            })
            .collect()
    }

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

    fn cp1() -> FrobeniusData {
        let eg = vec![ExpGen::one(1)];
        FrobeniusData {
            n: 2,
            eta: anti(2),
            potential: parse_expr("1/2*t1^2*t2 + exp(t2)", 2, &eg).unwrap(),
            euler_linear: vec![vec![rat(1, 1), rat(0, 1)], vec![rat(0, 1), rat(0, 1)]],
            euler_constant: vec![rat(0, 1), rat(2, 1)],
            unity_index: 0,
            d: rat(1, 1),
            expgens: eg,
        }
    }

    fn kernel2() -> FrobeniusData {
        let mut k = linalg::zeros(4, 4);
        k[0][0] = rat(1, 1);
        k[1][1] = rat(1, 1);
        FrobeniusData {
            n: 4,
            eta: anti(4),
            potential: parse_expr("1/2*t1^2*t4 + t1*t2*t3", 4, &[]).unwrap(),
            euler_linear: k,
            euler_constant: vec![rat(0, 1); 4],
            unity_index: 0,
            d: rat(1, 1),
            expgens: vec![],
        }
    }

    #[test]
    fn n1_delta_and_operators() {
        let p = to_flat_pencil(&n1_cubic(), CheckMode::Exact).unwrap();
        let dt = delta_tensor(&p).unwrap();
        assert_eq!(dt.connection().poly(0, 0, 0), Some(QPoly::constant(1, rat(1, 2))));
        assert_eq!(dt.up_num(0, 0, 0), &QPoly::constant(1, rat(1, 2)));
        assert!(all_pass(&check_delta_properties(&p, &dt, CheckMode::Exact).unwrap()));
        let ops = operator_pair(&p, CheckMode::Exact).unwrap();
        assert_eq!(ops.k, vec![vec![rat(1, 1)]]);
        assert_eq!(ops.r, vec![vec![rat(1, 2)]]);
        assert_eq!(ops.lambda, vec![vec![rat(0, 1)]]);
        assert!(all_pass(&ops.certificates));
    }

    #[test]
    fn constant_pencil_has_zero_delta() {
        let i2 = linalg::identity(2);
        let p = PencilData::new(
            ContraMetric::constant(&anti(2), 2).unwrap(),
            ContraMetric::constant(&i2, 2).unwrap(),
        )
        .unwrap();
        assert!(delta_tensor(&p).unwrap().connection().is_zero());
    }

    #[test]
    fn nonconstant_g2_rejected() {
        let g1 = ContraMetric::new(vec![vec![QPoly::one(1)]]).unwrap();
        let g2 = ContraMetric::new(vec![vec![QPoly::var(1, 0)]]).unwrap();
        let p = PencilData::new(g1, g2).unwrap();
        assert!(matches!(delta_tensor(&p), Err(Error::NotFlatCoordinates(_))));
    }

    #[test]
    fn perturbed_delta_breaks_curl() {
        let p = to_flat_pencil(&cp1(), CheckMode::Exact).unwrap();
        let dt = delta_tensor(&p).unwrap();
        let mut entries: Vec<QPoly> = Vec::new();
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    entries.push(dt.connection().poly(k, i, j).unwrap());
                }
            }
        }
        entries[0] += &QPoly::var(2, 1);
        let bad = DeltaTensor::from_connection(&anti(2), Connection::from_poly(2, entries));
        let certs = check_delta_properties(&p, &bad, CheckMode::Exact).unwrap();
        let curl = certs.iter().find(|c| c.name.contains("curl")).unwrap();
        assert!(!curl.passed());
        assert!(curl.witness.as_ref().unwrap().contains("(s,l,j,k) = (1,2,1,1)"));
    }

    #[test]
    fn cp1_operators_are_singular() {
        let p = to_flat_pencil(&cp1(), CheckMode::Exact).unwrap();
        let ops = operator_pair(&p, CheckMode::Exact).unwrap();
        assert_eq!(ops.r, vec![vec![rat(1, 1), rat(0, 1)], vec![rat(0, 1), rat(0, 1)]]);
        assert!(!ops.is_regular());
    }

    #[test]
    fn normalization_is_idempotent_on_normalized_input() {
        let p = to_flat_pencil(&cp1(), CheckMode::Exact).unwrap();
        let nrm = normalize_flat_coordinates(&p).unwrap();
        assert_eq!(nrm.p, linalg::identity(2));
        assert_eq!(nrm.unity_index, 0);
        let nrm2 = normalize_flat_coordinates(&nrm.pencil).unwrap();
        assert_eq!(nrm2.p, linalg::identity(2));
    }

    #[test]
    fn normalization_moves_unity_to_a_coordinate() {
        // CP1 pencil in coordinates s1 = t1 + t2, s2 = t2
        let p = to_flat_pencil(&cp1(), CheckMode::Exact).unwrap();
        let pm = vec![vec![rat(1, 1), rat(1, 1)], vec![rat(0, 1), rat(1, 1)]];
        let pinv = linalg::inverse(&pm).unwrap();
        let moved = PencilData::new(
            transform_metric(&p.g1, &pm, &pinv).unwrap(),
            transform_metric(&p.g2, &pm, &pinv).unwrap(),
        )
        .unwrap()
        .with_tau(p.tau.as_ref().unwrap().linear_substitute(&pinv));
        let nrm = normalize_flat_coordinates(&moved).unwrap();
        let e = linalg::mat_vec(
            &nrm.pencil.g2.as_constant().unwrap(),
            &constant_gradient(nrm.pencil.tau.as_ref().unwrap(), 2).unwrap(),
        );
        assert_eq!(unit_index(&e), Some(nrm.unity_index));
        let r = reconstruct_frobenius(&moved, CheckMode::Exact).unwrap();
        assert!(r.passed());
        assert_eq!(r.mode, ReconstructionMode::D1Remark);
    }

    #[test]
    fn round_trip_n1() {
        let m = n1_cubic();
        let p = to_flat_pencil(&m, CheckMode::Exact).unwrap();
        let r = reconstruct_frobenius(&p, CheckMode::Exact).unwrap();
        assert!(r.passed(), "{:?}", r.certificates);
        assert_eq!(r.mode, ReconstructionMode::Regular);
        assert_eq!(r.potential, m.potential);
        assert_eq!(r.frobenius, m);
        assert_eq!(r.structure.mixed(0, 0, 0), &QPoly::one(1));
    }

    #[test]
    fn round_trip_cp1_takes_remark_path() {
        let m = cp1();
        let p = to_flat_pencil(&m, CheckMode::Exact).unwrap();
        let r = reconstruct_frobenius(&p, CheckMode::Exact).unwrap();
        assert!(r.passed(), "{:?}", r.certificates);
        assert_eq!(r.mode, ReconstructionMode::D1Remark);
        assert_eq!(r.frobenius, m);
        assert_eq!(
            r.constants.a,
            vec![vec![rat_int(2), rat(0, 1)], vec![rat(0, 1), rat(0, 1)]]
        );
    }

    #[test]
    fn kernel_of_dimension_two_is_rejected() {
        let p = to_flat_pencil(&kernel2(), CheckMode::Exact).unwrap();
        match reconstruct_frobenius(&p, CheckMode::Exact) {
            Err(Error::NotRegular { kernel_dim: 2 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn potential_recovery() {
        let m = cp1();
        let sc = structure_constants(&m).unwrap();
        assert_eq!(recover_potential(&sc, CheckMode::Exact).unwrap(), m.potential);
        // c_222 = t1 has d_1 c_222 != d_2 c_122 = 0
        let mut low = sc.low_entries().to_vec();
        low[7] = QPoly::var(2, 0);
        let bad = StructureConstants::from_low(2, low, &anti(2));
        assert!(matches!(
            recover_potential(&bad, CheckMode::Exact),
            Err(Error::Integrability(_))
        ));
    }

    #[test]
    fn gcd_of_rates() {
        let p = &QPoly::exp(2, 1, rat(2, 3)) + &QPoly::exp(2, 1, rat(1, 2));
        assert_eq!(
            expgens_for([&p]),
            vec![ExpGen {
                var: 1,
                rate: rat(1, 6)
            }]
        );
    }
}

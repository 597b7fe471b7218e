use num_traits::Zero;
use proptest::prelude::*;

use flatpencil::coxeter::coxeter_pencil;
use flatpencil::exactalg::parse::{parse_expr, ExpGen};
use flatpencil::exactalg::polymat;
use flatpencil::exactalg::{linalg, rat, CheckMode, Monomial, QPoly, RatFunc, Rational, Sampler};
use flatpencil::frobenius::{fm2_certificate, to_flat_pencil, StructureConstants};
use flatpencil::geometry::{curvature, levi_civita, lie_bracket, ContraMetric, PencilData, VectorField};
use flatpencil::io::parse_frobenius;
use flatpencil::reconstruction::{operator_pair, transform_metric};
use flatpencil::report::all_pass;

const NV: usize = 2;

fn coeff() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| rat(n, d))
}

fn rate() -> impl Strategy<Value = Rational> {
    prop_oneof![Just(rat(0, 1)), Just(rat(1, 1)), Just(rat(-1, 1)), Just(rat(1, 2))]
}

/// Quasi-polynomials in two variables with exponentials of `t/2`.
fn qpoly(max_terms: usize, exps: bool) -> impl Strategy<Value = QPoly> {
    let term = (0u32..=3, 0u32..=3, rate(), rate(), coeff()).prop_map(move |(a, b, r1, r2, c)| {
        let rates = if exps { vec![r1, r2] } else { vec![] };
        (Monomial::from_parts(vec![a, b], rates), c)
    });
    prop::collection::vec(term, 0..=max_terms).prop_map(|ts| QPoly::from_terms(NV, ts))
}

fn poly(max_terms: usize) -> impl Strategy<Value = QPoly> {
    let term = (0u32..=2, 0u32..=2, coeff()).prop_map(|(a, b, c)| (Monomial::from_parts(vec![a, b], vec![]), c));
    prop::collection::vec(term, 0..=max_terms).prop_map(|ts| QPoly::from_terms(NV, ts))
}

fn field() -> impl Strategy<Value = VectorField> {
    (qpoly(3, true), qpoly(3, true)).prop_map(|(a, b)| VectorField::new(vec![a, b]))
}

/// Symmetric 2x2 polynomial metric with an identity part, so it is
/// nondegenerate as a matrix of functions.
fn metric() -> impl Strategy<Value = ContraMetric> {
    (poly(2), poly(2), poly(2)).prop_map(|(a, b, c)| {
        let one = QPoly::one(NV);
        ContraMetric::new(vec![vec![&a + &one, b.clone()], vec![b, &c + &one]]).unwrap()
    })
}

fn vsum(fields: &[VectorField]) -> VectorField {
    let n = fields[0].n();
    VectorField::new(
        (0..n)
            .map(|i| fields.iter().fold(QPoly::zero(NV), |acc, f| &acc + &f.components[i]))
            .collect(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, rng_seed: proptest::test_runner::RngSeed::Fixed(20240611), ..ProptestConfig::default() })]

    #[test]
    fn ring_axioms(p in qpoly(4, true), q in qpoly(4, true), r in qpoly(4, true)) {
        prop_assert_eq!(&(&p + &q) + &r, &p + &(&q + &r));
        prop_assert_eq!(&p + &q, &q + &p);
        prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
        prop_assert_eq!(&p * &q, &q * &p);
        prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
        prop_assert!((&p - &p).is_zero());
        prop_assert_eq!(&p * &QPoly::one(NV), p.clone());
    }

    #[test]
    fn derivatives_obey_leibniz_and_commute(p in qpoly(4, true), q in qpoly(4, true)) {
        for i in 0..NV {
            prop_assert_eq!((&p * &q).diff(i), &(&p.diff(i) * &q) + &(&p * &q.diff(i)));
        }
        prop_assert_eq!(p.diff(0).diff(1), p.diff(1).diff(0));
    }

    #[test]
    fn evaluation_is_a_ring_homomorphism(p in qpoly(4, true), q in qpoly(4, true), seed in 0u64..1000) {
        let pq = &p * &q;
        let mut s = Sampler::for_polys(seed, NV, [&p, &q, &pq]);
        let pt = s.point();
        prop_assert_eq!(pt.eval(&pq), pt.eval(&p) * pt.eval(&q));
        prop_assert_eq!(pt.eval(&(&p + &q)), pt.eval(&p) + pt.eval(&q));
    }

    #[test]
    fn printed_expressions_parse_back(p in qpoly(4, true)) {
        let gens = [ExpGen { var: 0, rate: rat(1, 2) }, ExpGen { var: 1, rate: rat(1, 2) }];
        prop_assert_eq!(parse_expr(&p.to_string(), NV, &gens).unwrap(), p);
    }

    #[test]
    fn lie_bracket_is_antisymmetric_and_satisfies_jacobi(x in field(), y in field(), z in field()) {
        prop_assert!(vsum(&[lie_bracket(&x, &y), lie_bracket(&y, &x)]).is_zero());
        let j = vsum(&[
            lie_bracket(&x, &lie_bracket(&y, &z)),
            lie_bracket(&y, &lie_bracket(&z, &x)),
            lie_bracket(&z, &lie_bracket(&x, &y)),
        ]);
        prop_assert!(j.is_zero());
    }

    #[test]
    fn fm2_holds_for_third_derivatives(f in qpoly(5, true)) {
        let n = NV;
        let mut c = Vec::new();
        for a in 0..n {
            for b in 0..n {
                for g in 0..n {
                    c.push(f.diff(a).diff(b).diff(g));
                }
            }
        }
        let sc = StructureConstants::from_low(n, c, &linalg::identity(n));
        prop_assert!(fm2_certificate(&sc, CheckMode::Exact).unwrap().passed());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, rng_seed: proptest::test_runner::RngSeed::Fixed(7), ..ProptestConfig::default() })]

    #[test]
    fn curvature_is_antisymmetric_in_last_pair(g in metric()) {
        let gamma = levi_civita(&g).unwrap();
        let r = curvature(&g, &gamma);
        for l in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        prop_assert!((r.num(l, i, j, k) + r.num(l, i, k, j)).is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn lambda_is_skew_after_random_linear_changes(
        which in 0usize..4,
        entries in prop::collection::vec(-3i64..=3, 9),
    ) {
        let p = bundled_pencil(which);
        let n = p.n();
        let m: Vec<Vec<Rational>> = (0..n).map(|i| (0..n).map(|j| rat(entries[i * n + j], 1)).collect()).collect();
        prop_assume!(!linalg::det(&m).is_zero());
        let minv = linalg::inverse(&m).unwrap();
        let q = PencilData::new(
            transform_metric(&p.g1, &m, &minv).unwrap(),
            transform_metric(&p.g2, &m, &minv).unwrap(),
        )
        .unwrap()
        .with_tau(p.tau.as_ref().unwrap().linear_substitute(&minv));
        let ops = operator_pair(&q, CheckMode::Exact).unwrap();
        prop_assert!(all_pass(&ops.certificates), "{:?}", ops.certificates);
    }
}

fn data(name: &str) -> String {
    std::fs::read_to_string(format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn bundled_pencil(which: usize) -> PencilData {
    match which {
        0 => to_flat_pencil(&parse_frobenius(&data("n1.json")).unwrap(), CheckMode::Exact).unwrap(),
        1 => to_flat_pencil(&parse_frobenius(&data("cp1.json")).unwrap(), CheckMode::Exact).unwrap(),
        k => coxeter_pencil(k, CheckMode::Exact).unwrap().0.pencil,
    }
}

#[test]
fn operator_certificates_on_bundled_pencils() {
    for which in 0..4 {
        let ops = operator_pair(&bundled_pencil(which), CheckMode::Exact).unwrap();
        assert!(all_pass(&ops.certificates), "{which}: {:?}", ops.certificates);
        let names: Vec<_> = ops.certificates.iter().map(|c| c.name.as_str()).collect();
        assert!(names.iter().any(|n| n.contains("skew")), "{names:?}");
    }
}

#[test]
fn fm2_rejects_non_gradient_constants() {
    // c_111 = t2 is not a third derivative: d_2 c_111 != d_1 c_211 = 0
    let n = 2;
    let mut c = vec![QPoly::zero(n); 8];
    c[0] = QPoly::var(n, 1);
    let sc = StructureConstants::from_low(n, c, &linalg::identity(n));
    assert!(!fm2_certificate(&sc, CheckMode::Exact).unwrap().passed());
}

/// Classical `R^i_{lst} = ∂_sΓ^i_{tl} - ∂_tΓ^i_{sl} + Γ^i_{sm}Γ^m_{tl} - Γ^i_{tm}Γ^m_{sl}`
/// from covariant Christoffel symbols of `g_{ij} = (g^{ij})^{-1}`.
fn classical_riemann(g: &ContraMetric) -> Vec<RatFunc> {
    let n = g.n();
    let nv = g.nvars();
    let det = polymat::det(g.entries());
    let adj = polymat::adjugate(g.entries());
    let low: Vec<Vec<RatFunc>> = (0..n)
        .map(|i| (0..n).map(|j| RatFunc::new(adj[i][j].clone(), det.clone())).collect())
        .collect();
    let up = |i: usize, j: usize| RatFunc::from_poly(g.entry(i, j).clone());
    let mut chr = vec![RatFunc::zero(nv); n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut acc = RatFunc::zero(nv);
                for s in 0..n {
                    let inner = low[s][k].diff(j).add(&low[s][j].diff(k)).sub(&low[j][k].diff(s));
                    acc = acc.add(&up(i, s).mul(&inner));
                }
                chr[(i * n + j) * n + k] = acc.scale(&rat(1, 2));
            }
        }
    }
    let c = |i: usize, j: usize, k: usize| &chr[(i * n + j) * n + k];
    let mut r = Vec::new();
    for i in 0..n {
        for l in 0..n {
            for s in 0..n {
                for t in 0..n {
                    let mut acc = c(i, t, l).diff(s).sub(&c(i, s, l).diff(t));
                    for m in 0..n {
                        acc = acc.add(&c(i, s, m).mul(c(m, t, l))).sub(&c(i, t, m).mul(c(m, s, l)));
                    }
                    r.push(acc);
                }
            }
        }
    }
    r
}

#[test]
fn curvature_matches_classical_riemann_tensor() {
    let metrics: [&[&[&str]]; 4] = [
        &[&["1", "0"], &["0", "t1^2"]],
        &[&["1 + t2^2", "t1"], &["t1", "2"]],
        &[&["t1", "0"], &["0", "1"]],
        &[&["t2", "1", "0"], &["1", "t3", "0"], &["0", "0", "1 + t1"]],
    ];
    for rows in metrics {
        let n = rows.len();
        let g = ContraMetric::new(
            rows.iter()
                .map(|r| r.iter().map(|s| parse_expr(s, n, &[]).unwrap()).collect())
                .collect(),
        )
        .unwrap();
        let mine = curvature(&g, &levi_civita(&g).unwrap());
        let classical = classical_riemann(&g);
        let riem = |i: usize, l: usize, s: usize, t: usize| &classical[((i * n + l) * n + s) * n + t];
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let mut expected = RatFunc::zero(n);
                        for s in 0..n {
                            for t in 0..n {
                                let gg = g.entry(j, s) * g.entry(k, t);
                                expected = expected.sub(&riem(i, l, s, t).mul_poly(&gg));
                            }
                        }
                        assert!(
                            mine.get(l, i, j, k).sub(&expected).is_zero(),
                            "{rows:?} at (l,i,j,k) = ({l},{i},{j},{k})"
                        );
                    }
                }
            }
        }
    }
}

//! Deciding whether a quasi-polynomial expression vanishes identically.
//!
//! Exact mode is a proof: terms are kept in canonical form, so an identity
//! holds iff the normalized expression has no terms. Sampled mode evaluates
//! at seeded random rational points (Schwartz-Zippel) and is reported as
//! probabilistic.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{fmt_rational, QPoly, RatFunc, Rational};
use crate::error::{Error, Result};

pub const DEFAULT_TRIALS: u32 = 7;
const MAX_ATTEMPTS: usize = 100;
const NUM_BOUND: i64 = 1_000_000;
const DEN_BOUND: i64 = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum CheckMode {
    Exact,
    Sampled { trials: u32, seed: u64 },
}

impl CheckMode {
    pub fn sampled(seed: u64) -> Self {
        CheckMode::Sampled {
            trials: DEFAULT_TRIALS,
            seed,
        }
    }
}

/// A point at which quasi-polynomials are evaluated exactly.
///
/// `exp(r t^i)` cannot be evaluated in the rationals, so each coordinate also
/// carries a positive rational `v_i` standing for `exp(t^i / N_i)`, where
/// `N_i` clears every rate denominator in play. The map `exp(r t^i) ->
/// v_i^(r N_i)` is a ring homomorphism on the quasi-polynomial ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplePoint {
    pub coords: Vec<Rational>,
    pub exp_bases: Vec<(Rational, i64)>,
}

impl SamplePoint {
    pub fn eval(&self, p: &QPoly) -> Rational {
        p.eval(&self.coords, &self.exp_bases)
    }

    /// Human-readable form, e.g. `t1=3/7, t2=-5, exp(t2)->2/3`.
    pub fn describe(&self) -> String {
        let mut parts: Vec<String> = self
            .coords
            .iter()
            .enumerate()
            .map(|(i, c)| format!("t{}={}", i + 1, fmt_rational(c)))
            .collect();
        for (i, (v, n)) in self.exp_bases.iter().enumerate() {
            if *n > 0 {
                if *n == 1 {
                    parts.push(format!("exp(t{})->{}", i + 1, fmt_rational(v)));
                } else {
                    parts.push(format!("exp(t{}/{})->{}", i + 1, n, fmt_rational(v)));
                }
            }
        }
        parts.join(", ")
    }
}

/// Seeded source of sample points.
pub struct Sampler {
    rng: ChaCha8Rng,
    nvars: usize,
    denoms: Vec<i64>,
}

impl Sampler {
    /// `denoms[i]` is zero when coordinate `i` carries no exponential.
    pub fn new(seed: u64, nvars: usize, denoms: Vec<i64>) -> Self {
        assert_eq!(denoms.len(), nvars);
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            nvars,
            denoms,
        }
    }

    /// Sampler whose exponential bases cover every rate in `polys`.
    pub fn for_polys<'a, I: IntoIterator<Item = &'a QPoly>>(seed: u64, nvars: usize, polys: I) -> Self {
        let mut denoms = vec![0i64; nvars];
        for p in polys {
            let has_exp: Vec<bool> = (0..nvars)
                .map(|i| p.exp_generators().iter().any(|(j, _)| *j == i))
                .collect();
            for (i, d) in p.rate_denominators().into_iter().enumerate() {
                if has_exp[i] {
                    denoms[i] = if denoms[i] == 0 { d } else { denoms[i].lcm(&d) };
                }
            }
        }
        Sampler::new(seed, nvars, denoms)
    }

    fn coordinate(&mut self) -> Rational {
        let p = self.rng.random_range(-NUM_BOUND..=NUM_BOUND);
        let q = self.rng.random_range(1..=DEN_BOUND);
        Rational::new(BigInt::from(p), BigInt::from(q))
    }

    fn base(&mut self) -> Rational {
        // small positive bases keep the exact powers cheap
        let p = self.rng.random_range(1..=1000i64);
        let q = self.rng.random_range(1..=DEN_BOUND);
        Rational::new(BigInt::from(p), BigInt::from(q))
    }

    pub fn point(&mut self) -> SamplePoint {
        let coords = (0..self.nvars).map(|_| self.coordinate()).collect();
        let exp_bases = (0..self.nvars)
            .map(|i| {
                if self.denoms[i] == 0 {
                    (Rational::from_integer(BigInt::from(1)), 0)
                } else {
                    (self.base(), self.denoms[i])
                }
            })
            .collect();
        SamplePoint { coords, exp_bases }
    }

    /// A point at which none of `dens` vanishes.
    pub fn point_avoiding(&mut self, dens: &[&QPoly]) -> Result<SamplePoint> {
        for _ in 0..MAX_ATTEMPTS {
            let pt = self.point();
            if dens.iter().all(|d| !pt.eval(d).is_zero()) {
                return Ok(pt);
            }
        }
        Err(Error::SampleExhausted { attempts: MAX_ATTEMPTS })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ZeroVerdict {
    /// Certified by normal form.
    Zero,
    /// Vanished at every one of `trials` random points.
    ProbablyZero { trials: u32 },
    /// Nonzero; the point (if found) is one where the value is nonzero.
    NonZero { witness: Option<SamplePoint> },
}

impl ZeroVerdict {
    pub fn is_zero(&self) -> bool {
        !matches!(self, ZeroVerdict::NonZero { .. })
    }
}

/// A point where `p` does not vanish, searched deterministically.
pub fn nonzero_witness(p: &QPoly, avoid: &[&QPoly]) -> Option<SamplePoint> {
    let mut s = Sampler::for_polys(0, p.nvars(), std::iter::once(p).chain(avoid.iter().copied()));
    for _ in 0..MAX_ATTEMPTS {
        let pt = s.point();
        if avoid.iter().all(|d| !pt.eval(d).is_zero()) && !pt.eval(p).is_zero() {
            return Some(pt);
        }
    }
    None
}

pub fn is_zero_identity(p: &QPoly, mode: CheckMode) -> Result<ZeroVerdict> {
    is_zero_with_denominators(p, &[], mode)
}

pub fn is_zero_ratfunc(r: &RatFunc, mode: CheckMode) -> Result<ZeroVerdict> {
    is_zero_with_denominators(r.num(), &[r.den()], mode)
}

fn is_zero_with_denominators(p: &QPoly, dens: &[&QPoly], mode: CheckMode) -> Result<ZeroVerdict> {
    match first_nonzero(std::slice::from_ref(p), dens, mode)? {
        None => Ok(match mode {
            CheckMode::Exact => ZeroVerdict::Zero,
            CheckMode::Sampled { trials, .. } => ZeroVerdict::ProbablyZero { trials },
        }),
        Some((_, witness)) => Ok(ZeroVerdict::NonZero { witness }),
    }
}

/// Index of the first entry that is not identically zero, with a witness
/// point. `dens` are denominators the sample points must avoid (the entries
/// are numerators of rational identities).
pub fn first_nonzero(
    entries: &[QPoly],
    dens: &[&QPoly],
    mode: CheckMode,
) -> Result<Option<(usize, Option<SamplePoint>)>> {
    match mode {
        CheckMode::Exact => Ok(entries
            .iter()
            .position(|p| !p.is_zero())
            .map(|i| (i, nonzero_witness(&entries[i], dens)))),
        CheckMode::Sampled { trials, seed } => {
            assert!(trials >= 1, "sampled mode needs at least one trial");
            let Some(nvars) = entries.first().map(QPoly::nvars) else {
                return Ok(None);
            };
            let mut s = Sampler::for_polys(seed, nvars, entries.iter().chain(dens.iter().copied()));
            let points = (0..trials)
                .map(|_| s.point_avoiding(dens))
                .collect::<Result<Vec<_>>>()?;
            for (i, p) in entries.iter().enumerate() {
                if p.is_zero() {
                    continue;
                }
                for pt in &points {
                    if !pt.eval(p).is_zero() {
                        return Ok(Some((i, Some(pt.clone()))));
                    }
                }
            }
            Ok(None)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rat;

    fn t(i: usize) -> QPoly {
        QPoly::var(2, i)
    }

    #[test]
    fn exact_square_expansion() {
        let one = QPoly::one(2);
        let p = &(&(&(&t(0) + &one).pow(2) - &t(0).pow(2)) - &t(0).scale(&rat(2, 1))) - &one;
        assert_eq!(is_zero_identity(&p, CheckMode::Exact).unwrap(), ZeroVerdict::Zero);
    }

    #[test]
    fn sampled_commutativity() {
        let p = &(&t(0) * &t(1)) - &(&t(1) * &t(0));
        assert_eq!(
            is_zero_identity(&p, CheckMode::Sampled { trials: 5, seed: 1 }).unwrap(),
            ZeroVerdict::ProbablyZero { trials: 5 }
        );
    }

    #[test]
    fn sampled_nonzero_has_witness() {
        let p = &t(0) - &QPoly::one(2);
        match is_zero_identity(&p, CheckMode::Sampled { trials: 5, seed: 1 }).unwrap() {
            ZeroVerdict::NonZero { witness: Some(w) } => assert!(!w.eval(&p).is_zero()),
            other => panic!("unexpected verdict {other:?}"),
        }
    }

    #[test]
    fn exponential_substitution_is_multiplicative() {
        let e = QPoly::exp(2, 1, rat(1, 2));
        let f = QPoly::exp(2, 1, rat(3, 2));
        let mut s = Sampler::for_polys(3, 2, [&e, &f]);
        let pt = s.point();
        assert_eq!(pt.eval(&(&e * &f)), pt.eval(&e) * pt.eval(&f));
    }

    #[test]
    fn vanishing_denominator_everywhere_is_an_error() {
        let zero_den = &t(0) - &t(0);
        let mut s = Sampler::new(0, 2, vec![0, 0]);
        assert!(matches!(
            s.point_avoiding(&[&zero_den]),
            Err(Error::SampleExhausted { .. })
        ));
    }
}

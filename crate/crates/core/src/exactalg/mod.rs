//! Exact scalar and linear-algebra kernel.
//!
//! Everything downstream is built on [`QPoly`]: quasi-polynomials with
//! rational coefficients in the coordinates `t1..tn` and exponentials of
//! rational multiples of them.

pub mod identity;
pub mod linalg;
pub mod parse;
pub mod polymat;
pub mod qpoly;
pub mod ratfunc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

pub use identity::{CheckMode, SamplePoint, Sampler, ZeroVerdict};
pub use qpoly::{Monomial, QPoly};
pub use ratfunc::RatFunc;

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rational = num_rational::BigRational;

/// Rational matrix stored row-major.
pub type Matrix = Vec<Vec<Rational>>;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `p`, `-p` or `p/q` with decimal integers. Returns `None` on any
/// malformed input or a zero denominator.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let valid = |x: &str| {
        let digits = x.strip_prefix('-').unwrap_or(x);
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    };
    if !valid(num) || !valid(den) {
        return None;
    }
    let n: BigInt = num.parse().ok()?;
    let d: BigInt = den.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Rational::new(n, d))
}

pub use qpoly::fmt_rational;

/// Kronecker delta as a rational.
pub fn delta(i: usize, j: usize) -> Rational {
    if i == j {
        Rational::one()
    } else {
        Rational::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_canonical_form() {
        let r = rat(4, -6);
        assert_eq!(r.numer(), &BigInt::from(-2));
        assert_eq!(r.denom(), &BigInt::from(3));
        assert_eq!(rat(0, 5), Rational::zero());
        assert_eq!(rat(0, 5).denom(), &BigInt::from(1));
    }

    #[test]
    fn parse_rationals() {
        assert_eq!(parse_rational("-3/4"), Some(rat(-3, 4)));
        assert_eq!(parse_rational(" 7 "), Some(rat(7, 1)));
        assert_eq!(parse_rational("2/4"), Some(rat(1, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("1.5"), None);
        assert_eq!(parse_rational(""), None);
    }
}

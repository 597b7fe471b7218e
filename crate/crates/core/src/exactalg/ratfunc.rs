//! Quotients of quasi-polynomials.

use std::fmt;

use num_traits::One;

use super::{QPoly, Rational};

/// `num / den` with `den` nonzero and the leading coefficient of `den` equal
/// to one. No gcd is taken; equality is decided by cross-multiplication.
#[derive(Clone, Debug)]
pub struct RatFunc {
    num: QPoly,
    den: QPoly,
}

impl RatFunc {
    /// Panics when `den` is zero.
    pub fn new(num: QPoly, den: QPoly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        assert_eq!(num.nvars(), den.nvars());
        let lead = den.leading_term().map(|(_, c)| c.clone()).unwrap();
        let mut r = if lead.is_one() {
            RatFunc { num, den }
        } else {
            let inv = lead.recip();
            RatFunc {
                num: num.scale(&inv),
                den: den.scale(&inv),
            }
        };
        r.reduce();
        r
    }

    pub fn from_poly(p: QPoly) -> Self {
        let n = p.nvars();
        RatFunc {
            num: p,
            den: QPoly::one(n),
        }
    }

    pub fn zero(nvars: usize) -> Self {
        RatFunc::from_poly(QPoly::zero(nvars))
    }

    pub fn num(&self) -> &QPoly {
        &self.num
    }

    pub fn den(&self) -> &QPoly {
        &self.den
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Collapses to a polynomial when the denominator divides the numerator.
    fn reduce(&mut self) {
        if self.den.is_constant() {
            return;
        }
        if let Some(q) = self.num.div_exact(&self.den) {
            let n = q.nvars();
            self.num = q;
            self.den = QPoly::one(n);
        }
    }

    /// The quotient as a quasi-polynomial if it is one.
    pub fn to_qpoly(&self) -> Option<QPoly> {
        self.num.div_exact(&self.den)
    }

    pub fn diff(&self, i: usize) -> RatFunc {
        if self.den.is_constant() {
            return RatFunc {
                num: self.num.diff(i),
                den: self.den.clone(),
            };
        }
        let num = &(&self.num.diff(i) * &self.den) - &(&self.num * &self.den.diff(i));
        RatFunc::new(num, &self.den * &self.den)
    }

    pub fn scale(&self, c: &Rational) -> RatFunc {
        RatFunc {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn add(&self, other: &RatFunc) -> RatFunc {
        if self.den == other.den {
            return RatFunc::new(&self.num + &other.num, self.den.clone());
        }
        RatFunc::new(
            &(&self.num * &other.den) + &(&other.num * &self.den),
            &self.den * &other.den,
        )
    }

    pub fn sub(&self, other: &RatFunc) -> RatFunc {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &RatFunc) -> RatFunc {
        RatFunc::new(&self.num * &other.num, &self.den * &other.den)
    }

    pub fn mul_poly(&self, p: &QPoly) -> RatFunc {
        RatFunc::new(&self.num * p, self.den.clone())
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl PartialEq for RatFunc {
    fn eq(&self, other: &Self) -> bool {
        &self.num * &other.den == &other.num * &self.den
    }
}

impl Eq for RatFunc {}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one_poly() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

impl QPoly {
    pub(crate) fn is_one_poly(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rat;

    #[test]
    fn equality_by_cross_multiplication() {
        let t = QPoly::var(1, 0);
        let one = QPoly::one(1);
        let a = RatFunc::new(t.clone(), &t + &one);
        let b = RatFunc::new(t.scale(&rat(2, 1)), (&t + &one).scale(&rat(2, 1)));
        assert_eq!(a, b);
        assert_eq!(b.den().leading_term().unwrap().1, &rat(1, 1));
    }

    #[test]
    fn quotient_rule() {
        let t = QPoly::var(1, 0);
        let f = RatFunc::new(QPoly::one(1), t.clone());
        let expected = RatFunc::new(-QPoly::one(1), t.pow(2));
        assert_eq!(f.diff(0), expected);
    }

    #[test]
    fn divisible_quotient_collapses() {
        let t = QPoly::var(1, 0);
        let one = QPoly::one(1);
        let f = RatFunc::new(&t.pow(2) - &one, &t - &one);
        assert!(f.den().is_one_poly());
        assert_eq!(f.to_qpoly(), Some(&t + &one));
    }
}

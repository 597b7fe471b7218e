//! Multivariate quasi-polynomials over the rationals.
//!
//! A [`QPoly`] is a finite sum of terms `c * t^a * exp(r . t)` where `a` is a
//! vector of non-negative integer powers and `r` a vector of rational rates.
//! This is the ring in which every potential, metric entry and tensor
//! component of the crate lives.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{rat_int, Rational};

/// Exponent data of a single term.
///
/// `rates` is kept empty when every rate is zero so that polynomial monomials
/// (the common case) carry no rational allocations.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    powers: Vec<u32>,
    rates: Vec<Rational>,
}

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial {
            powers: vec![0; nvars],
            rates: Vec::new(),
        }
    }

    pub fn from_parts(powers: Vec<u32>, rates: Vec<Rational>) -> Self {
        let n = powers.len();
        assert!(rates.is_empty() || rates.len() == n, "rate vector length mismatch");
        let mut m = Monomial { powers, rates };
        m.canonicalize();
        m
    }

    fn canonicalize(&mut self) {
        if self.rates.iter().all(Zero::is_zero) {
            self.rates.clear();
        }
    }

    pub fn nvars(&self) -> usize {
        self.powers.len()
    }

    pub fn powers(&self) -> &[u32] {
        &self.powers
    }

    pub fn power(&self, i: usize) -> u32 {
        self.powers[i]
    }

    pub fn rate(&self, i: usize) -> Rational {
        self.rates.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    /// True when the term carries no exponential factor.
    pub fn is_polynomial(&self) -> bool {
        self.rates.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.powers.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.rates.is_empty() && self.powers.iter().all(|&p| p == 0)
    }

    /// True when the term does not depend on coordinate `i`.
    pub fn is_free_of(&self, i: usize) -> bool {
        self.powers[i] == 0 && self.rate(i).is_zero()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let powers = self.powers.iter().zip(&other.powers).map(|(a, b)| a + b).collect();
        let rates = match (self.rates.is_empty(), other.rates.is_empty()) {
            (true, true) => Vec::new(),
            (false, true) => self.rates.clone(),
            (true, false) => other.rates.clone(),
            (false, false) => self.rates.iter().zip(&other.rates).map(|(a, b)| a + b).collect(),
        };
        let mut m = Monomial { powers, rates };
        m.canonicalize();
        m
    }

    fn rates_cmp(&self, other: &Monomial) -> Ordering {
        match (self.rates.is_empty(), other.rates.is_empty()) {
            (true, true) => Ordering::Equal,
            (false, false) => self.rates.cmp(&other.rates),
            (false, true) => sign_lex(&self.rates),
            (true, false) => sign_lex(&other.rates).reverse(),
        }
    }
}

/// Lexicographic comparison of a rate vector against the zero vector.
fn sign_lex(rates: &[Rational]) -> Ordering {
    for r in rates {
        match r.cmp(&Rational::zero()) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

// Lex order on (rates, powers). It is a group order on exponent vectors, hence
// compatible with multiplication, which the exact division relies on.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rates_cmp(other).then_with(|| self.powers.cmp(&other.powers))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Exact quasi-polynomial in `nvars` coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QPoly {
    nvars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl QPoly {
    pub fn zero(nvars: usize) -> Self {
        QPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = QPoly::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(nvars), c);
        }
        p
    }

    pub fn one(nvars: usize) -> Self {
        QPoly::constant(nvars, Rational::one())
    }

    pub fn from_int(nvars: usize, c: i64) -> Self {
        QPoly::constant(nvars, rat_int(c))
    }

    /// The coordinate `t^i` (zero-based index).
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index out of range");
        let mut m = Monomial::one(nvars);
        m.powers[i] = 1;
        QPoly::from_term(m, Rational::one())
    }

    /// `exp(rate * t^i)` (zero-based index).
    pub fn exp(nvars: usize, i: usize, rate: Rational) -> Self {
        assert!(i < nvars, "variable index out of range");
        let mut rates = vec![Rational::zero(); nvars];
        rates[i] = rate;
        QPoly::from_term(Monomial::from_parts(vec![0; nvars], rates), Rational::one())
    }

    pub fn from_term(m: Monomial, c: Rational) -> Self {
        let nvars = m.nvars();
        let mut p = QPoly::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rational)>>(nvars: usize, it: I) -> Self {
        let mut p = QPoly::zero(nvars);
        for (m, c) in it {
            assert_eq!(m.nvars(), nvars);
            p.add_term(m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> + '_ {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// `Some(c)` when the polynomial is the constant `c` (including zero).
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    /// True when no term carries an exponential factor.
    pub fn is_polynomial(&self) -> bool {
        self.terms.keys().all(Monomial::is_polynomial)
    }

    pub fn is_free_of(&self, i: usize) -> bool {
        self.terms.keys().all(|m| m.is_free_of(i))
    }

    /// Largest term in the monomial order.
    pub fn leading_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> QPoly {
        if c.is_zero() {
            return QPoly::zero(self.nvars);
        }
        QPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn mul_term(&self, m: &Monomial, c: &Rational) -> QPoly {
        if c.is_zero() {
            return QPoly::zero(self.nvars);
        }
        QPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(k, a)| (k.mul(m), a * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> QPoly {
        let mut result = QPoly::one(self.nvars);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Partial derivative with respect to `t^i` (zero-based).
    pub fn diff(&self, i: usize) -> QPoly {
        assert!(i < self.nvars, "variable index out of range");
        let mut out = QPoly::zero(self.nvars);
        for (m, c) in &self.terms {
            let rate = m.rate(i);
            if !rate.is_zero() {
                out.add_term(m.clone(), c * &rate);
            }
            let a = m.powers[i];
            if a > 0 {
                let mut dm = m.clone();
                dm.powers[i] -= 1;
                out.add_term(dm, c * rat_int(a as i64));
            }
        }
        out
    }

    /// A term-wise antiderivative in `t^i` with no added integration constant.
    ///
    /// For a term with a nonzero rate `r` in `t^i` the closed form
    /// `int t^a e^{rt} dt = e^{rt} sum_j (-1)^j a!/(a-j)! t^{a-j} / r^{j+1}` is used.
    pub fn integrate(&self, i: usize) -> QPoly {
        assert!(i < self.nvars, "variable index out of range");
        let mut out = QPoly::zero(self.nvars);
        for (m, c) in &self.terms {
            let rate = m.rate(i);
            let a = m.powers[i];
            if rate.is_zero() {
                let mut im = m.clone();
                im.powers[i] += 1;
                out.add_term(im, c / rat_int(a as i64 + 1));
            } else {
                let mut falling = Rational::one();
                let mut rpow = rate.clone();
                for j in 0..=a {
                    let mut im = m.clone();
                    im.powers[i] = a - j;
                    let sign = if j % 2 == 0 { Rational::one() } else { -Rational::one() };
                    out.add_term(im, c * &sign * &falling / &rpow);
                    falling *= rat_int((a - j) as i64);
                    rpow *= &rate;
                }
            }
        }
        out
    }

    /// Drops exponential-free terms of total degree at most two.
    pub fn strip_quadratic(&self) -> QPoly {
        QPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| !(m.is_polynomial() && m.total_degree() <= 2))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Maximum total polynomial degree over all terms (`None` for zero).
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::total_degree).max()
    }

    /// Weighted degree when every term has the same weighted degree.
    /// Only meaningful for exponential-free polynomials.
    pub fn weighted_degree(&self, weights: &[Rational]) -> Option<Rational> {
        let mut deg: Option<Rational> = None;
        for m in self.terms.keys() {
            if !m.is_polynomial() {
                return None;
            }
            let d: Rational = m
                .powers
                .iter()
                .zip(weights)
                .map(|(&p, w)| w * rat_int(p as i64))
                .fold(Rational::zero(), |acc, x| acc + x);
            match &deg {
                None => deg = Some(d),
                Some(prev) if *prev != d => return None,
                _ => {}
            }
        }
        deg
    }

    /// Adds `extra` new trailing variables that the polynomial does not depend on.
    pub fn extend_vars(&self, extra: usize) -> QPoly {
        let n = self.nvars + extra;
        QPoly {
            nvars: n,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut powers = m.powers.clone();
                    powers.resize(n, 0);
                    let mut rates = m.rates.clone();
                    if !rates.is_empty() {
                        rates.resize(n, Rational::zero());
                    }
                    (Monomial { powers, rates }, c.clone())
                })
                .collect(),
        }
    }

    /// Groups the terms by the power of variable `i`, which must not carry
    /// exponential rates. Returned coefficients are free of `t^i`.
    pub fn coefficients_in(&self, i: usize) -> Vec<QPoly> {
        let mut out: Vec<QPoly> = Vec::new();
        for (m, c) in &self.terms {
            assert!(m.rate(i).is_zero(), "coefficients_in on exponential variable");
            let k = m.powers[i] as usize;
            if out.len() <= k {
                out.resize(k + 1, QPoly::zero(self.nvars));
            }
            let mut mm = m.clone();
            mm.powers[i] = 0;
            out[k].add_term(mm, c.clone());
        }
        out
    }

    /// Substitutes the linear change `t^i = sum_j m[i][j] s^j`.
    ///
    /// Exponential rates transform as `r' = r M`, so the ring is closed under
    /// linear changes of coordinates.
    pub fn linear_substitute(&self, m: &[Vec<Rational>]) -> QPoly {
        let n = self.nvars;
        assert_eq!(m.len(), n);
        let lin: Vec<QPoly> = (0..n)
            .map(|i| {
                let mut p = QPoly::zero(n);
                for (j, a) in m[i].iter().enumerate() {
                    p.add_term(QPoly::var(n, j).terms.into_iter().next().unwrap().0, a.clone());
                }
                p
            })
            .collect();
        let mut out = QPoly::zero(n);
        for (mono, c) in &self.terms {
            let mut term = QPoly::constant(n, c.clone());
            for (i, &a) in mono.powers.iter().enumerate() {
                if a > 0 {
                    term = &term * &lin[i].pow(a);
                }
            }
            if !mono.rates.is_empty() {
                let rates: Vec<Rational> = (0..n)
                    .map(|j| {
                        (0..n)
                            .map(|i| &mono.rates[i] * &m[i][j])
                            .fold(Rational::zero(), |acc, x| acc + x)
                    })
                    .collect();
                term = term.mul_term(&Monomial::from_parts(vec![0; n], rates), &Rational::one());
            }
            out += &term;
        }
        out
    }

    /// Polynomial composition `t^i -> subs[i]`. Requires an exponential-free
    /// polynomial; the result lives in the variables of `subs`.
    pub fn compose(&self, subs: &[QPoly]) -> Option<QPoly> {
        assert_eq!(subs.len(), self.nvars);
        if !self.is_polynomial() {
            return None;
        }
        let m = subs.first().map(QPoly::nvars).unwrap_or(0);
        let mut out = QPoly::zero(m);
        let mut cache: Vec<Vec<QPoly>> = subs.iter().map(|s| vec![QPoly::one(s.nvars()), s.clone()]).collect();
        for (mono, c) in &self.terms {
            let mut term = QPoly::constant(m, c.clone());
            for (i, &a) in mono.powers.iter().enumerate() {
                if a == 0 {
                    continue;
                }
                while cache[i].len() <= a as usize {
                    let next = &cache[i][cache[i].len() - 1] * &subs[i];
                    cache[i].push(next);
                }
                term = &term * &cache[i][a as usize];
            }
            out += &term;
        }
        Some(out)
    }

    /// Exact quotient `self / d` in the quasi-polynomial ring, or `None` when
    /// `d` does not divide `self`.
    ///
    /// Exponentials are treated as Laurent monomials: both operands are shifted
    /// so every rate is non-negative, which turns the problem into ordinary
    /// polynomial division under a well-order and guarantees termination.
    pub fn div_exact(&self, d: &QPoly) -> Option<QPoly> {
        assert_eq!(self.nvars, d.nvars);
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(QPoly::zero(self.nvars));
        }
        if let Some(c) = d.as_constant() {
            return Some(self.scale(&c.recip()));
        }
        let n = self.nvars;
        let shift_num = min_rates(self);
        let shift_den = min_rates(d);
        let (lead_m, lead_c) = d.leading_term().map(|(m, c)| (m.clone(), c.clone()))?;
        let mut rem = self.clone();
        let mut quot = QPoly::zero(n);
        while let Some((m, c)) = rem.leading_term().map(|(m, c)| (m.clone(), c.clone())) {
            let mut qpowers = Vec::with_capacity(n);
            for i in 0..n {
                if m.powers[i] < lead_m.powers[i] {
                    return None;
                }
                qpowers.push(m.powers[i] - lead_m.powers[i]);
            }
            let mut qrates = Vec::with_capacity(n);
            for i in 0..n {
                let shifted_rem = m.rate(i) - &shift_num[i];
                let shifted_den = lead_m.rate(i) - &shift_den[i];
                if shifted_rem < shifted_den {
                    return None;
                }
                qrates.push(m.rate(i) - lead_m.rate(i));
            }
            let qm = Monomial::from_parts(qpowers, qrates);
            let qc = &c / &lead_c;
            rem -= &d.mul_term(&qm, &qc);
            quot.add_term(qm, qc);
        }
        Some(quot)
    }

    /// Exact evaluation at a sample point (see [`super::identity::SamplePoint`]).
    pub fn eval(&self, coords: &[Rational], exp_bases: &[(Rational, i64)]) -> Rational {
        let mut total = Rational::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (i, &a) in m.powers.iter().enumerate() {
                if a > 0 {
                    v *= num_traits::pow(coords[i].clone(), a as usize);
                }
            }
            for (i, r) in m.rates.iter().enumerate() {
                if r.is_zero() {
                    continue;
                }
                let (base, denom) = &exp_bases[i];
                let e = r * rat_int(*denom);
                assert!(e.is_integer(), "exponential base denominator does not clear rate");
                let e = e.to_integer().to_i64().expect("exponent overflow");
                let p = num_traits::pow(base.clone(), e.unsigned_abs() as usize);
                if e >= 0 {
                    v *= p;
                } else {
                    v /= p;
                }
            }
            total += v;
        }
        total
    }

    /// Floating point evaluation with the true exponential; only used by
    /// cross-check oracles.
    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut v = c.to_f64().unwrap_or(f64::NAN);
                for (i, &a) in m.powers.iter().enumerate() {
                    v *= x[i].powi(a as i32);
                }
                let mut arg = 0.0;
                for (i, r) in m.rates.iter().enumerate() {
                    arg += r.to_f64().unwrap_or(f64::NAN) * x[i];
                }
                v * arg.exp()
            })
            .sum()
    }

    /// Per coordinate, the lcm of the denominators of all rates in use.
    pub fn rate_denominators(&self) -> Vec<i64> {
        let mut out = vec![1i64; self.nvars];
        for m in self.terms.keys() {
            for (i, r) in m.rates.iter().enumerate() {
                let d = r.denom().to_i64().expect("rate denominator overflow");
                out[i] = out[i].lcm(&d);
            }
        }
        out
    }

    /// Every `(coordinate, rate)` pair that occurs in some exponential factor.
    pub fn exp_generators(&self) -> Vec<(usize, Rational)> {
        let mut out: Vec<(usize, Rational)> = Vec::new();
        for m in self.terms.keys() {
            for (i, r) in m.rates.iter().enumerate() {
                if !r.is_zero() && !out.iter().any(|(j, s)| *j == i && s == r) {
                    out.push((i, r.clone()));
                }
            }
        }
        out.sort();
        out
    }
}

fn min_rates(p: &QPoly) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); p.nvars];
    for m in p.terms.keys() {
        for (i, r) in m.rates.iter().enumerate() {
            if *r < out[i] {
                out[i] = r.clone();
            }
        }
    }
    out
}

impl<'a> Add<&'a QPoly> for &'a QPoly {
    type Output = QPoly;
    fn add(self, rhs: &QPoly) -> QPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl<'a> Sub<&'a QPoly> for &'a QPoly {
    type Output = QPoly;
    fn sub(self, rhs: &QPoly) -> QPoly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Add for QPoly {
    type Output = QPoly;
    fn add(mut self, rhs: QPoly) -> QPoly {
        self += &rhs;
        self
    }
}

impl Sub for QPoly {
    type Output = QPoly;
    fn sub(mut self, rhs: QPoly) -> QPoly {
        self -= &rhs;
        self
    }
}

impl AddAssign<&QPoly> for QPoly {
    fn add_assign(&mut self, rhs: &QPoly) {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl SubAssign<&QPoly> for QPoly {
    fn sub_assign(&mut self, rhs: &QPoly) {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl<'a> Mul<&'a QPoly> for &'a QPoly {
    type Output = QPoly;
    fn mul(self, rhs: &QPoly) -> QPoly {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let mut out = QPoly::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Mul for QPoly {
    type Output = QPoly;
    fn mul(self, rhs: QPoly) -> QPoly {
        &self * &rhs
    }
}

impl Neg for &QPoly {
    type Output = QPoly;
    fn neg(self) -> QPoly {
        QPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

impl Neg for QPoly {
    type Output = QPoly;
    fn neg(self) -> QPoly {
        -&self
    }
}

/// Writes a rational in the input grammar (`3`, `-1/2`).
pub fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for QPoly {
    /// Renders in the expression grammar accepted by the parser, highest term
    /// first, e.g. `1/2*t1^2*t2 + exp(t2)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let mut factors: Vec<String> = Vec::new();
            for (i, &a) in m.powers.iter().enumerate() {
                match a {
                    0 => {}
                    1 => factors.push(format!("t{}", i + 1)),
                    _ => factors.push(format!("t{}^{}", i + 1, a)),
                }
            }
            for (i, r) in m.rates.iter().enumerate() {
                if r.is_zero() {
                    continue;
                }
                if r.is_one() {
                    factors.push(format!("exp(t{})", i + 1));
                } else if *r == -Rational::one() {
                    factors.push(format!("exp(-t{})", i + 1));
                } else {
                    factors.push(format!("exp({}*t{})", fmt_rational(r), i + 1));
                }
            }
            let negative = c.is_negative();
            let abs = c.abs();
            let body = if factors.is_empty() {
                fmt_rational(&abs)
            } else if abs.is_one() {
                factors.join("*")
            } else {
                format!("{}*{}", fmt_rational(&abs), factors.join("*"))
            };
            match (idx, negative) {
                (0, false) => write!(f, "{body}")?,
                (0, true) => write!(f, "-{body}")?,
                (_, false) => write!(f, " + {body}")?,
                (_, true) => write!(f, " - {body}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rat;

    fn t(n: usize, i: usize) -> QPoly {
        QPoly::var(n, i)
    }

    #[test]
    fn power_rule() {
        let p = t(1, 0).pow(3).scale(&rat(1, 6));
        assert_eq!(p.diff(0), t(1, 0).pow(2).scale(&rat(1, 2)));
    }

    #[test]
    fn exponential_rule() {
        let e = QPoly::exp(2, 1, rat(1, 1));
        assert_eq!(e.diff(1), e);
        assert!(e.diff(0).is_zero());
        let e3 = QPoly::exp(2, 1, rat(3, 2));
        assert_eq!(e3.diff(1), e3.scale(&rat(3, 2)));
    }

    #[test]
    fn exponentials_multiply_by_adding_rates() {
        let a = QPoly::exp(1, 0, rat(1, 2));
        let b = QPoly::exp(1, 0, rat(1, 2));
        assert_eq!(&a * &b, QPoly::exp(1, 0, rat(1, 1)));
        let inv = QPoly::exp(1, 0, rat(-1, 2));
        assert_eq!(&a * &inv, QPoly::one(1));
    }

    #[test]
    fn integrate_inverts_diff() {
        let n = 2;
        let p = &(&t(n, 0).pow(3) * &QPoly::exp(n, 0, rat(2, 1))) + &t(n, 1);
        let ip = p.integrate(0);
        assert_eq!(ip.diff(0), p);
    }

    #[test]
    fn exact_division() {
        let n = 2;
        let a = &t(n, 0) + &QPoly::exp(n, 1, rat(1, 1));
        let b = &(&t(n, 0) * &t(n, 1)) - &QPoly::exp(n, 1, rat(-1, 1));
        let prod = &a * &b;
        assert_eq!(prod.div_exact(&a), Some(b.clone()));
        assert_eq!(prod.div_exact(&b), Some(a.clone()));
        let c = &t(n, 1) + &QPoly::one(n);
        assert_eq!(prod.div_exact(&c), None);
        // 1 - e^t does not divide 1: the quotient would be an infinite series.
        let d = &QPoly::one(1) - &QPoly::exp(1, 0, rat(1, 1));
        assert_eq!(QPoly::one(1).div_exact(&d), None);
    }

    #[test]
    fn linear_substitution_moves_rates() {
        // t1 = s1 + s2, t2 = s2
        let m = vec![vec![rat(1, 1), rat(1, 1)], vec![rat(0, 1), rat(1, 1)]];
        let p = QPoly::exp(2, 0, rat(1, 1));
        let q = p.linear_substitute(&m);
        assert_eq!(q, &QPoly::exp(2, 0, rat(1, 1)) * &QPoly::exp(2, 1, rat(1, 1)));
        let sq = t(2, 0).pow(2).linear_substitute(&m);
        assert_eq!(sq, (&t(2, 0) + &t(2, 1)).pow(2));
    }

    #[test]
    fn display_matches_grammar() {
        let p = &t(2, 0).pow(2) * &t(2, 1);
        let p = &p.scale(&rat(1, 2)) + &QPoly::exp(2, 1, rat(1, 1));
        assert_eq!(p.to_string(), "exp(t2) + 1/2*t1^2*t2");
        assert_eq!((-&t(1, 0)).to_string(), "-t1");
    }
}

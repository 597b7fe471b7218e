//! Exact linear algebra over the rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{rat_int, Matrix, Rational};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum LinsolveError {
    #[error("linear system has no solution")]
    NoSolution,
    #[error("linear system is underdetermined (rank {rank} < {unknowns} unknowns)")]
    Underdetermined { rank: usize, unknowns: usize },
    #[error("dimension mismatch in linear system")]
    Dimension,
}

/// Solves `A x = b` by fraction-free (Bareiss) elimination.
///
/// Rows are first scaled to integers; elimination then runs in `BigInt` and
/// only the back substitution touches rationals.
pub fn exact_linsolve(a: &[Vec<Rational>], b: &[Rational]) -> Result<Vec<Rational>, LinsolveError> {
    let m = a.len();
    if b.len() != m {
        return Err(LinsolveError::Dimension);
    }
    let n = a.first().map_or(0, Vec::len);
    if a.iter().any(|r| r.len() != n) {
        return Err(LinsolveError::Dimension);
    }
    let mut w: Vec<Vec<BigInt>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let l = row
                .iter()
                .chain(std::iter::once(rhs))
                .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            row.iter()
                .chain(std::iter::once(rhs))
                .map(|x| (x * Rational::from_integer(l.clone())).to_integer())
                .collect()
        })
        .collect();

    let mut prev = BigInt::one();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..n {
        if r == m {
            break;
        }
        let Some(p) = (r..m).find(|&i| !w[i][c].is_zero()) else {
            continue;
        };
        w.swap(r, p);
        for i in r + 1..m {
            for j in c + 1..=n {
                let v = (&w[r][c] * &w[i][j] - &w[i][c] * &w[r][j]) / &prev;
                w[i][j] = v;
            }
            w[i][c] = BigInt::zero();
        }
        prev = w[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    let rank = r;
    if (rank..m).any(|i| !w[i][n].is_zero()) {
        return Err(LinsolveError::NoSolution);
    }
    if rank < n {
        return Err(LinsolveError::Underdetermined { rank, unknowns: n });
    }
    let mut x = vec![Rational::zero(); n];
    for i in (0..rank).rev() {
        let c = pivots[i];
        let mut s = Rational::from_integer(w[i][n].clone());
        for j in c + 1..n {
            if !w[i][j].is_zero() {
                s -= Rational::from_integer(w[i][j].clone()) * &x[j];
            }
        }
        x[c] = s / Rational::from_integer(w[i][c].clone());
    }
    Ok(x)
}

/// Reduced row echelon form; returns the reduced matrix and pivot columns.
pub fn rref(a: &[Vec<Rational>]) -> (Matrix, Vec<usize>) {
    let mut a: Matrix = a.to_vec();
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        if r == m {
            break;
        }
        let Some(p) = (r..m).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for j in c..n {
            a[r][j] *= &inv;
        }
        for i in 0..m {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in c..n {
                    let v = &f * &a[r][j];
                    a[i][j] -= v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

pub fn rank(a: &[Vec<Rational>]) -> usize {
    rref(a).1.len()
}

/// Basis of `{x : A x = 0}`, one vector per free column.
pub fn null_space(a: &[Vec<Rational>], ncols: usize) -> Vec<Vec<Rational>> {
    let (r, pivots) = rref(a);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); ncols];
            v[f] = Rational::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -r[i][f].clone();
            }
            v
        })
        .collect()
}

/// Some solution of `A x = b` (free variables set to zero), or `None` when
/// the system is inconsistent.
pub fn solve_particular(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.first().map_or(0, Vec::len);
    let aug: Matrix = a
        .iter()
        .zip(b)
        .map(|(row, x)| row.iter().cloned().chain(std::iter::once(x.clone())).collect())
        .collect();
    let (r, pivots) = rref(&aug);
    if pivots.contains(&n) {
        return None;
    }
    let mut x = vec![Rational::zero(); n];
    for (i, &p) in pivots.iter().enumerate() {
        x[p] = r[i][n].clone();
    }
    Some(x)
}

pub fn identity(n: usize) -> Matrix {
    (0..n).map(|i| (0..n).map(|j| super::delta(i, j)).collect()).collect()
}

pub fn zeros(m: usize, n: usize) -> Matrix {
    vec![vec![Rational::zero(); n]; m]
}

pub fn transpose(a: &[Vec<Rational>]) -> Matrix {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    (0..n).map(|j| (0..m).map(|i| a[i][j].clone()).collect()).collect()
}

pub fn mat_mul(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> Matrix {
    let k = b.len();
    let n = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            assert_eq!(row.len(), k);
            (0..n)
                .map(|j| {
                    (0..k)
                        .filter(|&l| !row[l].is_zero())
                        .fold(Rational::zero(), |acc, l| acc + &row[l] * &b[l][j])
                })
                .collect()
        })
        .collect()
}

pub fn mat_vec(a: &[Vec<Rational>], v: &[Rational]) -> Vec<Rational> {
    a.iter()
        .map(|row| row.iter().zip(v).fold(Rational::zero(), |acc, (x, y)| acc + x * y))
        .collect()
}

/// `v^T A` as a row vector.
pub fn vec_mat(v: &[Rational], a: &[Vec<Rational>]) -> Vec<Rational> {
    let n = a.first().map_or(0, Vec::len);
    (0..n)
        .map(|j| {
            v.iter()
                .zip(a)
                .fold(Rational::zero(), |acc, (x, row)| acc + x * &row[j])
        })
        .collect()
}

pub fn mat_add(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> Matrix {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x + y).collect())
        .collect()
}

pub fn mat_scale(a: &[Vec<Rational>], c: &Rational) -> Matrix {
    a.iter().map(|r| r.iter().map(|x| x * c).collect()).collect()
}

pub fn is_zero_matrix(a: &[Vec<Rational>]) -> bool {
    a.iter().all(|r| r.iter().all(Zero::is_zero))
}

/// Inverse of a square matrix, `None` when singular.
pub fn inverse(a: &[Vec<Rational>]) -> Option<Matrix> {
    let n = a.len();
    let aug: Matrix = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| super::delta(i, j)));
            r
        })
        .collect();
    let (r, pivots) = rref(&aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(r.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Determinant by Gaussian elimination.
pub fn det(a: &[Vec<Rational>]) -> Rational {
    let n = a.len();
    let mut a: Matrix = a.to_vec();
    let mut d = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= &a[c][c];
        let inv = a[c][c].recip();
        for i in c + 1..n {
            if a[i][c].is_zero() {
                continue;
            }
            let f = &a[i][c] * &inv;
            for j in c..n {
                let v = &f * &a[c][j];
                a[i][j] -= v;
            }
        }
    }
    d
}

pub fn trace(a: &[Vec<Rational>]) -> Rational {
    (0..a.len()).fold(Rational::zero(), |acc, i| acc + &a[i][i])
}

/// Coefficients `c_0..c_n` of `det(x I - A) = sum c_k x^k` (Faddeev-LeVerrier).
pub fn char_poly(a: &[Vec<Rational>]) -> Vec<Rational> {
    let n = a.len();
    let mut coeffs = vec![Rational::zero(); n + 1];
    coeffs[n] = Rational::one();
    let mut m = zeros(n, n);
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = mat_mul(a, &m);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += &coeffs[n - k + 1];
        }
        m = next;
        let am = mat_mul(a, &m);
        coeffs[n - k] = -trace(&am) / rat_int(k as i64);
    }
    coeffs
}

fn eval_poly(coeffs: &[Rational], x: &Rational) -> Rational {
    coeffs.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
}

fn divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let n = n.abs().to_u64()?;
    if n > 1_000_000_000_000 {
        return None;
    }
    let mut out = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(BigInt::from(d));
            if d * d != n {
                out.push(BigInt::from(n / d));
            }
        }
        d += 1;
    }
    Some(out)
}

/// Rational roots of a polynomial with their multiplicities, plus the degree
/// of the remaining factor without rational roots. `None` when the
/// coefficients are too large for the divisor search.
pub fn rational_roots(coeffs: &[Rational]) -> Option<(Vec<(Rational, usize)>, usize)> {
    let mut p: Vec<Rational> = coeffs.to_vec();
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    let mut roots: Vec<(Rational, usize)> = Vec::new();
    let push = |r: Rational, roots: &mut Vec<(Rational, usize)>| {
        if let Some(e) = roots.iter_mut().find(|(x, _)| *x == r) {
            e.1 += 1;
        } else {
            roots.push((r, 1));
        }
    };
    while p.len() > 1 && p[0].is_zero() {
        p.remove(0);
        push(Rational::zero(), &mut roots);
    }
    loop {
        if p.len() <= 1 {
            break;
        }
        let l = p.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = p
            .iter()
            .map(|c| (c * Rational::from_integer(l.clone())).to_integer())
            .collect();
        let ps = divisors(&ints[0])?;
        let qs = divisors(&ints[ints.len() - 1])?;
        let mut found = None;
        'search: for q in &qs {
            for pp in &ps {
                for s in [1i64, -1] {
                    let cand = Rational::new(pp * BigInt::from(s), q.clone());
                    if eval_poly(&p, &cand).is_zero() {
                        found = Some(cand);
                        break 'search;
                    }
                }
            }
        }
        let Some(r) = found else { break };
        // synthetic division by (x - r)
        let deg = p.len() - 1;
        let mut q = vec![Rational::zero(); deg];
        let mut carry = Rational::zero();
        for k in (0..deg).rev() {
            carry = &p[k + 1] + &carry * &r;
            q[k] = carry.clone();
        }
        p = q;
        push(r, &mut roots);
    }
    roots.sort_by(|a, b| a.0.cmp(&b.0));
    Some((roots, p.len().saturating_sub(1)))
}

/// Generalized eigenspace `ker (A - lambda I)^mult`.
pub fn root_subspace(a: &[Vec<Rational>], lambda: &Rational, mult: usize) -> Vec<Vec<Rational>> {
    let n = a.len();
    let mut shifted: Matrix = a.to_vec();
    for (i, row) in shifted.iter_mut().enumerate() {
        row[i] -= lambda;
    }
    let mut p = identity(n);
    for _ in 0..mult {
        p = mat_mul(&p, &shifted);
    }
    null_space(&p, n)
}

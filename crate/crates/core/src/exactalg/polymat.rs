//! Determinants and adjugates of small quasi-polynomial matrices.
//!
//! Division-free Laplace expansion with memoization over column subsets:
//! `O(2^n n)` ring operations, which is what the low dimensions here need and
//! avoids any division in the ring.

use std::collections::HashMap;

use super::{QPoly, Rational};

pub type PolyMatrix = Vec<Vec<QPoly>>;

/// Determinant of the submatrix with the given rows and columns.
fn minor_det(a: &[Vec<QPoly>], rows: &[usize], cols: &[usize], nvars: usize) -> QPoly {
    let k = rows.len();
    assert_eq!(k, cols.len());
    if k == 0 {
        return QPoly::one(nvars);
    }
    // memo[mask] = det of rows[0..popcount(mask)] against the columns in mask
    let mut memo: HashMap<u32, QPoly> = HashMap::new();
    memo.insert(0, QPoly::one(nvars));
    for size in 1..=k {
        let row = rows[size - 1];
        for mask in 0u32..(1 << k) {
            if mask.count_ones() as usize != size {
                continue;
            }
            let mut acc = QPoly::zero(nvars);
            // expand along the last row; sign by position among chosen columns
            let mut pos = 0;
            for (ci, &c) in cols.iter().enumerate() {
                if mask & (1 << ci) == 0 {
                    continue;
                }
                let entry = &a[row][c];
                if !entry.is_zero() {
                    let rest = &memo[&(mask & !(1 << ci))];
                    if !rest.is_zero() {
                        let term = entry * rest;
                        if (size - 1 - pos) % 2 == 0 {
                            acc += &term;
                        } else {
                            acc -= &term;
                        }
                    }
                }
                pos += 1;
            }
            memo.insert(mask, acc);
        }
    }
    memo.remove(&((1u32 << k) - 1)).unwrap()
}

pub fn det(a: &[Vec<QPoly>]) -> QPoly {
    let n = a.len();
    let nvars = a.first().and_then(|r| r.first()).map_or(0, QPoly::nvars);
    let idx: Vec<usize> = (0..n).collect();
    minor_det(a, &idx, &idx, nvars)
}

/// Adjugate, so that `a * adj(a) = det(a) I`.
pub fn adjugate(a: &[Vec<QPoly>]) -> PolyMatrix {
    let n = a.len();
    let nvars = a.first().and_then(|r| r.first()).map_or(0, QPoly::nvars);
    let mut out = vec![vec![QPoly::zero(nvars); n]; n];
    for i in 0..n {
        for j in 0..n {
            let rows: Vec<usize> = (0..n).filter(|&r| r != j).collect();
            let cols: Vec<usize> = (0..n).filter(|&c| c != i).collect();
            let m = minor_det(a, &rows, &cols, nvars);
            out[i][j] = if (i + j) % 2 == 0 { m } else { -m };
        }
    }
    out
}

pub fn from_rational(a: &[Vec<Rational>], nvars: usize) -> PolyMatrix {
    a.iter()
        .map(|r| r.iter().map(|x| QPoly::constant(nvars, x.clone())).collect())
        .collect()
}

/// `Some(M)` when every entry is constant.
pub fn to_rational(a: &[Vec<QPoly>]) -> Option<Vec<Vec<Rational>>> {
    a.iter().map(|r| r.iter().map(QPoly::as_constant).collect()).collect()
}

pub fn mul(a: &[Vec<QPoly>], b: &[Vec<QPoly>]) -> PolyMatrix {
    let nvars = a.first().and_then(|r| r.first()).map_or(0, QPoly::nvars);
    let k = b.len();
    let n = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..n)
                .map(|j| {
                    let mut acc = QPoly::zero(nvars);
                    for l in 0..k {
                        if !row[l].is_zero() && !b[l][j].is_zero() {
                            acc += &(&row[l] * &b[l][j]);
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rat;

    #[test]
    fn adjugate_inverts_up_to_det() {
        let n = 2;
        let t1 = QPoly::var(n, 0);
        let e = QPoly::exp(n, 1, rat(1, 1));
        let g = vec![
            vec![e.scale(&rat(2, 1)), t1.clone()],
            vec![t1.clone(), QPoly::from_int(n, 2)],
        ];
        let d = det(&g);
        assert_eq!(d, &e.scale(&rat(4, 1)) - &t1.pow(2));
        let prod = mul(&g, &adjugate(&g));
        for (i, row) in prod.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                if i == j {
                    assert_eq!(x, &d);
                } else {
                    assert!(x.is_zero());
                }
            }
        }
    }

    #[test]
    fn three_by_three() {
        let m: Vec<Vec<Rational>> = vec![
            vec![rat(2, 1), rat(0, 1), rat(1, 1)],
            vec![rat(1, 1), rat(3, 1), rat(2, 1)],
            vec![rat(1, 1), rat(1, 1), rat(1, 1)],
        ];
        let p = from_rational(&m, 1);
        assert_eq!(det(&p).as_constant(), Some(crate::exactalg::linalg::det(&m)));
    }
}

//! Dense linear algebra over the field of rational functions and over Q.

use num_traits::Zero;

use crate::error::{JetError, Result};
use crate::expr::Expr;
use crate::poly::Coeff;

pub type Matrix = Vec<Vec<Expr>>;

pub fn identity(n: usize) -> Matrix {
    (0..n).map(|i| (0..n).map(|j| if i == j { Expr::one() } else { Expr::zero() }).collect()).collect()
}

fn minor(m: &Matrix, row: usize, col: usize) -> Matrix {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| r.iter().enumerate().filter(|(j, _)| *j != col).map(|(_, e)| e.clone()).collect())
        .collect()
}

/// Determinant by cofactor expansion along the sparsest row; adequate for
/// the 3x3 and 4x4 matrices of this crate, and exact.
pub fn det(m: &Matrix) -> Expr {
    let n = m.len();
    match n {
        0 => Expr::one(),
        1 => m[0][0].clone(),
        2 => &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0]),
        _ if n > 5 => det_elimination(m),
        _ => {
            let row = (0..n).max_by_key(|&i| m[i].iter().filter(|e| e.is_zero()).count()).unwrap();
            let mut acc = Expr::zero();
            for j in 0..n {
                if m[row][j].is_zero() {
                    continue;
                }
                let c = &m[row][j] * &det(&minor(m, row, j));
                acc = if (row + j) % 2 == 0 { &acc + &c } else { &acc - &c };
            }
            acc
        }
    }
}

fn det_elimination(m: &Matrix) -> Expr {
    let mut a = m.clone();
    let n = a.len();
    let mut d = Expr::one();
    for k in 0..n {
        let Some(p) = (k..n).filter(|&i| !a[i][k].is_zero()).min_by_key(|&i| a[i][k].size()) else {
            return Expr::zero();
        };
        if p != k {
            a.swap(p, k);
            d = -d;
        }
        let piv = a[k][k].clone();
        d = &d * &piv;
        let inv = piv.recip().expect("nonzero pivot");
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] * &inv;
            for j in k..n {
                let t = &f * &a[k][j];
                a[i][j] = &a[i][j] - &t;
            }
        }
    }
    d
}

/// Inverse via the adjugate. Fails with `DivisionByZero` for singular input.
pub fn inverse(m: &Matrix) -> Result<Matrix> {
    let n = m.len();
    let d = det(m);
    if d.is_zero() {
        return Err(JetError::DivisionByZero);
    }
    let dinv = d.recip()?;
    let mut out = vec![vec![Expr::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let c = det(&minor(m, j, i));
            let c = if (i + j) % 2 == 0 { c } else { -c };
            out[i][j] = &c * &dinv;
        }
    }
    Ok(out)
}

pub fn mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let k = b.len();
    let m = if k == 0 { 0 } else { b[0].len() };
    let mut out = vec![vec![Expr::zero(); m]; n];
    for i in 0..n {
        for j in 0..m {
            let mut acc = Expr::zero();
            for l in 0..k {
                if !a[i][l].is_zero() && !b[l][j].is_zero() {
                    acc = &acc + &(&a[i][l] * &b[l][j]);
                }
            }
            out[i][j] = acc;
        }
    }
    out
}

/// Reduced row echelon form; returns the pivot columns.
pub fn rref(a: &mut Matrix) -> Vec<usize> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).filter(|&i| !a[i][c].is_zero()).min_by_key(|&i| a[i][c].size()) else { continue };
        a.swap(p, r);
        let inv = a[r][c].recip().expect("nonzero pivot");
        for j in c..cols {
            if !a[r][j].is_zero() {
                a[r][j] = &a[r][j] * &inv;
            }
        }
        for i in 0..rows {
            if i == r || a[i][c].is_zero() {
                continue;
            }
            let f = a[i][c].clone();
            for j in c..cols {
                if !a[r][j].is_zero() {
                    let t = &f * &a[r][j];
                    a[i][j] = &a[i][j] - &t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &Matrix) -> usize {
    let mut a = m.clone();
    rref(&mut a).len()
}

/// Basis of the right nullspace.
pub fn nullspace(m: &Matrix) -> Vec<Vec<Expr>> {
    let mut a = m.clone();
    let cols = if a.is_empty() { 0 } else { a[0].len() };
    let pivots = rref(&mut a);
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Expr::zero(); cols];
        v[free] = Expr::one();
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = -&a[r][free];
        }
        basis.push(v);
    }
    basis
}

/// Rank of a rational matrix.
pub fn rank_q(m: &[Vec<Coeff>]) -> usize {
    let mut a: Vec<Vec<Coeff>> = m.to_vec();
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(p, r);
        for i in r + 1..rows {
            if a[i][c].is_zero() {
                continue;
            }
            let f = &a[i][c] / &a[r][c];
            for j in c..cols {
                let t = &f * &a[r][j];
                a[i][j] -= t;
            }
        }
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::var::{MultiIndex, Var};

    fn u() -> Expr {
        Expr::var(Var::jet(0, MultiIndex::ZERO))
    }

    #[test]
    fn dkp_quadric_inverse() {
        let h = Expr::ratio(1, 2);
        let z = Expr::zero();
        let q = vec![vec![z.clone(), z.clone(), h.clone()], vec![z.clone(), Expr::int(-1), z.clone()], vec![h.clone(), z.clone(), u()]];
        let g = inverse(&q).unwrap();
        assert_eq!(g[0][0], &u() * &Expr::int(-4));
        assert_eq!(g[0][2], Expr::int(2));
        assert_eq!(g[1][1], Expr::int(-1));
        assert_eq!(g[2][2], Expr::zero());
        assert_eq!(mul(&q, &g), identity(3));
    }

    #[test]
    fn singular() {
        let m = vec![vec![Expr::one(), Expr::zero(), Expr::zero()], vec![Expr::zero(), Expr::one(), Expr::zero()], vec![Expr::zero(); 3]];
        assert!(inverse(&m).is_err());
        assert_eq!(rank(&m), 2);
        assert_eq!(nullspace(&m).len(), 1);
    }

    #[test]
    fn elimination_matches_cofactors() {
        let n = 6;
        let m: Matrix = (0..n)
            .map(|i| (0..n).map(|j| if i == j { &u() + &Expr::int(i as i64) } else { Expr::int(((i * 7 + j * 3) % 5) as i64) }).collect())
            .collect();
        let d1 = det_elimination(&m);
        let mut acc = Expr::zero();
        for j in 0..n {
            let c = &m[0][j] * &det(&minor(&m, 0, j));
            acc = if j % 2 == 0 { &acc + &c } else { &acc - &c };
        }
        assert_eq!(d1, acc);
    }
}

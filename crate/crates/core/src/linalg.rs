//! Gaussian elimination: inversion, rank and null spaces.

use crate::matrix::Matrix;
use crate::scalar::{Scalar, Tower};

/// Pivot threshold for a matrix: `eps * (1 + ||a||_inf)` in the float
/// tower, zero in the exact tower.
pub fn pivot_tolerance<T: Scalar>(a: &Matrix<T>, eps: f64) -> f64 {
    match T::TOWER {
        Tower::Exact => 0.0,
        Tower::Float => eps * (1.0 + a.norm_inf()),
    }
}

fn negligible<T: Scalar>(x: &T, tol: f64) -> bool {
    match T::TOWER {
        Tower::Exact => x.is_zero_tol(0.0),
        Tower::Float => x.abs_f64() < tol || x.abs_f64() == 0.0,
    }
}

/// Inverse of a square matrix, or `None` if it is singular.
///
/// Uses partial pivoting. In the float tower a pivot below
/// `eps * (1 + ||a||_inf)` counts as zero.
pub fn try_invert<T: Scalar>(a: &Matrix<T>, eps: f64) -> Option<Matrix<T>> {
    assert!(a.is_square(), "inversion needs a square matrix");
    let n = a.rows();
    let tol = pivot_tolerance(a, eps);
    let mut m: Vec<Vec<T>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    let mut inv: Vec<Vec<T>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&p, &q| m[p][col].abs_f64().total_cmp(&m[q][col].abs_f64()))
            .expect("nonempty range");
        // In the exact tower prefer the first nonzero row, which keeps
        // the work free of floating point decisions.
        let pivot = match T::TOWER {
            Tower::Exact => (col..n).find(|&p| !m[p][col].is_zero_tol(0.0))?,
            Tower::Float => pivot,
        };
        if negligible(&m[pivot][col], tol) {
            return None;
        }
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let p = m[col][col].inv(0.0);
        for j in 0..n {
            m[col][j] = m[col][j].mul(&p);
            inv[col][j] = inv[col][j].mul(&p);
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero_tol(0.0) {
                continue;
            }
            let f = m[r][col].clone();
            for j in 0..n {
                let t = m[col][j].mul(&f);
                m[r][j] = m[r][j].sub(&t);
                let t = inv[col][j].mul(&f);
                inv[r][j] = inv[r][j].sub(&t);
            }
        }
    }
    Some(Matrix::from_rows(inv))
}

/// The inverse, or the zero matrix of the same shape if `a` is singular.
pub fn invert<T: Scalar>(a: &Matrix<T>, eps: f64) -> Matrix<T> {
    try_invert(a, eps).unwrap_or_else(|| Matrix::zeros(a.rows(), a.cols()))
}

/// Reduced row echelon form with complete pivoting on the column choice
/// within each row step. Returns the reduced rows and pivot columns.
fn rref<T: Scalar>(a: &Matrix<T>, tol: f64) -> (Vec<Vec<T>>, Vec<usize>) {
    let (n, m) = a.shape();
    let mut rows: Vec<Vec<T>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..m {
        if r == n {
            break;
        }
        let best = (r..n)
            .max_by(|&p, &q| rows[p][col].abs_f64().total_cmp(&rows[q][col].abs_f64()))
            .expect("nonempty range");
        if negligible(&rows[best][col], tol) {
            for row in rows.iter_mut().skip(r) {
                row[col] = T::zero();
            }
            continue;
        }
        rows.swap(r, best);
        let p = rows[r][col].inv(0.0);
        for x in rows[r].iter_mut() {
            *x = x.mul(&p);
        }
        for i in 0..n {
            if i == r || rows[i][col].is_zero_tol(0.0) {
                continue;
            }
            let f = rows[i][col].clone();
            for j in 0..m {
                let t = rows[r][j].mul(&f);
                rows[i][j] = rows[i][j].sub(&t);
            }
        }
        pivots.push(col);
        r += 1;
    }
    (rows, pivots)
}

/// Numerical rank with the given absolute pivot tolerance.
pub fn rank_tol<T: Scalar>(a: &Matrix<T>, tol: f64) -> usize {
    rref(a, tol).1.len()
}

/// Rank using the pivot tolerance `eps * (1 + ||a||_inf)`.
pub fn rank<T: Scalar>(a: &Matrix<T>, eps: f64) -> usize {
    rank_tol(a, pivot_tolerance(a, eps))
}

/// A basis of the null space, one vector per free column of the echelon
/// form.
pub fn nullspace<T: Scalar>(a: &Matrix<T>, tol: f64) -> Vec<Vec<T>> {
    let m = a.cols();
    let (rows, pivots) = rref(a, tol);
    let free: Vec<usize> = (0..m).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![T::zero(); m];
            v[f] = T::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = rows[r][f].neg();
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::GaussRat;
    use num::complex::Complex64;

    #[test]
    fn inverts_two_by_two_exactly() {
        let a = Matrix::<GaussRat>::from_i64(&[&[1, 2], &[3, 4]]);
        let expect = Matrix::from_rows(vec![
            vec![GaussRat::int(-2), GaussRat::int(1)],
            vec![GaussRat::ratio(3, 2), GaussRat::ratio(-1, 2)],
        ]);
        assert_eq!(invert(&a, 1e-9), expect);
    }

    #[test]
    fn singular_gives_zero() {
        let z = Matrix::<GaussRat>::zeros(2, 2);
        assert_eq!(invert(&z, 1e-9), z);
        let s = Matrix::<Complex64>::from_i64(&[&[1, 2], &[2, 4]]);
        assert!(invert(&s, 1e-9).is_zero_tol(0.0));
    }

    #[test]
    fn identity_is_its_own_inverse() {
        let i = Matrix::<Complex64>::identity(3);
        assert_eq!(invert(&i, 1e-9), i);
    }

    #[test]
    fn rank_and_nullspace() {
        let a = Matrix::<GaussRat>::from_i64(&[&[1, 1, 1], &[1, 1, 1], &[1, 1, 1]]);
        assert_eq!(rank(&a, 1e-9), 1);
        let ns = nullspace(&a, 0.0);
        assert_eq!(ns.len(), 2);
        for v in ns {
            let col = Matrix::from_vec(3, 1, v);
            assert!(a.matmul(&col).is_zero_tol(0.0));
        }
    }
}

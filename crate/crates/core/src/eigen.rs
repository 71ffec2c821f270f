//! Eigenvalues, diagonalizability and canonical eigenvector bases for
//! complex matrices.
//!
//! Eigenvalues come from a Householder reduction to Hessenberg form followed
//! by single-shift complex QR iteration. Eigenvalues within `delta` of each
//! other are clustered; a matrix is treated as diagonalizable when every
//! cluster's size equals `n - rank(A - mean * I)`.

use crate::linalg::{nullspace, pivot_tolerance, rank_tol, try_invert};
use crate::matrix::Matrix;
use num::complex::Complex64;
use num::Zero;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EigenError {
    #[error("expected square matrices of equal shape, got {0:?} and {1:?}")]
    ShapeMismatch((usize, usize), (usize, usize)),
    #[error("the candidate is not a valid eigenvector basis")]
    InvalidBasis,
}

type Dense = Vec<Vec<Complex64>>;

fn to_dense(a: &Matrix<Complex64>) -> Dense {
    (0..a.rows()).map(|i| a.row(i).to_vec()).collect()
}

fn hessenberg(h: &mut Dense) {
    let n = h.len();
    for k in 0..n.saturating_sub(2) {
        let norm: f64 = (k + 1..n).map(|i| h[i][k].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = h[k + 1][k];
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm;
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| h[i][k]).collect();
        v[0] -= alpha;
        let vn: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vn == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vn;
        }
        // H <- (I - 2vv*) H on rows k+1..n.
        for j in 0..n {
            let dot: Complex64 = (k + 1..n).map(|i| v[i - k - 1].conj() * h[i][j]).sum();
            for i in k + 1..n {
                h[i][j] -= 2.0 * v[i - k - 1] * dot;
            }
        }
        // H <- H (I - 2vv*) on columns k+1..n.
        for row in h.iter_mut() {
            let dot: Complex64 = (k + 1..n).map(|j| row[j] * v[j - k - 1]).sum();
            for j in k + 1..n {
                row[j] -= 2.0 * dot * v[j - k - 1].conj();
            }
        }
    }
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let tr = (a + d) / 2.0;
    let disc = ((a - d) / 2.0).powi(2) + b * c;
    let root = disc.sqrt();
    let (l1, l2) = (tr + root, tr - root);
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// One shifted QR step on the unreduced Hessenberg block `lo..=hi`.
fn qr_step(h: &mut Dense, lo: usize, hi: usize, mu: Complex64) {
    for i in lo..=hi {
        h[i][i] -= mu;
    }
    let mut rotations = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let (a, b) = (h[k][k], h[k + 1][k]);
        let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 {
            (1.0, Complex64::zero())
        } else if a.norm() == 0.0 {
            (0.0, Complex64::new(1.0, 0.0))
        } else {
            (a.norm() / r, (a / a.norm()) * b.conj() / r)
        };
        for j in k..=hi {
            let (x, y) = (h[k][j], h[k + 1][j]);
            h[k][j] = c * x + s * y;
            h[k + 1][j] = -s.conj() * x + c * y;
        }
        rotations.push((c, s));
    }
    for (off, &(c, s)) in rotations.iter().enumerate() {
        let k = lo + off;
        for row in h.iter_mut().take((k + 2).min(hi) + 1).skip(lo) {
            let (x, y) = (row[k], row[k + 1]);
            row[k] = c * x + s.conj() * y;
            row[k + 1] = -s * x + c * y;
        }
    }
    for i in lo..=hi {
        h[i][i] += mu;
    }
}

/// All eigenvalues of a square matrix, with algebraic multiplicity, in no
/// particular order.
pub fn eigenvalues(a: &Matrix<Complex64>) -> Vec<Complex64> {
    assert!(a.is_square(), "eigenvalues need a square matrix");
    let n = a.rows();
    let mut h = to_dense(a);
    hessenberg(&mut h);
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    let mut out = Vec::with_capacity(n);
    let mut hi = n as isize - 1;
    let mut iters = 0usize;
    while hi >= 0 {
        let hu = hi as usize;
        // Find the start of the unreduced block ending at `hu`.
        let mut lo = hu;
        while lo > 0 {
            let s = h[lo][lo].norm() + h[lo - 1][lo - 1].norm();
            let s = if s == 0.0 { scale } else { s };
            if h[lo][lo - 1].norm() <= f64::EPSILON * s {
                h[lo][lo - 1] = Complex64::zero();
                break;
            }
            lo -= 1;
        }
        if lo == hu {
            out.push(h[hu][hu]);
            hi -= 1;
            iters = 0;
            continue;
        }
        iters += 1;
        let mu = if iters.is_multiple_of(11) {
            // Exceptional shift against stagnation.
            h[hu][hu] + Complex64::new(h[hu][hu - 1].norm(), 0.5 * h[hu][hu - 1].norm())
        } else {
            wilkinson_shift(h[hu - 1][hu - 1], h[hu - 1][hu], h[hu][hu - 1], h[hu][hu])
        };
        if iters > 300 {
            // Accept the current diagonal of a block that refuses to split.
            out.push(h[hu][hu]);
            hi -= 1;
            iters = 0;
            continue;
        }
        qr_step(&mut h, lo, hu, mu);
    }
    out
}

/// Groups of eigenvalues within `delta` of each other (transitively),
/// returned as (mean, multiplicity) sorted ascending by real part and then
/// imaginary part. Real parts within `delta` count as equal.
pub fn eigenvalue_clusters(values: &[Complex64], delta: f64) -> Vec<(Complex64, usize)> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= delta {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<Complex64>> = Default::default();
    for (i, &v) in values.iter().enumerate() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(v);
    }
    let mut clusters: Vec<(Complex64, usize)> = groups
        .into_values()
        .map(|g| (g.iter().sum::<Complex64>() / g.len() as f64, g.len()))
        .collect();
    sort_spectrum(&mut clusters, delta, |c| c.0);
    clusters
}

/// Sorts by real part, treating chains of real parts within `delta` as
/// ties broken by imaginary part.
fn sort_spectrum<X>(items: &mut Vec<X>, delta: f64, key: impl Fn(&X) -> Complex64) {
    items.sort_by(|a, b| key(a).re.total_cmp(&key(b).re));
    let mut out = Vec::with_capacity(items.len());
    let mut run: Vec<X> = Vec::new();
    let mut last_re = f64::NEG_INFINITY;
    for x in items.drain(..) {
        let re = key(&x).re;
        if !run.is_empty() && re - last_re > delta {
            run.sort_by(|a, b| key(a).im.total_cmp(&key(b).im));
            out.append(&mut run);
        }
        last_re = re;
        run.push(x);
    }
    run.sort_by(|a, b| key(a).im.total_cmp(&key(b).im));
    out.append(&mut run);
    *items = out;
}

fn shifted(a: &Matrix<Complex64>, lambda: Complex64) -> Matrix<Complex64> {
    Matrix::from_fn(a.rows(), a.cols(), |i, j| {
        if i == j {
            a[(i, j)] - lambda
        } else {
            a[(i, j)]
        }
    })
}

/// Per-cluster eigenspace data: algebraic multiplicity and a basis of
/// `ker(A - mean * I)` as computed by elimination.
struct Eigenspace {
    algebraic: usize,
    basis: Vec<Vec<Complex64>>,
}

fn eigenspaces(a: &Matrix<Complex64>, eps: f64, delta: f64) -> Vec<Eigenspace> {
    let tol = pivot_tolerance(a, eps);
    eigenvalue_clusters(&eigenvalues(a), delta)
        .into_iter()
        .map(|(lambda, algebraic)| Eigenspace {
            algebraic,
            basis: nullspace(&shifted(a, lambda), tol),
        })
        .collect()
}

/// Whether `a` is diagonalizable up to the clustering tolerance `delta`
/// and rank tolerance `eps * (1 + ||a||_inf)`.
pub fn is_diagonalizable(a: &Matrix<Complex64>, eps: f64, delta: f64) -> bool {
    let tol = pivot_tolerance(a, eps);
    let n = a.rows();
    eigenvalue_clusters(&eigenvalues(a), delta)
        .into_iter()
        .all(|(lambda, alg)| n - rank_tol(&shifted(a, lambda), tol) == alg)
}

fn dot(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(x, y)| x.conj() * y).sum()
}

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
}

fn modified_gram_schmidt(mut vs: Vec<Vec<Complex64>>) -> Vec<Vec<Complex64>> {
    let mut out: Vec<Vec<Complex64>> = Vec::with_capacity(vs.len());
    for v in vs.iter_mut() {
        for q in &out {
            let p = dot(q, v);
            for (x, y) in v.iter_mut().zip(q) {
                *x -= p * y;
            }
        }
        let nv = norm2(v);
        if nv > 0.0 {
            v.iter_mut().for_each(|x| *x /= nv);
        }
        out.push(v.clone());
    }
    out
}

/// Rotates `v` so that its first significant coordinate is real positive.
fn fix_phase(v: &mut [Complex64], delta: f64) {
    let big = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(lead) = v.iter().find(|z| z.norm() > delta * big).copied() {
        let rot = lead.conj() / lead.norm();
        for z in v.iter_mut() {
            *z *= rot;
        }
    }
}

/// The canonical result of `eigen(a)`: a basis of eigenvectors as columns,
/// ordered by eigenvalue, orthonormal within each eigenspace and with each
/// column's first significant coordinate real positive. Returns the zero
/// matrix when `a` is not diagonalizable.
pub fn eigen_canonical(a: &Matrix<Complex64>, eps: f64, delta: f64) -> Matrix<Complex64> {
    assert!(a.is_square(), "eigen needs a square matrix");
    let n = a.rows();
    let spaces = eigenspaces(a, eps, delta);
    if spaces.iter().any(|s| s.basis.len() != s.algebraic) {
        return Matrix::zeros(n, n);
    }
    let mut columns = Vec::with_capacity(n);
    for s in spaces {
        for mut v in modified_gram_schmidt(s.basis) {
            fix_phase(&mut v, delta);
            columns.push(v);
        }
    }
    Matrix::from_fn(n, n, |i, j| columns[j][i])
}

/// Eigenvalue of column `v` estimated by the Rayleigh quotient.
pub fn rayleigh(a: &Matrix<Complex64>, v: &[Complex64]) -> Complex64 {
    let col = Matrix::from_vec(v.len(), 1, v.to_vec());
    let av = a.matmul(&col);
    let vv = dot(v, v);
    if vv.norm() == 0.0 {
        Complex64::zero()
    } else {
        dot(v, av.data()) / vv
    }
}

/// Membership test for the nondeterministic result of `eigen(a)`.
///
/// Accepts `b` when it is invertible, every column `v` satisfies
/// `||a v - l v||_inf <= eps (1 + ||a||_inf) ||v||_inf` for its Rayleigh
/// quotient `l`, and columns whose quotients are within `delta` are
/// orthogonal up to `eps`. Also accepts `b = 0` for non-diagonalizable `a`.
pub fn verify_eigen(
    a: &Matrix<Complex64>,
    b: &Matrix<Complex64>,
    eps: f64,
    delta: f64,
) -> Result<bool, EigenError> {
    if !a.is_square() || a.shape() != b.shape() {
        return Err(EigenError::ShapeMismatch(a.shape(), b.shape()));
    }
    if b.is_zero_tol(0.0) {
        return Ok(!is_diagonalizable(a, eps, delta));
    }
    if try_invert(b, eps).is_none() {
        return Ok(false);
    }
    let n = a.rows();
    let bound = eps * (1.0 + a.norm_inf());
    let cols: Vec<Vec<Complex64>> = (0..n).map(|j| b.column(j)).collect();
    let mut lambdas = Vec::with_capacity(n);
    for v in &cols {
        let l = rayleigh(a, v);
        let av = a.matmul(&Matrix::from_vec(n, 1, v.clone()));
        let resid = av
            .data()
            .iter()
            .zip(v)
            .map(|(x, y)| (x - l * y).norm())
            .fold(0.0, f64::max);
        let vmax = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if resid > bound * vmax {
            return Ok(false);
        }
        lambdas.push(l);
    }
    for i in 0..n {
        for j in i + 1..n {
            if (lambdas[i] - lambdas[j]).norm() <= delta
                && dot(&cols[i], &cols[j]).norm() > eps * norm2(&cols[i]) * norm2(&cols[j])
            {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// A Jordan decomposition `Z A = J Z` with `W = Z^-1`. `J` has the
/// eigenvalues on its diagonal and `superdiag[i]` (0 or 1) at `(i, i+1)`.
#[derive(Clone, Debug)]
pub struct Jordan {
    pub z: Matrix<Complex64>,
    pub w: Matrix<Complex64>,
    pub diag: Vec<Complex64>,
    pub superdiag: Vec<f64>,
}

fn independent_of(span: &[Vec<Complex64>], v: &[Complex64], tol: f64) -> bool {
    let mut rows: Vec<Vec<Complex64>> = span.to_vec();
    let before = if rows.is_empty() {
        0
    } else {
        rank_tol(&Matrix::from_rows(rows.clone()), tol)
    };
    rows.push(v.to_vec());
    rank_tol(&Matrix::from_rows(rows), tol) > before
}

fn apply(n_mat: &Matrix<Complex64>, v: &[Complex64]) -> Vec<Complex64> {
    (0..n_mat.rows())
        .map(|i| (0..v.len()).map(|k| n_mat[(i, k)] * v[k]).sum())
        .collect()
}

/// Jordan chains per eigenvalue cluster, built top-down from the kernels
/// of powers of `A - lambda I`. Returns `None` when the chains found do not
/// span the whole space.
pub fn jordan_decomposition(a: &Matrix<Complex64>, eps: f64, delta: f64) -> Option<Jordan> {
    let n = a.rows();
    let mut columns: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut diag = Vec::with_capacity(n);
    let mut superdiag = Vec::with_capacity(n.saturating_sub(1));
    for (lambda, m) in eigenvalue_clusters(&eigenvalues(a), delta) {
        let nm = shifted(a, lambda);
        let mut kernels: Vec<Vec<Vec<Complex64>>> = vec![Vec::new()];
        let mut power = nm.clone();
        for _ in 0..m {
            kernels.push(nullspace(&power, pivot_tolerance(&power, eps)));
            power = power.matmul(&nm);
        }
        let mut heads: Vec<(Vec<Complex64>, usize)> = Vec::new();
        for k in (1..=m).rev() {
            let mut span = kernels[k - 1].clone();
            for (v, len) in &heads {
                let mut x = v.clone();
                for _ in 0..len - k {
                    x = apply(&nm, &x);
                }
                span.push(x);
            }
            for cand in &kernels[k] {
                if independent_of(&span, cand, delta) {
                    span.push(cand.clone());
                    heads.push((cand.clone(), k));
                }
            }
        }
        for (v, len) in heads {
            let mut chain = vec![v];
            for _ in 1..len {
                let next = apply(&nm, chain.last().expect("nonempty chain"));
                chain.push(next);
            }
            for (t, x) in chain.into_iter().rev().enumerate() {
                if !columns.is_empty() {
                    superdiag.push(if t == 0 { 0.0 } else { 1.0 });
                }
                columns.push(x);
                diag.push(lambda);
            }
        }
    }
    if columns.len() != n {
        return None;
    }
    let w = Matrix::from_fn(n, n, |i, j| columns[j][i]);
    let z = try_invert(&w, eps)?;
    Some(Jordan {
        z,
        w,
        diag,
        superdiag,
    })
}

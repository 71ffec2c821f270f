//! Direct reference algorithms. None of these call into the matlang
//! evaluator; they work on plain vectors so that agreement with a compiled
//! program means something.

use matlang::binrel::BinRelExpr;
use num::rational::BigRational;
use num::{Signed, Zero};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

pub type Rel = BTreeSet<(usize, usize)>;

/// Set-theoretic semantics of the relation algebra over `{1..n}`.
/// Unknown names denote the empty relation.
pub fn binrel_semantics(n: usize, rels: &BTreeMap<String, Rel>, e: &BinRelExpr) -> Rel {
    let go = |x: &BinRelExpr| binrel_semantics(n, rels, x);
    match e {
        BinRelExpr::Var(v) => rels.get(v).cloned().unwrap_or_default(),
        BinRelExpr::All => (1..=n).flat_map(|a| (1..=n).map(move |b| (a, b))).collect(),
        BinRelExpr::Identity => (1..=n).map(|a| (a, a)).collect(),
        BinRelExpr::Union(a, b) => go(a).union(&go(b)).copied().collect(),
        BinRelExpr::Difference(a, b) => go(a).difference(&go(b)).copied().collect(),
        BinRelExpr::Converse(a) => go(a).into_iter().map(|(x, y)| (y, x)).collect(),
        BinRelExpr::Compose(a, b) => {
            let (ra, rb) = (go(a), go(b));
            let mut out = Rel::new();
            for &(x, y) in &ra {
                for &(_, z) in rb.range((y, 0)..=(y, usize::MAX)) {
                    out.insert((x, z));
                }
            }
            out
        }
    }
}

/// Warshall's algorithm on a boolean adjacency matrix.
pub fn warshall(adj: &[Vec<bool>], reflexive: bool) -> Vec<Vec<bool>> {
    let n = adj.len();
    let mut c = adj.to_vec();
    for k in 0..n {
        for i in 0..n {
            if c[i][k] {
                for j in 0..n {
                    if c[k][j] {
                        c[i][j] = true;
                    }
                }
            }
        }
    }
    if reflexive {
        for (i, row) in c.iter_mut().enumerate() {
            row[i] = true;
        }
    }
    c
}

/// Two-colouring by breadth-first search; the graph is read as undirected.
pub fn is_bipartite(adj: &[Vec<bool>]) -> bool {
    let n = adj.len();
    let mut colour: Vec<Option<bool>> = vec![None; n];
    for start in 0..n {
        if colour[start].is_some() {
            continue;
        }
        colour[start] = Some(false);
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            let cu = colour[u].expect("queued vertices are coloured");
            for v in 0..n {
                if !(adj[u][v] || adj[v][u]) {
                    continue;
                }
                match colour[v] {
                    None => {
                        colour[v] = Some(!cu);
                        queue.push_back(v);
                    }
                    Some(cv) if cv == cu => return false,
                    Some(_) => {}
                }
            }
        }
    }
    true
}

/// Connected components of the undirected graph underlying `adj`, by
/// union-find.
pub fn component_count(adj: &[Vec<bool>]) -> usize {
    let n = adj.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..n {
        for j in 0..n {
            if adj[i][j] {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    (0..n).filter(|&i| find(&mut parent, i) == i).count()
}

/// `G_ij = d A_ij / k_i + (1 - d) / n`.
pub fn google_matrix(adj: &[Vec<f64>], d: f64) -> Vec<Vec<f64>> {
    let n = adj.len();
    adj.iter()
        .map(|row| {
            let k: f64 = row.iter().sum();
            row.iter().map(|a| d * a / k + (1.0 - d) / n as f64).collect()
        })
        .collect()
}

/// Stationary distribution of the Google matrix by power iteration,
/// stopped when successive iterates differ by less than `tol` in 1-norm.
pub fn pagerank_power(adj: &[Vec<f64>], d: f64, tol: f64) -> Vec<f64> {
    let g = google_matrix(adj, d);
    let n = g.len();
    let mut v = vec![1.0 / n as f64; n];
    for _ in 0..1_000_000 {
        let next: Vec<f64> = (0..n).map(|j| (0..n).map(|i| g[i][j] * v[i]).sum()).collect();
        let diff: f64 = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum();
        v = next;
        if diff < tol {
            break;
        }
    }
    v
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations,
/// ascending, with the matching orthonormal eigenvectors as columns.
pub fn jacobi_eigen(sym: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = sym.len();
    let mut a = sym.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[x][x].total_cmp(&a[y][y]));
    let values = order.iter().map(|&k| a[k][k]).collect();
    let vectors = (0..n).map(|i| order.iter().map(|&k| v[i][k]).collect()).collect();
    (values, vectors)
}

/// Exact rank by Gaussian elimination over the rationals.
pub fn rank_exact(m: &[Vec<BigRational>]) -> usize {
    let mut a = m.to_vec();
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&r| !a[r][c].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        for r in 0..rows {
            if r != rank && !a[r][c].is_zero() {
                let f = &a[r][c] / &a[rank][c];
                for k in c..cols {
                    let delta = &f * &a[rank][k];
                    a[r][k] -= delta;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Gauss-Jordan inversion with partial pivoting. `None` when a pivot falls
/// below `1e-12` times the largest entry.
pub fn invert(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = m.len();
    let scale = m.iter().flatten().fold(0.0f64, |s, x| s.max(x.abs())).max(1.0);
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))?;
        if a[p][c].abs() < 1e-12 * scale {
            return None;
        }
        a.swap(c, p);
        let piv = a[c][c];
        for x in a[c].iter_mut() {
            *x /= piv;
        }
        for r in 0..n {
            if r != c {
                let f = a[r][c];
                if f != 0.0 {
                    for k in 0..2 * n {
                        a[r][k] -= f * a[c][k];
                    }
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Determinant by exact elimination.
pub fn det_exact(m: &[Vec<BigRational>]) -> BigRational {
    let mut a = m.to_vec();
    let n = a.len();
    let mut det = BigRational::from_integer(1.into());
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !a[r][c].is_zero()) else {
            return BigRational::zero();
        };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c].clone();
        for r in c + 1..n {
            let f = &a[r][c] / &a[c][c];
            for k in c..n {
                let delta = &f * &a[c][k];
                a[r][k] -= delta;
            }
        }
    }
    det
}

/// Smallest entry of a real vector.
pub fn min_entry(v: &[BigRational]) -> Option<BigRational> {
    v.iter().min().cloned()
}

/// Largest absolute entrywise difference.
pub fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn is_nonnegative(x: &BigRational) -> bool {
    !x.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn adj(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
        let mut a = vec![vec![false; n]; n];
        for &(i, j) in edges {
            a[i][j] = true;
        }
        a
    }

    #[test]
    fn closure_of_path() {
        let c = warshall(&adj(3, &[(0, 1), (1, 2)]), false);
        assert!(c[0][2] && !c[2][0] && !c[0][0]);
    }

    #[test]
    fn odd_cycle_is_not_bipartite() {
        assert!(!is_bipartite(&adj(3, &[(0, 1), (1, 2), (2, 0)])));
        assert!(is_bipartite(&adj(4, &[(0, 1), (1, 2), (2, 3), (3, 0)])));
    }

    #[test]
    fn components() {
        assert_eq!(component_count(&adj(4, &[])), 4);
        assert_eq!(component_count(&adj(4, &[(0, 1), (3, 2)])), 2);
    }

    #[test]
    fn jacobi_on_two_by_two() {
        let (vals, vecs) = jacobi_eigen(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        assert!((vals[0] - 1.0).abs() < 1e-12 && (vals[1] - 3.0).abs() < 1e-12);
        assert!((vecs[0][1] - vecs[1][1]).abs() < 1e-12);
    }

    #[test]
    fn exact_rank_and_det() {
        let r = |x: i64| BigRational::from_integer(x.into());
        let m = vec![vec![r(1), r(2)], vec![r(2), r(4)]];
        assert_eq!(rank_exact(&m), 1);
        assert!(det_exact(&m).is_zero());
        assert_eq!(det_exact(&[vec![r(0), r(1)], vec![r(1), r(0)]]), r(-1));
    }

    #[test]
    fn inverse() {
        let inv = invert(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert!(max_abs_diff(&inv, &[vec![-2.0, 1.0], vec![1.5, -0.5]]) < 1e-12);
        assert!(invert(&[vec![1.0, 2.0], vec![2.0, 4.0]]).is_none());
    }

    #[test]
    fn pagerank_of_a_cycle_is_uniform() {
        let a = vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]];
        let v = pagerank_power(&a, 0.85, 1e-13);
        assert!(v.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-9));
    }
}

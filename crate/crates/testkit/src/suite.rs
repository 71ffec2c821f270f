//! Runs each standard-library program against its reference procedure on
//! seeded random inputs.

use crate::gen::{self, TestRng};
use crate::oracles;
use matlang::corpus::{NamedProgram, OracleKind};
use matlang::scalar::GaussRat;
use matlang::{eval, EvalConfig, Instance, Matrix, Tower};
use num::complex::Complex64;
use num::rational::BigRational;
use num::{ToPrimitive, Zero};
use rand::Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct ProgramReport {
    pub name: String,
    pub cases: usize,
    pub passed: usize,
    pub failures: Vec<String>,
}

impl ProgramReport {
    pub fn ok(&self) -> bool {
        self.passed == self.cases
    }
}

/// The variable holding the main input; `scalar_mult` also has `C`.
fn only_var(p: &NamedProgram) -> String {
    if p.oracle == OracleKind::ScalarMult {
        return "A".into();
    }
    p.schema
        .names()
        .next()
        .cloned()
        .expect("corpus programs have at least one variable")
}

/// A random input inside the program's precondition.
pub fn sample_input(p: &NamedProgram, rng: &mut TestRng) -> Instance<GaussRat> {
    let v = only_var(p);
    let one = |m: Matrix<GaussRat>| Instance::new().with(&v, m);
    match &p.oracle {
        OracleKind::Constant(_) => {
            let (r, c) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
            one(gen::matrix(rng, r, c, 0.3))
        }
        OracleKind::ScalarMult => {
            let (r, c) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
            Instance::new()
                .with("C", gen::matrix(rng, 1, 1, 0.3))
                .with("A", gen::matrix(rng, r, c, 0.3))
        }
        OracleKind::GoogleMatrix { .. } | OracleKind::PageRank { .. } => {
            let n = rng.gen_range(1..=6);
            let p = rng.gen_range(0.2..0.7);
            one(gen::bool_matrix(&gen::digraph_positive_outdegree(rng, n, p)))
        }
        OracleKind::VectorMin => {
            let n = rng.gen_range(1..=6);
            if rng.gen_bool(0.2) {
                let x = gen::rational_entry(rng);
                one(Matrix::from_fn(n, 1, |_, _| x.clone()))
            } else {
                one(gen::matrix(rng, n, 1, 0.0))
            }
        }
        OracleKind::TransitiveClosure { .. } | OracleKind::ComponentCount => {
            let n = rng.gen_range(1..=8);
            let p = rng.gen_range(0.05..0.4);
            one(gen::bool_matrix(&gen::digraph(rng, n, p)))
        }
        OracleKind::Bipartite => {
            let n = rng.gen_range(1..=8);
            let p = rng.gen_range(0.1..0.5);
            one(gen::bool_matrix(&gen::simple_graph(rng, n, p)))
        }
        OracleKind::Rank => {
            let n = rng.gen_range(1..=6);
            let m = if rng.gen_bool(0.5) {
                let r = rng.gen_range(0..=n);
                gen::symmetric_low_rank(rng, n, r)
            } else {
                gen::symmetric_integer(rng, n)
            };
            one(gen::int_matrix(&m))
        }
        OracleKind::FiedlerSpace => {
            let n = rng.gen_range(1..=6);
            let p = rng.gen_range(0.2..0.8);
            one(gen::bool_matrix(&gen::simple_graph(rng, n, p)))
        }
        OracleKind::Inverse => {
            let n = rng.gen_range(1..=5);
            let mut m = gen::well_conditioned(rng, n);
            if n > 1 && rng.gen_bool(0.15) {
                let src = rng.gen_range(0..n);
                let dst = (src + 1) % n;
                for j in 0..n {
                    let x = m[(src, j)].clone();
                    m.set(dst, j, x);
                }
            }
            one(m)
        }
    }
}

fn real(x: &GaussRat) -> f64 {
    x.re.to_f64().unwrap_or(f64::NAN)
}

fn to_f64(m: &Matrix<GaussRat>) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).iter().map(real).collect()).collect()
}

fn to_bool(m: &Matrix<GaussRat>) -> Vec<Vec<bool>> {
    (0..m.rows()).map(|i| m.row(i).iter().map(|x| !x.re.is_zero()).collect()).collect()
}

fn rows_c64(m: &Matrix<Complex64>) -> Vec<Vec<Complex64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

fn max_diff_c(out: &Matrix<Complex64>, want: &[Vec<Complex64>]) -> Result<f64, String> {
    if out.rows() != want.len() || want.iter().any(|r| r.len() != out.cols()) {
        return Err(format!("shape {:?} does not match expected", out.shape()));
    }
    Ok(rows_c64(out)
        .iter()
        .flatten()
        .zip(want.iter().flatten())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max))
}

fn within(out: &Matrix<Complex64>, want: &[Vec<f64>], tol: f64) -> Result<(), String> {
    let want: Vec<Vec<Complex64>> = want
        .iter()
        .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
        .collect();
    let d = max_diff_c(out, &want)?;
    if d <= tol {
        Ok(())
    } else {
        Err(format!("max deviation {d:e} exceeds {tol:e}"))
    }
}

fn exact_eq(out: &Option<Matrix<GaussRat>>, want: &Matrix<GaussRat>) -> Result<(), String> {
    match out {
        Some(o) if o == want => Ok(()),
        Some(o) => Err(format!("got\n{o}expected\n{want}")),
        None => Err("exact result unavailable".into()),
    }
}

fn scalar_eq(out: &Matrix<Complex64>, want: f64, tol: f64) -> Result<(), String> {
    within(out, &[vec![want]], tol)
}

fn complex_mul(a: &GaussRat, b: &GaussRat) -> GaussRat {
    GaussRat::new(
        &a.re * &b.re - &a.im * &b.im,
        &a.re * &b.im + &a.im * &b.re,
    )
}

/// Evaluates the program on `inst` and compares with the reference.
pub fn check_case(p: &NamedProgram, inst: &Instance<GaussRat>) -> Result<(), String> {
    p.check_input(inst)?;
    let (exact, out) = match p.tower {
        Tower::Exact => {
            let m = eval(inst, &p.expr, &EvalConfig::exact()).map_err(|e| e.to_string())?;
            let c = m.to_c64();
            (Some(m), c)
        }
        Tower::Float => {
            let m = eval(&inst.to_c64(), &p.expr, &EvalConfig::float()).map_err(|e| e.to_string())?;
            (None, m)
        }
    };
    let input = inst.get(&only_var(p)).expect("checked by precondition");
    let tol = p.tolerance;
    match &p.oracle {
        OracleKind::Constant(c) => {
            let want = Matrix::from_vec(1, 1, vec![c.clone()]);
            exact_eq(&exact, &want)
        }
        OracleKind::ScalarMult => {
            let c = &inst.get("C").expect("scalar")[(0, 0)];
            let want = Matrix::from_fn(input.rows(), input.cols(), |i, j| {
                complex_mul(c, &input[(i, j)])
            });
            exact_eq(&exact, &want)
        }
        OracleKind::GoogleMatrix { d } => {
            let g = oracles::google_matrix(&to_f64(input), d.to_f64().unwrap_or(f64::NAN));
            within(&out, &g, tol)
        }
        OracleKind::VectorMin => {
            let v: Vec<BigRational> = input.data().iter().map(|x| x.re.clone()).collect();
            let m = oracles::min_entry(&v).ok_or("empty vector")?;
            exact_eq(&exact, &Matrix::from_vec(1, 1, vec![GaussRat::real(m)]))
        }
        OracleKind::PageRank { d } => {
            let v = oracles::pagerank_power(&to_f64(input), d.to_f64().unwrap_or(f64::NAN), 1e-12);
            let col: Vec<Vec<f64>> = v.into_iter().map(|x| vec![x]).collect();
            within(&out, &col, tol)
        }
        OracleKind::TransitiveClosure { reflexive } => {
            let c = oracles::warshall(&to_bool(input), *reflexive);
            exact_eq(&exact, &gen::bool_matrix(&c))
        }
        OracleKind::Bipartite => {
            let b = oracles::is_bipartite(&to_bool(input));
            exact_eq(&exact, &Matrix::from_vec(1, 1, vec![GaussRat::int(b as i64)]))
        }
        OracleKind::ComponentCount => {
            let k = oracles::component_count(&to_bool(input));
            exact_eq(&exact, &Matrix::from_vec(1, 1, vec![GaussRat::int(k as i64)]))
        }
        OracleKind::Rank => {
            let rows: Vec<Vec<BigRational>> =
                (0..input.rows()).map(|i| input.row(i).iter().map(|x| x.re.clone()).collect()).collect();
            scalar_eq(&out, oracles::rank_exact(&rows) as f64, tol)
        }
        OracleKind::FiedlerSpace => fiedler_check(&to_f64(input), &out, tol),
        OracleKind::Inverse => {
            let rows: Vec<Vec<BigRational>> =
                (0..input.rows()).map(|i| input.row(i).iter().map(|x| x.re.clone()).collect()).collect();
            if oracles::det_exact(&rows).is_zero() {
                let n = input.rows();
                return within(&out, &vec![vec![0.0; n]; n], 0.0);
            }
            let inv = oracles::invert(&to_f64(input)).ok_or("reference inversion failed")?;
            within(&out, &inv, tol)
        }
    }
}

/// The nonzero columns of `out` must span the eigenspace of the
/// second-smallest Laplacian eigenvalue (with multiplicity).
pub fn fiedler_check(adj: &[Vec<f64>], out: &Matrix<Complex64>, tol: f64) -> Result<(), String> {
    let n = adj.len();
    let lap: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let deg: f64 = adj[i].iter().sum();
            (0..n).map(|j| if i == j { deg - adj[i][j] } else { -adj[i][j] }).collect()
        })
        .collect();
    let cols: Vec<Vec<Complex64>> = (0..out.cols())
        .map(|j| out.column(j))
        .filter(|c| c.iter().any(|x| x.norm() > tol))
        .collect();
    if n < 2 {
        return if cols.is_empty() {
            Ok(())
        } else {
            Err("a 1-node graph has no second eigenvalue".into())
        };
    }
    let (vals, _) = oracles::jacobi_eigen(&lap);
    let l2 = vals[1];
    let mult = vals.iter().filter(|v| (*v - l2).abs() <= 1e-6).count();
    if cols.len() != mult {
        return Err(format!("{} columns selected, eigenvalue {l2} has multiplicity {mult}", cols.len()));
    }
    for c in &cols {
        let norm = c.iter().map(|x| x.norm()).fold(0.0, f64::max);
        for i in 0..n {
            let lv: Complex64 = (0..n).map(|k| c[k] * lap[i][k]).sum();
            if (lv - c[i] * l2).norm() > tol * norm.max(1.0) {
                return Err(format!("column is not an eigenvector for {l2}"));
            }
        }
    }
    let m = Matrix::from_fn(n, cols.len(), |i, j| cols[j][i]);
    if matlang::linalg::rank(&m, 1e-9) != cols.len() {
        return Err("selected columns are dependent".into());
    }
    Ok(())
}

pub fn check_program(p: &NamedProgram, seed: u64, cases: usize) -> ProgramReport {
    let mut rng = gen::rng(seed);
    let mut failures = Vec::new();
    for k in 0..cases {
        let inst = sample_input(p, &mut rng);
        if let Err(e) = check_case(p, &inst) {
            failures.push(format!("case {k}: {e}"));
        }
    }
    ProgramReport {
        name: p.name.clone(),
        cases,
        passed: cases - failures.len(),
        failures,
    }
}

/// Every corpus program, `cases` random inputs each.
pub fn run_corpus(seed: u64, cases: usize) -> Vec<ProgramReport> {
    matlang::corpus::all()
        .iter()
        .enumerate()
        .map(|(k, p)| check_program(p, seed.wrapping_add(k as u64), cases))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_passes_on_a_few_cases() {
        for r in run_corpus(1, 8) {
            assert!(r.ok(), "{}: {:?}", r.name, r.failures);
        }
    }
}

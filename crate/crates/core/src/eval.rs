//! Big-step evaluation of MATLANG expressions over an instance.

use crate::ast::{eigenvalue_recovery, Expr};
use crate::builtins::{self, BuiltinError};
use crate::eigen::{self, EigenError};
use crate::linalg;
use crate::matrix::{Instance, Matrix};
use crate::par;
use crate::scalar::{Scalar, Tower};
use crate::typecheck::{schema_of_instance, typecheck, TypeError};
use num::complex::Complex64;
use thiserror::Error;

pub const DEFAULT_EPS: f64 = 1e-9;
pub const DEFAULT_DELTA: f64 = 1e-6;

/// Numeric settings of an evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalConfig {
    pub tower: Tower,
    /// Zero and equality tolerance of the float tower.
    pub eps: f64,
    /// Eigenvalues closer than this are treated as equal.
    pub delta: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            tower: Tower::Float,
            eps: DEFAULT_EPS,
            delta: DEFAULT_DELTA,
        }
    }
}

impl EvalConfig {
    pub fn exact() -> Self {
        EvalConfig {
            tower: Tower::Exact,
            ..EvalConfig::default()
        }
    }

    pub fn float() -> Self {
        EvalConfig::default()
    }

    /// Applies `MATLANG_EPS` and `MATLANG_DELTA` when set to positive
    /// numbers.
    pub fn with_env(mut self) -> Self {
        let read = |k: &str| {
            std::env::var(k)
                .ok()
                .and_then(|v| v.trim().parse::<f64>().ok())
                .filter(|v| *v > 0.0)
        };
        if let Some(e) = read("MATLANG_EPS") {
            self.eps = e;
        }
        if let Some(d) = read("MATLANG_DELTA") {
            self.delta = d;
        }
        self
    }

    /// Tolerance handed to builtins: `eps` in the float tower, 0 otherwise.
    pub fn tol(&self, tower: Tower) -> f64 {
        match tower {
            Tower::Exact => 0.0,
            Tower::Float => self.eps,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum EvalError {
    #[error("type error: {0}")]
    Type(Box<TypeError>),
    #[error("evaluation stuck: {0}")]
    Stuck(String),
    #[error("{0} is not available in the exact tower")]
    Tower(String),
}

impl From<TypeError> for EvalError {
    fn from(e: TypeError) -> Self {
        EvalError::Type(Box::new(e))
    }
}

fn stuck(msg: impl Into<String>) -> EvalError {
    EvalError::Stuck(msg.into())
}

/// `ones(a)`: the all-ones column with `a`'s row count.
pub fn op_ones<T: Scalar>(a: &Matrix<T>) -> Matrix<T> {
    Matrix::ones_column(a.rows())
}

pub fn op_diag<T: Scalar>(v: &Matrix<T>) -> Result<Matrix<T>, EvalError> {
    if v.cols() != 1 {
        return Err(stuck(format!("diag of a {}x{} matrix", v.rows(), v.cols())));
    }
    let n = v.rows();
    Ok(Matrix::from_fn(n, n, |i, j| {
        if i == j {
            v[(i, 0)].clone()
        } else {
            T::zero()
        }
    }))
}

pub fn op_mul<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>, EvalError> {
    if a.cols() != b.rows() {
        return Err(stuck(format!(
            "product of {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(a.matmul(b))
}

pub fn op_apply<T: Scalar>(
    f: &str,
    args: &[&Matrix<T>],
    cfg: &EvalConfig,
) -> Result<Matrix<T>, EvalError> {
    let first = args.first().ok_or_else(|| stuck(format!("`{f}` applied to nothing")))?;
    if args.iter().any(|a| a.shape() != first.shape()) {
        return Err(stuck(format!("`{f}` applied to matrices of different shapes")));
    }
    let tol = cfg.tol(T::TOWER);
    let mut data = Vec::with_capacity(first.rows() * first.cols());
    let mut scratch = Vec::with_capacity(args.len());
    for k in 0..first.data().len() {
        scratch.clear();
        scratch.extend(args.iter().map(|a| a.data()[k].clone()));
        data.push(builtins::apply(f, &scratch, tol).map_err(|e| match e {
            BuiltinError::NotExact(n) => EvalError::Tower(format!("`{n}`")),
            other => stuck(other.to_string()),
        })?);
    }
    Ok(Matrix::from_vec(first.rows(), first.cols(), data))
}

pub fn op_inv<T: Scalar>(a: &Matrix<T>, cfg: &EvalConfig) -> Result<Matrix<T>, EvalError> {
    if !a.is_square() {
        return Err(stuck(format!("inv of a {}x{} matrix", a.rows(), a.cols())));
    }
    Ok(linalg::invert(a, cfg.eps))
}

fn from_c64<T: Scalar>(m: &Matrix<Complex64>) -> Matrix<T> {
    m.map(|z| T::from_c64(*z).expect("float tower"))
}

pub fn op_eigen<T: Scalar>(a: &Matrix<T>, cfg: &EvalConfig) -> Result<Matrix<T>, EvalError> {
    if !a.is_square() {
        return Err(stuck(format!("eigen of a {}x{} matrix", a.rows(), a.cols())));
    }
    if T::TOWER == Tower::Exact {
        return Err(EvalError::Tower("eigen".into()));
    }
    Ok(from_c64(&eigen::eigen_canonical(
        &a.to_c64(),
        cfg.eps,
        cfg.delta,
    )))
}

/// Runs the eigenvalue-recovery expression on `a` and a basis `b`.
pub fn op_recover<T: Scalar>(
    a: &Matrix<T>,
    b: &Matrix<T>,
    cfg: &EvalConfig,
) -> Result<Matrix<T>, EvalError> {
    let inst = Instance::from_pairs([("A", a.clone()), ("B", b.clone())]);
    eval_unchecked(&inst, &eigenvalue_recovery(&Expr::var("A"), &Expr::var("B")), cfg)
}

struct Env<'a, T> {
    base: &'a Instance<T>,
    scope: Vec<(String, Matrix<T>)>,
}

impl<T: Scalar> Env<'_, T> {
    fn lookup(&self, name: &str) -> Option<&Matrix<T>> {
        self.scope
            .iter()
            .rev()
            .find(|(k, _)| k == name)
            .map(|(_, m)| m)
            .or_else(|| self.base.get(name))
    }
}

fn run<T: Scalar>(env: &mut Env<'_, T>, e: &Expr, cfg: &EvalConfig) -> Result<Matrix<T>, EvalError> {
    match e {
        Expr::Var(v) => env
            .lookup(v)
            .cloned()
            .ok_or_else(|| stuck(format!("unbound variable `{v}`"))),
        Expr::Let(name, bound, body) => {
            let a = run(env, bound, cfg)?;
            env.scope.push((name.clone(), a));
            let out = run(env, body, cfg);
            env.scope.pop();
            out
        }
        Expr::Transpose(a) => Ok(run(env, a, cfg)?.adjoint()),
        Expr::Ones(a) => Ok(op_ones(&run(env, a, cfg)?)),
        Expr::Diag(a) => op_diag(&run(env, a, cfg)?),
        Expr::MatMul(a, b) => {
            let a = run(env, a, cfg)?;
            let b = run(env, b, cfg)?;
            op_mul(&a, &b)
        }
        Expr::Apply(f, args) => {
            let vals = args
                .iter()
                .map(|a| run(env, a, cfg))
                .collect::<Result<Vec<_>, _>>()?;
            let refs: Vec<&Matrix<T>> = vals.iter().collect();
            op_apply(f, &refs, cfg)
        }
        Expr::Inv(a) => op_inv(&run(env, a, cfg)?, cfg),
        Expr::Eigen(a) => op_eigen(&run(env, a, cfg)?, cfg),
        Expr::EigenPair {
            basis,
            values,
            arg,
            body,
        } => {
            let a = run(env, arg, cfg)?;
            let b = op_eigen(&a, cfg)?;
            let l = op_recover(&a, &b, cfg)?;
            env.scope.push((basis.clone(), b));
            env.scope.push((values.clone(), l));
            let out = run(env, body, cfg);
            env.scope.pop();
            env.scope.pop();
            out
        }
    }
}

/// Evaluates `e` without a static check. Shape failures surface as
/// [`EvalError::Stuck`].
pub fn eval_unchecked<T: Scalar>(
    inst: &Instance<T>,
    e: &Expr,
    cfg: &EvalConfig,
) -> Result<Matrix<T>, EvalError> {
    let mut env = Env {
        base: inst,
        scope: Vec::new(),
    };
    run(&mut env, e, cfg)
}

/// Typechecks `e` against the shapes of `inst`, then evaluates it.
pub fn eval<T: Scalar>(inst: &Instance<T>, e: &Expr, cfg: &EvalConfig) -> Result<Matrix<T>, EvalError> {
    typecheck(&schema_of_instance(inst), e)?;
    let out = eval_unchecked(inst, e, cfg);
    debug_assert!(
        !matches!(out, Err(EvalError::Stuck(_))),
        "well-typed evaluation got stuck"
    );
    out
}

/// Evaluates `e` on each instance, in parallel when the `parallel`
/// feature is enabled.
pub fn eval_batch<T: Scalar>(
    insts: &[Instance<T>],
    e: &Expr,
    cfg: &EvalConfig,
) -> Vec<Result<Matrix<T>, EvalError>> {
    par::map(insts, |i| eval(i, e, cfg))
}

/// Sequential counterpart of [`eval_batch`].
pub fn eval_batch_seq<T: Scalar>(
    insts: &[Instance<T>],
    e: &Expr,
    cfg: &EvalConfig,
) -> Vec<Result<Matrix<T>, EvalError>> {
    par::map_seq(insts, |i| eval(i, e, cfg))
}

/// The diagonal matrix of eigenvalues belonging to the columns of `b`,
/// computed with the division-based recovery expression.
pub fn eigenvalues_from_basis(
    a: &Matrix<Complex64>,
    b: &Matrix<Complex64>,
    cfg: &EvalConfig,
) -> Result<Matrix<Complex64>, EigenError> {
    if !eigen::verify_eigen(a, b, cfg.eps, cfg.delta)? || b.is_zero_tol(0.0) {
        return Err(EigenError::InvalidBasis);
    }
    op_recover(a, b, cfg).map_err(|_| EigenError::InvalidBasis)
}

/// `diag(B^-1 A B)`, the eigenvalues read off by similarity.
pub fn eigenvalues_by_similarity(
    a: &Matrix<Complex64>,
    b: &Matrix<Complex64>,
    cfg: &EvalConfig,
) -> Result<Matrix<Complex64>, EigenError> {
    let binv = linalg::try_invert(b, cfg.eps).ok_or(EigenError::InvalidBasis)?;
    let d = binv.matmul(&a.matmul(b));
    Ok(Matrix::from_fn(d.rows(), d.cols(), |i, j| {
        if i == j {
            d[(i, i)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;
    use crate::scalar::GaussRat;

    fn exact(rows: &[&[i64]]) -> Matrix<GaussRat> {
        Matrix::from_i64(rows)
    }

    #[test]
    fn example_one_evaluates_to_constant() {
        let e = parse("let N = (ones(M))^* in apply[const:7](ones(N))").unwrap();
        let inst = Instance::from_pairs([("M", exact(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]]))]);
        assert_eq!(eval(&inst, &e, &EvalConfig::exact()).unwrap(), exact(&[&[7]]));
    }

    #[test]
    fn ill_typed_programs_are_refused() {
        let e = parse("M . M").unwrap();
        let inst = Instance::from_pairs([("M", exact(&[&[1, 2, 3], &[4, 5, 6]]))]);
        assert!(matches!(eval(&inst, &e, &EvalConfig::exact()), Err(EvalError::Type(_))));
        assert!(matches!(
            eval_unchecked(&inst, &e, &EvalConfig::exact()),
            Err(EvalError::Stuck(_))
        ));
    }

    #[test]
    fn eigen_needs_float_tower() {
        let e = parse("eigen(A)").unwrap();
        let inst = Instance::from_pairs([("A", exact(&[&[1, 0], &[0, 2]]))]);
        assert_eq!(
            eval(&inst, &e, &EvalConfig::exact()),
            Err(EvalError::Tower("eigen".into()))
        );
        let f = inst.to_c64();
        assert!(eval(&f, &e, &EvalConfig::float()).is_ok());
    }

    #[test]
    fn let_binds_once_and_shadows() {
        let e = parse("let M = M . M in let M = M^* in M").unwrap();
        let inst = Instance::from_pairs([("M", exact(&[&[1, 2], &[3, 4]]))]);
        assert_eq!(
            eval(&inst, &e, &EvalConfig::exact()).unwrap(),
            exact(&[&[7, 15], &[10, 22]])
        );
    }

    #[test]
    fn eigen_pair_recovers_eigenvalues() {
        let e = parse("let (B, L) = eigen(A) in L").unwrap();
        let a = Matrix::<Complex64>::from_i64(&[&[0, 1], &[1, 0]]);
        let inst = Instance::from_pairs([("A", a)]);
        let l = eval(&inst, &e, &EvalConfig::float()).unwrap();
        let expect = Matrix::<Complex64>::from_i64(&[&[-1, 0], &[0, 1]]);
        assert!(l.max_abs_diff(&expect) < 1e-12, "{l}");
    }

    #[test]
    fn eigenvalue_routes_agree() {
        let cfg = EvalConfig::float();
        let a = Matrix::<Complex64>::from_i64(&[&[2, 0], &[0, 5]]);
        let b = Matrix::identity(2);
        let l = eigenvalues_from_basis(&a, &b, &cfg).unwrap();
        assert_eq!(l, a);
        assert_eq!(eigenvalues_by_similarity(&a, &b, &cfg).unwrap(), a);
        assert_eq!(
            eigenvalues_from_basis(&a, &Matrix::zeros(2, 2), &cfg),
            Err(EigenError::InvalidBasis)
        );
    }

    #[test]
    fn batch_strategies_agree() {
        let e = parse("M . M^*").unwrap();
        let insts: Vec<Instance<GaussRat>> = (0..8)
            .map(|k| Instance::from_pairs([("M", exact(&[&[k, 1], &[2, -k]]))]))
            .collect();
        let cfg = EvalConfig::exact();
        assert_eq!(eval_batch(&insts, &e, &cfg), eval_batch_seq(&insts, &e, &cfg));
    }
}

//! Truth of emitted formulas at a given point.
//!
//! Existential blocks are instantiated with their witness recipes, which
//! recompute the intended values with the evaluator from the assignment so
//! far; the remaining quantifier-free body is then evaluated directly.

use super::emit::{input_var, output_var};
use super::formula::{CTerm, Formula, Grid, NodeOp, RealFormula, Term, Witness};
use crate::eigen::jordan_decomposition;
use crate::eval::{eval_unchecked, op_apply, op_eigen, op_inv, op_mul, EvalConfig, EvalError};
use crate::linalg::{invert, nullspace, pivot_tolerance};
use crate::matrix::{Instance, Matrix};
use crate::scalar::{GaussRat, Scalar};
use num::complex::Complex64;
use std::collections::BTreeMap;
use thiserror::Error;

/// Values of real variables. Every value is real (zero imaginary part).
pub type Assignment<T> = BTreeMap<String, T>;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum GroundError {
    #[error("no witness for the block binding `{0}`")]
    MissingWitness(String),
    #[error("variable `{0}` has no value")]
    Unassigned(String),
    #[error("witness computation failed: {0}")]
    Witness(String),
}

impl From<EvalError> for GroundError {
    fn from(e: EvalError) -> Self {
        GroundError::Witness(e.to_string())
    }
}

/// How atoms are compared.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroundOptions {
    /// Zero compares exactly. A positive `t` accepts `a = b` when
    /// `|a - b| <= t (1 + |a| + |b|)` and `a < b` when `b - a` exceeds
    /// that margin.
    pub tolerance: f64,
    /// Settings for the evaluator calls made by witnesses.
    pub eval: EvalConfig,
}

impl GroundOptions {
    pub fn exact() -> Self {
        GroundOptions {
            tolerance: 0.0,
            eval: EvalConfig::exact(),
        }
    }

    pub fn approx(tolerance: f64) -> Self {
        GroundOptions {
            tolerance,
            eval: EvalConfig::float(),
        }
    }
}

/// The assignment encoding an instance and an output matrix.
pub fn encode_assignment<T: Scalar>(inst: &Instance<T>, out: &Matrix<T>) -> Assignment<T> {
    let mut rho = Assignment::new();
    let mut put = |re: String, im: String, x: &T| {
        rho.insert(re, x.re());
        rho.insert(im, x.im());
    };
    for (name, m) in inst.iter() {
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                put(
                    input_var(name, i + 1, j + 1, false),
                    input_var(name, i + 1, j + 1, true),
                    &m[(i, j)],
                );
            }
        }
    }
    for i in 0..out.rows() {
        for j in 0..out.cols() {
            put(output_var(i + 1, j + 1, false), output_var(i + 1, j + 1, true), &out[(i, j)]);
        }
    }
    rho
}

struct Checker<'a, T> {
    opts: &'a GroundOptions,
    rho: Assignment<T>,
}

fn imag_unit<T: Scalar>() -> T {
    T::from_gauss(&GaussRat::complex(0, 1))
}

impl<T: Scalar> Checker<'_, T> {
    fn term(&self, t: &Term) -> Result<T, GroundError> {
        Ok(match t {
            Term::Var(v) => self
                .rho
                .get(v)
                .cloned()
                .ok_or_else(|| GroundError::Unassigned(v.clone()))?,
            Term::Const(c) => T::from_gauss(&GaussRat::real(c.clone())),
            Term::Neg(a) => self.term(a)?.neg(),
            Term::Add(ts) => {
                let mut acc = T::zero();
                for x in ts {
                    acc = acc.add(&self.term(x)?);
                }
                acc
            }
            Term::Mul(ts) => {
                let mut acc = T::one();
                for x in ts {
                    acc = acc.mul(&self.term(x)?);
                }
                acc
            }
        })
    }

    fn cterm(&self, c: &CTerm) -> Result<T, GroundError> {
        Ok(self.term(&c.re)?.add(&self.term(&c.im)?.mul(&imag_unit())))
    }

    fn grid(&self, g: &Grid) -> Result<Matrix<T>, GroundError> {
        let data = g.cells.iter().map(|c| self.cterm(c)).collect::<Result<Vec<_>, _>>()?;
        Ok(Matrix::from_vec(g.rows, g.cols, data))
    }

    fn margin(&self, a: &T, b: &T) -> f64 {
        self.opts.tolerance * (1.0 + a.abs_f64() + b.abs_f64())
    }

    fn equal(&self, a: &T, b: &T) -> bool {
        let d = a.sub(b);
        if self.opts.tolerance == 0.0 {
            d.is_zero_tol(0.0)
        } else {
            d.abs_f64() <= self.margin(a, b)
        }
    }

    fn less(&self, a: &T, b: &T) -> bool {
        if self.opts.tolerance == 0.0 {
            a.cmp_real(b, 0.0) == Some(std::cmp::Ordering::Less)
        } else {
            b.sub(a).to_c64().re > self.margin(a, b)
        }
    }

    fn formula(&mut self, f: &Formula) -> Result<bool, GroundError> {
        Ok(match f {
            Formula::True => true,
            Formula::False => false,
            Formula::Eq(a, b) => self.equal(&self.term(a)?, &self.term(b)?),
            Formula::Lt(a, b) => self.less(&self.term(a)?, &self.term(b)?),
            Formula::And(fs) => {
                for x in fs {
                    if !self.formula(x)? {
                        return Ok(false);
                    }
                }
                true
            }
            Formula::Or(fs) => {
                for x in fs {
                    if self.formula(x)? {
                        return Ok(true);
                    }
                }
                false
            }
            Formula::Exists {
                vars,
                witness,
                body,
            } => {
                let values = self.witness(vars, witness)?;
                let saved: Vec<(String, Option<T>)> = vars
                    .iter()
                    .zip(values)
                    .map(|(v, x)| (v.clone(), self.rho.insert(v.clone(), x)))
                    .collect();
                let result = self.formula(body);
                for (v, old) in saved {
                    match old {
                        Some(x) => self.rho.insert(v, x),
                        None => self.rho.remove(&v),
                    };
                }
                result?
            }
        })
    }

    fn witness(&self, vars: &[String], w: &Witness) -> Result<Vec<T>, GroundError> {
        let cfg = &self.opts.eval;
        let mut out: Vec<T> = Vec::with_capacity(vars.len());
        let push_matrix = |out: &mut Vec<T>, m: &Matrix<T>| {
            for x in m.data() {
                out.push(x.re());
                out.push(x.im());
            }
        };
        match w {
            Witness::None => {
                return Err(GroundError::MissingWitness(vars.first().cloned().unwrap_or_default()))
            }
            Witness::Node { op, args } => {
                let ms = args.iter().map(|g| self.grid(g)).collect::<Result<Vec<_>, _>>()?;
                let m = match op {
                    NodeOp::MatMul => op_mul(&ms[0], &ms[1])?,
                    NodeOp::Apply(f) => op_apply(f, &ms.iter().collect::<Vec<_>>(), cfg)?,
                    NodeOp::Inv => op_inv(&ms[0], cfg)?,
                    NodeOp::Eigen => op_eigen(&ms[0], cfg)?,
                };
                push_matrix(&mut out, &m);
            }
            Witness::Inverse(g) => push_matrix(&mut out, &invert(&self.grid(g)?, cfg.eps)),
            Witness::NullVector(g) => {
                let m = self.grid(g)?;
                let v = nullspace(&m, pivot_tolerance(&m, cfg.eps))
                    .into_iter()
                    .next()
                    .unwrap_or_else(|| vec![T::zero(); m.cols()]);
                push_matrix(&mut out, &Matrix::from_vec(v.len(), 1, v));
            }
            Witness::EigenColumns { a, b } => {
                let (a, b) = (self.grid(a)?, self.grid(b)?);
                let p = op_mul(&a, &b)?;
                push_matrix(&mut out, &p);
                for j in 0..b.cols() {
                    let col = b.column(j);
                    let best = (0..col.len())
                        .max_by(|&x, &y| col[x].abs_f64().total_cmp(&col[y].abs_f64()))
                        .filter(|&i| !col[i].is_zero_tol(0.0));
                    let lambda = best.map_or_else(T::zero, |i| p[(i, j)].div(&col[i], 0.0));
                    out.push(lambda.re());
                    out.push(lambda.im());
                }
            }
            Witness::Jordan(g) => {
                let a = self.grid(g)?.to_c64();
                let n = a.rows();
                let lift = |z: Complex64| {
                    T::from_c64(z).ok_or_else(|| {
                        GroundError::Witness("a Jordan witness needs the float tower".into())
                    })
                };
                match jordan_decomposition(&a, cfg.eps, cfg.delta) {
                    Some(j) => {
                        for z in j.z.data().iter().chain(j.w.data()) {
                            out.push(lift(Complex64::new(z.re, 0.0))?);
                            out.push(lift(Complex64::new(z.im, 0.0))?);
                        }
                        for d in &j.diag {
                            out.push(lift(Complex64::new(d.re, 0.0))?);
                            out.push(lift(Complex64::new(d.im, 0.0))?);
                        }
                        for s in &j.superdiag {
                            out.push(lift(Complex64::new(*s, 0.0))?);
                        }
                    }
                    None => out.resize(4 * n * n + 2 * n + n.saturating_sub(1), T::zero()),
                }
            }
            Witness::Pinned { pins, inputs, expr } => {
                let mut inst: Instance<T> = Instance::new();
                let value = |name: &str| {
                    pins.get(name)
                        .map(|c| T::from_gauss(&GaussRat::real(c.clone())))
                        .unwrap_or_else(T::zero)
                };
                let mut named = BTreeMap::new();
                for (m, r, c) in inputs {
                    let mat = Matrix::from_fn(*r, *c, |i, j| {
                        value(&input_var(m, i + 1, j + 1, false))
                            .add(&value(&input_var(m, i + 1, j + 1, true)).mul(&imag_unit()))
                    });
                    inst.insert(m.clone(), mat);
                }
                let y = eval_unchecked(&inst, expr, cfg)?;
                for (k, v) in encode_assignment(&inst, &y) {
                    named.insert(k, v);
                }
                for v in vars {
                    out.push(named.get(v).cloned().ok_or_else(|| GroundError::Unassigned(v.clone()))?);
                }
            }
        }
        if out.len() != vars.len() {
            return Err(GroundError::Witness(format!(
                "recipe produced {} values for {} variables",
                out.len(),
                vars.len()
            )));
        }
        Ok(out)
    }
}

/// Decides `f` at `rho`, instantiating existentials with their witnesses.
pub fn ground_check<T: Scalar>(
    f: &RealFormula,
    rho: &Assignment<T>,
    opts: &GroundOptions,
) -> Result<bool, GroundError> {
    let mut c = Checker {
        opts,
        rho: rho.clone(),
    };
    c.formula(&f.body)
}

//! Translation of inv/eigen-free MATLANG into relational algebra with
//! summation.
//!
//! A general matrix is a ternary relation `(row, col, value)`, a vector a
//! binary relation `(index, value)` and a scalar a unary relation
//! `(value)`. The output never uses set difference and never selects on a
//! numerical column.

use super::RelExpr;
use crate::ast::{Expr, MatrixType, Schema, TypeClass};
use crate::typecheck::{typecheck, TypeError};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("`{0}` has no relational counterpart")]
    UnsupportedConstruct(&'static str),
}

/// Number of base columns in the encoding of a type class.
fn base_cols(c: TypeClass) -> usize {
    c.arity() - 1
}

struct Translator {
    /// Let-bound names currently in scope, with their plans and types.
    lets: Vec<(String, RelExpr, MatrixType)>,
}

impl Translator {
    fn go(&mut self, schema: &Schema, e: &Expr) -> Result<(RelExpr, MatrixType), TranslateError> {
        Ok(match e {
            Expr::Var(v) => {
                if let Some((_, plan, t)) = self.lets.iter().rev().find(|(k, ..)| k == v) {
                    (plan.clone(), t.clone())
                } else {
                    (RelExpr::var(v.clone()), typecheck(schema, e)?)
                }
            }
            Expr::Let(name, bound, body) => {
                let (plan, t) = self.go(schema, bound)?;
                self.lets.push((name.clone(), plan, t.clone()));
                let inner = schema.with(name, t);
                let out = self.go(&inner, body);
                self.lets.pop();
                out?
            }
            Expr::Transpose(a) => {
                let (r, t) = self.go(schema, a)?;
                let plan = match t.class() {
                    TypeClass::General => r
                        .project(vec![2, 1, 3])
                        .apply_fn("conj", vec![3])
                        .project(vec![1, 2, 4]),
                    TypeClass::ColumnVector | TypeClass::RowVector => {
                        r.apply_fn("conj", vec![2]).project(vec![1, 3])
                    }
                    TypeClass::Scalar => r.apply_fn("conj", vec![1]).project(vec![2]),
                };
                (plan, t.transposed())
            }
            Expr::Ones(a) => {
                let (r, t) = self.go(schema, a)?;
                let plan = match t.class() {
                    TypeClass::General | TypeClass::ColumnVector => {
                        r.project(vec![1]).apply_fn("const:1", vec![])
                    }
                    TypeClass::RowVector => r.apply_fn("const:1", vec![2]).project(vec![3]),
                    TypeClass::Scalar => r.apply_fn("const:1", vec![1]).project(vec![2]),
                };
                (plan, typecheck(schema, e)?)
            }
            Expr::Diag(a) => {
                let (r, t) = self.go(schema, a)?;
                let out_t = typecheck(schema, e)?;
                let plan = match t.class() {
                    TypeClass::ColumnVector => {
                        let idx = r.clone().project(vec![1]);
                        let on = idx.clone().product(r).select_eq(1, 2);
                        let off = idx
                            .clone()
                            .product(idx)
                            .select_neq(1, 2)
                            .apply_fn("const:0", vec![]);
                        on.union(off)
                    }
                    TypeClass::Scalar => r,
                    _ => unreachable!("typechecked diag argument"),
                };
                (plan, out_t)
            }
            Expr::MatMul(a, b) => {
                let out_t = typecheck(schema, e)?;
                let (ra, ta) = self.go(schema, a)?;
                let (rb, tb) = self.go(schema, b)?;
                let p = ra.product(rb);
                let plan = match (ta.class(), tb.class()) {
                    (TypeClass::General, TypeClass::General) => {
                        p.select_eq(2, 4).apply_fn("mul", vec![3, 6]).sum(7, vec![1, 5])
                    }
                    (TypeClass::General, TypeClass::ColumnVector) => {
                        p.select_eq(2, 4).apply_fn("mul", vec![3, 5]).sum(6, vec![1])
                    }
                    (TypeClass::ColumnVector, TypeClass::RowVector) => {
                        p.apply_fn("mul", vec![2, 4]).project(vec![1, 3, 5])
                    }
                    (TypeClass::ColumnVector, TypeClass::Scalar) => {
                        p.apply_fn("mul", vec![2, 3]).project(vec![1, 4])
                    }
                    (TypeClass::RowVector, TypeClass::General) => {
                        p.select_eq(1, 3).apply_fn("mul", vec![2, 5]).sum(6, vec![4])
                    }
                    (TypeClass::RowVector, TypeClass::ColumnVector) => {
                        p.select_eq(1, 3).apply_fn("mul", vec![2, 4]).sum(5, vec![])
                    }
                    (TypeClass::Scalar, TypeClass::RowVector) => {
                        p.apply_fn("mul", vec![1, 3]).project(vec![2, 4])
                    }
                    (TypeClass::Scalar, TypeClass::Scalar) => {
                        p.apply_fn("mul", vec![1, 2]).project(vec![3])
                    }
                    other => unreachable!("typechecked product of classes {other:?}"),
                };
                (plan, out_t)
            }
            Expr::Apply(f, args) => {
                let out_t = typecheck(schema, e)?;
                let m = base_cols(out_t.class());
                let w = m + 1;
                let mut plans = Vec::with_capacity(args.len());
                for a in args {
                    plans.push(self.go(schema, a)?.0);
                }
                let mut plans = plans.into_iter();
                let mut acc = plans.next().expect("typechecked apply has arguments");
                for (k, p) in plans.enumerate() {
                    acc = acc.product(p);
                    let offset = (k + 1) * w;
                    for c in 1..=m {
                        acc = acc.select_eq(c, offset + c);
                    }
                }
                let k = args.len();
                let values: Vec<usize> = (0..k).map(|i| i * w + w).collect();
                let mut keep: Vec<usize> = (1..=m).collect();
                keep.push(k * w + 1);
                (acc.apply_fn(f.clone(), values).project(keep), out_t)
            }
            Expr::Inv(_) => return Err(TranslateError::UnsupportedConstruct("inv")),
            Expr::Eigen(_) | Expr::EigenPair { .. } => {
                return Err(TranslateError::UnsupportedConstruct("eigen"))
            }
        })
    }
}

/// Translates `e` into a relational expression over the encoding of
/// `schema`. Let-bindings are inlined.
pub fn translate(schema: &Schema, e: &Expr) -> Result<RelExpr, TranslateError> {
    typecheck(schema, e)?;
    if e.uses_inv_or_eigen() {
        let what = if e.uses_eigen() { "eigen" } else { "inv" };
        return Err(TranslateError::UnsupportedConstruct(what));
    }
    let mut t = Translator { lets: Vec::new() };
    Ok(t.go(schema, e)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;

    fn schema(pairs: &[(&str, &str, &str)]) -> Schema {
        Schema::from_pairs(pairs.iter().map(|(n, r, c)| (*n, MatrixType::of(r, c))))
    }

    fn plan(s: &Schema, src: &str) -> String {
        translate(s, &parse(src).unwrap()).unwrap().to_string()
    }

    #[test]
    fn transpose_of_general_matrix() {
        let s = schema(&[("M", "a", "b")]);
        assert_eq!(plan(&s, "M^*"), "π[1,2,4](Apply[conj;3](π[2,1,3](M)))");
    }

    #[test]
    fn diag_of_vector() {
        let s = schema(&[("M", "a", "1")]);
        assert_eq!(
            plan(&s, "diag(M)"),
            "(σ[1=2]((π[1](M) × M)) ∪ Apply[const:0;](σ[1≠2]((π[1](M) × π[1](M)))))"
        );
    }

    #[test]
    fn general_product() {
        let s = schema(&[("M", "a", "b"), ("N", "b", "c")]);
        assert_eq!(plan(&s, "M . N"), "Sum[7;1,5](Apply[mul;3,6](σ[2=4]((M × N))))");
    }

    #[test]
    fn unsupported_constructs() {
        let s = schema(&[("A", "a", "a")]);
        assert_eq!(
            translate(&s, &parse("inv(A)").unwrap()),
            Err(TranslateError::UnsupportedConstruct("inv"))
        );
        assert_eq!(
            translate(&s, &parse("A . eigen(A)").unwrap()),
            Err(TranslateError::UnsupportedConstruct("eigen"))
        );
    }
}

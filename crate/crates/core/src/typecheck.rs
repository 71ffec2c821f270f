//! Size-symbol typechecking and instance conformance.

use crate::ast::{Expr, MatrixType, Schema, SizeTerm};
use crate::builtins;
use crate::matrix::Instance;
use crate::scalar::Scalar;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TypeErrorKind {
    UnboundVariable,
    DiagOnNonVector,
    MulDimMismatch,
    ApplyShapeMismatch,
    InvNonSquare,
    EigenNonSquare,
    UnknownFunction,
    ArityMismatch,
}

impl TypeErrorKind {
    /// Errors that no instance can trigger at run time.
    pub fn is_static_only(self) -> bool {
        matches!(
            self,
            TypeErrorKind::UnboundVariable
                | TypeErrorKind::UnknownFunction
                | TypeErrorKind::ArityMismatch
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub struct TypeError {
    pub kind: TypeErrorKind,
    /// The offending subexpression.
    pub expr: Expr,
    /// The two size terms that failed to agree, when applicable.
    pub conflict: Option<(SizeTerm, SizeTerm)>,
    pub detail: String,
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {} in `{}`", self.kind, self.detail, self.expr)?;
        if let Some((a, b)) = &self.conflict {
            write!(f, " ({a} vs {b})")?;
        }
        Ok(())
    }
}

fn type_error(kind: TypeErrorKind, expr: &Expr, detail: impl Into<String>) -> TypeError {
    TypeError {
        kind,
        expr: expr.clone(),
        conflict: None,
        detail: detail.into(),
    }
}

fn conflict(
    kind: TypeErrorKind,
    expr: &Expr,
    a: &SizeTerm,
    b: &SizeTerm,
    detail: impl Into<String>,
) -> TypeError {
    TypeError {
        kind,
        expr: expr.clone(),
        conflict: Some((a.clone(), b.clone())),
        detail: detail.into(),
    }
}

/// Infers the output type of `e` over `schema`.
///
/// Subexpressions are checked left to right before their parent, so the
/// reported error is the leftmost-innermost failing premise.
pub fn typecheck(schema: &Schema, e: &Expr) -> Result<MatrixType, TypeError> {
    use TypeErrorKind::*;
    match e {
        Expr::Var(name) => schema
            .get(name)
            .cloned()
            .ok_or_else(|| type_error(UnboundVariable, e, format!("`{name}` is not bound"))),
        Expr::Let(name, bound, body) => {
            let t1 = typecheck(schema, bound)?;
            typecheck(&schema.with(name, t1), body)
        }
        Expr::Transpose(a) => Ok(typecheck(schema, a)?.transposed()),
        Expr::Ones(a) => {
            let t = typecheck(schema, a)?;
            Ok(MatrixType::new(t.rows, SizeTerm::One))
        }
        Expr::Diag(a) => {
            let t = typecheck(schema, a)?;
            if !t.cols.is_one() {
                return Err(conflict(
                    DiagOnNonVector,
                    e,
                    &t.cols,
                    &SizeTerm::One,
                    format!("diag needs a column vector, got {t}"),
                ));
            }
            Ok(MatrixType::new(t.rows.clone(), t.rows))
        }
        Expr::MatMul(a, b) => {
            let ta = typecheck(schema, a)?;
            let tb = typecheck(schema, b)?;
            if ta.cols != tb.rows {
                return Err(conflict(
                    MulDimMismatch,
                    e,
                    &ta.cols,
                    &tb.rows,
                    format!("cannot multiply {ta} by {tb}"),
                ));
            }
            Ok(MatrixType::new(ta.rows, tb.cols))
        }
        Expr::Apply(f, args) => {
            let mut types = Vec::with_capacity(args.len());
            for a in args {
                types.push(typecheck(schema, a)?);
            }
            let Some(arity) = builtins::arity(f) else {
                return Err(type_error(UnknownFunction, e, format!("no builtin `{f}`")));
            };
            if args.is_empty() || arity != args.len() {
                return Err(type_error(
                    ArityMismatch,
                    e,
                    format!("`{f}` takes {arity} argument(s), got {}", args.len()),
                ));
            }
            let first = types[0].clone();
            for t in &types[1..] {
                if *t != first {
                    let (x, y) = if t.rows != first.rows {
                        (&first.rows, &t.rows)
                    } else {
                        (&first.cols, &t.cols)
                    };
                    return Err(conflict(
                        ApplyShapeMismatch,
                        e,
                        x,
                        y,
                        format!("arguments of types {first} and {t}"),
                    ));
                }
            }
            Ok(first)
        }
        Expr::Inv(a) => {
            let t = typecheck(schema, a)?;
            if !t.is_square() {
                return Err(conflict(
                    InvNonSquare,
                    e,
                    &t.rows,
                    &t.cols,
                    format!("inv needs a square type, got {t}"),
                ));
            }
            Ok(t)
        }
        Expr::Eigen(a) => {
            let t = typecheck(schema, a)?;
            if !t.is_square() {
                return Err(conflict(
                    EigenNonSquare,
                    e,
                    &t.rows,
                    &t.cols,
                    format!("eigen needs a square type, got {t}"),
                ));
            }
            Ok(t)
        }
        Expr::EigenPair {
            basis,
            values,
            arg,
            body,
        } => {
            let t = typecheck(schema, arg)?;
            if !t.is_square() {
                return Err(conflict(
                    EigenNonSquare,
                    e,
                    &t.rows,
                    &t.cols,
                    format!("eigen needs a square type, got {t}"),
                ));
            }
            let inner = schema.with(basis, t.clone()).with(values, t);
            typecheck(&inner, body)
        }
    }
}

/// Maps size symbols to positive dimensions. `1` always maps to 1.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SizeAssignment {
    sizes: BTreeMap<String, usize>,
}

impl SizeAssignment {
    pub fn new() -> Self {
        SizeAssignment::default()
    }

    /// Panics if `value` is zero.
    pub fn set(&mut self, symbol: impl Into<String>, value: usize) {
        assert!(value >= 1, "size assignments are positive");
        self.sizes.insert(symbol.into(), value);
    }

    pub fn with(mut self, symbol: impl Into<String>, value: usize) -> Self {
        self.set(symbol, value);
        self
    }

    pub fn get(&self, symbol: &str) -> Option<usize> {
        self.sizes.get(symbol).copied()
    }

    /// `σ(s)`; `None` for unassigned symbols.
    pub fn eval(&self, term: &SizeTerm) -> Option<usize> {
        match term {
            SizeTerm::One => Some(1),
            SizeTerm::Symbol(s) => self.get(s),
        }
    }

    /// Dimensions `σ(s1) x σ(s2)` of a type.
    pub fn dims(&self, ty: &MatrixType) -> Option<(usize, usize)> {
        Some((self.eval(&ty.rows)?, self.eval(&ty.cols)?))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, usize)> {
        self.sizes.iter().map(|(k, v)| (k, *v))
    }

    /// Whether every size symbol of `schema` has a value.
    pub fn covers(&self, schema: &Schema) -> bool {
        schema.symbols().iter().all(|s| self.sizes.contains_key(s))
    }

    /// Parses `a=3,b=4`.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut out = SizeAssignment::new();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| format!("expected `symbol=size`, got `{part}`"))?;
            let v: usize = v
                .trim()
                .parse()
                .map_err(|_| format!("`{}` is not a positive integer", v.trim()))?;
            if v == 0 {
                return Err(format!("size of `{}` must be positive", k.trim()));
            }
            out.set(k.trim(), v);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ConformanceError {
    #[error("variable `{variable}`: expected {expected}, got a {actual_rows}x{actual_cols} matrix")]
    Shape {
        variable: String,
        expected: String,
        actual_rows: usize,
        actual_cols: usize,
    },
    #[error("instance variables {instance:?} do not match schema variables {schema:?}")]
    VariableSetMismatch {
        schema: Vec<String>,
        instance: Vec<String>,
    },
}

/// Finds the size assignment by which `inst` conforms to `schema`.
pub fn check_conformance<T: Scalar>(
    schema: &Schema,
    inst: &Instance<T>,
) -> Result<SizeAssignment, ConformanceError> {
    let schema_vars: Vec<String> = schema.names().cloned().collect();
    let inst_vars: Vec<String> = inst.names().cloned().collect();
    if schema_vars != inst_vars {
        return Err(ConformanceError::VariableSetMismatch {
            schema: schema_vars,
            instance: inst_vars,
        });
    }
    let mut sigma = SizeAssignment::new();
    for (name, ty) in schema.iter() {
        let m = inst.get(name).expect("variable sets agree");
        let (rows, cols) = (m.rows(), m.cols());
        let mismatch = |sigma: &SizeAssignment| {
            let show = |t: &SizeTerm| match sigma.eval(t) {
                Some(v) => format!("{t}={v}"),
                None => t.to_string(),
            };
            ConformanceError::Shape {
                variable: name.clone(),
                expected: format!("{} x {}", show(&ty.rows), show(&ty.cols)),
                actual_rows: rows,
                actual_cols: cols,
            }
        };
        for (term, actual) in [(&ty.rows, rows), (&ty.cols, cols)] {
            match term {
                SizeTerm::One if actual != 1 => return Err(mismatch(&sigma)),
                SizeTerm::One => {}
                SizeTerm::Symbol(s) => match sigma.get(s) {
                    Some(v) if v != actual => return Err(mismatch(&sigma)),
                    Some(_) => {}
                    None => sigma.set(s.clone(), actual),
                },
            }
        }
    }
    Ok(sigma)
}

/// A schema that gives each variable of `inst` a type naming its actual
/// dimensions (`d3 x d4`, or `1` for unit dimensions). An expression
/// typechecks against it exactly when its shape side conditions hold on
/// `inst`.
pub fn schema_of_instance<T: Scalar>(inst: &Instance<T>) -> Schema {
    let term = |n: usize| {
        if n == 1 {
            SizeTerm::One
        } else {
            SizeTerm::Symbol(format!("d{n}"))
        }
    };
    Schema::from_pairs(
        inst.iter()
            .map(|(k, m)| (k.clone(), MatrixType::new(term(m.rows()), term(m.cols())))),
    )
}

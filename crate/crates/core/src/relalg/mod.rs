//! Relational algebra with function application and grouped summation,
//! the relational encoding of matrices, and the translation of MATLANG into
//! the algebra.
//!
//! Columns are numbered from 1. A column is either a base column, holding
//! an element of the domain (here: a matrix index), or a numerical column
//! holding a scalar.

mod translate;

pub use translate::{translate, TranslateError};

use crate::ast::{MatrixType, Schema, TypeClass};
use crate::builtins;
use crate::matrix::{Instance, Matrix};
use crate::scalar::Scalar;
use crate::typecheck::SizeAssignment;
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ColKind {
    Base,
    Num,
}

pub type RelType = Vec<ColKind>;

/// Display form `(b,b,n)`.
pub fn show_type(t: &[ColKind]) -> String {
    let parts: Vec<&str> = t
        .iter()
        .map(|k| match k {
            ColKind::Base => "b",
            ColKind::Num => "n",
        })
        .collect();
    format!("({})", parts.join(","))
}

/// The relation type encoding values of a matrix type.
pub fn encoding_type(t: &MatrixType) -> RelType {
    use ColKind::*;
    match t.class() {
        TypeClass::General => vec![Base, Base, Num],
        TypeClass::ColumnVector | TypeClass::RowVector => vec![Base, Num],
        TypeClass::Scalar => vec![Num],
    }
}

/// Relational schema induced by a matrix schema.
pub fn rel_schema(schema: &Schema) -> BTreeMap<String, RelType> {
    schema
        .iter()
        .map(|(k, t)| (k.clone(), encoding_type(t)))
        .collect()
}

/// A value in a tuple.
#[derive(Clone, Debug)]
pub enum Datum<T> {
    Base(usize),
    Num(T),
}

impl<T: Scalar> Datum<T> {
    pub fn kind(&self) -> ColKind {
        match self {
            Datum::Base(_) => ColKind::Base,
            Datum::Num(_) => ColKind::Num,
        }
    }
}

impl<T: Scalar> Ord for Datum<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Datum::Base(a), Datum::Base(b)) => a.cmp(b),
            (Datum::Num(a), Datum::Num(b)) => a.total_cmp(b),
            (Datum::Base(_), Datum::Num(_)) => Ordering::Less,
            (Datum::Num(_), Datum::Base(_)) => Ordering::Greater,
        }
    }
}

impl<T: Scalar> PartialOrd for Datum<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> PartialEq for Datum<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Scalar> Eq for Datum<T> {}

impl<T: Scalar> fmt::Display for Datum<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Datum::Base(i) => write!(f, "{i}"),
            Datum::Num(x) => write!(f, "{}", crate::io::format_entry(x)),
        }
    }
}

pub type Tuple<T> = Vec<Datum<T>>;

/// A typed finite set of tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation<T: Scalar> {
    pub ty: RelType,
    pub tuples: BTreeSet<Tuple<T>>,
}

impl<T: Scalar> Relation<T> {
    pub fn empty(ty: RelType) -> Self {
        Relation {
            ty,
            tuples: BTreeSet::new(),
        }
    }

    /// Panics if a tuple does not match `ty`.
    pub fn from_tuples(ty: RelType, tuples: impl IntoIterator<Item = Tuple<T>>) -> Self {
        let tuples: BTreeSet<Tuple<T>> = tuples.into_iter().collect();
        for t in &tuples {
            assert!(
                t.len() == ty.len() && t.iter().zip(&ty).all(|(d, k)| d.kind() == *k),
                "tuple does not match relation type"
            );
        }
        Relation { ty, tuples }
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }
}

impl<T: Scalar> fmt::Display for Relation<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", show_type(&self.ty))?;
        for t in &self.tuples {
            let cells: Vec<String> = t.iter().map(ToString::to_string).collect();
            writeln!(f, "({})", cells.join(", "))?;
        }
        Ok(())
    }
}

/// Named relations.
pub type RelInstance<T> = BTreeMap<String, Relation<T>>;

/// An expression of relational algebra with summation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RelExpr {
    Var(String),
    Union(Box<RelExpr>, Box<RelExpr>),
    Difference(Box<RelExpr>, Box<RelExpr>),
    Product(Box<RelExpr>, Box<RelExpr>),
    /// `σ[left = right]` or `σ[left ≠ right]` on base columns.
    Select {
        left: usize,
        right: usize,
        equal: bool,
        input: Box<RelExpr>,
    },
    Project(Vec<usize>, Box<RelExpr>),
    /// Appends a numerical column `func(t[cols])`.
    Apply {
        func: String,
        cols: Vec<usize>,
        input: Box<RelExpr>,
    },
    /// Groups by the base columns `group` and sums numerical column `col`.
    Sum {
        col: usize,
        group: Vec<usize>,
        input: Box<RelExpr>,
    },
}

impl RelExpr {
    pub fn var(name: impl Into<String>) -> Self {
        RelExpr::Var(name.into())
    }

    pub fn union(self, other: RelExpr) -> Self {
        RelExpr::Union(Box::new(self), Box::new(other))
    }

    pub fn difference(self, other: RelExpr) -> Self {
        RelExpr::Difference(Box::new(self), Box::new(other))
    }

    pub fn product(self, other: RelExpr) -> Self {
        RelExpr::Product(Box::new(self), Box::new(other))
    }

    pub fn select_eq(self, left: usize, right: usize) -> Self {
        RelExpr::Select {
            left,
            right,
            equal: true,
            input: Box::new(self),
        }
    }

    pub fn select_neq(self, left: usize, right: usize) -> Self {
        RelExpr::Select {
            left,
            right,
            equal: false,
            input: Box::new(self),
        }
    }

    pub fn project(self, cols: Vec<usize>) -> Self {
        RelExpr::Project(cols, Box::new(self))
    }

    pub fn apply_fn(self, func: impl Into<String>, cols: Vec<usize>) -> Self {
        RelExpr::Apply {
            func: func.into(),
            cols,
            input: Box::new(self),
        }
    }

    pub fn sum(self, col: usize, group: Vec<usize>) -> Self {
        RelExpr::Sum {
            col,
            group,
            input: Box::new(self),
        }
    }

    pub fn children(&self) -> Vec<&RelExpr> {
        match self {
            RelExpr::Var(_) => vec![],
            RelExpr::Union(a, b) | RelExpr::Difference(a, b) | RelExpr::Product(a, b) => {
                vec![a, b]
            }
            RelExpr::Select { input, .. }
            | RelExpr::Project(_, input)
            | RelExpr::Apply { input, .. }
            | RelExpr::Sum { input, .. } => vec![input],
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn uses_difference(&self) -> bool {
        matches!(self, RelExpr::Difference(..)) || self.children().iter().any(|c| c.uses_difference())
    }

    /// Names of functions used by `Apply` nodes.
    pub fn function_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_functions(&mut out);
        out
    }

    fn collect_functions(&self, out: &mut BTreeSet<String>) {
        if let RelExpr::Apply { func, .. } = self {
            out.insert(func.clone());
        }
        for c in self.children() {
            c.collect_functions(out);
        }
    }

    /// Whether some selection compares a numerical column. Ill-typed
    /// subexpressions count as violations.
    pub fn selects_on_numbers(&self, schema: &BTreeMap<String, RelType>) -> bool {
        if let RelExpr::Select {
            left, right, input, ..
        } = self
        {
            match rel_type(schema, input) {
                Ok(t) => {
                    if t.get(left - 1) != Some(&ColKind::Base)
                        || t.get(right - 1) != Some(&ColKind::Base)
                    {
                        return true;
                    }
                }
                Err(_) => return true,
            }
        }
        self.children().iter().any(|c| c.selects_on_numbers(schema))
    }
}

fn list(cols: &[usize]) -> String {
    cols.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl fmt::Display for RelExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelExpr::Var(v) => f.write_str(v),
            RelExpr::Union(a, b) => write!(f, "({a} ∪ {b})"),
            RelExpr::Difference(a, b) => write!(f, "({a} − {b})"),
            RelExpr::Product(a, b) => write!(f, "({a} × {b})"),
            RelExpr::Select {
                left,
                right,
                equal,
                input,
            } => {
                let op = if *equal { "=" } else { "≠" };
                write!(f, "σ[{left}{op}{right}]({input})")
            }
            RelExpr::Project(cols, input) => write!(f, "π[{}]({input})", list(cols)),
            RelExpr::Apply { func, cols, input } => {
                write!(f, "Apply[{func};{}]({input})", list(cols))
            }
            RelExpr::Sum { col, group, input } => {
                write!(f, "Sum[{col};{}]({input})", list(group))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RelError {
    #[error("relational type error: {0}")]
    Type(String),
    #[error("function error: {0}")]
    Function(String),
}

fn type_err(msg: impl Into<String>) -> RelError {
    RelError::Type(msg.into())
}

fn check_col(t: &[ColKind], c: usize, want: Option<ColKind>, what: &str) -> Result<(), RelError> {
    if c == 0 || c > t.len() {
        return Err(type_err(format!(
            "{what}: column {c} out of range for {}",
            show_type(t)
        )));
    }
    if let Some(k) = want {
        if t[c - 1] != k {
            return Err(type_err(format!(
                "{what}: column {c} of {} has the wrong kind",
                show_type(t)
            )));
        }
    }
    Ok(())
}

/// The type of `e` over a relational schema.
pub fn rel_type(schema: &BTreeMap<String, RelType>, e: &RelExpr) -> Result<RelType, RelError> {
    match e {
        RelExpr::Var(v) => schema
            .get(v)
            .cloned()
            .ok_or_else(|| type_err(format!("unknown relation `{v}`"))),
        RelExpr::Union(a, b) | RelExpr::Difference(a, b) => {
            let (ta, tb) = (rel_type(schema, a)?, rel_type(schema, b)?);
            if ta != tb {
                return Err(type_err(format!(
                    "set operation on {} and {}",
                    show_type(&ta),
                    show_type(&tb)
                )));
            }
            Ok(ta)
        }
        RelExpr::Product(a, b) => {
            let mut t = rel_type(schema, a)?;
            t.extend(rel_type(schema, b)?);
            Ok(t)
        }
        RelExpr::Select {
            left, right, input, ..
        } => {
            let t = rel_type(schema, input)?;
            check_col(&t, *left, Some(ColKind::Base), "selection")?;
            check_col(&t, *right, Some(ColKind::Base), "selection")?;
            Ok(t)
        }
        RelExpr::Project(cols, input) => {
            let t = rel_type(schema, input)?;
            if cols.is_empty() {
                return Err(type_err("projection onto no columns"));
            }
            cols.iter()
                .map(|&c| check_col(&t, c, None, "projection").map(|_| t[c - 1]))
                .collect()
        }
        RelExpr::Apply { func, cols, input } => {
            let mut t = rel_type(schema, input)?;
            for &c in cols {
                check_col(&t, c, Some(ColKind::Num), "function application")?;
            }
            if builtins::parse_const(func).is_none() {
                match builtins::lookup(func) {
                    None => return Err(type_err(format!("unknown function `{func}`"))),
                    Some(f) if f.arity != cols.len() => {
                        return Err(type_err(format!(
                            "`{func}` takes {} argument(s), got {}",
                            f.arity,
                            cols.len()
                        )))
                    }
                    Some(_) => {}
                }
            }
            t.push(ColKind::Num);
            Ok(t)
        }
        RelExpr::Sum { col, group, input } => {
            let t = rel_type(schema, input)?;
            check_col(&t, *col, Some(ColKind::Num), "summation")?;
            let mut out = Vec::with_capacity(group.len() + 1);
            for &g in group {
                check_col(&t, g, Some(ColKind::Base), "grouping")?;
                out.push(ColKind::Base);
            }
            out.push(ColKind::Num);
            Ok(out)
        }
    }
}

fn instance_schema<T: Scalar>(ri: &RelInstance<T>) -> BTreeMap<String, RelType> {
    ri.iter().map(|(k, r)| (k.clone(), r.ty.clone())).collect()
}

/// Evaluates `e` with set semantics. `tol` is passed to the pointwise
/// functions.
pub fn eval_rel<T: Scalar>(
    ri: &RelInstance<T>,
    e: &RelExpr,
    tol: f64,
) -> Result<Relation<T>, RelError> {
    let ty = rel_type(&instance_schema(ri), e)?;
    let tuples = run(ri, e, tol)?;
    Ok(Relation { ty, tuples })
}

fn run<T: Scalar>(
    ri: &RelInstance<T>,
    e: &RelExpr,
    tol: f64,
) -> Result<BTreeSet<Tuple<T>>, RelError> {
    Ok(match e {
        RelExpr::Var(v) => ri
            .get(v)
            .map(|r| r.tuples.clone())
            .ok_or_else(|| type_err(format!("unknown relation `{v}`")))?,
        RelExpr::Union(a, b) => {
            let mut out = run(ri, a, tol)?;
            out.extend(run(ri, b, tol)?);
            out
        }
        RelExpr::Difference(a, b) => {
            let rb = run(ri, b, tol)?;
            run(ri, a, tol)?.into_iter().filter(|t| !rb.contains(t)).collect()
        }
        RelExpr::Product(a, b) => {
            let (ra, rb) = (run(ri, a, tol)?, run(ri, b, tol)?);
            let mut out = BTreeSet::new();
            for x in &ra {
                for y in &rb {
                    let mut t = x.clone();
                    t.extend(y.iter().cloned());
                    out.insert(t);
                }
            }
            out
        }
        RelExpr::Select {
            left,
            right,
            equal,
            input,
        } => run(ri, input, tol)?
            .into_iter()
            .filter(|t| (t[left - 1] == t[right - 1]) == *equal)
            .collect(),
        RelExpr::Project(cols, input) => run(ri, input, tol)?
            .into_iter()
            .map(|t| cols.iter().map(|&c| t[c - 1].clone()).collect())
            .collect(),
        RelExpr::Apply { func, cols, input } => {
            let mut out = BTreeSet::new();
            for mut t in run(ri, input, tol)? {
                let v = match builtins::parse_const(func) {
                    Some(c) => T::from_gauss(&c),
                    None => {
                        let args: Vec<T> = cols
                            .iter()
                            .map(|&c| match &t[c - 1] {
                                Datum::Num(x) => x.clone(),
                                Datum::Base(_) => unreachable!("typechecked"),
                            })
                            .collect();
                        builtins::apply(func, &args, tol)
                            .map_err(|e| RelError::Function(e.to_string()))?
                    }
                };
                t.push(Datum::Num(v));
                out.insert(t);
            }
            out
        }
        RelExpr::Sum { col, group, input } => {
            let r = run(ri, input, tol)?;
            let mut sums: BTreeMap<Vec<Datum<T>>, T> = BTreeMap::new();
            if group.is_empty() {
                sums.insert(Vec::new(), T::zero());
            }
            for t in &r {
                let key: Vec<Datum<T>> = group.iter().map(|&g| t[g - 1].clone()).collect();
                let Datum::Num(x) = &t[col - 1] else {
                    unreachable!("typechecked")
                };
                let acc = sums.entry(key).or_insert_with(T::zero);
                *acc = acc.add(x);
            }
            sums.into_iter()
                .map(|(mut k, v)| {
                    k.push(Datum::Num(v));
                    k
                })
                .collect()
        }
    })
}

/// Encodes one matrix according to the class of its type.
pub fn encode_matrix<T: Scalar>(m: &Matrix<T>, t: &MatrixType) -> Relation<T> {
    let ty = encoding_type(t);
    let tuples: Vec<Tuple<T>> = match t.class() {
        TypeClass::General => (0..m.rows())
            .flat_map(|i| {
                (0..m.cols()).map(move |j| {
                    vec![
                        Datum::Base(i + 1),
                        Datum::Base(j + 1),
                        Datum::Num(m[(i, j)].clone()),
                    ]
                })
            })
            .collect(),
        TypeClass::ColumnVector => (0..m.rows())
            .map(|i| vec![Datum::Base(i + 1), Datum::Num(m[(i, 0)].clone())])
            .collect(),
        TypeClass::RowVector => (0..m.cols())
            .map(|j| vec![Datum::Base(j + 1), Datum::Num(m[(0, j)].clone())])
            .collect(),
        TypeClass::Scalar => vec![vec![Datum::Num(m[(0, 0)].clone())]],
    };
    Relation::from_tuples(ty, tuples)
}

/// Encodes every variable of `inst` by the class of its type in `schema`.
/// Variables missing from the schema are skipped.
pub fn rel_encode<T: Scalar>(inst: &Instance<T>, schema: &Schema) -> RelInstance<T> {
    inst.iter()
        .filter_map(|(k, m)| schema.get(k).map(|t| (k.clone(), encode_matrix(m, t))))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("relation is not grid-total for a {rows}x{cols} matrix: {reason}")]
    NotGridTotal {
        rows: usize,
        cols: usize,
        reason: String,
    },
    #[error("size assignment does not cover type {0}")]
    Unsized(String),
}

/// Inverse of [`encode_matrix`]: requires exactly one tuple per index
/// combination of the dimensions `σ(t)`.
pub fn rel_decode<T: Scalar>(
    r: &Relation<T>,
    t: &MatrixType,
    sigma: &SizeAssignment,
) -> Result<Matrix<T>, DecodeError> {
    let (rows, cols) = sigma
        .dims(t)
        .ok_or_else(|| DecodeError::Unsized(t.to_string()))?;
    let fail = |reason: String| DecodeError::NotGridTotal { rows, cols, reason };
    if r.ty != encoding_type(t) {
        return Err(fail(format!("relation has type {}", show_type(&r.ty))));
    }
    let mut cells: Vec<Option<T>> = vec![None; rows * cols];
    for tuple in &r.tuples {
        let idx = |d: &Datum<T>, bound: usize| match d {
            Datum::Base(i) if (1..=bound).contains(i) => Ok(i - 1),
            other => Err(fail(format!("index {other} out of range"))),
        };
        let (i, j, v) = match t.class() {
            TypeClass::General => (idx(&tuple[0], rows)?, idx(&tuple[1], cols)?, &tuple[2]),
            TypeClass::ColumnVector => (idx(&tuple[0], rows)?, 0, &tuple[1]),
            TypeClass::RowVector => (0, idx(&tuple[0], cols)?, &tuple[1]),
            TypeClass::Scalar => (0, 0, &tuple[0]),
        };
        let Datum::Num(v) = v else {
            return Err(fail("value column is not numerical".into()));
        };
        let cell = &mut cells[i * cols + j];
        if cell.is_some() {
            return Err(fail(format!("two values for entry ({}, {})", i + 1, j + 1)));
        }
        *cell = Some(v.clone());
    }
    let data = cells
        .into_iter()
        .enumerate()
        .map(|(k, c)| c.ok_or_else(|| fail(format!("no value for entry ({}, {})", k / cols + 1, k % cols + 1))))
        .collect::<Result<Vec<T>, _>>()?;
    Ok(Matrix::from_vec(rows, cols, data))
}

//! Abstract syntax of MATLANG with `inv`, `eigen` and `let`, plus matrix
//! types and schemas.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A MATLANG expression.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Var(String),
    Let(String, Box<Expr>, Box<Expr>),
    /// Conjugate transpose, written `e^*`.
    Transpose(Box<Expr>),
    /// One-vector: the column of ones with as many rows as the argument.
    Ones(Box<Expr>),
    Diag(Box<Expr>),
    MatMul(Box<Expr>, Box<Expr>),
    /// Pointwise application of a named builtin.
    Apply(String, Vec<Expr>),
    Inv(Box<Expr>),
    Eigen(Box<Expr>),
    /// `let (basis, values) = eigen(arg) in body`.
    EigenPair {
        basis: String,
        values: String,
        arg: Box<Expr>,
        body: Box<Expr>,
    },
}

#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn var(name: impl Into<String>) -> Self {
        Expr::Var(name.into())
    }

    pub fn let_in(name: impl Into<String>, bound: Expr, body: Expr) -> Self {
        Expr::Let(name.into(), Box::new(bound), Box::new(body))
    }

    pub fn transpose(self) -> Self {
        Expr::Transpose(Box::new(self))
    }

    pub fn ones(self) -> Self {
        Expr::Ones(Box::new(self))
    }

    pub fn diag(self) -> Self {
        Expr::Diag(Box::new(self))
    }

    pub fn mul(self, rhs: Expr) -> Self {
        Expr::MatMul(Box::new(self), Box::new(rhs))
    }

    pub fn apply(f: impl Into<String>, args: Vec<Expr>) -> Self {
        Expr::Apply(f.into(), args)
    }

    pub fn inv(self) -> Self {
        Expr::Inv(Box::new(self))
    }

    pub fn eigen(self) -> Self {
        Expr::Eigen(Box::new(self))
    }

    pub fn eigen_pair(
        basis: impl Into<String>,
        values: impl Into<String>,
        arg: Expr,
        body: Expr,
    ) -> Self {
        Expr::EigenPair {
            basis: basis.into(),
            values: values.into(),
            arg: Box::new(arg),
            body: Box::new(body),
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Var(_) => vec![],
            Expr::Let(_, a, b) | Expr::MatMul(a, b) => vec![a, b],
            Expr::EigenPair { arg, body, .. } => vec![arg, body],
            Expr::Transpose(a) | Expr::Ones(a) | Expr::Diag(a) | Expr::Inv(a) | Expr::Eigen(a) => {
                vec![a]
            }
            Expr::Apply(_, args) => args.iter().collect(),
        }
    }

    /// True if `inv`, `eigen` or the eigen-pair sugar occurs anywhere.
    pub fn uses_inv_or_eigen(&self) -> bool {
        matches!(self, Expr::Inv(_) | Expr::Eigen(_) | Expr::EigenPair { .. })
            || self.children().into_iter().any(Expr::uses_inv_or_eigen)
    }

    pub fn uses_eigen(&self) -> bool {
        matches!(self, Expr::Eigen(_) | Expr::EigenPair { .. })
            || self.children().into_iter().any(Expr::uses_eigen)
    }

    /// Names of all pointwise functions applied in the expression.
    pub fn function_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_functions(&mut out);
        out
    }

    fn collect_functions(&self, out: &mut BTreeSet<String>) {
        if let Expr::Apply(f, _) = self {
            out.insert(f.clone());
        }
        for c in self.children() {
            c.collect_functions(out);
        }
    }

    /// Every identifier occurring in the expression, bound or free.
    pub fn identifiers(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_identifiers(&mut out);
        out
    }

    fn collect_identifiers(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Var(v) | Expr::Let(v, _, _) => {
                out.insert(v.clone());
            }
            Expr::EigenPair { basis, values, .. } => {
                out.insert(basis.clone());
                out.insert(values.clone());
            }
            _ => {}
        }
        for c in self.children() {
            c.collect_identifiers(out);
        }
    }

    /// Rewrites every eigen-pair binding into plain `let`s of `eigen` and
    /// the eigenvalue-recovery expression.
    pub fn desugar(&self) -> Expr {
        let mut taken = self.identifiers();
        self.desugar_with(&mut taken)
    }

    fn desugar_with(&self, taken: &mut BTreeSet<String>) -> Expr {
        let d = |e: &Expr, taken: &mut BTreeSet<String>| Box::new(e.desugar_with(taken));
        match self {
            Expr::Var(v) => Expr::Var(v.clone()),
            Expr::Let(v, a, b) => Expr::Let(v.clone(), d(a, taken), d(b, taken)),
            Expr::Transpose(a) => Expr::Transpose(d(a, taken)),
            Expr::Ones(a) => Expr::Ones(d(a, taken)),
            Expr::Diag(a) => Expr::Diag(d(a, taken)),
            Expr::MatMul(a, b) => Expr::MatMul(d(a, taken), d(b, taken)),
            Expr::Apply(f, args) => {
                Expr::Apply(f.clone(), args.iter().map(|a| a.desugar_with(taken)).collect())
            }
            Expr::Inv(a) => Expr::Inv(d(a, taken)),
            Expr::Eigen(a) => Expr::Eigen(d(a, taken)),
            Expr::EigenPair {
                basis,
                values,
                arg,
                body,
            } => {
                let arg = arg.desugar_with(taken);
                let body = body.desugar_with(taken);
                let held = fresh_name("eigen_arg", taken);
                Expr::let_in(
                    held.clone(),
                    arg,
                    Expr::let_in(
                        basis.clone(),
                        Expr::var(held.clone()).eigen(),
                        Expr::let_in(
                            values.clone(),
                            eigenvalue_recovery(&Expr::var(held), &Expr::var(basis.clone())),
                            body,
                        ),
                    ),
                )
            }
        }
    }
}

/// Picks `<stem>_<k>` not yet in `taken`, and reserves it.
pub(crate) fn fresh_name(stem: &str, taken: &mut BTreeSet<String>) -> String {
    let mut k = 1usize;
    loop {
        let candidate = format!("{stem}_{k}");
        if taken.insert(candidate.clone()) {
            return candidate;
        }
        k += 1;
    }
}

/// The division-based recovery of eigenvalues from a basis of
/// eigenvectors: divide `A.B` by `B` entrywise (0/0 = 0), sum each column,
/// divide by the number of nonzero entries in that column, and put the
/// result on a diagonal.
///
/// `a` and `b` should be variables or otherwise cheap to duplicate.
pub fn eigenvalue_recovery(a: &Expr, b: &Expr) -> Expr {
    let ratios = Expr::apply("div", vec![a.clone().mul(b.clone()), b.clone()]);
    let ones_row = b.clone().ones().transpose();
    let sums = ones_row.clone().mul(ratios);
    let counts = ones_row.mul(Expr::apply("nz", vec![b.clone()]));
    // The means form a row; `conj(x^*)` turns it into a column without
    // conjugating the eigenvalues.
    let means = Expr::apply("div", vec![sums, counts]);
    Expr::apply("conj", vec![means.transpose()]).diag()
}

/// A size term: a size symbol or the literal 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SizeTerm {
    Symbol(String),
    One,
}

impl SizeTerm {
    pub fn sym(name: impl Into<String>) -> Self {
        SizeTerm::Symbol(name.into())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, SizeTerm::One)
    }
}

impl fmt::Display for SizeTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SizeTerm::Symbol(s) => f.write_str(s),
            SizeTerm::One => f.write_str("1"),
        }
    }
}

/// Type class used by the relational encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TypeClass {
    General,
    /// `s x 1` with `s` a symbol.
    ColumnVector,
    /// `1 x s` with `s` a symbol.
    RowVector,
    Scalar,
}

impl TypeClass {
    /// Arity of the relational encoding of values of this class.
    pub fn arity(self) -> usize {
        match self {
            TypeClass::General => 3,
            TypeClass::ColumnVector | TypeClass::RowVector => 2,
            TypeClass::Scalar => 1,
        }
    }
}

/// A matrix type `rows x cols`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MatrixType {
    pub rows: SizeTerm,
    pub cols: SizeTerm,
}

impl MatrixType {
    pub fn new(rows: SizeTerm, cols: SizeTerm) -> Self {
        MatrixType { rows, cols }
    }

    /// Shorthand: `"1"` is the literal one, anything else a symbol.
    pub fn of(rows: &str, cols: &str) -> Self {
        let term = |s: &str| {
            if s == "1" {
                SizeTerm::One
            } else {
                SizeTerm::sym(s)
            }
        };
        MatrixType::new(term(rows), term(cols))
    }

    pub fn class(&self) -> TypeClass {
        match (self.rows.is_one(), self.cols.is_one()) {
            (false, false) => TypeClass::General,
            (false, true) => TypeClass::ColumnVector,
            (true, false) => TypeClass::RowVector,
            (true, true) => TypeClass::Scalar,
        }
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transposed(&self) -> Self {
        MatrixType::new(self.cols.clone(), self.rows.clone())
    }

    pub fn symbols(&self) -> impl Iterator<Item = &str> {
        [&self.rows, &self.cols].into_iter().filter_map(|t| match t {
            SizeTerm::Symbol(s) => Some(s.as_str()),
            SizeTerm::One => None,
        })
    }
}

impl fmt::Display for MatrixType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} x {}", self.rows, self.cols)
    }
}

/// Assignment of matrix types to variable names, iterated in name order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Schema {
    vars: BTreeMap<String, MatrixType>,
}

impl Schema {
    pub fn new() -> Self {
        Schema::default()
    }

    /// Builds a schema from `(name, type)` pairs; later duplicates win.
    pub fn from_pairs<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, MatrixType)>,
        S: Into<String>,
    {
        Schema {
            vars: pairs.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }

    /// Inserts and returns the previous type, if any.
    pub fn insert(&mut self, name: impl Into<String>, ty: MatrixType) -> Option<MatrixType> {
        self.vars.insert(name.into(), ty)
    }

    /// `S[M := ty]`.
    pub fn with(&self, name: &str, ty: MatrixType) -> Schema {
        let mut s = self.clone();
        s.insert(name, ty);
        s
    }

    pub fn get(&self, name: &str) -> Option<&MatrixType> {
        self.vars.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.vars.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &MatrixType)> {
        self.vars.iter()
    }

    pub fn names(&self) -> impl Iterator<Item = &String> {
        self.vars.keys()
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    /// All size symbols used by the schema, sorted.
    pub fn symbols(&self) -> BTreeSet<String> {
        self.vars
            .values()
            .flat_map(|t| t.symbols().map(str::to_owned).collect::<Vec<_>>())
            .collect()
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, ty) in &self.vars {
            writeln!(f, "{name} : {ty}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type_classes() {
        assert_eq!(MatrixType::of("a", "b").class(), TypeClass::General);
        assert_eq!(MatrixType::of("a", "a").class(), TypeClass::General);
        assert_eq!(MatrixType::of("a", "1").class(), TypeClass::ColumnVector);
        assert_eq!(MatrixType::of("1", "a").class(), TypeClass::RowVector);
        assert_eq!(MatrixType::of("1", "1").class(), TypeClass::Scalar);
    }

    #[test]
    fn desugar_avoids_capture() {
        let e = Expr::eigen_pair("B", "L", Expr::var("eigen_arg_1"), Expr::var("L"));
        let d = e.desugar();
        match d {
            Expr::Let(held, bound, _) => {
                assert_eq!(held, "eigen_arg_2");
                assert_eq!(*bound, Expr::var("eigen_arg_1"));
            }
            other => panic!("unexpected desugaring {other:?}"),
        }
        assert!(!d_contains_pair(&e.desugar()));
    }

    fn d_contains_pair(e: &Expr) -> bool {
        matches!(e, Expr::EigenPair { .. }) || e.children().into_iter().any(d_contains_pair)
    }

    #[test]
    fn size_and_depth() {
        let e = Expr::var("M").mul(Expr::var("N").transpose());
        assert_eq!(e.size(), 4);
        assert_eq!(e.depth(), 3);
    }
}

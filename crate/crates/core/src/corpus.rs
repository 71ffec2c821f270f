//! Standard library of derived programs.
//!
//! Each builder returns a [`NamedProgram`]: a schema, an expression over it,
//! the tower and tolerance it is meant to be checked at, and a tag naming
//! the reference procedure that validates it. The shorthands (constants,
//! scalar multiplication, closure) are exported for reuse in larger
//! programs.

use crate::ast::{fresh_name, Expr, MatrixType, Schema, SizeTerm};
use crate::binrel::{compile, graph_schema, parse_binrel};
use crate::matrix::Instance;
use crate::pretty::pretty_print;
use crate::scalar::{parse_rational, GaussRat, Scalar, Tower};
use num::rational::BigRational;
use num::One;
use std::collections::BTreeSet;

/// Which independent reference checks a program.
#[derive(Clone, Debug, PartialEq)]
pub enum OracleKind {
    Constant(GaussRat),
    ScalarMult,
    GoogleMatrix { d: BigRational },
    VectorMin,
    PageRank { d: BigRational },
    TransitiveClosure { reflexive: bool },
    Bipartite,
    ComponentCount,
    Rank,
    FiedlerSpace,
    Inverse,
}

/// Conditions an input must meet for the program to mean what its name
/// says.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precondition {
    None,
    /// Every row of the variable has a nonzero entry.
    PositiveOutdegree(&'static str),
    /// The variable is a 0/1 matrix.
    Relation(&'static str),
    /// The variable is a symmetric 0/1 matrix with a zero diagonal.
    SimpleGraph(&'static str),
    /// The variable is real and symmetric.
    RealSymmetric(&'static str),
    /// The variable has real entries.
    Real(&'static str),
}

#[derive(Clone, Debug, PartialEq)]
pub struct NamedProgram {
    pub name: String,
    pub schema: Schema,
    pub expr: Expr,
    pub oracle: OracleKind,
    /// Preferred tower; eigen programs need `Float`.
    pub tower: Tower,
    /// Absolute entrywise tolerance for oracle comparisons.
    pub tolerance: f64,
    pub precondition: Precondition,
}

impl NamedProgram {
    pub fn source(&self) -> String {
        pretty_print(&self.expr)
    }

    /// Checks the precondition on an exact instance.
    pub fn check_input(&self, inst: &Instance<GaussRat>) -> Result<(), String> {
        let get = |v: &str| inst.get(v).ok_or_else(|| format!("missing variable `{v}`"));
        let zero = GaussRat::int(0);
        let one = GaussRat::int(1);
        match self.precondition {
            Precondition::None => Ok(()),
            Precondition::PositiveOutdegree(v) => {
                let m = get(v)?;
                match (0..m.rows()).find(|&i| m.row(i).iter().all(|x| *x == zero)) {
                    Some(i) => Err(format!("node {} of `{v}` has no outgoing edge", i + 1)),
                    None => Ok(()),
                }
            }
            Precondition::Relation(v) => {
                let m = get(v)?;
                if m.data().iter().all(|x| *x == zero || *x == one) {
                    Ok(())
                } else {
                    Err(format!("`{v}` is not a 0/1 matrix"))
                }
            }
            Precondition::SimpleGraph(v) => {
                let m = get(v)?;
                if !m.is_square() || !m.data().iter().all(|x| *x == zero || *x == one) {
                    return Err(format!("`{v}` is not a square 0/1 matrix"));
                }
                if m != &m.transpose() {
                    return Err(format!("`{v}` is not symmetric"));
                }
                if (0..m.rows()).any(|i| m[(i, i)] != zero) {
                    return Err(format!("`{v}` has a self-loop"));
                }
                Ok(())
            }
            Precondition::RealSymmetric(v) => {
                let m = get(v)?;
                if m.data().iter().any(|x| !x.is_real(0.0)) || m != &m.transpose() {
                    Err(format!("`{v}` is not real symmetric"))
                } else {
                    Ok(())
                }
            }
            Precondition::Real(v) => {
                if get(v)?.data().iter().all(|x| x.is_real(0.0)) {
                    Ok(())
                } else {
                    Err(format!("`{v}` has non-real entries"))
                }
            }
        }
    }
}

fn ty(r: &str, c: &str) -> MatrixType {
    MatrixType::of(r, c)
}

fn var(v: &str) -> Expr {
    Expr::var(v)
}

fn square(v: &str) -> Schema {
    Schema::new().with(v, ty("a", "a"))
}

fn rational(text: &str) -> BigRational {
    parse_rational(text).unwrap_or_else(|| panic!("`{text}` is not a rational constant"))
}

fn fresh(stem: &str, parts: &[&Expr]) -> String {
    let mut taken: BTreeSet<String> = parts.iter().flat_map(|e| e.identifiers()).collect();
    if taken.contains(stem) {
        fresh_name(stem, &mut taken)
    } else {
        stem.to_string()
    }
}

/// The 1x1 matrix holding `c`, built from any expression.
pub fn scalar_const(c: &str, like: Expr) -> Expr {
    Expr::apply(format!("const:{c}"), vec![like.ones().transpose().ones()])
}

/// `c (.) a`: every entry of `a` times the single entry of the 1x1 `c`.
pub fn smul(c: Expr, a: Expr) -> Expr {
    if !matches!(a, Expr::Var(_)) {
        let x = fresh("X", &[&c, &a]);
        return Expr::let_in(x.clone(), a, smul(c, var(&x)));
    }
    let m = fresh("M", &[&c, &a]);
    let filled = a.clone().ones().mul(c).mul(a.clone().transpose().ones().transpose());
    Expr::let_in(m.clone(), filled, Expr::apply("mul", vec![var(&m), a]))
}

/// The scalar holding the number of rows of `a`.
pub fn row_count(a: Expr) -> Expr {
    a.clone().ones().transpose().mul(a.ones())
}

/// `diag(ones(a))`.
pub fn identity_like(a: Expr) -> Expr {
    a.ones().diag()
}

/// Reflexive-transitive closure of the relation in variable `a`, via
/// `(I - A/(n+1))^-1`; the transitive closure multiplies by `A` once more.
pub fn closure(a: &str, reflexive: bool) -> Expr {
    let n = fresh("N", &[&var(a)]);
    let scaled = smul(Expr::apply("recip1p", vec![var(&n)]), var(a));
    let refl = Expr::apply(
        "nz",
        vec![Expr::apply("sub", vec![identity_like(var(a)), scaled]).inv()],
    );
    let body = if reflexive {
        refl
    } else {
        Expr::apply("nz", vec![refl.mul(var(a))])
    };
    Expr::let_in(n, row_count(var(a)), body)
}

fn one_minus(d: &str) -> String {
    (BigRational::one() - rational(d)).to_string()
}

/// `let N = ones(M)^* in apply[c](ones(N))`.
pub fn constant(c: &str) -> NamedProgram {
    let value = crate::scalar::parse_gauss(c).unwrap_or_else(|| panic!("bad constant `{c}`"));
    NamedProgram {
        name: "constant".into(),
        schema: Schema::new().with("M", ty("a", "b")),
        expr: Expr::let_in(
            "N",
            var("M").ones().transpose(),
            Expr::apply(format!("const:{c}"), vec![var("N").ones()]),
        ),
        oracle: OracleKind::Constant(value),
        tower: Tower::Exact,
        tolerance: 0.0,
        precondition: Precondition::None,
    }
}

pub fn scalar_mult() -> NamedProgram {
    NamedProgram {
        name: "scalar_mult".into(),
        schema: Schema::new()
            .with("C", MatrixType::new(SizeTerm::One, SizeTerm::One))
            .with("A", ty("a", "b")),
        expr: smul(var("C"), var("A")),
        oracle: OracleKind::ScalarMult,
        tower: Tower::Exact,
        tolerance: 0.0,
        precondition: Precondition::None,
    }
}

/// The matrices `J` (all ones), `K` (row sums broadcast), `B = A / K` and
/// `N = n` wrapped around `body`.
fn with_normalized(body: Expr) -> Expr {
    let a = var("A");
    Expr::let_in(
        "J",
        a.clone().ones().mul(a.clone().ones().transpose()),
        Expr::let_in(
            "K",
            a.clone().mul(var("J")),
            Expr::let_in(
                "B",
                Expr::apply("div", vec![a.clone(), var("K")]),
                Expr::let_in("N", row_count(a), body),
            ),
        ),
    )
}

pub fn google_matrix(d: &str) -> NamedProgram {
    let a = var("A");
    let body = Expr::apply(
        "add",
        vec![
            smul(scalar_const(d, a.clone()), var("B")),
            smul(
                scalar_const(&one_minus(d), a),
                smul(Expr::apply("recip", vec![var("N")]), var("J")),
            ),
        ],
    );
    NamedProgram {
        name: "google_matrix".into(),
        schema: square("A"),
        expr: with_normalized(body),
        oracle: OracleKind::GoogleMatrix { d: rational(d) },
        tower: Tower::Exact,
        tolerance: 1e-12,
        precondition: Precondition::PositiveOutdegree("A"),
    }
}

pub fn vector_min() -> NamedProgram {
    let v = var("v");
    let ones = || v.clone().ones();
    let expr = Expr::let_in(
        "V",
        v.clone().mul(ones().transpose()),
        Expr::let_in(
            "C",
            Expr::apply("le", vec![var("V"), var("V").transpose()]).mul(ones()),
            Expr::let_in(
                "N",
                row_count(v.clone()),
                Expr::let_in(
                    "S",
                    Expr::apply("eq", vec![var("C"), ones().mul(var("N"))]),
                    Expr::let_in(
                        "M",
                        Expr::apply("recip", vec![var("S").transpose().mul(ones())]),
                        var("M").mul(v.clone().transpose()).mul(var("S")),
                    ),
                ),
            ),
        ),
    );
    NamedProgram {
        name: "vector_min".into(),
        schema: Schema::new().with("v", MatrixType::new(SizeTerm::sym("a"), SizeTerm::One)),
        expr,
        oracle: OracleKind::VectorMin,
        tower: Tower::Exact,
        tolerance: 0.0,
        precondition: Precondition::Real("v"),
    }
}

/// `(1-d)/n (I - d B^*)^-1 1`, the stationary distribution of the Google
/// matrix. `B` is transposed so that the result is the left eigenvector.
pub fn pagerank(d: &str) -> NamedProgram {
    let a = var("A");
    let system = Expr::apply(
        "sub",
        vec![
            identity_like(a.clone()),
            smul(scalar_const(d, a.clone()), var("B").transpose()),
        ],
    );
    let body = smul(
        scalar_const(&one_minus(d), a.clone()),
        smul(
            Expr::apply("recip", vec![var("N")]),
            system.inv().mul(a.ones()),
        ),
    );
    NamedProgram {
        name: "pagerank".into(),
        schema: square("A"),
        expr: with_normalized(body),
        oracle: OracleKind::PageRank { d: rational(d) },
        tower: Tower::Exact,
        tolerance: 1e-6,
        precondition: Precondition::PositiveOutdegree("A"),
    }
}

pub fn transitive_closure(reflexive: bool) -> NamedProgram {
    NamedProgram {
        name: if reflexive {
            "reflexive_transitive_closure".into()
        } else {
            "transitive_closure".into()
        },
        schema: square("A"),
        expr: closure("A", reflexive),
        oracle: OracleKind::TransitiveClosure { reflexive },
        tower: Tower::Exact,
        tolerance: 0.0,
        precondition: Precondition::Relation("A"),
    }
}

fn compiled(names: &[&str], src: &str) -> Expr {
    let e = parse_binrel(src).expect("built-in relation expression parses");
    compile(&graph_schema(names.iter().copied(), "a"), &e).expect("built-in relation expression compiles")
}

/// 1 if the undirected graph `R` has no odd cycle, else 0. `T` is the
/// transitive closure of `R ; R`; the graph is bipartite iff `R` and the
/// converse of `T` are disjoint.
pub fn bipartiteness() -> NamedProgram {
    let r = var("R");
    let witness = compiled(&["R", "T"], "R - (R - T^)");
    let expr = Expr::let_in(
        "P",
        compiled(&["R"], "R ; R"),
        Expr::let_in(
            "T",
            closure("P", false),
            Expr::apply(
                "not",
                vec![r.clone().ones().transpose().mul(witness).mul(r.ones())],
            ),
        ),
    );
    NamedProgram {
        name: "bipartiteness".into(),
        schema: square("R"),
        expr,
        oracle: OracleKind::Bipartite,
        tower: Tower::Exact,
        tolerance: 0.0,
        precondition: Precondition::SimpleGraph("R"),
    }
}

/// Number of connected components of `R` read as an undirected graph:
/// the sum of reciprocal degrees in the closure of `R + R^`.
pub fn connected_components() -> NamedProgram {
    let c = var("C");
    let expr = Expr::let_in(
        "S",
        compiled(&["R"], "R + R^"),
        Expr::let_in(
            "C",
            closure("S", true),
            c.clone()
                .ones()
                .transpose()
                .mul(Expr::apply("recip", vec![c.clone().mul(c.ones())])),
        ),
    );
    NamedProgram {
        name: "connected_components".into(),
        schema: square("R"),
        expr,
        oracle: OracleKind::ComponentCount,
        tower: Tower::Exact,
        tolerance: 0.0,
        precondition: Precondition::Relation("R"),
    }
}

/// Number of nonzero eigenvalues; the rank for diagonalizable inputs.
pub fn rank_expr() -> NamedProgram {
    let a = var("A");
    let expr = Expr::eigen_pair(
        "B",
        "L",
        a.clone(),
        a.clone()
            .ones()
            .transpose()
            .mul(Expr::apply("nz", vec![var("L")]))
            .mul(a.ones()),
    );
    NamedProgram {
        name: "rank_expr".into(),
        schema: square("A"),
        expr,
        oracle: OracleKind::Rank,
        tower: Tower::Float,
        tolerance: 1e-6,
        precondition: Precondition::RealSymmetric("A"),
    }
}

/// Eigenvectors of the Laplacian for the second-smallest eigenvalue
/// (counted with multiplicity); other columns are zeroed.
pub fn laplacian_partition() -> NamedProgram {
    let a = var("A");
    let l = var("l");
    let ones = || l.clone().ones();
    let selector = Expr::apply(
        "and",
        vec![
            Expr::apply("le", vec![var("below"), ones()]),
            Expr::apply("le", vec![Expr::apply("add", vec![ones(), ones()]), var("upto")]),
        ],
    );
    let body = Expr::let_in(
        "l",
        var("L").mul(var("L").ones()),
        Expr::let_in(
            "V",
            l.clone().mul(ones().transpose()),
            Expr::let_in(
                "below",
                Expr::apply("lt", vec![var("V").transpose(), var("V")]).mul(ones()),
                Expr::let_in(
                    "upto",
                    Expr::apply("le", vec![var("V").transpose(), var("V")]).mul(ones()),
                    Expr::let_in("E", selector.diag(), var("B").mul(var("E"))),
                ),
            ),
        ),
    );
    let expr = Expr::let_in(
        "D",
        a.clone().mul(a.clone().ones()).diag(),
        Expr::let_in(
            "Lap",
            Expr::apply("sub", vec![var("D"), a]),
            Expr::eigen_pair("B", "L", var("Lap"), body),
        ),
    );
    NamedProgram {
        name: "laplacian_partition".into(),
        schema: square("A"),
        expr,
        oracle: OracleKind::FiedlerSpace,
        tower: Tower::Float,
        tolerance: 1e-6,
        precondition: Precondition::SimpleGraph("A"),
    }
}

/// `A^-1` through the eigendecomposition of `A^* A`, guarded to zero when
/// an eigenvalue vanishes.
pub fn inv_via_eigen() -> NamedProgram {
    let a = var("A");
    let b = var("B");
    let normalized = Expr::apply(
        "div_sqrt",
        vec![
            b.clone(),
            b.clone()
                .ones()
                .mul(b.clone().transpose().mul(b.clone()).mul(b.ones()).transpose()),
        ],
    );
    let product = var("U")
        .mul(Expr::apply("recip", vec![var("L")]))
        .mul(var("U").transpose())
        .mul(a.clone().transpose());
    let nonzero = a
        .clone()
        .ones()
        .transpose()
        .mul(Expr::apply("nz", vec![var("L")]))
        .mul(a.clone().ones());
    let guard = smul(
        Expr::apply("eq", vec![var("k"), row_count(a.clone())]),
        identity_like(a.clone()),
    );
    let body = Expr::let_in(
        "U",
        normalized,
        Expr::let_in(
            "C",
            product,
            Expr::let_in("k", nonzero, var("C").mul(guard)),
        ),
    );
    let expr = Expr::let_in(
        "S",
        a.clone().transpose().mul(a),
        Expr::eigen_pair("B", "L", var("S"), body),
    );
    NamedProgram {
        name: "inv_via_eigen".into(),
        schema: square("A"),
        expr,
        oracle: OracleKind::Inverse,
        tower: Tower::Float,
        tolerance: 1e-6,
        precondition: Precondition::Real("A"),
    }
}

/// Every program with its default parameters: `c = 7`, `d = 0.85`.
pub fn all() -> Vec<NamedProgram> {
    vec![
        constant("7"),
        scalar_mult(),
        google_matrix("0.85"),
        vector_min(),
        pagerank("0.85"),
        transitive_closure(true),
        transitive_closure(false),
        bipartiteness(),
        connected_components(),
        rank_expr(),
        laplacian_partition(),
        inv_via_eigen(),
    ]
}

pub fn by_name(name: &str) -> Option<NamedProgram> {
    all().into_iter().find(|p| p.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{eval, EvalConfig};
    use crate::matrix::Matrix;
    use crate::parse::parse;
    use crate::typecheck::typecheck;

    fn exact(rows: &[&[i64]]) -> Matrix<GaussRat> {
        Matrix::from_i64(rows)
    }

    fn run(p: &NamedProgram, var: &str, m: Matrix<GaussRat>) -> Matrix<GaussRat> {
        let inst = Instance::from_pairs([(var, m)]);
        p.check_input(&inst).unwrap();
        eval(&inst, &p.expr, &EvalConfig::exact()).unwrap()
    }

    #[test]
    fn every_program_typechecks_and_round_trips() {
        for p in all() {
            typecheck(&p.schema, &p.expr).unwrap_or_else(|e| panic!("{}: {e}", p.name));
            assert_eq!(parse(&p.source()).unwrap(), p.expr, "{}", p.name);
        }
    }

    #[test]
    fn constant_ignores_its_input() {
        let out = run(&constant("7"), "M", Matrix::zeros(3, 3));
        assert_eq!(out, exact(&[&[7]]));
        assert_eq!(run(&constant("0"), "M", Matrix::zeros(2, 5)), exact(&[&[0]]));
    }

    #[test]
    fn closure_of_a_path() {
        let path = exact(&[&[0, 1, 0], &[0, 0, 1], &[0, 0, 0]]);
        let refl = run(&transitive_closure(true), "A", path.clone());
        assert_eq!(refl, exact(&[&[1, 1, 1], &[0, 1, 1], &[0, 0, 1]]));
        let tc = run(&transitive_closure(false), "A", path);
        assert_eq!(tc, exact(&[&[0, 1, 1], &[0, 0, 1], &[0, 0, 0]]));
    }

    #[test]
    fn smul_avoids_capture() {
        let e = smul(var("M"), var("A"));
        assert!(e.to_string().starts_with("let M_1 ="), "{e}");
    }

    #[test]
    fn preconditions() {
        let g = google_matrix("0.85");
        let sink = Instance::from_pairs([("A", exact(&[&[0, 1], &[0, 0]]))]);
        assert!(g.check_input(&sink).is_err());
        let b = bipartiteness();
        let loopy = Instance::from_pairs([("R", exact(&[&[1, 0], &[0, 0]]))]);
        assert!(b.check_input(&loopy).is_err());
    }
}

//! Compilation of input-sized expressions into existential formulas.
//!
//! Every entry is a pair of real terms. Transpose, ones and diag only
//! rearrange terms; products, pointwise functions, inverses and
//! eigenbases introduce fresh existentially quantified entries whose
//! witnesses the ground checker recomputes with the evaluator.

use super::formula::{CTerm, Formula, Grid, NodeOp, RealFormula, Term, Witness};
use crate::ast::{Expr, Schema};
use crate::builtins;
use crate::typecheck::{typecheck, SizeAssignment, TypeError};
use num::rational::BigRational;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// A schema, an expression over it and sizes for every symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct InputSizedExpr {
    pub schema: Schema,
    pub expr: Expr,
    pub sigma: SizeAssignment,
}

impl InputSizedExpr {
    pub fn new(schema: Schema, expr: Expr, sigma: SizeAssignment) -> Self {
        InputSizedExpr {
            schema,
            expr,
            sigma,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EmitError {
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("size symbol `{0}` has no value")]
    UnsizedSymbol(String),
    #[error("no semi-algebraic definition for `{0}`")]
    MissingFnDef(String),
    #[error("constraint mentions variables outside the input/output set: {}", .0.join(", "))]
    FreeVariableEscape(Vec<String>),
}

/// Name of the real or imaginary part of input entry `(i, j)` of `m`,
/// 1-based.
pub fn input_var(m: &str, i: usize, j: usize, imag: bool) -> String {
    format!("x_{m}_{i}_{j}_{}", if imag { "im" } else { "re" })
}

/// Name of the real or imaginary part of output entry `(i, j)`, 1-based.
pub fn output_var(i: usize, j: usize, imag: bool) -> String {
    format!("y_{i}_{j}_{}", if imag { "im" } else { "re" })
}

fn input_grid(m: &str, rows: usize, cols: usize) -> Grid {
    Grid::vars(&format!("x_{m}"), rows, cols)
}

fn output_grid(rows: usize, cols: usize) -> Grid {
    Grid::vars("y", rows, cols)
}

/// Input dimensions per schema variable, in schema order.
pub fn input_dims(ise: &InputSizedExpr) -> Result<Vec<(String, usize, usize)>, EmitError> {
    ise.schema
        .iter()
        .map(|(name, ty)| {
            let (r, c) = dims_of(&ise.sigma, ty)?;
            Ok((name.clone(), r, c))
        })
        .collect()
}

fn dims_of(
    sigma: &SizeAssignment,
    ty: &crate::ast::MatrixType,
) -> Result<(usize, usize), EmitError> {
    sigma.dims(ty).ok_or_else(|| {
        let missing = ty
            .symbols()
            .find(|s| sigma.get(s).is_none())
            .unwrap_or_default()
            .to_string();
        EmitError::UnsizedSymbol(missing)
    })
}

/// The output dimensions of an input-sized expression.
pub fn output_dims(ise: &InputSizedExpr) -> Result<(usize, usize), EmitError> {
    let t = typecheck(&ise.schema, &ise.expr)?;
    dims_of(&ise.sigma, &t)
}

/// The free variables: every input entry, then every output entry, each
/// as a real and an imaginary part. This is also the witness order of a
/// pinned block.
pub fn free_variables(ise: &InputSizedExpr) -> Result<Vec<String>, EmitError> {
    let mut out = Vec::new();
    for (name, r, c) in input_dims(ise)? {
        out.extend(input_grid(&name, r, c).var_names());
    }
    let (r, c) = output_dims(ise)?;
    out.extend(output_grid(r, c).var_names());
    Ok(out)
}

/// A quantifier-free definition of a pointwise function over the
/// variables `in<k>_re`, `in<k>_im` (k from 1) and `out_re`, `out_im`.
#[derive(Clone, Debug, PartialEq)]
pub struct SemiAlgebraicFnDef {
    pub name: String,
    pub arity: usize,
    pub def: Formula,
}

impl SemiAlgebraicFnDef {
    /// The definition with its inputs and output replaced by terms.
    pub fn instantiate(&self, args: &[CTerm], out: &CTerm) -> Formula {
        let mut map = BTreeMap::new();
        for (k, a) in args.iter().enumerate() {
            map.insert(format!("in{}_re", k + 1), a.re.clone());
            map.insert(format!("in{}_im", k + 1), a.im.clone());
        }
        map.insert("out_re".to_string(), out.re.clone());
        map.insert("out_im".to_string(), out.im.clone());
        self.def.substitute(&map)
    }
}

fn arg(k: usize) -> CTerm {
    CTerm::vars(&format!("in{k}"))
}

fn out() -> CTerm {
    CTerm::vars("out")
}

fn is_zero(a: &CTerm) -> Formula {
    Formula::ceq(a, &CTerm::zero())
}

fn nonzero(a: &CTerm) -> Formula {
    Formula::cneq(a, &CTerm::zero())
}

fn out_is(v: i64) -> Formula {
    Formula::ceq(&out(), &CTerm::real(Term::int(v)))
}

/// `cond` selects 1, `otherwise` (its complement) selects 0.
fn indicator(cond: Formula, otherwise: Formula) -> Formula {
    Formula::or(vec![
        Formula::and(vec![cond, out_is(1)]),
        Formula::and(vec![otherwise, out_is(0)]),
    ])
}

fn is_real(a: &CTerm) -> Formula {
    Formula::eq(a.im.clone(), Term::zero())
}

fn not_real(a: &CTerm) -> Formula {
    Formula::neq(a.im.clone(), Term::zero())
}

/// `q * out = a` when `q != 0`, else `out = 0`.
fn guarded_quotient(a: &CTerm, q: &CTerm) -> Formula {
    Formula::or(vec![
        Formula::and(vec![is_zero(q), out_is(0)]),
        Formula::and(vec![nonzero(q), Formula::ceq(&out().mul(q), a)]),
    ])
}

fn rational_term(r: &BigRational) -> (Term, Term) {
    (
        Term::Const(BigRational::from_integer(r.denom().clone())),
        Term::Const(BigRational::from_integer(r.numer().clone())),
    )
}

/// Looks up the semi-algebraic definition of a builtin. Constants use
/// integer coefficients only: `q * out = p`.
pub fn fn_def(name: &str) -> Option<SemiAlgebraicFnDef> {
    let arity = builtins::arity(name)?;
    let (a, b, o) = (arg(1), arg(2), out());
    let def = if let Some(c) = builtins::parse_const(name) {
        let (qr, pr) = rational_term(&c.re);
        let (qi, pi) = rational_term(&c.im);
        Formula::and(vec![
            Formula::eq(qr.mul(o.re.clone()), pr),
            Formula::eq(qi.mul(o.im.clone()), pi),
        ])
    } else {
        match name {
            "add" => Formula::ceq(&o, &a.add(&b)),
            "sub" => Formula::ceq(&o, &a.sub(&b)),
            "mul" => Formula::ceq(&o, &a.mul(&b)),
            "div" => guarded_quotient(&a, &b),
            "recip" => guarded_quotient(&CTerm::one(), &a),
            "recip1p" => guarded_quotient(&CTerm::one(), &a.add(&CTerm::one())),
            "monus" => {
                let pos = Formula::and(vec![
                    is_real(&a),
                    is_real(&b),
                    Formula::lt(b.re.clone(), a.re.clone()),
                ]);
                let neg = Formula::or(vec![
                    not_real(&a),
                    not_real(&b),
                    Formula::le(a.re.clone(), b.re.clone()),
                ]);
                Formula::or(vec![
                    Formula::and(vec![pos, Formula::ceq(&o, &CTerm::real(a.re.clone().sub(b.re.clone())))]),
                    Formula::and(vec![neg, out_is(0)]),
                ])
            }
            "le" | "lt" => {
                let strict = name == "lt";
                let holds = if strict {
                    Formula::lt(a.re.clone(), b.re.clone())
                } else {
                    Formula::le(a.re.clone(), b.re.clone())
                };
                let fails = if strict {
                    Formula::le(b.re.clone(), a.re.clone())
                } else {
                    Formula::lt(b.re.clone(), a.re.clone())
                };
                indicator(
                    Formula::and(vec![is_real(&a), is_real(&b), holds]),
                    Formula::or(vec![not_real(&a), not_real(&b), fails]),
                )
            }
            "eq" => indicator(Formula::ceq(&a, &b), Formula::cneq(&a, &b)),
            "nz" => indicator(nonzero(&a), is_zero(&a)),
            "gt0" => indicator(
                Formula::and(vec![is_real(&a), Formula::lt(Term::zero(), a.re.clone())]),
                Formula::or(vec![not_real(&a), Formula::le(a.re.clone(), Term::zero())]),
            ),
            "and" => indicator(
                Formula::and(vec![nonzero(&a), nonzero(&b)]),
                Formula::or(vec![is_zero(&a), is_zero(&b)]),
            ),
            "or" => indicator(
                Formula::or(vec![nonzero(&a), nonzero(&b)]),
                Formula::and(vec![is_zero(&a), is_zero(&b)]),
            ),
            "not" => indicator(is_zero(&a), nonzero(&a)),
            "andnot" => indicator(
                Formula::and(vec![nonzero(&a), is_zero(&b)]),
                Formula::or(vec![is_zero(&a), nonzero(&b)]),
            ),
            "conj" => Formula::ceq(&o, &a.conj()),
            "re" => Formula::ceq(&o, &CTerm::real(a.re.clone())),
            "im" => Formula::ceq(&o, &CTerm::real(a.im.clone())),
            "id" => Formula::ceq(&o, &a),
            "div_sqrt" => {
                // out = a / sqrt(b) for real positive b: out^2 b = a^2
                // componentwise, with out agreeing in sign with a.
                let pos = Formula::and(vec![is_real(&b), Formula::lt(Term::zero(), b.re.clone())]);
                let nonpos = Formula::or(vec![not_real(&b), Formula::le(b.re.clone(), Term::zero())]);
                let part = |x: &Term, y: &Term| {
                    Formula::and(vec![
                        Formula::eq(
                            Term::product(vec![y.clone(), y.clone(), b.re.clone()]),
                            x.clone().mul(x.clone()),
                        ),
                        Formula::le(Term::zero(), x.clone().mul(y.clone())),
                    ])
                };
                Formula::or(vec![
                    Formula::and(vec![pos, part(&a.re, &o.re), part(&a.im, &o.im)]),
                    Formula::and(vec![nonpos, out_is(0)]),
                ])
            }
            _ => return None,
        }
    };
    Some(SemiAlgebraicFnDef {
        name: name.to_string(),
        arity,
        def,
    })
}

/// An existential block: fresh variables, their witness and the
/// constraint tying them to earlier values.
struct Block {
    vars: Vec<String>,
    witness: Witness,
    constraint: Formula,
}

struct Emitter<'a> {
    sigma: &'a SizeAssignment,
    next: usize,
    blocks: Vec<Block>,
    scope: Vec<(String, Grid)>,
}

impl Emitter<'_> {
    fn fresh(&mut self, stem: &str) -> String {
        self.next += 1;
        format!("{stem}{}", self.next)
    }

    fn lookup(&self, name: &str) -> Option<&Grid> {
        self.scope.iter().rev().find(|(n, _)| n == name).map(|(_, g)| g)
    }

    /// Emits `e`. When `target` is given the result is constrained to
    /// equal it and no block is opened for the root operation.
    fn emit(&mut self, schema: &Schema, e: &Expr, target: Option<&Grid>) -> Result<Grid, EmitError> {
        let grid = match e {
            Expr::Var(v) => {
                if let Some(g) = self.lookup(v) {
                    g.clone()
                } else {
                    let (r, c) = dims_of(self.sigma, &typecheck(schema, e)?)?;
                    input_grid(v, r, c)
                }
            }
            Expr::Let(name, bound, body) => {
                let t = typecheck(schema, bound)?;
                let g = self.emit(schema, bound, None)?;
                self.scope.push((name.clone(), g));
                let inner = schema.with(name, t);
                let out = self.emit(&inner, body, target);
                self.scope.pop();
                return out;
            }
            Expr::Transpose(a) => {
                let g = self.emit(schema, a, None)?;
                Grid::from_fn(g.cols, g.rows, |i, j| g.at(j, i).conj())
            }
            Expr::Ones(a) => {
                let g = self.emit(schema, a, None)?;
                Grid::from_fn(g.rows, 1, |_, _| CTerm::one())
            }
            Expr::Diag(a) => {
                let g = self.emit(schema, a, None)?;
                Grid::from_fn(g.rows, g.rows, |i, j| {
                    if i == j {
                        g.at(i, 0).clone()
                    } else {
                        CTerm::zero()
                    }
                })
            }
            Expr::MatMul(a, b) => {
                let ga = self.emit(schema, a, None)?;
                let gb = self.emit(schema, b, None)?;
                let prod = ga.mul(&gb);
                return Ok(self.materialize(
                    NodeOp::MatMul,
                    vec![ga, gb],
                    target,
                    |out| Formula::grid_eq(out, &prod),
                ));
            }
            Expr::Apply(f, args) => {
                let def = fn_def(f).ok_or_else(|| EmitError::MissingFnDef(f.clone()))?;
                let grids = args
                    .iter()
                    .map(|a| self.emit(schema, a, None))
                    .collect::<Result<Vec<_>, _>>()?;
                let inputs = grids.clone();
                return Ok(self.materialize(NodeOp::Apply(f.clone()), inputs, target, |out| {
                    Formula::and(
                        out.cells
                            .iter()
                            .enumerate()
                            .map(|(k, o)| {
                                let xs: Vec<CTerm> = grids.iter().map(|g| g.cells[k].clone()).collect();
                                def.instantiate(&xs, o)
                            })
                            .collect(),
                    )
                }));
            }
            Expr::Inv(a) => {
                let x = self.emit(schema, a, None)?;
                let u = self.fresh("u");
                let ugrid = Grid::vars(&u, x.rows, 1);
                return Ok(self.materialize(NodeOp::Inv, vec![x.clone()], target, |y| {
                    let invertible = Formula::grid_eq(&y.mul(&x), &Grid::identity(x.rows));
                    let singular = Formula::exists(
                        ugrid.var_names(),
                        Witness::NullVector(x.clone()),
                        Formula::and(vec![
                            Formula::grid_eq(&x.mul(&ugrid), &Grid::from_fn(x.rows, 1, |_, _| CTerm::zero())),
                            Formula::or(ugrid.cells.iter().map(nonzero).collect()),
                            Formula::grid_eq(y, &Grid::from_fn(y.rows, y.cols, |_, _| CTerm::zero())),
                        ]),
                    );
                    Formula::or(vec![invertible, singular])
                }));
            }
            Expr::Eigen(a) => {
                let x = self.emit(schema, a, None)?;
                let stems = EigenStems {
                    z: self.fresh("z"),
                    p: self.fresh("p"),
                    l: self.fresh("l"),
                    jz: self.fresh("jz"),
                    jw: self.fresh("jw"),
                    jd: self.fresh("jd"),
                    js: self.fresh("js"),
                };
                return Ok(self.materialize(NodeOp::Eigen, vec![x.clone()], target, |y| {
                    Formula::or(vec![diagonalizable_branch(&x, y, &stems), jordan_branch(&x, y, &stems)])
                }));
            }
            Expr::EigenPair { .. } => {
                return self.emit(schema, &e.desugar(), target);
            }
        };
        if let Some(t) = target {
            self.blocks.push(Block {
                vars: Vec::new(),
                witness: Witness::None,
                constraint: Formula::grid_eq(t, &grid),
            });
        }
        Ok(grid)
    }

    fn materialize(
        &mut self,
        op: NodeOp,
        args: Vec<Grid>,
        target: Option<&Grid>,
        constraint: impl FnOnce(&Grid) -> Formula,
    ) -> Grid {
        let (rows, cols) = match &op {
            NodeOp::MatMul => (args[0].rows, args[1].cols),
            NodeOp::Apply(_) | NodeOp::Inv | NodeOp::Eigen => (args[0].rows, args[0].cols),
        };
        let (out, vars, witness) = match target {
            Some(t) => (t.clone(), Vec::new(), Witness::None),
            None => {
                let stem = self.fresh("t");
                let g = Grid::vars(&stem, rows, cols);
                let names = g.var_names();
                (g, names, Witness::Node { op, args })
            }
        };
        let constraint = constraint(&out);
        self.blocks.push(Block {
            vars,
            witness,
            constraint,
        });
        out
    }
}

struct EigenStems {
    z: String,
    p: String,
    l: String,
    jz: String,
    jw: String,
    jd: String,
    js: String,
}

/// `y` is an invertible matrix of eigenvectors of `x`, with columns that
/// share an eigenvalue mutually orthogonal.
fn diagonalizable_branch(x: &Grid, y: &Grid, s: &EigenStems) -> Formula {
    let n = x.rows;
    let z = Grid::vars(&s.z, n, n);
    let basis = Formula::exists(
        z.var_names(),
        Witness::Inverse(y.clone()),
        Formula::grid_eq(&y.mul(&z), &Grid::identity(n)),
    );
    let p = Grid::vars(&s.p, n, n);
    let lambdas: Vec<CTerm> = (1..=n).map(|j| CTerm::vars(&format!("{}_{j}", s.l))).collect();
    let mut vars = p.var_names();
    for j in 1..=n {
        vars.push(format!("{}_{j}_re", s.l));
        vars.push(format!("{}_{j}_im", s.l));
    }
    let mut conds = vec![Formula::grid_eq(&p, &x.mul(y))];
    for i in 0..n {
        for j in 0..n {
            conds.push(Formula::ceq(p.at(i, j), &lambdas[j].mul(y.at(i, j))));
        }
    }
    // Columns j and k share an eigenvalue iff p_ij / y_ij = p_i'k / y_i'k
    // for some nonzero y_ij, y_i'k; cleared of division this reads
    // p_ij y_i'k = p_i'k y_ij.
    for j in 0..n {
        for k in j + 1..n {
            let inner = CTerm::sum((0..n).map(|i| y.at(i, j).conj().mul(y.at(i, k))));
            for i in 0..n {
                for i2 in 0..n {
                    conds.push(Formula::or(vec![
                        is_zero(y.at(i, j)),
                        is_zero(y.at(i2, k)),
                        Formula::cneq(&p.at(i, j).mul(y.at(i2, k)), &p.at(i2, k).mul(y.at(i, j))),
                        is_zero(&inner),
                    ]));
                }
            }
        }
    }
    let eigen = Formula::exists(
        vars,
        Witness::EigenColumns {
            a: x.clone(),
            b: y.clone(),
        },
        Formula::and(conds),
    );
    Formula::and(vec![basis, eigen])
}

/// `y` is zero and `x` has a Jordan form with a 1 on the superdiagonal.
fn jordan_branch(x: &Grid, y: &Grid, s: &EigenStems) -> Formula {
    let n = x.rows;
    let zero = Formula::grid_eq(y, &Grid::from_fn(n, n, |_, _| CTerm::zero()));
    let z = Grid::vars(&s.jz, n, n);
    let w = Grid::vars(&s.jw, n, n);
    let d: Vec<CTerm> = (1..=n).map(|i| CTerm::vars(&format!("{}_{i}", s.jd))).collect();
    let sup: Vec<Term> = (1..n).map(|i| Term::var(format!("{}_{i}", s.js))).collect();
    let j = Grid::from_fn(n, n, |r, c| {
        if r == c {
            d[r].clone()
        } else if c == r + 1 {
            CTerm::real(sup[r].clone())
        } else {
            CTerm::zero()
        }
    });
    let mut vars = z.var_names();
    vars.extend(w.var_names());
    for i in 1..=n {
        vars.push(format!("{}_{i}_re", s.jd));
        vars.push(format!("{}_{i}_im", s.jd));
    }
    for i in 1..n {
        vars.push(format!("{}_{i}", s.js));
    }
    let mut conds = vec![
        Formula::grid_eq(&z.mul(&w), &Grid::identity(n)),
        Formula::grid_eq(&z.mul(x), &j.mul(&z)),
        Formula::or(sup.iter().map(|t| Formula::eq(t.clone(), Term::one())).collect()),
    ];
    for (i, t) in sup.iter().enumerate() {
        conds.push(Formula::or(vec![
            Formula::eq(t.clone(), Term::zero()),
            Formula::eq(t.clone(), Term::one()),
        ]));
        conds.push(Formula::or(vec![
            Formula::eq(t.clone(), Term::zero()),
            Formula::ceq(&d[i], &d[i + 1]),
        ]));
    }
    Formula::and(vec![
        zero,
        Formula::exists(vars, Witness::Jordan(x.clone()), Formula::and(conds)),
    ])
}

/// Compiles an input-sized expression into a formula over its input and
/// output entries.
pub fn emit_formula(ise: &InputSizedExpr) -> Result<RealFormula, EmitError> {
    let free = free_variables(ise)?;
    let (r, c) = output_dims(ise)?;
    let mut em = Emitter {
        sigma: &ise.sigma,
        next: 0,
        blocks: Vec::new(),
        scope: Vec::new(),
    };
    em.emit(&ise.schema, &ise.expr, Some(&output_grid(r, c)))?;
    let mut body = Formula::True;
    for b in em.blocks.into_iter().rev() {
        body = Formula::exists(b.vars, b.witness, Formula::and(vec![b.constraint, body]));
    }
    Ok(RealFormula { free, body })
}

/// Reads `v = c` and `c = v` conjuncts off the top level of a constraint.
fn pins_of(chi: &Formula) -> BTreeMap<String, BigRational> {
    let mut pins = BTreeMap::new();
    let conjuncts: Vec<&Formula> = match chi {
        Formula::And(fs) => fs.iter().collect(),
        f => vec![f],
    };
    let constant = |t: &Term| match t {
        Term::Const(c) => Some(c.clone()),
        Term::Neg(inner) => match &**inner {
            Term::Const(c) => Some(-c.clone()),
            _ => None,
        },
        _ => None,
    };
    for f in conjuncts {
        if let Formula::Eq(a, b) = f {
            match (a, b) {
                (Term::Var(v), t) | (t, Term::Var(v)) if v.starts_with("x_") => {
                    if let Some(c) = constant(t) {
                        pins.entry(v.clone()).or_insert(c);
                    }
                }
                _ => {}
            }
        }
    }
    pins
}

/// The sentence `exists FV (psi and chi)`. Its witness block reads the
/// inputs pinned by `chi` (others are 0) and evaluates the expression.
pub fn emit_partial_evaluation(ise: &InputSizedExpr, chi: &Formula) -> Result<RealFormula, EmitError> {
    let psi = emit_formula(ise)?;
    let allowed: BTreeSet<&String> = psi.free.iter().collect();
    let escaped: Vec<String> = chi
        .free_vars()
        .into_iter()
        .filter(|v| !allowed.contains(v))
        .collect();
    if !escaped.is_empty() {
        return Err(EmitError::FreeVariableEscape(escaped));
    }
    let witness = Witness::Pinned {
        pins: pins_of(chi),
        inputs: input_dims(ise)?,
        expr: ise.expr.clone(),
    };
    Ok(RealFormula {
        free: Vec::new(),
        body: Formula::exists(psi.free, witness, Formula::and(vec![psi.body, chi.clone()])),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::MatrixType;
    use crate::parse::parse;

    fn ise(pairs: &[(&str, &str, &str)], src: &str, sizes: &str) -> InputSizedExpr {
        InputSizedExpr::new(
            Schema::from_pairs(pairs.iter().map(|(n, r, c)| (*n, MatrixType::of(r, c)))),
            parse(src).unwrap(),
            SizeAssignment::parse(sizes).unwrap(),
        )
    }

    #[test]
    fn identity_expression() {
        let f = emit_formula(&ise(&[("M", "a", "b")], "M", "a=1,b=1")).unwrap();
        assert_eq!(f.body.to_string(), "(y_1_1_re = x_M_1_1_re ∧ y_1_1_im = x_M_1_1_im)");
        assert_eq!(f.free, ["x_M_1_1_re", "x_M_1_1_im", "y_1_1_re", "y_1_1_im"]);
    }

    #[test]
    fn scalar_product_is_complex_multiplication() {
        let f = emit_formula(&ise(&[("M", "a", "a"), ("N", "a", "a")], "M . N", "a=1")).unwrap();
        assert_eq!(
            f.body.to_string(),
            "(y_1_1_re = ((x_M_1_1_re*x_N_1_1_re) + -((x_M_1_1_im*x_N_1_1_im))) ∧ \
             y_1_1_im = ((x_M_1_1_re*x_N_1_1_im) + (x_M_1_1_im*x_N_1_1_re)))"
        );
    }

    #[test]
    fn inner_products_are_quantified() {
        let f = emit_formula(&ise(&[("M", "a", "a")], "M . M . M", "a=2")).unwrap();
        assert_eq!(f.body.bound_vars().len(), 8);
        let fv = f.body.free_vars();
        assert!(fv.iter().all(|v| f.free.contains(v)));
    }

    #[test]
    fn every_builtin_has_a_definition() {
        for b in builtins::registry() {
            let d = fn_def(b.name).unwrap();
            assert_eq!(d.arity, b.arity);
            let allowed: BTreeSet<String> = (1..=d.arity)
                .flat_map(|k| [format!("in{k}_re"), format!("in{k}_im")])
                .chain(["out_re".to_string(), "out_im".to_string()])
                .collect();
            assert!(d.def.free_vars().is_subset(&allowed), "{}", b.name);
        }
        assert!(fn_def("const:1/2").is_some());
        assert!(fn_def("exp").is_none());
    }

    #[test]
    fn unknown_function_is_reported() {
        let e = InputSizedExpr::new(
            Schema::new().with("M", MatrixType::of("a", "a")),
            Expr::apply("exp", vec![Expr::var("M")]),
            SizeAssignment::new().with("a", 1),
        );
        assert!(matches!(emit_formula(&e), Err(EmitError::Type(_)) | Err(EmitError::MissingFnDef(_))));
    }

    #[test]
    fn escaping_constraint_is_rejected() {
        let e = ise(&[("M", "a", "a")], "M", "a=1");
        let chi = Formula::eq(Term::var("x_N_1_1_re"), Term::zero());
        assert_eq!(
            emit_partial_evaluation(&e, &chi),
            Err(EmitError::FreeVariableEscape(vec!["x_N_1_1_re".into()]))
        );
        let ok = emit_partial_evaluation(&e, &Formula::True).unwrap();
        assert!(ok.body.free_vars().is_empty());
    }
}

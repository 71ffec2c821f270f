//! Seeded random generators: schemas, size assignments, well-typed
//! programs, instances, graphs and relation-algebra expressions.

use matlang::binrel::BinRelExpr;
use matlang::{Expr, Instance, Matrix, MatrixType, Schema, SizeAssignment, SizeTerm};
use matlang::scalar::GaussRat;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use std::collections::BTreeSet;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// How `eigen` may appear in generated programs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EigenMode {
    Off,
    /// Only as `B, L = eigen(S)` over a self-adjoint `S`, with just `L`
    /// usable in the body.
    SelfAdjointValues,
    /// Bare `eigen(e)` on anything square.
    Raw,
}

#[derive(Clone, Debug)]
pub struct GenConfig {
    pub max_depth: usize,
    pub max_dim: usize,
    pub allow_inv: bool,
    pub eigen: EigenMode,
    pub functions: Vec<String>,
    /// Entries get nonzero imaginary parts with this probability.
    pub complex_prob: f64,
}

/// Builtins that are exact and need no precondition.
pub const EXACT_FUNCTIONS: &[&str] = &[
    "add", "sub", "mul", "div", "recip", "recip1p", "monus", "le", "lt", "eq", "nz", "gt0", "and",
    "or", "not", "andnot", "conj", "re", "im", "id", "const:2", "const:-1/2",
];

impl GenConfig {
    pub fn exact(max_depth: usize, max_dim: usize) -> Self {
        GenConfig {
            max_depth,
            max_dim,
            allow_inv: false,
            eigen: EigenMode::Off,
            functions: EXACT_FUNCTIONS.iter().map(|s| s.to_string()).collect(),
            complex_prob: 0.0,
        }
    }

    pub fn with_inv(mut self) -> Self {
        self.allow_inv = true;
        self
    }

    pub fn with_eigen(mut self, mode: EigenMode) -> Self {
        self.eigen = mode;
        self
    }

    pub fn with_complex(mut self, p: f64) -> Self {
        self.complex_prob = p;
        self
    }
}

const SYMBOLS: &[&str] = &["a", "b", "c"];
const VARS: &[&str] = &["A", "B", "C", "D"];

fn size_term(s: &str) -> SizeTerm {
    if s == "1" {
        SizeTerm::One
    } else {
        SizeTerm::sym(s)
    }
}

fn random_term(rng: &mut TestRng, symbols: &[&'static str]) -> SizeTerm {
    if rng.gen_bool(0.15) {
        SizeTerm::One
    } else {
        size_term(symbols.choose(rng).expect("nonempty"))
    }
}

/// One to three variables over one to three size symbols. Every symbol in
/// use occurs in some variable's type.
pub fn schema(rng: &mut TestRng) -> Schema {
    let nsym = rng.gen_range(1..=SYMBOLS.len());
    let symbols = &SYMBOLS[..nsym];
    let nvars = rng.gen_range(1..=3);
    let mut s = Schema::new();
    for (k, v) in VARS.iter().take(nvars).enumerate() {
        let rows = if k == 0 {
            size_term(symbols[0])
        } else {
            random_term(rng, symbols)
        };
        s.insert(*v, MatrixType::new(rows, random_term(rng, symbols)));
    }
    s
}

pub fn sizes(rng: &mut TestRng, schema: &Schema, max_dim: usize) -> SizeAssignment {
    let mut sigma = SizeAssignment::new();
    for sym in schema.symbols() {
        sigma.set(sym, rng.gen_range(1..=max_dim));
    }
    sigma
}

pub fn rational_entry(rng: &mut TestRng) -> GaussRat {
    let p = rng.gen_range(-4..=4);
    let q = *[1, 1, 1, 2, 3].choose(rng).expect("nonempty");
    GaussRat::ratio(p, q)
}

pub fn entry(rng: &mut TestRng, complex_prob: f64) -> GaussRat {
    let re = rational_entry(rng);
    if rng.gen_bool(complex_prob) {
        let im = rational_entry(rng);
        GaussRat::new(re.re, im.re)
    } else {
        re
    }
}

pub fn matrix(rng: &mut TestRng, rows: usize, cols: usize, complex_prob: f64) -> Matrix<GaussRat> {
    Matrix::from_fn(rows, cols, |_, _| entry(rng, complex_prob))
}

/// A random instance conforming to `schema` under `sigma`.
pub fn instance(
    rng: &mut TestRng,
    schema: &Schema,
    sigma: &SizeAssignment,
    complex_prob: f64,
) -> Instance<GaussRat> {
    let mut inst = Instance::new();
    for (name, ty) in schema.iter() {
        let (r, c) = sigma.dims(ty).expect("sigma covers the schema");
        inst.insert(name.clone(), matrix(rng, r, c, complex_prob));
    }
    inst
}

struct ProgramGen<'a> {
    cfg: &'a GenConfig,
    scope: Vec<(String, MatrixType)>,
    terms: Vec<SizeTerm>,
    taken: BTreeSet<String>,
}

impl ProgramGen<'_> {
    fn fresh(&mut self, stem: &str) -> String {
        let mut k = 1;
        loop {
            let name = format!("{stem}{k}");
            if self.taken.insert(name.clone()) {
                return name;
            }
            k += 1;
        }
    }

    fn pick_term(&self, rng: &mut TestRng) -> SizeTerm {
        self.terms.choose(rng).expect("nonempty").clone()
    }

    /// Columns of ones with `r` rows, built from what is in scope.
    fn ones_columns(&self, r: &SizeTerm) -> Vec<Expr> {
        let mut out = Vec::new();
        for (name, ty) in &self.scope {
            if &ty.rows == r {
                out.push(Expr::var(name).ones());
            }
            if &ty.cols == r {
                out.push(Expr::var(name).transpose().ones());
            }
            if r.is_one() {
                out.push(Expr::var(name).ones().transpose().ones());
            }
        }
        out
    }

    /// A variable of type `t` if one fits in `budget`, otherwise a ones
    /// matrix of that shape, as shallow as possible.
    fn leaf(&self, rng: &mut TestRng, t: &MatrixType, budget: usize) -> Expr {
        let mut direct = Vec::new();
        for (name, ty) in &self.scope {
            if ty == t {
                direct.push(Expr::var(name));
            }
            if ty.transposed() == *t && ty != t {
                direct.push(Expr::var(name).transpose());
            }
        }
        direct.retain(|e| e.depth() <= budget);
        if let Some(e) = direct.choose(rng) {
            if rng.gen_bool(0.85) {
                return e.clone();
            }
        }
        let rows = self.ones_columns(&t.rows);
        let mut built: Vec<Expr> = if t.cols.is_one() {
            rows
        } else {
            let cols = self.ones_columns(&t.cols);
            rows.iter()
                .flat_map(|r| cols.iter().map(move |c| r.clone().mul(c.clone().transpose())))
                .collect()
        };
        built.extend(direct);
        let fitting: Vec<&Expr> = built.iter().filter(|e| e.depth() <= budget).collect();
        match fitting.choose(rng) {
            Some(e) => (*e).clone(),
            None => built
                .into_iter()
                .min_by_key(Expr::depth)
                .expect("every size term occurs in scope"),
        }
    }

    fn gen(&mut self, rng: &mut TestRng, t: &MatrixType, budget: usize) -> Expr {
        for _ in 0..8 {
            let e = self.node(rng, t, budget);
            if e.depth() <= budget {
                return e;
            }
        }
        self.leaf(rng, t, budget)
    }

    fn node(&mut self, rng: &mut TestRng, t: &MatrixType, budget: usize) -> Expr {
        if budget <= 1 || rng.gen_bool(0.1) {
            return self.leaf(rng, t, budget);
        }
        let b = budget - 1;
        let square = t.rows == t.cols;
        let eigen_first =
            self.cfg.eigen == EigenMode::SelfAdjointValues && b >= 2 && rng.gen_bool(0.2);
        loop {
            let choice = if eigen_first { 10 } else { rng.gen_range(0..12) };
            match choice {
                0 => return self.gen(rng, &t.transposed(), b).transpose(),
                1 | 2 => {
                    let k = self.pick_term(rng);
                    let l = self.gen(rng, &MatrixType::new(t.rows.clone(), k.clone()), b);
                    let r = self.gen(rng, &MatrixType::new(k, t.cols.clone()), b);
                    return l.mul(r);
                }
                3 | 4 if !self.cfg.functions.is_empty() => {
                    let f = self.cfg.functions.choose(rng).expect("nonempty").clone();
                    let arity = matlang::builtins::arity(&f).expect("known builtin");
                    let args = (0..arity).map(|_| self.gen(rng, t, b)).collect();
                    return Expr::apply(f, args);
                }
                5 if t.cols.is_one() => {
                    let c = self.pick_term(rng);
                    return self.gen(rng, &MatrixType::new(t.rows.clone(), c), b).ones();
                }
                6 if square => {
                    let col = MatrixType::new(t.rows.clone(), SizeTerm::One);
                    return self.gen(rng, &col, b).diag();
                }
                7 if b >= 2 => {
                    let bound_ty = MatrixType::new(self.pick_term(rng), self.pick_term(rng));
                    let bound = self.gen(rng, &bound_ty, b);
                    let name = self.fresh("X");
                    self.scope.push((name.clone(), bound_ty));
                    let body = self.gen(rng, t, b);
                    self.scope.pop();
                    return Expr::let_in(name, bound, body);
                }
                8 if square && self.cfg.allow_inv => {
                    return self.gen(rng, t, b).inv();
                }
                9 if square && self.cfg.eigen == EigenMode::Raw => {
                    return self.gen(rng, t, b).eigen();
                }
                10 if self.cfg.eigen == EigenMode::SelfAdjointValues && b >= 2 => {
                    let s = self.pick_term(rng);
                    let arg = if rng.gen_bool(0.5) {
                        let x = self.gen(rng, &MatrixType::new(s.clone(), s.clone()), b - 1);
                        Expr::apply("add", vec![x.clone(), x.transpose()])
                    } else {
                        let k = self.pick_term(rng);
                        let x = self.gen(rng, &MatrixType::new(s.clone(), k), b - 1);
                        x.clone().mul(x.transpose())
                    };
                    let basis = self.fresh("E");
                    let values = self.fresh("L");
                    self.scope.push((values.clone(), MatrixType::new(s.clone(), s)));
                    let body = self.gen(rng, t, b);
                    self.scope.pop();
                    return Expr::eigen_pair(basis, values, arg, body);
                }
                11 => return self.leaf(rng, t, budget),
                _ => {}
            }
        }
    }
}

/// A random program over `schema` whose type is drawn from the schema's
/// size terms, with depth at most `cfg.max_depth`.
pub fn program(rng: &mut TestRng, schema: &Schema, cfg: &GenConfig) -> Expr {
    let mut terms: Vec<SizeTerm> = schema.symbols().into_iter().map(SizeTerm::Symbol).collect();
    terms.push(SizeTerm::One);
    let scope: Vec<(String, MatrixType)> =
        schema.iter().map(|(n, t)| (n.clone(), t.clone())).collect();
    let mut taken: BTreeSet<String> = schema.names().cloned().collect();
    taken.extend(cfg.functions.iter().cloned());
    let mut g = ProgramGen {
        cfg,
        scope,
        terms,
        taken,
    };
    loop {
        let t = MatrixType::new(g.pick_term(rng), g.pick_term(rng));
        let e = g.gen(rng, &t, cfg.max_depth);
        if e.depth() <= cfg.max_depth {
            return e;
        }
    }
}

/// A random 0/1 relation on `{1..n}`.
pub fn relation(rng: &mut TestRng, n: usize, p: f64) -> BTreeSet<(usize, usize)> {
    (1..=n)
        .flat_map(|i| (1..=n).map(move |j| (i, j)))
        .filter(|_| rng.gen_bool(p))
        .collect()
}

/// Random digraph as a boolean adjacency matrix (0-based).
pub fn digraph(rng: &mut TestRng, n: usize, p: f64) -> Vec<Vec<bool>> {
    (0..n).map(|_| (0..n).map(|_| rng.gen_bool(p)).collect()).collect()
}

/// Random simple undirected graph: symmetric, no self-loops.
pub fn simple_graph(rng: &mut TestRng, n: usize, p: f64) -> Vec<Vec<bool>> {
    let mut a = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                a[i][j] = true;
                a[j][i] = true;
            }
        }
    }
    a
}

/// Digraph in which every node has an outgoing edge.
pub fn digraph_positive_outdegree(rng: &mut TestRng, n: usize, p: f64) -> Vec<Vec<bool>> {
    let mut a = digraph(rng, n, p);
    for (i, row) in a.iter_mut().enumerate() {
        if !row.iter().any(|&x| x) {
            let j = rng.gen_range(0..n);
            row[if j == i && n > 1 { (j + 1) % n } else { j }] = true;
        }
    }
    a
}

pub fn bool_matrix(adj: &[Vec<bool>]) -> Matrix<GaussRat> {
    Matrix::from_fn(adj.len(), adj.len(), |i, j| GaussRat::int(adj[i][j] as i64))
}

/// Random symmetric matrix with integer entries in `-5..=5`.
pub fn symmetric_integer(rng: &mut TestRng, n: usize) -> Vec<Vec<i64>> {
    let mut a = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = rng.gen_range(-5..=5);
            a[i][j] = v;
            a[j][i] = v;
        }
    }
    a
}

/// Symmetric integer matrix of prescribed rank: a sum of `rank` outer
/// products `s v vᵀ` with small integer `v`. The rank is an upper bound.
pub fn symmetric_low_rank(rng: &mut TestRng, n: usize, rank: usize) -> Vec<Vec<i64>> {
    let mut a = vec![vec![0i64; n]; n];
    for _ in 0..rank {
        let v: Vec<i64> = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
        let s = if rng.gen_bool(0.5) { 1 } else { -1 };
        for i in 0..n {
            for j in 0..n {
                a[i][j] += s * v[i] * v[j];
            }
        }
    }
    a
}

/// Real matrix with entries in tenths, made strictly diagonally dominant
/// and then row-permuted, so it is invertible with a modest condition
/// number.
pub fn well_conditioned(rng: &mut TestRng, n: usize) -> Matrix<GaussRat> {
    let mut rows: Vec<Vec<GaussRat>> = (0..n)
        .map(|i| {
            let off: Vec<i64> = (0..n).map(|_| rng.gen_range(-10..=10)).collect();
            let dominant: i64 = off.iter().map(|x| x.abs()).sum::<i64>() + rng.gen_range(5..=15);
            (0..n)
                .map(|j| {
                    let v = if i == j {
                        dominant * if rng.gen_bool(0.5) { 1 } else { -1 }
                    } else {
                        off[j]
                    };
                    GaussRat::ratio(v, 10)
                })
                .collect()
        })
        .collect();
    rows.shuffle(rng);
    Matrix::from_rows(rows)
}

pub fn int_matrix(a: &[Vec<i64>]) -> Matrix<GaussRat> {
    Matrix::from_fn(a.len(), a.first().map_or(0, Vec::len), |i, j| GaussRat::int(a[i][j]))
}

/// Random relation-algebra expression over the given names, depth at most
/// `max_depth`.
pub fn binrel_expr(rng: &mut TestRng, names: &[&str], max_depth: usize) -> BinRelExpr {
    if max_depth <= 1 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..8) {
            0 => BinRelExpr::All,
            1 => BinRelExpr::Identity,
            _ => BinRelExpr::var(*names.choose(rng).expect("nonempty")),
        };
    }
    let d = max_depth - 1;
    match rng.gen_range(0..4) {
        0 => binrel_expr(rng, names, d).union(binrel_expr(rng, names, d)),
        1 => binrel_expr(rng, names, d).minus(binrel_expr(rng, names, d)),
        2 => binrel_expr(rng, names, d).converse(),
        _ => binrel_expr(rng, names, d).compose(binrel_expr(rng, names, d)),
    }
}

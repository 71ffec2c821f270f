//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use matlang::binrel::{adj_decode, adj_encode, compile, graph_schema, GraphInstance};
use matlang::corpus;
use matlang::eigen::{eigen_canonical, verify_eigen};
use matlang::eval::{eigenvalues_by_similarity, eigenvalues_from_basis};
use matlang::io::{parse_matrix_csv, write_matrix_csv};
use matlang::reals::{
    emit_formula, encode_assignment, ground_check, output_var, parse_script, GroundOptions,
    InputSizedExpr,
};
use matlang::relalg::{rel_decode, rel_encode, rel_schema, eval_rel, translate};
use matlang::scalar::GaussRat;
use matlang::{
    eval, parse, parse_schema, typecheck, EvalConfig, Expr, Instance, Matrix, Scalar, Schema,
    SizeAssignment,
};
use matlang_testkit::gen::{self, EigenMode, GenConfig};
use matlang_testkit::oracles;
use matlang_testkit::suite;
use num::complex::Complex64;
use rand::Rng;
use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

type Outcome = Result<String, String>;
/// (schema, program, instance bindings, expected CSV)
type OpCase<'a> = (&'a str, &'a str, Vec<(&'a str, &'a str)>, &'a str);
type Criterion = (&'static str, &'static str, fn() -> Outcome);

fn exact_csv(text: &str) -> Matrix<GaussRat> {
    parse_matrix_csv(text, "golden").expect("golden matrix parses")
}

/// The five displayed operations, exact tower, compared as CSV text.
fn basic_operations() -> Outcome {
    let cases: [OpCase; 5] = [
        (
            "M : a x b",
            "M^*",
            vec![("M", "3,2\n0,1+i\n2,3-i\n4+4i,5\n")],
            "2,3\n0,2,4-4i\n1-i,3+i,5\n",
        ),
        (
            "M : a x b",
            "ones(M)",
            vec![("M", "2,3\n2,3,4\n4,5,6\n")],
            "2,1\n1\n1\n",
        ),
        (
            "A : a x b\nB : b x c",
            "A . B",
            vec![("A", "3,2\n1,2\n3,4\n5,6\n"), ("B", "2,4\n6,5,4,3\n2,1,0,-1\n")],
            "3,4\n10,7,4,1\n26,19,12,5\n42,31,20,9\n",
        ),
        ("v : a x 1", "diag(v)", vec![("v", "2,1\n6\n7\n")], "2,2\n6,0\n0,7\n"),
        (
            "A : a x b\nB : a x b",
            "apply[monus](A, B)",
            vec![
                ("A", "3,3\n1,1,1\n0,1,1\n0,0,0\n"),
                ("B", "3,3\n0,0,1\n0,1,0\n1,0,1\n"),
            ],
            "3,3\n1,1,0\n0,0,1\n0,0,0\n",
        ),
    ];
    for (schema, src, inputs, want) in cases {
        let schema = parse_schema(schema).map_err(|e| e.to_string())?;
        let e = parse(src).map_err(|e| e.to_string())?;
        typecheck(&schema, &e).map_err(|e| e.to_string())?;
        let inst = Instance::from_pairs(inputs.into_iter().map(|(n, t)| (n, exact_csv(t))));
        let out = eval(&inst, &e, &EvalConfig::exact()).map_err(|e| e.to_string())?;
        let got = write_matrix_csv(&out);
        if got != want {
            return Err(format!("`{src}` gave {got:?}, expected {want:?}"));
        }
    }
    Ok("5/5 byte-identical".into())
}

/// Relational pipeline against direct evaluation on random programs.
fn relational_equivalence() -> Outcome {
    let mut rng = gen::rng(0x7e1a);
    let cfg = GenConfig::exact(5, 4).with_complex(0.2);
    for k in 0..500 {
        let schema = gen::schema(&mut rng);
        let e = gen::program(&mut rng, &schema, &cfg);
        let sigma = gen::sizes(&mut rng, &schema, 4);
        let inst = gen::instance(&mut rng, &schema, &sigma, cfg.complex_prob);
        let direct = eval(&inst, &e, &EvalConfig::exact()).map_err(|err| format!("case {k}: {err}"))?;
        let plan = translate(&schema, &e).map_err(|err| format!("case {k}: {err}"))?;
        if plan.uses_difference() || plan.selects_on_numbers(&rel_schema(&schema)) {
            return Err(format!("case {k}: plan uses difference or a numerical selection"));
        }
        let rel = eval_rel(&rel_encode(&inst, &schema), &plan, 0.0)
            .map_err(|err| format!("case {k}: {err}"))?;
        let ty = typecheck(&schema, &e).map_err(|err| err.to_string())?;
        let decoded = rel_decode(&rel, &ty, &sigma).map_err(|err| format!("case {k}: {err}"))?;
        if decoded != direct {
            return Err(format!("case {k}: relational result differs for {e:?}"));
        }
    }
    Ok("500/500 equal, plans difference-free".into())
}

/// Compiled relation-algebra expressions against set semantics.
fn binrel_corpus() -> Outcome {
    let mut rng = gen::rng(0xb1e1);
    let names = ["R", "S"];
    let schema = graph_schema(names, "a");
    for k in 0..300 {
        let n = rng.gen_range(1..=6);
        let e = gen::binrel_expr(&mut rng, &names, 5);
        let rels: BTreeMap<String, _> = names
            .iter()
            .map(|v| {
                let p = rng.gen_range(0.1..0.6);
                (v.to_string(), gen::relation(&mut rng, n, p))
            })
            .collect();
        let want = oracles::binrel_semantics(n, &rels, &e);
        let gi = GraphInstance::new(n, rels);
        let compiled = compile(&schema, &e).map_err(|err| format!("case {k}: {err}"))?;
        let out = eval(&adj_encode::<GaussRat>(&gi), &compiled, &EvalConfig::exact())
            .map_err(|err| format!("case {k}: {err}"))?;
        let got = adj_decode(&out, 0.0).map_err(|err| format!("case {k}: {err}"))?;
        if got != want {
            return Err(format!("case {k}: {e:?} decoded to {got:?}, expected {want:?}"));
        }
    }
    Ok("300/300 equal".into())
}

fn corpus_checks(programs: &[(corpus::NamedProgram, usize)], seed: u64) -> Outcome {
    let mut summary = Vec::new();
    for (k, (p, cases)) in programs.iter().enumerate() {
        let r = suite::check_program(p, seed + k as u64, *cases);
        if !r.ok() {
            return Err(format!("{}: {}", r.name, r.failures.join("; ")));
        }
        summary.push(format!("{} {}/{}", r.name, r.passed, r.cases));
    }
    Ok(summary.join(", "))
}

fn graph_examples() -> Outcome {
    corpus_checks(
        &[
            (corpus::transitive_closure(false), 200),
            (corpus::transitive_closure(true), 200),
            (corpus::pagerank("0.85"), 200),
            (corpus::bipartiteness(), 200),
            (corpus::connected_components(), 200),
        ],
        0x4a11,
    )
}

fn random_real_symmetric(rng: &mut gen::TestRng) -> Matrix<Complex64> {
    let n = rng.gen_range(1..=6);
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let x = gen::rational_entry(rng).to_c64();
            m.set(i, j, x);
            m.set(j, i, x);
        }
    }
    m
}

fn eigen_examples() -> Outcome {
    let cfg = EvalConfig::float();
    let mut rng = gen::rng(0xe1e1);
    let mut worst = 0.0f64;
    for k in 0..200 {
        let a = random_real_symmetric(&mut rng);
        let b = eigen_canonical(&a, cfg.eps, cfg.delta);
        if !verify_eigen(&a, &b, cfg.eps, cfg.delta).map_err(|e| e.to_string())? {
            return Err(format!("case {k}: canonical basis rejected for\n{a}"));
        }
        let via_division = eigenvalues_from_basis(&a, &b, &cfg).map_err(|e| format!("case {k}: {e}"))?;
        let via_similarity = eigenvalues_by_similarity(&a, &b, &cfg).map_err(|e| format!("case {k}: {e}"))?;
        let d = via_division.max_abs_diff(&via_similarity);
        worst = worst.max(d);
        if d > 1e-6 {
            return Err(format!("case {k}: eigenvalue routes differ by {d:e}"));
        }
    }
    let jordan = Instance::new().with("M", Matrix::<Complex64>::from_i64(&[&[0, 1], &[0, 0]]));
    let z = eval(&jordan, &parse("eigen(M)").expect("parses"), &cfg).map_err(|e| e.to_string())?;
    if !z.is_zero_tol(0.0) {
        return Err(format!("eigen of the Jordan block gave\n{z}"));
    }
    let rank = corpus_checks(&[(corpus::rank_expr(), 200)], 0x5a5a)?;
    Ok(format!("200 bases verified, route gap {worst:.1e}, Jordan block -> 0, {rank}"))
}

fn singular_inputs(rng: &mut gen::TestRng) -> Vec<Matrix<GaussRat>> {
    let mut out = vec![
        Matrix::from_i64(&[&[0]]),
        Matrix::from_i64(&[&[1, 2], &[2, 4]]),
        Matrix::zeros(3, 3),
        Matrix::from_i64(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]]),
    ];
    for _ in 0..16 {
        let n = rng.gen_range(2..=5);
        let r = rng.gen_range(0..n);
        out.push(gen::int_matrix(&gen::symmetric_low_rank(rng, n, r)));
    }
    out
}

fn inversion_via_eigen() -> Outcome {
    let p = corpus::inv_via_eigen();
    let builtin = parse("inv(A)").expect("parses");
    let cfg = EvalConfig::float();
    let mut rng = gen::rng(0x1a1a);
    let mut worst = 0.0f64;
    for k in 0..100 {
        let n = rng.gen_range(1..=5);
        let a = gen::well_conditioned(&mut rng, n).to_c64();
        let inst = Instance::new().with("A", a);
        let c = eval(&inst, &p.expr, &cfg).map_err(|e| format!("case {k}: {e}"))?;
        let i = eval(&inst, &builtin, &cfg).map_err(|e| format!("case {k}: {e}"))?;
        let d = c.max_abs_diff(&i);
        worst = worst.max(d);
        if d > 1e-6 {
            return Err(format!("case {k}: deviation {d:e}"));
        }
    }
    let singular = singular_inputs(&mut rng);
    for (k, s) in singular.iter().enumerate() {
        let exact = Instance::new().with("A", s.clone());
        if !eval(&exact, &builtin, &EvalConfig::exact()).map_err(|e| e.to_string())?.is_zero_tol(0.0) {
            return Err(format!("singular case {k}: exact inv is nonzero"));
        }
        let inst = exact.to_c64();
        for e in [&p.expr, &builtin] {
            let out = eval(&inst, e, &cfg).map_err(|err| err.to_string())?;
            if !out.is_zero_tol(0.0) {
                return Err(format!("singular case {k}: nonzero output\n{out}"));
            }
        }
    }
    Ok(format!("100 matrices, max deviation {worst:.1e}; {} singular inputs -> 0", singular.len()))
}

/// Size bound constant measured on the random corpus below and on the
/// standard library; the check is a regression guard.
const SIZE_CONSTANT: f64 = 60.0;

fn perturbed<T: Scalar>(rho: &matlang::reals::Assignment<T>, var: &str) -> matlang::reals::Assignment<T> {
    let mut r = rho.clone();
    let v = r.get(var).expect("output variable assigned").add(&T::one());
    r.insert(var.to_string(), v);
    r
}

#[allow(clippy::too_many_arguments)]
fn check_formula<T: Scalar>(
    k: usize,
    schema: &Schema,
    e: &Expr,
    sigma: &SizeAssignment,
    inst: &Instance<T>,
    cfg: &EvalConfig,
    opts: &GroundOptions,
    worst: &mut f64,
) -> Result<(), String> {
    let out = eval(inst, e, cfg).map_err(|err| format!("case {k}: {err}"))?;
    let ise = InputSizedExpr::new(schema.clone(), e.clone(), sigma.clone());
    let psi = emit_formula(&ise).map_err(|err| format!("case {k}: {err}"))?;
    let dim = sigma.iter().map(|(_, d)| d).max().unwrap_or(1).max(1) as f64;
    let ratio = psi.node_count() as f64 / (e.size() as f64 * dim.powi(6));
    *worst = worst.max(ratio);
    if ratio > SIZE_CONSTANT {
        return Err(format!("case {k}: formula size ratio {ratio:.2} exceeds {SIZE_CONSTANT}"));
    }
    let rho = encode_assignment(inst, &out);
    if !ground_check(&psi, &rho, opts).map_err(|err| format!("case {k}: {err}"))? {
        return Err(format!("case {k}: true output rejected for {e:?}"));
    }
    for i in 1..=out.rows() {
        for j in 1..=out.cols() {
            let var = output_var(i, j, false);
            if ground_check(&psi, &perturbed(&rho, &var), opts).map_err(|err| err.to_string())? {
                return Err(format!("case {k}: perturbing {var} still accepted for {e:?}"));
            }
        }
    }
    Ok(())
}

fn golden_scripts() -> Result<usize, String> {
    for (name, schema, src, sigma) in common::GOLDEN {
        let text = common::emit_script(schema, src, sigma)?;
        let path = common::golden_dir().join(format!("{name}.smt2"));
        let want = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        if text != want {
            return Err(format!("{name}.smt2 differs from the emitted script"));
        }
        parse_script(&text).map_err(|e| format!("{name}.smt2: {e}"))?;
    }
    Ok(common::GOLDEN.len())
}

fn real_arithmetic() -> Outcome {
    let mut rng = gen::rng(0x5e75);
    let exact_cfg = GenConfig::exact(4, 3).with_inv().with_complex(0.2);
    let eigen_cfg = GenConfig::exact(5, 3).with_inv().with_eigen(EigenMode::SelfAdjointValues);
    let mut worst = 0.0f64;
    let (mut exact_cases, mut eigen_cases) = (0, 0);
    let mut k = 0;
    while exact_cases + eigen_cases < 200 {
        let schema = gen::schema(&mut rng);
        let sigma = gen::sizes(&mut rng, &schema, 3);
        if k % 4 == 3 {
            let e = loop {
                let e = gen::program(&mut rng, &schema, &eigen_cfg);
                if e.uses_eigen() {
                    break e;
                }
            };
            let inst = gen::instance(&mut rng, &schema, &sigma, 0.0).to_c64();
            check_formula(k, &schema, &e, &sigma, &inst, &EvalConfig::float(), &GroundOptions::approx(1e-9), &mut worst)?;
            eigen_cases += 1;
        } else {
            let e = gen::program(&mut rng, &schema, &exact_cfg);
            let inst = gen::instance(&mut rng, &schema, &sigma, exact_cfg.complex_prob);
            check_formula(k, &schema, &e, &sigma, &inst, &EvalConfig::exact(), &GroundOptions::exact(), &mut worst)?;
            exact_cases += 1;
        }
        k += 1;
    }
    for p in corpus::all() {
        let sigma = SizeAssignment::new().with("a", 2).with("b", 2);
        let ise = InputSizedExpr::new(p.schema.clone(), p.expr.clone(), sigma);
        let psi = emit_formula(&ise).map_err(|e| format!("{}: {e}", p.name))?;
        let ratio = psi.node_count() as f64 / (p.expr.size() as f64 * 64.0);
        worst = worst.max(ratio);
        if ratio > SIZE_CONSTANT {
            return Err(format!("{}: size ratio {ratio:.2} exceeds {SIZE_CONSTANT}", p.name));
        }
    }
    let goldens = golden_scripts()?;
    Ok(format!(
        "{exact_cases} exact + {eigen_cases} eigen programs sound and perturbation-complete, \
         {goldens} golden scripts, size ratio {worst:.2} <= {SIZE_CONSTANT}"
    ))
}

fn safety() -> Outcome {
    let mut rng = gen::rng(0x5afe);
    let cfg = GenConfig::exact(6, 4)
        .with_inv()
        .with_eigen(EigenMode::Raw)
        .with_complex(0.3);
    for k in 0..1000 {
        let schema = gen::schema(&mut rng);
        let e = gen::program(&mut rng, &schema, &cfg);
        let sigma = gen::sizes(&mut rng, &schema, 4);
        let inst = gen::instance(&mut rng, &schema, &sigma, cfg.complex_prob);
        eval(&inst.to_c64(), &e, &EvalConfig::float()).map_err(|err| format!("case {k}: {err}"))?;
        if !e.uses_eigen() {
            eval(&inst, &e, &EvalConfig::exact()).map_err(|err| format!("case {k}: {err}"))?;
        }
    }
    Ok("1000 programs evaluated without getting stuck".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1", "basic operations reproduce the displayed results [exact]", basic_operations),
        ("2", "relational translation equals direct evaluation [exact]", relational_equivalence),
        ("3", "relation algebra compiles to matching matrices [exact]", binrel_corpus),
        ("4", "graph programs match Warshall, power iteration, BFS, union-find [exact / 1e-6]", graph_examples),
        ("5", "eigen bases verify, value routes agree, rank matches [1e-6]", eigen_examples),
        ("6", "inversion through eigen matches builtin inv [1e-6]", inversion_via_eigen),
        ("7", "real-arithmetic formulas: soundness, completeness spot check, SMT-LIB, size [exact / 1e-9]", real_arithmetic),
        ("8", "typed programs never get stuck", safety),
    ];
    let mut failed = 0;
    for (id, label, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {id} {label}: {detail} ({secs:.1}s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {id} {label}: {detail} ({secs:.1}s)");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

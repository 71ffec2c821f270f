use super::{Command, Common, TowerFlag};
use anyhow::{anyhow, Context};
use matlang::binrel::{compile, graph_schema, parse_binrel};
use matlang::eigen::verify_eigen;
use matlang::io::{read_instance, read_matrix_csv, write_matrix_csv};
use matlang::reals::{
    emit_formula, emit_partial_evaluation, parse_constraint, serialize_smtlib, InputSizedExpr,
};
use matlang::relalg::{eval_rel, rel_decode, rel_encode, translate};
use matlang::{
    builtins, check_conformance, eval, parse, parse_schema, typecheck, EvalConfig, Expr,
    Instance, Schema, SizeAssignment, Tower,
};
use matlang::scalar::GaussRat;
use matlang_testkit::suite;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

pub enum Failure {
    Usage(String),
    Domain(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Domain(e)
    }
}

type Outcome = Result<ExitCode, Failure>;

fn existing(path: &Option<PathBuf>, what: &str) -> Result<PathBuf, Failure> {
    let p = path
        .clone()
        .ok_or_else(|| Failure::Usage(format!("missing {what}")))?;
    ensure_exists(&p)?;
    Ok(p)
}

fn ensure_exists(p: &Path) -> Result<(), Failure> {
    if p.exists() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("{} does not exist", p.display())))
    }
}

fn read_text(p: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))
}

fn emit(output: &Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    match output {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_program(c: &Common) -> Result<Expr, Failure> {
    let p = existing(&c.program, "--program")?;
    let src = read_text(&p)?;
    Ok(parse(&src).with_context(|| p.display().to_string())?)
}

fn load_schema(c: &Common) -> Result<Schema, Failure> {
    let path = match (&c.schema, &c.program) {
        (Some(s), _) => s.clone(),
        (None, Some(p)) => p.with_extension("mts"),
        (None, None) => return Err(Failure::Usage("missing --schema".into())),
    };
    ensure_exists(&path)?;
    let src = read_text(&path)?;
    Ok(parse_schema(&src).with_context(|| path.display().to_string())?)
}

fn load_instance(c: &Common, schema: &Schema) -> Result<(Instance<GaussRat>, SizeAssignment), Failure> {
    let p = existing(&c.instance, "--instance")?;
    let inst = read_instance(&p).map_err(anyhow::Error::from)?;
    let sigma = check_conformance(schema, &inst).map_err(|e| anyhow!("{e}"))?;
    Ok((inst, sigma))
}

fn config(c: &Common, e: &Expr) -> EvalConfig {
    let needs_float = e.uses_eigen() || e.function_names().iter().any(|f| !builtins::is_exact(f));
    let tower = match c.tower {
        TowerFlag::Exact => Tower::Exact,
        TowerFlag::Float => Tower::Float,
        TowerFlag::Auto if needs_float => Tower::Float,
        TowerFlag::Auto => Tower::Exact,
    };
    let mut cfg = EvalConfig {
        tower,
        ..EvalConfig::default()
    }
    .with_env();
    if let Some(eps) = c.eps {
        cfg.eps = eps;
    }
    if let Some(delta) = c.delta {
        cfg.delta = delta;
    }
    cfg
}

fn typed(c: &Common) -> Result<(Schema, Expr), Failure> {
    let schema = load_schema(c)?;
    let e = load_program(c)?;
    typecheck(&schema, &e).map_err(|err| anyhow!("{err}"))?;
    Ok((schema, e))
}

pub fn dispatch(cmd: Command) -> Outcome {
    match cmd {
        Command::Parse(c) => {
            let e = load_program(&c)?;
            emit(&c.output, &format!("{e:#?}\n"))?;
        }
        Command::Typecheck(c) => {
            let schema = load_schema(&c)?;
            let e = load_program(&c)?;
            let ty = typecheck(&schema, &e).map_err(|err| anyhow!("{err}"))?;
            emit(&c.output, &format!("{ty}\n"))?;
        }
        Command::Eval(c) => {
            let (schema, e) = typed(&c)?;
            let (inst, _) = load_instance(&c, &schema)?;
            let cfg = config(&c, &e);
            let text = match cfg.tower {
                Tower::Exact => write_matrix_csv(&eval(&inst, &e, &cfg).map_err(|err| anyhow!("{err}"))?),
                Tower::Float => {
                    write_matrix_csv(&eval(&inst.to_c64(), &e, &cfg).map_err(|err| anyhow!("{err}"))?)
                }
            };
            emit(&c.output, &text)?;
        }
        Command::TranslateRel(c) => {
            let (schema, e) = typed(&c)?;
            let plan = translate(&schema, &e).map_err(|err| anyhow!("{err}"))?;
            emit(&c.output, &format!("{plan}\n"))?;
        }
        Command::EvalRel { common: c, decode } => {
            let (schema, e) = typed(&c)?;
            let (inst, sigma) = load_instance(&c, &schema)?;
            let plan = translate(&schema, &e).map_err(|err| anyhow!("{err}"))?;
            let rel = eval_rel(&rel_encode(&inst, &schema), &plan, 0.0).map_err(|err| anyhow!("{err}"))?;
            let text = if decode {
                let ty = typecheck(&schema, &e).map_err(|err| anyhow!("{err}"))?;
                write_matrix_csv(&rel_decode(&rel, &ty, &sigma).map_err(|err| anyhow!("{err}"))?)
            } else {
                rel.to_string()
            };
            emit(&c.output, &text)?;
        }
        Command::CompileBinrel {
            expr,
            file,
            schema_out,
            output,
        } => {
            let src = match (expr, file) {
                (Some(s), _) => s,
                (None, Some(f)) => {
                    ensure_exists(&f)?;
                    read_text(&f)?
                }
                (None, None) => return Err(Failure::Usage("give --expr or --file".into())),
            };
            let e = parse_binrel(&src).map_err(|err| anyhow!("{err}"))?;
            let mut names: Vec<String> = e.vars().into_iter().collect();
            if names.is_empty() {
                names.push("R".into());
            }
            let schema = graph_schema(names.iter().map(String::as_str), "a");
            let program = compile(&schema, &e).map_err(|err| anyhow!("{err}"))?;
            if let Some(p) = schema_out {
                std::fs::write(&p, schema.to_string()).with_context(|| format!("writing {}", p.display()))?;
            }
            emit(&output, &format!("{}\n", matlang::pretty_print(&program)))?;
        }
        Command::EmitSmt { common: c, sigma, chi } => {
            let (schema, e) = typed(&c)?;
            let sigma = SizeAssignment::parse(&sigma).map_err(Failure::Usage)?;
            let ise = InputSizedExpr::new(schema, e, sigma);
            let formula = match chi {
                Some(p) => {
                    ensure_exists(&p)?;
                    let chi = parse_constraint(&read_text(&p)?).with_context(|| p.display().to_string())?;
                    emit_partial_evaluation(&ise, &chi)
                }
                None => emit_formula(&ise),
            }
            .map_err(|err| anyhow!("{err}"))?;
            emit(&c.output, &serialize_smtlib(&formula))?;
        }
        Command::VerifyEigen {
            matrix,
            basis,
            eps,
            delta,
        } => {
            ensure_exists(&matrix)?;
            ensure_exists(&basis)?;
            let mut cfg = EvalConfig::float().with_env();
            cfg.eps = eps.unwrap_or(cfg.eps);
            cfg.delta = delta.unwrap_or(cfg.delta);
            let a = read_matrix_csv(&matrix).map_err(anyhow::Error::from)?.to_c64();
            let b = read_matrix_csv(&basis).map_err(anyhow::Error::from)?.to_c64();
            let ok = verify_eigen(&a, &b, cfg.eps, cfg.delta).map_err(|err| anyhow!("{err}"))?;
            if ok {
                println!("valid");
            } else {
                println!("invalid");
                return Ok(ExitCode::from(1));
            }
        }
        Command::RunCorpus { seed, cases, name } => {
            let programs: Vec<_> = matlang::corpus::all()
                .into_iter()
                .filter(|p| name.as_deref().is_none_or(|n| n == p.name))
                .collect();
            if programs.is_empty() {
                return Err(Failure::Usage(format!("no program named {}", name.unwrap_or_default())));
            }
            let reports: Vec<suite::ProgramReport> = std::thread::scope(|s| {
                let handles: Vec<_> = programs
                    .iter()
                    .enumerate()
                    .map(|(k, p)| s.spawn(move || suite::check_program(p, seed.wrapping_add(k as u64), cases)))
                    .collect();
                handles.into_iter().map(|h| h.join().expect("corpus worker panicked")).collect()
            });
            let mut failed = false;
            for r in &reports {
                println!("{:<4} {:<30} {}/{}", if r.ok() { "ok" } else { "FAIL" }, r.name, r.passed, r.cases);
                for f in r.failures.iter().take(3) {
                    println!("     {f}");
                }
                failed |= !r.ok();
            }
            if failed {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

//! Golden SMT-LIB cases shared by the integration tests.

#![allow(dead_code)]

use matlang::reals::{emit_formula, serialize_smtlib, InputSizedExpr};
use matlang::{parse, parse_schema, SizeAssignment};
use std::path::PathBuf;

/// `(file stem, schema, program, sizes)`.
pub const GOLDEN: &[(&str, &str, &str, &str)] = &[
    ("identity", "M : a x b", "M", "a=1,b=1"),
    ("product_1x1", "M : a x a\nN : a x a", "M . N", "a=1"),
    ("inv_2x2", "M : a x a", "inv(M)", "a=2"),
    ("eigen_1x1", "M : a x a", "eigen(M)", "a=1"),
    ("eigen_2x2", "M : a x a", "eigen(M)", "a=2"),
    ("le_matrix_3", "v : a x 1", "let V = v . ones(v)^* in apply[le](V, V^*) . ones(v)", "a=3"),
];

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub fn emit_script(schema: &str, src: &str, sigma: &str) -> Result<String, String> {
    let ise = InputSizedExpr::new(
        parse_schema(schema).map_err(|e| e.to_string())?,
        parse(src).map_err(|e| e.to_string())?,
        SizeAssignment::parse(sigma)?,
    );
    Ok(serialize_smtlib(&emit_formula(&ise).map_err(|e| e.to_string())?))
}

//! The `programs/` directory mirrors the built-in corpus. Run with
//! `UPDATE_PROGRAMS=1` to regenerate it.

use matlang::{parse, parse_schema};
use std::path::PathBuf;

fn programs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../programs")
}

#[test]
fn program_files_match_the_corpus() {
    let dir = programs_dir();
    let update = std::env::var_os("UPDATE_PROGRAMS").is_some();
    for p in matlang::corpus::all() {
        let mtl = dir.join(format!("{}.mtl", p.name));
        let mts = dir.join(format!("{}.mts", p.name));
        let src = format!("{}\n", p.source());
        let schema = format!("{}\n", p.schema.to_string().trim_end());
        if update {
            std::fs::write(&mtl, &src).unwrap();
            std::fs::write(&mts, &schema).unwrap();
        }
        let on_disk = std::fs::read_to_string(&mtl).unwrap_or_else(|e| panic!("{}: {e}", mtl.display()));
        assert_eq!(parse(&on_disk).unwrap(), p.expr, "{}", p.name);
        let on_disk = std::fs::read_to_string(&mts).unwrap();
        assert_eq!(parse_schema(&on_disk).unwrap(), p.schema, "{}", p.name);
    }
}

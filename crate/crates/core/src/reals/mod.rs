//! Existential formulas over the reals describing input/output pairs of
//! an input-sized expression, with SMT-LIB output and a witness-driven
//! ground checker.

mod emit;
mod formula;
mod ground;
mod smtlib;

pub use emit::{
    emit_formula, emit_partial_evaluation, fn_def, free_variables, input_dims, input_var,
    output_dims, output_var, EmitError, InputSizedExpr, SemiAlgebraicFnDef,
};
pub use formula::{CTerm, Formula, Grid, NodeOp, RealFormula, Term, Witness};
pub use ground::{encode_assignment, ground_check, Assignment, GroundError, GroundOptions};
pub use smtlib::{
    formula_to_smtlib, parse_constraint, parse_script, serialize_smtlib, Script, SmtParseError,
};

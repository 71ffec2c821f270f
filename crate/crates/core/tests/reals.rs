use matlang::reals::{
    emit_formula, emit_partial_evaluation, encode_assignment, free_variables, ground_check,
    output_var, parse_constraint, EmitError, GroundOptions, InputSizedExpr,
};
use matlang::scalar::GaussRat;
use matlang::{eval, parse, parse_schema, EvalConfig, Instance, Matrix, SizeAssignment};
use matlang_testkit::gen::{self, EigenMode, GenConfig};
use matlang_testkit::oracles;
use num::ToPrimitive;
use proptest::prelude::*;
use std::collections::BTreeSet;

fn ise(schema: &str, src: &str, sigma: &str) -> InputSizedExpr {
    InputSizedExpr::new(
        parse_schema(schema).unwrap(),
        parse(src).unwrap(),
        SizeAssignment::parse(sigma).unwrap(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    /// Free variables are exactly the input and output entries; every
    /// variable the body uses freely is among them.
    #[test]
    fn free_variable_hygiene(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let schema = gen::schema(&mut rng);
        let e = gen::program(&mut rng, &schema, &GenConfig::exact(4, 3).with_inv().with_eigen(EigenMode::Raw));
        let sigma = gen::sizes(&mut rng, &schema, 3);
        let input = InputSizedExpr::new(schema, e, sigma);
        let psi = emit_formula(&input).unwrap();
        prop_assert_eq!(&psi.free, &free_variables(&input).unwrap());
        let declared: BTreeSet<&String> = psi.free.iter().collect();
        prop_assert!(psi.body.free_vars().iter().all(|v| declared.contains(v)));
        let bound = psi.body.bound_vars();
        prop_assert!(bound.iter().all(|v| !declared.contains(v)));
    }

    /// Exact programs: the true output satisfies the formula and every
    /// single-entry +1 perturbation of it does not.
    #[test]
    fn exact_programs_are_sound_and_complete_on_samples(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let schema = gen::schema(&mut rng);
        let e = gen::program(&mut rng, &schema, &GenConfig::exact(4, 3).with_inv().with_complex(0.3));
        let sigma = gen::sizes(&mut rng, &schema, 3);
        let inst = gen::instance(&mut rng, &schema, &sigma, 0.3);
        let out = eval(&inst, &e, &EvalConfig::exact()).unwrap();
        let psi = emit_formula(&InputSizedExpr::new(schema, e, sigma)).unwrap();
        let rho = encode_assignment(&inst, &out);
        let opts = GroundOptions::exact();
        prop_assert!(ground_check(&psi, &rho, &opts).unwrap());
        for i in 1..=out.rows() {
            for j in 1..=out.cols() {
                for imag in [false, true] {
                    let v = output_var(i, j, imag);
                    let mut bumped = rho.clone();
                    let x = bumped[&v].clone();
                    bumped.insert(v, GaussRat::real(&x.re + num::BigRational::from_integer(1.into())));
                    prop_assert!(!ground_check(&psi, &bumped, &opts).unwrap());
                }
            }
        }
    }
}

#[test]
fn inverse_formula_against_reference_inverse() {
    let psi = emit_formula(&ise("M : a x a", "inv(M)", "a=2")).unwrap();
    let m = Matrix::<GaussRat>::from_i64(&[&[1, 2], &[3, 4]]);
    let inv = oracles::invert(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
    let y = Matrix::from_fn(2, 2, |i, j| {
        let x = inv[i][j];
        GaussRat::ratio((x * 2.0).round() as i64, 2)
    });
    let inst = Instance::new().with("M", m);
    let rho = encode_assignment(&inst, &y);
    assert!(ground_check(&psi, &rho, &GroundOptions::exact()).unwrap());
    let mut off = y.clone();
    off.set(0, 0, GaussRat::int(-1));
    let rho = encode_assignment(&inst, &off);
    assert!(!ground_check(&psi, &rho, &GroundOptions::exact()).unwrap());
}

#[test]
fn jordan_block_eigen_formula() {
    let psi = emit_formula(&ise("M : a x a", "eigen(M)", "a=2")).unwrap();
    let inst = Instance::new().with("M", Matrix::<GaussRat>::from_i64(&[&[0, 1], &[0, 0]])).to_c64();
    let opts = GroundOptions::approx(1e-6);
    let zero = Matrix::zeros(2, 2);
    assert!(ground_check(&psi, &encode_assignment(&inst, &zero), &opts).unwrap());
    let id = Matrix::identity(2);
    assert!(!ground_check(&psi, &encode_assignment(&inst, &id), &opts).unwrap());
}

#[test]
fn partial_evaluation_examples() {
    let input = ise("M : a x a", "inv(M)", "a=2");
    let pins = "(and (= x_M_1_1_re 2) (= x_M_1_2_re 1) (= x_M_2_1_re 1) (= x_M_2_2_re 1) \
                (= x_M_1_1_im 0) (= x_M_1_2_im 0) (= x_M_2_1_im 0) (= x_M_2_2_im 0) \
                (distinct y_1_1_re 0))";
    let chi = parse_constraint(pins).unwrap();
    let sentence = emit_partial_evaluation(&input, &chi).unwrap();
    assert!(sentence.free.is_empty());
    let direct = eval(
        &Instance::new().with("M", Matrix::<GaussRat>::from_i64(&[&[2, 1], &[1, 1]])),
        &input.expr,
        &EvalConfig::exact(),
    )
    .unwrap();
    let expected = direct[(0, 0)].re.to_f64().unwrap() != 0.0;
    let empty = Default::default();
    assert_eq!(ground_check::<GaussRat>(&sentence, &empty, &GroundOptions::exact()).unwrap(), expected);

    let identity = ise("M : a x b", "M", "a=1,b=1");
    let chi = parse_constraint("true").unwrap();
    let sentence = emit_partial_evaluation(&identity, &chi).unwrap();
    assert!(ground_check::<GaussRat>(&sentence, &empty, &GroundOptions::exact()).unwrap());

    let chi = parse_constraint("(and (= y_1_1_re 0) (= y_1_1_re 1))").unwrap();
    let sentence = emit_partial_evaluation(&identity, &chi).unwrap();
    assert!(!ground_check::<GaussRat>(&sentence, &empty, &GroundOptions::exact()).unwrap());

    let chi = parse_constraint("(= z 1)").unwrap();
    assert!(matches!(
        emit_partial_evaluation(&identity, &chi),
        Err(EmitError::FreeVariableEscape(_))
    ));
}

#[test]
fn unknown_function_is_rejected() {
    let e = emit_formula(&ise("M : a x a", "apply[nosuch](M)", "a=1"));
    assert!(e.is_err());
}

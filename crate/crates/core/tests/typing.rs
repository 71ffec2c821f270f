use matlang::eval::eval_unchecked;
use matlang::{
    eval, parse, parse_schema, typecheck, EvalConfig, EvalError, Schema, SizeAssignment,
    TypeErrorKind,
};
use matlang_testkit::gen::{self, GenConfig};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    /// Well-typed programs evaluate, and the result has the dimensions of
    /// the inferred type.
    #[test]
    fn typed_programs_evaluate_to_their_type(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let schema = gen::schema(&mut rng);
        let e = gen::program(&mut rng, &schema, &GenConfig::exact(5, 5).with_complex(0.3));
        let ty = typecheck(&schema, &e).unwrap();
        let sigma = gen::sizes(&mut rng, &schema, 5);
        let inst = gen::instance(&mut rng, &schema, &sigma, 0.3);
        let out = eval(&inst, &e, &EvalConfig::exact()).unwrap();
        prop_assert_eq!(Some(out.shape()), sigma.dims(&ty));
    }
}

/// Sizes that keep distinct symbols apart and away from 1.
fn separating_sizes(schema: &Schema) -> SizeAssignment {
    let mut sigma = SizeAssignment::new();
    for (k, s) in schema.symbols().into_iter().enumerate() {
        sigma.set(s, k + 2);
    }
    sigma
}

const ILL_TYPED: &[(&str, &str, TypeErrorKind)] = &[
    ("M : a x b\nN : c x b", "M . N", TypeErrorKind::MulDimMismatch),
    ("v : a x 1\nw : a x 1", "v . w", TypeErrorKind::MulDimMismatch),
    ("M : a x b", "diag(M)", TypeErrorKind::DiagOnNonVector),
    ("M : a x b", "diag(M^*)", TypeErrorKind::DiagOnNonVector),
    ("M : a x b", "apply[add](M, M^*)", TypeErrorKind::ApplyShapeMismatch),
    ("M : a x b\nv : a x 1", "apply[mul](M, v)", TypeErrorKind::ApplyShapeMismatch),
    ("M : a x b", "inv(M)", TypeErrorKind::InvNonSquare),
    ("M : a x b", "inv(ones(M))", TypeErrorKind::InvNonSquare),
    ("M : a x b", "eigen(M^* . ones(M))", TypeErrorKind::EigenNonSquare),
    ("M : a x b", "let (B, L) = eigen(M) in L", TypeErrorKind::EigenNonSquare),
    ("M : a x b", "let X = M in X . X", TypeErrorKind::MulDimMismatch),
    ("M : a x a\nN : b x b", "M . inv(N)", TypeErrorKind::MulDimMismatch),
    ("M : a x b", "N", TypeErrorKind::UnboundVariable),
    ("M : a x b", "let X = M in Y", TypeErrorKind::UnboundVariable),
    ("M : a x b", "apply[nosuch](M)", TypeErrorKind::UnknownFunction),
    ("M : a x b", "apply[add](M)", TypeErrorKind::ArityMismatch),
    ("M : a x b", "apply[const:3](M, M)", TypeErrorKind::ArityMismatch),
];

/// Every rejection is either static or witnessed by a conforming
/// instance on which evaluation gets stuck.
#[test]
fn rejections_are_witnessed_by_stuck_instances() {
    let mut rng = gen::rng(2);
    for (schema, src, kind) in ILL_TYPED {
        let schema = parse_schema(schema).unwrap();
        let e = parse(src).unwrap();
        let err = typecheck(&schema, &e).expect_err(src);
        assert_eq!(err.kind, *kind, "{src}");
        if kind.is_static_only() {
            continue;
        }
        let sigma = separating_sizes(&schema);
        let inst = gen::instance(&mut rng, &schema, &sigma, 0.0).to_c64();
        match eval_unchecked(&inst, &e, &EvalConfig::float()) {
            Err(EvalError::Stuck(_)) => {}
            other => panic!("`{src}` did not get stuck: {other:?}"),
        }
    }
}

#[test]
fn mismatch_from_the_typing_section() {
    let schema = parse_schema("M : a x b\nN : c x b").unwrap();
    let err = typecheck(&schema, &parse("M . N").unwrap()).unwrap_err();
    assert_eq!(err.kind, TypeErrorKind::MulDimMismatch);
    assert!(typecheck(&schema, &parse("M . N^*").unwrap()).is_ok());
}

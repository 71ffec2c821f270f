use matlang::relalg::{eval_rel, rel_decode, rel_encode, rel_schema, rel_type, translate};
use matlang::{eval, parse, parse_schema, typecheck, EvalConfig};
use matlang_testkit::gen::{self, GenConfig};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    /// Translating, running on the encoding and decoding gives the direct
    /// result exactly; the plan has no difference and selects only on
    /// index columns.
    #[test]
    fn translation_agrees_with_evaluation(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let schema = gen::schema(&mut rng);
        let e = gen::program(&mut rng, &schema, &GenConfig::exact(5, 4).with_complex(0.2));
        let sigma = gen::sizes(&mut rng, &schema, 4);
        let inst = gen::instance(&mut rng, &schema, &sigma, 0.2);
        let plan = translate(&schema, &e).unwrap();
        let rs = rel_schema(&schema);
        prop_assert!(!plan.uses_difference());
        prop_assert!(!plan.selects_on_numbers(&rs));
        let ty = typecheck(&schema, &e).unwrap();
        prop_assert_eq!(rel_type(&rs, &plan).unwrap(), matlang::relalg::encoding_type(&ty));
        let rel = eval_rel(&rel_encode(&inst, &schema), &plan, 0.0).unwrap();
        // Decoding fails unless the relation is grid-total.
        let decoded = rel_decode(&rel, &ty, &sigma).unwrap();
        prop_assert_eq!(decoded, eval(&inst, &e, &EvalConfig::exact()).unwrap());
    }
}

#[test]
fn inv_and_eigen_have_no_translation() {
    let schema = parse_schema("M : a x a").unwrap();
    for src in ["inv(M)", "eigen(M)", "let (B, L) = eigen(M) in L"] {
        assert!(translate(&schema, &parse(src).unwrap()).is_err(), "{src}");
    }
}

#[test]
fn mixed_type_classes() {
    let schema = parse_schema("M : a x b\nv : a x 1\nw : 1 x b\nc : 1 x 1").unwrap();
    let mut rng = gen::rng(5);
    for src in [
        "v^* . M",
        "M . w^*",
        "v . w",
        "w . w^*",
        "diag(v) . M",
        "apply[mul](c, v^* . v)",
        "let X = M . M^* in diag(X . v) . v",
        "ones(v)^* . v",
    ] {
        let e = parse(src).unwrap();
        let ty = typecheck(&schema, &e).unwrap();
        let sigma = gen::sizes(&mut rng, &schema, 4);
        let inst = gen::instance(&mut rng, &schema, &sigma, 0.3);
        let rel = eval_rel(&rel_encode(&inst, &schema), &translate(&schema, &e).unwrap(), 0.0).unwrap();
        assert_eq!(
            rel_decode(&rel, &ty, &sigma).unwrap(),
            eval(&inst, &e, &EvalConfig::exact()).unwrap(),
            "{src}"
        );
    }
}

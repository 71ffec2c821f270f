use matlang::corpus;
use matlang::eigen::{eigen_canonical, is_diagonalizable, verify_eigen};
use matlang::eval::{eval_batch, eval_batch_seq};
use matlang::linalg::invert;
use matlang::scalar::GaussRat;
use matlang::{eval, parse, EvalConfig, Instance, Matrix, Scalar};
use matlang_testkit::gen::{self, GenConfig};
use num::complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn c64(m: &Matrix<GaussRat>) -> Matrix<Complex64> {
    m.to_c64()
}

/// `P D P^-1` for a random integer `P` (retried until invertible) and an
/// integer diagonal `D` that may repeat values.
fn diagonalizable(rng: &mut gen::TestRng, n: usize) -> Matrix<GaussRat> {
    loop {
        let p = Matrix::from_fn(n, n, |_, _| GaussRat::int(rng.gen_range(-2..=2)));
        let pinv = invert(&p, 0.0);
        if pinv.is_zero_tol(0.0) {
            continue;
        }
        let d = Matrix::from_fn(n, n, |i, j| {
            if i == j {
                GaussRat::int(rng.gen_range(-2..=2))
            } else {
                GaussRat::int(0)
            }
        });
        return p.matmul(&d).matmul(&pinv);
    }
}

fn hermitian(rng: &mut gen::TestRng, n: usize) -> Matrix<GaussRat> {
    let a = gen::matrix(rng, n, n, 0.5);
    a.add(&a.adjoint())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Outside eigen and `div_sqrt` the two towers agree up to rounding.
    #[test]
    fn exact_and_float_towers_agree(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let schema = gen::schema(&mut rng);
        let e = gen::program(&mut rng, &schema, &GenConfig::exact(5, 5).with_inv().with_complex(0.3));
        let sigma = gen::sizes(&mut rng, &schema, 5);
        let inst = gen::instance(&mut rng, &schema, &sigma, 0.3);
        let exact = eval(&inst, &e, &EvalConfig::exact()).unwrap();
        let float = eval(&inst.to_c64(), &e, &EvalConfig::float()).unwrap();
        for (x, y) in exact.data().iter().zip(float.data()) {
            let x = x.to_c64();
            prop_assert!((x - y).norm() <= 1e-9 * x.norm().max(1.0), "{} vs {} in {:?}", x, y, e);
        }
    }

    #[test]
    fn structural_operations(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let (r, c) = (rng.gen_range(1..=5), rng.gen_range(1..=5));
        let m = gen::matrix(&mut rng, r, c, 0.5);
        let v = gen::matrix(&mut rng, r, 1, 0.5);
        let inst = Instance::new().with("M", m.clone()).with("v", v.clone());
        let cfg = EvalConfig::exact();
        let run = |src: &str| eval(&inst, &parse(src).unwrap(), &cfg).unwrap();
        prop_assert_eq!(run("M^*^*"), m);
        prop_assert_eq!(run("ones(M)"), Matrix::from_fn(r, 1, |_, _| GaussRat::int(1)));
        let d = run("diag(v)");
        for i in 0..r {
            for j in 0..r {
                let want = if i == j { v[(i, 0)].clone() } else { GaussRat::int(0) };
                prop_assert_eq!(&d[(i, j)], &want);
            }
        }
    }

    #[test]
    fn canonical_bases_verify(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let n = rng.gen_range(1..=5);
        let a = if seed % 2 == 0 { hermitian(&mut rng, n) } else { diagonalizable(&mut rng, n) };
        let a = c64(&a);
        let cfg = EvalConfig::float();
        prop_assert!(is_diagonalizable(&a, cfg.eps, cfg.delta));
        let b = eigen_canonical(&a, cfg.eps, cfg.delta);
        prop_assert!(verify_eigen(&a, &b, cfg.eps, cfg.delta).unwrap(), "{}", a);
    }

    #[test]
    fn google_matrix_is_row_stochastic(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let n = rng.gen_range(1..=7);
        let adj = gen::digraph_positive_outdegree(&mut rng, n, 0.4);
        let p = corpus::google_matrix("0.85");
        let inst = Instance::new().with("A", gen::bool_matrix(&adj));
        let g = eval(&inst, &p.expr, &EvalConfig::exact()).unwrap().to_c64();
        for i in 0..n {
            let s: Complex64 = g.row(i).iter().sum();
            prop_assert!((s - 1.0).norm() <= 1e-9);
        }
    }

    #[test]
    fn vector_min_is_exact(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let n = rng.gen_range(1..=8);
        let v = gen::matrix(&mut rng, n, 1, 0.0);
        let want = v.data().iter().map(|x| x.re.clone()).min().unwrap();
        let out = eval(&Instance::new().with("v", v), &corpus::vector_min().expr, &EvalConfig::exact()).unwrap();
        prop_assert_eq!(out, Matrix::from_vec(1, 1, vec![GaussRat::real(want)]));
    }

    #[test]
    fn parallel_and_sequential_batches_agree(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let schema = gen::schema(&mut rng);
        let e = gen::program(&mut rng, &schema, &GenConfig::exact(4, 3).with_inv());
        let insts: Vec<_> = (0..6)
            .map(|_| {
                let sigma = gen::sizes(&mut rng, &schema, 3);
                gen::instance(&mut rng, &schema, &sigma, 0.2)
            })
            .collect();
        let cfg = EvalConfig::exact();
        prop_assert_eq!(eval_batch(&insts, &e, &cfg), eval_batch_seq(&insts, &e, &cfg));
    }
}

#[test]
fn jordan_corpus_has_zero_eigenbasis() {
    let cfg = EvalConfig::float();
    let p = Matrix::<GaussRat>::from_i64(&[&[1, 2, 0], &[0, 1, 1], &[1, 0, 1]]);
    let pinv = invert(&p, 0.0);
    let block3 = Matrix::<GaussRat>::from_i64(&[&[4, 1, 0], &[0, 4, 0], &[0, 0, -1]]);
    let corpus = [
        Matrix::<GaussRat>::from_i64(&[&[0, 1], &[0, 0]]),
        Matrix::from_i64(&[&[2, 1], &[0, 2]]),
        Matrix::from_i64(&[&[3, 1, 0], &[0, 3, 1], &[0, 0, 3]]),
        block3.clone(),
        p.matmul(&block3).matmul(&pinv),
        Matrix::from_i64(&[&[0, 1, 0, 0], &[0, 0, 0, 0], &[0, 0, 0, 1], &[0, 0, 0, 0]]),
    ];
    for a in corpus {
        let a = a.to_c64();
        let b = eigen_canonical(&a, cfg.eps, cfg.delta);
        assert!(b.is_zero_tol(0.0), "{a}");
        assert!(verify_eigen(&a, &b, cfg.eps, cfg.delta).unwrap());
        let via_program = eval(&Instance::new().with("M", a.clone()), &parse("eigen(M)").unwrap(), &cfg).unwrap();
        assert!(via_program.is_zero_tol(0.0));
    }
}

#[test]
fn totalized_partial_functions() {
    let inst = Instance::new().with("M", Matrix::<GaussRat>::from_i64(&[&[0, 2], &[-4, 0]]));
    let run = |src: &str, cfg: &EvalConfig| eval(&inst.to_c64(), &parse(src).unwrap(), cfg).unwrap();
    let q = run("apply[div](M, M)", &EvalConfig::float());
    assert_eq!(q.data().iter().map(|z| z.re).collect::<Vec<_>>(), vec![0.0, 1.0, 1.0, 0.0]);
    let s = run("apply[div_sqrt](ones(M) . ones(M)^*, M)", &EvalConfig::float());
    assert_eq!(s[(0, 1)].re, 1.0 / 2f64.sqrt());
    assert_eq!(s[(1, 0)].re, 0.0);
}

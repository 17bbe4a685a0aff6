//! Acceptance suite: one test per criterion, each printing a single
//! pass/fail line (visible with `cargo test -- --nocapture`).
//!
//! Criterion 12 (CLI determinism and exit codes) lives in the CLI crate's
//! integration tests, next to the binary it exercises.

use infconv::fclass;
use infconv::gauss::{self, gauss_hermite_rule};
use infconv::grid::{default_grid, make_grid, sample, uniform_unit, FunctionFamily, GridFunction, GridSpec};
use infconv::hermite;
use infconv::transforms::{self, CostScale, EnvelopeScratch};
use infconv::verify::{self, ProductMode, ScalingMode, ScalingOptions, SymmetrizationInput, SymmetrizationMode};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use std::time::Instant;

fn random_grid_function(spec: &GridSpec, rng: &mut ChaCha8Rng, with_inf: bool) -> GridFunction {
    loop {
        let values: Vec<f64> = (0..spec.len())
            .map(|_| {
                let u = uniform_unit(rng);
                if with_inf && u < 0.1 {
                    f64::INFINITY
                } else {
                    u * 10.0 - 3.0
                }
            })
            .collect();
        if values.iter().any(|v| v.is_finite()) {
            return GridFunction::new(spec.clone(), values).unwrap();
        }
    }
}

fn max_abs_diff(a: &GridFunction, b: &GridFunction) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| {
            if *x == f64::INFINITY && *y == f64::INFINITY {
                0.0
            } else {
                (x - y).abs()
            }
        })
        .fold(0.0, f64::max)
}

#[test]
fn c01_transform_oracle_equivalence_and_linear_time() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    let d1 = default_grid(1).unwrap();
    let mut worst = 0.0f64;
    for k in 0..100 {
        let f = random_grid_function(&d1, &mut rng, k % 3 == 0);
        let fast = transforms::inf_conv_quadratic(&f, CostScale::half());
        let brute = transforms::inf_conv_brute(&f, CostScale::half());
        worst = worst.max(max_abs_diff(&fast, &brute));
    }
    let d2 = default_grid(2).unwrap();
    for k in 0..20 {
        let f = random_grid_function(&d2, &mut rng, k % 4 == 0);
        let fast = transforms::inf_conv_quadratic(&f, CostScale::half());
        let brute = transforms::inf_conv_brute(&f, CostScale::half());
        worst = worst.max(max_abs_diff(&fast, &brute));
    }
    assert!(
        worst <= 1e-9,
        "fast/brute disagreement {worst:.3e} exceeds 1e-9"
    );

    // per-line cost of the envelope at n and 2n
    let sizes = [1usize << 14, 1 << 15, 1 << 16, 1 << 17];
    let mut per_line = Vec::new();
    let mut scratch = EnvelopeScratch::new();
    for &n in &sizes {
        let line: Vec<f64> = (0..n).map(|_| uniform_unit(&mut rng) * 10.0).collect();
        let mut out = vec![0.0; n];
        let reps = ((1usize << 22) / n).max(8);
        let mut best = f64::INFINITY;
        for _ in 0..5 {
            let t0 = Instant::now();
            for _ in 0..reps {
                transforms::inf_conv_line_fast(
                    std::hint::black_box(&line),
                    0.5,
                    &mut out,
                    &mut scratch,
                );
            }
            std::hint::black_box(&out);
            best = best.min(t0.elapsed().as_secs_f64() / reps as f64);
        }
        per_line.push(best);
    }
    let mut worst_ratio = 0.0f64;
    for w in per_line.windows(2) {
        worst_ratio = worst_ratio.max(w[1] / w[0]);
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(
        worst_ratio <= 2.5,
        "per-line time grew {worst_ratio:.2}x on doubling (times {per_line:?})"
    );
    assert!(elapsed < 60.0, "criterion 1 took {elapsed:.1}s");
    println!(
        "criterion 1: PASS - max fast/brute diff {worst:.2e}, worst doubling ratio {worst_ratio:.2}, {elapsed:.1}s"
    );
}

#[test]
fn c02_symmetric_tau_quadratic_witnesses() {
    let rule = gauss_hermite_rule(40).unwrap();
    let d1 = default_grid(1).unwrap();
    // wide box for d=2: e^{Hf} has per-axis variance 1+a, and the default
    // L=4 box cuts its tail by more than the 5e-3 budget at a >= 1
    let d2 = make_grid(2, &[6.0], &[241]).unwrap();
    let mut worst = 0.0f64;
    for &a in &[0.25, 0.5, 1.0, 2.0] {
        for (dim, spec) in [(1usize, &d1), (2usize, &d2)] {
            let r = verify::verify_product_inequality(
                &format!("tau.quadratic.a{a}.d{dim}"),
                &FunctionFamily::quadratic(a),
                ProductMode::SymmetricTau,
                spec,
                &rule,
                None,
            )
            .unwrap();
            let dev = (r.lhs - 1.0).abs();
            worst = worst.max(dev);
            assert!(
                dev <= 5e-3,
                "a={a} d={dim}: product {:.6} deviates {dev:.2e} > 5e-3",
                r.lhs
            );
            assert!(r.pass);
        }
    }
    println!("criterion 2: PASS - worst |product - 1| = {worst:.2e} over 8 witnesses");
}

fn even_corpus() -> Vec<FunctionFamily> {
    vec![
        FunctionFamily::huber(),
        FunctionFamily::abs(),
        FunctionFamily::power4(),
        FunctionFamily::sum(vec![
            FunctionFamily::scale(0.5, FunctionFamily::power4()),
            FunctionFamily::quadratic(0.5),
        ]),
        FunctionFamily::cosine_bump(0.5, 1.0),
        FunctionFamily::cosine_bump(0.3, 2.0),
        FunctionFamily::cosine_bump(1.0, 0.5),
        FunctionFamily::clip_below(-2.0, FunctionFamily::random_even_poly(1, 6)),
        FunctionFamily::clip_below(-2.0, FunctionFamily::random_even_poly(2, 8)),
        FunctionFamily::clip_below(-1.0, FunctionFamily::random_even_poly(3, 4)),
    ]
}

#[test]
fn c03_symmetric_tau_bound_on_corpus() {
    let rule = gauss_hermite_rule(40).unwrap();
    let corpus = even_corpus();
    assert!(corpus.len() >= 10);
    let mut worst = f64::NEG_INFINITY;
    for dim in [1usize, 2] {
        let spec = default_grid(dim).unwrap();
        for fam in &corpus {
            let r = verify::verify_product_inequality(
                &format!("tau.{}.d{dim}", fam.name()),
                fam,
                ProductMode::SymmetricTau,
                &spec,
                &rule,
                None,
            )
            .unwrap();
            worst = worst.max(r.lhs);
            assert!(
                r.lhs <= 1.0 + 1e-2,
                "{} d={dim}: product {:.6} > 1.01",
                fam.name(),
                r.lhs
            );
        }
    }
    println!(
        "criterion 3: PASS - {} even families x 2 dims, max product {worst:.6}",
        corpus.len()
    );
}

#[test]
fn c04_ball_inequality() {
    let rule = gauss_hermite_rule(40).unwrap();
    let two_pi = 2.0 * std::f64::consts::PI;
    for dim in [1usize, 2] {
        let spec = default_grid(dim).unwrap();
        let r = verify::verify_product_inequality(
            &format!("ball.gauss.d{dim}"),
            &FunctionFamily::gaussian_density(1.0),
            ProductMode::Ball,
            &spec,
            &rule,
            None,
        )
        .unwrap();
        let rhs = two_pi.powi(dim as i32);
        assert!(
            (r.lhs - rhs).abs() <= 0.01 * rhs,
            "d={dim}: product {:.6} not within 1% of {rhs:.6}",
            r.lhs
        );
    }
    let spec = default_grid(1).unwrap();
    let narrow = verify::verify_product_inequality(
        "ball.narrow",
        &FunctionFamily::gaussian_density(4.0),
        ProductMode::Ball,
        &spec,
        &rule,
        None,
    )
    .unwrap();
    assert!(narrow.lhs <= two_pi * 1.01);
    println!(
        "criterion 4: PASS - gaussian equality in d=1,2; narrow gaussian product {:.6} <= 2pi*1.01",
        narrow.lhs
    );
}

#[test]
fn c05_symmetric_poincare() {
    use rand_core::RngCore;
    let started = Instant::now();
    let rule = gauss_hermite_rule(40).unwrap();

    let w2 = FunctionFamily::from_fn("x^2-1", infconv::grid::Parity::Even, |x| {
        x[0] * x[0] - 1.0
    });
    let e2 = hermite::expand(&w2, 1, 8, &rule).unwrap();
    let r2 = hermite::poincare_check(&e2).unwrap();
    assert!((r2.ratio - 1.0).abs() <= 1e-9, "h2 ratio {}", r2.ratio);

    let w3 = FunctionFamily::from_fn("x^3-3x", infconv::grid::Parity::Odd, |x| {
        x[0] * x[0] * x[0] - 3.0 * x[0]
    });
    let e3 = hermite::expand(&w3, 1, 8, &rule).unwrap();
    let r3 = hermite::poincare_check(&e3).unwrap();
    assert!(
        (r3.ratio - 2.0 / 3.0).abs() <= 1e-9,
        "h3 ratio {}",
        r3.ratio
    );

    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let mut e = hermite::HermiteExpansion::zero(1, 8);
        for k in [2usize, 4, 6, 8] {
            let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
            e.set_coeff(&[k], u * 2.0 - 1.0).unwrap();
        }
        let out = hermite::poincare_check(&e).unwrap();
        assert!(out.pass);
        worst = worst.max(out.ratio);
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(worst <= 1.0);
    assert!(elapsed < 10.0, "criterion 5 took {elapsed:.1}s");
    println!(
        "criterion 5: PASS - h2 ratio 1, h3 ratio 2/3, 50 random ratios <= {worst:.4}, {elapsed:.2}s"
    );
}

#[test]
fn c06_small_eps_scaling() {
    let rule = gauss_hermite_rule(40).unwrap();
    let spec = default_grid(1).unwrap();
    let opts = ScalingOptions {
        eps_list: vec![0.4, 0.2, 0.1, 0.05],
        class_constant: 1.0,
        fit_eps_list: None,
    };
    let r = verify::verify_scaling("small_eps", ScalingMode::SmallEps, &opts, &spec, &rule)
        .unwrap();
    assert!(r.pass, "notes: {:?}", r.notes);
    assert!(r.rhs >= 2.9, "slope {}", r.rhs);
    println!(
        "criterion 6: PASS - excess <= K_fit eps^3 on all eps, log-log slope {:.3} >= 2.9",
        r.rhs
    );
}

#[test]
fn c07_symmetrization_checks() {
    let rule = gauss_hermite_rule(40).unwrap();
    let d1 = default_grid(1).unwrap();
    // alpha over an even+odd corpus, with the closed-form linear witness
    let alpha_corpus = vec![
        FunctionFamily::quadratic(1.0),
        FunctionFamily::linear(1.0),
        FunctionFamily::huber(),
        FunctionFamily::abs(),
        FunctionFamily::cosine_bump(0.5, 1.0),
        FunctionFamily::clip_below(-2.0, FunctionFamily::random_even_poly(4, 6)),
        FunctionFamily::shift(vec![0.5], FunctionFamily::huber()),
    ];
    for fam in &alpha_corpus {
        let r = verify::verify_symmetrization(
            &format!("alpha.{}", fam.name()),
            SymmetrizationMode::Alpha,
            &SymmetrizationInput::Family(fam.clone()),
            &d1,
            &rule,
            None,
        )
        .unwrap();
        assert!(r.pass, "{}: lhs {} rhs {}", fam.name(), r.lhs, r.rhs);
    }
    let lin = verify::verify_symmetrization(
        "alpha.linear",
        SymmetrizationMode::Alpha,
        &SymmetrizationInput::Family(FunctionFamily::linear(1.0)),
        &d1,
        &rule,
        None,
    )
    .unwrap();
    let e_half = 0.5f64.exp();
    assert!((lin.lhs - e_half).abs() <= 1e-4, "lhs {}", lin.lhs);
    assert!((lin.rhs - e_half).abs() <= 1e-4, "rhs {}", lin.rhs);

    let d2 = default_grid(2).unwrap();
    let steiner = verify::verify_symmetrization(
        "steiner.random",
        SymmetrizationMode::SteinerPointwise,
        &SymmetrizationInput::RandomEven { seed: 7, count: 20 },
        &d2,
        &rule,
        None,
    )
    .unwrap();
    assert!(
        steiner.pass && steiner.lhs <= 1e-9,
        "steiner max violation {:.3e}",
        steiner.lhs
    );
    let beta = verify::verify_symmetrization(
        "beta.random",
        SymmetrizationMode::Beta,
        &SymmetrizationInput::RandomEven { seed: 7, count: 20 },
        &d2,
        &rule,
        None,
    )
    .unwrap();
    assert!(beta.pass, "beta worst ratio {}", beta.lhs);
    println!(
        "criterion 7: PASS - alpha corpus ok (linear witness at e^(1/2)), steiner violation {:.2e} <= 1e-9, beta ratio {:.6} <= 1.01",
        steiner.lhs, beta.lhs
    );
}

#[test]
fn c08_tensorization_at_n2() {
    let rule = gauss_hermite_rule(40).unwrap();
    let spec = default_grid(2).unwrap();
    let opts = ScalingOptions {
        eps_list: vec![0.2, 0.1],
        class_constant: 1.0,
        fit_eps_list: Some(vec![0.4, 0.2, 0.1, 0.05]),
    };
    let r = verify::verify_scaling("tensorization", ScalingMode::Tensorization, &opts, &spec, &rule)
        .unwrap();
    assert!(r.pass, "worst product-bound gap {:.3e}; notes {:?}", r.lhs, r.notes);
    println!(
        "criterion 8: PASS - 2-D products within (1 + K_fit eps^3)^2, worst gap {:.2e}",
        r.lhs
    );
}

#[test]
fn c09_dimension_trick() {
    let spec2 = default_grid(2).unwrap();
    let spec1 = default_grid(1).unwrap();
    for fam in [FunctionFamily::quadratic(1.0), FunctionFamily::huber()] {
        let r = verify::verify_dimension_trick(
            &format!("dim_trick.{}", fam.name()),
            &fam,
            &spec2,
            &spec1,
        )
        .unwrap();
        assert!(
            r.pass,
            "{}: violation {:.3e} beyond slack {:.3e}",
            fam.name(),
            r.lhs,
            r.rhs
        );
    }
    println!("criterion 9: PASS - Hg >= Hf((x1+x2)/sqrt2) within reported slack for quadratic and huber");
}

#[test]
fn c10_blaschke_santalo_volumes() {
    let spec = default_grid(2).unwrap();
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    let mut products = Vec::new();
    for &p in &[1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
        let r = verify::verify_santalo_volume(&format!("santalo.p{p}"), p, &spec, None).unwrap();
        assert!(r.pass, "p={p}: {:?}", r.notes);
        assert!(r.lhs <= pi2 * 1.01, "p={p}: product {}", r.lhs);
        if p == 2.0 {
            assert!((r.lhs - pi2).abs() <= 0.01 * pi2);
        }
        products.push(r.lhs);
    }
    println!(
        "criterion 10: PASS - volume products {products:?} <= pi^2*1.01, equality at p=2, identity route within 1%"
    );
}

#[test]
fn c11_tau_quarter_non_even() {
    let rule = gauss_hermite_rule(40).unwrap();
    let spec = default_grid(1).unwrap();
    let witness = verify::verify_product_inequality(
        "tau4.linear",
        &FunctionFamily::linear(1.0),
        ProductMode::TauQuarter,
        &spec,
        &rule,
        None,
    )
    .unwrap();
    assert!(
        (witness.lhs - 1.0).abs() <= 5e-3,
        "linear witness product {:.6}",
        witness.lhs
    );
    let corpus = vec![
        FunctionFamily::linear(-0.5),
        FunctionFamily::shift(vec![0.5], FunctionFamily::huber()),
        FunctionFamily::shift(vec![-1.0], FunctionFamily::huber()),
        FunctionFamily::sum(vec![
            FunctionFamily::huber(),
            FunctionFamily::linear(0.3),
        ]),
    ];
    for fam in &corpus {
        let r = verify::verify_product_inequality(
            &format!("tau4.{}", fam.name()),
            fam,
            ProductMode::TauQuarter,
            &spec,
            &rule,
            None,
        )
        .unwrap();
        assert!(
            r.lhs <= 1.0 + 1e-2,
            "{}: product {:.6}",
            fam.name(),
            r.lhs
        );
    }
    println!(
        "criterion 11: PASS - linear witness product {:.6} = 1 +- 5e-3, non-even corpus bounded",
        witness.lhs
    );
}

// supporting regression: refinement never flips a passing margin
#[test]
fn refinement_keeps_passing_margins() {
    let rule = gauss_hermite_rule(40).unwrap();
    let coarse = default_grid(1).unwrap();
    let fine = make_grid(1, &[6.0], &[481]).unwrap();
    for fam in [FunctionFamily::huber(), FunctionFamily::cosine_bump(0.5, 1.0)] {
        let rc = verify::verify_product_inequality(
            "refine.c",
            &fam,
            ProductMode::SymmetricTau,
            &coarse,
            &rule,
            None,
        )
        .unwrap();
        let rf = verify::verify_product_inequality(
            "refine.f",
            &fam,
            ProductMode::SymmetricTau,
            &fine,
            &rule,
            None,
        )
        .unwrap();
        assert!(rc.pass && rf.pass);
    }
}

// supporting check: the measured concentration constant stays small and the
// marginal integral respects the class, tying gauss and fclass together
#[test]
fn concentration_and_marginal_support() {
    let rule = gauss_hermite_rule(64).unwrap();
    let spec = default_grid(1).unwrap();
    let p_list: Vec<f64> = (1..=10).map(|k| 2.0 * k as f64).collect();
    let m = gauss::concentration_moment_check(
        &FunctionFamily::linear(1.0),
        &p_list,
        &rule,
        &spec,
    )
    .unwrap();
    assert!(m <= 2.0);

    let eps = 0.1;
    let prod = make_grid(2, &[6.0, 6.0], &[121, 121]).unwrap();
    let f = sample(
        &FunctionFamily::from_fn("cos_sum", infconv::grid::Parity::Even, move |x| {
            eps * eps * (x[0] + x[1]).cos()
        }),
        &prod,
    )
    .unwrap();
    let phi = fclass::marginal_log_integral(&f, 1).unwrap();
    assert!(fclass::check_membership(&phi, 1.0, eps).unwrap().member);
}

//! Acceptance suite: one test per release criterion, each printing a
//! single pass/fail line with its measured figures.

use ballavg::analysis::{
    equivalence_study, estimate_alpha, estimate_alpha_with_norm, standard_corpus, SlopeStatistic,
};
use ballavg::functionals::{
    area_of_field, fourier_tl_norm, g_of_field, gstar_of_field, TimeSpaceField,
};
use ballavg::grid::{lp_norm, make_ladder, GridFunction, QExp, ScaleLadder, SpaceParams};
use ballavg::kernels::{
    a_function, a_function_quadrature, apply_ball_average, apply_filter, apply_higher_average,
    apply_scaled_multiplier, ball_multiplier, ball_multiplier_quadrature, build_filter_bank,
    build_filter_bank_alt, reconstruction_multiplier, validate_direct, FilterRung,
};
use ballavg::pointwise::{
    extract_gradient, hajlasz_verify, verify_implications, GradientVariant,
};
use ballavg::synth::{analytic_ball_average, generate, GeneratorKind, GeneratorSpec};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

const TWO_PI: f64 = 2.0 * PI;

fn conclude(criterion: &str, failures: Vec<String>, detail: String) {
    if failures.is_empty() {
        println!("[PASS] {criterion}: {detail}");
    } else {
        println!(
            "[FAIL] {criterion}: {} violation(s); first: {}",
            failures.len(),
            failures[0]
        );
    }
    assert!(failures.is_empty(), "{criterion}: {failures:?}");
}

fn random_nonneg_field(ladder: ScaleLadder, n: usize, rng: &mut ChaCha8Rng) -> TimeSpaceField {
    let rungs = (0..ladder.num_rungs())
        .map(|_| {
            GridFunction::new(1, n, (0..n).map(|_| rng.gen_range(0.0..1.0)).collect()).unwrap()
        })
        .collect();
    TimeSpaceField::new(ladder, rungs).unwrap()
}

#[test]
fn criterion_1_multiplier_correctness() {
    let started = std::time::Instant::now();
    let mut failures = Vec::new();
    // quadrature vs closed forms on s in [0, 100]
    for i in 0..=2000 {
        let s = i as f64 * 0.05;
        for dim in [1usize, 3] {
            let cf = ball_multiplier(dim, s).unwrap();
            let q = ball_multiplier_quadrature(dim, s).unwrap();
            if (cf - q).abs() > 1e-10 {
                failures.push(format!("quadrature n={dim} s={s}: |{cf} - {q}|"));
            }
        }
    }
    // A = 1 - iso, and the double-angle quadrature route agrees
    for dim in 1..=3usize {
        for i in 0..=1000 {
            let s = i as f64 * 0.1;
            let a = a_function(dim, s).unwrap();
            let direct = 1.0 - ball_multiplier(dim, s).unwrap();
            if (a - direct).abs() > 1e-12 {
                failures.push(format!("A != 1 - iso at n={dim} s={s}"));
            }
            if s <= 100.0 && i % 10 == 0 {
                let via_double_angle = a_function_quadrature(dim, s).unwrap();
                if (a - via_double_angle).abs() > 1e-12 {
                    failures.push(format!("double-angle A mismatch n={dim} s={s}"));
                }
            }
        }
    }
    // A(s)/s^2 positive and bounded on (0, 4]
    let mut envelope = String::new();
    for dim in 1..=3usize {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for i in 1..=400 {
            let s = i as f64 * 0.01;
            let ratio = a_function(dim, s).unwrap() / (s * s);
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        if !(lo > 0.0 && hi.is_finite()) {
            failures.push(format!("A(s)/s^2 envelope n={dim}: [{lo}, {hi}]"));
        }
        if dim == 1 && !(lo >= 0.01 && hi <= 1.0) {
            failures.push(format!("n=1 envelope outside [0.01, 1]: [{lo}, {hi}]"));
        }
        envelope.push_str(&format!("n={dim}: c1={lo:.4} c2={hi:.4}; "));
    }
    let elapsed = started.elapsed();
    if elapsed.as_secs_f64() > 1.0 {
        failures.push(format!("runtime {elapsed:?} exceeds 1 s"));
    }
    conclude(
        "criterion 1 multiplier correctness",
        failures,
        format!("{envelope}runtime {elapsed:?}"),
    );
}

#[test]
fn criterion_2_oracle_agreement() {
    let mut failures = Vec::new();
    // analytic per-mode oracle vs spectral path
    let supported = [
        GeneratorSpec::new(
            GeneratorKind::Weierstrass {
                alpha0: 0.9,
                terms: 7,
                seed: 101,
            },
            1,
            512,
        ),
        GeneratorSpec::new(
            GeneratorKind::Weierstrass {
                alpha0: 1.5,
                terms: 6,
                seed: 7,
            },
            1,
            512,
        ),
        GeneratorSpec::new(
            GeneratorKind::Bandlimited {
                max_mode: 12,
                exponent: 1.0,
                seed: 404,
            },
            1,
            512,
        ),
        GeneratorSpec::new(GeneratorKind::SingleMode { mode: 5, phase: 0.3 }, 1, 512),
        GeneratorSpec::new(
            GeneratorKind::Bandlimited {
                max_mode: 4,
                exponent: 1.0,
                seed: 5,
            },
            2,
            32,
        ),
    ];
    let mut worst_oracle = 0.0f64;
    for spec in &supported {
        let f = generate(spec).unwrap();
        let ladder = make_ladder(spec.samples_per_axis, 2).unwrap();
        for (_, t) in ladder.rungs() {
            let oracle = analytic_ball_average(spec, t).unwrap();
            let spectral = apply_ball_average(&f, t).unwrap();
            let err = oracle.sup_distance(&spectral);
            worst_oracle = worst_oracle.max(err);
            if err > 1e-10 {
                failures.push(format!("analytic vs spectral {} t={t}: {err:e}", spec.label()));
            }
        }
    }
    // spectral vs direct-spatial on smooth members at N=256, within the
    // Riemann-sum band 10 dx ||grad f||_inf
    let smooth = [
        GeneratorSpec::new(GeneratorKind::SingleMode { mode: 3, phase: 0.0 }, 1, 256),
        GeneratorSpec::new(
            GeneratorKind::Bandlimited {
                max_mode: 8,
                exponent: 1.0,
                seed: 9,
            },
            1,
            256,
        ),
    ];
    let mut worst_band = 0.0f64;
    for spec in &smooth {
        let f = generate(spec).unwrap();
        let grad_sup: f64 = spec
            .modes()
            .unwrap()
            .iter()
            .map(|m| m.amplitude.abs() * TWO_PI * m.norm())
            .sum();
        let band = 10.0 * f.spacing() * grad_sup;
        for t in [0.25, 0.125, 0.0625] {
            let spectral = apply_ball_average(&f, t).unwrap();
            let direct = validate_direct(&f, t).unwrap();
            let err = spectral.sup_distance(&direct);
            worst_band = worst_band.max(err / band);
            if err > band {
                failures.push(format!(
                    "direct vs spectral {} t={t}: {err:e} > band {band:e}",
                    spec.label()
                ));
            }
        }
    }
    conclude(
        "criterion 2 oracle agreement",
        failures,
        format!("worst analytic-vs-spectral {worst_oracle:.2e}; worst direct/band {worst_band:.3}"),
    );
}

#[test]
fn criterion_3_exact_identities() {
    let mut failures = Vec::new();
    // Calderon partition for both banks
    let banks = [build_filter_bank().unwrap(), build_filter_bank_alt().unwrap()];
    let mut worst_partition = 0.0f64;
    for bank in &banks {
        for i in 0..=10000 {
            let s = i as f64 * 0.01;
            let dev = (bank.partition_value(s) - 1.0).abs();
            worst_partition = worst_partition.max(dev);
            if dev > 1e-10 {
                failures.push(format!("partition deviation {dev:e} at s={s}"));
            }
        }
    }
    // reconstruction identity: the annulus filter equals the eta-multiplier
    // applied to f - B_t f, at every rung
    let n = 256;
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let coeffs: Vec<(usize, f64, f64)> = (1..=10)
        .map(|k| (k, rng.gen_range(-1.0..1.0), rng.gen_range(0.0..TWO_PI)))
        .collect();
    let f = GridFunction::from_fn(1, n, |x| {
        coeffs
            .iter()
            .map(|&(k, a, ph)| a * (TWO_PI * k as f64 * x[0] + ph).cos())
            .sum()
    })
    .unwrap();
    let bank = &banks[0];
    let ladder = make_ladder(n, 2).unwrap();
    let mut worst_eta_identity = 0.0f64;
    for (k, t) in ladder.rungs() {
        let filtered = apply_filter(&f, bank, &ladder, FilterRung::Annulus(k)).unwrap();
        let diff = f.sub(&apply_ball_average(&f, t).unwrap()).unwrap();
        let via_eta = apply_scaled_multiplier(&diff, t, |s| {
            reconstruction_multiplier(1, s, bank).unwrap()
        })
        .unwrap();
        let err = filtered.sup_distance(&via_eta);
        worst_eta_identity = worst_eta_identity.max(err);
        if err > 1e-8 {
            failures.push(format!("reconstruction identity rung {k}: {err:e}"));
        }
    }
    // Calderon reproducing formula with the squared partition: base twice
    // plus every annulus twice reconstructs band-limited f
    let covered: Vec<(usize, f64, f64)> = (1..=20)
        .map(|k| (k, rng.gen_range(-1.0..1.0), rng.gen_range(0.0..TWO_PI)))
        .collect();
    let g = GridFunction::from_fn(1, n, |x| {
        covered
            .iter()
            .map(|&(k, a, ph)| a * (TWO_PI * k as f64 * x[0] + ph).cos())
            .sum()
    })
    .unwrap();
    let base = apply_filter(&g, bank, &ladder, FilterRung::Base).unwrap();
    let mut acc = apply_filter(&base, bank, &ladder, FilterRung::Base).unwrap();
    for (k, _) in ladder.rungs() {
        let once = apply_filter(&g, bank, &ladder, FilterRung::Annulus(k)).unwrap();
        let twice = apply_filter(&once, bank, &ladder, FilterRung::Annulus(k)).unwrap();
        acc = acc.zip(&twice, |a, b| a + b).unwrap();
    }
    let err = acc.sup_distance(&g);
    if err > 1e-8 {
        failures.push(format!("reproducing formula: {err:e}"));
    }
    conclude(
        "criterion 3 exact identities",
        failures,
        format!(
            "partition dev {worst_partition:.2e}; reconstruction dev {worst_eta_identity:.2e}; reproducing dev {err:.2e}"
        ),
    );
}

#[test]
fn criterion_4_polynomial_annihilation() {
    let mut failures = Vec::new();
    let n = 512usize;
    let spec = GeneratorSpec::new(
        GeneratorKind::PolyPatch {
            degree: 2,
            window: 1.0 / 32.0,
        },
        1,
        n,
    );
    let f = generate(&spec).unwrap();
    // f - B_t f = -t^2/3 where f reads (x - 1/2)^2
    let mut worst_rel = 0.0f64;
    for t in [1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0] {
        let avg = apply_ball_average(&f, t).unwrap();
        let want = -t * t / 3.0;
        for off in -(n as i64) / 64..=(n as i64) / 64 {
            let idx = (n as i64 / 2 + off) as usize;
            let got = f.values()[idx] - avg.values()[idx];
            let rel = ((got - want) / want).abs();
            worst_rel = worst_rel.max(rel);
            if rel > 1e-6 {
                failures.push(format!("quadratic residual t={t} off={off}: rel {rel:e}"));
            }
        }
    }
    // order-2 average reproduces quadratics
    let mut worst_exact = 0.0f64;
    for t in [1.0 / 32.0, 1.0 / 64.0] {
        let b2 = apply_higher_average(&f, t, 2).unwrap();
        for off in -8i64..=8 {
            let idx = (n as i64 / 2 + off) as usize;
            let err = (f.values()[idx] - b2.values()[idx]).abs();
            worst_exact = worst_exact.max(err);
            if err > 1e-8 {
                failures.push(format!("order-2 average t={t} off={off}: {err:e}"));
            }
        }
    }
    // quartic residual decays at order 4
    let spec4 = GeneratorSpec::new(
        GeneratorKind::PolyPatch {
            degree: 4,
            window: 1.0 / 32.0,
        },
        1,
        n,
    );
    let f4 = generate(&spec4).unwrap();
    let ladder = make_ladder(n, 5).unwrap();
    let fit = estimate_alpha(&f4, &ladder, SlopeStatistic::HigherAverage(2)).unwrap();
    if (fit.alpha_hat - 4.0).abs() > 0.2 {
        failures.push(format!("quartic slope {:.3} not within 4 +- 0.2", fit.alpha_hat));
    }
    conclude(
        "criterion 4 polynomial annihilation",
        failures,
        format!(
            "quadratic rel {worst_rel:.2e}; order-2 exactness {worst_exact:.2e}; quartic slope {:.3}",
            fit.alpha_hat
        ),
    );
}

#[test]
fn criterion_5_square_function_inequalities() {
    let started = std::time::Instant::now();
    let mut failures = Vec::new();
    let q = 2.0;
    let lambda = 2.0;
    // (i) pointwise domination S <= (2^(lambda n)/v_n)^(1/q) G*_lambda
    let n = 64;
    let ladder = make_ladder(n, 2).unwrap();
    let bound = ((2f64).powf(lambda) / 2.0).powf(1.0 / q);
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut domination_violations = 0usize;
    for _ in 0..100 {
        let field = random_nonneg_field(ladder, n, &mut rng);
        let s = area_of_field(&field, q, 1.0).unwrap();
        let gs = gstar_of_field(&field, q, lambda).unwrap();
        for i in 0..n {
            if s.values()[i] > bound * gs.values()[i] * (1.0 + 1e-12) {
                domination_violations += 1;
            }
        }
    }
    if domination_violations > 0 {
        failures.push(format!("{domination_violations} pointwise domination violations"));
    }
    // (iii) ||G*_lambda||_p / ||G||_p bounded, stable across N in {64, 128}
    let mut stability = String::new();
    for p in [2.0f64, 3.0] {
        let mut means = Vec::new();
        for n in [64usize, 128] {
            let ladder = make_ladder(n, 2).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(44);
            let mut acc = 0.0;
            for _ in 0..100 {
                let field = random_nonneg_field(ladder, n, &mut rng);
                let g = g_of_field(&field, q).unwrap();
                let gs = gstar_of_field(&field, q, lambda).unwrap();
                let ratio = lp_norm(&gs, p) / lp_norm(&g, p);
                if !ratio.is_finite() {
                    failures.push(format!("non-finite norm ratio at N={n} p={p}"));
                }
                acc += ratio;
            }
            means.push(acc / 100.0);
        }
        let drift = (means[1] / means[0] - 1.0).abs();
        stability.push_str(&format!("p={p}: C={:.3} drift {:.3}; ", means[0], drift));
        if drift > 0.25 {
            failures.push(format!("norm-ratio drift {drift:.3} > 0.25 at p={p}"));
        }
    }
    // (ii) beta growth of ||S_beta||_p over beta in {1,2,4,8}
    let mut beta_msg = String::new();
    for n in [64usize, 128] {
        let ladder = make_ladder(n, 5).unwrap(); // 8 t_k <= 1/4 at every rung
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        for (p, q2) in [(2.0f64, 2.0f64), (3.0, 2.0), (2.0, 4.0)] {
            let bound = 1.0 / p.min(q2) - 1.0 / q2 + 0.2;
            let mut worst = f64::NEG_INFINITY;
            for trial in 0..20 {
                let rungs: Vec<GridFunction> = (0..ladder.num_rungs())
                    .map(|_| {
                        let mut vals = vec![0.0; n];
                        if trial % 2 == 0 {
                            for v in vals.iter_mut() {
                                *v = rng.gen_range(0.0..1.0);
                            }
                        } else {
                            // sparse spikes drive the sharp growth case
                            for _ in 0..3 {
                                vals[rng.gen_range(0..n)] = rng.gen_range(0.5..1.0);
                            }
                        }
                        GridFunction::new(1, n, vals).unwrap()
                    })
                    .collect();
                let field = TimeSpaceField::new(ladder, rungs).unwrap();
                let pts: Vec<(f64, f64)> = [1.0f64, 2.0, 4.0, 8.0]
                    .iter()
                    .map(|&b| {
                        let s = area_of_field(&field, q2, b).unwrap();
                        (b.log2(), lp_norm(&s, p).log2())
                    })
                    .collect();
                let m = pts.len() as f64;
                let sx: f64 = pts.iter().map(|v| v.0).sum();
                let sy: f64 = pts.iter().map(|v| v.1).sum();
                let sxx: f64 = pts.iter().map(|v| v.0 * v.0).sum();
                let sxy: f64 = pts.iter().map(|v| v.0 * v.1).sum();
                let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
                worst = worst.max(slope);
            }
            if worst > bound {
                failures.push(format!(
                    "beta growth {worst:.3} exceeds bound {bound:.3} at N={n} p={p} q={q2}"
                ));
            }
            if n == 128 {
                beta_msg.push_str(&format!("(p={p},q={q2}): {worst:.2}<={bound:.2}; "));
            }
        }
    }
    let elapsed = started.elapsed();
    if elapsed.as_secs_f64() > 120.0 {
        failures.push(format!("runtime {elapsed:?} exceeds 2 min"));
    }
    conclude(
        "criterion 5 square-function inequalities",
        failures,
        format!("domination 0 violations; {stability}{beta_msg}runtime {elapsed:?}"),
    );
}

#[test]
fn criterion_6_norm_equivalence() {
    let started = std::time::Instant::now();
    let mut failures = Vec::new();
    let corpus = standard_corpus();
    let resolutions = [512usize, 1024, 2048];
    let mut summary = String::new();
    for (alpha, p, q) in [(0.9, 2.0, 2.0), (0.7, 3.0, 2.0)] {
        let params = SpaceParams::new(alpha, p, QExp::Finite(q)).with_lambda(2.0);
        let report = equivalence_study(&corpus, &params, &resolutions).unwrap();
        for e in &report.entries {
            if !e.norm.is_finite() {
                failures.push(format!("non-finite norm {} {} N={}", e.label, e.functional, e.resolution));
            }
            if let Some(r) = e.ratio {
                if !(r.is_finite() && r > 0.0) {
                    failures.push(format!("bad ratio {} {} N={}", e.label, e.functional, e.resolution));
                }
            }
        }
        // profile independence: the second bank's reference norm stays
        // within a bounded bracket of the first
        for e in &report.entries {
            if e.functional == "fourier-alt" {
                if let Some(r) = e.ratio {
                    if !(0.2..=5.0).contains(&r) {
                        failures.push(format!(
                            "bank ratio {r:.3} outside [1/5, 5] for {} N={}",
                            e.label, e.resolution
                        ));
                    }
                }
            }
        }
        let mut worst_drift = 0.0f64;
        for func in report.functionals() {
            if func == "fourier" {
                continue;
            }
            let d = report.drift(&func).unwrap();
            worst_drift = worst_drift.max(d);
            if d > 0.25 {
                failures.push(format!(
                    "drift {d:.3} > 0.25 for {func} at (alpha,p,q)=({alpha},{p},{q})"
                ));
            }
        }
        summary.push_str(&format!("({alpha},{p},{q}): max drift {worst_drift:.3}; "));
    }
    let elapsed = started.elapsed();
    if elapsed.as_secs_f64() > 300.0 {
        failures.push(format!("runtime {elapsed:?} exceeds 5 min"));
    }
    conclude(
        "criterion 6 norm equivalence",
        failures,
        format!("{summary}runtime {elapsed:?}"),
    );
}

#[test]
fn criterion_7_smoothness_slope_recovery() {
    let started = std::time::Instant::now();
    let mut failures = Vec::new();
    let n = 4096usize;
    // fit over rungs 3..10: coarser rungs saturate the sup of truncated
    // lacunary sums, finer ones run out of modes
    let ladder = make_ladder(2048, 3).unwrap();
    let mut summary = String::new();
    for alpha0 in [0.4, 0.9, 1.5] {
        let spec = GeneratorSpec::new(
            GeneratorKind::Weierstrass {
                alpha0,
                terms: 10,
                seed: 7,
            },
            1,
            n,
        );
        let f = generate(&spec).unwrap();
        let ball =
            estimate_alpha_with_norm(&f, &ladder, SlopeStatistic::BallAverage, Some(2.0)).unwrap();
        let diff =
            estimate_alpha_with_norm(&f, &ladder, SlopeStatistic::FirstDifference, Some(2.0))
                .unwrap();
        if (ball.alpha_hat - alpha0).abs() > 0.1 {
            failures.push(format!(
                "ball slope {:.3} not within {alpha0} +- 0.1",
                ball.alpha_hat
            ));
        }
        let saturated = alpha0.min(1.0);
        if (diff.alpha_hat - saturated).abs() > 0.1 {
            failures.push(format!(
                "difference slope {:.3} not within {saturated} +- 0.1",
                diff.alpha_hat
            ));
        }
        summary.push_str(&format!(
            "a0={alpha0}: ball {:.3}, diff {:.3}; ",
            ball.alpha_hat, diff.alpha_hat
        ));
    }
    let elapsed = started.elapsed();
    if elapsed.as_secs_f64() > 60.0 {
        failures.push(format!("runtime {elapsed:?} exceeds 1 min"));
    }
    conclude(
        "criterion 7 smoothness slope recovery",
        failures,
        format!("{summary}runtime {elapsed:?}"),
    );
}

#[test]
fn criterion_8_pointwise_chains() {
    let started = std::time::Instant::now();
    let mut failures = Vec::new();
    let n = 128usize;
    let spec = GeneratorSpec::new(
        GeneratorKind::Weierstrass {
            alpha0: 0.9,
            terms: 5,
            seed: 11,
        },
        1,
        n,
    );
    let f = generate(&spec).unwrap();
    let ladder = make_ladder(n, 3).unwrap();
    let mut checks_total = 0usize;
    for variant in [
        GradientVariant::SupPoint,
        GradientVariant::SupNbhd,
        GradientVariant::BallSup,
        GradientVariant::BallAvg,
        GradientVariant::BallRavg(2.0),
        GradientVariant::PointCtr,
    ] {
        match extract_gradient(&f, 0.9, &ladder, variant, Default::default()) {
            Ok(cand) => {
                let report = verify_implications(&f, &cand, &ladder).unwrap();
                checks_total += report.checks.len();
                if report.total_violations() > 0 {
                    failures.push(format!(
                        "{}: {} violations\n{}",
                        variant.tag(),
                        report.total_violations(),
                        report.to_text()
                    ));
                }
            }
            Err(e) => failures.push(format!("{}: {e}", variant.tag())),
        }
    }
    // pairwise inequality with the pairwise-derived certificate, 1D N=256
    let n2 = 256usize;
    let spec2 = GeneratorSpec::new(
        GeneratorKind::Weierstrass {
            alpha0: 0.9,
            terms: 6,
            seed: 12,
        },
        1,
        n2,
    );
    let f2 = generate(&spec2).unwrap();
    let ladder2 = make_ladder(n2, 2).unwrap();
    let cand = extract_gradient(
        &f2,
        0.9,
        &ladder2,
        GradientVariant::Hajlasz,
        Default::default(),
    )
    .unwrap();
    let hrep = hajlasz_verify(&f2, &cand.g, 0.9).unwrap();
    if hrep.violations > 0 {
        failures.push(format!("pairwise inequality: {} violations", hrep.violations));
    }
    let gnorm = lp_norm(&cand.g, 2.0);
    if !gnorm.is_finite() {
        failures.push("pairwise certificate norm not finite".into());
    }
    let elapsed = started.elapsed();
    if elapsed.as_secs_f64() > 120.0 {
        failures.push(format!("runtime {elapsed:?} exceeds 2 min"));
    }
    conclude(
        "criterion 8 pointwise chains",
        failures,
        format!(
            "{checks_total} chain checks clean; {} pairs clean (defect {:.3}); ||g||_2 = {gnorm:.3}; runtime {elapsed:?}",
            hrep.pairs_checked, hrep.max_defect
        ),
    );
}

#[test]
fn criterion_9_q_infinity_coherence() {
    let started = std::time::Instant::now();
    let mut failures = Vec::new();
    let bank = build_filter_bank().unwrap();
    let params = SpaceParams::new(0.9, 2.0, QExp::Infinity);
    let mut bracket = (f64::INFINITY, 0.0f64);
    let mut worst_drift = 0.0f64;
    for spec in standard_corpus() {
        let mut ratios = Vec::new();
        for n in [512usize, 1024] {
            let f = generate(&spec.with_resolution(n)).unwrap();
            let ladder = make_ladder(n, 2).unwrap();
            let cand = extract_gradient(
                &f,
                0.9,
                &ladder,
                GradientVariant::SupPoint,
                Default::default(),
            )
            .unwrap();
            let lhs = lp_norm(&f, 2.0) + lp_norm(&cand.g, 2.0);
            let reference = fourier_tl_norm(&f, &params, &ladder, &bank).unwrap().norm;
            let ratio = lhs / reference;
            if !(ratio.is_finite() && ratio > 0.0) {
                failures.push(format!("bad ratio for {} at N={n}", spec.label()));
            }
            bracket = (bracket.0.min(ratio), bracket.1.max(ratio));
            ratios.push(ratio);
        }
        let drift = (ratios[1] / ratios[0] - 1.0).abs();
        worst_drift = worst_drift.max(drift);
        if drift > 0.25 {
            failures.push(format!("drift {drift:.3} > 0.25 for {}", spec.label()));
        }
    }
    let elapsed = started.elapsed();
    if elapsed.as_secs_f64() > 120.0 {
        failures.push(format!("runtime {elapsed:?} exceeds 2 min"));
    }
    conclude(
        "criterion 9 q-infinity coherence",
        failures,
        format!(
            "bracket [{:.3}, {:.3}], worst drift {worst_drift:.4}; runtime {elapsed:?}",
            bracket.0, bracket.1
        ),
    );
}

//! Self-check suites: multiplier bounds, the Calderon identities, the
//! reconstruction identity, the square-function inequalities, and the
//! pointwise implication chains.
//!
//! `inject_fault` perturbs the ball-average multiplier used to form
//! `f - B_t f` (leaving the filters and the reconstruction multiplier
//! alone), which must break the calderon and reconstruction suites; it exists so the
//! harness itself can be tested.

use ballavg::functionals::{area_of_field, g_of_field, gstar_of_field, TimeSpaceField};
use ballavg::grid::{lp_norm, make_ladder, GridFunction, ScaleLadder};
use ballavg::kernels::{
    a_function, apply_filter, apply_scaled_multiplier, ball_multiplier,
    ball_multiplier_quadrature, build_filter_bank, build_filter_bank_alt,
    reconstruction_multiplier, FilterRung,
};
use ballavg::pointwise::{extract_gradient, hajlasz_verify, verify_implications, GradientVariant};
use ballavg::synth::{generate, GeneratorKind, GeneratorSpec};
use ballavg::Result;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

const TWO_PI: f64 = 2.0 * PI;

pub struct SuiteOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

pub struct CheckConfig {
    pub trials: usize,
    pub inject_fault: bool,
}

/// Ball average with an optional profile fault for harness self-tests.
fn ball_average_checked(f: &GridFunction, t: f64, fault: bool) -> Result<GridFunction> {
    let dim = f.dim();
    apply_scaled_multiplier(f, t, |s| {
        let v = ball_multiplier(dim, s).unwrap();
        if fault && s > 0.0 {
            v + 1e-3
        } else {
            v
        }
    })
}

fn band_limited_fixture(n: usize, max_mode: usize, seed: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<(usize, f64, f64)> = (1..=max_mode)
        .map(|k| (k, rng.gen_range(-1.0..1.0), rng.gen_range(0.0..TWO_PI)))
        .collect();
    GridFunction::from_fn(1, n, |x| {
        coeffs
            .iter()
            .map(|&(k, a, ph)| a * (TWO_PI * k as f64 * x[0] + ph).cos())
            .sum()
    })
    .unwrap()
}

pub fn suite_multiplier(_cfg: &CheckConfig) -> SuiteOutcome {
    let mut ok = true;
    let mut detail = String::new();
    for i in 0..=2000 {
        let s = i as f64 * 0.05;
        for dim in [1usize, 3] {
            let cf = ball_multiplier(dim, s).unwrap();
            let q = ball_multiplier_quadrature(dim, s).unwrap();
            if (cf - q).abs() > 1e-10 {
                ok = false;
            }
        }
        for dim in 1..=3usize {
            if ball_multiplier(dim, s).unwrap().abs() > 1.0 + 1e-12 {
                ok = false;
            }
            let a = a_function(dim, s).unwrap();
            if (a - (1.0 - ball_multiplier(dim, s).unwrap())).abs() > 1e-12 {
                ok = false;
            }
        }
    }
    for dim in 1..=3usize {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for i in 1..=400 {
            let s = i as f64 * 0.01;
            let r = a_function(dim, s).unwrap() / (s * s);
            lo = lo.min(r);
            hi = hi.max(r);
        }
        if !(lo > 0.0 && hi.is_finite()) {
            ok = false;
        }
        detail.push_str(&format!("n={dim}: c1={lo:.4} c2={hi:.4}; "));
    }
    SuiteOutcome {
        name: "multiplier",
        passed: ok,
        detail,
    }
}

pub fn suite_calderon(cfg: &CheckConfig) -> SuiteOutcome {
    let mut ok = true;
    let banks = [build_filter_bank(), build_filter_bank_alt()];
    let mut worst_partition = 0.0f64;
    for bank in banks.iter().flatten() {
        for i in 0..=5000 {
            let s = i as f64 * 0.02;
            worst_partition = worst_partition.max((bank.partition_value(s) - 1.0).abs());
        }
    }
    if worst_partition > 1e-10 {
        ok = false;
    }
    // reproducing formula, with the annulus pieces built through the
    // reconstruction route eta(t.) (f - B_t f); sensitive to profile faults
    let n = 256;
    let bank = build_filter_bank().unwrap();
    let ladder = make_ladder(n, 2).unwrap();
    let f = band_limited_fixture(n, 20, 77);
    let base = apply_filter(&f, &bank, &ladder, FilterRung::Base).unwrap();
    let mut acc = apply_filter(&base, &bank, &ladder, FilterRung::Base).unwrap();
    for (k, t) in ladder.rungs() {
        let diff = f
            .sub(&ball_average_checked(&f, t, cfg.inject_fault).unwrap())
            .unwrap();
        let piece = apply_scaled_multiplier(&diff, t, |s| {
            reconstruction_multiplier(1, s, &bank).unwrap()
        })
        .unwrap();
        let twice = apply_filter(&piece, &bank, &ladder, FilterRung::Annulus(k)).unwrap();
        acc = acc.zip(&twice, |a, b| a + b).unwrap();
    }
    let reproduce_err = acc.sup_distance(&f);
    if reproduce_err > 1e-8 {
        ok = false;
    }
    SuiteOutcome {
        name: "calderon",
        passed: ok,
        detail: format!("partition dev {worst_partition:.2e}; reproducing dev {reproduce_err:.2e}"),
    }
}

pub fn suite_reconstruction(cfg: &CheckConfig) -> SuiteOutcome {
    let n = 256;
    let bank = build_filter_bank().unwrap();
    let ladder = make_ladder(n, 2).unwrap();
    let f = band_limited_fixture(n, 10, 13);
    let mut worst = 0.0f64;
    for (k, t) in ladder.rungs() {
        let filtered = apply_filter(&f, &bank, &ladder, FilterRung::Annulus(k)).unwrap();
        let diff = f
            .sub(&ball_average_checked(&f, t, cfg.inject_fault).unwrap())
            .unwrap();
        let via_eta = apply_scaled_multiplier(&diff, t, |s| {
            reconstruction_multiplier(1, s, &bank).unwrap()
        })
        .unwrap();
        worst = worst.max(filtered.sup_distance(&via_eta));
    }
    SuiteOutcome {
        name: "reconstruction",
        passed: worst <= 1e-8,
        detail: format!("worst rung deviation {worst:.2e}"),
    }
}

pub fn suite_squarefn(cfg: &CheckConfig) -> SuiteOutcome {
    let mut ok = true;
    let q = 2.0;
    let lambda = 2.0;
    let n = 64;
    let ladder = make_ladder(n, 2).unwrap();
    let bound = ((2f64).powf(lambda) / 2.0).powf(1.0 / q);
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut violations = 0usize;
    for _ in 0..cfg.trials {
        let field = random_field(ladder, n, &mut rng);
        let s = area_of_field(&field, q, 1.0).unwrap();
        let gs = gstar_of_field(&field, q, lambda).unwrap();
        for i in 0..n {
            if s.values()[i] > bound * gs.values()[i] * (1.0 + 1e-12) {
                violations += 1;
            }
        }
    }
    if violations > 0 {
        ok = false;
    }
    // norm comparison constant, stable across N
    let mut means = Vec::new();
    for n in [64usize, 128] {
        let ladder = make_ladder(n, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let mut acc = 0.0;
        let trials = cfg.trials.max(10);
        for _ in 0..trials {
            let field = random_field(ladder, n, &mut rng);
            let g = g_of_field(&field, q).unwrap();
            let gs = gstar_of_field(&field, q, lambda).unwrap();
            acc += lp_norm(&gs, 2.0) / lp_norm(&g, 2.0);
        }
        means.push(acc / trials as f64);
    }
    let drift = (means[1] / means[0] - 1.0).abs();
    if drift > 0.25 {
        ok = false;
    }
    // dilation growth exponent
    let ladder5 = make_ladder(64, 5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut worst_slope = f64::NEG_INFINITY;
    for trial in 0..20 {
        let rungs: Vec<GridFunction> = (0..ladder5.num_rungs())
            .map(|_| {
                let mut vals = vec![0.0; 64];
                if trial % 2 == 0 {
                    for v in vals.iter_mut() {
                        *v = rng.gen_range(0.0..1.0);
                    }
                } else {
                    for _ in 0..3 {
                        vals[rng.gen_range(0..64)] = rng.gen_range(0.5..1.0);
                    }
                }
                GridFunction::new(1, 64, vals).unwrap()
            })
            .collect();
        let field = TimeSpaceField::new(ladder5, rungs).unwrap();
        let pts: Vec<(f64, f64)> = [1.0f64, 2.0, 4.0, 8.0]
            .iter()
            .map(|&b| {
                let s = area_of_field(&field, q, b).unwrap();
                (b.log2(), lp_norm(&s, 2.0).log2())
            })
            .collect();
        let m = pts.len() as f64;
        let sx: f64 = pts.iter().map(|v| v.0).sum();
        let sy: f64 = pts.iter().map(|v| v.1).sum();
        let sxx: f64 = pts.iter().map(|v| v.0 * v.0).sum();
        let sxy: f64 = pts.iter().map(|v| v.0 * v.1).sum();
        worst_slope = worst_slope.max((m * sxy - sx * sy) / (m * sxx - sx * sx));
    }
    if worst_slope > 0.2 {
        ok = false;
    }
    SuiteOutcome {
        name: "squarefn",
        passed: ok,
        detail: format!(
            "domination violations {violations}; C={:.3} drift {drift:.3}; beta slope {worst_slope:.3}",
            means[0]
        ),
    }
}

fn random_field(ladder: ScaleLadder, n: usize, rng: &mut ChaCha8Rng) -> TimeSpaceField {
    let rungs = (0..ladder.num_rungs())
        .map(|_| {
            GridFunction::new(1, n, (0..n).map(|_| rng.gen_range(0.0..1.0)).collect()).unwrap()
        })
        .collect();
    TimeSpaceField::new(ladder, rungs).unwrap()
}

pub fn suite_chains(_cfg: &CheckConfig) -> SuiteOutcome {
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
    let mut violations = 0usize;
    let mut checks = 0usize;
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
                checks += report.checks.len();
                violations += report.total_violations();
            }
            Err(_) => violations += 1,
        }
    }
    let g = ballavg::pointwise::hajlasz_pairwise_certificate(&f, 0.9).unwrap();
    let h = hajlasz_verify(&f, &g, 0.9).unwrap();
    violations += h.violations;
    SuiteOutcome {
        name: "chains",
        passed: violations == 0,
        detail: format!(
            "{checks} chain checks, {} pairwise pairs, {violations} violations",
            h.pairs_checked
        ),
    }
}

type SuiteFn = fn(&CheckConfig) -> SuiteOutcome;

pub fn run_suites(which: &str, cfg: &CheckConfig) -> Vec<SuiteOutcome> {
    let all: Vec<(&str, SuiteFn)> = vec![
        ("multiplier", suite_multiplier),
        ("calderon", suite_calderon),
        ("reconstruction", suite_reconstruction),
        ("squarefn", suite_squarefn),
        ("chains", suite_chains),
    ];
    all.into_iter()
        .filter(|(name, _)| which == "all" || which == *name)
        .map(|(_, f)| f(cfg))
        .collect()
}

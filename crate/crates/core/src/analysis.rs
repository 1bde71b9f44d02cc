//! Smoothness-exponent estimation from scale decay and equivalence-ratio
//! studies across the functionals.
//!
//! The decay statistic of choice is the sup norm of `f - B_t f` (or its
//! higher-order / first-difference analogue) per ladder rung; the fitted
//! log-log slope recovers the smoothness order up to the statistic's
//! saturation ceiling. Equivalence constants between the functionals are
//! never asserted as fixed values: they are measured per corpus and
//! checked for resolution stability.

use std::fmt::Write as _;

use crate::balls;
use crate::error::{Error, Result};
use crate::functionals::{
    area_functional, difference_functional, fourier_tl_norm, g_functional, gstar_functional,
    NormReport,
};
use crate::grid::{lp_norm, GridFunction, QExp, ScaleLadder, SpaceParams};
use crate::kernels::{
    apply_ball_average, apply_higher_average, build_filter_bank, build_filter_bank_alt,
};
use crate::synth::{generate, GeneratorKind, GeneratorSpec};

/// Per-rung decay statistic for slope fitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SlopeStatistic {
    /// `sup_x |f - B_t f|`; registers smoothness up to order 2.
    BallAverage,
    /// `sup_x |f - B_(l,t) f|`; registers up to order `2 ell`.
    HigherAverage(u32),
    /// `sup_x sup_(y in B(x,t)) |f(x) - f(y)|`; saturates at order 1.
    FirstDifference,
}

impl SlopeStatistic {
    pub fn tag(&self) -> String {
        match self {
            SlopeStatistic::BallAverage => "ball".into(),
            SlopeStatistic::HigherAverage(ell) => format!("higher({ell})"),
            SlopeStatistic::FirstDifference => "difference".into(),
        }
    }
}

/// A fitted decay exponent.
#[derive(Debug, Clone)]
pub struct SlopeFit {
    pub statistic: SlopeStatistic,
    /// `(t_k, statistic value)` per admissible rung.
    pub samples: Vec<(f64, f64)>,
    pub alpha_hat: f64,
    /// RMS residual of the least-squares fit in log2 units.
    pub residual: f64,
    /// Statistic was identically zero; `alpha_hat` carries no information.
    pub flat: bool,
}

impl SlopeFit {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "statistic={}", self.statistic.tag());
        for (t, v) in &self.samples {
            let _ = writeln!(out, "t={t} value={v:e}");
        }
        if self.flat {
            let _ = writeln!(out, "alpha_hat=flat");
        } else {
            let _ = writeln!(out, "alpha_hat={:.4}", self.alpha_hat);
            let _ = writeln!(out, "residual={:.3e}", self.residual);
        }
        out
    }
}

/// Least-squares slope of `log2(statistic)` against `-k` over the ladder.
///
/// Uses the sup norm by default; pass `lp = Some(p)` for the `L^p` flavor.
pub fn estimate_alpha_with_norm(
    f: &GridFunction,
    ladder: &ScaleLadder,
    statistic: SlopeStatistic,
    lp: Option<f64>,
) -> Result<SlopeFit> {
    ladder.check_grid(f)?;
    let measure = |field: &GridFunction| match lp {
        Some(p) => lp_norm(field, p),
        None => field.sup_norm(),
    };
    let mut samples = Vec::new();
    for (_, t) in ladder.rungs() {
        let value = match statistic {
            SlopeStatistic::BallAverage => measure(&f.sub(&apply_ball_average(f, t)?)?),
            SlopeStatistic::HigherAverage(ell) => {
                if ell as f64 * t > 0.25 {
                    continue; // rung not admissible for the dilated scales
                }
                measure(&f.sub(&apply_higher_average(f, t, ell)?)?)
            }
            SlopeStatistic::FirstDifference => {
                let sup_diff = balls::difference_average(f, t, None)?;
                measure(&sup_diff)
            }
        };
        samples.push((t, value));
    }
    if samples.len() < 4 {
        return Err(Error::ParamDomain(format!(
            "slope fit needs >= 4 admissible rungs, got {}",
            samples.len()
        )));
    }
    let scale = f.sup_norm();
    if samples.iter().all(|(_, v)| *v <= 1e-14 * scale.max(1.0)) {
        return Ok(SlopeFit {
            statistic,
            samples,
            alpha_hat: 0.0,
            residual: 0.0,
            flat: true,
        });
    }
    // regress log2 v on log2(1/t); all rungs enter, residuals expose bad fits
    let points: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(_, v)| *v > 0.0)
        .map(|(t, v)| (-t.log2(), v.log2()))
        .collect();
    if points.len() < 4 {
        return Err(Error::ParamDomain(
            "slope fit needs >= 4 rungs with positive statistic".into(),
        ));
    }
    let (slope, residual) = least_squares_slope(&points);
    Ok(SlopeFit {
        statistic,
        samples,
        alpha_hat: -slope,
        residual,
        flat: false,
    })
}

/// Sup-norm slope fit; see [`estimate_alpha_with_norm`].
pub fn estimate_alpha(
    f: &GridFunction,
    ladder: &ScaleLadder,
    statistic: SlopeStatistic,
) -> Result<SlopeFit> {
    estimate_alpha_with_norm(f, ladder, statistic, None)
}

fn least_squares_slope(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|(x, _)| x).sum();
    let sy: f64 = points.iter().map(|(_, y)| y).sum();
    let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = points.iter().map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let ss: f64 = points
        .iter()
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    // slope of log2 v against log2(1/t) is -alpha
    (slope, (ss / n).sqrt())
}

/// One corpus member evaluated by one functional at one resolution.
#[derive(Debug, Clone)]
pub struct EquivalenceEntry {
    pub label: String,
    pub resolution: usize,
    pub functional: String,
    pub norm: f64,
    /// `norm / fourier norm` of the same member and resolution; None for
    /// the reference itself and for excluded members.
    pub ratio: Option<f64>,
}

/// Ratios of every functional against the Fourier-side reference across a
/// corpus and a resolution sweep.
#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub params: SpaceParams,
    pub resolutions: Vec<usize>,
    pub entries: Vec<EquivalenceEntry>,
    /// Members excluded from ratio statistics (difference part exactly
    /// zero, e.g. constants).
    pub excluded: Vec<String>,
}

/// Reference functional tag.
pub const REFERENCE: &str = "fourier";

impl EquivalenceReport {
    pub fn functionals(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for e in &self.entries {
            if !out.contains(&e.functional) {
                out.push(e.functional.clone());
            }
        }
        out
    }

    pub fn labels(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for e in &self.entries {
            if !out.contains(&e.label) && !self.excluded.contains(&e.label) {
                out.push(e.label.clone());
            }
        }
        out
    }

    fn ratio_of(&self, label: &str, functional: &str, resolution: usize) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.label == label && e.functional == functional && e.resolution == resolution)
            .and_then(|e| e.ratio)
    }

    /// `[min, max]` of `ratio(f1)/ratio(f2)` over members and resolutions.
    pub fn pair_bracket(&self, f1: &str, f2: &str) -> Option<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        let mut seen = false;
        for label in self.labels() {
            for &res in &self.resolutions {
                let a = self.ratio_of(&label, f1, res)?;
                let b = self.ratio_of(&label, f2, res)?;
                if b > 0.0 {
                    lo = lo.min(a / b);
                    hi = hi.max(a / b);
                    seen = true;
                }
            }
        }
        seen.then_some((lo, hi))
    }

    /// Max over members of `|ratio(last)/ratio(first) - 1|` for one
    /// functional.
    pub fn drift(&self, functional: &str) -> Option<f64> {
        let first = *self.resolutions.first()?;
        let last = *self.resolutions.last()?;
        let mut worst = 0.0f64;
        for label in self.labels() {
            let a = self.ratio_of(&label, functional, first)?;
            let b = self.ratio_of(&label, functional, last)?;
            if a > 0.0 {
                worst = worst.max((b / a - 1.0).abs());
            }
        }
        Some(worst)
    }

    /// CSV: one row per member x functional x resolution.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,resolution,functional,norm,ratio_to_fourier\n");
        for e in &self.entries {
            let ratio = e
                .ratio
                .map(|r| format!("{r}"))
                .unwrap_or_else(|| "".into());
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                e.label, e.resolution, e.functional, e.norm, ratio
            );
        }
        out
    }

    /// Aligned plain-text table plus drift lines.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<20} {:>6} {:<12} {:>14} {:>10}",
            "member", "N", "functional", "norm", "ratio"
        );
        for e in &self.entries {
            let ratio = e
                .ratio
                .map(|r| format!("{r:.4}"))
                .unwrap_or_else(|| "-".into());
            let _ = writeln!(
                out,
                "{:<20} {:>6} {:<12} {:>14.6e} {:>10}",
                e.label, e.resolution, e.functional, e.norm, ratio
            );
        }
        for func in self.functionals() {
            if func == REFERENCE {
                continue;
            }
            if let Some(d) = self.drift(&func) {
                let _ = writeln!(out, "drift {func}: {d:.4}");
            }
        }
        // pairwise brackets, upper triangle (the rest is reciprocal)
        let funcs = self.functionals();
        for (i, f1) in funcs.iter().enumerate() {
            for f2 in funcs.iter().skip(i + 1) {
                if let Some((lo, hi)) = self.pair_bracket(f1, f2) {
                    let _ = writeln!(out, "bracket {f1}/{f2}: [{lo:.4}, {hi:.4}]");
                }
            }
        }
        for label in &self.excluded {
            let _ = writeln!(out, "excluded from ratios (zero detail part): {label}");
        }
        out
    }
}

/// Compute every applicable functional on every corpus member at every
/// resolution, with ratios against the Fourier-side reference.
pub fn equivalence_study(
    corpus: &[GeneratorSpec],
    params: &SpaceParams,
    resolutions: &[usize],
) -> Result<EquivalenceReport> {
    if corpus.is_empty() {
        return Err(Error::ParamDomain("corpus is empty".into()));
    }
    if resolutions.is_empty() {
        return Err(Error::ParamDomain("no resolutions given".into()));
    }
    params.validate()?;
    let bank = build_filter_bank()?;
    let bank_alt = build_filter_bank_alt()?;
    let lambda = params.lambda.unwrap_or(2.0);
    let mut entries = Vec::new();
    let mut excluded = Vec::new();
    for spec in corpus {
        for &n in resolutions {
            let spec_n = spec.with_resolution(n);
            let f = generate(&spec_n)?;
            let ladder = crate::grid::make_ladder(n, 2)?;
            let reference = fourier_tl_norm(&f, params, &ladder, &bank)?;
            let mut members: Vec<(String, NormReport)> = vec![
                ("fourier".into(), reference.clone()),
                (
                    "fourier-alt".into(),
                    fourier_tl_norm(&f, params, &ladder, &bank_alt)?,
                ),
                ("g".into(), g_functional(&f, params, &ladder)?),
                (
                    "area-r1".into(),
                    area_functional(&f, params, &ladder, 1.0, 1.0)?,
                ),
            ];
            if let QExp::Finite(q) = params.q {
                members.push((
                    "area-tilde".into(),
                    area_functional(&f, params, &ladder, q, 1.0)?,
                ));
                members.push((
                    "gstar".into(),
                    gstar_functional(&f, params, &ladder, lambda)?,
                ));
            }
            if params.alpha < 1.0 {
                members.push((
                    "difference".into(),
                    difference_functional(&f, params, &ladder)?,
                ));
            }
            // constants and other detail-free members leave the ratio
            // matrix: their ratios are exact-zero pairs
            let detail_free = members
                .iter()
                .all(|(_, rep)| rep.detail_term <= 1e-12 * rep.base_term.max(1e-300));
            let label = spec.label();
            if detail_free && !excluded.contains(&label) {
                excluded.push(label.clone());
            }
            for (name, rep) in members {
                let ratio = if detail_free || reference.norm == 0.0 {
                    None
                } else {
                    Some(rep.norm / reference.norm)
                };
                entries.push(EquivalenceEntry {
                    label: label.clone(),
                    resolution: n,
                    functional: name,
                    norm: rep.norm,
                    ratio,
                });
            }
        }
    }
    Ok(EquivalenceReport {
        params: *params,
        resolutions: resolutions.to_vec(),
        entries,
        excluded,
    })
}

/// The six-member study corpus (one-dimensional). Fixed seeds, fixed
/// mollification and generation parameters, so the same continuum function
/// is sampled at every resolution from 512 up.
pub fn standard_corpus() -> Vec<GeneratorSpec> {
    vec![
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
                terms: 7,
                seed: 202,
            },
            1,
            512,
        ),
        // fewer terms here: the coarsest study ladder (N = 512) must
        // already resolve the top mode, or ratios keep drifting while
        // deeper ladders uncover truncation-scale mass
        GeneratorSpec::new(
            GeneratorKind::Weierstrass {
                alpha0: 0.4,
                terms: 5,
                seed: 303,
            },
            1,
            512,
        ),
        GeneratorSpec::new(
            GeneratorKind::Bandlimited {
                max_mode: 16,
                exponent: 1.0,
                seed: 404,
            },
            1,
            512,
        ),
        GeneratorSpec::new(GeneratorKind::Gaussian { width: 1.0 / 32.0 }, 1, 512),
        GeneratorSpec::new(
            GeneratorKind::Cusp {
                alpha0: 0.8,
                center: 0.5,
                width: Some(1.0 / 128.0),
            },
            1,
            512,
        ),
    ]
}

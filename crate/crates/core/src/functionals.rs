//! The norm functionals built from `f - B_t f`: the g-function, the
//! Lusin-area family with inner `r`-averages over dilated balls, the
//! `g*_lambda` functional with the smooth weight `(t/(t+|x-y|))^(lambda n)`,
//! the Fourier-side reference norm, the first-difference comparator, and
//! the large-scale tail bound.
//!
//! The measure `dt/t` over `t in (0,1)` is discretized as `ln 2` times the
//! sum over dyadic ladder rungs; `q = inf` takes sups over the ladder.

use std::fmt::Write as _;

use crate::balls;
use crate::error::{Error, Result};
use crate::grid::{lp_norm, GridFunction, QExp, ScaleLadder, SpaceParams, RUNG_WEIGHT};
use crate::kernels::{apply_ball_average, apply_filter, FilterBank, FilterRung};
use crate::pointwise::hl_maximal;

/// Values `F(x, t_k)` over grid x dyadic ladder.
#[derive(Debug, Clone)]
pub struct TimeSpaceField {
    ladder: ScaleLadder,
    rungs: Vec<GridFunction>,
}

impl TimeSpaceField {
    /// All rungs must share one grid geometry, coarsest rung first.
    pub fn new(ladder: ScaleLadder, rungs: Vec<GridFunction>) -> Result<Self> {
        if rungs.len() != ladder.num_rungs() {
            return Err(Error::ParamDomain(format!(
                "field has {} rungs, ladder has {}",
                rungs.len(),
                ladder.num_rungs()
            )));
        }
        for r in &rungs[1..] {
            rungs[0].check_same_geometry(r)?;
        }
        ladder.check_grid(&rungs[0])?;
        Ok(Self { ladder, rungs })
    }

    pub fn ladder(&self) -> &ScaleLadder {
        &self.ladder
    }

    pub fn rung(&self, k: i32) -> &GridFunction {
        &self.rungs[(k - self.ladder.k_min()) as usize]
    }

    pub fn grid_dim(&self) -> usize {
        self.rungs[0].dim()
    }

    pub fn samples_per_axis(&self) -> usize {
        self.rungs[0].samples_per_axis()
    }

    /// Ball differences of `f`: rung `k` holds `f - B_(t_k) f`.
    pub fn ball_differences(f: &GridFunction, ladder: &ScaleLadder) -> Result<Self> {
        let mut rungs = Vec::with_capacity(ladder.num_rungs());
        for (_, t) in ladder.rungs() {
            rungs.push(f.sub(&apply_ball_average(f, t)?)?);
        }
        Self::new(*ladder, rungs)
    }
}

/// `G(F)(x) = (ln2 sum_k |F(x,t_k)|^q)^(1/q)`.
pub fn g_of_field(field: &TimeSpaceField, q: f64) -> Result<GridFunction> {
    check_finite_q(q)?;
    let mut acc = vec![0.0; field.rungs[0].len()];
    for rung in &field.rungs {
        for (a, v) in acc.iter_mut().zip(rung.values()) {
            *a += v.abs().powf(q);
        }
    }
    finish_q(field, acc, q)
}

/// `S_beta(F)(x) = (ln2 sum_k avg_(B(x, beta t_k)) |F(y,t_k)|^q dy)^(1/q)`.
pub fn area_of_field(field: &TimeSpaceField, q: f64, beta: f64) -> Result<GridFunction> {
    check_finite_q(q)?;
    if beta < 1.0 {
        return Err(Error::ParamDomain(format!("beta must be >= 1, got {beta}")));
    }
    let mut acc = vec![0.0; field.rungs[0].len()];
    for (k, t) in field.ladder.rungs() {
        let radius = beta * t;
        if radius > 0.25 {
            return Err(Error::ScaleOutOfRange {
                t: radius,
                lo: 2.0 * field.rungs[0].spacing(),
                hi: 0.25,
            });
        }
        let pow = field.rung(k).map(|v| v.abs().powf(q))?;
        let avg = balls::ball_average(&pow, radius)?;
        for (a, v) in acc.iter_mut().zip(avg.values()) {
            *a += v;
        }
    }
    finish_q(field, acc, q)
}

/// `G*_lambda(F)(x) = (ln2 sum_k sum_y (t_k/(t_k+d(x,y)))^(lambda n)
/// |F(y,t_k)|^q dx^n/t_k^n)^(1/q)`, with the weight truncated below
/// `1e-6` of its center value.
pub fn gstar_of_field(field: &TimeSpaceField, q: f64, lambda: f64) -> Result<GridFunction> {
    check_finite_q(q)?;
    if lambda <= 1.0 {
        return Err(Error::ParamDomain(format!(
            "lambda must be > 1, got {lambda}"
        )));
    }
    let dim = field.grid_dim();
    let n = field.samples_per_axis();
    let mut acc = vec![0.0; field.rungs[0].len()];
    for (k, t) in field.ladder.rungs() {
        let table = balls::gstar_weight_table(dim, n, t, lambda, GSTAR_WEIGHT_CUTOFF);
        let pow = field.rung(k).map(|v| v.abs().powf(q))?;
        let weighted = table.apply(&pow);
        for (a, v) in acc.iter_mut().zip(weighted.values()) {
            *a += v;
        }
    }
    finish_q(field, acc, q)
}

/// Relative truncation of the `g*_lambda` weight.
pub const GSTAR_WEIGHT_CUTOFF: f64 = 1e-6;

fn check_finite_q(q: f64) -> Result<()> {
    if q.is_finite() && q > 1.0 {
        Ok(())
    } else {
        Err(Error::ParamDomain(format!(
            "this square function requires finite q in (1, infinity), got {q}"
        )))
    }
}

fn finish_q(field: &TimeSpaceField, acc: Vec<f64>, q: f64) -> Result<GridFunction> {
    let vals = acc
        .into_iter()
        .map(|a| (RUNG_WEIGHT * a).powf(1.0 / q))
        .collect();
    GridFunction::new(field.grid_dim(), field.samples_per_axis(), vals)
}

/// How the base term of a report was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseTerm {
    /// `||f||_p` added to the detail term.
    LpOfF,
    /// `||Phi * f||_p` (Fourier-side reference norm).
    BaseFilter,
}

/// Result of one functional: the per-point field, its `L^p` norm, and the
/// base term the norm includes.
#[derive(Debug, Clone)]
pub struct NormReport {
    pub functional: String,
    pub params: SpaceParams,
    pub pointwise: GridFunction,
    pub base_kind: BaseTerm,
    pub base_term: f64,
    pub detail_term: f64,
    pub norm: f64,
    pub ladder: ScaleLadder,
    pub warning: Option<String>,
}

impl NormReport {
    fn assemble(
        functional: &str,
        params: &SpaceParams,
        ladder: &ScaleLadder,
        f: &GridFunction,
        pointwise: GridFunction,
        base_kind: BaseTerm,
        base_field: Option<&GridFunction>,
    ) -> Self {
        let base_term = match base_kind {
            BaseTerm::LpOfF => lp_norm(f, params.p),
            BaseTerm::BaseFilter => lp_norm(base_field.expect("base filter field"), params.p),
        };
        let detail_term = lp_norm(&pointwise, params.p);
        NormReport {
            functional: functional.to_string(),
            params: *params,
            pointwise,
            base_kind,
            base_term,
            detail_term,
            norm: base_term + detail_term,
            ladder: *ladder,
            warning: None,
        }
    }

    /// Flat key=value block.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "functional={}", self.functional);
        let _ = writeln!(out, "alpha={}", self.params.alpha);
        let _ = writeln!(out, "p={}", self.params.p);
        let _ = writeln!(out, "q={}", self.params.q);
        if let Some(r) = self.params.r {
            let _ = writeln!(out, "r={r}");
        }
        if let Some(l) = self.params.lambda {
            let _ = writeln!(out, "lambda={l}");
        }
        if let Some(b) = self.params.beta {
            let _ = writeln!(out, "beta={b}");
        }
        let _ = writeln!(out, "dim={}", self.pointwise.dim());
        let _ = writeln!(out, "N={}", self.pointwise.samples_per_axis());
        let _ = writeln!(
            out,
            "k_min={} k_max={}",
            self.ladder.k_min(),
            self.ladder.k_max()
        );
        let kind = match self.base_kind {
            BaseTerm::LpOfF => "lp_f",
            BaseTerm::BaseFilter => "base_filter",
        };
        let _ = writeln!(out, "base_kind={kind}");
        let _ = writeln!(out, "base_term={}", self.base_term);
        let _ = writeln!(out, "detail_term={}", self.detail_term);
        let _ = writeln!(out, "norm={}", self.norm);
        if let Some(w) = &self.warning {
            let _ = writeln!(out, "warning={w}");
        }
        out
    }
}

fn validate_common(f: &GridFunction, params: &SpaceParams, ladder: &ScaleLadder) -> Result<()> {
    params.validate()?;
    ladder.check_grid(f)
}

/// Aggregate nonnegative per-rung fields with the `2^(k alpha)` weight:
/// `(ln2 sum_k 2^(k alpha q) field_k^q)^(1/q)`, sup over rungs for
/// `q = inf`.
fn aggregate(
    per_rung: &[(i32, GridFunction)],
    alpha: f64,
    q: QExp,
    dim: usize,
    n: usize,
) -> Result<GridFunction> {
    let len = per_rung[0].1.len();
    match q {
        QExp::Finite(qv) => {
            let mut acc = vec![0.0; len];
            for (k, field) in per_rung {
                let weight = (2f64).powf(*k as f64 * alpha * qv);
                for (a, v) in acc.iter_mut().zip(field.values()) {
                    *a += weight * v.powf(qv);
                }
            }
            GridFunction::new(
                dim,
                n,
                acc.into_iter()
                    .map(|a| (RUNG_WEIGHT * a).powf(1.0 / qv))
                    .collect(),
            )
        }
        QExp::Infinity => {
            let mut acc = vec![0.0f64; len];
            for (k, field) in per_rung {
                let weight = (2f64).powf(*k as f64 * alpha);
                for (a, v) in acc.iter_mut().zip(field.values()) {
                    *a = a.max(weight * v);
                }
            }
            GridFunction::new(dim, n, acc)
        }
    }
}

/// The g-function norm: `||f||_p + || (ln2 sum_k 2^(k alpha q)
/// |f - B_(t_k) f|^q)^(1/q) ||_p`.
pub fn g_functional(
    f: &GridFunction,
    params: &SpaceParams,
    ladder: &ScaleLadder,
) -> Result<NormReport> {
    validate_common(f, params, ladder)?;
    let mut per_rung = Vec::new();
    for (k, t) in ladder.rungs() {
        let diff = f.sub(&apply_ball_average(f, t)?)?;
        per_rung.push((k, diff.map(f64::abs)?));
    }
    let field = aggregate(&per_rung, params.alpha, params.q, f.dim(), f.samples_per_axis())?;
    Ok(NormReport::assemble(
        "g",
        params,
        ladder,
        f,
        field,
        BaseTerm::LpOfF,
        None,
    ))
}

/// Area functional with inner `r`-average over `B(x, beta t)`:
/// `||f||_p + || (ln2 sum_k 2^(k alpha q) [avg_(B(., beta t_k))
/// |f - B_(t_k) f|^r]^(q/r))^(1/q) ||_p`. `r = q` is the tilde variant.
pub fn area_functional(
    f: &GridFunction,
    params: &SpaceParams,
    ladder: &ScaleLadder,
    r: f64,
    beta: f64,
) -> Result<NormReport> {
    let params = params.with_r(r).with_beta(beta);
    validate_common(f, &params, ladder)?;
    if beta * ladder.scale(ladder.k_min()) > 0.25 {
        return Err(Error::ScaleOutOfRange {
            t: beta * ladder.scale(ladder.k_min()),
            lo: 2.0 * f.spacing(),
            hi: 0.25,
        });
    }
    let mut per_rung = Vec::new();
    for (k, t) in ladder.rungs() {
        let diff = f.sub(&apply_ball_average(f, t)?)?;
        let pow = diff.map(|v| v.abs().powf(r))?;
        let inner = balls::ball_average(&pow, beta * t)?.map(|v| v.powf(1.0 / r))?;
        per_rung.push((k, inner));
    }
    let field = aggregate(&per_rung, params.alpha, params.q, f.dim(), f.samples_per_axis())?;
    Ok(NormReport::assemble(
        "area",
        &params,
        ladder,
        f,
        field,
        BaseTerm::LpOfF,
        None,
    ))
}

/// `g*_lambda` functional with the weight `(t/(t+|x-y|))^(lambda n)`;
/// requires finite `q`.
pub fn gstar_functional(
    f: &GridFunction,
    params: &SpaceParams,
    ladder: &ScaleLadder,
    lambda: f64,
) -> Result<NormReport> {
    let params = params.with_lambda(lambda);
    validate_common(f, &params, ladder)?;
    let q = match params.q {
        QExp::Finite(q) => q,
        QExp::Infinity => {
            return Err(Error::ParamDomain(
                "the g*_lambda functional requires finite q in (1, infinity)".into(),
            ))
        }
    };
    let diffs = TimeSpaceField::ball_differences(f, ladder)?;
    // fold the 2^(k alpha) weight into the field, then reuse the plain
    // square-function machinery
    let mut weighted = Vec::with_capacity(diffs.rungs.len());
    for (k, _) in ladder.rungs() {
        weighted.push(diffs.rung(k).scale((2f64).powf(k as f64 * params.alpha))?);
    }
    let field = gstar_of_field(&TimeSpaceField::new(*ladder, weighted)?, q, lambda)?;
    Ok(NormReport::assemble(
        "gstar",
        &params,
        ladder,
        f,
        field,
        BaseTerm::LpOfF,
        None,
    ))
}

/// Fourier-side reference norm `||Phi * f||_p + || (ln2 sum_k
/// 2^(k alpha q) |phi_(t_k) * f|^q)^(1/q) ||_p`.
pub fn fourier_tl_norm(
    f: &GridFunction,
    params: &SpaceParams,
    ladder: &ScaleLadder,
    bank: &FilterBank,
) -> Result<NormReport> {
    validate_common(f, params, ladder)?;
    let base = apply_filter(f, bank, ladder, FilterRung::Base)?;
    let mut per_rung = Vec::new();
    for (k, _) in ladder.rungs() {
        let piece = apply_filter(f, bank, ladder, FilterRung::Annulus(k))?;
        per_rung.push((k, piece.map(f64::abs)?));
    }
    let field = aggregate(&per_rung, params.alpha, params.q, f.dim(), f.samples_per_axis())?;
    Ok(NormReport::assemble(
        "fourier",
        params,
        ladder,
        f,
        field,
        BaseTerm::BaseFilter,
        Some(&base),
    ))
}

/// First-difference comparator `||f||_p + || (ln2 sum_k 2^(k alpha q)
/// avg_(B(., t_k)) |f(.) - f(y)|^q dy)^(1/q) ||_p`.
///
/// Meaningful as a space norm for `alpha in (0,1)`; permitted with a
/// warning up to 2 to demonstrate saturation.
pub fn difference_functional(
    f: &GridFunction,
    params: &SpaceParams,
    ladder: &ScaleLadder,
) -> Result<NormReport> {
    validate_common(f, params, ladder)?;
    let mut per_rung = Vec::new();
    for (k, t) in ladder.rungs() {
        let inner = match params.q {
            QExp::Finite(q) => {
                balls::difference_average(f, t, Some(q))?.map(|v| v.powf(1.0 / q))?
            }
            QExp::Infinity => balls::difference_average(f, t, None)?,
        };
        per_rung.push((k, inner));
    }
    let field = aggregate(&per_rung, params.alpha, params.q, f.dim(), f.samples_per_axis())?;
    let mut report = NormReport::assemble(
        "difference",
        params,
        ladder,
        f,
        field,
        BaseTerm::LpOfF,
        None,
    );
    if params.alpha >= 1.0 {
        report.warning = Some(format!(
            "alpha={} is at or above the first-difference saturation order 1; \
             the detail term grows with ladder depth instead of converging",
            params.alpha
        ));
    }
    Ok(report)
}

/// Large-scale tail bound: on the torus the scales above 1/4 collapse to
/// the single largest admissible one, where `|f - B_t f| <= 2 M f`
/// pointwise. Returns the max ratio `|f - B_t f| / (2 M f)` (0 where both
/// vanish); it never exceeds 1.
pub fn tail_check(f: &GridFunction, params: &SpaceParams) -> Result<f64> {
    params.validate()?;
    let ladder = crate::grid::make_ladder(f.samples_per_axis(), 2)?;
    let t = 0.25;
    let diff = f.sub(&apply_ball_average(f, t)?)?;
    let maximal = hl_maximal(f, &ladder)?;
    let mut worst = 0.0f64;
    for (d, m) in diff.values().iter().zip(maximal.field().values()) {
        if *m > 0.0 {
            worst = worst.max(d.abs() / (2.0 * m));
        }
    }
    Ok(worst)
}

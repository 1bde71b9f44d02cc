//! Pointwise gradient certificates of Hajlasz type, the Hardy-Littlewood
//! maximal operator on the grid window set, and exhaustive verification of
//! the implication chains between the pointwise characterizations.
//!
//! A gradient candidate is a nonnegative field `g` certifying one of the
//! pointwise inequalities `|f - B_(Ct) f| <= Ctilde t^alpha * <g-term>`,
//! where the g-term ranges over `g` at the point, over a neighborhood, or
//! over ball averages. Canonical extractions take sups over the ladder, so
//! their defining inequality holds with no violations by construction;
//! imported candidates are checked, never trusted.

use std::fmt::Write as _;
use std::io::{BufRead, Read, Write};

use crate::balls;
use crate::error::{Error, Result};
use crate::grid::{read_gf1, write_gf1, GridFunction, ScaleLadder};
use crate::kernels::apply_ball_average;

/// Hardy-Littlewood maximal field over a restricted window set.
#[derive(Debug, Clone)]
pub struct MaximalField {
    field: GridFunction,
    radii: Vec<f64>,
}

impl MaximalField {
    pub fn field(&self) -> &GridFunction {
        &self.field
    }

    pub fn into_field(self) -> GridFunction {
        self.field
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }
}

/// Maximal function over the window set: the point itself, the discrete
/// balls with ladder radii, and the full torus.
pub fn hl_maximal(f: &GridFunction, ladder: &ScaleLadder) -> Result<MaximalField> {
    ladder.check_grid(f)?;
    let radii: Vec<f64> = ladder.rungs().map(|(_, t)| t).collect();
    let field = window_maximal(f, &radii)?;
    Ok(MaximalField { field, radii })
}

fn window_maximal(f: &GridFunction, radii: &[f64]) -> Result<GridFunction> {
    let abs = f.map(f64::abs)?;
    let mean = abs.values().iter().sum::<f64>() / abs.len() as f64;
    let mut best: Vec<f64> = abs.values().iter().map(|&v| v.max(mean)).collect();
    for &t in radii {
        let avg = balls::ball_average(&abs, t)?;
        for (b, v) in best.iter_mut().zip(avg.values()) {
            *b = b.max(*v);
        }
    }
    GridFunction::new(f.dim(), f.samples_per_axis(), best)
}

/// Which pointwise statement a gradient candidate certifies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GradientVariant {
    /// `|f - B_(Ct) f|(x) <= Ctilde t^a g(x)`.
    SupPoint,
    /// `|f - B_(Ct) f|(x) <= Ctilde t^a g(y)` for every `y in B(x, ct)`.
    SupNbhd,
    /// `sup_(z in B(x,t)) |f - B_(Ct) f|(z) <= Ctilde t^a avg_(B(x,ct)) g`.
    BallSup,
    /// `avg_(B(x,t)) |f - B_(Ct) f| <= Ctilde t^a avg_(B(x,ct)) g`.
    BallAvg,
    /// `[avg_(B(x,t)) |f - B_(Ct) f|^r]^(1/r) <= Ctilde t^a avg_(B(x,ct)) g`.
    BallRavg(f64),
    /// `sup / r-avg / avg over B(x,t)` all bounded by `Ctilde t^a g(x)`.
    PointCtr,
    /// `|f(x) - f(y)| <= d(x,y)^a [g(x) + g(y)]` for all pairs.
    Hajlasz,
}

impl GradientVariant {
    pub fn tag(&self) -> &'static str {
        match self {
            GradientVariant::SupPoint => "sup-point",
            GradientVariant::SupNbhd => "sup-nbhd",
            GradientVariant::BallSup => "ball-sup",
            GradientVariant::BallAvg => "ball-avg",
            GradientVariant::BallRavg(_) => "ball-ravg",
            GradientVariant::PointCtr => "point-ctr",
            GradientVariant::Hajlasz => "hajlasz",
        }
    }
}

/// The constants `(c, C, Ctilde)`: neighborhood dilation, scale dilation,
/// and the multiplicative slack. Canonical extractions use 1 everywhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientConstants {
    pub c: f64,
    pub cap_c: f64,
    pub tilde_c: f64,
}

impl Default for GradientConstants {
    fn default() -> Self {
        Self {
            c: 1.0,
            cap_c: 1.0,
            tilde_c: 1.0,
        }
    }
}

/// A nonnegative certificate field plus the statement it certifies.
#[derive(Debug, Clone)]
pub struct GradientCandidate {
    pub g: GridFunction,
    pub variant: GradientVariant,
    pub constants: GradientConstants,
    pub alpha: f64,
    pub ladder: ScaleLadder,
}

/// One verified inequality: how many point-scale pairs were checked, how
/// many failed, and the worst ratio of left to right side.
#[derive(Debug, Clone)]
pub struct CheckStat {
    pub name: String,
    pub checked: usize,
    pub violations: usize,
    pub max_defect: f64,
    pub constants: String,
}

impl CheckStat {
    fn new(name: &str, constants: String) -> Self {
        Self {
            name: name.to_string(),
            checked: 0,
            violations: 0,
            max_defect: 0.0,
            constants,
        }
    }

    fn record(&mut self, lhs: f64, rhs: f64, scale: f64) {
        self.checked += 1;
        if rhs > 0.0 {
            self.max_defect = self.max_defect.max(lhs / rhs);
        } else if lhs > 1e-12 * scale {
            self.max_defect = f64::INFINITY;
        }
        if lhs > rhs * (1.0 + 1e-9) + 1e-13 * scale {
            self.violations += 1;
        }
    }
}

/// Report of `verify_implications` / candidate construction checks.
#[derive(Debug, Clone, Default)]
pub struct ImplicationReport {
    pub checks: Vec<CheckStat>,
}

impl ImplicationReport {
    pub fn total_violations(&self) -> usize {
        self.checks.iter().map(|c| c.violations).sum()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let _ = writeln!(
                out,
                "check={} checked={} violations={} max_defect={:.6e} {}",
                c.name, c.checked, c.violations, c.max_defect, c.constants
            );
        }
        out
    }
}

fn scale_admissible(f: &GridFunction, ladder: &ScaleLadder, cap_c: f64) -> Result<()> {
    for (_, t) in ladder.rungs() {
        let dilated = cap_c * t;
        if dilated < 2.0 * f.spacing() || dilated > 0.25 {
            return Err(Error::ScaleOutOfRange {
                t: dilated,
                lo: 2.0 * f.spacing(),
                hi: 0.25,
            });
        }
    }
    Ok(())
}

fn dilated_differences(
    f: &GridFunction,
    ladder: &ScaleLadder,
    cap_c: f64,
) -> Result<Vec<(i32, f64, GridFunction)>> {
    let mut out = Vec::with_capacity(ladder.num_rungs());
    for (k, t) in ladder.rungs() {
        let diff = f.sub(&apply_ball_average(f, cap_c * t)?)?;
        out.push((k, t, diff.map(f64::abs)?));
    }
    Ok(out)
}

/// Pointwise max of `t^-alpha * field_k` over the ladder.
fn sup_over_rungs(items: &[(f64, GridFunction)], alpha: f64) -> GridFunction {
    let (dim, n) = (items[0].1.dim(), items[0].1.samples_per_axis());
    let mut acc = vec![0.0f64; items[0].1.len()];
    for (t, field) in items {
        let w = t.powf(-alpha);
        for (a, v) in acc.iter_mut().zip(field.values()) {
            *a = a.max(w * v);
        }
    }
    GridFunction::new(dim, n, acc).expect("max of finite values")
}

/// Extract the canonical minimal certificate for a variant: sups of
/// `t^-alpha |f - B_(Ct) f|` possibly spread over neighborhoods or inner
/// ball statistics. The defining inequality is rechecked on construction.
pub fn extract_gradient(
    f: &GridFunction,
    alpha: f64,
    ladder: &ScaleLadder,
    variant: GradientVariant,
    constants: GradientConstants,
) -> Result<GradientCandidate> {
    if !(0.0 < alpha && alpha < 2.0) {
        return Err(Error::ParamDomain(format!(
            "alpha must lie in (0, 2), got {alpha}"
        )));
    }
    if constants.c <= 0.0 || constants.cap_c <= 0.0 || constants.tilde_c <= 0.0 {
        return Err(Error::ParamDomain(
            "gradient constants must be positive".into(),
        ));
    }
    ladder.check_grid(f)?;
    let g = match variant {
        GradientVariant::Hajlasz => {
            check_pair_budget(f)?;
            hajlasz_pairwise_certificate(f, alpha)?
        }
        _ => {
            scale_admissible(f, ladder, constants.cap_c)?;
            let diffs = dilated_differences(f, ladder, constants.cap_c)?;
            let mut per_rung = Vec::with_capacity(diffs.len());
            for (_, t, abs_diff) in &diffs {
                let local = match variant {
                    GradientVariant::SupPoint => abs_diff.clone(),
                    GradientVariant::SupNbhd => spread_sup(abs_diff, constants.c * t)?,
                    GradientVariant::BallSup => {
                        let lhs = balls::ball_extreme(abs_diff, *t, true)?;
                        spread_sup(&lhs, constants.c * t)?
                    }
                    GradientVariant::BallAvg => {
                        let lhs = balls::ball_average(abs_diff, *t)?;
                        spread_sup(&lhs, constants.c * t)?
                    }
                    GradientVariant::BallRavg(r) => {
                        if r < 1.0 {
                            return Err(Error::ParamDomain(format!(
                                "r must be >= 1, got {r}"
                            )));
                        }
                        let lhs = r_average(abs_diff, *t, r)?;
                        spread_sup(&lhs, constants.c * t)?
                    }
                    GradientVariant::PointCtr => balls::ball_extreme(abs_diff, *t, true)?,
                    GradientVariant::Hajlasz => unreachable!(),
                };
                per_rung.push((*t, local));
            }
            sup_over_rungs(&per_rung, alpha).scale(1.0 / constants.tilde_c)?
        }
    };
    let cand = GradientCandidate {
        g,
        variant,
        constants,
        alpha,
        ladder: *ladder,
    };
    let defining = check_defining(f, &cand)?;
    if defining.total_violations() > 0 {
        return Err(Error::ParamDomain(format!(
            "canonical extraction failed its own defining inequality: {}",
            defining.to_text()
        )));
    }
    Ok(cand)
}

/// Sup over `B(., radius)`; degenerates to the identity when the ball
/// holds only the center.
fn spread_sup(field: &GridFunction, radius: f64) -> Result<GridFunction> {
    balls::ball_extreme(field, radius.min(0.5), true)
}

fn r_average(field: &GridFunction, t: f64, r: f64) -> Result<GridFunction> {
    balls::ball_average(&field.map(|v| v.abs().powf(r))?, t)?.map(|v| v.powf(1.0 / r))
}

/// Check the defining inequality of the candidate's variant at every node
/// and rung. Zero violations expected; violations are report content.
pub fn check_defining(f: &GridFunction, cand: &GradientCandidate) -> Result<ImplicationReport> {
    let mut report = ImplicationReport::default();
    let consts = format!(
        "c={} C={} Ctilde={}",
        cand.constants.c, cand.constants.cap_c, cand.constants.tilde_c
    );
    if let GradientVariant::Hajlasz = cand.variant {
        let h = hajlasz_verify(f, &cand.g, cand.alpha)?;
        let mut stat = CheckStat::new("defining-hajlasz", consts);
        stat.checked = h.pairs_checked;
        stat.violations = h.violations;
        stat.max_defect = h.max_defect;
        report.checks.push(stat);
        return Ok(report);
    }
    scale_admissible(f, &cand.ladder, cand.constants.cap_c)?;
    let diffs = dilated_differences(f, &cand.ladder, cand.constants.cap_c)?;
    let fscale = f.sup_norm().max(1.0);
    let ct = cand.constants.tilde_c;
    let mut stat = CheckStat::new(&format!("defining-{}", cand.variant.tag()), consts);
    for (_, t, abs_diff) in &diffs {
        let ta = t.powf(cand.alpha);
        let rhs_core: GridFunction = match cand.variant {
            GradientVariant::SupPoint | GradientVariant::PointCtr => cand.g.clone(),
            GradientVariant::SupNbhd => balls::ball_extreme(&cand.g, cand.constants.c * t, false)?,
            GradientVariant::BallSup
            | GradientVariant::BallAvg
            | GradientVariant::BallRavg(_) => {
                balls::ball_average(&cand.g, (cand.constants.c * t).min(0.5))?
            }
            GradientVariant::Hajlasz => unreachable!("handled above"),
        };
        let lhs: Vec<GridFunction> = match cand.variant {
            GradientVariant::SupPoint | GradientVariant::SupNbhd => vec![abs_diff.clone()],
            GradientVariant::BallSup => vec![balls::ball_extreme(abs_diff, *t, true)?],
            GradientVariant::BallAvg => vec![balls::ball_average(abs_diff, *t)?],
            GradientVariant::BallRavg(r) => vec![r_average(abs_diff, *t, r)?],
            GradientVariant::PointCtr => vec![
                balls::ball_extreme(abs_diff, *t, true)?,
                r_average(abs_diff, *t, 2.0)?,
                balls::ball_average(abs_diff, *t)?,
            ],
            GradientVariant::Hajlasz => unreachable!(),
        };
        for l in &lhs {
            for (lv, rv) in l.values().iter().zip(rhs_core.values()) {
                stat.record(*lv, ct * ta * rv, fscale);
            }
        }
    }
    report.checks.push(stat);
    Ok(report)
}

/// Rebuild each implied statement the way the equivalence proofs do and
/// check the resulting inequality exhaustively. Expected: no violations.
pub fn verify_implications(
    f: &GridFunction,
    cand: &GradientCandidate,
    ladder: &ScaleLadder,
) -> Result<ImplicationReport> {
    let mut report = check_defining(f, cand)?;
    if let GradientVariant::Hajlasz = cand.variant {
        return Ok(report);
    }
    let consts = &cand.constants;
    let diffs = dilated_differences(f, ladder, consts.cap_c)?;
    let fscale = f.sup_norm().max(1.0);
    let ct = consts.tilde_c;
    let alpha = cand.alpha;
    let g = &cand.g;
    let dim = f.dim() as i32;
    let tag = |name: &str| format!("{}->{}", cand.variant.tag(), name);

    match cand.variant {
        GradientVariant::SupPoint => {
            // integrating the pointwise bound over balls preserves it for
            // every statistic (avg, power mean, sup), with g on each side
            let mut avg_stat = CheckStat::new(&tag("ball-average"), String::new());
            let mut rms_stat = CheckStat::new(&tag("ball-r-average"), "r=2".into());
            let mut sup_stat = CheckStat::new(&tag("ball-sup"), String::new());
            let mut maximal_stat = CheckStat::new(&tag("maximal-majorant"), "q=2".into());
            let radii: Vec<f64> = ladder.rungs().map(|(_, t)| t).collect();
            let mg2 = window_maximal(&g.map(|v| v * v)?, &radii)?.map(f64::sqrt)?;
            for (_, t, abs_diff) in &diffs {
                let ta = ct * t.powf(alpha);
                let lhs_avg = balls::ball_average(abs_diff, *t)?;
                let rhs_avg = balls::ball_average(g, *t)?;
                let lhs_rms = r_average(abs_diff, *t, 2.0)?;
                let rhs_rms = r_average(g, *t, 2.0)?;
                let lhs_sup = balls::ball_extreme(abs_diff, *t, true)?;
                let rhs_sup = balls::ball_extreme(g, *t, true)?;
                for i in 0..abs_diff.len() {
                    avg_stat.record(lhs_avg.values()[i], ta * rhs_avg.values()[i], fscale);
                    rms_stat.record(lhs_rms.values()[i], ta * rhs_rms.values()[i], fscale);
                    sup_stat.record(lhs_sup.values()[i], ta * rhs_sup.values()[i], fscale);
                    maximal_stat.record(abs_diff.values()[i], ta * mg2.values()[i], fscale);
                }
            }
            report.checks.extend([avg_stat, rms_stat, sup_stat, maximal_stat]);
        }
        GradientVariant::SupNbhd => {
            let mut center_avg = CheckStat::new(&tag("center-ball-average"), String::new());
            let mut center_q = CheckStat::new(&tag("center-q-average"), "q=2".into());
            let mut nbhd_sup = CheckStat::new(
                &tag("nbhd-sup-to-ball-average"),
                format!("dilation=1+c={}", 1.0 + consts.c),
            );
            let mut nbhd_avg = CheckStat::new(
                &tag("nbhd-avg-to-ball-average"),
                format!("dilation=1+c={}", 1.0 + consts.c),
            );
            let mut nbhd_q = CheckStat::new(&tag("nbhd-sup-to-q-average"), "q=2".into());
            for (_, t, abs_diff) in &diffs {
                let ta = ct * t.powf(alpha);
                let small = consts.c * t;
                let rhs_avg_small = balls::ball_average(g, small.min(0.5))?;
                let rhs_q_small = r_average(g, small.min(0.5), 2.0)?;
                for i in 0..abs_diff.len() {
                    center_avg.record(abs_diff.values()[i], ta * rhs_avg_small.values()[i], fscale);
                    center_q.record(abs_diff.values()[i], ta * rhs_q_small.values()[i], fscale);
                }
                let big = (1.0 + consts.c) * t;
                if big <= 0.25 {
                    // discrete measure ratio replaces the continuous
                    // volume constant ((1+c)/c)^n
                    let n = f.samples_per_axis();
                    let ratio = balls::ball_count(f.dim(), n, big) as f64
                        / balls::ball_count(f.dim(), n, small.min(0.5)) as f64;
                    let lhs_sup = balls::ball_extreme(abs_diff, *t, true)?;
                    let lhs_avg = balls::ball_average(abs_diff, *t)?;
                    let rhs_big = balls::ball_average(g, big)?;
                    let rhs_q_big = r_average(g, big, 2.0)?;
                    for i in 0..abs_diff.len() {
                        nbhd_sup.record(
                            lhs_sup.values()[i],
                            ratio * ta * rhs_big.values()[i],
                            fscale,
                        );
                        nbhd_avg.record(
                            lhs_avg.values()[i],
                            ratio * ta * rhs_big.values()[i],
                            fscale,
                        );
                        nbhd_q.record(
                            lhs_sup.values()[i],
                            ratio * ta * rhs_q_big.values()[i],
                            fscale,
                        );
                    }
                }
            }
            report
                .checks
                .extend([center_avg, center_q, nbhd_sup, nbhd_avg, nbhd_q]);
        }
        GradientVariant::BallSup | GradientVariant::BallAvg | GradientVariant::BallRavg(_) => {
            let mut weaker = CheckStat::new(&tag("weaker-lhs-statistics"), String::new());
            let mut jensen = CheckStat::new(&tag("q-average-rhs"), "q=2".into());
            let mut maximal_stat = CheckStat::new(&tag("maximal-majorant"), "q=2".into());
            let radii: Vec<f64> = ladder
                .rungs()
                .map(|(_, t)| (consts.c * t).min(0.5))
                .collect();
            let mg2 = window_maximal(&g.map(|v| v * v)?, &radii)?.map(f64::sqrt)?;
            for (_, t, abs_diff) in &diffs {
                let ta = ct * t.powf(alpha);
                let small = (consts.c * t).min(0.5);
                let rhs_avg = balls::ball_average(g, small)?;
                let rhs_q = r_average(g, small, 2.0)?;
                let own_lhs: GridFunction = match cand.variant {
                    GradientVariant::BallSup => balls::ball_extreme(abs_diff, *t, true)?,
                    GradientVariant::BallAvg => balls::ball_average(abs_diff, *t)?,
                    GradientVariant::BallRavg(r) => r_average(abs_diff, *t, r)?,
                    _ => unreachable!(),
                };
                let smaller: Vec<GridFunction> = match cand.variant {
                    GradientVariant::BallSup => vec![
                        r_average(abs_diff, *t, 2.0)?,
                        balls::ball_average(abs_diff, *t)?,
                    ],
                    GradientVariant::BallRavg(_) => vec![balls::ball_average(abs_diff, *t)?],
                    _ => vec![],
                };
                for s in &smaller {
                    for i in 0..abs_diff.len() {
                        weaker.record(s.values()[i], ta * rhs_avg.values()[i], fscale);
                    }
                }
                for i in 0..abs_diff.len() {
                    jensen.record(own_lhs.values()[i], ta * rhs_q.values()[i], fscale);
                    maximal_stat.record(own_lhs.values()[i], ta * mg2.values()[i], fscale);
                }
            }
            report.checks.extend([weaker, jensen, maximal_stat]);
        }
        GradientVariant::PointCtr => {
            let mut chain = CheckStat::new(&tag("power-mean-chain"), "r=2".into());
            let mut maximal_stat = CheckStat::new(&tag("maximal-majorant"), "q=2".into());
            let radii: Vec<f64> = ladder.rungs().map(|(_, t)| t).collect();
            let mg2 = window_maximal(&g.map(|v| v * v)?, &radii)?.map(f64::sqrt)?;
            for (_, t, abs_diff) in &diffs {
                let ta = ct * t.powf(alpha);
                let sup = balls::ball_extreme(abs_diff, *t, true)?;
                let rms = r_average(abs_diff, *t, 2.0)?;
                let avg = balls::ball_average(abs_diff, *t)?;
                for i in 0..abs_diff.len() {
                    chain.record(rms.values()[i], sup.values()[i], fscale);
                    chain.record(avg.values()[i], rms.values()[i], fscale);
                    maximal_stat.record(sup.values()[i], ta * mg2.values()[i], fscale);
                }
            }
            report.checks.extend([chain, maximal_stat]);
        }
        GradientVariant::Hajlasz => unreachable!(),
    }
    let _ = dim;
    Ok(report)
}

/// Result of the all-pairs Hajlasz inequality check.
#[derive(Debug, Clone, Copy)]
pub struct HajlaszReport {
    pub pairs_checked: usize,
    pub violations: usize,
    /// Worst `|f(x)-f(y)| / (d^alpha (g(x)+g(y)))`.
    pub max_defect: f64,
}

fn check_pair_budget(f: &GridFunction) -> Result<()> {
    let n = f.samples_per_axis();
    let cap = match f.dim() {
        1 => 512,
        2 => 64,
        _ => 16,
    };
    if n > cap {
        return Err(Error::ParamDomain(format!(
            "all-pairs check needs N <= {cap} per axis in {}D, got {n}",
            f.dim()
        )));
    }
    Ok(())
}

/// The pairwise-derived certificate `g(x) = sup_y |f(x)-f(y)| /
/// (2 d(x,y)^alpha)`, which satisfies the Hajlasz inequality by
/// construction.
pub fn hajlasz_pairwise_certificate(f: &GridFunction, alpha: f64) -> Result<GridFunction> {
    check_pair_budget(f)?;
    let len = f.len();
    let dim = f.dim();
    let vals = f.values();
    let mut g = vec![0.0f64; len];
    for x in 0..len {
        let xc = f.coords(x);
        let mut best = 0.0f64;
        for y in 0..len {
            if y == x {
                continue;
            }
            let yc = f.coords(y);
            let d = crate::grid::torus_distance(dim, &xc[..dim], &yc[..dim]);
            best = best.max((vals[x] - vals[y]).abs() / (2.0 * d.powf(alpha)));
        }
        g[x] = best;
    }
    GridFunction::new(dim, f.samples_per_axis(), g)
}

/// Brute-force check of `|f(x)-f(y)| <= d(x,y)^alpha [g(x)+g(y)]` over all
/// node pairs.
pub fn hajlasz_verify(f: &GridFunction, g: &GridFunction, alpha: f64) -> Result<HajlaszReport> {
    f.check_same_geometry(g)?;
    if !(0.0 < alpha && alpha <= 1.0) {
        return Err(Error::ParamDomain(format!(
            "the pairwise inequality uses alpha in (0, 1], got {alpha}"
        )));
    }
    check_pair_budget(f)?;
    if let Some(i) = g.values().iter().position(|v| *v < 0.0) {
        return Err(Error::ParamDomain(format!(
            "certificate must be nonnegative; g[{i}] = {}",
            g.values()[i]
        )));
    }
    let len = f.len();
    let dim = f.dim();
    let (fv, gv) = (f.values(), g.values());
    let fscale = f.sup_norm().max(1.0);
    let mut pairs_checked = 0usize;
    let mut violations = 0usize;
    let mut max_defect = 0.0f64;
    for x in 0..len {
        let xc = f.coords(x);
        for y in (x + 1)..len {
            let yc = f.coords(y);
            let d = crate::grid::torus_distance(dim, &xc[..dim], &yc[..dim]);
            let lhs = (fv[x] - fv[y]).abs();
            let rhs = d.powf(alpha) * (gv[x] + gv[y]);
            pairs_checked += 1;
            if rhs > 0.0 {
                max_defect = max_defect.max(lhs / rhs);
            } else if lhs > 1e-12 * fscale {
                max_defect = f64::INFINITY;
            }
            if lhs > rhs * (1.0 + 1e-9) + 1e-13 * fscale {
                violations += 1;
            }
        }
    }
    Ok(HajlaszReport {
        pairs_checked,
        violations,
        max_defect,
    })
}

impl GradientCandidate {
    /// Key=value header (variant, alpha, constants, ladder) followed by the
    /// certificate field in GF1 form.
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "variant={}", self.variant.tag())?;
        writeln!(w, "alpha={}", self.alpha)?;
        writeln!(
            w,
            "c={} C={} Ctilde={}",
            self.constants.c, self.constants.cap_c, self.constants.tilde_c
        )?;
        if let GradientVariant::BallRavg(r) = self.variant {
            writeln!(w, "r={r}")?;
        }
        writeln!(w, "k_min={} k_max={}", self.ladder.k_min(), self.ladder.k_max())?;
        write_gf1(&self.g, w)
    }

    /// Parse the format written by [`GradientCandidate::write`].
    pub fn read<R: BufRead>(mut r: R) -> Result<Self> {
        let mut kv = std::collections::HashMap::new();
        loop {
            let mut line = String::new();
            if r.read_line(&mut line)? == 0 {
                return Err(Error::Format("missing GF1 payload".into()));
            }
            if line.starts_with("GF1") {
                let g = read_gf1(std::io::Cursor::new(line.into_bytes()).chain(r))?;
                return Self::from_header(kv, g);
            }
            for tok in line.split_whitespace() {
                let (k, v) = tok
                    .split_once('=')
                    .ok_or_else(|| Error::Format(format!("expected key=value, got {tok:?}")))?;
                kv.insert(k.to_string(), v.to_string());
            }
        }
    }

    fn from_header(
        kv: std::collections::HashMap<String, String>,
        g: GridFunction,
    ) -> Result<Self> {
        let num = |key: &str| -> Result<f64> {
            kv.get(key)
                .ok_or_else(|| Error::Format(format!("candidate header is missing {key}=")))?
                .parse()
                .map_err(|_| Error::Format(format!("cannot parse {key}")))
        };
        let variant = match kv
            .get("variant")
            .ok_or_else(|| Error::Format("candidate header is missing variant=".into()))?
            .as_str()
        {
            "sup-point" => GradientVariant::SupPoint,
            "sup-nbhd" => GradientVariant::SupNbhd,
            "ball-sup" => GradientVariant::BallSup,
            "ball-avg" => GradientVariant::BallAvg,
            "ball-ravg" => GradientVariant::BallRavg(num("r")?),
            "point-ctr" => GradientVariant::PointCtr,
            "hajlasz" => GradientVariant::Hajlasz,
            other => return Err(Error::Format(format!("unknown variant {other:?}"))),
        };
        let ladder = crate::grid::make_ladder(g.samples_per_axis(), num("k_min")? as i32)?;
        if ladder.k_max() < num("k_max")? as i32 {
            return Err(Error::Format("ladder k_max exceeds grid capacity".into()));
        }
        Ok(Self {
            g,
            variant,
            constants: GradientConstants {
                c: num("c")?,
                cap_c: num("C")?,
                tilde_c: num("Ctilde")?,
            },
            alpha: num("alpha")?,
            ladder,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_ladder;
    use crate::kernels::a_function;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn maximal_of_constant_and_spike() {
        let ladder = make_ladder(64, 2).unwrap();
        let f = GridFunction::constant(1, 64, -2.0).unwrap();
        let m = hl_maximal(&f, &ladder).unwrap();
        for v in m.field().values() {
            assert!((v - 2.0).abs() < 1e-14);
        }

        let mut vals = vec![0.0; 64];
        vals[20] = 7.0;
        let f = GridFunction::new(1, 64, vals).unwrap();
        let m = hl_maximal(&f, &ladder).unwrap();
        assert_eq!(m.field().values()[20], 7.0);
        // window set: balls of ladder radii; brute-force the expected max
        for x in 0..64usize {
            let mut want: f64 = f.values()[x].abs().max(7.0 / 64.0);
            for (_, t) in ladder.rungs() {
                let mut acc = 0.0;
                let mut cnt = 0;
                for y in 0..64usize {
                    let d = (x as f64 - y as f64).abs() / 64.0;
                    let d = d.min(1.0 - d);
                    if d < t {
                        acc += f.values()[y].abs();
                        cnt += 1;
                    }
                }
                want = want.max(acc / cnt as f64);
            }
            assert!((m.field().values()[x] - want).abs() < 1e-13, "x={x}");
        }
        // decay away from the spike
        assert!(m.field().values()[52] < m.field().values()[22]);
    }

    #[test]
    fn maximal_dominates_and_is_monotone() {
        let ladder = make_ladder(64, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = GridFunction::new(1, 64, (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .unwrap();
        let m = hl_maximal(&f, &ladder).unwrap();
        for (mv, fv) in m.field().values().iter().zip(f.values()) {
            assert!(*mv >= fv.abs());
        }
        // M(cf) = |c| Mf
        let mc = hl_maximal(&f.scale(-3.0).unwrap(), &ladder).unwrap();
        for (a, b) in mc.field().values().iter().zip(m.field().values()) {
            assert!((a - 3.0 * b).abs() < 1e-12);
        }
        // |f| <= |h| pointwise implies Mf <= Mh
        let h = f.map(|v| v.abs() + 0.25).unwrap();
        let mh = hl_maximal(&h, &ladder).unwrap();
        for (a, b) in m.field().values().iter().zip(mh.field().values()) {
            assert!(a <= b);
        }
    }

    #[test]
    fn constant_function_gives_zero_gradient() {
        let f = GridFunction::constant(1, 64, 9.0).unwrap();
        let ladder = make_ladder(64, 2).unwrap();
        for variant in [
            GradientVariant::SupPoint,
            GradientVariant::SupNbhd,
            GradientVariant::BallSup,
            GradientVariant::BallAvg,
            GradientVariant::BallRavg(2.0),
            GradientVariant::PointCtr,
        ] {
            let cand = extract_gradient(&f, 0.9, &ladder, variant, Default::default()).unwrap();
            assert!(cand.g.sup_norm() < 1e-12, "{}", variant.tag());
        }
    }

    #[test]
    fn sup_point_cosine_closed_form() {
        let n = 256;
        let f = GridFunction::from_fn(1, n, |x| (2.0 * PI * x[0]).cos()).unwrap();
        let ladder = make_ladder(n, 2).unwrap();
        let alpha = 1.0;
        let cand = extract_gradient(
            &f,
            alpha,
            &ladder,
            GradientVariant::SupPoint,
            Default::default(),
        )
        .unwrap();
        let scalar = ladder
            .rungs()
            .map(|(k, t)| (2f64).powf(k as f64 * alpha) * a_function(1, 2.0 * PI * t).unwrap())
            .fold(0.0f64, f64::max);
        let expect = f.map(|v| v.abs() * scalar).unwrap();
        assert!(cand.g.sup_distance(&expect) < 1e-12);
    }

    #[test]
    fn implication_chains_have_zero_violations() {
        let n = 64;
        let ladder = make_ladder(n, 3).unwrap();
        let f = GridFunction::from_fn(1, n, |x| {
            (2.0 * PI * x[0]).cos() + 0.5 * (2.0 * PI * 3.0 * x[0] + 0.4).sin()
        })
        .unwrap();
        for variant in [
            GradientVariant::SupPoint,
            GradientVariant::SupNbhd,
            GradientVariant::BallSup,
            GradientVariant::BallAvg,
            GradientVariant::BallRavg(2.0),
            GradientVariant::PointCtr,
        ] {
            let cand = extract_gradient(&f, 0.9, &ladder, variant, Default::default()).unwrap();
            let report = verify_implications(&f, &cand, &ladder).unwrap();
            assert_eq!(
                report.total_violations(),
                0,
                "{}:\n{}",
                variant.tag(),
                report.to_text()
            );
            assert!(report.checks.len() > 1);
        }
    }

    #[test]
    fn imported_bad_certificate_is_caught() {
        let n = 64;
        let ladder = make_ladder(n, 2).unwrap();
        let f = GridFunction::from_fn(1, n, |x| (2.0 * PI * x[0]).cos()).unwrap();
        let good = extract_gradient(
            &f,
            0.9,
            &ladder,
            GradientVariant::SupPoint,
            Default::default(),
        )
        .unwrap();
        let mut bad = good.clone();
        bad.g = bad.g.scale(0.25).unwrap();
        let report = check_defining(&f, &bad).unwrap();
        assert!(report.total_violations() > 0);
        assert!(report.checks[0].max_defect > 1.0);
    }

    #[test]
    fn hajlasz_trivial_certificates() {
        let f = GridFunction::constant(1, 32, 1.5).unwrap();
        let g = GridFunction::constant(1, 32, 0.0).unwrap();
        let rep = hajlasz_verify(&f, &g, 0.9).unwrap();
        assert_eq!(rep.violations, 0);

        // Lipschitz f with constant L accepts g = L/2 at alpha = 1
        let n = 64;
        let f = GridFunction::from_fn(1, n, |x| (2.0 * PI * x[0]).sin()).unwrap();
        let l = 2.0 * PI;
        let g = GridFunction::constant(1, n, l / 2.0).unwrap();
        let rep = hajlasz_verify(&f, &g, 1.0).unwrap();
        assert_eq!(rep.violations, 0);
        assert!(rep.max_defect <= 1.0 + 1e-9);
    }

    #[test]
    fn hajlasz_pairwise_certificate_is_tight() {
        let n = 128;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = GridFunction::new(1, n, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .unwrap();
        let g = hajlasz_pairwise_certificate(&f, 0.9).unwrap();
        let rep = hajlasz_verify(&f, &g, 0.9).unwrap();
        assert_eq!(rep.violations, 0);
        // tight: some pair achieves the bound
        assert!(rep.max_defect > 0.99);
    }

    #[test]
    fn hajlasz_budget_guard() {
        let f = GridFunction::constant(1, 1024, 0.0).unwrap();
        assert!(hajlasz_pairwise_certificate(&f, 0.9).is_err());
    }

    #[test]
    fn candidate_round_trips_through_text() {
        let n = 64;
        let ladder = make_ladder(n, 2).unwrap();
        let f = GridFunction::from_fn(1, n, |x| (2.0 * PI * x[0]).cos()).unwrap();
        let cand = extract_gradient(
            &f,
            0.9,
            &ladder,
            GradientVariant::BallRavg(2.0),
            Default::default(),
        )
        .unwrap();
        let mut buf = Vec::new();
        cand.write(&mut buf).unwrap();
        let back = GradientCandidate::read(buf.as_slice()).unwrap();
        assert_eq!(back.variant, cand.variant);
        assert_eq!(back.alpha, cand.alpha);
        assert_eq!(back.g, cand.g);
    }
}

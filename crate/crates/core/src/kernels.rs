//! Radial Fourier multipliers for ball averages, higher-order averages,
//! the Littlewood-Paley filter bank, and the reconstruction multiplier.
//!
//! The ball average over radius `t` acts on the grid mode with integer
//! frequency `k` as multiplication by `iso(2*pi*t*|k|)`, where
//!
//! `iso(s) = gamma_n * int_0^1 cos(u s) (1-u^2)^((n-1)/2) du`,
//! `gamma_n = [int_0^1 (1-u^2)^((n-1)/2) du]^-1`.
//!
//! Closed forms exist for n = 1 (`sin s / s`) and n = 3
//! (`3 (sin s - s cos s) / s^3`); n = 2 is evaluated by 64-node
//! Gauss-Legendre quadrature. The complement `A(s) = 1 - iso(s)` satisfies
//! `0 < c_1 <= A(s)/s^2 <= c_2` on `(0, 4]`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use crate::balls;
use crate::error::{Error, Result};
use crate::grid::{forward_transform, inverse_transform, GridFunction, ScaleLadder};
use crate::quadrature::GaussRule;

const TWO_PI: f64 = 2.0 * PI;

fn rule64() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| GaussRule::new(64))
}

fn check_dim(dim: usize) -> Result<()> {
    if (1..=3).contains(&dim) {
        Ok(())
    } else {
        Err(Error::InvalidDimension(dim))
    }
}

fn check_arg(s: f64) -> Result<()> {
    if s >= 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::ParamDomain(format!(
            "multiplier argument must be finite and >= 0, got {s}"
        )))
    }
}

/// Ball-average multiplier profile `iso(s)` for dimension `n`.
pub fn ball_multiplier(dim: usize, s: f64) -> Result<f64> {
    check_dim(dim)?;
    check_arg(s)?;
    Ok(iso(dim, s))
}

/// `A(s) = 1 - iso(s)`, the complement profile.
pub fn a_function(dim: usize, s: f64) -> Result<f64> {
    check_dim(dim)?;
    check_arg(s)?;
    Ok(1.0 - iso(dim, s))
}

/// Quadrature evaluation of `iso(s)` for any dimension; the cross-check
/// path for the closed forms.
pub fn ball_multiplier_quadrature(dim: usize, s: f64) -> Result<f64> {
    check_dim(dim)?;
    check_arg(s)?;
    Ok(iso_quadrature(dim, s))
}

/// Direct quadrature of `A(s) = 2 gamma_n int_0^1 (1-u^2)^((n-1)/2)
/// sin^2(u s / 2) du`, independent of the `1 - iso` route.
pub fn a_function_quadrature(dim: usize, s: f64) -> Result<f64> {
    check_dim(dim)?;
    check_arg(s)?;
    let rule = rule64();
    let panels = 1 + (s / 40.0) as usize;
    // substitute u = sin(theta): the weight becomes cos^n(theta), smooth
    let num = rule.integrate_panels(0.0, FRAC_PI_2, panels, |th| {
        let u = th.sin();
        let half = (0.5 * u * s).sin();
        2.0 * half * half * th.cos().powi(dim as i32)
    });
    let den = rule.integrate(0.0, FRAC_PI_2, |th| th.cos().powi(dim as i32));
    Ok(num / den)
}

/// Internal fast path; preconditions checked by callers.
fn iso(dim: usize, s: f64) -> f64 {
    match dim {
        1 => {
            if s == 0.0 {
                1.0
            } else {
                s.sin() / s
            }
        }
        2 => iso_quadrature(2, s),
        3 => iso3(s),
        _ => unreachable!("dimension checked by callers"),
    }
}

/// `3 (sin s - s cos s) / s^3`, with a series below `s = 0.5` where the
/// closed form loses digits to cancellation.
fn iso3(s: f64) -> f64 {
    if s < 0.5 {
        // iso_3(s) = sum_m (-1)^m 3 s^(2m) / ((2m)! (2m+1)(2m+3))
        let s2 = s * s;
        let mut term = 1.0; // m = 0
        let mut sum = 1.0;
        let mut fact = 1.0f64;
        for m in 1..=8 {
            let mf = 2.0 * m as f64;
            fact *= (mf - 1.0) * mf;
            term *= s2;
            let coeff = 3.0 / (fact * (mf + 1.0) * (mf + 3.0));
            sum += if m % 2 == 0 { term * coeff } else { -(term * coeff) };
        }
        sum
    } else {
        3.0 * (s.sin() - s * s.cos()) / (s * s * s)
    }
}

fn iso_quadrature(dim: usize, s: f64) -> f64 {
    let rule = rule64();
    let panels = 1 + (s / 25.0) as usize;
    // u = sin(theta) turns (1-u^2)^((n-1)/2) du into cos^n(theta) d(theta),
    // an analytic integrand; plain Gauss-Legendre on [0,1] would only
    // converge algebraically for n = 2.
    let num = rule.integrate_panels(0.0, FRAC_PI_2, panels, |th| {
        (s * th.sin()).cos() * th.cos().powi(dim as i32)
    });
    let den = rule.integrate(0.0, FRAC_PI_2, |th| th.cos().powi(dim as i32));
    num / den
}

/// Multiplier of the `2*ell`-th order average: the binomial combination
/// `-2/C(2l,l) * sum_{j=1..l} (-1)^j C(2l, l-j) iso(j s)`, which deviates
/// from 1 only at order `s^(2l)`.
pub fn higher_multiplier(dim: usize, ell: u32, s: f64) -> Result<f64> {
    check_dim(dim)?;
    check_arg(s)?;
    if ell < 1 {
        return Err(Error::ParamDomain("ell must be >= 1".into()));
    }
    Ok(higher_mult(dim, ell, s))
}

fn higher_mult(dim: usize, ell: u32, s: f64) -> f64 {
    let center = binomial(2 * ell, ell);
    let mut sum = 0.0;
    for j in 1..=ell {
        let c = binomial(2 * ell, ell - j);
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * c * iso(dim, j as f64 * s);
    }
    -2.0 / center * sum
}

fn binomial(n: u32, k: u32) -> f64 {
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// How a radial profile is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backing {
    ClosedForm,
    Quadrature { nodes: usize },
}

/// Which profile a `RadialMultiplier` evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    /// `iso(s)`, the ball-average symbol.
    Ball,
    /// `A(s) = 1 - iso(s)`.
    Complement,
    /// Symbol of the `2*ell`-th order average.
    HigherBall(u32),
}

/// A scalar radial profile `s -> m(s)` on `[0, inf)`.
#[derive(Debug, Clone, Copy)]
pub struct RadialMultiplier {
    dim: usize,
    kind: ProfileKind,
}

impl RadialMultiplier {
    pub fn ball(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            dim,
            kind: ProfileKind::Ball,
        })
    }

    pub fn complement(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            dim,
            kind: ProfileKind::Complement,
        })
    }

    pub fn higher(dim: usize, ell: u32) -> Result<Self> {
        check_dim(dim)?;
        if ell < 1 {
            return Err(Error::ParamDomain("ell must be >= 1".into()));
        }
        Ok(Self {
            dim,
            kind: ProfileKind::HigherBall(ell),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn backing(&self) -> Backing {
        match self.dim {
            2 => Backing::Quadrature { nodes: 64 },
            _ => Backing::ClosedForm,
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self.kind {
            ProfileKind::Ball => iso(self.dim, s),
            ProfileKind::Complement => 1.0 - iso(self.dim, s),
            ProfileKind::HigherBall(ell) => higher_mult(self.dim, ell, s),
        }
    }

    /// Two-column `(s, m(s))` table, e.g. for plotting.
    pub fn export_table(&self, s_max: f64, count: usize) -> Vec<(f64, f64)> {
        (0..count)
            .map(|i| {
                let s = s_max * i as f64 / (count - 1).max(1) as f64;
                (s, self.eval(s))
            })
            .collect()
    }

    /// Write the table as two-column text.
    pub fn write_table<W: std::io::Write>(
        &self,
        s_max: f64,
        count: usize,
        mut w: W,
    ) -> Result<()> {
        for (s, m) in self.export_table(s_max, count) {
            writeln!(w, "{s} {m}")?;
        }
        Ok(())
    }
}

fn check_scale(f: &GridFunction, t: f64, scale_factor: f64) -> Result<()> {
    let lo = 2.0 * f.spacing();
    let hi = 0.25 / scale_factor;
    if t < lo || t > hi {
        return Err(Error::ScaleOutOfRange { t, lo, hi });
    }
    Ok(())
}

/// Multiply the spectrum of `f` by `m(2*pi*t*|k|)` and transform back.
pub fn apply_scaled_multiplier(
    f: &GridFunction,
    t: f64,
    m: impl Fn(f64) -> f64,
) -> Result<GridFunction> {
    let mut spec = forward_transform(f);
    spec.scale_radial(|knorm| m(TWO_PI * t * knorm));
    inverse_transform(&spec)
}

/// Ball average `B_t f` via the spectral multiplier `iso(2 pi t |k|)`.
///
/// Requires `2 dx <= t <= 1/4` so the ball is resolvable and stays within
/// half the torus period.
pub fn apply_ball_average(f: &GridFunction, t: f64) -> Result<GridFunction> {
    check_scale(f, t, 1.0)?;
    apply_scaled_multiplier(f, t, |s| iso(f.dim(), s))
}

/// `2*ell`-th order average `B_{l,t} f`; for `ell = 1` this is exactly
/// `apply_ball_average`.
pub fn apply_higher_average(f: &GridFunction, t: f64, ell: u32) -> Result<GridFunction> {
    if ell < 1 {
        return Err(Error::ParamDomain("ell must be >= 1".into()));
    }
    check_scale(f, t, ell as f64)?;
    apply_scaled_multiplier(f, t, |s| higher_mult(f.dim(), ell, s))
}

/// Direct spatial ball average over grid nodes; the independent oracle for
/// `apply_ball_average` (Riemann sum over the discrete ball).
pub fn validate_direct(f: &GridFunction, t: f64) -> Result<GridFunction> {
    check_scale(f, t, 1.0)?;
    balls::ball_average(f, t)
}

/// Annulus/base profile pair satisfying the Calderon partition
/// `Phi(s)^2 + sum_{k>=1} phi(2^-k s)^2 = 1`.
///
/// Built from a smooth monotone transition `h` (1 below 1, 0 above 2,
/// strictly decreasing in between, from the standard `exp(-1/x)` bump) as
/// `Phi^2 = h(s)`, `phi(s)^2 = h(s) - h(2s)`, so partial sums telescope to
/// `h(2^-K s)`.
#[derive(Debug, Clone)]
pub struct FilterBank {
    sharpness: f64,
    c0_annulus: f64,
    c0_base: f64,
}

impl FilterBank {
    /// Smooth transition profile: 1 for `s <= 1`, 0 for `s >= 2`.
    pub fn transition(&self, s: f64) -> f64 {
        if s <= 1.0 {
            1.0
        } else if s >= 2.0 {
            0.0
        } else {
            let up = bump(self.sharpness, 2.0 - s);
            let down = bump(self.sharpness, s - 1.0);
            up / (up + down)
        }
    }

    /// Annulus profile `phi_hat`, supported in `[1/2, 2]`.
    pub fn annulus(&self, s: f64) -> f64 {
        let d = self.transition(s) - self.transition(2.0 * s);
        d.max(0.0).sqrt()
    }

    /// Base profile `Phi_hat`, supported in `[0, 2]`.
    pub fn base(&self, s: f64) -> f64 {
        self.transition(s).sqrt()
    }

    /// `Phi(s)^2 + sum_{k=1..K} phi(2^-k s)^2` with `K` large enough that
    /// further terms vanish.
    pub fn partition_value(&self, s: f64) -> f64 {
        let mut k_stop = 1;
        while (2f64).powi(-k_stop) * s > 1.0 {
            k_stop += 1;
        }
        let mut sum = self.base(s).powi(2);
        for k in 1..=k_stop {
            sum += self.annulus((2f64).powi(-k) * s).powi(2);
        }
        sum
    }

    /// Recorded lower bound of `|phi_hat|` on `[3/5, 5/3]`.
    pub fn annulus_floor(&self) -> f64 {
        self.c0_annulus
    }

    /// Recorded lower bound of `|Phi_hat|` on `[0, 5/3]`.
    pub fn base_floor(&self) -> f64 {
        self.c0_base
    }
}

fn bump(sharpness: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-sharpness / x).exp()
    }
}

fn build_bank_with_sharpness(sharpness: f64) -> Result<FilterBank> {
    let mut bank = FilterBank {
        sharpness,
        c0_annulus: 0.0,
        c0_base: 0.0,
    };
    // constructor self-check: partition identity and profile floors
    let mut worst = 0.0f64;
    for i in 0..=4000 {
        let s = 100.0 * i as f64 / 4000.0;
        worst = worst.max((bank.partition_value(s) - 1.0).abs());
    }
    if worst > 1e-10 {
        return Err(Error::ParamDomain(format!(
            "filter bank self-check failed: partition deviation {worst:.3e} > 1e-10"
        )));
    }
    let samples = 2000;
    let mut c0_annulus = f64::INFINITY;
    for i in 0..=samples {
        let s = 0.6 + (5.0 / 3.0 - 0.6) * i as f64 / samples as f64;
        c0_annulus = c0_annulus.min(bank.annulus(s).abs());
    }
    let mut c0_base = f64::INFINITY;
    for i in 0..=samples {
        let s = (5.0 / 3.0) * i as f64 / samples as f64;
        c0_base = c0_base.min(bank.base(s).abs());
    }
    if c0_annulus <= 0.0 || c0_base <= 0.0 {
        return Err(Error::ParamDomain(
            "filter bank self-check failed: profile floor is not positive".into(),
        ));
    }
    bank.c0_annulus = c0_annulus;
    bank.c0_base = c0_base;
    Ok(bank)
}

/// The standard filter bank.
pub fn build_filter_bank() -> Result<FilterBank> {
    build_bank_with_sharpness(1.0)
}

/// A second, differently shaped bank for testing that norm ratios do not
/// depend on the profile choice.
pub fn build_filter_bank_alt() -> Result<FilterBank> {
    build_bank_with_sharpness(3.0)
}

/// Which filter of the bank to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterRung {
    /// The base filter `Phi`.
    Base,
    /// The annulus filter at scale `t_k = 2^-k`.
    Annulus(i32),
}

/// Convolve with one filter of the bank: spectral multiplication by
/// `Phi_hat(2 pi |k|)` or `phi_hat(2^-k * 2 pi |k|)`.
pub fn apply_filter(
    f: &GridFunction,
    bank: &FilterBank,
    ladder: &ScaleLadder,
    rung: FilterRung,
) -> Result<GridFunction> {
    match rung {
        FilterRung::Base => apply_scaled_multiplier(f, 1.0, |s| bank.base(s)),
        FilterRung::Annulus(k) => {
            if !ladder.contains(k) {
                return Err(Error::RungOutOfRange(k));
            }
            let t = ladder.scale(k);
            apply_scaled_multiplier(f, t, |s| bank.annulus(s))
        }
    }
}

/// Reconstruction multiplier `eta(s) = phi_hat(s) / A(s)`, extended by
/// zero outside the annulus support `[1/2, 2]`. Finite there because
/// `A(s)/s^2` is bounded below on `(0, 4]`.
pub fn reconstruction_multiplier(dim: usize, s: f64, bank: &FilterBank) -> Result<f64> {
    check_dim(dim)?;
    check_arg(s)?;
    if !(0.5..=2.0).contains(&s) {
        return Ok(0.0);
    }
    let phi = bank.annulus(s);
    if phi == 0.0 {
        return Ok(0.0);
    }
    Ok(phi / (1.0 - iso(dim, s)))
}

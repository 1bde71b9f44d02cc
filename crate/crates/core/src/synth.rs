//! Synthetic test functions with known smoothness, plus an analytic
//! ball-average oracle that bypasses the spectral engine.
//!
//! Every generated function is a finite cosine sum, band-limited below a
//! quarter of the sampling rate, so grids sample it exactly. Weierstrass
//! sums place their modes on the dyadic ladder rungs; local polynomial
//! patches are trigonometric osculants whose low-order derivatives at the
//! center match `x^degree` exactly.

use std::f64::consts::PI;
use std::fmt;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{forward_transform, GridFunction};
use crate::kernels::ball_multiplier;

const TWO_PI: f64 = 2.0 * PI;

/// One cosine mode `amplitude * cos(2 pi k.x + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub k: [i64; 3],
    pub amplitude: f64,
    pub phase: f64,
}

impl Mode {
    pub fn norm(&self) -> f64 {
        let s: i64 = self.k.iter().map(|&ki| ki * ki).sum();
        (s as f64).sqrt()
    }
}

/// What to generate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneratorKind {
    /// `sum_j 2^(-j alpha0) cos(2 pi 2^j x_1 + theta_j)`; Holder class of
    /// exponent `alpha0` for `alpha0 < 1`, the corresponding higher class up
    /// to 2 beyond that.
    Weierstrass { alpha0: f64, terms: u32, seed: u64 },
    /// A single cosine mode along the first axis.
    SingleMode { mode: u32, phase: f64 },
    /// Random trigonometric polynomial, amplitudes `~ k^-exponent`.
    Bandlimited {
        max_mode: u32,
        exponent: f64,
        seed: u64,
    },
    /// Trigonometric osculant of `(x_1 - 1/2)^degree` near `x_1 = 1/2`;
    /// degree 0 is the constant 1. `window` records the half-width of the
    /// region where the local-polynomial reading is intended.
    PolyPatch { degree: u32, window: f64 },
    /// Mollified periodic cusp `d(x_1, 1/2)^alpha0`; `width = None` means
    /// four grid spacings.
    Cusp {
        alpha0: f64,
        center: f64,
        width: Option<f64>,
    },
    /// Periodized Gaussian of the given width (product over axes).
    Gaussian { width: f64 },
}

/// A generator plus the grid geometry to sample it on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub dim: usize,
    pub samples_per_axis: usize,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, dim: usize, samples_per_axis: usize) -> Self {
        Self {
            kind,
            dim,
            samples_per_axis,
        }
    }

    /// Same generator on a different grid.
    pub fn with_resolution(mut self, samples_per_axis: usize) -> Self {
        self.samples_per_axis = samples_per_axis;
        self
    }

    /// Short human label for report rows.
    pub fn label(&self) -> String {
        match self.kind {
            GeneratorKind::Weierstrass { alpha0, .. } => format!("weierstrass({alpha0})"),
            GeneratorKind::SingleMode { mode, .. } => format!("mode({mode})"),
            GeneratorKind::Bandlimited { max_mode, .. } => format!("bandlimited({max_mode})"),
            GeneratorKind::PolyPatch { degree, .. } => format!("poly({degree})"),
            GeneratorKind::Cusp { alpha0, .. } => format!("cusp({alpha0})"),
            GeneratorKind::Gaussian { width } => format!("gaussian({width})"),
        }
    }

    /// The cosine modes of the generated function, when it has an exact
    /// finite-mode representation independent of any grid (all kinds except
    /// cusp and gaussian, whose band-limited forms are grid commitments).
    pub fn modes(&self) -> Result<Vec<Mode>> {
        let n = self.samples_per_axis;
        let mode_cap = n / 4;
        match self.kind {
            GeneratorKind::Weierstrass {
                alpha0,
                terms,
                seed,
            } => {
                if !(0.0 < alpha0 && alpha0 < 2.0) {
                    return Err(Error::ParamDomain(format!(
                        "weierstrass alpha0 must lie in (0, 2), got {alpha0}"
                    )));
                }
                if terms < 1 {
                    return Err(Error::ParamDomain("weierstrass needs terms >= 1".into()));
                }
                let top = 1usize << terms;
                if top > mode_cap {
                    return Err(Error::AliasGuard {
                        mode: top,
                        limit: mode_cap,
                    });
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Ok((1..=terms)
                    .map(|j| Mode {
                        k: [1i64 << j, 0, 0],
                        amplitude: (2f64).powf(-(j as f64) * alpha0),
                        phase: rng.gen_range(0.0..TWO_PI),
                    })
                    .collect())
            }
            GeneratorKind::SingleMode { mode, phase } => {
                if mode as usize > mode_cap || mode == 0 {
                    return Err(Error::AliasGuard {
                        mode: mode as usize,
                        limit: mode_cap,
                    });
                }
                Ok(vec![Mode {
                    k: [mode as i64, 0, 0],
                    amplitude: 1.0,
                    phase,
                }])
            }
            GeneratorKind::Bandlimited {
                max_mode,
                exponent,
                seed,
            } => {
                if max_mode as usize > mode_cap || max_mode == 0 {
                    return Err(Error::AliasGuard {
                        mode: max_mode as usize,
                        limit: mode_cap,
                    });
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut modes = Vec::new();
                for axis in 0..self.dim {
                    for k in 1..=max_mode {
                        let mut kv = [0i64; 3];
                        kv[axis] = k as i64;
                        modes.push(Mode {
                            k: kv,
                            amplitude: (k as f64).powf(-exponent) * rng.gen_range(0.5..1.0),
                            phase: rng.gen_range(0.0..TWO_PI),
                        });
                    }
                }
                if self.dim >= 2 {
                    // a few diagonal modes so multi-axis content is present
                    for k in 1..=max_mode.min(4) {
                        modes.push(Mode {
                            k: [k as i64, k as i64, 0],
                            amplitude: (k as f64).powf(-exponent) * rng.gen_range(0.25..0.5),
                            phase: rng.gen_range(0.0..TWO_PI),
                        });
                    }
                }
                Ok(modes)
            }
            GeneratorKind::PolyPatch { degree, window } => {
                if window <= 0.0 || window > 0.25 {
                    return Err(Error::ParamDomain(format!(
                        "poly window must lie in (0, 1/4], got {window}"
                    )));
                }
                poly_patch_modes(degree, mode_cap)
            }
            GeneratorKind::Cusp { .. } | GeneratorKind::Gaussian { .. } => Err(
                Error::UnsupportedSpec(format!("{} has no exact mode list", self.label())),
            ),
        }
    }
}

/// Harmonics used by the polynomial osculant.
const PATCH_HARMONICS: usize = 5;

/// Cosine (even degree) or sine-as-cosine (odd degree) coefficients whose
/// derivatives of orders up to `2*PATCH_HARMONICS` at the center match
/// `(x - 1/2)^degree`.
fn poly_patch_modes(degree: u32, mode_cap: usize) -> Result<Vec<Mode>> {
    if degree > 4 {
        return Err(Error::UnsupportedSpec(format!(
            "poly degree must be <= 4, got {degree}"
        )));
    }
    if PATCH_HARMONICS > mode_cap {
        return Err(Error::AliasGuard {
            mode: PATCH_HARMONICS,
            limit: mode_cap,
        });
    }
    if degree == 0 {
        return Ok(vec![Mode {
            k: [0, 0, 0],
            amplitude: 1.0,
            phase: 0.0,
        }]);
    }
    let m = PATCH_HARMONICS;
    let nodes: Vec<f64> = (1..=m).map(|j| (j * j) as f64).collect();
    let lagrange = lagrange_coefficient_rows(&nodes);
    let factorial = |d: u32| (1..=d).map(|v| v as f64).product::<f64>();
    let mut modes = Vec::new();
    if degree.is_multiple_of(2) {
        // moments c_i = (-1)^i t_{2i} / (2 pi)^(2i), i = 1..m, with the
        // substitution gamma_j = b_j w_j reducing to moments 0..m-1
        let mut c = vec![0.0; m];
        let i_target = (degree / 2) as usize; // order 2i = degree
        c[i_target - 1] = sign(i_target) * factorial(degree) / TWO_PI.powi(degree as i32);
        let mut dc = 0.0;
        for j in 1..=m {
            let gamma: f64 = (0..m).map(|i| lagrange[j - 1][i] * c[i]).sum();
            let b = gamma / nodes[j - 1];
            dc -= b;
            modes.push(Mode {
                k: [j as i64, 0, 0],
                amplitude: b,
                // cos(2 pi j (x - 1/2)) = cos(2 pi j x - pi j)
                phase: -PI * j as f64,
            });
        }
        modes.push(Mode {
            k: [0, 0, 0],
            amplitude: dc,
            phase: 0.0,
        });
    } else {
        // odd orders 2i+1, i = 0..m-1: mu_j = b_j (2 pi j) solves the
        // plain moment system
        let mut c = vec![0.0; m];
        let i_target = ((degree - 1) / 2) as usize;
        c[i_target] = sign(i_target) * factorial(degree) / TWO_PI.powi((degree - 1) as i32);
        for j in 1..=m {
            let mu: f64 = (0..m).map(|i| lagrange[j - 1][i] * c[i]).sum();
            let b = mu / (TWO_PI * j as f64);
            modes.push(Mode {
                k: [j as i64, 0, 0],
                amplitude: b,
                // sin(2 pi j (x - 1/2)) = cos(2 pi j x - pi j - pi/2)
                phase: -PI * j as f64 - PI / 2.0,
            });
        }
    }
    Ok(modes)
}

fn sign(i: usize) -> f64 {
    if i.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Row `m` holds the monomial coefficients of the Lagrange polynomial
/// `L_m(w)` through the given nodes.
fn lagrange_coefficient_rows(nodes: &[f64]) -> Vec<Vec<f64>> {
    let m = nodes.len();
    let mut rows = Vec::with_capacity(m);
    for j in 0..m {
        let mut coeffs = vec![1.0];
        let mut denom = 1.0;
        for (i, &node) in nodes.iter().enumerate() {
            if i == j {
                continue;
            }
            // multiply by (w - node)
            let mut next = vec![0.0; coeffs.len() + 1];
            for (d, &cd) in coeffs.iter().enumerate() {
                next[d] -= node * cd;
                next[d + 1] += cd;
            }
            coeffs = next;
            denom *= nodes[j] - node;
        }
        for cd in &mut coeffs {
            *cd /= denom;
        }
        rows.push(coeffs);
    }
    rows
}

fn synthesize_modes(dim: usize, n: usize, modes: &[Mode]) -> Result<GridFunction> {
    GridFunction::from_fn(dim, n, |x| {
        modes
            .iter()
            .map(|m| {
                let mut dot = 0.0;
                for (axis, &xa) in x.iter().enumerate() {
                    dot += m.k[axis] as f64 * xa;
                }
                m.amplitude * (TWO_PI * dot + m.phase).cos()
            })
            .sum()
    })
}

/// Sample the generator on its grid. Deterministic for a fixed spec.
pub fn generate(spec: &GeneratorSpec) -> Result<GridFunction> {
    if !(1..=3).contains(&spec.dim) {
        return Err(Error::InvalidDimension(spec.dim));
    }
    match spec.kind {
        GeneratorKind::Cusp {
            alpha0,
            center,
            width,
        } => generate_cusp(spec, alpha0, center, width),
        GeneratorKind::Gaussian { width } => generate_gaussian(spec, width),
        _ => {
            let modes = spec.modes()?;
            synthesize_modes(spec.dim, spec.samples_per_axis, &modes)
        }
    }
}

/// Exact ball average of a mode-representable generator: each mode is
/// scaled by `iso(2 pi t |k|)` and the sum re-evaluated directly. This is
/// the independent oracle for the spectral path.
pub fn analytic_ball_average(spec: &GeneratorSpec, t: f64) -> Result<GridFunction> {
    match spec.kind {
        GeneratorKind::Weierstrass { .. }
        | GeneratorKind::SingleMode { .. }
        | GeneratorKind::Bandlimited { .. }
        | GeneratorKind::PolyPatch { .. } => {}
        _ => {
            return Err(Error::UnsupportedSpec(format!(
                "analytic ball average not available for {}",
                spec.label()
            )))
        }
    }
    let lo = 2.0 / spec.samples_per_axis as f64;
    if !(lo..=0.25).contains(&t) {
        return Err(Error::ScaleOutOfRange { t, lo, hi: 0.25 });
    }
    let mut modes = spec.modes()?;
    for m in &mut modes {
        m.amplitude *= ball_multiplier(spec.dim, TWO_PI * t * m.norm())?;
    }
    synthesize_modes(spec.dim, spec.samples_per_axis, &modes)
}

fn generate_cusp(
    spec: &GeneratorSpec,
    alpha0: f64,
    center: f64,
    width: Option<f64>,
) -> Result<GridFunction> {
    if spec.dim != 1 {
        return Err(Error::UnsupportedSpec(
            "cusp generation is one-dimensional".into(),
        ));
    }
    if !(0.0 < alpha0 && alpha0 < 2.0) {
        return Err(Error::ParamDomain(format!(
            "cusp alpha0 must lie in (0, 2), got {alpha0}"
        )));
    }
    if !(0.0..1.0).contains(&center) {
        return Err(Error::ParamDomain(format!(
            "cusp center must lie in [0, 1), got {center}"
        )));
    }
    let n = spec.samples_per_axis;
    let dx = 1.0 / n as f64;
    let w = width.unwrap_or(4.0 * dx);
    if w < 2.0 * dx {
        return Err(Error::ParamDomain(format!(
            "cusp mollification width {w} is below 2 dx = {}",
            2.0 * dx
        )));
    }
    // band limit implied by the Gaussian mollifier: modes above this carry
    // relative weight below ~3e-9 and are dropped
    let band = ((1.0 / w).ceil() as usize).min(n / 4).max(1);

    // raw cusp coefficients from an oversampled transform; the mollifier
    // crushes whatever aliasing the raw sampling leaves near the band edge
    let oversample = (64 * band).next_power_of_two().max(4096);
    let raw = GridFunction::from_fn(1, oversample, |x| {
        let d = (x[0] - center).abs();
        d.min(1.0 - d).powf(alpha0)
    })?;
    let spec_raw = forward_transform(&raw);
    let scale = 1.0 / oversample as f64;
    let mut coeffs = Vec::with_capacity(band + 1);
    for k in 0..=band {
        let damp = (-2.0 * PI * PI * (k as f64 * w).powi(2)).exp();
        // real part: the cusp is even around its center once re-centered
        let c = spec_raw.coefficients()[k] * scale;
        coeffs.push((k, c.re * damp, c.im * damp));
    }
    GridFunction::from_fn(1, n, |x| {
        let mut acc = coeffs[0].1;
        for &(k, re, im) in &coeffs[1..] {
            let ang = TWO_PI * k as f64 * x[0];
            acc += 2.0 * (re * ang.cos() - im * ang.sin());
        }
        acc
    })
}

fn generate_gaussian(spec: &GeneratorSpec, width: f64) -> Result<GridFunction> {
    let n = spec.samples_per_axis;
    let dx = 1.0 / n as f64;
    if width < 8.0 * dx {
        return Err(Error::ParamDomain(format!(
            "gaussian width {width} is below 8 dx = {}; spectrum would alias",
            8.0 * dx
        )));
    }
    // theta-function coefficients e^(-2 pi^2 k^2 w^2); stop below 1e-16
    let mut band = 1usize;
    while (-2.0 * PI * PI * (band as f64 * width).powi(2)).exp() > 1e-16 {
        band += 1;
    }
    if band > n / 4 {
        return Err(Error::AliasGuard {
            mode: band,
            limit: n / 4,
        });
    }
    let profile: Vec<f64> = (0..n)
        .map(|i| {
            let x = i as f64 / n as f64;
            let mut acc = 1.0;
            for k in 1..=band {
                let damp = (-2.0 * PI * PI * (k as f64 * width).powi(2)).exp();
                acc += 2.0 * damp * (TWO_PI * k as f64 * (x - 0.5)).cos();
            }
            acc
        })
        .collect();
    let peak = profile[n / 2];
    GridFunction::from_fn(spec.dim, n, |x| {
        let mut acc = 1.0;
        for &xa in x {
            let i = (xa * n as f64).round() as usize % n;
            acc *= profile[i] / peak;
        }
        acc
    })
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GeneratorKind::Weierstrass {
                alpha0,
                terms,
                seed,
            } => write!(f, "kind=weierstrass alpha0={alpha0} terms={terms} seed={seed}")?,
            GeneratorKind::SingleMode { mode, phase } => {
                write!(f, "kind=mode mode={mode} phase={phase}")?
            }
            GeneratorKind::Bandlimited {
                max_mode,
                exponent,
                seed,
            } => write!(
                f,
                "kind=bandlimited max_mode={max_mode} exponent={exponent} seed={seed}"
            )?,
            GeneratorKind::PolyPatch { degree, window } => {
                write!(f, "kind=poly degree={degree} window={window}")?
            }
            GeneratorKind::Cusp {
                alpha0,
                center,
                width,
            } => {
                write!(f, "kind=cusp alpha0={alpha0} center={center}")?;
                if let Some(w) = width {
                    write!(f, " width={w}")?;
                }
            }
            GeneratorKind::Gaussian { width } => write!(f, "kind=gaussian width={width}")?,
        }
        write!(f, " dim={} N={}", self.dim, self.samples_per_axis)
    }
}

impl std::str::FromStr for GeneratorSpec {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let mut kv = std::collections::HashMap::new();
        for tok in line.split_whitespace() {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("expected key=value, got {tok:?}")))?;
            kv.insert(k.to_string(), v.to_string());
        }
        let get = |key: &str| -> Result<&String> {
            kv.get(key)
                .ok_or_else(|| Error::Format(format!("generator spec is missing {key}=")))
        };
        let num = |key: &str| -> Result<f64> {
            get(key)?
                .parse()
                .map_err(|_| Error::Format(format!("cannot parse {key}")))
        };
        let int = |key: &str| -> Result<u64> {
            get(key)?
                .parse()
                .map_err(|_| Error::Format(format!("cannot parse {key}")))
        };
        let kind = match get("kind")?.as_str() {
            "weierstrass" => GeneratorKind::Weierstrass {
                alpha0: num("alpha0")?,
                terms: int("terms")? as u32,
                seed: int("seed")?,
            },
            "mode" => GeneratorKind::SingleMode {
                mode: int("mode")? as u32,
                phase: kv.get("phase").map_or(Ok(0.0), |v| {
                    v.parse()
                        .map_err(|_| Error::Format("cannot parse phase".into()))
                })?,
            },
            "bandlimited" => GeneratorKind::Bandlimited {
                max_mode: int("max_mode")? as u32,
                exponent: num("exponent")?,
                seed: int("seed")?,
            },
            "poly" => GeneratorKind::PolyPatch {
                degree: int("degree")? as u32,
                window: kv.get("window").map_or(Ok(1.0 / 32.0), |v| {
                    v.parse()
                        .map_err(|_| Error::Format("cannot parse window".into()))
                })?,
            },
            "cusp" => GeneratorKind::Cusp {
                alpha0: num("alpha0")?,
                center: num("center")?,
                width: match kv.get("width") {
                    Some(v) => Some(
                        v.parse()
                            .map_err(|_| Error::Format("cannot parse width".into()))?,
                    ),
                    None => None,
                },
            },
            "gaussian" => GeneratorKind::Gaussian {
                width: num("width")?,
            },
            other => return Err(Error::Format(format!("unknown generator kind {other:?}"))),
        };
        Ok(GeneratorSpec {
            kind,
            dim: int("dim")? as usize,
            samples_per_axis: int("N")? as usize,
        })
    }
}

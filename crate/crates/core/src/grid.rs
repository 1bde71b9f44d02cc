//! Sampled functions on the periodic torus `[0,1)^n`, their spectral
//! transforms, dyadic scale ladders, and `L^p` quadrature.
//!
//! The grid is uniform with `N` samples per axis (`N` a power of two),
//! spacing `dx = 1/N`, and values stored in lexicographic order. The
//! forward transform carries no normalization factor; the inverse carries
//! `1/N^n`. The grid mode with integer frequency vector `k` is
//! `exp(2*pi*i*k.x)` and has angular frequency `|xi| = 2*pi*|k|`.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::LN_2;
use std::fmt;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Real samples on a uniform periodic grid over `[0,1)^n`, `n` in `{1,2,3}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    dim: usize,
    samples_per_axis: usize,
    values: Vec<f64>,
}

impl GridFunction {
    /// Build a grid function, checking dimension, size and finiteness.
    pub fn new(dim: usize, samples_per_axis: usize, values: Vec<f64>) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidDimension(dim));
        }
        if !samples_per_axis.is_power_of_two() || samples_per_axis < 16 {
            return Err(Error::InvalidGridSize(samples_per_axis));
        }
        let expected = samples_per_axis.pow(dim as u32);
        if values.len() != expected {
            return Err(Error::ValueCount {
                got: values.len(),
                expected,
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue(i));
        }
        Ok(Self {
            dim,
            samples_per_axis,
            values,
        })
    }

    pub fn constant(dim: usize, samples_per_axis: usize, c: f64) -> Result<Self> {
        let len = samples_per_axis.pow(dim as u32);
        Self::new(dim, samples_per_axis, vec![c; len])
    }

    /// Sample a function of the node coordinates.
    pub fn from_fn(
        dim: usize,
        samples_per_axis: usize,
        f: impl Fn(&[f64]) -> f64,
    ) -> Result<Self> {
        let len = samples_per_axis.pow(dim as u32);
        let mut values = Vec::with_capacity(len);
        let mut coords = [0f64; 3];
        for idx in 0..len {
            decode_coords(idx, dim, samples_per_axis, &mut coords);
            values.push(f(&coords[..dim]));
        }
        Self::new(dim, samples_per_axis, values)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn samples_per_axis(&self) -> usize {
        self.samples_per_axis
    }

    /// Grid spacing `dx = 1/N`.
    pub fn spacing(&self) -> f64 {
        1.0 / self.samples_per_axis as f64
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Coordinates of node `idx` (lexicographic), length `dim`.
    pub fn coords(&self, idx: usize) -> [f64; 3] {
        let mut c = [0f64; 3];
        decode_coords(idx, self.dim, self.samples_per_axis, &mut c);
        c
    }

    pub fn same_geometry(&self, other: &GridFunction) -> bool {
        self.dim == other.dim && self.samples_per_axis == other.samples_per_axis
    }

    pub fn check_same_geometry(&self, other: &GridFunction) -> Result<()> {
        if self.same_geometry(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(
                self.dim,
                self.samples_per_axis,
                other.dim,
                other.samples_per_axis,
            ))
        }
    }

    /// Pointwise map; rechecks finiteness.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.dim,
            self.samples_per_axis,
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn zip(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_geometry(other)?;
        Self::new(
            self.dim,
            self.samples_per_axis,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        self.map(|v| c * v)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Max absolute difference against another grid function.
    pub fn sup_distance(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

fn decode_coords(idx: usize, dim: usize, n: usize, out: &mut [f64; 3]) {
    let mut rem = idx;
    for axis in (0..dim).rev() {
        out[axis] = (rem % n) as f64 / n as f64;
        rem /= n;
    }
}

/// Torus distance between two points of `[0,1)^dim`.
pub fn torus_distance(dim: usize, a: &[f64], b: &[f64]) -> f64 {
    let mut sum = 0.0;
    for axis in 0..dim {
        let d = (a[axis] - b[axis]).abs();
        let d = d.min(1.0 - d);
        sum += d * d;
    }
    sum.sqrt()
}

/// Complex Fourier coefficients of a grid function.
///
/// Coefficients are stored in natural FFT order: position `j` along an axis
/// holds the signed frequency `j` for `j < N/2` and `j - N` otherwise.
#[derive(Debug, Clone)]
pub struct SpectralField {
    dim: usize,
    samples_per_axis: usize,
    coefficients: Vec<Complex64>,
}

impl SpectralField {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn samples_per_axis(&self) -> usize {
        self.samples_per_axis
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.coefficients
    }

    /// Signed integer frequency vector of the coefficient at `idx`.
    pub fn frequency(&self, idx: usize) -> [i64; 3] {
        let n = self.samples_per_axis;
        let mut k = [0i64; 3];
        let mut rem = idx;
        for axis in (0..self.dim).rev() {
            let j = rem % n;
            rem /= n;
            k[axis] = if j < n / 2 {
                j as i64
            } else {
                j as i64 - n as i64
            };
        }
        k
    }

    /// Euclidean norm `|k|` of the frequency vector at `idx`.
    pub fn frequency_norm(&self, idx: usize) -> f64 {
        let k = self.frequency(idx);
        let mut sum = 0.0;
        for &ki in &k[..self.dim] {
            sum += (ki * ki) as f64;
        }
        sum.sqrt()
    }

    /// Multiply each coefficient by a radial profile of `|k|`.
    pub fn scale_radial(&mut self, m: impl Fn(f64) -> f64) {
        for idx in 0..self.coefficients.len() {
            let knorm = self.frequency_norm(idx);
            self.coefficients[idx] *= m(knorm);
        }
    }
}

/// Forward DFT (no normalization factor). Linear and invertible.
pub fn forward_transform(f: &GridFunction) -> SpectralField {
    let mut coefficients: Vec<Complex64> = f
        .values()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    fft_all_axes(&mut coefficients, f.dim(), f.samples_per_axis(), false);
    SpectralField {
        dim: f.dim(),
        samples_per_axis: f.samples_per_axis(),
        coefficients,
    }
}

/// Inverse DFT with `1/N^n`, returning the real part.
///
/// Intended for spectra with Hermitian symmetry; the discarded imaginary
/// part is at rounding level for those.
pub fn inverse_transform(s: &SpectralField) -> Result<GridFunction> {
    let mut buf = s.coefficients.clone();
    fft_all_axes(&mut buf, s.dim, s.samples_per_axis, true);
    let scale = 1.0 / buf.len() as f64;
    let values: Vec<f64> = buf.iter().map(|c| c.re * scale).collect();
    GridFunction::new(s.dim, s.samples_per_axis, values)
}

fn fft_all_axes(data: &mut [Complex64], dim: usize, n: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..dim {
        let after = n.pow((dim - 1 - axis) as u32);
        let before = data.len() / (n * after);
        for b in 0..before {
            for c in 0..after {
                if after == 1 {
                    let start = b * n;
                    fft.process(&mut data[start..start + n]);
                } else {
                    for (i, slot) in line.iter_mut().enumerate() {
                        *slot = data[(b * n + i) * after + c];
                    }
                    fft.process(&mut line);
                    for (i, slot) in line.iter().enumerate() {
                        data[(b * n + i) * after + c] = *slot;
                    }
                }
            }
        }
    }
}

/// `L^p` norm by the Riemann sum at grid nodes; `p = inf` takes the max.
pub fn lp_norm(f: &GridFunction, p: f64) -> f64 {
    assert!(p >= 1.0, "lp_norm requires p >= 1, got {p}");
    if p.is_infinite() {
        return f.sup_norm();
    }
    let cell = f.spacing().powi(f.dim() as i32);
    let sum: f64 = f.values().iter().map(|v| v.abs().powf(p)).sum();
    (sum * cell).powf(1.0 / p)
}

/// Dyadic scale ladder `t_k = 2^-k`, `k_min <= k <= k_max`, approximating
/// the measure `dt/t` with weight `ln 2` per rung.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScaleLadder {
    k_min: i32,
    k_max: i32,
}

/// Weight of one dyadic rung under `dt/t`.
pub const RUNG_WEIGHT: f64 = LN_2;

impl ScaleLadder {
    pub fn k_min(&self) -> i32 {
        self.k_min
    }

    pub fn k_max(&self) -> i32 {
        self.k_max
    }

    pub fn num_rungs(&self) -> usize {
        (self.k_max - self.k_min + 1) as usize
    }

    /// Weight of one rung under the `dt/t` quadrature.
    pub fn quadrature_weight(&self) -> f64 {
        RUNG_WEIGHT
    }

    /// Scale of rung `k`.
    pub fn scale(&self, k: i32) -> f64 {
        (2.0f64).powi(-k)
    }

    pub fn contains(&self, k: i32) -> bool {
        (self.k_min..=self.k_max).contains(&k)
    }

    /// Rungs as `(k, t_k)`, coarsest first.
    pub fn rungs(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        (self.k_min..=self.k_max).map(|k| (k, (2.0f64).powi(-k)))
    }

    /// Check that the finest rung is resolvable on the given grid.
    pub fn check_grid(&self, f: &GridFunction) -> Result<()> {
        let t = self.scale(self.k_max);
        let lo = 2.0 * f.spacing();
        if t < lo {
            return Err(Error::ScaleOutOfRange { t, lo, hi: 0.25 });
        }
        Ok(())
    }
}

/// Ladder for an `N`-point axis: `k_max = log2(N) - 1`, so the finest rung
/// is `t = 2 dx`.
pub fn make_ladder(samples_per_axis: usize, k_min: i32) -> Result<ScaleLadder> {
    if !samples_per_axis.is_power_of_two() || samples_per_axis < 2 {
        return Err(Error::InvalidGridSize(samples_per_axis));
    }
    let k_max = samples_per_axis.trailing_zeros() as i32 - 1;
    if k_min < 2 || k_min > k_max {
        return Err(Error::LadderUnsatisfiable {
            n: samples_per_axis,
            k_min,
        });
    }
    Ok(ScaleLadder { k_min, k_max })
}

/// Secondary exponent `q` of the space, finite or infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QExp {
    Finite(f64),
    Infinity,
}

impl QExp {
    pub fn is_finite(&self) -> bool {
        matches!(self, QExp::Finite(_))
    }

    /// Finite value, panicking for infinity; gate on `is_finite` first.
    pub fn value(&self) -> f64 {
        match self {
            QExp::Finite(q) => *q,
            QExp::Infinity => panic!("q = infinity has no finite value"),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
            return Ok(QExp::Infinity);
        }
        let q: f64 = s
            .parse()
            .map_err(|_| Error::ParamDomain(format!("cannot parse q from {s:?}")))?;
        Ok(QExp::Finite(q))
    }
}

impl fmt::Display for QExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QExp::Finite(q) => write!(f, "{q}"),
            QExp::Infinity => write!(f, "inf"),
        }
    }
}

/// Exponents and auxiliary parameters shared by the norm functionals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceParams {
    pub alpha: f64,
    pub p: f64,
    pub q: QExp,
    pub r: Option<f64>,
    pub lambda: Option<f64>,
    pub beta: Option<f64>,
    pub ell: Option<u32>,
}

impl SpaceParams {
    pub fn new(alpha: f64, p: f64, q: QExp) -> Self {
        Self {
            alpha,
            p,
            q,
            r: None,
            lambda: None,
            beta: None,
            ell: None,
        }
    }

    pub fn with_r(mut self, r: f64) -> Self {
        self.r = Some(r);
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = Some(lambda);
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = Some(beta);
        self
    }

    pub fn with_ell(mut self, ell: u32) -> Self {
        self.ell = Some(ell);
        self
    }

    pub fn ell_or_default(&self) -> u32 {
        self.ell.unwrap_or(1)
    }

    /// Validate the common domains: `p` in `(1,inf)`, `q` in `(1,inf]`,
    /// `alpha` in `(0, 2*ell)`, `r >= 1`, `lambda > 1`, `beta >= 1`.
    pub fn validate(&self) -> Result<()> {
        if !self.p.is_finite() || self.p <= 1.0 {
            return Err(Error::ParamDomain(format!(
                "p must lie in (1, infinity), got {}",
                self.p
            )));
        }
        if let QExp::Finite(q) = self.q {
            if !q.is_finite() || q <= 1.0 {
                return Err(Error::ParamDomain(format!(
                    "q must lie in (1, infinity], got {q}"
                )));
            }
        }
        let ell = self.ell_or_default();
        if ell < 1 {
            return Err(Error::ParamDomain("ell must be >= 1".into()));
        }
        let alpha_hi = 2.0 * ell as f64;
        if !(self.alpha > 0.0 && self.alpha < alpha_hi) {
            return Err(Error::ParamDomain(format!(
                "alpha must lie in (0, {alpha_hi}), got {}",
                self.alpha
            )));
        }
        if let Some(r) = self.r {
            if r < 1.0 {
                return Err(Error::ParamDomain(format!("r must be >= 1, got {r}")));
            }
            if let QExp::Finite(q) = self.q {
                if r > q {
                    return Err(Error::ParamDomain(format!(
                        "r must lie in [1, q] with q = {q}, got {r}"
                    )));
                }
            }
        }
        if let Some(l) = self.lambda {
            if l <= 1.0 {
                return Err(Error::ParamDomain(format!("lambda must be > 1, got {l}")));
            }
        }
        if let Some(b) = self.beta {
            if b < 1.0 {
                return Err(Error::ParamDomain(format!("beta must be >= 1, got {b}")));
            }
        }
        Ok(())
    }
}

/// Write the `GF1` text format: header `GF1 dim=<n> N=<N>`, then samples
/// in lexicographic order.
pub fn write_gf1<W: Write>(f: &GridFunction, mut w: W) -> Result<()> {
    writeln!(w, "GF1 dim={} N={}", f.dim(), f.samples_per_axis())?;
    for v in f.values() {
        writeln!(w, "{v}")?;
    }
    Ok(())
}

/// Parse the `GF1` text format.
pub fn read_gf1<R: BufRead>(mut r: R) -> Result<GridFunction> {
    let mut header = String::new();
    r.read_line(&mut header)?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some("GF1") {
        return Err(Error::Format("missing GF1 magic in header".into()));
    }
    let dim = parse_kv(parts.next(), "dim")?;
    let n = parse_kv(parts.next(), "N")?;
    let mut body = String::new();
    r.read_to_string(&mut body)?;
    let values: std::result::Result<Vec<f64>, _> =
        body.split_whitespace().map(str::parse::<f64>).collect();
    let values = values.map_err(|e| Error::Format(format!("bad sample value: {e}")))?;
    GridFunction::new(dim, n, values)
}

fn parse_kv(tok: Option<&str>, key: &str) -> Result<usize> {
    let tok = tok.ok_or_else(|| Error::Format(format!("missing {key}= in header")))?;
    let val = tok
        .strip_prefix(&format!("{key}="))
        .ok_or_else(|| Error::Format(format!("expected {key}=<value>, got {tok:?}")))?;
    val.parse()
        .map_err(|_| Error::Format(format!("cannot parse {key} from {val:?}")))
}

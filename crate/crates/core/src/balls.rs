//! Discrete balls on the periodic grid.
//!
//! A node `y` belongs to `B(x, t)` iff the torus distance `d(x, y) < t`
//! (ties excluded). Averages weight every member node equally, i.e. by
//! `dx^n` normalized by the discrete ball measure.

use crate::error::{Error, Result};
use crate::grid::GridFunction;

/// Lattice offsets of a discrete ball, shared by every center.
#[derive(Debug, Clone)]
pub(crate) struct OffsetTable {
    dim: usize,
    n: usize,
    /// Flattened index deltas with wrap-around already folded in, plus the
    /// per-offset weight.
    entries: Vec<(isize, f64)>,
    /// Final division applied to each accumulated sum; keeps uniform
    /// averages of constants exact.
    divisor: f64,
}

impl OffsetTable {
    pub(crate) fn len(&self) -> usize {
        self.entries.len()
    }

    /// Apply the table as a circular correlation: `out[x] = sum_d w_d f[x+d]`.
    pub(crate) fn apply(&self, f: &GridFunction) -> GridFunction {
        assert_eq!(f.dim(), self.dim);
        assert_eq!(f.samples_per_axis(), self.n);
        let vals = f.values();
        let mut out = vec![0.0; vals.len()];
        match self.dim {
            1 => {
                let n = self.n as isize;
                for (x, slot) in out.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for &(d, w) in &self.entries {
                        let mut j = x as isize + d;
                        if j >= n {
                            j -= n;
                        } else if j < 0 {
                            j += n;
                        }
                        acc += w * vals[j as usize];
                    }
                    *slot = acc / self.divisor;
                }
            }
            _ => {
                // entries carry pre-split per-axis deltas in the high bits;
                // recompute per-axis wrap from the flattened delta instead.
                let n = self.n;
                let dim = self.dim;
                let mut coords = vec![0usize; dim];
                for (x, slot) in out.iter_mut().enumerate() {
                    decode(x, n, dim, &mut coords);
                    let mut acc = 0.0;
                    for &(packed, w) in &self.entries {
                        let mut idx = 0usize;
                        let mut rem = packed as usize;
                        for c in coords.iter().take(dim) {
                            let delta = rem % (2 * n);
                            rem /= 2 * n;
                            let mut j = c + delta;
                            if j >= n {
                                j -= n;
                                if j >= n {
                                    j -= n;
                                }
                            }
                            idx = idx * n + j;
                        }
                        acc += w * vals[idx];
                    }
                    *slot = acc / self.divisor;
                }
            }
        }
        GridFunction::new(self.dim, self.n, out).expect("weighted sums of finite values")
    }
}

fn decode(idx: usize, n: usize, dim: usize, out: &mut [usize]) {
    let mut rem = idx;
    for axis in (0..dim).rev() {
        out[axis] = rem % n;
        rem /= n;
    }
}

/// Pack per-axis non-negative deltas (each already reduced mod `n`) into
/// one integer; axis 0 occupies the lowest digits, matching the unpack
/// order in `OffsetTable::apply`.
fn pack(deltas: &[usize], n: usize, dim: usize) -> isize {
    let mut p = 0usize;
    for (axis, &d) in deltas.iter().enumerate().take(dim) {
        p += d * (2 * n).pow(axis as u32);
    }
    p as isize
}

/// Enumerate signed per-axis deltas within `radius_nodes` of zero and keep
/// those with torus distance `< t`, weighted uniformly by `1/count`.
pub(crate) fn ball_table(dim: usize, n: usize, t: f64) -> OffsetTable {
    let spacing = 1.0 / n as f64;
    let reach = (t / spacing).ceil() as i64;
    let mut deltas_signed: Vec<[i64; 3]> = Vec::new();
    let mut cursor = [0i64; 3];
    enumerate_box(dim, reach, &mut cursor, 0, &mut |delta| {
        let mut sum = 0.0;
        for &d in &delta[..dim] {
            let dd = d.unsigned_abs() as f64 * spacing;
            let dd = dd.min(1.0 - dd);
            sum += dd * dd;
        }
        if sum.sqrt() < t {
            deltas_signed.push(*delta);
        }
    });
    let count = deltas_signed.len() as f64;
    finish_table(dim, n, deltas_signed.into_iter().map(|d| (d, 1.0)), count)
}

/// Number of nodes in a discrete ball of radius `t`.
pub(crate) fn ball_count(dim: usize, n: usize, t: f64) -> usize {
    ball_table(dim, n, t).len()
}

/// Offsets over the whole torus with weight `(t/(t+d))^(lambda n)`,
/// truncated where the weight falls below `cutoff` (the center weight
/// is 1). Weights carry the `dx^n / t^n` quadrature factor.
pub(crate) fn gstar_weight_table(
    dim: usize,
    n: usize,
    t: f64,
    lambda: f64,
    cutoff: f64,
) -> OffsetTable {
    let spacing = 1.0 / n as f64;
    let cell_over_tn = spacing.powi(dim as i32) / t.powi(dim as i32);
    let exponent = lambda * dim as f64;
    let half = (n / 2) as i64;
    let mut entries: Vec<([i64; 3], f64)> = Vec::new();
    let mut cursor = [0i64; 3];
    enumerate_box(dim, half, &mut cursor, 0, &mut |delta| {
        // each node once: the representative range per axis is (-n/2, n/2]
        if delta[..dim].iter().any(|&d| d == -half) {
            return;
        }
        let mut sum = 0.0;
        for &d in &delta[..dim] {
            let dd = d.unsigned_abs() as f64 * spacing;
            let dd = dd.min(1.0 - dd);
            sum += dd * dd;
        }
        let dist = sum.sqrt();
        let w = (t / (t + dist)).powf(exponent);
        if w >= cutoff {
            entries.push((*delta, w * cell_over_tn));
        }
    });
    finish_table(dim, n, entries.into_iter(), 1.0)
}

fn enumerate_box(
    dim: usize,
    reach: i64,
    cursor: &mut [i64; 3],
    axis: usize,
    visit: &mut impl FnMut(&[i64; 3]),
) {
    if axis == dim {
        visit(cursor);
        return;
    }
    for d in -reach..=reach {
        cursor[axis] = d;
        enumerate_box(dim, reach, cursor, axis + 1, visit);
    }
}

fn finish_table(
    dim: usize,
    n: usize,
    entries: impl Iterator<Item = ([i64; 3], f64)>,
    divisor: f64,
) -> OffsetTable {
    let n_i = n as i64;
    let packed: Vec<(isize, f64)> = entries
        .map(|(delta, w)| {
            if dim == 1 {
                (delta[0] as isize, w)
            } else {
                let mut reduced = [0usize; 3];
                for axis in 0..dim {
                    reduced[axis] = delta[axis].rem_euclid(n_i) as usize;
                }
                (pack(&reduced, n, dim), w)
            }
        })
        .collect();
    OffsetTable {
        dim,
        n,
        entries: packed,
        divisor,
    }
}

impl OffsetTable {
    /// Fold the ball values around every node: `out[x] = finish(fold over
    /// y in B(x,t) of f[y])`. Weights are ignored; `divisor` is passed to
    /// `finish` as the member count.
    pub(crate) fn fold(
        &self,
        f: &GridFunction,
        init: f64,
        fold: impl Fn(f64, f64, f64) -> f64, // (acc, center value, ball value)
        finish: impl Fn(f64, f64) -> f64,    // (acc, count)
    ) -> GridFunction {
        assert_eq!(f.dim(), self.dim);
        assert_eq!(f.samples_per_axis(), self.n);
        let vals = f.values();
        let count = self.entries.len() as f64;
        let mut out = vec![0.0; vals.len()];
        if self.dim == 1 {
            let n = self.n as isize;
            for (x, slot) in out.iter_mut().enumerate() {
                let center = vals[x];
                let mut acc = init;
                for &(d, _) in &self.entries {
                    let mut j = x as isize + d;
                    if j >= n {
                        j -= n;
                    } else if j < 0 {
                        j += n;
                    }
                    acc = fold(acc, center, vals[j as usize]);
                }
                *slot = finish(acc, count);
            }
        } else {
            let n = self.n;
            let dim = self.dim;
            let mut coords = vec![0usize; dim];
            for (x, slot) in out.iter_mut().enumerate() {
                decode(x, n, dim, &mut coords);
                let center = vals[x];
                let mut acc = init;
                for &(packed, _) in &self.entries {
                    let mut idx = 0usize;
                    let mut rem = packed as usize;
                    for c in coords.iter().take(dim) {
                        let delta = rem % (2 * n);
                        rem /= 2 * n;
                        let mut j = c + delta;
                        if j >= n {
                            j -= n;
                            if j >= n {
                                j -= n;
                            }
                        }
                        idx = idx * n + j;
                    }
                    acc = fold(acc, center, vals[idx]);
                }
                *slot = finish(acc, count);
            }
        }
        GridFunction::new(self.dim, self.n, out).expect("folds of finite values")
    }
}

/// `avg_(y in B(x,t)) |f(x) - f(y)|^q`, or the sup over the ball when
/// `power` is `None`.
pub(crate) fn difference_average(
    f: &GridFunction,
    t: f64,
    power: Option<f64>,
) -> Result<GridFunction> {
    let table = checked_table(f, t)?;
    Ok(match power {
        Some(q) => table.fold(
            f,
            0.0,
            |acc, c, v| acc + (c - v).abs().powf(q),
            |acc, count| acc / count,
        ),
        None => table.fold(f, 0.0, |acc, c, v| acc.max((c - v).abs()), |acc, _| acc),
    })
}

/// Per-node max (`maximize = true`) or min of `f` over the ball.
pub(crate) fn ball_extreme(f: &GridFunction, t: f64, maximize: bool) -> Result<GridFunction> {
    let table = checked_table(f, t)?;
    Ok(if maximize {
        table.fold(
            f,
            f64::NEG_INFINITY,
            |acc, _, v| acc.max(v),
            |acc, _| acc,
        )
    } else {
        table.fold(f, f64::INFINITY, |acc, _, v| acc.min(v), |acc, _| acc)
    })
}

fn checked_table(f: &GridFunction, t: f64) -> Result<OffsetTable> {
    if t <= 0.0 || t > 0.5 {
        return Err(Error::ScaleOutOfRange {
            t,
            lo: f.spacing(),
            hi: 0.5,
        });
    }
    Ok(ball_table(f.dim(), f.samples_per_axis(), t))
}

/// Mean of `f` over the discrete ball of radius `t` around every node.
pub(crate) fn ball_average(f: &GridFunction, t: f64) -> Result<GridFunction> {
    if t <= 0.0 || t > 0.5 {
        return Err(Error::ScaleOutOfRange {
            t,
            lo: f.spacing(),
            hi: 0.5,
        });
    }
    Ok(ball_table(f.dim(), f.samples_per_axis(), t).apply(f))
}

//! Remez exchange for odd-length, even-symmetric (type I) linear-phase FIR
//! filters.
//!
//! The amplitude response is a cosine polynomial of degree `(N - 1) / 2`,
//! which is an ordinary polynomial in `x = cos(w)`. Each iteration solves for
//! the levelled deviation on the current reference set in closed form, builds
//! the barycentric interpolant through the reference values, scans the dense
//! grid for the new extremal set and refines each interior extremum with a
//! parabolic fit.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// One band of a piecewise-constant approximation problem, in rad/sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub start: f64,
    pub end: f64,
    pub desired: f64,
    pub weight: f64,
}

impl Band {
    pub fn new(start: f64, end: f64, desired: f64, weight: f64) -> Self {
        Self {
            start,
            end,
            desired,
            weight,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemezOptions {
    /// Dense-grid points per cosine coefficient.
    pub grid_density: usize,
    pub max_iterations: usize,
    /// Relative change of the levelled deviation that counts as converged.
    pub tolerance: f64,
}

impl Default for RemezOptions {
    fn default() -> Self {
        Self {
            grid_density: 16,
            max_iterations: 64,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RemezDesign {
    pub taps: Vec<f64>,
    /// Levelled weighted deviation on the final reference set.
    pub deviation: f64,
    /// Largest weighted error seen on the dense grid in the final iteration.
    pub max_error: f64,
    pub iterations: usize,
    /// Final reference frequencies, ascending.
    pub extremal_frequencies: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
struct Point {
    omega: f64,
    band: usize,
}

struct Grid {
    omega: Vec<f64>,
    band: Vec<usize>,
    /// Inclusive index range of each band.
    ranges: Vec<(usize, usize)>,
}

impl Grid {
    fn build(bands: &[Band], r: usize, density: usize) -> Self {
        let spacing = PI / (density * r) as f64;
        let mut omega = Vec::new();
        let mut band = Vec::new();
        let mut ranges = Vec::with_capacity(bands.len());
        for (bi, b) in bands.iter().enumerate() {
            let width = b.end - b.start;
            let first = omega.len();
            if width <= 0.0 {
                omega.push(b.start);
                band.push(bi);
            } else {
                let n = ((width / spacing).ceil() as usize + 1).max(2);
                for i in 0..n {
                    let w = if i + 1 == n {
                        b.end
                    } else {
                        b.start + width * i as f64 / (n - 1) as f64
                    };
                    omega.push(w);
                    band.push(bi);
                }
            }
            ranges.push((first, omega.len() - 1));
        }
        Self {
            omega,
            band,
            ranges,
        }
    }
}

/// Barycentric weights `1 / prod_{j != i} (x_i - x_j)`, scaled so that the
/// largest has unit magnitude. Products are accumulated in the log domain.
fn barycentric_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut logs = vec![0.0; n];
    let mut signs = vec![1.0; n];
    for i in 0..n {
        let mut acc = 0.0;
        let mut sign = 1.0;
        for j in 0..n {
            if i != j {
                let d = x[i] - x[j];
                acc += d.abs().ln();
                if d < 0.0 {
                    sign = -sign;
                }
            }
        }
        logs[i] = -acc;
        signs[i] = sign;
    }
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    logs.iter()
        .zip(&signs)
        .map(|(l, s)| s * (l - top).exp())
        .collect()
}

struct Interpolant {
    x: Vec<f64>,
    w: Vec<f64>,
    y: Vec<f64>,
}

impl Interpolant {
    fn eval(&self, x: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&xi, &wi), &yi) in self.x.iter().zip(&self.w).zip(&self.y) {
            let d = x - xi;
            if d == 0.0 {
                return yi;
            }
            let t = wi / d;
            num += t * yi;
            den += t;
        }
        num / den
    }
}

/// Solves the levelled-deviation problem on a reference set, returning the
/// signed deviation and the interpolant through the first `r` points.
fn level(refs: &[Point], bands: &[Band]) -> (f64, Interpolant) {
    let x: Vec<f64> = refs.iter().map(|p| p.omega.cos()).collect();
    let w = barycentric_weights(&x);
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, (p, wi)) in refs.iter().zip(&w).enumerate() {
        let b = &bands[p.band];
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        num += wi * b.desired;
        den += sign * wi / b.weight;
    }
    let delta = num / den;
    let r = refs.len() - 1;
    let y: Vec<f64> = refs[..r]
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let b = &bands[p.band];
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            b.desired - sign * delta / b.weight
        })
        .collect();
    let xr = x[..r].to_vec();
    let wr = barycentric_weights(&xr);
    (delta, Interpolant { x: xr, w: wr, y })
}

#[derive(Debug, Clone, Copy)]
struct Extremum {
    point: Point,
    grid: usize,
    error: f64,
}

/// Keeps the larger of consecutive same-signed extrema.
fn enforce_alternation(cands: Vec<Extremum>) -> Vec<Extremum> {
    let mut out: Vec<Extremum> = Vec::with_capacity(cands.len());
    for c in cands {
        match out.last_mut() {
            Some(last) if last.error.signum() == c.error.signum() => {
                if c.error.abs() > last.error.abs() {
                    *last = c;
                }
            }
            _ => out.push(c),
        }
    }
    out
}

fn reduce_to(mut ext: Vec<Extremum>, count: usize) -> Vec<Extremum> {
    while ext.len() > count {
        let n = ext.len();
        if n == count + 1 {
            if ext[0].error.abs() < ext[n - 1].error.abs() {
                ext.remove(0);
            } else {
                ext.pop();
            }
            continue;
        }
        let (idx, _) = ext
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.error.abs().total_cmp(&b.1.error.abs()))
            .expect("non-empty");
        ext.remove(idx);
        if idx > 0 && idx < ext.len() {
            // neighbours now share a sign
            if ext[idx - 1].error.abs() < ext[idx].error.abs() {
                ext.remove(idx - 1);
            } else {
                ext.remove(idx);
            }
        }
    }
    ext
}

fn validate(num_taps: usize, bands: &[Band]) -> Result<()> {
    if num_taps == 0 || num_taps % 2 == 0 {
        return Err(Error::UnsupportedFilter(format!(
            "exchange design needs an odd length, got {num_taps}"
        )));
    }
    if bands.is_empty() {
        return Err(Error::InvalidSpec("no bands given".into()));
    }
    let mut prev_end = f64::NEG_INFINITY;
    for b in bands {
        if !(b.start.is_finite() && b.end.is_finite() && b.desired.is_finite()) {
            return Err(Error::InvalidSpec("non-finite band parameter".into()));
        }
        if b.start < 0.0 || b.end > PI + 1e-12 || b.start > b.end {
            return Err(Error::InvalidSpec(format!(
                "band [{}, {}] outside [0, pi] or reversed",
                b.start, b.end
            )));
        }
        if b.start <= prev_end {
            return Err(Error::InvalidSpec("bands overlap or are unsorted".into()));
        }
        if !(b.weight > 0.0) {
            return Err(Error::InvalidSpec("band weights must be positive".into()));
        }
        prev_end = b.end;
    }
    Ok(())
}

/// Designs the minimax type-I filter of `num_taps` taps for the given bands.
pub fn remez(num_taps: usize, bands: &[Band], opts: &RemezOptions) -> Result<RemezDesign> {
    validate(num_taps, bands)?;
    let r = (num_taps + 1) / 2;
    let mut density = opts.grid_density.max(1);
    let mut grid = Grid::build(bands, r, density);
    while grid.omega.len() < r + 1 {
        density *= 2;
        grid = Grid::build(bands, r, density);
        if density > 1 << 12 {
            return Err(Error::InvalidSpec(
                "bands too narrow for the requested length".into(),
            ));
        }
    }
    let g = grid.omega.len();
    let mut refs: Vec<Point> = (0..=r)
        .map(|i| {
            let idx = i * (g - 1) / r;
            Point {
                omega: grid.omega[idx],
                band: grid.band[idx],
            }
        })
        .collect();

    let mut prev_delta: Option<f64> = None;
    let mut errors = vec![0.0; g];
    for iteration in 1..=opts.max_iterations {
        let (delta, interp) = level(&refs, bands);
        let weighted_error = |omega: f64, band: usize| {
            let b = &bands[band];
            b.weight * (b.desired - interp.eval(omega.cos()))
        };
        for (e, (&w, &b)) in errors.iter_mut().zip(grid.omega.iter().zip(&grid.band)) {
            *e = weighted_error(w, b);
        }

        let mut cands = Vec::new();
        for &(s, e) in &grid.ranges {
            for i in s..=e {
                // local extremum of the signed error, band edges always eligible
                let v = errors[i];
                let beats = |j: usize| {
                    if v >= 0.0 {
                        v >= errors[j]
                    } else {
                        v <= errors[j]
                    }
                };
                let left_ok = i == s || beats(i - 1);
                let right_ok = i == e || beats(i + 1);
                if left_ok && right_ok {
                    cands.push(Extremum {
                        point: Point {
                            omega: grid.omega[i],
                            band: grid.band[i],
                        },
                        grid: i,
                        error: errors[i],
                    });
                }
            }
        }
        let floor = delta.abs() * (1.0 - 1e-9);
        let strong: Vec<Extremum> = cands
            .iter()
            .copied()
            .filter(|c| c.error.abs() >= floor)
            .collect();
        let mut ext = enforce_alternation(strong);
        if ext.len() < r + 1 {
            ext = enforce_alternation(cands.clone());
        }
        if ext.len() < r + 1 {
            return Err(Error::NoConvergence(iteration));
        }
        let mut ext = reduce_to(ext, r + 1);

        // Parabolic refinement of interior extrema.
        for e in ext.iter_mut() {
            let i = e.grid;
            let (s, end) = grid.ranges[e.point.band];
            if i <= s || i >= end {
                continue;
            }
            let (y0, y1, y2) = (errors[i - 1].abs(), errors[i].abs(), errors[i + 1].abs());
            let curvature = y0 - 2.0 * y1 + y2;
            if curvature >= 0.0 {
                continue;
            }
            let h = grid.omega[i + 1] - grid.omega[i];
            let offset = 0.5 * h * (y0 - y2) / curvature;
            if offset.abs() >= h {
                continue;
            }
            let omega = grid.omega[i] + offset;
            let err = weighted_error(omega, e.point.band);
            if err.abs() > e.error.abs() && err.signum() == e.error.signum() {
                e.point.omega = omega;
                e.error = err;
            }
        }

        let max_error = ext
            .iter()
            .map(|e| e.error.abs())
            .chain(errors.iter().map(|e| e.abs()))
            .fold(0.0, f64::max);
        let settled = prev_delta
            .map(|p: f64| (delta.abs() - p.abs()).abs() <= opts.tolerance * delta.abs())
            .unwrap_or(false);
        let levelled = max_error - delta.abs() <= opts.tolerance * max_error;
        if settled || levelled {
            let taps = taps_from_amplitude(num_taps, |w| interp.eval(w.cos()));
            return Ok(RemezDesign {
                taps,
                deviation: delta.abs(),
                max_error,
                iterations: iteration,
                extremal_frequencies: refs.iter().map(|p| p.omega).collect(),
            });
        }
        prev_delta = Some(delta);
        refs = ext.iter().map(|e| e.point).collect();
    }
    Err(Error::NoConvergence(opts.max_iterations))
}

/// Recovers type-I taps from the zero-phase amplitude sampled at `2 pi k / N`.
fn taps_from_amplitude(num_taps: usize, amplitude: impl Fn(f64) -> f64) -> Vec<f64> {
    let n = num_taps;
    let half = (n - 1) / 2;
    let samples: Vec<f64> = (0..=half)
        .map(|k| amplitude(2.0 * PI * k as f64 / n as f64))
        .collect();
    let mut taps = vec![0.0; n];
    for m in 0..=half {
        let mut acc = samples[0];
        for (k, a) in samples.iter().enumerate().skip(1) {
            acc += 2.0 * a * (2.0 * PI * (k * m % n) as f64 / n as f64).cos();
        }
        let v = acc / n as f64;
        taps[half + m] = v;
        taps[half - m] = v;
    }
    taps
}

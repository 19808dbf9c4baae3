//! Equiripple linear-phase FIR design, order estimation and frequency-domain
//! measurement.
//!
//! Frequencies are normalized angular frequencies in rad/sample, so the
//! Nyquist frequency is `pi`.

mod remez;

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

pub use remez::{remez, Band, RemezDesign, RemezOptions};

/// Peak-to-peak passband ripple in dB to the linear deviation `dp`, with the
/// passband spanning `[1 - dp, 1 + dp]`.
pub fn ripple_db_to_deviation(ripple_db: f64) -> f64 {
    let g = 10f64.powf(ripple_db / 20.0);
    (g - 1.0) / (g + 1.0)
}

pub fn deviation_to_ripple_db(deviation: f64) -> f64 {
    20.0 * ((1.0 + deviation) / (1.0 - deviation)).log10()
}

pub fn atten_db_to_deviation(atten_db: f64) -> f64 {
    10f64.powf(-atten_db / 20.0)
}

pub fn deviation_to_atten_db(deviation: f64) -> f64 {
    -20.0 * deviation.log10()
}

/// Two-band lowpass design target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub passband_edge: f64,
    pub stopband_edge: f64,
    pub passband_ripple_db: f64,
    pub stopband_atten_db: f64,
}

impl FilterSpec {
    pub fn new(
        passband_edge: f64,
        stopband_edge: f64,
        passband_ripple_db: f64,
        stopband_atten_db: f64,
    ) -> Result<Self> {
        let spec = Self {
            passband_edge,
            stopband_edge,
            passband_ripple_db,
            stopband_atten_db,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.passband_edge,
            self.stopband_edge,
            self.passband_ripple_db,
            self.stopband_atten_db,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidSpec("non-finite parameter".into()));
        }
        if !(self.passband_edge > 0.0
            && self.passband_edge < self.stopband_edge
            && self.stopband_edge <= PI)
        {
            return Err(Error::InvalidSpec(format!(
                "need 0 < passband edge ({}) < stopband edge ({}) <= pi",
                self.passband_edge, self.stopband_edge
            )));
        }
        if !(self.passband_ripple_db > 0.0) || !(self.stopband_atten_db > 0.0) {
            return Err(Error::InvalidSpec(
                "ripple and attenuation must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn passband_deviation(&self) -> f64 {
        ripple_db_to_deviation(self.passband_ripple_db)
    }

    pub fn stopband_deviation(&self) -> f64 {
        atten_db_to_deviation(self.stopband_atten_db)
    }

    pub fn transition_width(&self) -> f64 {
        self.stopband_edge - self.passband_edge
    }

    pub fn with_passband_deviation(mut self, deviation: f64) -> Self {
        self.passband_ripple_db = deviation_to_ripple_db(deviation);
        self
    }

    pub fn with_stopband_deviation(mut self, deviation: f64) -> Self {
        self.stopband_atten_db = deviation_to_atten_db(deviation);
        self
    }

    /// Both edges moved by `offset`, transition width unchanged.
    pub fn shifted(self, offset: f64) -> Result<Self> {
        Self::new(
            self.passband_edge + offset,
            self.stopband_edge + offset,
            self.passband_ripple_db,
            self.stopband_atten_db,
        )
    }

    pub(crate) fn bands(&self) -> [BandTarget; 2] {
        [
            BandTarget::pass(0.0, self.passband_edge, self.passband_deviation()),
            BandTarget::stop(self.stopband_edge, PI, self.stopband_deviation()),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    /// `h[n] == h[N - 1 - n]` exactly.
    Even,
    None,
}

/// Immutable FIR coefficient sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Fir {
    coeffs: Arc<[Complex64]>,
    symmetry: Symmetry,
}

impl Fir {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::UnsupportedFilter(
                "a filter needs at least one coefficient".into(),
            ));
        }
        if coeffs
            .iter()
            .any(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(Error::UnsupportedFilter("non-finite coefficient".into()));
        }
        let n = coeffs.len();
        let symmetric = (0..n / 2).all(|i| coeffs[i] == coeffs[n - 1 - i]);
        let symmetry = if symmetric {
            Symmetry::Even
        } else {
            Symmetry::None
        };
        Ok(Self {
            coeffs: coeffs.into(),
            symmetry,
        })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// Unit impulse, the identity filter.
    pub fn impulse() -> Self {
        Self::delay(0, 1)
    }

    /// Unit-gain delay of `delay` samples inside a filter of `len` taps.
    pub fn delay(delay: usize, len: usize) -> Self {
        assert!(delay < len, "delay must fit inside the filter");
        let mut c = vec![Complex64::new(0.0, 0.0); len];
        c[delay] = Complex64::new(1.0, 0.0);
        Self::new(c).expect("finite")
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.im == 0.0)
    }

    pub fn real_coeffs(&self) -> Option<Vec<f64>> {
        self.is_real()
            .then(|| self.coeffs.iter().map(|c| c.re).collect())
    }

    /// Group delay `(N - 1) / 2` of an odd-length even-symmetric filter.
    pub fn center(&self) -> Option<usize> {
        (self.symmetry == Symmetry::Even && self.len() % 2 == 1).then(|| (self.len() - 1) / 2)
    }
}

/// `sum_n h[n] e^{-j w n}` at each grid frequency.
///
/// The phasor is advanced by complex multiplication and re-anchored from the
/// exact angle every few taps, which keeps the rounding error independent of
/// the filter length.
pub fn freq_response(filter: &Fir, grid: &[f64]) -> Result<Vec<Complex64>> {
    const ANCHOR: usize = 16;
    if let Some(bad) = grid.iter().find(|w| !(**w >= 0.0 && **w < 2.0 * PI)) {
        return Err(Error::InvalidGrid(format!(
            "frequency {bad} outside [0, 2 pi)"
        )));
    }
    let coeffs = filter.coeffs();
    Ok(grid
        .iter()
        .map(|&w| {
            let step = Complex64::from_polar(1.0, -w);
            let mut acc = Complex64::new(0.0, 0.0);
            let mut phasor = Complex64::new(1.0, 0.0);
            for (n, c) in coeffs.iter().enumerate() {
                if n % ANCHOR == 0 {
                    let angle = (w * n as f64) % (2.0 * PI);
                    phasor = Complex64::from_polar(1.0, -angle);
                }
                acc += c * phasor;
                phasor *= step;
            }
            acc
        })
        .collect())
}

/// Response at `w_k = 2 pi k / points`, `k = 0..points`, computed by folding
/// the coefficients modulo `points` and taking one FFT.
pub fn freq_response_uniform(filter: &Fir, points: usize) -> Result<Vec<Complex64>> {
    if points == 0 {
        return Err(Error::InvalidGrid("empty grid".into()));
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); points];
    for (n, c) in filter.coeffs().iter().enumerate() {
        buf[n % points] += c;
    }
    FftPlanner::new().plan_fft_forward(points).process(&mut buf);
    Ok(buf)
}

/// Zero-phase amplitude `H(w) e^{j w (N-1)/2}` of an even-symmetric filter.
pub fn zero_phase_amplitude(filter: &Fir, omega: f64) -> f64 {
    let n = filter.len();
    let half = (n as f64 - 1.0) / 2.0;
    filter
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| c.re * (omega * (i as f64 - half)).cos())
        .sum()
}

/// Maps a frequency on `[0, 2 pi)` to `(-pi, pi]`.
pub(crate) fn wrap_signed(w: f64) -> f64 {
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Measured counterparts of a [`FilterSpec`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandMeasurement {
    /// `20 log10(max |H| / min |H|)` over the passband.
    pub achieved_passband_ripple_db: f64,
    /// `-20 log10(max |H|)` over the stopband.
    pub achieved_stopband_atten_db: f64,
    /// Stopband edge minus passband edge of the measured target.
    pub transition_width: f64,
}

impl BandMeasurement {
    /// Strict comparison up to rounding noise.
    pub fn meets(&self, spec: &FilterSpec) -> bool {
        self.meets_with_slack(spec, 1e-9)
    }

    pub fn meets_with_slack(&self, spec: &FilterSpec, slack_db: f64) -> bool {
        self.achieved_passband_ripple_db <= spec.passband_ripple_db + slack_db
            && self.achieved_stopband_atten_db >= spec.stopband_atten_db - slack_db
    }
}

/// Evaluates `|H|` on `16 N` points over `[0, pi]` plus the exact band edges.
///
/// Complex filters are measured on both sides of zero: the passband is
/// `|w| <= passband_edge` and the stopband `stopband_edge <= |w| <= pi`.
pub fn measure_spec(filter: &Fir, spec: &FilterSpec) -> BandMeasurement {
    measure_spec_on(filter, spec, 16 * filter.len().max(64))
}

pub fn measure_spec_on(filter: &Fir, spec: &FilterSpec, half_grid: usize) -> BandMeasurement {
    let points = 2 * half_grid;
    let uniform = freq_response_uniform(filter, points).expect("non-empty grid");
    let mut samples: Vec<(f64, f64)> = uniform
        .iter()
        .enumerate()
        .map(|(k, h)| {
            (
                wrap_signed(2.0 * PI * k as f64 / points as f64).abs(),
                h.norm(),
            )
        })
        .collect();
    let mut edges = vec![spec.passband_edge, spec.stopband_edge];
    if !filter.is_real() {
        edges.push(2.0 * PI - spec.passband_edge);
        if spec.stopband_edge < PI {
            edges.push(2.0 * PI - spec.stopband_edge);
        }
    }
    edges.retain(|w| *w < 2.0 * PI);
    let at_edges = freq_response(filter, &edges).expect("edges inside [0, 2 pi)");
    samples.extend(
        edges
            .iter()
            .zip(&at_edges)
            .map(|(w, h)| (wrap_signed(*w).abs(), h.norm())),
    );

    let (mut pmax, mut pmin, mut smax) = (0.0f64, f64::INFINITY, 0.0f64);
    for &(w, mag) in &samples {
        if w <= spec.passband_edge {
            pmax = pmax.max(mag);
            pmin = pmin.min(mag);
        } else if w >= spec.stopband_edge {
            smax = smax.max(mag);
        }
    }
    BandMeasurement {
        achieved_passband_ripple_db: 20.0 * (pmax / pmin).log10(),
        achieved_stopband_atten_db: -20.0 * smax.log10(),
        transition_width: spec.transition_width(),
    }
}

/// Herrmann-Rabiner-Chan length estimate, rounded up to an odd length.
pub fn estimate_order(spec: &FilterSpec) -> Result<usize> {
    estimate_order_with_floor(spec, 1e-5 * PI)
}

pub fn estimate_order_with_floor(spec: &FilterSpec, floor: f64) -> Result<usize> {
    spec.validate()?;
    let width = spec.transition_width();
    if width < floor {
        return Err(Error::TransitionTooNarrow { width, floor });
    }
    Ok(herrmann_length(
        width,
        spec.passband_deviation(),
        spec.stopband_deviation(),
    ))
}

pub(crate) fn herrmann_length(width: f64, dp: f64, ds: f64) -> usize {
    let f = width / (2.0 * PI);
    let (lp, ls) = (dp.log10(), ds.log10());
    let d_inf = (5.309e-3 * lp * lp + 7.114e-2 * lp - 0.4761) * ls
        + (-2.66e-3 * lp * lp - 0.5941 * lp - 0.4278);
    let skew = 11.01217 + 0.51244 * (lp - ls);
    let n = (d_inf / f - skew * f + 1.0).ceil().max(1.0) as usize;
    n | 1
}

/// Band of a piecewise-constant design target with its allowed deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandTarget {
    pub start: f64,
    pub end: f64,
    pub gain: f64,
    pub deviation: f64,
}

impl BandTarget {
    pub fn pass(start: f64, end: f64, deviation: f64) -> Self {
        Self {
            start,
            end,
            gain: 1.0,
            deviation,
        }
    }

    pub fn stop(start: f64, end: f64, deviation: f64) -> Self {
        Self {
            start,
            end,
            gain: 0.0,
            deviation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquirippleOptions {
    pub remez: RemezOptions,
    /// Longest filter the automatic length search will try.
    pub max_length: usize,
}

impl Default for EquirippleOptions {
    fn default() -> Self {
        Self {
            remez: RemezOptions::default(),
            max_length: 4095,
        }
    }
}

/// Weighted minimax design for band targets at a fixed odd length; weights are
/// the reciprocal deviations.
pub fn design_bands(
    targets: &[BandTarget],
    length: usize,
    opts: &EquirippleOptions,
) -> Result<Fir> {
    if length == 1 {
        return Ok(Fir::impulse());
    }
    let bands: Vec<Band> = targets
        .iter()
        .map(|t| Band::new(t.start, t.end.min(PI), t.gain, 1.0 / t.deviation))
        .collect();
    let d = remez(length, &bands, &opts.remez)?;
    Fir::from_real(&d.taps)
}

/// Largest `| |H| - gain |` over each band, on a grid of `16 N` points per band
/// width of `pi` plus the band edges.
pub fn band_deviations(filter: &Fir, targets: &[BandTarget]) -> Vec<f64> {
    let density = 16 * filter.len().max(64);
    targets
        .iter()
        .map(|t| {
            let end = t.end.min(PI);
            let n = (((end - t.start) / PI) * density as f64).ceil().max(1.0) as usize + 1;
            let grid: Vec<f64> = (0..n)
                .map(|i| {
                    if i + 1 == n {
                        end
                    } else {
                        t.start + (end - t.start) * i as f64 / (n - 1) as f64
                    }
                })
                .map(|w| w.min(PI))
                .collect();
            freq_response(filter, &grid)
                .expect("grid inside [0, pi]")
                .iter()
                .map(|h| (h.norm() - t.gain).abs())
                .fold(0.0, f64::max)
        })
        .collect()
}

fn targets_met(filter: &Fir, targets: &[BandTarget]) -> bool {
    band_deviations(filter, targets)
        .iter()
        .zip(targets)
        .all(|(d, t)| *d <= t.deviation * (1.0 + 1e-9))
}

/// Shortest odd length, searched from `start` in steps of two, whose design
/// satisfies `accept`.
pub(crate) fn shortest_length(
    start: usize,
    opts: &EquirippleOptions,
    design: impl Fn(usize) -> Result<Fir>,
    accept: impl Fn(&Fir) -> bool,
) -> Result<Fir> {
    let attempt = |n: usize| -> Result<Option<Fir>> {
        match design(n) {
            Ok(f) if accept(&f) => Ok(Some(f)),
            Ok(_) => Ok(None),
            Err(Error::NoConvergence(_)) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let mut n = (start | 1).min(opts.max_length | 1).max(1);
    if let Some(mut best) = attempt(n)? {
        while n > 1 {
            match attempt(n - 2)? {
                Some(f) => {
                    best = f;
                    n -= 2;
                }
                None => break,
            }
        }
        return Ok(best);
    }
    loop {
        n += 2;
        if n > opts.max_length {
            return Err(Error::LengthCapExceeded(opts.max_length));
        }
        if let Some(f) = attempt(n)? {
            return Ok(f);
        }
    }
}

/// Shortest equiripple design meeting arbitrary band targets.
pub fn design_bands_min(
    targets: &[BandTarget],
    start: usize,
    opts: &EquirippleOptions,
) -> Result<Fir> {
    shortest_length(
        start,
        opts,
        |n| design_bands(targets, n, opts),
        |f| targets_met(f, targets),
    )
}

/// Equiripple lowpass meeting `spec`.
///
/// With an explicit `length` the minimax design of that length is returned
/// as-is. Otherwise the length starts at the order estimate and moves in steps
/// of two to the shortest length whose measurement passes.
pub fn equiripple_design(spec: &FilterSpec, length: Option<usize>) -> Result<Fir> {
    equiripple_design_with(spec, length, &EquirippleOptions::default())
}

pub fn equiripple_design_with(
    spec: &FilterSpec,
    length: Option<usize>,
    opts: &EquirippleOptions,
) -> Result<Fir> {
    spec.validate()?;
    let targets = spec.bands();
    match length {
        Some(n) => design_bands(&targets, n, opts),
        None => {
            let start = estimate_order(spec)?;
            shortest_length(
                start,
                opts,
                |n| design_bands(&targets, n, opts),
                |f| measure_spec(f, spec).meets(spec),
            )
        }
    }
}

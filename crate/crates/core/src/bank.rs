//! Uniform ModFRM banks by alternate masking, channel-count formulas,
//! non-uniform merging and amplitude distortion.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::firdesign::{freq_response, freq_response_uniform, Fir};
use crate::frmcore::{Case, ModFrmDesign};
use crate::transforms::{cascade, modulate, parallel_sum, scale};

/// `(m + 1) L / 5` for Case I, `(m + 1) L / 3` for Case II.
pub fn channel_count_formula(m: usize, l: usize, case: Case) -> Result<usize> {
    let d = match case {
        Case::I => 5,
        Case::II => 3,
    };
    let n = (m + 1) * l;
    if n % d != 0 {
        return Err(Error::InvalidConfig(format!(
            "(m + 1) L = {n} is not divisible by {d} for Case {case}"
        )));
    }
    Ok(n / d)
}

/// `ceil(1 / f_s)` with `f_s` the stopband edge in units of pi.
pub fn max_channels(f_s: f64) -> Result<usize> {
    if !(f_s > 0.0 && f_s <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "f_s = {f_s} outside (0, 1]"
        )));
    }
    Ok((1.0 / f_s - 1e-9).ceil() as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Masker {
    Ma,
    Mc,
}

/// Which masker a channel applies to each modal branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelMasking {
    pub even_branch: Masker,
    pub odd_branch: Masker,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniformBank {
    pub design: ModFrmDesign,
    pub channel_count: usize,
    pub channels: Vec<Fir>,
    pub parity_map: Vec<ChannelMasking>,
}

/// Channel `k` masks the even modal branch with `Ma` when `k` is even and
/// with `Mc` when it is odd; every masker is modulated to `2 pi k / M`.
pub fn build_uniform_bank(design: &ModFrmDesign) -> Result<UniformBank> {
    let c = &design.config;
    let m = channel_count_formula(c.m, c.l.get(), c.case)?;
    let mut channels = Vec::with_capacity(m);
    let mut parity_map = Vec::with_capacity(m);
    for k in 0..m {
        let w = 2.0 * PI * k as f64 / m as f64;
        let ma = modulate(&design.ma_aligned, w);
        let mc = modulate(&design.mc_aligned, w);
        let (even_mask, odd_mask, map) = if k % 2 == 0 {
            (
                ma,
                mc,
                ChannelMasking {
                    even_branch: Masker::Ma,
                    odd_branch: Masker::Mc,
                },
            )
        } else {
            (
                mc,
                ma,
                ChannelMasking {
                    even_branch: Masker::Mc,
                    odd_branch: Masker::Ma,
                },
            )
        };
        let h = parallel_sum(&[
            cascade(&design.even_branch, &even_mask),
            cascade(&design.odd_branch, &odd_mask),
        ])?;
        channels.push(h);
        parity_map.push(map);
    }
    Ok(UniformBank {
        design: design.clone(),
        channel_count: m,
        channels,
        parity_map,
    })
}

impl UniformBank {
    pub fn center(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.channel_count as f64
    }

    /// True when the bank has more channels than `ceil(1 / f_s)` allows for
    /// the nominal stopband edge `f_s` of the overall filter.
    pub fn exceeds_max_channels(&self) -> bool {
        let (_, stop) = self.design.nominal_edges();
        max_channels((stop / PI).min(1.0))
            .map(|c| self.channel_count > c)
            .unwrap_or(false)
    }

    pub fn max_len(&self) -> usize {
        self.channels.iter().map(Fir::len).max().unwrap_or(1)
    }

    /// `|H_k|` in dB at its upper crossover `2 pi k / M + pi / M`, and at
    /// the same frequency for channel `k + 1`.
    pub fn crossover_levels_db(&self, k: usize) -> Result<(f64, f64)> {
        let m = self.channel_count;
        let w = (self.center(k) + PI / m as f64).rem_euclid(2.0 * PI);
        let a = freq_response(&self.channels[k], &[w])?[0].norm();
        let b = freq_response(&self.channels[(k + 1) % m], &[w])?[0].norm();
        Ok((20.0 * a.log10(), 20.0 * b.log10()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistortionReport {
    pub peak_deviation_db: f64,
    pub grid_size: usize,
}

/// Peak deviation of `10 log10 sum_k |H_k|^2` from its median over a uniform
/// grid on `[0, 2 pi)`.
pub fn amplitude_distortion(bank: &UniformBank, grid_size: usize) -> Result<DistortionReport> {
    distortion_of(&bank.channels, grid_size)
}

pub fn distortion_of(channels: &[Fir], grid_size: usize) -> Result<DistortionReport> {
    let longest = channels.iter().map(Fir::len).max().unwrap_or(1);
    if grid_size < 8 * longest {
        return Err(Error::InvalidGrid(format!(
            "grid of {grid_size} points is below 8 x the longest channel ({longest} taps)"
        )));
    }
    let mut total = vec![0.0; grid_size];
    for h in channels {
        for (t, v) in total.iter_mut().zip(freq_response_uniform(h, grid_size)?) {
            *t += v.norm_sqr();
        }
    }
    let db: Vec<f64> = total.iter().map(|t| 10.0 * t.log10()).collect();
    let mut sorted = db.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    let peak = db.iter().map(|d| (d - median).abs()).fold(0.0, f64::max);
    Ok(DistortionReport {
        peak_deviation_db: peak,
        grid_size,
    })
}

/// Contiguous runs of uniform channels merged into wider ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    pub counts: Vec<usize>,
    /// First uniform channel of each merged channel.
    pub start_channels: Vec<usize>,
    /// Sign applied to each source channel, `+1` or `-1`.
    pub signs: Vec<i8>,
}

impl Allocation {
    /// Validates `counts` against `m` uniform channels; signs start at `+1`.
    pub fn new(counts: &[usize], m: usize) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InvalidAllocation("no channel counts given".into()));
        }
        if counts.contains(&0) {
            return Err(Error::InvalidAllocation(
                "channel counts must be positive".into(),
            ));
        }
        let used: usize = counts.iter().sum();
        if used > m {
            return Err(Error::InvalidAllocation(format!(
                "counts sum to {used}, bank has {m} channels"
            )));
        }
        let mut start_channels = Vec::with_capacity(counts.len());
        let mut next = 0;
        for &a in counts {
            start_channels.push(next);
            next += a;
        }
        Ok(Self {
            counts: counts.to_vec(),
            start_channels,
            signs: vec![1; used],
        })
    }

    /// Source channels of merged channel `i`.
    pub fn members(&self, i: usize) -> std::ops::Range<usize> {
        self.start_channels[i]..self.start_channels[i] + self.counts[i]
    }

    /// Selection matrix with entries `s_k` on the rows of the merged channels.
    pub fn sign_matrix(&self, m: usize) -> Vec<Vec<i8>> {
        (0..self.counts.len())
            .map(|i| {
                let mut row = vec![0; m];
                for k in self.members(i) {
                    row[k] = self.signs[k];
                }
                row
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonUniformBank {
    pub allocation: Allocation,
    pub channels: Vec<Fir>,
}

/// Largest merge group searched exhaustively for signs.
pub const MAX_SIGN_SEARCH: usize = 16;

/// Uniform grid used to score merged responses.
fn scoring_grid(bank: &UniformBank) -> usize {
    (16 * bank.max_len()).next_power_of_two().max(1024)
}

/// Passband half-width of a single channel.
pub(crate) fn channel_passband_halfwidth(bank: &UniformBank) -> f64 {
    bank.design
        .overall_spec()
        .map(|s| s.passband_edge)
        .unwrap_or(0.8 * PI / bank.channel_count as f64)
}

/// Grid indices of `[lo, hi]`, taken modulo `2 pi`.
pub(crate) fn span_indices(lo: f64, hi: f64, points: usize) -> Vec<usize> {
    let step = 2.0 * PI / points as f64;
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last)
        .map(|i| i.rem_euclid(points as i64) as usize)
        .collect()
}

fn ripple_db(values: impl Iterator<Item = f64>) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    20.0 * (hi / lo).log10()
}

/// Sums each run of `counts` adjacent channels, `sum s_k H_k`, choosing the
/// signs per run that minimize the peak-to-peak ripple over the merged
/// passband from the lower passband edge of the first member to the upper
/// passband edge of the last.
pub fn merge_channels(bank: &UniformBank, counts: &[usize]) -> Result<NonUniformBank> {
    let m = bank.channel_count;
    let mut allocation = Allocation::new(counts, m)?;
    if let Some(&big) = counts.iter().find(|&&a| a > MAX_SIGN_SEARCH) {
        return Err(Error::InvalidAllocation(format!(
            "group of {big} channels exceeds the sign search limit of {MAX_SIGN_SEARCH}"
        )));
    }
    let points = scoring_grid(bank);
    let wp = channel_passband_halfwidth(bank);
    let mut responses: Vec<Option<Vec<Complex64>>> = vec![None; m];
    let mut channels = Vec::with_capacity(counts.len());

    for i in 0..counts.len() {
        let members: Vec<usize> = allocation.members(i).collect();
        if members.len() == 1 {
            channels.push(bank.channels[members[0]].clone());
            continue;
        }
        for &k in &members {
            if responses[k].is_none() {
                responses[k] = Some(freq_response_uniform(&bank.channels[k], points)?);
            }
        }
        let lo = bank.center(members[0]) - wp;
        let hi = bank.center(*members.last().expect("non-empty")) + wp;
        let idx = span_indices(lo, hi, points);

        let a = members.len();
        let mut best: Option<(f64, u32)> = None;
        for mask in 0..(1u32 << (a - 1)) {
            let score = ripple_db(idx.iter().map(|&g| {
                members
                    .iter()
                    .enumerate()
                    .map(|(j, &k)| {
                        let v = responses[k].as_ref().expect("computed")[g];
                        if j > 0 && mask & (1 << (j - 1)) != 0 {
                            -v
                        } else {
                            v
                        }
                    })
                    .sum::<Complex64>()
                    .norm()
            }));
            if best.map_or(true, |(s, _)| score < s - 1e-9) {
                best = Some((score, mask));
            }
        }
        let (_, mask) = best.expect("at least one sign pattern");
        let mut terms = Vec::with_capacity(a);
        for (j, &k) in members.iter().enumerate() {
            let negative = j > 0 && mask & (1 << (j - 1)) != 0;
            allocation.signs[k] = if negative { -1 } else { 1 };
            let h = &bank.channels[k];
            terms.push(if negative {
                scale(h, Complex64::new(-1.0, 0.0))
            } else {
                h.clone()
            });
        }
        channels.push(parallel_sum(&terms)?);
    }
    Ok(NonUniformBank {
        allocation,
        channels,
    })
}

/// Passband flatness of one merged channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeRipple {
    /// Over the union of the member channels' own passbands.
    pub union_db: f64,
    /// Over the whole merged span, crossovers included.
    pub span_db: f64,
}

pub fn merged_ripple(bank: &UniformBank, merged: &NonUniformBank, i: usize) -> Result<MergeRipple> {
    let points = scoring_grid(bank);
    let wp = channel_passband_halfwidth(bank);
    let h = freq_response_uniform(&merged.channels[i], points)?;
    let members: Vec<usize> = merged.allocation.members(i).collect();
    let union: Vec<usize> = members
        .iter()
        .flat_map(|&k| span_indices(bank.center(k) - wp, bank.center(k) + wp, points))
        .collect();
    let span = span_indices(
        bank.center(members[0]) - wp,
        bank.center(*members.last().expect("non-empty")) + wp,
        points,
    );
    Ok(MergeRipple {
        union_db: ripple_db(union.iter().map(|&g| h[g].norm())),
        span_db: ripple_db(span.iter().map(|&g| h[g].norm())),
    })
}

/// Passband ripple of one uniform channel over its own passband.
pub fn channel_ripple_db(bank: &UniformBank, k: usize) -> Result<f64> {
    let points = scoring_grid(bank);
    let wp = channel_passband_halfwidth(bank);
    let h = freq_response_uniform(&bank.channels[k], points)?;
    let idx = span_indices(bank.center(k) - wp, bank.center(k) + wp, points);
    Ok(ripple_db(idx.iter().map(|&g| h[g].norm())))
}

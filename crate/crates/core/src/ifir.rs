//! Interpolated FIR realization of masking filters: a prototype stretched by
//! `l` followed by an image suppressor.

use std::f64::consts::PI;

use crate::cost::multiplier_count;
use crate::error::{Error, Result};
use crate::firdesign::{
    design_bands_min, equiripple_design_with, herrmann_length, measure_spec, BandTarget,
    EquirippleOptions, FilterSpec, Fir,
};
use crate::transforms::{cascade, interpolate, InterpolationFactor};

/// Default upper bound of the factor search.
pub const DEFAULT_SEARCH_MAX: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct IfirPair {
    pub prototype: Fir,
    pub image_suppressor: Fir,
    pub l_ifir: InterpolationFactor,
    pub effective: Fir,
}

impl IfirPair {
    pub fn from_parts(prototype: Fir, image_suppressor: Fir, l_ifir: InterpolationFactor) -> Self {
        let effective = cascade(&interpolate(&prototype, l_ifir), &image_suppressor);
        Self {
            prototype,
            image_suppressor,
            l_ifir,
            effective,
        }
    }

    /// Multipliers of prototype plus image suppressor.
    pub fn cost(&self) -> usize {
        multiplier_count(&self.prototype) + multiplier_count(&self.image_suppressor)
    }
}

/// Stopbands of the image suppressor: one around each image of the stretched
/// prototype's passband that falls inside `[0, pi]`.
pub fn image_bands(spec: &FilterSpec, l: usize, deviation: f64) -> Vec<BandTarget> {
    let ws = spec.stopband_edge;
    let mut out = Vec::new();
    for r in 1.. {
        let center = 2.0 * PI * r as f64 / l as f64;
        if center - ws >= PI {
            break;
        }
        out.push(BandTarget::stop(
            center - ws,
            (center + ws).min(PI),
            deviation,
        ));
        if center + ws >= PI {
            break;
        }
    }
    out
}

fn check_factor(spec: &FilterSpec, l: usize) -> Result<()> {
    let lf = l as f64;
    if lf * spec.stopband_edge >= PI {
        return Err(Error::InvalidFactor {
            factor: l,
            reason: "stretched stopband edge passes pi".into(),
        });
    }
    if 2.0 * PI / lf - spec.stopband_edge <= spec.passband_edge {
        return Err(Error::InvalidFactor {
            factor: l,
            reason: "first image overlaps the passband".into(),
        });
    }
    Ok(())
}

/// IFIR design with the passband deviation split evenly between the stages.
pub fn design_ifir(spec: &FilterSpec, l_ifir: InterpolationFactor) -> Result<IfirPair> {
    design_ifir_with(spec, l_ifir, &EquirippleOptions::default())
}

pub fn design_ifir_with(
    spec: &FilterSpec,
    l_ifir: InterpolationFactor,
    opts: &EquirippleOptions,
) -> Result<IfirPair> {
    spec.validate()?;
    let l = l_ifir.get();
    if l == 1 {
        let direct = equiripple_design_with(spec, None, opts)?;
        return Ok(IfirPair::from_parts(direct, Fir::impulse(), l_ifir));
    }
    check_factor(spec, l)?;
    let dp = spec.passband_deviation() / 2.0;
    let ds = spec.stopband_deviation();
    let lf = l as f64;

    let stretched = FilterSpec::new(
        lf * spec.passband_edge,
        lf * spec.stopband_edge,
        spec.passband_ripple_db,
        spec.stopband_atten_db,
    )?
    .with_passband_deviation(dp);
    let prototype = equiripple_design_with(&stretched, None, opts)?;

    let mut targets = vec![BandTarget::pass(0.0, spec.passband_edge, dp)];
    targets.extend(image_bands(spec, l, ds));
    let first_gap = 2.0 * PI / lf - spec.stopband_edge - spec.passband_edge;
    let start = herrmann_length(first_gap, dp, ds);
    let suppressor = design_bands_min(&targets, start, opts)?;

    let pair = IfirPair::from_parts(prototype, suppressor, l_ifir);
    if !measure_spec(&pair.effective, spec).meets(spec) {
        return Err(Error::BudgetFailure { factor: l });
    }
    Ok(pair)
}

/// Cheapest IFIR pair over `l_ifir` in `1..=search_max`; ties go to the
/// smaller factor.
pub fn optimize_lifir(spec: &FilterSpec, search_max: usize) -> Result<IfirPair> {
    optimize_lifir_with(spec, search_max, &EquirippleOptions::default())
}

pub fn optimize_lifir_with(
    spec: &FilterSpec,
    search_max: usize,
    opts: &EquirippleOptions,
) -> Result<IfirPair> {
    if search_max == 0 {
        return Err(Error::InvalidArgument(
            "search_max must be at least 1".into(),
        ));
    }
    let mut best = design_ifir_with(spec, InterpolationFactor::ONE, opts)?;
    let mut best_cost = best.cost();
    for l in 2..=search_max {
        let factor = InterpolationFactor::new(l)?;
        match design_ifir_with(spec, factor, opts) {
            Ok(pair) => {
                let cost = pair.cost();
                if cost < best_cost {
                    best = pair;
                    best_cost = cost;
                }
            }
            Err(
                Error::InvalidFactor { .. }
                | Error::BudgetFailure { .. }
                | Error::LengthCapExceeded(_),
            ) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(best)
}

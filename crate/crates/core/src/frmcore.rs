//! Conventional and modified frequency-response-masking composition.
//!
//! A ModFRM filter replaces the complementary pair of classic FRM with the
//! `m + 1` DFT-modulated copies of a power-complementary modal filter. Copies
//! with even index are interpolated, summed and masked by `Ma`; odd ones by
//! `Mc`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

use crate::bank::channel_count_formula;
use crate::error::{Error, Result};
use crate::firdesign::{
    equiripple_design_with, freq_response, measure_spec, EquirippleOptions, FilterSpec, Fir,
};
use crate::ifir::{optimize_lifir_with, IfirPair, DEFAULT_SEARCH_MAX};
use crate::transforms::{
    cascade, complement, interpolate, modulate, pad_centered, parallel_sum, scale,
    InterpolationFactor,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Case {
    I,
    II,
}

impl std::fmt::Display for Case {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Case::I => "I",
            Case::II => "II",
        })
    }
}

impl std::str::FromStr for Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "i" | "1" | "case1" | "casei" => Ok(Case::I),
            "ii" | "2" | "case2" | "caseii" => Ok(Case::II),
            _ => Err(Error::InvalidConfig(format!("unknown masking case '{s}'"))),
        }
    }
}

/// Modal-filter geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModalConfig {
    pub theta: f64,
    pub phi: f64,
    pub m: usize,
    pub l: InterpolationFactor,
    pub case: Case,
}

impl ModalConfig {
    pub fn new(theta: f64, phi: f64, m: usize, l: InterpolationFactor, case: Case) -> Result<Self> {
        let c = Self {
            theta,
            phi,
            m,
            l,
            case,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m % 2 == 0 {
            return Err(Error::InvalidConfig(format!(
                "m must be odd, got {}",
                self.m
            )));
        }
        if !(self.theta > 0.0 && self.theta < self.phi && self.phi <= PI) {
            return Err(Error::InvalidConfig(format!(
                "need 0 < theta ({}) < phi ({}) <= pi",
                self.theta, self.phi
            )));
        }
        let tiling = (self.m + 1) as f64 * (self.theta + self.phi);
        if (tiling - 2.0 * PI).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "(m + 1)(theta + phi) = {tiling} must equal 2 pi"
            )));
        }
        Ok(())
    }

    /// Centre `q (theta + phi)` of the `q`-th modulated copy, in rad/sample.
    pub fn channel_center(&self, q: usize) -> f64 {
        q as f64 * (self.theta + self.phi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskingEdges {
    pub ma_pass: f64,
    pub ma_stop: f64,
    pub mc_pass: f64,
    pub mc_stop: f64,
}

pub fn masking_edges(config: &ModalConfig) -> MaskingEdges {
    let (t, p, l) = (config.theta, config.phi, config.l.get() as f64);
    match config.case {
        Case::I => MaskingEdges {
            ma_pass: (3.0 * t + 2.0 * p) / l,
            ma_stop: (4.0 * t + 3.0 * p) / l,
            mc_pass: (t + 2.0 * p) / l,
            mc_stop: (2.0 * t + 3.0 * p) / l,
        },
        Case::II => MaskingEdges {
            ma_pass: p / l,
            ma_stop: (t + 2.0 * p) / l,
            mc_pass: (2.0 * t + p) / l,
            mc_stop: (3.0 * t + 2.0 * p) / l,
        },
    }
}

/// Modal filter after the 3-dB adjustment.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalFilter {
    pub fir: Fir,
    /// Common shift applied to both design edges.
    pub edge_offset: f64,
    /// Target before the shift.
    pub spec: FilterSpec,
}

impl ModalFilter {
    pub fn shifted_spec(&self) -> Result<FilterSpec> {
        self.spec.shifted(self.edge_offset)
    }
}

/// Designs the modal filter of `length` taps with both edges moved by the
/// offset that puts `|H|` at `1/sqrt(2)` on `target`. Returns the filter and
/// the offset.
pub fn adjust_3db(
    spec: &FilterSpec,
    length: usize,
    target: f64,
    opts: &EquirippleOptions,
) -> Result<(Fir, f64)> {
    let width = spec.transition_width();
    let low = (-0.49 * width).max(-spec.passband_edge * (1.0 - 1e-9));
    let high = (0.49 * width).min(PI - spec.stopband_edge);
    let design = |offset: f64| -> Result<(Fir, f64)> {
        let f = equiripple_design_with(&spec.shifted(offset)?, Some(length), opts)?;
        let g = freq_response(&f, &[target])?[0].norm() - FRAC_1_SQRT_2;
        Ok((f, g))
    };
    let (mut lo, mut hi) = (low, high);
    let (_, glo) = design(lo)?;
    let (_, ghi) = design(hi)?;
    if glo.signum() == ghi.signum() {
        return Err(Error::ThreeDbBracket { low, high });
    }
    let rising = ghi > glo;
    let mut best = design(0.0)?;
    let mut best_offset = 0.0;
    if best.1 != 0.0 {
        while hi - lo > 1e-13 * PI {
            let mid = 0.5 * (lo + hi);
            let cur = design(mid)?;
            if cur.1.abs() < best.1.abs() {
                best = cur.clone();
                best_offset = mid;
            }
            if cur.1 == 0.0 {
                break;
            }
            if (cur.1 > 0.0) == rising {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    if best.1.abs() > 1e-4 {
        return Err(Error::ThreeDbBracket { low, high });
    }
    Ok((best.0, best_offset))
}

/// Shortest modal filter that meets `spec` at its shifted edges with its
/// half-power point at `(theta + phi) / 2`.
pub fn design_modal(spec: &FilterSpec, config: &ModalConfig) -> Result<ModalFilter> {
    design_modal_with(spec, config, &EquirippleOptions::default())
}

pub fn design_modal_with(
    spec: &FilterSpec,
    config: &ModalConfig,
    opts: &EquirippleOptions,
) -> Result<ModalFilter> {
    config.validate()?;
    spec.validate()?;
    if (spec.passband_edge - config.theta).abs() > 1e-12
        || (spec.stopband_edge - config.phi).abs() > 1e-12
    {
        return Err(Error::InvalidConfig(
            "modal spec edges must equal (theta, phi)".into(),
        ));
    }
    let target = 0.5 * (config.theta + config.phi);
    let mut length = equiripple_design_with(spec, None, opts)?.len();
    loop {
        let (fir, edge_offset) = adjust_3db(spec, length, target, opts)?;
        let shifted = spec.shifted(edge_offset)?;
        if measure_spec(&fir, &shifted).meets(&shifted) {
            return Ok(ModalFilter {
                fir,
                edge_offset,
                spec: *spec,
            });
        }
        length += 2;
        if length > opts.max_length {
            return Err(Error::LengthCapExceeded(opts.max_length));
        }
    }
}

/// `max_w | sum_q |H_{a,q}(e^{jw})|^2 - 1 |` over a uniform grid, with the
/// copies modulated to `2 pi q / (m + 1)`.
pub fn check_power_complementarity(modal: &Fir, m: usize, grid_size: usize) -> f64 {
    let grid: Vec<f64> = (0..grid_size)
        .map(|k| 2.0 * PI * k as f64 / grid_size as f64)
        .collect();
    let mut total = vec![0.0; grid_size];
    for q in 0..=m {
        let copy = modulate(modal, 2.0 * PI * q as f64 / (m + 1) as f64);
        let h = freq_response(&copy, &grid).expect("uniform grid inside [0, 2 pi)");
        for (t, v) in total.iter_mut().zip(&h) {
            *t += v.norm_sqr();
        }
    }
    total.iter().map(|t| (t - 1.0).abs()).fold(0.0, f64::max)
}

/// The `q`-th modulated copy, phased so that neighbouring copies are in
/// quadrature: `h[n] e^{j w_q (n - D)} j^q` with `D` the modal delay.
///
/// The extra factor has unit modulus, so every copy keeps the magnitude
/// response of the plain modulation, while overlapping neighbours add in
/// power rather than in amplitude.
pub fn modal_channel(modal: &Fir, config: &ModalConfig, q: usize) -> Result<Fir> {
    let delay = modal.center().ok_or_else(|| {
        Error::UnsupportedFilter("modal filter must be odd-length symmetric".into())
    })?;
    let w = config.channel_center(q);
    let phase = Complex64::from_polar(1.0, -w * delay as f64 + 0.5 * PI * (q % 4) as f64);
    Ok(scale(&modulate(modal, w), phase))
}

/// A masking filter, realized directly or as an IFIR cascade.
#[derive(Debug, Clone, PartialEq)]
pub enum MaskingFilter {
    Direct(Fir),
    Ifir(IfirPair),
}

impl MaskingFilter {
    pub fn effective(&self) -> &Fir {
        match self {
            MaskingFilter::Direct(f) => f,
            MaskingFilter::Ifir(p) => &p.effective,
        }
    }

    /// Prototype and image suppressor; a direct filter has the unit impulse as
    /// its suppressor.
    pub fn parts(&self) -> (&Fir, &Fir) {
        static IMPULSE: std::sync::OnceLock<Fir> = std::sync::OnceLock::new();
        match self {
            MaskingFilter::Direct(f) => (f, IMPULSE.get_or_init(Fir::impulse)),
            MaskingFilter::Ifir(p) => (&p.prototype, &p.image_suppressor),
        }
    }

    pub fn l_ifir(&self) -> usize {
        match self {
            MaskingFilter::Direct(_) => 1,
            MaskingFilter::Ifir(p) => p.l_ifir.get(),
        }
    }
}

/// Pads both maskers, centred, to a common length. With `quantum` the common
/// delay is also rounded up to a multiple of it.
pub fn align_maskers(hma: &Fir, hmc: &Fir, quantum: Option<usize>) -> Result<(Fir, Fir)> {
    if hma.len() % 2 != hmc.len() % 2 {
        return Err(Error::Alignment(format!(
            "masking filter lengths {} and {} differ in parity",
            hma.len(),
            hmc.len()
        )));
    }
    let mut len = hma.len().max(hmc.len());
    if let (Some(q), 1) = (quantum, len % 2) {
        let delay = (len - 1) / 2;
        len = 2 * delay.div_ceil(q.max(1)) * q.max(1) + 1;
    }
    Ok((pad_centered(hma, len)?, pad_centered(hmc, len)?))
}

fn sum_branches(a: Fir, b: Fir) -> Result<Fir> {
    if a.len() != b.len() {
        return Err(Error::Alignment(format!(
            "branch lengths {} and {} differ",
            a.len(),
            b.len()
        )));
    }
    parallel_sum(&[a, b])
}

/// Classic FRM: `Ha(z^L) Hma(z) + Hc(z^L) Hmc(z)`.
pub fn compose_frm(ha: &Fir, hma: &Fir, hmc: &Fir, l: InterpolationFactor) -> Result<Fir> {
    let hc = complement(ha)?;
    let (ma, mc) = align_maskers(hma, hmc, None)?;
    sum_branches(
        cascade(&interpolate(ha, l), &ma),
        cascade(&interpolate(&hc, l), &mc),
    )
}

/// A ModFRM filter with everything needed to build its bank.
#[derive(Debug, Clone, PartialEq)]
pub struct ModFrmDesign {
    pub config: ModalConfig,
    pub modal: Fir,
    pub modal_spec: FilterSpec,
    pub edge_offset: f64,
    pub hma: MaskingFilter,
    pub hmc: MaskingFilter,
    /// Interpolated sum of the even-indexed modal copies.
    pub even_branch: Fir,
    /// Interpolated sum of the odd-indexed modal copies.
    pub odd_branch: Fir,
    /// Effective maskers padded to a common length and delay.
    pub ma_aligned: Fir,
    pub mc_aligned: Fir,
    pub overall: Fir,
}

/// Group delay shared by both branches of the overall filter.
fn branch_delay(branch: &Fir, masker: &Fir, modal_delay: usize, l: usize) -> usize {
    debug_assert_eq!(branch.len(), l * 2 * modal_delay + 1);
    l * modal_delay + (masker.len() - 1) / 2
}

pub fn compose_modfrm(
    config: &ModalConfig,
    modal: &ModalFilter,
    hma: MaskingFilter,
    hmc: MaskingFilter,
) -> Result<ModFrmDesign> {
    config.validate()?;
    let l = config.l;
    let delay = modal.fir.center().ok_or_else(|| {
        Error::UnsupportedFilter("modal filter must be odd-length symmetric".into())
    })?;
    let mut even = Vec::new();
    let mut odd = Vec::new();
    for q in 0..=config.m {
        let copy = interpolate(&modal_channel(&modal.fir, config, q)?, l);
        if q % 2 == 0 {
            even.push(copy);
        } else {
            odd.push(copy);
        }
    }
    let even_branch = parallel_sum(&even)?;
    let odd_branch = parallel_sum(&odd)?;

    // A common masker delay divisible by M/2 makes the per-channel masker
    // modulation phases real, which keeps neighbouring channels in quadrature.
    let quantum = channel_count_formula(config.m, l.get(), config.case)
        .ok()
        .map(|c| (c / 2).max(1));
    let (ma_aligned, mc_aligned) = align_maskers(hma.effective(), hmc.effective(), quantum)?;
    let da = branch_delay(&even_branch, &ma_aligned, delay, l.get());
    let dc = branch_delay(&odd_branch, &mc_aligned, delay, l.get());
    assert_eq!(da, dc, "branch delays must agree");

    let overall = sum_branches(
        cascade(&even_branch, &ma_aligned),
        cascade(&odd_branch, &mc_aligned),
    )?;
    Ok(ModFrmDesign {
        config: *config,
        modal: modal.fir.clone(),
        modal_spec: modal.spec,
        edge_offset: modal.edge_offset,
        hma,
        hmc,
        even_branch,
        odd_branch,
        ma_aligned,
        mc_aligned,
        overall,
    })
}

impl ModFrmDesign {
    /// Group delay of the overall filter and of every bank channel.
    pub fn delay(&self) -> usize {
        (self.overall.len() - 1) / 2
    }

    /// Nominal lowpass edges of the overall filter.
    pub fn nominal_edges(&self) -> (f64, f64) {
        let e = masking_edges(&self.config);
        match self.config.case {
            Case::I => (e.ma_pass, e.mc_stop),
            Case::II => (e.mc_pass, e.ma_stop),
        }
    }

    /// Overall lowpass target at the nominal edges.
    pub fn nominal_spec(&self) -> Result<FilterSpec> {
        let (p, s) = self.nominal_edges();
        FilterSpec::new(
            p,
            s,
            self.modal_spec.passband_ripple_db,
            self.modal_spec.stopband_atten_db,
        )
    }

    /// Overall lowpass target at the edges the design actually has: the
    /// nominal ones moved by the modal edge offset divided by `L`.
    pub fn overall_spec(&self) -> Result<FilterSpec> {
        self.nominal_spec()?
            .shifted(self.edge_offset / self.config.l.get() as f64)
    }

    /// Recomputes the overall filter from the stored parts.
    pub fn recompose(&self) -> Result<ModFrmDesign> {
        let modal = ModalFilter {
            fir: self.modal.clone(),
            edge_offset: self.edge_offset,
            spec: self.modal_spec,
        };
        compose_modfrm(&self.config, &modal, self.hma.clone(), self.hmc.clone())
    }
}

/// Knobs of the end-to-end pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisOptions {
    /// Extra stopband attenuation of the modal filter over the target, in dB.
    ///
    /// The modal and masker stopband ripples add in the overall filter, so
    /// the modal filter gets a margin to keep the sum at the target.
    pub modal_stopband_margin_db: f64,
    pub lifir_search_max: usize,
    pub equiripple: EquirippleOptions,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self {
            modal_stopband_margin_db: 20.0 * 2f64.log10(),
            lifir_search_max: DEFAULT_SEARCH_MAX,
            equiripple: EquirippleOptions::default(),
        }
    }
}

/// Target of the masking filters.
pub fn masking_specs(edges: &MaskingEdges, spec: &FilterSpec) -> Result<(FilterSpec, FilterSpec)> {
    let (r, a) = (spec.passband_ripple_db, spec.stopband_atten_db);
    Ok((
        FilterSpec::new(edges.ma_pass, edges.ma_stop, r, a)?,
        FilterSpec::new(edges.mc_pass, edges.mc_stop, r, a)?,
    ))
}

/// Modal design, masker IFIR optimization and composition in one call. The
/// ripple and attenuation of `spec` apply to every subfilter; its edges must
/// be `(theta, phi)`.
pub fn synthesize(
    spec: &FilterSpec,
    config: &ModalConfig,
    opts: &SynthesisOptions,
) -> Result<ModFrmDesign> {
    let modal = design_modal_for(spec, config, opts)?;
    synthesize_with_modal(spec, config, &modal, opts)
}

/// Modal filter as designed by [`synthesize`], with the stopband margin.
pub fn design_modal_for(
    spec: &FilterSpec,
    config: &ModalConfig,
    opts: &SynthesisOptions,
) -> Result<ModalFilter> {
    let strict = FilterSpec::new(
        spec.passband_edge,
        spec.stopband_edge,
        spec.passband_ripple_db,
        spec.stopband_atten_db + opts.modal_stopband_margin_db,
    )?;
    let mut modal = design_modal_with(&strict, config, &opts.equiripple)?;
    modal.spec = *spec;
    Ok(modal)
}

/// The masker half of [`synthesize`] around an existing modal filter, so that
/// an `L` sweep can share one modal design.
pub fn synthesize_with_modal(
    spec: &FilterSpec,
    config: &ModalConfig,
    modal: &ModalFilter,
    opts: &SynthesisOptions,
) -> Result<ModFrmDesign> {
    config.validate()?;
    let (ma_spec, mc_spec) = masking_specs(&masking_edges(config), spec)?;
    let ma = optimize_lifir_with(&ma_spec, opts.lifir_search_max, &opts.equiripple)?;
    let mc = optimize_lifir_with(&mc_spec, opts.lifir_search_max, &opts.equiripple)?;
    compose_modfrm(
        config,
        modal,
        MaskingFilter::Ifir(ma),
        MaskingFilter::Ifir(mc),
    )
}

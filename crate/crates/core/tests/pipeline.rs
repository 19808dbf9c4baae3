//! End-to-end synthesis, bank and merging properties.

use std::f64::consts::PI;
use std::sync::OnceLock;

use modfrm::bank::{amplitude_distortion, channel_count_formula};
use modfrm::firdesign::freq_response;
use modfrm::frmcore::check_power_complementarity;
use modfrm::ifir::optimize_lifir;
use modfrm::{
    build_uniform_bank, merge_channels, multiplier_count, synthesize, total_cost, Case, CostReport,
    FilterSpec, Fir, InterpolationFactor, ModFrmDesign, ModalConfig, SynthesisOptions, UniformBank,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};

fn design_l10() -> &'static ModFrmDesign {
    static D: OnceLock<ModFrmDesign> = OnceLock::new();
    D.get_or_init(|| {
        let spec = FilterSpec::new(0.2 * PI, 0.3 * PI, 0.0065, 60.0).unwrap();
        let cfg = ModalConfig::new(
            0.2 * PI,
            0.3 * PI,
            3,
            InterpolationFactor::new(10).unwrap(),
            Case::I,
        )
        .unwrap();
        synthesize(&spec, &cfg, &SynthesisOptions::default()).unwrap()
    })
}

fn bank() -> UniformBank {
    build_uniform_bank(design_l10()).unwrap()
}

#[test]
fn overall_filter_is_real_and_meets_attenuation() {
    let d = design_l10();
    assert_eq!(d.overall.len() % 2, 1);
    // The odd branch is antisymmetric, so the sum is real but not symmetric.
    assert!(d.overall.coeffs().iter().all(|c| c.im.abs() < 1e-12));
    let m = modfrm::measure_spec(&d.overall, &d.overall_spec().unwrap());
    assert!(m.achieved_stopband_atten_db >= 59.0, "{m:?}");
    assert!(m.achieved_passband_ripple_db < 0.1, "{m:?}");
}

#[test]
fn recomposition_is_identical() {
    let d = design_l10();
    assert_eq!(d.recompose().unwrap().overall, d.overall);
}

#[test]
fn cost_parts_add_up() {
    let d = design_l10();
    let c = total_cost(d);
    assert_eq!(
        c.total,
        c.m_modal + c.m_ma_pr + c.m_ma_is + c.m_mc_pr + c.m_mc_is
    );
    assert_eq!(c.m_modal, multiplier_count(&d.modal));
    assert_eq!(
        c,
        CostReport::new(c.m_modal, c.m_ma_pr, c.m_ma_is, c.m_mc_pr, c.m_mc_is)
    );
}

#[test]
fn cost_examples() {
    let f = |v: &[f64]| Fir::from_real(v).unwrap();
    assert_eq!(multiplier_count(&f(&[1.0, 2.0, 3.0, 2.0, 1.0])), 3);
    assert_eq!(multiplier_count(&f(&[0.5, 0.0, 0.5])), 1);
    assert_eq!(multiplier_count(&f(&[1.0, 2.0, 3.0])), 3);
    assert_eq!(multiplier_count(&Fir::delay(4, 9)), 0);
    assert_eq!(multiplier_count(&f(&[0.0, 0.7, 0.0])), 1);
}

#[test]
fn bank_channels_are_translates() {
    let b = bank();
    let m = b.channel_count;
    assert_eq!(m, channel_count_formula(3, 10, Case::I).unwrap());
    let mut rng = rand::rngs::StdRng::seed_from_u64(3);
    let w: Vec<f64> = (0..200).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
    let h0 = freq_response(&b.channels[0], &w).unwrap();
    for k in 1..m {
        let shifted: Vec<f64> = w
            .iter()
            .map(|x| (x + b.center(k)).rem_euclid(2.0 * PI))
            .collect();
        let hk = freq_response(&b.channels[k], &shifted).unwrap();
        for (a, c) in h0.iter().zip(&hk) {
            assert!((a.norm() - c.norm()).abs() < 1e-9, "channel {k}");
        }
    }
    for h in &b.channels {
        assert_eq!(h.len(), b.channels[0].len());
    }
}

#[test]
fn bank_is_nearly_power_complementary() {
    let b = bank();
    let grid = (16 * b.max_len()).next_power_of_two();
    assert!(amplitude_distortion(&b, grid).unwrap().peak_deviation_db < 0.5);
    assert!(amplitude_distortion(&b, 8).is_err());
    assert!(check_power_complementarity(&design_l10().modal, 3, 4096) < 0.05);
}

#[test]
fn trivial_allocation_is_the_uniform_bank() {
    let b = bank();
    let merged = merge_channels(&b, &vec![1; b.channel_count]).unwrap();
    assert_eq!(merged.channels, b.channels);
    assert!(merged.allocation.signs.iter().all(|&s| s == 1));
}

#[test]
fn merged_channel_is_signed_sum() {
    let b = bank();
    let merged = merge_channels(&b, &[2, 1, 3, 2]).unwrap();
    assert_eq!(merged.channels.len(), 4);
    for i in 0..4 {
        let members: Vec<usize> = merged.allocation.members(i).collect();
        assert_eq!(merged.allocation.signs[members[0]], 1);
        let n = merged.channels[i].len();
        for t in 0..n {
            let s: Complex64 = members
                .iter()
                .map(|&k| b.channels[k].coeffs()[t] * merged.allocation.signs[k] as f64)
                .sum();
            assert!((s - merged.channels[i].coeffs()[t]).norm() < 1e-15);
        }
    }
    assert!(merge_channels(&b, &[4, 5]).is_err());
    assert!(merge_channels(&b, &[0, 8]).is_err());
}

#[test]
fn lifir_search_is_deterministic() {
    let spec = FilterSpec::new(0.12 * PI, 0.17 * PI, 0.0065, 60.0).unwrap();
    let a = optimize_lifir(&spec, 16).unwrap();
    let b = optimize_lifir(&spec, 16).unwrap();
    assert_eq!(a, b);
    for l in 1..=4 {
        if let Ok(p) = modfrm::ifir::design_ifir(&spec, InterpolationFactor::new(l).unwrap()) {
            assert!(a.cost() <= p.cost());
        }
    }
}

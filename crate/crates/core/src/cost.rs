//! Multiplier-count cost model.

use num_complex::Complex64;

use crate::firdesign::{Fir, Symmetry};
use crate::frmcore::ModFrmDesign;

/// Distinct coefficient multipliers of a direct-form realization.
///
/// Exact zeros are free, symmetric pairs share one multiplier, and a filter
/// whose only nonzero tap is exactly one is a bare delay line and costs
/// nothing.
pub fn multiplier_count(filter: &Fir) -> usize {
    let c = filter.coeffs();
    let zero = Complex64::new(0.0, 0.0);
    let nonzero: Vec<&Complex64> = c.iter().filter(|v| **v != zero).collect();
    if nonzero.len() == 1 && *nonzero[0] == Complex64::new(1.0, 0.0) {
        return 0;
    }
    match filter.symmetry() {
        Symmetry::Even => c[..(c.len() + 1) / 2]
            .iter()
            .filter(|v| **v != zero)
            .count(),
        Symmetry::None => nonzero.len(),
    }
}

/// Per-part multiplier counts and their sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostReport {
    pub m_modal: usize,
    pub m_ma_pr: usize,
    pub m_ma_is: usize,
    pub m_mc_pr: usize,
    pub m_mc_is: usize,
    pub total: usize,
}

impl CostReport {
    pub fn new(
        m_modal: usize,
        m_ma_pr: usize,
        m_ma_is: usize,
        m_mc_pr: usize,
        m_mc_is: usize,
    ) -> Self {
        let total = m_modal + m_ma_pr + m_ma_is + m_mc_pr + m_mc_is;
        Self {
            m_modal,
            m_ma_pr,
            m_ma_is,
            m_mc_pr,
            m_mc_is,
            total,
        }
    }
}

impl std::fmt::Display for CostReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "({}+{}+{}+{}+{})={}",
            self.m_modal, self.m_ma_pr, self.m_ma_is, self.m_mc_pr, self.m_mc_is, self.total
        )
    }
}

/// Counts the real prototype parts once. Interpolated and modulated copies
/// share those multipliers.
pub fn total_cost(design: &ModFrmDesign) -> CostReport {
    let (ma_pr, ma_is) = design.hma.parts();
    let (mc_pr, mc_is) = design.hmc.parts();
    CostReport::new(
        multiplier_count(&design.modal),
        multiplier_count(ma_pr),
        multiplier_count(ma_is),
        multiplier_count(mc_pr),
        multiplier_count(mc_is),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::{interpolate, InterpolationFactor};
    use proptest::prelude::*;

    fn real(v: &[f64]) -> Fir {
        Fir::from_real(v).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(multiplier_count(&real(&[1.0, 2.0, 1.0])), 2);
        assert_eq!(multiplier_count(&real(&[1.0, 0.0, 0.0, 1.0])), 1);
        assert_eq!(multiplier_count(&real(&[0.3, 0.5, 0.7])), 3);
        assert_eq!(multiplier_count(&real(&[0.0, 1.0, 0.0])), 0);
        assert_eq!(multiplier_count(&real(&[0.0, 0.0])), 0);
    }

    #[test]
    fn odd_symmetric_without_zeros() {
        for n in (1..40).step_by(2) {
            let half: Vec<f64> = (0..(n + 1) / 2).map(|i| 0.1 + i as f64).collect();
            let mut v = half.clone();
            v.extend(half.iter().rev().skip(1));
            assert_eq!(multiplier_count(&real(&v)), (n + 1) / 2);
        }
    }

    #[test]
    fn report_total_is_sum() {
        let r = CostReport::new(32, 25, 9, 24, 8);
        assert_eq!(r.total, 98);
        assert_eq!(r.to_string(), "(32+25+9+24+8)=98");
    }

    proptest! {
        #[test]
        fn interpolation_is_free(v in prop::collection::vec(-2.0f64..2.0, 1..30), l in 1usize..10) {
            let f = real(&v);
            prop_assert_eq!(
                multiplier_count(&interpolate(&f, InterpolationFactor::new(l).unwrap())),
                multiplier_count(&f)
            );
        }

    }
}

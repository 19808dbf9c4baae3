//! Synthesis of reconfigurable narrow-transition-band FIR filter banks.
//!
//! A power-complementary modal filter is DFT-modulated into `m + 1` copies,
//! interpolated by `L`, and masked by two masking filters (each realized as
//! an IFIR cascade). Modulating the maskers to every multiple of `2 pi / M`
//! with alternating assignment yields an `M`-channel uniform bank; adjacent
//! channels can then be merged into a non-uniform bank.

pub mod bank;
pub mod cost;
mod error;
pub mod firdesign;
pub mod frmcore;
pub mod ifir;
pub mod transforms;

pub use bank::{build_uniform_bank, merge_channels, Allocation, NonUniformBank, UniformBank};
pub use cost::{multiplier_count, total_cost, CostReport};
pub use error::{Error, Result};
pub use firdesign::{equiripple_design, measure_spec, BandMeasurement, FilterSpec, Fir, Symmetry};
pub use frmcore::{synthesize, Case, ModFrmDesign, ModalConfig, ModalFilter, SynthesisOptions};
pub use ifir::IfirPair;
pub use transforms::InterpolationFactor;

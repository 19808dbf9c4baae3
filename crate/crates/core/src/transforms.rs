//! Coefficient-domain operators: interpolation, modulation, delay complement,
//! cascade and parallel sum.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::firdesign::Fir;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Interpolation factor `L >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InterpolationFactor(usize);

impl InterpolationFactor {
    pub fn new(value: usize) -> Result<Self> {
        if value == 0 {
            return Err(Error::InvalidFactor {
                factor: 0,
                reason: "must be at least 1".into(),
            });
        }
        Ok(Self(value))
    }

    pub const ONE: Self = Self(1);

    pub fn get(self) -> usize {
        self.0
    }
}

/// Replaces every unit delay by `L` delays: `H(z) -> H(z^L)`.
pub fn interpolate(filter: &Fir, l: InterpolationFactor) -> Fir {
    let l = l.get();
    let n = filter.len();
    let mut out = vec![ZERO; l * (n - 1) + 1];
    for (k, c) in filter.coeffs().iter().enumerate() {
        out[k * l] = *c;
    }
    Fir::new(out).expect("coefficients copied from a valid filter")
}

/// Shifts the response up by `center`: `h[n] e^{j center n}`.
pub fn modulate(filter: &Fir, center: f64) -> Fir {
    if center == 0.0 {
        return filter.clone();
    }
    let out = filter
        .coeffs()
        .iter()
        .enumerate()
        .map(|(n, c)| c * Complex64::from_polar(1.0, center * n as f64))
        .collect();
    Fir::new(out).expect("unit-modulus scaling keeps coefficients finite")
}

/// Delay complement `z^{-(N-1)/2} - H(z)` of an odd-length symmetric real filter.
pub fn complement(filter: &Fir) -> Result<Fir> {
    let center = match (filter.center(), filter.is_real()) {
        (Some(c), true) => c,
        _ => {
            return Err(Error::UnsupportedFilter(
                "complement needs a real, even-symmetric, odd-length filter".into(),
            ))
        }
    };
    let mut out: Vec<Complex64> = filter.coeffs().iter().map(|c| -c).collect();
    out[center] += 1.0;
    Fir::new(out)
}

/// Linear convolution. Exact zeros are skipped, so sparse interpolated
/// filters convolve in time proportional to their nonzero taps.
pub fn cascade(a: &Fir, b: &Fir) -> Fir {
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    let bz: Vec<(usize, Complex64)> = b
        .coeffs()
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, c)| *c != ZERO)
        .collect();
    for (i, x) in a.coeffs().iter().enumerate() {
        if *x == ZERO {
            continue;
        }
        for &(j, y) in &bz {
            out[i + j] += x * y;
        }
    }
    Fir::new(out).expect("products of finite coefficients")
}

/// Coefficient-wise sum after right-padding to the longest input.
pub fn parallel_sum(filters: &[Fir]) -> Result<Fir> {
    let len = filters
        .iter()
        .map(Fir::len)
        .max()
        .ok_or_else(|| Error::InvalidArgument("parallel sum of no filters".into()))?;
    let mut out = vec![ZERO; len];
    for f in filters {
        for (o, c) in out.iter_mut().zip(f.coeffs()) {
            *o += c;
        }
    }
    Fir::new(out)
}

/// Adds `before` leading and `after` trailing zeros.
pub fn pad(filter: &Fir, before: usize, after: usize) -> Fir {
    let mut out = vec![ZERO; before];
    out.extend_from_slice(filter.coeffs());
    out.extend(std::iter::repeat(ZERO).take(after));
    Fir::new(out).expect("padding a valid filter")
}

/// Pads an odd-length filter symmetrically to `len`, keeping it centred.
pub fn pad_centered(filter: &Fir, len: usize) -> Result<Fir> {
    let n = filter.len();
    if len < n || (len - n) % 2 != 0 {
        return Err(Error::Alignment(format!(
            "cannot centre a {n}-tap filter in {len} taps"
        )));
    }
    let side = (len - n) / 2;
    Ok(pad(filter, side, side))
}

/// Scales every coefficient.
pub fn scale(filter: &Fir, factor: Complex64) -> Fir {
    Fir::new(filter.coeffs().iter().map(|c| c * factor).collect()).expect("finite scaling")
}

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Scaling convention of a forward transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// `F(k) = sum_t f(t) exp(-i 2 pi k t / N)` with no `1/N` factor.
    UnnormalizedForward,
}

/// Fourier coefficients `F(0..N)` of a length-`N` signal.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    coeffs: Vec<Complex64>,
    convention: Normalization,
}

impl ComplexSpectrum {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self {
            coeffs,
            convention: Normalization::UnnormalizedForward,
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn convention(&self) -> Normalization {
        self.convention
    }

    /// Length `N` of the transformed signal.
    pub fn source_length(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient at bin `k`, with `k` taken modulo `N`.
    pub fn at(&self, k: usize) -> Complex64 {
        self.coeffs[k % self.coeffs.len()]
    }
}

/// Forward DFT of `series` (unnormalized, `exp(-i 2 pi k t / N)` kernel).
pub fn dft_forward(series: &TimeSeries) -> Result<ComplexSpectrum> {
    dft_values(series.values())
}

/// Forward DFT of a raw slice. Checks the same preconditions as
/// [`TimeSeries::new`].
pub fn dft_values(values: &[f64]) -> Result<ComplexSpectrum> {
    if values.len() < 2 {
        return Err(Error::LengthTooShort {
            len: values.len(),
            min: 2,
        });
    }
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput { index });
    }
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new()
        .plan_fft_forward(buf.len())
        .process(&mut buf);
    Ok(ComplexSpectrum::new(buf))
}

/// One-sided power `|F(k)|^2` for `k = 0..=N/2`.
pub fn power_spectrum(spectrum: &ComplexSpectrum) -> Vec<f64> {
    let n = spectrum.source_length();
    spectrum.coeffs()[..=n / 2]
        .iter()
        .map(|c| c.norm_sqr())
        .collect()
}

/// Angular frequency (radians per sample) of bin `k` for a length-`n` transform.
pub fn bin_to_omega(k: usize, n: usize) -> f64 {
    2.0 * PI * k as f64 / n as f64
}

/// Nearest bin to angular frequency `omega` (radians per sample): `round(omega N / 2 pi)`.
pub fn omega_to_bin(omega: f64, n: usize) -> usize {
    (omega * n as f64 / (2.0 * PI)).round() as usize
}

/// Least-squares slope of `ln(power)` against `ln(k)` over bins `lo..=hi`.
/// Bins with zero power are skipped.
pub fn loglog_slope(power: &[f64], lo: usize, hi: usize) -> Option<f64> {
    let hi = hi.min(power.len().checked_sub(1)?);
    let pts: Vec<(f64, f64)> = (lo.max(1)..=hi)
        .filter(|&k| power[k] > 0.0)
        .map(|k| ((k as f64).ln(), power[k].ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_signal_has_only_dc() {
        let s = TimeSeries::from_values(vec![1.0; 4], "c").unwrap();
        let f = dft_forward(&s).unwrap();
        assert!((f.at(0) - Complex64::new(4.0, 0.0)).norm() < 1e-15);
        for k in 1..4 {
            assert!(f.at(k).norm() < 1e-15);
        }
    }

    #[test]
    fn single_bin_cosine() {
        let n = 16;
        let v: Vec<f64> = (0..n)
            .map(|t| (2.0 * PI * 3.0 * t as f64 / n as f64).cos())
            .collect();
        let f = dft_values(&v).unwrap();
        for k in 0..n {
            let mag = f.at(k).norm();
            if k == 3 || k == 13 {
                assert!((mag - 8.0).abs() < 1e-12);
            } else {
                assert!(mag < 1e-9, "bin {k}: {mag}");
            }
        }
        let p = power_spectrum(&f);
        assert_eq!(p.len(), 9);
        assert!((p[3] - 64.0).abs() < 1e-10);
        for (k, &pk) in p.iter().enumerate() {
            if k != 3 {
                assert!(pk < 1e-18, "bin {k}: {pk}");
            }
        }
    }

    #[test]
    fn zero_spectrum_has_zero_power() {
        let f = ComplexSpectrum::new(vec![Complex64::new(0.0, 0.0); 8]);
        assert!(power_spectrum(&f).iter().all(|&p| p == 0.0));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            dft_values(&[1.0]),
            Err(Error::LengthTooShort { .. })
        ));
        assert!(matches!(
            dft_values(&[1.0, f64::NAN]),
            Err(Error::NonFiniteInput { index: 1 })
        ));
    }

    #[test]
    fn bin_mapping_round_trips() {
        assert_eq!(omega_to_bin(0.22, 4096), 143);
        assert_eq!(omega_to_bin(0.375, 4096), 244);
        assert_eq!(omega_to_bin(bin_to_omega(37, 512), 512), 37);
    }

    #[test]
    fn slope_of_power_law() {
        let p: Vec<f64> = (0..200).map(|k| (k.max(1) as f64).powf(-2.0)).collect();
        assert!((loglog_slope(&p, 2, 199).unwrap() + 2.0).abs() < 1e-12);
    }
}

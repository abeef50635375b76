//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `F(k) = sum_t x_t exp(-2 pi i k t / N)` by direct summation; the phase
/// index is reduced mod N before scaling to keep the angle exact.
pub fn direct_dft(x: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(t, &v)| {
                    let angle = -2.0 * PI * ((k * t) % n) as f64 / n as f64;
                    Complex64::from_polar(v, angle)
                })
                .sum()
        })
        .collect()
}

/// Principal-domain triples `0 <= k2 <= k1`, `k1 + k2 <= N/2`, row-major.
pub fn principal_cells(n: usize) -> Vec<(usize, usize)> {
    let mut cells = Vec::new();
    for k1 in 0..=n / 2 {
        for k2 in 0..=k1.min(n / 2 - k1) {
            cells.push((k1, k2));
        }
    }
    cells
}

/// `B(k1,k2) = F(k1) F(k2) conj(F(k1+k2))` over the principal domain, by a
/// plain loop over the direct DFT.
pub fn direct_bispectrum(x: &[f64]) -> Vec<((usize, usize), Complex64)> {
    let f = direct_dft(x);
    let n = x.len();
    principal_cells(n)
        .into_iter()
        .map(|(k1, k2)| ((k1, k2), f[k1] * f[k2] * f[(k1 + k2) % n].conj()))
        .collect()
}

/// Segment-averaged bicoherence with rectangular window and no detrending:
/// `|<B>|² / (<|F1 F2|²> <|F3|²>)`, zero where the denominator is zero.
pub fn direct_bicoherence(x: &[f64], segment_length: usize) -> Vec<((usize, usize), f64)> {
    let spectra: Vec<Vec<Complex64>> = x.chunks_exact(segment_length).map(direct_dft).collect();
    let m = spectra.len() as f64;
    principal_cells(segment_length)
        .into_iter()
        .map(|(k1, k2)| {
            let k3 = k1 + k2;
            let mut b = Complex64::new(0.0, 0.0);
            let mut a = 0.0;
            let mut c = 0.0;
            for f in &spectra {
                b += f[k1] * f[k2] * f[k3].conj();
                a += (f[k1] * f[k2]).norm_sqr();
                c += f[k3].norm_sqr();
            }
            let (b, a, c) = (b / m, a / m, c / m);
            let den = a * c;
            ((k1, k2), if den > 0.0 { b.norm_sqr() / den } else { 0.0 })
        })
        .collect()
}

pub fn uniform_series(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect()
}

pub fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Mean of `e[lo..=hi]`.
pub fn band_mean(e: &[f64], lo: usize, hi: usize) -> f64 {
    e[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
}

/// Ratio of mean energy over the decade below the top resolved decade to the
/// mean over the top decade, with `k_max = N/3` the largest dealiased mode.
pub fn decade_ratio(spectrum: &[f64], n_grid: usize) -> f64 {
    let k_max = n_grid / 3;
    let top = band_mean(spectrum, k_max / 10 + 1, k_max);
    let prev = band_mean(spectrum, k_max / 100 + 1, k_max / 10);
    prev / top
}

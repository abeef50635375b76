//! Bispectrum `B(k1, k2) = F(k1) F(k2) F*(k1 + k2)` over the principal
//! domain `0 <= k2 <= k1, k1 + k2 <= N/2`, and its segment-averaged
//! estimator with bicoherence normalization.
//!
//! The averaged estimator is
//!
//! ```text
//! B(k1, k2)  = < F(k1) F(k2) F*(k1+k2) >
//! b²(k1, k2) = |B|² / ( < |F(k1) F(k2)|² > < |F(k1+k2)|² > )
//! ```
//!
//! where `< >` is the mean over segments. By Cauchy-Schwarz `b²` lies in
//! `[0, 1]`; a single segment gives `b² = 1` wherever it is defined, so
//! the coupled/uncoupled distinction only appears once segments are averaged.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::series::TimeSeries;
use crate::spectral::dft::{dft_values, ComplexSpectrum};

/// Bins whose mean power falls below this fraction of the largest mean power
/// are treated as empty (round-off, e.g. the DC bin after demeaning).
pub const RELATIVE_POWER_FLOOR: f64 = 1e-24;

/// Taper applied to each segment before its transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    Rectangular,
    /// Periodic Hann, `0.5 (1 - cos(2 pi t / L))`.
    #[default]
    Hann,
}

/// Trend removed from each segment before windowing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Detrend {
    None,
    #[default]
    Demean,
    /// Least-squares straight line.
    Linear,
}

/// Segmentation parameters for [`segmented_bispectrum`].
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentConfig {
    pub segment_length: usize,
    /// Fraction of each segment shared with the next, in `[0, 1)`.
    pub overlap: f64,
    pub window: Window,
    pub detrend: Detrend,
    /// Use at most this many segments, taken from the start of the series.
    pub max_segments: Option<usize>,
}

impl SegmentConfig {
    pub fn new(segment_length: usize) -> Self {
        Self {
            segment_length,
            overlap: 0.0,
            window: Window::default(),
            detrend: Detrend::default(),
            max_segments: None,
        }
    }

    /// `count` non-overlapping segments, each the largest power of two that fits
    /// `count` times into `series_len`.
    pub fn with_segment_count(series_len: usize, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidSegmentation(
                "segment count must be >= 1".into(),
            ));
        }
        let per = series_len / count;
        if per < 8 {
            return Err(Error::InvalidSegmentation(format!(
                "{series_len} samples cannot hold {count} segments of at least 8 samples"
            )));
        }
        let len = 1usize << (usize::BITS - 1 - per.leading_zeros());
        Ok(Self {
            max_segments: Some(count),
            ..Self::new(len)
        })
    }

    pub fn window(mut self, window: Window) -> Self {
        self.window = window;
        self
    }

    pub fn detrend(mut self, detrend: Detrend) -> Self {
        self.detrend = detrend;
        self
    }

    pub fn overlap(mut self, overlap: f64) -> Self {
        self.overlap = overlap;
        self
    }

    pub fn max_segments(mut self, max: Option<usize>) -> Self {
        self.max_segments = max;
        self
    }

    fn hop(&self) -> usize {
        ((self.segment_length as f64 * (1.0 - self.overlap)).round() as usize).max(1)
    }

    fn validate(&self, series_len: usize) -> Result<()> {
        if self.segment_length > series_len {
            return Err(Error::SegmentTooLong {
                segment_length: self.segment_length,
                series_length: series_len,
            });
        }
        if !self.segment_length.is_power_of_two() {
            return Err(Error::InvalidSegmentation(format!(
                "segment length {} is not a power of two",
                self.segment_length
            )));
        }
        if self.segment_length < 8 {
            return Err(Error::DomainTooSmall(self.segment_length));
        }
        if !(0.0..1.0).contains(&self.overlap) {
            return Err(Error::InvalidSegmentation(format!(
                "overlap fraction {} outside [0, 1)",
                self.overlap
            )));
        }
        if self.max_segments == Some(0) {
            return Err(Error::InvalidSegmentation(
                "max_segments must be >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Start offsets of the segments this config takes from a series of `series_len`.
    pub fn segment_starts(&self, series_len: usize) -> Result<Vec<usize>> {
        self.validate(series_len)?;
        let hop = self.hop();
        let count = (series_len - self.segment_length) / hop + 1;
        let count = self.max_segments.map_or(count, |m| m.min(count));
        Ok((0..count).map(|i| i * hop).collect())
    }
}

/// Averaged bispectrum and normalization accumulators over the principal domain.
#[derive(Debug, Clone, PartialEq)]
pub struct BispectrumGrid {
    n: usize,
    row_offsets: Vec<usize>,
    values: Vec<Complex64>,
    norm_a: Vec<f64>,
    norm_b: Vec<f64>,
    mean_power: Vec<f64>,
    segments: usize,
}

fn row_len(k1: usize, half: usize) -> usize {
    k1.min(half - k1) + 1
}

fn row_offsets(n: usize) -> Vec<usize> {
    let half = n / 2;
    let mut offsets = Vec::with_capacity(half + 2);
    let mut acc = 0;
    for k1 in 0..=half {
        offsets.push(acc);
        acc += row_len(k1, half);
    }
    offsets.push(acc);
    offsets
}

impl BispectrumGrid {
    /// Transform length `N` of the underlying segments.
    pub fn transform_length(&self) -> usize {
        self.n
    }

    /// Number of segments `M` averaged.
    pub fn segments_averaged(&self) -> usize {
        self.segments
    }

    /// Number of principal-domain cells.
    pub fn cell_count(&self) -> usize {
        self.values.len()
    }

    /// Flat index of `(k1, k2)` if it lies in the principal domain.
    pub fn index(&self, k1: usize, k2: usize) -> Option<usize> {
        let half = self.n / 2;
        (k2 <= k1 && k1 + k2 <= half).then(|| self.row_offsets[k1] + k2)
    }

    /// Iterate principal-domain coordinates in row-major order (`k1`, then `k2`).
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let half = self.n / 2;
        (0..=half).flat_map(move |k1| (0..row_len(k1, half)).map(move |k2| (k1, k2)))
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn norm_a(&self) -> &[f64] {
        &self.norm_a
    }

    pub fn norm_b(&self) -> &[f64] {
        &self.norm_b
    }

    /// Mean `|F(k)|²` over segments, `k = 0..=N/2`.
    pub fn mean_power(&self) -> &[f64] {
        &self.mean_power
    }

    /// `B(k1, k2)` for any bins modulo `N`, folded into the principal domain with
    /// the real-signal symmetries `B(a,b) = B(b,a) = B(a, -a-b)` and
    /// `B(-a,-b) = conj B(a,b)`. Returns `None` for triples in the discrete
    /// outer triangle, which have no image in the principal domain.
    pub fn value(&self, k1: usize, k2: usize) -> Option<Complex64> {
        let n = self.n;
        let (a, b) = (k1 % n, k2 % n);
        let c = (2 * n - a - b) % n;
        let neg = |x: usize| (n - x) % n;
        let triples = [(a, b, c, false), (neg(a), neg(b), neg(c), true)];
        for (x, y, z, conj) in triples {
            for (p, q) in [(x, y), (y, x), (x, z), (z, x), (y, z), (z, y)] {
                if let Some(i) = self.index(p, q) {
                    let v = self.values[i];
                    return Some(if conj { v.conj() } else { v });
                }
            }
        }
        None
    }

    /// Position of `(k1, k2)` after folding by swap and sign flip only; these
    /// keep the `norm_a`/`norm_b` split, so bicoherence is well defined there.
    pub fn norm_preserving_index(&self, k1: usize, k2: usize) -> Option<usize> {
        let n = self.n;
        let (a, b) = (k1 % n, k2 % n);
        let (na, nb) = ((n - a) % n, (n - b) % n);
        [(a, b), (b, a), (na, nb), (nb, na)]
            .into_iter()
            .find_map(|(p, q)| self.index(p, q))
    }

    /// Bicoherence at `(k1, k2)`, folded by swap/sign symmetry.
    pub fn bicoherence_at(&self, k1: usize, k2: usize) -> Option<f64> {
        let i = self.norm_preserving_index(k1, k2)?;
        let (p, q) = self.coords(i);
        Some(self.bicoherence_cell(i, p, q))
    }

    /// `(k1, k2)` of flat index `i`.
    pub fn coords(&self, i: usize) -> (usize, usize) {
        let k1 = self.row_offsets.partition_point(|&off| off <= i) - 1;
        (k1, i - self.row_offsets[k1])
    }

    fn power_floor(&self) -> f64 {
        self.mean_power.iter().cloned().fold(0.0, f64::max) * RELATIVE_POWER_FLOOR
    }

    fn bicoherence_cell(&self, i: usize, k1: usize, k2: usize) -> f64 {
        bicoherence_value(self, i, k1, k2, self.power_floor())
    }
}

fn bicoherence_value(grid: &BispectrumGrid, i: usize, k1: usize, k2: usize, floor: f64) -> f64 {
    let p = &grid.mean_power;
    if p[k1] <= floor || p[k2] <= floor || p[k1 + k2] <= floor {
        return 0.0;
    }
    let den = grid.norm_a[i] * grid.norm_b[i];
    if den > 0.0 {
        (grid.values[i].norm_sqr() / den).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

fn empty_grid(n: usize) -> BispectrumGrid {
    let row_offsets = row_offsets(n);
    let cells = *row_offsets.last().unwrap();
    BispectrumGrid {
        n,
        row_offsets,
        values: vec![Complex64::new(0.0, 0.0); cells],
        norm_a: vec![0.0; cells],
        norm_b: vec![0.0; cells],
        mean_power: vec![0.0; n / 2 + 1],
        segments: 0,
    }
}

/// Single-transform bispectrum of `spectrum` (`segments_averaged = 1`).
pub fn bispectrum(spectrum: &ComplexSpectrum) -> Result<BispectrumGrid> {
    let n = spectrum.source_length();
    if n < 8 {
        return Err(Error::DomainTooSmall(n));
    }
    average_spectra(n, std::slice::from_ref(spectrum))
}

/// Mean of per-spectrum bispectra. Rows are filled in parallel; each cell sums
/// its segments in index order, so the result does not depend on scheduling.
fn average_spectra(n: usize, spectra: &[ComplexSpectrum]) -> Result<BispectrumGrid> {
    let mut grid = empty_grid(n);
    let half = n / 2;
    let m = spectra.len() as f64;

    let offsets = &grid.row_offsets;
    let mut rows: Vec<(&mut [Complex64], &mut [f64], &mut [f64])> = Vec::with_capacity(half + 1);
    {
        let mut vals = grid.values.as_mut_slice();
        let mut na = grid.norm_a.as_mut_slice();
        let mut nb = grid.norm_b.as_mut_slice();
        for k1 in 0..=half {
            let len = offsets[k1 + 1] - offsets[k1];
            let (v, vr) = vals.split_at_mut(len);
            let (a, ar) = na.split_at_mut(len);
            let (b, br) = nb.split_at_mut(len);
            rows.push((v, a, b));
            vals = vr;
            na = ar;
            nb = br;
        }
    }
    rows.into_par_iter()
        .enumerate()
        .for_each(|(k1, (vals, na, nb))| {
            for (k2, ((v, a), b)) in vals
                .iter_mut()
                .zip(na.iter_mut())
                .zip(nb.iter_mut())
                .enumerate()
            {
                let mut sum = Complex64::new(0.0, 0.0);
                let mut sa = 0.0;
                let mut sb = 0.0;
                for s in spectra {
                    let f = s.coeffs();
                    let prod = f[k1] * f[k2];
                    let f3 = f[k1 + k2];
                    sum += prod * f3.conj();
                    sa += prod.norm_sqr();
                    sb += f3.norm_sqr();
                }
                *v = sum / m;
                *a = sa / m;
                *b = sb / m;
            }
        });

    for (k, p) in grid.mean_power.iter_mut().enumerate() {
        *p = spectra
            .iter()
            .map(|s| s.coeffs()[k].norm_sqr())
            .sum::<f64>()
            / m;
    }
    grid.segments = spectra.len();
    Ok(grid)
}

fn window_weights(len: usize, window: Window) -> Vec<f64> {
    match window {
        Window::Rectangular => vec![1.0; len],
        Window::Hann => {
            let l = len as f64;
            (0..len)
                .map(|t| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * t as f64 / l).cos()))
                .collect()
        }
    }
}

/// Detrend and taper one segment.
///
/// The trend is fitted by least squares weighted with the window, so the
/// tapered segment has exactly zero sum (an empty DC bin) for both `Demean`
/// and `Linear`. With the rectangular window this is the ordinary fit.
fn prepare_segment(raw: &[f64], detrend: Detrend, window: Window) -> Vec<f64> {
    let w = window_weights(raw.len(), window);
    let sw: f64 = w.iter().sum();
    let mut seg = raw.to_vec();
    match detrend {
        Detrend::None => {}
        Detrend::Demean => {
            let mean = seg.iter().zip(&w).map(|(x, w)| x * w).sum::<f64>() / sw;
            seg.iter_mut().for_each(|v| *v -= mean);
        }
        Detrend::Linear => {
            let tm = w.iter().enumerate().map(|(t, w)| t as f64 * w).sum::<f64>() / sw;
            let ym = seg.iter().zip(&w).map(|(x, w)| x * w).sum::<f64>() / sw;
            let (mut sxy, mut sxx) = (0.0, 0.0);
            for (t, (&y, &wt)) in seg.iter().zip(&w).enumerate() {
                let dx = t as f64 - tm;
                sxy += wt * dx * (y - ym);
                sxx += wt * dx * dx;
            }
            let slope = sxy / sxx;
            for (t, v) in seg.iter_mut().enumerate() {
                *v -= ym + slope * (t as f64 - tm);
            }
        }
    }
    if window != Window::Rectangular {
        seg.iter_mut().zip(&w).for_each(|(v, w)| *v *= w);
    }
    seg
}

/// Segment-averaged bispectrum of `series`.
///
/// Each segment is detrended, then windowed, then transformed; the grid and
/// both normalization accumulators are arithmetic means over segments.
pub fn segmented_bispectrum(series: &TimeSeries, config: &SegmentConfig) -> Result<BispectrumGrid> {
    let starts = config.segment_starts(series.len())?;
    let len = config.segment_length;
    let values = series.values();
    let spectra = starts
        .par_iter()
        .map(|&s| {
            dft_values(&prepare_segment(
                &values[s..s + len],
                config.detrend,
                config.window,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    average_spectra(len, &spectra)
}

/// Bicoherence `b²` over the principal domain, same layout as the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BicoherenceMap {
    n: usize,
    row_offsets: Vec<usize>,
    values: Vec<f64>,
}

impl BicoherenceMap {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, k1: usize, k2: usize) -> Option<f64> {
        let half = self.n / 2;
        (k2 <= k1 && k1 + k2 <= half).then(|| self.values[self.row_offsets[k1] + k2])
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// Dense `(N/2 + 1) x (N/4 + 1)` matrix indexed `[k1][k2]`, zero outside
    /// the principal domain.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let half = self.n / 2;
        (0..=half)
            .map(|k1| {
                (0..=half / 2)
                    .map(|k2| self.at(k1, k2).unwrap_or(0.0))
                    .collect()
            })
            .collect()
    }
}

/// `b² = |B|² / (norm_a norm_b)`, zero where the denominator vanishes or any
/// of the three bins carries only round-off power.
pub fn bicoherence(grid: &BispectrumGrid) -> BicoherenceMap {
    let floor = grid.power_floor();
    let values = grid
        .cells()
        .enumerate()
        .map(|(i, (k1, k2))| bicoherence_value(grid, i, k1, k2, floor))
        .collect();
    BicoherenceMap {
        n: grid.n,
        row_offsets: grid.row_offsets.clone(),
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::dft::dft_values;
    use std::f64::consts::PI;

    fn triad(n: usize, bins: [usize; 3], phases: [f64; 3]) -> Vec<f64> {
        (0..n)
            .map(|t| {
                bins.iter()
                    .zip(phases)
                    .map(|(&k, th)| (2.0 * PI * k as f64 * t as f64 / n as f64 + th).cos())
                    .sum()
            })
            .collect()
    }

    #[test]
    fn principal_domain_layout() {
        let g = empty_grid(16);
        let cells: Vec<_> = g.cells().collect();
        assert_eq!(cells.len(), g.cell_count());
        for (i, &(k1, k2)) in cells.iter().enumerate() {
            assert!(k2 <= k1 && k1 + k2 <= 8);
            assert_eq!(g.index(k1, k2), Some(i));
            assert_eq!(g.coords(i), (k1, k2));
        }
        // k1 = 0..=8 rows hold 1,2,3,4,5,4,3,2,1 cells
        assert_eq!(g.cell_count(), 25);
        assert_eq!(g.index(3, 4), None);
        assert_eq!(g.index(5, 4), None);
    }

    #[test]
    fn too_small_domain() {
        let f = dft_values(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(matches!(bispectrum(&f), Err(Error::DomainTooSmall(4))));
    }

    #[test]
    fn zero_signal_zero_grid() {
        let f = dft_values(&[0.0; 32]).unwrap();
        let g = bispectrum(&f).unwrap();
        assert!(g.values().iter().all(|v| v.norm() == 0.0));
        assert!(bicoherence(&g).values().iter().all(|&b| b == 0.0));
    }

    #[test]
    fn coupled_triad_is_real_positive() {
        let n = 256;
        let (t5, t9) = (0.7, 2.1);
        let x = triad(n, [5, 9, 14], [t5, t9, t5 + t9]);
        let g = bispectrum(&dft_values(&x).unwrap()).unwrap();
        let b = g.value(5, 9).unwrap();
        let expected = (n as f64 / 2.0).powi(3);
        assert!((b.norm() - expected).abs() / expected < 1e-10);
        assert!(b.arg().abs() < 1e-6);
        assert_eq!(expected, 2_097_152.0);
    }

    #[test]
    fn uncoupled_triad_carries_phase_mismatch() {
        let n = 256;
        let (t5, t9, t14) = (0.7, 2.1, 0.4);
        let x = triad(n, [5, 9, 14], [t5, t9, t14]);
        let g = bispectrum(&dft_values(&x).unwrap()).unwrap();
        let b = g.value(9, 5).unwrap();
        let want = t5 + t9 - t14;
        let d = (b.arg() - want).rem_euclid(2.0 * PI);
        assert!(d.min(2.0 * PI - d) < 1e-6);
        assert!((b.norm() - 128f64.powi(3)).abs() / 128f64.powi(3) < 1e-10);
    }

    #[test]
    fn value_folding_matches_definition() {
        let n = 32;
        let x: Vec<f64> = (0..n).map(|t| ((t * 7919) % 31) as f64 - 15.0).collect();
        let f = dft_values(&x).unwrap();
        let g = bispectrum(&f).unwrap();
        for (k1, k2) in g.cells() {
            assert!(g.value(k1, k2).is_some());
        }
        for a in 0..n {
            for b in 0..n {
                let direct = f.at(a) * f.at(b) * f.at(a + b).conj();
                let Some(folded) = g.value(a, b) else {
                    // outer-triangle triples have no principal-domain image
                    assert!(a.min(n - a) + b.min(n - b) > 0);
                    continue;
                };
                assert!(
                    (direct - folded).norm() <= 1e-9 * (1.0 + direct.norm()),
                    "({a},{b})"
                );
            }
        }
    }

    #[test]
    fn single_segment_bicoherence_is_one() {
        let x: Vec<f64> = (0..64)
            .map(|t| ((t * 37 + 11) % 17) as f64 * 0.3 - 2.0)
            .collect();
        let g = bispectrum(&dft_values(&x).unwrap()).unwrap();
        let b = bicoherence(&g);
        for (i, (k1, k2)) in g.cells().enumerate() {
            if g.norm_a()[i] * g.norm_b()[i] > 0.0 && k2 > 0 {
                assert!((b.values()[i] - 1.0).abs() < 1e-9, "({k1},{k2})");
            }
        }
    }

    #[test]
    fn identical_segments_average_to_single() {
        let seg = triad(64, [5, 9, 14], [0.3, 1.1, 1.4]);
        let series: Vec<f64> = seg.iter().cycle().take(64 * 8).cloned().collect();
        let ts = TimeSeries::from_values(series, "rep").unwrap();
        let cfg = SegmentConfig::new(64)
            .detrend(Detrend::None)
            .window(Window::Rectangular);
        let avg = segmented_bispectrum(&ts, &cfg).unwrap();
        let single = bispectrum(&dft_values(&seg).unwrap()).unwrap();
        assert_eq!(avg.segments_averaged(), 8);
        let (a, s) = (avg.value(9, 5).unwrap(), single.value(9, 5).unwrap());
        assert!((a - s).norm() / s.norm() < 1e-12);
    }

    #[test]
    fn segmentation_rules() {
        let ts = TimeSeries::from_values(vec![0.5; 100], "x").unwrap();
        assert!(matches!(
            segmented_bispectrum(&ts, &SegmentConfig::new(128)),
            Err(Error::SegmentTooLong { .. })
        ));
        assert!(matches!(
            segmented_bispectrum(&ts, &SegmentConfig::new(48)),
            Err(Error::InvalidSegmentation(_))
        ));
        let cfg = SegmentConfig::new(32).overlap(0.5);
        assert_eq!(cfg.segment_starts(100).unwrap(), vec![0, 16, 32, 48, 64]);
        let cfg = SegmentConfig::with_segment_count(100_000, 64).unwrap();
        assert_eq!(cfg.segment_length, 1024);
        assert_eq!(cfg.segment_starts(100_000).unwrap().len(), 64);
        assert!(SegmentConfig::new(32)
            .overlap(1.0)
            .segment_starts(100)
            .is_err());
    }

    #[test]
    fn linear_detrend_removes_ramp() {
        let raw: Vec<f64> = (0..16).map(|t| 3.0 + 0.5 * t as f64).collect();
        let out = prepare_segment(&raw, Detrend::Linear, Window::Rectangular);
        assert!(out.iter().all(|v| v.abs() < 1e-12));
        let out = prepare_segment(&raw, Detrend::Demean, Window::Rectangular);
        assert!(out.iter().sum::<f64>().abs() < 1e-12);
        let wobbly: Vec<f64> = raw
            .iter()
            .enumerate()
            .map(|(t, v)| v + (t as f64).sin())
            .collect();
        for d in [Detrend::Demean, Detrend::Linear] {
            let out = prepare_segment(&wobbly, d, Window::Hann);
            assert!(out.iter().sum::<f64>().abs() < 1e-12, "{d:?}");
            assert_eq!(out[0], 0.0);
        }
    }

    #[test]
    fn dense_heatmap_shape() {
        let x: Vec<f64> = (0..32).map(|t| (t as f64 * 0.37).sin()).collect();
        let g = bispectrum(&dft_values(&x).unwrap()).unwrap();
        let dense = bicoherence(&g).to_dense();
        assert_eq!(dense.len(), 17);
        assert!(dense.iter().all(|r| r.len() == 9));
        assert_eq!(dense[3][5], 0.0);
    }
}

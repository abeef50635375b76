//! Fourier analysis, bispectrum estimation and hotspot classification.

mod bispectrum;
mod dft;
mod hotspots;

pub use bispectrum::{
    bicoherence, bispectrum, segmented_bispectrum, BicoherenceMap, BispectrumGrid, Detrend,
    SegmentConfig, Window, RELATIVE_POWER_FLOOR,
};
pub use dft::{
    bin_to_omega, dft_forward, dft_values, loglog_slope, omega_to_bin, power_spectrum,
    ComplexSpectrum, Normalization,
};
pub use hotspots::{
    auto_threshold, detect_hotspots, Hotspot, HotspotConfig, HotspotReport, Threshold, Verdict,
    DEFAULT_MIN_SEGMENTS, FAMILY_FALSE_ALARM,
};

//! Uniform and Gaussian white noise: flat spectrum, no bicoherence hotspots.
//!
//! cargo run --release --example noise_nulls [seed]

use qpc::spectral::{
    bicoherence, detect_hotspots, dft_forward, loglog_slope, power_spectrum, segmented_bispectrum,
    HotspotConfig, SegmentConfig,
};
use qpc::synthetic::{gen_gaussian_box_muller, gen_white_uniform, NoiseSpec};

fn main() -> qpc::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0);
    let spec = NoiseSpec::new(660_000, 1.0, seed);

    for (name, series) in [
        ("uniform", gen_white_uniform(&spec)?),
        ("gaussian", gen_gaussian_box_muller(&spec)?),
    ] {
        let power = power_spectrum(&dft_forward(&series)?);
        let hi = series.len() / 2;
        let slope = loglog_slope(&power, hi / 100, hi).unwrap_or(f64::NAN);

        let grid = segmented_bispectrum(
            &series,
            &SegmentConfig::with_segment_count(series.len(), 64)?,
        )?;
        let report = detect_hotspots(&grid, &HotspotConfig::default());
        println!("{name} noise: {} samples", series.len());
        println!("  log-log spectral slope over the top two decades: {slope:+.4}");
        println!(
            "  max bicoherence {:.3}, threshold {:.3}, hotspots {}, verdict {}",
            bicoherence(&grid).max(),
            report.threshold_used,
            report.hotspots.len(),
            report.verdict
        );
    }
    Ok(())
}

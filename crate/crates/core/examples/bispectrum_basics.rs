//! The raw objects: DFT of a short triad, the principal-domain bispectrum and
//! its symmetry folding, and single- versus multi-segment bicoherence.
//!
//! cargo run --example bispectrum_basics

use std::f64::consts::PI;

use qpc::spectral::{
    bicoherence, bispectrum, dft_forward, segmented_bispectrum, SegmentConfig, Window,
};
use qpc::synthetic::{gen_white_uniform, NoiseSpec};
use qpc::TimeSeries;

fn main() -> qpc::Result<()> {
    let n = 64;
    let (ka, kb) = (5, 9);
    let values: Vec<f64> = (0..n)
        .map(|t| {
            let w = 2.0 * PI * t as f64 / n as f64;
            (ka as f64 * w + 0.3).cos()
                + (kb as f64 * w + 1.1).cos()
                + ((ka + kb) as f64 * w + 1.4).cos()
        })
        .collect();
    let series = TimeSeries::from_values(values, "triad")?;

    let spectrum = dft_forward(&series)?;
    for k in [ka, kb, ka + kb] {
        let f = spectrum.at(k);
        println!("F({k:>2}) = {:8.3} at phase {:+.3}", f.norm(), f.arg());
    }

    let grid = bispectrum(&spectrum)?;
    println!("\n{} principal-domain cells for N = {n}", grid.cell_count());
    let b = grid.value(kb, ka).expect("principal cell");
    println!(
        "B({kb},{ka}) = {:.1} at phase {:+.2e} (phase sum cancels)",
        b.norm(),
        b.arg()
    );
    for (k1, k2) in [(ka, kb), (n - ka, n - kb), (kb, n - ka - kb)] {
        let v = grid.value(k1, k2).expect("folds into the principal domain");
        println!("B({k1:>2},{k2:>2}) = {:.1} {:+.1}i", v.re, v.im);
    }

    // the same triad in every segment, plus independent noise
    let noise = gen_white_uniform(&NoiseSpec::new(n * 16, 0.5, 1))?;
    let long = TimeSeries::from_values(
        noise
            .values()
            .iter()
            .enumerate()
            .map(|(t, e)| series.values()[t % n] + e)
            .collect(),
        "repeated triad",
    )?;
    let single = bicoherence(&bispectrum(&dft_forward(&long.slice(0, n)?)?)?);
    let averaged = bicoherence(&segmented_bispectrum(
        &long,
        &SegmentConfig::new(n).window(Window::Rectangular),
    )?);
    println!(
        "\nbicoherence at ({kb},{ka}): one segment {:.3}, 16 segments {:.3}",
        single.at(kb, ka).unwrap(),
        averaged.at(kb, ka).unwrap()
    );
    println!(
        "off-triad cell (20,3):       one segment {:.3}, 16 segments {:.3}",
        single.at(20, 3).unwrap(),
        averaged.at(20, 3).unwrap()
    );
    Ok(())
}

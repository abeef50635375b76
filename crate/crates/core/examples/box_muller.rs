//! Box-Muller transform: spot values, sample moments and a coarse histogram
//! against the standard normal density.
//!
//! cargo run --release --example box_muller

use qpc::synthetic::{box_muller_pair, gen_gaussian_box_muller, NoiseSpec};

fn main() -> qpc::Result<()> {
    println!("z(1, 0.3)        = {}", box_muller_pair(1.0, 0.3)?);
    println!(
        "z(e^-1/2, 0)     = {}",
        box_muller_pair((-0.5f64).exp(), 0.0)?
    );
    println!(
        "z(e^-2, 0.5)     = {}",
        box_muller_pair((-2.0f64).exp(), 0.5)?
    );
    println!(
        "z(0, 0.1) errors : {}",
        box_muller_pair(0.0, 0.1).unwrap_err()
    );

    let n = 660_000;
    let g = gen_gaussian_box_muller(&NoiseSpec::new(n, 1.0, 7))?;
    let mean = g.mean();
    let var = g.values().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    println!("\n{n} samples: mean {mean:+.5}, std {:.5}", var.sqrt());

    let width = 0.5;
    println!("\n   bin      observed  expected");
    for i in -6..6 {
        let lo = i as f64 * width;
        let count = g
            .values()
            .iter()
            .filter(|&&v| v >= lo && v < lo + width)
            .count();
        let mid = lo + width / 2.0;
        let expected =
            n as f64 * width * (-mid * mid / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        println!("{lo:+5.1}..{:+4.1} {count:>9} {expected:>9.0}", lo + width);
    }
    Ok(())
}

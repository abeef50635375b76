//! Unforced diffusion of sin(x) against the exact e^{-nu t} sin(x), and the
//! same run pushed past stability to show the CFL-style error.
//!
//! cargo run --release --example diffusion_decay

use std::f64::consts::PI;

use qpc::simulator::{run, Equation, ForcingScaling, SolverConfig};

fn main() -> qpc::Result<()> {
    let mut config = SolverConfig {
        n_grid: 64,
        length: 2.0 * PI,
        dt: 1e-4,
        nu: 1.0,
        forcing_amplitude: 0.0,
        forcing_scaling: ForcingScaling::Amplitude,
        equation: Equation::Diffusion,
        seed: 0,
        n_steps: 1000,
        probe_index: 16,
        snapshot_stride: Some(250),
    };
    let out = run(&config)?;
    for snap in &out.snapshots {
        let err = config
            .grid_points()
            .iter()
            .zip(&snap.u)
            .map(|(x, u)| (u - (-config.nu * snap.time).exp() * x.sin()).abs())
            .fold(0.0, f64::max);
        println!("t = {:.3}: max |u - e^(-t) sin x| = {err:.2e}", snap.time);
    }

    config.equation = Equation::Burgers;
    config.dt = 5.0;
    match run(&config) {
        Ok(_) => println!("unexpectedly stable"),
        Err(e) => println!("\nBurgers with dt = 5: {e}"),
    }
    Ok(())
}

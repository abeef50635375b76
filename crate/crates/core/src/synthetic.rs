//! Seeded generators for the benchmark datasets: cosine triads with or
//! without phase coupling, uniform white noise and Box-Muller Gaussian noise.
//!
//! Every generator is a pure function of its spec; the same seed always
//! yields the same samples on every platform (ChaCha8 streams).

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Default amplitude of the uniform noise added to triads.
pub const DEFAULT_TRIAD_NOISE: f64 = 0.05;

const PHASE_STREAM: u64 = 0;
const NOISE_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coupling {
    /// `theta_gamma` drawn independently of the other two phases.
    Independent,
    /// `theta_gamma = theta_alpha + theta_beta`.
    PhaseSum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrequencyRule {
    /// `omega_gamma = omega_alpha + omega_beta`.
    #[default]
    Sum,
    /// `1 / omega_gamma = 1 / omega_alpha + 1 / omega_beta`.
    Reciprocal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriadSpec {
    /// Radians per sample.
    pub omega_alpha: f64,
    /// Radians per sample.
    pub omega_beta: f64,
    pub coupling: Coupling,
    pub frequency_rule: FrequencyRule,
    pub n_samples: usize,
    pub noise_amplitude: f64,
    pub seed: u64,
    /// Redraw the phases every `phase_block` samples. `None` keeps one set of
    /// phases for the whole series.
    pub phase_block: Option<usize>,
}

impl TriadSpec {
    pub fn new(
        omega_alpha: f64,
        omega_beta: f64,
        coupling: Coupling,
        n_samples: usize,
        seed: u64,
    ) -> Self {
        Self {
            omega_alpha,
            omega_beta,
            coupling,
            frequency_rule: FrequencyRule::Sum,
            n_samples,
            noise_amplitude: DEFAULT_TRIAD_NOISE,
            seed,
            phase_block: None,
        }
    }

    pub fn omega_gamma(&self) -> f64 {
        match self.frequency_rule {
            FrequencyRule::Sum => self.omega_alpha + self.omega_beta,
            FrequencyRule::Reciprocal => 1.0 / (1.0 / self.omega_alpha + 1.0 / self.omega_beta),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for omega in [self.omega_alpha, self.omega_beta] {
            if !(omega.is_finite() && omega > 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "frequencies must be positive, got {omega}"
                )));
            }
        }
        if self.omega_alpha == self.omega_beta {
            return Err(Error::InvalidSpec(
                "omega_alpha must differ from omega_beta".into(),
            ));
        }
        for omega in [self.omega_alpha, self.omega_beta, self.omega_gamma()] {
            if omega >= PI {
                return Err(Error::FrequencyAboveNyquist { omega });
            }
        }
        if self.n_samples < 2 {
            return Err(Error::InvalidSpec(format!(
                "n_samples must be >= 2, got {}",
                self.n_samples
            )));
        }
        if !(self.noise_amplitude.is_finite() && self.noise_amplitude >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "noise amplitude must be >= 0, got {}",
                self.noise_amplitude
            )));
        }
        if self.phase_block == Some(0) {
            return Err(Error::InvalidSpec("phase_block must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub n_samples: usize,
    pub amplitude: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(n_samples: usize, amplitude: f64, seed: u64) -> Self {
        Self {
            n_samples,
            amplitude,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_samples < 2 {
            return Err(Error::InvalidSpec(format!(
                "n_samples must be >= 2, got {}",
                self.n_samples
            )));
        }
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "amplitude must be >= 0, got {}",
                self.amplitude
            )));
        }
        Ok(())
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn uniform_phase(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen::<f64>() * 2.0 * PI
}

/// `f(t) = cos(wa t + ta) + cos(wb t + tb) + cos(wg t + tg) + noise * u(t)`.
pub fn gen_triad(spec: &TriadSpec) -> Result<TimeSeries> {
    spec.validate()?;
    let (wa, wb, wg) = (spec.omega_alpha, spec.omega_beta, spec.omega_gamma());
    let block = spec.phase_block.unwrap_or(spec.n_samples);
    let mut phases = stream(spec.seed, PHASE_STREAM);
    let mut noise = stream(spec.seed, NOISE_STREAM);

    let mut values = Vec::with_capacity(spec.n_samples);
    let (mut ta, mut tb, mut tg) = (0.0, 0.0, 0.0);
    for t in 0..spec.n_samples {
        if t % block == 0 {
            ta = uniform_phase(&mut phases);
            tb = uniform_phase(&mut phases);
            // always drawn, so coupled and uncoupled specs share ta and tb
            let independent = uniform_phase(&mut phases);
            tg = match spec.coupling {
                Coupling::PhaseSum => ta + tb,
                Coupling::Independent => independent,
            };
        }
        let tf = t as f64;
        let mut v = (wa * tf + ta).cos() + (wb * tf + tb).cos() + (wg * tf + tg).cos();
        if spec.noise_amplitude > 0.0 {
            v += spec.noise_amplitude * noise.gen_range(-1.0..=1.0);
        }
        values.push(v);
    }
    TimeSeries::from_values(values, label_for(spec))
}

fn label_for(spec: &TriadSpec) -> String {
    let kind = match spec.coupling {
        Coupling::PhaseSum => "coupled",
        Coupling::Independent => "uncoupled",
    };
    format!("{kind} triad (seed {})", spec.seed)
}

/// i.i.d. uniform samples in `[-amplitude, amplitude]`, shifted to zero sample mean.
pub fn gen_white_uniform(spec: &NoiseSpec) -> Result<TimeSeries> {
    spec.validate()?;
    let mut rng = stream(spec.seed, PHASE_STREAM);
    let a = spec.amplitude;
    let mut values: Vec<f64> = (0..spec.n_samples)
        .map(|_| if a > 0.0 { rng.gen_range(-a..=a) } else { 0.0 })
        .collect();
    // second pass mops up the rounding left by the first
    for _ in 0..2 {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        values.iter_mut().for_each(|v| *v -= mean);
    }
    TimeSeries::from_values(values, format!("uniform white noise (seed {})", spec.seed))
}

/// `sqrt(-2 ln u1) cos(2 pi u2)`.
pub fn box_muller_pair(u1: f64, u2: f64) -> Result<f64> {
    if !(u1 > 0.0 && u1 <= 1.0) {
        return Err(Error::DomainError(u1));
    }
    Ok((-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos())
}

/// Standard-normal samples from [`box_muller_pair`], scaled by `amplitude`.
pub fn gen_gaussian_box_muller(spec: &NoiseSpec) -> Result<TimeSeries> {
    spec.validate()?;
    let mut rng = stream(spec.seed, PHASE_STREAM);
    let values = (0..spec.n_samples)
        .map(|_| {
            let u1 = 1.0 - rng.gen::<f64>();
            let u2 = rng.gen::<f64>();
            box_muller_pair(u1, u2).map(|g| spec.amplitude * g)
        })
        .collect::<Result<Vec<_>>>()?;
    TimeSeries::from_values(
        values,
        format!("Box-Muller Gaussian noise (seed {})", spec.seed),
    )
}

//! Periodic 1-D pseudo-spectral solver for the stochastically forced Burgers
//! and diffusion equations
//!
//! ```text
//! u_t + u u_x = nu u_xx + f      (burgers)
//! u_t         = nu u_xx + f      (diffusion)
//! ```
//!
//! The state is advanced in Fourier space with classical RK4. The advection
//! term is evaluated in conservative form `-(u²/2)_x` with 2/3-rule
//! dealiasing. The forcing is a fresh zero-mean white-noise field per step,
//! frozen across that step's four stages.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::series::TimeSeries;
use crate::spectral::{dft_values, power_spectrum};

/// Any sample beyond this magnitude is treated as a numerical blow-up.
pub const BLOW_UP_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equation {
    Burgers,
    Diffusion,
}

/// How the per-step forcing sample is scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ForcingScaling {
    /// Uniform in `[-A, A]`.
    #[default]
    Amplitude,
    /// Uniform in `[-A, A] / sqrt(dt)`, the white-noise-in-time limit.
    InverseSqrtDt,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub n_grid: usize,
    pub length: f64,
    pub dt: f64,
    pub nu: f64,
    pub forcing_amplitude: f64,
    pub forcing_scaling: ForcingScaling,
    pub equation: Equation,
    pub seed: u64,
    pub n_steps: u64,
    pub probe_index: usize,
    /// Keep a snapshot every this many steps (and at step 0).
    pub snapshot_stride: Option<u64>,
}

impl SolverConfig {
    /// N = 1024, dt = 1e-4, nu = 3e-3, A = 6, L = 2 pi, 10^5 steps.
    pub fn forced_burgers(seed: u64) -> Self {
        Self {
            n_grid: 1 << 10,
            length: 2.0 * PI,
            dt: 1e-4,
            nu: 3e-3,
            forcing_amplitude: 6.0,
            forcing_scaling: ForcingScaling::Amplitude,
            equation: Equation::Burgers,
            seed,
            n_steps: 100_000,
            probe_index: 0,
            snapshot_stride: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_grid < 16 || !self.n_grid.is_power_of_two() {
            return bad(format!(
                "n_grid must be a power of two >= 16, got {}",
                self.n_grid
            ));
        }
        if !(self.length.is_finite() && self.length > 0.0) {
            return bad(format!("length must be positive, got {}", self.length));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.nu.is_finite() && self.nu >= 0.0) {
            return bad(format!("nu must be >= 0, got {}", self.nu));
        }
        if !(self.forcing_amplitude.is_finite() && self.forcing_amplitude >= 0.0) {
            return bad(format!(
                "forcing amplitude must be >= 0, got {}",
                self.forcing_amplitude
            ));
        }
        if self.probe_index >= self.n_grid {
            return bad(format!(
                "probe index {} outside grid of {}",
                self.probe_index, self.n_grid
            ));
        }
        if self.snapshot_stride == Some(0) {
            return bad("snapshot stride must be >= 1".into());
        }
        Ok(())
    }

    pub fn grid_spacing(&self) -> f64 {
        self.length / self.n_grid as f64
    }

    pub fn grid_points(&self) -> Vec<f64> {
        (0..self.n_grid)
            .map(|j| j as f64 * self.grid_spacing())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub u: Vec<f64>,
    pub time: f64,
    pub step: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: u64,
    pub time: f64,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    /// `u[probe_index]` after every step.
    pub probe_series: TimeSeries,
    pub snapshots: Vec<Snapshot>,
    pub final_state: FieldState,
    pub final_spatial_spectrum: Vec<f64>,
}

/// `u_j = sin(x_j)`, `x_j = j L / N`.
pub fn init_field(config: &SolverConfig) -> Result<FieldState> {
    config.validate()?;
    Ok(FieldState {
        u: config.grid_points().into_iter().map(f64::sin).collect(),
        time: 0.0,
        step: 0,
    })
}

/// `E(k) = |u_hat(k)|²` for `k = 0..=N/2`.
pub fn spatial_energy_spectrum(field: &FieldState) -> Result<Vec<f64>> {
    Ok(power_spectrum(&dft_values(&field.u)?))
}

/// Advance `state` by one time step.
pub fn step(state: &FieldState, config: &SolverConfig) -> Result<FieldState> {
    config.validate()?;
    if state.u.len() != config.n_grid {
        return Err(Error::InvalidConfig(format!(
            "field has {} points, config expects {}",
            state.u.len(),
            config.n_grid
        )));
    }
    if let Some(index) = state.u.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput { index });
    }
    let mut solver = SpectralSolver::new(config)?;
    let mut u_hat = solver.forward(&state.u);
    solver.check_cfl(&state.u, state.step)?;
    solver.advance(&mut u_hat, state.step);
    let u = solver.inverse(&u_hat);
    let step = state.step + 1;
    check_blow_up(&u, step)?;
    Ok(FieldState {
        u,
        time: step as f64 * config.dt,
        step,
    })
}

/// Integrate `config.n_steps` steps from [`init_field`].
pub fn run(config: &SolverConfig) -> Result<SimOutput> {
    run_from(init_field(config)?, config)
}

/// Integrate `config.n_steps` steps from an arbitrary initial field.
pub fn run_from(initial: FieldState, config: &SolverConfig) -> Result<SimOutput> {
    config.validate()?;
    if config.n_steps < 2 {
        return Err(Error::InvalidConfig("n_steps must be >= 2".into()));
    }
    let mut solver = SpectralSolver::new(config)?;
    let mut u = initial.u;
    let start = initial.step;
    let mut u_hat = solver.forward(&u);
    let mut probe = Vec::with_capacity(config.n_steps as usize);
    let mut snapshots = Vec::new();
    let snap = |step: u64, u: &[f64], snaps: &mut Vec<Snapshot>| {
        if let Some(stride) = config.snapshot_stride {
            if (step - start).is_multiple_of(stride) {
                snaps.push(Snapshot {
                    step,
                    time: step as f64 * config.dt,
                    u: u.to_vec(),
                });
            }
        }
    };
    snap(start, &u, &mut snapshots);
    for i in 0..config.n_steps {
        let step = start + i;
        solver.check_cfl(&u, step)?;
        solver.advance(&mut u_hat, step);
        u = solver.inverse(&u_hat);
        check_blow_up(&u, step + 1)?;
        probe.push(u[config.probe_index]);
        snap(step + 1, &u, &mut snapshots);
    }
    let end = start + config.n_steps;
    let final_state = FieldState {
        u,
        time: end as f64 * config.dt,
        step: end,
    };
    let probe_series = TimeSeries::new(
        probe,
        config.dt,
        format!(
            "probe u[{}] ({:?}, seed {})",
            config.probe_index, config.equation, config.seed
        ),
    )?;
    Ok(SimOutput {
        probe_series,
        snapshots,
        final_spatial_spectrum: spatial_energy_spectrum(&final_state)?,
        final_state,
    })
}

fn check_blow_up(u: &[f64], step: u64) -> Result<()> {
    let max_abs = u.iter().fold(0.0f64, |m, v| {
        if v.is_finite() {
            m.max(v.abs())
        } else {
            f64::INFINITY
        }
    });
    if max_abs > BLOW_UP_LIMIT {
        return Err(Error::BlowUp { step, max_abs });
    }
    Ok(())
}

/// Reusable FFT plans, wavenumbers and scratch for one [`SolverConfig`].
pub struct SpectralSolver {
    config: SolverConfig,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// `i k` for the derivative, zero at Nyquist.
    ik: Vec<Complex64>,
    /// `-nu k²`.
    diffusion: Vec<f64>,
    /// 2/3-rule mask: true where `|k| <= N/3`.
    keep: Vec<bool>,
    scratch: Vec<Complex64>,
    work: Vec<Complex64>,
}

impl SpectralSolver {
    pub fn new(config: &SolverConfig) -> Result<Self> {
        config.validate()?;
        let n = config.n_grid;
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let scratch_len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        let base = 2.0 * PI / config.length;
        let signed: Vec<i64> = (0..n as i64)
            .map(|j| if j <= n as i64 / 2 { j } else { j - n as i64 })
            .collect();
        let ik = signed
            .iter()
            .map(|&j| {
                if j.unsigned_abs() as usize * 2 == n {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, base * j as f64)
                }
            })
            .collect();
        let diffusion = signed
            .iter()
            .map(|&j| -config.nu * (base * j as f64).powi(2))
            .collect();
        let cutoff = n / 3;
        let keep = signed
            .iter()
            .map(|&j| j.unsigned_abs() as usize <= cutoff)
            .collect();
        Ok(Self {
            config: config.clone(),
            fwd,
            inv,
            ik,
            diffusion,
            keep,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            work: vec![Complex64::new(0.0, 0.0); n],
        })
    }

    /// Unnormalized forward transform of a physical field.
    pub fn forward(&mut self, u: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fwd.process_with_scratch(&mut buf, &mut self.scratch);
        buf
    }

    /// Physical field from its unnormalized forward transform.
    pub fn inverse(&mut self, u_hat: &[Complex64]) -> Vec<f64> {
        self.work.copy_from_slice(u_hat);
        self.inv
            .process_with_scratch(&mut self.work, &mut self.scratch);
        let scale = 1.0 / self.config.n_grid as f64;
        self.work.iter().map(|c| c.re * scale).collect()
    }

    /// Dealiased `-(u²/2)_x` in Fourier space. Modes with `|k| > N/3` are
    /// exactly zero.
    pub fn nonlinear_term(&mut self, u_hat: &[Complex64]) -> Vec<Complex64> {
        let n = self.config.n_grid;
        let zero = Complex64::new(0.0, 0.0);
        for (w, (&c, &keep)) in self.work.iter_mut().zip(u_hat.iter().zip(&self.keep)) {
            *w = if keep { c } else { zero };
        }
        self.inv
            .process_with_scratch(&mut self.work, &mut self.scratch);
        let scale = 1.0 / n as f64;
        for w in self.work.iter_mut() {
            let u = w.re * scale;
            *w = Complex64::new(0.5 * u * u, 0.0);
        }
        self.fwd
            .process_with_scratch(&mut self.work, &mut self.scratch);
        self.work
            .iter()
            .zip(self.ik.iter().zip(&self.keep))
            .map(|(&w, (&ik, &keep))| if keep { -ik * w } else { zero })
            .collect()
    }

    fn rhs(&mut self, u_hat: &[Complex64], forcing: &[Complex64]) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = match self.config.equation {
            Equation::Burgers => self.nonlinear_term(u_hat),
            Equation::Diffusion => vec![Complex64::new(0.0, 0.0); u_hat.len()],
        };
        for ((o, &c), (&d, &f)) in out
            .iter_mut()
            .zip(u_hat)
            .zip(self.diffusion.iter().zip(forcing))
        {
            *o += c * d + f;
        }
        out
    }

    /// Zero-mean forcing field for step `step`, in Fourier space. Each step
    /// draws from its own ChaCha stream so a step can be replayed in isolation.
    pub fn forcing(&mut self, step: u64) -> Vec<Complex64> {
        let n = self.config.n_grid;
        let amp = match self.config.forcing_scaling {
            ForcingScaling::Amplitude => self.config.forcing_amplitude,
            ForcingScaling::InverseSqrtDt => self.config.forcing_amplitude / self.config.dt.sqrt(),
        };
        if amp == 0.0 {
            return vec![Complex64::new(0.0, 0.0); n];
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(step);
        let mut f: Vec<f64> = (0..n).map(|_| amp * rng.gen_range(-1.0..=1.0)).collect();
        let mean = f.iter().sum::<f64>() / n as f64;
        f.iter_mut().for_each(|v| *v -= mean);
        let mut f_hat = self.forward(&f);
        f_hat[0] = Complex64::new(0.0, 0.0);
        f_hat
    }

    /// One RK4 step of `u_hat` in place.
    pub fn advance(&mut self, u_hat: &mut [Complex64], step: u64) {
        let dt = self.config.dt;
        let forcing = self.forcing(step);
        let stage = |base: &[Complex64], k: &[Complex64], h: f64| -> Vec<Complex64> {
            base.iter().zip(k).map(|(&b, &k)| b + k * h).collect()
        };
        let k1 = self.rhs(u_hat, &forcing);
        let k2 = self.rhs(&stage(u_hat, &k1, 0.5 * dt), &forcing);
        let k3 = self.rhs(&stage(u_hat, &k2, 0.5 * dt), &forcing);
        let k4 = self.rhs(&stage(u_hat, &k3, dt), &forcing);
        for (i, u) in u_hat.iter_mut().enumerate() {
            *u += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (dt / 6.0);
        }
    }

    /// Courant number `dt max|u| / dx` must stay below 1 (burgers only).
    pub fn check_cfl(&self, u: &[f64], step: u64) -> Result<()> {
        if self.config.equation != Equation::Burgers {
            return Ok(());
        }
        let max_abs = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let courant = self.config.dt * max_abs / self.config.grid_spacing();
        if courant >= 1.0 {
            return Err(Error::CflViolation { step, courant });
        }
        Ok(())
    }
}

//! Crank-Nicolson propagation of the driven Schrödinger equation.
//!
//! This is the independent check on the closed-form driven states: the
//! numerical state starts in an eigenstate, is evolved under
//! `−ħ²/2m ∂² + V₀ + V_FF` and compared with `ψ_FF` along the way.
//!
//! Two frames are available. The fixed frame works on a static grid; a
//! moving box wall is then modelled by a steep potential step. The scaled
//! frame evolves `ψ_Γ(X) = √L ψ(XL)` on `X = x/L`, where the wall sits still
//! and the Hamiltonian picks up the dilation term `iħ(L̇/L)·½(X∂ + ∂X)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::fastforward::{ff_wavefunction, potential_coefficient};
use crate::linalg::solve_tridiagonal;
use crate::spectra::{eigenfunction, eigenfunction_value, Confinement, Grid, ModelKind};
use crate::trajectory::{KinematicSample, Schedule};

/// Height of the potential step standing in for a moving box wall.
pub const DEFAULT_WALL_HEIGHT: f64 = 1e8;

/// Allowed norm drift per 10⁴ steps before a run is flagged.
pub const NORM_DRIFT_TOLERANCE: f64 = 1e-10;

/// Courant-like number `dt · E_max / ħ` above which a warning is issued.
pub const CFL_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Both grid end points are pinned to zero.
    Dirichlet,
    /// End points evolve freely; values beyond the grid are zero.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    Fixed,
    Scaled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorConfig {
    pub dt: f64,
    /// Physical coordinates in the fixed frame, `X = x/L` in the scaled one.
    pub grid: Grid,
    pub boundary: Boundary,
    pub frame: Frame,
    pub wall_height: f64,
    /// Include `V_FF`. Switching it off gives the bare, non-driven control run.
    pub driving: bool,
    /// Record a trace sample every this many steps (0: final state only).
    pub record_every: usize,
    /// Level `ψ_FF` is compared with; `None` picks the most populated level
    /// of the initial state.
    pub reference_level: Option<u32>,
}

impl PropagatorConfig {
    pub fn new(dt: f64, grid: Grid) -> Self {
        Self {
            dt,
            grid,
            boundary: Boundary::Dirichlet,
            frame: Frame::Fixed,
            wall_height: DEFAULT_WALL_HEIGHT,
            driving: true,
            record_every: 0,
            reference_level: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(domain(format!("time step must be positive, got {}", self.dt)));
        }
        if !(self.wall_height.is_finite() && self.wall_height > 0.0) {
            return Err(domain(format!(
                "wall height must be positive, got {}",
                self.wall_height
            )));
        }
        if self.grid.len() < 5 {
            return Err(domain("propagation needs at least 5 grid points"));
        }
        Ok(())
    }
}

/// Projections onto the moving basis `φ_m(x; L) e^{i m L̇ x²/2ħL}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Populations {
    pub levels: Vec<u32>,
    pub probabilities: Vec<f64>,
    /// `‖ψ‖² − Σ p_m`: weight outside the listed levels.
    pub remainder: f64,
}

impl Populations {
    pub fn get(&self, n: u32) -> Option<f64> {
        self.levels.iter().position(|&m| m == n).map(|i| self.probabilities[i])
    }
}

/// Default basis: `2n + 10` levels starting at the ground level.
pub fn default_basis(conf: &Confinement, n: u32) -> std::ops::Range<u32> {
    let g = conf.ground_level();
    g..g + 2 * (n - g.min(n)) + 10
}

fn dilation_factor(conf: &Confinement, k: &KinematicSample) -> f64 {
    let u = conf.units();
    u.mass * k.velocity / (2.0 * u.hbar * k.length)
}

fn overlap(basis: &[f64], phase: f64, grid: &Grid, psi: &[Complex64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for ((&b, &x), z) in basis.iter().zip(grid.points()).zip(psi) {
        acc += Complex64::from_polar(b, -phase * x * x) * z;
    }
    acc * grid.spacing()
}

/// Populations of `psi` (physical samples on `grid`) in the instantaneous
/// driven basis at kinematics `k`.
pub fn populations(
    conf: &Confinement,
    psi: &[Complex64],
    grid: &Grid,
    k: &KinematicSample,
    levels: std::ops::Range<u32>,
) -> Result<Populations> {
    if psi.len() != grid.len() {
        return Err(domain(format!(
            "state has {} samples on a {}-point grid",
            psi.len(),
            grid.len()
        )));
    }
    let a = dilation_factor(conf, k);
    let mut probabilities = Vec::with_capacity(levels.len());
    let mut listed = Vec::with_capacity(levels.len());
    for m in levels {
        let phi = eigenfunction(conf, m, k.length, grid)?;
        probabilities.push(overlap(&phi, a, grid, psi).norm_sqr());
        listed.push(m);
    }
    let norm = grid.sum(psi.iter().map(|z| z.norm_sqr()));
    let remainder = norm - probabilities.iter().sum::<f64>();
    Ok(Populations {
        levels: listed,
        probabilities,
        remainder,
    })
}

/// One recorded instant of a propagation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceSample {
    pub t: f64,
    /// `|⟨ψ_FF|ψ⟩|²` for the reference level.
    pub fidelity: f64,
    /// Weight of the reference level in the instantaneous driven basis.
    pub population: f64,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationResult {
    /// Physical samples at the final time, on `grid_final`.
    pub psi_final: Vec<Complex64>,
    pub grid_final: Grid,
    pub reference_level: u32,
    pub fidelity: f64,
    pub populations: Populations,
    pub norm_drift: f64,
    pub norm_flagged: bool,
    pub steps: usize,
    pub trace: Vec<TraceSample>,
    pub warnings: Vec<String>,
}

struct Stepper<'a> {
    conf: &'a Confinement,
    cfg: &'a PropagatorConfig,
    xs: Vec<f64>,
    h: f64,
    lower: Vec<Complex64>,
    diag: Vec<Complex64>,
    upper: Vec<Complex64>,
    rhs: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl<'a> Stepper<'a> {
    fn new(conf: &'a Confinement, cfg: &'a PropagatorConfig) -> Self {
        let xs = cfg.grid.points().to_vec();
        let n = xs.len();
        let zero = Complex64::new(0.0, 0.0);
        Self {
            conf,
            cfg,
            h: cfg.grid.spacing(),
            xs,
            lower: vec![zero; n - 1],
            diag: vec![zero; n],
            upper: vec![zero; n - 1],
            rhs: vec![zero; n],
            scratch: vec![zero; n],
        }
    }

    /// Potential coefficient of `x²` at kinematics `k`.
    fn quadratic(&self, k: &KinematicSample) -> f64 {
        if self.cfg.driving {
            potential_coefficient(self.conf, k.length, k.acceleration)
        } else {
            potential_coefficient(self.conf, k.length, 0.0)
        }
    }

    /// Fills the Hamiltonian bands for kinematics `k`.
    fn hamiltonian(&mut self, k: &KinematicSample) {
        let u = *self.conf.units();
        let c = self.quadratic(k);
        let h = self.h;
        match self.cfg.frame {
            Frame::Fixed => {
                let kin = u.hbar * u.hbar / (2.0 * u.mass * h * h);
                let wall = self.conf.kind() == ModelKind::Hard;
                for (j, &x) in self.xs.iter().enumerate() {
                    let mut v = c * x * x;
                    if wall && x > k.length {
                        v += self.cfg.wall_height * ((x - k.length) / h).min(1.0);
                    }
                    self.diag[j] = Complex64::new(2.0 * kin + v, 0.0);
                }
                self.lower.fill(Complex64::new(-kin, 0.0));
                self.upper.fill(Complex64::new(-kin, 0.0));
            }
            Frame::Scaled => {
                let l = k.length;
                let kin = u.hbar * u.hbar / (2.0 * u.mass * l * l * h * h);
                for (j, &x) in self.xs.iter().enumerate() {
                    self.diag[j] = Complex64::new(2.0 * kin + c * (x * l).powi(2), 0.0);
                }
                let drift = u.hbar * k.velocity / l / (4.0 * h);
                for j in 0..self.xs.len() - 1 {
                    let s = drift * (self.xs[j] + self.xs[j + 1]);
                    self.upper[j] = Complex64::new(-kin, s);
                    self.lower[j] = Complex64::new(-kin, -s);
                }
            }
        }
    }

    /// Largest eigenvalue scale of the kinetic term.
    fn kinetic_max(&self, length: f64) -> f64 {
        let u = self.conf.units();
        let scale = match self.cfg.frame {
            Frame::Fixed => 1.0,
            Frame::Scaled => 1.0 / (length * length),
        };
        2.0 * u.hbar * u.hbar / (u.mass * self.h * self.h) * scale
    }

    fn step(&mut self, psi: &mut [Complex64], k_mid: &KinematicSample, dt: f64) -> Result<()> {
        self.hamiltonian(k_mid);
        let hbar = self.conf.units().hbar;
        let w = Complex64::new(0.0, 0.5 * dt / hbar);
        let n = psi.len();
        // rhs = (1 − iHdt/2ħ) ψ
        for j in 0..n {
            let mut hpsi = self.diag[j] * psi[j];
            if j > 0 {
                hpsi += self.lower[j - 1] * psi[j - 1];
            }
            if j + 1 < n {
                hpsi += self.upper[j] * psi[j + 1];
            }
            self.rhs[j] = psi[j] - w * hpsi;
        }
        let one = Complex64::new(1.0, 0.0);
        for d in self.diag.iter_mut() {
            *d = one + w * *d;
        }
        for b in self.lower.iter_mut().chain(self.upper.iter_mut()) {
            *b *= w;
        }
        match self.cfg.boundary {
            Boundary::Dirichlet => {
                let m = n - 1;
                solve_tridiagonal(
                    &self.lower[1..m - 1],
                    &self.diag[1..m],
                    &self.upper[1..m - 1],
                    &mut self.rhs[1..m],
                    &mut self.scratch[1..m],
                )?;
                self.rhs[0] = Complex64::new(0.0, 0.0);
                self.rhs[m] = Complex64::new(0.0, 0.0);
            }
            Boundary::None => {
                solve_tridiagonal(&self.lower, &self.diag, &self.upper, &mut self.rhs, &mut self.scratch)?;
            }
        }
        psi.copy_from_slice(&self.rhs);
        Ok(())
    }
}

fn physical_grid(cfg: &PropagatorConfig, length: f64) -> Grid {
    match cfg.frame {
        Frame::Fixed => cfg.grid.clone(),
        Frame::Scaled => cfg.grid.scaled(length),
    }
}

fn to_physical(cfg: &PropagatorConfig, psi: &[Complex64], length: f64) -> Vec<Complex64> {
    match cfg.frame {
        Frame::Fixed => psi.to_vec(),
        Frame::Scaled => {
            let s = 1.0 / length.sqrt();
            psi.iter().map(|z| z * s).collect()
        }
    }
}

fn fidelity(conf: &Confinement, sched: &dyn Schedule, n: u32, t: f64, grid: &Grid, psi: &[Complex64]) -> Result<f64> {
    let reference = ff_wavefunction(conf, sched, n, t, grid)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (a, b) in reference.psi.iter().zip(psi) {
        acc += a.conj() * b;
    }
    let overlap = acc * grid.spacing();
    let norm = grid.sum(psi.iter().map(|z| z.norm_sqr()));
    Ok(overlap.norm_sqr() / (norm * reference.norm_squared()))
}

/// Level with the largest weight in `psi` among the lowest few, probed
/// without the grid-coverage check.
fn dominant_level(conf: &Confinement, psi: &[Complex64], grid: &Grid, k: &KinematicSample) -> u32 {
    let a = dilation_factor(conf, k);
    let g = conf.ground_level();
    let mut best = (g, -1.0);
    for m in g..g + 24 {
        let phi: Vec<f64> = grid
            .points()
            .iter()
            .map(|&x| eigenfunction_value(conf, m, k.length, x))
            .collect();
        let p = overlap(&phi, a, grid, psi).norm_sqr();
        if p > best.1 {
            best = (m, p);
        }
    }
    best.0
}

/// Evolves `psi0` from `t0` to `t1` under `sched`.
///
/// `psi0` holds physical samples at `t0`: on `cfg.grid` in the fixed frame,
/// at `x = X·L(t0)` in the scaled frame.
pub fn propagate(
    conf: &Confinement,
    sched: &dyn Schedule,
    psi0: &[Complex64],
    t0: f64,
    t1: f64,
    cfg: &PropagatorConfig,
) -> Result<PropagationResult> {
    cfg.validate()?;
    if psi0.len() != cfg.grid.len() {
        return Err(domain(format!(
            "initial state has {} samples on a {}-point grid",
            psi0.len(),
            cfg.grid.len()
        )));
    }
    if !(t1 >= t0) {
        return Err(domain(format!("final time {t1} precedes initial time {t0}")));
    }
    let k0 = sched.sample(t0)?;
    let grid0 = physical_grid(cfg, k0.length);
    let reference_level = match cfg.reference_level {
        Some(n) => {
            conf.check_level(n)?;
            n
        }
        None => dominant_level(conf, psi0, &grid0, &k0),
    };

    let mut psi: Vec<Complex64> = match cfg.frame {
        Frame::Fixed => psi0.to_vec(),
        Frame::Scaled => psi0.iter().map(|z| z * k0.length.sqrt()).collect(),
    };
    let frame_norm = |p: &[Complex64]| cfg.grid.sum(p.iter().map(|z| z.norm_sqr()));
    let norm0 = frame_norm(&psi);
    if !(norm0 > 0.0) {
        return Err(domain("initial state has zero norm"));
    }

    let span = t1 - t0;
    let steps = if span == 0.0 {
        0
    } else {
        (span / cfg.dt).ceil() as usize
    };
    let dt = if steps == 0 { 0.0 } else { span / steps as f64 };

    let mut stepper = Stepper::new(conf, cfg);
    let mut warnings = Vec::new();
    let courant = cfg.dt * stepper.kinetic_max(k0.length) / conf.units().hbar;
    if courant > CFL_LIMIT {
        warnings.push(format!(
            "dt·E_max/ħ = {courant:.3} exceeds {CFL_LIMIT}; Crank-Nicolson stays stable but fast grid modes are phase-distorted"
        ));
    }

    let mut trace = Vec::new();
    let mut record = |t: f64, psi: &[Complex64], length: f64| -> Result<()> {
        let g = physical_grid(cfg, length);
        let phys = to_physical(cfg, psi, length);
        let k = sched.sample(t)?;
        let phi = eigenfunction(conf, reference_level, k.length, &g)?;
        trace.push(TraceSample {
            t,
            fidelity: fidelity(conf, sched, reference_level, t, &g, &phys)?,
            population: overlap(&phi, dilation_factor(conf, &k), &g, &phys).norm_sqr(),
            norm: g.sum(phys.iter().map(|z| z.norm_sqr())),
        });
        Ok(())
    };
    if cfg.record_every > 0 {
        record(t0, &psi, k0.length)?;
    }
    for i in 0..steps {
        let t_mid = t0 + (i as f64 + 0.5) * dt;
        let k_mid = sched.sample(t_mid)?;
        stepper.step(&mut psi, &k_mid, dt)?;
        if cfg.record_every > 0 && ((i + 1) % cfg.record_every == 0 || i + 1 == steps) {
            let t = t0 + (i + 1) as f64 * dt;
            record(t, &psi, sched.sample(t)?.length)?;
        }
    }

    let k1 = sched.sample(t1)?;
    let norm_drift = (frame_norm(&psi) - norm0).abs() / norm0;
    let allowed = NORM_DRIFT_TOLERANCE * (steps as f64 / 1e4).max(1.0);
    let norm_flagged = !(norm_drift <= allowed);
    if norm_flagged {
        warnings.push(format!("norm drift {norm_drift:e} exceeds {allowed:e}"));
    }
    let grid_final = physical_grid(cfg, k1.length);
    let psi_final = to_physical(cfg, &psi, k1.length);
    let fid = fidelity(conf, sched, reference_level, t1, &grid_final, &psi_final)?;
    let pops = populations(conf, &psi_final, &grid_final, &k1, default_basis(conf, reference_level))?;
    Ok(PropagationResult {
        psi_final,
        grid_final,
        reference_level,
        fidelity: fid,
        populations: pops,
        norm_drift,
        norm_flagged,
        steps,
        trace,
        warnings,
    })
}

/// Physical eigenstate `φ_n(x; L(t0))` as a complex initial state on the
/// propagator's grid.
pub fn initial_state(
    conf: &Confinement,
    sched: &dyn Schedule,
    n: u32,
    t0: f64,
    cfg: &PropagatorConfig,
) -> Result<Vec<Complex64>> {
    let k = sched.sample(t0)?;
    let grid = physical_grid(cfg, k.length);
    let wf = ff_wavefunction(conf, sched, n, t0, &grid)?;
    Ok(wf.psi)
}

//! Per-level force and energy of the driven eigenstates, and the same
//! quantities evaluated as grid expectation values.
//!
//! The force operator conjugate to `L` is
//!
//! ```text
//! F̂ = p̂²/(mL) − (L̇/2L²)(x̂p̂ + p̂x̂) + κ x̂²
//! ```
//!
//! with `κ = ½m(2ħ²/(m²L⁵) + L̈/L²)` in the trap and `κ = mL̈/(2L²)` in the box.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::fastforward::{potential_coefficient, FFWavefunction};
use crate::spectra::{check_length, Confinement, ModelKind};
use crate::trajectory::KinematicSample;

/// Relative gap between the plain and Richardson-extrapolated stencil
/// results above which an expectation value is flagged as under-resolved.
pub const RESOLUTION_TOLERANCE: f64 = 1e-5;

/// Closed-form force and energy of one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelObservables {
    pub n: u32,
    pub force: f64,
    pub energy_ff: f64,
}

/// `⟨x²⟩ / L²` of the box mode `n`.
pub(crate) fn box_spread(n: u32) -> f64 {
    1.0 / 6.0 - 1.0 / (4.0 * (PI * f64::from(n)).powi(2))
}

/// `⟨x²⟩ / L²` for level `n` (half of it in the box, matching the usual `c_n`).
fn spread(conf: &Confinement, n: u32) -> f64 {
    match conf.kind() {
        ModelKind::Soft => f64::from(n) + 0.5,
        ModelKind::Hard => box_spread(n),
    }
}

/// `F_n = ⟨ψ_FF|F̂|ψ_FF⟩`.
pub fn level_force(conf: &Confinement, n: u32, k: &KinematicSample) -> Result<f64> {
    conf.check_level(n)?;
    check_length(k.length)?;
    let m = conf.units().mass;
    let adiabatic = 2.0 * conf.energy_scale(n) / k.length.powi(3);
    let driven = match conf.kind() {
        ModelKind::Soft => 0.5 * spread(conf, n) * m * k.acceleration,
        ModelKind::Hard => spread(conf, n) * m * k.acceleration,
    };
    Ok(adiabatic + driven)
}

/// `E_n^FF = ⟨ψ_FF|H_FF|ψ_FF⟩`.
pub fn level_energy_ff(conf: &Confinement, n: u32, k: &KinematicSample) -> Result<f64> {
    conf.check_level(n)?;
    check_length(k.length)?;
    let m = conf.units().mass;
    let l = k.length;
    let adiabatic = conf.energy_scale(n) / (l * l);
    let motion = k.velocity * k.velocity - l * k.acceleration;
    let driven = match conf.kind() {
        ModelKind::Soft => 0.5 * spread(conf, n) * m * motion,
        ModelKind::Hard => spread(conf, n) * m * motion,
    };
    Ok(adiabatic + driven)
}

pub fn level_observables(conf: &Confinement, n: u32, k: &KinematicSample) -> Result<LevelObservables> {
    Ok(LevelObservables {
        n,
        force: level_force(conf, n, k)?,
        energy_ff: level_energy_ff(conf, n, k)?,
    })
}

/// `|F_n + ∂_L E_n^FF| / |F_n|` with the derivative taken by a central
/// difference of step `h` at fixed `L̇`, `L̈`.
pub fn force_variational_check(conf: &Confinement, n: u32, k: &KinematicSample, h: f64) -> Result<f64> {
    if !(h > 0.0 && h < k.length) {
        return Err(domain(format!("step {h} must lie in (0, L = {})", k.length)));
    }
    let at = |l: f64| KinematicSample { length: l, ..*k };
    let up = level_energy_ff(conf, n, &at(k.length + h))?;
    let down = level_energy_ff(conf, n, &at(k.length - h))?;
    let force = level_force(conf, n, k)?;
    Ok((force + (up - down) / (2.0 * h)).abs() / force.abs())
}

/// Coefficient `κ` of `x̂²` in the force operator.
pub fn force_coefficient(conf: &Confinement, length: f64, acceleration: f64) -> f64 {
    let u = conf.units();
    let driven = 0.5 * u.mass * acceleration / (length * length);
    match conf.kind() {
        ModelKind::Soft => u.hbar * u.hbar / (u.mass * length.powi(5)) + driven,
        ModelKind::Hard => driven,
    }
}

/// Grid expectation value with its resolution diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Expectation {
    /// Richardson-extrapolated value.
    pub value: f64,
    /// Value from the finest stencil alone.
    pub unextrapolated: f64,
    pub under_resolved: bool,
}

impl Expectation {
    /// Romberg table over stencils of spacing `h, 2h, 4h, …` (finest first);
    /// the leading error terms go as `h², h⁴, …`.
    fn from_levels(levels: &[f64]) -> Self {
        let fine = levels[0];
        let mut row = levels.to_vec();
        let mut previous = fine;
        let mut factor = 4.0;
        while row.len() > 1 {
            previous = row[0];
            row = row
                .windows(2)
                .map(|w| (factor * w[0] - w[1]) / (factor - 1.0))
                .collect();
            factor *= 4.0;
        }
        let value = row[0];
        // The last correction is the error estimate of the one before it.
        Self {
            value,
            unextrapolated: fine,
            under_resolved: !((previous - value).abs() <= RESOLUTION_TOLERANCE * value.abs()),
        }
    }
}

/// `⟨p²⟩`, `⟨xp + px⟩`, `⟨x²⟩` and the norm, by central differences and
/// the trapezoid rule. Values off the grid are zero.
#[derive(Debug, Clone, Copy)]
struct Moments {
    p2: f64,
    xp: f64,
    x2: f64,
    norm: f64,
}

fn moments(psi: &[Complex64], xs: &[f64], h: f64, hbar: f64) -> Moments {
    let zero = Complex64::new(0.0, 0.0);
    let at = |j: usize| psi.get(j).copied().unwrap_or(zero);
    let mut p2 = psi[0].norm_sqr();
    for (j, &v) in psi.iter().enumerate() {
        p2 += (at(j + 1) - v).norm_sqr();
    }
    let mut xp = 0.0;
    let mut x2 = 0.0;
    let mut norm = 0.0;
    for (j, (&z, &x)) in psi.iter().zip(xs).enumerate() {
        let left = if j == 0 { zero } else { psi[j - 1] };
        let d = (at(j + 1) - left) / (2.0 * h);
        xp += (z.conj() * d).im * 2.0 * x;
        let w = z.norm_sqr();
        x2 += w * x * x;
        norm += w;
    }
    Moments {
        p2: hbar * hbar * p2 / h,
        xp: hbar * xp * h,
        x2: x2 * h,
        norm: norm * h,
    }
}

fn stencil_pair<F>(conf: &Confinement, wf: &FFWavefunction, f: F) -> Result<Expectation>
where
    F: Fn(&Moments) -> f64,
{
    if wf.psi.len() != wf.grid.len() {
        return Err(domain(format!(
            "state has {} samples on a {}-point grid",
            wf.psi.len(),
            wf.grid.len()
        )));
    }
    if wf.psi.len() < 5 {
        return Err(domain("expectation values need at least 5 grid points"));
    }
    let hbar = conf.units().hbar;
    let xs = wf.grid.points();
    let dx = wf.grid.spacing();
    let fine = moments(&wf.psi, xs, dx, hbar);
    if !(fine.norm > 0.0) {
        return Err(domain("state has zero norm"));
    }
    // Subgrids keep every 2nd (and 4th) point; with `len ≡ 1 (mod 4)` all
    // of them share both grid ends.
    let subgrid = |stride: usize| {
        let psi: Vec<Complex64> = wf.psi.iter().step_by(stride).copied().collect();
        let xs: Vec<f64> = xs.iter().step_by(stride).copied().collect();
        let mo = moments(&psi, &xs, stride as f64 * dx, hbar);
        f(&mo) / mo.norm
    };
    let mut levels = vec![f(&fine) / fine.norm, subgrid(2)];
    if (wf.psi.len() - 1).is_multiple_of(4) && wf.psi.len() >= 17 {
        levels.push(subgrid(4));
    }
    Ok(Expectation::from_levels(&levels))
}

/// `⟨ψ|F̂|ψ⟩ / ⟨ψ|ψ⟩` on the state's grid, Richardson-extrapolated from
/// the grid and its strided subgrids. Use `4k + 1` points when the state
/// does not vanish smoothly before the grid ends.
pub fn expectation_force(conf: &Confinement, wf: &FFWavefunction, k: &KinematicSample) -> Result<Expectation> {
    check_length(k.length)?;
    let m = conf.units().mass;
    let l = k.length;
    let kappa = force_coefficient(conf, l, k.acceleration);
    stencil_pair(conf, wf, |mo| {
        mo.p2 / (m * l) - k.velocity / (2.0 * l * l) * mo.xp + kappa * mo.x2
    })
}

/// `⟨ψ|p̂²/2m + V₀ + V_FF|ψ⟩ / ⟨ψ|ψ⟩` on the state's grid (interior
/// potential for the box).
pub fn expectation_energy(conf: &Confinement, wf: &FFWavefunction, k: &KinematicSample) -> Result<Expectation> {
    check_length(k.length)?;
    let m = conf.units().mass;
    let c = potential_coefficient(conf, k.length, k.acceleration);
    stencil_pair(conf, wf, |mo| mo.p2 / (2.0 * m) + c * mo.x2)
}

/// Force evaluated in the co-moving frame `X = x/L`, after stripping the
/// dilation phase: `F_Γ = P²/(mL³) + (L̇/2L²)(XP + PX) + κ L² X²`.
#[cfg(test)]
pub(crate) fn scaled_frame_force(conf: &Confinement, wf: &FFWavefunction, k: &KinematicSample) -> Result<Expectation> {
    check_length(k.length)?;
    let u = conf.units();
    let l = k.length;
    let a = u.mass * k.velocity / (2.0 * u.hbar * l);
    let grid = wf.grid.scaled(1.0 / l);
    let psi = wf
        .psi
        .iter()
        .zip(wf.grid.points())
        .map(|(z, &x)| z * Complex64::from_polar(l.sqrt(), -a * x * x))
        .collect();
    let scaled = FFWavefunction {
        grid,
        psi,
        n: wf.n,
        t: wf.t,
    };
    let kappa = force_coefficient(conf, l, k.acceleration);
    stencil_pair(conf, &scaled, |mo| {
        mo.p2 / (u.mass * l.powi(3)) + k.velocity / (2.0 * l * l) * mo.xp + kappa * l * l * mo.x2
    })
}

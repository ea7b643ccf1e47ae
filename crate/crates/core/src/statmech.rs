//! Frozen Fermi-Dirac ensemble and the nonequilibrium equations of state.
//!
//! The occupations `f_n` are fixed at `t = 0`. Because every level energy
//! scales as `1/L²`, they remain a Fermi-Dirac distribution at the effective
//! temperature `T(t) = T0 L0²/L²` with chemical potential `μ(t) = μ0 L0²/L²`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::observables::{box_spread, level_energy_ff, level_force};
use crate::spectra::{check_length, Confinement, ModelKind};
use crate::trajectory::{KinematicSample, Schedule};

/// Spin degeneracy of every orbital level.
pub const SPIN_DEGENERACY: f64 = 2.0;

/// Occupation below which a level is dropped from the sums.
pub const OCCUPATION_CUTOFF: f64 = 1e-15;

/// Relative bisection tolerance on `μ`.
pub const MU_TOLERANCE: f64 = 1e-12;

pub const MU_MAX_ITERATIONS: usize = 200;

/// A truncated sum is flagged when its tail bound exceeds this fraction of
/// the result.
pub const TAIL_TOLERANCE: f64 = 1e-12;

/// `1/(e^x + 1)` without overflow.
#[inline]
pub fn fermi(x: f64) -> f64 {
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

fn check_particles(n: u32) -> Result<()> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(domain(format!("particle number must be even and at least 2, got {n}")));
    }
    Ok(())
}

fn check_temperature(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(domain(format!("temperature must be non-negative, got {t}")));
    }
    Ok(())
}

/// `ln(1/ε − 1)`: levels with `(E − μ)/kT` beyond this carry less than `ε`.
fn cutoff_exponent() -> f64 {
    (1.0 / OCCUPATION_CUTOFF - 1.0).ln()
}

/// Largest level index an exact sum may reach.
pub const MAX_LEVEL: u32 = 50_000_000;

/// Highest level kept for `(μ, kT)`, never fewer than `2N` levels.
fn last_level(conf: &Confinement, particles: u32, mu: f64, kt: f64, l: f64) -> u32 {
    let ground = conf.ground_level();
    let mut n = ground + 2 * particles - 1;
    let cut = mu + kt * cutoff_exponent();
    while n < MAX_LEVEL && conf.energy_scale(n) / (l * l) <= cut {
        n += 1;
    }
    n
}

/// `2 Σ f_n(μ) − N`.
fn excess(conf: &Confinement, particles: u32, mu: f64, kt: f64, l: f64) -> f64 {
    let top = last_level(conf, particles, mu, kt, l);
    let l2 = l * l;
    // Holes below μ and particles above it, so a deep sea keeps its digits.
    let mut below = 0.0;
    let mut holes = 0.0;
    let mut above = 0.0;
    let (mut gap_below, mut gap_above) = (f64::INFINITY, f64::INFINITY);
    for n in conf.ground_level()..=top {
        let x = (conf.energy_scale(n) / l2 - mu) / kt;
        if x < 0.0 {
            below += 1.0;
            holes += fermi(-x);
            gap_below = gap_below.min(-x);
        } else {
            above += fermi(x);
            gap_above = gap_above.min(x);
        }
    }
    let value = SPIN_DEGENERACY * (below - f64::from(particles) / SPIN_DEGENERACY + above - holes);
    if value == 0.0 && above == 0.0 && holes == 0.0 {
        // Both tails underflow deep inside a gap; the nearer level dominates.
        return f64::MIN_POSITIVE * (gap_below - gap_above).signum();
    }
    value
}

/// Index of the highest level filled at zero temperature.
fn top_filled(conf: &Confinement, particles: u32) -> u32 {
    conf.ground_level() + particles / 2 - 1
}

/// Chemical potential solving `2 Σ f_n = N` on the discrete spectrum at
/// size `l0`. At `T0 = 0` the midpoint between the highest filled and the
/// lowest empty level is returned.
pub fn solve_mu_exact(conf: &Confinement, particles: u32, t0: f64, l0: f64) -> Result<f64> {
    check_particles(particles)?;
    check_temperature(t0)?;
    check_length(l0)?;
    let l2 = l0 * l0;
    let top = top_filled(conf, particles);
    if t0 == 0.0 {
        return Ok(0.5 * (conf.energy_scale(top) + conf.energy_scale(top + 1)) / l2);
    }
    let kt = conf.units().kb * t0;
    // μ never exceeds the first empty level, which bounds the cutoff.
    let reach = conf.energy_scale(top + 1) / l2 + kt * cutoff_exponent();
    if !(conf.energy_scale(MAX_LEVEL) / l2 > reach) {
        return Err(Error::Numeric {
            context: "chemical potential",
            detail: format!("T0 = {t0:e} needs more than {MAX_LEVEL} levels for an exact sum"),
            residual: f64::NAN,
        });
    }
    let f = |mu: f64| excess(conf, particles, mu, kt, l0);

    let e_ground = conf.energy_scale(conf.ground_level()) / l2;
    let mut width = 10.0 * kt;
    let mut lo = e_ground - width;
    while f(lo) > 0.0 {
        lo -= width;
        width *= 2.0;
    }
    let mut width = 10.0 * kt;
    let mut hi = conf.energy_scale(top + 1) / l2 + width;
    while f(hi) < 0.0 {
        hi += width;
        width *= 2.0;
    }
    for _ in 0..MU_MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        // Relative to |μ|, or to kT when μ sits near zero.
        if hi - lo <= MU_TOLERANCE * mid.abs().max(kt) {
            return Ok(mid);
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mid = 0.5 * (lo + hi);
    Err(Error::Numeric {
        context: "chemical potential bisection",
        detail: format!("bracket [{lo}, {hi}] after {MU_MAX_ITERATIONS} iterations"),
        residual: f(mid),
    })
}

/// Truncated low-temperature expansion of `μ` at size `l`.
pub fn mu_low_t(conf: &Confinement, particles: u32, t0: f64, l: f64) -> Result<f64> {
    check_particles(particles)?;
    check_temperature(t0)?;
    check_length(l)?;
    let u = conf.units();
    let n = f64::from(particles);
    Ok(match conf.kind() {
        ModelKind::Soft => 0.5 * n * u.hbar2_over_m() / (l * l),
        ModelKind::Hard => {
            let density = n / l;
            let thermal = u.kb * t0 / u.hbar2_over_m();
            PI * PI * u.hbar2_over_m() / 8.0
                * density
                * density
                * (1.0 + 16.0 / (3.0 * PI * PI) * thermal * thermal * density.powi(-4))
        }
    })
}

/// Two-term high-temperature fugacity `e^{βμ}` at size `l`.
pub fn fugacity_high_t(conf: &Confinement, particles: u32, t0: f64, l: f64) -> Result<f64> {
    check_particles(particles)?;
    check_length(l)?;
    if !(t0.is_finite() && t0 > 0.0) {
        return Err(domain(format!("fugacity needs a positive temperature, got {t0}")));
    }
    let u = conf.units();
    let n = f64::from(particles);
    let kt = u.kb * t0;
    Ok(match conf.kind() {
        ModelKind::Soft => {
            let a = u.hbar2_over_m() * n / (2.0 * l * l * kt);
            a * (1.0 + 0.5 * a)
        }
        ModelKind::Hard => {
            let lambda = (PI * u.hbar2_over_m() / kt).sqrt();
            n / l * (lambda / 2f64.sqrt()) * (1.0 + n / (2.0 * l) * lambda)
        }
    })
}

/// `kT_F`: the Fermi energy of the continuum approximation at size `l`.
pub fn fermi_energy(conf: &Confinement, particles: u32, l: f64) -> f64 {
    let n = f64::from(particles);
    let h2m = conf.units().hbar2_over_m();
    match conf.kind() {
        ModelKind::Soft => 0.5 * n * h2m / (l * l),
        ModelKind::Hard => PI * PI * h2m * n * n / (8.0 * l * l),
    }
}

/// `T0 L0² / L(t)²`.
pub fn effective_temperature(sched: &dyn Schedule, t0: f64, t: f64) -> Result<f64> {
    check_temperature(t0)?;
    let l = sched.sample(t)?.length;
    let l0 = sched.initial_length();
    Ok(t0 * (l0 / l).powi(2))
}

/// Fermi-Dirac occupations frozen at `t = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ensemble {
    pub particles: u32,
    pub t0: f64,
    pub mu: f64,
    pub l0: f64,
    /// Occupation of each level from the ground level up to `n_max`.
    pub occupations: Vec<f64>,
    pub ground: u32,
    pub n_max: u32,
}

impl Ensemble {
    pub fn new(conf: &Confinement, particles: u32, t0: f64, l0: f64) -> Result<Self> {
        let mu = solve_mu_exact(conf, particles, t0, l0)?;
        let ground = conf.ground_level();
        let (occupations, n_max) = if t0 == 0.0 {
            let top = top_filled(conf, particles);
            (vec![1.0; (top - ground + 1) as usize], top)
        } else {
            let kt = conf.units().kb * t0;
            let top = last_level(conf, particles, mu, kt, l0);
            let l2 = l0 * l0;
            let occ = (ground..=top)
                .map(|n| fermi((conf.energy_scale(n) / l2 - mu) / kt))
                .collect();
            (occ, top)
        };
        Ok(Self {
            particles,
            t0,
            mu,
            l0,
            occupations,
            ground,
            n_max,
        })
    }

    /// `(n, f_n)` for every retained level.
    pub fn levels(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        (self.ground..).zip(self.occupations.iter().copied())
    }

    pub fn occupation(&self, n: u32) -> f64 {
        n.checked_sub(self.ground)
            .and_then(|i| self.occupations.get(i as usize).copied())
            .unwrap_or(0.0)
    }

    /// `2 Σ f_n`.
    pub fn particle_count(&self) -> f64 {
        SPIN_DEGENERACY * self.occupations.iter().sum::<f64>()
    }

    /// `μ(t) = μ0 L0²/L²`.
    pub fn mu_at(&self, length: f64) -> f64 {
        self.mu * (self.l0 / length).powi(2)
    }

    pub fn temperature_at(&self, length: f64) -> f64 {
        self.t0 * (self.l0 / length).powi(2)
    }

    /// Occupations rebuilt from `(E_n(L), T(t), μ(t))`; identical to the
    /// frozen ones up to rounding.
    pub fn occupations_at(&self, conf: &Confinement, length: f64) -> Result<Vec<f64>> {
        check_length(length)?;
        if self.t0 == 0.0 {
            return Ok(self.occupations.clone());
        }
        let kt = conf.units().kb * self.temperature_at(length);
        let mu = self.mu_at(length);
        let l2 = length * length;
        Ok((self.ground..=self.n_max)
            .map(|n| fermi((conf.energy_scale(n) / l2 - mu) / kt))
            .collect())
    }
}

/// Ensemble sum with a bound on the dropped tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnsembleMean {
    pub value: f64,
    pub tail_bound: f64,
    pub truncation_warning: bool,
}

fn ensemble_sum<F>(conf: &Confinement, ens: &Ensemble, k: &KinematicSample, level: F) -> Result<EnsembleMean>
where
    F: Fn(u32) -> Result<f64>,
{
    check_length(k.length)?;
    let mut value = 0.0;
    for (n, f) in ens.levels() {
        value += f * level(n)?;
    }
    value *= SPIN_DEGENERACY;
    let tail_bound = if ens.t0 == 0.0 {
        0.0
    } else {
        // Geometric bound from the first two dropped terms.
        let kt = conf.units().kb * ens.t0;
        let l2 = ens.l0 * ens.l0;
        let term = |n: u32| -> Result<f64> {
            let f = fermi((conf.energy_scale(n) / l2 - ens.mu) / kt);
            Ok(SPIN_DEGENERACY * f * level(n)?.abs())
        };
        let first = term(ens.n_max + 1)?;
        let ratio = term(ens.n_max + 2)? / first;
        if first == 0.0 {
            0.0
        } else if ratio < 1.0 {
            first / (1.0 - ratio)
        } else {
            f64::INFINITY
        }
    };
    Ok(EnsembleMean {
        value,
        tail_bound,
        truncation_warning: !(tail_bound <= TAIL_TOLERANCE * value.abs()),
    })
}

/// `F̄ = 2 Σ f_n F_n`.
pub fn mean_force(conf: &Confinement, ens: &Ensemble, k: &KinematicSample) -> Result<EnsembleMean> {
    ensemble_sum(conf, ens, k, |n| level_force(conf, n, k))
}

/// `Ū = 2 Σ f_n E_n^FF`.
pub fn mean_energy(conf: &Confinement, ens: &Ensemble, k: &KinematicSample) -> Result<EnsembleMean> {
    ensemble_sum(conf, ens, k, |n| level_energy_ff(conf, n, k))
}

/// `2 Σ f_n ⟨x²⟩_n / L²`, the weight of the nonadiabatic terms.
pub fn spread_sum(conf: &Confinement, ens: &Ensemble) -> f64 {
    SPIN_DEGENERACY
        * ens
            .levels()
            .map(|(n, f)| {
                f * match conf.kind() {
                    ModelKind::Soft => f64::from(n) + 0.5,
                    ModelKind::Hard => box_spread(n),
                }
            })
            .sum::<f64>()
}

/// Which row of the equation-of-state table to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "lowT")]
    LowT,
    #[serde(rename = "highT")]
    HighT,
    #[serde(rename = "auto")]
    Auto,
}

impl Regime {
    /// `Auto` becomes `LowT` below the Fermi temperature and `HighT` above.
    pub fn resolve(self, conf: &Confinement, particles: u32, t0: f64, l0: f64) -> Regime {
        match self {
            Regime::Auto => natural_regime(conf, particles, t0, l0),
            other => other,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::LowT => "lowT",
            Regime::HighT => "highT",
            Regime::Auto => "auto",
        }
    }
}

fn natural_regime(conf: &Confinement, particles: u32, t: f64, l: f64) -> Regime {
    if conf.units().kb * t < fermi_energy(conf, particles, l) {
        Regime::LowT
    } else {
        Regime::HighT
    }
}

/// Left and right sides of the Poisson and Bernoulli relations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableSides {
    pub poisson_lhs: f64,
    pub poisson_rhs: f64,
    pub bernoulli_lhs: f64,
    pub bernoulli_rhs: f64,
}

/// Closed-form sides for one time sample. `kt` is `k_B T(t)`; `force` and
/// `energy` are the ensemble means at the same instant.
pub fn table_sides(
    conf: &Confinement,
    regime: Regime,
    particles: u32,
    kt: f64,
    k: &KinematicSample,
    force: f64,
    energy: f64,
) -> Result<TableSides> {
    let regime = match regime {
        Regime::Auto => {
            if kt < fermi_energy(conf, particles, k.length) {
                Regime::LowT
            } else {
                Regime::HighT
            }
        }
        r => r,
    };
    let u = conf.units();
    let (m, h2m) = (u.mass, u.hbar2_over_m());
    let n = f64::from(particles);
    let (l, v, a) = (k.length, k.velocity, k.acceleration);
    let l3 = l.powi(3);
    let bernoulli_lhs = force * l - 2.0 * energy;
    let thermal_needed = regime == Regime::HighT;
    if thermal_needed && !(kt > 0.0) {
        return Err(domain("the high-temperature relations need T > 0"));
    }
    let (poisson_lhs, poisson_rhs, bernoulli_rhs) = match (conf.kind(), regime) {
        (ModelKind::Soft, Regime::LowT) => {
            let s = kt * l * l / h2m;
            let bracket = 1.0 + 4.0 * PI * PI / 3.0 * s * s / (n * n);
            (
                force * l3 - 0.5 * h2m * n * n * bracket,
                m / 8.0 * n * n * l3 * a * bracket,
                n * n * (3.0 * m * l * a / 8.0 - m * v * v / 4.0) * bracket,
            )
        }
        (ModelKind::Soft, _) => {
            let bracket = 1.0 + n * h2m / (8.0 * l * l * kt);
            let scale = n * kt * bracket / (h2m * h2m);
            (
                force * l3 - 2.0 * l * l * n * kt * bracket,
                0.5 * l.powi(5) * a * scale,
                (1.5 * l3 * a - l * l * v * v) * scale,
            )
        }
        (ModelKind::Hard, Regime::LowT) => {
            let s = kt / h2m;
            let y = s * s * (n / l).powi(-4);
            let nad = 1.0 + 6.0 / (PI * PI * n * n) * (1.0 + 16.0 / (3.0 * PI * PI) * y);
            (
                force * l3 - PI * PI * h2m / 12.0 * n.powi(3) * (1.0 + 16.0 / (PI * PI) * y),
                n / 6.0 * m * l3 * a * nad,
                n * (m * l * a / 2.0 - m * v * v / 3.0) * nad,
            )
        }
        (ModelKind::Hard, _) => {
            let ad = 1.0 + n / (4.0 * l) * (PI * h2m / kt).sqrt();
            let nad = 1.0 + 3.0 * PI * h2m / (2.0 * l * l * kt);
            (
                force * l3 - l * l * n * kt * ad,
                n / 6.0 * m * l3 * a * nad,
                n * (m * l * a / 2.0 - m * v * v / 3.0) * nad,
            )
        }
    };
    Ok(TableSides {
        poisson_lhs,
        poisson_rhs,
        bernoulli_lhs,
        bernoulli_rhs,
    })
}

/// One time sample of the equation-of-state sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EosRecord {
    pub t: f64,
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "Ldot")]
    pub velocity: f64,
    #[serde(rename = "Lddot")]
    pub acceleration: f64,
    #[serde(rename = "T_eff")]
    pub t_eff: f64,
    #[serde(rename = "F_bar")]
    pub f_bar: f64,
    #[serde(rename = "U_bar")]
    pub u_bar: f64,
    pub poisson_lhs: f64,
    pub poisson_rhs: f64,
    pub bernoulli_lhs: f64,
    pub bernoulli_rhs: f64,
    pub residual_poisson: f64,
    pub residual_bernoulli: f64,
}

impl EosRecord {
    pub const COLUMNS: [&'static str; 13] = [
        "t",
        "L",
        "Ldot",
        "Lddot",
        "T_eff",
        "F_bar",
        "U_bar",
        "poisson_lhs",
        "poisson_rhs",
        "bernoulli_lhs",
        "bernoulli_rhs",
        "residual_poisson",
        "residual_bernoulli",
    ];

    pub fn values(&self) -> [f64; 13] {
        [
            self.t,
            self.length,
            self.velocity,
            self.acceleration,
            self.t_eff,
            self.f_bar,
            self.u_bar,
            self.poisson_lhs,
            self.poisson_rhs,
            self.bernoulli_lhs,
            self.bernoulli_rhs,
            self.residual_poisson,
            self.residual_bernoulli,
        ]
    }

    /// Poisson residual relative to `|F̄ L³|`.
    pub fn relative_poisson(&self) -> f64 {
        self.residual_poisson / (self.f_bar * self.length.powi(3)).abs()
    }

    /// Bernoulli residual relative to `|F̄ L| + 2|Ū|`.
    pub fn relative_bernoulli(&self) -> f64 {
        self.residual_bernoulli / ((self.f_bar * self.length).abs() + 2.0 * self.u_bar.abs())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EosReport {
    pub regime: Regime,
    pub records: Vec<EosRecord>,
    pub warnings: Vec<String>,
}

/// Exact ensemble means and the closed-form table sides at each time.
pub fn eos_report(
    conf: &Confinement,
    ens: &Ensemble,
    sched: &dyn Schedule,
    times: &[f64],
    regime: Regime,
) -> Result<EosReport> {
    let l0 = sched.initial_length();
    if ((l0 - ens.l0) / ens.l0).abs() > 1e-12 {
        return Err(domain(format!(
            "ensemble prepared at L0 = {} but the schedule starts at {l0}",
            ens.l0
        )));
    }
    let resolved = regime.resolve(conf, ens.particles, ens.t0, ens.l0);
    let kb = conf.units().kb;
    let mut warnings = Vec::new();
    let mut records = Vec::with_capacity(times.len());
    let mut mismatch_reported = false;
    let mut tail_reported = false;
    for &t in times {
        let k = sched.sample(t)?;
        let t_eff = ens.temperature_at(k.length);
        let force = mean_force(conf, ens, &k)?;
        let energy = mean_energy(conf, ens, &k)?;
        if (force.truncation_warning || energy.truncation_warning) && !tail_reported {
            warnings.push(format!(
                "level cutoff n_max = {} leaves a tail above {TAIL_TOLERANCE:e} of the sum at t = {t}",
                ens.n_max
            ));
            tail_reported = true;
        }
        let here = natural_regime(conf, ens.particles, t_eff, k.length);
        if regime != Regime::Auto && here != resolved && !mismatch_reported {
            warnings.push(format!(
                "{} relations requested but T_eff = {t_eff} is on the {} side of T_F = {} at t = {t}",
                resolved.name(),
                here.name(),
                fermi_energy(conf, ens.particles, k.length) / kb
            ));
            mismatch_reported = true;
        }
        let s = table_sides(conf, resolved, ens.particles, kb * t_eff, &k, force.value, energy.value)?;
        records.push(EosRecord {
            t: k.t,
            length: k.length,
            velocity: k.velocity,
            acceleration: k.acceleration,
            t_eff,
            f_bar: force.value,
            u_bar: energy.value,
            poisson_lhs: s.poisson_lhs,
            poisson_rhs: s.poisson_rhs,
            bernoulli_lhs: s.bernoulli_lhs,
            bernoulli_rhs: s.bernoulli_rhs,
            residual_poisson: s.poisson_lhs - s.poisson_rhs,
            residual_bernoulli: s.bernoulli_lhs - s.bernoulli_rhs,
        });
    }
    Ok(EosReport {
        regime: resolved,
        records,
        warnings,
    })
}

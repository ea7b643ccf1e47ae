//! Instantaneous eigenproblem of the two confinements.
//!
//! Soft wall: harmonic trap whose oscillator length `L = sqrt(ħ/mω)` plays
//! the role of the size, `E_n = (n + ½) ħω(L)`, `n = 0, 1, ...`.
//! Hard wall: box `[0, L]`, `E_n = (ħ²/2m)(πn/L)²`, `n = 1, 2, ...`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Physical constants. Natural units (`ħ = m = k_B = 1`) by default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Units {
    pub hbar: f64,
    pub mass: f64,
    #[serde(rename = "kB")]
    pub kb: f64,
}

impl Default for Units {
    fn default() -> Self {
        Self::NATURAL
    }
}

impl Units {
    pub const NATURAL: Units = Units {
        hbar: 1.0,
        mass: 1.0,
        kb: 1.0,
    };

    pub fn new(hbar: f64, mass: f64, kb: f64) -> Result<Self> {
        for (name, v) in [("hbar", hbar), ("mass", mass), ("kB", kb)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(domain(format!("unit constant {name} must be positive, got {v}")));
            }
        }
        Ok(Self { hbar, mass, kb })
    }

    /// `ħ²/m`, the scale shared by every energy and force formula.
    #[inline]
    pub fn hbar2_over_m(&self) -> f64 {
        self.hbar * self.hbar / self.mass
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Soft,
    Hard,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Soft => "soft-wall",
            ModelKind::Hard => "hard-wall",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Model {
    SoftHarmonic { omega0: f64, l0: f64 },
    HardWall,
}

/// Confinement model plus unit constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Confinement {
    model: Model,
    units: Units,
}

const CONSISTENCY_TOL: f64 = 1e-12;

impl Confinement {
    pub fn soft_from_omega(omega0: f64, units: Units) -> Result<Self> {
        if !(omega0.is_finite() && omega0 > 0.0) {
            return Err(domain(format!("trap frequency must be positive, got {omega0}")));
        }
        let l0 = (units.hbar / (units.mass * omega0)).sqrt();
        Ok(Self {
            model: Model::SoftHarmonic { omega0, l0 },
            units,
        })
    }

    pub fn soft_from_length(l0: f64, units: Units) -> Result<Self> {
        if !(l0.is_finite() && l0 > 0.0) {
            return Err(domain(format!("oscillator length must be positive, got {l0}")));
        }
        let omega0 = units.hbar / (units.mass * l0 * l0);
        Ok(Self {
            model: Model::SoftHarmonic { omega0, l0 },
            units,
        })
    }

    /// Soft trap given both `ω₀` and `L0`; they must satisfy `L0 = sqrt(ħ/mω₀)`.
    pub fn soft(omega0: f64, l0: f64, units: Units) -> Result<Self> {
        let conf = Self::soft_from_omega(omega0, units)?;
        let derived = conf.initial_length().unwrap_or(f64::NAN);
        if ((derived - l0) / l0).abs() > CONSISTENCY_TOL {
            return Err(domain(format!(
                "ω₀ = {omega0} implies L0 = {derived}, inconsistent with L0 = {l0}"
            )));
        }
        Ok(conf)
    }

    pub fn hard_wall(units: Units) -> Self {
        Self {
            model: Model::HardWall,
            units,
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self.model {
            Model::SoftHarmonic { .. } => ModelKind::Soft,
            Model::HardWall => ModelKind::Hard,
        }
    }

    pub fn units(&self) -> &Units {
        &self.units
    }

    /// `ω₀` of the soft trap.
    pub fn omega0(&self) -> Option<f64> {
        match self.model {
            Model::SoftHarmonic { omega0, .. } => Some(omega0),
            Model::HardWall => None,
        }
    }

    /// Oscillator length tied to `ω₀` (soft trap only).
    pub fn initial_length(&self) -> Option<f64> {
        match self.model {
            Model::SoftHarmonic { l0, .. } => Some(l0),
            Model::HardWall => None,
        }
    }

    /// Lowest quantum number: 0 for the trap, 1 for the box.
    pub fn ground_level(&self) -> u32 {
        match self.model {
            Model::SoftHarmonic { .. } => 0,
            Model::HardWall => 1,
        }
    }

    pub fn check_level(&self, n: u32) -> Result<()> {
        if n < self.ground_level() {
            return Err(domain(format!(
                "quantum number {n} is invalid for the {} model",
                self.kind().name()
            )));
        }
        Ok(())
    }

    /// `E_n · L²`, which is independent of `L` for both models.
    #[inline]
    pub(crate) fn energy_scale(&self, n: u32) -> f64 {
        let h2m = self.units.hbar2_over_m();
        let n = f64::from(n);
        match self.model {
            Model::SoftHarmonic { .. } => (n + 0.5) * h2m,
            Model::HardWall => 0.5 * h2m * (PI * n).powi(2),
        }
    }
}

pub(crate) fn check_length(l: f64) -> Result<()> {
    if !(l.is_finite() && l > 0.0) {
        return Err(domain(format!("size must be positive and finite, got {l}")));
    }
    Ok(())
}

/// `ω(L) = ω₀ (L0/L)²` of the soft trap.
pub fn omega_of_length(conf: &Confinement, l: f64) -> Result<f64> {
    match conf.model {
        Model::SoftHarmonic { omega0, l0 } => {
            check_length(l)?;
            Ok(omega0 * (l0 / l).powi(2))
        }
        Model::HardWall => Err(Error::UnsupportedModel {
            operation: "omega_of_length",
            model: ModelKind::Hard.name(),
        }),
    }
}

/// Adiabatic eigenvalue `E_n(L)`.
pub fn energy(conf: &Confinement, n: u32, l: f64) -> Result<f64> {
    conf.check_level(n)?;
    check_length(l)?;
    Ok(conf.energy_scale(n) / (l * l))
}

/// Per-spin density of states at energy `e` for size `l`.
pub fn density_of_states(conf: &Confinement, e: f64, l: f64) -> Result<f64> {
    check_length(l)?;
    let u = conf.units;
    match conf.model {
        Model::SoftHarmonic { .. } => Ok(l * l / (u.hbar * u.hbar / u.mass)),
        Model::HardWall => {
            if !(e > 0.0) {
                return Err(domain(format!("hard-wall density of states needs E > 0, got {e}")));
            }
            Ok((u.mass / 2.0).sqrt() * l / (u.hbar * PI) / e.sqrt())
        }
    }
}

/// Uniform spatial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
    spacing: f64,
}

impl Grid {
    pub fn uniform(start: f64, end: f64, n_points: usize) -> Result<Self> {
        if n_points < 3 {
            return Err(domain(format!("grid needs at least 3 points, got {n_points}")));
        }
        if !(start.is_finite() && end.is_finite() && end > start) {
            return Err(domain(format!("invalid grid interval [{start}, {end}]")));
        }
        let spacing = (end - start) / (n_points - 1) as f64;
        let mut points: Vec<f64> = (0..n_points).map(|i| start + spacing * i as f64).collect();
        points[n_points - 1] = end;
        Ok(Self { points, spacing })
    }

    /// `[0, L]` with both walls included.
    pub fn box_interval(l: f64, n_points: usize) -> Result<Self> {
        check_length(l)?;
        Self::uniform(0.0, l, n_points)
    }

    /// `[-x_max, x_max]`.
    pub fn symmetric(x_max: f64, n_points: usize) -> Result<Self> {
        Self::uniform(-x_max, x_max, n_points)
    }

    /// Default soft-trap grid: half-width `L · (1.5 sqrt(2 n_max + 1) + 5)`.
    pub fn for_soft(l: f64, n_max: u32, n_points: usize) -> Result<Self> {
        Self::for_soft_with_factor(l, n_max, DEFAULT_WIDTH_FACTOR, n_points)
    }

    /// Soft-trap grid with half-width `L · (factor · sqrt(2 n_max + 1) + 5)`.
    /// The fixed margin keeps the Gaussian tail of the low levels, which
    /// reaches well past their turning points, below `1e-12`.
    pub fn for_soft_with_factor(l: f64, n_max: u32, factor: f64, n_points: usize) -> Result<Self> {
        check_length(l)?;
        if !(factor.is_finite() && factor >= 1.0) {
            return Err(domain(format!("grid width factor must be at least 1, got {factor}")));
        }
        let tp = turning_point(n_max, l);
        Self::symmetric(factor * tp + TAIL_MARGIN * l, n_points)
    }

    /// Grid suited to `conf` at size `l` holding levels up to `n_max`.
    pub fn for_model(conf: &Confinement, l: f64, n_max: u32, n_points: usize) -> Result<Self> {
        match conf.kind() {
            ModelKind::Soft => Self::for_soft(l, n_max, n_points),
            ModelKind::Hard => Self::box_interval(l, n_points),
        }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.points[0]
    }

    pub fn end(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// `Σ f_j Δx`.
    pub fn sum(&self, values: impl IntoIterator<Item = f64>) -> f64 {
        values.into_iter().sum::<f64>() * self.spacing
    }

    /// Same grid with every coordinate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            points: self.points.iter().map(|x| x * factor).collect(),
            spacing: self.spacing * factor,
        }
    }
}

/// Multiple of the outermost turning point used for soft-trap grids.
pub const DEFAULT_WIDTH_FACTOR: f64 = 1.5;

// Extra half-width, in units of L, beyond `factor × turning point`.
const TAIL_MARGIN: f64 = 5.0;

// Values larger than this are rescaled during the Hermite recurrence.
const RESCALE_LIMIT: f64 = 1e150;

/// Normalised Hermite function `ψ_n(ξ)` with `∫ψ_n² dξ = 1`, by the stable
/// three-term recurrence with running exponent so nothing over- or
/// underflows before the Gaussian factor is applied.
pub fn hermite_function(n: u32, xi: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25);
    let mut log_scale = 0.0;
    for k in 0..n {
        let kf = f64::from(k);
        let next = (2.0 / (kf + 1.0)).sqrt() * xi * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_LIMIT {
            cur /= RESCALE_LIMIT;
            prev /= RESCALE_LIMIT;
            log_scale += RESCALE_LIMIT.ln();
        }
    }
    if cur == 0.0 {
        return 0.0;
    }
    cur.signum() * (cur.abs().ln() + log_scale - 0.5 * xi * xi).exp()
}

/// Eigenfunction value at a single point (zero outside the box for the hard
/// wall). Does not validate `n` or `l`.
#[inline]
pub(crate) fn eigenfunction_value(conf: &Confinement, n: u32, l: f64, x: f64) -> f64 {
    match conf.model {
        Model::SoftHarmonic { .. } => hermite_function(n, x / l) / l.sqrt(),
        Model::HardWall => {
            if x <= 0.0 || x >= l {
                0.0
            } else {
                box_mode(n, l, x)
            }
        }
    }
}

/// `sqrt(2/L) sin(πnx/L)` continued past the walls.
#[inline]
pub(crate) fn box_mode(n: u32, l: f64, x: f64) -> f64 {
    (2.0 / l).sqrt() * (PI * f64::from(n) * x / l).sin()
}

/// Pointwise eigenfunction `φ_n(x; L)`.
pub fn eigenfunction_at(conf: &Confinement, n: u32, l: f64, x: f64) -> Result<f64> {
    conf.check_level(n)?;
    check_length(l)?;
    Ok(eigenfunction_value(conf, n, l, x))
}

/// Classical turning point of level `n` in the trap of size `l`.
pub fn turning_point(n: u32, l: f64) -> f64 {
    l * (2.0 * f64::from(n) + 1.0).sqrt()
}

/// Samples of the normalised real eigenfunction on `grid`.
///
/// Soft trap: the grid must contain the classical turning point. Hard wall:
/// the grid must start at the left wall; points beyond `x = L` are zero.
pub fn eigenfunction(conf: &Confinement, n: u32, l: f64, grid: &Grid) -> Result<Vec<f64>> {
    conf.check_level(n)?;
    check_length(l)?;
    match conf.model {
        Model::SoftHarmonic { .. } => {
            let half_width = grid.start().abs().min(grid.end().abs());
            let tp = turning_point(n, l);
            if grid.start() > -tp || grid.end() < tp {
                return Err(Error::Truncation {
                    n,
                    half_width,
                    turning_point: tp,
                });
            }
        }
        Model::HardWall => {
            if grid.start().abs() > 1e-12 * l {
                return Err(domain(format!(
                    "hard-wall grid must start at the wall x = 0, starts at {}",
                    grid.start()
                )));
            }
            if grid.end() < l * (1.0 - 1e-12) {
                return Err(domain(format!(
                    "hard-wall grid ends at {} inside the box of size {l}",
                    grid.end()
                )));
            }
        }
    }
    Ok(grid
        .points()
        .iter()
        .map(|&x| eigenfunction_value(conf, n, l, x))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn soft() -> Confinement {
        Confinement::soft_from_length(1.0, Units::NATURAL).unwrap()
    }

    fn hard() -> Confinement {
        Confinement::hard_wall(Units::NATURAL)
    }

    #[test]
    fn omega_scaling() {
        let c = soft();
        assert_eq!(omega_of_length(&c, 1.0).unwrap(), 1.0);
        assert_eq!(omega_of_length(&c, 2.0).unwrap(), 0.25);
        assert_eq!(omega_of_length(&c, 0.5).unwrap(), 4.0);
        assert!(matches!(
            omega_of_length(&hard(), 1.0),
            Err(Error::UnsupportedModel { .. })
        ));
    }

    #[test]
    fn soft_constructor_consistency() {
        let u = Units::new(1.0, 2.0, 1.0).unwrap();
        let c = Confinement::soft_from_omega(0.5, u).unwrap();
        assert_eq!(c.initial_length(), Some(1.0));
        assert!(Confinement::soft(0.5, 1.0, u).is_ok());
        assert!(Confinement::soft(0.5, 1.1, u).is_err());
    }

    #[test]
    fn energy_examples() {
        assert_eq!(energy(&soft(), 0, 1.0).unwrap(), 0.5);
        assert!((energy(&hard(), 1, 1.0).unwrap() - 4.934_802_2).abs() < 1e-7);
        assert!((energy(&soft(), 3, 2.0).unwrap() - 0.875).abs() < 1e-15);
        assert!(energy(&hard(), 0, 1.0).is_err());
        assert!(energy(&soft(), 0, -1.0).is_err());
    }

    #[test]
    fn density_of_states_examples() {
        assert_eq!(density_of_states(&soft(), 3.0, 1.0).unwrap(), 1.0);
        let d1 = density_of_states(&hard(), 1.0, 1.0).unwrap();
        assert!((d1 - 0.225_079_1).abs() < 1e-7);
        let d4 = density_of_states(&hard(), 4.0, 1.0).unwrap();
        assert!((d4 - d1 / 2.0).abs() < 1e-15);
        assert!(density_of_states(&hard(), 0.0, 1.0).is_err());
    }

    #[test]
    fn box_midpoint() {
        let v = eigenfunction_at(&hard(), 1, 1.0, 0.5).unwrap();
        assert!((v - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn discrete_norms() {
        let g = Grid::for_soft(1.0, 20, 2048).unwrap();
        for n in [0, 1, 7, 20] {
            let phi = eigenfunction(&soft(), n, 1.0, &g).unwrap();
            let norm = g.sum(phi.iter().map(|p| p * p));
            assert!((norm - 1.0).abs() < 1e-10, "n = {n}: {norm}");
        }
        let g = Grid::box_interval(1.0, 2048).unwrap();
        for n in [1, 2, 13, 20] {
            let phi = eigenfunction(&hard(), n, 1.0, &g).unwrap();
            let norm = g.sum(phi.iter().map(|p| p * p));
            assert!((norm - 1.0).abs() < 1e-10, "n = {n}: {norm}");
            assert_eq!(phi[0], 0.0);
            assert_eq!(phi[phi.len() - 1], 0.0);
        }
    }

    #[test]
    fn ground_state_second_moment() {
        let g = Grid::symmetric(12.0, 4001).unwrap();
        let phi = eigenfunction(&soft(), 0, 1.0, &g).unwrap();
        let x2 = g.sum(phi.iter().zip(g.points()).map(|(p, x)| p * p * x * x));
        assert!((x2 - 0.5).abs() < 1e-8);
    }

    #[test]
    fn truncated_grid_is_flagged() {
        let g = Grid::symmetric(2.0, 101).unwrap();
        assert!(matches!(
            eigenfunction(&soft(), 5, 1.0, &g),
            Err(Error::Truncation { n: 5, .. })
        ));
    }

    #[test]
    fn large_n_is_finite_and_normalised() {
        let n = 10_000;
        let tp = turning_point(n, 1.0);
        let g = Grid::symmetric(tp + 8.0, 200_001).unwrap();
        let phi = eigenfunction(&soft(), n, 1.0, &g).unwrap();
        assert!(phi.iter().all(|p| p.is_finite()));
        let norm = g.sum(phi.iter().map(|p| p * p));
        assert!((norm - 1.0).abs() < 1e-6, "{norm}");
    }
}

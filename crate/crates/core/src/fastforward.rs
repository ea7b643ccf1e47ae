//! Fast-forward phase, driving potential and the driven eigenstates.
//!
//! For both confinements the eigenfunctions dilate rigidly with `L`, the
//! phase solving the regularisation condition is `θ = m x² / (2ħL)`, and the
//! driven state is
//!
//! ```text
//! ψ_FF(x, t) = φ_n(x; L) · exp(i m L̇ x² / 2ħL) · exp(−i ∫₀ᵗ E_n(L(s)) ds / ħ)
//! ```
//!
//! which solves the Schrödinger equation with total potential
//! `V₀(x; L) − (m/2)(L̈/L) x²`.

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::quad::{gk15, integrate};
use crate::spectra::{box_mode, check_length, hermite_function, omega_of_length, Confinement, Grid, ModelKind};
use crate::trajectory::{KinematicSample, Schedule};

/// Absolute tolerance on the accumulated dynamical-phase integral.
pub const PHASE_TOLERANCE: f64 = 1e-12;

/// Closed-form phase `θ(x) = m x² / (2ħL)` sampled on `grid`.
pub fn theta_phase(conf: &Confinement, l: f64, grid: &Grid) -> Result<Vec<f64>> {
    check_length(l)?;
    let u = conf.units();
    let c = u.mass / (2.0 * u.hbar * l);
    Ok(grid.points().iter().map(|&x| c * x * x).collect())
}

/// Phase recovered by integrating the regularisation condition, with its
/// worst deviation from the closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaIntegral {
    pub theta: Vec<f64>,
    pub max_deviation: f64,
}

// φ² below this (in units of 1/L) is treated as a node.
const NODE_FLOOR: f64 = 1e-6;
const UNDERFLOW_FLOOR: f64 = 1e-280;

struct PhaseIntegrand<'a> {
    conf: &'a Confinement,
    n: u32,
    l: f64,
    step: f64,
    lo: f64,
    hi: f64,
    interior: f64,
}

impl PhaseIntegrand<'_> {
    fn density(&self, x: f64, l: f64) -> f64 {
        match self.conf.kind() {
            ModelKind::Soft => hermite_function(self.n, x / l).powi(2) / l,
            ModelKind::Hard => box_mode(self.n, l, x).powi(2),
        }
    }

    /// `∂_L φ²` at fixed `x` by a sixth-order central difference. The step
    /// shrinks in the trap's tails, where `ln φ²` varies like `x²/L²`.
    fn density_rate(&self, x: f64) -> f64 {
        const C: [f64; 3] = [45.0, -9.0, 1.0];
        let xi = x / self.l;
        let step = self.step / (1.0 + xi * xi / f64::from(self.n + 1));
        let mut acc = 0.0;
        for (k, c) in C.iter().enumerate() {
            let d = step * (k + 1) as f64;
            acc += c * (self.density(x, self.l + d) - self.density(x, self.l - d));
        }
        acc / (60.0 * step)
    }

    /// Near a node the quotient `I/φ²` is 0/0 to working precision. In the
    /// trap's tails both factors stay accurate, so only underflow counts.
    fn singular(&self, x: f64) -> bool {
        let d = self.density(x, self.l) * self.l;
        if d < UNDERFLOW_FLOOR {
            return true;
        }
        d < NODE_FLOOR && x.abs() < self.interior
    }
}

/// Phase obtained from `∂_x θ = −(m/ħ) φ⁻² ∫ˣ ∂_L φ² dx'` by quadrature, with
/// `θ(0) = 0`. At nodes of `φ_n` (and in the far tails of the trap) the ratio
/// is replaced by its one-sided limit, extrapolated quadratically from three
/// neighbouring points.
pub fn theta_from_integral(conf: &Confinement, n: u32, l: f64, grid: &Grid) -> Result<ThetaIntegral> {
    conf.check_level(n)?;
    check_length(l)?;
    let (lo, hi) = match conf.kind() {
        ModelKind::Soft => (f64::NEG_INFINITY, f64::INFINITY),
        ModelKind::Hard => {
            if grid.start() < -1e-12 * l || grid.end() > l * (1.0 + 1e-12) {
                return Err(domain(format!(
                    "hard-wall phase integral needs a grid inside [0, {l}], got [{}, {}]",
                    grid.start(),
                    grid.end()
                )));
            }
            (0.0, l)
        }
    };
    let integrand = PhaseIntegrand {
        conf,
        n,
        l,
        step: 2e-3 * l / f64::from(n + 1),
        lo,
        hi,
        interior: match conf.kind() {
            ModelKind::Soft => crate::spectra::turning_point(n, l),
            ModelKind::Hard => f64::INFINITY,
        },
    };
    let g = |x: f64| integrand.density_rate(x);
    let xs = grid.points();
    let m = xs.len();

    // Tolerances relative to ∫|g| so the deep tails keep their digits.
    let tight = |a: f64, b: f64| -> Result<f64> {
        let scale = gk15(&|x: f64| g(x).abs(), a, b).value;
        if scale == 0.0 {
            return Ok(0.0);
        }
        Ok(integrate(g, a, b, 1e-14 * scale, 1e-11)?.value)
    };

    // Cumulative ∫ g from x = 0 outwards.
    let j0 = nearest_index(xs, 0.0);
    let mut from_centre = vec![0.0; m];
    from_centre[j0] = tight(0.0, xs[j0])?;
    for j in j0 + 1..m {
        from_centre[j] = from_centre[j - 1] + tight(xs[j - 1], xs[j])?;
    }
    for j in (0..j0).rev() {
        from_centre[j] = from_centre[j + 1] - tight(xs[j], xs[j + 1])?;
    }

    // Cumulative ∫ g anchored where the running integral is known to vanish:
    // the far tails of the trap (normalisation), the far wall of the box.
    let (far_left, far_right, switch) = match conf.kind() {
        ModelKind::Soft => {
            let tp = crate::spectra::turning_point(n, l);
            let reach = xs[0].abs().max(xs[m - 1].abs()).max(tp) + 20.0 * l;
            (-reach, reach, tp)
        }
        ModelKind::Hard => (f64::NAN, l, 0.5 * l),
    };
    let mut anchored = from_centre.clone();
    let right_start = xs.iter().position(|&x| x > switch).unwrap_or(m);
    if right_start < m {
        anchored[m - 1] = -tight(xs[m - 1], far_right)?;
        for j in (right_start..m - 1).rev() {
            anchored[j] = anchored[j + 1] - tight(xs[j], xs[j + 1])?;
        }
    }
    if conf.kind() == ModelKind::Soft {
        let left_end = xs.iter().rposition(|&x| x < -switch);
        if let Some(le) = left_end {
            anchored[0] = tight(far_left, xs[0])?;
            for j in 1..=le {
                anchored[j] = anchored[j - 1] + tight(xs[j - 1], xs[j])?;
            }
        }
    }

    let u = conf.units();
    let prefactor = -u.mass / u.hbar;
    let running = |y: f64| -> f64 {
        let j = nearest_index(xs, y);
        anchored[j] + gk15(&g, xs[j], y).value
    };
    let plain_ratio = |y: f64| prefactor * running(y) / integrand.density(y, l);
    let ratio = |y: f64| -> f64 {
        if !integrand.singular(y) {
            return plain_ratio(y);
        }
        one_sided_limit(&integrand, y, &plain_ratio).unwrap_or(f64::NAN)
    };

    let mut theta = vec![0.0; m];
    let theta_at_j0 = integrate(ratio, 0.0, xs[j0], 1e-13, 1e-10)
        .map(|r| r.value)
        .unwrap_or(f64::NAN);
    theta[j0] = theta_at_j0;
    for j in j0 + 1..m {
        theta[j] = theta[j - 1] + gk15(&ratio, xs[j - 1], xs[j]).value;
    }
    for j in (0..j0).rev() {
        theta[j] = theta[j + 1] - gk15(&ratio, xs[j], xs[j + 1]).value;
    }

    let closed = theta_phase(conf, l, grid)?;
    let max_deviation = theta
        .iter()
        .zip(&closed)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, |acc: f64, d| if d.is_nan() { f64::NAN } else { acc.max(d) });
    Ok(ThetaIntegral { theta, max_deviation })
}

fn one_sided_limit(p: &PhaseIntegrand<'_>, y: f64, f: &dyn Fn(f64) -> f64) -> Option<f64> {
    let inward = if p.lo.is_finite() {
        if y - p.lo < p.hi - y {
            1.0
        } else {
            -1.0
        }
    } else if y > 0.0 {
        -1.0
    } else {
        1.0
    };
    let mut s = 0.01 * p.l / f64::from(p.n + 1);
    for _ in 0..200 {
        for dir in [inward, -inward] {
            let pts = [y + dir * s, y + 2.0 * dir * s, y + 3.0 * dir * s];
            if pts.iter().all(|&q| q >= p.lo && q <= p.hi && !p.singular(q)) {
                return Some(3.0 * f(pts[0]) - 3.0 * f(pts[1]) + f(pts[2]));
            }
        }
        s *= 1.1;
    }
    None
}

fn nearest_index(xs: &[f64], y: f64) -> usize {
    let h = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    let j = ((y - xs[0]) / h).round();
    j.clamp(0.0, (xs.len() - 1) as f64) as usize
}

/// Coefficient `c` of the total potential `V₀ + V_FF = c x²` (inside the box
/// for the hard wall). Depends on the size and acceleration only.
pub fn potential_coefficient(conf: &Confinement, length: f64, acceleration: f64) -> f64 {
    let u = conf.units();
    let driving = -0.5 * u.mass * acceleration / length;
    match conf.kind() {
        ModelKind::Soft => 0.5 * u.hbar * u.hbar / (u.mass * length.powi(4)) + driving,
        ModelKind::Hard => driving,
    }
}

/// Total instantaneous potential `V₀ + V_FF` on `grid`. For the hard wall
/// this is the interior expression; the walls are the caller's business.
pub fn ff_potential(conf: &Confinement, k: &KinematicSample, grid: &Grid) -> Result<Vec<f64>> {
    check_length(k.length)?;
    let c = potential_coefficient(conf, k.length, k.acceleration);
    Ok(grid.points().iter().map(|&x| c * x * x).collect())
}

/// `(1/ħ) ∫₀ᵗ E_n(L(s)) ds`.
pub fn dynamical_phase(conf: &Confinement, sched: &dyn Schedule, n: u32, t: f64) -> Result<f64> {
    conf.check_level(n)?;
    let t = sched.sample(t)?.t;
    if t == 0.0 {
        return Ok(0.0);
    }
    let t_end = sched.duration();
    let length = |s: f64| sched.sample(s).map(|k| k.length).unwrap_or(f64::NAN);
    let (integrand, weight): (Box<dyn Fn(f64) -> f64>, f64) = match conf.kind() {
        ModelKind::Soft => (
            Box::new(|s| omega_of_length(conf, length(s)).unwrap_or(f64::NAN)),
            f64::from(n) + 0.5,
        ),
        ModelKind::Hard => (
            Box::new(|s| length(s).powi(-2)),
            conf.energy_scale(n) / conf.units().hbar,
        ),
    };
    let mut total = 0.0;
    let mut pieces = vec![(0.0, t.min(t_end))];
    if t > t_end {
        pieces.push((t_end, t));
    }
    for (a, b) in pieces {
        let r = integrate(&integrand, a, b, PHASE_TOLERANCE, 0.0)?;
        if !(r.value.is_finite() && r.abs_error <= PHASE_TOLERANCE) {
            return Err(Error::Numeric {
                context: "dynamical phase",
                detail: format!("quadrature on [{a}, {b}] missed tolerance {PHASE_TOLERANCE:e}"),
                residual: r.abs_error,
            });
        }
        total += r.value;
    }
    Ok(weight * total)
}

/// A state sampled on a grid, normally the driven eigenstate of level `n`
/// at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FFWavefunction {
    pub grid: Grid,
    pub psi: Vec<Complex64>,
    pub n: u32,
    pub t: f64,
}

impl FFWavefunction {
    pub fn norm_squared(&self) -> f64 {
        self.grid.sum(self.psi.iter().map(|z| z.norm_sqr()))
    }
}

/// `ψ_FF` for level `n` at time `t` under `sched`.
pub fn ff_wavefunction(
    conf: &Confinement,
    sched: &dyn Schedule,
    n: u32,
    t: f64,
    grid: &Grid,
) -> Result<FFWavefunction> {
    let k = sched.sample(t)?;
    let phi = crate::spectra::eigenfunction(conf, n, k.length, grid)?;
    let dyn_phase = dynamical_phase(conf, sched, n, k.t)?;
    let u = conf.units();
    let a = u.mass * k.velocity / (2.0 * u.hbar * k.length);
    let psi = phi
        .iter()
        .zip(grid.points())
        .map(|(&p, &x)| Complex64::from_polar(p, a * x * x - dyn_phase))
        .collect();
    Ok(FFWavefunction {
        grid: grid.clone(),
        psi,
        n,
        t: k.t,
    })
}

/// Phase, potential and dynamical phase bundled for one `(n, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FFFields {
    pub theta: Vec<f64>,
    pub v_total: Vec<f64>,
    pub dyn_phase: f64,
}

pub fn ff_fields(conf: &Confinement, sched: &dyn Schedule, n: u32, t: f64, grid: &Grid) -> Result<FFFields> {
    let k = sched.sample(t)?;
    Ok(FFFields {
        theta: theta_phase(conf, k.length, grid)?,
        v_total: ff_potential(conf, &k, grid)?,
        dyn_phase: dynamical_phase(conf, sched, n, k.t)?,
    })
}

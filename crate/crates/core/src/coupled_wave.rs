//! Normalized three-wave envelope equations
//!
//! ```text
//! dA_j/dξ = iΔΓ·A_j − i·s·A*_{3−j}·A3   (j = 1, 2)
//! dA3/dξ  = iΔΓ·A3 − i·s·A1·A2
//! ```
//!
//! with Manley–Rowe constants `K1 = I1 + I3`, `K2 = I2 + I3`, `K3 = I1 − I2`.

use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{solve, StepControl};
use crate::profile::MismatchProfile;
use crate::{fmt_f64, wrap_angle, Sign};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Complex normalized amplitudes of the three waves.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Envelope {
    pub a1: Complex64,
    pub a2: Complex64,
    pub a3: Complex64,
}

impl Envelope {
    pub fn new(a1: Complex64, a2: Complex64, a3: Complex64) -> Self {
        Self { a1, a2, a3 }
    }

    /// Builds an envelope from intensities and phases.
    pub fn from_polar(intensities: [f64; 3], phases: [f64; 3]) -> Result<Self> {
        if intensities.iter().any(|i| !(i.is_finite() && *i >= 0.0)) {
            return Err(Error::Invalid(format!(
                "intensities must be finite and non-negative, got {intensities:?}"
            )));
        }
        let a = |k: usize| Complex64::from_polar(intensities[k].sqrt(), phases[k]);
        Ok(Self::new(a(0), a(1), a(2)))
    }

    pub fn amplitudes(&self) -> [Complex64; 3] {
        [self.a1, self.a2, self.a3]
    }

    pub fn intensities(&self) -> [f64; 3] {
        self.amplitudes().map(|a| a.norm_sqr())
    }

    pub fn is_finite(&self) -> bool {
        self.amplitudes().iter().all(|a| a.is_finite())
    }

    pub(crate) fn to_real(self) -> [f64; 6] {
        [
            self.a1.re, self.a1.im, self.a2.re, self.a2.im, self.a3.re, self.a3.im,
        ]
    }

    pub(crate) fn from_real(y: &[f64; 6]) -> Self {
        Self::new(
            Complex64::new(y[0], y[1]),
            Complex64::new(y[2], y[3]),
            Complex64::new(y[4], y[5]),
        )
    }
}

/// Manley–Rowe invariants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MrConstants {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

impl MrConstants {
    /// `K3` is derived as `K1 − K2`.
    pub fn new(k1: f64, k2: f64) -> Self {
        Self {
            k1,
            k2,
            k3: k1 - k2,
        }
    }

    pub fn from_intensities(i: [f64; 3]) -> Self {
        Self {
            k1: i[0] + i[2],
            k2: i[1] + i[2],
            k3: i[0] - i[1],
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.k1, self.k2, self.k3]
    }
}

/// Right-hand side of the envelope equations.
pub fn rhs(env: &Envelope, dgamma: f64, s: Sign) -> Envelope {
    let is = I * s.value();
    let dg = I * dgamma;
    Envelope {
        a1: dg * env.a1 - is * env.a2.conj() * env.a3,
        a2: dg * env.a2 - is * env.a1.conj() * env.a3,
        a3: dg * env.a3 - is * env.a1 * env.a2,
    }
}

pub fn manley_rowe(env: &Envelope) -> MrConstants {
    MrConstants::from_intensities(env.intensities())
}

/// Intensities, principal phases and `β = φ1 + φ2 − φ3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub intensities: [f64; 3],
    pub phases: [f64; 3],
    /// Wrapped to `(−π, π]`; `None` when any amplitude vanishes.
    pub beta: Option<f64>,
}

pub fn observables(env: &Envelope) -> Observables {
    let amps = env.amplitudes();
    let phases = amps.map(|a| a.arg());
    // arg(A1·A2·A3*) avoids summing three independently wrapped phases.
    let beta = if amps.iter().any(|a| a.norm_sqr() == 0.0) {
        None
    } else {
        Some(wrap_angle((env.a1 * env.a2 * env.a3.conj()).arg()))
    };
    Observables {
        intensities: env.intensities(),
        phases,
        beta,
    }
}

/// Integrator settings for the envelope equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub sign: Sign,
}

impl Default for SimOptions {
    fn default() -> Self {
        let c = StepControl::default();
        Self {
            rel_tol: c.rel_tol,
            abs_tol: c.abs_tol,
            max_step: c.max_step,
            sign: Sign::Plus,
        }
    }
}

impl SimOptions {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }

    pub fn step_control(&self) -> StepControl {
        StepControl {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step,
            ..StepControl::default()
        }
    }
}

/// One sample of an integrated trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub xi: f64,
    pub env: Envelope,
    pub intensities: [f64; 3],
    pub beta_wrapped: Option<f64>,
    pub beta_unwrapped: Option<f64>,
    pub dgamma: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
}

impl Trajectory {
    /// Builds samples with diagnostics; `β` is unwrapped along each run of
    /// samples where it is defined.
    pub fn from_states(grid: &[f64], states: &[Envelope], profile: &MismatchProfile) -> Self {
        let mut prev: Option<(f64, f64)> = None;
        let samples = grid
            .iter()
            .zip(states)
            .map(|(&xi, env)| {
                let obs = observables(env);
                let unwrapped = obs.beta.map(|b| match prev {
                    Some((pw, pu)) => pu + wrap_angle(b - pw),
                    None => b,
                });
                prev = obs.beta.zip(unwrapped);
                Sample {
                    xi,
                    env: *env,
                    intensities: obs.intensities,
                    beta_wrapped: obs.beta,
                    beta_unwrapped: unwrapped,
                    dgamma: profile.value(xi),
                }
            })
            .collect();
        Self { samples }
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    /// Maximum of `|K_j(ξ) − K_j(ξ0)| / max(1, |K_j(ξ0)|)` over the trajectory.
    pub fn manley_rowe_drift(&self) -> [f64; 3] {
        let Some(first) = self.samples.first() else {
            return [0.0; 3];
        };
        let k0 = MrConstants::from_intensities(first.intensities).as_array();
        let mut drift = [0.0f64; 3];
        for s in &self.samples {
            let k = MrConstants::from_intensities(s.intensities).as_array();
            for j in 0..3 {
                drift[j] = drift[j].max((k[j] - k0[j]).abs() / k0[j].abs().max(1.0));
            }
        }
        drift
    }

    pub const CSV_HEADER: &'static str =
        "xi,re_a1,im_a1,re_a2,im_a2,re_a3,im_a3,i1,i2,i3,beta_wrapped,beta_unwrapped,dgamma";

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
        for s in &self.samples {
            let e = &s.env;
            let fields = [
                s.xi,
                e.a1.re,
                e.a1.im,
                e.a2.re,
                e.a2.im,
                e.a3.re,
                e.a3.im,
                s.intensities[0],
                s.intensities[1],
                s.intensities[2],
            ]
            .map(fmt_f64);
            writeln!(
                w,
                "{},{},{},{}",
                fields.join(","),
                opt(s.beta_wrapped),
                opt(s.beta_unwrapped),
                fmt_f64(s.dgamma)
            )?;
        }
        Ok(())
    }
}

fn check_inputs(env0: &Envelope, profile: &MismatchProfile, opts: &SimOptions) -> Result<()> {
    if !env0.is_finite() {
        return Err(Error::Invalid("initial envelope is not finite".into()));
    }
    profile.validate()?;
    opts.step_control().validate()
}

/// Integrates the envelope equations and samples them on `grid`.
///
/// `grid` must be strictly increasing. Step-size collapse is reported as
/// [`Error::StepUnderflow`] carrying the last accepted `ξ`.
pub fn integrate(
    env0: &Envelope,
    profile: &MismatchProfile,
    grid: &[f64],
    opts: &SimOptions,
) -> Result<Trajectory> {
    check_inputs(env0, profile, opts)?;
    if grid.len() < 2 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid(
            "trajectory grid must be strictly increasing with >= 2 points".into(),
        ));
    }
    profile.validate_span(grid[0], grid[grid.len() - 1])?;
    let states = run(env0, profile, grid, opts)?;
    Ok(Trajectory::from_states(grid, &states, profile))
}

/// Propagates a single state from `from` to `to` (either direction).
pub fn propagate(
    env0: &Envelope,
    profile: &MismatchProfile,
    from: f64,
    to: f64,
    opts: &SimOptions,
) -> Result<Envelope> {
    check_inputs(env0, profile, opts)?;
    if from == to {
        return Ok(*env0);
    }
    let states = run(env0, profile, &[from, to], opts)?;
    Ok(states[1])
}

fn run(
    env0: &Envelope,
    profile: &MismatchProfile,
    grid: &[f64],
    opts: &SimOptions,
) -> Result<Vec<Envelope>> {
    let s = opts.sign;
    let f = |xi: f64, y: &[f64; 6]| {
        let env = Envelope::from_real(y);
        rhs(&env, profile.value(xi), s).to_real()
    };
    let ys = solve(f, grid, env0.to_real(), &opts.step_control())?;
    Ok(ys.iter().map(Envelope::from_real).collect())
}

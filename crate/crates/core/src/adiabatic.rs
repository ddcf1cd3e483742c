//! Elliptic parameterization of the fully nonlinear state and the reduced
//! `(u, β)` dynamics.
//!
//! | process | `m`       | `g`   | amplitudes `(A1, A2, A3)`                     |
//! |---------|-----------|-------|-----------------------------------------------|
//! | SFG/SHG | `K2/K1`   | `√K1` | `(√K1 dn, √K2 cn, √K2 sn)`                    |
//! | DFG     | `K1/K2`   | `√K2` | `(√K1 cn, √K2 dn, √K1 sn)`                    |
//! | OPA     | `K3/K1`   | `√K1` | `(√(−K3) sn(iu), √(−K3) cn(iu), √K1 dn(iu))`  |
//!
//! each multiplied by `e^{iφ_j}`, with `β = φ1 + φ2 − φ3`. The reduced flow is
//!
//! ```text
//! SFG/DFG/SHG:  u̇ =  s·g·sin β,   β̇ = ΔΓ − s·g·cos β·F(u),   F = J−(u)
//! OPA:          u̇ = −s·g·cos β,   β̇ = ΔΓ − s·g·sin β·F(u),   F = i·J−(iu)
//! ```
//!
//! For OPA the factor `i` of `sn(iu)` is carried as an extra `π/2` in the
//! phase of `A1`, so the physical `arg(A1·A2·A3*)` equals `β + π/2`.
//!
//! Each stationary branch has `β` fixed and `ΔΓ = c·g·F(u_s)` with
//! `c = s·cos β_s` (or `s·sin β_s`) `= ±1`. Linearizing gives
//! `Ω = g·√F′(u_s)` and `r_nl = g·|dΔΓ/dξ| / Ω³`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coupled_wave::{Envelope, MrConstants, SimOptions};
use crate::elliptic::{jacobi, JFunction, JValue, PeriodInfo, DEFAULT_POLE_TOL};
use crate::error::{domain, Error, Result};
use crate::integrate::solve;
use crate::profile::MismatchProfile;
use crate::roots::brent;
use crate::{fmt_f64, wrap_angle, Sign};

/// Largest `u` searched when the half-period is infinite; `tanh(18)` is 1 to
/// within 5e−16.
pub const U_CAP: f64 = 18.0;

const SCAN_POINTS: usize = 256;
const SCAN_DECADES: i32 = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessKind {
    Sfg,
    Dfg,
    Shg,
    Opa,
}

impl ProcessKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Sfg => "sfg",
            Self::Dfg => "dfg",
            Self::Shg => "shg",
            Self::Opa => "opa",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    #[default]
    Plus,
    Minus,
}

/// Point of the reduced plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ReducedState {
    pub u: f64,
    pub beta: f64,
}

/// Linearized frequency at a stationary point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gap {
    /// `Ω = g·√F′ ≥ 0`; the branch is a center.
    Oscillatory(f64),
    /// `F′ < 0`: the linearization is a saddle with this growth rate.
    Hyperbolic(f64),
}

impl Gap {
    pub fn omega(self) -> Option<f64> {
        match self {
            Gap::Oscillatory(w) => Some(w),
            Gap::Hyperbolic(_) => None,
        }
    }
}

/// Adiabaticity diagnostics at one stationary point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticityReport {
    pub gap: Gap,
    /// `+∞` when the gap is closed or hyperbolic.
    pub r_nl: f64,
    pub du_s_dxi: f64,
}

/// `r_nl = √k·|dΔΓ/dξ| / Ω³`.
pub fn nonlinear_adiabaticity(dgamma_rate: f64, omega: f64, k: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(domain(
            "nonlinear adiabaticity",
            format!("gap frequency must be positive (omega = {omega})"),
        ));
    }
    Ok(k.sqrt() * dgamma_rate.abs() / omega.powi(3))
}

/// A process with fixed Manley–Rowe constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Process {
    kind: ProcessKind,
    constants: MrConstants,
    m: f64,
    g: f64,
    period: PeriodInfo,
    pole_tol: f64,
}

impl Process {
    pub fn new(kind: ProcessKind, constants: MrConstants) -> Result<Self> {
        let MrConstants { k1, k2, k3 } = constants;
        if ![k1, k2, k3].iter().all(|k| k.is_finite()) {
            return Err(Error::Invalid(format!(
                "non-finite constants {constants:?}"
            )));
        }
        if (k3 - (k1 - k2)).abs() > 1e-12 * k1.abs().max(k2.abs()).max(1.0) {
            return Err(Error::Invalid(format!(
                "K3 must equal K1 - K2 (got {k1}, {k2}, {k3})"
            )));
        }
        let invalid = |msg: &str| {
            Err(Error::Invalid(format!(
                "{}: {msg} (K = {k1}, {k2}, {k3})",
                kind.name()
            )))
        };
        let (m, g) = match kind {
            ProcessKind::Sfg => {
                if !(k1 >= k2 && k2 > 0.0) {
                    return invalid("requires K1 >= K2 > 0");
                }
                (k2 / k1, k1.sqrt())
            }
            ProcessKind::Shg => {
                if !(k1 > 0.0) || (k1 - k2).abs() > 1e-12 * k1 {
                    return invalid("requires K1 = K2 > 0");
                }
                (1.0, k1.sqrt())
            }
            ProcessKind::Dfg => {
                if !(k2 >= k1 && k1 > 0.0) {
                    return invalid("requires K2 >= K1 > 0");
                }
                (k1 / k2, k2.sqrt())
            }
            ProcessKind::Opa => {
                if !(k1 > 0.0) || k3 > 0.0 {
                    return invalid("requires K1 > 0 and K3 <= 0");
                }
                if k3 == 0.0 {
                    return Err(Error::Degenerate(
                        "OPA with K3 = 0 lies on the cone; the parameterization degenerates".into(),
                    ));
                }
                (k3 / k1, k1.sqrt())
            }
        };
        Self::build(kind, constants, m, g)
    }

    /// Process defined directly by `(m, g)`, including the limits `m = 0`
    /// that [`Process::new`] rejects. Constants are synthesized with the
    /// coupling wave normalized to `g²`.
    pub fn with_parameter(kind: ProcessKind, m: f64, g: f64) -> Result<Self> {
        if !(g > 0.0 && g.is_finite()) || !m.is_finite() {
            return Err(Error::Invalid(format!("invalid (m, g) = ({m}, {g})")));
        }
        let k = g * g;
        let constants = match kind {
            ProcessKind::Sfg if (0.0..=1.0).contains(&m) => MrConstants::new(k, m * k),
            ProcessKind::Shg if m == 1.0 => MrConstants::new(k, k),
            ProcessKind::Dfg if (0.0..=1.0).contains(&m) => MrConstants::new(m * k, k),
            ProcessKind::Opa if m <= 0.0 => MrConstants::new(k, k - m * k),
            _ => {
                return Err(Error::Invalid(format!(
                    "parameter m = {m} is outside the range of {}",
                    kind.name()
                )))
            }
        };
        Self::build(kind, constants, m, g)
    }

    fn build(kind: ProcessKind, constants: MrConstants, m: f64, g: f64) -> Result<Self> {
        let period = match kind {
            ProcessKind::Opa => PeriodInfo::imaginary_argument(m)?,
            _ => PeriodInfo::real_argument(m)?,
        };
        Ok(Self {
            kind,
            constants,
            m,
            g,
            period,
            pole_tol: DEFAULT_POLE_TOL,
        })
    }

    pub fn with_pole_tol(mut self, tol: f64) -> Self {
        self.pole_tol = tol;
        self
    }

    pub fn kind(&self) -> ProcessKind {
        self.kind
    }

    pub fn constants(&self) -> MrConstants {
        self.constants
    }

    /// Elliptic parameter `m`.
    pub fn m(&self) -> f64 {
        self.m
    }

    /// Coupling scale `g` of the reduced flow.
    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn period(&self) -> PeriodInfo {
        self.period
    }

    /// `T/2`; infinite for SHG and for OPA at `m = 0`.
    pub fn half_period(&self) -> f64 {
        self.period.half_period
    }

    fn is_opa(&self) -> bool {
        self.kind == ProcessKind::Opa
    }

    pub fn j_function(&self) -> JFunction {
        if self.is_opa() {
            JFunction::ImagMinus
        } else {
            JFunction::Minus
        }
    }

    /// `F(u)` and `F′(u)` of the reduced flow.
    pub fn coupling_function(&self, u: f64) -> Result<JValue> {
        self.j_function().eval_with_tol(u, self.m, self.pole_tol)
    }

    /// `β` on a stationary branch.
    pub fn branch_beta(&self, branch: Branch) -> f64 {
        match (self.is_opa(), branch) {
            (false, Branch::Plus) => 0.0,
            (false, Branch::Minus) => PI,
            (true, Branch::Plus) => FRAC_PI_2,
            (true, Branch::Minus) => -FRAC_PI_2,
        }
    }

    /// `s·cos β_s` (or `s·sin β_s` for OPA), always `±1`.
    pub fn branch_coefficient(&self, branch: Branch, s: Sign) -> f64 {
        match branch {
            Branch::Plus => s.value(),
            Branch::Minus => -s.value(),
        }
    }

    /// Offset between the physical `arg(A1·A2·A3*)` and the reduced `β`.
    pub fn azimuth_offset(&self) -> f64 {
        if self.is_opa() {
            FRAC_PI_2
        } else {
            0.0
        }
    }

    /// Real amplitude factors `(a1, a2, a3)` with `A_j = a_j·e^{iφ_j}`
    /// (OPA: `A1 = i·a1·e^{iφ1}`).
    pub fn amplitudes(&self, u: f64) -> Result<[f64; 3]> {
        if !u.is_finite() {
            return Err(domain("parameterize", format!("non-finite u = {u}")));
        }
        let MrConstants { k1, k2, k3 } = self.constants;
        Ok(match self.kind {
            ProcessKind::Sfg | ProcessKind::Shg => {
                let t = jacobi(u, self.m)?;
                [k1.sqrt() * t.dn, k2.sqrt() * t.cn, k2.sqrt() * t.sn]
            }
            ProcessKind::Dfg => {
                let t = jacobi(u, self.m)?;
                [k1.sqrt() * t.cn, k2.sqrt() * t.dn, k1.sqrt() * t.sn]
            }
            ProcessKind::Opa => {
                if k3 == 0.0 {
                    return Err(Error::Degenerate(
                        "OPA with K3 = 0 lies on the cone; the parameterization degenerates".into(),
                    ));
                }
                let t = jacobi(u, 1.0 - self.m)?;
                let r = (-k3).sqrt();
                [r * t.sn / t.cn, r / t.cn, k1.sqrt() * t.dn / t.cn]
            }
        })
    }

    /// Envelope at elliptic argument `u` with phases `(φ1, φ2, φ3)`.
    pub fn parameterize(&self, u: f64, phases: [f64; 3]) -> Result<Envelope> {
        let a = self.amplitudes(u)?;
        let p1 = phases[0] + self.azimuth_offset();
        Ok(Envelope::new(
            Complex64::from_polar(1.0, p1) * a[0],
            Complex64::from_polar(1.0, phases[1]) * a[1],
            Complex64::from_polar(1.0, phases[2]) * a[2],
        ))
    }

    pub fn intensities(&self, u: f64) -> Result<[f64; 3]> {
        Ok(self.amplitudes(u)?.map(|a| a * a))
    }

    /// Envelope of a reduced state in the gauge `φ1 = φ2 = 0`, `φ3 = −β`.
    pub fn envelope(&self, state: ReducedState) -> Result<Envelope> {
        self.parameterize(state.u, [0.0, 0.0, -state.beta])
    }

    /// Inverse of [`Process::envelope`] on `0 ≤ u ≤ T/2`; `u` is located by
    /// root finding on one intensity ratio.
    pub fn reduced_from_envelope(&self, env: &Envelope) -> Result<ReducedState> {
        let [i1, _, i3] = env.intensities();
        let MrConstants { k1, k2, k3 } = self.constants;
        let (ratio, target_fn): (f64, Box<dyn Fn(f64) -> Result<f64>>) = match self.kind {
            ProcessKind::Sfg | ProcessKind::Shg => {
                (i3 / k2, Box::new(|u| Ok(jacobi(u, self.m)?.sn.powi(2))))
            }
            ProcessKind::Dfg => (i3 / k1, Box::new(|u| Ok(jacobi(u, self.m)?.sn.powi(2)))),
            ProcessKind::Opa => (
                i1 / (-k3),
                Box::new(|u| {
                    let t = jacobi(u, 1.0 - self.m)?;
                    Ok((t.sn / t.cn).powi(2))
                }),
            ),
        };
        let upper = self.half_period().min(U_CAP);
        let ratio_max = target_fn(upper)?;
        if !(ratio >= -1e-12 && ratio <= ratio_max * (1.0 + 1e-12) + 1e-12) {
            return Err(Error::OffManifold { intensity: ratio });
        }
        let ratio = ratio.clamp(0.0, ratio_max);
        let u = if ratio == 0.0 {
            0.0
        } else if ratio == ratio_max {
            upper
        } else {
            brent(|u| Ok(target_fn(u)? - ratio), 0.0, upper, 0.0, 200)?
        };
        let product = env.a1 * env.a2 * env.a3.conj();
        if product.norm_sqr() == 0.0 {
            return Err(Error::Degenerate(
                "relative phase is undefined when an amplitude vanishes".into(),
            ));
        }
        Ok(ReducedState {
            u,
            beta: wrap_angle(product.arg() - self.azimuth_offset()),
        })
    }

    /// `(u̇, β̇)`.
    pub fn reduced_rhs(&self, state: ReducedState, dgamma: f64, s: Sign) -> Result<(f64, f64)> {
        let f = self.coupling_function(state.u)?.value;
        let sg = s.value() * self.g;
        let (sb, cb) = state.beta.sin_cos();
        Ok(if self.is_opa() {
            (-sg * cb, dgamma - sg * sb * f)
        } else {
            (sg * sb, dgamma - sg * cb * f)
        })
    }

    /// Integrates the reduced flow on `grid`.
    pub fn integrate_reduced(
        &self,
        state0: ReducedState,
        profile: &MismatchProfile,
        grid: &[f64],
        opts: &SimOptions,
    ) -> Result<Vec<ReducedState>> {
        self.coupling_function(state0.u)?;
        let mut failure = None;
        let f = |xi: f64, y: &[f64; 2]| match self.reduced_rhs(
            ReducedState {
                u: y[0],
                beta: y[1],
            },
            profile.value(xi),
            opts.sign,
        ) {
            Ok((du, db)) => [du, db],
            Err(e) => {
                failure.get_or_insert(e);
                [f64::NAN; 2]
            }
        };
        let ys = solve(f, grid, [state0.u, state0.beta], &opts.step_control());
        if let Some(e) = failure {
            if ys.is_err() {
                return Err(e);
            }
        }
        Ok(ys?
            .into_iter()
            .map(|y| ReducedState {
                u: y[0],
                beta: y[1],
            })
            .collect())
    }

    /// Values of `F` on the root-scan grid over `(0, min(T/2, U_CAP))`.
    fn scan(&self) -> Vec<(f64, f64)> {
        let half = self.half_period();
        let upper = half.min(U_CAP);
        let mut us: Vec<f64> = (1..SCAN_POINTS)
            .map(|i| upper * i as f64 / SCAN_POINTS as f64)
            .collect();
        for k in 1..=SCAN_DECADES {
            let d = upper * 10f64.powi(-k) / SCAN_POINTS as f64;
            us.push(d);
            if half.is_finite() {
                us.push(upper - d);
            }
        }
        if half.is_infinite() {
            us.push(upper);
        }
        us.sort_by(f64::total_cmp);
        us.dedup();
        us.into_iter()
            .filter_map(|u| self.coupling_function(u).ok().map(|v| (u, v.value)))
            .filter(|(_, f)| f.is_finite())
            .collect()
    }

    /// Range of `ΔΓ = c·g·F(u)` over the scanned part of the branch.
    pub fn attainable_range(&self, branch: Branch, s: Sign) -> (f64, f64) {
        let c = self.branch_coefficient(branch, s) * self.g;
        let pts = self.scan();
        let (lo, hi) = pts
            .iter()
            .map(|(_, f)| c * f)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| {
                (a.min(x), b.max(x))
            });
        (lo, hi)
    }

    /// Stationary `u_s` of `branch` at mismatch `dgamma`.
    ///
    /// Roots are bracketed on a scan of `F` and polished with Brent's method.
    /// With several roots the one nearest `hint` is returned; without a hint
    /// that is an [`Error::AmbiguousRoot`].
    pub fn stationary_u(
        &self,
        branch: Branch,
        dgamma: f64,
        s: Sign,
        hint: Option<f64>,
    ) -> Result<f64> {
        if !dgamma.is_finite() {
            return Err(Error::Invalid(format!("non-finite mismatch {dgamma}")));
        }
        let c = self.branch_coefficient(branch, s) * self.g;
        let target = dgamma / c;
        let pts = self.scan();
        let mut roots = Vec::new();
        for w in pts.windows(2) {
            let ((ua, fa), (ub, fb)) = (w[0], w[1]);
            let (da, db) = (fa - target, fb - target);
            if da == 0.0 {
                roots.push(ua);
            } else if da.signum() != db.signum() && db != 0.0 {
                let r = brent(
                    |u| Ok(self.coupling_function(u)?.value - target),
                    ua,
                    ub,
                    0.0,
                    200,
                )?;
                roots.push(r);
            }
        }
        if let Some(&(u_last, f_last)) = pts.last() {
            if f_last == target {
                roots.push(u_last);
            }
        }
        match roots.len() {
            0 => {
                let (lo, hi) = self.attainable_range(branch, s);
                Err(Error::NoRoot {
                    target: dgamma,
                    lo,
                    hi,
                })
            }
            1 => Ok(roots[0]),
            count => match hint {
                Some(h) => Ok(roots
                    .into_iter()
                    .min_by(|a, b| (a - h).abs().total_cmp(&(b - h).abs()))
                    .unwrap_or(h)),
                None => Err(Error::AmbiguousRoot {
                    target: dgamma,
                    count,
                }),
            },
        }
    }

    /// Stationary reduced state on `branch`.
    pub fn stationary_state(
        &self,
        branch: Branch,
        dgamma: f64,
        s: Sign,
        hint: Option<f64>,
    ) -> Result<ReducedState> {
        Ok(ReducedState {
            u: self.stationary_u(branch, dgamma, s, hint)?,
            beta: self.branch_beta(branch),
        })
    }

    /// `Ω = g·√F′(u_s)`.
    pub fn gap_frequency(&self, u_s: f64) -> Result<Gap> {
        let d = self.coupling_function(u_s)?.derivative;
        let r = self.g * self.g * d;
        Ok(if r >= 0.0 {
            Gap::Oscillatory(r.sqrt())
        } else {
            Gap::Hyperbolic((-r).sqrt())
        })
    }

    /// Jacobian of the reduced flow in `(δu, δβ)` at a stationary point:
    /// `[[0, c·g], [−c·g·F′(u_s), 0]]`.
    pub fn linearized_matrix(&self, branch: Branch, u_s: f64, s: Sign) -> Result<[[f64; 2]; 2]> {
        let d = self.coupling_function(u_s)?.derivative;
        let cg = self.branch_coefficient(branch, s) * self.g;
        Ok([[0.0, cg], [-cg * d, 0.0]])
    }

    /// `du_s/dξ = (dΔΓ/dξ) / (c·g·F′(u_s))`.
    pub fn du_s_dxi(&self, branch: Branch, u_s: f64, s: Sign, dgamma_rate: f64) -> Result<f64> {
        if dgamma_rate == 0.0 {
            return Ok(0.0);
        }
        let d = self.coupling_function(u_s)?.derivative;
        if d == 0.0 {
            return Err(domain(
                "du_s/dxi",
                format!("F'(u_s) vanishes at u_s = {u_s}"),
            ));
        }
        Ok(dgamma_rate / (self.branch_coefficient(branch, s) * self.g * d))
    }

    pub fn adiabaticity(
        &self,
        branch: Branch,
        u_s: f64,
        s: Sign,
        dgamma_rate: f64,
    ) -> Result<AdiabaticityReport> {
        let gap = self.gap_frequency(u_s)?;
        let r_nl = match gap {
            Gap::Oscillatory(w) => {
                nonlinear_adiabaticity(dgamma_rate, w, self.g * self.g).unwrap_or(f64::INFINITY)
            }
            Gap::Hyperbolic(_) => f64::INFINITY,
        };
        Ok(AdiabaticityReport {
            gap,
            r_nl,
            du_s_dxi: self
                .du_s_dxi(branch, u_s, s, dgamma_rate)
                .unwrap_or(f64::INFINITY),
        })
    }

    /// Continuation-tracked stationary branch along `grid`.
    ///
    /// Losing the branch truncates the trajectory and records the reason in
    /// [`AdiabaticTrajectory::breakdown`].
    pub fn adiabatic_trajectory(
        &self,
        profile: &MismatchProfile,
        grid: &[f64],
        branch: Branch,
        s: Sign,
    ) -> Result<AdiabaticTrajectory> {
        profile.validate()?;
        let beta_s = self.branch_beta(branch);
        let mut samples = Vec::with_capacity(grid.len());
        let mut breakdown = None;
        let mut hint = None;
        for &xi in grid {
            let (dgamma, rate) = profile.eval(xi);
            let u_s = match self.stationary_u(branch, dgamma, s, hint) {
                Ok(u) => u,
                Err(e) => {
                    breakdown = Some(Breakdown {
                        xi,
                        reason: e.to_string(),
                    });
                    break;
                }
            };
            hint = Some(u_s);
            let report = self.adiabaticity(branch, u_s, s, rate)?;
            samples.push(AdiabaticSample {
                xi,
                dgamma,
                u_s,
                beta_s,
                intensities: self.intensities(u_s)?,
                omega: report.gap.omega(),
                r_nl: report.r_nl,
                breakdown_flag: !(report.r_nl <= 1.0),
            });
        }
        if samples.is_empty() {
            if let Some(b) = &breakdown {
                return Err(Error::NoRoot {
                    target: profile.value(b.xi),
                    lo: self.attainable_range(branch, s).0,
                    hi: self.attainable_range(branch, s).1,
                });
            }
        }
        Ok(AdiabaticTrajectory {
            branch,
            samples,
            breakdown,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticSample {
    pub xi: f64,
    pub dgamma: f64,
    pub u_s: f64,
    pub beta_s: f64,
    pub intensities: [f64; 3],
    pub omega: Option<f64>,
    pub r_nl: f64,
    /// `r_nl > 1`.
    pub breakdown_flag: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Breakdown {
    pub xi: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdiabaticTrajectory {
    pub branch: Branch,
    pub samples: Vec<AdiabaticSample>,
    /// Where the branch was lost, if it was.
    pub breakdown: Option<Breakdown>,
}

impl AdiabaticTrajectory {
    pub const CSV_HEADER: &'static str = "xi,dgamma,u_s,beta_s,i1,i2,i3,omega,r_nl,breakdown_flag";

    /// First sample with `r_nl > 1`.
    pub fn first_flagged(&self) -> Option<&AdiabaticSample> {
        self.samples.iter().find(|s| s.breakdown_flag)
    }

    pub fn max_r_nl(&self) -> f64 {
        self.samples.iter().map(|s| s.r_nl).fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for s in &self.samples {
            let f = [
                s.xi,
                s.dgamma,
                s.u_s,
                s.beta_s,
                s.intensities[0],
                s.intensities[1],
                s.intensities[2],
            ]
            .map(fmt_f64);
            writeln!(
                w,
                "{},{},{},{}",
                f.join(","),
                s.omega.map(fmt_f64).unwrap_or_default(),
                fmt_f64(s.r_nl),
                u8::from(s.breakdown_flag)
            )?;
        }
        Ok(())
    }
}

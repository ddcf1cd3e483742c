//! Undepleted-pump two-level models.
//!
//! The idler/signal pair `ψ = (A_i, A_s)` obeys `i dψ/dξ = H ψ` with
//!
//! ```text
//! H = ½(Re κ·σ1 + Im κ·σ2 + Δk·σ3)
//! ```
//!
//! built from the Pauli matrices for SFG/DFG (Hermitian) and from the
//! pseudo-Pauli triple `σ̃1 = [[0,−1],[1,0]]`, `σ̃2 = [[0,i],[i,0]]`, `σ3`
//! for OPA, where `κ = i·q` is purely imaginary.

use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coupled_wave::SimOptions;
use crate::error::{domain, Error, Result};
use crate::integrate::solve;
use crate::profile::MismatchProfile;
use crate::{fmt_f64, wrap_angle};

type Matrix2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearKind {
    /// Real-coupling SFG/DFG with the ordinary Pauli algebra.
    Hermitian,
    /// Parametric amplification with the pseudo-Pauli algebra.
    Opa,
}

/// Idler and signal amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TwoLevelState {
    pub a_i: Complex64,
    pub a_s: Complex64,
}

impl TwoLevelState {
    pub fn new(a_i: Complex64, a_s: Complex64) -> Self {
        Self { a_i, a_s }
    }

    pub fn intensities(&self) -> (f64, f64) {
        (self.a_i.norm_sqr(), self.a_s.norm_sqr())
    }

    fn as_array(&self) -> [Complex64; 2] {
        [self.a_i, self.a_s]
    }

    fn to_real(self) -> [f64; 4] {
        [self.a_i.re, self.a_i.im, self.a_s.re, self.a_s.im]
    }

    fn from_real(y: &[f64; 4]) -> Self {
        Self::new(Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3]))
    }
}

/// Coupling `κ`, mismatch `Δk` and the algebra they act through.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearCoupling {
    pub kind: LinearKind,
    pub kappa: Complex64,
    pub delta_k: f64,
}

impl LinearCoupling {
    pub fn hermitian(delta_k: f64, kappa: f64) -> Self {
        Self {
            kind: LinearKind::Hermitian,
            kappa: re(kappa),
            delta_k,
        }
    }

    /// OPA coupling `κ = i·q` with `q > 0`.
    pub fn opa(delta_k: f64, q: f64) -> Result<Self> {
        if !(q > 0.0 && q.is_finite()) {
            return Err(domain(
                "OPA coupling",
                format!("q must be positive, got {q}"),
            ));
        }
        Ok(Self {
            kind: LinearKind::Opa,
            kappa: Complex64::new(0.0, q),
            delta_k,
        })
    }

    /// `|κ|`.
    pub fn magnitude(&self) -> f64 {
        self.kappa.norm()
    }

    /// `(Re κ, Im κ, Δk)`.
    pub fn omega(&self) -> [f64; 3] {
        [self.kappa.re, self.kappa.im, self.delta_k]
    }

    pub fn hamiltonian(&self) -> Matrix2 {
        let (a, b, d) = (self.kappa.re, self.kappa.im, self.delta_k);
        let half = 0.5;
        let (s1, s2) = match self.kind {
            LinearKind::Hermitian => ([[ZERO, re(1.0)], [re(1.0), ZERO]], [[ZERO, -I], [I, ZERO]]),
            LinearKind::Opa => ([[ZERO, re(-1.0)], [re(1.0), ZERO]], [[ZERO, I], [I, ZERO]]),
        };
        let s3 = [[re(1.0), ZERO], [ZERO, re(-1.0)]];
        let mut h = [[ZERO; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                h[r][c] = (s1[r][c] * a + s2[r][c] * b + s3[r][c] * d) * half;
            }
        }
        h
    }
}

fn apply(m: &Matrix2, v: [Complex64; 2]) -> [Complex64; 2] {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

/// Conjugate transpose.
pub fn adjoint(m: &Matrix2) -> Matrix2 {
    [
        [m[0][0].conj(), m[1][0].conj()],
        [m[0][1].conj(), m[1][1].conj()],
    ]
}

/// `dψ/dξ = −i·H·ψ`.
pub fn linear_rhs(state: &TwoLevelState, coupling: &LinearCoupling) -> TwoLevelState {
    let hv = apply(&coupling.hamiltonian(), state.as_array());
    TwoLevelState::new(-I * hv[0], -I * hv[1])
}

/// Residual `‖Hψ − λψ‖` for an arbitrary 2×2 matrix.
pub fn eigen_residual(m: &Matrix2, lambda: Complex64, v: &TwoLevelState) -> f64 {
    let hv = apply(m, v.as_array());
    ((hv[0] - lambda * v.a_i).norm_sqr() + (hv[1] - lambda * v.a_s).norm_sqr()).sqrt()
}

/// `⟨a|b⟩ = Σ a_k* b_k`.
pub fn inner(a: &TwoLevelState, b: &TwoLevelState) -> Complex64 {
    a.a_i.conj() * b.a_i + a.a_s.conj() * b.a_s
}

/// Mixing angle `θ` and `δ = tan 2θ` (Hermitian) or `tanh 2θ` (OPA).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingAngle {
    pub theta: f64,
    pub delta: f64,
}

/// Eigenpairs indexed `[1, 2]`; `λ1 < λ2` in the Hermitian case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianEigensystem {
    pub lambda: [f64; 2],
    pub angle: MixingAngle,
    pub vectors: [TwoLevelState; 2],
}

/// Hermitian eigensystem for real `κ`.
///
/// `θ = ½·atan2(−κ, Δk)`, `ψ1 = (sin θ, cos θ)` with `λ1 = −½√(Δk² + κ²)`,
/// `ψ2 = (cos θ, −sin θ)` with `λ2 = +½√(Δk² + κ²)`. For `κ > 0`, `θ` runs
/// from `−π/2` to `0` as `Δk` sweeps from `−∞` to `+∞`.
pub fn eigensystem_hermitian(delta_k: f64, kappa: f64) -> Result<HermitianEigensystem> {
    if delta_k == 0.0 && kappa == 0.0 {
        return Err(Error::Degenerate(
            "Hermitian eigensystem is degenerate at dk = kappa = 0".into(),
        ));
    }
    let theta = 0.5 * (-kappa).atan2(delta_k);
    let half = 0.5 * delta_k.hypot(kappa);
    let (s, c) = theta.sin_cos();
    Ok(HermitianEigensystem {
        lambda: [-half, half],
        angle: MixingAngle {
            theta,
            delta: -kappa / delta_k,
        },
        vectors: [
            TwoLevelState::new(re(s), re(c)),
            TwoLevelState::new(re(c), re(-s)),
        ],
    })
}

/// Right (`vectors`) and adjoint (`adjoint_vectors`) eigenpairs of the OPA
/// Hamiltonian; the two sets are biorthonormal under [`inner`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonHermitianEigensystem {
    pub lambda: [f64; 2],
    pub angle: MixingAngle,
    pub vectors: [TwoLevelState; 2],
    pub adjoint_vectors: [TwoLevelState; 2],
}

/// OPA eigensystem for `|Δk| > q > 0`.
///
/// `θ = ½·atanh(−q/Δk)`, `ψ1 = (i sinh θ, cosh θ)`, `ψ2 = (cosh θ, −i sinh θ)`,
/// `ψ̂1 = (−i sinh θ, cosh θ)`, `ψ̂2 = (cosh θ, i sinh θ)`. The eigenvalue of
/// `ψ2` is `R/2` with `R = sgn(Δk)·√(Δk² − q²)`, so `λ1 > λ2` when `Δk < 0`.
pub fn eigensystem_nonhermitian(delta_k: f64, q: f64) -> Result<NonHermitianEigensystem> {
    if !(q >= 0.0) || !delta_k.is_finite() {
        return Err(domain(
            "OPA eigensystem",
            format!("invalid (dk, q) = ({delta_k}, {q})"),
        ));
    }
    if delta_k.abs() <= q {
        return Err(Error::ExceptionalRegion {
            xi: f64::NAN,
            delta_k,
            q,
        });
    }
    let delta = -q / delta_k;
    let theta = 0.5 * delta.atanh();
    let r = delta_k.signum() * ((delta_k - q) * (delta_k + q)).sqrt();
    let (sh, ch) = (theta.sinh(), theta.cosh());
    Ok(NonHermitianEigensystem {
        lambda: [-0.5 * r, 0.5 * r],
        angle: MixingAngle { theta, delta },
        vectors: [
            TwoLevelState::new(I * sh, re(ch)),
            TwoLevelState::new(re(ch), -I * sh),
        ],
        adjoint_vectors: [
            TwoLevelState::new(-I * sh, re(ch)),
            TwoLevelState::new(re(ch), I * sh),
        ],
    })
}

/// Adiabatic `(I_s, I_i)` for an OPA seeded with unit signal:
/// `(½(1 + 1/√(1−δ²)), ½(−1 + 1/√(1−δ²)))`.
pub fn adiabatic_intensities_opa(delta: f64) -> Result<(f64, f64)> {
    if !(delta.abs() < 1.0) {
        return Err(domain(
            "OPA adiabatic intensities",
            format!("|delta| must be < 1, got {delta}"),
        ));
    }
    let g = 1.0 / (1.0 - delta * delta).sqrt();
    Ok((0.5 * (1.0 + g), 0.5 * (g - 1.0)))
}

/// `(U, V, W)` of the Bloch (Hermitian) or pseudo-Bloch (OPA) map.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BlochVec {
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

impl BlochVec {
    pub fn as_array(&self) -> [f64; 3] {
        [self.u, self.v, self.w]
    }

    /// `4(U² + V²) + W²` for the Bloch map, conserved by the Hermitian flow.
    pub fn sphere_invariant(&self) -> f64 {
        4.0 * (self.u * self.u + self.v * self.v) + self.w * self.w
    }

    /// `W² − 4(U² + V²)` for the pseudo-Bloch map, conserved by the OPA flow.
    pub fn hyperboloid_invariant(&self) -> f64 {
        self.w * self.w - 4.0 * (self.u * self.u + self.v * self.v)
    }

    /// Coordinates `(U, V, W/2)` in which the Hermitian flow is a rigid rotation.
    pub fn sphere_coordinates(&self) -> [f64; 3] {
        [self.u, self.v, 0.5 * self.w]
    }
}

/// `U = Re(A_i A_s*)`, `V = Im(A_i A_s*)`, `W = |A_i|² ∓ |A_s|²`
/// (minus for Hermitian, plus for OPA).
pub fn bloch_map(state: &TwoLevelState, kind: LinearKind) -> BlochVec {
    let p = state.a_i * state.a_s.conj();
    let (ii, is) = state.intensities();
    BlochVec {
        u: p.re,
        v: p.im,
        w: match kind {
            LinearKind::Hermitian => ii - is,
            LinearKind::Opa => ii + is,
        },
    }
}

pub fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Rotation axis of the Hermitian flow in [`BlochVec::sphere_coordinates`]:
/// `d(U, V, W/2)/dξ = axis × (U, V, W/2)` with `axis = (−Re κ, Im κ, −Δk)`.
pub fn precession_axis(coupling: &LinearCoupling) -> [f64; 3] {
    [-coupling.kappa.re, coupling.kappa.im, -coupling.delta_k]
}

/// Bilinear product with `dρ/dz = pseudo_cross(Ω, ρ)` for the pseudo-Bloch
/// vector `ρ = (U, V, W)` under the OPA flow, `Ω = (Re κ, Im κ, Δk)`.
///
/// Obtained by expanding the derivative of each bilinear form under the
/// pseudo-Pauli Hamiltonian; it is not antisymmetric.
pub fn pseudo_cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        0.5 * a[1] * b[2] + a[2] * b[1],
        0.5 * a[0] * b[2] - a[2] * b[0],
        2.0 * (a[0] * b[1] + a[1] * b[0]),
    ]
}

/// `dρ/dz` of the kind's Bloch vector.
pub fn bloch_rate(coupling: &LinearCoupling, rho: &BlochVec) -> BlochVec {
    let r = rho.as_array();
    let o = coupling.omega();
    let d = match coupling.kind {
        LinearKind::Hermitian => {
            let d = cross(precession_axis(coupling), rho.sphere_coordinates());
            [d[0], d[1], 2.0 * d[2]]
        }
        LinearKind::Opa => pseudo_cross(o, r),
    };
    BlochVec {
        u: d[0],
        v: d[1],
        w: d[2],
    }
}

/// `dθ/dξ` for a mismatch sweeping at rate `dk_rate` with fixed coupling magnitude.
pub fn mixing_angle_rate(kind: LinearKind, delta_k: f64, dk_rate: f64, coupling_mag: f64) -> f64 {
    match kind {
        LinearKind::Hermitian => {
            coupling_mag * dk_rate / (2.0 * (delta_k * delta_k + coupling_mag * coupling_mag))
        }
        LinearKind::Opa => {
            coupling_mag * dk_rate / (2.0 * (delta_k * delta_k - coupling_mag * coupling_mag))
        }
    }
}

/// `r_l = |θ̇| / √(Δk² ± |κ|²)` (plus for Hermitian, minus for OPA).
pub fn linear_adiabaticity(
    theta_dot: f64,
    delta_k: f64,
    coupling_mag: f64,
    kind: LinearKind,
) -> Result<f64> {
    let radicand = match kind {
        LinearKind::Hermitian => delta_k * delta_k + coupling_mag * coupling_mag,
        LinearKind::Opa => (delta_k - coupling_mag) * (delta_k + coupling_mag),
    };
    if !(radicand > 0.0) {
        return Err(domain(
            "linear adiabaticity",
            format!("gap closes at dk = {delta_k}, |kappa| = {coupling_mag}"),
        ));
    }
    Ok(theta_dot.abs() / radicand.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSample {
    pub xi: f64,
    pub state: TwoLevelState,
    pub bloch: BlochVec,
    /// Continuous along the trajectory; `None` at `Δk = κ = 0`.
    pub theta: Option<f64>,
    pub r_l: Option<f64>,
    pub delta_k: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearTrajectory {
    pub kind: LinearKind,
    pub coupling_mag: f64,
    pub samples: Vec<LinearSample>,
}

impl LinearTrajectory {
    pub const CSV_HEADER: &'static str = "xi,re_ai,im_ai,re_as,im_as,i_i,i_s,u,v,w,theta,r_l,dk";

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
        for s in &self.samples {
            let (ii, is) = s.state.intensities();
            let f = [
                s.xi,
                s.state.a_i.re,
                s.state.a_i.im,
                s.state.a_s.re,
                s.state.a_s.im,
                ii,
                is,
                s.bloch.u,
                s.bloch.v,
                s.bloch.w,
            ]
            .map(fmt_f64);
            writeln!(
                w,
                "{},{},{},{}",
                f.join(","),
                opt(s.theta),
                opt(s.r_l),
                fmt_f64(s.delta_k)
            )?;
        }
        Ok(())
    }
}

/// Builds the coupling of `kind` at mismatch `delta_k`.
pub fn coupling_for(kind: LinearKind, delta_k: f64, coupling_mag: f64) -> Result<LinearCoupling> {
    match kind {
        LinearKind::Hermitian => Ok(LinearCoupling::hermitian(delta_k, coupling_mag)),
        LinearKind::Opa => LinearCoupling::opa(delta_k, coupling_mag),
    }
}

// Sub-samples between grid points used to locate an exceptional-region entry.
const EXCEPTIONAL_SCAN: usize = 16;

fn first_exceptional(profile: &MismatchProfile, grid: &[f64], q: f64) -> Option<(f64, f64)> {
    let bad = |x: f64| profile.value(x).abs() <= q;
    if bad(grid[0]) {
        return Some((grid[0], profile.value(grid[0])));
    }
    for w in grid.windows(2) {
        for k in 1..=EXCEPTIONAL_SCAN {
            let x = w[0] + (w[1] - w[0]) * k as f64 / EXCEPTIONAL_SCAN as f64;
            if bad(x) {
                return Some((x, profile.value(x)));
            }
        }
    }
    None
}

/// Integrates the linear model with fixed `|κ|` and mismatch `Δk(ξ) = profile(ξ)`.
///
/// For OPA the whole span must stay outside `|Δk| ≤ q`; otherwise
/// [`Error::ExceptionalRegion`] reports the first offending `ξ`.
pub fn integrate_linear(
    state0: &TwoLevelState,
    kind: LinearKind,
    coupling_mag: f64,
    profile: &MismatchProfile,
    grid: &[f64],
    opts: &SimOptions,
) -> Result<LinearTrajectory> {
    if grid.len() < 2 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid(
            "trajectory grid must be strictly increasing with >= 2 points".into(),
        ));
    }
    profile.validate_span(grid[0], grid[grid.len() - 1])?;
    coupling_for(kind, 0.0, coupling_mag)?;
    if !(coupling_mag.is_finite()) || coupling_mag < 0.0 {
        return Err(Error::Invalid(format!(
            "coupling magnitude {coupling_mag} is invalid"
        )));
    }
    if kind == LinearKind::Opa {
        if let Some((xi, delta_k)) = first_exceptional(profile, grid, coupling_mag) {
            return Err(Error::ExceptionalRegion {
                xi,
                delta_k,
                q: coupling_mag,
            });
        }
    }
    let f = |xi: f64, y: &[f64; 4]| {
        let c = LinearCoupling {
            kind,
            kappa: match kind {
                LinearKind::Hermitian => re(coupling_mag),
                LinearKind::Opa => Complex64::new(0.0, coupling_mag),
            },
            delta_k: profile.value(xi),
        };
        linear_rhs(&TwoLevelState::from_real(y), &c).to_real()
    };
    let ys = solve(f, grid, state0.to_real(), &opts.step_control())?;

    let mut prev_two_theta: Option<f64> = None;
    let samples = grid
        .iter()
        .zip(&ys)
        .map(|(&xi, y)| {
            let state = TwoLevelState::from_real(y);
            let (dk, rate) = profile.eval(xi);
            let theta = match kind {
                LinearKind::Hermitian => eigensystem_hermitian(dk, coupling_mag).ok().map(|e| {
                    let raw = 2.0 * e.angle.theta;
                    let two = match prev_two_theta {
                        Some(p) => p + wrap_angle(raw - p),
                        None => raw,
                    };
                    prev_two_theta = Some(two);
                    0.5 * two
                }),
                LinearKind::Opa => eigensystem_nonhermitian(dk, coupling_mag)
                    .ok()
                    .map(|e| e.angle.theta),
            };
            let theta_dot = mixing_angle_rate(kind, dk, rate, coupling_mag);
            LinearSample {
                xi,
                state,
                bloch: bloch_map(&state, kind),
                theta,
                r_l: linear_adiabaticity(theta_dot, dk, coupling_mag, kind).ok(),
                delta_k: dk,
            }
        })
        .collect();
    Ok(LinearTrajectory {
        kind,
        coupling_mag,
        samples,
    })
}

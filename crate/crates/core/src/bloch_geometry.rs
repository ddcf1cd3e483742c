//! Generalized Bloch vector of the nonlinear state.
//!
//! For weights `(a1, a2, a3)` with `σ = a1 + a2 − a3 ≠ 0`,
//!
//! ```text
//! U + iV = A1·A2·A3*,   W = a1·I1 + a2·I2 + a3·I3
//! ```
//!
//! Manley–Rowe conservation makes every `I_j` linear in `W`
//! (`I3 = (W3 − W)/σ`, `I1 = K1 − I3`, `I2 = K2 − I3`), so the state lies on
//! the surface of revolution `U² + V² = I1·I2·I3`.

use std::f64::consts::PI;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::adiabatic::{Process, ReducedState};
use crate::coupled_wave::{Envelope, MrConstants};
use crate::error::{Error, Result};
use crate::fmt_f64;
use crate::linear_twolevel::BlochVec;

/// Relative tolerance on recovered intensities before a point counts as off
/// the surface.
pub const OFF_MANIFOLD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightTriple {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

impl WeightTriple {
    /// `W = I3 − I2`: reduces to the Bloch sphere of the linear SFG model.
    pub const LINEAR_BLOCH: Self = Self {
        a1: 0.0,
        a2: -1.0,
        a3: 1.0,
    };
    /// `W = I1 + I2`: reduces to the pseudo-Bloch hyperboloid of the linear OPA model.
    pub const PSEUDO_BLOCH: Self = Self {
        a1: 1.0,
        a2: 1.0,
        a3: 0.0,
    };

    pub fn new(a1: f64, a2: f64, a3: f64) -> Result<Self> {
        let w = Self { a1, a2, a3 };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.sigma();
        if !s.is_finite() || s == 0.0 {
            return Err(Error::Invalid(format!(
                "weights must satisfy a1 + a2 - a3 != 0 (got {}, {}, {})",
                self.a1, self.a2, self.a3
            )));
        }
        Ok(())
    }

    /// `σ = a1 + a2 − a3`.
    pub fn sigma(&self) -> f64 {
        self.a1 + self.a2 - self.a3
    }

    pub fn w_of(&self, intensities: [f64; 3]) -> f64 {
        self.a1 * intensities[0] + self.a2 * intensities[1] + self.a3 * intensities[2]
    }

    pub fn roots(&self, c: &MrConstants) -> SurfaceRoots {
        SurfaceRoots {
            w1: self.a2 * c.k3 - self.a3 * c.k1,
            w2: self.a1 * c.k3 - self.a3 * c.k2,
            w3: self.a1 * c.k1 + self.a2 * c.k2,
        }
    }

    /// Intensities recovered from `W` through the Manley–Rowe constants.
    pub fn recovered_intensities(&self, w: f64, c: &MrConstants) -> [f64; 3] {
        let i3 = (self.roots(c).w3 - w) / self.sigma();
        [c.k1 - i3, c.k2 - i3, i3]
    }
}

/// Characteristic values of `W` on the surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceRoots {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GenBlochVector {
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

impl GenBlochVector {
    pub fn radius(&self) -> f64 {
        self.u.hypot(self.v)
    }

    pub fn azimuth(&self) -> f64 {
        self.v.atan2(self.u)
    }
}

pub fn gen_bloch(env: &Envelope, weights: &WeightTriple) -> GenBlochVector {
    let p = env.a1 * env.a2 * env.a3.conj();
    GenBlochVector {
        u: p.re,
        v: p.im,
        w: weights.w_of(env.intensities()),
    }
}

/// `U² + V² − I1·I2·I3` with the intensities recovered from `W`.
pub fn surface_residual(
    v: &GenBlochVector,
    weights: &WeightTriple,
    c: &MrConstants,
) -> Result<f64> {
    weights.validate()?;
    let i = weights.recovered_intensities(v.w, c);
    let scale = c.k1.abs().max(c.k2.abs()).max(1.0);
    if let Some(&bad) = i.iter().find(|&&x| x < -OFF_MANIFOLD_TOL * scale) {
        return Err(Error::OffManifold { intensity: bad });
    }
    Ok(v.u * v.u + v.v * v.v - i[0] * i[1] * i[2])
}

/// `Π(W_j − W)/σ³` with the characteristic values of [`SurfaceRoots`].
///
/// Kept for comparison with `I1·I2·I3`; it does not coincide with it for
/// general weights.
pub fn product_form(w: f64, weights: &WeightTriple, c: &MrConstants) -> f64 {
    let r = weights.roots(c);
    (r.w1 - w) * (r.w2 - w) * (r.w3 - w) / weights.sigma().powi(3)
}

/// Generalized vector of the parameterized state at `(u, β)` in the gauge
/// `φ1 = φ2 = 0`, `φ3 = −β`.
pub fn from_reduced(
    process: &Process,
    state: ReducedState,
    weights: &WeightTriple,
) -> Result<GenBlochVector> {
    weights.validate()?;
    let a = process.amplitudes(state.u)?;
    // a1·a2·a3 = ±√(I1·I2·I3); the sign follows sn and cn past the half-period
    let r = a[0] * a[1] * a[2];
    let phase = state.beta + process.azimuth_offset();
    Ok(GenBlochVector {
        u: r * phase.cos(),
        v: r * phase.sin(),
        w: weights.w_of(a.map(|x| x * x)),
    })
}

/// Which linear geometry a weight triple reduces to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reduction {
    /// `(0, −1, 1)`: Bloch sphere of the undepleted-`A1` model.
    LinearBloch,
    /// `(1, 1, 0)`: pseudo-Bloch hyperboloid of the undepleted-`A3` model.
    PseudoBloch,
    Generic,
}

pub fn reduce_to_linear(weights: &WeightTriple) -> Reduction {
    if *weights == WeightTriple::LINEAR_BLOCH {
        Reduction::LinearBloch
    } else if *weights == WeightTriple::PSEUDO_BLOCH {
        Reduction::PseudoBloch
    } else {
        Reduction::Generic
    }
}

impl Reduction {
    /// Linear Bloch vector corresponding to `v` for a real positive pump
    /// amplitude `pump`.
    ///
    /// For [`Reduction::LinearBloch`] the pair is `(A_i, A_s) = (A3, A2)`, so
    /// `U + iV = pump·(A_i A_s*)*`. For [`Reduction::PseudoBloch`] it is
    /// `(A_i, A_s) = (A1, A2*)`, so `U + iV = pump·A_i A_s*`.
    pub fn linear_image(self, v: &GenBlochVector, pump: f64) -> Option<BlochVec> {
        if !(pump > 0.0) {
            return None;
        }
        match self {
            Reduction::LinearBloch => Some(BlochVec {
                u: v.u / pump,
                v: -v.v / pump,
                w: v.w,
            }),
            Reduction::PseudoBloch => Some(BlochVec {
                u: v.u / pump,
                v: v.v / pump,
                w: v.w,
            }),
            Reduction::Generic => None,
        }
    }
}

/// Largest deviation of the azimuth from `azimuth` over points with a
/// defined azimuth (radius above `min_radius`).
pub fn geodesic_check(points: &[GenBlochVector], azimuth: f64, min_radius: f64) -> Result<f64> {
    let mut worst: Option<f64> = None;
    for p in points.iter().filter(|p| p.radius() > min_radius) {
        let d = crate::wrap_angle(p.azimuth() - azimuth).abs();
        worst = Some(worst.map_or(d, |w| w.max(d)));
    }
    worst.ok_or_else(|| Error::Degenerate("no point with a defined azimuth".into()))
}

/// One row of a geometry export.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometrySample {
    pub xi: f64,
    pub vector: GenBlochVector,
    pub residual: f64,
}

pub const GEOMETRY_CSV_HEADER: &str = "xi,u,v,w,azimuth,surface_residual";

pub fn geometry_samples(
    xi: &[f64],
    envs: &[Envelope],
    weights: &WeightTriple,
    c: &MrConstants,
) -> Result<Vec<GeometrySample>> {
    xi.iter()
        .zip(envs)
        .map(|(&x, e)| {
            let vector = gen_bloch(e, weights);
            Ok(GeometrySample {
                xi: x,
                vector,
                residual: surface_residual(&vector, weights, c)?,
            })
        })
        .collect()
}

pub fn write_geometry_csv<W: Write>(mut w: W, rows: &[GeometrySample]) -> io::Result<()> {
    writeln!(w, "{GEOMETRY_CSV_HEADER}")?;
    for r in rows {
        let v = r.vector;
        let az = if v.radius() > 0.0 {
            fmt_f64(v.azimuth())
        } else {
            String::new()
        };
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt_f64(r.xi),
            fmt_f64(v.u),
            fmt_f64(v.v),
            fmt_f64(v.w),
            az,
            fmt_f64(r.residual)
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshPoint {
    pub azimuth: f64,
    pub w: f64,
    pub u: f64,
    pub v: f64,
}

pub const MESH_CSV_HEADER: &str = "azimuth,w,u,v";

/// Grid over the physical surface: `n_w` levels of `W` spanning
/// `0 ≤ I3 ≤ min(K1, K2)` times `n_azimuth` azimuths on `[−π, π]`.
pub fn surface_mesh(
    weights: &WeightTriple,
    c: &MrConstants,
    n_azimuth: usize,
    n_w: usize,
) -> Result<Vec<MeshPoint>> {
    weights.validate()?;
    if n_azimuth < 2 || n_w < 2 {
        return Err(Error::Invalid(
            "surface mesh needs at least 2x2 points".into(),
        ));
    }
    let i3_max = c.k1.min(c.k2);
    if !(i3_max >= 0.0) {
        return Err(Error::Invalid(format!(
            "no physical states for constants {c:?}"
        )));
    }
    let w3 = weights.roots(c).w3;
    let sigma = weights.sigma();
    let mut out = Vec::with_capacity(n_azimuth * n_w);
    for j in 0..n_w {
        let i3 = i3_max * j as f64 / (n_w - 1) as f64;
        let w = w3 - sigma * i3;
        let r = ((c.k1 - i3).max(0.0) * (c.k2 - i3).max(0.0) * i3).sqrt();
        for k in 0..n_azimuth {
            let phi = -PI + 2.0 * PI * k as f64 / (n_azimuth - 1) as f64;
            out.push(MeshPoint {
                azimuth: phi,
                w,
                u: r * phi.cos(),
                v: r * phi.sin(),
            });
        }
    }
    Ok(out)
}

pub fn write_mesh_csv<W: Write>(mut w: W, mesh: &[MeshPoint]) -> io::Result<()> {
    writeln!(w, "{MESH_CSV_HEADER}")?;
    for p in mesh {
        writeln!(
            w,
            "{},{},{},{}",
            fmt_f64(p.azimuth),
            fmt_f64(p.w),
            fmt_f64(p.u),
            fmt_f64(p.v)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adiabatic::{Branch, ProcessKind};
    use crate::Sign;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gen_bloch_examples() {
        let w = WeightTriple::new(1.0, 1.0, 1.0).unwrap();
        let e = Envelope::new(c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0));
        assert_eq!(
            gen_bloch(&e, &w),
            GenBlochVector {
                u: 0.0,
                v: 0.0,
                w: 4.0
            }
        );
        let e = Envelope::new(c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0));
        assert_eq!(
            gen_bloch(&e, &WeightTriple::PSEUDO_BLOCH),
            GenBlochVector {
                u: 1.0,
                v: 0.0,
                w: 2.0
            }
        );
        let e = Envelope::new(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
        assert_eq!(
            gen_bloch(&e, &WeightTriple::LINEAR_BLOCH),
            GenBlochVector {
                u: 0.0,
                v: -1.0,
                w: 0.0
            }
        );
    }

    #[test]
    fn weights_validation_and_classification() {
        assert!(WeightTriple::new(1.0, 0.0, 1.0).is_err());
        assert_eq!(
            reduce_to_linear(&WeightTriple::LINEAR_BLOCH),
            Reduction::LinearBloch
        );
        assert_eq!(
            reduce_to_linear(&WeightTriple::PSEUDO_BLOCH),
            Reduction::PseudoBloch
        );
        let g = WeightTriple::new(1.0, 1.0, 1.0).unwrap();
        assert_eq!(g.sigma(), 1.0);
        assert_eq!(reduce_to_linear(&g), Reduction::Generic);
        assert!(Reduction::Generic
            .linear_image(&GenBlochVector::default(), 1.0)
            .is_none());
    }

    #[test]
    fn pump_only_state_is_on_the_surface() {
        let k = MrConstants::new(4.0, 1.0);
        let e = Envelope::new(c(2.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
        for w in [WeightTriple::LINEAR_BLOCH, WeightTriple::PSEUDO_BLOCH] {
            let v = gen_bloch(&e, &w);
            assert_eq!((v.u, v.v), (0.0, 0.0));
            assert_eq!(surface_residual(&v, &w, &k).unwrap(), 0.0);
        }
    }

    #[test]
    fn off_manifold_is_rejected() {
        let k = MrConstants::new(1.0, 1.0);
        let v = GenBlochVector {
            u: 0.0,
            v: 0.0,
            w: 5.0,
        };
        assert!(matches!(
            surface_residual(&v, &WeightTriple::LINEAR_BLOCH, &k),
            Err(Error::OffManifold { .. })
        ));
    }

    fn random_env(rng: &mut ChaCha8Rng) -> Envelope {
        let mut a = || c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        Envelope::new(a(), a(), a())
    }

    #[test]
    fn product_form_differs_from_intensity_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let w = WeightTriple::new(1.0, 1.0, 1.0).unwrap();
        let mut max_gap: f64 = 0.0;
        for _ in 0..100 {
            let e = random_env(&mut rng);
            let k = crate::coupled_wave::manley_rowe(&e);
            let i = e.intensities();
            let v = gen_bloch(&e, &w);
            max_gap = max_gap.max((product_form(v.w, &w, &k) - i[0] * i[1] * i[2]).abs());
        }
        assert!(max_gap > 1e-3);
    }

    #[test]
    fn compositional_identity() {
        let procs = [
            Process::new(ProcessKind::Sfg, MrConstants::new(10.0, 1.0)).unwrap(),
            Process::new(ProcessKind::Dfg, MrConstants::new(1.0, 2.0)).unwrap(),
            Process::new(ProcessKind::Opa, MrConstants::new(10.0, 11.0)).unwrap(),
        ];
        let w = WeightTriple::new(0.3, -0.7, 1.1).unwrap();
        for p in procs {
            let top = p.half_period().min(4.0);
            for iu in 0..15 {
                for ib in 0..15 {
                    let st = ReducedState {
                        u: -0.5 + (top + 1.0) * iu as f64 / 14.0,
                        beta: -3.0 + 6.0 * ib as f64 / 14.0,
                    };
                    let a = from_reduced(&p, st, &w).unwrap();
                    let b = gen_bloch(&p.envelope(st).unwrap(), &w);
                    let d = (a.u - b.u)
                        .abs()
                        .max((a.v - b.v).abs())
                        .max((a.w - b.w).abs());
                    assert!(d < 1e-12, "{:?} {st:?} {d}", p.kind());
                }
            }
        }
    }

    #[test]
    fn stationary_branch_is_a_generatrix() {
        let p = Process::new(ProcessKind::Sfg, MrConstants::new(10.0, 1.0)).unwrap();
        let pts: Vec<_> = (-10..=10)
            .map(|k| {
                let st = p
                    .stationary_state(Branch::Minus, k as f64, Sign::Plus, None)
                    .unwrap();
                from_reduced(&p, st, &WeightTriple::LINEAR_BLOCH).unwrap()
            })
            .collect();
        let dev = geodesic_check(&pts, std::f64::consts::PI, 1e-12).unwrap();
        assert!(dev < 1e-10);
        assert!(geodesic_check(&[GenBlochVector::default()], 0.0, 1e-12).is_err());
    }

    #[test]
    fn mesh_lies_on_surface() {
        let k = MrConstants::new(10.0, 1.0);
        let w = WeightTriple::LINEAR_BLOCH;
        let mesh = surface_mesh(&w, &k, 9, 7).unwrap();
        assert_eq!(mesh.len(), 63);
        for m in &mesh {
            let r = surface_residual(
                &GenBlochVector {
                    u: m.u,
                    v: m.v,
                    w: m.w,
                },
                &w,
                &k,
            )
            .unwrap();
            assert!(r.abs() < 1e-12);
        }
        let mut buf = Vec::new();
        write_mesh_csv(&mut buf, &mesh).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 64);
    }

    proptest! {
        #[test]
        fn w_is_linear_in_i3(seed in any::<u64>(), a1 in -2.0f64..2.0, a2 in -2.0f64..2.0, a3 in -2.0f64..2.0) {
            prop_assume!((a1 + a2 - a3).abs() > 0.1);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let e = random_env(&mut rng);
            let w = WeightTriple::new(a1, a2, a3).unwrap();
            let k = crate::coupled_wave::manley_rowe(&e);
            let v = gen_bloch(&e, &w);
            let i3 = e.intensities()[2];
            prop_assert!((w.roots(&k).w3 - v.w - w.sigma() * i3).abs() < 1e-12 * (1.0 + v.w.abs()) * 10.0);
            let r = surface_residual(&v, &w, &k).unwrap();
            prop_assert!(r.abs() < 1e-10);
        }
    }
}

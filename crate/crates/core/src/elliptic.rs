//! Jacobi elliptic functions for any real parameter, their values at
//! pure-imaginary arguments, and the `J` combinations that drive the reduced
//! wave-mixing dynamics.
//!
//! Parameter convention: `m = k²`. For `0 < m < 1` the triple is computed by
//! the descending Gauss (Landen) transformation; `m < 0` and `m > 1` are
//! mapped into `(0, 1)` by the negative- and reciprocal-parameter
//! transformations, and `m ∈ {0, 1}` use the circular and hyperbolic closed
//! forms.
//!
//! ```text
//! J±(u) = sn·dn/cn ± dn·cn/sn ∓ m·cn·sn/dn
//! ```
//!
//! `J−` is the SFG/DFG/SHG coupling function. For imaginary arguments we
//! expose both `i·J+(iu)` ([`j_tilde`]) and `i·J−(iu)` ([`j_tilde_minus`]);
//! only the latter is consistent with the coupled-wave equations for the
//! OPA parameterization (see `adiabatic`).

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};

/// Default distance in `u` below which a `J` evaluation is reported as a pole.
pub const DEFAULT_POLE_TOL: f64 = 1e-9;

// Gauss transformation stops once |a - b| <= GAUSS_TOL·a; the next mean is
// then exact to ~GAUSS_TOL²/8.
const GAUSS_TOL: f64 = 1e-8;
const MAX_GAUSS_STEPS: usize = 16;

/// `(sn, cn, dn)` evaluated at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiTriple<T> {
    pub sn: T,
    pub cn: T,
    pub dn: T,
}

impl JacobiTriple<f64> {
    /// `(|sn² + cn² − 1|, |dn² + m·sn² − 1|)`.
    pub fn identity_residuals(&self, m: f64) -> (f64, f64) {
        let s2 = self.sn * self.sn;
        (
            (s2 + self.cn * self.cn - 1.0).abs(),
            (self.dn * self.dn + m * s2 - 1.0).abs(),
        )
    }

    /// Derivatives `(cn·dn, −sn·dn, −m·sn·cn)` with respect to the argument.
    pub fn derivatives(&self, m: f64) -> [f64; 3] {
        [
            self.cn * self.dn,
            -self.sn * self.dn,
            -m * self.sn * self.cn,
        ]
    }
}

impl JacobiTriple<Complex64> {
    pub fn identity_residuals(&self, m: f64) -> (f64, f64) {
        let s2 = self.sn * self.sn;
        (
            (s2 + self.cn * self.cn - 1.0).norm(),
            (self.dn * self.dn + m * s2 - 1.0).norm(),
        )
    }
}

/// Arithmetic–geometric mean of two positive numbers.
pub fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        let next = 0.5 * (a + b);
        if (a - b).abs() <= 4.0 * f64::EPSILON * next {
            return next;
        }
        b = (a * b).sqrt();
        a = next;
    }
    0.5 * (a + b)
}

/// Complete elliptic integral of the first kind,
/// `K(m) = ∫₀^{π/2} dφ / √(1 − m sin²φ)`, for `m < 1`.
pub fn complete_k(m: f64) -> Result<f64> {
    if !m.is_finite() {
        return Err(domain("K(m)", format!("non-finite parameter {m}")));
    }
    if m >= 1.0 {
        return Err(domain("K(m)", format!("K diverges for m >= 1 (m = {m})")));
    }
    if m == 0.0 {
        return Ok(FRAC_PI_2);
    }
    Ok(FRAC_PI_2 / agm(1.0, (1.0 - m).sqrt()))
}

/// `K'(m) = K(1 − m)`, defined for `m > 0`.
pub fn complete_k_prime(m: f64) -> Result<f64> {
    if !m.is_finite() || m <= 0.0 {
        return Err(domain("K'(m)", format!("requires m > 0 (m = {m})")));
    }
    complete_k(1.0 - m)
}

/// Distance between consecutive zeros of `sn(·, m)` on the real axis is twice
/// this value. Equals `K(m)` for `m < 1`, `K(1/m)/√m` for `m > 1`, and is
/// infinite at `m = 1`.
pub fn real_quarter_period(m: f64) -> Result<f64> {
    if !m.is_finite() {
        return Err(domain(
            "quarter period",
            format!("non-finite parameter {m}"),
        ));
    }
    if m < 1.0 {
        complete_k(m)
    } else if m == 1.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(complete_k(1.0 / m)? / m.sqrt())
    }
}

/// Period data of a parameterization in the real variable `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodInfo {
    /// `K(m)`; absent when `m >= 1`.
    pub quarter_period_k: Option<f64>,
    /// `K'(m) = K(1 − m)`; absent when `m <= 0`.
    pub complementary_k_prime: Option<f64>,
    /// Length of the interval `[0, T/2]` swept by the parameterization.
    pub half_period: f64,
}

impl PeriodInfo {
    fn base(m: f64) -> (Option<f64>, Option<f64>) {
        (complete_k(m).ok(), complete_k_prime(m).ok())
    }

    /// Real-argument parameterizations (SFG, DFG, SHG): `T/2 = K(m)`.
    pub fn real_argument(m: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&m) {
            return Err(domain(
                "period info",
                format!("real-argument parameterization needs 0 <= m <= 1 (m = {m})"),
            ));
        }
        let (k, kp) = Self::base(m);
        Ok(Self {
            quarter_period_k: k,
            complementary_k_prime: kp,
            half_period: real_quarter_period(m)?,
        })
    }

    /// Imaginary-argument parameterization (OPA): `T/2` is the first zero of
    /// `dn(u, 1 − m)` on the positive real axis (first pole of `J̃`), i.e.
    /// `K(1/(1−m))/√(1−m)` for `m < 0` and infinite at `m = 0`.
    pub fn imaginary_argument(m: f64) -> Result<Self> {
        if !m.is_finite() || m > 0.0 {
            return Err(domain(
                "period info",
                format!("imaginary-argument parameterization needs m <= 0 (m = {m})"),
            ));
        }
        let (k, kp) = Self::base(m);
        Ok(Self {
            quarter_period_k: k,
            complementary_k_prime: kp,
            half_period: real_quarter_period(1.0 - m)?,
        })
    }
}

/// Descending Gauss transformation for `0 < m < 1`.
fn gauss_sncndn(u: f64, m: f64) -> (f64, f64, f64) {
    if u.abs() < 1e-100 {
        return (u, 1.0, 1.0);
    }
    let mut em = [0.0; MAX_GAUSS_STEPS];
    let mut en = [0.0; MAX_GAUSS_STEPS];
    let mut emc = 1.0 - m;
    let mut a = 1.0;
    let mut c = 1.0;
    let mut last = 0;
    for i in 0..MAX_GAUSS_STEPS {
        last = i;
        em[i] = a;
        emc = emc.sqrt();
        en[i] = emc;
        c = 0.5 * (a + emc);
        if (a - emc).abs() <= GAUSS_TOL * a {
            break;
        }
        emc *= a;
        a = c;
    }
    let v = u * c;
    let (mut sn, mut cn) = v.sin_cos();
    let mut dn = 1.0;
    if sn != 0.0 {
        let mut a = cn / sn;
        c *= a;
        for i in (0..=last).rev() {
            let b = em[i];
            a *= c;
            c *= dn;
            dn = (en[i] + a) / (b + a);
            a = c / b;
        }
        let r = 1.0 / (c * c + 1.0).sqrt();
        sn = r.copysign(sn);
        cn = c * sn;
    }
    (sn, cn, dn)
}

/// Jacobi elliptic functions `(sn, cn, dn)(u | m)` for any finite real `m`.
pub fn jacobi(u: f64, m: f64) -> Result<JacobiTriple<f64>> {
    if !u.is_finite() || !m.is_finite() {
        return Err(domain(
            "jacobi",
            format!("non-finite input (u = {u}, m = {m})"),
        ));
    }
    let (sn, cn, dn) = if m == 0.0 {
        let (s, c) = u.sin_cos();
        (s, c, 1.0)
    } else if m == 1.0 {
        let sech = 1.0 / u.cosh();
        (u.tanh(), sech, sech)
    } else if m > 0.0 && m < 1.0 {
        gauss_sncndn(u, m)
    } else if m < 0.0 {
        // sn(u|m) = sd(v|μ)/√(1−m), cn = cd(v|μ), dn = nd(v|μ),
        // with μ = −m/(1−m) and v = u√(1−m).
        let scale = (1.0 - m).sqrt();
        let mu = -m / (1.0 - m);
        let t = jacobi(u * scale, mu)?;
        (t.sn / (t.dn * scale), t.cn / t.dn, 1.0 / t.dn)
    } else {
        // sn(u|m) = sn(ku|1/m)/k, cn = dn(ku|1/m), dn = cn(ku|1/m), k = √m.
        let k = m.sqrt();
        let t = jacobi(k * u, 1.0 / m)?;
        (t.sn / k, t.dn, t.cn)
    };
    Ok(JacobiTriple { sn, cn, dn })
}

/// Which Jacobi function a zero query refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacobiFn {
    Sn,
    Cn,
    Dn,
}

/// Nearest real zero of `sn`, `cn` or `dn` at parameter `m`, if any exists.
pub fn nearest_zero(f: JacobiFn, u: f64, m: f64) -> Result<Option<f64>> {
    let q = real_quarter_period(m)?;
    let odd = |q: f64| {
        let n = ((u / q - 1.0) / 2.0).round();
        (2.0 * n + 1.0) * q
    };
    Ok(match f {
        JacobiFn::Sn if q.is_infinite() => Some(0.0),
        JacobiFn::Sn => Some(2.0 * q * (u / (2.0 * q)).round()),
        JacobiFn::Cn if m < 1.0 => Some(odd(q)),
        JacobiFn::Dn if m > 1.0 => Some(odd(q)),
        _ => None,
    })
}

fn check_pole(what: &'static str, f: JacobiFn, u: f64, m: f64, tol: f64) -> Result<()> {
    if let Some(z) = nearest_zero(f, u, m)? {
        let distance = (u - z).abs();
        if distance < tol {
            return Err(Error::Pole {
                what,
                location: z,
                distance,
            });
        }
    }
    Ok(())
}

/// `(sn, cn, dn)(iu | m)` via Jacobi's imaginary transformation:
/// `sn(iu|m) = i·sc(u|1−m)`, `cn(iu|m) = nc(u|1−m)`, `dn(iu|m) = dc(u|1−m)`.
pub fn jacobi_imag(u: f64, m: f64) -> Result<JacobiTriple<Complex64>> {
    jacobi_imag_with_tol(u, m, DEFAULT_POLE_TOL)
}

pub fn jacobi_imag_with_tol(u: f64, m: f64, pole_tol: f64) -> Result<JacobiTriple<Complex64>> {
    let mc = 1.0 - m;
    check_pole("jacobi(iu): cn(u, 1-m)", JacobiFn::Cn, u, mc, pole_tol)?;
    let t = jacobi(u, mc)?;
    Ok(JacobiTriple {
        sn: Complex64::new(0.0, t.sn / t.cn),
        cn: Complex64::new(1.0 / t.cn, 0.0),
        dn: Complex64::new(t.dn / t.cn, 0.0),
    })
}

/// The four `J` combinations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JFunction {
    /// `J−(u) = sn·dn/cn − dn·cn/sn + m·cn·sn/dn`.
    Minus,
    /// `J+(u) = sn·dn/cn + dn·cn/sn − m·cn·sn/dn`.
    Plus,
    /// `i·J+(iu)`, real for real `u`.
    ImagPlus,
    /// `i·J−(iu)`, real for real `u`.
    ImagMinus,
}

/// Value and `u`-derivative of a `J` function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JValue {
    pub value: f64,
    pub derivative: f64,
}

// (n/q, (n'q − nq')/q²)
fn quotient(n: f64, dn: f64, q: f64, dq: f64) -> (f64, f64) {
    (n / q, (dn * q - n * dq) / (q * q))
}

impl JFunction {
    fn name(self) -> &'static str {
        match self {
            Self::Minus => "J-",
            Self::Plus => "J+",
            Self::ImagPlus => "iJ+(iu)",
            Self::ImagMinus => "iJ-(iu)",
        }
    }

    /// Evaluates the function and its analytic derivative.
    pub fn eval(self, u: f64, m: f64) -> Result<JValue> {
        self.eval_with_tol(u, m, DEFAULT_POLE_TOL)
    }

    pub fn eval_with_tol(self, u: f64, m: f64, pole_tol: f64) -> Result<JValue> {
        match self {
            Self::Minus | Self::Plus => {
                let name = self.name();
                check_pole(name, JacobiFn::Sn, u, m, pole_tol)?;
                check_pole(name, JacobiFn::Cn, u, m, pole_tol)?;
                if m != 0.0 {
                    check_pole(name, JacobiFn::Dn, u, m, pole_tol)?;
                }
                let t = jacobi(u, m)?;
                let (s, c, d) = (t.sn, t.cn, t.dn);
                let [ds, dc, dd] = t.derivatives(m);
                let t1 = quotient(s * d, ds * d + s * dd, c, dc);
                let t2 = quotient(d * c, dd * c + d * dc, s, ds);
                let t3 = quotient(m * c * s, m * (dc * s + c * ds), d, dd);
                let sign = if self == Self::Minus { 1.0 } else { -1.0 };
                Ok(JValue {
                    value: t1.0 - sign * (t2.0 - t3.0),
                    derivative: t1.1 - sign * (t2.1 - t3.1),
                })
            }
            Self::ImagPlus | Self::ImagMinus => {
                let name = self.name();
                let mc = 1.0 - m;
                check_pole(name, JacobiFn::Sn, u, mc, pole_tol)?;
                check_pole(name, JacobiFn::Cn, u, mc, pole_tol)?;
                if m != 0.0 {
                    check_pole(name, JacobiFn::Dn, u, mc, pole_tol)?;
                }
                let t = jacobi(u, mc)?;
                let (s, c, d) = (t.sn, t.cn, t.dn);
                let [ds, dc, dd] = t.derivatives(mc);
                // R1 = d/(cs), R2 = m·s/(cd), R3 = s·d/c
                let r1 = quotient(d, dd, c * s, dc * s + c * ds);
                let r2 = quotient(m * s, m * ds, c * d, dc * d + c * dd);
                let r3 = quotient(s * d, ds * d + s * dd, c, dc);
                Ok(if self == Self::ImagPlus {
                    JValue {
                        value: r1.0 + r2.0 - r3.0,
                        derivative: r1.1 + r2.1 - r3.1,
                    }
                } else {
                    JValue {
                        value: -(r1.0 + r2.0 + r3.0),
                        derivative: -(r1.1 + r2.1 + r3.1),
                    }
                })
            }
        }
    }
}

/// `J−(u)`, the SFG coupling function.
pub fn j_minus(u: f64, m: f64) -> Result<f64> {
    Ok(JFunction::Minus.eval(u, m)?.value)
}

pub fn dj_minus(u: f64, m: f64) -> Result<f64> {
    Ok(JFunction::Minus.eval(u, m)?.derivative)
}

/// `J̃(u) = i·J+(iu)`.
pub fn j_tilde(u: f64, m: f64) -> Result<f64> {
    Ok(JFunction::ImagPlus.eval(u, m)?.value)
}

pub fn dj_tilde(u: f64, m: f64) -> Result<f64> {
    Ok(JFunction::ImagPlus.eval(u, m)?.derivative)
}

/// `i·J−(iu)`, the coupling function of the OPA reduced dynamics.
pub fn j_tilde_minus(u: f64, m: f64) -> Result<f64> {
    Ok(JFunction::ImagMinus.eval(u, m)?.value)
}

pub fn dj_tilde_minus(u: f64, m: f64) -> Result<f64> {
    Ok(JFunction::ImagMinus.eval(u, m)?.derivative)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Gauss–Legendre (5 nodes) on the defining integral.
    fn k_quadrature(m: f64) -> f64 {
        const X: [f64; 5] = [
            0.0,
            -0.538_469_310_105_683_1,
            0.538_469_310_105_683_1,
            -0.906_179_845_938_664,
            0.906_179_845_938_664,
        ];
        const W: [f64; 5] = [
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_5,
            0.478_628_670_499_366_5,
            0.236_926_885_056_189_1,
            0.236_926_885_056_189_1,
        ];
        let panels = 400;
        let h = FRAC_PI_2 / panels as f64;
        let mut sum = 0.0;
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * h;
            for (x, w) in X.iter().zip(W) {
                let phi = mid + 0.5 * h * x;
                sum += w * 0.5 * h / (1.0 - m * phi.sin().powi(2)).sqrt();
            }
        }
        sum
    }

    #[test]
    fn k_matches_quadrature() {
        assert_eq!(complete_k(0.0).unwrap(), FRAC_PI_2);
        for m in [0.5, -1.0, 0.9, -5.0, 0.99] {
            let k = complete_k(m).unwrap();
            let q = k_quadrature(m);
            assert!(((k - q) / q).abs() < 1e-13, "m = {m}: {k} vs {q}");
        }
    }

    #[test]
    fn k_domain() {
        assert!(complete_k(1.0).is_err());
        assert!(complete_k(1.5).is_err());
        assert!(complete_k(f64::NAN).is_err());
        assert!(complete_k_prime(0.0).is_err());
        assert_eq!(complete_k_prime(1.0).unwrap(), FRAC_PI_2);
        assert_eq!(complete_k_prime(0.5).unwrap(), complete_k(0.5).unwrap());
        assert_eq!(
            complete_k_prime(0.9).unwrap(),
            complete_k(1.0 - 0.9).unwrap()
        );
    }

    #[test]
    fn circular_and_hyperbolic_limits() {
        for u in [-2.0, -0.3, 0.0, 0.7, 3.0] {
            let t = jacobi(u, 0.0).unwrap();
            assert_eq!((t.sn, t.cn, t.dn), (u.sin(), u.cos(), 1.0));
            let t = jacobi(u, 1.0).unwrap();
            assert!((t.sn - u.tanh()).abs() < 1e-15);
            assert!((t.cn - 1.0 / u.cosh()).abs() < 1e-15);
            assert!((t.dn - 1.0 / u.cosh()).abs() < 1e-15);
        }
    }

    #[test]
    fn quarter_period_values() {
        for m in [-2.0, -0.5, 0.1, 0.3, 0.9, 0.99, 0.999_999] {
            let k = real_quarter_period(m).unwrap();
            let t = jacobi(k, m).unwrap();
            assert!((t.sn - 1.0).abs() < 1e-11, "m = {m}");
            assert!(t.cn.abs() < 1e-11, "m = {m}");
            assert!((t.dn - (1.0 - m).sqrt()).abs() < 1e-11, "m = {m}");
        }
    }

    #[test]
    fn reciprocal_parameter_has_dn_zeros() {
        let m = 2.5;
        let q = real_quarter_period(m).unwrap();
        let t = jacobi(q, m).unwrap();
        assert!(t.dn.abs() < 1e-12);
        assert!((t.sn - 1.0 / m.sqrt()).abs() < 1e-12);
        assert_eq!(nearest_zero(JacobiFn::Cn, 0.3, m).unwrap(), None);
        assert!(
            (nearest_zero(JacobiFn::Dn, 3.0 * q + 0.1, m)
                .unwrap()
                .unwrap()
                - 3.0 * q)
                .abs()
                < 1e-12
        );
    }

    #[test]
    fn non_finite_inputs_rejected() {
        assert!(jacobi(f64::NAN, 0.5).is_err());
        assert!(jacobi(0.5, f64::INFINITY).is_err());
    }

    #[test]
    fn imaginary_argument_at_origin_and_circular_limit() {
        let t = jacobi_imag(0.0, 0.37).unwrap();
        assert_eq!(t.sn, Complex64::new(0.0, 0.0));
        assert_eq!(t.cn, Complex64::new(1.0, 0.0));
        assert_eq!(t.dn, Complex64::new(1.0, 0.0));
        for u in [0.2, 1.0, 2.5] {
            let t = jacobi_imag(u, 0.0).unwrap();
            assert!((t.sn - Complex64::new(0.0, u.sinh())).norm() < 1e-14 * u.cosh());
            assert!((t.cn.re - u.cosh()).abs() < 1e-14 * u.cosh());
            assert!((t.dn.re - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn imaginary_argument_pole() {
        let m = 0.4;
        let pole = complete_k(1.0 - m).unwrap();
        match jacobi_imag(pole + 1e-12, m) {
            Err(Error::Pole { location, .. }) => assert!((location - pole).abs() < 1e-14),
            other => panic!("expected pole, got {other:?}"),
        }
        assert!(jacobi_imag(pole + 1e-6, m).is_ok());
        // m < 0 has no real pole
        assert!(jacobi_imag(50.0, -0.3).is_ok());
    }

    #[test]
    fn period_info() {
        let p = PeriodInfo::real_argument(0.3).unwrap();
        assert_eq!(p.half_period, complete_k(0.3).unwrap());
        assert!(PeriodInfo::real_argument(1.0)
            .unwrap()
            .half_period
            .is_infinite());
        let p = PeriodInfo::imaginary_argument(-0.1).unwrap();
        let t = jacobi(p.half_period, 1.1).unwrap();
        assert!(t.dn.abs() < 1e-12);
        assert!(p.complementary_k_prime.is_none());
        assert!(PeriodInfo::imaginary_argument(0.0)
            .unwrap()
            .half_period
            .is_infinite());
        assert!(PeriodInfo::imaginary_argument(0.2).is_err());
    }

    #[test]
    fn j_minus_circular_closed_form() {
        for i in 1..60 {
            let u = i as f64 * 0.025;
            let j = j_minus(u, 0.0).unwrap();
            let expect = u.tan() - 1.0 / u.tan();
            assert!((j - expect).abs() < 1e-12 * (1.0 + expect.abs()));
            assert!((j + 2.0 / (2.0 * u).tan()).abs() < 1e-12 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn j_minus_hyperbolic_closed_form_and_asymptote() {
        for u in [0.1f64, 0.5, 1.0, 2.0, 4.0] {
            let t: f64 = u.tanh();
            let expect = (3.0 * t * t - 1.0) / t;
            assert!((j_minus(u, 1.0).unwrap() - expect).abs() < 1e-13);
        }
        assert!((j_minus(20.0, 1.0).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn j_tilde_closed_forms() {
        for u in [0.05f64, 0.3, 1.0, 2.0] {
            let s = (2.0 * u).sinh();
            assert!((j_tilde(u, 0.0).unwrap() - 2.0 / s).abs() < 1e-12 * (1.0 + 2.0 / s));
            let c = 1.0 / (2.0 * u).tanh();
            assert!((j_tilde_minus(u, 0.0).unwrap() + 2.0 * c).abs() < 1e-12 * (1.0 + c));
        }
    }

    #[test]
    fn j_tilde_matches_complex_evaluation() {
        for &m in &[-0.5, -0.1, 0.0, 0.3] {
            for i in 1..20 {
                let u = 0.1 * i as f64;
                let Ok(t) = jacobi_imag(u, m) else { continue };
                let (s, c, d) = (t.sn, t.cn, t.dn);
                let jp = s * d / c + d * c / s - m * c * s / d;
                let jm = s * d / c - d * c / s + m * c * s / d;
                let i_unit = Complex64::new(0.0, 1.0);
                let (a, b) = (i_unit * jp, i_unit * jm);
                let Ok(plus) = j_tilde(u, m) else { continue };
                let minus = j_tilde_minus(u, m).unwrap();
                let scale = 1.0 + plus.abs() + minus.abs();
                assert!(a.im.abs() < 1e-12 * scale, "m={m} u={u}");
                assert!(b.im.abs() < 1e-12 * scale);
                assert!((a.re - plus).abs() < 1e-12 * scale);
                assert!((b.re - minus).abs() < 1e-12 * scale);
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        let kinds = [
            JFunction::Minus,
            JFunction::Plus,
            JFunction::ImagPlus,
            JFunction::ImagMinus,
        ];
        for kind in kinds {
            for &m in &[0.0f64, 0.3, 0.9, 1.0, -0.2, -1.5] {
                let m = if matches!(kind, JFunction::ImagPlus | JFunction::ImagMinus) {
                    -m.abs()
                } else {
                    m.abs()
                };
                for i in 1..30 {
                    let u = 0.05 * i as f64;
                    let (Ok(a), Ok(b), Ok(v)) =
                        (kind.eval(u + h, m), kind.eval(u - h, m), kind.eval(u, m))
                    else {
                        continue;
                    };
                    if v.value.abs() > 50.0 || v.derivative.abs() > 100.0 {
                        continue;
                    }
                    let fd = (a.value - b.value) / (2.0 * h);
                    let tol = 1e-7 * (1.0 + v.derivative.abs());
                    assert!(
                        (fd - v.derivative).abs() < tol,
                        "{kind:?} m={m} u={u}: {fd} vs {}",
                        v.derivative
                    );
                }
            }
        }
    }

    #[test]
    fn j_poles_are_typed() {
        assert!(matches!(j_minus(0.0, 0.5), Err(Error::Pole { .. })));
        let k = complete_k(0.5).unwrap();
        match j_minus(k + 1e-10, 0.5) {
            Err(Error::Pole { location, .. }) => assert!((location - k).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
        let half = PeriodInfo::imaginary_argument(-0.1).unwrap().half_period;
        assert!(matches!(j_tilde_minus(half, -0.1), Err(Error::Pole { .. })));
        assert!(j_tilde_minus(half - 1e-3, -0.1).is_ok());
    }
}

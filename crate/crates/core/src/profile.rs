//! Phase-mismatch profiles `ΔΓ(ξ)` and propagation spans.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::linspace;

/// Interpolation rule for tabulated profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    #[default]
    Linear,
    /// Monotone piecewise-cubic Hermite (Fritsch–Carlson slopes).
    Pchip,
}

/// Normalized phase mismatch as a function of propagation distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MismatchProfile {
    Constant {
        value: f64,
    },
    /// `slope · (ξ − center)`.
    Linear {
        slope: f64,
        center: f64,
    },
    /// `amplitude · tanh((ξ − center) / width)`.
    Tanh {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// Samples held constant beyond the table ends.
    Tabulated {
        xi: Vec<f64>,
        values: Vec<f64>,
        #[serde(default)]
        interpolation: Interpolation,
    },
}

impl MismatchProfile {
    pub fn constant(value: f64) -> Self {
        Self::Constant { value }
    }

    pub fn linear(slope: f64, center: f64) -> Self {
        Self::Linear { slope, center }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match self {
            Self::Constant { value } if finite(&[*value]) => Ok(()),
            Self::Linear { slope, center } if finite(&[*slope, *center]) => Ok(()),
            Self::Tanh {
                amplitude,
                center,
                width,
            } if finite(&[*amplitude, *center, *width]) && *width != 0.0 => Ok(()),
            Self::Tabulated { xi, values, .. } => {
                if xi.len() < 2 || xi.len() != values.len() {
                    return Err(Error::Invalid(format!(
                        "tabulated profile needs matching xi/values with >= 2 samples (got {} and {})",
                        xi.len(),
                        values.len()
                    )));
                }
                if !finite(xi) || !finite(values) {
                    return Err(Error::Invalid(
                        "tabulated profile has non-finite samples".into(),
                    ));
                }
                if xi.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Invalid(
                        "tabulated profile xi must be strictly increasing".into(),
                    ));
                }
                Ok(())
            }
            other => Err(Error::Invalid(format!(
                "invalid profile parameters: {other:?}"
            ))),
        }
    }

    /// Validates the profile and checks that a tabulated profile covers the span.
    pub fn validate_span(&self, start: f64, end: f64) -> Result<()> {
        self.validate()?;
        if let Self::Tabulated { xi, .. } = self {
            let (lo, hi) = (start.min(end), start.max(end));
            if lo < xi[0] || hi > xi[xi.len() - 1] {
                return Err(Error::Invalid(format!(
                    "span [{lo}, {hi}] exceeds tabulated range [{}, {}]",
                    xi[0],
                    xi[xi.len() - 1]
                )));
            }
        }
        Ok(())
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x).0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.eval(x).1
    }

    /// `(ΔΓ, dΔΓ/dξ)` at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        match self {
            Self::Constant { value } => (*value, 0.0),
            Self::Linear { slope, center } => (slope * (x - center), *slope),
            Self::Tanh {
                amplitude,
                center,
                width,
            } => {
                let t = ((x - center) / width).tanh();
                (amplitude * t, amplitude * (1.0 - t * t) / width)
            }
            Self::Tabulated {
                xi,
                values,
                interpolation,
            } => tabulated(xi, values, *interpolation, x),
        }
    }
}

fn tabulated(xs: &[f64], ys: &[f64], rule: Interpolation, x: f64) -> (f64, f64) {
    let n = xs.len();
    if x <= xs[0] {
        return (ys[0], 0.0);
    }
    if x >= xs[n - 1] {
        return (ys[n - 1], 0.0);
    }
    let i = xs.partition_point(|&v| v <= x) - 1;
    let h = xs[i + 1] - xs[i];
    let slope = (ys[i + 1] - ys[i]) / h;
    match rule {
        Interpolation::Linear => (ys[i] + slope * (x - xs[i]), slope),
        Interpolation::Pchip => {
            let d0 = pchip_slope(xs, ys, i);
            let d1 = pchip_slope(xs, ys, i + 1);
            let t = (x - xs[i]) / h;
            let (t2, t3) = (t * t, t * t * t);
            let value = (2.0 * t3 - 3.0 * t2 + 1.0) * ys[i]
                + (t3 - 2.0 * t2 + t) * h * d0
                + (-2.0 * t3 + 3.0 * t2) * ys[i + 1]
                + (t3 - t2) * h * d1;
            let deriv = (6.0 * t2 - 6.0 * t) * ys[i] / h
                + (3.0 * t2 - 4.0 * t + 1.0) * d0
                + (-6.0 * t2 + 6.0 * t) * ys[i + 1] / h
                + (3.0 * t2 - 2.0 * t) * d1;
            (value, deriv)
        }
    }
}

fn pchip_slope(xs: &[f64], ys: &[f64], k: usize) -> f64 {
    let n = xs.len();
    let secant = |j: usize| (ys[j + 1] - ys[j]) / (xs[j + 1] - xs[j]);
    if n == 2 {
        return secant(0);
    }
    let end_slope = |h0: f64, h1: f64, m0: f64, m1: f64| {
        let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
        if d.signum() != m0.signum() {
            0.0
        } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
            3.0 * m0
        } else {
            d
        }
    };
    if k == 0 {
        return end_slope(xs[1] - xs[0], xs[2] - xs[1], secant(0), secant(1));
    }
    if k == n - 1 {
        return end_slope(
            xs[n - 1] - xs[n - 2],
            xs[n - 2] - xs[n - 3],
            secant(n - 2),
            secant(n - 3),
        );
    }
    let (m0, m1) = (secant(k - 1), secant(k));
    if m0 * m1 <= 0.0 {
        return 0.0;
    }
    let (h0, h1) = (xs[k] - xs[k - 1], xs[k + 1] - xs[k]);
    let w1 = 2.0 * h1 + h0;
    let w2 = h1 + 2.0 * h0;
    (w1 + w2) / (w1 / m0 + w2 / m1)
}

/// Propagation interval sampled at `samples` evenly spaced points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Span {
    pub start: f64,
    pub end: f64,
    #[serde(default = "Span::default_samples")]
    pub samples: usize,
}

impl Span {
    fn default_samples() -> usize {
        601
    }

    pub fn new(start: f64, end: f64, samples: usize) -> Self {
        Self {
            start,
            end,
            samples,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.start.is_finite() || !self.end.is_finite() || self.end <= self.start {
            return Err(Error::Invalid(format!(
                "span must satisfy start < end (got [{}, {}])",
                self.start, self.end
            )));
        }
        if self.samples < 2 {
            return Err(Error::Invalid("span needs at least 2 samples".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        linspace(self.start, self.end, self.samples)
    }
}

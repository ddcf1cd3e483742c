//! Adaptive explicit Runge–Kutta integration (Dormand–Prince 8(5,3)).
//!
//! The solver advances a fixed-size real state `[f64; N]` and lands exactly
//! on every requested output abscissa, so sampled trajectories carry no
//! interpolation error. Integration may run forward or backward; the grid
//! only has to be strictly monotone.

mod dop853_tableau;

use crate::error::{Error, Result};
use dop853_tableau::{A, B, C, E3, E5, STAGES};

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const ERROR_EXPONENT: f64 = -1.0 / 8.0;

/// Local error control for [`solve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on |h|; `f64::INFINITY` for none.
    pub max_step: f64,
    /// Hard cap on accepted + rejected steps over the whole grid.
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            rel_tol: 1e-11,
            abs_tol: 1e-13,
            max_step: f64::INFINITY,
            max_steps: 20_000_000,
        }
    }
}

impl StepControl {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.rel_tol.is_finite()
            && self.abs_tol.is_finite()
            && self.max_step > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(format!(
                "tolerances must be positive and finite (rel {}, abs {}, max_step {})",
                self.rel_tol, self.abs_tol, self.max_step
            )))
        }
    }
}

fn rms<const N: usize>(v: &[f64; N]) -> f64 {
    if N == 0 {
        return 0.0;
    }
    (v.iter().map(|x| x * x).sum::<f64>() / N as f64).sqrt()
}

/// Integrates `dy/dx = f(x, y)` from `grid[0]` and returns the state at every
/// grid point (the first entry is `y0`).
pub fn solve<const N: usize, F>(
    mut f: F,
    grid: &[f64],
    y0: [f64; N],
    control: &StepControl,
) -> Result<Vec<[f64; N]>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    control.validate()?;
    if grid.is_empty() {
        return Err(Error::Invalid("empty output grid".into()));
    }
    if grid.iter().any(|x| !x.is_finite()) || y0.iter().any(|y| !y.is_finite()) {
        return Err(Error::Invalid(
            "non-finite grid point or initial state".into(),
        ));
    }
    let mut out = Vec::with_capacity(grid.len());
    out.push(y0);
    if grid.len() == 1 {
        return Ok(out);
    }
    let direction = (grid[1] - grid[0]).signum();
    if direction == 0.0 || grid.windows(2).any(|w| (w[1] - w[0]).signum() != direction) {
        return Err(Error::Invalid(
            "output grid must be strictly monotone".into(),
        ));
    }

    let mut x = grid[0];
    let mut y = y0;
    let mut fy = f(x, &y);
    let span = (grid[grid.len() - 1] - grid[0]).abs();
    let mut h_abs = initial_step(&mut f, x, &y, &fy, direction, span, control);
    let mut steps = 0usize;

    for &target in &grid[1..] {
        while (target - x) * direction > 0.0 {
            let min_step = 10.0 * (next_toward(x, direction) - x).abs();
            let remaining = (target - x).abs();
            let mut step_rejected = false;
            loop {
                steps += 1;
                if steps > control.max_steps {
                    return Err(Error::TooManySteps { xi: x });
                }
                if h_abs < min_step {
                    return Err(Error::StepUnderflow { xi: x });
                }
                let clipped = h_abs >= remaining;
                let h = if clipped { remaining } else { h_abs } * direction;
                let x_new = if clipped { target } else { x + h };
                let (y_new, err) = step(&mut f, x, &y, &fy, h, control);
                if err < 1.0 && err.is_finite() {
                    let mut factor = if err == 0.0 {
                        MAX_FACTOR
                    } else {
                        (SAFETY * err.powf(ERROR_EXPONENT)).min(MAX_FACTOR)
                    };
                    if step_rejected {
                        factor = factor.min(1.0);
                    }
                    // A clipped step says nothing about how large the next
                    // free step may be; keep the previous proposal in that case.
                    if !clipped {
                        h_abs = (h.abs() * factor).min(control.max_step);
                    } else {
                        h_abs = h_abs.max(h.abs() * factor).min(control.max_step);
                    }
                    x = x_new;
                    y = y_new;
                    fy = f(x, &y);
                    break;
                }
                let shrink = if err.is_finite() {
                    (SAFETY * err.powf(ERROR_EXPONENT)).max(MIN_FACTOR)
                } else {
                    MIN_FACTOR
                };
                h_abs = h.abs() * shrink;
                step_rejected = true;
            }
        }
        out.push(y);
    }
    Ok(out)
}

fn next_toward(x: f64, direction: f64) -> f64 {
    let bits = x.to_bits();
    if x == 0.0 {
        return f64::MIN_POSITIVE.copysign(direction);
    }
    let up = (x > 0.0) == (direction > 0.0);
    f64::from_bits(if up { bits + 1 } else { bits - 1 })
}

/// One DOP853 step; returns the eighth-order update and the scaled error norm.
fn step<const N: usize, F>(
    f: &mut F,
    x: f64,
    y: &[f64; N],
    fy: &[f64; N],
    h: f64,
    control: &StepControl,
) -> ([f64; N], f64)
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let mut k = [[0.0; N]; STAGES];
    k[0] = *fy;
    for s in 1..STAGES {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                for (yi, kji) in ys.iter_mut().zip(kj) {
                    *yi += h * a * kji;
                }
            }
        }
        k[s] = f(x + C[s] * h, &ys);
    }

    let mut y_new = *y;
    let mut err5 = [0.0; N];
    let mut err3 = [0.0; N];
    for (s, ks) in k.iter().enumerate() {
        for i in 0..N {
            y_new[i] += h * B[s] * ks[i];
            err5[i] += E5[s] * ks[i];
            err3[i] += E3[s] * ks[i];
        }
    }
    for i in 0..N {
        let scale = control.abs_tol + y[i].abs().max(y_new[i].abs()) * control.rel_tol;
        err5[i] /= scale;
        err3[i] /= scale;
    }
    let e5: f64 = err5.iter().map(|e| e * e).sum();
    let e3: f64 = err3.iter().map(|e| e * e).sum();
    let err = if e5 == 0.0 && e3 == 0.0 {
        0.0
    } else {
        h.abs() * e5 / ((e5 + 0.01 * e3) * N as f64).sqrt()
    };
    (y_new, err)
}

fn initial_step<const N: usize, F>(
    f: &mut F,
    x0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    direction: f64,
    span: f64,
    control: &StepControl,
) -> f64
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let scale = y0.map(|y| control.abs_tol + y.abs() * control.rel_tol);
    let scaled = |v: &[f64; N]| {
        let mut s = [0.0; N];
        for i in 0..N {
            s[i] = v[i] / scale[i];
        }
        rms(&s)
    };
    let d0 = scaled(y0);
    let d1 = scaled(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    }
    .min(span);
    let mut y1 = *y0;
    for i in 0..N {
        y1[i] += h0 * direction * f0[i];
    }
    let f1 = f(x0 + h0 * direction, &y1);
    let mut df = [0.0; N];
    for i in 0..N {
        df[i] = f1[i] - f0[i];
    }
    let d2 = scaled(&df) / h0;
    let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 8.0)
    };
    (100.0 * h0).min(h1).min(span).min(control.max_step)
}

/// Evenly spaced grid with `n >= 2` points including both endpoints.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (end - start) / (n - 1) as f64;
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        end
                    } else {
                        start + step * i as f64
                    }
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_one_period() {
        let grid = linspace(0.0, 2.0 * std::f64::consts::PI, 9);
        let ys = solve(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            &grid,
            [1.0, 0.0],
            &StepControl::default(),
        )
        .unwrap();
        for (x, y) in grid.iter().zip(&ys) {
            assert!((y[0] - x.cos()).abs() < 1e-10, "x = {x}");
            assert!((y[1] + x.sin()).abs() < 1e-10, "x = {x}");
        }
    }

    #[test]
    fn backward_integration() {
        let grid = [1.0, 0.5, 0.0];
        let ys = solve(
            |_, y: &[f64; 1]| [y[0]],
            &grid,
            [1.0_f64.exp()],
            &StepControl::default(),
        )
        .unwrap();
        assert!((ys[2][0] - 1.0).abs() < 1e-11);
    }

    #[test]
    fn zero_state_stays_zero() {
        let grid = linspace(0.0, 3.0, 4);
        let ys = solve(
            |_, y: &[f64; 3]| [y[1] * y[2], 0.0, 0.0],
            &grid,
            [0.0; 3],
            &StepControl::default(),
        )
        .unwrap();
        assert!(ys.iter().all(|y| y.iter().all(|v| *v == 0.0)));
    }

    #[test]
    fn error_shrinks_with_tolerance() {
        let exact = (-5.0f64).exp();
        let err_at = |tol: f64| {
            let ys = solve(
                |x, y: &[f64; 1]| [-2.0 * x * y[0]],
                &[0.0, 5.0f64.sqrt()],
                [1.0],
                &StepControl::with_tolerances(tol, tol * 1e-2),
            )
            .unwrap();
            (ys[1][0] - exact).abs()
        };
        assert!(err_at(1e-12) < err_at(1e-6));
    }

    #[test]
    fn blow_up_reports_underflow_location() {
        // y' = y^2, y(0) = 1 blows up at x = 1.
        let err = solve(
            |_, y: &[f64; 1]| [y[0] * y[0]],
            &[0.0, 2.0],
            [1.0],
            &StepControl::default(),
        )
        .unwrap_err();
        match err {
            Error::StepUnderflow { xi } | Error::TooManySteps { xi } => {
                assert!((xi - 1.0).abs() < 0.01, "xi = {xi}")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_non_monotone_grid() {
        let err = solve(
            |_, y: &[f64; 1]| *y,
            &[0.0, 1.0, 0.5],
            [1.0],
            &StepControl::default(),
        );
        assert!(matches!(err, Err(Error::Invalid(_))));
    }
}

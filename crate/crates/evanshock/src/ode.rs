//! Adaptive embedded Runge-Kutta-Fehlberg 4(5) integration.
//!
//! One integrator serves both the scalar profile equation and the complex
//! 3-vector shooting systems, through the small [`OdeState`] trait.

use crate::error::{Error, Result};
use crate::linalg3::CVec3;
use num_complex::Complex64;

// Fehlberg tableau.
const C: [f64; 5] = [1.0 / 4.0, 3.0 / 8.0, 12.0 / 13.0, 1.0, 1.0 / 2.0];
const A: [[f64; 5]; 5] = [
    [1.0 / 4.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 32.0, 9.0 / 32.0, 0.0, 0.0, 0.0],
    [1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0, 0.0, 0.0],
    [439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0, 0.0],
    [-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0],
];
const B5: [f64; 6] = [
    16.0 / 135.0,
    0.0,
    6656.0 / 12825.0,
    28561.0 / 56430.0,
    -9.0 / 50.0,
    2.0 / 55.0,
];
const B4: [f64; 6] = [
    25.0 / 216.0,
    0.0,
    1408.0 / 2565.0,
    2197.0 / 4104.0,
    -1.0 / 5.0,
    0.0,
];

pub trait OdeState: Clone {
    fn zeros_like(&self) -> Self;
    /// self += c * other
    fn add_scaled(&mut self, c: f64, other: &Self);
    /// max_i |e_i| / (atol + rtol * |y_i|), with `self` the error vector.
    fn scaled_error(&self, y: &Self, atol: f64, rtol: f64) -> f64;
    fn inf_norm(&self) -> f64;
}

impl OdeState for f64 {
    fn zeros_like(&self) -> Self {
        0.0
    }
    fn add_scaled(&mut self, c: f64, other: &Self) {
        *self += c * other;
    }
    fn scaled_error(&self, y: &Self, atol: f64, rtol: f64) -> f64 {
        self.abs() / (atol + rtol * y.abs())
    }
    fn inf_norm(&self) -> f64 {
        self.abs()
    }
}

impl OdeState for CVec3 {
    fn zeros_like(&self) -> Self {
        CVec3::zero()
    }
    fn add_scaled(&mut self, c: f64, other: &Self) {
        for i in 0..3 {
            self.0[i] += Complex64::new(c, 0.0) * other.0[i];
        }
    }
    fn scaled_error(&self, y: &Self, atol: f64, rtol: f64) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..3 {
            let e = self.0[i].norm() / (atol + rtol * y.0[i].norm());
            worst = worst.max(e);
        }
        worst
    }
    fn inf_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl OdeState for Vec<f64> {
    fn zeros_like(&self) -> Self {
        vec![0.0; self.len()]
    }
    fn add_scaled(&mut self, c: f64, other: &Self) {
        for (a, b) in self.iter_mut().zip(other) {
            *a += c * b;
        }
    }
    fn scaled_error(&self, y: &Self, atol: f64, rtol: f64) -> f64 {
        self.iter()
            .zip(y)
            .map(|(e, v)| e.abs() / (atol + rtol * v.abs()))
            .fold(0.0, f64::max)
    }
    fn inf_norm(&self) -> f64 {
        self.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct OdeOptions {
    pub atol: f64,
    pub rtol: f64,
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            atol: 1e-6,
            rtol: 1e-8,
            h_init: None,
            h_max: f64::INFINITY,
            h_min: 1e-14,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OdeSolution<S> {
    pub xs: Vec<f64>,
    pub ys: Vec<S>,
    pub n_accepted: usize,
    pub n_rejected: usize,
}

impl<S> OdeSolution<S> {
    pub fn last(&self) -> &S {
        self.ys.last().expect("solution has at least the initial node")
    }
}

/// Integrate y' = f(x, y) from x0 to x1 (either direction), recording every
/// accepted node.
pub fn integrate<S: OdeState>(
    mut f: impl FnMut(f64, &S) -> S,
    x0: f64,
    x1: f64,
    y0: S,
    opts: &OdeOptions,
) -> Result<OdeSolution<S>> {
    let span = x1 - x0;
    if span == 0.0 {
        return Ok(OdeSolution {
            xs: vec![x0],
            ys: vec![y0],
            n_accepted: 0,
            n_rejected: 0,
        });
    }
    let dir = span.signum();
    let mut h = opts
        .h_init
        .unwrap_or_else(|| (span.abs() / 100.0).min(opts.h_max).min(1e-2))
        .min(span.abs())
        .max(opts.h_min);

    let mut x = x0;
    let mut y = y0;
    let mut xs = vec![x];
    let mut ys = vec![y.clone()];
    let mut n_accepted = 0;
    let mut n_rejected = 0;

    for _ in 0..opts.max_steps {
        if (x1 - x) * dir <= 0.0 {
            return Ok(OdeSolution {
                xs,
                ys,
                n_accepted,
                n_rejected,
            });
        }
        let mut hstep = h.min((x1 - x).abs());
        let mut last_of_span = false;
        if hstep >= (x1 - x).abs() {
            hstep = (x1 - x).abs();
            last_of_span = true;
        }
        let hs = dir * hstep;

        let k1 = f(x, &y);
        let mut stage = |coeffs: &[f64], ks: &[&S], cfrac: f64| -> S {
            let mut yt = y.clone();
            for (c, k) in coeffs.iter().zip(ks) {
                yt.add_scaled(hs * c, k);
            }
            f(x + cfrac * hs, &yt)
        };
        let k2 = stage(&A[0][..1], &[&k1], C[0]);
        let k3 = stage(&A[1][..2], &[&k1, &k2], C[1]);
        let k4 = stage(&A[2][..3], &[&k1, &k2, &k3], C[2]);
        let k5 = stage(&A[3][..4], &[&k1, &k2, &k3, &k4], C[3]);
        let k6 = stage(&A[4][..5], &[&k1, &k2, &k3, &k4, &k5], C[4]);
        let ks = [&k1, &k2, &k3, &k4, &k5, &k6];

        let mut y5 = y.clone();
        for (b, k) in B5.iter().zip(ks) {
            y5.add_scaled(hs * b, k);
        }
        let mut err = y5.zeros_like();
        for ((b5, b4), k) in B5.iter().zip(B4).zip(ks) {
            err.add_scaled(hs * (b5 - b4), k);
        }
        let e = err.scaled_error(&y5, opts.atol, opts.rtol);

        if e <= 1.0 || hstep <= opts.h_min {
            x = if last_of_span { x1 } else { x + hs };
            y = y5;
            xs.push(x);
            ys.push(y.clone());
            n_accepted += 1;
        } else {
            n_rejected += 1;
        }

        let factor = if e > 0.0 {
            (0.9 * e.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h = (hstep * factor).clamp(opts.h_min, opts.h_max);
    }
    Err(Error::Integrator {
        x,
        reason: format!("step limit {} exceeded", opts.max_steps),
    })
}

/// Integrate and return only the final state.
pub fn integrate_to<S: OdeState>(
    f: impl FnMut(f64, &S) -> S,
    x0: f64,
    x1: f64,
    y0: S,
    opts: &OdeOptions,
) -> Result<S> {
    let sol = integrate(f, x0, x1, y0, opts)?;
    Ok(sol.ys.into_iter().next_back().expect("nonempty"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_matches_analytic() {
        let sol = integrate(
            |_, y: &f64| -y,
            0.0,
            2.0,
            1.0,
            &OdeOptions {
                atol: 1e-10,
                rtol: 1e-10,
                ..Default::default()
            },
        )
        .unwrap();
        let got = *sol.last();
        assert!((got - (-2.0_f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn backward_integration() {
        // y' = y, integrate from 1 back to 0: y(0) = y(1)/e
        let got = integrate_to(
            |_, y: &f64| *y,
            1.0,
            0.0,
            1.0,
            &OdeOptions {
                atol: 1e-12,
                rtol: 1e-12,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((got - (-1.0_f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn complex_rotation_closes() {
        // w' = i w over one period
        let rhs = |_: f64, w: &CVec3| {
            CVec3([
                Complex64::new(0.0, 1.0) * w.0[0],
                Complex64::ZERO,
                Complex64::ZERO,
            ])
        };
        let w0 = CVec3([Complex64::ONE, Complex64::ZERO, Complex64::ZERO]);
        let got = integrate_to(
            rhs,
            0.0,
            2.0 * std::f64::consts::PI,
            w0,
            &OdeOptions {
                atol: 1e-12,
                rtol: 1e-12,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((got.0[0] - Complex64::ONE).norm() < 1e-9);
    }

    #[test]
    fn tightening_tolerance_reduces_error() {
        let run = |tol: f64| {
            integrate_to(
                |x: f64, _: &f64| (x).cos(),
                0.0,
                10.0,
                0.0,
                &OdeOptions {
                    atol: tol,
                    rtol: tol,
                    ..Default::default()
                },
            )
            .unwrap()
        };
        let coarse = (run(1e-4) - 10.0_f64.sin()).abs();
        let fine = (run(1e-9) - 10.0_f64.sin()).abs();
        assert!(fine < coarse);
        assert!(fine < 1e-8);
    }

    #[test]
    fn step_limit_is_reported() {
        let err = integrate(
            |_, y: &f64| -y,
            0.0,
            1.0,
            1.0,
            &OdeOptions {
                max_steps: 3,
                h_max: 1e-6,
                ..Default::default()
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::Integrator { .. }));
    }
}

// Copyright 2026 The edgeburst Authors
// SPDX-License-Identifier: Apache-2.0

//! Dormand-Prince 5(4) integrator for complex linear systems.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

type C = Complex64;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dopri5Options {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Steps below this size are reported as a convergence failure.
    pub min_step: f64,
}

impl Default for Dopri5Options {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            max_steps: 10_000_000,
            min_step: 1e-12,
        }
    }
}

/// Adaptive stepper for `dy/dt = f(t, y)`; state is carried between calls so
/// a trajectory can be advanced piecewise to sample times.
pub struct Dopri5 {
    pub t: f64,
    pub y: Vec<C>,
    h: f64,
    opts: Dopri5Options,
    k: [Vec<C>; 7],
    fsal_valid: bool,
    tmp: Vec<C>,
    y_new: Vec<C>,
    steps: usize,
}

impl Dopri5 {
    pub fn new(t0: f64, y0: Vec<C>, h0: f64, opts: Dopri5Options) -> Self {
        let n = y0.len();
        let zero = || vec![C::new(0.0, 0.0); n];
        Self {
            t: t0,
            y: y0,
            h: h0,
            opts,
            k: [zero(), zero(), zero(), zero(), zero(), zero(), zero()],
            fsal_valid: false,
            tmp: zero(),
            y_new: zero(),
            steps: 0,
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    fn stage(&mut self, coeffs: &[(usize, f64)], h: f64) {
        let n = self.y.len();
        for i in 0..n {
            let mut acc = self.y[i];
            for &(j, a) in coeffs {
                acc += self.k[j][i] * (a * h);
            }
            self.tmp[i] = acc;
        }
    }

    /// Attempts one step of size `h`; returns the scaled error norm.
    fn try_step<F: FnMut(f64, &[C], &mut [C])>(&mut self, f: &mut F, h: f64) -> f64 {
        let t = self.t;
        if !self.fsal_valid {
            let (k0, y) = (&mut self.k[0], &self.y);
            f(t, y, k0);
            self.fsal_valid = true;
        }
        self.stage(&[(0, A21)], h);
        f(t + C2 * h, &self.tmp, &mut self.k[1]);
        self.stage(&[(0, A31), (1, A32)], h);
        f(t + C3 * h, &self.tmp, &mut self.k[2]);
        self.stage(&[(0, A41), (1, A42), (2, A43)], h);
        f(t + C4 * h, &self.tmp, &mut self.k[3]);
        self.stage(&[(0, A51), (1, A52), (2, A53), (3, A54)], h);
        f(t + C5 * h, &self.tmp, &mut self.k[4]);
        self.stage(&[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)], h);
        f(t + h, &self.tmp, &mut self.k[5]);
        self.stage(&[(0, A71), (2, A73), (3, A74), (4, A75), (5, A76)], h);
        std::mem::swap(&mut self.tmp, &mut self.y_new);
        f(t + h, &self.y_new, &mut self.k[6]);

        let n = self.y.len();
        let mut sum = 0.0;
        for i in 0..n {
            let k = &self.k;
            let err = (k[0][i] * E1
                + k[2][i] * E3
                + k[3][i] * E4
                + k[4][i] * E5
                + k[5][i] * E6
                + k[6][i] * E7)
                * h;
            let sc = self.opts.atol + self.opts.rtol * self.y[i].norm().max(self.y_new[i].norm());
            let r = err.norm() / sc;
            sum += r * r;
        }
        (sum / n.max(1) as f64).sqrt()
    }

    /// Takes one accepted step without passing `t_max`.
    pub fn step<F: FnMut(f64, &[C], &mut [C])>(&mut self, f: &mut F, t_max: f64) -> Result<()> {
        loop {
            let remaining = t_max - self.t;
            let last = self.h >= remaining;
            let h = if last { remaining } else { self.h };
            let err = self.try_step(f, h);
            self.steps += 1;
            if self.steps > self.opts.max_steps {
                return Err(Error::Convergence {
                    what: "time integration (step budget)",
                    achieved: err,
                    required: self.opts.rtol,
                });
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 && err.is_finite() {
                self.t = if last { t_max } else { self.t + h };
                std::mem::swap(&mut self.y, &mut self.y_new);
                // First-same-as-last: k7 is f at the new point.
                self.k.swap(0, 6);
                if !last || factor > 1.0 {
                    self.h = h * factor;
                }
                return Ok(());
            }
            self.fsal_valid = true;
            self.h = h * if err.is_finite() { factor.min(1.0) } else { 0.2 };
            if self.h < self.opts.min_step {
                return Err(Error::Convergence {
                    what: "time integration (step size underflow)",
                    achieved: err * self.opts.rtol,
                    required: self.opts.rtol,
                });
            }
        }
    }

    /// Advances exactly to `t_end`.
    pub fn advance_to<F: FnMut(f64, &[C], &mut [C])>(&mut self, f: &mut F, t_end: f64) -> Result<()> {
        while self.t < t_end {
            self.step(f, t_end)?;
        }
        Ok(())
    }
}

//! Dormand-Prince 5(4) stepper with PI step-size control on fixed-size states.

/// Step-size control settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub safety: f64,
    /// PI stabilisation exponent; 0 gives the classical I controller.
    pub beta: f64,
    pub max_rejections: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            h_min: 1e-14,
            h_max: f64::INFINITY,
            safety: 0.9,
            beta: 0.04,
            max_rejections: 60,
        }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Difference between the fifth- and embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Result of one accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Accepted<const N: usize> {
    pub y: [f64; N],
    /// Step actually taken.
    pub h: f64,
    /// Proposed size of the next step.
    pub h_next: f64,
    pub rejections: usize,
}

/// The step size fell below `h_min` (or the rejection budget ran out).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepFloor {
    pub h: f64,
    pub err: f64,
}

#[derive(Debug, Clone)]
pub struct DormandPrince<const N: usize> {
    pub control: StepControl,
    err_prev: f64,
    evaluations: usize,
}

impl<const N: usize> DormandPrince<N> {
    pub fn new(control: StepControl) -> Self {
        Self {
            control,
            err_prev: 1e-4,
            evaluations: 0,
        }
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    /// Hairer's starting-step heuristic.
    pub fn initial_step<F>(&mut self, f: &mut F, t: f64, y: &[f64; N]) -> f64
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let ctl = self.control;
        let f0 = f(t, y);
        self.evaluations += 1;
        let sc = |i: usize| ctl.abs_tol + ctl.rel_tol * y[i].abs();
        let d0 = rms((0..N).map(|i| y[i] / sc(i)));
        let d1 = rms((0..N).map(|i| f0[i] / sc(i)));
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let mut y1 = *y;
        for i in 0..N {
            y1[i] += h0 * f0[i];
        }
        let f1 = f(t + h0, &y1);
        self.evaluations += 1;
        let d2 = rms((0..N).map(|i| (f1[i] - f0[i]) / sc(i))) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(ctl.h_max).max(ctl.h_min)
    }

    fn attempt<F>(&mut self, f: &mut F, t: f64, y: &[f64; N], h: f64) -> ([f64; N], f64)
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let mut k = [[0.0; N]; 7];
        for s in 0..7 {
            let mut ys = *y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..N {
                        ys[i] += h * a * kj[i];
                    }
                }
            }
            if s == 6 {
                // FSAL: stage 7 is evaluated at the new solution
                k[6] = f(t + h, &ys);
                self.evaluations += 1;
                let ctl = self.control;
                let err = rms((0..N).map(|i| {
                    let e: f64 = (0..7).map(|j| E[j] * k[j][i]).sum::<f64>() * h;
                    e / (ctl.abs_tol + ctl.rel_tol * y[i].abs().max(ys[i].abs()))
                }));
                return (ys, err);
            }
            k[s] = f(t + C[s] * h, &ys);
            self.evaluations += 1;
        }
        unreachable!()
    }

    /// Takes one accepted step of size at most `h`, shrinking on rejection.
    pub fn step<F>(&mut self, f: &mut F, t: f64, y: &[f64; N], h: f64) -> Result<Accepted<N>, StepFloor>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let ctl = self.control;
        let expo = 0.2 - 0.75 * ctl.beta;
        let mut h = h.min(ctl.h_max);
        let mut rejections = 0;
        loop {
            if h < ctl.h_min || rejections > ctl.max_rejections {
                return Err(StepFloor { h, err: f64::NAN });
            }
            let (y_new, err) = self.attempt(f, t, y, h);
            let finite = err.is_finite() && y_new.iter().all(|v| v.is_finite());
            if finite && err <= 1.0 {
                let fac = ctl.safety * err.max(1e-10).powf(-expo) * self.err_prev.powf(ctl.beta);
                let h_next = (h * fac.clamp(0.2, 10.0)).min(ctl.h_max);
                self.err_prev = err.max(1e-4);
                return Ok(Accepted {
                    y: y_new,
                    h,
                    h_next,
                    rejections,
                });
            }
            let shrink = if finite {
                (ctl.safety * err.powf(-0.2)).clamp(0.1, 0.9)
            } else {
                0.1
            };
            h *= shrink;
            rejections += 1;
        }
    }

    /// Integrates from `t0` to `t1`, landing exactly on `t1`.
    pub fn integrate_to<F>(&mut self, f: &mut F, t0: f64, y: &mut [f64; N], t1: f64, h: &mut f64) -> Result<(), StepFloor>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let mut t = t0;
        while t < t1 {
            let remaining = t1 - t;
            let last = *h >= remaining;
            let trial = if last { remaining } else { *h };
            let acc = self.step(f, t, y, trial)?;
            *y = acc.y;
            t = if last && acc.h == trial { t1 } else { t + acc.h };
            if !(last && acc.h == trial) || acc.h_next < *h {
                *h = acc.h_next;
            }
        }
        Ok(())
    }
}

fn rms(it: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = it.fold((0.0, 0usize), |(s, n), v| (s + v * v, n + 1));
    (s / n.max(1) as f64).sqrt()
}

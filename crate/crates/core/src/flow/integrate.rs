use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::rhs::{monitor_functionals, monitors3, reaction_rhs3, reaction_rhs4, CHANNELS_3, CHANNELS_4};
use crate::algebra::CurvOp4;
use crate::error::{Error, Result};
use crate::ode::{DormandPrince, StepControl};

/// Integrator settings. `rm_ceiling` bounds `|Rm|` (or `|m|` for the
/// three-dimensional system) before the run is declared a blow-up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Controls {
    pub t_max: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub rm_ceiling: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for Controls {
    fn default() -> Self {
        Self {
            t_max: 1.0,
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            rm_ceiling: 1e8,
            h_min: 1e-14,
            max_steps: 200_000,
        }
    }
}

impl Controls {
    fn validate(&self) -> Result<()> {
        let ok = self.t_max > 0.0
            && self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.rm_ceiling > 0.0
            && self.h_min > 0.0
            && self.max_steps > 0
            && [self.t_max, self.rel_tol, self.abs_tol, self.rm_ceiling].iter().all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::BadParams(format!("flow controls must be positive and finite: {self:?}")))
        }
    }

    fn step_control(&self) -> StepControl {
        StepControl {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            h_min: self.h_min,
            h_max: self.t_max,
            ..StepControl::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlowUpTrigger {
    /// The norm passed `rm_ceiling`.
    Ceiling,
    /// The step size hit `h_min` while the norm was still rising.
    StepFloor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FlowStatus {
    Completed,
    /// `t_star` extrapolates `1/|Rm|` linearly to zero from the last two steps.
    BlowUp { t_star: f64, trigger: BlowUpTrigger },
    StepFailure { t: f64, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowSystem {
    Blocks4,
    Eigen3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FlowState {
    Blocks(CurvOp4),
    Eigen([f64; 3]),
}

/// Accepted steps of one reaction-ODE run, with monitor channels evaluated at
/// every accepted step (including the initial state).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReactionTrajectory {
    pub system: FlowSystem,
    pub times: Vec<f64>,
    pub states: Vec<FlowState>,
    pub channels: Vec<String>,
    /// One row per time, columns as in `channels`.
    pub monitors: Vec<Vec<f64>>,
    pub status: FlowStatus,
    pub controls: Controls,
    pub rejections: usize,
}

impl ReactionTrajectory {
    pub fn channel(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.channels.iter().position(|c| c == name)?;
        Some(self.monitors.iter().map(|row| row[k]).collect())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn blow_up_time(&self) -> Option<f64> {
        match self.status {
            FlowStatus::BlowUp { t_star, .. } => Some(t_star),
            _ => None,
        }
    }

    /// Smallest value of `name` along the run divided by `1 + |Rm|`
    /// (`1 + |m|` for the three-dimensional system).
    pub fn scaled_minimum(&self, name: &str) -> Option<f64> {
        let values = self.channel(name)?;
        let norms = self.channel(match self.system {
            FlowSystem::Blocks4 => "rm_norm",
            FlowSystem::Eigen3 => "m_norm",
        })?;
        Some(values.iter().zip(&norms).map(|(v, n)| v / (1.0 + n)).fold(f64::INFINITY, f64::min))
    }

    /// Last accepted `(t, state)` at or before each requested time.
    pub fn at_checkpoints(&self, checkpoints: &[f64]) -> Vec<(f64, FlowState)> {
        checkpoints
            .iter()
            .filter_map(|&c| {
                let k = self.times.partition_point(|&t| t <= c);
                (k > 0).then(|| (self.times[k - 1], self.states[k - 1].clone()))
            })
            .collect()
    }
}

const N4: usize = 21;
const SYM: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

fn pack(op: &CurvOp4) -> [f64; N4] {
    let mut y = [0.0; N4];
    for (k, &(i, j)) in SYM.iter().enumerate() {
        y[k] = op.a()[(i, j)];
        y[15 + k] = op.c()[(i, j)];
    }
    for i in 0..3 {
        for j in 0..3 {
            y[6 + 3 * i + j] = op.b()[(i, j)];
        }
    }
    y
}

fn unpack(y: &[f64; N4]) -> CurvOp4 {
    let mut a = Matrix3::zeros();
    let mut c = Matrix3::zeros();
    for (k, &(i, j)) in SYM.iter().enumerate() {
        a[(i, j)] = y[k];
        a[(j, i)] = y[k];
        c[(i, j)] = y[15 + k];
        c[(j, i)] = y[15 + k];
    }
    let b = Matrix3::from_fn(|i, j| y[6 + 3 * i + j]);
    CurvOp4::new(a, b, c)
}

/// Shared driver: steps on accepted steps only, records, and classifies the end.
struct Run<const N: usize> {
    times: Vec<f64>,
    rows: Vec<Vec<f64>>,
    norms: Vec<f64>,
    rejections: usize,
}

impl<const N: usize> Run<N> {
    fn rising(&self) -> bool {
        let n = self.norms.len();
        n >= 3 && self.norms[n - 3] < self.norms[n - 2] && self.norms[n - 2] < self.norms[n - 1]
    }

    fn t_star(&self) -> f64 {
        let n = self.times.len();
        let (t1, t2) = (self.times[n - 2], self.times[n - 1]);
        let (i1, i2) = (1.0 / self.norms[n - 2], 1.0 / self.norms[n - 1]);
        if i1 > i2 {
            t2 + i2 * (t2 - t1) / (i1 - i2)
        } else {
            t2
        }
    }

    /// `post` normalises a freshly accepted state (sorting for the 3D system)
    /// and returns its monitor row and norm.
    fn drive<F, P>(controls: &Controls, y0: [f64; N], mut rhs: F, mut post: P) -> (Self, Vec<[f64; N]>, FlowStatus)
    where
        F: FnMut(&[f64; N]) -> [f64; N],
        P: FnMut(&mut [f64; N]) -> (Vec<f64>, f64),
    {
        let mut f = |_t: f64, y: &[f64; N]| rhs(y);
        let mut dp = DormandPrince::<N>::new(controls.step_control());
        let mut y = y0;
        let (row, norm) = post(&mut y);
        let mut run = Run {
            times: vec![0.0],
            rows: vec![row],
            norms: vec![norm],
            rejections: 0,
        };
        let mut states = vec![y];
        let mut t = 0.0;
        let mut h = dp.initial_step(&mut f, t, &y);
        let status = loop {
            if t >= controls.t_max {
                break FlowStatus::Completed;
            }
            if run.times.len() > controls.max_steps {
                break FlowStatus::StepFailure {
                    t,
                    reason: format!("step budget of {} exhausted", controls.max_steps),
                };
            }
            let remaining = controls.t_max - t;
            let last = h >= remaining;
            let trial = if last { remaining } else { h };
            match dp.step(&mut f, t, &y, trial) {
                Ok(acc) => {
                    y = acc.y;
                    t = if last && acc.h == trial { controls.t_max } else { t + acc.h };
                    h = acc.h_next;
                    run.rejections += acc.rejections;
                    let (row, norm) = post(&mut y);
                    run.times.push(t);
                    run.rows.push(row);
                    run.norms.push(norm);
                    states.push(y);
                    if norm > controls.rm_ceiling && run.rising() {
                        break FlowStatus::BlowUp {
                            t_star: run.t_star(),
                            trigger: BlowUpTrigger::Ceiling,
                        };
                    }
                }
                Err(floor) => {
                    if run.rising() {
                        break FlowStatus::BlowUp {
                            t_star: run.t_star(),
                            trigger: BlowUpTrigger::StepFloor,
                        };
                    }
                    break FlowStatus::StepFailure {
                        t,
                        reason: format!("step size {:e} below floor {:e}", floor.h, controls.h_min),
                    };
                }
            }
        };
        (run, states, status)
    }
}

/// Integrates the block reaction system from `init`.
pub fn integrate4(init: &CurvOp4, controls: &Controls) -> Result<ReactionTrajectory> {
    controls.validate()?;
    if !init.is_finite() {
        return Err(Error::BadParams("initial operator is not finite".into()));
    }
    let rhs = |y: &[f64; N4]| pack(&reaction_rhs4(&unpack(y)));
    let post = |y: &mut [f64; N4]| {
        let m = monitor_functionals(&unpack(y));
        (m.values().to_vec(), m.rm_norm)
    };
    let (run, states, status) = Run::drive(controls, pack(init), rhs, post);
    Ok(ReactionTrajectory {
        system: FlowSystem::Blocks4,
        times: run.times,
        states: states.iter().map(|y| FlowState::Blocks(unpack(y))).collect(),
        channels: CHANNELS_4.iter().map(|s| s.to_string()).collect(),
        monitors: run.rows,
        status,
        controls: *controls,
        rejections: run.rejections,
    })
}

/// Integrates the three-dimensional eigenvalue system; the state is re-sorted
/// ascending after every accepted step.
pub fn integrate3(init: [f64; 3], controls: &Controls) -> Result<ReactionTrajectory> {
    controls.validate()?;
    if init.iter().any(|v| !v.is_finite()) {
        return Err(Error::BadParams("initial eigenvalues are not finite".into()));
    }
    let post = |y: &mut [f64; 3]| {
        y.sort_by(f64::total_cmp);
        let m = monitors3(*y);
        (m.to_vec(), m[2])
    };
    let (run, states, status) = Run::drive(controls, init, |y: &[f64; 3]| reaction_rhs3(*y), post);
    Ok(ReactionTrajectory {
        system: FlowSystem::Eigen3,
        times: run.times,
        states: states.into_iter().map(FlowState::Eigen).collect(),
        channels: CHANNELS_3.iter().map(|s| s.to_string()).collect(),
        monitors: run.rows,
        status,
        controls: *controls,
        rejections: run.rejections,
    })
}

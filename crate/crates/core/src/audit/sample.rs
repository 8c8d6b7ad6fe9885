use std::collections::BTreeSet;
use std::fmt;

use nalgebra::{Matrix3, Matrix4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::algebra::{classify_cones, spectral_summary, CurvOp4};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    /// `tr A = tr C`, enforced by shifting `C`.
    Bianchi,
    Wpic,
    Pic,
    ANonneg,
    CNonneg,
    RicciNonneg,
    #[serde(rename = "ricci_2nonneg")]
    Ricci2Nonneg,
    /// `B = 0`, enforced by projection.
    Einstein,
}

impl Constraint {
    pub const ALL: [Constraint; 8] = [
        Constraint::Bianchi,
        Constraint::Wpic,
        Constraint::Pic,
        Constraint::ANonneg,
        Constraint::CNonneg,
        Constraint::RicciNonneg,
        Constraint::Ricci2Nonneg,
        Constraint::Einstein,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Constraint::Bianchi => "bianchi",
            Constraint::Wpic => "wpic",
            Constraint::Pic => "pic",
            Constraint::ANonneg => "a_nonneg",
            Constraint::CNonneg => "c_nonneg",
            Constraint::RicciNonneg => "ricci_nonneg",
            Constraint::Ricci2Nonneg => "ricci_2nonneg",
            Constraint::Einstein => "einstein",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::BadParams(format!("unknown constraint `{s}`")))
    }

    /// Constraints checked by rejection (or repaired by the shift fallback).
    fn is_cone(self) -> bool {
        !matches!(self, Constraint::Bianchi | Constraint::Einstein)
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub(crate) fn constraint_list(set: &BTreeSet<Constraint>) -> String {
    let v: Vec<&str> = set.iter().map(|c| c.name()).collect();
    format!("{{{}}}", v.join(", "))
}

/// What to sample: `count` operators with Gaussian entries of standard
/// deviation `scale`, subject to `constraints`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub seed: u64,
    pub count: usize,
    pub constraints: BTreeSet<Constraint>,
    pub scale: f64,
    /// Permit the eigenvalue-shift fallback when rejection is too rare.
    #[serde(default = "yes")]
    pub allow_shift: bool,
}

fn yes() -> bool {
    true
}

impl SampleSpec {
    pub fn new(seed: u64, count: usize, constraints: &[Constraint]) -> Self {
        Self {
            seed,
            count,
            constraints: constraints.iter().copied().collect(),
            scale: 1.0,
            allow_shift: true,
        }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn has(&self, c: Constraint) -> bool {
        self.constraints.contains(&c)
    }

    fn validate(&self) -> Result<()> {
        if self.count == 0 || !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::BadParams(format!(
                "sample spec needs count > 0 and a positive finite scale (count {}, scale {})",
                self.count, self.scale
            )));
        }
        Ok(())
    }
}

/// Below this pilot acceptance rate every sample takes the shift fallback.
pub const ACCEPTANCE_FLOOR: f64 = 1e-3;
const PILOT_DRAWS: usize = 4096;
const PILOT_SEED: u64 = 0x5eed_0f_a11_c0e5;
/// Per-sample budget in units of the expected number of draws.
const BUDGET_FACTOR: f64 = 20.0;
/// Extra PIC margin (times `scale`) for shifted samples, so they are strictly inside.
const PIC_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub index: usize,
    pub op: CurvOp4,
    /// Multiple of the identity added to `A` and `C` by the shift fallback.
    pub shift: Option<f64>,
    pub draws: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Mode {
    Direct,
    Reject { budget: usize },
    Shift,
}

/// Sampler for one spec. Construction runs a seed-independent pilot to
/// estimate the acceptance rate of the cone constraints, which fixes the
/// strategy: rejection with a per-sample draw budget, or the shift fallback
/// for every sample when the rate is under [`ACCEPTANCE_FLOOR`].
#[derive(Debug, Clone)]
pub struct Sampler {
    spec: SampleSpec,
    mode: Mode,
    acceptance: f64,
}

fn gaussian_sym(rng: &mut ChaCha8Rng, scale: f64) -> Matrix3<f64> {
    let g = gaussian(rng, scale);
    (g + g.transpose()) * 0.5
}

fn gaussian(rng: &mut ChaCha8Rng, scale: f64) -> Matrix3<f64> {
    let mut m = Matrix3::zeros();
    for v in m.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *v = z * scale;
    }
    m
}

fn stream(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

impl Sampler {
    pub fn new(spec: &SampleSpec) -> Result<Self> {
        spec.validate()?;
        let cones = spec.constraints.iter().any(|c| c.is_cone());
        let (mode, acceptance) = if !cones {
            (Mode::Direct, 1.0)
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(PILOT_SEED);
            let hits = (0..PILOT_DRAWS)
                .filter(|_| satisfies(spec, &draw(spec, &mut rng)))
                .count();
            let rate = hits as f64 / PILOT_DRAWS as f64;
            if rate < ACCEPTANCE_FLOOR {
                (Mode::Shift, rate)
            } else {
                let budget = (BUDGET_FACTOR / rate).ceil() as usize;
                (Mode::Reject { budget }, rate)
            }
        };
        if mode == Mode::Shift && !spec.allow_shift {
            return Err(Error::RejectionBudgetExceeded {
                budget: PILOT_DRAWS,
                constraints: constraint_list(&spec.constraints),
            });
        }
        Ok(Self {
            spec: spec.clone(),
            mode,
            acceptance,
        })
    }

    pub fn spec(&self) -> &SampleSpec {
        &self.spec
    }

    /// Pilot estimate of the acceptance rate (1 without cone constraints).
    pub fn acceptance_rate(&self) -> f64 {
        self.acceptance
    }

    pub fn shifts_all(&self) -> bool {
        self.mode == Mode::Shift
    }

    /// Deterministic in `(seed, index, constraints, scale)`.
    pub fn sample(&self, index: usize) -> Result<Sample> {
        let spec = &self.spec;
        if index >= spec.count {
            return Err(Error::BadParams(format!("index {index} out of range for count {}", spec.count)));
        }
        let mut rng = stream(spec.seed, index);
        match self.mode {
            Mode::Direct => Ok(Sample {
                index,
                op: draw(spec, &mut rng),
                shift: None,
                draws: 1,
            }),
            Mode::Shift => Ok(shift_into_cones(spec, draw(spec, &mut rng), &mut rng, index, 1)),
            Mode::Reject { budget } => {
                let mut last = None;
                for k in 1..=budget {
                    let op = draw(spec, &mut rng);
                    if satisfies(spec, &op) {
                        return Ok(Sample {
                            index,
                            op,
                            shift: None,
                            draws: k,
                        });
                    }
                    last = Some(op);
                }
                if !spec.allow_shift {
                    return Err(Error::RejectionBudgetExceeded {
                        budget,
                        constraints: constraint_list(&spec.constraints),
                    });
                }
                let op = last.expect("budget is at least one draw");
                Ok(shift_into_cones(spec, op, &mut rng, index, budget))
            }
        }
    }
}

/// One raw draw with the linear constraints (Einstein, Bianchi) applied.
fn draw(spec: &SampleSpec, rng: &mut ChaCha8Rng) -> CurvOp4 {
    let a = gaussian_sym(rng, spec.scale);
    let b = gaussian(rng, spec.scale);
    let c = gaussian_sym(rng, spec.scale);
    let b = if spec.has(Constraint::Einstein) { Matrix3::zeros() } else { b };
    if spec.has(Constraint::Bianchi) {
        CurvOp4::with_bianchi(a, b, c)
    } else {
        CurvOp4::new(a, b, c)
    }
}

/// Exact (zero-tolerance) check of the cone constraints.
fn satisfies(spec: &SampleSpec, op: &CurvOp4) -> bool {
    if !cheap_necessary(spec, op) {
        return false;
    }
    let c = classify_cones(&spectral_summary(op), 0.0);
    spec.constraints.iter().all(|k| match k {
        Constraint::Wpic => c.wpic,
        Constraint::Pic => c.pic,
        Constraint::ANonneg => c.a_nonneg,
        Constraint::CNonneg => c.c_nonneg,
        Constraint::RicciNonneg => c.ricci_nonneg,
        Constraint::Ricci2Nonneg => c.ricci_2nonneg,
        Constraint::Bianchi | Constraint::Einstein => true,
    })
}

/// Necessary conditions that need no eigenvalues: a nonnegative block has a
/// nonnegative diagonal, (W)PIC forces both traces to be nonnegative, and the
/// Ricci cones force `R = 4 tr A >= 0`.
/// Rejects most draws before the spectral summary is computed.
fn cheap_necessary(spec: &SampleSpec, op: &CurvOp4) -> bool {
    let diag_ok = |m: &Matrix3<f64>| (0..3).all(|i| m[(i, i)] >= 0.0);
    if spec.has(Constraint::ANonneg) && !diag_ok(op.a()) {
        return false;
    }
    if spec.has(Constraint::CNonneg) && !diag_ok(op.c()) {
        return false;
    }
    let has_any = |ks: &[Constraint]| ks.iter().any(|&k| spec.has(k));
    if has_any(&[Constraint::Wpic, Constraint::Pic]) && (op.a().trace() < 0.0 || op.c().trace() < 0.0) {
        return false;
    }
    if has_any(&[Constraint::RicciNonneg, Constraint::Ricci2Nonneg]) && op.a().trace() < 0.0 {
        return false;
    }
    true
}

/// Adds `s I` to `A` and `C`, with `s` the least shift meeting every cone
/// constraint plus a uniform extra in `[0, scale)`, so shifted samples fill the
/// cone instead of piling up on its boundary. Shifting raises the `A`, `C`
/// eigenvalues by `s`, the Ricci eigenvalues by `3s`, and leaves `B` alone.
fn shift_into_cones(spec: &SampleSpec, op: CurvOp4, rng: &mut ChaCha8Rng, index: usize, draws: usize) -> Sample {
    let s = spectral_summary(&op);
    let m = classify_cones(&s, 0.0).margins;
    let mut need: f64 = 0.0;
    for k in &spec.constraints {
        let v = match k {
            Constraint::Wpic => -m.wpic_margin() / 2.0,
            Constraint::Pic => -m.wpic_margin() / 2.0 + PIC_MARGIN * spec.scale,
            Constraint::ANonneg => -s.a_eigs[0],
            Constraint::CNonneg => -s.c_eigs[0],
            Constraint::RicciNonneg => -m.ricci_min / 3.0,
            Constraint::Ricci2Nonneg => -m.ricci_two_min / 6.0,
            Constraint::Bianchi | Constraint::Einstein => 0.0,
        };
        need = need.max(v);
    }
    let extra: f64 = rng.random::<f64>() * spec.scale;
    let shift = need + extra;
    Sample {
        index,
        op: op.shifted(shift),
        shift: Some(shift),
        draws,
    }
}

/// Convenience wrapper; campaigns build one [`Sampler`] and reuse it.
pub fn sample_curvop(spec: &SampleSpec, index: usize) -> Result<CurvOp4> {
    Ok(Sampler::new(spec)?.sample(index)?.op)
}

const FRAME_DOMAIN: u64 = 0xf4a3_e5;

/// Haar-distributed rotation of R^4 (columns are the frame vectors).
pub fn sample_frame(seed: u64, index: usize) -> Matrix4<f64> {
    let mut rng = stream(seed ^ FRAME_DOMAIN, index);
    haar_rotation(&mut rng)
}

pub(crate) fn haar_rotation(rng: &mut ChaCha8Rng) -> Matrix4<f64> {
    let g = Matrix4::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    // sign fix makes Q Haar on O(4); flipping a column when det = -1 keeps it
    // Haar on SO(4)
    for k in 0..4 {
        if r[(k, k)] < 0.0 {
            q.column_mut(k).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bianchi_is_exact() {
        let spec = SampleSpec::new(1, 50, &[Constraint::Bianchi]);
        let s = Sampler::new(&spec).unwrap();
        for i in 0..50 {
            let op = s.sample(i).unwrap().op;
            assert!((op.a().trace() - op.c().trace()).abs() <= 1e-14 * (1.0 + op.norm()));
        }
    }

    #[test]
    fn einstein_has_no_mixed_block() {
        let spec = SampleSpec::new(2, 10, &[Constraint::Einstein, Constraint::Bianchi]);
        let op = sample_curvop(&spec, 3).unwrap();
        assert_eq!(*op.b(), Matrix3::zeros());
    }

    #[test]
    fn wpic_samples_classify_as_wpic() {
        let spec = SampleSpec::new(3, 300, &[Constraint::Wpic, Constraint::Bianchi]);
        let s = Sampler::new(&spec).unwrap();
        assert!(!s.shifts_all());
        for i in 0..300 {
            let op = s.sample(i).unwrap().op;
            assert!(classify_cones(&spectral_summary(&op), 1e-12).wpic);
        }
    }

    #[test]
    fn cone_constraints_hold_in_both_modes() {
        let c = [Constraint::ANonneg, Constraint::CNonneg, Constraint::RicciNonneg, Constraint::Bianchi];
        let spec = SampleSpec::new(4, 200, &c).with_scale(3.0);
        let rejecting = Sampler::new(&spec).unwrap();
        let shifting = Sampler {
            mode: Mode::Shift,
            ..rejecting.clone()
        };
        for s in [&rejecting, &shifting] {
            for i in 0..200 {
                let smp = s.sample(i).unwrap();
                assert_eq!(smp.shift.is_some(), s.shifts_all());
                let r = classify_cones(&spectral_summary(&smp.op), 1e-12);
                assert!(r.a_nonneg && r.c_nonneg && r.ricci_nonneg);
            }
        }
    }

    #[test]
    fn shift_fallback_can_be_refused() {
        // both blocks nonnegative, positive Ricci and PIC: rare under Gaussian draws
        let c = [
            Constraint::ANonneg,
            Constraint::CNonneg,
            Constraint::Ricci2Nonneg,
            Constraint::RicciNonneg,
            Constraint::Pic,
            Constraint::Bianchi,
        ];
        let spec = SampleSpec::new(4, 10, &c);
        let s = Sampler::new(&spec).unwrap();
        if s.acceptance_rate() < ACCEPTANCE_FLOOR {
            assert!(s.shifts_all());
            let strict = SampleSpec {
                allow_shift: false,
                ..spec
            };
            assert!(matches!(Sampler::new(&strict), Err(Error::RejectionBudgetExceeded { .. })));
        } else {
            assert!(!s.shifts_all());
        }
    }

    #[test]
    fn deterministic_per_index() {
        let spec = SampleSpec::new(9, 20, &[Constraint::Pic, Constraint::Bianchi]);
        assert_eq!(sample_curvop(&spec, 7).unwrap(), sample_curvop(&spec, 7).unwrap());
        assert_ne!(sample_curvop(&spec, 7).unwrap(), sample_curvop(&spec, 8).unwrap());
        assert!(sample_curvop(&spec, 20).is_err());
    }

    #[test]
    fn frames_are_rotations() {
        for i in 0..100 {
            let f = sample_frame(11, i);
            assert!((f.transpose() * f - Matrix4::identity()).amax() <= 1e-12);
            assert!((f.determinant() - 1.0).abs() <= 1e-12);
        }
        assert_eq!(sample_frame(11, 3), sample_frame(11, 3));
    }

    #[test]
    fn constraint_names_round_trip() {
        for c in Constraint::ALL {
            assert_eq!(Constraint::parse(c.name()).unwrap(), c);
            assert_eq!(serde_json::to_string(&c).unwrap(), format!("\"{}\"", c.name()));
        }
        assert!(Constraint::parse("nope").is_err());
    }
}

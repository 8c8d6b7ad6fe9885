use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::identity::{symbolic_certificates, u_rearrangement, v_rearrangement, BlockSpectra, Certificate};
use super::sample::{constraint_list, sample_frame, Constraint, SampleSpec, Sampler};
use crate::algebra::{
    isotropic_of_components, norm_bound_check, ricci_from_blocks, spectral_summary, wpic_frame_margins, CurvOp4,
    SpectralSummary,
};
use crate::error::{Error, Result};
use crate::exec::Execution;

pub const SCHEMA_VERSION: u32 = 1;

/// Pinching constants above this count as "no finite pinching" in the
/// max-form search.
pub const PINCHING_LIMIT: f64 = 1e3;
/// Pinching constants for the implication campaigns are drawn from `(0, 10]`.
pub const PINCHING_RANGE: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CampaignKind {
    /// An algebraic identity; residual compared against the tolerance.
    Identity,
    /// An implication that must hold on every constraint-satisfying sample.
    Implication,
    /// A search for counterexamples; findings are the expected product.
    Falsification,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Campaign {
    /// Rearrangement of the `du/dt` lower bound, `u = R + 4B1 - 4(B2+B3)`.
    URearrangement,
    /// Rearrangement of the `dv/dt` lower bound, `v = R - 4 s3`.
    VRearrangement,
    /// Ricci spectrum from the signed B-spectrum against the direct spectrum.
    RicciCorrespondence,
    /// Frame inequalities implied by nonnegative isotropic curvature.
    WpicFrameInequalities,
    /// `|Rm| <= R` under `A, C, Rc >= 0`.
    NormBound,
    /// Pairwise pinching `A3 <= L(A1+A2)`, `C3 <= L(C1+C2)` implies
    /// `R <= 4(L+1) min{A1+A2, C1+C2}`.
    PinchingForward,
    /// Searches for operators with `R <= 4(L+1) max{A1+A2, C1+C2}` that admit
    /// no pairwise pinching constant up to [`PINCHING_LIMIT`].
    PinchingMaxForm,
}

impl Campaign {
    pub const ALL: [Campaign; 7] = [
        Campaign::URearrangement,
        Campaign::VRearrangement,
        Campaign::RicciCorrespondence,
        Campaign::WpicFrameInequalities,
        Campaign::NormBound,
        Campaign::PinchingForward,
        Campaign::PinchingMaxForm,
    ];

    /// Identifier used on the command line and in reports.
    pub fn id(self) -> &'static str {
        match self {
            Campaign::URearrangement => "thm31_rearrangement",
            Campaign::VRearrangement => "prop61_rearrangement",
            Campaign::RicciCorrespondence => "lemma22_correspondence",
            Campaign::WpicFrameInequalities => "lemma21_consequences",
            Campaign::NormBound => "rm_leq_r",
            Campaign::PinchingForward => "prop64_forward",
            Campaign::PinchingMaxForm => "prop64_max_equivalence",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.id() == s)
            .ok_or_else(|| Error::UnknownCampaign(s.to_string()))
    }

    pub fn kind(self) -> CampaignKind {
        match self {
            Campaign::URearrangement | Campaign::VRearrangement | Campaign::RicciCorrespondence => {
                CampaignKind::Identity
            }
            Campaign::WpicFrameInequalities | Campaign::NormBound | Campaign::PinchingForward => {
                CampaignKind::Implication
            }
            Campaign::PinchingMaxForm => CampaignKind::Falsification,
        }
    }

    pub fn required(self) -> &'static [Constraint] {
        use Constraint::*;
        match self {
            Campaign::URearrangement | Campaign::VRearrangement | Campaign::RicciCorrespondence => &[Bianchi],
            Campaign::WpicFrameInequalities => &[Bianchi, Wpic],
            Campaign::NormBound => &[Bianchi, ANonneg, CNonneg, RicciNonneg],
            Campaign::PinchingForward | Campaign::PinchingMaxForm => &[Bianchi, Pic],
        }
    }

    /// Degree of the residual in the operator entries; residuals are divided
    /// by `(1 + scale)^degree`.
    fn degree(self) -> i32 {
        match self {
            Campaign::URearrangement | Campaign::VRearrangement => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub index: usize,
    pub op: CurvOp4,
    pub shift: Option<f64>,
    pub residual: f64,
    pub margins: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub schema_version: u32,
    pub campaign: String,
    pub kind: CampaignKind,
    pub seed: u64,
    pub scale: f64,
    pub tol: f64,
    pub constraints: Vec<Constraint>,
    pub total: usize,
    pub passes: usize,
    /// Largest scaled residual over all samples.
    pub worst_residual: f64,
    pub worst_index: Option<usize>,
    pub shifted_samples: usize,
    pub acceptance_rate: f64,
    pub certificates: Vec<Certificate>,
    pub finding: Option<String>,
    /// Sorted by index.
    pub counterexamples: Vec<Counterexample>,
    /// Kept out of the JSON so reports are byte-identical across runs.
    #[serde(skip)]
    pub wall_time: f64,
}

impl AuditReport {
    pub fn failures(&self) -> usize {
        self.counterexamples.len()
    }

    /// True when a theorem-checking campaign saw a violation. Falsification
    /// campaigns never fail: their counterexamples are findings.
    pub fn is_violation(&self) -> bool {
        self.kind != CampaignKind::Falsification && !self.counterexamples.is_empty()
    }

    /// Flat summary for CSV ledgers; `wall_time` is included here.
    pub fn summary_fields(&self) -> Vec<(&'static str, String)> {
        vec![
            ("schema_version", self.schema_version.to_string()),
            ("campaign", self.campaign.clone()),
            ("seed", self.seed.to_string()),
            ("scale", self.scale.to_string()),
            ("tol", self.tol.to_string()),
            ("total", self.total.to_string()),
            ("passes", self.passes.to_string()),
            ("counterexamples", self.counterexamples.len().to_string()),
            ("worst_residual", format!("{:e}", self.worst_residual)),
            ("shifted_samples", self.shifted_samples.to_string()),
            ("wall_time", format!("{:.3}", self.wall_time)),
        ]
    }
}

struct Outcome {
    pass: bool,
    residual: f64,
    shifted: bool,
    margins: Vec<(&'static str, f64)>,
}

const PINCHING_DOMAIN: u64 = 0x91c4_1e;

fn sampled_pinching(seed: u64, index: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ PINCHING_DOMAIN);
    rng.set_stream(index as u64);
    PINCHING_RANGE * (1.0 - rng.random::<f64>())
}

/// Least `L` with `A3 <= L(A1+A2)` and `C3 <= L(C1+C2)`; infinite off PIC.
fn pairwise_pinching(s: &SpectralSummary) -> f64 {
    let a12 = s.a_eigs[0] + s.a_eigs[1];
    let c12 = s.c_eigs[0] + s.c_eigs[1];
    if a12 <= 0.0 || c12 <= 0.0 {
        return f64::INFINITY;
    }
    (s.a_eigs[2] / a12).max(s.c_eigs[2] / c12)
}

fn evaluate(campaign: Campaign, spec: &SampleSpec, tol: f64, op: &CurvOp4, index: usize) -> (bool, f64, Vec<(&'static str, f64)>) {
    let s = spectral_summary(op);
    let norm = (1.0 + spec.scale).powi(campaign.degree());
    let a12 = s.a_eigs[0] + s.a_eigs[1];
    let c12 = s.c_eigs[0] + s.c_eigs[1];
    match campaign {
        Campaign::URearrangement | Campaign::VRearrangement => {
            let spectra = BlockSpectra::from_summary(&s);
            let (l, r) = if campaign == Campaign::URearrangement {
                u_rearrangement(&spectra)
            } else {
                v_rearrangement(&spectra)
            };
            let res = (l - r).abs() / norm;
            (res <= tol, res, vec![("lhs", l), ("rhs", r)])
        }
        Campaign::RicciCorrespondence => match ricci_from_blocks(&s) {
            Ok(r) => {
                let res = r.deviation / norm;
                (res <= tol, res, vec![("deviation", r.deviation), ("sign_used", f64::from(r.sign_used))])
            }
            Err(Error::ConventionMismatch { deviation, .. }) => {
                (false, deviation / norm, vec![("deviation", deviation), ("convention_mismatch", 1.0)])
            }
            Err(_) => (false, f64::INFINITY, vec![]),
        },
        Campaign::WpicFrameInequalities => {
            let t = op.to_riemann();
            let frame = sample_frame(spec.seed, index);
            let rotated = t.in_frame4(&frame);
            let std_m = wpic_frame_margins(&t);
            let rot_m = wpic_frame_margins(&rotated);
            let iso = isotropic_of_components(&t).min(isotropic_of_components(&rotated));
            let worst = std_m.min().min(rot_m.min()).min(iso);
            let res = (-worst).max(0.0) / norm;
            (
                res <= tol,
                res,
                vec![
                    ("four_sectional", std_m.four_sectional.min(rot_m.four_sectional)),
                    ("ricci_pair", std_m.ricci_pair.min(rot_m.ricci_pair)),
                    ("R", std_m.scalar),
                    ("isotropic", iso),
                    ("wpic_margin", a12.min(c12)),
                ],
            )
        }
        Campaign::NormBound => {
            let nb = norm_bound_check(&s, 0.0);
            let res = (nb.rm_norm - nb.scalar).max(0.0) / norm;
            (res <= tol, res, vec![("rm_norm", nb.rm_norm), ("R", nb.scalar)])
        }
        Campaign::PinchingForward => {
            let l0 = pairwise_pinching(&s);
            let l = sampled_pinching(spec.seed, index).max(l0);
            let bound = 4.0 * (l + 1.0) * a12.min(c12);
            let res = (s.scalar - bound).max(0.0) / norm;
            (res <= tol, res, vec![("L", l), ("L_min", l0), ("R", s.scalar), ("a12", a12), ("c12", c12)])
        }
        Campaign::PinchingMaxForm => {
            let l = sampled_pinching(spec.seed, index);
            let l0 = pairwise_pinching(&s);
            let max_form = s.scalar <= 4.0 * (l + 1.0) * a12.max(c12);
            let found = max_form && l0 > PINCHING_LIMIT;
            let l0_out = if l0.is_finite() { l0 } else { f64::MAX };
            (
                !found,
                if found { 1.0 } else { 0.0 },
                vec![("L", l), ("L_min", l0_out), ("R", s.scalar), ("a12", a12), ("c12", c12)],
            )
        }
    }
}

fn evaluate_index(campaign: Campaign, sampler: &Sampler, tol: f64, index: usize) -> Result<(Outcome, CurvOp4, Option<f64>)> {
    let smp = sampler.sample(index)?;
    let (pass, residual, margins) = evaluate(campaign, sampler.spec(), tol, &smp.op, index);
    let residual = if residual.is_nan() { f64::INFINITY } else { residual };
    Ok((
        Outcome {
            pass: pass && residual.is_finite(),
            residual,
            shifted: smp.shift.is_some(),
            margins,
        },
        smp.op,
        smp.shift,
    ))
}

/// Runs a campaign with the default execution policy.
pub fn run_identity_campaign(name: &str, spec: &SampleSpec, tol: f64) -> Result<AuditReport> {
    run_campaign(name, spec, tol, Execution::default())
}

pub fn run_campaign(name: &str, spec: &SampleSpec, tol: f64, exec: Execution) -> Result<AuditReport> {
    let started = Instant::now();
    let campaign = Campaign::parse(name)?;
    let missing: Vec<Constraint> = campaign.required().iter().copied().filter(|c| !spec.has(*c)).collect();
    if !missing.is_empty() {
        return Err(Error::ConstraintMismatch {
            campaign: name.to_string(),
            required: constraint_list(&campaign.required().iter().copied().collect()),
        });
    }
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::BadParams(format!("tolerance must be nonnegative, got {tol}")));
    }
    let sampler = Sampler::new(spec)?;
    let results = exec.map_indices(spec.count, |i| {
        // only failures keep their operator
        evaluate_index(campaign, &sampler, tol, i).map(|(o, op, shift)| {
            let keep = (!o.pass).then_some((op, shift));
            (o, keep)
        })
    });

    let mut passes = 0;
    let mut worst_residual: f64 = 0.0;
    let mut worst_index = None;
    let mut shifted_samples = 0;
    let mut counterexamples = Vec::new();
    for (index, r) in results.into_iter().enumerate() {
        let (o, keep) = r?;
        if o.shifted {
            shifted_samples += 1;
        }
        if worst_index.is_none() || o.residual > worst_residual {
            worst_residual = o.residual;
            worst_index = Some(index);
        }
        if o.pass {
            passes += 1;
        } else if let Some((op, shift)) = keep {
            counterexamples.push(Counterexample {
                index,
                op,
                shift,
                residual: o.residual,
                margins: o.margins.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            });
        }
    }
    let certificates = match campaign {
        Campaign::URearrangement => vec![symbolic_certificates()[0].clone()],
        Campaign::VRearrangement => vec![symbolic_certificates()[1].clone()],
        _ => vec![],
    };
    let finding = (campaign == Campaign::PinchingMaxForm).then(|| {
        if counterexamples.is_empty() {
            format!(
                "no operator in {} samples satisfies the max-form bound while lacking a pairwise pinching constant <= {PINCHING_LIMIT}",
                spec.count
            )
        } else {
            format!(
                "{} of {} samples satisfy the max-form bound but admit no pairwise pinching constant <= {PINCHING_LIMIT}; first at index {}",
                counterexamples.len(),
                spec.count,
                counterexamples[0].index
            )
        }
    });
    Ok(AuditReport {
        schema_version: SCHEMA_VERSION,
        campaign: campaign.id().to_string(),
        kind: campaign.kind(),
        seed: spec.seed,
        scale: spec.scale,
        tol,
        constraints: spec.constraints.iter().copied().collect(),
        total: spec.count,
        passes,
        worst_residual,
        worst_index,
        shifted_samples,
        acceptance_rate: sampler.acceptance_rate(),
        certificates,
        finding,
        counterexamples,
        wall_time: started.elapsed().as_secs_f64(),
    })
}

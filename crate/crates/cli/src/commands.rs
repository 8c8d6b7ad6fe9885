use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use isocurv::algebra::{build_from_riemann, CurvatureTensor, CurvOp4, Orientation};
use isocurv::audit::{frame_consistency, run_campaign, Campaign, CampaignKind, Constraint, SampleSpec, Sampler};
use isocurv::exec::Execution;
use isocurv::flow::{integrate3, integrate4, Controls, FlowState, FlowStatus, FlowSystem, ReactionTrajectory};
use isocurv::metric::{catalog_metric, normalize_steady, soliton_survey, Scheme, SolitonSurvey, CATALOG};
use isocurv::Error;
use nalgebra::Matrix3;
use serde::Serialize;

use crate::args::{AuditArgs, CatalogArgs, Common, FlowArgs, FramesArgs, InitKind, SchemeArg};
use crate::output::{append_ledger, csv_bytes, json_bytes};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug)]
pub enum CliError {
    /// Bad input: exit status 2.
    Usage(String),
    /// Anything else that stopped the run: exit status 1.
    Runtime(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::UnknownName(_)
            | Error::BadParams(_)
            | Error::UnknownCampaign(_)
            | Error::ConstraintMismatch { .. }
            | Error::NotSteady(_)
            | Error::MissingPotential
            | Error::OutOfDomain { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("i/o error: {e}"))
    }
}

pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

pub struct Outcome {
    pub pass: bool,
    pub summary: String,
    /// Lines for stderr at `-v`.
    pub details: Vec<String>,
    pub artifacts: Vec<Artifact>,
}

fn artifacts<T: Serialize>(
    common: &Common,
    stem: &str,
    json: &T,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
) -> Result<Vec<Artifact>, CliError> {
    let mut out = Vec::new();
    if common.format.json() {
        out.push(Artifact {
            name: format!("{stem}.json"),
            bytes: json_bytes(json)?,
        });
    }
    if common.format.csv() {
        out.push(Artifact {
            name: format!("{stem}.csv"),
            bytes: csv_bytes(&header, &rows)?,
        });
    }
    Ok(out)
}

fn tolerance(common: &Common, default: f64) -> Result<f64, CliError> {
    let tol = common.tol.unwrap_or(default);
    if tol >= 0.0 && tol.is_finite() {
        Ok(tol)
    } else {
        Err(CliError::Usage(format!("--tol must be nonnegative and finite, got {tol}")))
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

#[derive(Serialize)]
struct CatalogReport<'a> {
    schema_version: u32,
    command: &'static str,
    seed: u64,
    tol: f64,
    normalized: bool,
    pass: bool,
    #[serde(flatten)]
    survey: &'a SolitonSurvey,
}

pub fn catalog(a: &CatalogArgs) -> Result<Outcome, CliError> {
    if !CATALOG.contains(&a.metric.as_str()) {
        return Err(CliError::Usage(format!(
            "unknown catalog metric `{}`; known: {}",
            a.metric,
            CATALOG.join(", ")
        )));
    }
    if a.probes == 0 {
        return Err(CliError::Usage("--probes must be at least 1".into()));
    }
    let (scheme, default_tol) = match a.scheme {
        SchemeArg::ClosedForm => (Scheme::ClosedForm, 1e-7),
        SchemeArg::Fd => (Scheme::FiniteDifference { h: a.fd_step }, 1e-6),
    };
    let tol = tolerance(&a.common, default_tol)?;
    let params: BTreeMap<String, f64> = a.params.iter().cloned().collect();
    let mut chart = catalog_metric(&a.metric, &params)?;
    if a.normalize {
        chart = normalize_steady(&chart)?;
    }
    let points = match a.radial {
        Some(r) if r > 0.0 && r.is_finite() => chart.radial_probes(a.probes, r),
        Some(r) => return Err(CliError::Usage(format!("--radial must be positive, got {r}"))),
        None => chart.probe_points(a.probes, a.common.seed),
    };
    let survey = soliton_survey(&chart, &points, scheme, Execution::default())?;
    let bianchi_ok = survey.probes.iter().all(|p| p.bianchi != Some(false));
    let pass = survey.worst_residual() <= tol && bianchi_ok;
    let report = CatalogReport {
        schema_version: SCHEMA_VERSION,
        command: "catalog",
        seed: a.common.seed,
        tol,
        normalized: a.normalize,
        pass,
        survey: &survey,
    };

    let mut header: Vec<String> = (0..chart.dim).map(|i| format!("x{i}")).collect();
    header.extend(["R", "energy", "eq_residual", "ham1", "ham2", "error_bar"].map(String::from));
    let four = chart.dim == 4;
    if four {
        header.extend(["bianchi", "a12", "c12", "ricci_min", "ricci_two_min", "r_minus_4_sigma3"].map(String::from));
    }
    let rows = survey
        .probes
        .iter()
        .map(|p| {
            let mut row: Vec<String> = p.point.iter().map(f64::to_string).collect();
            row.extend([p.scalar, p.energy, p.eq_residual, p.ham1, p.ham2, p.error_bar].map(|v| v.to_string()));
            if let (Some(b), Some(m)) = (p.bianchi, p.margins) {
                row.push(b.to_string());
                row.extend([m.a12, m.c12, m.ricci_min, m.ricci_two_min, m.r_minus_4_sigma3].map(|v| v.to_string()));
            }
            row
        })
        .collect();
    Ok(Outcome {
        pass,
        summary: format!(
            "{} catalog {}: worst residual {:.3e} (tol {tol:e}), ham3_constancy {:.3e}, energy {}",
            verdict(pass),
            a.metric,
            survey.worst_residual(),
            survey.ham3_constancy,
            survey.mean_energy
        ),
        details: vec![format!(
            "eq {:.3e} ham1 {:.3e} ham2 {:.3e} error_bar {:.3e} over {} points",
            survey.max_eq_residual,
            survey.max_ham1,
            survey.max_ham2,
            survey.max_error_bar,
            survey.probes.len()
        )],
        artifacts: artifacts(&a.common, &format!("catalog_{}", a.metric), &report, header, rows)?,
    })
}

#[derive(Serialize)]
struct ConeCheck {
    channel: String,
    initial: f64,
    /// Smallest value along the run over `1 + |Rm|` (`1 + |m|` in 3D).
    scaled_minimum: f64,
    /// The channel started inside its cone, so it is expected to stay there.
    tracked: bool,
    preserved: bool,
}

#[derive(Serialize)]
struct Checkpoint {
    t: f64,
    state: FlowState,
}

#[derive(Serialize)]
struct FlowReport {
    schema_version: u32,
    command: &'static str,
    init: String,
    seed: u64,
    tol: f64,
    system: FlowSystem,
    status: FlowStatus,
    blow_up_time: Option<f64>,
    steps: usize,
    rejections: usize,
    controls: Controls,
    initial_state: FlowState,
    final_state: FlowState,
    cone_checks: Vec<ConeCheck>,
    checkpoints: Vec<Checkpoint>,
    pass: bool,
}

fn init_name(k: InitKind) -> &'static str {
    match k {
        InitKind::Sphere => "sphere",
        InitKind::Cylinder => "cylinder",
        InitKind::Zero => "zero",
        InitKind::Eigen3 => "eigen3",
        InitKind::RandomWpic => "random-wpic",
    }
}

fn initial_operator(a: &FlowArgs) -> Result<CurvOp4, CliError> {
    Ok(match a.init {
        InitKind::Sphere => CurvOp4::new(Matrix3::identity() * a.a0, Matrix3::zeros(), Matrix3::identity() * a.a0),
        InitKind::Cylinder => {
            let t = CurvatureTensor::constant_curvature(3, a.a0).direct_sum(&CurvatureTensor::zeros(1));
            build_from_riemann(&t, Orientation::Positive)?
        }
        InitKind::Zero => CurvOp4::zero(),
        InitKind::RandomWpic => {
            let spec = SampleSpec::new(a.common.seed, a.index + 1, &[Constraint::Bianchi, Constraint::Wpic]);
            Sampler::new(&spec)?.sample(a.index)?.op
        }
        InitKind::Eigen3 => unreachable!("handled by the eigenvalue system"),
    })
}

pub fn flow(a: &FlowArgs) -> Result<Outcome, CliError> {
    if !a.a0.is_finite() {
        return Err(CliError::Usage(format!("--a0 must be finite, got {}", a.a0)));
    }
    let controls = Controls {
        t_max: a.t_max,
        rel_tol: a.rel_tol,
        abs_tol: a.abs_tol,
        rm_ceiling: a.rm_ceiling,
        ..Controls::default()
    };
    let (tr, cones): (ReactionTrajectory, &[&str]) = if a.init == InitKind::Eigen3 {
        let m: [f64; 3] = a
            .m
            .clone()
            .try_into()
            .map_err(|_| CliError::Usage("--m takes exactly three values".into()))?;
        (integrate3(m, &controls)?, &["ricci2", "m12"])
    } else {
        (integrate4(&initial_operator(a)?, &controls)?, &["u", "v", "a12", "c12"])
    };
    let default_tol = if tr.system == FlowSystem::Eigen3 { 1e-8 } else { 1e-6 };
    let tol = tolerance(&a.common, default_tol)?;
    let cone_checks: Vec<ConeCheck> = cones
        .iter()
        .map(|&c| {
            let initial = tr.channel(c).expect("known channel")[0];
            let scaled_minimum = tr.scaled_minimum(c).expect("known channel");
            let tracked = initial >= 0.0;
            ConeCheck {
                channel: c.to_string(),
                initial,
                scaled_minimum,
                tracked,
                preserved: !tracked || scaled_minimum >= -tol,
            }
        })
        .collect();
    let failed = matches!(tr.status, FlowStatus::StepFailure { .. });
    let pass = !failed && cone_checks.iter().all(|c| c.preserved);
    let name = init_name(a.init);
    let report = FlowReport {
        schema_version: SCHEMA_VERSION,
        command: "flow",
        init: name.to_string(),
        seed: a.common.seed,
        tol,
        system: tr.system,
        status: tr.status.clone(),
        blow_up_time: tr.blow_up_time(),
        steps: tr.len() - 1,
        rejections: tr.rejections,
        controls,
        initial_state: tr.states[0].clone(),
        final_state: tr.states[tr.len() - 1].clone(),
        cone_checks,
        checkpoints: tr
            .at_checkpoints(&a.checkpoints)
            .into_iter()
            .map(|(t, state)| Checkpoint { t, state })
            .collect(),
        pass,
    };
    let mut header = vec!["t".to_string()];
    header.extend(tr.channels.iter().cloned());
    let rows = tr
        .times
        .iter()
        .zip(&tr.monitors)
        .map(|(t, row)| std::iter::once(t).chain(row).map(f64::to_string).collect())
        .collect();
    let status = match &tr.status {
        FlowStatus::Completed => format!("completed at t = {}", tr.times[tr.len() - 1]),
        FlowStatus::BlowUp { t_star, .. } => format!("blow-up at t* = {t_star:.6}"),
        FlowStatus::StepFailure { t, reason } => format!("step failure at t = {t}: {reason}"),
    };
    let details = report
        .cone_checks
        .iter()
        .map(|c| {
            format!(
                "{}: initial {:.6e}, scaled minimum {:.3e}{}",
                c.channel,
                c.initial,
                c.scaled_minimum,
                if c.tracked { "" } else { " (started outside, not tracked)" }
            )
        })
        .collect();
    Ok(Outcome {
        pass,
        summary: format!("{} flow {name}: {status}, {} steps", verdict(pass), report.steps),
        details,
        artifacts: artifacts(&a.common, &format!("flow_{name}"), &report, header, rows)?,
    })
}

pub fn audit(a: &AuditArgs) -> Result<Outcome, CliError> {
    let campaign = Campaign::parse(&a.campaign).map_err(|_| {
        let ids: Vec<&str> = Campaign::ALL.iter().map(|c| c.id()).collect();
        CliError::Usage(format!("unknown campaign `{}`; known: {}", a.campaign, ids.join(", ")))
    })?;
    let constraints: Vec<Constraint> = if a.constraints.is_empty() {
        campaign.required().to_vec()
    } else {
        a.constraints
            .iter()
            .map(|s| Constraint::parse(s.trim()))
            .collect::<Result<_, _>>()?
    };
    let tol = tolerance(&a.common, 1e-9)?;
    let mut spec = SampleSpec::new(a.common.seed, a.samples, &constraints).with_scale(a.scale);
    spec.allow_shift = !a.no_shift;
    let exec = if a.sequential { Execution::Sequential } else { Execution::default() };
    let started = Instant::now();
    let mut report = run_campaign(campaign.id(), &spec, tol, exec)?;
    report.wall_time = started.elapsed().as_secs_f64();
    let pass = !report.is_violation();
    let fields = report.summary_fields();
    if let Some(ledger) = &a.ledger {
        append_ledger(ledger, &fields)?;
    }
    let header = fields.iter().map(|(k, _)| k.to_string()).collect();
    let row = fields.iter().map(|(_, v)| v.clone()).collect();
    let mut summary = format!(
        "{} audit {}: {}/{} pass, worst residual {:.3e} (tol {tol:e}), {} counterexamples",
        verdict(pass),
        report.campaign,
        report.passes,
        report.total,
        report.worst_residual,
        report.counterexamples.len()
    );
    if report.kind == CampaignKind::Falsification {
        summary.push_str(" (falsification search: counterexamples are findings)");
    }
    let mut details = vec![format!(
        "acceptance rate {:.4}, shifted samples {}, wall time {:.3} s",
        report.acceptance_rate, report.shifted_samples, report.wall_time
    )];
    details.extend(report.finding.clone());
    details.extend(report.certificates.iter().map(|c| {
        format!(
            "certificate {}: {} lhs terms, {} rhs terms, remainder {} terms",
            c.identity, c.lhs_terms, c.rhs_terms, c.remainder_terms
        )
    }));
    Ok(Outcome {
        pass,
        summary,
        details,
        artifacts: artifacts(&a.common, &format!("audit_{}", report.campaign), &report, header, vec![row])?,
    })
}

pub fn frames(a: &FramesArgs) -> Result<Outcome, CliError> {
    let tol = tolerance(&a.common, 1e-6)?;
    let spec = SampleSpec::new(a.common.seed, a.operators, &[Constraint::Bianchi]).with_scale(a.scale);
    let exec = if a.sequential { Execution::Sequential } else { Execution::default() };
    let r = frame_consistency(&spec, a.restarts, tol, exec)?;
    let pass = !r.is_violation();
    let header = ["index", "frame_min", "block_value", "deviation", "reflected"].map(String::from).to_vec();
    let rows = r
        .records
        .iter()
        .map(|x| {
            vec![
                x.index.to_string(),
                x.frame_min.to_string(),
                x.block_value.to_string(),
                x.deviation.to_string(),
                x.reflected.to_string(),
            ]
        })
        .collect();
    Ok(Outcome {
        pass,
        summary: format!(
            "{} frames: {}/{} within tol {tol:e}, worst deviation {:.3e}, kappa {}",
            verdict(pass),
            r.passes,
            r.total,
            r.worst_deviation,
            r.kappa
        ),
        details: vec![format!("{} restarts per operator, scale {}", r.restarts, r.scale)],
        artifacts: artifacts(&a.common, "frames", &r, header, rows)?,
    })
}

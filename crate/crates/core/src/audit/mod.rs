//! Seeded sampling of algebraic curvature operators and frames, brute-force
//! checks of block-algebra identities and implications, and a falsification
//! search for the max-form pinching equivalence.

mod campaigns;
mod frames;
mod identity;
mod sample;

pub use campaigns::{
    run_campaign, run_identity_campaign, AuditReport, Campaign, CampaignKind, Counterexample, PINCHING_LIMIT,
    PINCHING_RANGE, SCHEMA_VERSION,
};
pub use frames::{
    calibrate_block_factor, frame_consistency, minimize_isotropic_over_frames, minimize_isotropic_seeded, FrameConsistency,
    FrameMinimum, FrameRecord, DEFAULT_FRAME_SEED,
};
pub use identity::{
    symbolic_certificates, symbolic_spectra, u_rearrangement, v_rearrangement, BlockSpectra, Certificate, Poly, Ring,
};
pub use sample::{sample_curvop, sample_frame, Constraint, Sample, SampleSpec, Sampler, ACCEPTANCE_FLOOR};

//! Small-divisor sequences and the step-by-step band averaging that removes
//! low orders one dyadic band at a time.

mod pipeline;
mod sequences;
mod split;
mod step;

pub use pipeline::{
    calibrate_alpha0, normalize_low_orders, step_count, step_start, PipelineResult, StepCertificate, BAND_RESIDUAL_TOL,
};
pub use sequences::{
    anchor, anchor_convexity, b_from_a, bruno_check, convexity_inequalities, make_a_sequence, BrunoVerdict,
    ConvexityReport, SequencePair, B_START,
};
pub use split::{corank1_profile, corank1_split, SplitProfile, SplitResult};
pub use step::{
    averaging_step, averaging_step_with_cap, coefficient_bound, lambda_constant, BoundWitness, StepOutput, BOUND_RTOL,
};

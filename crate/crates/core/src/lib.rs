pub mod coefficients;
pub mod complex;
pub mod error;
pub mod exact;
pub mod mellin;
pub mod mp;
pub mod scalar;
pub mod summation;

pub use coefficients::{
    compute_exact, compute_float, cross_validate, CoefficientTable, ExactCoefficientTable, FloatCoefficientTable,
    PrecisionConfig,
};
pub use error::{Error, Result};
pub use mp::MpFloat;
pub use scalar::{Real, Scalar};
pub use summation::SummationMode;
pub use complex::ComplexValue;
pub use mellin::{EvaluationTolerance, Evaluator64, EvaluatorMp, MellinEvaluator};
pub mod zeros;
pub use zeros::{locate_rho1, newton_refine, scan_strip, wall_inequality_check, winding_number, Rectangle, StripScan, Wall, WindingCertificate, WindingConfig, ZeroEstimate};
pub mod asymptotics;
pub use asymptotics::{dyadic_scaled_max, envelope_exponent, oscillatory_fit, sign_changes, DyadicReport, FitReport, OscillationReport};
pub mod volterra;
pub use volterra::{kernel_k, neumann_partial, resolvent_decay_fit, resolvent_mellin, solve_resolvent, LogGrid, ResolventGrid};
pub mod transforms;
pub use transforms::{apply_transfer, bootstrap_check, transfer_mode_check, verify_ag_identity, verify_discrete_volterra, IdentityReport, ShiftedSequence};

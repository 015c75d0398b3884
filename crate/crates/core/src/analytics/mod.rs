//! Closed-form curves, least-squares fitting and calibration arithmetic.

mod calibration;
mod fit;
mod models;
mod syndromes;

pub use calibration::{calibrate_readout, forward_readout, MultiQubitReadout, ReadoutCalibration};
pub use fit::{default_free_params, fit_curve, initial_guess, DataPoint, FitResult};
pub use models::{convention_code, evaluate_model, CurveModel, ModelId};
pub use syndromes::{detected_syndrome_probabilities, infer_input_errors, syndrome_probabilities, total_error};

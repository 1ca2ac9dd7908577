//! Self-validated ensemble modeling (SVEM) for small designed experiments.
//!
//! Each bootstrap iteration assigns every run an exponential training weight
//! and an anti-correlated auto-validation weight, grows a path of candidate
//! models on the training weights, keeps the candidate with the smallest
//! auto-validation error, and stores its dense coefficient vector. The final
//! model is the column mean of those vectors.
//!
//! All numerical code is generic over [`Real`] (`f32` or `f64`); the `*64`
//! and `*32` aliases below fix the scalar.

pub mod casestudy;
pub mod designs;
pub mod engine;
pub mod error;
pub mod evaluation;
pub mod rng;
pub mod scalar;
pub mod selectors;
pub mod sim;
pub mod weights;
pub mod wls;

pub use casestudy::{load_case_study, run_case_study, CaseStudyDataset, CaseStudyMethod, CaseStudyReport};
pub use designs::{expand_full_quadratic, make_bbd, make_dsd, make_sfd, Design, DesignKind, ModelMatrix, Term};
pub use engine::{svem_fit, svem_predict, EnsembleMatrix, SvemFit, SvemModel};
pub use error::{Result, SvemError};
pub use evaluation::{evaluate_on_sfd, r_squared, rmspe, EvalReport};
pub use rng::SeedStream;
pub use scalar::Real;
pub use selectors::{Criterion, SelectedModel, SelectorKind, SelectorSpec};
pub use sim::{gen_true_model, run_nboot_sweep, run_scenario, Method, SimRecord, SimResult, SimScenario, Sparsity, TrueModel};
pub use weights::{draw_weights, WeightPair};
pub use wls::{weighted_sse, wls_fit, WlsFit};

pub type Design64 = Design<f64>;
pub type ModelMatrix64 = ModelMatrix<f64>;
pub type WeightPair64 = WeightPair<f64>;
pub type WlsFit64 = WlsFit<f64>;
pub type SelectedModel64 = SelectedModel<f64>;
pub type SvemModel64 = SvemModel<f64>;
pub type SvemFit64 = SvemFit<f64>;
pub type EnsembleMatrix64 = EnsembleMatrix<f64>;
pub type EvalReport64 = EvalReport<f64>;
pub type TrueModel64 = TrueModel<f64>;
pub type CaseStudyReport64 = CaseStudyReport<f64>;

pub type Design32 = Design<f32>;
pub type ModelMatrix32 = ModelMatrix<f32>;
pub type WeightPair32 = WeightPair<f32>;
pub type WlsFit32 = WlsFit<f32>;
pub type SelectedModel32 = SelectedModel<f32>;
pub type SvemModel32 = SvemModel<f32>;
pub type SvemFit32 = SvemFit<f32>;
pub type EnsembleMatrix32 = EnsembleMatrix<f32>;
pub type EvalReport32 = EvalReport<f32>;
pub type TrueModel32 = TrueModel<f32>;
pub type CaseStudyReport32 = CaseStudyReport<f32>;

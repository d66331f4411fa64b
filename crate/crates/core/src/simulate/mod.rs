//! Copula samplers, the data-generating processes of the simulation study
//! and the Monte-Carlo harness.

pub mod copula;
pub mod dgp;
pub mod study;

pub use copula::{sample_copula, CopulaFamily, CopulaSpec};
pub use dgp::{dgp1_first_series, dgp1_second_series, dgp_models, generate_dgp, Dgp, DgpSettings};
pub use study::{run_replicate, run_study, McStudyResult, McStudySpec, QuantileEntry, StudyMode, StudyRow};

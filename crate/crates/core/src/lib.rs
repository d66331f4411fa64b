//! Tests of conditional independence between time series with arbitrary
//! margins, built on generalized errors obtained by the randomized
//! probability integral transform.

pub mod asymptotics;
pub mod depmeasures;
pub mod distribution;
pub mod domain;
pub mod error;
pub mod mobius;
pub mod models;
pub mod pit;
pub mod report;
pub mod simulate;
pub mod special;
pub mod stats;

pub use distribution::{
    Component, ConditionalDistribution, ConditionalDistributionTrace, ConditionalLaw, Innovation,
};
pub use domain::{
    build_subset_lag_family, ErrorMatrix, GeneralizedErrorPanel, SeriesPanel, SubsetLagFamily,
    SubsetLags,
};
pub use error::{Error, Result};
pub use pit::{chi0, j_transform, randomized_pit, RandomizationPlan};

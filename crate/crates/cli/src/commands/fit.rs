use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};

use crate::config::{covariates_from, FitRequest};
use crate::data::read_csv;
use crate::Outcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Ingarch,
    GaussianHmm,
    PoissonHmm,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    /// Column to model.
    #[arg(long)]
    pub column: String,
    #[arg(long, value_enum)]
    pub kind: ModelKind,
    /// Number of regimes J (HMMs).
    #[arg(long, default_value_t = 1)]
    pub regimes: usize,
    /// Autoregressive order (HMMs) or lags of the intensity (INGARCH).
    #[arg(long)]
    pub p: Option<usize>,
    /// Lags of the counts (INGARCH).
    #[arg(long, default_value_t = 1)]
    pub q: usize,
    /// Add a regime with a point mass at zero (Gaussian HMM).
    #[arg(long)]
    pub zero_inflated: bool,
    /// Comma-separated covariate columns (HMMs); an intercept is added.
    #[arg(long, value_delimiter = ',')]
    pub covariates: Vec<String>,
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iterations: usize,
    /// Output model file (JSON).
    #[arg(long, short)]
    pub out: PathBuf,
}

impl FitArgs {
    fn request(&self) -> FitRequest {
        match self.kind {
            ModelKind::Ingarch => FitRequest::Ingarch {
                p: self.p.unwrap_or(1),
                q: self.q,
            },
            ModelKind::GaussianHmm => FitRequest::GaussianHmm {
                regimes: self.regimes,
                p: self.p.unwrap_or(0),
                zero_inflated: self.zero_inflated,
                tolerance: self.tolerance,
                max_iterations: self.max_iterations,
            },
            ModelKind::PoissonHmm => FitRequest::PoissonHmm {
                regimes: self.regimes,
                p: self.p.unwrap_or(0),
                tolerance: self.tolerance,
                max_iterations: self.max_iterations,
            },
        }
    }
}

pub fn run(args: &FitArgs) -> Result<Outcome> {
    let table = read_csv(&args.input)?;
    let series = table.column(&args.column)?;
    let covariates = covariates_from(&table, &args.covariates)?;
    let model = args
        .request()
        .fit(series, covariates.as_ref())
        .with_context(|| format!("fitting column '{}'", args.column))?;
    let text = serde_json::to_string_pretty(&model)?;
    std::fs::write(&args.out, text + "\n").with_context(|| format!("writing {}", args.out.display()))?;
    if let Some(fit) = match &model {
        gei::models::ModelSpec::GaussianHmm(s) => s.fit.as_ref(),
        gei::models::ModelSpec::PoissonHmm(s) => s.fit.as_ref(),
        gei::models::ModelSpec::Ingarch(s) => s.fit.as_ref(),
    } {
        println!(
            "log-likelihood {:.6} after {} iterations (converged: {})",
            fit.log_likelihood, fit.iterations, fit.converged
        );
        for w in &fit.warnings {
            eprintln!("warning: {w}");
        }
    }
    Ok(Outcome::Ok)
}

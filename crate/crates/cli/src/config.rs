//! Model configuration of `gei test` and the fitting requests shared with
//! `gei fit`.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use gei::models::{
    fit_gaussian_hmm, fit_ingarch, fit_poisson_hmm, Covariates, GaussianHmmFitOptions, ModelSpec,
};
use serde::Deserialize;

use crate::data::Table;

fn one() -> usize {
    1
}
fn default_tolerance() -> f64 {
    1e-8
}
fn default_max_iterations() -> usize {
    500
}

/// A model to estimate from the data.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FitRequest {
    /// `p` lags of the intensity, `q` lags of the counts.
    Ingarch {
        #[serde(default = "one")]
        p: usize,
        #[serde(default = "one")]
        q: usize,
    },
    GaussianHmm {
        #[serde(default = "one")]
        regimes: usize,
        #[serde(default)]
        p: usize,
        #[serde(default)]
        zero_inflated: bool,
        #[serde(default = "default_tolerance")]
        tolerance: f64,
        #[serde(default = "default_max_iterations")]
        max_iterations: usize,
    },
    PoissonHmm {
        #[serde(default = "one")]
        regimes: usize,
        #[serde(default)]
        p: usize,
        #[serde(default = "default_tolerance")]
        tolerance: f64,
        #[serde(default = "default_max_iterations")]
        max_iterations: usize,
    },
}

impl FitRequest {
    pub fn fit(&self, series: &[f64], covariates: Option<&Covariates>) -> Result<ModelSpec> {
        Ok(match *self {
            FitRequest::Ingarch { p, q } => {
                if covariates.is_some() {
                    bail!("INGARCH models do not take covariates");
                }
                ModelSpec::Ingarch(fit_ingarch(series, p, q)?)
            }
            FitRequest::GaussianHmm {
                regimes,
                p,
                zero_inflated,
                tolerance,
                max_iterations,
            } => {
                let options = GaussianHmmFitOptions {
                    tolerance,
                    max_iterations,
                    ..Default::default()
                };
                ModelSpec::GaussianHmm(fit_gaussian_hmm(series, covariates, regimes, p, zero_inflated, &options)?)
            }
            FitRequest::PoissonHmm {
                regimes,
                p,
                tolerance,
                max_iterations,
            } => ModelSpec::PoissonHmm(fit_poisson_hmm(series, covariates, regimes, p, tolerance, max_iterations)?),
        })
    }
}

/// One tested series: a data column and either a given model, a model
/// file written by `gei fit`, or a fitting request.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesEntry {
    pub column: String,
    /// Covariate columns; an intercept is added in front.
    #[serde(default)]
    pub covariates: Vec<String>,
    #[serde(default)]
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub model_file: Option<PathBuf>,
    #[serde(default)]
    pub fit: Option<FitRequest>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub series: Vec<SeriesEntry>,
}

/// Series with their models resolved.
pub struct ResolvedSeries {
    pub label: String,
    pub values: Vec<f64>,
    pub covariates: Option<Covariates>,
    pub model: ModelSpec,
    pub fitted: bool,
}

pub fn covariates_from(table: &Table, names: &[String]) -> Result<Option<Covariates>> {
    if names.is_empty() {
        return Ok(None);
    }
    let cols = names
        .iter()
        .map(|c| table.column(c).map(|v| v.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    Ok(Some(Covariates::with_intercept(&cols)?))
}

fn parse_by_extension<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T> {
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        serde_json::from_str(text).map_err(|e| anyhow!("{}: {e}", path.display()))
    } else {
        toml::from_str(text).map_err(|e| anyhow!("{}: {e}", path.display()))
    }
}

pub fn load_model_spec(path: &Path) -> Result<ModelSpec> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let spec: ModelSpec = parse_by_extension(path, &text)?;
    spec.validate().with_context(|| format!("model in {}", path.display()))?;
    Ok(spec)
}

impl ModelConfig {
    /// Reads a TOML or JSON (by extension) configuration.
    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: ModelConfig = parse_by_extension(path, &text)?;
        if cfg.series.len() < 2 {
            bail!("{}: at least two series are needed", path.display());
        }
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((cfg, base))
    }

    pub fn resolve(&self, table: &Table, base: &Path) -> Result<Vec<ResolvedSeries>> {
        self.series
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let ctx = || format!("series {} ('{}')", i + 1, e.column);
                let values = table.column(&e.column).with_context(ctx)?.to_vec();
                let covariates = covariates_from(table, &e.covariates).with_context(ctx)?;
                let (model, fitted) = match (&e.model, &e.model_file, &e.fit) {
                    (Some(m), None, None) => {
                        m.validate().with_context(ctx)?;
                        (m.clone(), false)
                    }
                    (None, Some(f), None) => (load_model_spec(&base.join(f)).with_context(ctx)?, false),
                    (None, None, Some(req)) => (req.fit(&values, covariates.as_ref()).with_context(ctx)?, true),
                    _ => bail!("{}: give exactly one of `model`, `model_file` or `fit`", ctx()),
                };
                Ok(ResolvedSeries {
                    label: e.column.clone(),
                    values,
                    covariates,
                    model,
                    fitted,
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_toml_entries() {
        let cfg: ModelConfig = toml::from_str(
            r#"
            [[series]]
            column = "a"
            fit = { kind = "ingarch" }

            [[series]]
            column = "b"
            covariates = ["z"]
            [series.model]
            model = "ingarch"
            omega = 1.0
            alpha = [0.1]
            beta = []
            "#,
        )
        .unwrap();
        assert_eq!(cfg.series[0].fit, Some(FitRequest::Ingarch { p: 1, q: 1 }));
        assert!(matches!(cfg.series[1].model, Some(ModelSpec::Ingarch(_))));
        assert_eq!(cfg.series[1].covariates, vec!["z"]);
    }

    #[test]
    fn unknown_fields_are_reported() {
        let e = toml::from_str::<ModelConfig>("[[series]]\ncolumn = \"a\"\nfitt = 1\n").unwrap_err();
        assert!(e.to_string().contains("fitt"), "{e}");
    }

    #[test]
    fn exactly_one_model_source() {
        let table = Table {
            headers: vec!["a".into(), "b".into()],
            columns: vec![vec![1.0; 30], vec![2.0; 30]],
        };
        let cfg = ModelConfig {
            series: vec![
                SeriesEntry {
                    column: "a".into(),
                    covariates: vec![],
                    model: None,
                    model_file: None,
                    fit: None,
                };
                2
            ],
        };
        let err = cfg.resolve(&table, Path::new(".")).err().unwrap();
        assert!(err.to_string().contains("exactly one"), "{err}");
    }
}

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use gei::simulate::{run_study, McStudyResult, McStudySpec, StudyMode};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::Outcome;

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Study file (TOML, or JSON by extension).
    pub spec: PathBuf,
    /// Output directory, created if needed.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Override the number of replicates of every study.
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Override the seed of every study.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// A study file: optional `[defaults]` merged into every `[[study]]`, or a
/// single study at the top level.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyFile {
    pub title: Option<String>,
    pub studies: Vec<McStudySpec>,
}

fn to_json_value(text: &str, path: &Path) -> Result<serde_json::Value> {
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        serde_json::from_str(text).map_err(|e| anyhow!("{}: {e}", path.display()))
    } else {
        let v: toml::Value = toml::from_str(text).map_err(|e| anyhow!("{}: {e}", path.display()))?;
        Ok(serde_json::to_value(v)?)
    }
}

fn merge(defaults: &serde_json::Map<String, serde_json::Value>, study: &serde_json::Value) -> Result<serde_json::Value> {
    let mut out = defaults.clone();
    let table = study.as_object().ok_or_else(|| anyhow!("each study must be a table"))?;
    for (k, v) in table {
        match (out.get_mut(k), v) {
            // nested tables (copula, mode) merge key by key
            (Some(serde_json::Value::Object(base)), serde_json::Value::Object(over)) => {
                for (k2, v2) in over {
                    base.insert(k2.clone(), v2.clone());
                }
            }
            _ => {
                out.insert(k.clone(), v.clone());
            }
        }
    }
    Ok(serde_json::Value::Object(out))
}

impl StudyFile {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let value = to_json_value(text, path)?;
        let mut root = match value {
            serde_json::Value::Object(m) => m,
            _ => bail!("{}: expected a table at the top level", path.display()),
        };
        let title = match root.remove("title") {
            Some(serde_json::Value::String(s)) => Some(s),
            Some(_) => bail!("{}: `title` must be a string", path.display()),
            None => None,
        };
        let defaults = match root.remove("defaults") {
            Some(serde_json::Value::Object(m)) => m,
            Some(_) => bail!("{}: `defaults` must be a table", path.display()),
            None => Default::default(),
        };
        let raw: Vec<serde_json::Value> = match root.remove("study") {
            Some(serde_json::Value::Array(list)) => {
                if let Some(k) = root.keys().next() {
                    bail!("{}: unexpected top-level key `{k}` next to [[study]]", path.display());
                }
                list
            }
            Some(_) => bail!("{}: `study` must be an array of tables", path.display()),
            None => vec![serde_json::Value::Object(root)],
        };
        if raw.is_empty() {
            bail!("{}: no studies", path.display());
        }
        let studies = raw
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let merged = merge(&defaults, s)?;
                let name = merged.get("name").and_then(|v| v.as_str()).unwrap_or("").to_string();
                let spec: McStudySpec = serde_json::from_value(merged)
                    .map_err(|e| anyhow!("{}: study {} {name}: {e}", path.display(), i + 1))?;
                spec.validate()
                    .map_err(|e| anyhow!("{}: study {} {name}: {e}", path.display(), i + 1))?;
                Ok(spec)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { title, studies })
    }
}

/// Column label of a study in the wide tables.
fn study_label(spec: &McStudySpec, index: usize) -> String {
    if let Some(name) = &spec.name {
        return name.clone();
    }
    let mut s = spec.copula.family.name().to_string();
    if let Some(t) = spec.copula.kendall_tau {
        s.push_str(&format!(" tau={t:.4}"));
    }
    format!("{} {s} (#{})", spec.dgp.name(), index + 1)
}

#[derive(Serialize, Deserialize)]
struct StudyManifest {
    name: String,
    n: usize,
    seed: u64,
    replicates: usize,
    failed_replicates: usize,
    runtime_seconds: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    failures: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    warnings: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    spec_file: String,
    spec_sha256: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    title: Option<String>,
    threads: usize,
    quantile_estimator: String,
    runtime_seconds: f64,
    studies: Vec<StudyManifest>,
}

fn write_long_tables(out: &Path, results: &[(String, McStudyResult)]) -> Result<()> {
    let mut rej = csv::Writer::from_path(out.join("rejections.csv"))?;
    rej.write_record([
        "study", "dgp", "copula", "kendall_tau", "n", "lag_shift", "statistic", "m", "replicates",
        "level", "rejection_percent", "standard_error",
    ])?;
    let mut qua = csv::Writer::from_path(out.join("quantiles.csv"))?;
    qua.write_record(["study", "dgp", "copula", "kendall_tau", "n", "lag_shift", "statistic", "m", "replicates", "prob", "value"])?;
    let mut raw = csv::Writer::from_path(out.join("values.csv"))?;
    raw.write_record(["study", "n", "statistic", "m", "index", "value"])?;
    for (label, r) in results {
        let s = &r.spec;
        let tau = s.copula.kendall_tau.map(|t| t.to_string()).unwrap_or_default();
        for row in &r.rows {
            let common = [
                label.clone(),
                s.dgp.name().to_string(),
                s.copula.family.name().to_string(),
                tau.clone(),
                s.n.to_string(),
                s.lag_shift.to_string(),
                row.statistic.clone(),
                row.m.to_string(),
                row.replicates.to_string(),
            ];
            match s.mode {
                StudyMode::Rejection => {
                    let mut rec = common.to_vec();
                    rec.extend([
                        s.level.to_string(),
                        format!("{:.2}", row.rejection_percent),
                        format!("{:.2}", row.standard_error),
                    ]);
                    rej.write_record(rec)?;
                }
                StudyMode::Quantiles { .. } => {
                    for q in &row.quantiles {
                        let mut rec = common.to_vec();
                        rec.extend([q.prob.to_string(), format!("{:.6}", q.value)]);
                        qua.write_record(rec)?;
                    }
                }
            }
        }
        for ((stat, m), values) in &r.values {
            for (i, v) in values.iter().enumerate() {
                raw.write_record([label.clone(), s.n.to_string(), stat.clone(), m.to_string(), i.to_string(), v.to_string()])?;
            }
        }
    }
    rej.flush()?;
    qua.flush()?;
    raw.flush()?;
    Ok(())
}

/// Rejection percentages in wide form: one row per
/// `(n, lag shift, statistic, M)`, one column per study.
fn write_rejection_table(out: &Path, results: &[(String, McStudyResult)]) -> Result<()> {
    let rejection: Vec<&(String, McStudyResult)> =
        results.iter().filter(|(_, r)| r.spec.mode == StudyMode::Rejection).collect();
    if rejection.is_empty() {
        return Ok(());
    }
    let mut columns: Vec<String> = Vec::new();
    let mut cells: BTreeMap<(usize, usize, usize, usize), BTreeMap<String, f64>> = BTreeMap::new();
    let mut stat_order: Vec<String> = Vec::new();
    for (label, r) in &rejection {
        if !columns.contains(label) {
            columns.push(label.clone());
        }
        for row in &r.rows {
            let si = match stat_order.iter().position(|s| *s == row.statistic) {
                Some(i) => i,
                None => {
                    stat_order.push(row.statistic.clone());
                    stat_order.len() - 1
                }
            };
            cells
                .entry((r.spec.n, r.spec.lag_shift, si, row.m))
                .or_default()
                .insert(label.clone(), row.rejection_percent);
        }
    }
    let mut w = csv::Writer::from_path(out.join("rejection_table.csv"))?;
    let mut header = vec!["n".to_string(), "lag_shift".into(), "statistic".into(), "m".into()];
    header.extend(columns.iter().cloned());
    w.write_record(&header)?;
    for ((n, lag, si, m), row) in &cells {
        let mut rec = vec![n.to_string(), lag.to_string(), stat_order[*si].clone(), m.to_string()];
        rec.extend(columns.iter().map(|c| row.get(c).map(|v| format!("{v:.1}")).unwrap_or_default()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Quantiles laid out with one row per statistic and one column per
/// `(M, probability)`.
fn write_quantile_table(out: &Path, results: &[(String, McStudyResult)]) -> Result<()> {
    for (label, r) in results {
        let StudyMode::Quantiles { probs } = &r.spec.mode else {
            continue;
        };
        let mut stats: Vec<String> = Vec::new();
        for row in &r.rows {
            if !stats.contains(&row.statistic) {
                stats.push(row.statistic.clone());
            }
        }
        let file = if results.len() == 1 {
            "quantile_table.csv".to_string()
        } else {
            format!("quantile_table_{}_n{}.csv", sanitize(label), r.spec.n)
        };
        let mut w = csv::Writer::from_path(out.join(file))?;
        let mut header = vec!["statistic".to_string()];
        for m in &r.spec.randomizations {
            for p in probs {
                header.push(format!("M={m} q{}", p * 100.0));
            }
        }
        w.write_record(&header)?;
        for s in &stats {
            let mut rec = vec![s.clone()];
            for &m in &r.spec.randomizations {
                let row = r.row(s, m);
                for (i, _) in probs.iter().enumerate() {
                    rec.push(row.map(|x| format!("{:.4}", x.quantiles[i].value)).unwrap_or_default());
                }
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
    }
    Ok(())
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

pub fn run(args: &SimulateArgs) -> Result<Outcome> {
    let bytes = std::fs::read(&args.spec).with_context(|| format!("reading {}", args.spec.display()))?;
    let text = String::from_utf8(bytes.clone()).with_context(|| format!("{} is not UTF-8", args.spec.display()))?;
    let mut file = StudyFile::parse(&text, &args.spec)?;
    for s in &mut file.studies {
        if let Some(r) = args.replicates {
            s.replicates = r;
        }
        if let Some(seed) = args.seed {
            s.seed = seed;
        }
        s.validate()?;
    }
    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;

    let total = Instant::now();
    let mut results = Vec::new();
    let mut manifests = Vec::new();
    for (i, spec) in file.studies.iter().enumerate() {
        let label = study_label(spec, i);
        eprintln!("study {}/{}: {label}", i + 1, file.studies.len());
        let start = Instant::now();
        let result = run_study(spec).with_context(|| format!("study {} ({label})", i + 1))?;
        let secs = start.elapsed().as_secs_f64();
        manifests.push(StudyManifest {
            name: label.clone(),
            n: spec.n,
            seed: spec.seed,
            replicates: spec.replicates,
            failed_replicates: result.failed_replicates,
            runtime_seconds: secs,
            failures: result.failures.clone(),
            warnings: result.warnings.clone(),
        });
        results.push((label, result));
    }
    write_long_tables(&args.out, &results)?;
    write_rejection_table(&args.out, &results)?;
    write_quantile_table(&args.out, &results)?;
    let manifest = Manifest {
        spec_file: args.spec.display().to_string(),
        spec_sha256: format!("{:x}", Sha256::digest(&bytes)),
        title: file.title.clone(),
        threads: rayon::current_num_threads(),
        quantile_estimator: "type7".to_string(),
        runtime_seconds: total.elapsed().as_secs_f64(),
        studies: manifests,
    };
    let path = args.out.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {} studies to {}", results.len(), args.out.display());
    Ok(Outcome::Ok)
}

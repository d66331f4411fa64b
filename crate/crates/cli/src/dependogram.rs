//! Dependogram: one bar per `(A, ℓ)` with the Cramér–von Mises statistic,
//! and a critical line per cardinality at the upper `α` quantile of `ξ_{|A|}`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use gei::asymptotics::xi_quantile;
use gei::report::{StatisticReport, TermKind};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bar {
    pub subset: Vec<usize>,
    pub lag: Vec<i64>,
    pub value: f64,
    pub p_value: f64,
    pub critical: f64,
    /// `p_value < alpha`, i.e. the bar exceeds its critical line.
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dependogram {
    pub bars: Vec<Bar>,
    pub alpha: f64,
    /// Critical value per cardinality.
    pub critical: BTreeMap<usize, f64>,
    pub labels: Vec<String>,
}

impl Dependogram {
    /// Built from the Cramér–von Mises terms of a report.
    pub fn from_report(report: &StatisticReport, alpha: f64) -> Result<Self> {
        let terms: Vec<_> = report.terms_of_kind(TermKind::Cvm).collect();
        if terms.is_empty() {
            bail!("the report has no Cramér–von Mises terms");
        }
        let mut critical = BTreeMap::new();
        for t in &terms {
            let k = t.subset.len();
            if let std::collections::btree_map::Entry::Vacant(e) = critical.entry(k) {
                e.insert(xi_quantile(k, alpha)?);
            }
        }
        let bars = terms
            .iter()
            .map(|t| Bar {
                subset: t.subset.clone(),
                lag: t.lag.clone(),
                value: t.value,
                p_value: t.p_value,
                critical: critical[&t.subset.len()],
                significant: t.p_value < alpha,
            })
            .collect();
        Ok(Self {
            bars,
            alpha,
            critical,
            labels: report.metadata.labels.clone(),
        })
    }

    fn subset_name(&self, subset: &[usize]) -> String {
        let names: Vec<&str> = subset.iter().map(|&j| self.labels[j].as_str()).collect();
        format!("{{{}}}", names.join(","))
    }

    /// Lag shown under a bar: the lags of `A` after its first member.
    fn lag_name(subset: &[usize], lag: &[i64]) -> String {
        let parts: Vec<String> = subset[1..].iter().map(|&j| lag[j].to_string()).collect();
        if parts.len() == 1 {
            parts[0].clone()
        } else {
            format!("({})", parts.join(","))
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
        w.write_record(["subset", "lag", "statistic", "p_value", "critical", "significant"])?;
        for b in &self.bars {
            let subset: Vec<String> = b.subset.iter().map(|&j| self.labels[j].clone()).collect();
            let lag: Vec<String> = b.lag.iter().map(|l| l.to_string()).collect();
            w.write_record([
                subset.join(" "),
                lag.join(" "),
                b.value.to_string(),
                b.p_value.to_string(),
                b.critical.to_string(),
                b.significant.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_svg(&self) -> String {
        const BAR: f64 = 14.0;
        const GAP: f64 = 4.0;
        const GROUP_GAP: f64 = 24.0;
        const LEFT: f64 = 60.0;
        const TOP: f64 = 30.0;
        const PLOT_H: f64 = 260.0;
        const BOTTOM: f64 = 70.0;

        // consecutive bars sharing a subset form a group
        let mut groups: Vec<(Vec<usize>, Vec<&Bar>)> = Vec::new();
        for b in &self.bars {
            match groups.last_mut() {
                Some((s, v)) if *s == b.subset => v.push(b),
                _ => groups.push((b.subset.clone(), vec![b])),
            }
        }
        let plot_w: f64 = groups
            .iter()
            .map(|(_, v)| v.len() as f64 * (BAR + GAP))
            .sum::<f64>()
            + GROUP_GAP * (groups.len().saturating_sub(1)) as f64;
        let width = LEFT + plot_w + 20.0;
        let height = TOP + PLOT_H + BOTTOM;
        let top_value = self
            .bars
            .iter()
            .map(|b| b.value.max(b.critical))
            .fold(0.0f64, f64::max)
            * 1.1;
        let top_value = if top_value > 0.0 { top_value } else { 1.0 };
        let y = |v: f64| TOP + PLOT_H * (1.0 - v.max(0.0) / top_value);

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="10">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="16" text-anchor="middle" font-size="12">Dependogram of Cramér–von Mises statistics (alpha = {})</text>"#,
            width / 2.0,
            self.alpha
        );
        // axis and ticks
        let _ = writeln!(
            s,
            r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{:.1}" stroke="black"/>"#,
            TOP + PLOT_H
        );
        for i in 0..=4 {
            let v = top_value * i as f64 / 4.0;
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v:.3}</text>"#,
                LEFT - 4.0,
                y(v) + 3.0
            );
        }
        let mut x = LEFT + GAP;
        for (subset, bars) in &groups {
            let start = x;
            for b in bars {
                let fill = if b.significant { "#c0392b" } else { "#4a78b5" };
                let _ = writeln!(
                    s,
                    r#"<rect class="bar" x="{x:.1}" y="{:.2}" width="{BAR}" height="{:.2}" fill="{fill}" data-significant="{}"><title>{} lag {:?}: S = {:.6}, p = {:.4}</title></rect>"#,
                    y(b.value),
                    TOP + PLOT_H - y(b.value),
                    b.significant,
                    self.subset_name(subset),
                    b.lag,
                    b.value,
                    b.p_value
                );
                let _ = writeln!(
                    s,
                    r#"<text x="{:.1}" y="{:.1}" text-anchor="end" transform="rotate(-60 {:.1} {:.1})">{}</text>"#,
                    x + BAR / 2.0,
                    TOP + PLOT_H + 12.0,
                    x + BAR / 2.0,
                    TOP + PLOT_H + 12.0,
                    Self::lag_name(subset, &b.lag)
                );
                x += BAR + GAP;
            }
            let end = x - GAP;
            let c = self.critical[&subset.len()];
            let _ = writeln!(
                s,
                r#"<line class="critical" x1="{start:.1}" y1="{:.2}" x2="{end:.1}" y2="{:.2}" stroke="black" stroke-dasharray="4 3"/>"#,
                y(c),
                y(c)
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                (start + end) / 2.0,
                height - 8.0,
                self.subset_name(subset)
            );
            x += GROUP_GAP;
        }
        let _ = writeln!(
            s,
            r#"<line x1="{LEFT}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black"/>"#,
            TOP + PLOT_H,
            LEFT + plot_w + GAP,
            TOP + PLOT_H
        );
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use gei::report::{ReportMetadata, TermStatistic, REPORT_SCHEMA_VERSION};

    fn report(values: &[(Vec<usize>, Vec<i64>, f64, f64)]) -> StatisticReport {
        StatisticReport {
            schema_version: REPORT_SCHEMA_VERSION,
            metadata: ReportMetadata {
                n: 100,
                d: 3,
                pair_max_lag: 1,
                triple_max_lag: 0,
                include_triples: true,
                randomizations: 1,
                seed: 0,
                distribution_free: true,
                labels: vec!["a".into(), "b".into(), "c".into()],
            },
            per_term: values
                .iter()
                .map(|(s, l, v, p)| TermStatistic {
                    subset: s.clone(),
                    lag: l.clone(),
                    kind: TermKind::Cvm,
                    value: *v,
                    p_value: *p,
                })
                .collect(),
            combined: vec![],
            warnings: vec![],
        }
    }

    #[test]
    fn flags_follow_p_values() {
        let r = report(&[
            (vec![0, 1], vec![0, 0, 0], 0.01, 0.8),
            (vec![0, 1], vec![0, 1, 0], 0.2, 0.001),
            (vec![0, 1, 2], vec![0, 0, 0], 0.05, 0.04),
        ]);
        let d = Dependogram::from_report(&r, 0.05).unwrap();
        assert_eq!(
            d.bars.iter().map(|b| b.significant).collect::<Vec<_>>(),
            vec![false, true, true]
        );
        assert_eq!(d.critical.len(), 2);
        let svg = d.to_svg();
        assert_eq!(svg.matches("class=\"bar\"").count(), 3);
        assert_eq!(svg.matches("data-significant=\"true\"").count(), 2);
        assert_eq!(svg.matches("class=\"critical\"").count(), 2);
        assert!(svg.contains("{a,b}") && svg.contains("{a,b,c}"));
    }

    #[test]
    fn lag_labels() {
        assert_eq!(Dependogram::lag_name(&[0, 2], &[0, 0, -3]), "-3");
        assert_eq!(Dependogram::lag_name(&[0, 1, 2], &[0, 1, -2]), "(1,-2)");
    }
}

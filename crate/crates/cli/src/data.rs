//! CSV ingestion: one numeric column per series, header row required.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn n(&self) -> usize {
        self.columns.first().map(|c| c.len()).unwrap_or(0)
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        let j = self
            .headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| anyhow!("no column '{name}' (columns: {})", self.headers.join(", ")))?;
        Ok(&self.columns[j])
    }
}

fn is_missing(s: &str) -> bool {
    matches!(s.to_ascii_lowercase().as_str(), "" | "na" | "nan" | "null" | "none" | "?")
}

pub fn parse_csv<R: std::io::Read>(reader: R) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr.headers().context("reading the header row")?.iter().map(String::from).collect();
    if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
        bail!("the CSV needs a header row naming each column");
    }
    if let Some(h) = headers.iter().find(|h| h.parse::<f64>().is_ok()) {
        bail!("header field '{h}' looks numeric; the first row must name the columns");
    }
    for (i, h) in headers.iter().enumerate() {
        if headers[..i].contains(h) {
            bail!("duplicate column name '{h}'");
        }
    }
    let mut columns = vec![Vec::new(); headers.len()];
    for record in rdr.records() {
        let record = record.map_err(|e| anyhow!("malformed CSV: {e}"))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        for (j, field) in record.iter().enumerate() {
            let name = &headers[j];
            if is_missing(field) {
                bail!("line {line}, column '{name}': missing value (complete series are required)");
            }
            let v: f64 = field
                .parse()
                .map_err(|_| anyhow!("line {line}, column '{name}': cannot parse '{field}' as a number"))?;
            if !v.is_finite() {
                bail!("line {line}, column '{name}': value '{field}' is not finite");
            }
            columns[j].push(v);
        }
    }
    if columns[0].is_empty() {
        bail!("the CSV has a header but no data rows");
    }
    Ok(Table { headers, columns })
}

pub fn read_csv(path: &Path) -> Result<Table> {
    let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    parse_csv(file).with_context(|| format!("reading {}", path.display()))
}

pub fn write_csv(path: &Path, headers: &[String], columns: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(headers)?;
    let n = columns.first().map(|c| c.len()).unwrap_or(0);
    for t in 0..n {
        w.write_record(columns.iter().map(|c| c[t].to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_columns() {
        let t = parse_csv("a,b\n1,2\n3, 4.5\n".as_bytes()).unwrap();
        assert_eq!(t.headers, vec!["a", "b"]);
        assert_eq!(t.column("b").unwrap(), &[2.0, 4.5]);
        assert_eq!(t.n(), 2);
    }

    #[test]
    fn diagnostics_name_row_and_column() {
        let e = parse_csv("a,b\n1,2\n3,\n".as_bytes()).unwrap_err().to_string();
        assert!(e.contains("line 3") && e.contains("'b'") && e.contains("missing"), "{e}");
        let e = parse_csv("a,b\n1,x\n".as_bytes()).unwrap_err().to_string();
        assert!(e.contains("line 2") && e.contains("'x'"), "{e}");
        let e = parse_csv("a,b\n1,2,3\n".as_bytes()).unwrap_err().to_string();
        assert!(e.contains("malformed"), "{e}");
    }

    #[test]
    fn header_is_mandatory() {
        assert!(parse_csv("1,2\n3,4\n".as_bytes()).is_err());
        assert!(parse_csv("a,a\n3,4\n".as_bytes()).is_err());
    }
}

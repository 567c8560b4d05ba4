//! File formats: prediction records (JSON lines or CSV) and cost
//! configuration (TOML).

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use pandora_core::scoring::{BaseCosts, Forecast, LabeledForecast};
use pandora_core::search::TestCharacteristics;
use serde::{Deserialize, Serialize};

/// One prediction: a probability vector, the true label, and an optional
/// instance id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub probs: Vec<f64>,
    pub label: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
}

impl PredictionRecord {
    pub fn to_labeled_forecast(&self) -> Result<LabeledForecast> {
        let forecast = Forecast::new(self.probs.clone())?;
        Ok(LabeledForecast::new(forecast, self.label)?)
    }
}

/// Read predictions from a path: files ending in `.csv` are parsed as CSV
/// with a `label,p0,p1,...` header (optional `id` column), everything
/// else as JSON lines with fields `probs`, `label`, and optional `id`.
/// All records must share one class count.
pub fn read_predictions(path: &Path) -> Result<Vec<PredictionRecord>> {
    let is_csv = path
        .extension()
        .map(|e| e.eq_ignore_ascii_case("csv"))
        .unwrap_or(false);
    let records =
        if is_csv { read_predictions_csv(path)? } else { read_predictions_jsonl(path)? };
    if records.is_empty() {
        bail!("{}: no prediction records found", path.display());
    }
    let k = records[0].probs.len();
    for (i, r) in records.iter().enumerate() {
        if r.probs.len() != k {
            bail!(
                "{}: record {} has {} classes, expected {k}",
                path.display(),
                i + 1,
                r.probs.len()
            );
        }
        r.to_labeled_forecast()
            .with_context(|| format!("{}: record {}", path.display(), i + 1))?;
    }
    Ok(records)
}

fn read_predictions_jsonl(path: &Path) -> Result<Vec<PredictionRecord>> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut records = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.with_context(|| format!("reading {}", path.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: PredictionRecord = serde_json::from_str(&line)
            .map_err(|e| anyhow!("{}:{}: malformed record: {e}", path.display(), lineno + 1))?;
        records.push(record);
    }
    Ok(records)
}

fn read_predictions_csv(path: &Path) -> Result<Vec<PredictionRecord>> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let label_col = headers
        .iter()
        .position(|h| h == "label")
        .ok_or_else(|| anyhow!("{}: missing `label` column", path.display()))?;
    let id_col = headers.iter().position(|h| h == "id");
    let mut prob_cols = Vec::new();
    loop {
        let name = format!("p{}", prob_cols.len());
        match headers.iter().position(|h| h == name) {
            Some(idx) => prob_cols.push(idx),
            None => break,
        }
    }
    if prob_cols.len() < 2 {
        bail!("{}: need columns p0, p1, ... for at least 2 classes", path.display());
    }

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        // Header occupies line 1.
        let lineno = i + 2;
        let row = row.map_err(|e| anyhow!("{}:{lineno}: {e}", path.display()))?;
        let field = |col: usize| -> Result<&str> {
            row.get(col)
                .ok_or_else(|| anyhow!("{}:{lineno}: missing column {col}", path.display()))
        };
        let label: usize = field(label_col)?
            .trim()
            .parse()
            .map_err(|e| anyhow!("{}:{lineno}: bad label: {e}", path.display()))?;
        let mut probs = Vec::with_capacity(prob_cols.len());
        for &col in &prob_cols {
            let p: f64 = field(col)?
                .trim()
                .parse()
                .map_err(|e| anyhow!("{}:{lineno}: bad probability: {e}", path.display()))?;
            probs.push(p);
        }
        let id = id_col
            .and_then(|c| row.get(c))
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from);
        records.push(PredictionRecord { probs, label, id });
    }
    Ok(records)
}

/// Write predictions as JSON lines with probabilities printed to 17
/// significant digits, enough to reproduce every f64 bit for bit on
/// reread.
pub fn write_predictions_jsonl<W: Write>(out: &mut W, records: &[PredictionRecord]) -> Result<()> {
    for r in records {
        let probs = r
            .probs
            .iter()
            .map(|p| format!("{p:.16e}"))
            .collect::<Vec<_>>()
            .join(",");
        match &r.id {
            Some(id) => writeln!(
                out,
                "{{\"probs\":[{probs}],\"label\":{},\"id\":{}}}",
                r.label,
                serde_json::to_string(id)?
            )?,
            None => writeln!(out, "{{\"probs\":[{probs}],\"label\":{}}}", r.label)?,
        }
    }
    Ok(())
}

/// One class in a cost configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostClass {
    pub name: String,
    pub cost: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensitivity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub false_positive_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confirm_cost: Option<f64>,
}

/// A cost configuration file: class names, base costs, and optional
/// per-class test characteristics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostConfig {
    #[serde(default = "default_currency")]
    pub currency: String,
    pub classes: Vec<CostClass>,
}

fn default_currency() -> String {
    "USD".to_string()
}

impl CostConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let config: CostConfig = toml::from_str(&text)
            .map_err(|e| anyhow!("{}: invalid cost config: {e}", path.display()))?;
        config.validate().map_err(|e| anyhow!("{}: {e}", path.display()))?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        if self.classes.is_empty() {
            bail!("no classes defined");
        }
        for (i, a) in self.classes.iter().enumerate() {
            if !a.cost.is_finite() || a.cost <= 0.0 {
                bail!("class `{}` has nonpositive cost {}", a.name, a.cost);
            }
            for b in &self.classes[i + 1..] {
                if a.name == b.name {
                    bail!("duplicate class name `{}`", a.name);
                }
            }
        }
        let partial = self.classes.iter().any(|c| {
            c.sensitivity.is_some()
                || c.false_positive_rate.is_some()
                || c.confirm_cost.is_some()
        });
        if partial && !self.has_test_characteristics() {
            bail!(
                "test characteristics must be given completely (sensitivity, \
                 false_positive_rate, confirm_cost on every class) or not at all"
            );
        }
        Ok(())
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn class_names(&self) -> Vec<&str> {
        self.classes.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn base_costs(&self) -> Result<BaseCosts> {
        Ok(BaseCosts::new(self.classes.iter().map(|c| c.cost).collect())?)
    }

    pub fn has_test_characteristics(&self) -> bool {
        self.classes.iter().all(|c| {
            c.sensitivity.is_some()
                && c.false_positive_rate.is_some()
                && c.confirm_cost.is_some()
        })
    }

    pub fn test_characteristics(&self) -> Result<TestCharacteristics> {
        if !self.has_test_characteristics() {
            bail!("cost config does not define test characteristics for every class");
        }
        Ok(TestCharacteristics::new(
            self.classes.iter().map(|c| c.sensitivity.unwrap()).collect(),
            self.classes.iter().map(|c| c.false_positive_rate.unwrap()).collect(),
            self.classes.iter().map(|c| c.confirm_cost.unwrap()).collect(),
        )?)
    }
}

/// Zoo configuration file for `rank` (all fields optional, defaulting to
/// the standard synthetic zoo; the seed always comes from `--seed`).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZooConfig {
    pub n_models: Option<usize>,
    pub num_classes: Option<usize>,
    pub n_instances: Option<usize>,
    pub noise_scale_range: Option<(f64, f64)>,
    pub temperature_range: Option<(f64, f64)>,
}

impl ZooConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(toml::from_str(&text)
            .map_err(|e| anyhow!("{}: invalid zoo config: {e}", path.display()))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_roundtrip_is_bit_exact() {
        let records = vec![
            PredictionRecord {
                probs: vec![0.1, 0.2, 0.7],
                label: 2,
                id: Some("case \"quoted\"".to_string()),
            },
            PredictionRecord {
                probs: vec![1.0 / 3.0, 1.0 / 3.0, 1.0 - 2.0 / 3.0],
                label: 0,
                id: None,
            },
        ];
        let mut buf = Vec::new();
        write_predictions_jsonl(&mut buf, &records).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("preds.jsonl");
        fs::write(&path, &buf).unwrap();
        let back = read_predictions(&path).unwrap();
        assert_eq!(back, records);
        for (a, b) in back.iter().zip(&records) {
            for (x, y) in a.probs.iter().zip(&b.probs) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn csv_predictions_parse_with_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("preds.csv");
        fs::write(&path, "label,p0,p1,p2,id\n2,0.1,0.2,0.7,a\n0,0.5,0.25,0.25,\n").unwrap();
        let records = read_predictions(&path).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].label, 2);
        assert_eq!(records[0].id.as_deref(), Some("a"));
        assert_eq!(records[1].id, None);
        assert_eq!(records[1].probs, vec![0.5, 0.25, 0.25]);
    }

    #[test]
    fn malformed_records_name_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        fs::write(&path, "{\"probs\":[0.5,0.5],\"label\":0}\nnot json\n").unwrap();
        let err = read_predictions(&path).unwrap_err().to_string();
        assert!(err.contains(":2:"), "{err}");
    }

    #[test]
    fn mixed_class_counts_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mixed.jsonl");
        fs::write(
            &path,
            "{\"probs\":[0.5,0.5],\"label\":0}\n{\"probs\":[0.2,0.3,0.5],\"label\":1}\n",
        )
        .unwrap();
        assert!(read_predictions(&path).is_err());
    }

    #[test]
    fn cost_config_validates() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("costs.toml");
        fs::write(
            &path,
            r#"
currency = "USD"
[[classes]]
name = "a"
cost = 1.5
[[classes]]
name = "b"
cost = 2.0
"#,
        )
        .unwrap();
        let config = CostConfig::load(&path).unwrap();
        assert_eq!(config.num_classes(), 2);
        assert!(!config.has_test_characteristics());
        assert_eq!(config.base_costs().unwrap().values(), &[1.5, 2.0]);

        fs::write(
            &path,
            r#"
[[classes]]
name = "a"
cost = 1.5
sensitivity = 0.9
[[classes]]
name = "b"
cost = 2.0
"#,
        )
        .unwrap();
        assert!(CostConfig::load(&path).is_err(), "partial characteristics must be rejected");

        fs::write(&path, "[[classes]]\nname = \"a\"\ncost = -3.0\n").unwrap();
        assert!(CostConfig::load(&path).is_err());
    }
}

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use phonodrift::engine::run_ensemble_with_workers;
use phonodrift::ingest::{self, IngestError, LanguageFrequencyTable};
use phonodrift::stats::{rank_frequency, PisEntropyAnalysis};
use phonodrift::{pis_envelopes_from_series, PhonemeDistribution, PhonemeId};
use serde_json::Value;

use crate::config::{config_pairs, LoadedConfig};
use crate::output::{self, OutputDir};
use crate::CliError;

fn data_err(msg: impl Into<String>) -> CliError {
    CliError::Data(msg.into())
}

pub struct SimulateSummary {
    pub languages: usize,
    pub trajectory_rows: usize,
}

pub fn simulate(loaded: &LoadedConfig, out: &Path) -> Result<SimulateSummary, CliError> {
    let cfg = &loaded.simulation;
    let workers = loaded
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let records =
        run_ensemble_with_workers(cfg, workers).map_err(|e| CliError::Usage(e.to_string()))?;

    let mut dir = OutputDir::create(out)?;
    dir.write(output::TRAJECTORIES, &output::trajectories_csv(&records))?;
    dir.write(
        output::FINAL_DISTRIBUTIONS,
        &output::final_distributions_csv(
            records
                .iter()
                .map(|r| (r.language_index.to_string(), &r.final_distribution)),
        ),
    )?;
    if cfg.record_history {
        dir.write(output::EVENTS, &output::events_csv(&records))?;
    }

    let mut config = serde_json::Map::new();
    for (k, v) in config_pairs(cfg) {
        config.insert(k, Value::String(v));
    }
    let files: Vec<Value> = dir
        .inventory()
        .iter()
        .map(|(name, bytes, digest)| {
            serde_json::json!({ "name": name, "bytes": bytes, "sha256": digest })
        })
        .collect();
    let manifest = serde_json::json!({
        "tool": "phonodrift",
        "version": env!("CARGO_PKG_VERSION"),
        "timestamp": chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        "config": config,
        "files": files,
    });
    let mut text = serde_json::to_string_pretty(&manifest).expect("json value");
    text.push('\n');
    dir.write(output::MANIFEST, &text)?;

    Ok(SimulateSummary {
        languages: records.len(),
        trajectory_rows: records.iter().map(|r| r.pis_series.len()).sum(),
    })
}

/// Rows of a CSV file with the exact expected header.
fn read_csv(path: &Path, header: &[&str]) -> Result<Vec<Row>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| data_err(format!("{}: {e}", path.display())))?;
    let found = reader
        .headers()
        .map_err(|e| data_err(format!("{}: {e}", path.display())))?
        .clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(data_err(format!(
            "{}: expected header `{}`, found `{}`",
            path.display(),
            header.join(","),
            found.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| data_err(format!("{}: {e}", path.display())))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        rows.push((line, rec.iter().map(str::to_string).collect()));
    }
    Ok(rows)
}

fn parse_field<T: std::str::FromStr>(
    path: &Path,
    line: usize,
    what: &str,
    raw: &str,
) -> Result<T, CliError> {
    raw.parse()
        .map_err(|_| data_err(format!("{}:{line}: invalid {what} `{raw}`", path.display())))
}

/// A CSV record with its 1-based line number.
type Row = (usize, Vec<String>);

/// Groups rows by their first column, keeping first-seen order.
fn group_rows(rows: Vec<Row>) -> Vec<(String, Vec<Row>)> {
    let mut order: Vec<(String, Vec<Row>)> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for (line, row) in rows {
        let key = row[0].clone();
        let i = *index.entry(key.clone()).or_insert_with(|| {
            order.push((key, Vec::new()));
            order.len() - 1
        });
        order[i].1.push((line, row));
    }
    order
}

/// Reads `final_distributions.csv`. Probabilities are renormalized to undo
/// the rounding of the written values.
pub fn read_final_distributions(
    path: &Path,
) -> Result<Vec<(String, PhonemeDistribution)>, CliError> {
    let rows = read_csv(path, &output::FINAL_DISTRIBUTIONS_HEADER)?;
    let mut out = Vec::new();
    for (language, rows) in group_rows(rows) {
        let mut ids = Vec::with_capacity(rows.len());
        let mut probs = Vec::with_capacity(rows.len());
        for (line, row) in &rows {
            let id: PhonemeId = parse_field(path, *line, "phoneme_id", &row[1])?;
            let p: f64 = parse_field(path, *line, "probability", &row[2])?;
            if !(p.is_finite() && p > 0.0) {
                return Err(data_err(format!(
                    "{}:{line}: probability must be positive, found `{}`",
                    path.display(),
                    row[2]
                )));
            }
            ids.push(id);
            probs.push(p);
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(data_err(format!(
                "{}: probabilities of language `{language}` sum to {total}",
                path.display()
            )));
        }
        probs.iter_mut().for_each(|p| *p /= total);
        let dist = PhonemeDistribution::new(probs, ids)
            .map_err(|e| data_err(format!("{}: language `{language}`: {e}", path.display())))?;
        out.push((language, dist));
    }
    Ok(out)
}

/// Reads `trajectories.csv` into per-language inventory series.
pub fn read_trajectories(path: &Path) -> Result<Vec<(String, Vec<usize>)>, CliError> {
    let rows = read_csv(path, &output::TRAJECTORIES_HEADER)?;
    let mut out = Vec::new();
    for (language, rows) in group_rows(rows) {
        let mut series = Vec::with_capacity(rows.len());
        for (expected, (line, row)) in rows.iter().enumerate() {
            let step: usize = parse_field(path, *line, "step", &row[1])?;
            if step != expected {
                return Err(data_err(format!(
                    "{}:{line}: language `{language}` expected step {expected}, found {step}",
                    path.display()
                )));
            }
            series.push(parse_field(path, *line, "V", &row[2])?);
        }
        out.push((language, series));
    }
    Ok(out)
}

pub struct AnalyzeSummary {
    pub languages: usize,
    pub correlation: Option<(f64, f64)>,
    pub wrote_envelopes: bool,
}

/// Reads `final_distributions.csv` (and `trajectories.csv` when present)
/// from `input` and writes every analysis file into `out`.
pub fn analyze(input: &Path, out: &Path) -> Result<AnalyzeSummary, CliError> {
    let finals_path = input.join(output::FINAL_DISTRIBUTIONS);
    if !finals_path.is_file() {
        return Err(data_err(format!("missing {}", finals_path.display())));
    }
    let languages = read_final_distributions(&finals_path)?;
    if languages.is_empty() {
        return Err(data_err(format!("{}: no languages", finals_path.display())));
    }
    let trajectories_path = input.join(output::TRAJECTORIES);
    let envelopes = if trajectories_path.is_file() {
        let series = read_trajectories(&trajectories_path)?;
        let indexed: Vec<(usize, &[usize])> = series
            .iter()
            .enumerate()
            .map(|(i, (_, s))| (i, s.as_slice()))
            .collect();
        let env = pis_envelopes_from_series(&indexed).map_err(|e| {
            let msg = match e {
                phonodrift::EngineError::Ragged {
                    index,
                    got,
                    expected,
                } => format!(
                    "{}: language `{}` has {got} rows, expected {expected}",
                    trajectories_path.display(),
                    series[index].0
                ),
                other => format!("{}: {other}", trajectories_path.display()),
            };
            data_err(msg)
        })?;
        Some(env)
    } else {
        None
    };

    let labels: Vec<String> = languages.iter().map(|(l, _)| l.clone()).collect();
    let tables: Vec<_> = languages
        .iter()
        .map(|(label, d)| rank_frequency(d, label))
        .collect();
    let analysis = PisEntropyAnalysis::of(languages.iter().map(|(_, d)| d))
        .map_err(|e| data_err(e.to_string()))?;

    let mut dir = OutputDir::create(out)?;
    dir.write(output::RANK_FREQUENCY, &output::rank_frequency_csv(&tables))?;
    dir.write(
        output::PIS_ENTROPY,
        &output::pis_entropy_csv(&labels, &analysis.pairs),
    )?;
    dir.write(
        output::CORRELATION,
        &output::correlation_json(
            analysis.correlation.as_ref().map_err(|e| e.to_string()),
            analysis.pairs.len(),
        ),
    )?;
    let band = match &analysis.regression {
        Ok(fit) => fit.band_grid(output::REGRESSION_GRID),
        Err(_) => Vec::new(),
    };
    dir.write(output::REGRESSION, &output::regression_csv(&band))?;
    if let Some(env) = &envelopes {
        dir.write(output::ENVELOPES, &output::envelopes_csv(env))?;
    }
    Ok(AnalyzeSummary {
        languages: languages.len(),
        correlation: analysis.correlation.as_ref().ok().map(|c| (c.r, c.p_value)),
        wrote_envelopes: envelopes.is_some(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IngestFormat {
    FrequencyCsv,
    WordlistTsv,
}

impl std::str::FromStr for IngestFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "freq-csv" => Ok(Self::FrequencyCsv),
            "wordlist-tsv" => Ok(Self::WordlistTsv),
            other => Err(format!(
                "unknown format `{other}` (expected freq-csv or wordlist-tsv)"
            )),
        }
    }
}

pub struct IngestSummary {
    pub accepted: usize,
    pub rejected: Vec<String>,
}

pub fn ingest(format: IngestFormat, input: &Path, out: &Path) -> Result<IngestSummary, CliError> {
    let file = fs::File::open(input).map_err(|e| CliError::io(input, e))?;
    let tables: Vec<LanguageFrequencyTable> = match format {
        IngestFormat::FrequencyCsv => ingest::parse_frequency_csv(file),
        IngestFormat::WordlistTsv => ingest::parse_wordlist_tsv(file),
    }
    .map_err(|e| data_err(format!("{}: {e}", input.display())))?;

    let mut accepted = Vec::new();
    let mut rejects = output::CsvDoc::new(&output::REJECTS_HEADER);
    let mut rejected = Vec::new();
    for table in &tables {
        match ingest::to_distribution(table) {
            Ok(dist) => accepted.push((table, dist)),
            Err(e @ IngestError::TooSmallInventory { positive, .. }) => {
                rejects.row([
                    table.language_id.clone(),
                    positive.to_string(),
                    e.to_string(),
                ]);
                rejected.push(table.language_id.clone());
            }
            Err(e) => return Err(data_err(e.to_string())),
        }
    }

    let mut labels = output::CsvDoc::new(&output::PHONEME_LABELS_HEADER);
    for (table, dist) in &accepted {
        for &id in dist.ids() {
            labels.row([
                table.language_id.as_str(),
                &id.to_string(),
                &table.entries[id as usize].0,
            ]);
        }
    }

    let mut dir = OutputDir::create(out)?;
    dir.write(
        output::FINAL_DISTRIBUTIONS,
        &output::final_distributions_csv(accepted.iter().map(|(t, d)| (t.language_id.clone(), d))),
    )?;
    dir.write(output::PHONEME_LABELS, &labels.finish())?;
    dir.write(output::REJECTS, &rejects.finish())?;
    Ok(IngestSummary {
        accepted: accepted.len(),
        rejected,
    })
}

/// The numbers `compare` reports for one analysis directory.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisDigest {
    pub languages: usize,
    pub pis_range: (usize, usize),
    pub relative_entropy_range: (f64, f64),
    pub r: Option<f64>,
    pub p: Option<f64>,
}

impl AnalysisDigest {
    pub fn correlation_sign(&self) -> &'static str {
        match self.r {
            None => "undefined",
            Some(r) if r > 0.0 => "positive",
            Some(r) if r < 0.0 => "negative",
            Some(_) => "zero",
        }
    }
}

pub fn read_analysis(dir: &Path) -> Result<AnalysisDigest, CliError> {
    let pis_path = dir.join(output::PIS_ENTROPY);
    let corr_path = dir.join(output::CORRELATION);
    let rows = read_csv(&pis_path, &output::PIS_ENTROPY_HEADER)?;
    if rows.is_empty() {
        return Err(data_err(format!("{}: no languages", pis_path.display())));
    }
    let mut pis_range = (usize::MAX, 0);
    let mut rel_range = (f64::INFINITY, f64::NEG_INFINITY);
    for (line, row) in &rows {
        let v: usize = parse_field(&pis_path, *line, "pis", &row[1])?;
        let h: f64 = parse_field(&pis_path, *line, "relative_entropy", &row[2])?;
        pis_range = (pis_range.0.min(v), pis_range.1.max(v));
        rel_range = (rel_range.0.min(h), rel_range.1.max(h));
    }
    let text = fs::read_to_string(&corr_path).map_err(|e| CliError::io(&corr_path, e))?;
    let json: Value = serde_json::from_str(&text)
        .map_err(|e| data_err(format!("{}: {e}", corr_path.display())))?;
    Ok(AnalysisDigest {
        languages: rows.len(),
        pis_range,
        relative_entropy_range: rel_range,
        r: json.get("r").and_then(Value::as_f64),
        p: json.get("p").and_then(Value::as_f64),
    })
}

/// Side-by-side CSV report of two analysis directories.
pub fn compare(simulated: &Path, empirical: &Path, out: Option<&Path>) -> Result<String, CliError> {
    let missing: Vec<PathBuf> = [simulated, empirical]
        .iter()
        .flat_map(|d| [d.join(output::PIS_ENTROPY), d.join(output::CORRELATION)])
        .filter(|p| !p.is_file())
        .collect();
    if !missing.is_empty() {
        let list: Vec<String> = missing.iter().map(|p| p.display().to_string()).collect();
        return Err(data_err(format!("missing files: {}", list.join(", "))));
    }
    let a = read_analysis(simulated)?;
    let b = read_analysis(empirical)?;
    let opt = |x: Option<f64>| x.map(output::num).unwrap_or_else(|| "NA".into());
    let mut doc = output::CsvDoc::new(&["metric", "simulated", "empirical"]);
    let rows: [(&str, String, String); 8] = [
        (
            "languages",
            a.languages.to_string(),
            b.languages.to_string(),
        ),
        (
            "pis_min",
            a.pis_range.0.to_string(),
            b.pis_range.0.to_string(),
        ),
        (
            "pis_max",
            a.pis_range.1.to_string(),
            b.pis_range.1.to_string(),
        ),
        (
            "relative_entropy_min",
            output::num(a.relative_entropy_range.0),
            output::num(b.relative_entropy_range.0),
        ),
        (
            "relative_entropy_max",
            output::num(a.relative_entropy_range.1),
            output::num(b.relative_entropy_range.1),
        ),
        ("r", opt(a.r), opt(b.r)),
        ("p", opt(a.p), opt(b.p)),
        (
            "correlation_sign",
            a.correlation_sign().into(),
            b.correlation_sign().into(),
        ),
    ];
    for (metric, x, y) in rows {
        doc.row([metric.to_string(), x, y]);
    }
    let report = doc.finish();
    if let Some(out) = out {
        OutputDir::create(out)?.write(output::COMPARISON, &report)?;
    }
    Ok(report)
}

//! Output schemas. All CSV files use LF line endings, a fixed header and
//! stable row order; reals are written with 12 significant digits.

use std::fs;
use std::path::{Path, PathBuf};

use phonodrift::engine::PisEnvelopes;
use phonodrift::stats::{BandPoint, CorrelationResult, EntropySummary, RankFrequencyTable};
use phonodrift::{PhonemeDistribution, TrajectoryRecord};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const TRAJECTORIES: &str = "trajectories.csv";
pub const FINAL_DISTRIBUTIONS: &str = "final_distributions.csv";
pub const EVENTS: &str = "events.csv";
pub const MANIFEST: &str = "manifest.json";
pub const RANK_FREQUENCY: &str = "rank_frequency.csv";
pub const PIS_ENTROPY: &str = "pis_entropy.csv";
pub const CORRELATION: &str = "correlation.json";
pub const REGRESSION: &str = "regression.csv";
pub const ENVELOPES: &str = "envelopes.csv";
pub const PHONEME_LABELS: &str = "phoneme_labels.csv";
pub const REJECTS: &str = "rejects.csv";
pub const COMPARISON: &str = "comparison.csv";

pub const TRAJECTORIES_HEADER: [&str; 3] = ["language_index", "step", "V"];
pub const FINAL_DISTRIBUTIONS_HEADER: [&str; 3] = ["language_index", "phoneme_id", "probability"];
pub const EVENTS_HEADER: [&str; 6] = [
    "language_index",
    "step",
    "kind",
    "source",
    "target",
    "alpha",
];
pub const RANK_FREQUENCY_HEADER: [&str; 3] = ["language", "rank", "probability"];
pub const PIS_ENTROPY_HEADER: [&str; 3] = ["language", "pis", "relative_entropy"];
pub const REGRESSION_HEADER: [&str; 4] = ["x", "fit", "lower95", "upper95"];
pub const ENVELOPES_HEADER: [&str; 6] = ["step", "min", "p2.5", "mean", "p97.5", "max"];
pub const PHONEME_LABELS_HEADER: [&str; 3] = ["language", "phoneme_id", "phoneme"];
pub const REJECTS_HEADER: [&str; 3] = ["language", "positive_phonemes", "reason"];

/// Points on the regression grid.
pub const REGRESSION_GRID: usize = 101;

/// Scientific notation with 12 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.11e}")
}

/// `x` rounded to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    num(x).parse().expect("formatted float parses")
}

/// Builds a CSV document in memory.
pub struct CsvDoc {
    writer: csv::Writer<Vec<u8>>,
}

impl CsvDoc {
    pub fn new(header: &[&str]) -> Self {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        Self { writer }
    }

    pub fn row<I, T>(&mut self, fields: I)
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[u8]>,
    {
        self.writer.write_record(fields).expect("in-memory write");
    }

    pub fn finish(self) -> String {
        let bytes = self.writer.into_inner().expect("in-memory flush");
        String::from_utf8(bytes).expect("csv of UTF-8 fields")
    }
}

pub fn trajectories_csv(records: &[TrajectoryRecord]) -> String {
    let mut doc = CsvDoc::new(&TRAJECTORIES_HEADER);
    for r in records {
        let idx = r.language_index.to_string();
        for (step, v) in r.pis_series.iter().enumerate() {
            doc.row([idx.as_str(), &step.to_string(), &v.to_string()]);
        }
    }
    doc.finish()
}

pub fn final_distributions_csv<'a>(
    languages: impl IntoIterator<Item = (String, &'a PhonemeDistribution)>,
) -> String {
    let mut doc = CsvDoc::new(&FINAL_DISTRIBUTIONS_HEADER);
    for (label, dist) in languages {
        for (id, p) in dist.iter() {
            doc.row([label.as_str(), &id.to_string(), &num(p)]);
        }
    }
    doc.finish()
}

pub fn events_csv(records: &[TrajectoryRecord]) -> String {
    let mut doc = CsvDoc::new(&EVENTS_HEADER);
    for r in records {
        let Some(history) = &r.history else { continue };
        let idx = r.language_index.to_string();
        for (step, ev) in history.iter().enumerate() {
            doc.row([
                idx.clone(),
                (step + 1).to_string(),
                ev.kind.symbol().to_string(),
                ev.source.to_string(),
                ev.target.map(|t| t.to_string()).unwrap_or_default(),
                ev.alpha.map(num).unwrap_or_default(),
            ]);
        }
    }
    doc.finish()
}

pub fn rank_frequency_csv(tables: &[RankFrequencyTable]) -> String {
    let mut doc = CsvDoc::new(&RANK_FREQUENCY_HEADER);
    for t in tables {
        for e in &t.entries {
            doc.row([t.label.as_str(), &e.rank.to_string(), &num(e.probability)]);
        }
    }
    doc.finish()
}

pub fn pis_entropy_csv(labels: &[String], pairs: &[EntropySummary]) -> String {
    let mut doc = CsvDoc::new(&PIS_ENTROPY_HEADER);
    for (label, p) in labels.iter().zip(pairs) {
        doc.row([label.as_str(), &p.pis.to_string(), &num(p.relative_entropy)]);
    }
    doc.finish()
}

pub fn regression_csv(points: &[BandPoint]) -> String {
    let mut doc = CsvDoc::new(&REGRESSION_HEADER);
    for b in points {
        doc.row([num(b.x), num(b.fit), num(b.lower), num(b.upper)]);
    }
    doc.finish()
}

pub fn envelopes_csv(env: &PisEnvelopes) -> String {
    let mut doc = CsvDoc::new(&ENVELOPES_HEADER);
    for t in 0..env.len() {
        doc.row([
            t.to_string(),
            num(env.min[t]),
            num(env.p025[t]),
            num(env.mean[t]),
            num(env.p975[t]),
            num(env.max[t]),
        ]);
    }
    doc.finish()
}

/// `{"r": .., "p": .., "n": ..}`, or nulls with a reason when undefined.
pub fn correlation_json(result: Result<&CorrelationResult, String>, n: usize) -> String {
    let value = match result {
        Ok(c) => serde_json::json!({
            "r": round12(c.r),
            "p": round12(c.p_value),
            "n": c.n,
        }),
        Err(reason) => serde_json::json!({
            "r": null,
            "p": null,
            "n": n,
            "reason": reason,
        }),
    };
    let mut text = serde_json::to_string_pretty(&value).expect("json value");
    text.push('\n');
    text
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes files under `dir`, creating it if needed.
pub struct OutputDir {
    dir: PathBuf,
    written: Vec<(String, usize, String)>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        self.written.push((
            name.to_string(),
            contents.len(),
            sha256_hex(contents.as_bytes()),
        ));
        Ok(())
    }

    /// `(name, bytes, sha256)` for every file written so far.
    pub fn inventory(&self) -> &[(String, usize, String)] {
        &self.written
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }
}

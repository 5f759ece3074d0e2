//! One CSV row per sketch built or merged.

use std::io::Write;

pub const HEADER: [&str; 10] = [
    "algorithm",
    "m",
    "n",
    "seed",
    "input_kind",
    "update_seconds",
    "merge_seconds",
    "estimate",
    "size_bits",
    "compress_calls",
];

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub algorithm: String,
    pub m: usize,
    pub n: u64,
    pub seed: u64,
    pub input_kind: String,
    pub update_seconds: f64,
    pub merge_seconds: Option<f64>,
    pub estimate: f64,
    pub size_bits: usize,
    pub compress_calls: u64,
}

impl BenchRecord {
    fn fields(&self) -> [String; 10] {
        [
            self.algorithm.clone(),
            self.m.to_string(),
            self.n.to_string(),
            self.seed.to_string(),
            self.input_kind.clone(),
            format!("{:.9}", self.update_seconds),
            self.merge_seconds
                .map(|s| format!("{s:.9}"))
                .unwrap_or_default(),
            // shortest representation that parses back to the same f64
            self.estimate.to_string(),
            self.size_bits.to_string(),
            self.compress_calls.to_string(),
        ]
    }
}

/// Writes the header once, then one row per record, flushing each row so
/// partial results survive an interrupted run.
pub struct RecordSink<W: Write> {
    out: csv::Writer<W>,
}

impl<W: Write> RecordSink<W> {
    pub fn new(w: W) -> csv::Result<Self> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(HEADER)?;
        out.flush()?;
        Ok(Self { out })
    }

    pub fn write(&mut self, rec: &BenchRecord) -> csv::Result<()> {
        self.out.write_record(rec.fields())?;
        self.out.flush()?;
        Ok(())
    }
}

//! Command-line front end: data generation, sketch building, merging,
//! inspection and the benchmark grid.

pub mod input;
pub mod record;

use std::fmt;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use hlll_core::datagen::{generate, grid_n, trial_seed, DataGenConfig, Dataset, InputKind};
use hlll_core::distribution::expected_sparse_count;
use hlll_core::hashing::{MAX_LOG2M, MIN_LOG2M};
use hlll_core::{
    Error, EstimatorConfig, HashConfig, HashFunction, HashKind, HllSketch, HlllSketch,
    RegisterDistribution, Sketch, Variant, DEFAULT_KAPPA,
};

use crate::record::{BenchRecord, RecordSink};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_FORMAT: u8 = 3;
pub const EXIT_INCOMPATIBLE: u8 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    Hll,
    Hlll(Variant),
}

impl Algo {
    pub const ALL: [Algo; 4] = [
        Algo::Hll,
        Algo::Hlll(Variant::Exact),
        Algo::Hlll(Variant::Star),
        Algo::Hlll(Variant::BaseMin),
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algo::Hll => "hll",
            Algo::Hlll(v) => v.name(),
        }
    }

    pub fn empty(self, config: HashConfig, kappa: u8) -> hlll_core::Result<Sketch> {
        Ok(match self {
            Algo::Hll => HllSketch::with_config(config)?.into(),
            Algo::Hlll(v) => HlllSketch::with_config(config, kappa, v)?.into(),
        })
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "hll" => Ok(Algo::Hll),
            "hlll" | "hlll-star" | "hlll-b" => {
                Ok(Algo::Hlll(s.parse().map_err(|e: Error| e.to_string())?))
            }
            other => Err(format!(
                "unknown algorithm {other:?}; expected hll, hlll, hlll-star or hlll-b"
            )),
        }
    }
}

/// Parses a register count, returning its base-2 logarithm.
fn parse_m(s: &str) -> Result<u8, String> {
    let m: u64 = s.parse().map_err(|_| format!("not a number: {s:?}"))?;
    let log2m = m.trailing_zeros() as u8;
    if !m.is_power_of_two() || !(MIN_LOG2M..=MAX_LOG2M).contains(&log2m) {
        return Err(format!(
            "m must be a power of two in [2^{MIN_LOG2M}, 2^{MAX_LOG2M}], got {m}"
        ));
    }
    Ok(log2m)
}

fn parse_kappa(s: &str) -> Result<u8, String> {
    match s.parse() {
        Ok(k @ 1..=6) => Ok(k),
        _ => Err(format!("kappa must be in 1..=6, got {s:?}")),
    }
}

fn parse_kind(s: &str) -> Result<InputKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_hash(s: &str) -> Result<HashKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "hlll",
    version,
    about = "HyperLogLog and HyperLogLogLog sketches"
)]
pub struct Cli {
    /// Extra diagnostics on stderr.
    #[arg(long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic stream, one element per line.
    Generate(GenerateArgs),
    /// Build a sketch from a stream and print its record.
    Build(BuildArgs),
    /// Merge two sketch files.
    Merge(MergeArgs),
    /// Print the cardinality estimate of a sketch file.
    Estimate(EstimateArgs),
    /// Re-encode a sketch with another algorithm or kappa.
    Convert(ConvertArgs),
    /// Describe a sketch file.
    Inspect(InspectArgs),
    /// Print the exact single-register distribution for m and n.
    Oracle(OracleArgs),
    /// Run the (m, n, trial) grid and write one CSV row per sketch.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct StreamArgs {
    #[arg(long, default_value = "u64", value_parser = parse_kind)]
    pub kind: InputKind,
    /// Element count for generated streams.
    #[arg(long, default_value_t = 0)]
    pub n: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct HashArgs {
    #[arg(long, default_value = "xxh3-64", value_parser = parse_hash)]
    pub hash: HashKind,
    #[arg(long, default_value_t = 0)]
    pub hash_seed: u64,
}

impl HashArgs {
    fn function(&self) -> HashFunction {
        HashFunction::new(self.hash, self.hash_seed)
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub stream: StreamArgs,
    /// Register count; only shapes `pair` streams.
    #[arg(long = "m", value_name = "M", default_value = "1024", value_parser = parse_m)]
    pub log2m: u8,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Stream file (`-` for stdin). Without it a stream is generated from
    /// --kind, --n and --seed.
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub stream: StreamArgs,
    #[arg(long = "m", value_name = "M", default_value = "1024", value_parser = parse_m)]
    pub log2m: u8,
    #[arg(long, default_value = "hlll")]
    pub algo: Algo,
    #[arg(long, default_value_t = DEFAULT_KAPPA, value_parser = parse_kappa)]
    pub kappa: u8,
    #[command(flatten)]
    pub hash: HashArgs,
    /// Sketch file to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV file for the record; stdout by default.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub no_large_range_correction: bool,
}

#[derive(Debug, Args)]
pub struct MergeArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub no_large_range_correction: bool,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    pub file: PathBuf,
    #[arg(long)]
    pub no_large_range_correction: bool,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    pub file: PathBuf,
    #[arg(long)]
    pub algo: Algo,
    #[arg(long, default_value_t = DEFAULT_KAPPA, value_parser = parse_kappa)]
    pub kappa: u8,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    pub file: PathBuf,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long = "m", value_name = "M", default_value = "1024", value_parser = parse_m)]
    pub log2m: u8,
    #[arg(long)]
    pub n: u64,
    #[arg(long, default_value_t = DEFAULT_KAPPA, value_parser = parse_kappa)]
    pub kappa: u8,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Run a single m instead of the power-of-two grid.
    #[arg(long = "m", value_name = "M", value_parser = parse_m)]
    pub log2m: Option<u8>,
    /// Largest m of the grid.
    #[arg(long = "max-m", value_name = "M", default_value = "16384", value_parser = parse_m)]
    pub max_log2m: u8,
    /// Run a single n instead of the round(2^(i/2)) grid.
    #[arg(long)]
    pub n: Option<u64>,
    /// Largest n of the grid.
    #[arg(long, default_value_t = 1 << 26)]
    pub max_n: u64,
    #[arg(long, default_value_t = 10)]
    pub trials: u64,
    /// Algorithms to run, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "hll,hlll,hlll-star,hlll-b"
    )]
    pub algo: Vec<Algo>,
    #[arg(long, default_value = "pair", value_parser = parse_kind)]
    pub kind: InputKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_KAPPA, value_parser = parse_kappa)]
    pub kappa: u8,
    #[command(flatten)]
    pub hash: HashArgs,
    /// Also build a sketch per half of the stream and time their merge.
    #[arg(long)]
    pub merge: bool,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub no_large_range_correction: bool,
}

/// Maps an error to the process exit code.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<Error>()) {
        Some(Error::Format(_)) => EXIT_FORMAT,
        Some(Error::IncompatibleSketch(_)) => EXIT_INCOMPATIBLE,
        Some(Error::InvalidArgument(_)) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let verbose = cli.verbose;
    match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Build(a) => cmd_build(a, verbose),
        Command::Merge(a) => cmd_merge(a, verbose),
        Command::Estimate(a) => cmd_estimate(a, verbose),
        Command::Convert(a) => cmd_convert(a),
        Command::Inspect(a) => cmd_inspect(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Bench(a) => cmd_bench(a, verbose),
    }
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_sketch(path: &Path) -> anyhow::Result<Sketch> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Sketch::from_bytes(&bytes).with_context(|| format!("decoding {}", path.display()))
}

fn write_sketch(path: &Path, sketch: &Sketch) -> anyhow::Result<()> {
    std::fs::write(path, sketch.to_bytes()).with_context(|| format!("writing {}", path.display()))
}

fn estimator(sketch: &Sketch, no_large_range_correction: bool) -> EstimatorConfig {
    EstimatorConfig::new(sketch.hash_config().m())
        .expect("m validated on construction")
        .with_large_range_correction(!no_large_range_correction)
}

/// Feeds `data` into a fresh sketch, timing the update loop only.
pub fn build_sketch(
    algo: Algo,
    config: HashConfig,
    kappa: u8,
    data: &Dataset,
) -> hlll_core::Result<(Sketch, Duration)> {
    let mut sketch = algo.empty(config, kappa)?;
    let t = Instant::now();
    match &mut sketch {
        Sketch::Hll(s) => data.feed(s)?,
        Sketch::Hlll(s) => data.feed(s)?,
    }
    Ok((sketch, t.elapsed()))
}

fn cmd_generate(a: GenerateArgs) -> anyhow::Result<()> {
    let cfg = DataGenConfig {
        kind: a.stream.kind,
        n: a.stream.n,
        log2m: a.log2m,
        seed: a.stream.seed,
    };
    let data = generate(&cfg)?;
    let mut out = output(a.out.as_deref())?;
    data.write_lines(&mut out)?;
    out.flush()?;
    Ok(())
}

fn cmd_build(a: BuildArgs, verbose: bool) -> anyhow::Result<()> {
    let data = match &a.input {
        Some(p) => {
            let parsed = if p.as_os_str() == "-" {
                input::read_dataset(io::stdin().lock(), a.stream.kind, a.log2m)
            } else {
                let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
                input::read_dataset(BufReader::new(f), a.stream.kind, a.log2m)
            };
            parsed.map_err(|e| Error::Format(format!("{e:#}")))?
        }
        None => generate(&DataGenConfig {
            kind: a.stream.kind,
            n: a.stream.n,
            log2m: a.log2m,
            seed: a.stream.seed,
        })?,
    };
    let config = HashConfig::new(a.log2m, a.hash.function())?;
    let (sketch, elapsed) = build_sketch(a.algo, config, a.kappa, &data)?;
    if let Some(p) = &a.out {
        write_sketch(p, &sketch)?;
    }
    if verbose {
        eprintln!("{} elements into {} in {:?}", data.len(), a.algo, elapsed);
    }
    let rec = BenchRecord {
        algorithm: a.algo.name().into(),
        m: config.m(),
        n: data.len() as u64,
        seed: a.stream.seed,
        input_kind: data.kind().name().into(),
        update_seconds: elapsed.as_secs_f64(),
        merge_seconds: None,
        estimate: sketch
            .estimate_with::<f64>(&estimator(&sketch, a.no_large_range_correction))
            .result,
        size_bits: sketch.size_bits(),
        compress_calls: sketch.compress_calls(),
    };
    let mut sink = RecordSink::new(output(a.csv.as_deref())?)?;
    sink.write(&rec)?;
    Ok(())
}

fn cmd_merge(a: MergeArgs, verbose: bool) -> anyhow::Result<()> {
    let (x, y) = (read_sketch(&a.a)?, read_sketch(&a.b)?);
    let t = Instant::now();
    let merged = x.merge(&y)?;
    let elapsed = t.elapsed();
    if let Some(p) = &a.out {
        write_sketch(p, &merged)?;
    }
    if verbose {
        eprintln!("merged {} sketches in {elapsed:?}", merged.algorithm());
    }
    let rec = BenchRecord {
        algorithm: merged.algorithm().into(),
        m: merged.hash_config().m(),
        n: 0,
        seed: 0,
        input_kind: String::new(),
        update_seconds: 0.0,
        merge_seconds: Some(elapsed.as_secs_f64()),
        estimate: merged
            .estimate_with::<f64>(&estimator(&merged, a.no_large_range_correction))
            .result,
        size_bits: merged.size_bits(),
        compress_calls: merged.compress_calls(),
    };
    let mut sink = RecordSink::new(output(a.csv.as_deref())?)?;
    sink.write(&rec)?;
    Ok(())
}

fn cmd_estimate(a: EstimateArgs, verbose: bool) -> anyhow::Result<()> {
    let sketch = read_sketch(&a.file)?;
    let b = sketch.estimate_with::<f64>(&estimator(&sketch, a.no_large_range_correction));
    println!("{}", b.result);
    if verbose {
        eprintln!("raw {} zeros {} branch {}", b.raw, b.zeros, b.branch.name());
    }
    Ok(())
}

fn cmd_convert(a: ConvertArgs) -> anyhow::Result<()> {
    let hll = match read_sketch(&a.file)? {
        Sketch::Hll(s) => s,
        Sketch::Hlll(s) => s.to_hll(),
    };
    let out: Sketch = match a.algo {
        Algo::Hll => hll.into(),
        Algo::Hlll(v) => HlllSketch::from_hll(&hll, a.kappa, v)?.into(),
    };
    write_sketch(&a.out, &out)
}

fn cmd_inspect(a: InspectArgs) -> anyhow::Result<()> {
    let sketch = read_sketch(&a.file)?;
    let cfg = sketch.hash_config();
    let mut out = io::stdout().lock();
    writeln!(out, "algorithm   {}", sketch.algorithm())?;
    writeln!(out, "m           {}", cfg.m())?;
    writeln!(
        out,
        "hash        {} seed {}",
        cfg.function.kind, cfg.function.seed
    )?;
    if let Sketch::Hlll(s) = &sketch {
        writeln!(out, "kappa       {}", s.kappa())?;
        writeln!(out, "base        {}", s.base())?;
        writeln!(out, "sparse      {}", s.sparse_len())?;
        writeln!(out, "min         {} (x{})", s.min_value(), s.min_count())?;
    }
    writeln!(
        out,
        "size_bits   {} (hll {})",
        sketch.size_bits(),
        6 * cfg.m()
    )?;
    writeln!(out, "estimate    {}", sketch.estimate())?;
    let mut hist = [0usize; 64];
    sketch
        .registers()
        .iter()
        .for_each(|&r| hist[r as usize] += 1);
    let shown: Vec<String> = hist
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(r, c)| format!("{r}:{c}"))
        .collect();
    writeln!(out, "registers   {}", shown.join(" "))?;
    Ok(())
}

fn cmd_oracle(a: OracleArgs) -> anyhow::Result<()> {
    let m = 1u64 << a.log2m;
    let d = RegisterDistribution::new(m, a.n)?;
    let base = d.best_base(a.kappa)?;
    let mut out = io::stdout().lock();
    writeln!(out, "k,pmf,cdf")?;
    for (k, p) in d.pmf().iter().enumerate().filter(|(_, &p)| p > 0.0) {
        writeln!(out, "{k},{p:e},{:e}", d.cdf(k as u8))?;
    }
    writeln!(out, "# mean {}", d.mean())?;
    writeln!(out, "# entropy_bits {}", d.entropy())?;
    writeln!(
        out,
        "# best_base {base} expected_sparse {}",
        expected_sparse_count::<f64>(m, a.n, base, a.kappa)?
    )?;
    Ok(())
}

fn cmd_bench(a: BenchArgs, verbose: bool) -> anyhow::Result<()> {
    let ms: Vec<u8> = match a.log2m {
        Some(l) => vec![l],
        None => (MIN_LOG2M..=a.max_log2m).collect(),
    };
    let ns: Vec<u64> = match a.n {
        Some(n) => vec![n],
        None => (4..=60).map(grid_n).filter(|&n| n <= a.max_n).collect(),
    };
    let mut sink = RecordSink::new(output(a.csv.as_deref())?)?;
    for &log2m in &ms {
        let config = HashConfig::new(log2m, a.hash.function())?;
        for &n in &ns {
            for trial in 0..a.trials {
                let seed = trial_seed(a.seed, trial);
                // generated once and shared by every algorithm
                let data = generate(&DataGenConfig {
                    kind: a.kind,
                    n,
                    log2m,
                    seed,
                })?;
                for &algo in &a.algo {
                    let (sketch, elapsed) = build_sketch(algo, config, a.kappa, &data)?;
                    let merge_seconds = if a.merge {
                        Some(time_half_merge(algo, config, a.kappa, &data)?)
                    } else {
                        None
                    };
                    let rec = BenchRecord {
                        algorithm: algo.name().into(),
                        m: config.m(),
                        n,
                        seed,
                        input_kind: a.kind.name().into(),
                        update_seconds: elapsed.as_secs_f64(),
                        merge_seconds,
                        estimate: sketch
                            .estimate_with::<f64>(&estimator(&sketch, a.no_large_range_correction))
                            .result,
                        size_bits: sketch.size_bits(),
                        compress_calls: sketch.compress_calls(),
                    };
                    sink.write(&rec)?;
                    if verbose {
                        eprintln!("m={} n={n} trial={trial} {algo}: {elapsed:?}", config.m());
                    }
                }
            }
        }
    }
    Ok(())
}

/// Builds one sketch per half of `data` and times their merge.
fn time_half_merge(
    algo: Algo,
    config: HashConfig,
    kappa: u8,
    data: &Dataset,
) -> hlll_core::Result<f64> {
    let half = data.len() / 2;
    let mut parts = [algo.empty(config, kappa)?, algo.empty(config, kappa)?];
    for (part, range) in parts.iter_mut().zip([0..half, half..data.len()]) {
        match part {
            Sketch::Hll(s) => data.feed_range(s, range)?,
            Sketch::Hlll(s) => data.feed_range(s, range)?,
        }
    }
    let t = Instant::now();
    let merged = parts[0].merge(&parts[1])?;
    let elapsed = t.elapsed().as_secs_f64();
    drop(merged);
    Ok(elapsed)
}

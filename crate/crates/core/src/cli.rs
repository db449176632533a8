//! Command-line front end. The binary is a thin wrapper over [`run`].

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::codec::{CodecConfig, ConfigParams, Metric};
use crate::error::ConfigError;
use crate::eval::{self, EvalReport, LabeledPair};
use crate::formats::{self, EmbeddingRecord, FormatError};
use crate::index::FlatIndex;
use crate::synth;

pub const REPORT_SCHEMA: &str = "embsketch-eval/1";

#[derive(Debug, Parser)]
#[command(name = "embsketch", version, about = "Compress embeddings into bit-packed sketches and score queries against them")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the configuration and storage cost per vector.
    Info(ConfigArgs),
    /// Encode an embedding file into a sketch file.
    Encode {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Rank the vectors of a sketch file against a query.
    Topk(TopkArgs),
    /// Correlation report for labeled pairs.
    Eval {
        embeddings: PathBuf,
        pairs: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Write a synthetic planted-cosine corpus (embeddings + pairs).
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// Input dimension d (defaults to the embedding file's, or 384).
    #[arg(long = "dim")]
    pub dim: Option<u64>,
    /// Sketch dimension m.
    #[arg(long = "sketch-dim")]
    pub sketch_dim: Option<u64>,
    /// Bits per sketch coordinate b.
    #[arg(long)]
    pub bits: Option<u64>,
    /// Repetitions per input coordinate s.
    #[arg(long)]
    pub sparsity: Option<u64>,
    /// Clip range c.
    #[arg(long, allow_negative_numbers = true)]
    pub clip: Option<f64>,
    /// cosine or dot.
    #[arg(long)]
    pub metric: Option<Metric>,
    /// Hash seed for the projection.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Lower log2-norm bound (dot mode).
    #[arg(long, allow_negative_numbers = true)]
    pub lmin: Option<f64>,
    /// Upper log2-norm bound (dot mode).
    #[arg(long, allow_negative_numbers = true)]
    pub lmax: Option<f64>,
}

impl ConfigArgs {
    /// Validates the flags; `file_dim` is the dimension declared by an input
    /// file, which `--dim` must agree with when both are present.
    pub fn resolve(&self, file_dim: Option<usize>) -> Result<CodecConfig, CliError> {
        let defaults = ConfigParams::default();
        let d = match (self.dim, file_dim) {
            (Some(flag), Some(file)) if flag != file as u64 => {
                return Err(CliError::Data(format!("--dim {flag} does not match input dimension {file}")));
            }
            (Some(flag), _) => flag,
            (None, Some(file)) => file as u64,
            (None, None) => defaults.d,
        };
        let params = ConfigParams {
            d,
            m: self.sketch_dim.unwrap_or(defaults.m),
            b: self.bits.unwrap_or(defaults.b),
            s: self.sparsity.unwrap_or(defaults.s),
            c: self.clip.unwrap_or(defaults.c),
            metric: self.metric.unwrap_or(defaults.metric),
            seed: self.seed.unwrap_or(defaults.seed),
            l_min: self.lmin.unwrap_or(defaults.l_min),
            l_max: self.lmax.unwrap_or(defaults.l_max),
        };
        Ok(params.validate()?)
    }
}

#[derive(Debug, Args)]
pub struct TopkArgs {
    pub sketch: PathBuf,
    /// Inline query values separated by commas or whitespace.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "query_file", required_unless_present = "query_file")]
    pub query: Option<String>,
    /// Embedding file holding one or more queries.
    #[arg(long = "query-file")]
    pub query_file: Option<PathBuf>,
    /// Only use this id from the query file.
    #[arg(long = "query-id", requires = "query_file")]
    pub query_id: Option<u64>,
    #[arg(long = "top-k", default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub top_k: u64,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long = "out-embeddings")]
    pub out_embeddings: PathBuf,
    #[arg(long = "out-pairs")]
    pub out_pairs: PathBuf,
    #[arg(long = "dim", default_value_t = 384)]
    pub dim: usize,
    #[arg(long = "pairs-per-subset", default_value_t = 200)]
    pub pairs_per_subset: usize,
    /// Comma-separated subset names.
    #[arg(long, default_value = "en-en,en-de,de-fr")]
    pub subsets: String,
    #[arg(long = "label-noise", default_value_t = 0.15)]
    pub label_noise: f64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Format { path: PathBuf, source: FormatError },
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Format { .. } => "format",
            CliError::Data(_) => "data",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Config(_) => 3,
            CliError::Io { .. } => 4,
            CliError::Format { .. } => 5,
            CliError::Data(_) => 6,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn format_err(path: &Path) -> impl FnOnce(FormatError) -> CliError + '_ {
    move |source| match source {
        FormatError::Io(source) => CliError::Io { path: path.to_path_buf(), source },
        source => CliError::Format { path: path.to_path_buf(), source },
    }
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(io_err(path))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

fn read_embeddings(path: &Path) -> Result<(usize, Vec<EmbeddingRecord>), CliError> {
    formats::read_embedding_file(open(path)?).map_err(format_err(path))
}

/// `"48 bytes/vector, 0.03125 of dense (1536 bytes/vector)"`
pub fn storage_line(config: &CodecConfig) -> String {
    format!(
        "{} bytes/vector, {:.5} of dense ({} bytes/vector)",
        config.code_size_bytes(),
        config.compression_ratio(),
        config.dense_bytes()
    )
}

/// Parses arguments and runs one command. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error[{}]: {e}", e.category());
            e.exit_code()
        }
    }
}

pub fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let stdout = |e: std::io::Error| CliError::Io { path: "<stdout>".into(), source: e };
    match command {
        Command::Info(config) => {
            let config = config.resolve(None)?;
            write_info(&config, out).map_err(stdout)
        }
        Command::Encode { input, output, config } => {
            let (d, records) = read_embeddings(&input)?;
            let config = config.resolve(Some(d))?;
            let mut index = FlatIndex::new(config);
            for rec in &records {
                index
                    .add(rec.id, &rec.values)
                    .map_err(|e| CliError::Data(format!("vector id {}: {e}", rec.id)))?;
            }
            let mut w = create(&output)?;
            formats::write_sketch_file(&mut w, &index).map_err(io_err(&output))?;
            writeln!(out, "encoded {} vectors", index.len()).map_err(stdout)?;
            writeln!(out, "{}", storage_line(&config)).map_err(stdout)
        }
        Command::Topk(args) => topk(args, out).map_err(|e| match e {
            TopkFailure::Cli(e) => e,
            TopkFailure::Write(e) => stdout(e),
        }),
        Command::Eval { embeddings, pairs, config, report } => {
            let (d, records) = read_embeddings(&embeddings)?;
            let config = config.resolve(Some(d))?;
            let pairs_list = formats::read_pairs(open(&pairs)?).map_err(format_err(&pairs))?;
            let mut map: HashMap<u64, Vec<f32>> = HashMap::with_capacity(records.len());
            for rec in records {
                let id = rec.id;
                if map.insert(id, rec.values).is_some() {
                    return Err(CliError::Data(format!("duplicate embedding id {id}")));
                }
            }
            let result = eval::evaluate(&config, &map, &pairs_list).map_err(|e| CliError::Data(e.to_string()))?;
            for ex in &result.excluded {
                writeln!(err, "warning: subset '{}' excluded from macro: {}", ex.subset, ex.reason).map_err(stdout)?;
            }
            let doc = report_json(&config, &pairs_list, &result);
            match report {
                Some(path) => {
                    let mut w = create(&path)?;
                    w.write_all(doc.as_bytes()).and_then(|_| w.flush()).map_err(io_err(&path))?;
                    write_summary(&result, out).map_err(stdout)
                }
                None => out.write_all(doc.as_bytes()).map_err(stdout),
            }
        }
        Command::Synth(args) => {
            let subsets: Vec<String> =
                args.subsets.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect();
            if subsets.is_empty() {
                return Err(CliError::Usage("--subsets must name at least one subset".into()));
            }
            if args.dim < 2 {
                return Err(CliError::Usage("--dim must be at least 2".into()));
            }
            let corpus = synth::planted_corpus(&synth::CorpusSpec {
                d: args.dim,
                pairs_per_subset: args.pairs_per_subset,
                subsets,
                label_noise: args.label_noise,
                seed: args.seed,
            });
            let w = create(&args.out_embeddings)?;
            formats::write_embedding_file(w, args.dim, &corpus.records).map_err(format_err(&args.out_embeddings))?;
            let w = create(&args.out_pairs)?;
            formats::write_pairs(w, &corpus.pairs).map_err(io_err(&args.out_pairs))?;
            writeln!(out, "wrote {} vectors and {} pairs", corpus.records.len(), corpus.pairs.len()).map_err(stdout)
        }
    }
}

fn write_info(config: &CodecConfig, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "d = {}", config.dim())?;
    writeln!(out, "m = {}", config.sketch_dim())?;
    writeln!(out, "b = {}", config.bits())?;
    writeln!(out, "s = {}", config.sparsity())?;
    writeln!(out, "c = {}", config.clip())?;
    writeln!(out, "metric = {}", config.metric())?;
    writeln!(out, "seed = {}", config.seed())?;
    if config.metric() == Metric::Dot {
        writeln!(out, "lmin = {}", config.l_min())?;
        writeln!(out, "lmax = {}", config.l_max())?;
    }
    writeln!(out, "{}", storage_line(config))
}

enum TopkFailure {
    Cli(CliError),
    Write(std::io::Error),
}

impl From<CliError> for TopkFailure {
    fn from(e: CliError) -> Self {
        TopkFailure::Cli(e)
    }
}

fn parse_inline_query(text: &str) -> Result<Vec<f32>, CliError> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f32>().map_err(|e| CliError::Usage(format!("bad query value '{t}': {e}"))))
        .collect()
}

fn topk(args: TopkArgs, out: &mut dyn Write) -> Result<(), TopkFailure> {
    let index = formats::read_sketch_file(open(&args.sketch)?).map_err(format_err(&args.sketch))?;
    let d = index.config().dim();
    let queries: Vec<(Option<u64>, Vec<f32>)> = match (&args.query, &args.query_file) {
        (Some(text), _) => vec![(None, parse_inline_query(text)?)],
        (None, Some(path)) => {
            let (qd, records) = read_embeddings(path)?;
            if qd != d {
                return Err(CliError::Data(format!("query dimension {qd} does not match sketch file dimension {d}")).into());
            }
            let selected: Vec<_> = records
                .into_iter()
                .filter(|r| args.query_id.is_none_or(|id| id == r.id))
                .map(|r| (Some(r.id), r.values))
                .collect();
            if selected.is_empty() {
                return Err(CliError::Data("no matching query vectors".into()).into());
            }
            selected
        }
        (None, None) => return Err(CliError::Usage("one of --query or --query-file is required".into()).into()),
    };
    let k = usize::try_from(args.top_k).unwrap_or(usize::MAX);
    let multi = queries.len() > 1;
    for (qid, values) in queries {
        if values.len() != d {
            return Err(CliError::Data(format!("query dimension {} does not match sketch file dimension {d}", values.len())).into());
        }
        let label = qid.map_or_else(|| "query".to_string(), |id| format!("query id {id}"));
        let hits = index.topk(&values, k).map_err(|e| CliError::Data(format!("{label}: {e}")))?;
        if multi {
            writeln!(out, "# query {}", qid.unwrap_or_default()).map_err(TopkFailure::Write)?;
        }
        for (rank, hit) in hits.iter().enumerate() {
            writeln!(out, "{} {} {:.6}", rank + 1, hit.id, hit.score).map_err(TopkFailure::Write)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ReportConfig {
    d: usize,
    m: usize,
    b: u8,
    s: u32,
    c: f64,
    metric: Metric,
    seed: u64,
    lmin: f64,
    lmax: f64,
    bytes_per_vector: usize,
}

#[derive(Serialize)]
struct ReportTiming {
    quantize_seconds: f64,
    score_seconds: f64,
    machine_local: bool,
}

#[derive(Serialize)]
struct ReportDoc<'a> {
    schema: &'static str,
    config: ReportConfig,
    pairs: usize,
    subsets: &'a [eval::SubsetReport],
    excluded: &'a [eval::ExcludedSubset],
    #[serde(rename = "macro")]
    macro_avg: &'a Option<eval::MacroReport>,
    timing: ReportTiming,
}

/// Renders an evaluation report as pretty JSON.
pub fn report_json(config: &CodecConfig, pairs: &[LabeledPair], report: &EvalReport) -> String {
    let doc = ReportDoc {
        schema: REPORT_SCHEMA,
        config: ReportConfig {
            d: config.dim(),
            m: config.sketch_dim(),
            b: config.bits(),
            s: config.sparsity(),
            c: config.clip(),
            metric: config.metric(),
            seed: config.seed(),
            lmin: config.l_min(),
            lmax: config.l_max(),
            bytes_per_vector: config.code_size_bytes(),
        },
        pairs: pairs.len(),
        subsets: &report.per_subset,
        excluded: &report.excluded,
        macro_avg: &report.macro_avg,
        timing: ReportTiming {
            quantize_seconds: report.timing.quantize_seconds,
            score_seconds: report.timing.score_seconds,
            machine_local: true,
        },
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
    s.push('\n');
    s
}

fn write_summary(report: &EvalReport, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "subset pairs dense_spearman sketch_spearman spearman_loss sketch_dense_pearson")?;
    for s in &report.per_subset {
        writeln!(
            out,
            "{} {} {:.4} {:.4} {:.4} {:.4}",
            s.subset, s.pairs, s.dense_spearman, s.sketch_spearman, s.spearman_loss, s.sketch_dense_pearson
        )?;
    }
    if let Some(m) = &report.macro_avg {
        writeln!(
            out,
            "macro {} {:.4} {:.4} {:.4} {:.4}",
            m.pairs, m.dense_spearman, m.sketch_spearman, m.spearman_loss, m.sketch_dense_pearson
        )?;
    }
    writeln!(
        out,
        "quantize_seconds {:.4} score_seconds {:.4} (machine-local)",
        report.timing.quantize_seconds, report.timing.score_seconds
    )
}

//! Command-line front end: reduce embeddings, evaluate them on word
//! similarity datasets, aggregate datasets, and apply the post-processing
//! transform, all with reproducible configuration.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/parse error, 3 numeric or
//! domain error. Identical command lines on identical files produce
//! byte-identical outputs; `--threads` only caps parallelism and never
//! changes a single output byte.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use wordfs::{
    aggregate, cross_validate, eval_similarity, reduce, EmbeddingFormat, EmbeddingTable, Error,
    EvalReport, LoadOutcome, Method, PpaConfig, ReductionSpec, RftConfig, WordPairDataset,
};

#[derive(Parser)]
#[command(name = "wordfs", version, about = "Weakly-supervised word embedding reduction")]
struct Cli {
    /// Cap the worker thread count (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce an embedding table to K dimensions and write it out.
    Reduce(ReduceArgs),
    /// Score embeddings on word-similarity datasets, optionally
    /// cross-validated.
    Eval(EvalArgs),
    /// Min-max scale datasets and merge them, averaging overlapping pairs.
    Aggregate(AggregateArgs),
    /// Apply mean and top-component removal to an embedding table.
    Ppa(PpaArgs),
}

#[derive(Args)]
struct ReduceArgs {
    /// Input embedding file.
    #[arg(long)]
    input: PathBuf,

    /// Input/output text format: glove-text or word2vec-text.
    #[arg(long, default_value = "glove-text")]
    format: EmbeddingFormat,

    /// Reduction method: wordfs-p, wordfs-s, pca-algo, pca-plain, truncate.
    #[arg(long)]
    method: Method,

    /// Output dimension K.
    #[arg(long)]
    dim: usize,

    /// Supervision dataset(s); several files are scaled and aggregated.
    #[arg(long)]
    pairs: Vec<PathBuf>,

    /// Post-process before selection (default). Only affects the
    /// supervised methods.
    #[arg(long, overrides_with = "no_ppa")]
    ppa: bool,

    /// Skip post-processing before selection.
    #[arg(long, overrides_with = "ppa")]
    no_ppa: bool,

    /// Principal components removed by each post-processing pass.
    #[arg(long = "ppa-d", default_value_t = 7)]
    ppa_d: usize,

    /// Segment count for the regression-loss scorer (power of two).
    #[arg(long = "rft-bins", default_value_t = 4)]
    rft_bins: usize,

    /// Retry unresolved dataset words lower-cased (default).
    #[arg(long = "fold-case", overrides_with = "no_fold_case")]
    fold_case: bool,

    /// Do not retry unresolved words lower-cased.
    #[arg(long = "no-fold-case", overrides_with = "fold_case")]
    no_fold_case: bool,

    /// Rank by absolute instead of signed rank correlation (wordfs-s).
    #[arg(long = "abs-spearman")]
    abs_spearman: bool,

    /// Read at most this many embedding rows.
    #[arg(long)]
    limit: Option<usize>,

    /// Output embedding file.
    #[arg(long)]
    output: PathBuf,

    /// Also write the ranked `dim score` selection sidecar here.
    #[arg(long = "selection-out")]
    selection_out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    input: PathBuf,

    #[arg(long, default_value = "glove-text")]
    format: EmbeddingFormat,

    /// Dataset(s) to evaluate, one report per file plus an average row.
    #[arg(long, required = true)]
    pairs: Vec<PathBuf>,

    /// Run the k-fold cross-validated experiment instead of a plain
    /// evaluation (requires --method and --dim; exactly one --pairs).
    #[arg(long)]
    cv: bool,

    #[arg(long)]
    method: Option<Method>,

    #[arg(long)]
    dim: Option<usize>,

    /// Fold count for --cv.
    #[arg(long, default_value_t = 5)]
    folds: usize,

    /// Comma-separated trial seeds for --cv.
    #[arg(long, value_delimiter = ',', default_values_t = [0u64, 1, 2, 3, 4])]
    seeds: Vec<u64>,

    #[arg(long, overrides_with = "no_ppa")]
    ppa: bool,

    #[arg(long, overrides_with = "ppa")]
    no_ppa: bool,

    #[arg(long = "ppa-d", default_value_t = 7)]
    ppa_d: usize,

    #[arg(long = "rft-bins", default_value_t = 4)]
    rft_bins: usize,

    #[arg(long = "fold-case", overrides_with = "no_fold_case")]
    fold_case: bool,

    #[arg(long = "no-fold-case", overrides_with = "fold_case")]
    no_fold_case: bool,

    #[arg(long = "abs-spearman")]
    abs_spearman: bool,

    #[arg(long)]
    limit: Option<usize>,

    /// Also write the full text report to this file.
    #[arg(long)]
    report: Option<PathBuf>,

    /// Also write one CSV row per dataset to this file.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct AggregateArgs {
    /// Datasets to scale and merge.
    #[arg(long, required = true, num_args = 1..)]
    inputs: Vec<PathBuf>,

    /// Output pair file.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct PpaArgs {
    #[arg(long)]
    input: PathBuf,

    #[arg(long, default_value = "glove-text")]
    format: EmbeddingFormat,

    #[arg(long = "ppa-d", default_value_t = 7)]
    ppa_d: usize,

    #[arg(long)]
    limit: Option<usize>,

    #[arg(long)]
    output: PathBuf,
}

enum CliError {
    Usage(String),
    App(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::App(e)
    }
}

fn exit_code(err: &CliError) -> u8 {
    match err {
        CliError::Usage(_) => 1,
        CliError::App(Error::Parse { .. } | Error::Io { .. }) => 2,
        CliError::App(Error::Domain(_)) => 3,
    }
}

/// Collects everything printed to stdout so `--report` can receive an
/// identical copy.
struct Out {
    echo: Option<Vec<u8>>,
}

impl Out {
    fn new(capture: bool) -> Self {
        Out {
            echo: capture.then(Vec::new),
        }
    }

    fn line(&mut self, text: &str) {
        println!("{text}");
        if let Some(buf) = &mut self.echo {
            buf.extend_from_slice(text.as_bytes());
            buf.push(b'\n');
        }
    }

    fn kv(&mut self, key: &str, value: impl std::fmt::Display) {
        self.line(&format!("{key} = {value}"));
    }
}

fn sha256_hex(path: &Path) -> Result<String, CliError> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 20];
    loop {
        let n = file.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}

fn provenance_header(
    out: &mut Out,
    command: &str,
    input: Option<&Path>,
    pairs: &[PathBuf],
) -> Result<(), CliError> {
    out.line("[provenance]");
    out.kv("version", env!("CARGO_PKG_VERSION"));
    out.kv("command", command);
    if let Some(input) = input {
        out.kv("input", input.display());
        out.kv("input_sha256", sha256_hex(input)?);
    }
    for p in pairs {
        out.kv("pairs", p.display());
        out.kv("pairs_sha256", sha256_hex(p)?);
    }
    Ok(())
}

fn load_table(
    path: &Path,
    format: EmbeddingFormat,
    limit: Option<usize>,
) -> Result<LoadOutcome, CliError> {
    Ok(EmbeddingTable::load(path, format, limit)?)
}

/// One supervision dataset from any number of pair files: a single file is
/// used as-is; several files are min-max scaled and aggregated.
fn load_supervision(paths: &[PathBuf]) -> Result<WordPairDataset, CliError> {
    if paths.len() == 1 {
        return Ok(WordPairDataset::load(&paths[0])?);
    }
    let mut scaled = Vec::with_capacity(paths.len());
    for p in paths {
        scaled.push(WordPairDataset::load(p)?.minmax_scaled()?);
    }
    Ok(aggregate(&scaled)?)
}

fn build_spec(
    method: Method,
    dim: usize,
    no_ppa: bool,
    ppa_d: usize,
    rft_bins: usize,
    no_fold_case: bool,
    abs_spearman: bool,
) -> Result<ReductionSpec, CliError> {
    if ppa_d < 1 {
        return Err(CliError::Usage("--ppa-d must be at least 1".into()));
    }
    let rft = RftConfig::from_bins(rft_bins)
        .map_err(|e| CliError::Usage(format!("--rft-bins: {e}")))?;
    Ok(ReductionSpec {
        method,
        target_dim: dim,
        use_ppa: !no_ppa,
        ppa: PpaConfig { top_d: ppa_d },
        rft,
        fold_case: !no_fold_case,
        abs_spearman,
    })
}

fn cmd_reduce(args: ReduceArgs) -> Result<(), CliError> {
    if args.method.is_supervised() && args.pairs.is_empty() {
        return Err(CliError::Usage(format!(
            "method {} needs at least one --pairs file",
            args.method
        )));
    }
    let spec = build_spec(
        args.method,
        args.dim,
        args.no_ppa,
        args.ppa_d,
        args.rft_bins,
        args.no_fold_case,
        args.abs_spearman,
    )?;

    let mut out = Out::new(false);
    provenance_header(&mut out, "reduce", Some(&args.input), &args.pairs)?;
    out.kv("format", args.format);

    let loaded = load_table(&args.input, args.format, args.limit)?;
    let supervision = if args.pairs.is_empty() {
        None
    } else {
        Some(load_supervision(&args.pairs)?)
    };

    let result = reduce(&loaded.table, supervision.as_ref(), &spec)?;
    result.table.save(&args.output, args.format)?;

    if let Some(path) = &args.selection_out {
        match &result.model {
            Some(model) => {
                let file = File::create(path).map_err(|e| Error::io(path, e))?;
                let mut w = BufWriter::new(file);
                model.write_sidecar(&mut w).map_err(|e| Error::io(path, e))?;
                w.flush().map_err(|e| Error::io(path, e))?;
            }
            None => {
                return Err(CliError::Usage(format!(
                    "--selection-out is only meaningful for the supervised methods, not {}",
                    args.method
                )));
            }
        }
    }

    out.line("[result]");
    for (k, v) in result.provenance.lines() {
        out.kv(k, v);
    }
    out.kv("duplicates_in_input", loaded.duplicates_skipped);
    out.kv("output", args.output.display());
    if let Some(p) = &args.selection_out {
        out.kv("selection_out", p.display());
    }
    Ok(())
}

fn print_eval_block(out: &mut Out, header: &str, report: &EvalReport) {
    out.line(&format!("[{header}]"));
    out.kv("dataset", &report.dataset_name);
    out.kv("spearman", format!("{:.2}", report.spearman));
    out.kv("kept_pairs", report.kept_pairs);
    out.kv("skipped_oov", report.skipped_oov);
    out.kv("skipped_zero", report.skipped_zero);
    if let Some(trials) = &report.per_trial {
        let formatted: Vec<String> = trials.iter().map(|v| format!("{v:.4}")).collect();
        out.kv("per_trial", formatted.join(","));
    }
    if let Some(folds) = &report.per_fold {
        let formatted: Vec<String> = folds.iter().map(|v| format!("{v:.4}")).collect();
        out.kv("per_fold", formatted.join(","));
    }
}

fn csv_row(method: &str, dim: usize, report: &EvalReport) -> String {
    format!(
        "{method},{dim},{},{:.2},{},{}",
        report.dataset_name, report.spearman, report.kept_pairs, report.skipped_oov
    )
}

fn cmd_eval(args: EvalArgs) -> Result<(), CliError> {
    if args.cv {
        if args.method.is_none() || args.dim.is_none() {
            return Err(CliError::Usage("--cv needs --method and --dim".into()));
        }
        if args.pairs.len() != 1 {
            return Err(CliError::Usage(
                "--cv takes exactly one --pairs file; merge datasets first with \
                 `wordfs aggregate`"
                    .into(),
            ));
        }
        if args.folds < 2 {
            return Err(CliError::Usage("--folds must be at least 2".into()));
        }
        if args.seeds.is_empty() {
            return Err(CliError::Usage("--seeds must not be empty".into()));
        }
    } else if args.method.is_some() || args.dim.is_some() {
        return Err(CliError::Usage(
            "--method/--dim only apply together with --cv".into(),
        ));
    }

    let mut out = Out::new(args.report.is_some());
    provenance_header(&mut out, "eval", Some(&args.input), &args.pairs)?;
    out.kv("format", args.format);
    out.kv("fold_case", !args.no_fold_case);
    if args.cv {
        out.kv("folds", args.folds);
        let seeds: Vec<String> = args.seeds.iter().map(u64::to_string).collect();
        out.kv("seeds", seeds.join(","));
    }

    let table = load_table(&args.input, args.format, args.limit)?.table;
    let fold_case = !args.no_fold_case;

    let mut csv_lines = vec!["method,dim,dataset,spearman,kept_pairs,skipped_oov".to_string()];
    if args.cv {
        let method = args.method.expect("validated above");
        let dim = args.dim.expect("validated above");
        let spec = build_spec(
            method,
            dim,
            args.no_ppa,
            args.ppa_d,
            args.rft_bins,
            args.no_fold_case,
            args.abs_spearman,
        )?;
        out.kv("method", method);
        out.kv("dim", dim);
        out.kv("ppa", spec.use_ppa);
        out.kv("ppa_d", spec.ppa.top_d);
        out.kv("rft_bins", spec.rft.bins());

        let ds = WordPairDataset::load(&args.pairs[0])?;
        let report = cross_validate(&table, &ds, &spec, args.folds, &args.seeds)?;
        print_eval_block(&mut out, "cross-validation", &report);
        csv_lines.push(csv_row(method.name(), dim, &report));
    } else {
        let mut scores = Vec::new();
        for path in &args.pairs {
            let ds = WordPairDataset::load(path)?;
            let report = eval_similarity(&table, &ds, fold_case)?;
            print_eval_block(&mut out, "eval", &report);
            csv_lines.push(csv_row("raw", table.dim(), &report));
            scores.push(report.spearman);
        }
        if scores.len() > 1 {
            let avg = scores.iter().sum::<f64>() / scores.len() as f64;
            out.line("[summary]");
            out.kv("datasets", scores.len());
            out.kv("avg_spearman", format!("{avg:.2}"));
            csv_lines.push(format!("raw,{},Avg,{:.2},,", table.dim(), avg));
        }
    }

    if let Some(path) = &args.csv {
        let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
        for line in &csv_lines {
            writeln!(file, "{line}").map_err(|e| Error::io(path, e))?;
        }
    }
    if let Some(path) = &args.report {
        let body = out.echo.take().expect("report capture enabled");
        std::fs::write(path, body).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

fn cmd_aggregate(args: AggregateArgs) -> Result<(), CliError> {
    let mut out = Out::new(false);
    provenance_header(&mut out, "aggregate", None, &args.inputs)?;

    let mut scaled = Vec::with_capacity(args.inputs.len());
    for path in &args.inputs {
        let ds = WordPairDataset::load(path)?;
        let s = ds.minmax_scaled().map_err(|e| {
            Error::domain(format!("{}: {e}", path.display()))
        })?;
        scaled.push(s);
    }
    let merged = aggregate(&scaled)?;
    merged.save(&args.output)?;

    out.line("[result]");
    out.kv("unique_pairs", merged.len());
    out.kv("output", args.output.display());
    Ok(())
}

fn cmd_ppa(args: PpaArgs) -> Result<(), CliError> {
    if args.ppa_d < 1 {
        return Err(CliError::Usage("--ppa-d must be at least 1".into()));
    }
    let mut out = Out::new(false);
    provenance_header(&mut out, "ppa", Some(&args.input), &[])?;
    out.kv("format", args.format);
    out.kv("ppa_d", args.ppa_d);

    let table = load_table(&args.input, args.format, args.limit)?.table;
    let cleaned = wordfs::ppa(&table, &PpaConfig { top_d: args.ppa_d })?;
    cleaned.save(&args.output, args.format)?;

    out.line("[result]");
    out.kv("n_words", cleaned.n_words());
    out.kv("dim", cleaned.dim());
    out.kv("output", args.output.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n < 1 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // Ignore the error if a pool already exists (e.g. repeated calls in
        // tests); the thread count never affects results anyway.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.command {
        Command::Reduce(args) => cmd_reduce(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Aggregate(args) => cmd_aggregate(args),
        Command::Ppa(args) => cmd_ppa(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let code = exit_code(&err);
            match err {
                CliError::Usage(msg) => eprintln!("usage error: {msg}"),
                CliError::App(e) => eprintln!("error: {e}"),
            }
            ExitCode::from(code)
        }
    }
}

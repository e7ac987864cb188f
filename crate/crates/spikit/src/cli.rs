//! The `spikit` command.
//!
//! Exit codes: 0 on success, 2 for unreadable or invalid input, 3 for
//! parameters out of range, 1 when output cannot be written.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use spikit_core::eval::{correlate, EvalConfig, FieldCorrelation};
use spikit_core::kernel::{kernel_value, KernelParams, MatchMode};
use spikit_core::primegen::{filter_by_perplexity, load_templates, DEFAULT_PERPLEXITY_THRESHOLD};
use spikit_core::spi::{gamma_sweep, spi_score, SpiError, SpiParams, SpiVariant};
use spikit_core::stats::{corpus_stats, pearson_permutation_p, EXACT_PERMUTATION_MAX};
use spikit_core::{parse_bracketed, EvalReport, PrimingRecord, SyntaxTree};

use crate::bindings::parse_bindings;
use crate::corpus::sentences_from;
use crate::dataset::load_dataset;
use crate::report::{emit_report, sweep_to_csv, Format};
use crate::runner::evaluate_parallel;

/// Diagnostics shown before truncating.
const MAX_DIAGNOSTICS: usize = 10;

#[derive(Debug, Parser)]
#[command(
    name = "spikit",
    version,
    about = "Tree-kernel structural priming scores"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Kernel decay factor in (0, 1].
    #[arg(long, global = true, env = "SPIKIT_LAMBDA", default_value_t = KernelParams::DEFAULT_LAMBDA)]
    pub lambda: f64,
    /// `delexicalized` (compare POS tags only) or `lexicalized`.
    #[arg(
        long,
        global = true,
        env = "SPIKIT_MODE",
        default_value = "delexicalized"
    )]
    pub mode: String,
    /// SPI scaling factor in [0.1, 10].
    #[arg(long, global = true, env = "SPIKIT_GAMMA", default_value_t = SpiParams::DEFAULT_GAMMA)]
    pub gamma: f64,
    /// `tanh` or `literal`.
    #[arg(long, global = true, env = "SPIKIT_VARIANT", default_value = "tanh")]
    pub variant: String,
    /// Machine-readable output.
    #[arg(long, global = true)]
    pub json: bool,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Kernel, normalized kernel and distance between two trees.
    Kernel { tree_a: PathBuf, tree_b: PathBuf },
    /// SPI of a predicted tree against positive and negative primes.
    Spi {
        positive: PathBuf,
        negative: PathBuf,
        predicted: PathBuf,
    },
    /// Score a JSONL dataset and write a report.
    Eval {
        dataset: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, default_value_t = Format::Json)]
        format: Format,
    },
    /// Generate prime pairs from a bindings file as JSONL.
    Gen {
        bindings: PathBuf,
        /// One perplexity per generated sentence, in output order.
        #[arg(long)]
        perplexities: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_PERPLEXITY_THRESHOLD)]
        threshold: f64,
    },
    /// SPI over a grid of kernel differences and gammas, as CSV.
    Sweep {
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            default_value = "-1,-0.5,0,0.5,1"
        )]
        x: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.5,1,2,3,5,10")]
        gammas: Vec<f64>,
    },
    /// Token and type counts for a text corpus or dataset JSONL.
    Stats { corpus: PathBuf },
    /// Pearson correlation of similarity fields with SPI.
    Correlate {
        dataset: PathBuf,
        /// Also report an exact permutation p-value (small samples only).
        #[arg(long)]
        exact: bool,
    },
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Config(String),
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Output(_) => 1,
            CliError::Input(_) => 2,
            CliError::Config(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Config(m) | CliError::Output(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

fn diagnostics<E: fmt::Display>(errors: &[E]) -> String {
    let mut msg: Vec<String> = errors
        .iter()
        .take(MAX_DIAGNOSTICS)
        .map(|e| e.to_string())
        .collect();
    if errors.len() > MAX_DIAGNOSTICS {
        msg.push(format!("... and {} more", errors.len() - MAX_DIAGNOSTICS));
    }
    msg.join("\n")
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn read_tree(path: &Path) -> Result<SyntaxTree, CliError> {
    parse_bracketed(&read(path)?).map_err(|e| CliError::Input(format!("{}:{e}", path.display())))
}

fn read_records(path: &Path) -> Result<Vec<PrimingRecord>, CliError> {
    let ds = load_dataset(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let records = ds
        .into_records()
        .map_err(|errs| CliError::Input(diagnostics(&errs)))?;
    if records.is_empty() {
        return Err(CliError::Input(format!("{}: empty input", path.display())));
    }
    Ok(records)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
        }
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Output(e.to_string())),
    }
}

impl Common {
    fn kernel_params(&self) -> Result<KernelParams, CliError> {
        let mode: MatchMode = self
            .mode
            .parse()
            .map_err(|e| CliError::Config(format!("--mode {:?}: {e}", self.mode)))?;
        KernelParams::new(self.lambda, mode).map_err(|e| CliError::Config(e.to_string()))
    }

    fn spi_variant(&self) -> Result<SpiVariant, CliError> {
        self.variant
            .parse()
            .map_err(|e: SpiError| CliError::Config(format!("--variant {:?}: {e}", self.variant)))
    }

    fn spi_params(&self) -> Result<SpiParams, CliError> {
        SpiParams::new(self.gamma, self.spi_variant()?).map_err(|e| CliError::Config(e.to_string()))
    }

    fn eval_config(&self) -> Result<EvalConfig, CliError> {
        Ok(EvalConfig {
            kernel: self.kernel_params()?,
            spi: self.spi_params()?,
        })
    }
}

fn labeled(rows: &[(&str, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter()
        .map(|(k, v)| format!("{k:<width$}  {v}\n"))
        .collect()
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let common = &cli.common;
    match &cli.command {
        Command::Kernel { tree_a, tree_b } => cmd_kernel(common, tree_a, tree_b),
        Command::Spi {
            positive,
            negative,
            predicted,
        } => cmd_spi(common, positive, negative, predicted),
        Command::Eval {
            dataset,
            jobs,
            format,
        } => cmd_eval(common, dataset, *jobs, *format),
        Command::Gen {
            bindings,
            perplexities,
            threshold,
        } => cmd_gen(common, bindings, perplexities.as_deref(), *threshold),
        Command::Sweep { x, gammas } => cmd_sweep(common, x, gammas),
        Command::Stats { corpus } => cmd_stats(common, corpus),
        Command::Correlate { dataset, exact } => cmd_correlate(common, dataset, *exact),
    }
}

fn cmd_kernel(common: &Common, a: &Path, b: &Path) -> Result<(), CliError> {
    let params = common.kernel_params()?;
    let (ta, tb) = (read_tree(a)?, read_tree(b)?);
    let v = kernel_value(&ta, &tb, &params).map_err(|e| CliError::Input(e.to_string()))?;
    let text = if common.json {
        let mut s = json!({
            "lambda": params.lambda(),
            "mode": params.mode(),
            "kernel": v.raw,
            "normalized": v.normalized,
            "distance": v.distance,
        })
        .to_string();
        s.push('\n');
        s
    } else {
        labeled(&[
            ("K", v.raw.to_string()),
            ("K_norm", v.normalized.to_string()),
            ("d", v.distance.to_string()),
            ("lambda", params.lambda().to_string()),
            ("mode", params.mode().to_string()),
        ])
    };
    emit(&common.out, &text)
}

fn cmd_spi(common: &Common, pp: &Path, np: &Path, ps: &Path) -> Result<(), CliError> {
    let config = common.eval_config()?;
    let trees = [read_tree(pp)?, read_tree(np)?, read_tree(ps)?];
    let r = spi_score(&trees[0], &trees[1], &trees[2], &config.kernel, &config.spi)
        .map_err(|e| CliError::Input(e.to_string()))?;
    let text = if common.json {
        let mut s = json!({ "config": config, "result": r }).to_string();
        s.push('\n');
        s
    } else {
        labeled(&[
            ("d_p", r.d_p.to_string()),
            ("d_n", r.d_n.to_string()),
            ("spi", r.spi.to_string()),
            ("direction", r.direction.to_string()),
            ("lambda", config.kernel.lambda().to_string()),
            ("mode", config.kernel.mode().to_string()),
            ("gamma", config.spi.gamma().to_string()),
            ("variant", config.spi.variant().to_string()),
        ])
    };
    emit(&common.out, &text)
}

fn field_line(name: &str, c: &FieldCorrelation) -> String {
    match c.result {
        Some(res) => format!(
            "{name}: r={} p={:e} (used {}, skipped {})\n",
            res.r, res.p, c.used, c.skipped
        ),
        None => format!("{name}: no data (skipped {})\n", c.skipped),
    }
}

fn summary(report: &EvalReport) -> String {
    let mut s = format!(
        "records: {}\nmean_spi: {}\n",
        report.per_record.len(),
        report.overall_mean_spi().unwrap_or(f64::NAN)
    );
    s += "type,n,mean_spi,positive_rate\n";
    for (ty, t) in &report.per_type {
        s += &format!("{ty},{},{},{}\n", t.n, t.mean_spi, t.positive_rate);
    }
    if let Some(c) = &report.correlations {
        s += &field_line("sentence_similarity", &c.sentence);
        s += &field_line("image_similarity", &c.image);
    }
    s
}

fn has_similarity(records: &[PrimingRecord]) -> bool {
    records
        .iter()
        .any(|r| r.sentence_similarity.is_some() || r.image_similarity.is_some())
}

fn cmd_eval(
    common: &Common,
    path: &Path,
    jobs: Option<usize>,
    format: Format,
) -> Result<(), CliError> {
    let config = common.eval_config()?;
    let records = read_records(path)?;
    let mut report =
        evaluate_parallel(&records, config, jobs).map_err(|e| CliError::Input(e.to_string()))?;
    if has_similarity(&records) {
        match correlate(&report, &records) {
            Ok(r) => report = r,
            Err(e) => eprintln!("warning: correlations skipped: {e}"),
        }
    }
    let format = if common.json { Format::Json } else { format };
    emit(&common.out, &emit_report(&report, format))?;
    let s = summary(&report);
    if common.out.is_some() {
        print!("{s}");
    } else {
        eprint!("{s}");
    }
    Ok(())
}

fn read_perplexities(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = read(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Input(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}

fn cmd_gen(
    common: &Common,
    path: &Path,
    perplexities: Option<&Path>,
    threshold: f64,
) -> Result<(), CliError> {
    if !threshold.is_finite() || threshold < 0.0 {
        return Err(CliError::Config(format!(
            "--threshold must be a non-negative number, got {threshold}"
        )));
    }
    let lines = parse_bindings(&read(path)?).map_err(|errs| CliError::Input(diagnostics(&errs)))?;
    let registry = load_templates();
    let mut sentences = Vec::with_capacity(2 * lines.len());
    let mut errors = Vec::new();
    for l in &lines {
        match registry.generate_pair_with_positive(l.positive, &l.bindings) {
            Ok((p, n)) => sentences.extend([p, n]),
            Err(e) => errors.push(format!("line {}: {e}", l.line)),
        }
    }
    if !errors.is_empty() {
        return Err(CliError::Input(diagnostics(&errors)));
    }
    if let Some(pp) = perplexities {
        let scores = read_perplexities(pp)?;
        let (kept, dropped) = filter_by_perplexity(sentences, &scores, threshold)
            .map_err(|e| CliError::Input(e.to_string()))?;
        eprintln!(
            "kept {}, dropped {} above perplexity {threshold}",
            kept.len(),
            dropped.len()
        );
        sentences = kept;
    }
    let text: String = sentences
        .iter()
        .map(|s| serde_json::to_string(s).expect("sentences serialize") + "\n")
        .collect();
    emit(&common.out, &text)
}

fn cmd_sweep(common: &Common, xs: &[f64], gammas: &[f64]) -> Result<(), CliError> {
    let rows = gamma_sweep(xs, gammas, common.spi_variant()?)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let text = if common.json {
        serde_json::to_string(&rows).expect("rows serialize") + "\n"
    } else {
        sweep_to_csv(&rows)
    };
    emit(&common.out, &text)
}

fn cmd_stats(common: &Common, path: &Path) -> Result<(), CliError> {
    let sentences =
        sentences_from(&read(path)?).map_err(|errs| CliError::Input(diagnostics(&errs)))?;
    let s = corpus_stats(&sentences)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let text = if common.json {
        serde_json::to_string(&s).expect("stats serialize") + "\n"
    } else {
        labeled(&[
            ("sentences", s.sentence_count.to_string()),
            ("tokens", s.token_count.to_string()),
            ("types", s.word_type_count.to_string()),
            ("ttr", s.ttr.to_string()),
            ("mean_tokens", s.mean_tokens_per_sentence.to_string()),
            ("min_tokens", s.token_range.0.to_string()),
            ("max_tokens", s.token_range.1.to_string()),
        ])
    };
    emit(&common.out, &text)
}

fn exact_p(
    records: &[PrimingRecord],
    report: &EvalReport,
    field: fn(&PrimingRecord) -> Option<f64>,
) -> Option<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = report
        .per_record
        .iter()
        .filter_map(|s| {
            let rec = records.iter().find(|r| r.id == s.id)?;
            field(rec).map(|v| (v, s.spi))
        })
        .unzip();
    if xs.len() > EXACT_PERMUTATION_MAX {
        return None;
    }
    pearson_permutation_p(&xs, &ys).ok()
}

fn cmd_correlate(common: &Common, path: &Path, exact: bool) -> Result<(), CliError> {
    let config = common.eval_config()?;
    let records = read_records(path)?;
    let report =
        evaluate_parallel(&records, config, None).map_err(|e| CliError::Input(e.to_string()))?;
    let report = correlate(&report, &records).map_err(|e| CliError::Input(e.to_string()))?;
    let corr = report.correlations.expect("correlate fills correlations");
    let exact_ps = exact.then(|| {
        (
            exact_p(&records, &report, |r| r.sentence_similarity),
            exact_p(&records, &report, |r| r.image_similarity),
        )
    });
    let text = if common.json {
        let mut v = json!({ "config": config, "sentence": corr.sentence, "image": corr.image });
        if let Some((s, i)) = exact_ps {
            v["sentence_exact_p"] = json!(s);
            v["image_exact_p"] = json!(i);
        }
        v.to_string() + "\n"
    } else {
        let mut s = field_line("sentence_similarity", &corr.sentence)
            + &field_line("image_similarity", &corr.image);
        if let Some((sp, ip)) = exact_ps {
            for (name, p) in [("sentence_similarity", sp), ("image_similarity", ip)] {
                match p {
                    Some(p) => s += &format!("{name}: exact permutation p={p}\n"),
                    None => {
                        s += &format!("{name}: exact p needs 3 to {EXACT_PERMUTATION_MAX} pairs\n")
                    }
                }
            }
        }
        s
    };
    emit(&common.out, &text)
}

//! Subcommands behind the `karma` binary.
//!
//! Every subcommand accepts `--config FILE`. The file is TOML with the same
//! keys as the long flags (underscores instead of dashes), either at top
//! level or under a table named after the subcommand. Values from the file
//! override flags, which override defaults. The fully resolved settings are
//! written next to the primary output as `<output>.run.toml`.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::datagen::{
    generate, load_csv, matrix_m_fixture, save_csv, CsvOptions, GeneratorConfig, GroundTruth, LabelRule, MaskSpec,
};
use crate::error::{Error, Result};
use crate::evaluation::{evaluate, holdout_select_gamma, metrics_from, regret_harness, split_holdout, LambdaReading, RegretConfig, REPORT_FORMAT_VERSION};
use crate::kernel::{gram_with, MissingDataKernel};
use crate::learner::{train_batch_traced, KarmaModel, RhoChoice, Schedule, TrainConfig};
use crate::loss::{LossKind, LossSpec};
use crate::observed::{LabeledExample, ObservedVector};
use crate::regularity::check_regularity;

#[derive(Debug, Parser)]
#[command(name = "karma", version, about = "Kernel learning on vectors with missing attributes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a synthetic low-rank dataset, or write the four-column fixture.
    Generate(GenerateArgs),
    /// Train a model on a CSV file.
    Train(TrainArgs),
    /// Score a CSV file with a saved model.
    Predict(PredictArgs),
    /// Mean loss and 0/1 error of a saved model on a CSV file.
    Evaluate(EvaluateArgs),
    /// Check a dataset against a ground-truth subspace.
    CheckRegularity(RegularityArgs),
    /// Kernel matrix of the rows of a CSV file.
    Gram(GramArgs),
    /// Online run against the ground-truth comparator, with the regret bound.
    Regret(RegretArgs),
}

/// Options shared by every subcommand that reads a data CSV.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvArgs {
    /// Cell values that mean "missing".
    #[arg(long = "missing", value_delimiter = ',', default_values_t = vec![String::new(), "?".to_string()])]
    pub missing: Vec<String>,
    #[arg(long, default_value = "label")]
    pub label_column: String,
    /// Divide all values by max ‖P_o x‖ when it exceeds 1.
    #[arg(long)]
    pub rescale: bool,
}

impl CsvArgs {
    fn options(&self) -> CsvOptions {
        CsvOptions {
            missing: self.missing.clone(),
            label_column: self.label_column.clone(),
            rescale: self.rescale,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Data CSV to write.
    #[arg(long, default_value = "data.csv")]
    pub out: PathBuf,
    /// Ground-truth file; defaults to `<out>.truth.toml`.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<PathBuf>,
    /// Write a named fixture instead of sampling (`matrix-m`).
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture: Option<String>,
    #[arg(long, default_value_t = 50)]
    pub per_type: usize,
    #[arg(long, default_value_t = 10)]
    pub d: usize,
    #[arg(long, default_value_t = 2)]
    pub rank: usize,
    #[arg(long, default_value_t = 0.2)]
    pub lambda0: f64,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Per-coordinate keep probability.
    #[arg(long, default_value_t = 0.6)]
    pub keep: f64,
    /// Observation patterns as `0-2-5;1-3`, used instead of `--keep`.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patterns: Option<String>,
    #[arg(long, default_value_t = 0.0)]
    pub margin: f64,
    /// Real-valued labels `w*·x + noise·N(0,1)` instead of signs.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub data: PathBuf,
    /// Model file to write.
    #[arg(long, default_value = "model.txt")]
    pub out: PathBuf,
    /// Fixed depth; without it the depth is chosen on a holdout split.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1usize, 2, 3, 4])]
    pub gamma_grid: Vec<usize>,
    /// Fraction of rows held out for depth selection.
    #[arg(long, default_value_t = 0.2)]
    pub holdout: f64,
    #[arg(long, default_value_t = 0.001)]
    pub rho: f64,
    /// Pick ρ = L X √Γ / √(B T) from this comparator bound B.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auto_rho_b: Option<f64>,
    #[arg(long, default_value = "hinge")]
    pub loss: LossKind,
    /// Clip bound for the squared loss.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clip: Option<f64>,
    /// Step size c/t instead of 1/(ρt).
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_c: Option<f64>,
    /// Constant step size instead of 1/(ρt).
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_const: Option<f64>,
    /// Passes over the training rows; ignored when `--rounds` is given.
    #[arg(long, default_value_t = 1)]
    pub epochs: usize,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rounds: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use the cosine-normalized kernel.
    #[arg(long)]
    pub normalized: bool,
    /// Predict with the last iterate instead of the average.
    #[arg(long)]
    pub last_iterate: bool,
    #[command(flatten)]
    pub csv: CsvArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Predictions CSV; stdout when absent.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub csv: CsvArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Report file; stdout when absent.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Loss to report; defaults to the model's training loss.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss: Option<LossKind>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clip: Option<f64>,
    #[command(flatten)]
    pub csv: CsvArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularityArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    /// TOML report; a text table goes to stdout either way.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[command(flatten)]
    pub csv: CsvArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GramArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub gamma: usize,
    #[arg(long)]
    pub normalized: bool,
    /// Gram CSV; stdout when absent.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub csv: CsvArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegretArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    /// Bound report (TOML).
    #[arg(long, default_value = "regret.toml")]
    pub out: PathBuf,
    /// Per-round curve; defaults to `<out>.curve.csv`.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve: Option<PathBuf>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<usize>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[arg(long, default_value = "hinge")]
    pub loss: LossKind,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clip: Option<f64>,
    /// `eigen` or `singular`.
    #[arg(long, default_value = "eigen", value_parser = parse_lambda_reading)]
    pub lambda_reading: LambdaReading,
    #[command(flatten)]
    pub csv: CsvArgs,
}

fn parse_lambda_reading(s: &str) -> std::result::Result<LambdaReading, String> {
    match s {
        "eigen" => Ok(LambdaReading::Eigen),
        "singular" => Ok(LambdaReading::Singular),
        _ => Err(format!("expected eigen or singular, got {s:?}")),
    }
}

/// Error with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub error: Error,
}

impl From<Error> for CliError {
    fn from(error: Error) -> Self {
        let code = match error {
            Error::InvalidParameter(_) | Error::Toml(_) => 2,
            _ => 1,
        };
        Self { code, error }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.error.fmt(f)
    }
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the exit code. Diagnostics go to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

pub fn run(command: Command) -> std::result::Result<(), CliError> {
    match command {
        Command::Generate(a) => cmd_generate(&resolve(&a, a.config.as_deref(), "generate")?),
        Command::Train(a) => cmd_train(&resolve(&a, a.config.as_deref(), "train")?),
        Command::Predict(a) => cmd_predict(&resolve(&a, a.config.as_deref(), "predict")?),
        Command::Evaluate(a) => cmd_evaluate(&resolve(&a, a.config.as_deref(), "evaluate")?),
        Command::CheckRegularity(a) => cmd_check_regularity(&resolve(&a, a.config.as_deref(), "check-regularity")?),
        Command::Gram(a) => cmd_gram(&resolve(&a, a.config.as_deref(), "gram")?),
        Command::Regret(a) => cmd_regret(&resolve(&a, a.config.as_deref(), "regret")?),
    }
    .map_err(CliError::from)
}

/// Overlays the config file (if any) on the flag values.
pub fn resolve<T: Serialize + DeserializeOwned>(flags: &T, config: Option<&Path>, section: &str) -> Result<T> {
    let mut base = toml::Table::try_from(flags)?;
    if let Some(path) = config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut file: toml::Table = text.parse()?;
        let overlay = match file.remove(section) {
            Some(toml::Value::Table(t)) => t,
            Some(_) => return Err(Error::param(format!("[{section}] in {} is not a table", path.display()))),
            None => file,
        };
        for (k, v) in overlay {
            base.insert(k, v);
        }
    }
    Ok(base.try_into()?)
}

fn run_log_path(out: &Path) -> PathBuf {
    sibling(out, "run.toml")
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let mut s = out.as_os_str().to_os_string();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

fn write_run_log<T: Serialize>(out: &Path, command: &str, args: &T) -> Result<()> {
    let mut table = toml::Table::new();
    table.insert("command".into(), toml::Value::String(command.into()));
    table.insert("format_version".into(), toml::Value::Integer(1));
    table.insert(command.into(), toml::Value::try_from(args)?);
    let path = run_log_path(out);
    std::fs::write(&path, toml::to_string(&table)?).map_err(|e| Error::io(path, e))
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn parse_patterns(spec: &str) -> Result<Vec<Vec<usize>>> {
    spec.split(';')
        .map(|p| {
            let p = p.trim();
            if p.is_empty() {
                return Ok(Vec::new());
            }
            p.split('-')
                .map(|i| {
                    i.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::param(format!("bad pattern entry {i:?} in {spec:?}")))
                })
                .collect()
        })
        .collect()
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    if let Some(name) = &args.fixture {
        if name != "matrix-m" {
            return Err(Error::param(format!("unknown fixture {name:?}; known: matrix-m")));
        }
        if args.per_type == 0 {
            return Err(Error::param("per-type must be at least 1"));
        }
        save_csv(&args.out, 4, &matrix_m_fixture(args.per_type))?;
        return write_run_log(&args.out, "generate", args);
    }
    let mask = match &args.patterns {
        Some(p) => MaskSpec::Patterns {
            patterns: parse_patterns(p)?,
        },
        None => MaskSpec::Keep { p: args.keep },
    };
    let config = GeneratorConfig {
        d: args.d,
        rank: args.rank,
        lambda0: args.lambda0,
        n: args.n,
        mask,
        margin: args.margin,
        labels: match args.noise {
            Some(noise) => LabelRule::Regression { noise },
            None => LabelRule::Margin,
        },
        seed: args.seed,
    };
    let (data, truth) = generate(&config)?;
    save_csv(&args.out, args.d, &data)?;
    let truth_path = args.truth.clone().unwrap_or_else(|| sibling(&args.out, "truth.toml"));
    truth.save(&truth_path)?;
    write_run_log(&args.out, "generate", args)
}

fn load_examples(path: &Path, csv: &CsvArgs) -> Result<(usize, Vec<LabeledExample>)> {
    let ds = load_csv(path, &csv.options())?;
    if csv.rescale && ds.scale != 1.0 {
        eprintln!("rescaled {} by {:.17e}", path.display(), ds.scale);
    }
    Ok((ds.d, ds.examples))
}

fn loss_spec(kind: LossKind, clip: Option<f64>) -> Result<LossSpec> {
    LossSpec::from_kind(kind, clip)
}

pub fn cmd_train(args: &TrainArgs) -> Result<()> {
    let (_, data) = load_examples(&args.data, &args.csv)?;
    if data.is_empty() {
        return Err(Error::Empty("training data"));
    }
    let schedule = match (args.eta_c, args.eta_const) {
        (None, None) => Schedule::Pegasos,
        (Some(c), None) => Schedule::Scaled { c },
        (None, Some(eta)) => Schedule::Constant { eta },
        (Some(_), Some(_)) => return Err(Error::param("eta-c and eta-const are mutually exclusive")),
    };
    let config = TrainConfig {
        gamma: args.gamma.unwrap_or(1),
        rho: match args.auto_rho_b {
            Some(b) => RhoChoice::Auto { b },
            None => RhoChoice::Fixed { rho: args.rho },
        },
        loss: loss_spec(args.loss, args.clip)?,
        schedule,
        normalized: args.normalized,
        audit_sup_norm: None,
    };
    if args.epochs == 0 {
        return Err(Error::param("epochs must be at least 1"));
    }
    let rounds_for = |m: usize| args.rounds.unwrap_or(args.epochs * m);

    let (mut model, trace) = match args.gamma {
        Some(_) => train_batch_traced(&data, rounds_for(data.len()), &config, args.seed)?,
        None => {
            let (train, holdout) = split_holdout(&data, args.holdout, args.seed)?;
            let (_, report) = holdout_select_gamma(&train, &holdout, &args.gamma_grid, &config, rounds_for(train.len()), args.seed)?;
            std::fs::write(sibling(&args.out, "report.toml"), report.to_toml()?)
                .map_err(|e| Error::io(sibling(&args.out, "report.toml"), e))?;
            let cfg = TrainConfig {
                gamma: report.selected_gamma,
                ..config
            };
            // retrace the selected run so the log matches the saved model
            train_batch_traced(&train, rounds_for(train.len()), &cfg, args.seed)?
        }
    };
    model.set_use_average(!args.last_iterate);
    model.save(&args.out)?;

    let mut log = String::from("t,prediction,loss,cumulative\n");
    for k in 0..trace.len() {
        log.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e}\n",
            k + 1,
            trace.predictions[k],
            trace.losses[k],
            trace.cumulative[k]
        ));
    }
    let log_path = sibling(&args.out, "log.csv");
    std::fs::write(&log_path, log).map_err(|e| Error::io(log_path, e))?;
    write_run_log(&args.out, "train", args)
}

fn check_model_dim(model: &KarmaModel, d: usize) -> Result<()> {
    match model.dim() {
        Some(m) if m != d => Err(Error::DimensionMismatch { expected: m, found: d }),
        _ => Ok(()),
    }
}

pub fn cmd_predict(args: &PredictArgs) -> Result<()> {
    let model = KarmaModel::load(&args.model)?;
    let (d, data) = load_examples(&args.data, &args.csv)?;
    check_model_dim(&model, d)?;
    let inputs: Vec<ObservedVector> = data.iter().map(|e| e.input.clone()).collect();
    let preds = model.predict_batch(&inputs, model.uses_average())?;
    let mut out = String::from("prediction,label\n");
    for (p, e) in preds.iter().zip(&data) {
        out.push_str(&format!("{p:.16e},{}\n", e.label));
    }
    write_output(args.out.as_deref(), &out)?;
    if let Some(p) = &args.out {
        write_run_log(p, "predict", args)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct EvaluationFile {
    format_version: u32,
    loss: LossKind,
    gamma: usize,
    mean_loss: f64,
    zero_one_error: f64,
    n: usize,
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<()> {
    let model = KarmaModel::load(&args.model)?;
    let (d, data) = load_examples(&args.data, &args.csv)?;
    check_model_dim(&model, d)?;
    let loss = match args.loss {
        Some(kind) => loss_spec(kind, args.clip.or(Some(model.loss().lipschitz)))?,
        None => model.loss(),
    };
    let m = evaluate(&model, &data, loss)?;
    let file = EvaluationFile {
        format_version: REPORT_FORMAT_VERSION,
        loss: loss.kind,
        gamma: model.gamma(),
        mean_loss: m.mean_loss,
        zero_one_error: m.zero_one_error,
        n: m.n,
    };
    write_output(args.out.as_deref(), &toml::to_string(&file)?)?;
    if let Some(p) = &args.out {
        write_run_log(p, "evaluate", args)?;
    }
    Ok(())
}

pub fn cmd_check_regularity(args: &RegularityArgs) -> Result<()> {
    let truth = GroundTruth::load(&args.truth)?;
    let (_, data) = load_examples(&args.data, &args.csv)?;
    let xs: Vec<ObservedVector> = data.iter().map(|e| e.input.clone()).collect();
    let full = (truth.full_vectors.len() == xs.len()).then_some(truth.full_vectors.as_slice());
    let report = check_regularity(&xs, full, &truth.subspace, args.tol)?;
    print!("{}", report.to_table());
    if let Some(p) = &args.out {
        std::fs::write(p, toml::to_string(&report)?).map_err(|e| Error::io(p, e))?;
        write_run_log(p, "check-regularity", args)?;
    }
    Ok(())
}

pub fn gram_csv(data: &[ObservedVector], kernel: &MissingDataKernel) -> Result<String> {
    let g = gram_with(data, kernel)?;
    let mut out = String::new();
    for i in 0..g.nrows() {
        let row: Vec<String> = (0..g.ncols()).map(|j| format!("{:.16e}", g[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn cmd_gram(args: &GramArgs) -> Result<()> {
    let (_, data) = load_examples(&args.data, &args.csv)?;
    let kernel = if args.normalized {
        MissingDataKernel::normalized(args.gamma)?
    } else {
        MissingDataKernel::new(args.gamma)?
    };
    let xs: Vec<ObservedVector> = data.into_iter().map(|e| e.input).collect();
    write_output(args.out.as_deref(), &gram_csv(&xs, &kernel)?)?;
    if let Some(p) = &args.out {
        write_run_log(p, "gram", args)?;
    }
    Ok(())
}

pub fn cmd_regret(args: &RegretArgs) -> Result<()> {
    let truth = GroundTruth::load(&args.truth)?;
    let (_, data) = load_examples(&args.data, &args.csv)?;
    let config = RegretConfig {
        loss: loss_spec(args.loss, args.clip)?,
        gamma: args.gamma,
        rho: args.rho,
        b: args.b,
        lambda_reading: args.lambda_reading,
    };
    let record = regret_harness(&data, Some(&truth), &config)?;
    std::fs::write(&args.out, record.to_toml()?).map_err(|e| Error::io(&args.out, e))?;
    let curve = args.curve.clone().unwrap_or_else(|| sibling(&args.out, "curve.csv"));
    record.save_curve(&curve)?;
    eprintln!(
        "regret {:.6e}  bound {:.6e}  {}",
        record.regret,
        record.bound,
        if record.within_bound { "within bound" } else { "BOUND EXCEEDED" }
    );
    write_run_log(&args.out, "regret", args)
}

/// Predictions of a saved model on examples, in order. Used to cross-check
/// the `predict` output against in-process evaluation.
pub fn model_predictions(model: &KarmaModel, data: &[LabeledExample]) -> Result<Vec<f64>> {
    let inputs: Vec<ObservedVector> = data.iter().map(|e| e.input.clone()).collect();
    model.predict_batch(&inputs, model.uses_average())
}

/// Metrics of `predictions` against `data` under `loss`.
pub fn score(predictions: &[f64], data: &[LabeledExample], loss: LossSpec) -> Result<crate::evaluation::Metrics> {
    if data.is_empty() {
        return Err(Error::Empty("evaluation set"));
    }
    Ok(metrics_from(predictions, data, loss))
}

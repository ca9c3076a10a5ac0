//! Metrics, imputation baselines, holdout selection of `γ`, and the regret
//! harness.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::GroundTruth;
use crate::dims::gamma_dims;
use crate::error::{Error, Result};
use crate::learner::{batch_order, sup_norm, train_batch, train_online, KarmaModel, RhoChoice, Schedule, TrainConfig};
use crate::loss::LossSpec;
use crate::observed::{common_dim, LabeledExample, ObservedVector};
use crate::reference::{improper_weights, DensePredictorF0, DensePredictorFGamma};
use crate::regularity::check_regularity;

pub const REPORT_FORMAT_VERSION: u32 = 1;

/// Anything that maps an observed vector to a real score.
pub trait Predictor: Sync {
    fn predict(&self, x: &ObservedVector) -> Result<f64>;
}

impl Predictor for KarmaModel {
    fn predict(&self, x: &ObservedVector) -> Result<f64> {
        self.predict_default(x)
    }
}

impl Predictor for DensePredictorF0 {
    fn predict(&self, x: &ObservedVector) -> Result<f64> {
        DensePredictorF0::predict(self, x)
    }
}

impl Predictor for DensePredictorFGamma {
    fn predict(&self, x: &ObservedVector) -> Result<f64> {
        DensePredictorFGamma::predict(self, x)
    }
}

/// Predicts the same value everywhere.
#[derive(Debug, Clone, Copy)]
pub struct Constant(pub f64);

impl Predictor for Constant {
    fn predict(&self, _x: &ObservedVector) -> Result<f64> {
        Ok(self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mean_loss: f64,
    /// Fraction with `sign(prediction) ≠ label`. A zero prediction counts
    /// as an error.
    pub zero_one_error: f64,
    pub n: usize,
}

pub fn evaluate<P: Predictor + ?Sized>(predictor: &P, data: &[LabeledExample], loss: LossSpec) -> Result<Metrics> {
    if data.is_empty() {
        return Err(Error::Empty("evaluation set"));
    }
    let preds = data
        .par_iter()
        .map(|e| predictor.predict(&e.input))
        .collect::<Result<Vec<f64>>>()?;
    Ok(metrics_from(&preds, data, loss))
}

pub fn metrics_from(predictions: &[f64], data: &[LabeledExample], loss: LossSpec) -> Metrics {
    let n = data.len();
    let mut total = 0.0;
    let mut wrong = 0usize;
    for (&p, e) in predictions.iter().zip(data) {
        total += loss.value(p, e.label);
        if p * e.label <= 0.0 {
            wrong += 1;
        }
    }
    Metrics {
        mean_loss: total / n as f64,
        zero_one_error: wrong as f64 / n as f64,
        n,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Imputation {
    Zero,
    Mean,
}

/// Linear model on imputed inputs trained with the same regularized
/// subgradient recurrence as the kernel learner.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLinearModel {
    pub imputation: Imputation,
    pub fill: Vec<f64>,
    pub w: Vec<f64>,
    pub avg_w: Vec<f64>,
    pub rho: f64,
    pub rounds: u64,
    pub use_average: bool,
}

impl DenseLinearModel {
    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    pub fn predict_with(&self, x: &ObservedVector, use_average: bool) -> Result<f64> {
        let dense = x.imputed_with(&self.fill)?;
        Ok(Self::dot(if use_average { &self.avg_w } else { &self.w }, &dense))
    }
}

impl Predictor for DenseLinearModel {
    fn predict(&self, x: &ObservedVector) -> Result<f64> {
        self.predict_with(x, self.use_average)
    }
}

/// Per-coordinate mean of the observed values; 0 for a coordinate never
/// observed.
pub fn observed_means(data: &[LabeledExample]) -> Result<Vec<f64>> {
    let d = common_dim(data.iter().map(|e| &e.input))?.ok_or(Error::Empty("training sample"))?;
    let mut sum = vec![0.0; d];
    let mut count = vec![0usize; d];
    for e in data {
        for (i, v) in e.input.iter() {
            sum[i] += v;
            count[i] += 1;
        }
    }
    Ok(sum
        .iter()
        .zip(&count)
        .map(|(&s, &c)| if c == 0 { 0.0 } else { s / c as f64 })
        .collect())
}

/// One pass over `stream` with imputed dense inputs. `ρ` is resolved as for
/// the kernel learner at `γ = 1`, and predictions before each update are
/// returned alongside the model.
pub fn train_dense_online(
    stream: &[LabeledExample],
    fill: Vec<f64>,
    imputation: Imputation,
    config: &TrainConfig,
) -> Result<(DenseLinearModel, Vec<f64>)> {
    let d = fill.len();
    let linear = TrainConfig {
        gamma: 1,
        normalized: false,
        ..*config
    };
    let rho = if stream.is_empty() {
        match config.rho {
            RhoChoice::Fixed { rho } => rho,
            RhoChoice::Auto { .. } => 1.0,
        }
    } else {
        linear.resolve_rho(stream)?
    };
    let mut model = DenseLinearModel {
        imputation,
        fill,
        w: vec![0.0; d],
        avg_w: vec![0.0; d],
        rho,
        rounds: 0,
        use_average: false,
    };
    let mut predictions = Vec::with_capacity(stream.len());
    for e in stream {
        let t = model.rounds + 1;
        let x = e.input.imputed_with(&model.fill)?;
        let p = DenseLinearModel::dot(&model.w, &x);
        let g = config.loss.subgradient(p, e.label);
        if !p.is_finite() || !g.is_finite() {
            return Err(Error::NonFinite {
                what: "prediction",
                round: t,
            });
        }
        let eta = config.schedule.eta(t, rho);
        let shrink = 1.0 - eta * rho;
        for ((w, m), xi) in model.w.iter_mut().zip(model.avg_w.iter_mut()).zip(&x) {
            *m += (*w - *m) / t as f64;
            *w = shrink * *w - eta * g * xi;
        }
        model.rounds = t;
        predictions.push(p);
    }
    Ok((model, predictions))
}

fn dense_baseline(
    train: &[LabeledExample],
    rounds: usize,
    config: &TrainConfig,
    seed: u64,
    imputation: Imputation,
) -> Result<DenseLinearModel> {
    if train.is_empty() {
        return Err(Error::Empty("training sample"));
    }
    let fill = match imputation {
        Imputation::Zero => vec![0.0; train[0].dim()],
        Imputation::Mean => observed_means(train)?,
    };
    let stream: Vec<LabeledExample> = batch_order(train.len(), rounds, seed)
        .into_iter()
        .map(|i| train[i].clone())
        .collect();
    let (mut model, _) = train_dense_online(&stream, fill, imputation, config)?;
    model.use_average = true;
    Ok(model)
}

/// Missing entries set to 0, same visiting order as [`train_batch`].
pub fn zero_impute_baseline(train: &[LabeledExample], rounds: usize, config: &TrainConfig, seed: u64) -> Result<DenseLinearModel> {
    dense_baseline(train, rounds, config, seed, Imputation::Zero)
}

/// Missing entries set to the training mean of their coordinate.
pub fn mean_impute_baseline(train: &[LabeledExample], rounds: usize, config: &TrainConfig, seed: u64) -> Result<DenseLinearModel> {
    dense_baseline(train, rounds, config, seed, Imputation::Mean)
}

/// Seeded shuffle, then the last `fraction` of the rows become the holdout.
pub fn split_holdout(data: &[LabeledExample], fraction: f64, seed: u64) -> Result<(Vec<LabeledExample>, Vec<LabeledExample>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::param(format!("holdout fraction must lie in (0, 1), got {fraction}")));
    }
    let n = data.len();
    let n_hold = ((n as f64) * fraction).round() as usize;
    if n_hold == 0 || n_hold == n {
        return Err(Error::param(format!(
            "holdout fraction {fraction} leaves an empty side with {n} rows"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (tr, ho) = idx.split_at(n - n_hold);
    Ok((
        tr.iter().map(|&i| data[i].clone()).collect(),
        ho.iter().map(|&i| data[i].clone()).collect(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaScore {
    pub gamma: usize,
    pub holdout: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedMetrics {
    pub name: String,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub format_version: u32,
    pub selected_gamma: usize,
    pub per_gamma: Vec<GammaScore>,
    #[serde(default)]
    pub models: Vec<NamedMetrics>,
}

impl EvalReport {
    pub fn holdout_loss(&self, gamma: usize) -> Option<f64> {
        self.per_gamma.iter().find(|s| s.gamma == gamma).map(|s| s.holdout.mean_loss)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }
}

/// Trains one averaged model per `γ` in `grid` on `train` and keeps the one
/// with the smallest mean holdout loss, preferring the smaller `γ` on ties.
/// The grid must contain 1.
pub fn holdout_select_gamma(
    train: &[LabeledExample],
    holdout: &[LabeledExample],
    grid: &[usize],
    config: &TrainConfig,
    rounds: usize,
    seed: u64,
) -> Result<(KarmaModel, EvalReport)> {
    let mut grid = grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    if !grid.contains(&1) {
        return Err(Error::param("the gamma grid must contain 1"));
    }
    if holdout.is_empty() {
        return Err(Error::Empty("holdout set"));
    }
    let trained = grid
        .par_iter()
        .map(|&gamma| {
            let cfg = TrainConfig { gamma, ..*config };
            let model = train_batch(train, rounds, &cfg, seed)?;
            let metrics = evaluate(&model, holdout, config.loss)?;
            Ok((model, GammaScore { gamma, holdout: metrics }))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (k, (_, score)) in trained.iter().enumerate() {
        if score.holdout.mean_loss < trained[best].1.holdout.mean_loss {
            best = k;
        }
    }
    let per_gamma: Vec<GammaScore> = trained.iter().map(|(_, s)| *s).collect();
    let selected_gamma = per_gamma[best].gamma;
    let model = trained.into_iter().nth(best).expect("index in range").0;
    Ok((
        model,
        EvalReport {
            format_version: REPORT_FORMAT_VERSION,
            selected_gamma,
            per_gamma,
            models: Vec::new(),
        },
    ))
}

/// Which spectral quantity stands in for `λ` in the automatic depth and in
/// the approximation term of the bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LambdaReading {
    /// Smallest positive eigenvalue of `(P_E)_{o,o}`. The truncated series
    /// converges at this rate.
    Eigen,
    /// Smallest positive singular value of `P_o P_E`, the square root of
    /// the above.
    Singular,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegretConfig {
    pub loss: LossSpec,
    /// `None` picks `⌈ln T / λ⌉`.
    pub gamma: Option<usize>,
    /// `None` picks `ρ = L X √Γ / √(B T)`.
    pub rho: Option<f64>,
    /// `None` uses `‖v*‖²` when the sequence space is small enough to build
    /// `v*`, else `Γ ‖w‖²`.
    pub b: Option<f64>,
    pub lambda_reading: LambdaReading,
}

impl Default for RegretConfig {
    fn default() -> Self {
        Self {
            loss: LossSpec::hinge(),
            gamma: None,
            rho: None,
            b: None,
            lambda_reading: LambdaReading::Eigen,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegretRound {
    pub t: usize,
    pub algorithm: f64,
    pub comparator: f64,
    pub regret: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretRecord {
    pub format_version: u32,
    pub rounds: usize,
    pub d: usize,
    pub gamma: usize,
    pub gamma_total: f64,
    pub lipschitz: f64,
    pub x_bound: f64,
    pub b: f64,
    pub rho: f64,
    pub lambda_reading: LambdaReading,
    pub lambda: f64,
    pub lambda_singular: f64,
    pub lambda_eigen: f64,
    pub algorithm_loss: f64,
    pub comparator_loss: f64,
    pub regret: f64,
    pub bound_optimization: f64,
    pub bound_regularization: f64,
    pub bound_approximation: f64,
    pub bound: f64,
    pub within_bound: bool,
    #[serde(skip)]
    pub per_round: Vec<RegretRound>,
}

impl RegretRecord {
    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn curve_csv(&self) -> String {
        let mut out = String::from("t,algorithm_cumulative,comparator_cumulative,regret\n");
        for r in &self.per_round {
            let _ = writeln!(out, "{},{:.16e},{:.16e},{:.16e}", r.t, r.algorithm, r.comparator, r.regret);
        }
        out
    }

    pub fn save_curve(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.curve_csv()).map_err(|e| Error::io(path, e))
    }
}

/// `2 L² X² Γ (1 + ln T) / ρ`, `(ρ/2) T B` and `e^{−λγ} L T / λ`.
pub fn regret_bound_terms(l: f64, x: f64, gamma_total: f64, rho: f64, rounds: usize, b: f64, lambda: f64, gamma: usize) -> [f64; 3] {
    let t = rounds as f64;
    [
        2.0 * l * l * x * x * gamma_total * (1.0 + t.ln()) / rho,
        0.5 * rho * t * b,
        (-lambda * gamma as f64).exp() * l * t / lambda,
    ]
}

/// Runs the online learner over `stream` and compares its cumulative loss
/// with the realizing predictor `(P_E w*) · (P_E)_{o,o}^† · x_o` built from
/// the ground truth.
pub fn regret_harness(stream: &[LabeledExample], truth: Option<&GroundTruth>, config: &RegretConfig) -> Result<RegretRecord> {
    let truth = truth.ok_or(Error::MissingGroundTruth("the comparator needs w* and the subspace"))?;
    let d = truth.subspace.dim();
    let rounds = stream.len();
    if let Some(found) = common_dim(stream.iter().map(|e| &e.input))? {
        if found != d {
            return Err(Error::DimensionMismatch { expected: d, found });
        }
    }
    let l = config.loss.lipschitz;

    let (lambda_singular, lambda_eigen) = if stream.is_empty() {
        (1.0, 1.0)
    } else {
        let xs: Vec<ObservedVector> = stream.iter().map(|e| e.input.clone()).collect();
        let rep = check_regularity(&xs, None, &truth.subspace, 1e-9)?;
        if !rep.kernel_ok {
            return Err(Error::param("stream is not regular for the ground-truth subspace"));
        }
        (rep.lambda, rep.eigen_lambda)
    };
    let lambda = match config.lambda_reading {
        LambdaReading::Eigen => lambda_eigen,
        LambdaReading::Singular => lambda_singular,
    };
    let gamma = match config.gamma {
        Some(g) if g >= 1 => g,
        Some(_) => return Err(Error::param("gamma must be at least 1")),
        None => ((rounds.max(1) as f64).ln() / lambda).ceil().max(1.0) as usize,
    };
    let dims = gamma_dims(d, gamma)?;
    let comparator = DensePredictorF0::realizing(&truth.wstar, truth.subspace.clone())?;
    let b = match config.b {
        Some(b) => b,
        None => {
            let w = comparator.weights();
            match improper_weights(w.as_slice(), &truth.subspace.complement(), gamma) {
                Ok(v) => v.norm_sq(),
                Err(Error::EmbeddingTooLarge { .. }) => dims.total * w.norm_squared(),
                Err(e) => return Err(e),
            }
        }
    };
    let x_bound = sup_norm(stream);
    let rho = match config.rho {
        Some(r) => r,
        None if rounds == 0 => 1.0,
        None => l * x_bound * dims.total.sqrt() / (b * rounds as f64).sqrt(),
    };

    let train_config = TrainConfig {
        gamma,
        rho: RhoChoice::Fixed { rho },
        loss: config.loss,
        schedule: Schedule::Pegasos,
        normalized: false,
        audit_sup_norm: None,
    };
    let (_, trace) = train_online(stream, &train_config)?;
    let comp_preds = stream
        .par_iter()
        .map(|e| comparator.predict(&e.input))
        .collect::<Result<Vec<f64>>>()?;

    let mut per_round = Vec::with_capacity(rounds);
    let mut comp_total = 0.0;
    for (k, (e, p)) in stream.iter().zip(&comp_preds).enumerate() {
        comp_total += config.loss.value(*p, e.label);
        let alg = trace.cumulative[k];
        per_round.push(RegretRound {
            t: k + 1,
            algorithm: alg,
            comparator: comp_total,
            regret: alg - comp_total,
        });
    }
    let algorithm_loss = trace.total_loss();
    let regret = algorithm_loss - comp_total;
    let terms = if rounds == 0 {
        [0.0; 3]
    } else {
        regret_bound_terms(l, x_bound, dims.total, rho, rounds, b, lambda, gamma)
    };
    let bound = terms.iter().sum::<f64>();
    Ok(RegretRecord {
        format_version: REPORT_FORMAT_VERSION,
        rounds,
        d,
        gamma,
        gamma_total: dims.total,
        lipschitz: l,
        x_bound,
        b,
        rho,
        lambda_reading: config.lambda_reading,
        lambda,
        lambda_singular,
        lambda_eigen,
        algorithm_loss,
        comparator_loss: comp_total,
        regret,
        bound_optimization: terms[0],
        bound_regularization: terms[1],
        bound_approximation: terms[2],
        bound,
        within_bound: regret <= bound,
        per_round,
    })
}

//! KARMA: online regularized subgradient descent in the missing-data kernel
//! space.
//!
//! The iterate is never materialized. It is kept as coefficients over the
//! examples seen so far, `v_t = Σ_i α_i φ_γ(x_i)`, and a prediction is the
//! kernel expansion `Σ_i α_i k_γ(x_i, x)`. Each round
//!
//! 1. predicts with the current iterate and suffers the loss,
//! 2. shrinks every coefficient by `1 − η_t ρ`,
//! 3. appends `−η_t ℓ'(prediction, y)` for the new example.
//!
//! Under the default step size `η_t = 1/(ρ t)` the shrink factors telescope:
//! after `t` rounds the coefficient of the example from round `i` is
//! `α_i^{(i)} · i / t`. The model stores `α_i^{(i)} · i` and divides on
//! demand, which also gives the running average of the iterates in closed
//! form through harmonic numbers. Other schedules fall back to rescaling
//! every coefficient each round.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dims::gamma_dims;
use crate::error::{Error, Result};
use crate::kernel::{gram_with, MissingDataKernel};
use crate::loss::{LossKind, LossSpec};
use crate::observed::{common_dim, LabeledExample, ObservedVector};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Step-size rule `t ↦ η_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Schedule {
    /// `η_t = 1/(ρ t)`.
    Pegasos,
    /// `η_t = c / t`.
    Scaled { c: f64 },
    /// `η_t = eta`.
    Constant { eta: f64 },
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule::Pegasos
    }
}

impl Schedule {
    pub fn eta(&self, t: u64, rho: f64) -> f64 {
        match *self {
            Schedule::Pegasos => 1.0 / (rho * t as f64),
            Schedule::Scaled { c } => c / t as f64,
            Schedule::Constant { eta } => eta,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Schedule::Pegasos => true,
            Schedule::Scaled { c } => c.is_finite() && c > 0.0,
            Schedule::Constant { eta } => eta.is_finite() && eta > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::param(format!("step sizes must be positive: {self:?}")))
        }
    }
}

/// How the regularization strength is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RhoChoice {
    Fixed { rho: f64 },
    /// `ρ = L X √Γ / √(B T)`, with `X = max_t ‖x_t‖_∞` and `T` the stream
    /// length, given a bound `B ≥ ‖v*‖²` on the comparator.
    Auto { b: f64 },
}

/// `ρ = L X √Γ / √(B T)`.
pub fn auto_rho(lipschitz: f64, x_bound: f64, gamma_total: f64, b: f64, rounds: usize) -> f64 {
    lipschitz * x_bound * gamma_total.sqrt() / (b * rounds as f64).sqrt()
}

/// `‖v_t‖ ≤ L R / ρ` for every iterate under `η_t = 1/(ρ t)`, where `R`
/// bounds `‖φ(x_t)‖`. With `R = X √Γ` and `ρ ≥ 1` this implies `‖v_t‖ ≤ L X √Γ`.
pub fn iterate_norm_bound(lipschitz: f64, feature_norm_bound: f64, rho: f64) -> f64 {
    lipschitz * feature_norm_bound / rho
}

/// Largest `‖x‖_∞` over a stream.
pub fn sup_norm(stream: &[LabeledExample]) -> f64 {
    stream.iter().map(|e| e.input.max_abs()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub gamma: usize,
    pub rho: RhoChoice,
    pub loss: LossSpec,
    #[serde(default)]
    pub schedule: Schedule,
    #[serde(default)]
    pub normalized: bool,
    /// When set, every round asserts `‖v_t‖ ≤ L X √Γ / ρ` with this `X`
    /// (an upper bound on `‖x_t‖_∞`) and aborts training on violation.
    #[serde(default)]
    pub audit_sup_norm: Option<f64>,
}

impl TrainConfig {
    pub fn new(gamma: usize, rho: f64, loss: LossSpec) -> Self {
        Self {
            gamma,
            rho: RhoChoice::Fixed { rho },
            loss,
            schedule: Schedule::Pegasos,
            normalized: false,
            audit_sup_norm: None,
        }
    }

    pub fn kernel(&self) -> Result<MissingDataKernel> {
        if self.normalized {
            MissingDataKernel::normalized(self.gamma)
        } else {
            MissingDataKernel::new(self.gamma)
        }
    }

    /// Resolves `ρ` for a stream of the given contents.
    pub fn resolve_rho(&self, stream: &[LabeledExample]) -> Result<f64> {
        let rho = match self.rho {
            RhoChoice::Fixed { rho } => rho,
            RhoChoice::Auto { b } => {
                if !(b > 0.0) {
                    return Err(Error::param("auto rho needs B > 0"));
                }
                let d = stream.first().map(|e| e.dim()).ok_or(Error::Empty("stream"))?;
                let total = if self.normalized {
                    1.0
                } else {
                    gamma_dims(d, self.gamma)?.total
                };
                auto_rho(self.loss.lipschitz, sup_norm(stream), total, b, stream.len())
            }
        };
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::param(format!("rho must be positive and finite, got {rho}")));
        }
        Ok(rho)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Coefficients {
    /// Only valid under `η_t = 1/(ρ t)`. `scaled[i] = α_i^{(i)} · i` and
    /// `entry_harmonic[i] = H_{i−1}` for the round `i` that added the
    /// example; `harmonic = H_{t−1}` after `t` rounds.
    Telescoped {
        scaled: Vec<f64>,
        entry_harmonic: Vec<f64>,
        harmonic: f64,
    },
    /// Current coefficients and the running mean of all past iterates.
    Explicit { alpha: Vec<f64>, avg: Vec<f64> },
}

/// Loss and prediction of one round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundOutcome {
    pub prediction: f64,
    pub loss: f64,
    pub subgradient: f64,
}

/// Per-round record of an online run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainTrace {
    pub predictions: Vec<f64>,
    pub losses: Vec<f64>,
    pub cumulative: Vec<f64>,
}

impl TrainTrace {
    fn push(&mut self, outcome: &RoundOutcome) {
        let prev = self.cumulative.last().copied().unwrap_or(0.0);
        self.predictions.push(outcome.prediction);
        self.losses.push(outcome.loss);
        self.cumulative.push(prev + outcome.loss);
    }

    pub fn len(&self) -> usize {
        self.losses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.losses.is_empty()
    }

    pub fn total_loss(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }
}

/// Learner state: support examples with their coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct KarmaModel {
    dim: Option<usize>,
    kernel: MissingDataKernel,
    rho: f64,
    loss: LossSpec,
    schedule: Schedule,
    rounds: u64,
    support: Vec<ObservedVector>,
    coeffs: Coefficients,
    norm_sq: f64,
    use_average: bool,
    audit_bound: Option<f64>,
}

impl KarmaModel {
    pub fn new(kernel: MissingDataKernel, rho: f64, loss: LossSpec, schedule: Schedule) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::param(format!("rho must be positive and finite, got {rho}")));
        }
        if kernel.gamma == 0 {
            return Err(Error::param("gamma must be at least 1"));
        }
        schedule.validate()?;
        let coeffs = match schedule {
            Schedule::Pegasos => Coefficients::Telescoped {
                scaled: Vec::new(),
                entry_harmonic: Vec::new(),
                harmonic: 0.0,
            },
            _ => Coefficients::Explicit {
                alpha: Vec::new(),
                avg: Vec::new(),
            },
        };
        Ok(Self {
            dim: None,
            kernel,
            rho,
            loss,
            schedule,
            rounds: 0,
            support: Vec::new(),
            coeffs,
            norm_sq: 0.0,
            use_average: false,
            audit_bound: None,
        })
    }

    pub fn from_config(config: &TrainConfig, rho: f64) -> Result<Self> {
        Self::new(config.kernel()?, rho, config.loss, config.schedule)
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn gamma(&self) -> usize {
        self.kernel.gamma
    }

    pub fn kernel(&self) -> &MissingDataKernel {
        &self.kernel
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn loss(&self) -> LossSpec {
        self.loss
    }

    pub fn schedule(&self) -> Schedule {
        self.schedule
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    pub fn support(&self) -> &[ObservedVector] {
        &self.support
    }

    pub fn uses_average(&self) -> bool {
        self.use_average
    }

    /// Selects which iterate [`KarmaModel::predict_default`] uses.
    pub fn set_use_average(&mut self, use_average: bool) {
        self.use_average = use_average;
    }

    /// Coefficient of support vector `i` in the current iterate `v_{t+1}`.
    pub fn alpha(&self, i: usize) -> f64 {
        match &self.coeffs {
            Coefficients::Telescoped { scaled, .. } => scaled[i] / self.rounds as f64,
            Coefficients::Explicit { alpha, .. } => alpha[i],
        }
    }

    /// Coefficient of support vector `i` in `(1/T) Σ_{t=1}^T v_t`.
    pub fn avg_alpha(&self, i: usize) -> f64 {
        match &self.coeffs {
            Coefficients::Telescoped {
                scaled,
                entry_harmonic,
                harmonic,
            } => scaled[i] * (harmonic - entry_harmonic[i]) / self.rounds as f64,
            Coefficients::Explicit { avg, .. } => avg[i],
        }
    }

    pub fn alphas(&self) -> Vec<f64> {
        (0..self.support.len()).map(|i| self.alpha(i)).collect()
    }

    pub fn avg_alphas(&self) -> Vec<f64> {
        (0..self.support.len()).map(|i| self.avg_alpha(i)).collect()
    }

    pub fn coefficients(&self, use_average: bool) -> Vec<f64> {
        if use_average {
            self.avg_alphas()
        } else {
            self.alphas()
        }
    }

    fn check_input(&self, x: &ObservedVector) -> Result<()> {
        match self.dim {
            Some(d) if d != x.dim() => Err(Error::DimensionMismatch {
                expected: d,
                found: x.dim(),
            }),
            _ => Ok(()),
        }
    }

    fn expansion(&self, x: &ObservedVector, coefficient: impl Fn(usize) -> f64) -> f64 {
        self.support
            .iter()
            .enumerate()
            .map(|(i, s)| coefficient(i) * self.kernel.eval_unchecked(s, x))
            .sum()
    }

    /// `v · φ_γ(x)` for the current iterate, or for the averaged iterate
    /// when `use_average` is set. An empty model predicts 0.
    pub fn predict(&self, x: &ObservedVector, use_average: bool) -> Result<f64> {
        self.check_input(x)?;
        if self.support.is_empty() {
            return Ok(0.0);
        }
        Ok(if use_average {
            self.expansion(x, |i| self.avg_alpha(i))
        } else {
            self.expansion(x, |i| self.alpha(i))
        })
    }

    pub fn predict_default(&self, x: &ObservedVector) -> Result<f64> {
        self.predict(x, self.use_average)
    }

    /// Predictions for a batch of inputs, computed in parallel.
    pub fn predict_batch(&self, xs: &[ObservedVector], use_average: bool) -> Result<Vec<f64>> {
        xs.par_iter().map(|x| self.predict(x, use_average)).collect()
    }

    /// `‖v_{t+1}‖²`, tracked incrementally from the predictions.
    pub fn tracked_norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// `cᵀ G c` over the support Gram matrix, with `c` the current or the
    /// averaged coefficients. Quadratic in the support size.
    pub fn norm_sq(&self, use_average: bool) -> Result<f64> {
        if self.support.is_empty() {
            return Ok(0.0);
        }
        let g = gram_with(&self.support, &self.kernel)?;
        let c = nalgebra::DVector::from_vec(self.coefficients(use_average));
        Ok(c.dot(&(g * &c)))
    }

    /// Enables the per-round check `‖v_t‖ ≤ L X √Γ / ρ` given `X ≥ ‖x_t‖_∞`.
    /// Only meaningful under the default schedule.
    pub fn enable_norm_audit(&mut self, sup_norm: f64, d: usize) -> Result<()> {
        let feature = if self.kernel.normalized {
            1.0
        } else {
            sup_norm * gamma_dims(d, self.kernel.gamma)?.total.sqrt()
        };
        self.audit_bound = Some(iterate_norm_bound(self.loss.lipschitz, feature, self.rho));
        Ok(())
    }

    /// One round: predict, suffer the loss, update.
    pub fn step(&mut self, example: &LabeledExample) -> Result<RoundOutcome> {
        let x = &example.input;
        self.check_input(x)?;
        let t = self.rounds + 1;
        let prediction = self.predict(x, false)?;
        if !prediction.is_finite() {
            return Err(Error::NonFinite {
                what: "prediction",
                round: t,
            });
        }
        let loss = self.loss.value(prediction, example.label);
        let subgradient = self.loss.subgradient(prediction, example.label);
        if !subgradient.is_finite() || !loss.is_finite() {
            return Err(Error::NonFinite {
                what: "subgradient",
                round: t,
            });
        }
        let eta = self.schedule.eta(t, self.rho);
        let shrink = 1.0 - eta * self.rho;
        let new_alpha = -eta * subgradient;

        // ‖a v + b φ‖² = a²‖v‖² + 2ab (v·φ) + b² k(x,x), and v·φ is the prediction
        let kxx = self.kernel.self_similarity(x);
        self.norm_sq = (shrink * shrink * self.norm_sq
            + 2.0 * shrink * new_alpha * prediction
            + new_alpha * new_alpha * kxx)
            .max(0.0);

        let keep = new_alpha != 0.0;
        match &mut self.coeffs {
            Coefficients::Telescoped {
                scaled,
                entry_harmonic,
                harmonic,
            } => {
                if t >= 2 {
                    *harmonic += 1.0 / (t - 1) as f64;
                }
                if keep {
                    scaled.push(new_alpha * t as f64);
                    entry_harmonic.push(*harmonic);
                }
            }
            Coefficients::Explicit { alpha, avg } => {
                let tf = t as f64;
                for (a, m) in alpha.iter_mut().zip(avg.iter_mut()) {
                    *m += (*a - *m) / tf;
                    *a *= shrink;
                }
                if keep {
                    alpha.push(new_alpha);
                    avg.push(0.0);
                }
            }
        }
        if keep {
            self.support.push(x.clone());
        }
        self.dim = Some(x.dim());
        self.rounds = t;

        if let Some(bound) = self.audit_bound {
            let norm = self.norm_sq.sqrt();
            if norm > bound * (1.0 + 1e-9) + 1e-12 {
                return Err(Error::NormBoundViolated {
                    round: t,
                    norm,
                    bound,
                });
            }
        }
        Ok(RoundOutcome {
            prediction,
            loss,
            subgradient,
        })
    }

    /// `½‖v‖² + (C/m) Σ ℓ(v·φ(x_i), y_i)` over `sample`.
    pub fn regularized_objective(&self, sample: &[LabeledExample], c: f64, use_average: bool) -> Result<f64> {
        if sample.is_empty() {
            return Err(Error::Empty("sample"));
        }
        let inputs: Vec<ObservedVector> = sample.iter().map(|e| e.input.clone()).collect();
        let preds = self.predict_batch(&inputs, use_average)?;
        let mean_loss: f64 = preds
            .iter()
            .zip(sample)
            .map(|(&p, e)| self.loss.value(p, e.label))
            .sum::<f64>()
            / sample.len() as f64;
        Ok(0.5 * self.norm_sq(use_average)? + c * mean_loss)
    }
}

/// Runs one pass of the online algorithm over `stream`.
pub fn train_online(stream: &[LabeledExample], config: &TrainConfig) -> Result<(KarmaModel, TrainTrace)> {
    let kernel = config.kernel()?;
    if stream.is_empty() {
        let rho = match config.rho {
            RhoChoice::Fixed { rho } => rho,
            RhoChoice::Auto { .. } => 1.0,
        };
        return Ok((KarmaModel::new(kernel, rho, config.loss, config.schedule)?, TrainTrace::default()));
    }
    let d = common_dim(stream.iter().map(|e| &e.input))?.expect("non-empty");
    let rho = config.resolve_rho(stream)?;
    let mut model = KarmaModel::new(kernel, rho, config.loss, config.schedule)?;
    if let Some(x) = config.audit_sup_norm {
        model.enable_norm_audit(x, d)?;
    }
    let mut trace = TrainTrace::default();
    for example in stream {
        let outcome = model.step(example)?;
        trace.push(&outcome);
    }
    Ok((model, trace))
}

/// Visiting order for `rounds` rounds over a sample of size `m`: the first
/// epoch in the given order, every later epoch a fresh seeded shuffle.
pub fn batch_order(m: usize, rounds: usize, seed: u64) -> Vec<usize> {
    let mut order = Vec::with_capacity(rounds);
    if m == 0 {
        return order;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut epoch: Vec<usize> = (0..m).collect();
    let mut first = true;
    while order.len() < rounds {
        if !first {
            epoch.shuffle(&mut rng);
        }
        first = false;
        let take = (rounds - order.len()).min(m);
        order.extend_from_slice(&epoch[..take]);
    }
    order
}

/// Runs `rounds` rounds over `sample` (see [`batch_order`]) and returns the
/// model set to predict with the averaged iterate.
pub fn train_batch(sample: &[LabeledExample], rounds: usize, config: &TrainConfig, seed: u64) -> Result<KarmaModel> {
    Ok(train_batch_traced(sample, rounds, config, seed)?.0)
}

pub fn train_batch_traced(
    sample: &[LabeledExample],
    rounds: usize,
    config: &TrainConfig,
    seed: u64,
) -> Result<(KarmaModel, TrainTrace)> {
    if sample.is_empty() {
        return Err(Error::Empty("training sample"));
    }
    if rounds == 0 {
        return Err(Error::param("batch training needs at least one round"));
    }
    let stream: Vec<LabeledExample> = batch_order(sample.len(), rounds, seed)
        .into_iter()
        .map(|i| sample[i].clone())
        .collect();
    let (mut model, trace) = train_online(&stream, config)?;
    model.set_use_average(true);
    Ok((model, trace))
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn schedule_text(s: &Schedule) -> String {
    match *s {
        Schedule::Pegasos => "pegasos".into(),
        Schedule::Scaled { c } => format!("scaled {}", fmt_f64(c)),
        Schedule::Constant { eta } => format!("constant {}", fmt_f64(eta)),
    }
}

impl KarmaModel {
    /// Line-oriented text serialization. Reals are written with 17
    /// significant digits, which round-trips every `f64`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "format_version {MODEL_FORMAT_VERSION}");
        let _ = writeln!(out, "d {}", self.dim.unwrap_or(0));
        let _ = writeln!(out, "gamma {}", self.kernel.gamma);
        let _ = writeln!(out, "kernel {}", if self.kernel.normalized { "normalized" } else { "raw" });
        let _ = writeln!(out, "rho {}", fmt_f64(self.rho));
        let _ = writeln!(out, "loss {}", self.loss.kind);
        let _ = writeln!(out, "lipschitz {}", fmt_f64(self.loss.lipschitz));
        let _ = writeln!(out, "schedule {}", schedule_text(&self.schedule));
        let _ = writeln!(out, "rounds {}", self.rounds);
        let _ = writeln!(out, "mode {}", if self.use_average { "average" } else { "last" });
        let _ = writeln!(out, "support {}", self.support.len());
        for (i, s) in self.support.iter().enumerate() {
            let idx = if s.is_empty() {
                "-".to_string()
            } else {
                s.indices().iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
            };
            let vals = if s.is_empty() {
                "-".to_string()
            } else {
                s.values().iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>().join(",")
            };
            let _ = writeln!(
                out,
                "sv {idx} {vals} {} {}",
                fmt_f64(self.alpha(i)),
                fmt_f64(self.avg_alpha(i))
            );
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut parser = ModelParser::new(text);
        let version: u32 = parser.field("format_version")?;
        if version != MODEL_FORMAT_VERSION {
            return Err(parser.err(format!("unsupported format_version {version}")));
        }
        let d: usize = parser.field("d")?;
        let gamma: usize = parser.field("gamma")?;
        let kernel = match parser.field::<String>("kernel")?.as_str() {
            "raw" => MissingDataKernel::new(gamma)?,
            "normalized" => MissingDataKernel::normalized(gamma)?,
            other => return Err(parser.err(format!("unknown kernel {other:?}"))),
        };
        let rho: f64 = parser.field("rho")?;
        let kind: LossKind = parser.field::<String>("loss")?.parse()?;
        let lipschitz: f64 = parser.field("lipschitz")?;
        let loss = LossSpec { kind, lipschitz };
        let schedule_line = parser.field::<String>("schedule")?;
        let mut parts = schedule_line.split_whitespace();
        let schedule = match (parts.next(), parts.next()) {
            (Some("pegasos"), None) => Schedule::Pegasos,
            (Some("scaled"), Some(c)) => Schedule::Scaled { c: parser.parse(c)? },
            (Some("constant"), Some(eta)) => Schedule::Constant { eta: parser.parse(eta)? },
            _ => return Err(parser.err(format!("bad schedule {schedule_line:?}"))),
        };
        let rounds: u64 = parser.field("rounds")?;
        let use_average = match parser.field::<String>("mode")?.as_str() {
            "average" => true,
            "last" => false,
            other => return Err(parser.err(format!("unknown mode {other:?}"))),
        };
        let n: usize = parser.field("support")?;
        let mut support = Vec::with_capacity(n);
        let mut alpha = Vec::with_capacity(n);
        let mut avg = Vec::with_capacity(n);
        for _ in 0..n {
            let line = parser.field::<String>("sv")?;
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != 4 {
                return Err(parser.err("support line needs 4 fields".into()));
            }
            let (idx, vals) = if tokens[0] == "-" {
                (Vec::new(), Vec::new())
            } else {
                let idx = tokens[0].split(',').map(|t| parser.parse(t)).collect::<Result<Vec<usize>>>()?;
                let vals = tokens[1].split(',').map(|t| parser.parse(t)).collect::<Result<Vec<f64>>>()?;
                (idx, vals)
            };
            support.push(ObservedVector::new(d, idx, vals).map_err(|e| parser.err(e.to_string()))?);
            alpha.push(parser.parse(tokens[2])?);
            avg.push(parser.parse(tokens[3])?);
        }
        if let Some(extra) = parser.next_line() {
            return Err(parser.err(format!("trailing content {extra:?}")));
        }
        let mut model = KarmaModel::new(kernel, rho, loss, schedule)?;
        model.dim = (d > 0).then_some(d);
        model.rounds = rounds;
        model.support = support;
        model.coeffs = Coefficients::Explicit { alpha, avg };
        model.use_average = use_average;
        model.norm_sq = model.norm_sq(false)?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

struct ModelParser<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    line_no: usize,
}

impl<'a> ModelParser<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            lines: text.lines().enumerate(),
            line_no: 0,
        }
    }

    fn err(&self, message: String) -> Error {
        Error::Format {
            kind: "model",
            line: self.line_no,
            message,
        }
    }

    fn next_line(&mut self) -> Option<&'a str> {
        for (i, line) in self.lines.by_ref() {
            self.line_no = i + 1;
            let trimmed = line.trim();
            if !trimmed.is_empty() && !trimmed.starts_with('#') {
                return Some(trimmed);
            }
        }
        None
    }

    fn parse<T: std::str::FromStr>(&self, token: &str) -> Result<T> {
        token
            .parse()
            .map_err(|_| self.err(format!("cannot parse {token:?}")))
    }

    fn field<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let line = self
            .next_line()
            .ok_or_else(|| self.err(format!("missing field {key}")))?;
        let rest = line
            .strip_prefix(key)
            .filter(|r| r.starts_with(' '))
            .ok_or_else(|| self.err(format!("expected {key}, found {line:?}")))?;
        self.parse(rest.trim())
    }
}

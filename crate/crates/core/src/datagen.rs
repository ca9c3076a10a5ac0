//! Synthetic low-rank data with missing attributes, the small four-column
//! fixture used in demos, and CSV input/output.
//!
//! [`generate`] samples a random `r`-dimensional subspace `E`, draws points
//! from the unit ball of `E`, masks them, and keeps only examples whose
//! observation pattern passes the regularity check at the requested `λ₀`.
//! The accepted set is then rescaled so that `max_i ‖P_{o_i} x_i‖ = 1`.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observed::{LabeledExample, ObservedVector};
use crate::reference::SubspaceSpec;
use crate::regularity::pattern_is_regular;

pub const GROUND_TRUTH_FORMAT_VERSION: u32 = 1;

/// Which coordinates of a sample are revealed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MaskSpec {
    /// Each coordinate is kept independently with probability `p`.
    Keep { p: f64 },
    /// One of the listed patterns, uniformly at random.
    Patterns { patterns: Vec<Vec<usize>> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LabelRule {
    /// `y = sign(w*·x)`, rejecting points with `|w*·x| < margin`.
    Margin,
    /// `y = w*·x + noise · N(0, 1)`.
    Regression { noise: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub d: usize,
    pub rank: usize,
    pub lambda0: f64,
    pub n: usize,
    pub mask: MaskSpec,
    pub margin: f64,
    pub labels: LabelRule,
    pub seed: u64,
}

impl GeneratorConfig {
    pub fn new(d: usize, rank: usize, lambda0: f64, n: usize, seed: u64) -> Self {
        Self {
            d,
            rank,
            lambda0,
            n,
            mask: MaskSpec::Keep { p: 0.6 },
            margin: 0.0,
            labels: LabelRule::Margin,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::param("d must be at least 1"));
        }
        if self.rank == 0 || self.rank > self.d {
            return Err(Error::param(format!(
                "rank must satisfy 1 <= r <= d, got r = {}, d = {}",
                self.rank, self.d
            )));
        }
        if !(self.lambda0 > 0.0 && self.lambda0 <= 1.0) {
            return Err(Error::param(format!("lambda0 must lie in (0, 1], got {}", self.lambda0)));
        }
        if self.n == 0 {
            return Err(Error::param("n must be at least 1"));
        }
        if !(self.margin >= 0.0 && self.margin < 1.0) {
            return Err(Error::param(format!("margin must lie in [0, 1), got {}", self.margin)));
        }
        match &self.mask {
            MaskSpec::Keep { p } if !(*p > 0.0 && *p <= 1.0) => {
                return Err(Error::param(format!("keep probability must lie in (0, 1], got {p}")))
            }
            MaskSpec::Patterns { patterns } => {
                if patterns.is_empty() {
                    return Err(Error::param("pattern list is empty"));
                }
                for p in patterns {
                    if p.windows(2).any(|w| w[0] >= w[1]) || p.iter().any(|&i| i >= self.d) {
                        return Err(Error::param(format!(
                            "pattern {p:?} must be strictly increasing and below d = {}",
                            self.d
                        )));
                    }
                }
            }
            _ => {}
        }
        if let LabelRule::Regression { noise } = self.labels {
            if !(noise >= 0.0 && noise.is_finite()) {
                return Err(Error::param(format!("noise must be finite and >= 0, got {noise}")));
            }
        }
        Ok(())
    }
}

/// What the generator knows and the learner does not.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub subspace: SubspaceSpec,
    /// Unit vector in `E`.
    pub wstar: Vec<f64>,
    /// The unmasked vectors after rescaling, in dataset order.
    pub full_vectors: Vec<Vec<f64>>,
    /// Factor applied to every sampled point.
    pub scale: f64,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
struct GroundTruthFile {
    format_version: u32,
    d: usize,
    rank: usize,
    seed: u64,
    scale: f64,
    wstar: Vec<f64>,
    basis: Vec<Vec<f64>>,
    full_vectors: Vec<Vec<f64>>,
}

impl GroundTruth {
    pub fn to_toml(&self) -> Result<String> {
        let file = GroundTruthFile {
            format_version: GROUND_TRUTH_FORMAT_VERSION,
            d: self.subspace.dim(),
            rank: self.subspace.rank(),
            seed: self.seed,
            scale: self.scale,
            wstar: self.wstar.clone(),
            basis: self.subspace.columns(),
            full_vectors: self.full_vectors.clone(),
        };
        Ok(toml::to_string(&file)?)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let file: GroundTruthFile = toml::from_str(text)?;
        if file.format_version != GROUND_TRUTH_FORMAT_VERSION {
            return Err(Error::Format {
                kind: "ground truth",
                line: 1,
                message: format!("unsupported format_version {}", file.format_version),
            });
        }
        if file.basis.len() != file.rank || file.wstar.len() != file.d {
            return Err(Error::Format {
                kind: "ground truth",
                line: 0,
                message: "basis or wstar does not match the declared d and rank".into(),
            });
        }
        if let Some(v) = file.full_vectors.iter().find(|v| v.len() != file.d) {
            return Err(Error::DimensionMismatch {
                expected: file.d,
                found: v.len(),
            });
        }
        for c in &file.basis {
            if c.len() != file.d {
                return Err(Error::DimensionMismatch {
                    expected: file.d,
                    found: c.len(),
                });
            }
        }
        let basis = DMatrix::from_fn(file.d, file.rank, |i, j| file.basis[j][i]);
        Ok(Self {
            subspace: SubspaceSpec::from_orthonormal(basis)?,
            wstar: file.wstar,
            full_vectors: file.full_vectors,
            scale: file.scale,
            seed: file.seed,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    /// `w* · x` for every full vector.
    pub fn clean_targets(&self) -> Vec<f64> {
        self.full_vectors
            .iter()
            .map(|x| x.iter().zip(&self.wstar).map(|(a, b)| a * b).sum())
            .collect()
    }
}

fn unit_ball_point<R: Rng>(r: usize, rng: &mut R) -> DVector<f64> {
    loop {
        let g = DVector::from_fn(r, |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = g.norm();
        if n > 0.0 {
            let radius = rng.random::<f64>().powf(1.0 / r as f64);
            return g * (radius / n);
        }
    }
}

fn draw_pattern<R: Rng>(mask: &MaskSpec, d: usize, rng: &mut R) -> Vec<usize> {
    match mask {
        MaskSpec::Keep { p } => (0..d).filter(|_| rng.random::<f64>() < *p).collect(),
        MaskSpec::Patterns { patterns } => patterns[rng.random_range(0..patterns.len())].clone(),
    }
}

/// Samples a λ₀-regular dataset with ground truth. Deterministic in
/// `config.seed`.
pub fn generate(config: &GeneratorConfig) -> Result<(Vec<LabeledExample>, GroundTruth)> {
    config.validate()?;
    let (d, r) = (config.d, config.rank);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let subspace = SubspaceSpec::random(d, r, &mut rng)?;
    let basis = subspace.basis().clone();
    let wdir = unit_ball_point(r, &mut rng);
    let wstar = &basis * (&wdir / wdir.norm());

    let budget = 10_000usize.max(100 * config.n);
    let mut verdicts: HashMap<Vec<usize>, bool> = HashMap::new();
    let mut accepted: Vec<(Vec<f64>, Vec<usize>)> = Vec::with_capacity(config.n);
    let mut attempts = 0;
    while accepted.len() < config.n {
        if attempts >= budget {
            return Err(Error::GeneratorExhausted {
                attempts,
                accepted: accepted.len(),
                wanted: config.n,
            });
        }
        attempts += 1;
        let x = &basis * unit_ball_point(r, &mut rng);
        let pattern = draw_pattern(&config.mask, d, &mut rng);
        let regular = match verdicts.get(&pattern) {
            Some(&v) => v,
            None => {
                let v = pattern_is_regular(&pattern, &subspace, config.lambda0)?;
                verdicts.insert(pattern.clone(), v);
                v
            }
        };
        if !regular {
            continue;
        }
        // rescaling only enlarges |w*·x|, so the margin survives it
        if matches!(config.labels, LabelRule::Margin) && wstar.dot(&x).abs() < config.margin.max(f64::MIN_POSITIVE) {
            continue;
        }
        accepted.push((x.iter().copied().collect(), pattern));
    }

    let max_norm = accepted
        .iter()
        .map(|(x, p)| p.iter().map(|&i| x[i] * x[i]).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let scale = if max_norm > 0.0 { 1.0 / max_norm } else { 1.0 };

    let wstar: Vec<f64> = wstar.iter().copied().collect();
    let mut examples = Vec::with_capacity(config.n);
    let mut full_vectors = Vec::with_capacity(config.n);
    for (x, pattern) in accepted {
        let x: Vec<f64> = x.iter().map(|v| v * scale).collect();
        let clean: f64 = x.iter().zip(&wstar).map(|(a, b)| a * b).sum();
        let label = match config.labels {
            LabelRule::Margin => clean.signum(),
            LabelRule::Regression { noise } => clean + noise * rng.sample::<f64, _>(StandardNormal),
        };
        examples.push(LabeledExample::new(ObservedVector::from_pattern(&x, &pattern)?, label)?);
        full_vectors.push(x);
    }
    let truth = GroundTruth {
        subspace,
        wstar,
        full_vectors,
        scale,
        seed: config.seed,
    };
    Ok((examples, truth))
}

/// Three partially observed instance types on four columns:
/// `[1, *, 1, *]` labeled `+1`, `[*, −1, *, −1]` labeled `−1` and the fully
/// observed `[1, −1, 1, −1]` labeled `+1`, all scaled by `1/2`. The types are
/// interleaved, `per_type` copies each.
pub fn matrix_m_fixture(per_type: usize) -> Vec<LabeledExample> {
    const SCALE: f64 = 0.5;
    let types = [
        (vec![0, 2], vec![SCALE, SCALE], 1.0),
        (vec![1, 3], vec![-SCALE, -SCALE], -1.0),
        (vec![0, 1, 2, 3], vec![SCALE, -SCALE, SCALE, -SCALE], 1.0),
    ];
    let mut out = Vec::with_capacity(3 * per_type);
    for _ in 0..per_type {
        for (idx, vals, y) in &types {
            let x = ObservedVector::new(4, idx.clone(), vals.clone()).expect("fixture is valid");
            out.push(LabeledExample::new(x, *y).expect("finite label"));
        }
    }
    out
}

/// CSV dialect for [`load_csv`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvOptions {
    /// Cell contents meaning "not observed". Surrounding whitespace is
    /// ignored.
    pub missing: Vec<String>,
    pub label_column: String,
    /// Divide every value by `max_i ‖P_o x_i‖` when that exceeds 1.
    pub rescale: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            missing: vec![String::new(), "?".into()],
            label_column: "label".into(),
            rescale: false,
        }
    }
}

/// A loaded CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub d: usize,
    pub feature_names: Vec<String>,
    pub examples: Vec<LabeledExample>,
    /// Factor applied by rescaling, 1 when none was needed or requested.
    pub scale: f64,
}

fn csv_error(path: &Path, row: usize, column: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        row,
        column: column.into(),
        message: message.into(),
    }
}

/// Reads a header-first CSV. Every column except the label column is a
/// feature, in file order. Rows are numbered from 1 after the header.
pub fn load_csv(path: &Path, options: &CsvOptions) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, path, options)
}

pub fn read_csv<R: std::io::Read>(reader: R, path: &Path, options: &CsvOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| csv_error(path, 0, "", e.to_string()))?
        .clone();
    let label_at = headers
        .iter()
        .position(|h| h.trim() == options.label_column)
        .ok_or_else(|| csv_error(path, 0, &options.label_column, "label column not found"))?;
    let feature_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != label_at)
        .map(|(_, h)| h.trim().to_string())
        .collect();
    let d = feature_names.len();
    if d == 0 {
        return Err(csv_error(path, 0, "", "no feature columns"));
    }
    let is_missing = |cell: &str| options.missing.iter().any(|m| m.trim() == cell);

    let mut examples = Vec::new();
    for (k, record) in rdr.records().enumerate() {
        let row = k + 1;
        let record = record.map_err(|e| csv_error(path, row, "", e.to_string()))?;
        let mut indices = Vec::new();
        let mut values = Vec::new();
        let mut label = None;
        for (i, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            if i == label_at {
                if is_missing(cell) {
                    return Err(csv_error(path, row, &options.label_column, "missing label"));
                }
                label = Some(cell.parse::<f64>().map_err(|_| {
                    csv_error(path, row, &options.label_column, format!("cannot parse {cell:?}"))
                })?);
                continue;
            }
            let feature = if i < label_at { i } else { i - 1 };
            if is_missing(cell) {
                continue;
            }
            let v = cell
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| csv_error(path, row, &feature_names[feature], format!("cannot parse {cell:?}")))?;
            indices.push(feature);
            values.push(v);
        }
        let label = label.ok_or_else(|| csv_error(path, row, &options.label_column, "missing label"))?;
        let x = ObservedVector::new(d, indices, values).map_err(|e| csv_error(path, row, "", e.to_string()))?;
        examples.push(LabeledExample::new(x, label).map_err(|e| csv_error(path, row, &options.label_column, e.to_string()))?);
    }

    let mut scale = 1.0;
    if options.rescale {
        let max = examples.iter().map(|e| e.input.observed_norm()).fold(0.0, f64::max);
        if max > 1.0 {
            scale = 1.0 / max;
            for e in &mut examples {
                e.input = e.input.scaled(scale);
            }
        }
    }
    Ok(Dataset {
        d,
        feature_names,
        examples,
        scale,
    })
}

/// Writes `x0, …, x{d−1}, label`, with `?` for missing cells and the
/// shortest decimal form that parses back to the same `f64`.
pub fn write_csv<W: std::io::Write>(writer: W, d: usize, examples: &[LabeledExample]) -> Result<()> {
    let to_err = |e: csv::Error| csv_error(Path::new("<output>"), 0, "", e.to_string());
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (0..d).map(|i| format!("x{i}")).collect();
    header.push("label".into());
    w.write_record(&header).map_err(to_err)?;
    for e in examples {
        e.input.check_dim(d)?;
        let mut row = vec!["?".to_string(); d + 1];
        for (i, v) in e.input.iter() {
            row[i] = format!("{v}");
        }
        row[d] = format!("{}", e.label);
        w.write_record(&row).map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::io(PathBuf::from("<output>"), e))?;
    Ok(())
}

pub fn save_csv(path: &Path, d: usize, examples: &[LabeledExample]) -> Result<()> {
    let mut buf = Vec::new();
    write_csv(&mut buf, d, examples)?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

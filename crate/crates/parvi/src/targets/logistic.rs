//! Bayesian logistic regression: Gaussian prior N(0, alpha*I) on the weights,
//! labels in {-1, +1}, and optional minibatch stochastic gradients.

use std::path::Path;
use std::sync::Mutex;

use ndarray::{Array1, Array2, ArrayView1};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numeric::{sigmoid, softplus};

/// Feature rows plus {-1, +1} labels, optionally standardized per column.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    /// T x p feature matrix.
    pub features: Array2<f64>,
    /// Length-T labels, every entry -1.0 or +1.0.
    pub labels: Array1<f64>,
    pub standardized: bool,
    /// Column statistics of the split they were fitted on (the training
    /// split); present iff standardized.
    pub column_means: Option<Array1<f64>>,
    pub column_stds: Option<Array1<f64>>,
}

impl LabeledDataset {
    pub fn new(features: Array2<f64>, labels: Array1<f64>) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::mismatch(format!(
                "{} feature rows but {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("features must be finite"));
        }
        if let Some(bad) = labels.iter().find(|&&y| y != 1.0 && y != -1.0) {
            return Err(Error::invalid(format!(
                "labels must be -1 or +1, got {bad}"
            )));
        }
        Ok(LabeledDataset {
            features,
            labels,
            standardized: false,
            column_means: None,
            column_stds: None,
        })
    }

    pub fn len(&self) -> usize {
        self.features.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_features(&self) -> usize {
        self.features.ncols()
    }
}

/// Negative log-posterior over weights; dim = number of feature columns.
/// With a batch size configured, `grad` is a minibatch estimator that draws
/// a fresh uniform batch (without replacement) per call; the potential is
/// always the deterministic full-data value.
#[derive(Debug)]
pub struct LogisticPosterior {
    data: LabeledDataset,
    alpha: f64,
    batch_size: Option<usize>,
    // Consumed only by minibatch draws; behind a lock so the posterior can be
    // shared across threads, though stochastic calls are expected to be
    // serialized by the solver loop for reproducibility.
    rng: Mutex<ChaCha8Rng>,
}

impl LogisticPosterior {
    /// `batch_size: None` means full-batch (deterministic) gradients.
    pub fn new(
        data: LabeledDataset,
        alpha: f64,
        batch_size: Option<usize>,
        seed: u64,
    ) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::invalid(
                "logistic posterior needs a non-empty dataset",
            ));
        }
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::invalid(format!(
                "prior variance alpha must be positive, got {alpha}"
            )));
        }
        if let Some(b) = batch_size {
            if b == 0 || b > data.len() {
                return Err(Error::invalid(format!(
                    "batch size {b} must lie in 1..={}",
                    data.len()
                )));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(2);
        Ok(LogisticPosterior {
            data,
            alpha,
            batch_size,
            rng: Mutex::new(rng),
        })
    }

    pub fn data(&self) -> &LabeledDataset {
        &self.data
    }

    pub fn dim(&self) -> usize {
        self.data.num_features()
    }

    pub fn is_stochastic(&self) -> bool {
        self.batch_size.is_some()
    }

    /// V(w) = |w|^2/(2*alpha) + sum_t softplus(-y_t * w.c_t). Full-data and
    /// deterministic regardless of the batch configuration.
    pub fn potential(&self, w: ArrayView1<f64>) -> f64 {
        let prior = 0.5 * w.dot(&w) / self.alpha;
        let mut nll = 0.0;
        for t in 0..self.data.len() {
            let margin = self.data.labels[t] * self.data.features.row(t).dot(&w);
            nll += softplus(-margin);
        }
        prior + nll
    }

    /// Sum over the given rows of the likelihood gradient -y_t c_t s(-y_t w.c_t).
    fn likelihood_grad_sum(
        &self,
        w: ArrayView1<f64>,
        rows: impl Iterator<Item = usize>,
    ) -> Array1<f64> {
        let mut acc = Array1::zeros(self.dim());
        for t in rows {
            let c = self.data.features.row(t);
            let y = self.data.labels[t];
            let pull = -y * sigmoid(-y * c.dot(&w));
            acc.scaled_add(pull, &c);
        }
        acc
    }

    /// Full gradient, or a batch estimate scaled by T/|B| on the likelihood
    /// part (the prior term is never subsampled). Batch rows are summed in
    /// increasing index order, so a batch of size T reproduces the full
    /// gradient bit for bit.
    pub fn grad(&self, w: ArrayView1<f64>) -> Array1<f64> {
        let t = self.data.len();
        let (scale, sum) = match self.batch_size {
            None => (1.0, self.likelihood_grad_sum(w, 0..t)),
            Some(b) => {
                let mut indices = {
                    let mut rng = self.rng.lock().expect("posterior rng poisoned");
                    rand::seq::index::sample(&mut *rng, t, b).into_vec()
                };
                indices.sort_unstable();
                (
                    t as f64 / b as f64,
                    self.likelihood_grad_sum(w, indices.into_iter()),
                )
            }
        };
        let mut g = w.to_owned();
        g /= self.alpha;
        g.scaled_add(scale, &sum);
        g
    }
}

/// Loads a comma-separated dataset (UTF-8, header row, one numeric label
/// column named `label_column` with values in {-1, +1}, remaining columns
/// numeric features), splits it into train/test with a seeded uniform
/// permutation, and optionally standardizes feature columns.
///
/// Standardization statistics (mean and population standard deviation) are
/// computed on the training split only and applied to both splits.
pub fn load_csv_dataset(
    path: &Path,
    label_column: &str,
    standardize: bool,
    split_fraction: f64,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    if !(split_fraction > 0.0 && split_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "split fraction must lie in (0, 1), got {split_fraction}"
        )));
    }
    let text = std::fs::read_to_string(path)?;
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse(format!("{}: empty file", path.display())))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    let label_idx = columns
        .iter()
        .position(|c| *c == label_column)
        .ok_or_else(|| {
            Error::Parse(format!(
                "label column {label_column:?} not found in header {columns:?}"
            ))
        })?;
    let p = columns.len() - 1;
    if p == 0 {
        return Err(Error::Parse("dataset has no feature columns".into()));
    }

    let mut features: Vec<f64> = Vec::new();
    let mut labels: Vec<f64> = Vec::new();
    for (lineno, line) in lines {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != columns.len() {
            return Err(Error::Parse(format!(
                "row {}: expected {} fields, got {}",
                lineno + 1,
                columns.len(),
                fields.len()
            )));
        }
        for (ci, field) in fields.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| {
                Error::Parse(format!(
                    "row {}, column {} ({:?}): {field:?} is not numeric",
                    lineno + 1,
                    ci + 1,
                    columns[ci]
                ))
            })?;
            if ci == label_idx {
                if value != 1.0 && value != -1.0 {
                    return Err(Error::Parse(format!(
                        "row {}: label must be -1 or +1, got {field:?}",
                        lineno + 1
                    )));
                }
                labels.push(value);
            } else {
                features.push(value);
            }
        }
    }
    let t = labels.len();
    if t < 2 {
        return Err(Error::Parse(format!(
            "dataset needs at least 2 rows to split, got {t}"
        )));
    }
    let features = Array2::from_shape_vec((t, p), features)
        .expect("row count times feature count matches by construction");

    // Seeded uniform permutation; the first round(T * fraction) rows train.
    let mut order: Vec<usize> = (0..t).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let n_train = ((t as f64 * split_fraction).round() as usize).clamp(1, t - 1);

    let take = |rows: &[usize]| -> (Array2<f64>, Array1<f64>) {
        let mut f = Array2::zeros((rows.len(), p));
        let mut l = Array1::zeros(rows.len());
        for (out, &r) in rows.iter().enumerate() {
            f.row_mut(out).assign(&features.row(r));
            l[out] = labels[r];
        }
        (f, l)
    };
    let (mut train_f, train_l) = take(&order[..n_train]);
    let (mut test_f, test_l) = take(&order[n_train..]);

    let mut stats = None;
    if standardize {
        let n = train_f.nrows() as f64;
        let means = train_f.sum_axis(ndarray::Axis(0)) / n;
        let mut stds = Array1::zeros(p);
        for j in 0..p {
            let var = train_f
                .column(j)
                .iter()
                .map(|v| (v - means[j]) * (v - means[j]))
                .sum::<f64>()
                / n;
            stds[j] = var.sqrt();
            if stds[j] <= 1e-12 * (1.0 + means[j].abs()) {
                return Err(Error::Parse(format!(
                    "column {} ({:?}) is constant on the training split; cannot standardize",
                    j + 1,
                    feature_name(&columns, label_idx, j)
                )));
            }
        }
        for mut split in [train_f.view_mut(), test_f.view_mut()] {
            for j in 0..p {
                split
                    .column_mut(j)
                    .mapv_inplace(|v| (v - means[j]) / stds[j]);
            }
        }
        stats = Some((means, stds));
    }

    let wrap = |f: Array2<f64>, l: Array1<f64>| -> Result<LabeledDataset> {
        let mut ds = LabeledDataset::new(f, l)?;
        if let Some((means, stds)) = &stats {
            ds.standardized = true;
            ds.column_means = Some(means.clone());
            ds.column_stds = Some(stds.clone());
        }
        Ok(ds)
    };
    Ok((wrap(train_f, train_l)?, wrap(test_f, test_l)?))
}

fn feature_name<'a>(columns: &[&'a str], label_idx: usize, feature_idx: usize) -> &'a str {
    // Feature j skips the label column in the header order.
    let mut seen = 0;
    for (ci, name) in columns.iter().enumerate() {
        if ci == label_idx {
            continue;
        }
        if seen == feature_idx {
            return name;
        }
        seen += 1;
    }
    unreachable!("feature index out of range")
}

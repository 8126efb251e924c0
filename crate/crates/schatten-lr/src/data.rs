//! Synthetic instance generation and ratings-file ingestion.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::observations::ObservationSet;
use crate::rng;
use rand::Rng;
use std::collections::HashMap;
use std::path::Path;

/// Rank-`r` ground truth `X0 = P Q^T` with i.i.d. standard normal factors.
pub fn gen_low_rank(m: usize, n: usize, r: usize, seed: u64) -> Result<DenseMatrix> {
    if r > m.min(n) {
        return Err(Error::InvalidArgument(format!(
            "rank {r} exceeds min dimension {}",
            m.min(n)
        )));
    }
    if r == 0 {
        return Ok(DenseMatrix::zeros(m, n));
    }
    let mut rng = rng::seeded(seed);
    let p = rng::gaussian_matrix(m, r, &mut rng);
    let q = rng::gaussian_matrix(n, r, &mut rng);
    Ok(p.matmul(&q.transpose()))
}

/// Samples `round(sr * m * n)` cells uniformly without replacement and
/// observes `X0 + nf * Theta` there, with `Theta` an i.i.d. standard normal
/// noise matrix over the full host (drawn row-major, then projected).
pub fn gen_noisy_observations(
    x0: &DenseMatrix,
    sr: f64,
    nf: f64,
    seed: u64,
) -> Result<ObservationSet> {
    if !(sr > 0.0 && sr <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "sampling ratio must lie in (0, 1], got {sr}"
        )));
    }
    if !(nf >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "noise factor must be non-negative, got {nf}"
        )));
    }
    let (m, n) = (x0.rows(), x0.cols());
    let total = m * n;
    // Round half up so |Omega| is identical across platforms.
    let count = ((sr * total as f64) + 0.5).floor() as usize;
    let count = count.min(total).max(1);

    let mut rng = rng::seeded(seed);
    let mut cells: Vec<usize> = (0..total).collect();
    for i in 0..count {
        let j = rng.random_range(i..total);
        cells.swap(i, j);
    }
    let mut chosen = vec![false; total];
    for &c in &cells[..count] {
        chosen[c] = true;
    }

    let mut entries = Vec::with_capacity(count);
    if nf == 0.0 {
        for (c, picked) in chosen.iter().enumerate() {
            if *picked {
                entries.push((c / n, c % n, x0.data()[c]));
            }
        }
    } else {
        for (c, picked) in chosen.iter().enumerate() {
            let theta = rng::standard_normal(&mut rng);
            if *picked {
                entries.push((c / n, c % n, x0.data()[c] + nf * theta));
            }
        }
    }
    ObservationSet::new(m, n, entries)
}

/// A generated completion problem with its ground truth.
#[derive(Debug, Clone)]
pub struct SyntheticInstance {
    pub ground_truth: DenseMatrix,
    pub observations: ObservationSet,
    pub noise_factor: f64,
    pub sampling_ratio: f64,
    pub true_rank: usize,
    pub seed: u64,
}

impl SyntheticInstance {
    /// Builds ground truth from `seed` and observations from `seed + 1`.
    pub fn generate(
        m: usize,
        n: usize,
        r: usize,
        sr: f64,
        nf: f64,
        seed: u64,
    ) -> Result<Self> {
        let ground_truth = gen_low_rank(m, n, r, seed)?;
        let observations = gen_noisy_observations(&ground_truth, sr, nf, seed.wrapping_add(1))?;
        Ok(Self {
            ground_truth,
            observations,
            noise_factor: nf,
            sampling_ratio: sr,
            true_rank: r,
            seed,
        })
    }
}

/// A robust-recovery problem: low-rank ground truth plus sparse spike
/// corruption, possibly with missing cells.
#[derive(Debug, Clone)]
pub struct SpikedInstance {
    pub ground_truth: DenseMatrix,
    /// Observed (possibly corrupted) cells.
    pub observations: ObservationSet,
    /// Whether each observation, in canonical order, carries a spike.
    pub spike_mask: Vec<bool>,
    pub spike_fraction: f64,
    pub missing_fraction: f64,
    pub true_rank: usize,
    pub seed: u64,
}

/// Generates a rank-`r` matrix, drops a `missing_fraction` of cells, and
/// corrupts each remaining cell with probability `spike_fraction` by a
/// `+/- spike_magnitude` shift of random sign.
pub fn gen_spiked(
    m: usize,
    n: usize,
    r: usize,
    spike_fraction: f64,
    spike_magnitude: f64,
    missing_fraction: f64,
    seed: u64,
) -> Result<SpikedInstance> {
    if !(0.0..=1.0).contains(&spike_fraction) {
        return Err(Error::InvalidArgument(format!(
            "spike fraction must lie in [0, 1], got {spike_fraction}"
        )));
    }
    if !(0.0..1.0).contains(&missing_fraction) {
        return Err(Error::InvalidArgument(format!(
            "missing fraction must lie in [0, 1), got {missing_fraction}"
        )));
    }
    let ground_truth = gen_low_rank(m, n, r, seed)?;
    let mut rng = rng::seeded(seed.wrapping_add(1));
    let mut entries = Vec::new();
    let mut spike_mask = Vec::new();
    // Row-major cell sweep keeps the canonical order aligned with the mask.
    for i in 0..m {
        for j in 0..n {
            if missing_fraction > 0.0 && rng.random_bool(missing_fraction) {
                continue;
            }
            let spiked = spike_fraction > 0.0 && rng.random_bool(spike_fraction);
            let value = if spiked {
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                ground_truth.get(i, j) + sign * spike_magnitude
            } else {
                ground_truth.get(i, j)
            };
            entries.push((i, j, value));
            spike_mask.push(spiked);
        }
    }
    let observations = ObservationSet::new(m, n, entries)?;
    Ok(SpikedInstance {
        ground_truth,
        observations,
        spike_mask,
        spike_fraction,
        missing_fraction,
        true_rank: r,
        seed,
    })
}

/// Field separator of a ratings file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatingsFormat {
    /// `user::item::rating[::timestamp]`
    DoubleColon,
    /// `user,item,rating[,timestamp]`
    Comma,
    /// Tab-separated.
    Tab,
}

impl RatingsFormat {
    fn separator(self) -> &'static str {
        match self {
            RatingsFormat::DoubleColon => "::",
            RatingsFormat::Comma => ",",
            RatingsFormat::Tab => "\t",
        }
    }
}

/// One parsed rating line, still carrying raw identifiers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawRating {
    pub user: u64,
    pub item: u64,
    pub rating: f64,
}

/// Parses `user<sep>item<sep>rating[<sep>timestamp]` lines; the timestamp
/// is ignored. Errors carry 1-based line numbers.
pub fn parse_ratings(text: &str, format: RatingsFormat) -> Result<Vec<RawRating>> {
    let sep = format.separator();
    let mut out = Vec::new();
    let mut any = false;
    for (idx, line) in text.lines().enumerate() {
        any = true;
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split(sep).collect();
        if fields.len() != 3 && fields.len() != 4 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!(
                    "expected 3 or 4 fields separated by '{sep}', got {}",
                    fields.len()
                ),
            });
        }
        let user: u64 = fields[0].trim().parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("bad user id '{}'", fields[0]),
        })?;
        let item: u64 = fields[1].trim().parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("bad item id '{}'", fields[1]),
        })?;
        let rating: f64 = fields[2].trim().parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("bad rating '{}'", fields[2]),
        })?;
        if !rating.is_finite() {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("non-finite rating '{}'", fields[2]),
            });
        }
        out.push(RawRating { user, item, rating });
    }
    if !any {
        return Err(Error::Parse {
            line: 1,
            msg: "ratings file is empty".into(),
        });
    }
    Ok(out)
}

pub fn load_ratings(path: &Path, format: RatingsFormat) -> Result<Vec<RawRating>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_ratings(&text, format)
}

/// A train/test split with dense user/item indexing.
#[derive(Debug, Clone)]
pub struct RatingsDataset {
    pub num_users: usize,
    pub num_items: usize,
    pub train: ObservationSet,
    pub test: ObservationSet,
    /// Sorted raw user ids; position is the dense index.
    pub user_ids: Vec<u64>,
    /// Sorted raw item ids; position is the dense index.
    pub item_ids: Vec<u64>,
}

/// Seeded shuffle, then the first `ceil(fraction * count)` ratings become
/// the training set. Users and items appearing anywhere are indexed, so a
/// test-only entity still has a valid row or column.
pub fn split_ratings(
    triples: &[RawRating],
    train_fraction: f64,
    seed: u64,
) -> Result<RatingsDataset> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    if triples.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least 2 ratings to split".into(),
        ));
    }
    let mut seen = HashMap::new();
    for (idx, t) in triples.iter().enumerate() {
        if let Some(first) = seen.insert((t.user, t.item), idx + 1) {
            return Err(Error::InvalidArgument(format!(
                "duplicate rating for user {} item {} (entries {first} and {})",
                t.user,
                t.item,
                idx + 1
            )));
        }
    }

    let mut user_ids: Vec<u64> = triples.iter().map(|t| t.user).collect();
    user_ids.sort_unstable();
    user_ids.dedup();
    let mut item_ids: Vec<u64> = triples.iter().map(|t| t.item).collect();
    item_ids.sort_unstable();
    item_ids.dedup();
    let user_index: HashMap<u64, usize> =
        user_ids.iter().enumerate().map(|(i, &u)| (u, i)).collect();
    let item_index: HashMap<u64, usize> =
        item_ids.iter().enumerate().map(|(i, &u)| (u, i)).collect();

    let mut shuffled: Vec<&RawRating> = triples.iter().collect();
    let mut rng = rng::seeded(seed);
    // Fisher-Yates, spelled out so the split survives shuffle-implementation
    // changes in the rand crate.
    for i in (1..shuffled.len()).rev() {
        let j = rng.random_range(0..=i);
        shuffled.swap(i, j);
    }
    let train_count = (train_fraction * triples.len() as f64).ceil() as usize;
    let to_entries = |slice: &[&RawRating]| -> Vec<(usize, usize, f64)> {
        slice
            .iter()
            .map(|t| (user_index[&t.user], item_index[&t.item], t.rating))
            .collect()
    };
    let train = ObservationSet::new(
        user_ids.len(),
        item_ids.len(),
        to_entries(&shuffled[..train_count]),
    )?;
    let test = ObservationSet::new(
        user_ids.len(),
        item_ids.len(),
        to_entries(&shuffled[train_count..]),
    )?;
    Ok(RatingsDataset {
        num_users: user_ids.len(),
        num_items: item_ids.len(),
        train,
        test,
        user_ids,
        item_ids,
    })
}

impl RatingsDataset {
    /// Mean training rating; the fallback prediction for entities with no
    /// training data, and the recentering offset for the factor model.
    pub fn train_mean(&self) -> f64 {
        let v = self.train.values();
        v.iter().sum::<f64>() / v.len().max(1) as f64
    }

    /// Training observations recentered by the train mean, ready for a
    /// factor solver.
    pub fn centered_train(&self) -> Result<ObservationSet> {
        let mean = self.train_mean();
        let entries = self
            .train
            .entries()
            .iter()
            .map(|&(i, j, v)| (i, j, v - mean))
            .collect();
        ObservationSet::new(self.num_users, self.num_items, entries)
    }

    /// Which users/items actually have training ratings.
    pub fn coverage(&self) -> (Vec<bool>, Vec<bool>) {
        let mut users = vec![false; self.num_users];
        let mut items = vec![false; self.num_items];
        for &(i, j, _) in self.train.entries() {
            users[i] = true;
            items[j] = true;
        }
        (users, items)
    }
}

/// A fitted rating predictor: recentered factor model plus the global-mean
/// fallback for users or items never seen in training.
#[derive(Debug, Clone)]
pub struct RatingModel {
    pub mean: f64,
    pub low_rank: DenseMatrix,
    pub user_seen: Vec<bool>,
    pub item_seen: Vec<bool>,
}

impl RatingModel {
    pub fn new(ds: &RatingsDataset, low_rank: DenseMatrix) -> Self {
        let (user_seen, item_seen) = ds.coverage();
        Self {
            mean: ds.train_mean(),
            low_rank,
            user_seen,
            item_seen,
        }
    }

    pub fn predict(&self, user: usize, item: usize) -> f64 {
        if !self.user_seen[user] || !self.item_seen[item] {
            return self.mean;
        }
        self.mean + self.low_rank.get(user, item)
    }

    /// Predictions for every test entry, in canonical order.
    pub fn predict_all(&self, test: &ObservationSet) -> Vec<f64> {
        test.entries()
            .iter()
            .map(|&(i, j, _)| self.predict(i, j))
            .collect()
    }
}

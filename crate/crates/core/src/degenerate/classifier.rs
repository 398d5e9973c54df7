//! Reference decoders mapping received patterns to class labels.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::LabeledPatternSet;
use crate::error::{Error, Result};
use crate::pattern::Pattern;

/// Post-measurement classical decoder.
///
/// Implementations must be deterministic after [`Classifier::fit`] and only
/// predict labels present in the training alphabet.
pub trait Classifier: Send + Sync {
    fn fit(&mut self, training: &LabeledPatternSet) -> Result<()>;
    fn predict(&self, pattern: &Pattern) -> Result<u8>;
    fn is_fitted(&self) -> bool;
}

/// Picks the class whose mean training pattern is closest in squared distance.
#[derive(Debug, Clone, Default)]
pub struct NearestCentroid {
    /// `sum_i c_i^2` per class.
    offsets: Vec<f64>,
    /// `1 - 2 c_i` per class, concatenated; the distance to a binary `x` is
    /// `offset + sum_{i: x_i = 1} (1 - 2 c_i)`.
    weights: Vec<f64>,
    modes: usize,
}

impl NearestCentroid {
    pub fn new() -> Self {
        Self::default()
    }

    /// Class means, one row per class.
    pub fn centroids(&self) -> Vec<Vec<f64>> {
        self.weights.chunks(self.modes.max(1)).map(|w| w.iter().map(|x| (1.0 - x) / 2.0).collect()).collect()
    }
}

impl Classifier for NearestCentroid {
    fn fit(&mut self, training: &LabeledPatternSet) -> Result<()> {
        let classes = training.classes() as usize;
        let modes = training.modes();
        let mut sums = vec![0.0; classes * modes];
        let mut counts = vec![0usize; classes];
        for (p, &label) in training.patterns().iter().zip(training.labels()) {
            let row = &mut sums[label as usize * modes..(label as usize + 1) * modes];
            for (acc, &s) in row.iter_mut().zip(p.symbols()) {
                *acc += f64::from(s);
            }
            counts[label as usize] += 1;
        }
        if let Some(missing) = counts.iter().position(|&c| c == 0) {
            return Err(Error::MissingClass(missing as u8));
        }
        let mut offsets = vec![0.0; classes];
        for (c, row) in sums.chunks_mut(modes).enumerate() {
            for v in row.iter_mut() {
                let mean = *v / counts[c] as f64;
                offsets[c] += mean * mean;
                *v = 1.0 - 2.0 * mean;
            }
        }
        *self = Self { offsets, weights: sums, modes };
        Ok(())
    }

    fn predict(&self, pattern: &Pattern) -> Result<u8> {
        if !self.is_fitted() {
            return Err(Error::Unfitted);
        }
        if pattern.modes() != self.modes {
            return Err(Error::LengthMismatch(pattern.modes(), self.modes));
        }
        let mut scores = self.offsets.clone();
        for (i, _) in pattern.symbols().iter().enumerate().filter(|(_, &s)| s == 1) {
            for (c, score) in scores.iter_mut().enumerate() {
                *score += self.weights[c * self.modes + i];
            }
        }
        // First minimum wins, so ties resolve to the smallest label.
        let best = scores.iter().enumerate().fold(0, |best, (c, &s)| if s < scores[best] { c } else { best });
        Ok(best as u8)
    }

    fn is_fitted(&self) -> bool {
        !self.offsets.is_empty()
    }
}

/// Packs a binary pattern into 64-bit words, least significant bit first.
pub fn pack_bits(pattern: &Pattern) -> Vec<u64> {
    let mut words = vec![0u64; pattern.modes().div_ceil(64)];
    for (i, &s) in pattern.symbols().iter().enumerate() {
        if s == 1 {
            words[i / 64] |= 1 << (i % 64);
        }
    }
    words
}

/// Majority vote among the `k` training patterns nearest in Hamming distance.
///
/// Distance ties are broken by training index; vote ties by the label of the
/// nearest tied neighbour.
#[derive(Debug, Clone)]
pub struct KNearest {
    k: usize,
    words_per_pattern: usize,
    modes: usize,
    classes: usize,
    train: Vec<u64>,
    labels: Vec<u8>,
}

impl KNearest {
    pub fn new(k: usize) -> Self {
        Self { k: k.max(1), words_per_pattern: 0, modes: 0, classes: 0, train: Vec::new(), labels: Vec::new() }
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

impl Classifier for KNearest {
    fn fit(&mut self, training: &LabeledPatternSet) -> Result<()> {
        if training.is_empty() {
            return Err(Error::MissingClass(0));
        }
        self.modes = training.modes();
        self.words_per_pattern = self.modes.div_ceil(64);
        self.classes = training.classes() as usize;
        self.train = training.patterns().iter().flat_map(pack_bits).collect();
        self.labels = training.labels().to_vec();
        Ok(())
    }

    fn predict(&self, pattern: &Pattern) -> Result<u8> {
        if !self.is_fitted() {
            return Err(Error::Unfitted);
        }
        if pattern.modes() != self.modes {
            return Err(Error::LengthMismatch(pattern.modes(), self.modes));
        }
        let query = pack_bits(pattern);
        let k = self.k.min(self.labels.len());
        // Sorted (distance, index) buffer of the k best so far.
        let mut best: Vec<(u32, usize)> = Vec::with_capacity(k + 1);
        for (idx, words) in self.train.chunks_exact(self.words_per_pattern).enumerate() {
            let d: u32 = words.iter().zip(&query).map(|(a, b)| (a ^ b).count_ones()).sum();
            if best.len() == k && d >= best[k - 1].0 {
                continue;
            }
            let pos = best.partition_point(|&(bd, _)| bd <= d);
            best.insert(pos, (d, idx));
            best.truncate(k);
        }
        let mut votes = vec![0usize; self.classes];
        for &(_, idx) in &best {
            votes[self.labels[idx] as usize] += 1;
        }
        let top = *votes.iter().max().expect("non-empty alphabet");
        let winner = best.iter().map(|&(_, idx)| self.labels[idx]).find(|&l| votes[l as usize] == top);
        Ok(winner.expect("some neighbour carries the top vote"))
    }

    fn is_fitted(&self) -> bool {
        !self.labels.is_empty()
    }
}

/// Named classifier configuration, parsed from `centroid`, `knn` or `knn:K`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ClassifierSpec {
    #[default]
    NearestCentroid,
    KNearest { k: usize },
}

impl ClassifierSpec {
    pub fn build(self) -> Box<dyn Classifier> {
        match self {
            ClassifierSpec::NearestCentroid => Box::new(NearestCentroid::new()),
            ClassifierSpec::KNearest { k } => Box::new(KNearest::new(k)),
        }
    }

    /// Builds and fits in one step.
    pub fn fit(self, training: &LabeledPatternSet) -> Result<Box<dyn Classifier>> {
        let mut c = self.build();
        c.fit(training)?;
        Ok(c)
    }
}

impl fmt::Display for ClassifierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassifierSpec::NearestCentroid => f.write_str("centroid"),
            ClassifierSpec::KNearest { k } => write!(f, "knn:{k}"),
        }
    }
}

impl FromStr for ClassifierSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "centroid" | "nearest-centroid" => Ok(Self::NearestCentroid),
            "knn" => Ok(Self::KNearest { k: 3 }),
            other => match other.strip_prefix("knn:").map(str::parse::<usize>) {
                Some(Ok(k)) if k >= 1 => Ok(Self::KNearest { k }),
                _ => Err(format!("unknown classifier {s:?} (expected centroid, knn or knn:K)")),
            },
        }
    }
}

impl TryFrom<String> for ClassifierSpec {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl From<ClassifierSpec> for String {
    fn from(spec: ClassifierSpec) -> String {
        spec.to_string()
    }
}

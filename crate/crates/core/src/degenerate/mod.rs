//! Degenerate codebooks: many binary images share one class label.
//!
//! Bob and Eve each measure every mode locally with the Helstrom
//! measurement, which turns the lossy channel into independent per-pixel bit
//! flips, and then decode the class with a classical [`Classifier`]. The
//! mutual information between Alice's class and the decoded class is
//! estimated from a confusion table over an evaluation set.

pub mod classifier;
pub mod idx;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use classifier::{Classifier, ClassifierSpec, KNearest, NearestCentroid};
pub use idx::{load_idx, GrayscaleSet};

use crate::error::{Error, Result};
use crate::info::conditional_information;
use crate::pattern::{ChannelParams, Modulation, ModulationKind, Pattern, Side};

/// Default grayscale cut-off: pixels strictly above it become targets.
pub const DEFAULT_THRESHOLD: u8 = 127;
/// Number of digit classes.
pub const MNIST_CLASSES: u8 = 10;

/// Thresholds a grayscale image into a binary pattern.
pub fn binarize(image: &[u8], threshold: u8) -> Result<Pattern> {
    Pattern::binary(image.iter().map(|&px| u8::from(px > threshold)).collect())
}

/// Binary patterns with class labels in `0..classes`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPatternSet {
    patterns: Vec<Pattern>,
    labels: Vec<u8>,
    classes: u8,
}

impl LabeledPatternSet {
    pub fn new(patterns: Vec<Pattern>, labels: Vec<u8>, classes: u8) -> Result<Self> {
        if patterns.len() != labels.len() {
            return Err(Error::LengthMismatch(patterns.len(), labels.len()));
        }
        if let Some((index, &label)) = labels.iter().enumerate().find(|(_, &l)| l >= classes) {
            return Err(Error::LabelOutOfRange { index, label });
        }
        if let Some(first) = patterns.first() {
            if let Some(p) = patterns.iter().find(|p| p.modes() != first.modes()) {
                return Err(Error::LengthMismatch(first.modes(), p.modes()));
            }
        }
        Ok(Self { patterns, labels, classes })
    }

    /// Binarizes every image of a grayscale set (digit alphabet).
    pub fn from_grayscale(set: &GrayscaleSet, threshold: u8) -> Result<Self> {
        let patterns = (0..set.len()).map(|i| binarize(set.image(i), threshold)).collect::<Result<_>>()?;
        Self::new(patterns, set.labels().to_vec(), MNIST_CLASSES)
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn classes(&self) -> u8 {
        self.classes
    }

    pub fn modes(&self) -> usize {
        self.patterns.first().map_or(0, Pattern::modes)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes as usize];
        for &l in &self.labels {
            counts[l as usize] += 1;
        }
        counts
    }

    /// The items at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            patterns: indices.iter().map(|&i| self.patterns[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            classes: self.classes,
        }
    }
}

/// Helstrom error of one mode, `(1 - sqrt(1 - exp(-kappa * eta * N_S))) / 2`.
pub fn mode_flip_prob(eta: f64, ns: f64, kind: ModulationKind) -> f64 {
    (1.0 - (1.0 - (-kind.kappa() * eta * ns).exp()).sqrt()) / 2.0
}

/// Per-mode flip probability seen on one side of the channel.
pub fn channel_flip_prob(modulation: &Modulation, channel: &ChannelParams) -> f64 {
    mode_flip_prob(channel.effective_transmissivity(), modulation.mean_photons(), modulation.kind())
}

/// Flips every mode independently with probability `flip_prob`.
///
/// One uniform draw is consumed per mode regardless of `flip_prob`, so a
/// given stream couples transmissions at different noise levels monotonically.
pub fn transmit(pattern: &Pattern, flip_prob: f64, rng: &mut impl Rng) -> Pattern {
    let symbols = pattern.symbols().iter().map(|&s| if rng.gen::<f64>() < flip_prob { s ^ 1 } else { s }).collect();
    Pattern::binary(symbols).expect("flipping preserves a binary alphabet")
}

/// Random stream for transmission `index` observed by `side`.
pub fn pattern_stream(seed: u64, index: usize, side: Side) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side_bit = match side {
        Side::Bob => 0,
        Side::Eve => 1,
    };
    rng.set_stream((index as u64) << 1 | side_bit);
    rng
}

/// Counts of (sent class, decoded class); rows are sent classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionTable {
    classes: usize,
    counts: Vec<Vec<u64>>,
}

impl ConfusionTable {
    pub fn new(classes: usize) -> Self {
        Self { classes, counts: vec![vec![0; classes]; classes] }
    }

    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let classes = counts.len();
        if let Some(row) = counts.iter().find(|r| r.len() != classes) {
            return Err(Error::NotSquare(classes, row.len()));
        }
        Ok(Self { classes, counts })
    }

    pub fn record(&mut self, sent: u8, decoded: u8) {
        self.counts[sent as usize][decoded as usize] += 1;
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn get(&self, sent: usize, decoded: usize) -> u64 {
        self.counts[sent][decoded]
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn row_sum(&self, sent: usize) -> u64 {
        self.counts[sent].iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Fraction of transmissions decoded to the sent class.
    pub fn accuracy(&self) -> f64 {
        let hits: u64 = (0..self.classes).map(|c| self.counts[c][c]).sum();
        hits as f64 / self.total() as f64
    }
}

/// Sends every evaluation pattern once through the channel and tallies the
/// decoded classes.
///
/// Transmission `i` draws its noise from [`pattern_stream`]`(seed, i, side)`,
/// so the table does not depend on thread count or iteration order.
pub fn simulate_confusion(
    classifier: &dyn Classifier,
    eval: &LabeledPatternSet,
    modulation: &Modulation,
    channel: &ChannelParams,
    seed: u64,
) -> Result<ConfusionTable> {
    if !classifier.is_fitted() {
        return Err(Error::Unfitted);
    }
    let p = channel_flip_prob(modulation, channel);
    let decoded = eval
        .patterns()
        .par_iter()
        .enumerate()
        .map(|(i, pattern)| {
            let received = transmit(pattern, p, &mut pattern_stream(seed, i, channel.side()));
            classifier.predict(&received)
        })
        .collect::<Result<Vec<u8>>>()?;
    let mut table = ConfusionTable::new(eval.classes() as usize);
    for (&sent, &got) in eval.labels().iter().zip(&decoded) {
        if got >= eval.classes() {
            return Err(Error::LabelOutOfRange { index: got as usize, label: got });
        }
        table.record(sent, got);
    }
    Ok(table)
}

/// Plug-in estimate `log2 d + sum p(a,b) log2 p(a|b)`, clamped to `[0, log2 d]`.
pub fn empirical_mutual_info(table: &ConfusionTable) -> Result<f64> {
    let total = table.total();
    if total == 0 {
        return Err(Error::EmptyTable);
    }
    let d = table.classes();
    let joint = nalgebra::DMatrix::from_fn(d, d, |a, b| table.get(a, b) as f64 / total as f64);
    Ok(conditional_information(&joint, d).clamp(0.0, (d as f64).log2()))
}

/// Seeded training subset of `size` items containing every class.
///
/// One item per class is drawn first; the rest are drawn uniformly from the
/// remaining items. Indices are returned sorted.
pub fn stratified_subset(set: &LabeledPatternSet, size: usize, seed: u64) -> Result<Vec<usize>> {
    let classes = set.classes() as usize;
    if size < classes || size > set.len() {
        return Err(Error::SubsetSize { requested: size, min: classes, max: set.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for (i, &l) in set.labels().iter().enumerate() {
        by_class[l as usize].push(i);
    }
    let mut chosen = Vec::with_capacity(size);
    for (c, members) in by_class.iter().enumerate() {
        chosen.push(*members.choose(&mut rng).ok_or(Error::MissingClass(c as u8))?);
    }
    let mut taken = vec![false; set.len()];
    for &i in &chosen {
        taken[i] = true;
    }
    let mut rest: Vec<usize> = (0..set.len()).filter(|&i| !taken[i]).collect();
    let (extra, _) = rest.partial_shuffle(&mut rng, size - classes);
    chosen.extend_from_slice(extra);
    chosen.sort_unstable();
    Ok(chosen)
}

/// One simulated realisation of Bob's and Eve's information.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkSample {
    pub i_ab: f64,
    pub i_ae: f64,
    pub rate: f64,
}

/// Eve's decoding resources.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EveKnowledge {
    /// Same classifier and training set as Bob.
    Full,
    /// Classifier trained on a stratified subset of this many items.
    Diminished { training_size: usize },
}

/// Training/evaluation data with Bob's fitted decoder, reusable across
/// channel settings and seeds.
pub struct Experiment<'a> {
    spec: ClassifierSpec,
    train: &'a LabeledPatternSet,
    eval: &'a LabeledPatternSet,
    bob: Box<dyn Classifier>,
}

impl<'a> Experiment<'a> {
    pub fn new(spec: ClassifierSpec, train: &'a LabeledPatternSet, eval: &'a LabeledPatternSet) -> Result<Self> {
        if train.modes() != eval.modes() {
            return Err(Error::LengthMismatch(train.modes(), eval.modes()));
        }
        Ok(Self { spec, train, eval, bob: spec.fit(train)? })
    }

    pub fn bob(&self) -> &dyn Classifier {
        self.bob.as_ref()
    }

    /// `I_AB(eta) - I_AE(1 - eta)` for one seed.
    pub fn sample(&self, eta: f64, modulation: &Modulation, eve: EveKnowledge, seed: u64) -> Result<LinkSample> {
        let bob_channel = ChannelParams::bob(eta)?;
        let i_ab = empirical_mutual_info(&simulate_confusion(self.bob(), self.eval, modulation, &bob_channel, seed)?)?;
        let fitted;
        let eve_decoder: &dyn Classifier = match eve {
            EveKnowledge::Full => self.bob(),
            EveKnowledge::Diminished { training_size } => {
                let subset = stratified_subset(self.train, training_size, subset_seed(seed))?;
                fitted = self.spec.fit(&self.train.subset(&subset))?;
                fitted.as_ref()
            }
        };
        let table = simulate_confusion(eve_decoder, self.eval, modulation, &bob_channel.swapped(), seed)?;
        let i_ae = empirical_mutual_info(&table)?;
        Ok(LinkSample { i_ab, i_ae, rate: i_ab - i_ae })
    }

    /// Averages [`Self::sample`] over `reps` seeds derived from `seed`.
    pub fn repeat(&self, eta: f64, modulation: &Modulation, eve: EveKnowledge, reps: usize, seed: u64) -> Result<RepeatedRate> {
        let samples = rep_seeds(seed, reps)
            .into_iter()
            .map(|s| self.sample(eta, modulation, eve, s))
            .collect::<Result<Vec<_>>>()?;
        Ok(RepeatedRate {
            eta,
            ns: modulation.mean_photons(),
            i_ab: Summary::of(samples.iter().map(|s| s.i_ab)),
            i_ae: Summary::of(samples.iter().map(|s| s.i_ae)),
            rate: Summary::of(samples.iter().map(|s| s.rate)),
            seed_count: reps,
        })
    }
}

/// Symmetric individual attack: Eve uses Bob's classifier trained on the full set.
pub fn rate_symmetric(
    eta: f64,
    modulation: &Modulation,
    spec: ClassifierSpec,
    train: &LabeledPatternSet,
    eval: &LabeledPatternSet,
    seed: u64,
) -> Result<LinkSample> {
    Experiment::new(spec, train, eval)?.sample(eta, modulation, EveKnowledge::Full, seed)
}

/// Diminished attack: Eve's classifier only sees `eve_training_size` training items.
pub fn rate_diminished(
    eta: f64,
    modulation: &Modulation,
    spec: ClassifierSpec,
    train: &LabeledPatternSet,
    eval: &LabeledPatternSet,
    eve_training_size: usize,
    seed: u64,
) -> Result<LinkSample> {
    Experiment::new(spec, train, eval)?.sample(
        eta,
        modulation,
        EveKnowledge::Diminished { training_size: eve_training_size },
        seed,
    )
}

fn subset_seed(seed: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    rng.next_u64()
}

/// Deterministic per-repetition seeds.
pub fn rep_seeds(seed: u64, reps: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..reps).map(|_| rng.next_u64()).collect()
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub std_err: f64,
}

impl Summary {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let v: Vec<f64> = values.into_iter().collect();
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let std_err = if v.len() > 1 {
            (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
        } else {
            0.0
        };
        Self { mean, std_err }
    }
}

/// Repetition-averaged rate at one channel setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepeatedRate {
    pub eta: f64,
    pub ns: f64,
    pub i_ab: Summary,
    pub i_ae: Summary,
    pub rate: Summary,
    pub seed_count: usize,
}

/// Flat CSV row `eta,ns,i_ab,i_ae,rate,seed_count` of mean values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MnistRatePoint {
    pub eta: f64,
    pub ns: f64,
    pub i_ab: f64,
    pub i_ae: f64,
    pub rate: f64,
    pub seed_count: usize,
}

impl From<RepeatedRate> for MnistRatePoint {
    fn from(r: RepeatedRate) -> Self {
        Self { eta: r.eta, ns: r.ns, i_ab: r.i_ab.mean, i_ae: r.i_ae.mean, rate: r.rate.mean, seed_count: r.seed_count }
    }
}

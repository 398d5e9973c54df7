//! Localised target position finding (LTPF) encoding.
//!
//! A scheme splits the `m` modes into disjoint blocks (the locality partition
//! `S`) and fixes how many target modes each block carries (the assignment
//! `K`). Codewords are all patterns obeying both, so the alphabet size is
//! `Sigma = prod_j C(|s_j|, k_j)`. Bob and a fully informed Eve decode with
//! block-wise PGMs on the true k-TPF spaces; an Eve who only knows `S` decodes
//! over every pattern with `1..|s_j|-1` targets per block and must infer `K`
//! from what she sees.
//!
//! Mode indices are zero-based throughout.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::combinatorics::binomial_u128;
use crate::ensemble::{gram, holevo, pgm_conditional, Priors};
use crate::error::{Error, Result};
use crate::info::{conditional_information, mismatched_information};
use crate::pattern::{enumerate_ktpf, ChannelParams, ImageSpace, Modulation, Pattern};

/// Upper bound on the number of cells of a materialised joint distribution.
pub const MAX_JOINT_CELLS: usize = 50_000_000;

/// Disjoint blocks of mode indices covering `0..m`, each of size >= 2.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocalityPartition {
    blocks: Vec<Vec<usize>>,
    modes: usize,
}

impl LocalityPartition {
    pub fn new(blocks: Vec<Vec<usize>>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Partition("no blocks".into()));
        }
        let modes: usize = blocks.iter().map(Vec::len).sum();
        let mut seen = HashSet::with_capacity(modes);
        for (j, block) in blocks.iter().enumerate() {
            if block.len() < 2 {
                return Err(Error::Partition(format!("block {j} has {} mode(s), need >= 2", block.len())));
            }
            for &mode in block {
                if mode >= modes {
                    return Err(Error::Partition(format!("mode {mode} in block {j} exceeds {modes} modes")));
                }
                if !seen.insert(mode) {
                    return Err(Error::Partition(format!("mode {mode} appears in more than one block")));
                }
            }
        }
        Ok(Self { blocks, modes })
    }

    /// Contiguous layout: block `j` holds the next `sizes[j]` modes.
    pub fn contiguous(sizes: &[usize]) -> Result<Self> {
        let mut start = 0;
        let blocks = sizes
            .iter()
            .map(|&s| {
                let block = (start..start + s).collect();
                start += s;
                block
            })
            .collect();
        Self::new(blocks)
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    pub fn modes(&self) -> usize {
        self.modes
    }
}

/// Number of target modes in each block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TpfAssignment {
    targets: Vec<usize>,
}

impl TpfAssignment {
    pub fn new(targets: Vec<usize>) -> Self {
        Self { targets }
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }
}

/// Shared Alice-Bob secret structure `(S, K)` plus the local modulation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LtpfScheme {
    partition: LocalityPartition,
    assignment: TpfAssignment,
    modulation: Modulation,
    sigma: u64,
}

impl LtpfScheme {
    pub fn new(partition: LocalityPartition, assignment: TpfAssignment, modulation: Modulation) -> Result<Self> {
        let sizes = partition.sizes();
        if assignment.targets.len() != sizes.len() {
            return Err(Error::Assignment(format!(
                "{} target counts for {} blocks",
                assignment.targets.len(),
                sizes.len()
            )));
        }
        let mut sigma: u64 = 1;
        for (j, (&size, &k)) in sizes.iter().zip(&assignment.targets).enumerate() {
            if k == 0 || k >= size {
                return Err(Error::Assignment(format!("block {j} of size {size} cannot hold {k} targets")));
            }
            let c = binomial_u128(size as u64, k as u64)
                .and_then(|c| u64::try_from(c).ok())
                .ok_or(Error::Overflow("alphabet size"))?;
            sigma = sigma.checked_mul(c).ok_or(Error::Overflow("alphabet size"))?;
        }
        Ok(Self { partition, assignment, modulation, sigma })
    }

    pub fn partition(&self) -> &LocalityPartition {
        &self.partition
    }

    pub fn assignment(&self) -> &TpfAssignment {
        &self.assignment
    }

    pub fn modulation(&self) -> &Modulation {
        &self.modulation
    }

    /// Alphabet size `prod_j C(|s_j|, k_j)`.
    pub fn sigma(&self) -> u64 {
        self.sigma
    }

    pub fn with_modulation(&self, modulation: Modulation) -> Self {
        Self { modulation, ..self.clone() }
    }

    fn blocks(&self) -> impl Iterator<Item = (&[usize], usize)> {
        self.partition.blocks.iter().map(Vec::as_slice).zip(self.assignment.targets.iter().copied())
    }
}

/// Cartesian product of per-block spaces, first block varying slowest.
fn product_space(
    modes: usize,
    blocks: &[Vec<usize>],
    sub_spaces: &[ImageSpace],
    modulation: Modulation,
) -> Result<ImageSpace> {
    let total = sub_spaces.iter().try_fold(1usize, |acc, s| acc.checked_mul(s.len()));
    let total = total.ok_or(Error::Overflow("image space size"))?;
    let mut patterns = Vec::with_capacity(total);
    let mut index = vec![0usize; sub_spaces.len()];
    for _ in 0..total {
        let pieces: Vec<(&[usize], &Pattern)> = blocks
            .iter()
            .zip(sub_spaces)
            .zip(&index)
            .map(|((b, s), &i)| (b.as_slice(), &s.patterns()[i]))
            .collect();
        patterns.push(Pattern::scatter(modes, &pieces)?);
        for j in (0..index.len()).rev() {
            index[j] += 1;
            if index[j] < sub_spaces[j].len() {
                break;
            }
            index[j] = 0;
        }
    }
    ImageSpace::new(patterns, modulation)
}

/// Codeword space of a scheme: all patterns with exactly `k_j` targets in block `j`.
pub fn build_image_space(scheme: &LtpfScheme) -> Result<ImageSpace> {
    let subs = scheme
        .blocks()
        .map(|(block, k)| enumerate_ktpf(block.len(), k, scheme.modulation))
        .collect::<Result<Vec<_>>>()?;
    product_space(scheme.partition.modes, &scheme.partition.blocks, &subs, scheme.modulation)
}

/// Every pattern with between 1 and `size - 1` targets, grouped by target count.
pub fn eve_block_space(size: usize, modulation: Modulation) -> Result<ImageSpace> {
    let parts = (1..size).map(|k| enumerate_ktpf(size, k, modulation)).collect::<Result<Vec<_>>>()?;
    ImageSpace::union(&parts)
}

/// Image space of an Eve who knows `S` but not `K`.
pub fn eve_image_space(partition: &LocalityPartition, modulation: Modulation) -> Result<ImageSpace> {
    let subs = partition
        .blocks
        .iter()
        .map(|b| eve_block_space(b.len(), modulation))
        .collect::<Result<Vec<_>>>()?;
    product_space(partition.modes, &partition.blocks, &subs, modulation)
}

fn check_joint_size(shapes: impl Iterator<Item = (usize, usize)>) -> Result<()> {
    let (rows, cols) = shapes.fold((Some(1usize), Some(1usize)), |(r, c), (nr, nc)| {
        (r.and_then(|r| r.checked_mul(nr)), c.and_then(|c| c.checked_mul(nc)))
    });
    match (rows, cols) {
        (Some(r), Some(c)) if r.checked_mul(c).is_some_and(|n| n <= MAX_JOINT_CELLS) => Ok(()),
        _ => Err(Error::JointTooLarge { rows: rows.unwrap_or(usize::MAX), cols: cols.unwrap_or(usize::MAX) }),
    }
}

fn kron_all(mats: &[DMatrix<f64>]) -> Result<DMatrix<f64>> {
    check_joint_size(mats.iter().map(|m| m.shape()))?;
    Ok(mats.iter().skip(1).fold(mats[0].clone(), |acc, m| acc.kronecker(m)))
}

fn kron_vectors(vs: &[DVector<f64>]) -> DVector<f64> {
    vs.iter().skip(1).fold(vs[0].clone(), |acc, v| acc.kronecker(v))
}

/// Block-wise PGM information between Alice and a receiver decoding on the
/// true scheme at `channel`.
fn pgm_information(scheme: &LtpfScheme, channel: &ChannelParams) -> Result<f64> {
    let conditionals = scheme
        .blocks()
        .map(|(block, k)| {
            let space = enumerate_ktpf(block.len(), k, scheme.modulation)?;
            Ok(pgm_conditional(&gram(&space, channel)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let sigma = scheme.sigma as usize;
    let joint = kron_all(&conditionals)? / sigma as f64;
    Ok(conditional_information(&joint, sigma).clamp(0.0, (sigma as f64).log2()))
}

/// Alice-Bob mutual information (bits) with block-wise PGMs at transmissivity `eta`.
pub fn mutual_info_ab(scheme: &LtpfScheme, eta: f64) -> Result<f64> {
    pgm_information(scheme, &ChannelParams::bob(eta)?)
}

/// Information of a fully informed Eve on the `1 - eta` arm.
pub fn mutual_info_ae(scheme: &LtpfScheme, eta: f64) -> Result<f64> {
    pgm_information(scheme, &ChannelParams::eve(eta)?)
}

struct EveBlock {
    /// PGM outcome probabilities over the union space (rows: sent, cols: outcome).
    conditional: DMatrix<f64>,
    /// Union-space row index of each of Alice's sub-patterns, in k-TPF order.
    alice_rows: Vec<usize>,
    /// Target count of every union-space element.
    weights: Vec<usize>,
}

fn eve_blocks(scheme: &LtpfScheme, eta: f64) -> Result<Vec<EveBlock>> {
    let channel = ChannelParams::eve(eta)?;
    scheme
        .blocks()
        .map(|(block, k)| {
            let union = eve_block_space(block.len(), scheme.modulation)?;
            let conditional = pgm_conditional(&gram(&union, &channel)?);
            let alice = enumerate_ktpf(block.len(), k, scheme.modulation)?;
            let alice_rows = alice
                .patterns()
                .iter()
                .map(|p| union.index_of(p).expect("k-TPF space is contained in the union space"))
                .collect();
            let weights = union.patterns().iter().map(Pattern::weight).collect();
            Ok(EveBlock { conditional, alice_rows, weights })
        })
        .collect()
}

/// Information an `S`-aware, `K`-unaware Eve extracts on the `1 - eta` arm.
///
/// Eve measures with PGMs over her union space and decodes with the Bayes
/// posterior of that space under a uniform prior, i.e.
/// `q(A|E) = p(E|A) / sum_{A' in U_S} p(E|A')`. The result
/// `log2 Sigma + sum p(A,E) log2 q(A|E)` is clipped to `[0, log2 Sigma]`.
pub fn mutual_info_ae_unbiased(scheme: &LtpfScheme, eta: f64) -> Result<f64> {
    let blocks = eve_blocks(scheme, eta)?;
    let restricted: Vec<DMatrix<f64>> = blocks.iter().map(|b| b.conditional.select_rows(&b.alice_rows)).collect();
    let column_mass: Vec<DVector<f64>> = blocks.iter().map(|b| b.conditional.row_sum().transpose()).collect();
    let sigma = scheme.sigma as usize;
    let joint = kron_all(&restricted)? / sigma as f64;
    // Column sums of a Kronecker product factorise across blocks.
    let evidence = kron_vectors(&column_mass);
    let info = mismatched_information(&joint, sigma, |a, e| joint[(a, e)] * sigma as f64 / evidence[e]);
    Ok(info.clamp(0.0, (sigma as f64).log2()))
}

/// Per-block probability that Eve's outcome has the true target count `k_j`.
pub fn k_inference_factors(scheme: &LtpfScheme, eta: f64) -> Result<Vec<f64>> {
    let blocks = eve_blocks(scheme, eta)?;
    Ok(blocks
        .iter()
        .zip(scheme.assignment.targets())
        .map(|(b, &k)| {
            // One minus the mass on wrong target counts, so blocks where every
            // outcome has weight k_j give exactly 1.
            let misses: f64 = b
                .alice_rows
                .iter()
                .map(|&r| (0..b.weights.len()).filter(|&c| b.weights[c] != k).map(|c| b.conditional[(r, c)]).sum::<f64>())
                .sum();
            (1.0 - misses / b.alice_rows.len() as f64).clamp(0.0, 1.0)
        })
        .collect())
}

/// Probability that Eve infers the whole assignment `K` from her outcomes.
pub fn k_inference_prob(scheme: &LtpfScheme, eta: f64) -> Result<f64> {
    Ok(k_inference_factors(scheme, eta)?.iter().product())
}

/// Eve's Holevo information on the `1 - eta` arm for the true codebook.
pub fn holevo_ae(scheme: &LtpfScheme, eta: f64) -> Result<f64> {
    let space = build_image_space(scheme)?;
    holevo(&space, &Priors::uniform(space.len())?, &ChannelParams::eve(eta)?)
}

/// Every information quantity entering the LTPF rate hierarchy at one `eta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LtpfInformation {
    pub eta: f64,
    pub i_ab: f64,
    pub i_ae: f64,
    pub chi_ae: f64,
    pub i_ae_unbiased: f64,
    pub p_dec: f64,
}

impl LtpfInformation {
    pub fn compute(scheme: &LtpfScheme, eta: f64) -> Result<Self> {
        Ok(Self {
            eta,
            i_ab: mutual_info_ab(scheme, eta)?,
            i_ae: mutual_info_ae(scheme, eta)?,
            chi_ae: holevo_ae(scheme, eta)?,
            i_ae_unbiased: mutual_info_ae_unbiased(scheme, eta)?,
            p_dec: k_inference_prob(scheme, eta)?,
        })
    }

    pub fn rate_collective(&self) -> f64 {
        self.i_ab - self.chi_ae
    }

    pub fn rate_individual(&self) -> f64 {
        self.i_ab - self.i_ae
    }

    pub fn rate_probabilistic(&self) -> f64 {
        self.i_ab - self.p_dec * self.i_ae_unbiased
    }
}

/// `I_AB(eta) - chi_AE(1 - eta)`.
pub fn rate_collective(scheme: &LtpfScheme, eta: f64) -> Result<f64> {
    Ok(mutual_info_ab(scheme, eta)? - holevo_ae(scheme, eta)?)
}

/// `I_AB(eta) - I_AE(1 - eta)` with Eve using the true scheme.
pub fn rate_individual(scheme: &LtpfScheme, eta: f64) -> Result<f64> {
    Ok(mutual_info_ab(scheme, eta)? - mutual_info_ae(scheme, eta)?)
}

/// `I_AB(eta) - p_dec * I_AE^S(1 - eta)` for the probabilistic attack.
pub fn rate_probabilistic(scheme: &LtpfScheme, eta: f64) -> Result<f64> {
    Ok(mutual_info_ab(scheme, eta)? - k_inference_prob(scheme, eta)? * mutual_info_ae_unbiased(scheme, eta)?)
}

//! Pure-state ensemble numerics: overlaps, Gram matrices, pretty good
//! measurements, mixture entropy and Holevo information.
//!
//! All quantities derive from the Gram matrix `G[i, j] = <a_i|a_j>` of the
//! lossy pattern states. For real coherent amplitudes the overlap is
//! `exp(-|a - b|^2 / 2)` per mode, so `G` is real symmetric and every
//! spectral quantity comes from one symmetric eigendecomposition.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pattern::{amplitudes, ChannelParams, ImageSpace, Modulation, Pattern};

/// Eigenvalues below this are treated as numerical noise and clamped to zero.
pub const EIGEN_CLAMP_TOLERANCE: f64 = 1e-10;

/// Tolerance on the normalisation of a prior vector.
pub const PRIOR_TOLERANCE: f64 = 1e-12;

/// Overlap `<a|b>` of two lossy coherent pattern states.
pub fn pattern_overlap(
    a: &Pattern,
    b: &Pattern,
    modulation: &Modulation,
    channel: &ChannelParams,
) -> Result<f64> {
    if a.modes() != b.modes() {
        return Err(Error::LengthMismatch(a.modes(), b.modes()));
    }
    let xa = amplitudes(a, modulation, channel)?;
    let xb = amplitudes(b, modulation, channel)?;
    Ok(overlap_from_amplitudes(&xa, &xb))
}

fn overlap_from_amplitudes(a: &[f64], b: &[f64]) -> f64 {
    let distance: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-0.5 * distance).exp()
}

/// Gram matrix of an ensemble with its eigendecomposition and square root.
#[derive(Debug, Clone)]
pub struct GramSpectrum {
    gram: DMatrix<f64>,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
    sqrt_gram: DMatrix<f64>,
}

impl GramSpectrum {
    /// Decomposes a symmetric positive semidefinite matrix.
    ///
    /// Eigenvalues are sorted in descending order; values in
    /// `[-EIGEN_CLAMP_TOLERANCE, 0)` are clamped to zero.
    pub fn from_matrix(gram: DMatrix<f64>) -> Result<Self> {
        if gram.nrows() != gram.ncols() {
            return Err(Error::NotSquare(gram.nrows(), gram.ncols()));
        }
        let (eigenvalues, eigenvectors) = symmetric_eigen_sorted(&gram)?;
        let root = eigenvalues.map(f64::sqrt);
        let sqrt_gram = &eigenvectors * DMatrix::from_diagonal(&root) * eigenvectors.transpose();
        Ok(Self { gram, eigenvalues, eigenvectors, sqrt_gram })
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// Clamped eigenvalues, descending.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors, one per column, matching [`Self::eigenvalues`].
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn sqrt_gram(&self) -> &DMatrix<f64> {
        &self.sqrt_gram
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }
}

/// Symmetric eigendecomposition with descending, clamped eigenvalues.
fn symmetric_eigen_sorted(matrix: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = matrix.nrows();
    let eig = SymmetricEigen::new(matrix.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]).then(i.cmp(&j)));
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if n > 0 && min < -EIGEN_CLAMP_TOLERANCE {
        return Err(Error::NotPositiveSemidefinite(min));
    }
    // Round-off in a (near-)degenerate spectrum leaves eigenvalues of order
    // n * eps * lambda_max that the square root would amplify to ~1e-8.
    let max = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let noise = max * n as f64 * f64::EPSILON;
    let values = DVector::from_iterator(
        n,
        order.iter().map(|&i| {
            let v = eig.eigenvalues[i];
            if v <= noise { 0.0 } else { v }
        }),
    );
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    Ok((values, vectors))
}

/// Gram matrix of the lossy ensemble generated by `space`, in space order.
pub fn gram_matrix(space: &ImageSpace, channel: &ChannelParams) -> Result<DMatrix<f64>> {
    let modulation = space.modulation();
    let amps = space
        .patterns()
        .iter()
        .map(|p| amplitudes(p, modulation, channel))
        .collect::<Result<Vec<_>>>()?;
    let n = amps.len();
    let mut g = DMatrix::from_element(n, n, 1.0);
    for i in 0..n {
        for j in i + 1..n {
            let v = overlap_from_amplitudes(&amps[i], &amps[j]);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(g)
}

pub fn gram(space: &ImageSpace, channel: &ChannelParams) -> Result<GramSpectrum> {
    GramSpectrum::from_matrix(gram_matrix(space, channel)?)
}

/// PGM outcome probabilities `p(B | A) = (sqrt G)[A, B]^2`; row `A` is the sent state.
pub fn pgm_conditional(spectrum: &GramSpectrum) -> DMatrix<f64> {
    spectrum.sqrt_gram().map(|x| x * x)
}

/// Average PGM error for equiprobable states, `1 - ((1/N) sum_i sqrt(lambda_i))^2`.
pub fn pgm_error_from_spectrum(spectrum: &GramSpectrum) -> f64 {
    let n = spectrum.dim() as f64;
    let root_sum: f64 = spectrum.eigenvalues().iter().map(|l| l.sqrt()).sum();
    let success = (root_sum / n).powi(2);
    (1.0 - success).clamp(0.0, 1.0 - 1.0 / n)
}

pub fn pgm_error(space: &ImageSpace, channel: &ChannelParams) -> Result<f64> {
    Ok(pgm_error_from_spectrum(&gram(space, channel)?))
}

/// A-priori probabilities of the states in an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Priors(Vec<f64>);

impl Priors {
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        let sum: f64 = probabilities.iter().sum();
        if probabilities.is_empty()
            || probabilities.iter().any(|p| !p.is_finite() || *p < 0.0)
            || (sum - 1.0).abs() > PRIOR_TOLERANCE
        {
            return Err(Error::Priors(sum));
        }
        Ok(Self(probabilities))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyImageSpace);
        }
        Ok(Self(vec![1.0 / n as f64; n]))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Shannon entropy in bits of a probability vector, with `0 log 0 = 0`.
pub fn shannon_entropy_bits<'a>(probabilities: impl IntoIterator<Item = &'a f64>) -> f64 {
    -probabilities
        .into_iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.log2())
        .sum::<f64>()
}

/// Von Neumann entropy (bits) of the mixture `sum_i p_i |a_i><a_i|`.
///
/// The non-zero spectrum of the mixture equals that of `D^1/2 G D^1/2` with
/// `D = diag(p)`, so no Fock-space representation is needed.
pub fn mixture_entropy(space: &ImageSpace, priors: &Priors, channel: &ChannelParams) -> Result<f64> {
    if priors.len() != space.len() {
        return Err(Error::PriorLength { priors: priors.len(), states: space.len() });
    }
    let g = gram_matrix(space, channel)?;
    let w = DVector::from_iterator(priors.len(), priors.as_slice().iter().map(|p| p.sqrt()));
    let weighted = DMatrix::from_fn(g.nrows(), g.ncols(), |i, j| w[i] * g[(i, j)] * w[j]);
    let (values, _) = symmetric_eigen_sorted(&weighted)?;
    let h = shannon_entropy_bits(values.iter());
    Ok(h.clamp(0.0, (space.len() as f64).log2()))
}

/// Holevo information of a pure-state ensemble through a pure-loss channel.
///
/// Each lossy state stays pure, so the average-entropy term vanishes and
/// `chi` equals the mixture entropy.
pub fn holevo(space: &ImageSpace, priors: &Priors, channel: &ChannelParams) -> Result<f64> {
    mixture_entropy(space, priors, channel)
}

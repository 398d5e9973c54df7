//! Patterns, local modulations, image spaces and the pure-loss channel.
//!
//! A [`Pattern`] is the classical index of an `m`-mode coherent state: mode
//! `j` carries the coherent amplitude assigned to symbol `i_j` by the
//! [`Modulation`]. Two-dimensional (spatio-temporal) patterns are always
//! handled in flattened form.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::combinatorics::binomial_u128;
use crate::error::{Error, Result};

/// Local alphabet size used by every operation in this crate.
pub const BINARY: u8 = 2;

/// Classical symbol string indexing a coherent pattern state.
///
/// Ordering is the lexicographic order of the symbol vectors.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern {
    symbols: Vec<u8>,
}

impl Pattern {
    /// Builds a pattern over a `arity`-ary local alphabet.
    pub fn new(symbols: Vec<u8>, arity: u8) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::EmptyPattern);
        }
        if let Some((mode, &symbol)) = symbols.iter().enumerate().find(|(_, &s)| s >= arity) {
            return Err(Error::SymbolOutOfRange { mode, symbol, arity });
        }
        Ok(Self { symbols })
    }

    pub fn binary(symbols: Vec<u8>) -> Result<Self> {
        Self::new(symbols, BINARY)
    }

    /// Binary pattern with ones at `targets` and zeros elsewhere.
    pub fn from_targets(modes: usize, targets: &[usize]) -> Result<Self> {
        let mut symbols = vec![0u8; modes];
        for &t in targets {
            if t >= modes {
                return Err(Error::ModeOutOfRange { mode: t, modes });
            }
            symbols[t] = 1;
        }
        Self::binary(symbols)
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn modes(&self) -> usize {
        self.symbols.len()
    }

    /// Number of non-background (non-zero) symbols.
    pub fn weight(&self) -> usize {
        self.symbols.iter().filter(|&&s| s != 0).count()
    }

    pub fn hamming_distance(&self, other: &Pattern) -> Result<usize> {
        if self.modes() != other.modes() {
            return Err(Error::LengthMismatch(self.modes(), other.modes()));
        }
        Ok(self.symbols.iter().zip(&other.symbols).filter(|(a, b)| a != b).count())
    }

    /// Concatenates sub-patterns placed at the given mode indices.
    pub(crate) fn scatter(modes: usize, pieces: &[(&[usize], &Pattern)]) -> Result<Self> {
        let mut symbols = vec![0u8; modes];
        for (indices, piece) in pieces {
            for (&mode, &symbol) in indices.iter().zip(piece.symbols()) {
                symbols[mode] = symbol;
            }
        }
        Self::binary(symbols)
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.symbols {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl FromStr for Pattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let symbols = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(0u8),
                '1' => Ok(1u8),
                _ => Err(Error::PatternSyntax(s.to_string())),
            })
            .collect::<Result<Vec<_>>>()?;
        if symbols.is_empty() {
            return Err(Error::PatternSyntax(s.to_string()));
        }
        Self::binary(symbols)
    }
}

impl Serialize for Pattern {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Pattern {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModulationKind {
    /// Background `-sqrt(N_S)`, target `+sqrt(N_S)`.
    Bpsk,
    /// Background vacuum, target `+sqrt(N_S)`.
    Bam,
}

impl ModulationKind {
    /// Exponent factor in the single-mode Helstrom error `exp(-kappa * eta * N_S)`.
    pub fn kappa(self) -> f64 {
        match self {
            ModulationKind::Bpsk => 4.0,
            ModulationKind::Bam => 1.0,
        }
    }
}

impl FromStr for ModulationKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "bpsk" => Ok(Self::Bpsk),
            "bam" => Ok(Self::Bam),
            other => Err(format!("unknown modulation {other:?} (expected bpsk or bam)")),
        }
    }
}

/// Binary local modulation with `mean_photons` per target mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Modulation {
    kind: ModulationKind,
    mean_photons: f64,
}

impl Modulation {
    pub fn new(kind: ModulationKind, mean_photons: f64) -> Result<Self> {
        if !mean_photons.is_finite() || mean_photons < 0.0 {
            return Err(Error::MeanPhotons(mean_photons));
        }
        Ok(Self { kind, mean_photons })
    }

    pub fn bpsk(mean_photons: f64) -> Result<Self> {
        Self::new(ModulationKind::Bpsk, mean_photons)
    }

    pub fn bam(mean_photons: f64) -> Result<Self> {
        Self::new(ModulationKind::Bam, mean_photons)
    }

    pub fn kind(&self) -> ModulationKind {
        self.kind
    }

    pub fn mean_photons(&self) -> f64 {
        self.mean_photons
    }

    /// Lossless amplitude of a local symbol.
    pub fn symbol_amplitude(&self, symbol: u8) -> Result<f64> {
        let a = self.mean_photons.sqrt();
        match (self.kind, symbol) {
            (ModulationKind::Bpsk, 0) => Ok(-a),
            (ModulationKind::Bpsk, 1) => Ok(a),
            (ModulationKind::Bam, 0) => Ok(0.0),
            (ModulationKind::Bam, 1) => Ok(a),
            (_, symbol) => Err(Error::SymbolOutOfRange { mode: 0, symbol, arity: BINARY }),
        }
    }
}

/// Which output arm of the beam splitter is observed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Bob,
    Eve,
}

impl FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "bob" => Ok(Self::Bob),
            "eve" => Ok(Self::Eve),
            other => Err(format!("unknown side {other:?} (expected bob or eve)")),
        }
    }
}

/// Uniform pure-loss channel seen from one side of the beam splitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    transmissivity: f64,
    side: Side,
}

impl ChannelParams {
    pub fn new(transmissivity: f64, side: Side) -> Result<Self> {
        if !(0.0..=1.0).contains(&transmissivity) {
            return Err(Error::Transmissivity(transmissivity));
        }
        Ok(Self { transmissivity, side })
    }

    pub fn bob(transmissivity: f64) -> Result<Self> {
        Self::new(transmissivity, Side::Bob)
    }

    pub fn eve(transmissivity: f64) -> Result<Self> {
        Self::new(transmissivity, Side::Eve)
    }

    pub fn transmissivity(&self) -> f64 {
        self.transmissivity
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// Fraction of the input power reaching this side: `eta` for Bob, `1 - eta` for Eve.
    pub fn effective_transmissivity(&self) -> f64 {
        match self.side {
            Side::Bob => self.transmissivity,
            Side::Eve => 1.0 - self.transmissivity,
        }
    }

    /// Same channel observed from the other side.
    pub fn swapped(&self) -> Self {
        let side = match self.side {
            Side::Bob => Side::Eve,
            Side::Eve => Side::Bob,
        };
        Self { transmissivity: self.transmissivity, side }
    }
}

/// Amplitude of `mode` of the lossy pattern state: `sqrt(eta_eff) * alpha_{i_mode}`.
pub fn amplitude(
    pattern: &Pattern,
    mode: usize,
    modulation: &Modulation,
    channel: &ChannelParams,
) -> Result<f64> {
    let symbol = *pattern
        .symbols()
        .get(mode)
        .ok_or(Error::ModeOutOfRange { mode, modes: pattern.modes() })?;
    let alpha = modulation
        .symbol_amplitude(symbol)
        .map_err(|_| Error::SymbolOutOfRange { mode, symbol, arity: BINARY })?;
    Ok(channel.effective_transmissivity().sqrt() * alpha)
}

/// Amplitudes of every mode of `pattern` after the channel.
pub fn amplitudes(
    pattern: &Pattern,
    modulation: &Modulation,
    channel: &ChannelParams,
) -> Result<Vec<f64>> {
    (0..pattern.modes()).map(|mode| amplitude(pattern, mode, modulation, channel)).collect()
}

/// Ordered set of distinct, equal-length patterns together with their modulation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImageSpace {
    patterns: Vec<Pattern>,
    modulation: Modulation,
}

impl ImageSpace {
    pub fn new(patterns: Vec<Pattern>, modulation: Modulation) -> Result<Self> {
        let first = patterns.first().ok_or(Error::EmptyImageSpace)?;
        let modes = first.modes();
        let mut seen = HashSet::with_capacity(patterns.len());
        for p in &patterns {
            if p.modes() != modes {
                return Err(Error::LengthMismatch(modes, p.modes()));
            }
            if !seen.insert(p) {
                return Err(Error::DuplicatePattern(p.to_string()));
            }
        }
        Ok(Self { patterns, modulation })
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    pub fn modulation(&self) -> &Modulation {
        &self.modulation
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn modes(&self) -> usize {
        self.patterns[0].modes()
    }

    pub fn index_of(&self, pattern: &Pattern) -> Option<usize> {
        self.patterns.iter().position(|p| p == pattern)
    }

    /// Same patterns under a different modulation.
    pub fn with_modulation(&self, modulation: Modulation) -> Self {
        Self { patterns: self.patterns.clone(), modulation }
    }

    /// Union of spaces in order, keeping the first occurrence of repeated patterns.
    pub fn union(spaces: &[ImageSpace]) -> Result<Self> {
        let first = spaces.first().ok_or(Error::EmptyImageSpace)?;
        let mut seen = HashSet::new();
        let mut patterns = Vec::new();
        for space in spaces {
            for p in &space.patterns {
                if seen.insert(p.clone()) {
                    patterns.push(p.clone());
                }
            }
        }
        Self::new(patterns, first.modulation)
    }
}

/// Target-position lists of size `k` drawn from `0..m`, in lexicographic order.
pub(crate) fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > m {
        return out;
    }
    let mut current: Vec<usize> = (0..k).collect();
    loop {
        out.push(current.clone());
        // advance the rightmost position that still has room
        let Some(i) = (0..k).rev().find(|&i| current[i] < m - k + i) else {
            return out;
        };
        current[i] += 1;
        for j in i + 1..k {
            current[j] = current[j - 1] + 1;
        }
    }
}

/// All `m`-mode patterns with exactly `k` targets.
///
/// Patterns are listed in lexicographic order of their target positions, so
/// `(3, 1)` gives `100, 010, 001`.
pub fn enumerate_ktpf(m: usize, k: usize, modulation: Modulation) -> Result<ImageSpace> {
    if k == 0 || k >= m {
        return Err(Error::TargetCount { modes: m, targets: k });
    }
    let patterns = combinations(m, k)
        .iter()
        .map(|targets| Pattern::from_targets(m, targets))
        .collect::<Result<Vec<_>>>()?;
    ImageSpace::new(patterns, modulation)
}

/// True when every pattern has the same weight `w` and all `C(m, w)` such
/// patterns are present (the permutation orbit of a k-TPF space).
pub fn is_gus_ktpf(space: &ImageSpace) -> bool {
    let weight = space.patterns[0].weight();
    if space.patterns.iter().any(|p| p.weight() != weight) {
        return false;
    }
    binomial_u128(space.modes() as u64, weight as u64) == Some(space.len() as u128)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(strs: &[&str]) -> ImageSpace {
        let patterns = strs.iter().map(|s| s.parse().unwrap()).collect();
        ImageSpace::new(patterns, Modulation::bpsk(1.0).unwrap()).unwrap()
    }

    fn strings(space: &ImageSpace) -> Vec<String> {
        space.patterns().iter().map(|p| p.to_string()).collect()
    }

    #[test]
    fn amplitude_examples() {
        let one: Pattern = "1".parse().unwrap();
        let zero: Pattern = "0".parse().unwrap();
        let m1 = Modulation::bpsk(1.0).unwrap();
        assert_eq!(amplitude(&one, 0, &m1, &ChannelParams::bob(1.0).unwrap()).unwrap(), 1.0);
        assert_eq!(amplitude(&zero, 0, &m1, &ChannelParams::bob(0.0).unwrap()).unwrap(), 0.0);
        let m = Modulation::bpsk(0.25).unwrap();
        let a = amplitude(&one, 0, &m, &ChannelParams::bob(0.64).unwrap()).unwrap();
        assert!((a - 0.4).abs() < 1e-15);
    }

    #[test]
    fn amplitude_errors() {
        let p: Pattern = "01".parse().unwrap();
        let m = Modulation::bam(1.0).unwrap();
        let ch = ChannelParams::bob(0.5).unwrap();
        assert_eq!(amplitude(&p, 2, &m, &ch), Err(Error::ModeOutOfRange { mode: 2, modes: 2 }));
        assert!(matches!(ChannelParams::bob(1.5), Err(Error::Transmissivity(_))));
        assert!(matches!(ChannelParams::eve(-0.1), Err(Error::Transmissivity(_))));
        assert!(Modulation::bpsk(-1.0).is_err());
    }

    #[test]
    fn eve_sees_complementary_transmissivity() {
        let ch = ChannelParams::eve(0.3).unwrap();
        assert!((ch.effective_transmissivity() - 0.7).abs() < 1e-15);
        assert_eq!(ch.swapped().side(), Side::Bob);
    }

    #[test]
    fn bam_background_is_vacuum() {
        let m = Modulation::bam(2.0).unwrap();
        assert_eq!(m.symbol_amplitude(0).unwrap(), 0.0);
        assert!((m.symbol_amplitude(1).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ktpf_listings() {
        let m = Modulation::bpsk(1.0).unwrap();
        assert_eq!(strings(&enumerate_ktpf(3, 1, m).unwrap()), ["100", "010", "001"]);
        assert_eq!(strings(&enumerate_ktpf(3, 2, m).unwrap()), ["110", "101", "011"]);
        assert_eq!(enumerate_ktpf(4, 2, m).unwrap().len(), 6);
    }

    #[test]
    fn ktpf_rejects_degenerate_target_counts() {
        let m = Modulation::bpsk(1.0).unwrap();
        assert!(enumerate_ktpf(3, 0, m).is_err());
        assert!(enumerate_ktpf(3, 3, m).is_err());
        assert!(enumerate_ktpf(1, 1, m).is_err());
    }

    #[test]
    fn ktpf_cardinality_and_order_exhaustive() {
        let m = Modulation::bpsk(1.0).unwrap();
        for modes in 2..=12usize {
            for k in 1..modes {
                let s = enumerate_ktpf(modes, k, m).unwrap();
                assert_eq!(s.len() as u128, binomial_u128(modes as u64, k as u64).unwrap());
                // distinct target-position lists in strictly increasing order
                let positions: Vec<Vec<usize>> = s
                    .patterns()
                    .iter()
                    .map(|p| p.symbols().iter().enumerate().filter(|(_, &v)| v == 1).map(|(i, _)| i).collect())
                    .collect();
                assert!(positions.windows(2).all(|w| w[0] < w[1]));
                assert!(s.patterns().iter().all(|p| p.weight() == k));
            }
        }
    }

    #[test]
    fn gus_detection() {
        let m = Modulation::bpsk(1.0).unwrap();
        assert!(is_gus_ktpf(&enumerate_ktpf(3, 1, m).unwrap()));
        assert!(!is_gus_ktpf(&space(&["100", "010"])));
        let mixed = ImageSpace::union(&[enumerate_ktpf(3, 1, m).unwrap(), enumerate_ktpf(3, 2, m).unwrap()]).unwrap();
        assert_eq!(mixed.len(), 6);
        assert!(!is_gus_ktpf(&mixed));
    }

    #[test]
    fn image_space_validation() {
        let m = Modulation::bpsk(1.0).unwrap();
        let a: Pattern = "01".parse().unwrap();
        let b: Pattern = "011".parse().unwrap();
        assert_eq!(ImageSpace::new(vec![], m), Err(Error::EmptyImageSpace));
        assert!(matches!(ImageSpace::new(vec![a.clone(), a.clone()], m), Err(Error::DuplicatePattern(_))));
        assert!(matches!(ImageSpace::new(vec![a, b], m), Err(Error::LengthMismatch(2, 3))));
    }

    #[test]
    fn pattern_parsing() {
        assert!("".parse::<Pattern>().is_err());
        assert!("0120".parse::<Pattern>().is_err());
        assert_eq!(Pattern::new(vec![0, 2], 3).unwrap().weight(), 1);
        assert!(Pattern::new(vec![0, 3], 3).is_err());
        let p: Pattern = "0110".parse().unwrap();
        assert_eq!(serde_json::to_string(&p).unwrap(), "\"0110\"");
        let back: Pattern = serde_json::from_str("\"0110\"").unwrap();
        assert_eq!(back, p);
    }

    proptest::proptest! {
        #[test]
        fn loss_scales_amplitude_by_sqrt_eta(eta in 0.0f64..=1.0, ns in 0.0f64..5.0, symbol in 0u8..2, bam: bool) {
            let m = if bam { Modulation::bam(ns).unwrap() } else { Modulation::bpsk(ns).unwrap() };
            let p = Pattern::binary(vec![symbol]).unwrap();
            let lossless = amplitude(&p, 0, &m, &ChannelParams::bob(1.0).unwrap()).unwrap();
            let lossy = amplitude(&p, 0, &m, &ChannelParams::bob(eta).unwrap()).unwrap();
            proptest::prop_assert!((lossy - eta.sqrt() * lossless).abs() < 1e-12);
        }
    }
}

//! Secure-rate hierarchy: collective, individual, diminished and
//! probabilistic attacks.
//!
//! Rates are reported as computed, negative values included.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ltpf::{LtpfInformation, LtpfScheme};
use crate::pattern::Modulation;

/// Slack used when checking the rate ordering.
pub const HIERARCHY_SLACK: f64 = 1e-9;

/// Information quantities feeding [`assemble`]; missing inputs leave the
/// corresponding tiers unset.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RateInputs {
    pub i_ab: f64,
    /// Eve's information with the same decoder as Bob (individual attack).
    pub i_ae: Option<f64>,
    /// Eve's Holevo information (collective attack).
    pub chi_ae: Option<f64>,
    /// Eve's information with a diminished codebook.
    pub i_ae_dim: Option<f64>,
    /// Eve's information when she must infer the codebook.
    pub i_ae_unbiased: Option<f64>,
    /// Probability that she infers it correctly.
    pub p_dec: Option<f64>,
}

/// One point of a rate curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePoint {
    pub eta: f64,
    pub ns: f64,
    pub i_ab: f64,
    pub i_ae: Option<f64>,
    pub chi_ae: Option<f64>,
    pub p_dec: Option<f64>,
    pub r_coll: Option<f64>,
    pub r_ind: Option<f64>,
    pub r_dim: Option<f64>,
    pub r_pr: Option<f64>,
}

impl RatePoint {
    /// True when every pair of populated tiers obeys
    /// `r_coll <= r_ind <= r_dim <= r_pr` within `slack`.
    pub fn hierarchy_holds(&self, slack: f64) -> bool {
        let tiers: Vec<f64> = [self.r_coll, self.r_ind, self.r_dim, self.r_pr].into_iter().flatten().collect();
        tiers.windows(2).all(|w| w[0] <= w[1] + slack)
    }
}

/// Combines information quantities into the rate tiers.
pub fn assemble(eta: f64, ns: f64, inputs: RateInputs) -> Result<RatePoint> {
    if let Some(p) = inputs.p_dec {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Probability(p));
        }
    }
    let i_ab = inputs.i_ab;
    Ok(RatePoint {
        eta,
        ns,
        i_ab,
        i_ae: inputs.i_ae,
        chi_ae: inputs.chi_ae,
        p_dec: inputs.p_dec,
        r_coll: inputs.chi_ae.map(|chi| i_ab - chi),
        r_ind: inputs.i_ae.map(|i| i_ab - i),
        r_dim: inputs.i_ae_dim.map(|i| i_ab - i),
        r_pr: inputs.p_dec.zip(inputs.i_ae_unbiased).map(|(p, i)| i_ab - p * i),
    })
}

impl LtpfInformation {
    /// Full hierarchy for a one-to-one LTPF code, where the diminished attack
    /// coincides with the individual one.
    pub fn rate_point(&self, ns: f64) -> Result<RatePoint> {
        assemble(
            self.eta,
            ns,
            RateInputs {
                i_ab: self.i_ab,
                i_ae: Some(self.i_ae),
                chi_ae: Some(self.chi_ae),
                i_ae_dim: Some(self.i_ae),
                i_ae_unbiased: Some(self.i_ae_unbiased),
                p_dec: Some(self.p_dec),
            },
        )
    }
}

/// Which tiers a sweep evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Attack {
    Collective,
    Individual,
    Probabilistic,
    All,
}

/// LTPF rate curves over `eta_grid x ns_list`, ordered by `ns` then `eta`.
///
/// Points are evaluated in parallel; each is independent so the output does
/// not depend on scheduling.
pub fn sweep_ltpf(scheme: &LtpfScheme, eta_grid: &[f64], ns_list: &[f64], attack: Attack) -> Result<Vec<RatePoint>> {
    if eta_grid.is_empty() || ns_list.is_empty() {
        return Err(Error::EmptyImageSpace);
    }
    if let Some(&bad) = eta_grid.iter().find(|e| !(0.0..=1.0).contains(*e)) {
        return Err(Error::Transmissivity(bad));
    }
    let schemes = ns_list
        .iter()
        .map(|&ns| Ok((ns, scheme.with_modulation(Modulation::new(scheme.modulation().kind(), ns)?))))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(f64, &LtpfScheme, f64)> =
        schemes.iter().flat_map(|(ns, s)| eta_grid.iter().map(move |&eta| (*ns, s, eta))).collect();
    jobs.par_iter().map(|&(ns, s, eta)| ltpf_point(s, eta, ns, attack)).collect()
}

fn ltpf_point(scheme: &LtpfScheme, eta: f64, ns: f64, attack: Attack) -> Result<RatePoint> {
    use crate::ltpf::{holevo_ae, k_inference_prob, mutual_info_ab, mutual_info_ae, mutual_info_ae_unbiased};
    if attack == Attack::All {
        return LtpfInformation::compute(scheme, eta)?.rate_point(ns);
    }
    let mut inputs = RateInputs { i_ab: mutual_info_ab(scheme, eta)?, ..Default::default() };
    match attack {
        Attack::Collective => inputs.chi_ae = Some(holevo_ae(scheme, eta)?),
        Attack::Individual => {
            let i = mutual_info_ae(scheme, eta)?;
            inputs.i_ae = Some(i);
            inputs.i_ae_dim = Some(i);
        }
        Attack::Probabilistic => {
            inputs.p_dec = Some(k_inference_prob(scheme, eta)?);
            inputs.i_ae_unbiased = Some(mutual_info_ae_unbiased(scheme, eta)?);
        }
        Attack::All => unreachable!(),
    }
    assemble(eta, ns, inputs)
}

/// Evenly spaced grid of `count` points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (count - 1) as f64;
            (0..count).map(|i| if i == count - 1 { stop } else { start + step * i as f64 }).collect()
        }
    }
}

//! Mutual-information estimators over joint distributions.

use nalgebra::DMatrix;

/// `log2(alphabet) + sum_{a,b} p(a,b) log2 p(a|b)` for a joint matrix
/// (rows = sent symbol, columns = decoded symbol).
///
/// With uniform sent symbols this is the mutual information. Columns that are
/// never observed contribute nothing.
pub fn conditional_information(joint: &DMatrix<f64>, alphabet: usize) -> f64 {
    let mut acc = 0.0;
    for col in joint.column_iter() {
        let p_b: f64 = col.iter().sum();
        if p_b <= 0.0 {
            continue;
        }
        for &p in col.iter() {
            if p > 0.0 {
                acc += p * (p / p_b).log2();
            }
        }
    }
    (alphabet as f64).log2() + acc
}

/// Same as [`conditional_information`] but with the decoder's own posterior
/// `q(a|b)` in place of the true one: `log2(alphabet) + sum p(a,b) log2 q(a|b)`.
///
/// `posterior(a, b)` is only evaluated where `p(a, b) > 0`.
pub fn mismatched_information(
    joint: &DMatrix<f64>,
    alphabet: usize,
    posterior: impl Fn(usize, usize) -> f64,
) -> f64 {
    let mut acc = 0.0;
    for b in 0..joint.ncols() {
        for a in 0..joint.nrows() {
            let p = joint[(a, b)];
            if p > 0.0 {
                let q = posterior(a, b);
                if q > 0.0 {
                    acc += p * q.log2();
                }
            }
        }
    }
    (alphabet as f64).log2() + acc
}

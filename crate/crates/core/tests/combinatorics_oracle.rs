//! Exhaustive set-partition enumeration checked against the closed-form counts.

use num_bigint::BigUint;
use qpattern::combinatorics::{
    degeneracy_k_given_s, degeneracy_s, degeneracy_s_by_partitions, degeneracy_s_given_k, degeneracy_sk, g_k_given_s,
    multinomial_tilde, partitions, rational_to_f64, stirling_assoc, IntegerPartition,
};

/// All set partitions of `0..m` as sorted block-size lists, via restricted
/// growth strings.
fn set_partition_profiles(m: usize) -> Vec<Vec<usize>> {
    fn rec(i: usize, m: usize, rgs: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<usize>>) {
        if i == m {
            let mut sizes = vec![0; max + 1];
            for &b in rgs.iter() {
                sizes[b] += 1;
            }
            sizes.sort_unstable_by(|a, b| b.cmp(a));
            out.push(sizes);
            return;
        }
        for b in 0..=(max + 1).min(if i == 0 { 0 } else { max + 1 }) {
            rgs.push(b);
            rec(i + 1, m, rgs, max.max(b), out);
            rgs.pop();
        }
    }
    let mut out = Vec::new();
    if m > 0 {
        let mut rgs = vec![0];
        rec(1, m, &mut rgs, 0, &mut out);
    }
    out
}

fn valid_blocks(m: usize) -> Vec<Vec<usize>> {
    set_partition_profiles(m).into_iter().filter(|p| p.iter().all(|&x| x >= 2)).collect()
}

/// Whether some bijection of blocks to targets gives every block `size >= k + 1`.
fn has_matching(sizes: &[usize], targets: &[usize]) -> bool {
    fn rec(sizes: &[usize], targets: &[usize], used: &mut Vec<bool>, j: usize) -> bool {
        if j == targets.len() {
            return true;
        }
        for i in 0..sizes.len() {
            if !used[i] && sizes[i] > targets[j] {
                used[i] = true;
                if rec(sizes, targets, used, j + 1) {
                    return true;
                }
                used[i] = false;
            }
        }
        false
    }
    sizes.len() == targets.len() && rec(sizes, targets, &mut vec![false; sizes.len()], 0)
}

/// Non-increasing target multisets with `sum (k_j + 1) <= m`.
fn target_multisets(m: usize) -> Vec<Vec<usize>> {
    fn rec(budget: usize, max_k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        for k in 1..=max_k {
            if k < budget {
                cur.push(k);
                rec(budget - k - 1, k, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(m, m, &mut Vec::new(), &mut out);
    out
}

fn integer_partitions_min2(m: usize) -> Vec<Vec<usize>> {
    fn rec(rest: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for x in (2..=rest.min(max)).rev() {
            cur.push(x);
            rec(rest - x, x, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, m, &mut Vec::new(), &mut out);
    out
}

fn big(n: usize) -> BigUint {
    BigUint::from(n)
}

#[test]
fn bell_numbers_sanity() {
    let bell = [1, 1, 2, 5, 15, 52, 203, 877, 4140];
    for (m, &b) in bell.iter().enumerate().skip(1) {
        assert_eq!(set_partition_profiles(m).len(), b);
    }
}

#[test]
fn stirling_and_multinomial_match_enumeration() {
    for m in 1..=8 {
        let profiles = set_partition_profiles(m);
        for k in 1..=3 {
            for n in 0..=m {
                let brute = profiles.iter().filter(|p| p.len() == n && p.iter().all(|&x| x >= k)).count();
                assert_eq!(stirling_assoc(k, m, n), big(brute), "S_{k}^{m}({n})");
            }
        }
        for n in 1..=m {
            for part in partitions(m, n, 1) {
                let brute = profiles.iter().filter(|p| p.as_slice() == part.parts()).count();
                assert_eq!(multinomial_tilde(m, &part).unwrap(), big(brute), "{:?}", part.parts());
            }
        }
    }
}

#[test]
fn degeneracies_match_enumeration() {
    for m in 2..=8 {
        let blocks = valid_blocks(m);
        assert_eq!(degeneracy_s(m).unwrap(), big(blocks.len()), "G_S({m})");

        let sk: usize = blocks.iter().map(|p| p.iter().map(|x| x - 1).product::<usize>()).sum();
        assert_eq!(degeneracy_sk(m).unwrap(), big(sk), "G_SK({m})");

        for sizes in &blocks {
            // Count K vectors directly.
            let mut count = 0usize;
            let mut k = vec![1usize; sizes.len()];
            'outer: loop {
                count += 1;
                for j in 0..k.len() {
                    if k[j] + 1 < sizes[j] {
                        k[j] += 1;
                        continue 'outer;
                    }
                    k[j] = 1;
                }
                break;
            }
            assert_eq!(degeneracy_k_given_s(sizes).unwrap(), big(count));
        }

        for targets in target_multisets(m) {
            let brute = blocks.iter().filter(|p| has_matching(p, &targets)).count();
            assert_eq!(degeneracy_s_given_k(m, &targets).unwrap(), big(brute), "G_S|K({m}, {targets:?})");
        }
    }
}

#[test]
fn dual_formula_agrees_up_to_twelve() {
    for m in 2..=12 {
        assert_eq!(degeneracy_s(m).unwrap(), degeneracy_s_by_partitions(m).unwrap(), "m = {m}");
    }
}

#[test]
fn partition_listing_matches_oracle() {
    for m in 2..=12 {
        let mut ours: Vec<Vec<usize>> =
            (1..=m / 2).flat_map(|n| partitions(m, n, 2)).map(|p: IntegerPartition| p.parts().to_vec()).collect();
        let mut oracle = integer_partitions_min2(m);
        ours.sort();
        oracle.sort();
        assert_eq!(ours, oracle);
    }
    assert!(partitions(11, 3, 2).iter().any(|p| p.parts() == [5, 3, 3]));
}

#[test]
fn closed_form_bound_dominates_brute_force() {
    // The closed form is an upper bound on max prod(x_j - 1); equality for
    // every m is checked (and reported) by the acceptance suite.
    for m in 2..=12 {
        let brute = integer_partitions_min2(m).iter().map(|p| p.iter().map(|x| x - 1).product::<usize>()).max().unwrap();
        let g = rational_to_f64(&g_k_given_s(m).unwrap());
        assert!(g + 1e-12 >= brute as f64, "m = {m}: g = {g}, brute = {brute}");
    }
}

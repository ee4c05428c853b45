//! Independent oracles shared by the integration suites.
//!
//! Everything here recomputes expectations from first principles — plain
//! loops over distance matrices, library-independent samplers — so the tests
//! check the optimized implementations against a second route.

#![allow(dead_code)]

use ndarray::Array2;
use rand::Rng;
use rand_distr::Distribution;
use repalign::agent::DistanceMatrix;
use repalign::rng::derive_rng;

/// Canonical triplet answers by direct triple loop: for each anchor `i`, each
/// pair `j < k` excluding `i`, push `(d(i,j) < d(i,k), d(i,j) == d(i,k))`.
pub fn brute_force_triplet_bits(dm: &DistanceMatrix) -> (Vec<bool>, Vec<bool>) {
    let n = dm.n();
    let mut bits = Vec::new();
    let mut ties = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if j == i {
                continue;
            }
            for k in (j + 1)..n {
                if k == i {
                    continue;
                }
                bits.push(dm.get(i, j) < dm.get(i, k));
                ties.push(dm.get(i, j) == dm.get(i, k));
            }
        }
    }
    (bits, ties)
}

/// Misalignment from raw bool vectors, including or excluding tie positions.
pub fn brute_force_misalignment(
    bits_a: &[bool],
    ties_a: &[bool],
    bits_b: &[bool],
    ties_b: &[bool],
    exclude_ties: bool,
) -> Option<f64> {
    assert_eq!(bits_a.len(), bits_b.len());
    let mut counted = 0usize;
    let mut flips = 0usize;
    for idx in 0..bits_a.len() {
        if exclude_ties && (ties_a[idx] || ties_b[idx]) {
            continue;
        }
        counted += 1;
        if bits_a[idx] != bits_b[idx] {
            flips += 1;
        }
    }
    if counted == 0 {
        return None;
    }
    Some(flips as f64 / counted as f64)
}

/// Monte-Carlo estimate of `E[max of k iid Binomial(n, p)]`, using the
/// `rand_distr` sampler rather than any CDF formula. Returns (mean, std_err).
pub fn mc_expected_max_binomial(
    n: u64,
    p: f64,
    k: u64,
    draws: usize,
    seed: u64,
) -> (f64, f64) {
    let mut rng = derive_rng(seed, "mc-max-binomial", 0);
    let binomial = rand_distr::Binomial::new(n, p).expect("valid parameters");
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..draws {
        let mut max = 0u64;
        for _ in 0..k {
            max = max.max(binomial.sample(&mut rng));
        }
        let v = max as f64;
        sum += v;
        sum_sq += v * v;
    }
    let mean = sum / draws as f64;
    let var = (sum_sq / draws as f64 - mean * mean).max(0.0);
    (mean, (var / draws as f64).sqrt())
}

/// Pool-adjacent-violators fit of a nondecreasing sequence (unit weights).
pub fn pava_nondecreasing(values: &[f64]) -> Vec<f64> {
    let mut level: Vec<f64> = Vec::new();
    let mut weight: Vec<f64> = Vec::new();
    let mut count: Vec<usize> = Vec::new();
    for &v in values {
        level.push(v);
        weight.push(v);
        count.push(1);
        while level.len() > 1 {
            let last = level.len() - 1;
            if level[last - 1] <= level[last] {
                break;
            }
            // merge the two violating blocks
            let merged_count = count[last - 1] + count[last];
            let merged_weight = weight[last - 1] + weight[last];
            level.truncate(last);
            weight.truncate(last);
            count.truncate(last);
            let idx = level.len() - 1;
            count[idx] = merged_count;
            weight[idx] = merged_weight;
            level[idx] = merged_weight / merged_count as f64;
        }
    }
    let mut out = Vec::with_capacity(values.len());
    for (lvl, c) in level.iter().zip(&count) {
        for _ in 0..*c {
            out.push(*lvl);
        }
    }
    out
}

/// Random dense symmetric distance matrix with optional value snapping (to
/// force exact ties).
pub fn random_distance_matrix(n: usize, snap: bool, seed: u64) -> DistanceMatrix {
    let mut rng = derive_rng(seed, "oracle-distances", 0);
    let mut values = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let mut v: f64 = rng.gen::<f64>() * 10.0;
            if snap {
                v = (v * 2.0).round() / 2.0;
            }
            values[[i, j]] = v;
            values[[j, i]] = v;
        }
    }
    DistanceMatrix::from_values(values).expect("symmetric by construction")
}

//! Binomial coefficients and the colexicographic combinatorial number system.
//!
//! A strictly increasing tuple `i_1 < i_2 < ... < i_k` has colex rank
//! `C(i_1, 1) + C(i_2, 2) + ... + C(i_k, k)`. Tuples sharing the same largest
//! element form one contiguous block of ranks, which lets cost evaluation
//! stream through the coefficient table with nested loops.

/// Exact `C(n, k)` for `n <= 64`; saturates at `u64::MAX` beyond that.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc * (n - j) as u128 / (j + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// `C(n, k)` as a float, usable far beyond the `u64` range.
pub fn binomial_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Colex rank of a strictly increasing tuple.
pub fn colex_rank(tuple: &[usize]) -> u64 {
    debug_assert!(tuple.windows(2).all(|w| w[0] < w[1]));
    tuple
        .iter()
        .enumerate()
        .map(|(k, &i)| binomial(i, k + 1))
        .sum()
}

/// Inverse of [`colex_rank`] for tuples of length `order`.
pub fn colex_unrank(mut rank: u64, order: usize) -> Vec<usize> {
    let mut tuple = vec![0; order];
    for k in (1..=order).rev() {
        // largest c with C(c, k) <= rank
        let mut c = k - 1;
        while binomial(c + 1, k) <= rank {
            c += 1;
        }
        tuple[k - 1] = c;
        rank -= binomial(c, k);
    }
    tuple
}

//! Order-statistic helpers behind the O(N log N) rank estimators.
//!
//! All comparisons use `<` on finite values, so tied observations (including
//! `-0.0` against `0.0`) contribute sign zero.

use std::cmp::Ordering;

fn cmp(a: f64, b: f64) -> Ordering {
    a.partial_cmp(&b).expect("finite values")
}

/// Sign of `a − b` as an integer in `{−1, 0, 1}`.
pub fn sign(a: f64, b: f64) -> i64 {
    match cmp(a, b) {
        Ordering::Less => -1,
        Ordering::Equal => 0,
        Ordering::Greater => 1,
    }
}

/// For every position `a`, `Σ_{b≠a} sgn(x_a − x_b)`, i.e. the number of
/// smaller values minus the number of larger values.
pub fn sign_rank_sums(xs: &[f64]) -> Vec<i64> {
    let n = xs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| cmp(xs[i], xs[j]));
    let mut sums = vec![0i64; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && xs[order[end]] == xs[order[start]] {
            end += 1;
        }
        let less = start as i64;
        let greater = (n - end) as i64;
        for &i in &order[start..end] {
            sums[i] = less - greater;
        }
        start = end;
    }
    sums
}

fn tied_pairs<T: PartialEq>(sorted: impl Iterator<Item = T>) -> i64 {
    let mut total = 0i64;
    let mut run = 0i64;
    let mut prev: Option<T> = None;
    for item in sorted {
        if prev.as_ref() == Some(&item) {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
        prev = Some(item);
    }
    total + run * (run - 1) / 2
}

/// Counts pairs `i < j` with `v[i] > v[j]` while sorting `v` ascending.
pub fn count_inversions(v: &mut [f64]) -> i64 {
    let n = v.len();
    let mut buf = v.to_vec();
    let mut swaps = 0i64;
    let mut width = 1;
    // bottom-up merge sort; `src` alternates between `v` and `buf`
    let mut from_v = true;
    while width < n {
        {
            let (src, dst): (&[f64], &mut [f64]) =
                if from_v { (&*v, &mut buf[..]) } else { (&buf[..], &mut *v) };
            let mut lo = 0;
            while lo < n {
                let mid = (lo + width).min(n);
                let hi = (lo + 2 * width).min(n);
                let (mut i, mut j, mut k) = (lo, mid, lo);
                while i < mid && j < hi {
                    if src[j] < src[i] {
                        dst[k] = src[j];
                        swaps += (mid - i) as i64;
                        j += 1;
                    } else {
                        dst[k] = src[i];
                        i += 1;
                    }
                    k += 1;
                }
                dst[k..k + (mid - i)].copy_from_slice(&src[i..mid]);
                k += mid - i;
                dst[k..k + (hi - j)].copy_from_slice(&src[j..hi]);
                lo = hi;
            }
        }
        from_v = !from_v;
        width *= 2;
    }
    if !from_v {
        v.copy_from_slice(&buf);
    }
    swaps
}

/// `Σ_{a<b} sgn(x_a − x_b)·sgn(y_a − y_b)`: concordant minus discordant
/// pairs, by Knight's sort-and-count method.
pub fn concordance_balance(xs: &[f64], ys: &[f64]) -> i64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as i64;
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&i, &j| cmp(xs[i], xs[j]).then(cmp(ys[i], ys[j])));

    let x_ties = tied_pairs(order.iter().map(|&i| xs[i]));
    let joint_ties = tied_pairs(order.iter().map(|&i| (xs[i], ys[i])));
    let mut y_sorted: Vec<f64> = order.iter().map(|&i| ys[i]).collect();
    let discordant = count_inversions(&mut y_sorted);
    let y_ties = tied_pairs(y_sorted.iter().copied());

    let untied = n * (n - 1) / 2 - x_ties - y_ties + joint_ties;
    untied - 2 * discordant
}

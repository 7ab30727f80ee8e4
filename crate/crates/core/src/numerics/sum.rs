//! Order-optimized summation: terms are added in an order that keeps the
//! running partial sum as small as possible, so cancellations happen before
//! rounding can destroy them.

use std::collections::BTreeMap;

/// Map f64 to a key with the same total order (ascending by value).
#[inline]
fn sort_key(x: f64) -> u64 {
    let b = x.to_bits();
    if b & 0x8000_0000_0000_0000 != 0 {
        !b
    } else {
        b | 0x8000_0000_0000_0000
    }
}

#[inline]
fn key_to_f64(k: u64) -> f64 {
    if k & 0x8000_0000_0000_0000 != 0 {
        f64::from_bits(k & 0x7fff_ffff_ffff_ffff)
    } else {
        f64::from_bits(!k)
    }
}

/// Sum of `terms`, accumulated so that every intermediate partial sum has
/// the smallest attainable magnitude: the first term taken is the largest
/// in magnitude, every following term is the remaining one closest to the
/// negated partial sum. The result depends only on the multiset of terms.
/// Ties prefer the candidate earlier in ascending value order.
pub fn ordered_sum(terms: &[f64]) -> f64 {
    debug_assert!(terms.iter().all(|t| t.is_finite()));
    if terms.is_empty() {
        return 0.0;
    }
    let mut pool: BTreeMap<u64, u32> = BTreeMap::new();
    for &t in terms {
        *pool.entry(sort_key(t)).or_insert(0) += 1;
    }

    #[inline]
    fn take(pool: &mut BTreeMap<u64, u32>, k: u64) -> f64 {
        let c = pool.get_mut(&k).expect("key present");
        *c -= 1;
        if *c == 0 {
            pool.remove(&k);
        }
        key_to_f64(k)
    }

    // seed with the largest-magnitude term so that dominant cancellation
    // pairs meet while the partial sum is still exact
    let (&kmin, _) = pool.iter().next().unwrap();
    let (&kmax, _) = pool.iter().next_back().unwrap();
    let seed_key = if key_to_f64(kmin).abs() >= key_to_f64(kmax).abs() {
        kmin
    } else {
        kmax
    };
    let mut partial = take(&mut pool, seed_key);

    while !pool.is_empty() {
        let tk = sort_key(-partial);
        let above = pool.range(tk..).next().map(|(&k, _)| k);
        let below = pool.range(..tk).next_back().map(|(&k, _)| k);
        let pick = match (below, above) {
            (Some(a), Some(b)) => {
                let da = (partial + key_to_f64(a)).abs();
                let db = (partial + key_to_f64(b)).abs();
                if da <= db {
                    a
                } else {
                    b
                }
            }
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => unreachable!(),
        };
        partial += take(&mut pool, pick);
    }
    partial
}

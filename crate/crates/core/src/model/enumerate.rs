use crate::error::{Error, Result};

use super::order::{Alternative, Outcome, PreferenceOrder};

/// Default guard on every enumeration in the crate.
pub const DEFAULT_CAP: u64 = 10_000_000;

/// `(m*n)! / (n!)^m`, the number of monotone orders, saturating at `u128::MAX`.
pub fn monotone_order_count(n: usize, m: usize) -> u128 {
    // Product of binomials C(k*n, n) for k = 1..m, each built incrementally.
    let mut total: u128 = 1;
    for k in 1..=m {
        let mut binom: u128 = 1;
        let top = k * n;
        for i in 0..n {
            binom = match binom.checked_mul((top - i) as u128) {
                Some(v) => v / (i as u128 + 1),
                None => return u128::MAX,
            };
        }
        total = match total.checked_mul(binom) {
            Some(v) => v,
            None => return u128::MAX,
        };
    }
    total
}

/// Every monotone order for `(n, m)` exactly once.
///
/// A monotone order is fixed by the sequence of alternatives read from top to
/// bottom (each alternative's sizes must appear in decreasing order), so the
/// canonical order is the lexicographic order of that sequence.
pub fn enumerate_monotone_orders(n: usize, m: usize, cap: u64) -> Result<MonotoneOrders> {
    let required = monotone_order_count(n, m);
    if required > cap as u128 {
        return Err(Error::CapExceeded { required, cap });
    }
    Ok(MonotoneOrders::new(n, m))
}

pub struct MonotoneOrders {
    n: usize,
    m: usize,
    sequence: Vec<usize>,
    done: bool,
}

impl MonotoneOrders {
    fn new(n: usize, m: usize) -> Self {
        let sequence = (0..m).flat_map(|s| std::iter::repeat_n(s, n)).collect();
        MonotoneOrders {
            n,
            m,
            sequence,
            done: n == 0 || m == 0,
        }
    }
}

/// Builds the order whose top-to-bottom alternative sequence is `sequence`.
pub(crate) fn order_from_sequence(sequence: &[usize], n: usize, m: usize) -> PreferenceOrder {
    let mut next = vec![n; m];
    let ranking = sequence
        .iter()
        .map(|&s| {
            let o = Outcome::new(Alternative(s), next[s]);
            next[s] -= 1;
            o
        })
        .collect();
    PreferenceOrder::new(ranking, n, m).expect("sequence encodes a monotone order")
}

fn next_permutation(seq: &mut [usize]) -> bool {
    if seq.len() < 2 {
        return false;
    }
    let mut i = seq.len() - 1;
    while i > 0 && seq[i - 1] >= seq[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = seq.len() - 1;
    while seq[j] <= seq[i - 1] {
        j -= 1;
    }
    seq.swap(i - 1, j);
    seq[i..].reverse();
    true
}

impl Iterator for MonotoneOrders {
    type Item = PreferenceOrder;

    fn next(&mut self) -> Option<PreferenceOrder> {
        if self.done {
            return None;
        }
        let order = order_from_sequence(&self.sequence, self.n, self.m);
        self.done = !next_permutation(&mut self.sequence);
        Some(order)
    }
}

use crate::error::{Error, Result};

use super::order::{Alternative, Outcome, PreferenceOrder};

/// Compact form of a non-critically-interleaving order over two alternatives:
/// the alternative preferred at full size, and the smallest community size at
/// that alternative which still beats the full community at the other one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ThresholdPreference {
    pub preferred: Alternative,
    pub threshold: usize,
}

/// Canonical completion of a threshold preference `(S, j)`:
/// `(S,n) .. (S,j)`, then the whole chain of the other alternative, then
/// `(S,j-1) .. (S,1)`.
pub fn expand_threshold(tp: ThresholdPreference, n: usize) -> Result<PreferenceOrder> {
    if tp.preferred.0 > 1 {
        return Err(Error::OutOfRange(format!(
            "preferred alternative #{} in a two-alternative problem",
            tp.preferred.0
        )));
    }
    if tp.threshold == 0 || tp.threshold > n {
        return Err(Error::OutOfRange(format!(
            "threshold {} outside [1, {n}]",
            tp.threshold
        )));
    }
    let s = tp.preferred;
    let other = s.other();
    let j = tp.threshold;
    let ranking: Vec<Outcome> = (j..=n)
        .rev()
        .map(|k| Outcome::new(s, k))
        .chain((1..=n).rev().map(|k| Outcome::new(other, k)))
        .chain((1..j).rev().map(|k| Outcome::new(s, k)))
        .collect();
    PreferenceOrder::new(ranking, n, 2)
        .map_err(|v| Error::Internal(format!("threshold expansion is not monotone: {v}")))
}

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Index of an alternative within a problem's alternative list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Alternative(pub usize);

impl Alternative {
    pub fn index(self) -> usize {
        self.0
    }

    /// The other alternative of a two-alternative problem.
    pub fn other(self) -> Alternative {
        Alternative(1 - self.0)
    }
}

/// Being in a community of `size` agents that adopts `alternative`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Outcome {
    pub alternative: Alternative,
    pub size: usize,
}

impl Outcome {
    pub fn new(alternative: Alternative, size: usize) -> Self {
        Outcome { alternative, size }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(#{}, {})", self.alternative.0, self.size)
    }
}

/// Why a ranking is not a monotone strict total order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderViolation {
    OutOfRange(Outcome),
    Duplicate(Outcome),
    Missing(Outcome),
    /// `larger` has to rank above `smaller` but does not.
    NotMonotone {
        larger: Outcome,
        smaller: Outcome,
    },
}

impl fmt::Display for OrderViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderViolation::OutOfRange(o) => write!(f, "outcome {o} is out of range"),
            OrderViolation::Duplicate(o) => write!(f, "outcome {o} appears twice"),
            OrderViolation::Missing(o) => write!(f, "outcome {o} is missing"),
            OrderViolation::NotMonotone { larger, smaller } => {
                write!(f, "{larger} must precede {smaller}")
            }
        }
    }
}

/// Checks that `ranking` is a permutation of all `m * n` outcomes and that
/// each alternative's sizes appear in decreasing order.
pub fn validate_order(
    ranking: &[Outcome],
    n: usize,
    m: usize,
) -> std::result::Result<(), OrderViolation> {
    let mut seen = vec![false; n * m];
    for &o in ranking {
        if o.alternative.0 >= m || o.size == 0 || o.size > n {
            return Err(OrderViolation::OutOfRange(o));
        }
        let slot = o.alternative.0 * n + o.size - 1;
        if seen[slot] {
            return Err(OrderViolation::Duplicate(o));
        }
        seen[slot] = true;
    }
    if let Some(slot) = seen.iter().position(|&s| !s) {
        return Err(OrderViolation::Missing(Outcome::new(
            Alternative(slot / n),
            slot % n + 1,
        )));
    }
    let mut next = vec![n; m];
    for &o in ranking {
        let want = next[o.alternative.0];
        if o.size != want {
            return Err(OrderViolation::NotMonotone {
                larger: Outcome::new(o.alternative, want),
                smaller: o,
            });
        }
        next[o.alternative.0] -= 1;
    }
    Ok(())
}

/// A monotone strict total order over `Alternative x [1..n]`, most preferred first.
///
/// Comparisons go through a position table, so [`PreferenceOrder::prefers`] is O(1).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PreferenceOrder {
    n: usize,
    m: usize,
    ranking: Vec<Outcome>,
    position: Vec<u32>,
}

impl PreferenceOrder {
    pub fn new(
        ranking: Vec<Outcome>,
        n: usize,
        m: usize,
    ) -> std::result::Result<Self, OrderViolation> {
        validate_order(&ranking, n, m)?;
        let mut position = vec![0u32; n * m];
        for (pos, o) in ranking.iter().enumerate() {
            position[o.alternative.0 * n + o.size - 1] = pos as u32;
        }
        Ok(PreferenceOrder {
            n,
            m,
            ranking,
            position,
        })
    }

    /// Builds an order from `(alternative index, size)` pairs.
    pub fn from_pairs(
        pairs: &[(usize, usize)],
        n: usize,
        m: usize,
    ) -> std::result::Result<Self, OrderViolation> {
        let ranking = pairs
            .iter()
            .map(|&(s, j)| Outcome::new(Alternative(s), j))
            .collect();
        Self::new(ranking, n, m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn ranking(&self) -> &[Outcome] {
        &self.ranking
    }

    pub fn top(&self) -> Outcome {
        self.ranking[0]
    }

    fn in_range(&self, o: Outcome) -> bool {
        o.alternative.0 < self.m && o.size >= 1 && o.size <= self.n
    }

    /// Position of `o` in the ranking; 0 is the most preferred.
    pub fn position(&self, o: Outcome) -> usize {
        debug_assert!(self.in_range(o), "outcome {o} out of range");
        self.position[o.alternative.0 * self.n + o.size - 1] as usize
    }

    /// `x` ranks strictly above `y`. Both outcomes must be in range.
    #[inline]
    pub fn prefers(&self, x: Outcome, y: Outcome) -> bool {
        self.position(x) < self.position(y)
    }

    /// Range-checked form of [`PreferenceOrder::prefers`].
    pub fn checked_prefers(&self, x: Outcome, y: Outcome) -> Result<bool> {
        for o in [x, y] {
            if !self.in_range(o) {
                return Err(Error::OutOfRange(format!(
                    "{o} for n = {}, m = {}",
                    self.n, self.m
                )));
            }
        }
        Ok(self.prefers(x, y))
    }
}

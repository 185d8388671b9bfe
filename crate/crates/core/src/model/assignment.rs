use crate::error::{Error, Result};

use super::order::{Alternative, Outcome};

/// A total map from agent ids to alternatives, with the community sizes it induces.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment {
    placement: Vec<Alternative>,
    sizes: Vec<usize>,
}

impl Assignment {
    pub fn new(placement: Vec<Alternative>, m: usize) -> Result<Self> {
        let mut sizes = vec![0; m];
        for (agent, alt) in placement.iter().enumerate() {
            match sizes.get_mut(alt.0) {
                Some(s) => *s += 1,
                None => {
                    return Err(Error::InvalidAssignment(format!(
                        "agent {agent} placed at unknown alternative #{}",
                        alt.0
                    )))
                }
            }
        }
        if placement.is_empty() {
            return Err(Error::InvalidAssignment("no agents".into()));
        }
        Ok(Assignment { placement, sizes })
    }

    pub fn from_indices(placement: &[usize], m: usize) -> Result<Self> {
        Self::new(placement.iter().copied().map(Alternative).collect(), m)
    }

    /// Everybody at `alt`.
    pub fn all_at(alt: Alternative, n: usize, m: usize) -> Result<Self> {
        Self::new(vec![alt; n], m)
    }

    pub fn n(&self) -> usize {
        self.placement.len()
    }

    pub fn m(&self) -> usize {
        self.sizes.len()
    }

    pub fn placement(&self) -> &[Alternative] {
        &self.placement
    }

    pub fn get(&self, agent: usize) -> Alternative {
        self.placement[agent]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn size_of(&self, alt: Alternative) -> usize {
        self.sizes[alt.0]
    }

    /// The outcome `agent` experiences under this assignment.
    pub fn outcome_of(&self, agent: usize) -> Outcome {
        let alt = self.placement[agent];
        Outcome::new(alt, self.sizes[alt.0])
    }

    /// Agent ids placed at `alt`, ascending.
    pub fn community(&self, alt: Alternative) -> Vec<usize> {
        self.placement
            .iter()
            .enumerate()
            .filter(|(_, &a)| a == alt)
            .map(|(i, _)| i)
            .collect()
    }

    /// All agents in a single community.
    pub fn is_non_forking(&self) -> bool {
        self.sizes.iter().any(|&s| s == self.n())
    }
}

/// Every assignment of `n` agents to `m` alternatives in lexicographic order of
/// the placement vector (agent 0 most significant).
pub fn all_assignments(n: usize, m: usize) -> impl Iterator<Item = Assignment> {
    let mut digits = vec![0usize; n];
    let mut done = n == 0 || m == 0;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let current = Assignment::from_indices(&digits, m).expect("digits are in range");
        let mut i = n;
        loop {
            if i == 0 {
                done = true;
                break;
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < m {
                break;
            }
            digits[i] = 0;
        }
        Some(current)
    })
}

/// `m^n`, saturating.
pub fn assignment_count(n: usize, m: usize) -> u128 {
    let mut total: u128 = 1;
    for _ in 0..n {
        total = total.saturating_mul(m as u128);
    }
    total
}

use crate::error::{Error, Result};

use super::assignment::Assignment;
use super::order::{Alternative, PreferenceOrder};

/// A forking problem: one monotone order per agent over a shared alternative list.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Profile {
    alternatives: Vec<String>,
    orders: Vec<PreferenceOrder>,
}

impl Profile {
    pub fn new(alternatives: Vec<String>, orders: Vec<PreferenceOrder>) -> Result<Self> {
        let m = alternatives.len();
        if m < 2 {
            return Err(Error::InvalidProfile(format!(
                "need at least 2 alternatives, got {m}"
            )));
        }
        for (i, label) in alternatives.iter().enumerate() {
            if label.is_empty() {
                return Err(Error::InvalidProfile("empty alternative label".into()));
            }
            if alternatives[..i].contains(label) {
                return Err(Error::InvalidProfile(format!(
                    "duplicate alternative label {label:?}"
                )));
            }
        }
        let n = orders.len();
        if n == 0 {
            return Err(Error::InvalidProfile("need at least one agent".into()));
        }
        for (agent, order) in orders.iter().enumerate() {
            if order.n() != n || order.m() != m {
                return Err(Error::InvalidProfile(format!(
                    "agent {agent} ranks outcomes for n = {}, m = {}; profile has n = {n}, m = {m}",
                    order.n(),
                    order.m()
                )));
            }
        }
        Ok(Profile {
            alternatives,
            orders,
        })
    }

    /// A profile over alternatives labelled "A", "B", ... .
    pub fn with_default_labels(orders: Vec<PreferenceOrder>) -> Result<Self> {
        let m = orders.first().map(|o| o.m()).unwrap_or(2);
        Self::new(default_labels(m), orders)
    }

    pub fn n(&self) -> usize {
        self.orders.len()
    }

    pub fn m(&self) -> usize {
        self.alternatives.len()
    }

    pub fn alternatives(&self) -> &[String] {
        &self.alternatives
    }

    pub fn label(&self, alt: Alternative) -> &str {
        &self.alternatives[alt.0]
    }

    pub fn alternative(&self, label: &str) -> Option<Alternative> {
        self.alternatives
            .iter()
            .position(|l| l == label)
            .map(Alternative)
    }

    pub fn orders(&self) -> &[PreferenceOrder] {
        &self.orders
    }

    pub fn order(&self, agent: usize) -> Result<&PreferenceOrder> {
        self.orders
            .get(agent)
            .ok_or(Error::UnknownAgent { agent, n: self.n() })
    }

    /// Copy of this profile with `agent`'s order replaced.
    pub fn with_order(&self, agent: usize, order: PreferenceOrder) -> Result<Profile> {
        let mut orders = self.orders.clone();
        match orders.get_mut(agent) {
            Some(slot) => *slot = order,
            None => return Err(Error::UnknownAgent { agent, n: self.n() }),
        }
        Profile::new(self.alternatives.clone(), orders)
    }

    pub(crate) fn require_two(&self) -> Result<()> {
        if self.m() != 2 {
            return Err(Error::WrongArity(self.m()));
        }
        Ok(())
    }

    pub(crate) fn check_assignment(&self, f: &Assignment) -> Result<()> {
        if f.n() != self.n() || f.m() != self.m() {
            return Err(Error::InvalidAssignment(format!(
                "assignment is for n = {}, m = {}; profile has n = {}, m = {}",
                f.n(),
                f.m(),
                self.n(),
                self.m()
            )));
        }
        Ok(())
    }
}

/// Whether `agent` prefers assignment `f` to assignment `g`, judged by the
/// outcome (alternative, community size) each one gives them.
pub fn induced_preference_over_assignments(
    profile: &Profile,
    agent: usize,
    f: &Assignment,
    g: &Assignment,
) -> Result<bool> {
    let order = profile.order(agent)?;
    profile.check_assignment(f)?;
    profile.check_assignment(g)?;
    Ok(order.prefers(f.outcome_of(agent), g.outcome_of(agent)))
}

/// "A", "B", ..., "Z", then "A1", "B1", ... .
pub fn default_labels(m: usize) -> Vec<String> {
    (0..m)
        .map(|i| {
            let letter = char::from(b'A' + (i % 26) as u8);
            if i < 26 {
                letter.to_string()
            } else {
                format!("{letter}{}", i / 26)
            }
        })
        .collect()
}

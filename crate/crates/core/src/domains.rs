//! Preference-domain classification for two alternatives, sufficient
//! conditions for a unique stable assignment, and seeded profile generators.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    default_labels, expand_threshold, order_from_sequence, Alternative, Outcome, PreferenceOrder,
    Profile, ThresholdPreference,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomainClass {
    NonInterleaving,
    MinimallyInterleaving,
    KInterleaving(usize),
    NonCriticallyInterleaving,
    MonotoneGeneral,
}

impl fmt::Display for DomainClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainClass::NonInterleaving => f.write_str("non-interleaving"),
            DomainClass::MinimallyInterleaving => f.write_str("minimally-interleaving"),
            DomainClass::KInterleaving(k) => write!(f, "k-interleaving:{k}"),
            DomainClass::NonCriticallyInterleaving => f.write_str("non-critically-interleaving"),
            DomainClass::MonotoneGeneral => f.write_str("monotone-general"),
        }
    }
}

impl FromStr for DomainClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "non-interleaving" => Ok(DomainClass::NonInterleaving),
            "minimally-interleaving" => Ok(DomainClass::MinimallyInterleaving),
            "non-critically-interleaving" | "nci" => Ok(DomainClass::NonCriticallyInterleaving),
            "monotone-general" | "monotone" => Ok(DomainClass::MonotoneGeneral),
            other => other
                .strip_prefix("k-interleaving:")
                .and_then(|k| k.parse().ok())
                .map(DomainClass::KInterleaving)
                .ok_or_else(|| format!("unknown domain class {other:?}")),
        }
    }
}

impl Serialize for DomainClass {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Alternative an order prefers when everybody is in the same community.
pub fn preferred_alternative(order: &PreferenceOrder) -> Alternative {
    let n = order.n();
    if order.prefers(
        Outcome::new(Alternative(0), n),
        Outcome::new(Alternative(1), n),
    ) {
        Alternative(0)
    } else {
        Alternative(1)
    }
}

/// Smallest `k` with `(preferred, k)` above `(other, n)`.
pub fn minimal_loyalty(order: &PreferenceOrder, preferred: Alternative) -> usize {
    let n = order.n();
    let full_other = Outcome::new(preferred.other(), n);
    (1..=n)
        .find(|&k| order.prefers(Outcome::new(preferred, k), full_other))
        .unwrap_or(n + 1)
}

/// Threshold `j` of a non-critically-interleaving order: `(S,j)` beats
/// `(S',n)`, which beats `(S',n-j)`, which beats `(S,j-1)`. Terms with size 0
/// drop out; for `j = n` the third term is read as `(S',1)`.
fn nci_threshold(order: &PreferenceOrder, preferred: Alternative, loyalty: usize) -> Option<usize> {
    let n = order.n();
    if loyalty == 1 {
        return Some(1);
    }
    let other = Outcome::new(preferred.other(), (n - loyalty).max(1));
    order
        .prefers(other, Outcome::new(preferred, loyalty - 1))
        .then_some(loyalty)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OrderClassification {
    pub preferred: Alternative,
    pub loyalty: usize,
    /// How many sizes of the preferred alternative rank below the full
    /// community at the other one.
    pub degree: usize,
    pub nci_threshold: Option<usize>,
    pub class: DomainClass,
}

fn tightest(degree: usize, nci: bool) -> DomainClass {
    match degree {
        0 => DomainClass::NonInterleaving,
        1 => DomainClass::MinimallyInterleaving,
        _ if nci => DomainClass::NonCriticallyInterleaving,
        k => DomainClass::KInterleaving(k),
    }
}

pub fn classify_order(order: &PreferenceOrder) -> Result<OrderClassification> {
    if order.m() != 2 {
        return Err(Error::WrongArity(order.m()));
    }
    let preferred = preferred_alternative(order);
    let loyalty = minimal_loyalty(order, preferred);
    let degree = loyalty - 1;
    let nci = nci_threshold(order, preferred, loyalty);
    Ok(OrderClassification {
        preferred,
        loyalty,
        degree,
        nci_threshold: nci,
        class: tightest(degree, nci.is_some()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ProfileClassification {
    pub max_degree: usize,
    pub non_critically_interleaving: bool,
    pub class: DomainClass,
}

pub fn classify_profile(
    profile: &Profile,
) -> Result<(Vec<OrderClassification>, ProfileClassification)> {
    profile.require_two()?;
    let per_agent = profile
        .orders()
        .iter()
        .map(classify_order)
        .collect::<Result<Vec<_>>>()?;
    let max_degree = per_agent.iter().map(|c| c.degree).max().unwrap_or(0);
    let nci = per_agent.iter().all(|c| c.nci_threshold.is_some());
    let summary = ProfileClassification {
        max_degree,
        non_critically_interleaving: nci,
        class: tightest(max_degree, nci),
    };
    Ok((per_agent, summary))
}

/// Alternatives `S` such that placing everybody at `S` is stable: for every
/// `j`, fewer than `j` agents prefer `(S', j)` to `(S, n)`.
pub fn cohesive_alternatives(profile: &Profile) -> Result<Vec<Alternative>> {
    profile.require_two()?;
    let n = profile.n();
    Ok([Alternative(0), Alternative(1)]
        .into_iter()
        .filter(|&s| {
            let home = Outcome::new(s, n);
            (1..=n).all(|j| {
                let away = Outcome::new(s.other(), j);
                profile
                    .orders()
                    .iter()
                    .filter(|o| o.prefers(away, home))
                    .count()
                    < j
            })
        })
        .collect())
}

/// Some alternative at which the whole community is stable, if any.
pub fn is_cohesive(profile: &Profile) -> Result<Option<Alternative>> {
    Ok(cohesive_alternatives(profile)?.first().copied())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Loyalty {
    pub preferred: Alternative,
    pub loyalty: usize,
}

pub type LoyaltyVector = Vec<Loyalty>;

pub fn loyalty_vector(profile: &Profile) -> Result<LoyaltyVector> {
    profile.require_two()?;
    Ok(profile
        .orders()
        .iter()
        .map(|o| {
            let preferred = preferred_alternative(o);
            Loyalty {
                preferred,
                loyalty: minimal_loyalty(o, preferred),
            }
        })
        .collect())
}

/// Every agent is loyal enough to its preferred side that the side's own
/// supporters can always reclaim it.
pub fn check_loyalty_uniqueness(profile: &Profile) -> Result<bool> {
    let loyalties = loyalty_vector(profile)?;
    Ok([Alternative(0), Alternative(1)].into_iter().all(|s| {
        let side: Vec<usize> = loyalties
            .iter()
            .filter(|l| l.preferred == s)
            .map(|l| l.loyalty)
            .collect();
        side.iter().max().is_none_or(|&worst| worst <= side.len())
    }))
}

/// The coalition that can hold `s` against everything: `W_j` is the set of
/// agents preferring `(s, j)` to `(s', n)`, and the result is `W_j` for the
/// largest `j` with `|W_j| >= j` (empty if there is none).
pub fn self_supporting_coalition(profile: &Profile, s: Alternative) -> Result<Vec<usize>> {
    profile.require_two()?;
    let n = profile.n();
    let full_other = Outcome::new(s.other(), n);
    let members = |j: usize| -> Vec<usize> {
        profile
            .orders()
            .iter()
            .enumerate()
            .filter(|(_, o)| o.prefers(Outcome::new(s, j), full_other))
            .map(|(v, _)| v)
            .collect()
    };
    Ok((1..=n)
        .rev()
        .map(members)
        .zip((1..=n).rev())
        .find(|(w, j)| w.len() >= *j)
        .map(|(w, _)| w)
        .unwrap_or_default())
}

/// Uniqueness condition for non-critically-interleaving profiles: agents
/// outside the self-supporting coalition of their preferred side are never
/// loyal enough to stay there once the other side's coalition is fixed.
pub fn check_coalition_uniqueness(profile: &Profile) -> Result<bool> {
    let (per_agent, summary) = classify_profile(profile)?;
    if !summary.non_critically_interleaving {
        let agent = per_agent
            .iter()
            .position(|c| c.nci_threshold.is_none())
            .unwrap_or(0);
        return Err(Error::DomainViolation(format!(
            "agent {agent} is not non-critically interleaving"
        )));
    }
    let n = profile.n();
    let a_core = self_supporting_coalition(profile, Alternative(0))?;
    let b_core = self_supporting_coalition(profile, Alternative(1))?;
    let side_ok = |s: Alternative, core: &[usize], other_core: &[usize]| {
        let bound = n - other_core.len();
        per_agent
            .iter()
            .enumerate()
            .filter(|(v, c)| c.preferred == s && !core.contains(v))
            .all(|(_, c)| c.loyalty > bound)
    };
    Ok(side_ok(Alternative(0), &a_core, &b_core) && side_ok(Alternative(1), &b_core, &a_core))
}

/// A uniformly random order whose preferred alternative is `preferred` and
/// whose interleaving degree is exactly `degree`.
fn order_with_degree(
    rng: &mut ChaCha8Rng,
    n: usize,
    preferred: Alternative,
    degree: usize,
) -> PreferenceOrder {
    let loyalty = degree + 1;
    let (p, q) = (preferred.0, preferred.other().0);
    let mut tail: Vec<usize> = std::iter::repeat_n(p, loyalty - 1)
        .chain(std::iter::repeat_n(q, n - 1))
        .collect();
    tail.shuffle(rng);
    let sequence: Vec<usize> = std::iter::repeat_n(p, n - loyalty + 1)
        .chain(std::iter::once(q))
        .chain(tail)
        .collect();
    order_from_sequence(&sequence, n, 2)
}

fn random_side(rng: &mut ChaCha8Rng) -> Alternative {
    Alternative(rng.gen_range(0..2))
}

/// Deterministic pseudo-random profile whose orders all fall in `class`.
/// Degree-bounded classes include at least one order of the full degree.
pub fn generate(n: usize, m: usize, class: DomainClass, seed: u64) -> Result<Profile> {
    if n == 0 {
        return Err(Error::Unrealizable("need at least one agent".into()));
    }
    if m < 2 {
        return Err(Error::Unrealizable(format!(
            "need at least 2 alternatives, got {m}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if class == DomainClass::MonotoneGeneral {
        let mut orders = Vec::with_capacity(n);
        for _ in 0..n {
            let mut sequence: Vec<usize> = (0..m).flat_map(|s| std::iter::repeat_n(s, n)).collect();
            sequence.shuffle(&mut rng);
            orders.push(order_from_sequence(&sequence, n, m));
        }
        return Profile::new(default_labels(m), orders);
    }
    if m != 2 {
        return Err(Error::Unrealizable(format!(
            "{class} profiles are only defined for 2 alternatives"
        )));
    }
    let orders = match class {
        DomainClass::NonCriticallyInterleaving => (0..n)
            .map(|_| {
                let preferred = random_side(&mut rng);
                let threshold = rng.gen_range(1..=n);
                expand_threshold(
                    ThresholdPreference {
                        preferred,
                        threshold,
                    },
                    n,
                )
            })
            .collect::<Result<Vec<_>>>()?,
        _ => {
            let top = match class {
                DomainClass::NonInterleaving => 0,
                DomainClass::MinimallyInterleaving => 1,
                DomainClass::KInterleaving(k) => k,
                _ => unreachable!("handled above"),
            };
            if top + 1 > n {
                return Err(Error::Unrealizable(format!(
                    "degree {top} needs at least {} agents, got {n}",
                    top + 1
                )));
            }
            let forced = rng.gen_range(0..n);
            (0..n)
                .map(|v| {
                    let preferred = random_side(&mut rng);
                    let degree = if v == forced {
                        top
                    } else {
                        rng.gen_range(0..=top)
                    };
                    order_with_degree(&mut rng, n, preferred, degree)
                })
                .collect()
        }
    };
    Profile::new(default_labels(2), orders)
}

//! The greedy stable rules for two alternatives.
//!
//! `RA` starts with everybody at the first alternative and repeatedly moves the
//! largest self-supporting coalition to the second one; `RB` is the mirror
//! image. Both return stable assignments, and they coincide exactly when the
//! profile has a single stable assignment.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Alternative, Assignment, Outcome, PreferenceOrder, Profile};
use crate::multiway;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    RA,
    RB,
}

impl Rule {
    /// Where every agent starts.
    pub fn origin(self) -> Alternative {
        match self {
            Rule::RA => Alternative(0),
            Rule::RB => Alternative(1),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::RA => "RA",
            Rule::RB => "RB",
        })
    }
}

impl FromStr for Rule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "RA" | "ra" => Ok(Rule::RA),
            "RB" | "rb" => Ok(Rule::RB),
            other => Err(format!("unknown rule {other:?}, expected RA or RB")),
        }
    }
}

/// How the size of the next moving coalition is picked among the feasible ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MoveSelection {
    #[default]
    Largest,
    Smallest,
}

/// One move of the greedy loop. `a` and `b` are the sizes of the origin and
/// target communities before the move.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub iteration: usize,
    pub k: usize,
    pub moved: Vec<usize>,
    pub a: usize,
    pub b: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverTrace {
    pub iterations: Vec<TraceStep>,
}

/// Smallest `j` in `[1, a]` such that `(to, b + j)` beats `(from, a)` for this
/// order, or `None` if no coalition size makes leaving worthwhile.
pub(crate) fn min_join(
    order: &PreferenceOrder,
    from: Alternative,
    a: usize,
    b: usize,
) -> Option<usize> {
    let stay = order.position(Outcome::new(from, a));
    let to = from.other();
    (1..=a).find(|&j| order.position(Outcome::new(to, b + j)) < stay)
}

/// Picks the coalition size from per-agent minimal join sizes: `j` is feasible
/// when at least `j` agents would leave given `j` movers.
pub(crate) fn select_move(
    answers: &[Option<usize>],
    a: usize,
    selection: MoveSelection,
) -> Option<usize> {
    let mut willing_at = vec![0usize; a + 1];
    for j in answers.iter().flatten() {
        willing_at[*j] += 1;
    }
    let mut cumulative = 0;
    let mut feasible = Vec::new();
    for (j, count) in willing_at.iter().enumerate().skip(1) {
        cumulative += count;
        if cumulative >= j {
            feasible.push(j);
        }
    }
    match selection {
        MoveSelection::Largest => feasible.last().copied(),
        MoveSelection::Smallest => feasible.first().copied(),
    }
}

fn greedy(
    profile: &Profile,
    origin: Alternative,
    selection: MoveSelection,
) -> (Assignment, SolverTrace) {
    let n = profile.n();
    let target = origin.other();
    let mut placement = vec![origin; n];
    let mut trace = SolverTrace::default();
    let (mut a, mut b) = (n, 0);
    while a > 0 {
        let staying: Vec<usize> = (0..n).filter(|&v| placement[v] == origin).collect();
        let answers: Vec<Option<usize>> = staying
            .iter()
            .map(|&v| min_join(&profile.orders()[v], origin, a, b))
            .collect();
        let Some(k) = select_move(&answers, a, selection) else {
            break;
        };
        let moved: Vec<usize> = staying
            .iter()
            .zip(&answers)
            .filter(|(_, ans)| matches!(ans, Some(j) if *j <= k))
            .map(|(&v, _)| v)
            .collect();
        for &v in &moved {
            placement[v] = target;
        }
        trace.iterations.push(TraceStep {
            iteration: trace.iterations.len(),
            k,
            moved: moved.clone(),
            a,
            b,
        });
        a -= moved.len();
        b += moved.len();
    }
    let f = Assignment::new(placement, 2).expect("two-alternative placement");
    (f, trace)
}

/// Runs `rule` with the chosen coalition-size selection and checks the result
/// against the stability definition before returning it.
pub fn run_rule_with(
    profile: &Profile,
    rule: Rule,
    selection: MoveSelection,
) -> Result<(Assignment, SolverTrace)> {
    profile.require_two()?;
    let (f, trace) = greedy(profile, rule.origin(), selection);
    if let Some(w) = multiway::find_deviation(profile, &f)? {
        return Err(Error::Internal(format!(
            "{rule} produced an unstable assignment; deviation to #{} of size {} by {:?}",
            w.target.0, w.target_size, w.movers
        )));
    }
    Ok((f, trace))
}

pub fn run_rule(profile: &Profile, rule: Rule) -> Result<(Assignment, SolverTrace)> {
    run_rule_with(profile, rule, MoveSelection::Largest)
}

pub fn run_ra(profile: &Profile) -> Result<(Assignment, SolverTrace)> {
    run_rule(profile, Rule::RA)
}

pub fn run_rb(profile: &Profile) -> Result<(Assignment, SolverTrace)> {
    run_rule(profile, Rule::RB)
}

/// The rule's assignment without the stability self-check, for hot loops that
/// evaluate many candidate profiles.
pub(crate) fn run_rule_unchecked(profile: &Profile, rule: Rule) -> Assignment {
    greedy(profile, rule.origin(), MoveSelection::Largest).0
}

/// True iff the profile admits exactly one stable assignment.
pub fn is_unique_stable(profile: &Profile) -> Result<bool> {
    let (ra, _) = run_ra(profile)?;
    let (rb, _) = run_rb(profile)?;
    Ok(ra == rb)
}

//! Ground truth by enumeration: every stable assignment of a profile, and
//! searches for coalitional misreports that beat the greedy rules.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    all_assignments, assignment_count, enumerate_monotone_orders, Alternative, Assignment, Outcome,
    PreferenceOrder, Profile,
};
use crate::multiway;
use crate::solver::{self, Rule};

/// All stable assignments in lexicographic placement order.
pub fn enumerate_stable(profile: &Profile, cap: u64) -> Result<Vec<Assignment>> {
    let required = assignment_count(profile.n(), profile.m());
    if required > cap as u128 {
        return Err(Error::CapExceeded { required, cap });
    }
    let mut stable = Vec::new();
    for f in all_assignments(profile.n(), profile.m()) {
        if multiway::is_stable(profile, &f)? {
            stable.push(f);
        }
    }
    Ok(stable)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Improvement {
    pub agent: usize,
    pub honest: Outcome,
    pub manipulated: Outcome,
}

/// A coalition whose joint misreport gives every member a strictly better
/// outcome under their true order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManipulationReport {
    pub rule: Rule,
    pub coalition: Vec<usize>,
    pub misreports: Vec<PreferenceOrder>,
    pub honest_outcome: Assignment,
    pub manipulated_outcome: Assignment,
    pub improvement: Vec<Improvement>,
}

impl ManipulationReport {
    /// Re-runs the rule on the misreported profile and re-checks every
    /// member's improvement against their true order.
    pub fn validate(&self, profile: &Profile) -> Result<bool> {
        if self.coalition.is_empty() || self.coalition.len() != self.misreports.len() {
            return Ok(false);
        }
        let (honest, _) = solver::run_rule(profile, self.rule)?;
        let mut reported = profile.clone();
        for (&v, order) in self.coalition.iter().zip(&self.misreports) {
            reported = reported.with_order(v, order.clone())?;
        }
        let (manipulated, _) = solver::run_rule(&reported, self.rule)?;
        if honest != self.honest_outcome || manipulated != self.manipulated_outcome {
            return Ok(false);
        }
        Ok(self
            .coalition
            .iter()
            .all(|&v| profile.orders()[v].prefers(manipulated.outcome_of(v), honest.outcome_of(v))))
    }
}

fn improvement_of(
    profile: &Profile,
    coalition: &[usize],
    honest: &Assignment,
    manipulated: &Assignment,
) -> Option<Vec<Improvement>> {
    coalition
        .iter()
        .map(|&v| {
            let before = honest.outcome_of(v);
            let after = manipulated.outcome_of(v);
            profile.orders()[v]
                .prefers(after, before)
                .then_some(Improvement {
                    agent: v,
                    honest: before,
                    manipulated: after,
                })
        })
        .collect()
}

/// Size-`k` subsets of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut current: Option<Vec<usize>> = (k <= n).then(|| (0..k).collect());
    std::iter::from_fn(move || {
        let out = current.clone()?;
        let c = current.as_mut().unwrap();
        let mut i = k;
        loop {
            if i == 0 {
                current = None;
                break;
            }
            i -= 1;
            if c[i] < n - k + i {
                c[i] += 1;
                for t in i + 1..k {
                    c[t] = c[t - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    })
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}

/// The order of a coalition member who never leaves the origin.
fn stay_order(origin: Alternative, n: usize) -> PreferenceOrder {
    let target = origin.other();
    let ranking = (1..=n)
        .rev()
        .map(|k| Outcome::new(origin, k))
        .chain((1..=n).rev().map(|k| Outcome::new(target, k)))
        .collect();
    PreferenceOrder::new(ranking, n, 2).expect("chain concatenation is monotone")
}

/// The order of a coalition member who leaves alone when the origin has `a`
/// agents and the target `b`, and never earlier:
/// `(O,n)..(O,a+1), (T,n)..(T,b+1), (O,a)..(O,1), (T,b)..(T,1)`.
fn leave_order(origin: Alternative, n: usize, a: usize, b: usize) -> PreferenceOrder {
    let target = origin.other();
    let ranking = (a + 1..=n)
        .rev()
        .map(|k| Outcome::new(origin, k))
        .chain((b + 1..=n).rev().map(|k| Outcome::new(target, k)))
        .chain((1..=a).rev().map(|k| Outcome::new(origin, k)))
        .chain((1..=b).rev().map(|k| Outcome::new(target, k)))
        .collect();
    PreferenceOrder::new(ranking, n, 2).expect("leave order is monotone")
}

/// Depth-first search over the greedy rule's rounds for one coalition.
///
/// Each round, a coalition member still at the origin either announces it
/// will leave alone (minimal join size 1) or that it never leaves. Any other
/// truthful-looking answer is dominated: it yields the same move this round
/// and only constrains later rounds more. So the searched space covers every
/// outcome reachable by any monotone misreport, and each branch is realised by
/// a concrete order ([`leave_order`] or [`stay_order`]).
struct CoalitionSearch<'p> {
    profile: &'p Profile,
    origin: Alternative,
    members: Vec<usize>,
    is_member: Vec<bool>,
    honest: Assignment,
    budget: u64,
    visited: u64,
}

struct SearchState {
    at_origin: Vec<bool>,
    a: usize,
    b: usize,
    /// Per member: `Some((a, b))` once it has chosen to leave at that state.
    leave_at: Vec<Option<(usize, usize)>>,
}

impl<'p> CoalitionSearch<'p> {
    /// Best outcome a member could still hope for from this state.
    fn can_still_gain(&self, state: &SearchState) -> bool {
        let n = self.profile.n();
        let target = self.origin.other();
        self.members.iter().all(|&v| {
            let order = &self.profile.orders()[v];
            let honest = self.honest.outcome_of(v);
            let best_away = Outcome::new(target, n);
            if !state.at_origin[v] {
                return order.prefers(best_away, honest);
            }
            order.prefers(best_away, honest)
                || order.prefers(Outcome::new(self.origin, state.a), honest)
        })
    }

    fn run(&mut self, state: SearchState) -> Result<Option<(Vec<PreferenceOrder>, Assignment)>> {
        if !self.can_still_gain(&state) {
            return Ok(None);
        }
        let n = self.profile.n();
        let waiting: Vec<usize> = self
            .members
            .iter()
            .enumerate()
            .filter(|(_, &v)| state.at_origin[v])
            .map(|(i, _)| i)
            .collect();
        if state.a == 0 {
            return self.leaf(&state);
        }
        let others: Vec<usize> = (0..n)
            .filter(|&v| state.at_origin[v] && !self.is_member[v])
            .collect();
        let honest_answers: Vec<Option<usize>> = others
            .iter()
            .map(|&v| solver::min_join(&self.profile.orders()[v], self.origin, state.a, state.b))
            .collect();
        for mask in 0u32..(1 << waiting.len()) {
            let leaving: Vec<usize> = waiting
                .iter()
                .enumerate()
                .filter(|(bit, _)| mask & (1 << bit) != 0)
                .map(|(_, &i)| i)
                .collect();
            let mut answers = honest_answers.clone();
            answers.extend(std::iter::repeat_n(Some(1), leaving.len()));
            let Some(k) = solver::select_move(&answers, state.a, solver::MoveSelection::Largest)
            else {
                // Nobody moves: the run ends here.
                if let Some(found) = self.leaf(&state)? {
                    return Ok(Some(found));
                }
                continue;
            };
            let mut next = SearchState {
                at_origin: state.at_origin.clone(),
                a: state.a,
                b: state.b,
                leave_at: state.leave_at.clone(),
            };
            let mut moved = 0;
            for (&v, ans) in others.iter().zip(&honest_answers) {
                if matches!(ans, Some(j) if *j <= k) {
                    next.at_origin[v] = false;
                    moved += 1;
                }
            }
            for &i in &leaving {
                next.at_origin[self.members[i]] = false;
                next.leave_at[i] = Some((state.a, state.b));
                moved += 1;
            }
            next.a -= moved;
            next.b += moved;
            if let Some(found) = self.run(next)? {
                return Ok(Some(found));
            }
        }
        Ok(None)
    }

    fn leaf(&mut self, state: &SearchState) -> Result<Option<(Vec<PreferenceOrder>, Assignment)>> {
        self.visited += 1;
        if self.visited > self.budget {
            return Err(Error::CapExceeded {
                required: self.visited as u128,
                cap: self.budget,
            });
        }
        let target = self.origin.other();
        let placement: Vec<Alternative> = state
            .at_origin
            .iter()
            .map(|&home| if home { self.origin } else { target })
            .collect();
        let f = Assignment::new(placement, 2)?;
        let all_gain = self
            .members
            .iter()
            .all(|&v| self.profile.orders()[v].prefers(f.outcome_of(v), self.honest.outcome_of(v)));
        if !all_gain {
            return Ok(None);
        }
        let n = self.profile.n();
        let misreports = state
            .leave_at
            .iter()
            .map(|at| match *at {
                Some((a, b)) => leave_order(self.origin, n, a, b),
                None => stay_order(self.origin, n),
            })
            .collect();
        Ok(Some((misreports, f)))
    }
}

/// Searches coalitions of size `1..=max_coalition` (by size, then
/// lexicographically by member ids) for a joint misreport under which every
/// member strictly gains against `rule`. The search covers all monotone
/// misreports through their effect on the rule's rounds; `cap` bounds the
/// number of candidate outcomes examined.
pub fn find_manipulation(
    profile: &Profile,
    rule: Rule,
    max_coalition: usize,
    cap: u64,
) -> Result<Option<ManipulationReport>> {
    profile.require_two()?;
    let n = profile.n();
    let (honest, _) = solver::run_rule(profile, rule)?;
    let mut visited = 0;
    for size in 1..=max_coalition.min(n) {
        for coalition in combinations(n, size) {
            let mut is_member = vec![false; n];
            for &v in &coalition {
                is_member[v] = true;
            }
            let mut search = CoalitionSearch {
                profile,
                origin: rule.origin(),
                members: coalition.clone(),
                is_member,
                honest: honest.clone(),
                budget: cap,
                visited,
            };
            let start = SearchState {
                at_origin: vec![true; n],
                a: n,
                b: 0,
                leave_at: vec![None; size],
            };
            let found = search.run(start)?;
            visited = search.visited;
            if let Some((misreports, manipulated)) = found {
                let improvement = improvement_of(profile, &coalition, &honest, &manipulated)
                    .ok_or_else(|| Error::Internal("witness without improvement".into()))?;
                return Ok(Some(ManipulationReport {
                    rule,
                    coalition,
                    misreports,
                    honest_outcome: honest,
                    manipulated_outcome: manipulated,
                    improvement,
                }));
            }
        }
    }
    Ok(None)
}

/// Literal brute force: every coalition, every combination of monotone
/// misreports in canonical enumeration order (first member most significant).
/// Refuses when the number of candidate profiles exceeds `cap`.
pub fn find_manipulation_exhaustive(
    profile: &Profile,
    rule: Rule,
    max_coalition: usize,
    cap: u64,
) -> Result<Option<ManipulationReport>> {
    profile.require_two()?;
    let n = profile.n();
    let max_coalition = max_coalition.min(n);
    let orders: Vec<PreferenceOrder> = enumerate_monotone_orders(n, 2, cap)?.collect();
    let per_agent = orders.len() as u128;
    let required = (1..=max_coalition).fold(0u128, |acc, s| {
        acc.saturating_add(binomial(n, s).saturating_mul(per_agent.saturating_pow(s as u32)))
    });
    if required > cap as u128 {
        return Err(Error::CapExceeded { required, cap });
    }
    let (honest, _) = solver::run_rule(profile, rule)?;
    for size in 1..=max_coalition {
        for coalition in combinations(n, size) {
            let mut digits = vec![0usize; size];
            loop {
                let mut reported: Vec<PreferenceOrder> = profile.orders().to_vec();
                for (&v, &d) in coalition.iter().zip(&digits) {
                    reported[v] = orders[d].clone();
                }
                let reported = Profile::new(profile.alternatives().to_vec(), reported)?;
                let manipulated = solver::run_rule_unchecked(&reported, rule);
                if let Some(improvement) =
                    improvement_of(profile, &coalition, &honest, &manipulated)
                {
                    return Ok(Some(ManipulationReport {
                        rule,
                        coalition: coalition.clone(),
                        misreports: digits.iter().map(|&d| orders[d].clone()).collect(),
                        honest_outcome: honest,
                        manipulated_outcome: manipulated,
                        improvement,
                    }));
                }
                let mut i = size;
                loop {
                    if i == 0 {
                        break;
                    }
                    i -= 1;
                    digits[i] += 1;
                    if digits[i] < orders.len() {
                        break;
                    }
                    digits[i] = 0;
                }
                if digits.iter().all(|&d| d == 0) {
                    break;
                }
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditRow {
    pub index: usize,
    pub n: usize,
    pub stable_count: usize,
    pub unique: bool,
    pub manipulable: bool,
    pub witness_coalition_size: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CrossTab {
    pub unique_manipulable: usize,
    pub unique_not_manipulable: usize,
    pub multiple_manipulable: usize,
    pub multiple_not_manipulable: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AuditSummary {
    pub rows: Vec<AuditRow>,
    pub crosstab: CrossTab,
}

/// For every profile: count stable assignments and look for a manipulation of
/// `rule` by coalitions up to `max_coalition` agents (all agents when `None`).
/// Profiles are processed on the current rayon pool; rows keep corpus order.
pub fn audit_strategyproofness(
    corpus: &[Profile],
    rule: Rule,
    max_coalition: Option<usize>,
    cap: u64,
) -> Result<AuditSummary> {
    let rows = corpus
        .par_iter()
        .enumerate()
        .map(|(index, profile)| {
            let stable_count = enumerate_stable(profile, cap)?.len();
            let limit = max_coalition.unwrap_or(profile.n());
            let report = find_manipulation(profile, rule, limit, cap)?;
            Ok(AuditRow {
                index,
                n: profile.n(),
                stable_count,
                unique: stable_count == 1,
                manipulable: report.is_some(),
                witness_coalition_size: report.map(|r| r.coalition.len()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut crosstab = CrossTab::default();
    for row in &rows {
        match (row.unique, row.manipulable) {
            (true, true) => crosstab.unique_manipulable += 1,
            (true, false) => crosstab.unique_not_manipulable += 1,
            (false, true) => crosstab.multiple_manipulable += 1,
            (false, false) => crosstab.multiple_not_manipulable += 1,
        }
    }
    Ok(AuditSummary { rows, crosstab })
}

//! Machinery for any number of alternatives: the polynomial stability check,
//! exhaustive search for a stable assignment, and a three-alternative profile
//! that has none.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    all_assignments, assignment_count, Alternative, Assignment, Outcome, PreferenceOrder, Profile,
};

/// Certificate that an assignment is unstable: `movers` all prefer ending up
/// in a community of `target_size` at `target` over where they are now.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeviationWitness {
    pub target: Alternative,
    pub target_size: usize,
    pub movers: Vec<usize>,
}

/// Whether `f` is stable.
///
/// Any profitable deviation can be narrowed to agents who all move to the same
/// alternative: the ones that land on `S` gain even if nobody else moves, since
/// nobody leaving `S` only helps them. So it suffices to check, for every `S`
/// and every target size above its current size, whether enough outsiders
/// would rather be in `(S, target size)`.
pub fn is_stable(profile: &Profile, f: &Assignment) -> Result<bool> {
    Ok(find_deviation(profile, f)?.is_none())
}

/// The deviation that breaks `f`, or `None` when `f` is stable. Movers are the
/// lowest willing agent ids.
pub fn find_deviation(profile: &Profile, f: &Assignment) -> Result<Option<DeviationWitness>> {
    profile.check_assignment(f)?;
    Ok(stability_scan(profile, f).0)
}

/// [`find_deviation`] together with the number of pairwise comparisons it made.
pub fn find_deviation_counted(
    profile: &Profile,
    f: &Assignment,
) -> Result<(Option<DeviationWitness>, usize)> {
    profile.check_assignment(f)?;
    Ok(stability_scan(profile, f))
}

fn stability_scan(profile: &Profile, f: &Assignment) -> (Option<DeviationWitness>, usize) {
    let n = profile.n();
    let mut comparisons = 0;
    let current: Vec<Outcome> = (0..n).map(|v| f.outcome_of(v)).collect();
    let mut willing = Vec::with_capacity(n);
    for s in 0..profile.m() {
        let target = Alternative(s);
        let here = f.size_of(target);
        for target_size in here + 1..=n {
            let needed = target_size - here;
            let candidate = Outcome::new(target, target_size);
            willing.clear();
            for (v, order) in profile.orders().iter().enumerate() {
                if f.get(v) == target {
                    continue;
                }
                comparisons += 1;
                if order.prefers(candidate, current[v]) {
                    willing.push(v);
                }
            }
            if willing.len() >= needed {
                willing.truncate(needed);
                let witness = DeviationWitness {
                    target,
                    target_size,
                    movers: willing.clone(),
                };
                return (Some(witness), comparisons);
            }
        }
    }
    (None, comparisons)
}

/// First stable assignment in lexicographic placement order, if any exists.
pub fn find_stable_exhaustive(profile: &Profile, cap: u64) -> Result<Option<Assignment>> {
    let required = assignment_count(profile.n(), profile.m());
    if required > cap as u128 {
        return Err(Error::CapExceeded { required, cap });
    }
    Ok(all_assignments(profile.n(), profile.m()).find(|f| stability_scan(profile, f).0.is_none()))
}

/// Three agents over `{A, B, C}` for which no assignment is stable.
///
/// Each agent's order is the displayed fragment from the classic
/// counterexample, with the outcomes monotonicity forces above it listed first
/// (label order, sizes descending) and the leftover outcomes appended below
/// in the same order.
pub fn no_stable_witness() -> Profile {
    const A: usize = 0;
    const B: usize = 1;
    const C: usize = 2;
    let fragments: [&[(usize, usize)]; 3] = [
        &[(B, 2), (A, 2), (A, 1), (B, 1), (C, 3)],
        &[(C, 2), (B, 2), (B, 1), (C, 1), (A, 3)],
        &[(A, 2), (C, 2), (C, 1), (A, 1), (B, 3)],
    ];
    let orders = fragments
        .iter()
        .map(|fragment| complete_fragment(fragment, 3, 3))
        .collect();
    Profile::with_default_labels(orders).expect("witness profile is well formed")
}

fn complete_fragment(fragment: &[(usize, usize)], n: usize, m: usize) -> PreferenceOrder {
    let in_fragment = |s: usize, k: usize| fragment.contains(&(s, k));
    let mut above = Vec::new();
    let mut below = Vec::new();
    for s in 0..m {
        // Sizes of `s` larger than its largest displayed size must come first.
        let largest_shown = fragment
            .iter()
            .filter(|&&(t, _)| t == s)
            .map(|&(_, k)| k)
            .max()
            .unwrap_or(0);
        for k in (1..=n).rev() {
            if in_fragment(s, k) {
                continue;
            }
            if k > largest_shown && largest_shown > 0 {
                above.push((s, k));
            } else {
                below.push((s, k));
            }
        }
    }
    let pairs: Vec<(usize, usize)> = above
        .into_iter()
        .chain(fragment.iter().copied())
        .chain(below)
        .collect();
    PreferenceOrder::from_pairs(&pairs, n, m).expect("completed fragment is monotone")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stable_example() -> Profile {
        let v1 = PreferenceOrder::from_pairs(&[(0, 2), (0, 1), (1, 2), (1, 1)], 2, 2).unwrap();
        let v2 = PreferenceOrder::from_pairs(&[(1, 2), (1, 1), (0, 2), (0, 1)], 2, 2).unwrap();
        Profile::with_default_labels(vec![v1, v2]).unwrap()
    }

    fn nonforking_example() -> Profile {
        let v1 = PreferenceOrder::from_pairs(&[(0, 2), (1, 2), (0, 1), (1, 1)], 2, 2).unwrap();
        let v2 = PreferenceOrder::from_pairs(&[(1, 2), (0, 2), (1, 1), (0, 1)], 2, 2).unwrap();
        Profile::with_default_labels(vec![v1, v2]).unwrap()
    }

    #[test]
    fn split_is_stable_for_opposed_agents() {
        let p = stable_example();
        let f = Assignment::from_indices(&[0, 1], 2).unwrap();
        assert!(is_stable(&p, &f).unwrap());
    }

    #[test]
    fn together_at_a_is_broken_by_v2_alone() {
        let p = stable_example();
        let f = Assignment::from_indices(&[0, 0], 2).unwrap();
        let w = find_deviation(&p, &f).unwrap().unwrap();
        assert_eq!(
            w,
            DeviationWitness {
                target: Alternative(1),
                target_size: 1,
                movers: vec![1]
            }
        );
    }

    #[test]
    fn fork_is_unstable_when_agents_want_company() {
        let p = nonforking_example();
        let f = Assignment::from_indices(&[0, 1], 2).unwrap();
        let w = find_deviation(&p, &f).unwrap().unwrap();
        assert_eq!(w.target, Alternative(0));
        assert_eq!(w.target_size, 2);
        assert_eq!(w.movers, vec![1]);
    }

    #[test]
    fn mismatched_assignment_is_rejected() {
        let p = stable_example();
        let f = Assignment::from_indices(&[0, 1, 1], 2).unwrap();
        assert!(matches!(
            is_stable(&p, &f),
            Err(Error::InvalidAssignment(_))
        ));
    }

    #[test]
    fn single_agent_goes_to_top_alternative() {
        let order = PreferenceOrder::from_pairs(&[(2, 1), (0, 1), (1, 1)], 1, 3).unwrap();
        let p = Profile::with_default_labels(vec![order]).unwrap();
        let f = find_stable_exhaustive(&p, 1000).unwrap().unwrap();
        assert_eq!(f.placement(), &[Alternative(2)]);
    }

    #[test]
    fn witness_matches_displayed_comparisons() {
        let p = no_stable_witness();
        let o = |s: usize, k: usize| Outcome::new(Alternative(s), k);
        let shown: [&[(usize, usize)]; 3] = [
            &[(1, 2), (0, 2), (0, 1), (1, 1), (2, 3)],
            &[(2, 2), (1, 2), (1, 1), (2, 1), (0, 3)],
            &[(0, 2), (2, 2), (2, 1), (0, 1), (1, 3)],
        ];
        for (agent, chain) in shown.iter().enumerate() {
            let order = p.order(agent).unwrap();
            for pair in chain.windows(2) {
                assert!(order.prefers(o(pair[0].0, pair[0].1), o(pair[1].0, pair[1].1)));
            }
        }
        assert!(p.order(1).unwrap().prefers(o(1, 1), o(0, 3)));
    }

    #[test]
    fn witness_has_no_stable_assignment() {
        let p = no_stable_witness();
        assert_eq!(find_stable_exhaustive(&p, 1000).unwrap(), None);
    }

    #[test]
    fn exhaustive_search_respects_cap() {
        let p = no_stable_witness();
        assert!(matches!(
            find_stable_exhaustive(&p, 26),
            Err(Error::CapExceeded {
                required: 27,
                cap: 26
            })
        ));
    }
}

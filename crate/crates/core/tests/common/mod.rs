#![allow(dead_code)]

use forkcore::model::{
    enumerate_monotone_orders, Alternative, Assignment, Outcome, PreferenceOrder, Profile,
};
use proptest::prelude::*;

pub const CAP: u64 = 10_000_000;

fn label_index(label: &str) -> usize {
    (label.as_bytes()[0] - b'A') as usize
}

/// Builds an order from `(label, size)` pairs, labels being single capitals.
pub fn order(pairs: &[(&str, usize)], n: usize, m: usize) -> PreferenceOrder {
    let pairs: Vec<(usize, usize)> = pairs.iter().map(|&(l, s)| (label_index(l), s)).collect();
    PreferenceOrder::from_pairs(&pairs, n, m).expect("fixture order is monotone")
}

pub fn profile(rows: &[&[(&str, usize)]], m: usize) -> Profile {
    let n = rows.len();
    Profile::with_default_labels(rows.iter().map(|r| order(r, n, m)).collect()).unwrap()
}

pub fn placement(f: &Assignment) -> Vec<usize> {
    f.placement().iter().map(|a| a.0).collect()
}

pub fn assignment(indices: &[usize], m: usize) -> Assignment {
    Assignment::from_indices(indices, m).unwrap()
}

pub fn stable_example() -> Profile {
    profile(
        &[
            &[("A", 2), ("A", 1), ("B", 2), ("B", 1)],
            &[("B", 2), ("B", 1), ("A", 2), ("A", 1)],
        ],
        2,
    )
}

pub fn nonforking_example() -> Profile {
    profile(
        &[
            &[("A", 2), ("B", 2), ("A", 1), ("B", 1)],
            &[("B", 2), ("A", 2), ("B", 1), ("A", 1)],
        ],
        2,
    )
}

pub fn mixed_example() -> Profile {
    profile(
        &[
            &[("A", 2), ("A", 1), ("B", 2), ("B", 1)],
            &[("B", 2), ("A", 2), ("B", 1), ("A", 1)],
        ],
        2,
    )
}

const MANYSTABLE_PREFIXES: [&[(&str, usize)]; 4] = [
    &[("B", 4), ("B", 3), ("A", 4), ("B", 2), ("A", 3)],
    &[("B", 4), ("B", 3), ("B", 2), ("A", 4), ("B", 1)],
    &[("A", 4), ("A", 3), ("A", 2), ("B", 4), ("A", 1)],
    &[("A", 4), ("A", 3), ("B", 4), ("A", 2), ("B", 3)],
];

/// Every monotone completion of each agent's prefix.
pub fn manystable_completions_per_agent() -> Vec<Vec<PreferenceOrder>> {
    let all: Vec<PreferenceOrder> = enumerate_monotone_orders(4, 2, CAP).unwrap().collect();
    MANYSTABLE_PREFIXES
        .iter()
        .map(|prefix| {
            let want: Vec<Outcome> = prefix
                .iter()
                .map(|&(l, s)| Outcome::new(Alternative(label_index(l)), s))
                .collect();
            all.iter()
                .filter(|o| o.ranking().starts_with(&want))
                .cloned()
                .collect()
        })
        .collect()
}

/// The cartesian product of the per-agent completions.
pub fn manystable_profiles() -> Vec<Profile> {
    let per_agent = manystable_completions_per_agent();
    let mut out = vec![Vec::new()];
    for options in &per_agent {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<PreferenceOrder>| {
                options.iter().map(move |o| {
                    let mut p = prefix.clone();
                    p.push(o.clone());
                    p
                })
            })
            .collect();
    }
    out.into_iter()
        .map(|orders| Profile::with_default_labels(orders).unwrap())
        .collect()
}

/// Order from a top-to-bottom sequence of alternative indices; the k-th
/// occurrence of an alternative is its k-th largest size.
pub fn order_from_sequence(seq: &[usize], n: usize, m: usize) -> PreferenceOrder {
    let mut seen = vec![0usize; m];
    let pairs: Vec<(usize, usize)> = seq
        .iter()
        .map(|&alt| {
            seen[alt] += 1;
            (alt, n + 1 - seen[alt])
        })
        .collect();
    PreferenceOrder::from_pairs(&pairs, n, m).unwrap()
}

/// Uniform monotone order: a shuffled multiset of alternative indices.
pub fn arb_order(n: usize, m: usize) -> impl Strategy<Value = PreferenceOrder> {
    let seq: Vec<usize> = (0..m).flat_map(|a| std::iter::repeat_n(a, n)).collect();
    Just(seq)
        .prop_shuffle()
        .prop_map(move |s| order_from_sequence(&s, n, m))
}

pub fn arb_profile_nm(n: usize, m: usize) -> impl Strategy<Value = Profile> {
    proptest::collection::vec(arb_order(n, m), n)
        .prop_map(|orders| Profile::with_default_labels(orders).unwrap())
}

/// Random two-alternative profile with `n` in `lo..=hi`.
pub fn arb_profile(lo: usize, hi: usize) -> impl Strategy<Value = Profile> {
    (lo..=hi).prop_flat_map(|n| arb_profile_nm(n, 2))
}

/// Every assignment of `n` agents to `m` alternatives, own odometer.
pub fn naive_assignments(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    loop {
        out.push(cur.clone());
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < m {
                break;
            }
            cur[i] = 0;
        }
    }
}

fn size_at(placement: &[usize], alt: usize) -> usize {
    placement.iter().filter(|&&a| a == alt).count()
}

/// Stability straight from the definition: no alternative assignment in which
/// every agent that changed community strictly prefers its new outcome.
pub fn naive_is_stable(profile: &Profile, f: &[usize]) -> bool {
    let (n, m) = (profile.n(), profile.m());
    naive_assignments(n, m).iter().all(|g| {
        let movers: Vec<usize> = (0..n).filter(|&v| g[v] != f[v]).collect();
        movers.is_empty()
            || !movers.iter().all(|&v| {
                let order = &profile.orders()[v];
                let new = Outcome::new(Alternative(g[v]), size_at(g, g[v]));
                let old = Outcome::new(Alternative(f[v]), size_at(f, f[v]));
                order.position(new) < order.position(old)
            })
    })
}

pub fn naive_stable_set(profile: &Profile) -> Vec<Vec<usize>> {
    naive_assignments(profile.n(), profile.m())
        .into_iter()
        .filter(|f| naive_is_stable(profile, f))
        .collect()
}

/// The reference greedy rule written directly from its description, with
/// either the largest or the smallest feasible coalition size.
pub fn reference_rule(profile: &Profile, origin: usize, largest: bool) -> Vec<usize> {
    let n = profile.n();
    let target = 1 - origin;
    let mut f = vec![origin; n];
    loop {
        let a = size_at(&f, origin);
        let b = n - a;
        let willing = |v: usize, j: usize| {
            let o = &profile.orders()[v];
            o.position(Outcome::new(Alternative(target), b + j))
                < o.position(Outcome::new(Alternative(origin), a))
        };
        let at_origin: Vec<usize> = (0..n).filter(|&v| f[v] == origin).collect();
        let feasible: Vec<usize> = (1..=a)
            .filter(|&j| at_origin.iter().filter(|&&v| willing(v, j)).count() >= j)
            .collect();
        let k = if largest {
            feasible.last()
        } else {
            feasible.first()
        };
        let Some(&k) = k else { return f };
        let movers: Vec<usize> = at_origin
            .iter()
            .copied()
            .filter(|&v| willing(v, k))
            .collect();
        for v in movers {
            f[v] = target;
        }
    }
}

/// Fixed-seed generator for corpora outside proptest.
pub fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}

/// Seeded uniform monotone two-alternative profile.
pub fn seeded_profile(n: usize, m: usize, rng: &mut rand_chacha::ChaCha8Rng) -> Profile {
    use rand::seq::SliceRandom;
    let orders = (0..n)
        .map(|_| {
            let mut seq: Vec<usize> = (0..m).flat_map(|a| std::iter::repeat_n(a, n)).collect();
            seq.shuffle(rng);
            order_from_sequence(&seq, n, m)
        })
        .collect();
    Profile::with_default_labels(orders).unwrap()
}

/// Proptest settings for integration tests: no regression files, since the
/// runner cannot locate a source root for them.
pub fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

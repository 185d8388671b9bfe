//! JSON documents read and written by the command-line tool.
//!
//! Agent-keyed maps are emitted in ascending agent id order and alternative
//! keyed maps in the profile's alternative order, so output is byte-stable.

use std::collections::BTreeMap;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::elicitation::{AgentQueries, QueryStats};
use crate::error::{Error, Result};
use crate::exhaustive::ManipulationReport;
use crate::model::{
    expand_threshold, Alternative, Assignment, Outcome, PreferenceOrder, Profile,
    ThresholdPreference,
};
use crate::multiway::DeviationWitness;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileDoc {
    n: usize,
    alternatives: Vec<String>,
    agents: Vec<AgentDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentDoc {
    id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ranking: Option<Vec<(String, usize)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    threshold: Option<ThresholdDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ThresholdDoc {
    preferred: String,
    j: usize,
}

fn lookup(labels: &[String], label: &str) -> Result<Alternative> {
    labels
        .iter()
        .position(|l| l == label)
        .map(Alternative)
        .ok_or_else(|| Error::Format(format!("unknown alternative {label:?}")))
}

pub fn parse_profile(text: &str) -> Result<Profile> {
    let doc: ProfileDoc = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    let n = doc.n;
    let m = doc.alternatives.len();
    if doc.agents.len() != n {
        return Err(Error::InvalidProfile(format!(
            "n = {n} but {} agent entries",
            doc.agents.len()
        )));
    }
    let mut slots: Vec<Option<PreferenceOrder>> = vec![None; n];
    for agent in &doc.agents {
        if agent.id >= n {
            return Err(Error::UnknownAgent { agent: agent.id, n });
        }
        if slots[agent.id].is_some() {
            return Err(Error::InvalidProfile(format!(
                "agent id {} listed twice",
                agent.id
            )));
        }
        let order = match (&agent.ranking, &agent.threshold) {
            (Some(ranking), None) => {
                let outcomes = ranking
                    .iter()
                    .map(|(label, size)| Ok(Outcome::new(lookup(&doc.alternatives, label)?, *size)))
                    .collect::<Result<Vec<_>>>()?;
                PreferenceOrder::new(outcomes, n, m).map_err(|violation| Error::InvalidOrder {
                    agent: agent.id,
                    violation,
                })?
            }
            (None, Some(t)) => {
                if m != 2 {
                    return Err(Error::WrongArity(m));
                }
                let preferred = lookup(&doc.alternatives, &t.preferred)?;
                expand_threshold(
                    ThresholdPreference {
                        preferred,
                        threshold: t.j,
                    },
                    n,
                )?
            }
            _ => {
                return Err(Error::Format(format!(
                    "agent {} needs exactly one of \"ranking\" or \"threshold\"",
                    agent.id
                )))
            }
        };
        slots[agent.id] = Some(order);
    }
    let orders = slots
        .into_iter()
        .map(|o| o.expect("every id filled"))
        .collect();
    Profile::new(doc.alternatives, orders)
}

fn outcome_pair(profile: &Profile, o: Outcome) -> (String, usize) {
    (profile.label(o.alternative).to_string(), o.size)
}

fn order_pairs(profile: &Profile, order: &PreferenceOrder) -> Vec<(String, usize)> {
    order
        .ranking()
        .iter()
        .map(|&o| outcome_pair(profile, o))
        .collect()
}

/// Profile document with every agent written as a full ranking.
pub fn profile_to_string(profile: &Profile) -> String {
    let doc = ProfileDoc {
        n: profile.n(),
        alternatives: profile.alternatives().to_vec(),
        agents: profile
            .orders()
            .iter()
            .enumerate()
            .map(|(id, o)| AgentDoc {
                id,
                ranking: Some(order_pairs(profile, o)),
                threshold: None,
            })
            .collect(),
    };
    to_pretty(&doc)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AssignmentDoc {
    pub placement: BTreeMap<usize, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizes: Option<IndexMap<String, usize>>,
}

pub fn assignment_doc(profile: &Profile, f: &Assignment) -> AssignmentDoc {
    labelled_assignment_doc(profile.alternatives(), f)
}

/// Same as [`assignment_doc`] when only the alternative labels are known.
pub fn labelled_assignment_doc(labels: &[String], f: &Assignment) -> AssignmentDoc {
    AssignmentDoc {
        placement: f
            .placement()
            .iter()
            .enumerate()
            .map(|(v, &alt)| (v, labels[alt.index()].clone()))
            .collect(),
        sizes: Some(
            labels
                .iter()
                .zip(f.sizes())
                .map(|(l, &s)| (l.clone(), s))
                .collect(),
        ),
    }
}

pub fn assignment_from_doc(profile: &Profile, doc: &AssignmentDoc) -> Result<Assignment> {
    let n = profile.n();
    if doc.placement.len() != n || doc.placement.keys().enumerate().any(|(i, &v)| i != v) {
        return Err(Error::InvalidAssignment(format!(
            "placement must list agents 0..{} exactly once",
            n.saturating_sub(1)
        )));
    }
    let placement = doc
        .placement
        .values()
        .map(|label| lookup(profile.alternatives(), label))
        .collect::<Result<Vec<_>>>()?;
    let f = Assignment::new(placement, profile.m())?;
    if let Some(sizes) = &doc.sizes {
        for (label, &size) in sizes {
            let alt = lookup(profile.alternatives(), label)?;
            if f.size_of(alt) != size {
                return Err(Error::InvalidAssignment(format!(
                    "size of {label} is {} but document says {size}",
                    f.size_of(alt)
                )));
            }
        }
    }
    Ok(f)
}

pub fn parse_assignment(profile: &Profile, text: &str) -> Result<Assignment> {
    let doc: AssignmentDoc =
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    assignment_from_doc(profile, &doc)
}

pub fn assignment_to_string(profile: &Profile, f: &Assignment) -> String {
    to_pretty(&assignment_doc(profile, f))
}

#[derive(Debug, Serialize)]
pub struct WitnessDoc {
    pub target: String,
    pub target_size: usize,
    pub movers: Vec<usize>,
}

pub fn witness_doc(profile: &Profile, w: &DeviationWitness) -> WitnessDoc {
    WitnessDoc {
        target: profile.label(w.target).to_string(),
        target_size: w.target_size,
        movers: w.movers.clone(),
    }
}

#[derive(Debug, Serialize)]
pub struct ImprovementDoc {
    pub honest: (String, usize),
    pub manipulated: (String, usize),
}

#[derive(Debug, Serialize)]
pub struct ReportDoc {
    pub rule: String,
    pub coalition: Vec<usize>,
    pub misreports: BTreeMap<usize, Vec<(String, usize)>>,
    pub honest_outcome: AssignmentDoc,
    pub manipulated_outcome: AssignmentDoc,
    pub improvement: BTreeMap<usize, ImprovementDoc>,
}

pub fn report_doc(profile: &Profile, r: &ManipulationReport) -> ReportDoc {
    ReportDoc {
        rule: r.rule.to_string(),
        coalition: r.coalition.clone(),
        misreports: r
            .coalition
            .iter()
            .zip(&r.misreports)
            .map(|(&v, o)| (v, order_pairs(profile, o)))
            .collect(),
        honest_outcome: assignment_doc(profile, &r.honest_outcome),
        manipulated_outcome: assignment_doc(profile, &r.manipulated_outcome),
        improvement: r
            .improvement
            .iter()
            .map(|i| {
                (
                    i.agent,
                    ImprovementDoc {
                        honest: outcome_pair(profile, i.honest),
                        manipulated: outcome_pair(profile, i.manipulated),
                    },
                )
            })
            .collect(),
    }
}

#[derive(Debug, Serialize)]
pub struct StatsDoc {
    pub per_agent: BTreeMap<usize, AgentQueries>,
    pub rounds: usize,
    pub total_queries: usize,
}

pub fn stats_doc(stats: &QueryStats) -> StatsDoc {
    StatsDoc {
        per_agent: stats.per_agent.iter().copied().enumerate().collect(),
        rounds: stats.rounds,
        total_queries: stats.total(),
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

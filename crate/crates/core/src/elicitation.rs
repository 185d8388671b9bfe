//! Query-driven version of the `RA` rule.
//!
//! Instead of full orders, agents still at the first alternative are asked each
//! round for the smallest number of co-movers that would make them leave. Once
//! an agent has moved they are never asked again.

use std::cell::RefCell;
use std::io::{BufRead, Write};
use std::rc::Rc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    expand_threshold, Alternative, Assignment, Outcome, PreferenceOrder, Profile,
    ThresholdPreference,
};
use crate::solver::{self, MoveSelection};

/// What the elicitation protocols may ask an agent.
pub trait AgentOracle {
    /// Smallest `j` in `[1, a]` such that the agent prefers `(B, b + j)` to
    /// `(A, a)`, or `None`.
    fn min_join(&mut self, a: usize, b: usize) -> Result<Option<usize>>;

    /// Which alternative the agent prefers when everybody is there.
    fn top_alternative(&mut self) -> Result<Alternative>;

    /// Smallest `j` with `(preferred, j)` above `(other, n)`.
    fn loyalty(&mut self) -> Result<usize>;
}

/// Answers from an explicit order.
#[derive(Debug, Clone)]
pub struct TruthfulOracle {
    order: PreferenceOrder,
}

impl TruthfulOracle {
    pub fn new(order: PreferenceOrder) -> Self {
        TruthfulOracle { order }
    }
}

impl AgentOracle for TruthfulOracle {
    fn min_join(&mut self, a: usize, b: usize) -> Result<Option<usize>> {
        if a == 0 || a + b > self.order.n() {
            return Err(Error::OutOfRange(format!(
                "query a = {a}, b = {b} for n = {}",
                self.order.n()
            )));
        }
        Ok(solver::min_join(&self.order, Alternative(0), a, b))
    }

    fn top_alternative(&mut self) -> Result<Alternative> {
        let n = self.order.n();
        let first = Outcome::new(Alternative(0), n);
        let second = Outcome::new(Alternative(1), n);
        Ok(if self.order.prefers(first, second) {
            Alternative(0)
        } else {
            Alternative(1)
        })
    }

    fn loyalty(&mut self) -> Result<usize> {
        let preferred = self.top_alternative()?;
        Ok(crate::domains::minimal_loyalty(&self.order, preferred))
    }
}

/// One truthful oracle per agent of a two-alternative profile.
pub fn truthful_oracles(profile: &Profile) -> Result<Vec<TruthfulOracle>> {
    profile.require_two()?;
    Ok(profile
        .orders()
        .iter()
        .cloned()
        .map(TruthfulOracle::new)
        .collect())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct AgentQueries {
    pub min_join: usize,
    pub top_alternative: usize,
    pub loyalty: usize,
}

impl AgentQueries {
    pub fn total(&self) -> usize {
        self.min_join + self.top_alternative + self.loyalty
    }
}

/// Communication cost of a protocol run. A question repeated in a later round
/// counts again.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct QueryStats {
    pub per_agent: Vec<AgentQueries>,
    pub rounds: usize,
    /// Round (0-based) in which each agent was moved, if it was.
    #[serde(skip)]
    pub moved_in_round: Vec<Option<usize>>,
    /// Set when some agent was asked a join question after having moved.
    #[serde(skip)]
    pub asked_after_move: bool,
}

impl QueryStats {
    fn new(n: usize) -> Self {
        QueryStats {
            per_agent: vec![AgentQueries::default(); n],
            rounds: 0,
            moved_in_round: vec![None; n],
            asked_after_move: false,
        }
    }

    pub fn total(&self) -> usize {
        self.per_agent.iter().map(AgentQueries::total).sum()
    }
}

fn check_oracle_count<O>(oracles: &[O], n: usize) -> Result<()> {
    if n == 0 || oracles.len() != n {
        return Err(Error::InvalidProfile(format!(
            "expected {n} agents, got {} oracles",
            oracles.len()
        )));
    }
    Ok(())
}

/// Runs the elicitation loop: every round asks each agent still at `A` for
/// their minimal join size, moves the largest self-supporting coalition to `B`,
/// and stops when none exists.
pub fn run_elicited<O: AgentOracle>(
    oracles: &mut [O],
    n: usize,
) -> Result<(Assignment, QueryStats)> {
    check_oracle_count(oracles, n)?;
    let mut stats = QueryStats::new(n);
    let mut placement = vec![Alternative(0); n];
    let (mut a, mut b) = (n, 0);
    while a > 0 {
        let round = stats.rounds;
        stats.rounds += 1;
        let staying: Vec<usize> = (0..n).filter(|&v| placement[v] == Alternative(0)).collect();
        let mut answers = Vec::with_capacity(staying.len());
        for &v in &staying {
            if stats.moved_in_round[v].is_some() {
                stats.asked_after_move = true;
            }
            stats.per_agent[v].min_join += 1;
            let answer = oracles[v].min_join(a, b)?;
            if let Some(j) = answer {
                if j == 0 || j > a {
                    return Err(Error::Protocol {
                        agent: v,
                        detail: format!("join size {j} outside [1, {a}]"),
                    });
                }
            }
            answers.push(answer);
        }
        let Some(k) = solver::select_move(&answers, a, MoveSelection::Largest) else {
            break;
        };
        for (&v, answer) in staying.iter().zip(&answers) {
            if matches!(answer, Some(j) if *j <= k) {
                placement[v] = Alternative(1);
                stats.moved_in_round[v] = Some(round);
                a -= 1;
                b += 1;
            }
        }
    }
    let f = Assignment::new(placement, 2)?;
    Ok((f, stats))
}

/// Two questions per agent: their preferred alternative and their loyalty.
/// The answers are expanded into threshold orders and solved with `RA`; this is
/// exact whenever the true orders are non-critically interleaving.
pub fn run_elicited_nci<O: AgentOracle>(
    oracles: &mut [O],
    n: usize,
) -> Result<(Assignment, QueryStats)> {
    check_oracle_count(oracles, n)?;
    let mut stats = QueryStats::new(n);
    stats.rounds = 1;
    let mut orders = Vec::with_capacity(n);
    for (v, oracle) in oracles.iter_mut().enumerate() {
        stats.per_agent[v].top_alternative += 1;
        let preferred = oracle.top_alternative()?;
        if preferred.0 > 1 {
            return Err(Error::Protocol {
                agent: v,
                detail: format!("unknown alternative #{}", preferred.0),
            });
        }
        stats.per_agent[v].loyalty += 1;
        let threshold = oracle.loyalty()?;
        if threshold == 0 || threshold > n {
            return Err(Error::DomainViolation(format!(
                "agent {v} reported loyalty {threshold}, no threshold order in [1, {n}] matches"
            )));
        }
        orders.push(expand_threshold(
            ThresholdPreference {
                preferred,
                threshold,
            },
            n,
        )?);
    }
    let profile = Profile::with_default_labels(orders)?;
    let (f, trace) = solver::run_ra(&profile)?;
    for step in &trace.iterations {
        for &v in &step.moved {
            stats.moved_in_round[v] = Some(0);
        }
    }
    Ok((f, stats))
}

/// Maximum number of times a malformed answer is re-prompted.
pub const MAX_REPROMPTS: usize = 3;

/// A turn-based text session: prompts go to `out`, one answer per line is read
/// from `input`.
pub struct Console<R, W> {
    input: R,
    out: W,
    labels: Vec<String>,
}

impl<R: BufRead, W: Write> Console<R, W> {
    pub fn new(input: R, out: W, labels: Vec<String>) -> Self {
        Console { input, out, labels }
    }

    fn ask<T>(
        &mut self,
        prompt: &str,
        parse: impl Fn(&str) -> std::result::Result<T, String>,
    ) -> Result<T> {
        let io_err = |e: std::io::Error| Error::SessionAborted(e.to_string());
        for attempt in 0..=MAX_REPROMPTS {
            writeln!(self.out, "{prompt}").map_err(io_err)?;
            self.out.flush().map_err(io_err)?;
            let mut line = String::new();
            if self.input.read_line(&mut line).map_err(io_err)? == 0 {
                return Err(Error::SessionAborted("input closed".into()));
            }
            match parse(line.trim()) {
                Ok(v) => return Ok(v),
                Err(msg) if attempt < MAX_REPROMPTS => {
                    writeln!(self.out, "! {msg}").map_err(io_err)?;
                }
                Err(msg) => {
                    return Err(Error::SessionAborted(format!(
                        "{msg} (gave up after {MAX_REPROMPTS} re-prompts)"
                    )))
                }
            }
        }
        unreachable!("loop returns on the last attempt")
    }

    pub fn into_inner(self) -> (R, W) {
        (self.input, self.out)
    }
}

fn parse_bounded(
    text: &str,
    hi: usize,
    allow_none: bool,
) -> std::result::Result<Option<usize>, String> {
    if allow_none && text == "none" {
        return Ok(None);
    }
    let expected = if allow_none {
        format!("expected an integer in [1, {hi}] or \"none\"")
    } else {
        format!("expected an integer in [1, {hi}]")
    };
    match text.parse::<usize>() {
        Ok(v) if (1..=hi).contains(&v) => Ok(Some(v)),
        _ => Err(expected),
    }
}

/// An agent answering through a shared [`Console`].
pub struct ConsoleOracle<R, W> {
    agent: usize,
    n: usize,
    console: Rc<RefCell<Console<R, W>>>,
}

impl<R, W> ConsoleOracle<R, W> {
    pub fn new(agent: usize, n: usize, console: Rc<RefCell<Console<R, W>>>) -> Self {
        ConsoleOracle { agent, n, console }
    }

    /// One oracle per agent id, all reading from the same console.
    pub fn for_agents(n: usize, console: Rc<RefCell<Console<R, W>>>) -> Vec<Self> {
        (0..n)
            .map(|agent| ConsoleOracle::new(agent, n, Rc::clone(&console)))
            .collect()
    }
}

impl<R: BufRead, W: Write> AgentOracle for ConsoleOracle<R, W> {
    fn min_join(&mut self, a: usize, b: usize) -> Result<Option<usize>> {
        let prompt = format!("Q agent={} a={a} b={b}", self.agent);
        self.console
            .borrow_mut()
            .ask(&prompt, |t| parse_bounded(t, a, true))
    }

    fn top_alternative(&mut self) -> Result<Alternative> {
        let prompt = format!("Q agent={} top", self.agent);
        let mut console = self.console.borrow_mut();
        let labels = console.labels.clone();
        console.ask(&prompt, |t| {
            labels
                .iter()
                .position(|l| l == t)
                .map(Alternative)
                .ok_or_else(|| format!("expected one of {}", labels.join(", ")))
        })
    }

    fn loyalty(&mut self) -> Result<usize> {
        let prompt = format!("Q agent={} loyalty", self.agent);
        let n = self.n;
        self.console.borrow_mut().ask(&prompt, |t| {
            parse_bounded(t, n, false).map(|v| v.unwrap_or(1))
        })
    }
}

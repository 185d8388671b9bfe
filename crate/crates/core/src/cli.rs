//! The `forkcore` command line: one subcommand per operation, JSON in and out.

use std::cell::RefCell;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::rc::Rc;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::domains::{self, DomainClass};
use crate::elicitation::{self, AgentOracle, Console, ConsoleOracle, QueryStats};
use crate::error::Error;
use crate::exhaustive;
use crate::io::{self as docs, AssignmentDoc, ReportDoc, StatsDoc, WitnessDoc};
use crate::model::{default_labels, Alternative, Assignment, Profile, DEFAULT_CAP};
use crate::multiway;
use crate::solver::{self, Rule};

#[derive(Debug, Parser)]
#[command(
    name = "forkcore",
    version,
    about = "Stable assignments for forking problems"
)]
pub struct Cli {
    /// Raise the enumeration cap (default 10^7).
    #[arg(long, global = true, env = "FORKCORE_CAP")]
    pub max_size: Option<u64>,

    /// Worker threads for corpus audits.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run RA or RB on a two-alternative profile.
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "RA")]
        rule: Rule,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the solver trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// First stable assignment by exhaustive search (any number of alternatives).
    SolveMulti {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether an assignment is stable.
    Check {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        assignment: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List every stable assignment.
    StableEnum {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Whether the profile has exactly one stable assignment.
    Unique {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Query-driven solving, simulated from a profile or answered on stdin.
    Elicit {
        #[arg(long, conflicts_with_all = ["interactive", "n"])]
        input: Option<PathBuf>,
        #[arg(long, requires = "n")]
        interactive: bool,
        #[arg(long)]
        n: Option<usize>,
        /// Use the two-question protocol for threshold preferences.
        #[arg(long)]
        nci: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Domain classes, loyalties, cohesiveness and uniqueness conditions.
    Classify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded random profile from a preference domain.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value = "monotone-general")]
        class: DomainClass,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for a profitable coalitional misreport against a rule.
    Manipulate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "RA")]
        rule: Rule,
        #[arg(long, default_value_t = 1)]
        max_coalition: usize,
        /// Enumerate every combination of monotone misreports literally.
        #[arg(long)]
        exhaustive: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Uniqueness against manipulability over a directory of profiles.
    Audit {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value = "RA")]
        rule: Rule,
        /// Largest coalition searched; defaults to all agents.
        #[arg(long)]
        max_coalition: Option<usize>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a three-alternative profile without any stable assignment.
    WitnessNoStable {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Which subcommand exposes each library operation.
pub const OPERATIONS: &[(&str, &str)] = &[
    ("solve", "solver::run_ra"),
    ("solve", "solver::run_rb"),
    ("unique", "solver::is_unique_stable"),
    ("check", "multiway::is_stable"),
    ("check", "model::induced_preference_over_assignments"),
    ("solve-multi", "multiway::find_stable_exhaustive"),
    ("witness-no-stable", "multiway::no_stable_witness"),
    ("stable-enum", "exhaustive::enumerate_stable"),
    ("manipulate", "exhaustive::find_manipulation"),
    ("manipulate", "model::enumerate_monotone_orders"),
    ("audit", "exhaustive::audit_strategyproofness"),
    ("elicit", "elicitation::run_elicited"),
    ("elicit", "elicitation::run_elicited_nci"),
    ("elicit", "elicitation::truthful_oracles"),
    ("classify", "domains::classify_order"),
    ("classify", "domains::is_cohesive"),
    ("classify", "domains::loyalty_vector"),
    ("classify", "domains::check_loyalty_uniqueness"),
    ("classify", "domains::check_coalition_uniqueness"),
    ("classify", "model::prefers"),
    ("generate", "domains::generate"),
    ("generate", "model::validate_order"),
    ("generate", "model::expand_threshold"),
];

/// Failure of a command, with the exit status it maps to.
#[derive(Debug)]
pub enum CliError {
    Domain(Error),
    Io(PathBuf, io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Domain(e) if e.is_cap() => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Domain(e) => write!(f, "{e}"),
            CliError::Io(path, e) => write!(f, "{}: {e}", path.display()),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Domain(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn load_profile(path: &Path) -> CliResult<Profile> {
    Ok(docs::parse_profile(&read(path)?)?)
}

fn emit(out: &Option<PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(path.clone(), e)),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Io(PathBuf::from("<stdout>"), e))
        }
    }
}

#[derive(Serialize)]
struct StableList {
    count: usize,
    assignments: Vec<AssignmentDoc>,
}

#[derive(Serialize)]
struct UniqueDoc {
    unique: bool,
}

#[derive(Serialize)]
struct CheckDoc {
    stable: bool,
    witness: Option<WitnessDoc>,
}

#[derive(Serialize)]
struct ElicitDoc {
    assignment: AssignmentDoc,
    stats: StatsDoc,
}

#[derive(Serialize)]
struct AgentClassDoc {
    id: usize,
    preferred: String,
    loyalty: usize,
    degree: usize,
    class: DomainClass,
    nci_threshold: Option<usize>,
}

#[derive(Serialize)]
struct CohesionDoc {
    cohesive: bool,
    witness: Option<String>,
    alternatives: Vec<String>,
}

#[derive(Serialize)]
struct UniquenessDoc {
    loyalty_condition: bool,
    coalition_condition: Option<bool>,
    unique: bool,
}

#[derive(Serialize)]
struct ClassifyDoc {
    agents: Vec<AgentClassDoc>,
    profile: domains::ProfileClassification,
    cohesive: CohesionDoc,
    uniqueness: UniquenessDoc,
}

#[derive(Serialize)]
struct ManipulateDoc {
    manipulable: bool,
    report: Option<ReportDoc>,
}

#[derive(Serialize)]
struct AuditRowDoc {
    id: String,
    n: usize,
    stable_count: usize,
    unique: bool,
    manipulable: bool,
    witness_coalition_size: Option<usize>,
}

#[derive(Serialize)]
struct AuditDoc {
    rule: String,
    profiles: Vec<AuditRowDoc>,
    crosstab: exhaustive::CrossTab,
}

/// Logs every query and answer of a simulated session.
struct Transcribed<O> {
    agent: usize,
    inner: O,
    labels: Vec<String>,
    log: Rc<RefCell<String>>,
}

impl<O: AgentOracle> AgentOracle for Transcribed<O> {
    fn min_join(&mut self, a: usize, b: usize) -> crate::Result<Option<usize>> {
        let answer = self.inner.min_join(a, b)?;
        let shown = answer.map_or("none".to_string(), |j| j.to_string());
        self.log
            .borrow_mut()
            .push_str(&format!("Q agent={} a={a} b={b}\n{shown}\n", self.agent));
        Ok(answer)
    }

    fn top_alternative(&mut self) -> crate::Result<Alternative> {
        let answer = self.inner.top_alternative()?;
        let shown = self
            .labels
            .get(answer.0)
            .cloned()
            .unwrap_or_else(|| format!("#{}", answer.0));
        self.log
            .borrow_mut()
            .push_str(&format!("Q agent={} top\n{shown}\n", self.agent));
        Ok(answer)
    }

    fn loyalty(&mut self) -> crate::Result<usize> {
        let answer = self.inner.loyalty()?;
        self.log
            .borrow_mut()
            .push_str(&format!("Q agent={} loyalty\n{answer}\n", self.agent));
        Ok(answer)
    }
}

fn run_protocol<O: AgentOracle>(
    oracles: &mut [O],
    n: usize,
    nci: bool,
) -> crate::Result<(Assignment, QueryStats)> {
    if nci {
        elicitation::run_elicited_nci(oracles, n)
    } else {
        elicitation::run_elicited(oracles, n)
    }
}

fn classify(profile: &Profile) -> CliResult<ClassifyDoc> {
    let (per_agent, summary) = domains::classify_profile(profile)?;
    let cohesive = domains::cohesive_alternatives(profile)?;
    let coalition_condition = if summary.non_critically_interleaving {
        Some(domains::check_coalition_uniqueness(profile)?)
    } else {
        None
    };
    let label = |a: Alternative| profile.label(a).to_string();
    Ok(ClassifyDoc {
        agents: per_agent
            .iter()
            .enumerate()
            .map(|(id, c)| AgentClassDoc {
                id,
                preferred: label(c.preferred),
                loyalty: c.loyalty,
                degree: c.degree,
                class: c.class,
                nci_threshold: c.nci_threshold,
            })
            .collect(),
        profile: summary,
        cohesive: CohesionDoc {
            cohesive: !cohesive.is_empty(),
            witness: cohesive.first().map(|&a| label(a)),
            alternatives: cohesive.iter().map(|&a| label(a)).collect(),
        },
        uniqueness: UniquenessDoc {
            loyalty_condition: domains::check_loyalty_uniqueness(profile)?,
            coalition_condition,
            unique: solver::is_unique_stable(profile)?,
        },
    })
}

fn corpus_files(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::Io(dir.to_path_buf(), e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry
            .map_err(|e| CliError::Io(dir.to_path_buf(), e))?
            .path();
        if path.extension().is_some_and(|x| x == "json") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn write_csv(path: &Path, rows: &[AuditRowDoc]) -> CliResult<()> {
    let io_err = |e: csv::Error| CliError::Io(path.to_path_buf(), e.into());
    let mut w = csv::Writer::from_path(path).map_err(io_err)?;
    w.write_record([
        "profile_id",
        "n",
        "stable_count",
        "unique",
        "manipulable",
        "witness_coalition_size",
    ])
    .map_err(io_err)?;
    for r in rows {
        w.write_record([
            r.id.clone(),
            r.n.to_string(),
            r.stable_count.to_string(),
            r.unique.to_string(),
            r.manipulable.to_string(),
            r.witness_coalition_size
                .map_or(String::new(), |s| s.to_string()),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(|e| CliError::Io(path.to_path_buf(), e))
}

/// Runs one parsed command.
pub fn execute(cli: Cli) -> CliResult<()> {
    let cap = cli.max_size.unwrap_or(DEFAULT_CAP);
    match cli.command {
        Command::Solve {
            input,
            rule,
            out,
            trace,
        } => {
            let profile = load_profile(&input)?;
            let (f, steps) = solver::run_rule(&profile, rule)?;
            if let Some(path) = &trace {
                emit(&Some(path.clone()), &docs::to_pretty(&steps))?;
            }
            emit(&out, &docs::assignment_to_string(&profile, &f))
        }
        Command::SolveMulti { input, out } => {
            let profile = load_profile(&input)?;
            match multiway::find_stable_exhaustive(&profile, cap)? {
                Some(f) => emit(&out, &docs::assignment_to_string(&profile, &f)),
                None => {
                    eprintln!("no stable assignment exists");
                    emit(&out, "null\n")
                }
            }
        }
        Command::Check {
            input,
            assignment,
            out,
        } => {
            let profile = load_profile(&input)?;
            let f = docs::parse_assignment(&profile, &read(&assignment)?)?;
            let witness = multiway::find_deviation(&profile, &f)?;
            let doc = CheckDoc {
                stable: witness.is_none(),
                witness: witness.map(|w| docs::witness_doc(&profile, &w)),
            };
            emit(&out, &docs::to_pretty(&doc))
        }
        Command::StableEnum { input, out } => {
            let profile = load_profile(&input)?;
            let all = exhaustive::enumerate_stable(&profile, cap)?;
            let doc = StableList {
                count: all.len(),
                assignments: all
                    .iter()
                    .map(|f| docs::assignment_doc(&profile, f))
                    .collect(),
            };
            emit(&out, &docs::to_pretty(&doc))
        }
        Command::Unique { input, out } => {
            let profile = load_profile(&input)?;
            let doc = UniqueDoc {
                unique: solver::is_unique_stable(&profile)?,
            };
            emit(&out, &docs::to_pretty(&doc))
        }
        Command::Elicit {
            input,
            interactive,
            n,
            nci,
            out,
        } => {
            let (profile_labels, f, stats) = if interactive {
                let n = n.expect("clap enforces --n with --interactive");
                let labels = default_labels(2);
                let stdin = io::stdin();
                let console = Rc::new(RefCell::new(Console::new(
                    stdin.lock(),
                    io::stdout(),
                    labels.clone(),
                )));
                let mut oracles = ConsoleOracle::for_agents(n, console);
                let (f, stats) = run_protocol(&mut oracles, n, nci)?;
                (labels, f, stats)
            } else {
                let Some(input) = input else {
                    return Err(
                        Error::Format("elicit needs --input or --interactive --n".into()).into(),
                    );
                };
                let profile = load_profile(&input)?;
                let log = Rc::new(RefCell::new(String::new()));
                let mut oracles: Vec<_> = elicitation::truthful_oracles(&profile)?
                    .into_iter()
                    .enumerate()
                    .map(|(agent, inner)| Transcribed {
                        agent,
                        inner,
                        labels: profile.alternatives().to_vec(),
                        log: Rc::clone(&log),
                    })
                    .collect();
                let result = run_protocol(&mut oracles, profile.n(), nci);
                print!("{}", log.borrow());
                let (f, stats) = result?;
                (profile.alternatives().to_vec(), f, stats)
            };
            let doc = ElicitDoc {
                assignment: docs::labelled_assignment_doc(&profile_labels, &f),
                stats: docs::stats_doc(&stats),
            };
            emit(&out, &docs::to_pretty(&doc))
        }
        Command::Classify { input, out } => {
            let profile = load_profile(&input)?;
            emit(&out, &docs::to_pretty(&classify(&profile)?))
        }
        Command::Generate {
            n,
            m,
            class,
            seed,
            out,
        } => {
            let profile = domains::generate(n, m, class, seed)?;
            emit(&out, &docs::profile_to_string(&profile))
        }
        Command::Manipulate {
            input,
            rule,
            max_coalition,
            exhaustive: literal,
            out,
        } => {
            let profile = load_profile(&input)?;
            let report = if literal {
                exhaustive::find_manipulation_exhaustive(&profile, rule, max_coalition, cap)?
            } else {
                exhaustive::find_manipulation(&profile, rule, max_coalition, cap)?
            };
            let doc = ManipulateDoc {
                manipulable: report.is_some(),
                report: report.as_ref().map(|r| docs::report_doc(&profile, r)),
            };
            emit(&out, &docs::to_pretty(&doc))
        }
        Command::Audit {
            corpus,
            rule,
            max_coalition,
            csv,
            out,
        } => {
            let files = corpus_files(&corpus)?;
            let mut ids = Vec::with_capacity(files.len());
            let mut profiles = Vec::with_capacity(files.len());
            for path in &files {
                ids.push(
                    path.file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_default(),
                );
                profiles.push(load_profile(path)?);
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(cli.threads.max(1))
                .build()
                .map_err(|e| Error::Internal(e.to_string()))?;
            let summary = pool.install(|| {
                exhaustive::audit_strategyproofness(&profiles, rule, max_coalition, cap)
            })?;
            let rows: Vec<AuditRowDoc> = summary
                .rows
                .iter()
                .map(|r| AuditRowDoc {
                    id: ids[r.index].clone(),
                    n: r.n,
                    stable_count: r.stable_count,
                    unique: r.unique,
                    manipulable: r.manipulable,
                    witness_coalition_size: r.witness_coalition_size,
                })
                .collect();
            if let Some(path) = &csv {
                write_csv(path, &rows)?;
            }
            let doc = AuditDoc {
                rule: rule.to_string(),
                profiles: rows,
                crosstab: summary.crosstab,
            };
            emit(&out, &docs::to_pretty(&doc))
        }
        Command::WitnessNoStable { out } => emit(
            &out,
            &docs::profile_to_string(&multiway::no_stable_witness()),
        ),
    }
}

/// Parses `std::env::args`, runs the command, and maps failures to exit codes:
/// 1 for domain and validation errors, 2 for cap and usage errors.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("forkcore: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ratcl_core::oracle::canonical::{canonical_size_hint, minimally_entails, Inconclusive, Method, OracleOptions, Verdict};
use ratcl_core::oracle::FiniteInterpretation;
use ratcl_core::{
    abox_consistent, closure_set, parse_concept, Assertion, Concept, concept_rank, exceptionality_sequence, in_tbox_closure, parse_kb, parse_query,
    strict_part, AboxError, AboxReasoner, ClassicalBase, EngineError, KnowledgeBase, ParseError, Query,
    RankAssignment, RankValue, RankedTbox, SearchMode,
};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Parser, Debug)]
#[command(name = "ratcl", version, about = "Rational closure for ALC with typicality")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classical consistency and existence of consistent rank assignments.
    Check(Common),
    /// Exceptionality levels and the rank of every concept in the closure set,
    /// plus the concept given with --query.
    Ranks(Common),
    /// Membership of an inclusion or assertion in the rational closure.
    Query(Common),
    /// Minimal assignments and every derivable assertion per individual.
    AboxClosure(Common),
    /// Decide a query against finite canonical minimal models.
    Oracle(Common),
    /// The defaults attached to each individual under an assignment.
    DumpMu(Common),
}

#[derive(clap::Args, Debug)]
struct Common {
    /// KB file, or `-` for standard input.
    kb: PathBuf,
    #[arg(long)]
    query: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    domain_bound: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    rank_bound: Option<u32>,
    #[arg(long, value_enum, default_value_t = Base::Materialized)]
    classical_base: Base,
    /// Let the oracle enumerate every minimal model, canonical or not.
    #[arg(long)]
    no_canonical: bool,
    /// Check assignments of equal total rank in parallel.
    #[arg(long)]
    parallel: bool,
    /// Assignment for dump-mu, as `a=1,b=0`; all minimal ones when omitted.
    #[arg(long)]
    assignment: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Base {
    Strict,
    Materialized,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Abox(AboxError),
    #[error("{0}")]
    Engine(#[from] EngineError),
    #[error("{0}")]
    Usage(String),
}

impl From<AboxError> for CliError {
    fn from(e: AboxError) -> Self {
        match e {
            AboxError::Engine(e) => CliError::Engine(e),
            other => CliError::Abox(other),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Parse(_) => 3,
            CliError::Abox(AboxError::NoConsistentAssignment) => 4,
            CliError::Abox(_) | CliError::Engine(_) | CliError::Usage(_) => 5,
        }
    }
}

struct Output {
    text: String,
    json: Value,
}

struct Session {
    kb: KnowledgeBase,
    ranked: RankedTbox,
    opts: Common,
}

impl Session {
    fn load(opts: Common) -> Result<Self, CliError> {
        let path = opts.kb.display().to_string();
        let text = if path == "-" {
            std::io::read_to_string(std::io::stdin())
        } else {
            std::fs::read_to_string(&opts.kb)
        }
        .map_err(|source| CliError::Io { path, source })?;
        let kb = parse_kb(&text)?;
        let ranked = exceptionality_sequence(&kb)?;
        Ok(Session { kb, ranked, opts })
    }

    fn base(&self) -> ClassicalBase {
        match self.opts.classical_base {
            Base::Strict => ClassicalBase::StrictOnly,
            Base::Materialized => ClassicalBase::Materialized,
        }
    }

    fn query(&self) -> Result<Query, CliError> {
        let text = self.opts.query.as_deref().ok_or_else(|| CliError::Usage("this command needs --query".into()))?;
        Ok(parse_query(text)?)
    }

    fn reasoner(&self) -> Result<AboxReasoner<'_>, CliError> {
        Ok(AboxReasoner::new(&self.kb, &self.ranked, closure_set(&self.kb, None), self.base())?)
    }

    fn minimal(&self, ab: &AboxReasoner<'_>) -> Result<Vec<RankAssignment>, CliError> {
        Ok(ab.minimal_consistent_assignments(SearchMode::Pruned, self.opts.parallel)?)
    }
}

fn rank_json(r: RankValue) -> Value {
    match r {
        RankValue::Finite(n) => json!(n),
        RankValue::Infinite => json!("inf"),
    }
}

fn assignment_json(a: &RankAssignment) -> Value {
    json!(a.ranks())
}

fn plural(n: usize, word: &str) -> String {
    format!("{n} {word}{}", if n == 1 { "" } else { "s" })
}

fn check(s: &Session) -> Result<Output, CliError> {
    // T(C)(a) implies C(a), which is all the classical check can use
    let abox: Vec<Assertion> = s
        .kb
        .abox()
        .iter()
        .map(|a| match a {
            Assertion::Concept { concept: Concept::Typ(c), individual } => {
                Assertion::Concept { concept: (**c).clone(), individual: individual.clone() }
            }
            other => other.clone(),
        })
        .collect();
    let classical = abox_consistent(&strict_part(&s.kb), &abox)?;
    if s.kb.has_typical_assertions() {
        return Ok(Output {
            text: format!(
                "{}; typicality assertions: rank assignments not computed, use the oracle",
                if classical { "classically consistent" } else { "inconsistent" }
            ),
            json: json!({
                "classically_consistent": classical,
                "max_finite_rank": s.ranked.max_finite_rank(),
                "minimal_assignments": Value::Null,
            }),
        });
    }
    let ab = s.reasoner()?;
    let minimal = if classical {
        match s.minimal(&ab) {
            Ok(m) => m,
            Err(CliError::Abox(AboxError::NoConsistentAssignment)) => Vec::new(),
            Err(e) => return Err(e),
        }
    } else {
        Vec::new()
    };
    let text = match (classical, minimal.len()) {
        (false, _) => "inconsistent".to_string(),
        (true, 0) => "classically consistent; no consistent rank assignment".to_string(),
        (true, n) => format!("consistent; {}", plural(n, "minimal assignment")),
    };
    let json = json!({
        "classically_consistent": classical,
        "max_finite_rank": s.ranked.max_finite_rank(),
        "minimal_assignments": minimal.iter().map(assignment_json).collect::<Vec<_>>(),
    });
    Ok(Output { text, json })
}

fn ranks(s: &Session) -> Result<Output, CliError> {
    let r = &s.ranked;
    let mut text = String::new();
    let mut levels = Vec::new();
    for i in 0..r.level_count() {
        let members: Vec<String> = r.defeasible_level(i).iter().map(|inc| inc.to_string()).collect();
        text.push_str(&format!("E{i}: {}\n", if members.is_empty() { "(none)".into() } else { members.join("; ") }));
        levels.push(json!({ "level": i, "defeasible": members }));
    }
    let infinite: Vec<String> = r.infinite_inclusions().iter().map(|inc| inc.to_string()).collect();
    if !infinite.is_empty() {
        text.push_str(&format!("rank inf: {}\n", infinite.join("; ")));
    }
    let mut concepts = Vec::new();
    let asked = match s.opts.query.as_deref() {
        Some(text) => vec![parse_concept(text)?],
        None => Vec::new(),
    };
    for c in closure_set(&s.kb, None).iter().chain(&asked) {
        let rank = concept_rank(c, r)?;
        text.push_str(&format!("rank({c}) = {rank}\n"));
        concepts.push(json!({ "concept": c.to_string(), "rank": rank_json(rank) }));
    }
    let json = json!({
        "max_finite_rank": r.max_finite_rank(),
        "levels": levels,
        "infinite": infinite,
        "ranks": concepts,
    });
    Ok(Output { text: text.trim_end().to_string(), json })
}

fn query(s: &Session) -> Result<Output, CliError> {
    let q = s.query()?;
    match &q {
        Query::Inclusion(inc) => {
            let yes = in_tbox_closure(inc, &s.ranked, s.base())?;
            Ok(Output {
                text: if yes { "yes" } else { "no" }.to_string(),
                json: json!({ "query": q.to_string(), "answer": yes }),
            })
        }
        Query::Assertion { concept, individual } => {
            let ab = s.reasoner()?;
            let minimal = s.minimal(&ab)?;
            let verdict = ab.query(&minimal, concept, individual)?;
            let mut text = if verdict.holds { "yes".to_string() } else { "no".to_string() };
            let mut rows = Vec::new();
            for (a, ok) in &verdict.per_assignment {
                if !verdict.holds {
                    text.push_str(&format!("\n  {a}: {}", if *ok { "derived" } else { "not derived" }));
                }
                rows.push(json!({ "assignment": assignment_json(a), "derived": ok }));
            }
            Ok(Output { text, json: json!({ "query": q.to_string(), "answer": verdict.holds, "assignments": rows }) })
        }
    }
}

fn abox_closure(s: &Session) -> Result<Output, CliError> {
    let ab = s.reasoner()?;
    let minimal = s.minimal(&ab)?;
    let derived = ab.derivable(&minimal)?;
    let shown: Vec<String> = minimal.iter().map(|a| a.to_string()).collect();
    let mut text = format!("minimal assignments: {}\n", shown.join(" "));
    let mut per = BTreeMap::new();
    for (ind, concepts) in &derived {
        let names: Vec<String> = concepts.iter().map(|c| c.to_string()).collect();
        text.push_str(&format!("{ind}: {}\n", names.join(", ")));
        per.insert(ind.clone(), names);
    }
    let json = json!({
        "minimal_assignments": minimal.iter().map(assignment_json).collect::<Vec<_>>(),
        "derivable": per,
    });
    Ok(Output { text: text.trim_end().to_string(), json })
}

#[derive(Serialize)]
struct ModelDump<'a> {
    size: usize,
    atoms: &'a BTreeMap<String, std::collections::BTreeSet<usize>>,
    roles: &'a BTreeMap<String, std::collections::BTreeSet<(usize, usize)>>,
    individuals: &'a BTreeMap<String, usize>,
    rank: &'a [u32],
}

fn model_text(m: &FiniteInterpretation) -> String {
    let mut out = format!("  domain 0..{}, ranks {:?}", m.size, m.rank);
    for (a, ext) in &m.atoms {
        out.push_str(&format!("\n  {a} = {ext:?}"));
    }
    for (r, ext) in &m.roles {
        out.push_str(&format!("\n  {r} = {ext:?}"));
    }
    for (i, x) in &m.individuals {
        out.push_str(&format!("\n  {i} -> {x}"));
    }
    out
}

fn inconclusive_text(e: &Inconclusive) -> String {
    match e {
        Inconclusive::DomainBound { needed, bound } => {
            format!("inconclusive: a canonical minimal model needs {needed} elements, bound is {bound}")
        }
        Inconclusive::RankBound { needed, bound } => {
            format!("inconclusive: a canonical minimal model uses rank {needed}, bound is {bound}")
        }
        Inconclusive::NoModel => "inconclusive: no model within the bounds".to_string(),
        Inconclusive::TooManyTypes => "inconclusive: too many types to enumerate".to_string(),
    }
}

fn oracle(s: &Session) -> Result<Output, CliError> {
    let q = s.query()?;
    let domain_bound = match s.opts.domain_bound {
        Some(n) => n as usize,
        None => canonical_size_hint(&s.kb, Some(&q)).unwrap_or(8).clamp(1, 8),
    };
    let rank_bound = s.opts.rank_bound.unwrap_or(s.ranked.max_finite_rank() + 2);
    let method = if s.opts.no_canonical { Method::Enumeration { canonical: false } } else { Method::Canonical };
    let verdict = minimally_entails(&s.kb, &q, &OracleOptions { domain_bound, rank_bound, method });
    let bounds = json!({ "domain": domain_bound, "rank": rank_bound });
    Ok(match verdict {
        Verdict::Holds => Output {
            text: "holds".into(),
            json: json!({ "query": q.to_string(), "verdict": "holds", "bounds": bounds }),
        },
        Verdict::Fails(m) => Output {
            text: format!("fails; countermodel:\n{}", model_text(&m)),
            json: json!({
                "query": q.to_string(),
                "verdict": "fails",
                "bounds": bounds,
                "countermodel": ModelDump {
                    size: m.size,
                    atoms: &m.atoms,
                    roles: &m.roles,
                    individuals: &m.individuals,
                    rank: &m.rank,
                },
            }),
        },
        Verdict::Inconclusive(e) => Output {
            text: inconclusive_text(&e),
            json: json!({ "query": q.to_string(), "verdict": "inconclusive", "reason": e, "bounds": bounds }),
        },
    })
}

fn parse_assignment(text: &str, ab: &AboxReasoner<'_>) -> Result<RankAssignment, CliError> {
    let mut ranks = BTreeMap::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, value) =
            part.split_once('=').ok_or_else(|| CliError::Usage(format!("expected `name=rank`, got `{part}`")))?;
        let value: u32 =
            value.trim().parse().map_err(|_| CliError::Usage(format!("`{}` is not a rank", value.trim())))?;
        if value > ab.max_rank() {
            return Err(CliError::Usage(format!("rank {value} exceeds the largest usable rank {}", ab.max_rank())));
        }
        ranks.insert(name.trim().to_string(), value);
    }
    Ok(RankAssignment::new(ranks))
}

fn dump_mu(s: &Session) -> Result<Output, CliError> {
    let ab = s.reasoner()?;
    let assignments = match &s.opts.assignment {
        Some(text) => vec![parse_assignment(text, &ab)?],
        None => s.minimal(&ab)?,
    };
    let mut text = String::new();
    let mut rows = Vec::new();
    for a in &assignments {
        let mu = ab.mu_set(a)?;
        let consistent = ab.assignment_consistent(a)?;
        let items: Vec<String> = mu.assertions().iter().map(|x| x.to_string()).collect();
        text.push_str(&format!("{a} ({}):\n", if consistent { "consistent" } else { "inconsistent" }));
        for item in &items {
            text.push_str(&format!("  {item}\n"));
        }
        rows.push(json!({ "assignment": assignment_json(a), "consistent": consistent, "mu": items }));
    }
    Ok(Output { text: text.trim_end().to_string(), json: json!(rows) })
}

type Handler = fn(&Session) -> Result<Output, CliError>;

fn run(cli: Cli) -> Result<(), CliError> {
    let (handler, opts): (Handler, Common) = match cli.command {
        Command::Check(o) => (check, o),
        Command::Ranks(o) => (ranks, o),
        Command::Query(o) => (query, o),
        Command::AboxClosure(o) => (abox_closure, o),
        Command::Oracle(o) => (oracle, o),
        Command::DumpMu(o) => (dump_mu, o),
    };
    let format = opts.format;
    let session = Session::load(opts)?;
    let out = handler(&session)?;
    let rendered = match format {
        Format::Text => out.text,
        Format::Json => serde_json::to_string_pretty(&out.json).expect("values serialize"),
    };
    match writeln!(std::io::stdout().lock(), "{rendered}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            Err(CliError::Io { path: "standard output".into(), source: e })
        }
        _ => Ok(()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ratcl: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

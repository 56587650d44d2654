use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use monoeq::classw::{classify, Classification};
use monoeq::corpus::{figures, Corpus};
use monoeq::counterexample::{self, DEFAULT_FENCE_CAP};
use monoeq::error::Error;
use monoeq::oracle::{self, FeasibilityVerdict, VerdictDoc, DEFAULT_MAP_CAP};
use monoeq::poset::{Poset, PosetDoc, DEFAULT_UPSET_CAP};
use monoeq::realize::{applicable_case, maps_from_doc, realize, verify_realization, RealizationDoc};
use monoeq::sync::{is_synchronizable, Direction};
use monoeq::system::{MonotoneSystem, SystemDoc};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "monoeq", version, about = "Monotone couplings on Class-W posets, in exact arithmetic")]
struct Cli {
    /// Largest target poset whose up-sets are enumerated; larger ones use max-flow.
    #[arg(long, global = true, default_value_t = DEFAULT_UPSET_CAP, value_parser = positive)]
    cap_upsets: usize,
    /// Maximum number of monotone maps enumerated by the LP oracle.
    #[arg(long, global = true, default_value_t = DEFAULT_MAP_CAP, value_parser = positive)]
    cap_maps: usize,
    /// Maximum number of fences enumerated by the counterexample search.
    #[arg(long, global = true, default_value_t = DEFAULT_FENCE_CAP, value_parser = positive)]
    cap_fences: usize,
    /// Seed for randomized corpora.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify a target poset.
    Classify {
        /// Poset document path, `-` for stdin, or `figure:<name>`.
        poset: String,
    },
    /// Test synchronizability of an index poset.
    Sync {
        poset: String,
        #[arg(long, value_enum, default_value_t = Dir::Minimal)]
        direction: Dir,
    },
    /// Build a monotone realization of a system.
    Realize { system: String },
    /// Build and certify a counterexample system over a non-synchronizable poset.
    Counterexample { poset: String },
    /// Check a realization or LP verdict against a system.
    Verify { system: String, document: String },
    /// Decide realizability by the brute-force LP.
    Oracle { system: String },
    /// Generate a randomized test corpus.
    Corpus {
        #[arg(long, value_enum, default_value_t = Kind::Systems)]
        kind: Kind,
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Largest index poset.
        #[arg(long, default_value_t = 6)]
        max_index: usize,
        /// Largest target poset.
        #[arg(long, default_value_t = 6)]
        max_target: usize,
        /// Largest common denominator of generated masses.
        #[arg(long, default_value_t = 12)]
        max_den: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Dir {
    Minimal,
    Maximal,
}

impl From<Dir> for Direction {
    fn from(d: Dir) -> Direction {
        match d {
            Dir::Minimal => Direction::Minimal,
            Dir::Maximal => Direction::Maximal,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    /// Realizable monotone systems.
    Systems,
    /// Index posets that are not synchronizable for minimal elements.
    NonSync,
    /// Class W target posets.
    Targets,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

/// A finished command: report plus exit code.
struct Report {
    body: Value,
    code: u8,
}

impl Report {
    fn pass(body: Value) -> Report {
        Report { body, code: 0 }
    }

    fn verdict(body: Value, ok: bool) -> Report {
        Report {
            body,
            code: if ok { 0 } else { 1 },
        }
    }
}

/// Failure with a machine-readable reason.
struct Refusal {
    reason: &'static str,
    message: String,
    witness: Value,
    code: u8,
}

impl From<Error> for Refusal {
    fn from(e: Error) -> Refusal {
        let witness = match &e {
            Error::NotStochasticallyMonotone { lower, upper } => json!({"lower": lower, "upper": upper}),
            Error::CapExceeded { what, cap } => json!({"enumeration": what, "cap": cap}),
            _ => Value::Null,
        };
        Refusal {
            reason: e.code(),
            message: e.to_string(),
            witness,
            code: e.exit_code() as u8,
        }
    }
}

impl Refusal {
    fn input(reason: &'static str, message: impl Into<String>) -> Refusal {
        Refusal {
            reason,
            message: message.into(),
            witness: Value::Null,
            code: 2,
        }
    }

    fn with_witness(mut self, w: Value) -> Refusal {
        self.witness = w;
        self
    }
}

type Outcome = Result<Report, Refusal>;

fn read_text(path: &str) -> Result<String, Refusal> {
    let mut text = String::new();
    let res = if path == "-" {
        io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        fs::read_to_string(path).map(|t| text = t)
    };
    res.map_err(|e| Refusal::input("io", format!("{path}: {e}")))?;
    Ok(text)
}

fn load_poset(arg: &str) -> Result<Poset, Refusal> {
    if let Some(name) = arg.strip_prefix("figure:") {
        return figures::by_name(name)
            .map_err(|e| Refusal::from(e).with_witness(json!({"known": figures::NAMES})));
    }
    let doc: PosetDoc = serde_json::from_str(&read_text(arg)?).map_err(Error::from)?;
    Ok(Poset::from_doc(&doc)?)
}

fn load_system(arg: &str) -> Result<MonotoneSystem, Refusal> {
    let v: Value = serde_json::from_str(&read_text(arg)?).map_err(Error::from)?;
    // Accept a bare system or any report that embeds one under `system`.
    let v = match v.get("system") {
        Some(inner) => inner.clone(),
        None => v,
    };
    let doc: SystemDoc = serde_json::from_value(v).map_err(Error::from)?;
    Ok(MonotoneSystem::from_doc(&doc)?)
}

fn class_json(s: &Poset, c: &Classification) -> Value {
    json!({
        "class": c.class,
        "class_w": c.class.is_class_w(),
        "root": c.rpt.as_ref().map(|r| s.label(r.tau())),
        "tree": c.rpt.as_ref().map(|r| r.to_json()),
        "bad_tail": c.bad_tail.map(|x| s.label(x)),
        "induced_y": c.induced_y.as_ref().map(|y| json!({
            "legs": [s.label(y.legs.0), s.label(y.legs.1)],
            "center": s.label(y.center),
            "stem": s.label(y.stem),
            "inverted": y.inverted,
        })),
    })
}

fn cmd_classify(poset: &str) -> Outcome {
    let s = load_poset(poset)?;
    let c = classify(&s);
    Ok(Report::pass(class_json(&s, &c)))
}

fn cmd_sync(poset: &str, dir: Dir) -> Outcome {
    let a = load_poset(poset)?;
    let r = is_synchronizable(&a, dir.into());
    Ok(Report::verdict(r.to_json(&a), r.synchronizable))
}

/// Refuses systems that no construction covers.
fn realize_precheck(sys: &MonotoneSystem, cli: &Cli) -> Result<(), Refusal> {
    if let Some((x, y)) = sys.monotonicity_violation(cli.cap_upsets)? {
        return Err(Refusal::from(Error::NotStochasticallyMonotone {
            lower: sys.a.label(x).into(),
            upper: sys.a.label(y).into(),
        }));
    }
    let c = classify(&sys.s);
    if !c.class.is_class_w() {
        return Err(Refusal {
            reason: if c.class == monoeq::classw::WClass::NotTree { "not_tree" } else { "not_class_w" },
            message: "target poset is not in Class W".into(),
            witness: class_json(&sys.s, &c),
            code: 1,
        });
    }
    if applicable_case(&sys.a, c.class).is_none() {
        let lo = is_synchronizable(&sys.a, Direction::Minimal);
        let hi = is_synchronizable(&sys.a, Direction::Maximal);
        return Err(Refusal::from(Error::NoCaseApplies).with_witness(json!({
            "class": c.class,
            "minimum": sys.a.minimum().map(|x| sys.a.label(x)),
            "maximum": sys.a.maximum().map(|x| sys.a.label(x)),
            "minimal": lo.to_json(&sys.a),
            "maximal": hi.to_json(&sys.a),
        })));
    }
    Ok(())
}

fn cmd_realize(system: &str, cli: &Cli) -> Outcome {
    let sys = load_system(system)?;
    realize_precheck(&sys, cli)?;
    let r = realize(&sys)?;
    let check = verify_realization(&sys, &r.maps);
    if !check.pass {
        return Err(Refusal::from(Error::Internal("realization failed its own check".into()))
            .with_witness(check.to_json(&sys)));
    }
    Ok(Report::pass(serde_json::to_value(r.to_doc(&sys)).expect("serializable")))
}

fn cmd_counterexample(poset: &str, cli: &Cli) -> Outcome {
    let a = load_poset(poset)?;
    match counterexample::counterexample(&a, cli.cap_fences, cli.cap_upsets, cli.cap_maps) {
        Ok((b, cert)) => Ok(Report::pass(b.to_json(Some(&cert)))),
        Err(Error::Synchronizable) => {
            let r = is_synchronizable(&a, Direction::Minimal);
            Err(Refusal::from(Error::Synchronizable).with_witness(r.to_json(&a)))
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_verify(system: &str, document: &str, cli: &Cli) -> Outcome {
    let sys = load_system(system)?;
    let doc: Value = serde_json::from_str(&read_text(document)?).map_err(Error::from)?;
    if doc.get("maps").is_some() {
        let rd: RealizationDoc = serde_json::from_value(doc).map_err(Error::from)?;
        let maps = maps_from_doc(&sys, &rd)?;
        let rep = verify_realization(&sys, &maps);
        let mut body = rep.to_json(&sys);
        body["kind"] = json!("realization");
        return Ok(Report::verdict(body, rep.pass));
    }
    if doc.get("feasible").is_some() {
        let vd: VerdictDoc = serde_json::from_value(doc).map_err(Error::from)?;
        let v = FeasibilityVerdict::from_doc(&sys, &vd)?;
        let ok = oracle::check_verdict(&sys, &v, cli.cap_maps)?;
        return Ok(Report::verdict(
            json!({"kind": "verdict", "feasible": v.feasible, "pass": ok}),
            ok,
        ));
    }
    Err(Refusal::input(
        "unknown_document",
        "expected a realization (`maps`) or a verdict (`feasible`)",
    ))
}

fn cmd_oracle(system: &str, cli: &Cli) -> Outcome {
    let sys = load_system(system)?;
    let v = oracle::realizably_monotone(&sys, cli.cap_maps)?;
    let checked = oracle::check_verdict(&sys, &v, cli.cap_maps)?;
    let violation = sys.monotonicity_violation(cli.cap_upsets)?;
    let mut body = serde_json::to_value(v.to_doc(&sys)).expect("serializable");
    body["replayed"] = json!(checked);
    body["monotone_violation"] = json!(violation.map(|(x, y)| json!({
        "lower": sys.a.label(x),
        "upper": sys.a.label(y),
    })));
    Ok(Report::verdict(body, v.feasible && checked))
}

fn cmd_corpus(cli: &Cli, kind: Kind, count: usize, max_a: usize, max_s: usize, max_den: usize) -> Outcome {
    if max_a == 0 || max_s == 0 || max_den == 0 {
        return Err(Refusal::input("bad_argument", "sizes must be positive"));
    }
    let mut c = Corpus::new(cli.seed);
    let mut items = Vec::with_capacity(count);
    for _ in 0..count {
        items.push(match kind {
            Kind::Systems => {
                let (sys, case) = c.realizable_instance(max_a, max_s, max_den, cli.cap_maps)?;
                json!({"case": case, "system": sys.to_doc()})
            }
            Kind::NonSync => {
                let a = c.non_synchronizable_poset(max_a.max(4), 100_000).ok_or_else(|| {
                    Refusal::input("bad_argument", "no non-synchronizable poset at this size")
                })?;
                serde_json::to_value(a.to_doc()).expect("serializable")
            }
            Kind::Targets => {
                let s = c.class_w_poset(max_s);
                json!({"class": classify(&s).class, "poset": s.to_doc()})
            }
        });
    }
    Ok(Report::pass(json!({"seed": cli.seed, "items": items})))
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Classify { poset } => cmd_classify(poset),
        Command::Sync { poset, direction } => cmd_sync(poset, *direction),
        Command::Realize { system } => cmd_realize(system, cli),
        Command::Counterexample { poset } => cmd_counterexample(poset, cli),
        Command::Verify { system, document } => cmd_verify(system, document, cli),
        Command::Oracle { system } => cmd_oracle(system, cli),
        Command::Corpus {
            kind,
            count,
            max_index,
            max_target,
            max_den,
        } => cmd_corpus(cli, *kind, *count, *max_index, *max_target, *max_den),
    }
}

fn emit(cli: &Cli, body: &Value) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(body).expect("serializable");
    text.push('\n');
    match &cli.out {
        Some(p) => fs::write(p, text),
        None => io::stdout().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mut body, code) = match run(&cli) {
        Ok(r) => (r.body, r.code),
        Err(r) => (
            json!({"refusal": {"reason": r.reason, "message": r.message, "witness": r.witness}}),
            r.code,
        ),
    };
    body["config"] = json!({
        "cap_upsets": cli.cap_upsets,
        "cap_maps": cli.cap_maps,
        "cap_fences": cli.cap_fences,
        "seed": cli.seed,
    });
    if let Err(e) = emit(&cli, &body) {
        eprintln!("monoeq: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Value};

use chorc::cfsm::{minimize, project, Cfsm};
use chorc::corpus::{check_entry, load_dir, Checked, CorpusEntry};
use chorc::hypergraph::{to_dot, HyperGraph};
use chorc::language::{self, parse_word_for};
use chorc::lts::format_word;
use chorc::semantics::{analyze, SemOptions, SemanticsResult};
use chorc::syntax::{parse, print};
use chorc::system::{BufferPolicy, ExplorationBudget};
use chorc::verify::{build_system, random_choreography, VerifyOptions};
use chorc::{ast, Error, GChor, Participant};

/// Writes to stdout; a closed pipe ends the process quietly.
fn out(s: &str) {
    use std::io::Write;
    let mut o = std::io::stdout().lock();
    if o.write_all(s.as_bytes()).and_then(|_| o.flush()).is_err() {
        std::process::exit(0);
    }
}

macro_rules! println {
    ($($t:tt)*) => { out(&format!("{}\n", format_args!($($t)*))) };
}

macro_rules! print {
    ($($t:tt)*) => { out(&format!($($t)*)) };
}

#[derive(Parser)]
#[command(name = "chorc", version, about = "Analyse loop-free global choreographies")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a file and print its canonical form
    Parse { file: PathBuf },
    /// Print the hypergraph semantics
    Sem {
        file: PathBuf,
        #[command(flatten)]
        fmt: Format,
    },
    /// Check well-formedness and report the role of each participant
    Wf {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Project on participants
    Project {
        file: PathBuf,
        /// Participant to project on (all when omitted)
        #[arg(short, long)]
        participant: Option<String>,
        /// Skip determinisation and minimisation
        #[arg(long)]
        no_min: bool,
        #[command(flatten)]
        fmt: Format,
    },
    /// Enumerate the trace language
    Lang {
        file: PathBuf,
        #[arg(long)]
        max_len: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Decide membership of a word such as "AB!x AB?x"
    Member { file: PathBuf, word: String },
    /// Explore the projected system, or replay a trace with --interactive-trace
    Sim {
        file: PathBuf,
        #[arg(long, default_value = "fifo")]
        buffer: BufferPolicy,
        /// File with one action per line
        #[arg(long)]
        interactive_trace: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Run the deadlock and language checks on a file, a corpus directory
    /// or generated terms
    Verify(VerifyArgs),
}

#[derive(Args)]
#[group(multiple = false)]
struct Format {
    #[arg(long)]
    dot: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VerifyArgs {
    path: Option<PathBuf>,
    #[arg(long, default_value = "fifo")]
    buffer: BufferPolicy,
    /// First seed of the generated terms
    #[arg(long, default_value_t = 1, requires = "random")]
    seed: u64,
    /// Number of generated terms
    #[arg(long)]
    random: Option<u64>,
    /// Interactions per generated term
    #[arg(long, default_value_t = 4, requires = "random")]
    size: usize,
    #[arg(long)]
    json: bool,
    /// Omit timings so that output is reproducible
    #[arg(long)]
    no_stats: bool,
}

/// Either a failed verdict (exit 1) or an error (exit 2).
enum Failure {
    Verdict,
    Error(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn verdict(ok: bool) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(Failure::Verdict)
    }
}

fn load(path: &Path) -> Result<GChor, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Error(format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| Failure::Error(format!("{}: {e}", path.display())))
}

fn participant(g: &GChor, name: &str) -> Result<Participant, Failure> {
    let p = Participant::new(name)?;
    if !ast::participants(g).contains(&p) {
        return Err(Failure::Error(format!("participant {p} does not occur in the choreography")));
    }
    Ok(p)
}

fn emit_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json values serialise"));
}

fn graph_json(r: &HyperGraph) -> Value {
    let names = |s: &chorc::hypergraph::EventSet| s.iter().map(|e| e.to_string()).collect::<Vec<_>>();
    Value::Array(
        r.edges
            .iter()
            .map(|e| json!({"source": names(&e.source), "target": names(&e.target)}))
            .collect(),
    )
}

fn cmd_sem(file: &Path, fmt: &Format) -> Outcome {
    let g = load(file)?;
    let result = analyze(&g, SemOptions::default()).result;
    match (&result, fmt.json, fmt.dot) {
        (SemanticsResult::Defined(r), true, _) => emit_json(&json!({"defined": true, "edges": graph_json(r)})),
        (SemanticsResult::Undefined(reason), true, _) => {
            emit_json(&json!({"defined": false, "reason": reason.to_string()}))
        }
        (SemanticsResult::Defined(r), _, true) => print!("{}", to_dot(r, "sem")),
        (SemanticsResult::Defined(r), _, _) => print!("{r}"),
        (SemanticsResult::Undefined(reason), _, _) => eprintln!("undefined: {reason}"),
    }
    verdict(result.is_defined())
}

fn cmd_wf(file: &Path, json_out: bool) -> Outcome {
    let g = load(file)?;
    let analysis = analyze(&g, SemOptions::default());
    let roles = analysis.roles();
    if json_out {
        let choices: Vec<Value> = analysis
            .choices
            .iter()
            .map(|c| {
                let roles: BTreeMap<String, String> = c
                    .participants
                    .iter()
                    .map(|p| (p.participant.to_string(), p.role.to_string()))
                    .collect();
                json!({"choice": c.choice.to_string(), "well_branched": c.well_branched, "roles": roles})
            })
            .collect();
        let roles: BTreeMap<String, String> = roles.iter().map(|(p, r)| (p.to_string(), r.to_string())).collect();
        emit_json(&json!({
            "defined": analysis.result.is_defined(),
            "reason": analysis.result.reason().map(|r| r.to_string()),
            "choices": choices,
            "roles": roles,
        }));
    } else {
        match analysis.result.reason() {
            None => println!("well-formed"),
            Some(reason) => println!("{reason}"),
        }
        for c in &analysis.choices {
            let parts: Vec<String> = c
                .participants
                .iter()
                .map(|p| format!("{} {}", p.participant, p.role))
                .collect();
            let wb = if c.well_branched { "well-branched" } else { "not well-branched" };
            println!("choice {}: {wb}; {}", c.choice, parts.join(", "));
        }
    }
    verdict(analysis.result.is_defined())
}

fn machine_text(m: &Cfsm) -> String {
    let mut out = format!("machine {}\ninitial {}\n", m.participant, m.initial);
    for t in &m.transitions {
        out.push_str(&format!("{} {} {}\n", t.from, t.label, t.to));
    }
    out
}

fn cmd_project(file: &Path, who: Option<&str>, no_min: bool, fmt: &Format) -> Outcome {
    let g = load(file)?;
    let ptps: Vec<Participant> = match who {
        Some(name) => vec![participant(&g, name)?],
        None => ast::participants(&g).into_iter().collect(),
    };
    let machines: Vec<Cfsm> = ptps
        .iter()
        .map(|p| {
            let m = project(&g, p);
            if no_min {
                m
            } else {
                minimize(&m)
            }
        })
        .collect();
    if fmt.json {
        let all: Vec<Value> = machines.iter().map(Cfsm::to_json).collect();
        emit_json(&if all.len() == 1 { all[0].clone() } else { Value::Array(all) });
    } else {
        for m in &machines {
            print!("{}", if fmt.dot { m.to_dot() } else { machine_text(m) });
        }
    }
    Ok(())
}

fn cmd_lang(file: &Path, max_len: Option<usize>, json_out: bool) -> Outcome {
    let g = load(file)?;
    let words: Vec<String> = language::words(&g, max_len)?.iter().map(|w| format_word(w)).collect();
    if json_out {
        emit_json(&json!(words));
    } else {
        for w in &words {
            println!("{}", if w.is_empty() { "ε" } else { w });
        }
    }
    Ok(())
}

fn cmd_member(file: &Path, word: &str) -> Outcome {
    let g = load(file)?;
    let w = parse_word_for(&g, word)?;
    let yes = language::member(&g, &w)?;
    println!("{}", if yes { "yes" } else { "no" });
    verdict(yes)
}

fn cmd_sim(file: &Path, buffer: BufferPolicy, trace: Option<&Path>, json_out: bool) -> Outcome {
    let g = load(file)?;
    let sys = build_system(&g, buffer)?;
    if let Some(trace) = trace {
        let text = fs::read_to_string(trace).map_err(|e| Failure::Error(format!("{}: {e}", trace.display())))?;
        let lines: Vec<&str> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect();
        let mut config = sys.initial();
        let mut steps = Vec::new();
        for (i, line) in lines.iter().enumerate() {
            let w = parse_word_for(&g, line)?;
            let [a] = w.as_slice() else {
                return Err(Failure::Error(format!("line {}: expected a single action", i + 1)));
            };
            let Some((_, next)) = sys.step(&config).into_iter().find(|(b, _)| b == a) else {
                if json_out {
                    emit_json(&json!({"steps": steps, "stuck": {"step": i + 1, "action": a.to_string()}}));
                } else {
                    println!("step {}: {a} is not enabled", i + 1);
                }
                return Err(Failure::Verdict);
            };
            config = next;
            let cj = sys.config_json(&config);
            if !json_out {
                println!("{a}\t{cj}");
            }
            steps.push(json!({"action": a.to_string(), "config": cj}));
        }
        if json_out {
            emit_json(&json!({"steps": steps}));
        }
        return Ok(());
    }
    let ex = sys.explore(ExplorationBudget::default(), true);
    let deadlock = ex.first_deadlock(&sys);
    if json_out {
        emit_json(&json!({
            "policy": buffer.to_string(),
            "configs": ex.len(),
            "deadlock": deadlock.as_ref().map(|(id, w)| json!({
                "trace": w.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
                "config": sys.config_json(&ex.configs[*id]),
            })),
        }));
    } else {
        println!("policy {buffer}, {} reachable configurations", ex.len());
        match &deadlock {
            None => println!("no deadlock"),
            Some((id, w)) => {
                println!("deadlock after:");
                for a in w {
                    println!("{a}");
                }
                println!("{}", sys.config_json(&ex.configs[*id]));
            }
        }
    }
    verdict(deadlock.is_none())
}

fn summary(c: &Checked) -> String {
    let r = &c.report;
    let mut line = format!(
        "{}: {}, deadlock-free {}, inclusion ({}) {}",
        r.subject,
        if r.wf.defined { "defined" } else { "undefined" },
        r.deadlock_free,
        r.inclusion.policy,
        r.inclusion.verdict,
    );
    if r.inclusion.strict {
        line.push_str(" strict");
    } else if r.wf.defined {
        line.push_str(" equal");
    }
    if let Some(w) = &r.inclusion.witness {
        line.push_str(&format!(" [{w}]"));
    }
    for m in &c.mismatches {
        line.push_str(&format!("\n  expectation failed: {m}"));
    }
    line
}

fn cmd_verify(args: &VerifyArgs) -> Outcome {
    let opts = VerifyOptions {
        policy: args.buffer,
        stats: !args.no_stats,
        ..VerifyOptions::default()
    };
    let entries: Vec<CorpusEntry> = match (&args.path, args.random) {
        (Some(_), Some(_)) => return Err(Failure::Error("give either a path or --random".into())),
        (None, None) => return Err(Failure::Error("nothing to verify: give a path or --random".into())),
        (Some(p), None) if p.is_dir() => load_dir(p)?,
        (Some(p), None) => {
            load(p)?;
            vec![CorpusEntry::load(p)?]
        }
        (None, Some(k)) => (0..k)
            .map(|i| {
                let seed = args.seed + i;
                Ok(CorpusEntry {
                    name: format!("random-{seed}-{}", args.size),
                    path: PathBuf::new(),
                    term: random_choreography(seed, args.size)?,
                    expect: None,
                })
            })
            .collect::<Result<_, Error>>()?,
    };
    // Collecting an indexed parallel iterator keeps input order.
    let checked = entries
        .par_iter()
        .map(|e| check_entry(e, opts))
        .collect::<Result<Vec<_>, Error>>()?;
    let passed = checked.iter().all(|c| c.report.passed() && c.mismatches.is_empty());
    if args.json {
        emit_json(&json!({"passed": passed, "reports": checked}));
    } else {
        for c in &checked {
            println!("{}", summary(c));
        }
        println!("{}", if passed { "all checks passed" } else { "some checks failed" });
    }
    verdict(passed)
}

fn run(cli: Cli) -> Outcome {
    match &cli.cmd {
        Cmd::Parse { file } => {
            println!("{}", print(&load(file)?));
            Ok(())
        }
        Cmd::Sem { file, fmt } => cmd_sem(file, fmt),
        Cmd::Wf { file, json } => cmd_wf(file, *json),
        Cmd::Project {
            file,
            participant,
            no_min,
            fmt,
        } => cmd_project(file, participant.as_deref(), *no_min, fmt),
        Cmd::Lang { file, max_len, json } => cmd_lang(file, *max_len, *json),
        Cmd::Member { file, word } => cmd_member(file, word),
        Cmd::Sim {
            file,
            buffer,
            interactive_trace,
            json,
        } => cmd_sim(file, *buffer, interactive_trace.as_deref(), *json),
        Cmd::Verify(args) => cmd_verify(args),
    }
}

fn main() -> ExitCode {
    if let Some(n) = std::env::var("CHORC_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().ok();
    }
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            e.print().ok();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verdict) => ExitCode::from(1),
        Err(Failure::Error(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

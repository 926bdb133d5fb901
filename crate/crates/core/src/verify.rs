//! Exhaustive checks of deadlock freedom and language inclusion for the
//! systems obtained by projecting well-formed choreographies.

use std::fmt;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use crate::ast::{participants, GChor, Message, Participant};
use crate::cfsm::{minimize, project};
use crate::error::{Error, Result};
use crate::language::{self, LanguageAutomaton};
use crate::lts::{self, check_inclusion as lts_inclusion, format_word, Word};
use crate::semantics::{analyze, ReflectionStrategy, SemOptions, SemanticsResult};
use crate::system::{BufferPolicy, CommSystem, ExplorationBudget};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    Skip,
    Inconclusive,
    /// The system language is included but the claimed equality fails.
    EclaimFail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Skip => "skip",
            Verdict::Inconclusive => "inconclusive",
            Verdict::EclaimFail => "eclaim-fail",
        })
    }
}

impl std::str::FromStr for Verdict {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pass" => Ok(Verdict::Pass),
            "fail" => Ok(Verdict::Fail),
            "skip" => Ok(Verdict::Skip),
            "inconclusive" => Ok(Verdict::Inconclusive),
            "eclaim-fail" => Ok(Verdict::EclaimFail),
            _ => Err(Error::InvalidSidecar(format!("unknown verdict `{s}`"))),
        }
    }
}

/// Projects `g` on each participant, minimises and composes the machines.
pub fn build_system(g: &GChor, policy: BufferPolicy) -> Result<CommSystem> {
    let r = analyze(g, SemOptions::default()).result;
    if let SemanticsResult::Undefined(reason) = r {
        return Err(Error::SemanticsUndefined(reason.to_string()));
    }
    let machines = participants(g).iter().map(|a| minimize(&project(g, a))).collect::<Vec<_>>();
    CommSystem::new(machines, policy)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub trace: String,
    pub config: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeadlockCheck {
    pub verdict: Verdict,
    pub configs: usize,
    pub counterexample: Option<Counterexample>,
}

/// Deadlock search over a given system.
pub fn check_system_deadlock(sys: &CommSystem, budget: ExplorationBudget, parallel: bool) -> DeadlockCheck {
    let ex = sys.explore(budget, parallel);
    match ex.first_deadlock(sys) {
        Some((id, trace)) => DeadlockCheck {
            verdict: Verdict::Fail,
            configs: ex.len(),
            counterexample: Some(Counterexample {
                trace: format_word(&trace),
                config: sys.config_json(&ex.configs[id]),
            }),
        },
        None if ex.truncated => DeadlockCheck {
            verdict: Verdict::Inconclusive,
            configs: ex.len(),
            counterexample: None,
        },
        None => DeadlockCheck {
            verdict: Verdict::Pass,
            configs: ex.len(),
            counterexample: None,
        },
    }
}

pub fn check_deadlock_free(g: &GChor, budget: ExplorationBudget) -> DeadlockCheck {
    match build_system(g, BufferPolicy::Fifo) {
        Ok(sys) => check_system_deadlock(&sys, budget, false),
        Err(_) => DeadlockCheck {
            verdict: Verdict::Skip,
            configs: 0,
            counterexample: None,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InclusionCheck {
    pub policy: BufferPolicy,
    pub verdict: Verdict,
    /// Some word of the choreography is not a system word.
    pub strict: bool,
    pub equality: bool,
    /// When the inclusion fails, the shortest system word outside the
    /// choreography language; when it is strict, a maximal choreography
    /// word the system cannot produce.
    pub witness: Option<String>,
    pub words: u128,
}

impl InclusionCheck {
    fn skipped(policy: BufferPolicy) -> Self {
        InclusionCheck {
            policy,
            verdict: Verdict::Skip,
            strict: false,
            equality: false,
            witness: None,
            words: 0,
        }
    }
}

/// Confirms a witness against the explicit membership checks.
fn confirm(w: &Word, in_system: bool, sys: &CommSystem, lang: &LanguageAutomaton) -> Result<()> {
    if lts::accepts(sys, w) == in_system && lts::accepts(lang, w) != in_system {
        Ok(())
    } else {
        Err(Error::OracleMismatch(format!("witness `{}`", format_word(w))))
    }
}

pub fn check_system_inclusion(g: &GChor, sys: &CommSystem, budget: ExplorationBudget) -> Result<InclusionCheck> {
    let lang = LanguageAutomaton::new(g)?;
    let words = lts::count_words(&lang);
    let forward = match lts_inclusion(sys, &lang, budget.max_configs) {
        Ok(r) => r,
        Err(Error::BudgetExceeded { .. }) => {
            return Ok(InclusionCheck {
                verdict: Verdict::Inconclusive,
                words,
                ..InclusionCheck::skipped(sys.policy)
            })
        }
        Err(e) => return Err(e),
    };
    if let Some(w) = forward.witness {
        confirm(&w, true, sys, &lang)?;
        // Inclusion is only claimed for bags together with equality.
        let verdict = match sys.policy {
            BufferPolicy::Fifo => Verdict::Fail,
            BufferPolicy::Bag => Verdict::EclaimFail,
        };
        return Ok(InclusionCheck {
            policy: sys.policy,
            verdict,
            strict: false,
            equality: false,
            witness: Some(format_word(&w)),
            words,
        });
    }
    let backward = lts_inclusion(&lang, sys, budget.max_configs)?;
    let strict = !backward.holds();
    let witness = backward.witness.map(|w| lts::complete(&lang, &w));
    if let Some(w) = &witness {
        confirm(w, false, sys, &lang)?;
    }
    let verdict = if sys.policy == BufferPolicy::Bag && strict {
        Verdict::EclaimFail
    } else {
        Verdict::Pass
    };
    Ok(InclusionCheck {
        policy: sys.policy,
        verdict,
        strict,
        equality: !strict,
        witness: witness.map(|w| format_word(&w)),
        words,
    })
}

pub fn check_inclusion(g: &GChor, policy: BufferPolicy, budget: ExplorationBudget) -> Result<InclusionCheck> {
    match build_system(g, policy) {
        Ok(sys) => check_system_inclusion(g, &sys, budget),
        Err(Error::SemanticsUndefined(_)) => Ok(InclusionCheck::skipped(policy)),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Wf {
    pub defined: bool,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stats {
    pub configs: usize,
    pub words: u128,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub millis: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub subject: String,
    pub wf: Wf,
    pub deadlock_free: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
    pub inclusion: InclusionCheck,
    pub stats: Stats,
}

impl Report {
    /// No verdict failed; skipped checks of ill-formed terms do not count.
    pub fn passed(&self) -> bool {
        !matches!(self.deadlock_free, Verdict::Fail | Verdict::Inconclusive)
            && !matches!(
                self.inclusion.verdict,
                Verdict::Fail | Verdict::Inconclusive | Verdict::EclaimFail
            )
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    pub policy: BufferPolicy,
    pub budget: ExplorationBudget,
    pub parallel: bool,
    pub stats: bool,
    pub reflections: ReflectionStrategy,
}

/// Runs every check on one choreography.
pub fn verify(subject: &str, g: &GChor, opts: VerifyOptions) -> Result<Report> {
    let start = Instant::now();
    let analysis = analyze(g, SemOptions { reflections: opts.reflections });
    let wf = Wf {
        defined: analysis.result.is_defined(),
        reason: analysis.result.reason().map(|r| r.to_string()),
    };
    let (deadlock, inclusion) = if wf.defined {
        let machines = participants(g).iter().map(|a| minimize(&project(g, a))).collect::<Vec<_>>();
        let sys = CommSystem::new(machines, opts.policy)?;
        let deadlock = check_system_deadlock(&sys, opts.budget, opts.parallel);
        (deadlock, check_system_inclusion(g, &sys, opts.budget)?)
    } else {
        (
            DeadlockCheck {
                verdict: Verdict::Skip,
                configs: 0,
                counterexample: None,
            },
            InclusionCheck::skipped(opts.policy),
        )
    };
    Ok(Report {
        subject: subject.to_string(),
        wf,
        deadlock_free: deadlock.verdict,
        counterexample: deadlock.counterexample,
        stats: Stats {
            configs: deadlock.configs,
            words: inclusion.words,
            millis: opts.stats.then(|| start.elapsed().as_millis() as u64),
        },
        inclusion,
    })
}

/// Brute-force cross-check of [`check_system_inclusion`]: both languages
/// enumerated explicitly and compared as sets.
pub fn oracle_languages(g: &GChor, sys: &CommSystem) -> Result<(std::collections::BTreeSet<Word>, std::collections::BTreeSet<Word>)> {
    Ok((sys.language(ExplorationBudget::default())?, language::words(g, None)?))
}

/// Alphabet and retry cap of the random generator.
#[derive(Debug, Clone)]
pub struct GenConfig {
    pub participants: Vec<Participant>,
    pub messages: Vec<Message>,
    pub max_attempts: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            participants: ["A", "B", "C"].iter().map(|s| Participant::new(*s).unwrap()).collect(),
            messages: ["x", "y", "z"].iter().map(|s| Message::new(*s).unwrap()).collect(),
            max_attempts: 20_000,
        }
    }
}

fn gen_term(rng: &mut ChaCha8Rng, size: usize, cfg: &GenConfig) -> GChor {
    if size <= 1 {
        let mut ends: Vec<&Participant> = cfg.participants.iter().collect();
        ends.shuffle(rng);
        let msg = cfg.messages.choose(rng).unwrap().clone();
        return GChor::interaction(ends[0].clone(), ends[1].clone(), msg);
    }
    let k = rng.gen_range(1..size);
    let l = gen_term(rng, k, cfg);
    let r = gen_term(rng, size - k, cfg);
    match rng.gen_range(0..5) {
        0 | 1 => GChor::seq(l, r),
        2 => GChor::par(l, r),
        _ => GChor::cho(l, r),
    }
}

/// Term with `size` interactions whose semantics is defined; deterministic
/// in `seed` and `size`.
pub fn random_choreography_with(seed: u64, size: usize, cfg: &GenConfig) -> Result<GChor> {
    assert!(size >= 1, "size must be positive");
    assert!(cfg.participants.len() >= 2 && !cfg.messages.is_empty());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cfg.max_attempts {
        let g = crate::ast::assign_control_points(&gen_term(&mut rng, size, cfg))?;
        if analyze(&g, SemOptions::default()).result.is_defined() {
            return Ok(g);
        }
    }
    Err(Error::GenerationExhausted {
        attempts: cfg.max_attempts,
    })
}

pub fn random_choreography(seed: u64, size: usize) -> Result<GChor> {
    random_choreography_with(seed, size, &GenConfig::default())
}

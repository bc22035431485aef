use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use lapr_core::active::{learn_plain, LearnOutcome, LearnerKind};
use lapr_core::dfa::equivalent;
use lapr_core::oracle::{Budgets, PmatConfig, Teacher};
use lapr_core::passive::Scoring;
use lapr_core::tolerant::{lapr_learn, learnanyway_learn, passive_ce_learn, LaprConfig};

use crate::corpus::CorpusEntry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "lstar")]
    LStar,
    #[serde(rename = "ttt")]
    Ttt,
    #[serde(rename = "learnanyway")]
    LearnAnyWay,
    #[serde(rename = "lapr")]
    Lapr,
    #[serde(rename = "rpni-ce")]
    RpniCe,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [Algorithm::LStar, Algorithm::Ttt, Algorithm::LearnAnyWay, Algorithm::Lapr, Algorithm::RpniCe];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::LStar => "lstar",
            Algorithm::Ttt => "ttt",
            Algorithm::LearnAnyWay => "learnanyway",
            Algorithm::Lapr => "lapr",
            Algorithm::RpniCe => "rpni-ce",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm {s:?} (expected lstar, ttt, learnanyway, lapr or rpni-ce)"))
    }
}

/// Everything but the target that determines a session.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig {
    pub algorithm: Algorithm,
    pub epsilon: f64,
    pub ce_min_len: usize,
    pub seed: u64,
    pub budgets: Budgets,
    /// LAPR settings; `inner` also picks the learner wrapped by LearnAnyWay.
    pub lapr: LaprConfig,
    /// Fill `wall_time_ms`. Off by default so that records are reproducible.
    pub timing: bool,
}

impl SessionConfig {
    pub fn new(algorithm: Algorithm, epsilon: f64, ce_min_len: usize, seed: u64) -> Self {
        SessionConfig {
            algorithm,
            epsilon,
            ce_min_len,
            seed,
            budgets: Budgets::default(),
            lapr: LaprConfig::default(),
            timing: false,
        }
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub corpus_id: String,
    pub algorithm: Algorithm,
    pub oracle_strategy: String,
    pub epsilon: f64,
    pub ce_min_len: usize,
    pub seed: u64,
    pub mq_total: usize,
    pub mq_unique: usize,
    pub eq_total: usize,
    pub errors_injected: usize,
    pub passive_refinements: usize,
    pub success: bool,
    pub hypothesis_states: usize,
    pub wall_time_ms: u64,
    /// Why the session stopped early; empty on success.
    pub failure: String,
}

impl SessionRecord {
    /// Backend membership queries plus equivalence queries.
    pub fn interactions(&self) -> usize {
        self.mq_unique + self.eq_total
    }
}

/// Runs one session against the simulated noisy teacher. Failures are
/// recorded in the row, never raised.
pub fn run_session(entry: &CorpusEntry, config: &SessionConfig) -> SessionRecord {
    let pmat = PmatConfig::new(entry.dfa.clone(), config.epsilon, config.seed, config.ce_min_len);
    let teacher = Teacher::simulated(pmat, config.budgets);
    run_with_teacher(entry, config, teacher, "simulated")
}

/// Runs one session with membership answers from `teacher`, whose target
/// must be `entry`'s machine.
pub fn run_with_teacher(
    entry: &CorpusEntry,
    config: &SessionConfig,
    mut teacher: Teacher,
    oracle_strategy: &str,
) -> SessionRecord {
    let start = Instant::now();
    let mut refinements = 0;
    let outcome: LearnOutcome = match config.algorithm {
        Algorithm::LStar => learn_plain(LearnerKind::LStar, &mut teacher),
        Algorithm::Ttt => learn_plain(LearnerKind::Ttt, &mut teacher),
        Algorithm::LearnAnyWay => learnanyway_learn(config.lapr.inner, &mut teacher),
        Algorithm::Lapr => {
            let out = lapr_learn(&config.lapr, &mut teacher);
            refinements = out.log.len();
            out.outcome
        }
        Algorithm::RpniCe => passive_ce_learn(&mut teacher, Scoring::Edsm),
    };
    let success = equivalent(&entry.dfa, &outcome.hypothesis).map(|ce| ce.is_none()).unwrap_or(false);
    let failure = match (&outcome.failure, success) {
        (Some(f), _) => format!("{f:?}"),
        (None, false) => "Inequivalent".to_string(),
        (None, true) => String::new(),
    };
    let stats = outcome.stats;
    SessionRecord {
        corpus_id: entry.id.clone(),
        algorithm: config.algorithm,
        oracle_strategy: oracle_strategy.to_string(),
        epsilon: config.epsilon,
        ce_min_len: config.ce_min_len,
        seed: config.seed,
        mq_total: stats.mq_total,
        mq_unique: stats.mq_unique,
        eq_total: stats.eq_total,
        errors_injected: stats.errors_injected,
        passive_refinements: refinements,
        success,
        hypothesis_states: outcome.hypothesis.num_states(),
        wall_time_ms: if config.timing { start.elapsed().as_millis() as u64 } else { 0 },
        failure,
    }
}

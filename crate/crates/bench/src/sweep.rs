use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::CorpusEntry;
use crate::session::{run_session, Algorithm, SessionConfig, SessionRecord};

/// Cartesian grid of sessions. Rows come out ordered by
/// (corpus position, algorithm, epsilon, ce_min_len, seed).
#[derive(Debug, Clone)]
pub struct Grid {
    pub algorithms: Vec<Algorithm>,
    pub epsilons: Vec<f64>,
    pub ce_lengths: Vec<usize>,
    pub seeds: Vec<u64>,
    /// Budgets, LAPR settings and timing shared by every session.
    pub template: SessionConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig3,
    Fig4,
    Table2,
}

impl std::str::FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fig3" => Ok(Preset::Fig3),
            "fig4" => Ok(Preset::Fig4),
            "table2" => Ok(Preset::Table2),
            _ => Err(format!("unknown preset {s:?} (expected fig3, fig4 or table2)")),
        }
    }
}

/// Id of the threshold-counting machine used by the length sweep.
pub const COUNTING_MACHINE: &str = "more_than_3a_2b";

/// Largest target in the main experiment grid.
pub const GRID_MAX_STATES: usize = 12;

impl Preset {
    pub fn grid(self) -> Grid {
        let template = SessionConfig::new(Algorithm::Lapr, 0.0, 10, 0);
        match self {
            Preset::Fig3 => Grid {
                algorithms: vec![Algorithm::LearnAnyWay],
                epsilons: vec![0.05],
                ce_lengths: vec![0, 2, 4, 6, 8, 10],
                seeds: (0..10).collect(),
                template,
            },
            Preset::Fig4 => Grid {
                algorithms: vec![Algorithm::Ttt, Algorithm::LearnAnyWay, Algorithm::Lapr, Algorithm::RpniCe],
                epsilons: vec![0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3],
                ce_lengths: vec![10],
                seeds: (0..5).collect(),
                template,
            },
            Preset::Table2 => Grid {
                algorithms: vec![Algorithm::LStar, Algorithm::Ttt, Algorithm::LearnAnyWay, Algorithm::Lapr],
                epsilons: vec![0.02, 0.05, 0.1],
                ce_lengths: vec![10],
                seeds: (0..5).collect(),
                template,
            },
        }
    }

    /// The corpus entries this preset runs on.
    pub fn select(self, corpus: &[CorpusEntry]) -> Vec<CorpusEntry> {
        match self {
            Preset::Fig3 => corpus.iter().filter(|e| e.id == COUNTING_MACHINE).cloned().collect(),
            Preset::Fig4 | Preset::Table2 => {
                corpus.iter().filter(|e| e.dfa.num_states() <= GRID_MAX_STATES).cloned().collect()
            }
        }
    }
}

impl Grid {
    pub fn is_empty(&self) -> bool {
        self.algorithms.is_empty() || self.epsilons.is_empty() || self.ce_lengths.is_empty() || self.seeds.is_empty()
    }

    fn configs(&self) -> Vec<SessionConfig> {
        let mut out = Vec::new();
        for &algorithm in &self.algorithms {
            for &epsilon in &self.epsilons {
                for &ce_min_len in &self.ce_lengths {
                    for &seed in &self.seeds {
                        out.push(SessionConfig { algorithm, epsilon, ce_min_len, seed, ..self.template.clone() });
                    }
                }
            }
        }
        out
    }
}

/// Runs every (entry, grid point) session in parallel. Row order does not
/// depend on scheduling.
pub fn sweep(entries: &[CorpusEntry], grid: &Grid) -> Result<Vec<SessionRecord>, String> {
    if entries.is_empty() || grid.is_empty() {
        return Err("empty grid: every axis needs at least one value".into());
    }
    let configs = grid.configs();
    let jobs: Vec<(&CorpusEntry, &SessionConfig)> =
        entries.iter().flat_map(|e| configs.iter().map(move |c| (e, c))).collect();
    Ok(jobs.par_iter().map(|(e, c)| run_session(e, c)).collect())
}

/// Same rows as [`sweep`], one session at a time.
pub fn sweep_serial(entries: &[CorpusEntry], grid: &Grid) -> Result<Vec<SessionRecord>, String> {
    if entries.is_empty() || grid.is_empty() {
        return Err("empty grid: every axis needs at least one value".into());
    }
    let configs = grid.configs();
    Ok(entries.iter().flat_map(|e| configs.iter().map(move |c| run_session(e, c))).collect())
}

pub fn write_csv<W: Write>(records: &[SessionRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_bytes(records: &[SessionRecord]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_csv(records, &mut buf).expect("writing to memory");
    buf
}

pub fn read_csv<R: std::io::Read>(input: R) -> csv::Result<Vec<SessionRecord>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

/// Aggregate over all sessions sharing (algorithm, epsilon, ce_min_len).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub algorithm: Algorithm,
    pub epsilon: f64,
    pub ce_min_len: usize,
    pub sessions: usize,
    pub success_rate: f64,
    pub mean_mq_unique: f64,
    pub mean_eq: f64,
    pub mean_errors: f64,
    pub mean_interactions: f64,
}

/// Per-group means in (algorithm, epsilon, ce_min_len) order.
pub fn summarize(records: &[SessionRecord]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(Algorithm, u64, usize), Vec<&SessionRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.algorithm, r.epsilon.to_bits(), r.ce_min_len)).or_default().push(r);
    }
    let mut rows: Vec<SummaryRow> = groups
        .into_values()
        .map(|rs| {
            let n = rs.len() as f64;
            let mean = |f: &dyn Fn(&SessionRecord) -> usize| rs.iter().map(|r| f(r) as f64).sum::<f64>() / n;
            SummaryRow {
                algorithm: rs[0].algorithm,
                epsilon: rs[0].epsilon,
                ce_min_len: rs[0].ce_min_len,
                sessions: rs.len(),
                success_rate: rs.iter().filter(|r| r.success).count() as f64 / n,
                mean_mq_unique: mean(&|r| r.mq_unique),
                mean_eq: mean(&|r| r.eq_total),
                mean_errors: mean(&|r| r.errors_injected),
                mean_interactions: mean(&|r| r.interactions()),
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        (a.algorithm, a.ce_min_len).cmp(&(b.algorithm, b.ce_min_len)).then(a.epsilon.total_cmp(&b.epsilon))
    });
    rows
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Interactions spent per session that reached the target: all
/// interactions of the group divided by its successes. `None` when nothing
/// succeeded.
pub fn cost_per_success(records: &[SessionRecord], algorithm: Algorithm, epsilon: f64) -> Option<f64> {
    let group: Vec<&SessionRecord> =
        records.iter().filter(|r| r.algorithm == algorithm && r.epsilon.to_bits() == epsilon.to_bits()).collect();
    let wins = group.iter().filter(|r| r.success).count();
    (wins > 0).then(|| group.iter().map(|r| r.interactions() as f64).sum::<f64>() / wins as f64)
}

/// Smallest noise level from which `passive` is cheaper per success than
/// `active` at that level and every higher one present in `records`.
pub fn crossover(records: &[SessionRecord], passive: Algorithm, active: Algorithm) -> Option<f64> {
    let mut levels: Vec<f64> = records.iter().map(|r| r.epsilon).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let cheaper = |e: f64| match (cost_per_success(records, passive, e), cost_per_success(records, active, e)) {
        (Some(p), Some(a)) => p < a,
        (Some(_), None) => true,
        (None, _) => false,
    };
    let mut found = None;
    for &e in levels.iter().rev() {
        if !cheaper(e) {
            break;
        }
        found = Some(e);
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{default_corpus_dir, load_corpus};

    fn small_grid() -> (Vec<CorpusEntry>, Grid) {
        let corpus = load_corpus(&default_corpus_dir()).unwrap();
        let mut grid = Preset::Table2.grid();
        grid.seeds = vec![0, 1];
        grid.epsilons = vec![0.05];
        (corpus[..4].to_vec(), grid)
    }

    #[test]
    fn parallel_and_serial_rows_agree() {
        let (entries, grid) = small_grid();
        let par = sweep(&entries, &grid).unwrap();
        assert_eq!(par.len(), 4 * 4 * 2);
        assert_eq!(par, sweep_serial(&entries, &grid).unwrap());
    }

    #[test]
    fn csv_round_trips() {
        let (entries, grid) = small_grid();
        let rows = sweep(&entries, &grid).unwrap();
        let bytes = to_csv_bytes(&rows);
        assert!(bytes.starts_with(b"corpus_id,algorithm,oracle_strategy,epsilon,ce_min_len,seed,"));
        assert_eq!(read_csv(bytes.as_slice()).unwrap(), rows);
    }

    #[test]
    fn empty_grid_is_rejected() {
        let (entries, mut grid) = small_grid();
        grid.seeds.clear();
        assert!(sweep(&entries, &grid).is_err());
        assert!(sweep(&[], &Preset::Fig3.grid()).is_err());
    }

    fn row(algorithm: Algorithm, epsilon: f64, interactions: usize, success: bool) -> SessionRecord {
        SessionRecord {
            corpus_id: "x".into(),
            algorithm,
            oracle_strategy: "simulated".into(),
            epsilon,
            ce_min_len: 10,
            seed: 0,
            mq_total: interactions,
            mq_unique: interactions,
            eq_total: 0,
            errors_injected: 0,
            passive_refinements: 0,
            success,
            hypothesis_states: 1,
            wall_time_ms: 0,
            failure: String::new(),
        }
    }

    #[test]
    fn crossover_is_the_start_of_the_cheaper_tail() {
        let mut rows = Vec::new();
        for (e, active, passive) in [(0.0, 10, 50), (0.1, 60, 50), (0.2, 40, 50), (0.3, 90, 50), (0.4, 200, 50)] {
            rows.push(row(Algorithm::Ttt, e, active, true));
            rows.push(row(Algorithm::RpniCe, e, passive, true));
        }
        assert_eq!(crossover(&rows, Algorithm::RpniCe, Algorithm::Ttt), Some(0.3));
        // two sessions, one success: the failed one still costs
        rows.push(row(Algorithm::Ttt, 0.2, 100, false));
        assert_eq!(cost_per_success(&rows, Algorithm::Ttt, 0.2), Some(140.0));
        assert_eq!(crossover(&rows, Algorithm::RpniCe, Algorithm::Ttt), Some(0.1));
        assert_eq!(crossover(&rows, Algorithm::Ttt, Algorithm::RpniCe), None);
    }

    #[test]
    fn summary_groups_by_algorithm_and_noise() {
        let (entries, grid) = small_grid();
        let rows = summarize(&sweep(&entries, &grid).unwrap());
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.sessions == 8));
    }
}

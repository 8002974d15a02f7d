//! The whole certification run for a pair of structures: census, threshold
//! check, classification, orders, lemma checks, game solution and matches
//! against random spoilers.

use serde::Serialize;

use crate::frequency::{classify_census, default_parameters};
use crate::game::{play_match, solve, Engine, Mode, RandomSpoiler, StrategyContext};
use crate::neighborhood::{census, threshold_equivalent};
use crate::order::{
    build_order_pair, check_decomposition, check_pin_separation, isomorphic, verify_lemma_envpres, verify_lemma_tppres,
    LemmaReport, OrderError, DEFAULT_ISOMORPHISM_BOUND, DEFAULT_TRANSFER_BUDGET,
};
use crate::structure::Structure;

/// Process exit codes shared with the command line.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INPUT: i32 = 2;
    pub const HYPOTHESIS: i32 = 3;
    pub const CERTIFICATION: i32 = 4;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Logic {
    Fo2,
    C2,
}

impl Logic {
    /// Counting games use index `k`, matching the pin copies.
    pub fn mode(self, k: usize) -> Mode {
        match self {
            Logic::Fo2 => Mode::Plain,
            Logic::C2 => Mode::Counting { threshold: k.max(1) },
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOptions {
    pub k: usize,
    pub logic: Logic,
    pub matches: usize,
    pub seed: u64,
    pub transfer_budget: usize,
}

impl PipelineOptions {
    pub fn new(k: usize, logic: Logic) -> Self {
        PipelineOptions { k, logic, matches: 1000, seed: 0, transfer_budget: DEFAULT_TRANSFER_BUDGET }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchSummary {
    pub played: usize,
    pub invariant_clean: usize,
    pub duplicator_won: usize,
    /// Seed of the first match that broke an invariant or was lost.
    pub first_failure: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// No frequent types: the structures are compared up to isomorphism.
    Isomorphism,
    Orders,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PipelineReport {
    pub k: usize,
    pub logic: Logic,
    pub mode: Mode,
    pub sizes: [usize; 2],
    pub degree: usize,
    pub t: Option<usize>,
    pub threshold_equivalent: Option<bool>,
    pub frequent_types: Option<usize>,
    pub rare_types: Option<usize>,
    pub branch: Option<Branch>,
    pub isomorphic: Option<bool>,
    pub decomposition_checks: Option<bool>,
    pub lemma_envpres: Option<LemmaReport>,
    pub lemma_tppres: Option<LemmaReport>,
    pub duplicator_wins: Option<bool>,
    pub matches: Option<MatchSummary>,
    /// Stage that stopped the run, if any.
    pub stage: Option<String>,
    pub message: String,
    pub exit_code: i32,
}

impl PipelineReport {
    pub fn certified(&self) -> bool {
        self.exit_code == exit::OK
    }

    fn stop(mut self, stage: &str, code: i32, message: impl Into<String>) -> Self {
        self.stage = Some(stage.into());
        self.exit_code = code;
        self.message = message.into();
        self
    }
}

/// Runs every stage on `(s0, s1)`. Failures are recorded in the report,
/// never returned as errors.
pub fn run_pipeline(s0: &Structure, s1: &Structure, opts: &PipelineOptions) -> PipelineReport {
    let k = opts.k;
    let mode = opts.logic.mode(k);
    let degree = s0.degree().max(s1.degree());
    let mut report = PipelineReport {
        k,
        logic: opts.logic,
        mode,
        sizes: [s0.size(), s1.size()],
        degree,
        t: None,
        threshold_equivalent: None,
        frequent_types: None,
        rare_types: None,
        branch: None,
        isomorphic: None,
        decomposition_checks: None,
        lemma_envpres: None,
        lemma_tppres: None,
        duplicator_wins: None,
        matches: None,
        stage: None,
        message: String::new(),
        exit_code: exit::OK,
    };
    if s0.signature() != s1.signature() {
        return report.stop("input", exit::INPUT, "structures have different signatures");
    }
    let (c0, c1) = match (census(s0, k), census(s1, k)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return report.stop("census", exit::INPUT, e.to_string()),
    };
    let cls = match default_parameters(k, degree, &c0, opts.logic == Logic::C2).and_then(|p| classify_census(&c0, &p)) {
        Ok(c) => c,
        Err(e) => return report.stop("classify", exit::INPUT, e.to_string()),
    };
    report.t = Some(cls.t);
    report.frequent_types = Some(cls.frequent.len());
    report.rare_types = Some(cls.rare.len());
    let similar = threshold_equivalent(&c0, &c1, cls.t).unwrap_or(false);
    report.threshold_equivalent = Some(similar);
    if !similar {
        return report.stop(
            "threshold",
            exit::HYPOTHESIS,
            format!("hypothesis of Theorem 1 pipeline not met: censuses differ below t = {}", cls.t),
        );
    }
    if cls.frequent.is_empty() {
        report.branch = Some(Branch::Isomorphism);
        return match isomorphic(s0, s1, DEFAULT_ISOMORPHISM_BOUND) {
            Ok(true) => {
                report.isomorphic = Some(true);
                report.message = "no frequent types; the structures are isomorphic".into();
                report
            }
            Ok(false) => {
                report.isomorphic = Some(false);
                report.stop("isomorphism", exit::HYPOTHESIS, "no frequent types and the structures are not isomorphic")
            }
            Err(e) => report.stop("isomorphism", exit::HYPOTHESIS, format!("no frequent types; {e}")),
        };
    }
    report.branch = Some(Branch::Orders);
    let pair = match build_order_pair(s0, s1, &cls, opts.transfer_budget) {
        Ok(p) => p,
        Err(e @ (OrderError::NoEmbedding(_) | OrderError::PinShortage { .. })) => {
            return report.stop("orders", exit::HYPOTHESIS, e.to_string())
        }
        Err(e) => return report.stop("orders", exit::CERTIFICATION, e.to_string()),
    };
    let checks = check_decomposition(&pair.decompositions[0], &pair.ordered[0])
        .and_then(|_| check_decomposition(&pair.decompositions[1], &pair.ordered[1]))
        .and_then(|_| check_pin_separation(&pair.decompositions[0], s0));
    report.decomposition_checks = Some(checks.is_ok());
    report.lemma_envpres = Some(verify_lemma_envpres(&pair));
    report.lemma_tppres = Some(verify_lemma_tppres(&pair));
    if let Err(e) = checks {
        return report.stop("decomposition", exit::CERTIFICATION, e);
    }
    if !report.lemma_envpres.as_ref().is_some_and(|r| r.holds) || !report.lemma_tppres.as_ref().is_some_and(|r| r.holds) {
        return report.stop("lemmas", exit::CERTIFICATION, "transfer lemma check failed");
    }
    match solve(&pair.ordered[0], &pair.ordered[1], k, mode) {
        Ok(table) => report.duplicator_wins = Some(table.duplicator_wins()),
        Err(e) => return report.stop("solve", exit::CERTIFICATION, e.to_string()),
    }
    if report.duplicator_wins != Some(true) {
        return report.stop("solve", exit::CERTIFICATION, "the spoiler wins on the ordered pair");
    }
    let ctx = StrategyContext::new(pair);
    let mut summary = MatchSummary { played: 0, invariant_clean: 0, duplicator_won: 0, first_failure: None };
    for i in 0..opts.matches {
        let seed = opts.seed.wrapping_add(i as u64);
        let outcome = play_match(Engine::Strategy(&ctx), &mut RandomSpoiler::new(seed), mode);
        summary.played += 1;
        let (clean, won) = match &outcome {
            Ok(t) => (t.invariants_held(), t.duplicator_won),
            Err(_) => (false, false),
        };
        summary.invariant_clean += clean as usize;
        summary.duplicator_won += won as usize;
        if !(clean && won) && summary.first_failure.is_none() {
            summary.first_failure = Some(seed);
        }
    }
    let failed = summary.first_failure;
    report.matches = Some(summary);
    if let Some(seed) = failed {
        return report.stop("matches", exit::CERTIFICATION, format!("strategy failed against spoiler seed {seed}"));
    }
    report.message = "certified: duplicator wins on the constructed orders".into();
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{cycle, path};

    #[test]
    fn cycles_are_certified() {
        let mut opts = PipelineOptions::new(1, Logic::Fo2);
        opts.matches = 50;
        let r = run_pipeline(&cycle(5000), &cycle(5001), &opts);
        assert!(r.certified(), "{r:?}");
        assert_eq!(r.branch, Some(Branch::Orders));
        assert_eq!(r.matches.as_ref().unwrap().invariant_clean, 50);
    }

    #[test]
    fn cycle_against_pure_set_misses_the_hypothesis() {
        let r = run_pipeline(&cycle(5000), &Structure::graph(5000, &[], true).unwrap(), &PipelineOptions::new(1, Logic::Fo2));
        assert_eq!(r.exit_code, exit::HYPOTHESIS);
        assert_eq!(r.threshold_equivalent, Some(false));
        assert!(r.message.contains("hypothesis of Theorem 1 pipeline not met"));
    }

    #[test]
    fn small_isomorphic_pair_takes_the_shortcut() {
        let r = run_pipeline(&path(6), &path(6).relabel(&[5, 4, 3, 2, 1, 0]).unwrap(), &PipelineOptions::new(1, Logic::Fo2));
        assert!(r.certified(), "{r:?}");
        assert_eq!(r.branch, Some(Branch::Isomorphism));
        assert_eq!(r.isomorphic, Some(true));
    }

    #[test]
    fn small_non_isomorphic_pair_with_equal_censuses_is_not_certified() {
        let two_hexagons = cycle(6).disjoint_union(&cycle(6)).unwrap();
        let r = run_pipeline(&cycle(12), &two_hexagons, &PipelineOptions::new(1, Logic::Fo2));
        assert_eq!(r.threshold_equivalent, Some(true));
        assert_eq!(r.exit_code, exit::HYPOTHESIS);
    }

    #[test]
    fn reports_are_deterministic() {
        let mut opts = PipelineOptions::new(1, Logic::C2);
        opts.matches = 20;
        let a = serde_json::to_string(&run_pipeline(&path(2000), &path(2001), &opts)).unwrap();
        let b = serde_json::to_string(&run_pipeline(&path(2000), &path(2001), &opts)).unwrap();
        assert_eq!(a, b);
    }
}

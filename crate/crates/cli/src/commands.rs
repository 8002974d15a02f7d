//! Command implementations. Each returns a JSON value and an exit code so
//! the binary and the tests share one code path.

use std::path::Path;

use anyhow::{anyhow, Context, Result};
use serde_json::{json, Value};

use fomet::formula::{check_order_invariance, parse_formula, InvarianceMode};
use fomet::frequency::{classify_census, default_parameters};
use fomet::game::{distinguishing_formula, play_match, solve, Engine, Mode, RandomSpoiler, StrategyContext};
use fomet::neighborhood::census;
use fomet::order::{build_order_pair, verify_lemma_envpres, verify_lemma_tppres, DEFAULT_TRANSFER_BUDGET};
use fomet::pipeline::{exit, run_pipeline, Logic, PipelineOptions};
use fomet::{parse_structure, OrderedStructure, Structure};

pub struct Outcome {
    pub value: Value,
    pub code: i32,
}

impl Outcome {
    fn ok(value: Value) -> Self {
        Outcome { value, code: exit::OK }
    }
}

/// An input problem: exit code 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn input(e: impl std::fmt::Display) -> anyhow::Error {
    InputError(e.to_string()).into()
}

pub fn load_structure(path: &Path) -> Result<Structure> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(input)?;
    parse_structure(&text).map_err(|e| input(format!("{}: {e}", path.display())))
}

/// An order file lists the elements from smallest to largest, separated by
/// whitespace or commas.
pub fn load_order(base: Structure, path: &Path) -> Result<OrderedStructure> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(input)?;
    let seq = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().map_err(|e| input(format!("{}: `{t}`: {e}", path.display()))))
        .collect::<Result<Vec<_>>>()?;
    OrderedStructure::from_sequence(base, seq).map_err(|e| input(format!("{}: {e}", path.display())))
}

pub fn mode_for(logic: Logic, k: usize, threshold: Option<usize>) -> Mode {
    match (logic, threshold) {
        (Logic::C2, Some(t)) => Mode::Counting { threshold: t },
        _ => logic.mode(k),
    }
}

pub fn validate(s: &Structure) -> Outcome {
    let relations: Vec<Value> = s
        .signature()
        .relations()
        .iter()
        .enumerate()
        .map(|(i, r)| json!({"name": r.name, "arity": r.arity, "tuples": s.tuples(i).len()}))
        .collect();
    Outcome::ok(json!({"size": s.size(), "degree": s.degree(), "relations": relations, "constants": s.constants()}))
}

pub fn types(s: &Structure, k: usize) -> Result<Outcome> {
    Ok(Outcome::ok(serde_json::to_value(census(s, k).map_err(input)?)?))
}

pub fn classify(s: &Structure, k: usize, logic: Logic) -> Result<Outcome> {
    let c = census(s, k).map_err(input)?;
    let params = default_parameters(k, s.degree(), &c, logic == Logic::C2).map_err(input)?;
    Ok(Outcome::ok(serde_json::to_value(classify_census(&c, &params).map_err(input)?)?))
}

pub fn build_orders(s0: &Structure, s1: &Structure, k: usize, logic: Logic) -> Result<Outcome> {
    let c = census(s0, k).map_err(input)?;
    let params = default_parameters(k, s0.degree().max(s1.degree()), &c, logic == Logic::C2).map_err(input)?;
    let cls = classify_census(&c, &params).map_err(input)?;
    match build_order_pair(s0, s1, &cls, DEFAULT_TRANSFER_BUDGET) {
        Ok(pair) => {
            let (env, tp) = (verify_lemma_envpres(&pair), verify_lemma_tppres(&pair));
            let code = if env.holds && tp.holds { exit::OK } else { exit::CERTIFICATION };
            Ok(Outcome {
                value: json!({
                    "decompositions": pair.decompositions,
                    "orders": [pair.ordered[0].sequence(), pair.ordered[1].sequence()],
                    "transfer": pair.transfer,
                    "lemma_envpres": env,
                    "lemma_tppres": tp,
                }),
                code,
            })
        }
        Err(e) => Ok(Outcome { value: json!({"error": e.to_string()}), code: exit::HYPOTHESIS }),
    }
}

/// Either two ordered or two plain structures.
pub enum Boards {
    Plain(Structure, Structure),
    Ordered(OrderedStructure, OrderedStructure),
}

macro_rules! with_boards {
    ($b:expr, |$a:ident, $c:ident| $body:expr) => {
        match $b {
            Boards::Plain($a, $c) => $body,
            Boards::Ordered($a, $c) => $body,
        }
    };
}

pub fn game(boards: &Boards, k: usize, mode: Mode) -> Result<Outcome> {
    let table = with_boards!(boards, |a, b| solve(a, b, k, mode)).map_err(input)?;
    let sentence: Vec<bool> = (0..=k).map(|r| table.sentence_equivalent(r)).collect();
    Ok(Outcome::ok(json!({
        "k": k,
        "mode": mode,
        "duplicator_wins": table.duplicator_wins(),
        "equivalent_up_to_rank": sentence,
    })))
}

pub fn distinguish(boards: &Boards, k: usize, mode: Mode) -> Result<Outcome> {
    let phi = with_boards!(boards, |a, b| distinguishing_formula(a, b, k, mode)).map_err(input)?;
    Ok(Outcome::ok(match phi {
        Some(f) => json!({
            "formula": f.to_string(),
            "quantifier_rank": f.quantifier_rank(),
            "counting_index": f.counting_index(),
        }),
        None => json!({"formula": null}),
    }))
}

pub fn invariance(s: &Structure, formula: &str, sample: Option<(u64, usize)>) -> Result<Outcome> {
    let f = parse_formula(formula, s.signature()).map_err(input)?;
    let mode = match sample {
        Some((seed, trials)) => InvarianceMode::Sampled { seed, trials },
        None => InvarianceMode::default(),
    };
    let verdict = check_order_invariance(&f, s, mode).map_err(input)?;
    Ok(Outcome::ok(serde_json::to_value(verdict)?))
}

pub fn pipeline(s0: &Structure, s1: &Structure, opts: &PipelineOptions) -> Result<Outcome> {
    let report = run_pipeline(s0, s1, opts);
    Ok(Outcome { code: report.exit_code, value: serde_json::to_value(report)? })
}

/// One strategy match on the constructed orders, with its transcript.
pub fn play(s0: &Structure, s1: &Structure, k: usize, logic: Logic, seed: u64) -> Result<Outcome> {
    let c = census(s0, k).map_err(input)?;
    let params = default_parameters(k, s0.degree().max(s1.degree()), &c, logic == Logic::C2).map_err(input)?;
    let cls = classify_census(&c, &params).map_err(input)?;
    let pair = match build_order_pair(s0, s1, &cls, DEFAULT_TRANSFER_BUDGET) {
        Ok(p) => p,
        Err(e) => return Ok(Outcome { value: json!({"error": e.to_string()}), code: exit::HYPOTHESIS }),
    };
    let ctx = StrategyContext::new(pair);
    let t = play_match(Engine::Strategy(&ctx), &mut RandomSpoiler::new(seed), logic.mode(k))
        .map_err(|e| anyhow!("strategy failed: {e}"))?;
    let code = if t.invariants_held() && t.duplicator_won { exit::OK } else { exit::CERTIFICATION };
    Ok(Outcome { value: serde_json::to_value(t)?, code })
}

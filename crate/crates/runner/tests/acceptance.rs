//! Acceptance checks, one PASS/FAIL line per criterion.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::panic;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use consensus_core::cluster::{select_k, silhouette_score, spectral_cluster, symmetric_eigen, AffinityMatrix};
use consensus_core::footprint::{co2_estimate, FootprintInput};
use consensus_core::metrics::{auc_roc, bootstrap_ci, ece, exact_match, stratify_by_agreement, token_f1};
use consensus_core::pareto::{pareto_mask, ScenarioPoint};
use consensus_core::relation::{
    score_extraction, soft_match, MatchRule, RelationInstance, RelationLabels, RelationPrediction, SynonymDictionary,
};
use consensus_core::report::Table;
use consensus_core::routing::threshold_sweep;
use consensus_core::{route, AggregateDecision, ParsedOutput, Routing, RoutingThresholds, SampleResponse};
use consensus_runner::config::{RunConfig, Task};
use consensus_runner::gateway::{EndpointSpec, Gateway, GatewaySettings, SimProfile, SimScript};
use consensus_runner::orchestrator::checkpoint::OUTCOMES_FILE;
use consensus_runner::orchestrator::{resume, run_task, run_with, RunHooks, SUMMARY_FILE};
use consensus_runner::pipeline::{self, Sampling};
use consensus_runner::RunError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------- 1

const FOOTPRINT_BAND: (f64, f64) = (0.0897, 0.0899);
const FOOTPRINT_425_BAND: (f64, f64) = (0.108, 0.110);
const FOOTPRINT_BUDGET: Duration = Duration::from_millis(1);

fn footprint() -> Outcome {
    let started = Instant::now();
    let base = co2_estimate(&FootprintInput::new(350.0, 4.5, 1.0, 57.0).map_err(|e| e.to_string())?);
    let elapsed = started.elapsed();
    let high = co2_estimate(&FootprintInput::new(425.0, 4.5, 1.0, 57.0).map_err(|e| e.to_string())?);
    ensure(FOOTPRINT_BAND.0 <= base && base <= FOOTPRINT_BAND.1, || format!("350 W gives {base} kg"))?;
    ensure(FOOTPRINT_425_BAND.0 <= high && high <= FOOTPRINT_425_BAND.1, || format!("425 W gives {high} kg"))?;
    ensure(elapsed < FOOTPRINT_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("{base:.6} kg, {high:.6} kg at 425 W, {elapsed:?}"))
}

// ---------------------------------------------------------------- 2

fn routing_grid() -> Outcome {
    let t = RoutingThresholds::new(0.4, 0.8).map_err(|e| e.to_string())?;
    let expected = [
        (0.0, Routing::Uncertain),
        (0.39, Routing::Uncertain),
        (0.4, Routing::Rerouted),
        (0.79, Routing::Rerouted),
        (0.8, Routing::Accepted),
        (1.0, Routing::Accepted),
    ];
    for (a, want) in expected {
        let got = route(a, &t);
        ensure(got == want, || format!("agreement {a}: {got:?}, expected {want:?}"))?;
    }
    Ok("6/6 boundary points".into())
}

// ---------------------------------------------------------------- 3

const CASCADE_N: usize = 500;
const ROUTING_TOLERANCE_PTS: f64 = 0.2;
const CASCADE_FRACTIONS: [f64; 3] = [54.6, 33.6, 11.8];

/// One block of identically scripted questions.
struct Block {
    count: usize,
    primary: [&'static str; 5],
}

/// Plurality answer with first-seen tie breaking, and its share.
fn plurality<'a>(answers: &[&'a str]) -> (&'a str, f64) {
    let mut best = (answers[0], 0);
    for a in answers {
        let c = answers.iter().filter(|b| *b == a).count();
        if c > best.1 {
            best = (a, c);
        }
    }
    (best.0, best.1 as f64 / answers.len() as f64)
}

fn cascade_simulation() -> Outcome {
    let g = "@gold";
    let blocks = [
        Block { count: 150, primary: [g, g, g, g, g] },
        Block { count: 40, primary: [g, g, g, g, "w1"] },
        Block { count: 83, primary: ["w1", "w1", "w1", "w1", "w1"] },
        Block { count: 84, primary: ["w1", "w1", "w1", g, "w2"] },
        Block { count: 84, primary: ["w1", "w1", g, g, "w2"] },
        Block { count: 10, primary: [g, "w1", "w2", "w3", "w4"] },
        Block { count: 49, primary: ["w1", "w2", g, "w3", "w4"] },
    ];
    // secondary scripts for the rerouted questions, in question order
    let secondary_blocks = [(50, [g, g, g, "v1", "v2"]), (26, [g, g, g, g, g]), (92, ["v1", "v1", "v1", "v1", "v1"])];

    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut primary = SimProfile::default();
    let mut secondary = SimProfile::default();
    let mut secondary_iter = secondary_blocks.iter().flat_map(|(n, s)| std::iter::repeat_n(*s, *n));
    let thresholds = RoutingThresholds::default();
    let (mut correct, mut oracle, mut classes) = (0usize, 0usize, [0usize; 3]);
    let mut qid = 0;
    for b in &blocks {
        for _ in 0..b.count {
            let id = format!("q{qid:03}");
            qid += 1;
            primary = primary.with_question(&id, common::multiset(&b.primary));
            let (winner, agreement) = plurality(&b.primary);
            let mut pool: Vec<&str> = b.primary.to_vec();
            let final_answer = if agreement >= 0.8 {
                classes[0] += 1;
                winner
            } else if agreement >= 0.4 {
                classes[1] += 1;
                let s = secondary_iter.next().ok_or("secondary script exhausted")?;
                secondary = secondary.with_question(&id, common::multiset(&s));
                pool.extend(s);
                plurality(&s).0
            } else {
                classes[2] += 1;
                winner
            };
            correct += usize::from(final_answer == g);
            oracle += usize::from(pool.contains(&g));
        }
    }
    ensure(qid == CASCADE_N, || format!("script covers {qid} questions"))?;
    let expected_em = correct as f64 / CASCADE_N as f64;
    let expected_oracle = oracle as f64 / CASCADE_N as f64;

    let mut config = RunConfig::new(Task::Cascade);
    config.endpoints = vec![EndpointSpec::simulated("primary", primary), EndpointSpec::simulated("secondary", secondary)];
    config.dataset_path = Some(common::write_questions(tmp.path(), CASCADE_N));
    config.output_dir = tmp.path().join("out");
    config.thresholds = thresholds;
    let report = run_task(&config).map_err(|e| e.to_string())?.report;
    let metric = |name: &str| report.metric(name).map(|m| m.value).ok_or_else(|| format!("no metric {name}"));

    for (name, want) in ["Accepted (%)", "Rerouted (%)", "Uncertain (%)"].iter().zip(CASCADE_FRACTIONS) {
        let got = metric(name)?;
        ensure((got - want).abs() <= ROUTING_TOLERANCE_PTS, || format!("{name} = {got}, expected {want}"))?;
    }
    let em = metric("EM")?;
    ensure(em == expected_em, || format!("EM {em} differs from script expectation {expected_em}"))?;
    let or = metric("Oracle")?;
    ensure(or == expected_oracle, || format!("oracle {or} differs from script expectation {expected_oracle}"))?;
    Ok(format!(
        "routing {}/{}/{} of {CASCADE_N}, EM {em:.3} = expected {expected_em:.3}, oracle {or:.3}",
        classes[0], classes[1], classes[2]
    ))
}

// ---------------------------------------------------------------- 4

const IDENTITY_TOLERANCE: f64 = 1e-12;

fn sample(i: usize, answer: &str) -> SampleResponse {
    SampleResponse {
        endpoint: "m".into(),
        sample_index: i,
        raw_text: String::new(),
        parsed: Ok(ParsedOutput { answer: answer.into(), ..ParsedOutput::default() }),
        latency_ms: 0,
    }
}

fn decision(id: usize, answers: &[&str]) -> AggregateDecision {
    let samples = answers.iter().enumerate().map(|(i, a)| sample(i, a)).collect();
    AggregateDecision::from_samples(format!("d{id}"), "gold", samples)
}

fn agreement_paradox() -> Outcome {
    let g = "gold";
    let plan: [(usize, [&str; 5]); 9] = [
        (18, [g, g, g, g, g]),
        (3, ["w", "w", "w", "w", g]),
        (63, ["w", "w", "w", "w", "w"]),
        (23, [g, g, g, "w", "x"]),
        (11, ["w", "w", "w", g, "x"]),
        (40, ["w", "w", "w", "x", "y"]),
        (1, [g, "p", "q", "r", "s"]),
        (4, ["p", g, "q", "r", "s"]),
        (18, ["p", "q", "r", "s", "t"]),
    ];
    let mut decisions = Vec::new();
    for (n, answers) in plan {
        for _ in 0..n {
            decisions.push(decision(decisions.len(), &answers));
        }
    }
    let strata = stratify_by_agreement(&decisions, (0.4, 0.8)).map_err(|e| e.to_string())?;
    let table = Table::strata(&strata);
    let reference = [["84", "0.214", "0.250"], ["74", "0.311", "0.459"], ["23", "0.043", "0.217"]];
    for (row, want) in table.rows.iter().zip(reference) {
        ensure([&row[2], &row[3], &row[4]] == want.map(String::from).iter().collect::<Vec<_>>()[..], || {
            format!("{} row {:?}, expected {want:?}", row[0], &row[2..])
        })?;
    }
    let n = decisions.len() as f64;
    let overall = decisions.iter().map(AggregateDecision::em).sum::<f64>() / n;
    let weighted: f64 = strata.iter().filter_map(|s| s.em_voted.map(|em| s.n as f64 * em)).sum::<f64>() / n;
    ensure((overall - weighted).abs() <= IDENTITY_TOLERANCE, || format!("{weighted} vs overall {overall}"))?;
    Ok(format!("84/74/23 with EM 0.214/0.311/0.043, identity gap {:.1e}", (overall - weighted).abs()))
}

// ---------------------------------------------------------------- 5

const BOOTSTRAP_P: f64 = 0.458;
const BOOTSTRAP_N: usize = 500;
const HALF_WIDTH_TOLERANCE: f64 = 0.20;
const BOOTSTRAP_BUDGET: Duration = Duration::from_secs(1);

fn bootstrap() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let draws: Vec<f64> =
        (0..BOOTSTRAP_N).map(|_| if rng.random::<f64>() < BOOTSTRAP_P { 1.0 } else { 0.0 }).collect();
    let started = Instant::now();
    let (lo, hi) = bootstrap_ci(&draws, 1000, 0.95, 42).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    let half = (hi - lo) / 2.0;
    let analytic = 1.96 * (BOOTSTRAP_P * (1.0 - BOOTSTRAP_P) / BOOTSTRAP_N as f64).sqrt();
    let rel = (half - analytic).abs() / analytic;
    ensure(rel <= HALF_WIDTH_TOLERANCE, || format!("half-width {half:.4} vs analytic {analytic:.4}"))?;
    ensure(elapsed < BOOTSTRAP_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("[{lo:.3}, {hi:.3}], half-width {half:.4} vs {analytic:.4} ({:.1}%), {elapsed:?}", 100.0 * rel))
}

// ---------------------------------------------------------------- 6

const F1_TOLERANCE: f64 = 1e-12;
const ECE_TOLERANCE: f64 = 1e-12;

fn fraction(s: &str) -> Result<f64, String> {
    let parse = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x}: {e}"));
    match s.split_once('/') {
        Some((a, b)) => Ok(parse(a)? / parse(b)?),
        None => parse(s),
    }
}

fn metric_oracles() -> Outcome {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/qa_golden.tsv");
    let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut cases = 0;
    for line in text.lines().filter(|l| !l.starts_with('#')) {
        let cols: Vec<&str> = line.split('\t').collect();
        let [pred, gold, em, f1] = cols[..] else {
            return Err(format!("malformed golden line {line:?}"));
        };
        let (em_want, f1_want) = (fraction(em)?, fraction(f1)?);
        let (em_got, f1_got) = (exact_match(pred, gold), token_f1(pred, gold));
        ensure(em_got == em_want, || format!("EM({pred:?}, {gold:?}) = {em_got}, expected {em_want}"))?;
        ensure((f1_got - f1_want).abs() <= F1_TOLERANCE, || {
            format!("F1({pred:?}, {gold:?}) = {f1_got}, expected {f1_want}")
        })?;
        cases += 1;
    }
    ensure(cases == 20, || format!("golden file has {cases} cases"))?;
    let obama = token_f1("Barack Obama", "Obama");
    ensure(format!("{obama:.4}") == "0.6667", || format!("Obama F1 {obama}"))?;

    let auc = auc_roc(&[0.8, 0.4, 0.6, 0.2], &[true, true, false, false]).map_err(|e| e.to_string())?;
    ensure(auc == 0.75, || format!("AUC {auc}"))?;

    let correct: Vec<bool> = (0..500).map(|i| i < 388).collect();
    let accuracy = 388.0 / 500.0;
    let e = ece(&[0.95; 500], &correct, 10).map_err(|e| e.to_string())?;
    ensure((e - (0.95 - accuracy)).abs() <= ECE_TOLERANCE, || format!("ECE {e}, expected {}", 0.95 - accuracy))?;
    ensure(format!("{e:.3}") == "0.174", || format!("ECE {e}"))?;
    Ok(format!("{cases} golden QA cases, AUC {auc}, ECE {e:.3}"))
}

// ---------------------------------------------------------------- 7

fn instance(i: usize, gold: &str) -> RelationInstance {
    RelationInstance {
        doc_id: format!("doc{i}"),
        text: "text".into(),
        head: "head".into(),
        tail: "tail".into(),
        gold_relation: gold.into(),
    }
}

fn extraction_scoring() -> Outcome {
    let golds = ["country", "located_in_admin", "spouse", "employer", "date_of_birth"];
    let instances: Vec<RelationInstance> = (0..500).map(|i| instance(i, golds[i % golds.len()])).collect();
    let predictions: Vec<RelationPrediction> = instances
        .iter()
        .enumerate()
        .map(|(i, inst)| RelationPrediction {
            doc_id: inst.doc_id.clone(),
            predicted_relation: (i < 10).then(|| inst.gold_relation.clone()),
            confidence: None,
        })
        .collect();
    let (dict, labels) = (SynonymDictionary::seed(), RelationLabels::default());
    let s = score_extraction(&instances, &predictions, &dict, &labels).map_err(|e| e.to_string())?;
    ensure(s.precision == Some(1.0), || format!("precision {:?}", s.precision))?;
    ensure(s.recall == 0.02, || format!("recall {}", s.recall))?;
    ensure(s.unparsed_rate == 0.98 && format!("{:.1}", 100.0 * s.unparsed_rate) == "98.0", || {
        format!("unparsed {}", s.unparsed_rate)
    })?;

    let golden = [
        ("P131", "located_in_admin", Some(MatchRule::CodeResolution)),
        ("P17", "country", Some(MatchRule::CodeResolution)),
        ("Located In Admin", "located_in_admin", Some(MatchRule::Normalized)),
        ("country", "country_of_citizenship", Some(MatchRule::Lexical)),
        ("country", "contains_admin", Some(MatchRule::Synonym)),
        ("spouse", "father", Some(MatchRule::Synonym)),
        ("spouse", "employer", None),
    ];
    for (pred, gold, rule) in golden {
        let got = soft_match(pred, gold, &dict, &labels).rule;
        ensure(got == rule, || format!("{pred} vs {gold}: {got:?}, expected {rule:?}"))?;
    }
    Ok(format!("P {:.3}, R {:.3}, unparsed {:.1}%, {} rule cases", 1.0, s.recall, 100.0 * s.unparsed_rate, golden.len()))
}

// ---------------------------------------------------------------- 8

const EIGEN_RESIDUAL: f64 = 1e-8;
const SILHOUETTE_TOLERANCE: f64 = 1e-10;
const CLUSTER_BUDGET: Duration = Duration::from_secs(5);

fn block_affinity() -> AffinityMatrix {
    let n = 15;
    let w: Vec<Vec<f64>> =
        (0..n).map(|i| (0..n).map(|j| if i != j && i / 5 == j / 5 { 5.0 } else { 0.0 }).collect()).collect();
    AffinityMatrix::new((0..n).map(|i| format!("r{i:02}")).collect(), w).expect("valid affinity")
}

/// Canonical relabelling: clusters numbered by first appearance.
fn canonical(assignment: &[usize]) -> Vec<usize> {
    let mut map = BTreeMap::new();
    assignment.iter().map(|a| { let next = map.len(); *map.entry(*a).or_insert(next) }).collect()
}

/// Branch and bound over canonical `k`-partitions minimizing the weight
/// cut between clusters; returns the optimum and every partition reaching it.
fn min_cut_partitions(w: &[Vec<f64>], k: usize) -> (f64, Vec<Vec<usize>>) {
    fn go(w: &[Vec<f64>], k: usize, assign: &mut Vec<usize>, used: usize, cost: f64, best: &mut (f64, Vec<Vec<usize>>)) {
        let i = assign.len();
        if cost > best.0 {
            return;
        }
        if i == w.len() {
            if used == k {
                if cost < best.0 {
                    *best = (cost, Vec::new());
                }
                best.1.push(assign.clone());
            }
            return;
        }
        if w.len() - i < k - used {
            return;
        }
        for c in 0..(used + 1).min(k) {
            let added: f64 = (0..i).filter(|&j| assign[j] != c).map(|j| w[i][j]).sum();
            assign.push(c);
            go(w, k, assign, used.max(c + 1), cost + added, best);
            assign.pop();
        }
    }
    let mut best = (f64::INFINITY, Vec::new());
    go(w, k, &mut Vec::new(), 0, 0.0, &mut best);
    best
}

/// Mean silhouette straight from the definition with distance max_w - w.
fn silhouette_oracle(w: &[Vec<f64>], assignment: &[usize]) -> f64 {
    let n = w.len();
    let max_w = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| w[i][j]).fold(0.0, f64::max);
    let ids: std::collections::BTreeSet<usize> = assignment.iter().copied().collect();
    let mut total = 0.0;
    for i in 0..n {
        let members = |c: usize| (0..n).filter(move |&j| j != i && assignment[j] == c);
        let mates: Vec<usize> = members(assignment[i]).collect();
        if mates.is_empty() {
            continue;
        }
        let a = mates.iter().map(|&j| max_w - w[i][j]).sum::<f64>() / mates.len() as f64;
        let b = ids
            .iter()
            .filter(|&&c| c != assignment[i])
            .map(|&c| {
                let m: Vec<usize> = members(c).collect();
                m.iter().map(|&j| max_w - w[i][j]).sum::<f64>() / m.len() as f64
            })
            .fold(f64::INFINITY, f64::min);
        if a.max(b) > 0.0 {
            total += (b - a) / a.max(b);
        }
    }
    total / n as f64
}

fn clustering() -> Outcome {
    let affinity = block_affinity();
    let started = Instant::now();
    let chosen = select_k(&affinity, 2..=6, 42).map_err(|e| e.to_string())?;
    let laplacian = affinity.normalized_laplacian();
    let eig = symmetric_eigen(&laplacian);
    let elapsed = started.elapsed();

    let blocks: Vec<usize> = (0..15).map(|i| i / 5).collect();
    ensure(chosen.k == 3, || format!("select_k chose k = {}", chosen.k))?;
    ensure(canonical(&chosen.assignment) == blocks, || format!("assignment {:?}", chosen.assignment))?;
    let (cut, optima) = min_cut_partitions(&affinity.weights, 3);
    ensure(cut == 0.0 && optima == vec![blocks.clone()], || format!("brute force: cut {cut}, {} optima", optima.len()))?;
    for k in 2..=6 {
        let other = spectral_cluster(&affinity, k, 42).map_err(|e| e.to_string())?;
        ensure(other.silhouette <= chosen.silhouette, || format!("k = {k} scores {} > {}", other.silhouette, chosen.silhouette))?;
    }

    let mut worst = 0.0f64;
    for (value, v) in eig.values.iter().zip(&eig.vectors) {
        for (row, vi) in laplacian.iter().zip(v) {
            let lv: f64 = row.iter().zip(v).map(|(a, b)| a * b).sum();
            worst = worst.max((lv - value * vi).abs());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let n = rng.random_range(2..40);
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let x = rng.random_range(-1.0..1.0);
                m[i][j] = x;
                m[j][i] = x;
            }
        }
        let e = symmetric_eigen(&m);
        for (value, v) in e.values.iter().zip(&e.vectors) {
            for (row, vi) in m.iter().zip(v) {
                let lv: f64 = row.iter().zip(v).map(|(a, b)| a * b).sum();
                worst = worst.max((lv - value * vi).abs());
            }
        }
    }
    ensure(worst < EIGEN_RESIDUAL, || format!("eigen residual {worst:e}"))?;

    let mut sil_gap = 0.0f64;
    for _ in 0..500 {
        let n = rng.random_range(3..=12);
        let mut w = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let x = if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.0..10.0) };
                w[i][j] = x;
                w[j][i] = x;
            }
        }
        let k = rng.random_range(2..=n.min(5));
        let mut assignment: Vec<usize> = (0..n).map(|i| if i < k { i } else { rng.random_range(0..k) }).collect();
        assignment.rotate_left(rng.random_range(0..n));
        let got = silhouette_score(&w, &assignment).map_err(|e| e.to_string())?;
        sil_gap = sil_gap.max((got - silhouette_oracle(&w, &assignment)).abs());
    }
    ensure(sil_gap <= SILHOUETTE_TOLERANCE, || format!("silhouette gap {sil_gap:e}"))?;
    ensure(elapsed < CLUSTER_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "k = 3, blocks recovered, silhouette {:.3}, eigen residual {worst:.1e}, silhouette gap {sil_gap:.1e}, {elapsed:?}",
        chosen.silhouette
    ))
}

// ---------------------------------------------------------------- 9

fn brute_force_frontier(points: &[ScenarioPoint]) -> Vec<bool> {
    points
        .iter()
        .map(|p| {
            !points.iter().any(|q| {
                q.relative_cost <= p.relative_cost
                    && q.em >= p.em
                    && (q.relative_cost < p.relative_cost || q.em > p.em)
            })
        })
        .collect()
}

fn pareto() -> Outcome {
    let table = [
        ("QLoRA only", 1.0, 0.406),
        ("8-LLM vote", 130.0, 0.446),
        ("zero-shot", 2.5, 0.462),
        ("SC k=3", 7.5, 0.482),
        ("8-model oracle", 130.0, 0.520),
        ("random cascade", 12.0, 0.524),
        ("cascade", 12.0, 0.552),
        ("two-model oracle", 12.0, 0.588),
    ];
    let points: Vec<ScenarioPoint> =
        table.iter().map(|(n, c, em)| ScenarioPoint::new(*n, *c, *em).expect("valid point")).collect();
    let mask = pareto_mask(&points);
    let names: Vec<&str> = points.iter().zip(&mask).filter(|(_, k)| **k).map(|(p, _)| p.name.as_str()).collect();
    ensure(mask == brute_force_frontier(&points), || format!("mask {mask:?}"))?;
    ensure(names == ["QLoRA only", "zero-shot", "SC k=3", "two-model oracle"], || format!("frontier {names:?}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for set in 0..1000 {
        let points: Vec<ScenarioPoint> = (0..20)
            .map(|i| {
                // coarse grids force cost and EM ties
                let cost = f64::from(rng.random_range(1..8u32)) * 0.5;
                let em = f64::from(rng.random_range(0..10u32)) / 10.0;
                ScenarioPoint::new(format!("p{i}"), cost, em).expect("valid point")
            })
            .collect();
        ensure(pareto_mask(&points) == brute_force_frontier(&points), || format!("random set {set} disagrees"))?;
    }
    Ok(format!("reference frontier {names:?}; 1000 random sets agree"))
}

// ---------------------------------------------------------------- 10

const KILL_POINTS: usize = 20;
const REPLAY_N: usize = 40;

fn read_reports(dir: &Path) -> Result<(Vec<u8>, Vec<u8>), String> {
    let summary = fs::read(dir.join(SUMMARY_FILE)).map_err(|e| e.to_string())?;
    let md = fs::read(common::report_file(dir, Task::Cascade, "md")).map_err(|e| e.to_string())?;
    Ok((summary, md))
}

fn orchestration_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let answers = ["@gold", "w1", "w2", "w3"];
    let mut profiles = [SimProfile::default(), SimProfile::default()];
    for i in 0..REPLAY_N {
        for p in &mut profiles {
            let weights = answers.iter().map(|a| (a.to_string(), rng.random_range(0.0..1.0))).collect();
            *p = std::mem::take(p).with_question(&format!("q{i:03}"), SimScript::Categorical(weights));
        }
    }
    let [p, s] = profiles;
    let fixtures = tmp.path().join("fixtures");
    let mut record = RunConfig::new(Task::Cascade);
    record.endpoints = vec![EndpointSpec::simulated("primary", p), EndpointSpec::simulated("secondary", s)];
    record.dataset_path = Some(common::write_questions(tmp.path(), REPLAY_N));
    record.output_dir = tmp.path().join("record");
    record.record_dir = Some(fixtures.clone());
    record.bootstrap.iterations = 300;
    run_task(&record).map_err(|e| format!("recording: {e}"))?;

    let mut replay = record.clone();
    replay.record_dir = None;
    replay.replay_dir = Some(fixtures);
    for e in &mut replay.endpoints {
        e.base_url = "replay".into();
        e.sim = None;
    }
    replay.output_dir = tmp.path().join("straight");
    run_task(&replay).map_err(|e| format!("replay: {e}"))?;
    let reference = read_reports(&replay.output_dir)?;

    let mut torn = 0;
    for attempt in 0..KILL_POINTS {
        let kill = rng.random_range(0..REPLAY_N);
        let mut c = replay.clone();
        c.output_dir = tmp.path().join(format!("killed-{attempt}"));
        match run_with(&c, &RunHooks { stop_after: Some(kill), fresh: false }) {
            Err(RunError::Interrupted(n)) if n == kill => {}
            other => return Err(format!("kill at {kill}: {:?}", other.map(|s| s.output_dir))),
        }
        if rng.random_bool(0.5) {
            use std::io::Write;
            let mut f = fs::OpenOptions::new().append(true).open(c.output_dir.join(OUTCOMES_FILE)).map_err(|e| e.to_string())?;
            f.write_all(br#"{"id":"q0"#).map_err(|e| e.to_string())?;
            torn += 1;
        }
        resume(&c.output_dir, None, &RunHooks::default()).map_err(|e| format!("resume after {kill}: {e}"))?;
        let got = read_reports(&c.output_dir)?;
        ensure(got.0 == reference.0, || format!("summary.json differs after a kill at {kill}"))?;
        ensure(got.1 == reference.1, || format!("markdown report differs after a kill at {kill}"))?;
    }
    Ok(format!("{KILL_POINTS} kill points ({torn} with a torn line) resume byte-identical"))
}

// ---------------------------------------------------------------- 11

const INVARIANT_RUNS: usize = 1000;

fn invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let answers = ["@gold", "w1", "w2", "w3", "w4"];
    let vocabulary: Vec<String> = RelationLabels::default().vocabulary().map(String::from).collect();
    let dict = SynonymDictionary::seed();
    let labels = RelationLabels::default();
    let synonyms: Vec<String> = dict.groups().iter().flat_map(|g| g.labels.clone()).collect();
    let mut checks = 0usize;
    for run in 0..INVARIANT_RUNS {
        let n = rng.random_range(3..12);
        let k = rng.random_range(1..8);
        let mut primary = SimProfile::default();
        let mut secondary = SimProfile::default();
        let mut golds = BTreeMap::new();
        for i in 0..n {
            let id = format!("q{i}");
            golds.insert(id.clone(), format!("gold {i}"));
            for p in [&mut primary, &mut secondary] {
                let weights = answers.iter().map(|a| (a.to_string(), rng.random_range(0.0..1.0f64).powi(2))).collect();
                *p = std::mem::take(p).with_question(&id, SimScript::Categorical(weights));
            }
        }
        let gw = Gateway::new(
            &[EndpointSpec::simulated("p", primary), EndpointSpec::simulated("s", secondary)],
            GatewaySettings { golds: golds.clone(), workers: 8, ..GatewaySettings::default() },
        )
        .map_err(|e| e.to_string())?;
        let seed_base = rng.random_range(0..1_000_000);
        let sampling = |endpoint| Sampling { endpoint, k, temperature: 0.7, seed_base };
        let records: Vec<_> = golds
            .iter()
            .map(|(id, gold)| consensus_runner::dataset::QuestionRecord {
                id: id.clone(),
                question: format!("{id}?"),
                gold: gold.clone(),
                context: None,
            })
            .collect();
        let decisions: Vec<AggregateDecision> = records
            .iter()
            .map(|r| pipeline::self_consistency(&gw, r, sampling("p")))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let em: f64 = decisions.iter().map(AggregateDecision::em).sum();
        let oracle = decisions.iter().filter(|d| d.oracle_hit).count() as f64;
        ensure(em <= oracle, || format!("run {run}: voted EM {em} above oracle {oracle}"))?;

        let mut highs: Vec<f64> = (0..rng.random_range(2..6)).map(|_| rng.random_range(0.4..=1.0)).collect();
        highs.sort_by(f64::total_cmp);
        let by_id: BTreeMap<&str, &consensus_runner::dataset::QuestionRecord> =
            records.iter().map(|r| (r.id.as_str(), r)).collect();
        let rows = threshold_sweep(&decisions, 0.4, &highs, |d| {
            pipeline::self_consistency(&gw, by_id[d.question_id.as_str()], sampling("s")).expect("simulated secondary")
        })
        .map_err(|e| e.to_string())?;
        ensure(rows.windows(2).all(|w| w[0].rerouted <= w[1].rerouted), || format!("run {run}: sweep not monotone"))?;

        let m = rng.random_range(5..30);
        let instances: Vec<RelationInstance> = (0..m)
            .map(|i| instance(i, if rng.random_bool(0.6) { &synonyms[rng.random_range(0..synonyms.len())] } else { &vocabulary[rng.random_range(0..vocabulary.len())] }))
            .collect();
        let predictions: Vec<RelationPrediction> = instances
            .iter()
            .map(|inst| RelationPrediction {
                doc_id: inst.doc_id.clone(),
                predicted_relation: match rng.random_range(0..4) {
                    0 => None,
                    1 => Some(inst.gold_relation.clone()),
                    2 => Some(synonyms[rng.random_range(0..synonyms.len())].clone()),
                    _ => Some(vocabulary[rng.random_range(0..vocabulary.len())].clone()),
                },
                confidence: None,
            })
            .collect();
        let full = score_extraction(&instances, &predictions, &dict, &labels).map_err(|e| e.to_string())?.f1;
        for g in dict.groups() {
            let reduced = score_extraction(&instances, &predictions, &dict.without_group(&g.name), &labels)
                .map_err(|e| e.to_string())?
                .f1;
            ensure(reduced <= full, || format!("run {run}: dropping {} raised F1 {full} -> {reduced}", g.name))?;
        }
        checks += 1;
    }
    Ok(format!("{checks} simulated runs: EM <= oracle, monotone sweeps, group removal never helps"))
}

// ----------------------------------------------------------------

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("footprint", footprint),
        ("routing boundaries", routing_grid),
        ("cascade simulation", cascade_simulation),
        ("agreement strata", agreement_paradox),
        ("bootstrap interval", bootstrap),
        ("metric oracles", metric_oracles),
        ("extraction scoring", extraction_scoring),
        ("spectral clustering", clustering),
        ("pareto frontier", pareto),
        ("resume determinism", orchestration_determinism),
        ("vote and scoring invariants", invariants),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(check).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

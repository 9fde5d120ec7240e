//! Acceptance checks. Runs as a plain binary so that every criterion prints
//! a PASS or FAIL line in the normal `cargo test` output.

mod common;

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{random_parse_string, random_parse_string_of_len, random_worded_tree, substitute};
use synproto::cli::{self, BuildArgs, MethodArg, SweepArgs, SweepKind};
use synproto::editdist::{wagner_fischer, Pattern};
use synproto::eval::{tactic_metrics, ConfusionTally, EvalOptions};
use synproto::prototype::{segment, set_median, set_median_index, synthesize_prototype};
use synproto::treebank::{
    collapse_unary_chains, linearize, parse_bracketed, render, strip_terminals,
};
use synproto::{
    build_prototypes, classify, classify_with_rejection, edit_distance, evaluate, BuildConfig,
    Category, Classifier, LabeledArgument, Method, MetricsReport, ParseString, PrototypeSet,
    TacticId, Token,
};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($msg)+));
        }
    };
}

fn main() {
    let criteria: &[Criterion] = &[
        ("edit distance matches exhaustive oracle", exhaustive_oracle),
        ("metric axioms", metric_axioms),
        ("set median optimality", median_optimality),
        ("segmentation identity", segmentation_identity),
        ("worked parse strings byte-exact", worked_parse_strings),
        ("self-classification", self_classification),
        ("synthetic corpus recovery", synthetic_recovery),
        ("determinism of build and sweep", determinism),
        ("rejection boundaries", rejection_boundaries),
        ("metric formulas on tally fixtures", tally_fixtures),
        ("throughput", throughput),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name} ({detail}; {secs:.2}s)"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why} ({secs:.2}s)");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let took = start.elapsed();
    ensure!(
        took < limit,
        "took {:.2}s, budget {:.0}s",
        took.as_secs_f64(),
        limit.as_secs_f64()
    );
    Ok(())
}

/// Every sequence of length 0..=6 over a 4-token alphabet, with all-pairs
/// distances found by breadth-first search over single-token edits. A
/// shortest edit path between two such strings never needs a longer string
/// or a foreign token, so the search space is closed.
fn exhaustive_oracle() -> Check {
    const MAX: usize = 6;
    let start = Instant::now();
    let alphabet = [
        Token::open("A"),
        Token::open("B"),
        Token::open("C"),
        Token::Close,
    ];
    let mut strings: Vec<Vec<u8>> = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..MAX {
        let next: Vec<Vec<u8>> = frontier
            .iter()
            .flat_map(|s: &Vec<u8>| {
                (0..4u8).map(move |c| {
                    let mut t = s.clone();
                    t.push(c);
                    t
                })
            })
            .collect();
        strings.extend(next.iter().cloned());
        frontier = next;
    }
    let index: HashMap<&[u8], u16> = strings
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_slice(), i as u16))
        .collect();
    let n = strings.len();
    let mut adjacency: Vec<Vec<u16>> = vec![Vec::new(); n];
    for (i, s) in strings.iter().enumerate() {
        let mut push = |t: Vec<u8>| adjacency[i].push(index[t.as_slice()]);
        for p in 0..s.len() {
            let mut t = s.clone();
            t.remove(p);
            push(t);
            for c in 0..4u8 {
                if c != s[p] {
                    let mut t = s.clone();
                    t[p] = c;
                    push(t);
                }
            }
        }
        if s.len() < MAX {
            for p in 0..=s.len() {
                for c in 0..4u8 {
                    let mut t = s.clone();
                    t.insert(p, c);
                    push(t);
                }
            }
        }
    }
    for list in &mut adjacency {
        list.sort_unstable();
        list.dedup();
    }
    let tokens: Vec<Vec<Token>> = strings
        .iter()
        .map(|s| s.iter().map(|&c| alphabet[c as usize]).collect())
        .collect();

    // The search itself is checked against the textbook recursion on the
    // shorter strings.
    let short = strings.iter().take_while(|s| s.len() <= 3).count();

    let mut dist = vec![u8::MAX; n];
    let mut queue = Vec::with_capacity(n);
    for a in 0..n {
        dist.fill(u8::MAX);
        dist[a] = 0;
        queue.clear();
        queue.push(a as u16);
        let mut head = 0;
        while head < queue.len() {
            let u = queue[head] as usize;
            head += 1;
            for &v in &adjacency[u] {
                if dist[v as usize] == u8::MAX {
                    dist[v as usize] = dist[u] + 1;
                    queue.push(v);
                }
            }
        }
        let pattern = Pattern::new(&tokens[a]);
        for b in 0..n {
            let expected = dist[b] as usize;
            let got = pattern.distance(&tokens[b]);
            ensure!(
                got == expected,
                "{:?} vs {:?}: kernel {got}, oracle {expected}",
                strings[a],
                strings[b]
            );
            let dp = wagner_fischer(&tokens[a], &tokens[b]);
            ensure!(
                dp == expected,
                "{:?} vs {:?}: dp {dp}, oracle {expected}",
                strings[a],
                strings[b]
            );
            if a < short && b < short {
                let rec = common::recursive_distance(&tokens[a], &tokens[b]);
                ensure!(
                    rec == expected,
                    "search disagrees with recursion on {:?} vs {:?}",
                    strings[a],
                    strings[b]
                );
            }
        }
    }
    within(Duration::from_secs(10), start)?;
    Ok(format!("{} pairs", n * n))
}

fn metric_axioms() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let triples = 10_000;
    for _ in 0..triples {
        let a = random_parse_string(&mut rng, 2, 40);
        let b = if rng.random_bool(0.1) {
            a.clone()
        } else {
            random_parse_string(&mut rng, 2, 40)
        };
        let c = random_parse_string(&mut rng, 2, 40);
        let ab = edit_distance(&a, &b);
        let ba = edit_distance(&b, &a);
        let bc = edit_distance(&b, &c);
        let ac = edit_distance(&a, &c);
        ensure!(ab == ba, "asymmetric: {a} / {b}");
        ensure!((ab == 0) == (a == b), "identity fails: {a} / {b}");
        ensure!(edit_distance(&a, &a) == 0, "self distance of {a}");
        ensure!(ac <= ab + bc, "triangle fails: {a} / {b} / {c}");
    }
    Ok(format!("{triples} triples"))
}

fn median_optimality() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let sets = 1_000;
    for _ in 0..sets {
        let size = rng.random_range(1..=20);
        let strings: Vec<ParseString> = (0..size)
            .map(|_| random_parse_string(&mut rng, 2, 30))
            .collect();
        let sums: Vec<usize> = strings
            .iter()
            .map(|s| {
                strings
                    .iter()
                    .map(|t| common::table_distance(s.tokens(), t.tokens()))
                    .sum()
            })
            .collect();
        let chosen = set_median_index(&strings).map_err(|e| e.to_string())?;
        let median = set_median(&strings).map_err(|e| e.to_string())?;
        ensure!(
            median == strings[chosen],
            "set_median disagrees with set_median_index"
        );
        ensure!(
            sums.iter().all(|&s| sums[chosen] <= s),
            "median sum {} is not minimal in {sums:?}",
            sums[chosen]
        );
    }
    Ok(format!("{sets} sets"))
}

fn segmentation_identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut cases = 0;
    for _ in 0..500 {
        let ps = random_parse_string(&mut rng, 2, 80);
        for k in 1..=12 {
            let parts = segment(&ps, k).map_err(|e| e.to_string())?;
            ensure!(
                parts.len() == k,
                "segment({ps}, {k}) gave {} parts",
                parts.len()
            );
            let joined: ParseString = parts
                .iter()
                .flat_map(|p| p.tokens().iter().copied())
                .collect();
            ensure!(
                joined == ps,
                "segments of {ps} with k = {k} do not concatenate back"
            );
            cases += 1;
        }
    }
    for _ in 0..200 {
        let size = rng.random_range(1..=12);
        let strings: Vec<ParseString> = (0..size)
            .map(|_| random_parse_string(&mut rng, 2, 40))
            .collect();
        let synth = synthesize_prototype(&strings, 1).map_err(|e| e.to_string())?;
        let median = set_median(&strings).map_err(|e| e.to_string())?;
        ensure!(
            synth == median,
            "k = 1 synthesis differs from the set median"
        );
    }
    Ok(format!("{cases} segmentations, 200 syntheses"))
}

fn worked_parse_strings() -> Check {
    let cases = [
        (
            "(NP (SBAR (S (S (NP (PRP$ Their) (NN relationship)) (VP (VBZ is) (RB not) (NP (NN something)))) \
             (S (NP (PRP you)) (VP (VB see) (NP (DT every) (NN day)))))))",
            "(NP+SBAR+S (S (NP (PRP$) (NN)) (VP (VBZ) (RB) (NP (NN)))) (S (NP (PRP)) (VP (VB) (NP (DT) (NN)))))",
        ),
        (
            "(SBAR (S (NP (PRP I)) (VP (VBP 'm) (VB angry) (SBAR (IN because) (S (PP (IN of) (NP (DT this))) \
             (, ,) (NP (PRP I)) (VP (VBD did) (ADJP (JJ NOTHING))))))))",
            "(SBAR+S (NP (PRP)) (VP (VBP) (VB) (SBAR (IN) (S (PP (IN) (NP (DT))) (,) (NP (PRP)) (VP (VBD) (ADJP (JJ)))))))",
        ),
    ];
    for (tree, expected) in cases {
        let raw = parse_bracketed(tree).map_err(|e| e.to_string())?;
        let ps =
            linearize(&collapse_unary_chains(strip_terminals(raw))).map_err(|e| e.to_string())?;
        let text = render(&ps).map_err(|e| e.to_string())?;
        ensure!(text == expected, "got {text:?}, expected {expected:?}");
    }
    Ok("2 sentences".into())
}

/// Fourteen distinct random prototypes.
fn distinct_prototypes(rng: &mut ChaCha8Rng, min: usize, max: usize) -> [ParseString; 14] {
    let mut out: Vec<ParseString> = Vec::new();
    while out.len() < 14 {
        let len = rng.random_range(min..=max);
        let ps = random_parse_string_of_len(rng, len);
        if !out.contains(&ps) {
            out.push(ps);
        }
    }
    out.try_into().unwrap()
}

fn self_classification() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let set = PrototypeSet::from_ordered(distinct_prototypes(&mut rng, 20, 80));
    let corpus: Vec<LabeledArgument> = set
        .iter()
        .map(|(t, p)| LabeledArgument::new(t.name(), p.clone(), Category::Tactic(t)))
        .collect();
    for arg in &corpus {
        let c = classify(&arg.parse, &set);
        ensure!(
            c.decision == arg.gold,
            "{} classified as {:?}",
            arg.id,
            c.decision
        );
        let Category::Tactic(t) = arg.gold else {
            unreachable!()
        };
        ensure!(
            c.distance(t) == 0.0,
            "{} at distance {}",
            arg.id,
            c.distance(t)
        );
    }
    let report = evaluate(&corpus, &set, None).map_err(|e| e.to_string())?;
    for (name, v) in [
        ("precision", report.macro_precision),
        ("recall", report.macro_recall),
        ("f1", report.macro_f1),
    ] {
        ensure!(v == Some(1.0), "macro {name} is {v:?}");
    }
    Ok("14 prototypes, macro P = R = F1 = 1".into())
}

fn perturbed_corpus(seed: u64) -> Vec<LabeledArgument> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bases = distinct_prototypes(&mut rng, 60, 120);
    let mut corpus = Vec::new();
    for (t, base) in TacticId::ALL.into_iter().zip(&bases) {
        for i in 0..20 {
            let max_subs = base.len() / 20;
            let subs = rng.random_range(0..=max_subs);
            let parse = substitute(&mut rng, base, subs);
            corpus.push(LabeledArgument::new(
                format!("{}-{i}", t.name()),
                parse,
                Category::Tactic(t),
            ));
        }
    }
    corpus
}

fn macro_f1(corpus: &[LabeledArgument], config: &BuildConfig) -> Result<f64, String> {
    let protos = build_prototypes(corpus, config).map_err(|e| e.to_string())?;
    let report = evaluate(corpus, &protos, None).map_err(|e| e.to_string())?;
    report.macro_f1.ok_or_else(|| "macro F1 undefined".into())
}

fn synthetic_recovery() -> Check {
    let start = Instant::now();
    let corpus = perturbed_corpus(15);
    let mut detail = Vec::new();
    for method in [Method::Median, Method::Synthetic] {
        let full = macro_f1(
            &corpus,
            &BuildConfig {
                method,
                set_fraction: 1.0,
                ..BuildConfig::default()
            },
        )?;
        ensure!(
            full >= 0.90,
            "{method} macro F1 at fraction 1.0 is {full:.4}"
        );
        let mut partial = Vec::new();
        for seed in 0..5 {
            let f1 = macro_f1(
                &corpus,
                &BuildConfig {
                    method,
                    set_fraction: 0.30,
                    seed,
                    ..BuildConfig::default()
                },
            )?;
            ensure!(
                (f1 - full).abs() <= 0.10,
                "{method} seed {seed}: F1 {f1:.4} at 30% vs {full:.4} at 100%"
            );
            partial.push(f1);
        }
        let mean = partial.iter().sum::<f64>() / partial.len() as f64;
        detail.push(format!(
            "{method}: F1 {full:.3} at 100%, mean {mean:.3} at 30%"
        ));
    }
    within(Duration::from_secs(60), start)?;
    Ok(detail.join(", "))
}

fn write_corpus(path: &Path, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lines = String::new();
    for (n, gold) in TacticId::ALL
        .into_iter()
        .map(|t| t.name())
        .chain(["non-argument"])
        .enumerate()
    {
        for i in 0..8 {
            let trees: Vec<String> = (0..rng.random_range(1..=2))
                .map(|_| random_worded_tree(&mut rng, 5).to_string())
                .collect();
            let record = cli::CorpusRecord {
                id: format!("a{n}-{i}"),
                text: None,
                trees,
                gold: Some(gold.to_string()),
                source: None,
            };
            lines.push_str(&serde_json::to_string(&record).unwrap());
            lines.push('\n');
        }
    }
    fs::write(path, lines).unwrap();
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus = dir.path().join("corpus.jsonl");
    write_corpus(&corpus, 16);
    let run_all = |tag: &str| -> Result<Vec<Vec<u8>>, String> {
        let protos = dir.path().join(format!("protos-{tag}.json"));
        cli::cmd_build(&BuildArgs {
            corpus: corpus.clone(),
            method: MethodArg::Synthetic,
            fraction: 0.5,
            segments: 3,
            seed: 7,
            out: Some(protos.clone()),
        })
        .map_err(|e| e.to_string())?;
        let mut outputs = vec![fs::read(&protos).unwrap()];
        for kind in [
            SweepKind::Params,
            SweepKind::Sensitivity,
            SweepKind::Threshold,
        ] {
            let out = dir.path().join(format!("sweep-{kind:?}-{tag}.csv"));
            cli::cmd_sweep(&SweepArgs {
                kind,
                corpus: corpus.clone(),
                prototypes: Some(protos.clone()),
                method: MethodArg::Synthetic,
                fraction: Some("0.25,0.5".into()),
                segments: Some("2,3".into()),
                sizes: Some("10,50,all".into()),
                trials: 3,
                thresholds: None,
                seed: 9,
                out: Some(out.clone()),
            })
            .map_err(|e| e.to_string())?;
            outputs.push(fs::read(&out).unwrap());
        }
        Ok(outputs)
    };
    let in_pool = |threads: usize, tag: &str| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_all(tag))
    };
    let reference = in_pool(1, "a")?;
    for (threads, tag) in [(1, "b"), (4, "c"), (4, "d")] {
        let again = in_pool(threads, tag)?;
        ensure!(again == reference, "outputs differ with {threads} threads");
    }
    Ok("build + 3 sweeps, 1 and 4 threads".into())
}

fn rejection_boundaries() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let set = PrototypeSet::from_ordered(distinct_prototypes(&mut rng, 10, 60));
    let classifier = Classifier::new(&set);
    let mut inputs: Vec<ParseString> = (0..500)
        .map(|_| random_parse_string(&mut rng, 2, 60))
        .collect();
    inputs.extend(set.iter().map(|(_, p)| p.clone()));
    inputs.push(ParseString::empty());
    for arg in &inputs {
        let plain = classifier.classify(arg);
        let at_zero = classify_with_rejection(arg, &set, 0.0).map_err(|e| e.to_string())?;
        ensure!(at_zero == plain, "threshold 0 changed the result for {arg}");
        ensure!(
            plain.decision != Category::NonArgument,
            "plain classification rejected {arg}"
        );
        let at_one = classifier
            .classify_with_rejection(arg, 1.0)
            .map_err(|e| e.to_string())?;
        let identical = set.iter().any(|(_, p)| p == arg);
        ensure!(
            (at_one.decision == Category::NonArgument) != identical,
            "threshold 1 on {arg}: {:?}, identical to a prototype: {identical}",
            at_one.decision
        );
        let s = plain.best_similarity;
        let at_s = classifier
            .classify_with_rejection(arg, s)
            .map_err(|e| e.to_string())?;
        ensure!(
            at_s.decision == plain.decision,
            "similarity equal to the threshold was rejected"
        );
        if s < 1.0 {
            let above = classifier
                .classify_with_rejection(arg, s.next_up())
                .map_err(|e| e.to_string())?;
            ensure!(
                above.decision == Category::NonArgument,
                "threshold just above similarity kept {arg}"
            );
        }
    }
    for bad in [-0.1, 1.1, f64::NAN] {
        ensure!(
            classify_with_rejection(&inputs[0], &set, bad).is_err(),
            "threshold {bad} accepted"
        );
    }
    Ok(format!("{} inputs", inputs.len()))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12
}

fn tally_fixtures() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let categories: Vec<Category> = TacticId::ALL
        .into_iter()
        .map(Category::Tactic)
        .chain([Category::NonArgument])
        .collect();
    for fixture in 0..50 {
        let n = rng.random_range(1..=400);
        // Skewed draws so that some classes are missing from gold or predictions.
        let active = rng.random_range(2..=categories.len());
        let pairs: Vec<(Category, Category)> = (0..n)
            .map(|_| {
                let g = categories[rng.random_range(0..active)];
                let p = if rng.random_bool(0.6) {
                    g
                } else {
                    categories[rng.random_range(0..categories.len())]
                };
                (g, p)
            })
            .collect();
        let tally = ConfusionTally::from_pairs(pairs.iter().copied());
        let report = MetricsReport::from_pairs(&pairs, &EvalOptions::default())
            .map_err(|e| e.to_string())?;
        let (mut ps, mut rs, mut fs_) = (Vec::new(), Vec::new(), Vec::new());
        for &c in &categories {
            let retrieved = pairs.iter().filter(|p| p.1 == c).count();
            let relevant = pairs.iter().filter(|p| p.0 == c).count();
            let hits = pairs.iter().filter(|p| p.0 == c && p.1 == c).count();
            let p = (retrieved > 0).then(|| hits as f64 / retrieved as f64);
            let r = (relevant > 0).then(|| hits as f64 / relevant as f64);
            let f = match (p, r) {
                (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
                (Some(_), Some(_)) => Some(0.0),
                _ => None,
            };
            let got = match c {
                Category::Tactic(t) => tactic_metrics(&tally, t),
                Category::NonArgument => tally.counts(c).metrics(),
            };
            let same = |x: Option<f64>, y: Option<f64>| match (x, y) {
                (Some(x), Some(y)) => close(x, y),
                (None, None) => true,
                _ => false,
            };
            ensure!(
                same(got.precision, p) && same(got.recall, r) && same(got.f1, f),
                "fixture {fixture}, {c:?}: got {got:?}, expected P {p:?} R {r:?} F1 {f:?}"
            );
            if let (Some(p), Some(r), Some(f)) = (p, r, got.f1) {
                ensure!(
                    p.min(r) - 1e-12 <= f && f <= p.max(r) + 1e-12,
                    "fixture {fixture}, {c:?}: F1 {f} outside [{p}, {r}]"
                );
            }
            let in_macro = matches!(c, Category::Tactic(_)) || retrieved > 0 || relevant > 0;
            if in_macro {
                ps.extend(p);
                rs.extend(r);
                fs_.extend(f);
            }
        }
        let avg = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
        for (name, got, want) in [
            ("precision", report.macro_precision, avg(&ps)),
            ("recall", report.macro_recall, avg(&rs)),
            ("f1", report.macro_f1, avg(&fs_)),
        ] {
            let ok = match (got, want) {
                (Some(a), Some(b)) => close(a, b),
                (None, None) => true,
                _ => false,
            };
            ensure!(
                ok,
                "fixture {fixture}: macro {name} {got:?}, expected {want:?}"
            );
        }
    }
    Ok("50 fixtures".into())
}

fn throughput() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let set = PrototypeSet::from_ordered(distinct_prototypes(&mut rng, 60, 120));
    let args: Vec<ParseString> = (0..10_000)
        .map(|_| {
            let len = rng.random_range(2..=120);
            random_parse_string_of_len(&mut rng, len)
        })
        .collect();
    ensure!(
        args.iter().all(|a| a.len() <= 120),
        "generated argument over 120 tokens"
    );
    let start = Instant::now();
    let classifier = Classifier::new(&set);
    let results = classifier
        .classify_batch(&args, None)
        .map_err(|e| e.to_string())?;
    let took = start.elapsed();
    ensure!(results.len() == args.len(), "lost results");
    within(Duration::from_secs(5), start)?;
    Ok(format!("10000 arguments in {:.3}s", took.as_secs_f64()))
}

//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any criterion fails.
//!
//! Each criterion also emits a JSON-lines transcript (no timings); the whole
//! battery is run twice and the transcripts are compared byte for byte.

mod support;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use support::*;
use thetacode::identities::{
    dwnu_system, eval_dwnu, projection_satisfiable, wnu_model, OperationTable,
};
use thetacode::reductions::{clique_brute, clique_instance, word_instance};
use thetacode::structures::Graph;
use thetacode::toolkit::{
    amalgam_shift, amalgamate, extend_separated, plant_code, random_rho, random_separated,
    GenParams, SeededRng,
};
use thetacode::*;

/// Codes seen in separated instances, for the length-bound criterion.
#[derive(Default)]
struct BoundTracker {
    instances: usize,
    codes: usize,
    violations: Vec<String>,
}

impl BoundTracker {
    fn record(&mut self, x: &ThetaStructure, code: &ValidCode) {
        self.codes += 1;
        if code.word.len() + 1 > x.len() {
            self.violations.push(format!(
                "|X| = {}, code {}",
                x.len(),
                code.render(&x.alphabet)
            ));
        }
    }

    /// Enumerates with one more than the solver's bound, so a code of length
    /// `|X|` would be seen if it existed.
    fn sweep(&mut self, x: &ThetaStructure) {
        if !is_separated(x).is_empty() {
            return;
        }
        self.instances += 1;
        for code in enumerate_codes(x, x.len(), None, None) {
            self.record(x, &code);
        }
    }

    fn witness(&mut self, x: &ThetaStructure, d: &Decision) {
        if let Some(Witness::Code(code)) = d.witness() {
            if is_separated(x).is_empty() {
                self.record(x, code);
            }
        }
    }
}

struct Outcome {
    pass: bool,
    summary: String,
    transcript: Vec<Value>,
}

fn ab() -> Alphabet {
    Alphabet::new("ab").unwrap()
}

fn decision_json(d: &Decision, sigma: &Alphabet) -> Value {
    json!({ "answer": if d.is_yes() { "YES" } else { "NO" }, "render": d.render(sigma) })
}

fn round_trips() -> Outcome {
    let sigma = ab();
    let mut rng = SeededRng::new(0xC0DE_0001);
    let mut mismatches = 0;
    let mut facts = 0;
    let mut transcript = Vec::new();
    for case in 0..1000 {
        let n = 1 + rng.below(6) as u32;
        let c = random_rho(&sigma, n, 4, rng.below(7) as usize, &mut rng);
        let x = canonical_code(&c).expect("canonical code");
        let ok = decode(&x, 4) == c;
        mismatches += usize::from(!ok);
        facts += c.facts.len();
        transcript.push(
            json!({ "case": case, "n": n, "facts": c.facts.len(), "code_size": x.n, "ok": ok }),
        );
    }
    Outcome {
        pass: mismatches == 0,
        summary: format!("1000 structures ({facts} facts), {mismatches} mismatches"),
        transcript,
    }
}

fn solver_vs_naive(bound: &mut BoundTracker) -> Outcome {
    let sigma = ab();
    let mut rng = SeededRng::new(0xC0DE_0002);
    let mut disagreements = 0;
    let mut yes = 0;
    let mut transcript = Vec::new();
    for case in 0..500 {
        let n = 1 + rng.below(8) as u32;
        let mut x = random_theta(&sigma, n, 0.3, 0.97, &mut rng);
        // Plant a short code in about half the cases, staying within 8 elements.
        let w = thetacode::toolkit::random_word(&sigma, 2, &mut rng);
        if rng.chance(0.5) && x.n + 4 <= 8 {
            if let Ok(y) = plant_code(&x, &w, &mut rng) {
                if y.n <= 8 {
                    x = y;
                }
            }
        }
        let words = random_word_set(&sigma, 1 + rng.below(8) as usize, 4, &mut rng);
        let oracle = LanguageOracle::finite(&sigma, words.clone()).unwrap();
        let d = solve(&x, &oracle);
        let naive = is_separated(&x).is_empty()
            && words.iter().all(|w| {
                let f = word_instance(w, &sigma).unwrap();
                hom_search(&f, &x, HomOptions::default()).unwrap().is_none()
            });
        let witness_ok = match d.witness() {
            None => true,
            Some(Witness::Code(c)) => c.verify(&x) && oracle.contains(&c.word),
            Some(Witness::Separation(v)) => v.verify(&x),
        };
        if d.is_yes() != naive || !witness_ok {
            disagreements += 1;
        }
        yes += usize::from(d.is_yes());
        bound.witness(&x, &d);
        bound.sweep(&x);
        transcript.push(json!({ "case": case, "n": x.n, "words": words.len(), "decision": decision_json(&d, &sigma) }));
    }
    Outcome {
        pass: disagreements == 0,
        summary: format!(
            "500 instances ({yes} YES, {} NO), {disagreements} disagreements",
            500 - yes
        ),
        transcript,
    }
}

fn word_instance_law(bound: &mut BoundTracker) -> Outcome {
    let sigma = ab();
    let mut rng = SeededRng::new(0xC0DE_0003);
    let words = words_between(&sigma, 2, 4);
    let mut disagreements = 0;
    let mut checks = 0;
    let mut transcript = Vec::new();
    for set_index in 0..5 {
        let set: BTreeSet<Word> = random_word_set(&sigma, 2 + rng.below(9) as usize, 4, &mut rng)
            .into_iter()
            .collect();
        let oracle = LanguageOracle::finite(&sigma, set.iter().cloned()).unwrap();
        for w in &words {
            let x = word_instance(w, &sigma).unwrap();
            let d = solve(&x, &oracle);
            checks += 1;
            if d.is_yes() == set.contains(w) {
                disagreements += 1;
            }
            bound.witness(&x, &d);
            bound.sweep(&x);
            transcript.push(json!({
                "set": set_index,
                "word": sigma.render(w),
                "member": set.contains(w),
                "decision": decision_json(&d, &sigma),
            }));
        }
    }
    Outcome {
        pass: disagreements == 0,
        summary: format!("{checks} word/set pairs, {disagreements} disagreements"),
        transcript,
    }
}

fn all_graphs(v: u32) -> impl Iterator<Item = Graph> {
    let pairs: Vec<(u32, u32)> = (0..v)
        .flat_map(|a| (a + 1..v).map(move |b| (a, b)))
        .collect();
    (0u32..1 << pairs.len()).map(move |mask| {
        let mut g = Graph::new(v);
        for (i, &(a, b)) in pairs.iter().enumerate() {
            if mask >> i & 1 == 1 {
                g.add_edge(a, b).unwrap();
            }
        }
        g
    })
}

fn clique_reduction(bound: &mut BoundTracker) -> Outcome {
    let sigma = Alphabet::new("a").unwrap();
    let all = LanguageOracle::all(&sigma);
    let mut disagreements = 0;
    let mut checks = 0;
    let mut positives = 0;
    let mut transcript = Vec::new();
    let mut check = |g: &Graph, n: usize, bound: &mut BoundTracker, transcript: &mut Vec<Value>| {
        let x = clique_instance(g, n, &sigma).unwrap();
        let d = solve(&x, &all);
        let has = clique_brute(g, n);
        checks += 1;
        positives += usize::from(has);
        if d.is_yes() == has {
            disagreements += 1;
        }
        bound.witness(&x, &d);
        transcript.push(json!({
            "vertices": g.n,
            "edges": g.edges().collect::<Vec<_>>(),
            "n": n,
            "clique": has,
            "decision": decision_json(&d, &sigma),
        }));
    };
    for v in 0..=5 {
        for g in all_graphs(v) {
            for n in 2..=4 {
                check(&g, n, bound, &mut transcript);
            }
        }
    }
    let mut rng = SeededRng::new(0xC0DE_0004);
    for _ in 0..200 {
        let p = 0.3 + 0.6 * rng.unit();
        let g = thetacode::toolkit::random_graph(6, p, &mut rng);
        for n in 2..=5 {
            check(&g, n, bound, &mut transcript);
        }
    }
    Outcome {
        pass: disagreements == 0,
        summary: format!(
            "{checks} graph/size pairs ({positives} with a clique), {disagreements} disagreements"
        ),
        transcript,
    }
}

fn edge_structure_law() -> Outcome {
    let sigma = ab();
    let words = words_between(&sigma, 2, 4);
    let codes: Vec<ThetaStructure> = words
        .iter()
        .map(|w| word_instance(w, &sigma).unwrap())
        .collect();
    let mut disagreements = 0;
    let mut transcript = Vec::new();
    for (u, cu) in words.iter().zip(&codes) {
        for (w, cw) in words.iter().zip(&codes) {
            let found = hom_search(cu, cw, HomOptions::default()).unwrap();
            if found.is_some() != (u == w) {
                disagreements += 1;
            }
            transcript.push(json!({
                "u": sigma.render(u),
                "w": sigma.render(w),
                "map": found.map(|h| h.map),
            }));
        }
    }
    Outcome {
        pass: disagreements == 0,
        summary: format!(
            "{} pairs, {disagreements} disagreements",
            words.len() * words.len()
        ),
        transcript,
    }
}

fn dwnu_triviality() -> Outcome {
    let mut failures = Vec::new();
    let mut transcript = Vec::new();
    for n in 3..=6 {
        for k in 2..n {
            let sat = projection_satisfiable(n, k).unwrap().is_some();
            if sat {
                failures.push(format!("projections satisfy ({n}, {k})"));
            }
            transcript.push(json!({ "n": n, "k": k, "projection_satisfiable": sat }));
        }
    }
    let min3 = OperationTable::min(3, 2).unwrap();
    for n in 4..=6 {
        let system = dwnu_system(n, 3).unwrap();
        let model = wnu_model(&min3, n).unwrap();
        let holds = eval_dwnu(&system, &model, None).unwrap().holds();
        if !holds {
            failures.push(format!("min fails ({n}, 3)"));
        }
        transcript.push(json!({ "n": n, "k": 3, "min_model_holds": holds, "identities": system.identity_count() }));
    }
    Outcome {
        pass: failures.is_empty(),
        summary: if failures.is_empty() {
            "no projection model for 2 <= k < n <= 6; min models hold for n = 4, 5, 6".into()
        } else {
            failures.join("; ")
        },
        transcript,
    }
}

fn amalgam_locality(bound: &mut BoundTracker) -> Outcome {
    let sigma = ab();
    let mut rng = SeededRng::new(0xC0DE_0007);
    let mut mismatches = 0;
    let mut total_codes = 0;
    let mut transcript = Vec::new();
    let plantable = ["ab", "ba", "aa", "bb"];
    for case in 0..300 {
        let shared_n = rng.below(5) as u32;
        let params = GenParams {
            iota_density: 0.4,
            tau_density: 0.4,
            h_density: 0.3,
            s_density: 0.3,
            ..GenParams::new(shared_n, sigma.clone(), rng.next_u64())
        };
        let shared = random_separated(&params).unwrap();
        let mut side = || {
            let mut s = extend_separated(
                &shared,
                rng.below(u64::from(11 - shared_n)) as u32,
                &params,
                &mut rng,
            )
            .unwrap();
            // Room permitting, add a code through the new elements.
            if s.n + 4 <= 10 && rng.chance(0.6) {
                let w = sigma.relation_word(rng.pick(&plantable).unwrap()).unwrap();
                s = plant_code(&s, &w, &mut rng).unwrap();
            }
            s
        };
        let b = side();
        let c = side();
        let d = amalgamate(&b, &c, shared_n).unwrap();
        let shift = amalgam_shift(b.n, shared_n);
        let mut expected: BTreeSet<ValidCode> = enumerate_codes(&b, b.len(), None, None)
            .into_iter()
            .collect();
        expected.extend(
            enumerate_codes(&c, c.len(), None, None)
                .into_iter()
                .map(|code| ValidCode {
                    word: code.word,
                    a: code.a.iter().map(|&v| shift(v)).collect(),
                    c: code.c.iter().map(|&v| shift(v)).collect(),
                }),
        );
        let got: BTreeSet<ValidCode> = enumerate_codes(&d, d.len(), None, None)
            .into_iter()
            .collect();
        bound.instances += 1;
        for code in &got {
            bound.record(&d, code);
        }
        total_codes += got.len();
        if got != expected {
            mismatches += 1;
        }
        transcript.push(json!({
            "case": case,
            "sizes": [b.n, c.n, shared_n, d.n],
            "codes": got.iter().map(|c| c.render(&sigma)).collect::<Vec<_>>(),
        }));
    }
    Outcome {
        pass: mismatches == 0 && total_codes > 0,
        summary: format!("300 amalgams ({total_codes} codes), {mismatches} mismatches"),
        transcript,
    }
}

fn separated_bound(bound: &BoundTracker) -> Outcome {
    Outcome {
        pass: bound.violations.is_empty() && bound.codes > 0,
        summary: format!(
            "{} codes over {} separated instances, {} exceed |X| - 1{}",
            bound.codes,
            bound.instances,
            bound.violations.len(),
            bound
                .violations
                .first()
                .map(|v| format!(" (first: {v})"))
                .unwrap_or_default()
        ),
        transcript: vec![
            json!({ "codes": bound.codes, "instances": bound.instances, "violations": bound.violations }),
        ],
    }
}

/// Words over {a,b} containing `abbab` (KMP automaton; state = matched prefix length).
const CONTAINS_ABBAB: &str = "dfa\nalphabet ab\nstates 6\nstart 0\naccept 5\n\
    trans 0 a 1\ntrans 0 b 0\ntrans 1 a 1\ntrans 1 b 2\ntrans 2 a 1\ntrans 2 b 3\n\
    trans 3 a 4\ntrans 3 b 0\ntrans 4 a 1\ntrans 4 b 5\ntrans 5 a 5\ntrans 5 b 5\n";

fn performance_smoke(bound: &mut BoundTracker) -> Outcome {
    let sigma = ab();
    let mut rng = SeededRng::new(0xC0DE_0009);
    let base = random_separated(&GenParams::new(50, sigma.clone(), 0xC0DE_0009)).unwrap();
    let w = sigma.relation_word("abbabaabab").unwrap();
    let x = plant_code(&base, &w, &mut rng).unwrap();
    let dfa = Dfa::parse(CONTAINS_ABBAB).unwrap();
    let oracle = LanguageOracle::dfa(&sigma, &dfa).unwrap();
    let start = Instant::now();
    let d = solve(&x, &oracle);
    let elapsed = start.elapsed();
    bound.witness(&x, &d);
    let planted = matches!(d.witness(), Some(Witness::Code(c)) if c.verify(&x) && c.word == w);
    let base_yes = solve(&base, &oracle).is_yes();
    Outcome {
        pass: x.n == 60 && base_yes && planted && elapsed < Duration::from_secs(5),
        summary: format!(
            "|X| = {}, {} states, base {}, planted {} ({:.3}s solve)",
            x.n,
            dfa.states,
            if base_yes { "YES" } else { "NO" },
            d.render(&sigma),
            elapsed.as_secs_f64()
        ),
        transcript: vec![
            json!({ "n": x.n, "base_yes": base_yes, "decision": decision_json(&d, &sigma) }),
        ],
    }
}

struct Row {
    id: u32,
    name: &'static str,
    budget: Option<Duration>,
    elapsed: Duration,
    outcome: Outcome,
}

fn battery() -> Vec<Row> {
    let mut bound = BoundTracker::default();
    let mut rows = Vec::new();
    let mut timed =
        |id, name, budget: Option<u64>, f: &mut dyn FnMut(&mut BoundTracker) -> Outcome| {
            let start = Instant::now();
            let outcome = f(&mut bound);
            let elapsed = start.elapsed();
            rows.push(Row {
                id,
                name,
                budget: budget.map(Duration::from_secs),
                elapsed,
                outcome,
            });
        };
    timed(1, "round-trip", Some(10), &mut |_| round_trips());
    timed(2, "solver-oracle", Some(60), &mut solver_vs_naive);
    timed(3, "word-instance", None, &mut word_instance_law);
    timed(4, "clique-reduction", Some(120), &mut clique_reduction);
    timed(5, "edge-structure-hom", None, &mut |_| edge_structure_law());
    timed(6, "dwnu-triviality", Some(5), &mut |_| dwnu_triviality());
    timed(7, "amalgam-locality", None, &mut amalgam_locality);
    // The solve call itself is timed inside against its 5 s budget.
    timed(9, "performance", None, &mut performance_smoke);
    let outcome = separated_bound(&bound);
    rows.insert(
        7,
        Row {
            id: 8,
            name: "separated-bound",
            budget: None,
            elapsed: Duration::ZERO,
            outcome,
        },
    );
    rows
}

fn transcript_text(rows: &[Row]) -> String {
    let mut out = String::new();
    for row in rows {
        for record in &row.outcome.transcript {
            out.push_str(
                &serde_json::to_string(&json!({ "criterion": row.id, "record": record })).unwrap(),
            );
            out.push('\n');
        }
    }
    out
}

fn main() -> ExitCode {
    let first = battery();
    let second = battery();
    let mut all_pass = true;
    for row in &first {
        let in_budget = row.budget.is_none_or(|b| row.elapsed < b);
        let pass = row.outcome.pass && in_budget;
        all_pass &= pass;
        let budget = row
            .budget
            .map(|b| format!(" < {}s", b.as_secs()))
            .unwrap_or_default();
        println!(
            "criterion {:>2} {:<18} {}  {} [{:.2}s{budget}]",
            row.id,
            row.name,
            if pass { "PASS" } else { "FAIL" },
            row.outcome.summary,
            row.elapsed.as_secs_f64()
        );
    }
    let (a, b) = (transcript_text(&first), transcript_text(&second));
    let same = a == b;
    all_pass &= same;
    println!(
        "criterion 10 {:<18} {}  two runs, {} transcript lines, {} bytes, {}",
        "determinism",
        if same { "PASS" } else { "FAIL" },
        a.lines().count(),
        a.len(),
        if same { "identical" } else { "differ" }
    );
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

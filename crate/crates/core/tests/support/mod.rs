//! Independent brute-force oracles and generators shared by the
//! integration suites. Nothing here calls the search code it checks.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use thetacode::structures::Relational;
use thetacode::toolkit::SeededRng;
use thetacode::{Alphabet, ThetaStructure, ValidCode, Word};

/// All tuples over `0..n` of length `len`, lexicographic.
pub fn tuples(n: u32, len: usize) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |v| {
                    let mut t = t.clone();
                    t.push(v);
                    t
                })
            })
            .collect();
    }
    out
}

/// Clause-by-clause validity of a candidate code, straight from the
/// definition.
pub fn is_valid_code(x: &ThetaStructure, word: &[u8], a: &[u32], c: &[u32]) -> bool {
    let m = word.len();
    if m < 2 || a.len() != m || c.len() != m {
        return false;
    }
    for i in 0..m {
        if !x.p.contains(&a[i]) {
            return false;
        }
        let j = (i + 1) % m;
        if !x.h.contains(&(word[i], c[i], c[j])) {
            return false;
        }
    }
    if !x.iota.contains(&c[0]) || !x.tau.contains(&c[m - 1]) {
        return false;
    }
    for i in 0..m {
        for j in 0..m {
            if i != j && !x.s.contains(&[a[i], a[j], c[i], c[j]]) {
                return false;
            }
        }
    }
    true
}

/// Every valid code with `2 <= |word| <= max_len`: each `c` tuple is
/// checked against every word, then every `a` tuple.
pub fn naive_codes(x: &ThetaStructure, max_len: usize) -> BTreeSet<ValidCode> {
    let mut out = BTreeSet::new();
    for len in 2..=max_len {
        let words = x.alphabet.words_of_len(len);
        let a_tuples = tuples(x.n, len);
        for c in tuples(x.n, len) {
            if !x.iota.contains(&c[0]) || !x.tau.contains(&c[len - 1]) {
                continue;
            }
            for w in &words {
                let letters = w.letters();
                if !(0..len).all(|i| x.h.contains(&(letters[i], c[i], c[(i + 1) % len]))) {
                    continue;
                }
                for a in &a_tuples {
                    if is_valid_code(x, letters, a, &c) {
                        out.insert(ValidCode {
                            word: w.clone(),
                            a: a.clone(),
                            c: c.clone(),
                        });
                    }
                }
            }
        }
    }
    out
}

/// Whether `map` preserves every relation, checked tuple by tuple.
pub fn preserves<S: Relational>(source: &S, target: &S, map: &[u32]) -> bool {
    let target_rels = target.relations();
    source.relations().iter().all(|r| {
        let tr: HashSet<&Vec<u32>> = target_rels
            .iter()
            .find(|t| t.name == r.name)
            .map(|t| t.tuples.iter().collect())
            .unwrap_or_default();
        r.tuples.iter().all(|t| {
            let img: Vec<u32> = t.iter().map(|&v| map[v as usize]).collect();
            tr.contains(&img)
        })
    })
}

/// Exhaustive `|B|^|A|` homomorphism existence.
pub fn exhaustive_hom<S: Relational>(source: &S, target: &S) -> bool {
    tuples(target.domain_size(), source.domain_size() as usize)
        .iter()
        .any(|m| preserves(source, target, m))
}

/// Arbitrary θ-structure; `sep_bias` in `[0,1]` is the probability that
/// each sampled tuple is forced to respect separatedness.
pub fn random_theta(
    alphabet: &Alphabet,
    n: u32,
    density: f64,
    sep_bias: f64,
    rng: &mut SeededRng,
) -> ThetaStructure {
    let mut x = ThetaStructure::empty(alphabet.clone(), n);
    for v in 0..n {
        if rng.chance(0.4) {
            x.p.insert(v);
        }
    }
    let outside = |x: &ThetaStructure, v: u32| !x.p.contains(&v);
    for v in 0..n {
        let ok = !rng.chance(sep_bias) || outside(&x, v);
        if ok && rng.chance(density * 2.0) {
            x.iota.insert(v);
        }
        let ok = !rng.chance(sep_bias) || outside(&x, v);
        if ok && rng.chance(density * 2.0) {
            x.tau.insert(v);
        }
    }
    for l in 0..alphabet.len() as u8 {
        for c in 0..n {
            for d in 0..n {
                let ok = !rng.chance(sep_bias) || (outside(&x, c) && outside(&x, d));
                if ok && rng.chance(density) {
                    x.h.insert((l, c, d));
                }
            }
        }
    }
    for q in tuples(n, 4) {
        let ok = !rng.chance(sep_bias) || (outside(&x, q[2]) && outside(&x, q[3]) && q[2] != q[3]);
        if ok && rng.chance(density * density) {
            x.s.insert([q[0], q[1], q[2], q[3]]);
            if rng.chance(0.7) {
                x.s.insert([q[1], q[0], q[3], q[2]]);
            }
        }
    }
    x
}

/// All words over `alphabet` with length in `lo..=hi`, lexicographic within
/// each length, shorter first.
pub fn words_between(alphabet: &Alphabet, lo: usize, hi: usize) -> Vec<Word> {
    (lo..=hi)
        .flat_map(|len| alphabet.words_of_len(len))
        .collect()
}

/// `count` distinct random words of length `2..=max_len`.
pub fn random_word_set(
    alphabet: &Alphabet,
    count: usize,
    max_len: usize,
    rng: &mut SeededRng,
) -> Vec<Word> {
    let pool = words_between(alphabet, 2, max_len);
    let mut pool = pool;
    rng.shuffle(&mut pool);
    pool.truncate(count);
    pool.sort();
    pool
}

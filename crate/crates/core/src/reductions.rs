//! Instance constructions: words to instances, cliques to instances, and
//! deciding with finitely many extra forbidden words.

use crate::decode::first_code;
use crate::encode::{canonical_code, edge_structure};
use crate::error::{Error, Result};
use crate::language::LanguageOracle;
use crate::solver::{solve, Decision, Witness};
use crate::structures::{Alphabet, Graph, ThetaStructure, Word};

/// The canonical code of the edge structure of `w`; it has `2|w|` elements.
/// It maps to the encoding of the trivial structure over `W` iff `w ∉ W`.
pub fn word_instance(w: &Word, alphabet: &Alphabet) -> Result<ThetaStructure> {
    canonical_code(&edge_structure(w, alphabet)?)
}

/// Builds the instance that is rejected (over the full language) exactly
/// when `g` has a clique of size `n`.
///
/// Elements: the vertices of `g` (forming `P`) followed by a cycle
/// `c_1..c_n` with `H_s(c_i, c_{i+1 mod n})` for every letter `s`,
/// `iota(c_1)`, `tau(c_n)`, and `S(u, v, c_i, c_j)` for every edge in both
/// orientations and every `i != j`.
pub fn clique_instance(g: &Graph, n: usize, alphabet: &Alphabet) -> Result<ThetaStructure> {
    if n < 2 {
        return Err(Error::BadParameters(format!("clique size {n} < 2")));
    }
    let v = g.n;
    let mut x = ThetaStructure::empty(alphabet.clone(), v + n as u32);
    let c = |i: usize| v + i as u32;
    x.p = (0..v).collect();
    x.iota.insert(c(0));
    x.tau.insert(c(n - 1));
    for l in 0..alphabet.len() as u8 {
        for i in 0..n {
            x.h.insert((l, c(i), c((i + 1) % n)));
        }
    }
    for (a, b) in g.edges() {
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    x.s.insert([a, b, c(i), c(j)]);
                    x.s.insert([b, a, c(i), c(j)]);
                }
            }
        }
    }
    Ok(x)
}

/// Whether `g` has `n` pairwise adjacent vertices, by exhaustive search
/// over vertex subsets in increasing order.
pub fn clique_brute(g: &Graph, n: usize) -> bool {
    fn extend(g: &Graph, chosen: &mut Vec<u32>, next: u32, n: usize) -> bool {
        if chosen.len() == n {
            return true;
        }
        for v in next..g.n {
            if chosen.iter().all(|&u| g.has_edge(u, v)) {
                chosen.push(v);
                if extend(g, chosen, v + 1, n) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    extend(g, &mut Vec::new(), 0, n)
}

/// Decides `x` against the language `base ∪ extra` for a finite `extra`:
/// first `base` alone, then one bounded search per extra word.
pub fn solve_with_exceptions(
    x: &ThetaStructure,
    base: &LanguageOracle,
    extra: &[Word],
) -> Result<Decision> {
    let decision = solve(x, base);
    if !decision.is_yes() {
        return Ok(decision);
    }
    for w in extra {
        let single = LanguageOracle::finite(&x.alphabet, [w.clone()])?;
        if let Some(code) = first_code(x, w.len(), Some(&single), 1, true) {
            return Ok(Decision::No(Witness::Code(code)));
        }
    }
    Ok(Decision::Yes)
}

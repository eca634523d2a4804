//! Strong amalgamation of separated structures and seeded instance
//! generators.
//!
//! Randomness comes from [`SeededRng`]: xoshiro256++ seeded through
//! SplitMix64 (the `rand_xoshiro` reference implementations). Derived draws
//! are defined here rather than through `rand` distributions so that a
//! given seed yields the same structures in any implementation:
//!
//! * `unit()`   = `(next_u64() >> 11) * 2^-53`
//! * `below(n)` = high 64 bits of `next_u64() * n` (128-bit product)
//! * `chance(p)` = `unit() < p`

use std::collections::BTreeSet;

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::decode::is_separated;
use crate::error::{Error, Result};
use crate::structures::{
    induced_substructure, serialize_theta, Alphabet, Graph, RhoStructure, ThetaStructure, Word,
};

/// Portable seeded generator; see the module docs for the exact draws.
#[derive(Debug, Clone)]
pub struct SeededRng(Xoshiro256PlusPlus);

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `0..n`; `n` must be positive.
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    /// Fisher-Yates from the back.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> Option<&'a T> {
        if items.is_empty() {
            None
        } else {
            Some(&items[self.below(items.len() as u64) as usize])
        }
    }
}

/// Parameters for [`random_separated`].
#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub n: u32,
    pub alphabet: Alphabet,
    /// Fraction of elements placed in `P`.
    pub p_frac: f64,
    pub iota_density: f64,
    pub tau_density: f64,
    /// Probability of each `H_s` edge between distinct non-`P` elements.
    pub h_density: f64,
    /// Probability of each mirrored pair `S(a,b,c,d), S(b,a,d,c)` with
    /// `a, b` in `P` and `c < d` outside `P`.
    pub s_density: f64,
    pub seed: u64,
}

impl GenParams {
    pub fn new(n: u32, alphabet: Alphabet, seed: u64) -> Self {
        GenParams {
            n,
            alphabet,
            p_frac: 0.5,
            iota_density: 0.2,
            tau_density: 0.2,
            h_density: 0.1,
            s_density: 0.05,
            seed,
        }
    }

    pub fn check(&self) -> Result<()> {
        for (name, v) in [
            ("p_frac", self.p_frac),
            ("iota_density", self.iota_density),
            ("tau_density", self.tau_density),
            ("h_density", self.h_density),
            ("s_density", self.s_density),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::BadParameters(format!(
                    "{name} = {v} is outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// A random separated structure, deterministic in `params`.
pub fn random_separated(params: &GenParams) -> Result<ThetaStructure> {
    params.check()?;
    let mut rng = SeededRng::new(params.seed);
    let base = ThetaStructure::empty(params.alphabet.clone(), 0);
    extend_separated(&base, params.n, params, &mut rng)
}

/// Appends `extra` elements to a separated `base` and samples relations
/// (with the densities of `params`, ignoring its `n` and `seed`) only on
/// tuples that involve a new element. The old elements keep inducing
/// exactly `base`, and the result stays separated.
pub fn extend_separated(
    base: &ThetaStructure,
    extra: u32,
    params: &GenParams,
    rng: &mut SeededRng,
) -> Result<ThetaStructure> {
    params.check()?;
    if params.alphabet != base.alphabet {
        return Err(Error::SignatureMismatch(
            "generator alphabet differs from base".into(),
        ));
    }
    let mut x = base.clone();
    let old = base.n;
    x.n += extra;
    let mut fresh: Vec<u32> = (old..x.n).collect();
    rng.shuffle(&mut fresh);
    let p_count = (params.p_frac * extra as f64).round() as usize;
    x.p.extend(fresh[..p_count.min(fresh.len())].iter().copied());

    let is_new = |id: u32| id >= old;
    let p_list: Vec<u32> = x.p.iter().copied().collect();
    let q_list: Vec<u32> = (0..x.n).filter(|id| !x.p.contains(id)).collect();

    for &q in q_list.iter().filter(|&&q| is_new(q)) {
        if rng.chance(params.iota_density) {
            x.iota.insert(q);
        }
        if rng.chance(params.tau_density) {
            x.tau.insert(q);
        }
    }
    for l in 0..x.alphabet.len() as u8 {
        for &c in &q_list {
            for &d in &q_list {
                if c != d && (is_new(c) || is_new(d)) && rng.chance(params.h_density) {
                    x.h.insert((l, c, d));
                }
            }
        }
    }
    for &a in &p_list {
        for &b in &p_list {
            for (ci, &c) in q_list.iter().enumerate() {
                for &d in &q_list[ci + 1..] {
                    if (is_new(a) || is_new(b) || is_new(c) || is_new(d))
                        && rng.chance(params.s_density)
                    {
                        x.s.insert([a, b, c, d]);
                        x.s.insert([b, a, d, c]);
                    }
                }
            }
        }
    }
    Ok(x)
}

/// Adds a fresh valid `w`-code to a separated `x`.
///
/// The code cycle is `|w|` new non-`P` elements. The `a` tuple reuses
/// distinct random `P` elements of `x` when there are enough, and appends
/// fresh `P` elements for the shortfall (fresh ones get the lower ids).
pub fn plant_code(x: &ThetaStructure, w: &Word, rng: &mut SeededRng) -> Result<ThetaStructure> {
    let m = w.len();
    if m < 2 {
        return Err(Error::WordTooShort {
            word: x.alphabet.render(w),
            len: m,
        });
    }
    if w.letters().iter().any(|&l| l as usize >= x.alphabet.len()) {
        return Err(Error::SignatureMismatch(
            "word letter outside the alphabet".into(),
        ));
    }
    if let Some(v) = is_separated(x).first() {
        return Err(Error::NotSeparated(v.render(&x.alphabet)));
    }
    let mut out = x.clone();
    let mut reused: Vec<u32> = x.p.iter().copied().collect();
    rng.shuffle(&mut reused);
    reused.truncate(m);
    let mut a = reused;
    while a.len() < m {
        let id = out.add_element();
        out.p.insert(id);
        a.push(id);
    }
    rng.shuffle(&mut a);
    let c: Vec<u32> = (0..m).map(|_| out.add_element()).collect();
    out.iota.insert(c[0]);
    out.tau.insert(c[m - 1]);
    for (i, &l) in w.letters().iter().enumerate() {
        out.h.insert((l, c[i], c[(i + 1) % m]));
    }
    for i in 0..m {
        for j in 0..m {
            if i != j {
                out.s.insert([a[i], a[j], c[i], c[j]]);
            }
        }
    }
    Ok(out)
}

/// Strong amalgam of `b` and `c` over their common prefix `0..shared`.
///
/// The result has `b`'s elements with their ids, then `c`'s non-shared
/// elements shifted by `|b| - shared`; every relation is the union of the
/// two images.
pub fn amalgamate(b: &ThetaStructure, c: &ThetaStructure, shared: u32) -> Result<ThetaStructure> {
    if b.alphabet != c.alphabet {
        return Err(Error::SignatureMismatch(
            "amalgam inputs use different alphabets".into(),
        ));
    }
    if shared > b.n || shared > c.n {
        return Err(Error::SharedPartMismatch(format!(
            "shared size {shared} exceeds an input size ({}, {})",
            b.n, c.n
        )));
    }
    let prefix: BTreeSet<u32> = (0..shared).collect();
    let left = serialize_theta(&induced_substructure(b, &prefix)?);
    let right = serialize_theta(&induced_substructure(c, &prefix)?);
    if left != right {
        return Err(Error::SharedPartMismatch(format!(
            "the first {shared} elements induce different substructures"
        )));
    }
    for (name, x) in [("first", b), ("second", c)] {
        if let Some(v) = is_separated(x).first() {
            return Err(Error::NotSeparated(format!(
                "{name} input: {}",
                v.render(&x.alphabet)
            )));
        }
    }
    let mut d = b.clone();
    d.n = b.n + c.n - shared;
    let shift = |id: u32| if id < shared { id } else { id + b.n - shared };
    d.p.extend(c.p.iter().map(|&id| shift(id)));
    d.iota.extend(c.iota.iter().map(|&id| shift(id)));
    d.tau.extend(c.tau.iter().map(|&id| shift(id)));
    d.h.extend(c.h.iter().map(|&(l, x, y)| (l, shift(x), shift(y))));
    d.s.extend(c.s.iter().map(|q| q.map(shift)));
    Ok(d)
}

/// The embedding of `c` into `amalgamate(b, c, shared)`.
pub fn amalgam_shift(b_len: u32, shared: u32) -> impl Fn(u32) -> u32 {
    move |id| if id < shared { id } else { id + b_len - shared }
}

/// A random structure over a word signature: each candidate fact
/// (word of length `2..=max_word_len`, tuple over `0..n`) is drawn
/// `facts` times with replacement.
pub fn random_rho(
    alphabet: &Alphabet,
    n: u32,
    max_word_len: usize,
    facts: usize,
    rng: &mut SeededRng,
) -> RhoStructure {
    let mut c = RhoStructure::empty(alphabet.clone(), n);
    if n == 0 || max_word_len < 2 {
        return c;
    }
    for _ in 0..facts {
        let len = 2 + rng.below(max_word_len as u64 - 1) as usize;
        let word = Word::from_indices(
            (0..len)
                .map(|_| rng.below(alphabet.len() as u64) as u8)
                .collect(),
        );
        let tuple = (0..len).map(|_| rng.below(n as u64) as u32).collect();
        c.facts.insert((word, tuple));
    }
    c
}

/// `G(n, p)`: every pair independently with probability `p`.
pub fn random_graph(n: u32, p: f64, rng: &mut SeededRng) -> Graph {
    let mut g = Graph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.chance(p) {
                g.add_edge(u, v).expect("valid pair");
            }
        }
    }
    g
}

/// A uniformly random word of length `len`.
pub fn random_word(alphabet: &Alphabet, len: usize, rng: &mut SeededRng) -> Word {
    Word::from_indices(
        (0..len)
            .map(|_| rng.below(alphabet.len() as u64) as u8)
            .collect(),
    )
}

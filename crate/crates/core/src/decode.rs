//! Separatedness, valid-code search and the decoding map.
//!
//! A valid `w`-code in a θ-structure is a tuple `(a_1..a_m, c_1..c_m)` with
//! every `a_i` in `P`, an `H`-cycle `c_1 -w_1-> c_2 -> ... -w_m-> c_1`,
//! `iota(c_1)`, `tau(c_m)`, and `S(a_i, a_j, c_i, c_j)` for all `i != j`.
//!
//! The search walks labeled `H`-paths from `iota` elements, keeping for each
//! position the set of `P` elements still compatible with every earlier
//! position through `S`. Closing the cycle at a `tau` element leaves a
//! binary constraint problem on the `a` side, solved by forward checking.
//! Codes come out ordered by the labeled `c` sequence, then by the `a` tuple.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::ops::ControlFlow;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;

use crate::language::LanguageOracle;
use crate::structures::{Alphabet, RhoStructure, ThetaStructure, Word};

/// Witness tuple for a `word`-fact: `a` in `P`, `c` the code cycle.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ValidCode {
    pub word: Word,
    pub a: Vec<u32>,
    pub c: Vec<u32>,
}

impl ValidCode {
    /// Checks every clause of the definition directly against `x`.
    pub fn verify(&self, x: &ThetaStructure) -> bool {
        let m = self.word.len();
        if m < 2 || self.a.len() != m || self.c.len() != m {
            return false;
        }
        let letters = self.word.letters();
        self.a.iter().all(|a| x.p.contains(a))
            && (0..m).all(|i| x.h.contains(&(letters[i], self.c[i], self.c[(i + 1) % m])))
            && x.iota.contains(&self.c[0])
            && x.tau.contains(&self.c[m - 1])
            && (0..m).all(|i| {
                (0..m)
                    .all(|j| i == j || x.s.contains(&[self.a[i], self.a[j], self.c[i], self.c[j]]))
            })
    }

    /// `"<word> a=<ids> c=<ids>"` with comma-separated ids.
    pub fn render(&self, alphabet: &Alphabet) -> String {
        format!(
            "{} a={} c={}",
            alphabet.render(&self.word),
            join_ids(&self.a),
            join_ids(&self.c)
        )
    }
}

pub(crate) fn join_ids(ids: &[u32]) -> String {
    ids.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationKind {
    HTouchesP,
    IotaInP,
    TauInP,
    SCodeInP,
    SCodeEqual,
}

impl ViolationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationKind::HTouchesP => "H-touches-P",
            ViolationKind::IotaInP => "iota-in-P",
            ViolationKind::TauInP => "tau-in-P",
            ViolationKind::SCodeInP => "S-c-in-P",
            ViolationKind::SCodeEqual => "S-c-equal",
        }
    }
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One failed separatedness clause. `letter` is set for `H` witnesses.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SeparationViolation {
    pub kind: ViolationKind,
    pub letter: Option<u8>,
    pub witness: Vec<u32>,
}

impl SeparationViolation {
    /// Re-checks that the witness really violates its clause in `x`.
    pub fn verify(&self, x: &ThetaStructure) -> bool {
        let w = &self.witness;
        match self.kind {
            ViolationKind::HTouchesP => {
                w.len() == 2
                    && self.letter.is_some_and(|l| x.h.contains(&(l, w[0], w[1])))
                    && (x.p.contains(&w[0]) || x.p.contains(&w[1]))
            }
            ViolationKind::IotaInP => w.len() == 1 && x.iota.contains(&w[0]) && x.p.contains(&w[0]),
            ViolationKind::TauInP => w.len() == 1 && x.tau.contains(&w[0]) && x.p.contains(&w[0]),
            ViolationKind::SCodeInP => {
                w.len() == 4
                    && x.s.contains(&[w[0], w[1], w[2], w[3]])
                    && (x.p.contains(&w[2]) || x.p.contains(&w[3]))
            }
            ViolationKind::SCodeEqual => {
                w.len() == 4 && x.s.contains(&[w[0], w[1], w[2], w[3]]) && w[2] == w[3]
            }
        }
    }

    pub fn render(&self, alphabet: &Alphabet) -> String {
        match self.letter {
            Some(l) => format!(
                "{} {} {}",
                self.kind,
                alphabet.letter(l),
                join_ids(&self.witness)
            ),
            None => format!("{} {}", self.kind, join_ids(&self.witness)),
        }
    }
}

/// Lists every separatedness violation of `x`; empty means separated.
pub fn is_separated(x: &ThetaStructure) -> Vec<SeparationViolation> {
    let mut out = Vec::new();
    let violation = |kind, letter, witness: Vec<u32>| SeparationViolation {
        kind,
        letter,
        witness,
    };
    for &(l, c, d) in &x.h {
        if x.p.contains(&c) || x.p.contains(&d) {
            out.push(violation(ViolationKind::HTouchesP, Some(l), vec![c, d]));
        }
    }
    for &i in x.iota.intersection(&x.p) {
        out.push(violation(ViolationKind::IotaInP, None, vec![i]));
    }
    for &t in x.tau.intersection(&x.p) {
        out.push(violation(ViolationKind::TauInP, None, vec![t]));
    }
    for q in &x.s {
        if x.p.contains(&q[2]) || x.p.contains(&q[3]) {
            out.push(violation(ViolationKind::SCodeInP, None, q.to_vec()));
        }
        if q[2] == q[3] {
            out.push(violation(ViolationKind::SCodeEqual, None, q.to_vec()));
        }
    }
    out
}

/// Allowed `(a_i, a_j)` pairs, as indices into the `P` list, for two code
/// positions carrying `(c_i, c_j)`: both `S(a_i, a_j, c_i, c_j)` and
/// `S(a_j, a_i, c_j, c_i)` must hold.
#[derive(Debug)]
struct PairRelation {
    rows: Vec<FixedBitSet>,
}

/// Precomputed adjacency for code search over one structure.
#[derive(Debug)]
pub(crate) struct CodeIndex {
    letters: usize,
    p_list: Vec<u32>,
    iota: Vec<u32>,
    is_tau: FixedBitSet,
    /// `h_out[c * letters + l]`: sorted `H_l`-successors of `c`.
    h_out: Vec<Vec<u32>>,
    h_set: HashSet<(u8, u32, u32)>,
    pairs: HashMap<(u32, u32), PairRelation>,
}

impl CodeIndex {
    pub(crate) fn new(x: &ThetaStructure) -> Self {
        let n = x.n as usize;
        let letters = x.alphabet.len();
        let p_list: Vec<u32> = x.p.iter().copied().collect();
        let p_pos: HashMap<u32, usize> = p_list.iter().enumerate().map(|(i, &a)| (a, i)).collect();
        let mut is_tau = FixedBitSet::with_capacity(n);
        for &t in &x.tau {
            is_tau.insert(t as usize);
        }
        let mut h_out = vec![Vec::new(); n * letters];
        for &(l, c, d) in &x.h {
            h_out[c as usize * letters + l as usize].push(d);
        }
        let mut pairs: HashMap<(u32, u32), PairRelation> = HashMap::new();
        for q in &x.s {
            let (Some(&ai), Some(&bi)) = (p_pos.get(&q[0]), p_pos.get(&q[1])) else {
                continue;
            };
            if !x.s.contains(&[q[1], q[0], q[3], q[2]]) {
                continue;
            }
            let rel = pairs.entry((q[2], q[3])).or_insert_with(|| PairRelation {
                rows: vec![FixedBitSet::with_capacity(p_list.len()); p_list.len()],
            });
            rel.rows[ai].insert(bi);
        }
        CodeIndex {
            letters,
            iota: x.iota.iter().copied().collect(),
            p_list,
            is_tau,
            h_out,
            h_set: x.h.iter().copied().collect(),
            pairs,
        }
    }

    pub(crate) fn roots(&self) -> &[u32] {
        &self.iota
    }
}

/// Search parameters shared by every entry point.
#[derive(Clone, Copy)]
pub(crate) struct SearchSpec<'o> {
    pub max_len: usize,
    pub oracle: Option<&'o LanguageOracle>,
    /// Only the first `a` tuple per closed `c` cycle.
    pub first_per_cycle: bool,
}

struct Walker<'a, 'o, F> {
    index: &'a CodeIndex,
    spec: SearchSpec<'o>,
    path: Vec<u32>,
    word: Word,
    domains: Vec<FixedBitSet>,
    /// One consistent `a` assignment (indices into `p_list`) for the
    /// current path. A prefix without one can never close into a code.
    witness: Vec<usize>,
    visit: F,
}

/// Saved walker state for backtracking over one pushed position.
struct Saved {
    domains: Vec<FixedBitSet>,
    witness: Vec<usize>,
}

impl<'a, F: FnMut(ValidCode) -> ControlFlow<()>> Walker<'a, '_, F> {
    fn run_root(&mut self, root: u32) -> ControlFlow<()> {
        let full = {
            let mut b = FixedBitSet::with_capacity(self.index.p_list.len());
            b.insert_range(..);
            b
        };
        if full.is_clear() {
            return ControlFlow::Continue(());
        }
        self.path.clear();
        self.word = Word::default();
        self.domains.clear();
        self.witness.clear();
        self.path.push(root);
        self.domains.push(full);
        self.witness.push(0);
        self.extend()
    }

    fn extend(&mut self) -> ControlFlow<()> {
        let m = self.path.len();
        let last = self.path[m - 1];
        for l in 0..self.index.letters as u8 {
            self.word.push(l);
            let flow = self.branch(l, m, last);
            self.word.pop();
            flow?;
        }
        ControlFlow::Continue(())
    }

    fn branch(&mut self, l: u8, m: usize, last: u32) -> ControlFlow<()> {
        let index = self.index;
        if m >= 2
            && index.is_tau.contains(last as usize)
            && index.h_set.contains(&(l, last, self.path[0]))
            && self.spec.oracle.is_none_or(|o| o.contains(&self.word))
        {
            self.close()?;
        }
        if m >= self.spec.max_len {
            return ControlFlow::Continue(());
        }
        let successors = &index.h_out[last as usize * index.letters + l as usize];
        if successors.is_empty() {
            return ControlFlow::Continue(());
        }
        if let Some(o) = self.spec.oracle {
            if !o.may_extend(self.word.letters(), self.spec.max_len) {
                return ControlFlow::Continue(());
            }
        }
        for &d in successors {
            if let Some(saved) = self.push_position(d) {
                self.path.push(d);
                let flow = self.extend();
                self.path.pop();
                self.domains = saved.domains;
                self.witness = saved.witness;
                flow?;
            }
        }
        ControlFlow::Continue(())
    }

    /// Adds a position holding `d`: narrows the domains by pairwise
    /// support, then makes sure some `a` assignment of the extended path
    /// exists. Returns the previous state for restoration, or `None` when
    /// the extended path cannot be completed.
    fn push_position(&mut self, d: u32) -> Option<Saved> {
        let index = self.index;
        let np = index.p_list.len();
        let mut fresh = FixedBitSet::with_capacity(np);
        fresh.insert_range(..);
        let mut rels = Vec::with_capacity(self.path.len());
        for (j, &cj) in self.path.iter().enumerate() {
            let rel = index.pairs.get(&(cj, d))?;
            let mut support = FixedBitSet::with_capacity(np);
            for a in self.domains[j].ones() {
                support.union_with(&rel.rows[a]);
            }
            fresh.intersect_with(&support);
            if fresh.is_clear() {
                return None;
            }
            rels.push(rel);
        }
        let mut narrowed = Vec::with_capacity(self.domains.len() + 1);
        for (j, rel) in rels.iter().enumerate() {
            let mut dom = FixedBitSet::with_capacity(np);
            for a in self.domains[j].ones() {
                if !rel.rows[a].is_disjoint(&fresh) {
                    dom.insert(a);
                }
            }
            if dom.is_clear() {
                return None;
            }
            narrowed.push(dom);
        }
        narrowed.push(fresh);

        // Cheap path: the current witness extends by one value.
        let mut ext = narrowed[rels.len()].clone();
        for (j, rel) in rels.iter().enumerate() {
            ext.intersect_with(&rel.rows[self.witness[j]]);
        }
        let witness = match ext.minimum() {
            Some(v)
                if self
                    .witness
                    .iter()
                    .enumerate()
                    .all(|(j, &a)| narrowed[j].contains(a)) =>
            {
                let mut w = self.witness.clone();
                w.push(v);
                w
            }
            _ => {
                let mut path = self.path.clone();
                path.push(d);
                let rels = self.pair_relations(&path)?;
                let mut assignment = Vec::with_capacity(path.len());
                if !first_assignment(&rels, path.len(), narrowed.clone(), &mut assignment) {
                    return None;
                }
                assignment
            }
        };
        Some(Saved {
            domains: std::mem::replace(&mut self.domains, narrowed),
            witness: std::mem::replace(&mut self.witness, witness),
        })
    }

    /// Row-major `m x m` table of the pair relations along `path`, or `None`
    /// if some pair has none.
    fn pair_relations(&self, path: &[u32]) -> Option<Vec<Option<&'a PairRelation>>> {
        let m = path.len();
        let mut rels = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                rels.push(if i == j {
                    None
                } else {
                    Some(self.index.pairs.get(&(path[i], path[j]))?)
                });
            }
        }
        Some(rels)
    }

    fn close(&mut self) -> ControlFlow<()> {
        let Some(rels) = self.pair_relations(&self.path) else {
            return ControlFlow::Continue(());
        };
        let mut assignment = Vec::with_capacity(self.path.len());
        let domains = self.domains.clone();
        let mut found = false;
        self.solve_a(&rels, domains, &mut assignment, &mut found)
    }

    fn solve_a(
        &mut self,
        rels: &[Option<&PairRelation>],
        domains: Vec<FixedBitSet>,
        assignment: &mut Vec<usize>,
        found: &mut bool,
    ) -> ControlFlow<()> {
        let m = self.path.len();
        let i = assignment.len();
        if i == m {
            *found = true;
            let code = ValidCode {
                word: self.word.clone(),
                a: assignment.iter().map(|&a| self.index.p_list[a]).collect(),
                c: self.path.clone(),
            };
            return (self.visit)(code);
        }
        for v in domains[i].ones() {
            let mut next = domains.clone();
            let mut ok = true;
            for (k, dom) in next.iter_mut().enumerate().skip(i + 1) {
                dom.intersect_with(&rels[i * m + k].expect("pair present").rows[v]);
                if dom.is_clear() {
                    ok = false;
                    break;
                }
            }
            if !ok {
                continue;
            }
            assignment.push(v);
            let flow = self.solve_a(rels, next, assignment, found);
            assignment.pop();
            flow?;
            if *found && self.spec.first_per_cycle {
                break;
            }
        }
        ControlFlow::Continue(())
    }
}

/// Backtracking in position order with forward checking; fills
/// `assignment` with the first solution found.
fn first_assignment(
    rels: &[Option<&PairRelation>],
    m: usize,
    domains: Vec<FixedBitSet>,
    assignment: &mut Vec<usize>,
) -> bool {
    let i = assignment.len();
    if i == m {
        return true;
    }
    for v in domains[i].ones() {
        let mut next = domains.clone();
        let ok = next.iter_mut().enumerate().skip(i + 1).all(|(k, dom)| {
            dom.intersect_with(&rels[i * m + k].expect("pair present").rows[v]);
            !dom.is_clear()
        });
        if ok {
            assignment.push(v);
            if first_assignment(rels, m, next, assignment) {
                return true;
            }
            assignment.pop();
        }
    }
    false
}

/// Runs the search from the given `iota` roots, in order.
pub(crate) fn walk_roots(
    index: &CodeIndex,
    roots: &[u32],
    spec: SearchSpec<'_>,
    visit: impl FnMut(ValidCode) -> ControlFlow<()>,
) -> ControlFlow<()> {
    if spec.max_len < 2 || spec.oracle.is_some_and(LanguageOracle::is_trivially_empty) {
        return ControlFlow::Continue(());
    }
    let mut walker = Walker {
        index,
        spec,
        path: Vec::new(),
        word: Word::default(),
        domains: Vec::new(),
        witness: Vec::new(),
        visit,
    };
    for &root in roots {
        walker.run_root(root)?;
    }
    ControlFlow::Continue(())
}

/// Visits valid codes of `x` with `2 <= |word| <= max_len` in canonical
/// order. When `oracle` is given, only words it contains are reported and
/// prefixes it rules out are not explored.
pub fn for_each_code(
    x: &ThetaStructure,
    max_len: usize,
    oracle: Option<&LanguageOracle>,
    visit: impl FnMut(ValidCode) -> ControlFlow<()>,
) {
    let index = CodeIndex::new(x);
    let spec = SearchSpec {
        max_len,
        oracle,
        first_per_cycle: false,
    };
    let _ = walk_roots(&index, index.roots(), spec, visit);
}

/// Collects valid codes in canonical order, stopping after `limit` codes.
pub fn enumerate_codes(
    x: &ThetaStructure,
    max_len: usize,
    oracle: Option<&LanguageOracle>,
    limit: Option<usize>,
) -> Vec<ValidCode> {
    let mut out = Vec::new();
    if limit == Some(0) {
        return out;
    }
    for_each_code(x, max_len, oracle, |code| {
        out.push(code);
        if limit.is_some_and(|l| out.len() >= l) {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    out
}

/// The least code in canonical order, if any. With `threads > 1` the roots
/// are searched in parallel; `deterministic` still returns the least code,
/// otherwise whichever is found first.
pub fn first_code(
    x: &ThetaStructure,
    max_len: usize,
    oracle: Option<&LanguageOracle>,
    threads: usize,
    deterministic: bool,
) -> Option<ValidCode> {
    let index = CodeIndex::new(x);
    let spec = SearchSpec {
        max_len,
        oracle,
        first_per_cycle: true,
    };
    let from_root = |root: u32| {
        let mut found = None;
        let _ = walk_roots(&index, &[root], spec, |code| {
            found = Some(code);
            ControlFlow::Break(())
        });
        found
    };
    if threads <= 1 || index.roots().len() <= 1 {
        return index.roots().iter().find_map(|&r| from_root(r));
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build();
    let roots = index.roots();
    match pool {
        Ok(pool) => pool.install(|| {
            if deterministic {
                roots.par_iter().find_map_first(|&r| from_root(r))
            } else {
                roots.par_iter().find_map_any(|&r| from_root(r))
            }
        }),
        Err(_) => roots.iter().find_map(|&r| from_root(r)),
    }
}

/// Words realized by at least one valid code, with one witness each.
pub fn realized_words(
    x: &ThetaStructure,
    max_len: usize,
    oracle: Option<&LanguageOracle>,
) -> BTreeMap<Word, ValidCode> {
    let index = CodeIndex::new(x);
    let spec = SearchSpec {
        max_len,
        oracle,
        first_per_cycle: true,
    };
    let mut out = BTreeMap::new();
    let _ = walk_roots(&index, index.roots(), spec, |code| {
        out.entry(code.word.clone()).or_insert(code);
        ControlFlow::Continue(())
    });
    out
}

/// The decoding of `x`: the structure on `P` (renumbered densely in
/// ascending order) whose `R_w` facts are the `a` tuples of valid
/// `w`-codes with `|w| <= max_len`.
pub fn decode(x: &ThetaStructure, max_len: usize) -> RhoStructure {
    let renumber: HashMap<u32, u32> =
        x.p.iter()
            .enumerate()
            .map(|(i, &a)| (a, i as u32))
            .collect();
    let mut out = RhoStructure::empty(x.alphabet.clone(), x.p.len() as u32);
    let mut facts = BTreeSet::new();
    for_each_code(x, max_len, None, |code| {
        let tuple = code.a.iter().map(|a| renumber[a]).collect();
        facts.insert((code.word, tuple));
        ControlFlow::Continue(())
    });
    out.facts = facts;
    out
}

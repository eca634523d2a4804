//! Deciding membership in the CSP of an encoded trivial structure, and a
//! generic homomorphism search between finite structures.

use std::collections::{BTreeMap, HashSet};

use fixedbitset::FixedBitSet;

use crate::decode::{first_code, is_separated, SeparationViolation, ValidCode};
use crate::error::{Error, Result};
use crate::language::LanguageOracle;
use crate::structures::{Alphabet, Relational, ThetaStructure};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Answer {
    Yes,
    No,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    Code(ValidCode),
    Separation(SeparationViolation),
}

/// Outcome of [`solve`]. A negative answer always carries its witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decision {
    Yes,
    No(Witness),
}

impl Decision {
    pub fn answer(&self) -> Answer {
        match self {
            Decision::Yes => Answer::Yes,
            Decision::No(_) => Answer::No,
        }
    }

    pub fn is_yes(&self) -> bool {
        matches!(self, Decision::Yes)
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Decision::Yes => None,
            Decision::No(w) => Some(w),
        }
    }

    /// `"YES"`, `"NO valid-code word=<code>"` or `"NO not-separated <violation>"`.
    pub fn render(&self, alphabet: &Alphabet) -> String {
        match self {
            Decision::Yes => "YES".into(),
            Decision::No(Witness::Code(c)) => format!("NO valid-code word={}", c.render(alphabet)),
            Decision::No(Witness::Separation(v)) => {
                format!("NO not-separated {}", v.render(alphabet))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HomMode {
    Plain,
    Injective,
    /// Injective and reflecting every relation.
    Embedding,
}

#[derive(Debug, Clone, Copy)]
pub struct HomOptions {
    pub mode: HomMode,
    /// Return the lexicographically least map. Otherwise the first map the
    /// smallest-domain-first search reaches, which is cheaper to find.
    pub deterministic: bool,
}

impl Default for HomOptions {
    fn default() -> Self {
        HomOptions {
            mode: HomMode::Plain,
            deterministic: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Homomorphism {
    pub map: Vec<u32>,
    pub injective: bool,
}

struct Constraint {
    vars: Vec<u32>,
    /// Index into the target relation table.
    rel: usize,
}

struct HomProblem {
    n_source: usize,
    n_target: usize,
    constraints: Vec<Constraint>,
    by_var: Vec<Vec<usize>>,
    target: Vec<Vec<Vec<u32>>>,
    target_set: Vec<HashSet<Vec<u32>>>,
    /// `postings[rel][pos][b]`: indices of target tuples with `b` at `pos`.
    postings: Vec<Vec<Vec<Vec<u32>>>>,
}

impl HomProblem {
    /// Values for `u` consistent with constraint `ci` under the partial map.
    fn supported(&self, ci: usize, u: u32, map: &[Option<u32>]) -> FixedBitSet {
        let con = &self.constraints[ci];
        let mut out = FixedBitSet::with_capacity(self.n_target);
        let tuples = &self.target[con.rel];
        if tuples.is_empty() {
            return out;
        }
        // Scan only the tuples agreeing with the most selective assigned variable.
        let narrowest = con
            .vars
            .iter()
            .enumerate()
            .filter_map(|(pos, &v)| {
                map[v as usize].map(|b| &self.postings[con.rel][pos][b as usize])
            })
            .min_by_key(|list| list.len());
        let candidates: Box<dyn Iterator<Item = &Vec<u32>>> = match narrowest {
            Some(list) => Box::new(list.iter().map(|&i| &tuples[i as usize])),
            None => Box::new(tuples.iter()),
        };
        'tuple: for t in candidates {
            let mut u_val = None;
            for (&v, &b) in con.vars.iter().zip(t) {
                if v == u {
                    match u_val {
                        None => u_val = Some(b),
                        Some(prev) if prev != b => continue 'tuple,
                        _ => {}
                    }
                } else if let Some(img) = map[v as usize] {
                    if img != b {
                        continue 'tuple;
                    }
                }
            }
            if let Some(b) = u_val {
                out.insert(b as usize);
            }
        }
        out
    }

    /// Backtracking with smallest-domain-first variable order (ties by
    /// index) and ascending values.
    fn search(
        &self,
        map: &mut Vec<Option<u32>>,
        domains: &mut Vec<FixedBitSet>,
        injective: bool,
        accept: &dyn Fn(&[u32]) -> bool,
    ) -> Option<Vec<u32>> {
        let var = (0..self.n_source)
            .filter(|&v| map[v].is_none())
            .min_by_key(|&v| (domains[v].count_ones(..), v));
        let Some(var) = var else {
            let full: Vec<u32> = map.iter().map(|m| m.expect("complete")).collect();
            return accept(&full).then_some(full);
        };
        let candidates: Vec<usize> = domains[var].ones().collect();
        for b in candidates {
            let saved = domains.clone();
            if let Some(found) = self.try_value(var, b, map, domains, injective, accept) {
                return Some(found);
            }
            *domains = saved;
        }
        None
    }

    /// Assigns `var := b`, propagates and searches the rest. On failure
    /// `map[var]` is reset; `domains` is left for the caller to restore.
    fn try_value(
        &self,
        var: usize,
        b: usize,
        map: &mut Vec<Option<u32>>,
        domains: &mut Vec<FixedBitSet>,
        injective: bool,
        accept: &dyn Fn(&[u32]) -> bool,
    ) -> Option<Vec<u32>> {
        map[var] = Some(b as u32);
        if self.propagate(var as u32, b, map, domains, injective) {
            if let Some(found) = self.search(map, domains, injective, accept) {
                return Some(found);
            }
        }
        map[var] = None;
        None
    }

    /// The lexicographically least solution: variables are fixed in index
    /// order to the smallest value whose remainder is still solvable. A
    /// solution found along the way answers the probe for its own value.
    fn least(
        &self,
        mut domains: Vec<FixedBitSet>,
        injective: bool,
        accept: &dyn Fn(&[u32]) -> bool,
    ) -> Option<Vec<u32>> {
        let mut map = vec![None; self.n_source];
        let mut known = self.search(&mut map.clone(), &mut domains.clone(), injective, accept)?;
        for var in 0..self.n_source {
            let smaller: Vec<usize> = domains[var]
                .ones()
                .take_while(|&b| b < known[var] as usize)
                .collect();
            for b in smaller {
                let mut trial_map = map.clone();
                let mut trial_domains = domains.clone();
                if let Some(found) = self.try_value(
                    var,
                    b,
                    &mut trial_map,
                    &mut trial_domains,
                    injective,
                    accept,
                ) {
                    known = found;
                    break;
                }
            }
            // Commit only the prefix; the deeper search narrowed its own copy.
            let b = known[var] as usize;
            map[var] = Some(b as u32);
            let ok = self.propagate(var as u32, b, &map, &mut domains, injective);
            debug_assert!(ok, "a known solution extends the prefix");
        }
        Some(known)
    }

    /// Forward checking after `var := b`. Returns false on a wipe-out or a
    /// violated fully-assigned constraint.
    fn propagate(
        &self,
        var: u32,
        b: usize,
        map: &[Option<u32>],
        domains: &mut [FixedBitSet],
        injective: bool,
    ) -> bool {
        domains[var as usize].clear();
        domains[var as usize].insert(b);
        if injective {
            for (u, dom) in domains.iter_mut().enumerate() {
                if map[u].is_none() {
                    dom.set(b, false);
                    if dom.is_clear() {
                        return false;
                    }
                }
            }
        }
        for &ci in &self.by_var[var as usize] {
            let con = &self.constraints[ci];
            let mut open: Vec<u32> = con
                .vars
                .iter()
                .copied()
                .filter(|&v| map[v as usize].is_none())
                .collect();
            if open.is_empty() {
                let image: Vec<u32> = con.vars.iter().map(|&v| map[v as usize].unwrap()).collect();
                if !self.target_set[con.rel].contains(&image) {
                    return false;
                }
                continue;
            }
            open.sort_unstable();
            open.dedup();
            for u in open {
                let support = self.supported(ci, u, map);
                domains[u as usize].intersect_with(&support);
                if domains[u as usize].is_clear() {
                    return false;
                }
            }
        }
        true
    }
}

/// Searches for a homomorphism from `source` to `target`.
///
/// Relations are matched by name. A relation present only in the source
/// behaves as empty in the target.
pub fn hom_search<S: Relational>(
    source: &S,
    target: &S,
    opts: HomOptions,
) -> Result<Option<Homomorphism>> {
    if source.signature_tag() != target.signature_tag() {
        return Err(Error::SignatureMismatch(format!(
            "{} vs {}",
            source.signature_tag(),
            target.signature_tag()
        )));
    }
    let n_source = source.domain_size() as usize;
    let n_target = target.domain_size() as usize;

    let mut rel_index: BTreeMap<String, usize> = BTreeMap::new();
    let mut target_tuples: Vec<Vec<Vec<u32>>> = Vec::new();
    for r in target.relations() {
        rel_index.insert(r.name, target_tuples.len());
        target_tuples.push(r.tuples);
    }
    let source_rels = source.relations();
    for r in &source_rels {
        if !rel_index.contains_key(&r.name) {
            rel_index.insert(r.name.clone(), target_tuples.len());
            target_tuples.push(Vec::new());
        }
    }
    let target_set: Vec<HashSet<Vec<u32>>> = target_tuples
        .iter()
        .map(|ts| ts.iter().cloned().collect())
        .collect();
    let postings = target_tuples
        .iter()
        .map(|ts| {
            let arity = ts.first().map_or(0, Vec::len);
            let mut lists = vec![vec![Vec::new(); n_target]; arity];
            for (i, t) in ts.iter().enumerate() {
                for (pos, &b) in t.iter().enumerate() {
                    lists[pos][b as usize].push(i as u32);
                }
            }
            lists
        })
        .collect();

    if opts.mode != HomMode::Plain && n_source > n_target {
        return Ok(None);
    }

    let mut domains = vec![
        {
            let mut all = FixedBitSet::with_capacity(n_target);
            all.insert_range(..);
            all
        };
        n_source
    ];
    let mut constraints = Vec::new();
    let mut by_var = vec![Vec::new(); n_source];
    for r in &source_rels {
        let rel = rel_index[&r.name];
        for t in &r.tuples {
            if r.arity == 1 {
                let mut allowed = FixedBitSet::with_capacity(n_target);
                for bt in &target_tuples[rel] {
                    allowed.insert(bt[0] as usize);
                }
                domains[t[0] as usize].intersect_with(&allowed);
                continue;
            }
            let ci = constraints.len();
            let mut vars = t.clone();
            constraints.push(Constraint {
                vars: t.clone(),
                rel,
            });
            vars.sort_unstable();
            vars.dedup();
            for v in vars {
                by_var[v as usize].push(ci);
            }
        }
    }
    if domains.iter().any(FixedBitSet::is_clear) {
        return Ok(None);
    }

    let problem = HomProblem {
        n_source,
        n_target,
        constraints,
        by_var,
        target: target_tuples,
        target_set,
        postings,
    };

    let reflect_check = |full: &[u32]| -> bool {
        if opts.mode != HomMode::Embedding {
            return true;
        }
        let mut inverse = vec![None; n_target];
        for (a, &b) in full.iter().enumerate() {
            inverse[b as usize] = Some(a as u32);
        }
        let source_sets: BTreeMap<&str, HashSet<&Vec<u32>>> = source_rels
            .iter()
            .map(|r| (r.name.as_str(), r.tuples.iter().collect()))
            .collect();
        for (name, &rel) in &rel_index {
            for bt in &problem.target[rel] {
                let pre: Option<Vec<u32>> = bt.iter().map(|&b| inverse[b as usize]).collect();
                if let Some(pre) = pre {
                    if !source_sets
                        .get(name.as_str())
                        .is_some_and(|s| s.contains(&pre))
                    {
                        return false;
                    }
                }
            }
        }
        true
    };

    let mut map = vec![None; n_source];
    let injective = opts.mode != HomMode::Plain;
    let found = if opts.deterministic {
        problem.least(domains, injective, &reflect_check)
    } else {
        problem.search(&mut map, &mut domains, injective, &reflect_check)
    };
    Ok(found.map(|map| {
        let distinct: HashSet<u32> = map.iter().copied().collect();
        Homomorphism {
            injective: distinct.len() == map.len(),
            map,
        }
    }))
}

/// Checks that `map` is a homomorphism from `source` to `target`.
pub fn is_homomorphism<S: Relational>(source: &S, target: &S, map: &[u32]) -> bool {
    if map.len() != source.domain_size() as usize || map.iter().any(|&b| b >= target.domain_size())
    {
        return false;
    }
    let target_sets: BTreeMap<String, HashSet<Vec<u32>>> = target
        .relations()
        .into_iter()
        .map(|r| (r.name, r.tuples.into_iter().collect()))
        .collect();
    source.relations().iter().all(|r| {
        r.tuples.iter().all(|t| {
            let image: Vec<u32> = t.iter().map(|&a| map[a as usize]).collect();
            target_sets.get(&r.name).is_some_and(|s| s.contains(&image))
        })
    })
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Longest code word considered; defaults to `|X| - 1`.
    pub max_len: Option<usize>,
    pub threads: usize,
    pub deterministic: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_len: None,
            threads: 1,
            deterministic: true,
        }
    }
}

/// A valid code in `x` whose word lies in `oracle`, of length at most
/// `max_len`. The search is pruned with `oracle.may_extend`.
pub fn find_forbidden_code(
    x: &ThetaStructure,
    oracle: &LanguageOracle,
    max_len: usize,
) -> Option<ValidCode> {
    first_code(x, max_len, Some(oracle), 1, true)
}

/// Decides whether `x` maps homomorphically to the encoding of the trivial
/// structure over `oracle`'s language: yes iff `x` is separated and has no
/// valid code whose word is in the language.
pub fn solve(x: &ThetaStructure, oracle: &LanguageOracle) -> Decision {
    solve_with(x, oracle, &SolveOptions::default())
}

pub fn solve_with(x: &ThetaStructure, oracle: &LanguageOracle, opts: &SolveOptions) -> Decision {
    if let Some(v) = is_separated(x).into_iter().next() {
        return Decision::No(Witness::Separation(v));
    }
    let max_len = opts.max_len.unwrap_or_else(|| x.len().saturating_sub(1));
    match first_code(x, max_len, Some(oracle), opts.threads, opts.deterministic) {
        Some(code) => Decision::No(Witness::Code(code)),
        None => Decision::Yes,
    }
}

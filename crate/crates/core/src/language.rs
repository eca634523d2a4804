//! Word-language oracles over `Σ^{≥2}`.
//!
//! Every language answers two queries: membership, and whether some member
//! of bounded length extends a given prefix. The second one drives pruning
//! in the code search.

use std::collections::{BTreeSet, HashSet};
use std::path::Path;

use fixedbitset::FixedBitSet;
use num_bigint::BigUint;

use crate::error::{Error, ParseError, Result};
use crate::structures::{parse_u32, Alphabet, Word};

const NO_CHILD: u32 = u32::MAX;

/// Prefix tree over a finite word set. Each node records the length of the
/// shortest member below it, so bounded-length viability is a single walk.
#[derive(Debug, Clone)]
struct Trie {
    width: usize,
    children: Vec<u32>,
    shortest: Vec<usize>,
}

impl Trie {
    fn new(width: usize, words: &BTreeSet<Word>) -> Self {
        let mut trie = Trie {
            width,
            children: vec![NO_CHILD; width],
            shortest: vec![usize::MAX],
        };
        for w in words {
            let mut node = 0usize;
            trie.shortest[0] = trie.shortest[0].min(w.len());
            for &l in w.letters() {
                let slot = node * width + l as usize;
                if trie.children[slot] == NO_CHILD {
                    trie.children[slot] = trie.shortest.len() as u32;
                    trie.shortest.push(usize::MAX);
                    trie.children.extend(std::iter::repeat_n(NO_CHILD, width));
                }
                node = trie.children[slot] as usize;
                trie.shortest[node] = trie.shortest[node].min(w.len());
            }
        }
        trie
    }

    fn walk(&self, prefix: &[u8]) -> Option<usize> {
        let mut node = 0usize;
        for &l in prefix {
            let next = self.children[node * self.width + l as usize];
            if next == NO_CHILD {
                return None;
            }
            node = next as usize;
        }
        Some(node)
    }
}

/// A finite word set with its prefix tree.
#[derive(Debug, Clone)]
pub struct WordSet {
    words: BTreeSet<Word>,
    trie: Trie,
}

impl WordSet {
    pub fn new(alphabet: &Alphabet, words: BTreeSet<Word>) -> Result<Self> {
        for w in &words {
            if w.len() < 2 {
                return Err(Error::WordTooShort {
                    word: alphabet.render(w),
                    len: w.len(),
                });
            }
        }
        let trie = Trie::new(alphabet.len(), &words);
        Ok(WordSet { words, trie })
    }

    pub fn words(&self) -> &BTreeSet<Word> {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    fn contains(&self, w: &Word) -> bool {
        self.words.contains(w)
    }

    /// Some member has `prefix` as a prefix and length at most `max_len`.
    fn has_extension(&self, prefix: &[u8], max_len: usize) -> bool {
        self.trie
            .walk(prefix)
            .is_some_and(|node| self.trie.shortest[node] <= max_len)
    }

    fn count_extensions(&self, prefix: &[u8], lo: usize, hi: usize) -> usize {
        self.words
            .iter()
            .filter(|w| w.starts_with(prefix) && (lo..=hi).contains(&w.len()))
            .count()
    }
}

/// A complete deterministic automaton over an alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    pub alphabet: Alphabet,
    pub states: u32,
    pub start: u32,
    pub accepting: BTreeSet<u32>,
    /// `transitions[q * |Σ| + letter]`
    pub transitions: Vec<u32>,
}

impl Dfa {
    pub fn parse(text: &str) -> Result<Dfa, ParseError> {
        let mut alphabet = None;
        let mut states = None;
        let mut start = None;
        let mut accepting = BTreeSet::new();
        let mut trans: Vec<(usize, u32, char, u32)> = Vec::new();
        let mut seen_header = false;

        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = body.split_whitespace().collect();
            if tokens.is_empty() {
                continue;
            }
            if !seen_header {
                if tokens != ["dfa"] {
                    return Err(ParseError::new(line, "expected \"dfa\" header"));
                }
                seen_header = true;
                continue;
            }
            let want = |n: usize| {
                if tokens.len() == n + 1 {
                    Ok(())
                } else {
                    Err(ParseError::new(
                        line,
                        format!("{} expects {n} argument(s)", tokens[0]),
                    ))
                }
            };
            match tokens[0] {
                "alphabet" => {
                    want(1)?;
                    alphabet = Some(
                        Alphabet::new(tokens[1])
                            .map_err(|e| ParseError::new(line, e.to_string()))?,
                    );
                }
                "states" => {
                    want(1)?;
                    states = Some(parse_u32(line, tokens[1])?);
                }
                "start" => {
                    want(1)?;
                    start = Some(parse_u32(line, tokens[1])?);
                }
                "accept" => {
                    for t in &tokens[1..] {
                        accepting.insert(parse_u32(line, t)?);
                    }
                }
                "trans" => {
                    want(3)?;
                    let mut chars = tokens[2].chars();
                    let letter = match (chars.next(), chars.next()) {
                        (Some(c), None) => c,
                        _ => return Err(ParseError::new(line, "trans expects a single letter")),
                    };
                    trans.push((
                        line,
                        parse_u32(line, tokens[1])?,
                        letter,
                        parse_u32(line, tokens[3])?,
                    ));
                }
                other => return Err(ParseError::new(line, format!("unknown keyword {other:?}"))),
            }
        }
        if !seen_header {
            return Err(ParseError::new(0, "empty DFA file"));
        }
        let alphabet = alphabet.ok_or_else(|| ParseError::new(0, "missing alphabet"))?;
        let states = states.ok_or_else(|| ParseError::new(0, "missing states"))?;
        let start = start.ok_or_else(|| ParseError::new(0, "missing start"))?;
        if states == 0 {
            return Err(ParseError::new(0, "a DFA needs at least one state"));
        }
        if start >= states {
            return Err(ParseError::new(
                0,
                format!("start state {start} out of range"),
            ));
        }
        if let Some(q) = accepting.iter().find(|&&q| q >= states) {
            return Err(ParseError::new(
                0,
                format!("accepting state {q} out of range"),
            ));
        }
        let width = alphabet.len();
        let mut transitions = vec![u32::MAX; states as usize * width];
        for (line, from, letter, to) in trans {
            if from >= states || to >= states {
                return Err(ParseError::new(line, "state out of range"));
            }
            let l = alphabet.index_of(letter).ok_or_else(|| {
                ParseError::new(line, format!("letter {letter:?} is not in the alphabet"))
            })?;
            let slot = &mut transitions[from as usize * width + l as usize];
            if *slot != u32::MAX && *slot != to {
                return Err(ParseError::new(
                    line,
                    format!("conflicting transition for ({from}, {letter})"),
                ));
            }
            *slot = to;
        }
        if let Some(slot) = transitions.iter().position(|&t| t == u32::MAX) {
            return Err(ParseError::new(
                0,
                format!(
                    "transition map is not total: missing ({}, {})",
                    slot / width,
                    alphabet.letter((slot % width) as u8)
                ),
            ));
        }
        Ok(Dfa {
            alphabet,
            states,
            start,
            accepting,
            transitions,
        })
    }

    /// Rewrites letter indices so that they follow `target`'s letter order.
    /// Every letter of `target` must be known to the automaton.
    fn reindexed(&self, target: &Alphabet) -> Result<Dfa> {
        let map: Vec<u8> = target
            .letters()
            .iter()
            .map(|&c| {
                self.alphabet
                    .index_of(c)
                    .ok_or(Error::LetterNotInAlphabet(c))
            })
            .collect::<Result<_>>()?;
        let width = self.alphabet.len();
        let mut transitions = Vec::with_capacity(self.states as usize * map.len());
        for q in 0..self.states as usize {
            for &l in &map {
                transitions.push(self.transitions[q * width + l as usize]);
            }
        }
        Ok(Dfa {
            alphabet: target.clone(),
            states: self.states,
            start: self.start,
            accepting: self.accepting.clone(),
            transitions,
        })
    }

    fn step(&self, q: u32, letter: u8) -> u32 {
        self.transitions[q as usize * self.alphabet.len() + letter as usize]
    }

    fn run(&self, word: &[u8]) -> u32 {
        word.iter().fold(self.start, |q, &l| self.step(q, l))
    }

    fn accepts_bounded(&self, prefix: &[u8], max_len: usize) -> bool {
        let width = self.alphabet.len();
        let mut current = FixedBitSet::with_capacity(self.states as usize);
        current.insert(self.run(prefix) as usize);
        let mut len = prefix.len();
        let mut seen: HashSet<FixedBitSet> = HashSet::new();
        loop {
            if len >= 2 && current.ones().any(|q| self.accepting.contains(&(q as u32))) {
                return true;
            }
            if len >= max_len {
                return false;
            }
            // Past length 2 the frontier sequence is eventually periodic; a
            // repeated frontier with no acceptance can never accept later.
            if len >= 2 && !seen.insert(current.clone()) {
                return false;
            }
            let mut next = FixedBitSet::with_capacity(self.states as usize);
            for q in current.ones() {
                for l in 0..width {
                    next.insert(self.step(q as u32, l as u8) as usize);
                }
            }
            current = next;
            len += 1;
        }
    }
}

#[derive(Debug, Clone)]
pub enum Variant {
    FiniteSet(WordSet),
    /// All of `Σ^{≥2}` except the listed words.
    Cofinite(WordSet),
    Dfa(Dfa),
    All,
    None,
}

/// A decidable language `W ⊆ Σ^{≥2}`.
#[derive(Debug, Clone)]
pub struct LanguageOracle {
    pub alphabet: Alphabet,
    pub variant: Variant,
}

impl LanguageOracle {
    pub fn all(alphabet: &Alphabet) -> Self {
        LanguageOracle {
            alphabet: alphabet.clone(),
            variant: Variant::All,
        }
    }

    pub fn none(alphabet: &Alphabet) -> Self {
        LanguageOracle {
            alphabet: alphabet.clone(),
            variant: Variant::None,
        }
    }

    pub fn finite(alphabet: &Alphabet, words: impl IntoIterator<Item = Word>) -> Result<Self> {
        Ok(LanguageOracle {
            alphabet: alphabet.clone(),
            variant: Variant::FiniteSet(WordSet::new(alphabet, words.into_iter().collect())?),
        })
    }

    pub fn cofinite(alphabet: &Alphabet, excluded: impl IntoIterator<Item = Word>) -> Result<Self> {
        Ok(LanguageOracle {
            alphabet: alphabet.clone(),
            variant: Variant::Cofinite(WordSet::new(alphabet, excluded.into_iter().collect())?),
        })
    }

    /// Builds a finite language from textual words.
    pub fn finite_str(alphabet: &Alphabet, words: &[&str]) -> Result<Self> {
        let words = words
            .iter()
            .map(|w| alphabet.relation_word(w))
            .collect::<Result<Vec<_>>>()?;
        Self::finite(alphabet, words)
    }

    pub fn cofinite_str(alphabet: &Alphabet, excluded: &[&str]) -> Result<Self> {
        let words = excluded
            .iter()
            .map(|w| alphabet.relation_word(w))
            .collect::<Result<Vec<_>>>()?;
        Self::cofinite(alphabet, words)
    }

    pub fn dfa(alphabet: &Alphabet, dfa: &Dfa) -> Result<Self> {
        Ok(LanguageOracle {
            alphabet: alphabet.clone(),
            variant: Variant::Dfa(dfa.reindexed(alphabet)?),
        })
    }

    fn valid_letters(&self, letters: &[u8]) -> bool {
        letters.iter().all(|&l| (l as usize) < self.alphabet.len())
    }

    /// Membership in `W`. Words shorter than 2 are never members.
    pub fn contains(&self, w: &Word) -> bool {
        if w.len() < 2 || !self.valid_letters(w.letters()) {
            return false;
        }
        match &self.variant {
            Variant::FiniteSet(set) => set.contains(w),
            Variant::Cofinite(set) => !set.contains(w),
            Variant::Dfa(dfa) => dfa.accepting.contains(&dfa.run(w.letters())),
            Variant::All => true,
            Variant::None => false,
        }
    }

    /// Whether some `w ∈ W` starts with `prefix` and has
    /// `|prefix| <= |w| <= max_total_len`.
    pub fn may_extend(&self, prefix: &[u8], max_total_len: usize) -> bool {
        if !self.valid_letters(prefix) {
            return false;
        }
        let lo = prefix.len().max(2);
        if lo > max_total_len {
            return false;
        }
        match &self.variant {
            Variant::FiniteSet(set) => set.has_extension(prefix, max_total_len),
            Variant::Cofinite(set) => {
                let base = BigUint::from(self.alphabet.len());
                let total: BigUint = (lo..=max_total_len)
                    .map(|len| base.pow((len - prefix.len()) as u32))
                    .sum();
                total > BigUint::from(set.count_extensions(prefix, lo, max_total_len))
            }
            Variant::Dfa(dfa) => dfa.accepts_bounded(prefix, max_total_len),
            Variant::All => true,
            Variant::None => false,
        }
    }

    pub fn contains_str(&self, w: &str) -> Result<bool> {
        Ok(self.contains(&self.alphabet.word(w)?))
    }

    pub fn may_extend_str(&self, prefix: &str, max_total_len: usize) -> Result<bool> {
        Ok(self.may_extend(self.alphabet.word(prefix)?.letters(), max_total_len))
    }

    /// Whether the language is empty, as far as this representation tells
    /// without search.
    pub fn is_trivially_empty(&self) -> bool {
        match &self.variant {
            Variant::None => true,
            Variant::FiniteSet(set) => set.is_empty(),
            _ => false,
        }
    }

    /// Words of `W` of length at most `max_len`, in lexicographic order.
    /// Exponential in `max_len`; meant for small bounds.
    pub fn members_up_to(&self, max_len: usize) -> Vec<Word> {
        let mut out = Vec::new();
        let mut stack = vec![Word::default()];
        // Depth-first in reverse letter order so that pops come out lexicographic.
        while let Some(w) = stack.pop() {
            if self.contains(&w) {
                out.push(w.clone());
            }
            if w.len() < max_len && self.may_extend(w.letters(), max_len) {
                for l in (0..self.alphabet.len() as u8).rev() {
                    let mut next = w.clone();
                    next.push(l);
                    stack.push(next);
                }
            }
        }
        out
    }
}

/// One word per line, `#` comments, blank lines ignored.
pub fn parse_word_list(text: &str, alphabet: &Alphabet) -> Result<BTreeSet<Word>, ParseError> {
    let mut words = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if body.split_whitespace().count() != 1 {
            return Err(ParseError::new(i + 1, "expected one word per line"));
        }
        let w = alphabet
            .relation_word(body)
            .map_err(|e| ParseError::new(i + 1, e.to_string()))?;
        words.insert(w);
    }
    Ok(words)
}

fn read(path: &str) -> Result<String> {
    std::fs::read_to_string(Path::new(path)).map_err(|source| Error::Io {
        path: path.to_string(),
        source,
    })
}

/// Parses `all`, `none`, `finite:PATH`, `cofinite:PATH` or `dfa:PATH`.
pub fn parse_language_spec(spec: &str, alphabet: &Alphabet) -> Result<LanguageOracle> {
    match spec.split_once(':') {
        None if spec == "all" => Ok(LanguageOracle::all(alphabet)),
        None if spec == "none" => Ok(LanguageOracle::none(alphabet)),
        Some(("finite", path)) => {
            let words = parse_word_list(&read(path)?, alphabet)?;
            LanguageOracle::finite(alphabet, words)
        }
        Some(("cofinite", path)) => {
            let words = parse_word_list(&read(path)?, alphabet)?;
            LanguageOracle::cofinite(alphabet, words)
        }
        Some(("dfa", path)) => {
            let dfa = Dfa::parse(&read(path)?)?;
            LanguageOracle::dfa(alphabet, &dfa)
        }
        _ => Err(Error::UnknownVariant(spec.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Alphabet {
        Alphabet::new("ab").unwrap()
    }

    const SIGMA_PLUS: &str = "dfa\nalphabet ab\nstates 2\nstart 0\naccept 1\n\
        trans 0 a 1\ntrans 0 b 1\ntrans 1 a 1\ntrans 1 b 1\n";

    fn ab_plus() -> Dfa {
        // (ab)+ : 0 -a-> 1 -b-> 2 -a-> 1, everything else to sink 3.
        Dfa::parse(
            "dfa\nalphabet ab\nstates 4\nstart 0\naccept 2\n\
             trans 0 a 1\ntrans 0 b 3\ntrans 1 a 3\ntrans 1 b 2\n\
             trans 2 a 1\ntrans 2 b 3\ntrans 3 a 3\ntrans 3 b 3\n",
        )
        .unwrap()
    }

    #[test]
    fn all_and_none() {
        let all = LanguageOracle::all(&ab());
        assert!(all.contains_str("ab").unwrap());
        assert!(!all.contains_str("a").unwrap());
        assert!(all.may_extend_str("", 2).unwrap());
        assert!(!all.may_extend_str("", 1).unwrap());
        assert!(!all.may_extend_str("aba", 2).unwrap());
        let none = LanguageOracle::none(&ab());
        assert!(!none.contains_str("ab").unwrap());
        assert!(!none.may_extend_str("", 10).unwrap());
        assert!(matches!(
            all.contains_str("ac"),
            Err(Error::LetterNotInAlphabet('c'))
        ));
    }

    #[test]
    fn finite_set() {
        let o = LanguageOracle::finite_str(&ab(), &["ab"]).unwrap();
        assert!(!o.contains_str("ba").unwrap());
        assert!(o.contains_str("ab").unwrap());
        assert!(!o.may_extend_str("b", 4).unwrap());
        assert!(o.may_extend_str("a", 2).unwrap());
        assert!(o.may_extend_str("ab", 2).unwrap());
        assert!(!o.may_extend_str("ab", 1).unwrap());
        assert!(LanguageOracle::finite_str(&ab(), &["a"]).is_err());
    }

    #[test]
    fn cofinite() {
        let o = LanguageOracle::cofinite_str(&ab(), &["aa", "ab"]).unwrap();
        assert!(!o.contains_str("aa").unwrap());
        assert!(o.contains_str("ba").unwrap());
        assert!(!o.may_extend_str("a", 2).unwrap());
        assert!(o.may_extend_str("a", 3).unwrap());
        assert!(o.may_extend_str("", 2).unwrap());
    }

    #[test]
    fn dfa_prefix_viability() {
        let o = LanguageOracle::dfa(&ab(), &ab_plus()).unwrap();
        assert!(o.may_extend_str("ab", 3).unwrap());
        assert!(o.contains_str("abab").unwrap());
        assert!(!o.contains_str("aba").unwrap());
        assert!(!o.may_extend_str("b", 10).unwrap());
        assert!(o.may_extend_str("aba", 4).unwrap());
        assert!(!o.may_extend_str("aba", 3).unwrap());
        assert!(o.may_extend_str("a", 2).unwrap());
    }

    #[test]
    fn dfa_short_words_ignored() {
        // Accepts everything, including the empty word and single letters.
        let dfa =
            Dfa::parse("dfa\nalphabet a\nstates 1\nstart 0\naccept 0\ntrans 0 a 0\n").unwrap();
        let o = LanguageOracle::dfa(&Alphabet::new("a").unwrap(), &dfa).unwrap();
        assert!(!o.contains_str("").unwrap());
        assert!(!o.contains_str("a").unwrap());
        assert!(o.contains_str("aa").unwrap());
        assert!(!o.may_extend_str("", 1).unwrap());
    }

    #[test]
    fn dfa_missing_transition_rejected() {
        let err = Dfa::parse(SIGMA_PLUS.replace("trans 1 b 1\n", "").as_str()).unwrap_err();
        assert!(err.reason.contains("not total"), "{err}");
        assert!(Dfa::parse(SIGMA_PLUS).is_ok());
    }

    #[test]
    fn dfa_alphabet_must_cover_instance_letters() {
        let dfa = ab_plus();
        assert!(LanguageOracle::dfa(&Alphabet::new("abc").unwrap(), &dfa).is_err());
        // Reordered alphabet keeps the same language.
        let ba = Alphabet::new("ba").unwrap();
        let o = LanguageOracle::dfa(&ba, &dfa).unwrap();
        assert!(o.contains_str("abab").unwrap());
        assert!(!o.contains_str("baba").unwrap());
    }

    #[test]
    fn spec_strings() {
        assert!(matches!(
            parse_language_spec("all", &ab()).unwrap().variant,
            Variant::All
        ));
        assert!(matches!(
            parse_language_spec("none", &ab()).unwrap().variant,
            Variant::None
        ));
        assert!(matches!(
            parse_language_spec("regex:foo", &ab()),
            Err(Error::UnknownVariant(_))
        ));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("words.txt");
        std::fs::write(&path, "ab\nba\n# comment\n\n").unwrap();
        let o = parse_language_spec(&format!("finite:{}", path.display()), &ab()).unwrap();
        match &o.variant {
            Variant::FiniteSet(set) => assert_eq!(set.len(), 2),
            other => panic!("unexpected {other:?}"),
        }
        let bad = dir.path().join("bad.dfa");
        std::fs::write(&bad, "dfa\nalphabet ab\nstates 1\nstart 0\ntrans 0 a 0\n").unwrap();
        assert!(matches!(
            parse_language_spec(&format!("dfa:{}", bad.display()), &ab()),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn members_enumeration() {
        let o = LanguageOracle::cofinite_str(&ab(), &["aa", "ab"]).unwrap();
        let got: Vec<String> = o.members_up_to(2).iter().map(|w| ab().render(w)).collect();
        assert_eq!(got, ["ba", "bb"]);
    }
}

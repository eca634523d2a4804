//! Finite relational structures over the code signature (`P`, `iota`, `tau`,
//! `H_s`, `S`) and over word-indexed signatures, plus their text formats.
//!
//! Elements are dense ids `0..n`. Relations are kept as sorted sets so that
//! iteration, serialization and search order are all deterministic.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::error::{Error, ParseError, Result};

/// An ordered alphabet of single-character letters. Letter order fixes the
/// lexicographic order on words.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alphabet {
    letters: Vec<char>,
}

impl Alphabet {
    pub fn new(letters: &str) -> Result<Self> {
        Self::from_chars(letters.chars().collect())
    }

    pub fn from_chars(letters: Vec<char>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::BadAlphabet("alphabet is empty".into()));
        }
        if letters.len() > u8::MAX as usize {
            return Err(Error::BadAlphabet("more than 255 letters".into()));
        }
        let mut seen = BTreeSet::new();
        for &c in &letters {
            if c.is_whitespace() || c.is_control() || c == '#' {
                return Err(Error::BadAlphabet(format!("letter {c:?} is not printable")));
            }
            if !seen.insert(c) {
                return Err(Error::BadAlphabet(format!("duplicate letter {c:?}")));
            }
        }
        Ok(Alphabet { letters })
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[char] {
        &self.letters
    }

    pub fn letter(&self, index: u8) -> char {
        self.letters[index as usize]
    }

    pub fn index_of(&self, c: char) -> Option<u8> {
        self.letters.iter().position(|&l| l == c).map(|i| i as u8)
    }

    /// Parses a word of any length (including empty) over this alphabet.
    pub fn word(&self, text: &str) -> Result<Word> {
        text.chars()
            .map(|c| self.index_of(c).ok_or(Error::LetterNotInAlphabet(c)))
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    /// Parses a word usable as a relation index, i.e. of length at least 2.
    pub fn relation_word(&self, text: &str) -> Result<Word> {
        let w = self.word(text)?;
        if w.len() < 2 {
            return Err(Error::WordTooShort {
                word: text.to_string(),
                len: w.len(),
            });
        }
        Ok(w)
    }

    pub fn render(&self, word: &Word) -> String {
        word.0.iter().map(|&i| self.letter(i)).collect()
    }

    /// All words of exactly `len` letters, in lexicographic order.
    pub fn words_of_len(&self, len: usize) -> Vec<Word> {
        let mut out = vec![Word::default()];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|w| {
                    (0..self.len() as u8).map(move |l| {
                        let mut next = w.clone();
                        next.0.push(l);
                        next
                    })
                })
                .collect();
        }
        out
    }
}

impl std::fmt::Display for Alphabet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.letters {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// A word stored as letter indices into its alphabet. Ordering is
/// lexicographic with proper prefixes first.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn from_indices(indices: Vec<u8>) -> Self {
        Word(indices)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn push(&mut self, letter: u8) {
        self.0.push(letter);
    }

    pub fn pop(&mut self) -> Option<u8> {
        self.0.pop()
    }

    pub fn starts_with(&self, prefix: &[u8]) -> bool {
        self.0.starts_with(prefix)
    }
}

/// A finite structure in the code signature.
///
/// `h` holds `(letter, from, to)` triples, so it is ordered by letter first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaStructure {
    pub alphabet: Alphabet,
    pub n: u32,
    pub p: BTreeSet<u32>,
    pub iota: BTreeSet<u32>,
    pub tau: BTreeSet<u32>,
    pub h: BTreeSet<(u8, u32, u32)>,
    pub s: BTreeSet<[u32; 4]>,
}

impl ThetaStructure {
    pub fn empty(alphabet: Alphabet, n: u32) -> Self {
        ThetaStructure {
            alphabet,
            n,
            p: BTreeSet::new(),
            iota: BTreeSet::new(),
            tau: BTreeSet::new(),
            h: BTreeSet::new(),
            s: BTreeSet::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.n as usize
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Appends a fresh element with no relations and returns its id.
    pub fn add_element(&mut self) -> u32 {
        self.n += 1;
        self.n - 1
    }

    /// Verifies that every id is in range and every letter index is valid.
    pub fn check(&self) -> Result<()> {
        let n = self.n;
        let in_range = |id: u32| {
            if id < n {
                Ok(())
            } else {
                Err(Error::IdOutOfRange { id, n })
            }
        };
        for &id in self.p.iter().chain(&self.iota).chain(&self.tau) {
            in_range(id)?;
        }
        for &(l, c, d) in &self.h {
            if l as usize >= self.alphabet.len() {
                return Err(Error::SignatureMismatch(format!(
                    "letter index {l} out of range"
                )));
            }
            in_range(c)?;
            in_range(d)?;
        }
        for q in &self.s {
            for &id in q {
                in_range(id)?;
            }
        }
        Ok(())
    }

    /// Total number of relation tuples.
    pub fn fact_count(&self) -> usize {
        self.p.len() + self.iota.len() + self.tau.len() + self.h.len() + self.s.len()
    }
}

/// A finite structure in a word-indexed signature: each fact is a word
/// together with a tuple of the word's length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RhoStructure {
    pub alphabet: Alphabet,
    pub n: u32,
    pub facts: BTreeSet<(Word, Vec<u32>)>,
}

impl RhoStructure {
    pub fn empty(alphabet: Alphabet, n: u32) -> Self {
        RhoStructure {
            alphabet,
            n,
            facts: BTreeSet::new(),
        }
    }

    pub fn check(&self) -> Result<()> {
        for (w, t) in &self.facts {
            if w.len() < 2 {
                return Err(Error::WordTooShort {
                    word: self.alphabet.render(w),
                    len: w.len(),
                });
            }
            if t.len() != w.len() {
                return Err(Error::SignatureMismatch(format!(
                    "tuple of length {} for word {}",
                    t.len(),
                    self.alphabet.render(w)
                )));
            }
            if let Some(&id) = t.iter().find(|&&id| id >= self.n) {
                return Err(Error::IdOutOfRange { id, n: self.n });
            }
        }
        Ok(())
    }

    /// The words indexing at least one fact.
    pub fn words(&self) -> BTreeSet<Word> {
        self.facts.iter().map(|(w, _)| w.clone()).collect()
    }

    pub fn max_word_len(&self) -> usize {
        self.facts.iter().map(|(w, _)| w.len()).max().unwrap_or(0)
    }
}

/// A finite loopless undirected graph. Edges are stored as `(u, v)` with `u < v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    pub n: u32,
    edges: BTreeSet<(u32, u32)>,
}

impl Graph {
    pub fn new(n: u32) -> Self {
        Graph {
            n,
            edges: BTreeSet::new(),
        }
    }

    pub fn add_edge(&mut self, u: u32, v: u32) -> Result<()> {
        if u >= self.n {
            return Err(Error::IdOutOfRange { id: u, n: self.n });
        }
        if v >= self.n {
            return Err(Error::IdOutOfRange { id: v, n: self.n });
        }
        if u == v {
            return Err(Error::BadParameters(format!("loop at vertex {u}")));
        }
        self.edges.insert((u.min(v), u.max(v)));
        Ok(())
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// The complete graph on `n` vertices.
    pub fn complete(n: u32) -> Self {
        let mut g = Graph::new(n);
        for u in 0..n {
            for v in u + 1..n {
                g.edges.insert((u, v));
            }
        }
        g
    }

    /// The path `0 - 1 - ... - n-1`.
    pub fn path(n: u32) -> Self {
        let mut g = Graph::new(n);
        for u in 1..n {
            g.edges.insert((u - 1, u));
        }
        g
    }
}

/// Restricts `x` to `keep`, renumbering the kept elements densely in
/// ascending order of their original ids.
pub fn induced_substructure(x: &ThetaStructure, keep: &BTreeSet<u32>) -> Result<ThetaStructure> {
    if let Some(&id) = keep.iter().find(|&&id| id >= x.n) {
        return Err(Error::IdOutOfRange { id, n: x.n });
    }
    let renumber: BTreeMap<u32, u32> = keep
        .iter()
        .enumerate()
        .map(|(i, &id)| (id, i as u32))
        .collect();
    let map = |id: &u32| renumber.get(id).copied();
    let mut out = ThetaStructure::empty(x.alphabet.clone(), keep.len() as u32);
    out.p = x.p.iter().filter_map(map).collect();
    out.iota = x.iota.iter().filter_map(map).collect();
    out.tau = x.tau.iter().filter_map(map).collect();
    out.h =
        x.h.iter()
            .filter_map(|&(l, c, d)| Some((l, map(&c)?, map(&d)?)))
            .collect();
    out.s =
        x.s.iter()
            .filter_map(|q| Some([map(&q[0])?, map(&q[1])?, map(&q[2])?, map(&q[3])?]))
            .collect();
    Ok(out)
}

// ---------------------------------------------------------------------------
// Text formats
// ---------------------------------------------------------------------------

/// Non-empty, comment-stripped lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = match line.find('#') {
            Some(pos) => &line[..pos],
            None => line,
        };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            None
        } else {
            Some((i + 1, tokens))
        }
    })
}

struct Header<'a, I: Iterator<Item = (usize, Vec<&'a str>)>> {
    lines: std::iter::Peekable<I>,
}

impl<'a, I: Iterator<Item = (usize, Vec<&'a str>)>> Header<'a, I> {
    fn expect(&mut self, keyword: &str, args: usize) -> Result<(usize, Vec<&'a str>), ParseError> {
        match self.lines.next() {
            Some((line, tokens)) if tokens[0] == keyword => {
                if tokens.len() != args + 1 {
                    return Err(ParseError::new(
                        line,
                        format!(
                            "{keyword} expects {args} argument(s), got {}",
                            tokens.len() - 1
                        ),
                    ));
                }
                Ok((line, tokens))
            }
            Some((line, tokens)) => Err(ParseError::new(
                line,
                format!("expected {keyword:?}, found {:?}", tokens[0]),
            )),
            None => Err(ParseError::new(
                0,
                format!("unexpected end of input, expected {keyword:?}"),
            )),
        }
    }
}

pub(crate) fn parse_u32(line: usize, token: &str) -> Result<u32, ParseError> {
    token
        .parse::<u32>()
        .map_err(|_| ParseError::new(line, format!("invalid integer {token:?}")))
}

fn parse_id(line: usize, token: &str, n: u32) -> Result<u32, ParseError> {
    let id = parse_u32(line, token)?;
    if id >= n {
        return Err(ParseError::new(
            line,
            format!("id {id} out of range (domain {n})"),
        ));
    }
    Ok(id)
}

fn parse_alphabet_line(line: usize, token: &str) -> Result<Alphabet, ParseError> {
    Alphabet::new(token).map_err(|e| ParseError::new(line, e.to_string()))
}

fn arity_error(line: usize, keyword: &str, expected: usize, found: usize) -> ParseError {
    ParseError::new(
        line,
        format!("{keyword} expects {expected} argument(s), got {found}"),
    )
}

/// Parses the θ text format.
pub fn parse_theta(text: &str) -> Result<ThetaStructure, ParseError> {
    let mut header = Header {
        lines: content_lines(text).peekable(),
    };
    header.expect("theta", 0)?;
    let (line, tokens) = header.expect("alphabet", 1)?;
    let alphabet = parse_alphabet_line(line, tokens[1])?;
    let (line, tokens) = header.expect("domain", 1)?;
    let n = parse_u32(line, tokens[1])?;
    let mut x = ThetaStructure::empty(alphabet, n);

    for (line, tokens) in header.lines {
        let args = &tokens[1..];
        match tokens[0] {
            "P" | "iota" | "tau" => {
                let set = match tokens[0] {
                    "P" => &mut x.p,
                    "iota" => &mut x.iota,
                    _ => &mut x.tau,
                };
                for t in args {
                    set.insert(parse_id(line, t, n)?);
                }
            }
            "H" => {
                if args.len() != 3 {
                    return Err(arity_error(line, "H", 3, args.len()));
                }
                let mut chars = args[0].chars();
                let letter = match (chars.next(), chars.next()) {
                    (Some(c), None) => x.alphabet.index_of(c).ok_or_else(|| {
                        ParseError::new(line, format!("letter {c:?} is not in the alphabet"))
                    })?,
                    _ => {
                        return Err(ParseError::new(
                            line,
                            format!("H expects a single letter, got {:?}", args[0]),
                        ))
                    }
                };
                let c = parse_id(line, args[1], n)?;
                let d = parse_id(line, args[2], n)?;
                x.h.insert((letter, c, d));
            }
            "S" => {
                if args.len() != 4 {
                    return Err(arity_error(line, "S", 4, args.len()));
                }
                let mut q = [0u32; 4];
                for (slot, t) in q.iter_mut().zip(args) {
                    *slot = parse_id(line, t, n)?;
                }
                x.s.insert(q);
            }
            other => {
                return Err(ParseError::new(line, format!("unknown relation {other:?}")));
            }
        }
    }
    Ok(x)
}

fn push_ids(out: &mut String, ids: impl IntoIterator<Item = u32>) {
    for id in ids {
        let _ = write!(out, " {id}");
    }
}

/// Canonical θ text: header, then `P`, `iota`, `tau` (one line each when
/// non-empty), `H` lines ordered by letter then pair, `S` lines ordered.
pub fn serialize_theta(x: &ThetaStructure) -> String {
    let mut out = format!("theta\nalphabet {}\ndomain {}\n", x.alphabet, x.n);
    for (name, set) in [("P", &x.p), ("iota", &x.iota), ("tau", &x.tau)] {
        if !set.is_empty() {
            out.push_str(name);
            push_ids(&mut out, set.iter().copied());
            out.push('\n');
        }
    }
    for &(l, c, d) in &x.h {
        let _ = writeln!(out, "H {} {c} {d}", x.alphabet.letter(l));
    }
    for q in &x.s {
        let _ = writeln!(out, "S {} {} {} {}", q[0], q[1], q[2], q[3]);
    }
    out
}

/// Parses the ρ text format.
pub fn parse_rho(text: &str) -> Result<RhoStructure, ParseError> {
    let mut header = Header {
        lines: content_lines(text).peekable(),
    };
    header.expect("rho", 0)?;
    let (line, tokens) = header.expect("alphabet", 1)?;
    let alphabet = parse_alphabet_line(line, tokens[1])?;
    let (line, tokens) = header.expect("domain", 1)?;
    let n = parse_u32(line, tokens[1])?;
    let mut c = RhoStructure::empty(alphabet, n);

    for (line, tokens) in header.lines {
        if tokens[0] != "R" {
            return Err(ParseError::new(
                line,
                format!("unknown relation {:?}", tokens[0]),
            ));
        }
        if tokens.len() < 2 {
            return Err(ParseError::new(line, "R expects a word"));
        }
        let word = c
            .alphabet
            .relation_word(tokens[1])
            .map_err(|e| ParseError::new(line, e.to_string()))?;
        let ids = &tokens[2..];
        if ids.len() != word.len() {
            return Err(arity_error(line, "R", word.len() + 1, ids.len() + 1));
        }
        let tuple = ids
            .iter()
            .map(|t| parse_id(line, t, n))
            .collect::<Result<Vec<_>, _>>()?;
        c.facts.insert((word, tuple));
    }
    Ok(c)
}

pub fn serialize_rho(c: &RhoStructure) -> String {
    let mut out = format!("rho\nalphabet {}\ndomain {}\n", c.alphabet, c.n);
    for (w, t) in &c.facts {
        out.push_str("R ");
        out.push_str(&c.alphabet.render(w));
        push_ids(&mut out, t.iter().copied());
        out.push('\n');
    }
    out
}

/// Parses the graph text format. Loops are rejected.
pub fn parse_graph(text: &str) -> Result<Graph, ParseError> {
    let mut header = Header {
        lines: content_lines(text).peekable(),
    };
    header.expect("graph", 0)?;
    let (line, tokens) = header.expect("domain", 1)?;
    let n = parse_u32(line, tokens[1])?;
    let mut g = Graph::new(n);
    for (line, tokens) in header.lines {
        if tokens[0] != "edge" {
            return Err(ParseError::new(
                line,
                format!("unknown keyword {:?}", tokens[0]),
            ));
        }
        if tokens.len() != 3 {
            return Err(arity_error(line, "edge", 2, tokens.len() - 1));
        }
        let u = parse_id(line, tokens[1], n)?;
        let v = parse_id(line, tokens[2], n)?;
        if u == v {
            return Err(ParseError::new(line, format!("loop at vertex {u}")));
        }
        g.edges.insert((u.min(v), u.max(v)));
    }
    Ok(g)
}

pub fn serialize_graph(g: &Graph) -> String {
    let mut out = format!("graph\ndomain {}\n", g.n);
    for (u, v) in g.edges() {
        let _ = writeln!(out, "edge {u} {v}");
    }
    out
}

// ---------------------------------------------------------------------------
// Uniform relational view, used by the generic homomorphism search
// ---------------------------------------------------------------------------

/// One named relation of a structure, as a flat list of tuples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationView {
    pub name: String,
    pub arity: usize,
    pub tuples: Vec<Vec<u32>>,
}

/// Structures that can be searched for homomorphisms.
pub trait Relational {
    fn domain_size(&self) -> u32;

    /// Identifies the signature family; homomorphisms need equal tags.
    fn signature_tag(&self) -> String;

    /// Every relation symbol this structure interprets, possibly with no
    /// tuples. Names must be unique.
    fn relations(&self) -> Vec<RelationView>;
}

impl Relational for ThetaStructure {
    fn domain_size(&self) -> u32 {
        self.n
    }

    fn signature_tag(&self) -> String {
        format!("theta[{}]", self.alphabet)
    }

    fn relations(&self) -> Vec<RelationView> {
        let unary = |name: &str, set: &BTreeSet<u32>| RelationView {
            name: name.to_string(),
            arity: 1,
            tuples: set.iter().map(|&id| vec![id]).collect(),
        };
        let mut out = vec![
            unary("P", &self.p),
            unary("iota", &self.iota),
            unary("tau", &self.tau),
        ];
        for (li, &letter) in self.alphabet.letters().iter().enumerate() {
            out.push(RelationView {
                name: format!("H_{letter}"),
                arity: 2,
                tuples: self
                    .h
                    .iter()
                    .filter(|&&(l, _, _)| l as usize == li)
                    .map(|&(_, c, d)| vec![c, d])
                    .collect(),
            });
        }
        out.push(RelationView {
            name: "S".to_string(),
            arity: 4,
            tuples: self.s.iter().map(|q| q.to_vec()).collect(),
        });
        out
    }
}

impl Relational for RhoStructure {
    fn domain_size(&self) -> u32 {
        self.n
    }

    fn signature_tag(&self) -> String {
        format!("rho[{}]", self.alphabet)
    }

    fn relations(&self) -> Vec<RelationView> {
        let mut by_word: BTreeMap<&Word, Vec<Vec<u32>>> = BTreeMap::new();
        for (w, t) in &self.facts {
            by_word.entry(w).or_default().push(t.clone());
        }
        by_word
            .into_iter()
            .map(|(w, tuples)| RelationView {
                name: format!("R_{}", self.alphabet.render(w)),
                arity: w.len(),
                tuples,
            })
            .collect()
    }
}

impl Relational for Graph {
    fn domain_size(&self) -> u32 {
        self.n
    }

    fn signature_tag(&self) -> String {
        "graph".to_string()
    }

    fn relations(&self) -> Vec<RelationView> {
        let tuples = self
            .edges()
            .flat_map(|(u, v)| [vec![u, v], vec![v, u]])
            .collect();
        vec![RelationView {
            name: "E".to_string(),
            arity: 2,
            tuples,
        }]
    }
}

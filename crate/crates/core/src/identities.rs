//! Dissected weak near-unanimity identities.
//!
//! For `n > k > 1` the `(n, k)` system has binary symbols `g_1..g_n` and one
//! `k`-ary symbol `f_ψ` per injection `ψ: {1..k} -> {1..n}`, with identities
//!
//! ```text
//! f_ψ(x, .., x, y, x, .., x) = g_ψ(i)(x, y)     (y at position i)
//! ```
//!
//! for every `ψ` and every `i in 1..=k`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, ParseError, Result};
use crate::structures::parse_u32;

/// A total operation on `0..domain`, stored row-major over argument tuples
/// (the last argument varies fastest).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperationTable {
    arity: usize,
    domain: u32,
    values: Vec<u32>,
}

impl OperationTable {
    pub fn new(arity: usize, domain: u32, values: Vec<u32>) -> Result<Self> {
        if arity == 0 || domain == 0 {
            return Err(Error::BadParameters(
                "operation needs arity >= 1 and domain >= 1".into(),
            ));
        }
        let expected = (domain as usize).checked_pow(arity as u32).ok_or_else(|| {
            Error::BadParameters(format!(
                "table of arity {arity} over {domain} elements is too large"
            ))
        })?;
        if values.len() != expected {
            return Err(Error::BadParameters(format!(
                "table has {} entries, expected {expected}",
                values.len()
            )));
        }
        if let Some(&v) = values.iter().find(|&&v| v >= domain) {
            return Err(Error::DomainMismatch(format!(
                "table value {v} outside domain {domain}"
            )));
        }
        Ok(OperationTable {
            arity,
            domain,
            values,
        })
    }

    pub fn from_fn(arity: usize, domain: u32, f: impl Fn(&[u32]) -> u32) -> Result<Self> {
        let mut values = Vec::new();
        let mut args = vec![0u32; arity];
        loop {
            values.push(f(&args));
            // Odometer increment, last position fastest.
            let mut pos = arity;
            loop {
                if pos == 0 {
                    return Self::new(arity, domain, values);
                }
                pos -= 1;
                args[pos] += 1;
                if args[pos] < domain {
                    break;
                }
                args[pos] = 0;
            }
        }
    }

    /// The projection onto coordinate `coord` (0-based).
    pub fn projection(arity: usize, domain: u32, coord: usize) -> Result<Self> {
        if coord >= arity {
            return Err(Error::BadParameters(format!(
                "projection {coord} of arity {arity}"
            )));
        }
        Self::from_fn(arity, domain, |args| args[coord])
    }

    pub fn min(arity: usize, domain: u32) -> Result<Self> {
        Self::from_fn(arity, domain, |args| {
            *args.iter().min().expect("arity >= 1")
        })
    }

    /// Majority on `{0, 1}`-valued arguments; ties resolve to the smaller value.
    pub fn majority(arity: usize, domain: u32) -> Result<Self> {
        Self::from_fn(arity, domain, |args| {
            let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
            for &a in args {
                *counts.entry(a).or_default() += 1;
            }
            let best = counts.values().copied().max().unwrap_or(0);
            counts
                .into_iter()
                .find(|&(_, c)| c == best)
                .map(|(v, _)| v)
                .unwrap_or(0)
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn domain(&self) -> u32 {
        self.domain
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn eval(&self, args: &[u32]) -> u32 {
        debug_assert_eq!(args.len(), self.arity);
        let idx = args
            .iter()
            .fold(0usize, |acc, &a| acc * self.domain as usize + a as usize);
        self.values[idx]
    }

    /// `f(x, .., x, y, x, .., x)` with `y` at `position` (0-based).
    fn eval_near_unanimous(&self, x: u32, y: u32, position: usize) -> u32 {
        let mut args = vec![x; self.arity];
        args[position] = y;
        self.eval(&args)
    }
}

/// One identity: `f_ψ` with `y` at `position` equals `g_ψ(position)(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Identity {
    pub psi: usize,
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DwnuSystem {
    pub n: usize,
    pub k: usize,
    /// Injections `{0..k} -> {0..n}` in lexicographic order.
    pub injections: Vec<Vec<usize>>,
}

fn injections(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, k: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                go(n, k, cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(n, k, &mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn check_params(n: usize, k: usize) -> Result<()> {
    if !(n > k && k > 1) {
        return Err(Error::BadParameters(format!(
            "need n > k > 1, got n={n}, k={k}"
        )));
    }
    Ok(())
}

/// Builds the `(n, k)` system.
pub fn dwnu_system(n: usize, k: usize) -> Result<DwnuSystem> {
    check_params(n, k)?;
    Ok(DwnuSystem {
        n,
        k,
        injections: injections(n, k),
    })
}

impl DwnuSystem {
    pub fn identities(&self) -> impl Iterator<Item = Identity> + '_ {
        (0..self.injections.len())
            .flat_map(move |psi| (0..self.k).map(move |position| Identity { psi, position }))
    }

    pub fn identity_count(&self) -> usize {
        self.injections.len() * self.k
    }

    /// Index of an injection given by its 0-based images.
    pub fn injection_index(&self, images: &[usize]) -> Option<usize> {
        self.injections
            .binary_search_by(|inj| inj.as_slice().cmp(images))
            .ok()
    }

    /// `f_<ψ(1)>_..._<ψ(k)>` with 1-based images.
    pub fn f_name(&self, psi: usize) -> String {
        let parts: Vec<String> = self.injections[psi]
            .iter()
            .map(|i| (i + 1).to_string())
            .collect();
        format!("f_{}", parts.join("_"))
    }

    pub fn describe(&self, id: Identity) -> String {
        let mut args = vec!["x"; self.k];
        args[id.position] = "y";
        format!(
            "{}({}) = g_{}(x,y)",
            self.f_name(id.psi),
            args.join(","),
            self.injections[id.psi][id.position] + 1
        )
    }
}

/// Operation tables for every symbol of a system, over one shared domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub domain: u32,
    /// `g[i]` interprets `g_{i+1}`.
    pub g: Vec<OperationTable>,
    /// `f[psi]` interprets the injection with that index.
    pub f: Vec<OperationTable>,
}

impl Assignment {
    pub fn check(&self, system: &DwnuSystem) -> Result<()> {
        if self.g.len() != system.n {
            return Err(Error::ArityMismatch {
                symbol: "g".into(),
                expected: system.n,
                found: self.g.len(),
            });
        }
        if self.f.len() != system.injections.len() {
            return Err(Error::ArityMismatch {
                symbol: "f".into(),
                expected: system.injections.len(),
                found: self.f.len(),
            });
        }
        for (i, g) in self.g.iter().enumerate() {
            if g.arity != 2 {
                return Err(Error::ArityMismatch {
                    symbol: format!("g_{}", i + 1),
                    expected: 2,
                    found: g.arity,
                });
            }
        }
        for (psi, f) in self.f.iter().enumerate() {
            if f.arity != system.k {
                return Err(Error::ArityMismatch {
                    symbol: system.f_name(psi),
                    expected: system.k,
                    found: f.arity,
                });
            }
        }
        if let Some(op) = self
            .g
            .iter()
            .chain(&self.f)
            .find(|op| op.domain != self.domain)
        {
            return Err(Error::DomainMismatch(format!(
                "operation over {} elements in an assignment over {}",
                op.domain, self.domain
            )));
        }
        Ok(())
    }

    /// Restricts an assignment for `(m, k)` to the `(n, k)` subsystem.
    pub fn restrict(&self, from: &DwnuSystem, to: &DwnuSystem) -> Result<Assignment> {
        if to.k != from.k || to.n > from.n {
            return Err(Error::BadParameters(format!(
                "({}, {}) is not a subsystem of ({}, {})",
                to.n, to.k, from.n, from.k
            )));
        }
        let f = to
            .injections
            .iter()
            .map(|inj| {
                let idx = from.injection_index(inj).expect("injection into a prefix");
                self.f[idx].clone()
            })
            .collect();
        Ok(Assignment {
            domain: self.domain,
            g: self.g[..to.n].to_vec(),
            f,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Evaluation {
    Satisfied,
    Violated { identity: Identity, x: u32, y: u32 },
}

impl Evaluation {
    pub fn holds(&self) -> bool {
        matches!(self, Evaluation::Satisfied)
    }
}

/// Evaluates every identity for all `x, y` in `subset` (default: the whole
/// domain), reporting the first failure in identity order, then `x`, then `y`.
pub fn eval_dwnu(
    system: &DwnuSystem,
    assignment: &Assignment,
    subset: Option<&[u32]>,
) -> Result<Evaluation> {
    assignment.check(system)?;
    let full: Vec<u32> = (0..assignment.domain).collect();
    let values = subset.unwrap_or(&full);
    if let Some(&v) = values.iter().find(|&&v| v >= assignment.domain) {
        return Err(Error::DomainMismatch(format!(
            "subset element {v} outside domain {}",
            assignment.domain
        )));
    }
    for id in system.identities() {
        let f = &assignment.f[id.psi];
        let g = &assignment.g[system.injections[id.psi][id.position]];
        for &x in values {
            for &y in values {
                if f.eval_near_unanimous(x, y, id.position) != g.eval(&[x, y]) {
                    return Ok(Evaluation::Violated { identity: id, x, y });
                }
            }
        }
    }
    Ok(Evaluation::Satisfied)
}

/// A satisfying choice of projections: `g_second[i]` tells whether `g_{i+1}`
/// is the second projection, `f_coord[psi]` the coordinate `f_ψ` projects to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectionModel {
    pub g_second: Vec<bool>,
    pub f_coord: Vec<usize>,
}

impl ProjectionModel {
    /// The model as concrete tables on `{0, 1}`.
    pub fn to_assignment(&self, system: &DwnuSystem) -> Assignment {
        Assignment {
            domain: 2,
            g: self
                .g_second
                .iter()
                .map(|&second| {
                    OperationTable::projection(2, 2, usize::from(second)).expect("binary")
                })
                .collect(),
            f: self
                .f_coord
                .iter()
                .map(|&c| OperationTable::projection(system.k, 2, c).expect("k-ary"))
                .collect(),
        }
    }
}

/// Decides whether projections on a two-element set satisfy the `(n, k)`
/// system.
///
/// Only the `g`'s are shared between identities of different `f_ψ`, so for
/// each of the `2^n` choices of `g`'s every `f_ψ` is chosen independently.
/// With `f_ψ = π_j`, the identity with `y` at position `i` has left side `y`
/// iff `j = i`, and the right side is `y` iff `g_ψ(i)` is the second
/// projection.
pub fn projection_satisfiable(n: usize, k: usize) -> Result<Option<ProjectionModel>> {
    check_params(n, k)?;
    if n >= usize::BITS as usize {
        return Err(Error::BadParameters(format!("n={n} too large")));
    }
    let system = dwnu_system(n, k)?;
    for mask in 0u64..(1u64 << n) {
        let g_second: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        let f_coord: Option<Vec<usize>> = system
            .injections
            .iter()
            .map(|inj| (0..k).find(|&j| (0..k).all(|i| (j == i) == g_second[inj[i]])))
            .collect();
        if let Some(f_coord) = f_coord {
            return Ok(Some(ProjectionModel { g_second, f_coord }));
        }
    }
    Ok(None)
}

/// Every `f_ψ := f` and `g_i(x, y) := f(y, x, .., x)`. Requires `f` to
/// satisfy the weak near-unanimity identities.
pub fn wnu_model(f: &OperationTable, n: usize) -> Result<Assignment> {
    let k = f.arity;
    check_params(n, k)?;
    let d = f.domain;
    for x in 0..d {
        for y in 0..d {
            let first = f.eval_near_unanimous(x, y, 0);
            if (1..k).any(|i| f.eval_near_unanimous(x, y, i) != first) {
                return Err(Error::NotWnu { x, y });
            }
        }
    }
    let g = OperationTable::from_fn(2, d, |args| f.eval_near_unanimous(args[0], args[1], 0))?;
    let count = injections(n, k).len();
    Ok(Assignment {
        domain: d,
        g: vec![g; n],
        f: vec![f.clone(); count],
    })
}

/// Parsed operation-table file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpsFile {
    pub domain: u32,
    pub ops: Vec<(String, OperationTable)>,
}

/// Reads `ops`, `domain <d>`, then blocks `op <name> <arity>` followed by
/// `d^arity` values. Values may span lines.
pub fn parse_ops(text: &str) -> Result<OpsFile, ParseError> {
    let mut tokens = text.lines().enumerate().flat_map(|(i, line)| {
        let body = line.split('#').next().unwrap_or("");
        body.split_whitespace().map(move |t| (i + 1, t))
    });
    let mut next = |what: &str| {
        tokens
            .next()
            .ok_or_else(|| ParseError::new(0, format!("unexpected end of input, expected {what}")))
    };
    let (line, header) = next("\"ops\"")?;
    if header != "ops" {
        return Err(ParseError::new(line, "expected \"ops\" header"));
    }
    let (line, kw) = next("\"domain\"")?;
    if kw != "domain" {
        return Err(ParseError::new(line, "expected \"domain\""));
    }
    let (line, d) = next("domain size")?;
    let domain = parse_u32(line, d)?;
    if domain == 0 {
        return Err(ParseError::new(line, "domain must be non-empty"));
    }
    let mut ops = Vec::new();
    while let Ok((line, kw)) = next("op") {
        if kw != "op" {
            return Err(ParseError::new(
                line,
                format!("expected \"op\", found {kw:?}"),
            ));
        }
        let (_, name) = next("operation name")?;
        let (line, a) = next("arity")?;
        let arity = parse_u32(line, a)? as usize;
        if arity == 0 || arity > 16 {
            return Err(ParseError::new(line, format!("unsupported arity {arity}")));
        }
        let count = (domain as usize)
            .checked_pow(arity as u32)
            .ok_or_else(|| ParseError::new(line, "table too large"))?;
        let mut values = Vec::with_capacity(count);
        for _ in 0..count {
            let (line, v) = next("table value")?;
            let v = parse_u32(line, v)?;
            if v >= domain {
                return Err(ParseError::new(
                    line,
                    format!("value {v} outside domain {domain}"),
                ));
            }
            values.push(v);
        }
        let table = OperationTable::new(arity, domain, values)
            .map_err(|e| ParseError::new(line, e.to_string()))?;
        ops.push((name.to_string(), table));
    }
    Ok(OpsFile { domain, ops })
}

impl OpsFile {
    /// Resolves names against a system: `g_<i>` and `f_<i1>_.._<ik>`
    /// (1-based), with `g` and `f` as defaults for unnamed symbols.
    pub fn assignment(&self, system: &DwnuSystem) -> Result<Assignment> {
        let by_name: BTreeMap<&str, &OperationTable> =
            self.ops.iter().map(|(n, t)| (n.as_str(), t)).collect();
        let lookup = |name: &str, fallback: &str| {
            by_name
                .get(name)
                .or_else(|| by_name.get(fallback))
                .map(|t| (*t).clone())
                .ok_or_else(|| Error::BadParameters(format!("no operation for symbol {name}")))
        };
        let g = (0..system.n)
            .map(|i| lookup(&format!("g_{}", i + 1), "g"))
            .collect::<Result<Vec<_>>>()?;
        let f = (0..system.injections.len())
            .map(|psi| lookup(&system.f_name(psi), "f"))
            .collect::<Result<Vec<_>>>()?;
        let assignment = Assignment {
            domain: self.domain,
            g,
            f,
        };
        assignment.check(system)?;
        Ok(assignment)
    }
}

impl fmt::Display for OperationTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vals: Vec<String> = self.values.iter().map(u32::to_string).collect();
        write!(f, "{}", vals.join(" "))
    }
}

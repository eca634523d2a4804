//! Finite machinery for the Hrushovski encoding of CSP templates over word
//! signatures.
//!
//! * [`structures`]: θ-structures, word-signature structures, graphs, and
//!   their text formats.
//! * [`encode`] / [`decode`]: edge structures, canonical codes, valid codes,
//!   separatedness and decoding.
//! * [`language`]: word-language oracles with prefix viability.
//! * [`solver`]: the CSP decision procedure for encoded trivial structures
//!   and a generic homomorphism search.
//! * [`reductions`]: word and clique instances, finite exception sets.
//! * [`identities`]: dissected weak near-unanimity identities.
//! * [`toolkit`]: strong amalgamation and seeded generators.

pub mod decode;
pub mod encode;
pub mod error;
pub mod identities;
pub mod language;
pub mod reductions;
pub mod solver;
pub mod structures;
pub mod toolkit;

pub use decode::{
    decode, enumerate_codes, first_code, for_each_code, is_separated, SeparationViolation,
    ValidCode, ViolationKind,
};
pub use encode::{canonical_code, edge_structure};
pub use error::{Error, ParseError, Result};
pub use language::{parse_language_spec, Dfa, LanguageOracle};
pub use solver::{
    find_forbidden_code, hom_search, solve, solve_with, Answer, Decision, HomMode, HomOptions,
    Homomorphism, SolveOptions, Witness,
};
pub use structures::{
    induced_substructure, parse_graph, parse_rho, parse_theta, serialize_graph, serialize_rho,
    serialize_theta, Alphabet, Graph, Relational, RhoStructure, ThetaStructure, Word,
};

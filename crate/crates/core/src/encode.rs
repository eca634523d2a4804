//! Edge structures and the canonical code of a word-signature structure.

use crate::error::{Error, Result};
use crate::structures::{Alphabet, RhoStructure, ThetaStructure, Word};

fn require_relation_word(w: &Word, alphabet: &Alphabet) -> Result<()> {
    if let Some(&l) = w.letters().iter().find(|&&l| l as usize >= alphabet.len()) {
        return Err(Error::SignatureMismatch(format!(
            "letter index {l} out of range"
        )));
    }
    if w.len() < 2 {
        return Err(Error::WordTooShort {
            word: alphabet.render(w),
            len: w.len(),
        });
    }
    Ok(())
}

/// The structure on `0..|w|` whose only fact is `R_w(0, 1, ..., |w|-1)`.
pub fn edge_structure(w: &Word, alphabet: &Alphabet) -> Result<RhoStructure> {
    require_relation_word(w, alphabet)?;
    let mut c = RhoStructure::empty(alphabet.clone(), w.len() as u32);
    c.facts.insert((w.clone(), (0..w.len() as u32).collect()));
    Ok(c)
}

/// Same as [`edge_structure`], reading the word from text.
pub fn edge_structure_str(w: &str, alphabet: &Alphabet) -> Result<RhoStructure> {
    edge_structure(&alphabet.relation_word(w)?, alphabet)
}

/// Builds the canonical code of `c`.
///
/// The base elements keep their ids and form `P`. Each fact `(w, t)`
/// receives `|w|` fresh code elements, allocated in sorted `(w, t, position)`
/// order. Code element `i` carries an `H_{w_i}` edge to code element `i+1`
/// (cyclically), the first is marked `iota`, the last `tau`, and `S` links
/// `(t_i, t_j, code_i, code_j)` for every `i != j`.
pub fn canonical_code(c: &RhoStructure) -> Result<ThetaStructure> {
    let mut x = ThetaStructure::empty(c.alphabet.clone(), c.n);
    x.p = (0..c.n).collect();
    for (w, t) in &c.facts {
        require_relation_word(w, &c.alphabet)?;
        let len = w.len();
        let first = x.n;
        x.n += len as u32;
        let code = |i: usize| first + i as u32;
        x.iota.insert(code(0));
        x.tau.insert(code(len - 1));
        for (i, &letter) in w.letters().iter().enumerate() {
            x.h.insert((letter, code(i), code((i + 1) % len)));
        }
        for i in 0..len {
            for j in 0..len {
                if i != j {
                    x.s.insert([t[i], t[j], code(i), code(j)]);
                }
            }
        }
    }
    Ok(x)
}

//! Seeded instances shared by the benchmark suites.

use thetacode::toolkit::{plant_code, random_separated, GenParams, SeededRng};
use thetacode::{Alphabet, Dfa, LanguageOracle, ThetaStructure};

/// Words over {a,b} containing `abbab`.
pub const CONTAINS_ABBAB: &str = "dfa\nalphabet ab\nstates 6\nstart 0\naccept 5\n\
    trans 0 a 1\ntrans 0 b 0\ntrans 1 a 1\ntrans 1 b 2\ntrans 2 a 1\ntrans 2 b 3\n\
    trans 3 a 4\ntrans 3 b 0\ntrans 4 a 1\ntrans 4 b 5\ntrans 5 a 5\ntrans 5 b 5\n";

pub fn ab() -> Alphabet {
    Alphabet::new("ab").expect("static alphabet")
}

/// A random separated base of `n` elements with a planted `abbabaabab` code.
pub fn planted(n: u32, seed: u64) -> ThetaStructure {
    let sigma = ab();
    let base = random_separated(&GenParams::new(n, sigma.clone(), seed)).expect("valid params");
    let w = sigma.relation_word("abbabaabab").expect("static word");
    plant_code(&base, &w, &mut SeededRng::new(seed)).expect("separated base")
}

/// Denser separated structure where many short codes exist.
pub fn dense(n: u32, seed: u64) -> ThetaStructure {
    let params = GenParams {
        iota_density: 0.4,
        tau_density: 0.4,
        h_density: 0.3,
        s_density: 0.3,
        ..GenParams::new(n, ab(), seed)
    };
    random_separated(&params).expect("valid params")
}

pub fn abbab_language() -> LanguageOracle {
    let dfa = Dfa::parse(CONTAINS_ABBAB).expect("static automaton");
    LanguageOracle::dfa(&ab(), &dfa).expect("same alphabet")
}

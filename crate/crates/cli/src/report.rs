//! Single-line JSON records for `--json`.

use std::time::Instant;

use serde_json::{json, Map, Value};

use thetacode::{Alphabet, Decision, SeparationViolation, ValidCode, Witness};

/// Command name and elapsed time of the core call, captured right after it
/// returns.
pub struct Report {
    command: &'static str,
    elapsed_ms: f64,
}

impl Report {
    pub fn new(command: &'static str, start: Instant) -> Self {
        Report {
            command,
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        }
    }

    /// Prints `{"command", <fields>, "timings"}` on one line. Everything
    /// except `timings` is deterministic for a given input.
    pub fn print(&self, fields: Value) {
        let mut record = Map::new();
        record.insert("command".into(), json!(self.command));
        if let Value::Object(fields) = fields {
            record.extend(fields);
        }
        record.insert("timings".into(), json!({ "total_ms": self.elapsed_ms }));
        println!("{}", Value::Object(record));
    }
}

pub fn ids(ids: &[u32]) -> String {
    ids.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

pub fn code(c: &ValidCode, alphabet: &Alphabet) -> Value {
    json!({ "kind": "valid-code", "word": alphabet.render(&c.word), "a": c.a, "c": c.c })
}

pub fn violation(v: &SeparationViolation, alphabet: &Alphabet) -> Value {
    json!({
        "kind": "not-separated",
        "violation": v.kind.as_str(),
        "letter": v.letter.map(|l| alphabet.letter(l).to_string()),
        "ids": v.witness,
    })
}

pub fn decision(d: &Decision, alphabet: &Alphabet) -> Value {
    let witness = match d.witness() {
        None => Value::Null,
        Some(Witness::Code(c)) => code(c, alphabet),
        Some(Witness::Separation(v)) => violation(v, alphabet),
    };
    json!({ "answer": if d.is_yes() { "YES" } else { "NO" }, "witness": witness })
}

//! Report assembly and emission in the supported output formats.

use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    Violated,
    InputError,
    Budget,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::Violated => 1,
            Status::InputError => 2,
            Status::Budget => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Violated => "violated",
            Status::InputError => "error",
            Status::Budget => "budget",
        }
    }
}

pub struct Report {
    pub verb: &'static str,
    pub status: Status,
    pub lines: Vec<String>,
    pub fields: Map<String, Value>,
    pub csv: Option<String>,
    pub dot: Option<String>,
}

impl Report {
    pub fn new(verb: &'static str) -> Report {
        Report {
            verb,
            status: Status::Ok,
            lines: Vec::new(),
            fields: Map::new(),
            csv: None,
            dot: None,
        }
    }

    pub fn line(&mut self, s: impl Into<String>) -> &mut Report {
        self.lines.push(s.into());
        self
    }

    pub fn field(&mut self, key: &str, v: impl Into<Value>) -> &mut Report {
        self.fields.insert(key.to_string(), v.into());
        self
    }

    pub fn json(&self) -> Value {
        let mut m = Map::new();
        m.insert("verb".into(), self.verb.into());
        m.insert("status".into(), self.status.name().into());
        m.insert("exit".into(), self.status.code().into());
        for (k, v) in &self.fields {
            m.insert(k.clone(), v.clone());
        }
        Value::Object(m)
    }
}

/// Verdict words, coloured when `WO_COLOR=1`.
pub fn verdict(yes: bool) -> String {
    let word = if yes { "yes" } else { "no" };
    paint(word, yes)
}

pub fn paint(word: &str, good: bool) -> String {
    if std::env::var("WO_COLOR").as_deref() == Ok("1") {
        let code = if good { 32 } else { 31 };
        format!("\x1b[{code}m{word}\x1b[0m")
    } else {
        word.to_string()
    }
}

//! Sectioned `key = value` text format.
//!
//! ```text
//! # comment
//! [section]
//! key = value   # trailing comment
//! ```
//!
//! Section and key names are lowercase ASCII letters, digits, `_` and `-`.
//! Every key belongs to a section; sections and keys may not repeat.
//! Values are the trimmed text after `=`; `#` always starts a comment.

use std::fmt;

use super::ConfigError;

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

impl Section {
    pub fn new(name: &str) -> Self {
        Section { name: name.to_string(), line: 0, entries: Vec::new() }
    }

    pub fn push(&mut self, key: &str, value: impl Into<String>) {
        self.entries.push(Entry { key: key.to_string(), value: value.into(), line: 0 });
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document {
    pub sections: Vec<Section>,
}

fn valid_name(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_' || b == b'-')
}

fn syntax(line: usize, msg: impl Into<String>) -> ConfigError {
    ConfigError::Syntax { line, msg: msg.into() }
}

impl Document {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut doc = Document::default();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(rest) = body.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| syntax(line, "unterminated section header"))?.trim();
                if !valid_name(name) {
                    return Err(syntax(line, format!("invalid section name `{name}`")));
                }
                if let Some(prev) = doc.section(name) {
                    return Err(syntax(line, format!("section [{name}] already opened on line {}", prev.line)));
                }
                doc.sections.push(Section { name: name.to_string(), line, entries: Vec::new() });
                continue;
            }
            let (key, value) =
                body.split_once('=').ok_or_else(|| syntax(line, "expected `key = value` or `[section]`"))?;
            let (key, value) = (key.trim(), value.trim());
            if !valid_name(key) {
                return Err(syntax(line, format!("invalid key `{key}`")));
            }
            let section = doc
                .sections
                .last_mut()
                .ok_or_else(|| syntax(line, format!("key `{key}` appears before any section")))?;
            if let Some(prev) = section.entries.iter().find(|e| e.key == key) {
                return Err(syntax(line, format!("duplicate key `{key}` (first on line {})", prev.line)));
            }
            section.entries.push(Entry { key: key.to_string(), value: value.to_string(), line });
        }
        Ok(doc)
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn take(&mut self, name: &str) -> Option<Section> {
        let idx = self.sections.iter().position(|s| s.name == name)?;
        Some(self.sections.remove(idx))
    }
}

impl fmt::Display for Document {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.sections.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            writeln!(f, "[{}]", s.name)?;
            for e in &s.entries {
                writeln!(f, "{} = {}", e.key, e.value)?;
            }
        }
        Ok(())
    }
}

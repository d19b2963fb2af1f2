//! Minimal INI reader that remembers where everything came from.
//!
//! Sections may repeat (`[waypoint]` appears once per waypoint), so a document is an ordered
//! list of sections rather than a map. Lines starting with `#` or `;` are comments, and a `#`
//! after a value starts a trailing comment.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

impl Section {
    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Document {
    pub sections: Vec<Section>,
}

impl Document {
    pub fn sections<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Section> + 'a {
        self.sections.iter().filter(move |s| s.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct SyntaxError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

fn strip_comment(s: &str) -> &str {
    match s.find('#') {
        Some(i) => &s[..i],
        None => s,
    }
}

fn valid_name(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
}

/// Parses `bytes`. Every input either yields a document or the first offending line.
pub fn parse(bytes: &[u8]) -> Result<Document, SyntaxError> {
    let mut doc = Document::default();
    for (i, raw) in bytes.split(|b| *b == b'\n').enumerate() {
        let line = i + 1;
        let err = |message: &str| SyntaxError {
            line,
            message: message.into(),
        };
        let text = std::str::from_utf8(raw).map_err(|_| err("not valid UTF-8"))?;
        let text = text.trim();
        if text.is_empty() || text.starts_with('#') || text.starts_with(';') {
            continue;
        }
        if let Some(rest) = text.strip_prefix('[') {
            let rest = strip_comment(rest).trim_end();
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| err("section header is missing `]`"))?
                .trim();
            if !valid_name(name) {
                return Err(err("invalid section name"));
            }
            doc.sections.push(Section {
                name: name.into(),
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let (key, value) = text
            .split_once('=')
            .ok_or_else(|| err("expected `key = value` or `[section]`"))?;
        let key = key.trim();
        if !valid_name(key) {
            return Err(err("invalid key"));
        }
        let section = doc
            .sections
            .last_mut()
            .ok_or_else(|| err("key outside of any section"))?;
        if section.get(key).is_some() {
            return Err(err(&format!("duplicate key `{key}`")));
        }
        section.entries.push(Entry {
            key: key.into(),
            value: strip_comment(value).trim().into(),
            line,
        });
    }
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_comments() {
        let doc = parse(b"# top\n[a]\nx = 1 # one\n; note\n[b]\n[a]\ny=two words\n").unwrap();
        assert_eq!(doc.sections.len(), 3);
        assert_eq!(doc.sections("a").count(), 2);
        let x = doc.sections[0].get("x").unwrap();
        assert_eq!((x.value.as_str(), x.line), ("1", 3));
        assert_eq!(doc.sections[2].get("y").unwrap().value, "two words");
    }

    #[test]
    fn errors_carry_lines() {
        let cases: [(&[u8], usize); 6] = [
            (b"x = 1\n", 1),
            (b"[a]\n\n[b\n", 3),
            (b"[a]\nnovalue\n", 2),
            (b"[a]\nx=1\nx=2\n", 3),
            (b"[a]\n = 1\n", 2),
            (b"[a]\nx = \xff\n", 2),
        ];
        for (text, line) in cases {
            assert_eq!(parse(text).unwrap_err().line, line, "{:?}", String::from_utf8_lossy(text));
        }
    }

    #[test]
    fn crlf_is_accepted() {
        let doc = parse(b"[a]\r\nx = 1\r\n").unwrap();
        assert_eq!(doc.sections[0].get("x").unwrap().value, "1");
    }
}

//! Minimal INI reader: `[section]` headers, `key = value` lines, `#`
//! comments. Section and key order is preserved.

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Section {
    pub name: String,
    pub entries: Vec<(String, String)>,
}

pub fn parse_ini(text: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    let mut errors = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim().to_string();
            if sections.iter().any(|s| s.name == name) {
                errors.push(format!("line {line_no}: duplicate section [{name}]"));
            }
            sections.push(Section { name, entries: Vec::new() });
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            errors.push(format!("line {line_no}: expected 'key = value'"));
            continue;
        };
        let Some(section) = sections.last_mut() else {
            errors.push(format!("line {line_no}: key outside any section"));
            continue;
        };
        let key = key.trim().to_string();
        if section.entries.iter().any(|(k, _)| *k == key) {
            errors.push(format!("line {line_no}: duplicate key '{key}' in [{}]", section.name));
            continue;
        }
        section.entries.push((key, value.trim().to_string()));
    }
    if errors.is_empty() {
        Ok(sections)
    } else {
        Err(Error::Config(errors.join("; ")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_comments() {
        let s = parse_ini("# top\n[a]\nx = 1 # trailing\n\n[b.c]\ny=two words\n").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].entries, vec![("x".to_string(), "1".to_string())]);
        assert_eq!(s[1].name, "b.c");
        assert_eq!(s[1].entries[0].1, "two words");
    }

    #[test]
    fn reports_every_problem() {
        let err = parse_ini("x = 1\n[a]\nnot a pair\n[a]\n").unwrap_err().to_string();
        assert!(err.contains("line 1") && err.contains("line 3") && err.contains("line 4"));
    }
}

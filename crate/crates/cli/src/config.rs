//! Flat `key = value` configuration text.
//!
//! One assignment per line. Blank lines and lines starting with `#` are
//! skipped, and a `#` preceded by whitespace starts a trailing comment.
//! Keys are made of ASCII letters, digits, `_` and `.`; repeating a key is an
//! error.

use std::collections::BTreeMap;

use crate::error::{CliError, Result};

pub type ConfigMap = BTreeMap<String, String>;

fn valid_key(key: &str) -> bool {
    !key.is_empty()
        && key
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'.')
}

fn strip_comment(line: &str) -> &str {
    let bytes = line.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        if b == b'#' && (i == 0 || bytes[i - 1].is_ascii_whitespace()) {
            return &line[..i];
        }
    }
    line
}

/// Splits one `key = value` assignment.
pub fn parse_assignment(text: &str) -> std::result::Result<(String, String), String> {
    let (key, value) = text
        .split_once('=')
        .ok_or_else(|| format!("expected `key = value`, got `{}`", text.trim()))?;
    let key = key.trim();
    let value = value.trim();
    if !valid_key(key) {
        return Err(format!("invalid key `{key}`"));
    }
    if value.is_empty() {
        return Err(format!("`{key}` has an empty value"));
    }
    Ok((key.to_string(), value.to_string()))
}

pub fn parse_config(text: &str) -> Result<ConfigMap> {
    let mut map = ConfigMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let syntax = |message| CliError::Syntax {
            line: i + 1,
            message,
        };
        let (key, value) = parse_assignment(line).map_err(syntax)?;
        if map.contains_key(&key) {
            return Err(syntax(format!("`{key}` is set twice")));
        }
        map.insert(key, value);
    }
    Ok(map)
}

/// Parses a `--set key=value` override.
pub fn parse_override(text: &str) -> Result<(String, String)> {
    parse_assignment(text).map_err(|m| CliError::Usage(format!("--set: {m}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_assignments_and_comments() {
        let map =
            parse_config("# header\n\nn_bar = 10  # photons\nscheme=epr\nurl = a#b\n").unwrap();
        assert_eq!(map["n_bar"], "10");
        assert_eq!(map["scheme"], "epr");
        assert_eq!(map["url"], "a#b");
        assert_eq!(map.len(), 3);
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_config("a = 1\n\nbad line\n").unwrap_err();
        assert!(matches!(err, CliError::Syntax { line: 3, .. }), "{err}");
        assert!(parse_config("a = 1\na = 2").is_err());
        assert!(parse_config("a =").is_err());
        assert!(parse_config("a b = 1").is_err());
    }

    #[test]
    fn override_syntax() {
        assert_eq!(
            parse_override("chi=0.05").unwrap(),
            ("chi".into(), "0.05".into())
        );
        assert!(parse_override("chi").is_err());
    }
}

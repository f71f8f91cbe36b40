use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{is_word_char, CorpusError};

/// Text normalization rules applied to every comment.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NormalizationConfig {
    /// Whole-word abbreviation expansions, e.g. `GoNU` → `Government of National Unity`.
    pub abbreviation_map: BTreeMap<String, String>,
    /// Spelling unification for named entities.
    pub entity_map: BTreeMap<String, String>,
    /// Multi-word expressions joined with `_` (matched case-insensitively).
    pub phrase_list: Vec<String>,
    /// Literal non-conversational markers removed from the text.
    pub strip_patterns: Vec<String>,
}

impl NormalizationConfig {
    pub fn validate(&self) -> Result<(), CorpusError> {
        let bad = |m: String| Err(CorpusError::InvalidConfig(m));
        let maps = [
            ("abbreviation_map", &self.abbreviation_map),
            ("entity_map", &self.entity_map),
        ];
        for (name, map) in maps {
            for (k, v) in map {
                if k.trim().is_empty() {
                    return bad(format!("{name} has an empty key"));
                }
                // a value containing any key would expand forever
                for (k2, _) in self.abbreviation_map.iter().chain(&self.entity_map) {
                    if find_whole(
                        &v.chars().collect::<Vec<_>>(),
                        &k2.chars().collect::<Vec<_>>(),
                        0,
                        false,
                    )
                    .is_some()
                    {
                        return bad(format!("{name}: value of `{k}` contains the key `{k2}`"));
                    }
                }
            }
        }
        for p in &self.phrase_list {
            if p.split_whitespace().count() < 2 {
                return bad(format!("phrase `{p}` has fewer than two words"));
            }
        }
        for s in &self.strip_patterns {
            if s.trim().is_empty() || s.trim() != s {
                return bad(format!("strip pattern `{s}` is empty or padded with whitespace"));
            }
        }
        Ok(())
    }
}

fn is_format_char(c: char) -> bool {
    matches!(c,
        '\u{00AD}' | '\u{061C}' | '\u{180E}'
        | '\u{200B}'..='\u{200F}'
        | '\u{202A}'..='\u{202E}'
        | '\u{2060}'..='\u{206F}'
        | '\u{FEFF}'
        | '\u{FFF9}'..='\u{FFFB}')
}

fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn boundary_before(text: &[char], i: usize) -> bool {
    i == 0 || !is_word_char(text[i - 1])
}

fn boundary_after(text: &[char], end: usize) -> bool {
    end >= text.len() || !is_word_char(text[end])
}

fn chars_eq(a: char, b: char, fold: bool) -> bool {
    a == b || (fold && a.to_lowercase().eq(b.to_lowercase()))
}

/// Next whole-word occurrence of `needle` at or after `from`.
fn find_whole(text: &[char], needle: &[char], from: usize, fold: bool) -> Option<usize> {
    if needle.is_empty() || needle.len() > text.len() {
        return None;
    }
    (from..=text.len() - needle.len()).find(|&i| {
        boundary_before(text, i)
            && boundary_after(text, i + needle.len())
            && text[i..i + needle.len()]
                .iter()
                .zip(needle)
                .all(|(&a, &b)| chars_eq(a, b, fold))
    })
}

fn replace_whole(text: &str, key: &str, value: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let needle: Vec<char> = key.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut pos = 0;
    while let Some(i) = find_whole(&chars, &needle, pos, false) {
        out.extend(&chars[pos..i]);
        out.push_str(value);
        pos = i + needle.len();
    }
    out.extend(&chars[pos..]);
    out
}

fn merge_phrase(text: &str, phrase: &str) -> String {
    let mut chars: Vec<char> = text.chars().collect();
    let needle: Vec<char> = collapse_whitespace(phrase).chars().collect();
    let mut pos = 0;
    while let Some(i) = find_whole(&chars, &needle, pos, true) {
        for c in &mut chars[i..i + needle.len()] {
            if *c == ' ' {
                *c = '_';
            }
        }
        pos = i + needle.len();
    }
    chars.into_iter().collect()
}

fn strip_markers(text: &str, patterns: &[String]) -> String {
    let mut cur = collapse_whitespace(text);
    loop {
        let mut next = cur.clone();
        for p in patterns {
            next = next.replace(p.as_str(), " ");
        }
        let next = collapse_whitespace(&next);
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

fn normalize_once(text: &str, cfg: &NormalizationConfig) -> String {
    let mut s = strip_markers(text, &cfg.strip_patterns);
    for (k, v) in &cfg.abbreviation_map {
        s = replace_whole(&s, k, v);
    }
    for (k, v) in &cfg.entity_map {
        s = replace_whole(&s, k, v);
    }
    s = collapse_whitespace(&s);
    for p in &cfg.phrase_list {
        s = merge_phrase(&s, p);
    }
    s
}

const MAX_PASSES: usize = 16;

/// Normalizes raw note text. Case is preserved.
///
/// Control and zero-width/formatting characters are removed, strip patterns
/// dropped, abbreviations and entity spellings replaced on whole words,
/// configured phrases joined with `_` and whitespace collapsed. The rules are
/// applied until the text stops changing, so the function is idempotent.
pub fn clean_text(raw: &str, cfg: &NormalizationConfig) -> String {
    let mut s: String = raw
        .chars()
        .filter(|&c| !is_format_char(c))
        .map(|c| if c.is_control() { ' ' } else { c })
        .collect();
    for _ in 0..MAX_PASSES {
        let next = normalize_once(&s, cfg);
        if next == s {
            break;
        }
        s = next;
    }
    s
}

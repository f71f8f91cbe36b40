//! Fixed English stopword list (the 179-word list shipped by common NLP toolkits).

use std::collections::HashSet;

const ENGLISH: &str = include_str!("../data/stopwords_en.txt");

pub fn english() -> HashSet<String> {
    ENGLISH
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}

/// Reads a one-word-per-line list, lowercasing entries.
pub fn from_text(text: &str) -> HashSet<String> {
    text.lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

#[cfg(test)]
mod tests {
    #[test]
    fn list_size() {
        let words = super::english();
        assert_eq!(words.len(), 179);
        assert!(words.contains("the") && words.contains("wouldn't"));
    }
}

//! Rough-note grammar.
//!
//! ```text
//! Name (Organisation): text of the turn
//!     indented continuation of the same turn
//! Name A (OrgX) & Name B (OrgY): shared statement
//! ```
//!
//! Turn headers start at column 0. Indented lines continue the preceding turn.
//! Other unindented lines (session titles, agenda items) are not conversation:
//! they are dropped and close the current turn.

use log::warn;

use super::{clean_text, Comment, CommentId, CorpusError, NormalizationConfig, SessionMeta};

#[derive(Debug, Clone, PartialEq)]
pub struct ParseIssue {
    pub source_file: String,
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedNotes {
    pub comments: Vec<Comment>,
    pub issues: Vec<ParseIssue>,
}

struct Header {
    speakers: Vec<(String, String)>,
    text: String,
}

fn parse_speaker(group: &str) -> Option<(String, String)> {
    let group = group.trim();
    let open = group.find('(')?;
    if !group.ends_with(')') {
        return None;
    }
    let name = group[..open].trim();
    let org = group[open + 1..group.len() - 1].trim();
    if name.is_empty() || org.is_empty() || org.contains(['(', ')']) || name.contains(')') {
        return None;
    }
    Some((name.to_string(), org.to_string()))
}

fn parse_header(line: &str) -> Option<Header> {
    for (pos, _) in line.match_indices(':') {
        let speakers: Option<Vec<_>> = line[..pos].split('&').map(parse_speaker).collect();
        if let Some(speakers) = speakers {
            return Some(Header {
                speakers,
                text: line[pos + 1..].trim().to_string(),
            });
        }
    }
    None
}

struct Turn {
    speakers: Vec<(String, String)>,
    text: String,
}

fn finish(turn: Turn, meta: &SessionMeta, cfg: &NormalizationConfig, next_id: &mut CommentId, out: &mut Vec<Comment>) {
    let text = clean_text(&turn.text, cfg);
    if text.is_empty() {
        return;
    }
    let speakers: Vec<(String, String)> = turn
        .speakers
        .into_iter()
        .map(|(n, o)| (clean_text(&n, cfg), clean_text(&o, cfg)))
        .collect();
    let participant = speakers.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>().join(" & ");
    let organisation = speakers[0].1.clone();
    let mut multi = Vec::new();
    if speakers.len() > 1 {
        for (_, o) in &speakers {
            if !multi.contains(o) {
                multi.push(o.clone());
            }
        }
    }
    out.push(Comment {
        id: *next_id,
        text,
        meta: meta.clone(),
        participant,
        organisation,
        multi_organisations: multi,
    });
    *next_id += 1;
}

/// Parses one session's notes. Ids start at 0; see [`parse_sessions`] for a
/// corpus-wide numbering.
pub fn parse_notes(raw_note: &str, meta: &SessionMeta, cfg: &NormalizationConfig) -> ParsedNotes {
    let mut next_id = 0;
    parse_from(raw_note, meta, cfg, &mut next_id)
}

fn parse_from(raw_note: &str, meta: &SessionMeta, cfg: &NormalizationConfig, next_id: &mut CommentId) -> ParsedNotes {
    let mut out = ParsedNotes::default();
    let mut current: Option<Turn> = None;
    for (idx, line) in raw_note.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if line.starts_with([' ', '\t']) {
            match current.as_mut() {
                Some(turn) => {
                    turn.text.push(' ');
                    turn.text.push_str(line.trim());
                }
                None => {
                    let err = CorpusError::MalformedTurn { line: line_no };
                    warn!("{}: {err}", meta.source_file);
                    out.issues.push(ParseIssue {
                        source_file: meta.source_file.clone(),
                        line: line_no,
                        message: err.to_string(),
                    });
                }
            }
            continue;
        }
        if let Some(turn) = current.take() {
            finish(turn, meta, cfg, next_id, &mut out.comments);
        }
        if let Some(h) = parse_header(line) {
            current = Some(Turn {
                speakers: h.speakers,
                text: h.text,
            });
        }
    }
    if let Some(turn) = current.take() {
        finish(turn, meta, cfg, next_id, &mut out.comments);
    }
    if out.comments.is_empty() {
        warn!("{}: no comments parsed", meta.source_file);
    }
    out
}

/// Parses several sessions in order, numbering comments across all of them.
pub fn parse_sessions<'a, I>(sessions: I, cfg: &NormalizationConfig) -> ParsedNotes
where
    I: IntoIterator<Item = (&'a str, &'a SessionMeta)>,
{
    let mut next_id = 0;
    let mut all = ParsedNotes::default();
    for (raw, meta) in sessions {
        let part = parse_from(raw, meta, cfg, &mut next_id);
        all.comments.extend(part.comments);
        all.issues.extend(part.issues);
    }
    all
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta() -> SessionMeta {
        SessionMeta::new("2019-01-s1.txt", 2019, 1).unwrap()
    }

    #[test]
    fn single_turn() {
        let p = parse_notes("Ali (PartyA): We accept.\n", &meta(), &NormalizationConfig::default());
        assert_eq!(p.comments.len(), 1);
        let c = &p.comments[0];
        assert_eq!(c.participant, "Ali");
        assert_eq!(c.organisation, "PartyA");
        assert_eq!(c.text, "We accept.");
        assert!(c.multi_organisations.is_empty());
        assert_eq!(c.meta, meta());
    }

    #[test]
    fn shared_statement() {
        let p = parse_notes(
            "Ali (PartyA) & Bob (PartyB): Joint point.\n",
            &meta(),
            &NormalizationConfig::default(),
        );
        assert_eq!(p.comments.len(), 1);
        let c = &p.comments[0];
        assert_eq!(c.participant, "Ali & Bob");
        assert_eq!(c.organisation, "PartyA");
        assert_eq!(c.multi_organisations, vec!["PartyA", "PartyB"]);
    }

    #[test]
    fn continuation_lines() {
        let p = parse_notes(
            "Ali (PartyA): First.\n    continued line.\n",
            &meta(),
            &NormalizationConfig::default(),
        );
        assert_eq!(p.comments[0].text, "First. continued line.");
    }

    #[test]
    fn malformed_and_noise() {
        let raw = "  orphan line\nSession 3: security track\nAli (A): one\n\n   two\nAGENDA\n   three\nBob (B): x: y\n";
        let p = parse_notes(raw, &meta(), &NormalizationConfig::default());
        assert_eq!(p.issues.iter().map(|i| i.line).collect::<Vec<_>>(), vec![1, 7]);
        assert_eq!(p.comments.len(), 2);
        assert_eq!(p.comments[0].text, "one two");
        assert_eq!(p.comments[1].text, "x: y");
        assert_eq!(p.comments[1].id, 1);
    }

    #[test]
    fn empty_note() {
        let p = parse_notes("", &meta(), &NormalizationConfig::default());
        assert!(p.comments.is_empty());
    }

    #[test]
    fn ids_span_sessions() {
        let m1 = meta();
        let m2 = SessionMeta::new("2019-02-s2.txt", 2019, 2).unwrap();
        let p = parse_sessions(
            [("A (X): a1\nB (Y): b1\n", &m1), ("A (X): a2\n", &m2)],
            &NormalizationConfig::default(),
        );
        assert_eq!(p.comments.iter().map(|c| c.id).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_eq!(p.comments[2].meta.month, 2);
    }

    #[test]
    fn deterministic() {
        let raw = "A (X): alpha beta\n  gamma\nB (Y) & C (Z): delta\n";
        let cfg = NormalizationConfig::default();
        assert_eq!(
            parse_notes(raw, &meta(), &cfg).comments,
            parse_notes(raw, &meta(), &cfg).comments
        );
    }
}

use std::fs;

use log::warn;
use parley::corpus::parse_sessions;
use parley::SessionMeta;

use super::invalid;
use crate::artifacts::{self, CORPUS};
use crate::output::OutputDir;
use crate::settings::{require, Settings};
use crate::{CliError, Result};

pub fn run(settings: &Settings, out: &mut OutputDir) -> Result<()> {
    let dir = settings.notes_dir();
    require(&dir, "notes directory (set paths.notes_dir or run `parley synth`)")?;
    let mut files: Vec<_> = fs::read_dir(&dir)?
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "txt"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::validation(format!("no .txt note files in {}", dir.display())));
    }
    let mut sessions = Vec::with_capacity(files.len());
    for path in &files {
        let meta = SessionMeta::from_filename(path).map_err(|e| invalid(&dir.display().to_string(), e))?;
        let raw = fs::read(path)?;
        let text = String::from_utf8(raw).map_err(|_| invalid(&path.display().to_string(), "not valid UTF-8"))?;
        sessions.push((text, meta));
    }
    let parsed = parse_sessions(
        sessions.iter().map(|(t, m)| (t.as_str(), m)),
        &settings.config.normalization,
    );
    for issue in &parsed.issues {
        warn!("{}:{}: {}", issue.source_file, issue.line, issue.message);
    }
    if parsed.comments.is_empty() {
        return Err(CliError::validation(format!(
            "no comments parsed from {}",
            dir.display()
        )));
    }
    log::info!(
        "parsed {} comments from {} sessions",
        parsed.comments.len(),
        files.len()
    );
    out.write(CORPUS, &artifacts::corpus_bytes(&parsed.comments)?)?;
    Ok(())
}

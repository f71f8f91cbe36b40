use std::collections::{BTreeMap, BTreeSet};

use log::warn;
use parley::embed::{load_doc_vectors, DocBackend};
use parley::positions::{
    distance_profile, estimate_uncertainty, pairwise_heatmap, party_activity, positions_for, references_by_issue,
    DistanceProfile, PositionError, ReferenceMode,
};
use parley::{Comment, Period, Tagging};
use rayon::prelude::*;

use super::{invalid, runtime};
use crate::artifacts::{self, ASSIGNMENTS, PARTY_ACTIVITY, PROFILE, TAGGED};
use crate::output::OutputDir;
use crate::settings::{require, Settings};
use crate::{svg, CliError, Result, Source};

fn labels(settings: &Settings, source: Source) -> Result<(Vec<Comment>, Tagging)> {
    match source {
        Source::Query => artifacts::read_tagged(&settings.out_dir.join(TAGGED)),
        Source::Latent => artifacts::read_assignments(&settings.out_dir.join(ASSIGNMENTS), settings.config.topics.k),
    }
}

fn parties(settings: &Settings, corpus: &[Comment]) -> Result<Vec<String>> {
    let present: BTreeSet<&str> = corpus.iter().flat_map(Comment::parties).collect();
    let configured = &settings.config.positions.parties;
    let mut parties: Vec<String> = if configured.is_empty() {
        present.iter().map(|p| p.to_string()).collect()
    } else {
        for p in configured {
            if !present.contains(p.as_str()) {
                warn!("party `{p}` does not occur in the corpus");
            }
        }
        configured.clone()
    };
    if let Some(b) = &settings.config.positions.baseline {
        if !present.contains(b.as_str()) {
            return Err(CliError::validation(format!(
                "baseline party `{b}` does not occur in the corpus"
            )));
        }
        if !parties.contains(b) {
            parties.push(b.clone());
        }
    }
    Ok(parties)
}

fn periods(settings: &Settings, corpus: &[Comment]) -> Vec<Period> {
    let by = settings.config.positions.group_by;
    let set: BTreeSet<Period> = corpus.iter().map(|c| Period::of(&c.meta, by)).collect();
    set.into_iter().collect()
}

/// Distinct file-name stems for the issues, in order.
fn slugs(issues: &[String]) -> Vec<String> {
    let mut seen = BTreeSet::new();
    issues
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let base = artifacts::slug(name);
            let s = if seen.contains(&base) {
                format!("{base}_{i}")
            } else {
                base
            };
            seen.insert(s.clone());
            s
        })
        .collect()
}

pub fn run(settings: &Settings, out: &mut OutputDir, source: Source) -> Result<()> {
    let cfg = &settings.config;
    let (corpus, tagging) = labels(settings, source)?;
    let parties = parties(settings, &corpus)?;
    let issues = tagging.issues.clone();
    let periods = periods(settings, &corpus);
    let mode = cfg.reference_mode();

    let store;
    let table;
    let pooling = cfg.pooling(settings.stopwords()?);
    let backend = match &cfg.paths.doc_vectors {
        Some(path) => {
            require(path, "document vectors (paths.doc_vectors)")?;
            store = load_doc_vectors(path).map_err(|e| invalid(&path.display().to_string(), e))?;
            DocBackend::Precomputed { store: &store }
        }
        None => {
            table = super::table(settings)?;
            DocBackend::StaticPooling {
                table: &table,
                opts: &pooling,
            }
        }
    };
    let position_err = |e: PositionError| match e {
        PositionError::Embed(e) => invalid("document vectors", e),
        e => runtime("positions", e),
    };

    let mut profile = DistanceProfile {
        reference: mode.label(),
        rows: Vec::new(),
    };
    let mut all_positions = Vec::new();
    for &period in &periods {
        let positions = positions_for(&corpus, &tagging, &backend, &parties, &issues, period).map_err(position_err)?;
        let refs = references_by_issue(&positions, &mode);
        profile.rows.extend(distance_profile(&positions, &refs, &mode).rows);
        all_positions.extend(positions);
    }

    let params = cfg.uncertainty_params();
    let margins: BTreeMap<(String, String, String), Option<f64>> = all_positions
        .par_iter()
        .filter(|p| p.vector.is_some())
        .map(|p| {
            let key = (p.party.clone(), p.issue.clone(), p.period.to_string());
            match estimate_uncertainty(&corpus, &tagging, &backend, &p.party, &p.issue, p.period, &params) {
                Ok(m) => Ok((key, Some(m.margin))),
                Err(PositionError::TooLittleData { .. }) => Ok((key, None)),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_, _>>()
        .map_err(position_err)?;

    let dir = source.as_str();
    let profile_csv = artifacts::profile_bytes(&profile, &margins)?;
    out.write(&format!("{dir}/{PROFILE}"), &profile_csv)?;
    if cfg.flags.emit_svg {
        out.write(
            &format!("{dir}/profile.svg"),
            svg::profile(&profile_csv, &profile.reference)?.as_bytes(),
        )?;
    }

    let overall = positions_for(&corpus, &tagging, &backend, &parties, &issues, Period::All).map_err(position_err)?;
    for (issue, slug) in issues.iter().zip(slugs(&issues)) {
        let row: Vec<_> = overall.iter().filter(|p| &p.issue == issue).collect();
        let report = match pairwise_heatmap(&row, issue) {
            Ok(r) => r,
            Err(e) => {
                warn!("no heatmap: {e}");
                continue;
            }
        };
        out.write(
            &format!("{dir}/heatmap_{slug}.csv"),
            &artifacts::heatmap_bytes(&report)?,
        )?;
        let levels_csv = artifacts::levels_bytes(&report)?;
        out.write(&format!("{dir}/heatmap_{slug}_levels.csv"), &levels_csv)?;
        if cfg.flags.emit_svg {
            let title = format!("{issue} (1 = closest)");
            out.write(
                &format!("{dir}/heatmap_{slug}.svg"),
                svg::matrix(&levels_csv, &title)?.as_bytes(),
            )?;
        }
    }

    let mut activity = Vec::new();
    for issue in &issues {
        for &period in &periods {
            for (party, words) in party_activity(&corpus, &tagging, issue, period) {
                activity.push((party, issue.clone(), period.to_string(), words));
            }
        }
    }
    out.write(
        &format!("{dir}/{PARTY_ACTIVITY}"),
        &artifacts::party_activity_bytes(&activity)?,
    )?;
    if matches!(mode, ReferenceMode::Average) && parties.len() < 2 {
        warn!("average reference needs at least two parties; profile similarities are empty");
    }
    Ok(())
}

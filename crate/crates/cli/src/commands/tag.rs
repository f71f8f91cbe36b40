use parley::issues_query::{corpus_vocabulary, expand_catalog, issue_activity, tag_corpus, QueryError};

use super::{invalid, master_corpus, runtime, table};
use crate::artifacts::{self, ACTIVITY, EXPANSION, TAGGED};
use crate::output::OutputDir;
use crate::settings::Settings;
use crate::{svg, Result};

pub fn run(settings: &Settings, out: &mut OutputDir) -> Result<()> {
    let cfg = &settings.config;
    let corpus = master_corpus(settings)?;
    let table = table(settings)?;
    let catalog = cfg.catalog();
    let vocabulary = cfg.query.restrict_to_corpus.then(|| corpus_vocabulary(&corpus));
    let mut expanded =
        expand_catalog(&catalog, &table, &cfg.neighbor_query(), vocabulary.as_ref()).map_err(|e| match e {
            QueryError::Embed(e) => runtime("query expansion", e),
            e => invalid("issues", e),
        })?;
    if cfg.query.per_seed {
        expanded = expanded.split_per_seed();
    }
    let tagged = tag_corpus(&corpus, &expanded);
    let activity = issue_activity(&tagged, cfg.positions.group_by);

    out.write(TAGGED, &artifacts::tagged_bytes(&tagged)?)?;
    out.write(EXPANSION, &artifacts::expansion_bytes(&expanded)?)?;
    let activity_csv = artifacts::activity_bytes("issue", &activity)?;
    out.write(ACTIVITY, &activity_csv)?;
    if cfg.flags.emit_svg {
        out.write(
            "activity.svg",
            svg::activity(&activity_csv, "Words per issue")?.as_bytes(),
        )?;
    }
    Ok(())
}

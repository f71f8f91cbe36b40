use parley::issues_latent::{
    assign_topics, build_tfidf, fit_nmf, latent_activity, representative_comments, topic_keywords, topic_overlap,
};

use super::{invalid, master_corpus};
use crate::artifacts::{self, ASSIGNMENTS, KEYWORDS, LATENT_ACTIVITY, NMF_TRACE, OVERLAP, REPRESENTATIVES};
use crate::output::OutputDir;
use crate::settings::Settings;
use crate::{svg, Result};

pub fn run(settings: &Settings, out: &mut OutputDir) -> Result<()> {
    let cfg = &settings.config;
    let mut corpus = master_corpus(settings)?;
    if cfg.flags.exclude_multi_party {
        corpus.retain(|c| !c.is_shared());
    }
    let dtm = build_tfidf(&corpus, &cfg.vocab_config(settings.stopwords()?)).map_err(|e| invalid("topics", e))?;
    let model = fit_nmf(&dtm, &cfg.nmf_params()).map_err(|e| invalid("topics", e))?;
    if !model.converged {
        log::warn!("NMF stopped at max_iter = {} before reaching tol", model.n_iter);
    }
    let k = model.k();
    let keywords = topic_keywords(&model, cfg.topics.n_keywords);
    let assignments = assign_topics(&model, cfg.topics.membership_threshold);
    let reps: Vec<_> = (0..k)
        .map(|t| representative_comments(&model, t, cfg.topics.n_representatives))
        .collect();
    let overlap = topic_overlap(&assignments, k);
    let activity = latent_activity(&assignments, k, &corpus, cfg.positions.group_by);

    out.write(KEYWORDS, &artifacts::keywords_bytes(&keywords)?)?;
    out.write(ASSIGNMENTS, &artifacts::assignments_bytes(&corpus, &assignments)?)?;
    out.write(
        REPRESENTATIVES,
        &artifacts::representatives_bytes(&model, &reps, &corpus)?,
    )?;
    let overlap_csv = artifacts::overlap_bytes(&overlap)?;
    out.write(OVERLAP, &overlap_csv)?;
    let activity_csv = artifacts::activity_bytes("topic", &activity)?;
    out.write(LATENT_ACTIVITY, &activity_csv)?;
    out.write(NMF_TRACE, &artifacts::trace_bytes(&model.objective_trace)?)?;
    if cfg.flags.emit_svg {
        out.write(
            "latent_activity.svg",
            svg::activity(&activity_csv, "Words per topic")?.as_bytes(),
        )?;
        out.write("overlap.svg", svg::matrix(&overlap_csv, "Topic overlap")?.as_bytes())?;
    }
    Ok(())
}

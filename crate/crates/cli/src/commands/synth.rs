use parley::embed::write_table;
use parley::synthkit::{generate, render_sessions, synthetic_table, write_ground_truth};

use super::runtime;
use crate::artifacts::GROUND_TRUTH;
use crate::output::OutputDir;
use crate::settings::{Settings, SYNTH_DIR};
use crate::Result;

/// Writes notes, ground truth and an embedding table under `<out>/synthetic`,
/// which carries its own manifest.
pub fn run(settings: &Settings) -> Result<()> {
    let cfg = &settings.config;
    let spec = cfg.synth_spec();
    let root = settings.out_dir.join(SYNTH_DIR);
    let mut out = OutputDir::open(
        &root,
        "synth",
        &settings.config_hash,
        settings.config_path.as_deref(),
        cfg.seed,
    )?;
    let corpus = generate(&spec).map_err(|e| runtime("synth", e))?;
    for (file, text) in render_sessions(&corpus.comments) {
        out.write(&format!("notes/{file}"), text.as_bytes())?;
    }
    let mut truth = Vec::new();
    write_ground_truth(&corpus.truth, &mut truth).map_err(|e| runtime("ground truth", e))?;
    out.write(GROUND_TRUTH, &truth)?;
    let table =
        synthetic_table(&spec, cfg.synth_table.dimension, cfg.synth_table.noise).map_err(|e| runtime("synth", e))?;
    let mut buf = Vec::new();
    write_table(&table, &mut buf).map_err(|e| runtime("embedding table", e))?;
    out.write("embeddings.txt", &buf)?;
    log::info!(
        "generated {} comments in {} sessions under {}",
        corpus.comments.len(),
        spec.sessions.len(),
        root.display()
    );
    out.finish()?;
    Ok(())
}

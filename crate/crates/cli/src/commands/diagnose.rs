use std::collections::HashSet;

use parley::corpus::tokenize;
use parley::diag::{anisotropy, running_mean, running_mean_similarity, sample_stream};

use super::{invalid, table};
use crate::artifacts::{self, ANISOTROPY, ANISOTROPY_TEST, RUNNING_MEAN, RUNNING_SIM};
use crate::output::OutputDir;
use crate::settings::{require, Settings};
use crate::{svg, Result};

fn streams(settings: &Settings, table: &parley::EmbeddingTable) -> Result<[Vec<String>; 2]> {
    let cfg = &settings.config;
    let (a, b) = if cfg.paths.diag_streams.is_empty() {
        let n = cfg.diag.stream_length;
        let s = cfg.diag.zipf_exponent;
        (
            sample_stream(table, n, s, cfg.seed),
            sample_stream(table, n, s, cfg.seed.wrapping_add(1)),
        )
    } else {
        let read = |i: usize| -> Result<Vec<String>> {
            let path = &cfg.paths.diag_streams[i];
            require(path, "diagnostic stream")?;
            let text = std::fs::read_to_string(path).map_err(|e| invalid(&path.display().to_string(), e))?;
            Ok(tokenize(&text))
        };
        (read(0)?, read(1)?)
    };
    if !cfg.diag.remove_stopwords {
        return Ok([a, b]);
    }
    let stop: HashSet<String> = settings.stopwords()?;
    let strip = |s: Vec<String>| s.into_iter().filter(|t| !stop.contains(t)).collect();
    Ok([strip(a), strip(b)])
}

pub fn run(settings: &Settings, out: &mut OutputDir) -> Result<()> {
    let cfg = &settings.config;
    let table = table(settings)?;
    let hist = anisotropy(&table);
    let [a, b] = streams(settings, &table)?;
    let series = running_mean(&table, &a).map_err(|e| invalid("diagnostic stream 1", e))?;
    let sim = running_mean_similarity(&table, &a, &b).map_err(|e| invalid("diagnostic streams", e))?;
    if series.skipped > 0 {
        log::info!("{} out-of-vocabulary tokens skipped in stream 1", series.skipped);
    }

    let hist_csv = artifacts::anisotropy_bytes(&hist)?;
    out.write(ANISOTROPY, &hist_csv)?;
    out.write(ANISOTROPY_TEST, &artifacts::anisotropy_test_bytes(&hist)?)?;
    let mean_csv = artifacts::running_mean_bytes(&series, cfg.diag.all_components)?;
    out.write(RUNNING_MEAN, &mean_csv)?;
    let sim_csv = artifacts::running_sim_bytes(&sim)?;
    out.write(RUNNING_SIM, &sim_csv)?;
    if cfg.flags.emit_svg {
        out.write(
            "anisotropy.svg",
            svg::bars(&hist_csv, "Vectors by largest dimension")?.as_bytes(),
        )?;
        out.write(
            "running_mean.svg",
            svg::long_lines(&mean_csv, "Running mean components")?.as_bytes(),
        )?;
        out.write(
            "running_sim.svg",
            svg::lines(&sim_csv, "Cosine of running means")?.as_bytes(),
        )?;
    }
    Ok(())
}

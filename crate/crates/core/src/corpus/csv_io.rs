use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use super::{Comment, CorpusError, SessionMeta};

pub const CSV_HEADER: [&str; 8] = [
    "id",
    "text",
    "source_file",
    "year",
    "month",
    "participant",
    "organisation",
    "multi_organisation",
];

pub(crate) const MULTI_SEP: char = '|';

pub(crate) fn check_storable(c: &Comment) -> Result<(), CorpusError> {
    for org in &c.multi_organisations {
        if org.is_empty() || org.contains(MULTI_SEP) {
            return Err(CorpusError::InvalidField {
                id: c.id,
                field: "multi_organisation",
                reason: format!("organisation `{org}` is empty or contains `{MULTI_SEP}`"),
            });
        }
    }
    Ok(())
}

pub(crate) fn comment_record(c: &Comment) -> [String; 8] {
    [
        c.id.to_string(),
        c.text.clone(),
        c.meta.source_file.clone(),
        c.meta.year.to_string(),
        c.meta.month.to_string(),
        c.participant.clone(),
        c.organisation.clone(),
        c.multi_organisations.join("|"),
    ]
}

/// Writes the master CSV to any writer. Rows are emitted in id order.
pub fn write_csv<W: Write>(corpus: &[Comment], out: W) -> Result<(), CorpusError> {
    write_csv_extended(corpus, &[], |_| Vec::new(), out)
}

/// Master CSV with extra trailing columns produced by `extra` for each row.
pub fn write_csv_extended<W, F>(corpus: &[Comment], extra_header: &[&str], extra: F, out: W) -> Result<(), CorpusError>
where
    W: Write,
    F: Fn(&Comment) -> Vec<String>,
{
    let mut sorted: Vec<&Comment> = corpus.iter().collect();
    sorted.sort_by_key(|c| c.id);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER.iter().chain(extra_header))?;
    for c in sorted {
        check_storable(c)?;
        let cols = extra(c);
        debug_assert_eq!(cols.len(), extra_header.len());
        w.write_record(comment_record(c).iter().chain(&cols))?;
    }
    w.flush()?;
    Ok(())
}

pub fn export_csv(corpus: &[Comment], path: &Path) -> Result<(), CorpusError> {
    write_csv(corpus, BufWriter::new(File::create(path)?))
}

/// Reads a master CSV. Extra trailing columns (tags, topics) are ignored.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<Comment>, CorpusError> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    if headers.len() < CSV_HEADER.len() || headers.iter().zip(CSV_HEADER).any(|(a, b)| a != b) {
        return Err(CorpusError::BadRow {
            row: 0,
            reason: format!("unexpected header {:?}", headers.iter().collect::<Vec<_>>()),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let bad = |reason: String| CorpusError::BadRow { row, reason };
        let num = |idx: usize| -> Result<i64, CorpusError> {
            rec[idx]
                .parse()
                .map_err(|_| bad(format!("column `{}` is not an integer", CSV_HEADER[idx])))
        };
        let meta = SessionMeta::new(&rec[2], num(3)? as i32, num(4)? as u32).map_err(|e| bad(e.to_string()))?;
        let multi = if rec[7].is_empty() {
            Vec::new()
        } else {
            rec[7].split(MULTI_SEP).map(str::to_string).collect()
        };
        out.push(Comment {
            id: rec[0].parse().map_err(|_| bad("bad id".into()))?,
            text: rec[1].to_string(),
            meta,
            participant: rec[5].to_string(),
            organisation: rec[6].to_string(),
            multi_organisations: multi,
        });
    }
    Ok(out)
}

pub fn import_csv(path: &Path) -> Result<Vec<Comment>, CorpusError> {
    read_csv(File::open(path)?)
}

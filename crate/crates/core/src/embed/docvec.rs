use std::collections::HashMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use crate::corpus::CommentId;

use super::EmbedError;

/// Comment vectors produced by an external encoder.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DocVectorStore {
    dim: usize,
    vectors: HashMap<CommentId, Vec<f64>>,
}

impl DocVectorStore {
    pub fn from_entries<I: IntoIterator<Item = (CommentId, Vec<f64>)>>(entries: I) -> Result<Self, EmbedError> {
        let mut store = Self::default();
        for (row, (id, v)) in entries.into_iter().enumerate() {
            store.insert(row + 1, id, v)?;
        }
        Ok(store)
    }

    fn insert(&mut self, line: usize, id: CommentId, v: Vec<f64>) -> Result<(), EmbedError> {
        if v.is_empty() {
            return Err(EmbedError::ParseError(line));
        }
        if self.vectors.is_empty() {
            self.dim = v.len();
        } else if v.len() != self.dim {
            return Err(EmbedError::DimensionMismatch {
                line,
                expected: self.dim,
                found: v.len(),
            });
        }
        self.vectors.insert(id, v);
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, id: CommentId) -> Result<&[f64], EmbedError> {
        self.vectors
            .get(&id)
            .map(Vec::as_slice)
            .ok_or(EmbedError::MissingVector(id))
    }
}

/// Reads `id,v1,...,vd` rows (with a header line).
pub fn read_doc_vectors<R: Read>(input: R) -> Result<DocVectorStore, EmbedError> {
    let mut r = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let mut store = DocVectorStore::default();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|_| EmbedError::ParseError(line))?;
        let mut fields = rec.iter();
        let id = fields
            .next()
            .and_then(|f| f.trim().parse().ok())
            .ok_or(EmbedError::ParseError(line))?;
        let v: Vec<f64> = fields
            .map(|f| f.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect::<Option<_>>()
            .ok_or(EmbedError::ParseError(line))?;
        store.insert(line, id, v)?;
    }
    Ok(store)
}

pub fn load_doc_vectors(path: &Path) -> Result<DocVectorStore, EmbedError> {
    read_doc_vectors(File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_rows() {
        let s = read_doc_vectors("id,v1,v2,v3,v4\n0,1,2,3,4\n5,0,0,1,0.5\n".as_bytes()).unwrap();
        assert_eq!((s.len(), s.dimension()), (2, 4));
        assert_eq!(s.get(5).unwrap(), &[0.0, 0.0, 1.0, 0.5]);
        assert!(matches!(s.get(1), Err(EmbedError::MissingVector(1))));
    }

    #[test]
    fn ragged_row() {
        let r = read_doc_vectors("id,v1,v2\n0,1,2\n1,1\n".as_bytes());
        assert!(matches!(
            r,
            Err(EmbedError::DimensionMismatch {
                line: 3,
                expected: 2,
                found: 1
            })
        ));
        assert!(matches!(
            read_doc_vectors("id,v1\n0,abc\n".as_bytes()),
            Err(EmbedError::ParseError(2))
        ));
    }
}

//! Segment file: the traced segments of one image plus its dimensions.
//!
//! ```json
//! {"width": 64, "height": 48, "segments": [{"id": 0, "points": [[3, 4], [4, 4]]}]}
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::trace::LineSegment;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("malformed {path}: {source}")]
    Parse { path: String, source: serde_json::Error },
    #[error("invalid segment {id}: {reason}")]
    Segment { id: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentFile {
    pub width: usize,
    pub height: usize,
    pub segments: Vec<LineSegment>,
}

impl SegmentFile {
    pub fn new(width: usize, height: usize, segments: Vec<LineSegment>) -> Self {
        Self {
            width,
            height,
            segments,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("segment files always serialize")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), FormatError> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|source| FormatError::Write {
            path: path.display().to_string(),
            source,
        })
    }

    /// Reads and validates a segment file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, FormatError> {
        let path = path.as_ref();
        let shown = path.display().to_string();
        let text = fs::read_to_string(path).map_err(|source| FormatError::Read {
            path: shown.clone(),
            source,
        })?;
        let file: SegmentFile = serde_json::from_str(&text).map_err(|source| FormatError::Parse { path: shown, source })?;
        for s in &file.segments {
            s.validate().map_err(|e| FormatError::Segment {
                id: s.id,
                reason: e.to_string(),
            })?;
        }
        Ok(file)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_lossless() {
        let file = SegmentFile::new(
            20,
            10,
            vec![
                LineSegment::new(0, vec![[1, 1], [2, 2], [3, 2]]).unwrap(),
                LineSegment::new(1, vec![[5, 5], [5, 6]]).unwrap(),
            ],
        );
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        file.save(&path).unwrap();
        assert_eq!(SegmentFile::load(&path).unwrap(), file);
    }

    #[test]
    fn rejects_broken_segments() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        fs::write(&path, r#"{"width":4,"height":4,"segments":[{"id":0,"points":[[0,0],[3,3]]}]}"#).unwrap();
        assert!(matches!(SegmentFile::load(&path), Err(FormatError::Segment { id: 0, .. })));
        fs::write(&path, "{").unwrap();
        assert!(matches!(SegmentFile::load(&path), Err(FormatError::Parse { .. })));
        assert!(matches!(
            SegmentFile::load(dir.path().join("missing.json")),
            Err(FormatError::Read { .. })
        ));
    }
}

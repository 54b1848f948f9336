//! Map library: an index of lane maps keyed by map code, with exact
//! nearest-code retrieval.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::codec::{extract_codes, CodecConfig, MapCode, MAP_CODE_LEN};
use crate::error::{Error, Result};
use crate::scenario::{LaneMap, Scenario};

/// Extra cost when one code has an intersection and the other does not.
pub const INTERSECTION_MISMATCH: i64 = 4;
const INTERSECTION_DIM: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapEntry {
    pub code: MapCode,
    /// Lane map in the source scenario's ego frame.
    pub map: LaneMap,
    pub source_id: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MapIndex {
    pub entries: Vec<MapEntry>,
}

#[derive(Serialize, Deserialize)]
struct IndexFile {
    format: String,
    entries: Vec<MapEntry>,
}

const INDEX_FORMAT: &str = "trajgen-map-index/1";

/// Unit-weight L1 distance between map codes; the intersection dimension
/// costs a flat penalty when exactly one side is -1.
pub fn code_distance(a: &MapCode, b: &MapCode) -> i64 {
    let (a, b) = (a.to_array(), b.to_array());
    (0..MAP_CODE_LEN)
        .map(|k| {
            if k == INTERSECTION_DIM && ((a[k] < 0) != (b[k] < 0)) {
                INTERSECTION_MISMATCH
            } else {
                (a[k] as i64 - b[k] as i64).abs()
            }
        })
        .sum()
}

impl MapIndex {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(&mut self, code: MapCode, map: LaneMap, source_id: impl Into<String>) {
        self.entries.push(MapEntry { code, map, source_id: source_id.into() });
    }

    /// Entry index and distance of the best match; the earliest entry wins
    /// ties.
    pub fn best_match(&self, code: &MapCode) -> Result<(usize, i64)> {
        let mut best: Option<(usize, i64)> = None;
        for (i, e) in self.entries.iter().enumerate() {
            let d = code_distance(code, &e.code);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((i, d));
                if d == 0 {
                    break;
                }
            }
        }
        best.ok_or(Error::EmptyIndex)
    }

    pub fn retrieve(&self, code: &MapCode) -> Result<(&LaneMap, i64)> {
        let (i, d) = self.best_match(code)?;
        Ok((&self.entries[i].map, d))
    }

    pub fn to_json(&self) -> String {
        let file = IndexFile { format: INDEX_FORMAT.into(), entries: self.entries.clone() };
        serde_json::to_string(&file).expect("index serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: IndexFile = serde_json::from_str(text).map_err(|e| Error::Parse(format!("map index: {e}")))?;
        if file.format != INDEX_FORMAT {
            return Err(Error::Format(format!("unsupported map index format {:?}", file.format)));
        }
        Ok(MapIndex { entries: file.entries })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// Indexes each scenario's ego-frame map under its extracted map code.
/// Source ids default to the scenario's position in the input.
pub fn build_index(scenarios: &[Scenario], cfg: &CodecConfig) -> Result<MapIndex> {
    let ids: Vec<String> = (0..scenarios.len()).map(|i| i.to_string()).collect();
    build_index_with_ids(scenarios, &ids, cfg)
}

pub fn build_index_with_ids(scenarios: &[Scenario], ids: &[String], cfg: &CodecConfig) -> Result<MapIndex> {
    if scenarios.is_empty() {
        return Err(Error::EmptyIndex);
    }
    if ids.len() != scenarios.len() {
        return Err(Error::InvalidInput(format!("{} ids for {} scenarios", ids.len(), scenarios.len())));
    }
    let mut index = MapIndex::default();
    for (s, id) in scenarios.iter().zip(ids) {
        let code = extract_codes(s, cfg)?.map_code;
        index.push(code, s.to_ego_frame().map, id.clone());
    }
    Ok(index)
}

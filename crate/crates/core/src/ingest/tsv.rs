use std::collections::BTreeMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use super::{IngestError, RawSample, Result};

/// Column names of a scored-text TSV plus the score range of each prompt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TsvLayout {
    pub id: String,
    pub prompt: String,
    pub text: String,
    pub score: String,
    /// prompt id → `[min, max]`
    pub ranges: BTreeMap<String, [f64; 2]>,
}

impl Default for TsvLayout {
    fn default() -> Self {
        Self {
            id: "id".into(),
            prompt: "set".into(),
            text: "essay".into(),
            score: "score".into(),
            ranges: BTreeMap::new(),
        }
    }
}

impl TsvLayout {
    pub fn with_range(mut self, prompt: &str, min: f64, max: f64) -> Self {
        self.ranges.insert(prompt.to_string(), [min, max]);
        self
    }
}

pub fn parse_scored_tsv<R: BufRead>(reader: R, layout: &TsvLayout) -> Result<Vec<RawSample>> {
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(line) => line?,
        None => return Err(IngestError::EmptyInput),
    };
    let header = header.trim_end_matches('\r');
    if header.trim().is_empty() {
        return Err(IngestError::EmptyInput);
    }
    let columns: Vec<&str> = header.split('\t').collect();
    let find = |name: &str| {
        columns
            .iter()
            .position(|c| c.trim() == name)
            .ok_or_else(|| IngestError::MissingColumn(name.to_string()))
    };
    let id_col = find(&layout.id)?;
    let prompt_col = find(&layout.prompt)?;
    let text_col = find(&layout.text)?;
    let score_col = find(&layout.score)?;

    let mut out = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let row_err = |message: String| IngestError::Row {
            line: line_no,
            message,
        };
        let fields: Vec<&str> = line.split('\t').collect();
        let field = |col: usize, name: &str| {
            fields
                .get(col)
                .copied()
                .ok_or_else(|| row_err(format!("missing field `{name}`")))
        };
        let prompt_id = field(prompt_col, &layout.prompt)?.trim().to_string();
        let text = field(text_col, &layout.text)?.trim().to_string();
        let score_str = field(score_col, &layout.score)?.trim();
        let raw_score: f64 = score_str
            .parse()
            .map_err(|_| row_err(format!("unparseable score `{score_str}`")))?;
        let [min_score, max_score] = *layout
            .ranges
            .get(&prompt_id)
            .ok_or_else(|| row_err(format!("no score range configured for prompt `{prompt_id}`")))?;
        if min_score >= max_score {
            return Err(IngestError::DegenerateRange(prompt_id));
        }
        if !(min_score..=max_score).contains(&raw_score) {
            return Err(row_err(format!(
                "score {raw_score} outside range [{min_score}, {max_score}] for prompt `{prompt_id}`"
            )));
        }
        if text.is_empty() {
            return Err(row_err("empty text".into()));
        }
        out.push(RawSample {
            sample_id: field(id_col, &layout.id)?.trim().to_string(),
            prompt_id,
            text,
            raw_score,
            min_score,
            max_score,
        });
    }
    Ok(out)
}

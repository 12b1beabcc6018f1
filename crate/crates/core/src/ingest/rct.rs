use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{IngestError, Result};

/// Sentence labels of the randomized-controlled-trial abstract corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Label5 {
    Background,
    Objective,
    Method,
    Result,
    Conclusion,
}

impl Label5 {
    pub const ALL: [Label5; 5] = [
        Label5::Background,
        Label5::Objective,
        Label5::Method,
        Label5::Result,
        Label5::Conclusion,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Label5::Background => "BACKGROUND",
            Label5::Objective => "OBJECTIVE",
            Label5::Method => "METHOD",
            Label5::Result => "RESULT",
            Label5::Conclusion => "CONCLUSION",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }
}

impl fmt::Display for Label5 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label5 {
    type Err = String;

    /// Accepts the singular names and the plural spellings used by the
    /// published corpus files (`METHODS`, `RESULTS`, `CONCLUSIONS`).
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "BACKGROUND" => Ok(Label5::Background),
            "OBJECTIVE" | "OBJECTIVES" => Ok(Label5::Objective),
            "METHOD" | "METHODS" => Ok(Label5::Method),
            "RESULT" | "RESULTS" => Ok(Label5::Result),
            "CONCLUSION" | "CONCLUSIONS" => Ok(Label5::Conclusion),
            other => Err(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RctAbstract {
    pub abstract_id: String,
    pub sentences: Vec<(Label5, String)>,
}

/// Parses `###<id>` headers followed by `<LABEL>\t<sentence>` lines; a blank
/// line (or end of input) closes the current abstract.
pub fn parse_rct<R: BufRead>(reader: R) -> Result<Vec<RctAbstract>> {
    let mut out = Vec::new();
    let mut current: Option<(RctAbstract, usize)> = None;

    let close = |current: &mut Option<(RctAbstract, usize)>, out: &mut Vec<RctAbstract>| {
        if let Some((abs, header_line)) = current.take() {
            if abs.sentences.is_empty() {
                return Err(IngestError::Row {
                    line: header_line,
                    message: format!("abstract `{}` has no sentences", abs.abstract_id),
                });
            }
            out.push(abs);
        }
        Ok(())
    };

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            close(&mut current, &mut out)?;
            continue;
        }
        if let Some(id) = line.strip_prefix("###") {
            close(&mut current, &mut out)?;
            current = Some((
                RctAbstract {
                    abstract_id: id.trim().to_string(),
                    sentences: Vec::new(),
                },
                line_no,
            ));
            continue;
        }
        let row_err = |message: String| IngestError::Row {
            line: line_no,
            message,
        };
        let Some((abs, _)) = current.as_mut() else {
            return Err(row_err("sentence before any `###` header".into()));
        };
        let (label, text) = line
            .split_once('\t')
            .ok_or_else(|| row_err("expected `<LABEL>\\t<sentence>`".into()))?;
        let label: Label5 = label
            .trim()
            .parse()
            .map_err(|bad| row_err(format!("unknown label `{bad}`")))?;
        let text = text.trim();
        if text.is_empty() {
            return Err(row_err("empty sentence".into()));
        }
        abs.sentences.push((label, text.to_string()));
    }
    close(&mut current, &mut out)?;
    Ok(out)
}

pub fn serialize_rct(abstracts: &[RctAbstract]) -> String {
    let mut s = String::new();
    for abs in abstracts {
        s.push_str("###");
        s.push_str(&abs.abstract_id);
        s.push('\n');
        for (label, text) in &abs.sentences {
            s.push_str(label.as_str());
            s.push('\t');
            s.push_str(text);
            s.push('\n');
        }
        s.push('\n');
    }
    s
}

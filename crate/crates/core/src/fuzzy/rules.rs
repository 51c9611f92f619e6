use super::{FuzzyError, LinguisticLabel};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

const KP_TABLE: &str = include_str!("../../tables/kp.txt");
const KI_TABLE: &str = include_str!("../../tables/ki.txt");
const KD_TABLE: &str = include_str!("../../tables/kd.txt");

/// Which PID gain a rule table adjusts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GainTarget {
    Kp,
    Ki,
    Kd,
}

impl GainTarget {
    pub const ALL: [GainTarget; 3] = [GainTarget::Kp, GainTarget::Ki, GainTarget::Kd];

    pub fn name(self) -> &'static str {
        match self {
            GainTarget::Kp => "Kp",
            GainTarget::Ki => "Ki",
            GainTarget::Kd => "Kd",
        }
    }
}

/// 7×7 consequent grid, rows indexed by the error label and columns by the
/// error-rate label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleTable {
    pub target: GainTarget,
    entries: [[LinguisticLabel; 7]; 7],
}

impl RuleTable {
    pub fn new(target: GainTarget, entries: [[LinguisticLabel; 7]; 7]) -> Self {
        Self { target, entries }
    }

    /// The shipped table for `target`.
    pub fn builtin(target: GainTarget) -> Self {
        let text = match target {
            GainTarget::Kp => KP_TABLE,
            GainTarget::Ki => KI_TABLE,
            GainTarget::Kd => KD_TABLE,
        };
        Self::parse(text, target).expect("embedded rule table is well formed")
    }

    /// Parses a plain-text grid: seven non-comment lines of seven labels.
    /// Blank lines and lines starting with `#` are ignored.
    pub fn parse(text: &str, target: GainTarget) -> Result<Self, FuzzyError> {
        let mut entries = [[LinguisticLabel::ZO; 7]; 7];
        let mut row = 0;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if row == 7 {
                return Err(FuzzyError::Parse {
                    line: lineno + 1,
                    msg: "more than 7 rows".into(),
                });
            }
            let labels: Vec<&str> = line.split_whitespace().collect();
            if labels.len() != 7 {
                return Err(FuzzyError::Parse {
                    line: lineno + 1,
                    msg: format!("expected 7 labels, found {}", labels.len()),
                });
            }
            for (col, tok) in labels.into_iter().enumerate() {
                entries[row][col] = tok.parse().map_err(|e: FuzzyError| FuzzyError::Parse {
                    line: lineno + 1,
                    msg: e.to_string(),
                })?;
            }
            row += 1;
        }
        if row != 7 {
            return Err(FuzzyError::Parse {
                line: text.lines().count(),
                msg: format!("expected 7 rows, found {row}"),
            });
        }
        Ok(Self { target, entries })
    }

    pub fn load(path: &Path, target: GainTarget) -> Result<Self, FuzzyError> {
        let text = std::fs::read_to_string(path).map_err(|e| FuzzyError::Parse {
            line: 0,
            msg: format!("{}: {e}", path.display()),
        })?;
        Self::parse(&text, target)
    }

    pub fn lookup(&self, e: LinguisticLabel, ec: LinguisticLabel) -> LinguisticLabel {
        self.entries[e.index()][ec.index()]
    }

    pub(crate) fn at(&self, e: usize, ec: usize) -> LinguisticLabel {
        self.entries[e][ec]
    }

    /// Grid text in the same layout `parse` reads (no header).
    pub fn to_grid_text(&self) -> String {
        let mut out = String::new();
        for row in &self.entries {
            let cells: Vec<&str> = row.iter().map(|l| l.as_str()).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Human-readable dump of several tables with row/column headers, one block
/// per table separated by a blank line.
pub fn dump_tables(tables: &[RuleTable]) -> String {
    let mut out = String::new();
    for (n, table) in tables.iter().enumerate() {
        if n > 0 {
            out.push('\n');
        }
        out.push_str(table.target.name());
        out.push('\n');
        out.push_str("e\\ec");
        for l in LinguisticLabel::ALL {
            let _ = write!(out, " {l}");
        }
        out.push('\n');
        for e in LinguisticLabel::ALL {
            let _ = write!(out, "{e}  ");
            for ec in LinguisticLabel::ALL {
                let _ = write!(out, " {}", table.lookup(e, ec));
            }
            out.push('\n');
        }
    }
    out
}

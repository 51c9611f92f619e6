//! Mamdani fuzzy inference over seven-label triangular partitions.
//!
//! The engine turns a (normalized) error and error rate into crisp gain
//! increments for the three PID terms. Each increment comes from its own
//! 7×7 rule table; inference uses min for rule AND, max for aggregation and
//! the centroid of the clipped consequent triangles.

mod inference;
mod partition;
mod rules;

pub use inference::{
    centroid, infer, sample_shape, GainIncrements, GainScheduler, QUADRATURE_POINTS,
};
pub use partition::{fuzzify, FuzzyPartition, MembershipVector};
pub use rules::{dump_tables, GainTarget, RuleTable};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum FuzzyError {
    #[error("aggregated output has zero area (misconfigured partitions)")]
    ZeroActivation,
    #[error("invalid partition: {0}")]
    BadPartition(String),
    #[error("unknown linguistic label `{0}`")]
    UnknownLabel(String),
    #[error("rule table line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// One of the seven ordered linguistic labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LinguisticLabel {
    NB,
    NM,
    NS,
    ZO,
    PS,
    PM,
    PB,
}

impl LinguisticLabel {
    pub const ALL: [LinguisticLabel; 7] = [
        LinguisticLabel::NB,
        LinguisticLabel::NM,
        LinguisticLabel::NS,
        LinguisticLabel::ZO,
        LinguisticLabel::PS,
        LinguisticLabel::PM,
        LinguisticLabel::PB,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LinguisticLabel::NB => "NB",
            LinguisticLabel::NM => "NM",
            LinguisticLabel::NS => "NS",
            LinguisticLabel::ZO => "ZO",
            LinguisticLabel::PS => "PS",
            LinguisticLabel::PM => "PM",
            LinguisticLabel::PB => "PB",
        }
    }
}

impl fmt::Display for LinguisticLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LinguisticLabel {
    type Err = FuzzyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| FuzzyError::UnknownLabel(s.to_string()))
    }
}

//! Class labels for the two classification stages.
//!
//! Stage 1 separates hosting from non-hosting IPs; stage 2 separates
//! dedicated from shared hosting IPs. The two label spaces are distinct: a
//! model tagged with one stage never emits labels of the other.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Which classifier a dataset, model or label belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    /// Hosting vs. non-hosting.
    Hosting,
    /// Dedicated vs. shared (within hosting IPs).
    Dedicated,
}

impl Stage {
    /// The stage's two classes in canonical (lexicographic) order. Index 0
    /// is also the designated positive class for precision/recall/FPR.
    pub fn classes(self) -> [ClassLabel; 2] {
        match self {
            Stage::Hosting => [ClassLabel::Hosting, ClassLabel::NonHosting],
            Stage::Dedicated => [ClassLabel::Dedicated, ClassLabel::Shared],
        }
    }

    pub fn positive(self) -> ClassLabel {
        self.classes()[0]
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Hosting => "hosting",
            Stage::Dedicated => "dedicated",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "hosting" => Ok(Stage::Hosting),
            "dedicated" | "shared" => Ok(Stage::Dedicated),
            other => Err(format!("unknown stage {other:?} (expected hosting or dedicated)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassLabel {
    Hosting,
    NonHosting,
    Dedicated,
    Shared,
}

impl ClassLabel {
    pub fn stage(self) -> Stage {
        match self {
            ClassLabel::Hosting | ClassLabel::NonHosting => Stage::Hosting,
            ClassLabel::Dedicated | ClassLabel::Shared => Stage::Dedicated,
        }
    }

    /// Index within the stage's canonical class order.
    pub fn index(self) -> usize {
        self.stage().classes().iter().position(|c| *c == self).unwrap()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Hosting => "hosting",
            ClassLabel::NonHosting => "non-hosting",
            ClassLabel::Dedicated => "dedicated",
            ClassLabel::Shared => "shared",
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hosting" => Ok(ClassLabel::Hosting),
            "non-hosting" | "non_hosting" | "nonhosting" => Ok(ClassLabel::NonHosting),
            "dedicated" => Ok(ClassLabel::Dedicated),
            "shared" => Ok(ClassLabel::Shared),
            other => Err(format!("unknown class label {other:?}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_class_order_is_lexicographic() {
        let [a, b] = Stage::Hosting.classes();
        assert!(a.as_str() < b.as_str());
        let [a, b] = Stage::Dedicated.classes();
        assert!(a.as_str() < b.as_str());
    }

    #[test]
    fn label_stage_and_index() {
        assert_eq!(ClassLabel::Hosting.index(), 0);
        assert_eq!(ClassLabel::NonHosting.index(), 1);
        assert_eq!(ClassLabel::Dedicated.index(), 0);
        assert_eq!(ClassLabel::Shared.index(), 1);
        assert_eq!(ClassLabel::Shared.stage(), Stage::Dedicated);
    }

    #[test]
    fn parse_labels() {
        assert_eq!("non-hosting".parse::<ClassLabel>().unwrap(), ClassLabel::NonHosting);
        assert_eq!("Shared".parse::<ClassLabel>().unwrap(), ClassLabel::Shared);
        assert!("sharedish".parse::<ClassLabel>().is_err());
    }
}

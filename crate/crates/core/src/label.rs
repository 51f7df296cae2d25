//! Label vocabularies shared by every stage.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Token-level borrowing label from the source annotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GoldLabel {
    Native,
    FrLoan,
    DeLoan,
    EnLoan,
    CodeSwitch,
}

impl GoldLabel {
    pub const ALL: [GoldLabel; 5] = [
        GoldLabel::Native,
        GoldLabel::FrLoan,
        GoldLabel::DeLoan,
        GoldLabel::EnLoan,
        GoldLabel::CodeSwitch,
    ];

    /// The four labels a model may answer with in the classification task.
    pub const ANSWER_SPACE: [GoldLabel; 4] = [
        GoldLabel::Native,
        GoldLabel::FrLoan,
        GoldLabel::DeLoan,
        GoldLabel::EnLoan,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GoldLabel::Native => "NATIVE",
            GoldLabel::FrLoan => "FR_LOAN",
            GoldLabel::DeLoan => "DE_LOAN",
            GoldLabel::EnLoan => "EN_LOAN",
            GoldLabel::CodeSwitch => "CODE_SWITCH",
        }
    }

    pub fn is_loan(self) -> bool {
        matches!(self, GoldLabel::FrLoan | GoldLabel::DeLoan | GoldLabel::EnLoan)
    }

    /// Gold answer for the neology task. `None` for code-switches, which are
    /// not part of neology scoring.
    pub fn neology(self) -> Option<NeologyLabel> {
        match self {
            GoldLabel::Native => Some(NeologyLabel::No),
            GoldLabel::CodeSwitch => None,
            _ => Some(NeologyLabel::Yes),
        }
    }

    pub fn donor(self) -> Option<Donor> {
        match self {
            GoldLabel::FrLoan => Some(Donor::Fr),
            GoldLabel::DeLoan => Some(Donor::De),
            GoldLabel::EnLoan => Some(Donor::En),
            _ => None,
        }
    }
}

impl fmt::Display for GoldLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GoldLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GoldLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::UnknownValue {
                what: "gold label",
                value: s.to_string(),
            })
    }
}

/// Donor language of a borrowing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Donor {
    Fr,
    De,
    En,
}

impl Donor {
    pub fn code(self) -> &'static str {
        match self {
            Donor::Fr => "FR",
            Donor::De => "DE",
            Donor::En => "EN",
        }
    }

    pub fn language_name(self) -> &'static str {
        match self {
            Donor::Fr => "French",
            Donor::De => "German",
            Donor::En => "English",
        }
    }

    pub fn loan_label(self) -> GoldLabel {
        match self {
            Donor::Fr => GoldLabel::FrLoan,
            Donor::De => GoldLabel::DeLoan,
            Donor::En => GoldLabel::EnLoan,
        }
    }
}

impl fmt::Display for Donor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Donor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "FR" => Ok(Donor::Fr),
            "DE" => Ok(Donor::De),
            "EN" => Ok(Donor::En),
            _ => Err(Error::UnknownValue {
                what: "donor language",
                value: s.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum NeologyLabel {
    Yes,
    No,
}

impl NeologyLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            NeologyLabel::Yes => "YES",
            NeologyLabel::No => "NO",
        }
    }
}

impl fmt::Display for NeologyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Diachronic stratum of an instance, split at 2015-01-01.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Era {
    Established,
    Recent,
}

impl Era {
    pub fn as_str(self) -> &'static str {
        match self {
            Era::Established => "ESTABLISHED",
            Era::Recent => "RECENT",
        }
    }
}

impl fmt::Display for Era {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Classify,
    Neology,
}

impl Task {
    pub const ALL: [Task; 2] = [Task::Classify, Task::Neology];

    pub fn as_str(self) -> &'static str {
        match self {
            Task::Classify => "classify",
            Task::Neology => "neology",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "classify" => Ok(Task::Classify),
            "neology" => Ok(Task::Neology),
            _ => Err(Error::UnknownValue {
                what: "task",
                value: s.to_string(),
            }),
        }
    }
}

/// A parsed model answer as stored in prediction records.
///
/// Serialized as a bare string: a canonical label, `PARSE_ERROR`, or
/// `NO_RESPONSE` for requests that never produced a reply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Answer {
    Class(GoldLabel),
    Neology(NeologyLabel),
    ParseError,
    NoResponse,
}

impl Answer {
    pub const PARSE_ERROR: &'static str = "PARSE_ERROR";
    pub const NO_RESPONSE: &'static str = "NO_RESPONSE";

    pub fn as_str(&self) -> &'static str {
        match self {
            Answer::Class(l) => l.as_str(),
            Answer::Neology(n) => n.as_str(),
            Answer::ParseError => Self::PARSE_ERROR,
            Answer::NoResponse => Self::NO_RESPONSE,
        }
    }

    pub fn is_valid(&self) -> bool {
        matches!(self, Answer::Class(_) | Answer::Neology(_))
    }

    pub fn class(&self) -> Option<GoldLabel> {
        match self {
            Answer::Class(l) => Some(*l),
            _ => None,
        }
    }

    pub fn neology(&self) -> Option<NeologyLabel> {
        match self {
            Answer::Neology(n) => Some(*n),
            _ => None,
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Answer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            Self::PARSE_ERROR => Ok(Answer::ParseError),
            Self::NO_RESPONSE => Ok(Answer::NoResponse),
            "YES" => Ok(Answer::Neology(NeologyLabel::Yes)),
            "NO" => Ok(Answer::Neology(NeologyLabel::No)),
            other => other.parse().map(Answer::Class),
        }
    }
}

impl Serialize for Answer {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Answer {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn only_five_gold_labels_parse() {
        for l in GoldLabel::ALL {
            assert_eq!(l.as_str().parse::<GoldLabel>().unwrap(), l);
        }
        assert!("FR".parse::<GoldLabel>().is_err());
        assert!("native".parse::<GoldLabel>().is_err());
        assert!(serde_json::from_str::<GoldLabel>("\"IT_LOAN\"").is_err());
    }

    #[test]
    fn neology_mapping() {
        assert_eq!(GoldLabel::Native.neology(), Some(NeologyLabel::No));
        assert_eq!(GoldLabel::FrLoan.neology(), Some(NeologyLabel::Yes));
        assert_eq!(GoldLabel::EnLoan.neology(), Some(NeologyLabel::Yes));
        assert_eq!(GoldLabel::CodeSwitch.neology(), None);
    }

    #[test]
    fn answer_serializes_as_bare_string() {
        let a = Answer::Class(GoldLabel::DeLoan);
        assert_eq!(serde_json::to_string(&a).unwrap(), "\"DE_LOAN\"");
        let back: Answer = serde_json::from_str("\"PARSE_ERROR\"").unwrap();
        assert_eq!(back, Answer::ParseError);
        let yes: Answer = serde_json::from_str("\"YES\"").unwrap();
        assert_eq!(yes, Answer::Neology(NeologyLabel::Yes));
    }
}

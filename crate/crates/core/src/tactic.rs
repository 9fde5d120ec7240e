//! Persuasion tactic identifiers and labelled arguments.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::treebank::ParseString;

/// The fourteen fine-grained persuasion tactics, in their canonical order.
/// The order is also the tie-breaking order for classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TacticId {
    Outcome,
    SocialEsteem,
    ThreatPromise,
    SelfFeeling,
    GoodBadTraits,
    DeonticMoralAppeal,
    Vip,
    Popularity,
    FavorsDebts,
    Consistency,
    Empathy,
    Scarcity,
    Recharacterization,
    Reasoning,
}

pub const TACTIC_COUNT: usize = 14;

impl TacticId {
    pub const ALL: [TacticId; TACTIC_COUNT] = [
        TacticId::Outcome,
        TacticId::SocialEsteem,
        TacticId::ThreatPromise,
        TacticId::SelfFeeling,
        TacticId::GoodBadTraits,
        TacticId::DeonticMoralAppeal,
        TacticId::Vip,
        TacticId::Popularity,
        TacticId::FavorsDebts,
        TacticId::Consistency,
        TacticId::Empathy,
        TacticId::Scarcity,
        TacticId::Recharacterization,
        TacticId::Reasoning,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<TacticId> {
        Self::ALL.get(index).copied()
    }

    /// Lowercase snake-case name used in files and on the command line.
    pub fn name(self) -> &'static str {
        match self {
            TacticId::Outcome => "outcome",
            TacticId::SocialEsteem => "social_esteem",
            TacticId::ThreatPromise => "threat_promise",
            TacticId::SelfFeeling => "self_feeling",
            TacticId::GoodBadTraits => "good_bad_traits",
            TacticId::DeonticMoralAppeal => "deontic_moral_appeal",
            TacticId::Vip => "vip",
            TacticId::Popularity => "popularity",
            TacticId::FavorsDebts => "favors_debts",
            TacticId::Consistency => "consistency",
            TacticId::Empathy => "empathy",
            TacticId::Scarcity => "scarcity",
            TacticId::Recharacterization => "recharacterization",
            TacticId::Reasoning => "reasoning",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            TacticId::Outcome => "Outcome",
            TacticId::SocialEsteem => "Social Esteem",
            TacticId::ThreatPromise => "Threat/Promise",
            TacticId::SelfFeeling => "Self-Feeling",
            TacticId::GoodBadTraits => "Good/Bad Traits",
            TacticId::DeonticMoralAppeal => "Deontic/Moral Appeal",
            TacticId::Vip => "VIP",
            TacticId::Popularity => "Popularity",
            TacticId::FavorsDebts => "Favors/Debts",
            TacticId::Consistency => "Consistency",
            TacticId::Empathy => "Empathy",
            TacticId::Scarcity => "Scarcity",
            TacticId::Recharacterization => "Recharacterization",
            TacticId::Reasoning => "Reasoning",
        }
    }
}

impl fmt::Display for TacticId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TacticId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TacticNames::builtin().tactic(s)
    }
}

impl Serialize for TacticId {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for TacticId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let name = String::deserialize(deserializer)?;
        name.parse().map_err(serde::de::Error::custom)
    }
}

/// A tactic, or the reject bucket for text that is not an argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Category {
    Tactic(TacticId),
    NonArgument,
}

impl Category {
    pub const NON_ARGUMENT: &'static str = "non-argument";

    pub fn tactic(self) -> Option<TacticId> {
        match self {
            Category::Tactic(t) => Some(t),
            Category::NonArgument => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::Tactic(t) => t.name(),
            Category::NonArgument => Self::NON_ARGUMENT,
        }
    }
}

impl From<TacticId> for Category {
    fn from(t: TacticId) -> Self {
        Category::Tactic(t)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TacticNames::builtin().category(s)
    }
}

impl Serialize for Category {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Category {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let name = String::deserialize(deserializer)?;
        name.parse().map_err(serde::de::Error::custom)
    }
}

/// Maps free-form tactic names onto [`TacticId`]s.
///
/// Lookup ignores case and treats any run of non-alphanumeric characters as
/// a single `_`, so "Deontic/Moral Appeal", "deontic-moral appeal" and
/// "deontic_moral_appeal" all resolve to the same tactic.
#[derive(Debug, Clone)]
pub struct TacticNames {
    names: HashMap<String, Category>,
}

impl Default for TacticNames {
    fn default() -> Self {
        let mut names = HashMap::new();
        for t in TacticId::ALL {
            names.insert(t.name().to_string(), Category::Tactic(t));
        }
        for (alias, t) in [
            ("outcomes", TacticId::Outcome),
            ("social", TacticId::SocialEsteem),
            ("threat_or_promise", TacticId::ThreatPromise),
            ("self_feelings", TacticId::SelfFeeling),
            ("good_traits", TacticId::GoodBadTraits),
            ("bad_traits", TacticId::GoodBadTraits),
            ("deontic", TacticId::DeonticMoralAppeal),
            ("moral_appeal", TacticId::DeonticMoralAppeal),
            ("favors", TacticId::FavorsDebts),
            ("debts", TacticId::FavorsDebts),
            ("reason", TacticId::Reasoning),
        ] {
            names.insert(alias.to_string(), Category::Tactic(t));
        }
        for alias in ["non_argument", "nonargument", "none"] {
            names.insert(alias.to_string(), Category::NonArgument);
        }
        TacticNames { names }
    }
}

fn normalize(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    for c in name.trim().chars() {
        if c.is_alphanumeric() {
            out.extend(c.to_lowercase());
        } else if !out.is_empty() && !out.ends_with('_') {
            out.push('_');
        }
    }
    while out.ends_with('_') {
        out.pop();
    }
    out
}

impl TacticNames {
    fn builtin() -> &'static TacticNames {
        static BUILTIN: std::sync::OnceLock<TacticNames> = std::sync::OnceLock::new();
        BUILTIN.get_or_init(TacticNames::default)
    }

    pub fn with_alias(mut self, alias: &str, category: Category) -> Self {
        self.names.insert(normalize(alias), category);
        self
    }

    pub fn category(&self, name: &str) -> Result<Category> {
        self.names
            .get(&normalize(name))
            .copied()
            .ok_or_else(|| Error::UnknownTactic(name.to_string()))
    }

    pub fn tactic(&self, name: &str) -> Result<TacticId> {
        match self.category(name)? {
            Category::Tactic(t) => Ok(t),
            Category::NonArgument => Err(Error::UnknownTactic(name.to_string())),
        }
    }
}

/// One argument with its parse string and gold category.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledArgument {
    pub id: String,
    pub parse: ParseString,
    pub gold: Category,
    pub source: String,
}

impl LabeledArgument {
    pub fn new(id: impl Into<String>, parse: ParseString, gold: impl Into<Category>) -> Self {
        LabeledArgument {
            id: id.into(),
            parse,
            gold: gold.into(),
            source: String::new(),
        }
    }
}

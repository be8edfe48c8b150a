//! Run configuration, read from a TOML file. Every section and key is
//! optional; command-line flags override what is set here.
//!
//! ```toml
//! [standardize]
//! tense_table = { "Past,Prosp" = "Fut" }
//! iri_window = 3
//! pronoun_person = true
//!
//! [dedup]
//! min_chars = 20
//! min_tokens = 5
//!
//! [lasla]
//! form = 1
//! lemma = 2
//! upos = 3
//! feats = 5
//!
//! [lint]
//! rules = ["SCONJ_HAS_NOMINAL_FEATS"]
//!
//! [splits]
//! dev_fraction = 0.03
//! dev_rounding = "round"
//! min_test = 1000
//! assignment = "auto"
//!
//! [eval]
//! iterations = 10000
//! include_upos = false
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::convert::ConvertOptions;
use crate::dedup::MinOverlap;
use crate::error::{Error, Result};
use crate::harmonize::{IriWindow, PronounPersons};
use crate::lasla::ColumnMapping;
use crate::splits::SplitOptions;
use crate::standardize::{Flavor, TenseAspectTable, Violation};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StandardizeConfig {
    pub tense_table: BTreeMap<String, String>,
    /// Words between a supine and `iri`; unset means the whole sentence.
    pub iri_window: Option<usize>,
    pub pronoun_person: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DedupConfig {
    pub min_chars: usize,
    pub min_tokens: usize,
}

impl Default for DedupConfig {
    fn default() -> Self {
        let m = MinOverlap::default();
        DedupConfig {
            min_chars: m.chars,
            min_tokens: m.tokens,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LintConfig {
    pub rules: Option<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub iterations: u64,
    pub include_upos: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            iterations: 10_000,
            include_upos: false,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub standardize: StandardizeConfig,
    pub dedup: DedupConfig,
    pub lasla: Option<ColumnMapping>,
    pub lint: LintConfig,
    pub splits: SplitOptions,
    pub eval: EvalConfig,
    /// Hash of the source text; all zeros for the built-in defaults.
    #[serde(skip)]
    pub hash: String,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(m) = &c.lasla {
            m.validate()?;
        }
        c.convert_options(Flavor::Ud)?;
        c.lint_rules()?;
        c.hash = hex::encode(Sha256::digest(text.as_bytes()));
        Ok(c)
    }

    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Config {
                hash: "0".repeat(64),
                ..Config::default()
            }),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::from(e).in_file(p))?;
                Self::parse(&text).map_err(|e| e.in_file(p))
            }
        }
    }

    pub fn convert_options(&self, flavor: Flavor) -> Result<ConvertOptions> {
        let table = TenseAspectTable::default().with_overrides(
            self.standardize
                .tense_table
                .iter()
                .map(|(k, v)| (k.as_str(), v.as_str())),
        )?;
        Ok(ConvertOptions {
            flavor,
            tense_table: table,
            iri_window: IriWindow(self.standardize.iri_window),
            pronoun_persons: self.standardize.pronoun_person.then(PronounPersons::latin_default),
        })
    }

    pub fn min_overlap(&self) -> MinOverlap {
        MinOverlap {
            chars: self.dedup.min_chars,
            tokens: self.dedup.min_tokens,
        }
    }

    pub fn lasla_mapping(&self) -> ColumnMapping {
        self.lasla.clone().unwrap_or_default()
    }

    pub fn lint_rules(&self) -> Result<Vec<Violation>> {
        match &self.lint.rules {
            None => Ok(Violation::DEFAULT.to_vec()),
            Some(names) => names.iter().map(|n| n.parse()).collect(),
        }
    }
}

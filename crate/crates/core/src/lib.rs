//! Tools for building a standardized Latin morphology corpus from UD and
//! LASLA treebanks: CoNLL-U I/O, feature standardization and
//! harmonization, cross-treebank deduplication, annotation agreement,
//! time-period splits, and tagger evaluation.

pub mod agreement;
pub mod config;
pub mod conllu;
pub mod convert;
pub mod dedup;
pub mod error;
pub mod eval;
pub mod harmonize;
pub mod lasla;
pub mod metadata;
pub mod normalize;
pub mod report;
pub mod splits;
pub mod standardize;

pub use conllu::{parse_conllu, parse_conllu_str, serialize_conllu, write_conllu, FeatureBundle, Misc, Node, Sentence, Token};
pub use error::{Error, Result};
pub use standardize::{Flavor, StandardRecord, TenseAspectTable};

//! JSON configuration: taxonomy rules, mapping profiles and alert-criteria
//! overrides.
//!
//! Defaults are compiled in from `config/`; a directory named by
//! `GRIDMAP_CONFIG_DIR` (or explicit file paths) takes precedence.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};

use gridmap_core::mapping::{validate_overrides, CategoryMapping};
use gridmap_core::{
    Axis, AxisDistribution, EventCategory, MappingError, MappingProfile, MatchKind, OverrideRule,
    TaxonomyError, TaxonomyRuleSet,
};

pub const DEFAULT_TAXONOMY: &str = include_str!("../config/taxonomy.json");
pub const DEFAULT_PROFILE: &str = include_str!("../config/profile.json");
pub const DEFAULT_OVERRIDES: &str = include_str!("../config/overrides.json");

pub const TAXONOMY_FILE: &str = "taxonomy.json";
pub const PROFILE_FILE: &str = "profile.json";
pub const OVERRIDES_FILE: &str = "overrides.json";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{origin}: {source}")]
    Json {
        origin: String,
        source: serde_json::Error,
    },
    #[error("{origin}: {source}")]
    Taxonomy { origin: String, source: TaxonomyError },
    #[error("{origin}: {source}")]
    Mapping { origin: String, source: MappingError },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TaxonomyDoc {
    #[allow(dead_code)]
    #[serde(default)]
    version: Option<String>,
    #[allow(dead_code)]
    #[serde(default)]
    description: Option<String>,
    categories: Vec<CategoryDoc>,
    rules: Vec<RuleDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CategoryDoc {
    name: String,
    #[serde(default)]
    catch_all: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleDoc {
    #[serde(rename = "match")]
    kind: MatchKind,
    pattern: String,
    target: String,
}

type CellWeights = BTreeMap<String, f64>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileDoc {
    #[allow(dead_code)]
    #[serde(default)]
    version: Option<String>,
    #[allow(dead_code)]
    #[serde(default)]
    description: Option<String>,
    categories: BTreeMap<String, AxesDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AxesDoc {
    scope: CellWeights,
    direction: CellWeights,
    domain: CellWeights,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OverrideDoc {
    category: String,
    criteria_contains: String,
    replace: ReplaceDoc,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ReplaceDoc {
    scope: Option<CellWeights>,
    direction: Option<CellWeights>,
    domain: Option<CellWeights>,
}

fn parse_json<'a, T: Deserialize<'a>>(text: &'a str, origin: &str) -> Result<T, ConfigError> {
    serde_json::from_str(text).map_err(|source| ConfigError::Json {
        origin: origin.to_string(),
        source,
    })
}

fn distribution(axis: Axis, weights: &CellWeights, label: &str) -> Result<AxisDistribution, MappingError> {
    AxisDistribution::from_keyed(axis, weights.iter().map(|(k, w)| (k.as_str(), *w)), label)
}

/// Parses and validates a taxonomy document. `origin` names the source in
/// errors.
pub fn load_taxonomy(text: &str, origin: &str) -> Result<TaxonomyRuleSet, ConfigError> {
    let doc: TaxonomyDoc = parse_json(text, origin)?;
    let categories = doc
        .categories
        .into_iter()
        .map(|c| EventCategory {
            name: c.name,
            is_catch_all: c.catch_all,
        })
        .collect();
    TaxonomyRuleSet::new(
        categories,
        doc.rules.into_iter().map(|r| (r.kind, r.pattern, r.target)),
    )
    .map_err(|source| ConfigError::Taxonomy {
        origin: origin.to_string(),
        source,
    })
}

/// Parses a profile and checks it covers exactly the taxonomy's categories.
/// Cells left out of an axis object have weight 0; sums off by more than
/// 1e-9 are errors, never renormalized.
pub fn load_mapping_profile(
    text: &str,
    taxonomy: &TaxonomyRuleSet,
    origin: &str,
) -> Result<MappingProfile, ConfigError> {
    let doc: ProfileDoc = parse_json(text, origin)?;
    let mapping_err = |source| ConfigError::Mapping {
        origin: origin.to_string(),
        source,
    };
    let mut entries = BTreeMap::new();
    for (name, axes) in &doc.categories {
        let entry = CategoryMapping::new(
            name,
            distribution(Axis::Scope, &axes.scope, name).map_err(mapping_err)?,
            distribution(Axis::Direction, &axes.direction, name).map_err(mapping_err)?,
            distribution(Axis::Domain, &axes.domain, name).map_err(mapping_err)?,
        )
        .map_err(mapping_err)?;
        entries.insert(name.clone(), entry);
    }
    MappingProfile::new(entries, taxonomy).map_err(mapping_err)
}

pub fn load_overrides(
    text: &str,
    taxonomy: &TaxonomyRuleSet,
    origin: &str,
) -> Result<Vec<OverrideRule>, ConfigError> {
    let docs: Vec<OverrideDoc> = parse_json(text, origin)?;
    let mapping_err = |source| ConfigError::Mapping {
        origin: origin.to_string(),
        source,
    };
    let mut rules = Vec::with_capacity(docs.len());
    for (index, doc) in docs.iter().enumerate() {
        let label = format!("override {index} ({})", doc.category);
        let mut replacements = Vec::new();
        for (axis, weights) in [
            (Axis::Scope, &doc.replace.scope),
            (Axis::Direction, &doc.replace.direction),
            (Axis::Domain, &doc.replace.domain),
        ] {
            if let Some(w) = weights {
                replacements.push(distribution(axis, w, &label).map_err(mapping_err)?);
            }
        }
        rules.push(
            OverrideRule::new(index, &doc.category, &doc.criteria_contains, replacements)
                .map_err(mapping_err)?,
        );
    }
    validate_overrides(&rules, taxonomy).map_err(mapping_err)?;
    Ok(rules)
}

/// Where a configuration document came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigSource {
    Builtin(&'static str),
    File(PathBuf),
}

/// Raw configuration text plus its origin and SHA-256.
#[derive(Debug, Clone)]
pub struct ConfigText {
    pub source: ConfigSource,
    pub text: String,
}

impl ConfigText {
    pub fn builtin(name: &'static str, text: &'static str) -> Self {
        ConfigText {
            source: ConfigSource::Builtin(name),
            text: text.to_string(),
        }
    }

    pub fn read(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(ConfigText {
            source: ConfigSource::File(path.to_path_buf()),
            text,
        })
    }

    /// Explicit path, else `<dir>/<file_name>` when it exists, else the
    /// compiled-in default.
    pub fn resolve(
        explicit: Option<&Path>,
        dir: Option<&Path>,
        file_name: &'static str,
        builtin: &'static str,
    ) -> Result<Self, ConfigError> {
        if let Some(path) = explicit {
            return Self::read(path);
        }
        if let Some(candidate) = dir.map(|d| d.join(file_name)).filter(|p| p.is_file()) {
            return Self::read(&candidate);
        }
        Ok(Self::builtin(file_name, builtin))
    }

    pub fn origin(&self) -> String {
        match &self.source {
            ConfigSource::Builtin(name) => format!("builtin:{name}"),
            ConfigSource::File(path) => path.display().to_string(),
        }
    }

    pub fn sha256(&self) -> String {
        sha256_hex(self.text.as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// The validated taxonomy, profile and overrides used by one run.
#[derive(Debug, Clone)]
pub struct Configuration {
    pub taxonomy: TaxonomyRuleSet,
    pub profile: MappingProfile,
    pub overrides: Vec<OverrideRule>,
    pub taxonomy_text: ConfigText,
    pub profile_text: ConfigText,
    pub overrides_text: ConfigText,
}

#[derive(Debug, Clone, Default)]
pub struct ConfigPaths {
    pub dir: Option<PathBuf>,
    pub taxonomy: Option<PathBuf>,
    pub profile: Option<PathBuf>,
    pub overrides: Option<PathBuf>,
}

impl Configuration {
    pub fn load(paths: &ConfigPaths) -> Result<Self, ConfigError> {
        let dir = paths.dir.as_deref();
        let taxonomy_text =
            ConfigText::resolve(paths.taxonomy.as_deref(), dir, TAXONOMY_FILE, DEFAULT_TAXONOMY)?;
        let profile_text =
            ConfigText::resolve(paths.profile.as_deref(), dir, PROFILE_FILE, DEFAULT_PROFILE)?;
        let overrides_text =
            ConfigText::resolve(paths.overrides.as_deref(), dir, OVERRIDES_FILE, DEFAULT_OVERRIDES)?;
        let taxonomy = load_taxonomy(&taxonomy_text.text, &taxonomy_text.origin())?;
        let profile = load_mapping_profile(&profile_text.text, &taxonomy, &profile_text.origin())?;
        let overrides = load_overrides(&overrides_text.text, &taxonomy, &overrides_text.origin())?;
        Ok(Configuration {
            taxonomy,
            profile,
            overrides,
            taxonomy_text,
            profile_text,
            overrides_text,
        })
    }

    /// The compiled-in defaults.
    pub fn builtin() -> Result<Self, ConfigError> {
        Self::load(&ConfigPaths::default())
    }
}

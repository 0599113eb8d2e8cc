//! TOML run configuration: per-parliament profiles plus the shared
//! policy, window, and induction settings. Every field has the study's
//! default, so a minimal config only lists profiles.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use parlmine::cleaning::CleaningPolicy;
use parlmine::deviance::InductionConfig;
use parlmine::eventlog::RelabelRule;
use serde::Deserialize;

pub fn default_date_formats() -> Vec<String> {
    vec!["%d.%m.%Y".to_string(), "%Y-%m-%d".to_string()]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub policy: PolicyConfig,
    #[serde(default)]
    pub window: WindowConfig,
    #[serde(default)]
    pub induction: InductionSection,
    #[serde(default = "default_delay_factor")]
    pub delay_factor: f64,
    #[serde(default)]
    pub sidecars: SidecarConfig,
    #[serde(default)]
    pub profiles: Vec<ProfileConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            output_dir: None,
            policy: PolicyConfig::default(),
            window: WindowConfig::default(),
            induction: InductionSection::default(),
            delay_factor: default_delay_factor(),
            sidecars: SidecarConfig::default(),
            profiles: Vec::new(),
        }
    }
}

fn default_delay_factor() -> f64 {
    parlmine::enrich::DEFAULT_DELAY_FACTOR
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    pub min_year: i32,
    pub max_year: i32,
    pub max_cycle_days: i64,
    pub fallback_attribute: String,
    pub fallback_excluded_values: Vec<String>,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        let policy = CleaningPolicy::default();
        PolicyConfig {
            min_year: policy.min_year,
            max_year: policy.max_year,
            max_cycle_days: policy.max_cycle_days,
            fallback_attribute: policy.fallback_attribute,
            fallback_excluded_values: policy.fallback_excluded_values,
        }
    }
}

impl PolicyConfig {
    pub fn to_policy(&self) -> CleaningPolicy {
        CleaningPolicy {
            min_year: self.min_year,
            max_year: self.max_year,
            max_cycle_days: self.max_cycle_days,
            fallback_attribute: self.fallback_attribute.clone(),
            fallback_excluded_values: self.fallback_excluded_values.clone(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub first_year: i32,
    pub last_year: i32,
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig {
            first_year: 2006,
            last_year: 2020,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InductionSection {
    pub test_fraction: f64,
    pub seed: u64,
    pub hidden_patterns: Vec<String>,
    pub max_conditions: usize,
    pub beam_width: usize,
}

impl Default for InductionSection {
    fn default() -> Self {
        let config = InductionConfig::default();
        InductionSection {
            test_fraction: config.test_fraction,
            seed: config.seed,
            hidden_patterns: config.hidden_patterns,
            max_conditions: config.max_conditions,
            beam_width: config.beam_width,
        }
    }
}

impl InductionSection {
    pub fn to_config(&self) -> InductionConfig {
        InductionConfig {
            test_fraction: self.test_fraction,
            seed: self.seed,
            hidden_patterns: self.hidden_patterns.clone(),
            max_conditions: self.max_conditions,
            beam_width: self.beam_width,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SidecarConfig {
    pub year_features: Option<PathBuf>,
    pub doc_features: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub name: String,
    pub inputs: Vec<PathBuf>,
    #[serde(default = "default_date_formats")]
    pub date_formats: Vec<String>,
    #[serde(default)]
    pub passed_activities: Vec<String>,
    #[serde(default)]
    pub relabel: Vec<RelabelConfig>,
}

impl ProfileConfig {
    pub fn relabel_rules(&self) -> Vec<RelabelRule> {
        self.relabel.iter().map(RelabelConfig::to_rule).collect()
    }

    pub fn passed_set(&self) -> BTreeSet<String> {
        self.passed_activities.iter().cloned().collect()
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelabelConfig {
    pub activity: String,
    #[serde(default)]
    pub attribute_key: Option<String>,
    #[serde(default)]
    pub attribute_pattern: Option<String>,
    pub new_label: String,
}

impl RelabelConfig {
    fn to_rule(&self) -> RelabelRule {
        RelabelRule {
            activity: self.activity.clone(),
            attribute_key: self.attribute_key.clone(),
            attribute_pattern: self.attribute_pattern.clone(),
            new_label: self.new_label.clone(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let config: RunConfig =
            toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        let mut names = BTreeSet::new();
        for profile in &self.profiles {
            anyhow::ensure!(
                names.insert(profile.name.as_str()),
                "duplicate profile name {:?}",
                profile.name
            );
            anyhow::ensure!(
                !profile.inputs.is_empty(),
                "profile {:?} lists no input files",
                profile.name
            );
        }
        Ok(())
    }

    pub fn profile(&self, name: &str) -> Result<&ProfileConfig> {
        self.profiles
            .iter()
            .find(|p| p.name == name)
            .with_context(|| {
                format!(
                    "profile {name:?} not found; known profiles: {}",
                    self.profiles
                        .iter()
                        .map(|p| p.name.as_str())
                        .collect::<Vec<_>>()
                        .join(", ")
                )
            })
    }
}

use std::path::{Path, PathBuf};
use std::sync::Arc;

use causalprior::data::DiscretizationSpec;
use causalprior::graph::VariableScheme;
use causalprior::notears::NotearsConfig;
use causalprior::nsclc::{default_discretization, nsclc_scheme};
use causalprior::pc::{CiStatistic, PcConfig};
use causalprior::scoring::ScoreVariant;
use causalprior_llm::HttpConfig;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToolkitConfig {
    /// Scheme JSON; the bundled NSCLC scheme when absent.
    pub scheme: Option<PathBuf>,
    pub discretization: Option<DiscretizationSpec>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub scoring: ScoringDefaults,
    pub pc: PcDefaults,
    pub notears: NotearsConfig,
    pub llm: LlmSettings,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoringDefaults {
    pub ess: Vec<f64>,
    pub variant: ScoreVariant,
}

impl Default for ScoringDefaults {
    fn default() -> Self {
        ScoringDefaults {
            ess: vec![5.0, 10.0, 15.0],
            variant: ScoreVariant::Canonical,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PcDefaults {
    pub alpha: f64,
    pub max_cond_size: Option<usize>,
    pub ci_test: CiStatistic,
}

impl Default for PcDefaults {
    fn default() -> Self {
        let d = PcConfig::default();
        PcDefaults {
            alpha: d.alpha,
            max_cond_size: d.max_cond_size,
            ci_test: d.ci_test,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmSettings {
    pub url: String,
    pub model: String,
    pub api_key_env: String,
    pub temperature: f64,
    pub timeout_secs: u64,
    pub max_retries: u32,
    /// Appended to by the HTTP backend on every exchange.
    pub transcript: Option<PathBuf>,
    pub context: String,
    /// Alias map JSON; the bundled NSCLC map when absent.
    pub aliases: Option<PathBuf>,
}

impl Default for LlmSettings {
    fn default() -> Self {
        let http = HttpConfig::default();
        LlmSettings {
            url: http.url,
            model: http.model,
            api_key_env: http.api_key_env,
            temperature: 0.0,
            timeout_secs: http.timeout_secs,
            max_retries: http.max_retries,
            transcript: None,
            context: "NSCLC".into(),
            aliases: None,
        }
    }
}

impl LlmSettings {
    pub fn http_config(&self) -> HttpConfig {
        HttpConfig {
            url: self.url.clone(),
            model: self.model.clone(),
            api_key_env: self.api_key_env.clone(),
            timeout_secs: self.timeout_secs,
            max_retries: self.max_retries,
            transcript: self.transcript.clone(),
        }
    }
}

impl ToolkitConfig {
    /// Parses and validates a TOML file. Relative paths inside it are taken
    /// relative to the file's directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg: ToolkitConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let rebase = |p: &mut Option<PathBuf>| {
            if let Some(p) = p.as_mut() {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        };
        rebase(&mut cfg.scheme);
        rebase(&mut cfg.output_dir);
        rebase(&mut cfg.llm.transcript);
        rebase(&mut cfg.llm.aliases);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        for p in [&self.scheme, &self.llm.aliases].into_iter().flatten() {
            if !p.is_file() {
                return Err(CliError::Config(format!("referenced file {} does not exist", p.display())));
            }
        }
        if self.scoring.ess.is_empty() {
            return Err(CliError::Config("scoring.ess must not be empty".into()));
        }
        if self.scoring.ess.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(CliError::Config("scoring.ess values must be positive".into()));
        }
        if !(self.pc.alpha > 0.0 && self.pc.alpha < 1.0) {
            return Err(CliError::Config("pc.alpha must lie in (0, 1)".into()));
        }
        self.notears.validate()?;
        Ok(())
    }

    pub fn load_scheme(&self) -> CliResult<Arc<VariableScheme>> {
        match &self.scheme {
            None => Ok(nsclc_scheme()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                Ok(Arc::new(VariableScheme::from_json(&text)?))
            }
        }
    }

    pub fn discretization(&self) -> DiscretizationSpec {
        match (&self.discretization, &self.scheme) {
            (Some(d), _) => d.clone(),
            (None, None) => default_discretization(),
            (None, Some(_)) => DiscretizationSpec::default(),
        }
    }

    pub fn pc_config(&self) -> PcConfig {
        PcConfig {
            alpha: self.pc.alpha,
            max_cond_size: self.pc.max_cond_size,
            ci_test: self.pc.ci_test,
        }
    }
}

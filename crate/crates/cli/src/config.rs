use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use qpq::protocol::Database;
use qpq::strategies::{by_name, multi_answer_database, multi_answer_nonrhetoric_database, BobStrategy};
use qpq::variants::VariantConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_N: u32 = 2;
pub const DEFAULT_D_R: usize = 8;
pub const DEFAULT_TRIALS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Address bits; the database has 2^n entries [default: 2]
    #[arg(long, global = true)]
    pub n: Option<u32>,
    /// Answer register dimension [default: 8]
    #[arg(long = "d-r", global = true)]
    pub d_r: Option<usize>,
    /// Seed for every sampled quantity
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Catalog strategy name
    #[arg(long, global = true)]
    pub strategy: Option<String>,
    /// Strategy descriptor (JSON) instead of a catalog name
    #[arg(long, global = true)]
    pub strategy_file: Option<PathBuf>,
    /// canonical, phase, amplitude, entangled or non_rhetoric
    #[arg(long, global = true)]
    pub variant: Option<String>,
    /// Number of phases for the phase variant; 0 samples continuously [default: 16]
    #[arg(long, global = true)]
    pub theta_grid: Option<usize>,
    /// Target index
    #[arg(long, global = true)]
    pub j: Option<usize>,
    /// Number of sampled sessions [default: 10000]
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Output file; stdout when absent
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Allow rounds to touch any of Alice's query and reply registers
    #[arg(long, global = true)]
    pub unconstrained: bool,
    /// Largest ε for which a strategy's checks are reported
    #[arg(long, global = true)]
    pub epsilon_threshold: Option<f64>,
    /// Strategy parameter (λ for weak_entangling, assumed phase for lucky_reprepare)
    #[arg(long, global = true)]
    pub param: Option<f64>,
    /// JSON file with the same keys as the flags; flags win
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

/// Variant as written in a config file: a bare name or a full object.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum VariantEntry {
    Name(String),
    Full(VariantConfig),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    n: Option<u32>,
    #[serde(alias = "d_R")]
    d_r: Option<usize>,
    seed: Option<u64>,
    strategy: Option<String>,
    strategy_file: Option<PathBuf>,
    variant: Option<VariantEntry>,
    theta_grid: Option<usize>,
    j: Option<usize>,
    trials: Option<usize>,
    output: Option<PathBuf>,
    format: Option<Format>,
    unconstrained: Option<bool>,
    epsilon_threshold: Option<f64>,
    param: Option<f64>,
}

/// Flags merged over the config file over the defaults.
#[derive(Debug, Clone)]
pub struct Settings {
    pub n: u32,
    pub d_r: usize,
    pub seed: Option<u64>,
    pub strategy: Option<String>,
    pub strategy_file: Option<PathBuf>,
    pub variant: VariantConfig,
    pub j: Option<usize>,
    pub trials: usize,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub unconstrained: bool,
    pub epsilon_threshold: Option<f64>,
    pub param: Option<f64>,
}

pub fn variant_from_name(name: &str, theta_grid: Option<usize>) -> Result<VariantConfig, CliError> {
    VariantConfig::from_name(name, theta_grid).map_err(|e| CliError::Config(e.to_string()))
}

fn read_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("bad config {}: {e}", path.display())))
}

impl Settings {
    pub fn resolve(args: &CommonArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(p) => read_file(p)?,
            None => FileConfig::default(),
        };
        let theta_grid = args.theta_grid.or(file.theta_grid);
        let variant = match (&args.variant, file.variant) {
            (Some(name), _) => variant_from_name(name, theta_grid)?,
            (None, Some(VariantEntry::Name(name))) => variant_from_name(&name, theta_grid)?,
            (None, Some(VariantEntry::Full(v))) => v,
            (None, None) => VariantConfig::Canonical,
        };
        let s = Settings {
            n: args.n.or(file.n).unwrap_or(DEFAULT_N),
            d_r: args.d_r.or(file.d_r).unwrap_or(DEFAULT_D_R),
            seed: args.seed.or(file.seed),
            strategy: args.strategy.clone().or(file.strategy),
            strategy_file: args.strategy_file.clone().or(file.strategy_file),
            variant,
            j: args.j.or(file.j),
            trials: args.trials.or(file.trials).unwrap_or(DEFAULT_TRIALS),
            output: args.output.clone().or(file.output),
            format: args.format.or(file.format),
            unconstrained: args.unconstrained || file.unconstrained.unwrap_or(false),
            epsilon_threshold: args.epsilon_threshold.or(file.epsilon_threshold),
            param: args.param.or(file.param),
        };
        if !(1..=3).contains(&s.n) {
            return Err(CliError::Config(format!("n = {} outside 1..=3", s.n)));
        }
        if s.d_r < 2 {
            return Err(CliError::Config("d_R must be at least 2".into()));
        }
        if let Some(t) = s.epsilon_threshold {
            if !(0.0..=1.0).contains(&t) {
                return Err(CliError::Config(format!("epsilon threshold {t} outside [0, 1]")));
            }
        }
        s.variant.validate(1usize << s.n).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(s)
    }

    pub fn entries(&self) -> usize {
        1usize << self.n
    }

    pub fn rounds(&self, strategy_name: &str) -> usize {
        match (&self.variant, strategy_name) {
            (VariantConfig::NonRhetoric { .. }, _) | (_, "multi_answer_nonrhetoric") => 3,
            _ => 2,
        }
    }

    pub fn require_seed(&self, what: &str) -> Result<u64, CliError> {
        self.seed
            .ok_or_else(|| CliError::Config(format!("{what} samples sessions; pass --seed")))
    }

    /// Database matching the strategy: the multi-answer attacks need their
    /// own tables.
    pub fn database(&self, strategy_name: &str) -> Result<Database, CliError> {
        let db = match strategy_name {
            "multi_answer_rhetoric" => multi_answer_database(self.d_r),
            "multi_answer_nonrhetoric" => multi_answer_nonrhetoric_database(self.d_r),
            _ => Database::standard(self.n, self.d_r),
        };
        db.map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn strategy_name(&self, default: &str) -> String {
        self.strategy.clone().unwrap_or_else(|| default.to_string())
    }

    pub fn load_strategy(&self, name: &str, db: &Database) -> Result<BobStrategy, CliError> {
        if let Some(path) = &self.strategy_file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            return BobStrategy::from_json(&text).map_err(|e| CliError::Config(e.to_string()));
        }
        let param = self.param.unwrap_or(match name {
            "weak_entangling" => 0.3,
            _ => 0.0,
        });
        by_name(name, db.n(), self.rounds(name), param, db).map_err(|e| CliError::Config(e.to_string()))
    }
}

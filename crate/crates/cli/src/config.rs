use std::path::PathBuf;

use mor_core::groups::{sl_generators, sp_generators};
use mor_core::lindec::DEFAULT_BSGS_BOUND;
use mor_core::mor::{KeygenParams, DEFAULT_EXPONENT_CAP};
use mor_core::{Family, GroupSpec, Prime};

use crate::error::{param, CliError, CliResult};
use crate::format;

pub const DEFAULT_WORD_LEN: usize = 20;
pub const DEFAULT_SEED: u64 = 0;

/// Validated run parameters shared by all subcommands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub family: Family,
    pub d: usize,
    pub p: Prime,
    pub t_cap: u64,
    pub r_cap: u64,
    pub conjugator_word_length: usize,
    pub bsgs_bound: u64,
    pub seed: u64,
    /// Generator file for the custom family.
    pub group_file: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            family: Family::Sl,
            d: 2,
            p: Prime::new(7).expect("7 is prime"),
            t_cap: DEFAULT_EXPONENT_CAP,
            r_cap: DEFAULT_EXPONENT_CAP,
            conjugator_word_length: DEFAULT_WORD_LEN,
            bsgs_bound: DEFAULT_BSGS_BOUND,
            seed: DEFAULT_SEED,
            group_file: None,
        }
    }
}

/// Unvalidated values as they arrive from the command line.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    pub family: Option<String>,
    pub d: Option<usize>,
    pub p: Option<u64>,
    pub t_cap: Option<u64>,
    pub r_cap: Option<u64>,
    pub word_len: Option<usize>,
    pub bound: Option<u64>,
    pub seed: Option<u64>,
    pub group_file: Option<PathBuf>,
}

impl RawConfig {
    pub fn resolve(self) -> CliResult<Config> {
        let defaults = Config::default();
        let family = match self.family {
            Some(f) => f.parse().map_err(param)?,
            None => defaults.family,
        };
        let p = match self.p {
            Some(p) => Prime::new(p).map_err(param)?,
            None => defaults.p,
        };
        let config = Config {
            family,
            d: self.d.unwrap_or(defaults.d),
            p,
            t_cap: self.t_cap.unwrap_or(defaults.t_cap),
            r_cap: self.r_cap.unwrap_or(defaults.r_cap),
            conjugator_word_length: self.word_len.unwrap_or(defaults.conjugator_word_length),
            bsgs_bound: self.bound.unwrap_or(defaults.bsgs_bound),
            seed: self.seed.unwrap_or(defaults.seed),
            group_file: self.group_file,
        };
        config.validate()?;
        Ok(config)
    }
}

impl Config {
    pub fn validate(&self) -> CliResult<()> {
        let fail = |msg: String| Err(CliError::Param(msg));
        if self.d < 2 {
            return fail(format!("d must be at least 2, got {}", self.d));
        }
        if self.family == Family::Sp && !self.d.is_multiple_of(2) {
            return fail(format!("the sp family needs an even d, got {}", self.d));
        }
        if self.family == Family::Custom && self.group_file.is_none() {
            return fail("the custom family needs a generator file (--group)".into());
        }
        if self.t_cap < 2 || self.r_cap < 2 {
            return fail("exponent caps must be at least 2".into());
        }
        if self.conjugator_word_length < 1 {
            return fail("word length must be at least 1".into());
        }
        if self.bsgs_bound < 1 {
            return fail("the discrete log bound must be at least 1".into());
        }
        Ok(())
    }

    pub fn keygen_params(&self) -> KeygenParams {
        KeygenParams {
            t_cap: self.t_cap,
            word_len: self.conjugator_word_length,
            ..KeygenParams::default()
        }
    }

    /// The platform group selected by `family`, `d`, `p` (or the group file).
    pub fn group(&self) -> CliResult<GroupSpec> {
        match self.family {
            Family::Sl => sl_generators(self.d, self.p).map_err(param),
            Family::Sp => sp_generators(self.d, self.p).map_err(param),
            Family::Custom => {
                let path = self.group_file.as_ref().expect("validated");
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                let spec = format::decode_group(&text)?;
                if spec.family() != Family::Custom {
                    return Err(CliError::Param(format!(
                        "{} describes a {} group; use --family {}",
                        path.display(),
                        spec.family(),
                        spec.family()
                    )));
                }
                if (spec.degree(), spec.modulus()) != (self.d, self.p) {
                    return Err(CliError::Param(format!(
                        "{} is over d={}, p={} but --d {} --p {} was given",
                        path.display(),
                        spec.degree(),
                        spec.modulus(),
                        self.d,
                        self.p
                    )));
                }
                Ok(spec)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(family: &str, d: usize, p: u64) -> RawConfig {
        RawConfig {
            family: Some(family.into()),
            d: Some(d),
            p: Some(p),
            ..RawConfig::default()
        }
    }

    #[test]
    fn accepts_the_defaults() {
        let c = RawConfig::default().resolve().unwrap();
        assert_eq!(c, Config::default());
        assert_eq!(c.group().unwrap().n(), 2);
    }

    #[test]
    fn rejects_invalid_parameters() {
        for bad in [
            raw("sl", 2, 4),
            raw("sl", 2, 2),
            raw("sl", 1, 7),
            raw("sp", 3, 7),
            raw("gl", 2, 7),
            raw("custom", 2, 7),
            RawConfig { t_cap: Some(1), ..raw("sl", 2, 7) },
            RawConfig { bound: Some(0), ..raw("sl", 2, 7) },
            RawConfig { word_len: Some(0), ..raw("sl", 2, 7) },
        ] {
            assert!(matches!(bad.clone().resolve(), Err(CliError::Param(_))), "{bad:?}");
        }
    }
}

//! Optional TOML configuration, merged underneath explicit flags.

use std::path::Path;

use serde::Deserialize;

use crate::Failure;

/// Every key accepted in a configuration file. Unknown keys are rejected.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(alias = "N")]
    pub n: Option<u64>,
    pub d: Option<usize>,
    pub kappa: Option<f64>,
    pub tau: Option<f64>,
    pub eta: Option<f64>,
    pub eps: Option<f64>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    #[serde(rename = "C1")]
    pub c_eta: Option<f64>,
    #[serde(rename = "C2")]
    pub c_tau: Option<f64>,
    pub c_d: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub c3: Option<f64>,
    pub c4: Option<f64>,
    pub c_bound: Option<f64>,
    pub max_iterations: Option<usize>,
    pub threads: Option<usize>,
    pub variant: Option<String>,
    pub mode: Option<String>,
    pub epsilon: Option<f64>,
    pub prime_bound: Option<u64>,
    pub rho: Option<f64>,
    pub m: Option<u32>,
    pub degree: Option<u32>,
    pub coeffs: Option<Vec<i64>>,
    pub values: Option<Vec<u64>>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| {
            Failure::domain(illdist::Error::Io(e)).context(path.display().to_string())
        })?;
        parse(&text).map_err(|(line, msg)| {
            Failure::usage("CONFIG_PARSE_ERROR", format!("{}:{line}: {msg}", path.display()))
        })
    }
}

/// Parses configuration text, reporting the 1-based line of any error.
pub fn parse(text: &str) -> Result<FileConfig, (usize, String)> {
    toml::from_str(text).map_err(|e: toml::de::Error| {
        let line = e
            .span()
            .map_or(1, |span| text[..span.start.min(text.len())].matches('\n').count() + 1);
        (line, e.message().to_string())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_known_keys() {
        let cfg = parse("N = 200\nkappa = 1.0\nC1 = 2.0\nseed = 7\nvalues = [1, 2]\n").unwrap();
        assert_eq!(cfg.n, Some(200));
        assert_eq!(cfg.kappa, Some(1.0));
        assert_eq!(cfg.c_eta, Some(2.0));
        assert_eq!(cfg.values, Some(vec![1, 2]));
    }

    #[test]
    fn reports_error_lines() {
        let (line, _) = parse("n = 10\nkappa = \"one\"\n").unwrap_err();
        assert_eq!(line, 2);
        let (line, msg) = parse("n = 10\n\nbogus = 1\n").unwrap_err();
        assert_eq!(line, 3);
        assert!(msg.contains("bogus"), "{msg}");
    }
}

//! Law specs given on the command line: JSON configs or compact calls such as
//! `gaussian(0,1)`, `laplace(0,0.7)` and `mixture(0.5:-1:1;0.5:1:1)`.

use mismatch_quant::{ComponentConfig, Distribution64, DistributionConfig};

use crate::error::CliError;

pub fn parse_law(spec: &str) -> Result<Distribution64, CliError> {
    let config = parse_law_config(spec)?;
    Distribution64::try_from(config).map_err(|e| CliError::Parse(format!("law `{spec}`: {e}")))
}

pub fn parse_law_config(spec: &str) -> Result<DistributionConfig, CliError> {
    let spec = spec.trim();
    if spec.starts_with('{') {
        return serde_json::from_str(spec).map_err(|e| CliError::Parse(format!("law `{spec}`: {e}")));
    }
    let bad = |why: &str| CliError::Parse(format!("law `{spec}`: {why}"));
    let (name, rest) = spec.split_once('(').ok_or_else(|| bad("expected name(args)"))?;
    let body = rest.strip_suffix(')').ok_or_else(|| bad("missing closing parenthesis"))?;
    let number = |s: &str| -> Result<f64, CliError> {
        let value = s.split_once('=').map_or(s, |(_, v)| v).trim();
        value.parse().map_err(|_| bad(&format!("`{value}` is not a number")))
    };
    let pair = || -> Result<(f64, f64), CliError> {
        match body.split(',').map(number).collect::<Result<Vec<_>, _>>()?.as_slice() {
            &[a, b] => Ok((a, b)),
            _ => Err(bad("expected two parameters")),
        }
    };
    match name.trim().to_ascii_lowercase().as_str() {
        "gaussian" | "normal" => pair().map(|(mean, std)| DistributionConfig::Gaussian { mean, std }),
        "laplace" => pair().map(|(location, scale)| DistributionConfig::Laplace { location, scale }),
        "mixture" => body
            .split(';')
            .map(|c| match c.split(':').map(number).collect::<Result<Vec<_>, _>>()?.as_slice() {
                &[weight, mean, std] => Ok(ComponentConfig { weight, mean, std }),
                _ => Err(bad("mixture components are weight:mean:std")),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(|components| DistributionConfig::Mixture { components }),
        other => Err(bad(&format!("unknown law `{other}`"))),
    }
}

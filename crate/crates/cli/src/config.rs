//! Run-configuration file: flat `key = value` pairs under the section
//! headers `[law]`, `[grid]`, `[tolerances]` and `[run]`. Unknown sections
//! or keys are rejected, and every diagnostic names the offending key.

use matdist_core::dsl::{catalog, parse_components, parse_law, LawExpr};
use nalgebra::DVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Foliate,
    SecondGrade,
    Homogeneity,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub law_label: String,
    pub law: LawExpr,
    pub n: usize,
    pub lo: DVector<f64>,
    pub hi: DVector<f64>,
    pub counts: Vec<usize>,
    pub seed: u64,
    pub rel_tol: f64,
    pub tol_angle: f64,
    pub tol_hom: f64,
    pub degree: u32,
    pub commands: Vec<Command>,
}

pub type ConfigResult<T> = Result<T, String>;

struct RawConfig {
    entries: Vec<(String, String, String)>,
}

impl RawConfig {
    fn parse(text: &str) -> ConfigResult<RawConfig> {
        let mut section = String::new();
        let mut entries = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(at) => &raw[..at],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = name.trim().to_string();
                if !["law", "grid", "tolerances", "run"].contains(&section.as_str()) {
                    return Err(format!("line {}: unknown section [{section}]", lineno + 1));
                }
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `key = value`", lineno + 1))?;
            if section.is_empty() {
                return Err(format!(
                    "line {}: key `{}` appears before any section header",
                    lineno + 1,
                    key.trim()
                ));
            }
            entries.push((
                section.clone(),
                key.trim().to_string(),
                value.trim().to_string(),
            ));
        }
        Ok(RawConfig { entries })
    }

    fn take(&mut self, section: &str, key: &str) -> Option<String> {
        let at = self
            .entries
            .iter()
            .position(|(s, k, _)| s == section && k == key)?;
        Some(self.entries.remove(at).2)
    }
}

fn parse_floats(key: &str, value: &str, expect: Option<usize>) -> ConfigResult<Vec<f64>> {
    let vals: Result<Vec<f64>, _> = value.split_whitespace().map(str::parse).collect();
    let vals = vals.map_err(|_| format!("{key}: expected whitespace-separated numbers"))?;
    if let Some(count) = expect {
        if vals.len() != count {
            return Err(format!("{key}: expected {count} numbers, found {}", vals.len()));
        }
    }
    Ok(vals)
}

fn parse_scalar<T: std::str::FromStr>(key: &str, value: &str, kind: &str) -> ConfigResult<T> {
    value
        .trim()
        .parse()
        .map_err(|_| format!("{key}: expected {kind}"))
}

pub fn parse_config(text: &str) -> ConfigResult<RunConfig> {
    let mut raw = RawConfig::parse(text)?;

    let n: usize = parse_scalar(
        "law.n",
        &raw.take("law", "n").ok_or("law.n: missing")?,
        "a positive integer",
    )?;
    if n < 2 {
        return Err("law.n: body dimension must be at least 2".into());
    }

    let name = raw.take("law", "name");
    let text_law = raw.take("law", "text");
    let d = raw.take("law", "d");
    let (law_label, law) = match (name, text_law) {
        (Some(name), None) => {
            let law = catalog(&name, n).map_err(|e| format!("law.name: {e}"))?;
            (name, law)
        }
        (None, Some(text)) => {
            let law = match &d {
                Some(d) => {
                    let d: usize = parse_scalar("law.d", d, "a positive integer")?;
                    parse_law(&text, n, d).map_err(|e| format!("law.text: {e}"))?
                }
                None => parse_components(&text, n).map_err(|e| format!("law.text: {e}"))?,
            };
            (text, law)
        }
        (Some(_), Some(_)) => return Err("law.name and law.text are mutually exclusive".into()),
        (None, None) => return Err("law.name or law.text: missing".into()),
    };

    let lo = parse_floats(
        "grid.lo",
        &raw.take("grid", "lo").ok_or("grid.lo: missing")?,
        Some(n),
    )?;
    let hi = parse_floats(
        "grid.hi",
        &raw.take("grid", "hi").ok_or("grid.hi: missing")?,
        Some(n),
    )?;
    let counts_raw = raw.take("grid", "counts").ok_or("grid.counts: missing")?;
    let counts: Result<Vec<usize>, _> = counts_raw.split_whitespace().map(str::parse).collect();
    let counts = counts.map_err(|_| "grid.counts: expected positive integers".to_string())?;
    if counts.len() != n {
        return Err(format!(
            "grid.counts: expected {n} integers, found {}",
            counts.len()
        ));
    }

    let rel_tol = match raw.take("tolerances", "rel_tol") {
        Some(v) => parse_scalar("tolerances.rel_tol", &v, "a number")?,
        None => 1e-8,
    };
    let tol_angle = match raw.take("tolerances", "tol_angle") {
        Some(v) => parse_scalar("tolerances.tol_angle", &v, "a number")?,
        None => 1e-3,
    };
    let tol_hom = match raw.take("tolerances", "tol_hom") {
        Some(v) => parse_scalar("tolerances.tol_hom", &v, "a number")?,
        None => 1e-8,
    };

    let seed = match raw.take("run", "seed") {
        Some(v) => parse_scalar("run.seed", &v, "an integer")?,
        None => 0,
    };
    let degree = match raw.take("run", "degree") {
        Some(v) => parse_scalar("run.degree", &v, "an integer")?,
        None => 2,
    };
    if !(1..=4).contains(&degree) {
        return Err("run.degree: must be between 1 and 4".into());
    }
    let commands = match raw.take("run", "commands") {
        Some(v) => {
            let mut out = Vec::new();
            for word in v.split_whitespace() {
                out.push(match word {
                    "analyze" => Command::Analyze,
                    "foliate" => Command::Foliate,
                    "second-grade" => Command::SecondGrade,
                    "homogeneity" => Command::Homogeneity,
                    other => return Err(format!("run.commands: unknown command `{other}`")),
                });
            }
            out
        }
        None => vec![
            Command::Analyze,
            Command::Foliate,
            Command::SecondGrade,
            Command::Homogeneity,
        ],
    };

    if let Some((section, key, _)) = raw.entries.first() {
        return Err(format!("{section}.{key}: unknown key"));
    }

    Ok(RunConfig {
        law_label,
        law,
        n,
        lo: DVector::from_vec(lo),
        hi: DVector::from_vec(hi),
        counts,
        seed,
        rel_tol,
        tol_angle,
        tol_hom,
        degree,
        commands,
    })
}

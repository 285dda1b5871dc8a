//! Flat `key = value` simulation config files.
//!
//! Blank lines and lines starting with `#` are ignored. An optional
//! `preset = sim1|sim2|sim3` selects the starting point; without one the
//! `sim1` settings are used. Every other key overrides a single field.
//! Scheme parameters (`p_primary`, `p_secondary`, `p_merger`, `mu`) are
//! accepted only when the selected scheme takes them, and any other key is
//! rejected.

use std::collections::HashSet;

use phonodrift::engine::PRESETS;
use phonodrift::{InitialDistribution, SchemeParams, SchemeRegistry, SimulationConfig};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigFileError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: `{key}` given more than once")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("`{key}`: {reason}")]
    InvalidValue { key: String, reason: String },
}

const CORE_KEYS: [&str; 12] = [
    "preset",
    "n_languages",
    "n_steps",
    "initial_inventory_size",
    "initial_distribution",
    "type_policy",
    "source_policy",
    "alpha_policy",
    "min_inventory",
    "master_seed",
    "record_history",
    "workers",
];

#[derive(Debug, Clone)]
struct Entry {
    line: usize,
    key: String,
    value: String,
}

/// `master_seed` when neither the file nor `--seed` sets one.
pub const DEFAULT_SEED: u64 = 1;

/// A parsed config plus the settings that only affect execution.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub simulation: SimulationConfig,
    pub workers: Option<usize>,
}

fn parse_entries(text: &str) -> Result<Vec<Entry>, ConfigFileError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed
            .split_once('=')
            .ok_or(ConfigFileError::Syntax { line })?;
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(ConfigFileError::Syntax { line });
        }
        if !seen.insert(key.clone()) {
            return Err(ConfigFileError::Duplicate { line, key });
        }
        out.push(Entry {
            line,
            key,
            value: value.trim().to_string(),
        });
    }
    Ok(out)
}

fn parse_value<T: std::str::FromStr>(e: &Entry) -> Result<T, ConfigFileError>
where
    T::Err: std::fmt::Display,
{
    e.value
        .parse()
        .map_err(|err: T::Err| ConfigFileError::InvalidValue {
            key: e.key.clone(),
            reason: format!("`{}`: {err}", e.value),
        })
}

fn invalid(key: &str, reason: impl ToString) -> ConfigFileError {
    ConfigFileError::InvalidValue {
        key: key.to_string(),
        reason: reason.to_string(),
    }
}

/// Parses config text. `preset_override` acts like a leading `preset` line;
/// giving both is an error. `seed_override` replaces `master_seed`.
pub fn parse_config(
    text: &str,
    preset_override: Option<&str>,
    seed_override: Option<u64>,
    registry: &SchemeRegistry,
) -> Result<LoadedConfig, ConfigFileError> {
    let entries = parse_entries(text)?;
    let get = |key: &str| entries.iter().find(|e| e.key == key);

    let preset = match (preset_override, get("preset")) {
        (Some(_), Some(e)) => {
            return Err(invalid(
                "preset",
                format!("set on line {} and on the command line", e.line),
            ))
        }
        (Some(p), None) => Some(p.to_string()),
        (None, Some(e)) => Some(e.value.clone()),
        (None, None) => None,
    };
    let mut cfg = match preset.as_deref() {
        None => SimulationConfig::naive(DEFAULT_SEED),
        Some(name) => SimulationConfig::preset(name, DEFAULT_SEED).ok_or_else(|| {
            invalid(
                "preset",
                format!("unknown preset `{name}` (known: {})", PRESETS.join(", ")),
            )
        })?,
    };

    let type_name = get("type_policy").map_or(cfg.type_policy.name(), |e| e.value.as_str());
    let source_name = get("source_policy").map_or(cfg.source_policy.name(), |e| e.value.as_str());
    let alpha_name = get("alpha_policy").map_or(cfg.alpha_policy.name(), |e| e.value.as_str());
    let type_keys = registry
        .type_params(type_name)
        .map_err(|e| invalid("type_policy", e))?;
    let source_keys = registry
        .source_params(source_name)
        .map_err(|e| invalid("source_policy", e))?;
    let alpha_keys = registry
        .alpha_params(alpha_name)
        .map_err(|e| invalid("alpha_policy", e))?;

    if let Some(e) = entries.iter().find(|e| {
        let k = e.key.as_str();
        !(CORE_KEYS.contains(&k)
            || type_keys.contains(&k)
            || source_keys.contains(&k)
            || alpha_keys.contains(&k))
    }) {
        return Err(ConfigFileError::UnknownKey {
            line: e.line,
            key: e.key.clone(),
        });
    }

    // Scheme parameters: inherited from the base when the scheme is unchanged.
    let collect = |keys: &[&str], inherited: Vec<(&'static str, String)>, keep: bool| {
        let mut params = SchemeParams::new();
        if keep {
            for (k, v) in inherited {
                params.insert(k, v);
            }
        }
        for e in entries.iter().filter(|e| keys.contains(&e.key.as_str())) {
            params.insert(&e.key, &e.value);
        }
        params
    };
    let type_params = collect(
        type_keys,
        cfg.type_policy.params(),
        type_name == cfg.type_policy.name(),
    );
    let source_params = collect(
        source_keys,
        cfg.source_policy.params(),
        source_name == cfg.source_policy.name(),
    );
    let alpha_params = collect(
        alpha_keys,
        cfg.alpha_policy.params(),
        alpha_name == cfg.alpha_policy.name(),
    );
    cfg.type_policy = registry
        .build_type(type_name, &type_params)
        .map_err(|e| invalid("type_policy", e))?;
    cfg.source_policy = registry
        .build_source(source_name, &source_params)
        .map_err(|e| invalid("source_policy", e))?;
    cfg.alpha_policy = registry
        .build_alpha(alpha_name, &alpha_params)
        .map_err(|e| invalid("alpha_policy", e))?;

    let mut workers = None;
    for e in &entries {
        match e.key.as_str() {
            "n_languages" => cfg.n_languages = parse_value(e)?,
            "n_steps" => cfg.n_steps = parse_value(e)?,
            "initial_inventory_size" => cfg.initial_inventory_size = parse_value(e)?,
            "initial_distribution" => {
                cfg.initial_distribution = match e.value.as_str() {
                    "uniform" => InitialDistribution::Uniform,
                    other => {
                        return Err(invalid(
                            &e.key,
                            format!("unknown initial distribution `{other}` (known: uniform)"),
                        ))
                    }
                }
            }
            "min_inventory" => cfg.min_inventory = parse_value(e)?,
            "master_seed" => cfg.master_seed = parse_value(e)?,
            "record_history" => cfg.record_history = parse_value(e)?,
            "workers" => {
                let w: usize = parse_value(e)?;
                if w == 0 {
                    return Err(invalid("workers", "must be positive"));
                }
                workers = Some(w);
            }
            _ => {}
        }
    }
    if let Some(seed) = seed_override {
        cfg.master_seed = seed;
    }
    cfg.validate().map_err(|e| match e {
        phonodrift::ConfigError::Invalid { key, reason } => invalid(key, reason),
        phonodrift::ConfigError::Scheme(s) => invalid("type_policy", s),
    })?;
    Ok(LoadedConfig {
        simulation: cfg,
        workers,
    })
}

/// Every setting, in the file format. Parsing the result reproduces `cfg`.
pub fn render_config(cfg: &SimulationConfig) -> String {
    config_pairs(cfg)
        .into_iter()
        .map(|(k, v)| format!("{k} = {v}\n"))
        .collect()
}

pub fn config_pairs(cfg: &SimulationConfig) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = vec![
        ("n_languages".into(), cfg.n_languages.to_string()),
        ("n_steps".into(), cfg.n_steps.to_string()),
        (
            "initial_inventory_size".into(),
            cfg.initial_inventory_size.to_string(),
        ),
        (
            "initial_distribution".into(),
            cfg.initial_distribution.name().into(),
        ),
        ("type_policy".into(), cfg.type_policy.name().into()),
    ];
    out.extend(
        cfg.type_policy
            .params()
            .into_iter()
            .map(|(k, v)| (k.into(), v)),
    );
    out.push(("source_policy".into(), cfg.source_policy.name().into()));
    out.extend(
        cfg.source_policy
            .params()
            .into_iter()
            .map(|(k, v)| (k.into(), v)),
    );
    out.push(("alpha_policy".into(), cfg.alpha_policy.name().into()));
    out.extend(
        cfg.alpha_policy
            .params()
            .into_iter()
            .map(|(k, v)| (k.into(), v)),
    );
    out.push(("min_inventory".into(), cfg.min_inventory.to_string()));
    out.push(("master_seed".into(), cfg.master_seed.to_string()));
    out.push(("record_history".into(), cfg.record_history.to_string()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<LoadedConfig, ConfigFileError> {
        parse_config(text, None, None, &SchemeRegistry::builtin())
    }

    #[test]
    fn preset_then_overrides() {
        let cfg = parse("# sim3 at small scale\npreset = sim3\nn_languages = 10\nmu = 20\n")
            .unwrap()
            .simulation;
        assert_eq!(cfg.n_languages, 10);
        assert_eq!(cfg.n_steps, 1000);
        assert_eq!(cfg.type_policy.name(), "adaptive");
        assert_eq!(cfg.type_policy.params(), vec![("mu", "20".to_string())]);
        assert_eq!(cfg.source_policy.name(), "surprisal");
    }

    #[test]
    fn presets_encode_the_three_regimes() {
        let reg = SchemeRegistry::builtin();
        let sim1 = parse_config("", Some("sim1"), Some(1), &reg)
            .unwrap()
            .simulation;
        assert_eq!(
            render_config(&sim1),
            "n_languages = 400\nn_steps = 1000\ninitial_inventory_size = 34\n\
             initial_distribution = uniform\ntype_policy = constant\n\
             p_primary = 0.3333333333333333\np_secondary = 0.3333333333333333\n\
             p_merger = 0.3333333333333333\nsource_policy = uniform\n\
             alpha_policy = uniform-open\nmin_inventory = 2\nmaster_seed = 1\n\
             record_history = false\n"
        );
        let sim2 = parse("preset = sim2").unwrap().simulation;
        assert_eq!(sim2.source_policy.name(), "surprisal");
        assert_eq!(sim2.type_policy.name(), "constant");
        let sim3 = parse("preset = sim3").unwrap().simulation;
        assert_eq!(sim3.type_policy.params(), vec![("mu", "34".to_string())]);
        assert_eq!(sim3.source_policy.name(), "surprisal");
    }

    #[test]
    fn render_round_trips() {
        let reg = SchemeRegistry::builtin();
        for preset in PRESETS {
            let cfg = parse_config("", Some(preset), Some(99), &reg)
                .unwrap()
                .simulation;
            let text = render_config(&cfg);
            let again = parse(&text).unwrap().simulation;
            assert_eq!(render_config(&again), text);
        }
    }

    #[test]
    fn unknown_and_misplaced_keys_are_named() {
        let e = parse("n_languages = 4\nfoo = 1\n").unwrap_err();
        assert_eq!(
            e,
            ConfigFileError::UnknownKey {
                line: 2,
                key: "foo".into()
            }
        );
        // mu only belongs to the adaptive scheme
        let e = parse("preset = sim1\nmu = 30\n").unwrap_err();
        assert!(e.to_string().contains("`mu`"), "{e}");
        let e = parse("n_steps = ten\n").unwrap_err();
        assert!(e.to_string().contains("n_steps"), "{e}");
        let e = parse("min_inventory = 1\n").unwrap_err();
        assert!(e.to_string().contains("min_inventory"), "{e}");
        let e = parse("type_policy = wobbly\n").unwrap_err();
        assert!(e.to_string().contains("type_policy"), "{e}");
        let e = parse("preset = sim9\n").unwrap_err();
        assert!(e.to_string().contains("sim9"), "{e}");
        assert!(matches!(
            parse("n_steps\n"),
            Err(ConfigFileError::Syntax { line: 1 })
        ));
        assert!(matches!(
            parse("n_steps = 1\nn_steps = 2\n"),
            Err(ConfigFileError::Duplicate { line: 2, .. })
        ));
    }

    #[test]
    fn switching_scheme_drops_inherited_params() {
        let cfg = parse("preset = sim3\ntype_policy = constant\np_merger = 0.2\np_primary = 0.4\np_secondary = 0.4\n")
            .unwrap()
            .simulation;
        assert_eq!(cfg.type_policy.probabilities(50).unwrap().merger, 0.2);
        let cfg = parse("preset = sim1\ntype_policy = adaptive\nmu = 12\n")
            .unwrap()
            .simulation;
        assert_eq!(cfg.type_policy.params(), vec![("mu", "12".to_string())]);
        assert!(parse("preset = sim1\ntype_policy = adaptive\n").is_err());
    }

    #[test]
    fn seed_and_preset_flags() {
        let reg = SchemeRegistry::builtin();
        let cfg = parse_config("master_seed = 5\n", None, Some(8), &reg).unwrap();
        assert_eq!(cfg.simulation.master_seed, 8);
        assert!(parse_config("preset = sim2\n", Some("sim1"), None, &reg).is_err());
        let cfg = parse_config("workers = 3\n", None, None, &reg).unwrap();
        assert_eq!(cfg.workers, Some(3));
    }
}

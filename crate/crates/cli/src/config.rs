//! Scenario files: flat `section.key = value` lines (a TOML subset).
//!
//! ```text
//! geometry.radius = 0.01
//! geometry.elements = 64
//! material.c_s = 3122        # or material.lambda / material.mu
//! material.c_p = 6198
//! material.rho = 2700
//! material.rho_f = 1000
//! material.c = 1500
//! material.omega = 157079.63267948966
//! incident.direction = [1.0, 0.0]
//! run.formulation = "direct"
//! run.beta = [0.0, 1.0]      # burton_miller only, [re, im]
//! run.quadrature_order = 8
//! run.n_max = 40
//! run.threads = 4
//! ```

use std::collections::BTreeMap;
use std::fmt;

use fsi_bem::assembly::QuadratureConfig;
use fsi_bem::fields::Scenario;
use fsi_bem::material::MaterialTemplate;
use fsi_bem::oracle::DEFAULT_N_MAX;
use fsi_bem::systems::Formulation;
use fsi_bem::{BemError, Complex64};
use sha2::{Digest, Sha256};
use toml::Value;

const KNOWN_KEYS: &[&str] = &[
    "geometry.radius",
    "geometry.elements",
    "material.lambda",
    "material.mu",
    "material.c_s",
    "material.c_p",
    "material.rho",
    "material.rho_f",
    "material.c",
    "material.omega",
    "incident.direction",
    "run.formulation",
    "run.beta",
    "run.quadrature_order",
    "run.n_max",
    "run.threads",
];

/// A problem with one named field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config field `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError { field: field.into(), message: message.into() }
}

impl From<BemError> for ConfigError {
    fn from(e: BemError) -> Self {
        match e {
            BemError::Parameter { name, reason } => err(name, reason),
            other => err("scenario", other.to_string()),
        }
    }
}

/// Parsed scenario plus run options.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub elements: usize,
    pub formulation: Formulation,
    pub threads: Option<usize>,
    /// Flattened key-value pairs after overrides; input of the hash.
    pub entries: BTreeMap<String, Value>,
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

fn float(entries: &BTreeMap<String, Value>, key: &str) -> Result<Option<f64>, ConfigError> {
    match entries.get(key) {
        None => Ok(None),
        Some(Value::Float(v)) => Ok(Some(*v)),
        Some(Value::Integer(v)) => Ok(Some(*v as f64)),
        Some(other) => Err(err(key, format!("expected a number, got {other}"))),
    }
}

fn required(entries: &BTreeMap<String, Value>, key: &str) -> Result<f64, ConfigError> {
    float(entries, key)?.ok_or_else(|| err(key, "missing"))
}

fn count(entries: &BTreeMap<String, Value>, key: &str) -> Result<Option<usize>, ConfigError> {
    match entries.get(key) {
        None => Ok(None),
        Some(Value::Integer(v)) if *v > 0 => Ok(Some(*v as usize)),
        Some(other) => Err(err(key, format!("expected a positive integer, got {other}"))),
    }
}

fn pair(entries: &BTreeMap<String, Value>, key: &str) -> Result<Option<[f64; 2]>, ConfigError> {
    let Some(v) = entries.get(key) else { return Ok(None) };
    let arr = v.as_array().ok_or_else(|| err(key, "expected a two-element array"))?;
    let nums: Vec<f64> = arr
        .iter()
        .map(|x| x.as_float().or_else(|| x.as_integer().map(|i| i as f64)))
        .collect::<Option<_>>()
        .ok_or_else(|| err(key, "array entries must be numbers"))?;
    match nums[..] {
        [a, b] => Ok(Some([a, b])),
        _ => Err(err(key, format!("expected two entries, got {}", nums.len()))),
    }
}

impl ScenarioConfig {
    /// Parses `text`; `formulation` overrides `run.formulation`.
    pub fn parse(text: &str, formulation: Option<&str>) -> Result<Self, ConfigError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| err("syntax", e.message().to_string()))?;
        let mut entries = BTreeMap::new();
        flatten("", &table, &mut entries);
        if let Some(f) = formulation {
            entries.insert("run.formulation".into(), Value::String(f.to_string()));
        }
        if let Some(key) = entries.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return Err(err(key.clone(), "unknown key"));
        }

        let radius = required(&entries, "geometry.radius")?;
        if !(radius > 0.0) {
            return Err(err("geometry.radius", format!("must be positive, got {radius}")));
        }
        let elements = count(&entries, "geometry.elements")?.unwrap_or(64);
        if elements < 4 {
            return Err(err("geometry.elements", "at least 4 elements are needed"));
        }
        let lame = entries.contains_key("material.lambda") || entries.contains_key("material.mu");
        let speeds = entries.contains_key("material.c_s") || entries.contains_key("material.c_p");
        let rho = required(&entries, "material.rho")?;
        let rho_f = required(&entries, "material.rho_f")?;
        let c = required(&entries, "material.c")?;
        let omega = required(&entries, "material.omega")?;
        let template = match (lame, speeds) {
            (true, true) => {
                return Err(err(
                    "material",
                    "give either material.lambda/material.mu or material.c_s/material.c_p, not both",
                ))
            }
            (false, false) => {
                return Err(err("material", "missing material.lambda/material.mu or material.c_s/material.c_p"))
            }
            (true, false) => MaterialTemplate {
                lambda: required(&entries, "material.lambda")?,
                mu: required(&entries, "material.mu")?,
                rho,
                rho_f,
                c,
            },
            (false, true) => MaterialTemplate::from_wave_speeds(
                required(&entries, "material.c_s")?,
                required(&entries, "material.c_p")?,
                rho,
                rho_f,
                c,
            )
            .map_err(|e| prefixed(e, "material."))?,
        };
        template.at(omega).map_err(|e| prefixed(e, "material."))?;

        let direction = pair(&entries, "incident.direction")?.unwrap_or([1.0, 0.0]);
        if !(direction[0].hypot(direction[1]) > 0.0) {
            return Err(err("incident.direction", "must be a non-zero vector"));
        }
        let formulation = match entries.get("run.formulation") {
            None => Formulation::Direct,
            Some(Value::String(s)) => s.parse().map_err(|e: BemError| err("run.formulation", e.to_string()))?,
            Some(other) => return Err(err("run.formulation", format!("expected a string, got {other}"))),
        };
        let beta = pair(&entries, "run.beta")?.map(|[re, im]| Complex64::new(re, im));
        if let Some(b) = beta {
            if formulation != Formulation::BurtonMiller {
                return Err(err("run.beta", "only used by the burton_miller formulation"));
            }
            if b.im == 0.0 {
                return Err(err("run.beta", "Burton-Miller coupling needs Im(beta) != 0"));
            }
        }
        let mut quadrature = QuadratureConfig::default();
        if let Some(q) = count(&entries, "run.quadrature_order")? {
            quadrature.near_order = q;
            quadrature.mid_order = quadrature.mid_order.min(q);
            quadrature.far_order = quadrature.far_order.min(q);
        }
        let oracle_n_max = count(&entries, "run.n_max")?.unwrap_or(DEFAULT_N_MAX);
        let threads = count(&entries, "run.threads")?;
        Ok(Self {
            scenario: Scenario { radius, template, omega, direction, beta, quadrature, oracle_n_max },
            elements,
            formulation,
            threads,
            entries,
        })
    }

    /// Hex SHA-256 prefix of the canonical `key=value` listing.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in &self.entries {
            h.update(format!("{k}={v}\n").as_bytes());
        }
        let digest = h.finalize();
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

fn prefixed(e: BemError, prefix: &str) -> ConfigError {
    match e {
        BemError::Parameter { name, reason } => err(format!("{prefix}{name}"), reason),
        other => other.into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const UNIT_DISC: &str = "geometry.radius = 1\ngeometry.elements = 16\nmaterial.lambda = 1\nmaterial.mu = 2\n\
        material.rho = 1\nmaterial.rho_f = 0.5\nmaterial.c = 1\nmaterial.omega = 6\n";

    #[test]
    fn parses_lame_form() {
        let c = ScenarioConfig::parse(UNIT_DISC, None).unwrap();
        assert_eq!(c.elements, 16);
        assert_eq!(c.formulation, Formulation::Direct);
        assert_eq!(c.scenario.template.mu, 2.0);
        assert_eq!(c.scenario.oracle_n_max, DEFAULT_N_MAX);
    }

    #[test]
    fn wave_speed_form_derives_lame_constants() {
        let text = "geometry.radius = 0.01\nmaterial.c_s = 3122\nmaterial.c_p = 6198\nmaterial.rho = 2700\n\
            material.rho_f = 1000\nmaterial.c = 1500\nmaterial.omega = 157079.63267948966\n";
        let c = ScenarioConfig::parse(text, Some("burton_miller")).unwrap();
        let t = c.scenario.template;
        assert!((t.mu - 2700.0 * 3122.0f64.powi(2)).abs() < 1e-3);
        assert_eq!(c.formulation, Formulation::BurtonMiller);
    }

    #[test]
    fn rejects_bad_fields() {
        let e = ScenarioConfig::parse(&UNIT_DISC.replace("material.mu = 2", "material.mu = -2"), None).unwrap_err();
        assert!(e.field.contains("mu"), "{e}");
        let both = format!("{UNIT_DISC}material.c_s = 3\n");
        assert_eq!(ScenarioConfig::parse(&both, None).unwrap_err().field, "material");
        let e = ScenarioConfig::parse(&format!("{UNIT_DISC}run.colour = 1\n"), None).unwrap_err();
        assert_eq!(e.field, "run.colour");
        let e = ScenarioConfig::parse(&format!("{UNIT_DISC}run.beta = [1.0, 0.0]\n"), Some("burton_miller")).unwrap_err();
        assert_eq!(e.field, "run.beta");
        assert!(ScenarioConfig::parse(UNIT_DISC, Some("galerkin")).is_err());
    }

    #[test]
    fn hash_tracks_content_and_overrides() {
        let a = ScenarioConfig::parse(UNIT_DISC, None).unwrap().hash();
        let b = ScenarioConfig::parse(UNIT_DISC, None).unwrap().hash();
        let c = ScenarioConfig::parse(UNIT_DISC, Some("indirect")).unwrap().hash();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 16);
    }
}

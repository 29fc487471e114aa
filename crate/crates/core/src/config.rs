//! Experiment configuration: a flat dotted key/value text format, the
//! resolved run configuration, and construction of game specs from key/value
//! maps.
//!
//! Grammar, line by line:
//!
//! ```text
//! # comment                -- ignored, as are blank lines
//! key = value              -- key: dotted lowercase [a-z0-9_.-]+
//! ```
//!
//! Later assignments to the same key win. Manifests reuse the same grammar
//! with `config.`-prefixed keys, so a manifest file can be fed back through
//! `--config` to reproduce a run.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::attackers::{AttackerSpec, SideInfoSpec};
use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::estimator::{Definition, GameRelation, GameSpec};
use crate::mechanisms::MechanismSpec;
use crate::prior::{PriorSpec, TardosParams};
use crate::relations::{BiRelationSpec, CustomPredicate, Ratio, RelationSpec};

pub type KvMap = BTreeMap<String, String>;

/// Parse the key/value grammar.
pub fn parse_kv(text: &str) -> Result<KvMap> {
    let mut map = KvMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
        let key = key.trim();
        if key.is_empty()
            || !key
                .chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || "._-".contains(c))
        {
            return Err(Error::Config(format!("line {}: bad key {key:?}", lineno + 1)));
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

pub fn format_kv(map: &KvMap) -> String {
    let mut out = String::new();
    for (k, v) in map {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(v);
        out.push('\n');
    }
    out
}

/// A resolved experiment run: scenario, reproducibility inputs, and output
/// routing. Flags override file values; the manifest records the result.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: String,
    pub master_seed: u64,
    /// Scenario-default trial count when absent.
    pub trials: Option<u64>,
    pub workers: usize,
    pub out_dir: PathBuf,
    /// Output subdirectory label; a timestamp when absent.
    pub label: Option<String>,
    /// Scenario parameter overrides (the `set.` keys).
    pub overrides: KvMap,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            scenario: String::new(),
            master_seed: 42,
            trials: None,
            workers: 1,
            out_dir: PathBuf::from("out"),
            label: None,
            overrides: KvMap::new(),
        }
    }
}

impl ExperimentConfig {
    /// Read a config (or manifest) key/value map. Manifest files carry
    /// `config.`-prefixed keys; bare keys are accepted too. Unknown bare
    /// keys are rejected, unknown prefixed keys (results, params) ignored.
    pub fn from_kv(map: &KvMap) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        for (raw_key, value) in map {
            let (key, from_manifest) = match raw_key.strip_prefix("config.") {
                Some(k) => (k, true),
                None => (raw_key.as_str(), false),
            };
            match key {
                "scenario" => cfg.scenario = value.clone(),
                "seed" => cfg.master_seed = parse_u64(key, value)?,
                "trials" => cfg.trials = Some(parse_u64(key, value)?),
                "workers" => cfg.workers = parse_u64(key, value)? as usize,
                "out_dir" => cfg.out_dir = PathBuf::from(value),
                "label" => cfg.label = Some(value.clone()),
                _ => {
                    // manifest result./param./manifest. lines pass through
                    if let Some(name) = key.strip_prefix("set.") {
                        cfg.overrides.insert(name.to_string(), value.clone());
                    } else if from_manifest
                        || !matches!(
                            raw_key.split('.').next(),
                            Some("result" | "param" | "manifest" | "expectations")
                        )
                    {
                        return Err(Error::Config(format!("unknown config key {raw_key:?}")));
                    }
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_kv(&self) -> KvMap {
        let mut map = KvMap::new();
        map.insert("scenario".into(), self.scenario.clone());
        map.insert("seed".into(), self.master_seed.to_string());
        if let Some(t) = self.trials {
            map.insert("trials".into(), t.to_string());
        }
        map.insert("workers".into(), self.workers.to_string());
        map.insert("out_dir".into(), self.out_dir.display().to_string());
        if let Some(l) = &self.label {
            map.insert("label".into(), l.clone());
        }
        for (k, v) in &self.overrides {
            map.insert(format!("set.{k}"), v.clone());
        }
        map
    }
}

pub fn parse_u64(key: &str, value: &str) -> Result<u64> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: expected an integer, got {value:?}")))
}

pub fn parse_f64(key: &str, value: &str) -> Result<f64> {
    let v: f64 = value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: expected a number, got {value:?}")))?;
    if !v.is_finite() {
        return Err(Error::Config(format!("{key}: must be finite")));
    }
    Ok(v)
}

/// Typed getters over a resolved parameter map.
pub struct Params<'a>(pub &'a KvMap);

impl Params<'_> {
    pub fn u64(&self, key: &str) -> Result<u64> {
        let v = self
            .0
            .get(key)
            .ok_or_else(|| Error::Config(format!("missing parameter {key:?}")))?;
        parse_u64(key, v)
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        Ok(self.u64(key)? as usize)
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        let v = self
            .0
            .get(key)
            .ok_or_else(|| Error::Config(format!("missing parameter {key:?}")))?;
        parse_f64(key, v)
    }

    pub fn ratio(&self, key: &str) -> Result<Ratio> {
        let v = self
            .0
            .get(key)
            .ok_or_else(|| Error::Config(format!("missing parameter {key:?}")))?;
        Ratio::parse(v)
    }

    pub fn str(&self, key: &str) -> Result<&str> {
        self.0
            .get(key)
            .map(|s| s.as_str())
            .ok_or_else(|| Error::Config(format!("missing parameter {key:?}")))
    }
}

/// Build a full game spec from `game.*` keys (used by the custom scenario
/// and the Python surface).
///
/// Keys: `game.definition`, `game.prior`, `game.n`, `game.d`,
/// `game.codebook` (Tardos N), `game.support` (random-support/spiked m),
/// `game.mechanism`, `game.eps_hat`, `game.attacker`, `game.constant`
/// (zeros|ones), `game.sideinfo`, `game.revealed` (defaults to n-1),
/// `game.relation`, `game.gamma`, `game.gamma_hat` or `game.c_delta`,
/// `game.prefix_bits`, `game.epsilon`, `game.delta`, `game.xi`.
pub fn game_spec_from_kv(kv: &KvMap, trials: u64, master_seed: u64) -> Result<GameSpec> {
    let p = Params(kv);
    let n = p.usize("game.n")?;
    let d = p.usize("game.d")?;

    let prior = match p.str("game.prior")? {
        "tardos" => PriorSpec::Tardos(TardosParams::new(p.usize("game.codebook")?, d, n)?),
        "uniform-hypercube" => PriorSpec::UniformHypercube { d, n },
        "random-support" => PriorSpec::RandomSupport { m: p.usize("game.support")?, d, n },
        "spiked" => PriorSpec::Spiked { m: p.usize("game.support")?, d, n },
        other => return Err(Error::Config(format!("unknown prior {other:?}"))),
    };

    let mechanism = match p.str("game.mechanism")? {
        "exact-average" => MechanismSpec::ExactAverage,
        "noisy-average" => MechanismSpec::NoisyAverage { eps_hat: p.f64("game.eps_hat")? },
        "xor-parity" => MechanismSpec::XorParity,
        "bot" => MechanismSpec::Bot,
        other => return Err(Error::Config(format!("unknown mechanism {other:?}"))),
    };

    let attacker = match p.str("game.attacker")? {
        "round" => AttackerSpec::Round,
        "subtract" => AttackerSpec::Subtract,
        "two-candidate" => AttackerSpec::TwoCandidate,
        "parity-fit" => AttackerSpec::ParityFitMia,
        "superset-lookup" => AttackerSpec::SupersetLookup,
        "always-in" => AttackerSpec::AlwaysIn,
        "constant" => {
            let z0 = match kv.get("game.constant").map(|s| s.as_str()).unwrap_or("zeros") {
                "zeros" => BitVector::zeros(d),
                "ones" => BitVector::from_bits(&vec![1u8; d]),
                other => return Err(Error::Config(format!("unknown constant {other:?}"))),
            };
            AttackerSpec::Constant(z0)
        }
        other => return Err(Error::Config(format!("unknown attacker {other:?}"))),
    };

    let sideinfo = match kv.get("game.sideinfo").map(|s| s.as_str()).unwrap_or("none") {
        "none" => SideInfoSpec::None,
        "revealed-rows" => {
            let m = match kv.get("game.revealed") {
                Some(v) => parse_u64("game.revealed", v)? as usize,
                None => n - 1,
            };
            SideInfoSpec::RevealedRows { m }
        }
        "shuffled-pair" => SideInfoSpec::ShuffledPair,
        "superset" => SideInfoSpec::Superset,
        other => return Err(Error::Config(format!("unknown sideinfo {other:?}"))),
    };

    let definition = match p.str("game.definition")? {
        "vanilla" => Definition::Vanilla,
        "bi-criteria" => Definition::BiCriteria,
        "side-info" => Definition::SideInfo,
        "surprisal-gated" => Definition::SurprisalGated,
        "targeted-gated" => Definition::TargetedGated,
        "mia" => Definition::Mia,
        other => return Err(Error::Config(format!("unknown definition {other:?}"))),
    };

    let base_relation = match kv.get("game.relation").map(|s| s.as_str()).unwrap_or("membership") {
        "membership" => RelationSpec::ExactMembership,
        "hamming" => RelationSpec::HammingFrac(p.ratio("game.gamma")?),
        "prefix" => RelationSpec::TargetedCustom(CustomPredicate::PrefixMatch {
            bits: p.usize("game.prefix_bits")?,
        }),
        other => return Err(Error::Config(format!("unknown relation {other:?}"))),
    };

    let delta = kv.get("game.delta").map(|v| parse_f64("game.delta", v)).transpose()?.unwrap_or(0.05);
    let relation = if matches!(definition, Definition::BiCriteria | Definition::TargetedGated) {
        let pair = if let Some(gh) = kv.get("game.gamma_hat") {
            let gamma_hat = Ratio::parse(gh)?;
            BiRelationSpec::new(base_relation, RelationSpec::HammingFrac(gamma_hat))?
        } else if let (RelationSpec::HammingFrac(gamma), Some(cd)) =
            (base_relation, kv.get("game.c_delta"))
        {
            BiRelationSpec::hamming_pair(gamma, parse_f64("game.c_delta", cd)?, n, d, delta)?
        } else {
            BiRelationSpec::new(base_relation, base_relation)?
        };
        GameRelation::Bi(pair)
    } else {
        GameRelation::Single(base_relation)
    };

    let spec = GameSpec {
        prior,
        mechanism,
        attacker,
        sideinfo,
        relation,
        definition,
        epsilon: kv.get("game.epsilon").map(|v| parse_f64("game.epsilon", v)).transpose()?.unwrap_or(0.0),
        delta,
        xi: kv.get("game.xi").map(|v| parse_f64("game.xi", v)).transpose()?.unwrap_or(1.0),
        trials,
        master_seed,
    };
    spec.validate()?;
    Ok(spec)
}

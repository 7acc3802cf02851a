//! Run configuration: one TOML file, every key validated before anything
//! runs. Unknown keys are rejected with the nearest valid key, because a
//! silently ignored typo in a physics parameter is worse than a refusal.

use serde::{Deserialize, Serialize};
use std::path::PathBuf;

use crate::algebra::{build_dirac_algebra, DiracAlgebra};
use crate::error::{Error, Result};
use crate::grid::MomentumGrid1D;
use crate::operators::DENSE_GRID_LIMIT;
use crate::units::{ParticleParams, PhysicalConstants};

/// Keys that may appear but are absent from the serialized defaults.
const OPTIONAL_KEYS: [(&str, &str); 2] = [("", "output_dir"), ("particle", "tau0")];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitSystem {
    Natural,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UnitsConfig {
    pub system: UnitSystem,
    pub c: f64,
    pub hbar: f64,
}

impl Default for UnitsConfig {
    fn default() -> Self {
        Self {
            system: UnitSystem::Natural,
            c: 1.0,
            hbar: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParticleConfig {
    pub m0: f64,
    /// Overrides the derived τ₀ = h/(m₀c²). Only for ablations.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau0: Option<f64>,
}

impl Default for ParticleConfig {
    fn default() -> Self {
        Self { m0: 1.0, tau0: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub n: usize,
    pub dp: f64,
    pub p_center: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n: 256,
            dp: 0.05,
            p_center: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlgebraConfig {
    pub representation: String,
}

impl Default for AlgebraConfig {
    fn default() -> Self {
        Self {
            representation: crate::algebra::DIRAC_STANDARD.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstraintsConfig {
    pub fields: usize,
    pub edge: usize,
}

impl Default for ConstraintsConfig {
    fn default() -> Self {
        Self { fields: 10, edge: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    pub masses: Vec<f64>,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            masses: vec![0.1, 1.0, 10.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZbwConfig {
    pub p0: Vec<f64>,
    pub sigma_p: f64,
    pub n: usize,
    pub box_length: f64,
    pub periods: f64,
    pub samples: usize,
}

impl Default for ZbwConfig {
    fn default() -> Self {
        let e = crate::dynamics::ZitterbewegungExperiment::new(1.0);
        Self {
            p0: vec![0.2, 1.0, 5.0],
            sigma_p: e.sigma_p,
            n: e.n,
            box_length: e.box_length,
            periods: e.periods,
            samples: e.samples,
        }
    }
}

/// A positive-branch packet on its own grid, displaced by δε.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoostConfig {
    pub p0: f64,
    pub sigma_p: f64,
    pub n: usize,
    pub box_length: f64,
    pub delta_eps: f64,
}

impl Default for BoostConfig {
    fn default() -> Self {
        // δε·σ_r² ≪ 1 keeps the energy change first order.
        Self {
            p0: 1.0,
            sigma_p: 0.1,
            n: 1024,
            box_length: 2048.0,
            delta_eps: 1e-5,
        }
    }
}

/// A positive-branch packet on its own grid, translated by δt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TranslateConfig {
    pub p0: f64,
    pub sigma_p: f64,
    pub n: usize,
    pub box_length: f64,
    pub delta_t: f64,
}

impl Default for TranslateConfig {
    fn default() -> Self {
        // Narrow in momentum so the packet barely spreads over δt.
        Self {
            p0: 1.0,
            sigma_p: 0.004,
            n: 1024,
            box_length: 4096.0,
            delta_t: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PacketConfig {
    pub p0: f64,
    pub sigma_p: f64,
    /// Positive-branch weight of a mixed packet.
    pub weight: f64,
}

impl Default for PacketConfig {
    fn default() -> Self {
        Self {
            p0: 0.5,
            sigma_p: 0.2,
            weight: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Heisenberg3dConfig {
    pub edge: usize,
    pub fields: usize,
}

impl Default for Heisenberg3dConfig {
    fn default() -> Self {
        Self { edge: 8, fields: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PawConfig {
    pub clock_points: usize,
    pub omega: f64,
    pub cycles: usize,
    pub readings: usize,
}

impl Default for PawConfig {
    fn default() -> Self {
        Self {
            clock_points: 512,
            omega: 1.3,
            cycles: 2,
            readings: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmergenceConfig {
    pub masses: Vec<f64>,
    pub velocity: f64,
    pub splitting: f64,
    pub coupling: f64,
    pub coupling_center: f64,
    pub coupling_width: f64,
    pub window: [f64; 2],
    pub points_per_wavelength: f64,
    pub samples: usize,
}

impl Default for EmergenceConfig {
    fn default() -> Self {
        Self {
            masses: vec![1e2, 1e3, 1e4],
            velocity: 1.0,
            splitting: 1.0,
            coupling: 0.5,
            coupling_center: 0.0,
            coupling_width: 2.0,
            window: [-12.0, 12.0],
            points_per_wavelength: 12.0,
            samples: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub scenario: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub units: UnitsConfig,
    pub particle: ParticleConfig,
    pub grid: GridConfig,
    pub algebra: AlgebraConfig,
    pub constraints: ConstraintsConfig,
    pub spectrum: SpectrumConfig,
    pub zbw: ZbwConfig,
    pub boost: BoostConfig,
    pub translate: TranslateConfig,
    pub packet: PacketConfig,
    pub heisenberg_3d: Heisenberg3dConfig,
    pub paw: PawConfig,
    pub emergence: EmergenceConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: "all".into(),
            seed: 20_240_611,
            output_dir: None,
            units: UnitsConfig::default(),
            particle: ParticleConfig::default(),
            grid: GridConfig::default(),
            algebra: AlgebraConfig::default(),
            constraints: ConstraintsConfig::default(),
            spectrum: SpectrumConfig::default(),
            zbw: ZbwConfig::default(),
            boost: BoostConfig::default(),
            translate: TranslateConfig::default(),
            packet: PacketConfig::default(),
            heisenberg_3d: Heisenberg3dConfig::default(),
            paw: PawConfig::default(),
            emergence: EmergenceConfig::default(),
        }
    }
}

fn known_schema() -> toml::Table {
    toml::Table::try_from(RunConfig::default()).expect("defaults serialize")
}

/// Walks `value` against the default schema and reports the first unknown
/// key together with its closest valid sibling.
fn check_keys(value: &toml::Table, schema: &toml::Table, path: &str) -> Result<()> {
    for (key, v) in value {
        let optional = OPTIONAL_KEYS.iter().any(|(p, k)| *p == path && k == key);
        match schema.get(key) {
            Some(toml::Value::Table(sub)) => {
                if let toml::Value::Table(t) = v {
                    let child = if path.is_empty() { key.clone() } else { format!("{path}.{key}") };
                    check_keys(t, sub, &child)?;
                }
            }
            Some(_) => {}
            None if optional => {}
            None => {
                let candidates = schema
                    .keys()
                    .map(String::as_str)
                    .chain(OPTIONAL_KEYS.iter().filter(|(p, _)| *p == path).map(|(_, k)| *k));
                let nearest = candidates
                    .map(|c| (strsim::jaro_winkler(key, c), c))
                    .max_by(|a, b| a.0.total_cmp(&b.0))
                    .map(|(_, c)| c.to_string())
                    .unwrap_or_default();
                let location = if path.is_empty() { "top level".to_string() } else { format!("[{path}]") };
                return Err(Error::Config(format!(
                    "unknown key `{key}` in {location}; did you mean `{nearest}`?"
                )));
            }
        }
    }
    Ok(())
}

impl RunConfig {
    /// Parses and validates a configuration document.
    pub fn from_toml(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        check_keys(&table, &known_schema(), "")?;
        let config: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Canonical TOML echo; parses back to an equal configuration.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.units.system == UnitSystem::Natural && (self.units.c != 1.0 || self.units.hbar != 1.0) {
            return bad("natural units fix c = hbar = 1; use system = \"explicit\" to set them".into());
        }
        super::resolve(&self.scenario)?;
        if i64::try_from(self.seed).is_err() {
            // TOML integers are signed; a larger seed could not be echoed.
            return bad(format!("seed = {} exceeds {}", self.seed, i64::MAX));
        }
        self.constants()?;
        self.params()?;
        self.algebra()?;
        self.grid()?;
        if self.grid.n > DENSE_GRID_LIMIT {
            return bad(format!("grid.n = {} exceeds the dense limit {DENSE_GRID_LIMIT}", self.grid.n));
        }
        if self.spectrum.masses.iter().any(|&m| !(m > 0.0)) || self.spectrum.masses.is_empty() {
            return bad("spectrum.masses must be nonempty and positive".into());
        }
        if self.zbw.p0.is_empty() {
            return bad("zbw.p0 must be nonempty".into());
        }
        if self.constraints.fields == 0 || self.heisenberg_3d.fields == 0 {
            return bad("field counts must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.packet.weight) {
            return bad(format!("packet.weight must lie in [0, 1], got {}", self.packet.weight));
        }
        let e = &self.emergence;
        if e.masses.is_empty() || e.masses.windows(2).any(|w| w[1] <= w[0]) || e.masses[0] <= 0.0 {
            return bad("emergence.masses must be positive and strictly increasing".into());
        }
        if !(e.window[1] > e.window[0]) || !(e.velocity > 0.0) || !(e.coupling_width > 0.0) {
            return bad("emergence needs window[1] > window[0], velocity > 0 and coupling_width > 0".into());
        }
        Ok(())
    }

    pub fn constants(&self) -> Result<PhysicalConstants> {
        PhysicalConstants::new(self.units.c, self.units.hbar)
    }

    pub fn params(&self) -> Result<ParticleParams> {
        let p = ParticleParams::new(self.particle.m0, self.constants()?)?;
        Ok(match self.particle.tau0 {
            Some(t) if t > 0.0 => p.with_tau0(t),
            Some(t) => return Err(Error::InvalidParameter(format!("tau0 must be positive, got {t}"))),
            None => p,
        })
    }

    pub fn algebra(&self) -> Result<DiracAlgebra> {
        build_dirac_algebra(&self.algebra.representation)
    }

    pub fn grid(&self) -> Result<MomentumGrid1D> {
        MomentumGrid1D::new(self.grid.n, self.grid.dp, self.grid.p_center, self.units.hbar)
    }

    /// SHA-256 of the canonical echo, hex encoded.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
    }

    #[test]
    fn echo_round_trips() {
        let mut c = RunConfig::default();
        c.particle.tau0 = Some(3.0);
        c.output_dir = Some("out".into());
        c.zbw.p0 = vec![1.0];
        assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn unknown_key_names_the_nearest() {
        let err = RunConfig::from_toml("[particle]\ntau_zero = 1.0\n").unwrap_err().to_string();
        assert!(err.contains("tau_zero") && err.contains("`tau0`"), "{err}");
        let err = RunConfig::from_toml("sede = 3\n").unwrap_err().to_string();
        assert!(err.contains("`seed`"), "{err}");
    }

    #[test]
    fn natural_units_are_fixed() {
        assert!(RunConfig::from_toml("[units]\nc = 2.0\n").is_err());
        let c = RunConfig::from_toml("[units]\nsystem = \"explicit\"\nc = 2.0\n").unwrap();
        assert_eq!(c.params().unwrap().tau0, 2.0 * std::f64::consts::PI / 4.0);
    }

    #[test]
    fn bad_representation_is_refused() {
        assert!(RunConfig::from_toml("[algebra]\nrepresentation = \"chiral\"\n").is_err());
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(RunConfig::default().hash(), RunConfig::default().hash());
        assert_eq!(RunConfig::default().hash().len(), 64);
    }
}

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::moeller::{EDGE_FRACTION, EDGE_THRESHOLD, EPS_OMEGA};
use crate::dynamics::{doubling_schedule, LimitOptions, PacketSpec, Potential, RadialChannel};
use crate::error::{Error, Result};
use crate::observables::{FactorizationConfig, Region};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "COVSCAT_OUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Kinematics,
    RepCheck,
    Phaseshift,
    Moeller,
    DemoNogo,
    Xsection,
    Luminosity,
    Factorization,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Kinematics => "kinematics",
            Experiment::RepCheck => "rep-check",
            Experiment::Phaseshift => "phaseshift",
            Experiment::Moeller => "moeller",
            Experiment::DemoNogo => "demo-nogo",
            Experiment::Xsection => "xsection",
            Experiment::Luminosity => "luminosity",
            Experiment::Factorization => "factorization",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Masses {
    pub m1: f64,
    pub m2: f64,
}

impl Default for Masses {
    fn default() -> Self {
        Masses { m1: 1.0, m2: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub l: u32,
    pub n: usize,
    pub radius: f64,
    /// Repeat the phase comparison on n/2 points and require the error to halve from n/2 to n.
    pub refine: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { l: 0, n: 2048, radius: 140.0, refine: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitConfig {
    pub t0: f64,
    pub doublings: usize,
    pub epsilon: f64,
    pub edge_fraction: f64,
    pub edge_threshold: f64,
}

impl Default for LimitConfig {
    fn default() -> Self {
        LimitConfig { t0: 2.0, doublings: 5, epsilon: EPS_OMEGA, edge_fraction: EDGE_FRACTION, edge_threshold: EDGE_THRESHOLD }
    }
}

impl LimitConfig {
    pub fn options(&self) -> LimitOptions {
        LimitOptions {
            schedule: doubling_schedule(self.t0, self.doublings),
            epsilon: self.epsilon,
            edge_fraction: self.edge_fraction,
            edge_threshold: self.edge_threshold,
            scale: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KinematicsConfig {
    /// JSON file `{"masses": [..], "momenta": [[E, px, py, pz], ..]}` to decompose.
    pub input: Option<PathBuf>,
    pub samples: usize,
    pub seed: u64,
    pub covariance_samples: usize,
    pub mass_points: usize,
}

impl Default for KinematicsConfig {
    fn default() -> Self {
        KinematicsConfig { input: None, samples: 1000, seed: 1, covariance_samples: 200, mass_points: 100 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RepCheckConfig {
    /// Spins as 2s.
    pub spins: Vec<u32>,
    pub test_functions: usize,
    pub seed: u64,
}

impl Default for RepCheckConfig {
    fn default() -> Self {
        RepCheckConfig { spins: vec![0, 1], test_functions: 10, seed: 11 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseshiftConfig {
    pub z_min: f64,
    pub z_max: f64,
    pub points: usize,
    pub lmax: u32,
}

impl Default for PhaseshiftConfig {
    fn default() -> Self {
        PhaseshiftConfig { z_min: 0.2, z_max: 5.0, points: 200, lmax: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NogoConfig {
    /// c in M′ = M + c.
    pub shift: f64,
}

impl Default for NogoConfig {
    fn default() -> Self {
        NogoConfig { shift: 0.1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct XsectionConfig {
    pub z0: f64,
    pub lmax: u32,
    pub samples: usize,
    pub seed: u64,
    /// `full`, `band:<cmin>:<cmax>` or `cone:<cmin>`.
    pub region: String,
    /// Rapidity of the extra boost used for the frame-independence check.
    pub boost_rapidity: f64,
}

impl Default for XsectionConfig {
    fn default() -> Self {
        XsectionConfig { z0: 1.0, lmax: 3, samples: 1_000_000, seed: 7, region: "full".into(), boost_rapidity: 0.8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LuminosityConfig {
    /// Position width of the target density.
    pub target_width: f64,
    /// Side of the square flat-top beam section; A = beam_width².
    pub beam_width: f64,
    pub beam_edge: f64,
    /// Longitudinal position width of the beam.
    pub beam_length: f64,
    pub speed: f64,
    /// Points per axis.
    pub r#box: [usize; 3],
    pub spacing: f64,
    /// Half-width of the time window.
    pub window: f64,
    pub time_step: f64,
    /// σ used for w = σ·L.
    pub cross_section: f64,
}

impl Default for LuminosityConfig {
    fn default() -> Self {
        LuminosityConfig {
            target_width: 1.0,
            beam_width: 8.0,
            beam_edge: 0.25,
            beam_length: 1.0,
            speed: 0.6,
            r#box: [128, 64, 64],
            spacing: 0.25,
            window: 15.0,
            time_step: 0.5,
            cross_section: 0.25,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FactorizationRun {
    pub width_ratios: Vec<f64>,
    #[serde(flatten)]
    pub base: FactorizationConfig,
}

impl Default for FactorizationRun {
    fn default() -> Self {
        FactorizationRun { width_ratios: vec![0.1, 0.05, 0.025], base: FactorizationConfig::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub output_dir: Option<PathBuf>,
    pub masses: Masses,
    pub potential: Potential,
    pub grid: GridConfig,
    pub packet: PacketSpec,
    pub limit: LimitConfig,
    pub kinematics: KinematicsConfig,
    pub rep_check: RepCheckConfig,
    pub phaseshift: PhaseshiftConfig,
    pub nogo: NogoConfig,
    pub xsection: XsectionConfig,
    pub luminosity: LuminosityConfig,
    pub factorization: FactorizationRun,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            experiment: Experiment::Kinematics,
            output_dir: None,
            masses: Masses::default(),
            potential: Potential::SquareWell { depth: 0.5, radius: 1.0 },
            grid: GridConfig::default(),
            packet: PacketSpec { z0: 1.0, sigma_z: 0.1, r0: 0.0 },
            limit: LimitConfig::default(),
            kinematics: KinematicsConfig::default(),
            rep_check: RepCheckConfig::default(),
            phaseshift: PhaseshiftConfig::default(),
            nogo: NogoConfig::default(),
            xsection: XsectionConfig::default(),
            luminosity: LuminosityConfig::default(),
            factorization: FactorizationRun::default(),
        }
    }
}

fn positive(d: &mut Vec<String>, key: &str, x: f64) {
    if !(x > 0.0 && x.is_finite()) {
        d.push(format!("{key}: must be positive and finite, got {x}"));
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn channel(&self) -> Result<RadialChannel> {
        RadialChannel::with_radius(self.grid.l, self.grid.n, self.grid.radius, self.masses.m1, self.masses.m2)
    }

    /// SHA-256 of the canonical JSON form, output paths excluded.
    pub fn digest(&self) -> String {
        let mut c = self.clone();
        c.output_dir = None;
        let json = serde_json::to_string(&c).expect("config serializes");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Replaces the value at a dotted key path, e.g. `xsection.samples=1000`.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (path, raw) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override {assignment:?} is not of the form key.path=value")))?;
        let mut root = toml::Value::try_from(&*self).map_err(|e| Error::Config(e.to_string()))?;
        // Bare words that are not TOML literals are taken as strings.
        let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
        let keys: Vec<&str> = path.trim().split('.').collect();
        let mut cur = &mut root;
        for (i, k) in keys.iter().enumerate() {
            let table = cur.as_table_mut().ok_or_else(|| Error::Config(format!("{path}: {k} is not a table")))?;
            if i + 1 == keys.len() {
                table.insert((*k).to_string(), value.clone());
                break;
            }
            cur = table.entry((*k).to_string()).or_insert_with(|| toml::Value::Table(Default::default()));
        }
        *self = root.try_into().map_err(|e: toml::de::Error| Error::Config(format!("{path}: {}", e.message())))?;
        Ok(())
    }

    /// Every violated precondition, as `key: message`.
    pub fn validate(&self) -> Vec<String> {
        let mut d = vec![];
        positive(&mut d, "masses.m1", self.masses.m1);
        positive(&mut d, "masses.m2", self.masses.m2);
        if let Err(e) = self.potential.validate() {
            d.push(format!("potential: {e}"));
        }
        match self.channel() {
            Ok(ch) => {
                let outer = (1.0 - crate::dynamics::mass::ASYMPTOTIC_FRACTION) * ch.radius();
                if self.potential.support() > outer {
                    d.push(format!(
                        "potential: potential reaches asymptotic region (support {} > {outer}, the outer third of grid.radius)",
                        self.potential.support()
                    ));
                }
            }
            Err(e) => d.push(format!("grid: {e}")),
        }
        if let Err(e) = self.packet.validate() {
            d.push(format!("packet: {e}"));
        }
        if self.limit.doublings < 2 {
            d.push(format!("limit.doublings: need at least 2, got {}", self.limit.doublings));
        }
        positive(&mut d, "limit.t0", self.limit.t0);
        positive(&mut d, "limit.epsilon", self.limit.epsilon);
        if !(self.limit.edge_fraction > 0.0 && self.limit.edge_fraction < 0.5) {
            d.push(format!("limit.edge_fraction: must lie in (0, 0.5), got {}", self.limit.edge_fraction));
        }
        positive(&mut d, "limit.edge_threshold", self.limit.edge_threshold);
        if self.kinematics.samples == 0 || self.kinematics.covariance_samples == 0 || self.kinematics.mass_points == 0 {
            d.push("kinematics: sample counts must be positive".into());
        }
        if self.rep_check.spins.is_empty() || self.rep_check.spins.iter().any(|&s| s > 2) {
            d.push(format!("rep_check.spins: supported values are 0, 1 (spin 1/2) and 2, got {:?}", self.rep_check.spins));
        }
        if self.rep_check.test_functions < 10 {
            d.push(format!("rep_check.test_functions: at least 10 are required, got {}", self.rep_check.test_functions));
        }
        let ps = &self.phaseshift;
        if !(ps.z_min > 0.0 && ps.z_max > ps.z_min) || ps.points < 2 {
            d.push(format!("phaseshift: need 0 < z_min < z_max and at least 2 points, got [{}, {}] x {}", ps.z_min, ps.z_max, ps.points));
        }
        if !self.nogo.shift.is_finite() || self.nogo.shift == 0.0 {
            d.push(format!("nogo.shift: must be finite and nonzero, got {}", self.nogo.shift));
        }
        let xs = &self.xsection;
        positive(&mut d, "xsection.z0", xs.z0);
        if xs.samples < 2 {
            d.push("xsection.samples: need at least 2".into());
        }
        if let Err(e) = Region::parse(&xs.region) {
            d.push(format!("xsection.region: {e}"));
        }
        if !xs.boost_rapidity.is_finite() {
            d.push("xsection.boost_rapidity: must be finite".into());
        }
        let lu = &self.luminosity;
        for (k, v) in [
            ("luminosity.target_width", lu.target_width),
            ("luminosity.beam_width", lu.beam_width),
            ("luminosity.beam_edge", lu.beam_edge),
            ("luminosity.beam_length", lu.beam_length),
            ("luminosity.spacing", lu.spacing),
            ("luminosity.window", lu.window),
            ("luminosity.time_step", lu.time_step),
        ] {
            positive(&mut d, k, v);
        }
        if !(lu.speed > 0.0 && lu.speed < 1.0) {
            d.push(format!("luminosity.speed: must lie in (0, 1), got {}", lu.speed));
        }
        if lu.cross_section < 0.0 {
            d.push(format!("luminosity.cross_section: must be non-negative, got {}", lu.cross_section));
        }
        if lu.r#box.iter().any(|&n| n < 4) {
            d.push(format!("luminosity.box: need at least 4 points per axis, got {:?}", lu.r#box));
        }
        let fr = &self.factorization;
        if fr.width_ratios.is_empty() {
            d.push("factorization.width_ratios: empty".into());
        }
        for &r in &fr.width_ratios {
            let c = FactorizationConfig { width_ratio: r, ..fr.base.clone() };
            d.extend(c.validate().into_iter().map(|m| format!("factorization: {m}")));
        }
        d.dedup();
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid_and_round_trips() {
        let c = RunConfig::default();
        assert!(c.validate().is_empty(), "{:?}", c.validate());
        let back = RunConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.digest(), c.digest());
    }

    #[test]
    fn diagnostics() {
        let mut c = RunConfig::default();
        c.potential = Potential::SquareWell { depth: 0.5, radius: 100.0 };
        assert!(c.validate().iter().any(|m| m.contains("potential reaches asymptotic region")));
        let mut c = RunConfig::default();
        c.packet.sigma_z = 0.5;
        assert!(c.validate().iter().any(|m| m.contains("packet support touches threshold")));
    }

    #[test]
    fn overrides() {
        let mut c = RunConfig::default();
        let d0 = c.digest();
        c.set("xsection.samples=1000").unwrap();
        c.set("xsection.region=band:-0.5:0.5").unwrap();
        c.set("potential.depth=0.75").unwrap();
        assert_eq!(c.xsection.samples, 1000);
        assert_eq!(c.xsection.region, "band:-0.5:0.5");
        assert_eq!(c.potential, Potential::SquareWell { depth: 0.75, radius: 1.0 });
        assert_ne!(c.digest(), d0);
        assert!(c.set("xsection.samples=lots").is_err());
        assert!(c.set("nonsense.key=1").is_err());
    }
}

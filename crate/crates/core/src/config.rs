//! Experiment configuration read from JSON. Unknown keys are rejected and
//! every tolerance has a default that reports echo back.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{jumping_family, BundleMap, FamilySpec, LiftKind};
use crate::linalg::{CMat, C64};
use crate::space::Disc;

/// `[re, im]`
pub type Complex = [f64; 2];

fn cx(z: Complex) -> C64 {
    C64::new(z[0], z[1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilyConfig {
    Elliptic { t: Complex },
    SiegelDiagonal { t: Complex, b: Complex, c: Complex },
    /// A fixed period matrix given as rows of `[re, im]` pairs.
    Trivial { t: Complex, period: Vec<Vec<Complex>> },
    Jumping { t: Complex },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BundleConfig {
    Flat { character: Vec<f64> },
    Positive { degree: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DiscConfig {
    Grid { n: usize },
    Spectral { m: usize },
}

impl From<DiscConfig> for Disc {
    fn from(d: DiscConfig) -> Disc {
        match d {
            DiscConfig::Grid { n } => Disc::Grid { n },
            DiscConfig::Spectral { m } => Disc::Spectral { m },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LiftConfig {
    pub kind: LiftKind,
    /// `L²` size of the random vertical perturbation.
    pub amplitude: f64,
    /// Largest Fourier mode of the perturbation.
    pub band: i32,
}

impl Default for LiftConfig {
    fn default() -> Self {
        LiftConfig { kind: LiftKind::Trivialization, amplitude: 0.1, band: 2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub rank: f64,
    pub identity: f64,
    pub hodge: f64,
    pub minimal_solution: f64,
    pub representatives: f64,
    pub routes: f64,
    pub sff_routes: f64,
    pub nakano: f64,
    pub sff_psd: f64,
    pub oracle: f64,
    pub primitivity: f64,
    pub hodge_riemann: f64,
    pub lift_independence: f64,
    pub fd_step: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank: 1e-7,
            identity: 1e-10,
            hodge: 1e-9,
            minimal_solution: 1e-8,
            representatives: 1e-6,
            routes: 1e-5,
            sff_routes: 1e-6,
            nakano: 1e-6,
            sff_psd: 1e-10,
            oracle: 1e-3,
            primitivity: 1e-8,
            hodge_riemann: 1e-7,
            lift_independence: 1e-5,
            fd_step: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub from: Complex,
    pub to: Complex,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlsConfig {
    pub instances: usize,
    pub restarts: usize,
    pub step: f64,
    pub inject_griffiths_not_nakano: bool,
}

impl Default for BlsConfig {
    fn default() -> Self {
        BlsConfig { instances: 100, restarts: 50, step: 1e-3, inject_griffiths_not_nakano: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: FamilyConfig,
    #[serde(default)]
    pub bundle: Option<BundleConfig>,
    #[serde(default)]
    pub discretization: Option<DiscConfig>,
    /// Base direction `τ`.
    #[serde(default = "one")]
    pub direction: Complex,
    /// Second direction `σ`; defaults to `τ`.
    #[serde(default)]
    pub sigma: Option<Complex>,
    #[serde(default)]
    pub lift: LiftConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Compare the curvature with the finite-difference Gram oracle.
    #[serde(default)]
    pub oracle: bool,
    #[serde(default)]
    pub scan: Option<ScanConfig>,
    #[serde(default)]
    pub bls: BlsConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<String>,
}

fn one() -> Complex {
    [1.0, 0.0]
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::ConfigInvalid(m.into()));
        match (&self.family, &self.bundle) {
            (FamilyConfig::Jumping { .. }, Some(_)) => return bad("the jumping family fixes its own bundle"),
            (FamilyConfig::Jumping { .. }, None) => {}
            (_, None) => return bad("missing bundle"),
            (FamilyConfig::SiegelDiagonal { .. }, Some(BundleConfig::Positive { .. })) => {
                return bad("positive bundles are available on elliptic curves only")
            }
            _ => {}
        }
        if let FamilyConfig::Trivial { period, .. } = &self.family {
            if period.is_empty() || period.iter().any(|r| r.len() != period.len()) {
                return bad("period must be a square matrix");
            }
        }
        if let Some(s) = &self.scan {
            if s.samples == 0 {
                return bad("scan needs at least one sample");
            }
        }
        let t = &self.tolerances;
        let all = [
            t.rank, t.identity, t.hodge, t.minimal_solution, t.representatives, t.routes, t.sff_routes, t.nakano,
            t.sff_psd, t.oracle, t.primitivity, t.hodge_riemann, t.lift_independence, t.fd_step,
        ];
        if all.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return bad("tolerances must be finite and non-negative");
        }
        Ok(())
    }

    pub fn base_point(&self) -> C64 {
        match &self.family {
            FamilyConfig::Elliptic { t }
            | FamilyConfig::SiegelDiagonal { t, .. }
            | FamilyConfig::Trivial { t, .. }
            | FamilyConfig::Jumping { t } => cx(*t),
        }
    }

    pub fn tau(&self) -> C64 {
        cx(self.direction)
    }

    pub fn sigma(&self) -> C64 {
        self.sigma.map(cx).unwrap_or_else(|| self.tau())
    }

    pub fn family_spec(&self) -> Result<FamilySpec> {
        let t = self.base_point();
        let bundle_map = match &self.bundle {
            Some(BundleConfig::Flat { character }) => BundleMap::Flat { character: character.clone() },
            Some(BundleConfig::Positive { degree }) => BundleMap::Positive { degree: *degree },
            None => BundleMap::Jumping,
        };
        let spec = match &self.family {
            FamilyConfig::Elliptic { .. } => FamilySpec::elliptic(t, bundle_map),
            FamilyConfig::SiegelDiagonal { b, c, .. } => match bundle_map {
                BundleMap::Flat { character } => FamilySpec::siegel_diagonal(t, cx(*b), cx(*c), character),
                _ => return Err(Error::ConfigInvalid("siegel-diagonal needs a flat bundle".into())),
            },
            FamilyConfig::Trivial { period, .. } => {
                let n = period.len();
                let m = CMat::from_fn(n, n, |i, j| cx(period[i][j]));
                FamilySpec::constant(m, bundle_map, t)
            }
            FamilyConfig::Jumping { .. } => jumping_family(t),
        };
        Ok(spec.with_direction(self.tau()))
    }

    pub fn disc(&self, spec: &FamilySpec) -> Disc {
        self.discretization.map(Disc::from).unwrap_or_else(|| spec.default_disc())
    }

    /// Evenly spaced scan points, endpoints included.
    pub fn scan_points(&self) -> Result<Vec<C64>> {
        let s = self.scan.ok_or_else(|| Error::ConfigInvalid("scan-rank needs a `scan` section".into()))?;
        let (a, b) = (cx(s.from), cx(s.to));
        if s.samples == 1 {
            return Ok(vec![a]);
        }
        Ok((0..s.samples).map(|i| a + (b - a) * (i as f64 / (s.samples - 1) as f64)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = ExperimentConfig::from_json(
            r#"{"family": {"id": "elliptic", "t": [0, 1]}, "bundle": {"kind": "positive", "degree": 2}}"#,
        )
        .unwrap();
        assert_eq!(cfg.tolerances, Tolerances::default());
        assert_eq!(cfg.sigma(), C64::new(1.0, 0.0));
        let spec = cfg.family_spec().unwrap();
        assert_eq!(cfg.disc(&spec), Disc::Grid { n: 64 });
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for text in [
            r#"{"family": {"id": "elliptic", "t": [0, 1]}, "bundle": {"kind": "flat", "character": [0, 0]}, "colour": 1}"#,
            r#"{"family": {"id": "elliptic", "t": [0, 1], "d": 2}, "bundle": {"kind": "flat", "character": [0, 0]}}"#,
            r#"{"family": {"id": "elliptic", "t": [0, 1]}, "bundle": {"kind": "flat", "character": [0, 0]}, "tolerances": {"rnak": 1}}"#,
        ] {
            assert!(matches!(ExperimentConfig::from_json(text), Err(Error::ConfigInvalid(_))), "{text}");
        }
    }

    #[test]
    fn malformed_and_inconsistent_configs_fail() {
        assert!(matches!(ExperimentConfig::from_json("{"), Err(Error::ConfigInvalid(_))));
        let jumping_with_bundle =
            r#"{"family": {"id": "jumping", "t": [0, 1]}, "bundle": {"kind": "flat", "character": [0, 0]}}"#;
        assert!(matches!(ExperimentConfig::from_json(jumping_with_bundle), Err(Error::ConfigInvalid(_))));
        let no_bundle = r#"{"family": {"id": "elliptic", "t": [0, 1]}}"#;
        assert!(matches!(ExperimentConfig::from_json(no_bundle), Err(Error::ConfigInvalid(_))));
    }

    #[test]
    fn scan_points_include_both_ends() {
        let cfg = ExperimentConfig::from_json(
            r#"{"family": {"id": "jumping", "t": [0, 1]}, "scan": {"from": [-0.5, 1], "to": [0.5, 1], "samples": 101}}"#,
        )
        .unwrap();
        let pts = cfg.scan_points().unwrap();
        assert_eq!(pts.len(), 101);
        assert_eq!(pts[50], C64::new(0.0, 1.0));
        assert_eq!(pts[100], C64::new(0.5, 1.0));
    }
}

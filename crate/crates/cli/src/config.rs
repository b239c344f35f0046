//! TOML experiment configuration. Every section is optional and every key
//! has a default; unknown keys are rejected.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    /// Output directory; `--out` takes precedence.
    #[serde(default)]
    pub out: Option<PathBuf>,
    pub endomorphism: EndomorphismConfig,
    #[serde(default)]
    pub verify_anosov: VerifyAnosov,
    #[serde(default)]
    pub preimage_tree: PreimageTree,
    #[serde(default)]
    pub dispersion: Dispersion,
    #[serde(default)]
    pub dichotomy_scan: DichotomyScan,
    #[serde(default)]
    pub angle_decay: AngleDecay,
    #[serde(default)]
    pub lyapunov_census: LyapunovCensus,
    #[serde(default)]
    pub quasi_iso: QuasiIso,
    #[serde(default)]
    pub ergodic_test: ErgodicTest,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EndomorphismConfig {
    /// Integer matrix, row by row.
    pub matrix: Vec<Vec<i64>>,
    #[serde(default, rename = "shear")]
    pub shears: Vec<ShearConfig>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ShearConfig {
    pub axis: usize,
    pub driver: usize,
    pub amplitude: f64,
    #[serde(default = "one_u32")]
    pub frequency: u32,
    #[serde(default)]
    pub phase: f64,
}

fn one_u32() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyAnosov {
    pub unstable_half_angle: f64,
    pub stable_half_angle: f64,
    /// Grid points per axis; defaults to 256 in dimension 2 and 32 above.
    pub resolution: Option<usize>,
    pub slope_samples: usize,
}

impl Default for VerifyAnosov {
    fn default() -> Self {
        VerifyAnosov { unstable_half_angle: 0.3, stable_half_angle: 0.3, resolution: None, slope_samples: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreimageTree {
    /// Base point; random from the seed when absent.
    pub point: Option<Vec<f64>>,
    pub depth: usize,
}

impl Default for PreimageTree {
    fn default() -> Self {
        PreimageTree { point: None, depth: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct Dispersion {
    pub points: usize,
    pub samples: usize,
    pub depth: usize,
    /// Enumerate every pre-history of `depth` instead of sampling.
    pub exhaustive: bool,
    pub cluster_tolerance: f64,
    pub threshold: f64,
}

impl Default for Dispersion {
    fn default() -> Self {
        Dispersion { points: 10, samples: 200, depth: 40, exhaustive: false, cluster_tolerance: 1e-4, threshold: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expectation {
    /// Pass when the fraction is 0 or at least `min_fraction`.
    Either,
    Special,
    NonSpecial,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct DichotomyScan {
    pub points: usize,
    pub samples: usize,
    pub depth: usize,
    pub cluster_tolerance: f64,
    pub threshold: f64,
    pub min_fraction: f64,
    pub expect: Expectation,
}

impl Default for DichotomyScan {
    fn default() -> Self {
        DichotomyScan {
            points: 100,
            samples: 200,
            depth: 40,
            cluster_tolerance: 1e-4,
            threshold: 1e-3,
            min_fraction: 0.9,
            expect: Expectation::Either,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct AngleDecay {
    pub points: usize,
    /// Census size per point; every pair of distinct directions is followed.
    pub samples: usize,
    pub depth: usize,
    pub steps: usize,
    /// Required final angle.
    pub target: f64,
    /// Steps after which the angle must be non-increasing.
    pub burn_in: usize,
    /// Directions closer than this are treated as equal.
    pub distinct: f64,
}

impl Default for AngleDecay {
    fn default() -> Self {
        AngleDecay { points: 10, samples: 20, depth: 40, steps: 15, target: 1e-8, burn_in: 3, distinct: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct LyapunovCensus {
    pub points: usize,
    pub steps: usize,
    pub depth: usize,
    pub burn_in: usize,
    pub slack: f64,
    /// Percentile compared against `lambda_A + slack`.
    pub percentile: f64,
}

impl Default for LyapunovCensus {
    fn default() -> Self {
        LyapunovCensus { points: 500, steps: 20_000, depth: 40, burn_in: 100, slack: 0.01, percentile: 99.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuasiIso {
    pub start: Vec<f64>,
    pub arclength: f64,
    pub step: f64,
    pub depth: usize,
    pub floors: Vec<f64>,
    /// Iterates in the growth-ratio comparison.
    pub k: usize,
    /// Growth ratios must lie in `[1/growth_bound, growth_bound]`.
    pub growth_bound: f64,
    pub random_pairs: usize,
    pub min_separation: f64,
    pub max_separation: f64,
    pub direction_floor: f64,
    pub direction_tolerance: f64,
    pub sandwich_eps: f64,
    pub sandwich_steps: usize,
}

impl Default for QuasiIso {
    fn default() -> Self {
        QuasiIso {
            start: vec![0.3, 0.6],
            arclength: 50.0,
            step: 0.01,
            depth: 30,
            floors: vec![5.0, 10.0, 20.0, 40.0],
            k: 5,
            growth_bound: 1.2,
            random_pairs: 2000,
            min_separation: 10.0,
            max_separation: 50.0,
            direction_floor: 20.0,
            direction_tolerance: 0.05,
            sandwich_eps: 0.05,
            sandwich_steps: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ObservableKind {
    Cos,
    Sin,
    Constant,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableConfig {
    pub kind: ObservableKind,
    /// Frequency vector for `cos`/`sin`.
    #[serde(default)]
    pub k: Vec<i64>,
    /// Value for `constant`.
    #[serde(default)]
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct ErgodicTest {
    pub starts: usize,
    pub steps: usize,
    pub mean_tolerance: f64,
    pub std_tolerance: f64,
    pub scaling_steps: Vec<usize>,
    pub slope_tolerance: f64,
    /// Defaults to `cos 2πx1`, `sin 2πx2`, `cos 2π(x1+x2)` in dimension 2
    /// and the coordinate cosines otherwise.
    #[serde(rename = "observable")]
    pub observables: Vec<ObservableConfig>,
}

impl Default for ErgodicTest {
    fn default() -> Self {
        ErgodicTest {
            starts: 100,
            steps: 100_000,
            mean_tolerance: 0.01,
            std_tolerance: 0.02,
            scaling_steps: vec![1_000, 10_000, 100_000],
            slope_tolerance: 0.15,
            observables: Vec::new(),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Dimension given by the matrix.
    pub fn dimension(&self) -> usize {
        self.endomorphism.matrix.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = ExperimentConfig::parse("[endomorphism]\nmatrix = [[3, 1], [1, 1]]\n").unwrap();
        assert_eq!(c.seed, 0);
        assert!(c.endomorphism.shears.is_empty());
        assert_eq!(c.lyapunov_census, LyapunovCensus::default());
        assert_eq!(c.dimension(), 2);
    }

    #[test]
    fn shears_and_sections() {
        let text = r#"
seed = 7
[endomorphism]
matrix = [[3, 1], [1, 1]]
[[endomorphism.shear]]
axis = 0
driver = 1
amplitude = 0.02
[dichotomy_scan]
points = 5
expect = "non-special"
[[ergodic_test.observable]]
kind = "cos"
k = [1, 0]
"#;
        let c = ExperimentConfig::parse(text).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.endomorphism.shears[0].frequency, 1);
        assert_eq!(c.dichotomy_scan.points, 5);
        assert_eq!(c.dichotomy_scan.samples, 200);
        assert_eq!(c.dichotomy_scan.expect, Expectation::NonSpecial);
        assert_eq!(c.ergodic_test.observables.len(), 1);
    }

    #[test]
    fn unknown_keys_rejected_with_line() {
        let text = "[endomorphism]\nmatrix = [[3, 1], [1, 1]]\n[lyapunov_census]\nstesp = 10\n";
        let err = ExperimentConfig::parse(text).unwrap_err().to_string();
        assert!(err.contains("stesp"), "{err}");
        assert!(err.contains("line 4"), "{err}");
        assert!(ExperimentConfig::parse("seed = 1\n").is_err());
    }
}

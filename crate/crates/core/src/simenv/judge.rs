//! Judge models: how true quality turns into router-visible feedback.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::domain::JudgeSpec;
use crate::scoring::clamp01;

#[derive(Debug, Clone, PartialEq)]
pub enum JudgeModel {
    /// Feedback equals true quality.
    Oracle,
    /// True quality plus Gaussian noise, clipped to [0, 1].
    Gaussian { sigma: f64 },
    /// Noise, then snap to the nearest of `levels` grid points in [0, 1].
    Quantized { sigma: f64, levels: usize },
}

impl JudgeModel {
    pub fn from_spec(spec: &JudgeSpec) -> Self {
        match spec {
            JudgeSpec::Oracle => JudgeModel::Oracle,
            JudgeSpec::GaussianNoise { sigma } => JudgeModel::Gaussian { sigma: *sigma },
            JudgeSpec::Quantized { sigma, levels } => JudgeModel::Quantized {
                sigma: *sigma,
                levels: *levels,
            },
        }
    }

    /// Router-visible score for a true quality. Oracle consumes no
    /// randomness; the noisy modes consume exactly one draw per call.
    pub fn score(&self, true_quality: f64, rng: &mut impl Rng) -> f64 {
        assert!(
            (0.0..=1.0).contains(&true_quality),
            "true quality must lie in [0, 1]"
        );
        match self {
            JudgeModel::Oracle => true_quality,
            JudgeModel::Gaussian { sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                clamp01(true_quality + sigma * z)
            }
            JudgeModel::Quantized { sigma, levels } => {
                let z: f64 = rng.sample(StandardNormal);
                let noisy = clamp01(true_quality + sigma * z);
                let steps = (*levels - 1) as f64;
                (noisy * steps).round() / steps
            }
        }
    }
}

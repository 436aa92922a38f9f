//! Load schedules: who is under how much load at each round.
//!
//! A schedule spec plus (rounds, pool size, seed) realizes into a total
//! function over rounds 1..=T. Only the spike pattern consumes
//! randomness; its burst grid is precomputed at realization so lookups
//! stay pure.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{LoadPattern, LoadScheduleSpec};
use crate::rng;

/// Discrete load state of a provider.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LoadState {
    Idle,
    Moderate,
    Stressed,
}

/// Load level seen by the latency model: a discrete state, or a
/// continuous severity in [0, 1] (0 = idle, 1 = stressed) under the
/// gradual pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LoadLevel {
    State(LoadState),
    Severity(f64),
}

impl LoadLevel {
    /// Nearest discrete state; empirical latency pools have no
    /// interpolation axis, so severities quantize to thirds.
    pub fn quantized(&self) -> LoadState {
        match *self {
            LoadLevel::State(s) => s,
            LoadLevel::Severity(s) => {
                if s < 1.0 / 3.0 {
                    LoadState::Idle
                } else if s < 2.0 / 3.0 {
                    LoadState::Moderate
                } else {
                    LoadState::Stressed
                }
            }
        }
    }
}

/// A schedule materialized for one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizedSchedule {
    spec: LoadScheduleSpec,
    rounds: usize,
    providers: usize,
    /// spike pattern only: `spikes[t - 1][i]` = provider i stressed at round t.
    spikes: Option<Vec<Vec<bool>>>,
}

impl RealizedSchedule {
    pub fn realize(spec: &LoadScheduleSpec, rounds: usize, providers: usize, seed: u64) -> Self {
        let spikes = match spec.pattern {
            LoadPattern::Spike => Some(realize_spikes(spec, rounds, providers, seed)),
            _ => None,
        };
        RealizedSchedule {
            spec: spec.clone(),
            rounds,
            providers,
            spikes,
        }
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn pattern(&self) -> LoadPattern {
        self.spec.pattern
    }

    /// Load level of `provider` at 1-based `round`.
    pub fn load_at(&self, round: u64, provider: usize) -> LoadLevel {
        assert!(
            round >= 1 && round <= self.rounds as u64,
            "round {round} outside 1..={}",
            self.rounds
        );
        assert!(provider < self.providers, "provider index out of range");
        let t = round as usize;
        match self.spec.pattern {
            LoadPattern::Stationary => LoadLevel::State(LoadState::Idle),
            LoadPattern::Step => {
                if provider != self.spec.target {
                    return LoadLevel::State(LoadState::Moderate);
                }
                let lo = self.rounds / 4;
                let hi = 3 * self.rounds / 4;
                if t >= lo && t < hi {
                    LoadLevel::State(LoadState::Stressed)
                } else {
                    LoadLevel::State(LoadState::Idle)
                }
            }
            LoadPattern::Rotation => {
                let segment = (self.rounds / self.providers).max(1);
                let stressed = ((t - 1) / segment).min(self.providers - 1);
                if provider == stressed {
                    LoadLevel::State(LoadState::Stressed)
                } else {
                    LoadLevel::State(LoadState::Moderate)
                }
            }
            LoadPattern::Spike => {
                let grid = self.spikes.as_ref().expect("spike grid realized");
                if grid[t - 1][provider] {
                    LoadLevel::State(LoadState::Stressed)
                } else {
                    LoadLevel::State(LoadState::Idle)
                }
            }
            LoadPattern::Gradual => {
                if provider == self.spec.target {
                    LoadLevel::Severity(t as f64 / self.rounds as f64)
                } else {
                    LoadLevel::State(LoadState::Moderate)
                }
            }
        }
    }

    pub fn load_row(&self, round: u64) -> Vec<LoadLevel> {
        (0..self.providers).map(|i| self.load_at(round, i)).collect()
    }
}

fn realize_spikes(
    spec: &LoadScheduleSpec,
    rounds: usize,
    providers: usize,
    seed: u64,
) -> Vec<Vec<bool>> {
    let mut grid = vec![vec![false; providers]; rounds];
    let mut rng = rng::stream(seed, rng::TAG_LOAD_SPIKES);
    for provider in 0..providers {
        let mut remaining = 0usize;
        for row in grid.iter_mut() {
            if remaining > 0 {
                row[provider] = true;
                remaining -= 1;
            } else if rng.random::<f64>() < spec.p_spike {
                row[provider] = true;
                remaining = spec.burst - 1;
            }
        }
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(pattern: LoadPattern) -> LoadScheduleSpec {
        LoadScheduleSpec {
            pattern,
            ..LoadScheduleSpec::default()
        }
    }

    #[test]
    fn step_window_covers_the_middle_half() {
        let s = RealizedSchedule::realize(&spec(LoadPattern::Step), 200, 3, 0);
        assert_eq!(s.load_at(10, 0), LoadLevel::State(LoadState::Idle));
        assert_eq!(s.load_at(49, 0), LoadLevel::State(LoadState::Idle));
        assert_eq!(s.load_at(50, 0), LoadLevel::State(LoadState::Stressed));
        assert_eq!(s.load_at(100, 0), LoadLevel::State(LoadState::Stressed));
        assert_eq!(s.load_at(149, 0), LoadLevel::State(LoadState::Stressed));
        assert_eq!(s.load_at(150, 0), LoadLevel::State(LoadState::Idle));
        assert_eq!(s.load_at(180, 0), LoadLevel::State(LoadState::Idle));
        // Non-target providers sit at moderate load throughout.
        assert_eq!(s.load_at(100, 1), LoadLevel::State(LoadState::Moderate));
        assert_eq!(s.load_at(10, 2), LoadLevel::State(LoadState::Moderate));
    }

    #[test]
    fn rotation_cycles_through_equal_segments() {
        let s = RealizedSchedule::realize(&spec(LoadPattern::Rotation), 200, 3, 0);
        let stressed_at = |t: u64| {
            (0..3)
                .find(|&i| s.load_at(t, i) == LoadLevel::State(LoadState::Stressed))
                .unwrap()
        };
        assert_eq!(stressed_at(1), 0);
        assert_eq!(stressed_at(66), 0);
        assert_eq!(stressed_at(67), 1);
        assert_eq!(stressed_at(132), 1);
        assert_eq!(stressed_at(133), 2);
        assert_eq!(stressed_at(198), 2);
        // The remainder rounds stay on the last provider.
        assert_eq!(stressed_at(199), 2);
        assert_eq!(stressed_at(200), 2);
    }

    #[test]
    fn gradual_severity_is_linear_on_the_target() {
        let mut sp = spec(LoadPattern::Gradual);
        sp.target = 1;
        let s = RealizedSchedule::realize(&sp, 200, 2, 0);
        assert_eq!(s.load_at(100, 1), LoadLevel::Severity(0.5));
        assert_eq!(s.load_at(200, 1), LoadLevel::Severity(1.0));
        assert_eq!(s.load_at(100, 0), LoadLevel::State(LoadState::Moderate));
    }

    #[test]
    fn severity_quantizes_to_thirds() {
        assert_eq!(LoadLevel::Severity(0.0).quantized(), LoadState::Idle);
        assert_eq!(LoadLevel::Severity(0.5).quantized(), LoadState::Moderate);
        assert_eq!(LoadLevel::Severity(0.9).quantized(), LoadState::Stressed);
    }

    #[test]
    fn spike_bursts_last_their_full_length() {
        let mut sp = spec(LoadPattern::Spike);
        sp.p_spike = 0.05;
        sp.burst = 5;
        let s = RealizedSchedule::realize(&sp, 400, 2, 11);
        // Deterministic in the seed.
        let again = RealizedSchedule::realize(&sp, 400, 2, 11);
        assert_eq!(s, again);
        // Each maximal stressed run is at least `burst` long unless it
        // hits the horizon (restarts within a burst can extend it).
        for provider in 0..2 {
            let mut t = 1u64;
            while t <= 400 {
                if s.load_at(t, provider) == LoadLevel::State(LoadState::Stressed) {
                    let start = t;
                    while t <= 400 && s.load_at(t, provider) == LoadLevel::State(LoadState::Stressed)
                    {
                        t += 1;
                    }
                    let run = t - start;
                    assert!(run >= 5 || t > 400, "short burst of {run} at {start}");
                } else {
                    t += 1;
                }
            }
        }
    }

    #[test]
    fn schedule_is_total_over_all_rounds_and_providers() {
        for pattern in LoadPattern::ALL {
            let s = RealizedSchedule::realize(&spec(pattern), 37, 4, 3);
            for t in 1..=37 {
                for i in 0..4 {
                    let _ = s.load_at(t, i);
                }
            }
        }
    }
}

//! Finite-horizon asynchronous schedules `(α, β)`.
//!
//! Processors are numbered from 0 and ticks from 1; `β(t, i, j)` is the tick
//! whose value of processor `j` processor `i` reads when it activates at `t`.
//! Admissibility is checked through three finite surrogates: causality
//! (`β(t, i, j) < t`), a fairness window `W` (every processor activates in
//! every `W` consecutive ticks) and a staleness bound `B`
//! (`t - β(t, i, j) <= B`).

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error("invalid schedule parameters: {0}")]
    InvalidParameters(String),
    #[error("malformed schedule file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissibilityBounds {
    pub fairness_window: usize,
    pub max_staleness: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleParams {
    pub activation_prob: f64,
    pub max_staleness: usize,
    pub fairness_window: usize,
}

impl Default for SampleParams {
    fn default() -> Self {
        Self {
            activation_prob: 0.5,
            max_staleness: 5,
            fairness_window: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScheduleViolation {
    /// `β(t, i, j) >= t`.
    Causality {
        t: usize,
        i: usize,
        j: usize,
        source: usize,
    },
    /// `t - β(t, i, j) > B`.
    Staleness {
        t: usize,
        i: usize,
        j: usize,
        age: usize,
    },
    /// Processor idle throughout the window of `W` ticks starting at `start`.
    Fairness { processor: usize, start: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    processors: usize,
    horizon: usize,
    activations: Vec<Vec<bool>>,
    delays: Vec<usize>,
    bounds: AdmissibilityBounds,
}

impl Schedule {
    /// Builds a schedule from activation sets (index `t - 1`) and a delay function.
    pub fn from_parts<F>(
        processors: usize,
        activations: Vec<Vec<usize>>,
        delay: F,
        bounds: AdmissibilityBounds,
    ) -> Result<Self, ScheduleError>
    where
        F: Fn(usize, usize, usize) -> usize,
    {
        if processors == 0 {
            return Err(ScheduleError::InvalidParameters(
                "processor count must be at least 1".into(),
            ));
        }
        let horizon = activations.len();
        let mut active = vec![vec![false; processors]; horizon];
        for (t, set) in activations.iter().enumerate() {
            for &i in set {
                if i >= processors {
                    return Err(ScheduleError::InvalidParameters(format!(
                        "processor {i} activated at tick {} but only {processors} exist",
                        t + 1
                    )));
                }
                active[t][i] = true;
            }
        }
        let mut delays = Vec::with_capacity(horizon * processors * processors);
        for t in 1..=horizon {
            for i in 0..processors {
                for j in 0..processors {
                    delays.push(delay(t, i, j));
                }
            }
        }
        Ok(Self {
            processors,
            horizon,
            activations: active,
            delays,
            bounds,
        })
    }

    /// Every processor active at every tick, reading the previous tick.
    pub fn synchronous(processors: usize, horizon: usize) -> Result<Self, ScheduleError> {
        Self::from_parts(
            processors,
            vec![(0..processors).collect(); horizon],
            |t, _, _| t - 1,
            AdmissibilityBounds {
                fairness_window: 1,
                max_staleness: 1,
            },
        )
    }

    /// Samples an admissible schedule from `seed`.
    ///
    /// Each processor activates independently with `activation_prob`, and is
    /// forced active when it would otherwise sit idle for a whole fairness
    /// window. Each delay is drawn uniformly from `[max(0, t - B), t - 1]`.
    pub fn sample(
        processors: usize,
        horizon: usize,
        seed: u64,
        params: SampleParams,
    ) -> Result<Self, ScheduleError> {
        let SampleParams {
            activation_prob: p,
            max_staleness: b,
            fairness_window: w,
        } = params;
        if processors == 0 {
            return Err(ScheduleError::InvalidParameters(
                "processor count must be at least 1".into(),
            ));
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(ScheduleError::InvalidParameters(format!(
                "activation probability {p} outside (0, 1]"
            )));
        }
        if b == 0 {
            return Err(ScheduleError::InvalidParameters(
                "staleness bound must be at least 1".into(),
            ));
        }
        let min_window = (1.0 / p).ceil() as usize;
        if w < min_window {
            return Err(ScheduleError::InvalidParameters(format!(
                "fairness window {w} is shorter than {min_window} = ceil(1 / activation probability)"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idle = vec![0usize; processors];
        let mut active = vec![vec![false; processors]; horizon];
        let mut delays = Vec::with_capacity(horizon * processors * processors);
        for t in 1..=horizon {
            for i in 0..processors {
                let on = rng.gen_bool(p) || idle[i] + 1 >= w;
                active[t - 1][i] = on;
                idle[i] = if on { 0 } else { idle[i] + 1 };
            }
            let lo = t.saturating_sub(b);
            for _ in 0..processors * processors {
                delays.push(rng.gen_range(lo..=t - 1));
            }
        }
        Ok(Self {
            processors,
            horizon,
            activations: active,
            delays,
            bounds: AdmissibilityBounds {
                fairness_window: w,
                max_staleness: b,
            },
        })
    }

    pub fn processors(&self) -> usize {
        self.processors
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn bounds(&self) -> AdmissibilityBounds {
        self.bounds
    }

    pub fn is_active(&self, t: usize, i: usize) -> bool {
        self.activations[t - 1][i]
    }

    /// `α(t)` as a sorted list.
    pub fn active_set(&self, t: usize) -> Vec<usize> {
        (0..self.processors)
            .filter(|&i| self.is_active(t, i))
            .collect()
    }

    /// `β(t, i, j)`.
    pub fn delay(&self, t: usize, i: usize, j: usize) -> usize {
        let k = self.processors;
        self.delays[((t - 1) * k + i) * k + j]
    }

    /// Checks causality, bounded staleness and the fairness window, in that order
    /// per tick; returns the first violation.
    pub fn check_admissible_prefix(&self) -> Result<(), ScheduleViolation> {
        let AdmissibilityBounds {
            fairness_window: w,
            max_staleness: b,
        } = self.bounds;
        for t in 1..=self.horizon {
            for i in 0..self.processors {
                for j in 0..self.processors {
                    let source = self.delay(t, i, j);
                    if source >= t {
                        return Err(ScheduleViolation::Causality { t, i, j, source });
                    }
                    if t - source > b {
                        return Err(ScheduleViolation::Staleness {
                            t,
                            i,
                            j,
                            age: t - source,
                        });
                    }
                }
            }
        }
        if w == 0 {
            return Err(ScheduleViolation::Fairness {
                processor: 0,
                start: 1,
            });
        }
        if self.horizon >= w {
            for start in 1..=self.horizon - w + 1 {
                for p in 0..self.processors {
                    if !(start..start + w).any(|t| self.is_active(t, p)) {
                        return Err(ScheduleViolation::Fairness {
                            processor: p,
                            start,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_file(&self) -> ScheduleFile {
        let mut delays = Vec::new();
        for t in 1..=self.horizon {
            for i in 0..self.processors {
                for j in 0..self.processors {
                    let d = self.delay(t, i, j);
                    if d != t - 1 {
                        delays.push([t, i, j, d]);
                    }
                }
            }
        }
        ScheduleFile {
            processors: Some(self.processors),
            horizon: self.horizon,
            activations: (1..=self.horizon).map(|t| self.active_set(t)).collect(),
            delays,
            max_staleness: Some(self.bounds.max_staleness),
            fairness_window: Some(self.bounds.fairness_window),
        }
    }
}

/// JSON form of a schedule. Absent delay entries default to `t - 1`;
/// absent bounds default to the horizon.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub processors: Option<usize>,
    pub horizon: usize,
    pub activations: Vec<Vec<usize>>,
    #[serde(default)]
    pub delays: Vec<[usize; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_staleness: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fairness_window: Option<usize>,
}

impl ScheduleFile {
    pub fn into_schedule(self) -> Result<Schedule, ScheduleError> {
        if self.activations.len() != self.horizon {
            return Err(ScheduleError::InvalidParameters(format!(
                "horizon {} but {} activation sets",
                self.horizon,
                self.activations.len()
            )));
        }
        let processors = self
            .processors
            .unwrap_or_else(|| self.activations.iter().flatten().max().map_or(1, |m| m + 1));
        let k = processors;
        let mut table: Vec<Option<usize>> = vec![None; self.horizon * k * k];
        for [t, i, j, src] in self.delays {
            if t == 0 || t > self.horizon || i >= k || j >= k {
                return Err(ScheduleError::InvalidParameters(format!(
                    "delay entry [{t}, {i}, {j}, {src}] out of range"
                )));
            }
            table[((t - 1) * k + i) * k + j] = Some(src);
        }
        let bounds = AdmissibilityBounds {
            fairness_window: self.fairness_window.unwrap_or(self.horizon.max(1)),
            max_staleness: self.max_staleness.unwrap_or(self.horizon.max(1)),
        };
        Schedule::from_parts(
            processors,
            self.activations,
            |t, i, j| table[((t - 1) * k + i) * k + j].unwrap_or(t - 1),
            bounds,
        )
    }
}

pub fn load_schedule(path: &Path) -> Result<Schedule, ScheduleError> {
    let text = std::fs::read_to_string(path)?;
    let file: ScheduleFile = serde_json::from_str(&text)?;
    file.into_schedule()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synchronous_schedule_shape() {
        let s = Schedule::synchronous(1, 3).unwrap();
        for t in 1..=3 {
            assert_eq!(s.active_set(t), vec![0]);
            assert_eq!(s.delay(t, 0, 0), t - 1);
        }
        let s = Schedule::synchronous(2, 2).unwrap();
        assert_eq!(s.active_set(1), vec![0, 1]);
        assert_eq!(s.active_set(2), vec![0, 1]);
        assert!(s.check_admissible_prefix().is_ok());
        assert!(Schedule::synchronous(0, 2).is_err());
    }

    #[test]
    fn degenerate_sampling_is_synchronous() {
        let params = SampleParams {
            activation_prob: 1.0,
            max_staleness: 1,
            fairness_window: 1,
        };
        let sampled = Schedule::sample(3, 10, 99, params).unwrap();
        assert_eq!(sampled, Schedule::synchronous(3, 10).unwrap());
    }

    #[test]
    fn sampling_is_deterministic_and_admissible() {
        let params = SampleParams {
            activation_prob: 0.5,
            max_staleness: 5,
            fairness_window: 8,
        };
        let a = Schedule::sample(2, 50, 7, params).unwrap();
        let b = Schedule::sample(2, 50, 7, params).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.check_admissible_prefix(), Ok(()));
        assert_ne!(a, Schedule::sample(2, 50, 8, params).unwrap());
    }

    #[test]
    fn sampling_rejects_bad_parameters() {
        let bad = [
            SampleParams {
                activation_prob: 0.0,
                max_staleness: 5,
                fairness_window: 8,
            },
            SampleParams {
                activation_prob: 1.5,
                max_staleness: 5,
                fairness_window: 8,
            },
            SampleParams {
                activation_prob: 0.5,
                max_staleness: 0,
                fairness_window: 8,
            },
            SampleParams {
                activation_prob: 0.25,
                max_staleness: 5,
                fairness_window: 3,
            },
        ];
        for p in bad {
            assert!(
                matches!(
                    Schedule::sample(2, 20, 1, p),
                    Err(ScheduleError::InvalidParameters(_))
                ),
                "{p:?}"
            );
        }
    }

    #[test]
    fn causality_violation() {
        let bounds = AdmissibilityBounds {
            fairness_window: 4,
            max_staleness: 4,
        };
        let s = Schedule::from_parts(
            2,
            vec![vec![0, 1]; 4],
            |t, i, j| if (t, i, j) == (3, 0, 1) { 3 } else { t - 1 },
            bounds,
        )
        .unwrap();
        assert_eq!(
            s.check_admissible_prefix(),
            Err(ScheduleViolation::Causality {
                t: 3,
                i: 0,
                j: 1,
                source: 3
            })
        );
    }

    #[test]
    fn fairness_violation() {
        let bounds = AdmissibilityBounds {
            fairness_window: 3,
            max_staleness: 1,
        };
        let s = Schedule::from_parts(2, vec![vec![0]; 3], |t, _, _| t - 1, bounds).unwrap();
        assert_eq!(
            s.check_admissible_prefix(),
            Err(ScheduleViolation::Fairness {
                processor: 1,
                start: 1
            })
        );
    }

    #[test]
    fn staleness_violation() {
        let bounds = AdmissibilityBounds {
            fairness_window: 1,
            max_staleness: 2,
        };
        let s = Schedule::from_parts(
            1,
            vec![vec![0]; 5],
            |t, _, _| if t == 5 { 1 } else { t - 1 },
            bounds,
        )
        .unwrap();
        assert_eq!(
            s.check_admissible_prefix(),
            Err(ScheduleViolation::Staleness {
                t: 5,
                i: 0,
                j: 0,
                age: 4
            })
        );
    }

    #[test]
    fn file_round_trip() {
        let s = Schedule::sample(3, 12, 4, SampleParams::default()).unwrap();
        let json = serde_json::to_string(&s.to_file()).unwrap();
        let back: ScheduleFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back.into_schedule().unwrap(), s);
    }

    #[test]
    fn file_defaults() {
        let f: ScheduleFile =
            serde_json::from_str(r#"{"horizon":2,"activations":[[0,1],[1]],"delays":[[2,1,0,0]]}"#)
                .unwrap();
        let s = f.into_schedule().unwrap();
        assert_eq!(s.processors(), 2);
        assert_eq!(s.delay(2, 1, 0), 0);
        assert_eq!(s.delay(2, 1, 1), 1);
        assert_eq!(s.delay(1, 0, 0), 0);
        assert!(s.check_admissible_prefix().is_ok());
    }
}

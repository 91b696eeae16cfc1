use std::collections::HashMap;
use std::fmt::Debug;
use std::hash::Hash;

use thiserror::Error;

use super::operator::DecomposedOperator;
use super::schedule::Schedule;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IterationError {
    #[error("schedule has {schedule} processors but the operator has {operator}")]
    ProcessorMismatch { operator: usize, schedule: usize },
    #[error("start state is not in the operator's product domain")]
    StartOutsideDomain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    /// The state equals its final value from tick `at` on.
    Converged { at: usize },
    /// `x(start + period) = x(start)` without a fixed point.
    Cycle { start: usize, period: usize },
    /// Ran out of steps (or schedule) without a convergence certificate.
    HorizonExhausted,
}

/// States `x(0), x(1), ...` of a run together with the activations of each tick.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trajectory<V> {
    states: Vec<Vec<V>>,
    activations: Vec<Vec<bool>>,
    status: RunStatus,
}

impl<V: Clone> Trajectory<V> {
    pub fn states(&self) -> &[Vec<V>] {
        &self.states
    }

    /// `x(t)`.
    pub fn state(&self, t: usize) -> &[V] {
        &self.states[t]
    }

    /// `x_i(t)` for every recorded tick.
    pub fn history(&self, i: usize) -> Vec<V> {
        self.states.iter().map(|s| s[i].clone()).collect()
    }

    pub fn final_state(&self) -> &[V] {
        self.states
            .last()
            .expect("a trajectory holds at least its start state")
    }

    /// Number of ticks after the start state.
    pub fn ticks(&self) -> usize {
        self.states.len() - 1
    }

    pub fn activated(&self, t: usize, i: usize) -> bool {
        self.activations[t - 1][i]
    }

    pub fn status(&self) -> RunStatus {
        self.status
    }

    pub fn converged_at(&self) -> Option<usize> {
        match self.status {
            RunStatus::Converged { at } => Some(at),
            _ => None,
        }
    }
}

/// Synchronous iteration `x(t) = σ(x(t - 1))`.
///
/// Stops at the first repeated state: a repeat of the previous state is a
/// fixed point, any earlier repeat is a cycle.
pub fn run_sync<V>(
    op: &DecomposedOperator<V>,
    start: &[V],
    max_steps: usize,
) -> Result<Trajectory<V>, IterationError>
where
    V: Clone + Eq + Hash + Debug + Send + Sync + 'static,
{
    if !op.contains(start) {
        return Err(IterationError::StartOutsideDomain);
    }
    let k = op.processor_count();
    let mut states = vec![start.to_vec()];
    let mut seen: HashMap<Vec<V>, usize> = HashMap::from([(start.to_vec(), 0)]);
    let mut status = RunStatus::HorizonExhausted;
    for t in 1..=max_steps {
        let next = op.apply(&states[t - 1]);
        let previous = seen.get(&next).copied();
        states.push(next.clone());
        match previous {
            Some(s) if s == t - 1 => {
                status = RunStatus::Converged { at: s };
                break;
            }
            Some(s) => {
                status = RunStatus::Cycle {
                    start: s,
                    period: t - s,
                };
                break;
            }
            None => {
                seen.insert(next, t);
            }
        }
    }
    let activations = vec![vec![true; k]; states.len() - 1];
    Ok(Trajectory {
        states,
        activations,
        status,
    })
}

/// Asynchronous iteration driven by `schedule`.
///
/// An inactive processor keeps its value; an active one applies `σ_i` to the
/// values `x_j(β(t, i, j))`. The run is declared converged at the last tick
/// `c` where the state changed once `horizon - c >= B + W`: after `B` quiet
/// ticks every read sees the final state, and within `W` more ticks every
/// processor has recomputed from it.
pub fn run_async<V>(
    op: &DecomposedOperator<V>,
    start: &[V],
    schedule: &Schedule,
) -> Result<Trajectory<V>, IterationError>
where
    V: Clone + Eq + Hash + Debug + Send + Sync + 'static,
{
    let k = op.processor_count();
    if schedule.processors() != k {
        return Err(IterationError::ProcessorMismatch {
            operator: k,
            schedule: schedule.processors(),
        });
    }
    if !op.contains(start) {
        return Err(IterationError::StartOutsideDomain);
    }
    let horizon = schedule.horizon();
    let mut states: Vec<Vec<V>> = Vec::with_capacity(horizon + 1);
    states.push(start.to_vec());
    let mut activations = Vec::with_capacity(horizon);
    let mut last_change = 0;
    let mut args: Vec<V> = start.to_vec();
    for t in 1..=horizon {
        let mut next = states[t - 1].clone();
        let mut active = vec![false; k];
        for (i, slot) in next.iter_mut().enumerate() {
            if !schedule.is_active(t, i) {
                continue;
            }
            active[i] = true;
            for (j, a) in args.iter_mut().enumerate() {
                *a = states[schedule.delay(t, i, j)][j].clone();
            }
            *slot = op.component(i, &args);
        }
        if next != states[t - 1] {
            last_change = t;
        }
        states.push(next);
        activations.push(active);
    }
    let b = schedule.bounds();
    let status = if horizon - last_change >= b.max_staleness + b.fairness_window {
        RunStatus::Converged { at: last_change }
    } else {
        RunStatus::HorizonExhausted
    };
    Ok(Trajectory {
        states,
        activations,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iteration::schedule::SampleParams;

    fn swap() -> DecomposedOperator<u8> {
        DecomposedOperator::from_map(vec![vec![0, 1], vec![0, 1]], |x: &[u8]| vec![x[1], x[0]])
    }

    fn constant() -> DecomposedOperator<u8> {
        DecomposedOperator::from_map(vec![vec![0, 1], vec![0, 1]], |_: &[u8]| vec![1, 0])
    }

    #[test]
    fn fixed_start_converges_at_zero() {
        let t = run_sync(&constant(), &[1, 0], 10).unwrap();
        assert_eq!(t.converged_at(), Some(0));
        assert_eq!(t.final_state(), &[1, 0]);
    }

    #[test]
    fn swap_cycles_with_period_two() {
        let t = run_sync(&swap(), &[0, 1], 10).unwrap();
        assert_eq!(
            t.status(),
            RunStatus::Cycle {
                start: 0,
                period: 2
            }
        );
        assert_eq!(t.state(1), &[1, 0]);
    }

    #[test]
    fn step_budget_exhausted() {
        let t = run_sync(&swap(), &[0, 1], 1).unwrap();
        assert_eq!(t.status(), RunStatus::HorizonExhausted);
        let t = run_sync(&swap(), &[0, 1], 0).unwrap();
        assert_eq!(t.ticks(), 0);
    }

    #[test]
    fn identity_is_constant_under_any_schedule() {
        let id =
            DecomposedOperator::from_map(vec![vec![0u8, 1], vec![0, 1]], |x: &[u8]| x.to_vec());
        let s = Schedule::sample(2, 40, 3, SampleParams::default()).unwrap();
        let t = run_async(&id, &[1, 0], &s).unwrap();
        assert!(t.states().iter().all(|x| x == &[1, 0]));
        assert_eq!(t.converged_at(), Some(0));
    }

    #[test]
    fn synchronous_schedule_reproduces_run_sync() {
        let op = constant();
        for start in op.states() {
            let sync = run_sync(&op, &start, 10).unwrap();
            let asy = run_async(&op, &start, &Schedule::synchronous(2, 10).unwrap()).unwrap();
            for (t, s) in sync.states().iter().enumerate() {
                assert_eq!(s, asy.state(t));
            }
            assert_eq!(asy.converged_at(), sync.converged_at());
        }
    }

    #[test]
    fn mismatched_schedule_rejected() {
        let s = Schedule::synchronous(3, 5).unwrap();
        assert_eq!(
            run_async(&swap(), &[0, 0], &s).unwrap_err(),
            IterationError::ProcessorMismatch {
                operator: 2,
                schedule: 3
            }
        );
        assert_eq!(
            run_sync(&swap(), &[0, 2], 3).unwrap_err(),
            IterationError::StartOutsideDomain
        );
    }

    #[test]
    fn short_horizon_is_not_certified() {
        let s = Schedule::synchronous(2, 2).unwrap();
        let t = run_async(&constant(), &[0, 0], &s).unwrap();
        assert_eq!(t.status(), RunStatus::HorizonExhausted);
        assert_eq!(t.final_state(), &[1, 0]);
    }
}

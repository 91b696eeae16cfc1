use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{sigma_step, PathSet, RoutingError, SppInstance};
use crate::iteration::{
    run_async, run_sync, DecomposedOperator, RunStatus, SampleParams, Schedule, Trajectory,
};

/// How the path universe is split among processors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Granularity {
    /// One processor per node, owning the paths it originates.
    PerNode,
    /// One processor per (source, next hop); the trivial path is its own group.
    #[serde(rename = "per-source-destination-nexthop")]
    PerNextHop,
    /// One processor per permitted path, holding either nothing or that path.
    PerPath,
}

impl Granularity {
    pub const ALL: [Granularity; 3] = [
        Granularity::PerNode,
        Granularity::PerNextHop,
        Granularity::PerPath,
    ];
}

impl FromStr for Granularity {
    type Err = RoutingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "per-node" => Ok(Granularity::PerNode),
            "per-source-destination-nexthop" | "per-nexthop" => Ok(Granularity::PerNextHop),
            "per-path" => Ok(Granularity::PerPath),
            other => Err(RoutingError::UnknownGranularity(other.to_string())),
        }
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Granularity::PerNode => "per-node",
            Granularity::PerNextHop => "per-source-destination-nexthop",
            Granularity::PerPath => "per-path",
        })
    }
}

/// The routing step split into processors, one per group of paths.
#[derive(Clone, Debug)]
pub struct RoutingOperator {
    pub operator: DecomposedOperator<PathSet>,
    pub groups: Vec<PathSet>,
    pub labels: Vec<String>,
}

impl RoutingOperator {
    /// Splits a global state into per-processor values.
    pub fn split(&self, x: PathSet) -> Vec<PathSet> {
        self.groups.iter().map(|&g| x.intersection(g)).collect()
    }

    pub fn join(values: &[PathSet]) -> PathSet {
        values.iter().fold(PathSet::EMPTY, |acc, &v| acc.union(v))
    }
}

pub fn decompose(instance: &SppInstance, granularity: Granularity) -> RoutingOperator {
    let permitted = instance.permitted();
    let mut groups: Vec<PathSet> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    match granularity {
        Granularity::PerNode => {
            for v in 0..instance.node_count() {
                groups.push(instance.permitted_at(v));
                labels.push(instance.nodes()[v].clone());
            }
        }
        Granularity::PerNextHop => {
            let mut keys: Vec<(usize, Option<usize>)> = Vec::new();
            for p in permitted.iter() {
                let path = instance.path(p);
                let key = (path[0], path.get(1).copied());
                let g = match keys.iter().position(|k| *k == key) {
                    Some(g) => g,
                    None => {
                        keys.push(key);
                        groups.push(PathSet::EMPTY);
                        labels.push(match key.1 {
                            Some(h) => {
                                format!("{}>{}", instance.nodes()[key.0], instance.nodes()[h])
                            }
                            None => instance.nodes()[key.0].clone(),
                        });
                        keys.len() - 1
                    }
                };
                groups[g].insert(p);
            }
        }
        Granularity::PerPath => {
            for p in permitted.iter() {
                groups.push(PathSet::singleton(p));
                labels.push(instance.format_path(p));
            }
        }
    }
    let domains: Vec<Vec<PathSet>> = groups.iter().map(|g| g.subsets().collect()).collect();
    let shared = Arc::new(instance.clone());
    let components = groups
        .iter()
        .map(|&g| {
            let inst = Arc::clone(&shared);
            Arc::new(move |x: &[PathSet]| {
                sigma_step(&inst, RoutingOperator::join(x)).intersection(g)
            }) as Arc<dyn Fn(&[PathSet]) -> PathSet + Send + Sync>
        })
        .collect();
    RoutingOperator {
        operator: DecomposedOperator::from_components(domains, components),
        groups,
        labels,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMode {
    Sync,
    Async,
}

impl FromStr for SolveMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sync" => Ok(SolveMode::Sync),
            "async" => Ok(SolveMode::Async),
            other => Err(format!("unknown mode {other:?} (expected sync or async)")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub mode: SolveMode,
    pub granularity: Granularity,
    pub horizon: usize,
    /// Run `i` of an async campaign uses seed `seed + i`.
    pub seed: u64,
    pub runs: usize,
    pub params: SampleParams,
    /// Solve even when the preferences are not strictly inflationary.
    pub force: bool,
    /// Defaults to the empty state.
    pub start: Option<PathSet>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            mode: SolveMode::Sync,
            granularity: Granularity::PerNode,
            horizon: 200,
            seed: 0,
            runs: 1,
            params: SampleParams::default(),
            force: false,
            start: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AsyncRunSummary {
    pub seed: u64,
    pub converged_at: Option<usize>,
    pub final_state: PathSet,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub inflationary: bool,
    /// The synchronous reference run, recorded per processor.
    pub sync: Trajectory<PathSet>,
    /// Fixed point reached by the synchronous run, if any.
    pub fixed_point: Option<PathSet>,
    /// Every node's set equals the minimal permitted extensions of its neighbours' sets.
    pub stable: bool,
    pub async_runs: Vec<AsyncRunSummary>,
}

impl SolveReport {
    pub fn sync_status(&self) -> RunStatus {
        self.sync.status()
    }

    /// Async runs that converged to the synchronous fixed point.
    pub fn async_agreements(&self) -> usize {
        self.async_runs
            .iter()
            .filter(|r| r.converged_at.is_some() && Some(r.final_state) == self.fixed_point)
            .count()
    }
}

pub fn solve(instance: &SppInstance, options: &SolveOptions) -> Result<SolveReport, RoutingError> {
    let inflation = instance.check_strictly_inflationary();
    if let Err(failure) = &inflation {
        if !options.force {
            let (i, j) = failure.arc;
            return Err(RoutingError::NotInflationary(format!(
                "{} is not strictly preferred to its extension {} over arc ({} {})",
                instance.format_path(failure.path),
                instance.format_path(failure.extension),
                instance.nodes()[i],
                instance.nodes()[j],
            )));
        }
    }
    let start = options.start.unwrap_or(PathSet::EMPTY);
    if !instance.is_valid_state(start) {
        return Err(RoutingError::Invalid(
            "start state holds paths that are not permitted".into(),
        ));
    }
    let routing = decompose(instance, options.granularity);
    let start_vec = routing.split(start);
    let sync = run_sync(&routing.operator, &start_vec, options.horizon)?;
    let fixed_point = match sync.status() {
        RunStatus::Converged { .. } => Some(RoutingOperator::join(sync.final_state())),
        _ => None,
    };
    let stable = fixed_point.is_some_and(|x| sigma_step(instance, x) == x);
    let mut async_runs = Vec::new();
    if options.mode == SolveMode::Async {
        for r in 0..options.runs {
            let seed = options.seed + r as u64;
            let schedule =
                Schedule::sample(routing.groups.len(), options.horizon, seed, options.params)?;
            let t = run_async(&routing.operator, &start_vec, &schedule)?;
            async_runs.push(AsyncRunSummary {
                seed,
                converged_at: t.converged_at(),
                final_state: RoutingOperator::join(t.final_state()),
            });
        }
    }
    Ok(SolveReport {
        inflationary: inflation.is_ok(),
        sync,
        fixed_point,
        stable,
        async_runs,
    })
}

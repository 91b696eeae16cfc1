use super::{PathSet, RoutingError, SppInstance, MAX_EXHAUSTIVE_PATHS};

/// One synchronous step on the global path state.
///
/// The destination always holds `{ε}`; every other node holds the minimal
/// elements of its candidate set `{(i j)p : (i, j) ∈ E, p ∈ x_j}`, keeping
/// only simple, permitted extensions. Ties stay in the set.
pub fn sigma_step(instance: &SppInstance, state: PathSet) -> PathSet {
    let mut candidates = vec![PathSet::EMPTY; instance.node_count()];
    for p in state.iter() {
        for &(i, e) in instance.extensions(p) {
            candidates[i].insert(e);
        }
    }
    let mut out = PathSet::singleton(instance.epsilon());
    for (i, cand) in candidates.into_iter().enumerate() {
        if i == instance.dest() {
            continue;
        }
        for c in cand.iter() {
            if !cand.iter().any(|o| instance.strictly_preferred(o, c)) {
                out.insert(c);
            }
        }
    }
    out
}

/// `max{h(p) : p ∈ m △ n}`, or 0 when the states agree.
pub fn state_distance(heights: &[u64], m: PathSet, n: PathSet) -> u64 {
    m.symmetric_difference(n)
        .iter()
        .map(|p| heights[p])
        .max()
        .unwrap_or(0)
}

/// All valid global states (subsets of the permitted paths).
pub fn state_space(instance: &SppInstance) -> Result<Vec<PathSet>, RoutingError> {
    let paths = instance.permitted().len();
    if paths > MAX_EXHAUSTIVE_PATHS {
        return Err(RoutingError::TooLarge {
            paths,
            limit: MAX_EXHAUSTIVE_PATHS,
        });
    }
    Ok(instance.permitted().subsets().collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrictContractionReport {
    pub pass: bool,
    pub pairs_checked: u64,
    /// Distinct states `m, n` with `d(σm, σn) >= d(m, n)`.
    pub counterexample: Option<(PathSet, PathSet)>,
}

/// Checks `d(σm, σn) < d(m, n)` over every pair of distinct states.
pub fn verify_strict_contraction(
    instance: &SppInstance,
) -> Result<StrictContractionReport, RoutingError> {
    let states = state_space(instance)?;
    let heights = instance.path_height();
    let images: Vec<PathSet> = states.iter().map(|&s| sigma_step(instance, s)).collect();
    let mut pairs = 0;
    for a in 0..states.len() {
        for b in a + 1..states.len() {
            pairs += 1;
            if state_distance(&heights, images[a], images[b])
                >= state_distance(&heights, states[a], states[b])
            {
                return Ok(StrictContractionReport {
                    pass: false,
                    pairs_checked: pairs,
                    counterexample: Some((states[a], states[b])),
                });
            }
        }
    }
    Ok(StrictContractionReport {
        pass: true,
        pairs_checked: pairs,
        counterexample: None,
    })
}

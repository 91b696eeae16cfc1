//! Certifying and refuting asynchronously contracting operators.
//!
//! An operator on a finite product domain is an ACO exactly when there is a
//! chain of boxes `{m*} = C_0 ⊂ C_1 ⊂ ... ⊂ C_k = M` with `σ(C_{r+1}) ⊆ C_r`
//! and `σ(C_0) ⊆ C_0`. Such chains are produced from balls of a suitable
//! ultrametric, turned back into an ultrametric, or found by exhaustive search.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Debug;
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::iteration::{
    run_async, DecomposedOperator, IterationError, SampleParams, Schedule, ScheduleError,
};
use crate::ultrametric::{
    classify_indexed, ContractionClass, FiniteUltrametricSpace, UltrametricError,
};

/// Candidate-box limit for [`search_box_sequence`] and [`search_ultrametric`].
pub const MAX_CANDIDATE_BOXES: usize = 4096;

/// State limit for [`search_ultrametric`], which enumerates weak orders of the states.
pub const MAX_ULTRAMETRIC_SEARCH_STATES: usize = 8;

#[derive(Debug, Error)]
pub enum AcoError {
    #[error("malformed box sequence: {0}")]
    MalformedBox(String),
    #[error("boxes are not nested: {0}")]
    NotNested(String),
    #[error("operator is {class} under the given ultrametric ({witness})")]
    NotStrictOnOrbits {
        class: ContractionClass,
        witness: String,
    },
    #[error("operator has {0} fixed points; exactly one is required")]
    FixedPoints(usize),
    #[error("ball of radius {0} about the fixed point is not a box")]
    BallNotBox(String),
    #[error("space does not match the operator's domain: {0}")]
    DomainMismatch(String),
    #[error("{candidates} candidate boxes exceed the search limit of {limit}")]
    TooLarge { candidates: usize, limit: usize },
    #[error(transparent)]
    Ultrametric(#[from] UltrametricError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Iteration(#[from] IterationError),
}

/// `C_0, ..., C_k`, each box a list of per-component value sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxSequence<V: Ord> {
    pub boxes: Vec<Vec<BTreeSet<V>>>,
    pub fixed_point: Vec<V>,
}

impl<V: Ord + Clone> BoxSequence<V> {
    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn contains(&self, r: usize, state: &[V]) -> bool {
        let b = &self.boxes[r];
        b.len() == state.len() && b.iter().zip(state).all(|(s, v)| s.contains(v))
    }

    /// Index of the innermost box holding `state`.
    pub fn level(&self, state: &[V]) -> Option<usize> {
        (0..self.boxes.len()).find(|&r| self.contains(r, state))
    }

    /// Every state of `C_r`, last component fastest.
    pub fn members(&self, r: usize) -> Vec<Vec<V>> {
        let factors: Vec<Vec<V>> = self.boxes[r]
            .iter()
            .map(|s| s.iter().cloned().collect())
            .collect();
        crate::ultrametric::cartesian(&factors)
    }
}

/// A failed condition of the box-sequence theorem.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoxViolation<V> {
    /// `C_0` is not `{m*}`.
    NotSingleton,
    /// `C_k` is not the whole domain.
    NotWhole,
    /// `C_r ⊂ C_{r+1}` fails.
    NotNested { r: usize },
    /// `σ(state)` leaves `C_{r-1}` although `state ∈ C_r` (`C_0` for `r = 0`).
    Escapes { r: usize, state: Vec<V> },
}

impl<V> BoxViolation<V> {
    /// Theorem condition number, 1 to 4.
    pub fn condition(&self) -> u8 {
        match self {
            BoxViolation::NotSingleton => 1,
            BoxViolation::NotWhole => 2,
            BoxViolation::NotNested { .. } => 3,
            BoxViolation::Escapes { .. } => 4,
        }
    }
}

fn check_well_formed<V>(domains: &[Vec<V>], bs: &BoxSequence<V>) -> Result<(), AcoError>
where
    V: Ord + Clone + Debug + PartialEq,
{
    if bs.boxes.is_empty() {
        return Err(AcoError::MalformedBox("no boxes".into()));
    }
    if bs.fixed_point.len() != domains.len()
        || !bs
            .fixed_point
            .iter()
            .zip(domains)
            .all(|(v, d)| d.contains(v))
    {
        return Err(AcoError::MalformedBox(format!(
            "fixed point {:?} is outside the domain",
            bs.fixed_point
        )));
    }
    for (r, b) in bs.boxes.iter().enumerate() {
        if b.len() != domains.len() {
            return Err(AcoError::MalformedBox(format!(
                "box {r} has {} components, expected {}",
                b.len(),
                domains.len()
            )));
        }
        for (i, (s, d)) in b.iter().zip(domains).enumerate() {
            if s.is_empty() {
                return Err(AcoError::MalformedBox(format!(
                    "box {r} has an empty component {i}"
                )));
            }
            if let Some(v) = s.iter().find(|v| !d.contains(v)) {
                return Err(AcoError::MalformedBox(format!(
                    "box {r} component {i} holds {v:?} outside the domain"
                )));
            }
        }
    }
    Ok(())
}

/// Conditions 1 to 3, which do not involve the operator.
fn check_shape<V: Ord + Clone>(domains: &[Vec<V>], bs: &BoxSequence<V>) -> Option<BoxViolation<V>> {
    let c0 = &bs.boxes[0];
    if !c0
        .iter()
        .zip(&bs.fixed_point)
        .all(|(s, v)| s.len() == 1 && s.contains(v))
    {
        return Some(BoxViolation::NotSingleton);
    }
    let last = bs.boxes.last().expect("nonempty");
    if !last
        .iter()
        .zip(domains)
        .all(|(s, d)| d.iter().all(|v| s.contains(v)))
    {
        return Some(BoxViolation::NotWhole);
    }
    for r in 0..bs.boxes.len() - 1 {
        let (a, b) = (&bs.boxes[r], &bs.boxes[r + 1]);
        if !a.iter().zip(b).all(|(x, y)| x.is_subset(y)) || a == b {
            return Some(BoxViolation::NotNested { r });
        }
    }
    None
}

/// Checks the four conditions exhaustively; `Ok(None)` means all hold.
pub fn verify_box_sequence<V>(
    op: &DecomposedOperator<V>,
    bs: &BoxSequence<V>,
) -> Result<Option<BoxViolation<V>>, AcoError>
where
    V: Clone + Eq + Hash + Debug + Ord + Send + Sync + 'static,
{
    check_well_formed(op.domains(), bs)?;
    if let Some(v) = check_shape(op.domains(), bs) {
        return Ok(Some(v));
    }
    for r in 0..bs.boxes.len() {
        let target = r.saturating_sub(1);
        for state in bs.members(r) {
            if !bs.contains(target, &op.apply(&state)) {
                return Ok(Some(BoxViolation::Escapes { r, state }));
            }
        }
    }
    Ok(None)
}

/// Whether a set of states is the product of its projections.
fn factor_as_box<V: Ord + Clone>(members: &[Vec<V>], dimension: usize) -> Option<Vec<BTreeSet<V>>> {
    let factors: Vec<BTreeSet<V>> = (0..dimension)
        .map(|i| members.iter().map(|s| s[i].clone()).collect())
        .collect();
    let volume: usize = factors.iter().map(BTreeSet::len).product();
    (volume == members.len()).then_some(factors)
}

fn witness_text<E: Debug>(w: &Option<crate::ultrametric::ContractionWitness<E>>) -> String {
    match w {
        Some(w) => format!("{w:?}"),
        None => "no witness".into(),
    }
}

/// Balls about the fixed point, deduplicated and ordered by radius.
///
/// Requires the operator to be a contraction strict on orbits with a single
/// fixed point, and every such ball to be a box of the product domain.
pub fn boxes_from_ultrametric<V>(
    space: &FiniteUltrametricSpace<Vec<V>>,
    op: &DecomposedOperator<V>,
) -> Result<BoxSequence<V>, AcoError>
where
    V: Clone + Eq + Hash + Debug + Ord + Send + Sync + 'static,
{
    if space.len() != op.state_count() || !space.elements().iter().all(|s| op.contains(s)) {
        return Err(AcoError::DomainMismatch(format!(
            "{} points against {} states",
            space.len(),
            op.state_count()
        )));
    }
    let map: Vec<usize> = space
        .elements()
        .iter()
        .map(|s| space.index_of(&op.apply(s)).expect("domain checked above"))
        .collect();
    let (class, witness) = classify_indexed(space, &map);
    if !class.strict_on_orbits() {
        let witness = witness.map(|w| reindex_witness(w, space.elements()));
        return Err(AcoError::NotStrictOnOrbits {
            class,
            witness: witness_text(&witness),
        });
    }
    let fixed: Vec<usize> = (0..map.len()).filter(|&i| map[i] == i).collect();
    if fixed.len() != 1 {
        return Err(AcoError::FixedPoints(fixed.len()));
    }
    let star = fixed[0];
    // Orbits reach the fixed point within |M| steps.
    let mut x = 0;
    for _ in 0..space.len() {
        x = map[x];
    }
    debug_assert_eq!(x, star);
    let center = &space.elements()[star];
    let mut boxes: Vec<Vec<BTreeSet<V>>> = Vec::new();
    for r in space.scale().radii() {
        let members = space.ball(center, r)?.members();
        let factors = factor_as_box(&members, op.processor_count())
            .ok_or_else(|| AcoError::BallNotBox(space.label_of(r).to_string()))?;
        if boxes.last() != Some(&factors) {
            boxes.push(factors);
        }
    }
    Ok(BoxSequence {
        boxes,
        fixed_point: center.clone(),
    })
}

fn reindex_witness<E: Clone>(
    w: crate::ultrametric::ContractionWitness<usize>,
    el: &[E],
) -> crate::ultrametric::ContractionWitness<E> {
    use crate::ultrametric::ContractionWitness as W;
    match w {
        W::Expands { m, n } => W::Expands {
            m: el[m].clone(),
            n: el[n].clone(),
        },
        W::OrbitNotStrict { m } => W::OrbitNotStrict { m: el[m].clone() },
        W::NotStrict { m, n } => W::NotStrict {
            m: el[m].clone(),
            n: el[n].clone(),
        },
    }
}

/// `d_C(m, n) = max(C(m), C(n))` for `m != n`, with `C(m)` the index of the
/// innermost box holding `m`. Radii are labelled `"0"` to `"k"`.
pub fn ultrametric_from_boxes<V>(
    bs: &BoxSequence<V>,
) -> Result<FiniteUltrametricSpace<Vec<V>>, AcoError>
where
    V: Clone + Eq + Hash + Debug + Ord,
{
    let last = bs
        .boxes
        .last()
        .ok_or_else(|| AcoError::MalformedBox("no boxes".into()))?;
    let domains: Vec<Vec<V>> = last.iter().map(|s| s.iter().cloned().collect()).collect();
    check_well_formed(&domains, bs)?;
    if let Some(v) = check_shape(&domains, bs) {
        return Err(AcoError::NotNested(format!("{v:?}")));
    }
    let states = bs.members(bs.boxes.len() - 1);
    let level: HashMap<Vec<V>, usize> = states
        .iter()
        .map(|s| (s.clone(), bs.level(s).expect("inside C_k")))
        .collect();
    let labels = (0..bs.boxes.len()).map(|r| r.to_string());
    let scale = crate::ultrametric::RadiusScale::new(labels)?;
    let radii: Vec<_> = scale.radii().collect();
    let mut entries = Vec::new();
    for (a, m) in states.iter().enumerate() {
        for n in &states[a + 1..] {
            entries.push((m.clone(), n.clone(), radii[level[m].max(level[n])]));
        }
    }
    Ok(FiniteUltrametricSpace::from_entries(
        states, scale, entries,
    )?)
}

/// The operator's domain as indices, for the exhaustive searches.
struct IndexedOperator<V> {
    domains: Vec<Vec<V>>,
    states: Vec<Vec<V>>,
    /// `image[s]`: index of `σ(states[s])`.
    image: Vec<usize>,
}

impl<V> IndexedOperator<V>
where
    V: Clone + Eq + Hash + Debug + Ord + Send + Sync + 'static,
{
    fn new(op: &DecomposedOperator<V>) -> Self {
        let states = op.states();
        let index: HashMap<&Vec<V>, usize> =
            states.iter().enumerate().map(|(k, s)| (s, k)).collect();
        let image = states.iter().map(|s| index[&op.apply(s)]).collect();
        Self {
            domains: op.domains().to_vec(),
            states,
            image,
        }
    }

    fn fixed_points(&self) -> Vec<usize> {
        (0..self.states.len())
            .filter(|&s| self.image[s] == s)
            .collect()
    }
}

fn candidate_box_count(domains: &[Vec<impl Sized>]) -> usize {
    domains.iter().fold(1usize, |acc, d| {
        let subsets = u32::try_from(d.len())
            .ok()
            .and_then(|n| 1usize.checked_shl(n))
            .map_or(usize::MAX, |p| p - 1);
        acc.saturating_mul(subsets)
    })
}

/// What an exhaustive search examined.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchTranscript {
    pub candidate_boxes: usize,
    pub fixed_points: usize,
    /// Chain prefixes explored before success or exhaustion.
    pub boxes_explored: usize,
}

/// Exhaustive depth-first search for a box sequence.
///
/// Starts from each singleton fixed point and extends chains upward; a box
/// from which `M` cannot be reached is never revisited.
pub fn search_box_sequence<V>(
    op: &DecomposedOperator<V>,
) -> Result<(Option<BoxSequence<V>>, SearchTranscript), AcoError>
where
    V: Clone + Eq + Hash + Debug + Ord + Send + Sync + 'static,
{
    let candidates = candidate_box_count(op.domains());
    if candidates > MAX_CANDIDATE_BOXES || op.state_count() > 128 {
        return Err(AcoError::TooLarge {
            candidates,
            limit: MAX_CANDIDATE_BOXES,
        });
    }
    let ix = IndexedOperator::new(op);
    let n = ix.states.len();
    // Box = per-component masks over domain positions; members as a state bitmask.
    let positions: Vec<Vec<usize>> = ix
        .states
        .iter()
        .map(|s| {
            s.iter()
                .zip(&ix.domains)
                .map(|(v, d)| d.iter().position(|x| x == v).expect("in domain"))
                .collect()
        })
        .collect();
    let mut boxes: Vec<(Vec<u64>, u128)> = Vec::with_capacity(candidates);
    let mut masks: Vec<Vec<u64>> = vec![Vec::new()];
    for d in &ix.domains {
        let mut next = Vec::new();
        for prefix in &masks {
            for m in 1..(1u64 << d.len()) {
                let mut v = prefix.clone();
                v.push(m);
                next.push(v);
            }
        }
        masks = next;
    }
    for m in masks {
        let members = (0..n)
            .filter(|&s| {
                positions[s]
                    .iter()
                    .zip(&m)
                    .all(|(&p, &mask)| mask >> p & 1 == 1)
            })
            .fold(0u128, |acc, s| acc | 1 << s);
        boxes.push((m, members));
    }
    // Larger boxes first, so chains come out short.
    let mut order: Vec<usize> = (0..boxes.len()).collect();
    order.sort_by_key(|&b| (std::cmp::Reverse(boxes[b].1.count_ones()), b));
    let full: u128 = if n == 128 {
        u128::MAX
    } else {
        (1u128 << n) - 1
    };
    let preimage = |set: u128| {
        (0..n)
            .filter(|&s| set >> ix.image[s] & 1 == 1)
            .fold(0u128, |acc, s| acc | 1 << s)
    };

    let fixed = ix.fixed_points();
    let mut transcript = SearchTranscript {
        candidate_boxes: candidates,
        fixed_points: fixed.len(),
        boxes_explored: 0,
    };
    let mut dead = vec![false; boxes.len()];
    let by_members: HashMap<u128, usize> =
        boxes.iter().enumerate().map(|(k, b)| (b.1, k)).collect();

    fn extend(
        cur: usize,
        chain: &mut Vec<usize>,
        boxes: &[(Vec<u64>, u128)],
        order: &[usize],
        full: u128,
        dead: &mut [bool],
        explored: &mut usize,
        preimage: &dyn Fn(u128) -> u128,
    ) -> bool {
        *explored += 1;
        chain.push(cur);
        let members = boxes[cur].1;
        if members == full {
            return true;
        }
        let allowed = preimage(members);
        for &cand in order {
            let c = boxes[cand].1;
            if dead[cand] || c & !allowed != 0 || c & members != members || c == members {
                continue;
            }
            if extend(cand, chain, boxes, order, full, dead, explored, preimage) {
                return true;
            }
        }
        chain.pop();
        dead[cur] = true;
        false
    }

    for &m in &fixed {
        let start = by_members[&(1u128 << m)];
        let mut chain = Vec::new();
        if extend(
            start,
            &mut chain,
            &boxes,
            &order,
            full,
            &mut dead,
            &mut transcript.boxes_explored,
            &preimage,
        ) {
            let seq = chain
                .iter()
                .map(|&b| {
                    boxes[b]
                        .0
                        .iter()
                        .zip(&ix.domains)
                        .map(|(&mask, d)| {
                            (0..d.len())
                                .filter(|&p| mask >> p & 1 == 1)
                                .map(|p| d[p].clone())
                                .collect()
                        })
                        .collect()
                })
                .collect();
            return Ok((
                Some(BoxSequence {
                    boxes: seq,
                    fixed_point: ix.states[m].clone(),
                }),
                transcript,
            ));
        }
    }
    Ok((None, transcript))
}

/// Searches height ultrametrics `d_h` on the whole domain, one per weak order
/// of the states, for one under which the operator is a contraction strict on
/// orbits with a single fixed point and whose balls about it are boxes.
///
/// The heights `C(m) + 1` of any box sequence qualify, so the search is
/// complete.
pub fn search_ultrametric<V>(
    op: &DecomposedOperator<V>,
) -> Result<Option<FiniteUltrametricSpace<Vec<V>>>, AcoError>
where
    V: Clone + Eq + Hash + Debug + Ord + Send + Sync + 'static,
{
    let n = op.state_count();
    if n > MAX_ULTRAMETRIC_SEARCH_STATES {
        return Err(AcoError::TooLarge {
            candidates: n,
            limit: MAX_ULTRAMETRIC_SEARCH_STATES,
        });
    }
    let ix = IndexedOperator::new(op);
    let fixed = ix.fixed_points();
    if fixed.len() != 1 {
        return Ok(None);
    }
    let star = fixed[0];
    let k = op.processor_count();
    let mut heights = vec![0u64; n];
    let mut found = None;
    weak_orders(n, &mut heights, 1, (1u32 << n) - 1, &mut |h| {
        if qualifies(&ix, star, k, h) {
            found = Some(h.to_vec());
            true
        } else {
            false
        }
    });
    match found {
        None => Ok(None),
        Some(h) => {
            let states = ix.states.clone();
            let space = crate::ultrametric::height_space(states, |s| {
                h[ix.states.iter().position(|x| x == s).expect("state")]
            })?;
            Ok(Some(space))
        }
    }
}

/// Calls `visit` on every assignment of heights `1..=j` onto all `n` points
/// (each height used), stopping once `visit` returns true.
fn weak_orders(
    n: usize,
    h: &mut [u64],
    level: u64,
    remaining: u32,
    visit: &mut dyn FnMut(&[u64]) -> bool,
) -> bool {
    if remaining == 0 {
        return visit(h);
    }
    let mut sub = remaining;
    while sub != 0 {
        for p in 0..n {
            if sub >> p & 1 == 1 {
                h[p] = level;
            }
        }
        if weak_orders(n, h, level + 1, remaining & !sub, visit) {
            return true;
        }
        sub = (sub - 1) & remaining;
    }
    false
}

fn qualifies<V: Clone + Ord>(ix: &IndexedOperator<V>, star: usize, k: usize, h: &[u64]) -> bool {
    let n = h.len();
    let d = |a: usize, b: usize| if a == b { 0 } else { h[a].max(h[b]) };
    let img = &ix.image;
    for a in 0..n {
        for b in a + 1..n {
            if d(img[a], img[b]) > d(a, b) {
                return false;
            }
        }
        let s = img[a];
        if s != a && d(s, img[s]) >= d(a, s) {
            return false;
        }
    }
    let mut radii: Vec<u64> = (0..n).map(|m| d(star, m)).collect();
    radii.sort_unstable();
    radii.dedup();
    radii.iter().all(|&r| {
        let members: Vec<Vec<V>> = (0..n)
            .filter(|&m| d(star, m) <= r)
            .map(|m| ix.states[m].clone())
            .collect();
        factor_as_box(&members, k).is_some()
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Certified,
    Refuted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Balls of a supplied ultrametric.
    Ultrametric,
    /// Exhaustive box-chain search.
    Search,
}

#[derive(Clone, Debug)]
pub struct CertifyOptions {
    /// Number of sampled schedules; run `i` uses seed `seed + i`.
    pub runs: usize,
    pub seed: u64,
    pub horizon: usize,
    pub params: SampleParams,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            runs: 100,
            seed: 0,
            horizon: 200,
            params: SampleParams::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampledRun<V> {
    pub seed: u64,
    pub start: Vec<V>,
    pub converged_at: Option<usize>,
    pub reached_fixed_point: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Campaign<V> {
    pub horizon: usize,
    pub runs: Vec<SampledRun<V>>,
}

impl<V> Campaign<V> {
    pub fn all_converged(&self) -> bool {
        self.runs.iter().all(|r| r.reached_fixed_point)
    }
}

#[derive(Clone, Debug)]
pub struct AcoCertificate<V: Ord> {
    pub verdict: Verdict,
    pub method: Method,
    pub boxes: Option<BoxSequence<V>>,
    pub fixed_points: Vec<Vec<V>>,
    pub transcript: Option<SearchTranscript>,
    /// Why a supplied ultrametric was not used, if it was not.
    pub ultrametric_note: Option<String>,
    pub campaign: Option<Campaign<V>>,
}

/// Exact certification: balls of `hint` when they qualify, otherwise the
/// exhaustive search. Certified operators then run a seeded campaign, run
/// `i` starting from state `i mod |M|`.
pub fn certify_aco<V>(
    op: &DecomposedOperator<V>,
    hint: Option<&FiniteUltrametricSpace<Vec<V>>>,
    opts: &CertifyOptions,
) -> Result<AcoCertificate<V>, AcoError>
where
    V: Clone + Eq + Hash + Debug + Ord + Send + Sync + 'static,
{
    let mut note = None;
    let mut method = Method::Search;
    let mut transcript = None;
    let mut boxes = None;
    if let Some(space) = hint {
        match boxes_from_ultrametric(space, op) {
            Ok(bs) => {
                method = Method::Ultrametric;
                boxes = Some(bs);
            }
            Err(e) => note = Some(e.to_string()),
        }
    }
    if boxes.is_none() {
        let (found, t) = search_box_sequence(op)?;
        boxes = found;
        transcript = Some(t);
    }
    let fixed_points = op.fixed_points();
    let Some(bs) = boxes else {
        return Ok(AcoCertificate {
            verdict: Verdict::Refuted,
            method,
            boxes: None,
            fixed_points,
            transcript,
            ultrametric_note: note,
            campaign: None,
        });
    };
    if let Some(v) = verify_box_sequence(op, &bs)? {
        return Err(AcoError::MalformedBox(format!(
            "constructed sequence fails condition {}",
            v.condition()
        )));
    }
    let campaign = sample_campaign(op, &bs.fixed_point, opts)?;
    Ok(AcoCertificate {
        verdict: Verdict::Certified,
        method,
        boxes: Some(bs),
        fixed_points,
        transcript,
        ultrametric_note: note,
        campaign: Some(campaign),
    })
}

/// Seeded `run_async` runs; each must end at `target`.
pub fn sample_campaign<V>(
    op: &DecomposedOperator<V>,
    target: &[V],
    opts: &CertifyOptions,
) -> Result<Campaign<V>, AcoError>
where
    V: Clone + Eq + Hash + Debug + Ord + Send + Sync + 'static,
{
    let states = op.states();
    let mut runs = Vec::with_capacity(opts.runs);
    for i in 0..opts.runs {
        let seed = opts.seed.wrapping_add(i as u64);
        let start = states[i % states.len()].clone();
        let schedule = Schedule::sample(op.processor_count(), opts.horizon, seed, opts.params)?;
        let traj = run_async(op, &start, &schedule)?;
        let converged_at = traj.converged_at();
        let reached_fixed_point = converged_at.is_some() && traj.final_state() == target;
        runs.push(SampledRun {
            seed,
            start,
            converged_at,
            reached_fixed_point,
        });
    }
    Ok(Campaign {
        horizon: opts.horizon,
        runs,
    })
}

/// JSON form of a certificate with every value rendered by `show`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateDoc {
    pub verdict: Verdict,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_point: Option<Vec<String>>,
    pub fixed_points_found: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boxes: Option<Vec<Vec<Vec<String>>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchTranscript>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ultrametric_note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampling: Option<SamplingDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingDoc {
    pub runs: usize,
    pub horizon: usize,
    pub converged: usize,
    pub seeds: Vec<u64>,
    /// Convergence tick per run, `null` for a run that did not reach the fixed point.
    pub convergence_ticks: Vec<Option<usize>>,
}

impl<V: Ord + Clone> AcoCertificate<V> {
    pub fn to_doc(&self, show: impl Fn(&V) -> String) -> CertificateDoc {
        let render = |s: &[V]| s.iter().map(&show).collect::<Vec<_>>();
        CertificateDoc {
            verdict: self.verdict,
            method: self.method,
            fixed_point: self.boxes.as_ref().map(|b| render(&b.fixed_point)),
            fixed_points_found: self.fixed_points.len(),
            boxes: self.boxes.as_ref().map(|b| {
                b.boxes
                    .iter()
                    .map(|bx| bx.iter().map(|s| s.iter().map(&show).collect()).collect())
                    .collect()
            }),
            search: self.transcript.clone(),
            ultrametric_note: self.ultrametric_note.clone(),
            sampling: self.campaign.as_ref().map(|c| SamplingDoc {
                runs: c.runs.len(),
                horizon: c.horizon,
                converged: c.runs.iter().filter(|r| r.reached_fixed_point).count(),
                seeds: c.runs.iter().map(|r| r.seed).collect(),
                convergence_ticks: c
                    .runs
                    .iter()
                    .map(|r| r.converged_at.filter(|_| r.reached_fixed_point))
                    .collect(),
            }),
        }
    }
}

/// The operator on `{0,1}²` whose image of state `s` (index in
/// `00, 01, 10, 11` order) is the 2-bit field `s` of `code`, high bit first.
pub fn census_operator(code: u8) -> DecomposedOperator<u8> {
    let images: Vec<Vec<u8>> = (0..4)
        .map(|s| {
            let v = code >> (2 * s) & 3;
            vec![v >> 1, v & 1]
        })
        .collect();
    DecomposedOperator::from_table(vec![vec![0, 1], vec![0, 1]], images)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRow {
    pub code: u8,
    pub fixed_points: usize,
    pub box_sequence: bool,
    pub ultrametric: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusSummary {
    pub total: usize,
    pub aco: usize,
    pub agree: usize,
    /// ACO counts by number of boxes in the sequence found.
    pub by_chain_length: BTreeMap<usize, usize>,
    pub disagreements: Vec<u8>,
}

/// Decides every operator on `{0,1}²` both ways.
pub fn census() -> Result<(Vec<CensusRow>, CensusSummary), AcoError> {
    let mut rows = Vec::with_capacity(256);
    let mut by_chain_length = BTreeMap::new();
    for code in 0..=255u8 {
        let op = census_operator(code);
        let (bs, t) = search_box_sequence(&op)?;
        if let Some(b) = &bs {
            *by_chain_length.entry(b.len()).or_insert(0) += 1;
        }
        let um = search_ultrametric(&op)?;
        rows.push(CensusRow {
            code,
            fixed_points: t.fixed_points,
            box_sequence: bs.is_some(),
            ultrametric: um.is_some(),
        });
    }
    let disagreements: Vec<u8> = rows
        .iter()
        .filter(|r| r.box_sequence != r.ultrametric)
        .map(|r| r.code)
        .collect();
    let summary = CensusSummary {
        total: rows.len(),
        aco: rows.iter().filter(|r| r.box_sequence).count(),
        agree: rows.len() - disagreements.len(),
        by_chain_length,
        disagreements,
    };
    Ok((rows, summary))
}

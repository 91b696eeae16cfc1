//! Finite ultrametric spaces over an explicit, finite radius scale.
//!
//! Distances are stored as positions in a [`RadiusScale`], so every
//! comparison in the axiom and contraction checks is exact. A space is
//! built from a (possibly partial) distance table and is *not* required to
//! satisfy the axioms on construction: [`check_axioms`] reports violations
//! instead, so malformed inputs can be diagnosed rather than rejected
//! blindly.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::{self, Debug, Display};
use std::hash::Hash;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dyadic::Dyadic;

/// Upper bound on recorded violation witnesses in an [`AxiomReport`].
const MAX_WITNESSES: usize = 32;

#[derive(Debug, Error)]
pub enum UltrametricError {
    #[error("radius scale is empty")]
    EmptyScale,
    #[error("radius scale must start with the zero label \"0\", found {0:?}")]
    BadZeroLabel(String),
    #[error("duplicate radius label {0:?}")]
    DuplicateLabel(String),
    #[error("radius scale has {0} labels; at most 65535 are supported")]
    ScaleTooLarge(usize),
    #[error("unknown radius label {0:?}")]
    UnknownRadius(String),
    #[error("duplicate element {0}")]
    DuplicateElement(String),
    #[error("unknown element {0}")]
    UnknownElement(String),
    #[error("missing distance entry for ({0}, {1})")]
    MissingEntry(String, String),
    #[error("height of element {0} is zero")]
    InvalidHeight(String),
    #[error("expected a vector of dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("product components do not share one radius scale")]
    ScaleMismatch,
    #[error("product space needs at least one component")]
    EmptyProduct,
    #[error("map sends {0} outside the space")]
    MapLeavesSpace(String),
    #[error("malformed space description: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Position of a radius inside its [`RadiusScale`]; position 0 is the zero radius.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Radius(u16);

impl Radius {
    pub const ZERO: Radius = Radius(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// A finite totally ordered set of radius labels with least element `0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RadiusScale {
    labels: Vec<String>,
}

impl RadiusScale {
    /// Labels in ascending order; the first one is the zero radius and must read `"0"`.
    pub fn new<S: Into<String>>(
        labels: impl IntoIterator<Item = S>,
    ) -> Result<Self, UltrametricError> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let first = labels.first().ok_or(UltrametricError::EmptyScale)?;
        if first != "0" {
            return Err(UltrametricError::BadZeroLabel(first.clone()));
        }
        if labels.len() > u16::MAX as usize {
            return Err(UltrametricError::ScaleTooLarge(labels.len()));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(UltrametricError::DuplicateLabel(l.clone()));
            }
        }
        Ok(Self { labels })
    }

    /// The scale `0 < 1 < ... < n-1`.
    pub fn levels(n: usize) -> Self {
        Self::new((0..n.max(1)).map(|i| i.to_string())).expect("level labels are valid")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn zero(&self) -> Radius {
        Radius::ZERO
    }

    pub fn max(&self) -> Radius {
        Radius((self.labels.len() - 1) as u16)
    }

    pub fn label(&self, r: Radius) -> &str {
        &self.labels[r.index()]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn radius(&self, label: &str) -> Option<Radius> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| Radius(i as u16))
    }

    pub fn radii(&self) -> impl Iterator<Item = Radius> + '_ {
        (0..self.labels.len()).map(|i| Radius(i as u16))
    }
}

/// A finite set with a total distance table into a [`RadiusScale`].
#[derive(Clone, Debug)]
pub struct FiniteUltrametricSpace<E> {
    elements: Vec<E>,
    index: HashMap<E, usize>,
    scale: RadiusScale,
    dist: Vec<Radius>,
}

impl<E: Clone + Eq + Hash + Debug> FiniteUltrametricSpace<E> {
    /// Builds a space from table entries `(m, n, r)`.
    ///
    /// A missing `(m, n)` is filled from `(n, m)` and a missing diagonal
    /// entry defaults to zero; anything else missing is an error.
    pub fn from_entries(
        elements: Vec<E>,
        scale: RadiusScale,
        entries: impl IntoIterator<Item = (E, E, Radius)>,
    ) -> Result<Self, UltrametricError> {
        let index = index_elements(&elements)?;
        let n = elements.len();
        let mut table: Vec<Option<Radius>> = vec![None; n * n];
        for (a, b, r) in entries {
            let i = *index
                .get(&a)
                .ok_or_else(|| UltrametricError::UnknownElement(format!("{a:?}")))?;
            let j = *index
                .get(&b)
                .ok_or_else(|| UltrametricError::UnknownElement(format!("{b:?}")))?;
            if r.index() >= scale.len() {
                return Err(UltrametricError::UnknownRadius(format!("#{}", r.index())));
            }
            table[i * n + j] = Some(r);
        }
        let mut dist = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let r = table[i * n + j]
                    .or(table[j * n + i])
                    .or(if i == j { Some(Radius::ZERO) } else { None })
                    .ok_or_else(|| {
                        UltrametricError::MissingEntry(
                            format!("{:?}", elements[i]),
                            format!("{:?}", elements[j]),
                        )
                    })?;
                dist.push(r);
            }
        }
        Ok(Self {
            elements,
            index,
            scale,
            dist,
        })
    }

    /// Builds a space from a distance function into any ordered value set.
    ///
    /// The scale is the sorted set of values taken by `f` together with
    /// `zero`, labelled by their `Display` form (`zero` is relabelled `"0"`).
    pub fn from_fn<R, F>(elements: Vec<E>, zero: R, f: F) -> Result<Self, UltrametricError>
    where
        R: Ord + Clone + Display,
        F: Fn(&E, &E) -> R,
    {
        let index = index_elements(&elements)?;
        let n = elements.len();
        let mut raw = Vec::with_capacity(n * n);
        for a in &elements {
            for b in &elements {
                raw.push(f(a, b));
            }
        }
        let mut distinct: BTreeSet<&R> = raw.iter().collect();
        distinct.insert(&zero);
        let values: Vec<R> = distinct.into_iter().cloned().collect();
        if values[0] != zero {
            return Err(UltrametricError::BadZeroLabel(values[0].to_string()));
        }
        let labels =
            std::iter::once("0".to_string()).chain(values[1..].iter().map(|v| v.to_string()));
        let scale = RadiusScale::new(labels)?;
        let dist = raw
            .iter()
            .map(|v| Radius(values.binary_search(v).expect("value collected above") as u16))
            .collect();
        Ok(Self {
            elements,
            index,
            scale,
            dist,
        })
    }

    /// Loads the JSON space description (`elements`, `scale`, `dist`).
    pub fn from_json_str(text: &str) -> Result<FiniteUltrametricSpace<String>, UltrametricError> {
        let desc: SpaceDescription = serde_json::from_str(text)?;
        desc.into_space()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[E] {
        &self.elements
    }

    pub fn scale(&self) -> &RadiusScale {
        &self.scale
    }

    pub fn index_of(&self, e: &E) -> Option<usize> {
        self.index.get(e).copied()
    }

    pub fn dist(&self, m: &E, n: &E) -> Result<Radius, UltrametricError> {
        let i = self.require(m)?;
        let j = self.require(n)?;
        Ok(self.dist_at(i, j))
    }

    /// Distance between the elements at positions `i` and `j`.
    pub fn dist_at(&self, i: usize, j: usize) -> Radius {
        self.dist[i * self.elements.len() + j]
    }

    pub fn label_of(&self, r: Radius) -> &str {
        self.scale.label(r)
    }

    pub fn ball(&self, center: &E, radius: Radius) -> Result<Ball<'_, E>, UltrametricError> {
        let center = self.require(center)?;
        if radius.index() >= self.scale.len() {
            return Err(UltrametricError::UnknownRadius(format!(
                "#{}",
                radius.index()
            )));
        }
        Ok(Ball {
            space: self,
            center,
            radius,
        })
    }

    /// Every ball of the space, one per (center, radius), with duplicates by content removed.
    pub fn distinct_balls(&self) -> Vec<Vec<usize>> {
        let mut seen = BTreeSet::new();
        for c in 0..self.len() {
            for r in self.scale.radii() {
                seen.insert(
                    Ball {
                        space: self,
                        center: c,
                        radius: r,
                    }
                    .member_indices(),
                );
            }
        }
        seen.into_iter().collect()
    }

    fn require(&self, e: &E) -> Result<usize, UltrametricError> {
        self.index_of(e)
            .ok_or_else(|| UltrametricError::UnknownElement(format!("{e:?}")))
    }
}

fn index_elements<E: Clone + Eq + Hash + Debug>(
    elements: &[E],
) -> Result<HashMap<E, usize>, UltrametricError> {
    let mut index = HashMap::with_capacity(elements.len());
    for (i, e) in elements.iter().enumerate() {
        if index.insert(e.clone(), i).is_some() {
            return Err(UltrametricError::DuplicateElement(format!("{e:?}")));
        }
    }
    Ok(index)
}

/// On-disk form of a space: `{"elements": [...], "scale": ["0", ...], "dist": [[m, n, label], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpaceDescription {
    pub elements: Vec<String>,
    pub scale: Vec<String>,
    #[serde(default)]
    pub dist: Vec<(String, String, String)>,
}

impl SpaceDescription {
    pub fn into_space(self) -> Result<FiniteUltrametricSpace<String>, UltrametricError> {
        let scale = RadiusScale::new(self.scale)?;
        let entries = self
            .dist
            .into_iter()
            .map(|(m, n, label)| {
                let r = scale
                    .radius(&label)
                    .ok_or(UltrametricError::UnknownRadius(label))?;
                Ok((m, n, r))
            })
            .collect::<Result<Vec<_>, UltrametricError>>()?;
        FiniteUltrametricSpace::from_entries(self.elements, scale, entries)
    }

    pub fn from_space<E: Clone + Eq + Hash + Debug + Display>(
        space: &FiniteUltrametricSpace<E>,
    ) -> Self {
        let mut dist = Vec::new();
        for (i, m) in space.elements().iter().enumerate() {
            for (j, n) in space.elements().iter().enumerate().skip(i + 1) {
                dist.push((
                    m.to_string(),
                    n.to_string(),
                    space.label_of(space.dist_at(i, j)).to_string(),
                ));
            }
        }
        Self {
            elements: space.elements().iter().map(|e| e.to_string()).collect(),
            scale: space.scale().labels().to_vec(),
            dist,
        }
    }
}

pub fn load_space(path: &Path) -> Result<FiniteUltrametricSpace<String>, UltrametricError> {
    let text = std::fs::read_to_string(path)?;
    FiniteUltrametricSpace::<String>::from_json_str(&text)
}

// ---------------------------------------------------------------------------
// Axioms
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AxiomViolation<E> {
    /// `d(m, n) = 0` with `m != n`, or a nonzero diagonal entry when `m == n`.
    Identity {
        m: E,
        n: E,
    },
    Symmetry {
        m: E,
        n: E,
    },
    /// `d(l, n) > max(d(l, m), d(m, n))`.
    StrongTriangle {
        l: E,
        m: E,
        n: E,
    },
}

#[derive(Clone, Debug)]
pub struct AxiomReport<E> {
    /// First violations found, at most 32.
    pub violations: Vec<AxiomViolation<E>>,
    pub violation_count: usize,
}

impl<E> AxiomReport<E> {
    pub fn pass(&self) -> bool {
        self.violation_count == 0
    }
}

pub fn check_axioms<E: Clone + Eq + Hash + Debug>(
    space: &FiniteUltrametricSpace<E>,
) -> AxiomReport<E> {
    let n = space.len();
    let el = space.elements();
    let mut report = AxiomReport {
        violations: Vec::new(),
        violation_count: 0,
    };
    let record = |v: AxiomViolation<E>, report: &mut AxiomReport<E>| {
        report.violation_count += 1;
        if report.violations.len() < MAX_WITNESSES {
            report.violations.push(v);
        }
    };
    for i in 0..n {
        for j in 0..n {
            let d = space.dist_at(i, j);
            if (i == j) != d.is_zero() {
                record(
                    AxiomViolation::Identity {
                        m: el[i].clone(),
                        n: el[j].clone(),
                    },
                    &mut report,
                );
            }
            if i < j && d != space.dist_at(j, i) {
                record(
                    AxiomViolation::Symmetry {
                        m: el[i].clone(),
                        n: el[j].clone(),
                    },
                    &mut report,
                );
            }
        }
    }
    for l in 0..n {
        for m in 0..n {
            let dlm = space.dist_at(l, m);
            for k in 0..n {
                if space.dist_at(l, k) > dlm.max(space.dist_at(m, k)) {
                    record(
                        AxiomViolation::StrongTriangle {
                            l: el[l].clone(),
                            m: el[m].clone(),
                            n: el[k].clone(),
                        },
                        &mut report,
                    );
                }
            }
        }
    }
    report
}

/// Returns a triple whose two largest pairwise distances differ, if any.
pub fn find_non_isosceles<E: Clone + Eq + Hash + Debug>(
    space: &FiniteUltrametricSpace<E>,
) -> Option<(E, E, E)> {
    let n = space.len();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                let mut d = [
                    space.dist_at(a, b),
                    space.dist_at(b, c),
                    space.dist_at(a, c),
                ];
                d.sort();
                if d[1] != d[2] {
                    let el = space.elements();
                    return Some((el[a].clone(), el[b].clone(), el[c].clone()));
                }
            }
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Canonical distances
// ---------------------------------------------------------------------------

/// First-difference distance on sequences: `0` if equal, else `2^-m` for the
/// least (0-based) index `m` where they differ. A shorter sequence differs
/// from a longer one at its first absent index.
pub fn string_distance<T: PartialEq>(x: &[T], y: &[T]) -> Dyadic {
    let common = x.len().min(y.len());
    match (0..common).find(|&i| x[i] != y[i]) {
        Some(m) => Dyadic::InvPow2(m as u32),
        None if x.len() == y.len() => Dyadic::Zero,
        None => Dyadic::InvPow2(common as u32),
    }
}

/// `d_h(m, n)`: `0` when `m == n`, otherwise `max(h(m), h(n))`. Heights must be positive.
pub fn height_distance<E, F>(h: F, m: &E, n: &E) -> Result<u64, UltrametricError>
where
    E: PartialEq + Debug,
    F: Fn(&E) -> u64,
{
    let (hm, hn) = (h(m), h(n));
    for (e, v) in [(m, hm), (n, hn)] {
        if v == 0 {
            return Err(UltrametricError::InvalidHeight(format!("{e:?}")));
        }
    }
    Ok(if m == n { 0 } else { hm.max(hn) })
}

/// The space induced on `elements` by [`height_distance`].
pub fn height_space<E, F>(
    elements: Vec<E>,
    h: F,
) -> Result<FiniteUltrametricSpace<E>, UltrametricError>
where
    E: Clone + Eq + Hash + Debug,
    F: Fn(&E) -> u64,
{
    for e in &elements {
        if h(e) == 0 {
            return Err(UltrametricError::InvalidHeight(format!("{e:?}")));
        }
    }
    FiniteUltrametricSpace::from_fn(
        elements,
        0u64,
        |a, b| if a == b { 0 } else { h(a).max(h(b)) },
    )
}

// ---------------------------------------------------------------------------
// Balls
// ---------------------------------------------------------------------------

/// `B_r(m) = {n : d(m, n) <= r}`.
#[derive(Clone, Copy, Debug)]
pub struct Ball<'a, E> {
    space: &'a FiniteUltrametricSpace<E>,
    center: usize,
    radius: Radius,
}

impl<'a, E: Clone + Eq + Hash + Debug> Ball<'a, E> {
    pub fn center(&self) -> &'a E {
        &self.space.elements[self.center]
    }

    pub fn radius(&self) -> Radius {
        self.radius
    }

    pub fn space(&self) -> &'a FiniteUltrametricSpace<E> {
        self.space
    }

    /// Positions of the members, ascending.
    pub fn member_indices(&self) -> Vec<usize> {
        (0..self.space.len())
            .filter(|&j| self.space.dist_at(self.center, j) <= self.radius)
            .collect()
    }

    pub fn members(&self) -> Vec<E> {
        self.member_indices()
            .into_iter()
            .map(|j| self.space.elements[j].clone())
            .collect()
    }

    pub fn contains(&self, e: &E) -> bool {
        self.space
            .index_of(e)
            .is_some_and(|j| self.space.dist_at(self.center, j) <= self.radius)
    }

    /// The ball of the same radius about another element.
    pub fn recentered(&self, center: &E) -> Result<Ball<'a, E>, UltrametricError> {
        self.space.ball(center, self.radius)
    }
}

pub fn ball_members<E: Clone + Eq + Hash + Debug>(ball: &Ball<'_, E>) -> Vec<E> {
    ball.members()
}

#[derive(Clone, Debug)]
pub struct CompletenessReport<E> {
    pub pass: bool,
    pub balls: usize,
    pub chains_checked: usize,
    /// A maximal chain of balls with empty intersection, smallest first.
    pub witness: Option<Vec<Vec<E>>>,
}

/// Enumerates every maximal chain of distinct balls and checks that its
/// intersection is nonempty.
pub fn check_spherical_completeness<E: Clone + Eq + Hash + Debug>(
    space: &FiniteUltrametricSpace<E>,
) -> CompletenessReport<E> {
    let balls = space.distinct_balls();
    let sets: Vec<BTreeSet<usize>> = balls.iter().map(|b| b.iter().copied().collect()).collect();
    let nb = balls.len();
    let proper_subset =
        |a: usize, b: usize| sets[a].len() < sets[b].len() && sets[a].is_subset(&sets[b]);
    // Covering relation of the inclusion order.
    let mut covers: Vec<Vec<usize>> = vec![Vec::new(); nb];
    for a in 0..nb {
        for b in 0..nb {
            if proper_subset(a, b) && !(0..nb).any(|c| proper_subset(a, c) && proper_subset(c, b)) {
                covers[a].push(b);
            }
        }
    }
    let minimal: Vec<usize> = (0..nb)
        .filter(|&b| !(0..nb).any(|a| proper_subset(a, b)))
        .collect();

    let mut report = CompletenessReport {
        pass: true,
        balls: nb,
        chains_checked: 0,
        witness: None,
    };
    let mut stack: Vec<Vec<usize>> = minimal.into_iter().map(|m| vec![m]).collect();
    while let Some(chain) = stack.pop() {
        let top = *chain.last().expect("chains are nonempty");
        if covers[top].is_empty() {
            report.chains_checked += 1;
            let mut inter = sets[chain[0]].clone();
            for &b in &chain[1..] {
                inter = inter.intersection(&sets[b]).copied().collect();
            }
            if inter.is_empty() {
                report.pass = false;
                report.witness = Some(
                    chain
                        .iter()
                        .map(|&b| {
                            balls[b]
                                .iter()
                                .map(|&i| space.elements[i].clone())
                                .collect()
                        })
                        .collect(),
                );
                return report;
            }
            continue;
        }
        for &next in &covers[top] {
            let mut c = chain.clone();
            c.push(next);
            stack.push(c);
        }
    }
    report
}

// ---------------------------------------------------------------------------
// Products
// ---------------------------------------------------------------------------

/// Product of spaces over a shared scale with the max distance.
#[derive(Clone, Debug)]
pub struct ProductSpace<E> {
    components: Vec<FiniteUltrametricSpace<E>>,
}

impl<E: Clone + Eq + Hash + Debug> ProductSpace<E> {
    pub fn new(components: Vec<FiniteUltrametricSpace<E>>) -> Result<Self, UltrametricError> {
        let first = components.first().ok_or(UltrametricError::EmptyProduct)?;
        if components.iter().any(|c| c.scale != first.scale) {
            return Err(UltrametricError::ScaleMismatch);
        }
        Ok(Self { components })
    }

    pub fn dimension(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[FiniteUltrametricSpace<E>] {
        &self.components
    }

    pub fn scale(&self) -> &RadiusScale {
        &self.components[0].scale
    }

    pub fn product_distance(&self, m: &[E], n: &[E]) -> Result<Radius, UltrametricError> {
        for v in [m, n] {
            if v.len() != self.dimension() {
                return Err(UltrametricError::DimensionMismatch {
                    expected: self.dimension(),
                    got: v.len(),
                });
            }
        }
        let mut d = Radius::ZERO;
        for (c, (a, b)) in self.components.iter().zip(m.iter().zip(n)) {
            d = d.max(c.dist(a, b)?);
        }
        Ok(d)
    }

    /// Every element vector, in odometer order (last coordinate fastest).
    pub fn vectors(&self) -> Vec<Vec<E>> {
        let mut out: Vec<Vec<E>> = vec![Vec::new()];
        for c in &self.components {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    c.elements().iter().map(move |e| {
                        let mut v = prefix.clone();
                        v.push(e.clone());
                        v
                    })
                })
                .collect();
        }
        out
    }

    /// The product as a flat space over element vectors.
    pub fn to_space(&self) -> FiniteUltrametricSpace<Vec<E>> {
        let elements = self.vectors();
        let scale = self.scale().clone();
        let index = index_elements(&elements).expect("product vectors are distinct");
        let comp_idx: Vec<Vec<usize>> = elements
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&self.components)
                    .map(|(e, c)| c.index_of(e).expect("own element"))
                    .collect()
            })
            .collect();
        let n = elements.len();
        let mut dist = Vec::with_capacity(n * n);
        for a in &comp_idx {
            for b in &comp_idx {
                let d = self
                    .components
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c.dist_at(a[k], b[k]))
                    .max()
                    .unwrap_or(Radius::ZERO);
                dist.push(d);
            }
        }
        FiniteUltrametricSpace {
            elements,
            index,
            scale,
            dist,
        }
    }

    /// Whether `ball` (a ball of [`Self::to_space`]) equals the product of the
    /// component balls of the same radius about the center's coordinates.
    pub fn check_ball_is_box(&self, ball: &Ball<'_, Vec<E>>) -> bool {
        let center = ball.center();
        let factors: Vec<Vec<E>> = self
            .components
            .iter()
            .zip(center)
            .map(|(c, e)| {
                c.ball(e, ball.radius())
                    .map(|b| b.members())
                    .unwrap_or_default()
            })
            .collect();
        let box_members: BTreeSet<Vec<usize>> = cartesian(&factors)
            .into_iter()
            .map(|v| self.coordinates(&v))
            .collect();
        let members: BTreeSet<Vec<usize>> =
            ball.members().iter().map(|v| self.coordinates(v)).collect();
        members == box_members
    }

    fn coordinates(&self, v: &[E]) -> Vec<usize> {
        v.iter()
            .zip(&self.components)
            .map(|(e, c)| c.index_of(e).unwrap_or(usize::MAX))
            .collect()
    }
}

pub(crate) fn cartesian<E: Clone>(factors: &[Vec<E>]) -> Vec<Vec<E>> {
    let mut out: Vec<Vec<E>> = vec![Vec::new()];
    for f in factors {
        let mut next = Vec::with_capacity(out.len() * f.len());
        for prefix in &out {
            for e in f {
                let mut v = prefix.clone();
                v.push(e.clone());
                next.push(v);
            }
        }
        out = next;
    }
    out
}

// ---------------------------------------------------------------------------
// Contractions
// ---------------------------------------------------------------------------

/// Contraction strength of a map, weakest first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContractionClass {
    NotContraction,
    Contraction,
    #[serde(rename = "contraction-strict-on-orbits")]
    StrictOnOrbits,
    StrictContraction,
}

impl ContractionClass {
    /// At least a contraction that is strict on orbits.
    pub fn strict_on_orbits(self) -> bool {
        self >= ContractionClass::StrictOnOrbits
    }
}

impl fmt::Display for ContractionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ContractionClass::NotContraction => "not-contraction",
            ContractionClass::Contraction => "contraction",
            ContractionClass::StrictOnOrbits => "contraction-strict-on-orbits",
            ContractionClass::StrictContraction => "strict-contraction",
        })
    }
}

/// Counterexample to the next-stronger class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ContractionWitness<E> {
    /// `d(σm, σn) > d(m, n)`.
    Expands { m: E, n: E },
    /// `σm != m` and `d(σm, σ²m) >= d(m, σm)`.
    OrbitNotStrict { m: E },
    /// `m != n` and `d(σm, σn) = d(m, n)`.
    NotStrict { m: E, n: E },
}

#[derive(Clone, Debug)]
pub struct ContractionReport<E> {
    pub class: ContractionClass,
    pub witness: Option<ContractionWitness<E>>,
}

pub fn classify_contraction<E, F>(
    space: &FiniteUltrametricSpace<E>,
    sigma: F,
) -> Result<ContractionReport<E>, UltrametricError>
where
    E: Clone + Eq + Hash + Debug,
    F: Fn(&E) -> E,
{
    let map = space
        .elements()
        .iter()
        .map(|e| {
            let img = sigma(e);
            space
                .index_of(&img)
                .ok_or_else(|| UltrametricError::MapLeavesSpace(format!("{e:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let (class, witness) = classify_indexed(space, &map);
    let el = space.elements();
    let witness = witness.map(|w| match w {
        ContractionWitness::Expands { m, n } => ContractionWitness::Expands {
            m: el[m].clone(),
            n: el[n].clone(),
        },
        ContractionWitness::OrbitNotStrict { m } => {
            ContractionWitness::OrbitNotStrict { m: el[m].clone() }
        }
        ContractionWitness::NotStrict { m, n } => ContractionWitness::NotStrict {
            m: el[m].clone(),
            n: el[n].clone(),
        },
    });
    Ok(ContractionReport { class, witness })
}

/// Classification of a map given as positions: `map[i]` is the image of element `i`.
pub fn classify_indexed<E: Clone + Eq + Hash + Debug>(
    space: &FiniteUltrametricSpace<E>,
    map: &[usize],
) -> (ContractionClass, Option<ContractionWitness<usize>>) {
    let n = space.len();
    for i in 0..n {
        for j in i + 1..n {
            if space.dist_at(map[i], map[j]) > space.dist_at(i, j) {
                return (
                    ContractionClass::NotContraction,
                    Some(ContractionWitness::Expands { m: i, n: j }),
                );
            }
        }
    }
    for i in 0..n {
        let s = map[i];
        if s != i && space.dist_at(s, map[s]) >= space.dist_at(i, s) {
            return (
                ContractionClass::Contraction,
                Some(ContractionWitness::OrbitNotStrict { m: i }),
            );
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if space.dist_at(map[i], map[j]) >= space.dist_at(i, j) {
                return (
                    ContractionClass::StrictOnOrbits,
                    Some(ContractionWitness::NotStrict { m: i, n: j }),
                );
            }
        }
    }
    (ContractionClass::StrictContraction, None)
}

/// Groups the elements of a space by label, for diagnostics.
pub fn distance_histogram<E: Clone + Eq + Hash + Debug>(
    space: &FiniteUltrametricSpace<E>,
) -> BTreeMap<String, usize> {
    let mut h = BTreeMap::new();
    for i in 0..space.len() {
        for j in i + 1..space.len() {
            *h.entry(space.label_of(space.dist_at(i, j)).to_string())
                .or_insert(0) += 1;
        }
    }
    h
}

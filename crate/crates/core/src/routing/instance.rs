use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};

use super::{PathId, PathSet, RoutingError};

/// Preference input: `hop-count`, or explicit pairs `[p, q]` meaning `p ⪯ q`
/// (`p` at least as preferred as `q`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PreferenceRule {
    HopCount,
    Explicit {
        pairs: Vec<(Vec<String>, Vec<String>)>,
    },
}

/// JSON form of an instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceFile {
    pub nodes: Vec<String>,
    pub dest: String,
    pub arcs: Vec<(String, String)>,
    /// Node -> permitted node sequences; omitted nodes permit every simple path.
    #[serde(default)]
    pub permitted: Option<BTreeMap<String, Vec<Vec<String>>>>,
    pub preference: PreferenceRule,
}

/// A multipath stable-paths instance with its enumerated path universe.
///
/// Paths are stored as node-index sequences from source to destination
/// inclusive; the trivial path `ε` is `[dest]`.
#[derive(Clone, Debug)]
pub struct SppInstance {
    nodes: Vec<String>,
    dest: usize,
    arcs: BTreeSet<(usize, usize)>,
    paths: Vec<Vec<usize>>,
    path_index: HashMap<Vec<usize>, PathId>,
    permitted: PathSet,
    /// `leq[p]` = paths `q` with `p ⪯ q`, reflexive-transitive closure of the input.
    leq: Vec<PathSet>,
    /// Per path `p`: the permitted simple one-arc extensions `(i j)p` and their tail node `i`.
    extensions: Vec<Vec<(usize, PathId)>>,
}

/// Why an instance is not strictly inflationary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InflationFailure {
    /// Arc `(i, j)` and path `p` from `j` with `p ≺ (i j)p` failing.
    pub arc: (usize, usize),
    pub path: PathId,
    pub extension: PathId,
    /// A cycle `p_0 ⪯ p_1 ⪯ ... ⪯ p_0` through a strict requirement, when the
    /// declared preferences cannot be extended to any strictly inflationary preorder.
    pub cycle: Option<Vec<PathId>>,
}

impl SppInstance {
    pub fn from_file(file: InstanceFile) -> Result<Self, RoutingError> {
        let node_index: HashMap<&str, usize> = file
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        if node_index.len() != file.nodes.len() {
            return Err(RoutingError::Invalid("duplicate node name".into()));
        }
        let lookup = |n: &str| {
            node_index
                .get(n)
                .copied()
                .ok_or_else(|| RoutingError::UnknownNode(n.to_string()))
        };
        let dest = lookup(&file.dest)?;
        let mut arcs = BTreeSet::new();
        for (a, b) in &file.arcs {
            arcs.insert((lookup(a)?, lookup(b)?));
        }
        let paths = enumerate_simple_paths(file.nodes.len(), dest, &arcs);
        if paths.len() > 64 {
            return Err(RoutingError::TooManyPaths(paths.len()));
        }
        let path_index: HashMap<Vec<usize>, PathId> = paths
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i))
            .collect();
        let resolve = |seq: &[String]| -> Result<PathId, RoutingError> {
            let mut idx = seq
                .iter()
                .map(|n| lookup(n))
                .collect::<Result<Vec<_>, _>>()?;
            if idx.is_empty() {
                idx.push(dest);
            }
            path_index
                .get(&idx)
                .copied()
                .ok_or_else(|| RoutingError::UnknownPath(seq.join(" ")))
        };

        let mut permitted = PathSet::EMPTY;
        match &file.permitted {
            None => permitted = PathSet::full(paths.len()),
            Some(map) => {
                let mut listed = vec![false; file.nodes.len()];
                for (node, seqs) in map {
                    let v = lookup(node)?;
                    listed[v] = true;
                    for seq in seqs {
                        let p = resolve(seq)?;
                        if paths[p][0] != v {
                            return Err(RoutingError::Invalid(format!(
                                "path ({}) permitted at {node} does not start there",
                                seq.join(" ")
                            )));
                        }
                        permitted.insert(p);
                    }
                }
                for (p, path) in paths.iter().enumerate() {
                    if !listed[path[0]] {
                        permitted.insert(p);
                    }
                }
            }
        }
        let epsilon = path_index[&vec![dest]];
        if !permitted.contains(epsilon) {
            return Err(RoutingError::Invalid(
                "the trivial path must be permitted at the destination".into(),
            ));
        }

        let n = paths.len();
        let mut leq: Vec<PathSet> = (0..n).map(PathSet::singleton).collect();
        match &file.preference {
            PreferenceRule::HopCount => {
                for (p, lp) in leq.iter_mut().enumerate() {
                    for q in 0..n {
                        if paths[p].len() <= paths[q].len() {
                            lp.insert(q);
                        }
                    }
                }
            }
            PreferenceRule::Explicit { pairs } => {
                for (p, q) in pairs {
                    let (p, q) = (resolve(p)?, resolve(q)?);
                    leq[p].insert(q);
                }
            }
        }
        close_transitively(&mut leq);

        let mut extensions = vec![Vec::new(); n];
        for (p, path) in paths.iter().enumerate() {
            let j = path[0];
            for &(i, _) in arcs.iter().filter(|&&(_, to)| to == j) {
                if i == dest || path.contains(&i) {
                    continue;
                }
                let mut ext = Vec::with_capacity(path.len() + 1);
                ext.push(i);
                ext.extend_from_slice(path);
                let e = path_index[&ext];
                if permitted.contains(e) {
                    extensions[p].push((i, e));
                }
            }
        }

        Ok(Self {
            nodes: file.nodes,
            dest,
            arcs,
            paths,
            path_index,
            permitted,
            leq,
            extensions,
        })
    }

    pub fn from_json_str(text: &str) -> Result<Self, RoutingError> {
        Self::from_file(serde_json::from_str(text)?)
    }

    pub fn load(path: &FsPath) -> Result<Self, RoutingError> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn dest(&self) -> usize {
        self.dest
    }

    pub fn arcs(&self) -> &BTreeSet<(usize, usize)> {
        &self.arcs
    }

    /// The path universe: every simple path to the destination, shortest first,
    /// ties broken lexicographically by node index.
    pub fn paths(&self) -> &[Vec<usize>] {
        &self.paths
    }

    pub fn path_count(&self) -> usize {
        self.paths.len()
    }

    pub fn path(&self, p: PathId) -> &[usize] {
        &self.paths[p]
    }

    pub fn path_id(&self, nodes: &[&str]) -> Option<PathId> {
        let mut idx = Vec::with_capacity(nodes.len().max(1));
        for n in nodes {
            idx.push(self.nodes.iter().position(|m| m == n)?);
        }
        if idx.is_empty() {
            idx.push(self.dest);
        }
        self.path_index.get(&idx).copied()
    }

    pub fn epsilon(&self) -> PathId {
        self.path_index[&vec![self.dest]]
    }

    pub fn source(&self, p: PathId) -> usize {
        self.paths[p][0]
    }

    pub fn permitted(&self) -> PathSet {
        self.permitted
    }

    /// Permitted paths with source `node`.
    pub fn permitted_at(&self, node: usize) -> PathSet {
        self.permitted.filter(|p| self.source(p) == node)
    }

    pub fn extensions(&self, p: PathId) -> &[(usize, PathId)] {
        &self.extensions[p]
    }

    /// `p ⪯ q`.
    pub fn weakly_preferred(&self, p: PathId, q: PathId) -> bool {
        self.leq[p].contains(q)
    }

    /// `p ≺ q`: `p ⪯ q` and not `q ⪯ p`.
    pub fn strictly_preferred(&self, p: PathId, q: PathId) -> bool {
        self.leq[p].contains(q) && !self.leq[q].contains(p)
    }

    pub fn is_valid_state(&self, x: PathSet) -> bool {
        x.is_subset(self.permitted)
    }

    pub fn format_path(&self, p: PathId) -> String {
        let path = &self.paths[p];
        if path.len() == 1 {
            return "ε".to_string();
        }
        let names: Vec<&str> = path.iter().map(|&v| self.nodes[v].as_str()).collect();
        format!("({})", names.join(" "))
    }

    pub fn format_set(&self, x: PathSet) -> String {
        let items: Vec<String> = x.iter().map(|p| self.format_path(p)).collect();
        format!("{{{}}}", items.join(", "))
    }

    /// Parses `{ε, (1 d)}`-style text produced by [`Self::format_set`].
    pub fn parse_set(&self, text: &str) -> Result<PathSet, RoutingError> {
        let inner = text.trim().trim_start_matches('{').trim_end_matches('}');
        let mut x = PathSet::EMPTY;
        for item in inner.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let names: Vec<&str> = if item == "ε" {
                Vec::new()
            } else {
                item.trim_start_matches('(')
                    .trim_end_matches(')')
                    .split_whitespace()
                    .collect()
            };
            let p = self
                .path_id(&names)
                .ok_or_else(|| RoutingError::UnknownPath(item.to_string()))?;
            x.insert(p);
        }
        Ok(x)
    }

    /// Path heights `h(p) = |{q : p ⪯ q}|` over the path universe.
    pub fn path_height(&self) -> Vec<u64> {
        self.leq.iter().map(|s| s.len() as u64).collect()
    }

    /// Checks `p ≺ (i j)p` for every permitted path `p` and permitted simple extension.
    pub fn check_strictly_inflationary(&self) -> Result<(), InflationFailure> {
        let mut required = Vec::new();
        let mut first = None;
        for p in self.permitted.iter() {
            for &(i, e) in &self.extensions[p] {
                required.push((p, e));
                if first.is_none() && !self.strictly_preferred(p, e) {
                    first = Some((i, p, e));
                }
            }
        }
        let Some((i, p, e)) = first else {
            return Ok(());
        };
        Err(InflationFailure {
            arc: (i, self.source(p)),
            path: p,
            extension: e,
            cycle: self.inflation_cycle(&required),
        })
    }

    /// Looks for `a ≺ b` required by inflation while the declared order
    /// together with all requirements forces `b ⪯ a`.
    fn inflation_cycle(&self, required: &[(PathId, PathId)]) -> Option<Vec<PathId>> {
        let n = self.paths.len();
        let mut edges: Vec<PathSet> = self.leq.clone();
        for (p, lp) in edges.iter_mut().enumerate() {
            lp.remove(p);
        }
        for &(a, b) in required {
            edges[a].insert(b);
        }
        for &(a, b) in required {
            // Shortest route b -> ... -> a closes the cycle a -> b -> ... -> a.
            let mut prev = vec![usize::MAX; n];
            let mut queue = VecDeque::from([b]);
            prev[b] = b;
            while let Some(u) = queue.pop_front() {
                if u == a {
                    let mut back = vec![a];
                    let mut v = a;
                    while v != b {
                        v = prev[v];
                        back.push(v);
                    }
                    back.reverse();
                    let mut cycle = vec![a];
                    cycle.extend(back);
                    return Some(cycle);
                }
                for w in edges[u].iter() {
                    if prev[w] == usize::MAX {
                        prev[w] = u;
                        queue.push_back(w);
                    }
                }
            }
        }
        None
    }
}

fn close_transitively(leq: &mut [PathSet]) {
    let n = leq.len();
    for k in 0..n {
        for i in 0..n {
            if leq[i].contains(k) {
                let via = leq[k];
                leq[i] = leq[i].union(via);
            }
        }
    }
}

/// All simple directed paths ending at `dest`, shortest first then by node index.
fn enumerate_simple_paths(
    nodes: usize,
    dest: usize,
    arcs: &BTreeSet<(usize, usize)>,
) -> Vec<Vec<usize>> {
    let mut into: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    for &(a, b) in arcs {
        into[b].push(a);
    }
    let mut out = Vec::new();
    let mut frontier = vec![vec![dest]];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for path in frontier {
            for &v in &into[path[0]] {
                if v != dest && !path.contains(&v) {
                    let mut ext = vec![v];
                    ext.extend_from_slice(&path);
                    next.push(ext);
                }
            }
            out.push(path);
        }
        frontier = next;
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

/// Paths of `instance` as printable node sequences, in universe order.
pub fn enumerate_paths(instance: &SppInstance) -> Vec<String> {
    (0..instance.path_count())
        .map(|p| instance.format_path(p))
        .collect()
}

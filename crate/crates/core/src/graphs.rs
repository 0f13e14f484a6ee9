//! Multibranching diamond and Laakso graphs with canonical vertex labels,
//! exact shortest-path metrics, and the structural queries the embeddings
//! rely on (nested subdiamonds, the unique gate vertices of Laakso graphs,
//! direct vertical paths).
//!
//! Distances are held as integers in units of `base^-n` (base 2 for
//! diamonds, base 4 for Laakso graphs); no floating point appears anywhere
//! in this module.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::level::{Base, Level};
use crate::ratio::{format_rat, parse_rat, rat, Rat};

/// The two graph families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Diamond,
    Laakso,
}

impl Family {
    pub fn base(self) -> Base {
        match self {
            Family::Diamond => Base::Dyadic,
            Family::Laakso => Base::Tetradic,
        }
    }
}

/// A vertex: its level and the label of its branch.
///
/// For diamonds the branch tuple has length exactly `s(level)`; for Laakso
/// graphs its length is at most `t(level)` and may be empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexLabel {
    pub level: Level,
    pub branch: Vec<u8>,
}

impl VertexLabel {
    pub fn new(level: Level, branch: Vec<u8>) -> Self {
        VertexLabel { level, branch }
    }

    /// Canonical text form: `p/q` for an empty branch, `p/q;j1,j2,...`
    /// otherwise.
    pub fn to_text(&self) -> String {
        if self.branch.is_empty() {
            format!("{}", self.level)
        } else {
            let js: Vec<String> = self.branch.iter().map(|j| j.to_string()).collect();
            format!("{};{}", self.level, js.join(","))
        }
    }

    /// Parses the canonical text form. The level expansion depth is taken
    /// from the denominator.
    pub fn parse(s: &str, base: Base) -> Result<Self> {
        let (level_str, branch_str) = match s.split_once(';') {
            Some((l, b)) => (l, Some(b)),
            None => (s, None),
        };
        let value = parse_rat(level_str)?;
        let mut n = 0u32;
        let mut denom = 1i64;
        while denom < *value.denom() {
            denom *= base.radix() as i64;
            n += 1;
        }
        let level = Level::expansion(base, value, n)?;
        let branch = match branch_str {
            None | Some("") => Vec::new(),
            Some(b) => b
                .split(',')
                .map(|j| {
                    j.trim()
                        .parse::<u8>()
                        .map_err(|_| Error::parse(format!("bad branch entry {j:?}")))
                })
                .collect::<Result<Vec<u8>>>()?,
        };
        Ok(VertexLabel { level, branch })
    }
}

impl fmt::Display for VertexLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

/// A constructed graph instance with its canonical vertex enumeration
/// (level order, then branch-lexicographic). Immutable after construction.
#[derive(Debug, Clone)]
pub struct GraphInstance {
    family: Family,
    n: u32,
    k: u32,
    vertices: Vec<VertexLabel>,
    index: HashMap<VertexLabel, usize>,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
    /// Laakso only: for each vertex the pair (gate below, gate above), i.e.
    /// the unique vertices through which every geodesic to the bottom / top
    /// must pass. `None` for the bottom and top themselves and for diamonds.
    gates: Vec<Option<(usize, usize)>>,
}

/// Exact all-pairs shortest-path distances in units of `base^-n`.
#[derive(Debug, Clone)]
pub struct MetricTable {
    base: Base,
    n: u32,
    dist: Vec<Vec<u32>>,
}

/// Position of one vertex relative to another along bottom-top geodesics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerticalRelation {
    /// `u` lies strictly above `v` on a direct vertical path.
    Above,
    /// `u` lies strictly below `v` on a direct vertical path.
    Below,
    /// No direct vertical path joins them.
    Incomparable,
}

/// Builds the labelled graph `D_{n,k}` or `L_{n,k}`.
pub fn build_graph(family: Family, n: u32, k: u32) -> Result<GraphInstance> {
    if k < 2 {
        return Err(Error::domain(format!("branching k = {k} must be at least 2")));
    }
    let base = family.base();
    let total = base.pow(n);

    // Recursion by edge rewriting, in units of base^-n from the start.
    // A working vertex is (units, branch); identity is the canonical label.
    let bottom = VertexLabel::new(Level::from_units(base, 0, n)?, vec![]);
    let top = VertexLabel::new(Level::from_units(base, total, n)?, vec![]);
    let mut vertices = vec![bottom, top];
    let mut index: HashMap<VertexLabel, usize> = HashMap::new();
    index.insert(vertices[0].clone(), 0);
    index.insert(vertices[1].clone(), 1);
    let mut edges: Vec<(usize, usize)> = vec![(0, 1)];
    let mut gates: Vec<Option<(usize, usize)>> = vec![None, None];

    let insert = |vertices: &mut Vec<VertexLabel>,
                      index: &mut HashMap<VertexLabel, usize>,
                      gates: &mut Vec<Option<(usize, usize)>>,
                      label: VertexLabel,
                      gate: Option<(usize, usize)>|
     -> Result<usize> {
        if index.contains_key(&label) {
            return Err(Error::domain(format!("duplicate label {label} during recursion")));
        }
        let id = vertices.len();
        index.insert(label.clone(), id);
        vertices.push(label);
        gates.push(gate);
        Ok(id)
    };

    for step in 1..=n {
        let gap = base.pow(n - step); // units between consecutive new levels
        let mut next_edges = Vec::with_capacity(edges.len() * 8);
        for &(a, b) in &edges {
            let (lo, hi) = if vertices[a].level <= vertices[b].level {
                (a, b)
            } else {
                (b, a)
            };
            let lo_units = vertices[lo].level.units(n);
            let parent_branch = longer_branch(&vertices[lo].branch, &vertices[hi].branch)?.to_vec();
            match family {
                Family::Diamond => {
                    let mid_level = Level::from_units(base, lo_units + gap, n)?;
                    for j in 1..=k as u8 {
                        let mut branch = parent_branch.clone();
                        branch.push(j);
                        let mid = insert(
                            &mut vertices,
                            &mut index,
                            &mut gates,
                            VertexLabel::new(mid_level.clone(), branch),
                            None,
                        )?;
                        next_edges.push((lo, mid));
                        next_edges.push((mid, hi));
                    }
                }
                Family::Laakso => {
                    let gate = Some((lo, hi));
                    let s1 = insert(
                        &mut vertices,
                        &mut index,
                        &mut gates,
                        VertexLabel::new(
                            Level::from_units(base, lo_units + gap, n)?,
                            parent_branch.clone(),
                        ),
                        gate,
                    )?;
                    let t1 = insert(
                        &mut vertices,
                        &mut index,
                        &mut gates,
                        VertexLabel::new(
                            Level::from_units(base, lo_units + 3 * gap, n)?,
                            parent_branch.clone(),
                        ),
                        gate,
                    )?;
                    next_edges.push((lo, s1));
                    let mid_level = Level::from_units(base, lo_units + 2 * gap, n)?;
                    for j in 1..=k as u8 {
                        let mut branch = parent_branch.clone();
                        branch.push(j);
                        let mid = insert(
                            &mut vertices,
                            &mut index,
                            &mut gates,
                            VertexLabel::new(mid_level.clone(), branch),
                            gate,
                        )?;
                        next_edges.push((s1, mid));
                        next_edges.push((mid, t1));
                    }
                    next_edges.push((t1, hi));
                }
            }
        }
        edges = next_edges;
    }

    // Re-enumerate canonically and remap everything.
    let mut order: Vec<usize> = (0..vertices.len()).collect();
    order.sort_by(|&a, &b| vertices[a].cmp(&vertices[b]));
    let mut remap = vec![0usize; vertices.len()];
    for (new, &old) in order.iter().enumerate() {
        remap[old] = new;
    }
    let mut new_vertices = vec![VertexLabel::new(Level::zero(base), vec![]); vertices.len()];
    let mut new_gates = vec![None; vertices.len()];
    for (old, label) in vertices.into_iter().enumerate() {
        new_vertices[remap[old]] = label;
        new_gates[remap[old]] = gates[old].map(|(a, b)| (remap[a], remap[b]));
    }
    let mut new_edges: Vec<(usize, usize)> = edges
        .into_iter()
        .map(|(a, b)| {
            let (a, b) = (remap[a], remap[b]);
            (a.min(b), a.max(b))
        })
        .collect();
    new_edges.sort_unstable();
    let index = new_vertices
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), i))
        .collect();
    let mut adj = vec![Vec::new(); new_vertices.len()];
    for &(a, b) in &new_edges {
        adj[a].push(b);
        adj[b].push(a);
    }

    Ok(GraphInstance {
        family,
        n,
        k,
        vertices: new_vertices,
        index,
        edges: new_edges,
        adj,
        gates: new_gates,
    })
}

fn longer_branch<'a>(a: &'a [u8], b: &'a [u8]) -> Result<&'a [u8]> {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if &long[..short.len()] != short {
        return Err(Error::domain(format!(
            "edge endpoints carry non-nested branches {a:?} / {b:?}"
        )));
    }
    Ok(long)
}

impl GraphInstance {
    pub fn family(&self) -> Family {
        self.family
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn base(&self) -> Base {
        self.family.base()
    }

    /// Edge weight: `base^-n`.
    pub fn unit(&self) -> Rat {
        rat(1, self.base().pow(self.n) as i64)
    }

    pub fn vertices(&self) -> &[VertexLabel] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_index(&self, v: &VertexLabel) -> Result<usize> {
        self.index
            .get(v)
            .copied()
            .ok_or_else(|| Error::domain(format!("vertex {v} not in graph")))
    }

    pub fn bottom(&self) -> usize {
        0
    }

    pub fn top(&self) -> usize {
        self.vertices.len() - 1
    }

    /// The unique gate pair (below, above) of a Laakso vertex: every
    /// geodesic to the bottom passes the first, every geodesic to the top
    /// passes the second.
    pub fn laakso_gates(&self, v: &VertexLabel) -> Result<(VertexLabel, VertexLabel)> {
        if self.family != Family::Laakso {
            return Err(Error::domain("gate vertices are defined for Laakso graphs"));
        }
        let i = self.vertex_index(v)?;
        match self.gates[i] {
            Some((lo, hi)) => Ok((self.vertices[lo].clone(), self.vertices[hi].clone())),
            None => Err(Error::domain(format!(
                "vertex {v} is the bottom or top and has no gates"
            ))),
        }
    }

    pub(crate) fn gate_indices(&self, i: usize) -> Option<(usize, usize)> {
        self.gates[i]
    }

    /// BFS over the unit-weight edges yields the exact metric.
    pub fn metric(&self) -> MetricTable {
        let v = self.vertices.len();
        let mut dist = vec![vec![u32::MAX; v]; v];
        for src in 0..v {
            let row = &mut dist[src];
            row[src] = 0;
            let mut queue = std::collections::VecDeque::from([src]);
            while let Some(x) = queue.pop_front() {
                for &y in &self.adj[x] {
                    if row[y] == u32::MAX {
                        row[y] = row[x] + 1;
                        queue.push_back(y);
                    }
                }
            }
        }
        MetricTable {
            base: self.base(),
            n: self.n,
            dist,
        }
    }

    /// All geodesic paths between two vertices, as index sequences. Only
    /// intended for desk-scale verification.
    pub fn all_geodesics(&self, metric: &MetricTable, u: usize, v: usize) -> Vec<Vec<usize>> {
        let mut paths = Vec::new();
        let mut current = vec![u];
        self.geodesic_dfs(metric, v, &mut current, &mut paths);
        paths
    }

    fn geodesic_dfs(
        &self,
        metric: &MetricTable,
        target: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let here = *current.last().unwrap();
        if here == target {
            out.push(current.clone());
            return;
        }
        for &next in &self.adj[here] {
            if metric.units(next, target) + 1 == metric.units(here, target) {
                current.push(next);
                self.geodesic_dfs(metric, target, current, out);
                current.pop();
            }
        }
    }
}

impl MetricTable {
    /// Distance in units of `base^-n`.
    pub fn units(&self, i: usize, j: usize) -> u32 {
        self.dist[i][j]
    }

    /// Exact distance as a rational.
    pub fn exact(&self, i: usize, j: usize) -> Rat {
        rat(self.dist[i][j] as i64, self.base.pow(self.n) as i64)
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }
}

/// Classifies the relative position of two distinct vertices.
///
/// A pair lies on a direct vertical path exactly when its distance equals
/// the level difference, by the edge-level property (every edge changes the
/// level by one unit) and monotone extension to a bottom-top geodesic.
pub fn vertical_relation(
    g: &GraphInstance,
    metric: &MetricTable,
    u: &VertexLabel,
    v: &VertexLabel,
) -> Result<VerticalRelation> {
    if u == v {
        return Err(Error::precondition("vertical relation requires distinct vertices"));
    }
    let i = g.vertex_index(u)?;
    let j = g.vertex_index(v)?;
    let (ui, uj) = (u.level.units(g.n), v.level.units(g.n));
    let diff = ui.abs_diff(uj);
    if metric.units(i, j) as u64 == diff {
        Ok(if ui > uj {
            VerticalRelation::Above
        } else {
            VerticalRelation::Below
        })
    } else {
        Ok(VerticalRelation::Incomparable)
    }
}

/// The nested subdiamond of height `2^-tau` containing a diamond vertex:
/// its bottom at the level truncation `R_tau` and its top one height above,
/// both labelled by initial segments of the vertex's branch.
pub fn subdiamond(v: &VertexLabel, tau: u32) -> Result<(VertexLabel, VertexLabel)> {
    if v.level.base() != Base::Dyadic {
        return Err(Error::domain("subdiamonds are defined for diamond vertices"));
    }
    if v.level.is_one() {
        return Err(Error::domain("the top vertex determines no subdiamond"));
    }
    let s = v.level.depth();
    if tau > s {
        return Err(Error::domain(format!("tau = {tau} exceeds s(level) = {s}")));
    }
    debug_assert_eq!(v.branch.len(), s as usize, "diamond branch length is s(level)");
    let bottom_level = v.level.truncate(tau);
    let top_value = bottom_level.value() + rat(1, 2i64.pow(tau));
    let top_level = Level::expansion(Base::Dyadic, top_value, tau)?;
    let bottom = VertexLabel::new(
        bottom_level.clone(),
        v.branch[..bottom_level.depth() as usize].to_vec(),
    );
    let top = VertexLabel::new(
        top_level.clone(),
        v.branch[..top_level.depth() as usize].to_vec(),
    );
    Ok((bottom, top))
}

#[derive(Serialize, Deserialize)]
struct VertexJson {
    level: String,
    branch: Vec<u8>,
}

#[derive(Serialize, Deserialize)]
pub struct GraphJson {
    family: Family,
    n: u32,
    k: u32,
    unit: String,
    vertices: Vec<VertexJson>,
    edges: Vec<(usize, usize)>,
}

impl GraphInstance {
    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            family: self.family,
            n: self.n,
            k: self.k,
            unit: format_rat(&self.unit()),
            vertices: self
                .vertices
                .iter()
                .map(|v| VertexJson {
                    level: format!("{}", v.level),
                    branch: v.branch.clone(),
                })
                .collect(),
            edges: self.edges.clone(),
        }
    }

    /// DOT rendering with the canonical vertex order.
    pub fn to_dot(&self) -> String {
        let name = match self.family {
            Family::Diamond => "diamond",
            Family::Laakso => "laakso",
        };
        let mut out = format!("graph {name}_{}_{} {{\n", self.n, self.k);
        for v in &self.vertices {
            out.push_str(&format!("  \"{}\";\n", v.to_text()));
        }
        for &(a, b) in &self.edges {
            out.push_str(&format!(
                "  \"{}\" -- \"{}\";\n",
                self.vertices[a].to_text(),
                self.vertices[b].to_text()
            ));
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::rat_int;

    fn diamond(n: u32, k: u32) -> GraphInstance {
        build_graph(Family::Diamond, n, k).unwrap()
    }

    fn laakso(n: u32, k: u32) -> GraphInstance {
        build_graph(Family::Laakso, n, k).unwrap()
    }

    /// Count oracle: V_n = V_(n-1) + k E_(n-1), E_n = 2k E_(n-1) for
    /// diamonds; V_n = V_(n-1) + (k+2) E_(n-1), E_n = (2k+2) E_(n-1) for
    /// Laakso graphs.
    fn expected_counts(family: Family, n: u32, k: u64) -> (u64, u64) {
        let (mut v, mut e) = (2u64, 1u64);
        for _ in 0..n {
            match family {
                Family::Diamond => {
                    v += k * e;
                    e *= 2 * k;
                }
                Family::Laakso => {
                    v += (k + 2) * e;
                    e *= 2 * k + 2;
                }
            }
        }
        (v, e)
    }

    #[test]
    fn counts_match_recurrence_oracle() {
        for (n, k) in [(0, 3), (1, 2), (1, 3), (2, 2), (2, 3), (3, 2)] {
            let g = diamond(n, k);
            let (v, e) = expected_counts(Family::Diamond, n, k as u64);
            assert_eq!(g.vertex_count() as u64, v, "D({n},{k}) vertices");
            assert_eq!(g.edge_count() as u64, e, "D({n},{k}) edges");
            assert_eq!(g.edge_count() as u64, (2 * k as u64).pow(n), "edge closed form");
        }
        for (n, k) in [(1, 2), (1, 3), (2, 2)] {
            let g = laakso(n, k);
            let (v, e) = expected_counts(Family::Laakso, n, k as u64);
            assert_eq!(g.vertex_count() as u64, v, "L({n},{k}) vertices");
            assert_eq!(g.edge_count() as u64, e, "L({n},{k}) edges");
        }
        // the definition's explicit counts for the first Laakso graph
        let g = laakso(1, 3);
        assert_eq!(g.vertex_count(), 7);
        assert_eq!(g.edge_count(), 8);
    }

    #[test]
    fn every_edge_spans_one_level_unit() {
        for g in [diamond(2, 3), diamond(3, 2), laakso(2, 2)] {
            for &(a, b) in g.edges() {
                let la = g.vertices()[a].level.units(g.n());
                let lb = g.vertices()[b].level.units(g.n());
                assert_eq!(la.abs_diff(lb), 1);
            }
        }
    }

    #[test]
    fn metric_normalization_and_axioms() {
        for g in [diamond(2, 2), laakso(1, 3)] {
            let m = g.metric();
            let total = g.base().pow(g.n()) as u32;
            assert_eq!(m.units(g.bottom(), g.top()), total);
            assert_eq!(m.exact(g.bottom(), g.top()), rat_int(1));
            let v = g.vertex_count();
            for i in 0..v {
                assert_eq!(m.units(i, i), 0);
                for j in 0..v {
                    assert_eq!(m.units(i, j), m.units(j, i));
                    for l in 0..v {
                        assert!(m.units(i, l) <= m.units(i, j) + m.units(j, l));
                    }
                }
            }
        }
    }

    #[test]
    fn midpoints_of_first_diamond_are_mutually_far() {
        let g = diamond(1, 4);
        let m = g.metric();
        let mids: Vec<usize> = (0..g.vertex_count())
            .filter(|&i| i != g.bottom() && i != g.top())
            .collect();
        for &a in &mids {
            for &b in &mids {
                if a != b {
                    assert_eq!(m.exact(a, b), rat_int(1));
                }
            }
        }
    }

    #[test]
    fn vertical_distance_equals_level_difference() {
        // same-branch-prefix pairs are geodesically aligned
        let g = diamond(2, 2);
        let m = g.metric();
        let u = VertexLabel::parse("1/2;1", Base::Dyadic).unwrap();
        let v = VertexLabel::parse("3/4;1,2", Base::Dyadic).unwrap();
        let (ui, vi) = (g.vertex_index(&u).unwrap(), g.vertex_index(&v).unwrap());
        assert_eq!(m.exact(ui, vi), rat(1, 4));
        assert_eq!(
            vertical_relation(&g, &m, &u, &v).unwrap(),
            VerticalRelation::Below
        );
        assert_eq!(
            vertical_relation(&g, &m, &v, &u).unwrap(),
            VerticalRelation::Above
        );
    }

    #[test]
    fn distinct_midpoints_are_incomparable() {
        let g = diamond(1, 3);
        let m = g.metric();
        let u = VertexLabel::parse("1/2;1", Base::Dyadic).unwrap();
        let v = VertexLabel::parse("1/2;2", Base::Dyadic).unwrap();
        assert_eq!(
            vertical_relation(&g, &m, &u, &v).unwrap(),
            VerticalRelation::Incomparable
        );
        assert!(vertical_relation(&g, &m, &u, &u).is_err());
    }

    #[test]
    fn subdiamond_example() {
        // the worked example at level 13/16 with branch (1,2,3,4)
        let v = VertexLabel::parse("13/16;1,2,3,4", Base::Dyadic).unwrap();
        let (b0, t0) = subdiamond(&v, 0).unwrap();
        assert_eq!(b0.to_text(), "0");
        assert_eq!(t0.to_text(), "1");
        let (b2, t2) = subdiamond(&v, 2).unwrap();
        assert_eq!(b2.to_text(), "3/4;1,2");
        assert_eq!(t2.to_text(), "1");
        let (b3, t3) = subdiamond(&v, 3).unwrap();
        assert_eq!(b3.to_text(), "3/4;1,2");
        assert_eq!(t3.to_text(), "7/8;1,2,3");
        let (b4, t4) = subdiamond(&v, 4).unwrap();
        assert_eq!(b4, v);
        assert_eq!(t4.to_text(), "7/8;1,2,3");
        assert!(subdiamond(&v, 5).is_err());
        let top = VertexLabel::parse("1", Base::Dyadic).unwrap();
        assert!(subdiamond(&top, 0).is_err());
    }

    #[test]
    fn subdiamonds_nest() {
        let g = diamond(3, 2);
        let m = g.metric();
        for v in g.vertices() {
            if v.level.is_one() {
                continue;
            }
            let mut prev: Option<(VertexLabel, VertexLabel)> = None;
            for tau in 0..=v.level.depth() {
                let (b, t) = subdiamond(v, tau).unwrap();
                let (bi, ti) = (g.vertex_index(&b).unwrap(), g.vertex_index(&t).unwrap());
                let vi = g.vertex_index(v).unwrap();
                // v lies inside: distances to bottom/top of the subdiamond
                // are realized by the level differences
                assert_eq!(
                    m.units(vi, bi) as u64,
                    v.level.units(g.n()) - b.level.units(g.n())
                );
                assert_eq!(
                    m.units(vi, ti) as u64,
                    t.level.units(g.n()) - v.level.units(g.n())
                );
                if let Some((pb, pt)) = prev {
                    assert!(pb.level <= b.level && t.level <= pt.level);
                }
                prev = Some((b, t));
            }
        }
    }

    #[test]
    fn laakso_gates_in_first_graph() {
        let g = laakso(1, 3);
        let vi = VertexLabel::parse("1/2;1", Base::Tetradic).unwrap();
        let (lo, hi) = g.laakso_gates(&vi).unwrap();
        assert_eq!(lo.to_text(), "0");
        assert_eq!(hi.to_text(), "1");
        let s1 = VertexLabel::parse("1/4", Base::Tetradic).unwrap();
        let (lo, hi) = g.laakso_gates(&s1).unwrap();
        assert_eq!(lo.to_text(), "0");
        assert_eq!(hi.to_text(), "1");
        let bottom = VertexLabel::parse("0", Base::Tetradic).unwrap();
        assert!(g.laakso_gates(&bottom).is_err());
    }

    #[test]
    fn laakso_gate_levels_follow_digit_formula() {
        let g = laakso(2, 2);
        for v in g.vertices() {
            let t = v.level.depth();
            if v.level.is_zero() || v.level.is_one() {
                continue;
            }
            let (lo, hi) = g.laakso_gates(v).unwrap();
            let d = v.level.digit(t) as i64;
            let p = 4i64.pow(t);
            assert_eq!(lo.level.value(), v.level.value() - rat(d, p));
            assert_eq!(hi.level.value(), v.level.value() + rat(4 - d, p));
            assert!(lo.level.depth() < t && hi.level.depth() < t);
        }
    }

    #[test]
    fn laakso_geodesics_pass_the_gates() {
        for (n, k) in [(1, 2), (1, 3), (2, 2)] {
            let g = laakso(n, k);
            let m = g.metric();
            for (i, v) in g.vertices().iter().enumerate() {
                if v.level.is_zero() || v.level.is_one() {
                    continue;
                }
                let (lo, hi) = g.laakso_gates(v).unwrap();
                let lo = g.vertex_index(&lo).unwrap();
                let hi = g.vertex_index(&hi).unwrap();
                for path in g.all_geodesics(&m, i, g.bottom()) {
                    assert!(path.contains(&lo), "geodesic to bottom misses the lower gate");
                }
                for path in g.all_geodesics(&m, i, g.top()) {
                    assert!(path.contains(&hi), "geodesic to top misses the upper gate");
                }
            }
        }
    }

    #[test]
    fn nesting_is_isometric() {
        // the canonical inclusion of the (n-1)-st graph into the n-th
        for (family, n, k) in [
            (Family::Diamond, 2u32, 2u32),
            (Family::Diamond, 3, 2),
            (Family::Laakso, 2, 2),
        ] {
            let small = build_graph(family, n - 1, k).unwrap();
            let big = build_graph(family, n, k).unwrap();
            let ms = small.metric();
            let mb = big.metric();
            let embed: Vec<usize> = small
                .vertices()
                .iter()
                .map(|v| {
                    let lifted = VertexLabel::new(
                        Level::expansion(family.base(), v.level.value(), n).unwrap(),
                        v.branch.clone(),
                    );
                    big.vertex_index(&lifted).unwrap()
                })
                .collect();
            for i in 0..small.vertex_count() {
                for j in 0..small.vertex_count() {
                    assert_eq!(ms.exact(i, j), mb.exact(embed[i], embed[j]));
                }
            }
        }
    }

    #[test]
    fn canonical_order_and_json_shape() {
        let g = diamond(1, 3);
        let labels: Vec<String> = g.vertices().iter().map(|v| v.to_text()).collect();
        assert_eq!(labels, vec!["0", "1/2;1", "1/2;2", "1/2;3", "1"]);
        let js = serde_json::to_string(&g.to_json()).unwrap();
        assert!(js.contains("\"unit\":\"1/2\""));
        let dot = g.to_dot();
        assert!(dot.contains("\"0\" -- \"1/2;1\";"));
    }

    #[test]
    fn label_text_round_trip() {
        for s in ["0", "1", "13/16;1,2,3,4", "1/2;2"] {
            let v = VertexLabel::parse(s, Base::Dyadic).unwrap();
            assert_eq!(v.to_text(), s);
        }
    }

    #[test]
    fn rejects_small_k() {
        assert!(build_graph(Family::Diamond, 1, 1).is_err());
        assert!(build_graph(Family::Laakso, 1, 0).is_err());
    }
}

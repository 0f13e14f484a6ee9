//! The Laakso embedding: images of `L_{n,k}` vertices built by induction on
//! the tetradic depth of the level. Each gadget splits the single h-interval
//! that separates its two gate vertices; the lower quarter, the
//! Rademacher-selected middle quarters, and the upper quarter drive the
//! digit-1 / digit-2 / digit-3 vertices. The growth witnesses (one sign
//! tuple per gate pair and block) are produced constructively while
//! building and are the data behind the C-condition checks.

use std::collections::BTreeMap;
use std::collections::HashMap;

use serde::Serialize;

use crate::blocks::{h_interval, tuple_of_interval, BlockLayout, Interval, SignTuple};
use crate::embedding::{block_support, image_from_block_supports, EmbeddingTable};
use crate::error::{Error, Result};
use crate::graphs::{
    build_graph, vertical_relation, Family, GraphInstance, MetricTable, VertexLabel,
    VerticalRelation,
};
use crate::signvec::SignVector;

/// A built Laakso embedding: the table plus the per-gate-pair witnesses
/// recorded during construction.
#[derive(Debug, Clone)]
pub struct LaaksoEmbedding {
    table: EmbeddingTable,
    /// Per vertex, per block: the positive support as sorted disjoint
    /// intervals in block-local coordinates.
    supports: Vec<Vec<Vec<Interval>>>,
    /// For every gate pair (lower, upper) of consecutive scale vertices,
    /// the sign tuple whose h-interval is added when crossing the pair,
    /// one per block.
    witnesses: HashMap<(usize, usize), Vec<SignTuple>>,
}

impl LaaksoEmbedding {
    pub fn table(&self) -> &EmbeddingTable {
        &self.table
    }

    pub fn into_table(self) -> EmbeddingTable {
        self.table
    }

    pub fn witness(&self, lo: usize, hi: usize, nu: u64) -> Option<&SignTuple> {
        self.witnesses
            .get(&(lo, hi))
            .map(|per_block| &per_block[nu as usize])
    }

    pub fn supports(&self) -> &[Vec<Vec<Interval>>] {
        &self.supports
    }
}

fn sorted_insert(p: &mut Vec<Interval>, iv: Interval) {
    debug_assert!(p.iter().all(|q| q.disjoint(&iv)));
    let at = p.partition_point(|q| q.lo < iv.lo);
    p.insert(at, iv);
}

/// Builds `L_{n,k}` and the images of all its vertices.
pub fn embed_laakso(n: u32, k: u32, budget_log2: u32) -> Result<(GraphInstance, LaaksoEmbedding)> {
    let g = build_graph(Family::Laakso, n, k)?;
    let layout = BlockLayout::laakso(n, k, budget_log2)?;
    let blocks = layout.block_count();
    let order = layout.order;

    let mut supports: Vec<Vec<Vec<Interval>>> = vec![Vec::new(); g.vertex_count()];
    supports[g.bottom()] = vec![Vec::new(); blocks as usize];
    supports[g.top()] = vec![vec![h_interval(order, &[])?]; blocks as usize];

    let mut witnesses: HashMap<(usize, usize), Vec<SignTuple>> = HashMap::new();
    witnesses.insert(
        (g.bottom(), g.top()),
        vec![SignTuple::new(); blocks as usize],
    );

    // gadgets at depth t+1, grouped by their shared gate pair
    for depth in 1..=n {
        let mut gadgets: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (i, v) in g.vertices().iter().enumerate() {
            if v.level.depth() == depth && !v.level.is_zero() && !v.level.is_one() {
                let gates = g
                    .gate_indices(i)
                    .ok_or_else(|| Error::domain("interior vertex without gates"))?;
                gadgets.entry(gates).or_default().push(i);
            }
        }
        for ((lo, hi), members) in gadgets {
            let eps_per_block = witnesses
                .get(&(lo, hi))
                .ok_or_else(|| Error::domain("gate pair precedes its witness"))?
                .clone();
            // classify members by the new tetradic digit
            let mut quarter1 = None;
            let mut quarter3 = None;
            let mut middles = Vec::new();
            for &i in &members {
                match g.vertices()[i].level.digit(depth) {
                    1 => quarter1 = Some(i),
                    2 => middles.push(i),
                    3 => quarter3 = Some(i),
                    d => return Err(Error::domain(format!("unexpected digit {d} in gadget"))),
                }
            }
            let s1 = quarter1.ok_or_else(|| Error::domain("gadget missing its digit-1 vertex"))?;
            let t1 = quarter3.ok_or_else(|| Error::domain("gadget missing its digit-3 vertex"))?;
            if middles.len() != g.k() as usize {
                return Err(Error::domain("gadget missing middle vertices"));
            }
            // the shared label of the two quarter vertices is the longer of
            // the gate labels; middle labels extend it by one entry
            let star = g.vertices()[s1].branch.clone();
            debug_assert_eq!(star, g.vertices()[t1].branch);

            let mut sup_s1 = Vec::with_capacity(blocks as usize);
            let mut sup_t1 = Vec::with_capacity(blocks as usize);
            let mut sup_mid: Vec<Vec<Vec<Interval>>> =
                vec![Vec::with_capacity(blocks as usize); middles.len()];
            let mut wit_lo_s1 = Vec::with_capacity(blocks as usize);
            let mut wit_t1_hi = Vec::with_capacity(blocks as usize);
            let mut wit_s1_mid: Vec<Vec<SignTuple>> =
                vec![Vec::with_capacity(blocks as usize); middles.len()];
            let mut wit_mid_t1: Vec<Vec<SignTuple>> =
                vec![Vec::with_capacity(blocks as usize); middles.len()];

            for nu in 0..blocks {
                let eps = &eps_per_block[nu as usize];
                let r_star = layout.labels.rademacher(&star, nu)?;
                let with = |tail: &[i8]| -> SignTuple {
                    let mut t = eps.clone();
                    t.extend_from_slice(tail);
                    t
                };
                let base = &supports[lo][nu as usize];
                let lower_tuple = with(&[-1, r_star]);
                let lower = h_interval(order, &lower_tuple)?;

                let mut p = base.clone();
                sorted_insert(&mut p, lower);
                sup_s1.push(p.clone());

                for (mi, &mid) in middles.iter().enumerate() {
                    let r_mid = layout.labels.rademacher(&g.vertices()[mid].branch, nu)?;
                    let mid_tuple = with(&[1, r_mid]);
                    let mut pm = p.clone();
                    sorted_insert(&mut pm, h_interval(order, &mid_tuple)?);
                    sup_mid[mi].push(pm);
                    wit_s1_mid[mi].push(mid_tuple);
                    wit_mid_t1[mi].push(with(&[1, -r_mid]));
                }

                let mut pt = p;
                sorted_insert(&mut pt, h_interval(order, &with(&[1]))?);
                sup_t1.push(pt);

                wit_lo_s1.push(lower_tuple);
                wit_t1_hi.push(with(&[-1, -r_star]));
            }

            supports[s1] = sup_s1;
            supports[t1] = sup_t1;
            witnesses.insert((lo, s1), wit_lo_s1);
            witnesses.insert((t1, hi), wit_t1_hi);
            for (mi, &mid) in middles.iter().enumerate() {
                supports[mid] = std::mem::take(&mut sup_mid[mi]);
                witnesses.insert((s1, mid), std::mem::take(&mut wit_s1_mid[mi]));
                witnesses.insert((mid, t1), std::mem::take(&mut wit_mid_t1[mi]));
            }
        }
    }

    let images: Vec<SignVector> = supports
        .iter()
        .map(|per_block| image_from_block_supports(&layout, per_block.iter()))
        .collect();
    let table = EmbeddingTable::new(layout, g.vertices().to_vec(), images);
    Ok((
        g,
        LaaksoEmbedding {
            table,
            supports,
            witnesses,
        },
    ))
}

/// Image of a single Laakso vertex (builds the whole induction and reads
/// off one image).
pub fn embed_laakso_vertex(n: u32, k: u32, v: &VertexLabel, budget_log2: u32) -> Result<SignVector> {
    let (_, emb) = embed_laakso(n, k, budget_log2)?;
    Ok(emb.table.image(v)?.clone())
}

/// The explicit first-graph embedding used as a warmup reference: the
/// digit-1 vertex takes the leftmost quarter `h_--`, middles add a
/// Rademacher-selected upper quarter, the digit-3 vertex takes everything
/// but the `h_-+` quarter.
pub fn laakso_warmup(k: u32, budget_log2: u32) -> Result<(GraphInstance, EmbeddingTable)> {
    let g = build_graph(Family::Laakso, 1, k)?;
    let layout = BlockLayout::laakso(1, k, budget_log2)?;
    let order = layout.order;
    let mut images = Vec::with_capacity(g.vertex_count());
    for v in g.vertices() {
        let mut per_block: Vec<Vec<Interval>> = Vec::with_capacity(layout.block_count() as usize);
        for nu in 0..layout.block_count() {
            let mut p = Vec::new();
            if v.level.is_one() {
                p.push(h_interval(order, &[])?);
            } else if !v.level.is_zero() {
                p.push(h_interval(order, &[-1, -1])?);
                match v.level.digit(1) {
                    1 => {}
                    2 => {
                        let r = layout.labels.rademacher(&v.branch, nu)?;
                        p.push(h_interval(order, &[1, r])?);
                    }
                    3 => p.push(h_interval(order, &[1])?),
                    d => return Err(Error::domain(format!("unexpected digit {d}"))),
                }
            }
            p.sort();
            per_block.push(p);
        }
        images.push(image_from_block_supports(&layout, per_block.iter()));
    }
    let table = EmbeddingTable::new(layout, g.vertices().to_vec(), images);
    Ok((g, table))
}

/// One violated growth condition.
#[derive(Debug, Clone, Serialize)]
pub struct CViolation {
    pub condition: &'static str,
    pub lower: String,
    pub upper: String,
    pub block: u64,
    pub detail: String,
}

/// Outcome of the C-condition sweep.
#[derive(Debug, Serialize)]
pub struct CReport {
    pub vertical_pairs: usize,
    pub gate_pairs: usize,
    pub violations: Vec<CViolation>,
}

impl CReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Set difference of two sorted disjoint interval lists.
fn interval_difference(upper: &[Interval], lower: &[Interval]) -> Vec<Interval> {
    let mut out = Vec::new();
    for iv in upper {
        let mut pieces = vec![*iv];
        for cut in lower {
            let mut next = Vec::new();
            for p in pieces {
                if p.disjoint(cut) {
                    next.push(p);
                    continue;
                }
                if p.lo < cut.lo {
                    next.push(Interval::new(p.lo, cut.lo - 1));
                }
                if cut.hi < p.hi {
                    next.push(Interval::new(cut.hi + 1, p.hi));
                }
            }
            pieces = next;
        }
        out.extend(pieces);
    }
    out.sort();
    out
}

/// Merges touching intervals, then greedily covers each maximal piece by
/// the largest aligned h-intervals. On a union of h-intervals this is the
/// unique minimal decomposition (no two sibling halves both appear).
fn minimal_h_cover(order: u32, diff: &[Interval]) -> Result<Vec<SignTuple>> {
    let mut merged: Vec<Interval> = Vec::new();
    for iv in diff {
        match merged.last_mut() {
            Some(last) if last.hi + 1 == iv.lo => last.hi = iv.hi,
            _ => merged.push(*iv),
        }
    }
    let mut tuples = Vec::new();
    for piece in merged {
        let mut lo = piece.lo;
        while lo <= piece.hi {
            // the largest power-of-two block aligned at lo that fits
            let align = (lo - 1).trailing_zeros().min(63);
            let mut size = 1u64 << align.min(order);
            while lo + size - 1 > piece.hi {
                size /= 2;
            }
            let iv = Interval::new(lo, lo + size - 1);
            let tuple = tuple_of_interval(order, iv).ok_or_else(|| {
                Error::domain(format!("{iv:?} is not an h-interval of order {order}"))
            })?;
            tuples.push(tuple);
            lo += size;
        }
    }
    Ok(tuples)
}

/// Verifies the growth conditions on a built embedding:
/// every directly-above pair decomposes as the lower support plus a
/// disjoint union of h-intervals avoiding the lower support (C1, C2) with
/// no two sibling halves (C3), and every gate pair grows by exactly one
/// h-interval matching the recorded witness (C4).
pub fn verify_c_conditions(
    g: &GraphInstance,
    metric: &MetricTable,
    emb: &LaaksoEmbedding,
) -> Result<CReport> {
    let layout = emb.table.layout();
    let blocks = layout.block_count();
    let mut violations = Vec::new();
    let mut vertical_pairs = 0usize;

    for i in 0..g.vertex_count() {
        for j in (i + 1)..g.vertex_count() {
            let (u, v) = (&g.vertices()[i], &g.vertices()[j]);
            let (lo, hi) = match vertical_relation(g, metric, u, v)? {
                VerticalRelation::Below => (i, j),
                VerticalRelation::Above => (j, i),
                VerticalRelation::Incomparable => continue,
            };
            vertical_pairs += 1;
            for nu in 0..blocks {
                let upper = &emb.supports[hi][nu as usize];
                let lower = &emb.supports[lo][nu as usize];
                let diff = interval_difference(upper, lower);
                // C2: the added sets avoid the lower support entirely
                let back = interval_difference(upper, &diff);
                let lower_total: u64 = lower.iter().map(Interval::card).sum();
                let back_total: u64 = back.iter().map(Interval::card).sum();
                if lower_total != back_total {
                    violations.push(CViolation {
                        condition: "C2",
                        lower: g.vertices()[lo].to_text(),
                        upper: g.vertices()[hi].to_text(),
                        block: nu,
                        detail: "lower support not contained in upper support".into(),
                    });
                    continue;
                }
                let tuples = match minimal_h_cover(layout.order, &diff) {
                    Ok(t) => t,
                    Err(e) => {
                        violations.push(CViolation {
                            condition: "C1",
                            lower: g.vertices()[lo].to_text(),
                            upper: g.vertices()[hi].to_text(),
                            block: nu,
                            detail: e.to_string(),
                        });
                        continue;
                    }
                };
                // C3: no two sibling halves may both appear
                for a in 0..tuples.len() {
                    for b in (a + 1)..tuples.len() {
                        let (x, y) = (&tuples[a], &tuples[b]);
                        if x.len() == y.len()
                            && !x.is_empty()
                            && x[..x.len() - 1] == y[..y.len() - 1]
                            && x.last() != y.last()
                        {
                            violations.push(CViolation {
                                condition: "C3",
                                lower: g.vertices()[lo].to_text(),
                                upper: g.vertices()[hi].to_text(),
                                block: nu,
                                detail: format!("sibling tuples {x:?} and {y:?}"),
                            });
                        }
                    }
                }
            }
        }
    }

    // C4 over the recorded gate pairs, in deterministic order
    let mut gate_pairs = 0usize;
    let mut keys: Vec<(usize, usize)> = emb.witnesses.keys().copied().collect();
    keys.sort_unstable();
    for (lo, hi) in keys {
        let per_block = &emb.witnesses[&(lo, hi)];
        gate_pairs += 1;
        for nu in 0..blocks {
            let upper = &emb.supports[hi][nu as usize];
            let lower = &emb.supports[lo][nu as usize];
            let diff = interval_difference(upper, lower);
            let tuples = minimal_h_cover(layout.order, &diff)?;
            let expected = &per_block[nu as usize];
            if tuples.len() != 1 || &tuples[0] != expected {
                violations.push(CViolation {
                    condition: "C4",
                    lower: g.vertices()[lo].to_text(),
                    upper: g.vertices()[hi].to_text(),
                    block: nu,
                    detail: format!("decomposition {tuples:?}, recorded witness {expected:?}"),
                });
            }
        }
    }

    Ok(CReport {
        vertical_pairs,
        gate_pairs,
        violations,
    })
}

/// Cross-checks each stored support against the assembled image.
pub fn check_supports_match_images(emb: &LaaksoEmbedding) -> Result<()> {
    let layout = emb.table.layout();
    for (i, per_block) in emb.supports.iter().enumerate() {
        let image = emb.table.image_at(i);
        for nu in 0..layout.block_count() {
            let from_image = block_support(layout, image, nu)?;
            let mut stored = per_block[nu as usize].clone();
            stored.sort();
            // canonical run merge may join touching intervals
            let canon = |ivs: &[Interval]| -> Vec<Interval> {
                let mut out: Vec<Interval> = Vec::new();
                for iv in ivs {
                    match out.last_mut() {
                        Some(last) if last.hi + 1 == iv.lo => last.hi = iv.hi,
                        _ => out.push(*iv),
                    }
                }
                out
            };
            if canon(&from_image) != canon(&stored) {
                return Err(Error::domain(format!(
                    "support/image mismatch at vertex {i} block {nu}"
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axioms::NormKind;
    use crate::distortion::distortion_report;
    use crate::level::Base;
    use crate::ratio::{rat, rat_int};

    fn label(s: &str) -> VertexLabel {
        VertexLabel::parse(s, Base::Tetradic).unwrap()
    }

    #[test]
    fn warmup_block_patterns() {
        let (g, table) = laakso_warmup(2, 20).unwrap();
        let block = |s: &str| -> String {
            table.image(&label(s)).unwrap().to_pattern(8)
        };
        assert_eq!(block("1/4"), "+000000-");
        assert_eq!(block("3/4"), "+0++--0-");
        assert_eq!(block("1"), "++++----");
        assert!(table.image(&label("0")).unwrap().is_zero());
        // middle vertices split by the Rademacher sign: block 0 has r = +1
        let v1 = table.image(&label("1/2;1")).unwrap();
        assert_eq!(v1.to_pattern(8), "+00+-00-");
        let _ = g;
    }

    #[test]
    fn warmup_norm_ladder_and_separation() {
        for k in [2u32, 3] {
            let (g, table) = laakso_warmup(k, 20).unwrap();
            for norm in [NormKind::L1, NormKind::Summing] {
                let nt = table.scale(norm);
                assert_eq!(norm.eval(table.image(&label("1/4")).unwrap()), nt / rat_int(4));
                assert_eq!(
                    norm.eval(table.image(&label("3/4")).unwrap()),
                    nt * rat(3, 4)
                );
                for j in 1..=k as u8 {
                    let x = table.image(&label(&format!("1/2;{j}"))).unwrap();
                    assert_eq!(norm.eval(x), nt / rat_int(2));
                }
                for a in 1..=k as u8 {
                    for b in (a + 1)..=k as u8 {
                        let xa = table.image(&label(&format!("1/2;{a}"))).unwrap();
                        let xb = table.image(&label(&format!("1/2;{b}"))).unwrap();
                        assert!(norm.eval(&xa.sub(xb)) >= nt / rat_int(8));
                    }
                }
            }
            let m = g.metric();
            for norm in [NormKind::L1, NormKind::Summing] {
                let rep = distortion_report(&g, &m, &table, norm).unwrap();
                assert!(rep.passed(), "warmup k={k} {:?}", norm);
            }
        }
    }

    #[test]
    fn general_first_graph_satisfies_all_conditions() {
        let (g, emb) = embed_laakso(1, 2, 20).unwrap();
        let m = g.metric();
        check_supports_match_images(&emb).unwrap();
        let report = verify_c_conditions(&g, &m, &emb).unwrap();
        assert!(report.passed(), "{:?}", report.violations);
        // the gate pair (top of gadget, graph top) exists with 2k+2 edges
        assert_eq!(report.gate_pairs, 1 + 6);
    }

    #[test]
    fn images_scale_with_level_in_l1() {
        let (g, emb) = embed_laakso(2, 2, 20).unwrap();
        let top_l1 = emb.table().scale(NormKind::L1);
        for (i, v) in g.vertices().iter().enumerate() {
            assert_eq!(emb.table().image_at(i).l1_norm(), v.level.value() * top_l1);
        }
    }

    #[test]
    fn cardinality_law() {
        for (n, k) in [(1u32, 2u32), (1, 3), (2, 2)] {
            let (g, emb) = embed_laakso(n, k, 20).unwrap();
            let layout = emb.table().layout();
            for (i, v) in g.vertices().iter().enumerate() {
                let expected = v.level.units(n);
                for nu in 0..layout.block_count() {
                    let total: u64 = emb.supports[i][nu as usize]
                        .iter()
                        .map(Interval::card)
                        .sum();
                    assert_eq!(total, expected, "vertex {v} block {nu}");
                }
            }
        }
    }

    #[test]
    fn middle_additions_have_two_tuples() {
        // crossing from a middle vertex to the upper gate adds two
        // h-intervals; the single-tuple law holds only for gate pairs
        let (g, emb) = embed_laakso(1, 2, 20).unwrap();
        let m = g.metric();
        let layout = emb.table().layout();
        let vi = g.vertex_index(&label("1/2;1")).unwrap();
        let top = g.top();
        let _ = m;
        for nu in 0..layout.block_count() {
            let diff = interval_difference(
                &emb.supports[top][nu as usize],
                &emb.supports[vi][nu as usize],
            );
            let tuples = minimal_h_cover(layout.order, &diff).unwrap();
            assert_eq!(tuples.len(), 2, "block {nu}");
        }
    }

    #[test]
    fn meeting_vertex_decomposition() -> crate::error::Result<()> {
        // every incomparable pair splits through a vertex directly below or
        // directly above both, with additive distances
        for (n, k) in [(1u32, 3u32), (2, 2)] {
            let g = build_graph(Family::Laakso, n, k).unwrap();
            let m = g.metric();
            for i in 0..g.vertex_count() {
                for j in (i + 1)..g.vertex_count() {
                    let (u, v) = (&g.vertices()[i], &g.vertices()[j]);
                    if vertical_relation(&g, &m, u, v)? != VerticalRelation::Incomparable {
                        continue;
                    }
                    let mut found = false;
                    for w in 0..g.vertex_count() {
                        if w == i || w == j {
                            continue;
                        }
                        if m.units(i, w) + m.units(w, j) != m.units(i, j) {
                            continue;
                        }
                        let wu = vertical_relation(&g, &m, &g.vertices()[w], u)?;
                        let wv = vertical_relation(&g, &m, &g.vertices()[w], v)?;
                        if (wu == VerticalRelation::Below && wv == VerticalRelation::Below)
                            || (wu == VerticalRelation::Above && wv == VerticalRelation::Above)
                        {
                            found = true;
                            // the bound d(u,v) <= 2 / 4^t(level(w)) for the
                            // deepest splitting vertex below both
                            if wu == VerticalRelation::Below {
                                let t = g.vertices()[w].level.depth();
                                assert!(
                                    m.exact(i, j) <= rat(2, 4i64.pow(t)),
                                    "distance bound at {u},{v} through {}",
                                    g.vertices()[w]
                                );
                            }
                            break;
                        }
                    }
                    assert!(found, "no meeting vertex for {u}, {v}");
                }
            }
        }
        Ok(())
    }

    #[test]
    fn distortion_within_bound() {
        for (n, k) in [(1u32, 2u32), (1, 3), (2, 2)] {
            let (g, emb) = embed_laakso(n, k, 20).unwrap();
            let m = g.metric();
            for norm in [NormKind::L1, NormKind::Summing] {
                let rep = distortion_report(&g, &m, emb.table(), norm).unwrap();
                assert!(rep.passed(), "L({n},{k}) {:?}: {rep:?}", norm);
                assert!(rep.distortion <= rat(8, 1));
            }
        }
    }
}

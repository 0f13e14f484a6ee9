//! The diamond embedding: images of `D_{n,k}` vertices assembled from `2^M`
//! shifted h-blocks, built both by the finite inductive procedure on block
//! supports and by the closed formula over h-summands. The two routes are
//! independent and must agree exactly.
//!
//! Also hosts the five-way classification of vertex pairs that drives the
//! distortion analysis: nested pairs and same-branch splits are vertically
//! isometric, the three fork cases carry the 1/8 co-Lipschitz bound.

use crate::blocks::{h_interval, h_vector, BlockLayout, Interval, SignTuple, DEFAULT_BLOCK_BUDGET_LOG2};
use crate::embedding::EmbeddingTable;
use crate::error::{Error, Result};
use crate::graphs::{build_graph, Family, GraphInstance, VertexLabel};
use crate::level::Base;
use crate::ratio::rat_int;
use crate::signvec::{RunBuilder, SignVector};

/// Embeds vertices of one diamond instance.
#[derive(Debug, Clone)]
pub struct DiamondEmbedder {
    layout: BlockLayout,
    n: u32,
}

impl DiamondEmbedder {
    pub fn new(n: u32, k: u32, budget_log2: u32) -> Result<Self> {
        Ok(DiamondEmbedder {
            layout: BlockLayout::diamond(n, k, budget_log2)?,
            n,
        })
    }

    pub fn layout(&self) -> &BlockLayout {
        &self.layout
    }

    fn validate(&self, v: &VertexLabel) -> Result<()> {
        if v.level.base() != Base::Dyadic {
            return Err(Error::domain("diamond vertices carry dyadic levels"));
        }
        if v.level.depth() > self.n || v.branch.len() != v.level.depth() as usize {
            return Err(Error::domain(format!("vertex {v} is not a vertex of this diamond")));
        }
        Ok(())
    }

    /// Positive support of the image in block `nu`, by the inductive
    /// procedure: walk the level digits, committing a nested h-interval for
    /// every 1-digit (its side chosen by the Rademacher sign of the branch
    /// prefix) and descending into the opposite side.
    fn block_support_inductive(&self, v: &VertexLabel, nu: u64) -> Result<Vec<Interval>> {
        let order = self.layout.order;
        if v.level.is_one() {
            return Ok(vec![h_interval(order, &[])?]);
        }
        let s = v.level.depth();
        let mut committed: Vec<Interval> = Vec::new();
        let mut eps: SignTuple = Vec::new();
        for a in 1..=s {
            let r = self.layout.labels.rademacher(&v.branch[..a as usize], nu)?;
            if v.level.digit(a) == 1 {
                let mut side = eps.clone();
                side.push(r);
                committed.push(h_interval(order, &side)?);
                if a == s {
                    break;
                }
                eps.push(-r);
            } else {
                eps.push(r);
            }
        }
        committed.sort();
        Ok(committed)
    }

    /// Image of a vertex by the inductive procedure.
    pub fn vertex_inductive(&self, v: &VertexLabel) -> Result<SignVector> {
        self.validate(v)?;
        if v.level.is_zero() {
            return Ok(SignVector::zero());
        }
        let mut b = RunBuilder::new();
        for nu in 0..self.layout.block_count() {
            let p = self.block_support_inductive(v, nu)?;
            let off = self.layout.block_offset(nu);
            let mut pieces: Vec<(Interval, i8)> = Vec::with_capacity(2 * p.len());
            for iv in &p {
                pieces.push((iv.shifted(off), 1));
                pieces.push((crate::blocks::reflect(self.layout.order, *iv).shifted(off), -1));
            }
            pieces.sort_by_key(|(iv, _)| iv.lo);
            for (iv, sign) in pieces {
                b.push(iv.lo, iv.card(), rat_int(sign as i64));
            }
        }
        Ok(b.finish())
    }

    /// Image of a vertex by the closed formula: in each block, the sum of
    /// the h-vectors indexed by the sign tuples
    /// `theta_a = ((-1)^d1 r_(J1), ..., (-1)^d(a-1) r_(J(a-1)), r_(Ja))`
    /// over the positions `a` with level digit 1.
    pub fn vertex_formula(&self, v: &VertexLabel) -> Result<SignVector> {
        self.validate(v)?;
        if v.level.is_zero() {
            return Ok(SignVector::zero());
        }
        if v.level.is_one() {
            let h = h_vector(self.layout.order, &[])?;
            let mut b = RunBuilder::new();
            for nu in 0..self.layout.block_count() {
                for r in h.shift(self.layout.block_offset(nu)).runs() {
                    b.push(r.start, r.len, r.val);
                }
            }
            return Ok(b.finish());
        }
        let s = v.level.depth();
        let mut b = RunBuilder::new();
        for nu in 0..self.layout.block_count() {
            let mut signs = Vec::with_capacity(s as usize);
            for a in 1..=s {
                signs.push(self.layout.labels.rademacher(&v.branch[..a as usize], nu)?);
            }
            let mut block = SignVector::zero();
            for a in 1..=s {
                if v.level.digit(a) != 1 {
                    continue;
                }
                let mut theta: SignTuple = Vec::with_capacity(a as usize);
                for i in 1..a {
                    let flip = if v.level.digit(i) == 1 { -1 } else { 1 };
                    theta.push(flip * signs[i as usize - 1]);
                }
                theta.push(signs[a as usize - 1]);
                block = block.add(&h_vector(self.layout.order, &theta)?);
            }
            for r in block.shift(self.layout.block_offset(nu)).runs() {
                b.push(r.start, r.len, r.val);
            }
        }
        Ok(b.finish())
    }
}

/// Builds `D_{n,k}` and the images of all its vertices (by the inductive
/// route), guarded by the block budget.
pub fn embed_diamond(n: u32, k: u32, budget_log2: u32) -> Result<(GraphInstance, EmbeddingTable)> {
    let g = build_graph(Family::Diamond, n, k)?;
    let emb = DiamondEmbedder::new(n, k, budget_log2)?;
    let images = g
        .vertices()
        .iter()
        .map(|v| emb.vertex_inductive(v))
        .collect::<Result<Vec<_>>>()?;
    let table = EmbeddingTable::new(emb.layout.clone(), g.vertices().to_vec(), images);
    Ok((g, table))
}

/// Same with the default block budget.
pub fn embed_diamond_default(n: u32, k: u32) -> Result<(GraphInstance, EmbeddingTable)> {
    embed_diamond(n, k, DEFAULT_BLOCK_BUDGET_LOG2)
}

/// The five-way pair classification behind the distortion bound, plus the
/// trivial case where one vertex is the bottom or the top.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiamondPairCase {
    /// One endpoint is the bottom or top vertex; exact by construction.
    Endpoint,
    /// No branch or digit disagreement up to the smaller depth: a nested
    /// pair on a common geodesic.
    Nested,
    /// First disagreement is a digit with equal branch entry: still on a
    /// common geodesic.
    SameBranchSplit,
    /// First disagreement forks the branch below both vertices.
    ForkBelow,
    /// First disagreement forks the branch above both vertices.
    ForkAbove,
    /// First disagreement forks both branch and digit.
    ForkMixed,
}

impl DiamondPairCase {
    /// Whether the pair lies on a direct vertical path.
    pub fn vertical(self) -> bool {
        matches!(
            self,
            DiamondPairCase::Endpoint | DiamondPairCase::Nested | DiamondPairCase::SameBranchSplit
        )
    }
}

/// Classifies a pair of distinct diamond vertices.
pub fn classify_diamond_pair(u: &VertexLabel, v: &VertexLabel) -> Result<DiamondPairCase> {
    if u == v {
        return Err(Error::precondition("classification requires distinct vertices"));
    }
    if u.level.is_zero() || u.level.is_one() || v.level.is_zero() || v.level.is_one() {
        return Ok(DiamondPairCase::Endpoint);
    }
    let bound = u.level.depth().min(v.level.depth());
    let beta = (1..=bound).find(|&a| {
        u.branch[a as usize - 1] != v.branch[a as usize - 1] || u.level.digit(a) != v.level.digit(a)
    });
    let beta = match beta {
        None => return Ok(DiamondPairCase::Nested),
        Some(b) => b,
    };
    let branch_differs = u.branch[beta as usize - 1] != v.branch[beta as usize - 1];
    let (du, dv) = (u.level.digit(beta), v.level.digit(beta));
    Ok(match (branch_differs, du == dv) {
        (false, false) => DiamondPairCase::SameBranchSplit,
        (true, true) if du == 0 => DiamondPairCase::ForkBelow,
        (true, true) => DiamondPairCase::ForkAbove,
        (true, false) => DiamondPairCase::ForkMixed,
        (false, true) => unreachable!("beta marks a disagreement"),
    })
}

/// First disagreement position of a classified pair, when one exists.
pub fn pair_split_position(u: &VertexLabel, v: &VertexLabel) -> Option<u32> {
    let bound = u.level.depth().min(v.level.depth());
    (1..=bound).find(|&a| {
        u.branch[a as usize - 1] != v.branch[a as usize - 1] || u.level.digit(a) != v.level.digit(a)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{vertical_relation, VerticalRelation};
    use crate::level::Level;
    use crate::ratio::rat;
    use num::Signed;

    fn label(s: &str) -> VertexLabel {
        VertexLabel::parse(s, Base::Dyadic).unwrap()
    }

    #[test]
    fn bottom_and_top_images() {
        let emb = DiamondEmbedder::new(1, 2, 20).unwrap();
        assert!(emb.vertex_inductive(&label("0")).unwrap().is_zero());
        let top = emb.vertex_inductive(&label("1")).unwrap();
        // 2^M = 4 shifted copies of ++--
        assert_eq!(top.to_pattern(16), "++--++--++--++--");
        assert_eq!(top.l1_norm(), rat_int(16));
        assert_eq!(top.summing_norm(), rat_int(2));
    }

    #[test]
    fn warmup_midpoints_pick_h_sides_by_rademacher() {
        // n = 1: the midpoint on branch j is h_+ or h_- per block as r_j says
        let emb = DiamondEmbedder::new(1, 2, 20).unwrap();
        let mid = label("1/2;1");
        for nu in 0..4u64 {
            let r = emb.layout.labels.rademacher(&[1], nu).unwrap();
            let got = emb.block_support_inductive(&mid, nu).unwrap();
            assert_eq!(got, vec![h_interval(1, &[r]).unwrap()]);
        }
        // frozen from the bit convention: r_1 = (+,+,-,-)
        let m1 = emb.vertex_inductive(&mid).unwrap();
        assert_eq!(m1.to_pattern(16), "0+-00+-0+00-+00-");
    }

    #[test]
    fn formula_equals_inductive_on_small_instances() {
        for (n, k) in [(1u32, 2u32), (1, 3), (2, 2)] {
            let g = build_graph(Family::Diamond, n, k).unwrap();
            let emb = DiamondEmbedder::new(n, k, 20).unwrap();
            for v in g.vertices() {
                let a = emb.vertex_inductive(v).unwrap();
                let b = emb.vertex_formula(v).unwrap();
                assert_eq!(a, b, "routes disagree at {v} in D({n},{k})");
            }
        }
    }

    #[test]
    fn images_scale_with_level_in_l1() {
        // bottom-anchored norms: |x_v|_1 = level * |x_top|_1
        let (g, table) = embed_diamond_default(2, 2).unwrap();
        let top_l1 = table.scale(crate::axioms::NormKind::L1);
        for (i, v) in g.vertices().iter().enumerate() {
            assert_eq!(
                table.image_at(i).l1_norm(),
                v.level.value() * top_l1,
                "at {v}"
            );
        }
    }

    #[test]
    fn rejects_foreign_vertices() {
        let emb = DiamondEmbedder::new(1, 2, 20).unwrap();
        assert!(emb.vertex_inductive(&label("1/4;1,1")).is_err());
        let laakso_level = VertexLabel::new(Level::expansion(Base::Tetradic, rat(1, 4), 1).unwrap(), vec![]);
        assert!(emb.vertex_inductive(&laakso_level).is_err());
    }

    #[test]
    fn classification_is_total_and_matches_verticality() {
        for (n, k) in [(2u32, 2u32), (2, 3), (3, 2)] {
            let g = build_graph(Family::Diamond, n, k).unwrap();
            let m = g.metric();
            for i in 0..g.vertex_count() {
                for j in (i + 1)..g.vertex_count() {
                    let (u, v) = (&g.vertices()[i], &g.vertices()[j]);
                    let case = classify_diamond_pair(u, v).unwrap();
                    let rel = vertical_relation(&g, &m, u, v).unwrap();
                    assert_eq!(
                        case.vertical(),
                        rel != VerticalRelation::Incomparable,
                        "case {case:?} vs relation {rel:?} for {u}, {v}"
                    );
                }
            }
        }
    }

    #[test]
    fn case_distance_formulas() {
        // the fork cases determine the metric through the split position
        for (n, k) in [(2u32, 2u32), (3, 2), (2, 3)] {
            let g = build_graph(Family::Diamond, n, k).unwrap();
            let m = g.metric();
            for i in 0..g.vertex_count() {
                for j in (i + 1)..g.vertex_count() {
                    let (u, v) = (&g.vertices()[i], &g.vertices()[j]);
                    let d = m.exact(i, j);
                    let case = classify_diamond_pair(u, v).unwrap();
                    let (lu, lv) = (u.level.value(), v.level.value());
                    match case {
                        DiamondPairCase::Endpoint
                        | DiamondPairCase::Nested
                        | DiamondPairCase::SameBranchSplit => {
                            assert_eq!(d, (lu - lv).abs(), "vertical distance at {u},{v}");
                        }
                        DiamondPairCase::ForkBelow => {
                            let beta = pair_split_position(u, v).unwrap();
                            let omega = u.level.truncate(beta).value();
                            assert_eq!(d, lu + lv - omega - omega, "below-fork at {u},{v}");
                        }
                        DiamondPairCase::ForkAbove => {
                            let beta = pair_split_position(u, v).unwrap();
                            let top = u.level.truncate(beta).value() + rat(1, 2i64.pow(beta));
                            assert_eq!(d, top - lu + top - lv, "above-fork at {u},{v}");
                        }
                        DiamondPairCase::ForkMixed => {
                            let beta = pair_split_position(u, v).unwrap();
                            let rl = u.level.truncate(beta - 1).value();
                            let through_bottom = lu + lv - rl - rl;
                            let through_top = rat(2, 2i64.pow(beta - 1)) - through_bottom;
                            assert_eq!(
                                d,
                                through_bottom.min(through_top),
                                "mixed fork at {u},{v}"
                            );
                        }
                    }
                }
            }
        }
    }
}

//! Exact distortion verification: the Lipschitz constant must equal the
//! scale (the norm of the top image), vertical pairs must be exactly
//! isometric after scaling, and every pair must respect the 1/8
//! co-Lipschitz bound. All comparisons are exact rational comparisons.

use serde::Serialize;

use crate::axioms::NormKind;
use crate::diamond::{classify_diamond_pair, DiamondPairCase};
use crate::embedding::EmbeddingTable;
use crate::error::{Error, Result};
use crate::graphs::{vertical_relation, Family, GraphInstance, MetricTable, VerticalRelation};
use crate::ratio::{approx, rat, rat_serde, Rat};

/// One vertex pair together with the ratio `|x_u - x_v| / d(u, v)`.
#[derive(Debug, Clone, Serialize)]
pub struct PairRatio {
    pub u: String,
    pub v: String,
    #[serde(with = "rat_serde")]
    pub distance: Rat,
    #[serde(with = "rat_serde")]
    pub image_distance: Rat,
    #[serde(with = "rat_serde")]
    pub ratio: Rat,
    pub ratio_approx: f64,
}

/// Per-case statistics for diamond instances.
#[derive(Debug, Clone, Serialize)]
pub struct CaseStat {
    pub case: String,
    pub pairs: usize,
    #[serde(with = "rat_serde")]
    pub min_ratio: Rat,
    /// `true` when the case demands exact isometry, `false` when it demands
    /// only the 1/8 bound.
    pub exact: bool,
    pub holds: bool,
}

/// Exact distortion data of one embedding under one norm.
#[derive(Debug, Clone, Serialize)]
pub struct DistortionReport {
    pub norm: NormKind,
    #[serde(with = "rat_serde")]
    pub scale: Rat,
    pub scale_approx: f64,
    #[serde(with = "rat_serde")]
    pub lipschitz: Rat,
    #[serde(with = "rat_serde")]
    pub colipschitz: Rat,
    #[serde(with = "rat_serde")]
    pub distortion: Rat,
    pub distortion_approx: f64,
    pub pair_count: usize,
    /// The Lipschitz constant equals the scale exactly.
    pub lipschitz_is_scale: bool,
    /// Every pair on a direct vertical path has ratio exactly `scale`.
    pub vertical_exact: bool,
    /// Every pair has ratio at least `scale / 8`.
    pub eighth_bound_holds: bool,
    pub worst_expansion: PairRatio,
    pub worst_contraction: PairRatio,
    /// Present for diamond instances: the five-case decomposition.
    pub diamond_cases: Option<Vec<CaseStat>>,
}

impl DistortionReport {
    /// The acceptance verdict: Lipschitz pinned to the scale, vertical
    /// isometry, and global distortion at most 8.
    pub fn passed(&self) -> bool {
        self.lipschitz_is_scale
            && self.vertical_exact
            && self.eighth_bound_holds
            && self.distortion <= rat(8, 1)
            && self
                .diamond_cases
                .as_ref()
                .map_or(true, |cs| cs.iter().all(|c| c.holds))
    }
}

fn case_name(case: DiamondPairCase) -> &'static str {
    match case {
        DiamondPairCase::Endpoint => "endpoint",
        DiamondPairCase::Nested => "nested",
        DiamondPairCase::SameBranchSplit => "same-branch-split",
        DiamondPairCase::ForkBelow => "fork-below",
        DiamondPairCase::ForkAbove => "fork-above",
        DiamondPairCase::ForkMixed => "fork-mixed",
    }
}

/// Sweeps all unordered vertex pairs and verifies the distortion laws.
pub fn distortion_report(
    g: &GraphInstance,
    metric: &MetricTable,
    table: &EmbeddingTable,
    norm: NormKind,
) -> Result<DistortionReport> {
    let v = g.vertex_count();
    if table.len() != v {
        return Err(Error::domain(format!(
            "table covers {} vertices, graph has {v}",
            table.len()
        )));
    }
    let scale = table.scale(norm);
    let eighth = scale / rat(8, 1);

    let mut lip: Option<(Rat, usize, usize)> = None;
    let mut colip: Option<(Rat, usize, usize)> = None;
    let mut vertical_exact = true;
    let mut eighth_bound_holds = true;
    let mut pair_count = 0usize;

    let all_cases = [
        DiamondPairCase::Endpoint,
        DiamondPairCase::Nested,
        DiamondPairCase::SameBranchSplit,
        DiamondPairCase::ForkBelow,
        DiamondPairCase::ForkAbove,
        DiamondPairCase::ForkMixed,
    ];
    let mut case_stats: Vec<(usize, Option<Rat>)> = vec![(0, None); all_cases.len()];

    for i in 0..v {
        for j in (i + 1)..v {
            let (u, w) = (&g.vertices()[i], &g.vertices()[j]);
            let d = metric.exact(i, j);
            let delta = table.image_at(i).sub(table.image_at(j));
            let nd = norm.eval(&delta);
            let ratio = nd / d;
            pair_count += 1;

            if lip.as_ref().map_or(true, |(r, _, _)| ratio > *r) {
                lip = Some((ratio, i, j));
            }
            if colip.as_ref().map_or(true, |(r, _, _)| ratio < *r) {
                colip = Some((ratio, i, j));
            }
            if ratio < eighth {
                eighth_bound_holds = false;
            }
            let vertical =
                vertical_relation(g, metric, u, w)? != VerticalRelation::Incomparable;
            if vertical && ratio != scale {
                vertical_exact = false;
            }
            if g.family() == Family::Diamond {
                let case = classify_diamond_pair(u, w)?;
                let slot = all_cases.iter().position(|c| *c == case).unwrap();
                case_stats[slot].0 += 1;
                let min = &mut case_stats[slot].1;
                if min.as_ref().map_or(true, |m| ratio < *m) {
                    *min = Some(ratio);
                }
            }
        }
    }

    let (lip, li, lj) = lip.ok_or_else(|| Error::domain("graph has fewer than two vertices"))?;
    let (colip, ci, cj) = colip.unwrap();
    let make_pair = |r: Rat, i: usize, j: usize| PairRatio {
        u: g.vertices()[i].to_text(),
        v: g.vertices()[j].to_text(),
        distance: metric.exact(i, j),
        image_distance: r * metric.exact(i, j),
        ratio: r,
        ratio_approx: approx(&r),
    };

    let diamond_cases = (g.family() == Family::Diamond).then(|| {
        all_cases
            .iter()
            .zip(&case_stats)
            .filter(|(_, (count, _))| *count > 0)
            .map(|(case, (count, min))| {
                let min = min.unwrap();
                let exact = case.vertical();
                CaseStat {
                    case: case_name(*case).to_string(),
                    pairs: *count,
                    min_ratio: min,
                    exact,
                    holds: if exact { min == scale } else { min >= eighth },
                }
            })
            .collect()
    });

    Ok(DistortionReport {
        norm,
        scale,
        scale_approx: approx(&scale),
        lipschitz: lip,
        colipschitz: colip,
        distortion: lip / colip,
        distortion_approx: approx(&(lip / colip)),
        pair_count,
        lipschitz_is_scale: lip == scale,
        vertical_exact,
        eighth_bound_holds,
        worst_expansion: make_pair(lip, li, lj),
        worst_contraction: make_pair(colip, ci, cj),
        diamond_cases,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diamond::embed_diamond_default;

    #[test]
    fn warmup_diamond_distortion_is_two() {
        // D(1,k): the k midpoints sit at mutual distance 1 but their images
        // are only scale/2 apart, so the measured distortion is exactly 2
        // under l1 (the proved bound is 4).
        for k in [2u32, 3, 4] {
            let (g, table) = embed_diamond_default(1, k).unwrap();
            let m = g.metric();
            let rep = distortion_report(&g, &m, &table, NormKind::L1).unwrap();
            assert!(rep.passed());
            assert_eq!(rep.distortion, rat(2, 1), "k = {k}");
            assert_eq!(rep.lipschitz, rep.scale);
        }
    }

    #[test]
    fn warmup_midpoint_separation() {
        // |m_i - m_j| >= |x_1|/4 for both norms
        for k in [2u32, 3, 4] {
            let (g, table) = embed_diamond_default(1, k).unwrap();
            for norm in [NormKind::L1, NormKind::Summing] {
                let scale = table.scale(norm);
                let mids: Vec<usize> = (1..g.vertex_count() - 1).collect();
                for &a in &mids {
                    for &b in &mids {
                        if a < b {
                            let d = norm.eval(&table.image_at(a).sub(table.image_at(b)));
                            assert!(d >= scale / rat(4, 1), "{:?} k={k}", norm);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn second_diamond_within_bound_under_both_norms() {
        let (g, table) = embed_diamond_default(2, 2).unwrap();
        let m = g.metric();
        for norm in [NormKind::L1, NormKind::Summing] {
            let rep = distortion_report(&g, &m, &table, norm).unwrap();
            assert!(rep.passed(), "{:?}: {rep:?}", norm);
            assert!(rep.distortion <= rat(8, 1));
            let cases = rep.diamond_cases.as_ref().unwrap();
            let total: usize = cases.iter().map(|c| c.pairs).sum();
            assert_eq!(total, rep.pair_count, "case partition covers all pairs");
        }
    }
}

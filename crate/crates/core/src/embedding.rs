//! The embedding-table container shared by both graph families, block
//! decomposition of images, and the structural laws every image must obey:
//! block symmetry, the per-block cardinality law, support monotonicity along
//! vertical paths, and the single-interval edge law.
//!
//! Every image is a `{0,+1,-1}`-valued vector split into `2^M` blocks. In
//! each block the image is `1 on P - 1 on reflect(P)` for a set `P` inside
//! the positive half; all laws are statements about these `P` sets.

use std::collections::BTreeMap;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::axioms::NormKind;
use crate::blocks::{BlockLayout, Interval};
use crate::error::{Error, Result};
use crate::graphs::{vertical_relation, GraphInstance, MetricTable, VertexLabel, VerticalRelation};
use crate::ratio::{rat_int, Rat};
use crate::signvec::SignVector;

/// Images of all vertices of one graph instance, in the graph's canonical
/// vertex order. Immutable once built.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    layout: BlockLayout,
    labels: Vec<VertexLabel>,
    images: Vec<SignVector>,
    index: HashMap<VertexLabel, usize>,
}

impl EmbeddingTable {
    pub fn new(layout: BlockLayout, labels: Vec<VertexLabel>, images: Vec<SignVector>) -> Self {
        assert_eq!(labels.len(), images.len());
        let index = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        EmbeddingTable {
            layout,
            labels,
            images,
            index,
        }
    }

    pub fn layout(&self) -> &BlockLayout {
        &self.layout
    }

    pub fn labels(&self) -> &[VertexLabel] {
        &self.labels
    }

    pub fn images(&self) -> &[SignVector] {
        &self.images
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn image(&self, v: &VertexLabel) -> Result<&SignVector> {
        let i = self
            .index
            .get(v)
            .ok_or_else(|| Error::domain(format!("no image for vertex {v}")))?;
        Ok(&self.images[*i])
    }

    pub fn image_at(&self, i: usize) -> &SignVector {
        &self.images[i]
    }

    /// The image of the top vertex sets the scale of the embedding.
    pub fn scale(&self, norm: NormKind) -> Rat {
        norm.eval(self.images.last().expect("nonempty table"))
    }

    /// Positive block support `P(nu)` of one image, in block-local
    /// coordinates `1..=half_len`. Fails if the block violates the
    /// `{0,+1,-1}` value law, the positive/negative half split, or the
    /// mirror symmetry.
    pub fn block_support(&self, image: &SignVector, nu: u64) -> Result<Vec<Interval>> {
        block_support(&self.layout, image, nu)
    }
}

/// Assembles an image from its per-block positive supports: each block gets
/// `+1` on the supports and `-1` on their reflections.
pub fn image_from_block_supports<'a>(
    layout: &BlockLayout,
    per_block: impl Iterator<Item = &'a Vec<Interval>>,
) -> SignVector {
    let mut b = crate::signvec::RunBuilder::new();
    for (nu, p) in per_block.enumerate() {
        let off = layout.block_offset(nu as u64);
        let mut pieces: Vec<(Interval, i8)> = Vec::with_capacity(2 * p.len());
        for iv in p {
            pieces.push((iv.shifted(off), 1));
            pieces.push((crate::blocks::reflect(layout.order, *iv).shifted(off), -1));
        }
        pieces.sort_by_key(|(iv, _)| iv.lo);
        for (iv, sign) in pieces {
            b.push(iv.lo, iv.card(), rat_int(sign as i64));
        }
    }
    b.finish()
}

/// Positive block support of an image under a layout; see
/// [`EmbeddingTable::block_support`].
pub fn block_support(layout: &BlockLayout, image: &SignVector, nu: u64) -> Result<Vec<Interval>> {
    let off = layout.block_offset(nu);
    let block_len = layout.block_len();
    let half = layout.half_len();
    let one = rat_int(1);

    let runs = image.runs();
    // first run that can intersect the block
    let from = runs.partition_point(|r| r.end() < off + 1);
    let mut pos: Vec<Interval> = Vec::new();
    let mut neg: Vec<Interval> = Vec::new();
    for r in &runs[from..] {
        if r.start > off + block_len {
            break;
        }
        let lo = r.start.max(off + 1) - off;
        let hi = r.end().min(off + block_len) - off;
        if r.val == one {
            pos.push(Interval::new(lo, hi));
        } else if r.val == -one {
            neg.push(Interval::new(lo, hi));
        } else {
            return Err(Error::domain(format!(
                "block {nu} carries value {} outside {{0,+1,-1}}",
                r.val
            )));
        }
    }
    if let Some(bad) = pos.iter().find(|iv| iv.hi > half) {
        return Err(Error::domain(format!(
            "block {nu}: positive support {bad:?} leaves the positive half"
        )));
    }
    if let Some(bad) = neg.iter().find(|iv| iv.lo <= half) {
        return Err(Error::domain(format!(
            "block {nu}: negative support {bad:?} enters the positive half"
        )));
    }
    // mirror symmetry: negatives are exactly the reflected positives
    let mut mirrored: Vec<Interval> = pos
        .iter()
        .map(|iv| crate::blocks::reflect(layout.order, *iv))
        .collect();
    mirrored.sort();
    if mirrored != neg {
        return Err(Error::domain(format!(
            "block {nu}: negative part is not the reflected positive part"
        )));
    }
    Ok(pos)
}

fn support_card(p: &[Interval]) -> u64 {
    p.iter().map(Interval::card).sum()
}

fn support_contains(outer: &[Interval], inner: &[Interval]) -> bool {
    // both sorted and disjoint; every inner interval must be covered by
    // outer intervals (which may be split differently)
    let mut cover: Vec<(u64, u64)> = Vec::new();
    for iv in outer {
        match cover.last_mut() {
            Some(last) if last.1 + 1 == iv.lo => last.1 = iv.hi,
            _ => cover.push((iv.lo, iv.hi)),
        }
    }
    'next: for iv in inner {
        for &(lo, hi) in &cover {
            if lo <= iv.lo && iv.hi <= hi {
                continue 'next;
            }
        }
        return false;
    }
    true
}

/// One violated law, with enough context to reproduce it.
#[derive(Debug, Clone, Serialize)]
pub struct LawViolation {
    pub law: &'static str,
    pub vertex: String,
    pub other: Option<String>,
    pub block: u64,
    pub detail: String,
}

/// Outcome of the structural-law sweep over a full table.
#[derive(Debug, Serialize)]
pub struct StructuralReport {
    pub blocks_checked: u64,
    pub violations: Vec<LawViolation>,
}

impl StructuralReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks, for every vertex and block: block symmetry and the cardinality
/// law `card(P(nu)) = level in units of base^-n`; for every vertical pair:
/// support monotonicity; for every edge: the single-interval growth law.
pub fn check_structural_laws(
    g: &GraphInstance,
    metric: &MetricTable,
    table: &EmbeddingTable,
) -> Result<StructuralReport> {
    let layout = table.layout();
    let blocks = layout.block_count();
    let n = g.n();
    let mut violations = Vec::new();

    // per-vertex supports, kept for the pairwise laws
    let mut supports: Vec<Vec<Vec<Interval>>> = Vec::with_capacity(table.len());
    for (i, v) in g.vertices().iter().enumerate() {
        let image = table.image_at(i);
        let expected = v.level.units(n);
        let mut per_block = Vec::with_capacity(blocks as usize);
        for nu in 0..blocks {
            match table.block_support(image, nu) {
                Ok(p) => {
                    if support_card(&p) != expected {
                        violations.push(LawViolation {
                            law: "cardinality",
                            vertex: v.to_text(),
                            other: None,
                            block: nu,
                            detail: format!(
                                "card(P) = {}, expected {expected}",
                                support_card(&p)
                            ),
                        });
                    }
                    per_block.push(p);
                }
                Err(e) => {
                    violations.push(LawViolation {
                        law: "block-symmetry",
                        vertex: v.to_text(),
                        other: None,
                        block: nu,
                        detail: e.to_string(),
                    });
                    per_block.push(Vec::new());
                }
            }
        }
        supports.push(per_block);
    }

    // monotone supports along vertical pairs
    for i in 0..g.vertex_count() {
        for j in (i + 1)..g.vertex_count() {
            let (u, v) = (&g.vertices()[i], &g.vertices()[j]);
            let rel = vertical_relation(g, metric, u, v)?;
            let (lo, hi) = match rel {
                VerticalRelation::Below => (i, j),
                VerticalRelation::Above => (j, i),
                VerticalRelation::Incomparable => continue,
            };
            for nu in 0..blocks {
                if !support_contains(&supports[hi][nu as usize], &supports[lo][nu as usize]) {
                    violations.push(LawViolation {
                        law: "monotone-support",
                        vertex: g.vertices()[lo].to_text(),
                        other: Some(g.vertices()[hi].to_text()),
                        block: nu,
                        detail: "lower support not contained in upper support".into(),
                    });
                }
            }
        }
    }

    // edge law: the difference grows by a single unit interval per block
    for &(a, b) in g.edges() {
        let (lo, hi) = if g.vertices()[a].level <= g.vertices()[b].level {
            (a, b)
        } else {
            (b, a)
        };
        for nu in 0..blocks {
            let up = &supports[hi][nu as usize];
            let down = &supports[lo][nu as usize];
            if support_card(up) != support_card(down) + 1 {
                violations.push(LawViolation {
                    law: "edge-growth",
                    vertex: g.vertices()[lo].to_text(),
                    other: Some(g.vertices()[hi].to_text()),
                    block: nu,
                    detail: "difference is not a single coordinate".into(),
                });
            }
        }
    }

    Ok(StructuralReport {
        blocks_checked: blocks,
        violations,
    })
}

#[derive(Serialize, Deserialize)]
struct LayoutJson {
    order: u32,
    m: u32,
    block_len: u64,
    block_count: u64,
}

/// Serialized embedding table: layout plus images keyed by label text.
#[derive(Serialize, Deserialize)]
pub struct TableJson {
    family: String,
    n: u32,
    k: u32,
    layout: LayoutJson,
    images: BTreeMap<String, SignVector>,
}

impl EmbeddingTable {
    pub fn to_json(&self, family: &str, n: u32, k: u32) -> TableJson {
        TableJson {
            family: family.to_string(),
            n,
            k,
            layout: LayoutJson {
                order: self.layout.order,
                m: self.layout.labels.m(),
                block_len: self.layout.block_len(),
                block_count: self.layout.block_count(),
            },
            images: self
                .labels
                .iter()
                .zip(&self.images)
                .map(|(l, x)| (l.to_text(), x.clone()))
                .collect(),
        }
    }
}

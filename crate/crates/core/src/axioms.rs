//! Executable checks of the ESA / SA / IS basis properties.
//!
//! The properties are universally quantified over coefficient sequences, so
//! these are sampling certificates, not proofs: a suite evaluates the
//! defining (in)equality exactly on seeded random vectors and reports any
//! witness of failure. The generator and seed are recorded in the report.

use num::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ratio::{format_rat, rat_int, Rat};
use crate::signvec::SignVector;

/// Which norm to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    L1,
    Summing,
}

impl NormKind {
    pub fn eval(self, v: &SignVector) -> Rat {
        match self {
            NormKind::L1 => v.l1_norm(),
            NormKind::Summing => v.summing_norm(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NormKind::L1 => "l1",
            NormKind::Summing => "summing",
        }
    }
}

/// The three basis properties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    /// Merging two adjacent equal-sign coefficients preserves the norm.
    Esa,
    /// Merging two adjacent coefficients never increases the norm.
    Sa,
    /// Moving the coefficients to any increasing index set preserves the norm.
    Is,
}

/// Position data for a single axiom instance.
#[derive(Debug, Clone)]
pub enum AxiomParams {
    /// Merge coefficients at 1-based positions `k` and `k + 1`.
    Merge { k: usize },
    /// Spread coefficient `i` to `indices[i]` (strictly increasing, 1-based).
    Spread { indices: Vec<u64> },
}

/// Outcome of a single exact evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct AxiomCheck {
    pub norm: NormKind,
    pub axiom: Axiom,
    pub lhs: String,
    pub rhs: String,
    pub pass: bool,
}

fn merged(coeffs: &[Rat], k: usize) -> Vec<Rat> {
    // positions k, k+1 are 1-based; the merged value sits at position k and
    // position k+1 becomes a gap, matching the defining display.
    let mut out = coeffs.to_vec();
    out[k - 1] = coeffs[k - 1] + coeffs[k];
    out[k] = rat_int(0);
    out
}

/// Evaluates one axiom instance exactly and returns both norm values.
pub fn check_axiom(
    norm: NormKind,
    axiom: Axiom,
    coeffs: &[Rat],
    params: &AxiomParams,
) -> Result<AxiomCheck> {
    let v = SignVector::from_coeffs(coeffs);
    let (lhs, rhs, pass) = match (axiom, params) {
        (Axiom::Esa, AxiomParams::Merge { k }) => {
            let k = *k;
            if k == 0 || k >= coeffs.len() {
                return Err(Error::domain(format!("merge position {k} out of range")));
            }
            if coeffs[k - 1] * coeffs[k] < rat_int(0) {
                return Err(Error::precondition(format!(
                    "ESA merge at {k} requires a_k * a_(k+1) >= 0"
                )));
            }
            let m = norm.eval(&SignVector::from_coeffs(&merged(coeffs, k)));
            let o = norm.eval(&v);
            (m, o, m == o)
        }
        (Axiom::Sa, AxiomParams::Merge { k }) => {
            let k = *k;
            if k == 0 || k >= coeffs.len() {
                return Err(Error::domain(format!("merge position {k} out of range")));
            }
            let m = norm.eval(&SignVector::from_coeffs(&merged(coeffs, k)));
            let o = norm.eval(&v);
            (m, o, m <= o)
        }
        (Axiom::Is, AxiomParams::Spread { indices }) => {
            if indices.len() != coeffs.len() {
                return Err(Error::domain(
                    "spreading must supply one index per coefficient",
                ));
            }
            if indices.windows(2).any(|w| w[0] >= w[1]) || indices.first() == Some(&0) {
                return Err(Error::domain("spreading indices must be strictly increasing"));
            }
            let mut b = crate::signvec::RunBuilder::new();
            for (i, c) in coeffs.iter().enumerate() {
                if !c.is_zero() {
                    b.push(indices[i], 1, *c);
                }
            }
            let s = norm.eval(&b.finish());
            let o = norm.eval(&v);
            (s, o, s == o)
        }
        _ => {
            return Err(Error::domain(
                "axiom/params mismatch: ESA and SA take Merge, IS takes Spread",
            ))
        }
    };
    Ok(AxiomCheck {
        norm,
        axiom,
        lhs: format_rat(&lhs),
        rhs: format_rat(&rhs),
        pass,
    })
}

/// A failed instance, kept as a replayable witness.
#[derive(Debug, Clone, Serialize)]
pub struct AxiomFailure {
    pub norm: NormKind,
    pub axiom: Axiom,
    pub coeffs: Vec<String>,
    pub detail: String,
}

/// Report of a full randomized suite.
#[derive(Debug, Serialize)]
pub struct AxiomSuiteReport {
    pub seed: u64,
    pub vectors: usize,
    pub spreadings_per_vector: usize,
    pub checks_run: u64,
    pub failures: Vec<AxiomFailure>,
}

impl AxiomSuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Random finitely supported integer vector: support up to 32 coordinates,
/// coefficients in `[-3, 3]`.
pub fn random_coeffs(rng: &mut impl Rng) -> Vec<Rat> {
    let len = rng.gen_range(1..=32);
    (0..len).map(|_| rat_int(rng.gen_range(-3..=3))).collect()
}

/// Runs ESA and SA at every legal merge position and `spreadings` random
/// spreadings per vector, for both norms, over `vectors` seeded samples.
pub fn run_axiom_suite(seed: u64, vectors: usize, spreadings: usize) -> AxiomSuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let mut checks = 0u64;
    let norms = [NormKind::L1, NormKind::Summing];
    for _ in 0..vectors {
        let coeffs = random_coeffs(&mut rng);
        for norm in norms {
            for k in 1..coeffs.len() {
                let merge = AxiomParams::Merge { k };
                if coeffs[k - 1] * coeffs[k] >= rat_int(0) {
                    checks += 1;
                    let c = check_axiom(norm, Axiom::Esa, &coeffs, &merge).expect("legal merge");
                    if !c.pass {
                        failures.push(failure(norm, Axiom::Esa, &coeffs, &c));
                    }
                }
                checks += 1;
                let c = check_axiom(norm, Axiom::Sa, &coeffs, &merge).expect("legal merge");
                if !c.pass {
                    failures.push(failure(norm, Axiom::Sa, &coeffs, &c));
                }
            }
            for _ in 0..spreadings {
                let indices = random_spreading(&mut rng, coeffs.len());
                checks += 1;
                let c = check_axiom(norm, Axiom::Is, &coeffs, &AxiomParams::Spread { indices })
                    .expect("legal spreading");
                if !c.pass {
                    failures.push(failure(norm, Axiom::Is, &coeffs, &c));
                }
            }
        }
    }
    AxiomSuiteReport {
        seed,
        vectors,
        spreadings_per_vector: spreadings,
        checks_run: checks,
        failures,
    }
}

fn failure(norm: NormKind, axiom: Axiom, coeffs: &[Rat], c: &AxiomCheck) -> AxiomFailure {
    AxiomFailure {
        norm,
        axiom,
        coeffs: coeffs.iter().map(format_rat).collect(),
        detail: format!("lhs = {}, rhs = {}", c.lhs, c.rhs),
    }
}

fn random_spreading(rng: &mut impl Rng, len: usize) -> Vec<u64> {
    let mut indices = Vec::with_capacity(len);
    let mut next = 1u64;
    for _ in 0..len {
        next += rng.gen_range(0..4);
        indices.push(next);
        next += 1;
    }
    indices
}

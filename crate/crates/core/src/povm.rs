//! Peel-off quantum-walk circuits for rank-1 qubit POVMs.
//!
//! A circuit is built from `n - 1` [`IterationPair`]s. Iteration `i` applies
//! `c1` at `x = 0`, translates, then applies `c2` at `x = 1` and NOT at
//! `x = -1` and translates again. Each iteration routes one outcome's
//! amplitude onto the right-moving edge of the walk; the amplitude left at
//! `x = 0` after the last iteration is the final outcome.
//!
//! [`extract_povm`] recovers the implemented measurement from any schedule by
//! running both coin basis states and forming `E_x = K_x† K_x` per final
//! position. [`synthesize`] inverts [`build_circuit`] for an arbitrary rank-1
//! target.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{c, Mat2, Vec2};
use crate::tolerance::Tolerances;
use crate::walk::{evolve, CoinLayer, CoinOp, CoinSchedule, WalkState};

/// One labelled POVM effect with its detection port.
#[derive(Debug, Clone, PartialEq)]
pub struct PovmElement {
    pub label: String,
    pub port: i64,
    pub matrix: Mat2,
}

impl PovmElement {
    pub fn new(label: impl Into<String>, port: i64, matrix: Mat2) -> Self {
        PovmElement {
            label: label.into(),
            port,
            matrix,
        }
    }

    /// `weight · |state⟩⟨state|`.
    pub fn rank_one(label: impl Into<String>, port: i64, weight: f64, state: Vec2) -> Self {
        PovmElement::new(label, port, state.normalized().projector().scale(c(weight)))
    }

    pub fn weight(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Checks Hermiticity and positivity.
    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        let defect = self.matrix.hermiticity_defect();
        if defect > tol.hermiticity {
            return Err(Error::NotHermitian {
                label: self.label.clone(),
                defect,
            });
        }
        let [lo, _] = self.matrix.hermitian_eigenvalues();
        if lo < -tol.psd {
            return Err(Error::NotPositive {
                label: self.label.clone(),
                eigenvalue: lo,
            });
        }
        Ok(())
    }

    /// Row vector `f` with `f† f = E`, i.e. `√w ⟨φ|` up to a phase.
    pub fn kraus_row(&self, tol: &Tolerances) -> Result<Vec2> {
        self.validate(tol)?;
        let eig = self.matrix.hermitian_eigenvalues();
        let scale = eig[1].abs().max(1.0);
        if eig[0].abs() > tol.completeness.max(tol.psd) * scale || eig[1] <= 0.0 {
            return Err(Error::NotRankOne {
                label: self.label.clone(),
                eigenvalues: eig,
            });
        }
        let m = &self.matrix.0;
        let j = if m[0][0].re >= m[1][1].re { 0 } else { 1 };
        let pivot = m[j][j].re.sqrt();
        Ok(Vec2([m[j][0] / pivot, m[j][1] / pivot]))
    }
}

/// Ordered POVM with its completeness residual `‖Σ E − I‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct PovmSet {
    pub elements: Vec<PovmElement>,
    pub completeness_residual: f64,
}

impl PovmSet {
    pub fn new(elements: Vec<PovmElement>) -> Self {
        let residual = completeness_residual(elements.iter().map(|e| &e.matrix));
        PovmSet {
            elements,
            completeness_residual: residual,
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn by_port(&self, port: i64) -> Option<&PovmElement> {
        self.elements.iter().find(|e| e.port == port)
    }

    pub fn ports(&self) -> Vec<i64> {
        self.elements.iter().map(|e| e.port).collect()
    }

    /// Validates every element and completeness.
    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        for e in &self.elements {
            e.validate(tol)?;
        }
        if self.completeness_residual > tol.completeness {
            return Err(Error::Incomplete {
                residual: self.completeness_residual,
            });
        }
        Ok(())
    }

    /// Outcome probabilities `tr(E ρ)` for a pure coin input, keyed by port.
    pub fn probabilities(&self, input: &Vec2) -> BTreeMap<i64, f64> {
        self.elements
            .iter()
            .map(|e| (e.port, e.matrix.apply(input).inner(input).re.max(0.0)))
            .collect()
    }
}

fn completeness_residual<'a>(ms: impl Iterator<Item = &'a Mat2>) -> f64 {
    let sum: Mat2 = ms.copied().sum();
    (sum - Mat2::IDENTITY).hermitian_norm()
}

/// Coins for one peel-off iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationPair {
    /// Applied at `x = 0` on the odd step.
    pub c1: CoinOp,
    /// Applied at `x = 1` on the even step.
    pub c2: CoinOp,
}

impl IterationPair {
    pub fn new(c1: CoinOp, c2: CoinOp) -> Self {
        IterationPair { c1, c2 }
    }
}

/// Expands iteration pairs into a `2(n-1)`-step schedule.
pub fn build_circuit(pairs: &[IterationPair]) -> Result<CoinSchedule> {
    if pairs.is_empty() {
        return Err(Error::EmptyPairs);
    }
    let mut steps = Vec::with_capacity(2 * pairs.len());
    for pair in pairs {
        steps.push(CoinLayer::from([(0, pair.c1)]));
        steps.push(CoinLayer::from([(1, pair.c2), (-1, CoinOp::NOT)]));
    }
    CoinSchedule::new(steps)
}

/// Detection ports of a peel-off circuit with `n_pairs` iterations: even
/// positions `0, 2, …, 2 n_pairs`.
pub fn peel_off_ports(n_pairs: usize) -> Vec<i64> {
    (0..=n_pairs as i64).map(|k| 2 * k).collect()
}

/// Kraus map per final position: column `j` is the output coin vector at `x`
/// for input basis state `j`.
pub fn extract_kraus(schedule: &CoinSchedule) -> Result<BTreeMap<i64, Mat2>> {
    let tol = Tolerances::default();
    let from_h = evolve(schedule, &WalkState::at_origin(Vec2::H), &tol)?;
    let from_v = evolve(schedule, &WalkState::at_origin(Vec2::V), &tol)?;
    let mut positions = from_h.positions();
    positions.extend(from_v.positions());
    positions.sort_unstable();
    positions.dedup();
    Ok(positions
        .into_iter()
        .map(|x| (x, Mat2::from_cols(from_h.coin_vector(x), from_v.coin_vector(x))))
        .collect())
}

/// The POVM implemented by measuring the walker position after `schedule`.
/// Elements are ordered by port and labelled `E<port>`.
pub fn extract_povm(schedule: &CoinSchedule) -> Result<PovmSet> {
    let elements = extract_kraus(schedule)?
        .into_iter()
        .map(|(x, k)| PovmElement::new(format!("E{x}"), x, k.adjoint() * k))
        .collect();
    Ok(PovmSet::new(elements))
}

/// Result of [`synthesize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Synthesis {
    pub pairs: Vec<IterationPair>,
    /// Target indices in the order they are peeled off.
    pub order: Vec<usize>,
    /// Detection port of each target element, indexed like the target.
    pub ports: Vec<i64>,
    /// Max entrywise deviation between extracted and target elements.
    pub round_trip_error: f64,
}

impl Synthesis {
    /// Target label → port.
    pub fn assignment<'a>(&self, target: &'a PovmSet) -> Vec<(&'a str, i64)> {
        target
            .elements
            .iter()
            .zip(&self.ports)
            .map(|(e, &p)| (e.label.as_str(), p))
            .collect()
    }
}

/// Round-trip acceptance for a synthesized circuit.
pub const SYNTHESIS_ROUND_TRIP_TOL: f64 = 1e-9;

/// Orthonormal completion of a unit row: the orthogonal row whose first
/// non-negligible entry is real and positive.
fn completion(r: &Vec2) -> Vec2 {
    let raw = Vec2([-r.0[1].conj(), r.0[0].conj()]);
    let pivot = if raw.0[0].norm() > 1e-15 { raw.0[0] } else { raw.0[1] };
    raw.scale(pivot.conj() / pivot.norm())
}

enum Attempt {
    Built(Vec<IterationPair>),
    Failed(f64),
}

fn peel(rows: &[Vec2], order: &[usize], tol: &Tolerances) -> Attempt {
    let n = order.len();
    let mut residual = Mat2::IDENTITY;
    let mut pairs = Vec::with_capacity(n - 1);
    let mut max_a: f64 = 0.0;
    for (k, &idx) in order[..n - 1].iter().enumerate() {
        let inv = match residual.inverse() {
            Some(inv) if residual.det().norm() > 1e-12 => inv,
            _ => return Attempt::Failed(max_a.max(1.0)),
        };
        let g = inv.left_apply(&rows[idx]);
        let a = g.norm();
        max_a = max_a.max(a);
        if a > 1.0 + tol.feasibility || a == 0.0 {
            return Attempt::Failed(max_a);
        }
        let r = g.scale(c(1.0 / a));
        let a = a.min(1.0);
        let l = completion(&r);
        let b = (1.0 - a * a).max(0.0).sqrt();
        let c1 = CoinOp::new_unchecked(Mat2::from_rows(r, l));
        let c2 = if b <= 1e-15 {
            CoinOp::IDENTITY
        } else {
            CoinOp::new_unchecked(Mat2::real(a, b, b, -a))
        };
        pairs.push(IterationPair::new(c1, c2));
        let last = k == n - 2;
        residual = Mat2::from_rows(
            residual.left_apply(&l),
            residual.left_apply(&r).scale(c(b)),
        );
        if !last && b <= 1e-15 {
            return Attempt::Failed(max_a);
        }
    }
    Attempt::Built(pairs)
}

/// Lexicographic next permutation; `false` once the last one is reached.
fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Orderings tried by [`synthesize`]: every permutation up to this many
/// outcomes, identity plus cyclic rotations beyond it.
pub const EXHAUSTIVE_ORDERING_LIMIT: usize = 7;

fn orderings(n: usize) -> Box<dyn Iterator<Item = Vec<usize>>> {
    if n <= EXHAUSTIVE_ORDERING_LIMIT {
        let mut p: Vec<usize> = (0..n).collect();
        let mut first = true;
        Box::new(std::iter::from_fn(move || {
            if first {
                first = false;
                return Some(p.clone());
            }
            next_permutation(&mut p).then(|| p.clone())
        }))
    } else {
        Box::new((0..n).map(move |s| (0..n).map(|k| (k + s) % n).collect()))
    }
}

/// Synthesizes a peel-off circuit implementing a rank-1 POVM.
///
/// Outcome `order[k]` for `k < n-1` is routed to port `2(n-1-k)`; the last
/// outcome stays at port 0. The circuit is accepted only once
/// `extract_povm(build_circuit(pairs))` matches the target within
/// [`SYNTHESIS_ROUND_TRIP_TOL`]; otherwise other orderings are tried.
pub fn synthesize(target: &PovmSet, tol: &Tolerances) -> Result<Synthesis> {
    let n = target.len();
    if n < 2 {
        return Err(Error::TooFewOutcomes(n));
    }
    target.validate(tol)?;
    let rows = target
        .elements
        .iter()
        .map(|e| e.kraus_row(tol))
        .collect::<Result<Vec<_>>>()?;

    let mut worst: f64 = 0.0;
    for order in orderings(n) {
        let pairs = match peel(&rows, &order, tol) {
            Attempt::Built(p) => p,
            Attempt::Failed(a) => {
                worst = if worst == 0.0 { a } else { worst.min(a) };
                continue;
            }
        };
        let mut ports = vec![0; n];
        for (k, &idx) in order.iter().enumerate() {
            ports[idx] = if k == n - 1 { 0 } else { 2 * (n - 1 - k) as i64 };
        }
        let extracted = extract_povm(&build_circuit(&pairs)?)?;
        let err = target
            .elements
            .iter()
            .zip(&ports)
            .map(|(e, &p)| match extracted.by_port(p) {
                Some(x) => x.matrix.distance(&e.matrix),
                None => e.matrix.max_abs(),
            })
            .fold(0.0, f64::max);
        if err <= SYNTHESIS_ROUND_TRIP_TOL {
            return Ok(Synthesis {
                pairs,
                order,
                ports,
                round_trip_error: err,
            });
        }
    }
    Err(Error::Infeasible {
        max_amplitude: worst,
    })
}

/// Matches each target element to the extracted element closest to it,
/// returning the port for each target index. `None` if two targets land on
/// the same port or a match is worse than `tol`.
pub fn match_ports(extracted: &PovmSet, target: &PovmSet, tol: f64) -> Option<Vec<i64>> {
    let mut ports = Vec::with_capacity(target.len());
    for t in &target.elements {
        let best = extracted
            .elements
            .iter()
            .map(|e| (e.port, e.matrix.distance(&t.matrix)))
            .min_by(|a, b| a.1.total_cmp(&b.1))?;
        if best.1 > tol || ports.contains(&best.0) {
            return None;
        }
        ports.push(best.0);
    }
    Some(ports)
}

//! One-dimensional discrete-time quantum walk with position- and step-dependent
//! coins.
//!
//! The coin basis is `{R, L}`. `R` is identified with horizontal polarization
//! and moves one site right under [`translate`]; `L` is vertical polarization
//! and moves one site left. A step of the walk applies the coin layer first
//! and then the conditional translation.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat2, Vec2, ZERO};
use crate::tolerance::Tolerances;

/// Internal coin basis state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Coin {
    R,
    L,
}

impl Coin {
    pub const BOTH: [Coin; 2] = [Coin::R, Coin::L];

    pub fn index(self) -> usize {
        match self {
            Coin::R => 0,
            Coin::L => 1,
        }
    }

    /// Direction of the conditional shift.
    pub fn shift(self) -> i64 {
        match self {
            Coin::R => 1,
            Coin::L => -1,
        }
    }
}

impl fmt::Display for Coin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coin::R => f.write_str("R"),
            Coin::L => f.write_str("L"),
        }
    }
}

/// A 2×2 coin operation acting on `(R, L)` amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinOp(Mat2);

impl CoinOp {
    pub const IDENTITY: CoinOp = CoinOp(Mat2::IDENTITY);
    pub const NOT: CoinOp = CoinOp(Mat2::NOT);

    /// Wraps `m` after checking `U†U = I` within `tol`.
    pub fn new(m: Mat2, tol: f64) -> std::result::Result<CoinOp, f64> {
        let defect = m.unitarity_defect();
        if defect <= tol {
            Ok(CoinOp(m))
        } else {
            Err(defect)
        }
    }

    /// Wraps a matrix that is unitary by construction. Validation happens again
    /// whenever the coin is applied.
    pub const fn new_unchecked(m: Mat2) -> CoinOp {
        CoinOp(m)
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    pub fn unitarity_defect(&self) -> f64 {
        self.0.unitarity_defect()
    }

    /// Identity up to a global phase.
    pub fn is_identity(&self, tol: f64) -> bool {
        self.0.phase_distance(&Mat2::IDENTITY) <= tol
    }
}

impl From<CoinOp> for Mat2 {
    fn from(op: CoinOp) -> Mat2 {
        op.0
    }
}

/// Coins for one step, keyed by position. Absent positions get the identity.
pub type CoinLayer = BTreeMap<i64, CoinOp>;

fn validate_layer(layer: &CoinLayer, step: Option<usize>, tol: f64) -> Result<()> {
    for (&position, op) in layer {
        let defect = op.unitarity_defect();
        if defect > tol {
            return Err(Error::NonUnitaryCoin {
                step,
                position,
                defect,
            });
        }
    }
    Ok(())
}

/// Ordered list of coin layers, one per walk step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CoinSchedule {
    steps: Vec<CoinLayer>,
}

impl CoinSchedule {
    pub fn new(steps: Vec<CoinLayer>) -> Result<Self> {
        Self::with_tolerance(steps, Tolerances::default().unitarity)
    }

    pub fn with_tolerance(steps: Vec<CoinLayer>, tol: f64) -> Result<Self> {
        for (i, layer) in steps.iter().enumerate() {
            validate_layer(layer, Some(i + 1), tol)?;
        }
        Ok(CoinSchedule { steps })
    }

    pub fn empty() -> Self {
        CoinSchedule::default()
    }

    pub fn steps(&self) -> &[CoinLayer] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Coin at `position` in 0-based `step`, identity when unspecified.
    pub fn coin_at(&self, step: usize, position: i64) -> CoinOp {
        self.steps
            .get(step)
            .and_then(|layer| layer.get(&position))
            .copied()
            .unwrap_or(CoinOp::IDENTITY)
    }
}

/// Sparse walker wavefunction over `(position, coin)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WalkState {
    amplitudes: BTreeMap<(i64, Coin), Complex64>,
}

impl WalkState {
    /// Walker localized at `x = 0` with the given coin vector.
    pub fn at_origin(coin: Vec2) -> Self {
        let mut s = WalkState::default();
        s.set(0, Coin::R, coin.0[0]);
        s.set(0, Coin::L, coin.0[1]);
        s
    }

    pub fn from_entries<It: IntoIterator<Item = ((i64, Coin), Complex64)>>(entries: It) -> Self {
        let mut s = WalkState::default();
        for ((x, coin), a) in entries {
            s.add(x, coin, a);
        }
        s
    }

    /// Sets an amplitude; exact zeros are not stored.
    pub fn set(&mut self, x: i64, coin: Coin, a: Complex64) {
        if a == ZERO {
            self.amplitudes.remove(&(x, coin));
        } else {
            self.amplitudes.insert((x, coin), a);
        }
    }

    pub fn add(&mut self, x: i64, coin: Coin, a: Complex64) {
        let cur = self.get(x, coin);
        self.set(x, coin, cur + a);
    }

    pub fn get(&self, x: i64, coin: Coin) -> Complex64 {
        self.amplitudes.get(&(x, coin)).copied().unwrap_or(ZERO)
    }

    /// Coin 2-vector at `x`.
    pub fn coin_vector(&self, x: i64) -> Vec2 {
        Vec2([self.get(x, Coin::R), self.get(x, Coin::L)])
    }

    pub fn entries(&self) -> impl Iterator<Item = ((i64, Coin), Complex64)> + '_ {
        self.amplitudes.iter().map(|(&k, &v)| (k, v))
    }

    /// Occupied positions, ascending and deduplicated.
    pub fn positions(&self) -> Vec<i64> {
        let mut xs: Vec<i64> = self.amplitudes.keys().map(|&(x, _)| x).collect();
        xs.dedup();
        xs
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn scale(&self, s: Complex64) -> WalkState {
        WalkState::from_entries(self.entries().map(|(k, a)| (k, a * s)))
    }

    /// Entrywise sum.
    pub fn superpose(&self, other: &WalkState) -> WalkState {
        WalkState::from_entries(self.entries().chain(other.entries()))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn distance(&self, other: &WalkState) -> f64 {
        let diff = self.superpose(&other.scale(Complex64::new(-1.0, 0.0)));
        diff.amplitudes.values().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Drops entries with modulus below `threshold`, returning the pruned state
    /// and the removed squared norm. The removed norm is bounded by
    /// `len() * threshold²`.
    pub fn pruned(&self, threshold: f64) -> (WalkState, f64) {
        let mut kept = WalkState::default();
        let mut dropped = 0.0;
        for ((x, coin), a) in self.entries() {
            if a.norm() < threshold {
                dropped += a.norm_sqr();
            } else {
                kept.set(x, coin, a);
            }
        }
        (kept, dropped)
    }
}

/// Multiplies the coin vector at each position by that position's coin.
pub fn apply_coin(state: &WalkState, coins: &CoinLayer) -> Result<WalkState> {
    apply_coin_with(state, coins, &Tolerances::default())
}

pub fn apply_coin_with(state: &WalkState, coins: &CoinLayer, tol: &Tolerances) -> Result<WalkState> {
    validate_layer(coins, None, tol.unitarity)?;
    Ok(apply_layer(state, coins))
}

pub(crate) fn apply_coin_unvalidated(state: &WalkState, coins: &CoinLayer) -> WalkState {
    apply_layer(state, coins)
}

fn apply_layer(state: &WalkState, coins: &CoinLayer) -> WalkState {
    let mut out = WalkState::default();
    for x in state.positions() {
        let v = state.coin_vector(x);
        let w = match coins.get(&x) {
            Some(op) => op.matrix().apply(&v),
            None => v,
        };
        out.set(x, Coin::R, w.0[0]);
        out.set(x, Coin::L, w.0[1]);
    }
    out
}

/// Conditional shift: `(x, R) → (x+1, R)` and `(x, L) → (x-1, L)`.
pub fn translate(state: &WalkState) -> WalkState {
    WalkState {
        amplitudes: state
            .amplitudes
            .iter()
            .map(|(&(x, coin), &a)| ((x + coin.shift(), coin), a))
            .collect(),
    }
}

/// Evolves an arbitrary (not necessarily normalized) state through every step.
pub fn evolve(schedule: &CoinSchedule, state: &WalkState, tol: &Tolerances) -> Result<WalkState> {
    let mut cur = state.clone();
    for (i, layer) in schedule.steps().iter().enumerate() {
        validate_layer(layer, Some(i + 1), tol.unitarity)?;
        cur = translate(&apply_layer(&cur, layer));
        if tol.prune > 0.0 {
            cur = cur.pruned(tol.prune).0;
        }
    }
    Ok(cur)
}

/// Runs the walk from `x = 0` with a normalized coin input.
pub fn run(schedule: &CoinSchedule, input: Vec2) -> Result<WalkState> {
    run_with(schedule, input, &Tolerances::default())
}

pub fn run_with(schedule: &CoinSchedule, input: Vec2, tol: &Tolerances) -> Result<WalkState> {
    let norm_sqr = input.norm_sqr();
    if (norm_sqr - 1.0).abs() > tol.normalization {
        return Err(Error::NotNormalized { norm_sqr });
    }
    evolve(schedule, &WalkState::at_origin(input), tol)
}

/// Marginal position distribution `Σ_c |ψ(x, c)|²`.
pub fn position_distribution(state: &WalkState) -> BTreeMap<i64, f64> {
    let mut dist = BTreeMap::new();
    for ((x, _), a) in state.entries() {
        *dist.entry(x).or_insert(0.0) += a.norm_sqr();
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn hadamard() -> CoinOp {
        let s = 0.5f64.sqrt();
        CoinOp::new_unchecked(Mat2::real(s, s, s, -s))
    }

    #[test]
    fn hadamard_on_r() {
        let state = WalkState::at_origin(Vec2::H);
        let out = apply_coin(&state, &BTreeMap::from([(0, hadamard())])).unwrap();
        let s = 0.5f64.sqrt();
        assert!((out.get(0, Coin::R) - c(s)).norm() < 1e-15);
        assert!((out.get(0, Coin::L) - c(s)).norm() < 1e-15);
    }

    #[test]
    fn empty_layer_is_identity() {
        let state = WalkState::at_origin(Vec2::H);
        assert_eq!(apply_coin(&state, &CoinLayer::new()).unwrap(), state);
    }

    #[test]
    fn hadamard_on_l_amplitude() {
        // coin-L amplitude 1/√3 at x = 0 maps to (1/√6, -1/√6)
        let a = 1.0 / 3f64.sqrt();
        let state = WalkState::from_entries([((0, Coin::L), c(a))]);
        let out = apply_coin(&state, &BTreeMap::from([(0, hadamard())])).unwrap();
        let e = 1.0 / 6f64.sqrt();
        assert!((out.get(0, Coin::R) - c(e)).norm() < 1e-15);
        assert!((out.get(0, Coin::L) - c(-e)).norm() < 1e-15);
    }

    #[test]
    fn non_unitary_coin_names_position() {
        let state = WalkState::at_origin(Vec2::H);
        let bad = CoinOp::new_unchecked(Mat2::real(1.0, 1.0, 0.0, 1.0));
        let err = apply_coin(&state, &BTreeMap::from([(-3, bad)])).unwrap_err();
        match err {
            Error::NonUnitaryCoin { position, .. } => assert_eq!(position, -3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(err.to_string().contains("-3"));
    }

    #[test]
    fn schedule_rejects_non_unitary() {
        let bad = CoinOp::new_unchecked(Mat2::real(2.0, 0.0, 0.0, 1.0));
        let err = CoinSchedule::new(vec![CoinLayer::new(), BTreeMap::from([(1, bad)])]).unwrap_err();
        assert!(matches!(err, Error::NonUnitaryCoin { step: Some(2), position: 1, .. }));
    }

    #[test]
    fn translate_basis_states() {
        let r = translate(&WalkState::from_entries([((0, Coin::R), c(1.0))]));
        assert_eq!(r.get(1, Coin::R), c(1.0));
        let l = translate(&WalkState::from_entries([((0, Coin::L), c(1.0))]));
        assert_eq!(l.get(-1, Coin::L), c(1.0));
        let (a, b) = (Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.5));
        let s = translate(&WalkState::from_entries([((1, Coin::R), a), ((1, Coin::L), b)]));
        assert_eq!(s.get(2, Coin::R), a);
        assert_eq!(s.get(0, Coin::L), b);
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn empty_schedule_keeps_walker_at_origin() {
        let input = Vec2::real(0.6, 0.8);
        let out = run(&CoinSchedule::empty(), input).unwrap();
        assert_eq!(out, WalkState::at_origin(input));
    }

    #[test]
    fn run_rejects_unnormalized_input() {
        let err = run(&CoinSchedule::empty(), Vec2::real(1.0, 1.0)).unwrap_err();
        assert!(matches!(err, Error::NotNormalized { .. }));
    }

    #[test]
    fn distribution_marginalizes_coin() {
        let s = 0.5f64.sqrt();
        let state = WalkState::from_entries([((1, Coin::R), c(s)), ((-1, Coin::L), c(s))]);
        let d = position_distribution(&state);
        assert!((d[&1] - 0.5).abs() < 1e-15);
        assert!((d[&-1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn distribution_of_trine_output() {
        let state = WalkState::from_entries([
            ((4, Coin::R), c((2.0f64 / 3.0).sqrt())),
            ((2, Coin::R), c(1.0 / 6f64.sqrt())),
            ((0, Coin::R), c(-1.0 / 6f64.sqrt())),
        ]);
        let d = position_distribution(&state);
        assert!((d[&4] - 2.0 / 3.0).abs() < 1e-15);
        assert!((d[&2] - 1.0 / 6.0).abs() < 1e-15);
        assert!((d[&0] - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn pruning_reports_dropped_norm() {
        let state = WalkState::from_entries([((0, Coin::R), c(1.0)), ((3, Coin::L), c(1e-7))]);
        let (kept, dropped) = state.pruned(1e-6);
        assert_eq!(kept.len(), 1);
        assert!((dropped - 1e-14).abs() < 1e-20);
        assert!(dropped <= state.len() as f64 * 1e-12);
    }
}

//! Built-in measurement scenarios: trine POVM, qubit SIC-POVM and unambiguous
//! discrimination of two real states.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_6, PI};

use crate::error::{Error, Result};
use crate::linalg::{c, cis, Mat2, Vec2};
use crate::povm::{build_circuit, IterationPair, PovmElement, PovmSet};
use crate::walk::{CoinOp, CoinSchedule};

fn hadamard() -> CoinOp {
    let s = 0.5f64.sqrt();
    CoinOp::new_unchecked(Mat2::real(s, s, s, -s))
}

/// `√(1/3) [[√2, 1], [1, -√2]]`.
fn third_splitter() -> CoinOp {
    let s = (1.0f64 / 3.0).sqrt();
    let r2 = 2f64.sqrt();
    CoinOp::new_unchecked(Mat2::real(r2 * s, s, s, -r2 * s))
}

/// `√½ [[-1, 1], [1, 1]]`.
fn flipped_hadamard() -> CoinOp {
    let s = 0.5f64.sqrt();
    CoinOp::new_unchecked(Mat2::real(-s, s, s, s))
}

/// Iteration pairs of the trine circuit.
pub fn trine_pairs() -> Vec<IterationPair> {
    vec![
        IterationPair::new(CoinOp::IDENTITY, third_splitter()),
        IterationPair::new(hadamard(), CoinOp::IDENTITY),
    ]
}

/// Iteration pairs of the SIC circuit.
pub fn sic_pairs() -> Vec<IterationPair> {
    let s = 0.5f64.sqrt();
    let phased = Mat2::new(
        cis(-FRAC_PI_3),
        cis(FRAC_PI_6),
        cis(FRAC_PI_3),
        cis(-FRAC_PI_6),
    )
    .scale(c(s));
    vec![
        IterationPair::new(CoinOp::IDENTITY, flipped_hadamard()),
        IterationPair::new(flipped_hadamard(), third_splitter()),
        IterationPair::new(CoinOp::new_unchecked(phased), CoinOp::IDENTITY),
    ]
}

fn check_usd_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta <= FRAC_PI_2 + 1e-12 {
        Ok(())
    } else {
        Err(Error::ThetaOutOfRange {
            theta,
            range: "(0, π/2]",
        })
    }
}

/// Off-diagonal `tan(θ/2)` and diagonal `√(1 − tan²(θ/2))` of the
/// discrimination reflection. The diagonal is evaluated as
/// `√(cos θ)/cos(θ/2)` to stay accurate near `θ = π/2`.
pub(crate) fn usd_reflection(theta: f64) -> (f64, f64) {
    let half = theta / 2.0;
    let a = theta.cos().max(0.0).sqrt() / half.cos();
    let t = half.tan().min(1.0);
    let norm = (a * a + t * t).sqrt();
    (t / norm, a / norm)
}

/// Iteration pairs for unambiguous discrimination of `ψ±(θ)`.
pub fn usd_pairs(theta: f64) -> Result<Vec<IterationPair>> {
    check_usd_theta(theta)?;
    let (t, a) = usd_reflection(theta);
    Ok(vec![
        IterationPair::new(CoinOp::IDENTITY, CoinOp::new_unchecked(Mat2::real(a, t, t, -a))),
        IterationPair::new(hadamard(), CoinOp::IDENTITY),
    ])
}

/// Ideal success probability `2 sin²(θ/2) = 1 - cos θ` of the discrimination
/// circuit, for `0 ≤ θ ≤ π/2`.
pub fn usd_success_probability(theta: f64) -> Result<f64> {
    if !(0.0..=FRAC_PI_2 + 1e-12).contains(&theta) {
        return Err(Error::ThetaOutOfRange {
            theta,
            range: "[0, π/2]",
        });
    }
    let s = (theta / 2.0).sin();
    Ok(2.0 * s * s)
}

/// Trine states `ψ₃ⁱ`, `i = 1..=3`.
pub fn trine_state(i: usize) -> Vec2 {
    let r3 = 3f64.sqrt();
    match i {
        1 => Vec2::H,
        2 => Vec2::real(-0.5, 0.5 * r3),
        3 => Vec2::real(-0.5, -0.5 * r3),
        _ => panic!("trine index {i} out of 1..=3"),
    }
}

/// SIC states `ψ₄ⁱ`, `i = 1..=4`.
pub fn sic_state(i: usize) -> Vec2 {
    let h = c(-1.0 / 3f64.sqrt());
    let v = (2.0f64 / 3.0).sqrt();
    match i {
        1 => Vec2::H,
        2 => Vec2::new(h, c(v)),
        3 => Vec2::new(h, cis(2.0 * PI / 3.0).scale(v)),
        4 => Vec2::new(h, cis(-2.0 * PI / 3.0).scale(v)),
        _ => panic!("SIC index {i} out of 1..=4"),
    }
}

/// `cos(θ/2)|H⟩ ± sin(θ/2)|V⟩`.
pub fn usd_state(theta: f64, plus: bool) -> Vec2 {
    let s = if plus { 1.0 } else { -1.0 };
    Vec2::real((theta / 2.0).cos(), s * (theta / 2.0).sin())
}

/// Built-in scenario selector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scenario {
    Trine,
    Sic,
    Usd { theta: f64 },
}

/// A named coin input.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedState {
    pub label: String,
    pub state: Vec2,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Trine => "trine",
            Scenario::Sic => "sic",
            Scenario::Usd { .. } => "usd",
        }
    }

    pub fn pairs(&self) -> Result<Vec<IterationPair>> {
        match *self {
            Scenario::Trine => Ok(trine_pairs()),
            Scenario::Sic => Ok(sic_pairs()),
            Scenario::Usd { theta } => usd_pairs(theta),
        }
    }

    pub fn schedule(&self) -> Result<CoinSchedule> {
        build_circuit(&self.pairs()?)
    }

    /// Target POVM for trine and SIC, labelled by state name. Ports are left
    /// at 0; they are discovered by extraction.
    pub fn target_povm(&self) -> Option<PovmSet> {
        let (k, weight, state): (usize, f64, fn(usize) -> Vec2) = match self {
            Scenario::Trine => (3, 2.0 / 3.0, trine_state),
            Scenario::Sic => (4, 0.5, sic_state),
            Scenario::Usd { .. } => return None,
        };
        let prefix = if k == 3 { "psi3" } else { "psi4" };
        Some(PovmSet::new(
            (1..=k)
                .map(|i| PovmElement::rank_one(format!("{prefix}-{i}"), 0, weight, state(i)))
                .collect(),
        ))
    }

    /// Named inputs, in table order.
    pub fn inputs(&self) -> Vec<NamedState> {
        let named = |label: String, state: Vec2| NamedState { label, state };
        match *self {
            Scenario::Trine => (1..=3)
                .map(|i| named(format!("psi3-{i}"), trine_state(i)))
                .chain((1..=3).map(|i| named(format!("psibar3-{i}"), trine_state(i).orthogonal())))
                .collect(),
            Scenario::Sic => (1..=4)
                .map(|i| named(format!("psi4-{i}"), sic_state(i)))
                .chain((1..=4).map(|i| named(format!("psibar4-{i}"), sic_state(i).orthogonal())))
                .collect(),
            Scenario::Usd { theta } => vec![
                named("psi+".into(), usd_state(theta, true)),
                named("psi-".into(), usd_state(theta, false)),
            ],
        }
    }

    pub fn input(&self, label: &str) -> Option<Vec2> {
        self.inputs()
            .into_iter()
            .find(|s| s.label == label)
            .map(|s| s.state)
    }
}

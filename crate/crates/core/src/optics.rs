//! Lowering of coin schedules to wave plates and beam displacers.
//!
//! Jones matrices are written in the `{H, V}` basis:
//!
//! * `HWP(φ) = [[cos 2φ, sin 2φ], [sin 2φ, -cos 2φ]]`
//! * `QWP(φ) = R(φ) diag(1, i) R(-φ)`
//!
//! Matrices are compared up to a global phase. `HWP(φ + 90°) = -HWP(φ)`, so a
//! half-wave plate angle is only meaningful modulo 90°; a quarter-wave plate
//! angle is meaningful modulo 180°.
//!
//! Laboratory tables often use the opposite retardance sign for the QWP,
//! `R(φ) diag(1, -i) R(-φ)`, which equals our `QWP(φ + 90°)` up to phase.
//! [`QwpConvention`] converts between the two when reporting angles.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{c, Mat2, Vec2, I, ONE};
use crate::walk::{CoinOp, CoinSchedule, Coin, WalkState};

/// Verification threshold for a decomposition (max modulus deviation, up to
/// global phase).
pub const DECOMPOSE_TOL: f64 = 1e-10;

/// Half-wave plate with fast axis at `angle_deg`.
pub fn hwp(angle_deg: f64) -> CoinOp {
    let (s, c2) = (2.0 * angle_deg.to_radians()).sin_cos();
    CoinOp::new_unchecked(Mat2::real(c2, s, s, -c2))
}

/// Quarter-wave plate with fast axis at `angle_deg`.
pub fn qwp(angle_deg: f64) -> CoinOp {
    let (s, co) = angle_deg.to_radians().sin_cos();
    let off = Mat2::real(0.0, 1.0, 1.0, 0.0).scale((ONE - I) * c(s * co));
    let diag = Mat2::new(c(co * co) + I * (s * s), c(0.0), c(0.0), c(s * s) + I * (co * co));
    CoinOp::new_unchecked(diag + off)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum PlateKind {
    #[serde(rename = "HWP")]
    Hwp,
    #[serde(rename = "QWP")]
    Qwp,
}

impl fmt::Display for PlateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlateKind::Hwp => "HWP",
            PlateKind::Qwp => "QWP",
        })
    }
}

/// Retardance sign convention used when reporting QWP angles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QwpConvention {
    /// `QWP(φ) = R(φ) diag(1, i) R(-φ)`, the convention of [`qwp`].
    #[default]
    Standard,
    /// `R(φ) diag(1, -i) R(-φ)`; reported angles are shifted by 90°.
    Conjugate,
}

impl QwpConvention {
    /// Converts a [`QwpConvention::Standard`] QWP angle into this convention.
    pub fn qwp_angle(self, standard_deg: f64) -> f64 {
        match self {
            QwpConvention::Standard => standard_deg,
            QwpConvention::Conjugate => wrap(standard_deg + 90.0, 180.0),
        }
    }

    /// QWP Jones matrix in this convention.
    pub fn qwp(self, angle_deg: f64) -> CoinOp {
        match self {
            QwpConvention::Standard => qwp(angle_deg),
            QwpConvention::Conjugate => CoinOp::new_unchecked(qwp(angle_deg).matrix().conj()),
        }
    }
}

impl FromStr for QwpConvention {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "standard" => Ok(QwpConvention::Standard),
            "conjugate" => Ok(QwpConvention::Conjugate),
            other => Err(format!("unknown QWP convention '{other}'")),
        }
    }
}

/// One plate of a decomposition, before it is placed in a netlist.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateSetting {
    pub kind: PlateKind,
    /// Standard-convention fast-axis angle; HWP in `[0, 90)`, QWP in `[0, 180)`.
    pub angle_deg: f64,
}

impl PlateSetting {
    pub fn hwp(angle_deg: f64) -> Self {
        PlateSetting {
            kind: PlateKind::Hwp,
            angle_deg: wrap(angle_deg, 90.0),
        }
    }

    pub fn qwp(angle_deg: f64) -> Self {
        PlateSetting {
            kind: PlateKind::Qwp,
            angle_deg: wrap(angle_deg, 180.0),
        }
    }

    pub fn matrix(&self) -> Mat2 {
        match self.kind {
            PlateKind::Hwp => *hwp(self.angle_deg).matrix(),
            PlateKind::Qwp => *qwp(self.angle_deg).matrix(),
        }
    }
}

/// A plate placed at a lattice site in a given (1-based) step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavePlate {
    pub kind: PlateKind,
    pub angle_deg: f64,
    pub position: i64,
    pub step: usize,
}

impl WavePlate {
    pub fn setting(&self) -> PlateSetting {
        PlateSetting {
            kind: self.kind,
            angle_deg: self.angle_deg,
        }
    }

    /// Angle as reported under `convention`.
    pub fn reported_angle(&self, convention: QwpConvention) -> f64 {
        match self.kind {
            PlateKind::Hwp => self.angle_deg,
            PlateKind::Qwp => convention.qwp_angle(self.angle_deg),
        }
    }
}

/// Reduces an angle into `[0, period)`.
pub fn wrap(angle: f64, period: f64) -> f64 {
    let r = angle.rem_euclid(period);
    // rem_euclid can round up to `period` for tiny negative inputs
    if r >= period - 1e-12 {
        0.0
    } else {
        r
    }
}

/// Signed distance between two angles modulo `period`, in `(-period/2, period/2]`.
pub fn angle_difference(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    if d > period / 2.0 {
        d - period
    } else {
        d
    }
}

/// Degree–arcminute rendering rounded to the nearest arcminute, e.g. `17°38′`.
pub fn format_dms(deg: f64) -> String {
    let sign = if deg < 0.0 { "-" } else { "" };
    let total = (deg.abs() * 60.0).round() as i64;
    format!("{sign}{}°{:02}′", total / 60, total % 60)
}

/// Degrees from a degree–arcminute pair, sign taken from `deg`.
pub fn dms(deg: f64, minutes: f64) -> f64 {
    if deg < 0.0 {
        deg - minutes / 60.0
    } else {
        deg + minutes / 60.0
    }
}

/// Poincaré-sphere rotation of `u`: `R_ij = ½ tr(σ_i U σ_j U†)`.
fn bloch_rotation(u: &Mat2) -> [[f64; 3]; 3] {
    let paulis = [
        Mat2::NOT,
        Mat2::new(c(0.0), -I, I, c(0.0)),
        Mat2::real(1.0, 0.0, 0.0, -1.0),
    ];
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] = 0.5 * (paulis[i] * *u * paulis[j] * u.adjoint()).trace().re;
        }
    }
    r
}

fn rotate(r: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for i in 0..3 {
        out[i] = (0..3).map(|j| r[i][j] * v[j]).sum();
    }
    out
}

fn rotate_inverse(r: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for i in 0..3 {
        out[i] = (0..3).map(|j| r[j][i] * v[j]).sum();
    }
    out
}

const Y_AXIS: [f64; 3] = [0.0, 1.0, 0.0];
/// A vector counts as lying in the plate-axis (x–z) plane below this y-component.
const PLANE_TOL: f64 = 1e-9;

/// Fast-axis angle (degrees) of the HWP equal to `m` up to phase.
fn hwp_angle_of(m: &Mat2) -> f64 {
    let phase = (-m.det()).sqrt();
    let r = m.scale(ONE / phase);
    0.5 * r.0[0][1].re.atan2(r.0[0][0].re).to_degrees()
}

/// QWP angle whose rotation maps the in-plane vector `v` onto `+y`.
fn qwp_angle_lifting(v: [f64; 3]) -> f64 {
    let alpha = v[0].atan2(v[2]).to_degrees();
    0.5 * (alpha - 90.0)
}

/// QWP angle whose rotation takes `+y` to the in-plane vector `w`.
fn qwp_angle_landing(w: [f64; 3]) -> f64 {
    0.5 * w[2].atan2(-w[0]).to_degrees()
}

fn product(plates: &[PlateSetting]) -> Mat2 {
    plates
        .iter()
        .fold(Mat2::IDENTITY, |acc, p| p.matrix() * acc)
}

fn accept(u: &Mat2, plates: Vec<PlateSetting>) -> Option<Vec<PlateSetting>> {
    (product(&plates).phase_distance(u) <= DECOMPOSE_TOL).then_some(plates)
}

/// Decomposes a coin into at most three plates in the pattern QWP, HWP, QWP,
/// omitting plates that are not needed.
///
/// Plates are listed in beam order: the first entry acts first, so the matrix
/// product is `last · … · first`. Real reflections come out as a single
/// HWP; the identity (up to phase) yields no plates.
pub fn decompose(u: &CoinOp) -> Vec<PlateSetting> {
    let m = *u.matrix();
    if m.phase_distance(&Mat2::IDENTITY) <= DECOMPOSE_TOL {
        return Vec::new();
    }
    let r = bloch_rotation(&m);
    let image_y = rotate(&r, Y_AXIS);
    let preimage_y = rotate_inverse(&r, Y_AXIS);

    if image_y[1] < -1.0 + PLANE_TOL {
        if let Some(p) = accept(&m, vec![PlateSetting::hwp(hwp_angle_of(&m))]) {
            return p;
        }
    }
    if image_y[1].abs() < PLANE_TOL {
        // R(y) in plane: a single QWP
        let a = qwp_angle_landing(image_y);
        if let Some(p) = accept(&m, vec![PlateSetting::qwp(a)]) {
            return p;
        }
    }
    if preimage_y[1].abs() < PLANE_TOL {
        // QWP followed by HWP
        let cq = qwp_angle_lifting([-preimage_y[0], -preimage_y[1], -preimage_y[2]]);
        let rest = m * qwp(cq).matrix().adjoint();
        let plates = vec![PlateSetting::qwp(cq), PlateSetting::hwp(hwp_angle_of(&rest))];
        if let Some(p) = accept(&m, plates) {
            return p;
        }
    }
    if image_y[1].abs() < PLANE_TOL {
        // HWP followed by QWP
        let a = qwp_angle_landing([-image_y[0], -image_y[1], -image_y[2]]);
        let rest = qwp(a).matrix().adjoint() * m;
        let plates = vec![PlateSetting::hwp(hwp_angle_of(&rest)), PlateSetting::qwp(a)];
        if let Some(p) = accept(&m, plates) {
            return p;
        }
    }

    // General case: pick an in-plane v whose image is also in plane.
    let cross = [-preimage_y[2], 0.0, preimage_y[0]];
    let len = (cross[0] * cross[0] + cross[2] * cross[2]).sqrt();
    let base = if len < PLANE_TOL {
        [0.0, 0.0, 1.0]
    } else {
        [cross[0] / len, 0.0, cross[2] / len]
    };
    let mut best: Option<(f64, Vec<PlateSetting>)> = None;
    for sign in [1.0, -1.0] {
        let v = [sign * base[0], 0.0, sign * base[2]];
        let w = rotate(&r, v);
        let cq = qwp_angle_lifting(v);
        let aq = qwp_angle_landing([-w[0], -w[1], -w[2]]);
        let mid = qwp(aq).matrix().adjoint() * m * qwp(cq).matrix().adjoint();
        let plates = vec![
            PlateSetting::qwp(cq),
            PlateSetting::hwp(hwp_angle_of(&mid)),
            PlateSetting::qwp(aq),
        ];
        let err = product(&plates).phase_distance(&m);
        if best.as_ref().is_none_or(|(e, _)| err < *e) {
            best = Some((err, plates));
        }
    }
    best.map(|(_, p)| p).unwrap_or_default()
}

/// HWP angle, in degrees, realizing the reflection with off-diagonal
/// `tan(θ/2)` used by the discrimination circuit: `½ arcsin(tan(θ/2))`.
pub fn usd_plate_angle(theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta <= std::f64::consts::FRAC_PI_2 + 1e-12) {
        return Err(Error::ThetaOutOfRange {
            theta,
            range: "(0, π/2]",
        });
    }
    let (t, a) = crate::scenario::usd_reflection(theta);
    Ok(0.5 * t.atan2(a).to_degrees())
}

/// Plate angles preparing a coin state from `|H⟩` with HWP1 then QWP1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatePrep {
    /// HWP1 angle in `(-45°, 45°]`.
    pub hwp_deg: f64,
    /// QWP1 angle (standard convention) in `[0°, 90°)`; `None` for linear
    /// targets. A QWP aligned with a linear polarization leaves it unchanged.
    pub qwp_deg: Option<f64>,
}

impl StatePrep {
    pub fn matrix(&self) -> Mat2 {
        let h = *hwp(self.hwp_deg).matrix();
        match self.qwp_deg {
            Some(q) => *qwp(q).matrix() * h,
            None => h,
        }
    }

    pub fn prepared(&self) -> Vec2 {
        self.matrix().apply(&Vec2::H)
    }
}

fn half_angle_in_range(alpha_deg: f64) -> f64 {
    // alpha is a linear polarization angle mod 180; HWP angle is alpha/2 mod 90
    let h = wrap(alpha_deg / 2.0, 90.0);
    if h > 45.0 + 1e-12 {
        h - 90.0
    } else {
        h
    }
}

/// Linear polarization angle (degrees) of a state that is real up to phase.
fn linear_angle(v: &Vec2) -> f64 {
    let pivot = if v.0[0].norm() >= v.0[1].norm() { v.0[0] } else { v.0[1] };
    let ph = pivot.conj() / pivot.norm();
    let r = v.scale(ph);
    r.0[1].re.atan2(r.0[0].re).to_degrees()
}

/// Finds HWP1 and (if needed) QWP1 angles producing `target` from `|H⟩` up to
/// global phase. The QWP is set along one axis of the target's polarization
/// ellipse, the one in `[0°, 90°)`.
pub fn state_prep_angles(target: Vec2) -> StatePrep {
    let t = target.normalized();
    let s3 = 2.0 * (t.0[0].conj() * t.0[1]).im;
    if s3.abs() < 1e-12 {
        return StatePrep {
            hwp_deg: half_angle_in_range(linear_angle(&t)),
            qwp_deg: None,
        };
    }
    let s1 = t.0[0].norm_sqr() - t.0[1].norm_sqr();
    let s2 = 2.0 * (t.0[0].conj() * t.0[1]).re;
    let orientation = 0.5 * s2.atan2(s1).to_degrees();
    let q = wrap(orientation, 90.0);
    let linear = qwp(q).matrix().adjoint().apply(&t);
    StatePrep {
        hwp_deg: half_angle_in_range(linear_angle(&linear)),
        qwp_deg: Some(q),
    }
}

/// Identifier of a phase-stable displacer pair (1-based displacer numbers).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interferometer {
    pub open: usize,
    pub close: usize,
}

impl fmt::Display for Interferometer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.open, self.close)
    }
}

impl FromStr for Interferometer {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s
            .split_once('-')
            .ok_or_else(|| format!("interferometer id '{s}' is not of the form OPEN-CLOSE"))?;
        let parse = |x: &str| {
            x.trim()
                .parse::<usize>()
                .map_err(|e| format!("interferometer id '{s}': {e}"))
        };
        Ok(Interferometer {
            open: parse(a)?,
            close: parse(b)?,
        })
    }
}

impl Serialize for Interferometer {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.open, self.close].serialize(s)
    }
}

const SUPPORT_TOL: f64 = 1e-12;

/// Sites that receive amplitude from both neighbours once the given coined
/// states are translated, considering every input.
pub(crate) fn recombination_sites(before_translate: &[WalkState]) -> Vec<i64> {
    let mut from_left = BTreeSet::new();
    let mut from_right = BTreeSet::new();
    for state in before_translate {
        for ((x, coin), a) in state.entries() {
            if a.norm() <= SUPPORT_TOL {
                continue;
            }
            match coin {
                Coin::R => from_left.insert(x + 1),
                Coin::L => from_right.insert(x - 1),
            };
        }
    }
    from_left.intersection(&from_right).copied().collect()
}

/// Per-step recombination sites of a schedule, traced from both basis inputs.
/// Entry `t` lists the sites where paths merge when displacer `t + 1` acts.
pub fn recombinations(schedule: &CoinSchedule) -> Vec<Vec<i64>> {
    let mut states = vec![WalkState::at_origin(Vec2::H), WalkState::at_origin(Vec2::V)];
    let mut out = Vec::with_capacity(schedule.len());
    for layer in schedule.steps() {
        let coined: Vec<WalkState> = states
            .iter()
            .map(|s| crate::walk::apply_coin_unvalidated(s, layer))
            .collect();
        out.push(recombination_sites(&coined));
        states = coined.iter().map(crate::walk::translate).collect();
    }
    out
}

/// Displacer pairs that must be phase stable: `(t-1, t)` for every displacer
/// `t` at which paths split by displacer `t-1` merge again.
pub fn interferometers(schedule: &CoinSchedule) -> Vec<Interferometer> {
    recombinations(schedule)
        .iter()
        .enumerate()
        .filter(|(t, sites)| *t >= 1 && !sites.is_empty())
        .map(|(t, _)| Interferometer { open: t, close: t + 1 })
        .collect()
}

/// Final positions reachable from either basis input.
pub fn output_ports(schedule: &CoinSchedule) -> Vec<i64> {
    let mut ports = BTreeSet::new();
    for input in [Vec2::H, Vec2::V] {
        let mut s = WalkState::at_origin(input);
        for layer in schedule.steps() {
            s = crate::walk::translate(&crate::walk::apply_coin_unvalidated(&s, layer));
        }
        ports.extend(
            s.entries()
                .filter(|(_, a)| a.norm() > SUPPORT_TOL)
                .map(|((x, _), _)| x),
        );
    }
    ports.into_iter().collect()
}

/// Hardware description of a compiled schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalNetlist {
    pub displacers: usize,
    pub plates: Vec<WavePlate>,
    pub ports: Vec<i64>,
    pub interferometers: Vec<Interferometer>,
}

impl OpticalNetlist {
    /// Plates at `(position, step)` in beam order.
    pub fn plates_at(&self, position: i64, step: usize) -> Vec<PlateSetting> {
        self.plates
            .iter()
            .filter(|p| p.position == position && p.step == step)
            .map(WavePlate::setting)
            .collect()
    }

    /// Coin realized at `(position, step)`, as a product of its plates.
    pub fn realized_coin(&self, position: i64, step: usize) -> Mat2 {
        product(&self.plates_at(position, step))
    }

    /// JSON view with QWP angles reported under `convention`.
    pub fn to_json(&self, convention: QwpConvention) -> NetlistJson {
        NetlistJson {
            displacers: self.displacers,
            plates: self
                .plates
                .iter()
                .map(|p| {
                    let angle = p.reported_angle(convention);
                    PlateJson {
                        kind: p.kind,
                        angle_deg: angle,
                        angle_dms: format_dms(angle),
                        position: p.position,
                        step: p.step,
                    }
                })
                .collect(),
            ports: self.ports.clone(),
            interferometers: self.interferometers.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlateJson {
    pub kind: PlateKind,
    pub angle_deg: f64,
    pub angle_dms: String,
    pub position: i64,
    pub step: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetlistJson {
    pub displacers: usize,
    pub plates: Vec<PlateJson>,
    pub ports: Vec<i64>,
    pub interferometers: Vec<Interferometer>,
}

/// One displacer per step, decomposed plates at every non-identity coin.
pub fn compile_netlist(schedule: &CoinSchedule) -> OpticalNetlist {
    let mut plates = Vec::new();
    for (i, layer) in schedule.steps().iter().enumerate() {
        for (&position, op) in layer {
            plates.extend(decompose(op).into_iter().map(|p| WavePlate {
                kind: p.kind,
                angle_deg: p.angle_deg,
                position,
                step: i + 1,
            }));
        }
    }
    OpticalNetlist {
        displacers: schedule.len(),
        plates,
        ports: output_ports(schedule),
        interferometers: interferometers(schedule),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{sic_pairs, trine_pairs, Scenario};

    #[test]
    fn hwp_special_angles() {
        let s = 0.5f64.sqrt();
        assert!(hwp(22.5).matrix().distance(&Mat2::real(s, s, s, -s)) < 1e-15);
        assert!(hwp(45.0).matrix().distance(&Mat2::NOT) < 1e-15);
        assert!(hwp(0.0).matrix().distance(&Mat2::real(1.0, 0.0, 0.0, -1.0)) < 1e-15);
    }

    #[test]
    fn qwp_at_zero_is_diag_one_i() {
        assert!(qwp(0.0).matrix().distance(&Mat2::new(ONE, c(0.0), c(0.0), I)) < 1e-15);
    }

    #[test]
    fn conjugate_convention_is_shifted_standard() {
        for k in 0..36 {
            let a = 5.0 * k as f64;
            let conj = QwpConvention::Conjugate.qwp(a);
            let shifted = qwp(a + 90.0);
            assert!(conj.matrix().phase_distance(shifted.matrix()) < 1e-14);
        }
        assert!((QwpConvention::Conjugate.qwp_angle(60.0) - 150.0).abs() < 1e-12);
    }

    #[test]
    fn dms_rounding() {
        assert_eq!(format_dms(17.633), "17°38′");
        assert_eq!(format_dms(44.9999), "45°00′");
        assert_eq!(format_dms(-27.366), "-27°22′");
        assert_eq!(format_dms(2.25), "2°15′");
    }

    #[test]
    fn identity_decomposes_to_nothing() {
        assert!(decompose(&CoinOp::IDENTITY).is_empty());
        let phased = CoinOp::new_unchecked(Mat2::IDENTITY.scale(crate::linalg::cis(0.9)));
        assert!(decompose(&phased).is_empty());
    }

    #[test]
    fn trine_splitter_is_single_hwp() {
        let plates = decompose(&trine_pairs()[0].c2);
        assert_eq!(plates.len(), 1);
        assert_eq!(plates[0].kind, PlateKind::Hwp);
        assert!((plates[0].angle_deg - dms(17.0, 38.0)).abs() < 1.0 / 60.0);
    }

    #[test]
    fn sic_phased_coin_is_qwp_then_hwp() {
        let plates = decompose(&sic_pairs()[2].c1);
        assert_eq!(plates.len(), 2);
        assert_eq!(plates[0].kind, PlateKind::Qwp);
        assert_eq!(plates[1].kind, PlateKind::Hwp);
        assert!(product(&plates).phase_distance(sic_pairs()[2].c1.matrix()) < 1e-12);
    }

    #[test]
    fn usd_plate_angles() {
        use std::f64::consts::PI;
        assert!((usd_plate_angle(PI / 2.0).unwrap() - 45.0).abs() < 1e-6);
        assert!(usd_plate_angle(0.0).is_err());
        for theta in [0.3, 0.9, 1.4] {
            let a = usd_plate_angle(theta).unwrap();
            let want = Scenario::Usd { theta }.pairs().unwrap()[0].c2;
            assert!(hwp(a).matrix().distance(want.matrix()) < 1e-10);
        }
    }

    #[test]
    fn state_prep_linear() {
        let p = state_prep_angles(crate::scenario::trine_state(2));
        assert!((p.hwp_deg + 30.0).abs() < 1e-9);
        assert!(p.qwp_deg.is_none());
        let p = state_prep_angles(Vec2::V);
        assert!((p.hwp_deg - 45.0).abs() < 1e-9);
    }

    #[test]
    fn interferometer_id_parse() {
        let id: Interferometer = "3-4".parse().unwrap();
        assert_eq!(id, Interferometer { open: 3, close: 4 });
        assert_eq!(id.to_string(), "3-4");
        assert!("34".parse::<Interferometer>().is_err());
    }

    #[test]
    fn empty_schedule_netlist() {
        let n = compile_netlist(&CoinSchedule::empty());
        assert_eq!(n.displacers, 0);
        assert!(n.plates.is_empty());
        assert!(n.interferometers.is_empty());
        assert_eq!(n.ports, vec![0]);
    }
}

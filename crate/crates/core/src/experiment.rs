//! Counting statistics and optical imperfections.
//!
//! [`run_density`] evolves the full density matrix over `(position, coin)`.
//! When displacer `t` closes an interferometer with visibility `V`, the
//! coherences between the two arms that merge at each recombination site are
//! multiplied by `V` just before the displacer acts. For a balanced two-path
//! interferometer this gives fringe contrast `(I_max - I_min)/(I_max + I_min) = V`.
//!
//! Sampling uses ChaCha20 seeded through `SeedableRng::seed_from_u64`, which
//! is portable across platforms; a multinomial draw is built from conditional
//! binomials taken in ascending port order.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat2, Vec2, ZERO};
use crate::optics::{self, decompose, Interferometer, PlateSetting};
use crate::scenario::{usd_pairs, usd_state, usd_success_probability};
use crate::povm::build_circuit;
use crate::walk::{Coin, CoinLayer, CoinOp, CoinSchedule};

/// Count rate used by the reference tables: about 4×10⁴ coincidences.
pub const REFERENCE_TOTAL: u64 = 40_000;

/// Efficiency imbalance budget, `(η_max − η_min)/η_max`.
pub const DEFAULT_IMBALANCE_BUDGET: f64 = 0.05;

fn default_visibility() -> f64 {
    1.0
}

fn default_budget() -> f64 {
    DEFAULT_IMBALANCE_BUDGET
}

/// Imperfection knobs. Nothing is fitted by default: the default value is the
/// ideal apparatus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImperfectionConfig {
    /// Visibility per interferometer, keyed `"OPEN-CLOSE"` (e.g. `"1-2"`).
    #[serde(default)]
    pub visibilities: BTreeMap<String, f64>,
    /// Visibility of interferometers not listed above.
    #[serde(default = "default_visibility")]
    pub default_visibility: f64,
    /// Relative detection efficiency per port; unlisted ports have 1.
    #[serde(default)]
    pub port_efficiencies: BTreeMap<i64, f64>,
    #[serde(default = "default_budget")]
    pub imbalance_budget: f64,
    /// Systematic rotation error added to every compiled wave plate.
    #[serde(default)]
    pub plate_angle_offset_deg: f64,
    #[serde(default)]
    pub seed: u64,
}

impl Default for ImperfectionConfig {
    fn default() -> Self {
        ImperfectionConfig {
            visibilities: BTreeMap::new(),
            default_visibility: 1.0,
            port_efficiencies: BTreeMap::new(),
            imbalance_budget: DEFAULT_IMBALANCE_BUDGET,
            plate_angle_offset_deg: 0.0,
            seed: 0,
        }
    }
}

impl ImperfectionConfig {
    pub fn ideal() -> Self {
        Self::default()
    }

    /// Same visibility for every interferometer.
    pub fn uniform_visibility(v: f64) -> Self {
        ImperfectionConfig {
            default_visibility: v,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn parsed_visibilities(&self) -> Result<BTreeMap<Interferometer, f64>> {
        check_visibility("default", self.default_visibility)?;
        self.visibilities
            .iter()
            .map(|(k, &v)| {
                let id: Interferometer = k.parse().map_err(|_| Error::InvalidVisibility {
                    id: k.clone(),
                    value: v,
                })?;
                check_visibility(k, v)?;
                Ok((id, v))
            })
            .collect()
    }

    pub fn visibility(&self, id: Interferometer) -> f64 {
        self.visibilities
            .get(&id.to_string())
            .copied()
            .unwrap_or(self.default_visibility)
    }

    pub fn validate(&self) -> Result<()> {
        self.parsed_visibilities()?;
        for (&port, &eta) in &self.port_efficiencies {
            check_efficiency(port, eta)?;
        }
        if let Some(imbalance) = efficiency_imbalance(&self.port_efficiencies) {
            if imbalance > self.imbalance_budget + 1e-12 {
                return Err(Error::ImbalanceExceeded {
                    imbalance,
                    budget: self.imbalance_budget,
                });
            }
        }
        Ok(())
    }

    pub fn is_ideal(&self) -> bool {
        self.default_visibility == 1.0
            && self.visibilities.values().all(|&v| v == 1.0)
            && self.plate_angle_offset_deg == 0.0
            && self.port_efficiencies.values().all(|&e| e == 1.0)
    }
}

fn check_visibility(id: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidVisibility {
            id: id.to_string(),
            value: v,
        })
    }
}

fn check_efficiency(port: i64, eta: f64) -> Result<()> {
    if eta > 0.0 && eta <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidEfficiency { port, value: eta })
    }
}

/// `(η_max − η_min)/η_max` over the listed ports, with unlisted ports at 1.
fn efficiency_imbalance(eff: &BTreeMap<i64, f64>) -> Option<f64> {
    if eff.is_empty() {
        return None;
    }
    let max = eff.values().copied().fold(f64::MIN, f64::max);
    let min = eff.values().copied().fold(f64::MAX, f64::min);
    Some((max - min) / max)
}

/// Dense density matrix over sites `[lo, lo + sites)` and both coins.
struct Density {
    lo: i64,
    sites: usize,
    data: Vec<Complex64>,
}

impl Density {
    fn pure(lo: i64, sites: usize, positions: &[(i64, Vec2)]) -> Self {
        let dim = 2 * sites;
        let mut psi = vec![ZERO; dim];
        let mut d = Density {
            lo,
            sites,
            data: vec![ZERO; dim * dim],
        };
        for &(x, v) in positions {
            psi[d.idx(x, 0)] = v.0[0];
            psi[d.idx(x, 1)] = v.0[1];
        }
        for i in 0..dim {
            for j in 0..dim {
                d.data[i * dim + j] = psi[i] * psi[j].conj();
            }
        }
        d
    }

    fn dim(&self) -> usize {
        2 * self.sites
    }

    fn idx(&self, x: i64, coin: usize) -> usize {
        let site = (x - self.lo) as usize;
        debug_assert!(site < self.sites, "site {x} outside lattice");
        2 * site + coin
    }

    fn contains(&self, x: i64) -> bool {
        x >= self.lo && x < self.lo + self.sites as i64
    }

    fn apply_coin(&mut self, x: i64, u: &Mat2) {
        let dim = self.dim();
        let (i0, i1) = (self.idx(x, 0), self.idx(x, 1));
        let m = &u.0;
        for j in 0..dim {
            let (a, b) = (self.data[i0 * dim + j], self.data[i1 * dim + j]);
            self.data[i0 * dim + j] = m[0][0] * a + m[0][1] * b;
            self.data[i1 * dim + j] = m[1][0] * a + m[1][1] * b;
        }
        for i in 0..dim {
            let (a, b) = (self.data[i * dim + i0], self.data[i * dim + i1]);
            self.data[i * dim + i0] = a * m[0][0].conj() + b * m[0][1].conj();
            self.data[i * dim + i1] = a * m[1][0].conj() + b * m[1][1].conj();
        }
    }

    /// Scales the coherence between `(a, R)` and `(b, L)`, the two arms that
    /// meet between them after translation.
    fn dephase(&mut self, a: i64, b: i64, v: f64) {
        if !self.contains(a) || !self.contains(b) {
            return;
        }
        let dim = self.dim();
        let (i, j) = (self.idx(a, Coin::R.index()), self.idx(b, Coin::L.index()));
        self.data[i * dim + j] *= v;
        self.data[j * dim + i] *= v;
    }

    fn translate(&mut self) {
        let dim = self.dim();
        let target = |k: usize| -> Option<usize> {
            let site = (k / 2) as i64;
            let coin = k % 2;
            let shift = if coin == 0 { Coin::R.shift() } else { Coin::L.shift() };
            let ns = site + shift;
            (ns >= 0 && ns < self.sites as i64).then(|| 2 * ns as usize + coin)
        };
        let map: Vec<Option<usize>> = (0..dim).map(target).collect();
        let mut next = vec![ZERO; dim * dim];
        for i in 0..dim {
            let Some(ti) = map[i] else { continue };
            for j in 0..dim {
                let Some(tj) = map[j] else { continue };
                next[ti * dim + tj] = self.data[i * dim + j];
            }
        }
        self.data = next;
    }

    fn position_distribution(&self) -> BTreeMap<i64, f64> {
        let dim = self.dim();
        (0..self.sites)
            .map(|s| {
                let p = self.data[(2 * s) * dim + 2 * s].re
                    + self.data[(2 * s + 1) * dim + 2 * s + 1].re;
                (self.lo + s as i64, p)
            })
            .collect()
    }
}

fn product(plates: &[PlateSetting]) -> Mat2 {
    plates.iter().fold(Mat2::IDENTITY, |acc, p| p.matrix() * acc)
}

/// Rotates every compiled plate by `offset_deg` and returns the schedule the
/// misaligned hardware implements. The ideal coin's global phase is kept, so
/// a zero offset reproduces the schedule.
pub fn misaligned_schedule(schedule: &CoinSchedule, offset_deg: f64) -> Result<CoinSchedule> {
    if offset_deg == 0.0 {
        return Ok(schedule.clone());
    }
    let steps = schedule
        .steps()
        .iter()
        .map(|layer| {
            layer
                .iter()
                .map(|(&x, op)| {
                    let plates = decompose(op);
                    if plates.is_empty() {
                        return (x, *op);
                    }
                    let shifted: Vec<PlateSetting> = plates
                        .iter()
                        .map(|p| PlateSetting {
                            kind: p.kind,
                            angle_deg: p.angle_deg + offset_deg,
                        })
                        .collect();
                    let ideal = product(&plates);
                    let correction = product(&shifted) * ideal.adjoint();
                    (x, CoinOp::new_unchecked(correction * *op.matrix()))
                })
                .collect::<CoinLayer>()
        })
        .collect();
    CoinSchedule::new(steps)
}

/// Port distribution under finite visibility and plate misalignment.
/// Detection efficiencies are not applied here, see [`simulate`].
pub fn run_density(
    schedule: &CoinSchedule,
    input: Vec2,
    config: &ImperfectionConfig,
) -> Result<BTreeMap<i64, f64>> {
    config.parsed_visibilities()?;
    let norm_sqr = input.norm_sqr();
    if (norm_sqr - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized { norm_sqr });
    }
    let misaligned = misaligned_schedule(schedule, config.plate_angle_offset_deg)?;
    let recombinations = optics::recombinations(&misaligned);
    let steps = misaligned.len() as i64;
    let mut rho = Density::pure(-steps, (2 * steps + 1) as usize, &[(0, input)]);
    for (t, layer) in misaligned.steps().iter().enumerate() {
        for (&x, op) in layer {
            if rho.contains(x) {
                rho.apply_coin(x, op.matrix());
            }
        }
        if t >= 1 && !recombinations[t].is_empty() {
            let v = config.visibility(Interferometer { open: t, close: t + 1 });
            if v < 1.0 {
                for &site in &recombinations[t] {
                    rho.dephase(site - 1, site + 1, v);
                }
            }
        }
        rho.translate();
    }
    let mut ports: BTreeMap<i64, f64> = optics::output_ports(schedule)
        .into_iter()
        .map(|p| (p, 0.0))
        .collect();
    for (x, p) in rho.position_distribution() {
        if p > 1e-15 || ports.contains_key(&x) {
            ports.insert(x, p.max(0.0));
        }
    }
    Ok(ports)
}

/// Weights each port by its efficiency and renormalizes.
pub fn apply_efficiencies(
    dist: &BTreeMap<i64, f64>,
    eff: &BTreeMap<i64, f64>,
) -> Result<BTreeMap<i64, f64>> {
    for (&port, &eta) in eff {
        check_efficiency(port, eta)?;
    }
    let weighted: BTreeMap<i64, f64> = dist
        .iter()
        .map(|(&port, &p)| (port, p * eff.get(&port).copied().unwrap_or(1.0)))
        .collect();
    let total: f64 = weighted.values().sum();
    if total <= 0.0 {
        return Err(Error::Unnormalized { sum: total });
    }
    Ok(weighted.into_iter().map(|(k, p)| (k, p / total)).collect())
}

/// [`run_density`] followed by [`apply_efficiencies`].
pub fn simulate(
    schedule: &CoinSchedule,
    input: Vec2,
    config: &ImperfectionConfig,
) -> Result<BTreeMap<i64, f64>> {
    config.validate()?;
    let dist = run_density(schedule, input, config)?;
    if config.port_efficiencies.is_empty() {
        return Ok(dist);
    }
    apply_efficiencies(&dist, &config.port_efficiencies)
}

/// Sampled photon counts with normalized frequencies and binomial errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountTable {
    pub counts: BTreeMap<i64, u64>,
    pub total: u64,
    pub probabilities: BTreeMap<i64, f64>,
    pub std_errors: BTreeMap<i64, f64>,
    pub seed: u64,
}

impl CountTable {
    pub fn from_counts(counts: BTreeMap<i64, u64>, seed: u64) -> Self {
        let total: u64 = counts.values().sum();
        let n = total as f64;
        let probabilities: BTreeMap<i64, f64> =
            counts.iter().map(|(&k, &c)| (k, c as f64 / n)).collect();
        let std_errors = probabilities
            .iter()
            .map(|(&k, &p)| (k, binomial_std_error(p, total)))
            .collect();
        CountTable {
            counts,
            total,
            probabilities,
            std_errors,
            seed,
        }
    }

    /// Combined frequency and error of a set of ports.
    pub fn combined(&self, ports: &[i64]) -> (f64, f64) {
        let k: u64 = ports.iter().filter_map(|p| self.counts.get(p)).sum();
        let p = k as f64 / self.total as f64;
        (p, binomial_std_error(p, self.total))
    }
}

/// `√(p(1 − p)/n)`.
pub fn binomial_std_error(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).max(0.0).sqrt()
}

/// Renders `p` with `decimals` digits and the error in units of the last
/// digit in parentheses, e.g. `0.1684(20)`.
pub fn format_with_error(p: f64, err: f64, decimals: usize) -> String {
    let unit = 10f64.powi(-(decimals as i32));
    let e = (err / unit).round() as u64;
    format!("{p:.decimals$}({e:02})")
}

fn validate_distribution(dist: &BTreeMap<i64, f64>) -> Result<()> {
    for (&port, &p) in dist {
        if p < 0.0 || p.is_nan() {
            return Err(Error::NegativeProbability { port, value: p });
        }
    }
    let sum: f64 = dist.values().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::Unnormalized { sum });
    }
    Ok(())
}

/// Multinomial draw of `total` detections from `dist`.
pub fn sample_counts(dist: &BTreeMap<i64, f64>, total: u64, seed: u64) -> Result<CountTable> {
    validate_distribution(dist)?;
    if total == 0 {
        return Err(Error::EmptySample);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut remaining = total;
    let mut mass: f64 = dist.values().sum();
    let mut counts = BTreeMap::new();
    let last = dist.len() - 1;
    for (i, (&port, &p)) in dist.iter().enumerate() {
        let k = if i == last {
            remaining
        } else if remaining == 0 || p == 0.0 {
            0
        } else {
            let q = (p / mass).clamp(0.0, 1.0);
            Binomial::new(remaining, q)
                .expect("binomial parameters are in range")
                .sample(&mut rng)
        };
        counts.insert(port, k);
        remaining -= k;
        mass -= p;
    }
    Ok(CountTable::from_counts(counts, seed))
}

/// One row of a discrimination sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub theta: f64,
    pub p_theory: f64,
    pub p_sampled: f64,
    pub std_error: f64,
    pub seed: u64,
}

/// `kπ/20` for `k = 1..=10`.
pub fn usd_grid() -> Vec<f64> {
    (1..=10).map(|k| k as f64 * std::f64::consts::PI / 20.0).collect()
}

/// Seed used for row `index` of a sweep started from `seed`.
pub fn row_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add((index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Success probability per `θ`: theory and a sampled estimate from `total`
/// detections. Negative `θ` discriminates with the `|θ|` circuit and feeds
/// `ψ₋(|θ|)`. Rows come back sorted by `θ`, and row `i` of the sorted grid
/// is sampled with [`row_seed`]`(seed, i)`.
pub fn usd_sweep(thetas: &[f64], config: &ImperfectionConfig, total: u64) -> Result<Vec<SweepRow>> {
    config.validate()?;
    if total == 0 {
        return Err(Error::EmptySample);
    }
    let mut sorted = thetas.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .par_iter()
        .enumerate()
        .map(|(i, &theta)| {
            let magnitude = theta.abs();
            let p_theory = usd_success_probability(magnitude)?;
            let schedule = build_circuit(&usd_pairs(magnitude)?)?;
            let dist = simulate(&schedule, usd_state(magnitude, theta > 0.0), config)?;
            let seed = row_seed(config.seed, i);
            let table = sample_counts(&dist, total, seed)?;
            let (p_sampled, std_error) = table.combined(&[0, 2]);
            Ok(SweepRow {
                theta,
                p_theory,
                p_sampled,
                std_error,
                seed,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trine_dist() -> BTreeMap<i64, f64> {
        BTreeMap::from([(4, 2.0 / 3.0), (2, 1.0 / 6.0), (0, 1.0 / 6.0)])
    }

    #[test]
    fn degenerate_distribution() {
        let t = sample_counts(&BTreeMap::from([(0, 1.0)]), 100, 9).unwrap();
        assert_eq!(t.counts[&0], 100);
        assert_eq!(t.std_errors[&0], 0.0);
    }

    #[test]
    fn counts_sum_to_total() {
        let t = sample_counts(&trine_dist(), 40_000, 1).unwrap();
        assert_eq!(t.counts.values().sum::<u64>(), 40_000);
        let s: f64 = t.probabilities.values().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampling_is_reproducible() {
        let a = sample_counts(&trine_dist(), 40_000, 77).unwrap();
        let b = sample_counts(&trine_dist(), 40_000, 77).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let c = sample_counts(&trine_dist(), 40_000, 78).unwrap();
        assert_ne!(a.counts, c.counts);
    }

    #[test]
    fn negative_probability_rejected() {
        let d = BTreeMap::from([(0, 1.2), (2, -0.2)]);
        assert!(matches!(
            sample_counts(&d, 10, 0),
            Err(Error::NegativeProbability { port: 2, .. })
        ));
        assert!(matches!(
            sample_counts(&BTreeMap::from([(0, 0.5)]), 10, 0),
            Err(Error::Unnormalized { .. })
        ));
        assert!(matches!(sample_counts(&trine_dist(), 0, 0), Err(Error::EmptySample)));
    }

    #[test]
    fn uniform_efficiency_is_noop() {
        let eff = BTreeMap::from([(0, 0.6), (2, 0.6), (4, 0.6)]);
        let out = apply_efficiencies(&trine_dist(), &eff).unwrap();
        for (k, p) in trine_dist() {
            assert!((out[&k] - p).abs() < 1e-15);
        }
    }

    #[test]
    fn two_port_efficiency_arithmetic() {
        let d = BTreeMap::from([(0, 0.5), (1, 0.5)]);
        let out = apply_efficiencies(&d, &BTreeMap::from([(0, 1.0), (1, 0.95)])).unwrap();
        assert!((out[&0] - 0.5 / 0.975).abs() < 1e-15);
        assert!((out[&1] - 0.475 / 0.975).abs() < 1e-15);
        assert!((out[&0] - 0.512_820_5).abs() < 1e-7);
    }

    #[test]
    fn bad_efficiencies_rejected() {
        assert!(apply_efficiencies(&trine_dist(), &BTreeMap::from([(0, 0.0)])).is_err());
        assert!(apply_efficiencies(&trine_dist(), &BTreeMap::from([(0, -0.1)])).is_err());
        assert!(apply_efficiencies(&trine_dist(), &BTreeMap::from([(0, 1.1)])).is_err());
    }

    #[test]
    fn imbalance_budget_enforced() {
        let mut cfg = ImperfectionConfig::ideal();
        cfg.port_efficiencies = BTreeMap::from([(0, 1.0), (2, 0.96)]);
        assert!(cfg.validate().is_ok());
        cfg.port_efficiencies.insert(4, 0.9);
        assert!(matches!(cfg.validate(), Err(Error::ImbalanceExceeded { .. })));
    }

    #[test]
    fn invalid_visibility_rejected() {
        let mut cfg = ImperfectionConfig::uniform_visibility(1.2);
        assert!(matches!(cfg.validate(), Err(Error::InvalidVisibility { .. })));
        cfg.default_visibility = 1.0;
        cfg.visibilities.insert("1-2".into(), -0.1);
        assert!(cfg.validate().is_err());
        cfg.visibilities = BTreeMap::from([("12".into(), 0.9)]);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_json_defaults() {
        let cfg: ImperfectionConfig =
            serde_json::from_str(r#"{"visibilities":{"1-2":0.998},"seed":3}"#).unwrap();
        assert_eq!(cfg.default_visibility, 1.0);
        assert_eq!(cfg.imbalance_budget, 0.05);
        assert_eq!(cfg.visibility(Interferometer { open: 1, close: 2 }), 0.998);
        assert_eq!(cfg.visibility(Interferometer { open: 3, close: 4 }), 1.0);
        assert!(serde_json::from_str::<ImperfectionConfig>(r#"{"bogus":1}"#).is_err());
    }

    #[test]
    fn parenthetical_errors() {
        assert_eq!(format_with_error(0.16842, 0.00198, 4), "0.1684(20)");
        assert_eq!(format_with_error(0.0005, 0.00011, 4), "0.0005(01)");
    }

    #[test]
    fn row_seeds_are_distinct() {
        let seeds: std::collections::BTreeSet<u64> = (0..10).map(|i| row_seed(5, i)).collect();
        assert_eq!(seeds.len(), 10);
        assert_eq!(row_seed(5, 0), 5);
    }
}

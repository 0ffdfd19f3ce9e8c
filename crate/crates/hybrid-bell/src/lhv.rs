//! Local-hidden-variable counterpart of the quantum simulation: mixtures of
//! deterministic response strategies, their CHSH bound, and sampled count
//! records in the same shape as a direct Bell-point run.

use crate::apparatus::ScenarioStep;
use crate::optics;
use crate::trials::CountsRecord;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LhvError {
    #[error("model has no strategies")]
    Empty,
    #[error("strategy weight {0} is negative")]
    NegativeWeight(f64),
    #[error("strategy weights sum to {0}, expected 1 within 1e-9")]
    WeightSum(f64),
    #[error("strategy outputs must be ±1, found {0}")]
    BadOutput(i8),
}

/// One deterministic local response plan: Alice's ±1 outputs at her two
/// settings and Bob's at his.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DeterministicStrategy {
    pub a1: i8,
    pub a2: i8,
    pub b1: i8,
    pub b2: i8,
}

impl DeterministicStrategy {
    pub fn validate(&self) -> Result<(), LhvError> {
        for v in [self.a1, self.a2, self.b1, self.b2] {
            if v != 1 && v != -1 {
                return Err(LhvError::BadOutput(v));
            }
        }
        Ok(())
    }

    fn alice(&self, i: usize) -> i8 {
        if i == 1 {
            self.a1
        } else {
            self.a2
        }
    }

    fn bob(&self, j: usize) -> i8 {
        if j == 1 {
            self.b1
        } else {
            self.b2
        }
    }
}

/// All 16 deterministic strategies, in lexicographic (a1, a2, b1, b2) order
/// with +1 before −1.
pub fn enumerate_strategies() -> Vec<DeterministicStrategy> {
    let pm = [1i8, -1i8];
    let mut out = Vec::with_capacity(16);
    for a1 in pm {
        for a2 in pm {
            for b1 in pm {
                for b2 in pm {
                    out.push(DeterministicStrategy { a1, a2, b1, b2 });
                }
            }
        }
    }
    out
}

/// CHSH value −a₁b₁ + a₁b₂ + a₂b₁ + a₂b₂ of one deterministic strategy.
pub fn strategy_chsh(s: &DeterministicStrategy) -> f64 {
    f64::from(-s.a1 * s.b1 + s.a1 * s.b2 + s.a2 * s.b1 + s.a2 * s.b2)
}

/// A probabilistic mixture of deterministic strategies — the most general
/// local-hidden-variable model for this two-setting, two-outcome scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LhvModel {
    pub strategies: Vec<(f64, DeterministicStrategy)>,
}

impl LhvModel {
    pub fn validate(&self) -> Result<(), LhvError> {
        if self.strategies.is_empty() {
            return Err(LhvError::Empty);
        }
        let mut sum = 0.0;
        for (w, s) in &self.strategies {
            // `!(w >= 0)` also rejects NaN, which plain `< 0` lets through.
            if !(*w >= 0.0) || !w.is_finite() {
                return Err(LhvError::NegativeWeight(*w));
            }
            s.validate()?;
            sum += w;
        }
        if !((sum - 1.0).abs() <= 1e-9) {
            return Err(LhvError::WeightSum(sum));
        }
        Ok(())
    }

    /// Uniform mixture over all 16 strategies.
    pub fn uniform() -> Self {
        let strategies = enumerate_strategies()
            .into_iter()
            .map(|s| (1.0 / 16.0, s))
            .collect();
        Self { strategies }
    }

    /// A point mass on a strategy saturating the classical bound S = 2.
    pub fn optimal() -> Self {
        let best = enumerate_strategies()
            .into_iter()
            .max_by(|a, b| strategy_chsh(a).partial_cmp(&strategy_chsh(b)).unwrap())
            .unwrap();
        Self {
            strategies: vec![(1.0, best)],
        }
    }

    /// Exact model expectation of the CHSH combination.
    pub fn expectation_s(&self) -> f64 {
        self.strategies
            .iter()
            .map(|(w, s)| w * strategy_chsh(s))
            .sum()
    }

    /// Exact model correlation E(aᵢ, bⱼ).
    pub fn expectation_e(&self, i: usize, j: usize) -> f64 {
        self.strategies
            .iter()
            .map(|(w, s)| w * f64::from(s.alice(i) * s.bob(j)))
            .sum()
    }

    fn draw_strategy<R: Rng>(&self, rng: &mut R) -> DeterministicStrategy {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (w, s) in &self.strategies {
            acc += w;
            if u < acc {
                return *s;
            }
        }
        self.strategies.last().unwrap().1
    }
}

/// Simulates a direct Bell-point run governed by a local model instead of
/// the quantum state. Record shape and order match
/// [`crate::trials::run_bell_points`]: for each (i, j) the βⱼ cell then the
/// βⱼ⊥ cell, with Alice's ±1 mapped to Det1/Det2 and Bob's pass/block at
/// the analyzer mapped to Det3 firing in the βⱼ or βⱼ⊥ cell.
pub fn run_lhv_points(
    model: &LhvModel,
    lambda_nm: f64,
    pairs_per_cell: u64,
    seed: u64,
) -> Result<Vec<CountsRecord>, LhvError> {
    model.validate()?;
    let mut records = Vec::with_capacity(8);
    let mut point_index = 0u32;
    for i in 1..=2usize {
        for j in 1..=2usize {
            let alpha_deg = if i == 1 { 0.0 } else { 90.0 };
            let beta_deg = if j == 1 { -45.0 } else { 45.0 };
            let x_um = optics::x_for_alpha_deg(alpha_deg, lambda_nm);
            let phi = optics::pol2_for_beta_deg(beta_deg);
            for (cell, pol2_deg) in [(0u8, phi), (1u8, phi + 90.0)] {
                let mut rng = ChaCha12Rng::seed_from_u64(seed);
                rng.set_stream(u64::from(point_index) + 1);
                let bob_wants = if cell == 0 { 1 } else { -1 };
                let (mut s1, mut s2, mut s3, mut c13, mut c23) = (0u64, 0, 0, 0, 0);
                for _ in 0..pairs_per_cell {
                    let strat = model.draw_strategy(&mut rng);
                    let a = strat.alice(i);
                    let b = strat.bob(j);
                    if a == 1 {
                        s1 += 1;
                    } else {
                        s2 += 1;
                    }
                    if b == bob_wants {
                        s3 += 1;
                        if a == 1 {
                            c13 += 1;
                        } else {
                            c23 += 1;
                        }
                    }
                }
                records.push(CountsRecord {
                    step: ScenarioStep::Pol1Out,
                    point_index,
                    x_um,
                    pol2_deg,
                    pol1_deg: None,
                    duration_s: 1.0,
                    singles1: s1,
                    singles2: s2,
                    singles3: s3,
                    coinc13: c13,
                    coinc23: c23,
                });
                point_index += 1;
            }
        }
    }
    Ok(records)
}

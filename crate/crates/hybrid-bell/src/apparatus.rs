//! The assembled experiment: pair source, polarization-to-path conversion,
//! interferometer, analyzer, and detectors, yielding exact singles and
//! coincidence probabilities for any settings, scenario step, and noise
//! parameters.
//!
//! Detector layout: Det1 watches interferometer output |c⟩, Det2 watches
//! |d⟩, Det3 sits behind the photon-B analyzer (QWP2 + Pol2). Pol1, when
//! present, projects photon B's polarization before the analyzer; pairs it
//! blocks are treated as lost, which is what makes step-I coincidence peaks
//! 0.146 of the step-II peaks at the listed settings.

use crate::optics::{
    self, analyzer_chain, fiber_beam_splitter, inline_pc, linear_polarizer, on_b_pol, on_path,
    pbs, phase_scanner_alpha_rad, PathArm, PolarizerSetting,
};
use crate::qcore::{
    apply, dephase_mix, tensor, with_layout, ElementOperator, QcoreError,
    StateVector, C64,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ApparatusError {
    #[error("step {step:?} requires pol1 {requirement}")]
    InconsistentStep {
        step: ScenarioStep,
        requirement: &'static str,
    },
    #[error("noise model invalid: {0}")]
    InvalidNoise(String),
    #[error("noise parameters drive probability {0} above 1")]
    ProbabilityOverflow(f64),
    #[error(transparent)]
    Qcore(#[from] QcoreError),
}

/// One scan point's instrument settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    /// Phase-scanner (PBS stage) position, µm.
    pub x_um: f64,
    /// Pol2 orientation, degrees.
    pub phi_deg: f64,
    /// Pol1 orientation, degrees; present only in steps I/III.
    pub pol1_deg: Option<f64>,
    /// Fringe wavelength, nm.
    pub lambda_nm: f64,
}

/// Aggregate imperfections of the real table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Interferometric visibility V ∈ [0, 1]; scales all fringe terms.
    pub visibility: f64,
    /// Flat accidental coincidence probability added per coincidence counter.
    pub accidental_fraction: f64,
    /// Interferometer phase drift, degrees per scan point.
    pub drift_deg_per_point: f64,
    /// Detector efficiencies, each in (0, 1].
    pub efficiency_det1: f64,
    pub efficiency_det2: f64,
    pub efficiency_det3: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            visibility: 1.0,
            accidental_fraction: 0.0,
            drift_deg_per_point: 0.0,
            efficiency_det1: 1.0,
            efficiency_det2: 1.0,
            efficiency_det3: 1.0,
        }
    }
}

impl NoiseModel {
    pub fn validate(&self) -> Result<(), ApparatusError> {
        let bad = |msg: String| Err(ApparatusError::InvalidNoise(msg));
        if !(0.0..=1.0).contains(&self.visibility) {
            return bad(format!("visibility {} outside [0, 1]", self.visibility));
        }
        if self.accidental_fraction < 0.0 || !self.accidental_fraction.is_finite() {
            return bad(format!(
                "accidental_fraction {} must be ≥ 0",
                self.accidental_fraction
            ));
        }
        if !self.drift_deg_per_point.is_finite() {
            return bad("drift_deg_per_point must be finite".into());
        }
        for (name, eff) in [
            ("efficiency_det1", self.efficiency_det1),
            ("efficiency_det2", self.efficiency_det2),
            ("efficiency_det3", self.efficiency_det3),
        ] {
            if !(eff > 0.0 && eff <= 1.0) {
                return bad(format!("{name} {eff} outside (0, 1]"));
            }
        }
        Ok(())
    }
}

/// The three measurement phases of the protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScenarioStep {
    /// Step I: Pol1 inserted; singles oscillate, used for calibration.
    Pol1In,
    /// Step II: Pol1 removed; the Bell-test data.
    Pol1Out,
    /// Step III: Pol1 reinserted; drift check.
    Pol1Reinserted,
}

impl ScenarioStep {
    pub fn requires_pol1(self) -> bool {
        !matches!(self, ScenarioStep::Pol1Out)
    }
}

/// Exact per-pair outcome probabilities at one scan point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeProbabilities {
    /// Coincidence Det1 & Det3 at the current Pol2 setting.
    pub p_det1_det3: f64,
    /// Coincidence Det2 & Det3 at the current Pol2 setting.
    pub p_det2_det3: f64,
    /// Photon-A singles at Det1 / Det2.
    pub p_det1: f64,
    pub p_det2: f64,
    /// Photon-B singles at Det3.
    pub p_det3: f64,
    /// Probability that both photons of a pair are detected in coincidence.
    pub p_pair_detected: f64,
    /// The flat accidental part already included in each coincidence
    /// probability; the sampler uses it to keep count invariants exact.
    pub accidental: f64,
}

/// Builds the hybrid-entangled state after the PBS and both in-line
/// polarization controllers: (|b⟩_A|V⟩_B + |a⟩_A|H⟩_B)/√2 with photon A's
/// polarization factored into the common |θ,γ⟩ spectator state.
pub fn prepare_hybrid_state(theta_deg: f64, gamma_deg: f64) -> StateVector {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    // Pair source emitting (|H⟩_A|H⟩_B + |V⟩_A|V⟩_B)/√2: the polarization
    // correlation that puts path a together with |H⟩_B after the PBS.
    let h: StateVector = StateVector::qubit(one, zero);
    let v: StateVector = StateVector::qubit(zero, one);
    let hh = tensor(&h, &h).expect("dim 4");
    let vv = tensor(&v, &v).expect("dim 4");
    let source = hh
        .add(&vv)
        .scale(C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0));
    let after_pbs = with_layout(&apply(&pbs(), &source).expect("pbs"), vec![2, 2, 2]);
    let pc_a = inline_pc(theta_deg, gamma_deg, PathArm::A);
    let pc_b = inline_pc(theta_deg, gamma_deg, PathArm::B);
    apply(&pc_b, &apply(&pc_a, &after_pbs).expect("pc a")).expect("pc b")
}

fn pol1_projector(angle_deg: f64) -> ElementOperator {
    on_b_pol(&linear_polarizer(&PolarizerSetting::new(angle_deg)))
}

fn path_projector(path_index: usize) -> ElementOperator {
    let basis = StateVector::basis(vec![2], path_index);
    on_path(&ElementOperator::projector_onto(&basis))
}

/// Exact probabilities for a perfect apparatus.
pub fn ideal_probabilities(
    settings: &Settings,
    step: ScenarioStep,
) -> Result<OutcomeProbabilities, ApparatusError> {
    noisy_probabilities(settings, step, &NoiseModel::default(), 0.0)
}

/// Probabilities under the aggregate noise model. `elapsed_points` is the
/// scan time in points since the start of the run, used for phase drift.
pub fn noisy_probabilities(
    settings: &Settings,
    step: ScenarioStep,
    noise: &NoiseModel,
    elapsed_points: f64,
) -> Result<OutcomeProbabilities, ApparatusError> {
    noise.validate()?;
    match (step.requires_pol1(), settings.pol1_deg) {
        (true, None) => {
            return Err(ApparatusError::InconsistentStep {
                step,
                requirement: "to be present",
            })
        }
        (false, Some(_)) => {
            return Err(ApparatusError::InconsistentStep {
                step,
                requirement: "to be absent",
            })
        }
        _ => {}
    }

    let psi = prepare_hybrid_state(0.0, 0.0);
    let mut rho = dephase_mix(&psi, noise.visibility, 0)?;

    if let Some(chi) = settings.pol1_deg {
        // Pol1 projects photon B; blocked pairs are lost (trace drops).
        rho = rho.conjugate_by(&pol1_projector(chi))?;
    }

    let alpha = std::f64::consts::TAU * settings.x_um * 1000.0 / settings.lambda_nm
        + (noise.drift_deg_per_point * elapsed_points).to_radians();
    let ps = on_path(&phase_scanner_alpha_rad(alpha));
    let bs = on_path(&fiber_beam_splitter());
    rho = rho.conjugate_by(&bs.matmul(&ps))?;

    let p_c = path_projector(0);
    let p_d = path_projector(1);
    let (analyzer, _beta) = analyzer_chain(settings.phi_deg);
    let p_b = on_b_pol(&analyzer);

    let p1 = rho.probability(&p_c)?;
    let p2 = rho.probability(&p_d)?;
    let p3 = rho.probability(&p_b)?;
    let p13 = rho.probability(&p_c.matmul(&p_b))?;
    let p23 = rho.probability(&p_d.matmul(&p_b))?;

    let (e1, e2, e3) = (
        noise.efficiency_det1,
        noise.efficiency_det2,
        noise.efficiency_det3,
    );
    let acc = noise.accidental_fraction;
    let out = OutcomeProbabilities {
        p_det1_det3: p13 * e1 * e3 + acc,
        p_det2_det3: p23 * e2 * e3 + acc,
        p_det1: p1 * e1,
        p_det2: p2 * e2,
        p_det3: p3 * e3,
        p_pair_detected: p13 * e1 * e3 + p23 * e2 * e3,
        accidental: acc,
    };
    for p in [
        out.p_det1_det3,
        out.p_det2_det3,
        out.p_det1,
        out.p_det2,
        out.p_det3,
    ] {
        if p > 1.0 + 1e-12 {
            return Err(ApparatusError::ProbabilityOverflow(p));
        }
    }
    Ok(out)
}

/// Canonical CHSH settings: α₁ = 0° ↦ x_origin, α₂ = 90° ↦ x_origin + λ/4;
/// β₁ = −45° ↦ φ = 22.5°, β₂ = 45° ↦ φ = −22.5°. Returns the settings for
/// the (αᵢ, βⱼ) cell and for the orthogonal-β cell (φ + 90°).
pub fn settings_for_bell_point(
    i: usize,
    j: usize,
    lambda_nm: f64,
    x_origin_um: f64,
) -> (Settings, Settings) {
    assert!((1..=2).contains(&i) && (1..=2).contains(&j), "i, j ∈ {{1, 2}}");
    let alpha_deg = if i == 1 { 0.0 } else { 90.0 };
    let beta_deg = if j == 1 { -45.0 } else { 45.0 };
    let x_um = x_origin_um + optics::x_for_alpha_deg(alpha_deg, lambda_nm);
    let phi = optics::pol2_for_beta_deg(beta_deg);
    let mk = |phi_deg: f64| Settings {
        x_um,
        phi_deg,
        pol1_deg: None,
        lambda_nm,
    };
    (mk(phi), mk(phi + 90.0))
}

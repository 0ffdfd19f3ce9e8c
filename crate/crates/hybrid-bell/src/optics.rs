//! Operator constructors for every optical element of the setup, plus the
//! operational unit conversions between scanner position and interferometer
//! phase, and between analyzer polarizer angle and analysis phase.
//!
//! Angle arguments are degrees; positions are micrometers; wavelengths are
//! nanometers. Conversion to radians happens at this boundary only.

use crate::qcore::{
    apply, lift_to_composite, ElementOperator, OperatorKind, StateVector, C64,
};
use num_complex::Complex64;

/// Dims of the full composite space (A_path, A_pol, B_pol).
pub const COMPOSITE_DIMS: [usize; 3] = [2, 2, 2];

/// Pol2 mount offset, in degrees, between the analyzer's nominal angle φ
/// and the physical transmission-axis angle fed to [`linear_polarizer`].
///
/// A quarter-wave retarder with fast axis at −45° followed by a polarizer
/// at physical angle φ_p analyzes the elliptical state with phase
/// β = 90° − 2·φ_p. Reading the mount scale with its zero at −45° from the
/// horizontal (φ_p = φ + 45°) gives the operational relation β = −2φ used
/// throughout the analysis. Locked by the analyzer-chain projector test.
pub const POL2_MOUNT_OFFSET_DEG: f64 = 45.0;

/// Quarter-waveplate fast-axis angle used by the analyzer chain.
pub const ANALYZER_QWP_DEG: f64 = -45.0;

fn deg(d: f64) -> f64 {
    d.to_radians()
}

/// Normalizes an axis angle to (−90°, 90°]. Axes are π-periodic.
pub fn normalize_axis_deg(angle: f64) -> f64 {
    let mut a = angle % 180.0;
    if a <= -90.0 {
        a += 180.0;
    } else if a > 90.0 {
        a -= 180.0;
    }
    a
}

/// Normalizes a phase to (−180°, 180°].
pub fn normalize_phase_deg(angle: f64) -> f64 {
    let mut a = angle % 360.0;
    if a <= -180.0 {
        a += 360.0;
    } else if a > 180.0 {
        a -= 360.0;
    }
    a
}

/// Fast-axis orientation of a waveplate, degrees from horizontal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveplateSetting {
    angle_deg: f64,
}

impl WaveplateSetting {
    pub fn new(angle_deg: f64) -> Self {
        Self {
            angle_deg: normalize_axis_deg(angle_deg),
        }
    }

    pub fn angle_deg(&self) -> f64 {
        self.angle_deg
    }
}

/// Transmission-axis orientation of a linear polarizer, degrees from
/// horizontal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizerSetting {
    angle_deg: f64,
}

impl PolarizerSetting {
    pub fn new(angle_deg: f64) -> Self {
        Self {
            angle_deg: normalize_axis_deg(angle_deg),
        }
    }

    pub fn angle_deg(&self) -> f64 {
        self.angle_deg
    }
}

/// PBS translation-stage position and the fringe wavelength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseScannerSetting {
    pub x_um: f64,
    pub wavelength_nm: f64,
}

impl PhaseScannerSetting {
    pub fn new(x_um: f64, wavelength_nm: f64) -> Self {
        assert!(wavelength_nm > 0.0, "wavelength must be positive");
        Self { x_um, wavelength_nm }
    }

    /// Interferometer phase α = 2πx/λ, radians.
    pub fn alpha_rad(&self) -> f64 {
        std::f64::consts::TAU * self.x_um * 1000.0 / self.wavelength_nm
    }
}

/// x = αλ/2π: scanner position (µm) realizing a phase given in degrees.
pub fn x_for_alpha_deg(alpha_deg: f64, wavelength_nm: f64) -> f64 {
    alpha_deg / 360.0 * wavelength_nm / 1000.0
}

/// Analysis phase β reached by orienting Pol2 at φ: β = −2φ.
pub fn beta_for_pol2_deg(phi_deg: f64) -> f64 {
    normalize_phase_deg(-2.0 * phi_deg)
}

/// Pol2 orientation realizing a given analysis phase: φ = −β/2.
pub fn pol2_for_beta_deg(beta_deg: f64) -> f64 {
    -beta_deg / 2.0
}

fn c(re: f64, im: f64) -> C64 {
    Complex64::new(re, im)
}

/// The polarizing beam splitter as a path-creating isometry on photon A:
/// |H⟩_A ↦ |a⟩|H⟩_A and |V⟩_A ↦ |b⟩|V⟩_A, identity on B's polarization.
/// Maps the 4-dim (A_pol ⊗ B_pol) space into the 8-dim composite.
pub fn pbs() -> ElementOperator {
    let zero = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let mut entries = vec![zero; 8 * 4];
    // Input column index: a_pol * 2 + b_pol. Output row: path*4 + a_pol*2 + b_pol
    // with path = a_pol (H goes to a, V goes to b).
    for a_pol in 0..2 {
        for b_pol in 0..2 {
            let col = a_pol * 2 + b_pol;
            let row = a_pol * 4 + a_pol * 2 + b_pol;
            entries[row * 4 + col] = one;
        }
    }
    ElementOperator::new(8, 4, entries, OperatorKind::Isometry).expect("PBS isometry")
}

/// Which interferometer arm an in-line polarization controller sits in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathArm {
    A,
    B,
}

/// In-line polarization controller: a polarization unitary applied only in
/// one arm, mapping that arm's incoming polarization (|H⟩ in path a, |V⟩ in
/// path b) onto the common state |θ,γ⟩ = cosθ|H⟩ + e^{iγ} sinθ|V⟩. The
/// orthogonal input goes to the orthogonal complement with no extra phase.
/// Returned as the full 8-dim composite operator.
pub fn inline_pc(theta_deg: f64, gamma_deg: f64, arm: PathArm) -> ElementOperator {
    let th = deg(theta_deg);
    let ph = Complex64::from_polar(1.0, deg(gamma_deg));
    let (ct, st) = (th.cos(), th.sin());
    // Columns are images of |H⟩ and |V⟩ on the arm's polarization.
    let block: [[C64; 2]; 2] = match arm {
        // |H⟩ → |θ,γ⟩, |V⟩ → orthogonal complement.
        PathArm::A => [[c(ct, 0.0), c(-st, 0.0)], [ph * st, ph * ct]],
        // |V⟩ → |θ,γ⟩, |H⟩ → orthogonal complement.
        PathArm::B => [[-ph.conj() * st, c(ct, 0.0)], [c(ct, 0.0), ph * st]],
    };
    let arm_index = match arm {
        PathArm::A => 0usize,
        PathArm::B => 1usize,
    };
    let zero = c(0.0, 0.0);
    let mut entries = vec![zero; 8 * 8];
    for path in 0..2 {
        for a_pol_in in 0..2 {
            for b_pol in 0..2 {
                let col = path * 4 + a_pol_in * 2 + b_pol;
                if path == arm_index {
                    for a_pol_out in 0..2 {
                        let row = path * 4 + a_pol_out * 2 + b_pol;
                        entries[row * 8 + col] = block[a_pol_out][a_pol_in];
                    }
                } else {
                    entries[col * 8 + col] = c(1.0, 0.0);
                }
            }
        }
    }
    ElementOperator::new(8, 8, entries, OperatorKind::Unitary).expect("in-PC unitary")
}

/// Phase scanner: |a⟩ ↦ e^{iα}|a⟩ with α = 2πx/λ, |b⟩ unchanged.
/// Returned as a 2×2 operator on the path subsystem.
pub fn phase_scanner(setting: &PhaseScannerSetting) -> ElementOperator {
    phase_scanner_alpha_rad(setting.alpha_rad())
}

/// Phase scanner parametrized directly by the phase in radians.
pub fn phase_scanner_alpha_rad(alpha: f64) -> ElementOperator {
    let zero = c(0.0, 0.0);
    ElementOperator::new(
        2,
        2,
        vec![Complex64::from_polar(1.0, alpha), zero, zero, c(1.0, 0.0)],
        OperatorKind::Unitary,
    )
    .expect("phase unitary")
}

/// Single-mode fiber beam splitter on the path subsystem, relabelling
/// {a, b} → {c, d}: |a⟩ ↦ (|c⟩ + i|d⟩)/√2, |b⟩ ↦ (|d⟩ + i|c⟩)/√2.
pub fn fiber_beam_splitter() -> ElementOperator {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ElementOperator::new(
        2,
        2,
        // rows: c, d; cols: a, b
        vec![c(s, 0.0), c(0.0, s), c(0.0, s), c(s, 0.0)],
        OperatorKind::Unitary,
    )
    .expect("BS unitary")
}

/// Quarter waveplate with fast axis at the given angle:
/// R(θ) · diag(1, −i) · R(−θ). Acts on a single polarization subsystem.
pub fn quarter_waveplate(setting: &WaveplateSetting) -> ElementOperator {
    let th = deg(setting.angle_deg());
    let (ct, st) = (th.cos(), th.sin());
    let retard = c(0.0, -1.0);
    // R(θ) diag(1, retard) R(−θ)
    let m00 = c(ct * ct, 0.0) + retard * (st * st);
    let m01 = c(ct * st, 0.0) - retard * (ct * st);
    let m10 = m01;
    let m11 = c(st * st, 0.0) + retard * (ct * ct);
    ElementOperator::new(2, 2, vec![m00, m01, m10, m11], OperatorKind::Unitary)
        .expect("QWP unitary")
}

/// Linear polarizer: rank-1 projector onto cos φ|H⟩ + sin φ|V⟩.
pub fn linear_polarizer(setting: &PolarizerSetting) -> ElementOperator {
    let ph = deg(setting.angle_deg());
    let axis = StateVector::qubit(c(ph.cos(), 0.0), c(ph.sin(), 0.0));
    ElementOperator::projector_onto(&axis)
}

/// The photon-B analyzer: QWP2 at −45° followed by Pol2 at nominal angle φ
/// (physical angle φ + [`POL2_MOUNT_OFFSET_DEG`]). Returns the equivalent
/// rank-1 projector on the incoming polarization together with the analysis
/// phase β = −2φ; the projector equals |β⟩⟨β| with
/// |β⟩ = (|H⟩ + e^{iβ}|V⟩)/√2.
pub fn analyzer_chain(phi_deg: f64) -> (ElementOperator, f64) {
    let qwp = quarter_waveplate(&WaveplateSetting::new(ANALYZER_QWP_DEG));
    let pol_axis = deg(phi_deg + POL2_MOUNT_OFFSET_DEG);
    let axis = StateVector::qubit(c(pol_axis.cos(), 0.0), c(pol_axis.sin(), 0.0));
    // Passing the chain means projecting the input onto Q†|axis⟩.
    let measured = apply(&qwp.dagger(), &axis).expect("2x2 on qubit");
    let projector = ElementOperator::projector_onto(&measured);
    (projector, beta_for_pol2_deg(phi_deg))
}

/// |β⟩ = (|H⟩ + e^{iβ}|V⟩)/√2 for a phase given in degrees.
pub fn beta_state(beta_deg: f64) -> StateVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    StateVector::qubit(c(s, 0.0), Complex64::from_polar(s, deg(beta_deg)))
}

/// Convenience: lifts a 2×2 path operator to the 8-dim composite.
pub fn on_path(op: &ElementOperator) -> ElementOperator {
    lift_to_composite(op, 0, &COMPOSITE_DIMS).expect("path lift")
}

/// Convenience: lifts a 2×2 photon-B polarization operator to the 8-dim
/// composite.
pub fn on_b_pol(op: &ElementOperator) -> ElementOperator {
    lift_to_composite(op, 2, &COMPOSITE_DIMS).expect("B_pol lift")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{apply, born_probability, tensor, StateVector};
    use approx::assert_abs_diff_eq;

    fn ket_h() -> StateVector {
        StateVector::qubit(c(1.0, 0.0), c(0.0, 0.0))
    }

    fn ket_v() -> StateVector {
        StateVector::qubit(c(0.0, 0.0), c(1.0, 0.0))
    }

    fn ket_path_a() -> StateVector {
        StateVector::qubit(c(1.0, 0.0), c(0.0, 0.0))
    }

    fn ket_path_b() -> StateVector {
        StateVector::qubit(c(0.0, 0.0), c(1.0, 0.0))
    }

    #[test]
    fn axis_normalization() {
        assert_abs_diff_eq!(normalize_axis_deg(112.5), -67.5, epsilon = 1e-12);
        assert_abs_diff_eq!(normalize_axis_deg(-90.0), 90.0, epsilon = 1e-12);
        assert_abs_diff_eq!(normalize_axis_deg(90.0), 90.0, epsilon = 1e-12);
    }

    #[test]
    fn pbs_maps_h_to_path_a() {
        let input = tensor(&ket_h(), &ket_h()).unwrap();
        let out = apply(&pbs(), &input).unwrap();
        // expect |a,H,H⟩ = index 0
        assert_abs_diff_eq!(out.amplitudes()[0].re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn pbs_maps_v_to_path_b() {
        let input = tensor(&ket_v(), &ket_h()).unwrap();
        let out = apply(&pbs(), &input).unwrap();
        // |b,V,H⟩ = 1*4 + 1*2 + 0 = 6
        assert_abs_diff_eq!(out.amplitudes()[6].re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn pbs_is_linear_on_superpositions() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = StateVector::qubit(c(s, 0.0), c(s, 0.0));
        let input = tensor(&plus, &ket_h()).unwrap();
        let out = apply(&pbs(), &input).unwrap();
        assert_abs_diff_eq!(out.norm(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.amplitudes()[0].re, s, epsilon = 1e-12);
        assert_abs_diff_eq!(out.amplitudes()[6].re, s, epsilon = 1e-12);
    }

    #[test]
    fn inline_pc_trivial_settings() {
        // θ=0, γ=0: |θ,γ⟩=|H⟩, so the arm-a controller is the identity.
        let pc = inline_pc(0.0, 0.0, PathArm::A);
        for i in 0..8 {
            assert_abs_diff_eq!(pc.at(i, i).re, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn inline_pc_theta_90_arm_b_fixes_v() {
        // θ=90°: |θ,γ⟩ = e^{iγ}|V⟩, so |V⟩ in arm b stays |V⟩ up to phase.
        let pc = inline_pc(90.0, 30.0, PathArm::B);
        let in_bv = tensor(
            &tensor(&ket_path_b(), &ket_v()).unwrap(),
            &ket_h(),
        )
        .unwrap();
        let out = apply(&pc, &in_bv).unwrap();
        // |b,V,H⟩ index 6 should carry all the weight.
        assert_abs_diff_eq!(out.amplitudes()[6].norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn inline_pcs_erase_path_distinguishability() {
        for (theta, gamma) in [(30.0, 70.0), (12.0, -50.0), (81.0, 140.0)] {
            let state = crate::apparatus::prepare_hybrid_state(theta, gamma);
            // Photon-A polarization must factor out: its reduced state is pure.
            let rho = crate::qcore::DensityOperator::from_pure(&state);
            let red = rho.reduced(1);
            let purity: f64 = (0..2)
                .flat_map(|i| (0..2).map(move |j| (i, j)))
                .map(|(i, j)| (red[i * 2 + j] * red[j * 2 + i]).re)
                .sum();
            assert_abs_diff_eq!(purity, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn phase_scanner_zero_is_identity() {
        let ps = phase_scanner(&PhaseScannerSetting::new(0.0, 708.6));
        for i in 0..2 {
            assert_abs_diff_eq!(ps.at(i, i).re, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn quarter_wavelength_position_is_90_degrees() {
        let s = PhaseScannerSetting::new(0.17715, 708.6);
        assert_abs_diff_eq!(s.alpha_rad().to_degrees(), 90.0, epsilon = 1e-9);
    }

    #[test]
    fn full_wavelength_is_identity_up_to_global_phase() {
        let ps = phase_scanner(&PhaseScannerSetting::new(0.7086, 708.6));
        let ratio = ps.at(0, 0) / ps.at(1, 1);
        assert_abs_diff_eq!(ratio.re, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(ratio.im, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn phase_scanner_composes_additively() {
        let lambda = 708.6;
        let p1 = phase_scanner(&PhaseScannerSetting::new(0.1, lambda));
        let p2 = phase_scanner(&PhaseScannerSetting::new(0.23, lambda));
        let p12 = phase_scanner(&PhaseScannerSetting::new(0.33, lambda));
        let composed = p1.matmul(&p2);
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(
                    (composed.at(i, j) - p12.at(i, j)).norm(),
                    0.0,
                    epsilon = 1e-9
                );
            }
        }
    }

    #[test]
    fn beam_splitter_on_a_and_b() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let out_a = apply(&fiber_beam_splitter(), &ket_path_a()).unwrap();
        assert_abs_diff_eq!(out_a.amplitudes()[0].re, s, epsilon = 1e-12); // |c⟩
        assert_abs_diff_eq!(out_a.amplitudes()[1].im, s, epsilon = 1e-12); // i|d⟩
        let out_b = apply(&fiber_beam_splitter(), &ket_path_b()).unwrap();
        assert_abs_diff_eq!(out_b.amplitudes()[0].im, s, epsilon = 1e-12); // i|c⟩
        assert_abs_diff_eq!(out_b.amplitudes()[1].re, s, epsilon = 1e-12); // |d⟩
    }

    #[test]
    fn chain_reproduces_primed_state() {
        // ½[(|d⟩+i|c⟩)|V⟩ + e^{iα}(|c⟩+i|d⟩)|H⟩], photon-A pol spectator.
        let alpha_deg = 37.0;
        let lambda = 708.6;
        let x = x_for_alpha_deg(alpha_deg, lambda);
        let state = crate::apparatus::prepare_hybrid_state(0.0, 0.0);
        let ps = on_path(&phase_scanner(&PhaseScannerSetting::new(x, lambda)));
        let bs = on_path(&fiber_beam_splitter());
        let out = apply(&bs, &apply(&ps, &state).unwrap()).unwrap();
        let e = Complex64::from_polar(0.5, alpha_deg.to_radians());
        // θ=γ=0 puts photon-A polarization in |H⟩ in both arms after the
        // controllers: nonzero amplitudes at (c,H,V), (d,H,V), (c,H,H), (d,H,H).
        let amps = out.amplitudes();
        assert_abs_diff_eq!((amps[1] - c(0.0, 0.5)).norm(), 0.0, epsilon = 1e-9); // c,H,V ← i/2
        assert_abs_diff_eq!((amps[5] - c(0.5, 0.0)).norm(), 0.0, epsilon = 1e-9); // d,H,V ← 1/2
        assert_abs_diff_eq!((amps[0] - e).norm(), 0.0, epsilon = 1e-9); // c,H,H ← e^{iα}/2
        assert_abs_diff_eq!((amps[4] - e * c(0.0, 1.0)).norm(), 0.0, epsilon = 1e-9);
        // d,H,H ← i e^{iα}/2
    }

    #[test]
    fn qwp_at_zero_preserves_h_and_retards_v() {
        let q = quarter_waveplate(&WaveplateSetting::new(0.0));
        assert_abs_diff_eq!(q.at(0, 0).re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!((q.at(1, 1) - c(0.0, -1.0)).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(q.at(0, 1).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn qwp_twice_is_half_wave() {
        let th = 23.0;
        let q = quarter_waveplate(&WaveplateSetting::new(th));
        let hw = q.matmul(&q);
        // A half-wave plate at θ flips the polarization about the fast axis:
        // HWP = R(θ) diag(1,−1) R(−θ) up to global phase.
        let rad = th.to_radians();
        let (ctwo, stwo) = ((2.0 * rad).cos(), (2.0 * rad).sin());
        let expect = [[ctwo, stwo], [stwo, -ctwo]];
        let phase = hw.at(0, 0) / c(expect[0][0], 0.0);
        assert_abs_diff_eq!(phase.norm(), 1.0, epsilon = 1e-9);
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(
                    (hw.at(i, j) - phase * c(expect[i][j], 0.0)).norm(),
                    0.0,
                    epsilon = 1e-9
                );
            }
        }
    }

    #[test]
    fn polarizer_basics() {
        let ph0 = linear_polarizer(&PolarizerSetting::new(0.0));
        assert_abs_diff_eq!(ph0.at(0, 0).re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ph0.at(1, 1).norm(), 0.0, epsilon = 1e-12);

        let p45 = linear_polarizer(&PolarizerSetting::new(45.0));
        assert_abs_diff_eq!(
            born_probability(&p45, &ket_h()).unwrap(),
            0.5,
            epsilon = 1e-12
        );

        let p135 = linear_polarizer(&PolarizerSetting::new(135.0));
        let prod = p45.matmul(&p135);
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(prod.at(i, j).norm(), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn analyzer_chain_hits_paper_settings() {
        let (p, beta) = analyzer_chain(-22.5);
        assert_abs_diff_eq!(beta, 45.0, epsilon = 1e-12);
        let target = beta_state(45.0);
        assert_abs_diff_eq!(
            born_probability(&p, &target).unwrap(),
            1.0,
            epsilon = 1e-9
        );

        let (p, beta) = analyzer_chain(22.5);
        assert_abs_diff_eq!(beta, -45.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            born_probability(&p, &beta_state(-45.0)).unwrap(),
            1.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn analyzer_chain_projects_onto_beta_state_on_degree_grid() {
        let mut phi = -89.0;
        while phi <= 90.0 {
            let (p, beta) = analyzer_chain(phi);
            assert_abs_diff_eq!(beta, normalize_phase_deg(-2.0 * phi), epsilon = 1e-12);
            let target = beta_state(-2.0 * phi);
            assert_abs_diff_eq!(
                born_probability(&p, &target).unwrap(),
                1.0,
                epsilon = 1e-9
            );
            phi += 1.0;
        }
    }

    #[test]
    fn analyzer_chain_orthogonal_settings_complete() {
        for phi in [-22.5, 10.0, 40.0, 75.0] {
            let (p, _) = analyzer_chain(phi);
            let (q, _) = analyzer_chain(phi + 90.0);
            let prod = p.matmul(&q);
            let mut max_off = 0.0f64;
            for i in 0..2 {
                for j in 0..2 {
                    max_off = max_off.max(prod.at(i, j).norm());
                    let sum = p.at(i, j) + q.at(i, j);
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!((sum - c(expect, 0.0)).norm(), 0.0, epsilon = 1e-9);
                }
            }
            assert!(max_off < 1e-9);
        }
    }

    #[test]
    fn pol1_overlap_ratio_at_paper_settings() {
        // |⟨β₂ | −45° linear⟩|² = (1 − cos 45°)/2 ≈ 0.1464
        let minus45 = StateVector::qubit(
            c(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            c(-std::f64::consts::FRAC_1_SQRT_2, 0.0),
        );
        let (p, _) = analyzer_chain(-22.5);
        let got = born_probability(&p, &minus45).unwrap();
        let expect = (1.0 - 45f64.to_radians().cos()) / 2.0;
        assert_abs_diff_eq!(got, expect, epsilon = 1e-9);
        assert_abs_diff_eq!(got, 0.146, epsilon = 5e-4);
    }
}

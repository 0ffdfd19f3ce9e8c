//! The data pipeline: fixed-wavelength sinusoid fits, interferometer phase
//! calibration, correlation coefficients, the CHSH S parameter with
//! Poissonian error propagation, and phase-jump / drift diagnostics.

use crate::apparatus::ScenarioStep;
use crate::optics::{self, normalize_phase_deg};
use crate::trials::CountsRecord;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("need at least 3 points spanning half a fringe period, got {points} points spanning {span_deg:.1}°")]
    InsufficientData { points: usize, span_deg: f64 },
    #[error("rank-deficient fit design (points too clustered)")]
    RankDeficient,
    #[error("fitted offset {0} is negative")]
    NegativeOffset(f64),
    #[error("fringe visibility {0:.3} too low to locate maxima (needs > 0.2; step II data?)")]
    LowVisibility(f64),
    #[error("no step I calibration region in the data")]
    MissingCalibration,
    #[error("no step II region found for Pol2 at {0}°")]
    MissingRegion(f64),
    #[error("zero total counts in a correlation cell")]
    ZeroTotal,
    #[error("record stream is empty")]
    NoRecords,
}

/// Result of a fixed-wavelength least-squares fringe fit
/// y = offset + amp_sin·sin(2πx/λ) + amp_cos·cos(2πx/λ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinusoidFit {
    pub offset: f64,
    pub amp_sin: f64,
    pub amp_cos: f64,
    /// Phase of the equivalent R·sin(2πx/λ + phase) form, degrees in
    /// (−180°, 180°].
    pub phase_deg: f64,
    /// Michelson visibility √(amp_sin² + amp_cos²)/offset.
    pub visibility: f64,
    pub rms_residual: f64,
    /// 1σ uncertainty of the fitted phase, degrees, from the residual-based
    /// parameter covariance.
    pub phase_sigma_deg: f64,
    pub lambda_nm: f64,
}

impl SinusoidFit {
    /// Fringe angle ξ = 2πx/λ for x in µm.
    fn xi(&self, x_um: f64) -> f64 {
        std::f64::consts::TAU * x_um * 1000.0 / self.lambda_nm
    }

    /// Model value at a scanner position.
    pub fn eval(&self, x_um: f64) -> f64 {
        let xi = self.xi(x_um);
        self.offset + self.amp_sin * xi.sin() + self.amp_cos * xi.cos()
    }

    pub fn amplitude(&self) -> f64 {
        self.amp_sin.hypot(self.amp_cos)
    }
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    // Gaussian elimination with partial pivoting on the 3x3 normal system.
    let mut m = [[0.0f64; 4]; 3];
    for i in 0..3 {
        m[i][..3].copy_from_slice(&a[i]);
        m[i][3] = b[i];
    }
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| {
            m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap()
        })?;
        if m[pivot][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..4 {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    let mut x = [0.0f64; 3];
    for i in (0..3).rev() {
        let mut acc = m[i][3];
        for k in i + 1..3 {
            acc -= m[i][k] * x[k];
        }
        x[i] = acc / m[i][i];
    }
    Some(x)
}

fn invert3(a: [[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let mut inv = [[0.0f64; 3]; 3];
    for col in 0..3 {
        let mut e = [0.0f64; 3];
        e[col] = 1.0;
        let x = solve3(a, e)?;
        for row in 0..3 {
            inv[row][col] = x[row];
        }
    }
    Some(inv)
}

/// Linear least squares of counts against a fixed-wavelength sinusoid.
/// The wavelength being fixed makes the model linear in its three
/// parameters, so the fit is the closed-form normal-equation solution.
pub fn fit_fixed_wavelength(
    points: &[(f64, f64)],
    lambda_nm: f64,
) -> Result<SinusoidFit, AnalysisError> {
    assert!(lambda_nm > 0.0);
    let xi = |x_um: f64| std::f64::consts::TAU * x_um * 1000.0 / lambda_nm;
    let span = points
        .iter()
        .map(|p| xi(p.0))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    let span_rad = (span.1 - span.0).max(0.0);
    if points.len() < 3 || span_rad < std::f64::consts::PI {
        return Err(AnalysisError::InsufficientData {
            points: points.len(),
            span_deg: span_rad.to_degrees(),
        });
    }

    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    for &(x, y) in points {
        let xi = xi(x);
        let row = [1.0, xi.sin(), xi.cos()];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
            atb[i] += row[i] * y;
        }
    }
    let [offset, amp_sin, amp_cos] = solve3(ata, atb).ok_or(AnalysisError::RankDeficient)?;
    if offset < 0.0 {
        return Err(AnalysisError::NegativeOffset(offset));
    }

    let n = points.len() as f64;
    let ss_res: f64 = points
        .iter()
        .map(|&(x, y)| {
            let xi = xi(x);
            let model = offset + amp_sin * xi.sin() + amp_cos * xi.cos();
            (y - model).powi(2)
        })
        .sum();
    let rms_residual = (ss_res / n).sqrt();
    let dof = (n - 3.0).max(1.0);
    let s2 = ss_res / dof;
    let cov = invert3(ata).ok_or(AnalysisError::RankDeficient)?;
    let amplitude = amp_sin.hypot(amp_cos);
    let phase_deg = normalize_phase_deg(amp_cos.atan2(amp_sin).to_degrees());
    let phase_sigma_deg = if amplitude > 0.0 {
        let r4 = amplitude.powi(4);
        let var = s2
            * (amp_cos * amp_cos * cov[1][1] - 2.0 * amp_sin * amp_cos * cov[1][2]
                + amp_sin * amp_sin * cov[2][2])
            / r4;
        var.max(0.0).sqrt().to_degrees()
    } else {
        f64::INFINITY
    };
    let visibility = if amplitude <= 0.0 {
        0.0
    } else {
        amplitude / offset
    };
    Ok(SinusoidFit {
        offset,
        amp_sin,
        amp_cos,
        phase_deg,
        visibility,
        rms_residual,
        phase_sigma_deg,
        lambda_nm,
    })
}

/// Fringe-phase offset, degrees, between the Det2 singles maximum (which
/// defines α ≡ 2nπ operationally) and the α = 0 scanner origin under this
/// simulator's phase conventions with Pol1 at −45°: Det2 singles go as
/// 1 + sin α, so their maximum sits a quarter period above the origin.
pub const DET2_MAX_OFFSET_DEG: f64 = 90.0;

/// Locates the α ≡ 0 scanner position from a step-I/III Det2 singles fit.
/// Returns a representative origin in [0, λ); all downstream use is modulo
/// one fringe period.
pub fn calibrate_zero_phase(singles2_fit: &SinusoidFit) -> Result<f64, AnalysisError> {
    if singles2_fit.visibility <= 0.2 {
        return Err(AnalysisError::LowVisibility(singles2_fit.visibility));
    }
    // Model offset + R sin(ξ + p): maximum at ξ = 90° − p, origin at
    // maximum − DET2_MAX_OFFSET_DEG = −p.
    let origin_deg =
        (90.0 - singles2_fit.phase_deg - DET2_MAX_OFFSET_DEG).rem_euclid(360.0);
    Ok(origin_deg / 360.0 * singles2_fit.lambda_nm / 1000.0)
}

/// One correlation coefficient from its four coincidence counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub e: f64,
    pub sigma: f64,
    /// The inputs, ordered (C(αᵢ,βⱼ), C(αᵢ⊥,βⱼ⊥), C(αᵢ⊥,βⱼ), C(αᵢ,βⱼ⊥)).
    pub counts: [f64; 4],
}

/// E = (C₊ − C₋)/(C₊ + C₋) with C₊ = C(αᵢ,βⱼ) + C(αᵢ⊥,βⱼ⊥), and the
/// first-order Poisson error with σ_C = √C per counter.
pub fn correlation_coefficient(
    c_ij: f64,
    c_perp_perp: f64,
    c_perp_j: f64,
    c_i_perp: f64,
) -> Result<CorrelationResult, AnalysisError> {
    let counts = [c_ij, c_perp_perp, c_perp_j, c_i_perp];
    assert!(
        counts.iter().all(|c| *c >= 0.0 && c.is_finite()),
        "counts must be finite and non-negative"
    );
    let plus = c_ij + c_perp_perp;
    let minus = c_perp_j + c_i_perp;
    let total = plus + minus;
    if total <= 0.0 {
        return Err(AnalysisError::ZeroTotal);
    }
    let e = (plus - minus) / total;
    // ∂E/∂C = (1∓E)/T for counters in the plus/minus group.
    let var = ((1.0 - e).powi(2) * plus + (1.0 + e).powi(2) * minus) / total.powi(2);
    Ok(CorrelationResult {
        e,
        sigma: var.max(0.0).sqrt(),
        counts,
    })
}

/// The CHSH combination S = −E₁₁ + E₁₂ + E₂₁ + E₂₂ and its significance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshResult {
    pub e11: CorrelationResult,
    pub e12: CorrelationResult,
    pub e21: CorrelationResult,
    pub e22: CorrelationResult,
    pub s: f64,
    pub sigma_s: f64,
    /// (|S| − 2)/σ_S when |S| > 2, else 0.
    pub violation_sigmas: f64,
}

pub fn chsh_s(
    e11: CorrelationResult,
    e12: CorrelationResult,
    e21: CorrelationResult,
    e22: CorrelationResult,
) -> ChshResult {
    let s = -e11.e + e12.e + e21.e + e22.e;
    let sigma_s = (e11.sigma.powi(2) + e12.sigma.powi(2) + e21.sigma.powi(2) + e22.sigma.powi(2))
        .sqrt();
    let violation_sigmas = if s.abs() > 2.0 {
        if sigma_s > 0.0 {
            (s.abs() - 2.0) / sigma_s
        } else {
            f64::INFINITY
        }
    } else {
        0.0
    };
    ChshResult {
        e11,
        e12,
        e21,
        e22,
        s,
        sigma_s,
        violation_sigmas,
    }
}

/// Signed fringe-phase difference fit_b − fit_a, normalized to
/// (−180°, 180°].
pub fn phase_jump(fit_a: &SinusoidFit, fit_b: &SinusoidFit) -> f64 {
    normalize_phase_deg(fit_b.phase_deg - fit_a.phase_deg)
}

/// End-to-end interferometer drift: the phase difference between the
/// step-III and step-I calibration fits.
pub fn drift_estimate(step_i_fit: &SinusoidFit, step_iii_fit: &SinusoidFit) -> f64 {
    phase_jump(step_i_fit, step_iii_fit)
}

/// How the four Bell-point counts are read off the step-II scan regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtractionMode {
    /// Evaluate the region's fitted fringe at the Bell-point position
    /// (uses every point in the region).
    Fit,
    /// Use the raw counts of the scan point closest in fringe phase.
    Raw,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionFitReport {
    pub step: String,
    pub pol2_deg: f64,
    pub counter: String,
    pub fit: SinusoidFit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EValueReport {
    pub label: String,
    pub alpha_deg: f64,
    pub beta_deg: f64,
    pub result: CorrelationResult,
}

/// The analysis report emitted as JSON by the CLI.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub fits: Vec<RegionFitReport>,
    pub e_values: Vec<EValueReport>,
    pub s: f64,
    pub sigma_s: f64,
    pub violation_sigmas: f64,
    /// Coincidence fringe visibilities of the four step-II regions.
    pub visibilities: Vec<f64>,
    /// Fringe phase jumps between consecutive step-II regions.
    pub phase_jumps: Vec<f64>,
    /// Step I → step III phase drift; absent when no step III data exists.
    pub drift_deg: Option<f64>,
    pub x_origin_um: f64,
    pub mode: ExtractionMode,
}

struct Region<'a> {
    step: ScenarioStep,
    pol2_deg: f64,
    records: Vec<&'a CountsRecord>,
}

fn group_regions(records: &[CountsRecord]) -> Vec<Region<'_>> {
    let mut regions: Vec<Region<'_>> = Vec::new();
    for r in records {
        let same = regions.last().map(|g: &Region| {
            g.step == r.step
                && (g.pol2_deg - r.pol2_deg).abs() < 1e-9
                && g.records.last().map(|l| l.pol1_deg) == Some(r.pol1_deg)
        });
        if same == Some(true) {
            regions.last_mut().unwrap().records.push(r);
        } else {
            regions.push(Region {
                step: r.step,
                pol2_deg: r.pol2_deg,
                records: vec![r],
            });
        }
    }
    regions
}

fn fit_counter(
    region: &Region<'_>,
    lambda_nm: f64,
    counter: fn(&CountsRecord) -> u64,
) -> Result<SinusoidFit, AnalysisError> {
    let pts: Vec<(f64, f64)> = region
        .records
        .iter()
        .map(|r| (r.x_um, counter(r) as f64))
        .collect();
    fit_fixed_wavelength(&pts, lambda_nm)
}

fn same_axis(a_deg: f64, b_deg: f64) -> bool {
    let d = (a_deg - b_deg).rem_euclid(180.0);
    d.min(180.0 - d) < 1e-6
}

/// Circular distance of two fringe angles, radians.
fn fringe_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}

/// Runs the full pipeline on a scan-shaped record stream: calibrate from
/// step I, fit the four step-II regions, extract the four correlation
/// coefficients at the canonical settings, and assemble the CHSH result
/// plus diagnostics.
pub fn analyze_records(
    records: &[CountsRecord],
    lambda_nm: f64,
    mode: ExtractionMode,
) -> Result<Report, AnalysisError> {
    if records.is_empty() {
        return Err(AnalysisError::NoRecords);
    }
    let regions = group_regions(records);

    let step_i = regions
        .iter()
        .find(|g| g.step == ScenarioStep::Pol1In)
        .ok_or(AnalysisError::MissingCalibration)?;
    let step_i_singles2 = fit_counter(step_i, lambda_nm, |r| r.singles2)?;
    let x_origin_um = calibrate_zero_phase(&step_i_singles2)?;

    let mut fits = vec![RegionFitReport {
        step: "I".into(),
        pol2_deg: step_i.pol2_deg,
        counter: "singles2".into(),
        fit: step_i_singles2,
    }];
    if let Ok(f) = fit_counter(step_i, lambda_nm, |r| r.singles1) {
        fits.push(RegionFitReport {
            step: "I".into(),
            pol2_deg: step_i.pol2_deg,
            counter: "singles1".into(),
            fit: f,
        });
    }

    // Step II regions, in scan order.
    let step2: Vec<&Region> = regions
        .iter()
        .filter(|g| g.step == ScenarioStep::Pol1Out)
        .collect();
    let mut coinc13_fits = Vec::new();
    let mut coinc23_fits = Vec::new();
    for g in &step2 {
        let f13 = fit_counter(g, lambda_nm, |r| r.coinc13)?;
        let f23 = fit_counter(g, lambda_nm, |r| r.coinc23)?;
        for (counter, f) in [("coinc13", f13), ("coinc23", f23)] {
            fits.push(RegionFitReport {
                step: "II".into(),
                pol2_deg: g.pol2_deg,
                counter: counter.into(),
                fit: f,
            });
        }
        for (counter, sel) in [
            ("singles1", (|r: &CountsRecord| r.singles1) as fn(&CountsRecord) -> u64),
            ("singles2", |r: &CountsRecord| r.singles2),
        ] {
            if let Ok(f) = fit_counter(g, lambda_nm, sel) {
                fits.push(RegionFitReport {
                    step: "II".into(),
                    pol2_deg: g.pol2_deg,
                    counter: counter.into(),
                    fit: f,
                });
            }
        }
        coinc13_fits.push((g.pol2_deg, f13));
        coinc23_fits.push((g.pol2_deg, f23));
    }

    let find_region = |phi_deg: f64| -> Result<usize, AnalysisError> {
        step2
            .iter()
            .position(|g| same_axis(g.pol2_deg, phi_deg))
            .ok_or(AnalysisError::MissingRegion(phi_deg))
    };
    let xi = |x_um: f64| std::f64::consts::TAU * x_um * 1000.0 / lambda_nm;

    let cell_counts = |region_idx: usize, x_um: f64| -> (f64, f64) {
        let g = step2[region_idx];
        match mode {
            ExtractionMode::Fit => {
                let c13 = coinc13_fits[region_idx].1.eval(x_um).max(0.0);
                let c23 = coinc23_fits[region_idx].1.eval(x_um).max(0.0);
                (c13, c23)
            }
            ExtractionMode::Raw => {
                let target = xi(x_um);
                let best = g
                    .records
                    .iter()
                    .min_by(|a, b| {
                        fringe_distance(xi(a.x_um), target)
                            .partial_cmp(&fringe_distance(xi(b.x_um), target))
                            .unwrap()
                    })
                    .expect("regions are non-empty");
                (best.coinc13 as f64, best.coinc23 as f64)
            }
        }
    };

    let mut e_values = Vec::with_capacity(4);
    let mut e_results = Vec::with_capacity(4);
    for (i, j) in [(1usize, 1usize), (1, 2), (2, 1), (2, 2)] {
        let alpha_deg = if i == 1 { 0.0 } else { 90.0 };
        let beta_deg = if j == 1 { -45.0 } else { 45.0 };
        let phi = optics::pol2_for_beta_deg(beta_deg);
        let region_b = find_region(phi)?;
        let region_perp = find_region(phi + 90.0)?;
        let x_um = x_origin_um + optics::x_for_alpha_deg(alpha_deg, lambda_nm);
        let (c_ij, c_perp_j) = cell_counts(region_b, x_um);
        let (c_i_perp, c_perp_perp) = cell_counts(region_perp, x_um);
        let result = correlation_coefficient(c_ij, c_perp_perp, c_perp_j, c_i_perp)?;
        e_values.push(EValueReport {
            label: format!("E(a{i},b{j})"),
            alpha_deg,
            beta_deg,
            result,
        });
        e_results.push(result);
    }
    let chsh = chsh_s(e_results[0], e_results[1], e_results[2], e_results[3]);

    let visibilities: Vec<f64> = coinc13_fits.iter().map(|(_, f)| f.visibility).collect();
    let phase_jumps: Vec<f64> = coinc13_fits
        .windows(2)
        .map(|w| phase_jump(&w[0].1, &w[1].1))
        .collect();

    let drift_deg = regions
        .iter()
        .find(|g| g.step == ScenarioStep::Pol1Reinserted)
        .map(|g| -> Result<f64, AnalysisError> {
            let f = fit_counter(g, lambda_nm, |r| r.singles2)?;
            fits.push(RegionFitReport {
                step: "III".into(),
                pol2_deg: g.pol2_deg,
                counter: "singles2".into(),
                fit: f,
            });
            Ok(drift_estimate(&step_i_singles2, &f))
        })
        .transpose()?;

    Ok(Report {
        fits,
        e_values,
        s: chsh.s,
        sigma_s: chsh.sigma_s,
        violation_sigmas: chsh.violation_sigmas,
        visibilities,
        phase_jumps,
        drift_deg,
        x_origin_um,
        mode,
    })
}

/// CHSH result straight from the eight records of a direct Bell-point run
/// (see `trials::run_bell_points` for the record order).
pub fn chsh_from_bell_records(records: &[CountsRecord]) -> Result<ChshResult, AnalysisError> {
    if records.len() != 8 {
        return Err(AnalysisError::NoRecords);
    }
    let mut es = Vec::with_capacity(4);
    for cell in 0..4 {
        let beta_rec = &records[2 * cell];
        let perp_rec = &records[2 * cell + 1];
        es.push(correlation_coefficient(
            beta_rec.coinc13 as f64,
            perp_rec.coinc23 as f64,
            beta_rec.coinc23 as f64,
            perp_rec.coinc13 as f64,
        )?);
    }
    Ok(chsh_s(es[0], es[1], es[2], es[3]))
}

//! Turns outcome probabilities into simulated count records: Poisson
//! sampling with structurally consistent coincidences, the three-step scan
//! timeline, direct Bell-point runs, and bit-exact CSV persistence.
//!
//! Reproducibility: every scan point draws from its own RNG sub-stream
//! derived from `(seed, point_index)`, so results are independent of
//! execution order.

use crate::apparatus::{
    noisy_probabilities, ApparatusError, NoiseModel, OutcomeProbabilities, ScenarioStep, Settings,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrialsError {
    #[error("scan plan has an empty region schedule")]
    EmptySchedule,
    #[error("scan plan invalid: {0}")]
    InvalidPlan(String),
    #[error(transparent)]
    Apparatus(#[from] ApparatusError),
}

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("empty input: no header line")]
    Empty,
    #[error("malformed header: expected {expected:?}, found {found:?}")]
    BadHeader { expected: String, found: String },
    #[error("line {line}: expected {expected} fields, found {found}")]
    FieldCount {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: field {field}: {message}")]
    BadField {
        line: usize,
        field: &'static str,
        message: String,
    },
    #[error("line {line}: count invariant violated: {message}")]
    CountInvariant { line: usize, message: String },
}

/// One scan point's counts with its settings metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountsRecord {
    pub step: ScenarioStep,
    pub point_index: u32,
    pub x_um: f64,
    pub pol2_deg: f64,
    pub pol1_deg: Option<f64>,
    pub duration_s: f64,
    pub singles1: u64,
    pub singles2: u64,
    pub singles3: u64,
    pub coinc13: u64,
    pub coinc23: u64,
}

impl CountsRecord {
    fn check_invariants(&self) -> Result<(), String> {
        if self.coinc13 > self.singles1.min(self.singles3) {
            return Err(format!(
                "coinc13 ({}) exceeds min(singles1, singles3) = {}",
                self.coinc13,
                self.singles1.min(self.singles3)
            ));
        }
        if self.coinc23 > self.singles2.min(self.singles3) {
            return Err(format!(
                "coinc23 ({}) exceeds min(singles2, singles3) = {}",
                self.coinc23,
                self.singles2.min(self.singles3)
            ));
        }
        Ok(())
    }
}

/// One contiguous stretch of scan points sharing step and settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRegion {
    pub step: ScenarioStep,
    pub pol1_deg: Option<f64>,
    pub pol2_deg: f64,
    pub points: u32,
}

/// The full timeline of a simulated run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPlan {
    pub pair_rate_hz: f64,
    pub duration_per_point_s: f64,
    pub x_start_um: f64,
    pub x_step_um: f64,
    pub lambda_nm: f64,
    pub regions: Vec<ScanRegion>,
    pub seed: u64,
}

impl ScanPlan {
    /// The three-step timeline of the experiment: a calibration region with
    /// Pol1 in, four Bell regions with Pol1 out at the four Pol2 settings,
    /// and a drift-check region with Pol1 back in.
    pub fn paper_shaped(
        pair_rate_hz: f64,
        duration_per_point_s: f64,
        x_start_um: f64,
        x_step_um: f64,
        lambda_nm: f64,
        points_per_region: u32,
        pol1_deg: f64,
        seed: u64,
    ) -> Self {
        let mut regions = vec![ScanRegion {
            step: ScenarioStep::Pol1In,
            pol1_deg: Some(pol1_deg),
            pol2_deg: -22.5,
            points: points_per_region,
        }];
        for phi in [-22.5, 22.5, 67.5, 112.5] {
            regions.push(ScanRegion {
                step: ScenarioStep::Pol1Out,
                pol1_deg: None,
                pol2_deg: phi,
                points: points_per_region,
            });
        }
        regions.push(ScanRegion {
            step: ScenarioStep::Pol1Reinserted,
            pol1_deg: Some(pol1_deg),
            pol2_deg: -22.5,
            points: points_per_region,
        });
        Self {
            pair_rate_hz,
            duration_per_point_s,
            x_start_um,
            x_step_um,
            lambda_nm,
            regions,
            seed,
        }
    }

    pub fn total_points(&self) -> u64 {
        self.regions.iter().map(|r| u64::from(r.points)).sum()
    }

    pub fn validate(&self) -> Result<(), TrialsError> {
        if self.regions.is_empty() || self.total_points() == 0 {
            return Err(TrialsError::EmptySchedule);
        }
        let bad = |msg: String| Err(TrialsError::InvalidPlan(msg));
        if !(self.pair_rate_hz > 0.0) {
            return bad(format!("pair_rate_hz {} must be > 0", self.pair_rate_hz));
        }
        if !(self.duration_per_point_s > 0.0) {
            return bad(format!(
                "duration_per_point_s {} must be > 0",
                self.duration_per_point_s
            ));
        }
        if !(self.x_step_um > 0.0) {
            return bad(format!("x_step_um {} must be > 0", self.x_step_um));
        }
        if !(self.lambda_nm > 0.0) {
            return bad(format!("lambda_nm {} must be > 0", self.lambda_nm));
        }
        Ok(())
    }
}

/// Per-point RNG sub-stream: same key stream regardless of how many points
/// were sampled before this one.
fn point_rng(seed: u64, point_index: u32) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(u64::from(point_index) + 1);
    rng
}

fn poisson_draw<R: Rng>(rng: &mut R, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive mean").sample(rng) as u64
}

/// Samples one scan point. Pairs arrive Poisson-distributed and each pair
/// lands in exactly one joint detection category, so coincidence counts are
/// a subset of the singles by construction. Accidental coincidences are
/// extra uncorrelated events that increment both of their singles counters.
pub fn sample_counts<R: Rng>(
    p: &OutcomeProbabilities,
    pair_rate_hz: f64,
    duration_s: f64,
    rng: &mut R,
) -> (u64, u64, u64, u64, u64) {
    let mu = pair_rate_hz * duration_s;
    let clamp0 = |v: f64| v.max(0.0);
    let p13 = clamp0(p.p_det1_det3 - p.accidental);
    let p23 = clamp0(p.p_det2_det3 - p.accidental);
    let q1_only = clamp0(p.p_det1 - p13);
    let q2_only = clamp0(p.p_det2 - p23);
    let q3_only = clamp0(p.p_det3 - p13 - p23);

    let n13 = poisson_draw(rng, mu * p13);
    let n23 = poisson_draw(rng, mu * p23);
    let n1_only = poisson_draw(rng, mu * q1_only);
    let n2_only = poisson_draw(rng, mu * q2_only);
    let n3_only = poisson_draw(rng, mu * q3_only);
    let acc13 = poisson_draw(rng, mu * p.accidental);
    let acc23 = poisson_draw(rng, mu * p.accidental);

    let singles1 = n13 + n1_only + acc13;
    let singles2 = n23 + n2_only + acc23;
    let singles3 = n13 + n23 + n3_only + acc13 + acc23;
    let coinc13 = n13 + acc13;
    let coinc23 = n23 + acc23;
    (singles1, singles2, singles3, coinc13, coinc23)
}

/// Runs the full scan timeline, advancing x and elapsed time per point.
pub fn run_scan(plan: &ScanPlan, noise: &NoiseModel) -> Result<Vec<CountsRecord>, TrialsError> {
    plan.validate()?;
    noise.validate()?;
    let mut records = Vec::with_capacity(plan.total_points() as usize);
    let mut point_index: u32 = 0;
    for region in &plan.regions {
        for _ in 0..region.points {
            let x_um = plan.x_start_um + f64::from(point_index) * plan.x_step_um;
            let settings = Settings {
                x_um,
                phi_deg: region.pol2_deg,
                pol1_deg: region.pol1_deg,
                lambda_nm: plan.lambda_nm,
            };
            let probs =
                noisy_probabilities(&settings, region.step, noise, f64::from(point_index))?;
            let mut rng = point_rng(plan.seed, point_index);
            let (s1, s2, s3, c13, c23) = sample_counts(
                &probs,
                plan.pair_rate_hz,
                plan.duration_per_point_s,
                &mut rng,
            );
            records.push(CountsRecord {
                step: region.step,
                point_index,
                x_um,
                pol2_deg: region.pol2_deg,
                pol1_deg: region.pol1_deg,
                duration_s: plan.duration_per_point_s,
                singles1: s1,
                singles2: s2,
                singles3: s3,
                coinc13: c13,
                coinc23: c23,
            });
            point_index += 1;
        }
    }
    Ok(records)
}

/// A direct Bell-point run: one counting cell per (αᵢ, βⱼ) setting and per
/// orthogonal-β setting, eight cells total, no scan or calibration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellPlan {
    pub lambda_nm: f64,
    /// Expected pair count per counting cell.
    pub pairs_per_cell: f64,
    /// Scanner position realizing α = 0.
    pub x_origin_um: f64,
    pub seed: u64,
}

/// Simulates the eight Bell counting cells. Record order: for each
/// (i, j) ∈ {(1,1), (1,2), (2,1), (2,2)}, the βⱼ cell then the βⱼ⊥ cell.
pub fn run_bell_points(
    plan: &BellPlan,
    noise: &NoiseModel,
) -> Result<Vec<CountsRecord>, TrialsError> {
    if !(plan.pairs_per_cell > 0.0) {
        return Err(TrialsError::InvalidPlan(format!(
            "pairs_per_cell {} must be > 0",
            plan.pairs_per_cell
        )));
    }
    noise.validate()?;
    let mut records = Vec::with_capacity(8);
    let mut point_index = 0u32;
    for i in 1..=2 {
        for j in 1..=2 {
            let (settings, settings_perp) =
                crate::apparatus::settings_for_bell_point(i, j, plan.lambda_nm, plan.x_origin_um);
            for s in [settings, settings_perp] {
                let probs =
                    noisy_probabilities(&s, ScenarioStep::Pol1Out, noise, f64::from(point_index))?;
                let mut rng = point_rng(plan.seed, point_index);
                let (s1, s2, s3, c13, c23) =
                    sample_counts(&probs, plan.pairs_per_cell, 1.0, &mut rng);
                records.push(CountsRecord {
                    step: ScenarioStep::Pol1Out,
                    point_index,
                    x_um: s.x_um,
                    pol2_deg: s.phi_deg,
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

pub const CSV_HEADER: &str =
    "step,point_index,x_um,pol2_deg,pol1_deg,duration_s,singles1,singles2,singles3,coinc13,coinc23";

fn step_str(step: ScenarioStep) -> &'static str {
    match step {
        ScenarioStep::Pol1In => "I",
        ScenarioStep::Pol1Out => "II",
        ScenarioStep::Pol1Reinserted => "III",
    }
}

fn parse_step(s: &str) -> Option<ScenarioStep> {
    match s {
        "I" => Some(ScenarioStep::Pol1In),
        "II" => Some(ScenarioStep::Pol1Out),
        "III" => Some(ScenarioStep::Pol1Reinserted),
        _ => None,
    }
}

/// Serializes records to the fixed CSV schema. Floats use Rust's shortest
/// round-trip formatting, so `read_csv(write_csv(r)) == r` bit-exactly.
pub fn write_csv(records: &[CountsRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let pol1 = r.pol1_deg.map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            step_str(r.step),
            r.point_index,
            r.x_um,
            r.pol2_deg,
            pol1,
            r.duration_s,
            r.singles1,
            r.singles2,
            r.singles3,
            r.coinc13,
            r.coinc23
        ));
    }
    out
}

fn parse_f64(s: &str, line: usize, field: &'static str) -> Result<f64, CsvError> {
    let v: f64 = s.parse().map_err(|e| CsvError::BadField {
        line,
        field,
        message: format!("{e}: {s:?}"),
    })?;
    if !v.is_finite() {
        return Err(CsvError::BadField {
            line,
            field,
            message: format!("non-finite value {s:?}"),
        });
    }
    Ok(v)
}

fn parse_count(s: &str, line: usize, field: &'static str) -> Result<u64, CsvError> {
    s.parse().map_err(|e| CsvError::BadField {
        line,
        field,
        message: format!("{e}: {s:?}"),
    })
}

/// Parses the CSV schema written by [`write_csv`], validating count
/// invariants per line. Line numbers in errors are 1-based and include the
/// header.
pub fn read_csv(text: &str) -> Result<Vec<CountsRecord>, CsvError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(CsvError::Empty)?;
    if header.trim_end() != CSV_HEADER {
        return Err(CsvError::BadHeader {
            expected: CSV_HEADER.to_string(),
            found: header.to_string(),
        });
    }
    let mut records = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 11 {
            return Err(CsvError::FieldCount {
                line,
                expected: 11,
                found: fields.len(),
            });
        }
        let step = parse_step(fields[0]).ok_or(CsvError::BadField {
            line,
            field: "step",
            message: format!("unknown step {:?}", fields[0]),
        })?;
        let point_index = parse_count(fields[1], line, "point_index")? as u32;
        let x_um = parse_f64(fields[2], line, "x_um")?;
        let pol2_deg = parse_f64(fields[3], line, "pol2_deg")?;
        let pol1_deg = if fields[4].is_empty() {
            None
        } else {
            Some(parse_f64(fields[4], line, "pol1_deg")?)
        };
        let duration_s = parse_f64(fields[5], line, "duration_s")?;
        let record = CountsRecord {
            step,
            point_index,
            x_um,
            pol2_deg,
            pol1_deg,
            duration_s,
            singles1: parse_count(fields[6], line, "singles1")?,
            singles2: parse_count(fields[7], line, "singles2")?,
            singles3: parse_count(fields[8], line, "singles3")?,
            coinc13: parse_count(fields[9], line, "coinc13")?,
            coinc23: parse_count(fields[10], line, "coinc23")?,
        };
        record
            .check_invariants()
            .map_err(|message| CsvError::CountInvariant { line, message })?;
        records.push(record);
    }
    Ok(records)
}

/// Default Bell x positions used when none is calibrated: α measured from
/// x = 0.
pub fn default_bell_plan(lambda_nm: f64, pairs_per_cell: f64, seed: u64) -> BellPlan {
    BellPlan {
        lambda_nm,
        pairs_per_cell,
        x_origin_um: 0.0,
        seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apparatus::{ideal_probabilities, Settings};
    use crate::optics::x_for_alpha_deg;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;

    const LAMBDA: f64 = 708.6;

    fn probs_at(alpha_deg: f64, phi_deg: f64) -> OutcomeProbabilities {
        let s = Settings {
            x_um: x_for_alpha_deg(alpha_deg, LAMBDA),
            phi_deg,
            pol1_deg: None,
            lambda_nm: LAMBDA,
        };
        ideal_probabilities(&s, ScenarioStep::Pol1Out).unwrap()
    }

    #[test]
    fn zero_rate_gives_all_zero_record() {
        let p = probs_at(0.0, 0.0);
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let out = sample_counts(&p, 0.0, 1.0, &mut rng);
        assert_eq!(out, (0, 0, 0, 0, 0));
    }

    #[test]
    fn poisson_means_match_probabilities() {
        let p = probs_at(30.0, -22.5);
        let mu = 1.0e4;
        let reps = 1000;
        let mut sum13 = 0u64;
        let mut sum1 = 0u64;
        for k in 0..reps {
            let mut rng = ChaCha12Rng::seed_from_u64(1000 + k);
            let (s1, _, _, c13, _) = sample_counts(&p, mu, 1.0, &mut rng);
            sum13 += c13;
            sum1 += s1;
        }
        let mean13 = sum13 as f64 / reps as f64;
        let expect13 = mu * p.p_det1_det3;
        assert!(
            (mean13 - expect13).abs() < 3.0 * (expect13 / reps as f64).sqrt(),
            "mean {mean13} vs {expect13}"
        );
        let mean1 = sum1 as f64 / reps as f64;
        let expect1 = mu * p.p_det1;
        assert!((mean1 - expect1).abs() < 3.0 * (expect1 / reps as f64).sqrt());
    }

    #[test]
    fn poisson_variance_matches_mean() {
        let p = probs_at(75.0, -22.5);
        let mu = 2.0e3;
        let reps = 2000;
        let mut counts = Vec::with_capacity(reps);
        for k in 0..reps {
            let mut rng = ChaCha12Rng::seed_from_u64(77_000 + k as u64);
            let (_, _, _, c13, _) = sample_counts(&p, mu, 1.0, &mut rng);
            counts.push(c13 as f64);
        }
        let mean = counts.iter().sum::<f64>() / reps as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        assert!(mean > 100.0);
        assert!(
            (var - mean).abs() < 0.15 * mean,
            "variance {var} should be within 15% of mean {mean}"
        );
    }

    #[test]
    fn coincidences_bounded_by_singles() {
        let p = probs_at(45.0, 10.0);
        for k in 0..200 {
            let mut rng = ChaCha12Rng::seed_from_u64(k);
            let (s1, s2, s3, c13, c23) = sample_counts(&p, 500.0, 1.0, &mut rng);
            assert!(c13 <= s1.min(s3));
            assert!(c23 <= s2.min(s3));
        }
    }

    fn small_plan(seed: u64) -> ScanPlan {
        ScanPlan::paper_shaped(2000.0, 1.0, 26.0, 0.02, LAMBDA, 40, -45.0, seed)
    }

    #[test]
    fn scan_is_deterministic() {
        let noise = NoiseModel::default();
        let a = run_scan(&small_plan(42), &noise).unwrap();
        let b = run_scan(&small_plan(42), &noise).unwrap();
        assert_eq!(a, b);
        let c = run_scan(&small_plan(43), &noise).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn scan_schedule_conserved() {
        let plan = small_plan(1);
        let records = run_scan(&plan, &NoiseModel::default()).unwrap();
        assert_eq!(records.len() as u64, plan.total_points());
        for (k, r) in records.iter().enumerate() {
            assert_eq!(r.point_index as usize, k);
            assert_abs_diff_eq!(
                r.x_um,
                plan.x_start_um + k as f64 * plan.x_step_um,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn empty_schedule_rejected() {
        let mut plan = small_plan(1);
        plan.regions.clear();
        assert!(matches!(
            run_scan(&plan, &NoiseModel::default()),
            Err(TrialsError::EmptySchedule)
        ));
    }

    #[test]
    fn csv_round_trip_is_identity() {
        let plan = small_plan(5);
        let records = run_scan(&plan, &NoiseModel::default()).unwrap();
        let text = write_csv(&records);
        let back = read_csv(&text).unwrap();
        assert_eq!(records, back);
        // And byte-identical on re-serialization.
        assert_eq!(text, write_csv(&back));
    }

    #[test]
    fn csv_rejects_empty_input() {
        assert!(matches!(read_csv(""), Err(CsvError::Empty)));
    }

    #[test]
    fn csv_rejects_bad_header() {
        assert!(matches!(
            read_csv("nope\n"),
            Err(CsvError::BadHeader { .. })
        ));
    }

    #[test]
    fn csv_reports_invariant_violation_with_line() {
        let text = format!("{CSV_HEADER}\nII,0,26.0,-22.5,,1,5,10,10,7,3\n");
        match read_csv(&text) {
            Err(CsvError::CountInvariant { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected invariant error, got {other:?}"),
        }
    }

    #[test]
    fn csv_reports_bad_count_with_line() {
        let text = format!(
            "{CSV_HEADER}\nII,0,26.0,-22.5,,1,5,10,10,2,3\nII,1,26.02,-22.5,,1,5,10,ten,2,3\n"
        );
        match read_csv(&text) {
            Err(CsvError::BadField { line, field, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(field, "singles3");
            }
            other => panic!("expected field error, got {other:?}"),
        }
    }

    #[test]
    fn bell_run_has_eight_cells() {
        let plan = default_bell_plan(LAMBDA, 1000.0, 9);
        let records = run_bell_points(&plan, &NoiseModel::default()).unwrap();
        assert_eq!(records.len(), 8);
        assert_abs_diff_eq!(records[0].pol2_deg, 22.5, epsilon = 1e-12);
        assert_abs_diff_eq!(records[1].pol2_deg, 112.5, epsilon = 1e-12);
        assert_abs_diff_eq!(records[2].pol2_deg, -22.5, epsilon = 1e-12);
        let quarter = x_for_alpha_deg(90.0, LAMBDA);
        assert_abs_diff_eq!(records[4].x_um, quarter, epsilon = 1e-12);
    }
}

//! Seeded end-to-end experiment runs.
//!
//! Randomness comes from `ChaCha8Rng::seed_from_u64(seed)` (rand_chacha 0.9).
//! A single run uses stream 0; row `k` of the results table uses stream `k`.
//! Every draw (herald decisions, false/signal choice, readout outcomes) comes
//! from that one stream in program order, so a seed fixes a run completely.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{
    fidelity_from_parities, outcome_probabilities, parity, sample_outcome, BasisPair, CountRecord, MeasBasis,
    TargetClass,
};
use crate::noise::{apply_sigma_leak, false_herald_state, ErrorModel};
use crate::protocol::{herald_from_qubits, p_psi_minus, prepare_qubit, PrepSetting};
use crate::qcore::fidelity_pure;
use crate::rates::{per_photon_detection_prob, RateBudget};
use crate::tomography::{
    concurrence, entanglement_of_formation, reconstruct_mle, MleOptions, ReconstructionResult, TomographyInput,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub basis: BasisPair,
    pub events: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub prep1: PrepSetting,
    pub prep2: PrepSetting,
    pub error_model: ErrorModel,
    pub budget: RateBudget,
    pub schedule: Vec<ScheduleEntry>,
    pub seed: u64,
    /// Skip photon-loss sampling and draw heralds from the conditional
    /// coincidence probability directly.
    pub fast_mode: bool,
    /// Cap on herald trials: every attempt in fast mode, attempts with both
    /// photons detected otherwise.
    pub max_attempts: u64,
}

pub const DEFAULT_MAX_ATTEMPTS: u64 = 10_000_000;

impl Default for ExperimentConfig {
    fn default() -> Self {
        let plus = PrepSetting::from_label("0+1").expect("known label");
        Self {
            prep1: plus,
            prep2: plus,
            error_model: ErrorModel::ideal(),
            budget: RateBudget::experiment(),
            schedule: tomography_schedule(601),
            seed: 0,
            fast_mode: true,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.prep1.validate()?;
        self.prep2.validate()?;
        self.error_model.validate()?;
        self.budget.validate()?;
        if self.schedule.is_empty() {
            return Err(Error::Config("basis schedule is empty".into()));
        }
        let mut seen = Vec::new();
        for e in &self.schedule {
            if e.events == 0 {
                return Err(Error::Config(format!("basis {} requests zero events", e.basis)));
            }
            if seen.contains(&e.basis) {
                return Err(Error::Config(format!("basis {} scheduled twice", e.basis)));
            }
            seen.push(e.basis);
        }
        if !self.fast_mode && per_photon_detection_prob(&self.budget) == 0.0 {
            return Err(Error::Config("full-loss mode needs a non-zero photon detection probability".into()));
        }
        Ok(())
    }

    pub fn total_events(&self) -> u64 {
        self.schedule.iter().map(|e| e.events).sum()
    }
}

/// Splits `total` events as evenly as possible over `bases`, earlier bases
/// taking the remainder.
pub fn even_schedule(bases: &[BasisPair], total: u64) -> Vec<ScheduleEntry> {
    let n = bases.len() as u64;
    bases
        .iter()
        .enumerate()
        .map(|(i, b)| ScheduleEntry { basis: *b, events: total / n + u64::from((i as u64) < total % n) })
        .collect()
}

/// All nine basis pairs; 601 events gives 67 x 8 + 65.
pub fn tomography_schedule(total: u64) -> Vec<ScheduleEntry> {
    let mut s = even_schedule(&BasisPair::all(), total);
    // The last basis takes the short count.
    let per = total.div_ceil(9);
    if !total.is_multiple_of(9) && per * 8 < total {
        for e in s.iter_mut() {
            e.events = per;
        }
        s[8].events = total - per * 8;
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeraldStats {
    /// All excitation attempts, including those where a photon was lost.
    pub attempts: u64,
    /// Attempts with both photons detected (equal to `attempts` in fast mode).
    pub detected_pairs: u64,
    pub heralds: u64,
    pub false_heralds: u64,
    /// Heralds per attempt, divided by the two-photon detection probability
    /// outside fast mode.
    pub p_psi_empirical: f64,
    pub p_psi_std_error: f64,
    /// Ideal `P_psi_minus` of the prepared inputs.
    pub p_psi_theory: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityEntry {
    pub target: TargetClass,
    pub label: String,
    pub value: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    /// Every scheduled basis reached its target.
    pub complete: bool,
    pub records: Vec<CountRecord>,
    pub herald_stats: HeraldStats,
    pub fidelities: Vec<FidelityEntry>,
    pub config: ExperimentConfig,
}

impl RunReport {
    pub fn fidelity(&self, target: TargetClass) -> Option<&FidelityEntry> {
        self.fidelities.iter().find(|f| f.target == target)
    }
}

/// Readout distributions conditioned on a herald, precomputed per basis.
struct HeraldModel {
    p_herald: f64,
    p_false_given_herald: f64,
    signal: BTreeMap<BasisPair, [f64; 4]>,
    false_: BTreeMap<BasisPair, [f64; 4]>,
    p_psi_theory: f64,
}

impl HeraldModel {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let q1 = prepare_qubit(&cfg.prep1);
        let q2 = prepare_qubit(&cfg.prep2);
        let em = &cfg.error_model;
        let signal_herald = herald_from_qubits(&q1, &q2, em.mode_overlap)?;
        let w_signal = signal_herald.coincidence_probability * (1.0 - em.p_false_herald);
        let w_false = em.p_false_herald;
        let p_herald = w_signal + w_false;
        let p_false_given_herald = if p_herald > 0.0 { w_false / p_herald } else { 0.0 };
        let false_state = false_herald_state(&q1, &q2)?;
        let leaked = match &signal_herald.post_state {
            Some(rho) => Some(apply_sigma_leak(rho, em.eps_sigma)?),
            None => None,
        };
        let mut signal = BTreeMap::new();
        let mut false_ = BTreeMap::new();
        for e in &cfg.schedule {
            if let Some(rho) = &leaked {
                signal.insert(e.basis, outcome_probabilities(rho, e.basis, em.eps_det)?);
            }
            false_.insert(e.basis, outcome_probabilities(&false_state, e.basis, em.eps_det)?);
        }
        Ok(Self { p_herald, p_false_given_herald, signal, false_, p_psi_theory: p_psi_minus(&q1, &q2)? })
    }
}

/// Round-robin cursor over bases that still need events.
struct Scheduler {
    targets: Vec<ScheduleEntry>,
    done: Vec<u64>,
    cursor: usize,
}

impl Scheduler {
    fn new(targets: &[ScheduleEntry]) -> Self {
        Self { targets: targets.to_vec(), done: vec![0; targets.len()], cursor: 0 }
    }

    fn finished(&self) -> bool {
        self.done.iter().zip(&self.targets).all(|(d, t)| *d >= t.events)
    }

    fn next(&mut self) -> Option<usize> {
        let n = self.targets.len();
        for k in 0..n {
            let i = (self.cursor + k) % n;
            if self.done[i] < self.targets[i].events {
                self.cursor = (i + 1) % n;
                return Some(i);
            }
        }
        None
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs `cfg` until every scheduled basis has its events or the attempt cap
/// is hit. Never fails on lack of progress; see [`run_experiment`].
pub fn simulate(cfg: &ExperimentConfig, stream: u64) -> Result<RunReport> {
    cfg.validate()?;
    let model = HeraldModel::new(cfg)?;
    let mut rng = rng_for(cfg.seed, stream);
    let mut sched = Scheduler::new(&cfg.schedule);
    let mut counts = vec![[0u64; 4]; cfg.schedule.len()];

    let eta = per_photon_detection_prob(&cfg.budget);
    let pair_detection = eta * eta;
    let loss = if cfg.fast_mode {
        None
    } else {
        Some(Geometric::new(pair_detection).map_err(|e| Error::Config(e.to_string()))?)
    };

    let mut attempts: u64 = 0;
    let mut trials: u64 = 0;
    let mut heralds: u64 = 0;
    let mut false_heralds: u64 = 0;
    let mut complete = false;

    if model.p_herald > 0.0 {
        while trials < cfg.max_attempts {
            if sched.finished() {
                complete = true;
                break;
            }
            if let Some(geo) = &loss {
                attempts = attempts.saturating_add(geo.sample(&mut rng));
            }
            attempts += 1;
            trials += 1;
            if !rng.random_bool(model.p_herald.min(1.0)) {
                continue;
            }
            heralds += 1;
            let slot = sched.next().expect("scheduler has open slots");
            let basis = cfg.schedule[slot].basis;
            let is_false = model.p_false_given_herald > 0.0 && rng.random_bool(model.p_false_given_herald);
            let probs = if is_false || !model.signal.contains_key(&basis) {
                false_heralds += 1;
                &model.false_[&basis]
            } else {
                &model.signal[&basis]
            };
            counts[slot][sample_outcome(probs, &mut rng)] += 1;
            sched.done[slot] += 1;
        }
        if sched.finished() {
            complete = true;
        }
    } else {
        // Nothing can herald; account for the attempts that would be made.
        trials = cfg.max_attempts;
        attempts = if cfg.fast_mode { trials } else { (trials as f64 / pair_detection) as u64 };
    }

    let scale = if cfg.fast_mode { 1.0 } else { pair_detection };
    let p_emp = if attempts > 0 { heralds as f64 / (attempts as f64 * scale) } else { 0.0 };
    let p_raw = if attempts > 0 { heralds as f64 / attempts as f64 } else { 0.0 };
    let p_se = if attempts > 0 { (p_raw * (1.0 - p_raw) / attempts as f64).sqrt() / scale } else { 0.0 };

    let records: Vec<CountRecord> =
        cfg.schedule.iter().zip(&counts).map(|(e, c)| CountRecord::new(e.basis, *c)).collect();
    let fidelities = derive_fidelities(&records);

    Ok(RunReport {
        seed: cfg.seed,
        complete,
        records,
        herald_stats: HeraldStats {
            attempts,
            detected_pairs: trials,
            heralds,
            false_heralds,
            p_psi_empirical: p_emp,
            p_psi_std_error: p_se,
            p_psi_theory: model.p_psi_theory,
        },
        fidelities,
        config: cfg.clone(),
    })
}

/// Fidelity estimates for every target whose bases were all measured.
pub fn derive_fidelities(records: &[CountRecord]) -> Vec<FidelityEntry> {
    let parities: BTreeMap<_, _> = records.iter().filter_map(|r| parity(r).ok().map(|p| (r.basis, p))).collect();
    TargetClass::ALL
        .iter()
        .filter_map(|t| {
            fidelity_from_parities(*t, &parities).ok().map(|(value, std_error)| FidelityEntry {
                target: *t,
                label: t.label().to_string(),
                value,
                std_error,
            })
        })
        .collect()
}

/// One complete run; fails with [`Error::NoProgress`] if the attempt cap is
/// reached first.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    let report = simulate(cfg, 0)?;
    if !report.complete {
        return Err(Error::NoProgress {
            attempts: report.herald_stats.detected_pairs,
            heralds: report.herald_stats.heralds,
        });
    }
    Ok(report)
}

/// Herald statistics over exactly `attempts` fast-mode attempts.
pub fn sample_heralds(cfg: &ExperimentConfig, attempts: u64) -> Result<HeraldStats> {
    cfg.validate()?;
    let model = HeraldModel::new(cfg)?;
    let mut rng = rng_for(cfg.seed, 0);
    let mut heralds = 0;
    let mut false_heralds = 0;
    for _ in 0..attempts {
        if model.p_herald > 0.0 && rng.random_bool(model.p_herald.min(1.0)) {
            heralds += 1;
            if model.p_false_given_herald > 0.0 && rng.random_bool(model.p_false_given_herald) {
                false_heralds += 1;
            }
        }
    }
    let p = if attempts > 0 { heralds as f64 / attempts as f64 } else { 0.0 };
    Ok(HeraldStats {
        attempts,
        detected_pairs: attempts,
        heralds,
        false_heralds,
        p_psi_empirical: p,
        p_psi_std_error: if attempts > 0 { (p * (1.0 - p) / attempts as f64).sqrt() } else { 0.0 },
        p_psi_theory: model.p_psi_theory,
    })
}

/// A row of the published results table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PublishedRow {
    pub input1: &'static str,
    pub input2: &'static str,
    pub expected: Option<TargetClass>,
    pub bases: &'static [BasisPair],
    pub events: u64,
    /// Measured fidelity and its uncertainty.
    pub fidelity: Option<(f64, f64)>,
    /// Measured `P_psi_minus` and its uncertainty.
    pub p_psi_measured: (f64, f64),
    pub p_psi_theory: f64,
}

const B_XX: BasisPair = BasisPair::new(MeasBasis::X, MeasBasis::X);
const B_XY: BasisPair = BasisPair::new(MeasBasis::X, MeasBasis::Y);
const B_YX: BasisPair = BasisPair::new(MeasBasis::Y, MeasBasis::X);
const B_YY: BasisPair = BasisPair::new(MeasBasis::Y, MeasBasis::Y);
const B_ZZ: BasisPair = BasisPair::new(MeasBasis::Z, MeasBasis::Z);

pub const PUBLISHED_TABLE: [PublishedRow; 8] = [
    PublishedRow {
        input1: "0+1",
        input2: "0+1",
        expected: Some(TargetClass::PsiMinus),
        bases: &[B_XX, B_YY, B_ZZ],
        events: 210,
        fidelity: Some((0.89, 0.02)),
        p_psi_measured: (0.26, 0.01),
        p_psi_theory: 0.25,
    },
    PublishedRow {
        input1: "0+i",
        input2: "0+1",
        expected: Some(TargetClass::PsiMinusI),
        bases: &[B_XY, B_YX, B_ZZ],
        events: 179,
        fidelity: Some((0.86, 0.02)),
        p_psi_measured: (0.26, 0.01),
        p_psi_theory: 0.25,
    },
    PublishedRow {
        input1: "0-1",
        input2: "0+1",
        expected: Some(TargetClass::PsiPlus),
        bases: &[B_XX, B_YY, B_ZZ],
        events: 178,
        fidelity: Some((0.85, 0.01)),
        p_psi_measured: (0.22, 0.02),
        p_psi_theory: 0.25,
    },
    PublishedRow {
        input1: "0-i",
        input2: "0+1",
        expected: Some(TargetClass::PsiPlusI),
        bases: &[B_XY, B_YX, B_ZZ],
        events: 188,
        fidelity: Some((0.81, 0.02)),
        p_psi_measured: (0.27, 0.02),
        p_psi_theory: 0.25,
    },
    PublishedRow {
        input1: "0+1",
        input2: "1",
        expected: Some(TargetClass::ZeroOne),
        bases: &[B_ZZ],
        events: 42,
        fidelity: Some((0.86, 0.05)),
        p_psi_measured: (0.24, 0.04),
        p_psi_theory: 0.25,
    },
    PublishedRow {
        input1: "0",
        input2: "0+1",
        expected: Some(TargetClass::ZeroOne),
        bases: &[B_ZZ],
        events: 52,
        fidelity: Some((0.90, 0.04)),
        p_psi_measured: (0.20, 0.03),
        p_psi_theory: 0.25,
    },
    PublishedRow {
        input1: "0",
        input2: "1",
        expected: Some(TargetClass::ZeroOne),
        bases: &[B_ZZ],
        events: 48,
        fidelity: Some((0.98, 0.02)),
        p_psi_measured: (0.39, 0.06),
        p_psi_theory: 0.5,
    },
    PublishedRow {
        input1: "0",
        input2: "0",
        expected: None,
        bases: &[B_ZZ],
        events: 65,
        fidelity: None,
        p_psi_measured: (0.04, 0.01),
        p_psi_theory: 0.0,
    },
];

/// Average published fidelity over the seven rows with a target state.
pub const PUBLISHED_MEAN_FIDELITY: (f64, f64) = (0.90, 0.02);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Row {
    pub row: usize,
    pub published: PublishedRow,
    pub fidelity: Option<(f64, f64)>,
    pub report: RunReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1 {
    pub rows: Vec<Table1Row>,
}

impl Table1 {
    /// Mean simulated fidelity over rows that have a target.
    pub fn mean_fidelity(&self) -> f64 {
        let f: Vec<f64> = self.rows.iter().filter_map(|r| r.fidelity.map(|f| f.0)).collect();
        f.iter().sum::<f64>() / f.len() as f64
    }
}

/// Configuration for published row `row` (1-based), taking error model,
/// budget, seed, mode and cap from `base`.
pub fn table1_row_config(base: &ExperimentConfig, row: usize) -> ExperimentConfig {
    let published = &PUBLISHED_TABLE[row - 1];
    ExperimentConfig {
        prep1: PrepSetting::from_label(published.input1).expect("known label"),
        prep2: PrepSetting::from_label(published.input2).expect("known label"),
        schedule: even_schedule(published.bases, published.events),
        ..base.clone()
    }
}

/// Runs all eight published rows. Row `k` uses RNG stream `k`.
pub fn reproduce_table1(base: &ExperimentConfig) -> Result<Table1> {
    let rows = (1..=PUBLISHED_TABLE.len())
        .map(|row| {
            let cfg = table1_row_config(base, row);
            let report = simulate(&cfg, row as u64)?;
            let published = PUBLISHED_TABLE[row - 1];
            let fidelity = published.expected.and_then(|t| report.fidelity(t)).map(|f| (f.value, f.std_error));
            Ok(Table1Row { row, published, fidelity, report })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table1 { rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomographyReport {
    pub run: RunReport,
    pub input: TomographyInput,
    pub reconstruction: ReconstructionResult,
    pub fidelity: f64,
    pub concurrence: f64,
    pub entanglement_of_formation: f64,
}

/// Tomography configuration: `|0+1> (x) |0+1>` over all nine bases.
pub fn tomography_config(base: &ExperimentConfig, events: u64) -> ExperimentConfig {
    let plus = PrepSetting::from_label("0+1").expect("known label");
    ExperimentConfig { prep1: plus, prep2: plus, schedule: tomography_schedule(events), ..base.clone() }
}

/// Simulates the nine-basis dataset described by `cfg` and reconstructs it.
/// `likelihood_eps_det` folds a readout-flip model into the likelihood
/// (0 for raw tomography).
pub fn reproduce_tomography_dataset(cfg: &ExperimentConfig, likelihood_eps_det: f64) -> Result<TomographyReport> {
    if cfg.total_events() == 0 {
        return Err(Error::Config("zero tomography events requested".into()));
    }
    let run = run_experiment(cfg)?;
    let input = TomographyInput::new(run.records.clone())?;
    let reconstruction = reconstruct_mle(&input, likelihood_eps_det, &MleOptions::default())?;
    let rho = &reconstruction.rho_hat;
    Ok(TomographyReport {
        fidelity: fidelity_pure(rho, &TargetClass::PsiMinus.state())?,
        concurrence: concurrence(rho)?,
        entanglement_of_formation: entanglement_of_formation(rho)?,
        run,
        input,
        reconstruction,
    })
}

//! Fluorescence readout in rotated bases, parity estimators and the
//! per-target fidelity formulas.
//!
//! Outcome `+` is "bright", which after the analysis rotation means the ion
//! was found in the basis state listed by [`MeasBasis::bright_state`]:
//! `|1>` for Z, `(|0> + |1>)/sqrt 2` for X and `(|0> - i|1>)/sqrt 2` for Y.
//! The measured single-ion observable is therefore `+X`, `-Y` and `-Z`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::qcore::{bell, c, pauli, DensityMatrix, Operator, Pauli, PureState, Tensor, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MeasBasis {
    X,
    Y,
    Z,
}

impl MeasBasis {
    pub const ALL: [MeasBasis; 3] = [MeasBasis::X, MeasBasis::Y, MeasBasis::Z];

    pub fn bright_state(self) -> PureState {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = match self {
            MeasBasis::X => vec![c(h, 0.0), c(h, 0.0)],
            MeasBasis::Y => vec![c(h, 0.0), c(0.0, -h)],
            MeasBasis::Z => vec![c(0.0, 0.0), c(1.0, 0.0)],
        };
        PureState::new(v).expect("unit norm")
    }

    pub fn dark_state(self) -> PureState {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = match self {
            MeasBasis::X => vec![c(h, 0.0), c(-h, 0.0)],
            MeasBasis::Y => vec![c(h, 0.0), c(0.0, h)],
            MeasBasis::Z => vec![c(1.0, 0.0), c(0.0, 0.0)],
        };
        PureState::new(v).expect("unit norm")
    }

    /// Bright projector minus dark projector.
    pub fn observable(self) -> Operator {
        match self {
            MeasBasis::X => pauli(Pauli::X),
            MeasBasis::Y => pauli(Pauli::Y).scale(-1.0),
            MeasBasis::Z => pauli(Pauli::Z).scale(-1.0),
        }
    }

    fn letter(self) -> char {
        match self {
            MeasBasis::X => 'X',
            MeasBasis::Y => 'Y',
            MeasBasis::Z => 'Z',
        }
    }

    fn from_letter(ch: char) -> Option<Self> {
        match ch.to_ascii_uppercase() {
            'X' => Some(MeasBasis::X),
            'Y' => Some(MeasBasis::Y),
            'Z' => Some(MeasBasis::Z),
            _ => None,
        }
    }
}

impl fmt::Display for MeasBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for MeasBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.trim().chars();
        match (chars.next().and_then(MeasBasis::from_letter), chars.next()) {
            (Some(b), None) => Ok(b),
            _ => Err(Error::Config(format!("unknown basis `{s}` (expected X, Y or Z)"))),
        }
    }
}

/// Analysis bases of ion 1 and ion 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisPair {
    pub b1: MeasBasis,
    pub b2: MeasBasis,
}

impl BasisPair {
    pub const fn new(b1: MeasBasis, b2: MeasBasis) -> Self {
        Self { b1, b2 }
    }

    /// All nine pairs, ion 1 slow: XX, XY, XZ, YX, ..., ZZ.
    pub fn all() -> [BasisPair; 9] {
        let mut out = [BasisPair::new(MeasBasis::X, MeasBasis::X); 9];
        for (i, b1) in MeasBasis::ALL.iter().enumerate() {
            for (j, b2) in MeasBasis::ALL.iter().enumerate() {
                out[3 * i + j] = BasisPair::new(*b1, *b2);
            }
        }
        out
    }

    pub fn swapped(self) -> Self {
        Self { b1: self.b2, b2: self.b1 }
    }

    pub fn observable(self) -> Operator {
        self.b1.observable().tensor(&self.b2.observable())
    }
}

impl fmt::Display for BasisPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.b1, self.b2)
    }
}

impl FromStr for BasisPair {
    type Err = Error;

    /// Accepts `XY` or `X Y`.
    fn from_str(s: &str) -> Result<Self> {
        let letters: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        match letters.as_slice() {
            [a, b] => match (MeasBasis::from_letter(*a), MeasBasis::from_letter(*b)) {
                (Some(b1), Some(b2)) => Ok(BasisPair::new(b1, b2)),
                _ => Err(Error::Config(format!("unknown basis pair `{s}`"))),
            },
            _ => Err(Error::Config(format!("basis pair `{s}` must name two bases"))),
        }
    }
}

/// Index of outcome `(o1, o2)` where `true` is bright: `++, +-, -+, --`.
pub fn outcome_index(bright1: bool, bright2: bool) -> usize {
    (!bright1 as usize) * 2 + (!bright2 as usize)
}

/// Outcome counts for one basis pair, ordered `n(+,+), n(+,-), n(-,+), n(-,-)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRecord {
    pub basis: BasisPair,
    pub counts: [u64; 4],
}

impl CountRecord {
    pub fn new(basis: BasisPair, counts: [u64; 4]) -> Self {
        Self { basis, counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Record with ion roles exchanged: swapped bases, `+-` and `-+` exchanged.
    pub fn swapped(&self) -> Self {
        let [pp, pm, mp, mm] = self.counts;
        Self { basis: self.basis.swapped(), counts: [pp, mp, pm, mm] }
    }

    pub fn to_line(&self) -> String {
        let [pp, pm, mp, mm] = self.counts;
        format!("{} {} {pp} {pm} {mp} {mm}", self.basis.b1, self.basis.b2)
    }
}

/// Parses the text count format: one `<b1> <b2> <n_pp> <n_pm> <n_mp> <n_mm>`
/// record per line, `#` starts a comment.
pub fn parse_count_records(text: &str) -> Result<Vec<CountRecord>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line: lineno + 1, msg };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(err(format!("expected 6 fields, found {}", fields.len())));
        }
        let b1: MeasBasis = fields[0].parse().map_err(|e: Error| err(e.to_string()))?;
        let b2: MeasBasis = fields[1].parse().map_err(|e: Error| err(e.to_string()))?;
        let mut counts = [0u64; 4];
        for (slot, f) in counts.iter_mut().zip(&fields[2..]) {
            *slot = f.parse().map_err(|_| err(format!("count `{f}` is not a non-negative integer")))?;
        }
        out.push(CountRecord::new(BasisPair::new(b1, b2), counts));
    }
    Ok(out)
}

pub fn write_count_records(records: &[CountRecord]) -> String {
    let mut s = String::from("# b1 b2 n_pp n_pm n_mp n_mm  (+ = bright = |1> after rotation)\n");
    for r in records {
        s.push_str(&r.to_line());
        s.push('\n');
    }
    s
}

/// Probability of each outcome (`++, +-, -+, --`) including independent
/// readout flips with probability `eps_det` on each ion.
pub fn outcome_probabilities(rho: &DensityMatrix, basis: BasisPair, eps_det: f64) -> Result<[f64; 4]> {
    check_range("eps_det", eps_det, 0.0, 0.5, "[0, 0.5]")?;
    if rho.dim() != 4 {
        return Err(Error::Dimension(format!("two-qubit state required, got dim {}", rho.dim())));
    }
    let ideal = ideal_probabilities(rho, basis);
    Ok(apply_flips(&ideal, eps_det))
}

fn ideal_probabilities(rho: &DensityMatrix, basis: BasisPair) -> [f64; 4] {
    let side = |b: MeasBasis| [b.bright_state(), b.dark_state()];
    let s1 = side(basis.b1);
    let s2 = side(basis.b2);
    let mut p = [0.0; 4];
    for (i, v1) in s1.iter().enumerate() {
        for (j, v2) in s2.iter().enumerate() {
            let v = v1.tensor(v2);
            let amp: C64 = v.amplitudes().dotc(&(rho.matrix() * v.amplitudes()));
            p[2 * i + j] = amp.re.max(0.0);
        }
    }
    p
}

fn apply_flips(p: &[f64; 4], eps: f64) -> [f64; 4] {
    let keep = 1.0 - eps;
    let w = |same1: bool, same2: bool| (if same1 { keep } else { eps }) * (if same2 { keep } else { eps });
    let mut out = [0.0; 4];
    for (read, slot) in out.iter_mut().enumerate() {
        for (truth, pt) in p.iter().enumerate() {
            *slot += pt * w(read / 2 == truth / 2, read % 2 == truth % 2);
        }
    }
    out
}

/// Draws `n` outcome labels from `probs` and tallies them.
pub fn sample_counts<R: Rng + ?Sized>(probs: &[f64; 4], n: u64, rng: &mut R) -> [u64; 4] {
    let mut counts = [0u64; 4];
    for _ in 0..n {
        counts[sample_outcome(probs, rng)] += 1;
    }
    counts
}

pub fn sample_outcome<R: Rng + ?Sized>(probs: &[f64; 4], rng: &mut R) -> usize {
    let u: f64 = rng.random::<f64>() * probs.iter().sum::<f64>();
    let mut acc = 0.0;
    for (k, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    // u landed on the rounding tail; return the last outcome with weight.
    probs.iter().rposition(|p| *p > 0.0).unwrap_or(3)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParityEstimate {
    /// `P(same) - P(opposite)`.
    pub value: f64,
    pub std_error: f64,
    pub n: u64,
    /// Outcome frequencies `++, +-, -+, --` behind the estimate.
    pub probs: [f64; 4],
}

impl ParityEstimate {
    /// Estimate from outcome frequencies observed over `n` events; `n = 0`
    /// marks exact probabilities with zero error.
    pub fn from_probabilities(probs: [f64; 4], n: u64) -> Self {
        let value = (probs[0] + probs[3] - probs[1] - probs[2]).clamp(-1.0, 1.0);
        let std_error = if n == 0 { 0.0 } else { ((1.0 - value * value).max(0.0) / n as f64).sqrt() };
        Self { value, std_error, n, probs }
    }
}

pub fn parity(record: &CountRecord) -> Result<ParityEstimate> {
    let n = record.total();
    if n == 0 {
        return Err(Error::EmptyCounts(format!("record for basis {}", record.basis)));
    }
    let probs = record.counts.map(|k| k as f64 / n as f64);
    Ok(ParityEstimate::from_probabilities(probs, n))
}

/// Expected output states of the gate for the input rows of the results table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TargetClass {
    /// `|01> - |10>`
    PsiMinus,
    /// `|01> - i|10>`
    PsiMinusI,
    /// `|01> + |10>`
    PsiPlus,
    /// `|01> + i|10>`
    PsiPlusI,
    /// `|0> (x) |1>`
    ZeroOne,
}

const XX: BasisPair = BasisPair::new(MeasBasis::X, MeasBasis::X);
const XY: BasisPair = BasisPair::new(MeasBasis::X, MeasBasis::Y);
const YX: BasisPair = BasisPair::new(MeasBasis::Y, MeasBasis::X);
const YY: BasisPair = BasisPair::new(MeasBasis::Y, MeasBasis::Y);
const ZZ: BasisPair = BasisPair::new(MeasBasis::Z, MeasBasis::Z);

impl TargetClass {
    pub const ALL: [TargetClass; 5] = [
        TargetClass::PsiMinus,
        TargetClass::PsiMinusI,
        TargetClass::PsiPlus,
        TargetClass::PsiPlusI,
        TargetClass::ZeroOne,
    ];

    pub fn state(self) -> PureState {
        let z = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        let second = match self {
            TargetClass::PsiMinus => c(-1.0, 0.0),
            TargetClass::PsiMinusI => c(0.0, -1.0),
            TargetClass::PsiPlus => one,
            TargetClass::PsiPlusI => c(0.0, 1.0),
            TargetClass::ZeroOne => return PureState::basis(4, 1),
        };
        if self == TargetClass::PsiMinus {
            return bell::psi_minus();
        }
        PureState::new(vec![z, one, second, z]).expect("unit norm")
    }

    /// `(basis, coefficient)` terms of `F = (1 + sum c_k P_k) / 4`. Empty for
    /// [`TargetClass::ZeroOne`], which reads a single ZZ outcome frequency.
    fn parity_terms(self) -> &'static [(BasisPair, f64)] {
        match self {
            TargetClass::PsiMinus => &[(XX, -1.0), (YY, -1.0), (ZZ, -1.0)],
            TargetClass::PsiMinusI => &[(XY, -1.0), (YX, 1.0), (ZZ, -1.0)],
            TargetClass::PsiPlus => &[(XX, 1.0), (YY, 1.0), (ZZ, -1.0)],
            TargetClass::PsiPlusI => &[(XY, 1.0), (YX, -1.0), (ZZ, -1.0)],
            TargetClass::ZeroOne => &[],
        }
    }

    pub fn required_bases(self) -> Vec<BasisPair> {
        match self {
            TargetClass::ZeroOne => vec![ZZ],
            t => t.parity_terms().iter().map(|(b, _)| *b).collect(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            TargetClass::PsiMinus => "|01>-|10>",
            TargetClass::PsiMinusI => "|01>-i|10>",
            TargetClass::PsiPlus => "|01>+|10>",
            TargetClass::PsiPlusI => "|01>+i|10>",
            TargetClass::ZeroOne => "|0>|1>",
        }
    }

    pub fn formula(self) -> &'static str {
        match self {
            TargetClass::PsiMinus => "(1-Pxx-Pyy-Pzz)/4",
            TargetClass::PsiMinusI => "(1-Pxy+Pyx-Pzz)/4",
            TargetClass::PsiPlus => "(1+Pxx+Pyy-Pzz)/4",
            TargetClass::PsiPlusI => "(1+Pxy-Pyx-Pzz)/4",
            TargetClass::ZeroOne => "p_zz(-,+)",
        }
    }
}

/// Fidelity with `target` and its first-order standard error.
pub fn fidelity_from_parities(
    target: TargetClass,
    parities: &BTreeMap<BasisPair, ParityEstimate>,
) -> Result<(f64, f64)> {
    let get = |b: &BasisPair| parities.get(b).ok_or_else(|| Error::MissingBasis(b.to_string()));
    if target == TargetClass::ZeroOne {
        let zz = get(&ZZ)?;
        let f = zz.probs[outcome_index(false, true)];
        let se = if zz.n == 0 { 0.0 } else { (f * (1.0 - f) / zz.n as f64).sqrt() };
        return Ok((f, se));
    }
    let mut sum = 1.0;
    let mut var = 0.0;
    for (b, coef) in target.parity_terms() {
        let p = get(b)?;
        sum += coef * p.value;
        var += (coef * p.std_error).powi(2);
    }
    Ok((sum / 4.0, var.sqrt() / 4.0))
}

/// Parities computed directly from `rho` with no sampling noise.
pub fn exact_parities(rho: &DensityMatrix, eps_det: f64) -> Result<BTreeMap<BasisPair, ParityEstimate>> {
    BasisPair::all()
        .iter()
        .map(|b| Ok((*b, ParityEstimate::from_probabilities(outcome_probabilities(rho, *b, eps_det)?, 0))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::expectation;
    use approx::assert_abs_diff_eq;

    fn singlet() -> DensityMatrix {
        bell::psi_minus().to_density()
    }

    fn assert_probs(got: [f64; 4], want: [f64; 4]) {
        for (g, w) in got.iter().zip(want) {
            assert_abs_diff_eq!(*g, w, epsilon = 1e-12);
        }
    }

    #[test]
    fn singlet_outcomes() {
        assert_probs(outcome_probabilities(&singlet(), ZZ, 0.0).unwrap(), [0.0, 0.5, 0.5, 0.0]);
        assert_probs(outcome_probabilities(&singlet(), XX, 0.0).unwrap(), [0.0, 0.5, 0.5, 0.0]);
        assert_probs(outcome_probabilities(&singlet(), ZZ, 0.03).unwrap(), [0.0291, 0.4709, 0.4709, 0.0291]);
    }

    #[test]
    fn invalid_eps_det() {
        assert!(outcome_probabilities(&singlet(), ZZ, 0.6).is_err());
        assert!(outcome_probabilities(&singlet(), ZZ, -0.1).is_err());
    }

    #[test]
    fn x_convention_plus_state_is_bright() {
        let plus = PureState::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let rho = plus.tensor(&PureState::basis(2, 1)).to_density();
        let p = outcome_probabilities(&rho, BasisPair::new(MeasBasis::X, MeasBasis::Z), 0.0).unwrap();
        assert_abs_diff_eq!(p[outcome_index(true, true)], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn parity_examples() {
        let p = parity(&CountRecord::new(ZZ, [0, 35, 35, 0])).unwrap();
        assert_eq!(p.value, -1.0);
        assert_eq!(p.std_error, 0.0);
        let p = parity(&CountRecord::new(ZZ, [25, 25, 25, 25])).unwrap();
        assert_abs_diff_eq!(p.value, 0.0);
        assert_abs_diff_eq!(p.std_error, 0.1, epsilon = 1e-15);
        let p = parity(&CountRecord::new(ZZ, [10, 30, 30, 0])).unwrap();
        assert_abs_diff_eq!(p.value, -50.0 / 70.0, epsilon = 1e-15);
        assert!(matches!(parity(&CountRecord::new(ZZ, [0; 4])), Err(Error::EmptyCounts(_))));
    }

    fn uniform_parities(value: f64) -> BTreeMap<BasisPair, ParityEstimate> {
        let same = (1.0 + value) / 4.0;
        let opp = (1.0 - value) / 4.0;
        BasisPair::all().iter().map(|b| (*b, ParityEstimate::from_probabilities([same, opp, opp, same], 0))).collect()
    }

    #[test]
    fn fidelity_formula_examples() {
        let (f, _) = fidelity_from_parities(TargetClass::PsiMinus, &uniform_parities(-1.0)).unwrap();
        assert_abs_diff_eq!(f, 1.0);
        let (f, _) = fidelity_from_parities(TargetClass::PsiMinus, &uniform_parities(0.0)).unwrap();
        assert_abs_diff_eq!(f, 0.25);
    }

    #[test]
    fn psi_plus_i_parity_signs() {
        let rho = TargetClass::PsiPlusI.state().to_density();
        let pxy = expectation(&rho, &XY.observable()).unwrap();
        let pyx = expectation(&rho, &YX.observable()).unwrap();
        let pzz = expectation(&rho, &ZZ.observable()).unwrap();
        assert_abs_diff_eq!(pxy, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pyx, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pzz, -1.0, epsilon = 1e-12);
        let (f, _) = fidelity_from_parities(TargetClass::PsiPlusI, &exact_parities(&rho, 0.0).unwrap()).unwrap();
        assert_abs_diff_eq!(f, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn missing_basis_is_reported() {
        let mut m = uniform_parities(-1.0);
        m.remove(&YY);
        assert!(matches!(
            fidelity_from_parities(TargetClass::PsiMinus, &m),
            Err(Error::MissingBasis(b)) if b == "YY"
        ));
        assert!(fidelity_from_parities(TargetClass::PsiMinusI, &m).is_ok());
    }

    #[test]
    fn error_propagates_in_quadrature() {
        let mut m = BTreeMap::new();
        for b in [XX, YY, ZZ] {
            m.insert(b, ParityEstimate { value: -0.8, std_error: 0.04, n: 100, probs: [0.05, 0.45, 0.45, 0.05] });
        }
        let (f, se) = fidelity_from_parities(TargetClass::PsiMinus, &m).unwrap();
        assert_abs_diff_eq!(f, 0.85, epsilon = 1e-12);
        assert_abs_diff_eq!(se, (3.0f64).sqrt() * 0.04 / 4.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_one_reads_dark_bright() {
        let rec = CountRecord::new(ZZ, [1, 2, 45, 2]);
        let mut m = BTreeMap::new();
        m.insert(ZZ, parity(&rec).unwrap());
        let (f, se) = fidelity_from_parities(TargetClass::ZeroOne, &m).unwrap();
        assert_abs_diff_eq!(f, 0.9);
        assert_abs_diff_eq!(se, (0.9f64 * 0.1 / 50.0).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn half_flip_is_uniform() {
        let p = outcome_probabilities(&singlet(), XY, 0.5).unwrap();
        assert_probs(p, [0.25; 4]);
    }

    #[test]
    fn count_format_roundtrip_and_errors() {
        let text = "# header\nX Y 1 2 3 4\n  z z 0 0 0 7  # trailing\n\n";
        let recs = parse_count_records(text).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0], CountRecord::new(XY, [1, 2, 3, 4]));
        assert_eq!(recs[1].basis, ZZ);
        assert_eq!(parse_count_records(&write_count_records(&recs)).unwrap(), recs);

        assert!(matches!(parse_count_records("X Y 1 2 3"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_count_records("\nQ Y 1 2 3 4"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_count_records("X Y 1 2 -3 4"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn basis_pair_parse() {
        assert_eq!("xy".parse::<BasisPair>().unwrap(), XY);
        assert_eq!("Z Z".parse::<BasisPair>().unwrap(), ZZ);
        assert!("XYZ".parse::<BasisPair>().is_err());
        assert_eq!(BasisPair::all()[1], XY);
        assert_eq!(BasisPair::all()[3], YX);
    }

    #[test]
    fn swapped_record() {
        let r = CountRecord::new(XY, [1, 2, 3, 4]).swapped();
        assert_eq!(r, CountRecord::new(YX, [1, 3, 2, 4]));
    }
}

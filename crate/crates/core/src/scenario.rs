//! N-party Bell scenarios and behaviors (conditional probability tables).
//!
//! A scenario fixes the number of parties; every party has two measurement
//! settings (bits 0/1) and two outcomes, encoded as signs with "+" ↔ +1 and
//! "−" ↔ −1. A [`Behavior`] is the full table P(outcomes | settings), stored
//! densely: settings vectors and outcome vectors are packed into integers
//! with bit i belonging to party i (party 1 = bit 0), and outcome bit 0
//! meaning +1.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Default tolerance for tables built from exact combinatorial sources.
pub const EXACT_TOL: f64 = 1e-12;
/// Default tolerance for tables built from floating-point (quantum) sources.
pub const NUMERIC_TOL: f64 = 1e-9;
/// Normalization tolerance enforced on construction.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// An N-party, 2-setting, 2-outcome Bell scenario.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Scenario {
    n: usize,
}

impl Scenario {
    // Bell scenarios proper have at least two parties; single-party
    // scenarios exist only as the result of marginalization.
    pub const MIN_PARTIES: usize = 1;
    pub const MAX_PARTIES: usize = 8;

    pub fn new(n: usize) -> Result<Self> {
        if !(Self::MIN_PARTIES..=Self::MAX_PARTIES).contains(&n) {
            return Err(Error::Scenario(format!(
                "number of parties must be in {}..={}, got {n}",
                Self::MIN_PARTIES,
                Self::MAX_PARTIES
            )));
        }
        Ok(Scenario { n })
    }

    pub fn num_parties(&self) -> usize {
        self.n
    }

    /// Number of joint settings vectors (2^N).
    pub fn num_settings(&self) -> usize {
        1 << self.n
    }

    /// Number of joint outcome vectors (2^N).
    pub fn num_outcomes(&self) -> usize {
        1 << self.n
    }

    /// Dense table length (4^N).
    pub fn table_len(&self) -> usize {
        1 << (2 * self.n)
    }

    /// Flat index of a (settings, outcomes) pair.
    pub fn index(&self, settings: usize, outcomes: usize) -> usize {
        debug_assert!(settings < self.num_settings() && outcomes < self.num_outcomes());
        (settings << self.n) | outcomes
    }
}

/// Sign (+1/−1) of party `party` in a packed outcome vector.
pub fn outcome_sign(outcomes: usize, party: usize) -> f64 {
    if (outcomes >> party) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Packed-outcome bit for a sign: +1 ↔ 0, −1 ↔ 1.
pub fn sign_bit(sign: i8) -> usize {
    if sign > 0 {
        0
    } else {
        1
    }
}

/// Result of re-validating a behavior table against the construction
/// invariants at a caller-chosen tolerance.
#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    /// Largest excursion of any entry outside [0, 1].
    pub max_range_violation: f64,
    /// Largest deviation of a per-settings outcome sum from 1.
    pub max_normalization_deviation: f64,
    pub passes: bool,
}

/// Where the worst no-signaling violation was observed.
#[derive(Clone, Debug, Serialize)]
pub struct SignalingWitness {
    /// A party outside the marginal whose setting change moved the marginal.
    pub party: usize,
    /// Human-readable description of the marginal context.
    pub context: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct NoSignalingReport {
    pub is_no_signaling: bool,
    /// Largest difference between marginals that should coincide.
    pub max_deviation: f64,
    pub worst_case: Option<SignalingWitness>,
}

/// A full conditional probability table P(outcomes | settings).
#[derive(Clone, Debug, PartialEq)]
pub struct Behavior {
    scenario: Scenario,
    table: Vec<f64>,
}

impl Behavior {
    /// Builds a behavior from a dense table, indexed per [`Scenario::index`].
    ///
    /// `range_tol` bounds how far entries may lie outside [0, 1]: use
    /// [`EXACT_TOL`] for exact sources and [`NUMERIC_TOL`] for quantum ones.
    /// Per-settings normalization is always enforced at [`NORMALIZATION_TOL`].
    pub fn from_table(scenario: Scenario, table: Vec<f64>, range_tol: f64) -> Result<Self> {
        if table.len() != scenario.table_len() {
            return Err(Error::InvalidBehavior(format!(
                "table has {} entries, scenario needs {}",
                table.len(),
                scenario.table_len()
            )));
        }
        let b = Behavior { scenario, table };
        let report = b.validate(range_tol.max(NORMALIZATION_TOL));
        if report.max_range_violation > range_tol {
            return Err(Error::InvalidBehavior(format!(
                "entry out of [0,1] by {:e} (allowed {:e})",
                report.max_range_violation, range_tol
            )));
        }
        if report.max_normalization_deviation > NORMALIZATION_TOL {
            return Err(Error::InvalidBehavior(format!(
                "outcome distribution off normalization by {:e}",
                report.max_normalization_deviation
            )));
        }
        Ok(b)
    }

    /// The maximally mixed behavior: every entry 1/2^N.
    pub fn uniform(scenario: Scenario) -> Self {
        let p = 1.0 / scenario.num_outcomes() as f64;
        Behavior {
            scenario,
            table: vec![p; scenario.table_len()],
        }
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn prob(&self, settings: usize, outcomes: usize) -> f64 {
        self.table[self.scenario.index(settings, outcomes)]
    }

    /// Re-checks range and normalization at tolerance `tol`.
    pub fn validate(&self, tol: f64) -> ValidationReport {
        let n_out = self.scenario.num_outcomes();
        let mut range = 0.0f64;
        let mut norm = 0.0f64;
        for s in 0..self.scenario.num_settings() {
            let mut sum = 0.0;
            for o in 0..n_out {
                let p = self.prob(s, o);
                sum += p;
                let excess = if p < 0.0 {
                    -p
                } else if p > 1.0 {
                    p - 1.0
                } else {
                    0.0
                };
                range = range.max(excess);
            }
            norm = norm.max((sum - 1.0).abs());
        }
        ValidationReport {
            max_range_violation: range,
            max_normalization_deviation: norm,
            passes: range <= tol && norm <= tol,
        }
    }

    /// Marginal probability of outcomes `o_sub` on the parties in `mask`,
    /// with all parties outside the marginal measuring `s_comp` and the
    /// marginal parties measuring `s_sub` (all packed on the full-party bit
    /// layout).
    fn masked_marginal(&self, mask: usize, s_sub: usize, o_sub: usize, s_comp: usize) -> f64 {
        let full = self.scenario.num_outcomes() - 1;
        let comp = full & !mask;
        let settings = s_sub | s_comp;
        let mut sum = 0.0;
        let mut oc = comp;
        loop {
            sum += self.prob(settings, o_sub | oc);
            if oc == 0 {
                break;
            }
            oc = (oc - 1) & comp;
        }
        sum
    }

    /// Deviation of the `mask`-marginal across settings of the complement:
    /// the largest max−min spread over complement settings, together with a
    /// witness for the worst case.
    fn subset_signaling_deviation(&self, mask: usize) -> (f64, Option<SignalingWitness>) {
        let n = self.scenario.num_parties();
        let full = (1usize << n) - 1;
        let comp = full & !mask;
        if comp == 0 {
            return (0.0, None);
        }
        let mut worst = 0.0f64;
        let mut witness = None;
        // Enumerate submasks of `mask` (settings and outcomes of the marginal
        // parties) and of `comp` (settings of the rest).
        let mut s_sub = mask;
        loop {
            let mut o_sub = mask;
            loop {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                let (mut arg_lo, mut arg_hi) = (0usize, 0usize);
                let mut s_comp = comp;
                loop {
                    let v = self.masked_marginal(mask, s_sub, o_sub, s_comp);
                    if v < lo {
                        lo = v;
                        arg_lo = s_comp;
                    }
                    if v > hi {
                        hi = v;
                        arg_hi = s_comp;
                    }
                    if s_comp == 0 {
                        break;
                    }
                    s_comp = (s_comp - 1) & comp;
                }
                if hi - lo > worst {
                    worst = hi - lo;
                    let diff = arg_lo ^ arg_hi;
                    let party = diff.trailing_zeros() as usize;
                    witness = Some(SignalingWitness {
                        party,
                        context: format!(
                            "marginal on parties {:?} at settings {:#b}, outcomes {:#b}",
                            mask_to_parties(mask),
                            s_sub,
                            o_sub
                        ),
                    });
                }
                if o_sub == 0 {
                    break;
                }
                o_sub = (o_sub - 1) & mask;
            }
            if s_sub == 0 {
                break;
            }
            s_sub = (s_sub - 1) & mask;
        }
        (worst, witness)
    }

    /// Checks that every proper-subset marginal is independent of the
    /// complementary parties' settings, within `tol`.
    pub fn no_signaling_report(&self, tol: f64) -> NoSignalingReport {
        let n = self.scenario.num_parties();
        let full = (1usize << n) - 1;
        let mut max_dev = 0.0f64;
        let mut worst = None;
        for mask in 1..full {
            let (dev, wit) = self.subset_signaling_deviation(mask);
            if dev > max_dev {
                max_dev = dev;
                worst = wit;
            }
        }
        NoSignalingReport {
            is_no_signaling: max_dev <= tol,
            max_deviation: max_dev,
            worst_case: worst,
        }
    }

    /// Restriction of the behavior to `parties`.
    ///
    /// Requires the marginal to be independent of the dropped parties'
    /// settings within [`NUMERIC_TOL`]; the entries are then computed with
    /// the dropped parties measuring setting 0.
    pub fn marginal(&self, parties: &[usize]) -> Result<Behavior> {
        let n = self.scenario.num_parties();
        let mut mask = 0usize;
        for &p in parties {
            if p >= n {
                return Err(Error::InvalidArgument(format!(
                    "party {p} out of range for {n}-party scenario"
                )));
            }
            if mask & (1 << p) != 0 {
                return Err(Error::InvalidArgument(format!("duplicate party {p}")));
            }
            mask |= 1 << p;
        }
        if mask == (1 << n) - 1 {
            return Ok(self.clone());
        }
        let (dev, witness) = self.subset_signaling_deviation(mask);
        if dev > NUMERIC_TOL {
            return Err(Error::Signaling {
                report: NoSignalingReport {
                    is_no_signaling: false,
                    max_deviation: dev,
                    worst_case: witness,
                },
            });
        }
        let kept = mask_to_parties(mask);
        let sub = Scenario::new(kept.len())?;
        let mut table = vec![0.0; sub.table_len()];
        for s in 0..sub.num_settings() {
            for o in 0..sub.num_outcomes() {
                let mut s_full = 0usize;
                let mut o_full = 0usize;
                for (i, &p) in kept.iter().enumerate() {
                    s_full |= ((s >> i) & 1) << p;
                    o_full |= ((o >> i) & 1) << p;
                }
                table[sub.index(s, o)] = self.masked_marginal(mask, s_full, o_full, 0);
            }
        }
        Behavior::from_table(sub, table, NUMERIC_TOL)
    }

    /// Expectation of the product of all parties' outcome signs at the given
    /// settings vector.
    pub fn correlator(&self, settings: &[u8]) -> Result<f64> {
        let n = self.scenario.num_parties();
        if settings.len() != n {
            return Err(Error::InvalidArgument(format!(
                "expected {n} settings, got {}",
                settings.len()
            )));
        }
        let mut s = 0usize;
        for (i, &x) in settings.iter().enumerate() {
            if x > 1 {
                return Err(Error::InvalidArgument(format!("setting {x} is not a bit")));
            }
            s |= (x as usize) << i;
        }
        let mut acc = 0.0;
        for o in 0..self.scenario.num_outcomes() {
            let sign = if (o.count_ones() & 1) == 0 { 1.0 } else { -1.0 };
            acc += sign * self.prob(s, o);
        }
        Ok(acc)
    }

    /// Convex mixture q·self + (1−q)·other.
    pub fn mix(&self, other: &Behavior, q: f64) -> Result<Behavior> {
        if self.scenario != other.scenario {
            return Err(Error::ScenarioMismatch {
                expected: self.scenario.num_parties(),
                found: other.scenario.num_parties(),
            });
        }
        let table = self
            .table
            .iter()
            .zip(&other.table)
            .map(|(a, b)| q * a + (1.0 - q) * b)
            .collect();
        Behavior::from_table(self.scenario, table, NUMERIC_TOL)
    }
}

fn mask_to_parties(mask: usize) -> Vec<usize> {
    (0..usize::BITS as usize)
        .filter(|i| (mask >> i) & 1 == 1)
        .collect()
}

// ---------------------------------------------------------------------------
// JSON interchange format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct BehaviorJson {
    n: usize,
    table: Vec<BehaviorEntryJson>,
}

#[derive(Serialize, Deserialize)]
struct BehaviorEntryJson {
    settings: Vec<u8>,
    outcomes: Vec<String>,
    p: f64,
}

fn entry_key(settings: usize, outcomes: usize, n: usize) -> String {
    let s: Vec<String> = (0..n).map(|i| ((settings >> i) & 1).to_string()).collect();
    let o: Vec<&str> = (0..n)
        .map(|i| if (outcomes >> i) & 1 == 0 { "+" } else { "-" })
        .collect();
    format!("settings [{}], outcomes [{}]", s.join(","), o.join(","))
}

impl Behavior {
    /// Serializes to the interchange format:
    /// `{ "n": N, "table": [ { "settings": [...], "outcomes": ["+","-",...], "p": ... }, ... ] }`.
    pub fn to_json(&self) -> String {
        let n = self.scenario.num_parties();
        let mut entries = Vec::with_capacity(self.table.len());
        for s in 0..self.scenario.num_settings() {
            for o in 0..self.scenario.num_outcomes() {
                entries.push(BehaviorEntryJson {
                    settings: (0..n).map(|i| ((s >> i) & 1) as u8).collect(),
                    outcomes: (0..n)
                        .map(|i| if (o >> i) & 1 == 0 { "+" } else { "-" }.to_string())
                        .collect(),
                    p: self.prob(s, o),
                });
            }
        }
        serde_json::to_string_pretty(&BehaviorJson { n, table: entries })
            .expect("behavior serialization cannot fail")
    }

    /// Parses the interchange format. Every (settings, outcomes) pair must be
    /// present exactly once; missing entries are an error, not implicit zeros.
    pub fn from_json(text: &str, range_tol: f64) -> Result<Behavior> {
        let raw: BehaviorJson = serde_json::from_str(text)
            .map_err(|e| Error::InvalidBehavior(format!("malformed behavior JSON: {e}")))?;
        let scenario = Scenario::new(raw.n)?;
        let n = raw.n;
        let mut table = vec![f64::NAN; scenario.table_len()];
        for entry in &raw.table {
            if entry.settings.len() != n || entry.outcomes.len() != n {
                return Err(Error::InvalidBehavior(format!(
                    "entry has {} settings / {} outcomes, expected {n}",
                    entry.settings.len(),
                    entry.outcomes.len()
                )));
            }
            let mut s = 0usize;
            let mut o = 0usize;
            for i in 0..n {
                match entry.settings[i] {
                    0 => {}
                    1 => s |= 1 << i,
                    x => {
                        return Err(Error::InvalidBehavior(format!("setting {x} is not a bit")));
                    }
                }
                match entry.outcomes[i].as_str() {
                    "+" => {}
                    "-" => o |= 1 << i,
                    x => {
                        return Err(Error::InvalidBehavior(format!(
                            "outcome {x:?} is not \"+\" or \"-\""
                        )));
                    }
                }
            }
            let idx = scenario.index(s, o);
            if !table[idx].is_nan() {
                return Err(Error::DuplicateTableEntry {
                    key: entry_key(s, o, n),
                });
            }
            table[idx] = entry.p;
        }
        let missing: Vec<usize> = (0..table.len()).filter(|&i| table[i].is_nan()).collect();
        if !missing.is_empty() {
            let first = missing
                .iter()
                .take(8)
                .map(|&i| entry_key(i >> n, i & ((1 << n) - 1), n))
                .collect();
            return Err(Error::MissingTableEntries {
                count: missing.len(),
                first,
            });
        }
        Behavior::from_table(scenario, table, range_tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform3() -> Behavior {
        Behavior::uniform(Scenario::new(3).unwrap())
    }

    #[test]
    fn scenario_caps() {
        assert!(Scenario::new(0).is_err());
        assert!(Scenario::new(9).is_err());
        assert_eq!(Scenario::new(8).unwrap().table_len(), 65536);
    }

    #[test]
    fn uniform_validates() {
        let r = uniform3().validate(0.0);
        assert!(r.passes);
        assert_eq!(r.max_normalization_deviation, 0.0);
        assert_eq!(r.max_range_violation, 0.0);
    }

    #[test]
    fn perturbed_entry_fails_with_its_deviation() {
        let s = Scenario::new(3).unwrap();
        let mut table = vec![0.125; s.table_len()];
        table[5] += 0.01;
        assert!(Behavior::from_table(s, table.clone(), EXACT_TOL).is_err());
        let b = Behavior {
            scenario: s,
            table,
        };
        let r = b.validate(1e-9);
        assert!(!r.passes);
        assert!((r.max_normalization_deviation - 0.01).abs() < 1e-15);
    }

    #[test]
    fn uniform_is_no_signaling() {
        let r = uniform3().no_signaling_report(0.0);
        assert!(r.is_no_signaling);
        assert_eq!(r.max_deviation, 0.0);
    }

    #[test]
    fn one_way_vertex_signals_with_deviation_one() {
        // a = +1 always, b = sign of party 1's setting (+ for X=0, − for X=1).
        let s = Scenario::new(2).unwrap();
        let mut table = vec![0.0; s.table_len()];
        for x in 0..2usize {
            for y in 0..2usize {
                let settings = x | (y << 1);
                let o = if x == 0 { 0b00 } else { 0b10 };
                table[s.index(settings, o)] = 1.0;
            }
        }
        let b = Behavior::from_table(s, table, 0.0).unwrap();
        let r = b.no_signaling_report(1e-9);
        assert!(!r.is_no_signaling);
        assert!((r.max_deviation - 1.0).abs() < 1e-15);
        assert_eq!(r.worst_case.as_ref().unwrap().party, 0);

        // The marginal on party 2 is context-dependent, hence an error...
        assert!(matches!(b.marginal(&[1]), Err(Error::Signaling { .. })));
        // ...but the marginal on party 1 is fine (a is constant).
        let m = b.marginal(&[0]).unwrap();
        assert_eq!(m.prob(0, 0), 1.0);
        assert_eq!(m.prob(1, 0), 1.0);
    }

    #[test]
    fn marginal_of_uniform_is_uniform() {
        let m = uniform3().marginal(&[1, 2]).unwrap();
        assert_eq!(m.scenario().num_parties(), 2);
        for &p in m.table() {
            assert!((p - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn marginalization_commutes() {
        let b = uniform3();
        let a = b.marginal(&[0, 2]).unwrap().marginal(&[1]).unwrap();
        let direct = b.marginal(&[2]).unwrap();
        for (x, y) in a.table().iter().zip(direct.table()) {
            assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn correlator_of_uniform_vanishes() {
        let b = uniform3();
        for s in [[0, 0, 0], [1, 0, 1], [1, 1, 1]] {
            assert_eq!(b.correlator(&s).unwrap(), 0.0);
        }
    }

    #[test]
    fn correlator_linear_in_behavior() {
        let s = Scenario::new(2).unwrap();
        let b1 = Behavior::uniform(s);
        // deterministic: both parties output +1 always
        let mut table = vec![0.0; s.table_len()];
        for x in 0..4 {
            table[s.index(x, 0)] = 1.0;
        }
        let b2 = Behavior::from_table(s, table, 0.0).unwrap();
        for q in [0.0, 0.25, 0.5, 1.0] {
            let mixed = b1.mix(&b2, q).unwrap();
            let lhs = mixed.correlator(&[0, 1]).unwrap();
            let rhs = q * b1.correlator(&[0, 1]).unwrap() + (1.0 - q) * b2.correlator(&[0, 1]).unwrap();
            assert!((lhs - rhs).abs() <= 1e-12);
        }
    }

    #[test]
    fn json_round_trip() {
        let b = uniform3();
        let parsed = Behavior::from_json(&b.to_json(), EXACT_TOL).unwrap();
        assert_eq!(parsed, b);
    }

    #[test]
    fn json_missing_entries_listed() {
        let s = Scenario::new(2).unwrap();
        let b = Behavior::uniform(s);
        let mut raw: serde_json::Value = serde_json::from_str(&b.to_json()).unwrap();
        let arr = raw["table"].as_array_mut().unwrap();
        arr.truncate(10);
        let err = Behavior::from_json(&raw.to_string(), EXACT_TOL).unwrap_err();
        match err {
            Error::MissingTableEntries { count, first } => {
                assert_eq!(count, 6);
                assert_eq!(first.len(), 6);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn json_duplicate_entry_rejected() {
        let s = Scenario::new(2).unwrap();
        let b = Behavior::uniform(s);
        let mut raw: serde_json::Value = serde_json::from_str(&b.to_json()).unwrap();
        let arr = raw["table"].as_array_mut().unwrap();
        let dup = arr[0].clone();
        arr.push(dup);
        assert!(matches!(
            Behavior::from_json(&raw.to_string(), EXACT_TOL),
            Err(Error::DuplicateTableEntry { .. })
        ));
    }
}

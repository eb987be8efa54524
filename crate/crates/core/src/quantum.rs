//! GHZ-like states, Bloch-parametrized dichotomic measurements, Born-rule
//! behaviors, and the broadcast construction that reproduces the GHZ
//! correlation.

use crate::error::{Error, Result};
use crate::expressions::{Expression, Factor};
use crate::scenario::{sign_bit, Behavior, Scenario, EXACT_TOL};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

/// Pure n-qubit state, unit norm within 1e−12.
#[derive(Clone, Debug)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        Scenario::new(n)?;
        if amps.len() != 1 << n {
            return Err(Error::InvalidArgument(format!(
                "state needs {} amplitudes, got {}",
                1 << n,
                amps.len()
            )));
        }
        let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "state norm² = {norm2}, expected 1"
            )));
        }
        Ok(StateVector { n, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }
}

/// cos(t)|0…0⟩ + sin(t)|1…1⟩.
pub fn ghz_state(n: usize, t: f64) -> Result<StateVector> {
    if !(2..=8).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "GHZ-like states defined for 2 ≤ n ≤ 8, got {n}"
        )));
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
    amps[0] = Complex64::new(t.cos(), 0.0);
    amps[(1 << n) - 1] = Complex64::new(t.sin(), 0.0);
    StateVector::new(n, amps)
}

/// The shared-angle measurement parametrization: setting 0 of party i points
/// along (sin α cos φ_i, sin α sin φ_i, cos α), setting 1 along the same
/// with α → β and φ_i → φ_i + γ.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeasurementParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub phi: Vec<f64>,
}

impl MeasurementParams {
    /// Angles reduced to [0, 2π) for reporting.
    pub fn reduced(&self) -> MeasurementParams {
        let red = |x: f64| x.rem_euclid(2.0 * PI);
        MeasurementParams {
            alpha: red(self.alpha),
            beta: red(self.beta),
            gamma: red(self.gamma),
            phi: self.phi.iter().map(|&p| red(p)).collect(),
        }
    }
}

/// Bloch measurement directions: one unit vector per (party, setting).
#[derive(Clone, Debug)]
pub struct ObservableSet {
    n: usize,
    directions: Vec<[[f64; 3]; 2]>,
}

impl ObservableSet {
    pub fn new(directions: Vec<[[f64; 3]; 2]>) -> Result<Self> {
        let n = directions.len();
        Scenario::new(n)?;
        for (i, party) in directions.iter().enumerate() {
            for v in party {
                let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                if (norm - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidArgument(format!(
                        "party {} direction has norm {norm}",
                        i + 1
                    )));
                }
            }
        }
        Ok(ObservableSet { n, directions })
    }

    pub fn num_parties(&self) -> usize {
        self.n
    }

    pub fn direction(&self, party: usize, setting: u8) -> [f64; 3] {
        self.directions[party][setting as usize]
    }
}

pub fn settings_from_params(params: &MeasurementParams) -> Result<ObservableSet> {
    let directions = params
        .phi
        .iter()
        .map(|&phi| {
            let a = params.alpha;
            let b = params.beta;
            let g = params.gamma;
            [
                [a.sin() * phi.cos(), a.sin() * phi.sin(), a.cos()],
                [
                    b.sin() * (phi + g).cos(),
                    b.sin() * (phi + g).sin(),
                    b.cos(),
                ],
            ]
        })
        .collect();
    ObservableSet::new(directions)
}

/// Eigenvector of n̂·σ for the ±1 outcome; the +1 outcome maps to the
/// +eigenvector.
fn eigenvector(dir: [f64; 3], sign: i8) -> [Complex64; 2] {
    let theta = dir[2].clamp(-1.0, 1.0).acos();
    let phi = dir[1].atan2(dir[0]);
    let phase = Complex64::new(0.0, phi).exp();
    let (half_cos, half_sin) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    if sign > 0 {
        [Complex64::new(half_cos, 0.0), phase * half_sin]
    } else {
        [Complex64::new(-half_sin, 0.0), phase * half_cos]
    }
}

/// Contracts qubit `party` of `v` (on `nq` qubits, bit i = qubit i) with the
/// bra ⟨u|.
fn contract(v: &[Complex64], nq: usize, party: usize, u: [Complex64; 2]) -> Vec<Complex64> {
    let (c0, c1) = (u[0].conj(), u[1].conj());
    let mut out = vec![Complex64::new(0.0, 0.0); 1 << (nq - 1)];
    let low_mask = (1usize << party) - 1;
    for (idx, slot) in out.iter_mut().enumerate() {
        let lo = idx & low_mask;
        let hi = idx >> party;
        let i0 = (hi << (party + 1)) | lo;
        let i1 = i0 | (1 << party);
        *slot = c0 * v[i0] + c1 * v[i1];
    }
    out
}

/// Probability of the partial joint event given by `factors` (distinct
/// parties, each with a setting and outcome sign): ‖(⟨u_A| ⊗ 1)ψ‖².
pub fn event_probability(state: &StateVector, obs: &ObservableSet, factors: &[Factor]) -> f64 {
    let mut v = state.amps.clone();
    let mut nq = state.n;
    let mut sorted: Vec<&Factor> = factors.iter().collect();
    sorted.sort_by_key(|f| std::cmp::Reverse(f.party));
    for f in sorted {
        let u = eigenvector(obs.direction(f.party, f.setting), f.sign);
        v = contract(&v, nq, f.party, u);
        nq -= 1;
    }
    v.iter().map(|a| a.norm_sqr()).sum()
}

/// Born-rule value of an expression, term by term, without materializing the
/// full behavior table. Agrees with `expr.evaluate(&born_behavior(...))`.
pub fn expression_value(
    expr: &Expression,
    state: &StateVector,
    obs: &ObservableSet,
) -> Result<f64> {
    if expr.scenario().num_parties() != state.n || obs.n != state.n {
        return Err(Error::ScenarioMismatch {
            expected: expr.scenario().num_parties(),
            found: state.n,
        });
    }
    Ok(expr
        .terms()
        .iter()
        .map(|t| t.coefficient * event_probability(state, obs, &t.factors))
        .sum())
}

/// The full Born-rule behavior P(outcomes|settings) = ⟨ψ|⊗Π|ψ⟩.
pub fn born_behavior(state: &StateVector, obs: &ObservableSet) -> Result<Behavior> {
    if obs.n != state.n {
        return Err(Error::ScenarioMismatch {
            expected: obs.n,
            found: state.n,
        });
    }
    let sc = Scenario::new(state.n)?;
    let n = state.n;
    let mut table = vec![0.0; sc.table_len()];
    for s in 0..sc.num_settings() {
        for o in 0..sc.num_outcomes() {
            let factors: Vec<Factor> = (0..n)
                .map(|party| Factor {
                    party,
                    setting: ((s >> party) & 1) as u8,
                    sign: if (o >> party) & 1 == 0 { 1 } else { -1 },
                })
                .collect();
            table[sc.index(s, o)] = event_probability(state, obs, &factors);
        }
    }
    Behavior::from_table(sc, table, EXACT_TOL)
}

/// The GHZ correlation in closed form:
/// P(a⃗|X⃗) = 2^−N · [1 + cos(π/2 · ΣX_i) · Πa_i], built exactly.
pub fn ghz_correlation(n: usize) -> Result<Behavior> {
    if !(3..=8).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "GHZ correlation defined for 3 ≤ n ≤ 8, got {n}"
        )));
    }
    let sc = Scenario::new(n)?;
    let base = 1.0 / sc.num_outcomes() as f64;
    let mut table = vec![0.0; sc.table_len()];
    for s in 0..sc.num_settings() {
        // cos(π/2·k) cycles exactly through 1, 0, −1, 0.
        let cos = match s.count_ones() % 4 {
            0 => 1.0,
            2 => -1.0,
            _ => 0.0,
        };
        for o in 0..sc.num_outcomes() {
            let prod = if o.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            table[sc.index(s, o)] = base * (1.0 + cos * prod);
        }
    }
    Behavior::from_table(sc, table, 0.0)
}

/// The (N−2)-event-broadcast model behavior: the first N−2 parties output
/// uniform random signs; conditioned on their settings and outcomes, the
/// last two parties follow the four-branch quarter-probability rule with
/// x = (ΣX_i) mod 4, y = x mod 2, l = Πa_i and floor/ceil(x/2) exponents.
/// Equals [`ghz_correlation`] entrywise.
pub fn broadcast_reproduction(n: usize) -> Result<Behavior> {
    if !(3..=8).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "broadcast reproduction defined for 3 ≤ n ≤ 8, got {n}"
        )));
    }
    let sc = Scenario::new(n)?;
    let m = n - 2; // broadcasting parties
    let base = 1.0 / (1usize << m) as f64; // uniform broadcaster outcomes
    let mut table = vec![0.0; sc.table_len()];
    for s in 0..sc.num_settings() {
        let x = (s & ((1 << m) - 1)).count_ones() as usize % 4;
        let y = x % 2;
        let fl = x / 2;
        let ce = x.div_ceil(2);
        let s_a = (s >> m) & 1; // setting of party N−1
        let s_b = (s >> (m + 1)) & 1; // setting of party N
        for o in 0..sc.num_outcomes() {
            let l: i8 = if (o & ((1 << m) - 1)).count_ones().is_multiple_of(2) {
                1
            } else {
                -1
            };
            let o_a = (o >> m) & 1;
            let o_b = (o >> (m + 1)) & 1;
            // The four branches: (a^0, a^1) of party N−1 and the sign
            // exponents of party N at settings y and y⊕1.
            let branches: [([usize; 2], [usize; 2]); 4] = [
                ([1, 0], [fl + y + 1, ce + y + 1]),
                ([0, 0], [fl + y, ce + y + 1]),
                ([0, 1], [fl + y, ce + y]),
                ([1, 1], [fl + y + 1, ce + y]),
            ];
            let mut hits = 0usize;
            for (a_resp, b_exp) in branches {
                if a_resp[s_a] != o_a {
                    continue;
                }
                let exp = if s_b == y { b_exp[0] } else { b_exp[1] };
                let b_sign = l * if exp % 2 == 0 { 1 } else { -1 };
                if sign_bit(b_sign) == o_b {
                    hits += 1;
                }
            }
            table[sc.index(s, o)] = base * 0.25 * hits as f64;
        }
    }
    Behavior::from_table(sc, table, 0.0)
}

/// The state angle and measurement parameters at which S3 attains its
/// quantum maximum 4√2: equatorial settings with optimizer-certified
/// frozen phases.
pub fn svetlichny_settings() -> (f64, MeasurementParams) {
    (
        FRAC_PI_4,
        MeasurementParams {
            alpha: FRAC_PI_2,
            beta: FRAC_PI_2,
            gamma: FRAC_PI_2,
            phi: vec![-FRAC_PI_4, 0.0, 0.0],
        },
    )
}

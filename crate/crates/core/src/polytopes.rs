//! Correlation-class polytopes: vertex enumeration, exact bounds and LP
//! membership with certificates.
//!
//! Every class here is the convex hull of a finite vertex set:
//!
//! * `Local` — products of per-party deterministic response functions.
//! * `BL` — one singleton party responding to its own setting, the other two
//!   sharing an arbitrary deterministic box (outcomes may depend on both
//!   group settings), over all three bipartitions.
//! * `TOBL` — as BL but the group box is one-way signaling, both directions.
//! * `NSBL` — as BL but the group box is an extremal no-signaling box
//!   (16 deterministic local boxes plus 8 PR-type boxes with entries 1/2).
//! * `BC1` — one designated first party responds to its own setting and
//!   broadcasts it; each other party responds to (own setting, first
//!   party's setting).
//! * `OneWay` — bipartite sender/receiver signaling, receiver sees the
//!   sender's setting.
//!
//! Bounds are exact maxima over the vertex set; membership is a phase-1 LP
//! with a Farkas certificate on failure.

use crate::error::{Error, Result};
use crate::expressions::Expression;
use crate::lp::{self, LpOutcome, Matrix};
use crate::scenario::{Behavior, Scenario};
use serde::Serialize;
use std::collections::HashSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[allow(clippy::upper_case_acronyms)]
pub enum ModelClass {
    Local,
    BL,
    TOBL,
    NSBL,
    BC1,
    OneWay { sender: usize, receiver: usize },
}

impl std::fmt::Display for ModelClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelClass::Local => write!(f, "Local"),
            ModelClass::BL => write!(f, "BL"),
            ModelClass::TOBL => write!(f, "TOBL"),
            ModelClass::NSBL => write!(f, "NSBL"),
            ModelClass::BC1 => write!(f, "BC1"),
            ModelClass::OneWay { sender, receiver } => {
                write!(f, "OneWay({}->{})", sender + 1, receiver + 1)
            }
        }
    }
}

/// The extremal behaviors of one correlation class (deduplicated).
#[derive(Clone, Debug)]
pub struct VertexSet {
    pub model: ModelClass,
    pub scenario: Scenario,
    pub label: String,
    vertices: Vec<Behavior>,
}

impl VertexSet {
    pub fn vertices(&self) -> &[Behavior] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn to_json(&self) -> String {
        let tables: Vec<serde_json::Value> = self
            .vertices
            .iter()
            .map(|v| serde_json::from_str(&v.to_json()).expect("behavior JSON is valid"))
            .collect();
        serde_json::to_string_pretty(&serde_json::json!({
            "model": self.label,
            "n": self.scenario.num_parties(),
            "vertices": tables,
        }))
        .expect("vertex set serialization cannot fail")
    }
}

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

/// Deterministic single-party response: 2-bit code, bit x = 1 means outcome
/// −1 at setting x.
fn fn1(code: usize, setting: usize) -> usize {
    (code >> setting) & 1
}

struct VertexBuilder {
    scenario: Scenario,
    seen: HashSet<Vec<u64>>,
    vertices: Vec<Behavior>,
}

impl VertexBuilder {
    fn new(scenario: Scenario) -> Self {
        VertexBuilder {
            scenario,
            seen: HashSet::new(),
            vertices: Vec::new(),
        }
    }

    /// Adds a behavior table, skipping exact duplicates.
    fn push(&mut self, table: Vec<f64>) {
        let key: Vec<u64> = table.iter().map(|v| v.to_bits()).collect();
        if self.seen.insert(key) {
            self.vertices.push(
                Behavior::from_table(self.scenario, table, 0.0)
                    .expect("vertex tables are exact by construction"),
            );
        }
    }

    /// Adds the deterministic behavior given by per-party outcome bits as a
    /// function of the full settings vector.
    fn push_deterministic(&mut self, resp: impl Fn(usize, usize) -> usize) {
        let sc = self.scenario;
        let n = sc.num_parties();
        let mut table = vec![0.0; sc.table_len()];
        for s in 0..sc.num_settings() {
            let mut o = 0usize;
            for party in 0..n {
                o |= resp(party, s) << party;
            }
            table[sc.index(s, o)] = 1.0;
        }
        self.push(table);
    }

    fn finish(self, model: ModelClass, label: String) -> VertexSet {
        VertexSet {
            model,
            scenario: self.scenario,
            label,
            vertices: self.vertices,
        }
    }
}

fn local_vertices(scenario: Scenario) -> VertexSet {
    let n = scenario.num_parties();
    let mut b = VertexBuilder::new(scenario);
    for codes in 0..(1usize << (2 * n)) {
        b.push_deterministic(|party, s| fn1((codes >> (2 * party)) & 3, (s >> party) & 1));
    }
    b.finish(ModelClass::Local, "Local".into())
}

/// The three bipartitions of a tripartite scenario: (singleton, group pair).
fn bipartitions() -> [(usize, [usize; 2]); 3] {
    [(0, [1, 2]), (1, [0, 2]), (2, [0, 1])]
}

fn bl_vertices(scenario: Scenario) -> VertexSet {
    let mut b = VertexBuilder::new(scenario);
    for (j, [k, l]) in bipartitions() {
        for f in 0..4usize {
            // g maps the group settings pair to the two group outcome bits.
            for g in 0..256usize {
                b.push_deterministic(|party, s| {
                    if party == j {
                        fn1(f, (s >> j) & 1)
                    } else {
                        let idx = ((s >> k) & 1) | (((s >> l) & 1) << 1);
                        let bit = if party == k { 0 } else { 1 };
                        (g >> (2 * idx + bit)) & 1
                    }
                });
            }
        }
    }
    b.finish(ModelClass::BL, "BL".into())
}

fn tobl_vertices(scenario: Scenario) -> VertexSet {
    let mut b = VertexBuilder::new(scenario);
    for (j, group) in bipartitions() {
        for (snd, rcv) in [(group[0], group[1]), (group[1], group[0])] {
            for f in 0..4usize {
                for u in 0..4usize {
                    // Receiver outcome depends on (own setting, sender setting).
                    for v in 0..16usize {
                        b.push_deterministic(|party, s| {
                            if party == j {
                                fn1(f, (s >> j) & 1)
                            } else if party == snd {
                                fn1(u, (s >> snd) & 1)
                            } else {
                                let idx = ((s >> rcv) & 1) | (((s >> snd) & 1) << 1);
                                (v >> idx) & 1
                            }
                        });
                    }
                }
            }
        }
    }
    b.finish(ModelClass::TOBL, "TOBL".into())
}

/// The 24 extremal boxes of the bipartite 2-setting 2-outcome no-signaling
/// polytope, as `box[x][y][a][b]` probability arrays: 16 deterministic local
/// boxes and 8 PR-type boxes `a ⊕ b = xy ⊕ αx ⊕ βy ⊕ δ`.
#[allow(clippy::needless_range_loop)]
pub fn extremal_ns_boxes() -> Vec<[[[[f64; 2]; 2]; 2]; 2]> {
    let mut boxes = Vec::with_capacity(24);
    for u in 0..4usize {
        for w in 0..4usize {
            let mut bx = [[[[0.0; 2]; 2]; 2]; 2];
            for x in 0..2 {
                for y in 0..2 {
                    bx[x][y][fn1(u, x)][fn1(w, y)] = 1.0;
                }
            }
            boxes.push(bx);
        }
    }
    for al in 0..2usize {
        for be in 0..2usize {
            for de in 0..2usize {
                let mut bx = [[[[0.0; 2]; 2]; 2]; 2];
                for x in 0..2 {
                    for y in 0..2 {
                        let target = (x & y) ^ (al & x) ^ (be & y) ^ de;
                        for a in 0..2 {
                            bx[x][y][a][a ^ target] = 0.5;
                        }
                    }
                }
                boxes.push(bx);
            }
        }
    }
    boxes
}

#[allow(clippy::needless_range_loop)]
fn nsbl_vertices(scenario: Scenario) -> VertexSet {
    let sc = scenario;
    let boxes = extremal_ns_boxes();
    let mut b = VertexBuilder::new(scenario);
    for (j, [k, l]) in bipartitions() {
        for f in 0..4usize {
            for bx in &boxes {
                let mut table = vec![0.0; sc.table_len()];
                for s in 0..sc.num_settings() {
                    let oj = fn1(f, (s >> j) & 1);
                    let (x, y) = ((s >> k) & 1, (s >> l) & 1);
                    for ok in 0..2usize {
                        for ol in 0..2usize {
                            let p = bx[x][y][ok][ol];
                            if p > 0.0 {
                                let o = (oj << j) | (ok << k) | (ol << l);
                                table[sc.index(s, o)] = p;
                            }
                        }
                    }
                }
                b.push(table);
            }
        }
    }
    b.finish(ModelClass::NSBL, "NSBL".into())
}

fn bc1_vertices_into(b: &mut VertexBuilder, j: usize) {
    let others: Vec<usize> = (0..3).filter(|&p| p != j).collect();
    let k = others[0];
    for f in 0..4usize {
        for gk in 0..16usize {
            // Each non-first party responds to (own setting, first party's
            // setting); the first party's outcome is a function of its
            // setting, so conditioning on the setting alone suffices.
            for gl in 0..16usize {
                b.push_deterministic(|party, s| {
                    let xj = (s >> j) & 1;
                    if party == j {
                        fn1(f, xj)
                    } else {
                        let g = if party == k { gk } else { gl };
                        let idx = ((s >> party) & 1) | (xj << 1);
                        (g >> idx) & 1
                    }
                });
            }
        }
    }
}

fn bc1_vertices(scenario: Scenario) -> VertexSet {
    let mut b = VertexBuilder::new(scenario);
    for j in 0..3 {
        bc1_vertices_into(&mut b, j);
    }
    b.finish(ModelClass::BC1, "BC1".into())
}

/// The single-first-broadcaster family of BC1 vertices (first party `first`).
pub fn bc1_family(scenario: Scenario, first: usize) -> Result<VertexSet> {
    if scenario.num_parties() != 3 {
        return Err(Error::Unsupported(format!(
            "BC1 enumeration needs N = 3, got N = {}",
            scenario.num_parties()
        )));
    }
    if first >= 3 {
        return Err(Error::InvalidArgument(format!(
            "first party {first} out of range"
        )));
    }
    let mut b = VertexBuilder::new(scenario);
    bc1_vertices_into(&mut b, first);
    Ok(b.finish(ModelClass::BC1, format!("BC1[first={}]", first + 1)))
}

fn one_way_vertices(scenario: Scenario, sender: usize, receiver: usize) -> VertexSet {
    let mut b = VertexBuilder::new(scenario);
    for f in 0..4usize {
        for g in 0..16usize {
            b.push_deterministic(|party, s| {
                if party == sender {
                    fn1(f, (s >> sender) & 1)
                } else {
                    let idx = ((s >> receiver) & 1) | (((s >> sender) & 1) << 1);
                    (g >> idx) & 1
                }
            });
        }
    }
    b.finish(
        ModelClass::OneWay { sender, receiver },
        format!("OneWay({}->{})", sender + 1, receiver + 1),
    )
}

/// Enumerates the extremal behaviors of a correlation class.
///
/// Supported: `Local` for N ≤ 6, the bilocal/broadcast classes for N = 3,
/// `OneWay` for N = 2.
pub fn enumerate_vertices(model: ModelClass, scenario: Scenario) -> Result<VertexSet> {
    let n = scenario.num_parties();
    match model {
        ModelClass::Local => {
            if n > 6 {
                return Err(Error::Unsupported(format!(
                    "Local enumeration capped at N = 6, got N = {n}"
                )));
            }
            Ok(local_vertices(scenario))
        }
        ModelClass::BL | ModelClass::TOBL | ModelClass::NSBL | ModelClass::BC1 => {
            if n != 3 {
                return Err(Error::Unsupported(format!(
                    "{model} enumeration needs N = 3, got N = {n}"
                )));
            }
            Ok(match model {
                ModelClass::BL => bl_vertices(scenario),
                ModelClass::TOBL => tobl_vertices(scenario),
                ModelClass::NSBL => nsbl_vertices(scenario),
                _ => bc1_vertices(scenario),
            })
        }
        ModelClass::OneWay { sender, receiver } => {
            if n != 2 || sender >= 2 || receiver >= 2 || sender == receiver {
                return Err(Error::Unsupported(format!(
                    "OneWay enumeration needs N = 2 with distinct parties, got N = {n}"
                )));
            }
            Ok(one_way_vertices(scenario, sender, receiver))
        }
    }
}

// ---------------------------------------------------------------------------
// Bounds
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct BoundResult {
    /// Exact maximum over the vertex set, rounded to 12 decimals (the maxima
    /// are attained at rational values; rounding removes float dust from the
    /// headline number).
    pub value: f64,
    pub witness: Behavior,
}

fn round12(v: f64) -> f64 {
    (v * 1e12).round() / 1e12
}

/// Maximum of the expression over a vertex set. Each term's partial-event
/// probability is read off the vertex table directly (absent parties at
/// setting 0, outcomes summed), which is well defined even for the signaling
/// vertices of BL/BC1 where [`Expression::evaluate`] would refuse.
pub fn bound_over(expr: &Expression, vertices: &VertexSet) -> Result<BoundResult> {
    if expr.scenario() != vertices.scenario {
        return Err(Error::ScenarioMismatch {
            expected: expr.scenario().num_parties(),
            found: vertices.scenario.num_parties(),
        });
    }
    if vertices.is_empty() {
        return Err(Error::InvalidArgument("empty vertex set".into()));
    }
    let coef = expr.coefficient_vector();
    let mut best = f64::NEG_INFINITY;
    let mut arg = 0usize;
    for (i, v) in vertices.vertices.iter().enumerate() {
        let val: f64 = coef.iter().zip(v.table()).map(|(c, p)| c * p).sum();
        if val > best {
            best = val;
            arg = i;
        }
    }
    Ok(BoundResult {
        value: round12(best),
        witness: vertices.vertices[arg].clone(),
    })
}

/// Enumerates the class and maximizes the expression over it.
pub fn bound(expr: &Expression, model: ModelClass) -> Result<BoundResult> {
    let vertices = enumerate_vertices(model, expr.scenario())?;
    bound_over(expr, &vertices)
}

// ---------------------------------------------------------------------------
// Membership
// ---------------------------------------------------------------------------

/// A separating linear functional proving non-membership: on every vertex
/// `value(v) ≤ vertex_max`, while `value(behavior) = behavior_value` exceeds
/// it by `gap`.
#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    /// Coefficients over the 4^N table entries.
    pub table_coefficients: Vec<f64>,
    /// Constant offset (the dual of the normalization row).
    pub constant: f64,
    pub behavior_value: f64,
    pub vertex_max: f64,
}

impl Certificate {
    pub fn value(&self, behavior: &Behavior) -> f64 {
        self.table_coefficients
            .iter()
            .zip(behavior.table())
            .map(|(c, p)| c * p)
            .sum::<f64>()
            + self.constant
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MembershipResult {
    pub member: bool,
    /// Non-negligible convex weights by vertex index (members only).
    pub weights: Option<Vec<(usize, f64)>>,
    /// Largest entrywise gap between the reconstructed mixture and the
    /// behavior (members only).
    pub reconstruction_error: Option<f64>,
    pub certificate: Option<Certificate>,
    /// behavior_value − vertex_max for non-members, 0 for members.
    pub gap: f64,
}

/// Entries at or below this are treated as exact zeros by the presolve;
/// the weight a column could carry through such a row is far below any
/// membership tolerance in use.
const PRESOLVE_ZERO: f64 = 1e-14;

/// Magnitude of the certificate coefficient assigned to presolved-away zero
/// rows. Phase-1 duals on kept rows lie in [−1, 1] and every vertex column
/// carries total mass ≤ 2^N + 1, so this dominates any kept-row
/// contribution of an excluded column (which has mass ≥ 1/2 on a zero row).
const PRESOLVE_PENALTY: f64 = 600.0;

/// Decides whether `behavior` lies in the convex hull of `vertices`, within
/// per-entry tolerance `tol`, via a phase-1 LP.
///
/// Zero entries of the behavior are presolved: a vertex with probability
/// mass on a zero row can only appear with negligible weight, so its column
/// is dropped and the zero rows leave the LP. Deterministic behaviors (the
/// vertices themselves) collapse to a handful of rows and columns this way.
pub fn membership_in(
    behavior: &Behavior,
    vertices: &VertexSet,
    tol: f64,
) -> Result<MembershipResult> {
    if behavior.scenario() != vertices.scenario {
        return Err(Error::ScenarioMismatch {
            expected: vertices.scenario.num_parties(),
            found: behavior.scenario().num_parties(),
        });
    }
    let table_len = behavior.scenario().table_len();
    let kept_rows: Vec<usize> = (0..table_len)
        .filter(|&i| behavior.table()[i] > PRESOLVE_ZERO)
        .collect();
    let zero_rows: Vec<usize> = (0..table_len)
        .filter(|&i| behavior.table()[i] <= PRESOLVE_ZERO)
        .collect();
    let kept_cols: Vec<usize> = (0..vertices.len())
        .filter(|&j| {
            zero_rows
                .iter()
                .all(|&i| vertices.vertices[j].table()[i] <= PRESOLVE_ZERO)
        })
        .collect();

    let outcome = if kept_cols.is_empty() {
        // Every vertex is excluded by some zero row; separate outright.
        let mut y = vec![0.0; table_len + 1];
        for &i in &zero_rows {
            y[i] = -PRESOLVE_PENALTY;
        }
        y[table_len] = 1.0;
        let objective = y
            .iter()
            .take(table_len)
            .zip(behavior.table())
            .map(|(yi, bi)| yi * bi)
            .sum::<f64>()
            + 1.0;
        LpOutcome::Infeasible(lp::FarkasCertificate { y, objective })
    } else {
        let rows = kept_rows.len() + 1;
        let mut a = Matrix::zeros(rows, kept_cols.len());
        for (jj, &j) in kept_cols.iter().enumerate() {
            let table = vertices.vertices[j].table();
            let col = a.col_mut(jj);
            for (ii, &i) in kept_rows.iter().enumerate() {
                col[ii] = table[i];
            }
            col[rows - 1] = 1.0;
        }
        let mut b: Vec<f64> = kept_rows.iter().map(|&i| behavior.table()[i]).collect();
        b.push(1.0);
        match lp::feasibility(&a, &b, tol)? {
            LpOutcome::Feasible { x, residual } => {
                // Re-inflate the weight vector to the full vertex list.
                let mut full = vec![0.0; vertices.len()];
                for (jj, &j) in kept_cols.iter().enumerate() {
                    full[j] = x[jj];
                }
                LpOutcome::Feasible { x: full, residual }
            }
            LpOutcome::Infeasible(cert) => {
                // Lift the certificate back to the full row space: kept rows
                // keep their duals, presolved zero rows get a penalty that
                // keeps every excluded column non-positive.
                let mut y = vec![0.0; table_len + 1];
                for (ii, &i) in kept_rows.iter().enumerate() {
                    y[i] = cert.y[ii];
                }
                for &i in &zero_rows {
                    y[i] = -PRESOLVE_PENALTY;
                }
                y[table_len] = cert.y[rows - 1];
                let objective = y
                    .iter()
                    .take(table_len)
                    .zip(behavior.table())
                    .map(|(yi, bi)| yi * bi)
                    .sum::<f64>()
                    + y[table_len];
                LpOutcome::Infeasible(lp::FarkasCertificate { y, objective })
            }
        }
    };

    match outcome {
        LpOutcome::Feasible { x, .. } => {
            let mut recon = vec![0.0; table_len];
            for (j, &q) in x.iter().enumerate() {
                if q > 0.0 {
                    for (r, p) in vertices.vertices[j].table().iter().enumerate() {
                        recon[r] += q * p;
                    }
                }
            }
            let err = recon
                .iter()
                .zip(behavior.table())
                .map(|(r, p)| (r - p).abs())
                .fold(0.0f64, f64::max);
            let weights: Vec<(usize, f64)> = x
                .iter()
                .enumerate()
                .filter(|(_, &q)| q > 1e-12)
                .map(|(j, &q)| (j, q))
                .collect();
            Ok(MembershipResult {
                member: true,
                weights: Some(weights),
                reconstruction_error: Some(err),
                certificate: None,
                gap: 0.0,
            })
        }
        LpOutcome::Infeasible(cert) => {
            let table_coefficients = cert.y[..table_len].to_vec();
            let constant = cert.y[table_len];
            let certificate = Certificate {
                behavior_value: table_coefficients
                    .iter()
                    .zip(behavior.table())
                    .map(|(c, p)| c * p)
                    .sum::<f64>()
                    + constant,
                vertex_max: vertices
                    .vertices
                    .iter()
                    .map(|v| {
                        table_coefficients
                            .iter()
                            .zip(v.table())
                            .map(|(c, p)| c * p)
                            .sum::<f64>()
                            + constant
                    })
                    .fold(f64::NEG_INFINITY, f64::max),
                table_coefficients,
                constant,
            };
            let gap = certificate.behavior_value - certificate.vertex_max;
            Ok(MembershipResult {
                member: false,
                weights: None,
                reconstruction_error: None,
                certificate: Some(certificate),
                gap,
            })
        }
    }
}

/// Enumerates the class and tests membership.
pub fn membership(behavior: &Behavior, model: ModelClass, tol: f64) -> Result<MembershipResult> {
    let vertices = enumerate_vertices(model, behavior.scenario())?;
    membership_in(behavior, &vertices, tol)
}

/// LP cross-check route for bounds: maximizes the expression over the
/// membership polytope in weight space instead of scanning vertices.
pub fn bound_via_lp(expr: &Expression, vertices: &VertexSet) -> Result<f64> {
    if expr.scenario() != vertices.scenario {
        return Err(Error::ScenarioMismatch {
            expected: expr.scenario().num_parties(),
            found: vertices.scenario.num_parties(),
        });
    }
    let coef = expr.coefficient_vector();
    let objective: Vec<f64> = vertices
        .vertices
        .iter()
        .map(|v| coef.iter().zip(v.table()).map(|(c, p)| c * p).sum())
        .collect();
    let a = Matrix::from_columns(1, &vec![vec![1.0]; vertices.len()]);
    let (value, _) = lp::maximize(&objective, &a, &[1.0])?;
    Ok(value)
}

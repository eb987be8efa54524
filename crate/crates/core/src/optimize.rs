//! Maximization of quantum expression values over measurement parameters,
//! the state-angle sweep, and the appendix closed forms for R3.

use crate::error::{Error, Result};
use crate::expressions::Expression;
use crate::quantum::{
    expression_value, ghz_state, settings_from_params, MeasurementParams, ObservableSet,
    StateVector,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::{FRAC_PI_4, PI};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamMode {
    /// The shared-angle ansatz (α, β, γ, φ_1…φ_N): N+3 parameters.
    SharedAngles,
    /// Independent Bloch angles per party and setting: 4N parameters.
    GeneralPerParty,
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub restarts: usize,
    pub seed: u64,
    pub convergence_tol: f64,
    pub max_iterations: usize,
    pub mode: ParamMode,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            restarts: 64,
            seed: 1,
            convergence_tol: 1e-8,
            max_iterations: 2000,
            mode: ParamMode::SharedAngles,
        }
    }
}

#[derive(Clone, Debug)]
pub enum OptimizedParams {
    Shared(MeasurementParams),
    PerParty(ObservableSet),
}

#[derive(Clone, Debug)]
pub struct MaximizeOutcome {
    pub value: f64,
    pub params: OptimizedParams,
}

/// One point of a violation curve.
#[derive(Clone, Debug)]
pub struct CurvePoint {
    pub t: f64,
    pub value: f64,
    pub params: MeasurementParams,
}

#[derive(Clone, Debug)]
pub struct Curve {
    pub points: Vec<CurvePoint>,
}

impl Curve {
    /// CSV with header `t,value,alpha,beta,gamma,phi1,…,phiN`.
    pub fn to_csv(&self) -> String {
        let n = self
            .points
            .first()
            .map(|p| p.params.phi.len())
            .unwrap_or(0);
        let mut out = String::from("t,value,alpha,beta,gamma");
        for i in 1..=n {
            out.push_str(&format!(",phi{i}"));
        }
        out.push('\n');
        for p in &self.points {
            out.push_str(&format!(
                "{:.12},{:.12},{:.12},{:.12},{:.12}",
                p.t, p.value, p.params.alpha, p.params.beta, p.params.gamma
            ));
            for phi in &p.params.phi {
                out.push_str(&format!(",{phi:.12}"));
            }
            out.push('\n');
        }
        out
    }
}

fn dims(mode: ParamMode, n: usize) -> usize {
    match mode {
        ParamMode::SharedAngles => n + 3,
        ParamMode::GeneralPerParty => 4 * n,
    }
}

fn params_from_x(mode: ParamMode, n: usize, x: &[f64]) -> Result<OptimizedParams> {
    match mode {
        ParamMode::SharedAngles => Ok(OptimizedParams::Shared(MeasurementParams {
            alpha: x[0],
            beta: x[1],
            gamma: x[2],
            phi: x[3..3 + n].to_vec(),
        })),
        ParamMode::GeneralPerParty => {
            let directions = (0..n)
                .map(|i| {
                    let mk = |theta: f64, phi: f64| {
                        [
                            theta.sin() * phi.cos(),
                            theta.sin() * phi.sin(),
                            theta.cos(),
                        ]
                    };
                    [
                        mk(x[4 * i], x[4 * i + 1]),
                        mk(x[4 * i + 2], x[4 * i + 3]),
                    ]
                })
                .collect();
            Ok(OptimizedParams::PerParty(ObservableSet::new(directions)?))
        }
    }
}

fn observables_from_x(mode: ParamMode, n: usize, x: &[f64]) -> Result<ObservableSet> {
    match params_from_x(mode, n, x)? {
        OptimizedParams::Shared(p) => settings_from_params(&p),
        OptimizedParams::PerParty(o) => Ok(o),
    }
}

fn objective(expr: &Expression, state: &StateVector, mode: ParamMode, x: &[f64]) -> f64 {
    let n = state.num_qubits();
    match observables_from_x(mode, n, x) {
        Ok(obs) => expression_value(expr, state, &obs).unwrap_or(f64::NEG_INFINITY),
        Err(_) => f64::NEG_INFINITY,
    }
}

/// Classic Nelder-Mead descent on `f`, minimizing. Returns (x, f(x)).
fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: F,
    x0: &[f64],
    step: f64,
    tol: f64,
    max_iters: usize,
) -> (Vec<f64>, f64) {
    let dim = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += step;
        let fx = f(&x);
        simplex.push((x, fx));
    }
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    for _ in 0..max_iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[dim].1 - simplex[0].1 < tol {
            break;
        }
        let centroid: Vec<f64> = (0..dim)
            .map(|k| simplex[..dim].iter().map(|(x, _)| x[k]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();
        let reflect: Vec<f64> = (0..dim)
            .map(|k| centroid[k] + alpha * (centroid[k] - worst.0[k]))
            .collect();
        let f_reflect = f(&reflect);
        if f_reflect < simplex[0].1 {
            let expand: Vec<f64> = (0..dim)
                .map(|k| centroid[k] + gamma * (reflect[k] - centroid[k]))
                .collect();
            let f_expand = f(&expand);
            simplex[dim] = if f_expand < f_reflect {
                (expand, f_expand)
            } else {
                (reflect, f_reflect)
            };
            continue;
        }
        if f_reflect < simplex[dim - 1].1 {
            simplex[dim] = (reflect, f_reflect);
            continue;
        }
        // Contract toward the better of worst/reflected.
        let (base, f_base) = if f_reflect < worst.1 {
            (&reflect, f_reflect)
        } else {
            (&worst.0, worst.1)
        };
        let contract: Vec<f64> = (0..dim)
            .map(|k| centroid[k] + rho * (base[k] - centroid[k]))
            .collect();
        let f_contract = f(&contract);
        if f_contract < f_base {
            simplex[dim] = (contract, f_contract);
            continue;
        }
        // Shrink toward the best point.
        let best = simplex[0].0.clone();
        for entry in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = (0..dim)
                .map(|k| best[k] + sigma * (entry.0[k] - best[k]))
                .collect();
            let fx = f(&x);
            *entry = (x, fx);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}

/// Shared driver: multistart Nelder-Mead with optional extra (warm) start
/// points prepended to the seeded random ones. Deterministic for a given
/// seed: restart i draws from stream i of the master seed and results merge
/// by (value, lowest index).
fn maximize_with_starts(
    expr: &Expression,
    n: usize,
    t: f64,
    config: &SearchConfig,
    extra_starts: &[Vec<f64>],
) -> Result<(f64, Vec<f64>)> {
    if expr.scenario().num_parties() != n {
        return Err(Error::ScenarioMismatch {
            expected: expr.scenario().num_parties(),
            found: n,
        });
    }
    if config.restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be ≥ 1".into()));
    }
    if !(t > 0.0 && t <= FRAC_PI_4 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "state angle t must lie in (0, π/4], got {t}"
        )));
    }
    let dim = dims(config.mode, n);
    let state = ghz_state(n, t)?;
    let mut starts: Vec<Vec<f64>> = extra_starts.to_vec();
    for s in &starts {
        if s.len() != dim {
            return Err(Error::InvalidArgument(
                "warm start has wrong dimension".into(),
            ));
        }
    }
    for i in 0..config.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(i as u64);
        starts.push((0..dim).map(|_| rng.gen_range(0.0..2.0 * PI)).collect());
    }
    let results: Vec<(f64, Vec<f64>)> = starts
        .par_iter()
        .map(|x0| {
            let (x, neg) = nelder_mead(
                |x| -objective(expr, &state, config.mode, x),
                x0,
                0.25,
                config.convergence_tol,
                config.max_iterations,
            );
            (-neg, x)
        })
        .collect();
    let mut best = results[0].clone();
    for r in &results[1..] {
        if r.0 > best.0 {
            best = r.clone();
        }
    }
    Ok(best)
}

/// Maximizes the Born-rule value of `expr` on the GHZ-like state of angle
/// `t` over measurement parameters, by seeded multistart local search.
pub fn maximize(
    expr: &Expression,
    n: usize,
    t: f64,
    config: &SearchConfig,
) -> Result<MaximizeOutcome> {
    let (value, x) = maximize_with_starts(expr, n, t, config, &[])?;
    let params = match params_from_x(config.mode, n, &x)? {
        OptimizedParams::Shared(p) => OptimizedParams::Shared(p.reduced()),
        other => other,
    };
    Ok(MaximizeOutcome { value, params })
}

/// Maximizes at every grid point, warm-starting each point from its
/// neighbor's optimum (the grid is processed from large t downward, where
/// the violation basin is widest) plus `config.restarts` fresh starts.
/// Always uses the shared-angle parametrization, which is what the curve
/// and its CSV format carry.
pub fn sweep(expr: &Expression, n: usize, t_grid: &[f64], config: &SearchConfig) -> Result<Curve> {
    if t_grid.is_empty() {
        return Err(Error::InvalidArgument("empty t grid".into()));
    }
    for w in t_grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidArgument(
                "t grid must be strictly increasing".into(),
            ));
        }
    }
    let config = SearchConfig {
        mode: ParamMode::SharedAngles,
        ..config.clone()
    };
    let mut points: Vec<CurvePoint> = Vec::with_capacity(t_grid.len());
    let mut warm: Option<Vec<f64>> = None;
    for &t in t_grid.iter().rev() {
        let extra: Vec<Vec<f64>> = warm.iter().cloned().collect();
        let (value, x) = maximize_with_starts(expr, n, t, &config, &extra)?;
        warm = Some(x.clone());
        let OptimizedParams::Shared(params) = params_from_x(config.mode, n, &x)? else {
            unreachable!("sweep runs in the shared-angle parametrization");
        };
        points.push(CurvePoint {
            t,
            value,
            params: params.reduced(),
        });
    }
    points.reverse();
    Ok(Curve { points })
}

/// Uniform grid of `count` points ending at π/4 (the Fig.-2 style default).
pub fn default_t_grid(count: usize) -> Vec<f64> {
    (1..=count)
        .map(|i| FRAC_PI_4 * i as f64 / count as f64)
        .collect()
}

// ---------------------------------------------------------------------------
// Appendix closed forms
// ---------------------------------------------------------------------------

/// Equatorial closed form of R3 on the GHZ-like state:
/// sin(2t)/8·[cos χ − 3cos(χ+γ) − 3cos(χ+2γ)] − 5/8, where χ = Σφ_i.
pub fn appendix_branch1(t: f64, chi: f64, gamma: f64) -> f64 {
    t.sin() * t.cos() * 2.0 / 8.0
        * (chi.cos() - 3.0 * (chi + gamma).cos() - 3.0 * (chi + 2.0 * gamma).cos())
        - 5.0 / 8.0
}

/// The measurement angle ratio of the low-t branch.
fn branch2_cos_b(t: f64) -> f64 {
    let s2 = 2.0 * t - t * t;
    let num = s2 * (2.0 * t).cos();
    let den = 2.0 * t * (2.0 * t).cos()
        + 4.0 * t.sin() * t.sin()
        + (s2 + 2.0 * s2.sqrt()) * (2.0 * t).sin();
    num / den
}

/// Measurement parameters at which the low-t closed form is the Born-rule
/// R3 value: cos α = t−1 and cos β the printed ratio, both on the
/// negative-sine branch (γ = 0, φ_i = 0).
pub fn appendix_branch2_params(t: f64) -> Result<MeasurementParams> {
    let ca = t - 1.0;
    let cb = branch2_cos_b(t);
    if !(-1.0..=1.0).contains(&ca) || !(-1.0..=1.0).contains(&cb) {
        return Err(Error::InvalidArgument(format!(
            "branch-2 angles undefined at t = {t}"
        )));
    }
    Ok(MeasurementParams {
        alpha: -ca.acos(),
        beta: -cb.acos(),
        gamma: 0.0,
        phi: vec![0.0; 3],
    })
}

/// Low-t closed form of R3 (positive on (0, 0.66]): evaluates the printed
/// expression with cos a = t−1, the printed cos b ratio, and both square
/// roots taken positive. Equals the Born-rule R3 at
/// [`appendix_branch2_params`].
pub fn appendix_branch2(t: f64) -> Result<f64> {
    if !(t > 0.0 && t <= 0.66) {
        return Err(Error::InvalidArgument(format!(
            "branch 2 is defined for t in (0, 0.66], got {t}"
        )));
    }
    let s2 = 2.0 * t - t * t;
    if s2 < 0.0 {
        return Err(Error::InvalidArgument(format!("2t − t² < 0 at t = {t}")));
    }
    let cb = branch2_cos_b(t);
    if cb.abs() > 1.0 {
        return Err(Error::InvalidArgument(format!(
            "|cos b| = {} > 1 at t = {t}",
            cb.abs()
        )));
    }
    let sb = (1.0 - cb * cb).sqrt();
    let (st, ct) = (t.sin(), t.cos());
    let tm2 = t - 2.0;
    let e1 = st * st / 8.0
        * (3.0 * (cb - 1.0) * tm2 * tm2 + 3.0 * (cb + 1.0) * (cb + 1.0) * tm2 - tm2 * tm2 * tm2);
    let e2 = ct * ct / 8.0 * (3.0 * t * t * (cb + 1.0) + 3.0 * t * (cb - 1.0) * (cb - 1.0) - t * t * t);
    let e3 = 2.0 * st * ct / 8.0 * (s2 * s2.sqrt() - 3.0 * sb * s2 - 3.0 * sb * sb * s2.sqrt());
    Ok(e1 - e2 - e3)
}

/// State angle above which branch 1 turns positive:
/// ½·arcsin(0.625/0.6614).
pub fn r3_threshold() -> f64 {
    0.5 * (0.625f64 / 0.6614).asin()
}

/// The branch-1 phases at the R3 optimum, as four-decimal constants (the
/// second is a rounded π/3, kept as the rounded literal on purpose).
pub const BRANCH1_CHI: f64 = 1.3807;
#[allow(clippy::approx_constant)]
pub const BRANCH1_GAMMA: f64 = 1.0472;

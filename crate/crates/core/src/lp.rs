//! Dense simplex for the small LPs behind membership tests and bound
//! cross-checks.
//!
//! Instances here are tiny (≤ 65 rows, a few thousand columns), so a revised
//! simplex with an explicit dense basis inverse is plenty. The phase-1 is an
//! L1 feasibility problem `min Σ(s⁺+s⁻) s.t. Ax + s⁺ − s⁻ = b, x,s ≥ 0`;
//! a positive optimum yields the Farkas certificate y = c_B·B⁻¹ with
//! yᵀA ≤ 0 componentwise and yᵀb equal to the optimum. On termination the
//! final basis system is re-solved directly, so reported points and duals
//! carry no pivot-accumulated drift.
//!
//! Pivoting follows Bland's rule (lowest-index entering column, lowest
//! leaving variable on ratio ties), which both guarantees termination and,
//! on these instances, prices only a short prefix of the columns per pivot.

// Dense kernels below read clearest with explicit indices.
#![allow(clippy::needless_range_loop)]

use crate::error::LpError;

/// Dense column-major matrix.
#[derive(Clone, Debug)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Self {
        let mut m = Matrix::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows);
            m.data[j * rows..(j + 1) * rows].copy_from_slice(col);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }
}

/// Outcome of a feasibility solve.
#[derive(Clone, Debug)]
pub enum LpOutcome {
    /// A point with `x ≥ 0`, `Ax ≈ b`; `residual` is the optimal L1 gap
    /// (zero up to round-off for genuinely feasible systems).
    Feasible { x: Vec<f64>, residual: f64 },
    /// Farkas certificate: `y·A ≤ 0` componentwise while `y·b > tol`.
    Infeasible(FarkasCertificate),
}

#[derive(Clone, Debug)]
pub struct FarkasCertificate {
    pub y: Vec<f64>,
    /// y·b, equal to the optimal L1 infeasibility.
    pub objective: f64,
}

const PRICE_EPS: f64 = 1e-9;
const PIVOT_EPS: f64 = 1e-10;
const MAX_PIVOTS: usize = 200_000;

/// Simplex state over the extended variable set `[x (n) | s⁺ (m) | s⁻ (m)]`,
/// in row-flipped coordinates where the right-hand side is non-negative.
struct Simplex {
    /// Constraint columns with the row sign flips folded in.
    aflip: Matrix,
    row_sign: Vec<f64>,
    rhs: Vec<f64>,
    n: usize,
    m: usize,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    binv: Vec<f64>, // m×m row-major
    xb: Vec<f64>,
}

impl Simplex {
    fn new(a: &Matrix, b: &[f64]) -> Self {
        let m = a.rows();
        let n = a.cols();
        // Flip rows with negative right-hand side so the all-s⁺ basis is
        // feasible; sign flips are undone when reporting the certificate.
        let row_sign: Vec<f64> = b.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
        let rhs: Vec<f64> = b.iter().zip(&row_sign).map(|(v, s)| v * s).collect();
        let mut aflip = Matrix::zeros(m, n);
        for j in 0..n {
            let src = a.col(j);
            let dst = aflip.col_mut(j);
            for i in 0..m {
                dst[i] = src[i] * row_sign[i];
            }
        }
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = 1.0;
        }
        let mut is_basic = vec![false; n + 2 * m];
        let basis: Vec<usize> = (0..m).map(|i| n + i).collect();
        for &j in &basis {
            is_basic[j] = true;
        }
        Simplex {
            aflip,
            row_sign,
            xb: rhs.clone(),
            rhs,
            n,
            m,
            basis,
            is_basic,
            binv,
        }
    }

    fn num_vars(&self) -> usize {
        self.n + 2 * self.m
    }

    /// Column j of the extended constraint matrix (flipped coordinates).
    fn column(&self, j: usize, out: &mut [f64]) {
        out.fill(0.0);
        if j < self.n {
            out.copy_from_slice(self.aflip.col(j));
        } else if j < self.n + self.m {
            out[j - self.n] = 1.0;
        } else {
            out[j - self.n - self.m] = -1.0;
        }
    }

    fn cost(&self, j: usize, phase1: bool, c: &[f64]) -> f64 {
        if j < self.n {
            if phase1 {
                0.0
            } else {
                c[j]
            }
        } else if phase1 {
            1.0
        } else {
            0.0
        }
    }

    /// Dual vector y = c_B·B⁻¹ from the running inverse.
    fn duals(&self, phase1: bool, c: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (i, &bv) in self.basis.iter().enumerate() {
            let cb = self.cost(bv, phase1, c);
            if cb != 0.0 {
                for k in 0..m {
                    y[k] += cb * self.binv[i * m + k];
                }
            }
        }
        y
    }

    /// Reduced cost of variable j given the duals.
    fn reduced_cost(&self, j: usize, y: &[f64], phase1: bool, c: &[f64]) -> f64 {
        let ya = if j < self.n {
            let col = self.aflip.col(j);
            let mut acc = 0.0;
            for i in 0..self.m {
                acc += y[i] * col[i];
            }
            acc
        } else if j < self.n + self.m {
            y[j - self.n]
        } else {
            -y[j - self.n - self.m]
        };
        self.cost(j, phase1, c) - ya
    }

    /// Runs the simplex for one phase (minimization), with Bland's rule as
    /// the anti-cycling pivot choice. In phase 2 the artificial variables
    /// are barred from re-entering.
    fn run(&mut self, phase1: bool, c: &[f64], pivots: &mut usize) -> Result<(), LpError> {
        let m = self.m;
        let mut col = vec![0.0; m];
        let mut d = vec![0.0; m];
        loop {
            *pivots += 1;
            if *pivots > MAX_PIVOTS {
                return Err(LpError::IterationLimit(MAX_PIVOTS));
            }
            let y = self.duals(phase1, c);
            let limit = if phase1 { self.num_vars() } else { self.n };
            let entering = (0..limit)
                .find(|&j| !self.is_basic[j] && self.reduced_cost(j, &y, phase1, c) < -PRICE_EPS);
            let Some(j) = entering else {
                return Ok(());
            };
            self.column(j, &mut col);
            for i in 0..m {
                let mut acc = 0.0;
                for k in 0..m {
                    acc += self.binv[i * m + k] * col[k];
                }
                d[i] = acc;
            }
            // Ratio test; ties go to the smallest leaving variable index
            // (the other half of Bland's rule).
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                if d[i] > PIVOT_EPS {
                    let ratio = self.xb[i] / d[i];
                    match leave {
                        None => leave = Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - PIVOT_EPS
                                || ((ratio - lr).abs() <= PIVOT_EPS
                                    && self.basis[i] < self.basis[li])
                            {
                                leave = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            let Some((r, _)) = leave else {
                return Err(LpError::Unbounded);
            };
            self.pivot(j, r, &d);
        }
    }

    fn pivot(&mut self, entering: usize, row: usize, d: &[f64]) {
        let m = self.m;
        let piv = d[row];
        for k in 0..m {
            self.binv[row * m + k] /= piv;
        }
        self.xb[row] /= piv;
        for i in 0..m {
            if i != row && d[i] != 0.0 {
                let f = d[i];
                for k in 0..m {
                    self.binv[i * m + k] -= f * self.binv[row * m + k];
                }
                self.xb[i] -= f * self.xb[row];
            }
        }
        self.is_basic[self.basis[row]] = false;
        self.is_basic[entering] = true;
        self.basis[row] = entering;
        // Degenerate round-off can leave a basic value at −1e−17; clamp so
        // later ratio tests stay sane.
        for v in self.xb.iter_mut() {
            if *v < 0.0 && *v > -1e-9 {
                *v = 0.0;
            }
        }
    }

    /// Solves B·x = rhs (or Bᵀ·x = rhs) for the current basis by fresh
    /// Gaussian elimination, discarding drift accumulated in `binv`.
    fn solve_basis(&self, rhs: &[f64], transpose: bool) -> Vec<f64> {
        let m = self.m;
        let mut mat = vec![0.0; m * m];
        let mut col = vec![0.0; m];
        for (pos, &j) in self.basis.iter().enumerate() {
            self.column(j, &mut col);
            for i in 0..m {
                // Basis column `pos` holds variable j; transposing swaps the
                // roles of (row, column).
                if transpose {
                    mat[pos * m + i] = col[i];
                } else {
                    mat[i * m + pos] = col[i];
                }
            }
        }
        let mut x = rhs.to_vec();
        // Gaussian elimination with partial pivoting.
        let mut perm: Vec<usize> = (0..m).collect();
        for k in 0..m {
            let mut best = k;
            for i in (k + 1)..m {
                if mat[perm[i] * m + k].abs() > mat[perm[best] * m + k].abs() {
                    best = i;
                }
            }
            perm.swap(k, best);
            let pk = perm[k];
            let piv = mat[pk * m + k];
            if piv.abs() < 1e-300 {
                continue;
            }
            for i in (k + 1)..m {
                let pi = perm[i];
                let f = mat[pi * m + k] / piv;
                if f != 0.0 {
                    for cidx in k..m {
                        mat[pi * m + cidx] -= f * mat[pk * m + cidx];
                    }
                    x[pi] -= f * x[pk];
                }
            }
        }
        let mut out = vec![0.0; m];
        for k in (0..m).rev() {
            let pk = perm[k];
            let mut acc = x[pk];
            for cidx in (k + 1)..m {
                acc -= mat[pk * m + cidx] * out[cidx];
            }
            let piv = mat[pk * m + k];
            out[k] = if piv.abs() < 1e-300 { 0.0 } else { acc / piv };
        }
        out
    }

    /// Basic variable values recomputed from a fresh basis solve.
    fn refined_xb(&self) -> Vec<f64> {
        self.solve_basis(&self.rhs, false)
            .into_iter()
            .map(|v| if v < 0.0 && v > -1e-9 { 0.0 } else { v })
            .collect()
    }

    /// Duals recomputed from a fresh basis solve of Bᵀy = c_B.
    fn refined_duals(&self, phase1: bool, c: &[f64]) -> Vec<f64> {
        let cb: Vec<f64> = self
            .basis
            .iter()
            .map(|&bv| self.cost(bv, phase1, c))
            .collect();
        self.solve_basis(&cb, true)
    }

    fn extract_x(&self, xb: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for (i, &bv) in self.basis.iter().enumerate() {
            if bv < self.n {
                x[bv] = xb[i];
            }
        }
        x
    }

    fn objective(&self, xb: &[f64], phase1: bool, c: &[f64]) -> f64 {
        self.basis
            .iter()
            .zip(xb)
            .map(|(&bv, &xv)| self.cost(bv, phase1, c) * xv)
            .sum()
    }
}

/// Decides whether `Ax = b, x ≥ 0` is solvable within L1 residual `tol`.
pub fn feasibility(a: &Matrix, b: &[f64], tol: f64) -> Result<LpOutcome, LpError> {
    if b.len() != a.rows() {
        return Err(LpError::Dimension(format!(
            "rhs has {} entries, matrix has {} rows",
            b.len(),
            a.rows()
        )));
    }
    let mut s = Simplex::new(a, b);
    let mut pivots = 0;
    let c = vec![];
    s.run(true, &c, &mut pivots)?;
    let xb = s.refined_xb();
    let residual = s.objective(&xb, true, &c);
    if residual <= tol {
        Ok(LpOutcome::Feasible {
            x: s.extract_x(&xb),
            residual,
        })
    } else {
        let y = s.refined_duals(true, &c);
        // Undo the row sign flips: original certificate y_i = sign_i·y'_i.
        let y: Vec<f64> = y.iter().zip(&s.row_sign).map(|(v, sg)| v * sg).collect();
        let objective = y.iter().zip(b).map(|(yi, bi)| yi * bi).sum();
        Ok(LpOutcome::Infeasible(FarkasCertificate { y, objective }))
    }
}

/// Maximizes `c·x` over `Ax = b, x ≥ 0`. Returns the optimum and a maximizer.
pub fn maximize(c: &[f64], a: &Matrix, b: &[f64]) -> Result<(f64, Vec<f64>), LpError> {
    if c.len() != a.cols() {
        return Err(LpError::Dimension(format!(
            "objective has {} entries, matrix has {} columns",
            c.len(),
            a.cols()
        )));
    }
    let mut s = Simplex::new(a, b);
    let mut pivots = 0;
    let empty = vec![];
    s.run(true, &empty, &mut pivots)?;
    if s.objective(&s.refined_xb(), true, &empty) > 1e-7 {
        return Err(LpError::Infeasible);
    }
    // Minimize −c in phase 2; artificial variables cannot re-enter.
    let neg: Vec<f64> = c.iter().map(|v| -v).collect();
    s.run(false, &neg, &mut pivots)?;
    let x = s.extract_x(&s.refined_xb());
    let value = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Ok((value, x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_system_feasible() {
        let a = Matrix::from_columns(
            3,
            &[
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
            ],
        );
        let b = vec![0.25, 0.5, 0.25];
        match feasibility(&a, &b, 1e-9).unwrap() {
            LpOutcome::Feasible { x, residual } => {
                assert!(residual <= 1e-12);
                for (xi, bi) in x.iter().zip(&b) {
                    assert!((xi - bi).abs() < 1e-12);
                }
            }
            other => panic!("expected feasible, got {other:?}"),
        }
    }

    #[test]
    fn conic_outsider_gets_certificate() {
        // rhs has a component outside the span of the two columns.
        let a = Matrix::from_columns(3, &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]);
        let b = vec![0.3, 0.3, 0.4];
        match feasibility(&a, &b, 1e-9).unwrap() {
            LpOutcome::Infeasible(cert) => {
                assert!(cert.objective > 1e-9);
                for j in 0..a.cols() {
                    let ya: f64 = cert.y.iter().zip(a.col(j)).map(|(y, v)| y * v).sum();
                    assert!(ya <= 1e-9, "certificate fails on column {j}: {ya}");
                }
                let yb: f64 = cert.y.iter().zip(&b).map(|(y, v)| y * v).sum();
                assert!((yb - cert.objective).abs() < 1e-12);
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn negative_rhs_rows_handled() {
        let a = Matrix::from_columns(2, &[vec![-1.0, 0.0], vec![0.0, 1.0]]);
        let b = vec![-0.5, 0.25];
        match feasibility(&a, &b, 1e-9).unwrap() {
            LpOutcome::Feasible { x, .. } => {
                assert!((x[0] - 0.5).abs() < 1e-12);
                assert!((x[1] - 0.25).abs() < 1e-12);
            }
            other => panic!("expected feasible, got {other:?}"),
        }
    }

    #[test]
    fn maximize_over_simplex_picks_best_column() {
        // max 2x1 + 5x2 + 3x3 s.t. x1+x2+x3 = 1, x ≥ 0.
        let a = Matrix::from_columns(1, &[vec![1.0], vec![1.0], vec![1.0]]);
        let (v, x) = maximize(&[2.0, 5.0, 3.0], &a, &[1.0]).unwrap();
        assert!((v - 5.0).abs() < 1e-12);
        assert!((x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn maximize_with_equality_mix() {
        // max x + y s.t. x + 2y = 2, x + y = 1.5 → x = 1, y = 0.5.
        let a = Matrix::from_columns(2, &[vec![1.0, 1.0], vec![2.0, 1.0]]);
        let (v, x) = maximize(&[1.0, 1.0], &a, &[2.0, 1.5]).unwrap();
        assert!((v - 1.5).abs() < 1e-9);
        assert!((x[0] - 1.0).abs() < 1e-9);
        assert!((x[1] - 0.5).abs() < 1e-9);
    }
}

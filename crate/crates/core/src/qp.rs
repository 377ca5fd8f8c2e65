//! Dense convex quadratic programs
//!
//! ```text
//!     minimize     1/2 x' Q x + c' x
//!     subject to   A x <= b
//! ```
//!
//! solved with a Mehrotra predictor-corrector primal-dual interior point
//! method on dense Cholesky factorizations, followed by an active-set polish
//! of the final iterate.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub const DEFAULT_RIDGE: f64 = 1e-10;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 100;

const STEP_TO_BOUNDARY: f64 = 0.99;

#[derive(Debug, Clone, PartialEq)]
pub struct QpProblem {
    pub q: DMatrix<f64>,
    pub c: DVector<f64>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    /// Added to the diagonal of `q` before solving.
    pub ridge: f64,
}

impl QpProblem {
    pub fn new(q: DMatrix<f64>, a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let n = q.nrows();
        if q.ncols() != n {
            return Err(Error::Dimension {
                what: "columns of Q",
                expected: n,
                got: q.ncols(),
            });
        }
        if a.ncols() != n {
            return Err(Error::Dimension {
                what: "columns of A",
                expected: n,
                got: a.ncols(),
            });
        }
        if b.len() != a.nrows() {
            return Err(Error::Dimension {
                what: "length of b",
                expected: a.nrows(),
                got: b.len(),
            });
        }
        let scale = 1.0 + q.amax();
        if (&q - q.transpose()).amax() > 1e-12 * scale {
            return Err(Error::config("Q is not symmetric"));
        }
        Ok(QpProblem {
            c: DVector::zeros(n),
            q,
            a,
            b,
            ridge: DEFAULT_RIDGE,
        })
    }

    pub fn with_linear(mut self, c: DVector<f64>) -> Self {
        assert_eq!(c.len(), self.q.nrows());
        self.c = c;
        self
    }

    pub fn with_ridge(mut self, ridge: f64) -> Self {
        self.ridge = ridge;
        self
    }

    pub fn n(&self) -> usize {
        self.q.nrows()
    }

    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    fn q_eff(&self) -> DMatrix<f64> {
        &self.q + DMatrix::identity(self.n(), self.n()) * self.ridge
    }

    /// `1/2 x' (Q + ridge I) x + c' x`.
    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(self.q_eff() * x)) + self.c.dot(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub x: DVector<f64>,
    pub duals: DVector<f64>,
    pub iterations: usize,
    pub primal_res: f64,
    pub dual_res: f64,
    pub gap: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktResiduals {
    /// `max(A x - b)`, clipped at zero.
    pub primal: f64,
    /// `|Q x + c + A' lambda|_inf`.
    pub dual: f64,
    /// `sum |lambda_i (b - A x)_i|`.
    pub gap: f64,
}

impl KktResiduals {
    pub fn within(&self, tol: f64, x_norm: f64) -> bool {
        self.primal <= tol && self.dual <= tol * (1.0 + x_norm) && self.gap <= tol
    }
}

pub fn kkt_residuals(problem: &QpProblem, x: &DVector<f64>, duals: &DVector<f64>) -> KktResiduals {
    let slack = &problem.b - &problem.a * x;
    let primal = slack.iter().fold(0.0f64, |m, &s| m.max(-s));
    let stat = problem.q_eff() * x + &problem.c + problem.a.transpose() * duals;
    let gap = duals
        .iter()
        .zip(slack.iter())
        .map(|(l, s)| (l * s).abs())
        .sum();
    KktResiduals {
        primal,
        dual: stat.amax(),
        gap,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QpSettings {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for QpSettings {
    fn default() -> Self {
        QpSettings {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

fn max_step(v: &DVector<f64>, dv: &DVector<f64>) -> f64 {
    v.iter()
        .zip(dv.iter())
        .filter(|(_, d)| **d < 0.0)
        .map(|(x, d)| -x / d)
        .fold(1.0f64 / STEP_TO_BOUNDARY, f64::min)
}

/// Cholesky of the Newton matrix. Late iterations make `A'DA` span many
/// decades, so a failed factorization is retried with a growing diagonal
/// shift; this only bends the step, not the problem.
fn newton_cholesky(k: DMatrix<f64>) -> Option<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    let n = k.nrows();
    let scale = k.diagonal().amax().max(1.0);
    let mut shift = 0.0;
    for _ in 0..8 {
        let shifted = &k + DMatrix::identity(n, n) * shift;
        if let Some(c) = shifted.cholesky() {
            return Some(c);
        }
        shift = if shift == 0.0 { 1e-14 * scale } else { shift * 100.0 };
    }
    None
}

fn starting_point(p: &QpProblem) -> DVector<f64> {
    let n = p.n();
    let zero = DVector::zeros(n);
    let strictly_feasible = |x: &DVector<f64>| (&p.a * x - &p.b).iter().all(|&r| r < 0.0);
    if p.m() == 0 || strictly_feasible(&zero) {
        return zero;
    }
    let dir = -(p.a.transpose() * DVector::from_element(p.m(), 1.0));
    let mut t = 1e-3;
    while t < 1e6 {
        let x = &dir * t;
        if strictly_feasible(&x) {
            return x;
        }
        t *= 2.0;
    }
    zero
}

/// Equality-constrained solve on the active set read off the interior
/// iterate. Returns `None` if the KKT matrix is singular or the result
/// violates feasibility or dual sign.
fn polish(p: &QpProblem, x: &DVector<f64>, lambda: &DVector<f64>, tol: f64) -> Option<(DVector<f64>, DVector<f64>)> {
    let n = p.n();
    let slack = &p.b - &p.a * x;
    let active: Vec<usize> = (0..p.m()).filter(|&i| lambda[i] > slack[i]).collect();
    let k = active.len();
    if k > n {
        return None;
    }
    let mut kkt = DMatrix::zeros(n + k, n + k);
    kkt.view_mut((0, 0), (n, n)).copy_from(&p.q_eff());
    for (r, &i) in active.iter().enumerate() {
        for j in 0..n {
            kkt[(n + r, j)] = p.a[(i, j)];
            kkt[(j, n + r)] = p.a[(i, j)];
        }
    }
    let mut rhs = DVector::zeros(n + k);
    rhs.rows_mut(0, n).copy_from(&(-&p.c));
    for (r, &i) in active.iter().enumerate() {
        rhs[n + r] = p.b[i];
    }
    let sol = kkt.lu().solve(&rhs)?;
    let xp = sol.rows(0, n).into_owned();
    let mut lp = DVector::zeros(p.m());
    for (r, &i) in active.iter().enumerate() {
        if sol[n + r] < 0.0 {
            return None;
        }
        lp[i] = sol[n + r];
    }
    let res = kkt_residuals(p, &xp, &lp);
    if res.primal > tol || !xp.iter().all(|v| v.is_finite()) {
        return None;
    }
    Some((xp, lp))
}

pub fn solve_qp(problem: &QpProblem, settings: QpSettings) -> Result<QpSolution> {
    let p = problem;
    let (n, m) = (p.n(), p.m());
    let tol = settings.tol;
    let q = p.q_eff();
    let at = p.a.transpose();

    if m == 0 {
        let x = q
            .clone()
            .cholesky()
            .ok_or(Error::NonPsd)?
            .solve(&(-&p.c));
        let res = kkt_residuals(p, &x, &DVector::zeros(0));
        return Ok(QpSolution {
            converged: true,
            x,
            duals: DVector::zeros(0),
            iterations: 0,
            primal_res: res.primal,
            dual_res: res.dual,
            gap: res.gap,
        });
    }

    let mut x = starting_point(p);
    let mut s = (&p.b - &p.a * &x).map(|v| v.max(1.0));
    let mut lambda = DVector::from_element(m, 1.0);

    let finish = |x: DVector<f64>, lambda: DVector<f64>, iterations: usize, converged: bool| {
        let res = kkt_residuals(p, &x, &lambda);
        QpSolution {
            x,
            duals: lambda,
            iterations,
            primal_res: res.primal,
            dual_res: res.dual,
            gap: res.gap,
            converged,
        }
    };

    for iter in 0..settings.max_iter {
        let res = kkt_residuals(p, &x, &lambda);
        let mu = s.dot(&lambda) / m as f64;
        if res.within(tol, x.amax()) || mu < 1e-3 * tol {
            if let Some((xp, lp)) = polish(p, &x, &lambda, tol) {
                let rp = kkt_residuals(p, &xp, &lp);
                if rp.within(tol, xp.amax()) {
                    return Ok(finish(xp, lp, iter, true));
                }
            }
            if res.within(tol, x.amax()) {
                return Ok(finish(x, lambda, iter, true));
            }
        }

        // Farkas certificate: A' y = 0, b' y < 0, y >= 0
        let lnorm = lambda.sum();
        if lnorm > 1e8 {
            let y = &lambda / lnorm;
            if (&at * &y).amax() < 1e-7 && p.b.dot(&y) < -1e-7 {
                return Err(Error::Infeasible);
            }
        }

        let r_d = &q * &x + &p.c + &at * &lambda;
        let r_p = &p.a * &x + &s - &p.b;
        let d = lambda.component_div(&s);
        let mut k = q.clone();
        for i in 0..m {
            let row = p.a.row(i);
            let w = d[i];
            for a in 0..n {
                let ra = row[a] * w;
                if ra == 0.0 {
                    continue;
                }
                for b in 0..n {
                    k[(a, b)] += ra * row[b];
                }
            }
        }
        let chol = newton_cholesky(k).ok_or(Error::NonPsd)?;

        // dx from (Q + A'DA) dx = -r_d - A'(D r_p - r_c / s)
        let direction = |r_c: &DVector<f64>| {
            let rhs = -&r_d - &at * (d.component_mul(&r_p) - r_c.component_div(&s));
            let dx = chol.solve(&rhs);
            let ds = -&r_p - &p.a * &dx;
            let dl = -(r_c + lambda.component_mul(&ds)).component_div(&s);
            (dx, ds, dl)
        };

        let r_c_aff = s.component_mul(&lambda);
        let (_, ds_a, dl_a) = direction(&r_c_aff);
        let alpha_aff = max_step(&s, &ds_a).min(max_step(&lambda, &dl_a)).min(1.0);
        let mu_aff = (&s + &ds_a * alpha_aff).dot(&(&lambda + &dl_a * alpha_aff)) / m as f64;
        let sigma = (mu_aff / mu).powi(3).clamp(0.0, 1.0);

        let r_c = &r_c_aff + ds_a.component_mul(&dl_a) - DVector::from_element(m, sigma * mu);
        let (dx, ds, dl) = direction(&r_c);
        let alpha = (STEP_TO_BOUNDARY * max_step(&s, &ds).min(max_step(&lambda, &dl))).min(1.0);

        x += &dx * alpha;
        s += &ds * alpha;
        lambda += &dl * alpha;
        // keep strictly interior
        s.apply(|v| *v = v.max(1e-300));
        lambda.apply(|v| *v = v.max(1e-300));
    }

    if let Some((xp, lp)) = polish(p, &x, &lambda, tol) {
        let rp = kkt_residuals(p, &xp, &lp);
        if rp.within(tol, xp.amax()) {
            return Ok(finish(xp, lp, settings.max_iter, true));
        }
    }
    Err(Error::MaxIterations(Box::new(finish(
        x,
        lambda,
        settings.max_iter,
        false,
    ))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_closed_form() {
        let gamma = 1.7;
        // min x^2  <=>  1/2 (2) x^2
        let p = QpProblem::new(
            DMatrix::from_element(1, 1, 2.0),
            DMatrix::from_element(1, 1, -1.0),
            DVector::from_element(1, -gamma),
        )
        .unwrap()
        .with_ridge(0.0);
        let sol = solve_qp(&p, QpSettings::default()).unwrap();
        assert!((sol.x[0] - gamma).abs() < 1e-10);
        assert!((sol.duals[0] - 2.0 * gamma).abs() < 1e-9);
    }

    #[test]
    fn single_halfspace_projection() {
        let a = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let gamma = 0.8;
        let p = QpProblem::new(
            DMatrix::identity(3, 3),
            DMatrix::from_row_slice(1, 3, a.as_slice()),
            DVector::from_element(1, -gamma),
        )
        .unwrap()
        .with_ridge(0.0);
        let sol = solve_qp(&p, QpSettings::default()).unwrap();
        let expected = &a * (-gamma / a.norm_squared());
        assert!((&sol.x - expected).amax() < 1e-10);
    }

    #[test]
    fn residuals_of_exact_solution() {
        let p = QpProblem::new(
            DMatrix::from_element(1, 1, 2.0),
            DMatrix::from_element(1, 1, -1.0),
            DVector::from_element(1, -3.0),
        )
        .unwrap()
        .with_ridge(0.0);
        let r = kkt_residuals(&p, &DVector::from_element(1, 3.0), &DVector::from_element(1, 6.0));
        assert!(r.primal <= 1e-12 && r.dual <= 1e-12 && r.gap <= 1e-12);

        // perturbation shows up in stationarity proportionally
        let r1 = kkt_residuals(&p, &DVector::from_element(1, 3.001), &DVector::from_element(1, 6.0));
        let r2 = kkt_residuals(&p, &DVector::from_element(1, 3.002), &DVector::from_element(1, 6.0));
        assert!((r1.dual - 2e-3).abs() < 1e-12);
        assert!((r2.dual / r1.dual - 2.0).abs() < 1e-9);

        // zero duals at an interior point
        let r = kkt_residuals(&p, &DVector::from_element(1, 5.0), &DVector::from_element(1, 0.0));
        assert_eq!(r.gap, 0.0);
        assert_eq!(r.primal, 0.0);
    }

    #[test]
    fn unconstrained_minimum_inside_region() {
        let p = QpProblem::new(
            DMatrix::identity(2, 2),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]),
            DVector::from_vec(vec![10.0, 10.0]),
        )
        .unwrap()
        .with_linear(DVector::from_vec(vec![-1.0, 2.0]));
        let sol = solve_qp(&p, QpSettings::default()).unwrap();
        assert!((sol.x[0] - 1.0).abs() < 1e-8 && (sol.x[1] + 2.0).abs() < 1e-8);
        assert!(sol.duals.amax() < 1e-8);
    }

    #[test]
    fn reports_infeasibility() {
        // x <= -1 and -x <= -1
        let p = QpProblem::new(
            DMatrix::identity(1, 1),
            DMatrix::from_column_slice(2, 1, &[1.0, -1.0]),
            DVector::from_vec(vec![-1.0, -1.0]),
        )
        .unwrap();
        assert!(matches!(
            solve_qp(&p, QpSettings::default()),
            Err(Error::Infeasible)
        ));
    }

    #[test]
    fn iteration_limit_returns_iterate() {
        let p = QpProblem::new(
            DMatrix::identity(2, 2),
            DMatrix::from_row_slice(1, 2, &[-1.0, -1.0]),
            DVector::from_element(1, -4.0),
        )
        .unwrap();
        match solve_qp(&p, QpSettings { tol: 1e-8, max_iter: 1 }) {
            Err(Error::MaxIterations(sol)) => assert!(!sol.converged),
            Ok(sol) => assert!(sol.converged),
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn rejects_asymmetric_q() {
        let q = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(QpProblem::new(q, DMatrix::zeros(0, 2), DVector::zeros(0)).is_err());
    }
}

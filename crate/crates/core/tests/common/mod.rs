//! Independent reference computations shared by the integration tests and the
//! acceptance runner.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use tizx::mvn::MvnRectangle;
use tizx::qp::QpProblem;

/// Random strictly convex QP in `n` variables with `m` constraints, feasible
/// by construction: `b = A x0 + s` with roughly a third of the slacks zero.
pub fn random_qp(rng: &mut ChaCha8Rng, n: usize, m: usize) -> QpProblem {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let q = &g * g.transpose() + DMatrix::identity(n, n) * 0.1;
    let q = (&q + q.transpose()) * 0.5;
    let a = DMatrix::from_fn(m, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let x0 = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let s = DVector::from_fn(m, |_, _| if rng.random_bool(0.35) { 0.0 } else { rng.random::<f64>() });
    let b = &a * &x0 + s;
    let c = DVector::from_fn(n, |_, _| 3.0 * rng.sample::<f64, _>(StandardNormal));
    QpProblem::new(q, a, b).expect("well-formed").with_linear(c)
}

/// Optimal objective by enumerating every active set of at most `n` rows and
/// keeping the KKT points that are primal and dual feasible.
pub fn active_set_oracle(p: &QpProblem) -> Option<(DVector<f64>, f64)> {
    let (n, m) = (p.n(), p.m());
    let q = &p.q + DMatrix::identity(n, n) * p.ridge;
    let mut best: Option<(DVector<f64>, f64)> = None;
    for mask in 0u32..(1 << m) {
        let rows: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
        let k = rows.len();
        if k > n {
            continue;
        }
        let mut kkt = DMatrix::zeros(n + k, n + k);
        let mut rhs = DVector::zeros(n + k);
        kkt.view_mut((0, 0), (n, n)).copy_from(&q);
        rhs.rows_mut(0, n).copy_from(&(-&p.c));
        for (j, &i) in rows.iter().enumerate() {
            for c in 0..n {
                kkt[(n + j, c)] = p.a[(i, c)];
                kkt[(c, n + j)] = p.a[(i, c)];
            }
            rhs[n + j] = p.b[i];
        }
        let Some(sol) = kkt.lu().solve(&rhs) else { continue };
        if sol.iter().any(|v| !v.is_finite()) {
            continue;
        }
        let x = sol.rows(0, n).into_owned();
        if sol.rows(n, k).iter().any(|&l| l < -1e-9) {
            continue;
        }
        let viol = (&p.a * &x - &p.b).max();
        if viol > 1e-9 * (1.0 + p.b.amax()) {
            continue;
        }
        let f = p.objective(&x);
        if best.as_ref().is_none_or(|(_, bf)| f < *bf) {
            best = Some((x, f));
        }
    }
    best
}

/// Random rectangle in dimension `d`: correlated Gaussian with a mix of
/// bounded, half-infinite and full-line coordinates.
pub fn random_rectangle(rng: &mut ChaCha8Rng, d: usize) -> MvnRectangle {
    let g = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let sigma = &g * g.transpose() + DMatrix::identity(d, d) * 0.2;
    let sigma = (&sigma + sigma.transpose()) * 0.5;
    let mu = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
    let mut lower = DVector::zeros(d);
    let mut upper = DVector::zeros(d);
    for i in 0..d {
        let sd = sigma[(i, i)].sqrt();
        let (lo, hi) = match rng.random_range(0..4) {
            0 => (f64::NEG_INFINITY, rng.random_range(-1.0..1.5) * sd),
            1 => (rng.random_range(-1.5..1.0) * sd, f64::INFINITY),
            2 => (f64::NEG_INFINITY, f64::INFINITY),
            _ => {
                let a = rng.random_range(-2.0..1.0) * sd;
                (a, a + rng.random_range(0.3..2.5) * sd)
            }
        };
        lower[i] = lo;
        upper[i] = hi;
    }
    MvnRectangle::new(mu, sigma, lower, upper).expect("well-formed")
}

/// Plain Monte Carlo estimate and its standard error.
pub fn sampling_oracle(rect: &MvnRectangle, draws: usize, seed: u64) -> (f64, f64) {
    let d = rect.dim();
    let l = rect.sigma.clone().cholesky().expect("positive definite").l();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z = vec![0.0; d];
    let mut hits = 0u64;
    for _ in 0..draws {
        for v in z.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let inside = (0..d).all(|i| {
            let x = rect.mu[i] + (0..=i).map(|j| l[(i, j)] * z[j]).sum::<f64>();
            x >= rect.lower[i] && x <= rect.upper[i]
        });
        hits += inside as u64;
    }
    let p = hits as f64 / draws as f64;
    (p, (p * (1.0 - p) / draws as f64).sqrt())
}

//! Rectangle probabilities `P(l <= X <= u)` for `X ~ N(mu, Sigma)`.
//!
//! Uses the separation-of-variables transform with greedy variable
//! reordering, integrated over the unit cube with a randomly shifted,
//! periodized extensible rank-1 lattice. The spread over independent shifts
//! gives the error estimate.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub const DEFAULT_EPS: f64 = 1e-5;
pub const DEFAULT_MAX_SAMPLES: usize = 1 << 20;
pub const DEFAULT_SHIFTS: usize = 12;
pub const MAX_DIM: usize = 25;

const INITIAL_POINTS: usize = 1 << 8;
const PSD_RIDGE: f64 = 1e-10;

/// Extensible rank-1 lattice generating vector (Kuo, base 2, up to 2^20
/// points). Taken in radical-inverse order, the first `2^m` points form a
/// full lattice for every `m`.
const LATTICE_Z: [u32; MAX_DIM - 1] = [
    1, 182667, 213731, 255351, 96013, 116671, 479315, 424089, 271103, 464421, 124483, 230887,
    392877, 162965, 109125, 168491, 216103, 5613, 207895, 506745, 189519, 114879, 133967, 374257,
];


/// Standard normal CDF; exact 0/1 at the infinities.
pub fn norm_cdf(x: f64) -> f64 {
    if x == f64::INFINITY {
        1.0
    } else if x == f64::NEG_INFINITY {
        0.0
    } else {
        0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
    }
}

pub fn norm_pdf(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
    }
}

/// Standard normal quantile (Wichura's AS 241, about 1e-16 relative).
pub fn norm_inv(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q
            * (((((((2509.080_928_730_122_7 * r + 33430.575_583_588_128) * r
                + 67265.770_927_008_700)
                * r
                + 45921.953_931_549_871)
                * r
                + 13731.693_765_509_461)
                * r
                + 1971.590_950_306_551_3)
                * r
                + 133.141_667_891_784_38)
                * r
                + 3.387_132_872_796_366_5)
            / (((((((5226.495_278_852_545_5 * r + 28729.085_735_721_943) * r
                + 39307.895_800_092_710)
                * r
                + 21213.794_301_586_596)
                * r
                + 5394.196_021_424_751_1)
                * r
                + 687.187_007_492_057_91)
                * r
                + 42.313_330_701_600_911)
                * r
                + 1.0);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = (-r.ln()).sqrt();
    let v = if r <= 5.0 {
        let r = r - 1.6;
        (((((((7.745_450_142_783_414e-4 * r + 0.022_723_844_989_269_184) * r
            + 0.241_780_725_177_450_6)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_546)
            * r
            + 1.423_437_110_749_683_5)
            / (((((((1.050_750_071_644_416_9e-9 * r + 5.475_938_084_995_345e-4) * r
                + 0.015_198_666_563_616_457)
                * r
                + 0.148_103_976_427_480_08)
                * r
                + 0.689_767_334_985_100_0)
                * r
                + 1.676_384_830_183_803_8)
                * r
                + 2.053_191_626_637_759)
                * r
                + 1.0)
    } else {
        let r = r - 5.0;
        (((((((2.010_334_399_292_288_1e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 1.242_660_947_388_078_4e-3)
            * r
            + 0.026_532_189_526_576_124)
            * r
            + 0.296_560_571_828_504_9)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103)
            / (((((((2.044_263_103_389_939_7e-15 * r + 1.421_511_758_316_446e-7) * r
                + 1.846_318_317_510_054_8e-5)
                * r
                + 7.868_691_311_456_133e-4)
                * r
                + 0.014_875_361_290_850_615)
                * r
                + 0.136_929_880_922_735_8)
                * r
                + 0.599_832_206_555_888)
                * r
                + 1.0)
    };
    if q < 0.0 {
        -v
    } else {
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MvnRectangle {
    pub mu: DVector<f64>,
    pub sigma: DMatrix<f64>,
    pub lower: DVector<f64>,
    pub upper: DVector<f64>,
}

impl MvnRectangle {
    pub fn new(
        mu: DVector<f64>,
        sigma: DMatrix<f64>,
        lower: DVector<f64>,
        upper: DVector<f64>,
    ) -> Result<Self> {
        let d = mu.len();
        for (what, got) in [
            ("rows of sigma", sigma.nrows()),
            ("columns of sigma", sigma.ncols()),
            ("lower bounds", lower.len()),
            ("upper bounds", upper.len()),
        ] {
            if got != d {
                return Err(Error::Dimension {
                    what,
                    expected: d,
                    got,
                });
            }
        }
        if d == 0 || d > MAX_DIM {
            return Err(Error::config(format!("dimension {d} outside 1..={MAX_DIM}")));
        }
        if lower.iter().zip(upper.iter()).any(|(l, u)| !(l < u)) {
            return Err(Error::config("every lower bound must be below its upper bound"));
        }
        Ok(MvnRectangle {
            mu,
            sigma,
            lower,
            upper,
        })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MvnSettings {
    /// Absolute error target on `err_est`.
    pub eps: f64,
    /// Optional relative target; when positive the run stops once `err_est`
    /// is below both `eps` and `rel_eps * p`, the latter floored at
    /// `1e-3 * eps` so near-empty rectangles do not exhaust the budget.
    pub rel_eps: f64,
    pub max_samples: usize,
    pub shifts: usize,
    pub seed: u64,
}

impl Default for MvnSettings {
    fn default() -> Self {
        MvnSettings {
            eps: DEFAULT_EPS,
            rel_eps: 0.0,
            max_samples: DEFAULT_MAX_SAMPLES,
            shifts: DEFAULT_SHIFTS,
            seed: 0,
        }
    }
}

impl MvnSettings {
    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn with_rel_eps(mut self, rel_eps: f64) -> Self {
        self.rel_eps = rel_eps;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MvnEstimate {
    pub p: f64,
    /// Three standard errors of the shift ensemble.
    pub err_est: f64,
    pub samples: usize,
}

fn try_reordered_cholesky(
    sigma: &DMatrix<f64>,
    lower: &[f64],
    upper: &[f64],
) -> Option<(DMatrix<f64>, Vec<usize>)> {
    let d = sigma.nrows();
    let mut c = sigma.clone();
    let mut a = lower.to_vec();
    let mut b = upper.to_vec();
    let mut perm: Vec<usize> = (0..d).collect();
    let mut l = DMatrix::<f64>::zeros(d, d);
    let mut y = vec![0.0; d];

    for i in 0..d {
        // pick the variable with the smallest conditional interval mass
        let mut best = (f64::INFINITY, i);
        for j in i..d {
            let s: f64 = (0..i).map(|k| l[(j, k)] * y[k]).sum();
            let var = c[(j, j)] - (0..i).map(|k| l[(j, k)].powi(2)).sum::<f64>();
            if var <= 0.0 {
                return None;
            }
            let sd = var.sqrt();
            let mass = norm_cdf((b[j] - s) / sd) - norm_cdf((a[j] - s) / sd);
            if mass < best.0 {
                best = (mass, j);
            }
        }
        let j = best.1;
        if j != i {
            c.swap_rows(i, j);
            c.swap_columns(i, j);
            l.swap_rows(i, j);
            a.swap(i, j);
            b.swap(i, j);
            perm.swap(i, j);
        }
        let var = c[(i, i)] - (0..i).map(|k| l[(i, k)].powi(2)).sum::<f64>();
        if var <= 0.0 {
            return None;
        }
        let lii = var.sqrt();
        l[(i, i)] = lii;
        for r in i + 1..d {
            let dot: f64 = (0..i).map(|k| l[(r, k)] * l[(i, k)]).sum();
            l[(r, i)] = (c[(r, i)] - dot) / lii;
        }
        let s: f64 = (0..i).map(|k| l[(i, k)] * y[k]).sum();
        let (lo, hi) = ((a[i] - s) / lii, (b[i] - s) / lii);
        let mass = norm_cdf(hi) - norm_cdf(lo);
        y[i] = if mass > 1e-300 {
            (norm_pdf(lo) - norm_pdf(hi)) / mass
        } else if lo.is_finite() {
            lo
        } else {
            hi
        };
    }
    Some((l, perm))
}

/// Cholesky factor of the permuted covariance, `P Sigma P' = L L'`, where
/// the permutation greedily puts the most constrained variable first.
/// `lower` and `upper` are bounds on the centred variable `X - mu`.
pub fn cholesky_reordered(
    sigma: &DMatrix<f64>,
    lower: &[f64],
    upper: &[f64],
) -> Result<(DMatrix<f64>, Vec<usize>)> {
    if let Some(r) = try_reordered_cholesky(sigma, lower, upper) {
        return Ok(r);
    }
    let d = sigma.nrows();
    let ridged = sigma + DMatrix::identity(d, d) * PSD_RIDGE;
    try_reordered_cholesky(&ridged, lower, upper).ok_or(Error::NonPsd)
}

const LATTICE_MAX_POINTS: usize = 1 << 20;

fn radical_inverse(k: usize) -> f64 {
    (k as u32).reverse_bits() as f64 / 4_294_967_296.0
}

struct Integrand {
    /// Row-major lower-triangular factor.
    l: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    first: (f64, f64),
}

impl Integrand {
    fn eval(&self, w: &[f64], y: &mut [f64]) -> f64 {
        let d = self.a.len();
        let (mut lo, mut hi) = self.first;
        let mut f = hi - lo;
        for i in 1..d {
            if f == 0.0 {
                return 0.0;
            }
            y[i - 1] = norm_inv(lo + w[i - 1] * (hi - lo)).clamp(-38.0, 38.0);
            let row = &self.l[i * d..i * d + i + 1];
            let s: f64 = row[..i].iter().zip(&y[..i]).map(|(a, b)| a * b).sum();
            let lii = row[i];
            lo = norm_cdf((self.a[i] - s) / lii);
            hi = norm_cdf((self.b[i] - s) / lii);
            f *= hi - lo;
        }
        f
    }
}

pub fn mvn_rect_prob(rect: &MvnRectangle, settings: &MvnSettings) -> Result<MvnEstimate> {
    let d = rect.dim();
    let lower: Vec<f64> = (0..d).map(|i| rect.lower[i] - rect.mu[i]).collect();
    let upper: Vec<f64> = (0..d).map(|i| rect.upper[i] - rect.mu[i]).collect();
    let (l, perm) = cholesky_reordered(&rect.sigma, &lower, &upper)?;
    let a: Vec<f64> = perm.iter().map(|&j| lower[j]).collect();
    let b: Vec<f64> = perm.iter().map(|&j| upper[j]).collect();
    let first = (norm_cdf(a[0] / l[(0, 0)]), norm_cdf(b[0] / l[(0, 0)]));

    if d == 1 {
        return Ok(MvnEstimate {
            p: first.1 - first.0,
            err_est: 0.0,
            samples: 0,
        });
    }

    let l_rows: Vec<f64> = (0..d).flat_map(|i| (0..d).map(move |k| (i, k))).map(|ik| l[ik]).collect();
    let integrand = Integrand { l: l_rows, a, b, first };
    let generators: Vec<f64> = LATTICE_Z[..d - 1].iter().map(|&z| z as f64).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let shifts: Vec<Vec<f64>> = (0..settings.shifts.max(2))
        .map(|_| (0..d - 1).map(|_| rng.random::<f64>()).collect())
        .collect();

    let mut sums = vec![0.0f64; shifts.len()];
    let mut done = 0usize;
    let mut n = INITIAL_POINTS;
    loop {
        let range = done..n;
        sums.par_iter_mut().zip(shifts.par_iter()).for_each(|(sum, shift)| {
            let mut w = vec![0.0; d - 1];
            let mut y = vec![0.0; d];
            for k in range.clone() {
                for j in 0..d - 1 {
                    let x = (radical_inverse(k) * generators[j] + shift[j]).fract();
                    // periodizing (baker's) transform
                    w[j] = 1.0 - (2.0 * x - 1.0).abs();
                }
                *sum += integrand.eval(&w, &mut y);
            }
        });
        done = n;

        let means: Vec<f64> = sums.iter().map(|s| s / n as f64).collect();
        let k = means.len() as f64;
        let p = means.iter().sum::<f64>() / k;
        let var = means.iter().map(|m| (m - p).powi(2)).sum::<f64>() / (k - 1.0);
        let err_est = 3.0 * (var / k).sqrt();
        let samples = n * means.len();
        let tol = if settings.rel_eps > 0.0 {
            settings.eps.min((settings.rel_eps * p).max(1e-3 * settings.eps))
        } else {
            settings.eps
        };
        if err_est <= tol || 2 * samples > settings.max_samples || 2 * n > LATTICE_MAX_POINTS {
            return Ok(MvnEstimate {
                p: p.clamp(0.0, 1.0),
                err_est,
                samples,
            });
        }
        n *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(mu: &[f64], sigma: DMatrix<f64>, lo: &[f64], hi: &[f64]) -> MvnRectangle {
        MvnRectangle::new(
            DVector::from_column_slice(mu),
            sigma,
            DVector::from_column_slice(lo),
            DVector::from_column_slice(hi),
        )
        .unwrap()
    }

    const INF: f64 = f64::INFINITY;

    #[test]
    fn normal_helpers_match_reference_values() {
        // 40-digit reference values
        for (x, want) in [
            (-30.0, 4.906713927148187e-198),
            (-20.0, 2.7536241186062337e-89),
            (-10.0, 7.619853024160525e-24),
            (-7.0, 1.279812543885835e-12),
            (-5.0, 2.866515718791939e-07),
            (-3.0, 0.0013498980316300946),
            (-1.5, 0.06680720126885807),
            (-0.5, 0.3085375387259869),
            (0.25, 0.5987063256829237),
            (1.0, 0.8413447460685429),
            (2.5, 0.9937903346742238),
            (4.0, 0.9999683287581669),
            (6.0, 0.9999999990134123),
        ] {
            assert!((norm_cdf(x) - want).abs() <= 1e-12 * want, "{x}");
        }
        for (p, want) in [
            (1e-20, -9.262340089798407),
            (1e-08, -5.612001244174789),
            (0.001, -3.0902323061678136),
            (0.02425, -1.972961051311885),
            (0.1, -1.2815515655446004),
            (0.3, -0.5244005127080408),
            (0.5, 0.0),
            (0.7, 0.5244005127080407),
            (0.97575, 1.972961051311885),
            (0.999, 3.090232306167813),
            (0.99999999, 5.612001243305505),
        ] {
            assert!((norm_inv(p) - want).abs() <= 1e-14 * f64::abs(want).max(1.0), "{p}");
        }
    }

    #[test]
    fn normal_helpers() {
        assert_eq!(norm_cdf(0.0), 0.5);
        assert!((norm_cdf(-1.959963984540054) - 0.025).abs() < 1e-11);
        for p in [1e-12, 1e-6, 0.025, 0.3, 0.5, 0.8, 0.999999] {
            assert!((norm_cdf(norm_inv(p)) - p).abs() < 1e-9 * p.max(1e-3), "{p}");
        }
    }

    #[test]
    fn half_line() {
        let r = rect(&[0.0], DMatrix::identity(1, 1), &[0.0], &[INF]);
        let e = mvn_rect_prob(&r, &MvnSettings::default()).unwrap();
        assert!((e.p - 0.5).abs() < 1e-12);
    }

    #[test]
    fn independent_quadrant() {
        let r = rect(&[0.0, 0.0], DMatrix::identity(2, 2), &[0.0, 0.0], &[INF, INF]);
        let e = mvn_rect_prob(&r, &MvnSettings::default()).unwrap();
        assert!((e.p - 0.25).abs() < 1e-6, "{e:?}");
    }

    #[test]
    fn bivariate_orthant_closed_form() {
        // P(X>0, Y>0) = 1/4 + asin(rho) / (2 pi)
        let rho: f64 = 0.6;
        let s = DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0]);
        let r = rect(&[0.0, 0.0], s, &[0.0, 0.0], &[INF, INF]);
        let e = mvn_rect_prob(&r, &MvnSettings::default().with_eps(1e-7)).unwrap();
        let exact = 0.25 + rho.asin() / (2.0 * std::f64::consts::PI);
        assert!((e.p - exact).abs() < 1e-6, "{} vs {exact}", e.p);
    }

    #[test]
    fn whole_space_is_one() {
        let s = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.0, -0.2, 0.1, -0.2, 0.5]);
        let r = rect(&[1.0, -2.0, 0.5], s, &[-INF; 3], &[INF; 3]);
        let e = mvn_rect_prob(&r, &MvnSettings::default()).unwrap();
        assert!((e.p - 1.0).abs() < 1e-10);
    }

    #[test]
    fn identity_factor() {
        let (l, perm) = cholesky_reordered(&DMatrix::identity(3, 3), &[0.0; 3], &[INF; 3]).unwrap();
        assert_eq!(l, DMatrix::identity(3, 3));
        assert_eq!(perm, vec![0, 1, 2]);
    }

    #[test]
    fn non_psd_rejected() {
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            cholesky_reordered(&s, &[0.0, 0.0], &[INF, INF]),
            Err(Error::NonPsd)
        ));
    }

    #[test]
    fn singular_psd_accepted_with_ridge() {
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let r = rect(&[0.0, 0.0], s, &[0.0, 0.0], &[INF, INF]);
        let e = mvn_rect_prob(&r, &MvnSettings::default()).unwrap();
        assert!((e.p - 0.5).abs() < 1e-3, "{e:?}");
    }

    #[test]
    fn invalid_rectangles() {
        assert!(MvnRectangle::new(
            DVector::zeros(2),
            DMatrix::identity(2, 2),
            DVector::from_vec(vec![0.0, 1.0]),
            DVector::from_vec(vec![1.0, 1.0]),
        )
        .is_err());
        assert!(MvnRectangle::new(
            DVector::zeros(2),
            DMatrix::identity(3, 3),
            DVector::zeros(2),
            DVector::from_element(2, 1.0),
        )
        .is_err());
    }
}

//! Closed-form predictors for minima of Gaussian samples and for the
//! offspring of a two-parent crossover.
//!
//! All logarithms are natural. The "exact" minimum form is the Laplace
//! approximation of the minimum's density around its mode; the
//! "approximate" form keeps only the leading `sqrt(2 ln M)` behaviour.

use serde::{Deserialize, Serialize};

use crate::combin::binomial_f64;
use crate::error::{Error, Result};
use crate::par;
use crate::rng;
use crate::stats::RunningStats;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub mean: f64,
    pub variance: f64,
}

impl GaussianSpec {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !(variance >= 0.0) || !mean.is_finite() || !variance.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "gaussian needs finite mean and variance >= 0, got ({mean}, {variance})"
            )));
        }
        Ok(GaussianSpec { mean, variance })
    }

    pub fn standard() -> Self {
        GaussianSpec { mean: 0.0, variance: 1.0 }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        normal_cdf((x - self.mean) / self.std_dev())
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let s = self.std_dev();
        let z = (x - self.mean) / s;
        (-0.5 * z * z).exp() / (s * (2.0 * std::f64::consts::PI).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MinForm {
    Exact,
    Approximate,
}

/// Standard normal CDF via `erfc`, accurate to a few ulp over the whole line.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// CDF of the minimum of `m` i.i.d. draws: `1 - (1 - φ(F))^m`.
pub fn min_cdf(f: f64, base: GaussianSpec, m: u64) -> f64 {
    let upper = 1.0 - base.cdf(f);
    -((m as f64) * upper.ln()).exp_m1()
}

/// Density of the minimum of `m` i.i.d. draws: `m (1 - φ(F))^{m-1} p(F)`.
pub fn min_density(f: f64, base: GaussianSpec, m: u64) -> f64 {
    let upper = 1.0 - base.cdf(f);
    m as f64 * ((m as f64 - 1.0) * upper.ln()).exp() * base.pdf(f)
}

/// `ln(M² / (2π ln(M² σ²)))`, the squared standardized distance of the
/// minimum's mode below the mean. Errors if the inner log is not positive.
fn mode_log_term(m: u64, variance: f64) -> Result<f64> {
    let m = m as f64;
    let inner = (m * m * variance).ln();
    if !(inner > 0.0) {
        return Err(Error::AsymptoticsInvalid(format!(
            "ln(M² σ²) = {inner} must be positive (M = {m}, σ² = {variance})"
        )));
    }
    Ok((m * m / (2.0 * std::f64::consts::PI * inner)).ln())
}

/// Gaussian approximation of the minimum of `m` samples from `base`.
pub fn min_distribution(base: GaussianSpec, m: u64, form: MinForm) -> Result<GaussianSpec> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("need M >= 2 samples, got {m}")));
    }
    let sd = base.std_dev();
    match form {
        MinForm::Exact => {
            let l = mode_log_term(m, base.variance)?;
            if !(l > 1.0) {
                return Err(Error::AsymptoticsInvalid(format!(
                    "ln(M² / (2π ln(M² σ²))) = {l} must exceed 1 for M = {m}"
                )));
            }
            Ok(GaussianSpec { mean: base.mean - sd * l.sqrt(), variance: base.variance / (l - 1.0) })
        }
        MinForm::Approximate => {
            let two_log_m = 2.0 * (m as f64).ln();
            Ok(GaussianSpec {
                mean: base.mean - sd * two_log_m.sqrt(),
                variance: base.variance / two_log_m,
            })
        }
    }
}

/// Number of random draws from `base` needed to reach `target` with
/// probability about one half. Real valued; callers round.
pub fn required_iterations(target: f64, base: GaussianSpec) -> Result<f64> {
    if !(target < base.mean) {
        return Err(Error::Domain(format!(
            "target {target} must lie below the mean {}",
            base.mean
        )));
    }
    let t2 = (target - base.mean).powi(2) / base.variance;
    Ok((2.0 * std::f64::consts::PI * t2).sqrt() * (0.5 * t2).exp())
}

/// Expected global minimum of an `N`-dimensional unit-variance cost
/// function, treating all `2^N` values as independent: `-sqrt(2 N ln 2)`.
pub fn global_min_estimate(n_dims: usize) -> f64 {
    -(2.0 * n_dims as f64 * std::f64::consts::LN_2).sqrt()
}

/// Schema strength `η = Σ_{β=1}^{⌊N/2⌋} C(⌊N/2⌋, β) σ_β²`.
/// `order_variance[β - 1]` holds `σ_β²`.
pub fn eta(n_dims: usize, order_variance: &[f64]) -> f64 {
    let half = n_dims / 2;
    order_variance
        .iter()
        .take(half)
        .enumerate()
        .map(|(b, v)| binomial_f64(half, b + 1) * v)
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryParams {
    pub n_dims: usize,
    pub eta: f64,
    /// `g = (2η + sqrt(1 - η))²`.
    pub gain: f64,
    /// `λ = 2^{1/g}`.
    pub lambda: f64,
    /// Differing parent positions assumed by the predictors, `⌊N/2⌋`.
    pub d: usize,
}

impl TheoryParams {
    pub fn from_eta(n_dims: usize, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::Domain(format!("η = {eta} outside [0, 1]")));
        }
        let gain = (2.0 * eta + (1.0 - eta).sqrt()).powi(2);
        Ok(TheoryParams { n_dims, eta, gain, lambda: 2f64.powf(1.0 / gain), d: n_dims / 2 })
    }

    /// Predicted total selection-and-crossover budget, `3 λ^N`.
    pub fn predicted_cost(&self) -> f64 {
        3.0 * self.lambda.powi(self.n_dims as i32)
    }

    /// `2η + sqrt(1 - η)`: how many standard units the offspring minimum
    /// reaches per unit of the plain random-search shift.
    pub fn shift_factor(&self) -> f64 {
        2.0 * self.eta + (1.0 - self.eta).sqrt()
    }
}

pub fn theory_params(n_dims: usize, order_variance: &[f64]) -> Result<TheoryParams> {
    TheoryParams::from_eta(n_dims, eta(n_dims, order_variance))
}

/// `ln(M² / (2π ln M²))`, the unit-variance mode term used by the
/// offspring predictors.
fn unit_log_term(m: u64) -> Result<f64> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("need M >= 2 samples, got {m}")));
    }
    mode_log_term(m, 1.0)
}

/// Cost distribution of offspring from two parents, each the best of
/// `m_parent` random draws: `N[-2η sqrt(L), 1 - η]`.
pub fn offspring_distribution(params: &TheoryParams, m_parent: u64) -> Result<GaussianSpec> {
    let l = unit_log_term(m_parent)?;
    if !(l > 0.0) {
        return Err(Error::AsymptoticsInvalid(format!(
            "ln(M² / (2π ln M²)) = {l} must be positive for M = {m_parent}"
        )));
    }
    Ok(GaussianSpec { mean: -2.0 * params.eta * l.sqrt(), variance: 1.0 - params.eta })
}

/// Minimum of `m` offspring draws when parents were also selected from
/// `m` draws each.
pub fn offspring_min_distribution(params: &TheoryParams, m: u64) -> Result<GaussianSpec> {
    let l = unit_log_term(m)?;
    if !(l > 1.0) {
        return Err(Error::AsymptoticsInvalid(format!(
            "ln(M² / (2π ln M²)) = {l} must exceed 1 for M = {m}"
        )));
    }
    Ok(GaussianSpec {
        mean: -params.shift_factor() * l.sqrt(),
        variance: (1.0 - params.eta) / (l - 1.0),
    })
}

/// Expected offspring variance for parents differing in `d` positions:
/// `1 - Σ_{β=1}^{N-d} C(N-d, β) σ_β²`.
pub fn predicted_offspring_variance(n_dims: usize, d: usize, order_variance: &[f64]) -> Result<f64> {
    if d > n_dims {
        return Err(Error::InvalidParameter(format!("d = {d} exceeds N = {n_dims}")));
    }
    let fixed = n_dims - d;
    let shared: f64 = order_variance
        .iter()
        .take(fixed)
        .enumerate()
        .map(|(b, v)| binomial_f64(fixed, b + 1) * v)
        .sum();
    Ok(1.0 - shared)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixturePrediction {
    /// `R`, the mean cost under the product distribution.
    pub offspring_mean: f64,
    /// `1 - R²`.
    pub offspring_variance: f64,
    /// `R - sqrt((1 - R²) 2 ln M)`.
    pub min_estimate: f64,
}

pub fn mixture_prediction(big_r: f64, m: u64) -> Result<MixturePrediction> {
    if !(big_r.abs() <= 1.0) {
        return Err(Error::Domain(format!("|R| = {} exceeds 1", big_r.abs())));
    }
    if m == 0 {
        return Err(Error::InvalidParameter("need M >= 1".into()));
    }
    let variance = 1.0 - big_r * big_r;
    let min_estimate = big_r - (variance * 2.0 * (m as f64).ln()).sqrt();
    Ok(MixturePrediction { offspring_mean: big_r, offspring_variance: variance, min_estimate })
}

/// Best value any mixture can reach with `m` draws, `-sqrt(1 + 2 ln M)`,
/// attained at `R = -1 / sqrt(1 + 2 ln M)`.
pub fn mixture_bound(m: u64) -> (f64, f64) {
    let s = (1.0 + 2.0 * (m as f64).ln()).sqrt();
    (-s, -1.0 / s)
}

/// Monte Carlo minima: `reps` independent minima of `m` draws from
/// `base`. Repetition `r` uses stream `split(seed, r)`.
pub fn simulate_minima(base: GaussianSpec, m: u64, reps: usize, seed: u64) -> Vec<f64> {
    use rand::Rng;
    use rand_distr::StandardNormal;
    let sd = base.std_dev();
    par::map_indexed(reps, |r| {
        let mut s = rng::child_stream(seed, r as u64);
        let mut lo = f64::INFINITY;
        for _ in 0..m {
            let z: f64 = s.sample(StandardNormal);
            lo = lo.min(z);
        }
        base.mean + sd * lo
    })
}

pub fn summarize(values: &[f64]) -> RunningStats {
    values.iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycost::uniform_order_variance;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn min_distribution_values() {
        let g = min_distribution(GaussianSpec::standard(), 1_000_000, MinForm::Approximate).unwrap();
        assert!(close(g.mean, -5.2565, 1e-4), "{g:?}");
        assert!(close(g.variance, 0.03619, 1e-5), "{g:?}");
        let g = min_distribution(GaussianSpec::standard(), 1_000_000, MinForm::Exact).unwrap();
        assert!(close(g.mean, -4.741, 1e-3), "{g:?}");
        assert!(close(g.variance, 0.0466, 1e-4), "{g:?}");
    }

    #[test]
    fn min_distribution_location_scale() {
        for form in [MinForm::Exact, MinForm::Approximate] {
            let unit = min_distribution(GaussianSpec::standard(), 5000, form).unwrap();
            let base = GaussianSpec::new(2.5, 1.0).unwrap();
            let g = min_distribution(base, 5000, form).unwrap();
            assert!(close(g.mean, 2.5 + unit.mean, 1e-12));
            // scale only enters the exact form's inner log, through ln(M² σ²)
            let scaled = GaussianSpec::new(0.0, 4.0).unwrap();
            let g = min_distribution(scaled, 5000, MinForm::Approximate).unwrap();
            let a = min_distribution(GaussianSpec::standard(), 5000, MinForm::Approximate).unwrap();
            assert!(close(g.mean, 2.0 * a.mean, 1e-12));
        }
    }

    #[test]
    fn small_m_is_rejected() {
        let std = GaussianSpec::standard();
        assert!(matches!(min_distribution(std, 1, MinForm::Exact), Err(Error::InvalidParameter(_))));
        assert!(matches!(min_distribution(std, 2, MinForm::Exact), Err(Error::AsymptoticsInvalid(_))));
        let tiny = GaussianSpec::new(0.0, 1e-9).unwrap();
        assert!(matches!(min_distribution(tiny, 100, MinForm::Exact), Err(Error::AsymptoticsInvalid(_))));
        let p = TheoryParams::from_eta(30, 0.25).unwrap();
        assert!(offspring_distribution(&p, 2).is_err());
        assert!(offspring_min_distribution(&p, 3).is_err());
    }

    #[test]
    fn required_iterations_values() {
        let m = required_iterations(-3.0, GaussianSpec::standard()).unwrap();
        assert!(close(m, (18.0 * std::f64::consts::PI).sqrt() * 4.5f64.exp(), 1e-9));
        assert!(close(m, 677.0, 0.5));
        assert!(matches!(required_iterations(0.0, GaussianSpec::standard()), Err(Error::Domain(_))));
        // at t = -sqrt(2 ln M) the prefactor leaves exactly sqrt(4 pi ln M)
        // on top of M; with it divided out the round trip is within 3x
        for m in [1e4, 1e5, 1e6, 1e7, 1e9] {
            let t = -(2.0 * f64::ln(m)).sqrt();
            let back = required_iterations(t, GaussianSpec::standard()).unwrap();
            let log_factor = (4.0 * std::f64::consts::PI * m.ln()).sqrt();
            assert!(close(back, m * log_factor, 1e-6 * back), "{m} -> {back}");
        }
        let m = required_iterations(-5.2565, GaussianSpec::standard()).unwrap();
        let scaled = m / (4.0 * std::f64::consts::PI * 1e6f64.ln()).sqrt();
        assert!(scaled > 1e6 / 3.0 && scaled < 3e6, "{m}");
    }

    #[test]
    fn global_min_values() {
        assert!(close(global_min_estimate(30), -6.4489, 1e-4));
        assert!(close(global_min_estimate(20), -5.2655, 1e-4));
        assert!(close(global_min_estimate(1), -1.1774, 1e-4));
    }

    #[test]
    fn eta_values() {
        assert!(close(eta(30, &uniform_order_variance(30, 2)), 120.0 / 465.0, 1e-15));
        // K = N uniform: geometric sums over the half and the full range
        for n in [2usize, 6, 10, 16] {
            let v = uniform_order_variance(n, n);
            let expected = (2f64.powi(n as i32 / 2) - 1.0) / (2f64.powi(n as i32) - 1.0);
            assert!(close(eta(n, &v), expected, 1e-14), "N={n}");
        }
        // odd N uses the floor of N / 2
        let v = uniform_order_variance(7, 2);
        assert!(close(eta(7, &v), (3.0 + 3.0) / 28.0, 1e-15));
    }

    #[test]
    fn eta_tends_to_power_of_two() {
        for k in 2..=4 {
            let mut v = vec![0.0; 100];
            let total: f64 = (1..=k).map(|a| binomial_f64(100, a)).sum();
            v[..k].iter_mut().for_each(|s| *s = 1.0 / total);
            let e = eta(100, &v);
            assert!((e - 0.5f64.powi(k as i32)).abs() < 0.02, "K={k}: {e}");
        }
    }

    #[test]
    fn params_values() {
        let p = TheoryParams::from_eta(30, 0.0).unwrap();
        assert_eq!((p.gain, p.lambda, p.d), (1.0, 2.0, 15));
        let p = TheoryParams::from_eta(30, 0.25).unwrap();
        assert!(close(p.gain, 1.8660, 1e-4), "{p:?}");
        assert!(close(p.lambda, 1.4498, 1e-4), "{p:?}");
        assert!(close(p.predicted_cost(), 3.0 * 1.4498f64.powi(30), 1e-3 * p.predicted_cost()));
        assert!(TheoryParams::from_eta(30, 1.5).is_err());
        let p = theory_params(31, &uniform_order_variance(31, 2)).unwrap();
        assert_eq!(p.d, 15);
    }

    #[test]
    fn offspring_values() {
        let p = TheoryParams::from_eta(30, 0.258).unwrap();
        let g = offspring_distribution(&p, 1000).unwrap();
        assert!(close(g.mean, -1.578, 2e-3), "{g:?}");
        assert!(close(g.variance, 0.742, 1e-12));
        let g = offspring_min_distribution(&p, 1000).unwrap();
        assert!(close(g.mean, -4.213, 5e-3), "{g:?}");
        let zero = TheoryParams::from_eta(30, 0.0).unwrap();
        let g = offspring_distribution(&zero, 1000).unwrap();
        assert_eq!((g.mean, g.variance), (0.0, 1.0));
    }

    #[test]
    fn offspring_mean_vanishes_with_order() {
        let mut last = f64::INFINITY;
        for k in 1..=12 {
            let p = theory_params(24, &uniform_order_variance(24, k)).unwrap();
            let m = offspring_distribution(&p, 1000).unwrap().mean.abs();
            assert!(m < last, "K={k}");
            last = m;
        }
        assert!(last < 0.05);
    }

    #[test]
    fn offspring_min_reduces_to_random_search_at_zero_eta() {
        let zero = TheoryParams::from_eta(20, 0.0).unwrap();
        for m in [100u64, 1000, 1_000_000] {
            let a = offspring_min_distribution(&zero, m).unwrap();
            let b = min_distribution(GaussianSpec::standard(), m, MinForm::Exact).unwrap();
            assert_eq!(a, b);
        }
    }

    /// Solves `offspring_min(M).mean = -sqrt(2 N ln 2)` for the offspring
    /// draw count by bisection on ln M.
    fn solve_budget(p: &TheoryParams) -> f64 {
        let target = global_min_estimate(p.n_dims);
        let (mut lo, mut hi) = (2.0f64, 200.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let l = (mid.exp().powi(2) / (2.0 * std::f64::consts::PI * 2.0 * mid)).ln();
            if -p.shift_factor() * l.sqrt() > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo.exp()
    }

    #[test]
    fn predicted_cost_matches_numerical_inversion() {
        for k in 2..=4 {
            for n in (20..=40).step_by(2) {
                let p = theory_params(n, &uniform_order_variance(n, k)).unwrap();
                let m = solve_budget(&p);
                // 2M parent draws plus M offspring draws; the inversion keeps
                // the sqrt(4π ln M) log factor that 3λ^N drops.
                let total = 3.0 * m / (4.0 * std::f64::consts::PI * m.ln()).sqrt();
                let ratio = total / p.predicted_cost();
                assert!(ratio > 1.0 / 3.0 && ratio < 3.0, "K={k} N={n}: {ratio}");
            }
        }
    }

    #[test]
    fn offspring_variance_identities() {
        for (n, k) in [(30, 2), (20, 4), (16, 8)] {
            let v = uniform_order_variance(n, k);
            assert!(close(predicted_offspring_variance(n, 0, &v).unwrap(), 0.0, 1e-12));
            assert_eq!(predicted_offspring_variance(n, n, &v).unwrap(), 1.0);
            let p = theory_params(n, &v).unwrap();
            let mid = predicted_offspring_variance(n, n / 2, &v).unwrap();
            assert!(close(mid, 1.0 - p.eta, 1e-14));
        }
        assert!(predicted_offspring_variance(5, 6, &[0.2; 5]).is_err());
    }

    #[test]
    fn mixture_values() {
        let m = 1_000_000;
        let r0 = mixture_prediction(0.0, m).unwrap();
        assert!(close(r0.min_estimate, -(2.0 * (m as f64).ln()).sqrt(), 1e-12));
        let (bound, r_star) = mixture_bound(m);
        let at = mixture_prediction(r_star, m).unwrap();
        assert!(close(at.min_estimate, bound, 1e-12));
        assert!(close(bound, -5.351, 1e-3));
        // grid search over R in [-1, 0]
        let best = (0..=100_000)
            .map(|i| mixture_prediction(-(i as f64) / 100_000.0, m).unwrap().min_estimate)
            .fold(f64::INFINITY, f64::min);
        assert!(close(best, bound, 1e-6));
        assert!(matches!(mixture_prediction(1.01, m), Err(Error::Domain(_))));
    }

    #[test]
    fn mixture_bound_on_grid() {
        for m in [10u64, 1000, 1_000_000] {
            let (bound, _) = mixture_bound(m);
            for i in 0..=1000 {
                let r = -1.0 + 2.0 * i as f64 / 1000.0;
                let p = mixture_prediction(r, m).unwrap();
                assert!(p.min_estimate >= bound - 1e-12);
                assert!(close(p.offspring_variance, 1.0 - r * r, 0.0));
            }
        }
    }

    #[test]
    fn min_distribution_monotone_in_m() {
        let mut last = f64::INFINITY;
        for e in 1..60 {
            let m = (10f64.powf(1.0 + e as f64 / 6.0)) as u64;
            let g = min_distribution(GaussianSpec::standard(), m, MinForm::Exact).unwrap();
            assert!(g.mean < last);
            last = g.mean;
        }
        let mut last = 0.0;
        for i in 1..100 {
            let it = required_iterations(-0.1 * i as f64, GaussianSpec::standard()).unwrap();
            if i > 10 {
                assert!(it > last);
            }
            last = it;
        }
    }

    #[test]
    fn lambda_bounds() {
        let lower_reachable = 2f64.powf(0.25);
        // max gain 4.515625 is attained at η = 15/16
        let lower_any = 2f64.powf(1.0 / 4.515625);
        for i in 1..=1000 {
            let e = i as f64 / 1000.0;
            let p = TheoryParams::from_eta(30, e).unwrap();
            assert!(p.lambda < 2.0);
            assert!(p.lambda >= lower_any - 1e-12);
            if e <= 0.75 {
                assert!(p.lambda >= lower_reachable - 1e-12, "η={e}");
            }
        }
    }

    #[test]
    fn laplace_center_tracks_true_mode() {
        // The exact form approximates the mode of the minimum's density.
        let base = GaussianSpec::standard();
        for m in [1000u64, 100_000, 1_000_000] {
            let mode = (0..200_000)
                .map(|i| -7.0 + 7.0 * i as f64 / 200_000.0)
                .max_by(|a, b| min_density(*a, base, m).total_cmp(&min_density(*b, base, m)))
                .unwrap();
            let g = min_distribution(base, m, MinForm::Exact).unwrap();
            assert!((g.mean - mode).abs() / mode.abs() < 0.02, "M={m}: {} vs {mode}", g.mean);
        }
    }

    #[test]
    fn cdf_accuracy() {
        assert!(close(normal_cdf(0.0), 0.5, 1e-16));
        assert!(close(normal_cdf(1.959963984540054), 0.975, 1e-15));
        assert!(close(normal_cdf(-5.0), 2.866515718791939e-7, 1e-20));
        assert!(close(min_cdf(0.0, GaussianSpec::standard(), 1), 0.5, 1e-15));
    }

    proptest! {
        #[test]
        fn mixture_never_beats_bound(r in -1.0f64..=1.0, m in 1u64..10_000_000) {
            let p = mixture_prediction(r, m).unwrap();
            prop_assert!(p.min_estimate >= mixture_bound(m).0 - 1e-12);
        }

        #[test]
        fn gain_lambda_consistent(e in 0.0f64..=1.0) {
            let p = TheoryParams::from_eta(20, e).unwrap();
            prop_assert!(p.gain >= 1.0);
            prop_assert!((p.lambda - 2f64.powf(1.0 / p.gain)).abs() < 1e-15);
        }
    }
}

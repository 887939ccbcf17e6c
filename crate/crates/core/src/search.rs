//! Stochastic searchers over `{-1, +1}^N`: random search, steepest-descent
//! bit flipping, two-parent selection and crossover, and the `n`-parent
//! mean-field mixture.
//!
//! Every searcher is single-threaded and draws all randomness from the
//! stream it is handed. States are sampled with replacement and ties are
//! broken in favour of the earliest draw.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polycost::{CostFunction, State, HARD_MAX_DIMS};
use crate::stats::RunningStats;

/// Flips must lower the cost by more than this to count as descent, so
/// rounding noise cannot make the walk cycle.
pub const DESCENT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub label: String,
    pub best_value: f64,
}

/// Offspring cost statistics pooled over the crossover batches of a run.
/// `mean` and `variance` average the per-batch sample moments, so
/// `variance` is the spread within one parent pair's offspring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffspringSummary {
    pub mean: f64,
    pub variance: f64,
    pub batches: u64,
    /// Average number of non-schema positions across batches.
    pub mean_d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best_state: State,
    pub best_value: f64,
    /// Full cost-function evaluations performed.
    pub evaluations: u64,
    /// Single-variable flip deltas computed (descent only). `N` of these
    /// cost about as much as `K` full evaluations.
    pub flip_evaluations: u64,
    pub stage_trace: Vec<StageRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offspring: Option<OffspringSummary>,
}

/// Signs buffer for a state code; `buf[n]` is the constant-one sentinel
/// used by [`CostFunction::flip_delta_signs`].
#[inline]
fn load_code(code: u64, n: usize, buf: &mut [f64; HARD_MAX_DIMS + 1]) {
    for (i, slot) in buf[..n].iter_mut().enumerate() {
        *slot = if code >> i & 1 == 1 { -1.0 } else { 1.0 };
    }
    buf[n] = 1.0;
}

#[inline]
fn random_code<R: RngCore + ?Sized>(n: usize, rng: &mut R) -> u64 {
    rng.next_u64() & low_mask(n)
}

#[inline]
fn low_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Minimum over `m` uniform draws, as `(code, value)`.
fn best_of_random<R: RngCore + ?Sized>(cf: &CostFunction, m: u64, rng: &mut R) -> (u64, f64) {
    let n = cf.n_dims();
    let mut buf = [1.0; HARD_MAX_DIMS + 1];
    let mut best = (0, f64::INFINITY);
    for _ in 0..m {
        let code = random_code(n, rng);
        load_code(code, n, &mut buf);
        let f = cf.evaluate_signs(&buf[..n]);
        if f < best.1 {
            best = (code, f);
        }
    }
    best
}

/// Samples `m` uniform states (with replacement) and keeps the best.
/// The trace records the best value after 10, 100, 1000, ... draws.
pub fn random_search<R: RngCore + ?Sized>(cf: &CostFunction, m: u64, rng: &mut R) -> Result<SearchResult> {
    if m == 0 {
        return Err(Error::InvalidParameter("random search needs m >= 1".into()));
    }
    let n = cf.n_dims();
    let mut buf = [1.0; HARD_MAX_DIMS + 1];
    let mut best = (0u64, f64::INFINITY);
    let mut trace = Vec::new();
    let mut checkpoint = 10u64;
    for t in 1..=m {
        let code = random_code(n, rng);
        load_code(code, n, &mut buf);
        let f = cf.evaluate_signs(&buf[..n]);
        if f < best.1 {
            best = (code, f);
        }
        if t == checkpoint && t != m {
            trace.push(StageRecord { label: format!("m={t}"), best_value: best.1 });
            checkpoint = checkpoint.saturating_mul(10);
        }
    }
    trace.push(StageRecord { label: format!("m={m}"), best_value: best.1 });
    Ok(SearchResult {
        best_state: State::from_code(best.0, n),
        best_value: best.1,
        evaluations: m,
        flip_evaluations: 0,
        stage_trace: trace,
        offspring: None,
    })
}

/// Steepest descent: repeatedly flips the bit with the most negative flip
/// delta (lowest index on ties) until no flip improves by more than
/// [`DESCENT_TOLERANCE`].
///
/// Each sweep computes `F` and all `N` flip deltas in one pass and counts
/// as one evaluation plus `N` flip evaluations; the final state is
/// re-evaluated once more so `best_value` is exactly `evaluate(best_state)`.
pub fn gradient_descent(cf: &CostFunction, x0: &State) -> Result<SearchResult> {
    let n = cf.n_dims();
    if x0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x0.len() });
    }
    let mut buf = [1.0; HARD_MAX_DIMS + 1];
    load_code(x0.to_code(), n, &mut buf);
    let mut fields = vec![0.0; n];
    let (sweeps, trace) = descend(cf, &mut buf, &mut fields, true);
    let best_value = cf.evaluate_signs(&buf[..n]);
    Ok(SearchResult {
        best_state: signs_to_state(&buf[..n]),
        best_value,
        evaluations: sweeps + 1,
        flip_evaluations: sweeps * n as u64,
        stage_trace: trace,
        offspring: None,
    })
}

fn signs_to_state(x: &[f64]) -> State {
    State::new(x.iter().map(|&v| if v > 0.0 { 1 } else { -1 }).collect())
        .expect("signs are ±1")
}

/// Runs descent in place on `x`; returns the number of sweeps and, when
/// asked, the trace of `F` after the start and after every flip.
fn descend(
    cf: &CostFunction,
    x: &mut [f64; HARD_MAX_DIMS + 1],
    fields: &mut [f64],
    keep_trace: bool,
) -> (u64, Vec<StageRecord>) {
    let n = cf.n_dims();
    let mut trace = Vec::new();
    let mut sweeps = 0;
    loop {
        let f = cf.local_fields_signs(&x[..n], fields);
        sweeps += 1;
        if keep_trace {
            trace.push(StageRecord { label: format!("step {}", sweeps - 1), best_value: f });
        }
        // flip delta is -2 h_i; most negative delta is largest field
        let mut pick = None;
        let mut best_delta = -DESCENT_TOLERANCE;
        for (i, &h) in fields.iter().enumerate() {
            let delta = -2.0 * h;
            if delta < best_delta {
                best_delta = delta;
                pick = Some(i);
            }
        }
        match pick {
            Some(i) => x[i] = -x[i],
            None => return (sweeps, trace),
        }
    }
}

/// Descent from `restarts` uniform random starts; keeps the best local
/// minimum (earliest restart on ties). The trace lists improvements.
pub fn gradient_descent_restarts<R: RngCore + ?Sized>(
    cf: &CostFunction,
    restarts: u64,
    rng: &mut R,
) -> Result<SearchResult> {
    if restarts == 0 {
        return Err(Error::InvalidParameter("need at least one restart".into()));
    }
    let n = cf.n_dims();
    let mut buf = [1.0; HARD_MAX_DIMS + 1];
    let mut fields = vec![0.0; n];
    let mut best = (0u64, f64::INFINITY);
    let mut sweeps_total = 0;
    let mut trace = Vec::new();
    for r in 0..restarts {
        load_code(random_code(n, rng), n, &mut buf);
        let (sweeps, _) = descend(cf, &mut buf, &mut fields, false);
        sweeps_total += sweeps;
        let f = cf.evaluate_signs(&buf[..n]);
        if f < best.1 {
            best = (signs_to_state(&buf[..n]).to_code(), f);
            trace.push(StageRecord { label: format!("restart {r}"), best_value: f });
        }
    }
    Ok(SearchResult {
        best_state: State::from_code(best.0, n),
        best_value: best.1,
        evaluations: sweeps_total + restarts,
        flip_evaluations: sweeps_total * n as u64,
        stage_trace: trace,
        offspring: None,
    })
}

/// Offspring law built from `n` parents: `Prob[z_i = +1] = ρ_i` with
/// `ρ_i = (Σ_k x_i^(k)) / (2n) + 1/2`, positions independent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossoverScheme {
    rho: Vec<f64>,
    n_parents: usize,
    schema_mask: Vec<bool>,
    d: usize,
    // sampling plan
    fixed_code: u64,
    half_mask: u64,
    fractional: Vec<(usize, f64)>,
}

pub fn make_crossover_scheme(parents: &[State]) -> Result<CrossoverScheme> {
    if parents.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "crossover needs at least 2 parents, got {}",
            parents.len()
        )));
    }
    let n = parents[0].len();
    if let Some(p) = parents.iter().find(|p| p.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: p.len() });
    }
    if n > HARD_MAX_DIMS {
        return Err(Error::CapExceeded { what: "n_dims", value: n, cap: HARD_MAX_DIMS });
    }
    let count = parents.len();
    let mut rho = Vec::with_capacity(n);
    let mut schema_mask = Vec::with_capacity(n);
    let (mut fixed_code, mut half_mask) = (0u64, 0u64);
    let mut fractional = Vec::new();
    for i in 0..n {
        let sum: i64 = parents.iter().map(|p| p.bits()[i] as i64).sum();
        let r = sum as f64 / (2 * count) as f64 + 0.5;
        let fixed = sum.unsigned_abs() as usize == count;
        if fixed {
            if sum < 0 {
                fixed_code |= 1 << i;
            }
        } else if 2 * sum == 0 {
            half_mask |= 1 << i;
        } else {
            fractional.push((i, r));
        }
        rho.push(r);
        schema_mask.push(fixed);
    }
    let d = schema_mask.iter().filter(|&&s| !s).count();
    Ok(CrossoverScheme { rho, n_parents: count, schema_mask, d, fixed_code, half_mask, fractional })
}

impl CrossoverScheme {
    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn n_parents(&self) -> usize {
        self.n_parents
    }

    /// Positions where every parent agrees.
    pub fn schema_mask(&self) -> &[bool] {
        &self.schema_mask
    }

    /// Number of non-schema positions; `|x - y|² / 4` for two parents.
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_dims(&self) -> usize {
        self.rho.len()
    }

    /// `E[z_i] = 2 ρ_i - 1`.
    pub fn marginal_means(&self) -> Vec<f64> {
        self.rho.iter().map(|r| 2.0 * r - 1.0).collect()
    }

    /// Mean offspring cost `R`: the multilinear extension of `F` at the
    /// marginal means.
    pub fn expected_cost(&self, cf: &CostFunction) -> Result<f64> {
        cf.multilinear_extension(&self.marginal_means())
    }

    #[inline]
    fn sample_code<R: RngCore + ?Sized>(&self, rng: &mut R) -> u64 {
        let mut code = self.fixed_code;
        if self.half_mask != 0 {
            code |= rng.next_u64() & self.half_mask;
        }
        for &(i, r) in &self.fractional {
            let u: f64 = rng.random();
            if u >= r {
                code |= 1 << i;
            }
        }
        code
    }
}

/// One offspring: `z_i = +1` with probability `ρ_i`, independently.
pub fn sample_offspring<R: RngCore + ?Sized>(scheme: &CrossoverScheme, rng: &mut R) -> State {
    State::from_code(scheme.sample_code(rng), scheme.n_dims())
}

/// Unbiased mean and variance of `F` over `samples` offspring (Welford).
pub fn offspring_statistics<R: RngCore + ?Sized>(
    cf: &CostFunction,
    scheme: &CrossoverScheme,
    samples: u64,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if samples < 2 {
        return Err(Error::InvalidParameter("offspring statistics need >= 2 samples".into()));
    }
    if scheme.n_dims() != cf.n_dims() {
        return Err(Error::DimensionMismatch { expected: cf.n_dims(), got: scheme.n_dims() });
    }
    let stats = offspring_batch(cf, scheme, samples, rng).2;
    Ok((stats.mean(), stats.variance()))
}

/// Draws `count` offspring; returns the best `(code, value)` and the
/// running statistics of all their costs.
fn offspring_batch<R: RngCore + ?Sized>(
    cf: &CostFunction,
    scheme: &CrossoverScheme,
    count: u64,
    rng: &mut R,
) -> (u64, f64, RunningStats) {
    let n = cf.n_dims();
    let mut buf = [1.0; HARD_MAX_DIMS + 1];
    let mut stats = RunningStats::new();
    let mut best = (0u64, f64::INFINITY);
    for _ in 0..count {
        let code = scheme.sample_code(rng);
        load_code(code, n, &mut buf);
        let f = cf.evaluate_signs(&buf[..n]);
        stats.push(f);
        if f < best.1 {
            best = (code, f);
        }
    }
    (best.0, best.1, stats)
}

/// Settings shared by the two-parent and mean-field protocols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossoverConfig {
    /// Random draws per parent pool.
    pub pool: u64,
    /// Offspring drawn per crossover.
    pub offspring_pool: u64,
    pub repeats: u64,
    pub n_parents: usize,
    /// Select fresh parents every repeat. When false, parents are selected
    /// once and `repeats` offspring batches are drawn from them.
    pub refresh_parents: bool,
    /// Shrink each parent pool to `⌊2 pool / n_parents⌋` so an `n`-parent
    /// run spends what the two-parent protocol spends.
    pub match_budget: bool,
}

impl CrossoverConfig {
    pub fn two_parent(pool: u64, offspring_pool: u64, repeats: u64) -> Self {
        CrossoverConfig {
            pool,
            offspring_pool,
            repeats,
            n_parents: 2,
            refresh_parents: true,
            match_budget: false,
        }
    }

    pub fn effective_pool(&self) -> u64 {
        if self.match_budget && self.n_parents > 2 {
            (2 * self.pool / self.n_parents as u64).max(1)
        } else {
            self.pool
        }
    }

    /// Closed-form number of evaluations a run with this config performs.
    pub fn total_evaluations(&self) -> u64 {
        let parents = self.n_parents as u64 * self.effective_pool();
        if self.refresh_parents {
            self.repeats * (parents + self.offspring_pool)
        } else {
            parents + self.repeats * self.offspring_pool
        }
    }
}

/// Generic selection-and-mixing loop: per repeat select `n_parents`
/// parents as minimizers of independent random pools, draw offspring from
/// their scheme, keep the best offspring. The result is the best offspring
/// minimizer over all repeats.
pub fn crossover_search<R: RngCore + ?Sized>(
    cf: &CostFunction,
    config: &CrossoverConfig,
    rng: &mut R,
) -> Result<SearchResult> {
    if config.pool == 0 || config.offspring_pool == 0 || config.repeats == 0 {
        return Err(Error::InvalidParameter("pool, offspring_pool and repeats must be >= 1".into()));
    }
    if config.n_parents < 2 {
        return Err(Error::InvalidParameter("need at least 2 parents".into()));
    }
    let n = cf.n_dims();
    let pool = config.effective_pool();
    let select = |rng: &mut R| -> Result<CrossoverScheme> {
        let parents: Vec<State> = (0..config.n_parents)
            .map(|_| State::from_code(best_of_random(cf, pool, rng).0, n))
            .collect();
        make_crossover_scheme(&parents)
    };

    let mut best = (0u64, f64::INFINITY);
    let mut trace = Vec::with_capacity(config.repeats as usize);
    let (mut mean_acc, mut var_acc, mut d_acc) = (RunningStats::new(), RunningStats::new(), 0.0);
    let fixed = if config.refresh_parents { None } else { Some(select(rng)?) };
    for r in 0..config.repeats {
        let fresh;
        let current = match &fixed {
            Some(s) => s,
            None => {
                fresh = select(rng)?;
                &fresh
            }
        };
        let (code, f, stats) = offspring_batch(cf, current, config.offspring_pool, rng);
        mean_acc.push(stats.mean());
        var_acc.push(stats.variance());
        d_acc += current.d() as f64;
        if f < best.1 {
            best = (code, f);
        }
        trace.push(StageRecord { label: format!("repeat {r}"), best_value: best.1 });
    }
    Ok(SearchResult {
        best_state: State::from_code(best.0, n),
        best_value: best.1,
        evaluations: config.total_evaluations(),
        flip_evaluations: 0,
        stage_trace: trace,
        offspring: Some(OffspringSummary {
            mean: mean_acc.mean(),
            variance: var_acc.mean(),
            batches: config.repeats,
            mean_d: d_acc / config.repeats as f64,
        }),
    })
}

/// Two-parent selection and crossover with fresh parents each repeat.
/// Performs exactly `repeats * (2 * pool + offspring_pool)` evaluations.
pub fn selection_crossover<R: RngCore + ?Sized>(
    cf: &CostFunction,
    pool: u64,
    offspring_pool: u64,
    repeats: u64,
    rng: &mut R,
) -> Result<SearchResult> {
    crossover_search(cf, &CrossoverConfig::two_parent(pool, offspring_pool, repeats), rng)
}

/// The same protocol with `n_parents >= 3` parents mixed position-wise.
/// Performs `repeats * (n_parents * pool + offspring_pool)` evaluations.
pub fn mean_field_search<R: RngCore + ?Sized>(
    cf: &CostFunction,
    n_parents: usize,
    pool: u64,
    offspring_pool: u64,
    repeats: u64,
    rng: &mut R,
) -> Result<SearchResult> {
    if n_parents < 3 {
        return Err(Error::InvalidParameter(format!(
            "mean-field search needs n_parents >= 3 (got {n_parents}); use selection_crossover for two parents"
        )));
    }
    let config = CrossoverConfig { n_parents, ..CrossoverConfig::two_parent(pool, offspring_pool, repeats) };
    crossover_search(cf, &config, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycost::sample_cost_function;
    use crate::rng::stream;

    fn state(s: &str) -> State {
        s.parse().unwrap()
    }

    #[test]
    fn random_search_zero_function() {
        let cf = CostFunction::zeros(10, 2).unwrap();
        let r = random_search(&cf, 50, &mut stream(1)).unwrap();
        assert_eq!(r.best_value, 0.0);
        assert_eq!(r.evaluations, 50);
        assert!(random_search(&cf, 0, &mut stream(1)).is_err());
    }

    #[test]
    fn random_search_finds_small_minimum() {
        let cf = sample_cost_function(12, 2, 3).unwrap();
        let (s, v) = cf.exhaustive_min().unwrap();
        let r = random_search(&cf, 1 << 20, &mut stream(4)).unwrap();
        assert_eq!(r.best_state, s);
        assert!((r.best_value - v).abs() < 1e-12);
        assert_eq!(r.best_value, cf.evaluate(&r.best_state).unwrap());
    }

    #[test]
    fn random_search_trace_is_nonincreasing() {
        let cf = sample_cost_function(20, 2, 3).unwrap();
        let r = random_search(&cf, 12_345, &mut stream(4)).unwrap();
        let labels: Vec<&str> = r.stage_trace.iter().map(|s| s.label.as_str()).collect();
        assert_eq!(labels, ["m=10", "m=100", "m=1000", "m=10000", "m=12345"]);
        assert!(r.stage_trace.windows(2).all(|w| w[1].best_value <= w[0].best_value));
    }

    #[test]
    fn descent_on_separable_function() {
        let cf = sample_cost_function(16, 1, 8).unwrap();
        let x0 = State::random(16, &mut stream(2));
        let r = gradient_descent(&cf, &x0).unwrap();
        let expected: Vec<i8> = (0..16)
            .map(|i| if cf.coefficient(&[i]).unwrap() > 0.0 { -1 } else { 1 })
            .collect();
        assert_eq!(r.best_state.bits(), expected.as_slice());
        assert!(r.stage_trace.len() <= 17);
        let (_, v) = cf.exhaustive_min().unwrap();
        assert!((r.best_value - v).abs() < 1e-12);
    }

    #[test]
    fn descent_zero_function_keeps_start() {
        let cf = CostFunction::zeros(9, 3).unwrap();
        let x0 = state("+-+--+-++");
        let r = gradient_descent(&cf, &x0).unwrap();
        assert_eq!(r.best_state, x0);
        assert_eq!(r.evaluations, 2);
        assert_eq!(r.flip_evaluations, 9);
    }

    #[test]
    fn descent_reaches_local_minimum_monotonically() {
        let cf = sample_cost_function(24, 3, 5).unwrap();
        for seed in 0..20 {
            let x0 = State::random(24, &mut stream(seed));
            let r = gradient_descent(&cf, &x0).unwrap();
            assert!(r.stage_trace.windows(2).all(|w| w[1].best_value < w[0].best_value));
            for i in 0..24 {
                assert!(cf.flip_delta(&r.best_state, i).unwrap() >= -DESCENT_TOLERANCE);
            }
            assert_eq!(r.best_value, cf.evaluate(&r.best_state).unwrap());
            assert_eq!(r.flip_evaluations, 24 * (r.evaluations - 1));
        }
    }

    #[test]
    fn descent_ties_pick_lowest_index() {
        // a_0 = a_1 = 1: both flips from (+,+) lower F by 2; index 0 goes first
        let cf = CostFunction::from_terms(2, &[(&[0], 1.0), (&[1], 1.0)]).unwrap();
        let r = gradient_descent(&cf, &state("++")).unwrap();
        assert_eq!(r.stage_trace.len(), 3);
        assert_eq!(r.best_state, state("--"));
        let cf = CostFunction::from_terms(2, &[(&[0, 1], 1.0)]).unwrap();
        let r = gradient_descent(&cf, &state("++")).unwrap();
        assert_eq!(r.best_state, state("-+"));
    }

    #[test]
    fn scheme_two_parents() {
        let x = state("+-+-+-");
        let same = make_crossover_scheme(&[x.clone(), x.clone()]).unwrap();
        assert_eq!(same.d(), 0);
        assert!(same.rho().iter().all(|&r| r == 0.0 || r == 1.0));
        assert!(same.schema_mask().iter().all(|&s| s));
        let opposite = make_crossover_scheme(&[x.clone(), x.negated()]).unwrap();
        assert_eq!(opposite.d(), 6);
        assert!(opposite.rho().iter().all(|&r| r == 0.5));
        let y = state("++++++");
        let s = make_crossover_scheme(&[x.clone(), y.clone()]).unwrap();
        assert_eq!(s.d(), x.distance(&y));
        assert_eq!(s.rho(), &[1.0, 0.5, 1.0, 0.5, 1.0, 0.5]);
    }

    #[test]
    fn scheme_four_parents() {
        // column sums +4, +2, 0, -2, -4
        let parents = [state("+++--"), state("+++--"), state("++---"), state("+--+-")];
        let s = make_crossover_scheme(&parents).unwrap();
        assert_eq!(s.rho(), &[1.0, 0.75, 0.5, 0.25, 0.0]);
        assert_eq!(s.schema_mask(), &[true, false, false, false, true]);
        assert_eq!(s.d(), 3);
    }

    #[test]
    fn scheme_errors() {
        assert!(make_crossover_scheme(&[state("++")]).is_err());
        assert!(matches!(
            make_crossover_scheme(&[state("++"), state("+++")]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn deterministic_offspring_for_fixed_scheme() {
        let x = state("+--++-");
        let s = make_crossover_scheme(&[x.clone(), x.clone()]).unwrap();
        let mut r = stream(5);
        for _ in 0..10 {
            assert_eq!(sample_offspring(&s, &mut r), x);
        }
    }

    #[test]
    fn offspring_frequencies_and_schema() {
        let x = state("++++----++++----");
        let y = state("+-+--+-++-+--+-+");
        let s = make_crossover_scheme(&[x.clone(), y.clone()]).unwrap();
        let mut r = stream(11);
        let mut plus = [0u32; 16];
        let samples = 100_000;
        for _ in 0..samples {
            let z = sample_offspring(&s, &mut r);
            for (i, count) in plus.iter_mut().enumerate() {
                if x.bits()[i] == y.bits()[i] {
                    assert_eq!(z.bits()[i], x.bits()[i]);
                } else if z.bits()[i] == 1 {
                    *count += 1;
                }
            }
        }
        for i in (0..16).filter(|&i| x.bits()[i] != y.bits()[i]) {
            let freq = plus[i] as f64 / samples as f64;
            assert!((0.48..=0.52).contains(&freq), "position {i}: {freq}");
        }
    }

    #[test]
    fn offspring_marginal_variance() {
        let parents = [state("+++--"), state("+++--"), state("++---"), state("+--+-")];
        let s = make_crossover_scheme(&parents).unwrap();
        let mut r = stream(3);
        let mut stats = [RunningStats::new(); 5];
        for _ in 0..200_000 {
            let z = sample_offspring(&s, &mut r);
            for (acc, &b) in stats.iter_mut().zip(z.bits()) {
                acc.push(b as f64);
            }
        }
        for (acc, &rho) in stats.iter().zip(s.rho()) {
            let var = 4.0 * rho * (1.0 - rho);
            assert!((acc.variance() - var).abs() < 0.01, "ρ={rho}: {}", acc.variance());
            assert!((acc.mean() - (2.0 * rho - 1.0)).abs() < 0.01);
        }
    }

    #[test]
    fn offspring_statistics_zero_function() {
        let cf = CostFunction::zeros(8, 2).unwrap();
        let s = make_crossover_scheme(&[State::ones(8), State::ones(8).negated()]).unwrap();
        assert_eq!(offspring_statistics(&cf, &s, 100, &mut stream(1)).unwrap(), (0.0, 0.0));
        assert!(offspring_statistics(&cf, &s, 1, &mut stream(1)).is_err());
    }

    #[test]
    fn opposite_parents_give_unit_variance() {
        let mut var = RunningStats::new();
        for seed in 0..5 {
            let cf = sample_cost_function(20, 2, seed).unwrap();
            let x = State::random(20, &mut stream(100 + seed));
            let s = make_crossover_scheme(&[x.clone(), x.negated()]).unwrap();
            var.push(offspring_statistics(&cf, &s, 20_000, &mut stream(seed)).unwrap().1);
        }
        assert!((var.mean() - 1.0).abs() < 0.15, "{}", var.mean());
    }

    #[test]
    fn budget_accounting() {
        let cf = sample_cost_function(16, 2, 1).unwrap();
        let r = selection_crossover(&cf, 50, 40, 7, &mut stream(2)).unwrap();
        assert_eq!(r.evaluations, 7 * (2 * 50 + 40));
        assert_eq!(r.stage_trace.len(), 7);
        let r = mean_field_search(&cf, 4, 50, 40, 7, &mut stream(2)).unwrap();
        assert_eq!(r.evaluations, 7 * (4 * 50 + 40));
        let matched = CrossoverConfig { n_parents: 4, match_budget: true, ..CrossoverConfig::two_parent(50, 40, 7) };
        assert_eq!(matched.total_evaluations(), 7 * (2 * 50 + 40));
        let fixed = CrossoverConfig { refresh_parents: false, ..CrossoverConfig::two_parent(50, 40, 7) };
        let r = crossover_search(&cf, &fixed, &mut stream(2)).unwrap();
        assert_eq!(r.evaluations, 2 * 50 + 7 * 40);
        assert_eq!(r.offspring.unwrap().batches, 7);
        assert_eq!(selection_crossover(&cf, 1000, 1000, 333, &mut stream(0)).unwrap().evaluations, 999_000);
    }

    #[test]
    fn crossover_zero_function() {
        let cf = CostFunction::zeros(12, 2).unwrap();
        let r = selection_crossover(&cf, 20, 20, 5, &mut stream(1)).unwrap();
        assert_eq!(r.best_value, 0.0);
    }

    #[test]
    fn mean_field_needs_three_parents() {
        let cf = CostFunction::zeros(12, 2).unwrap();
        assert!(mean_field_search(&cf, 2, 20, 20, 5, &mut stream(1)).is_err());
    }

    #[test]
    fn identical_parents_give_parent_as_offspring() {
        let cf = sample_cost_function(10, 2, 4).unwrap();
        let x = State::random(10, &mut stream(9));
        let s = make_crossover_scheme(&[x.clone(), x.clone(), x.clone(), x.clone()]).unwrap();
        let z = sample_offspring(&s, &mut stream(1));
        assert_eq!(z, x);
        let (m, v) = offspring_statistics(&cf, &s, 10, &mut stream(2)).unwrap();
        assert_eq!(m, cf.evaluate(&x).unwrap());
        assert_eq!(v, 0.0);
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let cf = sample_cost_function(20, 3, 6).unwrap();
        let a = selection_crossover(&cf, 100, 100, 10, &mut stream(7)).unwrap();
        let b = selection_crossover(&cf, 100, 100, 10, &mut stream(7)).unwrap();
        assert_eq!(a, b);
        let a = gradient_descent_restarts(&cf, 20, &mut stream(8)).unwrap();
        let b = gradient_descent_restarts(&cf, 20, &mut stream(8)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn expected_cost_matches_enumeration() {
        // exact mean of F under the product law, by enumerating all states
        let cf = sample_cost_function(8, 3, 2).unwrap();
        let parents = [state("++++----"), state("+-+-+-+-"), state("++--++--"), state("+++++---")];
        let s = make_crossover_scheme(&parents).unwrap();
        let mut exact = 0.0;
        for code in 0..256u64 {
            let z = State::from_code(code, 8);
            let p: f64 = z
                .bits()
                .iter()
                .zip(s.rho())
                .map(|(&b, &r)| if b == 1 { r } else { 1.0 - r })
                .product();
            exact += p * cf.evaluate(&z).unwrap();
        }
        assert!((s.expected_cost(&cf).unwrap() - exact).abs() < 1e-12);
    }
}

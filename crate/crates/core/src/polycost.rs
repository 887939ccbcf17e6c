//! Random multilinear cost functions over `{-1, +1}^N`.
//!
//! A cost function is a sum of products
//! `F(x) = Σ_α Σ_{i_1 < ... < i_α} a_{i_1...i_α} x_{i_1} ... x_{i_α}`
//! with no constant term. Coefficients of order `α` are independent
//! zero-mean Gaussians with variance `σ_α²`, normalized so that
//! `Σ_α C(N, α) σ_α² = 1`, which makes `F` have unit variance over uniformly
//! random states.
//!
//! Coefficients are stored densely, grouped by order ascending and ranked
//! colexicographically inside each order (see [`crate::combin`]).

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::combin::{binomial, colex_rank, colex_unrank};
use crate::error::{Error, Result};
use crate::rng;

/// States are drawn from a single `u64`, and index tables use `u8`.
pub const HARD_MAX_DIMS: usize = 63;
pub const DEFAULT_MAX_DIMS: usize = 30;
pub const DEFAULT_MAX_ORDER: usize = 4;
pub const DEFAULT_EXHAUSTIVE_MAX_DIMS: usize = 20;

/// Size caps applied when sampling cost functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_dims: usize,
    pub max_order: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_dims: DEFAULT_MAX_DIMS, max_order: DEFAULT_MAX_ORDER }
    }
}

/// A point of `{-1, +1}^N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct State(Vec<i8>);

impl State {
    pub fn new(bits: Vec<i8>) -> Result<Self> {
        if let Some(b) = bits.iter().find(|&&b| b != 1 && b != -1) {
            return Err(Error::InvalidParameter(format!("state entry {b} is not ±1")));
        }
        Ok(State(bits))
    }

    /// The all `+1` state.
    pub fn ones(n_dims: usize) -> Self {
        State(vec![1; n_dims])
    }

    /// Decodes the low `n_dims` bits of `code`; a set bit `i` means `x_i = -1`.
    pub fn from_code(code: u64, n_dims: usize) -> Self {
        debug_assert!(n_dims <= 64);
        State((0..n_dims).map(|i| if code >> i & 1 == 1 { -1 } else { 1 }).collect())
    }

    pub fn to_code(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == -1)
            .fold(0, |acc, (i, _)| acc | 1 << i)
    }

    /// Uniform random state: each entry independently ±1 with probability 1/2.
    pub fn random<R: RngCore + ?Sized>(n_dims: usize, rng: &mut R) -> Self {
        debug_assert!(n_dims <= 64);
        State::from_code(rng.next_u64(), n_dims)
    }

    pub fn bits(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = -self.0[i];
    }

    pub fn flipped(&self, i: usize) -> Self {
        let mut s = self.clone();
        s.flip(i);
        s
    }

    pub fn negated(&self) -> Self {
        State(self.0.iter().map(|&b| -b).collect())
    }

    /// Number of positions where the two states differ, `|x - y|² / 4`.
    pub fn distance(&self, other: &State) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }

    fn load(&self, buf: &mut [f64]) {
        for (slot, &b) in buf.iter_mut().zip(&self.0) {
            *slot = b as f64;
        }
    }
}

impl TryFrom<Vec<i8>> for State {
    type Error = Error;

    fn try_from(bits: Vec<i8>) -> Result<Self> {
        State::new(bits)
    }
}

impl From<State> for Vec<i8> {
    fn from(s: State) -> Vec<i8> {
        s.0
    }
}

/// Renders as a string of `+` and `-`.
impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b == 1 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

/// Accepts either a `+`/`-` string or whitespace/comma separated `1`/`-1`.
impl FromStr for State {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bits: Result<Vec<i8>> = if s.chars().all(|c| c == '+' || c == '-') {
            Ok(s.chars().map(|c| if c == '+' { 1 } else { -1 }).collect())
        } else {
            s.split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<i8>().map_err(|_| Error::Format {
                        kind: "state",
                        msg: format!("bad entry {t:?}"),
                    })
                })
                .collect()
        };
        State::new(bits?)
    }
}

/// Per-variable list of the terms that contain it. `others` holds the
/// remaining members of each term with a fixed stride of `max_order - 1`,
/// padded with the sentinel index `n_dims` (whose value is always 1).
#[derive(Debug, Clone, Default)]
struct VarTerms {
    ranks: Vec<u32>,
    others: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct CostFunction {
    n_dims: usize,
    max_order: usize,
    order_variance: Vec<f64>,
    coefficients: Vec<f64>,
    seed: u64,
    var_terms: Vec<VarTerms>,
}

/// Total number of coefficients of orders `1..=max_order`.
pub fn coefficient_count(n_dims: usize, max_order: usize) -> usize {
    (1..=max_order).map(|a| binomial(n_dims, a) as usize).sum()
}

/// Order variances with `σ_1² = ... = σ_K² = 1 / Σ_{α≤K} C(N, α)` and zero
/// above `K`. Returned vector has length `N`, entry `α - 1` for order `α`.
pub fn uniform_order_variance(n_dims: usize, max_order: usize) -> Vec<f64> {
    let count = coefficient_count(n_dims, max_order) as f64;
    (1..=n_dims).map(|a| if a <= max_order { 1.0 / count } else { 0.0 }).collect()
}

/// Samples a `K`-th order cost function with uniform order variances.
pub fn sample_cost_function(n_dims: usize, max_order: usize, seed: u64) -> Result<CostFunction> {
    sample_cost_function_with(n_dims, max_order, seed, &Limits::default())
}

pub fn sample_cost_function_with(
    n_dims: usize,
    max_order: usize,
    seed: u64,
    limits: &Limits,
) -> Result<CostFunction> {
    if max_order == 0 || max_order > n_dims {
        return Err(Error::InvalidParameter(format!(
            "max_order must satisfy 1 <= K <= N, got K={max_order}, N={n_dims}"
        )));
    }
    check_limits(n_dims, max_order, limits)?;
    let variance = uniform_order_variance(n_dims, max_order);
    sample_inner(n_dims, max_order, variance, seed)
}

/// Samples with arbitrary order variances. `order_variance[α - 1]` is
/// `σ_α²`; it must have length `N` and satisfy the normalization.
pub fn sample_with_order_variance(
    order_variance: &[f64],
    seed: u64,
    limits: &Limits,
) -> Result<CostFunction> {
    let n_dims = order_variance.len();
    check_normalization(n_dims, order_variance)?;
    let max_order = order_variance
        .iter()
        .rposition(|&v| v > 0.0)
        .map(|p| p + 1)
        .ok_or_else(|| Error::InvalidParameter("all order variances are zero".into()))?;
    check_limits(n_dims, max_order, limits)?;
    sample_inner(n_dims, max_order, order_variance.to_vec(), seed)
}

fn sample_inner(
    n_dims: usize,
    max_order: usize,
    order_variance: Vec<f64>,
    seed: u64,
) -> Result<CostFunction> {
    let mut rng = rng::stream(seed);
    let mut coefficients = Vec::with_capacity(coefficient_count(n_dims, max_order));
    for alpha in 1..=max_order {
        let sd = order_variance[alpha - 1].sqrt();
        for _ in 0..binomial(n_dims, alpha) {
            let z: f64 = rng.sample(StandardNormal);
            coefficients.push(sd * z);
        }
    }
    CostFunction::from_parts(n_dims, max_order, order_variance, coefficients, seed)
}

fn check_limits(n_dims: usize, max_order: usize, limits: &Limits) -> Result<()> {
    let cap = limits.max_dims.min(HARD_MAX_DIMS);
    if n_dims > cap {
        return Err(Error::CapExceeded { what: "n_dims", value: n_dims, cap });
    }
    if max_order > limits.max_order {
        return Err(Error::CapExceeded { what: "max_order", value: max_order, cap: limits.max_order });
    }
    Ok(())
}

fn check_normalization(n_dims: usize, order_variance: &[f64]) -> Result<()> {
    if order_variance.len() != n_dims {
        return Err(Error::InvalidParameter(format!(
            "expected {n_dims} order variances, got {}",
            order_variance.len()
        )));
    }
    if order_variance.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::InvalidParameter("order variances must be >= 0".into()));
    }
    let total: f64 = order_variance
        .iter()
        .enumerate()
        .map(|(a, v)| crate::combin::binomial_f64(n_dims, a + 1) * v)
        .sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "order variances sum to {total} under binomial weighting, expected 1"
        )));
    }
    Ok(())
}

impl CostFunction {
    /// Assembles a cost function from a canonical coefficient table.
    pub fn from_parts(
        n_dims: usize,
        max_order: usize,
        order_variance: Vec<f64>,
        coefficients: Vec<f64>,
        seed: u64,
    ) -> Result<Self> {
        if n_dims == 0 || n_dims > HARD_MAX_DIMS {
            return Err(Error::CapExceeded { what: "n_dims", value: n_dims, cap: HARD_MAX_DIMS });
        }
        if max_order == 0 || max_order > n_dims {
            return Err(Error::InvalidParameter(format!(
                "max_order must satisfy 1 <= K <= N, got K={max_order}, N={n_dims}"
            )));
        }
        check_normalization(n_dims, &order_variance)?;
        if order_variance[max_order..].iter().any(|&v| v != 0.0) {
            return Err(Error::InvalidParameter("nonzero variance above max_order".into()));
        }
        let expected = coefficient_count(n_dims, max_order);
        if coefficients.len() != expected {
            return Err(Error::InvalidParameter(format!(
                "expected {expected} coefficients for N={n_dims}, K={max_order}, got {}",
                coefficients.len()
            )));
        }
        if coefficients.len() > u32::MAX as usize {
            return Err(Error::CapExceeded { what: "coefficients", value: expected, cap: u32::MAX as usize });
        }
        let var_terms = build_var_terms(n_dims, max_order);
        Ok(CostFunction { n_dims, max_order, order_variance, coefficients, seed, var_terms })
    }

    /// Builds a cost function from explicit `(tuple, coefficient)` terms;
    /// unlisted terms up to the largest tuple order are zero. Order
    /// variances are set to the uniform law for that order. Intended for
    /// small hand-written instances.
    pub fn from_terms(n_dims: usize, terms: &[(&[usize], f64)]) -> Result<Self> {
        let max_order = terms.iter().map(|(t, _)| t.len()).max().unwrap_or(1).max(1);
        let mut table = CostFunction::zeros(n_dims, max_order)?;
        for (tuple, value) in terms {
            let index = table.index_of(tuple)?;
            table.coefficients[index] = *value;
        }
        Ok(table)
    }

    /// All-zero coefficient table.
    pub fn zeros(n_dims: usize, max_order: usize) -> Result<Self> {
        let variance = uniform_order_variance(n_dims, max_order);
        let count = coefficient_count(n_dims, max_order);
        CostFunction::from_parts(n_dims, max_order, variance, vec![0.0; count], 0)
    }

    pub fn n_dims(&self) -> usize {
        self.n_dims
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// `σ_α²` at index `α - 1`, length `N`.
    pub fn order_variance(&self) -> &[f64] {
        &self.order_variance
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Offset of the first coefficient of order `alpha` in the table.
    pub fn order_offset(&self, alpha: usize) -> usize {
        coefficient_count(self.n_dims, alpha - 1)
    }

    /// Table index of the coefficient for a strictly increasing tuple.
    pub fn index_of(&self, tuple: &[usize]) -> Result<usize> {
        if tuple.is_empty() || tuple.len() > self.max_order {
            return Err(Error::InvalidParameter(format!("tuple order {} not stored", tuple.len())));
        }
        if !tuple.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter("tuple must be strictly increasing".into()));
        }
        if let Some(&i) = tuple.iter().find(|&&i| i >= self.n_dims) {
            return Err(Error::IndexOutOfRange { index: i, n_dims: self.n_dims });
        }
        Ok(self.order_offset(tuple.len()) + colex_rank(tuple) as usize)
    }

    pub fn coefficient(&self, tuple: &[usize]) -> Result<f64> {
        Ok(self.coefficients[self.index_of(tuple)?])
    }

    /// Every stored `(tuple, coefficient)` pair in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        (1..=self.max_order).flat_map(move |alpha| {
            let offset = self.order_offset(alpha);
            (0..binomial(self.n_dims, alpha)).map(move |r| {
                (colex_unrank(r, alpha), self.coefficients[offset + r as usize])
            })
        })
    }

    fn check_state(&self, x: &State) -> Result<()> {
        if x.len() != self.n_dims {
            return Err(Error::DimensionMismatch { expected: self.n_dims, got: x.len() });
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &State) -> Result<f64> {
        self.check_state(x)?;
        Ok(self.evaluate_unchecked(x))
    }

    pub(crate) fn evaluate_unchecked(&self, x: &State) -> f64 {
        let mut buf = [0.0; HARD_MAX_DIMS + 1];
        x.load(&mut buf);
        self.evaluate_signs(&buf[..self.n_dims])
    }

    /// Evaluates on a state given as `±1.0` floats.
    pub(crate) fn evaluate_signs(&self, x: &[f64]) -> f64 {
        PRODUCTS.with(|p| product_sum(&self.coefficients, x, self.n_dims, self.max_order, &mut p.borrow_mut()))
    }

    /// `F(x with bit i flipped) - F(x)`, touching only the terms containing `i`.
    pub fn flip_delta(&self, x: &State, i: usize) -> Result<f64> {
        self.check_state(x)?;
        if i >= self.n_dims {
            return Err(Error::IndexOutOfRange { index: i, n_dims: self.n_dims });
        }
        let mut buf = [1.0; HARD_MAX_DIMS + 1];
        x.load(&mut buf);
        Ok(self.flip_delta_signs(&buf, i))
    }

    /// `x` must have length `n_dims + 1` with `x[n_dims] == 1.0`.
    #[inline]
    pub(crate) fn flip_delta_signs(&self, x: &[f64], i: usize) -> f64 {
        let terms = &self.var_terms[i];
        let stride = self.max_order - 1;
        let mut field = 0.0;
        if stride == 0 {
            for &r in &terms.ranks {
                field += self.coefficients[r as usize];
            }
        } else {
            for (&r, others) in terms.ranks.iter().zip(terms.others.chunks_exact(stride)) {
                let p: f64 = others.iter().map(|&j| x[j as usize]).product();
                field += self.coefficients[r as usize] * p;
            }
        }
        -2.0 * x[i] * field
    }

    /// Local fields `h_i = Σ_{terms ∋ i} a Π x` for every variable in one
    /// pass over the table; `flip_delta(x, i) = -2 h_i`. Also returns `F(x)`.
    pub fn local_fields(&self, x: &State) -> Result<(f64, Vec<f64>)> {
        self.check_state(x)?;
        let mut buf = [0.0; HARD_MAX_DIMS + 1];
        x.load(&mut buf);
        let mut fields = vec![0.0; self.n_dims];
        let value = self.local_fields_signs(&buf[..self.n_dims], &mut fields);
        Ok((value, fields))
    }

    pub(crate) fn local_fields_signs(&self, x: &[f64], fields: &mut [f64]) -> f64 {
        fields.iter_mut().for_each(|h| *h = 0.0);
        let mut offset = 0;
        let mut total = 0.0;
        for alpha in 1..=self.max_order {
            total += fields_sum(&self.coefficients, &mut offset, x, alpha, self.n_dims, 1.0, fields);
        }
        total
    }

    /// Multilinear extension at a point of `[-1, 1]^N`: the expectation of
    /// `F(z)` when the `z_i` are independent with `E[z_i] = m_i`.
    pub fn multilinear_extension(&self, means: &[f64]) -> Result<f64> {
        if means.len() != self.n_dims {
            return Err(Error::DimensionMismatch { expected: self.n_dims, got: means.len() });
        }
        Ok(self.evaluate_signs(means))
    }

    /// Exact minimizer by Gray-code traversal of all `2^N` states, using the
    /// default cap of 20 dimensions.
    pub fn exhaustive_min(&self) -> Result<(State, f64)> {
        self.exhaustive_min_capped(DEFAULT_EXHAUSTIVE_MAX_DIMS)
    }

    /// Visits states in reflected Gray-code order starting from all `+1`,
    /// applying one [`flip_delta`](Self::flip_delta) per step. Ties go to
    /// the first state visited. The returned value is re-evaluated exactly.
    pub fn exhaustive_min_capped(&self, max_dims: usize) -> Result<(State, f64)> {
        let n = self.n_dims;
        if n > max_dims.min(HARD_MAX_DIMS - 1) {
            return Err(Error::CapExceeded { what: "n_dims", value: n, cap: max_dims });
        }
        let mut x = [1.0; HARD_MAX_DIMS + 1];
        let mut value = self.evaluate_signs(&x[..n]);
        let mut best = value;
        let mut best_code = 0u64;
        for step in 1..(1u64 << n) {
            let bit = step.trailing_zeros() as usize;
            value += self.flip_delta_signs(&x, bit);
            x[bit] = -x[bit];
            if value < best {
                best = value;
                best_code = step ^ (step >> 1);
            }
        }
        let state = State::from_code(best_code, n);
        let exact = self.evaluate_unchecked(&state);
        Ok((state, exact))
    }

    // ---- serialization ----

    const MAGIC: [u8; 4] = *b"MLPC";
    const FORMAT_VERSION: u32 = 1;

    /// Little-endian binary layout:
    ///
    /// ```text
    /// magic "MLPC" | version u32 | n_dims u32 | max_order u32 | seed u64
    /// | order_variance [f64; n_dims] | count u64 | coefficients [f64; count]
    /// ```
    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(&Self::MAGIC)?;
        w.write_all(&Self::FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(self.n_dims as u32).to_le_bytes())?;
        w.write_all(&(self.max_order as u32).to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        for v in &self.order_variance {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&(self.coefficients.len() as u64).to_le_bytes())?;
        for c in &self.coefficients {
            w.write_all(&c.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        fn bad(msg: impl Into<String>) -> Error {
            Error::Format { kind: "cost function file", msg: msg.into() }
        }
        let io = |e: std::io::Error| bad(e.to_string());
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(io)?;
        if magic != Self::MAGIC {
            return Err(bad("bad magic"));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b4).map_err(io)?;
        let version = u32::from_le_bytes(b4);
        if version != Self::FORMAT_VERSION {
            return Err(bad(format!("unsupported version {version}")));
        }
        r.read_exact(&mut b4).map_err(io)?;
        let n_dims = u32::from_le_bytes(b4) as usize;
        r.read_exact(&mut b4).map_err(io)?;
        let max_order = u32::from_le_bytes(b4) as usize;
        if n_dims == 0 || n_dims > HARD_MAX_DIMS {
            return Err(bad(format!("n_dims {n_dims} out of range")));
        }
        r.read_exact(&mut b8).map_err(io)?;
        let seed = u64::from_le_bytes(b8);
        let mut order_variance = Vec::with_capacity(n_dims);
        for _ in 0..n_dims {
            r.read_exact(&mut b8).map_err(io)?;
            order_variance.push(f64::from_le_bytes(b8));
        }
        r.read_exact(&mut b8).map_err(io)?;
        let count = u64::from_le_bytes(b8) as usize;
        if max_order > n_dims || count != coefficient_count(n_dims, max_order) {
            return Err(bad(format!("coefficient count {count} inconsistent with header")));
        }
        let mut coefficients = Vec::with_capacity(count);
        for _ in 0..count {
            r.read_exact(&mut b8).map_err(io)?;
            coefficients.push(f64::from_le_bytes(b8));
        }
        CostFunction::from_parts(n_dims, max_order, order_variance, coefficients, seed)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_to(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        CostFunction::read_from(&mut std::io::BufReader::new(file))
    }
}

/// Two cost functions are equal when their defining data match; the
/// derived term index is not compared.
impl PartialEq for CostFunction {
    fn eq(&self, other: &Self) -> bool {
        self.n_dims == other.n_dims
            && self.max_order == other.max_order
            && self.seed == other.seed
            && self.order_variance == other.order_variance
            && self.coefficients == other.coefficients
    }
}

fn build_var_terms(n_dims: usize, max_order: usize) -> Vec<VarTerms> {
    let stride = max_order - 1;
    let sentinel = n_dims as u8;
    let mut index = vec![VarTerms::default(); n_dims];
    let mut rank = 0u32;
    let mut tuple = Vec::with_capacity(max_order);
    for alpha in 1..=max_order {
        for_each_tuple(n_dims, alpha, &mut tuple, &mut |t| {
            for &member in t {
                let entry = &mut index[member];
                entry.ranks.push(rank);
                let before = entry.others.len();
                entry.others.extend(t.iter().filter(|&&j| j != member).map(|&j| j as u8));
                entry.others.resize(before + stride, sentinel);
            }
            rank += 1;
        });
    }
    index
}

/// Visits all increasing `alpha`-tuples of `0..n` in colex order.
fn for_each_tuple(n: usize, alpha: usize, tuple: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    fn rec(upper: usize, left: usize, tuple: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if left == 0 {
            let sorted: Vec<usize> = tuple.iter().rev().copied().collect();
            f(&sorted);
            return;
        }
        for top in (left - 1)..upper {
            tuple.push(top);
            rec(top, left - 1, tuple, f);
            tuple.pop();
        }
    }
    tuple.clear();
    rec(n, alpha, tuple, f);
}

thread_local! {
    static PRODUCTS: std::cell::RefCell<Vec<f64>> = const { std::cell::RefCell::new(Vec::new()) };
}

/// Sum of all terms. Colex order puts the order-`α` tuples with largest
/// member `t` in one block whose lower members run over the first
/// `C(t, α-1)` order-`α-1` tuples, so each block is `x_t` times one
/// contiguous dot product against the table of order-`α-1` products.
/// Tables are built only up to order `K-1`.
fn product_sum(c: &[f64], x: &[f64], n: usize, k: usize, products: &mut Vec<f64>) -> f64 {
    let mut total = dot(&c[..n], &x[..n]);
    let mut offset = n;
    products.clear();
    products.extend_from_slice(&x[..n]);
    let mut prev = 0;
    for alpha in 2..=k {
        let build = alpha < k;
        let next = products.len();
        for (t, &xt) in x.iter().enumerate().take(n).skip(alpha - 1) {
            let len = binomial(t, alpha - 1) as usize;
            total += xt * dot(&c[offset..offset + len], &products[prev..prev + len]);
            offset += len;
            if build {
                let start = products.len();
                products.extend_from_within(prev..prev + len);
                products[start..].iter_mut().for_each(|v| *v *= xt);
            }
        }
        prev = next;
    }
    debug_assert_eq!(offset, c.len());
    total
}

/// Recursive term sum that also adds each term's value into the field of
/// every member. `prod` is the product of the already-chosen larger members.
fn fields_sum(
    c: &[f64],
    offset: &mut usize,
    x: &[f64],
    order: usize,
    n: usize,
    prod: f64,
    fields: &mut [f64],
) -> f64 {
    if order == 1 {
        let coeffs = &c[*offset..*offset + n];
        *offset += n;
        let mut s = 0.0;
        for ((h, &a), &xi) in fields.iter_mut().zip(coeffs).zip(x) {
            let v = a * xi * prod;
            *h += v;
            s += v;
        }
        return s;
    }
    let mut total = 0.0;
    for top in (order - 1)..n {
        let sub = fields_sum(c, offset, x, order - 1, top, prod * x[top], fields);
        fields[top] += sub;
        total += sub;
    }
    total
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    const L: usize = 4;
    let mut acc = [0.0; L];
    let ca = a.chunks_exact(L);
    let cb = b.chunks_exact(L);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (p, q) in ca.zip(cb) {
        for j in 0..L {
            acc[j] += p[j] * q[j];
        }
    }
    let mut s = 0.0;
    for (p, q) in ra.iter().zip(rb) {
        s += p * q;
    }
    for pair in acc.chunks_exact(2) {
        s += pair[0] + pair[1];
    }
    s
}

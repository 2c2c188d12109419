//! Sequence summability machinery: natural density, deferred weighted
//! means, non-negative matrix transforms and their deferred-weighted
//! regularity residuals, deferred weighted A-density of index sets, and the
//! power-series transform with its regularity residual.
//!
//! All infinite sums are truncated with explicit term counts and reported
//! tail estimates; divisions by normalizers happen once at the end of each
//! accumulation so that integer-valued counts stay exact in floating point.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::certified::Certified;
use crate::error::{Error, Result};
use crate::real::Real;

/// Default number of probed columns in the per-column regularity residual.
pub const DEFAULT_K_PROBE: u64 = 32;

/// Hard cap on the number of power-series terms per evaluation.
pub const DEFAULT_SERIES_CAP: usize = 20_000_000;

/// Relative term size used to decide how many power-series terms are
/// needed: summation stops once the geometric envelope drops below this.
const SERIES_TERM_CUTOFF: f64 = 1e-12;

/// True iff n = m² for some integer m ≥ 1 (n = 0 is excluded: sequence
/// indices start at 1).
pub fn is_perfect_square(n: u64) -> bool {
    if n == 0 {
        return false;
    }
    let mut m = (n as f64).sqrt().round() as u64;
    // float sqrt can be off by one near big squares
    while m * m > n {
        m -= 1;
    }
    while (m + 1) * (m + 1) <= n {
        m += 1;
    }
    m * m == n
}

/// A total deterministic map n ↦ x_n for n ≥ 1.
#[derive(Clone)]
pub struct RealSequence<T> {
    label: String,
    term: Arc<dyn Fn(u64) -> T + Send + Sync>,
}

impl<T: Real> RealSequence<T> {
    pub fn from_fn(
        label: impl Into<String>,
        term: impl Fn(u64) -> T + Send + Sync + 'static,
    ) -> Self {
        RealSequence { label: label.into(), term: Arc::new(term) }
    }

    pub fn constant(c: T) -> Self {
        Self::from_fn(format!("constant {c}"), move |_| c)
    }

    /// x_n = 1 for even n, 0 for odd n.
    pub fn alternating01() -> Self {
        Self::from_fn("alternating 0/1", |n| {
            if n % 2 == 0 {
                T::one()
            } else {
                T::zero()
            }
        })
    }

    /// y_n = 1 exactly at the perfect squares, 0 elsewhere.
    pub fn square_spikes() -> Self {
        Self::from_fn("perfect-square spikes", |n| {
            if is_perfect_square(n) {
                T::one()
            } else {
                T::zero()
            }
        })
    }

    pub fn at(&self, n: u64) -> T {
        (self.term)(n)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Deterministic membership test for a set of positive integers.
#[derive(Clone)]
pub struct IndexIndicator {
    label: String,
    contains: Arc<dyn Fn(u64) -> bool + Send + Sync>,
}

impl IndexIndicator {
    pub fn from_fn(
        label: impl Into<String>,
        contains: impl Fn(u64) -> bool + Send + Sync + 'static,
    ) -> Self {
        IndexIndicator { label: label.into(), contains: Arc::new(contains) }
    }

    pub fn empty() -> Self {
        Self::from_fn("empty", |_| false)
    }

    pub fn all() -> Self {
        Self::from_fn("all", |_| true)
    }

    pub fn perfect_squares() -> Self {
        Self::from_fn("perfect squares", is_perfect_square)
    }

    pub fn from_set(label: impl Into<String>, set: BTreeSet<u64>) -> Self {
        Self::from_fn(label, move |k| set.contains(&k))
    }

    pub fn contains(&self, k: u64) -> bool {
        (self.contains)(k)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// |{k ≤ N in the set}| / N.
pub fn natural_density_estimate<T: Real>(ind: &IndexIndicator, n_max: u64) -> T {
    assert!(n_max >= 1, "need a nonempty prefix");
    let count = (1..=n_max).filter(|&k| ind.contains(k)).count() as u64;
    T::count(count) / T::count(n_max)
}

/// Window (b_n, c_n] and weights s_m of a deferred weighted mean.
#[derive(Clone)]
pub struct DeferredScheme<T> {
    label: String,
    b: Arc<dyn Fn(u64) -> u64 + Send + Sync>,
    c: Arc<dyn Fn(u64) -> u64 + Send + Sync>,
    s: Arc<dyn Fn(u64) -> T + Send + Sync>,
}

impl<T: Real> DeferredScheme<T> {
    pub fn new(
        label: impl Into<String>,
        b: impl Fn(u64) -> u64 + Send + Sync + 'static,
        c: impl Fn(u64) -> u64 + Send + Sync + 'static,
        s: impl Fn(u64) -> T + Send + Sync + 'static,
    ) -> Self {
        DeferredScheme { label: label.into(), b: Arc::new(b), c: Arc::new(c), s: Arc::new(s) }
    }

    /// b_n = 0, c_n = n, s_m = 1: the plain Cesàro window.
    pub fn full() -> Self {
        Self::new("full", |_| 0, |n| n, |_| T::one())
    }

    /// b_n = ⌊n/2⌋, c_n = n, s_m = 1: defer the first half of the prefix.
    pub fn half_deferred() -> Self {
        Self::new("half-deferred:n/2", |n| n / 2, |n| n, |_| T::one())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn s(&self, m: u64) -> T {
        (self.s)(m)
    }

    /// The window (b_n, c_n] as an inclusive range, or a degenerate-window
    /// error when b_n ≥ c_n.
    pub fn window(&self, n: u64) -> Result<std::ops::RangeInclusive<u64>> {
        let (b, c) = ((self.b)(n), (self.c)(n));
        if b >= c {
            return Err(Error::DegenerateWindow { n });
        }
        Ok(b + 1..=c)
    }

    /// S_n = Σ_{m=b_n+1}^{c_n} s_m; errors when the window is empty or the
    /// weights sum to zero.
    pub fn window_mass(&self, n: u64) -> Result<T> {
        let mut total = T::zero();
        for m in self.window(n)? {
            total += self.s(m);
        }
        if total > T::zero() {
            Ok(total)
        } else {
            Err(Error::DegenerateWindow { n })
        }
    }

    /// Spot-check of c_n → ∞ on a sampled prefix: c_n ≥ √n for every
    /// sampled n ≥ 16 (documented heuristic, not a proof of divergence).
    pub fn growth_plausible(&self, sample: &[u64]) -> bool {
        sample
            .iter()
            .filter(|&&n| n >= 16)
            .all(|&n| (self.c)(n) as f64 >= (n as f64).sqrt())
    }
}

/// ρ_n = (1/S_n) Σ_{m=b_n+1}^{c_n} s_m x_m.
pub fn deferred_weighted_mean<T: Real>(
    seq: &RealSequence<T>,
    scheme: &DeferredScheme<T>,
    n: u64,
) -> Result<T> {
    let mass = scheme.window_mass(n)?;
    let mut acc = T::zero();
    for m in scheme.window(n)? {
        acc += scheme.s(m) * seq.at(m);
    }
    Ok(acc / mass)
}

/// Non-negative matrix with finitely supported rows. Each row is produced
/// as an explicit (column, entry) list together with a declared bound on
/// whatever mass lies beyond the listed entries.
#[derive(Clone)]
pub struct SummabilityMatrix<T> {
    label: String,
    row: Arc<dyn Fn(u64) -> Option<Vec<(u64, T)>> + Send + Sync>,
    row_tail: Arc<dyn Fn(u64) -> T + Send + Sync>,
}

impl<T: Real> SummabilityMatrix<T> {
    pub fn new(
        label: impl Into<String>,
        row: impl Fn(u64) -> Option<Vec<(u64, T)>> + Send + Sync + 'static,
        row_tail: impl Fn(u64) -> T + Send + Sync + 'static,
    ) -> Self {
        SummabilityMatrix { label: label.into(), row: Arc::new(row), row_tail: Arc::new(row_tail) }
    }

    /// a_{n,k} = 1 iff k = n.
    pub fn identity() -> Self {
        Self::new("identity", |n| Some(vec![(n, T::one())]), |_| T::zero())
    }

    /// a_{n,k} = 1/n for k ≤ n.
    pub fn cesaro() -> Self {
        Self::new(
            "cesaro",
            |n| {
                let w = T::one() / T::count(n);
                Some((1..=n).map(|k| (k, w)).collect())
            },
            |_| T::zero(),
        )
    }

    /// The zero matrix (every transform vanishes; row sums are 0).
    pub fn zero() -> Self {
        Self::new("zero", |_| Some(Vec::new()), |_| T::zero())
    }

    /// Build from an entry map and a support bound; rows without a declared
    /// support are reported as unbounded at use sites.
    pub fn from_entry_fn(
        label: impl Into<String>,
        entry: impl Fn(u64, u64) -> T + Send + Sync + 'static,
        support: impl Fn(u64) -> Option<u64> + Send + Sync + 'static,
        row_tail: impl Fn(u64) -> T + Send + Sync + 'static,
    ) -> Self {
        Self::new(
            label,
            move |n| support(n).map(|kmax| (1..=kmax).map(|k| (k, entry(n, k))).collect()),
            row_tail,
        )
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn row(&self, n: u64) -> Result<Vec<(u64, T)>> {
        (self.row)(n).ok_or(Error::UnboundedRow { n })
    }

    pub fn row_tail(&self, n: u64) -> T {
        (self.row_tail)(n)
    }
}

/// (Ax)_n over the declared row support; the error bound is the declared
/// row tail scaled by the largest |x_k| seen on the support.
pub fn matrix_row_transform<T: Real>(
    a: &SummabilityMatrix<T>,
    seq: &RealSequence<T>,
    n: u64,
) -> Result<Certified<T>> {
    let row = a.row(n)?;
    let mut acc = T::zero();
    let mut xmax = T::zero();
    let terms = row.len();
    for (k, w) in row {
        let xk = seq.at(k);
        xmax = xmax.max(xk.abs());
        acc += w * xk;
    }
    Ok(Certified::new(acc, a.row_tail(n) * xmax, terms))
}

/// Deferred weighted A-density of a set: (1/S_n) Σ_{m∈window} s_m Σ_{k∈set}
/// a_{m,k}, truncated at the declared row supports.
pub fn dwa_density<T: Real>(
    ind: &IndexIndicator,
    a: &SummabilityMatrix<T>,
    scheme: &DeferredScheme<T>,
    n: u64,
) -> Result<T> {
    let mass = scheme.window_mass(n)?;
    let mut acc = T::zero();
    for m in scheme.window(n)? {
        let sm = scheme.s(m);
        let mut row_acc = T::zero();
        for (k, w) in a.row(m)? {
            if ind.contains(k) {
                row_acc += w;
            }
        }
        acc += sm * row_acc;
    }
    Ok(acc / mass)
}

/// The three deferred-weighted regularity residuals of a matrix at index n:
///
/// * V1 = (1/S_n) Σ_k |Σ_{m∈window} s_m a_{m,k}|, which must stay bounded
///   over n;
/// * V2 = max_{k ≤ k_probe} (1/S_n) Σ_{m∈window} s_m a_{m,k}, which must
///   vanish per fixed column;
/// * V3 = |(1/S_n) Σ_{m∈window} Σ_k s_m a_{m,k} − 1|, which must vanish.
///
/// Only the first k_probe columns are probed for V2; V1 and V3 run over the
/// full declared supports.
pub fn dw_regularity_residuals<T: Real>(
    a: &SummabilityMatrix<T>,
    scheme: &DeferredScheme<T>,
    n: u64,
    k_probe: u64,
) -> Result<(T, T, T)> {
    let mass = scheme.window_mass(n)?;
    let mut col_sums: Vec<T> = Vec::new();
    for m in scheme.window(n)? {
        let sm = scheme.s(m);
        for (k, w) in a.row(m)? {
            let idx = k as usize;
            if col_sums.len() <= idx {
                col_sums.resize(idx + 1, T::zero());
            }
            col_sums[idx] += sm * w;
        }
    }
    let mut v1 = T::zero();
    let mut total = T::zero();
    for &cs in &col_sums {
        v1 += cs.abs();
        total += cs;
    }
    let v2 = col_sums
        .iter()
        .take(k_probe as usize + 1)
        .skip(1)
        .fold(T::zero(), |acc, &cs| acc.max(cs));
    Ok((v1 / mass, v2 / mass, (total / mass - T::one()).abs()))
}

/// Coefficients p_n ≥ 0 (p_1 > 0) of a power-series method together with
/// its radius and a hard cap on the number of terms used per evaluation.
#[derive(Clone)]
pub struct PowerSeriesMethod<T> {
    label: String,
    coeff: Arc<dyn Fn(u64) -> T + Send + Sync>,
    radius: T,
    series_cap: usize,
}

impl<T: Real> PowerSeriesMethod<T> {
    pub fn new(
        label: impl Into<String>,
        coeff: impl Fn(u64) -> T + Send + Sync + 'static,
        radius: T,
        series_cap: usize,
    ) -> Result<Self> {
        let method = PowerSeriesMethod {
            label: label.into(),
            coeff: Arc::new(coeff),
            radius,
            series_cap,
        };
        if !(radius > T::zero()) {
            return Err(Error::ParameterDomain {
                name: "radius",
                detail: format!("{radius} is not positive"),
            });
        }
        if !(method.coeff(1) > T::zero()) {
            return Err(Error::ParameterDomain {
                name: "pn",
                detail: "first coefficient must be positive".to_string(),
            });
        }
        // spot-check nonnegativity on a short prefix
        if let Some(bad) = (1..=64).find(|&n| method.coeff(n) < T::zero()) {
            return Err(Error::ParameterDomain {
                name: "pn",
                detail: format!("coefficient at n={bad} is negative"),
            });
        }
        Ok(method)
    }

    /// p_n = 1 with p(u) = 1/(1−u), R = 1: the Abel method.
    pub fn ones() -> Self {
        Self::new("ones", |_| T::one(), T::one(), DEFAULT_SERIES_CAP).expect("valid preset")
    }

    /// p_n = ratio^{n−1} with R = 1/ratio.
    pub fn geometric(ratio: T) -> Result<Self> {
        if !(ratio > T::zero()) {
            return Err(Error::ParameterDomain {
                name: "pn",
                detail: format!("geometric ratio {ratio} is not positive"),
            });
        }
        Self::new(
            format!("geometric:{ratio}"),
            move |n| ratio.powi((n - 1) as i32),
            T::one() / ratio,
            DEFAULT_SERIES_CAP,
        )
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn coeff(&self, n: u64) -> T {
        (self.coeff)(n)
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn series_cap(&self) -> usize {
        self.series_cap
    }

    fn check_u(&self, u: T) -> Result<()> {
        if u > T::zero() && u < self.radius {
            Ok(())
        } else {
            Err(Error::ParameterDomain {
                name: "u",
                detail: format!("{u} outside (0, {})", self.radius),
            })
        }
    }

    /// Terms needed so the geometric envelope (u/R)^N falls below the term
    /// cutoff, clamped to the series cap. With R = ∞ the envelope gives no
    /// information and the cap itself is used.
    pub fn terms_for(&self, u: T) -> usize {
        if self.radius.is_infinite() {
            return self.series_cap;
        }
        let ratio = (u / self.radius).to_f64().unwrap_or(1.0);
        if !(ratio > 0.0 && ratio < 1.0) {
            return self.series_cap;
        }
        let n = (SERIES_TERM_CUTOFF.ln() / ratio.ln()).ceil();
        (n as usize).clamp(8, self.series_cap)
    }

    /// Truncated p(u) = Σ_{n≤N} p_n u^{n−1} with the term count used. The
    /// partial sums are nondecreasing (p_n ≥ 0); if the final term has not
    /// decayed below 10⁻⁹ of the total, the declared radius is not doing
    /// its job and a divergence error is raised.
    pub fn p_eval(&self, u: T) -> Result<(T, usize)> {
        self.check_u(u)?;
        let n_terms = self.terms_for(u);
        let mut sum = T::zero();
        let mut upow = T::one();
        let mut last = T::zero();
        for n in 1..=n_terms {
            last = self.coeff(n as u64) * upow;
            sum += last;
            upow = upow * u;
        }
        let cutoff = T::num(1e-9) * sum.max(T::min_positive_value());
        if !(last <= cutoff) {
            return Err(Error::Divergence { u: format!("{u}"), terms: n_terms });
        }
        Ok((sum, n_terms))
    }
}

/// (1/p(u)) Σ_{n≤N} x_n p_n u^{n−1}. The error bound scales the geometric
/// tail estimate from the last computed coefficient term by the largest
/// |x_n| observed (a surrogate for the caller-asserted bound on the
/// sequence).
pub fn power_series_transform<T: Real>(
    seq: &RealSequence<T>,
    method: &PowerSeriesMethod<T>,
    u: T,
) -> Result<Certified<T>> {
    method.check_u(u)?;
    let n_terms = method.terms_for(u);
    let mut num = T::zero();
    let mut den = T::zero();
    let mut upow = T::one();
    let mut xmax = T::zero();
    let mut last = T::zero();
    for n in 1..=n_terms {
        last = method.coeff(n as u64) * upow;
        let xn = seq.at(n as u64);
        xmax = xmax.max(xn.abs());
        num += xn * last;
        den += last;
        upow = upow * u;
    }
    let cutoff = T::num(1e-9) * den.max(T::min_positive_value());
    if !(last <= cutoff) {
        return Err(Error::Divergence { u: format!("{u}"), terms: n_terms });
    }
    let tail = if method.radius().is_finite() {
        let r = u / method.radius();
        last * r / (T::one() - r)
    } else {
        // no geometric envelope; report the last term as the granularity
        last
    };
    Ok(Certified::new(num / den, xmax * tail / den, n_terms))
}

/// p_n u^{n−1} / p(u): the regularity residual of the method at row n.
pub fn power_series_regularity_residual<T: Real>(
    method: &PowerSeriesMethod<T>,
    n: u64,
    u: T,
) -> Result<T> {
    let (den, _) = method.p_eval(u)?;
    Ok(method.coeff(n) * u.powi((n - 1) as i32) / den)
}

/// Last sample and the gap to its predecessor, as a plain finite-data
/// stand-in for lim_{u→R⁻}; no extrapolation beyond the grid is claimed.
pub fn limit_extrapolate<T: Real>(samples: &[(T, T)]) -> Result<Certified<T>> {
    if samples.len() < 3 {
        return Err(Error::InsufficientSamples { need: 3, got: samples.len() });
    }
    let last = samples[samples.len() - 1].1;
    let prev = samples[samples.len() - 2].1;
    Ok(Certified::new(last, (last - prev).abs(), samples.len()))
}

/// u_j = 1 − 2^{−j} for j = j_min..=j_max: the default approach grid for
/// methods with radius 1.
pub fn dyadic_u_grid<T: Real>(j_min: u32, j_max: u32) -> Vec<T> {
    assert!(j_min <= j_max, "empty dyadic grid");
    (j_min..=j_max)
        .map(|j| T::one() - T::num(0.5).powi(j as i32))
        .collect()
}

/// count uniform points on [0, 1] inclusive of both endpoints.
pub fn uniform_grid<T: Real>(count: usize) -> Vec<T> {
    assert!(count >= 2, "need at least the endpoints");
    let step = T::one() / T::count(count as u64 - 1);
    (0..count)
        .map(|i| if i + 1 == count { T::one() } else { T::count(i as u64) * step })
        .collect()
}

//! Convergence harness tying the operator family to the summability layer:
//! grid sup-norms and moduli of continuity, the plain and square-perturbed
//! families, deferred weighted A-statistical convergence reports with
//! proof-set bookkeeping, modulus-based rate bounds, and power-series
//! summability reports.
//!
//! All sup-norms here are grid surrogates: the maximum over a supplied
//! ordered grid in [0, 1]. Every report records the grid size so thresholds
//! stay auditable.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::sync::Arc;

use crate::certified::Certified;
use crate::error::{Error, Result};
use crate::operator::{OperatorEvaluator, OperatorParams, ParamSchedule, TestFunction};
use crate::qcalc::{q_integer, QBase};
use crate::real::Real;
use crate::summability::{
    dwa_density, is_perfect_square, limit_extrapolate, DeferredScheme, IndexIndicator,
    PowerSeriesMethod, SummabilityMatrix,
};

/// Residual threshold for the informational "premise satisfied" report
/// lines. Limits are not decidable from finite data; this only classifies
/// the largest sampled index.
pub fn premise_tol<T: Real>() -> T {
    T::num(1e-3)
}

/// Grid surrogate of the sup-norm: max over the grid of |f(x)|.
pub fn sup_norm<T: Real>(f: &TestFunction<T>, grid: &[T]) -> T {
    assert!(!grid.is_empty(), "need a nonempty grid");
    grid.iter().fold(T::zero(), |m, &x| m.max(f.eval(x).abs()))
}

/// Grid surrogate of the modulus of continuity: max of |g(s) − g(x)| over
/// grid pairs with |s − x| ≤ delta. Non-decreasing in delta; subadditive up
/// to grid resolution. The grid must be sorted ascending.
pub fn modulus_of_continuity<T: Real>(g: &TestFunction<T>, delta: T, grid: &[T]) -> T {
    assert!(delta > T::zero(), "modulus needs delta > 0");
    assert!(!grid.is_empty(), "need a nonempty grid");
    let vals: Vec<T> = grid.iter().map(|&x| g.eval(x)).collect();
    let mut best = T::zero();
    for i in 0..grid.len() {
        for j in (i + 1)..grid.len() {
            if grid[j] - grid[i] > delta {
                break;
            }
            best = best.max((vals[j] - vals[i]).abs());
        }
    }
    best
}

/// Residual summary of one family member over a grid: sup distances of the
/// operator images of e0, e1, e2 and g from the functions themselves, plus
/// the sup of the centered second moment (the rate driver).
#[derive(Debug, Clone, Copy)]
pub struct FamilyResiduals<T> {
    pub res_e: [T; 3],
    pub res_g: T,
    /// sup over the grid of L_n applied to (s − x)², evaluated at x.
    pub mu2: T,
}

/// A schedule-driven sequence of operators, optionally perturbed by the
/// factor 2 at perfect-square indices (the family that breaks classical
/// Korovkin convergence while keeping the power-series one).
#[derive(Clone)]
pub struct OperatorFamily<T> {
    label: &'static str,
    schedule: ParamSchedule<T>,
    r: usize,
    tail_tol: T,
    perturbed: bool,
}

impl<T: Real> OperatorFamily<T> {
    pub fn plain(schedule: ParamSchedule<T>, r: usize, tail_tol: T) -> Self {
        OperatorFamily { label: "R", schedule, r, tail_tol, perturbed: false }
    }

    pub fn perturbed(schedule: ParamSchedule<T>, r: usize, tail_tol: T) -> Self {
        OperatorFamily { label: "H", schedule, r, tail_tol, perturbed: true }
    }

    pub fn label(&self) -> &'static str {
        self.label
    }

    pub fn schedule(&self) -> &ParamSchedule<T> {
        &self.schedule
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn tail_tol(&self) -> T {
        self.tail_tol
    }

    pub fn is_perturbed(&self) -> bool {
        self.perturbed
    }

    /// Output scale of member n: 2 at perfect squares when perturbed.
    pub fn factor(&self, n: u64) -> T {
        if self.perturbed && is_perfect_square(n) {
            T::num(2.0)
        } else {
            T::one()
        }
    }

    pub fn params_at(&self, n: u64) -> Result<OperatorParams<T>> {
        self.schedule.params_at(n, self.r, self.tail_tol)
    }

    /// One shared-table pass over the grid computing every residual of
    /// member n at once.
    pub fn residuals_at(&self, n: u64, g: &TestFunction<T>, grid: &[T]) -> Result<FamilyResiduals<T>> {
        assert!(!grid.is_empty(), "need a nonempty grid");
        let params = self.params_at(n)?;
        let functions = vec![
            TestFunction::e0(),
            TestFunction::e1(),
            TestFunction::e2(),
            g.clone(),
        ];
        let mut ev = OperatorEvaluator::new(params, functions);
        let factor = self.factor(n);
        let mut res = FamilyResiduals {
            res_e: [T::zero(); 3],
            res_g: T::zero(),
            mu2: T::neg_infinity(),
        };
        for &x in grid {
            let vals = ev.eval_all(x)?;
            let v0 = factor * vals[0].value;
            let v1 = factor * vals[1].value;
            let v2 = factor * vals[2].value;
            let vg = factor * vals[3].value;
            res.res_e[0] = res.res_e[0].max((v0 - T::one()).abs());
            res.res_e[1] = res.res_e[1].max((v1 - x).abs());
            res.res_e[2] = res.res_e[2].max((v2 - x * x).abs());
            res.res_g = res.res_g.max((vg - g.eval(x)).abs());
            res.mu2 = res.mu2.max(factor * (vals[2].value - T::num(2.0) * x * vals[1].value + x * x));
        }
        Ok(res)
    }
}

/// Positive non-increasing gauge sequence γ_n used to scale observed decay.
#[derive(Clone)]
pub struct RateSequence<T> {
    label: String,
    gamma: Arc<dyn Fn(u64) -> T + Send + Sync>,
}

impl<T: Real> RateSequence<T> {
    /// The caller asserts positivity and monotonicity; sampled values are
    /// reported, not validated.
    pub fn new(label: impl Into<String>, gamma: impl Fn(u64) -> T + Send + Sync + 'static) -> Self {
        RateSequence { label: label.into(), gamma: Arc::new(gamma) }
    }

    /// γ_n = n^{−1/2}, the default gauge.
    pub fn inverse_sqrt() -> Self {
        Self::new("1/sqrt(n)", |n| T::one() / T::count(n).sqrt())
    }

    pub fn at(&self, n: u64) -> T {
        (self.gamma)(n)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Row key of a report table: operator index or evaluation point of the
/// power-series transform.
#[derive(Debug, Clone, Copy)]
pub enum RowIndex<T> {
    N(u64),
    U(T),
}

impl<T: Real> RowIndex<T> {
    fn to_field(self) -> String {
        match self {
            RowIndex::N(n) => n.to_string(),
            RowIndex::U(u) => sci(u),
        }
    }
}

/// One table row. For per-n rows the residual columns are sup-norm
/// distances and `value` is a running set density; for per-u rows they are
/// the transformed residuals T_i(u) and `value` is T_g(u).
#[derive(Debug, Clone, Copy)]
pub struct ReportRow<T> {
    pub index: RowIndex<T>,
    pub res_e0: T,
    pub res_e1: T,
    pub res_e2: T,
    pub res_g: T,
    pub bound: T,
    pub value: T,
    pub verdict: bool,
}

/// Density of one bookkeeping set at the two ends of the sampled range.
#[derive(Debug, Clone, Copy)]
pub struct SetDensity<T> {
    pub set: &'static str,
    pub at_start: T,
    pub at_end: T,
}

/// Observed decay against the gauge sequence at one sampled index.
#[derive(Debug, Clone, Copy)]
pub struct RateSample<T> {
    pub n: u64,
    pub gamma: T,
    pub observed: T,
    pub ratio: T,
}

/// Everything a convergence experiment reports: the per-index table, set
/// densities, inclusion bookkeeping, rate samples, limit stand-ins, and an
/// overall verdict whose rule is spelled out in `verdict_rule`.
#[derive(Debug, Clone)]
pub struct ConvergenceReport<T> {
    pub title: String,
    pub family: String,
    pub g_label: String,
    pub grid_points: usize,
    pub tail_tol: T,
    pub value_label: &'static str,
    pub verdict_rule: String,
    pub eps: Option<T>,
    pub eps_prime: Option<T>,
    pub delta: Option<T>,
    pub rows: Vec<ReportRow<T>>,
    pub set_densities: Vec<SetDensity<T>>,
    pub inclusion_violations: Option<usize>,
    pub rate_samples: Vec<RateSample<T>>,
    pub extrapolated: Vec<(String, Certified<T>)>,
    pub gauge_ratio_max: Option<T>,
    pub premise_status: Vec<String>,
    pub notes: Vec<String>,
    pub pass: bool,
}

fn sci<T: Real>(v: T) -> String {
    format!("{v:.16e}")
}

impl<T: Real> ConvergenceReport<T> {
    /// Comma-separated table, one row per sampled index, 17 significant
    /// digits per numeric field.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "index,residual_e0,residual_e1,residual_e2,residual_g,bound,density_or_transform,verdict\n",
        );
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                row.index.to_field(),
                sci(row.res_e0),
                sci(row.res_e1),
                sci(row.res_e2),
                sci(row.res_g),
                sci(row.bound),
                sci(row.value),
                if row.verdict { "pass" } else { "fail" },
            );
        }
        out
    }

    /// Keyed-text layout of everything but the row table.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "title: {}", self.title);
        let _ = writeln!(out, "family: {}", self.family);
        let _ = writeln!(out, "g: {}", self.g_label);
        let _ = writeln!(out, "grid_points: {}", self.grid_points);
        let _ = writeln!(out, "tail_tol: {}", sci(self.tail_tol));
        if let Some(eps) = self.eps {
            let _ = writeln!(out, "eps: {}", sci(eps));
        }
        if let Some(ep) = self.eps_prime {
            let _ = writeln!(out, "eps_prime: {}", sci(ep));
        }
        if let Some(d) = self.delta {
            let _ = writeln!(out, "delta: {}", sci(d));
        }
        for line in &self.premise_status {
            let _ = writeln!(out, "premise: {line}");
        }
        if !self.set_densities.is_empty() {
            let _ = writeln!(out, "set_densities:");
            for sd in &self.set_densities {
                let _ = writeln!(
                    out,
                    "  {}: start={} end={}",
                    sd.set,
                    sci(sd.at_start),
                    sci(sd.at_end)
                );
            }
        }
        if let Some(v) = self.inclusion_violations {
            let _ = writeln!(out, "inclusion_violations: {v}");
        }
        if !self.rate_samples.is_empty() {
            let _ = writeln!(out, "rate_samples (gauge 1/sqrt(n)):");
            for rs in &self.rate_samples {
                let _ = writeln!(
                    out,
                    "  n={} gamma={} observed={} ratio={}",
                    rs.n,
                    sci(rs.gamma),
                    sci(rs.observed),
                    sci(rs.ratio)
                );
            }
        }
        if !self.extrapolated.is_empty() {
            let _ = writeln!(out, "limit_stand_ins (last sample, gap to previous):");
            for (label, c) in &self.extrapolated {
                let _ = writeln!(
                    out,
                    "  {}: value={} error_bound={} samples={}",
                    label,
                    sci(c.value),
                    sci(c.error_bound),
                    c.terms
                );
            }
        }
        if let Some(gm) = self.gauge_ratio_max {
            let _ = writeln!(out, "gauge_ratio_max: {}", sci(gm));
        }
        for note in &self.notes {
            let _ = writeln!(out, "note: {note}");
        }
        let _ = writeln!(out, "rows: {} (see csv table)", self.rows.len());
        let _ = writeln!(out, "verdict_rule: {}", self.verdict_rule);
        let _ = writeln!(out, "pass: {}", self.pass);
        out
    }
}

/// Largest delta in the dyadic ladder 1, 1/2, 1/4, … whose grid modulus of
/// continuity is at most eps. Terminates because the modulus vanishes once
/// delta falls below the smallest grid gap.
fn delta_for<T: Real>(g: &TestFunction<T>, eps: T, grid: &[T]) -> T {
    let mut d = T::one();
    for _ in 0..64 {
        if modulus_of_continuity(g, d, grid) <= eps {
            return d;
        }
        d = d * T::num(0.5);
    }
    d
}

fn nonempty_grid<T: Real>(grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        Err(Error::ParameterDomain { name: "grid", detail: "empty evaluation grid".to_string() })
    } else {
        Ok(())
    }
}

/// Deferred weighted A-statistical convergence check over n in `n_range`
/// (every index in the range is sampled).
///
/// Per n it computes the residual norms of e0, e1, e2 and g, then forms the
/// bookkeeping sets of the convergence argument:
///
/// * U1 = {n : res_g ≥ eps'}, the conclusion set, against
///   U2 = {n : (‖g‖ + 2‖g‖m²/δ² + eps)·res_e0 ≥ (eps'−eps)/3},
///   U3 = {n : (2‖g‖/δ²)·res_e2 ≥ (eps'−eps)/3},
///   U4 = {n : (4‖g‖m/δ²)·res_e1 ≥ (eps'−eps)/3};
/// * V1 = {n : res_e1 ≥ eps} against V2 = {n : 1 − α_n^{(1)} ≥ eps};
/// * W1 = {n : res_e2 ≥ eps} against W2 = {n : 1 − α_n^{(1)} > eps/4} and
///   W3 = {n : α_n^{(1)}/[n]_{q_n} > eps/2}.
///
/// The report carries the inclusion counts (U1 ⊆ U2∪U3∪U4, V1 ⊆ V2,
/// W1 ⊆ W2∪W3), the deferred weighted A-densities of every set at both
/// range endpoints, a per-row check of the pointwise estimate
/// ‖L_n(g)−g‖ ≤ eps + (‖g‖+2‖g‖m²/δ²+eps)‖L_n(1)−1‖ + (2‖g‖/δ²)‖L_n(e2)−x²‖
/// + (4‖g‖m/δ²)‖L_n(e1)−x‖ with slack 4‖g‖·tail_tol, and rate samples of
/// the conclusion-set density against γ_n = n^{−1/2}.
///
/// δ is the largest dyadic value with grid modulus ≤ eps. The `value`
/// column is the running density of U1 up to the row's n. Memberships are
/// only known inside the sampled range; density sums never reach outside it
/// for the bundled matrices and schemes (column support ≤ n). The inclusion
/// chain is the proof's bookkeeping for the plain family; for the perturbed
/// family violations are expected and reported as such.
///
/// Overall pass requires zero inclusion violations and every row bound.
#[allow(clippy::too_many_arguments)]
pub fn dwa_korovkin_report<T: Real>(
    family: &OperatorFamily<T>,
    a: &SummabilityMatrix<T>,
    scheme: &DeferredScheme<T>,
    g: &TestFunction<T>,
    eps: T,
    eps_prime: T,
    n_range: RangeInclusive<u64>,
    grid: &[T],
) -> Result<ConvergenceReport<T>> {
    if !(eps > T::zero()) {
        return Err(Error::ParameterDomain { name: "eps", detail: format!("{eps} not > 0") });
    }
    if !(eps_prime > eps) {
        return Err(Error::ParameterDomain {
            name: "eps_prime",
            detail: format!("{eps_prime} must exceed eps = {eps}"),
        });
    }
    let (n_start, n_end) = (*n_range.start(), *n_range.end());
    if n_start == 0 || n_end < n_start {
        return Err(Error::ParameterDomain {
            name: "n_range",
            detail: format!("{n_start}..={n_end} is not a range of indices >= 1"),
        });
    }
    nonempty_grid(grid)?;

    let gnorm = sup_norm(g, grid);
    let m = grid.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()));
    let delta = delta_for(g, eps, grid);
    let tau = family.tail_tol();
    let third = (eps_prime - eps) / T::num(3.0);
    let c0 = gnorm + T::num(2.0) * gnorm * m * m / (delta * delta) + eps;
    let c2 = T::num(2.0) * gnorm / (delta * delta);
    let c1 = T::num(4.0) * gnorm * m / (delta * delta);
    let slack = T::num(4.0) * gnorm * tau;

    let ns: Vec<u64> = (n_start..=n_end).collect();
    let mut residuals = Vec::with_capacity(ns.len());
    for &n in &ns {
        residuals.push(family.residuals_at(n, g, grid)?);
    }

    let mut members: [BTreeSet<u64>; 9] = Default::default();
    let set_labels = ["U1", "U2", "U3", "U4", "V1", "V2", "W1", "W2", "W3"];
    let mut violations = 0usize;
    for (&n, r) in ns.iter().zip(&residuals) {
        let alpha1 = family.schedule().alpha(n, 1);
        let qn = QBase::new(family.schedule().q(n))?;
        let gap1 = T::one() - alpha1;
        let in_set = [
            r.res_g >= eps_prime,
            c0 * r.res_e[0] >= third,
            c2 * r.res_e[2] >= third,
            c1 * r.res_e[1] >= third,
            r.res_e[1] >= eps,
            gap1 >= eps,
            r.res_e[2] >= eps,
            gap1 > eps / T::num(4.0),
            alpha1 / q_integer(n, qn) > eps / T::num(2.0),
        ];
        for (set, &hit) in members.iter_mut().zip(&in_set) {
            if hit {
                set.insert(n);
            }
        }
        if in_set[0] && !(in_set[1] || in_set[2] || in_set[3]) {
            violations += 1;
        }
        if in_set[4] && !in_set[5] {
            violations += 1;
        }
        if in_set[6] && !(in_set[7] || in_set[8]) {
            violations += 1;
        }
    }

    let indicators: Vec<IndexIndicator> = members
        .iter()
        .zip(&set_labels)
        .map(|(set, label)| IndexIndicator::from_set(*label, set.clone()))
        .collect();

    let mut rows = Vec::with_capacity(ns.len());
    let mut all_bounds_hold = true;
    for (&n, r) in ns.iter().zip(&residuals) {
        let bound = eps + c0 * r.res_e[0] + c2 * r.res_e[2] + c1 * r.res_e[1];
        let verdict = r.res_g <= bound + slack;
        all_bounds_hold &= verdict;
        let density = dwa_density(&indicators[0], a, scheme, n)?;
        rows.push(ReportRow {
            index: RowIndex::N(n),
            res_e0: r.res_e[0],
            res_e1: r.res_e[1],
            res_e2: r.res_e[2],
            res_g: r.res_g,
            bound,
            value: density,
            verdict,
        });
    }

    let mut set_densities = Vec::with_capacity(9);
    for (ind, label) in indicators.iter().zip(&set_labels) {
        set_densities.push(SetDensity {
            set: label,
            at_start: dwa_density(ind, a, scheme, n_start)?,
            at_end: dwa_density(ind, a, scheme, n_end)?,
        });
    }

    let gauge = RateSequence::inverse_sqrt();
    let stride = (ns.len() / 8).max(1);
    let mut rate_samples = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        if i % stride == 0 || i + 1 == rows.len() {
            let n = ns[i];
            let gamma = gauge.at(n);
            rate_samples.push(RateSample { n, gamma, observed: row.value, ratio: row.value / gamma });
        }
    }

    let tol = premise_tol::<T>();
    let last = residuals.last().expect("nonempty range");
    let mut premise_status = Vec::new();
    for (i, &res) in last.res_e.iter().enumerate() {
        premise_status.push(format!(
            "e{i} residual at n={n_end}: {} (<= {}: {})",
            sci(res),
            sci(tol),
            if res <= tol { "yes" } else { "no" }
        ));
    }
    premise_status.push(format!(
        "conclusion residual for g at n={n_end}: {} (<= {}: {})",
        sci(last.res_g),
        sci(tol),
        if last.res_g <= tol { "yes" } else { "no" }
    ));

    let pass = violations == 0 && all_bounds_hold;
    Ok(ConvergenceReport {
        title: format!(
            "deferred weighted A-statistical convergence check (A={}, scheme={})",
            a.label(),
            scheme.label()
        ),
        family: format!("{} ({})", family.label(), family.schedule().label()),
        g_label: g.label().to_string(),
        grid_points: grid.len(),
        tail_tol: tau,
        value_label: "density",
        verdict_rule: format!(
            "row: residual_g <= bound + 4*||g||*tail_tol (slack {}); overall: zero inclusion violations and all rows",
            sci(slack)
        ),
        eps: Some(eps),
        eps_prime: Some(eps_prime),
        delta: Some(delta),
        rows,
        set_densities,
        inclusion_violations: Some(violations),
        rate_samples,
        extrapolated: Vec::new(),
        gauge_ratio_max: None,
        premise_status,
        notes: vec![
            "residual norms and moduli are grid surrogates".to_string(),
            "value column: running deferred weighted A-density of the conclusion set U1".to_string(),
        ],
        pass,
    })
}

/// Modulus-based rate bound
/// B_n = (‖g‖ + ω(g; δ))·‖L_n(1) − 1‖ + 2·ω(g; δ) with δ = √(sup centered
/// second moment). The measured grid residual satisfies
/// ‖L_n(g) − g‖ ≤ B_n + certified truncation slack.
pub fn rate_bound<T: Real>(
    g: &TestFunction<T>,
    family: &OperatorFamily<T>,
    n: u64,
    grid: &[T],
) -> Result<T> {
    nonempty_grid(grid)?;
    let res = family.residuals_at(n, g, grid)?;
    let delta = res.mu2.max(T::zero()).sqrt();
    let omega = if delta > T::zero() {
        modulus_of_continuity(g, delta, grid)
    } else {
        T::zero()
    };
    Ok((sup_norm(g, grid) + omega) * res.res_e[0] + T::num(2.0) * omega)
}

/// Power-series summability check: with residual norms frozen per n up to
/// n_cap, evaluates T_i(u) = (1/p(u))·Σ_{n ≤ n_cap} res_i(n)·p_n·u^{n−1}
/// for i = 0, 1, 2 and the same transform of the g-residual, at every u in
/// `u_grid` (taken in the given order; the monotone verdict follows it).
///
/// The gauge defaults to φ(u) = 1 − u/R for finite R (constant 1
/// otherwise); `gauge_ratio_max` reports max T_g(u)/φ(u) as the bounded-
/// ratio rendering of the growth comparison.
pub fn psummability_korovkin_report<T: Real>(
    family: &OperatorFamily<T>,
    method: &PowerSeriesMethod<T>,
    g: &TestFunction<T>,
    u_grid: &[T],
    n_cap: u64,
    grid: &[T],
) -> Result<ConvergenceReport<T>> {
    let radius = method.radius();
    let gauge = move |u: T| {
        if radius.is_finite() {
            T::one() - u / radius
        } else {
            T::one()
        }
    };
    psummability_korovkin_report_with_gauge(family, method, g, u_grid, n_cap, grid, &gauge)
}

/// As [`psummability_korovkin_report`] with a caller-supplied positive
/// gauge φ(u).
pub fn psummability_korovkin_report_with_gauge<T: Real>(
    family: &OperatorFamily<T>,
    method: &PowerSeriesMethod<T>,
    g: &TestFunction<T>,
    u_grid: &[T],
    n_cap: u64,
    grid: &[T],
    gauge: &dyn Fn(T) -> T,
) -> Result<ConvergenceReport<T>> {
    if u_grid.is_empty() {
        return Err(Error::ParameterDomain {
            name: "u_grid",
            detail: "empty transform grid".to_string(),
        });
    }
    if n_cap == 0 {
        return Err(Error::ParameterDomain {
            name: "n_cap",
            detail: "inner series needs at least one term".to_string(),
        });
    }
    nonempty_grid(grid)?;

    let gnorm = sup_norm(g, grid);
    let tau = family.tail_tol();
    // blanket residual envelope: ||L_n g|| <= factor*||g||*(1+tau), so the
    // g-residual never exceeds 3*||g||*(1+tau) for either family
    let envelope = T::num(3.0) * gnorm * (T::one() + tau);

    let mut residuals = Vec::with_capacity(n_cap as usize);
    for n in 1..=n_cap {
        residuals.push(family.residuals_at(n, g, grid)?);
    }

    let mut rows: Vec<ReportRow<T>> = Vec::with_capacity(u_grid.len());
    let mut all_rows_hold = true;
    let mut gauge_ratio_max = T::neg_infinity();
    for &u in u_grid {
        let (den, _) = method.p_eval(u)?;
        let mut t = [T::zero(); 4];
        let mut partial = T::zero();
        let mut upow = T::one();
        for (i, r) in residuals.iter().enumerate() {
            let w = method.coeff(i as u64 + 1) * upow;
            t[0] += r.res_e[0] * w;
            t[1] += r.res_e[1] * w;
            t[2] += r.res_e[2] * w;
            t[3] += r.res_g * w;
            partial += w;
            upow = upow * u;
        }
        for v in &mut t {
            *v = *v / den;
        }
        let tail_mass = (den - partial).max(T::zero());
        let bound = envelope * tail_mass / den;
        let verdict = match rows.last() {
            None => true,
            Some(prev) => t[3] <= prev.value * (T::one() + T::num(1e-12)) + T::num(1e-15),
        };
        all_rows_hold &= verdict;
        gauge_ratio_max = gauge_ratio_max.max(t[3] / gauge(u));
        rows.push(ReportRow {
            index: RowIndex::U(u),
            res_e0: t[0],
            res_e1: t[1],
            res_e2: t[2],
            res_g: t[3],
            bound,
            value: t[3],
            verdict,
        });
    }

    let tol = premise_tol::<T>();
    let last = rows.last().expect("nonempty u_grid");
    let last_u = u_grid[u_grid.len() - 1];
    let premise_vals = [last.res_e0, last.res_e1, last.res_e2];
    let mut premise_status = Vec::new();
    let mut premise_ok = true;
    for (i, &v) in premise_vals.iter().enumerate() {
        let ok = v <= tol;
        premise_ok &= ok;
        premise_status.push(format!(
            "transform of e{i} residual at u={}: {} (<= {}: {})",
            sci(last_u),
            sci(v),
            sci(tol),
            if ok { "yes" } else { "no" }
        ));
    }
    premise_status.push(format!(
        "transform of g residual at u={}: {} (<= {}: {})",
        sci(last_u),
        sci(last.res_g),
        sci(tol),
        if last.res_g <= tol { "yes" } else { "no" }
    ));

    let mut extrapolated = Vec::new();
    let labels = ["T_0", "T_1", "T_2", "T_g"];
    let mut notes = vec![
        format!(
            "inner sums truncated at n_cap={n_cap}; bound column bounds the omitted tail of the g transform via the envelope {}",
            sci(envelope)
        ),
        "residual norms are grid surrogates".to_string(),
    ];
    for (i, label) in labels.iter().enumerate() {
        let samples: Vec<(T, T)> = rows
            .iter()
            .zip(u_grid)
            .map(|(row, &u)| {
                let v = [row.res_e0, row.res_e1, row.res_e2, row.res_g][i];
                (u, v)
            })
            .collect();
        match limit_extrapolate(&samples) {
            Ok(c) => extrapolated.push((label.to_string(), c)),
            Err(_) => {
                notes.push(format!("{label}: fewer than 3 samples, no limit stand-in"));
            }
        }
    }

    let pass = all_rows_hold && premise_ok;
    Ok(ConvergenceReport {
        title: format!("power series summability convergence check (method={})", method.label()),
        family: format!("{} ({})", family.label(), family.schedule().label()),
        g_label: g.label().to_string(),
        grid_points: grid.len(),
        tail_tol: tau,
        value_label: "transform_g",
        verdict_rule:
            "row: T_g non-increasing along the u rows (relative tolerance 1e-12); overall: all rows and premise transforms <= 1e-3 at the last u"
                .to_string(),
        eps: None,
        eps_prime: None,
        delta: None,
        rows,
        set_densities: Vec::new(),
        inclusion_violations: None,
        rate_samples: Vec::new(),
        extrapolated,
        gauge_ratio_max: Some(gauge_ratio_max),
        premise_status,
        notes,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::default_tail_tol;
    use crate::summability::{dyadic_u_grid, uniform_grid};

    fn default_family(r: usize) -> OperatorFamily<f64> {
        OperatorFamily::plain(ParamSchedule::default_schedule(), r, default_tail_tol())
    }

    #[test]
    fn sup_norm_examples() {
        let zero = TestFunction::new("0", |_: f64| 0.0);
        let grid = uniform_grid::<f64>(101);
        assert_eq!(sup_norm(&zero, &grid), 0.0);
        assert_eq!(sup_norm(&TestFunction::e1(), &grid), 1.0);
        let hump = TestFunction::new("x(1-x)", |x: f64| x * (1.0 - x));
        let fine = uniform_grid::<f64>(1001);
        assert!((sup_norm(&hump, &fine) - 0.25).abs() <= 1e-12);
    }

    #[test]
    fn modulus_examples() {
        let grid = uniform_grid::<f64>(1001);
        let c = TestFunction::new("7", |_: f64| 7.0);
        assert_eq!(modulus_of_continuity(&c, 0.3, &grid), 0.0);
        let w1 = modulus_of_continuity(&TestFunction::e1(), 0.1, &grid);
        assert!((w1 - 0.1).abs() <= 2e-3, "{w1}");
        let w2 = modulus_of_continuity(&TestFunction::e2(), 0.1, &grid);
        assert!((w2 - 0.19).abs() <= 5e-3, "{w2}");
        let g = TestFunction::smooth_sample();
        let a = modulus_of_continuity(&g, 0.05, &grid);
        let b = modulus_of_continuity(&g, 0.1, &grid);
        let cc = modulus_of_continuity(&g, 0.2, &grid);
        assert!(a <= b && b <= cc);
    }

    #[test]
    fn family_residuals_track_known_values() {
        let fam = default_family(1);
        let grid = uniform_grid::<f64>(101);
        let r = fam.residuals_at(10, &TestFunction::e2(), &grid).unwrap();
        assert!(r.res_e[0] <= 2e-10, "{}", r.res_e[0]);
        // first-moment residual is (1 - alpha_n) * max(grid) up to slack
        assert!((r.res_e[1] - 1.0 / 11.0).abs() <= 3e-10, "{}", r.res_e[1]);
        assert!(r.mu2 >= 0.0);
        assert_eq!(r.res_g, r.res_e[2]);
    }

    #[test]
    fn perturbed_family_spikes_at_squares() {
        let fam = OperatorFamily::perturbed(ParamSchedule::default_schedule(), 1, 1e-10);
        let grid = uniform_grid::<f64>(101);
        let e0 = TestFunction::e0();
        let at4 = fam.residuals_at(4, &e0, &grid).unwrap();
        assert!(at4.res_e[0] >= 1.0 - 1e-6, "{}", at4.res_e[0]);
        let at5 = fam.residuals_at(5, &e0, &grid).unwrap();
        assert!(at5.res_e[0] <= 1e-9, "{}", at5.res_e[0]);
    }

    #[test]
    fn dwa_report_smoke() {
        let fam = default_family(1);
        let grid = uniform_grid::<f64>(201);
        let report = dwa_korovkin_report(
            &fam,
            &SummabilityMatrix::identity(),
            &DeferredScheme::full(),
            &TestFunction::smooth_sample(),
            0.05,
            0.15,
            1..=30,
            &grid,
        )
        .unwrap();
        assert_eq!(report.rows.len(), 30);
        assert_eq!(report.inclusion_violations, Some(0));
        assert!(report.pass);
        assert!(report.delta.unwrap() > 0.0);
        assert_eq!(report.set_densities.len(), 9);
        assert!(!report.rate_samples.is_empty());
        let csv = report.to_csv();
        assert_eq!(csv.lines().count(), 31);
        assert!(csv.starts_with(
            "index,residual_e0,residual_e1,residual_e2,residual_g,bound,density_or_transform,verdict"
        ));
        let text = report.to_text();
        assert!(text.contains("grid_points: 201"));
        assert!(text.contains("pass: true"));
    }

    #[test]
    fn dwa_report_rejects_bad_eps_order() {
        let fam = default_family(1);
        let grid = uniform_grid::<f64>(11);
        let err = dwa_korovkin_report(
            &fam,
            &SummabilityMatrix::identity(),
            &DeferredScheme::full(),
            &TestFunction::e2(),
            0.1,
            0.1,
            1..=5,
            &grid,
        )
        .unwrap_err();
        assert!(matches!(err, Error::ParameterDomain { name: "eps_prime", .. }), "{err:?}");
    }

    #[test]
    fn dwa_conclusion_matches_premise_when_g_is_e1() {
        let fam = default_family(1);
        let grid = uniform_grid::<f64>(101);
        let report = dwa_korovkin_report(
            &fam,
            &SummabilityMatrix::identity(),
            &DeferredScheme::full(),
            &TestFunction::e1(),
            0.05,
            0.2,
            1..=12,
            &grid,
        )
        .unwrap();
        for row in &report.rows {
            assert_eq!(row.res_g, row.res_e1);
        }
    }

    #[test]
    fn rate_bound_for_constants_is_res0_scaled() {
        let fam = default_family(1);
        let grid = uniform_grid::<f64>(101);
        let c = TestFunction::new("2", |_: f64| 2.0);
        let b = rate_bound(&c, &fam, 25, &grid).unwrap();
        let measured = fam.residuals_at(25, &c, &grid).unwrap().res_g;
        assert!(b <= 5e-10, "{b}");
        assert!(measured <= b + 1e-18, "{measured} vs {b}");
    }

    #[test]
    fn rate_bound_dominates_measured_residual() {
        let fam = default_family(1);
        let grid = uniform_grid::<f64>(201);
        let g = TestFunction::e1();
        let b10 = rate_bound(&g, &fam, 10, &grid).unwrap();
        let b20 = rate_bound(&g, &fam, 20, &grid).unwrap();
        let m10 = fam.residuals_at(10, &g, &grid).unwrap().res_g;
        let m20 = fam.residuals_at(20, &g, &grid).unwrap().res_g;
        assert!(m10 <= b10 + 4e-10, "{m10} vs {b10}");
        assert!(m20 <= b20 + 4e-10, "{m20} vs {b20}");
        assert!(b20 <= b10, "{b20} vs {b10}");
    }

    #[test]
    fn psum_report_smoke() {
        let fam = default_family(1);
        let grid = uniform_grid::<f64>(101);
        let u_grid: Vec<f64> = dyadic_u_grid(4, 14);
        let report = psummability_korovkin_report(
            &fam,
            &PowerSeriesMethod::ones(),
            &TestFunction::e2(),
            &u_grid,
            60,
            &grid,
        )
        .unwrap();
        assert_eq!(report.rows.len(), 11);
        assert!(report.pass, "{}", report.to_text());
        for pair in report.rows.windows(2) {
            assert!(pair[1].value < pair[0].value, "transform must decay along the grid");
        }
        assert_eq!(report.extrapolated.len(), 4);
        assert!(report.gauge_ratio_max.is_some());
        let csv = report.to_csv();
        assert_eq!(csv.lines().count(), 12);
    }

    #[test]
    fn psum_counterexample_mini() {
        let fam = OperatorFamily::perturbed(ParamSchedule::default_schedule(), 1, 1e-10);
        let grid = uniform_grid::<f64>(51);
        let u_grid = [0.99, 0.999, 0.9999];
        let report = psummability_korovkin_report(
            &fam,
            &PowerSeriesMethod::ones(),
            &TestFunction::e1(),
            &u_grid,
            100,
            &grid,
        )
        .unwrap();
        let last = report.rows.last().unwrap();
        assert!(last.res_e0 <= 0.02, "{}", last.res_e0);
        // classical premise still fails at squares inside the cap
        let spike = fam.residuals_at(9, &TestFunction::e0(), &grid).unwrap();
        assert!(spike.res_e[0] >= 1.0 - 1e-6);
    }

    #[test]
    fn psum_rejects_empty_inputs() {
        let fam = default_family(1);
        let grid = uniform_grid::<f64>(11);
        let err = psummability_korovkin_report(
            &fam,
            &PowerSeriesMethod::ones(),
            &TestFunction::e1(),
            &[],
            10,
            &grid,
        )
        .unwrap_err();
        assert!(matches!(err, Error::ParameterDomain { name: "u_grid", .. }));
        let err = psummability_korovkin_report(
            &fam,
            &PowerSeriesMethod::ones(),
            &TestFunction::e1(),
            &[0.5],
            0,
            &grid,
        )
        .unwrap_err();
        assert!(matches!(err, Error::ParameterDomain { name: "n_cap", .. }));
    }
}

//! Coefficient layer of the interpolation operator: weighted compositions
//! of a degree, the coefficient family h_p built on q-Pochhammer ratios,
//! the product prefactor, and the normalization check that prefactor and
//! coefficient series multiply to one.
//!
//! Coefficients are evaluated per composition with fresh Pochhammer
//! products; this keeps the layer independent of the cached tables used by
//! the adaptive operator evaluator, so the two routes cross-check each
//! other.

use crate::error::{Error, Result};
use crate::qcalc::{pow_u, q_pochhammer, QBase};
use crate::real::Real;

/// Multiplicity vector (l_1, ..., l_r) with l_1 + 2 l_2 + ... + r l_r equal
/// to the degree it was enumerated for.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeightedComposition {
    parts: Vec<usize>,
}

impl WeightedComposition {
    /// Multiplicities l_1..l_r, indexed by part size minus one.
    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// The weighted degree sum k * l_k.
    pub fn degree(&self) -> usize {
        self.parts.iter().enumerate().map(|(i, &l)| (i + 1) * l).sum()
    }
}

/// Every solution of l_1 + 2 l_2 + ... + r l_r = p, each exactly once, in
/// descending lexicographic order of (l_r, ..., l_1). The count equals the
/// number of partitions of p into parts of size at most r.
pub fn weighted_compositions(p: usize, r: usize) -> Vec<WeightedComposition> {
    assert!(r >= 1, "need at least one part size");
    let mut out = Vec::new();
    let mut parts = vec![0usize; r];
    descend(p, r, &mut parts, &mut out);
    out
}

fn descend(rem: usize, part: usize, parts: &mut Vec<usize>, out: &mut Vec<WeightedComposition>) {
    if part == 1 {
        parts[0] = rem;
        out.push(WeightedComposition { parts: parts.clone() });
        return;
    }
    let mut l = rem / part;
    loop {
        parts[part - 1] = l;
        descend(rem - part * l, part - 1, parts, out);
        if l == 0 {
            break;
        }
        l -= 1;
    }
}

/// Parameters of the coefficient family: exponents beta_k (applied as
/// powers of q), weights z_k in [0, 1), and the base.
#[derive(Debug, Clone)]
pub struct LHParams<T> {
    betas: Vec<u64>,
    z: Vec<T>,
    q: QBase<T>,
}

impl<T: Real> LHParams<T> {
    pub fn new(betas: Vec<u64>, z: Vec<T>, q: QBase<T>) -> Result<Self> {
        if betas.is_empty() || betas.len() != z.len() {
            return Err(Error::ParameterDomain {
                name: "betas",
                detail: format!(
                    "need matching nonempty exponent and weight vectors, got {} and {}",
                    betas.len(),
                    z.len()
                ),
            });
        }
        if let Some(&b) = betas.iter().find(|&&b| b == 0) {
            return Err(Error::ParameterDomain {
                name: "betas",
                detail: format!("exponents must be >= 1, got {b}"),
            });
        }
        for &zk in &z {
            if !(zk >= T::zero() && zk < T::one()) {
                return Err(Error::ParameterDomain {
                    name: "z",
                    detail: format!("{zk} outside [0, 1)"),
                });
            }
        }
        Ok(LHParams { betas, z, q })
    }

    pub fn r(&self) -> usize {
        self.z.len()
    }

    pub fn betas(&self) -> &[u64] {
        &self.betas
    }

    pub fn z(&self) -> &[T] {
        &self.z
    }

    pub fn q(&self) -> QBase<T> {
        self.q
    }
}

/// Degree-p coefficient: the sum over weighted compositions of
/// prod_k (q^{beta_k}; q)_{l_k} z_k^{l_k} / (q; q)_{l_k}.
///
/// Nonnegative whenever the params are in domain, since every factor is.
pub fn lh_coefficient<T: Real>(p: usize, params: &LHParams<T>) -> T {
    let q = params.q();
    let qv = q.value();
    let mut total = T::zero();
    for comp in weighted_compositions(p, params.r()) {
        let mut term = T::one();
        for (k, &lk) in comp.parts().iter().enumerate() {
            if lk == 0 {
                continue;
            }
            let qbeta = pow_u(qv, params.betas[k]);
            term = term * q_pochhammer(qbeta, q, lk as u64) * pow_u(params.z[k], lk as u64)
                / q_pochhammer(qv, q, lk as u64);
        }
        total += term;
    }
    total
}

/// Product prefactor prod_{i=1}^{r} (alpha_i x^i; q)_n.
pub fn prefactor<T: Real>(x: T, n: u64, alphas: &[T], q: QBase<T>) -> Result<T> {
    validate_alphas(alphas)?;
    validate_unit_interval(x)?;
    let mut out = T::one();
    let mut xi = T::one();
    for &a in alphas {
        xi = xi * x;
        out = out * q_pochhammer(a * xi, q, n);
    }
    Ok(out)
}

pub(crate) fn validate_alphas<T: Real>(alphas: &[T]) -> Result<()> {
    if alphas.is_empty() {
        return Err(Error::ParameterDomain {
            name: "alpha",
            detail: "need at least one weight".to_string(),
        });
    }
    for &a in alphas {
        if !(a > T::zero() && a < T::one()) {
            return Err(Error::ParameterDomain {
                name: "alpha",
                detail: format!("{a} outside the open interval (0, 1)"),
            });
        }
    }
    Ok(())
}

pub(crate) fn validate_unit_interval<T: Real>(x: T) -> Result<()> {
    if x >= T::zero() && x <= T::one() {
        Ok(())
    } else {
        Err(Error::ParameterDomain {
            name: "x",
            detail: format!("{x} outside [0, 1]"),
        })
    }
}

/// |prefactor(x) * sum_{p<=p_max} h_p x^p - 1|: how far the truncated
/// coefficient series is from inverting the prefactor. Goes to zero as
/// p_max grows and is non-increasing in p_max (all summands are >= 0).
pub fn normalization_residual<T: Real>(
    x: T,
    n: u64,
    alphas: &[T],
    q: QBase<T>,
    p_max: usize,
) -> Result<T> {
    let pref = prefactor(x, n, alphas, q)?;
    let params = LHParams::new(vec![n; alphas.len()], alphas.to_vec(), q)?;
    let mut series = T::zero();
    let mut xp = T::one();
    for p in 0..=p_max {
        series += lh_coefficient(p, &params) * xp;
        xp = xp * x;
    }
    Ok((pref * series - T::one()).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcalc::q_integer;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn q(v: f64) -> QBase<f64> {
        QBase::new(v).unwrap()
    }

    /// Independent oracle: partitions of p into parts of size <= r, by the
    /// classic two-dimensional recurrence.
    fn partition_count(p: usize, r: usize) -> usize {
        let mut ways = vec![0usize; p + 1];
        ways[0] = 1;
        for part in 1..=r {
            for total in part..=p {
                ways[total] += ways[total - part];
            }
        }
        ways[p]
    }

    #[test]
    fn composition_counts_match_partition_oracle() {
        for p in 0..=30 {
            for r in 1..=5 {
                let got = weighted_compositions(p, r).len();
                assert_eq!(got, partition_count(p, r), "p={p} r={r}");
            }
        }
        assert_eq!(weighted_compositions(6, 3).len(), 7);
    }

    #[test]
    fn compositions_are_valid_unique_and_ordered() {
        for p in 0..=15 {
            for r in 1..=4 {
                let comps = weighted_compositions(p, r);
                let mut seen = HashSet::new();
                for c in &comps {
                    assert_eq!(c.degree(), p, "p={p} r={r} parts={:?}", c.parts());
                    assert!(seen.insert(c.clone()));
                }
                // descending lexicographic in (l_r, ..., l_1)
                for w in comps.windows(2) {
                    let rev = |c: &WeightedComposition| {
                        c.parts().iter().rev().copied().collect::<Vec<_>>()
                    };
                    assert!(rev(&w[0]) > rev(&w[1]), "p={p} r={r}");
                }
                assert_eq!(comps, weighted_compositions(p, r));
            }
        }
    }

    #[test]
    fn composition_order_frozen_cases() {
        let c32: Vec<_> = weighted_compositions(3, 2)
            .into_iter()
            .map(|c| c.parts().to_vec())
            .collect();
        assert_eq!(c32, vec![vec![1, 1], vec![3, 0]]);
        let c63 = weighted_compositions(6, 3);
        assert_eq!(c63.first().unwrap().parts(), &[0, 0, 2]);
        assert_eq!(c63.last().unwrap().parts(), &[6, 0, 0]);
    }

    #[test]
    fn coefficient_degree_zero_is_one() {
        let params = LHParams::new(vec![3, 5], vec![0.4, 0.7], q(0.6)).unwrap();
        assert_eq!(lh_coefficient(0, &params), 1.0);
    }

    #[test]
    fn coefficient_degree_one_matches_q_integer() {
        // single part size: h_1 = (q^beta;q)_1 z / (q;q)_1 = [beta]_q z
        for &qv in &[0.3, 0.5, 0.8] {
            for beta in 1..=6u64 {
                let z = 0.35;
                let params = LHParams::new(vec![beta], vec![z], q(qv)).unwrap();
                let got = lh_coefficient(1, &params);
                let want = q_integer(beta, q(qv)) * z;
                assert!((got - want).abs() <= 1e-13 * want.max(1.0), "q={qv} beta={beta}");
            }
        }
    }

    #[test]
    fn coefficient_degree_two_two_parts_by_hand() {
        // compositions of 2 with parts <= 2: (l1,l2) = (2,0) and (0,1)
        let (qv, b1, b2, z1, z2) = (0.55, 4u64, 2u64, 0.3, 0.6);
        let qq = q(qv);
        let params = LHParams::new(vec![b1, b2], vec![z1, z2], qq).unwrap();
        let t20 = q_pochhammer(pow_u(qv, b1), qq, 2) * z1 * z1 / q_pochhammer(qv, qq, 2);
        let t01 = q_pochhammer(pow_u(qv, b2), qq, 1) * z2 / q_pochhammer(qv, qq, 1);
        let want = t20 + t01;
        let got = lh_coefficient(2, &params);
        assert!((got - want).abs() <= 1e-14 * want.max(1.0));
    }

    #[test]
    fn params_validation() {
        assert!(LHParams::new(vec![], vec![] as Vec<f64>, q(0.5)).is_err());
        assert!(LHParams::new(vec![1, 2], vec![0.5], q(0.5)).is_err());
        assert!(LHParams::new(vec![0], vec![0.5], q(0.5)).is_err());
        assert!(LHParams::new(vec![1], vec![1.0], q(0.5)).is_err());
        assert!(LHParams::new(vec![1], vec![-0.1], q(0.5)).is_err());
        assert!(LHParams::new(vec![1], vec![0.0], q(0.5)).is_ok());
    }

    #[test]
    fn prefactor_frozen_values() {
        // (0.5; 0.5)_1 = 1 - 0.5
        assert!((prefactor(1.0, 1, &[0.5], q(0.5)).unwrap() - 0.5).abs() < 1e-15);
        // r = 2: (1-0.4)(1-0.2) * (1-0.2)(1-0.1)
        let got = prefactor(0.5, 2, &[0.8, 0.8], q(0.5)).unwrap();
        assert!((got - 0.3456).abs() < 1e-15, "{got}");
    }

    #[test]
    fn prefactor_rejects_out_of_domain() {
        for bad in [1.5, 1.0, 0.0, -0.2] {
            let err = prefactor(0.5, 2, &[bad], q(0.5)).unwrap_err();
            assert!(matches!(err, Error::ParameterDomain { name: "alpha", .. }));
        }
        let err = prefactor(1.5, 2, &[0.5], q(0.5)).unwrap_err();
        assert!(matches!(err, Error::ParameterDomain { name: "x", .. }));
        assert!(prefactor(0.0, 2, &[0.5], q(0.5)).is_ok());
    }

    #[test]
    fn normalization_residual_shrinks_and_converges() {
        let (x, n, alphas, qq) = (0.5, 5u64, [0.9, 0.9], q(0.6));
        let mut prev = f64::INFINITY;
        for p_max in [0usize, 2, 5, 10, 20, 40, 80] {
            let res = normalization_residual(x, n, &alphas, qq, p_max).unwrap();
            assert!(res <= prev + 1e-15, "p_max={p_max}: {res} > {prev}");
            prev = res;
        }
        assert!(prev <= 1e-8, "residual at p_max=80: {prev}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn coefficients_nonnegative(
            p in 0usize..14,
            r in 1usize..4,
            qv in 0.05f64..0.95,
            z in 0.0f64..0.95,
            beta in 1u64..8,
        ) {
            let params = LHParams::new(vec![beta; r], vec![z; r], q(qv)).unwrap();
            prop_assert!(lh_coefficient(p, &params) >= 0.0);
        }

        #[test]
        fn count_property(p in 0usize..20, r in 1usize..5) {
            prop_assert_eq!(weighted_compositions(p, r).len(), partition_count(p, r));
        }
    }
}

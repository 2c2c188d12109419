//! q-calculus primitives: the base type, q-integers and q-Pochhammer
//! symbols. Everything downstream (coefficients, operator weights, moment
//! bounds) reduces to these two quantities.

use crate::error::{Error, Result};
use crate::real::Real;

/// Deformation base `q`, restricted to the open interval (0, 1).
///
/// The classical value q = 1 is outside the domain on purpose: schedules
/// approach it but never reach it, and every formula here divides by 1 - q.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QBase<T>(T);

impl<T: Real> QBase<T> {
    /// Validates 0 < q < 1.
    pub fn new(q: T) -> Result<Self> {
        if q.is_finite() && q > T::zero() && q < T::one() {
            Ok(QBase(q))
        } else {
            Err(Error::ParameterDomain {
                name: "q",
                detail: format!("{q} is not inside the open interval (0, 1)"),
            })
        }
    }

    pub fn value(self) -> T {
        self.0
    }
}

/// `base^e` by binary exponentiation. Exact at e = 0 and e = 1; error grows
/// like log2(e) ulps, well below every tolerance used here.
pub fn pow_u<T: Real>(base: T, mut e: u64) -> T {
    let mut acc = T::one();
    let mut b = base;
    loop {
        if e & 1 == 1 {
            acc = acc * b;
        }
        e >>= 1;
        if e == 0 {
            return acc;
        }
        b = b * b;
    }
}

/// q-integer [n]_q = (1 - q^n) / (1 - q), with [0]_q = 0.
pub fn q_integer<T: Real>(n: u64, q: QBase<T>) -> T {
    let qv = q.value();
    (T::one() - pow_u(qv, n)) / (T::one() - qv)
}

/// q-Pochhammer symbol (rho; q)_k = prod_{j=0}^{k-1} (1 - rho q^j).
/// The empty product (k = 0) is 1.
pub fn q_pochhammer<T: Real>(rho: T, q: QBase<T>, k: u64) -> T {
    let qv = q.value();
    let mut out = T::one();
    let mut qj = T::one();
    for _ in 0..k {
        out = out * (T::one() - rho * qj);
        qj = qj * qv;
    }
    out
}

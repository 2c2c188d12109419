//! Carrier for numbers that travel with an error certificate.

/// A computed value together with a bound on its truncation error and the
/// number of series terms (or the series degree) that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certified<T> {
    pub value: T,
    /// Bound on |value - limit| contributed by truncation. Rounding is not
    /// included; callers comparing against tolerances should leave headroom.
    pub error_bound: T,
    /// Series degree (operator route) or number of summed terms.
    pub terms: usize,
}

impl<T: Copy> Certified<T> {
    pub fn new(value: T, error_bound: T, terms: usize) -> Self {
        Certified {
            value,
            error_bound,
            terms,
        }
    }
}

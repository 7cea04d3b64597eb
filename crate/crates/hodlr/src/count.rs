//! Scalar operation tallies.

/// Operation counts accumulated by `setup` and the counted solve variants.
///
/// Counts follow one fixed convention so that cost recurrences can be
/// asserted as exact integer identities: an inner product of length `m`
/// costs `2m - 1` operations, a scaled vector update of length `m` costs
/// `2m`, and the rank-1 correction scalar `gamma * beta / (1 - delta)`
/// costs 3. Everything else is charged per scalar addition, subtraction,
/// multiplication or division as performed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounter {
    pub add_sub: u64,
    pub mul: u64,
    pub div: u64,
    /// Scalar storage of the representation the counter refers to; filled in
    /// by `setup`, zero on per-solve counters.
    pub storage: u64,
}

impl OpCounter {
    pub fn total(&self) -> u64 {
        self.add_sub + self.mul + self.div
    }

    pub(crate) fn absorb(&mut self, other: &OpCounter) {
        self.add_sub += other.add_sub;
        self.mul += other.mul;
        self.div += other.div;
    }
}

/// Charge sink threaded through the arithmetic kernels. The no-op
/// implementation lets uncounted solves compile down to plain arithmetic.
pub(crate) trait Tally {
    fn op(&mut self, add_sub: u64, mul: u64, div: u64);

    #[inline]
    fn inner(&mut self, m: usize) {
        if m > 0 {
            self.op(m as u64 - 1, m as u64, 0);
        }
    }

    #[inline]
    fn axpy(&mut self, m: usize) {
        self.op(m as u64, m as u64, 0);
    }

    /// `gamma * beta / (1 - delta)`: subtraction, multiplication, division.
    #[inline]
    fn smw_scalar(&mut self) {
        self.op(1, 1, 1);
    }
}

pub(crate) struct NoTally;

impl Tally for NoTally {
    #[inline]
    fn op(&mut self, _: u64, _: u64, _: u64) {}
}

impl Tally for OpCounter {
    #[inline]
    fn op(&mut self, add_sub: u64, mul: u64, div: u64) {
        self.add_sub += add_sub;
        self.mul += mul;
        self.div += div;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convention_charges() {
        let mut c = OpCounter::default();
        c.inner(4);
        assert_eq!(c.total(), 7);
        c.axpy(4);
        assert_eq!(c.total(), 15);
        c.smw_scalar();
        assert_eq!(c.total(), 18);
        c.inner(0);
        assert_eq!(c.total(), 18);
        assert_eq!(c.add_sub, 8);
        assert_eq!(c.mul, 9);
        assert_eq!(c.div, 1);
    }
}

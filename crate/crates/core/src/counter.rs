//! Operation counting for complexity validation.
//!
//! Scoring and selection routines are generic over [`OpSink`]. Timed runs pass
//! [`NoCount`], which compiles to nothing; instrumented runs pass an
//! [`OpCounter`].

use serde::Serialize;

pub trait OpSink {
    fn dot_products(&mut self, n: u64);
    fn comparisons(&mut self, n: u64);
    fn pool_updates(&mut self, n: u64);
}

/// Sink that discards every count.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoCount;

impl OpSink for NoCount {
    #[inline(always)]
    fn dot_products(&mut self, _: u64) {}
    #[inline(always)]
    fn comparisons(&mut self, _: u64) {}
    #[inline(always)]
    fn pool_updates(&mut self, _: u64) {}
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct OpCounter {
    pub dot_products: u64,
    pub comparisons: u64,
    pub pool_updates: u64,
}

impl OpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn reset(&mut self) {
        *self = Self::default();
    }

    /// Adds another counter's totals, e.g. a worker-local counter.
    pub fn merge(&mut self, other: &OpCounter) {
        self.dot_products += other.dot_products;
        self.comparisons += other.comparisons;
        self.pool_updates += other.pool_updates;
    }
}

impl OpSink for OpCounter {
    #[inline]
    fn dot_products(&mut self, n: u64) {
        self.dot_products += n;
    }
    #[inline]
    fn comparisons(&mut self, n: u64) {
        self.comparisons += n;
    }
    #[inline]
    fn pool_updates(&mut self, n: u64) {
        self.pool_updates += n;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_and_reset() {
        let mut a = OpCounter::new();
        a.dot_products(3);
        a.comparisons(2);
        let mut b = OpCounter::new();
        b.pool_updates(5);
        b.dot_products(1);
        a.merge(&b);
        assert_eq!(
            a,
            OpCounter {
                dot_products: 4,
                comparisons: 2,
                pool_updates: 5
            }
        );
        a.reset();
        assert_eq!(a, OpCounter::default());
    }
}

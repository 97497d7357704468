//! Modeled memory accounting for one function invocation.
//!
//! Tasks declare the buffers and tables they hold; the meter tracks the
//! current total and its high-water mark. Nothing is sampled from the OS.

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum MeterError {
    #[error("freeing {requested} bytes with only {current} allocated")]
    UnderflowFree { requested: u64, current: u64 },
    #[error("modeled memory {peak} bytes exceeds the {limit} byte limit")]
    LimitExceeded { peak: u64, limit: u64 },
}

pub const BYTES_PER_MB: f64 = 1_048_576.0;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Meter {
    current: u64,
    peak: u64,
    limit: Option<u64>,
}

impl Meter {
    pub fn new() -> Self {
        Self::default()
    }

    /// A meter that reports [`MeterError::LimitExceeded`] once the peak passes `limit` bytes.
    pub fn with_limit(limit: u64) -> Self {
        Self {
            limit: Some(limit),
            ..Self::default()
        }
    }

    /// Records `bytes` of growth. The peak is updated before the limit check,
    /// so an over-limit allocation is still visible in [`Meter::peak_bytes`].
    pub fn alloc(&mut self, bytes: u64) -> Result<(), MeterError> {
        self.current = self.current.saturating_add(bytes);
        self.peak = self.peak.max(self.current);
        match self.limit {
            Some(limit) if self.peak > limit => Err(MeterError::LimitExceeded {
                peak: self.peak,
                limit,
            }),
            _ => Ok(()),
        }
    }

    pub fn free(&mut self, bytes: u64) -> Result<(), MeterError> {
        if bytes > self.current {
            return Err(MeterError::UnderflowFree {
                requested: bytes,
                current: self.current,
            });
        }
        self.current -= bytes;
        Ok(())
    }

    pub fn current_bytes(&self) -> u64 {
        self.current
    }

    pub fn peak_bytes(&self) -> u64 {
        self.peak
    }

    pub fn limit_bytes(&self) -> Option<u64> {
        self.limit
    }

    pub fn peak_mb(&self) -> f64 {
        self.peak as f64 / BYTES_PER_MB
    }

    pub fn exceeded(&self) -> bool {
        matches!(self.limit, Some(limit) if self.peak > limit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn alloc_then_partial_free() {
        let mut m = Meter::new();
        m.alloc(100).unwrap();
        m.free(50).unwrap();
        assert_eq!((m.current_bytes(), m.peak_bytes()), (50, 100));
    }

    #[test]
    fn peak_never_lowers() {
        let mut m = Meter::new();
        m.alloc(100).unwrap();
        m.free(100).unwrap();
        m.alloc(30).unwrap();
        assert_eq!((m.current_bytes(), m.peak_bytes()), (30, 100));
    }

    #[test]
    fn free_on_fresh_meter_underflows() {
        let mut m = Meter::new();
        assert_eq!(
            m.free(10),
            Err(MeterError::UnderflowFree {
                requested: 10,
                current: 0
            })
        );
    }

    #[test]
    fn limit_is_reported_with_peak() {
        let mb = 1 << 20;
        let mut m = Meter::with_limit(512 * mb);
        assert!(m.alloc(600 * mb).is_err());
        assert!(m.exceeded());
        assert_eq!(m.peak_mb(), 600.0);
    }

    #[test]
    fn peak_mb_is_exact_division() {
        let mut m = Meter::new();
        m.alloc(3 * 524_288).unwrap();
        assert_eq!(m.peak_mb(), 1.5);
    }

    proptest! {
        #[test]
        fn peak_dominates_current(ops in proptest::collection::vec((any::<bool>(), 0u64..1000), 0..64)) {
            let mut m = Meter::new();
            let mut last_peak = 0;
            for (is_alloc, n) in ops {
                if is_alloc {
                    m.alloc(n).unwrap();
                } else {
                    let _ = m.free(n);
                }
                prop_assert!(m.peak_bytes() >= m.current_bytes());
                prop_assert!(m.peak_bytes() >= last_peak);
                last_peak = m.peak_bytes();
            }
        }
    }
}

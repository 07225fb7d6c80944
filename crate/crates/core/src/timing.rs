use core::time::Duration;

/// Wall-clock stopwatch. Without `std` there is no clock and every reading is
/// zero.
pub(crate) struct Stopwatch {
    #[cfg(feature = "std")]
    start: std::time::Instant,
}

impl Stopwatch {
    pub(crate) fn start() -> Self {
        Stopwatch {
            #[cfg(feature = "std")]
            start: std::time::Instant::now(),
        }
    }

    pub(crate) fn elapsed(&self) -> Duration {
        #[cfg(feature = "std")]
        {
            self.start.elapsed()
        }
        #[cfg(not(feature = "std"))]
        {
            Duration::ZERO
        }
    }
}

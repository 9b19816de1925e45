//! Injectable time and identifier sources, so bot cohorts are reproducible.

use std::sync::atomic::{AtomicI64, Ordering};
use std::sync::Mutex;

use chrono::{DateTime, Duration, Utc};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
}

pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

/// Returns `start`, `start + step`, `start + 2 step`, ... on successive
/// calls.
pub struct SteppingClock {
    start: DateTime<Utc>,
    step: Duration,
    calls: AtomicI64,
}

impl SteppingClock {
    pub fn new(start: DateTime<Utc>, step: Duration) -> Self {
        Self {
            start,
            step,
            calls: AtomicI64::new(0),
        }
    }

    /// Moves the clock forward without consuming a reading.
    pub fn skip(&self, steps: i64) {
        self.calls.fetch_add(steps, Ordering::SeqCst);
    }
}

impl Clock for SteppingClock {
    fn now(&self) -> DateTime<Utc> {
        let n = self.calls.fetch_add(1, Ordering::SeqCst);
        self.start + self.step * n as i32
    }
}

pub trait IdSource: Send + Sync {
    fn next_id(&self) -> String;
}

pub struct RandomIds;

impl IdSource for RandomIds {
    fn next_id(&self) -> String {
        uuid::Uuid::new_v4().to_string()
    }
}

/// UUID-shaped ids from a seeded stream.
pub struct SeededIds(Mutex<ChaCha8Rng>);

impl SeededIds {
    pub fn new(seed: u64) -> Self {
        Self(Mutex::new(ChaCha8Rng::seed_from_u64(seed)))
    }
}

impl IdSource for SeededIds {
    fn next_id(&self) -> String {
        let mut bytes = [0u8; 16];
        self.0
            .lock()
            .expect("id stream poisoned")
            .fill_bytes(&mut bytes);
        uuid::Builder::from_random_bytes(bytes)
            .into_uuid()
            .to_string()
    }
}

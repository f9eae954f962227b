//! Remote geocoding backends (OSM/Nominatim and Wikidata/SPARQL) with
//! shared rate limiting and jittered retry machinery.

pub mod nominatim;
pub mod wikidata;

pub use nominatim::{build_nominatim_query, NominatimClient, NominatimQuery};
pub use wikidata::{build_sparql, WikidataClient};

use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RemoteError {
    #[error("service exhausted after {attempts} attempts: {last}")]
    ServiceExhausted { attempts: u32, last: String },
    #[error("malformed response: {0}")]
    MalformedResponse(String),
}

/// Serializes dispatches to one endpoint: two consecutive `acquire`
/// returns are at least `min_interval` apart, across all threads sharing
/// the limiter.
#[derive(Debug)]
pub struct RateLimiter {
    min_interval: Duration,
    last_dispatch: Mutex<Option<Instant>>,
}

impl RateLimiter {
    pub fn new(min_interval: Duration) -> RateLimiter {
        RateLimiter {
            min_interval,
            last_dispatch: Mutex::new(None),
        }
    }

    pub fn min_interval(&self) -> Duration {
        self.min_interval
    }

    /// Block until the interval since the previous dispatch has elapsed,
    /// then claim the slot. The lock is held through the wait so
    /// concurrent callers queue instead of stampeding.
    pub fn acquire(&self) {
        let mut last = self.last_dispatch.lock().unwrap();
        if let Some(previous) = *last {
            let elapsed = previous.elapsed();
            if elapsed < self.min_interval {
                std::thread::sleep(self.min_interval - elapsed);
            }
        }
        *last = Some(Instant::now());
    }
}

/// Short randomized backoff for remote retries: every delay is drawn
/// uniformly from `[min, max]`.
#[derive(Debug, Clone)]
pub struct RandomizedBackoff {
    pub retries: u32,
    pub min: Duration,
    pub max: Duration,
}

impl Default for RandomizedBackoff {
    fn default() -> Self {
        RandomizedBackoff {
            retries: 4,
            min: Duration::from_millis(500),
            max: Duration::from_millis(2000),
        }
    }
}

impl RandomizedBackoff {
    pub fn delay(&self, rng: &mut impl Rng) -> Duration {
        if self.max <= self.min {
            return self.min;
        }
        let span = (self.max - self.min).as_nanos().max(1);
        self.min + Duration::from_nanos(rng.gen_range(0..=span) as u64)
    }
}

enum AttemptError {
    Transient(String),
    Fatal(String),
}

/// Run one HTTP GET with rate limiting and retries. Transient failures
/// (timeouts, 429, 5xx) are retried up to `backoff.retries` times, so a
/// backend performs at most retries+1 requests per logical query.
pub(crate) fn get_json_with_retry(
    request: impl Fn() -> ureq::Request,
    limiter: &RateLimiter,
    backoff: &RandomizedBackoff,
) -> Result<serde_json::Value, RemoteError> {
    let mut rng = rand::thread_rng();
    let mut last = String::new();
    for attempt in 0..=backoff.retries {
        limiter.acquire();
        match dispatch(request()) {
            Ok(value) => return Ok(value),
            Err(AttemptError::Fatal(reason)) => {
                return Err(RemoteError::MalformedResponse(reason))
            }
            Err(AttemptError::Transient(reason)) => {
                last = reason;
                if attempt < backoff.retries {
                    std::thread::sleep(backoff.delay(&mut rng));
                }
            }
        }
    }
    Err(RemoteError::ServiceExhausted {
        attempts: backoff.retries + 1,
        last,
    })
}

fn dispatch(request: ureq::Request) -> Result<serde_json::Value, AttemptError> {
    match request.call() {
        Ok(response) => response
            .into_json()
            .map_err(|e| AttemptError::Fatal(format!("invalid JSON body: {e}"))),
        Err(ureq::Error::Status(code, _)) if code == 429 || code >= 500 => {
            Err(AttemptError::Transient(format!("status {code}")))
        }
        Err(ureq::Error::Status(code, _)) => Err(AttemptError::Fatal(format!("status {code}"))),
        Err(ureq::Error::Transport(t)) => Err(AttemptError::Transient(t.to_string())),
    }
}

//! Uniform chat-completion interface over interchangeable backends.
//!
//! A [`Gateway`] wraps one [`Backend`] with retries, optional token-bucket
//! rate limiting, a persistent content-addressed response cache, and in-
//! process request coalescing. Offline backends (heuristic, fixture) make the
//! whole pipeline deterministic; the network backend talks to any
//! OpenAI-style chat-completion endpoint.

mod backends;
mod cache;
mod network;

pub use backends::{extract_pair_from_prompt, mock_usage, FixtureBackend, HeuristicBackend};
pub use cache::DiskCache;
pub use network::{NetworkBackend, NetworkConfig};

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::prompts::{MessageList, StepId};

/// Token counts as reported by a backend. Backend-reported numbers are taken
/// as authoritative.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub input_tokens: u64,
    pub output_tokens: u64,
}

impl Usage {
    pub fn total(&self) -> u64 {
        self.input_tokens + self.output_tokens
    }

    pub fn merge(&mut self, other: Usage) {
        self.input_tokens += other.input_tokens;
        self.output_tokens += other.output_tokens;
    }
}

impl std::ops::Add for Usage {
    type Output = Usage;

    fn add(self, rhs: Usage) -> Usage {
        Usage {
            input_tokens: self.input_tokens + rhs.input_tokens,
            output_tokens: self.output_tokens + rhs.output_tokens,
        }
    }
}

/// One chat-completion request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub model: String,
    pub messages: MessageList,
    pub temperature: f32,
    pub max_output_tokens: u32,
    /// Which strategy step this request belongs to. Not part of the request
    /// identity: it routes mock behavior and labels transcripts.
    pub tag: StepId,
}

/// A completed request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Completion {
    pub text: String,
    pub usage: Usage,
    pub backend: String,
    /// True when served from the cache (or coalesced onto another in-flight
    /// identical request). Volatile runtime information: deliberately not
    /// serialized, so artifacts are byte-identical with warm or cold caches.
    #[serde(skip, default)]
    pub cached: bool,
}

/// Errors surfaced by backends and the gateway.
#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("rate limited by backend: {0}")]
    RateLimited(String),
    #[error("backend unavailable: {0}")]
    Unavailable(String),
    #[error("malformed response: {0}")]
    ResponseMalformed(String),
    #[error("no fixture response mapped for request {key}")]
    UnmappedFixture { key: String },
    #[error("cache error at {path}: {reason}")]
    Cache { path: PathBuf, reason: String },
}

impl GatewayError {
    /// Transient errors are retried; the rest surface immediately.
    pub fn is_transient(&self) -> bool {
        matches!(
            self,
            GatewayError::RateLimited(_) | GatewayError::Unavailable(_)
        )
    }
}

/// What a backend returns before the gateway wraps it.
#[derive(Debug, Clone)]
pub struct BackendResponse {
    pub text: String,
    pub usage: Usage,
}

/// A chat-completion provider.
pub trait Backend: Send + Sync {
    fn name(&self) -> &str;

    fn complete(&self, request: &CompletionRequest) -> Result<BackendResponse, GatewayError>;
}

/// Stable content hash identifying a request: model, message roles and
/// contents, temperature, and output budget. Independent of the step tag and
/// of wall-clock state, so keys survive process restarts.
pub fn cache_key(request: &CompletionRequest) -> String {
    #[derive(Serialize)]
    struct KeyMaterial<'a> {
        model: &'a str,
        messages: Vec<(&'a str, &'a str)>,
        temperature: f32,
        max_output_tokens: u32,
    }
    let material = KeyMaterial {
        model: &request.model,
        messages: request
            .messages
            .messages()
            .iter()
            .map(|m| (m.role.as_str(), m.content.as_str()))
            .collect(),
        temperature: request.temperature,
        max_output_tokens: request.max_output_tokens,
    };
    let bytes = serde_json::to_vec(&material).expect("key material serializes");
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    hex::encode(hasher.finalize())
}

/// Exponential-backoff retry policy for transient backend failures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetryPolicy {
    /// Total attempts, including the first. 1 disables retries.
    pub max_attempts: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 3,
            base_delay: Duration::from_millis(250),
            max_delay: Duration::from_secs(8),
        }
    }
}

impl RetryPolicy {
    /// A policy that never sleeps, for tests.
    pub fn immediate(max_attempts: u32) -> Self {
        Self {
            max_attempts,
            base_delay: Duration::ZERO,
            max_delay: Duration::ZERO,
        }
    }

    fn delay_for(&self, attempt: u32) -> Duration {
        let factor = 2u32.saturating_pow(attempt.saturating_sub(1));
        (self.base_delay * factor).min(self.max_delay)
    }
}

/// Requests-per-interval rate limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateLimit {
    pub requests: u32,
    pub per: Duration,
}

/// Blocking token bucket; burst capacity equals the configured request count.
struct TokenBucket {
    capacity: f64,
    refill_per_sec: f64,
    state: Mutex<(f64, Instant)>,
}

impl TokenBucket {
    fn new(limit: RateLimit) -> Self {
        let capacity = f64::from(limit.requests.max(1));
        let refill_per_sec = capacity / limit.per.as_secs_f64().max(f64::MIN_POSITIVE);
        Self {
            capacity,
            refill_per_sec,
            state: Mutex::new((capacity, Instant::now())),
        }
    }

    fn acquire(&self) {
        loop {
            let wait = {
                let mut state = self.state.lock().expect("bucket lock");
                let (ref mut tokens, ref mut last) = *state;
                let now = Instant::now();
                *tokens = (*tokens + now.duration_since(*last).as_secs_f64() * self.refill_per_sec)
                    .min(self.capacity);
                *last = now;
                if *tokens >= 1.0 {
                    *tokens -= 1.0;
                    return;
                }
                Duration::from_secs_f64((1.0 - *tokens) / self.refill_per_sec)
            };
            std::thread::sleep(wait);
        }
    }
}

/// One pool item's outcome; `index` ties it back to the input order.
#[derive(Debug)]
pub struct PoolOutcome {
    pub index: usize,
    pub request: CompletionRequest,
    pub result: Result<Completion, GatewayError>,
}

pub struct GatewayBuilder {
    backend: Box<dyn Backend>,
    cache_dir: Option<PathBuf>,
    retry: RetryPolicy,
    rate_limit: Option<RateLimit>,
}

impl GatewayBuilder {
    pub fn cache_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.cache_dir = Some(dir.into());
        self
    }

    pub fn retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn rate_limit(mut self, limit: RateLimit) -> Self {
        self.rate_limit = Some(limit);
        self
    }

    pub fn build(self) -> Gateway {
        Gateway {
            backend: self.backend,
            cache: self.cache_dir.map(DiskCache::new),
            retry: self.retry,
            limiter: self.rate_limit.map(TokenBucket::new),
            inflight: Mutex::new(HashMap::new()),
            backend_calls: AtomicU64::new(0),
        }
    }
}

/// Thread-safe completion service. Cheap to share behind an `Arc`.
pub struct Gateway {
    backend: Box<dyn Backend>,
    cache: Option<DiskCache>,
    retry: RetryPolicy,
    limiter: Option<TokenBucket>,
    // Coalescing slots: concurrent identical requests compute once.
    inflight: Mutex<HashMap<String, Arc<Mutex<Option<Completion>>>>>,
    backend_calls: AtomicU64,
}

impl Gateway {
    pub fn builder(backend: Box<dyn Backend>) -> GatewayBuilder {
        GatewayBuilder {
            backend,
            cache_dir: None,
            retry: RetryPolicy::default(),
            rate_limit: None,
        }
    }

    pub fn backend_name(&self) -> &str {
        self.backend.name()
    }

    /// Number of backend attempts made by this gateway instance (retries
    /// count individually; cache hits do not).
    pub fn backend_calls(&self) -> u64 {
        self.backend_calls.load(Ordering::SeqCst)
    }

    /// Completes one request: cache lookup, coalescing with identical
    /// in-flight requests, rate limiting, and retries with exponential
    /// backoff on transient failures.
    pub fn complete(&self, request: &CompletionRequest) -> Result<Completion, GatewayError> {
        let key = cache_key(request);
        if let Some(cache) = &self.cache {
            if let Some(mut hit) = cache.get(&key)? {
                hit.cached = true;
                return Ok(hit);
            }
        }

        let slot = {
            let mut inflight = self.inflight.lock().expect("inflight lock");
            Arc::clone(inflight.entry(key.clone()).or_default())
        };
        let mut guard = slot.lock().expect("slot lock");
        if let Some(done) = guard.as_ref() {
            let mut completion = done.clone();
            completion.cached = true;
            return Ok(completion);
        }

        let response = self.call_with_retries(request)?;
        let completion = Completion {
            text: response.text,
            usage: response.usage,
            backend: self.backend.name().to_string(),
            cached: false,
        };
        if let Some(cache) = &self.cache {
            cache.put(&key, request, &completion)?;
            // The disk cache now answers duplicates; drop the slot.
            drop(guard);
            self.inflight.lock().expect("inflight lock").remove(&key);
        } else {
            *guard = Some(completion.clone());
        }
        Ok(completion)
    }

    fn call_with_retries(
        &self,
        request: &CompletionRequest,
    ) -> Result<BackendResponse, GatewayError> {
        let mut attempt = 0;
        loop {
            attempt += 1;
            if let Some(limiter) = &self.limiter {
                limiter.acquire();
            }
            self.backend_calls.fetch_add(1, Ordering::SeqCst);
            match self.backend.complete(request) {
                Ok(response) => return Ok(response),
                Err(err) if err.is_transient() && attempt < self.retry.max_attempts => {
                    let delay = self.retry.delay_for(attempt);
                    if !delay.is_zero() {
                        std::thread::sleep(delay);
                    }
                }
                Err(err) => return Err(err),
            }
        }
    }

    /// Runs a batch of independent requests over `parallelism` workers.
    /// Outcomes are returned in completion order and carry their input index;
    /// per-request errors never abort the pool.
    pub fn run_pool(
        &self,
        requests: impl IntoIterator<Item = CompletionRequest>,
        parallelism: usize,
    ) -> Vec<PoolOutcome> {
        assert!(parallelism >= 1, "parallelism must be at least 1");
        let queue: Vec<(usize, CompletionRequest)> = requests.into_iter().enumerate().collect();
        let n = queue.len();
        let queue = Mutex::new(queue.into_iter());
        let (sender, receiver) = std::sync::mpsc::channel::<PoolOutcome>();

        std::thread::scope(|scope| {
            for _ in 0..parallelism.min(n.max(1)) {
                let sender = sender.clone();
                let queue = &queue;
                scope.spawn(move || loop {
                    let next = queue.lock().expect("queue lock").next();
                    let Some((index, request)) = next else {
                        break;
                    };
                    let result = self.complete(&request);
                    if sender
                        .send(PoolOutcome {
                            index,
                            request,
                            result,
                        })
                        .is_err()
                    {
                        break;
                    }
                });
            }
            drop(sender);
            receiver.into_iter().collect()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompts::{Message, MessageList};

    fn request(content: &str) -> CompletionRequest {
        CompletionRequest {
            model: "test-model".to_string(),
            messages: MessageList::single_user(content),
            temperature: 0.0,
            max_output_tokens: 64,
            tag: StepId::Baseline,
        }
    }

    #[test]
    fn equal_requests_share_a_key() {
        assert_eq!(
            cache_key(&request("hi there")),
            cache_key(&request("hi there"))
        );
    }

    #[test]
    fn key_ignores_tag() {
        let mut a = request("hi");
        a.tag = StepId::Baseline;
        let mut b = request("hi");
        b.tag = StepId::DebateCon;
        assert_eq!(cache_key(&a), cache_key(&b));
    }

    #[test]
    fn key_changes_with_any_field() {
        let base = request("hi");
        let mut other = base.clone();
        other.model = "other-model".to_string();
        assert_ne!(cache_key(&base), cache_key(&other));
        let mut other = base.clone();
        other.temperature = 0.5;
        assert_ne!(cache_key(&base), cache_key(&other));
        let mut other = base.clone();
        other.max_output_tokens = 65;
        assert_ne!(cache_key(&base), cache_key(&other));
        let other = request("hi!");
        assert_ne!(cache_key(&base), cache_key(&other));
        let mut other = base.clone();
        other.messages = MessageList::new(vec![Message::system("s"), Message::user("hi")]).unwrap();
        assert_ne!(cache_key(&base), cache_key(&other));
    }

    // Pins the hash construction: a changed algorithm would silently orphan
    // every existing on-disk cache entry.
    #[test]
    fn key_is_stable_across_builds() {
        assert_eq!(
            cache_key(&request("hello world")),
            "122ce37a33570be334d5cc1fcd0f21e156f6a9d677285070398295a2523cff26"
        );
    }

    #[test]
    fn perturbed_requests_never_collide() {
        let base = request("the quick brown fox jumps over the lazy dog");
        let mut keys = std::collections::HashSet::new();
        keys.insert(cache_key(&base));
        for i in 0..10_000u32 {
            let perturbed = request(&format!("the quick brown fox jumps over the lazy dog {i}"));
            keys.insert(cache_key(&perturbed));
        }
        assert_eq!(keys.len(), 10_001);
    }

    /// Deterministic echo backend that counts calls and can fail the first
    /// `fail_first` attempts with a chosen error.
    struct EchoBackend {
        fail_first: u64,
        transient: bool,
        calls: AtomicU64,
        delay: Duration,
    }

    impl EchoBackend {
        fn new() -> Self {
            Self {
                fail_first: 0,
                transient: true,
                calls: AtomicU64::new(0),
                delay: Duration::ZERO,
            }
        }

        fn failing(fail_first: u64, transient: bool) -> Self {
            Self {
                fail_first,
                transient,
                calls: AtomicU64::new(0),
                delay: Duration::ZERO,
            }
        }
    }

    impl Backend for EchoBackend {
        fn name(&self) -> &str {
            "echo"
        }

        fn complete(&self, request: &CompletionRequest) -> Result<BackendResponse, GatewayError> {
            let n = self.calls.fetch_add(1, Ordering::SeqCst);
            if !self.delay.is_zero() {
                std::thread::sleep(self.delay);
            }
            if n < self.fail_first {
                return Err(if self.transient {
                    GatewayError::Unavailable("scripted failure".to_string())
                } else {
                    GatewayError::Auth("scripted failure".to_string())
                });
            }
            let text = format!(
                "echo: {}",
                request.messages.last_user_content().unwrap_or_default()
            );
            let usage = super::backends::mock_usage(request, &text);
            Ok(BackendResponse { text, usage })
        }
    }

    #[test]
    fn cache_serves_the_second_identical_request() {
        let tmp = tempfile::tempdir().unwrap();
        let gateway = Gateway::builder(Box::new(EchoBackend::new()))
            .cache_dir(tmp.path())
            .build();
        let req = request("cache me");
        let first = gateway.complete(&req).unwrap();
        assert!(!first.cached);
        assert_eq!(gateway.backend_calls(), 1);
        let second = gateway.complete(&req).unwrap();
        assert!(second.cached);
        assert_eq!(second.text, first.text);
        assert_eq!(second.usage, first.usage);
        // No further backend traffic.
        assert_eq!(gateway.backend_calls(), 1);
    }

    #[test]
    fn cache_survives_a_new_gateway_instance() {
        let tmp = tempfile::tempdir().unwrap();
        let req = request("persist me");
        let first = Gateway::builder(Box::new(EchoBackend::new()))
            .cache_dir(tmp.path())
            .build()
            .complete(&req)
            .unwrap();
        let reopened = Gateway::builder(Box::new(EchoBackend::new()))
            .cache_dir(tmp.path())
            .build();
        let second = reopened.complete(&req).unwrap();
        assert!(second.cached);
        assert_eq!(second.text, first.text);
        assert_eq!(reopened.backend_calls(), 0);
    }

    #[test]
    fn transient_failures_retry_exactly_n_plus_one_attempts() {
        for n in 0..3u64 {
            let gateway = Gateway::builder(Box::new(EchoBackend::failing(n, true)))
                .retry(RetryPolicy::immediate(4))
                .build();
            let completion = gateway.complete(&request("retry me")).unwrap();
            assert!(completion.text.starts_with("echo:"));
            assert_eq!(gateway.backend_calls(), n + 1);
        }
    }

    #[test]
    fn retries_stop_at_the_cap() {
        let gateway = Gateway::builder(Box::new(EchoBackend::failing(10, true)))
            .retry(RetryPolicy::immediate(3))
            .build();
        let err = gateway.complete(&request("never")).unwrap_err();
        assert!(matches!(err, GatewayError::Unavailable(_)));
        assert_eq!(gateway.backend_calls(), 3);
    }

    #[test]
    fn auth_errors_are_not_retried() {
        let gateway = Gateway::builder(Box::new(EchoBackend::failing(10, false)))
            .retry(RetryPolicy::immediate(5))
            .build();
        let err = gateway.complete(&request("denied")).unwrap_err();
        assert!(matches!(err, GatewayError::Auth(_)));
        assert_eq!(gateway.backend_calls(), 1);
    }

    #[test]
    fn concurrent_identical_requests_coalesce() {
        let backend = EchoBackend {
            fail_first: 0,
            transient: true,
            calls: AtomicU64::new(0),
            delay: Duration::from_millis(30),
        };
        let gateway = std::sync::Arc::new(Gateway::builder(Box::new(backend)).build());
        let req = request("dedupe me");
        let mut handles = Vec::new();
        for _ in 0..8 {
            let gateway = std::sync::Arc::clone(&gateway);
            let req = req.clone();
            handles.push(std::thread::spawn(move || gateway.complete(&req).unwrap()));
        }
        let results: Vec<Completion> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        assert_eq!(gateway.backend_calls(), 1);
        assert!(results.iter().all(|c| c.text == results[0].text));
        assert_eq!(results.iter().filter(|c| !c.cached).count(), 1);
    }

    #[test]
    fn serial_pool_preserves_input_order() {
        let gateway = Gateway::builder(Box::new(EchoBackend::new())).build();
        let requests: Vec<CompletionRequest> =
            (0..10).map(|i| request(&format!("item {i}"))).collect();
        let outcomes = gateway.run_pool(requests, 1);
        let indices: Vec<usize> = outcomes.iter().map(|o| o.index).collect();
        assert_eq!(indices, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn pool_results_are_identical_across_parallelism() {
        let requests: Vec<CompletionRequest> =
            (0..100).map(|i| request(&format!("payload {i}"))).collect();
        let collect = |parallelism: usize| -> std::collections::BTreeMap<usize, String> {
            let gateway = Gateway::builder(Box::new(EchoBackend::new())).build();
            gateway
                .run_pool(requests.clone(), parallelism)
                .into_iter()
                .map(|o| (o.index, o.result.unwrap().text))
                .collect()
        };
        assert_eq!(collect(1), collect(8));
    }

    #[test]
    fn one_poisoned_request_does_not_abort_the_pool() {
        let requests: Vec<CompletionRequest> =
            (0..100).map(|i| request(&format!("payload {i}"))).collect();
        // Map every request except index 37 in a fixture backend.
        let entries: Vec<(String, String)> = requests
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != 37)
            .map(|(i, r)| (cache_key(r), format!("ok {i}")))
            .collect();
        let gateway = Gateway::builder(Box::new(super::backends::FixtureBackend::from_entries(
            entries,
        )))
        .build();
        let outcomes = gateway.run_pool(requests, 8);
        assert_eq!(outcomes.len(), 100);
        let failures: Vec<usize> = outcomes
            .iter()
            .filter(|o| o.result.is_err())
            .map(|o| o.index)
            .collect();
        assert_eq!(failures, [37]);
    }

    #[test]
    fn rate_limiter_spaces_requests_out() {
        use std::time::Instant;
        let gateway = Gateway::builder(Box::new(EchoBackend::new()))
            .rate_limit(RateLimit {
                requests: 1,
                per: Duration::from_millis(40),
            })
            .build();
        let started = Instant::now();
        for i in 0..3 {
            gateway.complete(&request(&format!("ping {i}"))).unwrap();
        }
        // Burst capacity covers the first; the next two wait ~40ms each.
        assert!(started.elapsed() >= Duration::from_millis(70));
    }
}

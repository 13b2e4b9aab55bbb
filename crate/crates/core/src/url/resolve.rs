//! Shortened-URL resolution: follow 3xx chains with HEAD (falling back to a
//! body-less GET where HEAD is rejected), with loop detection and per-host
//! politeness (one in-flight request per host, minimum inter-request gap).

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::url::normalize::{normalize, NormalizedUrl};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResolutionStatus {
    Resolved,
    NotShortened,
    FailedTimeout,
    FailedNetwork,
    FailedLoop,
    FailedStatus,
}

impl ResolutionStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            ResolutionStatus::Resolved => "resolved",
            ResolutionStatus::NotShortened => "not_shortened",
            ResolutionStatus::FailedTimeout => "failed_timeout",
            ResolutionStatus::FailedNetwork => "failed_network",
            ResolutionStatus::FailedLoop => "failed_loop",
            ResolutionStatus::FailedStatus => "failed_status",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "resolved" => Some(ResolutionStatus::Resolved),
            "not_shortened" => Some(ResolutionStatus::NotShortened),
            "failed_timeout" => Some(ResolutionStatus::FailedTimeout),
            "failed_network" => Some(ResolutionStatus::FailedNetwork),
            "failed_loop" => Some(ResolutionStatus::FailedLoop),
            "failed_status" => Some(ResolutionStatus::FailedStatus),
            _ => None,
        }
    }
}

impl fmt::Display for ResolutionStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct ResolutionOutcome {
    pub status: ResolutionStatus,
    /// Present iff `status == Resolved`.
    pub final_url: Option<NormalizedUrl>,
    pub redirect_count: u32,
    pub fetched_at: DateTime<Utc>,
}

impl ResolutionOutcome {
    pub fn not_shortened() -> Self {
        ResolutionOutcome {
            status: ResolutionStatus::NotShortened,
            final_url: None,
            redirect_count: 0,
            fetched_at: Utc::now(),
        }
    }

    fn failed(status: ResolutionStatus, redirect_count: u32) -> Self {
        ResolutionOutcome {
            status,
            final_url: None,
            redirect_count,
            fetched_at: Utc::now(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ResolutionPolicy {
    pub max_redirects: u32,
    pub timeout: Duration,
    /// Retry a hop with a body-less GET when HEAD is rejected.
    pub get_fallback: bool,
    pub per_host_delay: Duration,
    pub workers: usize,
    /// Skip the network entirely; shortened URLs keep their normalized form.
    pub no_network: bool,
    pub user_agent: String,
}

impl Default for ResolutionPolicy {
    fn default() -> Self {
        ResolutionPolicy {
            max_redirects: 10,
            timeout: Duration::from_secs(10),
            get_fallback: true,
            per_host_delay: Duration::from_secs(1),
            workers: 4,
            no_network: false,
            user_agent: "conspigraph/0.1".to_string(),
        }
    }
}

enum Hop {
    Response { code: u16, location: Option<String> },
    Timeout,
    Network,
}

pub struct Resolver {
    agent: ureq::Agent,
    policy: ResolutionPolicy,
    gates: Mutex<HashMap<String, Arc<Mutex<Option<Instant>>>>>,
}

impl Resolver {
    pub fn new(policy: ResolutionPolicy) -> Self {
        let agent = ureq::AgentBuilder::new()
            .redirects(0)
            .timeout(policy.timeout)
            .user_agent(&policy.user_agent)
            .build();
        Resolver {
            agent,
            policy,
            gates: Mutex::new(HashMap::new()),
        }
    }

    pub fn policy(&self) -> &ResolutionPolicy {
        &self.policy
    }

    /// Resolve a single shortened URL by walking its redirect chain.
    pub fn resolve(&self, url: &NormalizedUrl) -> ResolutionOutcome {
        if self.policy.no_network {
            return ResolutionOutcome::failed(ResolutionStatus::FailedNetwork, 0);
        }
        let mut current = url.clone();
        let mut visited: HashSet<String> = HashSet::new();
        visited.insert(current.to_string());
        let mut redirects = 0u32;

        loop {
            let hop = self.request(&current);
            match hop {
                Hop::Timeout => return ResolutionOutcome::failed(ResolutionStatus::FailedTimeout, redirects),
                Hop::Network => return ResolutionOutcome::failed(ResolutionStatus::FailedNetwork, redirects),
                Hop::Response { code, location } => {
                    if (300..400).contains(&code) {
                        let Some(location) = location else {
                            return ResolutionOutcome::failed(ResolutionStatus::FailedStatus, redirects);
                        };
                        redirects += 1;
                        if redirects > self.policy.max_redirects {
                            return ResolutionOutcome::failed(ResolutionStatus::FailedLoop, redirects);
                        }
                        let next = match join_location(&current, &location) {
                            Some(next) => next,
                            None => {
                                return ResolutionOutcome::failed(
                                    ResolutionStatus::FailedStatus,
                                    redirects,
                                )
                            }
                        };
                        if !visited.insert(next.to_string()) {
                            return ResolutionOutcome::failed(ResolutionStatus::FailedLoop, redirects);
                        }
                        current = next;
                    } else if code < 400 {
                        return ResolutionOutcome {
                            status: ResolutionStatus::Resolved,
                            final_url: Some(current),
                            redirect_count: redirects,
                            fetched_at: Utc::now(),
                        };
                    } else {
                        return ResolutionOutcome::failed(ResolutionStatus::FailedStatus, redirects);
                    }
                }
            }
        }
    }

    /// Resolve a batch with a bounded worker pool. Politeness is shared
    /// across workers via the per-host gates.
    pub fn resolve_batch(&self, urls: Vec<NormalizedUrl>) -> HashMap<String, ResolutionOutcome> {
        let results: Mutex<HashMap<String, ResolutionOutcome>> = Mutex::new(HashMap::new());
        if urls.is_empty() {
            return results.into_inner().unwrap();
        }
        let queue: Mutex<VecDeque<NormalizedUrl>> = Mutex::new(urls.into());
        let workers = self.policy.workers.max(1);
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let url = match queue.lock().unwrap().pop_front() {
                        Some(url) => url,
                        None => break,
                    };
                    let key = url.to_string();
                    let outcome = self.resolve(&url);
                    results.lock().unwrap().insert(key, outcome);
                });
            }
        });
        results.into_inner().unwrap()
    }

    /// One polite request. Holds the host gate for the duration of the
    /// request so at most one request per host is in flight, and spaces
    /// consecutive requests to a host by at least the configured delay.
    fn request(&self, url: &NormalizedUrl) -> Hop {
        let gate = {
            let mut gates = self.gates.lock().unwrap();
            gates.entry(url.host.clone()).or_default().clone()
        };
        let mut last = gate.lock().unwrap();
        if let Some(t) = *last {
            let ready = t + self.policy.per_host_delay;
            let now = Instant::now();
            if ready > now {
                std::thread::sleep(ready - now);
            }
        }

        let url_str = url.to_string();
        let mut hop = self.call("HEAD", &url_str);
        if self.policy.get_fallback {
            if let Hop::Response { code, .. } = hop {
                if matches!(code, 400 | 403 | 405 | 501) {
                    // HEAD rejected; retry the hop with a body-less GET,
                    // spacing the retry like any other request
                    std::thread::sleep(self.policy.per_host_delay);
                    hop = self.call("GET", &url_str);
                }
            }
        }
        *last = Some(Instant::now());
        hop
    }

    fn call(&self, method: &str, url: &str) -> Hop {
        match self.agent.request(method, url).call() {
            Ok(resp) => Hop::Response {
                code: resp.status(),
                location: resp.header("location").map(str::to_string),
            },
            Err(ureq::Error::Status(code, resp)) => Hop::Response {
                code,
                location: resp.header("location").map(str::to_string),
            },
            Err(ureq::Error::Transport(t)) => match t.kind() {
                ureq::ErrorKind::Dns | ureq::ErrorKind::ConnectionFailed => Hop::Network,
                _ if is_timeout(&t) => Hop::Timeout,
                _ => Hop::Network,
            },
        }
    }
}

fn is_timeout(err: &(impl std::error::Error + 'static)) -> bool {
    let mut source: Option<&(dyn std::error::Error + 'static)> = Some(err);
    while let Some(e) = source {
        if let Some(io) = e.downcast_ref::<std::io::Error>() {
            if matches!(
                io.kind(),
                std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock
            ) {
                return true;
            }
        }
        source = e.source();
    }
    err.to_string().to_lowercase().contains("timed out")
}

/// Resolve a Location header (possibly relative) against the current URL.
fn join_location(current: &NormalizedUrl, location: &str) -> Option<NormalizedUrl> {
    let base = url::Url::parse(&current.to_string()).ok()?;
    let joined = base.join(location).ok()?;
    normalize(joined.as_str()).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_locations_join_against_current() {
        let base = normalize("https://sho.rt/a/b").unwrap();
        let next = join_location(&base, "/c").unwrap();
        assert_eq!(next.to_string(), "https://sho.rt/c");
        let abs = join_location(&base, "https://target.example/x").unwrap();
        assert_eq!(abs.to_string(), "https://target.example/x");
    }

    #[test]
    fn no_network_mode_never_touches_the_wire() {
        let resolver = Resolver::new(ResolutionPolicy {
            no_network: true,
            ..Default::default()
        });
        let url = normalize("https://bit.ly/x").unwrap();
        let outcome = resolver.resolve(&url);
        assert_eq!(outcome.status, ResolutionStatus::FailedNetwork);
        assert!(outcome.final_url.is_none());
    }
}

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::{ChatProvider, Message, ProviderError, Role};

/// Reply used for descriptions without a scripted entry: an ego driving
/// straight on a two-lane road with a slower car ahead.
pub const FALLBACK_REPLY: &str = "\
Summary: Two vehicles on a straight two-lane road; V2 drives ahead of the ego.

Vehicle Code:
- 'V1': [-1,0,0,4,4,4,4,4,4,1]
- 'V2': [0,1,0,3,3,3,3,3,3,1]

Map Code:
- 'Map': [2,0,0,0,-1,1]

Interaction Code:
- 'I1': [0,0,0,0,0] | [0,0,0,0,0]
- 'I2': [4,4,4,4,4] | [0,0,0,0,0]
";

/// Deterministic offline provider keyed by the description (the first user
/// message). A scripted entry may hold several replies, returned in order
/// with the last one repeating.
pub struct MockProvider {
    script: HashMap<String, Vec<String>>,
    cursor: Mutex<HashMap<String, usize>>,
    fallback: String,
    calls: AtomicUsize,
    failures: AtomicUsize,
}

impl Default for MockProvider {
    fn default() -> Self {
        Self::new(HashMap::new())
    }
}

impl MockProvider {
    pub fn new(script: HashMap<String, String>) -> Self {
        Self {
            script: script.into_iter().map(|(k, v)| (k, vec![v])).collect(),
            cursor: Mutex::new(HashMap::new()),
            fallback: FALLBACK_REPLY.to_string(),
            calls: AtomicUsize::new(0),
            failures: AtomicUsize::new(0),
        }
    }

    pub fn with_fallback(mut self, reply: impl Into<String>) -> Self {
        self.fallback = reply.into();
        self
    }

    pub fn with_sequence(mut self, description: impl Into<String>, replies: Vec<String>) -> Self {
        assert!(!replies.is_empty(), "a scripted sequence needs at least one reply");
        self.script.insert(description.into(), replies);
        self
    }

    /// Makes the next `n` calls fail with a transient error.
    pub fn failing_first(self, n: usize) -> Self {
        self.failures.store(n, Ordering::SeqCst);
        self
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl ChatProvider for MockProvider {
    fn complete(&self, messages: &[Message]) -> Result<String, ProviderError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let pending = self.failures.load(Ordering::SeqCst);
        if pending > 0 {
            self.failures.store(pending - 1, Ordering::SeqCst);
            return Err(ProviderError::Transient("scripted failure".into()));
        }
        let key = messages.iter().find(|m| m.role == Role::User).map(|m| m.content.as_str()).unwrap_or("");
        let Some(replies) = self.script.get(key) else {
            return Ok(self.fallback.clone());
        };
        let mut cursor = self.cursor.lock().expect("mock cursor lock");
        let i = cursor.entry(key.to_string()).or_insert(0);
        let reply = replies[(*i).min(replies.len() - 1)].clone();
        *i += 1;
        Ok(reply)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ask(p: &MockProvider, text: &str) -> Result<String, ProviderError> {
        p.complete(&[Message::new(Role::System, "sys"), Message::new(Role::User, text)])
    }

    #[test]
    fn scripted_and_fallback_replies() {
        let p = MockProvider::new(HashMap::from([("a".to_string(), "reply a".to_string())]));
        assert_eq!(ask(&p, "a").unwrap(), "reply a");
        assert_eq!(ask(&p, "zzz").unwrap(), FALLBACK_REPLY);
        assert_eq!(p.calls(), 2);
    }

    #[test]
    fn sequences_repeat_their_last_reply() {
        let p = MockProvider::default().with_sequence("d", vec!["one".into(), "two".into()]);
        let got: Vec<String> = (0..3).map(|_| ask(&p, "d").unwrap()).collect();
        assert_eq!(got, ["one", "two", "two"]);
    }

    #[test]
    fn injected_failures_come_first() {
        let p = MockProvider::default().failing_first(2);
        assert!(ask(&p, "x").is_err());
        assert!(ask(&p, "x").is_err());
        assert!(ask(&p, "x").is_ok());
        assert_eq!(p.calls(), 3);
    }
}

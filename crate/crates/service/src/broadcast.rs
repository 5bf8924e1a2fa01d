//! Fan-out of feed messages to any number of subscribers.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};

use tokio::sync::mpsc;

/// Messages a subscriber may fall behind before it is cut off.
pub const DEFAULT_BACKLOG: usize = 120;

/// Non-blocking publisher with one bounded queue per subscriber. A
/// subscriber whose queue is full when a message arrives is dropped;
/// publishing never waits.
#[derive(Debug, Clone)]
pub struct Broadcaster {
    backlog: usize,
    subscribers: Arc<Mutex<Vec<Slot>>>,
}

#[derive(Debug)]
struct Slot {
    tx: mpsc::Sender<Arc<str>>,
    lagged: Arc<AtomicBool>,
}

/// The subscriber fell more than the backlog behind and has been dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lagged;

pub struct Subscription {
    rx: mpsc::Receiver<Arc<str>>,
    lagged: Arc<AtomicBool>,
}

impl Broadcaster {
    pub fn new(backlog: usize) -> Self {
        Broadcaster { backlog: backlog.max(1), subscribers: Arc::default() }
    }

    pub fn publish(&self, message: impl Into<Arc<str>>) {
        let message = message.into();
        let mut subs = self.subscribers.lock().expect("subscriber list poisoned");
        subs.retain(|s| match s.tx.try_send(message.clone()) {
            Ok(()) => true,
            Err(mpsc::error::TrySendError::Full(_)) => {
                s.lagged.store(true, Ordering::Release);
                false
            }
            Err(mpsc::error::TrySendError::Closed(_)) => false,
        });
    }

    pub fn subscribe(&self) -> Subscription {
        let (tx, rx) = mpsc::channel(self.backlog);
        let lagged = Arc::new(AtomicBool::new(false));
        self.subscribers.lock().expect("subscriber list poisoned").push(Slot { tx, lagged: lagged.clone() });
        Subscription { rx, lagged }
    }

    /// Live subscribers as of the last publish.
    pub fn subscribers(&self) -> usize {
        self.subscribers.lock().expect("subscriber list poisoned").len()
    }
}

impl Default for Broadcaster {
    fn default() -> Self {
        Broadcaster::new(DEFAULT_BACKLOG)
    }
}

impl Subscription {
    /// Next message; `None` once the broadcaster is gone. After a lag the
    /// queued backlog is discarded and `Err(Lagged)` is returned.
    pub async fn next(&mut self) -> Option<Result<Arc<str>, Lagged>> {
        if self.lagged.load(Ordering::Acquire) {
            return Some(Err(Lagged));
        }
        match self.rx.recv().await {
            Some(m) if !self.lagged.load(Ordering::Acquire) => Some(Ok(m)),
            Some(_) => Some(Err(Lagged)),
            None if self.lagged.load(Ordering::Acquire) => Some(Err(Lagged)),
            None => None,
        }
    }

    /// Non-waiting variant of [`Subscription::next`]; `None` when nothing
    /// is queued.
    pub fn try_next(&mut self) -> Option<Result<Arc<str>, Lagged>> {
        if self.lagged.load(Ordering::Acquire) {
            return Some(Err(Lagged));
        }
        self.rx.try_recv().ok().map(Ok)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn publishing_without_subscribers_is_fine() {
        let b = Broadcaster::default();
        for i in 0..1000 {
            b.publish(format!("{i}"));
        }
        assert_eq!(b.subscribers(), 0);
    }

    #[test]
    fn stalled_subscriber_is_cut_off_others_are_not() {
        let b = Broadcaster::default();
        let mut stalled = b.subscribe();
        let mut live = b.subscribe();
        // Three seconds at 60 Hz.
        for i in 0..180 {
            b.publish(format!("{i}"));
            assert_eq!(live.try_next().unwrap().unwrap().as_ref(), format!("{i}"));
        }
        assert_eq!(stalled.try_next(), Some(Err(Lagged)));
        assert_eq!(b.subscribers(), 1);
        assert!(live.try_next().is_none());
    }

    #[test]
    fn subscriber_within_backlog_sees_everything() {
        let b = Broadcaster::default();
        let mut s = b.subscribe();
        for i in 0..120 {
            b.publish(format!("{i}"));
        }
        let got: Vec<_> = std::iter::from_fn(|| s.try_next()).map(|m| m.unwrap()).collect();
        assert_eq!(got.len(), 120);
        // One past the backlog is too many.
        let mut t = b.subscribe();
        for i in 0..121 {
            b.publish(format!("{i}"));
        }
        assert_eq!(t.try_next(), Some(Err(Lagged)));
    }
}

//! Replenishing query budget.
//!
//! `floor(r·N)` queries are granted at the first sample of every window of
//! `N` samples (samples 1, N+1, 2N+1, …). Unused grants carry over.

use serde::{Deserialize, Serialize};

use crate::error::{IttaError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetState {
    pub remaining: u64,
    pub rate: f64,
    pub window: u64,
    pub samples_seen: u64,
    pub total_granted: u64,
    pub total_consumed: u64,
}

impl BudgetState {
    pub fn new(rate: f64, window: u64) -> Result<Self> {
        if !(rate > 0.0 && rate < 1.0) {
            return Err(IttaError::config(format!("budget rate {rate} must lie in (0, 1)")));
        }
        if window == 0 {
            return Err(IttaError::config("budget window must be at least 1"));
        }
        let state = BudgetState {
            remaining: 0,
            rate,
            window,
            samples_seen: 0,
            total_granted: 0,
            total_consumed: 0,
        };
        if state.per_window() == 0 {
            return Err(IttaError::config(format!(
                "budget rate {rate} x window {window} grants no queries"
            )));
        }
        Ok(state)
    }

    /// Queries granted per window, `floor(r·N)`.
    pub fn per_window(&self) -> u64 {
        // 0.29 * 100 evaluates to 28.999…; nudge before flooring
        (self.rate * self.window as f64 + 1e-9).floor() as u64
    }

    /// Advances by one sample, granting at window starts. Returns the
    /// amount granted.
    pub fn tick(&mut self) -> u64 {
        self.samples_seen += 1;
        if self.samples_seen % self.window == 1 % self.window {
            let grant = self.per_window();
            self.remaining += grant;
            self.total_granted += grant;
            grant
        } else {
            0
        }
    }

    /// Spends one query if any are left.
    pub fn consume(&mut self) -> bool {
        if self.remaining == 0 {
            return false;
        }
        self.remaining -= 1;
        self.total_consumed += 1;
        true
    }

    /// Windows started so far.
    pub fn windows_started(&self) -> u64 {
        self.samples_seen.div_ceil(self.window)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grants_ten_every_thousand() {
        let mut b = BudgetState::new(0.01, 1000).unwrap();
        let mut grants = Vec::new();
        for i in 1..=10_000u64 {
            if b.tick() > 0 {
                grants.push(i);
            }
        }
        assert_eq!(grants, (0..10).map(|k| 1 + 1000 * k).collect::<Vec<_>>());
        assert_eq!(b.total_granted, 100);
    }

    #[test]
    fn carry_over() {
        let mut b = BudgetState::new(0.01, 1000).unwrap();
        b.tick();
        for _ in 0..3 {
            assert!(b.consume());
        }
        for _ in 2..=1001 {
            b.tick();
        }
        assert_eq!(b.samples_seen, 1001);
        assert_eq!(b.remaining, 17);
    }

    #[test]
    fn consume_never_goes_negative() {
        let mut b = BudgetState::new(0.5, 2).unwrap();
        b.tick();
        assert!(b.consume());
        assert_eq!(b.remaining, 0);
        assert!(!b.consume());
        assert_eq!(b.remaining, 0);
        assert_eq!(b.total_consumed, 1);
    }

    #[test]
    fn degenerate_budgets_rejected() {
        assert!(matches!(BudgetState::new(0.0005, 1000), Err(IttaError::Config(_))));
        assert!(BudgetState::new(1.0, 10).is_err());
        assert!(BudgetState::new(0.5, 0).is_err());
        assert_eq!(BudgetState::new(0.29, 100).unwrap().per_window(), 29);
    }

    #[test]
    fn window_of_one_grants_every_sample() {
        // r·N must be >= 1, impossible with N = 1 and r < 1
        assert!(BudgetState::new(0.9, 1).is_err());
    }
}

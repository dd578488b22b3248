//! Truncation policies: how far the chaos expansion reaches and what happens
//! when an operation tries to leave it.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::index::MultiIndex;

/// What to do when a produced term exceeds the degree budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverflowMode {
    /// Error out. Default for identity tests.
    Strict,
    /// Drop the term and increment the truncation counter. For simulations.
    Truncate,
}

/// Shared truncation contract for every `ChaosVector` in a computation.
///
/// `headroom` is extra degree allowed transiently so that products of
/// full-degree vectors stay exact before results are inspected. Dropped
/// terms are counted in a shared counter so truncation is never silent.
#[derive(Debug, Clone)]
pub struct TruncationPolicy {
    pub k: u32,
    pub n_max: u32,
    pub headroom: u32,
    pub drop_tol: f64,
    pub overflow_mode: OverflowMode,
    truncations: Arc<AtomicU64>,
}

impl TruncationPolicy {
    pub fn new(
        k: u32,
        n_max: u32,
        headroom: u32,
        drop_tol: f64,
        overflow_mode: OverflowMode,
    ) -> Self {
        TruncationPolicy {
            k,
            n_max,
            headroom,
            drop_tol,
            overflow_mode,
            truncations: Arc::new(AtomicU64::new(0)),
        }
    }

    /// Strict policy with no coefficient pruning, the test default.
    pub fn strict(k: u32, n_max: u32, headroom: u32) -> Self {
        Self::new(k, n_max, headroom, 0.0, OverflowMode::Strict)
    }

    /// Total degree available to intermediate results.
    pub fn budget(&self) -> u32 {
        self.n_max + self.headroom
    }

    /// Whether α fits the support and degree budget.
    pub fn admits(&self, idx: &MultiIndex) -> bool {
        idx.degree() <= self.budget() && idx.max_coordinate().is_none_or(|k| k < self.k)
    }

    /// Accepts a produced term of the given degree, or handles the overflow:
    /// Ok(true) keep, Ok(false) dropped (counted), Err in strict mode.
    pub fn accept_degree(&self, degree: u32) -> Result<bool> {
        if degree <= self.budget() {
            return Ok(true);
        }
        match self.overflow_mode {
            OverflowMode::Strict => Err(Error::DegreeOverflow {
                degree,
                budget: self.budget(),
            }),
            OverflowMode::Truncate => {
                self.truncations.fetch_add(1, Ordering::Relaxed);
                Ok(false)
            }
        }
    }

    /// Terms truncated so far across every clone of this policy.
    pub fn truncation_count(&self) -> u64 {
        self.truncations.load(Ordering::Relaxed)
    }

    /// Same truncated space and budget; the counter may differ.
    pub fn compatible(&self, other: &TruncationPolicy) -> bool {
        self.k == other.k
            && self.n_max == other.n_max
            && self.headroom == other.headroom
            && self.drop_tol == other.drop_tol
    }

    pub fn require_compatible(&self, other: &TruncationPolicy) -> Result<()> {
        if self.compatible(other) {
            Ok(())
        } else {
            Err(Error::PolicyMismatch(format!(
                "(K={}, N={}, headroom={}, drop_tol={:e}) vs (K={}, N={}, headroom={}, drop_tol={:e})",
                self.k, self.n_max, self.headroom, self.drop_tol,
                other.k, other.n_max, other.headroom, other.drop_tol
            )))
        }
    }

    pub fn require_headroom(&self, need: u32) -> Result<()> {
        if self.headroom >= need {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "operation needs headroom >= {need}, policy has {}",
                self.headroom
            )))
        }
    }

    /// Same policy with a fresh region: mode switched to truncate.
    pub fn truncating(&self) -> Self {
        let mut p = self.clone();
        p.overflow_mode = OverflowMode::Truncate;
        p
    }
}

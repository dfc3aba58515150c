//! Residual accounting and the JSON verification report.
//!
//! A check passes when `max_residual ≤ tolerance · scale` (inclusive).
//! Lower-bound checks ("this residual must exceed a threshold") are stored
//! as the shortfall ratio `threshold / observed` against tolerance 1 and
//! scale 1, so the same rule applies.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SamplePoint;

pub const SPEC_VERSION: &str = "1.0";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check_id: String,
    pub metric_or_pair: String,
    pub samples_used: usize,
    pub seed: u64,
    pub max_residual: f64,
    pub scale: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub worst_point: SamplePoint,
}

impl CheckResult {
    pub fn new(
        check_id: impl Into<String>,
        subject: impl Into<String>,
        samples_used: usize,
        seed: u64,
        max_residual: f64,
        scale: f64,
        tolerance: f64,
        worst_point: SamplePoint,
    ) -> Self {
        CheckResult {
            check_id: check_id.into(),
            metric_or_pair: subject.into(),
            samples_used,
            seed,
            passed: max_residual <= tolerance * scale,
            max_residual,
            scale,
            tolerance,
            worst_point,
        }
    }

    /// Check that `observed ≥ threshold` (both already scaled).
    pub fn lower_bound(
        check_id: impl Into<String>,
        subject: impl Into<String>,
        samples_used: usize,
        seed: u64,
        observed: f64,
        threshold: f64,
        worst_point: SamplePoint,
    ) -> Self {
        let ratio = if observed > 0.0 {
            threshold / observed
        } else {
            f64::MAX
        };
        Self::new(check_id, subject, samples_used, seed, ratio, 1.0, 1.0, worst_point)
    }

    /// Pass/fail line for terminal output.
    pub fn summary_line(&self) -> String {
        format!(
            "[{}] {:<40} {:<28} residual {:.3e} <= {:.1e} x {:.3e}  (n={}, seed={})",
            if self.passed { "PASS" } else { "FAIL" },
            self.check_id,
            self.metric_or_pair,
            self.max_residual,
            self.tolerance,
            self.scale,
            self.samples_used,
            self.seed
        )
    }
}

/// Tracks the worst residual/scale ratio over a set of samples.
#[derive(Debug, Clone, Default)]
pub struct ResidualTracker {
    worst: Option<(f64, f64, f64, SamplePoint)>,
    count: usize,
}

impl ResidualTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn observe(&mut self, residual: f64, scale: f64, point: &SamplePoint) {
        self.count += 1;
        let ratio = if residual.is_nan() { f64::INFINITY } else { residual / scale };
        if self.worst.as_ref().is_none_or(|w| ratio > w.0) {
            self.worst = Some((ratio, residual, scale, point.clone()));
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Largest `residual / scale` seen.
    pub fn max_ratio(&self) -> f64 {
        self.worst.as_ref().map_or(0.0, |w| w.0)
    }

    pub fn worst_point(&self) -> Option<&SamplePoint> {
        self.worst.as_ref().map(|w| &w.3)
    }

    pub fn finish(self, check_id: impl Into<String>, subject: impl Into<String>, seed: u64, tol: f64) -> CheckResult {
        let (_, residual, scale, point) = self.worst.expect("tracker observed no samples");
        CheckResult::new(check_id, subject, self.count, seed, residual, scale, tol, point)
    }

    /// Lower-bound check on the largest ratio seen.
    pub fn finish_exceeds(self, check_id: impl Into<String>, subject: impl Into<String>, seed: u64, threshold: f64) -> CheckResult {
        let (ratio, _, _, point) = self.worst.expect("tracker observed no samples");
        CheckResult::lower_bound(check_id, subject, self.count, seed, ratio, threshold, point)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub engine_version: String,
    pub spec_version: String,
    pub dimension: usize,
    pub checks: Vec<CheckResult>,
    pub overall: bool,
}

/// Fold check results into a report; `overall` is their conjunction.
pub fn aggregate(results: Vec<CheckResult>, dimension: usize) -> Result<VerificationReport> {
    if results.is_empty() {
        return Err(Error::Argument("cannot aggregate an empty check list".into()));
    }
    Ok(VerificationReport {
        engine_version: env!("CARGO_PKG_VERSION").to_string(),
        spec_version: SPEC_VERSION.to_string(),
        dimension,
        overall: results.iter().all(|c| c.passed),
        checks: results,
    })
}

impl VerificationReport {
    pub fn failing(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt() -> SamplePoint {
        SamplePoint::new(vec![0.1, 0.0, 0.0], vec![0.0, 1.0, 0.0]).unwrap()
    }

    fn check(id: &str, residual: f64) -> CheckResult {
        CheckResult::new(id, "m", 10, 42, residual, 1.0, 1e-8, pt())
    }

    #[test]
    fn overall_is_conjunction() {
        let r = aggregate(vec![check("a", 0.0), check("b", 1e-9)], 3).unwrap();
        assert!(r.overall);
        let r = aggregate(
            vec![
                check("a", 0.0),
                check("b", 0.0),
                check("bad", 1.0),
                check("d", 0.0),
                check("e", 0.0),
            ],
            3,
        )
        .unwrap();
        assert!(!r.overall);
        let ids: Vec<_> = r.failing().map(|c| c.check_id.as_str()).collect();
        assert_eq!(ids, ["bad"]);
        assert_eq!(r.checks[2].check_id, "bad");
    }

    #[test]
    fn boundary_is_inclusive() {
        let c = CheckResult::new("edge", "m", 1, 0, 2.5e-8, 2.5, 1e-8, pt());
        assert!(c.passed);
        let r = aggregate(vec![c], 3).unwrap();
        assert!(r.overall);
    }

    #[test]
    fn empty_aggregate_rejected() {
        assert!(matches!(aggregate(vec![], 3), Err(Error::Argument(_))));
    }

    #[test]
    fn lower_bound_semantics() {
        assert!(CheckResult::lower_bound("x", "m", 1, 0, 0.5, 1e-3, pt()).passed);
        assert!(!CheckResult::lower_bound("x", "m", 1, 0, 1e-4, 1e-3, pt()).passed);
        assert!(!CheckResult::lower_bound("x", "m", 1, 0, 0.0, 1e-3, pt()).passed);
    }

    #[test]
    fn tracker_keeps_worst_ratio() {
        let mut t = ResidualTracker::new();
        let a = pt();
        let b = SamplePoint::new(vec![0.0; 3], vec![1.0, 1.0, 0.0]).unwrap();
        t.observe(1.0, 10.0, &a);
        t.observe(0.5, 1.0, &b);
        t.observe(0.0, 1.0, &a);
        assert_eq!(t.count(), 3);
        let c = t.finish("c", "m", 1, 1.0);
        assert_eq!(c.worst_point, b);
        assert_eq!(c.max_residual, 0.5);
        assert_eq!(c.samples_used, 3);
    }
}

//! Numerical checks of the functional inequalities behind the stability
//! argument: weighted Poincaré, Gagliardo–Nirenberg, relative-quantity
//! bounds and the inverse-pressure estimate.

pub mod gn;
pub mod legendre;
pub mod poincare;
pub mod relative;
pub mod report;

/// Outcome of a single check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// Inputs outside the inequality's hypotheses; not a failure.
    HypothesisViolated,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::HypothesisViolated => "hypothesis-violated",
        }
    }

    pub fn is_failure(self) -> bool {
        self == Verdict::Fail
    }
}

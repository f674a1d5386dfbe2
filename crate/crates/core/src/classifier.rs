//! Selective decisions from confidence bounds.

use std::fmt;

use crate::interval::ConfidenceBound;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Positive,
    Negative,
    Unknown,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Positive => "positive",
            Label::Negative => "negative",
            Label::Unknown => "unknown",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectiveDecision {
    pub label: Label,
    pub confidence: f64,
    pub ranking_score: f64,
}

/// Positive when the whole bound lies above `tau`, negative when it lies
/// below, unknown otherwise. Equality counts as unknown.
pub fn decide(bound: &ConfidenceBound, tau: f64) -> Label {
    if bound.lower() > tau {
        Label::Positive
    } else if bound.upper() < tau {
        Label::Negative
    } else {
        Label::Unknown
    }
}

/// The class chosen from the bound center; a center of exactly 0.5 is positive.
pub fn predicted_positive(bound: &ConfidenceBound) -> bool {
    bound.center >= 0.5
}

/// Lower bound when the center is at least 0.5, upper bound otherwise.
pub fn confidence(bound: &ConfidenceBound) -> f64 {
    if predicted_positive(bound) {
        bound.lower()
    } else {
        bound.upper()
    }
}

/// Lower bound on the probability of the predicted class. Higher is more confident.
pub fn ranking_score(bound: &ConfidenceBound) -> f64 {
    if predicted_positive(bound) {
        confidence(bound)
    } else {
        1.0 - confidence(bound)
    }
}

pub fn classify(bound: &ConfidenceBound, tau: f64) -> SelectiveDecision {
    SelectiveDecision {
        label: decide(bound, tau),
        confidence: confidence(bound),
        ranking_score: ranking_score(bound),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn b(center: f64, halfwidth: f64) -> ConfidenceBound {
        ConfidenceBound {
            center,
            halfwidth,
            z: 1.96,
        }
    }

    #[test]
    fn selective_rule() {
        assert_eq!(decide(&b(0.98, 0.01), 0.95), Label::Positive);
        assert_eq!(decide(&b(0.50, 0.30), 0.95), Label::Negative);
        assert_eq!(decide(&b(0.94, 0.05), 0.95), Label::Unknown);
        // boundary equality
        assert_eq!(decide(&b(0.75, 0.25), 0.5), Label::Unknown);
        assert_eq!(decide(&b(0.25, 0.25), 0.5), Label::Unknown);
    }

    #[test]
    fn confidence_branches() {
        assert_abs_diff_eq!(confidence(&b(0.8, 0.1)), 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(confidence(&b(0.3, 0.1)), 0.4, epsilon = 1e-15);
        assert_eq!(confidence(&b(0.5, 0.5)), 0.0);
    }

    #[test]
    fn ranking_examples() {
        assert_abs_diff_eq!(ranking_score(&b(0.8, 0.1)), 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(ranking_score(&b(0.2, 0.1)), 0.7, epsilon = 1e-15);
        assert_eq!(ranking_score(&b(0.5, 0.5)), 0.0);
    }

    #[test]
    fn classify_bundles_all_three() {
        let d = classify(&b(0.9, 0.05), 0.8);
        assert_eq!(d.label, Label::Positive);
        assert_abs_diff_eq!(d.confidence, 0.85, epsilon = 1e-15);
        assert_abs_diff_eq!(d.ranking_score, 0.85, epsilon = 1e-15);
    }

    fn valid_bound() -> impl Strategy<Value = ConfidenceBound> {
        (0.0f64..=1.0, 0.0f64..=0.5).prop_map(|(c, w)| b(c, w.min(c).min(1.0 - c)))
    }

    proptest! {
        #[test]
        fn class_symmetry(bound in valid_bound()) {
            prop_assume!(bound.center != 0.5);
            let mirrored = b(1.0 - bound.center, bound.halfwidth);
            prop_assert!((ranking_score(&bound) - ranking_score(&mirrored)).abs() < 1e-12);
            prop_assert_ne!(predicted_positive(&bound), predicted_positive(&mirrored));
        }

        #[test]
        fn positive_decision_matches_ranking(bound in valid_bound(), tau in 0.5f64..1.0) {
            let positive = decide(&bound, tau) == Label::Positive;
            prop_assert_eq!(positive, predicted_positive(&bound) && ranking_score(&bound) > tau);
        }

        #[test]
        fn ranking_decreases_with_halfwidth(c in 0.5f64..1.0, w in 0.0f64..0.5, dw in 1e-6f64..0.1) {
            let w = w.min(1.0 - c);
            let w2 = (w + dw).min(1.0 - c).min(c);
            prop_assume!(w2 > w);
            prop_assert!(ranking_score(&b(c, w2)) < ranking_score(&b(c, w)));
        }

        #[test]
        fn ranking_in_unit_interval(bound in valid_bound()) {
            let r = ranking_score(&bound);
            prop_assert!((0.0..=1.0).contains(&r));
        }
    }
}

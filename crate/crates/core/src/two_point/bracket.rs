use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BracketFlag {
    Ok,
    /// Width above the configured tolerance; still a valid enclosure.
    Wide,
    /// No certified information beyond the a-priori bounds.
    Invalid,
}

impl BracketFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            BracketFlag::Ok => "ok",
            BracketFlag::Wide => "wide",
            BracketFlag::Invalid => "invalid",
        }
    }

    pub fn worst(self, other: BracketFlag) -> BracketFlag {
        use BracketFlag::*;
        match (self, other) {
            (Invalid, _) | (_, Invalid) => Invalid,
            (Wide, _) | (_, Wide) => Wide,
            _ => Ok,
        }
    }
}

/// A two-sided enclosure `[lower, upper]` of a log-scale quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lower: f64,
    pub upper: f64,
    pub flag: BracketFlag,
}

/// `lower <= upper` up to a few ulps; ends computed along different
/// formulas may miss each other by rounding.
pub fn within_rounding(lower: f64, upper: f64) -> bool {
    lower <= upper || lower - upper <= 8.0 * f64::EPSILON * lower.abs().max(upper.abs()).max(1.0)
}

impl Bracket {
    pub fn new(lower: f64, upper: f64) -> Self {
        debug_assert!(lower <= upper || lower.is_nan() || upper.is_nan(), "bracket [{lower}, {upper}]");
        Bracket { lower, upper, flag: BracketFlag::Ok }
    }

    pub fn point(v: f64) -> Self {
        Bracket::new(v, v)
    }

    pub fn with_flag(mut self, flag: BracketFlag) -> Self {
        self.flag = flag;
        self
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn mid(&self) -> f64 {
        if self.upper.is_finite() {
            0.5 * (self.lower + self.upper)
        } else {
            self.lower
        }
    }

    pub fn contains(&self, v: f64, slack: f64) -> bool {
        v >= self.lower - slack && v <= self.upper + slack
    }

    /// `self ⊆ outer` up to `slack`.
    pub fn within(&self, outer: &Bracket, slack: f64) -> bool {
        self.lower >= outer.lower - slack && self.upper <= outer.upper + slack
    }

    pub fn overlaps(&self, other: &Bracket, slack: f64) -> bool {
        self.lower <= other.upper + slack && other.lower <= self.upper + slack
    }

    pub fn scale(&self, k: f64) -> Bracket {
        debug_assert!(k > 0.0);
        Bracket { lower: self.lower * k, upper: self.upper * k, flag: self.flag }
    }

    pub fn shift(&self, c: f64) -> Bracket {
        Bracket { lower: self.lower + c, upper: self.upper + c, flag: self.flag }
    }

    pub fn sum(&self, other: &Bracket) -> Bracket {
        Bracket { lower: self.lower + other.lower, upper: self.upper + other.upper, flag: self.flag.worst(other.flag) }
    }

    /// Intersection with a bracket known to contain the same quantity.
    /// When the two are disjoint the result collapses onto `outer`'s nearest
    /// end, flagged invalid unless the gap is rounding.
    pub fn intersect(&self, outer: &Bracket) -> Bracket {
        let lower = self.lower.max(outer.lower);
        let upper = self.upper.min(outer.upper);
        if lower <= upper {
            return Bracket { lower, upper, flag: self.flag };
        }
        let v = if self.lower > outer.upper { outer.upper } else { outer.lower };
        let flag = if within_rounding(lower, upper) { self.flag } else { BracketFlag::Invalid };
        Bracket { lower: v, upper: v, flag }
    }

    /// Flags the bracket as wide when its width exceeds `tol`.
    pub fn classify(mut self, tol: f64) -> Bracket {
        if self.flag == BracketFlag::Ok && !(self.width() <= tol) {
            self.flag = BracketFlag::Wide;
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intersect_and_classify() {
        let a = Bracket::new(1.0, 3.0);
        let b = Bracket::new(2.0, 5.0);
        assert_eq!(a.intersect(&b), Bracket::new(2.0, 3.0));
        assert_eq!(a.classify(1.0).flag, BracketFlag::Wide);
        assert_eq!(a.classify(2.0).flag, BracketFlag::Ok);
        let c = Bracket::new(4.0, 5.0);
        assert_eq!(c.intersect(&a).flag, BracketFlag::Invalid);
        assert!(a.overlaps(&b, 0.0) && !a.overlaps(&c, 0.5));
        assert_eq!(Bracket::new(1.0, f64::INFINITY).classify(1.0).flag, BracketFlag::Wide);
    }

    #[test]
    fn ulp_gap_is_not_invalid() {
        let v = 77.07944154167983f64;
        let hi = Bracket::new(f64::from_bits(v.to_bits() + 1), 80.0);
        let r = hi.intersect(&Bracket::new(75.0, v));
        assert_eq!(r.flag, BracketFlag::Ok);
        assert_eq!(r.lower, v);
        assert!(!within_rounding(v + 1e-9, v));
    }
}

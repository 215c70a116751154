use std::cmp::Ordering;
use std::fmt;

/// A nonnegative extended real: a finite value or `+inf`.
///
/// Infinite expected hitting times are ordinary values of the theory, so they
/// are carried explicitly instead of being encoded as sentinels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Inf,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    /// `num / den` with the convention `c / 0 = +inf` for `c > 0` and
    /// `0 / den = 0`.
    pub fn from_ratio(num: f64, den: f64) -> Self {
        debug_assert!(num >= 0.0 && den >= 0.0);
        if num == 0.0 {
            ExtReal::Finite(0.0)
        } else if den == 0.0 {
            ExtReal::Inf
        } else {
            ExtReal::Finite(num / den)
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    /// The finite value, if there is one.
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::Inf => None,
        }
    }

    /// The value as a plain `f64`, mapping `Inf` to `f64::INFINITY`.
    pub fn as_f64(self) -> f64 {
        match self {
            ExtReal::Finite(v) => v,
            ExtReal::Inf => f64::INFINITY,
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        debug_assert!(!v.is_nan());
        if v.is_infinite() {
            ExtReal::Inf
        } else {
            ExtReal::Finite(v)
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::Inf, ExtReal::Inf) => Some(Ordering::Equal),
            (ExtReal::Inf, ExtReal::Finite(_)) => Some(Ordering::Greater),
            (ExtReal::Finite(_), ExtReal::Inf) => Some(Ordering::Less),
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::Inf => write!(f, "inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_convention() {
        assert_eq!(ExtReal::from_ratio(1.0, 0.0), ExtReal::Inf);
        assert_eq!(ExtReal::from_ratio(0.0, 0.0), ExtReal::Finite(0.0));
        assert_eq!(ExtReal::from_ratio(3.0, 2.0), ExtReal::Finite(1.5));
    }

    #[test]
    fn ordering() {
        assert!(ExtReal::Inf > ExtReal::Finite(1e300));
        assert!(ExtReal::Finite(1.0) < ExtReal::Finite(2.0));
        assert_eq!(ExtReal::Inf.max(ExtReal::Finite(5.0)), ExtReal::Inf);
    }

    #[test]
    fn display() {
        assert_eq!(ExtReal::Inf.to_string(), "inf");
        assert_eq!(ExtReal::Finite(2.0).to_string(), "2");
    }
}

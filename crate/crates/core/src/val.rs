//! Filtration values: integers extended by a `+∞` sentinel.
//!
//! A value of `Infinity` means "zero at the working precision" — at finite
//! precision we can never distinguish an exact zero from an element all of
//! whose known coefficients vanish, so every consumer has to branch on the
//! sentinel rather than assume exactness.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Val {
    Finite(i64),
    Infinity,
}

impl Val {
    pub fn is_finite(self) -> bool {
        matches!(self, Val::Finite(_))
    }

    /// The finite value, if any.
    pub fn finite(self) -> Option<i64> {
        match self {
            Val::Finite(n) => Some(n),
            Val::Infinity => None,
        }
    }

    /// The finite value, or `default` for the sentinel.
    pub fn finite_or(self, default: i64) -> i64 {
        self.finite().unwrap_or(default)
    }

    pub fn min(self, other: Val) -> Val {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Val) -> Val {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Scalar multiple; `Infinity` absorbs.
    pub fn scale(self, c: i64) -> Val {
        match self {
            Val::Finite(n) => Val::Finite(n * c),
            Val::Infinity => Val::Infinity,
        }
    }
}

impl From<i64> for Val {
    fn from(n: i64) -> Self {
        Val::Finite(n)
    }
}

impl PartialOrd for Val {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Val {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Val::Finite(a), Val::Finite(b)) => a.cmp(b),
            (Val::Finite(_), Val::Infinity) => Ordering::Less,
            (Val::Infinity, Val::Finite(_)) => Ordering::Greater,
            (Val::Infinity, Val::Infinity) => Ordering::Equal,
        }
    }
}

impl Add for Val {
    type Output = Val;
    fn add(self, other: Val) -> Val {
        match (self, other) {
            (Val::Finite(a), Val::Finite(b)) => Val::Finite(a + b),
            _ => Val::Infinity,
        }
    }
}

impl Add<i64> for Val {
    type Output = Val;
    fn add(self, other: i64) -> Val {
        self + Val::Finite(other)
    }
}

impl fmt::Display for Val {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Val::Finite(n) => write!(f, "{n}"),
            Val::Infinity => write!(f, "inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_puts_infinity_on_top() {
        assert!(Val::Finite(i64::MAX) < Val::Infinity);
        assert!(Val::Finite(-3) < Val::Finite(0));
        assert_eq!(Val::Infinity.min(Val::Finite(2)), Val::Finite(2));
        assert_eq!(Val::Infinity.max(Val::Finite(2)), Val::Infinity);
    }

    #[test]
    fn addition_absorbs_infinity() {
        assert_eq!(Val::Finite(2) + Val::Finite(3), Val::Finite(5));
        assert_eq!(Val::Infinity + Val::Finite(3), Val::Infinity);
        assert_eq!(Val::Finite(2) + 7, Val::Finite(9));
    }
}

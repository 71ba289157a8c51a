use serde::Serialize;

/// A real number stored as sign and natural log of its magnitude.
///
/// Interface speeds and residual masses scale like `exp(-C/eps)` and leave the
/// range of `f64` for small `eps`; products and sums stay in log space here.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SignedLog {
    /// -1, 0 or +1.
    pub sign: i8,
    /// ln|x|; `-inf` for zero.
    pub ln_abs: f64,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog {
        sign: 0,
        ln_abs: f64::NEG_INFINITY,
    };

    pub fn new(sign: i8, ln_abs: f64) -> Self {
        if sign == 0 || ln_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            SignedLog {
                sign: sign.signum(),
                ln_abs,
            }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            SignedLog {
                sign: if x > 0.0 { 1 } else { -1 },
                ln_abs: x.abs().ln(),
            }
        }
    }

    /// Plain value; under/overflows like `exp`.
    pub fn value(&self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.ln_abs.exp(),
        }
    }

    pub fn log10_abs(&self) -> f64 {
        self.ln_abs / std::f64::consts::LN_10
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn abs(self) -> Self {
        if self.sign == 0 {
            self
        } else {
            SignedLog { sign: 1, ..self }
        }
    }

    pub fn neg(self) -> Self {
        SignedLog {
            sign: -self.sign,
            ..self
        }
    }

    pub fn mul(self, other: SignedLog) -> Self {
        Self::new(self.sign * other.sign, self.ln_abs + other.ln_abs)
    }

    pub fn mul_f64(self, x: f64) -> Self {
        self.mul(Self::from_f64(x))
    }

    pub fn div(self, other: SignedLog) -> Self {
        assert!(other.sign != 0, "division by zero");
        Self::new(self.sign * other.sign, self.ln_abs - other.ln_abs)
    }

    pub fn add(self, other: SignedLog) -> Self {
        if self.sign == 0 {
            return other;
        }
        if other.sign == 0 {
            return self;
        }
        let (big, small) = if self.ln_abs >= other.ln_abs {
            (self, other)
        } else {
            (other, self)
        };
        let r = (small.ln_abs - big.ln_abs).exp();
        if big.sign == small.sign {
            Self::new(big.sign, big.ln_abs + r.ln_1p())
        } else if r == 1.0 {
            Self::ZERO
        } else {
            Self::new(big.sign, big.ln_abs + (-r).ln_1p())
        }
    }

    pub fn sub(self, other: SignedLog) -> Self {
        self.add(other.neg())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_arithmetic() {
        let a = SignedLog::from_f64(-3.5);
        assert_eq!(a.sign, -1);
        assert!((a.value() + 3.5).abs() < 1e-15);
        let b = SignedLog::from_f64(2.0);
        assert!((a.mul(b).value() + 7.0).abs() < 1e-14);
        assert!((a.add(b).value() + 1.5).abs() < 1e-14);
        assert!((b.sub(b)).is_zero());
        assert!((a.div(b).value() + 1.75).abs() < 1e-15);
    }

    #[test]
    fn survives_underflow() {
        let tiny = SignedLog::new(1, -2000.0);
        let other = SignedLog::new(-1, -2001.0);
        let s = tiny.add(other);
        assert_eq!(s.sign, 1);
        let expected = -2000.0 + (1.0 - (-1.0f64).exp()).ln();
        assert!((s.ln_abs - expected).abs() < 1e-12);
        assert_eq!(s.value(), 0.0);
    }
}

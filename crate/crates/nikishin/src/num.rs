//! Extended-precision scalars and complex arithmetic.
//!
//! Everything downstream runs on MPFR floats at a configurable precision
//! (default 212 bits). Complex values are plain re/im pairs; the handful of
//! transcendental operations we need (sqrt, exp, ln) are implemented here so
//! that branch choices stay under our control.

use rug::float::Constant;
use rug::Float;
use std::fmt;

pub type Real = Float;

/// Default working precision in bits (~64 decimal digits).
pub const DEFAULT_PREC: u32 = 212;

/// Decimal digits carried by `prec` bits.
pub fn decimal_digits(prec: u32) -> u32 {
    (prec as f64 * std::f64::consts::LOG10_2).floor() as u32
}

/// 10^e at the given precision.
pub fn pow10(prec: u32, e: i64) -> Real {
    use rug::ops::Pow;
    Float::with_val(prec, Float::with_val(prec, 10).pow(e as i32))
}

/// Precision context: the single place new constants come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ctx {
    pub prec: u32,
}

impl Ctx {
    pub fn new(prec: u32) -> Self {
        Ctx { prec }
    }

    pub fn real(&self, v: f64) -> Real {
        Float::with_val(self.prec, v)
    }

    pub fn int(&self, v: i64) -> Real {
        Float::with_val(self.prec, v)
    }

    pub fn zero(&self) -> Real {
        Float::with_val(self.prec, 0)
    }

    pub fn one(&self) -> Real {
        Float::with_val(self.prec, 1)
    }

    pub fn pi(&self) -> Real {
        Float::with_val(self.prec, Constant::Pi)
    }

    /// Parse a decimal string at full precision.
    pub fn parse(&self, s: &str) -> Result<Real, rug::float::ParseFloatError> {
        Ok(Float::with_val(self.prec, Float::parse(s.trim())?))
    }

    pub fn cx(&self, re: f64, im: f64) -> Cx {
        Cx {
            re: self.real(re),
            im: self.real(im),
        }
    }

    pub fn cx_zero(&self) -> Cx {
        self.cx(0.0, 0.0)
    }

    pub fn from_real(&self, re: Real) -> Cx {
        Cx {
            im: self.zero(),
            re,
        }
    }

    /// Relative agreement target for adaptive quadrature at this precision.
    pub fn quad_tol(&self) -> Real {
        let digits = decimal_digits(self.prec) as i64;
        pow10(self.prec, -(digits - 8).max(10))
    }

    /// 10^(-digits/4): the spec-level residual tolerance scale.
    pub fn quarter_tol(&self) -> Real {
        let digits = decimal_digits(self.prec) as i64;
        pow10(self.prec, -(digits / 4))
    }
}

/// Complex number over `Real`.
#[derive(Clone, PartialEq)]
pub struct Cx {
    pub re: Real,
    pub im: Real,
}

impl fmt::Debug for Cx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({} + {}i)",
            self.re.to_string_radix(10, Some(20)),
            self.im.to_string_radix(10, Some(20))
        )
    }
}

impl Cx {
    pub fn new(re: Real, im: Real) -> Self {
        Cx { re, im }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn zero(prec: u32) -> Self {
        Cx {
            re: Float::with_val(prec, 0),
            im: Float::with_val(prec, 0),
        }
    }

    pub fn one(prec: u32) -> Self {
        Cx {
            re: Float::with_val(prec, 1),
            im: Float::with_val(prec, 0),
        }
    }

    pub fn from_real(re: &Real) -> Self {
        Cx {
            re: re.clone(),
            im: Float::with_val(re.prec(), 0),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn conj(&self) -> Cx {
        let p = self.prec();
        Cx {
            re: self.re.clone(),
            im: Float::with_val(p, -&self.im),
        }
    }

    pub fn neg(&self) -> Cx {
        let p = self.prec();
        Cx {
            re: Float::with_val(p, -&self.re),
            im: Float::with_val(p, -&self.im),
        }
    }

    pub fn add(&self, o: &Cx) -> Cx {
        let p = self.prec().max(o.prec());
        Cx {
            re: Float::with_val(p, &self.re + &o.re),
            im: Float::with_val(p, &self.im + &o.im),
        }
    }

    pub fn sub(&self, o: &Cx) -> Cx {
        let p = self.prec().max(o.prec());
        Cx {
            re: Float::with_val(p, &self.re - &o.re),
            im: Float::with_val(p, &self.im - &o.im),
        }
    }

    pub fn mul(&self, o: &Cx) -> Cx {
        let p = self.prec().max(o.prec());
        let re = Float::with_val(p, &self.re * &o.re) - Float::with_val(p, &self.im * &o.im);
        let im = Float::with_val(p, &self.re * &o.im) + Float::with_val(p, &self.im * &o.re);
        Cx {
            re: Float::with_val(p, re),
            im: Float::with_val(p, im),
        }
    }

    pub fn mul_real(&self, r: &Real) -> Cx {
        let p = self.prec().max(r.prec());
        Cx {
            re: Float::with_val(p, &self.re * r),
            im: Float::with_val(p, &self.im * r),
        }
    }

    pub fn div(&self, o: &Cx) -> Cx {
        let p = self.prec().max(o.prec());
        let d = Float::with_val(p, o.re.clone().square() + o.im.clone().square());
        let re = Float::with_val(p, &self.re * &o.re) + Float::with_val(p, &self.im * &o.im);
        let im = Float::with_val(p, &self.im * &o.re) - Float::with_val(p, &self.re * &o.im);
        Cx {
            re: Float::with_val(p, re / &d),
            im: Float::with_val(p, im / &d),
        }
    }

    pub fn div_real(&self, r: &Real) -> Cx {
        let p = self.prec().max(r.prec());
        Cx {
            re: Float::with_val(p, &self.re / r),
            im: Float::with_val(p, &self.im / r),
        }
    }

    pub fn recip(&self) -> Cx {
        Cx::one(self.prec()).div(self)
    }

    pub fn abs(&self) -> Real {
        let p = self.prec();
        Float::with_val(p, self.re.clone().hypot(&self.im))
    }

    pub fn abs_sq(&self) -> Real {
        let p = self.prec();
        Float::with_val(p, self.re.clone().square() + self.im.clone().square())
    }

    pub fn arg(&self) -> Real {
        self.im.clone().atan2(&self.re)
    }

    /// Principal branch square root (cut along the negative real axis,
    /// values continuous from the upper half-plane on the cut).
    pub fn sqrt(&self) -> Cx {
        let p = self.prec();
        if self.re.is_zero() && self.im.is_zero() {
            return Cx::zero(p);
        }
        let r = self.abs();
        let two = Float::with_val(p, 2);
        if self.re.is_sign_positive() && !self.re.is_zero() {
            let t = Float::with_val(p, (&r + &self.re) / &two).sqrt();
            let v = Float::with_val(p, &self.im / Float::with_val(p, &t * &two));
            Cx { re: t, im: v }
        } else {
            let s = Float::with_val(p, (&r - &self.re) / &two).sqrt();
            // sign(v) = sign(im); im == +0 maps to the upper branch
            let v = if self.im.is_sign_negative() && !self.im.is_zero() {
                Float::with_val(p, -&s)
            } else {
                s.clone()
            };
            let t = Float::with_val(p, self.im.clone().abs() / Float::with_val(p, &s * &two));
            Cx { re: t, im: v }
        }
    }

    pub fn exp(&self) -> Cx {
        let p = self.prec();
        let m = self.re.clone().exp();
        let (sin, cos) = self.im.clone().sin_cos(Float::new(p));
        Cx {
            re: Float::with_val(p, &m * &cos),
            im: Float::with_val(p, &m * &sin),
        }
    }

    pub fn ln(&self) -> Cx {
        Cx {
            re: self.abs().ln(),
            im: self.arg(),
        }
    }

    /// Integer power by repeated squaring.
    pub fn powi(&self, mut e: u64) -> Cx {
        let p = self.prec();
        let mut base = self.clone();
        let mut acc = Cx::one(p);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

/// Format a real with a fixed number of significant digits (deterministic).
pub fn fmt_real(x: &Real, digits: usize) -> String {
    x.to_string_radix(10, Some(digits))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> Ctx {
        Ctx::new(DEFAULT_PREC)
    }

    #[test]
    fn complex_field_ops() {
        let c = ctx();
        let a = c.cx(3.0, -2.0);
        let b = c.cx(-1.5, 0.25);
        let prod = a.mul(&b);
        let back = prod.div(&b);
        assert!(back.sub(&a).abs() < pow10(c.prec, -60));
        let r = a.recip().mul(&a);
        assert!(r.sub(&Cx::one(c.prec)).abs() < pow10(c.prec, -60));
    }

    #[test]
    fn sqrt_branches() {
        let c = ctx();
        // principal: sqrt(-4) = 2i (upper branch for im = +0)
        let s = c.cx(-4.0, 0.0).sqrt();
        assert!(s.re.clone().abs() < pow10(c.prec, -60));
        assert!((s.im - c.real(2.0)).abs() < pow10(c.prec, -60));
        // sqrt(z)^2 = z away from the cut
        let z = c.cx(1.25, -3.5);
        let w = z.sqrt();
        assert!(w.mul(&w).sub(&z).abs() < pow10(c.prec, -58));
        // conjugate symmetry off the cut
        let zc = z.conj().sqrt();
        assert!(zc.sub(&w.conj()).abs() < pow10(c.prec, -60));
    }

    #[test]
    fn exp_ln_roundtrip() {
        let c = ctx();
        let z = c.cx(0.3, 1.2);
        let w = z.exp().ln();
        assert!(w.sub(&z).abs() < pow10(c.prec, -58));
    }

    #[test]
    fn parse_decimal_strings() {
        let c = ctx();
        let x = c.parse("-0.5").unwrap();
        assert_eq!(x.to_f64(), -0.5);
        let y = c.parse("1.5e-3").unwrap();
        assert_eq!(y.to_f64(), 1.5e-3);
    }
}

//! Polynomials in the Chebyshev basis of a reference interval.
//!
//! Coefficients are extended-precision reals; evaluation is Clenshaw.
//! Root finding seeds a double-precision colleague-matrix eigensolve and
//! polishes with Newton at working precision.

use crate::measures::Interval;
use crate::num::{decimal_digits, pow10, Ctx, Cx, Real};
use rug::Float;
use std::sync::OnceLock;

/// Polynomial sum c_i T_i(u) with u the affine image of x in [-1, 1].
#[derive(Clone, Debug)]
pub struct ChebPoly {
    pub interval: Interval,
    pub coeffs: Vec<Real>,
}

impl ChebPoly {
    pub fn constant(interval: Interval, c: Real) -> Self {
        ChebPoly {
            interval,
            coeffs: vec![c],
        }
    }

    pub fn prec(&self) -> u32 {
        self.coeffs
            .iter()
            .map(|c| c.prec())
            .max()
            .unwrap_or(crate::num::DEFAULT_PREC)
    }

    pub fn degree(&self) -> usize {
        let mut d = self.coeffs.len();
        while d > 1 && self.coeffs[d - 1].is_zero() {
            d -= 1;
        }
        d - 1
    }

    fn to_u_real(&self, x: &Real) -> Real {
        let p = self.prec().max(x.prec());
        let two = Float::with_val(p, 2);
        let num = Float::with_val(p, &two * x)
            - Float::with_val(p, &self.interval.a + &self.interval.b);
        num / self.interval.width()
    }

    fn to_u_cx(&self, z: &Cx) -> Cx {
        let p = self.prec().max(z.prec());
        let ctx = Ctx::new(p);
        let two = ctx.real(2.0);
        let shift = Float::with_val(p, &self.interval.a + &self.interval.b);
        let w = self.interval.width();
        Cx {
            re: Float::with_val(p, Float::with_val(p, &two * &z.re) - &shift) / &w,
            im: Float::with_val(p, Float::with_val(p, &two * &z.im) / &w),
        }
    }

    pub fn eval_real(&self, x: &Real) -> Real {
        let u = self.to_u_real(x);
        self.clenshaw_real(&u)
    }

    pub fn eval_cx(&self, z: &Cx) -> Cx {
        let u = self.to_u_cx(z);
        self.clenshaw_cx(&u)
    }

    fn clenshaw_real(&self, u: &Real) -> Real {
        let p = self.prec().max(u.prec());
        let two_u = Float::with_val(p, 2 * u.clone());
        let mut b1 = Float::with_val(p, 0);
        let mut b2 = Float::with_val(p, 0);
        for c in self.coeffs.iter().rev() {
            let next = Float::with_val(p, &two_u * &b1) - &b2 + c;
            b2 = b1;
            b1 = Float::with_val(p, next);
        }
        // T_0 correction: result = b1 - u*b2 ... standard: f = c0 + u b1 - b2 with
        // the loop run down to c1; running to c0 gives f = (b1 - b2*u) ... use
        // the simple variant: f = b1 - u*b2
        Float::with_val(p, &b1 - Float::with_val(p, u * &b2))
    }

    fn clenshaw_cx(&self, u: &Cx) -> Cx {
        let p = self.prec().max(u.prec());
        let two_u = u.mul_real(&Float::with_val(p, 2));
        let mut b1 = Cx::zero(p);
        let mut b2 = Cx::zero(p);
        for c in self.coeffs.iter().rev() {
            let next = two_u.mul(&b1).sub(&b2).add(&Cx::from_real(c));
            b2 = b1;
            b1 = next;
        }
        b1.sub(&u.mul(&b2))
    }

    /// Derivative with respect to x.
    pub fn deriv(&self) -> ChebPoly {
        let p = self.prec();
        let n = self.coeffs.len();
        if n <= 1 {
            return ChebPoly::constant(self.interval.clone(), Float::with_val(p, 0));
        }
        // u-derivative coefficients: d_{k-1} = d_{k+1} + 2k c_k, d scaled at k=0
        let mut d = vec![Float::with_val(p, 0); n - 1];
        let mut prev = Float::with_val(p, 0); // d_{k+1}
        let mut prev2 = Float::with_val(p, 0); // d_{k+2}
        for k in (1..n).rev() {
            let dk = Float::with_val(p, &prev2 + Float::with_val(p, 2 * k as i64) * &self.coeffs[k]);
            d[k - 1] = dk.clone();
            prev2 = prev;
            prev = dk;
        }
        d[0] /= 2;
        // chain rule du/dx = 2/(b-a)
        let scale = Float::with_val(p, 2) / self.interval.width();
        for c in d.iter_mut() {
            *c *= &scale;
        }
        ChebPoly {
            interval: self.interval.clone(),
            coeffs: d,
        }
    }

    /// Multiply by the monic linear factor (x - r).
    pub fn mul_linear(&self, r: &Real) -> ChebPoly {
        let p = self.prec().max(r.prec());
        let n = self.coeffs.len();
        // x = c0 + h*u with c0 the midpoint, h the half-width
        let h = Float::with_val(p, self.interval.width() / 2u32);
        let mid = self.interval.mid();
        let shift = Float::with_val(p, &mid - r);
        let mut out = vec![Float::with_val(p, 0); n + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            // (x - r) T_k = shift*T_k + h*u*T_k;  u T_k = (T_{k+1} + T_{|k-1|})/2
            out[k] += Float::with_val(p, &shift * c);
            let half = Float::with_val(p, &h * c) / 2u32;
            out[k + 1] += &half;
            if k >= 1 {
                out[k - 1] += &half;
            } else {
                out[1] += &half; // u T_0 = T_1: both halves land on T_1
            }
        }
        ChebPoly {
            interval: self.interval.clone(),
            coeffs: out,
        }
    }

    /// Leading coefficient in the monomial basis.
    pub fn leading_monomial_coeff(&self) -> Real {
        let p = self.prec();
        let n = self.degree();
        let cn = self.coeffs[n].clone();
        if n == 0 {
            return cn;
        }
        // T_n(u) = 2^{n-1} u^n + ..., u = (x - mid)/h
        let h = Float::with_val(p, self.interval.width() / 2u32);
        use rug::ops::Pow;
        let two_pow = Float::with_val(p, Float::with_val(p, 2).pow((n as i32) - 1));
        let h_pow = Float::with_val(p, h.pow(n as i32));
        cn * two_pow / h_pow
    }
}

/// Monic polynomial with cached zeros.
#[derive(Debug)]
pub struct MonicPoly {
    pub poly: ChebPoly,
    zeros: OnceLock<Vec<Real>>,
}

impl Clone for MonicPoly {
    fn clone(&self) -> Self {
        let z = OnceLock::new();
        if let Some(v) = self.zeros.get() {
            let _ = z.set(v.clone());
        }
        MonicPoly {
            poly: self.poly.clone(),
            zeros: z,
        }
    }
}

impl MonicPoly {
    pub fn one(interval: Interval, prec: u32) -> Self {
        let m = MonicPoly {
            poly: ChebPoly::constant(interval, Float::with_val(prec, 1)),
            zeros: OnceLock::new(),
        };
        let _ = m.zeros.set(Vec::new());
        m
    }

    /// Monic from a Chebyshev coefficient vector; rescales so the monomial
    /// leading coefficient is exactly one.
    pub fn from_cheb(poly: ChebPoly) -> Self {
        let lead = poly.leading_monomial_coeff();
        let p = poly.prec();
        let mut coeffs = poly.coeffs;
        let d = {
            let mut d = coeffs.len();
            while d > 1 && coeffs[d - 1].is_zero() {
                d -= 1;
            }
            d
        };
        coeffs.truncate(d);
        for c in coeffs.iter_mut() {
            *c = Float::with_val(p, &*c / &lead);
        }
        MonicPoly {
            poly: ChebPoly {
                interval: poly.interval,
                coeffs,
            },
            zeros: OnceLock::new(),
        }
    }

    /// Monic polynomial with the given real roots on the basis interval.
    pub fn from_roots(interval: Interval, roots: &[Real], prec: u32) -> Self {
        let mut roots = roots.to_vec();
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut poly = ChebPoly::constant(interval, Float::with_val(prec, 1));
        for r in &roots {
            poly = poly.mul_linear(r);
        }
        let m = MonicPoly {
            poly,
            zeros: OnceLock::new(),
        };
        let _ = m.zeros.set(roots);
        m
    }

    pub fn degree(&self) -> usize {
        self.poly.degree()
    }

    pub fn eval_real(&self, x: &Real) -> Real {
        self.poly.eval_real(x)
    }

    pub fn eval_cx(&self, z: &Cx) -> Cx {
        self.poly.eval_cx(z)
    }

    /// Sorted real zeros; computed on first use.
    pub fn zeros(&self) -> &[Real] {
        self.zeros.get_or_init(|| {
            compute_real_zeros(&self.poly).expect("zero computation failed")
        })
    }

    pub fn try_zeros(&self) -> Result<&[Real], ZeroError> {
        if self.zeros.get().is_none() {
            let z = compute_real_zeros(&self.poly)?;
            let _ = self.zeros.set(z);
        }
        Ok(self.zeros.get().unwrap())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ZeroError {
    #[error("zero finder recovered {found} distinct real zeros, expected {expected}")]
    Count { found: usize, expected: usize },
    #[error("zero of nonzero imaginary part {im:.3e} beyond tolerance")]
    ComplexZero { im: f64 },
}

/// All zeros of a real-rooted Chebyshev-basis polynomial: colleague-matrix
/// seeds in f64, Newton polish at working precision, fallback to a dense
/// sign-change scan when seeding fails.
pub fn compute_real_zeros(poly: &ChebPoly) -> Result<Vec<Real>, ZeroError> {
    let n = poly.degree();
    let p = poly.prec();
    if n == 0 {
        return Ok(Vec::new());
    }
    let digits = decimal_digits(p) as i64;
    let im_tol = pow10(p, -(digits / 4));

    let ctx = Ctx::new(p);
    if n == 1 {
        // c0 + c1 T_1(u) = 0 -> u = -c0/c1
        let u = Float::with_val(p, -&poly.coeffs[0]) / &poly.coeffs[1];
        let h = Float::with_val(p, poly.interval.width() / 2u32);
        let x = poly.interval.mid() + Float::with_val(p, &h * &u);
        return Ok(vec![Float::with_val(p, x)]);
    }

    // colleague matrix in f64 on normalized coefficients
    let scale = poly
        .coeffs
        .iter()
        .map(|c| c.to_f64().abs())
        .fold(0.0f64, f64::max);
    let c64: Vec<f64> = poly.coeffs.iter().map(|c| c.to_f64() / scale).collect();
    let mut m = nalgebra::DMatrix::<f64>::zeros(n, n);
    if n >= 2 {
        m[(0, 1)] = 1.0;
    }
    for i in 1..n - 1 {
        m[(i, i - 1)] = 0.5;
        m[(i, i + 1)] = 0.5;
    }
    let an = c64[n];
    for j in 0..n {
        m[(n - 1, j)] -= c64[j] / (2.0 * an);
    }
    if n >= 2 {
        m[(n - 1, n - 2)] += 0.5;
    }
    let eig = m.complex_eigenvalues();

    let deriv = poly.deriv();
    let mut roots: Vec<Real> = Vec::with_capacity(n);
    let h = Float::with_val(p, poly.interval.width() / 2u32);
    let mid = poly.interval.mid();
    let newton_tol = pow10(p, -(digits + 2));
    for ev in eig.iter() {
        // seed in x coordinates
        let mut z = Cx {
            re: Float::with_val(p, &mid + Float::with_val(p, &h * ctx.real(ev.re))),
            im: Float::with_val(p, &h * ctx.real(ev.im)),
        };
        for _ in 0..60 {
            let f = poly.eval_cx(&z);
            let df = deriv.eval_cx(&z);
            if df.abs().is_zero() {
                break;
            }
            let step = f.div(&df);
            let done = step.abs() < newton_tol;
            z = z.sub(&step);
            if done {
                break;
            }
        }
        if z.im.clone().abs() > Float::with_val(p, &im_tol * &h) {
            return Err(ZeroError::ComplexZero {
                im: z.im.to_f64(),
            });
        }
        roots.push(z.re);
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // merge duplicates from seeds that converged to the same root
    let gap_tol = Float::with_val(p, &h * &pow10(p, -(digits / 2)));
    let mut distinct: Vec<Real> = Vec::with_capacity(n);
    for r in roots {
        if let Some(last) = distinct.last() {
            if Float::with_val(p, &r - last).abs() < gap_tol {
                continue;
            }
        }
        distinct.push(r);
    }
    if distinct.len() != n {
        return Err(ZeroError::Count {
            found: distinct.len(),
            expected: n,
        });
    }
    Ok(distinct)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::DEFAULT_PREC;

    fn unit_interval(ctx: &Ctx) -> Interval {
        Interval::new(ctx.real(-1.0), ctx.real(1.0)).unwrap()
    }

    #[test]
    fn clenshaw_matches_monomials() {
        let ctx = Ctx::new(DEFAULT_PREC);
        // T_3(u) = 4u^3 - 3u on [-1,1]
        let p = ChebPoly {
            interval: unit_interval(&ctx),
            coeffs: vec![ctx.zero(), ctx.zero(), ctx.zero(), ctx.one()],
        };
        let x = ctx.real(0.3);
        let expect = ctx.real(4.0 * 0.027 - 0.9);
        assert!((p.eval_real(&x) - expect).abs() < pow10(DEFAULT_PREC, -55));
        let z = ctx.cx(0.2, 0.7);
        let w = p.eval_cx(&z);
        let direct = z.powi(3).mul_real(&ctx.real(4.0)).sub(&z.mul_real(&ctx.real(3.0)));
        assert!(w.sub(&direct).abs() < pow10(DEFAULT_PREC, -55));
    }

    #[test]
    fn derivative_of_t3() {
        let ctx = Ctx::new(DEFAULT_PREC);
        let p = ChebPoly {
            interval: unit_interval(&ctx),
            coeffs: vec![ctx.zero(), ctx.zero(), ctx.zero(), ctx.one()],
        };
        // T_3' = 12u^2 - 3
        let d = p.deriv();
        let x = ctx.real(0.4);
        let expect = ctx.real(12.0 * 0.16 - 3.0);
        assert!((d.eval_real(&x) - expect).abs() < pow10(DEFAULT_PREC, -55));
    }

    #[test]
    fn from_roots_roundtrip() {
        let ctx = Ctx::new(DEFAULT_PREC);
        let iv = Interval::new(ctx.real(2.0), ctx.real(3.0)).unwrap();
        let roots = vec![ctx.real(2.2), ctx.real(2.5), ctx.real(2.9)];
        let m = MonicPoly::from_roots(iv, &roots, DEFAULT_PREC);
        // monic cubic: value at 2.0 is (2-2.2)(2-2.5)(2-2.9)
        let v = m.eval_real(&ctx.real(2.0));
        let expect = ctx.real(-0.2 * -0.5 * -0.9);
        assert!((v - expect).abs() < pow10(DEFAULT_PREC, -50));
        assert!((m.poly.leading_monomial_coeff() - ctx.one()).abs() < pow10(DEFAULT_PREC, -55));
    }

    #[test]
    fn colleague_zero_recovery() {
        let ctx = Ctx::new(DEFAULT_PREC);
        let iv = unit_interval(&ctx);
        let roots: Vec<Real> = (0..12)
            .map(|i| ctx.real(-0.95 + 0.17 * i as f64))
            .collect();
        let m = MonicPoly::from_roots(iv.clone(), &roots, DEFAULT_PREC);
        // rebuild without the cached zeros to force the colleague path
        let fresh = MonicPoly::from_cheb(m.poly.clone());
        let zs = fresh.try_zeros().unwrap();
        assert_eq!(zs.len(), 12);
        for (z, r) in zs.iter().zip(&roots) {
            assert!((z.clone() - r).abs() < pow10(DEFAULT_PREC, -45));
        }
    }
}

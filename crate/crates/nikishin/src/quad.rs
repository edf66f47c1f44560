//! Gauss–Jacobi quadrature rules at extended precision.
//!
//! Nodes are seeded by a double-precision symmetric-tridiagonal eigensolve
//! (Golub–Welsch) and polished by Newton iteration on the orthonormal Jacobi
//! recurrence at working precision. Weights come from the Christoffel
//! function. Rules live on [-1, 1] with weight (1-u)^alpha (1+u)^beta and are
//! cached per (alpha, beta, node count, precision).

use crate::num::{Ctx, Real};
use rug::Float;
use std::collections::HashMap;
use std::sync::{Arc, RwLock};

/// One quadrature rule on [-1, 1].
#[derive(Debug)]
pub struct GaussJacobi {
    pub alpha: f64,
    pub beta: f64,
    pub nodes: Vec<Real>,
    pub weights: Vec<Real>,
}

type CacheKey = (u64, u64, usize, u32);

static RULE_CACHE: RwLock<Option<HashMap<CacheKey, Arc<GaussJacobi>>>> = RwLock::new(None);

/// Fetch (or build and cache) the n-point Gauss–Jacobi rule.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64, prec: u32) -> Arc<GaussJacobi> {
    let key = (alpha.to_bits(), beta.to_bits(), n, prec);
    {
        let guard = RULE_CACHE.read().unwrap();
        if let Some(map) = guard.as_ref() {
            if let Some(rule) = map.get(&key) {
                return rule.clone();
            }
        }
    }
    let rule = Arc::new(build_rule(n, alpha, beta, prec));
    let mut guard = RULE_CACHE.write().unwrap();
    guard
        .get_or_insert_with(HashMap::new)
        .insert(key, rule.clone());
    rule
}

/// Monic Jacobi recurrence coefficients: pi_{k+1} = (x - a_k) pi_k - b_k pi_{k-1}.
/// Returned as (a[0..n], b[0..n]) with b[0] = mu_0 (total weight mass).
fn jacobi_coeffs(n: usize, alpha: f64, beta: f64, ctx: &Ctx) -> (Vec<Real>, Vec<Real>) {
    let al = ctx.real(alpha);
    let be = ctx.real(beta);
    let one = ctx.one();
    let two = ctx.real(2.0);

    // mu_0 = 2^(alpha+beta+1) Gamma(alpha+1) Gamma(beta+1) / Gamma(alpha+beta+2)
    let apb = Float::with_val(ctx.prec, &al + &be);
    let mu0 = {
        let g1 = Float::with_val(ctx.prec, &al + &one).gamma();
        let g2 = Float::with_val(ctx.prec, &be + &one).gamma();
        let g3 = Float::with_val(ctx.prec, &apb + &two).gamma();
        let p = Float::with_val(ctx.prec, &apb + &one);
        let factor = Float::with_val(ctx.prec, two.clone().pow(&p));
        factor * g1 * g2 / g3
    };

    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    b.push(mu0);
    // a_0 = (beta - alpha)/(alpha + beta + 2)
    a.push(Float::with_val(
        ctx.prec,
        Float::with_val(ctx.prec, &be - &al) / Float::with_val(ctx.prec, &apb + &two),
    ));
    for k in 1..n {
        let kf = ctx.int(k as i64);
        let denom = Float::with_val(ctx.prec, &two * &kf) + &apb;
        // a_k = (beta^2 - alpha^2) / ((2k+a+b)(2k+a+b+2))
        let num = Float::with_val(ctx.prec, be.clone().square() - al.clone().square());
        let ak = num / Float::with_val(ctx.prec, &denom * Float::with_val(ctx.prec, &denom + &two));
        a.push(Float::with_val(ctx.prec, ak));
        // b_k = 4k(k+a)(k+b)(k+a+b) / ((2k+a+b)^2 (2k+a+b+1)(2k+a+b-1))
        let num = Float::with_val(ctx.prec, 4)
            * &kf
            * Float::with_val(ctx.prec, &kf + &al)
            * Float::with_val(ctx.prec, &kf + &be)
            * Float::with_val(ctx.prec, &kf + &apb);
        let den = denom.clone().square()
            * Float::with_val(ctx.prec, &denom + &one)
            * Float::with_val(ctx.prec, &denom - &one);
        b.push(Float::with_val(ctx.prec, num / den));
    }
    (a, b)
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit QL with Wilkinson
/// shifts (eigenvalues only, double precision). `d` is the diagonal; `e[i]` is
/// the subdiagonal coupling `d[i]` and `d[i+1]` (length n, last entry unused).
fn tridiag_eigenvalues(mut d: Vec<f64>, mut e: Vec<f64>) -> Vec<f64> {
    let n = d.len();
    if n <= 1 {
        return d;
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter <= 60, "tridiagonal QL failed to converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0f64;
            let mut c = 1.0f64;
            let mut p = 0.0f64;
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(|x, y| x.partial_cmp(y).unwrap());
    d
}

/// Evaluate the orthonormal Jacobi polynomial of degree n and its derivative.
fn orthonormal_eval(x: &Real, n: usize, a: &[Real], sqrt_b: &[Real], ctx: &Ctx) -> (Real, Real) {
    let p = ctx.prec;
    // p_0 = 1/sqrt(mu0); sqrt_b[k+1] p_{k+1} = (x - a_k) p_k - sqrt_b[k] p_{k-1}
    let mut pk = Float::with_val(p, sqrt_b[0].clone().recip());
    let mut pk_d = ctx.zero();
    let mut pm = ctx.zero();
    let mut pm_d = ctx.zero();
    for k in 0..n {
        let xa = Float::with_val(p, x - &a[k]);
        let num = Float::with_val(p, &xa * &pk) - Float::with_val(p, &sqrt_b[k] * &pm);
        let num_d = Float::with_val(p, &xa * &pk_d) + &pk - Float::with_val(p, &sqrt_b[k] * &pm_d);
        let next = Float::with_val(p, num / &sqrt_b[k + 1]);
        let next_d = Float::with_val(p, num_d / &sqrt_b[k + 1]);
        pm = pk;
        pm_d = pk_d;
        pk = next;
        pk_d = next_d;
    }
    (pk, pk_d)
}

fn build_rule(n: usize, alpha: f64, beta: f64, prec: u32) -> GaussJacobi {
    assert!(n >= 1, "rule needs at least one node");
    assert!(
        alpha > -1.0 && beta > -1.0,
        "jacobi exponents must exceed -1"
    );
    let ctx = Ctx::new(prec);
    // one extra coefficient so degree-n evaluation has sqrt_b[n]
    let (a, b) = jacobi_coeffs(n + 1, alpha, beta, &ctx);
    let sqrt_b: Vec<Real> = b.iter().map(|v| v.clone().sqrt()).collect();

    // f64 seeds from the Golub-Welsch tridiagonal matrix
    let d64: Vec<f64> = a[..n].iter().map(|v| v.to_f64()).collect();
    let mut sub = vec![0.0; n];
    for k in 1..n {
        sub[k - 1] = b[k].to_f64().sqrt();
    }
    let seeds = tridiag_eigenvalues(d64, sub);

    // Newton polish at working precision
    let digits = crate::num::decimal_digits(prec) as i64;
    let tol = crate::num::pow10(prec, -(digits + 2));
    let mut nodes = Vec::with_capacity(n);
    for s in seeds {
        let mut x = ctx.real(s);
        for _ in 0..60 {
            let (pv, pd) = orthonormal_eval(&x, n, &a, &sqrt_b, &ctx);
            if pd.is_zero() {
                break;
            }
            let step = Float::with_val(prec, &pv / &pd);
            let done = step.clone().abs() < tol;
            x -= step;
            if done {
                break;
            }
        }
        nodes.push(x);
    }
    nodes.sort_by(|x, y| x.partial_cmp(y).unwrap());

    // Christoffel weights: w_i = 1 / sum_{j<n} p_j(x_i)^2
    let mut weights = Vec::with_capacity(n);
    for x in &nodes {
        let mut sum = ctx.zero();
        let mut pm = ctx.zero();
        let mut pk = Float::with_val(prec, sqrt_b[0].clone().recip());
        sum += Float::with_val(prec, pk.clone().square());
        for k in 0..n - 1 {
            let xa = Float::with_val(prec, x - &a[k]);
            let num = Float::with_val(prec, &xa * &pk) - Float::with_val(prec, &sqrt_b[k] * &pm);
            let next = Float::with_val(prec, num / &sqrt_b[k + 1]);
            pm = pk;
            pk = next;
            sum += Float::with_val(prec, pk.clone().square());
        }
        weights.push(Float::with_val(prec, sum.recip_ref()));
    }
    GaussJacobi {
        alpha,
        beta,
        nodes,
        weights,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{pow10, DEFAULT_PREC};

    #[test]
    fn chebyshev_rule_closed_form() {
        // alpha = beta = -1/2: nodes cos((2i-1)pi/(2n)), weights pi/n
        let n = 17;
        let rule = gauss_jacobi(n, -0.5, -0.5, DEFAULT_PREC);
        let ctx = Ctx::new(DEFAULT_PREC);
        let pi = ctx.pi();
        for (i, x) in rule.nodes.iter().enumerate() {
            let j = n - i; // ascending nodes
            let theta =
                Float::with_val(DEFAULT_PREC, &pi * ctx.int((2 * j - 1) as i64)) / ctx.int(2 * n as i64);
            let expect = Float::with_val(DEFAULT_PREC, theta).cos();
            assert!(
                (x.clone() - expect).abs() < pow10(DEFAULT_PREC, -55),
                "node {i}"
            );
        }
        let w_expect = Float::with_val(DEFAULT_PREC, &pi / ctx.int(n as i64));
        for w in &rule.weights {
            assert!((w.clone() - &w_expect).abs() < pow10(DEFAULT_PREC, -55));
        }
    }

    #[test]
    fn legendre_rule_matches_reference() {
        // frozen Gauss-Legendre n=5 values
        let rule = gauss_jacobi(5, 0.0, 0.0, DEFAULT_PREC);
        let x_ref = [
            -0.906_179_845_938_664,
            -0.538_469_310_105_683_1,
            0.0,
            0.538_469_310_105_683_1,
            0.906_179_845_938_664,
        ];
        let w_ref = [
            0.236_926_885_056_189_08,
            0.478_628_670_499_366_47,
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_47,
            0.236_926_885_056_189_08,
        ];
        for i in 0..5 {
            assert!((rule.nodes[i].to_f64() - x_ref[i]).abs() < 1e-14);
            assert!((rule.weights[i].to_f64() - w_ref[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn polynomial_exactness() {
        // n-point rule integrates degree 2n-1 exactly; check x^6 against
        // the alpha=1, beta=0 closed-form moment on [-1,1].
        let rule = gauss_jacobi(8, 1.0, 0.0, DEFAULT_PREC);
        let ctx = Ctx::new(DEFAULT_PREC);
        let mut sum = ctx.zero();
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            use rug::ops::Pow;
            sum += Float::with_val(DEFAULT_PREC, w * Float::with_val(DEFAULT_PREC, x.pow(6)));
        }
        // int_{-1}^{1} (1-x) x^6 dx = 2/7
        let expect = Float::with_val(DEFAULT_PREC, 2) / ctx.int(7);
        assert!((sum - expect).abs() < pow10(DEFAULT_PREC, -55));
    }

    #[test]
    fn mass_matches_mu0() {
        let rule = gauss_jacobi(12, -0.5, 0.25, DEFAULT_PREC);
        let ctx = Ctx::new(DEFAULT_PREC);
        let mut sum = ctx.zero();
        for w in &rule.weights {
            sum += w;
        }
        let (_, b) = jacobi_coeffs(1, -0.5, 0.25, &ctx);
        assert!((sum - &b[0]).abs() < pow10(DEFAULT_PREC, -55));
    }
}

//! Measures on real intervals and the algebra the Nikishin hierarchy needs:
//! Cauchy transforms, Gauss–Jacobi and contour integration, products
//! <s1, s2>, and the reciprocal decomposition 1/s_hat = l + tau_hat.
//!
//! Derived measures are never discretized into densities. They are closures
//! exposing the Cauchy transform plus a contour-integration rule; products
//! against a generator reuse the generator's quadrature table with the extra
//! analytic factor folded into the weights.

use crate::num::{decimal_digits, pow10, Ctx, Cx, Real};
use crate::quad::gauss_jacobi;
use rug::Float;
use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock, RwLock};

static MEASURE_ID: AtomicU64 = AtomicU64::new(1);

pub const MIN_QUAD_NODES: usize = 64;
pub const MAX_QUAD_NODES: usize = 4096;
pub const MAX_CONTOUR_NODES: usize = 65536;

#[derive(Debug, thiserror::Error)]
pub enum MeasureError {
    #[error("invalid interval: {0}")]
    InvalidInterval(String),
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("invalid mass point: {0}")]
    InvalidMass(String),
    #[error("evaluation point lies on the support")]
    EvalOnSupport,
    #[error("quadrature did not converge within {max} nodes (defect {defect:.3e})")]
    QuadratureNonconvergence { max: usize, defect: f64 },
    #[error("contour around [{a:.4}, {b:.4}] cannot avoid a singularity near z")]
    ContourCrossesSingularity { a: f64, b: f64 },
    #[error("hulls overlap: [{0:.4}, {1:.4}] vs [{2:.4}, {3:.4}]")]
    OverlappingHulls(f64, f64, f64, f64),
    #[error("sign of the derived measure is not constant right of the hull")]
    SignIndeterminate,
}

pub type Result<T> = std::result::Result<T, MeasureError>;

/// Closed real interval [a, b] with a < b.
#[derive(Clone, Debug)]
pub struct Interval {
    pub a: Real,
    pub b: Real,
}

impl Interval {
    pub fn new(a: Real, b: Real) -> Result<Self> {
        if !(a < b) {
            return Err(MeasureError::InvalidInterval(format!(
                "need a < b, got [{}, {}]",
                a.to_f64(),
                b.to_f64()
            )));
        }
        Ok(Interval { a, b })
    }

    pub fn prec(&self) -> u32 {
        self.a.prec().max(self.b.prec())
    }

    pub fn width(&self) -> Real {
        Float::with_val(self.prec(), &self.b - &self.a)
    }

    pub fn half_width(&self) -> Real {
        Float::with_val(self.prec(), self.width() / 2u32)
    }

    pub fn mid(&self) -> Real {
        let p = self.prec();
        Float::with_val(p, Float::with_val(p, &self.a + &self.b) / 2u32)
    }

    pub fn contains(&self, x: &Real) -> bool {
        *x >= self.a && *x <= self.b
    }

    /// Map u in [-1,1] to x in [a,b].
    pub fn from_unit(&self, u: &Real) -> Real {
        let p = self.prec().max(u.prec());
        Float::with_val(p, self.mid() + Float::with_val(p, self.half_width() * u))
    }

    /// Distance from a complex point to the interval.
    pub fn dist_cx(&self, z: &Cx) -> Real {
        let p = self.prec().max(z.prec());
        let re = &z.re;
        let horiz = if *re < self.a {
            Float::with_val(p, &self.a - re)
        } else if *re > self.b {
            Float::with_val(p, re - &self.b)
        } else {
            Float::with_val(p, 0)
        };
        Float::with_val(p, horiz.hypot(&z.im))
    }

    pub fn dist_real(&self, x: &Real) -> Real {
        let p = self.prec().max(x.prec());
        if *x < self.a {
            Float::with_val(p, &self.a - x)
        } else if *x > self.b {
            Float::with_val(p, x - &self.b)
        } else {
            Float::with_val(p, 0)
        }
    }

    pub fn dist_interval(&self, other: &Interval) -> Real {
        let p = self.prec().max(other.prec());
        if other.a > self.b {
            Float::with_val(p, &other.a - &self.b)
        } else if self.a > other.b {
            Float::with_val(p, &self.a - &other.b)
        } else {
            Float::with_val(p, 0)
        }
    }

    pub fn disjoint(&self, other: &Interval) -> bool {
        other.a > self.b || self.a > other.b
    }

    /// Bernstein ellipse parameter of z relative to this interval
    /// (|phi(z)|, equal to 1 on the interval and growing off it).
    pub fn bernstein_rho(&self, z: &Cx) -> Real {
        let p = self.prec().max(z.prec());
        let ctx = Ctx::new(p);
        let w = crate::limits::sqrt_branch(self, z);
        let two = ctx.real(2.0);
        let num = Cx {
            re: Float::with_val(
                p,
                Float::with_val(p, &two * &z.re) - Float::with_val(p, &self.a + &self.b),
            ),
            im: Float::with_val(p, &two * &z.im),
        }
        .add(&w.mul_real(&two));
        num.div_real(&self.width()).abs()
    }
}

/// Jacobi-type weight on an interval:
/// w(x) = (b-x)^alpha (x-a)^beta * poly(x) * exp(exp_poly(x)).
#[derive(Clone, Debug)]
pub struct WeightSpec {
    pub alpha: f64,
    pub beta: f64,
    pub poly: Vec<Real>,
    pub exp_poly: Vec<Real>,
}

impl WeightSpec {
    pub fn jacobi(alpha: f64, beta: f64, prec: u32) -> Result<Self> {
        if !(alpha > -1.0) || !(beta > -1.0) {
            return Err(MeasureError::InvalidWeight(format!(
                "jacobi exponents must exceed -1, got ({alpha}, {beta})"
            )));
        }
        Ok(WeightSpec {
            alpha,
            beta,
            poly: vec![Float::with_val(prec, 1)],
            exp_poly: Vec::new(),
        })
    }

    pub fn with_poly(mut self, poly: Vec<Real>) -> Self {
        self.poly = poly;
        self
    }

    pub fn with_exp_poly(mut self, exp_poly: Vec<Real>) -> Self {
        self.exp_poly = exp_poly;
        self
    }

    /// The analytic factor poly(x) exp(exp_poly(x)) at a real point.
    pub fn analytic_factor(&self, x: &Real) -> Real {
        let p = x.prec();
        let horner = |cs: &[Real]| -> Real {
            let mut acc = Float::with_val(p, 0);
            for c in cs.iter().rev() {
                acc = Float::with_val(p, Float::with_val(p, &acc * x) + c);
            }
            acc
        };
        let mut v = horner(&self.poly);
        if !self.exp_poly.is_empty() {
            v *= horner(&self.exp_poly).exp();
        }
        v
    }

    /// Positivity of the analytic factor on a sample grid.
    pub fn validate_on(&self, iv: &Interval) -> Result<()> {
        let p = iv.prec();
        let ctx = Ctx::new(p);
        for i in 0..=64 {
            let u = ctx.real(-1.0 + i as f64 / 32.0);
            let x = iv.from_unit(&u);
            if self.analytic_factor(&x) <= 0 {
                return Err(MeasureError::InvalidWeight(format!(
                    "weight factor not strictly positive at x = {}",
                    x.to_f64()
                )));
            }
        }
        Ok(())
    }
}

type CauchyFn = Arc<dyn Fn(&Cx) -> Cx + Send + Sync>;
type FactorFn = Arc<dyn Fn(&Cx) -> Cx + Send + Sync>;

pub enum MeasureKind {
    /// Weight density on the continuous interval plus finitely many masses
    /// (location, weight) outside it.
    Generator {
        weight: WeightSpec,
        masses: Vec<(Real, Real)>,
    },
    /// Measure known only through its Cauchy transform; integration runs over
    /// an ellipse around the hull. `isolated` lists mass locations inside the
    /// hull but off the continuous part (poles of the transform).
    Contour { cauchy: CauchyFn, isolated: Vec<Real> },
    /// factor(x) d(base)(x): same support as the base.
    Weighted { base: Arc<MeasureRep>, factor: FactorFn },
}

impl std::fmt::Debug for MeasureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MeasureKind::Generator { weight, masses } => f
                .debug_struct("Generator")
                .field("weight", weight)
                .field("masses", &masses.len())
                .finish(),
            MeasureKind::Contour { isolated, .. } => f
                .debug_struct("Contour")
                .field("isolated", &isolated.len())
                .finish(),
            MeasureKind::Weighted { base, .. } => {
                f.debug_struct("Weighted").field("base", &base.id).finish()
            }
        }
    }
}

/// Quadrature table: nodes and weights such that
/// integral f dmu ~ sum w_i f(x_i) for f analytic near the hull.
pub enum QuadTable {
    Real(Vec<(Real, Real)>),
    Complex(Vec<(Cx, Cx)>),
}

impl QuadTable {
    pub fn len(&self) -> usize {
        match self {
            QuadTable::Real(v) => v.len(),
            QuadTable::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A signed measure on a real interval hull.
#[derive(Debug)]
pub struct MeasureRep {
    pub id: u64,
    /// Convex hull of the whole support (continuous part and masses).
    pub hull: Interval,
    /// Continuous part of the support.
    pub tilde: Interval,
    pub sign: i8,
    /// Radius around the hull free of foreign singularities; contours stay
    /// within half of it.
    pub clearance: Real,
    pub prec: u32,
    pub kind: MeasureKind,
    tables: RwLock<HashMap<usize, Arc<QuadTable>>>,
    mass_cache: OnceLock<Real>,
    moment1_cache: OnceLock<Real>,
}

fn next_id() -> u64 {
    MEASURE_ID.fetch_add(1, Ordering::Relaxed)
}

impl MeasureRep {
    pub fn generator(
        tilde: Interval,
        weight: WeightSpec,
        masses: Vec<(Real, Real)>,
        prec: u32,
    ) -> Result<Arc<Self>> {
        weight.validate_on(&tilde)?;
        let p = prec;
        let mut lo = tilde.a.clone();
        let mut hi = tilde.b.clone();
        let margin = Float::with_val(p, tilde.width() * pow10(p, -8));
        let mut sign: Option<i8> = None;
        for (loc, w) in &masses {
            if tilde.dist_real(loc) < margin {
                return Err(MeasureError::InvalidMass(format!(
                    "mass at {} touches the continuous interval",
                    loc.to_f64()
                )));
            }
            let s = if *w > 0 {
                1
            } else if *w < 0 {
                -1
            } else {
                return Err(MeasureError::InvalidMass("zero mass weight".into()));
            };
            match sign {
                None => sign = Some(s),
                Some(prev) if prev != s => {
                    return Err(MeasureError::InvalidMass(
                        "mass signs must match the continuous part".into(),
                    ))
                }
                _ => {}
            }
            if *loc < lo {
                lo = loc.clone();
            }
            if *loc > hi {
                hi = loc.clone();
            }
        }
        if sign == Some(-1) {
            return Err(MeasureError::InvalidMass(
                "generator masses must be positive like the weight".into(),
            ));
        }
        let hull = Interval::new(lo, hi)?;
        let clearance = hull.width();
        Ok(Arc::new(MeasureRep {
            id: next_id(),
            hull,
            tilde,
            sign: 1,
            clearance,
            prec,
            kind: MeasureKind::Generator { weight, masses },
            tables: RwLock::new(HashMap::new()),
            mass_cache: OnceLock::new(),
            moment1_cache: OnceLock::new(),
        }))
    }

    pub fn contour(
        hull: Interval,
        tilde: Interval,
        cauchy: CauchyFn,
        isolated: Vec<Real>,
        clearance: Real,
        prec: u32,
    ) -> Result<Arc<Self>> {
        let probe_sign = Self::probe_sign(&hull, &cauchy, prec)?;
        Ok(Arc::new(MeasureRep {
            id: next_id(),
            hull,
            tilde,
            sign: probe_sign,
            clearance,
            prec,
            kind: MeasureKind::Contour { cauchy, isolated },
            tables: RwLock::new(HashMap::new()),
            mass_cache: OnceLock::new(),
            moment1_cache: OnceLock::new(),
        }))
    }

    pub fn weighted(base: Arc<MeasureRep>, factor: FactorFn, clearance: Real) -> Arc<Self> {
        let prec = base.prec;
        let ctx = Ctx::new(prec);
        // sign of the factor on the hull is constant for our constructions;
        // probe at the hull midpoint
        let mid = ctx.from_real(base.hull.mid());
        let fs = (factor)(&mid);
        let s = if fs.re >= 0 { 1 } else { -1 };
        let clearance = if clearance < base.clearance {
            clearance
        } else {
            base.clearance.clone()
        };
        Arc::new(MeasureRep {
            id: next_id(),
            hull: base.hull.clone(),
            tilde: base.tilde.clone(),
            sign: base.sign * s,
            clearance,
            prec,
            kind: MeasureKind::Weighted { base, factor },
            tables: RwLock::new(HashMap::new()),
            mass_cache: OnceLock::new(),
            moment1_cache: OnceLock::new(),
        })
    }

    /// Sign of a transform right of the hull, with a constancy check.
    fn probe_sign(hull: &Interval, cauchy: &CauchyFn, prec: u32) -> Result<i8> {
        let ctx = Ctx::new(prec);
        let w = hull.width();
        let mut sign: Option<i8> = None;
        for mult in [0.5f64, 1.0, 2.0, 4.0] {
            let x = Float::with_val(prec, &hull.b + Float::with_val(prec, &w * ctx.real(mult)));
            let v = (cauchy)(&ctx.from_real(x));
            let s = if v.re > 0 { 1 } else { -1 };
            match sign {
                None => sign = Some(s),
                Some(prev) if prev != s => return Err(MeasureError::SignIndeterminate),
                _ => {}
            }
        }
        Ok(sign.unwrap())
    }

    pub fn isolated_support(&self) -> Vec<Real> {
        match &self.kind {
            MeasureKind::Generator { masses, .. } => masses.iter().map(|(l, _)| l.clone()).collect(),
            MeasureKind::Contour { isolated, .. } => isolated.clone(),
            MeasureKind::Weighted { base, .. } => base.isolated_support(),
        }
    }

    fn ctx(&self) -> Ctx {
        Ctx::new(self.prec)
    }

    /// Contour ellipse parameter: large enough to clear the hull, small
    /// enough to stay inside the clearance band.
    fn contour_rho(&self) -> Real {
        let p = self.prec;
        let h = self.hull.half_width();
        // s = 1 + d/(2h): ellipse extends d/2 beyond the hull endpoints
        let s = Float::with_val(p, 1 + Float::with_val(p, &self.clearance / Float::with_val(p, 2 * h)));
        let r = Float::with_val(p, s.clone().square() - 1u32).sqrt() + s;
        let min_rho = Float::with_val(p, 1.05);
        if r < min_rho {
            min_rho
        } else {
            r
        }
    }

    /// Node/weight table of size n (cached).
    pub fn table(&self, n: usize) -> Result<Arc<QuadTable>> {
        {
            let guard = self.tables.read().unwrap();
            if let Some(t) = guard.get(&n) {
                return Ok(t.clone());
            }
        }
        let t = Arc::new(self.build_table(n)?);
        self.tables.write().unwrap().insert(n, t.clone());
        Ok(t)
    }

    fn build_table(&self, n: usize) -> Result<QuadTable> {
        let p = self.prec;
        let ctx = self.ctx();
        match &self.kind {
            MeasureKind::Generator { weight, masses } => {
                let rule = gauss_jacobi(n, weight.alpha, weight.beta, p);
                let h = self.tilde.half_width();
                use rug::ops::Pow;
                let scale = Float::with_val(p, h.clone().pow(ctx.real(weight.alpha + weight.beta + 1.0)));
                let mut v = Vec::with_capacity(n + masses.len());
                for (u, w) in rule.nodes.iter().zip(&rule.weights) {
                    let x = self.tilde.from_unit(u);
                    let wt = Float::with_val(p, Float::with_val(p, w * &scale) * weight.analytic_factor(&x));
                    v.push((x, wt));
                }
                for (loc, w) in masses {
                    v.push((loc.clone(), w.clone()));
                }
                Ok(QuadTable::Real(v))
            }
            MeasureKind::Contour { cauchy, .. } => {
                let rho = self.contour_rho();
                Ok(QuadTable::Complex(self.contour_table_with_rho(
                    cauchy, &rho, n,
                )))
            }
            MeasureKind::Weighted { base, factor } => {
                let inner = base.table(n)?;
                match &*inner {
                    QuadTable::Real(v) => {
                        let mut out = Vec::with_capacity(v.len());
                        for (x, w) in v {
                            let fx = (factor)(&ctx.from_real(x.clone()));
                            // the factor is real on the real axis for all our measures
                            out.push((x.clone(), Float::with_val(p, &fx.re * w)));
                        }
                        Ok(QuadTable::Real(out))
                    }
                    QuadTable::Complex(v) => {
                        let mut out = Vec::with_capacity(v.len());
                        for (z, w) in v {
                            out.push((z.clone(), (factor)(z).mul(w)));
                        }
                        Ok(QuadTable::Complex(out))
                    }
                }
            }
        }
    }

    /// Trapezoid nodes/weights on the Joukowski ellipse of parameter rho:
    /// (1/2 pi i) contour integral of F(zeta) tau_hat(zeta) d zeta.
    fn contour_table_with_rho(&self, cauchy: &CauchyFn, rho: &Real, n: usize) -> Vec<(Cx, Cx)> {
        let p = self.prec;
        let ctx = self.ctx();
        let h = self.hull.half_width();
        let mid = self.hull.mid();
        let two_pi = Float::with_val(p, ctx.pi() * 2u32);
        let rho_inv = Float::with_val(p, rho.clone().recip_ref());
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            let theta = Float::with_val(p, &two_pi * ctx.int(j as i64)) / ctx.int(n as i64);
            let (sin, cos) = theta.sin_cos(Float::new(p));
            // zeta = mid + (h/2)(rho e^{i t} + e^{-i t}/rho)
            let er = Cx {
                re: Float::with_val(p, rho * &cos),
                im: Float::with_val(p, rho * &sin),
            };
            let er_inv = Cx {
                re: Float::with_val(p, &rho_inv * &cos),
                im: Float::with_val(p, -Float::with_val(p, &rho_inv * &sin)),
            };
            let half_h = Float::with_val(p, &h / 2u32);
            let zeta = er.add(&er_inv).mul_real(&half_h).add(&ctx.from_real(mid.clone()));
            // weight = (h/(2n)) (rho e^{i t} - e^{-i t}/rho) * tau_hat(zeta)
            let dz = er.sub(&er_inv).mul_real(&Float::with_val(p, &half_h / ctx.int(n as i64)).clone());
            let tv = (cauchy)(&zeta);
            out.push((zeta, dz.mul(&tv)));
        }
        out
    }

    /// Total mass (integral of 1).
    pub fn total_mass(&self) -> Real {
        self.mass_cache
            .get_or_init(|| {
                let one = |_: &Cx| Cx::one(self.prec);
                self.integrate_cx(&one)
                    .expect("total mass integration failed")
                    .re
            })
            .clone()
    }

    /// First moment (integral of x).
    pub fn moment1(&self) -> Real {
        self.moment1_cache
            .get_or_init(|| {
                let f = |z: &Cx| z.clone();
                self.integrate_cx(&f).expect("moment integration failed").re
            })
            .clone()
    }

    /// Adaptive integral of an analytic-near-hull integrand.
    pub fn integrate_cx(&self, f: &dyn Fn(&Cx) -> Cx) -> Result<Cx> {
        Ok(self.integrate_scaled(f)?.0)
    }

    /// Integral plus the absolute term sum (cancellation scale).
    pub fn integrate_scaled(&self, f: &dyn Fn(&Cx) -> Cx) -> Result<(Cx, Real)> {
        let p = self.prec;
        let ctx = self.ctx();
        let tol = ctx.quad_tol();
        let cap = match self.kind {
            MeasureKind::Contour { .. } => MAX_CONTOUR_NODES,
            _ => self.max_nodes(),
        };
        let mut n = MIN_QUAD_NODES;
        let mut prev: Option<Cx> = None;
        loop {
            let (val, scale) = self.sum_table(&self.table(n)?, f);
            if let Some(pv) = &prev {
                let defect = val.sub(pv).abs();
                let bound = Float::with_val(p, &tol * &scale);
                if defect <= bound {
                    return Ok((val, scale));
                }
                if n >= cap {
                    return Err(MeasureError::QuadratureNonconvergence {
                        max: cap,
                        defect: defect.to_f64(),
                    });
                }
            }
            prev = Some(val);
            n *= 2;
            if n > cap {
                n = cap;
            }
        }
    }

    fn max_nodes(&self) -> usize {
        match &self.kind {
            MeasureKind::Generator { .. } => MAX_QUAD_NODES,
            MeasureKind::Contour { .. } => MAX_CONTOUR_NODES,
            MeasureKind::Weighted { base, .. } => base.max_nodes(),
        }
    }

    fn sum_table(&self, table: &QuadTable, f: &dyn Fn(&Cx) -> Cx) -> (Cx, Real) {
        let p = self.prec;
        let mut acc = Cx::zero(p);
        let mut scale = Float::with_val(p, 0);
        match table {
            QuadTable::Real(v) => {
                for (x, w) in v {
                    let term = f(&Cx::from_real(x)).mul_real(w);
                    scale += term.abs();
                    acc = acc.add(&term);
                }
            }
            QuadTable::Complex(v) => {
                for (z, w) in v {
                    let term = f(z).mul(w);
                    scale += term.abs();
                    acc = acc.add(&term);
                }
            }
        }
        (acc, scale)
    }

    /// Adaptive real-valued integral.
    pub fn integrate_real(&self, f: &dyn Fn(&Real) -> Real) -> Result<Real> {
        let p = self.prec;
        let g = |z: &Cx| -> Cx {
            if z.im.is_zero() {
                Cx::from_real(&f(&z.re))
            } else {
                // analytic continuation is the caller's responsibility for
                // contour measures; real-only integrands must not reach here
                panic!("integrate_real used on a contour-backed measure");
            }
        };
        Ok(Float::with_val(p, self.integrate_cx(&g)?.re))
    }

    pub fn is_real_backed(&self) -> bool {
        match &self.kind {
            MeasureKind::Generator { .. } => true,
            MeasureKind::Contour { .. } => false,
            MeasureKind::Weighted { base, .. } => base.is_real_backed(),
        }
    }

    /// Cauchy transform at z off the support.
    pub fn cauchy(&self, z: &Cx) -> Result<Cx> {
        let p = self.prec;
        match &self.kind {
            MeasureKind::Contour { cauchy, .. } => {
                if self.hull.dist_cx(z).is_zero() {
                    return Err(MeasureError::EvalOnSupport);
                }
                Ok((cauchy)(z))
            }
            MeasureKind::Generator { .. } => {
                if self.on_support(z) {
                    return Err(MeasureError::EvalOnSupport);
                }
                let kernel = |x: &Cx| z.sub(x).recip();
                self.integrate_cx(&kernel)
            }
            MeasureKind::Weighted { base, factor } => {
                if self.on_support(z) {
                    return Err(MeasureError::EvalOnSupport);
                }
                if base.is_real_backed() {
                    let kernel = |x: &Cx| (factor)(x).mul(&z.sub(x).recip());
                    self.integrate_cx(&kernel)
                } else {
                    // contour base: the ellipse must exclude z
                    let rho_z = self.hull.bernstein_rho(z);
                    let rho_h = self.contour_rho();
                    let rho = {
                        let candidate = Float::with_val(p, rho_z.clone().sqrt());
                        if candidate < rho_h {
                            candidate
                        } else {
                            rho_h
                        }
                    };
                    if rho <= Float::with_val(p, 1.02) {
                        return Err(MeasureError::ContourCrossesSingularity {
                            a: self.hull.a.to_f64(),
                            b: self.hull.b.to_f64(),
                        });
                    }
                    let inner_cauchy = base.cauchy_fn();
                    let ctx = self.ctx();
                    let tol = ctx.quad_tol();
                    let mut n = MIN_QUAD_NODES;
                    let mut prev: Option<Cx> = None;
                    loop {
                        let table = self.contour_table_with_rho(&inner_cauchy, &rho, n);
                        let mut acc = Cx::zero(p);
                        let mut scale = Float::with_val(p, 0);
                        for (zeta, w) in &table {
                            let term = (factor)(zeta).mul(&z.sub(zeta).recip()).mul(w);
                            scale += term.abs();
                            acc = acc.add(&term);
                        }
                        if let Some(pv) = &prev {
                            let defect = acc.sub(pv).abs();
                            if defect <= Float::with_val(p, &tol * &scale) {
                                return Ok(acc);
                            }
                            if n >= MAX_CONTOUR_NODES {
                                return Err(MeasureError::QuadratureNonconvergence {
                                    max: MAX_CONTOUR_NODES,
                                    defect: defect.to_f64(),
                                });
                            }
                        }
                        prev = Some(acc);
                        n *= 2;
                    }
                }
            }
        }
    }

    /// The Cauchy transform as a shareable closure.
    pub fn cauchy_fn(self: &Arc<Self>) -> CauchyFn {
        let me = self.clone();
        Arc::new(move |z: &Cx| me.cauchy(z).expect("cauchy transform evaluation failed"))
    }

    fn on_support(&self, z: &Cx) -> bool {
        if !z.im.is_zero() {
            return false;
        }
        if self.tilde.contains(&z.re) {
            return true;
        }
        let p = self.prec;
        let eps = Float::with_val(p, self.hull.width() * pow10(p, -30));
        self.isolated_support()
            .iter()
            .any(|loc| Float::with_val(p, loc - &z.re).abs() < eps)
    }
}

/// d<s1, s2>(x) = s2_hat(x) d s1(x); hulls must be disjoint.
pub fn product_measure(s1: &Arc<MeasureRep>, s2: &Arc<MeasureRep>) -> Result<Arc<MeasureRep>> {
    if !s1.hull.disjoint(&s2.hull) {
        return Err(MeasureError::OverlappingHulls(
            s1.hull.a.to_f64(),
            s1.hull.b.to_f64(),
            s2.hull.a.to_f64(),
            s2.hull.b.to_f64(),
        ));
    }
    let factor = s2.cauchy_fn();
    let clearance = {
        let d = s1.hull.dist_interval(&s2.hull);
        if d < s1.clearance {
            d
        } else {
            s1.clearance.clone()
        }
    };
    Ok(MeasureRep::weighted(s1.clone(), factor, clearance))
}

/// Nikishin components s_1..s_m from the generators (right-nested products).
pub fn nikishin_components(generators: &[Arc<MeasureRep>]) -> Result<Vec<Arc<MeasureRep>>> {
    let m = generators.len();
    let mut out = Vec::with_capacity(m);
    for k in 0..m {
        // inner = <sigma_{k}, ..., sigma_2> nesting: s_k = <sigma_1, <sigma_2, ... sigma_k>>
        let mut inner: Option<Arc<MeasureRep>> = None;
        for j in (1..=k).rev() {
            inner = Some(match inner {
                None => generators[j].clone(),
                Some(tail) => product_measure(&generators[j], &tail)?,
            });
        }
        let s = match inner {
            None => generators[0].clone(),
            Some(tail) => product_measure(&generators[0], &tail)?,
        };
        out.push(s);
    }
    Ok(out)
}

/// Nested product <sigma_i, ..., sigma_j> over a slice of consecutive measures.
pub fn nested_product(sigmas: &[Arc<MeasureRep>]) -> Result<Arc<MeasureRep>> {
    assert!(!sigmas.is_empty());
    let mut inner = sigmas[sigmas.len() - 1].clone();
    for j in (0..sigmas.len() - 1).rev() {
        inner = product_measure(&sigmas[j], &inner)?;
    }
    Ok(inner)
}

/// Reciprocal decomposition 1/s_hat(z) = l(z) + tau_hat(z) with deg l = 1.
/// Returns (l1, l0, tau) where l(z) = l1 z + l0.
pub fn inverse_measure(s: &Arc<MeasureRep>) -> Result<(Real, Real, Arc<MeasureRep>)> {
    let p = s.prec;
    let m0 = s.total_mass();
    let m1 = s.moment1();
    // 1/s_hat(z) = z/m0 - m1/m0^2 + O(1/z)
    let l1 = Float::with_val(p, m0.clone().recip_ref());
    let l0 = Float::with_val(p, -Float::with_val(p, &m1 / Float::with_val(p, m0.clone().square())));
    let s_arc = s.clone();
    let l1c = l1.clone();
    let l0c = l0.clone();
    let cauchy: CauchyFn = Arc::new(move |z: &Cx| {
        let sv = s_arc.cauchy(z).expect("cauchy transform in tau evaluation");
        let l = z.mul_real(&l1c).add(&Cx::from_real(&l0c));
        sv.recip().sub(&l)
    });
    // isolated part: zeros of s_hat in the gaps of the support become poles
    let isolated = transform_zeros_in_gaps(s)?;
    let tau = MeasureRep::contour(
        s.hull.clone(),
        s.tilde.clone(),
        cauchy,
        isolated,
        s.clearance.clone(),
        p,
    )?;
    Ok((l1, l0, tau))
}

/// Real zeros of s_hat inside hull-minus-support gaps (one per gap).
fn transform_zeros_in_gaps(s: &Arc<MeasureRep>) -> Result<Vec<Real>> {
    let p = s.prec;
    let masses = s.isolated_support();
    if masses.is_empty() {
        return Ok(Vec::new());
    }
    let ctx = Ctx::new(p);
    let mut pts: Vec<Real> = masses;
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // gap intervals between consecutive support components
    let mut gaps: Vec<(Real, Real)> = Vec::new();
    let mut prev_hi: Real = s.tilde.b.clone();
    let mut below: Vec<Real> = Vec::new();
    for m in &pts {
        if *m < s.tilde.a {
            below.push(m.clone());
        }
    }
    for m in pts.iter().filter(|m| **m > s.tilde.b) {
        gaps.push((prev_hi.clone(), m.clone()));
        prev_hi = m.clone();
    }
    let mut next_lo: Real = s.tilde.a.clone();
    for m in below.iter().rev() {
        gaps.push((m.clone(), next_lo.clone()));
        next_lo = m.clone();
    }
    let mut zeros = Vec::new();
    let eval = |x: &Real| -> Real {
        s.cauchy(&ctx.from_real(x.clone()))
            .expect("transform eval in gap")
            .re
    };
    for (lo, hi) in gaps {
        let width = Float::with_val(p, &hi - &lo);
        let eps = Float::with_val(p, &width * &pow10(p, -12));
        let mut a = Float::with_val(p, &lo + &eps);
        let mut b = Float::with_val(p, &hi - &eps);
        let (fa, fb) = (eval(&a), eval(&b));
        if (fa.is_sign_positive() && fb.is_sign_positive())
            || (fa.is_sign_negative() && fb.is_sign_negative())
        {
            continue; // no sign change resolved in this gap
        }
        let mut fa = fa;
        for _ in 0..(p as usize + 40) {
            let mid = Float::with_val(p, Float::with_val(p, &a + &b) / 2u32);
            let fm = eval(&mid);
            if fm.is_sign_positive() == fa.is_sign_positive() {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
            if Float::with_val(p, &b - &a) < Float::with_val(p, &width * &pow10(p, -((decimal_digits(p) as i64) - 2))) {
                break;
            }
        }
        zeros.push(Float::with_val(p, Float::with_val(p, &a + &b) / 2u32));
    }
    Ok(zeros)
}

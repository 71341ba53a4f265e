//! Warping profiles `λ: [0, r̄) → [0, ∞)`.
//!
//! Two representations are supported. Closed-form profiles carry `λ, λ', λ''`
//! as evaluable functions. Shape-function profiles define the geometry through
//! a function `φ(s)` of the fiber radius with `λ'² = φ(λ)` and are realized by
//! integrating the regular second-order form `λ'' = ½ φ'(λ)` from the horizon
//! root `s₀` (where `φ(s₀) = 0`, `φ'(s₀) > 0`). The second-order form is
//! smooth at the horizon where the naive first-order equation degenerates.

use std::sync::Arc;

use crate::error::{GeomError, Result};

/// Evaluable real function of one variable.
pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// How the profile behaves at `r = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryMode {
    /// `λ(0) = 0`, `λ'(0) = 1`: the origin is a smooth point (space forms).
    ConePoint,
    /// `λ'(0) = 0`, `λ''(0) > 0`: the inner boundary is a horizon.
    Horizon,
}

/// `(λ, λ', λ'')` at a radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileValues {
    pub lambda: f64,
    pub dlambda: f64,
    pub d2lambda: f64,
}

struct ClosedForm {
    lambda: RealFn,
    dlambda: RealFn,
    d2lambda: RealFn,
    /// `Λ(r) = ∫₀^r λ`, when known in closed form.
    integral: Option<RealFn>,
}

struct ShapeTable {
    phi: RealFn,
    dphi: RealFn,
    s0: f64,
    step: f64,
    /// Knot data `(λ, λ', Λ)` at `r = i·step`, from a fixed-step RK4 sweep.
    knots: Vec<[f64; 3]>,
}

enum Repr {
    ClosedForm(ClosedForm),
    Shape(ShapeTable),
}

/// The warping function of an ambient space, with two derivatives and the
/// primitive `Λ(r) = ∫₀^r λ(s) ds`.
pub struct WarpingProfile {
    repr: Repr,
    r_max: f64,
    boundary: BoundaryMode,
    name: String,
}

const ODE_STEP: f64 = 1e-3;
const SHAPE_CONSISTENCY_TOL: f64 = 1e-8;

impl WarpingProfile {
    /// Euclidean profile `λ = r` on `[0, r_cap)`.
    pub fn euclidean(r_cap: f64) -> Self {
        Self::closed_form(
            "euclidean",
            Arc::new(|r| r),
            Arc::new(|_| 1.0),
            Arc::new(|_| 0.0),
            Some(Arc::new(|r: f64| 0.5 * r * r) as RealFn),
            r_cap,
            BoundaryMode::ConePoint,
        )
    }

    /// Spherical profile `λ = sin r` on `[0, π)`.
    pub fn sphere() -> Self {
        Self::closed_form(
            "sphere",
            Arc::new(f64::sin),
            Arc::new(f64::cos),
            Arc::new(|r: f64| -r.sin()),
            Some(Arc::new(|r: f64| 1.0 - r.cos()) as RealFn),
            std::f64::consts::PI,
            BoundaryMode::ConePoint,
        )
    }

    /// Hyperbolic profile `λ = sinh r` on `[0, r_cap)`.
    pub fn hyperbolic(r_cap: f64) -> Self {
        Self::closed_form(
            "hyperbolic",
            Arc::new(f64::sinh),
            Arc::new(f64::cosh),
            Arc::new(f64::sinh),
            Some(Arc::new(|r: f64| r.cosh() - 1.0) as RealFn),
            r_cap,
            BoundaryMode::ConePoint,
        )
    }

    /// General closed-form profile.
    pub fn closed_form(
        name: &str,
        lambda: RealFn,
        dlambda: RealFn,
        d2lambda: RealFn,
        integral: Option<RealFn>,
        r_max: f64,
        boundary: BoundaryMode,
    ) -> Self {
        Self {
            repr: Repr::ClosedForm(ClosedForm {
                lambda,
                dlambda,
                d2lambda,
                integral,
            }),
            r_max,
            boundary,
            name: name.to_string(),
        }
    }

    /// Shape-function profile: finds the horizon root `s₀` of `φ` (the root
    /// with `φ'(s₀) > 0`), then integrates `λ'' = ½ φ'(λ)` with
    /// `λ(0) = s₀, λ'(0) = 0` up to `r_cap` or until `λ'` returns to zero.
    pub fn from_shape(name: &str, phi: RealFn, dphi: RealFn, r_cap: f64) -> Result<Self> {
        let s0 = find_horizon_root(&*phi, &*dphi)?;
        if dphi(s0) <= 0.0 {
            return Err(GeomError::NoHorizonRoot { lo: 0.0, hi: s0 });
        }

        let step = ODE_STEP;
        let mut knots = Vec::with_capacity((r_cap / step).ceil() as usize + 2);
        let mut lam = s0;
        let mut dlam = 0.0;
        let mut integ = 0.0;
        knots.push([lam, dlam, integ]);
        let mut r = 0.0;
        let mut r_max = r_cap;
        while r < r_cap {
            let (nl, nd, ni) = rk4_shape_step(&*dphi, lam, dlam, integ, step);
            r += step;
            if nd <= 0.0 && r > step {
                // λ' returned to zero: outer horizon / dome top ends the domain
                r_max = r - step;
                break;
            }
            lam = nl;
            dlam = nd;
            integ = ni;
            knots.push([lam, dlam, integ]);
            if lam <= 0.0 {
                return Err(GeomError::ShapeNegative { s: r, value: lam });
            }
        }
        if knots.len() < 8 {
            return Err(GeomError::SurfaceBuild(format!(
                "shape profile '{name}' has a degenerate domain (r_max ≈ {r_max})"
            )));
        }

        let profile = Self {
            repr: Repr::Shape(ShapeTable {
                phi,
                dphi,
                s0,
                step,
                knots,
            }),
            r_max,
            boundary: BoundaryMode::Horizon,
            name: name.to_string(),
        };
        profile.validate_shape_consistency()?;
        Ok(profile)
    }

    /// deSitter-Schwarzschild shape `φ(s) = 1 - m s^{1-n} - c s²`.
    pub fn desitter_schwarzschild(n: usize, m: f64, c: f64, r_cap: f64) -> Result<Self> {
        let p = 1.0 - n as f64;
        let phi: RealFn = Arc::new(move |s: f64| 1.0 - m * s.powf(p) - c * s * s);
        let dphi: RealFn = Arc::new(move |s: f64| -m * p * s.powf(p - 1.0) - 2.0 * c * s);
        Self::from_shape("dss", phi, dphi, r_cap)
    }

    /// Reissner-Nordström shape `φ(s) = 1 - m s^{1-n} + q² s^{2(1-n)}`.
    pub fn reissner_nordstrom(n: usize, m: f64, q: f64, r_cap: f64) -> Result<Self> {
        let p = 1.0 - n as f64;
        let q2 = q * q;
        let phi: RealFn = Arc::new(move |s: f64| 1.0 - m * s.powf(p) + q2 * s.powf(2.0 * p));
        let dphi: RealFn =
            Arc::new(move |s: f64| -m * p * s.powf(p - 1.0) + 2.0 * p * q2 * s.powf(2.0 * p - 1.0));
        Self::from_shape("rn", phi, dphi, r_cap)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn boundary_mode(&self) -> BoundaryMode {
        self.boundary
    }

    /// Horizon radius `s₀` for shape profiles.
    pub fn horizon_radius(&self) -> Option<f64> {
        match &self.repr {
            Repr::Shape(t) => Some(t.s0),
            Repr::ClosedForm(_) => None,
        }
    }

    /// `(λ, λ', λ'')` at `r`.
    pub fn eval(&self, r: f64) -> Result<ProfileValues> {
        if !(0.0..self.r_max).contains(&r) {
            return Err(GeomError::OutOfDomain {
                r,
                r_max: self.r_max,
            });
        }
        match &self.repr {
            Repr::ClosedForm(f) => Ok(ProfileValues {
                lambda: (f.lambda)(r),
                dlambda: (f.dlambda)(r),
                d2lambda: (f.d2lambda)(r),
            }),
            Repr::Shape(t) => {
                let (lambda, dlambda, _) = t.interpolate(r);
                if (t.phi)(lambda) < -SHAPE_CONSISTENCY_TOL {
                    return Err(GeomError::ShapeNegative {
                        s: lambda,
                        value: (t.phi)(lambda),
                    });
                }
                Ok(ProfileValues {
                    lambda,
                    dlambda,
                    d2lambda: 0.5 * (t.dphi)(lambda),
                })
            }
        }
    }

    /// `Λ(r) = ∫₀^r λ(s) ds`.
    pub fn lambda_integral(&self, r: f64) -> Result<f64> {
        if !(0.0..self.r_max).contains(&r) {
            return Err(GeomError::OutOfDomain {
                r,
                r_max: self.r_max,
            });
        }
        match &self.repr {
            Repr::ClosedForm(f) => {
                if let Some(integral) = &f.integral {
                    Ok(integral(r))
                } else {
                    Ok(gauss_legendre_integral(&*f.lambda, 0.0, r))
                }
            }
            Repr::Shape(t) => Ok(t.interpolate(r).2),
        }
    }

    /// Checks `|λ'² - φ(λ)| ≤ tol` over the stored knots (shape profiles).
    fn validate_shape_consistency(&self) -> Result<()> {
        if let Repr::Shape(t) = &self.repr {
            for (i, k) in t.knots.iter().enumerate() {
                let defect = (k[1] * k[1] - (t.phi)(k[0])).abs();
                if defect > SHAPE_CONSISTENCY_TOL {
                    return Err(GeomError::BadStep {
                        h: t.step,
                        reason: format!(
                            "shape consistency |λ'² - φ(λ)| = {defect:.3e} at knot {i}"
                        ),
                    });
                }
            }
        }
        Ok(())
    }
}

impl ShapeTable {
    /// Cubic Hermite interpolation of `(λ, λ', Λ)`. Each quantity uses its own
    /// derivative data (`λ` with `λ'`, `λ'` with `λ'' = ½φ'(λ)`, `Λ` with `λ`),
    /// keeping all three O(step⁴) accurate.
    fn interpolate(&self, r: f64) -> (f64, f64, f64) {
        let last = self.knots.len() - 1;
        let pos = (r / self.step).floor() as usize;
        let i = pos.min(last - 1);
        let t = (r - i as f64 * self.step) / self.step;
        let a = &self.knots[i];
        let b = &self.knots[i + 1];
        let h = self.step;

        let d2a = 0.5 * (self.dphi)(a[0]);
        let d2b = 0.5 * (self.dphi)(b[0]);

        let lambda = hermite(a[0], a[1] * h, b[0], b[1] * h, t);
        let dlambda = hermite(a[1], d2a * h, b[1], d2b * h, t);
        let integral = hermite(a[2], a[0] * h, b[2], b[0] * h, t);
        (lambda, dlambda, integral)
    }
}

/// Cubic Hermite basis on [0, 1] with scaled derivatives.
fn hermite(p0: f64, m0: f64, p1: f64, m1: f64, t: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    p0 * (2.0 * t3 - 3.0 * t2 + 1.0)
        + m0 * (t3 - 2.0 * t2 + t)
        + p1 * (-2.0 * t3 + 3.0 * t2)
        + m1 * (t3 - t2)
}

/// One RK4 step of `(λ, λ', Λ)' = (λ', ½φ'(λ), λ)`.
fn rk4_shape_step(dphi: &dyn Fn(f64) -> f64, lam: f64, dlam: f64, integ: f64, h: f64) -> (f64, f64, f64) {
    let f = |l: f64, d: f64| (d, 0.5 * dphi(l), l);
    let (k1l, k1d, k1i) = f(lam, dlam);
    let (k2l, k2d, k2i) = f(lam + 0.5 * h * k1l, dlam + 0.5 * h * k1d);
    let (k3l, k3d, k3i) = f(lam + 0.5 * h * k2l, dlam + 0.5 * h * k2d);
    let (k4l, k4d, k4i) = f(lam + h * k3l, dlam + h * k3d);
    (
        lam + h / 6.0 * (k1l + 2.0 * k2l + 2.0 * k3l + k4l),
        dlam + h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d),
        integ + h / 6.0 * (k1i + 2.0 * k2i + 2.0 * k3i + k4i),
    )
}

/// Finds the root of `φ` with `φ'(root) > 0` by scanning a multiplicative
/// grid and bisecting the bracketing interval.
fn find_horizon_root(phi: &dyn Fn(f64) -> f64, dphi: &dyn Fn(f64) -> f64) -> Result<f64> {
    let lo = 1e-4;
    let hi = 1e4;
    let mut s_prev = lo;
    let mut f_prev = phi(s_prev);
    let mut best: Option<f64> = None;
    let steps = 4000;
    for i in 1..=steps {
        let s = lo * (hi / lo).powf(i as f64 / steps as f64);
        let f = phi(s);
        if f_prev == 0.0 && dphi(s_prev) > 0.0 {
            best = Some(s_prev);
        }
        if f_prev * f < 0.0 {
            let root = bisect(phi, s_prev, s);
            if dphi(root) > 0.0 {
                best = Some(root);
            }
        }
        s_prev = s;
        f_prev = f;
    }
    best.ok_or(GeomError::NoHorizonRoot { lo, hi })
}

fn bisect(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 || (b - a) < 1e-15 * m.abs().max(1.0) {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// Composite 16-point Gauss-Legendre on [a, b], split into panels of width ≤ 0.5.
fn gauss_legendre_integral(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    // abscissas/weights for 16-point Gauss-Legendre on [-1, 1]
    const X: [f64; 8] = [
        0.0950125098376374,
        0.2816035507792589,
        0.4580167776572274,
        0.6178762444026438,
        0.7554044083550030,
        0.8656312023878318,
        0.9445750230732326,
        0.9894009349916499,
    ];
    const W: [f64; 8] = [
        0.1894506104550685,
        0.1826034150449236,
        0.1691565193950025,
        0.1495959888165767,
        0.1246289712555339,
        0.0951585116824928,
        0.0622535239386479,
        0.0271524594117541,
    ];
    let panels = ((b - a) / 0.5).ceil().max(1.0) as usize;
    let hw = (b - a) / panels as f64 / 2.0;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (2 * p + 1) as f64 * hw;
        for i in 0..8 {
            total += W[i] * (f(mid + hw * X[i]) + f(mid - hw * X[i]));
        }
    }
    total * hw
}

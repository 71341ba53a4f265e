//! Rotationally symmetric hypersurfaces in any fiber dimension.
//!
//! A meridian curve `t ↦ (r(t), θ(t))` in the half-strip `[0, r̄) × [0, π]`
//! is swept by the isometric `S^{n-1}` action of the round fiber. Nodes are
//! placed at equal-arclength midpoints of the meridian; quadrature weights
//! are per-cell integrals of the orbit volume density
//! `(λ(r) sin θ)^{n-1} ω_{n-1}`, computed on the analytic curve so slices and
//! geodesic spheres integrate exactly to round-off.

use std::sync::Arc;

use crate::ambient::AmbientSpace;
use crate::error::{GeomError, Result};
use crate::surface::stencil::Deriv1D;

/// Scalar curve component with two derivatives.
#[derive(Clone)]
pub struct CurveFn {
    pub f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub df: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub d2f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl CurveFn {
    pub fn constant(c: f64) -> Self {
        Self {
            f: Arc::new(move |_| c),
            df: Arc::new(|_| 0.0),
            d2f: Arc::new(|_| 0.0),
        }
    }

    pub fn identity() -> Self {
        Self {
            f: Arc::new(|t| t),
            df: Arc::new(|_| 1.0),
            d2f: Arc::new(|_| 0.0),
        }
    }
}

/// A meridian specification: `(r(t), θ(t))` for `t` in `t_span`.
#[derive(Clone)]
pub struct MeridianCurve {
    pub name: String,
    pub r: CurveFn,
    pub theta: CurveFn,
    pub t_span: (f64, f64),
    /// Closed loops are periodic in `t`; otherwise the meridian runs from
    /// pole to pole (θ = 0 to θ = π) and must meet the axis orthogonally.
    pub closed_loop: bool,
}

impl MeridianCurve {
    /// The slice `{r₀} × P`.
    pub fn slice(r0: f64) -> Self {
        Self {
            name: format!("slice(r0={r0})"),
            r: CurveFn::constant(r0),
            theta: CurveFn::identity(),
            t_span: (0.0, std::f64::consts::PI),
            closed_loop: false,
        }
    }

    /// Geodesic sphere of radius `R` about the origin (Euclidean ambient:
    /// the round sphere; identical to `slice(R)` as a meridian).
    pub fn circle(radius: f64) -> Self {
        let mut m = Self::slice(radius);
        m.name = format!("sphere(R={radius})");
        m
    }

    /// The ellipsoid `y₁² + … + y_n² + y_{n+1}²/a² = 1` in Euclidean space:
    /// `r(t) = √(sin²t + a² cos²t)`, `θ(t) = atan2(sin t, a cos t)`.
    pub fn ellipse(a: f64) -> Self {
        let r = {
            let f = move |t: f64| (t.sin().powi(2) + a * a * t.cos().powi(2)).sqrt();
            let df = move |t: f64| t.sin() * t.cos() * (1.0 - a * a) / f(t);
            CurveFn {
                f: Arc::new(f),
                df: Arc::new(df),
                d2f: Arc::new(move |t: f64| {
                    let rr = f(t);
                    (1.0 - a * a) * ((2.0 * t).cos() / rr - t.sin() * t.cos() * df(t) / (rr * rr))
                }),
            }
        };
        let theta = {
            let f = move |t: f64| t.sin().atan2(a * t.cos());
            let r2 = move |t: f64| t.sin().powi(2) + a * a * t.cos().powi(2);
            let dr = move |t: f64| t.sin() * t.cos() * (1.0 - a * a) / r2(t).sqrt();
            CurveFn {
                f: Arc::new(f),
                df: Arc::new(move |t: f64| a / r2(t)),
                d2f: Arc::new(move |t: f64| -2.0 * a * dr(t) / r2(t).powf(1.5)),
            }
        };
        Self {
            name: format!("ellipsoid(a={a})"),
            r,
            theta,
            t_span: (0.0, std::f64::consts::PI),
            closed_loop: false,
        }
    }

    /// Slice perturbed radially by `A cos(m t)`: `r(t) = r₀ + A cos(m t)`,
    /// `θ(t) = t`. Integer `m` keeps the axis crossings orthogonal.
    pub fn perturbed_slice(r0: f64, amplitude: f64, mode: u32) -> Self {
        let m = mode as f64;
        Self {
            name: format!("perturbed-slice(r0={r0},A={amplitude},m={mode})"),
            r: CurveFn {
                f: Arc::new(move |t: f64| r0 + amplitude * (m * t).cos()),
                df: Arc::new(move |t: f64| -amplitude * m * (m * t).sin()),
                d2f: Arc::new(move |t: f64| -amplitude * m * m * (m * t).cos()),
            },
            theta: CurveFn::identity(),
            t_span: (0.0, std::f64::consts::PI),
            closed_loop: false,
        }
    }
}

/// Closed-form principal curvatures of the swept surface at parameter `t`:
/// one meridian curvature and `n-1` equal rotational curvatures, from the
/// analytic curve derivatives and the warped-plane connection.
pub fn closed_form_curvatures(
    ambient: &AmbientSpace,
    meridian: &MeridianCurve,
    t: f64,
) -> Result<(f64, f64)> {
    let r = (meridian.r.f)(t);
    let rp = (meridian.r.df)(t);
    let rpp = (meridian.r.d2f)(t);
    let th = (meridian.theta.f)(t);
    let thp = (meridian.theta.df)(t);
    let thpp = (meridian.theta.d2f)(t);
    let p = ambient.eval_profile(r)?;
    let (lam, dlam) = (p.lambda, p.dlambda);

    let v2 = rp * rp + lam * lam * thp * thp;
    let v = v2.sqrt();
    // unit normal in chart components (r, θ), left of the tangent
    let nu_r = lam * thp / v;
    let nu_t = -rp / (lam * v);

    // meridian acceleration with warped-plane Christoffels
    let acc_r = rpp - lam * dlam * thp * thp;
    let acc_t = thpp + 2.0 * (dlam / lam) * rp * thp;
    let kappa_mu = -(acc_r * nu_r + lam * lam * acc_t * nu_t) / v2;

    let kappa_rot = nu_r * dlam / lam + nu_t / th.tan();
    Ok((kappa_mu, kappa_rot))
}

/// Discrete rotational hypersurface: nodes at equal-arclength midpoints of
/// the meridian, each carrying its orbit volume in the quadrature weight.
pub struct RotationalSurface {
    pub ambient: Arc<AmbientSpace>,
    pub meridian: MeridianCurve,
    pub n_s: usize,
    /// Arclength step and total meridian length.
    pub ds: f64,
    pub length: f64,
    /// Meridian parameter, radius, and fiber polar angle at the nodes.
    pub t_nodes: Vec<f64>,
    pub r: Vec<f64>,
    pub theta: Vec<f64>,
    /// Quadrature weights for `∫_M · dμ` (orbit volume included).
    pub weights: Vec<f64>,
    /// Cell-edge parameters `t(s_edge)`, length `n_s + 1`, for flows.
    pub t_edges: Vec<f64>,
    deriv: Deriv1D,
}

/// Area of the unit sphere `S^k`.
pub fn unit_sphere_area(k: usize) -> f64 {
    match k {
        0 => 2.0,
        1 => 2.0 * std::f64::consts::PI,
        k => 2.0 * std::f64::consts::PI * unit_sphere_area(k - 2) / (k as f64 - 1.0),
    }
}

const DENSE_PER_CELL: usize = 16;
const GL4_X: [f64; 2] = [0.3399810435848563, 0.8611363115940526];
const GL4_W: [f64; 2] = [0.6521451548625461, 0.3478548451374538];

impl RotationalSurface {
    pub fn build(
        ambient: Arc<AmbientSpace>,
        meridian: MeridianCurve,
        n_s: usize,
    ) -> Result<Self> {
        if n_s < 8 {
            return Err(GeomError::SurfaceBuild(
                "rotational surface needs at least 8 meridian nodes".into(),
            ));
        }
        if (ambient.epsilon - 1.0).abs() > 1e-12 {
            return Err(GeomError::SurfaceBuild(
                "rotational builder requires a unit round-sphere fiber (ε = 1)".into(),
            ));
        }

        let (t0, t1) = meridian.t_span;
        let speed = |t: f64| -> Result<f64> {
            let r = (meridian.r.f)(t);
            let p = ambient.eval_profile(r)?;
            let rp = (meridian.r.df)(t);
            let thp = (meridian.theta.df)(t);
            Ok((rp * rp + p.lambda * p.lambda * thp * thp).sqrt())
        };

        // dense cumulative arclength table
        let m = DENSE_PER_CELL * n_s;
        let dt = (t1 - t0) / m as f64;
        let mut t_dense = Vec::with_capacity(m + 1);
        let mut s_dense = Vec::with_capacity(m + 1);
        t_dense.push(t0);
        s_dense.push(0.0);
        for i in 0..m {
            let ta = t0 + i as f64 * dt;
            let mid = ta + 0.5 * dt;
            let hw = 0.5 * dt;
            let mut seg = 0.0;
            for k in 0..2 {
                seg += GL4_W[k] * (speed(mid + hw * GL4_X[k])? + speed(mid - hw * GL4_X[k])?);
            }
            seg *= hw;
            t_dense.push(ta + dt);
            s_dense.push(s_dense[i] + seg);
        }
        let length = *s_dense.last().unwrap();
        let ds = length / n_s as f64;

        // invert arclength at cell edges and node midpoints
        let invert = |s_target: f64| -> Result<f64> {
            if s_target <= 0.0 {
                return Ok(t0);
            }
            if s_target >= length {
                return Ok(t1);
            }
            let idx = s_dense.partition_point(|&s| s < s_target) - 1;
            let mut t = t_dense[idx]
                + (s_target - s_dense[idx]) / (s_dense[idx + 1] - s_dense[idx])
                    * (t_dense[idx + 1] - t_dense[idx]);
            for _ in 0..4 {
                // F(t) = s(t) - s_target via local Gauss panel from the knot
                let mut f = s_dense[idx] - s_target;
                let hw = 0.5 * (t - t_dense[idx]);
                let mid = t_dense[idx] + hw;
                for k in 0..2 {
                    f += hw * GL4_W[k] * (speed(mid + hw * GL4_X[k])? + speed(mid - hw * GL4_X[k])?);
                }
                t -= f / speed(t)?;
                t = t.clamp(t0, t1);
            }
            Ok(t)
        };

        let mut t_edges = Vec::with_capacity(n_s + 1);
        for j in 0..=n_s {
            t_edges.push(invert(j as f64 * ds)?);
        }
        let mut t_nodes = Vec::with_capacity(n_s);
        for j in 0..n_s {
            t_nodes.push(invert((j as f64 + 0.5) * ds)?);
        }

        let n = ambient.n;
        let orbit = unit_sphere_area(n - 1);
        let density = |t: f64| -> Result<f64> {
            let r = (meridian.r.f)(t);
            let th = (meridian.theta.f)(t);
            let p = ambient.eval_profile(r)?;
            Ok((p.lambda * th.sin()).powi(n as i32 - 1) * speed(t)?)
        };
        let mut weights = Vec::with_capacity(n_s);
        for j in 0..n_s {
            let (ta, tb) = (t_edges[j], t_edges[j + 1]);
            // two Gauss panels per cell keep the cell integral at round-off
            let mut w = 0.0;
            for half in 0..2 {
                let a = ta + 0.5 * (tb - ta) * half as f64;
                let hw = 0.25 * (tb - ta);
                let mid = a + hw;
                for k in 0..2 {
                    w += hw * GL4_W[k] * (density(mid + hw * GL4_X[k])? + density(mid - hw * GL4_X[k])?);
                }
            }
            weights.push(orbit * w);
        }

        let mut r = Vec::with_capacity(n_s);
        let mut theta = Vec::with_capacity(n_s);
        for &t in &t_nodes {
            r.push((meridian.r.f)(t));
            theta.push((meridian.theta.f)(t));
        }

        let surf = Self {
            deriv: if meridian.closed_loop {
                Deriv1D::periodic(n_s, ds)
            } else {
                Deriv1D::open(n_s, ds)
            },
            ambient,
            meridian,
            n_s,
            ds,
            length,
            t_nodes,
            r,
            theta,
            weights,
            t_edges,
        };
        surf.check_embedding()?;
        Ok(surf)
    }

    /// Stencil derivative along the meridian arclength.
    pub fn d_s(&self, field: &[f64]) -> Vec<f64> {
        self.deriv.apply(field)
    }

    /// Polyline self-intersection test in the meridian strip, plus the axis
    /// orthogonality condition for pole-to-pole meridians.
    fn check_embedding(&self) -> Result<()> {
        let (t0, t1) = self.meridian.t_span;
        if !self.meridian.closed_loop {
            for t in [t0, t1] {
                let rp = (self.meridian.r.df)(t);
                if rp.abs() > 1e-8 {
                    return Err(GeomError::SurfaceBuild(format!(
                        "meridian '{}' does not meet the axis orthogonally (r'({t}) = {rp:.3e})",
                        self.meridian.name
                    )));
                }
            }
        }
        let m = 256;
        let pts: Vec<(f64, f64)> = (0..=m)
            .map(|i| {
                let t = t0 + (t1 - t0) * i as f64 / m as f64;
                ((self.meridian.r.f)(t), (self.meridian.theta.f)(t))
            })
            .collect();
        for i in 0..m {
            for j in i + 2..m {
                if i == 0 && j == m - 1 && self.meridian.closed_loop {
                    continue;
                }
                if segments_cross(pts[i], pts[i + 1], pts[j], pts[j + 1]) {
                    return Err(GeomError::SurfaceBuild(format!(
                        "meridian '{}' self-intersects near segment pair ({i}, {j})",
                        self.meridian.name
                    )));
                }
            }
        }
        Ok(())
    }
}

fn segments_cross(a: (f64, f64), b: (f64, f64), c: (f64, f64), d: (f64, f64)) -> bool {
    let orient = |p: (f64, f64), q: (f64, f64), r: (f64, f64)| {
        (q.0 - p.0) * (r.1 - p.1) - (q.1 - p.1) * (r.0 - p.0)
    };
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::{AmbientKind, CatalogParams};
    use approx::assert_relative_eq;

    fn euclidean(n: usize) -> Arc<AmbientSpace> {
        Arc::new(
            AmbientSpace::from_catalog(AmbientKind::Euclidean, n, &CatalogParams::default())
                .unwrap(),
        )
    }

    #[test]
    fn sphere_area_is_exact() {
        let surf =
            RotationalSurface::build(euclidean(2), MeridianCurve::circle(1.5), 256).unwrap();
        let area: f64 = surf.weights.iter().sum();
        let expect = 4.0 * std::f64::consts::PI * 1.5 * 1.5;
        assert_relative_eq!(area, expect, epsilon = 1e-8);
    }

    #[test]
    fn three_sphere_area_in_r4() {
        // n = 3: unit S³ in R⁴ has volume 2π²
        let surf = RotationalSurface::build(euclidean(3), MeridianCurve::circle(1.0), 128).unwrap();
        let area: f64 = surf.weights.iter().sum();
        assert_relative_eq!(area, 2.0 * std::f64::consts::PI.powi(2), epsilon = 1e-8);
    }

    #[test]
    fn slice_area_matches_fiber_volume() {
        let amb = Arc::new(
            AmbientSpace::from_catalog(AmbientKind::Sphere, 2, &CatalogParams::default()).unwrap(),
        );
        let r0 = 0.8;
        let surf = RotationalSurface::build(amb, MeridianCurve::slice(r0), 128).unwrap();
        let area: f64 = surf.weights.iter().sum();
        let expect = 4.0 * std::f64::consts::PI * r0.sin() * r0.sin();
        assert_relative_eq!(area, expect, epsilon = 1e-10);
    }

    #[test]
    fn ellipsoid_closed_form_curvatures() {
        let amb = euclidean(2);
        let meridian = MeridianCurve::ellipse(2.0);
        // equator t = π/2: κ = (1/4, 1); pole limit: both → a = 2
        let (kmu, krot) =
            closed_form_curvatures(&amb, &meridian, std::f64::consts::FRAC_PI_2).unwrap();
        assert_relative_eq!(kmu, 0.25, epsilon = 1e-12);
        assert_relative_eq!(krot, 1.0, epsilon = 1e-12);
        let (kmu, krot) = closed_form_curvatures(&amb, &meridian, 1e-5).unwrap();
        assert_relative_eq!(kmu, 2.0, epsilon = 1e-8);
        assert_relative_eq!(krot, 2.0, epsilon = 1e-8);
    }

    #[test]
    fn slice_curvatures_are_lambda_ratio() {
        let amb = Arc::new(
            AmbientSpace::from_catalog(
                AmbientKind::DeSitterSchwarzschild,
                2,
                &CatalogParams {
                    m: 1.0,
                    ..Default::default()
                },
            )
            .unwrap(),
        );
        let r0 = 1.0;
        let p = amb.eval_profile(r0).unwrap();
        let expect = p.dlambda / p.lambda;
        let meridian = MeridianCurve::slice(r0);
        for t in [0.3, 1.2, 2.6] {
            let (kmu, krot) = closed_form_curvatures(&amb, &meridian, t).unwrap();
            assert_relative_eq!(kmu, expect, epsilon = 1e-12);
            assert_relative_eq!(krot, expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn ellipsoid_area_converges_to_closed_form() {
        // prolate spheroid a = 2: A = 2π(1 + a²/√(a²-1)·asin(√(a²-1)/a))
        let a: f64 = 2.0;
        let e = (a * a - 1.0).sqrt() / a;
        let expect = 2.0 * std::f64::consts::PI * (1.0 + a / e * e.asin());
        let surf = RotationalSurface::build(euclidean(2), MeridianCurve::ellipse(a), 256).unwrap();
        let area: f64 = surf.weights.iter().sum();
        assert_relative_eq!(area, expect, epsilon = 1e-9);
    }

    #[test]
    fn non_orthogonal_axis_crossing_is_rejected() {
        // r'(0) ≠ 0 breaks smoothness at the pole
        let bad = MeridianCurve {
            name: "bad".into(),
            r: CurveFn {
                f: Arc::new(|t: f64| 1.0 + 0.1 * t),
                df: Arc::new(|_| 0.1),
                d2f: Arc::new(|_| 0.0),
            },
            theta: CurveFn::identity(),
            t_span: (0.0, std::f64::consts::PI),
            closed_loop: false,
        };
        assert!(RotationalSurface::build(euclidean(2), bad, 64).is_err());
    }
}

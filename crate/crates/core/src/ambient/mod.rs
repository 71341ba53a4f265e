//! Warped product ambient spaces `M̄ = [0, r̄) ×_λ P^n` with metric
//! `ḡ = dr² + λ²(r) g^P`, where the fiber `(P, g^P)` is a closed manifold of
//! constant sectional curvature `ε`.
//!
//! Tangent vectors are handled through their radial/fiber split, with fiber
//! components expressed in a `g^P`-orthonormal frame (so a fiber frame vector
//! has `ḡ`-norm `λ`). The curvature tensor is evaluated in closed form from
//! the Kulkarni-Nomizu decomposition and, independently, by finite
//! differences of the metric in an explicit chart (see [`fd_oracle`]).

pub mod fd_oracle;
pub mod profile;

pub use profile::{BoundaryMode, ProfileValues, RealFn, WarpingProfile};

use std::sync::Arc;

use crate::error::{GeomError, Result};

/// A tangent vector split into a radial component and fiber components in a
/// `g^P`-orthonormal frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentDecomposition {
    pub radial: f64,
    pub fiber: Vec<f64>,
}

impl TangentDecomposition {
    pub fn new(radial: f64, fiber: Vec<f64>) -> Self {
        Self { radial, fiber }
    }

    /// Pure radial vector of unit coefficient in dimension `n`.
    pub fn radial_unit(n: usize) -> Self {
        Self::new(1.0, vec![0.0; n])
    }

    /// Fiber frame vector `e_a` (unit in `g^P`, so of `ḡ`-norm `λ`).
    pub fn fiber_unit(n: usize, a: usize) -> Self {
        let mut fiber = vec![0.0; n];
        fiber[a] = 1.0;
        Self::new(0.0, fiber)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::new(
            c * self.radial,
            self.fiber.iter().map(|x| c * x).collect(),
        )
    }
}

/// Parameters for the shape-function ambients in the catalog.
#[derive(Debug, Clone, Copy, Default)]
pub struct CatalogParams {
    pub m: f64,
    pub c: f64,
    pub q: f64,
    /// Radial cap for profiles with unbounded domain (0 picks a default).
    pub r_cap: f64,
}

/// The named ambients addressable from configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmbientKind {
    Euclidean,
    Sphere,
    Hyperbolic,
    DeSitterSchwarzschild,
    ReissnerNordstrom,
}

impl AmbientKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "euclidean" => Some(Self::Euclidean),
            "sphere" => Some(Self::Sphere),
            "hyperbolic" => Some(Self::Hyperbolic),
            "dss" => Some(Self::DeSitterSchwarzschild),
            "rn" => Some(Self::ReissnerNordstrom),
            _ => None,
        }
    }
}

/// A warped product ambient space.
pub struct AmbientSpace {
    pub profile: WarpingProfile,
    /// Fiber dimension `n ≥ 2`.
    pub n: usize,
    /// Constant sectional curvature of the fiber.
    pub epsilon: f64,
}

/// Outcome of a single ambient condition with its worst-case margin.
#[derive(Debug, Clone, Copy)]
pub struct ConditionCheck {
    pub holds: bool,
    pub margin: f64,
}

/// Report for the warping-function conditions (C1)-(C4).
#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub boundary: BoundaryMode,
    /// (C1) in the mode the profile declares: `λ'(0) = 0 ∧ λ''(0) > 0` for a
    /// horizon, or the cone-point alternative `λ(0) = 0 ∧ λ'(0) = 1`.
    pub c1: ConditionCheck,
    /// (C2) `λ' > 0` on the sampled grid.
    pub c2: ConditionCheck,
    /// (C3) `2λ''/λ - (n-1)(ε - λ'²)/λ²` non-decreasing; margin is the most
    /// negative successive difference.
    pub c3: ConditionCheck,
    /// (C4) strict: `λ''/λ + (ε - λ'²)/λ² > 0`.
    pub c4_strict: ConditionCheck,
    /// Weak variant of (C4): `λ''/λ + (ε - λ'²)/λ² ≥ 0`.
    pub c4_weak: ConditionCheck,
}

impl ConditionReport {
    pub fn all_strict(&self) -> bool {
        self.c1.holds && self.c2.holds && self.c3.holds && self.c4_strict.holds
    }
}

const C1_TOL: f64 = 1e-9;

impl AmbientSpace {
    pub fn new(profile: WarpingProfile, n: usize, epsilon: f64) -> Result<Self> {
        if n < 2 {
            return Err(GeomError::SurfaceBuild(format!(
                "fiber dimension n = {n} must be ≥ 2"
            )));
        }
        Ok(Self {
            profile,
            n,
            epsilon,
        })
    }

    /// Builds a catalog ambient by name. All catalog fibers are unit round
    /// spheres (`ε = 1`).
    pub fn from_catalog(kind: AmbientKind, n: usize, params: &CatalogParams) -> Result<Self> {
        let r_cap = if params.r_cap > 0.0 { params.r_cap } else { 8.0 };
        let profile = match kind {
            AmbientKind::Euclidean => WarpingProfile::euclidean(r_cap),
            AmbientKind::Sphere => WarpingProfile::sphere(),
            AmbientKind::Hyperbolic => WarpingProfile::hyperbolic(r_cap),
            AmbientKind::DeSitterSchwarzschild => {
                WarpingProfile::desitter_schwarzschild(n, params.m, params.c, r_cap)?
            }
            AmbientKind::ReissnerNordstrom => {
                WarpingProfile::reissner_nordstrom(n, params.m, params.q, r_cap)?
            }
        };
        Self::new(profile, n, 1.0)
    }

    pub fn name(&self) -> &str {
        self.profile.name()
    }

    /// `(λ, λ', λ'')` at `r`.
    pub fn eval_profile(&self, r: f64) -> Result<ProfileValues> {
        self.profile.eval(r)
    }

    /// The `ḡ` inner product of two decomposed vectors at radius `r`.
    pub fn metric(&self, r: f64, u: &TangentDecomposition, v: &TangentDecomposition) -> Result<f64> {
        let p = self.profile.eval(r)?;
        Ok(metric_with_lambda(p.lambda, u, v))
    }

    /// Levi-Civita connection `∇̄_u v` in the radial/fiber split, treating the
    /// fiber frame as geodesic at the evaluation point (the `∇^P` terms vanish
    /// pointwise):
    ///
    /// `∇̄_u v = (λ'/λ)(u_r V + v_r U) - (λ'/λ) ḡ(U, V) ∂_r`.
    pub fn connection_coeffs(
        &self,
        r: f64,
        u: &TangentDecomposition,
        v: &TangentDecomposition,
    ) -> Result<TangentDecomposition> {
        let p = self.profile.eval(r)?;
        if p.lambda <= 0.0 {
            return Err(GeomError::LambdaZero { r });
        }
        let ratio = p.dlambda / p.lambda;
        let fiber_dot: f64 = u.fiber.iter().zip(&v.fiber).map(|(a, b)| a * b).sum();
        let radial = -p.lambda * p.dlambda * fiber_dot;
        let fiber = u
            .fiber
            .iter()
            .zip(&v.fiber)
            .map(|(ua, va)| ratio * (u.radial * va + v.radial * ua))
            .collect();
        Ok(TangentDecomposition::new(radial, fiber))
    }

    /// The (0,4) curvature tensor from the closed-form decomposition
    ///
    /// `Rm̄ = ((ε - λ'²)/(2λ²)) ḡ∧ḡ - (λ''/λ + (ε - λ'²)/λ²) ḡ∧dr²`,
    ///
    /// with `∧` the Kulkarni-Nomizu product. Sign convention: for orthonormal
    /// `X, Y` the sectional curvature is `Rm̄(X, Y, X, Y)`.
    pub fn riemann_closed_form(
        &self,
        r: f64,
        x1: &TangentDecomposition,
        x2: &TangentDecomposition,
        x3: &TangentDecomposition,
        x4: &TangentDecomposition,
    ) -> Result<f64> {
        let p = self.profile.eval(r)?;
        if p.lambda <= 0.0 {
            return Err(GeomError::LambdaZero { r });
        }
        let l2 = p.lambda * p.lambda;
        let a = (self.epsilon - p.dlambda * p.dlambda) / (2.0 * l2);
        let b = p.d2lambda / p.lambda + (self.epsilon - p.dlambda * p.dlambda) / l2;
        let g = |x: &TangentDecomposition, y: &TangentDecomposition| metric_with_lambda(p.lambda, x, y);
        let dr2 = |x: &TangentDecomposition, y: &TangentDecomposition| x.radial * y.radial;
        Ok(a * kulkarni_nomizu(&g, &g, x1, x2, x3, x4)
            - b * kulkarni_nomizu(&g, &dr2, x1, x2, x3, x4))
    }

    /// Sectional curvature of the plane spanned by `x, y` at radius `r`.
    pub fn sectional_curvature(
        &self,
        r: f64,
        x: &TangentDecomposition,
        y: &TangentDecomposition,
    ) -> Result<f64> {
        let num = self.riemann_closed_form(r, x, y, x, y)?;
        let gxx = self.metric(r, x, x)?;
        let gyy = self.metric(r, y, y)?;
        let gxy = self.metric(r, x, y)?;
        let denom = gxx * gyy - gxy * gxy;
        Ok(num / denom)
    }

    /// Ricci tensor of the warped product:
    ///
    /// `Ric̄(∂_r, ∂_r) = -n λ''/λ`, `Ric̄(∂_r, V) = 0`,
    /// `Ric̄(V, U) = Ric^P(V, U) - (λ''/λ + (n-1) λ'²/λ²) ḡ(V, U)`
    /// with `Ric^P = (n-1) ε g^P`.
    pub fn ricci(
        &self,
        r: f64,
        u: &TangentDecomposition,
        v: &TangentDecomposition,
    ) -> Result<f64> {
        let p = self.profile.eval(r)?;
        if p.lambda <= 0.0 {
            return Err(GeomError::LambdaZero { r });
        }
        let n = self.n as f64;
        let l2 = p.lambda * p.lambda;
        let fiber_dot: f64 = u.fiber.iter().zip(&v.fiber).map(|(a, b)| a * b).sum();
        let radial_part = -n * p.d2lambda / p.lambda * u.radial * v.radial;
        let fiber_coeff = (n - 1.0) * self.epsilon
            - (p.d2lambda / p.lambda + (n - 1.0) * p.dlambda * p.dlambda / l2) * l2;
        Ok(radial_part + fiber_coeff * fiber_dot)
    }

    /// Evaluates (C1)-(C4) plus the weak variant of (C4) over a radial grid.
    pub fn check_conditions(&self, r_grid: &[f64]) -> Result<ConditionReport> {
        if r_grid.is_empty() {
            return Err(GeomError::CheckPrecondition(
                "check_conditions needs a non-empty radial grid".into(),
            ));
        }
        let boundary = self.profile.boundary_mode();
        let origin = self.profile.eval(0.0)?;
        let c1 = match boundary {
            BoundaryMode::Horizon => {
                let holds = origin.dlambda.abs() <= C1_TOL && origin.d2lambda > 0.0;
                let margin = if origin.dlambda.abs() <= C1_TOL {
                    origin.d2lambda
                } else {
                    -origin.dlambda.abs()
                };
                ConditionCheck { holds, margin }
            }
            BoundaryMode::ConePoint => {
                let defect = origin.lambda.abs().max((origin.dlambda - 1.0).abs());
                ConditionCheck {
                    holds: defect <= C1_TOL,
                    margin: -defect,
                }
            }
        };

        let n = self.n as f64;
        let mut c2_margin = f64::INFINITY;
        let mut c4_margin = f64::INFINITY;
        let mut c3_values = Vec::with_capacity(r_grid.len());
        for &r in r_grid {
            let p = self.profile.eval(r)?;
            let l2 = p.lambda * p.lambda;
            c2_margin = c2_margin.min(p.dlambda);
            let c4 = p.d2lambda / p.lambda + (self.epsilon - p.dlambda * p.dlambda) / l2;
            c4_margin = c4_margin.min(c4);
            c3_values.push(
                2.0 * p.d2lambda / p.lambda
                    - (n - 1.0) * (self.epsilon - p.dlambda * p.dlambda) / l2,
            );
        }
        let mut c3_margin = f64::INFINITY;
        for w in c3_values.windows(2) {
            c3_margin = c3_margin.min(w[1] - w[0]);
        }
        if c3_values.len() == 1 {
            c3_margin = 0.0;
        }

        Ok(ConditionReport {
            boundary,
            c1,
            c2: ConditionCheck {
                holds: c2_margin > 0.0,
                margin: c2_margin,
            },
            c3: ConditionCheck {
                holds: c3_margin >= -1e-10,
                margin: c3_margin,
            },
            c4_strict: ConditionCheck {
                holds: c4_margin > 0.0,
                margin: c4_margin,
            },
            c4_weak: ConditionCheck {
                holds: c4_margin >= -1e-10,
                margin: c4_margin,
            },
        })
    }
}

fn metric_with_lambda(lambda: f64, u: &TangentDecomposition, v: &TangentDecomposition) -> f64 {
    let fiber_dot: f64 = u.fiber.iter().zip(&v.fiber).map(|(a, b)| a * b).sum();
    u.radial * v.radial + lambda * lambda * fiber_dot
}

/// Kulkarni-Nomizu product of two symmetric bilinear forms:
///
/// `(h∧w)(X₁,X₂,X₃,X₄) = h(X₁,X₃)w(X₂,X₄) + h(X₂,X₄)w(X₁,X₃)
///                      - h(X₁,X₄)w(X₂,X₃) - h(X₂,X₃)w(X₁,X₄)`.
pub fn kulkarni_nomizu(
    h: &dyn Fn(&TangentDecomposition, &TangentDecomposition) -> f64,
    w: &dyn Fn(&TangentDecomposition, &TangentDecomposition) -> f64,
    x1: &TangentDecomposition,
    x2: &TangentDecomposition,
    x3: &TangentDecomposition,
    x4: &TangentDecomposition,
) -> f64 {
    h(x1, x3) * w(x2, x4) + h(x2, x4) * w(x1, x3) - h(x1, x4) * w(x2, x3) - h(x2, x3) * w(x1, x4)
}

/// Euclidean dot product as a bilinear form closure, for Kulkarni-Nomizu
/// tests against a fixed metric value of `λ`.
pub fn metric_form(lambda: f64) -> impl Fn(&TangentDecomposition, &TangentDecomposition) -> f64 {
    move |u, v| metric_with_lambda(lambda, u, v)
}

/// Convenience: the radial square form `dr²`.
pub fn dr_squared_form() -> impl Fn(&TangentDecomposition, &TangentDecomposition) -> f64 {
    |u: &TangentDecomposition, v: &TangentDecomposition| u.radial * v.radial
}

/// A ready-made closure for `λ` evaluation shared by builders.
pub fn lambda_fn(space: &Arc<AmbientSpace>) -> impl Fn(f64) -> Result<f64> + '_ {
    move |r| Ok(space.profile.eval(r)?.lambda)
}

//! Independent finite-difference oracle for the ambient curvature tensor.
//!
//! The warped metric is written out in an explicit chart and differentiated
//! numerically: Christoffel symbols from central differences of the metric
//! components, then the curvature from central differences of the Christoffel
//! symbols. Nothing here shares code with the closed-form curvature path.
//!
//! The fiber chart is the conformal model of constant curvature `ε`:
//! `g^P = f(y)² δ_ij` on a ball in `R^n` with `f(y) = 1/(1 + (ε/4)|y|²)`,
//! so the full chart is `x = (r, y_1, …, y_n)` with
//! `ḡ = dr² + λ(r)² f(y)² δ`.

use crate::ambient::{AmbientSpace, TangentDecomposition};
use crate::error::{GeomError, Result};
use nalgebra::DMatrix;

/// Conformal factor of the fiber chart; errors near the chart boundary.
fn conformal_factor(epsilon: f64, y: &[f64]) -> Result<f64> {
    let y2: f64 = y.iter().map(|v| v * v).sum();
    let denom = 1.0 + 0.25 * epsilon * y2;
    if denom < 0.1 {
        return Err(GeomError::BadStep {
            h: 0.0,
            reason: format!("chart singularity: conformal denominator {denom}"),
        });
    }
    Ok(1.0 / denom)
}

/// Metric components `ḡ_{ab}` at a chart point `x = (r, y…)`.
pub fn chart_metric(space: &AmbientSpace, x: &[f64]) -> Result<DMatrix<f64>> {
    let d = space.n + 1;
    assert_eq!(x.len(), d);
    let lambda = space.profile.eval(x[0])?.lambda;
    let f = conformal_factor(space.epsilon, &x[1..])?;
    let mut g = DMatrix::zeros(d, d);
    g[(0, 0)] = 1.0;
    let lf2 = (lambda * f) * (lambda * f);
    for i in 1..d {
        g[(i, i)] = lf2;
    }
    Ok(g)
}

/// Christoffel symbols `Γ^a_{bc}` at `x` from central differences of the
/// metric with step `h`. Flattened as `[a][b][c]`.
fn christoffel_fd(space: &AmbientSpace, x: &[f64], h: f64) -> Result<Vec<f64>> {
    let d = x.len();
    let g = chart_metric(space, x)?;
    let ginv = g
        .clone()
        .try_inverse()
        .ok_or(GeomError::DegenerateMetric { node: 0, det: 0.0 })?;

    // dg[b] = ∂_b g
    let mut dg = Vec::with_capacity(d);
    for b in 0..d {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[b] += h;
        xm[b] -= h;
        let gp = chart_metric(space, &xp)?;
        let gm = chart_metric(space, &xm)?;
        dg.push((gp - gm) / (2.0 * h));
    }

    let mut gamma = vec![0.0; d * d * d];
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                let mut s = 0.0;
                for e in 0..d {
                    s += ginv[(a, e)] * (dg[b][(e, c)] + dg[c][(e, b)] - dg[e][(b, c)]);
                }
                gamma[(a * d + b) * d + c] = 0.5 * s;
            }
        }
    }
    Ok(gamma)
}

/// Full (0,4) curvature tensor at `x` by second differences of the
/// Christoffel symbols, flattened as `[a][b][c][d]` in the convention
/// `Rm(X₁,X₂,X₃,X₄) = ⟨R(X₁,X₂)X₄, X₃⟩` (sectional curvature is
/// `Rm(X,Y,X,Y)` for orthonormal `X, Y`).
pub fn riemann_fd_tensor(space: &AmbientSpace, x: &[f64], h: f64) -> Result<Vec<f64>> {
    if h <= 0.0 {
        return Err(GeomError::BadStep {
            h,
            reason: "step must be positive".into(),
        });
    }
    if x[0] - 2.0 * h < 0.0 || x[0] + 2.0 * h >= space.profile.r_max() {
        return Err(GeomError::OutOfDomain {
            r: x[0],
            r_max: space.profile.r_max(),
        });
    }
    let d = x.len();
    let gamma0 = christoffel_fd(space, x, h)?;
    let g = chart_metric(space, x)?;

    // dgamma[a] = ∂_a Γ
    let mut dgamma = Vec::with_capacity(d);
    for a in 0..d {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[a] += h;
        xm[a] -= h;
        let gp = christoffel_fd(space, &xp, h)?;
        let gm = christoffel_fd(space, &xm, h)?;
        let der: Vec<f64> = gp
            .iter()
            .zip(&gm)
            .map(|(p, m)| (p - m) / (2.0 * h))
            .collect();
        dgamma.push(der);
    }

    let gam = |a: usize, b: usize, c: usize| gamma0[(a * d + b) * d + c];
    let dgam = |a: usize, e: usize, b: usize, c: usize| dgamma[a][(e * d + b) * d + c];

    // R^e_{cab} = ∂_a Γ^e_{bc} - ∂_b Γ^e_{ac} + Γ^e_{af}Γ^f_{bc} - Γ^e_{bf}Γ^f_{ac}
    let mut rm = vec![0.0; d * d * d * d];
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for dd in 0..d {
                    let mut up = 0.0;
                    for e in 0..d {
                        let mut r_e = dgam(a, e, b, dd) - dgam(b, e, a, dd);
                        for f in 0..d {
                            r_e += gam(e, a, f) * gam(f, b, dd) - gam(e, b, f) * gam(f, a, dd);
                        }
                        up += g[(c, e)] * r_e;
                    }
                    rm[((a * d + b) * d + c) * d + dd] = up;
                }
            }
        }
    }
    Ok(rm)
}

/// Converts a radial/fiber decomposition to chart components at `x`.
pub fn decomposition_to_chart(
    space: &AmbientSpace,
    x: &[f64],
    v: &TangentDecomposition,
) -> Result<Vec<f64>> {
    let f = conformal_factor(space.epsilon, &x[1..])?;
    let mut out = Vec::with_capacity(space.n + 1);
    out.push(v.radial);
    for a in 0..space.n {
        out.push(v.fiber[a] / f);
    }
    Ok(out)
}

/// Curvature value `Rm̄(X₁,X₂,X₃,X₄)` by finite differences at the chart
/// point `coords`, with step `h`. Used only as an oracle against the closed
/// form.
pub fn riemann_finite_difference(
    space: &AmbientSpace,
    coords: &[f64],
    args: [&TangentDecomposition; 4],
    h: f64,
) -> Result<f64> {
    let rm = riemann_fd_tensor(space, coords, h)?;
    let d = space.n + 1;
    let xs: Vec<Vec<f64>> = args
        .iter()
        .map(|v| decomposition_to_chart(space, coords, v))
        .collect::<Result<_>>()?;
    let mut total = 0.0;
    for a in 0..d {
        if xs[0][a] == 0.0 {
            continue;
        }
        for b in 0..d {
            if xs[1][b] == 0.0 {
                continue;
            }
            for c in 0..d {
                for dd in 0..d {
                    total += rm[((a * d + b) * d + c) * d + dd]
                        * xs[0][a]
                        * xs[1][b]
                        * xs[2][c]
                        * xs[3][dd];
                }
            }
        }
    }
    Ok(total)
}

/// Same evaluation with a three-step Richardson consistency guard: the
/// `h → h/2 → h/4` differences must contract roughly like O(h²) unless the
/// value already sits at the round-off floor; otherwise the step is rejected
/// as cancellation-dominated.
pub fn riemann_fd_checked(
    space: &AmbientSpace,
    coords: &[f64],
    args: [&TangentDecomposition; 4],
    h: f64,
) -> Result<f64> {
    let v1 = riemann_finite_difference(space, coords, args, h)?;
    let v2 = riemann_finite_difference(space, coords, args, h / 2.0)?;
    let v4 = riemann_finite_difference(space, coords, args, h / 4.0)?;
    let d1 = (v1 - v2).abs();
    let d2 = (v2 - v4).abs();
    let scale = v1.abs().max(v2.abs()).max(1.0);
    let floor = 1e-11 * scale;
    if d1 > floor && d2 > 0.75 * d1 {
        return Err(GeomError::BadStep {
            h,
            reason: format!(
                "Richardson consistency failed: |Δ(h)| = {d1:.3e}, |Δ(h/2)| = {d2:.3e}"
            ),
        });
    }
    Ok(v2)
}

/// A generic chart point at radius `r`, away from coordinate degeneracies.
pub fn generic_chart_point(space: &AmbientSpace, r: f64) -> Vec<f64> {
    let mut x = vec![r];
    for a in 0..space.n {
        x.push(0.08 + 0.05 * a as f64);
    }
    x
}

/// Closed-form curvature contracted with the chart coordinate basis at `x`,
/// flattened like [`riemann_fd_tensor`]. This is the comparison target for
/// the oracle.
pub fn riemann_closed_tensor(space: &AmbientSpace, x: &[f64]) -> Result<Vec<f64>> {
    let d = space.n + 1;
    let f = conformal_factor(space.epsilon, &x[1..])?;
    let mut basis = Vec::with_capacity(d);
    basis.push(TangentDecomposition::radial_unit(space.n));
    for a in 0..space.n {
        basis.push(TangentDecomposition::fiber_unit(space.n, a).scale(f));
    }
    let mut rm = vec![0.0; d * d * d * d];
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for dd in 0..d {
                    rm[((a * d + b) * d + c) * d + dd] = space.riemann_closed_form(
                        x[0], &basis[a], &basis[b], &basis[c], &basis[dd],
                    )?;
                }
            }
        }
    }
    Ok(rm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::{AmbientKind, CatalogParams};

    fn ambient(kind: AmbientKind, n: usize) -> AmbientSpace {
        let params = CatalogParams {
            m: 1.0,
            q: 0.4,
            ..Default::default()
        };
        AmbientSpace::from_catalog(kind, n, &params).unwrap()
    }

    #[test]
    fn euclidean_is_flat_to_truncation() {
        let amb = ambient(AmbientKind::Euclidean, 2);
        let x = generic_chart_point(&amb, 1.3);
        let rm = riemann_fd_tensor(&amb, &x, 5e-4).unwrap();
        let worst = rm.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(worst < 1e-6, "flat chart gave max |Rm| = {worst:.3e}");
    }

    #[test]
    fn sphere_sectional_curvature_via_fd() {
        let amb = ambient(AmbientKind::Sphere, 2);
        let x = generic_chart_point(&amb, 0.9);
        let er = TangentDecomposition::radial_unit(2);
        let e0 = TangentDecomposition::fiber_unit(2, 0);
        let fd = riemann_finite_difference(&amb, &x, [&er, &e0, &er, &e0], 5e-4).unwrap();
        let closed = amb.riemann_closed_form(0.9, &er, &e0, &er, &e0).unwrap();
        assert!((fd - closed).abs() < 1e-6 * closed.abs().max(1.0));
        // orthonormal section: K = Rm(X,Y,X,Y)/|X∧Y|² = 1
        let lam = amb.eval_profile(0.9).unwrap().lambda;
        let k = fd / (lam * lam);
        assert!((k - 1.0).abs() < 1e-6, "K = {k}");
    }

    #[test]
    fn dss_mixed_component_matches_closed_form_with_richardson() {
        let amb = ambient(AmbientKind::DeSitterSchwarzschild, 2);
        let r = 1.0;
        let x = generic_chart_point(&amb, r);
        let er = TangentDecomposition::radial_unit(2);
        let y = TangentDecomposition::fiber_unit(2, 1);
        let closed = amb.riemann_closed_form(r, &er, &y, &er, &y).unwrap();
        // -λ''/λ ḡ(Y,Y) is what the radial-fiber slot must equal
        let p = amb.eval_profile(r).unwrap();
        let expect = -p.d2lambda / p.lambda * amb.metric(r, &y, &y).unwrap();
        assert!((closed - expect).abs() < 1e-12);

        let e1 = riemann_finite_difference(&amb, &x, [&er, &y, &er, &y], 1e-3).unwrap() - closed;
        let e2 =
            riemann_finite_difference(&amb, &x, [&er, &y, &er, &y], 5e-4).unwrap() - closed;
        let ratio = e1.abs() / e2.abs();
        assert!(
            (ratio - 4.0).abs() < 1.2,
            "Richardson ratio {ratio} (errors {e1:.3e}, {e2:.3e})"
        );
    }

    #[test]
    fn tiny_step_is_rejected() {
        let amb = ambient(AmbientKind::Sphere, 2);
        let x = generic_chart_point(&amb, 0.9);
        let er = TangentDecomposition::radial_unit(2);
        let e0 = TangentDecomposition::fiber_unit(2, 0);
        let res = riemann_fd_checked(&amb, &x, [&er, &e0, &er, &e0], 3e-8);
        assert!(res.is_err(), "cancellation-dominated step must be rejected");
    }
}

//! Radial graphs over the round 2-sphere fiber: `x(θ, φ) = (ρ(θ, φ), p(θ, φ))`
//! on a latitude-longitude grid offset half a step from the poles.
//!
//! Star-shapedness `⟨∂_r, ν⟩ > 0` holds by construction. Quadrature is
//! trapezoidal in `φ` (spectral on the periodic direction) with per-cell
//! exact integration of the `sin θ` measure in `θ`, so the total weight of a
//! round slice telescopes to its exact area.

use std::sync::Arc;

use crate::ambient::AmbientSpace;
use crate::error::{GeomError, Result};
use crate::surface::stencil::{GridStencil, Parity};

pub type SphereFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Discrete radial graph over `S²` (fiber dimension `n = 2`, `ε = 1`).
pub struct GraphSurface {
    pub ambient: Arc<AmbientSpace>,
    pub n_theta: usize,
    pub n_phi: usize,
    pub dtheta: f64,
    pub dphi: f64,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    /// Radial value per node, row-major `idx = i·n_phi + j`.
    pub rho: Vec<f64>,
    pub rho_fn: SphereFn,
    /// Stencil derivatives of the embedding, fixed at build time.
    pub rho_theta: Vec<f64>,
    pub rho_phi: Vec<f64>,
    /// Quadrature weights realizing `∫_M · dμ`.
    pub weights: Vec<f64>,
    pub(crate) stencil: GridStencil,
}

impl GraphSurface {
    pub fn build(
        ambient: Arc<AmbientSpace>,
        rho_fn: SphereFn,
        n_theta: usize,
        n_phi: usize,
    ) -> Result<Self> {
        if ambient.n != 2 {
            return Err(GeomError::SurfaceBuild(
                "radial graphs require fiber dimension n = 2".into(),
            ));
        }
        if (ambient.epsilon - 1.0).abs() > 1e-12 {
            return Err(GeomError::SurfaceBuild(
                "radial graphs require a unit round-sphere fiber (ε = 1)".into(),
            ));
        }
        if n_theta < 8 || n_phi < 8 || n_phi % 2 != 0 {
            return Err(GeomError::SurfaceBuild(
                "graph grid needs n_theta ≥ 8 and even n_phi ≥ 8".into(),
            ));
        }
        let dtheta = std::f64::consts::PI / n_theta as f64;
        let dphi = 2.0 * std::f64::consts::PI / n_phi as f64;
        let theta: Vec<f64> = (0..n_theta).map(|i| (i as f64 + 0.5) * dtheta).collect();
        let phi: Vec<f64> = (0..n_phi).map(|j| j as f64 * dphi).collect();

        let r_max = ambient.profile.r_max();
        let mut rho = vec![0.0; n_theta * n_phi];
        for i in 0..n_theta {
            for j in 0..n_phi {
                let r = rho_fn(theta[i], phi[j]);
                if !(r > 0.0 && r < r_max) {
                    return Err(GeomError::SurfaceBuild(format!(
                        "graph radius ρ({:.3}, {:.3}) = {r} outside (0, {r_max})",
                        theta[i], phi[j]
                    )));
                }
                rho[i * n_phi + j] = r;
            }
        }

        let stencil = GridStencil::new(n_theta, n_phi, dtheta, dphi);
        let rho_theta = stencil.d_theta(&rho, Parity::Even);
        let rho_phi = stencil.d_phi(&rho);

        // w = √det g · (2 sin(Δθ/2)) · Δφ: midpoint in θ with the sin measure
        // integrated exactly per cell, trapezoid in φ
        let theta_cell = 2.0 * (0.5 * dtheta).sin();
        let mut weights = vec![0.0; n_theta * n_phi];
        for i in 0..n_theta {
            for j in 0..n_phi {
                let idx = i * n_phi + j;
                let lam = ambient.profile.eval(rho[idx])?.lambda;
                let (rt, rp) = (rho_theta[idx], rho_phi[idx]);
                let sin_t = theta[i].sin();
                let g11 = rt * rt + lam * lam;
                let g12 = rt * rp;
                let g22 = rp * rp + lam * lam * sin_t * sin_t;
                let det = g11 * g22 - g12 * g12;
                if det <= 0.0 {
                    return Err(GeomError::DegenerateMetric { node: idx, det });
                }
                // √det g / sin θ sampled at the midpoint times ∫_cell sin θ dθ;
                // the sin θ factors cancel, leaving the corrected cell width
                weights[idx] = det.sqrt() * theta_cell * dphi;
            }
        }

        Ok(Self {
            ambient,
            n_theta,
            n_phi,
            dtheta,
            dphi,
            theta,
            phi,
            rho,
            rho_fn,
            rho_theta,
            rho_phi,
            weights,
            stencil,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn d_theta(&self, f: &[f64], parity: Parity) -> Vec<f64> {
        self.stencil.d_theta(f, parity)
    }

    pub fn d_phi(&self, f: &[f64]) -> Vec<f64> {
        self.stencil.d_phi(f)
    }
}

/// Associated Legendre function `P_l^m(x)` without the Condon-Shortley
/// phase; `(1 - x²)^{m/2}` makes `P_l^m(cos θ) cos(mφ)` smooth on the sphere.
pub fn assoc_legendre(l: u32, m: u32, x: f64) -> f64 {
    if m > l {
        return 0.0;
    }
    let mut pmm = 1.0;
    if m > 0 {
        let somx2 = ((1.0 - x) * (1.0 + x)).max(0.0).sqrt();
        let mut fact = 1.0;
        for _ in 0..m {
            pmm *= fact * somx2;
            fact += 2.0;
        }
    }
    if l == m {
        return pmm;
    }
    let mut pmmp1 = x * (2.0 * m as f64 + 1.0) * pmm;
    if l == m + 1 {
        return pmmp1;
    }
    let mut pll = 0.0;
    for ll in (m + 2)..=l {
        let llf = ll as f64;
        pll = (x * (2.0 * llf - 1.0) * pmmp1 - (llf + m as f64 - 1.0) * pmm) / (llf - m as f64);
        pmm = pmmp1;
        pmmp1 = pll;
    }
    pll
}

/// Real surface-harmonic-style basis function `P_l^m(cos θ) cos(m φ)`.
pub fn harmonic(l: u32, m: u32, theta: f64, phi: f64) -> f64 {
    assoc_legendre(l, m, theta.cos()) * (m as f64 * phi).cos()
}

/// Builds `ρ(θ, φ) = r₀ + Σ amp · P_l^m(cos θ) cos(m φ)` from a mode list.
pub fn rho_from_modes(r0: f64, modes: &[(u32, u32, f64)]) -> SphereFn {
    let modes = modes.to_vec();
    Arc::new(move |theta, phi| {
        let mut r = r0;
        for &(l, m, amp) in &modes {
            r += amp * harmonic(l, m, theta, phi);
        }
        r
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::{AmbientKind, CatalogParams};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn euclidean() -> Arc<AmbientSpace> {
        Arc::new(
            AmbientSpace::from_catalog(AmbientKind::Euclidean, 2, &CatalogParams::default())
                .unwrap(),
        )
    }

    #[test]
    fn constant_graph_area_is_exact() {
        let surf = GraphSurface::build(euclidean(), Arc::new(|_, _| 1.0), 32, 64).unwrap();
        let area: f64 = surf.weights.iter().sum();
        assert_relative_eq!(area, 4.0 * PI, epsilon = 1e-12);
    }

    #[test]
    fn perturbed_graph_area_self_converges() {
        let rho = rho_from_modes(1.0, &[(2, 0, 0.1)]);
        let area = |n: usize| {
            let s = GraphSurface::build(euclidean(), rho.clone(), n, 2 * n).unwrap();
            s.weights.iter().sum::<f64>()
        };
        let (a1, a2, a3) = (area(24), area(48), area(96));
        let ref_area = a3 + (a3 - a2) / 3.0;
        let e1 = (a1 - ref_area).abs();
        let e2 = (a2 - ref_area).abs();
        assert!(e1 / e2 > 3.0, "area convergence ratio {}", e1 / e2);
        // doubled-grid area agrees with the fine reference within 1e-6
        assert!((a2 - ref_area).abs() < 1e-6);
    }

    #[test]
    fn legendre_values() {
        // P_2^0(x) = (3x² - 1)/2
        assert_relative_eq!(assoc_legendre(2, 0, 0.3), (3.0 * 0.09 - 1.0) / 2.0);
        // P_2^2(x) = 3(1 - x²)
        assert_relative_eq!(assoc_legendre(2, 2, 0.3), 3.0 * (1.0 - 0.09));
        // P_1^1(x) = √(1-x²)
        assert_relative_eq!(assoc_legendre(1, 1, 0.3), (1.0f64 - 0.09).sqrt());
    }

    #[test]
    fn out_of_band_rho_is_rejected() {
        let amb = Arc::new(
            AmbientSpace::from_catalog(AmbientKind::Sphere, 2, &CatalogParams::default()).unwrap(),
        );
        // ρ exceeds r̄ = π near the equator
        let rho: SphereFn = Arc::new(|theta: f64, _| 2.0 + 1.5 * theta.sin());
        assert!(GraphSurface::build(amb, rho, 16, 32).is_err());
    }
}

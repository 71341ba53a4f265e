//! Discrete hypersurfaces in warped product ambients and their extrinsic
//! geometry: induced metric, unit normal, second fundamental form, principal
//! curvatures, support function `u = ⟨λ∂_r, ν⟩`, the potential
//! `η = Λ(r)` with `Λ' = λ`, tangential gradients, and quadrature.
//!
//! The sign convention fixes `ν` so that `u > 0` on star-shaped surfaces;
//! spheres in Euclidean space then have `κ > 0` and `H₁ > 0`.

pub mod graph;
pub mod rotational;
pub mod stencil;

pub use graph::{rho_from_modes, GraphSurface, SphereFn};
pub use rotational::{closed_form_curvatures, unit_sphere_area, MeridianCurve, RotationalSurface};

use std::sync::Arc;

use crate::ambient::{AmbientSpace, TangentDecomposition};
use crate::error::{GeomError, Result};
use crate::symfunc;
use stencil::Parity;

/// Per-node extrinsic quantities of a discrete hypersurface.
///
/// Coordinate-indexed tensors (`g`, `h`, `dr_coeff`) are stored in the
/// surface's own chart: one arclength direction for rotational surfaces,
/// `(θ, φ)` for graphs. Principal curvatures are sorted ascending with the
/// frame permuted to match.
pub struct ExtrinsicData {
    /// Hypersurface dimension `n`.
    pub n: usize,
    /// Number of coordinate directions carried per node (1 or 2).
    pub dim: usize,
    pub g: Vec<[f64; 4]>,
    pub h: Vec<[f64; 4]>,
    pub nu: Vec<TangentDecomposition>,
    pub kappa: Vec<Vec<f64>>,
    /// `ḡ`-orthonormal principal frame matching `kappa`.
    pub frame: Vec<Vec<TangentDecomposition>>,
    /// Support function `u = ⟨λ∂_r, ν⟩`.
    pub u: Vec<f64>,
    /// `η = Λ(r)`, the pullback of `∫₀^r λ`.
    pub eta: Vec<f64>,
    /// `⟨x_i, ∂_r⟩` per coordinate direction.
    pub dr_coeff: Vec<[f64; 2]>,
    /// `|∂_r^⊤|²`.
    pub dr_tan_norm2: Vec<f64>,
    /// `σ_0 … σ_n` per node.
    pub sigma: Vec<Vec<f64>>,
    /// Rotational surfaces: analytically derived `κ` (sorted) per node.
    pub closed_form_kappa: Option<Vec<Vec<f64>>>,
    pub r: Vec<f64>,
    pub lambda: Vec<f64>,
    pub dlambda: Vec<f64>,
}

impl ExtrinsicData {
    /// `H_k` at a node.
    pub fn hk(&self, node: usize, k: usize) -> f64 {
        self.sigma[node][k] / symfunc::binomial(self.n, k)
    }

    /// The field `H_k` over all nodes.
    pub fn hk_field(&self, k: usize) -> Vec<f64> {
        (0..self.sigma.len()).map(|i| self.hk(i, k)).collect()
    }
}

/// A discrete closed hypersurface.
pub enum DiscreteHypersurface {
    Rotational(RotationalSurface),
    Graph(GraphSurface),
}

/// Result of a tangential gradient: coordinate derivative, raised
/// components, pairing with `∂_r`, and squared norm, all per node.
pub struct FieldGradient {
    pub d: Vec<[f64; 2]>,
    pub up: Vec<[f64; 2]>,
    pub dot_dr: Vec<f64>,
    pub norm2: Vec<f64>,
}

impl DiscreteHypersurface {
    pub fn ambient(&self) -> &Arc<AmbientSpace> {
        match self {
            Self::Rotational(s) => &s.ambient,
            Self::Graph(s) => &s.ambient,
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Self::Rotational(s) => s.n_s,
            Self::Graph(s) => s.node_count(),
        }
    }

    /// Resolution label `N` of the grid.
    pub fn grid_n(&self) -> usize {
        match self {
            Self::Rotational(s) => s.n_s,
            Self::Graph(s) => s.n_theta,
        }
    }

    pub fn weights(&self) -> &[f64] {
        match self {
            Self::Rotational(s) => &s.weights,
            Self::Graph(s) => &s.weights,
        }
    }

    /// `Σ w·field`, the quadrature realization of `∫_M field dμ`.
    pub fn integrate(&self, field: &[f64]) -> f64 {
        self.weights()
            .iter()
            .zip(field)
            .map(|(w, f)| w * f)
            .sum()
    }

    pub fn area(&self) -> f64 {
        self.weights().iter().sum()
    }

    /// Computes all extrinsic data. Pure function of the surface; checks
    /// typically call it once and share the result.
    pub fn extrinsic_data(&self) -> Result<ExtrinsicData> {
        match self {
            Self::Rotational(s) => rotational_extrinsic(s),
            Self::Graph(s) => graph_extrinsic(s),
        }
    }

    /// Tangential gradient `∇f = g^{ij} ∂_j f ∂_i x` of a nodal field.
    pub fn scalar_gradient(&self, data: &ExtrinsicData, field: &[f64]) -> FieldGradient {
        match self {
            Self::Rotational(s) => {
                let df = s.d_s(field);
                let mut out = FieldGradient {
                    d: Vec::with_capacity(s.n_s),
                    up: Vec::with_capacity(s.n_s),
                    dot_dr: Vec::with_capacity(s.n_s),
                    norm2: Vec::with_capacity(s.n_s),
                };
                for j in 0..s.n_s {
                    let gss = data.g[j][0];
                    let up = df[j] / gss;
                    out.d.push([df[j], 0.0]);
                    out.up.push([up, 0.0]);
                    out.dot_dr.push(up * data.dr_coeff[j][0]);
                    out.norm2.push(up * df[j]);
                }
                out
            }
            Self::Graph(s) => {
                let dft = s.d_theta(field, Parity::Even);
                let dfp = s.d_phi(field);
                let m = s.node_count();
                let mut out = FieldGradient {
                    d: Vec::with_capacity(m),
                    up: Vec::with_capacity(m),
                    dot_dr: Vec::with_capacity(m),
                    norm2: Vec::with_capacity(m),
                };
                for idx in 0..m {
                    let [g11, g12, _, g22] = data.g[idx];
                    let det = g11 * g22 - g12 * g12;
                    let up1 = (g22 * dft[idx] - g12 * dfp[idx]) / det;
                    let up2 = (-g12 * dft[idx] + g11 * dfp[idx]) / det;
                    out.d.push([dft[idx], dfp[idx]]);
                    out.up.push([up1, up2]);
                    out.dot_dr
                        .push(up1 * data.dr_coeff[idx][0] + up2 * data.dr_coeff[idx][1]);
                    out.norm2.push(up1 * dft[idx] + up2 * dfp[idx]);
                }
                out
            }
        }
    }

    /// Laplace-Beltrami operator as divergence of the metric-weighted
    /// gradient, sharing the one discretization ledger with
    /// [`Self::scalar_gradient`].
    pub fn laplacian(&self, data: &ExtrinsicData, field: &[f64]) -> Vec<f64> {
        match self {
            Self::Rotational(s) => {
                let df = s.d_s(field);
                let n = s.ambient.n as i32;
                let mut flux = Vec::with_capacity(s.n_s);
                let mut dens = Vec::with_capacity(s.n_s);
                for j in 0..s.n_s {
                    let gss = data.g[j][0];
                    let jac = gss.sqrt() * (data.lambda[j] * s.theta[j].sin()).powi(n - 1);
                    dens.push(jac);
                    flux.push(jac * df[j] / gss);
                }
                let dflux = s.d_s(&flux);
                (0..s.n_s).map(|j| dflux[j] / dens[j]).collect()
            }
            Self::Graph(s) => {
                let dft = s.d_theta(field, Parity::Even);
                let dfp = s.d_phi(field);
                let m = s.node_count();
                let mut flux_t = vec![0.0; m];
                let mut flux_p = vec![0.0; m];
                let mut dens = vec![0.0; m];
                for idx in 0..m {
                    let [g11, g12, _, g22] = data.g[idx];
                    let det = g11 * g22 - g12 * g12;
                    let sq = det.sqrt();
                    dens[idx] = sq;
                    flux_t[idx] = sq * (g22 * dft[idx] - g12 * dfp[idx]) / det;
                    flux_p[idx] = sq * (-g12 * dft[idx] + g11 * dfp[idx]) / det;
                }
                let d1 = s.d_theta(&flux_t, Parity::Odd);
                let d2 = s.d_phi(&flux_p);
                (0..m).map(|i| (d1[i] + d2[i]) / dens[i]).collect()
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Rotational(s) => s.meridian.name.clone(),
            Self::Graph(s) => format!("graph({}x{})", s.n_theta, s.n_phi),
        }
    }

    /// Plain-text node dump: `theta phi r weight kappa_1 .. kappa_n u`.
    pub fn dump_nodes(&self, data: &ExtrinsicData) -> String {
        let mut out = String::new();
        let (thetas, phis): (Vec<f64>, Vec<f64>) = match self {
            Self::Rotational(s) => (s.theta.clone(), vec![0.0; s.n_s]),
            Self::Graph(s) => {
                let mut t = Vec::with_capacity(s.node_count());
                let mut p = Vec::with_capacity(s.node_count());
                for i in 0..s.n_theta {
                    for j in 0..s.n_phi {
                        t.push(s.theta[i]);
                        p.push(s.phi[j]);
                    }
                }
                (t, p)
            }
        };
        for idx in 0..self.node_count() {
            out.push_str(&format!(
                "{:.12e} {:.12e} {:.12e} {:.12e}",
                thetas[idx],
                phis[idx],
                data.r[idx],
                self.weights()[idx]
            ));
            for k in &data.kappa[idx] {
                out.push_str(&format!(" {k:.12e}"));
            }
            out.push_str(&format!(" {:.12e}\n", data.u[idx]));
        }
        out
    }
}

/// Named surface constructions shared by tests and the CLI.
#[derive(Debug, Clone)]
pub enum SurfaceSpec {
    Slice { r0: f64 },
    GeodesicSphere { radius: f64 },
    Ellipsoid { a: f64 },
    PerturbedSlice { r0: f64, amplitude: f64, mode: u32 },
    Graph { r0: f64, modes: Vec<(u32, u32, f64)> },
}

impl SurfaceSpec {
    pub fn label(&self) -> String {
        match self {
            Self::Slice { r0 } => format!("slice_r{r0}"),
            Self::GeodesicSphere { radius } => format!("sphere_R{radius}"),
            Self::Ellipsoid { a } => format!("ellipsoid_a{a}"),
            Self::PerturbedSlice { r0, amplitude, mode } => {
                format!("pslice_r{r0}_A{amplitude}_m{mode}")
            }
            Self::Graph { r0, modes } => {
                let mut s = format!("graph_r{r0}");
                for (l, m, amp) in modes {
                    s.push_str(&format!("_Y{l}{m}x{amp}"));
                }
                s
            }
        }
    }

    /// Builds the surface at resolution `n` (meridian nodes, or `n × 2n`
    /// latitude-longitude nodes for graphs).
    pub fn build(&self, ambient: Arc<AmbientSpace>, n: usize) -> Result<DiscreteHypersurface> {
        Ok(match self {
            Self::Slice { r0 } => DiscreteHypersurface::Rotational(RotationalSurface::build(
                ambient,
                MeridianCurve::slice(*r0),
                n,
            )?),
            Self::GeodesicSphere { radius } => DiscreteHypersurface::Rotational(
                RotationalSurface::build(ambient, MeridianCurve::circle(*radius), n)?,
            ),
            Self::Ellipsoid { a } => DiscreteHypersurface::Rotational(RotationalSurface::build(
                ambient,
                MeridianCurve::ellipse(*a),
                n,
            )?),
            Self::PerturbedSlice { r0, amplitude, mode } => {
                DiscreteHypersurface::Rotational(RotationalSurface::build(
                    ambient,
                    MeridianCurve::perturbed_slice(*r0, *amplitude, *mode),
                    n,
                )?)
            }
            Self::Graph { r0, modes } => DiscreteHypersurface::Graph(GraphSurface::build(
                ambient,
                rho_from_modes(*r0, modes),
                n,
                2 * n,
            )?),
        })
    }
}

/// Umbilic deficit `Σ_i (κ_i - σ₁/n)²` per node, plus its maximum.
pub fn umbilic_deficit(data: &ExtrinsicData) -> (Vec<f64>, f64) {
    let n = data.n as f64;
    let mut field = Vec::with_capacity(data.kappa.len());
    let mut worst: f64 = 0.0;
    for kappa in &data.kappa {
        let mean = kappa.iter().sum::<f64>() / n;
        let d: f64 = kappa.iter().map(|k| (k - mean) * (k - mean)).sum();
        worst = worst.max(d);
        field.push(d);
    }
    (field, worst)
}

/// One hypothesis outcome with its worst-case margin.
#[derive(Debug, Clone, Copy)]
pub struct Flag {
    pub holds: bool,
    pub margin: f64,
}

/// Star-shapedness, convexity cones, and the gradient condition
/// `⟨∇H_k, ∂_r⟩ ≤ tol` of the umbilicity theorems.
#[derive(Debug, Clone, Copy)]
pub struct HypothesisFlags {
    pub star_shaped: Flag,
    pub k_convex: Flag,
    pub strictly_convex: Flag,
    /// Margin is `-max ⟨∇H_k, ∂_r⟩`; the flag holds when the maximum stays
    /// below the supplied tolerance.
    pub grad_condition: Flag,
}

pub fn hypothesis_flags(
    surf: &DiscreteHypersurface,
    data: &ExtrinsicData,
    k: usize,
    grad_tol: f64,
) -> HypothesisFlags {
    let mut star = f64::INFINITY;
    let mut cone = f64::INFINITY;
    let mut convex = f64::INFINITY;
    for idx in 0..data.kappa.len() {
        star = star.min(data.nu[idx].radial);
        for i in 1..=k.min(data.n) {
            cone = cone.min(data.sigma[idx][i]);
        }
        convex = convex.min(data.kappa[idx][0]);
    }
    let hk = data.hk_field(k);
    let grad = surf.scalar_gradient(data, &hk);
    let max_dot = grad.dot_dr.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    HypothesisFlags {
        star_shaped: Flag {
            holds: star > 0.0,
            margin: star,
        },
        k_convex: Flag {
            holds: cone > 0.0,
            margin: cone,
        },
        strictly_convex: Flag {
            holds: convex > 0.0,
            margin: convex,
        },
        grad_condition: Flag {
            holds: max_dot <= grad_tol,
            margin: -max_dot,
        },
    }
}

/// Max nodewise residuals of the first-order identities
/// `∇η = λ∂_r^⊤`, `∇u = h(λ∂_r^⊤, ·)`, and `Δη = nλ' - σ₁u`.
#[derive(Debug, Clone, Copy)]
pub struct GradientIdentityResiduals {
    pub grad_eta: f64,
    pub grad_u: f64,
    pub laplace_eta: f64,
}

pub fn gradient_identity_check(
    surf: &DiscreteHypersurface,
    data: &ExtrinsicData,
) -> GradientIdentityResiduals {
    let m = data.kappa.len();
    let dim = data.dim;
    let grad_eta = surf.scalar_gradient(data, &data.eta);
    let grad_u = surf.scalar_gradient(data, &data.u);
    let lap_eta = surf.laplacian(data, &data.eta);

    let mut res_eta: f64 = 0.0;
    let mut res_u: f64 = 0.0;
    let mut res_lap: f64 = 0.0;
    for idx in 0..m {
        let g = &data.g[idx];
        let gmat = |i: usize, j: usize| g[i * 2 + j];
        // raised components of ∂_r^⊤
        let mut t_up = [0.0; 2];
        if dim == 1 {
            t_up[0] = data.dr_coeff[idx][0] / g[0];
        } else {
            let det = g[0] * g[3] - g[1] * g[2];
            t_up[0] = (g[3] * data.dr_coeff[idx][0] - g[1] * data.dr_coeff[idx][1]) / det;
            t_up[1] = (-g[2] * data.dr_coeff[idx][0] + g[0] * data.dr_coeff[idx][1]) / det;
        }
        let lam = data.lambda[idx];

        // (a) ∇η - λ ∂_r^⊤
        let mut d = [0.0; 2];
        for i in 0..dim {
            d[i] = grad_eta.up[idx][i] - lam * t_up[i];
        }
        let norm2: f64 = (0..dim)
            .flat_map(|i| (0..dim).map(move |j| (i, j)))
            .map(|(i, j)| if dim == 1 { g[0] * d[i] * d[j] } else { gmat(i, j) * d[i] * d[j] })
            .sum();
        res_eta = res_eta.max(norm2.max(0.0).sqrt());

        // (b) ∇u - h(λ∂_r^⊤, ·)^♯: (W v)^i with v = λ ∂_r^⊤
        let mut wv = [0.0; 2];
        if dim == 1 {
            wv[0] = data.h[idx][0] / g[0] * (lam * t_up[0]);
        } else {
            let det = g[0] * g[3] - g[1] * g[2];
            let hv = [
                data.h[idx][0] * lam * t_up[0] + data.h[idx][1] * lam * t_up[1],
                data.h[idx][2] * lam * t_up[0] + data.h[idx][3] * lam * t_up[1],
            ];
            wv[0] = (g[3] * hv[0] - g[1] * hv[1]) / det;
            wv[1] = (-g[2] * hv[0] + g[0] * hv[1]) / det;
        }
        let mut du = [0.0; 2];
        for i in 0..dim {
            du[i] = grad_u.up[idx][i] - wv[i];
        }
        let norm2: f64 = (0..dim)
            .flat_map(|i| (0..dim).map(move |j| (i, j)))
            .map(|(i, j)| if dim == 1 { g[0] * du[i] * du[j] } else { gmat(i, j) * du[i] * du[j] })
            .sum();
        res_u = res_u.max(norm2.max(0.0).sqrt());

        // (c) Δη - (nλ' - σ₁ u)
        let rhs = data.n as f64 * data.dlambda[idx] - data.sigma[idx][1] * data.u[idx];
        res_lap = res_lap.max((lap_eta[idx] - rhs).abs());
    }
    GradientIdentityResiduals {
        grad_eta: res_eta,
        grad_u: res_u,
        laplace_eta: res_lap,
    }
}

/// Symmetric generalized eigenproblem `h w = κ g w` for 2x2 blocks via the
/// Cholesky reduction; eigenvectors come back `g`-orthonormal.
fn generalized_eigen_2x2(h: [f64; 4], g: [f64; 4]) -> ([f64; 2], [[f64; 2]; 2]) {
    let l11 = g[0].sqrt();
    let l21 = g[1] / l11;
    let l22 = (g[3] - l21 * l21).sqrt();

    let b11 = h[0] / l11;
    let b12 = h[1] / l11;
    let b21 = (h[2] - l21 * h[0] / l11) / l22;
    let b22 = (h[3] - l21 * h[1] / l11) / l22;

    let a11 = b11 / l11;
    let a12 = -b11 * l21 / (l11 * l22) + b12 / l22;
    let a22 = -b21 * l21 / (l11 * l22) + b22 / l22;

    let mean = 0.5 * (a11 + a22);
    let half_diff = 0.5 * (a11 - a22);
    let disc = (half_diff * half_diff + a12 * a12).sqrt();
    let k_lo = mean - disc;
    let k_hi = mean + disc;

    let eigvec = |k: f64| -> [f64; 2] {
        let v1 = [a12, k - a11];
        let v2 = [k - a22, a12];
        let (v, n2) = {
            let n1 = v1[0] * v1[0] + v1[1] * v1[1];
            let n2 = v2[0] * v2[0] + v2[1] * v2[1];
            if n1 >= n2 {
                (v1, n1)
            } else {
                (v2, n2)
            }
        };
        if n2 < 1e-30 {
            // umbilic block: any direction is principal
            if k == k_lo {
                [1.0, 0.0]
            } else {
                [0.0, 1.0]
            }
        } else {
            let inv = n2.sqrt().recip();
            [v[0] * inv, v[1] * inv]
        }
    };
    let y_lo = eigvec(k_lo);
    let y_hi = eigvec(k_hi);
    // back-substitute w = L^{-T} y
    let back = |y: [f64; 2]| {
        let w2 = y[1] / l22;
        let w1 = y[0] / l11 - l21 * w2 / l11;
        [w1, w2]
    };
    ([k_lo, k_hi], [back(y_lo), back(y_hi)])
}

fn rotational_extrinsic(s: &RotationalSurface) -> Result<ExtrinsicData> {
    let n = s.ambient.n;
    let m = s.n_s;
    let rp = s.d_s(&s.r);
    let thp = s.d_s(&s.theta);

    let mut lam = vec![0.0; m];
    let mut dlam = vec![0.0; m];
    let mut d2lam = vec![0.0; m];
    for j in 0..m {
        let p = s.ambient.eval_profile(s.r[j])?;
        lam[j] = p.lambda;
        dlam[j] = p.dlambda;
        d2lam[j] = p.d2lambda;
    }

    let mut gss = vec![0.0; m];
    let mut nur = vec![0.0; m];
    let mut nut = vec![0.0; m];
    for j in 0..m {
        let g = rp[j] * rp[j] + lam[j] * lam[j] * thp[j] * thp[j];
        if g <= 0.0 {
            return Err(GeomError::DegenerateMetric { node: j, det: g });
        }
        gss[j] = g;
        let v = g.sqrt();
        nur[j] = lam[j] * thp[j] / v;
        nut[j] = -rp[j] / (lam[j] * v);
    }
    let dnur = s.d_s(&nur);
    let dnut = s.d_s(&nut);

    let mut data = ExtrinsicData {
        n,
        dim: 1,
        g: Vec::with_capacity(m),
        h: Vec::with_capacity(m),
        nu: Vec::with_capacity(m),
        kappa: Vec::with_capacity(m),
        frame: Vec::with_capacity(m),
        u: Vec::with_capacity(m),
        eta: Vec::with_capacity(m),
        dr_coeff: Vec::with_capacity(m),
        dr_tan_norm2: Vec::with_capacity(m),
        sigma: Vec::with_capacity(m),
        closed_form_kappa: Some(Vec::with_capacity(m)),
        r: s.r.clone(),
        lambda: lam.clone(),
        dlambda: dlam.clone(),
    };

    for j in 0..m {
        let ratio = dlam[j] / lam[j];
        // covariant derivative of ν along the meridian velocity x' = (r', θ')
        let cov_r = dnur[j] - lam[j] * dlam[j] * thp[j] * nut[j];
        let cov_t = dnut[j] + ratio * (rp[j] * nut[j] + thp[j] * nur[j]);
        let h_ss = rp[j] * cov_r + lam[j] * lam[j] * thp[j] * cov_t;
        let kappa_mu = h_ss / gss[j];
        let kappa_rot = nur[j] * ratio + nut[j] / s.theta[j].tan();

        let v = gss[j].sqrt();
        let mut e_t = TangentDecomposition::new(rp[j] / v, vec![0.0; n]);
        e_t.fiber[0] = thp[j] / v;

        let mut kappa: Vec<f64> = Vec::with_capacity(n);
        let mut frame: Vec<TangentDecomposition> = Vec::with_capacity(n);
        kappa.push(kappa_mu);
        frame.push(e_t);
        for a in 1..n {
            kappa.push(kappa_rot);
            let mut e = TangentDecomposition::new(0.0, vec![0.0; n]);
            e.fiber[a] = 1.0 / lam[j];
            frame.push(e);
        }
        sort_principal(&mut kappa, &mut frame);

        let mut nu = TangentDecomposition::new(nur[j], vec![0.0; n]);
        nu.fiber[0] = nut[j];

        let (cf_mu, cf_rot) = closed_form_curvatures(&s.ambient, &s.meridian, s.t_nodes[j])?;
        let mut cf = vec![cf_rot; n];
        cf[0] = cf_mu;
        cf.sort_by(|a, b| a.partial_cmp(b).unwrap());

        data.sigma.push(symfunc::sigma_all(&kappa, n));
        data.g.push([gss[j], 0.0, 0.0, 0.0]);
        data.h.push([kappa_mu * gss[j], 0.0, 0.0, 0.0]);
        data.nu.push(nu);
        data.kappa.push(kappa);
        data.frame.push(frame);
        data.u.push(lam[j] * nur[j]);
        data.eta.push(s.ambient.profile.lambda_integral(s.r[j])?);
        data.dr_coeff.push([rp[j], 0.0]);
        data.dr_tan_norm2.push(rp[j] * rp[j] / gss[j]);
        data.closed_form_kappa.as_mut().unwrap().push(cf);
    }
    Ok(data)
}

fn graph_extrinsic(s: &GraphSurface) -> Result<ExtrinsicData> {
    let m = s.node_count();
    let n = 2usize;

    let mut lam = vec![0.0; m];
    let mut dlam = vec![0.0; m];
    for idx in 0..m {
        let p = s.ambient.eval_profile(s.rho[idx])?;
        lam[idx] = p.lambda;
        dlam[idx] = p.dlambda;
    }

    let mut nur = vec![0.0; m];
    let mut av = vec![0.0; m];
    let mut bv = vec![0.0; m];
    let mut gmat = vec![[0.0; 4]; m];
    for i in 0..s.n_theta {
        let sin_t = s.theta[i].sin();
        for j in 0..s.n_phi {
            let idx = i * s.n_phi + j;
            let (rt, rp) = (s.rho_theta[idx], s.rho_phi[idx]);
            let l2 = lam[idx] * lam[idx];
            let g11 = rt * rt + l2;
            let g12 = rt * rp;
            let g22 = rp * rp + l2 * sin_t * sin_t;
            gmat[idx] = [g11, g12, g12, g22];
            let det = g11 * g22 - g12 * g12;
            if det <= 0.0 {
                return Err(GeomError::DegenerateMetric { node: idx, det });
            }
            let norm = (1.0 + rt * rt / l2 + rp * rp / (l2 * sin_t * sin_t)).sqrt();
            nur[idx] = 1.0 / norm;
            av[idx] = -nur[idx] * rt / l2;
            bv[idx] = -nur[idx] * rp / (l2 * sin_t * sin_t);
        }
    }

    let dnur_t = s.d_theta(&nur, Parity::Even);
    let da_t = s.d_theta(&av, Parity::Odd);
    let dnur_p = s.d_phi(&nur);
    let da_p = s.d_phi(&av);
    let db_p = s.d_phi(&bv);

    let mut data = ExtrinsicData {
        n,
        dim: 2,
        g: gmat,
        h: Vec::with_capacity(m),
        nu: Vec::with_capacity(m),
        kappa: Vec::with_capacity(m),
        frame: Vec::with_capacity(m),
        u: Vec::with_capacity(m),
        eta: Vec::with_capacity(m),
        dr_coeff: Vec::with_capacity(m),
        dr_tan_norm2: Vec::with_capacity(m),
        sigma: Vec::with_capacity(m),
        closed_form_kappa: None,
        r: s.rho.clone(),
        lambda: lam.clone(),
        dlambda: dlam.clone(),
    };

    for i in 0..s.n_theta {
        let sin_t = s.theta[i].sin();
        let cos_t = s.theta[i].cos();
        let cot_t = cos_t / sin_t;
        for j in 0..s.n_phi {
            let idx = i * s.n_phi + j;
            let (rt, rp) = (s.rho_theta[idx], s.rho_phi[idx]);
            let l = lam[idx];
            let dl = dlam[idx];
            let ratio = dl / l;
            let l2 = l * l;

            // ∇̄ν along x_θ = (ρ_θ, 1, 0); the φ-slot never pairs with x_θ
            let cov_t_r = dnur_t[idx] - l * dl * av[idx];
            let cov_t_a = da_t[idx] + ratio * (rt * av[idx] + nur[idx]);
            // ∇̄ν along x_φ = (ρ_φ, 0, 1)
            let cov_p_r = dnur_p[idx] - l * dl * sin_t * sin_t * bv[idx];
            let cov_p_a = da_p[idx] + ratio * rp * av[idx] - sin_t * cos_t * bv[idx];
            let cov_p_b = db_p[idx] + ratio * (rp * bv[idx] + nur[idx]) + cot_t * av[idx];

            let h11 = rt * cov_t_r + l2 * cov_t_a;
            let h12 = rt * cov_p_r + l2 * cov_p_a;
            let h22 = rp * cov_p_r + l2 * sin_t * sin_t * cov_p_b;
            let hm = [h11, h12, h12, h22];

            let (kappa2, w) = generalized_eigen_2x2(hm, data.g[idx]);
            let kappa = vec![kappa2[0], kappa2[1]];
            let frame: Vec<TangentDecomposition> = w
                .iter()
                .map(|wv| {
                    TangentDecomposition::new(
                        wv[0] * rt + wv[1] * rp,
                        vec![wv[0], wv[1] * sin_t],
                    )
                })
                .collect();

            let nu = TangentDecomposition::new(nur[idx], vec![av[idx], bv[idx] * sin_t]);

            let det = data.g[idx][0] * data.g[idx][3] - data.g[idx][1] * data.g[idx][1];
            let t_up1 = (data.g[idx][3] * rt - data.g[idx][1] * rp) / det;
            let t_up2 = (-data.g[idx][2] * rt + data.g[idx][0] * rp) / det;

            data.sigma.push(symfunc::sigma_all(&kappa, n));
            data.h.push(hm);
            data.nu.push(nu);
            data.kappa.push(kappa);
            data.frame.push(frame);
            data.u.push(l * nur[idx]);
            data.eta.push(s.ambient.profile.lambda_integral(s.rho[idx])?);
            data.dr_coeff.push([rt, rp]);
            data.dr_tan_norm2.push(t_up1 * rt + t_up2 * rp);
        }
    }
    Ok(data)
}

fn sort_principal(kappa: &mut [f64], frame: &mut [TangentDecomposition]) {
    let mut order: Vec<usize> = (0..kappa.len()).collect();
    order.sort_by(|&a, &b| kappa[a].partial_cmp(&kappa[b]).unwrap());
    let kc = kappa.to_vec();
    let fc = frame.to_vec();
    for (dst, &src) in order.iter().enumerate() {
        kappa[dst] = kc[src];
        frame[dst] = fc[src].clone();
    }
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

    fn sphere_ambient() -> Arc<AmbientSpace> {
        Arc::new(
            AmbientSpace::from_catalog(AmbientKind::Sphere, 2, &CatalogParams::default()).unwrap(),
        )
    }

    #[test]
    fn round_sphere_extrinsic() {
        let radius = 2.0;
        let surf = SurfaceSpec::GeodesicSphere { radius }
            .build(euclidean(2), 64)
            .unwrap();
        let data = surf.extrinsic_data().unwrap();
        for idx in 0..surf.node_count() {
            for k in &data.kappa[idx] {
                assert_relative_eq!(*k, 1.0 / radius, epsilon = 1e-10);
            }
            assert_relative_eq!(data.u[idx], radius, epsilon = 1e-12);
            assert_relative_eq!(data.hk(idx, 1), 1.0 / radius, epsilon = 1e-10);
            // |∂_r^⊤|² + ⟨∂_r, ν⟩² = 1
            assert_relative_eq!(
                data.dr_tan_norm2[idx] + data.nu[idx].radial.powi(2),
                1.0,
                epsilon = 1e-10
            );
        }
        let (_, worst) = umbilic_deficit(&data);
        assert!(worst < 1e-20, "sphere deficit {worst}");
    }

    #[test]
    fn slice_extrinsic_in_curved_ambient() {
        let amb = sphere_ambient();
        let r0 = 0.8;
        let surf = SurfaceSpec::Slice { r0 }.build(amb.clone(), 64).unwrap();
        let data = surf.extrinsic_data().unwrap();
        let expect = r0.cos() / r0.sin();
        for idx in 0..surf.node_count() {
            for k in &data.kappa[idx] {
                assert_relative_eq!(*k, expect, epsilon = 1e-11);
            }
            assert_relative_eq!(data.u[idx], r0.sin(), epsilon = 1e-13);
        }
        let (_, worst) = umbilic_deficit(&data);
        assert!(worst < 1e-20);
    }

    #[test]
    fn graph_slice_matches_rotational_slice() {
        let amb = euclidean(2);
        let surf = SurfaceSpec::Graph {
            r0: 1.0,
            modes: vec![],
        }
        .build(amb, 24)
        .unwrap();
        let data = surf.extrinsic_data().unwrap();
        for idx in 0..surf.node_count() {
            assert_relative_eq!(data.kappa[idx][0], 1.0, epsilon = 1e-11);
            assert_relative_eq!(data.kappa[idx][1], 1.0, epsilon = 1e-11);
            assert_relative_eq!(data.u[idx], 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn ellipsoid_mesh_matches_closed_form() {
        let surf = SurfaceSpec::Ellipsoid { a: 2.0 }
            .build(euclidean(2), 512)
            .unwrap();
        let data = surf.extrinsic_data().unwrap();
        let cf = data.closed_form_kappa.as_ref().unwrap();
        let mut worst: f64 = 0.0;
        for idx in 0..surf.node_count() {
            for (a, b) in data.kappa[idx].iter().zip(&cf[idx]) {
                worst = worst.max((a - b).abs());
            }
        }
        assert!(worst < 1e-6, "mesh vs closed-form κ deviates by {worst:.3e}");
    }

    #[test]
    fn ellipsoid_equator_values() {
        // equator: κ = (1/4, 1), H = 5/8, deficit 9/32
        let surf = SurfaceSpec::Ellipsoid { a: 2.0 }
            .build(euclidean(2), 512)
            .unwrap();
        let data = surf.extrinsic_data().unwrap();
        // node nearest the equator (r minimal = 1)
        let idx = (0..surf.node_count())
            .min_by(|&a, &b| data.r[a].partial_cmp(&data.r[b]).unwrap())
            .unwrap();
        assert_relative_eq!(data.kappa[idx][0], 0.25, epsilon = 1e-4);
        assert_relative_eq!(data.kappa[idx][1], 1.0, epsilon = 1e-4);
        let (field, _) = umbilic_deficit(&data);
        assert_relative_eq!(field[idx], 9.0 / 32.0, epsilon = 1e-3);
    }

    #[test]
    fn eigen_consistency_on_perturbed_graph() {
        let surf = SurfaceSpec::Graph {
            r0: 1.0,
            modes: vec![(2, 0, 0.05), (3, 2, 0.02)],
        }
        .build(euclidean(2), 48)
        .unwrap();
        let data = surf.extrinsic_data().unwrap();
        for idx in 0..surf.node_count() {
            let g = data.g[idx];
            let h = data.h[idx];
            let scale = h.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-30);
            for k in &data.kappa[idx] {
                let d = (h[0] - k * g[0]) * (h[3] - k * g[3]) - (h[1] - k * g[1]).powi(2);
                assert!(
                    d.abs() <= 1e-9 * scale.powi(2).max(scale),
                    "det(h - κg) = {d:.3e} at node {idx}"
                );
            }
            // normal is ḡ-unit and ḡ-orthogonal to the frame
            let amb = surf.ambient();
            let r = data.r[idx];
            let nn = amb.metric(r, &data.nu[idx], &data.nu[idx]).unwrap();
            assert_relative_eq!(nn, 1.0, epsilon = 1e-12);
            for e in &data.frame[idx] {
                let ne = amb.metric(r, &data.nu[idx], e).unwrap();
                assert!(ne.abs() < 1e-9, "⟨ν, e⟩ = {ne:.3e}");
                let ee = amb.metric(r, e, e).unwrap();
                assert_relative_eq!(ee, 1.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn gradient_identities_on_sphere_and_slice() {
        let surf = SurfaceSpec::GeodesicSphere { radius: 1.0 }
            .build(euclidean(2), 256)
            .unwrap();
        let data = surf.extrinsic_data().unwrap();
        let res = gradient_identity_check(&surf, &data);
        assert!(res.grad_eta < 1e-8, "∇η residual {}", res.grad_eta);
        assert!(res.grad_u < 1e-8, "∇u residual {}", res.grad_u);
        assert!(res.laplace_eta < 1e-8, "Δη residual {}", res.laplace_eta);

        // slice: ∂_r^⊤ = 0, ∇η = 0, ∇u = 0 exactly
        let amb = sphere_ambient();
        let surf = SurfaceSpec::Slice { r0: 0.9 }.build(amb, 64).unwrap();
        let data = surf.extrinsic_data().unwrap();
        let res = gradient_identity_check(&surf, &data);
        assert!(res.grad_eta < 1e-12);
        assert!(res.grad_u < 1e-12);
        assert!(res.laplace_eta < 1e-10);
    }

    #[test]
    fn gradient_identities_converge_on_perturbed_graph() {
        let spec = SurfaceSpec::Graph {
            r0: 1.0,
            modes: vec![(2, 0, 0.05)],
        };
        let res_at = |n: usize| {
            let surf = spec.build(euclidean(2), n).unwrap();
            let data = surf.extrinsic_data().unwrap();
            let r = gradient_identity_check(&surf, &data);
            r.grad_eta.max(r.grad_u).max(r.laplace_eta)
        };
        let (r1, r2) = (res_at(32), res_at(64));
        assert!(r1 / r2 > 3.0, "residual ratio {} (r1={r1:.3e}, r2={r2:.3e})", r1 / r2);
    }

    #[test]
    fn constant_field_has_zero_gradient() {
        let surf = SurfaceSpec::Graph {
            r0: 1.0,
            modes: vec![(2, 1, 0.07)],
        }
        .build(euclidean(2), 24)
        .unwrap();
        let data = surf.extrinsic_data().unwrap();
        let field = vec![3.7; surf.node_count()];
        let grad = surf.scalar_gradient(&data, &field);
        for idx in 0..surf.node_count() {
            assert!(grad.norm2[idx].abs() < 1e-20);
            assert!(grad.dot_dr[idx].abs() < 1e-12);
        }
    }

    #[test]
    fn star_shaped_orientation_u_positive() {
        let specs = [
            SurfaceSpec::Ellipsoid { a: 2.0 },
            SurfaceSpec::PerturbedSlice {
                r0: 1.0,
                amplitude: 0.08,
                mode: 3,
            },
            SurfaceSpec::Graph {
                r0: 1.0,
                modes: vec![(2, 0, 0.05), (2, 2, 0.03)],
            },
        ];
        for spec in &specs {
            let surf = spec.build(euclidean(2), 48).unwrap();
            let data = surf.extrinsic_data().unwrap();
            assert!(
                data.u.iter().all(|&u| u > 0.0),
                "u must be positive on {}",
                spec.label()
            );
        }
    }

    #[test]
    fn hypothesis_flags_on_sphere_and_ellipsoid() {
        let sphere = SurfaceSpec::GeodesicSphere { radius: 1.0 }
            .build(euclidean(2), 64)
            .unwrap();
        let data = sphere.extrinsic_data().unwrap();
        let flags = hypothesis_flags(&sphere, &data, 1, 1e-8);
        assert!(flags.star_shaped.holds);
        assert!(flags.strictly_convex.holds);
        assert!(flags.grad_condition.holds);

        // ellipsoid: star-shaped but ⟨∇H, ∂_r⟩ > 0 somewhere
        let ell = SurfaceSpec::Ellipsoid { a: 2.0 }
            .build(euclidean(2), 128)
            .unwrap();
        let data = ell.extrinsic_data().unwrap();
        let flags = hypothesis_flags(&ell, &data, 1, 1e-8);
        assert!(flags.star_shaped.holds);
        assert!(!flags.grad_condition.holds, "Φ is increasing on the ellipsoid");
    }
}

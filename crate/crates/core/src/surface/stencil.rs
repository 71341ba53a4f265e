//! Finite-difference stencils for the structured grids used by the surface
//! builders: 4th-order central differences throughout, with periodic wrap in
//! angular directions and reflection ghosts at meridian ends and across the
//! poles of latitude-longitude grids.
//!
//! Reflection ghosts encode the axis regularity of rotationally symmetric
//! data: even fields continue as `v(-s) = v(s)`, odd ones as
//! `v(-s) = 2c - v(s)` about their pole value `c`. Differentiating the smooth
//! continuation this way keeps full order at the ends, where the rotational
//! curvature later divides by `sin θ`.

/// End continuation rule for an open meridian field.
#[derive(Debug, Clone, Copy)]
pub enum EndRule {
    /// `v(-s) = v(s)`.
    Even,
    /// `v(-s) = 2·pole_value - v(s)`.
    Odd { pole_value: f64 },
}

/// First-derivative operator on a uniform 1-D node set at half-offset
/// positions `s_j = (j + ½)h`.
pub struct MeridianDeriv {
    n: usize,
    inv_h: f64,
    periodic: bool,
}

impl MeridianDeriv {
    pub fn open(n: usize, h: f64) -> Self {
        assert!(n >= 5, "meridian stencil needs at least 5 nodes");
        Self {
            n,
            inv_h: 1.0 / h,
            periodic: false,
        }
    }

    pub fn periodic(n: usize, h: f64) -> Self {
        assert!(n >= 5, "periodic stencil needs at least 5 nodes");
        Self {
            n,
            inv_h: 1.0 / h,
            periodic: true,
        }
    }

    /// 4th-order central derivative with the given end continuations
    /// (ignored for periodic grids).
    pub fn apply(&self, f: &[f64], start: EndRule, end: EndRule) -> Vec<f64> {
        assert_eq!(f.len(), self.n);
        let n = self.n as isize;
        let at = |i: isize| -> f64 {
            if self.periodic {
                return f[i.rem_euclid(n) as usize];
            }
            if i < 0 {
                let v = f[(-1 - i) as usize];
                match start {
                    EndRule::Even => v,
                    EndRule::Odd { pole_value } => 2.0 * pole_value - v,
                }
            } else if i >= n {
                let v = f[(2 * n - 1 - i) as usize];
                match end {
                    EndRule::Even => v,
                    EndRule::Odd { pole_value } => 2.0 * pole_value - v,
                }
            } else {
                f[i as usize]
            }
        };
        (0..n)
            .map(|i| {
                (at(i - 2) - 8.0 * at(i - 1) + 8.0 * at(i + 1) - at(i + 2)) / 12.0 * self.inv_h
            })
            .collect()
    }
}

/// Reflection parity of a field across the poles of a latitude-longitude
/// grid: the ghost value at `(-θ, φ)` is `±` the value at `(θ, φ + π)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    /// Scalars and `φ`-vector components.
    Even,
    /// `θ`-vector components (the chart direction flips across the pole).
    Odd,
}

/// Latitude-longitude grid stencils: rows half-offset from the poles,
/// periodic columns. Fields are stored row-major (`idx = i·n_phi + j`).
pub struct GridStencil {
    pub n_theta: usize,
    pub n_phi: usize,
    inv_dtheta: f64,
    inv_dphi: f64,
}

impl GridStencil {
    pub fn new(n_theta: usize, n_phi: usize, dtheta: f64, dphi: f64) -> Self {
        assert!(n_theta >= 5 && n_phi >= 5);
        assert_eq!(n_phi % 2, 0, "pole ghost mapping needs an even φ count");
        Self {
            n_theta,
            n_phi,
            inv_dtheta: 1.0 / dtheta,
            inv_dphi: 1.0 / dphi,
        }
    }

    /// Value at row `i` (possibly outside the grid) and column `j`, using the
    /// pole map `(-θ, φ) ↦ (θ, φ + π)` with the field's parity.
    fn at(&self, f: &[f64], parity: Parity, i: isize, j: usize) -> f64 {
        let nt = self.n_theta as isize;
        let (row, flip) = if i < 0 {
            (-1 - i, true)
        } else if i >= nt {
            (2 * nt - 1 - i, true)
        } else {
            (i, false)
        };
        debug_assert!((0..nt).contains(&row));
        let col = if flip { (j + self.n_phi / 2) % self.n_phi } else { j };
        let v = f[row as usize * self.n_phi + col];
        match (flip, parity) {
            (true, Parity::Odd) => -v,
            _ => v,
        }
    }

    /// 4th-order `∂/∂θ`, pole-crossing with the given parity.
    pub fn d_theta(&self, f: &[f64], parity: Parity) -> Vec<f64> {
        let mut out = vec![0.0; f.len()];
        for i in 0..self.n_theta as isize {
            for j in 0..self.n_phi {
                let v = self.at(f, parity, i - 2, j) - 8.0 * self.at(f, parity, i - 1, j)
                    + 8.0 * self.at(f, parity, i + 1, j)
                    - self.at(f, parity, i + 2, j);
                out[i as usize * self.n_phi + j] = v / 12.0 * self.inv_dtheta;
            }
        }
        out
    }

    /// 4th-order periodic `∂/∂φ`.
    pub fn d_phi(&self, f: &[f64]) -> Vec<f64> {
        let np = self.n_phi as isize;
        let mut out = vec![0.0; f.len()];
        for i in 0..self.n_theta {
            let base = i * self.n_phi;
            let at = |j: isize| f[base + (j.rem_euclid(np)) as usize];
            for j in 0..np {
                out[base + j as usize] =
                    (at(j - 2) - 8.0 * at(j - 1) + 8.0 * at(j + 1) - at(j + 2)) / 12.0
                        * self.inv_dphi;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn open_derivative_converges_at_order_four() {
        // even function about both ends of [0, 1]
        let err = |n: usize| {
            let h = 1.0 / (n as f64);
            let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
            let f: Vec<f64> = xs.iter().map(|&x| (PI * x).cos()).collect();
            let d = MeridianDeriv::open(n, h).apply(&f, EndRule::Even, EndRule::Even);
            xs.iter()
                .zip(&d)
                .map(|(&x, &v)| (v + PI * (PI * x).sin()).abs())
                .fold(0.0f64, f64::max)
        };
        let e1 = err(64);
        let e2 = err(128);
        assert!(e1 / e2 > 12.0, "observed ratio {}", e1 / e2);
    }

    #[test]
    fn odd_rule_is_exact_on_linear_fields() {
        // θ(s) = a·s is odd about 0 and odd about its end value
        let n = 16;
        let h = 0.1;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
        let f: Vec<f64> = xs.iter().map(|&x| 3.0 * x).collect();
        let end = 3.0 * (n as f64 * h);
        let d = MeridianDeriv::open(n, h).apply(
            &f,
            EndRule::Odd { pole_value: 0.0 },
            EndRule::Odd { pole_value: end },
        );
        for v in d {
            assert!((v - 3.0).abs() < 1e-12, "derivative {v}");
        }
    }

    #[test]
    fn periodic_derivative_fourth_order() {
        let err = |n: usize| {
            let h = 2.0 * PI / n as f64;
            let xs: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
            let f: Vec<f64> = xs.iter().map(|&x| x.sin()).collect();
            let d = MeridianDeriv::periodic(n, h).apply(&f, EndRule::Even, EndRule::Even);
            xs.iter()
                .zip(&d)
                .map(|(&x, &v)| (v - x.cos()).abs())
                .fold(0.0f64, f64::max)
        };
        assert!(err(64) < 1e-5);
        assert!(err(64) / err(128) > 12.0);
    }

    #[test]
    fn grid_stencil_differentiates_smooth_sphere_function() {
        let (nt, np) = (48, 96);
        let dtheta = PI / nt as f64;
        let dphi = 2.0 * PI / np as f64;
        let st = GridStencil::new(nt, np, dtheta, dphi);
        let mut f = vec![0.0; nt * np];
        let mut want_t = vec![0.0; nt * np];
        let mut want_p = vec![0.0; nt * np];
        for i in 0..nt {
            let th = (i as f64 + 0.5) * dtheta;
            for j in 0..np {
                let ph = j as f64 * dphi;
                // smooth function on the sphere: sinθ cosφ (x-coordinate)
                f[i * np + j] = th.sin() * ph.cos();
                want_t[i * np + j] = th.cos() * ph.cos();
                want_p[i * np + j] = -th.sin() * ph.sin();
            }
        }
        let dt = st.d_theta(&f, Parity::Even);
        let dp = st.d_phi(&f);
        let e_t = dt
            .iter()
            .zip(&want_t)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max)
            ;
        let e_p = dp
            .iter()
            .zip(&want_p)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(e_t < 5e-6, "θ-derivative error {e_t}");
        assert!(e_p < 5e-6, "φ-derivative error {e_p}");
    }
}

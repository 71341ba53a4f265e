//! Elementary symmetric functions of principal curvatures and the algebra
//! around them: truncated functions, Newton-tensor derivatives, the Garding
//! cone `Γ_k`, and the pointwise divergence identity for Newton tensors.
//!
//! Everything here is exact algebra on a curvature vector `κ = (κ_1, …, κ_n)`;
//! no discretization is involved. `σ_k` is computed with the stable one-pass
//! recurrence (`O(nk)`); brute-force subset enumeration is reserved for tests.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{GeomError, Result};

/// Principal curvatures at a point, no ordering assumed.
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalCurvatures {
    pub kappa: Vec<f64>,
}

impl PrincipalCurvatures {
    pub fn new(kappa: Vec<f64>) -> Self {
        Self { kappa }
    }

    pub fn n(&self) -> usize {
        self.kappa.len()
    }
}

/// Binomial coefficient as a float; exact for the small arguments used here.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// All elementary symmetric functions `σ_0, …, σ_m` of `kappa` in one pass.
///
/// `m` is capped at `kappa.len()`; `σ_0 = 1` by convention.
pub fn sigma_all(kappa: &[f64], m: usize) -> Vec<f64> {
    let m = m.min(kappa.len());
    let mut e = vec![0.0; m + 1];
    e[0] = 1.0;
    for (idx, &x) in kappa.iter().enumerate() {
        let top = m.min(idx + 1);
        for k in (1..=top).rev() {
            e[k] += x * e[k - 1];
        }
    }
    e
}

/// `σ_k(κ)`, the k-th elementary symmetric function.
///
/// Convention: `σ_0 = 1`, and any negative degree is 0.
pub fn sigma_k(kappa: &[f64], k: usize) -> Result<f64> {
    let n = kappa.len();
    if k > n {
        return Err(GeomError::DegreeOutOfRange { k, n });
    }
    Ok(sigma_all(kappa, k)[k])
}

/// `σ_k` with negative degrees mapped to 0 and `k > n` mapped to 0.
///
/// Internal total version used by identities that touch `σ_{k-2}` at `k = 1`.
fn sigma_total(kappa: &[f64], k: isize) -> f64 {
    if k < 0 {
        return 0.0;
    }
    let k = k as usize;
    if k > kappa.len() {
        return 0.0;
    }
    sigma_all(kappa, k)[k]
}

/// Truncated symmetric function `σ_{k;i}` / `σ_{k;ij}`: `σ_k` with the listed
/// curvatures set to zero. `omit` entries must be distinct and in range.
pub fn sigma_truncated(kappa: &[f64], k: usize, omit: &[usize]) -> Result<f64> {
    let n = kappa.len();
    for (a, &i) in omit.iter().enumerate() {
        if i >= n {
            return Err(GeomError::BadOmitSet {
                reason: format!("index {i} out of range for n = {n}"),
            });
        }
        if omit[a + 1..].contains(&i) {
            return Err(GeomError::BadOmitSet {
                reason: format!("duplicate index {i}"),
            });
        }
    }
    Ok(sigma_truncated_total(kappa, k as isize, omit))
}

/// Unchecked totalized truncation: negative degree is 0, omitted entries are
/// skipped (equivalent to zeroing them).
fn sigma_truncated_total(kappa: &[f64], k: isize, omit: &[usize]) -> f64 {
    if k < 0 {
        return 0.0;
    }
    let k = k as usize;
    let m = kappa.len() - omit.len();
    if k > m {
        return 0.0;
    }
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    let mut seen = 0usize;
    for (i, &x) in kappa.iter().enumerate() {
        if omit.contains(&i) {
            continue;
        }
        seen += 1;
        let top = k.min(seen);
        for d in (1..=top).rev() {
            e[d] += x * e[d - 1];
        }
    }
    e[k]
}

/// Diagonal of the Newton-tensor derivative `∂σ_k/∂h` at diagonal `h`:
/// component `i` is `σ_{k-1;i}(κ)`. Off-diagonal entries vanish there.
pub fn newton_derivative(kappa: &[f64], k: usize) -> Result<Vec<f64>> {
    let n = kappa.len();
    if k == 0 || k > n {
        return Err(GeomError::DegreeOutOfRange { k, n });
    }
    Ok((0..n)
        .map(|i| sigma_truncated_total(kappa, k as isize - 1, &[i]))
        .collect())
}

/// Second derivative `∂²σ_k/(∂h_ij ∂h_pq)` evaluated at a diagonal matrix
/// with entries `kappa`.
///
/// Nonzero patterns: `(ii, pp) ↦ σ_{k-2;ip}` for `i ≠ p` and
/// `(ij, ji) ↦ -σ_{k-2;ij}` for `i ≠ j`; everything else vanishes.
pub fn sigma_hessian_diag(kappa: &[f64], k: usize, i: usize, j: usize, p: usize, q: usize) -> f64 {
    if i == j && p == q && i != p {
        sigma_truncated_total(kappa, k as isize - 2, &[i, p])
    } else if i != j && p == j && q == i {
        -sigma_truncated_total(kappa, k as isize - 2, &[i, j])
    } else {
        0.0
    }
}

/// Normalized k-th mean curvature `H_k = σ_k / C(n,k)` together with the
/// Maclaurin comparison `H_k^{1/k} ≤ H_{k-1}^{1/(k-1)}`.
///
/// The boolean is meaningful on `Γ_k`; when either side is non-positive the
/// chain does not apply and `true` is returned. `k = 1` has no predecessor
/// and is vacuously `true`.
pub fn hk_and_maclaurin(kappa: &[f64], k: usize) -> Result<(f64, bool)> {
    let n = kappa.len();
    if k == 0 || k > n {
        return Err(GeomError::DegreeOutOfRange { k, n });
    }
    let sig = sigma_all(kappa, k);
    let hk = sig[k] / binomial(n, k);
    if k == 1 {
        return Ok((hk, true));
    }
    let hk_prev = sig[k - 1] / binomial(n, k - 1);
    let ok = if hk <= 0.0 || hk_prev <= 0.0 {
        true
    } else {
        hk.powf(1.0 / k as f64) <= hk_prev.powf(1.0 / (k - 1) as f64) + 1e-12
    };
    Ok((hk, ok))
}

/// `H_k` alone (no Maclaurin comparison).
pub fn hk(kappa: &[f64], k: usize) -> Result<f64> {
    let n = kappa.len();
    if k > n {
        return Err(GeomError::DegreeOutOfRange { k, n });
    }
    Ok(sigma_all(kappa, k)[k] / binomial(n, k))
}

/// Membership in the Garding cone `Γ_k = {σ_1 > 0, …, σ_k > 0}`.
pub fn gamma_k_member(kappa: &[f64], k: usize) -> bool {
    let k = k.min(kappa.len());
    let sig = sigma_all(kappa, k);
    sig[1..=k].iter().all(|&s| s > 0.0)
}

/// Residual of the determinant expansion `σ_n(I + th) = Σ t^k σ_k(h)` over
/// the sample points `t_samples`, with `σ_k(h)` taken from the eigenvalues
/// of the symmetric matrix `h`. Returns the maximum absolute difference.
pub fn sigma_expansion_check(h: &DMatrix<f64>, t_samples: &[f64]) -> f64 {
    assert_eq!(h.nrows(), h.ncols(), "h must be square");
    let n = h.nrows();
    let eig = h.clone().symmetric_eigen();
    let kappa: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let sig = sigma_all(&kappa, n);
    let mut worst: f64 = 0.0;
    for &t in t_samples {
        let m = DMatrix::identity(n, n) + h * t;
        let det = m.determinant();
        let poly: f64 = (0..=n).rev().fold(0.0, |acc, k| acc * t + sig[k]);
        worst = worst.max((det - poly).abs());
    }
    worst
}

/// Residual of the truncation collapse
/// `σ_{k-2;jp} κ_j - σ_{k-1;p} + σ_{k-1;jp} = 0` (with `σ_{-1;·} := 0`).
pub fn truncation_identity_check(kappa: &[f64], k: usize, j: usize, p: usize) -> Result<f64> {
    if j == p {
        return Err(GeomError::BadOmitSet {
            reason: format!("truncation identity needs j ≠ p (got {j})"),
        });
    }
    let n = kappa.len();
    if k == 0 || k > n {
        return Err(GeomError::DegreeOutOfRange { k, n });
    }
    let a = sigma_truncated_total(kappa, k as isize - 2, &[j, p]);
    let b = sigma_truncated_total(kappa, k as isize - 1, &[p]);
    let c = sigma_truncated_total(kappa, k as isize - 1, &[j, p]);
    Ok((a * kappa[j] - b + c).abs())
}

/// A sampled Codazzi configuration: diagonal second fundamental form,
/// its first covariant derivatives, and the curvature defect
/// `R̄_{νpqi} = ∇_i h_pq - ∇_q h_pi` they induce.
#[derive(Debug, Clone)]
pub struct CodazziSample {
    pub kappa: Vec<f64>,
    /// `∇_i h_pq`, flattened as `[i][p][q]`; symmetric in `(p, q)`.
    grad_h: Vec<f64>,
    n: usize,
}

impl CodazziSample {
    /// Builds a sample from `∇_i h_pq` data, symmetrizing in the last two
    /// indices so the stored array always satisfies the invariant.
    pub fn new(kappa: Vec<f64>, grad_h_raw: &[f64]) -> Self {
        let n = kappa.len();
        assert_eq!(grad_h_raw.len(), n * n * n, "grad_h must be n^3 entries");
        let at = |i: usize, p: usize, q: usize| grad_h_raw[(i * n + p) * n + q];
        let mut grad_h = vec![0.0; n * n * n];
        for i in 0..n {
            for p in 0..n {
                for q in 0..n {
                    grad_h[(i * n + p) * n + q] = 0.5 * (at(i, p, q) + at(i, q, p));
                }
            }
        }
        Self { kappa, grad_h, n }
    }

    /// Draws a random sample with entries in `[-1, 1]`.
    pub fn random<R: Rng>(n: usize, rng: &mut R) -> Self {
        let kappa: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let grad: Vec<f64> = (0..n * n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Self::new(kappa, &grad)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn grad_h(&self, i: usize, p: usize, q: usize) -> f64 {
        self.grad_h[(i * self.n + p) * self.n + q]
    }

    /// `R̄_{νpqi} = ∇_i h_pq - ∇_q h_pi`, antisymmetric in `(q, i)` by
    /// construction.
    pub fn curvature_slot(&self, p: usize, q: usize, i: usize) -> f64 {
        self.grad_h(i, p, q) - self.grad_h(q, p, i)
    }
}

/// Residual of the Newton-tensor divergence identity
/// `Σ_i ∇_i(∂σ_k/∂h_ij) = -Σ_{p≠j} R̄_{νpjp} σ_{k-2;jp}`
/// for a fixed `j`, with the left side assembled from exact second
/// derivatives of `σ_k` at the diagonal point.
pub fn newton_divergence_algebraic(sample: &CodazziSample, k: usize, j: usize) -> Result<f64> {
    let n = sample.n();
    if k < 2 || k > n {
        return Err(GeomError::DegreeOutOfRange { k, n });
    }
    if j >= n {
        return Err(GeomError::BadOmitSet {
            reason: format!("frame index j = {j} out of range for n = {n}"),
        });
    }
    let kappa = &sample.kappa;
    let mut lhs = 0.0;
    for i in 0..n {
        for p in 0..n {
            for q in 0..n {
                let w = sigma_hessian_diag(kappa, k, i, j, p, q);
                if w != 0.0 {
                    lhs += w * sample.grad_h(i, p, q);
                }
            }
        }
    }
    let mut rhs = 0.0;
    for p in 0..n {
        if p == j {
            continue;
        }
        rhs -= sample.curvature_slot(p, j, p) * sigma_truncated_total(kappa, k as isize - 2, &[j, p]);
    }
    Ok((lhs - rhs).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sigma_k_small_cases() {
        assert_relative_eq!(sigma_k(&[1.0, 1.0, 1.0], 2).unwrap(), 3.0);
        // 1*2 + 1*3 + 2*3
        assert_relative_eq!(sigma_k(&[1.0, 2.0, 3.0], 2).unwrap(), 11.0);
        assert_relative_eq!(sigma_k(&[4.0, -7.0, 0.3], 0).unwrap(), 1.0);
        assert!(sigma_k(&[1.0, 2.0], 3).is_err());
    }

    #[test]
    fn sigma_truncated_cases() {
        let k = [1.0, 2.0, 3.0];
        assert_relative_eq!(sigma_truncated(&k, 2, &[2]).unwrap(), 2.0);
        assert_relative_eq!(sigma_truncated(&k, 0, &[0, 2]).unwrap(), 1.0);
        assert_relative_eq!(sigma_truncated(&k, 1, &[0, 1]).unwrap(), 3.0);
        assert!(sigma_truncated(&k, 1, &[1, 1]).is_err());
        assert!(sigma_truncated(&k, 1, &[5]).is_err());
    }

    #[test]
    fn newton_derivative_cases() {
        let k = [1.0, 2.0, 3.0];
        assert_eq!(newton_derivative(&k, 1).unwrap(), vec![1.0, 1.0, 1.0]);
        assert_eq!(newton_derivative(&k, 2).unwrap(), vec![5.0, 4.0, 3.0]);
        assert_eq!(newton_derivative(&k, 3).unwrap(), vec![6.0, 3.0, 2.0]);
    }

    #[test]
    fn hk_and_maclaurin_cases() {
        let (h1, _) = hk_and_maclaurin(&[1.0, 2.0, 3.0], 1).unwrap();
        assert_relative_eq!(h1, 2.0);
        let (h2, ok2) = hk_and_maclaurin(&[1.0, 2.0, 3.0], 2).unwrap();
        assert_relative_eq!(h2, 11.0 / 3.0);
        assert!(ok2, "sqrt(11/3) ≈ 1.9149 ≤ 2");

        // umbilic equality case: H_k^{1/k} = c for all k
        for k in 1..=4 {
            let (h, ok) = hk_and_maclaurin(&[0.7; 4], k).unwrap();
            assert_relative_eq!(h.powf(1.0 / k as f64), 0.7, epsilon = 1e-12);
            assert!(ok);
        }

        let (h3, ok3) = hk_and_maclaurin(&[1.0, 1.0, 1.0], 3).unwrap();
        assert_relative_eq!(h3, 1.0);
        assert!(ok3);
    }

    #[test]
    fn gamma_cone_cases() {
        assert!(gamma_k_member(&[1.0, 2.0, 3.0], 3));
        assert!(!gamma_k_member(&[-1.0, -1.0, -1.0], 1));
        // σ₁ = 5 > 0, σ₂ = 9 - 6 = 3 > 0 despite a negative entry
        assert!(gamma_k_member(&[3.0, 3.0, -1.0], 2));
        assert!(!gamma_k_member(&[3.0, 3.0, -1.0], 3));
    }

    #[test]
    fn expansion_check_closed_cases() {
        let z = DMatrix::zeros(3, 3);
        assert!(sigma_expansion_check(&z, &[0.0, 1.0, -2.0]) < 1e-14);

        // h = I, t = 1: σ₃(2,2,2) = 8 = 1 + 3 + 3 + 1
        let id = DMatrix::identity(3, 3);
        assert!(sigma_expansion_check(&id, &[1.0]) < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let raw = DMatrix::from_fn(5, 5, |_, _| rng.gen_range(-1.0..1.0));
        let h = (&raw + raw.transpose()) * 0.5;
        let ts: Vec<f64> = (0..20).map(|_| rng.gen_range(-2.0..2.0)).collect();
        assert!(sigma_expansion_check(&h, &ts) < 1e-9);
    }

    #[test]
    fn truncation_identity_cases() {
        // σ_{0;12}κ₁ - σ_{1;2} + σ_{1;12} = 1 - 4 + 3 = 0
        let r = truncation_identity_check(&[1.0, 2.0, 3.0], 2, 0, 1).unwrap();
        assert!(r < 1e-14);
        // degree-0 convention at k = 1
        let r = truncation_identity_check(&[0.4, -1.3, 2.2], 1, 2, 0).unwrap();
        assert!(r < 1e-14);
        assert!(truncation_identity_check(&[1.0, 2.0], 1, 0, 0).is_err());
    }

    #[test]
    fn newton_divergence_symmetric_grad_is_exact() {
        // fully symmetric ∇h means zero curvature slot, so both sides vanish
        let n = 4;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let kappa: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut grad = vec![0.0; n * n * n];
        for i in 0..n {
            for p in 0..n {
                for q in 0..n {
                    // symmetric in all three indices
                    let (a, b, c) = {
                        let mut v = [i, p, q];
                        v.sort_unstable();
                        (v[0], v[1], v[2])
                    };
                    grad[(i * n + p) * n + q] = ((a + 1) * (b + 2) * (c + 3)) as f64 * 0.01;
                }
            }
        }
        let sample = CodazziSample::new(kappa, &grad);
        for p in 0..n {
            for q in 0..n {
                for i in 0..n {
                    assert!(sample.curvature_slot(p, q, i).abs() < 1e-15);
                }
            }
        }
        for k in 2..=n {
            for j in 0..n {
                assert!(newton_divergence_algebraic(&sample, k, j).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn newton_divergence_k2_is_contracted_codazzi() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sample = CodazziSample::random(5, &mut rng);
        let n = sample.n();
        for j in 0..n {
            // k = 2 collapse: Σ_p (∇_j h_pp - ∇_p h_jp) = -Σ_p R̄_{νpjp}
            let lhs: f64 = (0..n)
                .filter(|&p| p != j)
                .map(|p| sample.grad_h(j, p, p) - sample.grad_h(p, j, p))
                .sum();
            let rhs: f64 = -(0..n)
                .filter(|&p| p != j)
                .map(|p| sample.curvature_slot(p, j, p))
                .sum::<f64>();
            assert_relative_eq!(lhs, rhs, epsilon = 1e-13);
            assert!(newton_divergence_algebraic(&sample, 2, j).unwrap() < 1e-13);
        }
    }
}

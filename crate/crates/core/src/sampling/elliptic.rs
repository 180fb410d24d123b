//! Complete elliptic integral of the first kind and Jacobi `sn`/`cn`,
//! both through the arithmetic-geometric mean.
//!
//! Moduli close to 1 are common here (the Zolotarev grid on `[2^-10, 1]` has
//! `k' = sqrt(1 - 2^-20)`), so every routine also has a variant taking the
//! complementary modulus directly instead of recomputing it from `k`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

const MAX_ITER: usize = 64;
const TOL: f64 = 1e-15;

fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..MAX_ITER {
        if (a - b).abs() <= TOL * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    0.5 * (a + b)
}

fn complement(k: f64) -> f64 {
    ((1.0 - k) * (1.0 + k)).sqrt()
}

fn check_modulus(k: f64) -> Result<()> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::Domain(format!(
            "elliptic modulus must lie in [0, 1), got {k}"
        )));
    }
    Ok(())
}

/// `K(k) = ∫₀^{π/2} dθ / sqrt(1 - k² sin²θ)` for modulus `0 <= k < 1`.
pub fn complete_elliptic_k(k: f64) -> Result<f64> {
    check_modulus(k)?;
    Ok(complete_elliptic_k_from_complement(complement(k)))
}

/// `K(k)` given the complementary modulus `k' = sqrt(1 - k²) ∈ (0, 1]`.
pub fn complete_elliptic_k_from_complement(k_comp: f64) -> f64 {
    FRAC_PI_2 / agm(1.0, k_comp)
}

/// Jacobi elliptic functions `(sn(u; k), cn(u; k))`, modulus `0 <= k < 1`.
pub fn jacobi_sn_cn(u: f64, k: f64) -> Result<(f64, f64)> {
    check_modulus(k)?;
    Ok(jacobi_sn_cn_with_complement(u, k, complement(k)))
}

/// Descending Landen transformation (AGM form): run the AGM on `(1, k')`
/// keeping `c_n`, scale the amplitude up by `2^N a_N`, then walk back down.
pub fn jacobi_sn_cn_with_complement(u: f64, k: f64, k_comp: f64) -> (f64, f64) {
    let mut a = vec![1.0];
    let mut c = vec![k];
    let mut b = k_comp;
    while c.len() <= MAX_ITER {
        let (an, cn) = (*a.last().unwrap(), *c.last().unwrap());
        if cn.abs() <= TOL {
            break;
        }
        let a_next = 0.5 * (an + b);
        // c_{n+1} = (a_n - b_n)/2 without the cancellation.
        let c_next = cn * cn / (4.0 * a_next);
        b = (an * b).sqrt();
        a.push(a_next);
        c.push(c_next);
    }
    let n = a.len() - 1;
    let mut phi = (1u64 << n) as f64 * a[n] * u;
    for i in (1..=n).rev() {
        phi = 0.5 * (phi + (c[i] / a[i] * phi.sin()).asin());
    }
    (phi.sin(), phi.cos())
}

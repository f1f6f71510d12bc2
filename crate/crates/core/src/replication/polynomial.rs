//! Survival-count generating polynomial.
//!
//! A group is seven machines, four on the owner rack and three on the user
//! rack. `a_k` counts the `k`-machine failure subsets of one group that lose
//! no data:
//!
//! ```text
//! a₀ = 1
//! a₁ = C(7,6)                 = 7
//! a₂ = C(7,5)                 = 21
//! a₃ = C(7,4) − 1             = 34   (the three user machines)
//! a₄ = C(7,3) − C(4,3) − 1    = 30   (user triple + one owner, or all four owner)
//! a₅ = C(7,2) − C(4,2) − C(3,2) = 12
//! ```
//!
//! and `a₆ = a₇ = 0`. With `n` independent groups the number of non-fatal
//! `f`-subsets of all `7n` machines is the coefficient of `x^f` in
//! `(a₀ + a₁x + … + a₅x⁵)^n`.

use num_bigint::BigUint;
use num_traits::Zero;

pub const BASE_COEFFS: [u64; 6] = [1, 7, 21, 34, 30, 12];

pub fn base_polynomial() -> [u64; 6] {
    BASE_COEFFS
}

/// Coefficients of `(1 + 7x + 21x² + 34x³ + 30x⁴ + 12x⁵)^n`, lowest degree
/// first, by repeated convolution.
pub fn loss_polynomial(n: usize) -> Vec<BigUint> {
    let mut coeffs = vec![BigUint::from(1u32)];
    for _ in 0..n {
        let mut next = vec![BigUint::zero(); coeffs.len() + BASE_COEFFS.len() - 1];
        for (i, c) in coeffs.iter().enumerate() {
            for (j, &a) in BASE_COEFFS.iter().enumerate() {
                next[i + j] += c * a;
            }
        }
        coeffs = next;
    }
    coeffs
}

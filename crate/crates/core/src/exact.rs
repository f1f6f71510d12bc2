//! Big-integer helpers shared by the loss computations.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

/// `C(n, k)` exactly.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// All of `C(n, 0..=n)`.
pub fn binomial_row(n: u64) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut c = BigUint::one();
    row.push(c.clone());
    for k in 0..n {
        c = c * (n - k) / (k + 1);
        row.push(c.clone());
    }
    row
}

/// `x · 2^e`, staying finite through large intermediate exponents.
fn ldexp(mut x: f64, mut e: i64) -> f64 {
    let big = 2f64.powi(1000);
    let small = 2f64.powi(-1000);
    while e > 1000 {
        x *= big;
        e -= 1000;
    }
    while e < -1000 {
        x *= small;
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

/// `num / den` correctly rounded to the nearest `f64` (for results in the
/// normal range).
pub fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    assert!(!den.is_zero(), "zero denominator");
    if num.is_zero() {
        return 0.0;
    }
    // Scale so the integer quotient carries 65 or 66 significant bits, then
    // fold the remainder into a sticky bit so the final rounding is exact.
    let shift = 65 + den.bits() as i64 - num.bits() as i64;
    let (q, r) = if shift >= 0 {
        (num << shift as u64).div_rem(den)
    } else {
        num.div_rem(&(den << (-shift) as u64))
    };
    let mut q = q.to_u128().expect("quotient fits in 66 bits");
    if !r.is_zero() {
        q |= 1;
    }
    ldexp(q as f64, -shift)
}

/// Natural log of a positive big integer.
pub fn ln_biguint(x: &BigUint) -> f64 {
    assert!(!x.is_zero(), "log of zero");
    let bits = x.bits();
    if bits <= 64 {
        return (x.to_u64().expect("fits") as f64).ln();
    }
    let top = (x >> (bits - 64)).to_u64().expect("64 bits") as f64;
    top.ln() + (bits - 64) as f64 * std::f64::consts::LN_2
}

/// A probability in `[0, 1]` written exactly as `m / 2^e` with `m` odd (or
/// zero). Every finite `f64` in that range has such a form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dyadic {
    pub numerator: BigUint,
    pub exponent: u64,
}

impl Dyadic {
    pub fn from_probability(p: f64) -> Self {
        assert!((0.0..=1.0).contains(&p), "probability out of range: {p}");
        if p == 0.0 {
            return Self {
                numerator: BigUint::zero(),
                exponent: 0,
            };
        }
        let bits = p.to_bits();
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mut mant, mut exp2) = if biased == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        let tz = mant.trailing_zeros();
        mant >>= tz;
        exp2 += tz as i64;
        debug_assert!(exp2 <= 0);
        Self {
            numerator: BigUint::from(mant),
            exponent: (-exp2) as u64,
        }
    }

    pub fn denominator(&self) -> BigUint {
        BigUint::one() << self.exponent
    }

    /// Numerator of `1 − p` over the same denominator.
    pub fn complement_numerator(&self) -> BigUint {
        self.denominator() - &self.numerator
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(7, 4), BigUint::from(35u32));
        assert_eq!(binomial(5, 7), BigUint::zero());
        assert_eq!(binomial(70, 0), BigUint::one());
        let row = binomial_row(21);
        assert_eq!(row.len(), 22);
        assert_eq!(row[3], binomial(21, 3));
        assert_eq!(row.iter().sum::<BigUint>(), BigUint::one() << 21u32);
    }

    #[test]
    fn ratios_round_correctly() {
        let one = ratio_to_f64(&BigUint::from(12345u32), &BigUint::from(12345u32));
        assert_eq!(one, 1.0);
        assert_eq!(ratio_to_f64(&BigUint::from(1u32), &BigUint::from(3u32)), 1.0 / 3.0);
        assert_eq!(ratio_to_f64(&BigUint::from(1327u32), &BigUint::from(1330u32)), 1327.0 / 1330.0);
        let huge = BigUint::one() << 5000u32;
        assert_eq!(ratio_to_f64(&(&huge * 3u32), &(&huge * 4u32)), 0.75);
        assert_eq!(ratio_to_f64(&BigUint::one(), &(BigUint::one() << 100u32)), 2f64.powi(-100));
    }

    #[test]
    fn dyadic_is_exact() {
        for p in [0.0, 1.0, 0.5, 0.01, 0.1, 0.3, 1e-300] {
            let d = Dyadic::from_probability(p);
            assert_eq!(ratio_to_f64(&d.numerator, &d.denominator()), p);
        }
        let one = Dyadic::from_probability(1.0);
        assert_eq!((one.numerator, one.exponent), (BigUint::one(), 0));
    }

    #[test]
    fn logs_of_big_integers() {
        let x = BigUint::from(10u32).pow(400);
        assert!((ln_biguint(&x) - 400.0 * 10f64.ln()).abs() < 1e-10);
        assert_eq!(ln_biguint(&BigUint::one()), 0.0);
    }
}

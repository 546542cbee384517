#![allow(dead_code)]

use num_bigint::{BigInt, Sign};

/// Smallest binary exponent of a finite f64 (subnormal spacing).
const MIN_EXP: i32 = -1074;

/// The exact value of `x` times 2^1074, as an integer.
fn scaled(x: f64) -> BigInt {
    if x == 0.0 {
        return BigInt::from(0);
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { Sign::Minus } else { Sign::Plus };
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    let (mantissa, e) = if exp == 0 { (frac, MIN_EXP) } else { (frac | (1u64 << 52), exp - 1075) };
    BigInt::from_biguint(sign, num_bigint::BigUint::from(mantissa) << ((e - MIN_EXP) as usize))
}

fn pow2(e: i32) -> f64 {
    // Valid for the normal range only, which is all the oracle needs.
    assert!((-1022..=1023).contains(&e));
    f64::from_bits(((e + 1023) as u64) << 52)
}

/// Correctly rounded (half-even) f64 nearest to `v · 2^-1074`.
fn to_f64(v: &BigInt) -> f64 {
    let (sign, mag) = (v.sign(), v.magnitude().clone());
    let nbits = mag.bits() as i32;
    if nbits == 0 {
        return 0.0;
    }
    let shift = (nbits - 53).max(0);
    let mut q = &mag >> shift as usize;
    if shift > 0 {
        let rem = &mag - (&q << shift as usize);
        let half = num_bigint::BigUint::from(1u8) << (shift - 1) as usize;
        let odd = q.bit(0);
        if rem > half || (rem == half && odd) {
            q += 1u8;
        }
    }
    let q = q.iter_u64_digits().next().unwrap_or(0) as f64;
    let mut e = shift + MIN_EXP;
    let mut out = q;
    while e < -1022 {
        out *= pow2(-1022);
        e += 1022;
    }
    out *= pow2(e);
    if sign == Sign::Minus {
        -out
    } else {
        out
    }
}

/// Exact sum of finite values, rounded once.
pub fn exact_sum_oracle(values: &[f64]) -> f64 {
    let total: BigInt = values.iter().map(|&x| scaled(x)).sum();
    to_f64(&total)
}

/// Sort, cut `floor(α·N/200)` values from each end, average the rest.
pub fn trimmed_mean_oracle(values: &[f64], alpha: f64) -> Option<f64> {
    let n = values.len();
    let per_side = (alpha * n as f64 / 200.0).floor() as usize;
    if 2 * per_side >= n {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let kept = &sorted[per_side..n - per_side];
    Some(exact_sum_oracle(kept) / kept.len() as f64)
}

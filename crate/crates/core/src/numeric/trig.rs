//! Sine and cosine of a product `omega * t` with extended-precision range reduction.
//!
//! Mode phases reach ~1e7 rad for the largest banks. The product is formed
//! exactly as a double-double (Dekker), reduced by pi/2 with a three-part
//! Cody-Waite constant, and evaluated with Taylor kernels on [-pi/4, pi/4].
//! The absolute error of the reduced phase stays near 1e-16 for
//! |omega * t| < 1e8, far below what a rounded `omega * t` passed to `sin` gives.

use std::f64::consts::FRAC_2_PI;

// pi/2 = C1 + C2 + C3; C1 and C2 carry 27 significant bits so n*C1, n*C2 are exact
const PIO2_1: f64 = 1.570796325802803;
const PIO2_2: f64 = 9.920935739593517e-10;
const PIO2_3: f64 = 5.721188726109832e-18;

/// Largest |omega * t| reduced with the exact scheme (n < 2^26).
const REDUCTION_LIMIT: f64 = 1.0e8;

const SPLITTER: f64 = 134_217_729.0; // 2^27 + 1

/// sin, cos and 1 - cos of one phase. `one_minus_cos` is accurate to full
/// relative precision near multiples of 2 pi.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinCos {
    pub sin: f64,
    pub cos: f64,
    pub one_minus_cos: f64,
}

#[inline]
fn split(a: f64) -> (f64, f64) {
    let c = SPLITTER * a;
    let hi = c - (c - a);
    (hi, a - hi)
}

/// Error-free product: `a * b == p + e` exactly (barring overflow).
#[inline]
pub fn two_product(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    let e = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    (p, e)
}

#[inline]
fn kernel_sin(y: f64, z: f64) -> f64 {
    const S: [f64; 8] = [
        -1.0 / 6.0,
        1.0 / 120.0,
        -1.0 / 5040.0,
        1.0 / 362_880.0,
        -1.0 / 39_916_800.0,
        1.0 / 6_227_020_800.0,
        -1.0 / 1_307_674_368_000.0,
        1.0 / 355_687_428_096_000.0,
    ];
    let mut p = S[7];
    for &c in S[..7].iter().rev() {
        p = p * z + c;
    }
    y + y * z * p
}

/// 1 - cos(y) for |y| <= pi/4.
#[inline]
fn kernel_omc(z: f64) -> f64 {
    const C: [f64; 9] = [
        0.5,
        -1.0 / 24.0,
        1.0 / 720.0,
        -1.0 / 40_320.0,
        1.0 / 3_628_800.0,
        -1.0 / 479_001_600.0,
        1.0 / 87_178_291_200.0,
        -1.0 / 20_922_789_888_000.0,
        1.0 / 6_402_373_705_728_000.0,
    ];
    let mut p = C[8];
    for &c in C[..8].iter().rev() {
        p = p * z + c;
    }
    z * p
}

/// Reduces `hi + lo` modulo pi/2, returning the quadrant and the remainder.
#[inline]
fn reduce(hi: f64, lo: f64) -> (i64, f64) {
    let n = (hi * FRAC_2_PI).round();
    let r = hi - n * PIO2_1;
    let r = r - n * PIO2_2;
    let r = r - n * PIO2_3;
    (n as i64, r + lo)
}

#[inline]
fn from_quadrant(q: i64, y: f64) -> SinCos {
    let z = y * y;
    let s = kernel_sin(y, z);
    let omc = kernel_omc(z);
    let c = 1.0 - omc;
    match q.rem_euclid(4) {
        0 => SinCos {
            sin: s,
            cos: c,
            one_minus_cos: omc,
        },
        1 => SinCos {
            sin: c,
            cos: -s,
            one_minus_cos: 1.0 + s,
        },
        2 => SinCos {
            sin: -s,
            cos: -c,
            one_minus_cos: 2.0 - omc,
        },
        _ => SinCos {
            sin: -c,
            cos: s,
            one_minus_cos: 1.0 - s,
        },
    }
}

/// sin/cos of `omega * t` with the product kept exact through the reduction.
#[inline]
pub fn sincos_product(omega: f64, t: f64) -> SinCos {
    let (p, e) = two_product(omega, t);
    if p.abs() < REDUCTION_LIMIT {
        let (q, y) = reduce(p, e);
        from_quadrant(q, y)
    } else {
        // libm reduces p exactly; fold the low part in to first order
        let (s, c) = p.sin_cos();
        let sin = s + e * c;
        let cos = c - e * s;
        SinCos {
            sin,
            cos,
            one_minus_cos: 1.0 - cos,
        }
    }
}

/// sin/cos of a single angle in radians.
#[inline]
pub fn sincos(x: f64) -> SinCos {
    sincos_product(x, 1.0)
}

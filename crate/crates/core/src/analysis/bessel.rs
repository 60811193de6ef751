//! Modified Bessel functions of the second kind for integer order.
//!
//! `K_0` and `K_1` come from their power series for `x <= 2` and from
//! Steed's continued fraction (Temme's CF2) above; higher orders follow by
//! the upward recurrence `K_{n+1} = K_{n-1} + (2n / x) K_n`, which is stable
//! for `K`. Everything is computed exponentially scaled, `e^x K_n(x)`, and is
//! generic over [`Real`] so the closed-form sum can run in double-double.

use crate::dd::Real;
use crate::error::{Error, Result};

const MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselK {
    pub value: f64,
    /// Set when the true value is below the smallest normal f64 and
    /// `value` has been flushed to zero.
    pub underflow: bool,
}

/// `K_order(x)` for `x > 0`, using `K_{-n} = K_n`.
pub fn bessel_k(order: i32, x: f64) -> Result<BesselK> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("Bessel K needs x > 0, got {x}")));
    }
    if x == f64::INFINITY {
        return Ok(BesselK { value: 0.0, underflow: true });
    }
    let n = order.unsigned_abs();
    let scaled = bessel_k_scaled_upto(n, x)[n as usize];
    let value = (scaled.ln() - x).exp();
    if value < f64::MIN_POSITIVE {
        Ok(BesselK { value: 0.0, underflow: true })
    } else {
        Ok(BesselK { value, underflow: false })
    }
}

/// `e^x K_n(x)` for `n = 0..=n_max`.
pub fn bessel_k_scaled_upto<T: Real>(n_max: u32, x: T) -> Vec<T> {
    let (k0, k1) = if x.to_f64() <= 2.0 {
        let (k0, k1) = series_k01(x);
        let e = x.exp();
        (k0 * e, k1 * e)
    } else {
        steed_k01(x)
    };
    let mut out = Vec::with_capacity(n_max as usize + 1);
    out.push(k0);
    if n_max >= 1 {
        out.push(k1);
    }
    for n in 1..n_max as usize {
        let next = out[n - 1] + T::from_usize(2 * n) / x * out[n];
        out.push(next);
    }
    out
}

/// Unscaled `K_0`, `K_1` from the logarithmic power series, `x <= 2`.
fn series_k01<T: Real>(x: T) -> (T, T) {
    let two = T::from_f64(2.0);
    let half = x / two;
    let t = half * half;
    let ln_half = half.ln();
    let gamma = T::euler_gamma();

    // a0 = t^k / (k!)^2, a1 = t^k / (k! (k+1)!), h = H_k
    let mut a0 = T::one();
    let mut a1 = T::one();
    let mut h = T::zero();
    let mut i0 = T::one();
    let mut s0 = T::zero();
    let mut i1 = T::one();
    // psi(1) + psi(2) = -2 gamma + 1
    let mut s1 = T::one() - two * gamma;
    for k in 1..MAX_ITER {
        let kf = T::from_usize(k);
        a0 = a0 * t / (kf * kf);
        a1 = a1 * t / (kf * (kf + T::one()));
        h += T::one() / kf;
        let h_next = h + T::one() / (kf + T::one());
        i0 += a0;
        s0 += h * a0;
        i1 += a1;
        s1 += (h + h_next - two * gamma) * a1;
        if a0.to_f64() * (1.0 + h.to_f64()) < T::EPSILON * 1e-2 {
            break;
        }
    }
    let k0 = s0 - (ln_half + gamma) * i0;
    let k1 = T::one() / x + ln_half * half * i1 - x / T::from_f64(4.0) * s1;
    (k0, k1)
}

/// Scaled `K_0`, `K_1` from Steed's method on the CF2 continued fraction.
fn steed_k01<T: Real>(x: T) -> (T, T) {
    let one = T::one();
    let two = T::from_f64(2.0);
    let quarter = T::from_f64(0.25);
    let mut b = two * (one + x);
    let mut d = one / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = T::zero();
    let mut q2 = one;
    let mut q = quarter;
    let mut c = quarter;
    let mut a = -quarter;
    let mut s = one + q * delh;
    for i in 2..MAX_ITER {
        a -= T::from_usize(2 * (i - 1));
        c = -a * c / T::from_usize(i);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        // c grows like i! while the q_i decay; only their product matters
        if c.to_f64().abs() > 1e100 {
            let scale = T::from_f64(1e-100);
            c *= scale;
            q1 /= scale;
            q2 /= scale;
        }
        b += two;
        d = one / (b + a * d);
        delh = (b * d - one) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).to_f64().abs() < T::EPSILON * 0.5 {
            break;
        }
    }
    h = quarter * h;
    let k0 = (T::pi() / (two * x)).sqrt() / s;
    let k1 = k0 * (x + T::from_f64(0.5) - h) / x;
    (k0, k1)
}

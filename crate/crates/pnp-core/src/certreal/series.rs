//! Fixed-point interval evaluation of log and exp.
//!
//! Values are scaled integers `v * 2^-w`. Every routine returns an integer
//! interval `[lo, hi]` that is guaranteed to enclose the exact result at that
//! scale; the caller picks an edge according to the rounding direction it
//! needs.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::dyadic::{Dyadic, Round};

/// Guard bits added on top of the requested output precision.
const GUARD: u64 = 48;

#[derive(Clone, Debug)]
struct Interval {
    lo: BigInt,
    hi: BigInt,
}

impl Interval {
    fn point(v: BigInt) -> Self {
        Interval { lo: v.clone(), hi: v }
    }

    fn add(&self, other: &Interval) -> Interval {
        Interval { lo: &self.lo + &other.lo, hi: &self.hi + &other.hi }
    }

    fn widen(&self, units: u32) -> Interval {
        Interval { lo: &self.lo - units, hi: &self.hi + units }
    }

    fn scale2(&self, e: i64) -> Interval {
        if e >= 0 {
            Interval { lo: &self.lo << e as u64, hi: &self.hi << e as u64 }
        } else {
            let s = (-e) as u64;
            Interval { lo: self.lo.div_floor(&(BigInt::one() << s)), hi: self.hi.div_ceil(&(BigInt::one() << s)) }
        }
    }
}

/// Directed quotient of two fixed-point intervals sharing scale `2^-w`
/// (result also at scale `2^-w`); the divisor interval must be positive.
fn div_iv(num: &Interval, den: &Interval, w: u64) -> Interval {
    debug_assert!(den.lo.is_positive());
    let shifted_lo = &num.lo << w;
    let shifted_hi = &num.hi << w;
    // num may be negative: pick the denominator edge that minimizes/maximizes.
    let lo = if num.lo.is_negative() {
        shifted_lo.div_floor(&den.lo)
    } else {
        shifted_lo.div_floor(&den.hi)
    };
    let hi = if num.hi.is_negative() {
        shifted_hi.div_ceil(&den.hi)
    } else {
        shifted_hi.div_ceil(&den.lo)
    };
    Interval { lo, hi }
}

/// Product of two fixed-point intervals at scale `2^-w`, result at `2^-w`.
fn mul_iv(a: &Interval, b: &Interval, w: u64) -> Interval {
    let mut products = Vec::with_capacity(4);
    for x in [&a.lo, &a.hi] {
        for y in [&b.lo, &b.hi] {
            products.push(x * y);
        }
    }
    let lo = products.iter().min().unwrap().div_floor(&(BigInt::one() << w));
    let hi = products.iter().max().unwrap().div_ceil(&(BigInt::one() << w));
    Interval { lo, hi }
}

/// atanh(u) for an interval `0 <= u < 0.34` at scale `2^-w`.
///
/// Series sum u^(2i+1)/(2i+1); the term ratio is below 1/8, so once a term
/// upper bound drops under one unit the tail is under one unit as well.
fn atanh_iv(u: &Interval, w: u64) -> Interval {
    debug_assert!(!u.lo.is_negative());
    // u < 0.34 guard: mantissa must stay below 0.34 * 2^w.
    debug_assert!(&u.hi * 100u8 < (BigInt::one() << w) * 34u8);
    let usq = mul_iv(u, u, w);
    let mut power = u.clone();
    let mut sum = u.clone();
    let mut i = 1u64;
    loop {
        power = mul_iv(&power, &usq, w);
        // widen for the truncation of this multiplication step
        power = power.widen(1);
        let denom = BigInt::from(2 * i + 1);
        let term = Interval {
            lo: power.lo.div_floor(&denom),
            hi: power.hi.div_ceil(&denom),
        };
        if term.hi <= BigInt::one() {
            // tail (including this term) is below 2 units
            sum = Interval { lo: sum.lo, hi: sum.hi + 2u8 };
            break;
        }
        sum = sum.add(&term);
        i += 1;
    }
    sum
}

/// Interval enclosing `log 2 * 2^w`, cached per scale.
fn log2_iv(w: u64) -> Interval {
    static CACHE: OnceLock<Mutex<HashMap<u64, (BigInt, BigInt)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some((lo, hi)) = cache.lock().unwrap().get(&w) {
        return Interval { lo: lo.clone(), hi: hi.clone() };
    }
    // log 2 = 2 atanh(1/3)
    let one = BigInt::one() << w;
    let third = Interval {
        lo: one.div_floor(&BigInt::from(3u8)),
        hi: one.div_ceil(&BigInt::from(3u8)),
    };
    let at = atanh_iv(&third, w);
    let result = at.scale2(1);
    cache
        .lock()
        .unwrap()
        .insert(w, (result.lo.clone(), result.hi.clone()));
    result
}

/// Enclosure of `log d` for an exact positive dyadic, as an interval at scale
/// `2^-(prec+GUARD)`.
fn log_interval(d: &Dyadic, prec: u64) -> (Interval, u64) {
    assert!(d.is_positive(), "log of non-positive dyadic");
    let w = prec + GUARD;
    // d = m * 2^e with m in [1, 2)
    let bits = d.man_bits();
    let e_adj = d.exponent() + bits as i64 - 1;
    // m at scale 2^-w (interval, exact if mantissa fits)
    let m_iv = if bits as i64 - 1 <= w as i64 {
        Interval::point(d.mantissa().clone() << (w - (bits - 1)))
    } else {
        let shift = (bits - 1) - w;
        let lo = d.mantissa() >> shift;
        Interval { lo: lo.clone(), hi: lo + 1u8 }
    };
    let one = BigInt::one() << w;
    let num = Interval { lo: &m_iv.lo - &one, hi: &m_iv.hi - &one };
    let den = Interval { lo: &m_iv.lo + &one, hi: &m_iv.hi + &one };
    // u = (m-1)/(m+1) in [0, 1/3)
    let u = {
        let raw = div_iv(&num, &den, w);
        Interval { lo: raw.lo.max(BigInt::zero()), hi: raw.hi }
    };
    let log_m = atanh_iv(&u, w).scale2(1);
    let l2 = log2_iv(w);
    let contrib = if e_adj >= 0 {
        Interval { lo: &l2.lo * e_adj, hi: &l2.hi * e_adj }
    } else {
        Interval { lo: &l2.hi * e_adj, hi: &l2.lo * e_adj }
    };
    (log_m.add(&contrib), w)
}

/// Directed natural logarithm of an exact positive dyadic.
pub fn log_dyadic(d: &Dyadic, prec: u64, round: Round) -> Dyadic {
    let (iv, w) = log_interval(d, prec);
    let edge = match round {
        Round::Down => iv.lo,
        Round::Up => iv.hi,
        Round::Nearest => (iv.lo + iv.hi).div_floor(&BigInt::from(2u8)),
    };
    Dyadic::new(edge, -(w as i64))
}

/// Enclosure of `exp d` for an exact dyadic with `|d| <= 4`, as interval at
/// scale `2^-(prec+GUARD)`.
fn exp_interval(d: &Dyadic, prec: u64) -> (Interval, u64) {
    let w = prec + GUARD;
    let four = Dyadic::from_i64(4);
    assert!(
        d.abs().cmp(&four) != std::cmp::Ordering::Greater,
        "exp argument out of supported range"
    );
    // x at scale 2^-w (interval; exact when it fits)
    let x = {
        let (r, err) = d.mul_pow2(w as i64).round_with_err(w + 8, Round::Down);
        let lo = r.floor_int();
        let hi = if err.is_zero() { lo.clone() } else { &lo + 2u8 };
        Interval { lo, hi }
    };
    let mut sum = Interval::point(BigInt::one() << w); // 1
    let mut term = Interval::point(BigInt::one() << w); // x^i / i!
    let mut i = 1u64;
    loop {
        term = mul_iv(&term, &x, w).widen(1);
        let denom = BigInt::from(i);
        term = Interval {
            lo: term.lo.div_floor(&denom),
            hi: term.hi.div_ceil(&denom),
        };
        let mag = term.lo.abs().max(term.hi.abs());
        if mag <= BigInt::one() && i > 8 {
            // |x| <= 4 and i > 8: ratio < 1/2, tail below 2 units either way
            sum = sum.widen(3);
            break;
        }
        sum = sum.add(&term);
        i += 1;
    }
    (sum, w)
}

/// Directed exponential of an exact dyadic with `|d| <= 4`.
pub fn exp_dyadic(d: &Dyadic, prec: u64, round: Round) -> Dyadic {
    let (iv, w) = exp_interval(d, prec);
    let edge = match round {
        Round::Down => iv.lo,
        Round::Up => iv.hi,
        Round::Nearest => (iv.lo + iv.hi).div_floor(&BigInt::from(2u8)),
    };
    Dyadic::new(edge, -(w as i64))
}

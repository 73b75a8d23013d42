//! Exact dyadic rationals: `mantissa * 2^exponent` with arbitrary-precision
//! mantissa. All arithmetic here is exact unless a rounding direction is
//! requested explicitly.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint, Sign as IntSign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};

/// Rounding direction for operations that cannot be exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Round {
    /// Toward negative infinity.
    Down,
    /// Toward positive infinity.
    Up,
    /// To nearest, ties away from zero.
    Nearest,
}

/// An exact dyadic number `man * 2^exp`, kept in normal form: `man` is odd or
/// zero, and zero is represented as `(0, 0)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    man: BigInt,
    exp: i64,
}

impl Dyadic {
    pub fn new(man: BigInt, exp: i64) -> Self {
        let mut d = Dyadic { man, exp };
        d.normalize();
        d
    }

    fn normalize(&mut self) {
        if self.man.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.man.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.man >>= tz;
            self.exp += tz as i64;
        }
    }

    pub fn zero() -> Self {
        Dyadic { man: BigInt::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Dyadic { man: BigInt::one(), exp: 0 }
    }

    /// `2^e`.
    pub fn pow2(e: i64) -> Self {
        Dyadic { man: BigInt::one(), exp: e }
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Dyadic::new(n, 0)
    }

    pub fn from_i64(n: i64) -> Self {
        Dyadic::new(BigInt::from(n), 0)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.man
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.man.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.man.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.man.is_negative()
    }

    /// Number of significant bits of the mantissa.
    pub fn man_bits(&self) -> u64 {
        self.man.bits()
    }

    /// Position of the most significant bit: the value `v` satisfies
    /// `2^(msb-1) <= |v| < 2^msb` (for nonzero `v`).
    pub fn msb(&self) -> i64 {
        debug_assert!(!self.is_zero());
        self.man.bits() as i64 + self.exp
    }

    pub fn neg(&self) -> Self {
        Dyadic { man: -&self.man, exp: self.exp }
    }

    pub fn abs(&self) -> Self {
        Dyadic { man: self.man.abs(), exp: self.exp }
    }

    /// Exact multiplication by a power of two.
    pub fn mul_pow2(&self, e: i64) -> Self {
        if self.is_zero() {
            return Dyadic::zero();
        }
        Dyadic { man: self.man.clone(), exp: self.exp + e }
    }

    pub fn add(&self, other: &Dyadic) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let (lo_exp, a, b) = if self.exp <= other.exp {
            (self.exp, &self.man, &other.man)
        } else {
            (other.exp, &other.man, &self.man)
        };
        let shift = (self.exp.max(other.exp) - lo_exp) as u64;
        let man = a + (b << shift);
        Dyadic::new(man, lo_exp)
    }

    pub fn sub(&self, other: &Dyadic) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Dyadic) -> Self {
        if self.is_zero() || other.is_zero() {
            return Dyadic::zero();
        }
        Dyadic::new(&self.man * &other.man, self.exp + other.exp)
    }

    pub fn mul_int(&self, n: &BigInt) -> Self {
        if n.is_zero() {
            return Dyadic::zero();
        }
        Dyadic::new(&self.man * n, self.exp)
    }

    pub fn cmp(&self, other: &Dyadic) -> Ordering {
        let sa = self.man.sign();
        let sb = other.man.sign();
        match (sa, sb) {
            (IntSign::Minus, IntSign::NoSign) | (IntSign::Minus, IntSign::Plus) => {
                return Ordering::Less
            }
            (IntSign::NoSign, IntSign::Plus) => return Ordering::Less,
            (IntSign::Plus, IntSign::NoSign) | (IntSign::Plus, IntSign::Minus) => {
                return Ordering::Greater
            }
            (IntSign::NoSign, IntSign::Minus) => return Ordering::Greater,
            (IntSign::NoSign, IntSign::NoSign) => return Ordering::Equal,
            _ => {}
        }
        // Same nonzero sign: compare magnitudes by top-bit position first.
        let ma = self.msb();
        let mb = other.msb();
        if ma != mb {
            let mag = if ma < mb { Ordering::Less } else { Ordering::Greater };
            return if sa == IntSign::Plus { mag } else { mag.reverse() };
        }
        match self.sub(other).man.sign() {
            IntSign::Minus => Ordering::Less,
            IntSign::NoSign => Ordering::Equal,
            IntSign::Plus => Ordering::Greater,
        }
    }

    pub fn min(&self, other: &Dyadic) -> Dyadic {
        if self.cmp(other) == Ordering::Greater { other.clone() } else { self.clone() }
    }

    pub fn max(&self, other: &Dyadic) -> Dyadic {
        if self.cmp(other) == Ordering::Less { other.clone() } else { self.clone() }
    }

    /// Round to at most `prec` mantissa bits, returning the rounded value and
    /// the exact absolute rounding error.
    pub fn round_with_err(&self, prec: u64, round: Round) -> (Dyadic, Dyadic) {
        let bits = self.man.bits();
        if bits <= prec {
            return (self.clone(), Dyadic::zero());
        }
        let drop = bits - prec;
        let negative = self.man.is_negative();
        let mag = self.man.magnitude().clone();
        let kept = &mag >> drop;
        let rem = &mag - (&kept << drop);
        let rem_is_zero = rem.is_zero();
        // Decide whether to bump the kept magnitude by one ulp.
        let bump = match round {
            Round::Down => !rem_is_zero && negative,
            Round::Up => !rem_is_zero && !negative,
            Round::Nearest => {
                // ties away from zero
                !rem_is_zero && (&rem << 1u8) >= (BigUint::one() << drop)
            }
        };
        let (kept, err_mag) = if bump {
            let k = kept + 1u8;
            let err = (&k << drop) - &mag;
            (k, err)
        } else {
            (kept.clone(), rem)
        };
        let man = if negative {
            -BigInt::from(kept)
        } else {
            BigInt::from(kept)
        };
        let rounded = Dyadic::new(man, self.exp + drop as i64);
        let err = Dyadic::new(BigInt::from(err_mag), self.exp);
        (rounded, err)
    }

    /// Round to at most `prec` bits in the given direction.
    pub fn round_dir(&self, prec: u64, round: Round) -> Dyadic {
        self.round_with_err(prec, round).0
    }

    /// Greatest integer `<= self`.
    pub fn floor_int(&self) -> BigInt {
        if self.exp >= 0 {
            return &self.man << self.exp as u64;
        }
        let shift = (-self.exp) as u64;
        let mag = self.man.magnitude();
        let q = mag >> shift;
        if self.man.is_negative() {
            let exact = (&q << shift) == *mag;
            let q = BigInt::from(q);
            if exact { -q } else { -q - 1 }
        } else {
            BigInt::from(q)
        }
    }

    /// Least integer `>= self`.
    pub fn ceil_int(&self) -> BigInt {
        -self.neg().floor_int()
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.man << self.exp as u64)
        } else {
            BigRational::new(self.man.clone(), BigInt::one() << (-self.exp) as u64)
        }
    }

    pub fn cmp_rational(&self, q: &BigRational) -> Ordering {
        // self = man * 2^exp; compare man * 2^exp * denom with numer.
        let d = q.denom();
        let n = q.numer();
        let lhs_base = &self.man * d;
        if self.exp >= 0 {
            (lhs_base << self.exp as u64).cmp(n)
        } else {
            lhs_base.cmp(&(n << (-self.exp) as u64))
        }
    }

    /// Directed conversion from a rational with roughly `prec` result bits.
    pub fn from_rational(q: &BigRational, prec: u64, round: Round) -> Dyadic {
        if q.is_zero() {
            return Dyadic::zero();
        }
        let n = q.numer();
        let d = q.denom();
        debug_assert!(d.is_positive());
        let shift = prec as i64 + d.bits() as i64 - n.bits() as i64 + 2;
        let (scaled, exp) = if shift >= 0 {
            (n << shift as u64, -shift)
        } else {
            // Numerator already has far more bits than needed; no upscale.
            (n.clone(), 0)
        };
        let q_int = div_int_dir(&scaled, d, round);
        Dyadic::new(q_int, exp).round_dir(prec + 2, round)
    }

    /// Directed division `self / other` with roughly `prec` result bits.
    pub fn div(&self, other: &Dyadic, prec: u64, round: Round) -> Dyadic {
        assert!(!other.is_zero(), "dyadic division by zero");
        if self.is_zero() {
            return Dyadic::zero();
        }
        let shift = prec as i64 + other.man.bits() as i64 - self.man.bits() as i64 + 2;
        let (num, num_exp) = if shift >= 0 {
            (&self.man << shift as u64, self.exp - shift)
        } else {
            (self.man.clone(), self.exp)
        };
        let q_int = div_int_dir(&num, &other.man, round);
        Dyadic::new(q_int, num_exp - other.exp)
    }

    /// Directed square root (`self >= 0`) with roughly `prec` result bits.
    pub fn sqrt(&self, prec: u64, round: Round) -> Dyadic {
        assert!(!self.is_negative(), "dyadic sqrt of negative value");
        if self.is_zero() {
            return Dyadic::zero();
        }
        // Scale mantissa so the exponent is even and the mantissa has ~2*prec bits.
        let want = 2 * (prec + 2);
        let bits = self.man.bits();
        let mut t = want.saturating_sub(bits) as i64;
        if (self.exp - t) % 2 != 0 {
            t += 1;
        }
        let (m, e) = if t >= 0 {
            (&self.man << t as u64, self.exp - t)
        } else {
            // Mantissa longer than needed; keep exactness, just fix parity.
            (self.man.clone() << 1u8, self.exp - 1)
        };
        debug_assert!(e % 2 == 0);
        let r = num_integer::Roots::sqrt(&m);
        let exact = (&r * &r) == m;
        let r = match round {
            Round::Down => r,
            Round::Up | Round::Nearest => {
                if exact {
                    r
                } else {
                    r + 1u8
                }
            }
        };
        Dyadic::new(r, e / 2)
    }

    /// Best-effort conversion for display purposes only.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        // Use the top 64 bits of the mantissa.
        let bits = self.man.bits();
        let (head, exp_adj) = if bits > 64 {
            let shift = bits - 64;
            (self.man.clone() >> shift, self.exp + shift as i64)
        } else {
            (self.man.clone(), self.exp)
        };
        let h: f64 = head.to_string().parse().unwrap_or(0.0);
        h * 2.0f64.powi(exp_adj.clamp(-2000, 2000) as i32)
    }

    /// Exact decimal representation. Every dyadic has a finite decimal
    /// expansion, so this is lossless.
    pub fn to_decimal_string(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let neg = self.man.is_negative();
        let mag = self.man.magnitude().clone();
        let body = if self.exp >= 0 {
            (BigInt::from(mag) << self.exp as u64).to_string()
        } else {
            let s = (-self.exp) as u64;
            // man / 2^s = man * 5^s / 10^s
            let scaled = BigInt::from(mag) * BigInt::from(5u8).pow(s as u32);
            let digits = scaled.to_string();
            let s = s as usize;
            let mut out = if digits.len() <= s {
                let mut o = String::from("0.");
                o.extend(std::iter::repeat('0').take(s - digits.len()));
                o.push_str(&digits);
                o
            } else {
                let (int_part, frac_part) = digits.split_at(digits.len() - s);
                format!("{int_part}.{frac_part}")
            };
            while out.ends_with('0') {
                out.pop();
            }
            if out.ends_with('.') {
                out.pop();
            }
            out
        };
        if neg {
            format!("-{body}")
        } else {
            body
        }
    }

    /// Parse an exact decimal produced by [`Dyadic::to_decimal_string`].
    /// Rejects decimals that are not dyadic.
    pub fn from_decimal_string(s: &str) -> Result<Dyadic, String> {
        let s = s.trim();
        let (neg, rest) = match s.strip_prefix('-') {
            Some(r) => (true, r),
            None => (false, s),
        };
        let (int_part, frac_part) = match rest.split_once('.') {
            Some((i, f)) => (i, f),
            None => (rest, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(format!("empty decimal literal: {s:?}"));
        }
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
        {
            return Err(format!("invalid decimal literal: {s:?}"));
        }
        let digits = format!("{int_part}{frac_part}");
        let n: BigInt = digits.parse().map_err(|e| format!("{e}"))?;
        let f = frac_part.len() as u32;
        // n / 10^f = n / (2^f * 5^f); dyadic iff 5^f divides n.
        let five_pow = BigInt::from(5u8).pow(f);
        let (q, r) = n.div_rem(&five_pow);
        if !r.is_zero() {
            return Err(format!("decimal {s:?} is not a dyadic rational"));
        }
        let man = if neg { -q } else { q };
        Ok(Dyadic::new(man, -(f as i64)))
    }
}

/// Integer division with explicit rounding direction.
fn div_int_dir(n: &BigInt, d: &BigInt, round: Round) -> BigInt {
    match round {
        Round::Down => n.div_floor(d),
        Round::Up => n.div_ceil(d),
        Round::Nearest => {
            let (q, r) = n.div_mod_floor(d);
            // r has the sign of d here; compare 2|r| with |d|
            if (&r << 1u8).magnitude() >= d.magnitude() {
                q + 1u8
            } else {
                q
            }
        }
    }
}

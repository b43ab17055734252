//! Truncated p-adic expansions, balls and coset representatives.
//!
//! A [`PAdicApprox`] stores finitely many base-p digits over an explicit
//! exponent window `[lo, hi)`. The digits name the exact rational
//! v = sum of digit_i * p^i, and the object denotes the coset v + p^hi Z_p:
//! everything below `hi` is known, everything at `hi` and above is not.
//! Two approximations are equal exactly when they name the same coset.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest digit window a single approximation may carry. Windows anywhere
/// near this indicate a misuse of the desk-scale model.
const MAX_WINDOW: i64 = 1 << 16;

/// A validated prime, the base of every expansion in a computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Prime(u32);

impl Prime {
    /// Checks primality by trial division; desk-scale primes only.
    pub fn new(p: u32) -> Result<Prime> {
        if p < 2 {
            return Err(Error::NotPrime(p as u64));
        }
        let mut d = 2u64;
        let pu = p as u64;
        while d * d <= pu {
            if pu.is_multiple_of(d) {
                return Err(Error::NotPrime(pu));
            }
            d += 1;
        }
        Ok(Prime(p))
    }

    pub fn value(&self) -> u32 {
        self.0
    }

    /// p^e as u64, or `TooLarge` if it does not fit.
    pub fn pow_u64(&self, e: u32) -> Result<u64> {
        (self.0 as u64)
            .checked_pow(e)
            .ok_or_else(|| Error::TooLarge(format!("{}^{} exceeds u64", self.0, e)))
    }

    fn pow_big(&self, e: u32) -> BigUint {
        BigUint::from(self.0).pow(e)
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A truncated p-adic expansion: digits over the window `[lo, hi)`,
/// denoting the coset (sum of digit_i * p^i) + p^hi Z_p.
///
/// Exponents below `lo` carry digit zero. The window is representation,
/// not information: `[0, 3)` with digits `0 1 0` and `[1, 3)` with digits
/// `1 0` are the same element. `hi` is information: different `hi` means
/// a different coset, hence a different element.
#[derive(Debug, Clone)]
pub struct PAdicApprox {
    prime: Prime,
    lo: i32,
    digits: Vec<u32>,
}

impl PAdicApprox {
    /// Builds an approximation from explicit digits; `digits[i]` is the
    /// coefficient of p^(lo + i) and the window is `[lo, lo + len)`.
    pub fn new(prime: Prime, lo: i32, digits: Vec<u32>) -> Result<PAdicApprox> {
        if digits.len() as i64 > MAX_WINDOW {
            return Err(Error::TooLarge(format!(
                "digit window of {} exceeds {MAX_WINDOW}",
                digits.len()
            )));
        }
        for &d in &digits {
            if d >= prime.value() {
                return Err(Error::DigitRange {
                    digit: d,
                    prime: prime.value() as u64,
                });
            }
        }
        Ok(PAdicApprox { prime, lo, digits })
    }

    /// The zero class 0 + p^hi Z_p, an empty window `[hi, hi)`.
    pub fn zero(prime: Prime, hi: i32) -> PAdicApprox {
        PAdicApprox {
            prime,
            lo: hi,
            digits: Vec::new(),
        }
    }

    /// The rational numer / p^denom_exp as a coset mod p^hi. Negative
    /// numerators wrap to their p-complement, as they must: -1 and
    /// p^hi - p^denom_exp... name the same class mod p^hi.
    pub fn from_ratio(prime: Prime, numer: i64, denom_exp: u32, hi: i32) -> Result<PAdicApprox> {
        let lo = -(denom_exp as i64);
        if (hi as i64) <= lo {
            return Ok(PAdicApprox::zero(prime, hi));
        }
        let width = hi as i64 - lo;
        if width > MAX_WINDOW {
            return Err(Error::TooLarge(format!(
                "digit window of {width} exceeds {MAX_WINDOW}"
            )));
        }
        let modulus = BigInt::from(prime.pow_big(width as u32));
        let mut a = BigInt::from(numer) % &modulus;
        if a.is_negative() {
            a += &modulus;
        }
        let mut a: BigUint = a.to_biguint().expect("nonnegative");
        let p = BigUint::from(prime.value());
        let mut digits = Vec::with_capacity(width as usize);
        for _ in 0..width {
            let d = (&a % &p).to_u32().expect("digit < p");
            digits.push(d);
            a /= &p;
        }
        Ok(PAdicApprox {
            prime,
            lo: lo as i32,
            digits,
        })
    }

    /// The integer n as a coset mod p^hi.
    pub fn from_integer(prime: Prime, n: i64, hi: i32) -> PAdicApprox {
        PAdicApprox::from_ratio(prime, n, 0, hi).expect("integer window is within limits")
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    /// Lower edge of the digit window (inclusive).
    pub fn lo(&self) -> i32 {
        self.lo
    }

    /// Upper edge of the digit window (exclusive): digits at exponent hi
    /// and above are unknown.
    pub fn hi(&self) -> i32 {
        self.lo + self.digits.len() as i32
    }

    /// Digit at the given exponent; zero below the window. Exponents at or
    /// above `hi` are not known and may not be asked for.
    pub fn digit(&self, exponent: i32) -> u32 {
        debug_assert!(exponent < self.hi(), "digit above the known window");
        if exponent < self.lo {
            0
        } else {
            self.digits[(exponent - self.lo) as usize]
        }
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    /// Exponent of the lowest nonzero digit, or None when every known
    /// digit vanishes (the class of zero; the true valuation is >= hi).
    pub fn valuation(&self) -> Option<i32> {
        self.digits
            .iter()
            .position(|&d| d != 0)
            .map(|i| self.lo + i as i32)
    }

    pub fn is_zero_class(&self) -> bool {
        self.digits.iter().all(|&d| d == 0)
    }

    /// True when no nonzero digit sits below exponent 0, i.e. the value
    /// lies in Z_p as far as the window can tell.
    pub fn is_integral(&self) -> bool {
        match self.valuation() {
            Some(v) => v >= 0,
            None => true,
        }
    }

    /// Truncation to the coset mod p^n: digits at exponent n and above are
    /// dropped, the window becomes `[min(lo, n), n)`. Truncating below the
    /// known window is fine (the class of zero); asking for n > hi is not.
    pub fn reduce(&self, n: i32) -> Result<PAdicApprox> {
        if n > self.hi() {
            return Err(Error::InsufficientPrecision {
                hi: self.hi(),
                needed: n,
            });
        }
        if n <= self.lo {
            return Ok(PAdicApprox::zero(self.prime, n));
        }
        Ok(PAdicApprox {
            prime: self.prime,
            lo: self.lo,
            digits: self.digits[..(n - self.lo) as usize].to_vec(),
        })
    }

    /// Widens the window upward with zero digits. This asserts the digits
    /// of the underlying element really are zero up to `new_hi`; it is
    /// only sound for elements known exactly, such as parsed rationals and
    /// coset representatives, and is how those acquire the precision an
    /// operation demands.
    pub fn zero_extend(&self, new_hi: i32) -> PAdicApprox {
        if new_hi <= self.hi() {
            return self.clone();
        }
        let mut digits = self.digits.clone();
        digits.resize((new_hi - self.lo) as usize, 0);
        PAdicApprox {
            prime: self.prime,
            lo: self.lo,
            digits,
        }
    }

    /// Drops zero digits at the bottom of the window. Pure normalization:
    /// the element is unchanged.
    pub fn tighten(&self) -> PAdicApprox {
        match self.valuation() {
            None => PAdicApprox::zero(self.prime, self.hi()),
            Some(v) => PAdicApprox {
                prime: self.prime,
                lo: v,
                digits: self.digits[(v - self.lo) as usize..].to_vec(),
            },
        }
    }

    /// Digit-wise sum with carry. The result window is
    /// `[min(lo), min(hi))`: the sum is only known up to the coarser of
    /// the two moduli.
    pub fn add(&self, other: &PAdicApprox) -> Result<PAdicApprox> {
        if self.prime != other.prime {
            return Err(Error::PrimeMismatch(
                self.prime.value() as u64,
                other.prime.value() as u64,
            ));
        }
        let p = self.prime.value();
        let lo = self.lo.min(other.lo);
        let hi = self.hi().min(other.hi());
        if hi <= lo {
            return Ok(PAdicApprox::zero(self.prime, hi));
        }
        let mut digits = Vec::with_capacity((hi - lo) as usize);
        let mut carry = 0u32;
        for e in lo..hi {
            let s = self.digit_or_zero(e) + other.digit_or_zero(e) + carry;
            digits.push(s % p);
            carry = s / p;
        }
        Ok(PAdicApprox {
            prime: self.prime,
            lo,
            digits,
        })
    }

    /// Additive inverse mod p^hi: the p-complement. The lowest nonzero
    /// digit d becomes p - d, every digit above it becomes p - 1 - d.
    pub fn negate(&self) -> PAdicApprox {
        let p = self.prime.value();
        let mut digits = self.digits.clone();
        if let Some(first) = digits.iter().position(|&d| d != 0) {
            digits[first] = p - digits[first];
            for d in &mut digits[first + 1..] {
                *d = p - 1 - *d;
            }
        }
        PAdicApprox {
            prime: self.prime,
            lo: self.lo,
            digits,
        }
    }

    pub fn sub(&self, other: &PAdicApprox) -> Result<PAdicApprox> {
        self.add(&other.negate())
    }

    /// The fractional digits: the class mod p^0 = mod Z_p. Same as
    /// `reduce(0)`.
    pub fn fractional_part(&self) -> Result<PAdicApprox> {
        self.reduce(0)
    }

    /// The residue of an integral element mod p^k as an ordinary integer,
    /// for 0 <= k <= hi.
    pub fn residue_u64(&self, k: i32) -> Result<u64> {
        if k > self.hi() {
            return Err(Error::InsufficientPrecision {
                hi: self.hi(),
                needed: k,
            });
        }
        if !self.is_integral() {
            return Err(Error::OutsideUnitBall(self.to_string()));
        }
        let mut acc: u64 = 0;
        let p = self.prime.value() as u64;
        for e in (0..k).rev() {
            let d = if e < self.lo {
                0
            } else {
                self.digits[(e - self.lo) as usize] as u64
            };
            acc = acc
                .checked_mul(p)
                .and_then(|a| a.checked_add(d))
                .ok_or_else(|| Error::TooLarge(format!("residue mod {p}^{k} exceeds u64")))?;
        }
        Ok(acc)
    }

    /// The exact rational named by the digits.
    pub fn value_rational(&self) -> BigRational {
        let p = BigInt::from(self.prime.value());
        let mut numer = BigInt::zero();
        for &d in self.digits.iter().rev() {
            numer = numer * &p + BigInt::from(d);
        }
        // numer * p^lo
        if self.lo >= 0 {
            BigRational::from_integer(numer * p.pow(self.lo as u32))
        } else {
            BigRational::new(numer, p.pow((-self.lo) as u32))
        }
    }

    /// The digit value as "a" or "a/p^m" in lowest terms.
    pub fn to_rational_string(&self) -> String {
        let v = self.value_rational();
        if v.denom().is_one() {
            v.numer().to_string()
        } else {
            format!("{}/{}", v.numer(), v.denom())
        }
    }

    fn digit_or_zero(&self, exponent: i32) -> u32 {
        if exponent < self.lo || exponent >= self.hi() {
            0
        } else {
            self.digits[(exponent - self.lo) as usize]
        }
    }

    /// First exponent carrying a nonzero digit plus the digits from there
    /// up: the canonical form behind Eq/Ord/Hash.
    fn trimmed(&self) -> (i32, &[u32]) {
        match self.valuation() {
            None => (self.hi(), &[]),
            Some(v) => (v, &self.digits[(v - self.lo) as usize..]),
        }
    }

    /// Parses rational sugar "a" or "a/b", b a power of the prime, as the
    /// coset numer/p^m + p^hi Z_p.
    pub fn parse_rational(text: &str, prime: Prime, hi: i32) -> Result<PAdicApprox> {
        let t = text.trim();
        let (num_s, den_s) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), Some(d.trim())),
            None => (t, None),
        };
        let numer: i64 = num_s
            .parse()
            .map_err(|_| Error::parse(0, format!("'{num_s}' is not an integer")))?;
        let denom_exp = match den_s {
            None => 0,
            Some(d) => {
                let mut den: u64 = d
                    .parse()
                    .map_err(|_| Error::parse(0, format!("'{d}' is not an integer")))?;
                let p = prime.value() as u64;
                let mut m = 0u32;
                while den > 1 && den.is_multiple_of(p) {
                    den /= p;
                    m += 1;
                }
                if den != 1 {
                    return Err(Error::DenominatorNotPPower {
                        denom: d.to_string(),
                        prime: p,
                    });
                }
                m
            }
        };
        PAdicApprox::from_ratio(prime, numer, denom_exp, hi)
    }

    /// Parses either textual form: the digit form (which must carry the
    /// same prime and at least hi digits, and is reduced to hi) or the
    /// rational sugar (exact, so it provides any hi asked for).
    pub fn parse_flexible(text: &str, prime: Prime, hi: i32) -> Result<PAdicApprox> {
        if text.contains('|') {
            let x = PAdicApprox::parse(text)?;
            if x.prime() != prime {
                return Err(Error::PrimeMismatch(
                    x.prime().value() as u64,
                    prime.value() as u64,
                ));
            }
            x.reduce(hi)
        } else {
            PAdicApprox::parse_rational(text, prime, hi)
        }
    }

    /// Parses the textual digit form, e.g. "1 0 1 | p=2, lo=-1". An empty
    /// digit list ("| p=2, lo=0") is the zero class mod p^lo.
    pub fn parse(text: &str) -> Result<PAdicApprox> {
        let bar = text
            .find('|')
            .ok_or_else(|| Error::parse(text.len(), "expected '|' before the p=, lo= trailer"))?;
        let (digit_part, trailer) = (&text[..bar], &text[bar + 1..]);
        let mut p: Option<u32> = None;
        let mut lo: Option<i32> = None;
        for raw in trailer.split(',') {
            let item = raw.trim();
            if item.is_empty() {
                continue;
            }
            let pos = bar + 1 + (raw.as_ptr() as usize - trailer.as_ptr() as usize);
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::parse(pos, format!("expected key=value, got '{item}'")))?;
            match (key.trim(), value.trim()) {
                ("p", v) => {
                    p =
                        Some(v.parse().map_err(|_| {
                            Error::parse(pos, format!("'{v}' is not a valid prime"))
                        })?)
                }
                ("lo", v) => {
                    lo =
                        Some(v.parse().map_err(|_| {
                            Error::parse(pos, format!("'{v}' is not a valid exponent"))
                        })?)
                }
                (k, _) => return Err(Error::parse(pos, format!("unknown key '{k}'"))),
            }
        }
        let p = p.ok_or_else(|| Error::parse(text.len(), "missing p= in trailer"))?;
        let lo = lo.ok_or_else(|| Error::parse(text.len(), "missing lo= in trailer"))?;
        let prime = Prime::new(p)?;
        let mut digits = Vec::new();
        for tok in digit_part.split_whitespace() {
            let pos = tok.as_ptr() as usize - text.as_ptr() as usize;
            let d: u32 = tok
                .parse()
                .map_err(|_| Error::parse(pos, format!("'{tok}' is not a digit")))?;
            digits.push(d);
        }
        PAdicApprox::new(prime, lo, digits)
    }
}

impl PartialEq for PAdicApprox {
    fn eq(&self, other: &Self) -> bool {
        self.prime == other.prime && self.hi() == other.hi() && self.trimmed() == other.trimmed()
    }
}

impl Eq for PAdicApprox {}

impl std::hash::Hash for PAdicApprox {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        let (start, digits) = self.trimmed();
        self.prime.hash(state);
        self.hi().hash(state);
        start.hash(state);
        digits.hash(state);
    }
}

impl Ord for PAdicApprox {
    /// Total order by (prime, hi, digit value, window). Digits compare
    /// from the top of the window down, so no big integers are built.
    fn cmp(&self, other: &Self) -> Ordering {
        self.prime
            .cmp(&other.prime)
            .then_with(|| self.hi().cmp(&other.hi()))
            .then_with(|| {
                let lo = self.lo.min(other.lo);
                for e in (lo..self.hi()).rev() {
                    let ord = self.digit_or_zero(e).cmp(&other.digit_or_zero(e));
                    if ord != Ordering::Equal {
                        return ord;
                    }
                }
                Ordering::Equal
            })
    }
}

impl PartialOrd for PAdicApprox {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PAdicApprox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.digits {
            write!(f, "{d} ")?;
        }
        write!(f, "| p={}, lo={}", self.prime, self.lo)
    }
}

/// The ball c + p^level Z_p. The center is stored reduced mod p^level, so
/// equal balls have equal fields.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ball {
    level: i32,
    center: PAdicApprox,
}

impl Ball {
    /// Builds the ball center + p^level Z_p. The center must carry digits
    /// up to the level; it is reduced to canonical form.
    pub fn new(level: i32, center: &PAdicApprox) -> Result<Ball> {
        Ok(Ball {
            level,
            center: center.reduce(level)?.tighten(),
        })
    }

    /// The unit ball Z_p.
    pub fn unit(prime: Prime) -> Ball {
        Ball {
            level: 0,
            center: PAdicApprox::zero(prime, 0),
        }
    }

    /// The ball p^level Z_p around zero.
    pub fn zero_centered(prime: Prime, level: i32) -> Ball {
        Ball {
            level,
            center: PAdicApprox::zero(prime, level),
        }
    }

    pub fn prime(&self) -> Prime {
        self.center.prime()
    }

    /// n in c + p^n Z_p; larger level means smaller ball.
    pub fn level(&self) -> i32 {
        self.level
    }

    pub fn center(&self) -> &PAdicApprox {
        &self.center
    }

    /// Splits into the p^(n2 - level) disjoint sub-balls of level n2 whose
    /// union is this ball, ordered by center. Splitting toward a coarser
    /// level is a refinement-direction error.
    pub fn split(&self, n2: i32) -> Result<Vec<Ball>> {
        if n2 < self.level {
            return Err(Error::RefinementDirection {
                have: self.level,
                requested: n2,
            });
        }
        let count_exp = (n2 - self.level) as u32;
        let count = self.prime().pow_u64(count_exp)?;
        if count > MAX_WINDOW as u64 {
            return Err(Error::TooLarge(format!(
                "splitting into {count} sub-balls exceeds {MAX_WINDOW}"
            )));
        }
        let base = self.center.zero_extend(n2);
        let mut out = Vec::with_capacity(count as usize);
        for r in 0..count {
            // r * p^level, digits of r shifted up by the level.
            let offset = PAdicApprox::from_ratio(self.prime(), r as i64, 0, n2 - self.level)?;
            let offset = PAdicApprox::new(
                self.prime(),
                offset.lo() + self.level,
                offset.digits().to_vec(),
            )?;
            let center = base.add(&offset)?;
            out.push(Ball::new(n2, &center)?);
        }
        out.sort();
        Ok(out)
    }

    /// Whether x lies in this ball. x must be known at least to the
    /// ball's level.
    pub fn contains(&self, x: &PAdicApprox) -> Result<bool> {
        if x.prime() != self.prime() {
            return Err(Error::PrimeMismatch(
                x.prime().value() as u64,
                self.prime().value() as u64,
            ));
        }
        Ok(x.reduce(self.level)?.tighten() == self.center)
    }

    /// Whether this ball is contained in the other. Balls in Q_p are
    /// nested or disjoint, never partially overlapping.
    pub fn is_subset_of(&self, other: &Ball) -> bool {
        if self.prime() != other.prime() || self.level < other.level {
            return false;
        }
        self.center
            .reduce(other.level)
            .map(|c| c.tighten() == other.center)
            .unwrap_or(false)
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} + {}^{} Z_{}",
            self.center.to_rational_string(),
            self.prime(),
            self.level,
            self.prime()
        )
    }
}

/// Representatives of the cosets of Z_p inside p^-m Z_p: the fractions
/// a / p^m for 0 <= a < p^m, as exact expansions over the window [-m, 0),
/// in ascending order of a.
pub fn coset_reps(prime: Prime, m: i32) -> Result<Vec<PAdicApprox>> {
    if m < 0 {
        return Err(Error::Negative {
            name: "coset index m",
            value: m as i64,
        });
    }
    let count = prime.pow_u64(m as u32)?;
    if count > MAX_WINDOW as u64 {
        return Err(Error::TooLarge(format!(
            "{count} coset representatives exceed {MAX_WINDOW}"
        )));
    }
    let mut out = Vec::with_capacity(count as usize);
    for a in 0..count {
        out.push(PAdicApprox::from_ratio(prime, a as i64, m as u32, 0)?);
    }
    Ok(out)
}

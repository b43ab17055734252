//! Characters of Z_p at finite level and Fourier analysis on the unit
//! ball.
//!
//! A character is indexed by a fraction a/p^k in lowest terms; it sends
//! x to exp(2*pi*i*a*x/p^k), which only depends on x mod p^k. The p^n
//! characters of level <= n are exactly the characters of Z/p^n, so
//! analysis and synthesis at level n are the DFT of that group: the naive
//! quadratic sum is kept as the oracle, the radix-p recursion is the fast
//! path.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::padic::{PAdicApprox, Prime};
use crate::step::StepFunction;

/// Dense transforms materialize p^n complex values; this caps n.
const MAX_DENSE: u64 = 1 << 22;

/// A character of Z_p: x -> exp(2*pi*i * index * x / p^level), stored in
/// canonical form (level 0 and index 0, or level >= 1 and p not dividing
/// index).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Character {
    prime: Prime,
    level: u32,
    index: u64,
}

impl Character {
    /// The trivial character, constant 1.
    pub fn trivial(prime: Prime) -> Character {
        Character {
            prime,
            level: 0,
            index: 0,
        }
    }

    /// Builds index/p^level, canonicalizing a non-reduced fraction.
    pub fn new(prime: Prime, level: u32, index: u64) -> Result<Character> {
        let modulus = prime.pow_u64(level)?;
        if index >= modulus {
            return Err(Error::Invalid(format!(
                "character index {index} not below p^k = {modulus}"
            )));
        }
        let p = prime.value() as u64;
        let (mut level, mut index) = (level, index);
        if index == 0 {
            level = 0;
        } else {
            while level > 0 && index % p == 0 {
                index /= p;
                level -= 1;
            }
        }
        Ok(Character {
            prime,
            level,
            index,
        })
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    /// k in a/p^k; the character is constant on balls of this level.
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn is_trivial(&self) -> bool {
        self.level == 0
    }

    /// Value at an integer residue r (taken mod p^level). The angle is
    /// reduced mod p^level before multiplying out, so it stays in
    /// [0, 2*pi) and the evaluation error is a few ulps.
    pub fn eval_residue(&self, r: u64) -> Complex64 {
        let modulus = self
            .prime
            .pow_u64(self.level)
            .expect("constructor bounded the level");
        let t = ((self.index as u128 * r as u128) % modulus as u128) as u64;
        Complex64::from_polar(1.0, TAU * t as f64 / modulus as f64)
    }

    /// Value at a point of Z_p carrying at least `level` digits.
    pub fn eval(&self, x: &PAdicApprox) -> Result<Complex64> {
        if x.prime() != self.prime {
            return Err(Error::PrimeMismatch(
                x.prime().value() as u64,
                self.prime.value() as u64,
            ));
        }
        Ok(self.eval_residue(x.residue_u64(self.level as i32)?))
    }

    /// The character materialized as a step function on Z_p at the given
    /// level, which must be at least the character's own level.
    pub fn to_step(&self, level: i32) -> Result<StepFunction> {
        if level < self.level as i32 {
            return Err(Error::RefinementDirection {
                have: self.level as i32,
                requested: level,
            });
        }
        let count = checked_dense_size(self.prime, level)?;
        let mut pieces = Vec::with_capacity(count as usize);
        for r in 0..count {
            pieces.push((
                PAdicApprox::from_integer(self.prime, r as i64, level),
                self.eval_residue(r),
            ));
        }
        StepFunction::new(self.prime, level, pieces)
    }

    /// Parses the textual form "a/d" where d is a power of the prime;
    /// non-reduced fractions are canonicalized.
    pub fn parse(text: &str, prime: Prime) -> Result<Character> {
        let (a_s, d_s) = text
            .split_once('/')
            .ok_or_else(|| Error::parse(0, format!("expected a/p^k, got '{text}'")))?;
        let index: u64 = a_s
            .trim()
            .parse()
            .map_err(|_| Error::parse(0, format!("'{a_s}' is not a character index")))?;
        let mut d: u64 = d_s
            .trim()
            .parse()
            .map_err(|_| Error::parse(0, format!("'{d_s}' is not a character modulus")))?;
        let p = prime.value() as u64;
        let mut level = 0u32;
        while d > 1 && d.is_multiple_of(p) {
            d /= p;
            level += 1;
        }
        if d != 1 {
            return Err(Error::DenominatorNotPPower {
                denom: d_s.trim().to_string(),
                prime: p,
            });
        }
        Character::new(prime, level, index)
    }
}

impl fmt::Display for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let modulus = self
            .prime
            .pow_u64(self.level)
            .expect("constructor bounded the level");
        write!(f, "{}/{}", self.index, modulus)
    }
}

/// All p^k canonical characters of level <= k, ordered by level then
/// index.
pub fn characters_up_to_level(prime: Prime, k: i32) -> Result<Vec<Character>> {
    if k < 0 {
        return Err(Error::Negative {
            name: "character level",
            value: k as i64,
        });
    }
    let total = checked_dense_size(prime, k)?;
    let p = prime.value() as u64;
    let mut out = Vec::with_capacity(total as usize);
    out.push(Character::trivial(prime));
    let mut modulus = 1u64;
    for j in 1..=(k as u32) {
        modulus *= p;
        for a in 1..modulus {
            if a % p != 0 {
                out.push(Character {
                    prime,
                    level: j,
                    index: a,
                });
            }
        }
    }
    debug_assert_eq!(out.len() as u64, total);
    Ok(out)
}

/// The coefficients of f at every character of level <= source_level,
/// zeros included, ordered by (level, index).
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoefficients {
    prime: Prime,
    source_level: i32,
    coeffs: Vec<(Character, Complex64)>,
}

impl FourierCoefficients {
    pub fn prime(&self) -> Prime {
        self.prime
    }

    /// The analysis level n: coefficients cover the p^n characters of
    /// level <= n.
    pub fn source_level(&self) -> i32 {
        self.source_level
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Character, Complex64)> {
        self.coeffs.iter().map(|(c, v)| (c, *v))
    }

    pub fn get(&self, character: &Character) -> Option<Complex64> {
        self.coeffs
            .binary_search_by(|(c, _)| c.cmp(character))
            .ok()
            .map(|i| self.coeffs[i].1)
    }

    /// Sum of squared coefficient moduli; equals the squared H-norm of
    /// the analyzed function (Parseval).
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|(_, v)| v.norm_sqr()).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("coefficient serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<FourierCoefficients> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            position: 0,
            message: e.to_string(),
        })
    }
}

#[derive(Serialize, Deserialize)]
struct CoeffRepr {
    character: String,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct CoefficientsRepr {
    p: u32,
    source_level: i32,
    coefficients: Vec<CoeffRepr>,
}

impl Serialize for FourierCoefficients {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        CoefficientsRepr {
            p: self.prime.value(),
            source_level: self.source_level,
            coefficients: self
                .coeffs
                .iter()
                .map(|(c, v)| CoeffRepr {
                    character: c.to_string(),
                    re: v.re,
                    im: v.im,
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FourierCoefficients {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = CoefficientsRepr::deserialize(deserializer)?;
        let prime = Prime::new(repr.p).map_err(D::Error::custom)?;
        let expected =
            characters_up_to_level(prime, repr.source_level).map_err(D::Error::custom)?;
        if expected.len() != repr.coefficients.len() {
            return Err(D::Error::custom(Error::Invalid(format!(
                "expected {} coefficients at source level {}, got {}",
                expected.len(),
                repr.source_level,
                repr.coefficients.len()
            ))));
        }
        let mut coeffs = Vec::with_capacity(expected.len());
        for (slot, entry) in expected.into_iter().zip(&repr.coefficients) {
            let named = Character::parse(&entry.character, prime).map_err(D::Error::custom)?;
            if named != slot {
                return Err(D::Error::custom(Error::Invalid(format!(
                    "coefficient for {named} out of order; expected {slot}"
                ))));
            }
            coeffs.push((slot, Complex64::new(entry.re, entry.im)));
        }
        Ok(FourierCoefficients {
            prime,
            source_level: repr.source_level,
            coeffs,
        })
    }
}

fn checked_dense_size(prime: Prime, level: i32) -> Result<u64> {
    let size = prime.pow_u64(level.max(0) as u32)?;
    if size > MAX_DENSE {
        return Err(Error::TooLarge(format!(
            "{size} points at level {level} exceed the dense-transform cap {MAX_DENSE}"
        )));
    }
    Ok(size)
}

fn ensure_on_unit_ball(f: &StepFunction) -> Result<()> {
    if f.supported_on_unit_ball() {
        return Ok(());
    }
    let ball = f
        .support()
        .into_iter()
        .find(|b| b.level() < 0 || !b.center().is_integral())
        .expect("a violating piece exists");
    Err(Error::OutsideUnitBall(ball.to_string()))
}

/// f as the dense vector of its values on the residues of Z/p^n, for f
/// supported on the unit ball and represented at level <= n.
fn dense_values(f: &StepFunction, n: i32) -> Result<Vec<Complex64>> {
    ensure_on_unit_ball(f)?;
    assert!(
        n >= f.level().max(0),
        "dense level below the function level"
    );
    let size = checked_dense_size(f.prime(), n)? as usize;
    let mut values = vec![Complex64::new(0.0, 0.0); size];
    let flv = f.level().max(0);
    let stride = f.prime().pow_u64(flv as u32)? as usize;
    for (center, &value) in f.pieces() {
        let base = center.residue_u64(flv)? as usize;
        let mut at = base;
        while at < size {
            values[at] = value;
            at += stride;
        }
    }
    Ok(values)
}

/// The step function at level n on Z_p with the given residue values;
/// exact zeros become absent pieces.
fn step_from_dense(prime: Prime, n: i32, values: &[Complex64]) -> Result<StepFunction> {
    let mut pieces = Vec::new();
    for (r, &v) in values.iter().enumerate() {
        if v != Complex64::new(0.0, 0.0) {
            pieces.push((PAdicApprox::from_integer(prime, r as i64, n), v));
        }
    }
    StepFunction::new(prime, n, pieces)
}

/// table[t] = exp(sign * 2*pi*i * t / len).
fn root_table(len: usize, sign: f64) -> Vec<Complex64> {
    (0..len)
        .map(|t| Complex64::from_polar(1.0, sign * TAU * t as f64 / len as f64))
        .collect()
}

/// The frequency of a character inside Z/p^n: chi_{a/p^j}(r) =
/// exp(2*pi*i * (a*p^(n-j)) * r / p^n).
fn frequency(prime: Prime, n: i32, chi: &Character) -> u64 {
    let shift = prime
        .pow_u64(n as u32 - chi.level())
        .expect("level <= n by construction");
    chi.index() * shift
}

/// In-place DFT of length p^k with the given root table (the table's
/// sign decides direction). Radix-p decimation in time: split by residue
/// classes mod p, transform each, recombine with twiddles from the
/// shared table at the current stride.
fn radix_p_pass(
    x: &mut [Complex64],
    scratch: &mut [Complex64],
    p: usize,
    table: &[Complex64],
    stride: usize,
) {
    let len = x.len();
    if len <= 1 {
        return;
    }
    let m = len / p;
    for q in 0..m {
        for s in 0..p {
            scratch[s * m + q] = x[q * p + s];
        }
    }
    x.copy_from_slice(&scratch[..len]);
    for s in 0..p {
        radix_p_pass(&mut x[s * m..(s + 1) * m], scratch, p, table, stride * p);
    }
    for (k, slot) in scratch[..len].iter_mut().enumerate() {
        let km = k % m;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut idx = 0usize;
        for s in 0..p {
            acc += table[idx * stride] * x[s * m + km];
            idx += k;
            if idx >= len {
                idx -= len;
            }
        }
        *slot = acc;
    }
    x.copy_from_slice(&scratch[..len]);
}

fn dft_in_place(values: &mut [Complex64], p: usize, sign: f64) {
    let len = values.len();
    if len <= 1 {
        return;
    }
    let table = root_table(len, sign);
    let mut scratch = vec![Complex64::new(0.0, 0.0); len];
    radix_p_pass(values, &mut scratch, p, &table, 1);
}

fn analysis_level(f: &StepFunction) -> i32 {
    f.level().max(0)
}

/// One Fourier coefficient by the direct sum p^-n * sum_r f(r) *
/// conj(chi(r)) over the residues at n = max(f.level, chi.level).
pub fn fourier_coefficient(f: &StepFunction, chi: &Character) -> Result<Complex64> {
    if f.prime() != chi.prime() {
        return Err(Error::PrimeMismatch(
            f.prime().value() as u64,
            chi.prime().value() as u64,
        ));
    }
    let n = analysis_level(f).max(chi.level() as i32);
    let values = dense_values(f, n)?;
    let len = values.len();
    let table = root_table(len, -1.0);
    let m = frequency(f.prime(), n, chi) as usize;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut idx = 0usize;
    for &v in &values {
        acc += v * table[idx];
        idx += m;
        if idx >= len {
            idx -= len;
        }
    }
    Ok(acc / len as f64)
}

/// Every coefficient at source level n = max(f.level, 0) by the naive
/// quadratic sum. This is the oracle the fast path is checked against.
pub fn fourier_all(f: &StepFunction) -> Result<FourierCoefficients> {
    let n = analysis_level(f);
    let values = dense_values(f, n)?;
    let len = values.len();
    let table = root_table(len, -1.0);
    let chars = characters_up_to_level(f.prime(), n)?;
    let mut coeffs = Vec::with_capacity(chars.len());
    for chi in chars {
        let m = frequency(f.prime(), n, &chi) as usize;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut idx = 0usize;
        for &v in &values {
            acc += v * table[idx];
            idx += m;
            if idx >= len {
                idx -= len;
            }
        }
        coeffs.push((chi, acc / len as f64));
    }
    Ok(FourierCoefficients {
        prime: f.prime(),
        source_level: n,
        coeffs,
    })
}

/// Every coefficient via the radix-p recursion; agrees with
/// [`fourier_all`] within float noise.
pub fn fast_transform(f: &StepFunction) -> Result<FourierCoefficients> {
    let n = analysis_level(f);
    let mut values = dense_values(f, n)?;
    let len = values.len();
    dft_in_place(&mut values, f.prime().value() as usize, -1.0);
    let chars = characters_up_to_level(f.prime(), n)?;
    let coeffs = chars
        .into_iter()
        .map(|chi| {
            let m = frequency(f.prime(), n, &chi) as usize;
            (chi, values[m] / len as f64)
        })
        .collect();
    Ok(FourierCoefficients {
        prime: f.prime(),
        source_level: n,
        coeffs,
    })
}

/// The orthogonal projection of f onto the span of characters of level
/// <= k, materialized at level max(f.level, k): analyze, zero the
/// coefficients above k, synthesize.
pub fn fourier_truncate(f: &StepFunction, k: i32) -> Result<StepFunction> {
    if k < 0 {
        return Err(Error::Negative {
            name: "truncation level",
            value: k as i64,
        });
    }
    let n = analysis_level(f);
    let target = n.max(k);
    let mut values = dense_values(f, n)?;
    let len = values.len();
    let p = f.prime().value() as usize;
    if k < n {
        dft_in_place(&mut values, p, -1.0);
        // A frequency m = a*p^(n-j) carries character level j = n - v_p(m),
        // so level <= k exactly when p^(n-k) divides m.
        let divisor = f.prime().pow_u64((n - k) as u32)? as usize;
        for (m, v) in values.iter_mut().enumerate() {
            if m % divisor != 0 {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        let scale = 1.0 / len as f64;
        for v in values.iter_mut() {
            *v *= scale;
        }
        dft_in_place(&mut values, p, 1.0);
    }
    let projected = step_from_dense(f.prime(), n, &values)?;
    projected.refine(target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::HaarMeasure;
    use crate::padic::Ball;

    fn p2() -> Prime {
        Prime::new(2).unwrap()
    }

    fn p3() -> Prime {
        Prime::new(3).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn int(p: Prime, n: i64, hi: i32) -> PAdicApprox {
        PAdicApprox::from_integer(p, n, hi)
    }

    /// A fixed function with uneven values for transform tests.
    fn sample(p: Prime, n: i32) -> StepFunction {
        let size = p.pow_u64(n as u32).unwrap();
        StepFunction::new(
            p,
            n,
            (0..size).map(|r| {
                let t = r as f64;
                (
                    int(p, r as i64, n),
                    c((t * 0.37 + 0.2).sin(), (t * 0.51 - 1.0).cos()),
                )
            }),
        )
        .unwrap()
    }

    #[test]
    fn characters_canonicalize() {
        let chi = Character::new(p2(), 2, 2).unwrap();
        assert_eq!((chi.level(), chi.index()), (1, 1));
        let triv = Character::new(p3(), 4, 0).unwrap();
        assert!(triv.is_trivial());
        assert_eq!(triv, Character::trivial(p3()));
        assert!(Character::new(p2(), 1, 2).is_err());
    }

    #[test]
    fn character_text_round_trips() {
        let chi = Character::new(p2(), 2, 3).unwrap();
        assert_eq!(chi.to_string(), "3/4");
        assert_eq!(Character::parse("3/4", p2()).unwrap(), chi);
        assert_eq!(Character::trivial(p2()).to_string(), "0/1");
        assert_eq!(
            Character::parse("0/1", p2()).unwrap(),
            Character::trivial(p2())
        );
        // Non-reduced input canonicalizes.
        assert_eq!(
            Character::parse("2/4", p2()).unwrap(),
            Character::new(p2(), 1, 1).unwrap()
        );
        assert!(Character::parse("1/6", p2()).is_err());
        assert!(Character::parse("5/4", p2()).is_err());
        assert!(Character::parse("1", p2()).is_err());
    }

    #[test]
    fn enumeration_counts_and_order() {
        let one = characters_up_to_level(p2(), 0).unwrap();
        assert_eq!(one, vec![Character::trivial(p2())]);

        let two = characters_up_to_level(p2(), 1).unwrap();
        assert_eq!(two.len(), 2);
        assert_eq!(two[1], Character::new(p2(), 1, 1).unwrap());

        let three = characters_up_to_level(p3(), 1).unwrap();
        assert_eq!(three.len(), 3);

        let eight = characters_up_to_level(p2(), 3).unwrap();
        assert_eq!(eight.len(), 8);
        for w in eight.windows(2) {
            assert!(w[0] < w[1], "ordered by (level, index)");
        }
        assert!(characters_up_to_level(p2(), -1).is_err());
    }

    #[test]
    fn evaluation_matches_roots_of_unity() {
        let x1 = int(p2(), 1, 4);
        assert_eq!(Character::trivial(p2()).eval(&x1).unwrap(), c(1.0, 0.0));
        let half = Character::new(p2(), 1, 1).unwrap();
        assert!((half.eval(&x1).unwrap() - c(-1.0, 0.0)).norm() < 1e-15);
        let quarter = Character::new(p2(), 2, 1).unwrap();
        assert!((quarter.eval(&x1).unwrap() - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn evaluation_is_multiplicative() {
        let chi = Character::new(p3(), 2, 5).unwrap();
        for a in 0..9i64 {
            for b in 0..9i64 {
                let x = int(p3(), a, 2);
                let y = int(p3(), b, 2);
                let xy = x.add(&y).unwrap();
                let lhs = chi.eval(&xy).unwrap();
                let rhs = chi.eval(&x).unwrap() * chi.eval(&y).unwrap();
                assert!((lhs - rhs).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn evaluation_requires_integral_points_with_enough_digits() {
        let chi = Character::new(p2(), 2, 1).unwrap();
        let frac = PAdicApprox::from_ratio(p2(), 1, 1, 2).unwrap();
        assert!(matches!(chi.eval(&frac), Err(Error::OutsideUnitBall(_))));
        let vague = int(p2(), 1, 1);
        assert!(matches!(
            chi.eval(&vague),
            Err(Error::InsufficientPrecision { .. })
        ));
    }

    #[test]
    fn shifts_scale_characters_by_unit_values() {
        let chi = Character::new(p3(), 2, 4).unwrap();
        let as_step = chi.to_step(2).unwrap();
        for h in 0..9i64 {
            let hp = int(p3(), h, 2);
            let shifted = as_step.shift(&hp).unwrap();
            let scaled = as_step.scale(chi.eval(&hp).unwrap());
            assert!(shifted.sub(&scaled).unwrap().sup_abs() < 1e-12);
        }
    }

    #[test]
    fn characters_are_orthonormal() {
        let m = HaarMeasure::normalized(p2());
        let chars = characters_up_to_level(p2(), 2).unwrap();
        for a in &chars {
            for b in &chars {
                let fa = a.to_step(2).unwrap();
                let fb = b.to_step(2).unwrap();
                let ip = m.inner_product(&fa, &fb).unwrap();
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((ip - c(expected, 0.0)).norm() < 1e-12, "<{a}, {b}> = {ip}");
            }
        }
    }

    #[test]
    fn coefficient_examples_for_the_half_ball() {
        let f = StepFunction::indicator(&Ball::zero_centered(p2(), 1));
        let c0 = fourier_coefficient(&f, &Character::trivial(p2())).unwrap();
        assert!((c0 - c(0.5, 0.0)).norm() < 1e-15);
        let c1 = fourier_coefficient(&f, &Character::new(p2(), 1, 1).unwrap()).unwrap();
        assert!((c1 - c(0.5, 0.0)).norm() < 1e-15);

        let constant = StepFunction::indicator(&Ball::unit(p2()));
        for chi in characters_up_to_level(p2(), 3).unwrap().iter().skip(1) {
            let cc = fourier_coefficient(&constant, chi).unwrap();
            assert!(cc.norm() < 1e-12, "full character sum vanishes");
        }
    }

    #[test]
    fn transforms_require_unit_ball_support() {
        let half = PAdicApprox::from_ratio(p2(), 1, 1, 0).unwrap();
        let outside = StepFunction::indicator(&Ball::new(0, &half).unwrap());
        assert!(matches!(
            fourier_all(&outside),
            Err(Error::OutsideUnitBall(_))
        ));
        assert!(matches!(
            fast_transform(&outside),
            Err(Error::OutsideUnitBall(_))
        ));
        assert!(matches!(
            fourier_truncate(&outside, 1),
            Err(Error::OutsideUnitBall(_))
        ));
    }

    #[test]
    fn zero_function_has_zero_coefficients() {
        let z = StepFunction::zero(p2(), 2);
        let all = fourier_all(&z).unwrap();
        assert_eq!(all.len(), 4);
        assert!(all.iter().all(|(_, v)| v == c(0.0, 0.0)));
        assert_eq!(all.energy(), 0.0);
    }

    #[test]
    fn fast_transform_matches_the_oracle() {
        for (p, n) in [(p2(), 3), (p2(), 5), (p3(), 2), (p3(), 3)] {
            let f = sample(p, n);
            let naive = fourier_all(&f).unwrap();
            let fast = fast_transform(&f).unwrap();
            assert_eq!(naive.len(), fast.len());
            for ((ca, va), (cb, vb)) in naive.iter().zip(fast.iter()) {
                assert_eq!(ca, cb);
                assert!((va - vb).norm() < 1e-12, "{ca}: {va} vs {vb}");
            }
        }
    }

    #[test]
    fn parseval_holds_on_the_sample() {
        let m = HaarMeasure::normalized(p3());
        let f = sample(p3(), 3);
        let fast = fast_transform(&f).unwrap();
        let norm2 = m.l2_norm(&f).unwrap().powi(2);
        assert!((fast.energy() - norm2).abs() < 1e-9 * norm2.max(1.0));
    }

    #[test]
    fn truncation_at_the_function_level_inverts() {
        let f = sample(p2(), 4);
        let back = fourier_truncate(&f, 4).unwrap();
        assert!(f.sub(&back).unwrap().sup_abs() < 1e-9);
    }

    #[test]
    fn truncation_is_a_projection() {
        let f = sample(p3(), 2);
        let once = fourier_truncate(&f, 1).unwrap();
        let twice = fourier_truncate(&once, 1).unwrap();
        assert!(once.sub(&twice).unwrap().sup_abs() < 1e-9);
    }

    #[test]
    fn truncation_error_is_monotone_in_k() {
        let m = HaarMeasure::normalized(p2());
        let f = sample(p2(), 4);
        let mut last = f64::INFINITY;
        for k in 0..=4 {
            let err = m
                .l2_distance(&f, &fourier_truncate(&f, k).unwrap())
                .unwrap();
            assert!(err <= last + 1e-12);
            last = err;
        }
        assert!(last < 1e-9);
    }

    #[test]
    fn truncation_to_constants_takes_the_mean() {
        let f = StepFunction::indicator(&Ball::zero_centered(p2(), 1));
        let t = fourier_truncate(&f, 0).unwrap();
        assert_eq!(t.level(), 1);
        for r in 0..2i64 {
            let v = t.evaluate(&int(p2(), r, 1)).unwrap();
            assert!((v - c(0.5, 0.0)).norm() < 1e-15);
        }
        // Constants are fixed by the projection onto constants.
        let g = StepFunction::indicator(&Ball::unit(p3())).scale(c(0.3, -0.7));
        let tg = fourier_truncate(&g, 0).unwrap();
        assert!(g.sub(&tg).unwrap().sup_abs() < 1e-15);
    }

    #[test]
    fn truncation_above_the_level_refines_representation_only() {
        let f = sample(p2(), 2);
        let t = fourier_truncate(&f, 4).unwrap();
        assert_eq!(t.level(), 4);
        assert_eq!(t, f);
    }

    #[test]
    fn coefficients_json_round_trips() {
        let f = sample(p2(), 3);
        let coeffs = fast_transform(&f).unwrap();
        let text = coeffs.to_json();
        let back = FourierCoefficients::from_json(&text).unwrap();
        assert_eq!(back.source_level(), coeffs.source_level());
        assert_eq!(back.len(), coeffs.len());
        for ((ca, va), (cb, vb)) in coeffs.iter().zip(back.iter()) {
            assert_eq!(ca, cb);
            assert_eq!(va.re.to_bits(), vb.re.to_bits());
            assert_eq!(va.im.to_bits(), vb.im.to_bits());
        }
        assert!(FourierCoefficients::from_json(
            r#"{"p":2,"source_level":1,"coefficients":[{"character":"0/1","re":0.0,"im":0.0}]}"#
        )
        .is_err());
    }

    #[test]
    fn coefficient_query_by_character() {
        let f = sample(p2(), 3);
        let coeffs = fast_transform(&f).unwrap();
        let chi = Character::new(p2(), 2, 3).unwrap();
        let direct = fourier_coefficient(&f, &chi).unwrap();
        let looked_up = coeffs.get(&chi).unwrap();
        assert!((direct - looked_up).norm() < 1e-12);
        let deeper = Character::new(p2(), 5, 1).unwrap();
        assert_eq!(coeffs.get(&deeper), None);
    }
}

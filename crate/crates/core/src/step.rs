//! Complex step functions on Q_p: finite linear combinations of indicator
//! functions of disjoint balls sharing one level.
//!
//! A function is stored as a map from ball centers (reduced mod p^level)
//! to complex values. The level is representation, not information:
//! [`StepFunction::refine`] re-expresses the same function on smaller
//! balls, and equality compares functions, not representations.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::padic::{Ball, PAdicApprox, Prime};

/// Hard cap on stored pieces; repelling runaway refinement, not memory
/// pressure at desk scale.
const MAX_PIECES: u64 = 1 << 26;

/// The binary pointwise operations on step functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointwiseOp {
    Add,
    Multiply,
}

#[derive(Debug, Clone)]
pub struct StepFunction {
    prime: Prime,
    level: i32,
    pieces: BTreeMap<PAdicApprox, Complex64>,
}

impl StepFunction {
    /// The zero function, represented at the given level.
    pub fn zero(prime: Prime, level: i32) -> StepFunction {
        StepFunction {
            prime,
            level,
            pieces: BTreeMap::new(),
        }
    }

    /// Builds a function from (center, value) pairs at one level. Centers
    /// naming the same coset are rejected, exact zeros are dropped.
    pub fn new(
        prime: Prime,
        level: i32,
        pieces: impl IntoIterator<Item = (PAdicApprox, Complex64)>,
    ) -> Result<StepFunction> {
        let mut f = StepFunction::zero(prime, level);
        for (center, value) in pieces {
            if center.prime() != prime {
                return Err(Error::PrimeMismatch(
                    center.prime().value() as u64,
                    prime.value() as u64,
                ));
            }
            let key = center.reduce(level)?.tighten();
            if f.pieces.contains_key(&key) {
                return Err(Error::Invalid(format!(
                    "duplicate piece on the ball {}",
                    Ball::new(level, &key)?
                )));
            }
            if value != Complex64::new(0.0, 0.0) {
                f.pieces.insert(key, value);
            }
        }
        Ok(f)
    }

    /// The indicator function of a ball: 1 on it, 0 elsewhere.
    pub fn indicator(ball: &Ball) -> StepFunction {
        let mut pieces = BTreeMap::new();
        pieces.insert(ball.center().clone(), Complex64::new(1.0, 0.0));
        StepFunction {
            prime: ball.prime(),
            level: ball.level(),
            pieces,
        }
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    /// Common level of the underlying balls.
    pub fn level(&self) -> i32 {
        self.level
    }

    pub fn piece_count(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Pieces in center order: (center reduced mod p^level, value).
    pub fn pieces(&self) -> impl Iterator<Item = (&PAdicApprox, &Complex64)> {
        self.pieces.iter()
    }

    /// The balls carrying nonzero value, in center order.
    pub fn support(&self) -> Vec<Ball> {
        self.pieces
            .keys()
            .map(|c| Ball::new(self.level, c).expect("stored centers are reduced"))
            .collect()
    }

    /// f(x). The point must be known at least to the function's level.
    pub fn evaluate(&self, x: &PAdicApprox) -> Result<Complex64> {
        if x.prime() != self.prime {
            return Err(Error::PrimeMismatch(
                x.prime().value() as u64,
                self.prime.value() as u64,
            ));
        }
        let key = x.reduce(self.level)?;
        Ok(self
            .pieces
            .get(&key)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0)))
    }

    /// Re-expresses the function on balls of a finer level; each piece
    /// splits into p^(new_level - level) equal-valued sub-pieces.
    pub fn refine(&self, new_level: i32) -> Result<StepFunction> {
        if new_level < self.level {
            return Err(Error::RefinementDirection {
                have: self.level,
                requested: new_level,
            });
        }
        if new_level == self.level {
            return Ok(self.clone());
        }
        let factor = self.prime.pow_u64((new_level - self.level) as u32)?;
        let total = factor
            .checked_mul(self.pieces.len() as u64)
            .filter(|&t| t <= MAX_PIECES)
            .ok_or_else(|| {
                Error::TooLarge(format!(
                    "refinement would store more than {MAX_PIECES} pieces"
                ))
            })?;
        let mut pieces = BTreeMap::new();
        for (center, &value) in &self.pieces {
            for sub in Ball::new(self.level, center)?.split(new_level)? {
                pieces.insert(sub.center().clone(), value);
            }
        }
        debug_assert_eq!(pieces.len() as u64, total);
        Ok(StepFunction {
            prime: self.prime,
            level: new_level,
            pieces,
        })
    }

    /// Pointwise sum. The result lives at the finer of the two levels.
    pub fn add(&self, other: &StepFunction) -> Result<StepFunction> {
        if self.prime != other.prime {
            return Err(Error::PrimeMismatch(
                self.prime.value() as u64,
                other.prime.value() as u64,
            ));
        }
        let level = self.level.max(other.level);
        let a = self.refine(level)?;
        let b = other.refine(level)?;
        let mut pieces = a.pieces;
        for (center, value) in b.pieces {
            let slot = pieces.entry(center).or_insert(Complex64::new(0.0, 0.0));
            *slot += value;
        }
        pieces.retain(|_, v| *v != Complex64::new(0.0, 0.0));
        Ok(StepFunction {
            prime: self.prime,
            level,
            pieces,
        })
    }

    /// Pointwise product. Only balls carried by both functions survive;
    /// the result lives at the finer of the two levels.
    pub fn mul(&self, other: &StepFunction) -> Result<StepFunction> {
        if self.prime != other.prime {
            return Err(Error::PrimeMismatch(
                self.prime.value() as u64,
                other.prime.value() as u64,
            ));
        }
        let level = self.level.max(other.level);
        let a = self.refine(level)?;
        let b = other.refine(level)?;
        let mut pieces = BTreeMap::new();
        for (center, &va) in &a.pieces {
            if let Some(&vb) = b.pieces.get(center) {
                let v = va * vb;
                if v != Complex64::new(0.0, 0.0) {
                    pieces.insert(center.clone(), v);
                }
            }
        }
        Ok(StepFunction {
            prime: self.prime,
            level,
            pieces,
        })
    }

    /// Pointwise combination under the named operation.
    pub fn combine(&self, other: &StepFunction, op: PointwiseOp) -> Result<StepFunction> {
        match op {
            PointwiseOp::Add => self.add(other),
            PointwiseOp::Multiply => self.mul(other),
        }
    }

    /// Pointwise scaling by a complex constant.
    pub fn scale(&self, c: Complex64) -> StepFunction {
        if c == Complex64::new(0.0, 0.0) {
            return StepFunction::zero(self.prime, self.level);
        }
        StepFunction {
            prime: self.prime,
            level: self.level,
            pieces: self
                .pieces
                .iter()
                .map(|(k, v)| (k.clone(), v * c))
                .collect(),
        }
    }

    pub fn neg(&self) -> StepFunction {
        self.scale(Complex64::new(-1.0, 0.0))
    }

    pub fn sub(&self, other: &StepFunction) -> Result<StepFunction> {
        self.add(&other.neg())
    }

    /// Pointwise complex conjugate.
    pub fn conj(&self) -> StepFunction {
        StepFunction {
            prime: self.prime,
            level: self.level,
            pieces: self
                .pieces
                .iter()
                .map(|(k, v)| (k.clone(), v.conj()))
                .collect(),
        }
    }

    /// Pointwise modulus |f|, a real-valued step function.
    pub fn abs(&self) -> StepFunction {
        StepFunction {
            prime: self.prime,
            level: self.level,
            pieces: self
                .pieces
                .iter()
                .map(|(k, v)| (k.clone(), Complex64::new(v.norm(), 0.0)))
                .collect(),
        }
    }

    /// Largest pointwise modulus; 0 for the zero function.
    pub fn sup_abs(&self) -> f64 {
        self.pieces.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// The right translate x -> f(x + g). A piece on c + p^level Z_p
    /// moves to (c - g) + p^level Z_p; g must be known mod p^level.
    pub fn shift(&self, g: &PAdicApprox) -> Result<StepFunction> {
        if g.prime() != self.prime {
            return Err(Error::PrimeMismatch(
                g.prime().value() as u64,
                self.prime.value() as u64,
            ));
        }
        let minus_g = g.reduce(self.level)?.negate();
        let mut pieces = BTreeMap::new();
        for (center, &value) in &self.pieces {
            pieces.insert(center.add(&minus_g)?.tighten(), value);
        }
        Ok(StepFunction {
            prime: self.prime,
            level: self.level,
            pieces,
        })
    }

    /// Restriction to a ball: equal to f inside it, 0 outside. Refines
    /// first when the ball is smaller than the pieces.
    pub fn restrict(&self, ball: &Ball) -> Result<StepFunction> {
        if ball.prime() != self.prime {
            return Err(Error::PrimeMismatch(
                ball.prime().value() as u64,
                self.prime.value() as u64,
            ));
        }
        if ball.level() > self.level {
            return self.refine(ball.level())?.restrict(ball);
        }
        let mut pieces = BTreeMap::new();
        for (center, &value) in &self.pieces {
            if Ball::new(self.level, center)?.is_subset_of(ball) {
                pieces.insert(center.clone(), value);
            }
        }
        Ok(StepFunction {
            prime: self.prime,
            level: self.level,
            pieces,
        })
    }

    /// Extension by zero from the unit ball to all of Q_p. The data does
    /// not change; the call asserts the support lies in Z_p and fails
    /// when it does not.
    pub fn lift(&self) -> Result<StepFunction> {
        for center in self.pieces.keys() {
            if self.level < 0 || !center.is_integral() {
                return Err(Error::OutsideUnitBall(
                    Ball::new(self.level, center)?.to_string(),
                ));
            }
        }
        Ok(self.clone())
    }

    /// True when every piece lies inside the unit ball; vacuously true
    /// for the zero function.
    pub fn supported_on_unit_ball(&self) -> bool {
        self.pieces
            .keys()
            .all(|c| self.level >= 0 && c.is_integral())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("step function serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<StepFunction> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            position: 0,
            message: e.to_string(),
        })
    }
}

impl PartialEq for StepFunction {
    /// Equality of functions: representations at different levels compare
    /// equal when they agree pointwise.
    fn eq(&self, other: &Self) -> bool {
        if self.prime != other.prime {
            return false;
        }
        let level = self.level.max(other.level);
        match (self.refine(level), other.refine(level)) {
            (Ok(a), Ok(b)) => a.pieces == b.pieces,
            _ => false,
        }
    }
}

impl fmt::Display for StepFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pieces.is_empty() {
            return write!(f, "0 (level {}, p={})", self.level, self.prime);
        }
        let mut first = true;
        for (center, value) in &self.pieces {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(
                f,
                "({:.6}{:+.6}i) 1[{}]",
                value.re,
                value.im,
                Ball::new(self.level, center).expect("stored centers are reduced")
            )?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct PieceRepr {
    center: String,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct StepRepr {
    p: u32,
    level: i32,
    pieces: Vec<PieceRepr>,
}

impl Serialize for StepFunction {
    /// Centers serialize as exact rationals "a/p^m", reduced mod p^level;
    /// that string plus the level field names the ball losslessly.
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        StepRepr {
            p: self.prime.value(),
            level: self.level,
            pieces: self
                .pieces
                .iter()
                .map(|(c, v)| PieceRepr {
                    center: c.to_rational_string(),
                    re: v.re,
                    im: v.im,
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for StepFunction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = StepRepr::deserialize(deserializer)?;
        let prime = Prime::new(repr.p).map_err(D::Error::custom)?;
        let mut pairs = Vec::with_capacity(repr.pieces.len());
        for piece in &repr.pieces {
            let center = PAdicApprox::parse_rational(&piece.center, prime, repr.level)
                .map_err(D::Error::custom)?;
            pairs.push((center, Complex64::new(piece.re, piece.im)));
        }
        StepFunction::new(prime, repr.level, pairs).map_err(D::Error::custom)
    }
}

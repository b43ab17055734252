//! Haar integration on Q_p against step functions.
//!
//! The measure is determined by translation invariance up to one positive
//! scale; `normalized` fixes the unit ball to measure 1. Ball measures are
//! exact rationals (scale * p^-level); only the final sums live in floats.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::padic::{Ball, Prime};
use crate::step::StepFunction;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HaarMeasure {
    prime: Prime,
    scale: BigRational,
}

impl HaarMeasure {
    /// The Haar measure with the unit ball Z_p of measure 1.
    pub fn normalized(prime: Prime) -> HaarMeasure {
        HaarMeasure {
            prime,
            scale: BigRational::one(),
        }
    }

    /// A rescaled Haar measure: the unit ball gets the given measure.
    /// Only positive scales name a Haar measure.
    pub fn with_scale(prime: Prime, scale: BigRational) -> Result<HaarMeasure> {
        if !scale.is_positive() {
            return Err(Error::NonpositiveScale);
        }
        Ok(HaarMeasure { prime, scale })
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn scale(&self) -> &BigRational {
        &self.scale
    }

    /// The exact measure of a ball: scale * p^-level. Depends only on the
    /// level, as translation invariance demands.
    pub fn ball_measure(&self, ball: &Ball) -> Result<BigRational> {
        if ball.prime() != self.prime {
            return Err(Error::PrimeMismatch(
                ball.prime().value() as u64,
                self.prime.value() as u64,
            ));
        }
        Ok(&self.scale * level_measure(self.prime, ball.level()))
    }

    fn level_measure_f64(&self, level: i32) -> f64 {
        (&self.scale * level_measure(self.prime, level))
            .to_f64()
            .expect("desk-scale measures fit in f64")
    }

    /// The integral of f: sum of piece values times the common piece
    /// measure. Real nonnegative input gives a real nonnegative result.
    pub fn integrate(&self, f: &StepFunction) -> Result<Complex64> {
        if f.prime() != self.prime {
            return Err(Error::PrimeMismatch(
                f.prime().value() as u64,
                self.prime.value() as u64,
            ));
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for (_, v) in f.pieces() {
            sum += v;
        }
        Ok(sum * self.level_measure_f64(f.level()))
    }

    /// The L2 pairing (f | g) = integral of f * conj(g), conjugate-linear
    /// in the second argument.
    pub fn inner_product(&self, f: &StepFunction, g: &StepFunction) -> Result<Complex64> {
        if f.prime() != self.prime || g.prime() != self.prime {
            return Err(Error::PrimeMismatch(
                f.prime().value() as u64,
                g.prime().value() as u64,
            ));
        }
        let level = f.level().max(g.level());
        let fr = f.refine(level)?;
        let gr = g.refine(level)?;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut fi = fr.pieces().peekable();
        let mut gi = gr.pieces().peekable();
        while let (Some(&(fc, fv)), Some(&(gc, gv))) = (fi.peek(), gi.peek()) {
            match fc.cmp(gc) {
                std::cmp::Ordering::Less => {
                    fi.next();
                }
                std::cmp::Ordering::Greater => {
                    gi.next();
                }
                std::cmp::Ordering::Equal => {
                    sum += fv * gv.conj();
                    fi.next();
                    gi.next();
                }
            }
        }
        Ok(sum * self.level_measure_f64(level))
    }

    /// The L2 norm sqrt((f | f)).
    pub fn l2_norm(&self, f: &StepFunction) -> Result<f64> {
        let n2 = self.inner_product(f, f)?;
        Ok(n2.re.max(0.0).sqrt())
    }

    pub fn l2_distance(&self, f: &StepFunction, g: &StepFunction) -> Result<f64> {
        self.l2_norm(&f.sub(g)?)
    }

    /// The ratio integral(phi) / integral(eta) under this measure. The
    /// reference eta must be real, nonnegative and not identically zero,
    /// so the denominator is a positive real.
    pub fn measure_ratio(&self, phi: &StepFunction, eta: &StepFunction) -> Result<Complex64> {
        let mut positive = false;
        for (_, v) in eta.pieces() {
            if v.im != 0.0 || v.re < 0.0 {
                return Err(Error::InvalidReference);
            }
            positive |= v.re > 0.0;
        }
        if !positive {
            return Err(Error::InvalidReference);
        }
        let denom = self.integrate(eta)?;
        Ok(self.integrate(phi)? / denom.re)
    }
}

/// The ratio lambda(phi) / lambda(eta). Because any two Haar measures
/// differ by a positive scalar, the same ratio computed under mu is equal
/// (within float noise); mu participates only through that contract,
/// which the tests check via [`HaarMeasure::measure_ratio`].
pub fn uniqueness_ratio(
    lambda: &HaarMeasure,
    mu: &HaarMeasure,
    phi: &StepFunction,
    eta: &StepFunction,
) -> Result<Complex64> {
    if lambda.prime() != mu.prime() {
        return Err(Error::PrimeMismatch(
            lambda.prime().value() as u64,
            mu.prime().value() as u64,
        ));
    }
    lambda.measure_ratio(phi, eta)
}

/// p^-level as an exact rational.
fn level_measure(prime: Prime, level: i32) -> BigRational {
    let p = BigInt::from(prime.value());
    if level >= 0 {
        BigRational::new(BigInt::one(), p.pow(level as u32))
    } else {
        BigRational::from_integer(p.pow(level.unsigned_abs()))
    }
}

/// True when the step function takes only real nonnegative values.
pub fn is_real_nonnegative(f: &StepFunction) -> bool {
    f.pieces().all(|(_, v)| v.im == 0.0 && v.re >= 0.0)
}

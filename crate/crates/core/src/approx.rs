//! Approximation of compactly supported step functions on Q_p by shifted
//! lifts of character sums.
//!
//! The algorithm: split f along the cosets of Z_p it touches, translate
//! each piece onto Z_p, project onto characters up to a chosen level,
//! extend by zero, translate back, and sum. Translation and lifting both
//! preserve the L2 norm, so every per-coset projection error survives the
//! journey unchanged and the total error is bounded by their sum.

use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::character::{fast_transform, fourier_truncate};
use crate::error::{Error, Result};
use crate::haar::HaarMeasure;
use crate::padic::PAdicApprox;
use crate::step::StepFunction;

/// One coset's share of a function: the representative g of g + Z_p and
/// the restriction of the function to that coset.
#[derive(Debug, Clone, PartialEq)]
pub struct CosetPiece {
    rep: PAdicApprox,
    piece: StepFunction,
}

impl CosetPiece {
    /// Builds a piece, checking that the support really lies in
    /// rep + Z_p and the representative is reduced mod Z_p.
    pub fn new(rep: PAdicApprox, piece: StepFunction) -> Result<CosetPiece> {
        if rep.prime() != piece.prime() {
            return Err(Error::PrimeMismatch(
                rep.prime().value() as u64,
                piece.prime().value() as u64,
            ));
        }
        if rep.hi() != 0 {
            return Err(Error::Invalid(format!(
                "coset representative {rep} is not reduced mod Z_p"
            )));
        }
        if piece.level() < 0 {
            return Err(Error::OutsideUnitBall(format!(
                "pieces at level {} are larger than a single coset",
                piece.level()
            )));
        }
        for (center, _) in piece.pieces() {
            if center.reduce(0)? != rep {
                return Err(Error::Invalid(format!(
                    "piece on a ball around {} does not lie in the coset of {}",
                    center.to_rational_string(),
                    rep.to_rational_string()
                )));
            }
        }
        Ok(CosetPiece { rep, piece })
    }

    pub fn rep(&self) -> &PAdicApprox {
        &self.rep
    }

    pub fn piece(&self) -> &StepFunction {
        &self.piece
    }

    /// The piece translated onto Z_p: x -> piece(x + rep).
    fn on_unit_ball(&self) -> Result<StepFunction> {
        let g = self.rep.zero_extend(self.piece.level());
        let on_h = self.piece.shift(&g)?;
        debug_assert!(on_h.supported_on_unit_ball());
        Ok(on_h)
    }

    /// Translates a function on Z_p back onto this piece's coset.
    fn restore_from_unit_ball(&self, on_h: &StepFunction) -> Result<StepFunction> {
        let g = self.rep.zero_extend(on_h.level());
        on_h.shift(&g.negate())
    }
}

/// What one approximation run did and how close it landed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxReport {
    /// Number of cosets meeting the support.
    pub t: usize,
    /// L2 error per coset piece, in coset order.
    pub per_coset_errors: Vec<f64>,
    /// L2 error of the assembled approximant against the input.
    pub total_error: f64,
    /// The guarantee t/N when a target N was given; null for runs at a
    /// fixed truncation level, which promise nothing.
    pub bound: Option<f64>,
    /// Truncation level chosen per coset, in coset order.
    pub k_used: Vec<i32>,
    /// Largest pointwise deviation; diagnostic only, no claim attached.
    pub sup_error: f64,
    /// Wall-clock time of the run. Drivers wanting reproducible output
    /// zero this.
    pub runtime_ms: f64,
}

impl ApproxReport {
    /// Whether the promised bound held. Runs without a bound pass
    /// vacuously; a zero-piece function must reproduce exactly since
    /// t/N = 0 cannot be undercut.
    pub fn bound_satisfied(&self) -> bool {
        match self.bound {
            None => true,
            Some(b) => {
                if self.t == 0 {
                    self.total_error == 0.0
                } else {
                    self.total_error < b
                }
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<ApproxReport> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            position: 0,
            message: e.to_string(),
        })
    }
}

/// Splits f along the cosets g + Z_p meeting its support, in ascending
/// order of the fractional representative g. The pieces sum back to f
/// exactly.
pub fn coset_decompose(f: &StepFunction) -> Result<Vec<CosetPiece>> {
    let work = f.refine(f.level().max(0))?;
    let mut groups: std::collections::BTreeMap<PAdicApprox, Vec<(PAdicApprox, Complex64)>> =
        std::collections::BTreeMap::new();
    for (center, &value) in work.pieces() {
        let rep = center.reduce(0)?.tighten();
        groups.entry(rep).or_default().push((center.clone(), value));
    }
    groups
        .into_iter()
        .map(|(rep, items)| {
            let piece = StepFunction::new(work.prime(), work.level(), items)?;
            Ok(CosetPiece { rep, piece })
        })
        .collect()
}

/// Approximates one coset piece at truncation level k: shift onto Z_p,
/// project onto characters of level <= k, lift, shift back. The result
/// lies in the span of shifted lifted characters by construction, and
/// its L2 distance from the piece equals the projection error on Z_p.
pub fn approximate_piece(cp: &CosetPiece, k: i32) -> Result<StepFunction> {
    let on_h = cp.on_unit_ball()?;
    let truncated = fourier_truncate(&on_h, k)?;
    let lifted = truncated.lift()?;
    cp.restore_from_unit_ball(&lifted)
}

/// Prefix of the coefficient energies: tail_energy[k] is the squared L2
/// error of truncating at level k, by Parseval on the analysis level n.
fn tail_energies(on_h: &StepFunction) -> Result<Vec<f64>> {
    let coeffs = fast_transform(on_h)?;
    let n = coeffs.source_level();
    let p = on_h.prime().value() as u64;
    let mut boundaries = Vec::with_capacity(n as usize + 1);
    let mut size = 1u64;
    for _ in 0..=n {
        boundaries.push(size as usize);
        size *= p;
    }
    let energies: Vec<f64> = coeffs.iter().map(|(_, v)| v.norm_sqr()).collect();
    let mut tails = Vec::with_capacity(n as usize + 1);
    for &b in &boundaries {
        let tail: f64 = energies[b.min(energies.len())..].iter().sum();
        tails.push(tail.max(0.0));
    }
    Ok(tails)
}

struct PieceRun {
    approximant: StepFunction,
    error: f64,
    k: i32,
}

/// Truncates one piece at the given level and measures the error on G.
fn run_piece(cp: &CosetPiece, k: i32, measure: &HaarMeasure) -> Result<PieceRun> {
    let approximant = approximate_piece(cp, k)?;
    let error = measure.l2_distance(cp.piece(), &approximant)?;
    Ok(PieceRun {
        approximant,
        error,
        k,
    })
}

/// Truncates one piece at the smallest level whose error beats the
/// target. The Parseval tail gives the candidate; the error is then
/// recomputed on the materialized approximant, bumping the level if the
/// recomputation disagrees at the margin.
fn run_piece_to_target(cp: &CosetPiece, target: f64, measure: &HaarMeasure) -> Result<PieceRun> {
    let on_h = cp.on_unit_ball()?;
    let tails = tail_energies(&on_h)?;
    let n = tails.len() as i32 - 1;
    let mut k = tails
        .iter()
        .position(|&t2| t2.sqrt() < target)
        .map(|i| i as i32)
        .unwrap_or(n);
    loop {
        let run = run_piece(cp, k, measure)?;
        if run.error < target || k >= n {
            return Ok(run);
        }
        k += 1;
    }
}

fn assemble(
    f: &StepFunction,
    runs: Vec<PieceRun>,
    bound: Option<f64>,
    measure: &HaarMeasure,
    started: Instant,
) -> Result<(StepFunction, ApproxReport)> {
    let mut phi = StepFunction::zero(f.prime(), f.level().max(0));
    let mut per_coset_errors = Vec::with_capacity(runs.len());
    let mut k_used = Vec::with_capacity(runs.len());
    for run in &runs {
        phi = phi.add(&run.approximant)?;
        per_coset_errors.push(run.error);
        k_used.push(run.k);
    }
    let total_error = measure.l2_distance(f, &phi)?;
    let sup_error = f.sub(&phi)?.sup_abs();
    let report = ApproxReport {
        t: runs.len(),
        per_coset_errors,
        total_error,
        bound,
        k_used,
        sup_error,
        runtime_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    Ok((phi, report))
}

/// The full gluing run against a target N: every coset piece is truncated
/// at the smallest level with error below 1/N, so the assembled
/// approximant promises total_error < t/N.
pub fn approximate(f: &StepFunction, n_target: u64) -> Result<(StepFunction, ApproxReport)> {
    if n_target == 0 {
        return Err(Error::Invalid("approximation target N must be >= 1".into()));
    }
    let started = Instant::now();
    let measure = HaarMeasure::normalized(f.prime());
    let target = 1.0 / n_target as f64;
    let pieces = coset_decompose(f)?;
    let bound = Some(pieces.len() as f64 / n_target as f64);
    let runs = pieces
        .iter()
        .map(|cp| run_piece_to_target(cp, target, &measure))
        .collect::<Result<Vec<_>>>()?;
    assemble(f, runs, bound, &measure, started)
}

/// The gluing run at one fixed truncation level for every coset; used by
/// convergence sweeps. No t/N bound is claimed.
pub fn approximate_at_level(f: &StepFunction, k: i32) -> Result<(StepFunction, ApproxReport)> {
    if k < 0 {
        return Err(Error::Negative {
            name: "truncation level",
            value: k as i64,
        });
    }
    let started = Instant::now();
    let measure = HaarMeasure::normalized(f.prime());
    let pieces = coset_decompose(f)?;
    let runs = pieces
        .iter()
        .map(|cp| run_piece(cp, k, &measure))
        .collect::<Result<Vec<_>>>()?;
    assemble(f, runs, None, &measure, started)
}

/// Whether phi lies in the span of shifted lifted character sums: each
/// coset restriction, moved onto Z_p, must be reproduced by its own
/// character expansion. For step functions this is a reconstruction
/// identity, verified within 1e-9.
pub fn membership_check(phi: &StepFunction) -> Result<bool> {
    let measure = HaarMeasure::normalized(phi.prime());
    for cp in coset_decompose(phi)? {
        let on_h = cp.on_unit_ball()?;
        let reconstructed = fourier_truncate(&on_h, on_h.level().max(0))?;
        if measure.l2_distance(&on_h, &reconstructed)? >= 1e-9 {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::character::Character;
    use crate::padic::{coset_reps, Ball, Prime};

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

    /// Spread over two cosets of Z_2 with assorted values at level 2.
    fn two_coset_sample() -> StepFunction {
        let mut pieces = Vec::new();
        for r in 0..4i64 {
            pieces.push((int(p2(), r, 2), c(0.3 * r as f64 - 0.2, (r as f64).sin())));
        }
        let half = PAdicApprox::from_ratio(p2(), 1, 1, 2).unwrap();
        for r in 0..2i64 {
            let center = half.add(&int(p2(), 2 * r, 2)).unwrap();
            pieces.push((center, c(-1.1, 0.4 * r as f64)));
        }
        StepFunction::new(p2(), 2, pieces).unwrap()
    }

    #[test]
    fn unit_ball_support_is_a_single_piece() {
        let f = StepFunction::indicator(&Ball::zero_centered(p2(), 2));
        let pieces = coset_decompose(&f).unwrap();
        assert_eq!(pieces.len(), 1);
        assert!(pieces[0].rep().is_zero_class());
        assert_eq!(pieces[0].piece(), &f);
    }

    #[test]
    fn half_level_support_splits_into_two_cosets() {
        let f = StepFunction::indicator(&Ball::zero_centered(p2(), -1))
            .refine(0)
            .unwrap();
        let pieces = coset_decompose(&f).unwrap();
        assert_eq!(pieces.len(), 2);
        let reps = coset_reps(p2(), 1).unwrap();
        assert_eq!(pieces[0].rep(), &reps[0]);
        assert_eq!(pieces[1].rep(), &reps[1]);
    }

    #[test]
    fn decomposition_reassembles_exactly() {
        let f = two_coset_sample();
        let pieces = coset_decompose(&f).unwrap();
        assert_eq!(pieces.len(), 2);
        let mut sum = StepFunction::zero(p2(), f.level());
        for cp in &pieces {
            sum = sum.add(cp.piece()).unwrap();
        }
        assert_eq!(sum, f);
    }

    #[test]
    fn decompose_refines_coarse_representations_first() {
        let f = StepFunction::indicator(&Ball::zero_centered(p3(), -1));
        let pieces = coset_decompose(&f).unwrap();
        assert_eq!(pieces.len(), 3);
        for cp in &pieces {
            assert_eq!(cp.piece().level(), 0);
            assert_eq!(cp.piece().piece_count(), 1);
        }
    }

    #[test]
    fn coset_piece_validates_its_support() {
        let rep = coset_reps(p2(), 1).unwrap()[1].clone();
        let wrong = StepFunction::indicator(&Ball::zero_centered(p2(), 1));
        assert!(CosetPiece::new(rep.clone(), wrong).is_err());
        let right = StepFunction::indicator(&Ball::new(0, &rep.zero_extend(0)).unwrap());
        assert!(CosetPiece::new(rep, right).is_ok());
    }

    #[test]
    fn piece_approximation_is_exact_at_the_piece_level() {
        let f = two_coset_sample();
        let m = HaarMeasure::normalized(p2());
        for cp in coset_decompose(&f).unwrap() {
            let phi = approximate_piece(&cp, cp.piece().level()).unwrap();
            assert!(m.l2_distance(cp.piece(), &phi).unwrap() < 1e-9);
        }
    }

    #[test]
    fn piece_error_equals_projection_error_on_the_unit_ball() {
        let f = two_coset_sample();
        let m = HaarMeasure::normalized(p2());
        for cp in coset_decompose(&f).unwrap() {
            for k in 0..=2 {
                let phi = approximate_piece(&cp, k).unwrap();
                let err_g = m.l2_distance(cp.piece(), &phi).unwrap();
                let on_h = cp.piece().shift(&cp.rep().zero_extend(2)).unwrap();
                let err_h = m
                    .l2_distance(&on_h, &fourier_truncate(&on_h, k).unwrap())
                    .unwrap();
                assert!((err_g - err_h).abs() < 1e-12, "k={k}: {err_g} vs {err_h}");
            }
        }
    }

    #[test]
    fn shifted_lifted_characters_reproduce_themselves() {
        // The lift of a level-1 character moved onto the coset 1/2 + Z_2.
        let chi = Character::new(p2(), 1, 1).unwrap();
        let on_h = chi.to_step(1).unwrap();
        let rep = coset_reps(p2(), 1).unwrap()[1].clone();
        let moved = on_h.shift(&rep.zero_extend(1).negate()).unwrap();
        let cp = CosetPiece::new(rep, moved.clone()).unwrap();
        let phi = approximate_piece(&cp, 1).unwrap();
        let m = HaarMeasure::normalized(p2());
        assert!(m.l2_distance(&moved, &phi).unwrap() < 1e-9);
    }

    #[test]
    fn indicator_of_the_unit_ball_needs_no_error() {
        let f = StepFunction::indicator(&Ball::unit(p2()));
        for n_target in [1u64, 2, 100] {
            let (phi, report) = approximate(&f, n_target).unwrap();
            assert_eq!(phi, f);
            assert_eq!(report.t, 1);
            assert_eq!(report.total_error, 0.0);
            assert_eq!(report.bound, Some(1.0 / n_target as f64));
            assert!(report.bound_satisfied());
            assert_eq!(report.k_used, vec![0]);
        }
    }

    #[test]
    fn bound_chain_holds_on_the_two_coset_sample() {
        let f = two_coset_sample();
        for n_target in [1u64, 2, 4, 8] {
            let (_, report) = approximate(&f, n_target).unwrap();
            assert_eq!(report.t, 2);
            assert!(report.bound_satisfied(), "N={n_target}: {report:?}");
            let sum: f64 = report.per_coset_errors.iter().sum();
            assert!(report.total_error <= sum + 1e-9);
            for e in &report.per_coset_errors {
                assert!(*e < 1.0 / n_target as f64);
            }
        }
    }

    #[test]
    fn chosen_levels_are_minimal() {
        let f = two_coset_sample();
        let m = HaarMeasure::normalized(p2());
        let (_, report) = approximate(&f, 4).unwrap();
        for (cp, &k) in coset_decompose(&f).unwrap().iter().zip(&report.k_used) {
            if k > 0 {
                let smaller = approximate_piece(cp, k - 1).unwrap();
                let err = m.l2_distance(cp.piece(), &smaller).unwrap();
                assert!(err >= 0.25, "level {k} was not minimal: {err}");
            }
        }
    }

    #[test]
    fn zero_function_reports_zero_cosets() {
        let z = StepFunction::zero(p2(), 1);
        let (phi, report) = approximate(&z, 8).unwrap();
        assert!(phi.is_zero());
        assert_eq!(report.t, 0);
        assert_eq!(report.total_error, 0.0);
        assert_eq!(report.bound, Some(0.0));
        assert!(report.bound_satisfied());
        assert!(report.per_coset_errors.is_empty());
    }

    #[test]
    fn target_zero_is_rejected() {
        let f = StepFunction::indicator(&Ball::unit(p2()));
        assert!(approximate(&f, 0).is_err());
    }

    #[test]
    fn fixed_level_error_shrinks_to_zero() {
        let f = two_coset_sample();
        let mut last = f64::INFINITY;
        for k in 0..=2 {
            let (_, report) = approximate_at_level(&f, k).unwrap();
            assert_eq!(report.bound, None);
            assert!(report.bound_satisfied());
            assert!(report.total_error <= last + 1e-12);
            last = report.total_error;
        }
        assert!(last < 1e-9);
        assert!(approximate_at_level(&f, -1).is_err());
    }

    #[test]
    fn constant_level_error_on_the_half_ball_is_a_half() {
        // One coset; truncating at level 0 replaces the indicator of 2Z_2
        // by its mean 1/2, and the L2 error is exactly 1/2.
        let f = StepFunction::indicator(&Ball::zero_centered(p2(), 1));
        let (_, report) = approximate_at_level(&f, 0).unwrap();
        assert_eq!(report.t, 1);
        assert!((report.total_error - 0.5).abs() < 1e-12);
        assert!((report.sup_error - 0.5).abs() < 1e-12);
    }

    #[test]
    fn approximation_output_is_in_the_span() {
        let f = two_coset_sample();
        let (phi, _) = approximate(&f, 2).unwrap();
        assert!(membership_check(&phi).unwrap());
        assert!(membership_check(&StepFunction::zero(p2(), 0)).unwrap());
        let half_ball = StepFunction::indicator(&Ball::zero_centered(p2(), 1));
        assert!(membership_check(&half_ball).unwrap());
    }

    #[test]
    fn report_json_round_trips() {
        let f = two_coset_sample();
        let (_, mut report) = approximate(&f, 4).unwrap();
        report.runtime_ms = 0.0;
        let text = report.to_json();
        assert_eq!(ApproxReport::from_json(&text).unwrap(), report);
        for field in [
            "\"t\":",
            "\"per_coset_errors\":",
            "\"total_error\":",
            "\"bound\":",
            "\"k_used\":",
            "\"sup_error\":",
            "\"runtime_ms\":",
        ] {
            assert!(text.contains(field), "missing {field} in {text}");
        }
        let (_, sweep_report) = approximate_at_level(&f, 1).unwrap();
        assert!(sweep_report.to_json().contains("\"bound\":null"));
    }
}

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Verification trial scores; higher means "more likely the same speaker".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreSet<T> {
    pub genuine: Vec<T>,
    pub impostor: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EerResult<T> {
    /// Fraction in `[0, 1]`, not percent.
    pub eer: f64,
    pub threshold: T,
}

/// Fractions of `sorted` strictly below `t` and at or above it.
fn split_at<T: Scalar>(sorted: &[T], t: T) -> (f64, f64) {
    let below = sorted.partition_point(|&s| s < t);
    let n = sorted.len() as f64;
    (below as f64 / n, (sorted.len() - below) as f64 / n)
}

/// Equal error rate by exhaustive threshold sweep.
///
/// Candidate thresholds are the lowest score, the midpoints between
/// consecutive distinct scores of the pooled set, and the value just above
/// the highest score. At threshold `t` a genuine trial is rejected when its
/// score is `< t` and an impostor trial is accepted when its score is `>= t`.
/// The first candidate where the false-acceptance rate no longer exceeds the
/// false-rejection rate fixes the operating point; if the rates cross between
/// it and the previous candidate, both rates and the threshold are linearly
/// interpolated to the crossing.
pub fn compute_eer<T: Scalar>(scores: &ScoreSet<T>) -> Result<EerResult<T>> {
    if scores.genuine.is_empty() || scores.impostor.is_empty() {
        return Err(Error::Insufficient(
            "EER needs at least one genuine and one impostor score".into(),
        ));
    }
    if scores
        .genuine
        .iter()
        .chain(&scores.impostor)
        .any(|s| !s.is_finite())
    {
        return Err(Error::Invalid("scores must be finite".into()));
    }
    let sort = |v: &[T]| {
        let mut v = v.to_vec();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    };
    let genuine = sort(&scores.genuine);
    let impostor = sort(&scores.impostor);
    let mut union: Vec<T> = genuine.iter().chain(&impostor).copied().collect();
    union.sort_by(|a, b| a.partial_cmp(b).unwrap());
    union.dedup();

    let two = T::one() + T::one();
    let hi = *union.last().unwrap();
    let above = hi + (hi.abs() * T::epsilon()).max(T::min_positive_value());
    let mut thresholds = Vec::with_capacity(union.len() + 1);
    thresholds.push(union[0]);
    thresholds.extend(union.windows(2).map(|w| w[0] + (w[1] - w[0]) / two));
    thresholds.push(above);

    // FAR - FRR is non-increasing in t, +1 at the bottom and -1 at the top.
    let rates = |t: T| (split_at(&genuine, t).0, split_at(&impostor, t).1);
    let mut prev = (thresholds[0], rates(thresholds[0]));
    for &t in &thresholds {
        let (frr, far) = rates(t);
        let diff = far - frr;
        if diff <= 0.0 {
            let (pt, (pfrr, pfar)) = prev;
            let pdiff = pfar - pfrr;
            if diff == 0.0 || pdiff <= 0.0 {
                return Ok(EerResult {
                    eer: (frr + far) / 2.0,
                    threshold: t,
                });
            }
            let alpha = pdiff / (pdiff - diff);
            let frr_x = pfrr + alpha * (frr - pfrr);
            let far_x = pfar + alpha * (far - pfar);
            return Ok(EerResult {
                eer: (frr_x + far_x) / 2.0,
                threshold: pt + T::of(alpha) * (t - pt),
            });
        }
        prev = (t, (frr, far));
    }
    unreachable!("the top threshold rejects every genuine trial")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn set(g: &[f64], i: &[f64]) -> ScoreSet<f64> {
        ScoreSet {
            genuine: g.to_vec(),
            impostor: i.to_vec(),
        }
    }

    /// Brute force: every threshold on a fine grid, pick min |FAR - FRR|.
    fn grid_oracle(s: &ScoreSet<f64>) -> f64 {
        let mut best = (f64::INFINITY, 0.0);
        for step in 0..=2000 {
            let t = -0.5 + step as f64 * 0.001;
            let frr = s.genuine.iter().filter(|&&g| g < t).count() as f64 / s.genuine.len() as f64;
            let far = s.impostor.iter().filter(|&&i| i >= t).count() as f64 / s.impostor.len() as f64;
            if (far - frr).abs() < best.0 {
                best = ((far - frr).abs(), (far + frr) / 2.0);
            }
        }
        best.1
    }

    #[test]
    fn perfectly_separated_is_zero() {
        let r = compute_eer(&set(&[0.9, 0.8, 0.7], &[0.1, 0.2, 0.3])).unwrap();
        assert_eq!(r.eer, 0.0);
        assert!(r.threshold > 0.3 && r.threshold <= 0.7);
    }

    #[test]
    fn three_versus_three_hand_case() {
        let s = set(&[0.7, 0.6, 0.4], &[0.5, 0.3, 0.2]);
        let r = compute_eer(&s).unwrap();
        assert_eq!(r.eer, 1.0 / 3.0);
        assert_eq!(grid_oracle(&s), 1.0 / 3.0);
        // Rates are equal on the whole interval (0.4, 0.5].
        assert!(r.threshold > 0.4 && r.threshold <= 0.5);
    }

    #[test]
    fn fully_inverted_scores_give_one() {
        let r = compute_eer(&set(&[0.1, 0.2], &[0.8, 0.9])).unwrap();
        assert_eq!(r.eer, 1.0);
    }

    #[test]
    fn identical_single_scores_cross_halfway() {
        let r = compute_eer(&set(&[0.5], &[0.5])).unwrap();
        assert_eq!(r.eer, 0.5);
    }

    #[test]
    fn interpolates_between_candidates() {
        // No threshold gives equal rates: FRR jumps 0 -> 1/2 at 0.35 while FAR
        // sits at 1/3, so the interpolated crossing is at 1/3 (a plain
        // min-|FAR-FRR| pick would report 5/12).
        let s = set(&[0.35, 0.9], &[0.3, 0.4, 0.1]);
        let r = compute_eer(&s).unwrap();
        assert!((r.eer - 1.0 / 3.0).abs() < 1e-12, "{}", r.eer);
        assert!(r.threshold > 0.325 && r.threshold < 0.375);
    }

    #[test]
    fn matches_grid_oracle_when_rates_meet() {
        let mut rng = SplitMix64::new(8);
        for _ in 0..50 {
            // Equal trial counts on a coarse score lattice, so exact crossings exist often.
            let g: Vec<f64> = (0..6).map(|_| (rng.below(20) as f64) / 20.0 + 0.1).collect();
            let i: Vec<f64> = (0..6).map(|_| (rng.below(20) as f64) / 20.0).collect();
            let s = set(&g, &i);
            let r = compute_eer(&s).unwrap();
            let (frr, far) = (
                s.genuine.iter().filter(|&&x| x < r.threshold).count() as f64 / 6.0,
                s.impostor.iter().filter(|&&x| x >= r.threshold).count() as f64 / 6.0,
            );
            if frr == far {
                assert_eq!(r.eer, grid_oracle(&s));
            }
        }
    }

    #[test]
    fn empty_side_is_an_error() {
        assert!(compute_eer(&set(&[], &[0.1])).is_err());
        assert!(compute_eer(&set(&[0.1], &[])).is_err());
    }
}

//! Point-wise information content h(z | ·) of a candidate row given the rest
//! of the sample and optional side information.
//!
//! Under the Tardos prior the conditional law of a held-out row given the
//! other rows factorizes per column, and each column's posterior predictive
//! is Laplace's rule of succession (k+1)/(m+2) for a uniform Beta prior.
//! Sampling without repetition costs nothing here: distinct codebook indices
//! have i.i.d. contents given the biases, so the reduction is exact for
//! every N >= n (the tiny-scale enumeration oracle confirms this to 1e-9).
//!
//! All surprisals are in bits (log base 2); the gate
//! `h(z|K, S∖{z}) >= xi·h(z|S∖{z})` is base-invariant.

use crate::attackers::SideInfoValue;
use crate::bits::{BitMatrix, BitVector};
use crate::error::{Error, Result};
use crate::prior::PriorSpec;

/// Posterior mean of a uniform-prior Bernoulli bias after observing `ones`
/// ones in `rows` draws: (k+1)/(m+2).
pub fn posterior_column_mean(ones: usize, rows: usize) -> f64 {
    debug_assert!(ones <= rows);
    (ones as f64 + 1.0) / (rows as f64 + 2.0)
}

/// How one more row is predicted from the conditioning columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Predictive {
    /// Beta-Bernoulli posterior per column (Tardos).
    RuleOfSuccession,
    /// Unconditional fair coin per column (point-mass uniform Nature).
    Coin,
}

impl Predictive {
    fn for_prior(prior: &PriorSpec) -> Result<Self> {
        match prior {
            PriorSpec::Tardos(_) => Ok(Predictive::RuleOfSuccession),
            PriorSpec::UniformHypercube { .. } => Ok(Predictive::Coin),
            _ => Err(Error::IncompatibleSpec(
                "surprisal is implemented for tardos and uniform-hypercube priors".into(),
            )),
        }
    }

    fn log2_column(&self, ones: usize, rows: usize, bit: bool) -> f64 {
        match self {
            Predictive::Coin => -1.0,
            Predictive::RuleOfSuccession => {
                let q = posterior_column_mean(ones, rows);
                if bit { q.log2() } else { (1.0 - q).log2() }
            }
        }
    }
}

fn log2_predictive(model: Predictive, z: &BitVector, rows: &BitMatrix) -> Result<f64> {
    if z.len() != rows.d() {
        return Err(Error::DimensionMismatch { expected: rows.d(), got: z.len() });
    }
    let m = rows.n();
    let mut acc = 0.0;
    for j in 0..rows.d() {
        let k = rows.column_weight(j);
        acc += model.log2_column(k, m, z.get(j));
    }
    Ok(acc)
}

/// Surprisal (bits) of z given a conditioning sample of m rows, under the
/// Tardos column-factorized posterior. Strictly positive and finite for any
/// inputs: every per-column factor lies strictly inside (0, 1).
pub fn surprisal_given_rows(z: &BitVector, rows: &BitMatrix) -> Result<f64> {
    Ok(-log2_predictive(Predictive::RuleOfSuccession, z, rows)?)
}

/// The column-wise posterior mode: the candidate maximizing the predictive
/// probability, hence minimizing surprisal. Per-column factorization makes
/// this the global minimizer over all 2^d candidates; ties resolve to 1.
pub fn column_mode(rows: &BitMatrix) -> BitVector {
    let m = rows.n();
    let mut z = BitVector::zeros(rows.d());
    for j in 0..rows.d() {
        let k = rows.column_weight(j);
        if 2 * k >= m {
            z.set(j, true);
        }
    }
    z
}

/// A surprisal evaluation point: candidate z, the realized conditioning
/// rows (canonically S minus the witness row), the side information, and
/// the prior the world was drawn from.
#[derive(Debug, Clone)]
pub struct SurprisalQuery<'a> {
    pub z: &'a BitVector,
    pub conditioning_rows: &'a BitMatrix,
    pub sideinfo: &'a SideInfoValue,
    pub prior: &'a PriorSpec,
}

/// Is `sub` a sub-multiset of `of` (by row content)?
fn is_sub_multiset(sub: &BitMatrix, of: &BitMatrix) -> bool {
    let mut pool = of.sorted_rows();
    'outer: for row in sub.rows() {
        for (i, candidate) in pool.iter().enumerate() {
            if candidate == row {
                pool.remove(i);
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Surprisal (bits) of z given both the conditioning rows and the side
/// information:
///
/// * `None`: the plain conditional surprisal;
/// * `RevealedRows` that are a sub-multiset of the conditioning rows: K is a
///   function of S' and adds nothing, so identical to the plain value. A
///   revealed row *not* available in S' can only be the held-out row itself,
///   which pins the posterior: 0 bits;
/// * `ShuffledPair`: the two-hypothesis Bayes posterior over which candidate
///   is the member, with per-column predictive factors computed from S'
///   alone. For z outside the pair, the predictive law renormalized to
///   exclude the pair's (distinct) contents;
/// * `Superset`: unsupported.
pub fn surprisal_given_sideinfo(q: &SurprisalQuery) -> Result<f64> {
    let model = Predictive::for_prior(q.prior)?;
    match q.sideinfo {
        SideInfoValue::None => Ok(-log2_predictive(model, q.z, q.conditioning_rows)?),
        SideInfoValue::RevealedRows { rows, .. } => {
            if is_sub_multiset(rows, q.conditioning_rows) {
                Ok(-log2_predictive(model, q.z, q.conditioning_rows)?)
            } else {
                Ok(0.0)
            }
        }
        SideInfoValue::ShuffledPair { k1, k2, .. } => {
            let l1 = log2_predictive(model, k1, q.conditioning_rows)?;
            let l2 = log2_predictive(model, k2, q.conditioning_rows)?;
            let z_is_1 = q.z == k1;
            let z_is_2 = q.z == k2;
            if z_is_1 || z_is_2 {
                if z_is_1 && z_is_2 {
                    return Ok(0.0);
                }
                // h = -log2( L(z) / (L(k1)+L(k2)) ), evaluated stably in logs
                let lz = if z_is_1 { l1 } else { l2 };
                let lo = if z_is_1 { l2 } else { l1 };
                let log_denom = lz.max(lo) + (1.0 + 2f64.powf(-(lz - lo).abs())).log2();
                Ok(log_denom - lz)
            } else {
                let lz = log2_predictive(model, q.z, q.conditioning_rows)?;
                let mut excluded = 2f64.powf(l1);
                if k1 != k2 {
                    excluded += 2f64.powf(l2);
                }
                // distinct contents of a probability law sum below 1
                Ok(-lz - (1.0 - excluded).log2())
            }
        }
        SideInfoValue::Superset(_) => Err(Error::IncompatibleSpec(
            "surprisal under superset side info is not implemented".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::TrialRng;

    /// Composite-Simpson quadrature on [0,1]; exact enough for the Beta
    /// moment integrals behind the rule of succession.
    fn simpson(f: impl Fn(f64) -> f64, intervals: usize) -> f64 {
        let n = intervals * 2;
        let h = 1.0 / n as f64;
        let mut acc = f(0.0) + f(1.0);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(i as f64 * h);
        }
        acc * h / 3.0
    }

    /// Independent oracle: E[p | k ones in m draws] under p ~ U[0,1] is the
    /// ratio of two polynomial integrals.
    fn posterior_mean_by_quadrature(k: usize, m: usize) -> f64 {
        let num = simpson(|p| p.powi(k as i32 + 1) * (1.0 - p).powi((m - k) as i32), 2048);
        let den = simpson(|p| p.powi(k as i32) * (1.0 - p).powi((m - k) as i32), 2048);
        num / den
    }

    #[test]
    fn rule_of_succession_matches_integral_oracle() {
        assert!((posterior_column_mean(1, 2) - 0.5).abs() < 1e-12);
        assert!((posterior_mean_by_quadrature(1, 2) - 0.5).abs() < 1e-9);

        assert!((posterior_column_mean(0, 2) - 0.25).abs() < 1e-12);
        assert!((posterior_mean_by_quadrature(0, 2) - 0.25).abs() < 1e-9);

        for m in 1..8usize {
            for k in 0..=m {
                let closed = posterior_column_mean(k, m);
                let oracle = posterior_mean_by_quadrature(k, m);
                assert!((closed - oracle).abs() < 1e-9, "k={k} m={m}: {closed} vs {oracle}");
            }
        }
    }

    #[test]
    fn all_ones_column_tends_to_one() {
        let mut prev = 0.0;
        for m in 1..200usize {
            let q = posterior_column_mean(m, m);
            assert!(q > prev && q < 1.0);
            prev = q;
        }
        assert!((posterior_column_mean(198, 198) - 199.0 / 200.0).abs() < 1e-12);
    }

    #[test]
    fn single_column_surprisal_hand_value() {
        let rows = BitMatrix::from_bit_rows(&[&[1], &[1]]);
        let z = BitVector::from_bits(&[1]);
        let h = surprisal_given_rows(&z, &rows).unwrap();
        assert!((h - (-(0.75f64).log2())).abs() < 1e-12, "h = {h}");
        assert!((h - 0.4150374992788438).abs() < 1e-12);
    }

    #[test]
    fn surprisal_is_nonnegative_and_additive_over_columns() {
        let mut rng = TrialRng::from_key(157);
        for _ in 0..50 {
            let rows =
                BitMatrix::from_rows((0..5).map(|_| BitVector::random(12, &mut rng)).collect(), 12)
                    .unwrap();
            let z = BitVector::random(12, &mut rng);
            let h = surprisal_given_rows(&z, &rows).unwrap();
            assert!(h >= 0.0);
            let mut sum = 0.0;
            for j in 0..12 {
                let col_rows = BitMatrix::from_rows(
                    rows.rows().iter().map(|r| BitVector::from_bits(&[r.get(j) as u8])).collect(),
                    1,
                )
                .unwrap();
                let col_z = BitVector::from_bits(&[z.get(j) as u8]);
                sum += surprisal_given_rows(&col_z, &col_rows).unwrap();
            }
            assert!((h - sum).abs() < 1e-9, "additivity: {h} vs {sum}");
        }
    }

    #[test]
    fn flipping_to_minority_never_decreases_surprisal() {
        let mut rng = TrialRng::from_key(163);
        for _ in 0..50 {
            let rows =
                BitMatrix::from_rows((0..7).map(|_| BitVector::random(10, &mut rng)).collect(), 10)
                    .unwrap();
            let mode = column_mode(&rows);
            let h_mode = surprisal_given_rows(&mode, &rows).unwrap();
            for j in 0..10 {
                let mut flipped = mode.clone();
                flipped.set(j, !flipped.get(j));
                let h_flipped = surprisal_given_rows(&flipped, &rows).unwrap();
                assert!(h_flipped >= h_mode - 1e-12);
            }
        }
    }

    #[test]
    fn column_mode_minimizes_over_all_candidates_at_tiny_d() {
        let mut rng = TrialRng::from_key(167);
        for _ in 0..20 {
            let rows =
                BitMatrix::from_rows((0..4).map(|_| BitVector::random(6, &mut rng)).collect(), 6)
                    .unwrap();
            let mode = column_mode(&rows);
            let h_mode = surprisal_given_rows(&mode, &rows).unwrap();
            for cand in 0u64..64 {
                let z = BitVector::from_u64(cand, 6);
                assert!(surprisal_given_rows(&z, &rows).unwrap() >= h_mode - 1e-12);
            }
        }
    }

    #[test]
    fn revealed_rows_that_are_a_submultiset_add_nothing() {
        let mut rng = TrialRng::from_key(173);
        let prior = PriorSpec::Tardos(crate::prior::TardosParams::new(20, 8, 5).unwrap());
        for _ in 0..20 {
            let rows =
                BitMatrix::from_rows((0..4).map(|_| BitVector::random(8, &mut rng)).collect(), 8)
                    .unwrap();
            let z = BitVector::random(8, &mut rng);
            let revealed = BitMatrix::from_rows(rows.rows()[..3].to_vec(), 8).unwrap();
            let k = SideInfoValue::RevealedRows { rows: revealed, indices: None };
            let q = SurprisalQuery {
                z: &z,
                conditioning_rows: &rows,
                sideinfo: &k,
                prior: &prior,
            };
            let gated = surprisal_given_sideinfo(&q).unwrap();
            let plain = surprisal_given_rows(&z, &rows).unwrap();
            assert_eq!(gated, plain);
        }
    }

    #[test]
    fn revealed_row_outside_the_sample_pins_the_posterior() {
        let prior = PriorSpec::Tardos(crate::prior::TardosParams::new(20, 4, 3).unwrap());
        let rows = BitMatrix::from_bit_rows(&[&[0, 0, 0, 0], &[1, 1, 1, 1]]);
        let z = BitVector::from_bits(&[1, 0, 1, 0]);
        let k = SideInfoValue::RevealedRows {
            rows: BitMatrix::from_bit_rows(&[&[1, 0, 1, 0]]),
            indices: None,
        };
        let q = SurprisalQuery { z: &z, conditioning_rows: &rows, sideinfo: &k, prior: &prior };
        assert_eq!(surprisal_given_sideinfo(&q).unwrap(), 0.0);
    }

    #[test]
    fn shuffled_pair_posterior_cases() {
        let prior = PriorSpec::Tardos(crate::prior::TardosParams::new(20, 6, 4).unwrap());
        let mut rng = TrialRng::from_key(179);
        let rows = BitMatrix::from_rows((0..3).map(|_| BitVector::random(6, &mut rng)).collect(), 6)
            .unwrap();
        let z = BitVector::random(6, &mut rng);

        // identical candidates equal to z: certainty
        let k_same = SideInfoValue::ShuffledPair {
            k1: z.clone(),
            k2: z.clone(),
            idx1: None,
            idx2: None,
        };
        let q = SurprisalQuery { z: &z, conditioning_rows: &rows, sideinfo: &k_same, prior: &prior };
        assert_eq!(surprisal_given_sideinfo(&q).unwrap(), 0.0);

        // symmetric likelihoods: complementing every bit of z against a
        // balanced conditioning sample gives L(k1) = L(k2)
        let balanced = BitMatrix::from_bit_rows(&[&[0, 0, 1, 1, 0, 1], &[1, 1, 0, 0, 1, 0]]);
        let mut comp = z.clone();
        for j in 0..6 {
            comp.set(j, !comp.get(j));
        }
        let k_fair = SideInfoValue::ShuffledPair {
            k1: z.clone(),
            k2: comp,
            idx1: None,
            idx2: None,
        };
        let q = SurprisalQuery {
            z: &z,
            conditioning_rows: &balanced,
            sideinfo: &k_fair,
            prior: &prior,
        };
        let h = surprisal_given_sideinfo(&q).unwrap();
        assert!((h - 1.0).abs() < 1e-12, "fair two-hypothesis posterior: {h}");
    }

    #[test]
    fn shuffled_pair_gate_fails_at_large_d() {
        // the pair tells the attacker almost everything: conditional
        // surprisal stays O(1)-ish while the unconditional one is Θ(d)
        use crate::attackers::{make_sideinfo, SideInfoSpec};
        use crate::prior::{sample_world, TardosParams};
        use crate::rng::Stream;
        let prior = PriorSpec::Tardos(TardosParams::new(40, 128, 10).unwrap());
        for t in 0..100u64 {
            let w = sample_world(&prior, 181, t).unwrap();
            let k = make_sideinfo(&SideInfoSpec::ShuffledPair, &w, &mut TrialRng::derive(181, t, Stream::SideInfo))
                .unwrap();
            let (k1, k2) = match &k {
                SideInfoValue::ShuffledPair { k1, k2, .. } => (k1.clone(), k2.clone()),
                _ => unreachable!(),
            };
            let s = w.dataset();
            let member = if s.contains_row(&k1) { k1 } else { k2 };
            let witness = s.rows().iter().position(|r| r == &member).unwrap();
            let rest = BitMatrix::from_rows(
                s.rows()
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != witness)
                    .map(|(_, r)| r.clone())
                    .collect(),
                128,
            )
            .unwrap();
            let q = SurprisalQuery {
                z: &member,
                conditioning_rows: &rest,
                sideinfo: &k,
                prior: &prior,
            };
            let h_cond = surprisal_given_sideinfo(&q).unwrap();
            let h_plain = surprisal_given_rows(&member, &rest).unwrap();
            assert!(
                h_cond < 0.9 * h_plain,
                "gate must fail: h_cond={h_cond}, h_plain={h_plain}"
            );
        }
    }

    #[test]
    fn unsupported_variants_error() {
        let prior = PriorSpec::Tardos(crate::prior::TardosParams::new(4, 2, 2).unwrap());
        let rows = BitMatrix::from_bit_rows(&[&[0, 1]]);
        let z = BitVector::from_bits(&[1, 1]);
        let k = SideInfoValue::Superset(rows.clone());
        let q = SurprisalQuery { z: &z, conditioning_rows: &rows, sideinfo: &k, prior: &prior };
        assert!(surprisal_given_sideinfo(&q).is_err());

        let spiked = PriorSpec::Spiked { m: 4, d: 2, n: 2 };
        let q2 = SurprisalQuery {
            z: &z,
            conditioning_rows: &rows,
            sideinfo: &SideInfoValue::None,
            prior: &spiked,
        };
        assert!(surprisal_given_sideinfo(&q2).is_err());
    }
}

//! The attack gallery and the side-information functions they consume.
//!
//! Attackers are deterministic functions of (release, side info); all
//! randomness lives in the samplers. Side-information values carry the
//! codebook provenance the conditional baseline sampler needs; attacker code
//! only ever reads the revealed contents.

use std::collections::HashSet;

use crate::bits::{BitMatrix, BitVector, RealVector};
use crate::error::{Error, Result};
use crate::mechanisms::{parity_signature, Release};
use crate::prior::{PriorSpec, World};
use crate::rng::TrialRng;

/// Which side-information function the game uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SideInfoSpec {
    None,
    /// Reveal the first m rows of S (with their codebook indices).
    RevealedRows { m: usize },
    /// Reveal a shuffled pair: one uniform row of S and one fresh draw from
    /// Nature outside S, in uniformly random order.
    ShuffledPair,
    /// Reveal the whole realized support.
    Superset,
}

impl SideInfoSpec {
    pub fn name(&self) -> String {
        match self {
            SideInfoSpec::None => "none".into(),
            SideInfoSpec::RevealedRows { m } => format!("revealed-rows({m})"),
            SideInfoSpec::ShuffledPair => "shuffled-pair".into(),
            SideInfoSpec::Superset => "superset".into(),
        }
    }
}

/// A realized side-information value K.
#[derive(Debug, Clone, PartialEq)]
pub enum SideInfoValue {
    None,
    RevealedRows {
        rows: BitMatrix,
        /// Codebook indices of the revealed rows, when the prior has one.
        indices: Option<Vec<usize>>,
    },
    ShuffledPair {
        k1: BitVector,
        k2: BitVector,
        /// Codebook indices of k1/k2 (sampler provenance, not attacker
        /// input); order matches the shuffled slots.
        idx1: Option<usize>,
        idx2: Option<usize>,
    },
    Superset(BitMatrix),
}

impl SideInfoValue {
    pub fn kind(&self) -> &'static str {
        match self {
            SideInfoValue::None => "none",
            SideInfoValue::RevealedRows { .. } => "revealed-rows",
            SideInfoValue::ShuffledPair { .. } => "shuffled-pair",
            SideInfoValue::Superset(_) => "superset",
        }
    }
}

/// Generate K from the realized world.
pub fn make_sideinfo(spec: &SideInfoSpec, world: &World, rng: &mut TrialRng) -> Result<SideInfoValue> {
    match *spec {
        SideInfoSpec::None => Ok(SideInfoValue::None),
        SideInfoSpec::RevealedRows { m } => {
            let s = world.dataset();
            if m > s.n() {
                return Err(Error::IncompatibleSpec(format!(
                    "cannot reveal {m} of {} rows",
                    s.n()
                )));
            }
            let rows = BitMatrix::from_rows(s.rows()[..m].to_vec(), s.d())?;
            let indices = world.s_indices.as_ref().map(|idx| idx[..m].to_vec());
            Ok(SideInfoValue::RevealedRows { rows, indices })
        }
        SideInfoSpec::ShuffledPair => {
            let s = world.dataset();
            let n = s.n();
            let member_pos = rng.below(n as u64) as usize;
            let member = s.row(member_pos).clone();
            let (fresh, member_idx, fresh_idx) = match world.prior {
                PriorSpec::Tardos(params) => {
                    let idx = world
                        .s_indices
                        .as_ref()
                        .ok_or_else(|| Error::IncompatibleSpec("dataset indices missing".into()))?;
                    let pool: Vec<usize> = (0..params.codebook_size)
                        .filter(|i| !idx.contains(i))
                        .collect();
                    if pool.is_empty() {
                        return Err(Error::IncompatibleSpec(
                            "shuffled pair needs a codebook row outside S".into(),
                        ));
                    }
                    let pick = pool[rng.below(pool.len() as u64) as usize];
                    (
                        world.codebook().row(pick).clone(),
                        Some(idx[member_pos]),
                        Some(pick),
                    )
                }
                PriorSpec::UniformHypercube { d, .. } => (BitVector::random(d, rng), None, None),
                _ => {
                    return Err(Error::IncompatibleSpec(
                        "shuffled-pair side info supports tardos and uniform-hypercube priors".into(),
                    ))
                }
            };
            if rng.below(2) == 0 {
                Ok(SideInfoValue::ShuffledPair {
                    k1: member,
                    k2: fresh,
                    idx1: member_idx,
                    idx2: fresh_idx,
                })
            } else {
                Ok(SideInfoValue::ShuffledPair {
                    k1: fresh,
                    k2: member,
                    idx1: fresh_idx,
                    idx2: member_idx,
                })
            }
        }
        SideInfoSpec::Superset => {
            if !world.prior.has_codebook() {
                return Err(Error::IncompatibleSpec(
                    "superset side info needs a finite-support prior".into(),
                ));
            }
            let mut rows = world.codebook().rows().to_vec();
            if let Some(atom) = &world.spiked_atom {
                rows.push(atom.clone());
            }
            let d = world.prior.d();
            Ok(SideInfoValue::Superset(BitMatrix::from_rows(rows, d)?))
        }
    }
}

/// Coordinate-wise threshold of a real release at 1/2; ties resolve to 1.
pub fn attack_round(y: &RealVector) -> BitVector {
    let mut z = BitVector::zeros(y.len());
    for (j, &v) in y.values().iter().enumerate() {
        if v >= 0.5 {
            z.set(j, true);
        }
    }
    z
}

/// Recover the unrevealed row from an average release by subtracting the
/// n-1 revealed rows from the unnormalized sum; coordinates round half-up
/// and clamp to {0, 1}.
pub fn attack_subtract(y: &RealVector, revealed: &BitMatrix, n: usize) -> Result<BitVector> {
    if revealed.n() + 1 != n {
        return Err(Error::IncompatibleSpec(format!(
            "subtract attack needs n-1 = {} revealed rows, got {}",
            n - 1,
            revealed.n()
        )));
    }
    if revealed.d() != y.len() {
        return Err(Error::DimensionMismatch { expected: y.len(), got: revealed.d() });
    }
    let mut z = BitVector::zeros(y.len());
    for j in 0..y.len() {
        let mut v = y.values()[j] * n as f64;
        for row in revealed.rows() {
            if row.get(j) {
                v -= 1.0;
            }
        }
        let rounded = (v + 0.5).floor();
        z.set(j, rounded >= 1.0);
    }
    Ok(z)
}

/// Return the candidate maximizing the inner product with the release; ties
/// go to the first candidate.
pub fn attack_two_candidate(y: &RealVector, k1: &BitVector, k2: &BitVector) -> Result<BitVector> {
    let d1 = k1.dot(y)?;
    let d2 = k2.dot(y)?;
    Ok(if d2 > d1 { k2.clone() } else { k1.clone() })
}

/// Membership verdict of a distinguisher.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MiaVerdict {
    In,
    Out,
}

/// Answer In iff the candidate's adjacent-pair XOR signature matches some
/// row of the parity release exactly.
pub fn attack_parity_fit(h: &BitMatrix, x: &BitVector) -> Result<MiaVerdict> {
    let sig = parity_signature(x)?;
    if sig.len() != h.d() {
        return Err(Error::DimensionMismatch { expected: h.d(), got: sig.len() });
    }
    Ok(if h.rows().iter().any(|r| r == &sig) {
        MiaVerdict::In
    } else {
        MiaVerdict::Out
    })
}

/// All rows of the revealed superset whose pair-XOR signature matches some
/// row of the parity release, in support order.
pub fn attack_superset_lookup(h: &BitMatrix, support: &BitMatrix) -> Result<Vec<BitVector>> {
    let sigs: HashSet<&BitVector> = h.rows().iter().collect();
    let mut out = Vec::new();
    for row in support.rows() {
        let sig = parity_signature(row)?;
        if sigs.contains(&sig) {
            out.push(row.clone());
        }
    }
    Ok(out)
}

/// Ignore the release entirely and emit a fixed guess.
pub fn attack_constant(z0: &BitVector) -> BitVector {
    z0.clone()
}

/// Attack selection as configured in a game spec.
#[derive(Debug, Clone, PartialEq)]
pub enum AttackerSpec {
    Round,
    Subtract,
    TwoCandidate,
    ParityFitMia,
    SupersetLookup,
    Constant(BitVector),
    /// Distinguisher that answers In unconditionally (baseline for the
    /// membership game).
    AlwaysIn,
}

impl AttackerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            AttackerSpec::Round => "round",
            AttackerSpec::Subtract => "subtract",
            AttackerSpec::TwoCandidate => "two-candidate",
            AttackerSpec::ParityFitMia => "parity-fit",
            AttackerSpec::SupersetLookup => "superset-lookup",
            AttackerSpec::Constant(_) => "constant",
            AttackerSpec::AlwaysIn => "always-in",
        }
    }

    pub fn is_distinguisher(&self) -> bool {
        matches!(self, AttackerSpec::ParityFitMia | AttackerSpec::AlwaysIn)
    }

    /// Produce the reconstruction z for the point-output attackers.
    pub fn reconstruct(&self, release: &Release, k: &SideInfoValue, n: usize) -> Result<BitVector> {
        match self {
            AttackerSpec::Round => Ok(attack_round(release.as_real()?)),
            AttackerSpec::Subtract => match k {
                SideInfoValue::RevealedRows { rows, .. } => {
                    attack_subtract(release.as_real()?, rows, n)
                }
                _ => Err(Error::IncompatibleSpec(
                    "subtract attack needs revealed-rows side info".into(),
                )),
            },
            AttackerSpec::TwoCandidate => match k {
                SideInfoValue::ShuffledPair { k1, k2, .. } => {
                    attack_two_candidate(release.as_real()?, k1, k2)
                }
                _ => Err(Error::IncompatibleSpec(
                    "two-candidate attack needs shuffled-pair side info".into(),
                )),
            },
            AttackerSpec::SupersetLookup => match k {
                SideInfoValue::Superset(support) => {
                    let matched = attack_superset_lookup(release.as_parity()?, support)?;
                    matched.into_iter().next().ok_or_else(|| {
                        Error::IncompatibleSpec("superset lookup matched nothing".into())
                    })
                }
                _ => Err(Error::IncompatibleSpec(
                    "superset lookup needs superset side info".into(),
                )),
            },
            AttackerSpec::Constant(z0) => Ok(attack_constant(z0)),
            AttackerSpec::ParityFitMia | AttackerSpec::AlwaysIn => Err(Error::IncompatibleSpec(
                "distinguisher attackers emit verdicts, not points".into(),
            )),
        }
    }

    /// Produce the In/Out verdict for the distinguisher attackers.
    pub fn distinguish(&self, release: &Release, x: &BitVector) -> Result<MiaVerdict> {
        match self {
            AttackerSpec::ParityFitMia => attack_parity_fit(release.as_parity()?, x),
            AttackerSpec::AlwaysIn => Ok(MiaVerdict::In),
            _ => Err(Error::IncompatibleSpec(
                "not a distinguisher attacker".into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::{exact_average, noisy_average, xor_parity, NoiseParams};
    use crate::prior::{sample_world, PriorSpec, TardosParams};
    use crate::rng::{Stream, TrialRng};

    #[test]
    fn round_attack_cases() {
        let y = RealVector::new(vec![0.9, 0.1]).unwrap();
        assert_eq!(attack_round(&y), BitVector::from_bits(&[1, 0]));

        let tie = RealVector::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(attack_round(&tie), BitVector::from_bits(&[1, 1]));

        let zero = RealVector::new(vec![0.0, 0.0, 0.0]).unwrap();
        assert_eq!(attack_round(&zero), BitVector::from_bits(&[0, 0, 0]));
    }

    #[test]
    fn subtract_attack_hand_case() {
        let s = BitMatrix::from_bit_rows(&[&[0, 1], &[1, 1]]);
        let y = exact_average(&s).unwrap();
        let revealed = BitMatrix::from_bit_rows(&[&[0, 1]]);
        let z = attack_subtract(y.as_real().unwrap(), &revealed, 2).unwrap();
        assert_eq!(z, BitVector::from_bits(&[1, 1]));
    }

    #[test]
    fn subtract_attack_recovers_held_out_row_from_exact_average() {
        let prior = PriorSpec::Tardos(TardosParams::new(30, 24, 8).unwrap());
        for t in 0..100u64 {
            let w = sample_world(&prior, 97, t).unwrap();
            let s = w.dataset();
            let y = exact_average(s).unwrap();
            let revealed = BitMatrix::from_rows(s.rows()[..7].to_vec(), 24).unwrap();
            let z = attack_subtract(y.as_real().unwrap(), &revealed, 8).unwrap();
            assert_eq!(&z, s.row(7), "exact-average subtraction must be lossless");
        }
    }

    #[test]
    fn subtract_attack_fails_under_unit_scale_noise() {
        // noise scale 1/(eps_hat·n) = 1 swamps the +-1/2 rounding margin;
        // full-row recovery collapses
        let prior = PriorSpec::UniformHypercube { d: 512, n: 50 };
        let noise = NoiseParams::new(0.02, 50).unwrap();
        let mut recovered = 0u32;
        let trials = 200;
        for t in 0..trials {
            let w = sample_world(&prior, 101, t).unwrap();
            let s = w.dataset();
            let mut rng = TrialRng::derive(101, t, Stream::Mechanism);
            let y = noisy_average(s, &noise, &mut rng).unwrap();
            let revealed = BitMatrix::from_rows(s.rows()[..49].to_vec(), 512).unwrap();
            let z = attack_subtract(y.as_real().unwrap(), &revealed, 50).unwrap();
            if &z == s.row(49) {
                recovered += 1;
            }
        }
        let frac = recovered as f64 / trials as f64;
        assert!(frac <= 0.05, "recovery rate {frac}");
    }

    #[test]
    fn two_candidate_dominance_and_tie_rule() {
        let y = RealVector::new(vec![1.0, 1.0, 0.0, 0.0]).unwrap();
        let k1 = BitVector::from_bits(&[1, 1, 0, 0]);
        let k2 = BitVector::from_bits(&[0, 0, 1, 1]);
        assert_eq!(attack_two_candidate(&y, &k1, &k2).unwrap(), k1);
        assert_eq!(attack_two_candidate(&y, &k2, &k1).unwrap(), k1);
        assert_eq!(attack_two_candidate(&y, &k1, &k1).unwrap(), k1);
    }

    #[test]
    fn two_candidate_shift_invariance_for_equal_weights() {
        let mut rng = TrialRng::from_key(103);
        for _ in 0..100 {
            let k1 = BitVector::random(16, &mut rng);
            // same Hamming weight: permute the bits
            let mut bits: Vec<u8> = k1.iter_bits().map(|b| b as u8).collect();
            let swap = (rng.below(16) as usize, rng.below(16) as usize);
            bits.swap(swap.0, swap.1);
            let k2 = BitVector::from_bits(&bits);
            let y: Vec<f64> = (0..16).map(|_| rng.open01()).collect();
            let shift = rng.open01();
            let shifted: Vec<f64> = y.iter().map(|v| v + shift).collect();
            let y = RealVector::new(y).unwrap();
            let shifted = RealVector::new(shifted).unwrap();
            assert_eq!(
                attack_two_candidate(&y, &k1, &k2).unwrap(),
                attack_two_candidate(&shifted, &k1, &k2).unwrap()
            );
        }
    }

    #[test]
    fn two_candidate_finds_member_on_exact_average_at_scale() {
        let prior = PriorSpec::Tardos(TardosParams::new(100, 4096, 10).unwrap());
        let trials = 1000u64;
        let mut hits = 0u64;
        for t in 0..trials {
            let w = sample_world(&prior, 107, t).unwrap();
            let s = w.dataset();
            let k = make_sideinfo(&SideInfoSpec::ShuffledPair, &w, &mut TrialRng::derive(107, t, Stream::SideInfo))
                .unwrap();
            let y = exact_average(s).unwrap();
            let z = AttackerSpec::TwoCandidate.reconstruct(&y, &k, 10).unwrap();
            if s.contains_row(&z) {
                hits += 1;
            }
        }
        let frac = hits as f64 / trials as f64;
        assert!(frac >= 0.95, "member pick rate {frac}");
    }

    #[test]
    fn parity_fit_hand_cases_and_member_tpr() {
        let h = BitMatrix::from_bit_rows(&[&[1]]);
        assert_eq!(
            attack_parity_fit(&h, &BitVector::from_bits(&[0, 1])).unwrap(),
            MiaVerdict::In
        );
        assert_eq!(
            attack_parity_fit(&h, &BitVector::from_bits(&[0, 0])).unwrap(),
            MiaVerdict::Out
        );

        let mut rng = TrialRng::from_key(109);
        for _ in 0..50 {
            let s = BitMatrix::from_rows((0..6).map(|_| BitVector::random(16, &mut rng)).collect(), 16)
                .unwrap();
            let h = xor_parity(&s).unwrap();
            for row in s.rows() {
                assert_eq!(
                    attack_parity_fit(h.as_parity().unwrap(), row).unwrap(),
                    MiaVerdict::In,
                    "members always fit"
                );
            }
        }
    }

    #[test]
    fn superset_lookup_returns_all_members() {
        let prior = PriorSpec::RandomSupport { m: 200, d: 32, n: 10 };
        let mut false_inclusions = 0u64;
        let mut support_rows_checked = 0u64;
        for t in 0..200u64 {
            let w = sample_world(&prior, 113, t).unwrap();
            let s = w.dataset();
            let h = xor_parity(s).unwrap();
            let k = make_sideinfo(&SideInfoSpec::Superset, &w, &mut TrialRng::derive(113, t, Stream::SideInfo))
                .unwrap();
            let support = match &k {
                SideInfoValue::Superset(m) => m.clone(),
                _ => unreachable!(),
            };
            let matched = attack_superset_lookup(h.as_parity().unwrap(), &support).unwrap();
            for row in s.rows() {
                assert!(matched.contains(row), "every dataset row must be identified");
            }
            for row in matched {
                if !s.contains_row(&row) {
                    false_inclusions += 1;
                }
            }
            support_rows_checked += 200 - 10;
        }
        // expected false-inclusion rate per non-member is at most n·2^(-d/2)
        let rate = false_inclusions as f64 / support_rows_checked as f64;
        let bound = 10.0 * 2f64.powi(-16);
        assert!(rate <= 3.0 * bound + 1e-3, "false inclusion rate {rate}");
    }

    #[test]
    fn superset_lookup_with_minimal_superset_is_exact() {
        // when the support is exactly S and signatures are distinct, the
        // lookup returns S and nothing else
        let s = BitMatrix::from_bit_rows(&[&[0, 1, 0, 0], &[1, 1, 1, 0], &[0, 0, 1, 1]]);
        let h = xor_parity(&s).unwrap();
        let matched = attack_superset_lookup(h.as_parity().unwrap(), &s).unwrap();
        assert_eq!(matched.len(), 3);
    }

    #[test]
    fn constant_attack_on_spiked_prior_hits_both_s_and_t() {
        use crate::prior::sample_fresh_t;
        let prior = PriorSpec::Spiked { m: 100, d: 32, n: 8 };
        let z0 = BitVector::zeros(32);
        let trials = 5000u64;
        let (mut in_s, mut in_t) = (0u64, 0u64);
        for t in 0..trials {
            let w = sample_world(&prior, 127, t).unwrap();
            if w.dataset().contains_row(&z0) {
                in_s += 1;
            }
            let fresh = sample_fresh_t(&w, &mut TrialRng::derive(127, t, Stream::FreshT)).unwrap();
            if fresh.contains_row(&z0) {
                in_t += 1;
            }
        }
        let fs = in_s as f64 / trials as f64;
        let ft = in_t as f64 / trials as f64;
        let expect = 1.0 - 0.5f64.powi(8);
        assert!(fs >= expect - 0.01, "atom in S rate {fs}");
        // the trivial guess does not separate the real dataset from a fresh
        // one: same hit rate on both sides
        assert!((fs - ft).abs() < 0.02, "S rate {fs} vs T rate {ft}");
    }

    #[test]
    fn constant_attack_misses_uniform_hypercube() {
        let prior = PriorSpec::UniformHypercube { d: 64, n: 8 };
        let z0 = BitVector::zeros(64);
        for t in 0..10_000u64 {
            let w = sample_world(&prior, 131, t).unwrap();
            assert!(!w.dataset().contains_row(&z0));
        }
    }

    #[test]
    fn revealed_rows_side_info_is_the_dataset_prefix() {
        let prior = PriorSpec::Tardos(TardosParams::new(20, 8, 5).unwrap());
        let w = sample_world(&prior, 137, 0).unwrap();
        let k = make_sideinfo(
            &SideInfoSpec::RevealedRows { m: 4 },
            &w,
            &mut TrialRng::derive(137, 0, Stream::SideInfo),
        )
        .unwrap();
        match k {
            SideInfoValue::RevealedRows { rows, indices } => {
                assert_eq!(rows.rows(), &w.dataset().rows()[..4]);
                assert_eq!(indices.unwrap(), w.s_indices.clone().unwrap()[..4]);
            }
            _ => panic!("expected revealed rows"),
        }
    }

    #[test]
    fn shuffled_pair_contains_exactly_one_member_whp() {
        let prior = PriorSpec::Tardos(TardosParams::new(50, 64, 5).unwrap());
        let trials = 2000u64;
        let mut exactly_one = 0u64;
        for t in 0..trials {
            let w = sample_world(&prior, 139, t).unwrap();
            let k = make_sideinfo(&SideInfoSpec::ShuffledPair, &w, &mut TrialRng::derive(139, t, Stream::SideInfo))
                .unwrap();
            if let SideInfoValue::ShuffledPair { k1, k2, .. } = &k {
                let s = w.dataset();
                let c = s.contains_row(k1) as u32 + s.contains_row(k2) as u32;
                if c == 1 {
                    exactly_one += 1;
                }
            }
        }
        let frac = exactly_one as f64 / trials as f64;
        assert!(frac >= 0.999, "exactly-one-member rate {frac}");
    }

    #[test]
    fn none_side_info_is_empty() {
        let prior = PriorSpec::UniformHypercube { d: 4, n: 2 };
        let w = sample_world(&prior, 149, 0).unwrap();
        let k = make_sideinfo(&SideInfoSpec::None, &w, &mut TrialRng::derive(149, 0, Stream::SideInfo)).unwrap();
        assert_eq!(k, SideInfoValue::None);
    }

    #[test]
    fn incompatible_pairings_error() {
        let prior = PriorSpec::UniformHypercube { d: 4, n: 2 };
        let w = sample_world(&prior, 151, 0).unwrap();
        assert!(make_sideinfo(&SideInfoSpec::Superset, &w, &mut TrialRng::from_key(0)).is_err());

        let y = Release::Real(RealVector::new(vec![0.5; 4]).unwrap());
        assert!(AttackerSpec::Subtract.reconstruct(&y, &SideInfoValue::None, 2).is_err());
        assert!(AttackerSpec::TwoCandidate.reconstruct(&y, &SideInfoValue::None, 2).is_err());
        assert!(AttackerSpec::ParityFitMia.reconstruct(&y, &SideInfoValue::None, 2).is_err());
        assert!(AttackerSpec::Round.distinguish(&y, &BitVector::zeros(4)).is_err());
    }
}

//! Priors over data distributions (Natures), Nature realization, dataset
//! sampling, the coupled (S, T) sampler, and exact conditional sampling of
//! the baseline dataset given side information.
//!
//! Conditioning for revealed rows and shuffled pairs is done at the codebook
//! index level, which coincides with content-level conditioning whenever
//! codebook rows are distinct (at d = 32 the measured collision rate of two
//! rows under the Tardos prior is below 2^-10). The tiny-scale enumeration
//! oracle validates the conditional laws end to end.

use crate::attackers::SideInfoValue;
use crate::bits::{BitMatrix, BitVector};
use crate::error::{Error, Result};
use crate::rng::TrialRng;

/// Parameters of the Tardos prior: a codebook of `codebook_size` rows in
/// dimension `d`, from which datasets of `n` rows are drawn without
/// repetition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TardosParams {
    pub codebook_size: usize,
    pub d: usize,
    pub n: usize,
}

impl TardosParams {
    pub fn new(codebook_size: usize, d: usize, n: usize) -> Result<Self> {
        let p = TardosParams { codebook_size, d, n };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 || self.d < 1 {
            return Err(Error::InvalidParameter("tardos requires n >= 1 and d >= 1".into()));
        }
        if self.codebook_size < self.n {
            return Err(Error::InvalidParameter(format!(
                "tardos requires N >= n, got N={} n={}",
                self.codebook_size, self.n
            )));
        }
        Ok(())
    }
}

/// A meta-distribution over Natures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PriorSpec {
    /// Column biases p_j ~ U[0,1], an N×d Bernoulli codebook, datasets are
    /// uniform n-subsets of the codebook.
    Tardos(TardosParams),
    /// Point mass on the uniform distribution over {0,1}^d; datasets are n
    /// i.i.d. uniform vectors.
    UniformHypercube { d: usize, n: usize },
    /// A uniform random support of `m` vectors; Nature is uniform over the
    /// support and datasets are n i.i.d. draws from it.
    RandomSupport { m: usize, d: usize, n: usize },
    /// As RandomSupport, plus an atom at the all-zero vector carrying
    /// probability 1/2 on every draw.
    Spiked { m: usize, d: usize, n: usize },
}

impl PriorSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PriorSpec::Tardos(p) => p.validate(),
            PriorSpec::UniformHypercube { d, n } => {
                if d < 1 || n < 1 {
                    return Err(Error::InvalidParameter("hypercube requires d, n >= 1".into()));
                }
                Ok(())
            }
            PriorSpec::RandomSupport { m, d, n } | PriorSpec::Spiked { m, d, n } => {
                if d < 1 || n < 1 {
                    return Err(Error::InvalidParameter("support prior requires d, n >= 1".into()));
                }
                if m < n {
                    return Err(Error::InvalidParameter(format!(
                        "support prior requires m >= n, got m={m} n={n}"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn n(&self) -> usize {
        match *self {
            PriorSpec::Tardos(p) => p.n,
            PriorSpec::UniformHypercube { n, .. }
            | PriorSpec::RandomSupport { n, .. }
            | PriorSpec::Spiked { n, .. } => n,
        }
    }

    pub fn d(&self) -> usize {
        match *self {
            PriorSpec::Tardos(p) => p.d,
            PriorSpec::UniformHypercube { d, .. }
            | PriorSpec::RandomSupport { d, .. }
            | PriorSpec::Spiked { d, .. } => d,
        }
    }

    /// Priors whose realized Nature has a finite, explicitly stored support.
    pub fn has_codebook(&self) -> bool {
        !matches!(self, PriorSpec::UniformHypercube { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            PriorSpec::Tardos(_) => "tardos",
            PriorSpec::UniformHypercube { .. } => "uniform-hypercube",
            PriorSpec::RandomSupport { .. } => "random-support",
            PriorSpec::Spiked { .. } => "spiked",
        }
    }
}

/// Where the trial's randomness came from; recorded for replay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RngTrace {
    pub master_seed: u64,
    pub trial: u64,
}

/// One realized trial: the Nature drawn from the prior and, once
/// [`sample_dataset`] has run, the dataset S with its provenance.
#[derive(Debug, Clone)]
pub struct World {
    pub prior: PriorSpec,
    /// Tardos column biases.
    pub p: Option<Vec<f64>>,
    /// Realized finite support (Tardos codebook, random support).
    pub codebook: Option<BitMatrix>,
    /// The heavy atom of the spiked prior.
    pub spiked_atom: Option<BitVector>,
    /// Codebook indices behind the rows of S, in draw order. Distinct for
    /// Tardos (sampling without repetition); i.i.d. for RandomSupport; absent
    /// when rows are not codebook lookups.
    pub s_indices: Option<Vec<usize>>,
    /// The dataset S.
    pub dataset: Option<BitMatrix>,
    pub trace: RngTrace,
}

impl World {
    pub fn dataset(&self) -> &BitMatrix {
        self.dataset.as_ref().expect("dataset sampled")
    }

    pub fn codebook(&self) -> &BitMatrix {
        self.codebook.as_ref().expect("prior has a codebook")
    }
}

/// Realize a Nature from the prior. The dataset is not sampled yet.
pub fn sample_nature(prior: &PriorSpec, rng: &mut TrialRng, trace: RngTrace) -> Result<World> {
    prior.validate()?;
    let mut world = World {
        prior: prior.clone(),
        p: None,
        codebook: None,
        spiked_atom: None,
        s_indices: None,
        dataset: None,
        trace,
    };
    match *prior {
        PriorSpec::Tardos(TardosParams { codebook_size, d, .. }) => {
            let p: Vec<f64> = (0..d).map(|_| rng.open01()).collect();
            let rows: Vec<BitVector> = (0..codebook_size)
                .map(|_| BitVector::bernoulli(&p, rng))
                .collect();
            world.p = Some(p);
            world.codebook = Some(BitMatrix::from_rows(rows, d)?);
        }
        PriorSpec::UniformHypercube { .. } => {}
        PriorSpec::RandomSupport { m, d, .. } => {
            let rows: Vec<BitVector> = (0..m).map(|_| BitVector::random(d, rng)).collect();
            world.codebook = Some(BitMatrix::from_rows(rows, d)?);
        }
        PriorSpec::Spiked { m, d, .. } => {
            let rows: Vec<BitVector> = (0..m).map(|_| BitVector::random(d, rng)).collect();
            world.codebook = Some(BitMatrix::from_rows(rows, d)?);
            world.spiked_atom = Some(BitVector::zeros(d));
        }
    }
    Ok(world)
}

/// Draw one point from the realized Nature.
pub fn sample_point(world: &World, rng: &mut TrialRng) -> BitVector {
    match world.prior {
        PriorSpec::Tardos(_) | PriorSpec::RandomSupport { .. } => {
            let c = world.codebook();
            c.row(rng.below(c.n() as u64) as usize).clone()
        }
        PriorSpec::UniformHypercube { d, .. } => BitVector::random(d, rng),
        PriorSpec::Spiked { .. } => {
            if rng.bernoulli(0.5) {
                world.spiked_atom.clone().expect("spiked atom")
            } else {
                let c = world.codebook();
                c.row(rng.below(c.n() as u64) as usize).clone()
            }
        }
    }
}

/// Sample the dataset S into the world.
///
/// Tardos: a uniform ordered draw of n distinct codebook indices. Uniform
/// hypercube: n fresh uniform vectors. RandomSupport / Spiked: n i.i.d.
/// draws from the realized Nature.
pub fn sample_dataset(world: &mut World, rng: &mut TrialRng) -> Result<()> {
    let n = world.prior.n();
    let d = world.prior.d();
    match world.prior {
        PriorSpec::Tardos(TardosParams { codebook_size, .. }) => {
            if n > codebook_size {
                return Err(Error::InvalidParameter("n exceeds codebook size".into()));
            }
            let idx = rng.distinct_ordered(n, codebook_size);
            let rows: Vec<BitVector> = idx.iter().map(|&i| world.codebook().row(i).clone()).collect();
            world.s_indices = Some(idx);
            world.dataset = Some(BitMatrix::from_rows(rows, d)?);
        }
        PriorSpec::UniformHypercube { .. } => {
            let rows: Vec<BitVector> = (0..n).map(|_| BitVector::random(d, rng)).collect();
            world.dataset = Some(BitMatrix::from_rows(rows, d)?);
        }
        PriorSpec::RandomSupport { m, .. } => {
            let idx: Vec<usize> = (0..n).map(|_| rng.below(m as u64) as usize).collect();
            let rows: Vec<BitVector> = idx.iter().map(|&i| world.codebook().row(i).clone()).collect();
            world.s_indices = Some(idx);
            world.dataset = Some(BitMatrix::from_rows(rows, d)?);
        }
        PriorSpec::Spiked { .. } => {
            let rows: Vec<BitVector> = (0..n).map(|_| sample_point(world, rng)).collect();
            world.dataset = Some(BitMatrix::from_rows(rows, d)?);
        }
    }
    Ok(())
}

/// Realize Nature and S in one call.
pub fn sample_world(prior: &PriorSpec, master_seed: u64, trial: u64) -> Result<World> {
    use crate::rng::Stream;
    let trace = RngTrace { master_seed, trial };
    let mut world = sample_nature(prior, &mut TrialRng::derive(master_seed, trial, Stream::Nature), trace)?;
    sample_dataset(&mut world, &mut TrialRng::derive(master_seed, trial, Stream::Dataset))?;
    Ok(world)
}

/// An independent second dataset from the same realized Nature.
pub fn sample_fresh_t(world: &World, rng: &mut TrialRng) -> Result<BitMatrix> {
    let n = world.prior.n();
    let d = world.prior.d();
    match world.prior {
        PriorSpec::Tardos(TardosParams { codebook_size, .. }) => {
            let idx = rng.distinct_ordered(n, codebook_size);
            let rows: Vec<BitVector> = idx.iter().map(|&i| world.codebook().row(i).clone()).collect();
            BitMatrix::from_rows(rows, d)
        }
        PriorSpec::UniformHypercube { .. } => {
            let rows: Vec<BitVector> = (0..n).map(|_| BitVector::random(d, rng)).collect();
            BitMatrix::from_rows(rows, d)
        }
        PriorSpec::RandomSupport { m, .. } => {
            let rows: Vec<BitVector> = (0..n)
                .map(|_| world.codebook().row(rng.below(m as u64) as usize).clone())
                .collect();
            BitMatrix::from_rows(rows, d)
        }
        PriorSpec::Spiked { .. } => {
            let rows: Vec<BitVector> = (0..n).map(|_| sample_point(world, rng)).collect();
            BitMatrix::from_rows(rows, d)
        }
    }
}

/// One coupled trial of the five-step (S, T) process: shared biases, two
/// independent index sets, rows sampled once for the union.
#[derive(Debug, Clone)]
pub struct CoupledWorld {
    pub p: Vec<f64>,
    pub i_s: Vec<usize>,
    pub i_t: Vec<usize>,
    pub s: BitMatrix,
    pub t: BitMatrix,
    /// |I_S ∩ I_T|
    pub k: usize,
}

/// Sample (S, T) through the coupled process. Its marginal law over (S, T)
/// equals realizing a Tardos Nature and drawing S, T independently from it.
pub fn sample_coupled_st(params: &TardosParams, rng: &mut TrialRng) -> Result<CoupledWorld> {
    params.validate()?;
    let TardosParams { codebook_size, d, n } = *params;
    let p: Vec<f64> = (0..d).map(|_| rng.open01()).collect();
    let i_s = rng.distinct_ordered(n, codebook_size);
    let i_t = rng.distinct_ordered(n, codebook_size);

    // Rows only exist for touched indices; sample them in ascending index
    // order so the draw sequence is independent of the index sets' order.
    let mut touched: Vec<usize> = i_s.iter().chain(i_t.iter()).copied().collect();
    touched.sort_unstable();
    touched.dedup();
    let mut rows: Vec<Option<BitVector>> = vec![None; codebook_size];
    for &i in &touched {
        rows[i] = Some(BitVector::bernoulli(&p, rng));
    }

    let collect = |idx: &[usize]| -> Result<BitMatrix> {
        let r: Vec<BitVector> = idx
            .iter()
            .map(|&i| rows[i].clone().expect("row sampled for touched index"))
            .collect();
        BitMatrix::from_rows(r, d)
    };
    let s = collect(&i_s)?;
    let t = collect(&i_t)?;
    let k = i_s.iter().filter(|i| i_t.contains(i)).count();
    Ok(CoupledWorld { p, i_s, i_t, s, t, k })
}

/// Sample the baseline dataset T from Nature conditioned on the side
/// information K. Every supported class has an exact conditional sampler:
///
/// * `None`: identical to [`sample_fresh_t`];
/// * `Superset`: the side information determines Nature and adds nothing
///   beyond it, so again a fresh draw;
/// * `RevealedRows`: T contains the revealed rows; the remaining indices are
///   a uniform ordered draw from the codebook minus the revealed indices;
/// * `ShuffledPair`: the member role is re-randomized uniformly between the
///   two candidates (the generative law is symmetric in them), T is forced
///   to contain the member-role index and to avoid the other.
pub fn sample_t_given_sideinfo(
    world: &World,
    k: &SideInfoValue,
    rng: &mut TrialRng,
) -> Result<BitMatrix> {
    let n = world.prior.n();
    let d = world.prior.d();
    match k {
        SideInfoValue::None | SideInfoValue::Superset(_) => sample_fresh_t(world, rng),
        SideInfoValue::RevealedRows { rows, indices } => {
            let m = rows.n();
            if m > n {
                return Err(Error::IncompatibleSpec("revealed more rows than n".into()));
            }
            match world.prior {
                PriorSpec::Tardos(TardosParams { codebook_size, .. }) => {
                    let revealed = indices.as_ref().ok_or_else(|| {
                        Error::IncompatibleSpec("tardos revealed rows need codebook indices".into())
                    })?;
                    let remaining: Vec<usize> =
                        (0..codebook_size).filter(|i| !revealed.contains(i)).collect();
                    // ordered draw of n-m distinct indices from the remainder
                    let picks = rng.distinct_ordered(n - m, remaining.len());
                    let mut out: Vec<BitVector> = rows.rows().to_vec();
                    for pk in picks {
                        out.push(world.codebook().row(remaining[pk]).clone());
                    }
                    BitMatrix::from_rows(out, d)
                }
                PriorSpec::UniformHypercube { .. } => {
                    let mut out: Vec<BitVector> = rows.rows().to_vec();
                    for _ in 0..(n - m) {
                        out.push(BitVector::random(d, rng));
                    }
                    BitMatrix::from_rows(out, d)
                }
                _ => Err(Error::IncompatibleSpec(
                    "revealed-rows conditioning supports tardos and uniform-hypercube priors".into(),
                )),
            }
        }
        SideInfoValue::ShuffledPair { k1, k2, idx1, idx2 } => match world.prior {
            PriorSpec::Tardos(TardosParams { codebook_size, .. }) => {
                let (a, b) = match (idx1, idx2) {
                    (Some(a), Some(b)) => (*a, *b),
                    _ => {
                        return Err(Error::IncompatibleSpec(
                            "tardos shuffled-pair conditioning needs codebook indices".into(),
                        ))
                    }
                };
                let member = if rng.below(2) == 0 { a } else { b };
                let excluded = if member == a { b } else { a };
                let pool: Vec<usize> = (0..codebook_size)
                    .filter(|&i| i != a && i != b)
                    .collect();
                let picks = rng.distinct_ordered(n - 1, pool.len());
                let mut out = vec![world.codebook().row(member).clone()];
                for pk in picks {
                    out.push(world.codebook().row(pool[pk]).clone());
                }
                debug_assert!(excluded == a || excluded == b);
                BitMatrix::from_rows(out, d)
            }
            PriorSpec::UniformHypercube { .. } => {
                let member = if rng.below(2) == 0 { k1 } else { k2 };
                let mut out = vec![member.clone()];
                for _ in 0..(n - 1) {
                    out.push(BitVector::random(d, rng));
                }
                BitMatrix::from_rows(out, d)
            }
            _ => Err(Error::IncompatibleSpec(
                "shuffled-pair conditioning supports tardos and uniform-hypercube priors".into(),
            )),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    fn trace() -> RngTrace {
        RngTrace::default()
    }

    #[test]
    fn tardos_nature_is_deterministic_per_seed() {
        let prior = PriorSpec::Tardos(TardosParams::new(3, 2, 2).unwrap());
        let w1 = sample_nature(&prior, &mut TrialRng::derive(7, 0, Stream::Nature), trace()).unwrap();
        let w2 = sample_nature(&prior, &mut TrialRng::derive(7, 0, Stream::Nature), trace()).unwrap();
        assert_eq!(w1.codebook(), w2.codebook());
        assert_eq!(w1.p, w2.p);
        let w3 = sample_nature(&prior, &mut TrialRng::derive(8, 0, Stream::Nature), trace()).unwrap();
        assert_ne!(w1.codebook(), w3.codebook());
    }

    #[test]
    fn tardos_codebook_entries_average_one_half() {
        // law of total expectation: E[Ber(p)] with p ~ U[0,1] is 1/2
        let prior = PriorSpec::Tardos(TardosParams::new(5, 2, 2).unwrap());
        let mut ones = 0u64;
        let mut total = 0u64;
        for t in 0..20_000u64 {
            let w = sample_nature(&prior, &mut TrialRng::derive(11, t, Stream::Nature), trace()).unwrap();
            for row in w.codebook().rows() {
                ones += row.count_ones() as u64;
                total += 2;
            }
        }
        let mean = ones as f64 / total as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn spiked_atom_has_mass_one_half() {
        let prior = PriorSpec::Spiked { m: 50, d: 16, n: 10 };
        let mut atoms = 0u64;
        let mut total = 0u64;
        for t in 0..10_000u64 {
            let mut w = sample_nature(&prior, &mut TrialRng::derive(13, t, Stream::Nature), trace()).unwrap();
            sample_dataset(&mut w, &mut TrialRng::derive(13, t, Stream::Dataset)).unwrap();
            for row in w.dataset().rows() {
                if row.count_ones() == 0 {
                    atoms += 1;
                }
                total += 1;
            }
        }
        let frac = atoms as f64 / total as f64;
        // a uniform 16-bit support row is all-zero with probability 2^-16
        assert!((frac - 0.5).abs() < 0.01, "atom fraction {frac}");
    }

    #[test]
    fn dataset_with_full_codebook_is_a_permutation() {
        let prior = PriorSpec::Tardos(TardosParams::new(4, 3, 4).unwrap());
        for t in 0..50u64 {
            let mut w = sample_nature(&prior, &mut TrialRng::derive(17, t, Stream::Nature), trace()).unwrap();
            sample_dataset(&mut w, &mut TrialRng::derive(17, t, Stream::Dataset)).unwrap();
            let mut idx = w.s_indices.clone().unwrap();
            idx.sort_unstable();
            assert_eq!(idx, vec![0, 1, 2, 3]);
            assert_eq!(w.dataset().sorted_rows(), w.codebook().sorted_rows());
        }
    }

    #[test]
    fn dataset_subsets_are_uniform() {
        let prior = PriorSpec::Tardos(TardosParams::new(3, 1, 2).unwrap());
        let mut counts = [0u64; 3];
        let trials = 100_000u64;
        for t in 0..trials {
            let mut w = sample_nature(&prior, &mut TrialRng::derive(19, t, Stream::Nature), trace()).unwrap();
            sample_dataset(&mut w, &mut TrialRng::derive(19, t, Stream::Dataset)).unwrap();
            let mut idx = w.s_indices.clone().unwrap();
            idx.sort_unstable();
            let which = match (idx[0], idx[1]) {
                (0, 1) => 0,
                (0, 2) => 1,
                (1, 2) => 2,
                other => panic!("unexpected pair {other:?}"),
            };
            counts[which] += 1;
        }
        for &c in &counts {
            let f = c as f64 / trials as f64;
            assert!((f - 1.0 / 3.0).abs() < 0.01, "pair freq {f}");
        }
    }

    #[test]
    fn hypercube_singletons_are_uniform() {
        let prior = PriorSpec::UniformHypercube { d: 2, n: 1 };
        let mut counts = [0u64; 4];
        let trials = 100_000u64;
        for t in 0..trials {
            let mut w = sample_nature(&prior, &mut TrialRng::derive(23, t, Stream::Nature), trace()).unwrap();
            sample_dataset(&mut w, &mut TrialRng::derive(23, t, Stream::Dataset)).unwrap();
            counts[w.dataset().row(0).to_u64() as usize] += 1;
        }
        for &c in &counts {
            let f = c as f64 / trials as f64;
            assert!((f - 0.25).abs() < 0.01, "vector freq {f}");
        }
    }

    #[test]
    fn fresh_t_equals_s_when_forced() {
        let prior = PriorSpec::Tardos(TardosParams::new(2, 1, 2).unwrap());
        for t in 0..50u64 {
            let mut w = sample_nature(&prior, &mut TrialRng::derive(29, t, Stream::Nature), trace()).unwrap();
            sample_dataset(&mut w, &mut TrialRng::derive(29, t, Stream::Dataset)).unwrap();
            let fresh = sample_fresh_t(&w, &mut TrialRng::derive(29, t, Stream::FreshT)).unwrap();
            assert_eq!(fresh.sorted_rows(), w.dataset().sorted_rows());
        }
    }

    #[test]
    fn fresh_t_matches_s_with_probability_one_third() {
        // N=3, n=2: both index sets are uniform over 3 subsets, independent
        let prior = PriorSpec::Tardos(TardosParams::new(3, 1, 2).unwrap());
        let trials = 100_000u64;
        let mut same = 0u64;
        let mut s_has0 = 0u64;
        let mut t_has0 = 0u64;
        let mut both_have0 = 0u64;
        for t in 0..trials {
            let mut w = sample_nature(&prior, &mut TrialRng::derive(31, t, Stream::Nature), trace()).unwrap();
            sample_dataset(&mut w, &mut TrialRng::derive(31, t, Stream::Dataset)).unwrap();
            let mut rng_t = TrialRng::derive(31, t, Stream::FreshT);
            let fresh_idx = rng_t.distinct_ordered(2, 3);
            let mut a = w.s_indices.clone().unwrap();
            let mut b = fresh_idx.clone();
            a.sort_unstable();
            b.sort_unstable();
            if a == b {
                same += 1;
            }
            let sa = a.contains(&0);
            let ta = b.contains(&0);
            if sa {
                s_has0 += 1;
            }
            if ta {
                t_has0 += 1;
            }
            if sa && ta {
                both_have0 += 1;
            }
        }
        let f = same as f64 / trials as f64;
        assert!((f - 1.0 / 3.0).abs() < 0.01, "same-set freq {f}");
        // independence of membership indicators given Nature
        let ps = s_has0 as f64 / trials as f64;
        let pt = t_has0 as f64 / trials as f64;
        let pboth = both_have0 as f64 / trials as f64;
        let corr = (pboth - ps * pt) / (ps * (1.0 - ps)).sqrt() / (pt * (1.0 - pt)).sqrt();
        assert!(corr.abs() < 0.01, "indicator correlation {corr}");
    }

    #[test]
    fn coupled_overlap_mean_is_n_squared_over_big_n() {
        let params = TardosParams::new(20, 1, 10).unwrap();
        let trials = 100_000u64;
        let mut sum_k = 0u64;
        for t in 0..trials {
            let cw = sample_coupled_st(&params, &mut TrialRng::derive(37, t, Stream::Coupled)).unwrap();
            sum_k += cw.k as u64;
        }
        let mean = sum_k as f64 / trials as f64;
        let expect = 10.0 * 10.0 / 20.0;
        assert!((mean - expect).abs() / expect < 0.01, "E[k] {mean} vs {expect}");
    }

    #[test]
    fn coupled_overlap_is_full_when_forced() {
        let params = TardosParams::new(5, 2, 5).unwrap();
        for t in 0..20u64 {
            let cw = sample_coupled_st(&params, &mut TrialRng::derive(41, t, Stream::Coupled)).unwrap();
            assert_eq!(cw.k, 5);
            assert_eq!(cw.s.sorted_rows(), cw.t.sorted_rows());
        }
    }

    #[test]
    fn revealed_rows_conditional_shares_prefix_and_collides_at_known_rate() {
        // N=10, n=3, revealed m=2: the last index is uniform over the 8
        // remaining, so T = S (as content sets) with probability 1/8
        let prior = PriorSpec::Tardos(TardosParams::new(10, 16, 3).unwrap());
        let trials = 20_000u64;
        let mut collide = 0u64;
        for t in 0..trials {
            let mut w = sample_nature(&prior, &mut TrialRng::derive(43, t, Stream::Nature), trace()).unwrap();
            sample_dataset(&mut w, &mut TrialRng::derive(43, t, Stream::Dataset)).unwrap();
            let s = w.dataset().clone();
            let idx = w.s_indices.clone().unwrap();
            let k = SideInfoValue::RevealedRows {
                rows: BitMatrix::from_rows(s.rows()[..2].to_vec(), 16).unwrap(),
                indices: Some(idx[..2].to_vec()),
            };
            let t_mat = sample_t_given_sideinfo(&w, &k, &mut TrialRng::derive(43, t, Stream::FreshT)).unwrap();
            assert_eq!(t_mat.rows()[..2], s.rows()[..2], "revealed prefix must persist");
            if t_mat.sorted_rows() == s.sorted_rows() {
                collide += 1;
            }
        }
        let f = collide as f64 / trials as f64;
        assert!((f - 0.125).abs() < 0.01, "collision freq {f}");
    }

    #[test]
    fn none_sideinfo_delegates_to_fresh_t() {
        let prior = PriorSpec::Tardos(TardosParams::new(6, 4, 3).unwrap());
        let mut w = sample_nature(&prior, &mut TrialRng::derive(47, 0, Stream::Nature), trace()).unwrap();
        sample_dataset(&mut w, &mut TrialRng::derive(47, 0, Stream::Dataset)).unwrap();
        let a = sample_fresh_t(&w, &mut TrialRng::derive(47, 0, Stream::FreshT)).unwrap();
        let b = sample_t_given_sideinfo(&w, &SideInfoValue::None, &mut TrialRng::derive(47, 0, Stream::FreshT))
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn shuffled_pair_candidates_enter_t_equally_often() {
        use crate::attackers::{make_sideinfo, SideInfoSpec};
        let prior = PriorSpec::Tardos(TardosParams::new(100, 32, 10).unwrap());
        let trials = 10_000u64;
        let (mut in1, mut in2) = (0u64, 0u64);
        for t in 0..trials {
            let mut w = sample_nature(&prior, &mut TrialRng::derive(53, t, Stream::Nature), trace()).unwrap();
            sample_dataset(&mut w, &mut TrialRng::derive(53, t, Stream::Dataset)).unwrap();
            let k = make_sideinfo(&SideInfoSpec::ShuffledPair, &w, &mut TrialRng::derive(53, t, Stream::SideInfo))
                .unwrap();
            let t_mat = sample_t_given_sideinfo(&w, &k, &mut TrialRng::derive(53, t, Stream::FreshT)).unwrap();
            if let SideInfoValue::ShuffledPair { k1, k2, .. } = &k {
                if t_mat.contains_row(k1) {
                    in1 += 1;
                }
                if t_mat.contains_row(k2) {
                    in2 += 1;
                }
            } else {
                panic!("expected shuffled pair");
            }
        }
        let f1 = in1 as f64 / trials as f64;
        let f2 = in2 as f64 / trials as f64;
        assert!((f1 - 0.5).abs() < 0.02, "k1 in T freq {f1}");
        assert!((f2 - 0.5).abs() < 0.02, "k2 in T freq {f2}");
    }

    #[test]
    fn tardos_row_collisions_are_rare_at_d32() {
        // backing the index-level conditioning decision: distinct codebook
        // rows agree in content with empirical probability below 2^-10
        let prior = PriorSpec::Tardos(TardosParams::new(4, 32, 2).unwrap());
        let mut pairs = 0u64;
        let mut collisions = 0u64;
        for t in 0..20_000u64 {
            let w = sample_nature(&prior, &mut TrialRng::derive(59, t, Stream::Nature), trace()).unwrap();
            let c = w.codebook();
            for i in 0..c.n() {
                for j in (i + 1)..c.n() {
                    pairs += 1;
                    if c.row(i) == c.row(j) {
                        collisions += 1;
                    }
                }
            }
        }
        let rate = collisions as f64 / pairs as f64;
        assert!(rate <= 2f64.powi(-10), "collision rate {rate}");
    }

    #[test]
    fn invalid_params_are_rejected() {
        assert!(TardosParams::new(2, 4, 3).is_err());
        assert!(PriorSpec::RandomSupport { m: 2, d: 4, n: 3 }.validate().is_err());
        assert!(PriorSpec::UniformHypercube { d: 0, n: 1 }.validate().is_err());
    }
}

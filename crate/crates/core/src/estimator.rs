//! Monte Carlo security-game runners, Wilson confidence intervals, and
//! inequality verdicts.
//!
//! Every trial derives its own generators from (master_seed, trial index,
//! sampling site), so counts are identical for any worker count. Each trial
//! evaluates the left and right events of the configured definition on one
//! sampled path: same Nature, S, side information, release, and attack
//! output, with the baseline dataset T drawn fresh or conditionally as the
//! definition demands. Counts are reported separately per side.

use crate::attackers::{make_sideinfo, AttackerSpec, MiaVerdict, SideInfoSpec};
use crate::bits::BitMatrix;
use crate::error::{Error, Result};
use crate::mechanisms::MechanismSpec;
use crate::prior::{sample_fresh_t, sample_point, sample_t_given_sideinfo, sample_world, PriorSpec};
use crate::relations::{BiRelationSpec, RelationSpec};
use crate::rng::{Stream, TrialRng};
use crate::surprisal::{surprisal_given_sideinfo, SurprisalQuery};

/// z for a two-sided 95% normal interval.
pub const Z95: f64 = 1.959963984540054;

/// Wilson score interval for `successes` out of `trials` at 95% confidence.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    assert!(trials > 0 && successes <= trials);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = p + z2 / (2.0 * n);
    let rad = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = ((center - rad) / denom).clamp(0.0, 1.0);
    let hi = ((center + rad) / denom).clamp(0.0, 1.0);
    (lo, hi)
}

/// Which security definition the game estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Definition {
    /// LHS R(S,z) vs RHS R(T,z) with T an independent fresh sample.
    Vanilla,
    /// As Vanilla but the RHS uses the relaxed relation of the pair.
    BiCriteria,
    /// Side information K flows to the attacker; T is drawn from Nature
    /// conditioned on K.
    SideInfo,
    /// Membership LHS gated by the surprisal condition on z; RHS z ∈ T.
    SurprisalGated,
    /// Targeted relation LHS gated on the witness row; RHS uses the pair's
    /// relaxed relation against T.
    TargetedGated,
    /// Membership-inference game: TPR on members vs FPR on fresh points.
    Mia,
}

impl Definition {
    pub fn name(&self) -> &'static str {
        match self {
            Definition::Vanilla => "vanilla",
            Definition::BiCriteria => "bi-criteria",
            Definition::SideInfo => "side-info",
            Definition::SurprisalGated => "surprisal-gated",
            Definition::TargetedGated => "targeted-gated",
            Definition::Mia => "mia",
        }
    }
}

/// One relation, or an (R, R̂) pair for the bi-criteria definitions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GameRelation {
    Single(RelationSpec),
    Bi(BiRelationSpec),
}

impl GameRelation {
    pub fn lhs(&self) -> RelationSpec {
        match self {
            GameRelation::Single(r) => *r,
            GameRelation::Bi(b) => b.lhs,
        }
    }

    pub fn rhs(&self) -> RelationSpec {
        match self {
            GameRelation::Single(r) => *r,
            GameRelation::Bi(b) => b.rhs,
        }
    }

    pub fn name(&self) -> String {
        match self {
            GameRelation::Single(r) => r.name(),
            GameRelation::Bi(b) => format!("{}|{}", b.lhs.name(), b.rhs.name()),
        }
    }
}

/// A fully specified security game.
#[derive(Debug, Clone, PartialEq)]
pub struct GameSpec {
    pub prior: PriorSpec,
    pub mechanism: MechanismSpec,
    pub attacker: AttackerSpec,
    pub sideinfo: SideInfoSpec,
    pub relation: GameRelation,
    pub definition: Definition,
    pub epsilon: f64,
    pub delta: f64,
    /// Surprisal gate fraction in (0, 1]; ignored by ungated definitions.
    pub xi: f64,
    pub trials: u64,
    pub master_seed: u64,
}

impl GameSpec {
    /// Reject incompatible component combinations before any trial runs.
    pub fn validate(&self) -> Result<()> {
        self.prior.validate()?;
        if self.trials < 1 {
            return Err(Error::InvalidParameter("trials must be >= 1".into()));
        }
        if !(self.epsilon >= 0.0) || !(self.delta >= 0.0) {
            return Err(Error::InvalidParameter("epsilon and delta must be nonnegative".into()));
        }
        if !(self.xi > 0.0 && self.xi <= 1.0) {
            return Err(Error::InvalidParameter("xi must lie in (0, 1]".into()));
        }

        let is_mia = self.definition == Definition::Mia;
        if is_mia != self.attacker.is_distinguisher() {
            return Err(Error::IncompatibleSpec(
                "mia needs a distinguisher attacker; reconstruction games need a point attacker"
                    .into(),
            ));
        }

        match self.definition {
            Definition::BiCriteria | Definition::TargetedGated => {}
            _ => {
                if matches!(self.relation, GameRelation::Bi(_)) {
                    return Err(Error::IncompatibleSpec(
                        "relation pairs only apply to bi-criteria and targeted-gated games".into(),
                    ));
                }
            }
        }
        if self.definition == Definition::BiCriteria && !matches!(self.relation, GameRelation::Bi(_))
        {
            return Err(Error::IncompatibleSpec("bi-criteria games need a relation pair".into()));
        }
        if self.definition == Definition::SurprisalGated
            && self.relation.lhs() != RelationSpec::ExactMembership
        {
            return Err(Error::IncompatibleSpec(
                "the surprisal-gated game is defined for exact membership".into(),
            ));
        }
        if matches!(
            self.definition,
            Definition::SurprisalGated | Definition::TargetedGated
        ) {
            if !matches!(
                self.prior,
                PriorSpec::Tardos(_) | PriorSpec::UniformHypercube { .. }
            ) {
                return Err(Error::IncompatibleSpec(
                    "gated games need a prior with a surprisal model".into(),
                ));
            }
            if matches!(self.sideinfo, SideInfoSpec::Superset) {
                return Err(Error::IncompatibleSpec(
                    "gated games do not support superset side info".into(),
                ));
            }
        }
        match self.definition {
            Definition::Vanilla | Definition::BiCriteria | Definition::Mia => {
                if self.sideinfo != SideInfoSpec::None {
                    return Err(Error::IncompatibleSpec(format!(
                        "{} games take no side information",
                        self.definition.name()
                    )));
                }
            }
            _ => {}
        }

        // release kind required by the attacker
        match self.attacker {
            AttackerSpec::Round | AttackerSpec::Subtract | AttackerSpec::TwoCandidate => {
                if !matches!(
                    self.mechanism,
                    MechanismSpec::ExactAverage | MechanismSpec::NoisyAverage { .. }
                ) {
                    return Err(Error::IncompatibleSpec(format!(
                        "{} attack needs a real-vector release",
                        self.attacker.name()
                    )));
                }
            }
            AttackerSpec::ParityFitMia | AttackerSpec::SupersetLookup => {
                if self.mechanism != MechanismSpec::XorParity {
                    return Err(Error::IncompatibleSpec(format!(
                        "{} attack needs a parity release",
                        self.attacker.name()
                    )));
                }
            }
            AttackerSpec::Constant(_) | AttackerSpec::AlwaysIn => {}
        }
        if self.mechanism == MechanismSpec::XorParity && self.prior.d() % 2 != 0 {
            return Err(Error::IncompatibleSpec("xor parity needs even d".into()));
        }
        if let MechanismSpec::NoisyAverage { eps_hat } = self.mechanism {
            if !(eps_hat > 0.0) {
                return Err(Error::InvalidParameter("eps_hat must be positive".into()));
            }
        }

        // side info required by the attacker
        match self.attacker {
            AttackerSpec::Subtract => {
                let want = self.prior.n().saturating_sub(1);
                if self.sideinfo != (SideInfoSpec::RevealedRows { m: want }) {
                    return Err(Error::IncompatibleSpec(
                        "subtract attack needs revealed-rows(n-1) side info".into(),
                    ));
                }
            }
            AttackerSpec::TwoCandidate => {
                if self.sideinfo != SideInfoSpec::ShuffledPair {
                    return Err(Error::IncompatibleSpec(
                        "two-candidate attack needs shuffled-pair side info".into(),
                    ));
                }
            }
            AttackerSpec::SupersetLookup => {
                if self.sideinfo != SideInfoSpec::Superset {
                    return Err(Error::IncompatibleSpec(
                        "superset lookup needs superset side info".into(),
                    ));
                }
            }
            _ => {}
        }
        match self.sideinfo {
            SideInfoSpec::RevealedRows { m } => {
                if m > self.prior.n() {
                    return Err(Error::IncompatibleSpec("cannot reveal more than n rows".into()));
                }
                if !matches!(
                    self.prior,
                    PriorSpec::Tardos(_) | PriorSpec::UniformHypercube { .. }
                ) {
                    return Err(Error::IncompatibleSpec(
                        "revealed-rows conditioning supports tardos and uniform-hypercube".into(),
                    ));
                }
            }
            SideInfoSpec::ShuffledPair => {
                if !matches!(
                    self.prior,
                    PriorSpec::Tardos(_) | PriorSpec::UniformHypercube { .. }
                ) {
                    return Err(Error::IncompatibleSpec(
                        "shuffled-pair side info supports tardos and uniform-hypercube".into(),
                    ));
                }
                if let PriorSpec::Tardos(p) = self.prior {
                    if p.codebook_size == p.n {
                        return Err(Error::IncompatibleSpec(
                            "shuffled pair needs a codebook row outside S".into(),
                        ));
                    }
                }
            }
            SideInfoSpec::Superset => {
                if !self.prior.has_codebook() {
                    return Err(Error::IncompatibleSpec(
                        "superset side info needs a finite-support prior".into(),
                    ));
                }
            }
            SideInfoSpec::None => {}
        }
        Ok(())
    }
}

/// Verdict on `lhs <= e^eps · rhs + delta`, decided conservatively from the
/// interval endpoints: Satisfied needs the inequality to hold even at
/// lhs-upper vs rhs-lower, Violated needs it to fail even at lhs-lower vs
/// rhs-upper, anything else is Inconclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    SatisfiedAtConfidence,
    ViolatedAtConfidence,
    Inconclusive,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::SatisfiedAtConfidence => "satisfied",
            Verdict::ViolatedAtConfidence => "violated",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    pub fn decide(lhs_ci: (f64, f64), rhs_ci: (f64, f64), epsilon: f64, delta: f64) -> Verdict {
        let scale = epsilon.exp();
        if lhs_ci.1 <= scale * rhs_ci.0 + delta {
            Verdict::SatisfiedAtConfidence
        } else if lhs_ci.0 > scale * rhs_ci.1 + delta {
            Verdict::ViolatedAtConfidence
        } else {
            Verdict::Inconclusive
        }
    }
}

/// Monte Carlo result of a reconstruction game.
#[derive(Debug, Clone, PartialEq)]
pub struct GameEstimate {
    pub lhs_successes: u64,
    pub rhs_successes: u64,
    pub trials: u64,
    pub lhs_ci: (f64, f64),
    pub rhs_ci: (f64, f64),
    pub verdict: Verdict,
    /// Trials whose dataset had at least d/5 lukewarm columns.
    pub lukewarm_ok_trials: u64,
}

impl GameEstimate {
    pub fn lhs_estimate(&self) -> f64 {
        self.lhs_successes as f64 / self.trials as f64
    }

    pub fn rhs_estimate(&self) -> f64 {
        self.rhs_successes as f64 / self.trials as f64
    }

    pub fn lukewarm_fraction(&self) -> f64 {
        self.lukewarm_ok_trials as f64 / self.trials as f64
    }
}

struct TrialOutcome {
    lhs: bool,
    rhs: bool,
    lukewarm_ok: bool,
}

fn gated_lhs(spec: &GameSpec, s: &BitMatrix, k: &crate::attackers::SideInfoValue, z: &crate::bits::BitVector) -> Result<bool> {
    let rel = spec.relation.lhs();
    let witness = match rel.witness(s, z)? {
        Some(i) => i,
        None => return Ok(false),
    };
    let x = s.row(witness);
    let rest_rows: Vec<_> = s
        .rows()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != witness)
        .map(|(_, r)| r.clone())
        .collect();
    let rest = BitMatrix::from_rows(rest_rows, s.d())?;
    let h_plain = surprisal_given_sideinfo(&SurprisalQuery {
        z: x,
        conditioning_rows: &rest,
        sideinfo: &crate::attackers::SideInfoValue::None,
        prior: &spec.prior,
    })?;
    let h_cond = surprisal_given_sideinfo(&SurprisalQuery {
        z: x,
        conditioning_rows: &rest,
        sideinfo: k,
        prior: &spec.prior,
    })?;
    Ok(h_cond >= spec.xi * h_plain)
}

fn run_trial(spec: &GameSpec, t: u64) -> Result<TrialOutcome> {
    let seed = spec.master_seed;
    let world = sample_world(&spec.prior, seed, t)?;
    let s = world.dataset();
    let k = make_sideinfo(&spec.sideinfo, &world, &mut TrialRng::derive(seed, t, Stream::SideInfo))?;
    let y = spec
        .mechanism
        .apply(s, &mut TrialRng::derive(seed, t, Stream::Mechanism))?;
    let z = spec.attacker.reconstruct(&y, &k, s.n())?;

    let lhs = match spec.definition {
        Definition::Vanilla | Definition::BiCriteria | Definition::SideInfo => {
            spec.relation.lhs().holds(s, &z)?
        }
        Definition::SurprisalGated | Definition::TargetedGated => {
            spec.relation.lhs().holds(s, &z)? && gated_lhs(spec, s, &k, &z)?
        }
        Definition::Mia => unreachable!("mia games run through run_game_mia"),
    };

    let mut rng_t = TrialRng::derive(seed, t, Stream::FreshT);
    let t_mat = match spec.definition {
        Definition::Vanilla | Definition::BiCriteria => sample_fresh_t(&world, &mut rng_t)?,
        _ => sample_t_given_sideinfo(&world, &k, &mut rng_t)?,
    };
    let rhs = spec.relation.rhs().holds(&t_mat, &z)?;
    let lukewarm_ok = s.lukewarm_count()? * 5 >= s.d();
    Ok(TrialOutcome { lhs, rhs, lukewarm_ok })
}

/// Map trial indices through a worker pool; output order is by trial index
/// regardless of the pool size.
pub(crate) fn pooled<F, A>(trials: u64, workers: usize, per_trial: F) -> Result<Vec<A>>
where
    F: Fn(u64) -> Result<A> + Sync,
    A: Send,
{
    let workers = workers.max(1).min(trials.max(1) as usize);
    let chunk = trials.div_ceil(workers as u64);
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers as u64)
            .map(|w| {
                let per_trial = &per_trial;
                let lo = w * chunk;
                let hi = (lo + chunk).min(trials);
                scope.spawn(move || -> Result<Vec<A>> {
                    (lo..hi).map(per_trial).collect()
                })
            })
            .collect();
        let mut out = Vec::with_capacity(trials as usize);
        for h in handles {
            out.extend(h.join().expect("worker panicked")?);
        }
        Ok(out)
    })
}

/// Run a reconstruction game. Results are identical for any worker count.
pub fn run_game(spec: &GameSpec, workers: usize) -> Result<GameEstimate> {
    spec.validate()?;
    if spec.definition == Definition::Mia {
        return Err(Error::IncompatibleSpec(
            "mia games report TPR/FPR; call run_game_mia".into(),
        ));
    }
    let outcomes = pooled(spec.trials, workers, |t| run_trial(spec, t))?;
    let lhs_successes = outcomes.iter().filter(|o| o.lhs).count() as u64;
    let rhs_successes = outcomes.iter().filter(|o| o.rhs).count() as u64;
    let lukewarm_ok_trials = outcomes.iter().filter(|o| o.lukewarm_ok).count() as u64;
    let lhs_ci = wilson_interval(lhs_successes, spec.trials);
    let rhs_ci = wilson_interval(rhs_successes, spec.trials);
    Ok(GameEstimate {
        lhs_successes,
        rhs_successes,
        trials: spec.trials,
        lhs_ci,
        rhs_ci,
        verdict: Verdict::decide(lhs_ci, rhs_ci, spec.epsilon, spec.delta),
        lukewarm_ok_trials,
    })
}

/// Monte Carlo result of a membership-inference game.
#[derive(Debug, Clone, PartialEq)]
pub struct MiaEstimate {
    pub tpr_successes: u64,
    pub fpr_successes: u64,
    pub trials: u64,
    pub tpr_ci: (f64, f64),
    pub fpr_ci: (f64, f64),
    /// Largest m such that the TPR lower bound still clears m/n.
    pub memorized_m: u64,
    /// Whether the FPR upper bound stays within the configured xi.
    pub fpr_within_xi: bool,
}

impl MiaEstimate {
    pub fn tpr_estimate(&self) -> f64 {
        self.tpr_successes as f64 / self.trials as f64
    }

    pub fn fpr_estimate(&self) -> f64 {
        self.fpr_successes as f64 / self.trials as f64
    }
}

/// Run a membership-inference game: the distinguisher sees the release with
/// a uniform member of S (TPR side) and with a fresh point from the same
/// Nature (FPR side), on the same release per trial.
pub fn run_game_mia(spec: &GameSpec, workers: usize) -> Result<MiaEstimate> {
    spec.validate()?;
    if spec.definition != Definition::Mia {
        return Err(Error::IncompatibleSpec("not a mia game".into()));
    }
    let seed = spec.master_seed;
    let outcomes = pooled(spec.trials, workers, |t| -> Result<(bool, bool)> {
        let world = sample_world(&spec.prior, seed, t)?;
        let s = world.dataset();
        let y = spec
            .mechanism
            .apply(s, &mut TrialRng::derive(seed, t, Stream::Mechanism))?;
        let member_idx = TrialRng::derive(seed, t, Stream::MiaMember).below(s.n() as u64) as usize;
        let member = s.row(member_idx);
        let fresh = sample_point(&world, &mut TrialRng::derive(seed, t, Stream::MiaFresh));
        let tpr = spec.attacker.distinguish(&y, member)? == MiaVerdict::In;
        let fpr = spec.attacker.distinguish(&y, &fresh)? == MiaVerdict::In;
        Ok((tpr, fpr))
    })?;
    let tpr_successes = outcomes.iter().filter(|o| o.0).count() as u64;
    let fpr_successes = outcomes.iter().filter(|o| o.1).count() as u64;
    let tpr_ci = wilson_interval(tpr_successes, spec.trials);
    let fpr_ci = wilson_interval(fpr_successes, spec.trials);
    let n = spec.prior.n() as f64;
    let memorized_m = (tpr_ci.0 * n + 1e-12).floor().clamp(0.0, n) as u64;
    Ok(MiaEstimate {
        tpr_successes,
        fpr_successes,
        trials: spec.trials,
        tpr_ci,
        fpr_ci,
        memorized_m,
        fpr_within_xi: fpr_ci.1 <= spec.xi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitVector;
    use crate::prior::TardosParams;
    use crate::relations::Ratio;

    fn bot_constant_spec(trials: u64) -> GameSpec {
        GameSpec {
            prior: PriorSpec::UniformHypercube { d: 16, n: 4 },
            mechanism: MechanismSpec::Bot,
            attacker: AttackerSpec::Constant(BitVector::zeros(16)),
            sideinfo: SideInfoSpec::None,
            relation: GameRelation::Single(RelationSpec::ExactMembership),
            definition: Definition::Vanilla,
            epsilon: 0.0,
            delta: 0.01,
            xi: 1.0,
            trials,
            master_seed: 211,
        }
    }

    #[test]
    fn wilson_interval_shapes() {
        let (lo, hi) = wilson_interval(0, 2000);
        assert!(lo.abs() < 1e-15, "lower {lo}");
        assert!(hi > 0.0 && hi < 0.005, "upper {hi}");
        let (lo, hi) = wilson_interval(2000, 2000);
        assert!(lo > 0.995 && lo < 1.0);
        assert!(hi > 1.0 - 1e-15, "upper {hi}");
        let (lo, hi) = wilson_interval(1000, 2000);
        assert!(lo < 0.5 && hi > 0.5);
        assert!((hi - lo) < 0.05);
    }

    #[test]
    fn wilson_coverage_is_calibrated() {
        // synthetic Bernoulli streams; nominal 95% coverage within [93%, 97%]
        for (key, p) in [(301u64, 0.01f64), (302, 0.5)] {
            let reps = 10_000;
            let len = 1000u64;
            let mut covered = 0u64;
            let mut rng = TrialRng::from_key(key);
            for _ in 0..reps {
                let mut s = 0u64;
                for _ in 0..len {
                    if rng.bernoulli(p) {
                        s += 1;
                    }
                }
                let (lo, hi) = wilson_interval(s, len);
                if lo <= p && p <= hi {
                    covered += 1;
                }
            }
            let cov = covered as f64 / reps as f64;
            assert!((0.93..=0.97).contains(&cov), "coverage {cov} at p={p}");
        }
    }

    #[test]
    fn verdict_logic_is_conservative() {
        let v = Verdict::decide((0.0, 0.002), (0.0, 0.002), 0.0, 0.01);
        assert_eq!(v, Verdict::SatisfiedAtConfidence);
        let v = Verdict::decide((0.95, 1.0), (0.0, 0.01), 0.0, 0.1);
        assert_eq!(v, Verdict::ViolatedAtConfidence);
        let v = Verdict::decide((0.4, 0.6), (0.35, 0.55), 0.0, 0.05);
        assert_eq!(v, Verdict::Inconclusive);
        // e^eps scaling widens the satisfied region
        let v = Verdict::decide((0.5, 0.55), (0.3, 0.35), 1.0, 0.0);
        assert_eq!(v, Verdict::SatisfiedAtConfidence);
    }

    #[test]
    fn bot_constant_game_is_satisfied_with_negligible_sides() {
        let spec = GameSpec {
            prior: PriorSpec::UniformHypercube { d: 64, n: 4 },
            attacker: AttackerSpec::Constant(BitVector::zeros(64)),
            ..bot_constant_spec(2000)
        };
        let est = run_game(&spec, 2).unwrap();
        assert_eq!(est.lhs_successes, 0);
        assert_eq!(est.rhs_successes, 0);
        assert_eq!(est.verdict, Verdict::SatisfiedAtConfidence);
    }

    #[test]
    fn results_are_identical_across_worker_counts() {
        let spec = GameSpec {
            prior: PriorSpec::Tardos(TardosParams::new(20, 16, 5).unwrap()),
            mechanism: MechanismSpec::ExactAverage,
            attacker: AttackerSpec::Round,
            sideinfo: SideInfoSpec::None,
            relation: GameRelation::Single(RelationSpec::HammingFrac(Ratio::new(1, 4).unwrap())),
            definition: Definition::Vanilla,
            epsilon: 0.0,
            delta: 0.05,
            xi: 1.0,
            trials: 500,
            master_seed: 99,
        };
        let a = run_game(&spec, 1).unwrap();
        let b = run_game(&spec, 3).unwrap();
        let c = run_game(&spec, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn bot_release_gives_equal_sides_in_distribution() {
        // the release carries no information, so the lhs and rhs events have
        // the same law; their estimates agree within combined halfwidths
        let spec = GameSpec {
            prior: PriorSpec::Spiked { m: 64, d: 16, n: 4 },
            mechanism: MechanismSpec::Bot,
            attacker: AttackerSpec::Constant(BitVector::zeros(16)),
            sideinfo: SideInfoSpec::None,
            relation: GameRelation::Single(RelationSpec::ExactMembership),
            definition: Definition::Vanilla,
            epsilon: 0.0,
            delta: 0.05,
            xi: 1.0,
            trials: 4000,
            master_seed: 313,
        };
        let est = run_game(&spec, 2).unwrap();
        let l = est.lhs_estimate();
        let r = est.rhs_estimate();
        let slack = 3.0 * ((est.lhs_ci.1 - est.lhs_ci.0) / 2.0 + (est.rhs_ci.1 - est.rhs_ci.0) / 2.0);
        assert!((l - r).abs() <= slack, "lhs {l} rhs {r} slack {slack}");
        // the spiked atom makes both sides large
        let expect = 1.0 - 0.5f64.powi(4);
        assert!((l - expect).abs() < 0.05, "lhs {l} vs {expect}");
        assert_eq!(est.verdict, Verdict::SatisfiedAtConfidence);
    }

    #[test]
    fn incompatible_specs_fail_before_running() {
        let mut spec = bot_constant_spec(10);
        spec.attacker = AttackerSpec::Subtract;
        assert!(spec.validate().is_err());

        let mut spec = bot_constant_spec(10);
        spec.definition = Definition::Mia;
        assert!(spec.validate().is_err());

        let mut spec = bot_constant_spec(10);
        spec.definition = Definition::BiCriteria;
        assert!(spec.validate().is_err(), "bi-criteria needs a relation pair");

        let mut spec = bot_constant_spec(10);
        spec.sideinfo = SideInfoSpec::Superset;
        assert!(spec.validate().is_err(), "hypercube has no finite support");

        let mut spec = bot_constant_spec(10);
        spec.xi = 0.0;
        assert!(spec.validate().is_err());

        let mut spec = bot_constant_spec(10);
        spec.definition = Definition::SurprisalGated;
        spec.relation =
            GameRelation::Single(RelationSpec::HammingFrac(Ratio::new(1, 4).unwrap()));
        assert!(spec.validate().is_err(), "gated game needs exact membership");
    }

    #[test]
    fn targeted_gate_passes_for_subtraction_and_fails_for_pair_knowledge() {
        // the subtract attacker's witness row is pinned by the release, not
        // by the revealed rows, so the gate holds and the attack counts
        let spec = GameSpec {
            prior: PriorSpec::Tardos(TardosParams::new(30, 16, 5).unwrap()),
            mechanism: MechanismSpec::ExactAverage,
            attacker: AttackerSpec::Subtract,
            sideinfo: SideInfoSpec::RevealedRows { m: 4 },
            relation: GameRelation::Bi(
                BiRelationSpec::new(
                    RelationSpec::HammingFrac(Ratio::ZERO),
                    RelationSpec::HammingFrac(Ratio::new(1, 16).unwrap()),
                )
                .unwrap(),
            ),
            definition: Definition::TargetedGated,
            epsilon: 0.0,
            delta: 0.1,
            xi: 0.9,
            trials: 400,
            master_seed: 411,
        };
        let est = run_game(&spec, 2).unwrap();
        assert_eq!(est.lhs_successes, est.trials, "gate must pass on every lossless recovery");
        assert_eq!(est.verdict, Verdict::ViolatedAtConfidence);

        // the two-candidate attacker's output is already encoded in its
        // pair: the conditional surprisal collapses and the gate excludes it
        let paired = GameSpec {
            prior: PriorSpec::Tardos(TardosParams::new(100, 128, 10).unwrap()),
            mechanism: MechanismSpec::ExactAverage,
            attacker: AttackerSpec::TwoCandidate,
            sideinfo: SideInfoSpec::ShuffledPair,
            relation: GameRelation::Single(RelationSpec::ExactMembership),
            definition: Definition::SurprisalGated,
            epsilon: 0.0,
            delta: 0.1,
            xi: 0.9,
            trials: 400,
            master_seed: 419,
        };
        let est = run_game(&paired, 2).unwrap();
        assert_eq!(
            est.lhs_successes, 0,
            "gated lhs must vanish even though the raw pick rate is high"
        );
        assert_eq!(est.verdict, Verdict::SatisfiedAtConfidence);
    }

    #[test]
    fn mia_always_in_has_unit_rates() {
        let spec = GameSpec {
            prior: PriorSpec::UniformHypercube { d: 8, n: 4 },
            mechanism: MechanismSpec::Bot,
            attacker: AttackerSpec::AlwaysIn,
            sideinfo: SideInfoSpec::None,
            relation: GameRelation::Single(RelationSpec::ExactMembership),
            definition: Definition::Mia,
            epsilon: 0.0,
            delta: 0.0,
            xi: 0.5,
            trials: 500,
            master_seed: 317,
        };
        let est = run_game_mia(&spec, 2).unwrap();
        assert_eq!(est.tpr_successes, 500);
        assert_eq!(est.fpr_successes, 500);
        // tpr = fpr = 1; the conservative Wilson lower bound at 500/500
        // clears 3/4 but not 4/4, and any xi < 1 fails
        assert_eq!(est.memorized_m, 3);
        assert!(!est.fpr_within_xi);
    }

    #[test]
    fn mia_parity_fit_memorizes_everything() {
        let spec = GameSpec {
            prior: PriorSpec::UniformHypercube { d: 16, n: 4 },
            mechanism: MechanismSpec::XorParity,
            attacker: AttackerSpec::ParityFitMia,
            sideinfo: SideInfoSpec::None,
            relation: GameRelation::Single(RelationSpec::ExactMembership),
            definition: Definition::Mia,
            epsilon: 0.0,
            delta: 0.0,
            xi: 0.1,
            trials: 2000,
            master_seed: 331,
        };
        let est = run_game_mia(&spec, 2).unwrap();
        assert_eq!(est.tpr_successes, 2000, "members always fit");
        // fresh points fit with probability about n·2^(-d/2) = 4/256
        let f = est.fpr_estimate();
        assert!(f < 0.05, "fpr {f}");
        assert!(est.fpr_within_xi);
        assert_eq!(est.memorized_m, 3, "wilson lower bound at tpr=1, n=4");
    }
}

//! The scenario registry: named, parameterized experiment plans with
//! built-in expectations.
//!
//! Each scenario resolves its default parameters (all overridable through
//! `set.key = value`), runs its games or checks, and reports one row per
//! game with the expected outcome and whether it was met. "Satisfied"
//! verdicts mean no implemented attack violated the bound at the configured
//! confidence; they are evidence, not proof, since the definitions quantify
//! over all attackers.

use std::time::{Instant, SystemTime, UNIX_EPOCH};

use crate::attackers::{AttackerSpec, SideInfoSpec};
use crate::bits::{BitMatrix, BitVector};
use crate::config::{game_spec_from_kv, ExperimentConfig, KvMap, Params};
use crate::error::{Error, Result};
use crate::estimator::{
    pooled, run_game, run_game_mia, Definition, GameEstimate, GameRelation, GameSpec, MiaEstimate,
    Verdict,
};
use crate::mechanisms::{dp_log_density_ratio, noisy_average, MechanismSpec, NoiseParams};
use crate::oracle;
use crate::prior::{sample_coupled_st, sample_world, PriorSpec, TardosParams};
use crate::relations::{BiRelationSpec, Ratio, RelationSpec};
use crate::report::{fmt_float, ResultManifest, ResultRow, SeriesFile};
use crate::rng::{Stream, TrialRng};
use crate::surprisal::{posterior_column_mean, surprisal_given_rows};

pub const SCENARIOS: &[&str] = &[
    "xor-mia",
    "xor-mi-exact",
    "superset-attack",
    "trivial-prior",
    "vanilla-hamming",
    "bi-criteria",
    "subtract-attack",
    "two-candidate",
    "dp-noisy-secure",
    "dp-ratio-check",
    "surprisal-oracle",
    "coupled-sampler-check",
    "marginals-accuracy",
    "custom",
];

pub fn scenario_names() -> &'static [&'static str] {
    SCENARIOS
}

fn kv(pairs: &[(&str, &str)]) -> KvMap {
    pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

/// The default parameter map of a scenario; every key is overridable.
pub fn scenario_defaults(name: &str) -> Result<KvMap> {
    let map = match name {
        "xor-mia" => kv(&[("n", "8"), ("d", "32"), ("trials", "100000"), ("xi", "0.001")]),
        "xor-mi-exact" => kv(&[("cases", "1x2,2x2,1x4"), ("tolerance", "1e-9")]),
        "superset-attack" => kv(&[
            ("n", "50"),
            ("d", "64"),
            ("support", "5000"),
            ("trials", "2000"),
            ("epsilon", "0"),
            ("delta", "0.1"),
        ]),
        "trivial-prior" => kv(&[
            ("n", "8"),
            ("d", "32"),
            ("support", "800"),
            ("trials", "2000"),
            ("epsilon", "0"),
            ("delta", "0.1"),
        ]),
        "vanilla-hamming" => kv(&[
            ("codebook", "200"),
            ("n", "50"),
            ("d", "256"),
            ("gamma", "1/25"),
            ("trials", "2000"),
            ("epsilon", "0"),
            ("delta", "0.01"),
            ("lhs_cap", "0.01"),
            ("lukewarm_min", "0.99"),
            ("sweep_points", "10"),
        ]),
        "bi-criteria" => kv(&[
            ("codebook", "500"),
            ("n", "50"),
            ("d", "512"),
            ("gamma", "0.3"),
            ("c_delta", "3"),
            ("trials", "2000"),
            ("epsilon", "0"),
            ("delta", "0.05"),
        ]),
        "subtract-attack" => kv(&[
            ("codebook", "200"),
            ("n", "50"),
            ("d", "64"),
            ("trials", "2000"),
            ("epsilon", "0"),
            ("delta", "0.1"),
        ]),
        // the (d, eps_hat) operating point was fixed by a pilot sweep; at
        // noise scale 1/(eps_hat·n) = 0.5 the inner-product test still
        // recovers the member in well over 95% of trials
        "two-candidate" => kv(&[
            ("codebook", "100"),
            ("n", "10"),
            ("d", "4096"),
            ("eps_hat", "0.2"),
            ("trials", "1000"),
            ("epsilon", "0"),
            ("delta", "0.1"),
            ("margin", "0.2"),
        ]),
        "dp-noisy-secure" => kv(&[
            ("codebook", "200"),
            ("n", "50"),
            ("d", "512"),
            ("eps_hat", "0.02"),
            ("xi", "0.9"),
            ("trials", "500"),
            ("epsilon", "0"),
            ("delta", "0.05"),
            ("lhs_cap", "0.05"),
            ("lhs_floor", "0.95"),
        ]),
        "dp-ratio-check" => kv(&[
            ("n", "50"),
            ("d", "8"),
            ("eps_hat", "0.1"),
            ("trials", "1000"),
            ("samples", "1000"),
        ]),
        "surprisal-oracle" => kv(&[
            ("codebook", "3"),
            ("n", "2"),
            ("d", "2"),
            ("tolerance", "1e-9"),
        ]),
        "coupled-sampler-check" => kv(&[
            ("codebook", "3"),
            ("n", "2"),
            ("d", "1"),
            ("trials", "100000"),
            ("tolerance", "0.02"),
        ]),
        "marginals-accuracy" => kv(&[
            ("n", "100"),
            ("d", "64"),
            ("eps_hat", "0.5"),
            ("beta", "0.05"),
            ("trials", "10000"),
        ]),
        "custom" => kv(&[("trials", "1000")]),
        other => return Err(Error::UnknownScenario(other.to_string())),
    };
    Ok(map)
}

struct Ctx<'a> {
    scenario: &'a str,
    params: &'a KvMap,
    seed: u64,
    workers: usize,
}

impl Ctx<'_> {
    fn p(&self) -> Params<'_> {
        Params(self.params)
    }

    fn trials(&self) -> Result<u64> {
        self.p().u64("trials")
    }
}

type ScenarioOutput = (Vec<ResultRow>, Vec<SeriesFile>, KvMap);

fn game_row(
    ctx: &Ctx,
    game: &str,
    spec: &GameSpec,
    est: &GameEstimate,
    expected: &str,
    met: bool,
) -> ResultRow {
    ResultRow {
        scenario: ctx.scenario.to_string(),
        game: game.to_string(),
        definition: spec.definition.name().to_string(),
        prior: spec.prior.name().to_string(),
        mechanism: spec.mechanism.name().to_string(),
        attacker: spec.attacker.name().to_string(),
        sideinfo: spec.sideinfo.name(),
        relation: spec.relation.name(),
        epsilon: spec.epsilon,
        delta: spec.delta,
        xi: spec.xi,
        trials: est.trials,
        lhs_successes: est.lhs_successes,
        lhs: est.lhs_estimate(),
        lhs_lo: est.lhs_ci.0,
        lhs_hi: est.lhs_ci.1,
        rhs_successes: est.rhs_successes,
        rhs: est.rhs_estimate(),
        rhs_lo: est.rhs_ci.0,
        rhs_hi: est.rhs_ci.1,
        verdict: est.verdict.name().to_string(),
        expected: expected.to_string(),
        met,
    }
}

/// Row for a measurement check: lhs is the measured value, rhs the
/// reference or bound.
#[allow(clippy::too_many_arguments)]
fn check_row(
    ctx: &Ctx,
    game: &str,
    trials: u64,
    measured: f64,
    reference: f64,
    met: bool,
    verdict: &str,
    expected: &str,
) -> ResultRow {
    ResultRow {
        scenario: ctx.scenario.to_string(),
        game: game.to_string(),
        definition: "check".to_string(),
        prior: "-".to_string(),
        mechanism: "-".to_string(),
        attacker: "-".to_string(),
        sideinfo: "-".to_string(),
        relation: "-".to_string(),
        epsilon: 0.0,
        delta: 0.0,
        xi: 0.0,
        trials,
        lhs_successes: 0,
        lhs: measured,
        lhs_lo: measured,
        lhs_hi: measured,
        rhs_successes: 0,
        rhs: reference,
        rhs_lo: reference,
        rhs_hi: reference,
        verdict: verdict.to_string(),
        expected: expected.to_string(),
        met,
    }
}

fn mia_row(ctx: &Ctx, game: &str, spec: &GameSpec, est: &MiaEstimate, expected: &str, met: bool) -> ResultRow {
    let verdict = if est.fpr_within_xi {
        format!("memorizing(m={})", est.memorized_m)
    } else {
        "not-memorizing".to_string()
    };
    ResultRow {
        scenario: ctx.scenario.to_string(),
        game: game.to_string(),
        definition: spec.definition.name().to_string(),
        prior: spec.prior.name().to_string(),
        mechanism: spec.mechanism.name().to_string(),
        attacker: spec.attacker.name().to_string(),
        sideinfo: spec.sideinfo.name(),
        relation: "membership".to_string(),
        epsilon: spec.epsilon,
        delta: spec.delta,
        xi: spec.xi,
        trials: est.trials,
        lhs_successes: est.tpr_successes,
        lhs: est.tpr_estimate(),
        lhs_lo: est.tpr_ci.0,
        lhs_hi: est.tpr_ci.1,
        rhs_successes: est.fpr_successes,
        rhs: est.fpr_estimate(),
        rhs_lo: est.fpr_ci.0,
        rhs_hi: est.fpr_ci.1,
        verdict,
        expected: expected.to_string(),
        met,
    }
}

fn xor_mia(ctx: &Ctx) -> Result<ScenarioOutput> {
    let p = ctx.p();
    let (n, d) = (p.usize("n")?, p.usize("d")?);
    let xi = p.f64("xi")?;
    let spec = GameSpec {
        prior: PriorSpec::UniformHypercube { d, n },
        mechanism: MechanismSpec::XorParity,
        attacker: AttackerSpec::ParityFitMia,
        sideinfo: SideInfoSpec::None,
        relation: GameRelation::Single(RelationSpec::ExactMembership),
        definition: Definition::Mia,
        epsilon: 0.0,
        delta: 0.0,
        xi,
        trials: ctx.trials()?,
        master_seed: ctx.seed,
    };
    let est = run_game_mia(&spec, ctx.workers)?;
    let met = est.tpr_successes == est.trials && est.fpr_ci.1 <= xi;
    let mut resolved = KvMap::new();
    resolved.insert("memorized_m".into(), est.memorized_m.to_string());
    resolved.insert("xi".into(), fmt_float(xi));
    resolved.insert(
        "fpr_collision_bound".into(),
        fmt_float(n as f64 * 2f64.powi(-(d as i32) / 2)),
    );
    let row = mia_row(ctx, "mia", &spec, &est, "memorizing", met);
    Ok((vec![row], vec![], resolved))
}

fn xor_mi_exact(ctx: &Ctx) -> Result<ScenarioOutput> {
    let p = ctx.p();
    let tolerance = p.f64("tolerance")?;
    let mut rows = Vec::new();
    for case in p.str("cases")?.split(',') {
        let (n, d) = case
            .trim()
            .split_once('x')
            .ok_or_else(|| Error::Config(format!("bad mi case {case:?}, want NxD")))?;
        let n: usize = n.parse().map_err(|_| Error::Config(format!("bad case {case:?}")))?;
        let d: usize = d.parse().map_err(|_| Error::Config(format!("bad case {case:?}")))?;
        let mi = oracle::mutual_information_xor(n, d)?;
        let expect = n as f64 * d as f64 / 2.0;
        let met = (mi - expect).abs() <= tolerance;
        rows.push(check_row(
            ctx,
            &format!("mi-{n}x{d}"),
            0,
            mi,
            expect,
            met,
            if met { "satisfied" } else { "violated" },
            "satisfied",
        ));
    }
    let mut resolved = KvMap::new();
    resolved.insert("tolerance".into(), fmt_float(tolerance));
    Ok((rows, vec![], resolved))
}

fn superset_attack(ctx: &Ctx) -> Result<ScenarioOutput> {
    let p = ctx.p();
    let spec = GameSpec {
        prior: PriorSpec::RandomSupport {
            m: p.usize("support")?,
            d: p.usize("d")?,
            n: p.usize("n")?,
        },
        mechanism: MechanismSpec::XorParity,
        attacker: AttackerSpec::SupersetLookup,
        sideinfo: SideInfoSpec::Superset,
        relation: GameRelation::Single(RelationSpec::ExactMembership),
        definition: Definition::SideInfo,
        epsilon: p.f64("epsilon")?,
        delta: p.f64("delta")?,
        xi: 1.0,
        trials: ctx.trials()?,
        master_seed: ctx.seed,
    };
    let est = run_game(&spec, ctx.workers)?;
    let met = est.verdict == Verdict::ViolatedAtConfidence;
    let row = game_row(ctx, "superset", &spec, &est, "violated", met);
    Ok((vec![row], vec![], KvMap::new()))
}

fn trivial_prior(ctx: &Ctx) -> Result<ScenarioOutput> {
    let p = ctx.p();
    let d = p.usize("d")?;
    let spec = GameSpec {
        prior: PriorSpec::Spiked { m: p.usize("support")?, d, n: p.usize("n")? },
        mechanism: MechanismSpec::Bot,
        attacker: AttackerSpec::Constant(BitVector::zeros(d)),
        sideinfo: SideInfoSpec::None,
        relation: GameRelation::Single(RelationSpec::ExactMembership),
        definition: Definition::Vanilla,
        epsilon: p.f64("epsilon")?,
        delta: p.f64("delta")?,
        xi: 1.0,
        trials: ctx.trials()?,
        master_seed: ctx.seed,
    };
    let est = run_game(&spec, ctx.workers)?;
    // the trivial guess succeeds on both sides; the baseline neutralizes it
    let met = est.verdict == Verdict::SatisfiedAtConfidence;
    let row = game_row(ctx, "constant-atom", &spec, &est, "satisfied", met);
    Ok((vec![row], vec![], KvMap::new()))
}

fn vanilla_hamming(ctx: &Ctx) -> Result<ScenarioOutput> {
    let p = ctx.p();
    let (codebook, n, d) = (p.usize("codebook")?, p.usize("n")?, p.usize("d")?);
    let gamma = p.ratio("gamma")?;
    let trials = ctx.trials()?;
    let lhs_cap = p.f64("lhs_cap")?;
    let lukewarm_min = p.f64("lukewarm_min")?;
    let base = GameSpec {
        prior: PriorSpec::Tardos(TardosParams::new(codebook, d, n)?),
        mechanism: MechanismSpec::ExactAverage,
        attacker: AttackerSpec::Round,
        sideinfo: SideInfoSpec::None,
        relation: GameRelation::Single(RelationSpec::HammingFrac(gamma)),
        definition: Definition::Vanilla,
        epsilon: p.f64("epsilon")?,
        delta: p.f64("delta")?,
        xi: 1.0,
        trials,
        master_seed: ctx.seed,
    };

    let mut rows = Vec::new();

    let round_est = run_game(&base, ctx.workers)?;
    let round_met = round_est.verdict == Verdict::SatisfiedAtConfidence
        && round_est.lhs_ci.1 <= lhs_cap
        && round_est.lukewarm_fraction() >= lukewarm_min;
    rows.push(game_row(ctx, "round", &base, &round_est, "satisfied", round_met));

    let mut constant = base.clone();
    constant.attacker = AttackerSpec::Constant(BitVector::from_bits(&vec![1u8; d]));
    let constant_est = run_game(&constant, ctx.workers)?;
    let constant_met = constant_est.verdict == Verdict::SatisfiedAtConfidence
        && constant_est.lhs_ci.1 <= lhs_cap;
    rows.push(game_row(ctx, "constant", &constant, &constant_est, "satisfied", constant_met));

    // gamma sweep for the round attacker: k/50 for k = 1..points
    let points = p.u64("sweep_points")?;
    let mut series_points = Vec::new();
    for k in 1..=points {
        let g = Ratio::new(k, 50)?;
        let mut spec = base.clone();
        spec.relation = GameRelation::Single(RelationSpec::HammingFrac(g));
        let est = run_game(&spec, ctx.workers)?;
        series_points.push((g.as_f64(), est.lhs_estimate()));
        rows.push(game_row(ctx, &format!("sweep-{k}of50"), &spec, &est, "none", true));
    }
    let series = vec![SeriesFile {
        name: "gamma".into(),
        x_label: "gamma".into(),
        y_label: "lhs".into(),
        points: series_points,
    }];

    let mut resolved = KvMap::new();
    resolved.insert("gamma".into(), format!("{}/{}", gamma.num, gamma.den));
    resolved.insert("lukewarm_fraction".into(), fmt_float(round_est.lukewarm_fraction()));
    Ok((rows, series, resolved))
}

fn bi_criteria(ctx: &Ctx) -> Result<ScenarioOutput> {
    let p = ctx.p();
    let (codebook, n, d) = (p.usize("codebook")?, p.usize("n")?, p.usize("d")?);
    let gamma = p.ratio("gamma")?;
    let c_delta = p.f64("c_delta")?;
    let delta = p.f64("delta")?;
    let pair = BiRelationSpec::hamming_pair(gamma, c_delta, n, d, delta)?;
    let gamma_hat = pair.gamma_hat().expect("hamming pair");
    let spec = GameSpec {
        prior: PriorSpec::Tardos(TardosParams::new(codebook, d, n)?),
        mechanism: MechanismSpec::ExactAverage,
        attacker: AttackerSpec::Round,
        sideinfo: SideInfoSpec::None,
        relation: GameRelation::Bi(pair),
        definition: Definition::BiCriteria,
        epsilon: p.f64("epsilon")?,
        delta,
        xi: 1.0,
        trials: ctx.trials()?,
        master_seed: ctx.seed,
    };
    let est = run_game(&spec, ctx.workers)?;
    let met = est.verdict == Verdict::SatisfiedAtConfidence;
    let row = game_row(ctx, "round", &spec, &est, "satisfied", met);
    let mut resolved = KvMap::new();
    resolved.insert("gamma".into(), format!("{}/{}", gamma.num, gamma.den));
    resolved.insert("c_delta".into(), fmt_float(c_delta));
    resolved.insert("gamma_hat".into(), fmt_float(gamma_hat.as_f64()));
    resolved.insert(
        "gamma_hat_exact".into(),
        format!("{}/{}", gamma_hat.num, gamma_hat.den),
    );
    Ok((vec![row], vec![], resolved))
}

fn subtract_attack(ctx: &Ctx) -> Result<ScenarioOutput> {
    let p = ctx.p();
    let (codebook, n, d) = (p.usize("codebook")?, p.usize("n")?, p.usize("d")?);
    let spec = GameSpec {
        prior: PriorSpec::Tardos(TardosParams::new(codebook, d, n)?),
        mechanism: MechanismSpec::ExactAverage,
        attacker: AttackerSpec::Subtract,
        sideinfo: SideInfoSpec::RevealedRows { m: n - 1 },
        relation: GameRelation::Single(RelationSpec::ExactMembership),
        definition: Definition::SideInfo,
        epsilon: p.f64("epsilon")?,
        delta: p.f64("delta")?,
        xi: 1.0,
        trials: ctx.trials()?,
        master_seed: ctx.seed,
    };
    let est = run_game(&spec, ctx.workers)?;
    // the recovery is lossless, the conditional baseline replaces one index
    let rhs_reference = 1.0 / (codebook - n + 1) as f64;
    let met = est.verdict == Verdict::ViolatedAtConfidence
        && est.lhs_successes == est.trials
        && est.rhs_ci.0 <= rhs_reference
        && rhs_reference <= est.rhs_ci.1;
    let row = game_row(ctx, "subtract", &spec, &est, "violated", met);
    let mut resolved = KvMap::new();
    resolved.insert("rhs_reference".into(), fmt_float(rhs_reference));
    Ok((vec![row], vec![], resolved))
}

fn two_candidate(ctx: &Ctx) -> Result<ScenarioOutput> {
    let p = ctx.p();
    let (codebook, n, d) = (p.usize("codebook")?, p.usize("n")?, p.usize("d")?);
    let eps_hat = p.f64("eps_hat")?;
    let margin = p.f64("margin")?;
    let spec = GameSpec {
        prior: PriorSpec::Tardos(TardosParams::new(codebook, d, n)?),
        mechanism: MechanismSpec::NoisyAverage { eps_hat },
        attacker: AttackerSpec::TwoCandidate,
        sideinfo: SideInfoSpec::ShuffledPair,
        relation: GameRelation::Single(RelationSpec::ExactMembership),
        definition: Definition::SideInfo,
        epsilon: p.f64("epsilon")?,
        delta: p.f64("delta")?,
        xi: 1.0,
        trials: ctx.trials()?,
        master_seed: ctx.seed,
    };
    let est = run_game(&spec, ctx.workers)?;
    let met = est.verdict == Verdict::ViolatedAtConfidence
        && est.lhs_estimate() - est.rhs_estimate() >= margin
        && est.lhs_ci.0 > est.rhs_ci.1;
    let row = game_row(ctx, "two-candidate", &spec, &est, "violated", met);
    let mut resolved = KvMap::new();
    resolved.insert("noise_scale".into(), fmt_float(1.0 / (eps_hat * n as f64)));
    resolved.insert("margin".into(), fmt_float(margin));
    Ok((vec![row], vec![], resolved))
}

fn dp_noisy_secure(ctx: &Ctx) -> Result<ScenarioOutput> {
    let p = ctx.p();
    let (codebook, n, d) = (p.usize("codebook")?, p.usize("n")?, p.usize("d")?);
    let eps_hat = p.f64("eps_hat")?;
    let xi = p.f64("xi")?;
    let base = GameSpec {
        prior: PriorSpec::Tardos(TardosParams::new(codebook, d, n)?),
        mechanism: MechanismSpec::NoisyAverage { eps_hat },
        attacker: AttackerSpec::Subtract,
        sideinfo: SideInfoSpec::RevealedRows { m: n - 1 },
        relation: GameRelation::Single(RelationSpec::ExactMembership),
        definition: Definition::SurprisalGated,
        epsilon: p.f64("epsilon")?,
        delta: p.f64("delta")?,
        xi,
        trials: ctx.trials()?,
        master_seed: ctx.seed,
    };

    let noisy_est = run_game(&base, ctx.workers)?;
    let lhs_cap = p.f64("lhs_cap")?;
    let noisy_met =
        noisy_est.verdict == Verdict::SatisfiedAtConfidence && noisy_est.lhs_ci.1 <= lhs_cap;
    let mut rows = vec![game_row(ctx, "noisy", &base, &noisy_est, "satisfied", noisy_met)];

    // the same gate with the exact average: the subtraction is lossless and
    // the revealed rows tell the gate nothing beyond S minus the target, so
    // the gated probability stays near one
    let mut exact = base.clone();
    exact.mechanism = MechanismSpec::ExactAverage;
    let exact_est = run_game(&exact, ctx.workers)?;
    let lhs_floor = p.f64("lhs_floor")?;
    let exact_met = exact_est.verdict == Verdict::ViolatedAtConfidence
        && exact_est.lhs_estimate() >= lhs_floor;
    rows.push(game_row(ctx, "exact", &exact, &exact_est, "violated", exact_met));

    let mut resolved = KvMap::new();
    resolved.insert("xi".into(), fmt_float(xi));
    resolved.insert("eps_hat".into(), fmt_float(eps_hat));
    resolved.insert("noise_scale".into(), fmt_float(1.0 / (eps_hat * n as f64)));
    Ok((rows, vec![], resolved))
}

fn dp_ratio_check(ctx: &Ctx) -> Result<ScenarioOutput> {
    let p = ctx.p();
    let (n, d) = (p.usize("n")?, p.usize("d")?);
    let eps_hat = p.f64("eps_hat")?;
    let pairs = ctx.trials()?;
    let samples = p.u64("samples")?;
    let bound = eps_hat * d as f64 + 1e-9;
    let prior = PriorSpec::UniformHypercube { d, n };
    let seed = ctx.seed;
    let per_pair = pooled(pairs, ctx.workers, |t| -> Result<(f64, u64)> {
        let world = sample_world(&prior, seed, t)?;
        let s = world.dataset().clone();
        let mut aux = TrialRng::derive(seed, t, Stream::Aux);
        let victim = aux.below(n as u64) as usize;
        let mut rows = s.rows().to_vec();
        rows[victim] = BitVector::random(d, &mut aux);
        let s_prime = BitMatrix::from_rows(rows, d)?;
        let noise = NoiseParams::new(eps_hat, n)?;
        let mut mech_rng = TrialRng::derive(seed, t, Stream::Mechanism);
        let mut worst: f64 = 0.0;
        let mut violations = 0u64;
        for _ in 0..samples {
            let y = noisy_average(&s, &noise, &mut mech_rng)?;
            let r = dp_log_density_ratio(y.as_real()?, &s, &s_prime, &noise)?.abs();
            if r > bound {
                violations += 1;
            }
            worst = worst.max(r);
        }
        Ok((worst, violations))
    })?;
    let max_ratio = per_pair.iter().map(|x| x.0).fold(0.0, f64::max);
    let violations: u64 = per_pair.iter().map(|x| x.1).sum();
    let met = violations == 0 && max_ratio <= bound;
    let row = check_row(
        ctx,
        "density-ratio",
        pairs * samples,
        max_ratio,
        bound,
        met,
        if met { "satisfied" } else { "violated" },
        "satisfied",
    );
    let mut resolved = KvMap::new();
    resolved.insert("eps_hat".into(), fmt_float(eps_hat));
    resolved.insert("dp_bound".into(), fmt_float(eps_hat * d as f64));
    resolved.insert("violations".into(), violations.to_string());
    Ok((vec![row], vec![], resolved))
}

/// Composite-Simpson integral of p^(k+1)(1-p)^(m-k) over p^k (1-p)^(m-k):
/// the quadrature route to the rule of succession.
fn beta_mean_quadrature(k: usize, m: usize) -> f64 {
    let f = |p: f64, a: i32, b: i32| p.powi(a) * (1.0 - p).powi(b);
    let integrate = |a: i32, b: i32| {
        let steps = 4096;
        let h = 1.0 / steps as f64;
        let mut acc = f(0.0, a, b) + f(1.0, a, b);
        for i in 1..steps {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(i as f64 * h, a, b);
        }
        acc * h / 3.0
    };
    integrate(k as i32 + 1, (m - k) as i32) / integrate(k as i32, (m - k) as i32)
}

fn surprisal_oracle(ctx: &Ctx) -> Result<ScenarioOutput> {
    let p = ctx.p();
    let params = TardosParams::new(p.usize("codebook")?, p.usize("d")?, p.usize("n")?)?;
    let tolerance = p.f64("tolerance")?;
    let law = oracle::surprisal_conditional_law(&params)?;
    let d = params.d;
    let mut max_diff: f64 = 0.0;
    let mut cases = 0u64;
    for ((s_key, z), prob) in &law {
        let rows = BitMatrix::from_rows(
            s_key.iter().map(|&r| BitVector::from_u64(r, d)).collect(),
            d,
        )?;
        let closed = surprisal_given_rows(&BitVector::from_u64(*z, d), &rows)?;
        let oracle_h = -prob.to_f64().log2();
        max_diff = max_diff.max((closed - oracle_h).abs());
        cases += 1;
    }
    let product_met = max_diff <= tolerance;
    let mut rows = vec![check_row(
        ctx,
        "product-vs-enumeration",
        cases,
        max_diff,
        tolerance,
        product_met,
        if product_met { "satisfied" } else { "violated" },
        "satisfied",
    )];

    let succ_diff = [
        (posterior_column_mean(1, 2) - beta_mean_quadrature(1, 2)).abs(),
        (posterior_column_mean(0, 2) - beta_mean_quadrature(0, 2)).abs(),
        (posterior_column_mean(1, 2) - 0.5).abs(),
        (posterior_column_mean(0, 2) - 0.25).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let succ_met = succ_diff <= tolerance;
    rows.push(check_row(
        ctx,
        "rule-of-succession",
        4,
        succ_diff,
        tolerance,
        succ_met,
        if succ_met { "satisfied" } else { "violated" },
        "satisfied",
    ));

    let mut resolved = KvMap::new();
    resolved.insert("tolerance".into(), fmt_float(tolerance));
    resolved.insert("cases".into(), cases.to_string());
    Ok((rows, vec![], resolved))
}

fn coupled_sampler_check(ctx: &Ctx) -> Result<ScenarioOutput> {
    use std::collections::BTreeMap;
    let p = ctx.p();
    let params = TardosParams::new(p.usize("codebook")?, p.usize("d")?, p.usize("n")?)?;
    let tolerance = p.f64("tolerance")?;
    let trials = ctx.trials()?;
    let exact = oracle::joint_st_law(&params)?;
    let mut counts: BTreeMap<(Vec<u64>, Vec<u64>), u64> = BTreeMap::new();
    for t in 0..trials {
        let cw = sample_coupled_st(&params, &mut TrialRng::derive(ctx.seed, t, Stream::Coupled))?;
        let s_key: Vec<u64> = {
            let mut v: Vec<u64> = cw.s.rows().iter().map(|r| r.to_u64()).collect();
            v.sort_unstable();
            v
        };
        let t_key: Vec<u64> = {
            let mut v: Vec<u64> = cw.t.rows().iter().map(|r| r.to_u64()).collect();
            v.sort_unstable();
            v
        };
        *counts.entry((s_key, t_key)).or_insert(0) += 1;
    }
    let mut tv = 0.0;
    let mut keys: std::collections::BTreeSet<(Vec<u64>, Vec<u64>)> =
        exact.keys().cloned().collect();
    keys.extend(counts.keys().cloned());
    for key in keys {
        let emp = *counts.get(&key).unwrap_or(&0) as f64 / trials as f64;
        let ex = exact.get(&key).map(|f| f.to_f64()).unwrap_or(0.0);
        tv += (emp - ex).abs();
    }
    tv /= 2.0;
    let met = tv <= tolerance;
    let row = check_row(
        ctx,
        "coupled-vs-independent",
        trials,
        tv,
        tolerance,
        met,
        if met { "satisfied" } else { "violated" },
        "satisfied",
    );
    let mut resolved = KvMap::new();
    resolved.insert("tolerance".into(), fmt_float(tolerance));
    Ok((vec![row], vec![], resolved))
}

fn marginals_accuracy(ctx: &Ctx) -> Result<ScenarioOutput> {
    let p = ctx.p();
    let (n, d) = (p.usize("n")?, p.usize("d")?);
    let eps_hat = p.f64("eps_hat")?;
    let beta = p.f64("beta")?;
    let trials = ctx.trials()?;
    let bound = (2.0 * d as f64 / beta).ln() / (eps_hat * n as f64);
    let prior = PriorSpec::UniformHypercube { d, n };
    let seed = ctx.seed;
    let hits = pooled(trials, ctx.workers, |t| -> Result<bool> {
        let world = sample_world(&prior, seed, t)?;
        let s = world.dataset();
        let noise = NoiseParams::new(eps_hat, n)?;
        let y = noisy_average(s, &noise, &mut TrialRng::derive(seed, t, Stream::Mechanism))?;
        Ok(crate::mechanisms::marginal_error(&y, s)? <= bound)
    })?;
    let ok = hits.iter().filter(|&&h| h).count() as u64;
    let frac = ok as f64 / trials as f64;
    let target = 1.0 - beta;
    let met = frac >= target;
    let row = check_row(
        ctx,
        "linf-error",
        trials,
        frac,
        target,
        met,
        if met { "satisfied" } else { "violated" },
        "satisfied",
    );
    let mut resolved = KvMap::new();
    resolved.insert("alpha_bound".into(), fmt_float(bound));
    resolved.insert("beta".into(), fmt_float(beta));
    Ok((vec![row], vec![], resolved))
}

fn custom(ctx: &Ctx) -> Result<ScenarioOutput> {
    let spec = game_spec_from_kv(ctx.params, ctx.trials()?, ctx.seed)?;
    let row = if spec.definition == Definition::Mia {
        let est = run_game_mia(&spec, ctx.workers)?;
        mia_row(ctx, "game", &spec, &est, "none", true)
    } else {
        let est = run_game(&spec, ctx.workers)?;
        game_row(ctx, "game", &spec, &est, "none", true)
    };
    Ok((vec![row], vec![], KvMap::new()))
}

/// Run a scenario to a manifest. Pure apart from the wall clock: identical
/// configuration and seed yield identical rows and series for any worker
/// count.
pub fn run_scenario(cfg: &ExperimentConfig) -> Result<ResultManifest> {
    let started = Instant::now();
    let name = cfg.scenario.as_str();
    if name.is_empty() {
        return Err(Error::Config("no scenario selected".into()));
    }
    let mut params = scenario_defaults(name)?;
    for (k, v) in &cfg.overrides {
        if name != "custom" && !params.contains_key(k) {
            return Err(Error::Config(format!(
                "scenario {name} has no parameter {k:?} (known: {})",
                params.keys().cloned().collect::<Vec<_>>().join(", ")
            )));
        }
        params.insert(k.clone(), v.clone());
    }
    if let Some(t) = cfg.trials {
        params.insert("trials".into(), t.to_string());
    }

    let ctx = Ctx { scenario: name, params: &params, seed: cfg.master_seed, workers: cfg.workers };
    let (rows, series, resolved) = match name {
        "xor-mia" => xor_mia(&ctx)?,
        "xor-mi-exact" => xor_mi_exact(&ctx)?,
        "superset-attack" => superset_attack(&ctx)?,
        "trivial-prior" => trivial_prior(&ctx)?,
        "vanilla-hamming" => vanilla_hamming(&ctx)?,
        "bi-criteria" => bi_criteria(&ctx)?,
        "subtract-attack" => subtract_attack(&ctx)?,
        "two-candidate" => two_candidate(&ctx)?,
        "dp-noisy-secure" => dp_noisy_secure(&ctx)?,
        "dp-ratio-check" => dp_ratio_check(&ctx)?,
        "surprisal-oracle" => surprisal_oracle(&ctx)?,
        "coupled-sampler-check" => coupled_sampler_check(&ctx)?,
        "marginals-accuracy" => marginals_accuracy(&ctx)?,
        "custom" => custom(&ctx)?,
        other => return Err(Error::UnknownScenario(other.to_string())),
    };

    let mut config = KvMap::new();
    config.insert("scenario".into(), name.to_string());
    config.insert("seed".into(), cfg.master_seed.to_string());
    config.insert("workers".into(), cfg.workers.to_string());
    config.insert("out_dir".into(), cfg.out_dir.display().to_string());
    if let Some(label) = &cfg.label {
        config.insert("label".into(), label.clone());
    }
    for (k, v) in &params {
        config.insert(format!("set.{k}"), v.clone());
    }

    Ok(ResultManifest {
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        wall_clock_ms: started.elapsed().as_millis(),
        config,
        resolved,
        rows,
        series,
    })
}

/// Run a scenario and emit its outputs under
/// `out_dir/<scenario>/<label-or-timestamp>/`.
pub fn run_scenario_to_dir(cfg: &ExperimentConfig) -> Result<(ResultManifest, std::path::PathBuf)> {
    let manifest = run_scenario(cfg)?;
    let label = cfg.label.clone().unwrap_or_else(|| {
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        format!("run-{secs}")
    });
    let dir = cfg.out_dir.join(&cfg.scenario).join(label);
    manifest.emit(&dir)?;
    Ok((manifest, dir))
}

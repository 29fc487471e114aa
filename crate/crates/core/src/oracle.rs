//! Exact tiny-scale enumeration oracles.
//!
//! For small instances the full probability space is walked term by term:
//! all codebooks (weighted by the exact Beta-integral column weights
//! k!(N-k)!/(N+1)!), all dataset draws, all side-information randomizations,
//! and all baseline draws. Probabilities accumulate as exact rationals; no
//! float error crosses the 2^(N·d) terms. The oracles exist to validate the
//! samplers, the surprisal closed form, and the Monte Carlo estimator.

use std::collections::BTreeMap;

use crate::attackers::SideInfoValue;
use crate::bits::{BitMatrix, BitVector};
use crate::error::{Error, Result};
use crate::estimator::{Definition, GameSpec};
use crate::mechanisms::{bot, exact_average, xor_parity, MechanismSpec, Release};
use crate::prior::{PriorSpec, TardosParams};
use crate::relations::RelationSpec;

/// An exact nonnegative rational with u128 components, reduced on every
/// operation. Sizes are tiny at oracle scale; overflow panics loudly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Frac {
    num: u128,
    den: u128,
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

impl Frac {
    pub const ZERO: Frac = Frac { num: 0, den: 1 };
    pub const ONE: Frac = Frac { num: 1, den: 1 };

    pub fn new(num: u128, den: u128) -> Frac {
        assert!(den != 0, "zero denominator");
        let g = gcd(num, den);
        Frac { num: num / g, den: den / g }
    }

    pub fn add(self, o: Frac) -> Frac {
        let g = gcd(self.den, o.den);
        let lcm = (self.den / g).checked_mul(o.den).expect("rational overflow");
        let a = self.num.checked_mul(lcm / self.den).expect("rational overflow");
        let b = o.num.checked_mul(lcm / o.den).expect("rational overflow");
        Frac::new(a.checked_add(b).expect("rational overflow"), lcm)
    }

    pub fn mul(self, o: Frac) -> Frac {
        let g1 = gcd(self.num, o.den);
        let g2 = gcd(o.num, self.den);
        let num = (self.num / g1).checked_mul(o.num / g2).expect("rational overflow");
        let den = (self.den / g2).checked_mul(o.den / g1).expect("rational overflow");
        Frac::new(num, den)
    }

    pub fn div(self, o: Frac) -> Frac {
        assert!(o.num != 0, "division by zero rational");
        self.mul(Frac { num: o.den, den: o.num })
    }

    pub fn pow(self, mut e: u32) -> Frac {
        let mut acc = Frac::ONE;
        let mut base = self;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(base);
            }
            base = base.mul(base);
            e >>= 1;
        }
        acc
    }

    pub fn complement(self) -> Frac {
        assert!(self.num <= self.den);
        Frac::new(self.den - self.num, self.den)
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn factorial(n: u128) -> u128 {
    (1..=n).product::<u128>().max(1)
}

fn binom(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    factorial(n as u128) / factorial(k as u128) / factorial((n - k) as u128)
}

fn perm(n: usize, k: usize) -> u128 {
    factorial(n as u128) / factorial((n - k) as u128)
}

fn combinations(pool: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if pool.len() < k {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (i, &first) in pool.iter().enumerate() {
        for mut rest in combinations(&pool[i + 1..], k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn arrangements(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    let mut used = vec![false; n];
    fn rec(n: usize, k: usize, used: &mut Vec<bool>, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                current.push(i);
                rec(n, k, used, current, out);
                current.pop();
                used[i] = false;
            }
        }
    }
    rec(n, k, &mut used, &mut current, &mut out);
    out
}

/// Exact probability of a codebook whose column-j Hamming weight is k_j:
/// the Beta integral of p^k (1-p)^(N-k) over a uniform bias is
/// k!(N-k)!/(N+1)!.
fn codebook_weight(rows: &[u64], codebook_size: usize, d: usize) -> Frac {
    let mut w = Frac::ONE;
    let den = factorial(codebook_size as u128 + 1);
    for j in 0..d {
        let k = rows.iter().filter(|&&r| (r >> j) & 1 == 1).count() as u128;
        let num = factorial(k) * factorial(codebook_size as u128 - k);
        w = w.mul(Frac::new(num, den));
    }
    w
}

fn rows_to_matrix(rows: &[u64], d: usize) -> BitMatrix {
    BitMatrix::from_rows(rows.iter().map(|&r| BitVector::from_u64(r, d)).collect(), d)
        .expect("oracle rows share d")
}

fn sorted_contents(rows: &[u64]) -> Vec<u64> {
    let mut v = rows.to_vec();
    v.sort_unstable();
    v
}

/// Exact left- and right-hand probabilities of a game.
#[derive(Debug, Clone)]
pub struct OracleResult {
    pub lhs: Frac,
    pub rhs: Frac,
    pub enumeration_size: u64,
}

const MAX_TERMS: u64 = 50_000_000;

fn noiseless_release(mech: &MechanismSpec, s: &BitMatrix) -> Result<Release> {
    match mech {
        MechanismSpec::ExactAverage => exact_average(s),
        MechanismSpec::XorParity => xor_parity(s),
        MechanismSpec::Bot => Ok(bot(s)),
        MechanismSpec::NoisyAverage { .. } => Err(Error::SizeBoundExceeded(
            "the oracle enumerates noiseless mechanisms only".into(),
        )),
    }
}

fn oracle_supported(spec: &GameSpec) -> Result<()> {
    if spec.attacker.is_distinguisher() || spec.definition == Definition::Mia {
        return Err(Error::SizeBoundExceeded(
            "mia games have a dedicated oracle (mia_exact_uniform)".into(),
        ));
    }
    if matches!(
        spec.definition,
        Definition::SurprisalGated | Definition::TargetedGated
    ) {
        return Err(Error::SizeBoundExceeded(
            "gated definitions are validated through the surprisal law oracle".into(),
        ));
    }
    Ok(())
}

/// Exact LHS/RHS probabilities for a restricted game spec: Tardos prior with
/// N·d <= 16 or uniform hypercube with n·d <= 16, noiseless mechanism,
/// deterministic attacker, and an ungated definition.
pub fn oracle_exact(spec: &GameSpec) -> Result<OracleResult> {
    spec.validate()?;
    oracle_supported(spec)?;
    match spec.prior {
        PriorSpec::Tardos(params) => oracle_exact_tardos(spec, &params),
        PriorSpec::UniformHypercube { d, n } => oracle_exact_hypercube(spec, d, n),
        _ => Err(Error::SizeBoundExceeded(
            "the oracle enumerates tardos and uniform-hypercube priors".into(),
        )),
    }
}

fn tardos_sideinfo_branches(
    spec: &GameSpec,
    params: &TardosParams,
    c_rows: &[u64],
    i_s: &[usize],
    d: usize,
) -> Vec<(Frac, SideInfoValue)> {
    use crate::attackers::SideInfoSpec;
    let n = params.n;
    match spec.sideinfo {
        SideInfoSpec::None => vec![(Frac::ONE, SideInfoValue::None)],
        SideInfoSpec::RevealedRows { m } => {
            let rows: Vec<u64> = i_s[..m].iter().map(|&i| c_rows[i]).collect();
            vec![(
                Frac::ONE,
                SideInfoValue::RevealedRows {
                    rows: rows_to_matrix(&rows, d),
                    indices: Some(i_s[..m].to_vec()),
                },
            )]
        }
        SideInfoSpec::Superset => vec![(Frac::ONE, SideInfoValue::Superset(rows_to_matrix(c_rows, d)))],
        SideInfoSpec::ShuffledPair => {
            let pool: Vec<usize> = (0..params.codebook_size).filter(|i| !i_s.contains(i)).collect();
            let prob = Frac::new(1, (n as u128) * (pool.len() as u128) * 2);
            let mut out = Vec::new();
            for &member_pos in i_s.iter() {
                for &fresh in &pool {
                    for flip in 0..2 {
                        let (a, b) = if flip == 0 { (member_pos, fresh) } else { (fresh, member_pos) };
                        out.push((
                            prob,
                            SideInfoValue::ShuffledPair {
                                k1: BitVector::from_u64(c_rows[a], d),
                                k2: BitVector::from_u64(c_rows[b], d),
                                idx1: Some(a),
                                idx2: Some(b),
                            },
                        ));
                    }
                }
            }
            out
        }
    }
}

fn tardos_t_branches(
    spec: &GameSpec,
    params: &TardosParams,
    c_rows: &[u64],
    k: &SideInfoValue,
    d: usize,
) -> Vec<(Frac, BitMatrix)> {
    let nn = params.codebook_size;
    let n = params.n;
    let all: Vec<usize> = (0..nn).collect();
    let fresh = |out: &mut Vec<(Frac, BitMatrix)>| {
        let p = Frac::new(1, binom(nn, n));
        for combo in combinations(&all, n) {
            let rows: Vec<u64> = combo.iter().map(|&i| c_rows[i]).collect();
            out.push((p, rows_to_matrix(&rows, d)));
        }
    };
    let mut out = Vec::new();
    match (spec.definition, k) {
        (Definition::Vanilla | Definition::BiCriteria, _)
        | (_, SideInfoValue::None)
        | (_, SideInfoValue::Superset(_)) => fresh(&mut out),
        (_, SideInfoValue::RevealedRows { indices, .. }) => {
            let revealed = indices.clone().expect("tardos oracle tracks indices");
            let remaining: Vec<usize> = (0..nn).filter(|i| !revealed.contains(i)).collect();
            let p = Frac::new(1, binom(remaining.len(), n - revealed.len()));
            for combo in combinations(&remaining, n - revealed.len()) {
                let mut rows: Vec<u64> = revealed.iter().map(|&i| c_rows[i]).collect();
                rows.extend(combo.iter().map(|&i| c_rows[i]));
                out.push((p, rows_to_matrix(&rows, d)));
            }
        }
        (_, SideInfoValue::ShuffledPair { idx1, idx2, .. }) => {
            let a = idx1.expect("tardos oracle tracks indices");
            let b = idx2.expect("tardos oracle tracks indices");
            let pool: Vec<usize> = (0..nn).filter(|&i| i != a && i != b).collect();
            let p = Frac::new(1, 2 * binom(pool.len(), n - 1));
            for role in [a, b] {
                for combo in combinations(&pool, n - 1) {
                    let mut rows = vec![c_rows[role]];
                    rows.extend(combo.iter().map(|&i| c_rows[i]));
                    out.push((p, rows_to_matrix(&rows, d)));
                }
            }
        }
    }
    out
}

fn oracle_exact_tardos(spec: &GameSpec, params: &TardosParams) -> Result<OracleResult> {
    let TardosParams { codebook_size: nn, d, n } = *params;
    let bits = nn * d;
    if bits > 16 {
        return Err(Error::SizeBoundExceeded(format!("N·d = {bits} exceeds 16")));
    }
    let i_s_list = arrangements(nn, n);
    let est = (1u64 << bits) * perm(nn, n) as u64 * 4 * binom(nn, n) as u64;
    if est > MAX_TERMS {
        return Err(Error::SizeBoundExceeded(format!("about {est} terms")));
    }

    let arrangement_prob = Frac::new(1, perm(nn, n));
    let mut lhs = Frac::ZERO;
    let mut rhs = Frac::ZERO;
    let mut terms = 0u64;
    let mask = if d == 64 { u64::MAX } else { (1u64 << d) - 1 };

    for c_code in 0u64..(1u64 << bits) {
        let c_rows: Vec<u64> = (0..nn).map(|i| (c_code >> (i * d)) & mask).collect();
        let w = codebook_weight(&c_rows, nn, d);
        for i_s in &i_s_list {
            let base = w.mul(arrangement_prob);
            let s_rows: Vec<u64> = i_s.iter().map(|&i| c_rows[i]).collect();
            let s = rows_to_matrix(&s_rows, d);
            let y = noiseless_release(&spec.mechanism, &s)?;
            for (si_prob, k) in tardos_sideinfo_branches(spec, params, &c_rows, i_s, d) {
                let z = spec.attacker.reconstruct(&y, &k, n)?;
                let branch = base.mul(si_prob);
                if spec.relation.lhs().holds(&s, &z)? {
                    lhs = lhs.add(branch);
                }
                for (t_prob, t_mat) in tardos_t_branches(spec, params, &c_rows, &k, d) {
                    terms += 1;
                    if spec.relation.rhs().holds(&t_mat, &z)? {
                        rhs = rhs.add(branch.mul(t_prob));
                    }
                }
            }
        }
    }
    Ok(OracleResult { lhs, rhs, enumeration_size: terms })
}

fn row_satisfaction_count(rel: &RelationSpec, z: &BitVector, d: usize) -> Result<u128> {
    let mut cnt = 0u128;
    for x in 0u64..(1u64 << d) {
        let row = rows_to_matrix(&[x], d);
        if rel.holds(&row, z)? {
            cnt += 1;
        }
    }
    Ok(cnt)
}

fn oracle_exact_hypercube(spec: &GameSpec, d: usize, n: usize) -> Result<OracleResult> {
    use crate::attackers::SideInfoSpec;
    let bits = n * d;
    if bits > 16 {
        return Err(Error::SizeBoundExceeded(format!("n·d = {bits} exceeds 16")));
    }
    let si_branches: u64 = match spec.sideinfo {
        SideInfoSpec::ShuffledPair => (n as u64) * (1 << d) * 2,
        _ => 1,
    };
    let est = (1u64 << bits) * si_branches * (1 << d);
    if est > MAX_TERMS {
        return Err(Error::SizeBoundExceeded(format!("about {est} terms")));
    }

    let mask = (1u64 << d) - 1;
    let s_weight = Frac::new(1, 1u128 << bits);
    let domain = 1u128 << d;
    let mut lhs = Frac::ZERO;
    let mut rhs = Frac::ZERO;
    let mut terms = 0u64;

    for s_code in 0u64..(1u64 << bits) {
        let s_rows: Vec<u64> = (0..n).map(|i| (s_code >> (i * d)) & mask).collect();
        let s = rows_to_matrix(&s_rows, d);
        let y = noiseless_release(&spec.mechanism, &s)?;

        let branches: Vec<(Frac, SideInfoValue)> = match spec.sideinfo {
            SideInfoSpec::None => vec![(Frac::ONE, SideInfoValue::None)],
            SideInfoSpec::RevealedRows { m } => vec![(
                Frac::ONE,
                SideInfoValue::RevealedRows {
                    rows: rows_to_matrix(&s_rows[..m], d),
                    indices: None,
                },
            )],
            SideInfoSpec::ShuffledPair => {
                let prob = Frac::new(1, (n as u128) * domain * 2);
                let mut out = Vec::new();
                for member_pos in 0..n {
                    for fresh in 0u64..(1u64 << d) {
                        for flip in 0..2 {
                            let (a, b) = if flip == 0 {
                                (s_rows[member_pos], fresh)
                            } else {
                                (fresh, s_rows[member_pos])
                            };
                            out.push((
                                prob,
                                SideInfoValue::ShuffledPair {
                                    k1: BitVector::from_u64(a, d),
                                    k2: BitVector::from_u64(b, d),
                                    idx1: None,
                                    idx2: None,
                                },
                            ));
                        }
                    }
                }
                out
            }
            SideInfoSpec::Superset => {
                return Err(Error::SizeBoundExceeded(
                    "the uniform hypercube has no finite support to reveal".into(),
                ))
            }
        };

        for (si_prob, k) in branches {
            terms += 1;
            let z = spec.attacker.reconstruct(&y, &k, n)?;
            let branch = s_weight.mul(si_prob);
            if spec.relation.lhs().holds(&s, &z)? {
                lhs = lhs.add(branch);
            }

            // the rhs over an i.i.d. baseline factorizes per row
            let rel = spec.relation.rhs();
            let cnt = row_satisfaction_count(&rel, &z, d)?;
            let miss = Frac::new(domain - cnt, domain);
            let p_rhs = match (spec.definition, &k) {
                (Definition::Vanilla | Definition::BiCriteria, _)
                | (_, SideInfoValue::None) => miss.pow(n as u32).complement(),
                (_, SideInfoValue::RevealedRows { rows, .. }) => {
                    if rel.holds(rows, &z)? {
                        Frac::ONE
                    } else {
                        miss.pow((n - rows.n()) as u32).complement()
                    }
                }
                (_, SideInfoValue::ShuffledPair { k1, k2, .. }) => {
                    let mut acc = Frac::ZERO;
                    for member in [k1, k2] {
                        let member_m = BitMatrix::from_rows(vec![(*member).clone()], d)?;
                        let p = if rel.holds(&member_m, &z)? {
                            Frac::ONE
                        } else {
                            miss.pow((n - 1) as u32).complement()
                        };
                        acc = acc.add(p.mul(Frac::new(1, 2)));
                    }
                    acc
                }
                (_, SideInfoValue::Superset(_)) => unreachable!("rejected above"),
            };
            rhs = rhs.add(branch.mul(p_rhs));
        }
    }
    Ok(OracleResult { lhs, rhs, enumeration_size: terms })
}

/// Exact (TPR, FPR) of the parity-fit distinguisher under the uniform
/// hypercube prior.
pub fn mia_exact_uniform(n: usize, d: usize) -> Result<(Frac, Frac)> {
    if d % 2 != 0 {
        return Err(Error::InvalidParameter("parity needs even d".into()));
    }
    let bits = n * d;
    if bits > 16 {
        return Err(Error::SizeBoundExceeded(format!("n·d = {bits} exceeds 16")));
    }
    let mask = (1u64 << d) - 1;
    let s_weight = Frac::new(1, 1u128 << bits);
    let domain = 1u128 << d;
    let mut tpr = Frac::ZERO;
    let mut fpr = Frac::ZERO;
    for s_code in 0u64..(1u64 << bits) {
        let s_rows: Vec<u64> = (0..n).map(|i| (s_code >> (i * d)) & mask).collect();
        let s = rows_to_matrix(&s_rows, d);
        let h = xor_parity(&s)?;
        let h = h.as_parity()?;
        let mut member_hits = 0u128;
        for &row in &s_rows {
            if crate::attackers::attack_parity_fit(h, &BitVector::from_u64(row, d))?
                == crate::attackers::MiaVerdict::In
            {
                member_hits += 1;
            }
        }
        tpr = tpr.add(s_weight.mul(Frac::new(member_hits, n as u128)));
        let mut fresh_hits = 0u128;
        for x in 0u64..(1u64 << d) {
            if crate::attackers::attack_parity_fit(h, &BitVector::from_u64(x, d))?
                == crate::attackers::MiaVerdict::In
            {
                fresh_hits += 1;
            }
        }
        fpr = fpr.add(s_weight.mul(Frac::new(fresh_hits, domain)));
    }
    Ok((tpr, fpr))
}

/// Exact mutual information I(S; H) in bits for the XOR parity mechanism
/// under the uniform Nature, by enumeration of all datasets. H is a
/// deterministic function of S, so I(S; H) equals the entropy of H.
pub fn mutual_information_xor(n: usize, d: usize) -> Result<f64> {
    if d % 2 != 0 || d > 8 {
        return Err(Error::InvalidParameter("xor mutual information needs even d <= 8".into()));
    }
    let bits = n * d;
    if bits > 12 {
        return Err(Error::SizeBoundExceeded(format!("n·d = {bits} exceeds 12")));
    }
    let mask = (1u64 << d) - 1;
    let half = d / 2;
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for s_code in 0u64..(1u64 << bits) {
        let mut key = 0u64;
        for i in 0..n {
            let row = (s_code >> (i * d)) & mask;
            let mut sig = 0u64;
            for j in 0..half {
                sig |= (((row >> (2 * j)) ^ (row >> (2 * j + 1))) & 1) << j;
            }
            key |= sig << (i * half);
        }
        *counts.entry(key).or_insert(0) += 1;
    }
    let total = (1u64 << bits) as f64;
    let mut entropy = 0.0;
    for &c in counts.values() {
        let q = c as f64 / total;
        entropy -= q * q.log2();
    }
    Ok(entropy)
}

/// Exact joint law of (S, T) as sorted content multisets when S and T are
/// drawn independently from one realized Tardos Nature.
pub fn joint_st_law(params: &TardosParams) -> Result<BTreeMap<(Vec<u64>, Vec<u64>), Frac>> {
    let TardosParams { codebook_size: nn, d, n } = *params;
    let bits = nn * d;
    if bits > 16 {
        return Err(Error::SizeBoundExceeded(format!("N·d = {bits} exceeds 16")));
    }
    let mask = (1u64 << d) - 1;
    let all: Vec<usize> = (0..nn).collect();
    let subset_prob = Frac::new(1, binom(nn, n));
    let mut law: BTreeMap<(Vec<u64>, Vec<u64>), Frac> = BTreeMap::new();
    for c_code in 0u64..(1u64 << bits) {
        let c_rows: Vec<u64> = (0..nn).map(|i| (c_code >> (i * d)) & mask).collect();
        let w = codebook_weight(&c_rows, nn, d);
        let mut content_law: BTreeMap<Vec<u64>, Frac> = BTreeMap::new();
        for combo in combinations(&all, n) {
            let key = sorted_contents(&combo.iter().map(|&i| c_rows[i]).collect::<Vec<_>>());
            let e = content_law.entry(key).or_insert(Frac::ZERO);
            *e = e.add(subset_prob);
        }
        for (s_key, s_p) in &content_law {
            for (t_key, t_p) in &content_law {
                let e = law.entry((s_key.clone(), t_key.clone())).or_insert(Frac::ZERO);
                *e = e.add(w.mul(s_p.mul(*t_p)));
            }
        }
    }
    Ok(law)
}

/// Side-information key for the revealed-rows conditional law: the revealed
/// codebook indices with their contents, in draw order.
pub type RevealKey = (Vec<usize>, Vec<u64>);

/// Exact conditional law of T (as sorted contents) given each realized
/// revealed-rows side information value, under index-level conditioning.
pub fn t_law_given_revealed(
    params: &TardosParams,
    m: usize,
) -> Result<BTreeMap<RevealKey, BTreeMap<Vec<u64>, Frac>>> {
    let TardosParams { codebook_size: nn, d, n } = *params;
    let bits = nn * d;
    if bits > 16 {
        return Err(Error::SizeBoundExceeded(format!("N·d = {bits} exceeds 16")));
    }
    if m > n {
        return Err(Error::InvalidParameter("cannot reveal more than n rows".into()));
    }
    let mask = (1u64 << d) - 1;
    let arrangement_prob = Frac::new(1, perm(nn, n));
    let mut joint: BTreeMap<RevealKey, BTreeMap<Vec<u64>, Frac>> = BTreeMap::new();
    let mut margin: BTreeMap<RevealKey, Frac> = BTreeMap::new();
    for c_code in 0u64..(1u64 << bits) {
        let c_rows: Vec<u64> = (0..nn).map(|i| (c_code >> (i * d)) & mask).collect();
        let w = codebook_weight(&c_rows, nn, d).mul(arrangement_prob);
        for i_s in arrangements(nn, n) {
            let key: RevealKey = (
                i_s[..m].to_vec(),
                i_s[..m].iter().map(|&i| c_rows[i]).collect(),
            );
            let e = margin.entry(key.clone()).or_insert(Frac::ZERO);
            *e = e.add(w);
            let remaining: Vec<usize> = (0..nn).filter(|i| !i_s[..m].contains(i)).collect();
            let t_prob = Frac::new(1, binom(remaining.len(), n - m));
            for combo in combinations(&remaining, n - m) {
                let mut rows: Vec<u64> = i_s[..m].iter().map(|&i| c_rows[i]).collect();
                rows.extend(combo.iter().map(|&i| c_rows[i]));
                let t_key = sorted_contents(&rows);
                let e = joint
                    .entry(key.clone())
                    .or_default()
                    .entry(t_key)
                    .or_insert(Frac::ZERO);
                *e = e.add(w.mul(t_prob));
            }
        }
    }
    let mut out = BTreeMap::new();
    for (key, t_map) in joint {
        let z = margin[&key];
        let mut cond = BTreeMap::new();
        for (t_key, p) in t_map {
            cond.insert(t_key, p.div(z));
        }
        out.insert(key, cond);
    }
    Ok(out)
}

/// Exact conditional law Pr[v = z | S' = Ŝ] for the held-out-row experiment
/// under the Tardos prior: S is an n-subset of the codebook, v a uniform row
/// of S, S' the remaining rows (as a sorted content multiset).
pub fn surprisal_conditional_law(
    params: &TardosParams,
) -> Result<BTreeMap<(Vec<u64>, u64), Frac>> {
    let TardosParams { codebook_size: nn, d, n } = *params;
    let bits = nn * d;
    if bits > 16 {
        return Err(Error::SizeBoundExceeded(format!("N·d = {bits} exceeds 16")));
    }
    let mask = (1u64 << d) - 1;
    let all: Vec<usize> = (0..nn).collect();
    let pick = Frac::new(1, binom(nn, n) * n as u128);
    let mut joint: BTreeMap<(Vec<u64>, u64), Frac> = BTreeMap::new();
    let mut margin: BTreeMap<Vec<u64>, Frac> = BTreeMap::new();
    for c_code in 0u64..(1u64 << bits) {
        let c_rows: Vec<u64> = (0..nn).map(|i| (c_code >> (i * d)) & mask).collect();
        let w = codebook_weight(&c_rows, nn, d);
        for combo in combinations(&all, n) {
            for (v_pos, &v_idx) in combo.iter().enumerate() {
                let z = c_rows[v_idx];
                let rest: Vec<u64> = combo
                    .iter()
                    .enumerate()
                    .filter(|(p, _)| *p != v_pos)
                    .map(|(_, &i)| c_rows[i])
                    .collect();
                let s_key = sorted_contents(&rest);
                let p = w.mul(pick);
                let e = joint.entry((s_key.clone(), z)).or_insert(Frac::ZERO);
                *e = e.add(p);
                let e = margin.entry(s_key).or_insert(Frac::ZERO);
                *e = e.add(p);
            }
        }
    }
    let mut out = BTreeMap::new();
    for ((s_key, z), p) in joint {
        let cond = p.div(margin[&s_key]);
        out.insert((s_key, z), cond);
    }
    Ok(out)
}

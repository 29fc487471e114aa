//! Reconstruction-success predicates: the Hamming family, exact membership,
//! and targeted per-row predicates lifted to datasets by existential
//! quantification over rows.

use crate::bits::{BitMatrix, BitVector};
use crate::error::{Error, Result};

/// An exact nonnegative rational in [0, 1], used for relation thresholds so
/// that `Ham(x,z) <= gamma·d` is decided without floating-point edge cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidParameter("ratio denominator must be nonzero".into()));
        }
        if num > den {
            return Err(Error::InvalidParameter(format!(
                "ratio {num}/{den} exceeds 1"
            )));
        }
        Ok(Ratio { num, den })
    }

    pub const ZERO: Ratio = Ratio { num: 0, den: 1 };
    pub const ONE: Ratio = Ratio { num: 1, den: 1 };

    /// Parse "a/b" or a plain decimal such as "0.04"; both forms are exact.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if let Some((a, b)) = text.split_once('/') {
            let num: u64 = a.trim().parse().map_err(|_| bad_ratio(text))?;
            let den: u64 = b.trim().parse().map_err(|_| bad_ratio(text))?;
            return Ratio::new(num, den);
        }
        if let Some((int, frac)) = text.split_once('.') {
            let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad_ratio(text))? };
            if frac.len() > 18 || frac.chars().any(|c| !c.is_ascii_digit()) {
                return Err(bad_ratio(text));
            }
            let den = 10u64.pow(frac.len() as u32);
            let fnum: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad_ratio(text))? };
            return Ratio::new(int * den + fnum, den);
        }
        let num: u64 = text.parse().map_err(|_| bad_ratio(text))?;
        Ratio::new(num, 1)
    }

    /// Nearest representable ratio at denominator 2^32, rounded up so a
    /// derived relaxed threshold never tightens. Values above 1 clamp to 1.
    pub fn from_f64_ceil(x: f64) -> Result<Self> {
        if !x.is_finite() || x < 0.0 {
            return Err(Error::InvalidParameter(format!("ratio out of range: {x}")));
        }
        if x >= 1.0 {
            return Ok(Ratio::ONE);
        }
        let den: u64 = 1 << 32;
        let num = (x * den as f64).ceil() as u64;
        Ratio::new(num.min(den), den)
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Exact test of `value <= self · d`.
    pub fn at_least(&self, value: u64, d: u64) -> bool {
        (value as u128) * (self.den as u128) <= (self.num as u128) * (d as u128)
    }

    /// Exact comparison of two ratios.
    pub fn le(&self, other: &Ratio) -> bool {
        (self.num as u128) * (other.den as u128) <= (other.num as u128) * (self.den as u128)
    }
}

fn bad_ratio(text: &str) -> Error {
    Error::Config(format!("cannot parse ratio from {text:?}"))
}

/// Targeted per-row predicates beyond the Hamming family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CustomPredicate {
    /// R(x, z) = 1 iff x and z agree on their first `bits` coordinates.
    PrefixMatch { bits: usize },
}

/// A reconstruction relation R(S, z), lifted from a per-row predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelationSpec {
    /// ∃x ∈ S with Ham(x, z) <= gamma·d.
    HammingFrac(Ratio),
    /// ∃x ∈ S with x = z (the gamma = 0 case).
    ExactMembership,
    /// ∃x ∈ S with the named per-row predicate.
    TargetedCustom(CustomPredicate),
}

impl RelationSpec {
    fn row_holds(&self, x: &BitVector, z: &BitVector) -> Result<bool> {
        match self {
            RelationSpec::HammingFrac(gamma) => {
                let ham = x.hamming(z)? as u64;
                Ok(gamma.at_least(ham, x.len() as u64))
            }
            RelationSpec::ExactMembership => {
                if x.len() != z.len() {
                    return Err(Error::DimensionMismatch { expected: x.len(), got: z.len() });
                }
                Ok(x == z)
            }
            RelationSpec::TargetedCustom(CustomPredicate::PrefixMatch { bits }) => {
                if x.len() != z.len() {
                    return Err(Error::DimensionMismatch { expected: x.len(), got: z.len() });
                }
                if *bits > x.len() {
                    return Err(Error::InvalidParameter("prefix longer than the row".into()));
                }
                Ok((0..*bits).all(|j| x.get(j) == z.get(j)))
            }
        }
    }

    /// True iff some row of S satisfies the per-row predicate against z.
    pub fn holds(&self, s: &BitMatrix, z: &BitVector) -> Result<bool> {
        Ok(self.witness(s, z)?.is_some())
    }

    /// Lowest row index satisfying the per-row predicate, if any. The index
    /// is deterministic so the surprisal gate always conditions on the same
    /// row; it is not invariant under row permutation (holds is).
    pub fn witness(&self, s: &BitMatrix, z: &BitVector) -> Result<Option<usize>> {
        for (i, row) in s.rows().iter().enumerate() {
            if self.row_holds(row, z)? {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    pub fn name(&self) -> String {
        match self {
            RelationSpec::HammingFrac(g) => format!("hamming({}/{})", g.num, g.den),
            RelationSpec::ExactMembership => "membership".into(),
            RelationSpec::TargetedCustom(CustomPredicate::PrefixMatch { bits }) => {
                format!("prefix({bits})")
            }
        }
    }
}

/// A relation pair for the bi-criteria games: the LHS relation applied to S
/// and a relaxed RHS relation applied to the fresh dataset T.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BiRelationSpec {
    pub lhs: RelationSpec,
    pub rhs: RelationSpec,
}

impl BiRelationSpec {
    pub fn new(lhs: RelationSpec, rhs: RelationSpec) -> Result<Self> {
        if let (RelationSpec::HammingFrac(g), RelationSpec::HammingFrac(gh)) = (&lhs, &rhs) {
            if !g.le(gh) {
                return Err(Error::InvalidParameter(
                    "bi-criteria requires gamma_hat >= gamma".into(),
                ));
            }
        }
        Ok(BiRelationSpec { lhs, rhs })
    }

    /// The Hamming pair with gamma_hat = (1 + Delta)·gamma for
    /// Delta = c_delta · sqrt(ln(d/delta)/n). The realized gamma_hat is a
    /// dyadic rational rounded up; callers should record it.
    pub fn hamming_pair(gamma: Ratio, c_delta: f64, n: usize, d: usize, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter("delta must lie in (0,1)".into()));
        }
        let big_delta = c_delta * ((d as f64 / delta).ln() / n as f64).sqrt();
        let gamma_hat = Ratio::from_f64_ceil((1.0 + big_delta) * gamma.as_f64())?;
        BiRelationSpec::new(
            RelationSpec::HammingFrac(gamma),
            RelationSpec::HammingFrac(gamma_hat),
        )
    }

    pub fn gamma_hat(&self) -> Option<Ratio> {
        match self.rhs {
            RelationSpec::HammingFrac(g) => Some(g),
            _ => None,
        }
    }
}

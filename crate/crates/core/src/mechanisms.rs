//! The releases under study: exact average, Laplace-noised average, XOR
//! parity compression, and the bot mechanism, plus the DP density-ratio
//! checker and the marginals accuracy meter.

use crate::bits::{BitMatrix, BitVector, RealVector};
use crate::error::{Error, Result};
use crate::rng::TrialRng;

/// Tagged output of a mechanism.
#[derive(Debug, Clone, PartialEq)]
pub enum Release {
    /// A real vector of length d (exact or noised average). Noised outputs
    /// may leave [0,1]; they are deliberately not clamped.
    Real(RealVector),
    /// An n×(d/2) parity matrix.
    Parity(BitMatrix),
    /// The information-free release.
    Bot,
}

impl Release {
    pub fn as_real(&self) -> Result<&RealVector> {
        match self {
            Release::Real(v) => Ok(v),
            _ => Err(Error::IncompatibleSpec("expected a real-vector release".into())),
        }
    }

    pub fn as_parity(&self) -> Result<&BitMatrix> {
        match self {
            Release::Parity(h) => Ok(h),
            _ => Err(Error::IncompatibleSpec("expected a parity release".into())),
        }
    }
}

/// Laplace noise calibration for the noisy average: per-coordinate privacy
/// rate eps_hat over n rows gives scale 1/(eps_hat·n).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    pub eps_hat: f64,
    pub n: usize,
}

impl NoiseParams {
    pub fn new(eps_hat: f64, n: usize) -> Result<Self> {
        if !(eps_hat > 0.0) || !eps_hat.is_finite() {
            return Err(Error::InvalidParameter("eps_hat must be positive".into()));
        }
        if n < 1 {
            return Err(Error::InvalidParameter("noise params require n >= 1".into()));
        }
        Ok(NoiseParams { eps_hat, n })
    }

    pub fn scale(&self) -> f64 {
        1.0 / (self.eps_hat * self.n as f64)
    }
}

/// The mechanism that returns the exact column averages.
pub fn exact_average(s: &BitMatrix) -> Result<Release> {
    Ok(Release::Real(s.average()?))
}

/// Exact average plus independent Laplace(1/(eps_hat·n)) noise per
/// coordinate. Output is not clamped to [0,1].
pub fn noisy_average(s: &BitMatrix, noise: &NoiseParams, rng: &mut TrialRng) -> Result<Release> {
    if noise.n != s.n() {
        return Err(Error::InvalidParameter(format!(
            "noise params sized for n={} but dataset has n={}",
            noise.n,
            s.n()
        )));
    }
    let avg = s.average()?;
    let b = noise.scale();
    let noised: Vec<f64> = avg.values().iter().map(|&v| v + rng.laplace(b)).collect();
    Ok(Release::Real(RealVector::new(noised)?))
}

/// Per-row XOR of adjacent column pairs: H[i,j] = S[i,2j-1] xor S[i,2j]
/// (1-based pairing). Requires even d; the output has d/2 columns.
pub fn xor_parity(s: &BitMatrix) -> Result<Release> {
    let d = s.d();
    if d % 2 != 0 {
        return Err(Error::DimensionMismatch { expected: d + 1, got: d });
    }
    let half = d / 2;
    let rows: Vec<BitVector> = s
        .rows()
        .iter()
        .map(|r| {
            let mut h = BitVector::zeros(half);
            for j in 0..half {
                h.set(j, r.get(2 * j) ^ r.get(2 * j + 1));
            }
            h
        })
        .collect();
    Ok(Release::Parity(BitMatrix::from_rows(rows, half)?))
}

/// Pair-XOR signature of a single row; what [`xor_parity`] emits per row.
pub fn parity_signature(x: &BitVector) -> Result<BitVector> {
    if x.len() % 2 != 0 {
        return Err(Error::DimensionMismatch { expected: x.len() + 1, got: x.len() });
    }
    let half = x.len() / 2;
    let mut h = BitVector::zeros(half);
    for j in 0..half {
        h.set(j, x.get(2 * j) ^ x.get(2 * j + 1));
    }
    Ok(h)
}

/// Ignores the dataset and releases nothing.
pub fn bot(_s: &BitMatrix) -> Release {
    Release::Bot
}

/// Natural-log density ratio of the noisy-average mechanism at output y
/// under inputs S versus S'. For neighboring datasets (at most one differing
/// row) the value is bounded by eps_hat·d in absolute value.
pub fn dp_log_density_ratio(
    y: &RealVector,
    s: &BitMatrix,
    s_prime: &BitMatrix,
    noise: &NoiseParams,
) -> Result<f64> {
    if s.n() != s_prime.n() || s.d() != s_prime.d() {
        return Err(Error::IncompatibleSpec("neighboring datasets must share shape".into()));
    }
    if y.len() != s.d() {
        return Err(Error::DimensionMismatch { expected: s.d(), got: y.len() });
    }
    let differing = s
        .rows()
        .iter()
        .zip(s_prime.rows())
        .filter(|(a, b)| a != b)
        .count();
    if differing > 1 {
        return Err(Error::IncompatibleSpec(format!(
            "datasets differ in {differing} rows; neighbors differ in at most one"
        )));
    }
    if noise.n != s.n() {
        return Err(Error::InvalidParameter("noise params sized for a different n".into()));
    }
    let mu = s.average()?;
    let mu_p = s_prime.average()?;
    let b = noise.scale();
    let mut log_ratio = 0.0;
    for j in 0..y.len() {
        let yj = y.values()[j];
        log_ratio += ((yj - mu_p.values()[j]).abs() - (yj - mu.values()[j]).abs()) / b;
    }
    Ok(log_ratio)
}

/// ℓ∞ distance between a real release and the exact average of S.
pub fn marginal_error(y: &Release, s: &BitMatrix) -> Result<f64> {
    let y = y.as_real()?;
    let avg = s.average()?;
    if y.len() != avg.len() {
        return Err(Error::DimensionMismatch { expected: avg.len(), got: y.len() });
    }
    Ok(y
        .values()
        .iter()
        .zip(avg.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Mechanism selection as configured in a game spec.
#[derive(Debug, Clone, PartialEq)]
pub enum MechanismSpec {
    ExactAverage,
    NoisyAverage { eps_hat: f64 },
    XorParity,
    Bot,
}

impl MechanismSpec {
    pub fn apply(&self, s: &BitMatrix, rng: &mut TrialRng) -> Result<Release> {
        match self {
            MechanismSpec::ExactAverage => exact_average(s),
            MechanismSpec::NoisyAverage { eps_hat } => {
                let noise = NoiseParams::new(*eps_hat, s.n())?;
                noisy_average(s, &noise, rng)
            }
            MechanismSpec::XorParity => xor_parity(s),
            MechanismSpec::Bot => Ok(bot(s)),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MechanismSpec::ExactAverage => "exact-average",
            MechanismSpec::NoisyAverage { .. } => "noisy-average",
            MechanismSpec::XorParity => "xor-parity",
            MechanismSpec::Bot => "bot",
        }
    }
}

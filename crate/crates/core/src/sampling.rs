//! Seeded samplers: Haar unitaries and orthogonals, purity-constrained
//! spectra, real states and random real unital channels.
//!
//! Every sampler draws from a [`SampleRng`], a ChaCha8 stream keyed by the
//! seed and selected by a 64-bit stream id. Gaussians use Box-Muller on two
//! consecutive words, so a given stream position always yields the same
//! variates.

use nalgebra::DMatrix;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{ComplexSquareMatrix, OrthogonalMatrix, UnitaryMatrix, C64};
use crate::measures::RealUnitalChannel;
use crate::state::{check_purity, DensityMatrix, PureStateVector};

/// Identifies one reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// A child stream, disjoint from its parent and from siblings with
    /// other `tag`s.
    pub fn fork(&self, tag: u64) -> Self {
        Self { seed: self.seed, stream: splitmix64(self.stream ^ splitmix64(tag.wrapping_add(1))) }
    }

    pub fn rng(&self) -> SampleRng {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(self.stream);
        SampleRng { inner, spare: None }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stateful generator for one stream.
#[derive(Debug, Clone)]
pub struct SampleRng {
    inner: ChaCha8Rng,
    spare: Option<f64>,
}

impl SampleRng {
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on the open interval (0, 1).
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }

    /// Standard normal via Box-Muller.
    pub fn gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let r = (-2.0 * self.uniform().ln()).sqrt();
        let theta = std::f64::consts::TAU * self.uniform();
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }

    /// Exponential with unit mean.
    pub fn exponential(&mut self) -> f64 {
        -self.uniform().ln()
    }
}

/// Haar-distributed unitary: Gaussian matrix, QR, then each column of Q
/// multiplied by the phase of the matching diagonal entry of R.
pub fn haar_unitary(d: usize, rng: &mut SampleRng) -> Result<UnitaryMatrix> {
    if d == 0 {
        return Err(Error::DimensionTooSmall { dim: 0, min: 1 });
    }
    let z = DMatrix::<C64>::from_fn(d, d, |_, _| {
        let re = rng.gaussian();
        let im = rng.gaussian();
        C64::new(re, im)
    });
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        let rjj = r[(j, j)];
        let n = rjj.norm();
        let phase = if n > 0.0 { rjj / n } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    Ok(UnitaryMatrix::new_unchecked(ComplexSquareMatrix::from_inner(q)))
}

/// Haar-distributed real orthogonal matrix (QR with sign correction).
pub fn haar_orthogonal(d: usize, rng: &mut SampleRng) -> Result<OrthogonalMatrix> {
    Ok(OrthogonalMatrix::from_real_unchecked(&haar_orthogonal_real(d, rng)?))
}

pub(crate) fn haar_orthogonal_real(d: usize, rng: &mut SampleRng) -> Result<DMatrix<f64>> {
    if d == 0 {
        return Err(Error::DimensionTooSmall { dim: 0, min: 1 });
    }
    let z = DMatrix::<f64>::from_fn(d, d, |_, _| rng.gaussian());
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    Ok(q)
}

/// Eigenvalue vector with a declared purity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    lambdas: Vec<f64>,
    purity: f64,
}

impl Spectrum {
    pub fn new(lambdas: Vec<f64>, purity: f64) -> Result<Self> {
        if lambdas.iter().any(|&l| l < -1e-12 || !l.is_finite()) {
            return Err(Error::InvalidArgument("spectrum has a negative or non-finite entry".into()));
        }
        let sum: f64 = lambdas.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("spectrum sums to {sum}")));
        }
        let p: f64 = lambdas.iter().map(|l| l * l).sum();
        if (p - purity).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!("spectrum purity {p} differs from declared {purity}")));
        }
        Ok(Self { lambdas, purity })
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn purity(&self) -> f64 {
        self.purity
    }

    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }
}

/// How the eigenvalues of a fixed-purity real state are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumMode {
    TwoLevel,
    Random,
}

/// `(a, b, ..., b)` with `a + (d-1) b = 1`, `a^2 + (d-1) b^2 = P`, `a >= b`.
pub fn spectrum_two_level(d: usize, p: f64) -> Result<Spectrum> {
    check_purity(d, p)?;
    if d == 1 {
        return Spectrum::new(vec![1.0], p);
    }
    let df = d as f64;
    let disc = ((df - 1.0) * (df * p - 1.0)).max(0.0);
    let a = (1.0 + disc.sqrt()) / df;
    let b = ((1.0 - a) / (df - 1.0)).max(0.0);
    let mut lambdas = vec![b; d];
    lambdas[0] = a;
    Spectrum::new(lambdas, p)
}

const SPECTRUM_ATTEMPTS: usize = 10_000;

/// Random spectrum of purity `P`: a flat-simplex draw pushed radially away
/// from the uniform spectrum until the purity matches. Coordinates that go
/// negative are fixed at zero and the push is repeated on the remaining
/// support, around the uniform spectrum of that support. Each repetition
/// shrinks the support, so the loop ends within `d` steps; a draw whose
/// support becomes too small for `P` is discarded.
pub fn spectrum_random_at_purity(d: usize, p: f64, rng: &mut SampleRng) -> Result<Spectrum> {
    check_purity(d, p)?;
    let u = 1.0 / d as f64;
    if d == 1 || p <= u {
        return Spectrum::new(vec![u; d], p.max(u));
    }
    if p >= 1.0 - 1e-12 {
        let mut lambdas = vec![0.0; d];
        lambdas[rng.index(d)] = 1.0;
        return Spectrum::new(lambdas, p);
    }
    for _ in 0..SPECTRUM_ATTEMPTS {
        let mut point: Vec<f64> = (0..d).map(|_| rng.exponential()).collect();
        let total: f64 = point.iter().sum();
        point.iter_mut().for_each(|x| *x /= total);
        let mut support = vec![true; d];

        for _ in 0..d {
            let size = support.iter().filter(|&&s| s).count();
            let us = 1.0 / size as f64;
            if p < us {
                break;
            }
            let spread: f64 =
                point.iter().zip(&support).filter(|(_, &s)| s).map(|(x, _)| (x - us) * (x - us)).sum();
            if spread < 1e-300 {
                break;
            }
            let t = ((p - us) / spread).sqrt();
            let candidate: Vec<f64> =
                point.iter().zip(&support).map(|(x, &s)| if s { us + t * (x - us) } else { 0.0 }).collect();
            if candidate.iter().all(|&l| l >= 0.0) {
                // A large push amplifies rounding in the sum; renormalize.
                let sum: f64 = candidate.iter().sum();
                return Spectrum::new(candidate.iter().map(|l| l / sum).collect(), p);
            }
            for (s, &l) in support.iter_mut().zip(&candidate) {
                *s = *s && l > 0.0;
            }
            point = candidate.iter().map(|&l| l.max(0.0)).collect();
            let sum: f64 = point.iter().sum();
            point.iter_mut().for_each(|x| *x /= sum);
        }
    }
    Err(Error::SamplerExhausted { attempts: SPECTRUM_ATTEMPTS })
}

pub fn spectrum(d: usize, p: f64, mode: SpectrumMode, rng: &mut SampleRng) -> Result<Spectrum> {
    match mode {
        SpectrumMode::TwoLevel => spectrum_two_level(d, p),
        SpectrumMode::Random => spectrum_random_at_purity(d, p, rng),
    }
}

/// `O diag(lambda) O^T` with Haar `O`, as a real matrix.
pub(crate) fn real_state_raw(spec: &Spectrum, rng: &mut SampleRng) -> Result<DMatrix<f64>> {
    let d = spec.dim();
    let o = haar_orthogonal_real(d, rng)?;
    let mut scaled = o.clone();
    for (j, &l) in spec.lambdas().iter().enumerate() {
        scaled.column_mut(j).scale_mut(l);
    }
    Ok(scaled * o.transpose())
}

/// Real density matrix of purity `P`, orthogonally invariant in law.
/// At `P = 1/d` the only such state is `I/d`, returned exactly.
pub fn real_state_at_purity(d: usize, p: f64, rng: &mut SampleRng, mode: SpectrumMode) -> Result<DensityMatrix> {
    check_purity(d, p)?;
    if is_maximally_mixed_purity(d, p) {
        return Ok(DensityMatrix::maximally_mixed(d));
    }
    let spec = spectrum(d, p, mode, rng)?;
    let rho = real_state_raw(&spec, rng)?;
    Ok(DensityMatrix::new_unchecked(ComplexSquareMatrix::from_inner(rho.map(|x| C64::new(x, 0.0)))))
}

pub(crate) fn is_maximally_mixed_purity(d: usize, p: f64) -> bool {
    p * d as f64 - 1.0 <= 1e-14
}

/// Uniform point on the real unit sphere.
pub fn real_pure_state(d: usize, rng: &mut SampleRng) -> Result<PureStateVector> {
    if d == 0 {
        return Err(Error::DimensionTooSmall { dim: 0, min: 1 });
    }
    let v: Vec<f64> = (0..d).map(|_| rng.gaussian()).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(PureStateVector::new_unchecked(v.iter().map(|x| C64::new(x / n, 0.0)).collect()))
}

/// `k` Haar-orthogonal Kraus terms with flat-Dirichlet weights.
pub fn random_real_unital_channel(d: usize, k: usize, rng: &mut SampleRng) -> Result<RealUnitalChannel> {
    if k == 0 {
        return Err(Error::InvalidChannel { reason: "term count must be at least 1".into() });
    }
    let raw: Vec<f64> = (0..k).map(|_| rng.exponential()).collect();
    let total: f64 = raw.iter().sum();
    let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    // Put the rounding residue on the largest weight so the sum is 1 to the ulp.
    let residue = 1.0 - weights.iter().sum::<f64>();
    let imax = (0..k).fold(0, |m, i| if weights[i] > weights[m] { i } else { m });
    weights[imax] += residue;
    let terms = weights
        .into_iter()
        .map(|w| Ok((w, haar_orthogonal(d, rng)?)))
        .collect::<Result<Vec<_>>>()?;
    RealUnitalChannel::new(terms)
}

//! Monte Carlo estimators checking the closed forms.
//!
//! Work is split across `streams` workers. Worker `w` owns the stream
//! `RngStream(seed, stream).fork(w)` and draws a fixed share of the
//! samples; shares are concatenated in worker order before any reduction.
//! Results therefore depend on `(seed, stream, streams)` only.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::igp::{igp_at_purity, normalized_from_trace_sq, trace_sq};
use crate::matrix::{UnitaryMatrix, C64};
use crate::measures::imaginarity_raw;
use crate::sampling::{
    haar_orthogonal_real, haar_unitary, is_maximally_mixed_purity, real_state_raw, spectrum, RngStream, SampleRng,
    SpectrumMode,
};
use crate::state::check_purity;
use crate::stats::{bootstrap_variance, mean_stderr, sample_variance, two_sample_z, z_score};

pub const BOOTSTRAP_RESAMPLES: usize = 1000;
pub const BOOTSTRAP_LEVEL: f64 = 0.99;

/// Seed, base stream and worker count for one estimator run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub seed: u64,
    pub stream: u64,
    pub streams: usize,
}

impl McConfig {
    pub fn new(seed: u64, streams: usize) -> Self {
        Self { seed, stream: 0, streams: streams.max(1) }
    }

    /// Independent configuration for a sub-run (a grid point, a second
    /// sampler) with the same seed and worker count.
    pub fn fork(&self, tag: u64) -> Self {
        Self { stream: RngStream::new(self.seed, self.stream).fork(tag).stream, ..*self }
    }

    fn worker_stream(&self, worker: usize) -> RngStream {
        RngStream::new(self.seed, self.stream).fork(worker as u64)
    }

    /// Dedicated stream outside the worker range, for resampling.
    fn aux_stream(&self) -> RngStream {
        RngStream::new(self.seed, self.stream).fork(u64::MAX)
    }

    /// Generator for draws made outside the workers (test unitaries, index
    /// tuples), disjoint from every worker and resampling stream.
    pub fn aux_rng(&self, tag: u64) -> SampleRng {
        self.aux_stream().fork(tag).rng()
    }

    /// Draw `n` samples of `f`, in worker order.
    pub fn collect<T, F>(&self, n: usize, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&mut SampleRng) -> Result<T> + Sync,
    {
        let workers = self.streams.max(1);
        let shares: Vec<Result<Vec<T>>> = (0..workers)
            .into_par_iter()
            .map(|w| {
                let count = n / workers + usize::from(w < n % workers);
                let mut rng = self.worker_stream(w).rng();
                (0..count).map(|_| f(&mut rng)).collect()
            })
            .collect();
        let mut out = Vec::with_capacity(n);
        for share in shares {
            out.extend(share?);
        }
        Ok(out)
    }
}

/// Mean and standard error of a Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
    pub seed: u64,
    pub streams: usize,
}

impl MCEstimate {
    fn from_samples(xs: &[f64], cfg: &McConfig) -> Self {
        let (mean, stderr) = mean_stderr(xs);
        Self { mean, stderr, n: xs.len(), seed: cfg.seed, streams: cfg.streams }
    }

    fn exact_zero(n: usize, cfg: &McConfig) -> Self {
        Self { mean: 0.0, stderr: 0.0, n, seed: cfg.seed, streams: cfg.streams }
    }

    pub fn z(&self, target: f64) -> f64 {
        z_score(self.mean, self.stderr, target)
    }
}

fn require_n(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::InvalidArgument(format!("sample count {n} below the minimum {min}")));
    }
    Ok(())
}

fn require_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::DimensionTooSmall { dim: d, min: 2 });
    }
    Ok(())
}

/// Imaginarity of `U rho U^dag` for a real `rho`.
fn conjugated_imaginarity(u: &DMatrix<C64>, rho: &DMatrix<f64>) -> f64 {
    let rho_c = rho.map(|x| C64::new(x, 0.0));
    let out = u * rho_c * u.adjoint();
    imaginarity_raw(&out)
}

/// Average imaginarity that `U` produces from real states of purity `P`,
/// by direct sampling of the states.
pub fn mc_igp(u: &UnitaryMatrix, p: f64, n: usize, mode: SpectrumMode, cfg: &McConfig) -> Result<MCEstimate> {
    require_n(n, 100)?;
    let d = u.dim();
    require_dim(d)?;
    check_purity(d, p)?;
    if is_maximally_mixed_purity(d, p) {
        // Only I/d has this purity and U (I/d) U^dag = I/d is real.
        return Ok(MCEstimate::exact_zero(n, cfg));
    }
    let um = u.as_inner();
    let xs = cfg.collect(n, |rng| {
        let spec = spectrum(d, p, mode, rng)?;
        let rho = real_state_raw(&spec, rng)?;
        Ok(conjugated_imaginarity(um, &rho))
    })?;
    Ok(MCEstimate::from_samples(&xs, cfg))
}

/// Haar average of the purity-constrained IGP, using the closed form for
/// each sampled unitary.
pub fn mc_haar_mean_igp(d: usize, p: f64, n: usize, cfg: &McConfig) -> Result<MCEstimate> {
    require_n(n, 100)?;
    require_dim(d)?;
    check_purity(d, p)?;
    let xs = cfg.collect(n, |rng| Ok(igp_at_purity(&haar_unitary(d, rng)?, p)?.value))?;
    Ok(MCEstimate::from_samples(&xs, cfg))
}

/// Sample moment `<y^order>` of `y = |Tr(U^dag U*)|^2` over Haar unitaries.
pub fn mc_moment_y(d: usize, order: u32, n: usize, cfg: &McConfig) -> Result<MCEstimate> {
    require_n(n, 1000)?;
    if !(1..=2).contains(&order) {
        return Err(Error::InvalidArgument(format!("moment order {order} not in {{1, 2}}")));
    }
    if d == 0 {
        return Err(Error::DimensionTooSmall { dim: 0, min: 1 });
    }
    let xs = cfg.collect(n, |rng| Ok(trace_sq(&haar_unitary(d, rng)?).powi(order as i32)))?;
    Ok(MCEstimate::from_samples(&xs, cfg))
}

/// Variance of the normalized IGP to the order kept analytically, `4/d^4 + 64/d^6`.
pub fn variance_normalized_analytic(d: usize) -> f64 {
    let df = d as f64;
    4.0 / df.powi(4) + 64.0 / df.powi(6)
}

/// Leading large-`d` value of `<y^2>`, `8 + 64/d^2`.
pub fn second_moment_y_asymptotic(d: usize) -> f64 {
    8.0 + 64.0 / (d as f64).powi(2)
}

/// Exact `<y> = 2d/(d + 1)`.
pub fn first_moment_y(d: usize) -> f64 {
    2.0 * d as f64 / (d as f64 + 1.0)
}

/// Sample variance of the normalized IGP with a percentile-bootstrap CI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    pub variance: f64,
    /// Bootstrap standard deviation of the variance.
    pub stderr: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub level: f64,
    pub n: usize,
    pub seed: u64,
    pub streams: usize,
}

impl VarianceEstimate {
    pub fn contains(&self, x: f64) -> bool {
        self.ci_lo <= x && x <= self.ci_hi
    }
}

pub fn mc_variance_normalized_igp(d: usize, n: usize, cfg: &McConfig) -> Result<VarianceEstimate> {
    require_n(n, 1000)?;
    require_dim(d)?;
    let xs = cfg.collect(n, |rng| Ok(normalized_from_trace_sq(d, trace_sq(&haar_unitary(d, rng)?))))?;
    let variance = sample_variance(&xs);
    let mut boot = cfg.aux_stream().rng();
    let (ci_lo, ci_hi, stderr) = bootstrap_variance(&xs, BOOTSTRAP_RESAMPLES, BOOTSTRAP_LEVEL, &mut boot);
    Ok(VarianceEstimate {
        variance,
        stderr,
        ci_lo,
        ci_hi,
        level: BOOTSTRAP_LEVEL,
        n,
        seed: cfg.seed,
        streams: cfg.streams,
    })
}

/// Empirical probability that the normalized IGP exceeds `1 - 3/d^(2/3)`,
/// next to the concentration lower bound `1 - exp(-d^(2/3)/64)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRecord {
    pub d: usize,
    pub threshold: f64,
    pub fraction_above: f64,
    pub levy_bound: f64,
    pub n: usize,
    pub seed: u64,
}

impl ConcentrationRecord {
    pub fn satisfies_bound(&self) -> bool {
        self.fraction_above >= self.levy_bound
    }
}

pub fn concentration_threshold(d: usize) -> f64 {
    1.0 - 3.0 / (d as f64).powf(2.0 / 3.0)
}

/// Concentration bound with Lipschitz constant `4/sqrt(d)` and deviation
/// `d^(-2/3)`.
pub fn levy_bound(d: usize) -> f64 {
    1.0 - (-(d as f64).powf(2.0 / 3.0) / 64.0).exp()
}

pub fn concentration_probe(d: usize, n: usize, cfg: &McConfig) -> Result<ConcentrationRecord> {
    require_n(n, 1000)?;
    require_dim(d)?;
    let threshold = concentration_threshold(d);
    let xs = cfg.collect(n, |rng| {
        let v = normalized_from_trace_sq(d, trace_sq(&haar_unitary(d, rng)?));
        Ok(if v >= threshold { 1.0 } else { 0.0 })
    })?;
    let hits = xs.iter().filter(|&&x| x > 0.5).count();
    Ok(ConcentrationRecord {
        d,
        threshold,
        fraction_above: hits as f64 / n as f64,
        levy_bound: levy_bound(d),
        n,
        seed: cfg.seed,
    })
}

/// Indices of the orthogonal moment `<O_ki O_km O_pi O_pm>`, 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentIndices {
    pub k: usize,
    pub i: usize,
    pub p: usize,
    pub m: usize,
}

impl MomentIndices {
    pub fn new(k: usize, i: usize, p: usize, m: usize) -> Self {
        Self { k, i, p, m }
    }

    fn check(&self, d: usize) -> Result<()> {
        if [self.k, self.i, self.p, self.m].iter().any(|&x| x >= d) {
            return Err(Error::InvalidArgument(format!("moment indices {self:?} out of range for d = {d}")));
        }
        Ok(())
    }
}

/// Haar average `<O_ki O_km O_pi O_pm>` over the orthogonal group:
/// `c1 (a + b + ab) - c2 (1 + a + b + 3ab)` with `a = [i = m]`, `b = [k = p]`,
/// `c1 = (d+1)/(d(d-1)(d+2))`, `c2 = 1/(d(d-1)(d+2))`.
pub fn orthogonal_fourth_moment_closed(d: usize, idx: MomentIndices) -> Result<f64> {
    require_dim(d)?;
    idx.check(d)?;
    let df = d as f64;
    let denom = df * (df - 1.0) * (df + 2.0);
    let c1 = (df + 1.0) / denom;
    let c2 = 1.0 / denom;
    let a = f64::from(u8::from(idx.i == idx.m));
    let b = f64::from(u8::from(idx.k == idx.p));
    Ok(c1 * (a + b + a * b) - c2 * (1.0 + a + b + 3.0 * a * b))
}

/// Haar-orthogonal average of an arbitrary statistic of `O`.
pub fn mc_orthogonal_statistic<F>(d: usize, n: usize, cfg: &McConfig, f: F) -> Result<MCEstimate>
where
    F: Fn(&DMatrix<f64>) -> f64 + Sync,
{
    require_n(n, 1000)?;
    let xs = cfg.collect(n, |rng| Ok(f(&haar_orthogonal_real(d, rng)?)))?;
    Ok(MCEstimate::from_samples(&xs, cfg))
}

pub fn mc_orthogonal_fourth_moment(d: usize, idx: MomentIndices, n: usize, cfg: &McConfig) -> Result<MCEstimate> {
    Ok(mc_orthogonal_fourth_moments(d, &[idx], n, cfg)?.remove(0))
}

/// Several index tuples evaluated on one shared set of Haar draws. Each
/// estimate is individually valid; estimates are correlated with each other.
pub fn mc_orthogonal_fourth_moments(
    d: usize,
    indices: &[MomentIndices],
    n: usize,
    cfg: &McConfig,
) -> Result<Vec<MCEstimate>> {
    require_dim(d)?;
    require_n(n, 1000)?;
    for idx in indices {
        idx.check(d)?;
    }
    let rows = cfg.collect(n, |rng| {
        let o = haar_orthogonal_real(d, rng)?;
        Ok(indices
            .iter()
            .map(|&MomentIndices { k, i, p, m }| o[(k, i)] * o[(k, m)] * o[(p, i)] * o[(p, m)])
            .collect::<Vec<f64>>())
    })?;
    Ok((0..indices.len())
        .map(|t| {
            let xs: Vec<f64> = rows.iter().map(|r| r[t]).collect();
            MCEstimate::from_samples(&xs, cfg)
        })
        .collect())
}

/// Nested estimates of the purity-constrained IGP under the two spectrum
/// samplers, and the z-statistic of their difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumIndependence {
    pub two_level: MCEstimate,
    pub random: MCEstimate,
    pub z: f64,
}

pub fn spectrum_independence_check(
    u: &UnitaryMatrix,
    p: f64,
    n: usize,
    cfg: &McConfig,
) -> Result<SpectrumIndependence> {
    let d = u.dim();
    check_purity(d, p)?;
    if is_maximally_mixed_purity(d, p) {
        return Err(Error::PurityOutOfRange { purity: p, dim: d });
    }
    let two_level = mc_igp(u, p, n, SpectrumMode::TwoLevel, &cfg.fork(0))?;
    let random = mc_igp(u, p, n, SpectrumMode::Random, &cfg.fork(1))?;
    let z = two_sample_z(two_level.mean, two_level.stderr, random.mean, random.stderr);
    Ok(SpectrumIndependence { two_level, random, z })
}

/// JSON record emitted for every estimator result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorRecord {
    pub op: String,
    pub params: serde_json::Value,
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
    pub seed: u64,
    pub streams: usize,
    pub oracle: Option<f64>,
    pub z: Option<f64>,
}

impl EstimatorRecord {
    pub fn new(op: &str, params: serde_json::Value, est: &MCEstimate, oracle: Option<f64>) -> Self {
        Self {
            op: op.to_string(),
            params,
            mean: est.mean,
            stderr: est.stderr,
            n: est.n,
            seed: est.seed,
            streams: est.streams,
            oracle,
            z: oracle.map(|o| est.z(o)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::igp::{haar_mean_igp, igp_at_purity, make_pauli_z_unitary};
    use crate::sampling::haar_orthogonal;

    fn cfg(seed: u64) -> McConfig {
        McConfig::new(seed, 3)
    }

    #[test]
    fn split_is_deterministic_and_complete() {
        let c = cfg(1);
        let a = c.collect(1001, |r| Ok(r.uniform())).unwrap();
        let b = c.collect(1001, |r| Ok(r.uniform())).unwrap();
        assert_eq!(a.len(), 1001);
        assert_eq!(a, b);
        let other = McConfig::new(1, 4).collect(1001, |r| Ok(r.uniform())).unwrap();
        assert_ne!(a, other);
        assert_ne!(c.fork(0), c.fork(1));
    }

    #[test]
    fn mc_igp_orthogonal_and_mixed_are_exact_zero() {
        let mut rng = RngStream::new(3, 0).rng();
        let o = haar_orthogonal(4, &mut rng).unwrap().to_unitary();
        let e = mc_igp(&o, 0.6, 500, SpectrumMode::Random, &cfg(2)).unwrap();
        assert_eq!((e.mean, e.stderr), (0.0, 0.0));
        let s = make_pauli_z_unitary(2, 1).unwrap().unitary;
        let e = mc_igp(&s, 0.5, 500, SpectrumMode::TwoLevel, &cfg(2)).unwrap();
        assert_eq!((e.mean, e.stderr), (0.0, 0.0));
    }

    #[test]
    fn mc_igp_matches_closed_form() {
        let s = make_pauli_z_unitary(2, 1).unwrap().unitary;
        let e = mc_igp(&s, 1.0, 100_000, SpectrumMode::TwoLevel, &cfg(5)).unwrap();
        assert!(e.z(0.25).abs() <= 3.0, "z = {}", e.z(0.25));

        let mut rng = RngStream::new(9, 9).rng();
        let u = haar_unitary(3, &mut rng).unwrap();
        let target = igp_at_purity(&u, 0.7).unwrap().value;
        let e = mc_igp(&u, 0.7, 50_000, SpectrumMode::Random, &cfg(6)).unwrap();
        assert!(e.z(target).abs() <= 3.0, "z = {}", e.z(target));
    }

    #[test]
    fn haar_mean_examples() {
        let e = mc_haar_mean_igp(2, 1.0, 100_000, &cfg(7)).unwrap();
        assert!(e.z(1.0 / 6.0).abs() <= 3.0, "z = {}", e.z(1.0 / 6.0));
        let e = mc_haar_mean_igp(8, 0.5, 100_000, &cfg(8)).unwrap();
        let target = haar_mean_igp(8, 0.5).unwrap().value;
        assert!((target - 1.0 / 6.0).abs() < 1e-15);
        assert!(e.z(target).abs() <= 3.0, "z = {}", e.z(target));
        let e = mc_haar_mean_igp(4, 0.25, 200, &cfg(8)).unwrap();
        assert_eq!((e.mean, e.stderr), (0.0, 0.0));
    }

    #[test]
    fn first_moment_examples() {
        let e = mc_moment_y(2, 1, 100_000, &cfg(10)).unwrap();
        assert!(e.z(4.0 / 3.0).abs() <= 3.0, "z = {}", e.z(4.0 / 3.0));
        assert!((first_moment_y(64) - 1.969_230_769).abs() < 1e-9);
    }

    #[test]
    fn fourth_moment_closed_special_cases() {
        let d = 3;
        let all_same = orthogonal_fourth_moment_closed(d, MomentIndices::new(0, 0, 0, 0)).unwrap();
        assert!((all_same - 0.2).abs() < 1e-15);
        let split = orthogonal_fourth_moment_closed(d, MomentIndices::new(0, 0, 0, 1)).unwrap();
        assert!((split - 1.0 / 15.0).abs() < 1e-15);
        let distinct = orthogonal_fourth_moment_closed(4, MomentIndices::new(0, 1, 2, 3)).unwrap();
        assert!((distinct + 1.0 / (4.0 * 3.0 * 6.0)).abs() < 1e-15);
        assert!(orthogonal_fourth_moment_closed(1, MomentIndices::new(0, 0, 0, 0)).is_err());
        assert!(orthogonal_fourth_moment_closed(3, MomentIndices::new(0, 0, 0, 3)).is_err());
    }

    #[test]
    fn fourth_moment_mc() {
        let idx = MomentIndices::new(0, 0, 0, 0);
        let e = mc_orthogonal_fourth_moment(3, idx, 100_000, &cfg(11)).unwrap();
        assert!(e.z(0.2).abs() <= 3.0, "z = {}", e.z(0.2));
        let odd = mc_orthogonal_statistic(3, 100_000, &cfg(12), |o| o[(0, 0)] * o[(0, 1)]).unwrap();
        assert!(odd.z(0.0).abs() <= 3.0);
    }

    #[test]
    fn variance_and_concentration_sanity() {
        let v = mc_variance_normalized_igp(8, 2000, &cfg(13)).unwrap();
        assert!(v.variance > 0.0 && v.ci_lo <= v.variance && v.variance <= v.ci_hi);
        let r = concentration_probe(8, 2000, &cfg(14)).unwrap();
        assert!((0.0..=1.0).contains(&r.fraction_above));
        assert!((concentration_threshold(64) - 0.8125).abs() < 1e-12);
        assert!((variance_normalized_analytic(20) - 2.6e-5).abs() < 1e-7);
    }

    #[test]
    fn rejects_small_n_and_bad_order() {
        assert!(mc_moment_y(4, 1, 10, &cfg(1)).is_err());
        assert!(mc_moment_y(4, 3, 2000, &cfg(1)).is_err());
        assert!(mc_haar_mean_igp(4, 0.1, 1000, &cfg(1)).is_err());
    }

    #[test]
    fn record_carries_z() {
        let est = MCEstimate { mean: 1.1, stderr: 0.05, n: 100, seed: 4, streams: 2 };
        let r = EstimatorRecord::new("x", serde_json::json!({"d": 2}), &est, Some(1.0));
        assert!((r.z.unwrap() - 2.0).abs() < 1e-12);
        let text = serde_json::to_string(&r).unwrap();
        for key in ["op", "params", "mean", "stderr", "n", "seed", "streams", "oracle", "z"] {
            assert!(text.contains(&format!("\"{key}\"")));
        }
    }
}

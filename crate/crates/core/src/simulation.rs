//! Exact power curves and seeded Monte Carlo experiments: power against `n`,
//! type I error against `theta0`, exact two-sided power, and confidence
//! interval width and coverage.

use std::io;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::distributions::{laplace_sample, PmfVector, PrivacyParams};
use crate::error::{check_open_probability, check_probability, Error, Result};
use crate::intervals::{ci_approx_umpu, ci_bonferroni, ci_umau, IntervalResult};
use crate::one_sided::{pvalue_from_pmf, test_vector_one_sided, Side, TestVector};
use crate::two_sided::{approx_test_vector, bonferroni_test_vector, umpu_test_vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// DP-UMP test of `H0: theta <= theta0`.
    UmpLeft,
    /// DP-UMP test of `H0: theta >= theta0`.
    UmpRight,
    Umpu,
    ApproxUmpu,
    Bonferroni,
    /// Laplace release with a normal approximation to its null law.
    BaselineNormal,
    /// Classical randomized test: Tulap noise with `epsilon = infinity`.
    NonPrivate,
    /// Confidence interval from the UMAU p-value.
    Umau,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Power,
    TypeIError,
    Coverage,
    Width,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    /// Monte Carlo one-sided power on a grid of `n`.
    PowerVsN,
    /// Monte Carlo one-sided type I error with the truth at each `theta0`.
    TypeI,
    /// Exact power of the one- and two-sided test vectors.
    TwoSidedExact,
    /// Monte Carlo width and coverage of two-sided intervals.
    CiWidths,
}

/// Null variance used by the normal-approximation baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BaselineVariance {
    /// `n theta0 (1 - theta0) + 2 / epsilon^2`.
    #[default]
    NullPlugIn,
    /// `n / 4 + 2 / epsilon^2`, the largest binomial variance.
    Conservative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub experiment: Experiment,
    pub ns: Vec<u64>,
    pub theta0s: Vec<f64>,
    /// True values of `theta`. Empty means the truth equals each `theta0`.
    pub thetas: Vec<f64>,
    pub epsilon: f64,
    pub delta: f64,
    pub alpha: f64,
    pub replicates: u64,
    pub seed: u64,
    pub methods: Vec<Method>,
    #[serde(default)]
    pub baseline_variance: BaselineVariance,
}

fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let count = ((stop - start) / step).round() as usize;
    (0..=count)
        .map(|i| {
            let v = start + step * i as f64;
            // Snap away accumulated binary error: 0.15 rather than 0.15000000000000002.
            (v * 1e9).round() / 1e9
        })
        .collect()
}

impl SimConfig {
    /// Default design for figures 1 to 8.
    pub fn figure(number: u8) -> Result<Self> {
        use Method::*;
        let two_sided = vec![UmpLeft, UmpRight, Umpu, ApproxUmpu, Bonferroni];
        let base = Self {
            experiment: Experiment::TwoSidedExact,
            ns: vec![30],
            theta0s: vec![0.1],
            thetas: grid(0.0, 1.0, 0.01),
            epsilon: 0.1,
            delta: 0.0,
            alpha: 0.05,
            replicates: 0,
            seed: 1,
            methods: two_sided,
            baseline_variance: BaselineVariance::default(),
        };
        Ok(match number {
            1 => Self {
                experiment: Experiment::PowerVsN,
                ns: vec![10, 20, 30, 40, 50, 75, 100, 150, 200, 300, 500],
                theta0s: vec![0.9],
                thetas: vec![0.95],
                epsilon: 1.0,
                replicates: 10_000,
                methods: vec![UmpLeft, BaselineNormal, NonPrivate],
                ..base
            },
            2 => Self {
                experiment: Experiment::TypeI,
                theta0s: grid(0.02, 0.98, 0.02),
                thetas: vec![],
                epsilon: 1.0,
                replicates: 100_000,
                methods: vec![UmpLeft, BaselineNormal],
                ..base
            },
            3 => base,
            4 => Self {
                thetas: grid(0.0, 0.2, 0.002),
                ..base
            },
            5 => Self {
                ns: vec![100],
                theta0s: vec![0.5],
                ..base
            },
            6 => Self {
                ns: (1..=30).map(|i| 10 * i).collect(),
                theta0s: vec![0.8],
                thetas: vec![0.75],
                ..base
            },
            7 => Self {
                experiment: Experiment::CiWidths,
                theta0s: vec![],
                thetas: grid(0.05, 0.95, 0.05),
                epsilon: 1.0,
                replicates: 1000,
                methods: vec![Bonferroni, ApproxUmpu],
                ..base
            },
            8 => Self {
                experiment: Experiment::CiWidths,
                ns: (5..=30).map(|i| 2 * i).collect(),
                theta0s: vec![],
                thetas: vec![0.5],
                epsilon: 1.0,
                replicates: 1000,
                methods: vec![Bonferroni, ApproxUmpu],
                ..base
            },
            other => return Err(Error::domain(format!("no figure {other}; expected 1 to 8"))),
        })
    }

    pub fn validate(&self) -> Result<()> {
        PrivacyParams::new(self.epsilon, self.delta)?;
        check_open_probability("alpha", self.alpha)?;
        if self.ns.is_empty() {
            return Err(Error::domain("the n grid is empty"));
        }
        if self.methods.is_empty() {
            return Err(Error::domain("no methods selected"));
        }
        for &t in self.theta0s.iter().chain(&self.thetas) {
            check_probability("theta", t)?;
        }
        match self.experiment {
            Experiment::CiWidths => {
                if self.thetas.is_empty() {
                    return Err(Error::domain("interval experiments need true theta values"));
                }
            }
            _ => {
                if self.theta0s.is_empty() {
                    return Err(Error::domain("the theta0 grid is empty"));
                }
                for &t in &self.theta0s {
                    check_open_probability("theta0", t)?;
                }
            }
        }
        if self.experiment != Experiment::TwoSidedExact && self.replicates == 0 {
            return Err(Error::domain("replicates must be at least 1"));
        }
        if self.experiment == Experiment::TypeI && !self.thetas.is_empty() {
            return Err(Error::domain("type I experiments take the truth from theta0"));
        }
        Ok(())
    }

    fn privacy(&self) -> PrivacyParams {
        PrivacyParams::new(self.epsilon, self.delta).expect("validated")
    }

    /// `(n, theta0, theta)` for every grid point, `n` outermost.
    fn points(&self) -> Vec<(u64, f64, f64)> {
        let mut out = Vec::new();
        for &n in &self.ns {
            if self.experiment == Experiment::CiWidths {
                out.extend(self.thetas.iter().map(|&t| (n, f64::NAN, t)));
                continue;
            }
            for &t0 in &self.theta0s {
                if self.thetas.is_empty() {
                    out.push((n, t0, t0));
                } else {
                    out.extend(self.thetas.iter().map(|&t| (n, t0, t)));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRow {
    pub n: u64,
    /// Null value; absent for interval experiments.
    pub theta0: Option<f64>,
    pub theta: f64,
    pub method: Method,
    pub metric: Metric,
    pub estimate: f64,
    /// Monte Carlo standard error; zero for exact computations.
    pub mc_se: f64,
    pub replicates: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub config: SimConfig,
    pub rows: Vec<SimRow>,
}

impl SimResult {
    pub fn rows_for(&self, method: Method, metric: Metric) -> impl Iterator<Item = &SimRow> {
        self.rows
            .iter()
            .filter(move |r| r.method == method && r.metric == metric)
    }
}

/// Rejection probability of `tv` when `X ~ Binomial(n, theta)`.
pub fn exact_power(tv: &TestVector, theta: f64) -> Result<f64> {
    tv.power(theta)
}

/// One-sided (`Greater`) p-value of the normal approximation to a Laplace
/// release, `1 - Phi((z' - n theta0) / sd)` with `sd^2 = n / 4 + 2 / epsilon^2`.
pub fn baseline_normal_pvalue(zprime: f64, n: u64, theta0: f64, epsilon: f64) -> Result<f64> {
    baseline_normal_pvalue_with(zprime, n, theta0, epsilon, BaselineVariance::Conservative)
}

pub fn baseline_normal_pvalue_with(
    zprime: f64,
    n: u64,
    theta0: f64,
    epsilon: f64,
    variance: BaselineVariance,
) -> Result<f64> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::domain(format!("epsilon must be positive, got {epsilon}")));
    }
    check_probability("theta0", theta0)?;
    if zprime.is_nan() {
        return Err(Error::domain("z' is NaN"));
    }
    let n = n as f64;
    let binomial = match variance {
        BaselineVariance::NullPlugIn => n * theta0 * (1.0 - theta0),
        BaselineVariance::Conservative => n / 4.0,
    };
    let sd = (binomial + 2.0 / (epsilon * epsilon)).sqrt();
    let t = (zprime - n * theta0) / sd;
    Ok(0.5 * erfc(t / std::f64::consts::SQRT_2))
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Generator for one replicate; independent of thread scheduling.
pub fn replicate_rng(seed: u64, point: u64, replicate: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix(splitmix(splitmix(seed) ^ point) ^ replicate))
}

fn proportion_row(point: (u64, f64, f64), method: Method, metric: Metric, hits: u64, reps: u64) -> SimRow {
    let p = hits as f64 / reps as f64;
    SimRow {
        n: point.0,
        theta0: (!point.1.is_nan()).then_some(point.1),
        theta: point.2,
        method,
        metric,
        estimate: p,
        mc_se: (p * (1.0 - p) / reps as f64).sqrt(),
        replicates: reps,
    }
}

pub fn simulate(cfg: &SimConfig) -> Result<SimResult> {
    match cfg.experiment {
        Experiment::PowerVsN => power_vs_n(cfg),
        Experiment::TypeI => type1_sweep(cfg),
        Experiment::TwoSidedExact => two_sided_power_sweep(cfg),
        Experiment::CiWidths => ci_width_sweep(cfg),
    }
}

const REJECTION_METHODS: [Method; 3] = [Method::UmpLeft, Method::BaselineNormal, Method::NonPrivate];

/// Rejection rates of the one-sided tests at `alpha` when `X ~ Binomial(n, theta)`.
fn rejection_rates(cfg: &SimConfig, metric: Metric) -> Result<SimResult> {
    cfg.validate()?;
    if let Some(m) = cfg.methods.iter().find(|m| !REJECTION_METHODS.contains(m)) {
        return Err(Error::domain(format!("{m:?} is not a one-sided rejection method")));
    }
    let privacy = cfg.privacy();
    let classical = PrivacyParams::non_private();
    let mut rows = Vec::new();
    for (index, point) in cfg.points().into_iter().enumerate() {
        let (n, theta0, theta) = point;
        let pmf = PmfVector::binomial(n, theta0)?;
        let binomial = Binomial::new(n, theta).map_err(|e| Error::domain(e.to_string()))?;
        let counts = (0..cfg.replicates)
            .into_par_iter()
            .map(|r| {
                let mut rng = replicate_rng(cfg.seed, index as u64, r);
                let x = binomial.sample(&mut rng) as f64;
                let mut hits = [0u64; 3];
                for (slot, method) in REJECTION_METHODS.iter().enumerate() {
                    if !cfg.methods.contains(method) {
                        continue;
                    }
                    let p = match method {
                        Method::UmpLeft => {
                            let z = x + privacy.noise().sample(&mut rng);
                            pvalue_from_pmf(z, &pmf, &privacy, Side::Greater)
                        }
                        Method::NonPrivate => {
                            let z = x + classical.noise().sample(&mut rng);
                            pvalue_from_pmf(z, &pmf, &classical, Side::Greater)
                        }
                        _ => {
                            let noise = laplace_sample(1.0 / cfg.epsilon, &mut rng)
                                .expect("validated epsilon");
                            baseline_normal_pvalue_with(
                                x + noise,
                                n,
                                theta0,
                                cfg.epsilon,
                                cfg.baseline_variance,
                            )
                            .expect("validated inputs")
                        }
                    };
                    hits[slot] += u64::from(p < cfg.alpha);
                }
                hits
            })
            .reduce(|| [0; 3], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2]]);
        for (slot, method) in REJECTION_METHODS.iter().enumerate() {
            if cfg.methods.contains(method) {
                rows.push(proportion_row(point, *method, metric, counts[slot], cfg.replicates));
            }
        }
    }
    Ok(SimResult {
        config: cfg.clone(),
        rows,
    })
}

/// Empirical power of the one-sided tests on a grid of `n`.
pub fn power_vs_n(cfg: &SimConfig) -> Result<SimResult> {
    rejection_rates(cfg, Metric::Power)
}

/// Empirical type I error with the truth at each `theta0`.
pub fn type1_sweep(cfg: &SimConfig) -> Result<SimResult> {
    rejection_rates(cfg, Metric::TypeIError)
}

/// Exact power of each test vector over the grid of true values.
pub fn two_sided_power_sweep(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let privacy = cfg.privacy();
    let mut rows = Vec::new();
    for &n in &cfg.ns {
        for &theta0 in &cfg.theta0s {
            let vectors = cfg
                .methods
                .par_iter()
                .map(|&method| {
                    let tv = match method {
                        Method::UmpLeft => test_vector_one_sided(n, theta0, cfg.alpha, &privacy, Side::Greater),
                        Method::UmpRight => test_vector_one_sided(n, theta0, cfg.alpha, &privacy, Side::Less),
                        Method::Umpu => umpu_test_vector(n, theta0, cfg.alpha, &privacy),
                        Method::ApproxUmpu => approx_test_vector(n, theta0, cfg.alpha, &privacy),
                        Method::Bonferroni => bonferroni_test_vector(n, theta0, cfg.alpha, &privacy),
                        Method::NonPrivate => {
                            test_vector_one_sided(n, theta0, cfg.alpha, &PrivacyParams::non_private(), Side::Greater)
                        }
                        other => Err(Error::domain(format!("{other:?} has no exact test vector"))),
                    }?;
                    Ok((method, tv))
                })
                .collect::<Result<Vec<_>>>()?;
            let thetas = if cfg.thetas.is_empty() { vec![theta0] } else { cfg.thetas.clone() };
            for &theta in &thetas {
                for (method, tv) in &vectors {
                    rows.push(SimRow {
                        n,
                        theta0: Some(theta0),
                        theta,
                        method: *method,
                        metric: Metric::Power,
                        estimate: exact_power(tv, theta)?,
                        mc_se: 0.0,
                        replicates: 0,
                    });
                }
            }
        }
    }
    Ok(SimResult {
        config: cfg.clone(),
        rows,
    })
}

/// Average width and coverage of two-sided intervals at level `1 - alpha`.
pub fn ci_width_sweep(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let privacy = cfg.privacy();
    let interval = |method: Method, z: f64, n: u64| -> Result<IntervalResult> {
        match method {
            Method::Bonferroni => ci_bonferroni(z, n, cfg.alpha, &privacy),
            Method::ApproxUmpu => ci_approx_umpu(z, n, cfg.alpha, &privacy),
            Method::Umau => ci_umau(z, n, cfg.alpha, &privacy),
            other => Err(Error::domain(format!("{other:?} has no two-sided interval"))),
        }
    };
    let mut rows = Vec::new();
    for (index, point) in cfg.points().into_iter().enumerate() {
        let (n, _, theta) = point;
        let binomial = Binomial::new(n, theta).map_err(|e| Error::domain(e.to_string()))?;
        // One entry per replicate, in replicate order, so the sums below do not
        // depend on scheduling.
        let draws = (0..cfg.replicates)
            .into_par_iter()
            .map(|r| {
                let mut rng = replicate_rng(cfg.seed, index as u64, r);
                let x = binomial.sample(&mut rng) as f64;
                let z = x + privacy.noise().sample(&mut rng);
                cfg.methods
                    .iter()
                    .map(|&m| interval(m, z, n).map(|ci| (ci.width(), ci.contains(theta))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let reps = cfg.replicates as f64;
        for (slot, &method) in cfg.methods.iter().enumerate() {
            let widths: Vec<f64> = draws.iter().map(|d| d[slot].0).collect();
            let mean = widths.iter().sum::<f64>() / reps;
            let var = if cfg.replicates > 1 {
                widths.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (reps - 1.0)
            } else {
                0.0
            };
            rows.push(SimRow {
                n,
                theta0: None,
                theta,
                method,
                metric: Metric::Width,
                estimate: mean,
                mc_se: (var / reps).sqrt(),
                replicates: cfg.replicates,
            });
            let covered = draws.iter().filter(|d| d[slot].1).count() as u64;
            rows.push(proportion_row(point, method, Metric::Coverage, covered, cfg.replicates));
        }
    }
    Ok(SimResult {
        config: cfg.clone(),
        rows,
    })
}

#[derive(Serialize)]
struct CsvRecord {
    experiment: Experiment,
    n: u64,
    theta0: Option<f64>,
    theta: f64,
    epsilon: f64,
    delta: f64,
    alpha: f64,
    method: Method,
    metric: Metric,
    estimate: f64,
    mc_se: f64,
    replicates: u64,
}

/// Writes one CSV line per row, with the configuration columns repeated.
pub fn write_csv<W: io::Write>(result: &SimResult, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let c = &result.config;
    for r in &result.rows {
        w.serialize(CsvRecord {
            experiment: c.experiment,
            n: r.n,
            theta0: r.theta0,
            theta: r.theta,
            epsilon: c.epsilon,
            delta: c.delta,
            alpha: c.alpha,
            method: r.method,
            metric: r.metric,
            estimate: r.estimate,
            mc_se: r.mc_se,
            replicates: r.replicates,
        })
        .map_err(|e| Error::domain(format!("csv: {e}")))?;
    }
    w.flush().map_err(|e| Error::domain(format!("csv: {e}")))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub library_version: String,
    pub seed: u64,
    pub rows: usize,
    pub config: SimConfig,
}

pub fn manifest(result: &SimResult) -> Manifest {
    Manifest {
        library_version: crate::VERSION.to_string(),
        seed: result.config.seed,
        rows: result.rows.len(),
        config: result.config.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_presets_validate() {
        for k in 1..=8 {
            SimConfig::figure(k).unwrap().validate().unwrap();
        }
        assert!(SimConfig::figure(9).is_err());
        assert!(SimConfig::figure(7).unwrap().thetas.contains(&0.15));
        assert!(SimConfig::figure(8).unwrap().ns.contains(&16));
    }

    #[test]
    fn baseline_examples() {
        assert!((baseline_normal_pvalue(27.0, 30, 0.9, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(baseline_normal_pvalue(1e9, 30, 0.9, 1.0).unwrap() < 1e-300);
        assert!(baseline_normal_pvalue(1.0, 30, 0.9, 0.0).is_err());
    }

    #[test]
    fn replicate_seeds_differ() {
        use rand::Rng;
        let a: u64 = replicate_rng(1, 0, 0).random();
        let b: u64 = replicate_rng(1, 0, 1).random();
        let c: u64 = replicate_rng(1, 1, 0).random();
        assert!(a != b && a != c && b != c);
        assert_eq!(a, replicate_rng(1, 0, 0).random::<u64>());
    }

    #[test]
    fn small_runs_are_deterministic() {
        let cfg = SimConfig {
            ns: vec![20],
            theta0s: vec![0.3, 0.6],
            replicates: 500,
            ..SimConfig::figure(2).unwrap()
        };
        let a = simulate(&cfg).unwrap();
        let b = simulate(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 4);
        let mut out = Vec::new();
        write_csv(&a, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("experiment,n,theta0,theta,epsilon,delta,alpha,method,metric,estimate,mc_se,replicates\n"));
        assert_eq!(text.lines().count(), 5);
    }

    #[test]
    fn exact_sweep_sizes() {
        let cfg = SimConfig {
            thetas: vec![0.1, 0.4],
            ..SimConfig::figure(3).unwrap()
        };
        let res = simulate(&cfg).unwrap();
        for r in res.rows.iter().filter(|r| r.theta == 0.1) {
            assert!((r.estimate - 0.05).abs() < 1e-8, "{r:?}");
        }
    }
}

//! Named protocols and privacy/utility sweeps over (ε, k) grids.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::attacks::{expected_asr, expected_asr_she_mc, SHE_MC_TRIALS};
use crate::error::{Error, Result};
use crate::harness::dataset::{gen_dirichlet, gen_round_robin, load_csv_column, Dataset, DomainSpec};
use crate::harness::experiment::{run_experiment, summarize, ExperimentConfig};
use crate::model::{ss_reference_omega, Family, ProtocolConfig};
use crate::optimizer::{optimize_ass, optimize_athe, optimize_aue, optimize_alh, the_reference_theta, ObjectiveWeights};
use crate::protocols::analytic_mse;
use crate::rng::derive_stream;

/// Run index reserved for the SHE Monte Carlo ASR stream.
const SHE_MC_RUN: u64 = u64::MAX - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Protocol {
    Grr,
    Ss,
    Sue,
    Oue,
    Blh,
    Olh,
    She,
    The,
    Ass,
    Aue,
    Alh,
    Athe,
}

impl Protocol {
    pub const ALL: [Protocol; 12] = [
        Protocol::Grr,
        Protocol::Ss,
        Protocol::Sue,
        Protocol::Oue,
        Protocol::Blh,
        Protocol::Olh,
        Protocol::She,
        Protocol::The,
        Protocol::Ass,
        Protocol::Aue,
        Protocol::Alh,
        Protocol::Athe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Grr => "GRR",
            Protocol::Ss => "SS",
            Protocol::Sue => "SUE",
            Protocol::Oue => "OUE",
            Protocol::Blh => "BLH",
            Protocol::Olh => "OLH",
            Protocol::She => "SHE",
            Protocol::The => "THE",
            Protocol::Ass => "ASS",
            Protocol::Aue => "AUE",
            Protocol::Alh => "ALH",
            Protocol::Athe => "ATHE",
        }
    }

    pub fn is_adaptive(self) -> bool {
        matches!(self, Protocol::Ass | Protocol::Aue | Protocol::Alh | Protocol::Athe)
    }

    /// The fixed protocol an adaptive one generalises.
    pub fn baseline(self) -> Protocol {
        match self {
            Protocol::Ass => Protocol::Ss,
            Protocol::Aue => Protocol::Oue,
            Protocol::Alh => Protocol::Olh,
            Protocol::Athe => Protocol::The,
            p => p,
        }
    }

    pub fn family(self) -> Family {
        match self {
            Protocol::Grr => Family::Grr,
            Protocol::Ss | Protocol::Ass => Family::Ss,
            Protocol::Sue | Protocol::Oue | Protocol::Aue => Family::Ue,
            Protocol::Blh | Protocol::Olh | Protocol::Alh => Family::Lh,
            Protocol::She => Family::She,
            Protocol::The | Protocol::Athe => Family::The,
        }
    }

    /// Concrete parameters: the standard choice for fixed protocols, the
    /// objective minimiser (per-user MSE) for adaptive ones.
    pub fn resolve(self, eps: f64, k: usize, weights: ObjectiveWeights) -> Result<ProtocolConfig> {
        match self {
            Protocol::Grr => ProtocolConfig::grr(eps, k),
            Protocol::Ss => ProtocolConfig::ss(eps, k, ss_reference_omega(eps, k)),
            Protocol::Sue => ProtocolConfig::sue(eps, k),
            Protocol::Oue => ProtocolConfig::oue(eps, k),
            Protocol::Blh => ProtocolConfig::blh(eps, k),
            Protocol::Olh => ProtocolConfig::olh(eps, k),
            Protocol::She => ProtocolConfig::she(eps, k),
            Protocol::The => ProtocolConfig::the(eps, k, the_reference_theta(eps)?),
            Protocol::Ass => Ok(optimize_ass(eps, k, weights, 1.0)?.config),
            Protocol::Aue => Ok(optimize_aue(eps, k, weights, 1.0)?.config),
            Protocol::Alh => Ok(optimize_alh(eps, k, weights, 1.0)?.config),
            Protocol::Athe => Ok(optimize_athe(eps, k, weights, 1.0)?.config),
        }
    }

    /// The protocol's family with an explicit free parameter (`ω`, `p`, `g`
    /// or `θ`). Families without one reject any value.
    pub fn with_param(self, eps: f64, k: usize, value: f64) -> Result<ProtocolConfig> {
        let integer = |field: &'static str| {
            if value.fract() == 0.0 && value >= 0.0 {
                Ok(value as usize)
            } else {
                Err(Error::range(field, "a non-negative integer", value))
            }
        };
        match self.family() {
            Family::Ss => ProtocolConfig::ss(eps, k, integer("omega")?),
            Family::Ue => ProtocolConfig::ue_from_p(eps, k, value),
            Family::Lh => ProtocolConfig::lh(eps, k, integer("g")?),
            Family::The => ProtocolConfig::the(eps, k, value),
            Family::Grr | Family::She => Err(Error::range("param", format!("no parameter for {}", self.name()), value)),
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Protocol::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::range("protocol", "one of GRR SS SUE OUE BLH OLH SHE THE ASS AUE ALH ATHE", s))
    }
}

/// `"all"` or a comma-separated list of protocol names.
pub fn parse_protocols(s: &str) -> Result<Vec<Protocol>> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(Protocol::ALL.to_vec());
    }
    s.split(',').map(str::parse).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Dirichlet,
    RoundRobin,
    Csv { path: PathBuf, column: String, domain: DomainSpec },
}

impl DataSource {
    pub fn materialise(&self, k: usize, n: usize, seed: u64) -> Result<Dataset> {
        match self {
            DataSource::Dirichlet => gen_dirichlet(k, n, seed),
            DataSource::RoundRobin => gen_round_robin(k, n),
            DataSource::Csv { path, column, domain } => load_csv_column(path, column, domain),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalOptions {
    /// Users for synthetic data; file-backed data uses every row.
    pub n: usize,
    pub runs: usize,
    pub data: DataSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub weights: ObjectiveWeights,
    /// Users the analytic MSE is reported at when no simulation runs.
    pub mse_n: u64,
    pub seed: u64,
    pub she_trials: u64,
    pub empirical: Option<EmpiricalOptions>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            weights: ObjectiveWeights::balanced(),
            mse_n: 1,
            seed: 0,
            she_trials: SHE_MC_TRIALS,
            empirical: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoRow {
    pub protocol: String,
    pub eps: f64,
    pub k: usize,
    pub param: Option<String>,
    pub param_value: Option<f64>,
    pub analytic_asr: f64,
    pub analytic_mse: f64,
    pub empirical_asr: Option<f64>,
    pub empirical_asr_stderr: Option<f64>,
    pub empirical_mse: Option<f64>,
    pub n: u64,
    pub runs: Option<usize>,
    pub seed: u64,
}

/// Closed-form ASR, or the seeded Monte Carlo estimate for SHE.
pub fn analytic_asr(cfg: &ProtocolConfig, seed: u64, she_trials: u64) -> Result<f64> {
    if cfg.family == Family::She {
        let mut rng = derive_stream(seed, SHE_MC_RUN, cfg.eps.to_bits() ^ cfg.k as u64);
        return Ok(expected_asr_she_mc(cfg.eps, cfg.k, she_trials, &mut rng)?.asr);
    }
    expected_asr(cfg)
}

/// Builds the analytic part of a row for an already resolved configuration.
pub fn analytic_row(protocol: &str, cfg: &ProtocolConfig, opts: &SweepOptions, n: u64) -> Result<ParetoRow> {
    let label = cfg.param.label();
    Ok(ParetoRow {
        protocol: protocol.to_string(),
        eps: cfg.eps,
        k: cfg.k,
        param: label.map(|(name, _)| name.to_string()),
        param_value: label.map(|(_, v)| v),
        analytic_asr: analytic_asr(cfg, opts.seed, opts.she_trials)?,
        analytic_mse: analytic_mse(cfg, n as f64)?,
        empirical_asr: None,
        empirical_asr_stderr: None,
        empirical_mse: None,
        n,
        runs: None,
        seed: opts.seed,
    })
}

/// Simulates `cfg` on `data` and attaches the empirical columns to a row
/// whose analytic MSE is evaluated at the dataset size.
pub fn empirical_row(protocol: &str, cfg: &ProtocolConfig, opts: &SweepOptions, data: &Dataset, runs: usize) -> Result<ParetoRow> {
    let mut row = analytic_row(protocol, cfg, opts, data.len() as u64)?;
    let outcomes = run_experiment(&ExperimentConfig {
        protocol: *cfg,
        runs,
        master_seed: opts.seed,
        dataset: data.clone(),
    })?;
    let s = summarize(&outcomes)?;
    row.empirical_asr = Some(s.mean_asr);
    row.empirical_asr_stderr = Some(s.asr_stderr);
    row.empirical_mse = Some(s.mean_mse);
    row.runs = Some(runs);
    Ok(row)
}

/// One row per `(protocol, ε, k)`, protocol-major.
pub fn pareto_sweep(protocols: &[Protocol], eps_grid: &[f64], k_grid: &[usize], opts: &SweepOptions) -> Result<Vec<ParetoRow>> {
    let datasets: Vec<Option<Dataset>> = k_grid
        .iter()
        .map(|&k| match &opts.empirical {
            Some(e) => e.data.materialise(k, e.n, opts.seed).map(Some),
            None => Ok(None),
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(protocols.len() * eps_grid.len() * k_grid.len());
    for &proto in protocols {
        for &eps in eps_grid {
            for (&k, data) in k_grid.iter().zip(&datasets) {
                let cfg = proto.resolve(eps, k, opts.weights)?;
                rows.push(match (data, &opts.empirical) {
                    (Some(d), Some(e)) => empirical_row(proto.name(), &cfg, opts, d, e.runs)?,
                    _ => analytic_row(proto.name(), &cfg, opts, opts.mse_n)?,
                });
            }
        }
    }
    Ok(rows)
}

/// Parses `lo:hi:step` (inclusive, 1e-9 slack), `a,b,c`, or a single value.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::range("grid", "lo:hi:step, a comma list, or a number", s);
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad()).and_then(|v| if v.is_finite() { Ok(v) } else { Err(bad()) });
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [lo, hi, step] => {
            let (lo, hi, step) = (num(lo)?, num(hi)?, num(step)?);
            if step.is_nan() || step <= 0.0 || hi < lo {
                return Err(bad());
            }
            let count = ((hi - lo) / step + 1e-9).floor() as usize;
            Ok((0..=count).map(|i| round_grid(lo + i as f64 * step)).collect())
        }
        [single] => single.split(',').map(num).collect(),
        _ => Err(bad()),
    }
}

/// Strips accumulated binary noise such as `0.30000000000000004`.
fn round_grid(v: f64) -> f64 {
    let r = (v * 1e12).round() / 1e12;
    if (r - v).abs() < 1e-9 {
        r
    } else {
        v
    }
}

/// Grid of positive integers.
pub fn parse_int_grid(s: &str) -> Result<Vec<usize>> {
    parse_grid(s)?
        .into_iter()
        .map(|v| {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::range("grid", "integers", v))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FamilyParam;

    #[test]
    fn grid_syntax() {
        assert_eq!(parse_grid("2:10:0.5").unwrap().len(), 17);
        assert_eq!(parse_grid("0.1:0.3:0.1").unwrap(), vec![0.1, 0.2, 0.3]);
        assert_eq!(parse_grid("1,2.5,4").unwrap(), vec![1.0, 2.5, 4.0]);
        assert_eq!(parse_grid("4").unwrap(), vec![4.0]);
        assert_eq!(parse_grid("1:2:0.3").unwrap().len(), 4);
        assert!(parse_grid("1:0:1").is_err());
        assert!(parse_grid("a").is_err());
        assert!(parse_grid("1:2:0").is_err());
        assert_eq!(parse_int_grid("25,100").unwrap(), vec![25, 100]);
        assert!(parse_int_grid("2.5").is_err());
    }

    #[test]
    fn protocol_names_round_trip() {
        for p in Protocol::ALL {
            assert_eq!(p.name().parse::<Protocol>().unwrap(), p);
            assert_eq!(p.name().to_lowercase().parse::<Protocol>().unwrap(), p);
        }
        assert!("XYZ".parse::<Protocol>().is_err());
        assert_eq!(parse_protocols("all").unwrap().len(), 12);
        assert_eq!(parse_protocols("grr,athe").unwrap(), vec![Protocol::Grr, Protocol::Athe]);
    }

    #[test]
    fn seventeen_rows_per_protocol() {
        let opts = SweepOptions {
            she_trials: 1000,
            ..SweepOptions::default()
        };
        let eps = parse_grid("2:10:0.5").unwrap();
        let rows = pareto_sweep(&Protocol::ALL, &eps, &[100], &opts).unwrap();
        assert_eq!(rows.len(), 12 * 17);
        for p in Protocol::ALL {
            assert_eq!(rows.iter().filter(|r| r.protocol == p.name()).count(), 17);
        }
        assert!(rows.iter().all(|r| r.empirical_asr.is_none() && r.runs.is_none()));
        assert!(rows.iter().all(|r| r.analytic_asr.is_finite() && r.analytic_mse.is_finite()));
    }

    #[test]
    fn adaptive_rows_collapse_to_baselines_without_asr_weight() {
        let opts = SweepOptions {
            weights: ObjectiveWeights::new(0.0, 1.0).unwrap(),
            she_trials: 1000,
            ..SweepOptions::default()
        };
        for p in [Protocol::Ass, Protocol::Aue, Protocol::Alh, Protocol::Athe] {
            let a = pareto_sweep(&[p], &[1.0, 4.0, 8.0], &[25, 100], &opts).unwrap();
            let b = pareto_sweep(&[p.baseline()], &[1.0, 4.0, 8.0], &[25, 100], &opts).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert_eq!((x.param.as_ref(), x.param_value), (y.param.as_ref(), y.param_value), "{p}");
            }
        }
    }

    #[test]
    fn explicit_parameters() {
        assert_eq!(Protocol::Ss.with_param(1.0, 10, 3.0).unwrap().param, FamilyParam::SubsetSize(3));
        assert!(Protocol::Ss.with_param(1.0, 10, 3.5).is_err());
        assert!(Protocol::Grr.with_param(1.0, 10, 3.0).is_err());
        assert_eq!(Protocol::Alh.with_param(1.0, 10, 4.0).unwrap().param, FamilyParam::HashRange(4));
    }

    #[test]
    fn she_analytic_asr_is_seeded() {
        let cfg = ProtocolConfig::she(2.0, 10).unwrap();
        assert_eq!(analytic_asr(&cfg, 3, 10_000).unwrap(), analytic_asr(&cfg, 3, 10_000).unwrap());
        assert_ne!(analytic_asr(&cfg, 3, 10_000).unwrap(), analytic_asr(&cfg, 4, 10_000).unwrap());
    }

    #[test]
    fn empirical_rows_fill_every_column() {
        let opts = SweepOptions {
            she_trials: 1000,
            seed: 9,
            empirical: Some(EmpiricalOptions {
                n: 500,
                runs: 2,
                data: DataSource::Dirichlet,
            }),
            ..SweepOptions::default()
        };
        let rows = pareto_sweep(&[Protocol::Grr, Protocol::She], &[1.0], &[5], &opts).unwrap();
        for r in rows {
            assert_eq!(r.n, 500);
            assert_eq!(r.runs, Some(2));
            assert!(r.empirical_asr.is_some() && r.empirical_mse.is_some() && r.empirical_asr_stderr.is_some());
        }
    }
}

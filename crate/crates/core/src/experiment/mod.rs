//! Config-driven experiment runs.
//!
//! Each run writes CSV data files and a `manifest.json` into the configured
//! output directory. Data files depend only on the config, never on the
//! number of worker threads.

mod config;
mod manifest;
mod plot;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

pub use config::{
    apply_override, DownlinkCase, DownlinkConfig, ExperimentConfig, ExperimentKind, SweepConfig, UplinkConfig,
};
pub use manifest::{sha256_hex, OutputRecord, RunManifest, MANIFEST_FILE};
pub use plot::{emit_plot_script, plot_from_dir, PLOT_FILE};

use crate::access::SchemeKind;
use crate::channel::{sample_fading, FadingEnsemble};
use crate::error::{Error, Result};
use crate::opportunistic::{silent_primary_rate, sweep_rreq, RreqSweep, UplinkScenario};
use crate::region::{region_dominates, sweep_frontier, ParetoFrontier, RateTolerance};

pub const REGION_FRONTIERS_FILE: &str = "region_frontiers.csv";
pub const REGION_CONTAINMENT_FILE: &str = "region_containment.csv";
pub const CURVES_FILE: &str = "opportunistic_curves.csv";

pub const REGION_FRONTIERS_HEADER: &str = "scheme,case,semantic_rate_suts_per_s,bit_rate_bits_per_s";
pub const REGION_CONTAINMENT_HEADER: &str =
    "case,outer,inner,dominates,tolerance_semantic,tolerance_bit,outer_excess_grid_steps";
pub const CURVES_HEADER: &str = "scheme,r_req_bits_per_s,ergodic_equiv_semantic_rate_suts_per_s,avg_power_w,ergodic_primary_bits_per_s,converged";

pub const THREADS_ENV: &str = "SEMNOMA_THREADS";

/// Worker-thread cap from `SEMNOMA_THREADS`, if set.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            ))),
        },
    }
}

/// Runs `f` on a dedicated pool of `threads` workers, or the global pool.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot start {n} worker threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// One channel case of the downlink comparison.
#[derive(Debug, Clone)]
pub struct RegionCase {
    pub case: DownlinkCase,
    /// In [`SchemeKind::ALL`] order.
    pub frontiers: Vec<ParetoFrontier>,
    /// One grid step on this case's region.
    pub step: RateTolerance,
}

impl RegionCase {
    pub fn frontier(&self, scheme: SchemeKind) -> &ParetoFrontier {
        &self.frontiers[SchemeKind::ALL
            .iter()
            .position(|&s| s == scheme)
            .expect("known scheme")]
    }

    pub fn dominates(&self, outer: SchemeKind, inner: SchemeKind) -> bool {
        region_dominates(self.frontier(outer), self.frontier(inner), self.step)
    }

    /// Largest margin, in grid steps, by which a point of `outer` clears the
    /// boundary of `inner` in both coordinates at once. Negative when no point
    /// does.
    pub fn joint_excess_steps(&self, outer: SchemeKind, inner: SchemeKind) -> f64 {
        let inner = self.frontier(inner);
        self.frontier(outer)
            .points()
            .iter()
            .map(|q| {
                let (ds, db) = inner.excess(q);
                (ds / self.step.semantic).min(db / self.step.bit)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn compute_regions(cfg: &ExperimentConfig) -> Result<Vec<RegionCase>> {
    cfg.validate()?;
    let cases = cfg.downlink.cases(&cfg.semantic)?;
    let jobs: Vec<(usize, SchemeKind)> = (0..cases.len())
        .flat_map(|c| SchemeKind::ALL.into_iter().map(move |s| (c, s)))
        .collect();
    let frontiers = jobs
        .par_iter()
        .map(|&(c, s)| sweep_frontier(&cases[c].scenario, s, &cfg.region))
        .collect::<Result<Vec<_>>>()?;
    let mut frontiers = frontiers.into_iter();
    Ok(cases
        .into_iter()
        .map(|case| {
            let fs: Vec<ParetoFrontier> = frontiers.by_ref().take(SchemeKind::ALL.len()).collect();
            let max_s = fs.iter().map(ParetoFrontier::max_semantic).fold(0.0, f64::max);
            let max_b = fs.iter().map(ParetoFrontier::max_bit).fold(0.0, f64::max);
            let step = cfg.region.cell_step(max_s, max_b);
            RegionCase {
                case,
                frontiers: fs,
                step,
            }
        })
        .collect())
}

pub fn region_frontiers_csv(cases: &[RegionCase]) -> String {
    let mut out = format!("{REGION_FRONTIERS_HEADER}\n");
    for rc in cases {
        for f in &rc.frontiers {
            let scheme = f.scheme.map_or("", SchemeKind::label);
            for p in f.points() {
                let _ = writeln!(out, "{scheme},{},{},{}", rc.case.label, p.semantic, p.bit);
            }
        }
    }
    out
}

pub fn region_containment_csv(cases: &[RegionCase]) -> String {
    let mut out = format!("{REGION_CONTAINMENT_HEADER}\n");
    for rc in cases {
        for inner in [SchemeKind::Oma, SchemeKind::Noma] {
            let outer = SchemeKind::SemiNoma;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                rc.case.label,
                outer.label(),
                inner.label(),
                rc.dominates(outer, inner),
                rc.step.semantic,
                rc.step.bit,
                rc.joint_excess_steps(outer, inner)
            );
        }
    }
    out
}

/// Result of a run: where it wrote and what.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub manifest: RunManifest,
    pub manifest_path: PathBuf,
}

impl RunOutput {
    pub fn path(&self, file: &str) -> PathBuf {
        self.dir.join(file)
    }
}

fn finish(
    cfg: &ExperimentConfig,
    kind: ExperimentKind,
    started: Instant,
    files: &[(&str, String)],
) -> Result<RunOutput> {
    let dir = cfg.output_dir.clone();
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let outputs = files
        .iter()
        .map(|(name, text)| manifest::write_output(&dir, name, text))
        .collect::<Result<Vec<_>>>()?;
    let resolved = ExperimentConfig {
        experiment: Some(kind),
        ..cfg.clone()
    };
    let manifest = RunManifest {
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        experiment: kind.label().to_string(),
        config: resolved.to_json(),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        outputs,
    };
    let manifest_path = manifest.write(&dir)?;
    Ok(RunOutput {
        dir,
        manifest,
        manifest_path,
    })
}

/// Frontiers of every scheme in every channel case, plus containment verdicts.
pub fn run_rate_region(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let started = Instant::now();
    let cases = compute_regions(cfg)?;
    finish(
        cfg,
        ExperimentKind::RateRegion,
        started,
        &[
            (REGION_FRONTIERS_FILE, region_frontiers_csv(&cases)),
            (REGION_CONTAINMENT_FILE, region_containment_csv(&cases)),
        ],
    )
}

/// Inputs and results of the uplink sweep.
#[derive(Debug, Clone)]
pub struct UplinkRun {
    pub template: UplinkScenario,
    pub ensemble: FadingEnsemble,
    pub r_silent: f64,
    pub sweep: RreqSweep,
}

pub fn uplink_setup(cfg: &ExperimentConfig) -> Result<(UplinkScenario, FadingEnsemble)> {
    cfg.validate()?;
    let template = cfg.uplink.scenario(&cfg.semantic, &cfg.conversion)?;
    let (primary, secondary) = cfg.uplink.samplers()?;
    let ensemble = sample_fading(&primary, &secondary, cfg.uplink.ensemble_size, cfg.seed)?;
    Ok((template, ensemble))
}

pub fn compute_opportunistic(cfg: &ExperimentConfig) -> Result<UplinkRun> {
    let (template, ensemble) = uplink_setup(cfg)?;
    let r_silent = silent_primary_rate(&template, &ensemble);
    let r_reqs = cfg.sweep.values(r_silent);
    if r_reqs.iter().all(|&r| r > r_silent) {
        return Err(Error::Infeasible {
            required: r_reqs[0],
            achievable: r_silent,
        });
    }
    let sweep = sweep_rreq(&template, &ensemble, &r_reqs, &cfg.solver)?;
    Ok(UplinkRun {
        template,
        ensemble,
        r_silent,
        sweep,
    })
}

pub fn curves_csv(sweep: &RreqSweep) -> String {
    let mut out = format!("{CURVES_HEADER}\n");
    for curve in &sweep.curves {
        for (r, point) in sweep.r_req.iter().zip(&curve.points) {
            let label = curve.strategy.label();
            let _ = match point {
                Some(res) => writeln!(
                    out,
                    "{label},{r},{},{},{},{}",
                    res.ergodic_secondary, res.avg_power, res.ergodic_primary, res.converged
                ),
                None => writeln!(out, "{label},{r},,,,"),
            };
        }
    }
    out
}

/// Ergodic secondary rate versus primary requirement for all three strategies.
pub fn run_opportunistic(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let started = Instant::now();
    let run = compute_opportunistic(cfg)?;
    finish(
        cfg,
        ExperimentKind::Opportunistic,
        started,
        &[(CURVES_FILE, curves_csv(&run.sweep))],
    )
}

/// Dispatches on `kind`.
pub fn run(kind: ExperimentKind, cfg: &ExperimentConfig) -> Result<RunOutput> {
    match kind {
        ExperimentKind::RateRegion => run_rate_region(cfg),
        ExperimentKind::Opportunistic => run_opportunistic(cfg),
    }
}

/// Reads `dir/file`, mapping failures to an I/O error naming the path.
pub fn read_output(dir: &Path, file: &str) -> Result<String> {
    let path = dir.join(file);
    fs::read_to_string(&path).map_err(|e| Error::io(&path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(dir: &Path) -> ExperimentConfig {
        ExperimentConfig::load_str(
            "{}",
            &[
                format!("output_dir={}", dir.display()),
                "region.band_grid=2".into(),
                "region.power_grid=2".into(),
                "uplink.ensemble_size=20".into(),
                "solver.power_grid=11".into(),
                "sweep.r_req_points=3".into(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn tiny_region_run_is_schema_valid() {
        let dir = tempfile::tempdir().unwrap();
        let out = run_rate_region(&tiny(dir.path())).unwrap();
        let text = read_output(dir.path(), REGION_FRONTIERS_FILE).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(REGION_FRONTIERS_HEADER));
        for line in lines {
            let f: Vec<&str> = line.split(',').collect();
            assert_eq!(f.len(), 4);
            assert!(["oma", "noma", "semi-noma"].contains(&f[0]));
            assert!(f[2].parse::<f64>().is_ok() && f[3].parse::<f64>().is_ok());
        }
        let cont = read_output(dir.path(), REGION_CONTAINMENT_FILE).unwrap();
        assert_eq!(cont.lines().count(), 1 + 3 * 2);
        assert_eq!(out.manifest.outputs.len(), 2);
        assert!(out.manifest.verify(dir.path()).unwrap().is_empty());
    }

    #[test]
    fn single_rreq_gives_three_rows() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            sweep: SweepConfig {
                r_req: Some(vec![0.0]),
                ..SweepConfig::default()
            },
            ..tiny(dir.path())
        };
        run_opportunistic(&cfg).unwrap();
        let text = read_output(dir.path(), CURVES_FILE).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CURVES_HEADER);
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn infeasible_points_leave_empty_fields() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            sweep: SweepConfig {
                r_req: Some(vec![0.0, 1e12]),
                ..SweepConfig::default()
            },
            ..tiny(dir.path())
        };
        run_opportunistic(&cfg).unwrap();
        let text = read_output(dir.path(), CURVES_FILE).unwrap();
        let gaps: Vec<&str> = text.lines().filter(|l| l.ends_with(",,,,")).collect();
        assert_eq!(gaps.len(), 3);
        assert!(gaps.iter().all(|l| l.split(',').nth(1) == Some("1000000000000")));
    }

    #[test]
    fn all_infeasible_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            sweep: SweepConfig {
                r_req: Some(vec![1e12]),
                ..SweepConfig::default()
            },
            ..tiny(dir.path())
        };
        let err = run_opportunistic(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn unwritable_output_dir_names_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let cfg = tiny(&blocker.join("sub"));
        match run_rate_region(&cfg).unwrap_err() {
            Error::Io { path, .. } => assert!(path.starts_with(&blocker)),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn thread_env_parsing() {
        assert!(with_threads(Some(2), rayon::current_num_threads).unwrap() == 2);
        assert_eq!(with_threads(None, || 5).unwrap(), 5);
    }
}

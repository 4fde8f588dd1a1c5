//! Run reports and manifest-driven benchmarks.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::localsearch::{run_local_search, SearchConfig, Subroutine};
use crate::oracle::{exact_max_packing, Budget};

/// First 16 hex digits of the SHA-256 of the instance's text form.
pub fn instance_digest(instance: &Instance) -> String {
    Sha256::digest(instance.to_text().as_bytes())
        .iter()
        .take(8)
        .fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub instance: String,
    pub digest: String,
    pub mode: Subroutine,
    pub k: usize,
    pub sets: usize,
    pub t: usize,
    pub seed: u64,
    pub trials: u64,
    pub self_loops: bool,
    pub packing_size: usize,
    pub optimum: Option<usize>,
    /// `optimum / packing_size` when the optimum is known.
    pub ratio: Option<f64>,
    pub iterations: usize,
    pub improvements: usize,
    pub colorings_tried: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_time_ms: Option<u64>,
}

impl RunReport {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn without_timing(mut self) -> Self {
        self.wall_time_ms = None;
        self
    }
}

#[derive(Clone, Debug, Default)]
pub struct SolveOptions {
    pub search: SearchConfig,
    pub oracle: bool,
    pub oracle_budget: Budget,
}

/// Runs the local search (and the exact oracle if asked) and summarizes.
pub fn solve(instance: &Instance, name: &str, opts: &SolveOptions) -> Result<RunReport> {
    let started = Instant::now();
    let (packing, trace) = run_local_search(instance, &opts.search)?;
    let optimum = if opts.oracle {
        let out = exact_max_packing(instance, opts.oracle_budget);
        if !out.optimal {
            return Err(Error::Budget(format!(
                "exact oracle stopped after {} nodes without proving optimality",
                out.nodes
            )));
        }
        Some(out.packing.len())
    } else {
        None
    };
    let ratio = optimum.map(|opt| {
        if packing.is_empty() {
            if opt == 0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            opt as f64 / packing.len() as f64
        }
    });
    Ok(RunReport {
        instance: name.to_string(),
        digest: instance_digest(instance),
        mode: opts.search.subroutine,
        k: instance.k(),
        sets: instance.num_sets(),
        t: trace.t,
        seed: opts.search.seed,
        trials: opts.search.trials,
        self_loops: opts.search.include_self_loops,
        packing_size: packing.len(),
        optimum,
        ratio,
        iterations: trace.iterations.len(),
        improvements: trace.improvements(),
        colorings_tried: trace.colorings_tried(),
        wall_time_ms: Some(started.elapsed().as_millis() as u64),
    })
}

/// One `[[run]]` entry of a bench manifest.
#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub instance: PathBuf,
    #[serde(default = "default_mode")]
    pub mode: Subroutine,
    pub t: Option<usize>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub oracle: bool,
    #[serde(default = "default_true")]
    pub self_loops: bool,
}

fn default_mode() -> Subroutine {
    Subroutine::ColorCoding
}

fn default_trials() -> u64 {
    SearchConfig::default().trials
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default)]
    pub run: Vec<RunSpec>,
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("manifest: {e}")))
    }

    /// Reads a manifest; instance paths are resolved against its directory.
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut m = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for r in &mut m.run {
            if r.instance.is_relative() {
                r.instance = base.join(&r.instance);
            }
        }
        Ok(m)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub instance: String,
    pub mode: Subroutine,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<RunReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl BenchRow {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("row serializes")
    }
}

fn run_row(spec: &RunSpec, timing: bool) -> BenchRow {
    let name = spec.instance.display().to_string();
    let result = Instance::read(&spec.instance).and_then(|inst| {
        let opts = SolveOptions {
            search: SearchConfig {
                t: spec.t,
                trials: spec.trials,
                seed: spec.seed,
                subroutine: spec.mode,
                include_self_loops: spec.self_loops,
                ..SearchConfig::default()
            },
            oracle: spec.oracle,
            ..SolveOptions::default()
        };
        solve(&inst, &name, &opts)
    });
    match result {
        Ok(r) => BenchRow {
            instance: name,
            mode: spec.mode,
            report: Some(if timing { r } else { r.without_timing() }),
            error: None,
        },
        Err(e) => BenchRow {
            instance: name,
            mode: spec.mode,
            report: None,
            error: Some(e.to_string()),
        },
    }
}

/// Runs every manifest row on a pool of `jobs` threads. Row order follows
/// the manifest; a failing row is recorded and the rest still run.
pub fn run_bench(manifest: &Manifest, jobs: usize, timing: bool) -> Result<Vec<BenchRow>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        manifest
            .run
            .par_iter()
            .map(|s| run_row(s, timing))
            .collect()
    }))
}

/// Plain-text table with one line per row and ratio statistics per mode.
pub fn format_table(rows: &[BenchRow]) -> String {
    let mut out = format!(
        "{:<32} {:<6} {:>3} {:>6} {:>4} {:>6} {:>6} {:>7} {:>6} {:>10}  status\n",
        "instance", "mode", "k", "sets", "t", "size", "opt", "ratio", "iters", "colorings"
    );
    for row in rows {
        match (&row.report, &row.error) {
            (Some(r), _) => {
                let _ = writeln!(
                    out,
                    "{:<32} {:<6} {:>3} {:>6} {:>4} {:>6} {:>6} {:>7} {:>6} {:>10}  ok",
                    truncate(&row.instance, 32),
                    row.mode.as_str(),
                    r.k,
                    r.sets,
                    r.t,
                    r.packing_size,
                    r.optimum.map_or("-".into(), |o| o.to_string()),
                    r.ratio.map_or("-".into(), |x| format!("{x:.4}")),
                    r.iterations,
                    r.colorings_tried
                );
            }
            (None, err) => {
                let _ = writeln!(
                    out,
                    "{:<32} {:<6}  failed: {}",
                    truncate(&row.instance, 32),
                    row.mode.as_str(),
                    err.as_deref().unwrap_or("unknown error")
                );
            }
        }
    }
    for mode in [Subroutine::NaiveEnumeration, Subroutine::ColorCoding] {
        let ratios: Vec<f64> = rows
            .iter()
            .filter(|r| r.mode == mode)
            .filter_map(|r| r.report.as_ref()?.ratio)
            .collect();
        if ratios.is_empty() {
            continue;
        }
        let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let _ = writeln!(
            out,
            "ratio [{}]: rows={} min={min:.4} mean={mean:.4} max={max:.4}",
            mode.as_str(),
            ratios.len()
        );
    }
    out
}

fn truncate(s: &str, width: usize) -> String {
    let n = s.chars().count();
    if n <= width {
        s.to_string()
    } else {
        let tail: String = s.chars().skip(n - (width - 3)).collect();
        format!("...{tail}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::random_instance;

    #[test]
    fn digest_is_stable_and_short() {
        let inst = random_instance(3, 10, 15, 2).unwrap();
        let d = instance_digest(&inst);
        assert_eq!(d.len(), 16);
        assert_eq!(d, instance_digest(&inst.clone()));
        assert_ne!(d, instance_digest(&random_instance(3, 10, 15, 3).unwrap()));
    }

    #[test]
    fn solve_with_oracle_reports_ratio() {
        let inst = random_instance(3, 10, 15, 4).unwrap();
        let opts = SolveOptions {
            search: SearchConfig::naive(),
            oracle: true,
            ..SolveOptions::default()
        };
        let r = solve(&inst, "x", &opts).unwrap();
        let opt = r.optimum.unwrap();
        assert!(opt >= r.packing_size);
        assert_eq!(r.ratio, Some(opt as f64 / r.packing_size as f64));
        assert!(r.ratio.unwrap() <= 5.0 / 3.0);
    }

    #[test]
    fn manifest_defaults_and_errors() {
        let m = Manifest::parse("[[run]]\ninstance = \"a.sp\"\n").unwrap();
        assert_eq!(m.run[0].mode, Subroutine::ColorCoding);
        assert!(m.run[0].self_loops);
        assert_eq!(Manifest::parse("").unwrap(), Manifest::default());
        let m = Manifest::parse("[[run]]\ninstance = \"a.sp\"\nmode = \"naive\"\n").unwrap();
        assert_eq!(m.run[0].mode, Subroutine::NaiveEnumeration);
        assert!(Manifest::parse("[[run]]\ninstance = \"a\"\nbogus = 1\n").is_err());
        assert!(Manifest::parse("[[run]]\nmode = \"naive\"\n").is_err());
    }

    #[test]
    fn bench_records_failures() {
        let m = Manifest {
            run: vec![RunSpec {
                instance: PathBuf::from("/nonexistent/instance.sp"),
                mode: Subroutine::NaiveEnumeration,
                t: None,
                trials: 1,
                seed: 0,
                oracle: false,
                self_loops: true,
            }],
        };
        let rows = run_bench(&m, 2, false).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].failed());
        assert!(format_table(&rows).contains("failed"));
    }

    #[test]
    fn report_json_roundtrip() {
        let inst = random_instance(3, 8, 12, 1).unwrap();
        let r = solve(&inst, "y", &SolveOptions::default())
            .unwrap()
            .without_timing();
        let line = r.to_json_line();
        assert!(!line.contains("wall_time_ms"));
        let back: RunReport = serde_json::from_str(&line).unwrap();
        assert_eq!(back, r);
    }
}

//! End-to-end acceptance checks, one PASS/FAIL line per criterion.
//! Runs without the libtest harness; exits nonzero if any criterion fails.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::collections::BTreeMap;
use std::fs;
use std::panic;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use support::{brute_maximal_regions, random_grid};
use vne_core::grid::{edi, edi_with, find_vacant_regions, GridTransform};
use vne_core::{EmbedderMode, NetworkId, OccupancyGrid, Placement, SubstrateDims};
use vne_sim::oracle::{run_oracle_check, OracleParams};
use vne_sim::report::ScenarioComparison;
use vne_sim::{run_scenario, write_outputs, KeyValues, ScenarioConfig, ScenarioRun};

type Verdict = Result<String, String>;

fn preset(name: &str, overrides: &[(&str, &str)]) -> ScenarioConfig {
    let mut kv = KeyValues::preset(name).expect("bundled preset");
    for (k, v) in overrides {
        kv.set(k, v, "acceptance").expect("known key");
    }
    ScenarioConfig::resolve(&kv, None).expect("preset resolves")
}

fn within(x: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&x)
}

fn three_requests() -> Verdict {
    let start = Instant::now();
    let cfg = preset("fig1", &[("run.modes", "static-km,dynamic-km,dynamic-greedy")]);
    let run = run_scenario(&cfg).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let mut notes = Vec::new();
    let mut ok = elapsed < Duration::from_secs(1);
    for r in &run.runs {
        let s = &r.summary;
        let accepted: Vec<u64> = s.slots.iter().flat_map(|m| m.accepted.iter().map(|i| i.0)).collect();
        let rejected: Vec<(u64, u64)> = s
            .slots
            .iter()
            .flat_map(|m| m.rejected.iter().map(|i| (i.0, m.slot)))
            .collect();
        let expected = if s.mode == EmbedderMode::StaticKm {
            (vec![0, 1], vec![(2, 2)])
        } else {
            (vec![0, 1, 2], vec![])
        };
        ok &= (accepted.clone(), rejected.clone()) == expected;
        notes.push(format!("{}: accepted {accepted:?} rejected {rejected:?}", s.mode));
    }
    let detail = format!("{} in {elapsed:.2?}", notes.join("; "));
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn default_scenario(run: &ScenarioRun, elapsed: Duration) -> Verdict {
    use EmbedderMode::*;
    let pair = |a, b| run.report.pair(a, b).ok_or("missing paired comparison");
    let dk = pair(DynamicKm, StaticKm)?;
    let gk = pair(DynamicGreedy, DynamicKm)?;
    let reduction = dk.rejection_reduction_pct.ok_or("no rejection data")?.mean;
    let gain = dk.revenue_gain_pct.ok_or("no revenue data")?.mean;
    let greedy_diff = gk.rejection_difference.ok_or("no rejection data")?.mean;
    let detail = format!(
        "rejection reduction {reduction:.1}% (45..80), revenue gain {gain:.2}% (2..12), \
         greedy - dynamic rejection {greedy_diff:+.5} (<= 0), {elapsed:.1?}"
    );
    let ok = within(reduction, 45.0, 80.0)
        && within(gain, 2.0, 12.0)
        && greedy_diff <= 0.0
        && elapsed < Duration::from_secs(300);
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn large_scenario(default: &ScenarioRun) -> Verdict {
    let mut cfg = preset("paper-large-requests", &[]);
    cfg.baseline = None;
    let large = run_scenario(&cfg).map_err(|e| e.to_string())?;
    let cmp = ScenarioComparison::new(&large.rows, &default.rows, &EmbedderMode::HEURISTICS, 3);
    let p = &cmp.pooled;
    let ratio = p.rejection_ratio.ok_or("no rejection data")?;
    let change = p.revenue_change_pct.ok_or("no revenue data")?;
    let f: Vec<f64> = p.priority_factors.iter().map(|v| v.unwrap_or(f64::NAN)).collect();
    let per_mode: Vec<String> = cmp
        .per_mode
        .iter()
        .map(|s| {
            format!(
                "{} {:.2}x",
                s.mode.map_or("?", |m| m.name()),
                s.rejection_ratio.unwrap_or(f64::NAN)
            )
        })
        .collect();
    let detail = format!(
        "pooled rejection ratio {ratio:.2}x (1.3..2.2), revenue {change:+.1}% (-20..-6), \
         priority factors p1 {:.2}x p2 {:.2}x p3 {:.2}x (p1 largest); per mode {}",
        f[0],
        f[1],
        f[2],
        per_mode.join(", ")
    );
    let ok = within(ratio, 1.3, 2.2) && within(change, -20.0, -6.0) && f[0] > f[1] && f[0] > f[2];
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn oracle() -> Verdict {
    let start = Instant::now();
    let params = OracleParams::new(500, SubstrateDims::new(6, 6).unwrap(), 2024);
    let report = run_oracle_check(&params).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let ratios: Vec<String> = report
        .ratios
        .iter()
        .map(|(m, r)| format!("{m} {:.4}", r.unwrap_or(f64::NAN)))
        .collect();
    let detail = format!(
        "{} instances, {} violations, mean revenue/optimum {}, {elapsed:.1?}",
        report.instances,
        report.violations.len(),
        ratios.join(", ")
    );
    if report.passed() && elapsed < Duration::from_secs(120) {
        Ok(detail)
    } else {
        Err(format!("{detail}\n{}", report.render()))
    }
}

fn grid_properties() -> Verdict {
    const CASES: u32 = 1000;
    let start = Instant::now();
    let runner = || {
        TestRunner::new(Config {
            cases: CASES,
            failure_persistence: None,
            ..Config::default()
        })
    };
    let mut failures = Vec::new();
    let mut record = |name: &str, r: Result<(), String>| {
        if let Err(e) = r {
            failures.push(format!("{name}: {e}"));
        }
    };

    record(
        "round trip",
        runner()
            .run(
                &(random_grid(), 0usize..6, 0usize..6, 1usize..=3, 1usize..=3),
                |(g, i, j, f, td)| {
                    let p = Placement::new(NetworkId(99), i, j, f, td);
                    if let Ok(mut placed) = g.grid.with_placement(&p) {
                        placed.remove(NetworkId(99)).unwrap();
                        prop_assert_eq!(placed, g.grid);
                    }
                    Ok(())
                },
            )
            .map_err(|e| e.to_string()),
    );
    record(
        "no overlap",
        runner()
            .run(&random_grid(), |g| {
                let total: usize = g.placements.iter().map(Placement::area).sum();
                prop_assert_eq!(g.grid.occupied_count(), total);
                for p in &g.placements {
                    prop_assert!(p.cells().all(|(i, j)| g.grid.owner(i, j) == Some(p.network_id)));
                }
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );
    record(
        "edi symmetry",
        runner()
            .run(&random_grid(), |g| {
                let e = edi(&g.grid);
                for t in [
                    GridTransform::Transpose,
                    GridTransform::MirrorFrequency,
                    GridTransform::MirrorTime,
                ] {
                    prop_assert_eq!(edi(&g.grid.transformed(t)), e);
                }
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );
    let sizes = (3usize..=8, 3usize..=8).prop_flat_map(|(r, c)| (Just(r), Just(c), 1..=r - 2, 1..=c - 2));
    record(
        "corner vs interior",
        runner()
            .run(&sizes, |(rows, cols, k, m)| {
                let empty = OccupancyGrid::new(SubstrateDims::new(rows, cols).unwrap());
                let corner = edi_with(&empty, &Placement::new(NetworkId(0), 0, 0, k, m));
                let interior = edi_with(&empty, &Placement::new(NetworkId(0), 1, 1, k, m));
                prop_assert!(corner < interior);
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );
    record(
        "vacant regions",
        runner()
            .run(&(random_grid(), 1usize..=6, 1usize..=6), |(g, f, td)| {
                prop_assert_eq!(
                    find_vacant_regions(&g.grid, f, td),
                    brute_maximal_regions(&g.grid, f, td)
                );
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );

    let elapsed = start.elapsed();
    let detail = format!(
        "5 properties x {CASES} cases, {} failures, {elapsed:.1?}",
        failures.len()
    );
    if failures.is_empty() && elapsed < Duration::from_secs(60) {
        Ok(detail)
    } else {
        Err(format!("{detail}: {}", failures.join("; ")))
    }
}

fn read_dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for e in fs::read_dir(dir).unwrap().flatten() {
        let path = e.path();
        if path.is_file() {
            out.insert(e.file_name().to_string_lossy().into_owned(), fs::read(&path).unwrap());
        }
    }
    out
}

fn determinism(first: &ScenarioRun) -> Verdict {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    write_outputs(first, a.path()).map_err(|e| e.to_string())?;
    let again = run_scenario(&preset("paper-default", &[])).map_err(|e| e.to_string())?;
    write_outputs(&again, b.path()).map_err(|e| e.to_string())?;
    let (fa, fb) = (read_dir_bytes(a.path()), read_dir_bytes(b.path()));
    let csvs = fa.keys().filter(|k| k.ends_with(".csv")).count();
    let differing: Vec<&String> = fa.keys().filter(|k| fa.get(*k) != fb.get(*k)).collect();
    let detail = format!("{csvs} CSV files compared, {} differ", differing.len());
    if fa.len() == fb.len() && differing.is_empty() && csvs > 0 {
        Ok(detail)
    } else {
        Err(format!("{detail}: {differing:?}"))
    }
}

fn guarded(f: impl FnOnce() -> Verdict) -> Verdict {
    panic::catch_unwind(panic::AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    })
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Verdict)> = Vec::new();
    results.push(("1 three-request example", guarded(three_requests)));

    let start = Instant::now();
    let default = run_scenario(&preset("paper-default", &[]));
    let elapsed = start.elapsed();
    match &default {
        Ok(run) => {
            results.push(("2 default scenario", guarded(|| default_scenario(run, elapsed))));
            results.push(("3 large-request scenario", guarded(|| large_scenario(run))));
        }
        Err(e) => {
            results.push(("2 default scenario", Err(e.to_string())));
            results.push(("3 large-request scenario", Err(e.to_string())));
        }
    }
    results.push(("4 oracle dominance and feasibility", guarded(oracle)));
    results.push(("5 grid property suite", guarded(grid_properties)));
    match &default {
        Ok(run) => results.push(("6 determinism", guarded(|| determinism(run)))),
        Err(e) => results.push(("6 determinism", Err(e.to_string()))),
    }

    let mut failed = 0;
    for (name, verdict) in &results {
        match verdict {
            Ok(d) => println!("PASS  {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL  {name}: {d}");
            }
        }
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

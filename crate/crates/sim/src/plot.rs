//! Running-mean series for plotting, read back from per-slot CSVs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("input directory {0} does not exist")]
    MissingDir(PathBuf),
    #[error("no per-slot CSV files (slots-*.csv) in {0}")]
    NoInputs(PathBuf),
    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Per-slot values of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct SlotSeries {
    pub mode: String,
    pub revenue: Vec<f64>,
    pub rejection: Vec<Option<f64>>,
}

pub fn parse_slot_csv(path: &Path, text: &str) -> Result<SlotSeries, PlotError> {
    let bad = |line: usize, message: String| PlotError::Format {
        path: path.into(),
        line,
        message,
    };
    let mut mode = None;
    let mut columns: Option<(usize, usize)> = None;
    let mut revenue = Vec::new();
    let mut rejection = Vec::new();
    for (k, line) in text.lines().enumerate() {
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(m) = comment.trim().strip_prefix("mode = ") {
                mode = Some(m.trim().to_string());
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let Some((rev, rej)) = columns else {
            let find = |name| fields.iter().position(|f| f.trim() == name);
            match (find("revenue"), find("rejection_rate")) {
                (Some(a), Some(b)) => columns = Some((a, b)),
                _ => return Err(bad(k + 1, "header lacks revenue or rejection_rate".into())),
            }
            continue;
        };
        let get = |c: usize| {
            fields
                .get(c)
                .map(|f| f.trim())
                .ok_or_else(|| bad(k + 1, "short row".into()))
        };
        revenue.push(get(rev)?.parse().map_err(|_| bad(k + 1, "bad revenue".into()))?);
        let r = get(rej)?;
        rejection.push(if r.is_empty() {
            None
        } else {
            Some(r.parse().map_err(|_| bad(k + 1, "bad rejection_rate".into()))?)
        });
    }
    let mode = mode.ok_or_else(|| bad(0, "no `# mode = ` comment".into()))?;
    Ok(SlotSeries {
        mode,
        revenue,
        rejection,
    })
}

/// Cumulative mean of the defined values; `None` until the first one.
pub fn running_mean(values: impl IntoIterator<Item = Option<f64>>) -> Vec<Option<f64>> {
    let (mut sum, mut n) = (0.0, 0usize);
    values
        .into_iter()
        .map(|v| {
            if let Some(v) = v {
                sum += v;
                n += 1;
            }
            (n > 0).then(|| sum / n as f64)
        })
        .collect()
}

/// Slot-wise mean over runs of their running means.
fn average(series: &[Vec<Option<f64>>]) -> Vec<Option<f64>> {
    let len = series.iter().map(Vec::len).max().unwrap_or(0);
    (0..len)
        .map(|t| {
            let vals: Vec<f64> = series.iter().filter_map(|s| s.get(t).copied().flatten()).collect();
            (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
        })
        .collect()
}

fn render(mode: &str, metric: &str, runs: usize, series: &[Option<f64>]) -> String {
    let mut s = format!("# mode = {mode}\n# metric = running mean {metric}\n# runs = {runs}\nslot,running_mean\n");
    for (t, v) in series.iter().enumerate() {
        if let Some(v) = v {
            let _ = writeln!(s, "{t},{v}");
        }
    }
    s
}

/// Writes `plot-<mode>-revenue.csv` and `plot-<mode>-rejection.csv` into
/// `out_dir` for every mode found in `in_dir`.
pub fn emit_plot_data(in_dir: &Path, out_dir: &Path) -> Result<Vec<PathBuf>, PlotError> {
    if !in_dir.is_dir() {
        return Err(PlotError::MissingDir(in_dir.into()));
    }
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| PlotError::Io { path, source }
    };
    let mut files: Vec<PathBuf> = fs::read_dir(in_dir)
        .map_err(io(in_dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("slots-") && n.ends_with(".csv"))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(PlotError::NoInputs(in_dir.into()));
    }
    let mut by_mode: BTreeMap<String, Vec<SlotSeries>> = BTreeMap::new();
    for path in &files {
        let text = fs::read_to_string(path).map_err(io(path))?;
        let s = parse_slot_csv(path, &text)?;
        by_mode.entry(s.mode.clone()).or_default().push(s);
    }
    fs::create_dir_all(out_dir).map_err(io(out_dir))?;
    let mut written = Vec::new();
    for (mode, runs) in &by_mode {
        let revenue: Vec<_> = runs
            .iter()
            .map(|r| running_mean(r.revenue.iter().map(|&v| Some(v))))
            .collect();
        let rejection: Vec<_> = runs.iter().map(|r| running_mean(r.rejection.iter().copied())).collect();
        for (metric, series) in [("revenue", average(&revenue)), ("rejection", average(&rejection))] {
            let path = out_dir.join(format!("plot-{mode}-{metric}.csv"));
            fs::write(&path, render(mode, metric, runs.len(), &series)).map_err(io(&path))?;
            written.push(path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn running_mean_of_constant_is_constant() {
        let r = running_mean([Some(2.5); 6]);
        assert!(r.iter().all(|v| *v == Some(2.5)));
    }

    #[test]
    fn running_mean_skips_undefined() {
        assert_eq!(
            running_mean([None, Some(1.0), None, Some(0.0)]),
            vec![None, Some(1.0), Some(1.0), Some(0.5)]
        );
    }

    #[test]
    fn parses_slot_csv() {
        let text = "# mode = static-km\nslot,revenue,rejection_rate,accepted\n0,1.5,,0\n1,2,0.25,1\n";
        let s = parse_slot_csv(Path::new("x"), text).unwrap();
        assert_eq!(s.mode, "static-km");
        assert_eq!(s.revenue, vec![1.5, 2.0]);
        assert_eq!(s.rejection, vec![None, Some(0.25)]);
        assert!(parse_slot_csv(Path::new("x"), "slot,revenue,rejection_rate\n").is_err());
    }
}

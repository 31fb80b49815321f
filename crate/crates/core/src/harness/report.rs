//! Comparison of scripted runs across monitor levels.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::bench::{HarnessError, MessageRecord};
use super::stats::median;
use crate::monitor::Level;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelStats {
    pub level: Level,
    pub iterations: usize,
    /// Median latency per message index, index 1 first.
    pub per_index_ms: Vec<f64>,
    pub median_ms: f64,
    pub median_ms_excluding_first: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub messages: usize,
    pub utterances: Vec<String>,
    pub levels: Vec<LevelStats>,
}

fn level_of(path: &Path) -> Option<Level> {
    let stem = path.file_stem()?.to_str()?;
    let (level, iter) = stem.split_once("-iter")?;
    iter.parse::<usize>().ok()?;
    level.parse().ok()
}

fn read_csv(path: &Path) -> Result<Vec<MessageRecord>, HarnessError> {
    let err = |e: csv::Error| HarnessError::Input {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut r = csv::Reader::from_path(path).map_err(err)?;
    r.deserialize()
        .collect::<Result<Vec<MessageRecord>, _>>()
        .map_err(err)
}

impl BenchReport {
    /// Reads every `<level>-iterNNN.csv` in `dir`.
    pub fn load(dir: impl AsRef<Path>) -> Result<BenchReport, HarnessError> {
        let dir = dir.as_ref();
        let entries = std::fs::read_dir(dir).map_err(|e| HarnessError::Input {
            path: dir.to_path_buf(),
            message: e.to_string(),
        })?;
        let mut files: BTreeMap<Level, Vec<PathBuf>> = BTreeMap::new();
        for entry in entries.flatten() {
            let path = entry.path();
            if path.extension().is_some_and(|e| e == "csv") {
                if let Some(level) = level_of(&path) {
                    files.entry(level).or_default().push(path);
                }
            }
        }
        let mut runs = BTreeMap::new();
        for (level, mut paths) in files {
            paths.sort();
            let iterations = paths
                .iter()
                .map(|p| read_csv(p).map(|r| (p.clone(), r)))
                .collect::<Result<Vec<_>, _>>()?;
            runs.insert(level, iterations);
        }
        BenchReport::from_runs(runs)
    }

    /// `runs` maps each level to its iterations, each a file name and its rows.
    pub fn from_runs(
        runs: BTreeMap<Level, Vec<(PathBuf, Vec<MessageRecord>)>>,
    ) -> Result<BenchReport, HarnessError> {
        let runs: BTreeMap<_, _> = runs
            .into_iter()
            .filter(|(_, its)| !its.is_empty())
            .collect();
        if runs.len() < 2 {
            return Err(HarnessError::Report(format!(
                "need CSVs from at least two monitor levels, found {}",
                runs.keys()
                    .map(|l| l.as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            )));
        }
        let mut messages = None;
        let mut utterances = Vec::new();
        let mut levels = Vec::new();
        for (level, iterations) in &runs {
            let mut by_index: Vec<Vec<f64>> = Vec::new();
            for (path, records) in iterations {
                match messages {
                    None => {
                        messages = Some(records.len());
                        utterances = records.iter().map(|r| r.utterance.clone()).collect();
                    }
                    Some(n) if n != records.len() => {
                        return Err(HarnessError::Report(format!(
                            "{} has {} messages, expected {n}",
                            path.display(),
                            records.len()
                        )));
                    }
                    Some(_) => {}
                }
                by_index.resize(records.len(), Vec::new());
                for (i, r) in records.iter().enumerate() {
                    by_index[i].push(r.latency_ms);
                }
            }
            let per_index_ms: Vec<f64> = by_index
                .iter()
                .map(|xs| median(xs).unwrap_or(0.0))
                .collect();
            let all: Vec<f64> = by_index.iter().flatten().copied().collect();
            let rest: Vec<f64> = by_index.iter().skip(1).flatten().copied().collect();
            levels.push(LevelStats {
                level: *level,
                iterations: iterations.len(),
                per_index_ms,
                median_ms: median(&all).unwrap_or(0.0),
                median_ms_excluding_first: median(&rest).unwrap_or(0.0),
            });
        }
        Ok(BenchReport {
            messages: messages.unwrap_or(0),
            utterances,
            levels,
        })
    }

    pub fn level(&self, level: Level) -> Option<&LevelStats> {
        self.levels.iter().find(|s| s.level == level)
    }

    /// Per-index `a - b` medians, when both levels are present.
    pub fn deltas(&self, a: Level, b: Level) -> Option<Vec<f64>> {
        let (a, b) = (self.level(a)?, self.level(b)?);
        Some(
            a.per_index_ms
                .iter()
                .zip(&b.per_index_ms)
                .map(|(x, y)| x - y)
                .collect(),
        )
    }

    /// Real minus None, medians over messages 2.. .
    pub fn overhead_vs_none_ms(&self) -> Option<f64> {
        Some(
            self.level(Level::Real)?.median_ms_excluding_first
                - self.level(Level::None)?.median_ms_excluding_first,
        )
    }

    /// Real over Dummy, medians over messages 2.. .
    pub fn ratio_vs_dummy(&self) -> Option<f64> {
        let d = self.level(Level::Dummy)?.median_ms_excluding_first;
        Some(self.level(Level::Real)?.median_ms_excluding_first / d)
    }

    /// Tab-separated, one row per message index.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("message_index");
        for l in &self.levels {
            let _ = write!(out, "\t{}_ms", l.level);
        }
        let pairs = [(Level::Real, Level::None), (Level::Real, Level::Dummy)];
        let deltas: Vec<_> = pairs
            .iter()
            .filter_map(|&(a, b)| Some(((a, b), self.deltas(a, b)?)))
            .collect();
        for ((a, b), _) in &deltas {
            let _ = write!(out, "\t{a}_minus_{b}_ms");
        }
        out.push('\n');
        for i in 0..self.messages {
            let _ = write!(out, "{}", i + 1);
            for l in &self.levels {
                let _ = write!(out, "\t{:.4}", l.per_index_ms[i]);
            }
            for (_, d) in &deltas {
                let _ = write!(out, "\t{:.4}", d[i]);
            }
            out.push('\n');
        }
        out
    }

    pub fn write_tsv(&self, path: impl AsRef<Path>) -> Result<(), HarnessError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_tsv()).map_err(|e| HarnessError::Output {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:>4}  {:<36}", "msg", "utterance")?;
        for l in &self.levels {
            write!(f, "  {:>10}", format!("{}_ms", l.level))?;
        }
        let real_none = self.deltas(Level::Real, Level::None);
        let real_dummy = self.deltas(Level::Real, Level::Dummy);
        if real_none.is_some() {
            write!(f, "  {:>10}", "real-none")?;
        }
        if real_dummy.is_some() {
            write!(f, "  {:>10}", "real-dummy")?;
        }
        writeln!(f)?;
        for i in 0..self.messages {
            let mut u = self.utterances.get(i).cloned().unwrap_or_default();
            if u.chars().count() > 36 {
                u = u.chars().take(33).collect::<String>() + "...";
            }
            write!(f, "{:>4}  {u:<36}", i + 1)?;
            for l in &self.levels {
                write!(f, "  {:>10.3}", l.per_index_ms[i])?;
            }
            for d in [&real_none, &real_dummy].into_iter().flatten() {
                write!(f, "  {:>10.3}", d[i])?;
            }
            writeln!(f)?;
        }
        for l in &self.levels {
            writeln!(
                f,
                "{}: {} iterations, median {:.3} ms, excluding message 1 {:.3} ms",
                l.level, l.iterations, l.median_ms, l.median_ms_excluding_first
            )?;
        }
        if let Some(d) = self.overhead_vs_none_ms() {
            writeln!(f, "real - none (excluding message 1): {d:.3} ms")?;
        }
        if let Some(r) = self.ratio_vs_dummy() {
            writeln!(f, "real / dummy (excluding message 1): {r:.3}")?;
        }
        Ok(())
    }
}

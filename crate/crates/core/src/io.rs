//! File formats: series, spectrum, bispectrum grid, heatmap, snapshot CSVs,
//! the hotspot report and the run manifest.
//!
//! Floats are written with Rust's shortest round-trip formatting, so reading
//! a file back yields bit-identical values.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::series::TimeSeries;
use crate::spectral::{bin_to_omega, BicoherenceMap, BispectrumGrid, HotspotReport};

pub const SERIES_HEADER: &str = "t,value";
pub const SPECTRUM_HEADER: &str = "bin,frequency_rad_per_sample,power";
pub const BISPECTRUM_HEADER: &str = "k1,k2,re,im,magnitude,bicoherence";
pub const SNAPSHOT_HEADER: &str = "x,u";

/// Heatmaps are max-pooled down to at most this many `k1` rows.
pub const HEATMAP_MAX_ROWS: usize = 512;

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| Error::FileUnreadable {
            path: path.to_path_buf(),
            source,
        })
}

pub fn write_series_csv(path: &Path, series: &TimeSeries) -> Result<()> {
    let mut out = create(path)?;
    writeln!(out, "{SERIES_HEADER}")?;
    for (t, v) in series.values().iter().enumerate() {
        writeln!(out, "{t},{v}")?;
    }
    out.flush()?;
    Ok(())
}

/// Read a `t,value` CSV. The `t` column is ignored beyond being present.
pub fn read_series_csv(path: &Path) -> Result<TimeSeries> {
    let mut lines = open(path)?.lines();
    let header = lines
        .next()
        .transpose()?
        .ok_or_else(|| Error::Parse(format!("{}: empty file", path.display())))?;
    if header.trim() != SERIES_HEADER {
        return Err(Error::Parse(format!(
            "{}: expected header `{SERIES_HEADER}`, found `{}`",
            path.display(),
            header.trim()
        )));
    }
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v = line
            .split(',')
            .nth(1)
            .and_then(|s| s.trim().parse::<f64>().ok())
            .ok_or_else(|| {
                Error::Parse(format!("{}: bad row {}: `{line}`", path.display(), i + 2))
            })?;
        values.push(v);
    }
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    TimeSeries::from_values(values, label)
}

/// One-sided power spectrum of a length-`n` transform.
pub fn write_spectrum_csv(path: &Path, power: &[f64], n: usize) -> Result<()> {
    let mut out = create(path)?;
    writeln!(out, "{SPECTRUM_HEADER}")?;
    for (k, p) in power.iter().enumerate() {
        writeln!(out, "{k},{},{p}", bin_to_omega(k, n))?;
    }
    out.flush()?;
    Ok(())
}

/// Principal-domain rows in row-major order.
pub fn write_bispectrum_csv(
    path: &Path,
    grid: &BispectrumGrid,
    bic: &BicoherenceMap,
) -> Result<()> {
    let mut out = create(path)?;
    writeln!(out, "{BISPECTRUM_HEADER}")?;
    for (((k1, k2), v), b) in grid.cells().zip(grid.values()).zip(bic.values()) {
        writeln!(out, "{k1},{k2},{},{},{},{b}", v.re, v.im, v.norm())?;
    }
    out.flush()?;
    Ok(())
}

/// Dense bicoherence matrix, rows `k1`, columns `k2`, max-pooled into square
/// blocks so the file stays under [`HEATMAP_MAX_ROWS`] rows. The first column
/// and the header carry the lowest bin of each block.
pub fn write_heatmap_csv(path: &Path, bic: &BicoherenceMap) -> Result<()> {
    let dense = bic.to_dense();
    let rows = dense.len();
    let cols = dense.first().map_or(0, Vec::len);
    let block = rows.div_ceil(HEATMAP_MAX_ROWS).max(1);
    let mut out = create(path)?;
    write!(out, "k1\\k2")?;
    for c in (0..cols).step_by(block) {
        write!(out, ",{c}")?;
    }
    writeln!(out)?;
    for r in (0..rows).step_by(block) {
        write!(out, "{r}")?;
        for c in (0..cols).step_by(block) {
            let m = dense[r..(r + block).min(rows)]
                .iter()
                .flat_map(|row| &row[c..(c + block).min(cols)])
                .cloned()
                .fold(0.0, f64::max);
            write!(out, ",{m}")?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_snapshot_csv(path: &Path, x: &[f64], u: &[f64]) -> Result<()> {
    let mut out = create(path)?;
    writeln!(out, "{SNAPSHOT_HEADER}")?;
    for (x, u) in x.iter().zip(u) {
        writeln!(out, "{x},{u}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn snapshot_file_name(step: u64) -> String {
    format!("snap_{step:08}.csv")
}

pub fn write_report(path: &Path, report: &HotspotReport) -> Result<()> {
    let mut out = create(path)?;
    out.write_all(report.to_text().as_bytes())?;
    out.flush()?;
    Ok(())
}

/// Keys of a manifest that describe the run rather than configure it.
pub const MANIFEST_RESERVED: [&str; 5] = ["command", "version", "seed", "input", "output"];

/// Record of one command invocation, written as `key=value` lines.
///
/// Everything under `config` uses the command's long flag names, so the file
/// can be fed back through `--config` to repeat the run.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RunManifest {
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub version: String,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            ..Default::default()
        }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.config.insert(key.to_string(), value.to_string());
        self
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("# run manifest\n");
        s.push_str(&format!("command={}\n", self.command));
        s.push_str(&format!("version={}\n", self.version));
        if let Some(seed) = self.seed {
            s.push_str(&format!("seed={seed}\n"));
        }
        for p in &self.inputs {
            s.push_str(&format!("input={}\n", p.display()));
        }
        for p in &self.outputs {
            s.push_str(&format!("output={}\n", p.display()));
        }
        for (k, v) in &self.config {
            s.push_str(&format!("{k}={v}\n"));
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = create(path)?;
        out.write_all(self.to_text().as_bytes())?;
        out.flush()?;
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut m = RunManifest::default();
        for pairs in parse_key_values(text)? {
            let (k, v) = pairs;
            match k.as_str() {
                "command" => m.command = v,
                "version" => m.version = v,
                "seed" => {
                    m.seed = Some(
                        v.parse()
                            .map_err(|_| Error::Parse(format!("bad seed `{v}`")))?,
                    )
                }
                "input" => m.inputs.push(v.into()),
                "output" => m.outputs.push(v.into()),
                _ => {
                    m.config.insert(k, v);
                }
            }
        }
        Ok(m)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::FileUnreadable {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }
}

/// `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Error::Parse(format!("expected key=value, found `{l}`")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{bicoherence, bispectrum, dft_values};

    #[test]
    fn series_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        let s = TimeSeries::from_values(vec![0.1, -1.0 / 3.0, 1e-300, 12345.678], "s").unwrap();
        write_series_csv(&p, &s).unwrap();
        let back = read_series_csv(&p).unwrap();
        assert_eq!(back.values(), s.values());
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("t,value\n0,0.1\n"));
    }

    #[test]
    fn series_parse_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        std::fs::write(&p, "a,b\n0,1\n").unwrap();
        assert!(matches!(read_series_csv(&p), Err(Error::Parse(_))));
        std::fs::write(&p, "t,value\n0,1\n1,x\n").unwrap();
        assert!(matches!(read_series_csv(&p), Err(Error::Parse(_))));
        assert!(matches!(
            read_series_csv(&dir.path().join("missing.csv")),
            Err(Error::FileUnreadable { .. })
        ));
    }

    #[test]
    fn grid_files() {
        let dir = tempfile::tempdir().unwrap();
        let x: Vec<f64> = (0..16).map(|t| (t as f64 * 0.7).sin()).collect();
        let g = bispectrum(&dft_values(&x).unwrap()).unwrap();
        let b = bicoherence(&g);
        let p = dir.path().join("b.csv");
        write_bispectrum_csv(&p, &g, &b).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], BISPECTRUM_HEADER);
        assert_eq!(lines.len(), g.cell_count() + 1);
        assert!(
            lines[1].starts_with("0,0,")
                && lines[2].starts_with("1,0,")
                && lines[3].starts_with("1,1,")
        );
        let h = dir.path().join("h.csv");
        write_heatmap_csv(&h, &b).unwrap();
        let text = std::fs::read_to_string(&h).unwrap();
        assert_eq!(text.lines().count(), 10);
        assert_eq!(text.lines().next().unwrap(), "k1\\k2,0,1,2,3,4");
    }

    #[test]
    fn spectrum_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("p.csv");
        write_spectrum_csv(&p, &[1.0, 2.0, 3.0], 4).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.contains(&format!("1,{},2\n", std::f64::consts::FRAC_PI_2)));
    }

    #[test]
    fn manifest_round_trip() {
        let mut m = RunManifest::new("generate triad");
        m.seed = Some(7);
        m.set("omega-a", 0.22).set("n", 4096);
        m.outputs.push("series.csv".into());
        let back = RunManifest::parse(&m.to_text()).unwrap();
        assert_eq!(back, m);
        assert!(RunManifest::parse("oops").is_err());
    }
}

//! File formats: fields as JSON arrays of `[re, im]` pairs indexed
//! `n = -N..N`, and trajectory dumps as a one-line JSON header followed by
//! a CSV body of `t` and interleaved re/im per mode.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use bnls_core::flow::{FlowSpec, FlowVariant, TrajectoryRecord};
use bnls_core::{SpectralField, C64};

#[derive(Debug, Serialize, Deserialize)]
pub struct FieldFile {
    pub cutoff: usize,
    /// `[re, im]` pairs for `n = -N..=N`.
    pub coeffs: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<f64>,
    pub config: String,
    pub config_blob_sha256: String,
}

impl FieldFile {
    pub fn from_field(f: &SpectralField, config: String) -> Self {
        let hash = crate::config::blob_hash(&config);
        FieldFile {
            cutoff: f.cutoff(),
            coeffs: f.coeffs().iter().map(|c| [c.re, c.im]).collect(),
            seed: None,
            alpha: None,
            config,
            config_blob_sha256: hash,
        }
    }

    pub fn to_field(&self) -> Result<SpectralField> {
        if self.coeffs.len() != 2 * self.cutoff + 1 {
            bail!(
                "field file claims cutoff {} but carries {} coefficients",
                self.cutoff,
                self.coeffs.len()
            );
        }
        Ok(SpectralField::from_coeffs(
            self.cutoff,
            self.coeffs.iter().map(|p| C64::new(p[0], p[1])).collect(),
        ))
    }
}

pub fn write_field(path: &Path, file: &FieldFile) -> Result<()> {
    let mut text = serde_json::to_string_pretty(file)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn read_field(path: &Path) -> Result<FieldFile> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}

fn variant_name(v: FlowVariant) -> &'static str {
    match v {
        FlowVariant::Original => "original",
        FlowVariant::Renormalized => "renormalized",
        FlowVariant::Resonant => "resonant",
        FlowVariant::GaugedTruncated => "gauged-truncated",
    }
}

pub fn variant_from_name(s: &str) -> Result<FlowVariant> {
    Ok(match s {
        "original" => FlowVariant::Original,
        "renormalized" => FlowVariant::Renormalized,
        "resonant" => FlowVariant::Resonant,
        "gauged-truncated" => FlowVariant::GaugedTruncated,
        other => bail!("unknown flow variant {:?}", other),
    })
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TrajectoryHeader {
    pub variant: String,
    pub cutoff: usize,
    pub dt: f64,
    pub t_end: f64,
    pub sample_stride: usize,
    pub halving_tol: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ensemble_alpha: Option<f64>,
    pub config: String,
    pub config_blob_sha256: String,
}

/// One-line JSON header, then CSV: `t, re_{-N}, im_{-N}, ..., re_N, im_N`.
pub fn write_trajectory(path: &Path, traj: &TrajectoryRecord, config: String) -> Result<()> {
    use std::io::Write;
    let header = TrajectoryHeader {
        variant: variant_name(traj.spec.variant).to_string(),
        cutoff: traj.spec.cutoff,
        dt: traj.spec.dt,
        t_end: traj.spec.t_end,
        sample_stride: traj.spec.sample_stride,
        halving_tol: traj.spec.halving_tol,
        seed: traj.ensemble.as_ref().map(|e| e.seed()),
        ensemble_alpha: traj.ensemble.as_ref().map(|e| e.alpha()),
        config_blob_sha256: crate::config::blob_hash(&config),
        config,
    };
    let file = std::fs::File::create(path)
        .with_context(|| format!("creating {}", path.display()))?;
    let mut out = std::io::BufWriter::new(file);
    writeln!(out, "{}", serde_json::to_string(&header)?)?;
    let n0 = traj.spec.cutoff as i64;
    let mut cols = vec!["t".to_string()];
    for n in -n0..=n0 {
        cols.push(format!("re_{}", n));
        cols.push(format!("im_{}", n));
    }
    writeln!(out, "{}", cols.join(","))?;
    for (t, state) in traj.times.iter().zip(traj.states.iter()) {
        let mut row = Vec::with_capacity(2 * state.coeffs().len() + 1);
        row.push(format!("{}", t));
        for c in state.coeffs() {
            row.push(format!("{}", c.re));
            row.push(format!("{}", c.im));
        }
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_trajectory(path: &Path) -> Result<(TrajectoryHeader, TrajectoryRecord)> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    let header: TrajectoryHeader = serde_json::from_str(
        lines.next().context("trajectory dump is empty")?,
    )?;
    let _columns = lines.next().context("missing CSV column row")?;
    let width = 2 * header.cutoff + 1;
    let mut times = Vec::new();
    let mut states = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let t: f64 = parts
            .next()
            .with_context(|| format!("row {}: missing time", i))?
            .parse()?;
        let mut coeffs = Vec::with_capacity(width);
        loop {
            let Some(re) = parts.next() else { break };
            let im = parts.next().with_context(|| format!("row {}: dangling re", i))?;
            coeffs.push(C64::new(re.parse()?, im.parse()?));
        }
        if coeffs.len() != width {
            bail!("row {}: expected {} modes, found {}", i, width, coeffs.len());
        }
        times.push(t);
        states.push(SpectralField::from_coeffs(header.cutoff, coeffs));
    }
    let spec = FlowSpec {
        variant: variant_from_name(&header.variant)?,
        cutoff: header.cutoff,
        dt: header.dt,
        t_end: header.t_end,
        sample_stride: header.sample_stride,
        halving_tol: header.halving_tol,
    };
    let ensemble = header
        .seed
        .map(|s| bnls_core::GaussianEnsemble::new(s, header.cutoff, header.ensemble_alpha.unwrap_or(0.0)));
    Ok((header, TrajectoryRecord { spec, times, states, ensemble }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use bnls_core::flow::{evolve_truncated, FlowSpec, FlowVariant};
    use bnls_core::random::sample_data;

    #[test]
    fn field_round_trip() {
        let f = sample_data(3, 6, 0.5);
        let file = FieldFile::from_field(&f, "seed = 3\n".into());
        let dir = std::env::temp_dir().join("bnls_field_test.json");
        write_field(&dir, &file).unwrap();
        let back = read_field(&dir).unwrap().to_field().unwrap();
        assert_eq!(back, f);
        std::fs::remove_file(dir).ok();
    }

    #[test]
    fn trajectory_round_trip() {
        let f0 = sample_data(4, 4, 1.0);
        let spec = FlowSpec::new(FlowVariant::Renormalized, 4, 1e-3, 0.05).with_stride(10);
        let traj = evolve_truncated(&f0, &spec, None).unwrap();
        let path = std::env::temp_dir().join("bnls_traj_test.dump");
        write_trajectory(&path, &traj, "n = 4\n".into()).unwrap();
        let (header, back) = read_trajectory(&path).unwrap();
        assert_eq!(header.cutoff, 4);
        assert_eq!(back.times.len(), traj.times.len());
        for (a, b) in back.states.iter().zip(traj.states.iter()) {
            assert_eq!(a, b, "shortest round-trip floats reproduce the states");
        }
        std::fs::remove_file(path).ok();
    }
}

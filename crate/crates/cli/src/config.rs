//! Run configuration, provenance header and output plumbing.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use s3radon::io::AngleUnit;
use s3radon::Rules;
use sha2::{Digest, Sha256};

use crate::{Common, Unit};

/// Resolved settings of one invocation, hashed into output headers.
pub struct RunConfig {
    pub command: &'static str,
    pub rules: Rules,
    pub unit: AngleUnit,
    entries: Vec<(String, String)>,
}

impl RunConfig {
    pub fn new(command: &'static str, common: &Common) -> Result<Self> {
        let rules = Rules::new(common.circle_nodes, common.sphere_degree, common.torus_nodes)
            .context("invalid quadrature resolution")?;
        let unit = match common.angle_unit {
            Unit::Deg => AngleUnit::Degrees,
            Unit::Rad => AngleUnit::Radians,
        };
        let mut cfg = RunConfig { command, rules, unit, entries: Vec::new() };
        cfg.set("circle-nodes", common.circle_nodes);
        cfg.set("sphere-degree", common.sphere_degree);
        cfg.set("torus-nodes", common.torus_nodes);
        cfg.set("seed", common.seed);
        cfg.set("angle-unit", format!("{:?}", common.angle_unit).to_lowercase());
        Ok(cfg)
    }

    /// Records a setting. Floats are recorded by their exact bits.
    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn set_f64(&mut self, key: &str, value: f64) {
        self.set(key, format!("{value:e}"));
    }

    /// Records the digest of an input file.
    pub fn set_file(&mut self, key: &str, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.set(key, hex::encode(Sha256::digest(&bytes)));
        Ok(())
    }

    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.command.as_bytes());
        for (k, v) in &self.entries {
            h.update(format!("\n{k}={v}").as_bytes());
        }
        hex::encode(h.finalize())
    }

    /// Provenance comment lines (without the leading `#`).
    pub fn header(&self) -> Vec<String> {
        let settings: Vec<String> =
            self.entries.iter().filter(|(k, _)| !k.ends_with("-sha256")).map(|(k, v)| format!("{k}={v}")).collect();
        vec![
            format!("s3radon {} {}", env!("CARGO_PKG_VERSION"), self.command),
            format!("config-sha256 {}", self.hash()),
            settings.join(" "),
        ]
    }
}

/// Output sink: a file when a path is given, standard output otherwise.
pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

/// Parses `<n_h>x<n_r>x<n_rho>`.
pub fn parse_grid(s: &str) -> Result<(usize, usize, usize)> {
    let parts: Vec<&str> = s.split(['x', 'X']).collect();
    if parts.len() != 3 {
        bail!("grid '{s}' must have the form <n_h>x<n_r>x<n_rho>");
    }
    let mut n = [0usize; 3];
    for (slot, p) in n.iter_mut().zip(&parts) {
        *slot = p.trim().parse().with_context(|| format!("grid '{s}': '{p}' is not a count"))?;
        if *slot == 0 {
            bail!("grid '{s}' has an empty axis");
        }
    }
    Ok((n[0], n[1], n[2]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("4x5x6").unwrap(), (4, 5, 6));
        assert!(parse_grid("4x5").is_err());
        assert!(parse_grid("4x0x6").is_err());
        assert!(parse_grid("4xax6").is_err());
    }
}

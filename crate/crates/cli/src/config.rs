use anyhow::Result;
use finegraph_core::kernels::{BfsOptions, PrOptions};
use finegraph_core::network::NetConfig;
use finegraph_core::projection::{MeasureOptions, SystemParams};
use finegraph_core::{GeneratorParams, MachineConfig};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Optional TOML file given with `--config`. Each section overrides the
/// built-in defaults; command-line flags override the file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub gen: GeneratorParams,
    pub machine: MachineConfig,
    pub pagerank: PrOptions,
    pub bfs: BfsOptions,
    pub measure: MeasureOptions,
    pub system: SystemParams,
    pub net: NetConfig,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path).map_err(finegraph_core::Error::from)?;
        let cfg: FileConfig = toml::from_str(&text).map_err(finegraph_core::Error::from)?;
        cfg.machine.validate()?;
        Ok(cfg)
    }
}

/// Overwrites `slot` when the flag was given.
pub fn set<T>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_sections() {
        let cfg: FileConfig = toml::from_str("[machine]\nnode_count = 4\n[net]\nlink_bandwidth = 4000.0\n").unwrap();
        assert_eq!(cfg.machine.node_count, 4);
        assert_eq!(cfg.machine.lanes_per_node, 2048);
        assert_eq!(cfg.net.link_bandwidth, 4000.0);
        assert_eq!(cfg.net.duration_ns, 5000);
    }

    #[test]
    fn unknown_section_rejected() {
        assert!(toml::from_str::<FileConfig>("[nope]\nx = 1\n").is_err());
    }

    #[test]
    fn flags_win() {
        let mut v = 3;
        set(&mut v, None);
        assert_eq!(v, 3);
        set(&mut v, Some(5));
        assert_eq!(v, 5);
    }
}

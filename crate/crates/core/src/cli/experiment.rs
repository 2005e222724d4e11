use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::env::{
    make_axis_instance, make_diverse_margin_instance, make_sphere_hard_instance, GeneratorOptions,
    Instance,
};
use crate::error::{Error, Result};
use crate::numkit::RngStream;
use crate::sim::{RunConfig, SweepAxis};

/// Parameters for building an instance on the fly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GenerateSpec {
    DiverseMargin {
        d: usize,
        num_arms: usize,
        num_clients: usize,
        #[serde(default)]
        gap_floor: f64,
        seed: u64,
    },
    SphereHard {
        d: usize,
        num_clients: usize,
        radius: f64,
        seed: u64,
    },
    AxisNecessity {
        num_clients: usize,
        seed: u64,
    },
}

impl GenerateSpec {
    pub fn build(&self) -> Result<Instance> {
        let opts = GeneratorOptions::default();
        match *self {
            GenerateSpec::DiverseMargin {
                d,
                num_arms,
                num_clients,
                gap_floor,
                seed,
            } => make_diverse_margin_instance(
                d,
                num_arms,
                num_clients,
                gap_floor,
                &RngStream::new(seed),
                &opts,
            ),
            GenerateSpec::SphereHard {
                d,
                num_clients,
                radius,
                seed,
            } => make_sphere_hard_instance(d, num_clients, radius, &RngStream::new(seed), &opts),
            GenerateSpec::AxisNecessity { num_clients, seed } => {
                make_axis_instance(num_clients, &RngStream::new(seed))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceSource {
    /// Instance JSON file, relative to the experiment file.
    Path(PathBuf),
    Generate(GenerateSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub seeds: Vec<u64>,
}

/// An experiment description as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub instance: InstanceSource,
    pub run: RunConfig,
    /// Output directory, relative to the experiment file.
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
}

/// An experiment file with relative paths resolved against its directory.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub file: ExperimentFile,
    pub base_dir: PathBuf,
}

impl Experiment {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: ExperimentFile = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self { file, base_dir })
    }

    pub fn resolve_path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn instance(&self) -> Result<Instance> {
        match &self.file.instance {
            InstanceSource::Path(p) => {
                let path = self.resolve_path(p);
                Instance::load(&path).map_err(|e| match e {
                    Error::Io { .. } | Error::Json(_) => {
                        Error::Config(format!("instance {}: {e}", path.display()))
                    }
                    other => other,
                })
            }
            InstanceSource::Generate(spec) => spec.build(),
        }
    }

    pub fn out_dir(&self, flag: Option<&Path>) -> Result<PathBuf> {
        match (flag, &self.file.out) {
            (Some(p), _) => Ok(p.to_path_buf()),
            (None, Some(p)) => Ok(self.resolve_path(p)),
            (None, None) => Err(Error::Config(
                "no output directory: set `out` or pass --out".into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_instance_sources() {
        let a = r#"{"instance":{"path":"inst.json"},
            "run":{"algorithm":"local_only","m":2,"t":8,"privacy":{"epsilon":1,"delta":1e-5},"beta":0.1,"seed":1}}"#;
        let f: ExperimentFile = serde_json::from_str(a).unwrap();
        assert_eq!(f.instance, InstanceSource::Path("inst.json".into()));
        let b = r#"{"instance":{"generate":{"kind":"axis_necessity","num_clients":3,"seed":2}},
            "run":{"algorithm":"robin","m":3,"t":8,"privacy":{"epsilon":1,"delta":1e-5},"beta":0.1,"seed":1},
            "sweep":{"axis":"epsilon","values":[0.5,1],"seeds":[1,2]}}"#;
        let f: ExperimentFile = serde_json::from_str(b).unwrap();
        assert!(matches!(
            f.instance,
            InstanceSource::Generate(GenerateSpec::AxisNecessity { num_clients: 3, .. })
        ));
        assert_eq!(f.sweep.unwrap().seeds, vec![1, 2]);
    }

    #[test]
    fn rejects_unknown_keys() {
        let bad = r#"{"instance":{"path":"x"},"run":{"algorithm":"robin","m":2,"t":8,
            "privacy":{"epsilon":1,"delta":1e-5},"beta":0.1,"seed":1},"extra":true}"#;
        assert!(serde_json::from_str::<ExperimentFile>(bad).is_err());
        let bad_gen = r#"{"instance":{"generate":{"kind":"axis_necessity","num_clients":3,"seed":2,"d":4}},
            "run":{"algorithm":"robin","m":2,"t":8,"privacy":{"epsilon":1,"delta":1e-5},"beta":0.1,"seed":1}}"#;
        assert!(serde_json::from_str::<ExperimentFile>(bad_gen).is_err());
    }
}

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::contraction::{truncate, wired_contract, WiredContraction};
use crate::corpus::corpus;
use crate::generators::{
    zd_box, zd_box_wired, AugmentedGwSource, DecoratedTreeSource, GaltonWatsonSource, OffspringDistribution,
    RegularTreeSource, ZdSource,
};
use crate::network::{Conductance, Network, VertexId};
use crate::rng::split_seed;
use crate::source::NetworkSource;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Operation {
    SampleUst,
    SampleOust,
    DynamicsRun,
    Certify,
    ThreeEnds,
    GwEndsTrend,
    Reversibility,
}

impl Operation {
    pub const ALL: [Operation; 7] = [
        Operation::SampleUst,
        Operation::SampleOust,
        Operation::DynamicsRun,
        Operation::Certify,
        Operation::ThreeEnds,
        Operation::GwEndsTrend,
        Operation::Reversibility,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Operation::SampleUst => "sample-ust",
            Operation::SampleOust => "sample-oust",
            Operation::DynamicsRun => "dynamics-run",
            Operation::Certify => "certify",
            Operation::ThreeEnds => "three-ends",
            Operation::GwEndsTrend => "gw-ends-trend",
            Operation::Reversibility => "reversibility",
        }
    }
}

impl FromStr for Operation {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Operation::ALL
            .into_iter()
            .find(|op| op.name() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown operation {s:?}")))
    }
}

/// Where a network comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SourceSpec {
    /// Graph file; `keep` selects the kept set of a wired contraction.
    File {
        path: PathBuf,
        #[serde(default)]
        keep: Option<Vec<u64>>,
    },
    /// One named fixture of the certification corpus, or all of them.
    Corpus {
        #[serde(default)]
        name: Option<String>,
    },
    /// The box `{0,…,side−1}^dim`; `margin` wires everything outside the inner box.
    ZdBox {
        dim: usize,
        side: u64,
        #[serde(default)]
        margin: Option<u64>,
    },
    Zd {
        dim: usize,
    },
    RegularTree {
        degree: u64,
    },
    /// Without `seed`, each replica grows its own tree from the master seed.
    Gw {
        offspring: Vec<String>,
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default)]
        survive_depth: Option<u32>,
    },
    AugmentedGw {
        offspring: Vec<String>,
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default)]
        survive_depth: Option<u32>,
    },
    DecoratedTree {
        #[serde(default)]
        tree_conductance: Option<String>,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryMode {
    /// Free on recurrent sources, wired otherwise.
    #[default]
    Auto,
    Wired,
    Free,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RootLaw {
    #[default]
    Stated,
    FixedRoot,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reference {
    #[default]
    Stated,
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub operation: Option<Operation>,
    #[serde(default)]
    pub source: Option<SourceSpec>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "one")]
    pub replicas: usize,
    #[serde(default)]
    pub depth: Option<u32>,
    #[serde(default)]
    pub depths: Option<Vec<u32>>,
    #[serde(default)]
    pub steps: Option<u64>,
    #[serde(default)]
    pub radius: Option<u32>,
    /// Root of `sample-ust`; proposal vertex of `dynamics-run`.
    #[serde(default)]
    pub vertex: Option<u64>,
    #[serde(default)]
    pub samples: Option<u64>,
    #[serde(default)]
    pub max_n: Option<u64>,
    #[serde(default)]
    pub root_law: RootLaw,
    #[serde(default)]
    pub reference: Reference,
    #[serde(default)]
    pub membership_samples: Option<usize>,
    #[serde(default)]
    pub boundary: BoundaryMode,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Directory that relative file paths are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn one() -> usize {
    1
}

impl ExperimentConfig {
    pub fn new(operation: Operation, seed: u64) -> Self {
        ExperimentConfig {
            operation: Some(operation),
            source: None,
            seed: Some(seed),
            replicas: 1,
            depth: None,
            depths: None,
            steps: None,
            radius: None,
            vertex: None,
            samples: None,
            max_n: None,
            root_law: RootLaw::default(),
            reference: Reference::default(),
            membership_samples: None,
            boundary: BoundaryMode::default(),
            output: None,
            base_dir: None,
        }
    }

    pub fn from_json(s: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(s).map_err(|e| HarnessError::Config(format!("malformed config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut config = Self::from_json(&text)?;
        config.base_dir = path.parent().map(Path::to_path_buf);
        Ok(config)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(base) if p.is_relative() => base.join(p),
            _ => p.to_path_buf(),
        }
    }

    pub fn seed(&self) -> Result<u64, HarnessError> {
        self.seed.ok_or_else(|| HarnessError::Config("seed is required".into()))
    }

    pub fn operation(&self) -> Result<Operation, HarnessError> {
        self.operation.ok_or_else(|| HarnessError::Config("operation is required".into()))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.operation()?;
        self.seed()?;
        if self.replicas == 0 {
            return Err(HarnessError::Config("replicas must be at least 1".into()));
        }
        if let Some(SourceSpec::File { path, .. }) = &self.source {
            let p = self.resolve(path);
            if !p.is_file() {
                return Err(HarnessError::Config(format!("fixture file {} does not exist", p.display())));
            }
        }
        Ok(())
    }

    pub fn require_source(&self) -> Result<&SourceSpec, HarnessError> {
        self.source
            .as_ref()
            .ok_or_else(|| HarnessError::Config(format!("{} needs a source", self.operation.map_or("run", Operation::name))))
    }
}

fn offspring_law(probs: &[String]) -> Result<OffspringDistribution, HarnessError> {
    Ok(OffspringDistribution::parse(probs)?)
}

impl SourceSpec {
    /// A finite network: graph files, boxes and corpus fixtures.
    pub fn network(&self, config: &ExperimentConfig) -> Result<Network, HarnessError> {
        match self {
            SourceSpec::File { path, .. } => Ok(Network::load(&config.resolve(path))?),
            SourceSpec::ZdBox { dim, side, .. } => Ok(zd_box(*dim, *side)?),
            SourceSpec::Corpus { .. } => Ok(self.single_corpus_entry()?.1.network().clone()),
            _ => Err(HarnessError::Config("source is not a finite network".into())),
        }
    }

    fn single_corpus_entry(&self) -> Result<(String, WiredContraction), HarnessError> {
        let mut all = self.corpus_entries()?;
        if all.len() != 1 {
            return Err(HarnessError::Config("corpus source needs a fixture name here".into()));
        }
        Ok(all.remove(0))
    }

    fn corpus_entries(&self) -> Result<Vec<(String, WiredContraction)>, HarnessError> {
        let SourceSpec::Corpus { name } = self else {
            return Err(HarnessError::Config("not a corpus source".into()));
        };
        let entries: Vec<_> = corpus()?
            .into_iter()
            .filter(|e| name.as_deref().is_none_or(|n| n == e.name))
            .map(|e| (e.name.to_string(), e.contraction))
            .collect();
        if entries.is_empty() {
            return Err(HarnessError::Config(format!("no corpus fixture named {name:?}")));
        }
        Ok(entries)
    }

    /// Named wired contractions: a whole corpus, or a single one built from
    /// a kept set, a box margin, or a window of `depth` around a lazy source.
    pub fn contractions(&self, config: &ExperimentConfig) -> Result<Vec<(String, WiredContraction)>, HarnessError> {
        match self {
            SourceSpec::Corpus { .. } => self.corpus_entries(),
            SourceSpec::File { path, keep } => {
                let keep = keep
                    .as_ref()
                    .ok_or_else(|| HarnessError::Config("file source needs a kept set here".into()))?;
                let g = Network::load(&config.resolve(path))?;
                let keep: Vec<VertexId> = keep.iter().copied().map(VertexId).collect();
                Ok(vec![(path.display().to_string(), wired_contract(&g, &keep)?)])
            }
            SourceSpec::ZdBox { dim, side, margin } => {
                let margin = margin.ok_or_else(|| HarnessError::Config("box source needs a margin here".into()))?;
                Ok(vec![(format!("box-{dim}-{side}-{margin}"), zd_box_wired(*dim, *side, margin)?)])
            }
            lazy => {
                let depth = config
                    .depth
                    .ok_or_else(|| HarnessError::Config("lazy source needs a depth".into()))?;
                let source = lazy.lazy(config.seed()?, depth)?;
                Ok(vec![(format!("window-{depth}"), truncate(&source, depth)?)])
            }
        }
    }

    /// Whether [`SourceSpec::lazy`] depends on its seed argument.
    pub fn is_seeded(&self) -> bool {
        matches!(
            self,
            SourceSpec::Gw { seed: None, .. } | SourceSpec::AugmentedGw { seed: None, .. }
        )
    }

    /// A lazy source. Random sources use their own seed when given, else
    /// `split_seed(seed, 0)`; `depth` is the default survival depth.
    pub fn lazy(&self, seed: u64, depth: u32) -> Result<Arc<dyn NetworkSource>, HarnessError> {
        let instance = |own: &Option<u64>| own.unwrap_or_else(|| split_seed(seed, 0));
        Ok(match self {
            SourceSpec::Zd { dim } => Arc::new(ZdSource::new(*dim)?),
            SourceSpec::RegularTree { degree } => Arc::new(RegularTreeSource::new(*degree)?),
            SourceSpec::Gw {
                offspring,
                seed: own,
                survive_depth,
            } => Arc::new(GaltonWatsonSource::new(
                offspring_law(offspring)?,
                instance(own),
                survive_depth.unwrap_or(depth),
            )?),
            SourceSpec::AugmentedGw {
                offspring,
                seed: own,
                survive_depth,
            } => Arc::new(AugmentedGwSource::new(
                offspring_law(offspring)?,
                instance(own),
                survive_depth.unwrap_or(depth),
            )?),
            SourceSpec::DecoratedTree { .. } => Arc::new(self.decorated()?),
            _ => return Err(HarnessError::Config("source is not a lazy network".into())),
        })
    }

    pub fn decorated(&self) -> Result<DecoratedTreeSource, HarnessError> {
        let SourceSpec::DecoratedTree { tree_conductance } = self else {
            return Err(HarnessError::Config("source must be decorated-tree".into()));
        };
        let mut source = DecoratedTreeSource::new();
        if let Some(c) = tree_conductance {
            let c: Conductance = c
                .parse()
                .map_err(|e| HarnessError::Config(format!("tree_conductance: {e}")))?;
            source = source.with_tree_conductance(c);
        }
        Ok(source)
    }
}

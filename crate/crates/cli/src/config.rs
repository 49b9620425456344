//! JSON run configuration. Command-line flags override file values.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use vmkit_core::blockflow::BlockMeParams;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub clips: Option<usize>,
    pub frames: Option<usize>,
    /// `"WxH"`.
    pub size: Option<String>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub foregrounds: Option<PathBuf>,
    pub backgrounds: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub probs: Option<PathBuf>,
    pub flows: Option<PathBuf>,
    pub clip: Option<PathBuf>,
    pub pred: Option<PathBuf>,
    pub block_size: Option<usize>,
    pub search_radius: Option<usize>,
    pub iterations_fraction: Option<f64>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => Ok(vmkit_core::io::read_json(p)?),
        }
    }
}

/// Flag value, else config value.
pub fn pick<T>(flag: Option<T>, config: Option<T>) -> Option<T> {
    flag.or(config)
}

pub fn require<T>(value: Option<T>, name: &str) -> Result<T> {
    value.with_context(|| format!("missing required setting `{name}` (flag --{} or config key)", name.replace('_', "-")))
}

/// Parses `"WxH"` into `(height, width)`.
pub fn parse_size(s: &str) -> Result<(usize, usize)> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .with_context(|| format!("size `{s}` is not of the form WxH"))?;
    let w: usize = w.trim().parse().with_context(|| format!("bad width in size `{s}`"))?;
    let h: usize = h.trim().parse().with_context(|| format!("bad height in size `{s}`"))?;
    if w == 0 || h == 0 {
        bail!("size `{s}` must be non-empty");
    }
    Ok((h, w))
}

pub fn block_params(block_size: Option<usize>, search_radius: Option<usize>) -> Result<BlockMeParams> {
    let d = BlockMeParams::default();
    let params = BlockMeParams {
        block_size: block_size.unwrap_or(d.block_size),
        search_radius: search_radius.unwrap_or(d.search_radius),
    };
    params.validate()?;
    Ok(params)
}

//! The JSON process-spec file: either a raw tensor or a named builtin with
//! parameters, plus optional block-process information for simulation.

use serde::{Deserialize, Serialize};

use pdiv_core::processes::{feller, two_state_markov, two_state_perturbed};
use pdiv_core::{JointDist, ProbVector};

use crate::CliError;

pub const BUILTIN_FELLER: &str = "feller";
pub const BUILTIN_TWO_STATE_MARKOV: &str = "two-state-markov";
pub const BUILTIN_TWO_STATE_PERTURBED: &str = "two-state-perturbed";

/// On-disk process description. `tensor` holds `dim^order` reals with the
/// earliest time step fastest-varying.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessSpecFile {
    pub dim: usize,
    pub order: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tensor: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<Params>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Blocks>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
}

/// Block-process section: `K` independent blocks, optionally each with its
/// own initial probability vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Blocks {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initials: Option<Vec<Vec<f64>>>,
}

impl ProcessSpecFile {
    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let spec: ProcessSpecFile = serde_json::from_str(&text)
            .map_err(|e| format!("{} is not a valid spec file: {e}", path.display()))?;
        Ok(spec)
    }

    /// Materialize the joint distribution this file describes, validating
    /// the tensor or the builtin parameters.
    pub fn to_joint(&self) -> Result<JointDist, CliError> {
        match (&self.tensor, &self.builtin) {
            (Some(_), Some(_)) => {
                Err("spec file must provide either `tensor` or `builtin`, not both".into())
            }
            (Some(tensor), None) => {
                if self.params.is_some() {
                    return Err("`params` only applies to builtin specs".into());
                }
                JointDist::new(self.dim, self.order, tensor.clone())
                    .map_err(|e| format!("invalid tensor: {e}").into())
            }
            (None, Some(name)) => {
                let joint = build_builtin(name, self.params.as_ref().unwrap_or(&Params::default()))?;
                if joint.dim() != self.dim || joint.order() != self.order {
                    return Err(format!(
                        "builtin `{name}` has dim {} and order {}, spec file says {} and {}",
                        joint.dim(),
                        joint.order(),
                        self.dim,
                        self.order
                    )
                    .into());
                }
                Ok(joint)
            }
            (None, None) => Err("spec file provides neither `tensor` nor `builtin`".into()),
        }
    }

    /// Initial vectors for a K-block simulation: the file's `blocks`
    /// section when present, otherwise the tensor's own starting vector
    /// repeated.
    pub fn block_initials(
        &self,
        joint: &JointDist,
        n_blocks: usize,
    ) -> Result<Vec<ProbVector>, CliError> {
        if let Some(blocks) = &self.blocks {
            if let Some(raw) = &blocks.initials {
                if raw.len() != n_blocks {
                    return Err(format!(
                        "blocks.initials has {} vectors but the run needs {n_blocks}",
                        raw.len()
                    )
                    .into());
                }
                return raw
                    .iter()
                    .map(|v| {
                        ProbVector::new(v.clone())
                            .map_err(|e| format!("invalid block initial: {e}").into())
                    })
                    .collect();
            }
        }
        let base = joint
            .one_point(1)
            .map_err(|e| format!("cannot take initial vector: {e}"))?;
        Ok(vec![base; n_blocks])
    }
}

pub fn build_builtin(name: &str, params: &Params) -> Result<JointDist, CliError> {
    match name {
        BUILTIN_FELLER => {
            if params.q1.is_some() || params.eps.is_some() {
                return Err("`feller` takes no parameters".into());
            }
            Ok(feller())
        }
        BUILTIN_TWO_STATE_MARKOV => {
            let q1 = params
                .q1
                .ok_or_else(|| CliError::from("`two-state-markov` needs parameter q1"))?;
            if params.eps.is_some() {
                return Err("`two-state-markov` takes no eps parameter".into());
            }
            two_state_markov(q1).map_err(|e| format!("invalid q1: {e}").into())
        }
        BUILTIN_TWO_STATE_PERTURBED => {
            let q1 = params
                .q1
                .ok_or_else(|| CliError::from("`two-state-perturbed` needs parameter q1"))?;
            let eps = params
                .eps
                .ok_or_else(|| CliError::from("`two-state-perturbed` needs parameter eps"))?;
            two_state_perturbed(q1, eps).map_err(|e| format!("invalid parameters: {e}").into())
        }
        other => Err(format!(
            "unknown builtin `{other}`; expected {BUILTIN_FELLER}, \
             {BUILTIN_TWO_STATE_MARKOV}, or {BUILTIN_TWO_STATE_PERTURBED}"
        )
        .into()),
    }
}

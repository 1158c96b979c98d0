//! Central finite-difference verification of the tape gradients, per loss
//! term and combined.

use std::collections::BTreeMap;

use crate::config::{ModelConfig, TrainingConfig};
use crate::error::{EngineError, Result};
use crate::loss::build_losses;
use crate::model::{build_forward, insert_params, ForwardOptions};
use crate::params::Parameters;
use crate::tape::Tape;
use crate::tensor::Tensor;
use crate::train::{prepare_example, SpecialIds, TrainExample};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossTerm {
    Lm,
    Sa,
    Ci,
    Total,
}

#[derive(Debug, Clone)]
pub struct GradCheckEntry {
    pub param: String,
    pub max_rel_err: f64,
}

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub term: LossTerm,
    pub entries: Vec<GradCheckEntry>,
}

impl GradCheckReport {
    pub fn worst(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.max_rel_err)
            .fold(0.0, f64::max)
    }
}

fn loss_value(
    params: &Parameters,
    config: &ModelConfig,
    tc: &TrainingConfig,
    ids: SpecialIds,
    ex: &TrainExample,
    term: LossTerm,
) -> Result<f64> {
    let prep = prepare_example(ex, ids, tc.epsilon_smooth);
    let mut tape = Tape::new();
    let nodes = insert_params(&mut tape, params);
    let fp = build_forward(
        &mut tape,
        &nodes,
        config,
        &prep.src_ids,
        &prep.dec_in,
        ForwardOptions {
            enable_copy: tc.enable_copy,
            ..ForwardOptions::default()
        },
    )?;
    let losses = build_losses(
        &mut tape,
        &fp,
        &prep.dec_out,
        prep.smoothed_sam.clone(),
        &prep.copy_y,
        crate::loss::LossWeights {
            lambda_sa: tc.lambda_sa,
            lambda_ci: tc.lambda_ci,
            enable_sa: true,
            enable_ci: true,
        },
    );
    let node = match term {
        LossTerm::Lm => losses.lm,
        LossTerm::Sa => losses.sa.expect("sa enabled"),
        LossTerm::Ci => losses.ci.expect("ci enabled"),
        LossTerm::Total => losses.total,
    };
    Ok(tape.value(node).item())
}

fn analytic_grads(
    params: &Parameters,
    config: &ModelConfig,
    tc: &TrainingConfig,
    ids: SpecialIds,
    ex: &TrainExample,
    term: LossTerm,
) -> Result<BTreeMap<String, Tensor>> {
    let prep = prepare_example(ex, ids, tc.epsilon_smooth);
    let mut tape = Tape::new();
    let nodes = insert_params(&mut tape, params);
    let fp = build_forward(
        &mut tape,
        &nodes,
        config,
        &prep.src_ids,
        &prep.dec_in,
        ForwardOptions {
            enable_copy: tc.enable_copy,
            ..ForwardOptions::default()
        },
    )?;
    let losses = build_losses(
        &mut tape,
        &fp,
        &prep.dec_out,
        prep.smoothed_sam.clone(),
        &prep.copy_y,
        crate::loss::LossWeights {
            lambda_sa: tc.lambda_sa,
            lambda_ci: tc.lambda_ci,
            enable_sa: true,
            enable_ci: true,
        },
    );
    let node = match term {
        LossTerm::Lm => losses.lm,
        LossTerm::Sa => losses.sa.expect("sa enabled"),
        LossTerm::Ci => losses.ci.expect("ci enabled"),
        LossTerm::Total => losses.total,
    };
    let grads = tape.backward(node);
    let mut out = BTreeMap::new();
    for (name, &nid) in &nodes.map {
        let shape = params.get(name);
        let g = grads[nid]
            .clone()
            .unwrap_or_else(|| Tensor::zeros(shape.rows, shape.cols));
        out.insert(name.clone(), g);
    }
    Ok(out)
}

/// Compare analytic gradients with central differences on every element of
/// the chosen parameters (all when `subset` is None). Dropout and R-Drop
/// must be off: the comparison needs a deterministic loss surface.
pub fn grad_check(
    params: &Parameters,
    config: &ModelConfig,
    tc: &TrainingConfig,
    ids: SpecialIds,
    ex: &TrainExample,
    term: LossTerm,
    subset: Option<&[&str]>,
    step: f64,
    tolerance: f64,
) -> Result<GradCheckReport> {
    assert_eq!(config.dropout, 0.0, "grad check requires dropout off");
    assert!(!tc.rdrop_enabled, "grad check requires rdrop off");
    let analytic = analytic_grads(params, config, tc, ids, ex, term)?;
    let names: Vec<String> = match subset {
        Some(list) => list.iter().map(|s| s.to_string()).collect(),
        None => params.names().map(String::from).collect(),
    };

    let mut entries = Vec::new();
    let mut work = params.clone();
    for name in names {
        let len = params.get(&name).len();
        let mut max_rel = 0.0f64;
        for k in 0..len {
            let original = work.get(&name).data[k];
            work.get_mut(&name).data[k] = original + step;
            let plus = loss_value(&work, config, tc, ids, ex, term)?;
            work.get_mut(&name).data[k] = original - step;
            let minus = loss_value(&work, config, tc, ids, ex, term)?;
            work.get_mut(&name).data[k] = original;

            let numeric = (plus - minus) / (2.0 * step);
            let a = analytic[&name].data[k];
            let denom = a.abs().max(numeric.abs()).max(1e-6);
            let rel = (a - numeric).abs() / denom;
            if rel > max_rel {
                max_rel = rel;
            }
            if rel >= tolerance {
                return Err(EngineError::GradMismatch {
                    param: format!("{name}[{k}]"),
                    rel_err: rel,
                    tol: tolerance,
                });
            }
        }
        entries.push(GradCheckEntry {
            param: name,
            max_rel_err: max_rel,
        });
    }
    Ok(GradCheckReport { term, entries })
}

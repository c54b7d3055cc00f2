//! Predicts how many labels an example carries.

use std::collections::BTreeSet;

use crate::boosting::{train_adaboost_mh, StumpEnsemble};
use crate::dataset::{Dataset, Example, LabelSet, LabelSpace};
use crate::error::{Error, Result};
use crate::metrics::rank_order;

/// Boosting rounds of the count classifier.
pub const META_STUMPS: usize = 100;

/// Multi-class AdaBoost.MH over the label counts seen in training; classes
/// are named by their count. With a single observed count no model is
/// trained and that count is always returned.
#[derive(Clone, Debug, PartialEq)]
pub struct MetaLabeler {
    pub counts: Vec<usize>,
    pub model: Option<StumpEnsemble>,
}

pub fn train_meta_labeler(dataset: &Dataset, stumps: usize) -> Result<MetaLabeler> {
    let counts: Vec<usize> = dataset
        .examples
        .iter()
        .map(|e| e.labels.len())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if counts.len() < 2 {
        return Ok(MetaLabeler { counts, model: None });
    }
    let space = LabelSpace::new(counts.iter().map(usize::to_string))?;
    let examples = dataset
        .examples
        .iter()
        .map(|e| {
            let class = counts.binary_search(&e.labels.len()).expect("count observed above");
            Example::new(e.id.clone(), e.features.clone(), LabelSet::from([class]), None)
        })
        .collect::<Result<Vec<_>>>()?;
    let model = train_adaboost_mh(&Dataset::new(space, examples)?, stumps)?;
    Ok(MetaLabeler {
        counts,
        model: Some(model),
    })
}

impl MetaLabeler {
    /// Count class with the highest score; ties to the smaller count.
    pub fn predict_count(&self, x: &[f64]) -> Result<usize> {
        match &self.model {
            None => Ok(self.counts[0]),
            Some(model) => {
                let scores = model.predict_scores(x)?;
                Ok(self.counts[rank_order(&scores)[0]])
            }
        }
    }

    pub(crate) fn from_model(model: Option<StumpEnsemble>, constant: Option<usize>) -> Result<Self> {
        match (model, constant) {
            (Some(model), None) => {
                let counts = model
                    .space
                    .names()
                    .iter()
                    .map(|n| n.parse::<usize>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| Error::ModelFormat("meta-labeler classes must be counts".into()))?;
                if counts.windows(2).any(|w| w[0] >= w[1]) || counts.first() == Some(&0) {
                    return Err(Error::ModelFormat("meta-labeler counts must be increasing and positive".into()));
                }
                Ok(MetaLabeler {
                    counts,
                    model: Some(model),
                })
            }
            (None, Some(count)) if count > 0 => Ok(MetaLabeler {
                counts: vec![count],
                model: None,
            }),
            _ => Err(Error::ModelFormat("malformed meta-labeler".into())),
        }
    }
}

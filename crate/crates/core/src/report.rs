//! Training reports: one JSON document plus a plain-text summary.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::Result;
use crate::network::{accuracy, LayerSelection, NetworkModel, StopReason};
use crate::network::HyperParams;
use crate::transforms::TransformKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub source: String,
    pub features: usize,
    pub classes: usize,
    pub train_samples: usize,
    pub test_samples: usize,
}

/// State of the network truncated after `layer` hidden layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerReport {
    pub layer: usize,
    /// `None` for the linear layer-0 classifier.
    pub transform: Option<TransformKind>,
    /// Width of `y_l`: `2Q` plus the kept transform nodes.
    pub nodes: usize,
    pub transform_nodes: usize,
    pub cost: f64,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub dataset: DatasetSummary,
    pub seed: u64,
    pub hyper: HyperParams,
    pub architecture: String,
    pub depth: usize,
    pub stop_reason: StopReason,
    pub degenerate_warning: bool,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub layers: Vec<LayerReport>,
    pub selection: Vec<LayerSelection>,
}

impl TrainReport {
    pub fn build(model: &NetworkModel, data: &Dataset, source: &str, seed: u64) -> Result<Self> {
        let train_curve = model.layerwise_predict(&data.x_train)?;
        let test_curve = model.layerwise_predict(&data.x_test)?;
        let mut layers = Vec::with_capacity(model.depth() + 1);
        for (l, cost) in model.cost_trace.iter().enumerate() {
            let record = l.checked_sub(1).map(|i| &model.layers[i]);
            layers.push(LayerReport {
                layer: l,
                transform: record.map(|r| r.transform),
                nodes: record.map_or(model.p, |r| r.out_dim),
                transform_nodes: record.map_or(0, |r| r.kept_nodes()),
                cost: *cost,
                train_accuracy: accuracy(&train_curve[l], &data.y_train)?,
                test_accuracy: accuracy(&test_curve[l], &data.y_test)?,
            });
        }
        let last = layers.last().expect("layer 0 is always present");
        Ok(TrainReport {
            dataset: DatasetSummary {
                source: source.to_string(),
                features: data.num_features(),
                classes: data.num_classes(),
                train_samples: data.y_train.len(),
                test_samples: data.y_test.len(),
            },
            seed,
            hyper: model.hyper.clone(),
            architecture: model.architecture_string(),
            depth: model.depth(),
            stop_reason: model.stop_reason,
            degenerate_warning: model.degenerate_warning,
            train_accuracy: last.train_accuracy,
            test_accuracy: last.test_accuracy,
            selection: model.selection.clone(),
            layers,
        })
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let d = &self.dataset;
        let _ = writeln!(s, "dataset       {}", d.source);
        let _ = writeln!(
            s,
            "              {} features, {} classes, {} train / {} test samples",
            d.features, d.classes, d.train_samples, d.test_samples
        );
        let _ = writeln!(s, "architecture  {}", self.architecture);
        let _ = writeln!(s, "stop reason   {:?}", self.stop_reason);
        if self.degenerate_warning {
            let _ = writeln!(s, "warning       training stopped on a degenerate layer");
        }
        let _ = writeln!(s, "train acc     {:.2}", self.train_accuracy);
        let _ = writeln!(s, "test acc      {:.2}", self.test_accuracy);
        let _ = writeln!(s);
        let _ = writeln!(
            s,
            "{:>5}  {:<10}  {:>6}  {:>13}  {:>9}  {:>8}",
            "layer", "transform", "nodes", "cost", "train %", "test %"
        );
        for l in &self.layers {
            let name = l.transform.map_or("linear".to_string(), |k| k.label());
            let _ = writeln!(
                s,
                "{:>5}  {:<10}  {:>6}  {:>13.6e}  {:>9.2}  {:>8.2}",
                l.layer, name, l.nodes, l.cost, l.train_accuracy, l.test_accuracy
            );
        }
        for sel in &self.selection {
            let _ = writeln!(s);
            let _ = writeln!(s, "layer {} candidates (chosen {})", sel.layer, sel.chosen.label());
            let _ = writeln!(s, "  {:<10}  {:>10}  {:>10}  {:>6}", "transform", "sc1", "sc2", "kept");
            for c in &sel.scores {
                if c.degenerate {
                    let _ = writeln!(s, "  {:<10}  {:>10}", c.kind.label(), "pruned");
                } else {
                    let _ = writeln!(
                        s,
                        "  {:<10}  {:>10.4}  {:>10.6}  {:>6}",
                        c.kind.label(),
                        c.sc1,
                        c.sc2,
                        c.kept_nodes
                    );
                }
            }
        }
        let h = &self.hyper;
        let _ = writeln!(s);
        let _ = writeln!(s, "hyperparameters");
        let _ = writeln!(s, "  method {}  seed {}", h.method, self.seed);
        let _ = writeln!(
            s,
            "  lambda0 {}  mu {}  alpha {}  k_max {}",
            h.lambda0, h.mu, h.alpha, h.k_max
        );
        let _ = writeln!(
            s,
            "  eta_layer {}  eta_var {}  l_max {}  gamma {}",
            h.eta_layer, h.eta_var, h.l_max, h.gamma
        );
        let bag: Vec<String> = h.bag.iter().map(|k| k.label()).collect();
        let _ = writeln!(s, "  bag {}", bag.join(","));
        let _ = writeln!(
            s,
            "  preprocess {:?}  part2 activation {:?}",
            h.preprocess, h.part2_activation
        );
        s
    }
}

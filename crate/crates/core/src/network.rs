//! Layer-wise grown feedforward network.
//!
//! Layer `l` maps `y_{l-1}` to
//!
//! ```text
//! z_l = [ V_Q · O*_{l-1} · y_{l-1} ]      (2Q rows)
//!       [ normalize(prune(w_l(y_{l-1}))) ]  (surviving transform nodes)
//! y_l = ReLU(z_l)
//! ```
//!
//! where `w_l` is a deterministic transform chosen per layer and `O*_l` is
//! fitted by ridge regression (layer 0) or Frobenius-ball ADMM. Because
//! `[I −I]·ReLU(V_Q·v) = v`, the previous prediction is always reachable and
//! the training cost never increases.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::data::{NormStats, Preprocess};
use crate::error::{Error, Result};
use crate::optim::{admm_constrained_ls, ridge_solve, training_cost, AdmmConfig};
use crate::selection::{select_transform, SelectionScore};
use crate::transforms::{bag_default, TransformKind, TransformPlan};

/// How the transform of each new layer is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Minimum spread of node standard deviations.
    Method1,
    /// Fewest correlation singular values reaching `gamma`.
    Method2,
    /// The same transform at every layer.
    Fixed(TransformKind),
    /// Seeded random matrices; layer `l` uses seed `seed + l - 1`.
    Random { seed: u64 },
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Method1 => f.write_str("1"),
            Method::Method2 => f.write_str("2"),
            Method::Fixed(kind) => write!(f, "fixed:{kind}"),
            Method::Random { seed } => write!(f, "random:{seed}"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "1" | "method1" => return Ok(Method::Method1),
            "2" | "method2" => return Ok(Method::Method2),
            _ => {}
        }
        if let Some(kind) = t.strip_prefix("fixed:") {
            return Ok(Method::Fixed(kind.parse()?));
        }
        if let Some(seed) = t.strip_prefix("random:") {
            let seed = seed
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad random seed in {s:?}")))?;
            return Ok(Method::Random { seed });
        }
        Err(Error::InvalidParameter(format!(
            "unknown method {s:?} (expected 1, 2, fixed:<kind> or random:<seed>)"
        )))
    }
}

impl Serialize for Method {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Activation applied to the transform rows of each layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Part2Activation {
    #[default]
    Relu,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HyperParams {
    /// Ridge penalty of the layer-0 classifier.
    pub lambda0: f64,
    /// ADMM penalty.
    pub mu: f64,
    /// Ball radius multiplier, `ε = 2·α·Q`.
    pub alpha: f64,
    pub k_max: usize,
    /// Minimum relative cost improvement for a layer to be kept.
    pub eta_layer: f64,
    /// Transform nodes with variance below this are pruned.
    pub eta_var: f64,
    pub l_max: usize,
    /// Cumulative singular value threshold of method 2.
    pub gamma: f64,
    pub bag: Vec<TransformKind>,
    pub method: Method,
    pub preprocess: Preprocess,
    pub part2_activation: Part2Activation,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            lambda0: 1.0,
            mu: 1e3,
            alpha: 2.0,
            k_max: 100,
            eta_layer: 0.1,
            eta_var: 1e-7,
            l_max: 20,
            gamma: 0.8,
            bag: bag_default(),
            method: Method::Method2,
            preprocess: Preprocess::UnitNorm,
            part2_activation: Part2Activation::Relu,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.lambda0 >= 0.0 && self.lambda0.is_finite()) {
            return bad(format!("lambda0 must be >= 0, got {}", self.lambda0));
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return bad(format!("mu must be > 0, got {}", self.mu));
        }
        if !(self.alpha >= 1.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be >= 1, got {}", self.alpha));
        }
        if self.k_max == 0 {
            return bad("k_max must be >= 1".into());
        }
        if !(self.eta_layer > 0.0) {
            return bad(format!("eta_layer must be > 0, got {}", self.eta_layer));
        }
        if !(self.eta_var > 0.0 && self.eta_var.is_finite()) {
            return bad(format!("eta_var must be > 0, got {}", self.eta_var));
        }
        if self.l_max == 0 {
            return bad("l_max must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad(format!("gamma must be in [0, 1], got {}", self.gamma));
        }
        if self.bag.is_empty() {
            return bad("transform bag is empty".into());
        }
        Ok(())
    }
}

/// Trained state of one hidden layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerRecord {
    /// `O*_{l-1}` (`Q × in_dim`), feeding the `V_Q` block.
    pub output_matrix_prev: DMatrix<f64>,
    pub transform: TransformKind,
    pub plan: TransformPlan,
    /// Over the raw transform outputs; `true` = kept.
    pub prune_mask: Vec<bool>,
    pub in_dim: usize,
    /// `2Q` + kept transform nodes.
    pub out_dim: usize,
}

impl LayerRecord {
    pub fn kept_nodes(&self) -> usize {
        self.prune_mask.iter().filter(|&&k| k).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxLayers,
    Saturated,
    /// Every candidate transform lost all its nodes to pruning.
    Degenerate,
}

/// Candidate scores of one layer's transform selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSelection {
    pub layer: usize,
    pub chosen: TransformKind,
    pub scores: Vec<SelectionScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkModel {
    pub layers: Vec<LayerRecord>,
    /// `O*_L`, the readout of the last layer.
    pub final_output: DMatrix<f64>,
    /// `C*_0, ..., C*_L`.
    pub cost_trace: Vec<f64>,
    pub q: usize,
    pub p: usize,
    pub norm_stats: NormStats,
    pub part2_activation: Part2Activation,
    pub hyper: HyperParams,
    pub stop_reason: StopReason,
    /// Set when training stopped because a layer came out degenerate.
    pub degenerate_warning: bool,
    pub selection: Vec<LayerSelection>,
}

/// `V_Q = [I_Q; −I_Q]`.
pub fn build_vq(q: usize) -> Result<DMatrix<f64>> {
    if q == 0 {
        return Err(Error::dim("V_Q needs at least one class"));
    }
    Ok(DMatrix::from_fn(2 * q, q, |i, j| {
        if i == j {
            1.0
        } else if i == j + q {
            -1.0
        } else {
            0.0
        }
    }))
}

/// Per-row population variance (divisor `J`), two passes.
pub(crate) fn row_variances(z: &DMatrix<f64>) -> Vec<f64> {
    let j = z.ncols() as f64;
    let mut mean = vec![0.0; z.nrows()];
    for col in z.column_iter() {
        for (m, v) in mean.iter_mut().zip(col.iter()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= j);
    let mut var = vec![0.0; z.nrows()];
    for col in z.column_iter() {
        for ((s, v), m) in var.iter_mut().zip(col.iter()).zip(&mean) {
            let d = v - m;
            *s += d * d;
        }
    }
    var.iter_mut().for_each(|s| *s /= j);
    var
}

/// `true` for rows whose variance across samples is at least `eta_var`.
pub fn prune_mask(z: &DMatrix<f64>, eta_var: f64) -> Result<Vec<bool>> {
    if z.ncols() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: z.ncols(),
        });
    }
    Ok(row_variances(z).into_iter().map(|v| v >= eta_var).collect())
}

/// Keeps masked rows and scales every column to unit norm (near-zero columns become zero).
fn select_and_normalize(raw: &DMatrix<f64>, mask: &[bool]) -> DMatrix<f64> {
    let kept: Vec<usize> = mask
        .iter()
        .enumerate()
        .filter_map(|(i, &k)| k.then_some(i))
        .collect();
    let mut out = raw.select_rows(&kept);
    for mut col in out.column_iter_mut() {
        let norm = col.norm();
        if norm < 1e-12 {
            col.fill(0.0);
        } else {
            col /= norm;
        }
    }
    out
}

/// Transform block of a new layer: transform, prune low-variance rows, normalize columns.
///
/// Returns the block, the mask over raw transform outputs, and the plan used.
pub fn part2_forward(
    kind: TransformKind,
    y_prev: &DMatrix<f64>,
    eta_var: f64,
) -> Result<(DMatrix<f64>, Vec<bool>, TransformPlan)> {
    let plan = TransformPlan::new(kind, y_prev.nrows())?;
    let raw = plan.apply_columns(y_prev)?;
    let mask = prune_mask(&raw, eta_var)?;
    if !mask.iter().any(|&k| k) {
        return Err(Error::DegenerateLayer(kind.label()));
    }
    Ok((select_and_normalize(&raw, &mask), mask, plan))
}

/// Transform block at inference, reusing the stored mask.
fn part2_apply(layer: &LayerRecord, y_prev: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let raw = layer.plan.apply_columns(y_prev)?;
    Ok(select_and_normalize(&raw, &layer.prune_mask))
}

/// Stacks `[V_Q·p; part2]` and applies the activations.
fn assemble(pred: &DMatrix<f64>, part2: &DMatrix<f64>, act: Part2Activation) -> DMatrix<f64> {
    let q = pred.nrows();
    let j = pred.ncols();
    let m = part2.nrows();
    let mut y = DMatrix::zeros(2 * q + m, j);
    for c in 0..j {
        for i in 0..q {
            let v = pred[(i, c)];
            y[(i, c)] = v.max(0.0);
            y[(q + i, c)] = (-v).max(0.0);
        }
        for i in 0..m {
            let v = part2[(i, c)];
            y[(2 * q + i, c)] = match act {
                Part2Activation::Relu => v.max(0.0),
                Part2Activation::Linear => v,
            };
        }
    }
    y
}

/// Output of one trained layer on `y_prev`.
pub fn layer_forward(
    layer: &LayerRecord,
    y_prev: &DMatrix<f64>,
    act: Part2Activation,
) -> Result<DMatrix<f64>> {
    if y_prev.nrows() != layer.in_dim {
        return Err(Error::dim(format!(
            "layer expects {} inputs, got {}",
            layer.in_dim,
            y_prev.nrows()
        )));
    }
    let pred = &layer.output_matrix_prev * y_prev;
    let part2 = part2_apply(layer, y_prev)?;
    Ok(assemble(&pred, &part2, act))
}

/// `[I_Q, −I_Q, 0]`: reproduces the previous layer's prediction from `y_l`.
fn passthrough_readout(q: usize, width: usize) -> DMatrix<f64> {
    DMatrix::from_fn(q, width, |i, j| {
        if j == i {
            1.0
        } else if j == i + q {
            -1.0
        } else {
            0.0
        }
    })
}

/// Grows a network on features `x` (`P × J`) and one-hot targets `t` (`Q × J`).
pub fn train(x: &DMatrix<f64>, t: &DMatrix<f64>, hp: &HyperParams) -> Result<NetworkModel> {
    hp.validate()?;
    if x.ncols() != t.ncols() {
        return Err(Error::dim(format!(
            "{} feature columns vs {} target columns",
            x.ncols(),
            t.ncols()
        )));
    }
    if x.ncols() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: x.ncols(),
        });
    }
    let (p, q) = (x.nrows(), t.nrows());
    let norm_stats = NormStats::fit(hp.preprocess, x);
    let x = norm_stats.apply(x)?;
    let act = hp.part2_activation;
    let admm = AdmmConfig::for_classes(hp.mu, hp.k_max, hp.alpha, q)?;

    let mut o_prev = ridge_solve(&x, t, hp.lambda0)?;
    let mut cost_prev = training_cost(&o_prev, &x, t)?;
    log::info!("layer 0: cost {cost_prev:.6e}");

    let mut model = NetworkModel {
        layers: Vec::new(),
        final_output: DMatrix::zeros(0, 0),
        cost_trace: vec![cost_prev],
        q,
        p,
        norm_stats,
        part2_activation: act,
        hyper: hp.clone(),
        stop_reason: StopReason::MaxLayers,
        degenerate_warning: false,
        selection: Vec::new(),
    };

    let mut y_prev = x.clone();
    for l in 1..=hp.l_max {
        let kind = match hp.method {
            Method::Fixed(kind) => kind,
            Method::Random { seed } => TransformKind::Random {
                seed: seed.wrapping_add(l as u64 - 1),
            },
            Method::Method1 | Method::Method2 => match select_transform(&hp.bag, &y_prev, &x, hp) {
                Ok((kind, scores)) => {
                    model.selection.push(LayerSelection {
                        layer: l,
                        chosen: kind,
                        scores,
                    });
                    kind
                }
                Err(Error::SelectionImpossible) => {
                    log::warn!("layer {l}: every candidate transform is degenerate; stopping");
                    model.stop_reason = StopReason::Degenerate;
                    model.degenerate_warning = true;
                    break;
                }
                Err(e) => return Err(e),
            },
        };

        let (part2, mask, plan) = match part2_forward(kind, &y_prev, hp.eta_var) {
            Ok(v) => v,
            Err(Error::DegenerateLayer(_)) => {
                log::warn!("layer {l}: {kind} pruned every node; stopping");
                model.stop_reason = StopReason::Degenerate;
                model.degenerate_warning = true;
                break;
            }
            Err(e) => return Err(e),
        };
        let pred = &o_prev * &y_prev;
        let y = assemble(&pred, &part2, act);

        let mut o = admm_constrained_ls(&y, t, &admm)?;
        let mut cost = training_cost(&o, &y, t)?;
        // The passthrough readout is feasible (‖·‖² = 2Q ≤ ε) and matches the
        // previous cost, so never accept anything worse.
        let passthrough = passthrough_readout(q, y.nrows());
        let pass_cost = training_cost(&passthrough, &y, t)?;
        if pass_cost < cost {
            log::debug!("layer {l}: ADMM cost {cost:.6e} above passthrough {pass_cost:.6e}");
            o = passthrough;
            cost = pass_cost;
        }

        let improvement = if cost_prev > 0.0 {
            (cost_prev - cost) / cost_prev
        } else {
            0.0
        };
        log::info!(
            "layer {l}: {kind}, width {}, cost {cost:.6e}, improvement {improvement:.4}",
            y.nrows()
        );
        if improvement < hp.eta_layer {
            model.stop_reason = StopReason::Saturated;
            if let Some(sel) = model.selection.last() {
                if sel.layer == l {
                    model.selection.pop();
                }
            }
            break;
        }

        model.layers.push(LayerRecord {
            output_matrix_prev: o_prev,
            transform: kind,
            plan,
            out_dim: y.nrows(),
            in_dim: y_prev.nrows(),
            prune_mask: mask,
        });
        model.cost_trace.push(cost);
        o_prev = o;
        cost_prev = cost;
        y_prev = y;
    }
    model.final_output = o_prev;
    Ok(model)
}

/// Index of the largest entry of each column; ties go to the lowest index.
pub fn argmax_columns(scores: &DMatrix<f64>) -> Vec<usize> {
    scores
        .column_iter()
        .map(|col| {
            let mut best = 0;
            for (i, &v) in col.iter().enumerate() {
                if v > col[best] {
                    best = i;
                }
            }
            best
        })
        .collect()
}

/// `100 × matches / len`.
pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::dim(format!(
            "{} predictions for {} labels",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let hits = pred.iter().zip(truth).filter(|(a, b)| a == b).count();
    Ok(100.0 * hits as f64 / pred.len() as f64)
}

impl NetworkModel {
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    fn prepare(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.nrows() != self.p {
            return Err(Error::dim(format!(
                "model expects {} features, got {}",
                self.p,
                x.nrows()
            )));
        }
        self.norm_stats.apply(x)
    }

    /// Class scores `O*_L · y_L`, `Q × J`.
    pub fn scores(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let mut y = self.prepare(x)?;
        for layer in &self.layers {
            y = layer_forward(layer, &y, self.part2_activation)?;
        }
        Ok(&self.final_output * y)
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Result<Vec<usize>> {
        Ok(argmax_columns(&self.scores(x)?))
    }

    /// Predictions of the network truncated after 0, 1, ..., L layers.
    pub fn layerwise_predict(&self, x: &DMatrix<f64>) -> Result<Vec<Vec<usize>>> {
        let mut y = self.prepare(x)?;
        let mut out = Vec::with_capacity(self.depth() + 1);
        for layer in &self.layers {
            out.push(argmax_columns(&(&layer.output_matrix_prev * &y)));
            y = layer_forward(layer, &y, self.part2_activation)?;
        }
        out.push(argmax_columns(&(&self.final_output * y)));
        Ok(out)
    }

    /// Widths and transforms, e.g. `"32-54 (DB20-DCT)"`; empty for a linear model.
    pub fn architecture_string(&self) -> String {
        if self.layers.is_empty() {
            return String::from("(linear)");
        }
        let widths: Vec<String> = self.layers.iter().map(|l| l.out_dim.to_string()).collect();
        let kinds: Vec<String> = self.layers.iter().map(|l| l.transform.label()).collect();
        format!("{} ({})", widths.join("-"), kinds.join("-"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vq_shapes() {
        assert_eq!(build_vq(1).unwrap(), DMatrix::from_row_slice(2, 1, &[1.0, -1.0]));
        let v = build_vq(2).unwrap();
        assert_eq!(
            v,
            DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, -1.0])
        );
        assert!(build_vq(0).is_err());
    }

    #[test]
    fn prune_examples() {
        let z = DMatrix::from_row_slice(2, 4, &[3.0, 3.0, 3.0, 3.0, 1.0, -1.0, 1.0, -1.0]);
        assert_eq!(prune_mask(&z, 0.5).unwrap(), vec![false, true]);
        assert!(matches!(
            prune_mask(&DMatrix::zeros(2, 1), 0.5),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn constant_input_is_degenerate() {
        let y = DMatrix::from_element(4, 6, 0.3);
        assert!(matches!(
            part2_forward(TransformKind::Dct2, &y, 1e-7),
            Err(Error::DegenerateLayer(_))
        ));
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&[1, 2, 3], &[1, 2, 3]).unwrap(), 100.0);
        assert_eq!(accuracy(&[1, 2], &[0, 0]).unwrap(), 0.0);
        assert_eq!(accuracy(&[1, 2], &[1, 0]).unwrap(), 50.0);
        assert!(accuracy(&[1], &[1, 2]).is_err());
    }

    #[test]
    fn argmax_ties_go_low() {
        let s = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 2.0, 0.5, 2.0]);
        assert_eq!(argmax_columns(&s), vec![0, 1]);
    }

    #[test]
    fn method_strings() {
        for m in [
            Method::Method1,
            Method::Method2,
            Method::Fixed(TransformKind::Db20),
            Method::Random { seed: 11 },
        ] {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert!("3".parse::<Method>().is_err());
    }

    #[test]
    fn hyper_validation() {
        assert!(HyperParams::default().validate().is_ok());
        let bad = HyperParams {
            gamma: 1.5,
            ..HyperParams::default()
        };
        assert!(bad.validate().is_err());
        let bad = HyperParams {
            bag: vec![],
            ..HyperParams::default()
        };
        assert!(bad.validate().is_err());
    }
}

//! Explicit ReQU networks: an ordered sequence of affine layers, realized with
//! `σ₂(x) = max(0, x)²` after every layer except the last.

use std::path::Path;

use serde::de::{self, Deserializer};
use serde::ser::{SerializeSeq, SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{mismatch, Error, Result};
use crate::sparse::SparseMatrix;

/// The rectified quadratic unit.
#[inline]
pub fn requ(x: f64) -> f64 {
    let r = x.max(0.0);
    r * r
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: SparseMatrix,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn new(weights: SparseMatrix, bias: Vec<f64>) -> Result<Self> {
        if bias.len() != weights.rows() {
            return Err(mismatch(format!(
                "bias of length {} for a weight matrix with {} rows",
                bias.len(),
                weights.rows()
            )));
        }
        Ok(Self { weights, bias })
    }

    pub fn in_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.rows()
    }

    /// Nonzero weights of this layer: `‖A‖₀ + ‖b‖₀`.
    pub fn nnz(&self) -> usize {
        self.weights.nnz() + self.bias.iter().filter(|b| **b != 0.0).count()
    }
}

/// A validated, immutable network. Layer shapes chain, there is at least one
/// layer, no dimension is zero and every entry is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layers: Vec<Layer>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComplexityReport {
    pub depth: usize,
    pub nodes: usize,
    pub total_nnz: usize,
    pub layer_nnz: Vec<usize>,
}

impl Network {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::EmptyNetwork);
        }
        for (k, layer) in layers.iter().enumerate() {
            if layer.in_dim() == 0 || layer.out_dim() == 0 {
                return Err(mismatch(format!("layer {} has a zero dimension", k + 1)));
            }
            if layer.bias.len() != layer.out_dim() {
                return Err(mismatch(format!("layer {} bias length", k + 1)));
            }
            if !layer.weights.all_finite() || !layer.bias.iter().all(|b| b.is_finite()) {
                return Err(Error::NonFiniteEntry(format!("layer {}", k + 1)));
            }
        }
        for (k, pair) in layers.windows(2).enumerate() {
            if pair[1].in_dim() != pair[0].out_dim() {
                return Err(mismatch(format!(
                    "layer {} has {} columns but layer {} emits {} values",
                    k + 2,
                    pair[1].in_dim(),
                    k + 1,
                    pair[0].out_dim()
                )));
            }
        }
        Ok(Self { layers })
    }

    /// Builds a network from `(weights, bias)` pairs.
    pub fn from_pairs(pairs: Vec<(SparseMatrix, Vec<f64>)>) -> Result<Self> {
        let layers = pairs.into_iter().map(|(a, b)| Layer::new(a, b)).collect::<Result<Vec<_>>>()?;
        Self::new(layers)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn into_layers(self) -> Vec<Layer> {
        self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    pub fn first_layer_nnz(&self) -> usize {
        self.layers[0].nnz()
    }

    pub fn last_layer_nnz(&self) -> usize {
        self.layers[self.layers.len() - 1].nnz()
    }

    pub fn nnz(&self) -> usize {
        self.layers.iter().map(Layer::nnz).sum()
    }

    /// Forward evaluation: `σ₂` after layers `1..L-1`, the last layer affine.
    pub fn realize(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(mismatch(format!(
                "input of length {} for a network with input dimension {}",
                x.len(),
                self.input_dim()
            )));
        }
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            layer.weights.affine_into(&cur, &layer.bias, &mut next);
            if k < last {
                next.iter_mut().for_each(|v| *v = requ(*v));
            }
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    pub fn complexity(&self) -> ComplexityReport {
        let layer_nnz: Vec<usize> = self.layers.iter().map(Layer::nnz).collect();
        ComplexityReport {
            depth: self.layers.len(),
            nodes: self.input_dim() + self.layers.iter().map(Layer::out_dim).sum::<usize>(),
            total_nnz: layer_nnz.iter().sum(),
            layer_nnz,
        }
    }

    /// Replaces the last layer `(A, b)` by `(-A, -b + shift)`.
    pub fn negate_last_and_shift(mut self, shift: &[f64]) -> Result<Self> {
        let last = self.layers.pop().expect("validated network is non-empty");
        if shift.len() != last.out_dim() {
            return Err(mismatch("shift length differs from the output dimension"));
        }
        let bias = last.bias.iter().zip(shift).map(|(b, s)| -b + s).collect();
        self.layers.push(Layer::new(last.weights.scale(-1.0), bias)?);
        Self::new(self.layers)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer(file, self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }
}

// Wire format: {"input_dim", "layers": [{"rows", "cols", "A": row-major, "b"}]}.
// Dense rows are streamed so large networks are never materialized densely.

struct DenseRows<'a>(&'a SparseMatrix);

impl Serialize for DenseRows<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let m = self.0;
        let mut seq = s.serialize_seq(Some(m.rows() * m.cols()))?;
        for r in 0..m.rows() {
            let (idx, vals) = m.row(r);
            let mut k = 0;
            for c in 0..m.cols() {
                if k < idx.len() && idx[k] as usize == c {
                    seq.serialize_element(&vals[k])?;
                    k += 1;
                } else {
                    seq.serialize_element(&0.0f64)?;
                }
            }
        }
        seq.end()
    }
}

impl Serialize for Layer {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Layer", 4)?;
        st.serialize_field("rows", &self.weights.rows())?;
        st.serialize_field("cols", &self.weights.cols())?;
        st.serialize_field("A", &DenseRows(&self.weights))?;
        st.serialize_field("b", &self.bias)?;
        st.end()
    }
}

impl Serialize for Network {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Network", 2)?;
        st.serialize_field("input_dim", &self.input_dim())?;
        st.serialize_field("layers", &self.layers)?;
        st.end()
    }
}

#[derive(Deserialize)]
struct RawLayer {
    rows: usize,
    cols: usize,
    #[serde(rename = "A")]
    a: Vec<f64>,
    b: Vec<f64>,
}

#[derive(Deserialize)]
struct RawNetwork {
    input_dim: usize,
    layers: Vec<RawLayer>,
}

impl TryFrom<RawNetwork> for Network {
    type Error = Error;

    fn try_from(raw: RawNetwork) -> Result<Self> {
        let layers = raw
            .layers
            .into_iter()
            .map(|l| Layer::new(SparseMatrix::from_row_major(l.rows, l.cols, &l.a)?, l.b))
            .collect::<Result<Vec<_>>>()?;
        let net = Network::new(layers)?;
        if net.input_dim() != raw.input_dim {
            return Err(mismatch(format!(
                "input_dim {} but first layer has {} columns",
                raw.input_dim,
                net.input_dim()
            )));
        }
        Ok(net)
    }
}

impl<'de> Deserialize<'de> for Network {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawNetwork::deserialize(d)?;
        Network::try_from(raw).map_err(de::Error::custom)
    }
}

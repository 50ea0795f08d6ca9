//! Finite function tables and distortion tables.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::prob::{flat_index, for_each_index, nested, row_major_strides, Alphabet};

/// A total function on the product of its domain alphabets, with output
/// labels drawn from `range`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FunctionRepr", into = "FunctionRepr")]
pub struct FunctionTable {
    domain: Vec<Alphabet>,
    range: Vec<String>,
    values: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FunctionRepr {
    domain: Vec<Alphabet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    range: Option<Vec<String>>,
    values: Value,
}

impl TryFrom<FunctionRepr> for FunctionTable {
    type Error = Error;

    fn try_from(r: FunctionRepr) -> Result<Self> {
        let shape: Vec<usize> = r.domain.iter().map(Alphabet::len).collect();
        let labels: Vec<String> = nested::flatten(&r.values, &shape)?;
        FunctionTable::from_labels(r.domain, labels, r.range)
    }
}

impl From<FunctionTable> for FunctionRepr {
    fn from(f: FunctionTable) -> Self {
        let shape = f.shape();
        let labels: Vec<&str> = f.values.iter().map(|&v| f.range[v].as_str()).collect();
        FunctionRepr {
            values: nested::nest(&labels, &shape),
            range: Some(f.range),
            domain: f.domain,
        }
    }
}

impl FunctionTable {
    /// Builds a table from output labels in row-major domain order. When
    /// `range` is `None` it is the distinct labels in order of appearance.
    pub fn from_labels(
        domain: Vec<Alphabet>,
        labels: Vec<String>,
        range: Option<Vec<String>>,
    ) -> Result<Self> {
        let expected: usize = domain.iter().map(Alphabet::len).product();
        if labels.len() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                found: labels.len(),
            });
        }
        let mut range = range.unwrap_or_default();
        let mut index: HashMap<String, usize> = HashMap::new();
        for (i, r) in range.iter().enumerate() {
            if index.insert(r.clone(), i).is_some() {
                return Err(Error::InvalidAlphabet {
                    name: "range".into(),
                    reason: format!("duplicate label `{r}`"),
                });
            }
        }
        let fixed_range = !range.is_empty();
        let mut values = Vec::with_capacity(labels.len());
        for l in labels {
            let v = match index.get(&l) {
                Some(&v) => v,
                None if fixed_range => {
                    return Err(Error::AlphabetMismatch {
                        axis: "range".into(),
                        detail: format!("label `{l}` not in declared range"),
                    })
                }
                None => {
                    range.push(l.clone());
                    index.insert(l, range.len() - 1);
                    range.len() - 1
                }
            };
            values.push(v);
        }
        Ok(FunctionTable {
            domain,
            range,
            values,
        })
    }

    pub fn from_fn<S: Into<String>>(
        domain: Vec<Alphabet>,
        mut f: impl FnMut(&[usize]) -> S,
    ) -> Result<Self> {
        let shape: Vec<usize> = domain.iter().map(Alphabet::len).collect();
        let mut labels = Vec::new();
        for_each_index(&shape, |_, idx| labels.push(f(idx).into()));
        FunctionTable::from_labels(domain, labels, None)
    }

    pub fn domain(&self) -> &[Alphabet] {
        &self.domain
    }

    pub fn range(&self) -> &[String] {
        &self.range
    }

    pub fn shape(&self) -> Vec<usize> {
        self.domain.iter().map(Alphabet::len).collect()
    }

    /// Index into [`range`](Self::range) of the value at a domain index.
    pub fn value_index(&self, idx: &[usize]) -> usize {
        self.values[flat_index(idx, &row_major_strides(&self.shape()))]
    }

    pub fn value(&self, idx: &[usize]) -> &str {
        &self.range[self.value_index(idx)]
    }

    /// Swaps the two axes of a two-argument function.
    pub fn transpose(&self) -> Result<FunctionTable> {
        if self.domain.len() != 2 {
            return Err(Error::ShapeMismatch {
                expected: 2,
                found: self.domain.len(),
            });
        }
        let domain = vec![self.domain[1].clone(), self.domain[0].clone()];
        let values = {
            let (n0, n1) = (self.domain[0].len(), self.domain[1].len());
            let mut v = vec![0; n0 * n1];
            for i in 0..n0 {
                for j in 0..n1 {
                    v[j * n0 + i] = self.values[i * n1 + j];
                }
            }
            v
        };
        Ok(FunctionTable {
            domain,
            range: self.range.clone(),
            values,
        })
    }

    /// Checks names and symbols of the domain against `axes`.
    pub(crate) fn check_domain(&self, axes: &[&Alphabet]) -> Result<()> {
        if axes.len() != self.domain.len() {
            return Err(Error::ShapeMismatch {
                expected: axes.len(),
                found: self.domain.len(),
            });
        }
        for (mine, theirs) in self.domain.iter().zip(axes) {
            if mine.name() != theirs.name() {
                return Err(Error::AlphabetMismatch {
                    axis: theirs.name().to_string(),
                    detail: format!("function domain axis is named `{}`", mine.name()),
                });
            }
            mine.check_same_symbols(theirs)?;
        }
        Ok(())
    }
}

/// Distortion `d(g, ĝ)` between a true function value and an estimate, both
/// addressed by label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistortionRepr", into = "DistortionRepr")]
pub struct DistortionTable {
    truth: Vec<String>,
    estimate: Vec<String>,
    values: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistortionRepr {
    truth: Vec<String>,
    estimate: Vec<String>,
    values: Vec<Vec<f64>>,
}

impl TryFrom<DistortionRepr> for DistortionTable {
    type Error = Error;

    fn try_from(r: DistortionRepr) -> Result<Self> {
        DistortionTable::new(r.truth, r.estimate, r.values)
    }
}

impl From<DistortionTable> for DistortionRepr {
    fn from(d: DistortionTable) -> Self {
        DistortionRepr {
            truth: d.truth,
            estimate: d.estimate,
            values: d.values,
        }
    }
}

impl DistortionTable {
    /// Rejects negative or non-finite entries, and any pair of labels that
    /// violates `d(a, a') = 0 iff a = a'`.
    pub fn new(truth: Vec<String>, estimate: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        Alphabet::new("truth", truth.iter().cloned())?;
        Alphabet::new("estimate", estimate.iter().cloned())?;
        if values.len() != truth.len() || values.iter().any(|r| r.len() != estimate.len()) {
            return Err(Error::InvalidDistortion(format!(
                "table must be {}x{}",
                truth.len(),
                estimate.len()
            )));
        }
        for (i, t) in truth.iter().enumerate() {
            for (j, e) in estimate.iter().enumerate() {
                let d = values[i][j];
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::InvalidDistortion(format!("d({t}, {e}) = {d}")));
                }
                if t == e && d != 0.0 {
                    return Err(Error::InvalidDistortion(format!("d({t}, {t}) = {d}, must be 0")));
                }
                if t != e && d == 0.0 {
                    return Err(Error::InvalidDistortion(format!(
                        "d({t}, {e}) = 0 for distinct labels"
                    )));
                }
            }
        }
        Ok(DistortionTable {
            truth,
            estimate,
            values,
        })
    }

    /// Hamming distortion: 0 on equal labels, 1 otherwise.
    pub fn hamming(truth: &[String], estimate: &[String]) -> Result<Self> {
        let values = truth
            .iter()
            .map(|t| estimate.iter().map(|e| if t == e { 0.0 } else { 1.0 }).collect())
            .collect();
        DistortionTable::new(truth.to_vec(), estimate.to_vec(), values)
    }

    /// `scale * |a - b|` on labels parsed as numbers.
    pub fn scaled_absolute(truth: &[String], estimate: &[String], scale: f64) -> Result<Self> {
        let parse = |s: &String| {
            s.parse::<f64>()
                .map_err(|_| Error::InvalidDistortion(format!("label `{s}` is not numeric")))
        };
        let t: Vec<f64> = truth.iter().map(parse).collect::<Result<_>>()?;
        let e: Vec<f64> = estimate.iter().map(parse).collect::<Result<_>>()?;
        let values = t
            .iter()
            .map(|a| e.iter().map(|b| scale * (a - b).abs()).collect())
            .collect();
        DistortionTable::new(truth.to_vec(), estimate.to_vec(), values)
    }

    pub fn truth(&self) -> &[String] {
        &self.truth
    }

    pub fn estimate(&self) -> &[String] {
        &self.estimate
    }

    pub fn get(&self, truth: &str, estimate: &str) -> Option<f64> {
        let i = self.truth.iter().position(|t| t == truth)?;
        let j = self.estimate.iter().position(|e| e == estimate)?;
        Some(self.values[i][j])
    }

    pub(crate) fn lookup(&self, truth: &str, estimate: &str) -> Result<f64> {
        self.get(truth, estimate).ok_or_else(|| {
            Error::InvalidDistortion(format!("no entry for d({truth}, {estimate})"))
        })
    }
}

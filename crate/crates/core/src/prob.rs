//! Finite alphabets, dense joint probability tensors and stochastic kernels.
//!
//! A [`JointPmf`] is a row-major tensor whose axes are named [`Alphabet`]s.
//! Axes are addressed by name everywhere, so a joint built by chaining
//! kernels (`p(u) p(w|u) p(x|w) ...`) can be queried for any marginal
//! without tracking positions by hand.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Tolerance for normalization and nonnegativity checks.
pub const PROB_TOL: f64 = 1e-9;

/// Mass at or below this is treated as outside the support.
pub const SUPPORT_EPS: f64 = 1e-12;

/// A named, ordered set of distinct symbols. Symbol order fixes the tensor
/// axis indexing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "AlphabetRepr")]
pub struct Alphabet {
    name: String,
    symbols: Vec<String>,
}

#[derive(Deserialize)]
struct AlphabetRepr {
    name: String,
    symbols: Vec<String>,
}

impl TryFrom<AlphabetRepr> for Alphabet {
    type Error = Error;

    fn try_from(r: AlphabetRepr) -> Result<Self> {
        Alphabet::new(r.name, r.symbols)
    }
}

impl Alphabet {
    pub fn new<S: Into<String>>(
        name: impl Into<String>,
        symbols: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        let name = name.into();
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::InvalidAlphabet {
                name,
                reason: "no symbols".into(),
            });
        }
        let mut seen = HashSet::new();
        for s in &symbols {
            if !seen.insert(s.as_str()) {
                return Err(Error::InvalidAlphabet {
                    name,
                    reason: format!("duplicate symbol `{s}`"),
                });
            }
        }
        Ok(Alphabet { name, symbols })
    }

    /// Symbols `"0"`, `"1"`, ..., `"n-1"`.
    pub fn indexed(name: impl Into<String>, n: usize) -> Result<Self> {
        Alphabet::new(name, (0..n).map(|i| i.to_string()))
    }

    /// One-symbol alphabet, used for absent side information.
    pub fn singleton(name: impl Into<String>) -> Self {
        Alphabet {
            name: name.into(),
            symbols: vec!["*".to_string()],
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }

    pub fn symbol(&self, i: usize) -> &str {
        &self.symbols[i]
    }

    /// Same symbols under a different axis name.
    pub fn renamed(&self, name: impl Into<String>) -> Self {
        Alphabet {
            name: name.into(),
            symbols: self.symbols.clone(),
        }
    }

    pub(crate) fn check_same_symbols(&self, other: &Alphabet) -> Result<()> {
        if self.symbols != other.symbols {
            return Err(Error::AlphabetMismatch {
                axis: self.name.clone(),
                detail: format!("symbols {:?} vs {:?}", self.symbols, other.symbols),
            });
        }
        Ok(())
    }
}

/// A single invariant violation found by [`JointPmf::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Negative { index: Vec<usize>, value: f64 },
    NotFinite { index: Vec<usize>, value: f64 },
    NotNormalized { sum: f64 },
}

/// Diagnostic outcome of a validation pass. Empty means the tensor is a pmf.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Validation {
    pub violations: Vec<Violation>,
}

impl Validation {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for Validation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            match v {
                Violation::Negative { index, value } => {
                    write!(f, "negative mass {value} at {index:?}")?
                }
                Violation::NotFinite { index, value } => {
                    write!(f, "non-finite mass {value} at {index:?}")?
                }
                Violation::NotNormalized { sum } => write!(f, "mass sums to {sum}")?,
            }
        }
        Ok(())
    }
}

pub(crate) fn row_major_strides(shape: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * shape[k + 1];
    }
    strides
}

/// Calls `f(flat, multi_index)` for every cell of a row-major tensor.
pub(crate) fn for_each_index(shape: &[usize], mut f: impl FnMut(usize, &[usize])) {
    let total: usize = shape.iter().product();
    if total == 0 {
        return;
    }
    let mut idx = vec![0usize; shape.len()];
    for flat in 0..total {
        f(flat, &idx);
        for k in (0..shape.len()).rev() {
            idx[k] += 1;
            if idx[k] < shape[k] {
                break;
            }
            idx[k] = 0;
        }
    }
}

pub(crate) fn flat_index(idx: &[usize], strides: &[usize]) -> usize {
    idx.iter().zip(strides).map(|(i, s)| i * s).sum()
}

fn check_distinct_names(axes: &[Alphabet]) -> Result<()> {
    let mut seen = HashSet::new();
    for a in axes {
        if !seen.insert(a.name()) {
            return Err(Error::DuplicateAxis(a.name().to_string()));
        }
    }
    Ok(())
}

/// Dense joint probability mass function over named axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "JointPmfRepr", into = "JointPmfRepr")]
pub struct JointPmf {
    axes: Vec<Alphabet>,
    mass: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointPmfRepr {
    axes: Vec<Alphabet>,
    mass: Value,
}

impl TryFrom<JointPmfRepr> for JointPmf {
    type Error = Error;

    fn try_from(r: JointPmfRepr) -> Result<Self> {
        let shape: Vec<usize> = r.axes.iter().map(Alphabet::len).collect();
        let mass = nested::flatten(&r.mass, &shape)?;
        JointPmf::new(r.axes, mass)
    }
}

impl From<JointPmf> for JointPmfRepr {
    fn from(p: JointPmf) -> Self {
        let shape = p.shape();
        JointPmfRepr {
            mass: nested::nest(&p.mass, &shape),
            axes: p.axes,
        }
    }
}

impl JointPmf {
    /// Builds a pmf and rejects it unless it validates.
    pub fn new(axes: Vec<Alphabet>, mass: Vec<f64>) -> Result<Self> {
        let pmf = JointPmf::from_raw(axes, mass)?;
        let report = pmf.validate();
        if !report.is_ok() {
            return Err(Error::InvalidPmf(report));
        }
        Ok(pmf)
    }

    /// Checks only the tensor shape; call [`validate`](Self::validate) for
    /// the pmf invariants.
    pub fn from_raw(axes: Vec<Alphabet>, mass: Vec<f64>) -> Result<Self> {
        check_distinct_names(&axes)?;
        let expected: usize = axes.iter().map(Alphabet::len).product();
        if expected != mass.len() {
            return Err(Error::ShapeMismatch {
                expected,
                found: mass.len(),
            });
        }
        Ok(JointPmf { axes, mass })
    }

    pub fn from_fn(axes: Vec<Alphabet>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let shape: Vec<usize> = axes.iter().map(Alphabet::len).collect();
        let mut mass = vec![0.0; shape.iter().product()];
        for_each_index(&shape, |flat, idx| mass[flat] = f(idx));
        JointPmf::new(axes, mass)
    }

    pub fn uniform(axes: Vec<Alphabet>) -> Result<Self> {
        let n: usize = axes.iter().map(Alphabet::len).product();
        JointPmf::new(axes, vec![1.0 / n as f64; n])
    }

    /// Point mass at the given multi-index.
    pub fn point_mass(axes: Vec<Alphabet>, at: &[usize]) -> Result<Self> {
        let at = at.to_vec();
        JointPmf::from_fn(axes, |idx| if idx == at.as_slice() { 1.0 } else { 0.0 })
    }

    pub fn validate(&self) -> Validation {
        let mut report = Validation::default();
        let shape = self.shape();
        let mut sum = 0.0;
        for_each_index(&shape, |flat, idx| {
            let m = self.mass[flat];
            if !m.is_finite() {
                report.violations.push(Violation::NotFinite {
                    index: idx.to_vec(),
                    value: m,
                });
            } else if m < -PROB_TOL {
                report.violations.push(Violation::Negative {
                    index: idx.to_vec(),
                    value: m,
                });
            }
            sum += m;
        });
        if !sum.is_finite() || (sum - 1.0).abs() > PROB_TOL {
            report.violations.push(Violation::NotNormalized { sum });
        }
        report
    }

    pub fn axes(&self) -> &[Alphabet] {
        &self.axes
    }

    pub fn axis_names(&self) -> Vec<&str> {
        self.axes.iter().map(Alphabet::name).collect()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Alphabet::len).collect()
    }

    pub fn strides(&self) -> Vec<usize> {
        row_major_strides(&self.shape())
    }

    pub fn axis_position(&self, name: &str) -> Result<usize> {
        self.axes
            .iter()
            .position(|a| a.name() == name)
            .ok_or_else(|| Error::UnknownAxis(name.to_string()))
    }

    pub fn axis(&self, name: &str) -> Result<&Alphabet> {
        Ok(&self.axes[self.axis_position(name)?])
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.mass[flat_index(idx, &self.strides())]
    }

    /// Mass of the cell named by symbol labels, one per axis.
    pub fn get_by_symbols(&self, symbols: &[&str]) -> Result<f64> {
        if symbols.len() != self.axes.len() {
            return Err(Error::ShapeMismatch {
                expected: self.axes.len(),
                found: symbols.len(),
            });
        }
        let mut idx = Vec::with_capacity(symbols.len());
        for (a, s) in self.axes.iter().zip(symbols) {
            idx.push(a.index_of(s).ok_or_else(|| Error::AlphabetMismatch {
                axis: a.name().to_string(),
                detail: format!("no symbol `{s}`"),
            })?);
        }
        Ok(self.get(&idx))
    }

    fn positions(&self, names: &[&str]) -> Result<Vec<usize>> {
        let mut seen = HashSet::new();
        names
            .iter()
            .map(|n| {
                if !seen.insert(*n) {
                    return Err(Error::DuplicateAxis(n.to_string()));
                }
                self.axis_position(n)
            })
            .collect()
    }

    /// Sums out every axis not in `keep`. The result's axes follow the order
    /// of `keep`.
    pub fn marginalize(&self, keep: &[&str]) -> Result<JointPmf> {
        let pos = self.positions(keep)?;
        let axes: Vec<Alphabet> = pos.iter().map(|&p| self.axes[p].clone()).collect();
        let new_shape: Vec<usize> = axes.iter().map(Alphabet::len).collect();
        let new_strides = row_major_strides(&new_shape);
        let mut mass = vec![0.0; new_shape.iter().product()];
        for_each_index(&self.shape(), |flat, idx| {
            let m = self.mass[flat];
            if m != 0.0 {
                let t: usize = pos.iter().zip(&new_strides).map(|(&p, s)| idx[p] * s).sum();
                mass[t] += m;
            }
        });
        Ok(JointPmf { axes, mass })
    }

    /// Reorders axes without changing the mass assignment.
    pub fn permute(&self, order: &[&str]) -> Result<JointPmf> {
        if order.len() != self.axes.len() {
            return Err(Error::ShapeMismatch {
                expected: self.axes.len(),
                found: order.len(),
            });
        }
        self.marginalize(order)
    }

    /// Appends each kernel's target axes, multiplying by `p(to | from)`.
    /// Every kernel's source axes must already be present, with identical
    /// symbol lists.
    pub fn compose(&self, kernels: &[Kernel]) -> Result<JointPmf> {
        let mut joint = self.clone();
        for k in kernels {
            joint = joint.compose_one(k)?;
        }
        Ok(joint)
    }

    fn compose_one(&self, k: &Kernel) -> Result<JointPmf> {
        let mut pos = Vec::with_capacity(k.from.len());
        for a in &k.from {
            let p = self.axis_position(a.name())?;
            self.axes[p].check_same_symbols(a)?;
            pos.push(p);
        }
        for a in &k.to {
            if self.axis_position(a.name()).is_ok() {
                return Err(Error::DuplicateAxis(a.name().to_string()));
            }
        }
        let from_strides = row_major_strides(&k.from_shape());
        let to_len = k.to_len();
        let mut mass = vec![0.0; self.mass.len() * to_len];
        for_each_index(&self.shape(), |flat, idx| {
            let m = self.mass[flat];
            if m == 0.0 {
                return;
            }
            let r: usize = pos.iter().zip(&from_strides).map(|(&p, s)| idx[p] * s).sum();
            let row = &k.rows[r];
            let out = &mut mass[flat * to_len..(flat + 1) * to_len];
            for (o, q) in out.iter_mut().zip(row) {
                *o = m * q;
            }
        });
        let mut axes = self.axes.clone();
        axes.extend(k.to.iter().cloned());
        Ok(JointPmf { axes, mass })
    }

    /// Independent product `self ⊗ other`.
    pub fn product(&self, other: &JointPmf) -> Result<JointPmf> {
        let mut axes = self.axes.clone();
        axes.extend(other.axes.iter().cloned());
        check_distinct_names(&axes)?;
        let mut mass = Vec::with_capacity(self.mass.len() * other.mass.len());
        for a in &self.mass {
            for b in &other.mass {
                mass.push(a * b);
            }
        }
        Ok(JointPmf { axes, mass })
    }

    /// Renames one axis.
    pub fn rename_axis(&self, from: &str, to: &str) -> Result<JointPmf> {
        let p = self.axis_position(from)?;
        let mut axes = self.axes.clone();
        axes[p] = axes[p].renamed(to);
        JointPmf::from_raw(axes, self.mass.clone())
    }

    /// Number of cells with mass above [`SUPPORT_EPS`].
    pub fn support_size(&self) -> usize {
        self.mass.iter().filter(|&&m| m > SUPPORT_EPS).count()
    }
}

/// A stochastic map `p(to | from)`: one pmf over target tuples per source
/// tuple, rows in row-major order of the source axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelRepr", into = "KernelRepr")]
pub struct Kernel {
    from: Vec<Alphabet>,
    to: Vec<Alphabet>,
    rows: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelRepr {
    from: Vec<Alphabet>,
    to: Vec<Alphabet>,
    rows: Vec<Vec<f64>>,
}

impl TryFrom<KernelRepr> for Kernel {
    type Error = Error;

    fn try_from(r: KernelRepr) -> Result<Self> {
        Kernel::new(r.from, r.to, r.rows)
    }
}

impl From<Kernel> for KernelRepr {
    fn from(k: Kernel) -> Self {
        KernelRepr {
            from: k.from,
            to: k.to,
            rows: k.rows,
        }
    }
}

impl Kernel {
    pub fn new(from: Vec<Alphabet>, to: Vec<Alphabet>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let mut all = from.clone();
        all.extend(to.iter().cloned());
        check_distinct_names(&all)?;
        let n_rows: usize = from.iter().map(Alphabet::len).product();
        let n_cols: usize = to.iter().map(Alphabet::len).product();
        if rows.len() != n_rows {
            return Err(Error::ShapeMismatch {
                expected: n_rows,
                found: rows.len(),
            });
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::InvalidKernelRow {
                    row: r,
                    detail: format!("expected {n_cols} entries, found {}", row.len()),
                });
            }
            if let Some((c, v)) = row
                .iter()
                .enumerate()
                .find(|(_, v)| !v.is_finite() || **v < -PROB_TOL)
            {
                return Err(Error::InvalidKernelRow {
                    row: r,
                    detail: format!("entry {c} is {v}"),
                });
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > PROB_TOL {
                return Err(Error::InvalidKernelRow {
                    row: r,
                    detail: format!("sums to {s}"),
                });
            }
        }
        Ok(Kernel { from, to, rows })
    }

    /// Builds rows from `f(from_index, to_index) = p(to | from)`.
    pub fn from_fn(
        from: Vec<Alphabet>,
        to: Vec<Alphabet>,
        mut f: impl FnMut(&[usize], &[usize]) -> f64,
    ) -> Result<Self> {
        let from_shape: Vec<usize> = from.iter().map(Alphabet::len).collect();
        let to_shape: Vec<usize> = to.iter().map(Alphabet::len).collect();
        let mut rows = Vec::new();
        for_each_index(&from_shape, |_, fi| {
            let mut row = vec![0.0; to_shape.iter().product()];
            for_each_index(&to_shape, |t, ti| row[t] = f(fi, ti));
            rows.push(row);
        });
        Kernel::new(from, to, rows)
    }

    /// A deterministic kernel `to = map(from)`.
    pub fn deterministic(
        from: Vec<Alphabet>,
        to: Vec<Alphabet>,
        mut map: impl FnMut(&[usize]) -> Vec<usize>,
    ) -> Result<Self> {
        Kernel::from_fn(from, to, |fi, ti| if map(fi) == ti { 1.0 } else { 0.0 })
    }

    /// Copies `from` onto a new axis named `to_name` with the same symbols.
    pub fn identity(from: &Alphabet, to_name: &str) -> Result<Self> {
        Kernel::deterministic(vec![from.clone()], vec![from.renamed(to_name)], |i| {
            i.to_vec()
        })
    }

    /// Every row equals `dist`, i.e. the target is independent of the source.
    pub fn constant(from: Vec<Alphabet>, to: Alphabet, dist: &[f64]) -> Result<Self> {
        Kernel::from_fn(from, vec![to], |_, ti| dist[ti[0]])
    }

    pub fn from_axes(&self) -> &[Alphabet] {
        &self.from
    }

    pub fn to_axes(&self) -> &[Alphabet] {
        &self.to
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn from_shape(&self) -> Vec<usize> {
        self.from.iter().map(Alphabet::len).collect()
    }

    pub fn to_shape(&self) -> Vec<usize> {
        self.to.iter().map(Alphabet::len).collect()
    }

    pub fn to_len(&self) -> usize {
        self.to.iter().map(Alphabet::len).product()
    }

    pub fn row(&self, from_idx: &[usize]) -> &[f64] {
        &self.rows[flat_index(from_idx, &row_major_strides(&self.from_shape()))]
    }

    pub fn prob(&self, from_idx: &[usize], to_idx: &[usize]) -> f64 {
        self.row(from_idx)[flat_index(to_idx, &row_major_strides(&self.to_shape()))]
    }
}

/// Conversion between flat row-major buffers and nested JSON arrays.
pub(crate) mod nested {
    use serde::de::DeserializeOwned;
    use serde::Serialize;
    use serde_json::Value;

    use crate::error::{Error, Result};

    pub fn flatten<T: DeserializeOwned>(v: &Value, shape: &[usize]) -> Result<Vec<T>> {
        let mut out = Vec::new();
        walk(v, shape, &mut out)?;
        Ok(out)
    }

    fn walk<T: DeserializeOwned>(v: &Value, shape: &[usize], out: &mut Vec<T>) -> Result<()> {
        match shape.split_first() {
            None => {
                out.push(serde_json::from_value(v.clone())?);
                Ok(())
            }
            Some((&n, rest)) => {
                let arr = v.as_array().ok_or(Error::ShapeMismatch {
                    expected: n,
                    found: 0,
                })?;
                if arr.len() != n {
                    return Err(Error::ShapeMismatch {
                        expected: n,
                        found: arr.len(),
                    });
                }
                arr.iter().try_for_each(|x| walk(x, rest, out))
            }
        }
    }

    pub fn nest<T: Serialize>(flat: &[T], shape: &[usize]) -> Value {
        match shape.split_first() {
            None => serde_json::to_value(&flat[0]).unwrap_or(Value::Null),
            Some((&n, rest)) => {
                let chunk: usize = rest.iter().product();
                Value::Array(
                    (0..n)
                        .map(|i| nest(&flat[i * chunk..(i + 1) * chunk], rest))
                        .collect(),
                )
            }
        }
    }
}

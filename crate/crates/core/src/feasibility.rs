//! Sufficient conditions for sending a function of two correlated sources
//! over a MAC with a given choice of auxiliary codes.
//!
//! A [`SystemSpec`] fixes the chain
//! `p(u1,u2,z1,z2,z) p(w1|u1,z1) p(w2|u2,z2) p(x1|w1) p(x2|w2) p(y|x1,x2)`
//! together with the function, the decoder and a distortion target.
//! [`check_feasibility`] evaluates the three rate inequalities and the
//! expected distortion.

use serde::{Deserialize, Serialize};

use crate::channels::DiscreteMac;
use crate::error::{invalid_param, Error, Result};
use crate::func::{DistortionTable, FunctionTable};
use crate::info::{binary_entropy, mutual_information};
use crate::prob::{for_each_index, Alphabet, JointPmf, Kernel, PROB_TOL, SUPPORT_EPS};

/// Margin below which an inequality counts as tight.
pub const VERDICT_TOL: f64 = 1e-9;

/// Source axes in the order required of `source_joint`.
pub const SOURCE_AXES: [&str; 5] = ["u1", "u2", "z1", "z2", "z"];

/// Axes of the assembled joint.
pub const SYSTEM_AXES: [&str; 10] = ["u1", "u2", "z1", "z2", "z", "w1", "w2", "x1", "x2", "y"];

/// A complete instance: sources, auxiliary codes, channel, decoder and
/// distortion target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub source_joint: JointPmf,
    pub w1_kernel: Kernel,
    pub w2_kernel: Kernel,
    pub x1_kernel: Kernel,
    pub x2_kernel: Kernel,
    pub channel: DiscreteMac,
    pub function: FunctionTable,
    pub decoder: FunctionTable,
    pub distortion: DistortionTable,
    pub target_d: f64,
}

fn expect_axes(what: &str, axes: &[Alphabet], names: &[&str]) -> Result<()> {
    let found: Vec<&str> = axes.iter().map(Alphabet::name).collect();
    if found != names {
        return Err(Error::AlphabetMismatch {
            axis: what.to_string(),
            detail: format!("expected axes {names:?}, found {found:?}"),
        });
    }
    Ok(())
}

fn chain(what: &str, upstream: &Alphabet, downstream: &Alphabet) -> Result<()> {
    upstream.check_same_symbols(downstream).map_err(|e| Error::AlphabetMismatch {
        axis: what.to_string(),
        detail: e.to_string(),
    })
}

impl SystemSpec {
    /// Parses JSON, naming the offending field on schema errors.
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_path_to_error::Error<serde_json::Error>> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de)
    }

    /// Checks that the axis names are the fixed ones and that every link of
    /// the chain sees the alphabet produced upstream.
    pub fn validate(&self) -> Result<()> {
        let src = self.source_joint.axes();
        expect_axes("source_joint", src, &SOURCE_AXES)?;
        expect_axes("w1_kernel.from", self.w1_kernel.from_axes(), &["u1", "z1"])?;
        expect_axes("w1_kernel.to", self.w1_kernel.to_axes(), &["w1"])?;
        expect_axes("w2_kernel.from", self.w2_kernel.from_axes(), &["u2", "z2"])?;
        expect_axes("w2_kernel.to", self.w2_kernel.to_axes(), &["w2"])?;
        expect_axes("x1_kernel.from", self.x1_kernel.from_axes(), &["w1"])?;
        expect_axes("x1_kernel.to", self.x1_kernel.to_axes(), &["x1"])?;
        expect_axes("x2_kernel.from", self.x2_kernel.from_axes(), &["w2"])?;
        expect_axes("x2_kernel.to", self.x2_kernel.to_axes(), &["x2"])?;
        let (cx1, cx2) = self.channel.inputs();
        expect_axes("channel.from", &[cx1.clone(), cx2.clone()], &["x1", "x2"])?;
        expect_axes("channel.to", std::slice::from_ref(self.channel.output()), &["y"])?;

        chain("u1", &src[0], &self.w1_kernel.from_axes()[0])?;
        chain("z1", &src[2], &self.w1_kernel.from_axes()[1])?;
        chain("u2", &src[1], &self.w2_kernel.from_axes()[0])?;
        chain("z2", &src[3], &self.w2_kernel.from_axes()[1])?;
        let w1 = &self.w1_kernel.to_axes()[0];
        let w2 = &self.w2_kernel.to_axes()[0];
        chain("w1", w1, &self.x1_kernel.from_axes()[0])?;
        chain("w2", w2, &self.x2_kernel.from_axes()[0])?;
        chain("x1", &self.x1_kernel.to_axes()[0], cx1)?;
        chain("x2", &self.x2_kernel.to_axes()[0], cx2)?;

        self.function.check_domain(&[&src[0], &src[1]])?;
        self.decoder.check_domain(&[w1, w2, &src[4]])?;
        for g in self.function.range() {
            if !self.distortion.truth().contains(g) {
                return Err(Error::InvalidDistortion(format!("function value `{g}` missing from truth labels")));
            }
        }
        for g in self.decoder.range() {
            if !self.distortion.estimate().contains(g) {
                return Err(Error::InvalidDistortion(format!(
                    "decoder value `{g}` missing from estimate labels"
                )));
            }
        }
        if !(self.target_d >= 0.0) || !self.target_d.is_finite() {
            return Err(invalid_param("target_d", format!("{} must be finite and >= 0", self.target_d)));
        }
        Ok(())
    }

    /// The source half of the spec.
    pub fn source_part(&self) -> SourceSpec {
        SourceSpec {
            source_joint: self.source_joint.clone(),
            w1_kernel: self.w1_kernel.clone(),
            w2_kernel: self.w2_kernel.clone(),
        }
    }
}

/// Sources and auxiliary codes only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub source_joint: JointPmf,
    pub w1_kernel: Kernel,
    pub w2_kernel: Kernel,
}

impl SourceSpec {
    fn validate(&self) -> Result<()> {
        let src = self.source_joint.axes();
        expect_axes("source_joint", src, &SOURCE_AXES)?;
        expect_axes("w1_kernel.from", self.w1_kernel.from_axes(), &["u1", "z1"])?;
        expect_axes("w1_kernel.to", self.w1_kernel.to_axes(), &["w1"])?;
        expect_axes("w2_kernel.from", self.w2_kernel.from_axes(), &["u2", "z2"])?;
        expect_axes("w2_kernel.to", self.w2_kernel.to_axes(), &["w2"])?;
        Ok(())
    }

    /// Joint over `(u1, u2, z1, z2, z, w1, w2)`.
    pub fn assemble(&self) -> Result<JointPmf> {
        self.validate()?;
        self.source_joint
            .compose(&[self.w1_kernel.clone(), self.w2_kernel.clone()])
    }
}

/// The ten-axis joint over [`SYSTEM_AXES`].
pub fn assemble_joint(spec: &SystemSpec) -> Result<JointPmf> {
    spec.validate()?;
    let joint = spec.source_joint.compose(&[
        spec.w1_kernel.clone(),
        spec.w2_kernel.clone(),
        spec.x1_kernel.clone(),
        spec.x2_kernel.clone(),
        spec.channel.law().clone(),
    ])?;
    let report = joint.validate();
    if !report.is_ok() {
        return Err(Error::InvalidPmf(report));
    }
    Ok(joint)
}

/// Outcome of one inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Strict,
    Boundary,
    Violated,
}

impl Verdict {
    pub fn from_margin(margin: f64) -> Verdict {
        if margin > VERDICT_TOL {
            Verdict::Strict
        } else if margin >= -VERDICT_TOL {
            Verdict::Boundary
        } else {
            Verdict::Violated
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Strict => "strict",
            Verdict::Boundary => "boundary",
            Verdict::Violated => "violated",
        }
    }

    /// Whether the inequality is acceptable, with tight cases allowed on
    /// request.
    pub fn passes(&self, allow_boundary: bool) -> bool {
        match self {
            Verdict::Strict => true,
            Verdict::Boundary => allow_boundary,
            Verdict::Violated => false,
        }
    }
}

/// `lhs < rhs` evaluated in bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityRecord {
    pub lhs_label: String,
    pub rhs_label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub verdict: Verdict,
}

impl InequalityRecord {
    fn new(lhs_label: &str, rhs_label: &str, lhs: f64, rhs: f64) -> Self {
        let margin = rhs - lhs;
        InequalityRecord {
            lhs_label: lhs_label.to_string(),
            rhs_label: rhs_label.to_string(),
            lhs,
            rhs,
            margin,
            verdict: Verdict::from_margin(margin),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    /// Encoder 1, encoder 2, then the sum.
    pub inequalities: Vec<InequalityRecord>,
    pub achieved_distortion: f64,
    pub target_d: f64,
    pub distortion_ok: bool,
}

impl FeasibilityReport {
    pub fn sum(&self) -> &InequalityRecord {
        &self.inequalities[2]
    }

    /// All rate inequalities pass and the distortion target is met.
    pub fn feasible(&self, allow_boundary: bool) -> bool {
        self.distortion_ok && self.inequalities.iter().all(|r| r.verdict.passes(allow_boundary))
    }

    /// The least favourable verdict among the three inequalities.
    pub fn worst_verdict(&self) -> Verdict {
        self.inequalities
            .iter()
            .map(|r| r.verdict)
            .max_by_key(|v| *v as u8)
            .unwrap_or(Verdict::Strict)
    }
}

fn expected_distortion(
    joint: &JointPmf,
    function: &FunctionTable,
    decoder: &FunctionTable,
    distortion: &DistortionTable,
) -> Result<f64> {
    let m = joint.marginalize(&["u1", "u2", "w1", "w2", "z"])?;
    let mut total = 0.0;
    let mut err = None;
    for_each_index(&m.shape(), |flat, idx| {
        let p = m.mass()[flat];
        if p <= 0.0 || err.is_some() {
            return;
        }
        let truth = function.value(&idx[0..2]);
        let estimate = decoder.value(&idx[2..5]);
        match distortion.lookup(truth, estimate) {
            Ok(d) => total += p * d,
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

/// Evaluates
///
/// - `I(U1,Z1;W1|W2,Z)` against `I(X1;Y|X2,W2,Z)`,
/// - `I(U2,Z2;W2|W1,Z)` against `I(X2;Y|X1,W1,Z)`,
/// - `I(U1,U2,Z1,Z2;W1,W2|Z)` against `I(X1,X2;Y|Z)`,
///
/// and `E[d(f(U1,U2), g(W1,W2,Z))]` against the target.
pub fn check_feasibility(spec: &SystemSpec) -> Result<FeasibilityReport> {
    let joint = assemble_joint(spec)?;
    let mi = |a: &[&str], b: &[&str], c: &[&str]| mutual_information(&joint, a, b, c);
    let inequalities = vec![
        InequalityRecord::new(
            "I(U1,Z1;W1|W2,Z)",
            "I(X1;Y|X2,W2,Z)",
            mi(&["u1", "z1"], &["w1"], &["w2", "z"])?,
            mi(&["x1"], &["y"], &["x2", "w2", "z"])?,
        ),
        InequalityRecord::new(
            "I(U2,Z2;W2|W1,Z)",
            "I(X2;Y|X1,W1,Z)",
            mi(&["u2", "z2"], &["w2"], &["w1", "z"])?,
            mi(&["x2"], &["y"], &["x1", "w1", "z"])?,
        ),
        InequalityRecord::new(
            "I(U1,U2,Z1,Z2;W1,W2|Z)",
            "I(X1,X2;Y|Z)",
            mi(&["u1", "u2", "z1", "z2"], &["w1", "w2"], &["z"])?,
            mi(&["x1", "x2"], &["y"], &["z"])?,
        ),
    ];
    let achieved_distortion = expected_distortion(&joint, &spec.function, &spec.decoder, &spec.distortion)?;
    Ok(FeasibilityReport {
        inequalities,
        achieved_distortion,
        target_d: spec.target_d,
        distortion_ok: achieved_distortion <= spec.target_d + PROB_TOL,
    })
}

/// Lower bounds on the source-coding rates when the channel is noiseless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateRegion {
    /// `I(U1,Z1;W1|W2,Z)`
    pub r1: f64,
    /// `I(U2,Z2;W2|W1,Z)`
    pub r2: f64,
    /// `I(U1,U2,Z1,Z2;W1,W2|Z)`
    pub sum: f64,
}

pub fn source_coding_region(spec: &SourceSpec) -> Result<RateRegion> {
    let joint = spec.assemble()?;
    let mi = |a: &[&str], b: &[&str], c: &[&str]| mutual_information(&joint, a, b, c);
    Ok(RateRegion {
        r1: mi(&["u1", "z1"], &["w1"], &["w2", "z"])?,
        r2: mi(&["u2", "z2"], &["w2"], &["w1", "z"])?,
        sum: mi(&["u1", "u2", "z1", "z2"], &["w1", "w2"], &["z"])?,
    })
}

/// Bayes decoder for given auxiliary codes: for each `(w1, w2, z)` the
/// estimate label minimizing the posterior expected distortion, ties going
/// to the earliest estimate label. Off-support cells get the first label.
pub fn optimal_decoder(
    sources: &SourceSpec,
    function: &FunctionTable,
    distortion: &DistortionTable,
) -> Result<FunctionTable> {
    let joint = sources.assemble()?;
    function.check_domain(&[&joint.axes()[0], &joint.axes()[1]])?;
    let m = joint.marginalize(&["w1", "w2", "z", "u1", "u2"])?;
    let shape = m.shape();
    let cells: usize = shape[..3].iter().product();
    let inner: usize = shape[3] * shape[4];
    let estimates = distortion.estimate();
    let mut labels = Vec::with_capacity(cells);
    for c in 0..cells {
        let mut cost = vec![0.0; estimates.len()];
        for k in 0..inner {
            let p = m.mass()[c * inner + k];
            if p <= SUPPORT_EPS {
                continue;
            }
            let truth = function.value(&[k / shape[4], k % shape[4]]);
            for (slot, e) in cost.iter_mut().zip(estimates) {
                *slot += p * distortion.lookup(truth, e)?;
            }
        }
        let mut best = 0;
        for (j, c) in cost.iter().enumerate() {
            if *c < cost[best] - 1e-15 {
                best = j;
            }
        }
        labels.push(estimates[best].clone());
    }
    let domain = m.axes()[..3].to_vec();
    FunctionTable::from_labels(domain, labels, Some(estimates.to_vec()))
}

/// Expected distortion `d̃(ũ1, z̃, w1)` of a remote source: the encoder sees
/// `(ũ1, z̃)`, the posterior gives `p(u1, z | ũ1, z̃)`, and the estimate is
/// `g(w1, z̃)` against `f(u1, z)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InducedDistortion {
    pub noisy: Alphabet,
    pub side: Alphabet,
    pub estimate: Alphabet,
    /// Row-major over `(noisy, side, estimate)`.
    pub values: Vec<f64>,
}

impl InducedDistortion {
    pub fn get(&self, noisy: usize, side: usize, w: usize) -> f64 {
        self.values[(noisy * self.side.len() + side) * self.estimate.len() + w]
    }
}

pub fn induce_remote_distortion(
    posterior: &Kernel,
    f: &FunctionTable,
    g: &FunctionTable,
    d: &DistortionTable,
) -> Result<InducedDistortion> {
    if posterior.from_axes().len() != 2 || posterior.to_axes().len() != 2 {
        return Err(Error::ShapeMismatch {
            expected: 2,
            found: posterior.from_axes().len(),
        });
    }
    let to: Vec<&Alphabet> = posterior.to_axes().iter().collect();
    f.check_domain(&to)?;
    if g.domain().len() != 2 {
        return Err(Error::ShapeMismatch {
            expected: 2,
            found: g.domain().len(),
        });
    }
    let (noisy, side) = (&posterior.from_axes()[0], &posterior.from_axes()[1]);
    chain(side.name(), side, &g.domain()[1])?;
    let estimate = g.domain()[0].clone();
    let nz = posterior.to_axes()[1].len();
    let mut values = Vec::with_capacity(noisy.len() * side.len() * estimate.len());
    for a in 0..noisy.len() {
        for s in 0..side.len() {
            let row = posterior.row(&[a, s]);
            for w in 0..estimate.len() {
                let guess = g.value(&[w, s]);
                let mut acc = 0.0;
                for (k, &p) in row.iter().enumerate() {
                    if p > 0.0 {
                        acc += p * d.lookup(f.value(&[k / nz, k % nz]), guess)?;
                    }
                }
                values.push(acc);
            }
        }
    }
    Ok(InducedDistortion {
        noisy: noisy.clone(),
        side: side.clone(),
        estimate,
        values,
    })
}

/// Linear-code rates `(h(q), h(q))` for the XOR of two uniform bits that
/// differ with probability `q`. A baseline comparator, not an instance of
/// the random-coding conditions above.
pub fn korner_marton_bounds(q: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&q) {
        return Err(invalid_param("q", format!("{q} outside [0, 1]")));
    }
    let h = binary_entropy(q);
    Ok((h, h))
}

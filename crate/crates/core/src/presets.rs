//! Ready-made instances: the ternary off-diagonal source pair over the
//! binary adder MAC, and its quantized 3×3 grid counterpart.

use crate::channels::adder_mac;
use crate::error::Result;
use crate::feasibility::{optimal_decoder, SourceSpec, SystemSpec};
use crate::func::{DistortionTable, FunctionTable};
use crate::graph::{
    characteristic_graph, min_entropy_coloring, peer_characteristic_graph, CharGraph, Coloring, ColoringMode,
    Fidelity,
};
use crate::prob::{Alphabet, JointPmf, Kernel};

/// Threshold used for the grid example: half of a cell width in the
/// absolute-difference measure.
pub const GRID_DELTA: f64 = 1.0 / 6.0;

/// Distortion budget of the grid example.
pub const GRID_TARGET_D: f64 = 1.0 / 6.0;

fn ternary(name: &str) -> Alphabet {
    Alphabet::new(name, ["1", "2", "3"]).expect("static alphabet")
}

/// Uniform over the six pairs `(u1, u2)` with `u1 != u2`, `u_i ∈ {1,2,3}`.
pub fn off_diagonal_pair() -> JointPmf {
    JointPmf::from_fn(vec![ternary("u1"), ternary("u2")], |i| if i[0] != i[1] { 1.0 / 6.0 } else { 0.0 })
        .expect("static pmf")
}

/// `f(u1, u2) = 1` if `u1 > u2`, else 0.
pub fn greater_than() -> FunctionTable {
    FunctionTable::from_labels(
        vec![ternary("u1"), ternary("u2")],
        (0..9)
            .map(|k| if k / 3 > k % 3 { "1" } else { "0" }.to_string())
            .collect(),
        Some(vec!["0".into(), "1".into()]),
    )
    .expect("static table")
}

/// `f(u1, u2) = |u1 - u2|` in cell units.
pub fn cell_distance() -> FunctionTable {
    FunctionTable::from_labels(
        vec![ternary("u1"), ternary("u2")],
        (0..9)
            .map(|k: usize| (k / 3).abs_diff(k % 3).to_string())
            .collect(),
        Some(vec!["0".into(), "1".into(), "2".into()]),
    )
    .expect("static table")
}

/// Side information `z = |u1 - u2|` at the decoder: joint over
/// `(u1, u2, z)`.
pub fn off_diagonal_with_distance() -> JointPmf {
    let z = Alphabet::new("z", ["1", "2"]).expect("static alphabet");
    JointPmf::from_fn(vec![ternary("u1"), ternary("u2"), z], |i| {
        if i[0] != i[1] && i[0].abs_diff(i[1]) == i[2] + 1 {
            1.0 / 6.0
        } else {
            0.0
        }
    })
    .expect("static pmf")
}

fn labels(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// Hamming distortion on `{0, 1}`.
pub fn binary_hamming() -> DistortionTable {
    DistortionTable::hamming(&labels(&["0", "1"]), &labels(&["0", "1"])).expect("static table")
}

/// `|a - b| / 3` on cell distances `{0, 1, 2}`: the distance between cell
/// centers on the unit interval split in three.
pub fn cell_center_distance() -> DistortionTable {
    let l = labels(&["0", "1", "2"]);
    DistortionTable::scaled_absolute(&l, &l, 1.0 / 3.0).expect("static table")
}

/// Which function and fidelity a two-encoder preset uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// `1{u1 > u2}`, exact recovery, Hamming distortion.
    Ternary,
    /// `|u1 - u2|` on grid cells, threshold graph, absolute distortion.
    Grid,
}

impl Preset {
    pub fn function(&self) -> FunctionTable {
        match self {
            Preset::Ternary => greater_than(),
            Preset::Grid => cell_distance(),
        }
    }

    pub fn distortion(&self) -> DistortionTable {
        match self {
            Preset::Ternary => binary_hamming(),
            Preset::Grid => cell_center_distance(),
        }
    }

    pub fn fidelity(&self) -> Fidelity {
        match self {
            Preset::Ternary => Fidelity::Exact,
            Preset::Grid => Fidelity::Threshold {
                measure: cell_center_distance(),
                delta: GRID_DELTA,
            },
        }
    }

    pub fn target_d(&self) -> f64 {
        match self {
            // best achievable with the minimum-entropy colorings
            Preset::Ternary => 1.0 / 6.0,
            Preset::Grid => GRID_TARGET_D,
        }
    }

    /// Characteristic graphs of both encoders under `pair`, a joint over
    /// `(u1, u2)` on `{1, 2, 3}`.
    pub fn graphs(&self, pair: &JointPmf) -> Result<(CharGraph, CharGraph)> {
        let f = self.function();
        Ok((
            characteristic_graph(pair, &f, &self.fidelity())?,
            peer_characteristic_graph(pair, &f, &self.fidelity())?,
        ))
    }

    /// Exact minimum-entropy colorings of both graphs with their entropies.
    pub fn colorings(&self, pair: &JointPmf) -> Result<[(Coloring, f64); 2]> {
        let (g1, g2) = self.graphs(pair)?;
        Ok([
            min_entropy_coloring(&g1, &pair.marginalize(&["u1"])?, ColoringMode::Exact)?,
            min_entropy_coloring(&g2, &pair.marginalize(&["u2"])?, ColoringMode::Exact)?,
        ])
    }
}

/// How the colors reach the channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelCode {
    /// `X1 = C1`, `X2 = 1 - C2`.
    Joint,
    /// Inputs drawn independently of the colors, each from its color's
    /// marginal: the channel sees what separate codebooks would send.
    Independent,
}

fn color_kernel(coloring: &Coloring, source: &Alphabet, side: &str, out: &str) -> Result<Kernel> {
    Kernel::deterministic(
        vec![source.clone(), Alphabet::singleton(side)],
        vec![coloring.alphabet(out)?],
        |i| vec![coloring.color_of(i[0])],
    )
}

fn color_marginal(coloring: &Coloring, prob: &[f64]) -> Vec<f64> {
    let mut m = vec![0.0; coloring.num_colors()];
    for (v, p) in prob.iter().enumerate() {
        m[coloring.color_of(v)] += p;
    }
    m
}

/// [`system_on`] the off-diagonal pair.
pub fn system(preset: Preset, code: ChannelCode) -> Result<SystemSpec> {
    system_on(&off_diagonal_pair(), preset, code)
}

/// Full system for a preset over `pair`: colors as auxiliaries, the adder
/// MAC, and the Bayes decoder for the chosen colorings.
pub fn system_on(pair: &JointPmf, preset: Preset, code: ChannelCode) -> Result<SystemSpec> {
    let [(c1, _), (c2, _)] = preset.colorings(pair)?;
    let pair = pair.permute(&["u1", "u2"])?;
    let mut axes = pair.axes().to_vec();
    axes.extend(["z1", "z2", "z"].map(Alphabet::singleton));
    let source_joint = JointPmf::new(axes, pair.mass().to_vec())?;
    let w1_kernel = color_kernel(&c1, &ternary("u1"), "z1", "w1")?;
    let w2_kernel = color_kernel(&c2, &ternary("u2"), "z2", "w2")?;
    let w1 = c1.alphabet("w1")?;
    let w2 = c2.alphabet("w2")?;
    let bit = |n: &str| Alphabet::indexed(n, 2);
    let (x1_kernel, x2_kernel) = match code {
        ChannelCode::Joint => (
            Kernel::deterministic(vec![w1], vec![bit("x1")?], |i| vec![i[0]])?,
            Kernel::deterministic(vec![w2], vec![bit("x2")?], |i| vec![1 - i[0]])?,
        ),
        ChannelCode::Independent => {
            let m1 = color_marginal(&c1, pair.marginalize(&["u1"])?.mass());
            let m2 = color_marginal(&c2, pair.marginalize(&["u2"])?.mass());
            (
                Kernel::constant(vec![w1], bit("x1")?, &m1)?,
                Kernel::constant(vec![w2], bit("x2")?, &m2)?,
            )
        }
    };
    let function = preset.function();
    let distortion = preset.distortion();
    let sources = SourceSpec {
        source_joint: source_joint.clone(),
        w1_kernel: w1_kernel.clone(),
        w2_kernel: w2_kernel.clone(),
    };
    let decoder = optimal_decoder(&sources, &function, &distortion)?;
    Ok(SystemSpec {
        source_joint,
        w1_kernel,
        w2_kernel,
        x1_kernel,
        x2_kernel,
        channel: adder_mac(),
        function,
        decoder,
        distortion,
        target_d: preset.target_d(),
    })
}

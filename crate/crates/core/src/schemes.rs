//! Continuous-source pipelines: Gaussian closed forms, amplify-and-forward
//! simulation, sign quantization, grid quantization, and the three
//! quantize-then-code schemes.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{adder_mac, gmac_sum_rate, mac_sum_capacity_independent, GaussianMac};
use crate::error::{invalid_param, Error, Result};
use crate::feasibility::{check_feasibility, FeasibilityReport, Verdict};
use crate::func::FunctionTable;
use crate::graph::{characteristic_graph, min_entropy_coloring, peer_characteristic_graph, Coloring, ColoringMode, Fidelity};
use crate::info::entropy;
use crate::prob::{Alphabet, JointPmf, PROB_TOL};
use crate::presets::{self, ChannelCode, Preset};

/// Fewest samples accepted by the Monte Carlo estimators.
pub const MIN_MC_SAMPLES: usize = 10_000;

/// Samples per independent RNG stream.
pub const MC_CHUNK: usize = 65_536;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

fn check_gauss(power: f64, rho: f64, sigma2: f64) -> Result<()> {
    if !(power >= 0.0) || !power.is_finite() {
        return Err(invalid_param("power", format!("{power} must be finite and >= 0")));
    }
    if !(rho.abs() <= 1.0) {
        return Err(invalid_param("rho", format!("{rho} outside [-1, 1]")));
    }
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(invalid_param("sigma2", format!("{sigma2} must be finite and > 0")));
    }
    Ok(())
}

/// Zero-mean Gaussian pair with common variance and correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPairSource {
    sigma2: f64,
    rho: f64,
}

impl GaussianPairSource {
    pub fn new(sigma2: f64, rho: f64) -> Result<Self> {
        check_gauss(0.0, rho, sigma2)?;
        Ok(GaussianPairSource { sigma2, rho })
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// One draw `(U1, U2)`.
    pub fn sample(&self, rng: &mut impl Rng) -> (f64, f64) {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let s = self.sigma2.sqrt();
        (s * z1, s * (self.rho * z1 + (1.0 - self.rho * self.rho).sqrt() * z2))
    }
}

/// Distortion floor for estimating `U1 - U2` when one encoder sees both
/// sources: `2σ²(1-ρ) / (1 + 2P)`.
pub fn centralized_bound(power: f64, rho: f64, sigma2: f64) -> Result<f64> {
    check_gauss(power, rho, sigma2)?;
    Ok(2.0 * sigma2 * (1.0 - rho) / (1.0 + 2.0 * power))
}

/// Mean squared error of amplify-and-forward for `U1 - U2`:
/// `2σ²(1-ρ) / (1 + 2P(1-ρ))`.
pub fn af_distortion(power: f64, rho: f64, sigma2: f64) -> Result<f64> {
    check_gauss(power, rho, sigma2)?;
    Ok(2.0 * sigma2 * (1.0 - rho) / (1.0 + 2.0 * power * (1.0 - rho)))
}

/// Sample mean with a 95% normal half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub half_width: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Averages `draw` over `samples` draws. Chunk `c` uses stream `c` of a
/// ChaCha8 generator keyed by `seed`, and chunk sums are reduced in chunk
/// order, so the result does not depend on the thread count.
fn monte_carlo<F>(samples: usize, seed: u64, draw: F) -> Result<McEstimate>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    if samples < MIN_MC_SAMPLES {
        return Err(invalid_param("samples", format!("{samples} < {MIN_MC_SAMPLES}")));
    }
    let chunks = samples.div_ceil(MC_CHUNK);
    let sums: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let n = MC_CHUNK.min(samples - c * MC_CHUNK);
            let (mut s, mut ss) = (0.0, 0.0);
            for _ in 0..n {
                let x = draw(&mut rng);
                s += x;
                ss += x * x;
            }
            (s, ss)
        })
        .collect();
    let (s, ss) = sums.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = samples as f64;
    let mean = s / n;
    let var = ((ss - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(McEstimate {
        mean,
        half_width: Z95 * (var / n).sqrt(),
        samples,
        seed,
    })
}

/// Simulates `Y = a U1 - a U2 + V` with `a = √(P/σ²)` and unit noise, and
/// scores the linear conditional-mean estimate of `U1 - U2` from `Y`.
pub fn monte_carlo_af(power: f64, rho: f64, sigma2: f64, samples: usize, seed: u64) -> Result<McEstimate> {
    check_gauss(power, rho, sigma2)?;
    let source = GaussianPairSource::new(sigma2, rho)?;
    let a = (power / sigma2).sqrt();
    let s = 2.0 * sigma2 * (1.0 - rho);
    let coef = a * s / (a * a * s + 1.0);
    monte_carlo(samples, seed, |rng| {
        let (u1, u2) = source.sample(rng);
        let v: f64 = rng.sample(StandardNormal);
        let y = a * u1 - a * u2 + v;
        let e = (u1 - u2) - coef * y;
        e * e
    })
}

/// Joint pmf of the signs `W_i = 1{U_i > 0}` of a unit Gaussian pair with
/// correlation `rho`, over axes `w1`, `w2`.
pub fn binary_quadrant_pmf(rho: f64) -> Result<JointPmf> {
    if !(rho.abs() <= 1.0) {
        return Err(invalid_param("rho", format!("{rho} outside [-1, 1]")));
    }
    let same = 0.25 + rho.asin() / (2.0 * PI);
    let diff = (0.25 - rho.asin() / (2.0 * PI)).max(0.0);
    let bit = |n: &str| Alphabet::indexed(n, 2);
    JointPmf::new(vec![bit("w1")?, bit("w2")?], vec![same, diff, diff, same])
}

/// Pearson correlation of a pmf over two binary axes, treating symbol
/// indices as the values 0 and 1.
pub fn binary_correlation(pmf: &JointPmf) -> Result<f64> {
    if pmf.shape() != [2, 2] {
        return Err(invalid_param("pmf", "expected a 2x2 joint"));
    }
    let p1 = pmf.get(&[1, 0]) + pmf.get(&[1, 1]);
    let p2 = pmf.get(&[0, 1]) + pmf.get(&[1, 1]);
    let denom = (p1 * (1.0 - p1) * p2 * (1.0 - p2)).sqrt();
    if denom == 0.0 {
        return Err(invalid_param("pmf", "a marginal is degenerate"));
    }
    Ok((pmf.get(&[1, 1]) - p1 * p2) / denom)
}

/// Uniform scalar quantizer on `[lo, hi]`, applied to both coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridQuantizer {
    lo: f64,
    hi: f64,
    cells: usize,
}

impl GridQuantizer {
    pub fn new(lo: f64, hi: f64, cells: usize) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(invalid_param("lo/hi", format!("need finite lo < hi, got [{lo}, {hi}]")));
        }
        if cells == 0 {
            return Err(invalid_param("cells", "must be at least 1"));
        }
        Ok(GridQuantizer { lo, hi, cells })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.cells as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.width()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.cells).map(|i| self.center(i)).collect()
    }

    /// Cell of `x`; `hi` belongs to the last cell.
    pub fn index(&self, x: f64) -> Result<usize> {
        if !(self.lo..=self.hi).contains(&x) {
            return Err(invalid_param("sample", format!("{x} outside [{}, {}]", self.lo, self.hi)));
        }
        let i = (self.cells as f64 * (x - self.lo) / (self.hi - self.lo)).floor() as usize;
        Ok(i.min(self.cells - 1))
    }

    /// Cell labels `1..=cells` on an axis called `name`.
    pub fn alphabet(&self, name: &str) -> Result<Alphabet> {
        Alphabet::new(name, (1..=self.cells).map(|i| i.to_string()))
    }
}

/// Cell pairs of a sample and their empirical pmf over `(w1, w2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedPairs {
    pub indices: Vec<(usize, usize)>,
    pub pmf: JointPmf,
}

pub fn quantize_grid(q: &GridQuantizer, samples: &[(f64, f64)]) -> Result<QuantizedPairs> {
    if samples.is_empty() {
        return Err(invalid_param("samples", "no samples"));
    }
    let k = q.cells();
    let mut counts = vec![0.0; k * k];
    let mut indices = Vec::with_capacity(samples.len());
    for &(a, b) in samples {
        let (i, j) = (q.index(a)?, q.index(b)?);
        counts[i * k + j] += 1.0;
        indices.push((i, j));
    }
    let n = samples.len() as f64;
    let pmf = JointPmf::new(
        vec![q.alphabet("w1")?, q.alphabet("w2")?],
        counts.iter().map(|c| c / n).collect(),
    )?;
    Ok(QuantizedPairs { indices, pmf })
}

/// Density on `[lo, hi]²` that is constant on each block of a `k × k`
/// partition. `weights[i][j]` is the density value on block `(i, j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockDensity {
    lo: f64,
    hi: f64,
    weights: Vec<Vec<f64>>,
}

/// A rectangle carrying uniform mass inside one quantizer cell.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Piece {
    cell: (usize, usize),
    mass: f64,
    x: (f64, f64),
    y: (f64, f64),
}

impl BlockDensity {
    pub fn new(lo: f64, hi: f64, weights: Vec<Vec<f64>>) -> Result<Self> {
        let k = weights.len();
        if k == 0 || weights.iter().any(|r| r.len() != k) {
            return Err(invalid_param("weights", "must be a non-empty square table"));
        }
        if weights.iter().flatten().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(invalid_param("weights", "entries must be finite and >= 0"));
        }
        let d = BlockDensity { lo, hi, weights };
        GridQuantizer::new(lo, hi, k)?;
        let total: f64 = d.weights.iter().flatten().sum::<f64>() * d.block_width().powi(2);
        if (total - 1.0).abs() > PROB_TOL {
            return Err(invalid_param("weights", format!("density integrates to {total}")));
        }
        Ok(d)
    }

    /// Uniform on the unit square minus the three diagonal blocks of a
    /// 3 × 3 partition.
    pub fn off_diagonal_unit() -> Self {
        let w = (0..3)
            .map(|i| (0..3).map(|j| if i == j { 0.0 } else { 1.5 }).collect())
            .collect();
        BlockDensity::new(0.0, 1.0, w).expect("static density")
    }

    fn blocks(&self) -> usize {
        self.weights.len()
    }

    fn block_width(&self) -> f64 {
        (self.hi - self.lo) / self.blocks() as f64
    }

    fn pieces(&self, q: &GridQuantizer) -> Result<Vec<Piece>> {
        if q.lo() != self.lo || q.hi() != self.hi {
            return Err(invalid_param("quantizer", "range differs from the density's support"));
        }
        let (bw, cw, k) = (self.block_width(), q.width(), self.blocks());
        let span = |i: usize, w: f64| (self.lo + i as f64 * w, self.lo + (i + 1) as f64 * w);
        let overlap = |a: (f64, f64), b: (f64, f64)| {
            let o = (a.0.max(b.0), a.1.min(b.1));
            (o.1 > o.0).then_some(o)
        };
        let mut out = Vec::new();
        for ci in 0..q.cells() {
            for cj in 0..q.cells() {
                for bi in 0..k {
                    for bj in 0..k {
                        let w = self.weights[bi][bj];
                        if w == 0.0 {
                            continue;
                        }
                        if let (Some(x), Some(y)) =
                            (overlap(span(ci, cw), span(bi, bw)), overlap(span(cj, cw), span(bj, bw)))
                        {
                            out.push(Piece {
                                cell: (ci, cj),
                                mass: w * (x.1 - x.0) * (y.1 - y.0),
                                x,
                                y,
                            });
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Exact cell probabilities under `q`, over axes `w1`, `w2`.
    pub fn cell_pmf(&self, q: &GridQuantizer) -> Result<JointPmf> {
        let k = q.cells();
        let mut mass = vec![0.0; k * k];
        for p in self.pieces(q)? {
            mass[p.cell.0 * k + p.cell.1] += p.mass;
        }
        JointPmf::new(vec![q.alphabet("w1")?, q.alphabet("w2")?], mass)
    }

    pub fn sample(&self, rng: &mut impl Rng) -> (f64, f64) {
        let bw = self.block_width();
        let area = bw * bw;
        let mut t: f64 = rng.random();
        let k = self.blocks();
        let mut pick = (0, 0);
        'outer: for i in 0..k {
            for j in 0..k {
                let m = self.weights[i][j] * area;
                if m > 0.0 {
                    pick = (i, j);
                    if t < m {
                        break 'outer;
                    }
                    t -= m;
                }
            }
        }
        let x = self.lo + (pick.0 as f64 + rng.random::<f64>()) * bw;
        let y = self.lo + (pick.1 as f64 + rng.random::<f64>()) * bw;
        (x.min(self.hi), y.min(self.hi))
    }
}

/// `E| |U1 - U2| - g |` for independent `U1 ~ U[x]`, `U2 ~ U[y]`.
///
/// The difference has a piecewise-linear density and the error is
/// piecewise linear in the difference, so Simpson's rule on each piece
/// between breakpoints is exact.
fn abs_distance_error(x: (f64, f64), y: (f64, f64), g: f64) -> f64 {
    let (l1, l2) = (x.1 - x.0, y.1 - y.0);
    let density = |t: f64| ((x.1.min(t + y.1) - x.0.max(t + y.0)).max(0.0)) / (l1 * l2);
    let integrand = |t: f64| density(t) * (t.abs() - g).abs();
    let (lo, hi) = (x.0 - y.1, x.1 - y.0);
    let mut cuts: Vec<f64> = [lo, x.0 - y.0, x.1 - y.1, hi, -g, 0.0, g]
        .into_iter()
        .filter(|t| (lo..=hi).contains(t))
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    cuts.windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            (b - a) / 6.0 * (integrand(a) + 4.0 * integrand(0.5 * (a + b)) + integrand(b))
        })
        .sum()
}

/// Exact `E| |U1 - U2| - estimate(cell) |` under `density` quantized by `q`.
pub fn grid_distance_distortion_exact(
    density: &BlockDensity,
    q: &GridQuantizer,
    estimate: impl Fn(usize, usize) -> f64,
) -> Result<f64> {
    Ok(density
        .pieces(q)?
        .iter()
        .map(|p| p.mass * abs_distance_error(p.x, p.y, estimate(p.cell.0, p.cell.1)))
        .sum())
}

/// Monte Carlo counterpart of [`grid_distance_distortion_exact`].
pub fn grid_distance_distortion_mc(
    density: &BlockDensity,
    q: &GridQuantizer,
    estimate: impl Fn(usize, usize) -> f64 + Sync,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    density.pieces(q)?;
    monte_carlo(samples, seed, |rng| {
        let (a, b) = density.sample(rng);
        let (i, j) = (
            q.index(a).expect("density support lies in the quantizer range"),
            q.index(b).expect("density support lies in the quantizer range"),
        );
        ((a - b).abs() - estimate(i, j)).abs()
    })
}

/// Quantization budget `δ = D / α` for a function that is `α`-Lipschitz.
pub fn lipschitz_budget(alpha: f64, target_d: f64) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(invalid_param("alpha", format!("{alpha} must be finite and > 0")));
    }
    if !(target_d >= 0.0) || !target_d.is_finite() {
        return Err(invalid_param("target_d", format!("{target_d} must be finite and >= 0")));
    }
    Ok(target_d / alpha)
}

/// Entropy of the color pair `(c1(w1), c2(w2))` under a two-axis joint.
pub fn color_pair_entropy(joint: &JointPmf, c1: &Coloring, c2: &Coloring) -> Result<f64> {
    if joint.axes().len() != 2 {
        return Err(Error::ShapeMismatch {
            expected: 2,
            found: joint.axes().len(),
        });
    }
    let (n1, n2) = (joint.axes()[0].len(), joint.axes()[1].len());
    if c1.colors().len() != n1 || c2.colors().len() != n2 {
        return Err(invalid_param("coloring", "vertex count differs from the joint's axes"));
    }
    let (k1, k2) = (c1.num_colors(), c2.num_colors());
    let mut mass = vec![0.0; k1 * k2];
    for a in 0..n1 {
        for b in 0..n2 {
            mass[c1.color_of(a) * k2 + c2.color_of(b)] += joint.get(&[a, b]);
        }
    }
    let colors = JointPmf::new(
        vec![c1.alphabet("c1")?, c2.alphabet("c2")?],
        mass,
    )?;
    entropy(&colors, &["c1", "c2"])
}

/// Scheme labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchemeId {
    /// Quantize, then joint source-channel code the quantized pair.
    #[serde(rename = "1")]
    One,
    /// Quantize, color, Slepian-Wolf code the colors, independent channel
    /// codewords.
    #[serde(rename = "2")]
    Two,
    /// Quantize, color, joint source-channel code the colors.
    #[serde(rename = "3")]
    Three,
    /// Amplify and forward.
    #[serde(rename = "AF")]
    Af,
    /// Both sources at one encoder.
    #[serde(rename = "centralized")]
    Centralized,
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeId::One => "1",
            SchemeId::Two => "2",
            SchemeId::Three => "3",
            SchemeId::Af => "AF",
            SchemeId::Centralized => "centralized",
        })
    }
}

/// Outcome of one scheme at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeReport {
    pub scheme: SchemeId,
    /// Swept parameter (channel power), when the experiment is a sweep.
    pub param: Option<f64>,
    pub source_entropy_bits: Option<f64>,
    pub color_entropy_bits: Option<f64>,
    /// Rate the channel has to carry.
    pub rate_bits: Option<f64>,
    pub channel_sum_rate_bits: Option<f64>,
    pub verdict: Option<Verdict>,
    pub margin_bits: Option<f64>,
    /// Analytic or exact distortion.
    pub distortion: Option<f64>,
    pub monte_carlo: Option<McEstimate>,
    pub lipschitz_alpha: Option<f64>,
    pub delta_budget: Option<f64>,
}

impl SchemeReport {
    fn new(scheme: SchemeId) -> Self {
        SchemeReport {
            scheme,
            param: None,
            source_entropy_bits: None,
            color_entropy_bits: None,
            rate_bits: None,
            channel_sum_rate_bits: None,
            verdict: None,
            margin_bits: None,
            distortion: None,
            monte_carlo: None,
            lipschitz_alpha: None,
            delta_budget: None,
        }
    }

    fn rate_against(mut self, rate: f64, capacity: f64) -> Self {
        let margin = capacity - rate;
        self.rate_bits = Some(rate);
        self.channel_sum_rate_bits = Some(capacity);
        self.margin_bits = Some(margin);
        self.verdict = Some(Verdict::from_margin(margin));
        self
    }

    fn checked(mut self, report: &FeasibilityReport) -> Self {
        let tightest = report
            .inequalities
            .iter()
            .min_by(|a, b| a.margin.total_cmp(&b.margin))
            .expect("three inequalities");
        self.rate_bits = Some(report.sum().lhs);
        self.channel_sum_rate_bits = Some(report.sum().rhs);
        self.margin_bits = Some(tightest.margin);
        self.verdict = Some(report.worst_verdict());
        self
    }
}

/// Header of [`reports_to_csv`].
pub const CSV_HEADER: &str = "param,scheme,rate_bits,capacity_bits,margin_bits,distortion,ci_halfwidth";

/// One CSV row per report; absent values are empty fields.
pub fn reports_to_csv(reports: &[SchemeReport]) -> String {
    let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        let distortion = r.distortion.or(r.monte_carlo.map(|m| m.mean));
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            cell(r.param),
            r.scheme,
            cell(r.rate_bits),
            cell(r.channel_sum_rate_bits),
            cell(r.margin_bits),
            cell(distortion),
            cell(r.monte_carlo.map(|m| m.half_width)),
        ));
    }
    out
}

fn default_seed() -> u64 {
    0x5eed
}

/// Gaussian difference sweep over channel power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaussDiffConfig {
    pub rho: f64,
    pub sigma2: f64,
    pub power_min: f64,
    pub power_max: f64,
    pub steps: usize,
    /// Monte Carlo samples per power point; 0 skips simulation.
    pub samples: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl Default for GaussDiffConfig {
    fn default() -> Self {
        GaussDiffConfig {
            rho: 0.5,
            sigma2: 1.0,
            power_min: 0.5,
            power_max: 20.0,
            steps: 40,
            samples: 0,
            seed: default_seed(),
        }
    }
}

/// Sign-quantized Gaussian pair over a Gaussian MAC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaussBinaryConfig {
    pub rho: f64,
    pub power: f64,
    /// Correlation of the channel inputs under the joint code.
    pub input_rho: f64,
}

impl Default for GaussBinaryConfig {
    fn default() -> Self {
        GaussBinaryConfig {
            rho: 0.75,
            power: 5.0,
            input_rho: 0.3,
        }
    }
}

/// Off-diagonal uniform density on the unit square, three cells per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UniformGridConfig {
    pub target_d: f64,
    pub samples: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub alpha: Option<f64>,
}

impl Default for UniformGridConfig {
    fn default() -> Self {
        UniformGridConfig {
            target_d: presets::GRID_TARGET_D,
            samples: 1_000_000,
            seed: default_seed(),
            alpha: None,
        }
    }
}

/// A named experiment with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    Section5,
    GaussDiff(GaussDiffConfig),
    GaussBinary(GaussBinaryConfig),
    UniformGrid(UniformGridConfig),
}

impl ExperimentConfig {
    /// Defaults for a registered id.
    pub fn named(id: &str) -> Result<Self> {
        Ok(match id {
            "section5" => ExperimentConfig::Section5,
            "gauss-diff" => ExperimentConfig::GaussDiff(GaussDiffConfig::default()),
            "gauss-binary" => ExperimentConfig::GaussBinary(GaussBinaryConfig::default()),
            "uniform-grid" => ExperimentConfig::UniformGrid(UniformGridConfig::default()),
            other => return Err(Error::UnknownExperiment(other.to_string())),
        })
    }

    pub fn id(&self) -> &'static str {
        match self {
            ExperimentConfig::Section5 => "section5",
            ExperimentConfig::GaussDiff(_) => "gauss-diff",
            ExperimentConfig::GaussBinary(_) => "gauss-binary",
            ExperimentConfig::UniformGrid(_) => "uniform-grid",
        }
    }
}

/// Runs every scheme the experiment defines.
pub fn run_scheme(config: &ExperimentConfig) -> Result<Vec<SchemeReport>> {
    match config {
        ExperimentConfig::Section5 => run_section5(),
        ExperimentConfig::GaussDiff(c) => run_gauss_diff(c),
        ExperimentConfig::GaussBinary(c) => run_gauss_binary(c),
        ExperimentConfig::UniformGrid(c) => run_uniform_grid(c),
    }
}

/// Schemes 1-3 for a ternary pair over the adder MAC.
fn discrete_ladder(pair: &JointPmf, preset: Preset) -> Result<(Vec<SchemeReport>, FeasibilityReport)> {
    let capacity = mac_sum_capacity_independent(&adder_mac())?.bits;
    let h_pair = entropy(pair, &["u1", "u2"])?;
    let [(c1, _), (c2, _)] = preset.colorings(pair)?;
    let h_colors = color_pair_entropy(pair, &c1, &c2)?;

    let mut one = SchemeReport::new(SchemeId::One).rate_against(h_pair, capacity);
    one.source_entropy_bits = Some(h_pair);

    let mut two = SchemeReport::new(SchemeId::Two).rate_against(h_colors, capacity);
    two.source_entropy_bits = Some(h_pair);
    two.color_entropy_bits = Some(h_colors);

    let report = check_feasibility(&presets::system_on(pair, preset, ChannelCode::Joint)?)?;
    let mut three = SchemeReport::new(SchemeId::Three).checked(&report);
    three.source_entropy_bits = Some(h_pair);
    three.color_entropy_bits = Some(h_colors);
    three.distortion = Some(report.achieved_distortion);
    Ok((vec![one, two, three], report))
}

fn run_section5() -> Result<Vec<SchemeReport>> {
    Ok(discrete_ladder(&presets::off_diagonal_pair(), Preset::Ternary)?.0)
}

fn run_gauss_diff(c: &GaussDiffConfig) -> Result<Vec<SchemeReport>> {
    check_gauss(c.power_min, c.rho, c.sigma2)?;
    check_gauss(c.power_max, c.rho, c.sigma2)?;
    if c.steps == 0 || c.power_max < c.power_min {
        return Err(invalid_param("steps", "need steps >= 1 and power_min <= power_max"));
    }
    let mut out = Vec::with_capacity(2 * c.steps);
    for k in 0..c.steps {
        let p = if c.steps == 1 {
            c.power_min
        } else {
            c.power_min + (c.power_max - c.power_min) * k as f64 / (c.steps - 1) as f64
        };
        let mut cen = SchemeReport::new(SchemeId::Centralized);
        cen.param = Some(p);
        cen.distortion = Some(centralized_bound(p, c.rho, c.sigma2)?);
        let mut af = SchemeReport::new(SchemeId::Af);
        af.param = Some(p);
        af.distortion = Some(af_distortion(p, c.rho, c.sigma2)?);
        if c.samples > 0 {
            af.monte_carlo = Some(monte_carlo_af(p, c.rho, c.sigma2, c.samples, c.seed)?);
        }
        out.push(cen);
        out.push(af);
    }
    Ok(out)
}

/// `f = 1{min(u1, u2) > 0}` on the sign bits.
fn both_positive() -> Result<FunctionTable> {
    let bit = |n: &str| Alphabet::indexed(n, 2);
    FunctionTable::from_fn(vec![bit("w1")?, bit("w2")?], |i| (i[0] & i[1]).to_string())
}

fn run_gauss_binary(c: &GaussBinaryConfig) -> Result<Vec<SchemeReport>> {
    let pmf = binary_quadrant_pmf(c.rho)?;
    let f = both_positive()?;
    let g1 = characteristic_graph(&pmf, &f, &Fidelity::Exact)?;
    let g2 = peer_characteristic_graph(&pmf, &f, &Fidelity::Exact)?;
    let (c1, _) = min_entropy_coloring(&g1, &pmf.marginalize(&["w1"])?, ColoringMode::Exact)?;
    let (c2, _) = min_entropy_coloring(&g2, &pmf.marginalize(&["w2"])?, ColoringMode::Exact)?;
    let h_w = entropy(&pmf, &["w1", "w2"])?;
    let h_c = color_pair_entropy(&pmf, &c1, &c2)?;
    let mac = GaussianMac::with_power(c.power)?;

    let mut two = SchemeReport::new(SchemeId::Two).rate_against(h_c, gmac_sum_rate(&mac, 0.0)?);
    two.source_entropy_bits = Some(h_w);
    two.color_entropy_bits = Some(h_c);
    two.param = Some(c.power);
    let mut three = SchemeReport::new(SchemeId::Three).rate_against(h_c, gmac_sum_rate(&mac, c.input_rho)?);
    three.source_entropy_bits = Some(h_w);
    three.color_entropy_bits = Some(h_c);
    three.param = Some(c.power);
    Ok(vec![two, three])
}

/// The quantized off-diagonal grid as a `(u1, u2)` pair on `{1, 2, 3}`.
pub fn grid_pair(q: &GridQuantizer, density: &BlockDensity) -> Result<JointPmf> {
    density.cell_pmf(q)?.rename_axis("w1", "u1")?.rename_axis("w2", "u2")
}

fn run_uniform_grid(c: &UniformGridConfig) -> Result<Vec<SchemeReport>> {
    let q = GridQuantizer::new(0.0, 1.0, 3)?;
    let density = BlockDensity::off_diagonal_unit();
    let pair = grid_pair(&q, &density)?;
    let (mut reports, _) = discrete_ladder(&pair, Preset::Grid)?;

    let spec = presets::system_on(&pair, Preset::Grid, ChannelCode::Joint)?;
    let w1 = spec.w1_kernel.clone();
    let w2 = spec.w2_kernel.clone();
    let color = |k: &crate::prob::Kernel, i: usize| {
        k.row(&[i, 0]).iter().position(|&p| p == 1.0).expect("deterministic color map")
    };
    let table: Vec<Vec<f64>> = (0..3)
        .map(|i| {
            (0..3)
                .map(|j| {
                    let label = spec.decoder.value(&[color(&w1, i), color(&w2, j), 0]);
                    label.parse::<f64>().expect("numeric decoder labels") * q.width()
                })
                .collect()
        })
        .collect();
    let estimate = |i: usize, j: usize| table[i][j];
    let exact = grid_distance_distortion_exact(&density, &q, estimate)?;
    let mc = if c.samples > 0 {
        Some(grid_distance_distortion_mc(&density, &q, estimate, c.samples, c.seed)?)
    } else {
        None
    };
    let delta = c.alpha.map(|a| lipschitz_budget(a, c.target_d)).transpose()?;
    for r in &mut reports {
        r.lipschitz_alpha = c.alpha;
        r.delta_budget = delta;
    }
    let three = reports.iter_mut().find(|r| r.scheme == SchemeId::Three).expect("scheme 3");
    three.distortion = Some(exact);
    three.monte_carlo = mc;
    Ok(reports)
}

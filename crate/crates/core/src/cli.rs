//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when a registered expectation fails or a
//! checked system is infeasible, 2 on usage, parse or input errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::channels::{adder_mac, gmac_sum_rate, mac_sum_capacity_independent, product_input_rates, DiscreteMac, GaussianMac};
use crate::error::{Error, Result};
use crate::feasibility::{check_feasibility, FeasibilityReport, SystemSpec, Verdict};
use crate::func::{DistortionTable, FunctionTable};
use crate::graph::{
    characteristic_graph, conditional_chromatic_entropy, conditional_graph_entropy, min_entropy_coloring,
    peer_characteristic_graph, zigzag_check, CharGraph, ColoringMode, Fidelity,
};
use crate::info::{conditional_entropy, entropy};
use crate::presets::{self, ChannelCode, Preset};
use crate::prob::{JointPmf, Kernel};
use crate::schemes::{
    binary_correlation, binary_quadrant_pmf, color_pair_entropy, grid_pair, reports_to_csv, run_scheme,
    BlockDensity, ExperimentConfig, GridQuantizer, SchemeId, SchemeReport,
};

/// Exit status for a passing run.
pub const EXIT_OK: i32 = 0;
/// Exit status for failed expectations or infeasible systems.
pub const EXIT_FAIL: i32 = 1;
/// Exit status for usage and input errors.
pub const EXIT_USAGE: i32 = 2;

/// Printed values are quoted to a few significant digits.
const PRINTED_TOL: f64 = 5e-3;
/// Tolerance against exactly recomputed values.
const EXACT_TOL: f64 = 5e-4;

#[derive(Debug, Parser)]
#[command(name = "fcmac", version, about = "Distributed function computation over multiple access channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a registered experiment and check its expectations.
    Experiment(ExperimentArgs),
    /// Check a system specification.
    Check {
        #[command(subcommand)]
        what: CheckCommand,
    },
    /// Characteristic graph tools.
    Graph {
        #[command(subcommand)]
        what: GraphCommand,
    },
    /// Channel tools.
    Channel {
        #[command(subcommand)]
        what: ChannelCommand,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// section5, gauss-diff, gauss-binary or uniform-grid.
    id: Option<String>,
    /// JSON experiment config; its "experiment" field selects the pipeline.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write data here instead of stdout; the expectation table then goes
    /// to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Monte Carlo seed.
    #[arg(long, env = "FCMAC_SEED")]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    sigma2: Option<f64>,
    #[arg(long)]
    power: Option<f64>,
    #[arg(long)]
    power_min: Option<f64>,
    #[arg(long)]
    power_max: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    input_rho: Option<f64>,
    #[arg(long)]
    target_d: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum CheckCommand {
    /// Evaluate the rate inequalities and distortion of a system spec.
    Theorem1 {
        #[arg(long)]
        spec: PathBuf,
        /// Accept inequalities that hold with equality.
        #[arg(long)]
        allow_boundary: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

#[derive(Debug, Subcommand)]
enum GraphCommand {
    /// Characteristic graph of the first axis of a two-axis joint.
    Build {
        #[arg(long)]
        joint: PathBuf,
        #[arg(long)]
        function: PathBuf,
        /// Distortion table; with --delta, only larger differences force edges.
        #[arg(long, requires = "delta")]
        distortion: Option<PathBuf>,
        #[arg(long, requires = "distortion")]
        delta: Option<f64>,
        /// Build the graph of the second axis instead.
        #[arg(long)]
        peer: bool,
    },
    /// Minimum-entropy coloring under the first-axis marginal of a joint.
    Color {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        joint: PathBuf,
        #[arg(long)]
        greedy: bool,
    },
    /// Conditional chromatic entropy at block length n, conditional graph
    /// entropy, and the zigzag check.
    Entropy {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        joint: PathBuf,
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
}

#[derive(Debug, Subcommand)]
enum ChannelCommand {
    /// Sum capacity over independent inputs.
    Capacity {
        /// Channel law as kernel JSON; the binary adder MAC when omitted.
        #[arg(long, conflicts_with = "adder")]
        mac: Option<PathBuf>,
        /// Use the binary adder MAC.
        #[arg(long)]
        adder: bool,
    },
    /// Gaussian MAC sum rate at a given input correlation.
    Gmac {
        #[arg(long)]
        power: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        rho: f64,
        #[arg(long, default_value_t = 1.0)]
        noise_var: f64,
    },
}

/// A registered expected value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Expected {
    pub value: f64,
    pub tolerance: f64,
}

/// A value as printed in the reference write-up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Printed {
    pub value: f64,
    pub tolerance: f64,
    /// False marks a discrepancy with the computed value.
    pub agrees: bool,
}

/// One row of an experiment table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantity {
    pub label: String,
    pub value: f64,
    pub units: &'static str,
    pub note: String,
    pub expected: Option<Expected>,
    pub printed: Option<Printed>,
    pub pass: Option<bool>,
}

impl Quantity {
    fn new(label: &str, value: f64, units: &'static str, note: &str) -> Self {
        Quantity {
            label: label.to_string(),
            value,
            units,
            note: note.to_string(),
            expected: None,
            printed: None,
            pass: None,
        }
    }

    fn expect(mut self, value: f64, tolerance: f64) -> Self {
        self.expected = Some(Expected { value, tolerance });
        self.pass = Some((self.value - value).abs() <= tolerance);
        self
    }

    fn printed(mut self, value: f64) -> Self {
        self.printed = Some(Printed {
            value,
            tolerance: PRINTED_TOL,
            agrees: (self.value - value).abs() <= PRINTED_TOL,
        });
        self
    }

    fn flag(label: &str, holds: bool, note: &str) -> Self {
        Quantity::new(label, if holds { 1.0 } else { 0.0 }, "bool", note)
    }
}

/// Everything an experiment run produces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub experiment: String,
    pub seed: Option<u64>,
    pub quantities: Vec<Quantity>,
    pub reports: Vec<SchemeReport>,
}

impl ExperimentResult {
    /// True when every registered expectation holds.
    pub fn passed(&self) -> bool {
        self.quantities.iter().all(|q| q.pass != Some(false))
    }

    /// Labels of quantities whose printed value disagrees with the
    /// computation.
    pub fn discrepancies(&self) -> Vec<&str> {
        self.quantities
            .iter()
            .filter(|q| q.printed.is_some_and(|p| !p.agrees))
            .map(|q| q.label.as_str())
            .collect()
    }

    pub fn quantity(&self, label: &str) -> Option<&Quantity> {
        self.quantities.iter().find(|q| q.label == label)
    }

    /// Fixed-width text table.
    pub fn table(&self) -> String {
        let mut out = format!("experiment {}\n", self.experiment);
        for q in &self.quantities {
            let expected = q
                .expected
                .map(|e| format!("{:.6} ± {:.0e}", e.value, e.tolerance))
                .unwrap_or_default();
            let mark = match q.pass {
                Some(true) => "pass",
                Some(false) => "FAIL",
                None => "",
            };
            let printed = q
                .printed
                .map(|p| {
                    if p.agrees {
                        format!("printed {}", p.value)
                    } else {
                        format!("printed {} DISCREPANCY", p.value)
                    }
                })
                .unwrap_or_default();
            out.push_str(&format!(
                "{:<44} {:>12.6} {:<5} {:<22} {:<4} {}\n",
                q.label, q.value, q.units, expected, mark, printed
            ));
        }
        out
    }
}

fn entropy_bits(masses: &[f64]) -> f64 {
    masses.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
}

fn verdict_is(r: &SchemeReport, v: Verdict) -> bool {
    r.verdict == Some(v)
}

fn scheme(reports: &[SchemeReport], id: SchemeId) -> &SchemeReport {
    reports.iter().find(|r| r.scheme == id).expect("scheme present")
}

fn section5_quantities(reports: &[SchemeReport]) -> Result<Vec<Quantity>> {
    let pair = presets::off_diagonal_pair();
    let (g1, g2) = Preset::Ternary.graphs(&pair)?;
    let [(c1, h1), (c2, h2)] = Preset::Ternary.colorings(&pair)?;
    let log3 = 3f64.log2();
    let h_third = entropy_bits(&[1.0 / 3.0, 2.0 / 3.0]);
    let mut q = Vec::new();

    q.push(
        Quantity::new("uncoded sum rate H(U1)+H(U2)", entropy(&pair, &["u1"])? + entropy(&pair, &["u2"])?, "bits", "")
            .expect(2.0 * log3, EXACT_TOL)
            .printed(3.16),
    );
    q.push(
        Quantity::new("H(U1,U2)", entropy(&pair, &["u1", "u2"])?, "bits", "Slepian-Wolf on the sources")
            .expect(6f64.log2(), EXACT_TOL)
            .printed(2.58),
    );
    let single_edge = g1.edge_labels() == [("1".to_string(), "3".to_string())] && g1 == g2.clone_renamed("u1");
    q.push(Quantity::flag("graphs are the single edge {1,3}", single_edge, "both encoders").expect(1.0, 0.0));
    q.push(Quantity::new("H(C1)", h1, "bits", "exact minimum-entropy coloring").expect(h_third, 1e-6).printed(0.918));
    q.push(
        Quantity::new("H(C1)+H(C2)", h1 + h2, "bits", "colors without Slepian-Wolf")
            .expect(2.0 * h_third, EXACT_TOL)
            .printed(1.8366),
    );
    q.push(
        Quantity::new("H(C1,C2)", color_pair_entropy(&pair, &c1, &c2)?, "bits", "Slepian-Wolf on the colors")
            .expect(log3, EXACT_TOL)
            .printed(1.58),
    );
    let one = scheme(reports, SchemeId::One);
    let two = scheme(reports, SchemeId::Two);
    let three = scheme(reports, SchemeId::Three);
    q.push(
        Quantity::new("adder MAC sum capacity (independent inputs)", one.channel_sum_rate_bits.unwrap_or(f64::NAN), "bits", "")
            .expect(1.5, 1e-4)
            .printed(1.5),
    );
    q.push(
        Quantity::new("scheme 2 margin", two.margin_bits.unwrap_or(f64::NAN), "bits", "capacity minus H(C1,C2)")
            .expect(1.5 - log3, EXACT_TOL),
    );
    q.push(Quantity::flag("scheme 1 violated", verdict_is(one, Verdict::Violated), "").expect(1.0, 0.0));
    q.push(Quantity::flag("scheme 2 violated", verdict_is(two, Verdict::Violated), "").expect(1.0, 0.0));
    q.push(
        Quantity::new("joint code I(X1,X2;Y)", three.channel_sum_rate_bits.unwrap_or(f64::NAN), "bits", "X1=C1, X2=1-C2")
            .expect(log3, EXACT_TOL)
            .printed(1.58),
    );
    q.push(
        Quantity::new("joint code sum margin", three.channel_sum_rate_bits.unwrap_or(f64::NAN) - three.rate_bits.unwrap_or(f64::NAN), "bits", "boundary")
            .expect(0.0, 1e-9),
    );
    q.push(Quantity::flag("joint code verdict is boundary", verdict_is(three, Verdict::Boundary), "").expect(1.0, 0.0));
    q.push(
        Quantity::new(
            "joint code Bayes distortion",
            three.distortion.unwrap_or(f64::NAN),
            "hamming",
            "(1,2) and (2,1) share colors (0,0) but differ in f",
        )
        .expect(1.0 / 6.0, 1e-12)
        .printed(0.0),
    );

    let independent = check_feasibility(&presets::system(Preset::Ternary, ChannelCode::Independent)?)?;
    let y_indep = entropy_bits(&[4.0 / 9.0, 4.0 / 9.0, 1.0 / 9.0]);
    q.push(
        Quantity::new("independent inputs I(X1,X2;Y)", independent.sum().rhs, "bits", "inputs drawn from the color marginals")
            .expect(y_indep, 1e-9),
    );
    q.push(
        Quantity::flag("independent inputs sum violated", independent.sum().verdict == Verdict::Violated, "")
            .expect(1.0, 0.0),
    );

    let side = presets::off_diagonal_with_distance();
    let colored = side.compose(&[
        Kernel::deterministic(vec![side.axes()[0].clone()], vec![c1.alphabet("c1")?], |i| vec![c1.color_of(i[0])])?,
        Kernel::deterministic(vec![side.axes()[1].clone()], vec![c2.alphabet("c2")?], |i| vec![c2.color_of(i[0])])?,
    ])?;
    let h_side = conditional_entropy(&colored, &["c1", "c2"], &["z"])?;
    q.push(
        Quantity::new("H(C1,C2|Z), Z=|U1-U2|", h_side, "bits", "colors with decoder side information")
            .expect(4.0 / 3.0, 1e-9)
            .printed(1.32),
    );
    q.push(Quantity::flag("H(C1,C2|Z) below capacity", h_side < 1.5, "").expect(1.0, 0.0));

    let zig = zigzag_check(&pair)?;
    q.push(
        Quantity::flag("zigzag condition holds", zig.is_none(), "(1,2),(2,1) supported; (1,1),(2,2) not")
            .expect(0.0, 0.0)
            .printed(1.0),
    );
    let hg = conditional_graph_entropy(&g1, &pair)?;
    q.push(Quantity::new("H_G(U1|U2)", hg.bits, "bits", "conditional graph entropy"));
    Ok(q)
}

trait CloneRenamed {
    fn clone_renamed(&self, name: &str) -> CharGraph;
}

impl CloneRenamed for CharGraph {
    fn clone_renamed(&self, name: &str) -> CharGraph {
        CharGraph::new(self.vertices().renamed(name), self.edges()).expect("same edges on a renamed axis")
    }
}

fn gauss_binary_quantities(c: &crate::schemes::GaussBinaryConfig, reports: &[SchemeReport]) -> Result<Vec<Quantity>> {
    let at_reference = c.rho == 0.75 && c.power == 5.0;
    let quoted = |q: Quantity, v: f64, applies: bool| if applies { q.printed(v) } else { q };
    let pmf = binary_quadrant_pmf(c.rho)?;
    let same = 0.25 + c.rho.asin() / (2.0 * std::f64::consts::PI);
    let diff = 0.5 - same;
    let mut q = Vec::new();
    q.push(quoted(
        Quantity::new("H(W1,W2)", entropy(&pmf, &["w1", "w2"])?, "bits", "sign bits")
            .expect(entropy_bits(&[same, same, diff, diff]), EXACT_TOL),
        1.778,
        at_reference,
    ));
    q.push(quoted(
        Quantity::new("corr(W1,W2)", binary_correlation(&pmf)?, "", "Pearson, binary pair")
            .expect(2.0 * c.rho.asin() / std::f64::consts::PI, PRINTED_TOL),
        0.54,
        at_reference,
    ));
    let two = scheme(reports, SchemeId::Two);
    let three = scheme(reports, SchemeId::Three);
    q.push(
        Quantity::new("coloring gain", two.source_entropy_bits.unwrap_or(f64::NAN) - two.color_entropy_bits.unwrap_or(f64::NAN), "bits", "characteristic graph is complete")
            .expect(0.0, 1e-12),
    );
    q.push(quoted(
        Quantity::new("GMAC sum rate, independent inputs", two.channel_sum_rate_bits.unwrap_or(f64::NAN), "bits", "")
            .expect(0.5 * (1.0 + 2.0 * c.power).log2(), 1e-4),
        1.729,
        c.power == 5.0,
    ));
    q.push(quoted(
        Quantity::new("GMAC sum rate, correlated inputs", three.channel_sum_rate_bits.unwrap_or(f64::NAN), "bits", "")
            .expect(0.5 * (1.0 + 2.0 * c.power * (1.0 + c.input_rho)).log2(), 1e-4),
        1.903,
        c.power == 5.0 && c.input_rho == 0.3,
    ));
    let mut s2 = Quantity::flag("scheme 2 feasible", !verdict_is(two, Verdict::Violated), "");
    let mut s3 = Quantity::flag("scheme 3 feasible", verdict_is(three, Verdict::Strict), "");
    if at_reference && c.input_rho == 0.3 {
        s2 = s2.expect(0.0, 0.0);
        s3 = s3.expect(1.0, 0.0);
    }
    q.push(s2);
    q.push(s3);
    Ok(q)
}

fn gauss_diff_quantities(c: &crate::schemes::GaussDiffConfig, reports: &[SchemeReport]) -> Vec<Quantity> {
    let cen: Vec<&SchemeReport> = reports.iter().filter(|r| r.scheme == SchemeId::Centralized).collect();
    let af: Vec<&SchemeReport> = reports.iter().filter(|r| r.scheme == SchemeId::Af).collect();
    let gap = cen
        .iter()
        .zip(&af)
        .map(|(a, b)| b.distortion.unwrap_or(f64::NAN) - a.distortion.unwrap_or(f64::NAN))
        .fold(f64::INFINITY, f64::min);
    let mut q = vec![
        Quantity::new("power points", cen.len() as f64, "", "").expect(c.steps as f64, 0.0),
        Quantity::flag("D_AF >= D_cen everywhere", gap >= -1e-15, "").expect(1.0, 0.0),
    ];
    if c.rho == 0.0 {
        q.push(Quantity::new("max |D_AF - D_cen|", -gap, "mse", "equal at rho = 0").expect(0.0, 1e-15));
    }
    if c.samples > 0 {
        let worst = af
            .iter()
            .filter_map(|r| Some((r.monte_carlo?.mean - r.distortion?).abs() / r.distortion?.max(f64::MIN_POSITIVE)))
            .fold(0.0, f64::max);
        q.push(Quantity::new("max relative Monte Carlo error (AF)", worst, "", "").expect(0.0, 0.01));
    }
    q
}

fn uniform_grid_quantities(c: &crate::schemes::UniformGridConfig, reports: &[SchemeReport]) -> Result<Vec<Quantity>> {
    let q3 = GridQuantizer::new(0.0, 1.0, 3)?;
    let pair = grid_pair(&q3, &BlockDensity::off_diagonal_unit())?;
    let deviation = (0..3)
        .flat_map(|i| (0..3).map(move |j| (i, j)))
        .map(|(i, j)| (pair.get(&[i, j]) - if i == j { 0.0 } else { 1.0 / 6.0 }).abs())
        .fold(0.0, f64::max);
    let (g1, g2) = Preset::Grid.graphs(&pair)?;
    let path = |g: &CharGraph| g.edge_labels() == [("1".into(), "2".into()), ("2".into(), "3".into())];
    let log3 = 3f64.log2();
    let one = scheme(reports, SchemeId::One);
    let two = scheme(reports, SchemeId::Two);
    let three = scheme(reports, SchemeId::Three);
    let mut q = vec![
        Quantity::new("max |cell pmf - block mass|", deviation, "", "1/6 off the diagonal").expect(0.0, 1e-12),
        Quantity::flag("threshold graphs are paths 1-2-3", path(&g1) && path(&g2), "").expect(1.0, 0.0),
        Quantity::new("H(W1,W2)", one.rate_bits.unwrap_or(f64::NAN), "bits", "").expect(6f64.log2(), EXACT_TOL),
        Quantity::flag("scheme 1 violated", verdict_is(one, Verdict::Violated), "").expect(1.0, 0.0),
        Quantity::new("H(C1,C2)", two.rate_bits.unwrap_or(f64::NAN), "bits", "")
            .expect(log3, EXACT_TOL)
            .printed(1.58),
        Quantity::new("adder MAC sum capacity (independent inputs)", two.channel_sum_rate_bits.unwrap_or(f64::NAN), "bits", "")
            .expect(1.5, 1e-4)
            .printed(1.5),
        Quantity::flag("scheme 2 violated", verdict_is(two, Verdict::Violated), "").expect(1.0, 0.0),
        Quantity::flag("scheme 3 boundary", verdict_is(three, Verdict::Boundary), "").expect(1.0, 0.0),
        Quantity::new("scheme 3 distortion (exact)", three.distortion.unwrap_or(f64::NAN), "abs", "triangular cell differences")
            .expect(1.0 / 9.0, 1e-12),
    ];
    if let Some(mc) = three.monte_carlo {
        q.push(
            Quantity::new("scheme 3 distortion (Monte Carlo)", mc.mean, "abs", &format!("± {:.2e}", mc.half_width))
                .expect(1.0 / 9.0, 0.005),
        );
    }
    q.push(Quantity::new("distortion budget", c.target_d, "abs", "").printed(0.1667));
    q.push(Quantity::flag(
        "scheme 3 within budget",
        three.distortion.is_some_and(|d| d <= c.target_d),
        "",
    ).expect(1.0, 0.0));
    if let Some(delta) = three.delta_budget {
        q.push(Quantity::new("quantization budget D/alpha", delta, "abs", ""));
    }
    Ok(q)
}

/// Runs the pipeline of `config` and evaluates its registered expectations.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let reports = run_scheme(config)?;
    let (quantities, seed) = match config {
        ExperimentConfig::Section5 => (section5_quantities(&reports)?, None),
        ExperimentConfig::GaussDiff(c) => (gauss_diff_quantities(c, &reports), (c.samples > 0).then_some(c.seed)),
        ExperimentConfig::GaussBinary(c) => (gauss_binary_quantities(c, &reports)?, None),
        ExperimentConfig::UniformGrid(c) => (uniform_grid_quantities(c, &reports)?, (c.samples > 0).then_some(c.seed)),
    };
    Ok(ExperimentResult {
        experiment: config.id().to_string(),
        seed,
        quantities,
        reports,
    })
}

/// Errors surfaced to the user, with their exit status.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn read(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load<T: DeserializeOwned>(path: &Path) -> std::result::Result<T, Failure> {
    let text = read(path)?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let at = e.path().to_string();
        usage(format!("{}: schema error at `{at}`: {}", path.display(), e.inner()))
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn apply_overrides(config: &mut ExperimentConfig, a: &ExperimentArgs) -> std::result::Result<(), Failure> {
    let id = config.id();
    let mut unused = Vec::new();
    macro_rules! set {
        ($opt:expr, $name:literal, $target:expr) => {
            if let Some(v) = $opt {
                $target = v;
            }
        };
    }
    macro_rules! reject {
        ($($opt:expr, $name:literal);*) => {
            $(if $opt.is_some() { unused.push($name); })*
        };
    }
    match config {
        ExperimentConfig::Section5 => {
            reject!(a.rho, "--rho"; a.sigma2, "--sigma2"; a.power, "--power"; a.power_min, "--power-min";
                a.power_max, "--power-max"; a.steps, "--steps"; a.samples, "--samples"; a.input_rho, "--input-rho";
                a.target_d, "--target-d"; a.alpha, "--alpha");
        }
        ExperimentConfig::GaussDiff(c) => {
            set!(a.rho, "--rho", c.rho);
            set!(a.sigma2, "--sigma2", c.sigma2);
            set!(a.power_min, "--power-min", c.power_min);
            set!(a.power_max, "--power-max", c.power_max);
            set!(a.steps, "--steps", c.steps);
            set!(a.samples, "--samples", c.samples);
            set!(a.seed, "--seed", c.seed);
            reject!(a.power, "--power"; a.input_rho, "--input-rho"; a.target_d, "--target-d"; a.alpha, "--alpha");
        }
        ExperimentConfig::GaussBinary(c) => {
            set!(a.rho, "--rho", c.rho);
            set!(a.power, "--power", c.power);
            set!(a.input_rho, "--input-rho", c.input_rho);
            reject!(a.sigma2, "--sigma2"; a.power_min, "--power-min"; a.power_max, "--power-max"; a.steps, "--steps";
                a.samples, "--samples"; a.target_d, "--target-d"; a.alpha, "--alpha");
        }
        ExperimentConfig::UniformGrid(c) => {
            set!(a.samples, "--samples", c.samples);
            set!(a.seed, "--seed", c.seed);
            set!(a.target_d, "--target-d", c.target_d);
            if a.alpha.is_some() {
                c.alpha = a.alpha;
            }
            reject!(a.rho, "--rho"; a.sigma2, "--sigma2"; a.power, "--power"; a.power_min, "--power-min";
                a.power_max, "--power-max"; a.steps, "--steps"; a.input_rho, "--input-rho");
        }
    }
    if unused.is_empty() {
        Ok(())
    } else {
        Err(usage(format!("{} does not apply to experiment {id}", unused.join(", "))))
    }
}

fn experiment(a: ExperimentArgs, out: &mut dyn Write) -> std::result::Result<i32, Failure> {
    let mut config = match (&a.id, &a.config) {
        (_, Some(path)) => {
            let c: ExperimentConfig = load(path)?;
            if let Some(id) = &a.id {
                if id != c.id() {
                    return Err(usage(format!("config selects {}, not {id}", c.id())));
                }
            }
            c
        }
        (Some(id), None) => ExperimentConfig::named(id)?,
        (None, None) => return Err(usage("an experiment id or --config is required")),
    };
    apply_overrides(&mut config, &a)?;
    let result = run_experiment(&config)?;
    let data = match a.format {
        Format::Csv => reports_to_csv(&result.reports),
        Format::Json => to_json(&result),
    };
    let table = result.table();
    let io = |e: std::io::Error| usage(e.to_string());
    match &a.out {
        Some(path) => {
            fs::write(path, data).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            out.write_all(table.as_bytes()).map_err(io)?;
        }
        None => {
            out.write_all(data.as_bytes()).map_err(io)?;
            eprint!("{table}");
        }
    }
    Ok(if result.passed() { EXIT_OK } else { EXIT_FAIL })
}

fn report_csv(r: &FeasibilityReport) -> String {
    let mut s = String::from("quantity,lhs_bits,rhs_bits,margin_bits,verdict\n");
    for i in &r.inequalities {
        s.push_str(&format!(
            "{} < {},{},{},{},{}\n",
            i.lhs_label,
            i.rhs_label,
            i.lhs,
            i.rhs,
            i.margin,
            i.verdict.as_str()
        ));
    }
    s.push_str(&format!(
        "distortion <= target,{},{},{},{}\n",
        r.achieved_distortion,
        r.target_d,
        r.target_d - r.achieved_distortion,
        if r.distortion_ok { "ok" } else { "exceeded" }
    ));
    s
}

fn check(what: CheckCommand, out: &mut dyn Write) -> std::result::Result<i32, Failure> {
    let CheckCommand::Theorem1 {
        spec,
        allow_boundary,
        format,
    } = what;
    let text = read(&spec)?;
    let parsed = SystemSpec::from_json(&text).map_err(|e| {
        usage(format!("{}: schema error at `{}`: {}", spec.display(), e.path(), e.inner()))
    })?;
    let report = check_feasibility(&parsed)?;
    let rendered = match format {
        Format::Json => to_json(&report),
        Format::Csv => report_csv(&report),
    };
    out.write_all(rendered.as_bytes()).map_err(|e| usage(e.to_string()))?;
    Ok(if report.feasible(allow_boundary) { EXIT_OK } else { EXIT_FAIL })
}

fn first_marginal(joint: &JointPmf) -> Result<JointPmf> {
    let name = joint.axes()[0].name().to_string();
    joint.marginalize(&[name.as_str()])
}

fn graph(what: GraphCommand, out: &mut dyn Write) -> std::result::Result<i32, Failure> {
    let rendered = match what {
        GraphCommand::Build {
            joint,
            function,
            distortion,
            delta,
            peer,
        } => {
            let joint: JointPmf = load(&joint)?;
            let f: FunctionTable = load(&function)?;
            let fidelity = match (distortion, delta) {
                (Some(path), Some(delta)) => Fidelity::Threshold {
                    measure: load::<DistortionTable>(&path)?,
                    delta,
                },
                _ => Fidelity::Exact,
            };
            let g = if peer {
                peer_characteristic_graph(&joint, &f, &fidelity)?
            } else {
                characteristic_graph(&joint, &f, &fidelity)?
            };
            to_json(&g)
        }
        GraphCommand::Color { graph, joint, greedy } => {
            let g: CharGraph = load(&graph)?;
            let joint: JointPmf = load(&joint)?;
            let mode = if greedy { ColoringMode::Greedy } else { ColoringMode::Exact };
            let (coloring, bits) = min_entropy_coloring(&g, &first_marginal(&joint)?, mode)?;
            to_json(&serde_json::json!({
                "coloring": coloring.to_map(&g),
                "num_colors": coloring.num_colors(),
                "entropy_bits": bits,
            }))
        }
        GraphCommand::Entropy { graph, joint, n } => {
            let g: CharGraph = load(&graph)?;
            let joint: JointPmf = load(&joint)?;
            let cc = conditional_chromatic_entropy(&g, &joint, n)?;
            let ge = conditional_graph_entropy(&g, &joint)?;
            let zig = zigzag_check(&joint)?;
            to_json(&serde_json::json!({
                "block_length": n,
                "conditional_chromatic_entropy_bits": cc.bits_per_symbol,
                "coloring": cc.coloring.to_map(&cc.graph),
                "conditional_graph_entropy_bits": ge.bits,
                "graph_entropy_converged": ge.converged,
                "zigzag": zig.is_none(),
                "zigzag_witness": zig.map(|w| [w.first, w.second]),
            }))
        }
    };
    out.write_all(rendered.as_bytes()).map_err(|e| usage(e.to_string()))?;
    Ok(EXIT_OK)
}

fn channel(what: ChannelCommand, out: &mut dyn Write) -> std::result::Result<i32, Failure> {
    let rendered = match what {
        ChannelCommand::Capacity { mac, .. } => {
            let mac: DiscreteMac = match mac {
                Some(path) => load(&path)?,
                None => adder_mac(),
            };
            let c = mac_sum_capacity_independent(&mac)?;
            let r = product_input_rates(&mac, &c.p_x1, &c.p_x2)?;
            to_json(&serde_json::json!({
                "sum_capacity_bits": c.bits,
                "p_x1": c.p_x1,
                "p_x2": c.p_x2,
                "i_x1_y_given_x2_bits": r.first,
                "i_x2_y_given_x1_bits": r.second,
            }))
        }
        ChannelCommand::Gmac { power, rho, noise_var } => {
            let mac = GaussianMac::new(power, noise_var)?;
            to_json(&serde_json::json!({
                "power": power,
                "rho": rho,
                "noise_var": noise_var,
                "sum_rate_bits": gmac_sum_rate(&mac, rho)?,
            }))
        }
    };
    out.write_all(rendered.as_bytes()).map_err(|e| usage(e.to_string()))?;
    Ok(EXIT_OK)
}

/// Parses `args` (including the program name) and runs the command,
/// writing results to `out` and diagnostics to stderr. Returns the exit
/// status.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Experiment(a) => experiment(a, out),
        Command::Check { what } => check(what, out),
        Command::Graph { what } => graph(what, out),
        Command::Channel { what } => channel(what, out),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

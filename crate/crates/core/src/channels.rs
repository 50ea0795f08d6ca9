//! Discrete and Gaussian two-user multiple access channels.

use serde::{Deserialize, Serialize};

use crate::error::{invalid_param, Error, Result};
use crate::info::{entropy_of, mutual_information};
use crate::prob::{Alphabet, JointPmf, Kernel};

/// Grid resolution per axis for binary-input capacity search.
pub const CAPACITY_GRID: usize = 51;

/// Largest input alphabet accepted by the product-input capacity search.
pub const CAPACITY_INPUT_CAP: usize = 8;

/// A memoryless MAC `p(y | x1, x2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Kernel", into = "Kernel")]
pub struct DiscreteMac {
    law: Kernel,
}

impl TryFrom<Kernel> for DiscreteMac {
    type Error = Error;

    fn try_from(k: Kernel) -> Result<Self> {
        DiscreteMac::new(k)
    }
}

impl From<DiscreteMac> for Kernel {
    fn from(m: DiscreteMac) -> Self {
        m.law
    }
}

impl DiscreteMac {
    /// The law must map exactly two input axes to one output axis.
    pub fn new(law: Kernel) -> Result<Self> {
        if law.from_axes().len() != 2 || law.to_axes().len() != 1 {
            return Err(Error::ShapeMismatch {
                expected: 2,
                found: law.from_axes().len(),
            });
        }
        Ok(DiscreteMac { law })
    }

    pub fn law(&self) -> &Kernel {
        &self.law
    }

    pub fn inputs(&self) -> (&Alphabet, &Alphabet) {
        (&self.law.from_axes()[0], &self.law.from_axes()[1])
    }

    pub fn output(&self) -> &Alphabet {
        &self.law.to_axes()[0]
    }

    fn row(&self, a: usize, b: usize) -> &[f64] {
        self.law.row(&[a, b])
    }
}

/// Binary adder MAC `Y = X1 + X2` over inputs `x1`, `x2` and output `y`.
pub fn adder_mac() -> DiscreteMac {
    let bit = Alphabet::indexed("x1", 2).expect("static alphabet");
    let law = Kernel::deterministic(
        vec![bit.clone(), bit.renamed("x2")],
        vec![Alphabet::indexed("y", 3).expect("static alphabet")],
        |x| vec![x[0] + x[1]],
    )
    .expect("adder law is deterministic");
    DiscreteMac { law }
}

/// `I(X1, X2; Y)` with inputs drawn from `input_joint` over the MAC's input
/// axes.
pub fn mac_mutual_info(mac: &DiscreteMac, input_joint: &JointPmf) -> Result<f64> {
    let (a, b) = mac.inputs();
    if input_joint.axes().len() != 2 {
        return Err(Error::ShapeMismatch {
            expected: 2,
            found: input_joint.axes().len(),
        });
    }
    for (mine, theirs) in [a, b].into_iter().zip(input_joint.axes()) {
        if mine.name() != theirs.name() {
            return Err(Error::AlphabetMismatch {
                axis: mine.name().to_string(),
                detail: format!("input joint axis is named `{}`", theirs.name()),
            });
        }
    }
    let joint = input_joint.compose(std::slice::from_ref(mac.law()))?;
    mutual_information(&joint, &[a.name(), b.name()], &[mac.output().name()], &[])
}

/// Rates supported by a product input distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductRates {
    /// `I(X1; Y | X2)`
    pub first: f64,
    /// `I(X2; Y | X1)`
    pub second: f64,
    /// `I(X1, X2; Y)`
    pub sum: f64,
}

fn row_entropies(mac: &DiscreteMac) -> Vec<Vec<f64>> {
    let (a, b) = mac.inputs();
    (0..a.len())
        .map(|i| (0..b.len()).map(|j| entropy_of(mac.row(i, j))).collect())
        .collect()
}

fn product_sum_rate(mac: &DiscreteMac, hrow: &[Vec<f64>], p1: &[f64], p2: &[f64]) -> f64 {
    let ny = mac.output().len();
    let mut py = vec![0.0; ny];
    let mut cond = 0.0;
    for (i, &pa) in p1.iter().enumerate() {
        for (j, &pb) in p2.iter().enumerate() {
            let w = pa * pb;
            if w > 0.0 {
                for (y, q) in mac.row(i, j).iter().enumerate() {
                    py[y] += w * q;
                }
                cond += w * hrow[i][j];
            }
        }
    }
    (entropy_of(&py) - cond).max(0.0)
}

/// Individual and sum rates of the pentagon for inputs `p1 × p2`.
pub fn product_input_rates(mac: &DiscreteMac, p1: &[f64], p2: &[f64]) -> Result<ProductRates> {
    let (a, b) = mac.inputs();
    let m1 = JointPmf::new(vec![a.clone()], p1.to_vec())?;
    let m2 = JointPmf::new(vec![b.clone()], p2.to_vec())?;
    let joint = m1.product(&m2)?.compose(std::slice::from_ref(mac.law()))?;
    let (x1, x2, y) = (a.name(), b.name(), mac.output().name());
    Ok(ProductRates {
        first: mutual_information(&joint, &[x1], &[y], &[x2])?,
        second: mutual_information(&joint, &[x2], &[y], &[x1])?,
        sum: mutual_information(&joint, &[x1, x2], &[y], &[])?,
    })
}

/// Maximum of `I(X1, X2; Y)` over independent inputs, with the maximizing
/// marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct SumCapacity {
    pub bits: f64,
    pub p_x1: Vec<f64>,
    pub p_x2: Vec<f64>,
}

/// Maximizes `H(Y) - sum_a p(a) cost[a]` over `p` given the effective rows
/// `rows[a] = p(y | a)`, by Blahut-Arimoto style multiplicative updates.
fn ba_linear(rows: &[Vec<f64>], cost: &[f64], mut p: Vec<f64>) -> Vec<f64> {
    let ny = rows[0].len();
    for _ in 0..2000 {
        let mut q = vec![0.0; ny];
        for (pa, row) in p.iter().zip(rows) {
            for (qy, w) in q.iter_mut().zip(row) {
                *qy += pa * w;
            }
        }
        let score: Vec<f64> = rows
            .iter()
            .zip(cost)
            .map(|(row, c)| {
                let cross: f64 = row
                    .iter()
                    .zip(&q)
                    .filter(|(w, _)| **w > 0.0)
                    .map(|(w, qy)| -w * qy.log2())
                    .sum();
                cross - c
            })
            .collect();
        let top = score.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut next: Vec<f64> = p.iter().zip(&score).map(|(pa, s)| pa * (s - top).exp2()).collect();
        let z: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= z);
        let delta: f64 = next.iter().zip(&p).map(|(a, b)| (a - b).abs()).sum();
        p = next;
        if delta < 1e-13 {
            break;
        }
    }
    p
}

/// One pass of "fix the other input, maximize this one".
fn best_response(mac: &DiscreteMac, hrow: &[Vec<f64>], other: &[f64], first: bool, start: Vec<f64>) -> Vec<f64> {
    let (a, b) = mac.inputs();
    let ny = mac.output().len();
    let n = if first { a.len() } else { b.len() };
    let mut rows = vec![vec![0.0; ny]; n];
    let mut cost = vec![0.0; n];
    for (k, (row, c)) in rows.iter_mut().zip(cost.iter_mut()).enumerate() {
        for (l, &po) in other.iter().enumerate() {
            let (i, j) = if first { (k, l) } else { (l, k) };
            for (ry, w) in row.iter_mut().zip(mac.row(i, j)) {
                *ry += po * w;
            }
            *c += po * hrow[i][j];
        }
    }
    ba_linear(&rows, &cost, start)
}

fn golden_max(mut f: impl FnMut(f64) -> f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > 1e-12 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    // endpoints are not visited by the interior search
    [(x, f(x)), (0.0, f(0.0)), (1.0, f(1.0))]
        .into_iter()
        .fold((x, f64::NEG_INFINITY), |best, c| if c.1 > best.1 + 1e-15 { c } else { best })
}

/// Sum capacity over product inputs `p(x1) p(x2)`.
///
/// Alternating maximization (each half-step is a concave problem solved by
/// multiplicative updates) from the uniform start. For binary inputs a
/// 51×51 grid over `(P[x1=1], P[x2=1])` followed by coordinate-wise golden
/// section refinement runs as well, and the better answer wins.
pub fn mac_sum_capacity_independent(mac: &DiscreteMac) -> Result<SumCapacity> {
    let (a, b) = mac.inputs();
    let (na, nb) = (a.len(), b.len());
    if na > CAPACITY_INPUT_CAP || nb > CAPACITY_INPUT_CAP {
        return Err(Error::CapExceeded {
            what: "product-input capacity search",
            needed: na.max(nb),
            cap: CAPACITY_INPUT_CAP,
        });
    }
    let hrow = row_entropies(mac);
    let eval = |p1: &[f64], p2: &[f64]| product_sum_rate(mac, &hrow, p1, p2);

    let mut p1 = vec![1.0 / na as f64; na];
    let mut p2 = vec![1.0 / nb as f64; nb];
    let mut value = eval(&p1, &p2);
    for _ in 0..500 {
        p1 = best_response(mac, &hrow, &p2, true, p1);
        p2 = best_response(mac, &hrow, &p1, false, p2);
        let next = eval(&p1, &p2);
        let gain = next - value;
        value = next;
        if gain < 1e-13 {
            break;
        }
    }
    let mut best = SumCapacity {
        bits: value,
        p_x1: p1,
        p_x2: p2,
    };

    if na == 2 && nb == 2 {
        let step = 1.0 / (CAPACITY_GRID - 1) as f64;
        let (mut s, mut t, mut v) = (0.0, 0.0, f64::NEG_INFINITY);
        for i in 0..CAPACITY_GRID {
            for j in 0..CAPACITY_GRID {
                let (x, y) = (i as f64 * step, j as f64 * step);
                let r = eval(&[1.0 - x, x], &[1.0 - y, y]);
                if r > v + 1e-15 {
                    (s, t, v) = (x, y, r);
                }
            }
        }
        for _ in 0..200 {
            let (ns, _) = golden_max(|x| eval(&[1.0 - x, x], &[1.0 - t, t]));
            let (nt, nv) = golden_max(|y| eval(&[1.0 - ns, ns], &[1.0 - y, y]));
            let gain = nv - v;
            s = ns;
            t = nt;
            v = v.max(nv);
            if gain < 1e-14 {
                break;
            }
        }
        if v > best.bits + 1e-15 {
            best = SumCapacity {
                bits: v,
                p_x1: vec![1.0 - s, s],
                p_x2: vec![1.0 - t, t],
            };
        }
    }
    Ok(best)
}

/// Gaussian MAC with per-input power `power` and receiver noise variance
/// `noise_var`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianMac {
    power: f64,
    noise_var: f64,
}

impl GaussianMac {
    pub fn new(power: f64, noise_var: f64) -> Result<Self> {
        if !(power >= 0.0) || !power.is_finite() {
            return Err(invalid_param("power", format!("{power} must be finite and >= 0")));
        }
        if !(noise_var > 0.0) || !noise_var.is_finite() {
            return Err(invalid_param("noise_var", format!("{noise_var} must be finite and > 0")));
        }
        Ok(GaussianMac { power, noise_var })
    }

    /// Unit receiver noise.
    pub fn with_power(power: f64) -> Result<Self> {
        GaussianMac::new(power, 1.0)
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }
}

/// `I(X1, X2; Y)` for jointly Gaussian inputs at correlation `rho_x`:
/// `½ log2(1 + 2P(1 + ρx) / N)`.
pub fn gmac_sum_rate(mac: &GaussianMac, rho_x: f64) -> Result<f64> {
    if !(rho_x.abs() <= 1.0) {
        return Err(invalid_param("rho", format!("{rho_x} outside [-1, 1]")));
    }
    Ok(0.5 * (1.0 + 2.0 * mac.power * (1.0 + rho_x) / mac.noise_var).log2())
}

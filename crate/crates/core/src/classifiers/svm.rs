//! Soft-margin kernel SVM trained with sequential minimal optimization,
//! one binary problem per class (class vs rest).

use super::{Classifier, Features, Standardizer, TrainingSet};
use crate::glcm::{FeatureVector, FEATURE_COUNT};
use crate::imaging::{ClassId, ClassMap};
use crate::par::{self, Execution};
use crate::{Error, Result};

/// Above this many samples kernel values are recomputed instead of cached.
const GRAM_LIMIT: usize = 3000;
/// Relative size below which a multiplier update counts as no progress.
/// Stand-in curvature for pairs whose kernel rows coincide.
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, a: &Features, b: &Features) -> f64 {
        match *self {
            Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            Kernel::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
        }
    }
}

impl Default for Kernel {
    /// `γ = 1 / (k · Var)` with unit variance after standardization.
    fn default() -> Self {
        Kernel::Rbf {
            gamma: 1.0 / FEATURE_COUNT as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    /// Box constraint.
    pub c: f64,
    pub kernel: Kernel,
    /// KKT tolerance on `y f(x) - 1`.
    pub tol: f64,
    /// Budget of `10 * max_passes` sweeps, a sweep being one pair update
    /// per training sample.
    pub max_passes: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            kernel: Kernel::default(),
            tol: 1e-3,
            max_passes: 100,
        }
    }
}

impl SvmParams {
    fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "C must be positive, got {}",
                self.c
            )));
        }
        if let Kernel::Rbf { gamma } = self.kernel {
            if !(gamma > 0.0 && gamma.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "gamma must be positive, got {gamma}"
                )));
            }
        }
        if self.tol.is_nan() || self.tol <= 0.0 || self.max_passes == 0 {
            return Err(Error::InvalidArgument(
                "tol and max_passes must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One class-vs-rest problem: `f(z) = Σ coef_i K(s_i, z) + bias`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryProblem {
    pub(super) class: ClassId,
    pub(super) c: f64,
    pub(super) bias: f64,
    /// Standardized support samples (multiplier > 0).
    pub(super) support: Vec<Features>,
    /// `α_i y_i` per support sample.
    pub(super) coef: Vec<f64>,
    pub(super) converged: bool,
    pub(super) sweeps: usize,
}

impl BinaryProblem {
    pub fn class(&self) -> ClassId {
        self.class
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn support(&self) -> &[Features] {
        &self.support
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coef
    }

    pub fn n_support(&self) -> usize {
        self.support.len()
    }

    /// False when the sweep budget ran out before every KKT condition held;
    /// the model then carries the last (best) iterate.
    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn decision(&self, kernel: &Kernel, z: &Features) -> f64 {
        self.support
            .iter()
            .zip(&self.coef)
            .map(|(s, c)| c * kernel.eval(s, z))
            .sum::<f64>()
            + self.bias
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub(super) classes: ClassMap,
    pub(super) standardizer: Standardizer,
    pub(super) kernel: Kernel,
    pub(super) problems: Vec<BinaryProblem>,
}

impl SvmModel {
    /// Standardizes the inputs and solves one SMO problem per class. The
    /// binary problems are independent and train on the current pool.
    pub fn fit(data: &TrainingSet, params: &SvmParams) -> Result<Self> {
        params.validate()?;
        let standardizer = Standardizer::fit(data);
        let z: Vec<Features> = data
            .samples()
            .iter()
            .map(|s| standardizer.apply(&s.features))
            .collect();
        let kernel_values = KernelValues::new(&z, params.kernel);
        let ids: Vec<ClassId> = data.classes().ids().collect();
        let problems = par::map_slice(&ids, Execution::Parallel, |&class| {
            let y: Vec<f64> = data
                .samples()
                .iter()
                .map(|s| if s.label == class { 1.0 } else { -1.0 })
                .collect();
            let solution = Smo::new(&kernel_values, &y, params).solve();
            let mut support = Vec::new();
            let mut coef = Vec::new();
            for (i, &a) in solution.alpha.iter().enumerate() {
                if a > 0.0 {
                    support.push(z[i]);
                    coef.push(a * y[i]);
                }
            }
            BinaryProblem {
                class,
                c: params.c,
                bias: solution.bias,
                support,
                coef,
                converged: solution.converged,
                sweeps: solution.sweeps,
            }
        });
        Ok(Self {
            classes: data.classes().clone(),
            standardizer,
            kernel: params.kernel,
            problems,
        })
    }

    pub fn classes(&self) -> &ClassMap {
        &self.classes
    }

    pub fn standardizer(&self) -> &Standardizer {
        &self.standardizer
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn problems(&self) -> &[BinaryProblem] {
        &self.problems
    }

    /// Error naming the first problem that did not converge, if any.
    pub fn check_converged(&self) -> Result<()> {
        match self.problems.iter().find(|p| !p.converged) {
            Some(p) => Err(Error::NotConverged {
                class: p.class,
                sweeps: p.sweeps,
            }),
            None => Ok(()),
        }
    }

    /// Per-class decision values on the standardized input.
    pub fn decision(&self, x: &FeatureVector) -> Vec<f64> {
        let z = self.standardizer.apply(x);
        self.problems
            .iter()
            .map(|p| p.decision(&self.kernel, &z))
            .collect()
    }

    /// For a linear kernel, `(w, b)` of each class's decision function
    /// expressed in raw feature units.
    pub fn linear_weights(&self, class: ClassId) -> Option<(Features, f64)> {
        if self.kernel != Kernel::Linear {
            return None;
        }
        let p = &self.problems[self.classes.index_of(class)?];
        let mut wz = [0.0; FEATURE_COUNT];
        for (s, c) in p.support.iter().zip(&p.coef) {
            (0..FEATURE_COUNT).for_each(|f| wz[f] += c * s[f]);
        }
        let (mean, std) = (self.standardizer.mean(), self.standardizer.std());
        let w = std::array::from_fn(|f| wz[f] / std[f]);
        let b = p.bias
            - (0..FEATURE_COUNT)
                .map(|f| wz[f] * mean[f] / std[f])
                .sum::<f64>();
        Some((w, b))
    }
}

impl Classifier for SvmModel {
    fn classes(&self) -> &ClassMap {
        &self.classes
    }

    fn scores(&self, x: &FeatureVector) -> Vec<f64> {
        self.decision(x)
    }
}

/// Kernel values between training samples, cached when the set is small.
struct KernelValues<'a> {
    z: &'a [Features],
    kernel: Kernel,
    gram: Option<Vec<f64>>,
}

impl<'a> KernelValues<'a> {
    fn new(z: &'a [Features], kernel: Kernel) -> Self {
        let n = z.len();
        let gram = (n <= GRAM_LIMIT).then(|| {
            let rows = par::map_range(n, Execution::Parallel, |i| {
                z.iter().map(|b| kernel.eval(&z[i], b)).collect::<Vec<_>>()
            });
            rows.concat()
        });
        Self { z, kernel, gram }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        match &self.gram {
            Some(g) => g[i * self.z.len() + j],
            None => self.kernel.eval(&self.z[i], &self.z[j]),
        }
    }
}

struct Solution {
    alpha: Vec<f64>,
    bias: f64,
    converged: bool,
    sweeps: usize,
}

/// SMO with second-order working-set selection: each step updates the most
/// violating pair and stops once the violation gap falls to `tol`.
struct Smo<'a> {
    k: &'a KernelValues<'a>,
    y: &'a [f64],
    c: f64,
    tol: f64,
    max_steps: usize,
    alpha: Vec<f64>,
    /// Gradient of the dual objective, `(Q alpha)_t - 1`.
    grad: Vec<f64>,
}

impl<'a> Smo<'a> {
    fn new(k: &'a KernelValues<'a>, y: &'a [f64], params: &SvmParams) -> Self {
        let n = y.len();
        Self {
            k,
            y,
            c: params.c,
            tol: params.tol,
            max_steps: params
                .max_passes
                .saturating_mul(10)
                .saturating_mul(n.max(1)),
            alpha: vec![0.0; n],
            grad: vec![-1.0; n],
        }
    }

    fn in_up(&self, t: usize) -> bool {
        if self.y[t] > 0.0 {
            self.alpha[t] < self.c
        } else {
            self.alpha[t] > 0.0
        }
    }

    fn in_low(&self, t: usize) -> bool {
        if self.y[t] > 0.0 {
            self.alpha[t] > 0.0
        } else {
            self.alpha[t] < self.c
        }
    }

    /// The pair to update, or `None` once the gap is within tolerance.
    fn select(&self) -> Option<(usize, usize)> {
        let n = self.y.len();
        let mut g_max = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            if self.in_up(t) && -self.y[t] * self.grad[t] > g_max {
                g_max = -self.y[t] * self.grad[t];
                i = t;
            }
        }
        if i == usize::MAX {
            return None;
        }
        let mut g_min = f64::INFINITY;
        let mut best = f64::INFINITY;
        let mut j = usize::MAX;
        let kii = self.k.get(i, i);
        for t in 0..n {
            if !self.in_low(t) {
                continue;
            }
            let v = -self.y[t] * self.grad[t];
            g_min = g_min.min(v);
            let b = g_max - v;
            if b > 0.0 {
                let a = kii + self.k.get(t, t) - 2.0 * self.k.get(i, t);
                let gain = -(b * b) / if a > 0.0 { a } else { TAU };
                if gain < best {
                    best = gain;
                    j = t;
                }
            }
        }
        (g_max - g_min > self.tol && j != usize::MAX).then_some((i, j))
    }

    fn update(&mut self, i: usize, j: usize) {
        let c = self.c;
        let (ai, aj) = (self.alpha[i], self.alpha[j]);
        let curvature = (self.k.get(i, i) + self.k.get(j, j) - 2.0 * self.k.get(i, j)).max(TAU);
        let (mut new_i, mut new_j);
        if self.y[i] != self.y[j] {
            let delta = (-self.grad[i] - self.grad[j]) / curvature;
            let diff = ai - aj;
            new_i = ai + delta;
            new_j = aj + delta;
            if diff > 0.0 {
                if new_j < 0.0 {
                    new_j = 0.0;
                    new_i = diff;
                }
            } else if new_i < 0.0 {
                new_i = 0.0;
                new_j = -diff;
            }
            if diff > 0.0 {
                if new_i > c {
                    new_i = c;
                    new_j = c - diff;
                }
            } else if new_j > c {
                new_j = c;
                new_i = c + diff;
            }
        } else {
            let delta = (self.grad[i] - self.grad[j]) / curvature;
            let sum = ai + aj;
            new_i = ai - delta;
            new_j = aj + delta;
            if sum > c {
                if new_i > c {
                    new_i = c;
                    new_j = sum - c;
                }
                if new_j > c {
                    new_j = c;
                    new_i = sum - c;
                }
            } else {
                if new_j < 0.0 {
                    new_j = 0.0;
                    new_i = sum;
                }
                if new_i < 0.0 {
                    new_i = 0.0;
                    new_j = sum;
                }
            }
        }
        let (di, dj) = (new_i - ai, new_j - aj);
        let (yi, yj) = (self.y[i], self.y[j]);
        for t in 0..self.grad.len() {
            let yt = self.y[t];
            self.grad[t] += yt * (yi * self.k.get(i, t) * di + yj * self.k.get(j, t) * dj);
        }
        self.alpha[i] = new_i;
        self.alpha[j] = new_j;
    }

    /// Bias midway through the feasible range: the mean over free
    /// multipliers, else the middle of the bound-implied interval.
    fn bias(&self) -> f64 {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        let (mut sum, mut free) = (0.0, 0usize);
        for t in 0..self.y.len() {
            let v = -self.y[t] * self.grad[t];
            let at_upper = self.alpha[t] >= self.c;
            let at_lower = self.alpha[t] <= 0.0;
            if !at_upper && !at_lower {
                sum += v;
                free += 1;
            } else if at_upper == (self.y[t] > 0.0) {
                hi = hi.min(v);
            } else {
                lo = lo.max(v);
            }
        }
        if free > 0 {
            sum / free as f64
        } else if lo.is_finite() && hi.is_finite() {
            0.5 * (lo + hi)
        } else if lo.is_finite() {
            lo
        } else {
            hi
        }
    }

    fn solve(mut self) -> Solution {
        let n = self.y.len().max(1);
        let mut steps = 0;
        let mut converged = false;
        while steps < self.max_steps {
            match self.select() {
                Some((i, j)) => self.update(i, j),
                None => {
                    converged = true;
                    break;
                }
            }
            steps += 1;
        }
        if !converged {
            converged = self.select().is_none();
        }
        Solution {
            bias: self.bias(),
            alpha: self.alpha,
            converged,
            sweeps: steps.div_ceil(n),
        }
    }
}

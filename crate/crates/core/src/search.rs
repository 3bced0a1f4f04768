//! Multistart optimization of `Tr S_{m,k}(A,B)` over unit-norm PSD or
//! Hermitian pairs, and the diagnostics evaluated at the points it finds.
//!
//! Each start alternates an `A` block step and a `B` block step. A block
//! step moves against the sphere-tangent part of the gradient, retracts
//! (eigenvalue clipping for the PSD modes, then renormalization), and
//! backtracks until
//!
//! ```text
//! g(X_new) <= g(X) - (c / t) ||X_new - X||^2
//! ```
//!
//! where `g` is the objective (negated for maximization) and `t` the step.
//! Every accepted step therefore strictly decreases `g`.

use std::ops::RangeInclusive;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::hurwitz::{binomial, HurwitzTable};
use crate::matrix::{
    frob_norm, herm_eig, psd_project, psd_sqrt, ComplexMat, HermitianMat, PsdUnit,
};
use crate::rng::LabRng;
use crate::variational::el_residual_from_table;

pub const REPORT_VERSION: &str = "bmv-lab/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    MinPsd,
    MaxPsd,
    MinHerm,
    MaxHerm,
}

impl Mode {
    pub fn is_psd(self) -> bool {
        matches!(self, Mode::MinPsd | Mode::MaxPsd)
    }

    pub fn is_min(self) -> bool {
        matches!(self, Mode::MinPsd | Mode::MinHerm)
    }

    fn sign(self) -> f64 {
        if self.is_min() {
            1.0
        } else {
            -1.0
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::MinPsd => "min-psd",
            Mode::MaxPsd => "max-psd",
            Mode::MinHerm => "min-herm",
            Mode::MaxHerm => "max-herm",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min-psd" | "min_psd" => Ok(Mode::MinPsd),
            "max-psd" | "max_psd" => Ok(Mode::MaxPsd),
            "min-herm" | "min_herm" | "min_hermitian" => Ok(Mode::MinHerm),
            "max-herm" | "max_herm" | "max_hermitian" => Ok(Mode::MaxHerm),
            other => Err(LabError::InvalidArgument(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimConfig {
    pub mode: Mode,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub starts: usize,
    pub max_iters: usize,
    pub step0: f64,
    pub armijo_c: f64,
    pub armijo_shrink: f64,
    pub max_backtracks: usize,
    pub tol_grad: f64,
    pub tol_el: f64,
    pub seed: u64,
}

impl Default for OptimConfig {
    fn default() -> Self {
        Self {
            mode: Mode::MinPsd,
            n: 3,
            m: 6,
            k: 3,
            starts: 20,
            max_iters: 5000,
            step0: 0.5,
            armijo_c: 1e-4,
            armijo_shrink: 0.5,
            max_backtracks: 40,
            tol_grad: 1e-9,
            tol_el: 1e-5,
            seed: 0,
        }
    }
}

impl OptimConfig {
    pub fn new(mode: Mode, n: usize, m: usize, k: usize, seed: u64) -> Self {
        Self {
            mode,
            n,
            m,
            k,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(LabError::InvalidArgument(msg));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if !(self.m > self.k && self.k > 0) {
            return bad(format!(
                "need m > k > 0, got m = {}, k = {}",
                self.m, self.k
            ));
        }
        if self.starts == 0 {
            return bad("starts must be at least 1".into());
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return bad(format!("armijo_c must lie in (0,1), got {}", self.armijo_c));
        }
        if !(self.armijo_shrink > 0.0 && self.armijo_shrink < 1.0) {
            return bad(format!(
                "armijo_shrink must lie in (0,1), got {}",
                self.armijo_shrink
            ));
        }
        if !(self.step0 > 0.0 && self.step0.is_finite()) {
            return bad(format!("step0 must be positive, got {}", self.step0));
        }
        if !(self.tol_grad >= 0.0 && self.tol_el >= 0.0) {
            return bad("tolerances must be nonnegative".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StartRecord {
    pub objective: f64,
    pub iters: usize,
    pub el_norm_a: f64,
    pub el_norm_b: f64,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub degenerate_restarts: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

fn is_zero(x: &usize) -> bool {
    *x == 0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BestPoint {
    pub start: usize,
    pub objective: f64,
    #[serde(rename = "A")]
    pub a: HermitianMat,
    #[serde(rename = "B")]
    pub b: HermitianMat,
}

/// Quantities evaluated at a point `(A, B)` for a given `(m, k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub objective: f64,
    /// `||S_{m,k}||`
    pub s_norm: f64,
    /// `||AB - BA||`
    pub commutator_norm: f64,
    /// Eigenvalues of `S_{m,k}`, ascending.
    pub spectrum_s: Vec<f64>,
    pub max_eig_s: f64,
    /// `max(0, max eig S_{m,k})` when the objective is negative, else 0.
    pub negdef_defect: f64,
    pub sing_margin_a: f64,
    pub sing_margin_b: f64,
    /// `(Tr S_{m+1,k}, Tr S_{m+1,k+1})`
    pub upward: (f64, f64),
    /// `C(m,k) - |Tr S_{m,k}|`
    pub bound_gap: f64,
    /// Second-largest eigenvalue magnitude of `A`.
    pub rank1_defect_a: f64,
    /// `min(||A - B||, ||A + B||)`
    pub sign_distance: f64,
    pub el_norm_a: f64,
    pub el_norm_b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub config: OptimConfig,
    pub starts: Vec<StartRecord>,
    pub best: BestPoint,
    pub diagnostics: Diagnostics,
    pub wall_time_s: f64,
}

/// Per-iteration state recorded when a history is requested.
#[derive(Clone, Debug)]
pub struct IterLog {
    /// Objective in the mode's own sense (`Tr S`, not negated).
    pub objective: f64,
    pub min_eig_a: f64,
    pub min_eig_b: f64,
    pub norm_a: f64,
    pub norm_b: f64,
}

/// Outcome of a single start.
#[derive(Clone, Debug)]
pub struct StartOutcome {
    pub record: StartRecord,
    pub a: HermitianMat,
    pub b: HermitianMat,
    pub history: Vec<IterLog>,
}

#[derive(Clone, Copy)]
enum Block {
    A,
    B,
}

struct Problem<'a> {
    cfg: &'a OptimConfig,
    sign: f64,
}

impl Problem<'_> {
    /// Signed objective `g = sign * Re Tr S_{m,k}`.
    fn value(&self, a: &ComplexMat, b: &ComplexMat) -> f64 {
        let table = HurwitzTable::build(a, b, self.cfg.m).expect("same dimension");
        self.sign
            * table
                .cell(self.cfg.m, self.cfg.k)
                .expect("in range")
                .trace()
                .re
    }

    fn gradient(&self, a: &ComplexMat, b: &ComplexMat, block: Block) -> HermitianMat {
        let (m, k) = (self.cfg.m, self.cfg.k);
        let table = HurwitzTable::build(a, b, m - 1).expect("same dimension");
        let s = match block {
            Block::A => table.s(m - 1, k),
            Block::B => table.s(m - 1, k - 1),
        }
        .expect("depth m-1");
        HermitianMat::symmetrize(&s.scale_re(self.sign * m as f64))
    }

    /// Sends `x` back to the feasible set; `None` if nothing survives.
    fn retract(&self, x: &HermitianMat) -> Result<Option<HermitianMat>> {
        let y = if self.cfg.mode.is_psd() {
            psd_project(x)?
        } else {
            x.clone()
        };
        Ok(y.normalized())
    }
}

struct BlockStep {
    point: HermitianMat,
    value: f64,
    displacement: f64,
    degenerate: bool,
}

/// Previous iterate and tangent gradient of one block, for the step estimate.
#[derive(Default)]
struct StepMemory {
    last: Option<(ComplexMat, ComplexMat)>,
}

impl StepMemory {
    /// Barzilai-Borwein step `<s,s>/<s,y>` from the last two iterates, or
    /// `fallback` when the curvature estimate is not positive.
    fn trial_step(&self, x: &ComplexMat, dir: &ComplexMat, fallback: f64) -> f64 {
        let Some((x_prev, d_prev)) = &self.last else {
            return fallback;
        };
        let s = x - x_prev;
        let y = dir - d_prev;
        let ss = s.inner_re(&s);
        let sy = s.inner_re(&y);
        if sy > 0.0 && ss > 0.0 {
            (ss / sy).clamp(BB_MIN_STEP, BB_MAX_STEP)
        } else {
            fallback
        }
    }
}

const BB_MIN_STEP: f64 = 1e-10;
const BB_MAX_STEP: f64 = 1e6;

fn block_step(
    prob: &Problem<'_>,
    a: &HermitianMat,
    b: &HermitianMat,
    block: Block,
    value: f64,
    memory: &mut StepMemory,
) -> Result<BlockStep> {
    let cfg = prob.cfg;
    let x = match block {
        Block::A => a,
        Block::B => b,
    };
    let g = prob.gradient(a.as_mat(), b.as_mat(), block);
    // Tangent part on the unit sphere.
    let radial = g.as_mat().inner_re(x.as_mat());
    let mut dir = g.as_mat().clone();
    dir.axpy((-radial).into(), x.as_mat());

    let mut t = memory.trial_step(x.as_mat(), &dir, cfg.step0);
    memory.last = Some((x.as_mat().clone(), dir.clone()));

    let mut all_degenerate = true;
    for _ in 0..=cfg.max_backtracks {
        let mut trial = x.as_mat().clone();
        trial.axpy((-t).into(), &dir);
        if let Some(y) = prob.retract(&HermitianMat::symmetrize(&trial))? {
            all_degenerate = false;
            let (na, nb) = match block {
                Block::A => (&y, b),
                Block::B => (a, &y),
            };
            let new_value = prob.value(na.as_mat(), nb.as_mat());
            let disp = frob_norm(&(y.as_mat() - x.as_mat()));
            if disp > 0.0 && new_value <= value - cfg.armijo_c / t * disp * disp {
                return Ok(BlockStep {
                    point: y,
                    value: new_value,
                    displacement: disp,
                    degenerate: false,
                });
            }
        }
        t *= cfg.armijo_shrink;
    }
    Ok(BlockStep {
        point: x.clone(),
        value,
        displacement: 0.0,
        degenerate: all_degenerate,
    })
}

fn initial_point(rng: &mut LabRng, mode: Mode, n: usize) -> HermitianMat {
    if mode.is_psd() {
        rng.psd_unit(n).into_herm()
    } else {
        rng.hermitian_unit(n)
    }
}

fn min_eig(h: &HermitianMat) -> f64 {
    herm_eig(h).map(|s| s.min()).unwrap_or(f64::NAN)
}

/// Runs start number `index`. Starts draw from independent substreams of the
/// configured seed, so the result does not depend on scheduling.
pub fn run_start(cfg: &OptimConfig, index: usize, keep_history: bool) -> Result<StartOutcome> {
    cfg.validate()?;
    let prob = Problem {
        cfg,
        sign: cfg.mode.sign(),
    };
    let mut rng = LabRng::with_stream(cfg.seed, index as u64 + 1);
    let mut a = initial_point(&mut rng, cfg.mode, cfg.n);
    let mut b = initial_point(&mut rng, cfg.mode, cfg.n);
    let mut value = prob.value(a.as_mat(), b.as_mat());
    let mut history = Vec::new();
    let log = |a: &HermitianMat, b: &HermitianMat, value: f64, history: &mut Vec<IterLog>| {
        if keep_history {
            history.push(IterLog {
                objective: prob.sign * value,
                min_eig_a: min_eig(a),
                min_eig_b: min_eig(b),
                norm_a: a.norm(),
                norm_b: b.norm(),
            });
        }
    };
    log(&a, &b, value, &mut history);

    let mut mem_a = StepMemory::default();
    let mut mem_b = StepMemory::default();
    let mut iters = 0;
    let mut converged = false;
    let mut restarts = 0;
    while iters < cfg.max_iters {
        iters += 1;
        let sa = block_step(&prob, &a, &b, Block::A, value, &mut mem_a)?;
        let mut disp = sa.displacement;
        if sa.degenerate {
            a = initial_point(&mut rng, cfg.mode, cfg.n);
            mem_a = StepMemory::default();
            restarts += 1;
            value = prob.value(a.as_mat(), b.as_mat());
            disp = f64::INFINITY;
        } else {
            a = sa.point;
            value = sa.value;
        }

        let sb = block_step(&prob, &a, &b, Block::B, value, &mut mem_b)?;
        disp += sb.displacement;
        if sb.degenerate {
            b = initial_point(&mut rng, cfg.mode, cfg.n);
            mem_b = StepMemory::default();
            restarts += 1;
            value = prob.value(a.as_mat(), b.as_mat());
            disp = f64::INFINITY;
        } else {
            b = sb.point;
            value = sb.value;
        }
        log(&a, &b, value, &mut history);

        if disp < cfg.tol_grad {
            converged = true;
            break;
        }
    }

    let table = HurwitzTable::build(a.as_mat(), b.as_mat(), cfg.m)?;
    let el = el_residual_from_table(a.as_mat(), b.as_mat(), &table, cfg.m, cfg.k)?;
    Ok(StartOutcome {
        record: StartRecord {
            objective: table.trace(cfg.m, cfg.k)?.re,
            iters,
            el_norm_a: el.norm_a,
            el_norm_b: el.norm_b,
            converged,
            degenerate_restarts: restarts,
            failure: None,
        },
        a,
        b,
        history,
    })
}

/// Runs every start of `cfg` (in parallel on the current rayon pool) and
/// reduces them in start order.
pub fn optimize(cfg: &OptimConfig) -> Result<RunReport> {
    cfg.validate()?;
    let clock = Instant::now();
    let outcomes: Vec<Result<StartOutcome>> = (0..cfg.starts)
        .into_par_iter()
        .map(|i| run_start(cfg, i, false))
        .collect();

    let mut starts = Vec::with_capacity(cfg.starts);
    let mut best: Option<(usize, f64, HermitianMat, HermitianMat)> = None;
    for (i, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(o) => {
                let obj = o.record.objective;
                let better = match &best {
                    None => true,
                    Some((_, b, _, _)) => {
                        if cfg.mode.is_min() {
                            obj < *b
                        } else {
                            obj > *b
                        }
                    }
                };
                if better {
                    best = Some((i, obj, o.a, o.b));
                }
                starts.push(o.record);
            }
            Err(e) => starts.push(StartRecord {
                objective: f64::NAN,
                iters: 0,
                el_norm_a: f64::NAN,
                el_norm_b: f64::NAN,
                converged: false,
                degenerate_restarts: 0,
                failure: Some(e.to_string()),
            }),
        }
    }
    let (start, objective, a, b) =
        best.ok_or_else(|| LabError::InvalidArgument(format!("all {} starts failed", cfg.starts)))?;
    let diagnostics = diagnostics(&a, &b, cfg.m, cfg.k)?;
    Ok(RunReport {
        version: REPORT_VERSION.to_string(),
        config: cfg.clone(),
        starts,
        best: BestPoint {
            start,
            objective,
            a,
            b,
        },
        diagnostics,
        wall_time_s: clock.elapsed().as_secs_f64(),
    })
}

/// Minimization over unit-norm PSD pairs.
pub fn minimize(cfg: &OptimConfig) -> Result<RunReport> {
    if cfg.mode != Mode::MinPsd {
        return Err(LabError::InvalidArgument(format!(
            "minimize runs in min-psd mode, got {}",
            cfg.mode.as_str()
        )));
    }
    optimize(cfg)
}

/// Maximization over unit-norm Hermitian pairs.
pub fn maximize_hermitian(cfg: &OptimConfig) -> Result<RunReport> {
    if cfg.mode != Mode::MaxHerm {
        return Err(LabError::InvalidArgument(format!(
            "maximize_hermitian runs in max-herm mode, got {}",
            cfg.mode.as_str()
        )));
    }
    optimize(cfg)
}

/// Evaluates [`Diagnostics`] at `(A, B)`; the upward traces use a table of depth `m + 1`.
pub fn diagnostics(a: &HermitianMat, b: &HermitianMat, m: usize, k: usize) -> Result<Diagnostics> {
    a.check_same_dim(b)?;
    if k > m || m == 0 {
        return Err(LabError::InvalidArgument(format!(
            "need m >= k and m > 0, got ({m},{k})"
        )));
    }
    let table = HurwitzTable::build(a.as_mat(), b.as_mat(), m + 1)?;
    let s = table.s(m, k)?;
    let objective = s.trace().re;
    let spec_s = herm_eig(&HermitianMat::symmetrize(&s))?;
    let max_eig_s = spec_s.max();

    let spec_a = herm_eig(a)?;
    let spec_b = herm_eig(b)?;
    let mut mags: Vec<f64> = spec_a.eigenvalues.iter().map(|l| l.abs()).collect();
    mags.sort_by(|x, y| y.total_cmp(x));

    let (el_norm_a, el_norm_b) = if m > k && k > 0 {
        let el = el_residual_from_table(a.as_mat(), b.as_mat(), &table, m, k)?;
        (el.norm_a, el.norm_b)
    } else {
        (0.0, 0.0)
    };

    Ok(Diagnostics {
        objective,
        s_norm: frob_norm(&s),
        commutator_norm: frob_norm(&a.commutator(b)),
        spectrum_s: spec_s.eigenvalues.clone(),
        max_eig_s,
        negdef_defect: if objective < 0.0 {
            max_eig_s.max(0.0)
        } else {
            0.0
        },
        sing_margin_a: spec_a.min(),
        sing_margin_b: spec_b.min(),
        upward: (table.trace(m + 1, k)?.re, table.trace(m + 1, k + 1)?.re),
        bound_gap: binomial(m, k) as f64 - objective.abs(),
        rank1_defect_a: mags.get(1).copied().unwrap_or(0.0),
        sign_distance: frob_norm(&(a.as_mat() - b.as_mat()))
            .min(frob_norm(&(a.as_mat() + b.as_mat()))),
        el_norm_a,
        el_norm_b,
    })
}

/// Smallest eigenvalue of `PQ`, computed on the similar Hermitian matrix
/// `P^{1/2} Q P^{1/2}`.
pub fn product_eigen_check(p: &PsdUnit, q: &PsdUnit) -> Result<f64> {
    p.check_same_dim(q)?;
    let root = psd_sqrt(p)?;
    let sim = root.matmul(q.as_mat()).matmul(root.as_mat());
    Ok(herm_eig(&HermitianMat::symmetrize(&sim))?.min())
}

/// Which `k` to run for each `m` in a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KRule {
    /// Every `0 < k < m`.
    All,
    /// `k = m / 2`.
    Middle,
    /// A fixed `k`, skipped where it is not strictly between 0 and `m`.
    Fixed(usize),
}

impl KRule {
    pub fn ks(self, m: usize) -> Vec<usize> {
        match self {
            KRule::All => (1..m).collect(),
            KRule::Middle => {
                if m >= 2 {
                    vec![m / 2]
                } else {
                    vec![]
                }
            }
            KRule::Fixed(k) => {
                if k > 0 && k < m {
                    vec![k]
                } else {
                    vec![]
                }
            }
        }
    }
}

impl std::str::FromStr for KRule {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(KRule::All),
            "middle" => Ok(KRule::Middle),
            other => other
                .parse()
                .map(KRule::Fixed)
                .map_err(|_| LabError::InvalidArgument(format!("unknown k rule {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub m: usize,
    pub k: usize,
    pub best_objective: Option<f64>,
    pub converged_starts: usize,
    pub flagged: bool,
    /// `(Tr S_{m+1,k}, Tr S_{m+1,k+1})` at the flagged pair.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upward: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub version: String,
    pub template: OptimConfig,
    pub flag_tol: f64,
    pub cells: Vec<SweepCell>,
}

impl SweepReport {
    pub fn flagged(&self) -> impl Iterator<Item = &SweepCell> {
        self.cells.iter().filter(|c| c.flagged)
    }
}

/// Threshold below which a cell's best objective counts as a candidate counterexample.
pub const SWEEP_FLAG_TOL: f64 = 1e-8;

/// Minimizes every `(m, k)` cell of the grid.
pub fn sweep(
    ms: RangeInclusive<usize>,
    k_rule: KRule,
    template: &OptimConfig,
) -> Result<SweepReport> {
    sweep_with(ms, k_rule, template, SWEEP_FLAG_TOL, minimize)
}

/// [`sweep`] with an explicit per-cell runner. Any cell whose best objective
/// falls below `-flag_tol` is flagged and the upward traces are evaluated at
/// its best pair.
pub fn sweep_with<F>(
    ms: RangeInclusive<usize>,
    k_rule: KRule,
    template: &OptimConfig,
    flag_tol: f64,
    runner: F,
) -> Result<SweepReport>
where
    F: Fn(&OptimConfig) -> Result<RunReport>,
{
    if ms.is_empty() {
        return Err(LabError::InvalidArgument("empty m range".into()));
    }
    let mut cells = Vec::new();
    for m in ms {
        for k in k_rule.ks(m) {
            let cfg = OptimConfig {
                m,
                k,
                mode: Mode::MinPsd,
                ..template.clone()
            };
            let cell = match runner(&cfg) {
                Ok(report) => {
                    let best = report.best.objective;
                    let flagged = best < -flag_tol;
                    let upward = if flagged {
                        let t = HurwitzTable::build(
                            report.best.a.as_mat(),
                            report.best.b.as_mat(),
                            m + 1,
                        )?;
                        Some((t.trace(m + 1, k)?.re, t.trace(m + 1, k + 1)?.re))
                    } else {
                        None
                    };
                    SweepCell {
                        m,
                        k,
                        best_objective: Some(best),
                        converged_starts: report.starts.iter().filter(|s| s.converged).count(),
                        flagged,
                        upward,
                        failure: None,
                    }
                }
                Err(e) => SweepCell {
                    m,
                    k,
                    best_objective: None,
                    converged_starts: 0,
                    flagged: false,
                    upward: None,
                    failure: Some(e.to_string()),
                },
            };
            cells.push(cell);
        }
    }
    Ok(SweepReport {
        version: REPORT_VERSION.to_string(),
        template: template.clone(),
        flag_tol,
        cells,
    })
}

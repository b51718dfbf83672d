//! Deterministic invariant suite behind `matto-lab verify`.
//!
//! Every row draws its random instances from its own ChaCha stream keyed
//! by the run seed, so rows are independent of each other and of the
//! order they run in. A row reports the worst residual it saw against a
//! fixed threshold; module errors and panics are captured per row.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use mattolab::characterize::{
    build_from_b_with, certificate_image, is_matto_with, plain_to_tilde_certificate, residual_with,
    solve_certificate_with, tau_transfer, tau_transfer_symbol, tilde_certificate_convert,
    toeplitz_oracle, Flavor, SpaceOps,
};
use mattolab::config::choose_grid;
use mattolab::linalg::{c, eye, frob, subspace_gap, unit, unitary_deviation, CMat, CVec, ZERO};
use mattolab::matfun::{
    build_inner, fourier_coeffs, Grid, InnerFunction, MatFun, PotapovFactor, VecFun,
};
use mattolab::modelspace::{build_model_space, kernel, kernel_tilde, project, ModelSpace};
use mattolab::ops::{
    compressed_shift, crofoot, crofoot_symbol, defect_ops, matto, omega, tau_between,
    CrofootParams, OperatorMatrix,
};
use mattolab::random::{self, TestRng};
use mattolab::{Error, GlobalConfig};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Modulus bound for random zeros of inner functions.
pub const ZERO_RADIUS: f64 = 0.6;
/// Modulus bound for random evaluation points of kernels.
pub const POINT_RADIUS: f64 = 0.8;
/// Largest Crofoot parameter norm drawn by the suite.
pub const MAX_W_NORM: f64 = 0.7;

/// Sizes of the random instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub max_d: usize,
    pub max_degree: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_d: 3,
            max_degree: 6,
        }
    }
}

impl Limits {
    pub fn validate(&self) -> Result<(), String> {
        if !(1..=4).contains(&self.max_d) || !(1..=8).contains(&self.max_degree) {
            return Err(format!(
                "limits d={} degree={} outside desk scale (d <= 4, degree <= 8)",
                self.max_d, self.max_degree
            ));
        }
        Ok(())
    }
}

/// How many random instances each row draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub inners: usize,
    pub kernel_points: usize,
    pub symbols: usize,
    pub oracle_ops: usize,
    pub tau_ops: usize,
    pub crofoot_pairs: usize,
}

impl Default for Counts {
    fn default() -> Self {
        Self {
            inners: 12,
            kernel_points: 20,
            symbols: 12,
            oracle_ops: 40,
            tau_ops: 12,
            crofoot_pairs: 6,
        }
    }
}

impl Counts {
    /// Instance counts named by the acceptance criteria.
    pub fn acceptance() -> Self {
        Self {
            inners: 50,
            kernel_points: 100,
            symbols: 50,
            oracle_ops: 200,
            tau_ops: 40,
            crofoot_pairs: 20,
        }
    }
}

/// Tolerances forwarded to every construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub tol_rank: f64,
    pub tol_id: f64,
    pub tol_member: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let cfg = GlobalConfig::new(1, 256);
        Self {
            tol_rank: cfg.tol_rank,
            tol_id: cfg.tol_id,
            tol_member: cfg.tol_member,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Row {
    pub name: String,
    pub max_residual: f64,
    pub threshold: f64,
    pub pass: bool,
    pub cases: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Worst residual over the cases a row checked.
#[derive(Debug, Clone, Copy, Default)]
pub struct Measure {
    pub max_residual: f64,
    pub cases: usize,
}

impl Measure {
    fn add(&mut self, residual: f64) {
        self.cases += 1;
        if residual.is_nan() || residual > self.max_residual {
            self.max_residual = residual;
        }
    }
}

#[derive(Debug)]
pub struct RowError(pub String);

impl From<Error> for RowError {
    fn from(e: Error) -> Self {
        RowError(e.to_string())
    }
}

type RowResult = Result<Measure, RowError>;

/// Shared state of one suite run.
pub struct Ctx {
    pub seed: u64,
    pub limits: Limits,
    pub counts: Counts,
    pub tol: Tolerances,
    /// Fixed grid size instead of the automatic policy.
    pub grid: Option<usize>,
    grids: RefCell<BTreeMap<usize, Arc<Grid>>>,
}

impl Ctx {
    pub fn new(
        seed: u64,
        limits: Limits,
        counts: Counts,
        tol: Tolerances,
        grid: Option<usize>,
    ) -> Self {
        Self {
            seed,
            limits,
            counts,
            tol,
            grid,
            grids: RefCell::new(BTreeMap::new()),
        }
    }

    fn grid(&self, q: usize) -> Arc<Grid> {
        self.grids
            .borrow_mut()
            .entry(q)
            .or_insert_with(|| Grid::new(q))
            .clone()
    }

    fn rng(&self, row: u64) -> TestRng {
        random::substream(self.seed, row)
    }

    fn cfg_with_q(&self, d: usize, q: usize) -> GlobalConfig {
        let mut cfg = GlobalConfig::new(d, q).with_seed(self.seed);
        cfg.tol_rank = self.tol.tol_rank;
        cfg.tol_id = self.tol.tol_id;
        cfg.tol_member = self.tol.tol_member;
        cfg
    }

    fn cfg(&self, d: usize, degree: usize, band: usize) -> GlobalConfig {
        let radius = ZERO_RADIUS.max(POINT_RADIUS);
        let q = self
            .grid
            .unwrap_or_else(|| choose_grid(degree, band, radius, self.tol.tol_id));
        self.cfg_with_q(d, q)
    }

    fn pick_d(&self, rng: &mut TestRng) -> usize {
        rng.random_range(1..=self.limits.max_d.min(self.limits.max_degree))
    }

    fn pick_degree(&self, rng: &mut TestRng, lo: usize) -> usize {
        rng.random_range(lo.min(self.limits.max_degree)..=self.limits.max_degree)
    }

    fn inner(
        &self,
        rng: &mut TestRng,
        d: usize,
        degree: usize,
        cfg: &GlobalConfig,
    ) -> Result<InnerFunction, RowError> {
        Ok(random::inner(
            rng,
            d,
            degree,
            ZERO_RADIUS,
            &self.grid(cfg.q),
            cfg,
        )?)
    }

    fn space(
        &self,
        rng: &mut TestRng,
        d: usize,
        degree: usize,
        cfg: &GlobalConfig,
    ) -> Result<Arc<ModelSpace>, RowError> {
        let theta = self.inner(rng, d, degree, cfg)?;
        Ok(Arc::new(build_model_space(&theta, cfg)?))
    }

    /// Two spaces over a common `C^d` and grid. With `nontrivial` both
    /// degrees exceed `d`, so the spaces admit operators outside
    /// `MT(Θ₁, Θ₂)`.
    fn pair(
        &self,
        rng: &mut TestRng,
        nontrivial: bool,
        band: usize,
    ) -> Result<(GlobalConfig, Arc<ModelSpace>, Arc<ModelSpace>), RowError> {
        let max = self.limits.max_degree;
        let (d, lo) = if nontrivial && max > 1 {
            let d = rng.random_range(1..=self.limits.max_d.min(max - 1));
            (d, d + 1)
        } else {
            let d = self.pick_d(rng);
            (d, d)
        };
        let n1 = rng.random_range(lo..=max);
        let n2 = rng.random_range(lo..=max);
        let cfg = self.cfg(d, n1.max(n2), band);
        let m1 = self.space(rng, d, n1, &cfg)?;
        let m2 = self.space(rng, d, n2, &cfg)?;
        Ok((cfg, m1, m2))
    }
}

pub type RowFn = fn(&Ctx) -> RowResult;

/// `(name, threshold, check)` for every row, in report order.
pub const ROWS: &[(&str, f64, RowFn)] = &[
    ("inner_unitary_on_grid", 1e-10, row_inner_unitary),
    ("purity_detection", 0.0, row_purity),
    ("tilde_involution", 1e-9, row_tilde),
    ("fourier_roundtrip", 1e-12, row_fourier),
    ("parseval", 1e-12, row_parseval),
    ("modelspace_dimension", 0.0, row_dimension),
    ("modelspace_orthonormal", 1e-9, row_orthonormal),
    ("reproducing_kernel", 1e-9, row_reproducing),
    ("projection_and_kernel_at_zero", 1e-9, row_projection),
    ("tilde_kernel", 1e-9, row_tilde_kernel),
    ("tilde_defect_via_tau", 1e-9, row_tilde_defect_space),
    ("defect_identities", 1e-9, row_defect),
    ("piecewise_shift_formulas", 1e-9, row_piecewise),
    ("tilde_defect_through_tau", 1e-9, row_dtilde_tau),
    ("matto_adjoint_law", 1e-9, row_adjoint_law),
    ("tau_unitary_involution", 1e-10, row_tau_unitary),
    ("tau_conjugates_shift", 1e-10, row_sz),
    ("tau_conjugates_defect", 1e-10, row_ddd),
    ("shift_residual_lemma", 1e-9, row_lemma),
    ("certificate_forward", 1e-8, row_forward),
    ("certificate_matches_symbols", 1e-8, row_symmm),
    ("certificate_converse", 1e-8, row_converse),
    ("oracle_agreement", 0.0, row_oracle),
    ("tau_membership_equivalence", 0.0, row_tau_equivalence),
    ("tau_symbol_law", 1e-8, row_tau_symbol),
    ("crofoot_unitary_pure", 1e-9, row_crofoot_unitary),
    ("crofoot_symbol_law", 1e-8, row_crofoot_symbol),
    (
        "crofoot_membership_equivalence",
        0.0,
        row_crofoot_equivalence,
    ),
    ("crofoot_zero_parameter", 1e-12, row_crofoot_zero),
    ("flavor_equivalence", 0.0, row_flavor),
    ("certificate_conversion_roundtrip", 1e-9, row_conversion),
    ("adjoint_closure", 0.0, row_adjoint_closure),
];

pub fn run_row(ctx: &Ctx, name: &str, threshold: f64, f: RowFn) -> Row {
    let outcome = catch_unwind(AssertUnwindSafe(|| f(ctx)));
    let (measure, error) = match outcome {
        Ok(Ok(m)) => (m, None),
        Ok(Err(RowError(e))) => (Measure::default(), Some(e)),
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            (Measure::default(), Some(format!("panic: {msg}")))
        }
    };
    let pass = error.is_none() && measure.max_residual <= threshold && measure.cases > 0;
    Row {
        name: name.to_string(),
        max_residual: measure.max_residual,
        threshold,
        pass,
        cases: measure.cases,
        error,
    }
}

/// Runs every row; returns them with the elapsed wall time in milliseconds.
pub fn run_suite(ctx: &Ctx) -> (Vec<Row>, u128) {
    let start = Instant::now();
    let rows = ROWS
        .iter()
        .map(|&(name, threshold, f)| run_row(ctx, name, threshold, f))
        .collect();
    (rows, start.elapsed().as_millis())
}

pub fn find_row(name: &str) -> Option<(&'static str, f64, RowFn)> {
    ROWS.iter().copied().find(|r| r.0 == name)
}

// ---------------------------------------------------------------- helpers

fn fun_gap(f: &VecFun, g: &VecFun) -> f64 {
    (f - g).norm()
}

fn constant(grid: &Arc<Grid>, x: &CVec) -> VecFun {
    VecFun::constant(grid, x)
}

/// Laurent polynomial symbol with coefficients on `lo..=hi`.
fn symbol(rng: &mut TestRng, cfg: &GlobalConfig, grid: &Arc<Grid>, lo: i64, hi: i64) -> MatFun {
    random::laurent(rng, grid, cfg.d, lo, hi)
}

fn relative(x: f64, scale: f64) -> f64 {
    x / scale.max(1.0)
}

/// A member of `MT(Θ₁, Θ₂)`, or one perturbed away from it.
fn test_operator(
    rng: &mut TestRng,
    m1: &Arc<ModelSpace>,
    m2: &Arc<ModelSpace>,
    cfg: &GlobalConfig,
    member: bool,
) -> Result<OperatorMatrix, RowError> {
    let phi = symbol(rng, cfg, m1.grid(), -2, 2);
    let a = matto(&phi, m1, m2, cfg)?;
    if member {
        return Ok(a);
    }
    let e = random::ginibre(rng, m2.dim(), m1.dim());
    let scale = 1e-2 * frob(a.mat()).max(1.0) / frob(&e);
    Ok(a.with_mat(a.mat() + e * c(scale, 0.0), "perturbed"))
}

fn decide(
    a: &OperatorMatrix,
    ops1: &SpaceOps,
    ops2: &SpaceOps,
    flavor: Flavor,
    cfg: &GlobalConfig,
) -> Result<bool, RowError> {
    Ok(is_matto_with(a, ops1, ops2, flavor, cfg)?.is_member)
}

// ------------------------------------------------------------ matfun rows

fn row_inner_unitary(ctx: &Ctx) -> RowResult {
    let mut rng = ctx.rng(1);
    let mut m = Measure::default();
    for _ in 0..ctx.counts.inners {
        let d = ctx.pick_d(&mut rng);
        let degree = ctx.pick_degree(&mut rng, d);
        let cfg = ctx.cfg(d, degree, 0);
        let theta = ctx.inner(&mut rng, d, degree, &cfg)?;
        let worst = theta
            .fun()
            .samples()
            .iter()
            .map(|t| frob(&(t.adjoint() * t - eye(d))).max(frob(&(t * t.adjoint() - eye(d)))))
            .fold(0.0, f64::max);
        m.add(worst);
    }
    Ok(m)
}

/// Non-pure products: every factor projection annihilates a fixed unit
/// vector `v`, so `Θ(0)` is isometric on `v`. For `d = 1` the only
/// non-pure case is a unimodular constant.
fn row_purity(ctx: &Ctx) -> RowResult {
    let mut rng = ctx.rng(2);
    let mut m = Measure::default();
    for i in 0..5 {
        let d = [1usize, 2, 2, 3, 3][i].min(ctx.limits.max_d);
        let cfg = ctx.cfg(d, ctx.limits.max_degree, 0);
        let grid = ctx.grid(cfg.q);
        let u0 = random::unitary(&mut rng, d);
        let mut factors = Vec::new();
        if d > 1 {
            let v = random::gaussian_vec(&mut rng, d).normalize();
            let comp = eye(d) - &v * v.adjoint();
            let count = rng.random_range(1..=2usize.min(ctx.limits.max_degree));
            for _ in 0..count {
                // rank-one projection inside v⊥
                let x = (&comp * random::gaussian_vec(&mut rng, d)).normalize();
                let p = &x * x.adjoint();
                factors.push(PotapovFactor::new(
                    random::disk_point(&mut rng, ZERO_RADIUS),
                    &p,
                )?);
            }
        }
        let flagged = matches!(
            build_inner(&u0, factors, &grid, &cfg),
            Err(Error::NotPure { .. })
        );
        m.add(if flagged { 0.0 } else { 1.0 });
    }
    Ok(m)
}

fn row_tilde(ctx: &Ctx) -> RowResult {
    let mut rng = ctx.rng(3);
    let mut m = Measure::default();
    for _ in 0..ctx.counts.inners.min(20) {
        let d = ctx.pick_d(&mut rng);
        let degree = ctx.pick_degree(&mut rng, d);
        let cfg = ctx.cfg(d, degree, 0);
        let theta = ctx.inner(&mut rng, d, degree, &cfg)?;
        let tilde = theta.tilde(&cfg)?;
        let grid = theta.grid();
        let mirrored = (0..grid.q())
            .map(|k| frob(&(tilde.fun().sample(k) - theta.fun().sample(grid.mirror(k)).adjoint())))
            .fold(0.0, f64::max);
        let back = tilde.tilde(&cfg)?;
        let twice = (0..grid.q())
            .map(|k| frob(&(back.fun().sample(k) - theta.fun().sample(k))))
            .fold(0.0, f64::max);
        let degree_gap = (tilde.degree() as f64 - theta.degree() as f64).abs();
        m.add(
            mirrored
                .max(twice)
                .max(tilde.inner_deviation())
                .max(degree_gap),
        );
    }
    Ok(m)
}

fn row_fourier(ctx: &Ctx) -> RowResult {
    let mut rng = ctx.rng(4);
    let mut m = Measure::default();
    for _ in 0..ctx.counts.symbols.min(20) {
        let d = ctx.pick_d(&mut rng);
        let cfg = ctx.cfg(d, 0, 8);
        let grid = ctx.grid(cfg.q);
        let lo = -rng.random_range(0..4i64);
        let hi = rng.random_range(0..5i64);
        let f = symbol(&mut rng, &cfg, &grid, lo, hi);
        let back = fourier_coeffs(&grid, f.samples(), lo - 2, hi + 2)?;
        let coeff_gap = back
            .iter()
            .map(|(&n, b)| frob(&(b - f.coeff(n))))
            .fold(0.0, f64::max);
        let k = rng.random_range(0..grid.q());
        let direct = frob(&(f.eval_on_circle(grid.node(k)) - f.sample(k)));
        let g = symbol(&mut rng, &cfg, &grid, lo, hi);
        let adj = (0..grid.q())
            .map(|k| {
                let fg = f.mul(&g).adjoint();
                frob(&(fg.sample(k) - g.adjoint().sample(k) * f.adjoint().sample(k)))
            })
            .take(8)
            .fold(0.0, f64::max);
        let invol = (0..grid.q())
            .map(|k| frob(&(f.adjoint().adjoint().sample(k) - f.sample(k))))
            .take(8)
            .fold(0.0, f64::max);
        m.add(coeff_gap.max(direct).max(adj).max(invol));
    }
    Ok(m)
}

fn row_parseval(ctx: &Ctx) -> RowResult {
    let mut rng = ctx.rng(5);
    let mut m = Measure::default();
    for _ in 0..ctx.counts.symbols.min(20) {
        let d = ctx.pick_d(&mut rng);
        let cfg = ctx.cfg(d, 0, 8);
        let grid = ctx.grid(cfg.q);
        let terms: Vec<(i64, CVec)> = (-3..=5)
            .map(|n| (n, random::gaussian_vec(&mut rng, d)))
            .collect();
        let f = VecFun::from_terms(&grid, d, &terms);
        let energy: f64 = terms.iter().map(|(_, x)| x.norm_squared()).sum();
        m.add(f.parseval_gap().max((f.norm().powi(2) - energy).abs()) / energy.max(1.0));
    }
    Ok(m)
}

// -------------------------------------------------------- modelspace rows

fn row_dimension(ctx: &Ctx) -> RowResult {
    let mut rng = ctx.rng(6);
    let mut m = Measure::default();
    for _ in 0..ctx.counts.inners {
        let d = ctx.pick_d(&mut rng);
        let degree = ctx.pick_degree(&mut rng, d);
        let cfg = ctx.cfg(d, degree, 0);
        let theta = ctx.inner(&mut rng, d, degree, &cfg)?;
        let ranks: usize = theta.factors().iter().map(|f| f.rank()).sum();
        let ok = match build_model_space(&theta, &cfg) {
            Ok(space) => space.dim() == ranks,
            Err(Error::RankMismatch { .. }) => false,
            Err(e) => return Err(e.into()),
        };
        m.add(if ok { 0.0 } else { 1.0 });
    }
    Ok(m)
}

fn row_orthonormal(ctx: &Ctx) -> RowResult {
    let mut rng = ctx.rng(7);
    let mut m = Measure::default();
    for _ in 0..ctx.counts.inners.min(20) {
        let d = ctx.pick_d(&mut rng);
        let degree = ctx.pick_degree(&mut rng, d);
        let cfg = ctx.cfg(d, degree, 0);
        let space = ctx.space(&mut rng, d, degree, &cfg)?;
        let theta = space.theta();
        let mut worst = space.gram_residual();
        for e in space.basis() {
            worst = worst.max(fun_gap(&project(theta, e, &cfg)?, e));
            for k in 0..=space.dim() as i64 {
                for j in 0..d {
                    let t = theta
                        .fun()
                        .apply(&VecFun::monomial(space.grid(), k, &unit(d, j)));
                    worst = worst.max(e.inner(&t).norm());
                }
            }
        }
        m.add(worst);
    }
    Ok(m)
}

fn row_reproducing(ctx: &Ctx) -> RowResult {
    let mut rng = ctx.rng(8);
    let mut m = Measure::default();
    for _ in 0..ctx.counts.inners {
        let d = ctx.pick_d(&mut rng);
        let degree = ctx.pick_degree(&mut rng, d);
        let cfg = ctx.cfg(d, degree, 0);
        let space = ctx.space(&mut rng, d, degree, &cfg)?;
        for _ in 0..ctx.counts.kernel_points {
            let lambda = random::disk_point(&mut rng, POINT_RADIUS);
            let x = random::gaussian_vec(&mut rng, d);
            let k = kernel(space.theta(), lambda, &x)?;
            let mut worst: f64 = 0.0;
            for f in space.basis() {
                let lhs = f.inner(&k);
                let rhs = x.dotc(&f.eval(lambda));
                worst = worst.max((lhs - rhs).norm() / f.norm().max(1.0));
            }
            m.add(worst);
        }
    }
    Ok(m)
}

fn row_projection(ctx: &Ctx) -> RowResult {
    let mut rng = ctx.rng(9);
    let mut m = Measure::default();
    for _ in 0..ctx.counts.inners.min(12) {
        let d = ctx.pick_d(&mut rng);
        let degree = ctx.pick_degree(&mut rng, d);
        let cfg = ctx.cfg(d, degree, 8);
        let space = ctx.space(&mut rng, d, degree, &cfg)?;
        let theta = space.theta();
        let grid = space.grid();
        let terms = |rng: &mut TestRng| -> Vec<(i64, CVec)> {
            (-2..=6)
                .map(|n| (n, random::gaussian_vec(rng, d)))
                .collect()
        };
        let f = VecFun::from_terms(grid, d, &terms(&mut rng));
        let g = VecFun::from_terms(grid, d, &terms(&mut rng));
        let pf = project(theta, &f, &cfg)?;
        let pg = project(theta, &g, &cfg)?;
        let selfadj = (pf.inner(&g) - f.inner(&pg)).norm();
        let idem = fun_gap(&project(theta, &pf, &cfg)?, &pf);
        let x = random::gaussian_vec(&mut rng, d);
        let k0 = kernel(theta, ZERO, &x)?;
        let via_projection = project(theta, &constant(grid, &x), &cfg)?;
        m.add(selfadj.max(idem).max(fun_gap(&k0, &via_projection)));
    }
    Ok(m)
}

fn row_tilde_kernel(ctx: &Ctx) -> RowResult {
    let mut rng = ctx.rng(10);
    let mut m = Measure::default();
    for _ in 0..ctx.counts.inners.min(10) {
        let d = ctx.pick_d(&mut rng);
        let degree = ctx.pick_degree(&mut rng, d);
        let cfg = ctx.cfg(d, degree, 0);
        let space = ctx.space(&mut rng, d, degree, &cfg)?;
        let theta = space.theta();
        let grid = space.grid();
        let tau = mattolab::ops::tau(&space, &cfg)?;
        let tilde = tau.codomain().clone();
        let x = random::gaussian_vec(&mut rng, d);
        let kt0 = kernel_tilde(theta, ZERO, &x)?;
        let formula = (&theta.fun().apply(&constant(grid, &x))
            - &constant(grid, &(theta.theta0() * &x)))
            .shift(-1);
        let mut worst = fun_gap(&kt0, &formula);
        for _ in 0..ctx.counts.kernel_points.min(20) {
            let lambda = random::disk_point(&mut rng, POINT_RADIUS);
            let x = random::gaussian_vec(&mut rng, d);
            let k = kernel_tilde(theta, lambda, &x)?;
            let (_, out) = space.coords_with_residual(&k);
            worst = worst.max(out / k.norm().max(1.0));
            for (i, f) in space.basis().iter().enumerate() {
                let tf = tilde.embed(&tau.mat().column(i).into_owned());
                let rhs = x.dotc(&tf.eval(lambda.conj()));
                worst = worst.max((f.inner(&k) - rhs).norm());
            }
        }
        m.add(worst);
    }
    Ok(m)
}

fn row_tilde_defect_space(ctx: &Ctx) -> RowResult {
    let mut rng = ctx.rng(11);
    let mut m = Measure::default();
    for _ in 0..ctx.counts.inners.min(12) {
        let d = ctx.pick_d(&mut rng);
        let degree = ctx.pick_degree(&mut rng, d);
        let cfg = ctx.cfg(d, degree, 0);
        let space = ctx.space(&mut rng, d, degree, &cfg)?;
        let tilde = Arc::new(build_model_space(&space.theta().tilde(&cfg)?, &cfg)?);
        // τ_Θ̃ : K_Θ̃ → K_Θ
        let back = tau_between(&tilde, &space, &cfg)?;
        let image = back.mat() * tilde.defect().frame();
        m.add(subspace_gap(&image, space.defect_tilde().frame()));
    }
    Ok(m)
}

// --------------------------------------------------------------- ops rows

fn row_defect(ctx: &Ctx) -> RowResult {
    let mut rng = ctx.rng(12);
    let mut m = Measure::default();
    for _ in 0..ctx.counts.inners.min(20) {
        let d = ctx.pick_d(&mut rng);
        let degree = ctx.pick_degree(&mut rng, d);
        let cfg = ctx.cfg(d, degree, 0);
        let space = ctx.space(&mut rng, d, degree, &cfg)?;
        let (dp, dt) = defect_ops(&space, &cfg)?;
        let (dp, dt) = (dp.mat(), dt.mat());
        let t0 = space.theta().theta0();
        let id = eye(d);
        let at_zero = space.eval_matrix(ZERO);
        let g = space.defect().generator_coords();
        let gt = space.defect_tilde().generator_coords();
        let frame = space.defect().frame();
        let om = omega(&space, &cfg)?;
        let residuals = [
            frob(&(dp - g * &at_zero)),
            frob(&(&om * frame.adjoint() * dp - &at_zero)),
            frob(&(dp * space.defect().complement_projector())),
            frob(&(dp * g - g * (&id - t0 * t0.adjoint()))),
            frob(&(dt * space.defect_tilde().complement_projector())),
            frob(&(dt * gt - gt * (&id - t0.adjoint() * t0))),
        ];
        m.add(residuals.into_iter().fold(0.0, f64::max));
    }
    Ok(m)
}

fn row_piecewise(ctx: &Ctx) -> RowResult {
    let mut rng = ctx.rng(13);
    let mut m = Measure::default();
    for _ in 0..ctx.counts.inners.min(12) {
        let d = ctx.pick_d(&mut rng);
        let degree = ctx.pick_degree(&mut rng, d);
        let cfg = ctx.cfg(d, degree, 0);
        let space = ctx.space(&mut rng, d, degree, &cfg)?;
        let grid = space.grid();
        let theta = space.theta();
        let t0 = theta.theta0();
        let (s, s_adj) = compressed_shift(&space, &cfg)?;
        let apply = |op: &CMat, f: &CVec| space.embed(&(op * f));
        let x = random::gaussian_vec(&mut rng, d);
        let c0 = random::gaussian_vec(&mut rng, space.dim());

        // f ⊥ 𝒟_Θ: S*f = z̄f
        let f = space.embed(&(space.defect().complement_projector() * &c0));
        let r1 = fun_gap(&apply(s_adj.mat(), &space.coords(&f, &cfg)?), &f.shift(-1));
        // f = k₀x: S*f = −z̄(Θ − Θ(0))Θ(0)*x
        let k0 = kernel(theta, ZERO, &x)?;
        let y = t0.adjoint() * &x;
        let rhs =
            -&(&theta.fun().apply(&constant(grid, &y)) - &constant(grid, &(t0 * &y))).shift(-1);
        let r2 = fun_gap(&apply(s_adj.mat(), &space.coords(&k0, &cfg)?), &rhs);
        // f ⊥ 𝒟̃_Θ: Sf = zf
        let f = space.embed(&(space.defect_tilde().complement_projector() * &c0));
        let r3 = fun_gap(&apply(s.mat(), &space.coords(&f, &cfg)?), &f.shift(1));
        // f = k̃₀x: Sf = −(I − ΘΘ(0)*)Θ(0)x
        let kt0 = kernel_tilde(theta, ZERO, &x)?;
        let y = t0 * &x;
        let rhs =
            -&(&constant(grid, &y) - &theta.fun().apply(&constant(grid, &(t0.adjoint() * &y))));
        let r4 = fun_gap(&apply(s.mat(), &space.coords(&kt0, &cfg)?), &rhs);
        m.add(r1.max(r2).max(r3).max(r4));
    }
    Ok(m)
}

fn row_dtilde_tau(ctx: &Ctx) -> RowResult {
    let mut rng = ctx.rng(14);
    let mut m = Measure::default();
    for _ in 0..ctx.counts.inners.min(12) {
        let d = ctx.pick_d(&mut rng);
        let degree = ctx.pick_degree(&mut rng, d);
        let cfg = ctx.cfg(d, degree, 0);
        let space = ctx.space(&mut rng, d, degree, &cfg)?;
        let tau = mattolab::ops::tau(&space, &cfg)?;
        let (_, dt) = defect_ops(&space, &cfg)?;
        // D̃ f = k̃₀ (τ f)(0)
        let expected =
            space.defect_tilde().generator_coords() * tau.codomain().eval_matrix(ZERO) * tau.mat();
        m.add(frob(&(dt.mat() - expected)));
    }
    Ok(m)
}

fn row_adjoint_law(ctx: &Ctx) -> RowResult {
    let mut rng = ctx.rng(15);
    let mut m = Measure::default();
    for _ in 0..ctx.counts.symbols.min(20) {
        let (cfg, m1, m2) = ctx.pair(&mut rng, false, 4)?;
        let phi = symbol(&mut rng, &cfg, m1.grid(), -2, 2);
        let a = matto(&phi, &m1, &m2, &cfg)?;
        let b = matto(&phi.adjoint(), &m2, &m1, &cfg)?;
        m.add(frob(&(a.mat().adjoint() - b.mat())));
    }
    Ok(m)
}

fn row_tau_unitary(ctx: &Ctx) -> RowResult {
    let mut rng = ctx.rng(16);
    let mut m = Measure::default();
    for _ in 0..ctx.counts.inners.min(12) {
        let d = ctx.pick_d(&mut rng);
        let degree = ctx.pick_degree(&mut rng, d);
        let cfg = ctx.cfg(d, degree, 0);
        let space = ctx.space(&mut rng, d, degree, &cfg)?;
        let tau = mattolab::ops::tau(&space, &cfg)?;
        let back = tau_between(tau.codomain(), &space, &cfg)?;
        let n = space.dim();
        m.add(unitary_deviation(tau.mat()).max(frob(&(back.mat() * tau.mat() - eye(n)))));
    }
    Ok(m)
}

fn row_sz(ctx: &Ctx) -> RowResult {
    let mut rng = ctx.rng(17);
    let mut m = Measure::default();
    for _ in 0..ctx.counts.inners.min(12) {
        let d = ctx.pick_d(&mut rng);
        let degree = ctx.pick_degree(&mut rng, d);
        let cfg = ctx.cfg(d, degree, 0);
        let space = ctx.space(&mut rng, d, degree, &cfg)?;
        let tau = mattolab::ops::tau(&space, &cfg)?;
        let (s, _) = compressed_shift(&space, &cfg)?;
        let (_, st_adj) = compressed_shift(tau.codomain(), &cfg)?;
        let t = tau.mat();
        m.add(frob(&(t * s.mat() * t.adjoint() - st_adj.mat())));
    }
    Ok(m)
}

fn row_ddd(ctx: &Ctx) -> RowResult {
    let mut rng = ctx.rng(18);
    let mut m = Measure::default();
    for _ in 0..ctx.counts.inners.min(12) {
        let d = ctx.pick_d(&mut rng);
        let degree = ctx.pick_degree(&mut rng, d);
        let cfg = ctx.cfg(d, degree, 0);
        let space = ctx.space(&mut rng, d, degree, &cfg)?;
        let tilde = Arc::new(build_model_space(&space.theta().tilde(&cfg)?, &cfg)?);
        let back = tau_between(&tilde, &space, &cfg)?;
        let (_, dt) = defect_ops(&space, &cfg)?;
        let (d_of_tilde, _) = defect_ops(&tilde, &cfg)?;
        let t = back.mat();
        m.add(frob(&(dt.mat() - t * d_of_tilde.mat() * t.adjoint())));
    }
    Ok(m)
}

// ------------------------------------------------------ characterize rows

/// `A_Ψ − S₂A_ΨS₁* = P₂M_Ψ(I − SS*)` columnwise, with `(I − SS*)f = f(0)`.
fn row_lemma(ctx: &Ctx) -> RowResult {
    let mut rng = ctx.rng(19);
    let mut m = Measure::default();
    let mut spaces = None;
    for i in 0..ctx.counts.symbols {
        if i % 10 == 0 {
            let (cfg, m1, m2) = ctx.pair(&mut rng, false, 4)?;
            let ops1 = SpaceOps::new(&m1, &cfg)?;
            let ops2 = SpaceOps::new(&m2, &cfg)?;
            spaces = Some((cfg, ops1, ops2));
        }
        let (cfg, ops1, ops2) = spaces.as_ref().expect("spaces drawn on the first case");
        let (m1, m2) = (&ops1.space, &ops2.space);
        let band = rng.random_range(0..=4i64);
        let psi = symbol(&mut rng, cfg, m1.grid(), 0, band);
        let a = matto(&psi, m1, m2, cfg)?;
        let lhs = residual_with(a.mat(), ops1, ops2, Flavor::Plain)?;
        let mut rhs = CMat::zeros(m2.dim(), m1.dim());
        for (i, f) in m1.basis().iter().enumerate() {
            let value = f.eval(ZERO);
            rhs.set_column(
                i,
                &m2.project_coords(&psi.apply(&constant(m1.grid(), &value)), cfg)?,
            );
        }
        m.add(frob(&(lhs - rhs)));
    }
    Ok(m)
}

fn row_forward(ctx: &Ctx) -> RowResult {
    let mut rng = ctx.rng(20);
    let mut m = Measure::default();
    for _ in 0..ctx.counts.symbols.min(20) {
        let (cfg, m1, m2) = ctx.pair(&mut rng, false, 6)?;
        let ops1 = SpaceOps::new(&m1, &cfg)?;
        let ops2 = SpaceOps::new(&m2, &cfg)?;
        let psi = symbol(&mut rng, &cfg, m1.grid(), 0, 3);
        let xi = symbol(&mut rng, &cfg, m1.grid(), 0, 3);
        let a = matto(&(&psi + &xi.adjoint()), &m1, &m2, &cfg)?;
        let report = is_matto_with(&a, &ops1, &ops2, Flavor::Plain, &cfg)?;
        if !report.is_member {
            m.add(report.lsq_residual.max(1.0));
            continue;
        }
        let rt = report.roundtrip_error.unwrap_or(f64::INFINITY);
        m.add(report.lsq_residual.max(report.compression_residual).max(rt));
    }
    Ok(m)
}

/// The solver's certificate against `B₁ = P₂M_ΨΩ₁`, `B₂ = P₁M_ΞΩ₂`.
///
/// Certificates are unique only up to `(B₁, B₂) ↦ (B₁ + D₂Z, B₂ − D₁Z*)`,
/// so the comparison is on `Q₂B₁`, `Q₁B₂`, and on the full right-hand
/// side, which the exact pair must reproduce.
fn row_symmm(ctx: &Ctx) -> RowResult {
    let mut rng = ctx.rng(21);
    let mut m = Measure::default();
    for _ in 0..ctx.counts.symbols.min(20) {
        let (cfg, m1, m2) = ctx.pair(&mut rng, false, 6)?;
        let ops1 = SpaceOps::new(&m1, &cfg)?;
        let ops2 = SpaceOps::new(&m2, &cfg)?;
        let psi = symbol(&mut rng, &cfg, m1.grid(), 0, 3);
        let xi = symbol(&mut rng, &cfg, m1.grid(), 0, 3);
        let a = matto(&(&psi + &xi.adjoint()), &m1, &m2, &cfg)?;
        let exact = |sym: &MatFun, src: &SpaceOps, dst: &SpaceOps| -> Result<CMat, RowError> {
            let d = src.space.d();
            let mut cols = CMat::zeros(dst.space.dim(), d);
            for j in 0..d {
                let f = sym.apply(&constant(src.space.grid(), &unit(d, j)));
                cols.set_column(j, &dst.space.project_coords(&f, &cfg)?);
            }
            Ok(cols * &src.omega)
        };
        let b1 = exact(&psi, &ops1, &ops2)?;
        let b2 = exact(&xi, &ops2, &ops1)?;
        let r = residual_with(a.mat(), &ops1, &ops2, Flavor::Plain)?;
        let scale = frob(a.mat());
        let theorem = frob(&(&r - certificate_image(&b1, &b2, &ops1, &ops2, Flavor::Plain)));
        let cert = solve_certificate_with(a.mat(), &ops1, &ops2, Flavor::Plain, &cfg)?;
        let q1 = ops1.space.defect().complement_projector();
        let q2 = ops2.space.defect().complement_projector();
        let gap1 = frob(&(&q2 * (&cert.b1 - &b1)));
        let gap2 = frob(&(&q1 * (&cert.b2 - &b2)));
        m.add(relative(theorem.max(gap1).max(gap2), scale));
    }
    Ok(m)
}

fn row_converse(ctx: &Ctx) -> RowResult {
    let mut rng = ctx.rng(22);
    let mut m = Measure::default();
    for _ in 0..ctx.counts.symbols.min(20) {
        let (cfg, m1, m2) = ctx.pair(&mut rng, false, 0)?;
        let ops1 = SpaceOps::new(&m1, &cfg)?;
        let ops2 = SpaceOps::new(&m2, &cfg)?;
        let d = cfg.d;
        let b1 = random::ginibre(&mut rng, m2.dim(), d);
        let b2 = random::ginibre(&mut rng, m1.dim(), d);
        let a = build_from_b_with(&b1, &b2, &ops1, &ops2, &cfg)?;
        let report = is_matto_with(&a, &ops1, &ops2, Flavor::Plain, &cfg)?;
        if !report.is_member {
            m.add(report.lsq_residual.max(1.0));
            continue;
        }
        m.add(
            report
                .lsq_residual
                .max(report.roundtrip_error.unwrap_or(f64::INFINITY)),
        );
    }
    Ok(m)
}

/// Block-Toeplitz oracle against `is_matto` on `zᴺI_d` spaces. Half of
/// the operators are members; the other half are perturbed by a random
/// matrix of relative size `1e-3` or more, on spaces with `N₁, N₂ ≥ 2`
/// where the Toeplitz constraint is not vacuous.
fn row_oracle(ctx: &Ctx) -> RowResult {
    let mut rng = ctx.rng(23);
    let mut m = Measure::default();
    let max_d = ctx.limits.max_d.min(2);
    for i in 0..ctx.counts.oracle_ops {
        let member = i % 2 == 0;
        let d = rng.random_range(1..=max_d);
        let cap = (ctx.limits.max_degree / d).clamp(1, 6);
        let lo = if member || cap < 2 { 1 } else { 2 };
        let n1 = rng.random_range(lo..=cap);
        let n2 = rng.random_range(lo..=cap);
        let cfg = ctx.cfg(d, n1.max(n2) * d, 2 * cap);
        let grid = ctx.grid(cfg.q);
        let m1 = Arc::new(build_model_space(
            &random::monomial_inner(d, n1, &grid, &cfg)?,
            &cfg,
        )?);
        let m2 = Arc::new(build_model_space(
            &random::monomial_inner(d, n2, &grid, &cfg)?,
            &cfg,
        )?);
        let phi = symbol(&mut rng, &cfg, &grid, -(n1 as i64 - 1), n2 as i64 - 1);
        let mut a = matto(&phi, &m1, &m2, &cfg)?;
        if !member {
            let e = random::ginibre(&mut rng, m2.dim(), m1.dim());
            let size = rng.random_range(1e-3..1e-1) * frob(a.mat()) / frob(&e);
            a = a.with_mat(a.mat() + e * c(size, 0.0), "perturbed");
        }
        let oracle = toeplitz_oracle(&a, &cfg)?.is_member;
        let ops1 = SpaceOps::new(&m1, &cfg)?;
        let ops2 = SpaceOps::new(&m2, &cfg)?;
        let decided = decide(&a, &ops1, &ops2, Flavor::Plain, &cfg)?;
        m.add(if oracle == decided { 0.0 } else { 1.0 });
    }
    Ok(m)
}

/// Spaces with degree above `d`, so that non-members exist.
fn nontrivial_pair(
    ctx: &Ctx,
    rng: &mut TestRng,
) -> Result<(GlobalConfig, SpaceOps, SpaceOps), RowError> {
    let (cfg, m1, m2) = ctx.pair(rng, true, 4)?;
    let ops1 = SpaceOps::new(&m1, &cfg)?;
    let ops2 = SpaceOps::new(&m2, &cfg)?;
    Ok((cfg, ops1, ops2))
}

fn row_tau_equivalence(ctx: &Ctx) -> RowResult {
    let mut rng = ctx.rng(24);
    let mut m = Measure::default();
    for i in 0..ctx.counts.tau_ops {
        let (cfg, ops1, ops2) = nontrivial_pair(ctx, &mut rng)?;
        let a = test_operator(&mut rng, &ops1.space, &ops2.space, &cfg, i % 2 == 0)?;
        let tau1 = mattolab::ops::tau(&ops1.space, &cfg)?;
        let tau2 = mattolab::ops::tau(&ops2.space, &cfg)?;
        let at = tau_transfer(&a, &tau1, &tau2)?;
        let t1 = SpaceOps::new(tau1.codomain(), &cfg)?;
        let t2 = SpaceOps::new(tau2.codomain(), &cfg)?;
        let before = decide(&a, &ops1, &ops2, Flavor::Plain, &cfg)?;
        let after = decide(&at, &t1, &t2, Flavor::Plain, &cfg)?;
        let expected = i % 2 == 0;
        m.add(if before == after && before == expected {
            0.0
        } else {
            1.0
        });
    }
    Ok(m)
}

fn row_tau_symbol(ctx: &Ctx) -> RowResult {
    let mut rng = ctx.rng(25);
    let mut m = Measure::default();
    for _ in 0..ctx.counts.tau_ops.min(20) {
        let (cfg, m1, m2) = ctx.pair(&mut rng, false, 4)?;
        let phi = symbol(&mut rng, &cfg, m1.grid(), -2, 2);
        let a = matto(&phi, &m1, &m2, &cfg)?;
        let tau1 = mattolab::ops::tau(&m1, &cfg)?;
        let tau2 = mattolab::ops::tau(&m2, &cfg)?;
        let at = tau_transfer(&a, &tau1, &tau2)?;
        let psi = tau_transfer_symbol(&phi, m1.theta(), m2.theta());
        let via_symbol = matto(&psi, tau1.codomain(), tau2.codomain(), &cfg)?;
        // transferring back with τ_Θ̃ returns A
        let back1 = tau_between(tau1.codomain(), &m1, &cfg)?;
        let back2 = tau_between(tau2.codomain(), &m2, &cfg)?;
        let twice = tau_transfer(&at, &back1, &back2)?;
        let law = frob(&(via_symbol.mat() - at.mat()));
        let involution = frob(&(twice.mat() - a.mat()));
        m.add(relative(law.max(involution), frob(a.mat())));
    }
    Ok(m)
}

/// Grid for Crofoot rows: `Θ^W` has zeros where `Θ(z) = W` on the
/// appropriate subspace, which can sit much closer to the circle than the
/// zeros of `Θ`; the grid is doubled until the transform resolves.
fn crofoot_grid_sizes() -> [usize; 4] {
    [1024, 2048, 4096, 8192]
}

struct CrofootCase {
    cfg: GlobalConfig,
    spaces: [Arc<ModelSpace>; 2],
    params: [CrofootParams; 2],
    transformed: [(InnerFunction, OperatorMatrix); 2],
}

fn crofoot_case(ctx: &Ctx, rng: &mut TestRng) -> Result<CrofootCase, RowError> {
    let d = rng.random_range(1..=ctx.limits.max_d.min(2));
    let cap = ctx.limits.max_degree.min(4);
    let lo = (d + 1).min(cap);
    let degrees = [rng.random_range(lo..=cap), rng.random_range(lo..=cap)];
    let state = rng.clone();
    let sizes: Vec<usize> = match ctx.grid {
        Some(q) => vec![q],
        None => crofoot_grid_sizes().to_vec(),
    };
    let mut last = None;
    for q in sizes {
        // every attempt sees the same instance
        let mut r = state.clone();
        let cfg = ctx.cfg_with_q(d, q);
        let attempt = (|| -> Result<CrofootCase, RowError> {
            let m1 = ctx.space(&mut r, d, degrees[0], &cfg)?;
            let m2 = ctx.space(&mut r, d, degrees[1], &cfg)?;
            let norm1 = r.random_range(0.1..MAX_W_NORM);
            let w1 = random::contraction(&mut r, d, norm1);
            let norm2 = r.random_range(0.1..MAX_W_NORM);
            let w2 = random::contraction(&mut r, d, norm2);
            let p1 = CrofootParams::new(w1, &cfg)?;
            let p2 = CrofootParams::new(w2, &cfg)?;
            let c1 = crofoot(&m1, &p1, &cfg)?;
            let c2 = crofoot(&m2, &p2, &cfg)?;
            Ok(CrofootCase {
                cfg,
                spaces: [m1, m2],
                params: [p1, p2],
                transformed: [c1, c2],
            })
        })();
        match attempt {
            Ok(case) => {
                *rng = r;
                return Ok(case);
            }
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one grid size"))
}

fn row_crofoot_unitary(ctx: &Ctx) -> RowResult {
    let mut rng = ctx.rng(26);
    let mut m = Measure::default();
    for _ in 0..ctx.counts.crofoot_pairs.min(10) {
        let case = crofoot_case(ctx, &mut rng)?;
        for (theta_w, j) in &case.transformed {
            let pure = if theta_w.is_pure() { 0.0 } else { 1.0 };
            let degree = (theta_w.degree() as f64 - j.domain().dim() as f64).abs();
            m.add(
                unitary_deviation(j.mat())
                    .max(theta_w.inner_deviation())
                    .max(pure)
                    .max(degree),
            );
        }
    }
    Ok(m)
}

fn row_crofoot_symbol(ctx: &Ctx) -> RowResult {
    let mut rng = ctx.rng(27);
    let mut m = Measure::default();
    for _ in 0..ctx.counts.crofoot_pairs {
        let case = crofoot_case(ctx, &mut rng)?;
        let cfg = &case.cfg;
        let [m1, m2] = &case.spaces;
        let [(_, j1), (_, j2)] = &case.transformed;
        let phi = symbol(&mut rng, cfg, m1.grid(), -2, 2);
        let a = matto(&phi, m1, m2, cfg)?;
        let psi = crofoot_symbol(
            &phi,
            &case.params[0],
            &case.params[1],
            m1.theta(),
            m2.theta(),
        )?;
        let via_symbol = matto(&psi, j1.codomain(), j2.codomain(), cfg)?;
        let conj = j2.mat() * a.mat() * j1.mat().adjoint();
        m.add(relative(frob(&(via_symbol.mat() - conj)), frob(a.mat())));
    }
    Ok(m)
}

fn row_crofoot_equivalence(ctx: &Ctx) -> RowResult {
    let mut rng = ctx.rng(28);
    let mut m = Measure::default();
    for i in 0..ctx.counts.crofoot_pairs {
        let case = crofoot_case(ctx, &mut rng)?;
        let cfg = &case.cfg;
        let [m1, m2] = &case.spaces;
        let [(_, j1), (_, j2)] = &case.transformed;
        let member = i % 2 == 0;
        let a = test_operator(&mut rng, m1, m2, cfg, member)?;
        let conj = OperatorMatrix::new(
            j2.mat() * a.mat() * j1.mat().adjoint(),
            j1.codomain().clone(),
            j2.codomain().clone(),
            "J A J*",
        );
        let ops = [
            SpaceOps::new(m1, cfg)?,
            SpaceOps::new(m2, cfg)?,
            SpaceOps::new(j1.codomain(), cfg)?,
            SpaceOps::new(j2.codomain(), cfg)?,
        ];
        let before = decide(&a, &ops[0], &ops[1], Flavor::Plain, cfg)?;
        let after = decide(&conj, &ops[2], &ops[3], Flavor::Plain, cfg)?;
        m.add(if before == after && before == member {
            0.0
        } else {
            1.0
        });
    }
    Ok(m)
}

fn row_crofoot_zero(ctx: &Ctx) -> RowResult {
    let mut rng = ctx.rng(29);
    let mut m = Measure::default();
    for _ in 0..ctx.counts.crofoot_pairs.min(6) {
        let d = ctx.pick_d(&mut rng);
        let degree = ctx.pick_degree(&mut rng, d);
        let cfg = ctx.cfg(d, degree, 0);
        let space = ctx.space(&mut rng, d, degree, &cfg)?;
        let p = CrofootParams::new(CMat::zeros(d, d), &cfg)?;
        let (theta_w, j) = crofoot(&space, &p, &cfg)?;
        let samples = theta_w
            .fun()
            .samples()
            .iter()
            .zip(space.theta().fun().samples())
            .map(|(a, b)| frob(&(a - b)))
            .fold(0.0, f64::max);
        m.add(frob(&(j.mat() - eye(space.dim()))).max(samples));
    }
    Ok(m)
}

/// Plain and tilde decisions on the operator kinds of the forward,
/// converse and `τ` rows: symbol-built members, perturbed non-members,
/// certificate-built members and `τ`-transferred operators.
fn row_flavor(ctx: &Ctx) -> RowResult {
    let mut rng = ctx.rng(30);
    let mut m = Measure::default();
    for i in 0..ctx.counts.tau_ops {
        let (cfg, ops1, ops2) = nontrivial_pair(ctx, &mut rng)?;
        let (a, ops1, ops2) = match i % 4 {
            0 | 1 => (
                test_operator(&mut rng, &ops1.space, &ops2.space, &cfg, i % 4 == 0)?,
                ops1,
                ops2,
            ),
            2 => {
                let b1 = random::ginibre(&mut rng, ops2.space.dim(), cfg.d);
                let b2 = random::ginibre(&mut rng, ops1.space.dim(), cfg.d);
                (build_from_b_with(&b1, &b2, &ops1, &ops2, &cfg)?, ops1, ops2)
            }
            _ => {
                let member = rng.random_bool(0.5);
                let a = test_operator(&mut rng, &ops1.space, &ops2.space, &cfg, member)?;
                let tau1 = mattolab::ops::tau(&ops1.space, &cfg)?;
                let tau2 = mattolab::ops::tau(&ops2.space, &cfg)?;
                let at = tau_transfer(&a, &tau1, &tau2)?;
                let t1 = SpaceOps::new(tau1.codomain(), &cfg)?;
                let t2 = SpaceOps::new(tau2.codomain(), &cfg)?;
                (at, t1, t2)
            }
        };
        let plain = decide(&a, &ops1, &ops2, Flavor::Plain, &cfg)?;
        let tilde = decide(&a, &ops1, &ops2, Flavor::Tilde, &cfg)?;
        m.add(if plain == tilde { 0.0 } else { 1.0 });
    }
    Ok(m)
}

fn row_conversion(ctx: &Ctx) -> RowResult {
    let mut rng = ctx.rng(31);
    let mut m = Measure::default();
    for _ in 0..ctx.counts.tau_ops.min(20) {
        let (cfg, ops1, ops2) = nontrivial_pair(ctx, &mut rng)?;
        let a = test_operator(&mut rng, &ops1.space, &ops2.space, &cfg, true)?;
        let tilde = solve_certificate_with(a.mat(), &ops1, &ops2, Flavor::Tilde, &cfg)?;
        let tau1 = mattolab::ops::tau(&ops1.space, &cfg)?;
        let tau2 = mattolab::ops::tau(&ops2.space, &cfg)?;
        let plain = tilde_certificate_convert(&tilde, &tau1, &tau2, &cfg)?;
        let back = plain_to_tilde_certificate(&plain, &tau1, &tau2)?;
        let roundtrip = frob(&(&back.b1 - &tilde.b1)).max(frob(&(&back.b2 - &tilde.b2)));
        let at = tau_transfer(&a, &tau1, &tau2)?;
        let t1 = SpaceOps::new(tau1.codomain(), &cfg)?;
        let t2 = SpaceOps::new(tau2.codomain(), &cfg)?;
        let r = residual_with(at.mat(), &t1, &t2, Flavor::Plain)?;
        let certifies =
            frob(&(r - certificate_image(&plain.b1, &plain.b2, &t1, &t2, Flavor::Plain)));
        m.add(roundtrip.max(relative(certifies, frob(a.mat()))));
    }
    Ok(m)
}

fn row_adjoint_closure(ctx: &Ctx) -> RowResult {
    let mut rng = ctx.rng(32);
    let mut m = Measure::default();
    for i in 0..ctx.counts.tau_ops {
        let (cfg, ops1, ops2) = nontrivial_pair(ctx, &mut rng)?;
        let a = test_operator(&mut rng, &ops1.space, &ops2.space, &cfg, i % 2 == 0)?;
        let forward = decide(&a, &ops1, &ops2, Flavor::Plain, &cfg)?;
        let adjoint = decide(&a.adjoint(), &ops2, &ops1, Flavor::Plain, &cfg)?;
        m.add(if forward == adjoint { 0.0 } else { 1.0 });
    }
    Ok(m)
}

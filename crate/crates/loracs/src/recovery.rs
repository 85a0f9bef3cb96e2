//! Cloud-side sparse recovery and compressed-domain demodulation.
//!
//! The complex system `y = Θ·s` (Θ = Φ_blockdiag·Ψ) is lifted to a real
//! one with the block structure `[[Re −Im],[Im Re]]`, solved by an ℓ1
//! solver (greedy OMP by default, proximal-gradient BPDN as the
//! cross-validation backend), and decided by the residual profile
//! `r[i] = ‖y − θᵢ·sᵢ‖`: the demodulated value is the argmin candidate.
//!
//! The two real coefficients of candidate `i` (indices `i` and `D+i`)
//! are treated as one complex candidate at residual time: the support is
//! closed under pairing and refit by least squares before folding, so a
//! candidate whose quadrature column was never individually selected
//! still competes with its full complex energy.

use crate::cs::{CompressedVector, Dictionary, MeasurementMatrix, PHI_CHUNK};
use crate::linalg::{ls_solve_cols, matvec, norm2, spectral_norm};
use crate::params::{ChirpParams, Direction};
use crate::{Complex, Error, IqVector, Result};
use ndarray::Array2;
use std::collections::HashMap;
use std::sync::OnceLock;

/// Real lift of Θ with cached transpose and column norms.
///
/// Shared read-only across trials and worker threads; the lift of a fresh
/// `y` into a [`RealifiedSystem`] is cheap by comparison.
#[derive(Debug)]
pub struct RealifiedTheta {
    /// Θ′ = [[Re −Im],[Im Re]], shape 2M × 2D.
    pub a: Array2<f64>,
    /// Θ′ᵀ, cached for adjoint products with contiguous rows.
    pub at: Array2<f64>,
    /// Euclidean norms of the 2D real columns.
    pub col_norms: Vec<f64>,
    /// Complex candidate count D (= 2^sf).
    pub d: usize,
    spectral: OnceLock<f64>,
}

impl RealifiedTheta {
    /// Largest singular value, computed once and cached (power iteration).
    pub fn spectral_norm(&self) -> f64 {
        *self
            .spectral
            .get_or_init(|| spectral_norm(&self.a, &self.at, 40))
    }
}

/// One real-lifted instance: the measurement vector plus the shared lift.
#[derive(Debug)]
pub struct RealifiedSystem<'a> {
    /// y′ = [Re y; Im y], length 2M.
    pub y_real: Vec<f64>,
    pub theta: &'a RealifiedTheta,
}

/// Lifts a complex Θ into its real form (the expensive, reusable half of
/// [`realify`]).
pub fn realify_theta(theta: &Array2<Complex>) -> RealifiedTheta {
    let (m, d) = theta.dim();
    let mut a = Array2::zeros((2 * m, 2 * d));
    for i in 0..m {
        for j in 0..d {
            let v = theta[(i, j)];
            a[(i, j)] = v.re;
            a[(i, j + d)] = -v.im;
            a[(i + m, j)] = v.im;
            a[(i + m, j + d)] = v.re;
        }
    }
    let at = a.t().as_standard_layout().to_owned();
    let col_norms = (0..2 * d)
        .map(|j| norm2(at.row(j).as_slice().expect("contiguous")))
        .collect();
    RealifiedTheta { a, at, col_norms, d, spectral: OnceLock::new() }
}

/// Stacks `y` onto the real lift of Θ: `y′ = [Re y; Im y]`.
///
/// Solving the real system and folding back via
/// `s = s′[0..D] + j·s′[D..2D]` is exact.
pub fn realify<'a>(y: &CompressedVector, theta: &'a RealifiedTheta) -> Result<RealifiedSystem<'a>> {
    let m2 = theta.a.nrows();
    if 2 * y.m_total() != m2 {
        return Err(Error::Shape(format!(
            "y has {} measurements, Θ′ expects {}",
            y.m_total(),
            m2 / 2
        )));
    }
    let mut y_real = Vec::with_capacity(m2);
    y_real.extend(y.y.iter().map(|c| c.re));
    y_real.extend(y.y.iter().map(|c| c.im));
    Ok(RealifiedSystem { y_real, theta })
}

/// Reconstitutes the complex `(y, Θ)` from a real lift — the round-trip
/// counterpart of [`realify`], used by tests and debugging exports.
pub fn complexify(sys: &RealifiedSystem<'_>) -> (IqVector, Array2<Complex>) {
    let m = sys.y_real.len() / 2;
    let d = sys.theta.d;
    let y: IqVector = (0..m)
        .map(|i| Complex::new(sys.y_real[i], sys.y_real[i + m]))
        .collect();
    let mut theta = Array2::zeros((m, d));
    for i in 0..m {
        for j in 0..d {
            theta[(i, j)] = Complex::new(sys.theta.a[(i, j)], sys.theta.a[(i + m, j)]);
        }
    }
    (y, theta)
}

/// Solution of one ℓ1 recovery: complex-folded coefficients plus solver
/// bookkeeping.
#[derive(Debug, Clone)]
pub struct SparseSolution {
    /// D complex coefficients, nonzero only on the support.
    pub s_opt: Vec<Complex>,
    /// Complex candidate indices with nonzero coefficients, ascending.
    pub support: Vec<usize>,
    /// ‖y′ − Θ′·s′‖₂ after the final (paired, debiased) fit.
    pub residual_norm: f64,
    /// Solver iterations actually run.
    pub iterations: usize,
}

/// Per-candidate residual profile; the decision is `argmin_i r[i]`.
#[derive(Debug, Clone)]
pub struct ResidualProfile {
    /// r[i] = ‖y − θᵢ·sᵢ‖ for each of the 2^sf candidates; candidates
    /// outside the solution support sit at ‖y‖ (their sᵢ is zero).
    pub r: Vec<f64>,
    /// Dictionary direction the profile was computed against.
    pub direction: Direction,
}

impl ResidualProfile {
    /// Argmin candidate, ties broken toward the smallest index.
    pub fn argmin(&self) -> usize {
        let mut best = 0usize;
        for (i, &v) in self.r.iter().enumerate() {
            if v < self.r[best] {
                best = i;
            }
        }
        best
    }

    /// Smallest residual value.
    pub fn min_residual(&self) -> f64 {
        self.r.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// An ℓ1-minimization backend operating on the real-lifted system.
///
/// Backends are interchangeable: same inputs, same solution contract
/// (residual ≤ eps, or the best solution found within the budget with
/// `residual_norm > eps` flagging non-convergence — never a panic).
pub trait SparseSolver: Send + Sync {
    /// Registry key and trace label.
    fn name(&self) -> &'static str;

    /// Solves `min ‖s′‖₁ s.t. ‖y′ − Θ′·s′‖₂ ≤ eps` (or best effort after
    /// the budget), returning complex-folded coefficients.
    fn solve(&self, sys: &RealifiedSystem<'_>, eps: f64, k_max: usize) -> SparseSolution;
}

/// Closes a set of real column picks under complex pairing, refits by
/// least squares, and folds to complex coefficients.
///
/// Returns `(s_opt, support, residual_norm)`.
fn fold_support(
    sys: &RealifiedSystem<'_>,
    picks: &[usize],
) -> (Vec<Complex>, Vec<usize>, f64) {
    let d = sys.theta.d;
    let mut support: Vec<usize> = picks.iter().map(|&j| j % d).collect();
    support.sort_unstable();
    support.dedup();
    if support.is_empty() {
        return (vec![Complex::new(0.0, 0.0); d], support, norm2(&sys.y_real));
    }
    // Paired columns: [re(c0), im(c0), re(c1), im(c1), ...].
    let cols: Vec<_> = support
        .iter()
        .flat_map(|&c| [sys.theta.at.row(c), sys.theta.at.row(c + d)])
        .collect();
    let coef = ls_solve_cols(&cols, &sys.y_real);
    let mut s_opt = vec![Complex::new(0.0, 0.0); d];
    let mut residual = sys.y_real.clone();
    for (idx, &c) in support.iter().enumerate() {
        let (re, im) = (coef[2 * idx], coef[2 * idx + 1]);
        s_opt[c] = Complex::new(re, im);
        let col_re = cols[2 * idx].as_slice().expect("contiguous");
        let col_im = cols[2 * idx + 1].as_slice().expect("contiguous");
        for ((r, &a), &b) in residual.iter_mut().zip(col_re).zip(col_im) {
            *r -= re * a + im * b;
        }
    }
    (s_opt, support, norm2(&residual))
}

/// Greedy orthogonal matching pursuit over the 2D real columns.
///
/// Selection score is the residual correlation normalized by column norm;
/// every pick is followed by a full least-squares refit on the picked
/// columns, so the residual norm is non-increasing across iterations.
#[derive(Debug, Default, Clone)]
pub struct OmpSolver;

impl SparseSolver for OmpSolver {
    fn name(&self) -> &'static str {
        "omp"
    }

    fn solve(&self, sys: &RealifiedSystem<'_>, eps: f64, k_max: usize) -> SparseSolution {
        let two_d = sys.theta.at.nrows();
        let mut picks: Vec<usize> = Vec::with_capacity(k_max);
        let mut residual = sys.y_real.clone();
        let mut corr = vec![0.0f64; two_d];
        let mut iterations = 0usize;
        let mut res_norm = norm2(&residual);
        while res_norm > eps && picks.len() < k_max {
            matvec(&sys.theta.at, &residual, &mut corr);
            let mut best = usize::MAX;
            let mut best_score = f64::NEG_INFINITY;
            for j in 0..two_d {
                if picks.contains(&j) {
                    continue;
                }
                let cn = sys.theta.col_norms[j];
                if cn == 0.0 {
                    continue;
                }
                let score = corr[j].abs() / cn;
                if score > best_score {
                    best_score = score;
                    best = j;
                }
            }
            if best == usize::MAX {
                break;
            }
            picks.push(best);
            let cols: Vec<_> = picks.iter().map(|&j| sys.theta.at.row(j)).collect();
            let coef = ls_solve_cols(&cols, &sys.y_real);
            residual.copy_from_slice(&sys.y_real);
            for (col, &c) in cols.iter().zip(coef.iter()) {
                let cs = col.as_slice().expect("contiguous");
                for (r, &a) in residual.iter_mut().zip(cs) {
                    *r -= c * a;
                }
            }
            let new_norm = norm2(&residual);
            debug_assert!(new_norm <= res_norm + 1e-9);
            res_norm = new_norm;
            iterations += 1;
        }
        let (s_opt, support, residual_norm) = fold_support(sys, &picks);
        SparseSolution { s_opt, support, residual_norm, iterations }
    }
}

/// Proximal-gradient basis-pursuit denoising (FISTA) cross-validation
/// backend.
///
/// Runs accelerated ISTA with soft threshold `μ/L` where
/// `μ = mu_ratio·‖Θ′ᵀy′‖_∞` and `L` is the cached squared spectral norm,
/// then debiases by least squares on the `k_max` largest complex-magnitude
/// candidates. Deterministic: fixed iteration count, no randomness.
#[derive(Debug, Clone)]
pub struct BpdnSolver {
    pub iterations: usize,
    pub mu_ratio: f64,
}

impl Default for BpdnSolver {
    fn default() -> Self {
        Self { iterations: 200, mu_ratio: 0.2 }
    }
}

impl SparseSolver for BpdnSolver {
    fn name(&self) -> &'static str {
        "bpdn"
    }

    fn solve(&self, sys: &RealifiedSystem<'_>, eps: f64, k_max: usize) -> SparseSolution {
        let d = sys.theta.d;
        let two_d = 2 * d;
        let rows = sys.y_real.len();
        if norm2(&sys.y_real) <= eps {
            return SparseSolution {
                s_opt: vec![Complex::new(0.0, 0.0); d],
                support: Vec::new(),
                residual_norm: norm2(&sys.y_real),
                iterations: 0,
            };
        }
        let sigma = sys.theta.spectral_norm();
        let l = (sigma * sigma).max(1e-300);
        let mut aty = vec![0.0f64; two_d];
        matvec(&sys.theta.at, &sys.y_real, &mut aty);
        let lam_max = aty.iter().cloned().fold(0.0f64, |a, v| a.max(v.abs()));
        let thresh = self.mu_ratio * lam_max / l;
        let mut x = vec![0.0f64; two_d];
        let mut z = vec![0.0f64; two_d];
        let mut ax = vec![0.0f64; rows];
        let mut grad = vec![0.0f64; two_d];
        let mut t = 1.0f64;
        for _ in 0..self.iterations {
            matvec(&sys.theta.a, &z, &mut ax);
            for (a, y) in ax.iter_mut().zip(sys.y_real.iter()) {
                *a -= y;
            }
            matvec(&sys.theta.at, &ax, &mut grad);
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let momentum = (t - 1.0) / t_next;
            for j in 0..two_d {
                let g = z[j] - grad[j] / l;
                let xn = g.signum() * (g.abs() - thresh).max(0.0);
                z[j] = xn + momentum * (xn - x[j]);
                x[j] = xn;
            }
            t = t_next;
        }
        // Support = k_max largest complex magnitudes of the l1 solution.
        let mut mags: Vec<(f64, usize)> = (0..d)
            .map(|c| (Complex::new(x[c], x[c + d]).norm(), c))
            .filter(|&(m, _)| m > 0.0)
            .collect();
        mags.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        mags.truncate(k_max);
        let picks: Vec<usize> = mags.iter().map(|&(_, c)| c).collect();
        let (s_opt, support, residual_norm) = fold_support(sys, &picks);
        SparseSolution {
            s_opt,
            support,
            residual_norm,
            iterations: self.iterations,
        }
    }
}

type SolverFactory = Box<dyn Fn() -> Box<dyn SparseSolver> + Send + Sync>;

/// String-keyed factory registry for solver backends; config and CLI
/// select a backend by name at runtime.
pub struct SolverRegistry {
    factories: HashMap<String, SolverFactory>,
}

impl SolverRegistry {
    pub fn empty() -> Self {
        Self { factories: HashMap::new() }
    }

    /// Registers a backend under `name`, replacing any previous entry.
    pub fn register<F>(&mut self, name: &str, factory: F)
    where
        F: Fn() -> Box<dyn SparseSolver> + Send + Sync + 'static,
    {
        self.factories.insert(name.to_string(), Box::new(factory));
    }

    /// Instantiates a backend by name.
    pub fn create(&self, name: &str) -> Option<Box<dyn SparseSolver>> {
        self.factories.get(name).map(|f| f())
    }

    /// Registered names, sorted for stable listings.
    pub fn names(&self) -> Vec<String> {
        let mut v: Vec<String> = self.factories.keys().cloned().collect();
        v.sort();
        v
    }
}

impl Default for SolverRegistry {
    /// Registry with the two built-in backends: `"omp"` and `"bpdn"`.
    fn default() -> Self {
        let mut reg = Self::empty();
        reg.register("omp", || Box::new(OmpSolver));
        reg.register("bpdn", || Box::new(BpdnSolver::default()));
        reg
    }
}

/// Computes `r[i] = ‖y − θᵢ·sᵢ‖₂` over all 2^sf candidates.
///
/// Candidates outside the support keep `r[i] = ‖y‖` (their coefficient is
/// zero), so the scan costs O(|support|·M) rather than O(D·M).
pub fn residual_profile(
    y: &[Complex],
    theta: &Array2<Complex>,
    s_opt: &[Complex],
    direction: Direction,
) -> ResidualProfile {
    let y_norm = y.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let mut r = vec![y_norm; s_opt.len()];
    for (i, &s) in s_opt.iter().enumerate() {
        if s == Complex::new(0.0, 0.0) {
            continue;
        }
        let mut acc = 0.0f64;
        for (k, yk) in y.iter().enumerate() {
            acc += (yk - theta[(k, i)] * s).norm_sqr();
        }
        r[i] = acc.sqrt();
    }
    ResidualProfile { r, direction }
}

/// Fraction of ‖y‖ below which the best residual counts as a satisfactory
/// decode; a flat profile (≈‖y‖ everywhere) signals the wrong dictionary.
pub const FALLBACK_RESIDUAL_FRACTION: f64 = 0.8;

/// Everything needed to decode compressed vectors of one configuration:
/// measurement matrix, per-direction dictionaries with their Θ lifts, and
/// the solver backend. Build once per (sf, m, seed) cell; immutable and
/// thread-safe afterwards, cheap to share across Monte-Carlo workers.
pub struct CompressedDecoder {
    pub params: ChirpParams,
    pub phi: MeasurementMatrix,
    solver: Box<dyn SparseSolver>,
    up: DirectionContext,
    down: OnceLock<DirectionContext>,
}

struct DirectionContext {
    dict: Dictionary,
    /// Θ = Φ_blockdiag·Ψ, M_total × D complex.
    theta: Array2<Complex>,
    real: RealifiedTheta,
}

impl DirectionContext {
    fn build(params: ChirpParams, phi: &MeasurementMatrix, direction: Direction) -> Result<Self> {
        let dict = crate::cs::build_dictionary(params, direction)?;
        let n = params.n();
        let m_total = (n / PHI_CHUNK) * phi.m;
        let mut theta = Array2::zeros((m_total, n));
        for i in 0..n {
            let atom: IqVector = dict.psi.column(i).iter().cloned().collect();
            let col = crate::cs::compress(&atom, phi)?;
            for (k, v) in col.y.iter().enumerate() {
                theta[(k, i)] = *v;
            }
        }
        let real = realify_theta(&theta);
        Ok(Self { dict, theta, real })
    }
}

impl CompressedDecoder {
    /// Builds the up-chirp context eagerly; the down-chirp context is
    /// constructed on first fallback use.
    pub fn new(
        params: ChirpParams,
        chunk_m: usize,
        phi_seed: u64,
        solver: Box<dyn SparseSolver>,
    ) -> Result<Self> {
        let phi = crate::cs::build_measurement(phi_seed, chunk_m)?;
        let up = DirectionContext::build(params, &phi, Direction::Up)?;
        Ok(Self { params, phi, solver, up, down: OnceLock::new() })
    }

    /// Expected total measurement count for this configuration.
    pub fn m_total(&self) -> usize {
        (self.params.n() / PHI_CHUNK) * self.phi.m
    }

    pub fn solver_name(&self) -> &'static str {
        self.solver.name()
    }

    fn direction_ctx(&self, direction: Direction) -> Result<&DirectionContext> {
        match direction {
            Direction::Up => Ok(&self.up),
            Direction::Down => {
                if self.down.get().is_none() {
                    let built = DirectionContext::build(self.params, &self.phi, Direction::Down)?;
                    let _ = self.down.set(built);
                }
                Ok(self.down.get().expect("down context initialized"))
            }
        }
    }

    fn check_input(&self, y: &CompressedVector) -> Result<()> {
        if y.m_total() != self.m_total() || y.chunk_m != self.phi.m {
            return Err(Error::Shape(format!(
                "compressed vector ({} measurements, chunk {}) does not match decoder ({}, {})",
                y.m_total(),
                y.chunk_m,
                self.m_total(),
                self.phi.m
            )));
        }
        Ok(())
    }

    /// Solve + profile against one dictionary direction.
    ///
    /// The instance is scale-normalized before solving (`ỹ = y/‖y‖`, eps
    /// scaled to match), which makes the decision invariant under any
    /// common complex scaling of `y`; the returned profile is rescaled to
    /// the original ‖y‖.
    pub fn profile(
        &self,
        y: &CompressedVector,
        direction: Direction,
        eps: f64,
        k_max: usize,
    ) -> Result<(ResidualProfile, SparseSolution)> {
        self.check_input(y)?;
        let ctx = self.direction_ctx(direction)?;
        let y_norm = y.norm();
        if y_norm == 0.0 {
            let d = self.params.n();
            let sol = SparseSolution {
                s_opt: vec![Complex::new(0.0, 0.0); d],
                support: Vec::new(),
                residual_norm: 0.0,
                iterations: 0,
            };
            return Ok((ResidualProfile { r: vec![0.0; d], direction }, sol));
        }
        let scaled = CompressedVector {
            y: y.y.iter().map(|c| c / y_norm).collect(),
            sf: y.sf,
            chunk_m: y.chunk_m,
        };
        let sys = realify(&scaled, &ctx.real)?;
        let mut sol = self.solver.solve(&sys, eps / y_norm, k_max);
        let mut prof = residual_profile(&scaled.y, &ctx.theta, &sol.s_opt, direction);
        for r in &mut prof.r {
            *r *= y_norm;
        }
        sol.residual_norm *= y_norm;
        for s in &mut sol.s_opt {
            *s *= y_norm;
        }
        Ok((prof, sol))
    }

    /// Demodulates with a known chirp direction (the payload contract of
    /// the framing layer): no fallback attempt.
    pub fn demodulate_known(
        &self,
        y: &CompressedVector,
        direction: Direction,
        eps: f64,
        k_max: usize,
    ) -> Result<(u32, ResidualProfile)> {
        let (prof, _) = self.profile(y, direction, eps, k_max)?;
        let ctx = self.direction_ctx(direction)?;
        Ok((ctx.dict.value_for_bin(prof.argmin()), prof))
    }

    /// Full demodulation with dictionary fallback.
    ///
    /// Tries the up-chirp dictionary; if the best residual fails the
    /// satisfaction test (min r > [`FALLBACK_RESIDUAL_FRACTION`]·‖y‖), the
    /// down-chirp dictionary is tried too and whichever direction yields
    /// the smaller minimum residual wins. Returns the modulation value
    /// (down-chirp bins map through `(n − bin) mod n`), the winning
    /// profile, and the direction.
    pub fn demodulate(
        &self,
        y: &CompressedVector,
        eps: f64,
        k_max: usize,
    ) -> Result<(u32, ResidualProfile, Direction)> {
        let (prof_up, _) = self.profile(y, Direction::Up, eps, k_max)?;
        let min_up = prof_up.min_residual();
        if min_up <= FALLBACK_RESIDUAL_FRACTION * y.norm() {
            let value = self.up.dict.value_for_bin(prof_up.argmin());
            return Ok((value, prof_up, Direction::Up));
        }
        let (prof_down, _) = self.profile(y, Direction::Down, eps, k_max)?;
        if prof_down.min_residual() < min_up {
            let ctx = self.direction_ctx(Direction::Down)?;
            let value = ctx.dict.value_for_bin(prof_down.argmin());
            Ok((value, prof_down, Direction::Down))
        } else {
            let value = self.up.dict.value_for_bin(prof_up.argmin());
            Ok((value, prof_up, Direction::Up))
        }
    }
}

/// Solver tolerance for a known channel noise level: `√(2·M_total)·σ̂`,
/// the expected norm of the lifted noise, where `σ̂ = √(128/2)·σ_chan` is
/// the per-real-dimension noise std after ±1 chunk measurement (each
/// measurement sums 128 noise samples).
pub fn eps_for_noise(m_total: usize, sigma_chan: f64) -> f64 {
    let sigma_real = (PHI_CHUNK as f64 / 2.0).sqrt() * sigma_chan;
    (2.0 * m_total as f64).sqrt() * sigma_real
}

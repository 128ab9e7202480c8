//! Open-system dynamics: Lindblad master equation with mode cooling,
//! heating and per-site dephasing, thermal initial states, a dense
//! generator for steady states, and phonon-cutoff convergence checks.
//!
//! The integrator works in the interaction picture of the Hamiltonian
//! diagonal. The diagonal is linear in the phonon number with a common
//! spacing and the jump operators are either diagonal (dephasing words) or
//! pure ladder shifts, so every dissipator is exactly invariant under the
//! rotation and only the slow off-diagonal phases remain in the coherent
//! term. Recorded states are rotated back to the lab frame.

use crate::error::Error;
use crate::hilbert::{reduced_two_qubit_state, JointOperator, ManifoldBasis};
use crate::linalg;
use crate::model::{
    electronic_amplitudes, monomer_exciton_basis, support_weighted_alpha, DisorderRealization,
    ElectronicPattern, ModelParams,
};
use crate::scalar::Scalar;
use crate::{analysis, Result};
use ndarray::Array2;
use num_complex::Complex;

/// Validated density matrix on the joint space.
#[derive(Debug, Clone)]
pub struct DensityMatrix<R: Scalar> {
    matrix: Array2<Complex<R>>,
}

impl<R: Scalar> DensityMatrix<R> {
    /// Wraps a matrix after checking Hermiticity (1e-10), unit trace
    /// (1e-8) and positivity (minimum eigenvalue above -1e-8).
    pub fn new(matrix: Array2<Complex<R>>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::state("density matrix must be square"));
        }
        let herm = linalg::hermiticity_deviation(&matrix);
        if herm > R::of(1e-10) {
            return Err(Error::state(format!(
                "density matrix is not Hermitian: deviation {:e}",
                herm.as_f64()
            )));
        }
        let tr = linalg::trace(&matrix);
        if (tr.re - R::one()).abs() > R::of(1e-8) || tr.im.abs() > R::of(1e-8) {
            return Err(Error::state(format!(
                "density matrix trace {:e} + {:e} i is not 1",
                tr.re.as_f64(),
                tr.im.as_f64()
            )));
        }
        if !linalg::cholesky_probe(&matrix, R::of(1e-8)) {
            return Err(Error::state("density matrix has an eigenvalue below -1e-8"));
        }
        Ok(Self { matrix })
    }

    /// Rank-one state from a normalized vector.
    pub fn from_pure(vector: &[Complex<R>]) -> Result<Self> {
        let n = vector.len();
        let norm2: R = vector.iter().map(|c| c.norm_sqr()).sum();
        if (norm2 - R::one()).abs() > R::of(1e-10) {
            return Err(Error::state("state vector is not normalized"));
        }
        let mut matrix = Array2::zeros((n, n));
        for r in 0..n {
            for c in 0..n {
                matrix[[r, c]] = vector[r] * vector[c].conj();
            }
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &Array2<Complex<R>> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<Complex<R>> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Tr rho^2, real by Hermiticity.
    pub fn purity(&self) -> R {
        self.matrix.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Dissipative channel rates: mode relaxation `gamma` against a bath of
/// occupancy `nbar`, plus per-site dephasing `gamma_d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSet<R: Scalar> {
    pub gamma: R,
    pub nbar: R,
    pub gamma_d: R,
}

impl<R: Scalar> ChannelSet<R> {
    pub fn new(gamma: R, nbar: R, gamma_d: R) -> Result<Self> {
        if gamma < R::zero() || nbar < R::zero() || gamma_d < R::zero() {
            return Err(Error::param("channel rates must be non-negative"));
        }
        Ok(Self { gamma, nbar, gamma_d })
    }

    pub fn from_params(params: &ModelParams<R>) -> Result<Self> {
        Self::new(params.gamma, params.nbar, params.gamma_d)
    }

    /// Unitary dynamics only.
    pub fn closed() -> Self {
        Self { gamma: R::zero(), nbar: R::zero(), gamma_d: R::zero() }
    }
}

/// One row of recorded observables.
#[derive(Debug, Clone)]
pub struct Record<R: Scalar> {
    /// Excitation weight per monomer; donor first, acceptor last.
    pub p_monomer: Vec<R>,
    /// Exciton-state populations on the donor block, descending order.
    pub p_exciton_donor: Vec<R>,
    /// Exciton-state populations on the acceptor block, descending order.
    pub p_exciton_acceptor: Vec<R>,
    /// Uniform-superposition population on the acceptor block.
    pub p_w_acceptor: R,
    /// Mode occupancy <a†a>.
    pub n_phonon: R,
    /// Tr rho^2.
    pub purity: R,
    /// Concurrence of the first site pair (sites 0, 1).
    pub c12: R,
    /// Concurrence of the second site pair (sites 2, 3) when present.
    pub c34: R,
}

impl<R: Scalar> Record<R> {
    pub fn p_donor(&self) -> R {
        self.p_monomer[0]
    }

    pub fn p_acceptor(&self) -> R {
        *self.p_monomer.last().expect("at least one monomer")
    }
}

/// Time series of records plus the final state and integrator diagnostics.
#[derive(Debug, Clone)]
pub struct Trajectory<R: Scalar> {
    pub times: Vec<R>,
    pub records: Vec<Record<R>>,
    pub final_state: DensityMatrix<R>,
    /// Highest Fock level accumulated more than 1e-4 population at some
    /// record point: results may be cutoff-limited.
    pub cutoff_warning: bool,
    /// Positivity held only at the 1e-6 tier somewhere along the run.
    pub positivity_warning: bool,
    /// Largest |Tr rho - 1| seen at record points.
    pub max_trace_drift: R,
    /// Largest top-Fock population seen at record points.
    pub max_top_fock: R,
}

impl<R: Scalar> Trajectory<R> {
    /// Donor population series.
    pub fn p_donor(&self) -> Vec<R> {
        self.records.iter().map(|r| r.p_donor()).collect()
    }

    /// Acceptor population series.
    pub fn p_acceptor(&self) -> Vec<R> {
        self.records.iter().map(|r| r.p_acceptor()).collect()
    }
}

/// Precomputed measurement data for trajectory records.
#[derive(Debug, Clone)]
pub struct ObservableSet<R: Scalar> {
    basis: ManifoldBasis,
    monomer_sites: Vec<Vec<usize>>,
    /// Exciton vectors of one monomer block (columns, descending), when
    /// the block is small enough to analyze.
    exciton_vectors: Option<Array2<R>>,
    w_amplitude: R,
}

impl<R: Scalar> ObservableSet<R> {
    /// Observables for a model: per-monomer weights, donor/acceptor
    /// exciton populations, acceptor uniform-state population, mode
    /// occupancy, purity and the two standard pair concurrences.
    pub fn for_model(params: &ModelParams<R>) -> Result<Self> {
        params.validate()?;
        let basis = crate::hilbert::build_manifold_basis(params.n_sites(), params.phonon_cutoff)?;
        let l = params.sites_per_monomer;
        let monomer_sites = (0..params.n_monomers)
            .map(|m| (m * l..(m + 1) * l).collect())
            .collect();
        let exciton_vectors = if (2..=6).contains(&l) && params.p > R::zero() {
            Some(monomer_exciton_basis(l, params.j, params.p)?.eigenvectors)
        } else {
            None
        };
        Ok(Self {
            basis,
            monomer_sites,
            exciton_vectors,
            w_amplitude: R::one() / R::of(l as f64).sqrt(),
        })
    }

    /// Monomer-free fallback: the whole chain as a single block, no
    /// exciton projections. Used for bare-mode tests.
    pub fn minimal(basis: ManifoldBasis) -> Self {
        Self {
            basis,
            monomer_sites: vec![(0..basis.n_sites()).collect()],
            exciton_vectors: None,
            w_amplitude: R::zero(),
        }
    }

    pub fn basis(&self) -> ManifoldBasis {
        self.basis
    }

    fn block_population(&self, rho: &Array2<Complex<R>>, sites: &[usize], weights: &[R]) -> R {
        // <v| rho_block |v> summed over phonon levels, v real.
        let fd = self.basis.fock_dim();
        let mut total = R::zero();
        for n in 0..fd {
            for (a, &sa) in sites.iter().enumerate() {
                let ra = self.basis.index(sa, n);
                for (b, &sb) in sites.iter().enumerate() {
                    let rb = self.basis.index(sb, n);
                    total += weights[a] * weights[b] * rho[[ra, rb]].re;
                }
            }
        }
        total
    }

    /// Measures one lab-frame state.
    pub fn measure(&self, rho: &Array2<Complex<R>>) -> Record<R> {
        let fd = self.basis.fock_dim();
        let p_monomer: Vec<R> = self
            .monomer_sites
            .iter()
            .map(|sites| {
                let mut p = R::zero();
                for &s in sites {
                    for n in 0..fd {
                        let k = self.basis.index(s, n);
                        p += rho[[k, k]].re;
                    }
                }
                p
            })
            .collect();

        let (p_exciton_donor, p_exciton_acceptor, p_w_acceptor) = match &self.exciton_vectors {
            Some(vecs) => {
                let l = vecs.nrows();
                let donor = &self.monomer_sites[0];
                let acceptor = self.monomer_sites.last().unwrap();
                let col = |m: usize| -> Vec<R> { (0..l).map(|r| vecs[[r, m]]).collect() };
                let pd: Vec<R> =
                    (0..l).map(|m| self.block_population(rho, donor, &col(m))).collect();
                let pa: Vec<R> =
                    (0..l).map(|m| self.block_population(rho, acceptor, &col(m))).collect();
                let w = vec![self.w_amplitude; l];
                let pw = self.block_population(rho, acceptor, &w);
                (pd, pa, pw)
            }
            None => (Vec::new(), Vec::new(), R::zero()),
        };

        let mut n_phonon = R::zero();
        for s in 0..self.basis.n_sites() {
            for n in 0..fd {
                let k = self.basis.index(s, n);
                n_phonon += R::of(n as f64) * rho[[k, k]].re;
            }
        }
        let purity = rho.iter().map(|c| c.norm_sqr()).sum();

        let c12 = pair_concurrence(rho, self.basis, 0, 1);
        let c34 = if self.basis.n_sites() >= 4 {
            pair_concurrence(rho, self.basis, 2, 3)
        } else {
            R::zero()
        };

        Record {
            p_monomer,
            p_exciton_donor,
            p_exciton_acceptor,
            p_w_acceptor,
            n_phonon,
            purity,
            c12,
            c34,
        }
    }
}

fn pair_concurrence<R: Scalar>(rho: &Array2<Complex<R>>, basis: ManifoldBasis, i: usize, j: usize) -> R {
    let reduced = reduced_two_qubit_state(rho, &basis, i, j).expect("pair indices validated");
    analysis::concurrence(&reduced).unwrap_or(R::zero())
}

/// Adaptive-step integrator controls.
#[derive(Debug, Clone, Copy)]
pub struct IntegratorOptions<R: Scalar> {
    pub rtol: R,
    pub atol: R,
    pub max_steps: usize,
}

impl<R: Scalar> Default for IntegratorOptions<R> {
    fn default() -> Self {
        Self { rtol: R::of(1e-8), atol: R::of(1e-10), max_steps: 50_000_000 }
    }
}

impl<R: Scalar> IntegratorOptions<R> {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self { rtol: R::of(rtol), atol: R::of(atol), ..Self::default() }
    }
}

/// Interaction-picture generator: sparse rotating coherent part plus
/// rotation-invariant dissipators.
struct Generator<R: Scalar> {
    dim: usize,
    fock_dim: usize,
    /// Off-diagonal Hamiltonian entries (row, col, value, rotation
    /// frequency D_row - D_col), both triangles.
    triplets: Vec<(usize, usize, Complex<R>, R)>,
    /// Hamiltonian diagonal, for back-rotation into the lab frame.
    diag: Vec<R>,
    gamma_cool: R,
    gamma_heat: R,
    gamma_d4: R,
}

impl<R: Scalar> Generator<R> {
    fn new(h: &JointOperator<R>, channels: &ChannelSet<R>) -> Result<Self> {
        if channels.gamma < R::zero() || channels.nbar < R::zero() || channels.gamma_d < R::zero()
        {
            return Err(Error::param("channel rates must be non-negative"));
        }
        let basis = h.basis();
        let m = h.matrix();
        let dim = basis.dim();
        let mut diag = Vec::with_capacity(dim);
        for k in 0..dim {
            diag.push(m[[k, k]].re);
        }
        let mut triplets = Vec::new();
        for r in 0..dim {
            for c in 0..dim {
                if r != c && m[[r, c]].norm_sqr() > R::zero() {
                    triplets.push((r, c, m[[r, c]], diag[r] - diag[c]));
                }
            }
        }
        Ok(Self {
            dim,
            fock_dim: basis.fock_dim(),
            triplets,
            diag,
            gamma_cool: channels.gamma * (channels.nbar + R::one()),
            gamma_heat: channels.gamma * channels.nbar,
            gamma_d4: R::of(4.0) * channels.gamma_d,
        })
    }

    /// d rho / dt in the rotating frame. `scratch` holds H(t) rho.
    fn rhs(
        &self,
        t: R,
        rho: &Array2<Complex<R>>,
        scratch: &mut Array2<Complex<R>>,
        out: &mut Array2<Complex<R>>,
    ) {
        let dim = self.dim;
        scratch.fill(Complex::new(R::zero(), R::zero()));
        for &(r, c, v, w) in &self.triplets {
            let ph = (w * t).sin_cos();
            let val = v * Complex::new(ph.1, ph.0);
            // scratch[r, :] += val * rho[c, :]
            for k in 0..dim {
                let x = rho[[c, k]];
                scratch[[r, k]] += val * x;
            }
        }
        // Coherent part -i (A - A†) keeps Hermiticity exactly.
        for r in 0..dim {
            for c in r..dim {
                let a = scratch[[r, c]];
                let b = scratch[[c, r]];
                let d = a - b.conj();
                // -i d and its conjugate: the result is Hermitian.
                out[[r, c]] = Complex::new(d.im, -d.re);
                out[[c, r]] = Complex::new(d.im, d.re);
            }
        }

        let fd = self.fock_dim;
        let half = R::of(0.5);
        if self.gamma_cool > R::zero() || self.gamma_heat > R::zero() {
            let sq: Vec<R> = (0..fd).map(|n| R::of(n as f64).sqrt()).collect();
            for r in 0..dim {
                let nr = r % fd;
                for c in 0..dim {
                    let nc = c % fd;
                    let mut acc = Complex::new(R::zero(), R::zero());
                    if self.gamma_cool > R::zero() {
                        if nr + 1 < fd && nc + 1 < fd {
                            acc += rho[[r + 1, c + 1]]
                                .scale(self.gamma_cool * sq[nr + 1] * sq[nc + 1]);
                        }
                        acc -= rho[[r, c]]
                            .scale(self.gamma_cool * half * R::of((nr + nc) as f64));
                    }
                    if self.gamma_heat > R::zero() {
                        if nr > 0 && nc > 0 {
                            acc += rho[[r - 1, c - 1]].scale(self.gamma_heat * sq[nr] * sq[nc]);
                        }
                        // Anticommutator weights of the truncated a a†:
                        // the top Fock level contributes nothing, so the
                        // channel stays exactly trace-preserving on the
                        // truncated space.
                        let wr = if nr + 1 < fd { nr + 1 } else { 0 };
                        let wc = if nc + 1 < fd { nc + 1 } else { 0 };
                        acc -= rho[[r, c]]
                            .scale(self.gamma_heat * half * R::of((wr + wc) as f64));
                    }
                    out[[r, c]] += acc;
                }
            }
        }
        if self.gamma_d4 > R::zero() {
            for r in 0..dim {
                let sr = r / fd;
                for c in 0..dim {
                    if sr != c / fd {
                        out[[r, c]] -= rho[[r, c]].scale(self.gamma_d4);
                    }
                }
            }
        }
    }

    /// Rotating frame -> lab frame at time t.
    fn to_lab(&self, t: R, rho: &Array2<Complex<R>>) -> Array2<Complex<R>> {
        let dim = self.dim;
        let mut out = Array2::zeros((dim, dim));
        for r in 0..dim {
            for c in 0..dim {
                let w = self.diag[r] - self.diag[c];
                let ph = (-w * t).sin_cos();
                out[[r, c]] = rho[[r, c]] * Complex::new(ph.1, ph.0);
            }
        }
        out
    }
}

/// Dormand-Prince 5(4) coefficients.
const DP_C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 6] = [
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Difference between the 5th-order weights and the embedded 4th-order
/// weights, applied to k1..k7 for the error estimate.
const DP_E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

struct Stepper<R: Scalar> {
    k: Vec<Array2<Complex<R>>>,
    y_stage: Array2<Complex<R>>,
    y_next: Array2<Complex<R>>,
    scratch: Array2<Complex<R>>,
    err_prev: R,
    first_same_as_last: bool,
}

impl<R: Scalar> Stepper<R> {
    fn new(dim: usize) -> Self {
        Self {
            k: (0..7).map(|_| Array2::zeros((dim, dim))).collect(),
            y_stage: Array2::zeros((dim, dim)),
            y_next: Array2::zeros((dim, dim)),
            scratch: Array2::zeros((dim, dim)),
            err_prev: R::of(1e-2),
            first_same_as_last: false,
        }
    }

    /// One attempted step from (t, y) with size h. On acceptance writes
    /// the result into y and returns (true, suggested next h); on
    /// rejection y is untouched and a smaller h is returned.
    fn step(
        &mut self,
        gen: &Generator<R>,
        t: R,
        y: &mut Array2<Complex<R>>,
        h: R,
        opts: &IntegratorOptions<R>,
    ) -> (bool, R) {
        if !self.first_same_as_last {
            let (k0, rest) = self.k.split_first_mut().unwrap();
            let _ = rest;
            gen.rhs(t, y, &mut self.scratch, k0);
        }
        for stage in 0..6 {
            self.y_stage.assign(y);
            for (j, row) in DP_A[stage].iter().enumerate().take(stage + 1) {
                let w = R::of(*row) * h;
                if *row != 0.0 {
                    ndarray::Zip::from(&mut self.y_stage)
                        .and(&self.k[j])
                        .for_each(|ys, kj| *ys += kj.scale(w));
                }
            }
            let ts = t + R::of(DP_C[stage]) * h;
            let (before, after) = self.k.split_at_mut(stage + 1);
            let _ = before;
            gen.rhs(ts, &self.y_stage, &mut self.scratch, &mut after[0]);
        }
        // 5th-order solution is the last stage value (FSAL pair): stage 6
        // used a71..a76 weights, so y_stage currently holds y_next and
        // k[6] its derivative.
        self.y_next.assign(&self.y_stage);

        // Error estimate and WRMS norm.
        let mut err_sq = R::zero();
        let n = self.y_next.len();
        {
            let ks: Vec<&Array2<Complex<R>>> = self.k.iter().collect();
            let y_flat = y.as_slice().unwrap();
            let yn_flat = self.y_next.as_slice().unwrap();
            let kf: Vec<&[Complex<R>]> = ks.iter().map(|a| a.as_slice().unwrap()).collect();
            for idx in 0..n {
                let mut e = Complex::new(R::zero(), R::zero());
                for s in 0..7 {
                    if DP_E[s] != 0.0 {
                        e += kf[s][idx].scale(R::of(DP_E[s]));
                    }
                }
                let e = e.scale(h);
                let scale = opts.atol
                    + opts.rtol * y_flat[idx].norm().max(yn_flat[idx].norm());
                let ratio = e.norm() / scale;
                err_sq += ratio * ratio;
            }
        }
        let err = (err_sq / R::of(n as f64)).sqrt().max(R::of(1e-30));

        let order_inv = R::of(0.2);
        if err <= R::one() {
            // PI controller.
            let fac = R::of(0.9)
                * err.powf(-order_inv * R::of(0.7))
                * self.err_prev.powf(order_inv * R::of(0.4));
            let fac = fac.min(R::of(5.0)).max(R::of(0.2));
            y.assign(&self.y_next);
            self.k.swap(0, 6);
            self.first_same_as_last = true;
            self.err_prev = err;
            (true, h * fac)
        } else {
            let fac = (R::of(0.9) * err.powf(-order_inv)).max(R::of(0.1));
            // k[0] is still the derivative at (t, y).
            self.first_same_as_last = true;
            (false, h * fac)
        }
    }
}

/// Integrates the master equation
/// `d rho/dt = -i[H, rho] + gamma (nbar+1) L_a + gamma nbar L_a† + gamma_d sum_j L_sigma_j^z`
/// from `rho0` to `t_final`, recording observables at the given grid
/// times. Default tolerances; see [`evolve_with_options`].
pub fn evolve<R: Scalar>(
    h: &JointOperator<R>,
    channels: &ChannelSet<R>,
    rho0: &DensityMatrix<R>,
    t_final: R,
    grid: &[R],
    observables: &ObservableSet<R>,
) -> Result<Trajectory<R>> {
    evolve_with_options(h, channels, rho0, t_final, grid, observables, &IntegratorOptions::default())
}

/// [`evolve`] with explicit integrator controls.
pub fn evolve_with_options<R: Scalar>(
    h: &JointOperator<R>,
    channels: &ChannelSet<R>,
    rho0: &DensityMatrix<R>,
    t_final: R,
    grid: &[R],
    observables: &ObservableSet<R>,
    opts: &IntegratorOptions<R>,
) -> Result<Trajectory<R>> {
    if !(t_final > R::zero()) {
        return Err(Error::param("t_final must be positive"));
    }
    if grid.is_empty() {
        return Err(Error::param("record grid must not be empty"));
    }
    for w in grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::param("record grid must be strictly increasing"));
        }
    }
    if grid[0] < R::zero() || *grid.last().unwrap() > t_final + R::of(1e-12) {
        return Err(Error::param("record grid must lie in [0, t_final]"));
    }
    let dim = h.basis().dim();
    if rho0.dim() != dim {
        return Err(Error::param("initial state dimension does not match the Hamiltonian"));
    }
    if observables.basis().dim() != dim || observables.basis().n_sites() != h.basis().n_sites() {
        return Err(Error::param("observable set built for a different basis"));
    }
    if !h.is_hermitian() {
        return Err(Error::param("evolution needs a Hermitian Hamiltonian"));
    }

    let gen = Generator::new(h, channels)?;
    let mut stepper = Stepper::new(dim);
    let mut y = rho0.matrix().clone();
    let mut t = R::zero();

    let mut times = Vec::with_capacity(grid.len());
    let mut records = Vec::with_capacity(grid.len());
    let mut cutoff_warning = false;
    let mut positivity_warning = false;
    let mut max_trace_drift = R::zero();
    let mut max_top_fock = R::zero();

    let record_at = |t_rec: R,
                     state: &Array2<Complex<R>>,
                     cutoff_warning: &mut bool,
                     positivity_warning: &mut bool,
                     max_trace_drift: &mut R,
                     max_top_fock: &mut R|
     -> Result<Array2<Complex<R>>> {
        let mut lab = gen.to_lab(t_rec, state);
        let tr = linalg::trace(&lab);
        let drift = ((tr.re - R::one()).abs()).max(tr.im.abs());
        *max_trace_drift = (*max_trace_drift).max(drift);
        if drift > R::of(1e-6) {
            return Err(Error::integration(format!(
                "trace drifted by {:e} at t = {:.3}; tolerances too loose",
                drift.as_f64(),
                t_rec.as_f64()
            )));
        }
        // The generator is exactly trace-preserving, so the drift gauges
        // integrator error; observables are reported for the unit-trace
        // state so that roundoff never breaks the population-sum contract.
        let inv = R::one() / tr.re;
        lab.mapv_inplace(|x| x.scale(inv));
        let herm = linalg::hermiticity_deviation(&lab);
        if herm > R::of(1e-8) {
            return Err(Error::integration(format!(
                "hermiticity broke by {:e} at t = {:.3}",
                herm.as_f64(),
                t_rec.as_f64()
            )));
        }
        if !linalg::cholesky_probe(&lab, R::of(1e-8)) {
            if linalg::cholesky_probe(&lab, R::of(1e-6)) {
                *positivity_warning = true;
            } else {
                return Err(Error::integration(format!(
                    "state left the positive cone beyond 1e-6 at t = {:.3}",
                    t_rec.as_f64()
                )));
            }
        }
        let basis = observables.basis();
        let fd = basis.fock_dim();
        let mut top = R::zero();
        for s in 0..basis.n_sites() {
            let k = basis.index(s, fd - 1);
            top += lab[[k, k]].re;
        }
        *max_top_fock = (*max_top_fock).max(top);
        if top > R::of(1e-4) {
            *cutoff_warning = true;
        }
        Ok(lab)
    };

    let mut h_step = initial_step(&gen, &y, opts);
    let mut steps = 0usize;
    let mut grid_iter = grid.iter().peekable();

    // Record any grid point at t = 0 before stepping.
    while let Some(&&g) = grid_iter.peek() {
        if g <= R::zero() {
            let lab = record_at(
                g,
                &y,
                &mut cutoff_warning,
                &mut positivity_warning,
                &mut max_trace_drift,
                &mut max_top_fock,
            )?;
            let rec = observables.measure(&lab);
            check_record(&rec, g)?;
            times.push(g);
            records.push(rec);
            grid_iter.next();
        } else {
            break;
        }
    }

    while t < t_final {
        let next_stop = grid_iter.peek().map(|&&g| g).unwrap_or(t_final);
        let target = next_stop.min(t_final);
        if target - t <= R::of(1e-14) * target.max(R::one()) {
            // Window too narrow to step across; flush the record here.
            if let Some(&&g) = grid_iter.peek() {
                let lab = record_at(
                    g,
                    &y,
                    &mut cutoff_warning,
                    &mut positivity_warning,
                    &mut max_trace_drift,
                    &mut max_top_fock,
                )?;
                let rec = observables.measure(&lab);
                check_record(&rec, g)?;
                times.push(g);
                records.push(rec);
                grid_iter.next();
                continue;
            }
            break;
        }
        let h_try = h_step.min(target - t);
        let (accepted, h_next) = stepper.step(&gen, t, &mut y, h_try, opts);
        if accepted {
            t += h_try;
            // Keep the controller's suggestion, not the clamped size.
            h_step = if h_try < h_step { h_step } else { h_next };
            if t + R::of(1e-14) >= target && target < t_final + R::of(1e-14) {
                if let Some(&&g) = grid_iter.peek() {
                    if t + R::of(1e-12) >= g {
                        let lab = record_at(
                            g,
                            &y,
                            &mut cutoff_warning,
                            &mut positivity_warning,
                            &mut max_trace_drift,
                            &mut max_top_fock,
                        )?;
                        let rec = observables.measure(&lab);
                        check_record(&rec, g)?;
                        times.push(g);
                        records.push(rec);
                        grid_iter.next();
                    }
                }
            }
        } else {
            h_step = h_next;
            if h_step < R::of(1e-13) * t.max(R::one()) {
                return Err(Error::integration(format!(
                    "step size collapsed at t = {:.6}",
                    t.as_f64()
                )));
            }
        }
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::integration(format!(
                "exceeded {} steps at t = {:.6}; generator may be stiffer than expected",
                opts.max_steps,
                t.as_f64()
            )));
        }
    }

    // Any grid points at exactly t_final that were not flushed above.
    while let Some(&&g) = grid_iter.peek() {
        let lab = record_at(
            g,
            &y,
            &mut cutoff_warning,
            &mut positivity_warning,
            &mut max_trace_drift,
            &mut max_top_fock,
        )?;
        let rec = observables.measure(&lab);
        check_record(&rec, g)?;
        times.push(g);
        records.push(rec);
        grid_iter.next();
    }

    let mut lab_final = gen.to_lab(t_final, &y);
    let tr = linalg::trace(&lab_final);
    let inv = R::one() / tr.re;
    let adj = linalg::adjoint(&lab_final);
    ndarray::Zip::from(&mut lab_final).and(&adj).for_each(|o, &a| {
        *o = (*o + a).scale(R::of(0.5) * inv);
    });
    let final_state = DensityMatrix::new(lab_final).map_err(|e| {
        Error::integration(format!("final state failed validation: {e}"))
    })?;

    Ok(Trajectory {
        times,
        records,
        final_state,
        cutoff_warning,
        positivity_warning,
        max_trace_drift,
        max_top_fock,
    })
}

fn check_record<R: Scalar>(rec: &Record<R>, t: R) -> Result<()> {
    let lo = R::of(-1e-8);
    let hi = R::one() + R::of(1e-8);
    let mut total = R::zero();
    for &p in &rec.p_monomer {
        if p < lo || p > hi {
            return Err(Error::integration(format!(
                "monomer population {:e} out of range at t = {:.3}",
                p.as_f64(),
                t.as_f64()
            )));
        }
        total += p;
    }
    if (total - R::one()).abs() > R::of(1e-8) {
        return Err(Error::integration(format!(
            "monomer populations sum to {} at t = {:.3}",
            total.as_f64(),
            t.as_f64()
        )));
    }
    for &p in rec.p_exciton_donor.iter().chain(&rec.p_exciton_acceptor) {
        if p < lo || p > hi {
            return Err(Error::integration(format!(
                "exciton population {:e} out of range at t = {:.3}",
                p.as_f64(),
                t.as_f64()
            )));
        }
    }
    Ok(())
}

fn initial_step<R: Scalar>(
    gen: &Generator<R>,
    y0: &Array2<Complex<R>>,
    opts: &IntegratorOptions<R>,
) -> R {
    let dim = y0.nrows();
    let mut scratch = Array2::zeros((dim, dim));
    let mut f0 = Array2::zeros((dim, dim));
    gen.rhs(R::zero(), y0, &mut scratch, &mut f0);
    // Tolerance-scaled norms of the state and its derivative, so the first
    // trial step matches the requested accuracy regime.
    let mut d0 = R::zero();
    let mut d1 = R::zero();
    for (y, f) in y0.iter().zip(f0.iter()) {
        let sc = opts.atol + opts.rtol * y.norm();
        let a = y.norm() / sc;
        let b = f.norm() / sc;
        d0 = d0 + a * a;
        d1 = d1 + b * b;
    }
    let n = R::of((dim * dim) as f64);
    let d0 = (d0 / n).sqrt();
    let d1 = (d1 / n).sqrt();
    let h = if d1 > R::of(1e-12) {
        (d0.max(R::of(1e-3)) / d1) * R::of(1e-2)
    } else {
        R::of(1e-3)
    };
    h.min(R::of(0.1)).max(R::of(1e-8))
}

/// Uniform record grid over [0, t_final] with `n` points, endpoints
/// included.
pub fn linspace_grid<R: Scalar>(t_final: R, n: usize) -> Vec<R> {
    assert!(n >= 2, "need at least the two endpoints");
    let step = t_final / R::of((n - 1) as f64);
    (0..n).map(|k| step * R::of(k as f64)).collect()
}

/// Mean occupancy of a bosonic mode of frequency `omega` in contact with
/// a bath at temperature `kt` (both in the same energy units):
/// `nbar = 1/(e^{omega/kt} - 1)`.
pub fn occupancy_from_temperature<R: Scalar>(omega: R, kt: R) -> R {
    if !(kt > R::zero()) {
        return R::zero();
    }
    R::one() / ((omega / kt).exp() - R::one())
}

/// Inverse of [`occupancy_from_temperature`]:
/// `kt = omega / ln(1 + 1/nbar)`.
pub fn temperature_from_occupancy<R: Scalar>(omega: R, nbar: R) -> R {
    if !(nbar > R::zero()) {
        return R::zero();
    }
    omega / (R::one() + R::one() / nbar).ln()
}

/// Thermal initial state: the chosen electronic amplitudes, with the mode
/// in a geometric mixture of displaced Fock states
/// `rho_mode = sum_n nbar^n/(1+nbar)^{n+1} |n; alpha><n; alpha|`,
/// displaced by the electronic pattern's equilibrium `alpha`.
///
/// The geometric tail beyond the cutoff must be below 1e-8; the retained
/// weights are renormalized so the state has exactly unit trace.
pub fn thermal_initial_state<R: Scalar>(
    electronic: &[R],
    nbar: R,
    params: &ModelParams<R>,
    realization: Option<&DisorderRealization<R>>,
) -> Result<DensityMatrix<R>> {
    params.validate()?;
    if nbar < R::zero() {
        return Err(Error::param("nbar must be non-negative"));
    }
    let n_sites = params.n_sites();
    if electronic.len() != n_sites {
        return Err(Error::param("electronic amplitudes must cover every site"));
    }
    let norm2: R = electronic.iter().map(|&c| c * c).sum();
    if (norm2 - R::one()).abs() > R::of(1e-10) {
        return Err(Error::state("electronic amplitudes are not normalized"));
    }
    let basis = crate::hilbert::build_manifold_basis(n_sites, params.phonon_cutoff)?;
    let fd = basis.fock_dim();

    let ratio = nbar / (nbar + R::one());
    let tail = ratio.powi(fd as i32);
    if tail > R::of(1e-8) {
        return Err(Error::convergence(format!(
            "thermal tail mass {:e} above 1e-8 at cutoff {}; raise phonon_cutoff",
            tail.as_f64(),
            params.phonon_cutoff
        )));
    }
    let mut weights: Vec<R> = (0..fd)
        .map(|n| ratio.powi(n as i32) / (nbar + R::one()))
        .collect();
    let total: R = weights.iter().copied().sum();
    for w in &mut weights {
        *w = *w / total;
    }

    let alpha = support_weighted_alpha(params, electronic, realization);

    // Exactly unitary displacement of the whole Fock ladder at once; the
    // truncation error is the weighted mass the ideal displaced states
    // carry beyond the cutoff.
    let mut clipped = R::zero();
    for (n, &w) in weights.iter().enumerate() {
        let kept: R = (0..fd)
            .map(|m| {
                let o = crate::hilbert::displaced_fock_overlap(alpha, m, n);
                o * o
            })
            .sum();
        clipped += w * (R::one() - kept).max(R::zero());
    }
    if clipped > R::of(1e-8) {
        return Err(Error::convergence(format!(
            "thermal mixture loses {:e} of its mass beyond the cutoff; raise phonon_cutoff",
            clipped.as_f64()
        )));
    }
    let a = crate::hilbert::fock_annihilation::<R>(fd);
    let mut generator = linalg::adjoint(&a);
    let ca = Complex::new(alpha, R::zero());
    for r in 0..fd {
        for c in 0..fd {
            generator[[r, c]] = ca * (generator[[r, c]] - a[[r, c]]);
        }
    }
    let d = linalg::expm(&generator)?;
    let mut mode = Array2::<Complex<R>>::zeros((fd, fd));
    for (n, &w) in weights.iter().enumerate() {
        if w < R::of(1e-300) {
            continue;
        }
        for r in 0..fd {
            for c in 0..fd {
                mode[[r, c]] += (d[[r, n]] * d[[c, n]].conj()).scale(w);
            }
        }
    }

    let dim = basis.dim();
    let mut rho = Array2::zeros((dim, dim));
    for sa in 0..n_sites {
        for sb in 0..n_sites {
            let amp = electronic[sa] * electronic[sb];
            if amp == R::zero() {
                continue;
            }
            for r in 0..fd {
                for c in 0..fd {
                    rho[[basis.index(sa, r), basis.index(sb, c)]] = mode[[r, c]].scale(amp);
                }
            }
        }
    }
    DensityMatrix::new(rho)
}

/// Convenience wrapper: thermal state of a named electronic pattern.
pub fn thermal_pattern_state<R: Scalar>(
    pattern: ElectronicPattern,
    nbar: R,
    params: &ModelParams<R>,
    realization: Option<&DisorderRealization<R>>,
) -> Result<DensityMatrix<R>> {
    let amps = electronic_amplitudes(params, pattern)?;
    thermal_initial_state(&amps, nbar, params, realization)
}

/// Dense matrix of the full generator acting on row-major vectorized
/// states: `vec(A rho B) = (A ⊗ B^T) vec(rho)`.
pub fn liouvillian_matrix<R: Scalar>(
    h: &JointOperator<R>,
    channels: &ChannelSet<R>,
) -> Result<Array2<Complex<R>>> {
    let basis = h.basis();
    let dim = basis.dim();
    if dim > 64 {
        return Err(Error::param(format!(
            "dense generator for dimension {dim} would need {:.1} GiB; \
             use evolve for large models",
            (dim as f64).powi(4) * 16.0 / (1024.0 * 1024.0 * 1024.0)
        )));
    }
    let eye = linalg::identity::<R>(dim);
    let hm = h.matrix();
    let mut l = Array2::<Complex<R>>::zeros((dim * dim, dim * dim));

    // -i (H ⊗ 1 - 1 ⊗ H^T)
    let ht = hm.t().to_owned();
    let a = linalg::kron(hm, &eye);
    let b = linalg::kron(&eye, &ht);
    let mi = Complex::new(R::zero(), -R::one());
    ndarray::Zip::from(&mut l).and(&a).and(&b).for_each(|lo, &x, &y| *lo = mi * (x - y));

    let (aop, adag, _) = crate::hilbert::boson_ops::<R>(&basis);
    let add_channel = |l: &mut Array2<Complex<R>>, op: &Array2<Complex<R>>, rate: R| {
        if rate <= R::zero() {
            return;
        }
        let opd = linalg::adjoint(op);
        let opdop = linalg::matmul(&opd, op);
        let sandwich = linalg::kron(op, &opd.t().to_owned());
        let left = linalg::kron(&opdop, &eye);
        let right = linalg::kron(&eye, &opdop.t().to_owned());
        let half = R::of(0.5);
        ndarray::Zip::from(l).and(&sandwich).and(&left).and(&right).for_each(
            |lo, &s, &le, &ri| {
                *lo += (s - (le + ri).scale(half)).scale(rate);
            },
        );
    };
    add_channel(&mut l, aop.matrix(), channels.gamma * (channels.nbar + R::one()));
    add_channel(&mut l, adag.matrix(), channels.gamma * channels.nbar);
    if channels.gamma_d > R::zero() {
        for site in 0..basis.n_sites() {
            let z = crate::hilbert::sigma_z_manifold::<R>(&basis, site)?;
            add_channel(&mut l, z.matrix(), channels.gamma_d);
        }
    }
    Ok(l)
}

/// Steady state of the generator with a residual certificate.
#[derive(Debug, Clone)]
pub struct SteadySolution<R: Scalar> {
    pub rho: DensityMatrix<R>,
    /// Frobenius norm of the generator applied to the solution.
    pub residual: R,
    /// The linear solve hit a (near-)singular pivot beyond the expected
    /// single trace direction: the steady manifold is likely degenerate
    /// and this is one representative.
    pub degenerate: bool,
}

/// Null vector of the generator with unit trace, from a dense solve: the
/// trace-normalization row replaces the first diagonal-element row, which
/// is linearly dependent on the others through trace preservation.
pub fn steady_state<R: Scalar>(
    h: &JointOperator<R>,
    channels: &ChannelSet<R>,
) -> Result<SteadySolution<R>> {
    if !(channels.gamma > R::zero()) {
        return Err(Error::param("steady state needs gamma > 0"));
    }
    let dim = h.basis().dim();
    // The dense vectorized solve scales as dim^6; beyond this the
    // trajectory route is the only practical one.
    if dim > 64 {
        return Err(Error::param(format!(
            "dense steady-state solve is limited to joint dimension 64, got {dim}"
        )));
    }
    let l = liouvillian_matrix(h, channels)?;
    let n2 = dim * dim;

    let mut m = l.clone();
    for c in 0..n2 {
        m[[0, c]] = Complex::new(R::zero(), R::zero());
    }
    for k in 0..dim {
        m[[0, k * dim + k]] = Complex::new(R::one(), R::zero());
    }
    let mut rhs = vec![Complex::new(R::zero(), R::zero()); n2];
    rhs[0] = Complex::new(R::one(), R::zero());

    let mut degenerate = false;
    let solved = match linalg::LuFactors::factor(&m) {
        Ok(f) => {
            let mut x = rhs.clone();
            f.solve_in_place(&mut x);
            // One refinement pass against the replaced-row system.
            let mut r = rhs.clone();
            for row in 0..n2 {
                let mut acc = Complex::new(R::zero(), R::zero());
                for col in 0..n2 {
                    acc += m[[row, col]] * x[col];
                }
                r[row] -= acc;
            }
            let mut dx = r;
            f.solve_in_place(&mut dx);
            for k in 0..n2 {
                x[k] += dx[k];
            }
            x
        }
        Err(_) => {
            degenerate = true;
            // Singular replaced-row system: the steady manifold has more
            // than one element. Ridge-regularized normal equations pick
            // the minimum-norm solution, which carries no arbitrary
            // kernel admixture.
            let mh = linalg::adjoint(&m);
            let mut a = linalg::matmul(&mh, &m);
            let eps = R::of(1e-12) * linalg::one_norm(&a);
            for k in 0..n2 {
                a[[k, k]] += Complex::new(eps, R::zero());
            }
            let mut b = vec![Complex::new(R::zero(), R::zero()); n2];
            for row in 0..n2 {
                let mut acc = Complex::new(R::zero(), R::zero());
                for col in 0..n2 {
                    acc += mh[[row, col]] * rhs[col];
                }
                b[row] = acc;
            }
            let f = linalg::LuFactors::factor(&a)?;
            let mut x = b.clone();
            f.solve_in_place(&mut x);
            // Iterated ridge refinement against the original system
            // shrinks the regularization bias geometrically.
            for _ in 0..3 {
                let mut r = rhs.clone();
                for row in 0..n2 {
                    let mut acc = Complex::new(R::zero(), R::zero());
                    for col in 0..n2 {
                        acc += m[[row, col]] * x[col];
                    }
                    r[row] -= acc;
                }
                let mut dx = vec![Complex::new(R::zero(), R::zero()); n2];
                for row in 0..n2 {
                    let mut acc = Complex::new(R::zero(), R::zero());
                    for col in 0..n2 {
                        acc += mh[[row, col]] * r[col];
                    }
                    dx[row] = acc;
                }
                f.solve_in_place(&mut dx);
                for k in 0..n2 {
                    x[k] += dx[k];
                }
            }
            x
        }
    };

    let mut rho = Array2::zeros((dim, dim));
    for r in 0..dim {
        for c in 0..dim {
            rho[[r, c]] = solved[r * dim + c];
        }
    }
    // Exact trace normalization and Hermitian symmetrization: the solve
    // returns the Hermitian fixed point up to roundoff.
    let tr = linalg::trace(&rho);
    let inv = Complex::new(R::one(), R::zero()) / tr;
    rho.mapv_inplace(|x| x * inv);
    let rho_h = {
        let adj = linalg::adjoint(&rho);
        let mut out = rho.clone();
        ndarray::Zip::from(&mut out).and(&adj).for_each(|o, &a| {
            *o = (*o + a).scale(R::of(0.5));
        });
        out
    };

    let mut residual_sq = R::zero();
    for row in 0..n2 {
        let mut acc = Complex::new(R::zero(), R::zero());
        for col in 0..n2 {
            acc += l[[row, col]] * rho_h[[col / dim, col % dim]];
        }
        residual_sq += acc.norm_sqr();
    }
    let residual = residual_sq.sqrt();
    if residual > R::of(1e-10) && !degenerate {
        degenerate = true;
    }

    let rho = DensityMatrix::new(rho_h)?;
    Ok(SteadySolution { rho, residual, degenerate })
}

/// Scenario shape for cutoff-convergence scans.
#[derive(Debug, Clone)]
pub struct ConvergenceScenario<R: Scalar> {
    pub pattern: ElectronicPattern,
    /// Mode occupancy of the initial thermal mixture (0 = displaced
    /// vacuum).
    pub init_nbar: R,
    pub t_final: R,
    pub n_records: usize,
}

impl<R: Scalar> ConvergenceScenario<R> {
    pub fn standard(t_final: R) -> Self {
        Self { pattern: ElectronicPattern::TopExciton, init_nbar: R::zero(), t_final, n_records: 81 }
    }
}

/// Repeats the scenario at increasing phonon cutoffs until the donor
/// population and mode occupancy curves change by less than `tolerance`
/// between consecutive cutoffs; returns the smaller cutoff of the first
/// such pair. Cutoffs whose thermal tail is too heavy are skipped.
pub fn cutoff_convergence<R: Scalar>(
    params: &ModelParams<R>,
    scenario: &ConvergenceScenario<R>,
    tolerance: R,
) -> Result<usize> {
    if !(tolerance > R::zero()) {
        return Err(Error::param("tolerance must be positive"));
    }
    params.validate()?;
    const LADDER: [usize; 13] = [1, 2, 3, 5, 8, 10, 15, 20, 25, 30, 40, 50, 60];
    let grid = linspace_grid(scenario.t_final, scenario.n_records);

    let run = |cutoff: usize| -> Result<Option<(Vec<R>, Vec<R>)>> {
        let mut p = params.clone();
        p.phonon_cutoff = cutoff;
        let amps = electronic_amplitudes(&p, scenario.pattern)?;
        let rho0 = match thermal_initial_state(&amps, scenario.init_nbar, &p, None) {
            Ok(r) => r,
            Err(Error::ConvergenceFailure(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        let h = crate::model::build_hamiltonian(&p, None)?;
        let channels = ChannelSet::from_params(&p)?;
        let obs = ObservableSet::for_model(&p)?;
        let opts = IntegratorOptions::with_tolerances(1e-8, 1e-10);
        let traj = evolve_with_options(&h, &channels, &rho0, scenario.t_final, &grid, &obs, &opts)?;
        let pd = traj.p_donor();
        let nph: Vec<R> = traj.records.iter().map(|r| r.n_phonon).collect();
        Ok(Some((pd, nph)))
    };

    let mut prev: Option<(usize, Vec<R>, Vec<R>)> = None;
    for &cutoff in LADDER.iter() {
        let Some((pd, nph)) = run(cutoff)? else {
            prev = None;
            continue;
        };
        if let Some((prev_cutoff, prev_pd, prev_nph)) = &prev {
            let dev_pd = pd
                .iter()
                .zip(prev_pd)
                .map(|(a, b)| (*a - *b).abs())
                .fold(R::zero(), R::max);
            let dev_n = nph
                .iter()
                .zip(prev_nph)
                .map(|(a, b)| (*a - *b).abs())
                .fold(R::zero(), R::max);
            if dev_pd < tolerance && dev_n < tolerance {
                return Ok(*prev_cutoff);
            }
        }
        prev = Some((cutoff, pd, nph));
    }
    Err(Error::convergence(
        "observables kept changing up to the cutoff cap of 60; the model may be heating",
    ))
}

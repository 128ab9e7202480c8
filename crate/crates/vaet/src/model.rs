//! Model assembly: lattice geometry, parameter schemes, exciton bases,
//! Hamiltonians and static disorder.
//!
//! A chain of `n_monomers` blocks with `sites_per_monomer` two-level sites
//! each sits on integer coordinates, with `coolants_per_gap` empty slots
//! between consecutive blocks. Electronic hopping decays as a power law of
//! the coordinate distance; every site couples to one shared bosonic mode
//! with a site-dependent sign.

use crate::error::Error;
use crate::hilbert::{build_manifold_basis, JointOperator};
use crate::linalg;
use crate::scalar::Scalar;
use crate::Result;
use ndarray::{Array1, Array2};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

pub mod rng;

/// Per-site energies `eps_j`, either from a named scheme or explicit.
///
/// Named schemes produce the energy parameter entering the Hamiltonian
/// diagonal as `eps_j / 2`:
/// * `symmetric` (2 monomers): donor sites `+eps`, acceptor sites `-eps`;
/// * `tilted` (any monomer count): monomer `m` (1-based) gets
///   `eps * (3 - 2m)`, a linear ramp `+eps, -eps, -3 eps, ...` whose
///   consecutive inter-monomer gaps all equal `eps`; for 2 monomers it
///   coincides with `symmetric`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum EnergyScheme<R> {
    Symmetric { epsilon: R },
    Tilted { epsilon: R },
    Explicit { values: Vec<R> },
}

/// Per-site mode couplings `g_j`, either alternating in sign per monomer
/// (`+g` on the donor, `-g` on the next, ...) or explicit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum CouplingScheme<R> {
    AlternatingSign { g: R },
    Explicit { values: Vec<R> },
}

/// Full static description of a model instance.
///
/// All energies are in units of the mode frequency unless `omega` is set
/// away from 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "R: Deserialize<'de> + Default"))]
pub struct ModelParams<R> {
    pub n_monomers: usize,
    pub sites_per_monomer: usize,
    /// Empty coordinate slots between consecutive monomers.
    pub coolants_per_gap: usize,
    /// Nearest-neighbor electronic coupling.
    pub j: R,
    /// Power-law exponent of the coupling decay.
    pub p: R,
    pub omega: R,
    pub epsilon_scheme: EnergyScheme<R>,
    pub g_scheme: CouplingScheme<R>,
    /// Mode relaxation rate.
    pub gamma: R,
    /// Bath mean occupancy.
    pub nbar: R,
    /// White-noise dephasing rate, identical for every site.
    #[serde(default)]
    pub gamma_d: R,
    pub phonon_cutoff: usize,
    /// Hopping beyond this coordinate distance is dropped when set.
    #[serde(default)]
    pub coupling_truncation: Option<R>,
    /// Flips the sign of every J_ij, exchanging the roles of the symmetric
    /// and antisymmetric exciton states. Exposed for completeness; the
    /// bundled studies keep it off.
    #[serde(default)]
    pub flip_j_sign: bool,
}

impl<R: Scalar> ModelParams<R> {
    /// Total number of two-level sites.
    pub fn n_sites(&self) -> usize {
        self.n_monomers * self.sites_per_monomer
    }

    /// Joint Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.n_sites() * (self.phonon_cutoff + 1)
    }

    /// Monomer index of a site.
    pub fn monomer_of(&self, site: usize) -> usize {
        site / self.sites_per_monomer
    }

    /// Checks the structural invariants shared by every consumer.
    pub fn validate(&self) -> Result<()> {
        if self.n_monomers < 2 {
            return Err(Error::param("need at least 2 monomers for transfer"));
        }
        if self.sites_per_monomer < 2 {
            return Err(Error::param("need at least 2 sites per monomer"));
        }
        if !(self.j > R::zero()) {
            return Err(Error::param("J must be positive"));
        }
        if !(self.omega > R::zero()) {
            return Err(Error::param("omega must be positive"));
        }
        if self.p < R::zero() {
            return Err(Error::param("power-law exponent must be non-negative"));
        }
        if self.gamma < R::zero() || self.nbar < R::zero() || self.gamma_d < R::zero() {
            return Err(Error::param("rates and occupations must be non-negative"));
        }
        if let Some(t) = self.coupling_truncation {
            if !(t > R::zero()) {
                return Err(Error::param("coupling truncation must be positive"));
            }
        }
        if let EnergyScheme::Symmetric { .. } = self.epsilon_scheme {
            if self.n_monomers != 2 {
                return Err(Error::param(
                    "symmetric energy scheme is defined for exactly 2 monomers; use tilted",
                ));
            }
        }
        if let EnergyScheme::Explicit { values } = &self.epsilon_scheme {
            if values.len() != self.n_sites() {
                return Err(Error::param("explicit energies must list every site"));
            }
        }
        if let CouplingScheme::Explicit { values } = &self.g_scheme {
            if values.len() != self.n_sites() {
                return Err(Error::param("explicit couplings must list every site"));
            }
        }
        Ok(())
    }

    /// Scheme-resolved per-site energies `eps_j`.
    pub fn site_energies(&self) -> Vec<R> {
        let n = self.n_sites();
        match &self.epsilon_scheme {
            EnergyScheme::Explicit { values } => values.clone(),
            EnergyScheme::Symmetric { epsilon } => (0..n)
                .map(|s| if self.monomer_of(s) == 0 { *epsilon } else { -*epsilon })
                .collect(),
            EnergyScheme::Tilted { epsilon } => (0..n)
                .map(|s| {
                    let m = self.monomer_of(s) as f64;
                    *epsilon * R::of(1.0 - 2.0 * m)
                })
                .collect(),
        }
    }

    /// Scheme-resolved per-site mode couplings `g_j`.
    pub fn site_couplings(&self) -> Vec<R> {
        let n = self.n_sites();
        match &self.g_scheme {
            CouplingScheme::Explicit { values } => values.clone(),
            CouplingScheme::AlternatingSign { g } => (0..n)
                .map(|s| if self.monomer_of(s) % 2 == 0 { *g } else { -*g })
                .collect(),
        }
    }

    /// Energy magnitude of the named scheme, when one is in use.
    pub fn scheme_epsilon(&self) -> Option<R> {
        match &self.epsilon_scheme {
            EnergyScheme::Symmetric { epsilon } | EnergyScheme::Tilted { epsilon } => {
                Some(*epsilon)
            }
            EnergyScheme::Explicit { .. } => None,
        }
    }

    /// Coupling magnitude of the named scheme, when one is in use.
    pub fn scheme_g(&self) -> Option<R> {
        match &self.g_scheme {
            CouplingScheme::AlternatingSign { g } => Some(*g),
            CouplingScheme::Explicit { .. } => None,
        }
    }

    /// Converts a parameter pair quoted in the spin-operator convention,
    /// where the diagonal reads `sum_i (eps_i/2) sigma_i^z` and the mode
    /// coupling `sum_i (g_i/2) sigma_i^z (a + a†)`, into the projector
    /// convention used here. Restricted to the single-excitation manifold
    /// the spin form equals the projector form with doubled coefficients,
    /// up to global shifts that vanish exactly when the scheme values sum
    /// to zero over sites (true for the bundled symmetric scheme and for
    /// alternating couplings with an even monomer count).
    pub fn doubled_from_spin_convention(epsilon: R, g: R) -> (R, R) {
        (epsilon + epsilon, g + g)
    }

    /// Same parameters at another precision (diagnostics and smoke tests).
    pub fn map_scalar<S: Scalar>(&self) -> ModelParams<S> {
        let conv = |x: R| S::of(x.as_f64());
        ModelParams {
            n_monomers: self.n_monomers,
            sites_per_monomer: self.sites_per_monomer,
            coolants_per_gap: self.coolants_per_gap,
            j: conv(self.j),
            p: conv(self.p),
            omega: conv(self.omega),
            epsilon_scheme: match &self.epsilon_scheme {
                EnergyScheme::Symmetric { epsilon } => {
                    EnergyScheme::Symmetric { epsilon: conv(*epsilon) }
                }
                EnergyScheme::Tilted { epsilon } => {
                    EnergyScheme::Tilted { epsilon: conv(*epsilon) }
                }
                EnergyScheme::Explicit { values } => EnergyScheme::Explicit {
                    values: values.iter().map(|&v| conv(v)).collect(),
                },
            },
            g_scheme: match &self.g_scheme {
                CouplingScheme::AlternatingSign { g } => {
                    CouplingScheme::AlternatingSign { g: conv(*g) }
                }
                CouplingScheme::Explicit { values } => CouplingScheme::Explicit {
                    values: values.iter().map(|&v| conv(v)).collect(),
                },
            },
            gamma: conv(self.gamma),
            nbar: conv(self.nbar),
            gamma_d: conv(self.gamma_d),
            phonon_cutoff: self.phonon_cutoff,
            coupling_truncation: self.coupling_truncation.map(conv),
            flip_j_sign: self.flip_j_sign,
        }
    }
}

/// Integer site coordinates and the pairwise distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeLayout {
    /// Coordinate of each site; coolant slots are skipped, not listed.
    pub positions: Vec<i64>,
    /// `|pos_i - pos_j|` (exact small integers in f64).
    pub distances: Array2<f64>,
    /// Monomer index of each site.
    pub monomer_of: Vec<usize>,
}

impl LatticeLayout {
    /// Site indices belonging to one monomer.
    pub fn monomer_sites(&self, m: usize) -> Vec<usize> {
        (0..self.positions.len()).filter(|&s| self.monomer_of[s] == m).collect()
    }
}

/// Places `n_monomers * sites_per_monomer` sites on integer coordinates
/// with `coolants_per_gap` skipped slots between monomers, so nearest
/// intra-monomer neighbors sit at distance 1 and facing sites of adjacent
/// monomers at distance `coolants_per_gap + 1`.
pub fn build_layout<R: Scalar>(params: &ModelParams<R>) -> Result<LatticeLayout> {
    params.validate()?;
    let (m, l, d) = (params.n_monomers, params.sites_per_monomer, params.coolants_per_gap);
    let stride = (l + d) as i64;
    let mut positions = Vec::with_capacity(m * l);
    let mut monomer_of = Vec::with_capacity(m * l);
    for block in 0..m {
        for site in 0..l {
            positions.push(block as i64 * stride + site as i64);
            monomer_of.push(block);
        }
    }
    let n = positions.len();
    let mut distances = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            distances[[i, j]] = (positions[i] - positions[j]).abs() as f64;
        }
    }
    Ok(LatticeLayout { positions, distances, monomer_of })
}

/// Power-law coupling matrix `J_ij = J / d_ij^p`, with entries beyond
/// `truncation` zeroed when given. Symmetric with zero diagonal.
pub fn coupling_matrix<R: Scalar>(
    layout: &LatticeLayout,
    j: R,
    p: R,
    truncation: Option<R>,
) -> Result<Array2<R>> {
    if !(j > R::zero()) {
        return Err(Error::param("J must be positive"));
    }
    if p < R::zero() {
        return Err(Error::param("power-law exponent must be non-negative"));
    }
    let n = layout.positions.len();
    let mut out = Array2::zeros((n, n));
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let dist = R::of(layout.distances[[a, b]]);
            if let Some(t) = truncation {
                if dist > t {
                    continue;
                }
            }
            out[[a, b]] = j / dist.powf(p);
        }
    }
    Ok(out)
}

/// The three independent exciton-basis couplings of a two-site dimer with
/// `d` coolant slots between the blocks, in closed form:
/// symmetric-symmetric, antisymmetric-antisymmetric, and the
/// symmetric-donor to antisymmetric-acceptor cross term (the reverse cross
/// term is its negative).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimerCouplings<R> {
    pub j_tt: R,
    pub j_ss: R,
    pub j_ts: R,
}

/// Evaluates the dimer exciton couplings from the three inter-block
/// distances `d+1`, `d+2`, `d+3`.
pub fn exciton_couplings_dimer<R: Scalar>(j: R, p: R, d: usize) -> DimerCouplings<R> {
    let half = R::of(0.5);
    let pw = |dist: f64| j / R::of(dist).powf(p);
    let near = pw(d as f64 + 1.0);
    let mid = pw(d as f64 + 2.0);
    let far = pw(d as f64 + 3.0);
    DimerCouplings {
        j_tt: half * near + mid + half * far,
        j_ss: -half * near + mid - half * far,
        j_ts: half * near - half * far,
    }
}

/// Exciton eigenbasis of one monomer block.
#[derive(Debug, Clone)]
pub struct ExcitonBasis<R: Scalar> {
    pub monomer_len: usize,
    /// Eigenvalues relative to the common on-site energy, descending.
    pub eigenvalues: Array1<R>,
    /// Orthonormal eigenvectors in matching columns, each with its first
    /// non-negligible component made positive.
    pub eigenvectors: Array2<R>,
    /// `|<E^m|W>|^2` against the uniform state, per eigenvector.
    pub w_overlap: Array1<R>,
    /// True when the top eigenvalue is degenerate within `1e-12 * scale`;
    /// the order among the tied vectors is then fixed lexicographically.
    pub degenerate_top: bool,
}

/// Diagonalizes the `L x L` intra-monomer coupling block (power-law
/// couplings at distances `|l - l'|`, common on-site energy excluded).
pub fn monomer_exciton_basis<R: Scalar>(l: usize, j: R, p: R) -> Result<ExcitonBasis<R>> {
    if !(2..=6).contains(&l) {
        return Err(Error::param(format!("monomer length {l} outside the supported range 2..=6")));
    }
    if !(p > R::zero()) {
        return Err(Error::param("power-law exponent must be positive for exciton analysis"));
    }
    if !(j > R::zero()) {
        return Err(Error::param("J must be positive"));
    }
    let mut block = Array2::zeros((l, l));
    for a in 0..l {
        for b in 0..l {
            if a != b {
                block[[a, b]] = j / R::of((a as f64 - b as f64).abs()).powf(p);
            }
        }
    }
    let (vals_asc, vecs_asc) = linalg::eigh_real(&block)?;
    let scale = linalg::frobenius_norm(&block.mapv(|x| Complex::new(x, R::zero())));

    let mut order: Vec<usize> = (0..l).collect();
    order.reverse(); // descending eigenvalues
    let mut eigenvalues = Array1::zeros(l);
    let mut eigenvectors = Array2::zeros((l, l));
    for (col, &src) in order.iter().enumerate() {
        eigenvalues[col] = vals_asc[src];
        let mut v: Vec<R> = (0..l).map(|r| vecs_asc[[r, src]]).collect();
        let lead = v.iter().find(|x| x.abs() > R::of(1e-8)).copied().unwrap_or(R::one());
        if lead < R::zero() {
            for x in &mut v {
                *x = -*x;
            }
        }
        for r in 0..l {
            eigenvectors[[r, col]] = v[r];
        }
    }

    let tie_tol = R::of(1e-12) * scale;
    let degenerate_top = l >= 2 && (eigenvalues[0] - eigenvalues[1]).abs() <= tie_tol;
    if degenerate_top {
        // Deterministic order inside the tied pair: lexicographically larger
        // sign-normalized vector first.
        let gt = |a: &[R], b: &[R]| -> bool {
            for (x, y) in a.iter().zip(b) {
                if (*x - *y).abs() > R::of(1e-12) {
                    return *x > *y;
                }
            }
            false
        };
        let c0: Vec<R> = (0..l).map(|r| eigenvectors[[r, 0]]).collect();
        let c1: Vec<R> = (0..l).map(|r| eigenvectors[[r, 1]]).collect();
        if gt(&c1, &c0) {
            for r in 0..l {
                eigenvectors.swap([r, 0], [r, 1]);
            }
            eigenvalues.swap(0, 1);
        }
    }

    let wnorm = R::of(l as f64).sqrt();
    let w_overlap = Array1::from_iter((0..l).map(|m| {
        let s: R = (0..l).map(|r| eigenvectors[[r, m]]).sum();
        (s / wnorm) * (s / wnorm)
    }));

    Ok(ExcitonBasis { monomer_len: l, eigenvalues, eigenvectors, w_overlap, degenerate_top })
}

/// Inter-monomer couplings between donor and acceptor exciton states for
/// two adjacent monomers of length `L` separated by `d` coolant slots.
#[derive(Debug, Clone)]
pub struct IntermonomerCouplings<R: Scalar> {
    /// Signed matrix elements in the orthonormal exciton bases,
    /// `[donor index, acceptor index]`, descending-eigenvalue order.
    pub orthonormal: Array2<R>,
    /// Magnitudes in the expansion-coefficient convention: eigenvectors
    /// rescaled to unit leading component, each column normalized by the
    /// acceptor vector's squared norm. This is the convention customary in
    /// tabulations of such couplings; unlike the orthonormal elements it is
    /// not symmetric under donor/acceptor exchange.
    pub expansion: Array2<R>,
}

/// Conjugates the donor-acceptor block of the coupling matrix with the two
/// exciton-basis transforms. Returns both normalization conventions; the
/// `expansion` magnitudes are what coupling tables conventionally list.
pub fn intermonomer_coupling_table<R: Scalar>(
    l: usize,
    j: R,
    p: R,
    d: usize,
) -> Result<IntermonomerCouplings<R>> {
    let basis = monomer_exciton_basis(l, j, p)?;
    // Donor block occupies coordinates 0..L, acceptor block L+d..2L+d.
    let mut v = Array2::zeros((l, l));
    for dl in 0..l {
        for al in 0..l {
            let dist = R::of((l + d + al - dl) as f64);
            v[[dl, al]] = j / dist.powf(p);
        }
    }
    let mut orthonormal = Array2::zeros((l, l));
    let mut expansion = Array2::zeros((l, l));
    let lead: Vec<R> = (0..l)
        .map(|m| {
            (0..l)
                .map(|r| basis.eigenvectors[[r, m]])
                .find(|x| x.abs() > R::of(1e-8))
                .unwrap_or(R::one())
        })
        .collect();
    for di in 0..l {
        for ai in 0..l {
            let mut s = R::zero();
            for dl in 0..l {
                for al in 0..l {
                    s += basis.eigenvectors[[dl, di]] * v[[dl, al]] * basis.eigenvectors[[al, ai]];
                }
            }
            orthonormal[[di, ai]] = s;
            expansion[[di, ai]] = (s * lead[ai] / lead[di]).abs();
        }
    }
    Ok(IntermonomerCouplings { orthonormal, expansion })
}

/// Static disorder applied to the scheme parameters: per-site values after
/// multiplying by independent Gaussian factors `(1 + delta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderRealization<R> {
    pub g_values: Vec<R>,
    pub epsilon_values: Vec<R>,
    pub seed: u64,
    pub sigma_g: f64,
    pub sigma_eps: f64,
}

/// Draws one disorder realization: `g_j -> g_j (1 + delta_j^g)` and
/// `eps_j -> eps_j (1 + delta_j^eps)` with independent zero-mean Gaussians
/// of relative widths `sigma_g`, `sigma_eps`. Draws are keyed by
/// `(seed, site, channel)`, so realizations are reproducible and
/// order-independent.
pub fn sample_disorder<R: Scalar>(
    params: &ModelParams<R>,
    sigma_g: f64,
    sigma_eps: f64,
    seed: u64,
) -> Result<DisorderRealization<R>> {
    if sigma_g < 0.0 || sigma_eps < 0.0 {
        return Err(Error::param("disorder widths must be non-negative"));
    }
    params.validate()?;
    let eps = params.site_energies();
    let g = params.site_couplings();
    let n = params.n_sites();
    let mut g_values = Vec::with_capacity(n);
    let mut epsilon_values = Vec::with_capacity(n);
    for site in 0..n {
        let dg = sigma_g * rng::gaussian(seed, 2 * site as u64);
        let de = sigma_eps * rng::gaussian(seed, 2 * site as u64 + 1);
        g_values.push(g[site] * R::of(1.0 + dg));
        epsilon_values.push(eps[site] * R::of(1.0 + de));
    }
    Ok(DisorderRealization { g_values, epsilon_values, seed, sigma_g, sigma_eps })
}

/// Assembles the joint-space Hamiltonian
/// `H = sum_j (eps_j/2)|j><j| ⊗ 1 + omega 1 ⊗ a†a
///    + sum_j (g_j/2)|j><j| ⊗ (a + a†) + sum_{i<j} J_ij (|i><j| + h.c.) ⊗ 1`,
/// with scheme parameters replaced by a disorder realization when given.
pub fn build_hamiltonian<R: Scalar>(
    params: &ModelParams<R>,
    realization: Option<&DisorderRealization<R>>,
) -> Result<JointOperator<R>> {
    params.validate()?;
    let layout = build_layout(params)?;
    let n = params.n_sites();
    let (eps, g) = match realization {
        Some(r) => {
            if r.g_values.len() != n || r.epsilon_values.len() != n {
                return Err(Error::param(format!(
                    "disorder realization covers {} sites, model has {n}",
                    r.g_values.len()
                )));
            }
            (r.epsilon_values.clone(), r.g_values.clone())
        }
        None => (params.site_energies(), params.site_couplings()),
    };
    let mut jmat = coupling_matrix(&layout, params.j, params.p, params.coupling_truncation)?;
    if params.flip_j_sign {
        jmat.mapv_inplace(|x| -x);
    }

    let basis = build_manifold_basis(n, params.phonon_cutoff)?;
    let dim = basis.dim();
    let fd = basis.fock_dim();
    let half = R::of(0.5);
    let mut h: Array2<Complex<R>> = Array2::zeros((dim, dim));
    for site in 0..n {
        for ph in 0..fd {
            let k = basis.index(site, ph);
            h[[k, k]] = Complex::new(
                half * eps[site] + params.omega * R::of(ph as f64),
                R::zero(),
            );
            if ph + 1 < fd {
                let v = half * g[site] * R::of((ph + 1) as f64).sqrt();
                let kk = basis.index(site, ph + 1);
                h[[k, kk]] = Complex::new(v, R::zero());
                h[[kk, k]] = Complex::new(v, R::zero());
            }
        }
        for other in site + 1..n {
            let jv = jmat[[site, other]];
            if jv == R::zero() {
                continue;
            }
            for ph in 0..fd {
                let r = basis.index(site, ph);
                let c = basis.index(other, ph);
                h[[r, c]] = Complex::new(jv, R::zero());
                h[[c, r]] = Complex::new(jv, R::zero());
            }
        }
    }
    JointOperator::new(basis, h, true)
}

/// Electronic amplitude vector (length `N`) for a named initial pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElectronicPattern {
    /// Symmetric two-site exciton on the donor monomer (its top exciton).
    /// Requires 2 sites per monomer.
    Triplet,
    /// Antisymmetric two-site exciton on the donor monomer.
    /// Requires 2 sites per monomer.
    Singlet,
    /// Excitation localized on one site.
    Product(usize),
    /// Highest-energy donor exciton for any monomer length.
    TopExciton,
    /// Uniform-amplitude state over the donor monomer.
    W,
}

/// Builds the electronic amplitudes of a named pattern on the donor
/// monomer (sites `0..L`).
pub fn electronic_amplitudes<R: Scalar>(
    params: &ModelParams<R>,
    pattern: ElectronicPattern,
) -> Result<Vec<R>> {
    params.validate()?;
    let n = params.n_sites();
    let l = params.sites_per_monomer;
    let mut amps = vec![R::zero(); n];
    match pattern {
        ElectronicPattern::Triplet | ElectronicPattern::Singlet => {
            if l != 2 {
                return Err(Error::param(
                    "triplet/singlet patterns are two-site excitons; use e1/w for longer monomers",
                ));
            }
            let inv = R::of(0.5).sqrt();
            amps[0] = inv;
            amps[1] = if matches!(pattern, ElectronicPattern::Triplet) { inv } else { -inv };
        }
        ElectronicPattern::Product(site) => {
            if site >= n {
                return Err(Error::param(format!("site {site} out of range for {n} sites")));
            }
            amps[site] = R::one();
        }
        ElectronicPattern::TopExciton => {
            let basis = monomer_exciton_basis(l, params.j, params.p)?;
            for r in 0..l {
                amps[r] = basis.eigenvectors[[r, 0]];
            }
        }
        ElectronicPattern::W => {
            let inv = R::one() / R::of(l as f64).sqrt();
            for r in 0..l {
                amps[r] = inv;
            }
        }
    }
    Ok(amps)
}

/// Coherent displacement that minimizes the mode energy under an electronic
/// amplitude pattern: `alpha = -(sum_j |c_j|^2 g_j) / (2 omega)`.
pub fn support_weighted_alpha<R: Scalar>(
    params: &ModelParams<R>,
    amplitudes: &[R],
    realization: Option<&DisorderRealization<R>>,
) -> R {
    let g = match realization {
        Some(r) => r.g_values.clone(),
        None => params.site_couplings(),
    };
    let num: R = amplitudes.iter().zip(&g).map(|(&c, &gj)| c * c * gj).sum();
    -num / (R::of(2.0) * params.omega)
}

/// Bundled parameter presets used throughout the studies: a symmetric
/// two-monomer, two-site configuration with `J = 0.3`, `eps = 3`,
/// `g = 1`, `nbar = 0.01` (all in mode-frequency units) and preset-specific
/// relaxation rate and coupling exponent.
pub mod presets {
    use super::{CouplingScheme, EnergyScheme, ModelParams};

    fn base(gamma: f64, p: f64) -> ModelParams<f64> {
        ModelParams {
            n_monomers: 2,
            sites_per_monomer: 2,
            coolants_per_gap: 2,
            j: 0.3,
            p,
            omega: 1.0,
            epsilon_scheme: EnergyScheme::Symmetric { epsilon: 3.0 },
            g_scheme: CouplingScheme::AlternatingSign { g: 1.0 },
            gamma,
            nbar: 0.01,
            gamma_d: 0.0,
            phonon_cutoff: 15,
            coupling_truncation: None,
            flip_j_sign: false,
        }
    }

    /// Optimal relaxation-to-coupling ratio at p = 1.
    pub fn p1() -> ModelParams<f64> {
        base(0.039552, 1.0)
    }

    /// Weak relaxation at p = 1.
    pub fn p2() -> ModelParams<f64> {
        base(0.010506, 1.0)
    }

    /// Strong relaxation at p = 1.
    pub fn p3() -> ModelParams<f64> {
        base(0.111707, 1.0)
    }

    /// Intermediate relaxation at p = 1.5.
    pub fn p4() -> ModelParams<f64> {
        base(0.030263, 1.5)
    }

    /// Looks a preset up by its config name.
    pub fn by_name(name: &str) -> Option<ModelParams<f64>> {
        match name {
            "p1" => Some(p1()),
            "p2" => Some(p2()),
            "p3" => Some(p3()),
            "p4" => Some(p4()),
            _ => None,
        }
    }
}

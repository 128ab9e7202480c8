//! Derived quantities: transfer rates, equilibration fits, golden-rule
//! predictions, pair concurrence and resonance detection.

use crate::error::Error;
use crate::lindblad::Trajectory;
use crate::linalg;
use crate::model::{exciton_couplings_dimer, CouplingScheme, ElectronicPattern, EnergyScheme, ModelParams};
use crate::scalar::Scalar;
use crate::Result;
use ndarray::Array2;
use num_complex::Complex;

/// Which population series defined the rate estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateDefinition {
    DonorPopulation,
    OneMinusAcceptor,
}

/// Finite-horizon transfer-rate estimate.
#[derive(Debug, Clone, Copy)]
pub struct RateResult<R: Scalar> {
    pub k_t: R,
    pub t_sim: R,
    pub definition: RateDefinition,
}

/// Rate from a population series on a time grid:
/// `k_T = ∫ P dt / ∫ t P dt − 2/t_sim` by composite trapezoid.
///
/// For a pure exponential with lifetime much shorter than the horizon the
/// estimate returns the decay rate up to the explicit −2/t_sim correction;
/// for a constant P it returns exactly zero. By construction the estimate
/// never falls below −2/t_sim for non-negative series.
pub fn transfer_rate_from_series<R: Scalar>(
    times: &[R],
    p: &[R],
    definition: RateDefinition,
) -> Result<RateResult<R>> {
    if times.len() != p.len() {
        return Err(Error::param("series lengths differ"));
    }
    if times.len() < 100 {
        return Err(Error::param(format!(
            "rate estimate needs at least 100 record points, got {}",
            times.len()
        )));
    }
    for w in times.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::param("time grid must be strictly increasing"));
        }
    }
    let t_sim = *times.last().unwrap() - times[0];
    if !(t_sim > R::zero()) {
        return Err(Error::param("horizon must be positive"));
    }
    let mut i0 = R::zero();
    let mut i1 = R::zero();
    for k in 1..times.len() {
        let h = times[k] - times[k - 1];
        let half = R::of(0.5);
        i0 += half * h * (p[k] + p[k - 1]);
        i1 += half * h * (times[k] * p[k] + times[k - 1] * p[k - 1]);
    }
    if i1.abs() < R::of(1e-300) {
        return Err(Error::undefined(
            "time-weighted population integral vanishes; the rate is undefined",
        ));
    }
    let two = R::of(2.0);
    Ok(RateResult { k_t: i0 / i1 - two / t_sim, t_sim, definition })
}

/// Rate from a trajectory: donor population by default, or the acceptor
/// complement `1 − P_A`, the form needed once intermediate monomers hold
/// transient weight.
pub fn transfer_rate<R: Scalar>(
    traj: &Trajectory<R>,
    use_acceptor_complement: bool,
) -> Result<RateResult<R>> {
    let (series, definition) = if use_acceptor_complement {
        (
            traj.records.iter().map(|r| R::one() - r.p_acceptor()).collect::<Vec<R>>(),
            RateDefinition::OneMinusAcceptor,
        )
    } else {
        (traj.p_donor(), RateDefinition::DonorPopulation)
    };
    transfer_rate_from_series(&traj.times, &series, definition)
}

/// Exponential-equilibration fit result.
#[derive(Debug, Clone, Copy)]
pub struct EquilibrationFit<R: Scalar> {
    /// Decay rate of the donor population toward its stationary value.
    pub gamma: R,
    /// Stationary donor population.
    pub p_ss: R,
    /// 95% confidence half-widths for (gamma, p_ss).
    pub ci95: (R, R),
    /// Root-mean-square residual of the fit.
    pub residual: R,
}

/// Least-squares fit of `P(t) = (1 − P_SS) e^{−Γ t} + P_SS` by
/// Levenberg-Marquardt with the analytic Jacobian. Confidence intervals
/// come from the residual-scaled inverse normal matrix.
pub fn fit_equilibration_series<R: Scalar>(times: &[R], p: &[R]) -> Result<EquilibrationFit<R>> {
    if times.len() != p.len() {
        return Err(Error::param("series lengths differ"));
    }
    let m = times.len();
    if m < 4 {
        return Err(Error::param("fit needs at least 4 points"));
    }
    let pmax = p.iter().copied().fold(R::neg_infinity(), R::max);
    let pmin = p.iter().copied().fold(R::infinity(), R::min);
    if pmax - pmin < R::of(1e-12) {
        return Err(Error::undefined(
            "donor population is constant; the equilibration rate is indeterminate",
        ));
    }
    let t_span = *times.last().unwrap() - times[0];

    // Initial guess: stationary level from the tail, rate from the first
    // crossing of the halfway level.
    let tail = p[m - 1];
    let mut p_ss = tail.max(R::zero()).min(R::one());
    let halfway = (p[0] + p_ss) * R::of(0.5);
    let mut t_half = t_span * R::of(0.5);
    for k in 0..m {
        if (p[0] - halfway) * (p[k] - halfway) < R::zero() {
            t_half = times[k].max(R::of(1e-10));
            break;
        }
    }
    let mut gamma = R::of(std::f64::consts::LN_2) / t_half;

    let model = |g: R, ss: R, t: R| (R::one() - ss) * (-g * t).exp() + ss;
    let sse = |g: R, ss: R| -> R {
        times
            .iter()
            .zip(p)
            .map(|(&t, &y)| {
                let r = model(g, ss, t) - y;
                r * r
            })
            .sum()
    };

    let mut lambda = R::of(1e-3);
    let mut current = sse(gamma, p_ss);
    let mut converged = false;
    for _ in 0..200 {
        // Normal equations J^T J + lambda diag, J^T r.
        let mut a11 = R::zero();
        let mut a12 = R::zero();
        let mut a22 = R::zero();
        let mut b1 = R::zero();
        let mut b2 = R::zero();
        for (&t, &y) in times.iter().zip(p) {
            let e = (-gamma * t).exp();
            let f = (R::one() - p_ss) * e + p_ss - y;
            let d_g = -t * (R::one() - p_ss) * e;
            let d_ss = R::one() - e;
            a11 += d_g * d_g;
            a12 += d_g * d_ss;
            a22 += d_ss * d_ss;
            b1 += d_g * f;
            b2 += d_ss * f;
        }
        let m11 = a11 * (R::one() + lambda);
        let m22 = a22 * (R::one() + lambda);
        let det = m11 * m22 - a12 * a12;
        if det.abs() < R::of(1e-300) {
            return Err(Error::convergence("normal matrix is singular in the rate fit"));
        }
        let dg = -(m22 * b1 - a12 * b2) / det;
        let dss = -(m11 * b2 - a12 * b1) / det;
        let g_new = gamma + dg;
        let ss_new = p_ss + dss;
        let next = if g_new > R::zero() { sse(g_new, ss_new) } else { current + R::one() };
        if next < current {
            gamma = g_new;
            p_ss = ss_new;
            lambda = (lambda * R::of(0.3)).max(R::of(1e-12));
            let improvement = current - next;
            current = next;
            if improvement < R::of(1e-16) * (current + R::of(1e-16))
                && dg.abs() < R::of(1e-10) * gamma.abs().max(R::of(1e-10))
            {
                converged = true;
                break;
            }
        } else {
            lambda *= R::of(10.0);
            if lambda > R::of(1e12) {
                converged = current < R::of(1e-18) || true;
                break;
            }
        }
    }
    let _ = converged;

    if !(gamma > R::zero()) {
        return Err(Error::convergence(format!(
            "fit converged to a non-positive rate {:e}",
            gamma.as_f64()
        )));
    }
    let slack = R::of(1e-6);
    if p_ss < -slack || p_ss > R::one() + slack {
        return Err(Error::convergence(format!(
            "fit converged to an unphysical stationary level {}",
            p_ss.as_f64()
        )));
    }
    let p_ss_clamped = p_ss.max(R::zero()).min(R::one());

    // Covariance from the converged Jacobian.
    let mut a11 = R::zero();
    let mut a12 = R::zero();
    let mut a22 = R::zero();
    for &t in times {
        let e = (-gamma * t).exp();
        let d_g = -t * (R::one() - p_ss) * e;
        let d_ss = R::one() - e;
        a11 += d_g * d_g;
        a12 += d_g * d_ss;
        a22 += d_ss * d_ss;
    }
    let dof = R::of((m - 2) as f64);
    let sigma2 = current / dof;
    let det = a11 * a22 - a12 * a12;
    let (ci_g, ci_ss) = if det.abs() > R::of(1e-300) {
        let z = R::of(1.96);
        (z * (sigma2 * a22 / det).max(R::zero()).sqrt(), z * (sigma2 * a11 / det).max(R::zero()).sqrt())
    } else {
        (R::infinity(), R::infinity())
    };

    Ok(EquilibrationFit {
        gamma,
        p_ss: p_ss_clamped,
        ci95: (ci_g, ci_ss),
        residual: (current / R::of(m as f64)).sqrt(),
    })
}

/// [`fit_equilibration_series`] on a trajectory's donor population.
pub fn fit_equilibration<R: Scalar>(traj: &Trajectory<R>) -> Result<EquilibrationFit<R>> {
    fit_equilibration_series(&traj.times, &traj.p_donor())
}

/// One golden-rule channel: initial donor exciton to final acceptor
/// exciton with `n` mode quanta emitted into the resonance.
#[derive(Debug, Clone, Copy)]
pub struct FgrChannel<R: Scalar> {
    pub initial: ElectronicPattern,
    pub fin: ElectronicPattern,
    pub n: usize,
    pub rate: R,
}

/// Golden-rule transfer-rate prediction.
#[derive(Debug, Clone)]
pub struct FgrPrediction<R: Scalar> {
    pub total: R,
    pub per_channel: Vec<FgrChannel<R>>,
    /// The Poisson weight mass beyond `n_max` exceeded 1e-8.
    pub tail_warning: bool,
}

/// Golden-rule rate for a symmetric two-site dimer:
/// `k/γ = Σ_{f,n} |J_if|² / (ΔE_if(n)² + γ²/4) · e^{−ñ} ñⁿ/n!`
/// with `ñ = (g/ω)²` the squared relative well displacement,
/// `ΔE_if(n) = ε + (s_i − s_f) J − n ω` and `s = +1/−1` for the
/// symmetric/antisymmetric exciton.
pub fn fgr_rate<R: Scalar>(
    params: &ModelParams<R>,
    initial: ElectronicPattern,
    n_max: usize,
) -> Result<FgrPrediction<R>> {
    params.validate()?;
    if params.n_monomers != 2 || params.sites_per_monomer != 2 {
        return Err(Error::param("golden-rule closed form covers the two-monomer dimer"));
    }
    let epsilon = match &params.epsilon_scheme {
        EnergyScheme::Symmetric { epsilon } => *epsilon,
        _ => {
            return Err(Error::param(
                "golden-rule closed form needs the symmetric energy scheme",
            ))
        }
    };
    let g = match &params.g_scheme {
        CouplingScheme::AlternatingSign { g } => *g,
        _ => {
            return Err(Error::param(
                "golden-rule closed form needs the alternating-sign couplings",
            ))
        }
    };
    let (s_i, label_i) = match initial {
        ElectronicPattern::Triplet => (R::one(), ElectronicPattern::Triplet),
        ElectronicPattern::Singlet => (-R::one(), ElectronicPattern::Singlet),
        _ => return Err(Error::param("initial exciton must be the triplet or the singlet")),
    };
    let c = exciton_couplings_dimer(params.j, params.p, params.coolants_per_gap);
    let j_from = |fin: ElectronicPattern| -> R {
        match (label_i, fin) {
            (ElectronicPattern::Triplet, ElectronicPattern::Triplet) => c.j_tt,
            (ElectronicPattern::Singlet, ElectronicPattern::Singlet) => c.j_ss,
            (ElectronicPattern::Triplet, ElectronicPattern::Singlet) => c.j_ts,
            (ElectronicPattern::Singlet, ElectronicPattern::Triplet) => -c.j_ts,
            _ => unreachable!(),
        }
    };

    let ntilde = (g / params.omega) * (g / params.omega);
    let gamma = params.gamma;
    let quarter = R::of(0.25);

    // Poisson weights with running tail mass.
    let mut weights = Vec::with_capacity(n_max + 1);
    let mut w = (-ntilde).exp();
    let mut mass = R::zero();
    for n in 0..=n_max {
        if n > 0 {
            w = w * ntilde / R::of(n as f64);
        }
        weights.push(w);
        mass += w;
    }
    let tail_warning = (R::one() - mass) > R::of(1e-8);

    let mut per_channel = Vec::new();
    let mut total = R::zero();
    for (fin, s_f) in [
        (ElectronicPattern::Triplet, R::one()),
        (ElectronicPattern::Singlet, -R::one()),
    ] {
        let j_if = j_from(fin);
        for (n, &wn) in weights.iter().enumerate() {
            let de = epsilon + (s_i - s_f) * params.j - R::of(n as f64) * params.omega;
            let rate = gamma * j_if * j_if / (de * de + quarter * gamma * gamma) * wn;
            total += rate;
            per_channel.push(FgrChannel { initial: label_i, fin, n, rate });
        }
    }
    Ok(FgrPrediction { total, per_channel, tail_warning })
}

/// Wootters concurrence of a two-qubit state: decreasing square roots
/// `μ_i` of the spectrum of `ρ ρ̃`, `ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`,
/// combined as `max(0, μ₁ − μ₂ − μ₃ − μ₄)`. Evaluated on the Hermitian
/// product `√ρ ρ̃ √ρ`, which shares the spectrum.
pub fn concurrence<R: Scalar>(rho: &Array2<Complex<R>>) -> Result<R> {
    if rho.nrows() != 4 || rho.ncols() != 4 {
        return Err(Error::state("concurrence needs a 4x4 two-qubit state"));
    }
    if linalg::hermiticity_deviation(rho) > R::of(1e-8) {
        return Err(Error::state("two-qubit state is not Hermitian"));
    }
    let tr = linalg::trace(rho);
    if (tr.re - R::one()).abs() > R::of(1e-6) || tr.im.abs() > R::of(1e-8) {
        return Err(Error::state("two-qubit state trace is not 1"));
    }
    if !linalg::cholesky_probe(rho, R::of(1e-8)) {
        return Err(Error::state("two-qubit state has an eigenvalue below -1e-8"));
    }

    // rho_tilde = (sy ⊗ sy) rho* (sy ⊗ sy); the spin-flip word in the
    // |00>,|01>,|10>,|11> basis is anti-diagonal (+-1).
    let flip = |m: &Array2<Complex<R>>| -> Array2<Complex<R>> {
        // (sy ⊗ sy)[r, 3-r] = phase with pattern [-1, +1, +1, -1]
        let sign = [-R::one(), R::one(), R::one(), -R::one()];
        let mut out = Array2::zeros((4, 4));
        for r in 0..4 {
            for c in 0..4 {
                let v = m[[3 - r, 3 - c]].conj();
                out[[r, c]] = v.scale(sign[r] * sign[c]);
            }
        }
        out
    };
    let rho_tilde = flip(rho);
    let sqrt_rho = linalg::sqrtm_psd(rho, R::of(1e-12))?;
    let inner = linalg::matmul(&linalg::matmul(&sqrt_rho, &rho_tilde), &sqrt_rho);
    let (vals, _) = linalg::eigh(&inner)?;
    // The square root amplifies eigensolver noise (sqrt(1e-16) = 1e-8),
    // so eigenvalues below the backward-error floor count as zero.
    let floor = vals.iter().fold(R::zero(), |m, v| m.max(v.abs())) * R::of(1e-13);
    let mut mu: Vec<R> =
        vals.iter().map(|&v| if v > floor { v.sqrt() } else { R::zero() }).collect();
    mu.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let c = mu[0] - mu[1] - mu[2] - mu[3];
    Ok(c.max(R::zero()).min(R::one()))
}

/// Resonance channel assignment of a rate peak.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResonanceClass {
    /// Triplet-to-triplet channel: peak at `ε ≈ n ω`.
    SymmetricToSymmetric { n: usize },
    /// Triplet-to-singlet channel: peak at `ε ≈ n ω − 2J`.
    SymmetricToAntisymmetric { n: usize },
    /// Singlet-to-triplet channel: peak at `ε ≈ n ω + 2J`.
    AntisymmetricToSymmetric { n: usize },
    Unclassified,
}

/// One detected rate resonance.
#[derive(Debug, Clone, Copy)]
pub struct ResonancePeak<R: Scalar> {
    pub epsilon: R,
    pub k_t: R,
    pub class: ResonanceClass,
}

/// Peak listing over an `(ε, k_T)` sweep.
#[derive(Debug, Clone)]
pub struct ResonanceScan<R: Scalar> {
    pub peaks: Vec<ResonancePeak<R>>,
    /// The ε step exceeds the linewidth γ: peaks may be missed or
    /// mislocated.
    pub coarse_grid_warning: bool,
}

/// Finds local maxima with prominence above `prominence_frac` of the
/// sweep maximum and labels each with the nearest predicted channel
/// (within one grid step).
pub fn resonance_scan<R: Scalar>(
    points: &[(R, R)],
    j: R,
    omega: R,
    gamma: R,
    prominence_frac: R,
) -> Result<ResonanceScan<R>> {
    if points.len() < 5 {
        return Err(Error::param("resonance scan needs at least 5 sweep points"));
    }
    let step = points[1].0 - points[0].0;
    if !(step > R::zero()) {
        return Err(Error::param("sweep must be increasing in epsilon"));
    }
    for w in points.windows(2) {
        let h = w[1].0 - w[0].0;
        if (h - step).abs() > R::of(1e-9) * step.max(R::one()) {
            return Err(Error::param("sweep grid must be uniform"));
        }
    }
    let coarse_grid_warning = gamma > R::zero() && step > gamma;
    let kmax = points.iter().map(|&(_, k)| k).fold(R::zero(), R::max);
    if !(kmax > R::zero()) {
        return Ok(ResonanceScan { peaks: Vec::new(), coarse_grid_warning });
    }
    let threshold = prominence_frac * kmax;

    let n = points.len();
    let mut peaks = Vec::new();
    for i in 1..n - 1 {
        let k = points[i].1;
        if !(k > points[i - 1].1) || !(k >= points[i + 1].1) {
            continue;
        }
        // Prominence: drop to the highest saddle separating this peak
        // from higher ground on each side.
        let mut left_min = k;
        let mut bounded_left = false;
        for q in (0..i).rev() {
            left_min = left_min.min(points[q].1);
            if points[q].1 > k {
                bounded_left = true;
                break;
            }
        }
        let mut right_min = k;
        let mut bounded_right = false;
        for q in i + 1..n {
            right_min = right_min.min(points[q].1);
            if points[q].1 > k {
                bounded_right = true;
                break;
            }
        }
        // Peaks at the sweep boundary of their higher side use the full
        // drop to the edge.
        let _ = (bounded_left, bounded_right);
        let prominence = k - left_min.max(right_min);
        if prominence < threshold {
            continue;
        }
        let eps = points[i].0;
        let class = classify_peak(eps, j, omega, step);
        peaks.push(ResonancePeak { epsilon: eps, k_t: k, class });
    }
    Ok(ResonanceScan { peaks, coarse_grid_warning })
}

fn classify_peak<R: Scalar>(eps: R, j: R, omega: R, step: R) -> ResonanceClass {
    let tol = step + R::of(1e-9);
    let two_j = R::of(2.0) * j;
    let n_hi = ((eps + two_j) / omega).as_f64().ceil() as i64 + 1;
    let mut best: Option<(R, ResonanceClass)> = None;
    for n in 0..=n_hi.max(1) as usize {
        let nw = R::of(n as f64) * omega;
        let candidates = [
            (nw, ResonanceClass::SymmetricToSymmetric { n }),
            (nw - two_j, ResonanceClass::SymmetricToAntisymmetric { n }),
            (nw + two_j, ResonanceClass::AntisymmetricToSymmetric { n }),
        ];
        for (pos, class) in candidates {
            let dist = (eps - pos).abs();
            if dist <= tol && best.map_or(true, |(d, _)| dist < d) {
                best = Some((dist, class));
            }
        }
    }
    best.map_or(ResonanceClass::Unclassified, |(_, c)| c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CouplingScheme, EnergyScheme};

    fn grid(n: usize, t_max: f64) -> Vec<f64> {
        (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn rate_closed_forms() {
        let times = grid(4001, 200.0);
        // Constant population: exactly zero.
        let ones = vec![1.0; times.len()];
        let r = transfer_rate_from_series(&times, &ones, RateDefinition::DonorPopulation).unwrap();
        assert!(r.k_t.abs() < 1e-12, "constant series: {}", r.k_t);

        // Exponential: rate minus the horizon correction.
        let gamma = 0.25;
        let p: Vec<f64> = times.iter().map(|&t| (-gamma * t).exp()).collect();
        let r = transfer_rate_from_series(&times, &p, RateDefinition::DonorPopulation).unwrap();
        let expect = gamma - 2.0 / 200.0;
        assert!((r.k_t - expect).abs() < 1e-3 * gamma, "{} vs {expect}", r.k_t);
        assert!(r.k_t >= -2.0 / r.t_sim);

        // Refinement invariance at 10x density.
        let times10 = grid(40001, 200.0);
        let p10: Vec<f64> = times10.iter().map(|&t| (-gamma * t).exp()).collect();
        let r10 =
            transfer_rate_from_series(&times10, &p10, RateDefinition::DonorPopulation).unwrap();
        assert!(
            ((r10.k_t - r.k_t) / r.k_t).abs() < 1e-4,
            "refinement moved the rate: {} vs {}",
            r10.k_t,
            r.k_t
        );

        // Zero series has no defined rate.
        let zeros = vec![0.0; times.len()];
        assert!(matches!(
            transfer_rate_from_series(&times, &zeros, RateDefinition::DonorPopulation),
            Err(Error::UndefinedResult(_))
        ));
        // Too few points.
        assert!(transfer_rate_from_series(&times[..50], &p[..50], RateDefinition::DonorPopulation)
            .is_err());
    }

    #[test]
    fn equilibration_fit_recovers_synthetic_parameters() {
        let times = grid(400, 120.0);
        let (gamma, p_ss) = (0.05, 0.3);
        let p: Vec<f64> =
            times.iter().map(|&t| (1.0 - p_ss) * (-gamma * t).exp() + p_ss).collect();
        let fit = fit_equilibration_series(&times, &p).unwrap();
        assert!((fit.gamma - gamma).abs() < 0.01 * gamma, "gamma {}", fit.gamma);
        assert!((fit.p_ss - p_ss).abs() < 0.01 * p_ss, "p_ss {}", fit.p_ss);
        assert!(fit.residual < 1e-10);
        assert!(fit.ci95.0 < 1e-6 && fit.ci95.1 < 1e-6);

        // Mild oscillation on top: fit still lands near truth, residual
        // reports the ripple.
        let p_osc: Vec<f64> = times
            .iter()
            .map(|&t| (1.0 - p_ss) * (-gamma * t).exp() + p_ss + 0.01 * (2.0 * t).cos())
            .collect();
        let fit = fit_equilibration_series(&times, &p_osc).unwrap();
        assert!((fit.gamma - gamma).abs() < 0.15 * gamma);
        assert!(fit.residual > 1e-4);

        // Constant input is degenerate.
        let flat = vec![0.7; times.len()];
        assert!(matches!(
            fit_equilibration_series(&times, &flat),
            Err(Error::UndefinedResult(_))
        ));
    }

    #[test]
    fn rate_and_fit_agree_for_pure_decay() {
        // |k_T - Gamma| <= 2/t_sim + 1e-3 Gamma for exponentials without
        // a stationary offset.
        for gamma in [0.05, 0.2, 1.0] {
            let t_max = 40.0 / gamma;
            let times = grid(1500, t_max);
            let p: Vec<f64> = times.iter().map(|&t| (-gamma * t).exp()).collect();
            let r =
                transfer_rate_from_series(&times, &p, RateDefinition::DonorPopulation).unwrap();
            assert!(
                (r.k_t - gamma).abs() <= 2.0 / t_max + 1e-3 * gamma,
                "gamma={gamma}: k_t={}",
                r.k_t
            );
        }
    }

    fn dimer_params() -> ModelParams<f64> {
        ModelParams {
            n_monomers: 2,
            sites_per_monomer: 2,
            coolants_per_gap: 2,
            j: 0.3,
            p: 1.0,
            omega: 1.0,
            epsilon_scheme: EnergyScheme::Symmetric { epsilon: 3.0 },
            g_scheme: CouplingScheme::AlternatingSign { g: 1.0 },
            gamma: 0.04,
            nbar: 0.01,
            gamma_d: 0.0,
            phonon_cutoff: 10,
            coupling_truncation: None,
            flip_j_sign: false,
        }
    }

    #[test]
    fn fgr_structure_and_poisson_heights() {
        let mut params = dimer_params();
        params.gamma = 0.015;
        let pred = fgr_rate(&params, ElectronicPattern::Triplet, 12).unwrap();
        assert!(!pred.tail_warning);
        let sum: f64 = pred.per_channel.iter().map(|c| c.rate).sum();
        assert!((pred.total - sum).abs() < 1e-15 * pred.total);
        assert!(pred.per_channel.iter().all(|c| c.rate >= 0.0));

        // On resonance eps = n w the T->T channel height scales with the
        // Poisson weight exp(-1)/n! for g = w.
        let channel = |eps: f64, n: usize| -> f64 {
            let mut p = params.clone();
            p.epsilon_scheme = EnergyScheme::Symmetric { epsilon: eps };
            let pred = fgr_rate(&p, ElectronicPattern::Triplet, 12).unwrap();
            pred.per_channel
                .iter()
                .find(|c| matches!(c.fin, ElectronicPattern::Triplet) && c.n == n)
                .unwrap()
                .rate
        };
        let k1 = channel(1.0, 1);
        let k2 = channel(2.0, 2);
        let k3 = channel(3.0, 3);
        assert!((k2 / k1 - 0.5).abs() < 1e-12, "Poisson 1/2! ratio: {}", k2 / k1);
        assert!((k3 / k1 - 1.0 / 6.0).abs() < 1e-12, "Poisson 1/3! ratio: {}", k3 / k1);

        // Per-channel rates depend on J_if only through its square.
        let mut flipped = params.clone();
        flipped.flip_j_sign = true; // does not enter the closed form, same values
        let pred2 = fgr_rate(&flipped, ElectronicPattern::Triplet, 12).unwrap();
        for (a, b) in pred.per_channel.iter().zip(&pred2.per_channel) {
            assert_eq!(a.rate, b.rate);
        }

        // Singlet initialization shifts the cross-channel resonance.
        let mut p_s = params.clone();
        p_s.epsilon_scheme = EnergyScheme::Symmetric { epsilon: 1.6 };
        let s_pred = fgr_rate(&p_s, ElectronicPattern::Singlet, 12).unwrap();
        let st = s_pred
            .per_channel
            .iter()
            .filter(|c| matches!(c.fin, ElectronicPattern::Triplet))
            .fold((0usize, 0.0), |acc, c| if c.rate > acc.1 { (c.n, c.rate) } else { acc });
        assert_eq!(st.0, 1, "S->T resonance at eps = w + 2J comes from n = 1");

        // Tail warning when the Poisson mass is cut.
        let cut = fgr_rate(&params, ElectronicPattern::Triplet, 1).unwrap();
        assert!(cut.tail_warning);

        // Monotone fall-off of one channel away from its resonance.
        let mut prev = f64::INFINITY;
        for k in 0..10 {
            let eps = 1.0 + 0.05 * k as f64;
            let v = channel(eps, 1);
            assert!(v < prev);
            prev = v;
        }

        // Scheme preconditions.
        let mut bad = params.clone();
        bad.n_monomers = 3;
        bad.epsilon_scheme = EnergyScheme::Tilted { epsilon: 3.0 };
        assert!(fgr_rate(&bad, ElectronicPattern::Triplet, 5).is_err());
        assert!(fgr_rate(&params, ElectronicPattern::W, 5).is_err());
    }

    fn pure(vec: [num_complex::Complex<f64>; 4]) -> Array2<num_complex::Complex<f64>> {
        let mut rho = Array2::zeros((4, 4));
        for r in 0..4 {
            for c in 0..4 {
                rho[[r, c]] = vec[r] * vec[c].conj();
            }
        }
        rho
    }

    #[test]
    fn concurrence_reference_states() {
        use num_complex::Complex;
        let z = Complex::new(0.0, 0.0);
        let inv = Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        // Bell pair (|01> + |10>)/sqrt(2): maximal.
        let bell = pure([z, inv, inv, z]);
        assert!((concurrence(&bell).unwrap() - 1.0).abs() < 1e-12);
        // Product |01>: zero.
        let prod = pure([z, Complex::new(1.0, 0.0), z, z]);
        assert!(concurrence(&prod).unwrap() < 1e-12);
        // Equal mixture of the two Bell states: zero.
        let anti = pure([z, inv, -inv, z]);
        let mut mix = bell.clone();
        ndarray::Zip::from(&mut mix).and(&anti).for_each(|m, &a| *m = (*m + a) * 0.5);
        assert!(concurrence(&mix).unwrap() < 1e-10);
        // Partially entangled pure state: C = 2|ab|.
        let a = 0.9f64;
        let b = (1.0 - a * a).sqrt();
        let part = pure([z, Complex::new(a, 0.0), Complex::new(b, 0.0), z]);
        assert!((concurrence(&part).unwrap() - 2.0 * a * b).abs() < 1e-10);

        // Invalid inputs are refused.
        let mut neg = prod.clone();
        neg[[0, 0]] = Complex::new(-0.2, 0.0);
        neg[[1, 1]] = Complex::new(1.2, 0.0);
        assert!(concurrence(&neg).is_err());
    }

    #[test]
    fn resonance_scan_classifies_known_peaks() {
        // Synthetic sweep: Lorentzians at the three channel positions.
        let j = 0.3;
        let gamma = 0.05;
        let centers = [(1.0, 0), (0.4, 1), (1.6, 2)]; // TT n=1, TS n=1, ST n=1
        let mut points = Vec::new();
        let mut eps: f64 = 0.1;
        while eps < 2.1 {
            let mut k: f64 = 0.0;
            for &(c, _) in &centers {
                k += 1.0 / ((eps - c).powi(2) + gamma * gamma / 4.0);
            }
            points.push((eps, k * 1e-4));
            eps += 0.02;
        }
        let scan = resonance_scan(&points, j, 1.0, gamma, 0.05).unwrap();
        assert!(!scan.coarse_grid_warning);
        assert_eq!(scan.peaks.len(), 3, "peaks: {:?}", scan.peaks);
        let mut found = [false; 3];
        for p in &scan.peaks {
            match p.class {
                ResonanceClass::SymmetricToSymmetric { n: 1 } => {
                    assert!((p.epsilon - 1.0).abs() < 0.021);
                    found[0] = true;
                }
                ResonanceClass::SymmetricToAntisymmetric { n: 1 } => {
                    assert!((p.epsilon - 0.4).abs() < 0.021);
                    found[1] = true;
                }
                ResonanceClass::AntisymmetricToSymmetric { n: 1 } => {
                    assert!((p.epsilon - 1.6).abs() < 0.021);
                    found[2] = true;
                }
                other => panic!("unexpected classification {other:?}"),
            }
        }
        assert!(found.iter().all(|&f| f));

        // A coarse grid trips the warning.
        let coarse: Vec<(f64, f64)> =
            points.iter().step_by(5).copied().collect();
        let scan = resonance_scan(&coarse, j, 1.0, gamma, 0.05).unwrap();
        assert!(scan.coarse_grid_warning);
    }
}

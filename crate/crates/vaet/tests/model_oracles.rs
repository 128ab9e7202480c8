//! Frozen-value and invariant tests for the model layer.

use ndarray::Array2;
use vaet::model::{
    build_hamiltonian, build_layout, coupling_matrix, electronic_amplitudes,
    exciton_couplings_dimer, intermonomer_coupling_table, monomer_exciton_basis, presets,
    sample_disorder, CouplingScheme, ElectronicPattern, EnergyScheme, ModelParams,
};

fn params(m: usize, l: usize, d: usize) -> ModelParams<f64> {
    ModelParams {
        n_monomers: m,
        sites_per_monomer: l,
        coolants_per_gap: d,
        j: 0.3,
        p: 1.0,
        omega: 1.0,
        epsilon_scheme: if m == 2 {
            EnergyScheme::Symmetric { epsilon: 3.0 }
        } else {
            EnergyScheme::Tilted { epsilon: 3.0 }
        },
        g_scheme: CouplingScheme::AlternatingSign { g: 1.0 },
        gamma: 0.04,
        nbar: 0.01,
        gamma_d: 0.0,
        phonon_cutoff: 8,
        coupling_truncation: None,
        flip_j_sign: false,
    }
}

#[test]
fn dimer_exciton_couplings_reduce_and_scale() {
    // Frozen closed-form values for J = 1, p = 1, d = 2.
    let c = exciton_couplings_dimer::<f64>(1.0, 1.0, 2);
    assert!((c.j_tt - 31.0 / 60.0).abs() < 1e-12);
    assert!((c.j_ss + 1.0 / 60.0).abs() < 1e-12);
    assert!((c.j_ts - 1.0 / 15.0).abs() < 1e-12);

    // Conjugating the raw inter-block coupling matrix with the exciton
    // vectors must give the same numbers: independent route.
    let v = |d: f64, p: f64| {
        let mut m = Array2::<f64>::zeros((2, 2));
        for dl in 0..2 {
            for al in 0..2 {
                m[[dl, al]] = 1.0 / ((2.0 + d + al as f64) - dl as f64).powf(p);
            }
        }
        m
    };
    for &(p, d) in &[(1.0, 2usize), (1.5, 2), (1.0, 0), (2.0, 5), (3.0, 1)] {
        let c = exciton_couplings_dimer::<f64>(1.0, p, d);
        let m = v(d as f64, p);
        let t = [std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2];
        let s = [std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2];
        let bil = |a: &[f64; 2], b: &[f64; 2]| {
            let mut out = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    out += a[i] * m[[i, j]] * b[j];
                }
            }
            out
        };
        assert!((c.j_tt - bil(&t, &t)).abs() < 1e-14, "tt at p={p} d={d}");
        assert!((c.j_ss - bil(&s, &s)).abs() < 1e-14, "ss at p={p} d={d}");
        assert!((c.j_ts - bil(&t, &s)).abs() < 1e-14, "ts at p={p} d={d}");
        assert!((c.j_ts + bil(&s, &t)).abs() < 1e-14, "st antisymmetry at p={p} d={d}");
    }

    // Couplings scale linearly in J.
    let c1 = exciton_couplings_dimer::<f64>(1.0, 1.5, 3);
    let c2 = exciton_couplings_dimer::<f64>(2.5, 1.5, 3);
    assert!((c2.j_tt - 2.5 * c1.j_tt).abs() < 1e-14);
    assert!((c2.j_ss - 2.5 * c1.j_ss).abs() < 1e-14);

    // Larger exponents suppress everything; the symmetric channel
    // dominates the antisymmetric one more strongly as d grows.
    let mut prev = exciton_couplings_dimer::<f64>(1.0, 1.0, 2);
    for pp in [2.0, 4.0, 8.0, 16.0] {
        let c = exciton_couplings_dimer::<f64>(1.0, pp, 2);
        assert!(c.j_tt.abs() < prev.j_tt.abs());
        assert!(c.j_ss.abs() <= prev.j_ss.abs());
        assert!(c.j_ts.abs() < prev.j_ts.abs());
        prev = c;
    }
    let mut ratio = 0.0;
    for d in [0usize, 1, 2, 4, 8, 16] {
        let c = exciton_couplings_dimer::<f64>(1.0, 1.0, d);
        let r = c.j_tt / c.j_ss.abs();
        assert!(r > ratio, "tt/|ss| should grow with separation");
        ratio = r;
    }
}

#[test]
fn monomer_exciton_spectra_match_closed_forms() {
    // L = 2: eigenvalues +-J with symmetric/antisymmetric vectors.
    let b2 = monomer_exciton_basis::<f64>(2, 0.3, 1.0).unwrap();
    assert!((b2.eigenvalues[0] - 0.3).abs() < 1e-14);
    assert!((b2.eigenvalues[1] + 0.3).abs() < 1e-14);
    let inv = std::f64::consts::FRAC_1_SQRT_2;
    assert!((b2.eigenvectors[[0, 0]] - inv).abs() < 1e-14);
    assert!((b2.eigenvectors[[1, 0]] - inv).abs() < 1e-14);
    assert!((b2.eigenvectors[[0, 1]] - inv).abs() < 1e-14);
    assert!((b2.eigenvectors[[1, 1]] + inv).abs() < 1e-14);
    assert!((b2.w_overlap[0] - 1.0).abs() < 1e-14);
    assert!(b2.w_overlap[1].abs() < 1e-14);

    // L = 3 at p = 1: top eigenvalue (1+sqrt(33))J/4 with palindromic
    // vector (1, c, 1), c = (sqrt(33)-1)/4; bottom (1-sqrt(33))J/4;
    // middle -J/2 with the antisymmetric vector.
    let j = 0.7;
    let b3 = monomer_exciton_basis::<f64>(3, j, 1.0).unwrap();
    let s33 = 33.0f64.sqrt();
    assert!((b3.eigenvalues[0] - (1.0 + s33) * j / 4.0).abs() < 1e-12);
    assert!((b3.eigenvalues[1] + j / 2.0).abs() < 1e-12);
    assert!((b3.eigenvalues[2] - (1.0 - s33) * j / 4.0).abs() < 1e-12);
    let c = (s33 - 1.0) / 4.0;
    let ratio = b3.eigenvectors[[1, 0]] / b3.eigenvectors[[0, 0]];
    assert!((ratio - c).abs() < 1e-10);
    assert!((b3.eigenvectors[[2, 0]] - b3.eigenvectors[[0, 0]]).abs() < 1e-12);
    assert!(b3.eigenvectors[[1, 1]].abs() < 1e-12);
    assert!((b3.eigenvectors[[0, 1]] + b3.eigenvectors[[2, 1]]).abs() < 1e-12);

    // Eigen-residuals stay at working precision for every supported L.
    for l in 2..=6usize {
        let b = monomer_exciton_basis::<f64>(l, 1.0, 1.0).unwrap();
        let mut block = Array2::<f64>::zeros((l, l));
        for a in 0..l {
            for bb in 0..l {
                if a != bb {
                    block[[a, bb]] = 1.0 / (a as f64 - bb as f64).abs();
                }
            }
        }
        let norm: f64 = block.iter().map(|x| x * x).sum::<f64>().sqrt();
        for m in 0..l {
            for r in 0..l {
                let mut hv = 0.0;
                for cc in 0..l {
                    hv += block[[r, cc]] * b.eigenvectors[[cc, m]];
                }
                let res: f64 = hv - b.eigenvalues[m] * b.eigenvectors[[r, m]];
                assert!(res.abs() < 1e-12 * norm, "residual at L={l}, m={m}");
            }
        }
        assert!(!b.degenerate_top);
    }

    assert!(monomer_exciton_basis::<f64>(1, 1.0, 1.0).is_err());
    assert!(monomer_exciton_basis::<f64>(7, 1.0, 1.0).is_err());
    assert!(monomer_exciton_basis::<f64>(3, 1.0, 0.0).is_err());
    assert!(monomer_exciton_basis::<f64>(3, 0.0, 1.0).is_err());
}

#[test]
fn w_overlap_is_maximized_by_top_exciton() {
    // Frozen overlap values of the uniform state with the top exciton.
    let frozen = [(2usize, 1.0), (3, 0.993220), (4, 0.988094), (5, 0.984414), (6, 0.981709)];
    for &(l, expect) in &frozen {
        let b = monomer_exciton_basis::<f64>(l, 1.0, 1.0).unwrap();
        assert!((b.w_overlap[0] - expect).abs() < 1e-3, "L={l}: {}", b.w_overlap[0]);
        for m in 1..l {
            assert!(b.w_overlap[0] > b.w_overlap[m], "top exciton must win at L={l}");
        }
        let total: f64 = b.w_overlap.iter().sum();
        assert!((total - 1.0).abs() < 1e-12, "overlaps resolve the identity");
    }
}

// Printed coupling tables for adjacent monomers (in units of J, p = 1,
// two coolant slots), in the expansion-coefficient convention. Rows and
// columns are stated in the equation-listing order of the source tables,
// which sorts the acceptor states (E1, E2, E3[, E4]) by their closed-form
// listing rather than by energy; `perm` maps that order to descending
// eigenvalues.
#[test]
fn intermonomer_tables_match_frozen_values() {
    let t3 = intermonomer_coupling_table::<f64>(3, 1.0, 1.0, 2).unwrap();
    let perm3 = [0usize, 2, 1];
    let p3 = [
        [0.6299, 0.0553, 0.1446],
        [0.0786, 0.0082, 0.0250],
        [0.0849, 0.0103, 0.0381],
    ];
    for i in 0..3 {
        for j in 0..3 {
            let got = t3.expansion[[perm3[i], perm3[j]]];
            assert!(
                (got - p3[i][j]).abs() < 5e-4,
                "L=3 entry ({i},{j}): got {got}, expect {}",
                p3[i][j]
            );
        }
    }

    let t4 = intermonomer_coupling_table::<f64>(4, 1.0, 1.0, 2).unwrap();
    let perm4 = [0usize, 2, 1, 3];
    let p4 = [
        [0.7083, 0.1280, 0.2036, 0.0211],
        [0.0823, 0.0186, 0.0342, 0.0039],
        [0.1025, 0.0267, 0.0576, 0.0065],
        [0.0371, 0.0106, 0.0228, 0.0027],
    ];
    for i in 0..4 {
        for j in 0..4 {
            let got = t4.expansion[[perm4[i], perm4[j]]];
            assert!(
                (got - p4[i][j]).abs() < 5e-4,
                "L=4 entry ({i},{j}): got {got}, expect {}",
                p4[i][j]
            );
        }
    }

    // L = 2 collapses to the dimer closed forms, with the orthonormal and
    // expansion conventions agreeing up to sign.
    let t2 = intermonomer_coupling_table::<f64>(2, 1.0, 1.0, 2).unwrap();
    assert!((t2.orthonormal[[0, 0]] - 31.0 / 60.0).abs() < 1e-12);
    assert!((t2.orthonormal[[1, 1]] + 1.0 / 60.0).abs() < 1e-12);
    assert!((t2.orthonormal[[0, 1]] - 1.0 / 15.0).abs() < 1e-12);
    assert!((t2.orthonormal[[1, 0]] + 1.0 / 15.0).abs() < 1e-12);
    for i in 0..2 {
        for j in 0..2 {
            assert!((t2.expansion[[i, j]] - t2.orthonormal[[i, j]].abs()).abs() < 1e-12);
        }
    }
}

#[test]
fn exciton_transform_leaves_no_intra_monomer_cross_terms() {
    // Conjugating the full 2L x 2L coupling matrix with the block-diagonal
    // exciton transform must diagonalize both intra-monomer blocks.
    for l in 2..=4usize {
        let p = params(2, l, 2);
        let layout = build_layout(&p).unwrap();
        let jm = coupling_matrix(&layout, p.j, p.p, None).unwrap();
        let basis = monomer_exciton_basis::<f64>(l, p.j, p.p).unwrap();
        let n = 2 * l;
        let mut u = Array2::<f64>::zeros((n, n));
        for m in 0..l {
            for r in 0..l {
                u[[r, m]] = basis.eigenvectors[[r, m]];
                u[[l + r, l + m]] = basis.eigenvectors[[r, m]];
            }
        }
        // transformed = U^T J U
        let mut t = Array2::<f64>::zeros((n, n));
        for a in 0..n {
            for b in 0..n {
                let mut s = 0.0;
                for x in 0..n {
                    for y in 0..n {
                        s += u[[x, a]] * jm[[x, y]] * u[[y, b]];
                    }
                }
                t[[a, b]] = s;
            }
        }
        for blk in 0..2 {
            let off = blk * l;
            for a in 0..l {
                for b in 0..l {
                    if a == b {
                        assert!(
                            (t[[off + a, off + b]] - basis.eigenvalues[a]).abs() < 1e-12,
                            "diagonal energy at L={l}"
                        );
                    } else {
                        assert!(
                            t[[off + a, off + b]].abs() < 1e-12,
                            "intra-monomer cross term at L={l}"
                        );
                    }
                }
            }
        }
        // The donor-acceptor corner reproduces the coupling table.
        let table = intermonomer_coupling_table::<f64>(l, p.j, p.p, 2).unwrap();
        for a in 0..l {
            for b in 0..l {
                assert!((t[[a, l + b]] - table.orthonormal[[a, b]]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn hamiltonian_diagonal_and_towers() {
    // g = 0, J truncated to intra-monomer range: spectrum is the union of
    // exciton doublets eps/2 +- J shifted by integer mode quanta.
    let mut p = params(2, 2, 2);
    p.g_scheme = CouplingScheme::Explicit { values: vec![0.0; 4] };
    p.coupling_truncation = Some(1.0);
    p.phonon_cutoff = 3;
    let h = build_hamiltonian(&p, None).unwrap();
    let (vals, _) = vaet::linalg::eigh(h.matrix()).unwrap();
    let mut expect = Vec::new();
    for n in 0..=3 {
        for sign in [-1.0, 1.0] {
            for eps in [1.5, -1.5] {
                expect.push(eps + sign * 0.3 + n as f64);
            }
        }
    }
    expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut got: Vec<f64> = vals.to_vec();
    got.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(got.len(), expect.len());
    for (g, e) in got.iter().zip(&expect) {
        assert!((g - e).abs() < 1e-12, "doublet tower: {g} vs {e}");
    }

    // J suppressed entirely: each site carries a displaced oscillator
    // ladder E_n = n w - g^2/(4 w) + eps/2. The truncated towers converge
    // to the closed form from below the cutoff edge.
    let mut p = params(2, 2, 2);
    p.j = 1e-300; // validation wants J > 0; physically zero
    p.phonon_cutoff = 40;
    let h = build_hamiltonian(&p, None).unwrap();
    let (vals, _) = vaet::linalg::eigh(h.matrix()).unwrap();
    let mut got: Vec<f64> = vals.to_vec();
    got.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut expect = Vec::new();
    for eps in [1.5, 1.5, -1.5, -1.5] {
        // Enough levels per tower that the comparison window below is a
        // complete prefix of the union spectrum.
        for n in 0..16 {
            expect.push(n as f64 - 0.25 + eps);
        }
    }
    expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for k in 0..32 {
        assert!(
            (got[k] - expect[k]).abs() < 1e-8,
            "displaced tower level {k}: {} vs {}",
            got[k],
            expect[k]
        );
    }

    // Zero-point energies match the polaron shift -g_j^2/(4 w) per site
    // even under disorder.
    let mut p = params(2, 2, 2);
    p.j = 1e-300;
    p.phonon_cutoff = 40;
    let real = sample_disorder(&p, 0.1, 0.1, 9).unwrap();
    let h = build_hamiltonian(&p, Some(&real)).unwrap();
    let (vals, _) = vaet::linalg::eigh(h.matrix()).unwrap();
    // Towers interleave, so check membership: every per-site zero point
    // must appear somewhere in the spectrum.
    for j in 0..4 {
        let zp = real.epsilon_values[j] / 2.0 - real.g_values[j].powi(2) / 4.0;
        let nearest = vals
            .iter()
            .map(|v| (v - zp).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(nearest < 1e-8, "disordered zero point of site {j}: off by {nearest}");
    }
}

#[test]
fn hamiltonian_rejects_mismatched_realization() {
    let p = params(2, 2, 2);
    let other = params(3, 2, 2);
    let real = sample_disorder(&other, 0.1, 0.1, 1).unwrap();
    assert!(build_hamiltonian(&p, Some(&real)).is_err());
}

#[test]
fn flipping_j_sign_swaps_exciton_roles() {
    // With the global sign flipped the antisymmetric state becomes the
    // top of each monomer doublet: spectra coincide, ordering swaps.
    let mut p = params(2, 2, 2);
    p.g_scheme = CouplingScheme::Explicit { values: vec![0.0; 4] };
    p.coupling_truncation = Some(1.0);
    p.phonon_cutoff = 0;
    let h_plus = build_hamiltonian(&p, None).unwrap();
    p.flip_j_sign = true;
    let h_minus = build_hamiltonian(&p, None).unwrap();
    let (vp, _) = vaet::linalg::eigh(h_plus.matrix()).unwrap();
    let (vm, _) = vaet::linalg::eigh(h_minus.matrix()).unwrap();
    let mut vp: Vec<f64> = vp.to_vec();
    let mut vm: Vec<f64> = vm.to_vec();
    vp.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vm.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (a, b) in vp.iter().zip(&vm) {
        assert!((a - b).abs() < 1e-12);
    }
    // The actual eigenvector roles swap: at cutoff 0 the electronic block
    // is 4x4 and the top state of the flipped model is antisymmetric on
    // the donor sites.
    let (_, vecs) = vaet::linalg::eigh(h_minus.matrix()).unwrap();
    let top = vecs.ncols() - 1;
    let a0 = vecs[[0, top]];
    let a1 = vecs[[1, top]];
    if a0.norm() > 1e-8 {
        assert!((a0 + a1).norm() < 1e-10, "donor amplitudes must be antisymmetric");
    }
}

#[test]
fn electronic_patterns_and_presets() {
    let p = params(2, 2, 2);
    let t = electronic_amplitudes(&p, ElectronicPattern::Triplet).unwrap();
    let s = electronic_amplitudes(&p, ElectronicPattern::Singlet).unwrap();
    let e1 = electronic_amplitudes(&p, ElectronicPattern::TopExciton).unwrap();
    let inv = std::f64::consts::FRAC_1_SQRT_2;
    assert_eq!(t, vec![inv, inv, 0.0, 0.0]);
    assert_eq!(s, vec![inv, -inv, 0.0, 0.0]);
    for (a, b) in t.iter().zip(&e1) {
        assert!((a - b).abs() < 1e-12, "top exciton of a two-site monomer is the triplet");
    }
    let prod = electronic_amplitudes(&p, ElectronicPattern::Product(2)).unwrap();
    assert_eq!(prod, vec![0.0, 0.0, 1.0, 0.0]);
    assert!(electronic_amplitudes(&p, ElectronicPattern::Product(9)).is_err());

    let mut p5 = params(2, 5, 2);
    let w = electronic_amplitudes(&p5, ElectronicPattern::W).unwrap();
    assert!((w.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-14);
    assert!(w[..5].iter().all(|&x| (x - 1.0 / 5.0f64.sqrt()).abs() < 1e-14));
    assert!(w[5..].iter().all(|&x| x == 0.0));
    assert!(electronic_amplitudes(&p5, ElectronicPattern::Triplet).is_err());
    p5.sites_per_monomer = 2;
    // dimension changed under us: explicit schemes would now mismatch
    assert!(p5.validate().is_ok());

    for (name, gamma, pw) in [
        ("p1", 0.039552, 1.0),
        ("p2", 0.010506, 1.0),
        ("p3", 0.111707, 1.0),
        ("p4", 0.030263, 1.5),
    ] {
        let preset = presets::by_name(name).unwrap();
        assert_eq!(preset.gamma, gamma);
        assert_eq!(preset.p, pw);
        assert_eq!(preset.j, 0.3);
        assert_eq!(preset.scheme_epsilon(), Some(3.0));
        assert_eq!(preset.scheme_g(), Some(1.0));
        assert_eq!(preset.nbar, 0.01);
        preset.validate().unwrap();
    }
    assert!(presets::by_name("p9").is_none());
}

#[test]
fn params_round_trip_through_serde() {
    let p = params(3, 2, 2);
    let text = serde_json::to_string(&p).unwrap();
    let back: ModelParams<f64> = serde_json::from_str(&text).unwrap();
    assert_eq!(p, back);
    // gamma_d and the sign flag are optional in configs.
    let partial = r#"{
        "n_monomers": 2, "sites_per_monomer": 2, "coolants_per_gap": 2,
        "j": 0.3, "p": 1.0, "omega": 1.0,
        "epsilon_scheme": {"scheme": "symmetric", "epsilon": 3.0},
        "g_scheme": {"scheme": "alternating_sign", "g": 1.0},
        "gamma": 0.04, "nbar": 0.01, "phonon_cutoff": 12
    }"#;
    let lean: ModelParams<f64> = serde_json::from_str(partial).unwrap();
    assert_eq!(lean.gamma_d, 0.0);
    assert_eq!(lean.coupling_truncation, None);
    assert!(!lean.flip_j_sign);
}

//! The numeric core instantiates at f32 and its closed forms agree with
//! the f64 route at single precision. The validated state contracts stay
//! f64-only by design: their tolerances (trace 1e-8, hermiticity 1e-10)
//! sit below f32 roundoff.

use ndarray::Array2;
use num_complex::Complex;
use vaet::linalg;
use vaet::model::{build_hamiltonian, exciton_couplings_dimer, monomer_exciton_basis, presets};

#[test]
fn closed_forms_agree_across_scalars() {
    let c32 = exciton_couplings_dimer::<f32>(1.0, 1.0, 2);
    let c64 = exciton_couplings_dimer::<f64>(1.0, 1.0, 2);
    assert!((c32.j_tt as f64 - c64.j_tt).abs() < 1e-6);
    assert!((c32.j_ss as f64 - c64.j_ss).abs() < 1e-6);
    assert!((c32.j_ts as f64 - c64.j_ts).abs() < 1e-6);

    let b32 = monomer_exciton_basis::<f32>(3, 0.3, 1.0).unwrap();
    let b64 = monomer_exciton_basis::<f64>(3, 0.3, 1.0).unwrap();
    for m in 0..3 {
        assert!(
            (b32.eigenvalues[m] as f64 - b64.eigenvalues[m]).abs() < 1e-5,
            "eigenvalue {m}"
        );
        assert!((b32.w_overlap[m] as f64 - b64.w_overlap[m]).abs() < 1e-5, "overlap {m}");
    }
}

#[test]
fn dense_routines_instantiate_at_f32() {
    let mut p = presets::p1().map_scalar::<f32>();
    p.phonon_cutoff = 3;
    let h32 = build_hamiltonian(&p, None).unwrap();
    let mut p64 = presets::p1();
    p64.phonon_cutoff = 3;
    let h64 = build_hamiltonian(&p64, None).unwrap();
    assert!(h32.is_hermitian());

    let (v32, vecs32) = linalg::eigh(h32.matrix()).unwrap();
    let (v64, _) = linalg::eigh(h64.matrix()).unwrap();
    let dim = v64.len();
    let scale: f64 = v64.iter().fold(0.0_f64, |m, &x| m.max(x.abs()));
    for k in 0..dim {
        assert!(
            (v32[k] as f64 - v64[k]).abs() < 1e-4 * scale.max(1.0),
            "eigenvalue {k}: {} vs {}",
            v32[k],
            v64[k]
        );
    }
    // Residual of one eigenpair at single-precision scale.
    let k = dim / 2;
    let mut res = 0.0_f32;
    for r in 0..dim {
        let mut hv = Complex::<f32>::new(0.0, 0.0);
        for c in 0..dim {
            hv += h32.matrix()[[r, c]] * vecs32[[c, k]];
        }
        res = res.max((hv - vecs32[[r, k]].scale(v32[k])).norm());
    }
    assert!(res < 1e-3, "f32 eigen residual {res}");

    // expm of a skew-Hermitian generator is unitary at f32 scale.
    let n = 6;
    let mut g = Array2::<Complex<f32>>::zeros((n, n));
    for r in 0..n {
        for c in 0..n {
            let re = ((r * 3 + c) as f32).sin() * 0.3;
            let im = ((r + 2 * c) as f32).cos() * 0.2;
            g[[r, c]] = Complex::new(re, im);
        }
    }
    let skew = {
        let gd = linalg::adjoint(&g);
        let mut s = g.clone();
        ndarray::Zip::from(&mut s).and(&gd).for_each(|x, &d| *x = (*x - d).scale(0.5));
        s
    };
    let u = linalg::expm(&skew).unwrap();
    let ud = linalg::adjoint(&u);
    let prod = linalg::matmul(&ud, &u);
    let mut dev = 0.0_f32;
    for r in 0..n {
        for c in 0..n {
            let want = if r == c { 1.0 } else { 0.0 };
            dev = dev.max((prod[[r, c]] - Complex::new(want, 0.0)).norm());
        }
    }
    assert!(dev < 1e-5, "f32 unitarity deviation {dev}");

    // Linear solve with a manufactured solution on a well-conditioned
    // system (pivot quality at full precision is covered elsewhere).
    let mut a = Array2::<Complex<f32>>::zeros((n, n));
    for r in 0..n {
        for c in 0..n {
            let re = ((r * 3 + c * 7) as f32).sin() + if r == c { 4.0 } else { 0.0 };
            a[[r, c]] = Complex::new(re, ((r * 5 + c) as f32).cos() * 0.5);
        }
    }
    let want: Vec<Complex<f32>> = (0..n).map(|k| Complex::new(k as f32 - 2.5, 0.5 * k as f32)).collect();
    let mut b = vec![Complex::<f32>::new(0.0, 0.0); n];
    for r in 0..n {
        for c in 0..n {
            b[r] += a[[r, c]] * want[c];
        }
    }
    let x = linalg::solve(&a, &b).unwrap();
    for k in 0..n {
        assert!((x[k] - want[k]).norm() < 1e-3, "solve component {k}");
    }
}

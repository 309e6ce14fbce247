//! Spectral complex calculus on the periodic grid.
//!
//! Derivatives follow the convention ∂_{z_j} = (∂_{x_j} − i·∂_{y_j})/2, so a
//! Fourier mode e^{2πi k·u} picks up the factor ζ_j = π(k_{y_j} + i·k_{x_j})
//! under ∂_{z_j} and ξ_j = π(−k_{y_j} + i·k_{x_j}) under ∂_{z̄_j}. On the
//! flat torus covariant derivatives reduce to these ordinary ones.
//!
//! Operators with odd symbols (first derivatives, off-diagonal mixed second
//! and third derivatives) annihilate modes with any axis at the Nyquist
//! frequency: below Nyquist their factors are odd under k → −k, which makes
//! derivative tensors of real fields exactly Hermitian/symmetric, while the
//! self-paired Nyquist bin would break that. Operators with even real
//! symbols (diagonal mixed second derivatives, the flat Laplacian) keep the
//! Nyquist modes. Band-limited fields with max mode < N/2 are
//! differentiated exactly (to roundoff).

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::FieldError;
use crate::field::{ComplexTensorField, HermitianField, IndexKind, ScalarField};
use crate::geometry::{TorusGeometry, MAX_AXES};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut planner = p.borrow_mut();
        if inverse {
            planner.plan_fft_inverse(len)
        } else {
            planner.plan_fft_forward(len)
        }
    })
}

/// In-place full-dimensional FFT: one 1D pass per axis. The inverse pass
/// normalizes by the total point count.
fn fft_all_axes(geom: TorusGeometry, data: &mut [Complex64], inverse: bool) {
    let grid = geom.grid();
    let fft = plan(grid, inverse);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let mut line = vec![Complex64::default(); grid];
    for axis in 0..geom.axes() {
        let stride = geom.stride(axis);
        if stride == 1 {
            for chunk in data.chunks_exact_mut(grid) {
                fft.process_with_scratch(chunk, &mut scratch);
            }
        } else {
            let block = stride * grid;
            for b in 0..data.len() / block {
                for inner in 0..stride {
                    let base = b * block + inner;
                    for (j, v) in line.iter_mut().enumerate() {
                        *v = data[base + j * stride];
                    }
                    fft.process_with_scratch(&mut line, &mut scratch);
                    for (j, v) in line.iter().enumerate() {
                        data[base + j * stride] = *v;
                    }
                }
            }
        }
    }
    if inverse {
        let scale = 1.0 / data.len() as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

/// Flat FFT bin index of an integer wave vector (negative entries wrap).
pub(crate) fn mode_bin(geom: TorusGeometry, k: &[i64]) -> usize {
    let grid = geom.grid() as i64;
    let mut flat = 0usize;
    for &ki in k {
        let idx = ki.rem_euclid(grid) as usize;
        flat = flat * geom.grid() + idx;
    }
    flat
}

/// Synthesizes a real field from mode coefficients: the spectrum entries are
/// the amplitudes of e^{2πi k·u}.
pub(crate) fn synthesize_real(geom: TorusGeometry, mut spec: Vec<Complex64>) -> Vec<f64> {
    let pts = geom.points() as f64;
    for v in spec.iter_mut() {
        *v *= pts;
    }
    inverse_to_real(geom, spec)
}

/// Unnormalized forward spectrum of a real field.
pub(crate) fn forward_spectrum(f: &ScalarField) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_all_axes(f.geom(), &mut data, false);
    data
}

fn inverse_to_complex(geom: TorusGeometry, mut spec: Vec<Complex64>) -> Vec<Complex64> {
    fft_all_axes(geom, &mut spec, true);
    spec
}

fn inverse_to_real(geom: TorusGeometry, spec: Vec<Complex64>) -> Vec<f64> {
    inverse_to_complex(geom, spec)
        .into_iter()
        .map(|c| c.re)
        .collect()
}

/// Normalized inverse transform to real values (crate-internal; used by the
/// rough-field synthesizer which assembles spectra directly).
pub(crate) fn inverse_spectrum_to_real(geom: TorusGeometry, spec: Vec<Complex64>) -> Vec<f64> {
    inverse_to_real(geom, spec)
}

/// Applies a per-mode multiplier. The closure receives the signed wavenumbers
/// of the mode and whether any axis sits at Nyquist.
fn multiply_modes(
    geom: TorusGeometry,
    spec: &mut [Complex64],
    factor: impl Fn(&[i64; MAX_AXES], bool) -> Complex64,
) {
    let grid = geom.grid();
    let axes = geom.axes();
    let signed: Vec<i64> = (0..grid).map(|i| geom.signed_wave(i)).collect();
    let nyq = grid / 2;
    let mut idx = [0usize; MAX_AXES];
    let mut k = [0i64; MAX_AXES];
    let mut any_nyq = false;
    let recompute =
        |idx: &[usize; MAX_AXES], k: &mut [i64; MAX_AXES], any: &mut bool| {
            *any = false;
            for a in 0..axes {
                k[a] = signed[idx[a]];
                *any |= idx[a] == nyq;
            }
        };
    recompute(&idx, &mut k, &mut any_nyq);
    for v in spec.iter_mut() {
        *v *= factor(&k, any_nyq);
        // odometer increment, last axis fastest
        for a in (0..axes).rev() {
            idx[a] += 1;
            if idx[a] == grid {
                idx[a] = 0;
            } else {
                break;
            }
        }
        recompute(&idx, &mut k, &mut any_nyq);
    }
}

/// ∂_{z_j} factor of mode k.
fn zeta(k: &[i64; MAX_AXES], geom: TorusGeometry, j: usize) -> Complex64 {
    let kx = k[geom.x_axis(j)] as f64;
    let ky = k[geom.y_axis(j)] as f64;
    Complex64::new(PI * ky, PI * kx)
}

/// ∂_{z̄_j} factor of mode k.
fn xi(k: &[i64; MAX_AXES], geom: TorusGeometry, j: usize) -> Complex64 {
    let kx = k[geom.x_axis(j)] as f64;
    let ky = k[geom.y_axis(j)] as f64;
    Complex64::new(-PI * ky, PI * kx)
}

const ZERO_C: Complex64 = Complex64::new(0.0, 0.0);

/// ∂_{z_j} f (or ∂_{z̄_j} f with `conjugate`), computed spectrally. Exact for
/// trigonometric polynomials below the Nyquist mode; output has grid mean 0.
pub fn complex_derivative(f: &ScalarField, j: usize, conjugate: bool) -> ComplexTensorField {
    let geom = f.geom();
    assert!(j < geom.n(), "complex axis {j} out of range for n = {}", geom.n());
    let mut spec = forward_spectrum(f);
    multiply_modes(geom, &mut spec, |k, nyq| {
        if nyq {
            ZERO_C
        } else if conjugate {
            xi(k, geom, j)
        } else {
            zeta(k, geom, j)
        }
    });
    ComplexTensorField::from_parts(geom, vec![], inverse_to_complex(geom, spec))
}

/// Derivative of a rank-0 complex grid function (for chaining, e.g. ∂_z̄∂_z).
pub fn complex_derivative_scalar(
    t: &ComplexTensorField,
    j: usize,
    conjugate: bool,
) -> ComplexTensorField {
    assert_eq!(t.rank(), 0, "chained derivative needs a rank-0 tensor");
    let geom = t.geom();
    assert!(j < geom.n());
    let mut spec = t.scalar_values().to_vec();
    fft_all_axes(geom, &mut spec, false);
    multiply_modes(geom, &mut spec, |k, nyq| {
        if nyq {
            ZERO_C
        } else if conjugate {
            xi(k, geom, j)
        } else {
            zeta(k, geom, j)
        }
    });
    ComplexTensorField::from_parts(geom, vec![], inverse_to_complex(geom, spec))
}

/// Full holomorphic gradient (φ_1, …, φ_n).
pub fn gradient(f: &ScalarField) -> ComplexTensorField {
    let geom = f.geom();
    let spec = forward_spectrum(f);
    let mut out = ComplexTensorField::zeros(geom, vec![IndexKind::Holo]);
    for j in 0..geom.n() {
        let mut s = spec.clone();
        multiply_modes(geom, &mut s, |k, nyq| if nyq { ZERO_C } else { zeta(k, geom, j) });
        out.component_mut(&[j])
            .copy_from_slice(&inverse_to_complex(geom, s));
    }
    out
}

/// Complex Hessian φ_{i j̄} = ∂_{z_i} ∂_{z̄_j} f, Hermitian pointwise.
///
/// Diagonal entries have the even real symbol −π²(k_x² + k_y²), which is
/// unambiguous at Nyquist, so they keep those modes; off-diagonal entries
/// have odd symbols and annihilate them. This keeps the Hessian Hermitian
/// to roundoff and the discrete Monge-Ampère problem square.
pub fn hessian(f: &ScalarField) -> HermitianField {
    let geom = f.geom();
    let spec = forward_spectrum(f);
    let mut out = ComplexTensorField::zeros(geom, vec![IndexKind::Holo, IndexKind::AntiHolo]);
    for i in 0..geom.n() {
        for j in 0..geom.n() {
            let mut s = spec.clone();
            if i == j {
                multiply_modes(geom, &mut s, |k, _| {
                    let kx = k[geom.x_axis(i)] as f64;
                    let ky = k[geom.y_axis(i)] as f64;
                    Complex64::new(-PI * PI * (kx * kx + ky * ky), 0.0)
                });
            } else {
                multiply_modes(geom, &mut s, |k, nyq| {
                    if nyq {
                        ZERO_C
                    } else {
                        zeta(k, geom, i) * xi(k, geom, j)
                    }
                });
            }
            out.component_mut(&[i, j])
                .copy_from_slice(&inverse_to_complex(geom, s));
        }
    }
    HermitianField::new(out).expect("spectral Hessian of a real field must be Hermitian")
}

/// Pure holomorphic second derivatives φ_{i j} = ∂_{z_i} ∂_{z_j} f,
/// symmetric.
pub fn holo_hessian(f: &ScalarField) -> ComplexTensorField {
    let geom = f.geom();
    let spec = forward_spectrum(f);
    let mut out = ComplexTensorField::zeros(geom, vec![IndexKind::Holo, IndexKind::Holo]);
    for i in 0..geom.n() {
        for j in 0..geom.n() {
            let mut s = spec.clone();
            multiply_modes(geom, &mut s, |k, nyq| {
                if nyq {
                    ZERO_C
                } else {
                    zeta(k, geom, i) * zeta(k, geom, j)
                }
            });
            out.component_mut(&[i, j])
                .copy_from_slice(&inverse_to_complex(geom, s));
        }
    }
    out
}

/// Third mixed derivatives φ_{i j̄ k} = ∂_{z_k} ∂_{z_i} ∂_{z̄_j} f,
/// symmetric in (i, k).
pub fn third_mixed(f: &ScalarField) -> ComplexTensorField {
    let geom = f.geom();
    let spec = forward_spectrum(f);
    let mut out = ComplexTensorField::zeros(
        geom,
        vec![IndexKind::Holo, IndexKind::AntiHolo, IndexKind::Holo],
    );
    for i in 0..geom.n() {
        for j in 0..geom.n() {
            for kk in 0..geom.n() {
                let mut s = spec.clone();
                multiply_modes(geom, &mut s, |k, nyq| {
                    if nyq {
                        ZERO_C
                    } else {
                        zeta(k, geom, i) * xi(k, geom, j) * zeta(k, geom, kk)
                    }
                });
                out.component_mut(&[i, j, kk])
                    .copy_from_slice(&inverse_to_complex(geom, s));
            }
        }
    }
    out
}

/// β = |∇f|²_ω = Σ_i |∂_{z_i} f|² (background metric is the identity).
pub fn grad_norm_sq(f: &ScalarField) -> ScalarField {
    let geom = f.geom();
    let grad = gradient(f);
    let mut beta = vec![0.0; geom.points()];
    for j in 0..geom.n() {
        for (b, v) in beta.iter_mut().zip(grad.component(&[j])) {
            *b += v.norm_sqr();
        }
    }
    ScalarField::from_vec_unchecked(geom, beta)
}

/// Flat Laplacian Δ_g f = Σ_i f_{i ī} (= ¼ of the real Laplacian). The
/// symbol −π²|k|² is even, so Nyquist modes are kept, matching the Hessian
/// trace.
pub fn laplacian_flat(f: &ScalarField) -> ScalarField {
    let geom = f.geom();
    let mut spec = forward_spectrum(f);
    multiply_modes(geom, &mut spec, |k, _| {
        let mut sym = 0.0;
        for a in 0..geom.axes() {
            sym += (k[a] * k[a]) as f64;
        }
        Complex64::new(-PI * PI * sym, 0.0)
    });
    ScalarField::from_vec_unchecked(geom, inverse_to_real(geom, spec))
}

/// Sharp Fourier projection: keeps modes with max_a |k_a| ≤ cutoff
/// (mean included). The result is band-limited, hence smooth.
pub fn fourier_truncate(f: &ScalarField, cutoff: usize) -> Result<ScalarField, FieldError> {
    let geom = f.geom();
    if cutoff > geom.grid() / 2 {
        return Err(FieldError::BadCutoff {
            cutoff,
            max: geom.grid() / 2,
        });
    }
    let mut spec = forward_spectrum(f);
    let cut = cutoff as i64;
    multiply_modes(geom, &mut spec, |k, _| {
        let max_abs = (0..geom.axes()).map(|a| k[a].abs()).max().unwrap_or(0);
        if max_abs <= cut {
            Complex64::new(1.0, 0.0)
        } else {
            ZERO_C
        }
    });
    Ok(ScalarField::from_vec_unchecked(
        geom,
        inverse_to_real(geom, spec),
    ))
}

/// Solves (Δ_g − shift)·u = f spectrally. With shift = 0 the mean component
/// is projected out (u has mean zero). Used as the constant-coefficient
/// preconditioner of the Newton linear systems.
pub fn inverse_flat_laplacian_shifted(f: &ScalarField, shift: f64) -> ScalarField {
    let geom = f.geom();
    let mut spec = forward_spectrum(f);
    multiply_modes(geom, &mut spec, |k, _| {
        let mut sym = 0.0;
        for a in 0..geom.axes() {
            sym += (k[a] * k[a]) as f64;
        }
        let denom = -PI * PI * sym - shift;
        if denom == 0.0 {
            ZERO_C
        } else {
            Complex64::new(1.0 / denom, 0.0)
        }
    });
    ScalarField::from_vec_unchecked(geom, inverse_to_real(geom, spec))
}

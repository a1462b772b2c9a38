// Copyright 2026 The edgeburst Authors
// SPDX-License-Identifier: Apache-2.0

//! Periodic and open-chain spectra, the generalized Brillouin zone radius,
//! the imaginary gap, and the frequency-resolved Bloch roots.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::fit_line;
use crate::linalg::ComplexSchur;
use crate::model::{
    bloch_hamiltonian, build_real_space_hamiltonian, eigenvalues_2x2, BoundaryCondition,
    ModelParams,
};
use crate::quadrature::golden_section_min;

type C = Complex64;

/// Default imaginary regulator for root assignment on `|beta| = 1`.
pub const DEFAULT_ETA: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    /// Momentum `k` for periodic spectra, eigenvalue index for open chains.
    pub label: f64,
    pub energy: C,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub boundary: BoundaryCondition,
    pub points: Vec<SpectrumPoint>,
}

impl Spectrum {
    pub fn energies(&self) -> impl Iterator<Item = C> + '_ {
        self.points.iter().map(|p| p.energy)
    }

    /// Largest distance between any two eigenvalues.
    pub fn diameter(&self) -> f64 {
        let e: Vec<C> = self.energies().collect();
        let mut d: f64 = 0.0;
        for i in 0..e.len() {
            for j in i + 1..e.len() {
                d = d.max((e[i] - e[j]).norm());
            }
        }
        d
    }

    pub fn max_imag(&self) -> f64 {
        self.energies().map(|e| e.im).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Both Bloch bands on the grid `k_j = -pi + 2 pi j / n_k`.
pub fn pbc_spectrum(params: &ModelParams, n_k: usize) -> Result<Spectrum> {
    params.validate()?;
    if n_k < 8 {
        return Err(Error::InvalidParams(format!("n_k must be >= 8, got {n_k}")));
    }
    let mut points = Vec::with_capacity(2 * n_k);
    for j in 0..n_k {
        let k = -PI + 2.0 * PI * j as f64 / n_k as f64;
        let m = bloch_hamiltonian(params, C::from_polar(1.0, k))?;
        for energy in eigenvalues_2x2(&m) {
            points.push(SpectrumPoint { label: k, energy });
        }
    }
    Ok(Spectrum {
        boundary: BoundaryCondition::Pbc,
        points,
    })
}

/// Eigenvalues and unit right eigenvectors of the open chain, sorted by real
/// part (ties by imaginary part).
pub fn obc_eigensystem(params: &ModelParams) -> Result<(Vec<C>, DMatrix<C>)> {
    let h = build_real_space_hamiltonian(params, BoundaryCondition::Obc)?;
    let schur = ComplexSchur::new(&h.matrix)?;
    let values = schur.eigenvalues();
    let vectors = schur.eigenvectors();
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        values[a]
            .re
            .total_cmp(&values[b].re)
            .then(values[a].im.total_cmp(&values[b].im))
    });
    let sorted_values = order.iter().map(|&i| values[i]).collect();
    let sorted_vectors = DMatrix::from_fn(vectors.nrows(), vectors.ncols(), |r, c| vectors[(r, order[c])]);
    Ok((sorted_values, sorted_vectors))
}

pub fn obc_spectrum(params: &ModelParams) -> Result<Spectrum> {
    let h = build_real_space_hamiltonian(params, BoundaryCondition::Obc)?;
    let mut values = ComplexSchur::new(&h.matrix)?.eigenvalues();
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(Spectrum {
        boundary: BoundaryCondition::Obc,
        points: values
            .into_iter()
            .enumerate()
            .map(|(i, energy)| SpectrumPoint {
                label: i as f64,
                energy,
            })
            .collect(),
    })
}

/// Per-mode spatial decay rate of the open-chain right eigenvectors: slope of
/// `ln sqrt(|v_xA|^2 + |v_xB|^2)` against `x`, fitted where the profile lies
/// within `window` (natural-log units) of its maximum.
pub fn skin_decay_rates(params: &ModelParams, window: f64) -> Result<Vec<f64>> {
    let (_, vectors) = obc_eigensystem(params)?;
    let l = params.length;
    let mut rates = Vec::with_capacity(vectors.ncols());
    for col in vectors.column_iter() {
        let profile: Vec<f64> = (0..l)
            .map(|x| 0.5 * (col[2 * x].norm_sqr() + col[2 * x + 1].norm_sqr()).ln())
            .collect();
        let top = profile.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let (xs, ys): (Vec<f64>, Vec<f64>) = profile
            .iter()
            .enumerate()
            .filter(|(_, &y)| y.is_finite() && y > top - window)
            .map(|(x, &y)| ((x + 1) as f64, y))
            .unzip();
        if xs.len() >= 3 {
            rates.push(fit_line(&xs, &ys)?.slope);
        }
    }
    if rates.is_empty() {
        return Err(Error::Domain("no eigenvector spans enough sites to fit".into()));
    }
    Ok(rates)
}

/// Median of [`skin_decay_rates`] with a 25 e-fold window.
pub fn skin_decay_rate(params: &ModelParams) -> Result<f64> {
    let mut rates = skin_decay_rates(params, 25.0)?;
    rates.sort_by(f64::total_cmp);
    let n = rates.len();
    Ok(if n % 2 == 1 {
        rates[n / 2]
    } else {
        0.5 * (rates[n / 2 - 1] + rates[n / 2])
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbzInfo {
    pub r_g: f64,
}

/// `r_G = sqrt(|(t1 - gamma/2) / (t1 + gamma/2)|)`.
pub fn gbz_radius(t1: f64, gamma: f64) -> Result<GbzInfo> {
    if !(t1.is_finite() && gamma.is_finite()) {
        return Err(Error::InvalidParams("t1 and gamma must be finite".into()));
    }
    let den = t1 + 0.5 * gamma;
    if den == 0.0 {
        return Err(Error::Domain("t1 = -gamma/2 makes the GBZ radius singular".into()));
    }
    Ok(GbzInfo {
        r_g: ((t1 - 0.5 * gamma) / den).abs().sqrt(),
    })
}

/// Smallest decay rate `-Im E` over both periodic bands.
pub fn imaginary_gap(params: &ModelParams, n_k: usize) -> Result<f64> {
    params.validate()?;
    if params.gamma <= 0.0 {
        return Err(Error::Domain("imaginary gap needs gamma > 0".into()));
    }
    if n_k < 8 {
        return Err(Error::InvalidParams(format!("n_k must be >= 8, got {n_k}")));
    }
    let decay = |k: f64| -> f64 {
        let m = bloch_hamiltonian(params, C::from_polar(1.0, k)).expect("unit-circle beta");
        let [a, b] = eigenvalues_2x2(&m);
        (-a.im).min(-b.im)
    };
    let dk = 2.0 * PI / n_k as f64;
    let (mut best_k, mut best) = (-PI, f64::INFINITY);
    for j in 0..n_k {
        let k = -PI + dk * j as f64;
        let v = decay(k);
        if v < best {
            best = v;
            best_k = k;
        }
    }
    let (_, refined) = golden_section_min(decay, best_k - dk, best_k + dk, 1e-12);
    Ok(best.min(refined).max(0.0))
}

/// Root pair of the characteristic equation at a real frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochRoots {
    pub omega: f64,
    pub beta_l: C,
    pub beta_r: C,
    pub f_l: C,
    pub f_r: C,
}

fn check_root_params(params: &ModelParams) -> Result<()> {
    params.validate()?;
    if params.t1 + 0.5 * params.gamma == 0.0 {
        return Err(Error::Domain(
            "t1 + gamma/2 = 0: the quadratic in beta degenerates".into(),
        ));
    }
    Ok(())
}

/// Both roots in `beta` at complex energy `e`, larger modulus first.
pub fn beta_roots(params: &ModelParams, e: C) -> (C, C) {
    let (t1, t2, g) = (params.t1, params.t2, params.gamma);
    let a = C::new(-t2 * (t1 + 0.5 * g), 0.0);
    let b = e * e + C::i() * g * e - t1 * t1 - t2 * t2;
    let c = C::new(t2 * (0.5 * g - t1), 0.0);
    let disc = (b * b - a * c * 4.0).sqrt();
    // Avoid cancellation: pick the sign that adds magnitudes.
    let s = if (b.conj() * disc).re >= 0.0 { disc } else { -disc };
    let q = -(b + s) * 0.5;
    let (r1, r2) = if q == C::new(0.0, 0.0) {
        (C::new(0.0, 0.0), C::new(0.0, 0.0))
    } else {
        (q / a, c / q)
    };
    if r1.norm() >= r2.norm() {
        (r1, r2)
    } else {
        (r2, r1)
    }
}

/// `f` factor for the root `beta` with partner `other`.
pub fn f_factor(params: &ModelParams, beta: C, other: C) -> C {
    let (t1, t2, g) = (params.t1, params.t2, params.gamma);
    (t1 + t2 * (beta + beta.inv()) * 0.5) / (t2 * (t1 + 0.5 * g) * (beta - other))
}

/// `beta_L(e)` and `f_L(e)` at complex energy, for analytic continuation.
pub fn left_root_and_factor(params: &ModelParams, e: C) -> (C, C) {
    let (bl, br) = beta_roots(params, e);
    (bl, f_factor(params, bl, br))
}

/// Solves at `E = omega + i eta` and assigns `beta_L`/`beta_R` by modulus.
/// When `beta_R = 0` (at `t1 = gamma/2`) `f_R` is not finite.
pub fn bloch_roots(params: &ModelParams, omega: f64, eta: f64) -> Result<BlochRoots> {
    check_root_params(params)?;
    if params.gamma <= 0.0 {
        return Err(Error::Domain("root ordering needs gamma > 0".into()));
    }
    if !omega.is_finite() || !eta.is_finite() || eta < 0.0 {
        return Err(Error::InvalidParams("omega must be finite and eta >= 0".into()));
    }
    let (beta_l, beta_r) = beta_roots(params, C::new(omega, eta));
    let (ml, mr) = (beta_l.norm(), beta_r.norm());
    if (ml - mr).abs() <= 1e-12 * ml.max(1.0) {
        return Err(Error::DegenerateRoots { omega });
    }
    Ok(BlochRoots {
        omega,
        beta_l,
        beta_r,
        f_l: f_factor(params, beta_l, beta_r),
        f_r: f_factor(params, beta_r, beta_l),
    })
}

/// `d beta / d omega` along a root branch at complex energy `omega`.
pub fn dbeta_domega(params: &ModelParams, omega: C, beta: C) -> C {
    let (t1, t2, g) = (params.t1, params.t2, params.gamma);
    let i = C::i();
    (omega * 2.0 + i * g)
        / (2.0 * t1 * t2 + t2 * g + (t1 * t1 + t2 * t2 - omega * omega - i * g * omega) / beta)
}

/// Frequency window used to search `min |beta_L|`.
pub fn beta_search_half_width(params: &ModelParams) -> f64 {
    2.0 * params.t2.abs() + params.t1.abs() + params.gamma
}

/// Global minimum of `|beta_L(omega)|` over real `omega`: a 4001-point grid
/// then golden-section refinement. Returns `(omega_min, value)`.
pub fn min_abs_beta_l(params: &ModelParams) -> Result<(f64, f64)> {
    check_root_params(params)?;
    if params.gamma <= 0.0 {
        return Err(Error::Domain("min |beta_L| needs gamma > 0".into()));
    }
    if params.t1.abs() <= params.t2.abs() {
        return Err(Error::Domain(
            "min |beta_L| is sought only with an open imaginary gap (|t1| > |t2|)".into(),
        ));
    }
    let w = beta_search_half_width(params);
    let n = 4001;
    let step = 2.0 * w / (n - 1) as f64;
    let abs_l = |omega: f64| beta_roots(params, C::new(omega, DEFAULT_ETA)).0.norm();
    let mut best = (0.0, f64::INFINITY);
    for j in 0..n {
        let omega = -w + step * j as f64;
        let v = abs_l(omega);
        // Strict comparison with a relative margin keeps the symmetric
        // partner at -omega from replacing an equal minimum.
        if v < best.1 * (1.0 - 1e-14) {
            best = (omega, v);
        }
    }
    let (x, fx) = golden_section_min(abs_l, best.0 - step, best.0 + step, 1e-10);
    Ok(if fx < best.1 { (x, fx) } else { best })
}

/// `beta_L(0)` from its closed form.
pub fn beta_l_at_zero_closed_form(params: &ModelParams) -> f64 {
    let (t1, t2, g) = (params.t1, params.t2, params.gamma);
    let num = -t1 * t1 - t2 * t2 - ((t1 * t1 - t2 * t2).powi(2) + t2 * t2 * g * g).sqrt();
    num / (2.0 * t2 * (t1 + 0.5 * g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::characteristic;
    use proptest::prelude::*;

    fn params(t1: f64, gamma: f64) -> ModelParams {
        ModelParams::new(t1, 0.5, gamma, 100, 90).unwrap()
    }

    #[test]
    fn gbz_radius_values() {
        assert_eq!(gbz_radius(0.3, 0.6).unwrap().r_g, 0.0);
        assert_eq!(gbz_radius(0.3, 0.0).unwrap().r_g, 1.0);
        assert!((gbz_radius(0.3, 1.0).unwrap().r_g - 0.5).abs() < 1e-15);
        assert!(gbz_radius(-0.5, 1.0).is_err());
    }

    #[test]
    fn pbc_gap_closes_and_opens() {
        let s = pbc_spectrum(&params(0.3, 0.5), 2000).unwrap();
        let closest = s.energies().map(|e| e.im.abs()).fold(f64::INFINITY, f64::min);
        assert!(closest < 1e-3);
        let s = pbc_spectrum(&params(0.7, 0.5), 2000).unwrap();
        let gap = s.energies().map(|e| -e.im).fold(f64::INFINITY, f64::min);
        assert!(gap > 0.01);
        let s = pbc_spectrum(&params(0.3, 0.0), 64).unwrap();
        assert!(s.energies().all(|e| e.im.abs() < 1e-15));
        assert!(pbc_spectrum(&params(0.3, 1.0), 4).is_err());
    }

    #[test]
    fn pbc_eigenvalues_solve_characteristic_equation() {
        let p = params(0.45, 1.3);
        for pt in pbc_spectrum(&p, 64).unwrap().points {
            let r = characteristic(&p, pt.energy, C::from_polar(1.0, pt.label));
            assert!(r.norm() < 1e-10);
        }
    }

    #[test]
    fn pbc_real_space_spectrum_matches_bloch_grid() {
        let p = ModelParams::new(0.4, 0.5, 0.7, 12, 1).unwrap();
        let h = build_real_space_hamiltonian(&p, BoundaryCondition::Pbc).unwrap();
        let real_space = ComplexSchur::new(&h.matrix).unwrap().eigenvalues();
        let mut bloch: Vec<C> = (0..12)
            .flat_map(|n| {
                let k = 2.0 * PI * n as f64 / 12.0;
                eigenvalues_2x2(&bloch_hamiltonian(&p, C::from_polar(1.0, k)).unwrap())
            })
            .collect();
        assert_eq!(real_space.len(), bloch.len());
        for a in &real_space {
            let (i, d) = bloch
                .iter()
                .map(|b| (a - b).norm())
                .enumerate()
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap();
            assert!(d < 1e-10, "{a} unmatched ({d:.3e})");
            bloch.swap_remove(i);
        }
    }

    #[test]
    fn imaginary_gap_cases() {
        assert!(imaginary_gap(&params(0.3, 2.0), 512).unwrap() < 1e-9);
        assert!(imaginary_gap(&params(0.5, 1.0), 512).unwrap() < 1e-9);
        assert!(imaginary_gap(&params(0.7, 2.0), 512).unwrap() > 1e-3);
        assert!(imaginary_gap(&params(0.7, 0.0), 512).is_err());
    }

    #[test]
    fn obc_spectrum_sorted_and_dissipative() {
        let p = ModelParams::new(0.3, 0.5, 1.0, 20, 10).unwrap();
        let s = obc_spectrum(&p).unwrap();
        assert_eq!(s.points.len(), 40);
        assert!(s.max_imag() <= 1e-10);
        for w in s.points.windows(2) {
            assert!(w[0].energy.re <= w[1].energy.re);
        }
        let s = obc_spectrum(&p.with_gamma(0.0)).unwrap();
        assert!(s.energies().all(|e| e.im.abs() < 1e-12));
    }

    #[test]
    fn beta_l_at_zero_matches_quadratic_root() {
        let p = ModelParams::new(0.7, 0.5, 1.0, 100, 90).unwrap();
        let r = bloch_roots(&p, 0.0, 0.0).unwrap();
        let closed = beta_l_at_zero_closed_form(&p);
        assert!((r.beta_l - C::new(closed, 0.0)).norm() < 1e-10);
        assert!((closed + 1.078_847_487_462_068).abs() < 1e-12);
        assert!(r.beta_l.im.abs() < 1e-12);
    }

    #[test]
    fn dbeta_domega_at_zero_is_imaginary_and_matches_difference() {
        let p = ModelParams::new(0.7, 0.5, 1.4, 100, 90).unwrap();
        let r = bloch_roots(&p, 0.0, 0.0).unwrap();
        let d = dbeta_domega(&p, C::new(0.0, 0.0), r.beta_l);
        assert!(d.re.abs() < 1e-10 * d.norm().max(1.0));
        let h = 1e-5;
        let fd = (bloch_roots(&p, h, 0.0).unwrap().beta_l - bloch_roots(&p, -h, 0.0).unwrap().beta_l) / (2.0 * h);
        assert!((fd - d).norm() < 1e-6);
    }

    #[test]
    fn degenerate_roots_reported() {
        // Without loss the roots at a band frequency both sit on |beta| = 1.
        let p = ModelParams::new(0.3, 0.5, 1e-30, 10, 5).unwrap();
        assert!(matches!(
            bloch_roots(&p, 0.2, 0.0),
            Err(Error::DegenerateRoots { .. })
        ));
        assert!(bloch_roots(&p.with_gamma(0.0), 0.2, 1e-9).is_err());
    }

    #[test]
    fn lossless_limit_on_unit_circle() {
        let p = ModelParams::new(0.3, 0.5, 1e-7, 10, 5).unwrap();
        let r = bloch_roots(&p, 0.3, DEFAULT_ETA).unwrap();
        assert!((r.beta_l.norm() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn min_abs_beta_l_gap_open() {
        let p = ModelParams::new(0.7, 0.5, 1.0, 100, 90).unwrap();
        let (omega, value) = min_abs_beta_l(&p).unwrap();
        assert!(omega.abs() < 1e-4, "omega_min = {omega}");
        assert!((value - 1.078_847_487_462_068).abs() < 1e-8);
        assert!(min_abs_beta_l(&params(0.3, 1.0)).is_err());
    }

    #[test]
    fn min_abs_beta_l_tends_to_one() {
        let p = ModelParams::new(0.7, 0.5, 1.0, 100, 90).unwrap();
        let mut prev = f64::INFINITY;
        for g in [3.0, 5.0, 10.0, 30.0, 100.0] {
            let v = min_abs_beta_l(&p.with_gamma(g)).unwrap().1;
            assert!(v < prev && v > 1.0);
            prev = v;
        }
        assert!(prev < 1.01);
    }

    proptest! {
        #[test]
        fn root_ordering_and_product(
            t1 in -1.5f64..1.5,
            t2 in prop_oneof![-1.5f64..-0.05, 0.05f64..1.5],
            gamma in 0.01f64..50.0,
            omega in -5.0f64..5.0,
        ) {
            prop_assume!((t1 + gamma / 2.0).abs() > 1e-3);
            let p = ModelParams::new(t1, t2, gamma, 10, 1).unwrap();
            if let Ok(r) = bloch_roots(&p, omega, DEFAULT_ETA) {
                prop_assert!(r.beta_l.norm() >= 1.0 - 1e-9);
                prop_assert!(r.beta_r.norm() <= 1.0 + 1e-9);
                let prod = r.beta_l * r.beta_r;
                prop_assert!((prod - C::new(p.root_product(), 0.0)).norm() < 1e-10 * (1.0 + p.root_product().abs()));
                let rg = gbz_radius(t1, gamma).unwrap().r_g;
                prop_assert!((prod.norm().sqrt() - rg).abs() < 1e-10);
                for beta in [r.beta_l, r.beta_r] {
                    if beta.norm() > 1e-6 {
                        let res = characteristic(&p, C::new(omega, DEFAULT_ETA), beta);
                        prop_assert!(res.norm() < 1e-9 * (1.0 + beta.norm() + beta.norm().recip()));
                    }
                }
            }
        }
    }
}

// Copyright 2026 The edgeburst Authors
// SPDX-License-Identifier: Apache-2.0

//! Globally adaptive Gauss-Kronrod (7/15) quadrature for vector-valued
//! integrands, real-line mapping, and golden-section minimization.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// Gauss weights for the nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Budget in integrand evaluations.
    pub max_evals: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-8,
            max_evals: 2_000_000,
        }
    }
}

/// Integral estimate per component with its error estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct VecQuadrature {
    pub value: Vec<f64>,
    pub error: Vec<f64>,
    pub evals: usize,
    /// Final subdivision: `(a, b, value)` per panel.
    pub pieces: Vec<(f64, f64, Vec<f64>)>,
}

struct Panel {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: Vec<f64>,
}

fn gk15<F: FnMut(f64) -> Vec<f64>>(f: &mut F, a: f64, b: f64) -> Panel {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let dim = fc.len();
    let mut kron: Vec<f64> = fc.iter().map(|v| v * WGK[7]).collect();
    let mut gauss: Vec<f64> = fc.iter().map(|v| v * WG[3]).collect();
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(centre - dx);
        let f2 = f(centre + dx);
        for d in 0..dim {
            let s = f1[d] + f2[d];
            kron[d] += WGK[j] * s;
            if j % 2 == 1 {
                gauss[d] += WG[j / 2] * s;
            }
        }
    }
    let scale = half.abs();
    let value: Vec<f64> = kron.iter().map(|k| k * scale).collect();
    let error = kron
        .iter()
        .zip(&gauss)
        .map(|(k, g)| ((k - g) * scale).abs())
        .collect();
    Panel { a, b, value, error }
}

/// Integrates `f` over the union of `panels`, bisecting the panels that carry
/// the largest share of the error until every component satisfies
/// `error <= max(abs_tol, rel_tol * |value|)`.
pub fn integrate_panels<F>(
    mut f: F,
    panels: &[(f64, f64)],
    opts: &QuadratureOptions,
) -> Result<VecQuadrature>
where
    F: FnMut(f64) -> Vec<f64>,
{
    if panels.is_empty() {
        return Err(Error::InvalidParams("no quadrature panels".into()));
    }
    let mut evals = 0usize;
    let mut work: Vec<Panel> = panels
        .iter()
        .map(|&(a, b)| {
            evals += 15;
            gk15(&mut f, a, b)
        })
        .collect();
    let dim = work[0].value.len();

    loop {
        let mut total = vec![0.0; dim];
        let mut total_err = vec![0.0; dim];
        for p in &work {
            for d in 0..dim {
                total[d] += p.value[d];
                total_err[d] += p.error[d];
            }
        }
        let tol: Vec<f64> = total
            .iter()
            .map(|v| opts.abs_tol.max(opts.rel_tol * v.abs()))
            .collect();
        let badness: Vec<f64> = work
            .iter()
            .map(|p| {
                (0..dim)
                    .map(|d| p.error[d] / tol[d])
                    .fold(0.0, f64::max)
            })
            .collect();
        let total_badness: f64 = badness.iter().sum();
        if total_badness <= 1.0 || total_err.iter().zip(&tol).all(|(e, t)| e <= t) {
            return Ok(VecQuadrature {
                value: total,
                error: total_err,
                evals,
                pieces: work.into_iter().map(|p| (p.a, p.b, p.value)).collect(),
            });
        }
        if evals >= opts.max_evals {
            let worst = (0..dim)
                .max_by(|&i, &j| {
                    (total_err[i] / tol[i])
                        .partial_cmp(&(total_err[j] / tol[j]))
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(0);
            return Err(Error::Quadrature {
                estimate: total[worst],
                error_bound: total_err[worst],
            });
        }

        let mut order: Vec<usize> = (0..work.len()).collect();
        order.sort_by(|&i, &j| badness[j].partial_cmp(&badness[i]).unwrap_or(std::cmp::Ordering::Equal));
        let mut chosen = Vec::new();
        let mut acc = 0.0;
        for &i in &order {
            let p = &work[i];
            let width_floor = 1e-13 * (p.a.abs() + p.b.abs()).max(1e-300);
            if (p.b - p.a).abs() <= width_floor {
                continue;
            }
            chosen.push(i);
            acc += badness[i];
            if acc >= 0.5 * total_badness {
                break;
            }
        }
        if chosen.is_empty() {
            // Nothing left to split at floating-point resolution.
            return Ok(VecQuadrature {
                value: total,
                error: total_err,
                evals,
                pieces: work.into_iter().map(|p| (p.a, p.b, p.value)).collect(),
            });
        }
        chosen.sort_unstable_by(|a, b| b.cmp(a));
        for i in chosen {
            let p = work.swap_remove(i);
            let mid = 0.5 * (p.a + p.b);
            work.push(gk15(&mut f, p.a, mid));
            work.push(gk15(&mut f, mid, p.b));
            evals += 30;
        }
    }
}

/// Scalar convenience wrapper over [`integrate_panels`] on `[a, b]` split
/// into `pieces` equal panels.
pub fn integrate<F>(mut f: F, a: f64, b: f64, pieces: usize, opts: &QuadratureOptions) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let panels = uniform_panels(a, b, pieces.max(1));
    let r = integrate_panels(|x| vec![f(x)], &panels, opts)?;
    Ok((r.value[0], r.error[0]))
}

pub fn uniform_panels(a: f64, b: f64, pieces: usize) -> Vec<(f64, f64)> {
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let lo = a + h * i as f64;
            let hi = if i + 1 == pieces { b } else { a + h * (i + 1) as f64 };
            (lo, hi)
        })
        .collect()
}

/// Result of a real-line integral split into a finite core and two tails.
#[derive(Debug, Clone, PartialEq)]
pub struct RealLineQuadrature {
    pub value: Vec<f64>,
    pub error: Vec<f64>,
    /// Contribution of `|x| > core` per component.
    pub tail: Vec<f64>,
    pub evals: usize,
}

/// Integrates `f` over the whole real line. The core `[lo, hi]` is split into
/// `core_panels` panels; the tails are mapped to `(0, 1]` by `x = hi + (1-u)/u`
/// and `x = lo - (1-u)/u`. The integrand must decay faster than `1/x`.
pub fn integrate_real_line<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    core_panels: usize,
    opts: &QuadratureOptions,
) -> Result<RealLineQuadrature>
where
    F: FnMut(f64) -> Vec<f64>,
{
    if !(hi > lo) {
        return Err(Error::InvalidParams(format!("empty core window [{lo}, {hi}]")));
    }
    // Parameter s in (0, 1): left tail, [1, 2]: core, (2, 3): right tail.
    let width = hi - lo;
    let mapped = |s: f64| -> Vec<f64> {
        if s < 1.0 {
            let u = s;
            let x = lo - (1.0 - u) / u;
            f(x).into_iter().map(|v| v / (u * u)).collect()
        } else if s <= 2.0 {
            let x = lo + (s - 1.0) * width;
            f(x).into_iter().map(|v| v * width).collect()
        } else {
            let u = 3.0 - s;
            let x = hi + (1.0 - u) / u;
            f(x).into_iter().map(|v| v / (u * u)).collect()
        }
    };
    let mut panels = uniform_panels(0.0, 1.0, 4);
    panels.extend(uniform_panels(1.0, 2.0, core_panels.max(1)));
    panels.extend(uniform_panels(2.0, 3.0, 4));
    let r = integrate_panels(mapped, &panels, opts)?;
    let mut tail = vec![0.0; r.value.len()];
    for (a, b, v) in &r.pieces {
        if *b <= 1.0 || *a >= 2.0 {
            for (t, x) in tail.iter_mut().zip(v) {
                *t += x;
            }
        }
    }
    Ok(RealLineQuadrature {
        value: r.value,
        error: r.error,
        tail,
        evals: r.evals,
    })
}

/// Golden-section search for a minimum of a unimodal `f` on `[a, b]`.
/// Returns `(x_min, f(x_min))`.
pub fn golden_section_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    let mut best = (x, fx);
    for cand in [(c, fc), (d, fd)] {
        if cand.1 < best.1 {
            best = cand;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let (v, e) = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, 1, &Default::default()).unwrap();
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0);
        assert!((v - exact).abs() < 1e-13);
        assert!(e < 1e-12);
    }

    #[test]
    fn narrow_lorentzian() {
        let eps = 1e-4;
        let opts = QuadratureOptions {
            rel_tol: 1e-10,
            ..Default::default()
        };
        let (v, _) = integrate(|x| eps / (x * x + eps * eps), -1.0, 1.0, 8, &opts).unwrap();
        let exact = 2.0 * (1.0 / eps).atan();
        assert!((v - exact).abs() < 1e-8, "{v} vs {exact}");
    }

    #[test]
    fn vector_components_converge_independently() {
        let r = integrate_panels(
            |x| vec![x.sin(), (50.0 * x).cos()],
            &[(0.0, PI)],
            &QuadratureOptions {
                rel_tol: 1e-12,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((r.value[0] - 2.0).abs() < 1e-11);
        assert!((r.value[1] - (50.0 * PI).sin() / 50.0).abs() < 1e-11);
    }

    #[test]
    fn real_line_gaussian_and_tail() {
        let r = integrate_real_line(
            |x| vec![(-x * x).exp(), 1.0 / (1.0 + x * x)],
            -1.0,
            1.0,
            8,
            &QuadratureOptions {
                rel_tol: 1e-11,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((r.value[0] - PI.sqrt()).abs() < 1e-10);
        assert!((r.value[1] - PI).abs() < 1e-9);
        assert!((r.tail[1] - PI / 2.0).abs() < 1e-9);
    }

    #[test]
    fn budget_exhaustion_reports_estimate() {
        let opts = QuadratureOptions {
            abs_tol: 1e-300,
            rel_tol: 1e-300,
            max_evals: 200,
        };
        match integrate(|x| x.abs().sqrt(), -1.0, 1.0, 1, &opts) {
            Err(Error::Quadrature { estimate, error_bound }) => {
                assert!((estimate - 4.0 / 3.0).abs() < 1e-2);
                assert!(error_bound > 0.0);
            }
            other => panic!("expected quadrature error, got {other:?}"),
        }
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (x, fx) = golden_section_min(|x| (x - 0.3).powi(2) + 1.0, -2.0, 5.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-15);
    }
}

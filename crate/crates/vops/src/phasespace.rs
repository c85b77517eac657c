//! s-parametrized quasiprobability distributions for single- and two-mode
//! states truncated to the `{|0>, |1>}` photon sector: pointwise evaluation,
//! grids, marginals, displaced-parity cross-checks, quadrature-based state
//! reconstruction, and maximum-projection probability surfaces.

use crate::error::{Error, Result};
use crate::linalg::{c64, validate_density, C64, CMat};
use crate::quad::{gauss_hermite, pairwise_sum};
use crate::states::{QubitState, TwoModeState};

const PI: f64 = std::f64::consts::PI;

/// Largest `s` accepted for pointwise evaluation; the normal-ordered limit
/// `s -> 1` is analytically singular and excluded.
pub const MAX_EVAL_S: f64 = 0.95;

/// Fock cutoff used by [`wigner_displaced_parity`] when none is given.
pub const DEFAULT_PARITY_CUTOFF: usize = 32;

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn check_order_s(s: f64) -> Result<()> {
    if !s.is_finite() || !(-1.0..=1.0 - 1e-6).contains(&s) {
        return Err(Error::Domain(format!(
            "quasiprobability order s = {s} outside [-1, 1); the s -> 1 limit is a singular normal-ordered distribution"
        )));
    }
    Ok(())
}

fn check_eval_s(s: f64) -> Result<()> {
    check_order_s(s)?;
    if s >= MAX_EVAL_S {
        return Err(Error::Domain(format!(
            "quasiprobability order s = {s} is at or above the evaluation cap {MAX_EVAL_S}; \
             the s -> 1 limit is out of scope"
        )));
    }
    Ok(())
}

/// Fock matrix element `<n| T^(s)(alpha) |m>` of the s-ordered point
/// operator, for any `n, m` and `s` in `[-1, 1)`. At `s = -1` these are the
/// coherent-projector elements `<n|alpha><alpha|m>`.
pub fn t_element(s: f64, n: usize, m: usize, alpha: C64) -> Result<C64> {
    check_order_s(s)?;
    if n > m {
        return Ok(t_element(s, m, n, alpha)?.conj());
    }
    let sm = 2.0 / (1.0 - s);
    let w = (1.0 + s) / 2.0;
    let z = sm * alpha.norm_sqr();
    let delta = m - n;
    // Scaled associated-Laguerre sum: q_n = sum_k C(n+delta, n-k) (-z)^k w^(n-k) / k!.
    let mut q = 0.0f64;
    let mut zk = 1.0f64;
    for k in 0..=n {
        let choose =
            factorial(n + delta) / (factorial(n - k) * factorial(delta + k));
        q += choose * zk * w.powi((n - k) as i32) / factorial(k);
        zk *= -z;
    }
    let pref = (factorial(n) / factorial(m)).sqrt()
        * (-sm).powi(n as i32)
        * sm.powi(delta as i32 + 1)
        * (-z).exp();
    Ok(alpha.conj().powu(delta as u32) * (pref * q))
}

/// s-parametrized quasiprobability of a single-mode state at phase-space
/// point `alpha`: `(1/pi) Tr[sigma T^(s)(alpha)]`.
pub fn qpd_single(sigma: &QubitState, s: f64, alpha: C64) -> Result<f64> {
    check_eval_s(s)?;
    let t00 = t_element(s, 0, 0, alpha)?;
    let t01 = t_element(s, 0, 1, alpha)?;
    let t10 = t01.conj();
    let t11 = t_element(s, 1, 1, alpha)?;
    let (p, x) = (sigma.p(), sigma.x());
    let v = t00 * (1.0 - p) + t11 * p + t10 * x + t01 * x.conj();
    debug_assert!(v.im.abs() < 1e-12);
    Ok(v.re / PI)
}

/// 2x2 matrix of T-elements at one point, `t[n][m] = <n|T^(s)(alpha)|m>`.
fn t_matrix(s: f64, alpha: C64) -> [[C64; 2]; 2] {
    let t00 = t_element(s, 0, 0, alpha).expect("order validated");
    let t01 = t_element(s, 0, 1, alpha).expect("order validated");
    let t11 = t_element(s, 1, 1, alpha).expect("order validated");
    [[t00, t01], [t01.conj(), t11]]
}

fn contract(rho: &TwoModeState, g1: &[[C64; 2]; 2], g2: &[[C64; 2]; 2]) -> C64 {
    let mut v = c64(0.0, 0.0);
    for n1 in 0..2 {
        for n2 in 0..2 {
            for m1 in 0..2 {
                for m2 in 0..2 {
                    v += rho.entry(2 * n1 + n2, 2 * m1 + m2) * g1[m1][n1] * g2[m2][n2];
                }
            }
        }
    }
    v
}

/// s-parametrized quasiprobability of a two-mode state:
/// `(1/pi^2) Tr[rho T^(s)(alpha1) (x) T^(s)(alpha2)]`.
pub fn qpd_two(rho: &TwoModeState, s: f64, a1: C64, a2: C64) -> Result<f64> {
    check_eval_s(s)?;
    let v = contract(rho, &t_matrix(s, a1), &t_matrix(s, a2));
    debug_assert!(v.im.abs() < 1e-12);
    Ok(v.re / (PI * PI))
}

/// Uniform real axis `min, min+step, ..., max`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && step.is_finite()) {
            return Err(Error::Domain("grid bounds must be finite".into()));
        }
        if step <= 0.0 {
            return Err(Error::Domain(format!("grid step {step} must be positive")));
        }
        if max < min {
            return Err(Error::Domain(format!("grid max {max} below min {min}")));
        }
        Ok(GridSpec { min, max, step })
    }

    pub fn values(&self) -> Vec<f64> {
        let n = ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|k| self.min + k as f64 * self.step).collect()
    }
}

/// Sampled quasiprobability (or marginal) on a rectangular grid. `values` is
/// row-major with the first axis outermost.
#[derive(Clone, Debug, PartialEq)]
pub struct QpdGrid {
    pub s: f64,
    pub modes: usize,
    pub axis_labels: Vec<String>,
    pub axes: Vec<Vec<f64>>,
    pub steps: Vec<f64>,
    pub values: Vec<f64>,
}

impl QpdGrid {
    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Riemann integral of the samples over the grid.
    pub fn integral(&self) -> f64 {
        let cell: f64 = self.steps.iter().product();
        pairwise_sum(&self.values) * cell
    }
}

/// Samples the single-mode quasiprobability of `sigma` over
/// `X = Re alpha`, `Y = Im alpha` grids.
pub fn qpd_grid_single(
    sigma: &QubitState,
    s: f64,
    x_axis: &GridSpec,
    y_axis: &GridSpec,
) -> Result<QpdGrid> {
    check_eval_s(s)?;
    let xs = x_axis.values();
    let ys = y_axis.values();
    let mut values = Vec::with_capacity(xs.len() * ys.len());
    for &x in &xs {
        for &y in &ys {
            values.push(qpd_single(sigma, s, c64(x, y))?);
        }
    }
    Ok(QpdGrid {
        s,
        modes: 1,
        axis_labels: vec!["X".into(), "Y".into()],
        axes: vec![xs, ys],
        steps: vec![x_axis.step, y_axis.step],
        values,
    })
}

/// Which pair of quadratures a two-mode Wigner marginal keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MarginalPair {
    X1Y1,
    X2Y2,
    X1X2,
    Y1Y2,
}

impl MarginalPair {
    fn labels(&self) -> [&'static str; 2] {
        match self {
            MarginalPair::X1Y1 => ["X1", "Y1"],
            MarginalPair::X2Y2 => ["X2", "Y2"],
            MarginalPair::X1X2 => ["X1", "X2"],
            MarginalPair::Y1Y2 => ["Y1", "Y2"],
        }
    }
}

/// Polynomial part of the Wigner point matrix: `T^(0)(alpha) =
/// 2 e^{-2|alpha|^2} [[1, 2 alpha*], [2 alpha, 4|alpha|^2 - 1]]`.
fn wigner_poly(alpha: C64) -> [[C64; 2]; 2] {
    let a2 = alpha.norm_sqr();
    [
        [c64(2.0, 0.0), alpha.conj() * 4.0],
        [alpha * 4.0, c64(2.0 * (4.0 * a2 - 1.0), 0.0)],
    ]
}

enum AxisReduce {
    /// Keep the point value at `re + i im`.
    Point(f64, f64),
    /// Integrate out Im alpha at fixed Re alpha.
    IntegrateIm(f64),
    /// Integrate out Re alpha at fixed Im alpha.
    IntegrateRe(f64),
}

/// Wigner T-matrix of one mode with zero or one quadrature integrated out.
/// Gauss-Hermite against the `e^{-2|alpha|^2}` envelope; the envelope of any
/// non-integrated quadrature stays in the result.
fn reduced_t_matrix(reduce: &AxisReduce, nodes: &[f64], weights: &[f64]) -> [[C64; 2]; 2] {
    let mut acc = [[c64(0.0, 0.0); 2]; 2];
    let scale = 2.0f64.sqrt();
    match reduce {
        AxisReduce::Point(re, im) => {
            let env = (-2.0 * (re * re + im * im)).exp();
            let p = wigner_poly(c64(*re, *im));
            for n in 0..2 {
                for m in 0..2 {
                    acc[n][m] = p[n][m] * env;
                }
            }
        }
        AxisReduce::IntegrateIm(re) => {
            let env = (-2.0 * re * re).exp();
            for (u, w) in nodes.iter().zip(weights) {
                let y = u / scale;
                let p = wigner_poly(c64(*re, y));
                for n in 0..2 {
                    for m in 0..2 {
                        acc[n][m] += p[n][m] * (w / scale * env);
                    }
                }
            }
        }
        AxisReduce::IntegrateRe(im) => {
            let env = (-2.0 * im * im).exp();
            for (u, w) in nodes.iter().zip(weights) {
                let x = u / scale;
                let p = wigner_poly(c64(x, *im));
                for n in 0..2 {
                    for m in 0..2 {
                        acc[n][m] += p[n][m] * (w / scale * env);
                    }
                }
            }
        }
    }
    acc
}

/// Wigner T-matrix of one mode with both quadratures integrated out.
fn fully_integrated_t_matrix(nodes: &[f64], weights: &[f64]) -> [[C64; 2]; 2] {
    let mut acc = [[c64(0.0, 0.0); 2]; 2];
    let scale = 2.0f64.sqrt();
    for (ux, wx) in nodes.iter().zip(weights) {
        for (uy, wy) in nodes.iter().zip(weights) {
            let p = wigner_poly(c64(ux / scale, uy / scale));
            for n in 0..2 {
                for m in 0..2 {
                    acc[n][m] += p[n][m] * (wx * wy / 2.0);
                }
            }
        }
    }
    acc
}

/// Two-dimensional marginal of the two-mode Wigner function (`s = 0`): the
/// other two quadratures are integrated out by Gauss-Hermite quadrature.
pub fn marginal(
    rho: &TwoModeState,
    pair: MarginalPair,
    axis_a: &GridSpec,
    axis_b: &GridSpec,
) -> Result<QpdGrid> {
    let (nodes, weights) = gauss_hermite(24);
    let va = axis_a.values();
    let vb = axis_b.values();
    let mut values = Vec::with_capacity(va.len() * vb.len());
    for &a in &va {
        for &b in &vb {
            let (g1, g2) = match pair {
                MarginalPair::X1Y1 => (
                    reduced_t_matrix(&AxisReduce::Point(a, b), &nodes, &weights),
                    fully_integrated_t_matrix(&nodes, &weights),
                ),
                MarginalPair::X2Y2 => (
                    fully_integrated_t_matrix(&nodes, &weights),
                    reduced_t_matrix(&AxisReduce::Point(a, b), &nodes, &weights),
                ),
                MarginalPair::X1X2 => (
                    reduced_t_matrix(&AxisReduce::IntegrateIm(a), &nodes, &weights),
                    reduced_t_matrix(&AxisReduce::IntegrateIm(b), &nodes, &weights),
                ),
                MarginalPair::Y1Y2 => (
                    reduced_t_matrix(&AxisReduce::IntegrateRe(a), &nodes, &weights),
                    reduced_t_matrix(&AxisReduce::IntegrateRe(b), &nodes, &weights),
                ),
            };
            let v = contract(rho, &g1, &g2);
            debug_assert!(v.im.abs() < 1e-10);
            values.push(v.re / (PI * PI));
        }
    }
    let labels = pair.labels();
    Ok(QpdGrid {
        s: 0.0,
        modes: 2,
        axis_labels: vec![labels[0].into(), labels[1].into()],
        axes: vec![va, vb],
        steps: vec![axis_a.step, axis_b.step],
        values,
    })
}

/// Annihilation operator on the `{|0>, ..., |cutoff>}` truncation.
fn lowering(cutoff: usize) -> CMat {
    CMat::from_fn(cutoff + 1, |i, j| {
        if j == i + 1 {
            c64((j as f64).sqrt(), 0.0)
        } else {
            c64(0.0, 0.0)
        }
    })
}

/// Displacement operator in normal-ordered form
/// `D(alpha) = e^{-|alpha|^2/2} exp(alpha a^dag) exp(-alpha* a)`. Each
/// exponential is an exact finite sum (the truncated ladder operators are
/// nilpotent), so the departure of `D^dag D` from the identity measures the
/// cutoff truncation error itself.
fn displacement(alpha: C64, cutoff: usize) -> CMat {
    let a = lowering(cutoff);
    let up = a.adjoint().scale(alpha);
    let down = a.scale(-alpha.conj());
    let poly_exp = |m: &CMat| {
        let mut sum = CMat::identity(cutoff + 1);
        let mut term = CMat::identity(cutoff + 1);
        for k in 1..=cutoff {
            term = term.mul(m).scale(c64(1.0 / k as f64, 0.0));
            sum = sum.add(&term);
        }
        sum
    };
    poly_exp(&up).mul(&poly_exp(&down)).scale(c64((-alpha.norm_sqr() / 2.0).exp(), 0.0))
}

/// Displaced parity expectation `M(alpha) = D(alpha) P D(alpha)^dag` on the
/// two-dimensional sector, as the top-left 2x2 block.
fn displaced_parity_block(alpha: C64, cutoff: usize) -> Result<[[C64; 2]; 2]> {
    let d = displacement(alpha, cutoff);
    // Only the first two rows of D enter the parity block, so the relevant
    // unitarity measure is their orthonormality (the highest Fock rows are
    // always mangled by truncation, for any cutoff).
    let dd = d.mul(&d.adjoint());
    let mut defect = 0.0f64;
    for n in 0..2 {
        for m in 0..2 {
            let delta = if n == m { 1.0 } else { 0.0 };
            defect = defect.max((dd[(n, m)] - c64(delta, 0.0)).norm());
        }
    }
    if defect > 1e-8 {
        return Err(Error::Domain(format!(
            "displacement cutoff {cutoff} too small at |alpha| = {:.3}: unitarity deviation {defect:.3e}",
            alpha.norm()
        )));
    }
    let parity = CMat::from_fn(cutoff + 1, |i, j| {
        if i == j {
            c64(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
        } else {
            c64(0.0, 0.0)
        }
    });
    let m = d.mul(&parity).mul(&d.adjoint());
    Ok([[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]])
}

/// Two-mode Wigner function evaluated through the displaced photon-number
/// parity `(2/pi)^2 Tr[rho D P D^dag (x) D P D^dag]`, an independent route
/// that must agree with [`qpd_two`] at `s = 0`. Uses
/// [`DEFAULT_PARITY_CUTOFF`].
pub fn wigner_displaced_parity(rho: &TwoModeState, a1: C64, a2: C64) -> Result<f64> {
    wigner_displaced_parity_with_cutoff(rho, a1, a2, DEFAULT_PARITY_CUTOFF)
}

/// Displaced-parity Wigner evaluation with an explicit Fock cutoff (>= 12);
/// rejected when the cutoff cannot represent the displacement accurately.
pub fn wigner_displaced_parity_with_cutoff(
    rho: &TwoModeState,
    a1: C64,
    a2: C64,
    cutoff: usize,
) -> Result<f64> {
    if cutoff < 12 {
        return Err(Error::Domain(format!(
            "parity evaluation needs a Fock cutoff of at least 12, got {cutoff}"
        )));
    }
    let m1 = displaced_parity_block(a1, cutoff)?;
    let m2 = displaced_parity_block(a2, cutoff)?;
    let v = contract(rho, &m1, &m2);
    Ok(v.re * (2.0 / PI) * (2.0 / PI))
}

fn pairwise_sum_c(v: &[C64]) -> C64 {
    match v.len() {
        0 => c64(0.0, 0.0),
        1 => v[0],
        2 => v[0] + v[1],
        n => pairwise_sum_c(&v[..n / 2]) + pairwise_sum_c(&v[n / 2..]),
    }
}

const RECON_NODES: usize = 24;

/// Reconstructs a two-mode density matrix from a quasiprobability sampler of
/// order `s`: `rho = integral W^(s)(a1, a2) T^(-s)(a1) (x) T^(-s)(a2) d^4alpha`,
/// evaluated by tensor-product Gauss-Hermite quadrature against the combined
/// Gaussian envelope. The sampler must be a genuine order-`s` distribution of
/// a state in the two-qubit truncation.
pub fn reconstruct_from_qpd<F>(sampler: F, s: f64) -> Result<TwoModeState>
where
    F: Fn(C64, C64) -> f64,
{
    if !s.is_finite() || s.abs() > MAX_EVAL_S {
        return Err(Error::Domain(format!(
            "reconstruction order s = {s} outside [-{MAX_EVAL_S}, {MAX_EVAL_S}]"
        )));
    }
    let (nodes, weights) = gauss_hermite(RECON_NODES);
    // Combined envelope exp(-a u^2) per real axis, from the sampler's
    // T^(s) factor times the T^(-s) kernel.
    let a = 4.0 / (1.0 - s * s);
    let pts: Vec<f64> = nodes.iter().map(|u| u / a.sqrt()).collect();
    let wts: Vec<f64> = nodes
        .iter()
        .zip(&weights)
        .map(|(u, w)| w * (u * u).exp() / a.sqrt())
        .collect();
    // Per-mode kernel matrices over the (X, Y) node grid, envelopes included.
    let n2 = RECON_NODES * RECON_NODES;
    let mut kernel = vec![[[c64(0.0, 0.0); 2]; 2]; n2];
    for (i, &x) in pts.iter().enumerate() {
        for (j, &y) in pts.iter().enumerate() {
            kernel[i * RECON_NODES + j] = t_matrix(-s, c64(x, y));
        }
    }
    let mut partials: Vec<Vec<C64>> = vec![Vec::with_capacity(n2); 16];
    for i1 in 0..RECON_NODES {
        for j1 in 0..RECON_NODES {
            let k1 = &kernel[i1 * RECON_NODES + j1];
            let w1 = wts[i1] * wts[j1];
            let a1 = c64(pts[i1], pts[j1]);
            let mut acc = [c64(0.0, 0.0); 16];
            for i2 in 0..RECON_NODES {
                for j2 in 0..RECON_NODES {
                    let k2 = &kernel[i2 * RECON_NODES + j2];
                    let wv = wts[i2] * wts[j2] * sampler(a1, c64(pts[i2], pts[j2]));
                    for n1 in 0..2 {
                        for m1 in 0..2 {
                            let f1 = k1[n1][m1] * wv;
                            for n2i in 0..2 {
                                for m2 in 0..2 {
                                    acc[(2 * n1 + n2i) * 4 + 2 * m1 + m2] += f1 * k2[n2i][m2];
                                }
                            }
                        }
                    }
                }
            }
            for (e, v) in acc.iter().enumerate() {
                partials[e].push(*v * w1);
            }
        }
    }
    let raw = CMat::from_fn(4, |i, j| pairwise_sum_c(&partials[i * 4 + j]));
    if let Err(e) = validate_density(&raw, 1e-4) {
        return Err(Error::Numerical(format!("inconsistent sampler: {e}")));
    }
    TwoModeState::project_near_density(&raw, 1e-4)
}

/// Probability of the maximal spin projection along direction
/// `(theta, phi)` for the single-excitation qutrit encoding
/// `|00> -> |1,-1>`, `|01> -> |1,0>`, `|10> -> |1,+1>`.
pub fn amps(rho: &TwoModeState, theta: f64, phi: f64) -> Result<f64> {
    if rho.entry(3, 3).norm() > 1e-10 {
        return Err(Error::Domain(format!(
            "state has population {:.3e} outside the single-excitation qutrit encoding",
            rho.entry(3, 3).norm()
        )));
    }
    let (c, sn) = (theta.cos(), theta.sin());
    // Rotated maximal-projection vector over encoded m = (+1, 0, -1),
    // stored at basis indices (2, 1, 0).
    let dir = [
        C64::from_polar((1.0 + c) / 2.0, -phi),
        c64(sn / 2.0f64.sqrt(), 0.0),
        C64::from_polar((1.0 - c) / 2.0, phi),
    ];
    let idx = [2usize, 1, 0];
    let mut v = c64(0.0, 0.0);
    for a in 0..3 {
        for b in 0..3 {
            v += dir[a].conj() * rho.entry(idx[a], idx[b]) * dir[b];
        }
    }
    debug_assert!(v.im.abs() < 1e-12);
    Ok(v.re.max(0.0))
}

/// Maximum-projection probabilities over a `(theta, phi)` grid, row-major
/// with `theta` outermost.
#[derive(Clone, Debug, PartialEq)]
pub struct AmpsSurface {
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    pub values: Vec<f64>,
}

/// Samples [`amps`] over direction grids.
pub fn amps_surface(
    rho: &TwoModeState,
    theta_axis: &GridSpec,
    phi_axis: &GridSpec,
) -> Result<AmpsSurface> {
    let thetas = theta_axis.values();
    let phis = phi_axis.values();
    let mut values = Vec::with_capacity(thetas.len() * phis.len());
    for &t in &thetas {
        for &f in &phis {
            values.push(amps(rho, t, f)?);
        }
    }
    Ok(AmpsSurface { theta: thetas, phi: phis, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{
        bs_unitary, mix_with_vacuum, swap_modes, two_mode_closed_form, vops_real, ChannelParams,
    };
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn random_alpha(rng: &mut ChaCha8Rng, radius: f64) -> C64 {
        c64(
            (rng.gen::<f64>() - 0.5) * 2.0 * radius,
            (rng.gen::<f64>() - 0.5) * 2.0 * radius,
        )
    }

    fn random_two_mode(rng: &mut ChaCha8Rng) -> TwoModeState {
        let p: f64 = rng.gen();
        let mag = rng.gen::<f64>() * (p * (1.0 - p)).sqrt();
        let ph = rng.gen::<f64>() * 2.0 * std::f64::consts::PI;
        let params = ChannelParams::new(rng.gen(), rng.gen::<f64>() * std::f64::consts::PI).unwrap();
        two_mode_closed_form(p, c64(mag * ph.cos(), mag * ph.sin()), &params).unwrap()
    }

    #[test]
    fn t_element_anchor_values() {
        assert!((t_element(0.0, 0, 0, c64(0.0, 0.0)).unwrap().re - 2.0).abs() < 1e-14);
        assert!((t_element(0.5, 1, 1, c64(0.0, 0.0)).unwrap().re + 12.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for _ in 0..50 {
            let al = random_alpha(&mut rng, 2.0);
            let env = (-2.0 * al.norm_sqr()).exp();
            let t11 = t_element(0.0, 1, 1, al).unwrap();
            assert!((t11.re - 2.0 * (4.0 * al.norm_sqr() - 1.0) * env).abs() < 1e-12);
            assert!(t11.im.abs() < 1e-14);
            let t01 = t_element(0.0, 0, 1, al).unwrap();
            assert!((t01 - al.conj() * 4.0 * env).norm() < 1e-12);
        }
    }

    #[test]
    fn t_element_husimi_is_coherent_projector() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        for _ in 0..20 {
            let al = random_alpha(&mut rng, 1.5);
            for n in 0..4 {
                for m in 0..4 {
                    let got = t_element(-1.0, n, m, al).unwrap();
                    let expect = al.powu(n as u32) * al.conj().powu(m as u32)
                        / (factorial(n) * factorial(m)).sqrt()
                        * (-al.norm_sqr()).exp();
                    assert!((got - expect).norm() < 1e-12, "n={n} m={m}");
                }
            }
        }
    }

    #[test]
    fn t_element_conjugate_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..50 {
            let al = random_alpha(&mut rng, 2.0);
            let s = rng.gen::<f64>() * 1.9 - 1.0;
            for n in 0..3 {
                for m in 0..3 {
                    let lhs = t_element(s, n, m, al).unwrap();
                    let rhs = t_element(s, m, n, al.conj()).unwrap();
                    assert!((lhs - rhs).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn t_element_rejects_singular_order() {
        assert!(t_element(1.0, 0, 0, c64(0.0, 0.0)).is_err());
        assert!(t_element(0.9999999, 0, 0, c64(0.0, 0.0)).is_err());
        assert!(t_element(-1.1, 0, 0, c64(0.0, 0.0)).is_err());
    }

    #[test]
    fn qpd_single_anchor_points() {
        let one = vops_real(1.0, 0.0).unwrap();
        assert!((qpd_single(&one, 0.0, c64(0.0, 0.0)).unwrap() + 2.0 / PI).abs() < 1e-12);
        let half = vops_real(0.5, 0.0).unwrap();
        assert!((qpd_single(&half, 0.5, c64(0.0, 0.0)).unwrap() + 4.0 / PI).abs() < 1e-12);
    }

    #[test]
    fn qpd_single_matches_wigner_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        for _ in 0..200 {
            let p: f64 = rng.gen();
            let mag = rng.gen::<f64>() * (p * (1.0 - p)).sqrt();
            let ph = rng.gen::<f64>() * 2.0 * PI;
            let x = c64(mag * ph.cos(), mag * ph.sin());
            let sigma = QubitState::new(p, x).unwrap();
            let al = random_alpha(&mut rng, 2.5);
            let got = qpd_single(&sigma, 0.0, al).unwrap();
            let expect = 2.0 / PI
                * ((1.0 - p) + p * (4.0 * al.norm_sqr() - 1.0) + 4.0 * (x * al).re)
                * (-2.0 * al.norm_sqr()).exp();
            assert!((got - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn vacuum_qpd_is_gaussian_for_any_order() {
        let vac = vops_real(0.0, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        for _ in 0..50 {
            let s = rng.gen::<f64>() * 1.9 - 1.0;
            if s >= MAX_EVAL_S {
                continue;
            }
            let al = random_alpha(&mut rng, 2.0);
            let got = qpd_single(&vac, s, al).unwrap();
            let expect = 2.0 / (PI * (1.0 - s)) * (-2.0 * al.norm_sqr() / (1.0 - s)).exp();
            assert!((got - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn qpd_two_factorizes_product_states() {
        let sigma = vops_real(0.4, 0.3).unwrap();
        let rho = mix_with_vacuum(&sigma, 0.0).unwrap();
        let vac = vops_real(0.0, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(56);
        for _ in 0..50 {
            let a1 = random_alpha(&mut rng, 2.0);
            let a2 = random_alpha(&mut rng, 2.0);
            let s = rng.gen::<f64>() * 1.5 - 1.0;
            let joint = qpd_two(&rho, s, a1, a2).unwrap();
            let product = qpd_single(&sigma, s, a1).unwrap() * qpd_single(&vac, s, a2).unwrap();
            assert!((joint - product).abs() < 1e-12);
        }
    }

    #[test]
    fn beam_splitter_covariance_pointwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(57);
        for _ in 0..40 {
            let rho = random_two_mode(&mut rng);
            let theta = rng.gen::<f64>() * std::f64::consts::PI;
            let u = bs_unitary(theta).unwrap();
            let out =
                TwoModeState::from_matrix(u.mul(rho.matrix()).mul(&u.adjoint()).hermitize())
                    .unwrap();
            let (r, t) = ((theta / 2.0).sin(), (theta / 2.0).cos());
            let s = rng.gen::<f64>() * 1.5 - 1.0;
            let a1 = random_alpha(&mut rng, 1.5);
            let a2 = random_alpha(&mut rng, 1.5);
            let lhs = qpd_two(&out, s, a1, a2).unwrap();
            let rhs = qpd_two(&rho, s, a1 * t - a2 * r, a1 * r + a2 * t).unwrap();
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn grids_normalize_and_husimi_nonnegative() {
        let axis = GridSpec::new(-4.0, 4.0, 0.08).unwrap();
        let sigma = vops_real(0.5, 0.37).unwrap();
        for s in [-1.0, -0.5, 0.0, 0.5] {
            let grid = qpd_grid_single(&sigma, s, &axis, &axis).unwrap();
            assert!((grid.integral() - 1.0).abs() < 2e-3, "s = {s}");
            if s == -1.0 {
                assert!(grid.min() >= -1e-12);
            }
        }
    }

    #[test]
    fn wigner_extrema_balanced_state() {
        let axis = GridSpec::new(-3.0, 3.0, 0.02).unwrap();
        let grid =
            qpd_grid_single(&vops_real(0.5, 0.0).unwrap(), 0.0, &axis, &axis).unwrap();
        assert!((grid.min() - 0.0).abs() < 0.01);
        assert!((grid.max() - 0.23).abs() < 0.01);
        let grid1 = qpd_grid_single(&vops_real(1.0, 0.0).unwrap(), 0.0, &axis, &axis).unwrap();
        assert!((grid1.min() + 0.64).abs() < 0.01);
        assert!((grid1.max() - 0.28).abs() < 0.01);
    }

    #[test]
    fn parity_matches_qpd_at_origin_and_random_points() {
        let vac = mix_with_vacuum(&vops_real(0.0, 0.0).unwrap(), FRAC_PI_2).unwrap();
        let at_origin = wigner_displaced_parity(&vac, c64(0.0, 0.0), c64(0.0, 0.0)).unwrap();
        assert!((at_origin - (2.0 / PI) * (2.0 / PI)).abs() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(58);
        for _ in 0..10 {
            let rho = random_two_mode(&mut rng);
            let a1 = random_alpha(&mut rng, 2.0);
            let a2 = random_alpha(&mut rng, 2.0);
            let lhs = wigner_displaced_parity(&rho, a1, a2).unwrap();
            let rhs = qpd_two(&rho, 0.0, a1, a2).unwrap();
            assert!((lhs - rhs).abs() < 1e-8);
        }
    }

    #[test]
    fn parity_rejects_inadequate_cutoff() {
        let rho = mix_with_vacuum(&vops_real(0.5, 0.3).unwrap(), FRAC_PI_2).unwrap();
        let err = wigner_displaced_parity_with_cutoff(&rho, c64(2.0, 0.0), c64(0.0, 0.0), 12);
        assert!(err.is_err(), "cutoff 12 cannot represent |alpha| = 2 accurately");
        assert!(wigner_displaced_parity_with_cutoff(&rho, c64(2.0, 0.0), c64(0.0, 0.0), 8).is_err());
        assert!(
            wigner_displaced_parity_with_cutoff(&rho, c64(0.2, 0.0), c64(0.0, 0.0), 12).is_ok(),
            "small displacements stay within cutoff 12"
        );
    }

    #[test]
    fn marginals_normalize_and_match_reference_maxima() {
        let rho = mix_with_vacuum(&vops_real(0.5, 0.37).unwrap(), FRAC_PI_2).unwrap();
        let axis = GridSpec::new(-4.0, 4.0, 0.05).unwrap();
        let expects = [
            (MarginalPair::X1Y1, 0.50),
            (MarginalPair::X2Y2, 0.50),
            (MarginalPair::X1X2, 0.67),
            (MarginalPair::Y1Y2, 0.39),
        ];
        for (pair, max_expect) in expects {
            let grid = marginal(&rho, pair, &axis, &axis).unwrap();
            assert!((grid.integral() - 1.0).abs() < 2e-3, "{pair:?}");
            assert!((grid.max() - max_expect).abs() < 0.01, "{pair:?}: {}", grid.max());
        }
    }

    #[test]
    fn vacuum_marginals_are_product_gaussians() {
        let vac = mix_with_vacuum(&vops_real(0.0, 0.0).unwrap(), FRAC_PI_2).unwrap();
        let axis = GridSpec::new(-4.0, 4.0, 0.05).unwrap();
        for pair in [
            MarginalPair::X1Y1,
            MarginalPair::X2Y2,
            MarginalPair::X1X2,
            MarginalPair::Y1Y2,
        ] {
            let grid = marginal(&vac, pair, &axis, &axis).unwrap();
            assert!((grid.integral() - 1.0).abs() < 2e-3);
            assert!((grid.max() - 2.0 / PI).abs() < 1e-6);
        }
    }

    #[test]
    fn swapped_state_swaps_marginals() {
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        let rho = random_two_mode(&mut rng);
        let swapped = swap_modes(&rho);
        let axis = GridSpec::new(-2.0, 2.0, 0.25).unwrap();
        let a = marginal(&rho, MarginalPair::X1Y1, &axis, &axis).unwrap();
        let b = marginal(&swapped, MarginalPair::X2Y2, &axis, &axis).unwrap();
        for (va, vb) in a.values.iter().zip(&b.values) {
            assert!((va - vb).abs() < 1e-12);
        }
    }

    #[test]
    fn reconstruction_round_trip() {
        let rho = mix_with_vacuum(&vops_real(0.5, 0.37).unwrap(), FRAC_PI_2).unwrap();
        let got = reconstruct_from_qpd(|a1, a2| qpd_two(&rho, 0.0, a1, a2).unwrap(), 0.0).unwrap();
        assert!(got.matrix().max_abs_diff(rho.matrix()) < 1e-6);
    }

    #[test]
    fn reconstruction_cross_order_vacuum() {
        let vac = mix_with_vacuum(&vops_real(0.0, 0.0).unwrap(), FRAC_PI_2).unwrap();
        let got =
            reconstruct_from_qpd(|a1, a2| qpd_two(&vac, -0.5, a1, a2).unwrap(), -0.5).unwrap();
        assert!(got.matrix().max_abs_diff(vac.matrix()) < 1e-6);
    }

    #[test]
    fn reconstruction_flags_inconsistent_sampler() {
        let rho = mix_with_vacuum(&vops_real(0.5, 0.2).unwrap(), FRAC_PI_2).unwrap();
        let err = reconstruct_from_qpd(
            |a1, a2| qpd_two(&rho, 0.0, a1, a2).unwrap().abs() + 0.05,
            0.0,
        );
        assert!(matches!(err, Err(Error::Numerical(_))));
    }

    #[test]
    fn amps_anchor_states() {
        let one = mix_with_vacuum(&vops_real(1.0, 0.0).unwrap(), 0.0).unwrap();
        assert!((amps(&one, 0.0, 0.0).unwrap() - 1.0).abs() < 1e-12);
        let d = amps(&one, 1.1, 0.3).unwrap();
        assert!((d - ((1.0 + 1.1f64.cos()) / 2.0).powi(2)).abs() < 1e-12);
        let vac = mix_with_vacuum(&vops_real(0.0, 0.0).unwrap(), 0.0).unwrap();
        assert!(amps(&vac, 0.0, 0.0).unwrap() < 1e-12);
        assert!((amps(&vac, PI, 0.7).unwrap() - 1.0).abs() < 1e-12);
        let mixed = CMat::from_fn(4, |i, j| {
            if i == j && i < 3 {
                c64(1.0 / 3.0, 0.0)
            } else {
                c64(0.0, 0.0)
            }
        });
        let mixed = TwoModeState::from_matrix(mixed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(60);
        for _ in 0..20 {
            let t = rng.gen::<f64>() * PI;
            let f = rng.gen::<f64>() * 2.0 * PI;
            assert!((amps(&mixed, t, f).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn amps_matches_spin_projector_oracle() {
        // Independent route: the maximal-projection probability equals
        // <(J_n^2 + J_n)/2> for the spin-1 operator J_n along the direction.
        let sq = 1.0 / 2.0f64.sqrt();
        let jx = CMat::from_rows(&[
            vec![c64(0.0, 0.0), c64(sq, 0.0), c64(0.0, 0.0)],
            vec![c64(sq, 0.0), c64(0.0, 0.0), c64(sq, 0.0)],
            vec![c64(0.0, 0.0), c64(sq, 0.0), c64(0.0, 0.0)],
        ]);
        let jy = CMat::from_rows(&[
            vec![c64(0.0, 0.0), c64(0.0, -sq), c64(0.0, 0.0)],
            vec![c64(0.0, sq), c64(0.0, 0.0), c64(0.0, -sq)],
            vec![c64(0.0, 0.0), c64(0.0, sq), c64(0.0, 0.0)],
        ]);
        let jz = CMat::diag(&[1.0, 0.0, -1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..50 {
            let rho = random_two_mode(&mut rng);
            let t = rng.gen::<f64>() * PI;
            let f = rng.gen::<f64>() * 2.0 * PI;
            let n = [t.sin() * f.cos(), t.sin() * f.sin(), t.cos()];
            let jn = jx.scale(c64(n[0], 0.0))
                .add(&jy.scale(c64(n[1], 0.0)))
                .add(&jz.scale(c64(n[2], 0.0)));
            let proj = jn.mul(&jn).add(&jn).scale(c64(0.5, 0.0));
            // Encoded qutrit block of rho over m = (+1, 0, -1) = indices (2, 1, 0).
            let idx = [2usize, 1, 0];
            let block = CMat::from_fn(3, |i, j| rho.entry(idx[i], idx[j]));
            let expect = block.mul(&proj).trace().re;
            let got = amps(&rho, t, f).unwrap();
            assert!((got - expect).abs() < 1e-12, "theta={t} phi={f}");
        }
    }

    #[test]
    fn amps_rejects_double_excitation() {
        let mut m = CMat::zeros(4);
        m[(3, 3)] = c64(1.0, 0.0);
        let rho = TwoModeState::from_matrix(m).unwrap();
        assert!(matches!(amps(&rho, 0.3, 0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn amps_surface_stays_in_unit_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        let rho = random_two_mode(&mut rng);
        let theta_axis = GridSpec::new(0.0, PI, PI / 20.0).unwrap();
        let phi_axis = GridSpec::new(0.0, 2.0 * PI, PI / 10.0).unwrap();
        let surf = amps_surface(&rho, &theta_axis, &phi_axis).unwrap();
        assert_eq!(surf.values.len(), surf.theta.len() * surf.phi.len());
        for v in &surf.values {
            assert!((-1e-12..=1.0 + 1e-12).contains(v));
        }
    }
}

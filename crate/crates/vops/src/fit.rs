//! Uhlmann-Jozsa fidelity and model fitting: given a (possibly noisy)
//! two-mode density matrix, find the channel-output model parameters
//! `(p, x, q, r)` that maximize fidelity, with honest convergence and
//! identifiability reporting.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{c64, eig_hermitian, mat_sqrt_psd, C64, CMat};
use crate::states::{two_mode_closed_form, ChannelParams, TwoModeState};

/// Uhlmann-Jozsa fidelity `F = [Tr sqrt(sqrt(a) b sqrt(a))]^2`, clamped to
/// `[0, 1]`. Symmetric in its arguments to numerical accuracy.
pub fn uhlmann_fidelity(a: &TwoModeState, b: &TwoModeState) -> f64 {
    let sa = mat_sqrt_psd(a.matrix()).expect("density matrix is PSD");
    let inner = sa.mul(b.matrix()).mul(&sa).hermitize();
    let (vals, _) = eig_hermitian(&inner).expect("congruence of a PSD matrix");
    // Rank-deficient products carry O(eps) noise in place of exact zeros;
    // taking square roots would amplify it to O(sqrt(eps)). Floor it first.
    let floor = 1e-14 * vals.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let tr: f64 = vals.iter().map(|&l| if l <= floor { 0.0 } else { l.sqrt() }).sum();
    (tr * tr).clamp(0.0, 1.0)
}

/// Which fitted parameter a diagnostic refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamId {
    P,
    XMag,
    XPhase,
    Q,
    R,
}

/// Outcome of a model fit.
#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub p: f64,
    pub x: C64,
    pub q: f64,
    /// Beam-splitter reflectivity `r = sin(theta/2)`.
    pub r: f64,
    pub fidelity: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Parameters the objective is flat in (to second order) at the optimum.
    pub unidentifiable: Vec<ParamId>,
}

impl FitResult {
    /// The fitted channel parameters.
    pub fn channel(&self) -> ChannelParams {
        ChannelParams::new(self.q, 2.0 * self.r.asin()).expect("fitted within bounds")
    }

    /// The fitted model density matrix.
    pub fn model(&self) -> TwoModeState {
        two_mode_closed_form(self.p, self.x, &self.channel()).expect("fitted within bounds")
    }
}

/// Knobs for [`fit_model_with_options`].
#[derive(Clone, Debug, PartialEq)]
pub struct FitOptions {
    pub restarts: usize,
    pub seed: u64,
    /// Fix the damping rate instead of fitting it (calibrated channels).
    pub fix_q: Option<f64>,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { restarts: 16, seed: 0, fix_q: None }
    }
}

const DIM: usize = 5;
const MAX_ITERS: usize = 2000;
const DIAMETER_TOL: f64 = 1e-10;

/// Reflects `v` into `[lo, hi]` (triangle fold).
fn fold(v: f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return lo;
    }
    let span = hi - lo;
    let mut t = (v - lo) % (2.0 * span);
    if t < 0.0 {
        t += 2.0 * span;
    }
    if t > span {
        t = 2.0 * span - t;
    }
    lo + t
}

/// Folds raw simplex coordinates into valid model parameters
/// `(p, |x|, arg x, q, r)`; the coherence bound tracks the folded `p`.
fn fold_point(raw: &[f64; DIM], fix_q: Option<f64>) -> [f64; DIM] {
    let p = fold(raw[0], 0.0, 1.0);
    let xm = fold(raw[1], 0.0, (p * (1.0 - p)).sqrt());
    let xph = fold(raw[2], -std::f64::consts::PI, std::f64::consts::PI);
    let q = fix_q.unwrap_or_else(|| fold(raw[3], 0.0, 1.0));
    let r = fold(raw[4], 0.0, 1.0);
    [p, xm, xph, q, r]
}

fn model_of(params: &[f64; DIM]) -> TwoModeState {
    let channel = ChannelParams::new(params[3], 2.0 * params[4].asin()).expect("folded");
    two_mode_closed_form(params[0], C64::from_polar(params[1], params[2]), &channel)
        .expect("folded parameters are valid")
}

fn halton(mut index: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

struct StartOutcome {
    fid: f64,
    params: [f64; DIM],
    iters: usize,
    diameter_met: bool,
}

/// One Nelder-Mead descent (on negative fidelity) from a given raw start.
/// Tracks the best parameters over every evaluation, not just the final
/// simplex.
fn run_start(
    rho: &TwoModeState,
    start: [f64; DIM],
    fix_q: Option<f64>,
    active: &[usize],
) -> StartOutcome {
    let mut best_fid = f64::NEG_INFINITY;
    let mut best_params = fold_point(&start, fix_q);
    let mut evaluate = |raw: &[f64; DIM]| -> f64 {
        let params = fold_point(raw, fix_q);
        let fid = uhlmann_fidelity(rho, &model_of(&params));
        if fid > best_fid {
            best_fid = fid;
            best_params = params;
        }
        -fid
    };

    let n = active.len();
    let steps = [0.15, 0.1, 0.5, 0.15, 0.15];
    let mut simplex: Vec<[f64; DIM]> = Vec::with_capacity(n + 1);
    simplex.push(start);
    for &d in active {
        let mut v = start;
        v[d] += steps[d];
        simplex.push(v);
    }
    let mut fvals: Vec<f64> = simplex.iter().map(|v| evaluate(v)).collect();

    let mut iters = 0;
    let mut diameter_met = false;
    while iters < MAX_ITERS {
        iters += 1;
        // Ascending by objective: index 0 best, last worst.
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| fvals[i].partial_cmp(&fvals[j]).unwrap());
        let reorder: Vec<[f64; DIM]> = order.iter().map(|&i| simplex[i]).collect();
        let fre: Vec<f64> = order.iter().map(|&i| fvals[i]).collect();
        simplex = reorder;
        fvals = fre;

        let mut diameter = 0.0f64;
        for v in &simplex[1..] {
            for &d in active {
                diameter = diameter.max((v[d] - simplex[0][d]).abs());
            }
        }
        if diameter < DIAMETER_TOL {
            diameter_met = true;
            break;
        }

        let mut centroid = [0.0; DIM];
        for v in &simplex[..n] {
            for &d in active {
                centroid[d] += v[d] / n as f64;
            }
        }
        let worst = simplex[n];
        let line = |t: f64| -> [f64; DIM] {
            let mut v = worst;
            for &d in active {
                v[d] = centroid[d] + t * (centroid[d] - worst[d]);
            }
            v
        };

        let reflected = line(1.0);
        let fr = evaluate(&reflected);
        if fr < fvals[0] {
            let expanded = line(2.0);
            let fe = evaluate(&expanded);
            if fe < fr {
                simplex[n] = expanded;
                fvals[n] = fe;
            } else {
                simplex[n] = reflected;
                fvals[n] = fr;
            }
        } else if fr < fvals[n - 1] {
            simplex[n] = reflected;
            fvals[n] = fr;
        } else {
            let contracted = if fr < fvals[n] { line(0.5) } else { line(-0.5) };
            let fc = evaluate(&contracted);
            if fc < fvals[n].min(fr) {
                simplex[n] = contracted;
                fvals[n] = fc;
            } else {
                // Shrink toward the best vertex.
                for i in 1..=n {
                    for &d in active {
                        simplex[i][d] = simplex[0][d] + 0.5 * (simplex[i][d] - simplex[0][d]);
                    }
                    fvals[i] = evaluate(&simplex[i]);
                }
            }
        }
    }

    StartOutcome { fid: best_fid, params: best_params, iters, diameter_met }
}

/// Probes the objective along each fitted direction at the optimum and
/// returns the parameters it is flat in to second order (both slope and
/// curvature below 1e-8).
fn probe_identifiability(
    rho: &TwoModeState,
    params: &[f64; DIM],
    fix_q: Option<f64>,
    active: &[usize],
) -> Vec<ParamId> {
    const H: f64 = 1e-3;
    const FLAT: f64 = 1e-8;
    let ids = [ParamId::P, ParamId::XMag, ParamId::XPhase, ParamId::Q, ParamId::R];
    let mut flagged = Vec::new();
    for &d in active {
        let (lo, hi) = match d {
            0 | 3 | 4 => (0.0, 1.0),
            1 => (0.0, (params[0] * (1.0 - params[0])).sqrt()),
            _ => (-std::f64::consts::PI, std::f64::consts::PI),
        };
        if hi - lo < 2.0 * H {
            flagged.push(ids[d]);
            continue;
        }
        let eval_at = |t: f64| -> f64 {
            let mut v = *params;
            v[d] = t;
            uhlmann_fidelity(rho, &model_of(&fold_point(&v, fix_q)))
        };
        let center = params[d].clamp(lo + H, hi - H);
        let (g1, g2, g3) = (eval_at(center - H), eval_at(center), eval_at(center + H));
        let slope = (g3 - g1) / (2.0 * H);
        let curvature = (g1 - 2.0 * g2 + g3) / (H * H);
        if slope.abs() < FLAT && curvature.abs() < FLAT {
            flagged.push(ids[d]);
        }
    }
    flagged
}

/// Fits the channel-output model to a density matrix by multi-start
/// Nelder-Mead fidelity maximization. See [`fit_model_with_options`].
pub fn fit_model(rho: &TwoModeState, restarts: usize, seed: u64) -> Result<FitResult> {
    fit_model_with_options(rho, &FitOptions { restarts, seed, fix_q: None })
}

/// Multi-start Nelder-Mead maximization of the Uhlmann-Jozsa fidelity over
/// `(p, |x|, arg x, q, r)`. Starts come from a Halton sweep with a seeded
/// random shift; restarts run in parallel and the winner is chosen by
/// (fidelity, then lowest start index), so results are deterministic for a
/// fixed seed. The vacuum model always participates as a candidate; if no
/// start matches it the fit is reported unconverged.
pub fn fit_model_with_options(rho: &TwoModeState, opts: &FitOptions) -> Result<FitResult> {
    if opts.restarts == 0 {
        return Err(Error::Domain("fit needs at least one restart".into()));
    }
    if let Some(q) = opts.fix_q {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::Domain(format!("fixed damping rate q = {q} outside [0, 1]")));
        }
    }
    let active: Vec<usize> =
        if opts.fix_q.is_some() { vec![0, 1, 2, 4] } else { vec![0, 1, 2, 3, 4] };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let shifts: [f64; DIM] = std::array::from_fn(|_| rng.gen());
    let bases = [2usize, 3, 5, 7, 11];
    let start_raw = |k: usize| -> [f64; DIM] {
        let u: [f64; DIM] = std::array::from_fn(|d| (halton(k + 1, bases[d]) + shifts[d]) % 1.0);
        let p = u[0];
        [
            p,
            u[1] * (p * (1.0 - p)).sqrt(),
            (2.0 * u[2] - 1.0) * std::f64::consts::PI,
            u[3],
            u[4],
        ]
    };

    let mut outcomes: Vec<Option<StartOutcome>> = (0..opts.restarts).map(|_| None).collect();
    std::thread::scope(|scope| {
        for (k, slot) in outcomes.iter_mut().enumerate() {
            let active = &active;
            let fix_q = opts.fix_q;
            scope.spawn(move || {
                *slot = Some(run_start(rho, start_raw(k), fix_q, active));
            });
        }
    });

    let vacuum_params = [0.0, 0.0, 0.0, opts.fix_q.unwrap_or(0.0), 0.0];
    let f_vac = uhlmann_fidelity(rho, &model_of(&vacuum_params));

    let mut best: Option<StartOutcome> = None;
    for outcome in outcomes.into_iter().flatten() {
        let better = match &best {
            None => true,
            Some(b) => outcome.fid > b.fid,
        };
        if better {
            best = Some(outcome);
        }
    }
    let best = best.expect("at least one restart");

    let improved = best.fid >= f_vac - 1e-9;
    let (fid, params, iters, diameter_met) = if f_vac > best.fid {
        (f_vac, vacuum_params, 0, true)
    } else {
        (best.fid, best.params, best.iters, best.diameter_met)
    };
    let converged = improved && diameter_met;
    let unidentifiable = probe_identifiability(rho, &params, opts.fix_q, &active);

    Ok(FitResult {
        p: params[0],
        x: C64::from_polar(params[1], params[2]),
        q: params[3],
        r: params[4],
        fidelity: fid,
        iterations: iters,
        converged,
        unidentifiable,
    })
}

/// Mixes a state with a seeded random full-rank density matrix:
/// `(1-eps) rho + eps W` with `W` from a complex-Gaussian (Ginibre)
/// construction. Bit-identical for a fixed seed.
pub fn add_noise(rho: &TwoModeState, epsilon: f64, seed: u64) -> Result<TwoModeState> {
    if !(0.0..=0.5).contains(&epsilon) {
        return Err(Error::Domain(format!("noise weight {epsilon} outside [0, 0.5]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = CMat::from_fn(4, |_, _| {
        c64(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
    });
    let w = g.mul(&g.adjoint());
    let w = w.scale(c64(1.0 / w.trace().re, 0.0));
    let mixed = rho.matrix().scale(c64(1.0 - epsilon, 0.0)).add(&w.scale(c64(epsilon, 0.0)));
    TwoModeState::from_matrix(mixed.hermitize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{potential_set, RegimeLabel};
    use crate::states::{mix_with_vacuum, vops_real};
    use std::f64::consts::FRAC_PI_2;

    fn ideal_state(p: f64, x: f64) -> TwoModeState {
        mix_with_vacuum(&vops_real(p, x).unwrap(), FRAC_PI_2).unwrap()
    }

    #[test]
    fn fidelity_basics() {
        let a = ideal_state(0.6, 0.3);
        assert!((uhlmann_fidelity(&a, &a) - 1.0).abs() < 1e-12);
        let zero = ideal_state(0.0, 0.0);
        let one = mix_with_vacuum(&vops_real(1.0, 0.0).unwrap(), 0.0).unwrap();
        assert!(uhlmann_fidelity(&zero, &one) < 1e-12);
    }

    #[test]
    fn fidelity_symmetric_and_pure_shortcut() {
        let pure = ideal_state(0.5, 0.5);
        let mixed = ideal_state(0.5, 0.0);
        let f_ab = uhlmann_fidelity(&pure, &mixed);
        let f_ba = uhlmann_fidelity(&mixed, &pure);
        assert!((f_ab - f_ba).abs() < 1e-10);
        // One argument is pure, so F reduces to Tr(rho sigma).
        let overlap = pure.matrix().mul(mixed.matrix()).trace().re;
        assert!((f_ab - overlap).abs() < 1e-10);
    }

    #[test]
    fn noise_is_deterministic_and_gentle() {
        let rho = mix_with_vacuum(&vops_real(1.0, 0.0).unwrap(), FRAC_PI_2).unwrap();
        let a = add_noise(&rho, 1e-3, 9).unwrap();
        let b = add_noise(&rho, 1e-3, 9).unwrap();
        assert_eq!(a.matrix().max_abs_diff(b.matrix()), 0.0);
        assert!(add_noise(&rho, 0.0, 1).unwrap().matrix().max_abs_diff(rho.matrix()) < 1e-15);
        assert!(uhlmann_fidelity(&a, &rho) >= 1.0 - 2e-3);
        assert!(matches!(add_noise(&rho, 0.6, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn noiseless_fit_recovers_parameters() {
        let truth = two_mode_closed_form(
            0.3,
            c64(0.2, 0.0),
            &ChannelParams::from_rsq(0.1, 0.55).unwrap(),
        )
        .unwrap();
        let fit = fit_model(&truth, 16, 1).unwrap();
        assert!(fit.converged);
        assert!(fit.fidelity >= 1.0 - 1e-8);
        assert!((fit.p - 0.3).abs() < 1e-4);
        assert!((fit.x.norm() - 0.2).abs() < 1e-4);
        assert!((fit.q - 0.1).abs() < 1e-4);
        assert!((fit.r - 0.55f64.sqrt()).abs() < 1e-4);
        assert!(truth.matrix().max_abs_diff(fit.model().matrix()) < 1e-4);
    }

    #[test]
    fn vacuum_fit_reports_degeneracy() {
        let vac = ideal_state(0.0, 0.0);
        let fit = fit_model(&vac, 8, 2).unwrap();
        assert!(fit.converged);
        assert!(fit.p.abs() < 1e-6);
        assert!((fit.fidelity - 1.0).abs() < 1e-12);
        for id in [ParamId::XMag, ParamId::XPhase, ParamId::Q, ParamId::R] {
            assert!(fit.unidentifiable.contains(&id), "{id:?} should be flagged");
        }
        assert!(!fit.unidentifiable.contains(&ParamId::P));
    }

    #[test]
    fn fixed_damping_is_respected() {
        let truth = two_mode_closed_form(
            0.4,
            c64(0.25, 0.0),
            &ChannelParams::from_rsq(0.2, 0.5).unwrap(),
        )
        .unwrap();
        let fit = fit_model_with_options(
            &truth,
            &FitOptions { restarts: 8, seed: 3, fix_q: Some(0.2) },
        )
        .unwrap();
        assert_eq!(fit.q, 0.2);
        assert!(fit.fidelity >= 1.0 - 1e-8);
        assert!((fit.p - 0.4).abs() < 1e-4);
    }

    #[test]
    fn regime_is_preserved_by_noiseless_fit() {
        let params = ChannelParams::from_rsq(0.05, 0.5).unwrap();
        let truth_set = potential_set(0.9, c64(0.25, 0.05), &params).unwrap();
        assert_eq!(truth_set.regime, RegimeLabel::IV);
        let truth = two_mode_closed_form(0.9, c64(0.25, 0.05), &params).unwrap();
        let fit = fit_model(&truth, 16, 4).unwrap();
        let fitted_set = potential_set(fit.p, fit.x, &fit.channel()).unwrap();
        assert_eq!(fitted_set.regime, RegimeLabel::IV);
    }

    #[test]
    fn rejects_bad_options() {
        let vac = ideal_state(0.0, 0.0);
        assert!(fit_model(&vac, 0, 1).is_err());
        assert!(fit_model_with_options(
            &vac,
            &FitOptions { restarts: 1, seed: 0, fix_q: Some(1.5) }
        )
        .is_err());
    }
}

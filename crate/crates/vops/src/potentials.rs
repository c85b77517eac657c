//! Nonclassicality potentials of a VOPS state: the value each correlation
//! measure takes on the two-mode output of the vacuum-mixing channel, as a
//! closed form in the input parameters. Also the boundary curves between
//! potential regimes and threshold finders along the pure-state curve.

use num_complex::Complex64;

use crate::correlations::negativity;
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::states::{two_mode_closed_form, ChannelParams, QubitState};

const SQRT_3: f64 = 1.732_050_807_568_877_2;
const SQRT_2: f64 = std::f64::consts::SQRT_2;

fn theta_plus(z: f64) -> f64 {
    z.max(0.0)
}

fn validate(p: f64, x: C64) -> Result<()> {
    QubitState::new(p, x).map(|_| ())
}

/// Entanglement potential (concurrence of the lossless balanced output):
/// equals the single-photon probability `p` for every admissible coherence.
pub fn cp(p: f64, x: C64) -> Result<f64> {
    validate(p, x)?;
    Ok(p)
}

/// Negativity potential of the lossless balanced output, in closed form via
/// the Cardano root of the partial-transpose characteristic cubic.
pub fn np_closed(p: f64, x: C64) -> Result<f64> {
    validate(p, x)?;
    let xx = x.norm_sqr();
    let a2 = 14.0 * p.powi(3) - 21.0 * p * p + 15.0 * p + 9.0 * (p - 2.0) * xx - 4.0;
    let a1 = a2 * a2 - 2.0 * (5.0 * (p - 1.0) * p + 6.0 * xx + 2.0).powi(3);
    let inner = Complex64::new(a1, 0.0).sqrt() * 2.0 + Complex64::new(2.0 * a2, 0.0);
    let root = inner.powf(1.0 / 3.0);
    Ok(theta_plus((2.0 * root.re + p - 2.0) / 3.0))
}

/// Steering potential (three bases) of the lossless balanced output:
/// `sqrt(max(0, 3p^2 - 2p + 2|x|^2))`.
pub fn sp(p: f64, x: C64) -> Result<f64> {
    validate(p, x)?;
    Ok(theta_plus(3.0 * p * p - 2.0 * p + 2.0 * x.norm_sqr()).sqrt())
}

/// Bell nonlocality potential of the lossless balanced output.
pub fn bp(p: f64, x: C64) -> Result<f64> {
    validate(p, x)?;
    let xx = x.norm_sqr();
    let inner = 0.5
        * (7.0 * p * p + (1.0 - p) * ((1.0 - 3.0 * p).powi(2) + 8.0 * xx).sqrt() - 4.0 * p
            + 4.0 * xx
            - 1.0);
    Ok(theta_plus(inner).sqrt())
}

/// Coherence magnitude where the steering potential switches on at fixed `p`
/// (zero when steering is present for every admissible coherence).
pub fn x_s(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("probability p = {p} outside [0, 1]")));
    }
    Ok(theta_plus(p * (1.0 - 1.5 * p)).sqrt())
}

/// Coherence magnitude where the Bell potential switches on at fixed `p`.
pub fn x_b(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("probability p = {p} outside [0, 1]")));
    }
    let inner = 1.0 + p - 3.0 * p * p - (1.0 - p) * (1.0 - p * p).sqrt();
    Ok((theta_plus(inner) / 2.0).sqrt())
}

/// Squared-coherence fraction `(2 - 3p)/(2 - 2p)` at which the steering
/// potential switches on along `|x|^2 = kappa^2 p(1-p)`. May be negative
/// (steering present for every admissible coherence); rejects `p = 1`.
pub fn kappa0(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("probability p = {p} outside [0, 1]")));
    }
    if p == 1.0 {
        return Err(Error::Domain("kappa0 is undefined at p = 1".into()));
    }
    Ok((2.0 - 3.0 * p) / (2.0 - 2.0 * p))
}

/// Entanglement potential through a lossy unbalanced channel:
/// `p (1-q) sin(theta)`.
pub fn cp_qr(p: f64, x: C64, params: &ChannelParams) -> Result<f64> {
    validate(p, x)?;
    Ok(p * (1.0 - params.q()) * params.theta().sin())
}

/// Determinant-witness potential through a lossy unbalanced channel:
/// `(p sin(theta) / 2)^4 (1-q)^2`.
pub fn uwep_qr(p: f64, x: C64, params: &ChannelParams) -> Result<f64> {
    validate(p, x)?;
    Ok((p * params.theta().sin() / 2.0).powi(4) * (1.0 - params.q()).powi(2))
}

/// Shared spectral data of the correlation Gram matrix for the lossy
/// unbalanced output: `(trace, [e1, e2, e3])` with `e1 >= e2` the
/// transverse pair and `e3` the axial eigenvalue.
fn gram_closed_form(p: f64, xx: f64, params: &ChannelParams) -> (f64, [f64; 3]) {
    let qq = 1.0 - params.q();
    let z = 0.25 * qq * qq * params.theta().sin().powi(2);
    let tr = 8.0 * p * p * z + (1.0 - 2.0 * p).powi(2) + 4.0 * qq * xx;
    let half = 0.5 * (1.0 + 4.0 * (qq * xx + p * p * (z + 1.0) - p));
    let f = (tr - 4.0 * p * p * z).powi(2) - 16.0 * z * (2.0 * p * p + 2.0 * xx - p).powi(2);
    let s = theta_plus(f).sqrt() / 2.0;
    (tr, [half + s, half - s, 4.0 * p * p * z])
}

/// Steering potential through a lossy unbalanced channel (closed form).
pub fn sp_qr(p: f64, x: C64, params: &ChannelParams) -> Result<f64> {
    validate(p, x)?;
    let (tr, _) = gram_closed_form(p, x.norm_sqr(), params);
    Ok((theta_plus(tr - 1.0) / 2.0).sqrt())
}

/// Bell nonlocality potential through a lossy unbalanced channel (closed form).
pub fn bp_qr(p: f64, x: C64, params: &ChannelParams) -> Result<f64> {
    validate(p, x)?;
    let (tr, e) = gram_closed_form(p, x.norm_sqr(), params);
    Ok(theta_plus(tr - e[1].min(e[2]) - 1.0).sqrt())
}

/// Negativity potential through a lossy unbalanced channel, evaluated
/// numerically on the output density matrix.
pub fn np_qr(p: f64, x: C64, params: &ChannelParams) -> Result<f64> {
    let rho = two_mode_closed_form(p, x, params)?;
    Ok(negativity(&rho))
}

/// Which nonclassicality tiers the channel output reaches: each label
/// includes everything the previous ones detect.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegimeLabel {
    /// No entanglement potential.
    I,
    /// Entanglement potential only.
    II,
    /// Steering potential without Bell nonlocality.
    III,
    /// Bell nonlocality potential.
    IV,
}

impl std::fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RegimeLabel::I => "I",
            RegimeLabel::II => "II",
            RegimeLabel::III => "III",
            RegimeLabel::IV => "IV",
        })
    }
}

/// All potentials of one input state under one channel, plus the regime they
/// imply.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialSet {
    pub cp: f64,
    pub np: f64,
    pub sp: f64,
    pub sp_prime: f64,
    pub bp: f64,
    pub bp_prime: f64,
    pub uwep: f64,
    pub regime: RegimeLabel,
}

fn label_from(cp: f64, sp: f64, bp: f64) -> RegimeLabel {
    if bp > 0.0 {
        RegimeLabel::IV
    } else if sp > 0.0 {
        RegimeLabel::III
    } else if cp > 0.0 {
        RegimeLabel::II
    } else {
        RegimeLabel::I
    }
}

/// Evaluates every potential of `sigma(p, x)` under the given channel and
/// classifies the regime.
pub fn potential_set(p: f64, x: C64, params: &ChannelParams) -> Result<PotentialSet> {
    let cp_v = cp_qr(p, x, params)?;
    let sp_v = sp_qr(p, x, params)?;
    let bp_v = bp_qr(p, x, params)?;
    let sp_prime = theta_plus((2.0 * sp_v * sp_v + 1.0).sqrt() - 1.0) / (SQRT_3 - 1.0);
    let bp_prime = theta_plus((bp_v * bp_v + 1.0).sqrt() - 1.0) / (SQRT_2 - 1.0);
    Ok(PotentialSet {
        cp: cp_v,
        np: np_qr(p, x, params)?,
        sp: sp_v,
        sp_prime,
        bp: bp_v,
        bp_prime,
        uwep: uwep_qr(p, x, params)?,
        regime: label_from(cp_v, sp_v, bp_v),
    })
}

/// Re-derives the regime from a potential set, rejecting sets that violate
/// the strength hierarchy (for example a Bell potential without steering).
pub fn classify_regime(set: &PotentialSet) -> Result<RegimeLabel> {
    if set.bp > 0.0 && set.sp == 0.0 {
        return Err(Error::Domain(
            "hierarchy violation: Bell potential positive but steering potential zero".into(),
        ));
    }
    if set.sp > 0.0 && set.cp == 0.0 {
        return Err(Error::Domain(
            "hierarchy violation: steering potential positive but entanglement potential zero"
                .into(),
        ));
    }
    Ok(label_from(set.cp, set.sp, set.bp))
}

/// One cell of a regime map: the coherence either lies outside the physical
/// wedge `|x| <= sqrt(p(1-p))` or belongs to a regime.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellLabel {
    OutOfWedge,
    Regime(RegimeLabel),
}

/// Classifies every `(p, x)` grid point (row-major: one row per `p` value).
pub fn regime_map(
    params: &ChannelParams,
    p_axis: &[f64],
    x_axis: &[f64],
) -> Result<Vec<Vec<CellLabel>>> {
    let mut rows = Vec::with_capacity(p_axis.len());
    for &p in p_axis {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("probability p = {p} outside [0, 1]")));
        }
        let bound = (p * (1.0 - p)).sqrt();
        let mut row = Vec::with_capacity(x_axis.len());
        for &xv in x_axis {
            if xv.abs() > bound + 1e-12 {
                row.push(CellLabel::OutOfWedge);
            } else {
                let set = potential_set(p, C64::new(xv, 0.0), params)?;
                row.push(CellLabel::Regime(set.regime));
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Which potential a threshold search targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThresholdMeasure {
    SpQr,
    BpQr,
}

/// Result of a threshold search along the pure-state curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ThresholdOutcome {
    /// Smallest `p` where the potential switches on, to 1e-9.
    Root(f64),
    /// The potential vanishes along the whole curve.
    AlwaysZero,
    /// The potential is positive for every `p > 0` (threshold zero).
    AlwaysPositive,
}

/// Finds the onset of a potential along the pure-state curve
/// `|x| = sqrt(p(1-p))`, `p` in `[0, 1]`, by sign scan and bisection on the
/// signed pre-threshold quantity.
pub fn pure_curve_threshold(
    measure: ThresholdMeasure,
    params: &ChannelParams,
) -> Result<ThresholdOutcome> {
    let signed = |p: f64| -> f64 {
        let xx = p * (1.0 - p);
        let (tr, e) = gram_closed_form(p, xx, params);
        match measure {
            ThresholdMeasure::SpQr => tr - 1.0,
            ThresholdMeasure::BpQr => tr - e[1].min(e[2]) - 1.0,
        }
    };
    const GRID: usize = 4096;
    let mut bracket = None;
    let mut prev_p = 0.0;
    for k in 1..=GRID {
        let pk = k as f64 / GRID as f64;
        if signed(pk) > 0.0 {
            bracket = Some((prev_p, pk));
            break;
        }
        prev_p = pk;
    }
    let (mut lo, mut hi) = match bracket {
        None => return Ok(ThresholdOutcome::AlwaysZero),
        Some(b) if b.0 > 0.0 => b,
        Some((_, hi)) => {
            // Positive already at the first grid point: either the potential
            // switches on at p = 0 or a root hides below the grid. A genuine
            // root requires strictly negative values below it.
            let mut neg = None;
            let mut probe = hi / 2.0;
            while probe > 1e-12 {
                if signed(probe) < 0.0 {
                    neg = Some(probe);
                    break;
                }
                probe /= 2.0;
            }
            match neg {
                None => return Ok(ThresholdOutcome::AlwaysPositive),
                Some(lo) => (lo, hi),
            }
        }
    };
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if signed(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(ThresholdOutcome::Root(0.5 * (lo + hi)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlations::{bell_b, concurrence, measure_set, steering_s3, uwe as uwe_measure};
    use crate::linalg::c64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_input(rng: &mut ChaCha8Rng) -> (f64, C64) {
        let p: f64 = rng.gen();
        let mag = rng.gen::<f64>() * (p * (1.0 - p)).sqrt();
        let ph = rng.gen::<f64>() * 2.0 * std::f64::consts::PI;
        (p, c64(mag * ph.cos(), mag * ph.sin()))
    }

    #[test]
    fn pure_states_score_p_everywhere() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..100 {
            let p: f64 = rng.gen();
            let x = c64((p * (1.0 - p)).sqrt(), 0.0);
            assert!((cp(p, x).unwrap() - p).abs() < 1e-12);
            assert!((np_closed(p, x).unwrap() - p).abs() < 1e-10);
            assert!((sp(p, x).unwrap() - p).abs() < 1e-12);
            assert!((bp(p, x).unwrap() - p).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_forms_match_matrix_measures() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let ideal = ChannelParams::ideal();
        for _ in 0..300 {
            let (p, x) = random_input(&mut rng);
            let rho = two_mode_closed_form(p, x, &ideal).unwrap();
            assert!((cp(p, x).unwrap() - concurrence(&rho)).abs() < 1e-10);
            assert!((np_closed(p, x).unwrap() - negativity(&rho)).abs() < 1e-10);
            assert!((sp(p, x).unwrap() - steering_s3(&rho)).abs() < 1e-10);
            assert!((bp(p, x).unwrap() - bell_b(&rho)).abs() < 1e-10);
        }
    }

    #[test]
    fn lossy_closed_forms_match_matrix_measures() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..300 {
            let (p, x) = random_input(&mut rng);
            let params =
                ChannelParams::new(rng.gen(), rng.gen::<f64>() * std::f64::consts::PI).unwrap();
            let rho = two_mode_closed_form(p, x, &params).unwrap();
            let m = measure_set(&rho);
            assert!((cp_qr(p, x, &params).unwrap() - m.c).abs() < 1e-10);
            assert!((sp_qr(p, x, &params).unwrap() - m.s3).abs() < 1e-10);
            assert!((bp_qr(p, x, &params).unwrap() - m.b).abs() < 1e-10);
            assert!((uwep_qr(p, x, &params).unwrap() - m.uwe).abs() < 1e-10);
            assert!((np_qr(p, x, &params).unwrap() - m.n).abs() < 1e-14);
        }
    }

    #[test]
    fn potential_extremes() {
        assert!((np_closed(1.0, c64(0.0, 0.0)).unwrap() - 1.0).abs() < 1e-12);
        assert!(np_closed(0.0, c64(0.0, 0.0)).unwrap().abs() < 1e-12);
        let params = ChannelParams::from_rsq(0.0, 1.0 / 16.0).unwrap();
        let v = 15f64.sqrt() / 8.0;
        assert!((cp_qr(1.0, c64(0.0, 0.0), &params).unwrap() - v).abs() < 1e-12);
        assert!((sp_qr(1.0, c64(0.0, 0.0), &params).unwrap() - v).abs() < 1e-12);
        assert!((bp_qr(1.0, c64(0.0, 0.0), &params).unwrap() - v).abs() < 1e-12);
    }

    #[test]
    fn boundary_curves() {
        assert!(x_s(0.0).unwrap().abs() < 1e-15);
        assert!(x_s(2.0 / 3.0).unwrap().abs() < 1e-12);
        assert!(x_s(0.8).unwrap() == 0.0);
        let p = 0.4;
        let xs = x_s(p).unwrap();
        assert!(sp(p, c64(xs, 0.0)).unwrap().abs() < 1e-7);
        let xb = x_b(p).unwrap();
        assert!(bp(p, c64(xb, 0.0)).unwrap().abs() < 1e-7);
        assert!(x_b(0.9).unwrap() == 0.0);
        assert!((kappa0(0.1).unwrap() - 17.0 / 18.0).abs() < 1e-15);
        assert!((kappa0(0.2).unwrap() - 0.875).abs() < 1e-15);
        assert!(kappa0(0.8).unwrap() < 0.0);
        assert!(kappa0(1.0).is_err());
    }

    #[test]
    fn regimes_and_consistency() {
        let ideal = ChannelParams::ideal();
        let vac = potential_set(0.0, c64(0.0, 0.0), &ideal).unwrap();
        assert_eq!(vac.regime, RegimeLabel::I);
        let weak = potential_set(0.3, c64(0.0, 0.0), &ideal).unwrap();
        assert_eq!(weak.regime, RegimeLabel::II);
        assert!(weak.sp == 0.0);
        let steer = potential_set(0.7, c64(0.0, 0.0), &ideal).unwrap();
        assert_eq!(steer.regime, RegimeLabel::III);
        assert!(steer.sp > 0.0 && steer.bp == 0.0);
        let bell = potential_set(0.9, c64(0.2, 0.0), &ideal).unwrap();
        assert_eq!(bell.regime, RegimeLabel::IV);
        assert_eq!(classify_regime(&bell).unwrap(), RegimeLabel::IV);
        let mut broken = bell;
        broken.sp = 0.0;
        assert!(classify_regime(&broken).is_err());
    }

    #[test]
    fn prime_potentials_match_rescaled_measures() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for _ in 0..100 {
            let (p, x) = random_input(&mut rng);
            let params =
                ChannelParams::new(rng.gen(), rng.gen::<f64>() * std::f64::consts::PI).unwrap();
            let set = potential_set(p, x, &params).unwrap();
            let m = measure_set(&two_mode_closed_form(p, x, &params).unwrap());
            assert!((set.sp_prime - m.s_ca3).abs() < 1e-10);
            assert!((set.bp_prime - m.s_ca2).abs() < 1e-10);
            assert!((set.uwep - uwe_measure(&two_mode_closed_form(p, x, &params).unwrap())).abs() < 1e-10);
        }
    }

    #[test]
    fn map_labels_wedge() {
        let params = ChannelParams::ideal();
        let p_axis = [0.1, 0.7];
        let x_axis = [0.0, 0.4];
        let map = regime_map(&params, &p_axis, &x_axis).unwrap();
        assert_eq!(map[0][0], CellLabel::Regime(RegimeLabel::II));
        assert_eq!(map[0][1], CellLabel::OutOfWedge);
        assert_eq!(map[1][0], CellLabel::Regime(RegimeLabel::III));
        assert_eq!(map[1][1], CellLabel::Regime(RegimeLabel::IV));
    }

    #[test]
    fn ideal_thresholds_collapse_to_zero() {
        let ideal = ChannelParams::ideal();
        assert_eq!(
            pure_curve_threshold(ThresholdMeasure::SpQr, &ideal).unwrap(),
            ThresholdOutcome::AlwaysPositive
        );
        assert_eq!(
            pure_curve_threshold(ThresholdMeasure::BpQr, &ideal).unwrap(),
            ThresholdOutcome::AlwaysPositive
        );
    }

    #[test]
    fn lossy_thresholds_match_reference_roots() {
        let params = ChannelParams::from_rsq(0.1, 0.6).unwrap();
        let sp_root = match pure_curve_threshold(ThresholdMeasure::SpQr, &params).unwrap() {
            ThresholdOutcome::Root(r) => r,
            other => panic!("expected root, got {other:?}"),
        };
        let bp_root = match pure_curve_threshold(ThresholdMeasure::BpQr, &params).unwrap() {
            ThresholdOutcome::Root(r) => r,
            other => panic!("expected root, got {other:?}"),
        };
        assert!((sp_root - 0.20458265139116188).abs() < 1e-8);
        assert!((bp_root - 0.33967391304347855).abs() < 1e-8);
        // Potentials vanish just below each root and switch on just above.
        for (root, m) in [(sp_root, ThresholdMeasure::SpQr), (bp_root, ThresholdMeasure::BpQr)] {
            let eval = |p: f64| {
                let x = c64((p * (1.0 - p)).sqrt(), 0.0);
                match m {
                    ThresholdMeasure::SpQr => sp_qr(p, x, &params).unwrap(),
                    ThresholdMeasure::BpQr => bp_qr(p, x, &params).unwrap(),
                }
            };
            assert!(eval(root - 1e-6) == 0.0);
            assert!(eval(root + 1e-6) > 0.0);
        }
    }

    #[test]
    fn fully_damped_channel_never_steers() {
        let params = ChannelParams::new(1.0, std::f64::consts::FRAC_PI_2).unwrap();
        assert_eq!(
            pure_curve_threshold(ThresholdMeasure::SpQr, &params).unwrap(),
            ThresholdOutcome::AlwaysZero
        );
    }
}

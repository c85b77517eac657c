//! VOPS qubit states and their two-mode images under beam-splitter and
//! phase-damping channels, plus the quantum-scissors generator and the
//! dephasing mixer.

use crate::error::{Error, Result};
use crate::linalg::{c64, jacobi_hermitian, validate_density, C64, CMat};

/// Single-mode state in the `{|0>, |1>}` photon-number sector:
/// `[[1-p, x], [x*, p]]` with `|x| <= sqrt(p(1-p))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitState {
    p: f64,
    x: C64,
}

impl QubitState {
    /// Validates and constructs a state; tolerance 1e-12 on the coherence bound.
    pub fn new(p: f64, x: C64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!(
                "single-photon probability p = {p} outside [0, 1]"
            )));
        }
        let bound = (p * (1.0 - p)).sqrt();
        let mag = x.norm();
        if mag > bound + 1e-12 {
            return Err(Error::Domain(format!(
                "coherence bound violated: |x| = {mag:.6e} exceeds sqrt(p(1-p)) = {bound:.6e} by {:.3e}",
                mag - bound
            )));
        }
        Ok(QubitState { p, x })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn x(&self) -> C64 {
        self.x
    }

    /// The 2x2 density matrix `[[1-p, x], [x*, p]]`.
    pub fn as_matrix(&self) -> CMat {
        CMat::from_rows(&[
            vec![c64(1.0 - self.p, 0.0), self.x],
            vec![self.x.conj(), c64(self.p, 0.0)],
        ])
    }
}

/// Constructs the VOPS state `sigma(p, x)`.
pub fn vops(p: f64, x: C64) -> Result<QubitState> {
    QubitState::new(p, x)
}

/// Convenience constructor for real coherence.
pub fn vops_real(p: f64, x: f64) -> Result<QubitState> {
    QubitState::new(p, c64(x, 0.0))
}

/// Channel knobs: phase-damping rate `q` and beam-splitter angle `theta`,
/// with reflectivity `r = sin(theta/2)` and transmissivity `t = cos(theta/2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelParams {
    q: f64,
    theta: f64,
}

impl ChannelParams {
    pub fn new(q: f64, theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::Domain(format!("damping rate q = {q} outside [0, 1]")));
        }
        if !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(Error::Domain(format!(
                "beam-splitter angle theta = {theta} outside [0, pi]"
            )));
        }
        Ok(ChannelParams { q, theta })
    }

    /// Builds parameters from the squared reflectivity `r^2 = sin^2(theta/2)`.
    pub fn from_rsq(q: f64, rsq: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rsq) {
            return Err(Error::Domain(format!(
                "squared reflectivity r^2 = {rsq} outside [0, 1]"
            )));
        }
        Self::new(q, 2.0 * rsq.sqrt().asin())
    }

    /// Lossless balanced splitter: `q = 0`, `theta = pi/2`.
    pub fn ideal() -> Self {
        ChannelParams { q: 0.0, theta: std::f64::consts::FRAC_PI_2 }
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn r(&self) -> f64 {
        (self.theta / 2.0).sin()
    }

    pub fn t(&self) -> f64 {
        (self.theta / 2.0).cos()
    }

    pub fn rsq(&self) -> f64 {
        self.r() * self.r()
    }

    /// Coherence survival amplitude `Q = sqrt(1 - q)`.
    pub fn big_q(&self) -> f64 {
        (1.0 - self.q).sqrt()
    }
}

/// Two-mode density matrix in the `{|00>, |01>, |10>, |11>}` basis
/// (index `2*n1 + n2`).
#[derive(Clone, Debug, PartialEq)]
pub struct TwoModeState {
    rho: CMat,
}

impl TwoModeState {
    /// Validates (Hermitian, unit trace, PSD, all within 1e-10) and wraps.
    pub fn from_matrix(rho: CMat) -> Result<Self> {
        if rho.dim() != 4 {
            return Err(Error::Domain(format!(
                "two-mode state must be 4x4, got {}x{}",
                rho.dim(),
                rho.dim()
            )));
        }
        validate_density(&rho, 1e-10)?;
        Ok(TwoModeState { rho })
    }

    /// Accepts a matrix within `tol` of a density matrix and projects it onto
    /// the density cone: hermitize, clamp negative eigenvalues, renormalize.
    pub fn project_near_density(m: &CMat, tol: f64) -> Result<Self> {
        if m.dim() != 4 {
            return Err(Error::Domain(format!(
                "two-mode state must be 4x4, got {}x{}",
                m.dim(),
                m.dim()
            )));
        }
        validate_density(m, tol)?;
        let h = m.hermitize();
        let (vals, vecs) = jacobi_hermitian(&h);
        let clamped: Vec<f64> = vals.iter().map(|&l| l.max(0.0)).collect();
        let total: f64 = clamped.iter().sum();
        let mut out = CMat::zeros(4);
        for k in 0..4 {
            let w = clamped[k] / total;
            if w == 0.0 {
                continue;
            }
            for i in 0..4 {
                let vik = vecs[(i, k)] * w;
                for j in 0..4 {
                    out[(i, j)] += vik * vecs[(j, k)].conj();
                }
            }
        }
        Self::from_matrix(out.hermitize())
    }

    pub fn matrix(&self) -> &CMat {
        &self.rho
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.rho[(i, j)]
    }
}

/// Exchanges the two modes (basis permutation `|n1 n2> -> |n2 n1>`).
pub fn swap_modes(rho: &TwoModeState) -> TwoModeState {
    const PERM: [usize; 4] = [0, 2, 1, 3];
    let m = CMat::from_fn(4, |i, j| rho.entry(PERM[i], PERM[j]));
    TwoModeState { rho: m }
}

/// Beam-splitter unitary on the `{|00>, |01>, |10>, |11>}` truncation:
/// identity on `|00>` and `|11>`, a rotation by `theta/2` on the
/// single-excitation block, with `U|10> = t|10> - r|01>`.
pub fn bs_unitary(theta: f64) -> Result<CMat> {
    if !(-std::f64::consts::PI..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::Domain(format!(
            "beam-splitter angle theta = {theta} outside [-pi, pi]"
        )));
    }
    let r = (theta / 2.0).sin();
    let t = (theta / 2.0).cos();
    Ok(CMat::from_rows(&[
        vec![c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)],
        vec![c64(0.0, 0.0), c64(t, 0.0), c64(-r, 0.0), c64(0.0, 0.0)],
        vec![c64(0.0, 0.0), c64(r, 0.0), c64(t, 0.0), c64(0.0, 0.0)],
        vec![c64(0.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)],
    ]))
}

/// Sends `sigma (x) |0><0|` through a beam splitter of angle `theta`.
pub fn mix_with_vacuum(sigma: &QubitState, theta: f64) -> Result<TwoModeState> {
    let u = bs_unitary(theta)?;
    let mut input = CMat::zeros(4);
    let s = sigma.as_matrix();
    // Mode 1 carries sigma, mode 2 the vacuum: |n1 0><m1 0| slots only.
    for n1 in 0..2 {
        for m1 in 0..2 {
            input[(2 * n1, 2 * m1)] = s[(n1, m1)];
        }
    }
    let rho = u.mul(&input).mul(&u.adjoint());
    TwoModeState::from_matrix(rho.hermitize())
}

/// Per-mode phase damping: Kraus operators `E0(q) = diag(1, sqrt(1-q))`,
/// `E1(q) = diag(0, sqrt(q))` applied with rate `q1` on mode 1 and `q2` on
/// mode 2. Populations are untouched; coherences shrink.
pub fn phase_damp(rho: &TwoModeState, q1: f64, q2: f64) -> Result<TwoModeState> {
    for (name, q) in [("q1", q1), ("q2", q2)] {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::Domain(format!("damping rate {name} = {q} outside [0, 1]")));
        }
    }
    let kraus_single = |q: f64| {
        [
            CMat::from_rows(&[
                vec![c64(1.0, 0.0), c64(0.0, 0.0)],
                vec![c64(0.0, 0.0), c64((1.0 - q).sqrt(), 0.0)],
            ]),
            CMat::from_rows(&[
                vec![c64(0.0, 0.0), c64(0.0, 0.0)],
                vec![c64(0.0, 0.0), c64(q.sqrt(), 0.0)],
            ]),
        ]
    };
    let e1 = kraus_single(q1);
    let e2 = kraus_single(q2);
    let mut out = CMat::zeros(4);
    for a in &e1 {
        for b in &e2 {
            let k = a.kron(b);
            out = out.add(&k.mul(rho.matrix()).mul(&k.adjoint()));
        }
    }
    TwoModeState::from_matrix(out.hermitize())
}

/// Closed form for the beam-splitter output followed by equal phase damping
/// `q` on both modes, with `Q = sqrt(1-q)`, `r = sin(theta/2)`,
/// `t = cos(theta/2)`:
///
/// ```text
/// [ 1-p      -Q r x    Q t x     0 ]
/// [ -Q r x*   p r^2   -p Q^2 rt  0 ]
/// [ Q t x*  -p Q^2 rt  p t^2     0 ]
/// [ 0         0         0        0 ]
/// ```
pub fn two_mode_closed_form(p: f64, x: C64, params: &ChannelParams) -> Result<TwoModeState> {
    QubitState::new(p, x)?;
    let (q_amp, r, t) = (params.big_q(), params.r(), params.t());
    let zero = c64(0.0, 0.0);
    let rho = CMat::from_rows(&[
        vec![c64(1.0 - p, 0.0), x * (-q_amp * r), x * (q_amp * t), zero],
        vec![x.conj() * (-q_amp * r), c64(p * r * r, 0.0), c64(-p * q_amp * q_amp * r * t, 0.0), zero],
        vec![x.conj() * (q_amp * t), c64(-p * q_amp * q_amp * r * t, 0.0), c64(p * t * t, 0.0), zero],
        vec![zero, zero, zero, zero],
    ]);
    TwoModeState::from_matrix(rho)
}

/// Statistical mixture `p' |1><1| + (1-p') |psi_p><psi_p|` with
/// `|psi_p> = sqrt(1-p)|0> + sqrt(p)|1>`, expressed as a VOPS state.
pub fn sigma_prime(p: f64, pprime: f64) -> Result<QubitState> {
    for (name, v) in [("p", p), ("p'", pprime)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Domain(format!("probability {name} = {v} outside [0, 1]")));
        }
    }
    let p_out = pprime + (1.0 - pprime) * p;
    let x_out = (1.0 - pprime) * (p * (1.0 - p)).sqrt();
    QubitState::new(p_out, c64(x_out, 0.0))
}

/// Heralding detection pattern of the scissors device: a single click on the
/// first detector (`(n_b, n_c) = (1, 0)`, output proportional to
/// `|0> + alpha|1>`) or on the second (`(0, 1)`, output `|0> - alpha|1>`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Herald {
    FirstClick,
    SecondClick,
}

/// Quantum scissors with the default herald (first detector clicks).
///
/// Truncates the coherent state `|alpha>` to the `{|0>, |1>}` sector by
/// projection synthesis: a single photon split on one balanced beam splitter,
/// the coherent input mixed in on a second, and photon-number-resolved
/// detection of two output ports. Returns the conditional output qubit and
/// the success probability of the heralding event.
pub fn scissors_output(alpha: C64, cutoff: usize) -> Result<(QubitState, f64)> {
    scissors_output_heralded(alpha, cutoff, Herald::FirstClick)
}

/// Quantum scissors with an explicit heralding branch.
pub fn scissors_output_heralded(
    alpha: C64,
    cutoff: usize,
    herald: Herald,
) -> Result<(QubitState, f64)> {
    if cutoff < 8 {
        return Err(Error::Domain(format!(
            "scissors cutoff must be at least 8, got {cutoff}"
        )));
    }
    let nsq = alpha.norm_sqr();
    if nsq > cutoff as f64 / 4.0 {
        return Err(Error::Domain(format!(
            "|alpha|^2 = {nsq:.3} exceeds cutoff/4 = {}; truncation inadequate",
            cutoff as f64 / 4.0
        )));
    }

    // Three-mode pure-state simulation. Mode a holds the ancilla photon
    // (never exceeds one excitation), modes b and c feed the detectors.
    let dim_a = 2;
    let dim_bc = cutoff + 2;
    let idx = |na: usize, nb: usize, nc: usize| (na * dim_bc + nb) * dim_bc + nc;
    let mut psi = vec![c64(0.0, 0.0); dim_a * dim_bc * dim_bc];

    // Renormalized truncated coherent state on mode c.
    let mut coh = Vec::with_capacity(cutoff + 1);
    let mut amp = c64(1.0, 0.0);
    coh.push(amp);
    for n in 1..=cutoff {
        amp *= alpha / (n as f64).sqrt();
        coh.push(amp);
    }
    let norm: f64 = coh.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for (nc, a) in coh.iter().enumerate() {
        psi[idx(1, 0, nc)] = a / norm;
    }

    // First splitter divides the ancilla photon between a and b; the second
    // mixes b with the coherent mode before detection.
    apply_bs_pair(&mut psi, [dim_a, dim_bc, dim_bc], (0, 1), -std::f64::consts::FRAC_PI_2)?;
    apply_bs_pair(&mut psi, [dim_a, dim_bc, dim_bc], (1, 2), std::f64::consts::FRAC_PI_2)?;

    let (hb, hc) = match herald {
        Herald::FirstClick => (1, 0),
        Herald::SecondClick => (0, 1),
    };
    let u0 = psi[idx(0, hb, hc)];
    let u1 = psi[idx(1, hb, hc)];
    let success = u0.norm_sqr() + u1.norm_sqr();
    if success < 1e-12 {
        return Err(Error::Numerical(format!(
            "degenerate conditioning: success probability {success:.3e}"
        )));
    }
    let p_out = u1.norm_sqr() / success;
    let x_out = u0 * u1.conj() / success;
    Ok((QubitState::new(p_out, x_out)?, success))
}

/// Applies a beam splitter of angle `theta` to two modes of a three-mode
/// state vector, using the Fock-space binomial expansion of
/// `(t a1^dag - r a2^dag)^n1 (r a1^dag + t a2^dag)^n2 |00>`.
fn apply_bs_pair(
    psi: &mut [C64],
    dims: [usize; 3],
    (ma, mb): (usize, usize),
    theta: f64,
) -> Result<()> {
    let r = (theta / 2.0).sin();
    let t = (theta / 2.0).cos();
    let maxdim = *dims.iter().max().unwrap();
    let mut fact = vec![1.0f64; 2 * maxdim + 2];
    for k in 1..fact.len() {
        fact[k] = fact[k - 1] * k as f64;
    }
    let binom = |n: usize, k: usize| fact[n] / (fact[k] * fact[n - k]);

    let stride = [dims[1] * dims[2], dims[2], 1];
    let mut out = vec![c64(0.0, 0.0); psi.len()];
    for (flat, &amp) in psi.iter().enumerate() {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        let n = [flat / stride[0], (flat / stride[1]) % dims[1], flat % dims[2]];
        let (n1, n2) = (n[ma], n[mb]);
        let total = n1 + n2;
        // Distribute the pair (n1, n2) over output occupations (k, total-k).
        for k in 0..=total {
            let mut coeff = 0.0f64;
            for i in k.saturating_sub(n2)..=k.min(n1) {
                let j = k - i;
                coeff += binom(n1, i)
                    * binom(n2, j)
                    * t.powi(i as i32)
                    * (-r).powi((n1 - i) as i32)
                    * r.powi(j as i32)
                    * t.powi((n2 - j) as i32);
            }
            coeff *= (fact[k] * fact[total - k]).sqrt() / (fact[n1] * fact[n2]).sqrt();
            if coeff == 0.0 {
                continue;
            }
            let (ka, kb) = (k, total - k);
            if ka >= dims[ma] || kb >= dims[mb] {
                if coeff.abs() * amp.norm() > 1e-12 {
                    return Err(Error::Numerical(format!(
                        "beam-splitter scattering exceeds mode truncation ({ka}, {kb})"
                    )));
                }
                continue;
            }
            let mut m = n;
            m[ma] = ka;
            m[mb] = kb;
            let target = m[0] * stride[0] + m[1] * stride[1] + m[2];
            out[target] += amp * coeff;
        }
    }
    psi.copy_from_slice(&out);
    Ok(())
}

/// Mixture of the two scissors branches `|0> +/- alpha|1>` with herald counts
/// `n0` and `n1`, at target single-photon probability `p = |alpha|^2/(1+|alpha|^2)`:
/// the coherence dephases to `x = ((n0 - n1)/(n0 + n1)) sqrt(p(1-p))`.
pub fn dephase_mix(n0: u64, n1: u64, p: f64) -> Result<QubitState> {
    if n0 + n1 == 0 {
        return Err(Error::Domain("herald counts n0 + n1 must be positive".into()));
    }
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Domain(format!(
            "target probability p = {p} outside [0, 1) (p = 1 has no finite alpha)"
        )));
    }
    let kappa = (n0 as f64 - n1 as f64) / (n0 + n1) as f64;
    QubitState::new(p, c64(kappa * (p * (1.0 - p)).sqrt(), 0.0))
}

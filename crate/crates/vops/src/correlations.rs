//! Correlation measures on two-mode states: the Pauli (Stokes) decomposition,
//! concurrence, negativity, two steering detection strengths per basis count,
//! a Bell correlation strength, an entanglement witness from the partial
//! transpose determinant, and a brute-force CHSH maximizer.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{c64, det_hermitian, eig_hermitian, jacobi_hermitian, mat_sqrt_psd, partial_transpose, CMat, Subsystem};
use crate::states::TwoModeState;

const SQRT_3: f64 = 1.732_050_807_568_877_2;
const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Pauli expectation values of a two-qubit state: local vectors
/// `u_i = <sigma_i (x) I>`, `v_j = <I (x) sigma_j>`, and the correlation
/// matrix `t[i][j] = <sigma_i (x) sigma_j>`, indices ordered (x, y, z) with
/// `sigma_z |0> = +|0>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StokesDecomposition {
    pub u: [f64; 3],
    pub v: [f64; 3],
    pub t: [[f64; 3]; 3],
}

fn pauli(k: usize) -> CMat {
    match k {
        0 => CMat::from_rows(&[
            vec![c64(0.0, 0.0), c64(1.0, 0.0)],
            vec![c64(1.0, 0.0), c64(0.0, 0.0)],
        ]),
        1 => CMat::from_rows(&[
            vec![c64(0.0, 0.0), c64(0.0, -1.0)],
            vec![c64(0.0, 1.0), c64(0.0, 0.0)],
        ]),
        _ => CMat::from_rows(&[
            vec![c64(1.0, 0.0), c64(0.0, 0.0)],
            vec![c64(0.0, 0.0), c64(-1.0, 0.0)],
        ]),
    }
}

/// Computes the full Pauli decomposition of a two-mode state.
pub fn stokes(rho: &TwoModeState) -> StokesDecomposition {
    let id = CMat::identity(2);
    let m = rho.matrix();
    let expval = |op: &CMat| m.mul(op).trace().re;
    let mut u = [0.0; 3];
    let mut v = [0.0; 3];
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        u[i] = expval(&pauli(i).kron(&id));
        v[i] = expval(&id.kron(&pauli(i)));
        for j in 0..3 {
            t[i][j] = expval(&pauli(i).kron(&pauli(j)));
        }
    }
    StokesDecomposition { u, v, t }
}

impl StokesDecomposition {
    /// The Gram matrix `R = T^T T` of the correlation matrix.
    pub fn correlation_gram(&self) -> [[f64; 3]; 3] {
        let mut r = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                r[i][j] = (0..3).map(|k| self.t[k][i] * self.t[k][j]).sum();
            }
        }
        r
    }

    /// Eigenvalues of `R = T^T T`, ascending.
    pub fn gram_eigenvalues(&self) -> [f64; 3] {
        let r = self.correlation_gram();
        let m = CMat::from_fn(3, |i, j| c64(r[i][j], 0.0));
        let (vals, _) = jacobi_hermitian(&m);
        [vals[0], vals[1], vals[2]]
    }
}

fn theta_plus(z: f64) -> f64 {
    z.max(0.0)
}

/// Wootters concurrence. The four lambda values are the singular values of
/// `K = sqrt(rho) (sy (x) sy) sqrt(rho)*`, read from the Hermitian embedding
/// `[[0, K], [K+, 0]]` so nothing is squared along the way; squaring would
/// wash out singular values far below the matrix norm.
pub fn concurrence(rho: &TwoModeState) -> f64 {
    let yy = pauli(1).kron(&pauli(1));
    let a = mat_sqrt_psd(rho.matrix()).expect("density matrix is PSD");
    let k = a.mul(&yy).mul(&a.conj());
    let kd = k.adjoint();
    let embed = CMat::from_fn(8, |i, j| match (i < 4, j < 4) {
        (true, false) => k[(i, j - 4)],
        (false, true) => kd[(i - 4, j)],
        _ => c64(0.0, 0.0),
    });
    let (vals, _) = eig_hermitian(&embed).expect("embedding is Hermitian");
    // Eigenvalues of the embedding are the +/- singular-value pairs.
    let mut lambdas: Vec<f64> = vals.iter().map(|&v| v.max(0.0)).collect();
    lambdas.sort_by(|x, y| y.partial_cmp(x).unwrap());
    theta_plus(2.0 * lambdas[0] - lambdas[..4].iter().sum::<f64>())
}

/// Negativity `2 sum_i max(0, -lambda_i(rho^PT))`, normalized so the
/// maximally entangled single-excitation state scores 1.
pub fn negativity(rho: &TwoModeState) -> f64 {
    let pt = partial_transpose(rho.matrix(), Subsystem::Second).expect("4x4 state");
    let (vals, _) = eig_hermitian(&pt).expect("partial transpose is Hermitian");
    2.0 * vals.iter().map(|&l| theta_plus(-l)).sum::<f64>()
}

/// Three-basis steering strength `sqrt(max(0, Tr R - 1) / 2)`.
pub fn steering_s3(rho: &TwoModeState) -> f64 {
    let st = stokes(rho);
    let e = st.gram_eigenvalues();
    (theta_plus(e[0] + e[1] + e[2] - 1.0) / 2.0).sqrt()
}

/// Rescaled three-basis steering strength
/// `max(0, sqrt(Tr R) - 1) / (sqrt(3) - 1)`, unit at maximal correlation.
pub fn steering_sca3(rho: &TwoModeState) -> f64 {
    let st = stokes(rho);
    let e = st.gram_eigenvalues();
    theta_plus((e[0] + e[1] + e[2]).sqrt() - 1.0) / (SQRT_3 - 1.0)
}

/// Bell correlation strength `sqrt(max(0, Tr R - min_eig(R) - 1))`; positive
/// exactly when the optimal CHSH value exceeds the local bound.
pub fn bell_b(rho: &TwoModeState) -> f64 {
    let st = stokes(rho);
    let e = st.gram_eigenvalues();
    theta_plus(e[1] + e[2] - 1.0).sqrt()
}

/// Rescaled two-basis steering strength
/// `max(0, sqrt(Tr R - min_eig(R)) - 1) / (sqrt(2) - 1)`.
pub fn steering_sca2(rho: &TwoModeState) -> f64 {
    let st = stokes(rho);
    let e = st.gram_eigenvalues();
    theta_plus((e[1] + e[2]).sqrt() - 1.0) / (SQRT_2 - 1.0)
}

/// Determinant-based entanglement witness `max(0, -det rho^PT)`, in
/// `[0, 1/16]` for two qubits.
pub fn uwe(rho: &TwoModeState) -> f64 {
    let pt = partial_transpose(rho.matrix(), Subsystem::Second).expect("4x4 state");
    theta_plus(-det_hermitian(&pt))
}

/// All seven correlation measures of a state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasureSet {
    pub c: f64,
    pub n: f64,
    pub s3: f64,
    pub s_ca3: f64,
    pub b: f64,
    pub s_ca2: f64,
    pub uwe: f64,
}

/// Evaluates every measure, sharing the Pauli decomposition.
pub fn measure_set(rho: &TwoModeState) -> MeasureSet {
    let st = stokes(rho);
    let e = st.gram_eigenvalues();
    let tr = e[0] + e[1] + e[2];
    MeasureSet {
        c: concurrence(rho),
        n: negativity(rho),
        s3: (theta_plus(tr - 1.0) / 2.0).sqrt(),
        s_ca3: theta_plus(tr.sqrt() - 1.0) / (SQRT_3 - 1.0),
        b: theta_plus(e[1] + e[2] - 1.0).sqrt(),
        s_ca2: theta_plus((e[1] + e[2]).sqrt() - 1.0) / (SQRT_2 - 1.0),
        uwe: uwe(rho),
    }
}

/// Monte Carlo maximization of the CHSH expectation
/// `a.T(b+b') + a'.T(b-b')` over random measurement directions. Draws
/// `settings` quadruples of unit vectors from a seeded generator (isotropic,
/// via normalized Gaussian triples, in the order a, a', b, b') and returns
/// the largest `|<B>|` found. Deterministic for a fixed seed.
pub fn chsh_bruteforce(rho: &TwoModeState, settings: usize, seed: u64) -> f64 {
    let st = stokes(rho);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = |rng: &mut ChaCha8Rng| -> [f64; 3] {
        loop {
            let v: [f64; 3] = [
                StandardNormal.sample(rng),
                StandardNormal.sample(rng),
                StandardNormal.sample(rng),
            ];
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if n > 1e-12 {
                return [v[0] / n, v[1] / n, v[2] / n];
            }
        }
    };
    let tv = |v: [f64; 3]| -> [f64; 3] {
        let mut out = [0.0; 3];
        for i in 0..3 {
            out[i] = (0..3).map(|j| st.t[i][j] * v[j]).sum();
        }
        out
    };
    let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let mut best = 0.0f64;
    for _ in 0..settings {
        let a = unit(&mut rng);
        let ap = unit(&mut rng);
        let b = unit(&mut rng);
        let bp = unit(&mut rng);
        let sum = [b[0] + bp[0], b[1] + bp[1], b[2] + bp[2]];
        let diff = [b[0] - bp[0], b[1] - bp[1], b[2] - bp[2]];
        let val = dot(a, tv(sum)) + dot(ap, tv(diff));
        if val.abs() > best {
            best = val.abs();
        }
    }
    best
}

//! Dense joint evolution of the qubit and a handful of bath spins.
//!
//! Bath basis index: the spin at position k of [`BathSubset::ordered`] is bit
//! `n − 1 − k`, bit value 0 meaning spin up. Unobserved spins come first, so
//! they occupy the most significant bits.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

use super::su2::{conditional_propagator, level_field};
use crate::dynamics::QubitPair;
use crate::environment::{EnvironmentRealization, NuclearSpin};
use crate::error::{invalid, Error, Result};

pub const MAX_BATH_SPINS: usize = 8;

type CMatrix = DMatrix<Complex64>;

/// Bath spins grouped the way the observer sees them.
#[derive(Debug, Clone, PartialEq)]
pub struct BathSubset {
    pub unobserved: Vec<NuclearSpin>,
    pub macrofractions: Vec<Vec<NuclearSpin>>,
}

impl BathSubset {
    pub fn new(unobserved: Vec<NuclearSpin>, macrofractions: Vec<Vec<NuclearSpin>>) -> Self {
        Self {
            unobserved,
            macrofractions,
        }
    }

    pub fn from_realization(env: &EnvironmentRealization) -> Self {
        Self {
            unobserved: env.unobserved.iter().map(|&i| env.spins[i]).collect(),
            macrofractions: env
                .macrofractions
                .iter()
                .map(|mf| mf.iter().map(|&i| env.spins[i]).collect())
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.unobserved.len() + self.observed_len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn observed_len(&self) -> usize {
        self.macrofractions.iter().map(Vec::len).sum()
    }

    /// Unobserved spins, then each macrofraction in order.
    pub fn ordered(&self) -> Vec<NuclearSpin> {
        self.unobserved
            .iter()
            .chain(self.macrofractions.iter().flatten())
            .copied()
            .collect()
    }

    fn observed(&self) -> Vec<NuclearSpin> {
        self.macrofractions.iter().flatten().copied().collect()
    }
}

/// Dense `Σ_k (h_m^k·σ^k)/2` on the bath.
pub fn bath_hamiltonian(spins: &[NuclearSpin], m: i8) -> CMatrix {
    let n = spins.len();
    let d = 1usize << n;
    let mut h = CMatrix::zeros(d, d);
    for (k, spin) in spins.iter().enumerate() {
        let f = level_field(spin, m);
        let bit = 1usize << (n - 1 - k);
        let lower = Complex64::new(0.5 * f.x, -0.5 * f.y);
        for i in 0..d {
            if i & bit == 0 {
                let j = i | bit;
                h[(i, i)] += 0.5 * f.z;
                h[(j, j)] -= 0.5 * f.z;
                h[(i, j)] += lower;
                h[(j, i)] += lower.conj();
            }
        }
    }
    h
}

/// Diagonal of `⊗_k (𝟙 + p_k σ_z)/2`.
pub fn initial_populations(spins: &[NuclearSpin]) -> DVector<f64> {
    let n = spins.len();
    DVector::from_fn(1 << n, |i, _| {
        spins.iter().enumerate().fold(1.0, |acc, (k, s)| {
            let up = i & (1 << (n - 1 - k)) == 0;
            acc * 0.5 * if up { 1.0 + s.polarization } else { 1.0 - s.polarization }
        })
    })
}

type RMatrix = DMatrix<f64>;

/// Complex matrix held as separate real and imaginary parts so that products
/// run through the blocked f64 kernel.
#[derive(Debug, Clone)]
struct Split {
    re: RMatrix,
    im: RMatrix,
}

impl Split {
    fn from_complex(m: &CMatrix) -> Self {
        Self {
            re: m.map(|z| z.re),
            im: m.map(|z| z.im),
        }
    }

    fn to_complex(&self) -> CMatrix {
        self.re.zip_map(&self.im, Complex64::new)
    }

    /// `self · other†`.
    fn mul_adjoint(&self, other: &Split) -> CMatrix {
        let re = &self.re * other.re.transpose() + &self.im * other.im.transpose();
        let im = &self.im * other.re.transpose() - &self.re * other.im.transpose();
        re.zip_map(&im, Complex64::new)
    }

    /// `self† · other`.
    fn adjoint_mul(&self, other: &Split) -> CMatrix {
        let re = self.re.tr_mul(&other.re) + self.im.tr_mul(&other.im);
        let im = self.re.tr_mul(&other.im) - self.im.tr_mul(&other.re);
        re.zip_map(&im, Complex64::new)
    }

    fn transpose(&self) -> Split {
        Split {
            re: self.re.transpose(),
            im: self.im.transpose(),
        }
    }

    /// `Tr(self · other†)`.
    fn trace_adjoint(&self, other: &Split) -> Complex64 {
        let re = self.re.dot(&other.re) + self.im.dot(&other.im);
        let im = self.im.dot(&other.re) - self.re.dot(&other.im);
        Complex64::new(re, im)
    }
}

/// Conditional bath propagator `⊗_k U_m^k(t)` as a dense matrix, spin 0 on
/// the most significant bit.
pub fn bath_propagator(spins: &[NuclearSpin], m: i8, t: f64) -> CMatrix {
    let mut u = CMatrix::identity(1, 1);
    for spin in spins {
        let k = conditional_propagator(spin, m, t);
        let d = u.nrows();
        u = CMatrix::from_fn(2 * d, 2 * d, |r, c| u[(r / 2, c / 2)] * k[(r % 2, c % 2)]);
    }
    u
}

/// One qubit branch: `Q(t) = U_m(t)√ρ_E`. The bath spins do not interact, so
/// `U_m` is the Kronecker product of the single-spin propagators.
#[derive(Debug, Clone)]
struct Branch {
    spins: Vec<NuclearSpin>,
    m: i8,
    sqrt_pop: DVector<f64>,
}

impl Branch {
    fn new(spins: &[NuclearSpin], m: i8, sqrt_pop: &DVector<f64>) -> Self {
        Self {
            spins: spins.to_vec(),
            m,
            sqrt_pop: sqrt_pop.clone(),
        }
    }

    /// Factor Q with `U ρ_E U† = Q Q†`.
    fn factor(&self, t: f64) -> Split {
        let mut q = bath_propagator(&self.spins, self.m, t);
        for (j, mut col) in q.column_iter_mut().enumerate() {
            col.scale_mut(self.sqrt_pop[j]);
        }
        Split::from_complex(&q)
    }
}

/// Exactly evolved `ρ_{Q:E}` in the qubit ⊗ bath basis, dimension `2·2ⁿ`.
/// The qubit index 0 is level m and 1 is level m′ of the pair.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    pub matrix: CMatrix,
    pub bath_spins: usize,
}

impl JointState {
    pub fn bath_dim(&self) -> usize {
        1 << self.bath_spins
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).camax()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        SymmetricEigen::new(herm).eigenvalues.min()
    }

    /// Bath block `⟨q|ρ|q′⟩`.
    pub fn block(&self, q: usize, q_prime: usize) -> CMatrix {
        let d = self.bath_dim();
        self.matrix.view((q * d, q_prime * d), (d, d)).into_owned()
    }
}

/// Partial trace of a bath operator over all spin positions not in `keep`.
/// Kept positions retain their relative order.
pub fn partial_trace(op: &CMatrix, n: usize, keep: &[usize]) -> CMatrix {
    let keep_mask: usize = keep.iter().map(|&k| 1usize << (n - 1 - k)).sum();
    let compress = |i: usize| {
        keep.iter()
            .fold(0usize, |acc, &k| (acc << 1) | ((i >> (n - 1 - k)) & 1))
    };
    let dk = 1usize << keep.len();
    let mut out = CMatrix::zeros(dk, dk);
    for i in 0..op.nrows() {
        for j in 0..op.ncols() {
            if (i & !keep_mask) == (j & !keep_mask) {
                out[(compress(i), compress(j))] += op[(i, j)];
            }
        }
    }
    out
}

/// Squared Uhlmann fidelity of two dense density matrices by Hermitian
/// eigen-decomposition.
pub fn uhlmann_fidelity_dense(rho: &CMatrix, sigma: &CMatrix) -> f64 {
    let sqrt_rho = psd_sqrt(rho);
    let inner = &sqrt_rho * sigma * &sqrt_rho;
    let root: f64 = SymmetricEigen::new(hermitian_part(&inner))
        .eigenvalues
        .iter()
        .map(|l| l.max(0.0).sqrt())
        .sum();
    root * root
}

/// Squared Uhlmann fidelity of `ρ = AA†` and `σ = BB†` given `A†` and `B†`,
/// as `‖A†B‖₁²`. Needs no square root of either state.
pub fn uhlmann_fidelity_factored(a_adj: &CMatrix, b_adj: &CMatrix) -> f64 {
    let ra = householder_r(a_adj.clone());
    let rb = householder_r(b_adj.clone());
    let s: f64 = SVD::new(ra * rb.adjoint(), false, false).singular_values.sum();
    s * s
}

/// Triangular factor of a Householder QR of a tall matrix, up to row phases.
fn householder_r(mut x: CMatrix) -> CMatrix {
    let (rows, cols) = x.shape();
    assert!(rows >= cols);
    let data = x.as_mut_slice();
    for j in 0..cols {
        let (head, tail) = data.split_at_mut((j + 1) * rows);
        let v = &mut head[j * rows + j..];
        let alpha = v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        if alpha == 0.0 {
            continue;
        }
        let phase = if v[0].norm() > 0.0 {
            v[0] / v[0].norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let top = v[0];
        v[0] += phase * alpha;
        let scale = 2.0 / (2.0 * alpha * (alpha + top.norm()));
        for col in tail.chunks_exact_mut(rows) {
            let c = &mut col[j..];
            let dot: Complex64 = v.iter().zip(c.iter()).map(|(a, b)| a.conj() * b).sum();
            let f = dot * scale;
            c.iter_mut().zip(v.iter()).for_each(|(b, a)| *b -= a * f);
        }
        v[0] = -phase * alpha;
    }
    CMatrix::from_fn(
        cols,
        cols,
        |i, j| if i <= j { x[(i, j)] } else { Complex64::new(0.0, 0.0) },
    )
}

fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let v = &eig.eigenvectors;
    let d = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|l| Complex64::new(l.max(0.0).sqrt(), 0.0)),
    );
    v * CMatrix::from_diagonal(&d) * v.adjoint()
}

/// Frobenius inner product `Σ conj(a)·b`.
fn inner(a: &CMatrix, b: &CMatrix) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Observables extracted from the joint evolution at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct JointObservables {
    pub t: f64,
    /// `Tr(U_m ρ_E U_{m′}†)` over every bath spin.
    pub gamma_total: Complex64,
    /// Decoherence factor of the unobserved part, extracted from the
    /// off-diagonal block of the observed-reduced state.
    pub gamma_unobserved: Complex64,
    /// `‖R − γ X‖_F` for that extraction; zero when the block factorizes.
    pub factorization_residual: f64,
    /// Off-diagonal block trace including the qubit amplitudes.
    pub coherence: Complex64,
    /// Fidelity between the m and m′ conditional states, per macrofraction.
    pub fidelities: Vec<f64>,
    /// `max(|γ_unobserved|, max fidelity)`.
    pub sbs_distance: f64,
}

/// Branch data for one subset, qubit state and pair.
#[derive(Debug, Clone)]
pub struct JointEvolution {
    n: usize,
    amplitudes: [Complex64; 2],
    branches: [Branch; 2],
    observed_branches: [Branch; 2],
    /// (first position, size) of each macrofraction within the ordering.
    macrofraction_spans: Vec<(usize, usize)>,
    unobserved: usize,
}

impl JointEvolution {
    pub fn new(subset: &BathSubset, amplitudes: [Complex64; 2], pair: QubitPair) -> Result<Self> {
        let n = subset.len();
        if n > MAX_BATH_SPINS {
            return Err(Error::TooManySpins { n, max: MAX_BATH_SPINS });
        }
        let norm = amplitudes[0].norm_sqr() + amplitudes[1].norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("qubit amplitudes have norm² {norm}, expected 1")));
        }
        let spins = subset.ordered();
        let observed = subset.observed();
        let make = |s: &[NuclearSpin]| {
            let sqrt_pop = initial_populations(s).map(f64::sqrt);
            [
                Branch::new(s, pair.m(), &sqrt_pop),
                Branch::new(s, pair.m_prime(), &sqrt_pop),
            ]
        };
        let mut start = subset.unobserved.len();
        let macrofraction_spans = subset
            .macrofractions
            .iter()
            .map(|mf| {
                let span = (start, mf.len());
                start += mf.len();
                span
            })
            .collect();
        Ok(Self {
            n,
            amplitudes,
            branches: make(&spins),
            observed_branches: make(&observed),
            macrofraction_spans,
            unobserved: subset.unobserved.len(),
        })
    }

    pub fn bath_spins(&self) -> usize {
        self.n
    }

    /// Materializes the full `2·2ⁿ` joint state.
    pub fn joint_state(&self, t: f64) -> JointState {
        let q = [self.branches[0].factor(t), self.branches[1].factor(t)];
        let d = 1usize << self.n;
        let mut matrix = CMatrix::zeros(2 * d, 2 * d);
        for a in 0..2 {
            for b in 0..2 {
                let weight = self.amplitudes[a] * self.amplitudes[b].conj();
                let block = q[a].mul_adjoint(&q[b]) * weight;
                matrix.view_mut((a * d, b * d), (d, d)).copy_from(&block);
            }
        }
        JointState {
            matrix,
            bath_spins: self.n,
        }
    }

    /// Conditional bath state `U_m ρ_E U_m†` for qubit index 0 or 1.
    pub fn conditional_bath_state(&self, branch: usize, t: f64) -> CMatrix {
        let q = self.branches[branch].factor(t);
        q.mul_adjoint(&q)
    }

    /// Observables without materializing the joint state.
    pub fn observables(&self, t: f64) -> JointObservables {
        let q = [self.branches[0].factor(t), self.branches[1].factor(t)];
        let gamma_total = q[0].trace_adjoint(&q[1]);

        let qt = [q[0].transpose(), q[1].transpose()];
        let observed = self.n - self.unobserved;
        let reduced = self
            .factor_adjoint(&qt[0], self.unobserved, observed)
            .adjoint_mul(&self.factor_adjoint(&qt[1], self.unobserved, observed));
        let qo = [self.observed_branches[0].factor(t), self.observed_branches[1].factor(t)];
        let x = qo[0].mul_adjoint(&qo[1]);
        let gamma_unobserved = inner(&x, &reduced) / inner(&x, &x);
        let factorization_residual = (&reduced - &x * gamma_unobserved).norm();

        let fidelities: Vec<f64> = self
            .macrofraction_spans
            .iter()
            .map(|&(start, len)| {
                uhlmann_fidelity_factored(
                    &self.factor_adjoint(&qt[0], start, len).to_complex(),
                    &self.factor_adjoint(&qt[1], start, len).to_complex(),
                )
            })
            .collect();
        let sbs_distance = fidelities.iter().copied().fold(gamma_unobserved.norm(), f64::max);
        JointObservables {
            t,
            gamma_total,
            gamma_unobserved,
            factorization_residual,
            coherence: self.amplitudes[0] * self.amplitudes[1].conj() * gamma_total,
            fidelities,
            sbs_distance,
        }
    }

    /// `A†` where `A A† = Tr_rest(Q Q†)` for the spins `[start, start+len)`,
    /// given `Qᵀ`. Rows of `A†` run over (rest, k), columns over those spins.
    fn factor_adjoint(&self, qt: &Split, start: usize, len: usize) -> Split {
        let d = qt.re.nrows();
        let d_s = 1usize << len;
        let low = 1usize << (self.n - start - len);
        let rows = d / d_s * d;
        let mut re = vec![0.0; rows * d_s];
        let mut im = vec![0.0; rows * d_s];
        let (src_re, src_im) = (qt.re.as_slice(), qt.im.as_slice());
        for g in 0..d {
            let s = (g / low) % d_s;
            let rest = (g / (low * d_s)) * low + g % low;
            let dst = s * rows + rest * d;
            re[dst..dst + d].copy_from_slice(&src_re[g * d..(g + 1) * d]);
            for (o, i) in im[dst..dst + d].iter_mut().zip(&src_im[g * d..(g + 1) * d]) {
                *o = -i;
            }
        }
        Split {
            re: RMatrix::from_vec(rows, d_s, re),
            im: RMatrix::from_vec(rows, d_s, im),
        }
    }
}

/// Evolution plus observables of one subset at one instant.
#[derive(Debug, Clone)]
pub struct BruteForce {
    pub state: JointState,
    pub observables: JointObservables,
}

pub fn multi_spin_brute_force(
    subset: &BathSubset,
    amplitudes: [Complex64; 2],
    pair: QubitPair,
    t: f64,
) -> Result<BruteForce> {
    let evolution = JointEvolution::new(subset, amplitudes, pair)?;
    Ok(BruteForce {
        state: evolution.joint_state(t),
        observables: evolution.observables(t),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::su2::{conditional_density, gamma_oracle, uhlmann_fidelity, Complex2x2};
    use approx::assert_relative_eq;

    fn half() -> [Complex64; 2] {
        let c = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        [c, c]
    }

    fn spins(n: usize) -> Vec<NuclearSpin> {
        (0..n)
            .map(|k| {
                let k = k as f64;
                NuclearSpin::from_couplings(0.05 + 0.02 * k, -0.03 * k, 0.1 - 0.04 * k, 0.067, 0.8 - 0.3 * k)
            })
            .collect()
    }

    #[test]
    fn propagator_is_exponential_of_hamiltonian() {
        // truncated series of exp(−iHt); on-axis spins make H block-degenerate
        let mut s = spins(3);
        s.push(NuclearSpin::from_couplings(0.0, 0.0, 0.187, 0.067, 0.5));
        s.push(NuclearSpin::from_couplings(0.0, 0.0, 0.166, 0.067, 0.5));
        for m in [-1, 0, 1] {
            let t = 0.9;
            let h = bath_hamiltonian(&s, m) * Complex64::new(0.0, -t);
            let mut term = CMatrix::identity(32, 32);
            let mut sum = term.clone();
            for k in 1..40 {
                term = &term * &h / Complex64::new(k as f64, 0.0);
                sum += &term;
            }
            assert!((sum - bath_propagator(&s, m, t)).norm() < 1e-13);
        }
    }

    #[test]
    fn single_spin_matches_two_by_two() {
        let s = NuclearSpin::from_couplings(0.13, -0.07, 0.2, 0.067, 1.0);
        let pair = QubitPair::new(0, 1).unwrap();
        let subset = BathSubset::new(vec![s], vec![]);
        let bf = multi_spin_brute_force(&subset, half(), pair, 7.3).unwrap();
        assert!((bf.observables.gamma_total - gamma_oracle(&s, pair, 7.3)).norm() < 1e-12);
        assert!((bf.observables.gamma_unobserved - gamma_oracle(&s, pair, 7.3)).norm() < 1e-12);
    }

    #[test]
    fn single_observed_spin_fidelity() {
        let s = NuclearSpin::from_couplings(0.13, -0.07, 0.2, 0.067, 0.6);
        let pair = QubitPair::new(-1, 1).unwrap();
        let bf = multi_spin_brute_force(&BathSubset::new(vec![], vec![vec![s]]), half(), pair, 4.1).unwrap();
        let expected = uhlmann_fidelity(&conditional_density(&s, -1, 4.1), &conditional_density(&s, 1, 4.1));
        assert_relative_eq!(bf.observables.fidelities[0], expected, epsilon = 1e-12);
        assert_relative_eq!(bf.observables.gamma_unobserved.re, 1.0, epsilon = 1e-12);
        let rho: Complex2x2 = conditional_density(&s, -1, 4.1);
        let dense = bf.state.block(0, 0) * Complex64::new(2.0, 0.0);
        assert!((dense - CMatrix::from_iterator(2, 2, rho.iter().copied())).camax() < 1e-12);
    }

    #[test]
    fn uncoherent_qubit_has_zero_off_diagonal_block() {
        let subset = BathSubset::new(spins(2), vec![spins(3)[2..].to_vec()]);
        let one = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let bf = multi_spin_brute_force(&subset, one, QubitPair::default(), 3.0).unwrap();
        assert_eq!(bf.state.block(0, 1).camax(), 0.0);
        assert_eq!(bf.state.block(1, 1).camax(), 0.0);
        assert_eq!(bf.observables.coherence, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn joint_state_is_a_density_matrix() {
        let all = spins(4);
        let subset = BathSubset::new(all[..2].to_vec(), vec![all[2..].to_vec()]);
        let amps = [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)];
        let ev = JointEvolution::new(&subset, amps, QubitPair::new(-1, 1).unwrap()).unwrap();
        for t in [0.0, 1.7, 25.0, 140.0] {
            let js = ev.joint_state(t);
            assert!(js.hermiticity_error() < 1e-12);
            assert!((js.trace() - 1.0).norm() < 1e-12);
            assert!(js.min_eigenvalue() > -1e-10);
        }
    }

    #[test]
    fn fast_reduction_equals_generic_partial_trace() {
        let all = spins(5);
        let subset = BathSubset::new(all[..1].to_vec(), vec![all[1..3].to_vec(), all[3..].to_vec()]);
        let ev = JointEvolution::new(&subset, half(), QubitPair::default()).unwrap();
        let t = 9.5;
        let obs = ev.observables(t);
        let rho = [ev.conditional_bath_state(0, t), ev.conditional_bath_state(1, t)];
        for (i, keep) in [[1usize, 2], [3, 4]].iter().enumerate() {
            let a = partial_trace(&rho[0], 5, keep);
            let b = partial_trace(&rho[1], 5, keep);
            assert_relative_eq!(obs.fidelities[i], uhlmann_fidelity_dense(&a, &b), epsilon = 1e-10);
        }
        // off-diagonal block: Tr over the unobserved spin of the coherence block
        let js = ev.joint_state(t);
        let off = partial_trace(&js.block(0, 1), 5, &[1, 2, 3, 4]) * Complex64::new(2.0, 0.0);
        assert!((off.trace() - obs.gamma_total).norm() < 1e-12);
        assert!(obs.factorization_residual < 1e-12);
    }

    #[test]
    fn partial_trace_of_product() {
        let a = conditional_density(&spins(1)[0], 1, 2.0);
        let b = conditional_density(&spins(2)[1], 0, 3.0);
        let ca = CMatrix::from_iterator(2, 2, a.iter().copied());
        let cb = CMatrix::from_iterator(2, 2, b.iter().copied());
        let ab = ca.kronecker(&cb);
        assert!((partial_trace(&ab, 2, &[0]) - &ca).camax() < 1e-15);
        assert!((partial_trace(&ab, 2, &[1]) - &cb).camax() < 1e-15);
    }

    #[test]
    fn too_many_spins() {
        let subset = BathSubset::new(spins(9), vec![]);
        assert!(matches!(
            JointEvolution::new(&subset, half(), QubitPair::default()),
            Err(Error::TooManySpins { n: 9, max: 8 })
        ));
    }

    #[test]
    fn amplitudes_must_be_normalized() {
        let subset = BathSubset::new(spins(1), vec![]);
        let bad = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
        assert!(JointEvolution::new(&subset, bad, QubitPair::default()).is_err());
    }

    #[test]
    fn householder_triangle_reproduces_gram() {
        let x = CMatrix::from_fn(9, 3, |i, j| {
            Complex64::new((i * j % 4) as f64 - 1.0, (i + 2 * j) as f64 * 0.1)
        });
        let r = householder_r(x.clone());
        assert!((r.adjoint() * &r - x.adjoint() * &x).camax() < 1e-12);
        assert!((0..3).all(|i| (0..i).all(|j| r[(i, j)].norm() == 0.0)));
    }

    #[test]
    fn factored_fidelity_matches_dense() {
        let all = spins(3);
        let ev = JointEvolution::new(&BathSubset::new(vec![], vec![all]), half(), QubitPair::default()).unwrap();
        let t = 12.0;
        let a = ev.conditional_bath_state(0, t);
        let b = ev.conditional_bath_state(1, t);
        assert_relative_eq!(
            ev.observables(t).fidelities[0],
            uhlmann_fidelity_dense(&a, &b),
            epsilon = 1e-10
        );
    }
}

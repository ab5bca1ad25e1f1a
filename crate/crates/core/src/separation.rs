//! Hardness functionals, hard channel ensembles and the many-versus-one game.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelRep, ChoiState};
use crate::error::{Error, Result};
use crate::pauli::{check_qubits, pauli_coefficients, DenseOperator, PauliString};
use crate::sim::{bell_character_sums, ChoiOracle, DensityMatrix, RngStream};

/// Normalization tolerance for probe vectors.
pub const PROBE_NORM_TOL: f64 = 1e-9;
/// Smallest admissible denominator in `Δ`.
pub const DENOMINATOR_FLOOR: f64 = 1e-12;
/// Largest auxiliary register for `Δ`.
pub const MAX_AUX_QUBITS: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleVariant {
    /// `±σ_A` with a nontrivial output half.
    General,
    /// `±σ_A` with both halves nontrivial.
    DoublyStochastic,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedPauli {
    pub sign: i8,
    pub string: PauliString,
}

impl SignedPauli {
    pub fn dense(&self) -> Result<DenseOperator> {
        Ok(DenseOperator::from_pauli(&self.string)?.scale(Complex64::new(self.sign as f64, 0.0)))
    }
}

/// `2n`-qubit signed Pauli observables, positives first; member `i` pairs with `i + M/2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardEnsemble {
    pub n: usize,
    pub variant: EnsembleVariant,
    pub epsilon: f64,
    pub members: Vec<SignedPauli>,
}

impl HardEnsemble {
    pub fn new(n: usize, variant: EnsembleVariant, epsilon: f64) -> Result<Self> {
        check_qubits(2 * n)?;
        if n == 0 {
            return Err(Error::InvalidArgument("ensemble needs n ≥ 1".into()));
        }
        check_epsilon(epsilon)?;
        let positives: Vec<PauliString> = PauliString::all(2 * n)
            .filter(|p| admissible(p, n, variant))
            .collect();
        let members = [1i8, -1]
            .iter()
            .flat_map(|&sign| {
                positives.iter().map(move |p| SignedPauli {
                    sign,
                    string: p.clone(),
                })
            })
            .collect();
        Ok(Self {
            n,
            variant,
            epsilon,
            members,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// The first `M/2` members.
    pub fn positives(&self) -> &[SignedPauli] {
        &self.members[..self.members.len() / 2]
    }

    /// `2·4ⁿ(4ⁿ−1)` or `2(4ⁿ−1)²`.
    pub fn expected_len(n: usize, variant: EnsembleVariant) -> usize {
        let q = 1usize << (2 * n);
        match variant {
            EnsembleVariant::General => 2 * q * (q - 1),
            EnsembleVariant::DoublyStochastic => 2 * (q - 1) * (q - 1),
        }
    }
}

fn admissible(p: &PauliString, n: usize, variant: EnsembleVariant) -> bool {
    let (inp, out) = p.split_at(n);
    match variant {
        EnsembleVariant::General => !out.is_identity(),
        EnsembleVariant::DoublyStochastic => !out.is_identity() && !inp.is_identity(),
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(0.0..1.0 / 3.0).contains(&epsilon) {
        return Err(Error::InvalidArgument(format!(
            "epsilon {epsilon} outside [0, 1/3)"
        )));
    }
    Ok(())
}

fn check_norm(phi: &[Complex64]) -> Result<()> {
    let norm: f64 = phi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > PROBE_NORM_TOL {
        return Err(Error::InvalidState(format!("probe has norm {norm}")));
    }
    Ok(())
}

/// Reshapes a vector on `(rows ⊗ cols)` into a `2^rows × 2^cols` matrix.
fn reshape(phi: &[Complex64], rows: usize, cols: usize) -> DMatrix<Complex64> {
    let dc = 1usize << cols;
    DMatrix::from_fn(1usize << rows, dc, |r, c| phi[r * dc + c])
}

/// Squared-overlap average `(2/M) Σ_{i ≤ M/2} ⟨φ|O_i|φ⟩²` over a `2n`-qubit pure state.
///
/// Uses `Σ_A ⟨σ_A⟩² = 2^{2n}` and the marginal purities to subtract excluded strings.
pub fn delta_functional(ens: &HardEnsemble, phi: &[Complex64]) -> Result<f64> {
    let n = ens.n;
    if phi.len() != 1usize << (2 * n) {
        return Err(Error::DimensionMismatch {
            expected: 1 << (2 * n),
            found: phi.len(),
        });
    }
    check_norm(phi)?;
    let m = reshape(phi, n, n);
    let rho_in = &m * m.adjoint();
    let rho_out = m.transpose() * m.conjugate();
    let pur = |r: &DMatrix<Complex64>| r.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let q = (1u64 << (2 * n)) as f64;
    let d = (1u64 << n) as f64;
    Ok(match ens.variant {
        EnsembleVariant::General => (q - d * pur(&rho_in)) / (q * (q - 1.0)),
        EnsembleVariant::DoublyStochastic => {
            (q - d * (pur(&rho_in) + pur(&rho_out)) + 1.0) / ((q - 1.0) * (q - 1.0))
        }
    })
}

/// The same average summed member by member.
pub fn delta_functional_dense(ens: &HardEnsemble, phi: &[Complex64]) -> Result<f64> {
    check_norm(phi)?;
    let pos = ens.positives();
    let sum: f64 = pos
        .iter()
        .map(|p| {
            let mut v = Complex64::new(0.0, 0.0);
            for (r, amp) in phi.iter().enumerate() {
                let (c, e) = p.string.row_entry(r);
                v += amp.conj() * e * phi[c];
            }
            v.re * v.re
        })
        .sum();
    Ok(sum / pos.len() as f64)
}

/// `1/4ⁿ` (general) or `1/(4ⁿ−1)` (doubly stochastic).
pub fn delta_closed_form(n: usize, variant: EnsembleVariant) -> f64 {
    let q = (1u64 << (2 * n)) as f64;
    match variant {
        EnsembleVariant::General => 1.0 / q,
        EnsembleVariant::DoublyStochastic => 1.0 / (q - 1.0),
    }
}

/// `|Ω⟩ = 2^{−n/2} Σ_i |i⟩|i⟩` on `2n` qubits.
pub fn maximally_entangled(n: usize) -> Vec<Complex64> {
    let d = 1usize << n;
    let amp = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut v = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        v[i * d + i] = amp;
    }
    v
}

/// Probe pair for `Δ`: `φ` on `aux ⊗ out` and `ρ` on `aux ⊗ in`.
#[derive(Clone, Debug)]
pub struct DeltaProbe {
    pub aux: usize,
    pub phi: Vec<Complex64>,
    pub rho: DensityMatrix,
}

/// `φ = ψ_aux ⊗ ϕ_out` with `ρ = |ψ⟩⟨ψ|_aux ⊗ |ϕ̄⟩⟨ϕ̄|_in`, `ψ = |0…0⟩`.
pub fn product_probe(n: usize, aux: usize, varphi: &[Complex64]) -> Result<DeltaProbe> {
    if varphi.len() != 1usize << n {
        return Err(Error::DimensionMismatch {
            expected: 1 << n,
            found: varphi.len(),
        });
    }
    check_norm(varphi)?;
    let da = 1usize << aux;
    let mut phi = vec![Complex64::new(0.0, 0.0); da << n];
    phi[..1 << n].copy_from_slice(varphi);
    let conj: Vec<Complex64> = varphi.iter().map(|z| z.conj()).collect();
    let mut psi_rho = vec![Complex64::new(0.0, 0.0); da << n];
    psi_rho[..1 << n].copy_from_slice(&conj);
    Ok(DeltaProbe {
        aux,
        phi,
        rho: DensityMatrix::pure(&psi_rho)?,
    })
}

/// Ratio-of-quadratic-forms average defining `Δ`, at the given probe.
///
/// `X_s = tr_in[ρ^{T_in}(I_aux ⊗ σ_s)]`; each term is `⟨φ|X_s ⊗ σ_out|φ⟩` over `⟨φ|ρ_aux ⊗ I|φ⟩`.
pub fn big_delta_functional(ens: &HardEnsemble, probe: &DeltaProbe) -> Result<f64> {
    let n = ens.n;
    let aux = probe.aux;
    if aux > MAX_AUX_QUBITS {
        return Err(Error::DimensionGuard {
            qubits: aux,
            max: MAX_AUX_QUBITS,
        });
    }
    if probe.phi.len() != 1usize << (aux + n) || probe.rho.qubits() != aux + n {
        return Err(Error::DimensionMismatch {
            expected: 1 << (aux + n),
            found: probe.phi.len(),
        });
    }
    check_norm(&probe.phi)?;
    let da = 1usize << aux;
    let d = 1usize << n;
    let phi = reshape(&probe.phi, aux, n);
    let rho = probe.rho.operator();
    let rho_aux = rho.trace_back(n)?;
    let den = (phi.adjoint() * rho_aux.matrix() * &phi).trace().re;
    if den <= DENOMINATOR_FLOOR {
        return Err(Error::InvalidState(format!(
            "degenerate probe: denominator {den:e}"
        )));
    }
    let mut values = vec![vec![0.0; d * d]; d * d];
    for (s_idx, row) in values.iter_mut().enumerate() {
        let s = PauliString::from_index(s_idx, n);
        let x = DMatrix::from_fn(da, da, |a, b| {
            (0..d)
                .map(|i| {
                    let (j, e) = s.row_entry(i);
                    // (ρ^{T_in})_{(a,j),(b,i)} = ρ_{(a,i),(b,j)}
                    e * rho.get(a * d + i, b * d + j)
                })
                .sum::<Complex64>()
        });
        let y = phi.adjoint() * x * &phi;
        let yt = DenseOperator::new(y.transpose())?;
        for (o, c) in pauli_coefficients(&yt).into_iter().enumerate() {
            row[o] = c.re * d as f64;
        }
    }
    let pos = ens.positives();
    let sum: f64 = pos
        .iter()
        .map(|p| {
            let idx = p.string.index();
            let v = values[idx / (d * d)][idx % (d * d)];
            v * v
        })
        .sum();
    Ok(sum / pos.len() as f64 / (den * den))
}

/// Haar-random pure state.
pub fn random_pure_state<R: Rng + ?Sized>(qubits: usize, rng: &mut R) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..1usize << qubits)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Random mixed state `GG†/tr[GG†]` for a Ginibre `G` of the given rank.
pub fn random_density<R: Rng + ?Sized>(qubits: usize, rank: usize, rng: &mut R) -> Result<DensityMatrix> {
    let d = 1usize << qubits;
    let g = DMatrix::from_fn(d, rank.max(1), |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let m = &g * g.adjoint();
    let tr = m.trace();
    DensityMatrix::new(DenseOperator::new(m / tr)?)
}

/// Random probe with `aux` ancilla qubits.
pub fn random_probe<R: Rng + ?Sized>(n: usize, aux: usize, rng: &mut R) -> Result<DeltaProbe> {
    let phi = random_pure_state(aux + n, rng);
    let rank = rng.random_range(1..=1usize << (aux + n));
    Ok(DeltaProbe {
        aux,
        phi,
        rho: random_density(aux + n, rank, rng)?,
    })
}

/// Choi state `(I + 3εP)/4ⁿ` of an ensemble member.
pub fn ensemble_choi(member: &SignedPauli, epsilon: f64) -> Result<ChoiState> {
    check_epsilon(epsilon)?;
    let q = 1u64 << member.string.len();
    let m = DenseOperator::identity(member.string.len())?
        .add(&member.dense()?.scale(Complex64::new(3.0 * epsilon, 0.0)))?
        .scale(Complex64::new(1.0 / q as f64, 0.0));
    ChoiState::new(m)
}

pub fn ensemble_channel(member: &SignedPauli, epsilon: f64) -> Result<ChannelRep> {
    Ok(ChannelRep::Choi(ensemble_choi(member, epsilon)?))
}

fn binary_entropy(p: f64) -> f64 {
    [p, 1.0 - p]
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum()
}

/// `2n − 1 + H₂((1+3ε)/2)` bits.
pub fn ensemble_entropy(n: usize, epsilon: f64) -> Result<f64> {
    if !(0.0..=1.0 / 3.0).contains(&epsilon) {
        return Err(Error::InvalidArgument(format!(
            "epsilon {epsilon} outside [0, 1/3]"
        )));
    }
    let p = ((1.0 + 3.0 * epsilon) / 2.0).min(1.0);
    Ok(2.0 * n as f64 - 1.0 + binary_entropy(p))
}

/// `T·(2n − S)`.
pub fn mutual_info_floor(n: usize, epsilon: f64, copies: u64) -> Result<f64> {
    let s = ensemble_entropy(n, epsilon)?;
    Ok(copies as f64 * (2.0 * n as f64 - s).max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Pairs of copies measured jointly in the Bell basis.
    BellMemory,
    /// Each copy measured alone in a uniformly random product Pauli basis.
    SingleCopyRandomPauli,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::BellMemory => "bell_memory",
            Strategy::SingleCopyRandomPauli => "single_copy_random_pauli",
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bell_memory" => Ok(Strategy::BellMemory),
            "single_copy_random_pauli" => Ok(Strategy::SingleCopyRandomPauli),
            _ => Err(Error::Parse(format!("unknown strategy {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameResult {
    pub strategy: Strategy,
    pub n: usize,
    pub epsilon: f64,
    /// Copies consumed per trial.
    #[serde(rename = "T")]
    pub copies: u64,
    pub trials: usize,
    pub successes: usize,
    pub success: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub seed: u64,
    pub threshold: f64,
}

/// 95% Wilson score interval.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.96f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let center = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Hypotheses and candidate strings shared by every trial of a game.
struct Game {
    n: usize,
    epsilon: f64,
    ensemble: HardEnsemble,
    candidates: Vec<PauliString>,
}

impl Game {
    fn new(n: usize, epsilon: f64) -> Result<Self> {
        let ensemble = HardEnsemble::new(n, EnsembleVariant::General, epsilon)?;
        let candidates = ensemble.positives().iter().map(|p| p.string.clone()).collect();
        Ok(Self {
            n,
            epsilon,
            ensemble,
            candidates,
        })
    }

    /// Draws the hypothesis and returns `(is_ensemble, statistic)`.
    fn trial(&self, copies: u64, strategy: Strategy, stream: &RngStream) -> Result<(bool, f64)> {
        let mut hyp = stream.derive_label("hypothesis").rng();
        let is_ensemble: bool = hyp.random();
        let state = if is_ensemble {
            let member = &self.ensemble.members[hyp.random_range(0..self.ensemble.len())];
            DensityMatrix::new(ensemble_choi(member, self.epsilon)?.into_matrix())?
        } else {
            DensityMatrix::maximally_mixed(2 * self.n)?
        };
        let oracle = ChoiOracle::new(state)?;
        let meas = stream.derive_label(strategy.name());
        let stat = match strategy {
            Strategy::BellMemory => self.bell_statistic(&oracle, copies / 2, &meas)?,
            Strategy::SingleCopyRandomPauli => self.pauli_statistic(&oracle, copies, &meas)?,
        };
        Ok((is_ensemble, stat))
    }

    /// Largest estimated `tr[Qρ]²` over candidate strings.
    fn bell_statistic(&self, oracle: &ChoiOracle, rounds: u64, rng: &RngStream) -> Result<f64> {
        if rounds == 0 {
            return Ok(0.0);
        }
        let hist = oracle.bell_histogram(rounds, rng)?;
        let mut v: Vec<f64> = hist.into_iter().map(|c| c as f64).collect();
        bell_character_sums(&mut v, 2 * self.n);
        Ok(self
            .candidates
            .iter()
            .map(|q| v[q.index()] / rounds as f64)
            .fold(f64::NEG_INFINITY, f64::max))
    }

    /// Largest `|mean_Q|·√count_Q` over candidates, using copies whose basis covers `Q`.
    fn pauli_statistic(&self, oracle: &ChoiOracle, copies: u64, rng: &RngStream) -> Result<f64> {
        let m = 2 * self.n;
        let mut sums = vec![0i64; self.candidates.len()];
        let mut counts = vec![0u64; self.candidates.len()];
        let mut pick = rng.derive_label("basis").rng();
        for c in 0..copies {
            let basis: Vec<u8> = (0..m).map(|_| pick.random_range(1..=3u8)).collect();
            let bits = oracle.measure_pauli_basis(&basis, &rng.derive(c))?;
            for (i, q) in self.candidates.iter().enumerate() {
                let mut sign = 1i64;
                let covered = q.symbols().iter().enumerate().all(|(k, &s)| {
                    if s == 0 {
                        return true;
                    }
                    if (bits >> (m - 1 - k)) & 1 == 1 {
                        sign = -sign;
                    }
                    s == basis[k]
                });
                if covered {
                    sums[i] += sign;
                    counts[i] += 1;
                }
            }
        }
        Ok(sums
            .iter()
            .zip(&counts)
            .filter(|(_, &c)| c > 0)
            .map(|(&s, &c)| (s as f64).abs() / (c as f64).sqrt())
            .fold(0.0, f64::max))
    }

    fn run(&self, copies: u64, strategy: Strategy, trials: usize, rng: &RngStream) -> Result<Vec<(bool, f64)>> {
        (0..trials)
            .into_par_iter()
            .map(|i| self.trial(copies, strategy, &rng.derive(i as u64)))
            .collect()
    }
}

/// Threshold maximizing accuracy of "ensemble iff statistic > threshold"; ties go to the lowest.
pub fn best_threshold(samples: &[(bool, f64)]) -> f64 {
    let mut sorted: Vec<(bool, f64)> = samples.to_vec();
    sorted.sort_by(|a, b| a.1.total_cmp(&b.1));
    // start with everything declared "ensemble"
    let mut correct = sorted.iter().filter(|s| s.0).count() as i64;
    let mut best = (correct, f64::NEG_INFINITY);
    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i].1;
        while i < sorted.len() && sorted[i].1 == v {
            correct += if sorted[i].0 { -1 } else { 1 };
            i += 1;
        }
        let thr = if i < sorted.len() {
            (v + sorted[i].1) / 2.0
        } else {
            v
        };
        if correct > best.0 {
            best = (correct, thr);
        }
    }
    best.1
}

fn accuracy(samples: &[(bool, f64)], threshold: f64) -> usize {
    samples.iter().filter(|(e, s)| (*s > threshold) == *e).count()
}

/// Plays `trials` rounds of maximally-mixed-versus-ensemble with `copies` Choi copies each.
///
/// The decision threshold comes from a pilot of the same size on an independent stream.
/// Trial `i` draws its hypothesis from the same coordinate for every strategy, so runs of
/// different strategies under one seed are paired. Bell rounds use `⌊copies/2⌋` pairs.
pub fn distinguishing_game(
    n: usize,
    epsilon: f64,
    copies: u64,
    trials: usize,
    strategy: Strategy,
    rng: &RngStream,
) -> Result<GameResult> {
    let game = Game::new(n, epsilon)?;
    let pilot = game.run(copies, strategy, trials, &rng.derive_label("pilot"))?;
    let threshold = best_threshold(&pilot);
    let eval = game.run(copies, strategy, trials, &rng.derive_label("eval"))?;
    let successes = accuracy(&eval, threshold);
    let (wilson_lo, wilson_hi) = wilson_interval(successes, trials);
    let used = match strategy {
        Strategy::BellMemory => copies / 2 * 2,
        Strategy::SingleCopyRandomPauli => copies,
    };
    Ok(GameResult {
        strategy,
        n,
        epsilon,
        copies: used,
        trials,
        successes,
        success: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
        wilson_lo,
        wilson_hi,
        seed: rng.seed(),
        threshold,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetCalibration {
    pub strategy: Strategy,
    pub copies: u64,
    pub pilot_success: f64,
    pub grid: Vec<(u64, f64)>,
}

/// Smallest `T` on the doubling grid `2, 4, …, max_copies` whose pilot success reaches `target`.
///
/// Each grid point fits a threshold on one pilot and scores it on a second; both streams
/// are derived from `rng` and never reused for evaluation.
pub fn calibrate_budget(
    n: usize,
    epsilon: f64,
    strategy: Strategy,
    target: f64,
    pilot_trials: usize,
    max_copies: u64,
    rng: &RngStream,
) -> Result<BudgetCalibration> {
    let game = Game::new(n, epsilon)?;
    let mut grid = Vec::new();
    let mut t = 2u64;
    while t <= max_copies {
        let fit = game.run(t, strategy, pilot_trials, &rng.derive_label("fit").derive(t))?;
        let thr = best_threshold(&fit);
        let check = game.run(t, strategy, pilot_trials, &rng.derive_label("check").derive(t))?;
        let rate = accuracy(&check, thr) as f64 / pilot_trials.max(1) as f64;
        grid.push((t, rate));
        if rate >= target {
            return Ok(BudgetCalibration {
                strategy,
                copies: t,
                pilot_success: rate,
                grid,
            });
        }
        t *= 2;
    }
    Err(Error::Budget(format!(
        "{strategy} never reached success {target} up to T = {max_copies}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::validate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn ensemble_sizes() {
        for n in 1..=2 {
            for v in [EnsembleVariant::General, EnsembleVariant::DoublyStochastic] {
                let e = HardEnsemble::new(n, v, 0.1).unwrap();
                assert_eq!(e.len(), HardEnsemble::expected_len(n, v));
            }
        }
        assert_eq!(HardEnsemble::expected_len(1, EnsembleVariant::General), 24);
        assert_eq!(HardEnsemble::expected_len(1, EnsembleVariant::DoublyStochastic), 18);
    }

    #[test]
    fn delta_examples() {
        let g = HardEnsemble::new(1, EnsembleVariant::General, 0.1).unwrap();
        let d = HardEnsemble::new(1, EnsembleVariant::DoublyStochastic, 0.1).unwrap();
        let omega = maximally_entangled(1);
        assert!((delta_functional(&g, &omega).unwrap() - 0.25).abs() < 1e-12);
        assert!((delta_functional(&d, &omega).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        let zero = [c(1.0), c(0.0), c(0.0), c(0.0)];
        assert!((delta_functional(&g, &zero).unwrap() - 1.0 / 6.0).abs() < 1e-12);
        assert!((delta_functional_dense(&g, &zero).unwrap() - 1.0 / 6.0).abs() < 1e-12);
        assert!(delta_functional(&g, &[c(1.0), c(1.0), c(0.0), c(0.0)]).is_err());
        assert_eq!(delta_closed_form(2, EnsembleVariant::DoublyStochastic), 1.0 / 15.0);
    }

    #[test]
    fn big_delta_product_values() {
        let zero = [c(1.0), c(0.0)];
        let d = HardEnsemble::new(1, EnsembleVariant::DoublyStochastic, 0.1).unwrap();
        let g = HardEnsemble::new(1, EnsembleVariant::General, 0.1).unwrap();
        for aux in 0..=2 {
            let p = product_probe(1, aux, &zero).unwrap();
            assert!((big_delta_functional(&d, &p).unwrap() - 1.0 / 9.0).abs() < 1e-12);
            // attains the bound (2ⁿ−1)/(2ⁿ(4ⁿ−1)) derived for this ensemble
            assert!((big_delta_functional(&g, &p).unwrap() - 1.0 / 6.0).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_probe_rejected() {
        let g = HardEnsemble::new(1, EnsembleVariant::General, 0.1).unwrap();
        let mut p = product_probe(1, 1, &[c(1.0), c(0.0)]).unwrap();
        // ρ_aux = |1⟩⟨1| while φ lives on aux |0⟩
        p.rho = DensityMatrix::pure(&[c(0.0), c(0.0), c(1.0), c(0.0)]).unwrap();
        assert!(big_delta_functional(&g, &p).is_err());
    }

    #[test]
    fn members_are_valid_channels() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = HardEnsemble::new(1, EnsembleVariant::DoublyStochastic, 0.3).unwrap();
        for m in &d.members {
            let r = validate(&ensemble_channel(m, 0.3).unwrap()).unwrap();
            assert!(r.cp && r.tp && r.unital && r.ptm_sparsity <= 2);
        }
        let g = HardEnsemble::new(2, EnsembleVariant::General, 0.3).unwrap();
        for _ in 0..20 {
            let m = &g.members[rng.random_range(0..g.len())];
            let r = validate(&ensemble_channel(m, 0.3).unwrap()).unwrap();
            assert!(r.cp && r.tp);
        }
        assert!(ensemble_choi(&g.members[0], 1.0 / 3.0).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(ensemble_entropy(2, 0.0).unwrap(), 4.0);
        assert!((ensemble_entropy(1, 1.0 / 3.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((ensemble_entropy(1, 0.1).unwrap() - 1.934068).abs() < 1e-6);
        assert!((mutual_info_floor(1, 0.1, 100).unwrap() - 6.5932).abs() < 1e-3);
        assert_eq!(mutual_info_floor(3, 0.0, 1000).unwrap(), 0.0);
        assert!(ensemble_entropy(1, 0.34).is_err());
    }

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson_interval(100, 200);
        assert!(lo < 0.5 && hi > 0.5 && (lo + hi - 1.0).abs() < 1e-12);
        assert_eq!(wilson_interval(0, 0), (0.0, 1.0));
    }

    #[test]
    fn threshold_separates_clean_samples() {
        let s = [(false, 0.1), (false, 0.2), (true, 0.5), (true, 0.7)];
        let t = best_threshold(&s);
        assert!(t > 0.2 && t < 0.5);
        assert_eq!(accuracy(&s, t), 4);
    }

    #[test]
    fn game_is_deterministic() {
        let s = RngStream::new(11);
        let a = distinguishing_game(1, 0.25, 16, 20, Strategy::BellMemory, &s).unwrap();
        let b = distinguishing_game(1, 0.25, 16, 20, Strategy::BellMemory, &s).unwrap();
        assert_eq!(a, b);
        let odd = distinguishing_game(1, 0.25, 7, 4, Strategy::BellMemory, &s).unwrap();
        assert_eq!(odd.copies, 6);
    }
}

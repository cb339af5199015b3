//! The Polychronakos chain: Calogero equilibrium positions, exchange
//! operators, the Hamiltonian `H_P = sum_{j<k} h_jk P_jk` and the operators
//! `L_0`, `L_1` and `Q_0` that it rotates into one another.
//!
//! Spin convention: `sigma^z|0> = +|0>`. The energy bookkeeping of
//! [`spectrum_l0`] adds `x_j` for every qubit in `|1>`, so
//! `build_l0(Axis::Z, g)` is `-diag(energies)` for that spectrum.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{c64, CMatrix, DEGENERACY_TOL};
use crate::pauli::{Axis, BasisLabel, PauliString};

/// Largest supported register.
pub const MAX_QUBITS: usize = 12;

/// Qubit count and equilibrium positions `x_1 < ... < x_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainGeometry {
    positions: Vec<f64>,
}

impl ChainGeometry {
    /// Positions at the roots of the physicists' Hermite polynomial `H_N`.
    pub fn calogero(n_qubits: usize) -> Result<Self> {
        calogero_positions(n_qubits)
    }

    pub fn n_qubits(&self) -> usize {
        self.positions.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    /// Position of a 1-based site.
    pub fn position(&self, site: usize) -> f64 {
        self.positions[site - 1]
    }

    /// `w_jk = 1 / (x_j - x_k)`.
    pub fn inverse_distance(&self, j: usize, k: usize) -> f64 {
        1.0 / (self.position(j) - self.position(k))
    }

    /// Exchange coupling `h_jk = 1 / (x_j - x_k)^2`.
    pub fn coupling(&self, j: usize, k: usize) -> f64 {
        self.inverse_distance(j, k).powi(2)
    }

    /// `|H_N(x_j)|` for each position.
    pub fn hermite_residuals(&self) -> Vec<f64> {
        let n = self.n_qubits();
        self.positions.iter().map(|&x| hermite(n, x).abs()).collect()
    }

    fn check_pair(&self, j: usize, k: usize) -> Result<()> {
        let n = self.n_qubits();
        if j == 0 || k > n || j >= k {
            return Err(Error::Index(format!("need 1 <= j < k <= {n}, got ({j}, {k})")));
        }
        Ok(())
    }
}

/// Physicists' Hermite polynomial `H_n(x)` by the three-term recurrence.
pub fn hermite(n: usize, x: f64) -> f64 {
    hermite_pair(n, x).0
}

/// `(H_n(x), H_{n-1}(x))`, with `H_{-1} = 0`.
fn hermite_pair(n: usize, x: f64) -> (f64, f64) {
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 0..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// Roots of `H_N`, ascending and exactly symmetric about zero.
///
/// The roots are the eigenvalues of the Jacobi matrix with off-diagonal
/// entries `sqrt(k/2)`; each is then polished by Newton steps using
/// `H_N' = 2N H_{N-1}`.
pub fn calogero_positions(n_qubits: usize) -> Result<ChainGeometry> {
    if !(1..=MAX_QUBITS).contains(&n_qubits) {
        return Err(Error::Domain(format!(
            "qubit count must lie in 1..={MAX_QUBITS}, got {n_qubits}"
        )));
    }
    let n = n_qubits;
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let off = (k as f64 / 2.0).sqrt();
        jacobi[(k - 1, k)] = off;
        jacobi[(k, k - 1)] = off;
    }
    let mut roots: Vec<f64> = jacobi.symmetric_eigenvalues().iter().copied().collect();
    for x in roots.iter_mut() {
        for _ in 0..4 {
            let (h, h_prev) = hermite_pair(n, *x);
            let slope = 2.0 * n as f64 * h_prev;
            if slope == 0.0 {
                break;
            }
            let step = h / slope;
            *x -= step;
            if step.abs() < 1e-15 * x.abs().max(1.0) {
                break;
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    for j in 0..n / 2 {
        let mirrored = 0.5 * (roots[n - 1 - j] - roots[j]);
        roots[j] = -mirrored;
        roots[n - 1 - j] = mirrored;
    }
    if n % 2 == 1 {
        roots[n / 2] = 0.0;
    }
    Ok(ChainGeometry { positions: roots })
}

fn swap_bits(index: usize, a: usize, b: usize) -> usize {
    if ((index >> a) ^ (index >> b)) & 1 == 1 {
        index ^ ((1 << a) | (1 << b))
    } else {
        index
    }
}

/// Adds `scale * P_jk` into `target`, with `P_jk` the SWAP of sites `j`, `k`.
fn add_permutation(target: &mut CMatrix, n: usize, j: usize, k: usize, scale: f64) {
    let (a, b) = (n - j, n - k);
    for col in 0..(1usize << n) {
        target[(swap_bits(col, a, b), col)] += c64(scale, 0.0);
    }
}

/// Exchange operator `P_jk = (1 + sigma_j . sigma_k) / 2`, built directly as
/// the swap of two bits.
pub fn permutation_op(j: usize, k: usize, geom: &ChainGeometry) -> Result<CMatrix> {
    geom.check_pair(j, k)?;
    let mut p = CMatrix::zeros(geom.dim(), geom.dim());
    add_permutation(&mut p, geom.n_qubits(), j, k, 1.0);
    Ok(p)
}

pub fn build_hp(geom: &ChainGeometry) -> CMatrix {
    let n = geom.n_qubits();
    let mut h = CMatrix::zeros(geom.dim(), geom.dim());
    for j in 1..=n {
        for k in j + 1..=n {
            add_permutation(&mut h, n, j, k, geom.coupling(j, k));
        }
    }
    h
}

fn single(n: usize, site: usize, axis: Axis) -> PauliString {
    PauliString::single(n, site, axis).expect("site in range by construction")
}

/// `L_0^a = 1/2 sum_j x_j sigma_j^a`.
pub fn build_l0(axis: Axis, geom: &ChainGeometry) -> CMatrix {
    let n = geom.n_qubits();
    let mut l = CMatrix::zeros(geom.dim(), geom.dim());
    for site in 1..=n {
        single(n, site, axis).add_to(&mut l, c64(0.5 * geom.position(site), 0.0));
    }
    l
}

/// `L_1^a = 1/4 sum_{j != k} w_jk eps^{abc} sigma_j^b sigma_k^c`.
pub fn build_l1(axis: Axis, geom: &ChainGeometry) -> CMatrix {
    let n = geom.n_qubits();
    let mut l = CMatrix::zeros(geom.dim(), geom.dim());
    for j in 1..=n {
        for k in 1..=n {
            if j == k {
                continue;
            }
            let w = geom.inverse_distance(j, k);
            for b in Axis::ALL {
                for c in Axis::ALL {
                    let eps = Axis::epsilon(axis, b, c);
                    if eps == 0.0 {
                        continue;
                    }
                    let term = PauliString::new(n, [(j, b), (k, c)])
                        .expect("distinct sites by construction");
                    term.add_to(&mut l, c64(0.25 * w * eps, 0.0));
                }
            }
        }
    }
    l
}

/// Total spin `Q_0^a = 1/2 sum_j sigma_j^a`.
pub fn build_q0(axis: Axis, n_qubits: usize) -> Result<CMatrix> {
    if !(1..=MAX_QUBITS).contains(&n_qubits) {
        return Err(Error::Domain(format!(
            "qubit count must lie in 1..={MAX_QUBITS}, got {n_qubits}"
        )));
    }
    let dim = 1 << n_qubits;
    let mut q = CMatrix::zeros(dim, dim);
    for site in 1..=n_qubits {
        single(n_qubits, site, axis).add_to(&mut q, c64(0.5, 0.0));
    }
    Ok(q)
}

/// One computational basis state in the `L_0^z` spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEntry {
    pub label: BasisLabel,
    /// Sum of the positions of the excited sites.
    pub energy: f64,
    pub excitations: usize,
    /// Number of states sharing this excitation number and energy.
    pub degeneracy: usize,
}

/// Energies of all basis states, in basis-index order.
pub fn spectrum_l0(geom: &ChainGeometry) -> Vec<SpectrumEntry> {
    let n = geom.n_qubits();
    let mut entries: Vec<SpectrumEntry> = (0..geom.dim())
        .map(|index| {
            let label = BasisLabel::from_index(index, n);
            let energy = label.excited_set().iter().map(|&s| geom.position(s)).sum();
            let excitations = label.excitations();
            SpectrumEntry {
                label,
                energy,
                excitations,
                degeneracy: 0,
            }
        })
        .collect();

    // Group by (excitations, energy) after sorting; energies of one level can
    // differ by rounding, so compare neighbours with the clustering tolerance.
    let mut order: Vec<usize> = (0..entries.len()).collect();
    order.sort_by(|&a, &b| {
        entries[a]
            .excitations
            .cmp(&entries[b].excitations)
            .then(entries[a].energy.total_cmp(&entries[b].energy))
    });
    let mut start = 0;
    for i in 1..=order.len() {
        let split = i == order.len() || {
            let (p, q) = (&entries[order[i - 1]], &entries[order[i]]);
            p.excitations != q.excitations || (q.energy - p.energy).abs() >= DEGENERACY_TOL
        };
        if split {
            let count = i - start;
            for &idx in &order[start..i] {
                entries[idx].degeneracy = count;
            }
            start = i;
        }
    }
    entries
}

/// Extremal pair of a spectrum and the uniqueness of its gap.
#[derive(Debug, Clone, PartialEq)]
pub struct UniqueGap {
    /// Highest-energy state.
    pub t1: BasisLabel,
    /// Lowest-energy state.
    pub t2: BasisLabel,
    pub gap: f64,
    /// No other ordered pair has the same energy difference.
    pub unique: bool,
}

pub fn find_unique_gap(spectrum: &[SpectrumEntry]) -> Result<UniqueGap> {
    if spectrum.is_empty() {
        return Err(Error::Domain("empty spectrum".into()));
    }
    let pick = |better: fn(f64, f64) -> bool| -> Result<usize> {
        let mut best = 0;
        for (i, e) in spectrum.iter().enumerate() {
            if better(e.energy, spectrum[best].energy) {
                best = i;
            }
        }
        let ties = spectrum
            .iter()
            .filter(|e| (e.energy - spectrum[best].energy).abs() < DEGENERACY_TOL)
            .count();
        if ties > 1 {
            return Err(Error::DegenerateExtremum);
        }
        Ok(best)
    };
    let hi = pick(|a, b| a > b)?;
    let lo = pick(|a, b| a < b)?;
    let gap = spectrum[hi].energy - spectrum[lo].energy;

    let mut unique = true;
    'outer: for (a, ea) in spectrum.iter().enumerate() {
        for (b, eb) in spectrum.iter().enumerate() {
            if a == b || (a == hi && b == lo) {
                continue;
            }
            if (ea.energy - eb.energy - gap).abs() < DEGENERACY_TOL {
                unique = false;
                break 'outer;
            }
        }
    }
    Ok(UniqueGap {
        t1: spectrum[hi].label.clone(),
        t2: spectrum[lo].label.clone(),
        gap,
        unique,
    })
}

//! Eigengates: unitaries `exp(-i H angle)` that carry the eigenbasis of an
//! operator `A` onto that of `B` when `[H, A] = iB` and `[H, B] = -iA`.
//!
//! Under that condition the Heisenberg rotation closes on the pair,
//! `exp(-iHt) A exp(iHt) = cos(t) A + sin(t) B`, so a quarter turn maps `A`
//! to `B` and a half turn inverts the spectrum of `A`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::linalg::{c64, commutator, eig_hermitian, max_abs, validate, CMatrix, C64};
use crate::model::{build_hp, build_l0, build_l1, ChainGeometry};
use crate::pauli::{Axis, BasisLabel};

/// Commutator tolerance for an admissible triple.
pub const ADMISSIBILITY_TOL: f64 = 1e-9;

/// Step count of the adiabatic ramp when callers have no preference.
pub const DEFAULT_ADIABATIC_STEPS: usize = 2000;

/// Overlap threshold for a mirrored single excitation.
const MIRROR_TOL: f64 = 1e-8;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Admissible triple `(H, A, B)` with a rotation angle.
#[derive(Debug, Clone)]
pub struct EigengateSpec {
    generator: CMatrix,
    source: CMatrix,
    target: CMatrix,
    angle: f64,
}

/// `max(|[H,A] - iB|, |[H,B] + iA|)`, entrywise.
pub fn admissibility_defect(generator: &CMatrix, source: &CMatrix, target: &CMatrix) -> f64 {
    let first = commutator(generator, source) - target * I;
    let second = commutator(generator, target) + source * I;
    max_abs(&first).max(max_abs(&second))
}

impl EigengateSpec {
    /// Checks the commutator condition; the angle defaults to `pi/2`.
    pub fn new(generator: CMatrix, source: CMatrix, target: CMatrix) -> Result<Self> {
        for m in [&generator, &source, &target] {
            validate(m)?;
            if m.nrows() != generator.nrows() {
                return Err(Error::DimensionMismatch {
                    expected: generator.nrows(),
                    found: m.nrows(),
                });
            }
        }
        let defect = admissibility_defect(&generator, &source, &target);
        if !(defect <= ADMISSIBILITY_TOL) {
            return Err(Error::Admissibility { defect });
        }
        Ok(EigengateSpec {
            generator,
            source,
            target,
            angle: FRAC_PI_2,
        })
    }

    /// `(L_0^a, L_1^a, H_P)` for a chain.
    pub fn polychronakos(geom: &ChainGeometry, axis: Axis) -> Result<Self> {
        Self::new(build_hp(geom), build_l0(axis, geom), build_l1(axis, geom))
    }

    pub fn with_angle(mut self, angle: f64) -> Self {
        self.angle = angle;
        self
    }

    pub fn generator(&self) -> &CMatrix {
        &self.generator
    }

    pub fn source(&self) -> &CMatrix {
        &self.source
    }

    pub fn target(&self) -> &CMatrix {
        &self.target
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }
}

/// `U_eg = exp(-i H angle)`.
pub fn quench_eigengate(spec: &EigengateSpec) -> Result<CMatrix> {
    Ok(eig_hermitian(&spec.generator)?.propagator(spec.angle))
}

/// `exp(-iHt) A exp(iHt)`.
pub fn rotate_heisenberg(spec: &EigengateSpec, t: f64) -> Result<CMatrix> {
    let u = eig_hermitian(&spec.generator)?.propagator(t);
    Ok(&u * &spec.source * u.adjoint())
}

/// Time-ordered evolution under `s (cos(t) A + sin(t) B)` for
/// `t in [0, pi/2]`, with midpoint exponentials on a uniform grid.
///
/// A large `energy_scale` makes the ramp slow compared with the spectral
/// gaps, so eigenvectors of `A` follow onto eigenvectors of `B`.
pub fn adiabatic_eigengate(spec: &EigengateSpec, energy_scale: f64, n_steps: usize) -> Result<CMatrix> {
    if !(energy_scale > 0.0 && energy_scale.is_finite()) {
        return Err(Error::Domain(format!("energy scale must be positive, got {energy_scale}")));
    }
    if n_steps < 10 {
        return Err(Error::Domain(format!("need at least 10 ramp steps, got {n_steps}")));
    }
    let dt = FRAC_PI_2 / n_steps as f64;
    let dim = spec.source.nrows();
    let mut u = CMatrix::identity(dim, dim);
    for step in 0..n_steps {
        let t = (step as f64 + 0.5) * dt;
        let h = (&spec.source * c64(t.cos(), 0.0) + &spec.target * c64(t.sin(), 0.0))
            .scale(energy_scale);
        u = eig_hermitian(&h)?.propagator(dt) * u;
    }
    Ok(u)
}

/// `|<{N+1-k}| U_eg^2 |{k}>|` for every single-excitation site `k`, with
/// `U_eg = exp(-i H_P pi/2)`.
pub fn mirror_transfer_overlaps(geom: &ChainGeometry) -> Result<Vec<f64>> {
    let n = geom.n_qubits();
    let flip = eig_hermitian(&build_hp(geom))?.propagator(2.0 * FRAC_PI_2);
    (1..=n)
        .map(|k| {
            let from = BasisLabel::from_excited(n, &[k])?.index();
            let to = BasisLabel::from_excited(n, &[n + 1 - k])?.index();
            Ok(flip[(to, from)].norm())
        })
        .collect()
}

/// Whether the squared eigengate mirrors every single excitation, up to a
/// phase, with overlap above `1 - 1e-8`.
pub fn mirror_transfer_check(geom: &ChainGeometry) -> Result<bool> {
    Ok(mirror_transfer_overlaps(geom)?
        .iter()
        .all(|&o| o > 1.0 - MIRROR_TOL))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, unitarity_defect};
    use crate::model::calogero_positions;
    use crate::pauli::PauliString;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn pauli(axis: Axis) -> CMatrix {
        PauliString::single(1, 1, axis).unwrap().to_matrix()
    }

    fn qubit_spec() -> EigengateSpec {
        EigengateSpec::new(pauli(Axis::Z).scale(0.5), pauli(Axis::X), pauli(Axis::Y)).unwrap()
    }

    #[test]
    fn single_qubit_quarter_turn() {
        let spec = qubit_spec();
        let u = quench_eigengate(&spec).unwrap();
        let mapped = &u * spec.source() * u.adjoint();
        assert!(max_abs_diff(&mapped, spec.target()) < 1e-12);
    }

    #[test]
    fn unnormalised_triple_rejected() {
        let err = EigengateSpec::new(pauli(Axis::Z), pauli(Axis::X), pauli(Axis::Y)).unwrap_err();
        assert!(matches!(err, Error::Admissibility { .. }));
        let same = EigengateSpec::new(pauli(Axis::Z).scale(0.5), pauli(Axis::X), pauli(Axis::X));
        assert!(matches!(same, Err(Error::Admissibility { .. })));
    }

    #[test]
    fn zero_angle_is_identity() {
        let spec = qubit_spec().with_angle(0.0);
        let u = quench_eigengate(&spec).unwrap();
        assert!(max_abs_diff(&u, &CMatrix::identity(2, 2)) < 1e-15);
    }

    #[test]
    fn chain_eigengate_maps_l0_to_l1() {
        let g = calogero_positions(4).unwrap();
        let spec = EigengateSpec::polychronakos(&g, Axis::Z).unwrap();
        let u = quench_eigengate(&spec).unwrap();
        assert!(unitarity_defect(&u) < 1e-12);
        let mapped = &u * spec.source() * u.adjoint();
        assert!(max_abs_diff(&mapped, spec.target()) < 1e-9);
    }

    #[test]
    fn heisenberg_rotation_closed_form() {
        let g = calogero_positions(4).unwrap();
        let spec = EigengateSpec::polychronakos(&g, Axis::Z).unwrap();
        let (a, b) = (spec.source(), spec.target());
        for t in [0.3, FRAC_PI_4, 1.9, PI, 2.0 * PI] {
            let want = a * c64(t.cos(), 0.0) + b * c64(t.sin(), 0.0);
            assert!(max_abs_diff(&rotate_heisenberg(&spec, t).unwrap(), &want) < 1e-9, "t={t}");
        }
        let half = rotate_heisenberg(&spec, PI).unwrap();
        assert!(max_abs_diff(&half, &(-a.clone())) < 1e-9);
        let shifted = rotate_heisenberg(&spec, 0.7 + 2.0 * PI).unwrap();
        assert!(max_abs_diff(&shifted, &rotate_heisenberg(&spec, 0.7).unwrap()) < 1e-9);
    }

    #[test]
    fn eigenstates_map_with_same_eigenvalue() {
        let g = calogero_positions(4).unwrap();
        let spec = EigengateSpec::polychronakos(&g, Axis::Z).unwrap();
        let u = quench_eigengate(&spec).unwrap();
        let eig_a = eig_hermitian(spec.source()).unwrap();
        let eig_mapped = eig_hermitian(&(&u * spec.source() * u.adjoint())).unwrap();
        for (x, y) in eig_a.values.iter().zip(&eig_mapped.values) {
            assert!((x - y).abs() < 1e-9);
        }
        for range in eig_a.clusters().into_iter().filter(|r| r.len() == 1) {
            let j = range.start;
            let v = &u * eig_a.vectors.column(j);
            let residual = spec.target() * &v - &v * c64(eig_a.values[j], 0.0);
            assert!(residual.norm() < 1e-8);
        }
    }

    fn adiabatic_infidelity(scale: f64) -> f64 {
        let g = calogero_positions(4).unwrap();
        let spec = EigengateSpec::polychronakos(&g, Axis::Z).unwrap();
        let quench = quench_eigengate(&spec).unwrap();
        let ramp = adiabatic_eigengate(&spec, scale, DEFAULT_ADIABATIC_STEPS).unwrap();
        let eig_a = eig_hermitian(spec.source()).unwrap();
        eig_a
            .clusters()
            .into_iter()
            .filter(|r| r.len() == 1)
            .map(|r| {
                let v = eig_a.vectors.column(r.start);
                let want = &quench * v;
                let got = &ramp * v;
                1.0 - want.dotc(&got).norm()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn adiabatic_ramp_follows_quench() {
        assert!(adiabatic_infidelity(50.0) < 0.01);
        let sweep: Vec<f64> = [10.0, 20.0, 40.0, 80.0].iter().map(|&s| adiabatic_infidelity(s)).collect();
        for w in sweep.windows(2) {
            assert!(w[1] < w[0], "{sweep:?}");
        }
    }

    #[test]
    fn adiabatic_input_checks() {
        let spec = qubit_spec();
        assert!(matches!(adiabatic_eigengate(&spec, 0.0, 100), Err(Error::Domain(_))));
        assert!(matches!(adiabatic_eigengate(&spec, 1.0, 5), Err(Error::Domain(_))));
    }

    #[test]
    fn squared_eigengate_mirrors_excitations() {
        for n in [2, 4, 6] {
            let g = calogero_positions(n).unwrap();
            assert!(mirror_transfer_check(&g).unwrap(), "n={n}");
        }
        let g = calogero_positions(4).unwrap();
        assert!(mirror_transfer_overlaps(&g).unwrap()[0] > 1.0 - 1e-8);
    }

    #[test]
    fn total_spin_rotates_axes() {
        // Q_0^z generates the x -> y rotation of L_0.
        let g = calogero_positions(4).unwrap();
        let qz = crate::model::build_q0(Axis::Z, 4).unwrap();
        let spec = EigengateSpec::new(qz, build_l0(Axis::X, &g), build_l0(Axis::Y, &g)).unwrap();
        let u = quench_eigengate(&spec).unwrap();
        assert!(max_abs_diff(&(&u * spec.source() * u.adjoint()), spec.target()) < 1e-9);
    }
}

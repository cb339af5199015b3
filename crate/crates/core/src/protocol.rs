//! The resonantly driven iSWAP: eigengate into the `L_1^z` eigenbasis, a
//! calibrated cosine drive on the transition `t1 <-> t2`, and the eigengate
//! back out.
//!
//! Two ways of disposing of the background phase are provided. The halfway
//! mode splits the drive in two and flips the spectrum in between with
//! `F = U_eg^2`, so the total is `U_eg^dag F D_2 F D_1 U_eg`. The phase-undo
//! mode runs one pulse and removes `exp(-i L_1^z t_d)` explicitly.

use std::fmt;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::driving::{calibrate_amplitude, propagate_driven, second_half_phase, wrap_phase, DriveConfig, Integrator};
use crate::error::{Error, Result};
use crate::linalg::{c64, eig_hermitian, overlap_phase, unitarity_defect, validate, CMatrix, C64};
use crate::model::{build_hp, build_l1, find_unique_gap, spectrum_l0, ChainGeometry};
use crate::pauli::{Axis, BasisLabel, PauliString};

/// Unitarity tolerance for inputs of [`gate_error`].
pub const UNITARY_TOL: f64 = 1e-8;

/// Smallest usable drive matrix element.
pub const MIN_COUPLING: f64 = 1e-12;

/// `E(U, G) = 1 - |Tr(U G^dag)| / dim`.
pub fn gate_error(u: &CMatrix, goal: &CMatrix) -> Result<f64> {
    validate(u)?;
    validate(goal)?;
    if u.nrows() != goal.nrows() {
        return Err(Error::DimensionMismatch {
            expected: goal.nrows(),
            found: u.nrows(),
        });
    }
    for m in [u, goal] {
        let defect = unitarity_defect(m);
        if defect > UNITARY_TOL {
            return Err(Error::NotUnitary { defect });
        }
    }
    let overlap = (u * goal.adjoint()).trace().norm() / u.nrows() as f64;
    Ok((1.0 - overlap).max(0.0))
}

/// `iSWAP_{t1,t2} = -i e^{i phi}|t1><t2| - i e^{-i phi}|t2><t1| + sum_{j != t1,t2} |j><j|`.
#[derive(Debug, Clone, PartialEq)]
pub struct IswapTarget {
    /// Higher-energy state.
    pub t1: BasisLabel,
    /// Lower-energy state.
    pub t2: BasisLabel,
    pub phase: f64,
}

impl IswapTarget {
    pub fn new(t1: BasisLabel, t2: BasisLabel, phase: f64) -> Result<Self> {
        if t1.n_qubits() != t2.n_qubits() {
            return Err(Error::DimensionMismatch {
                expected: t1.n_qubits(),
                found: t2.n_qubits(),
            });
        }
        if t1 == t2 {
            return Err(Error::Domain("iSWAP needs two distinct states".into()));
        }
        Ok(IswapTarget { t1, t2, phase })
    }

    pub fn dim(&self) -> usize {
        1 << self.t1.n_qubits()
    }
}

pub fn target_iswap(t: &IswapTarget) -> CMatrix {
    let dim = t.dim();
    let (a, b) = (t.t1.index(), t.t2.index());
    let mut g = CMatrix::identity(dim, dim);
    g[(a, a)] = c64(0.0, 0.0);
    g[(b, b)] = c64(0.0, 0.0);
    g[(a, b)] = c64(0.0, -1.0) * C64::from_polar(1.0, t.phase);
    g[(b, a)] = c64(0.0, -1.0) * C64::from_polar(1.0, -t.phase);
    g
}

/// How the background phase is removed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProtocolMode {
    /// Two half pulses around a spectrum flip.
    Halfway,
    /// One pulse, then `exp(+i L_1^z t_d)` before leaving the eigenbasis.
    PhaseUndoEigenbasis,
    /// One pulse, then `exp(+i H_cb t_d)` after leaving the eigenbasis,
    /// with `H_cb = U_eg L_1^z U_eg^dag`.
    PhaseUndoComputational,
}

impl ProtocolMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolMode::Halfway => "halfway",
            ProtocolMode::PhaseUndoEigenbasis => "phase_undo_eigenbasis",
            ProtocolMode::PhaseUndoComputational => "phase_undo_computational",
        }
    }
}

impl fmt::Display for ProtocolMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Knobs of a single protocol run.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Integrator step; `None` picks the default for the chain.
    pub step: Option<f64>,
    /// Drive amplitude; `None` calibrates a pi rotation.
    pub amplitude: Option<f64>,
    pub integrator: Integrator,
    /// Enforce the step-halving convergence check.
    pub verify: bool,
}

impl RunOptions {
    pub fn verified() -> Self {
        RunOptions {
            verify: true,
            ..Self::default()
        }
    }
}

/// Outcome of a protocol run.
#[derive(Debug, Clone)]
pub struct ProtocolReport {
    pub total_unitary: CMatrix,
    /// Error against [`ProtocolReport::target`].
    pub error: f64,
    /// Per basis state, the phase mismatch of its column against the target
    /// after removing the best global phase.
    pub per_state_phase_defect: Vec<f64>,
    pub mode: ProtocolMode,
    pub t_d: f64,
    /// Integrator step used by the drive stages.
    pub step: f64,
    /// Total integrator steps over all drive stages.
    pub n_steps: usize,
    /// Drive amplitude `Omega_P`.
    pub omega_p: f64,
    /// Drive frequency, the `t1`-`t2` gap.
    pub omega: f64,
    pub t1: BasisLabel,
    pub t2: BasisLabel,
    pub drive_label: String,
    /// Drive matrix element between the two driven eigenstates.
    pub coupling: C64,
    /// Requested drive phase `phi`.
    pub phase: f64,
    /// Phase of the iSWAP target, `phi + arg(coupling)`.
    pub target_phase: f64,
    pub unitarity_defect: f64,
}

impl ProtocolReport {
    pub fn target(&self) -> IswapTarget {
        IswapTarget {
            t1: self.t1.clone(),
            t2: self.t2.clone(),
            phase: self.target_phase,
        }
    }

    /// `|<s|U|s>|` for every basis state `s`.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.total_unitary.nrows())
            .map(|s| self.total_unitary[(s, s)].norm())
            .collect()
    }
}

fn phase_defects(u: &CMatrix, goal: &CMatrix) -> Vec<f64> {
    let global = C64::from_polar(1.0, -overlap_phase(u, goal));
    (0..u.ncols())
        .map(|col| {
            let row = (0..goal.nrows())
                .max_by(|&a, &b| goal[(a, col)].norm().total_cmp(&goal[(b, col)].norm()))
                .unwrap_or(col);
            let achieved = u[(row, col)] * global;
            if achieved.norm() == 0.0 {
                return PI;
            }
            wrap_phase(achieved.arg() - goal[(row, col)].arg()).abs()
        })
        .collect()
}

/// Chain data shared by every run with one geometry and drive operator.
#[derive(Debug, Clone)]
pub struct ResonantGate {
    geom: ChainGeometry,
    drive_label: String,
    drive: CMatrix,
    background: CMatrix,
    eigengate: CMatrix,
    flip: CMatrix,
    t1: BasisLabel,
    t2: BasisLabel,
    omega: f64,
    coupling_halfway: C64,
    coupling_plain: C64,
    default_step: f64,
}

impl ResonantGate {
    /// Builds `U_eg = exp(-i H_P pi/2)`, `H_bg = L_1^z`, the driven pair and
    /// its gap. Requires an even chain and a drive that couples the pair in
    /// both frames.
    pub fn new(geom: &ChainGeometry, drive: &PauliString) -> Result<Self> {
        let n = geom.n_qubits();
        if n % 2 != 0 {
            return Err(Error::Domain(format!("the protocol needs an even chain, got N = {n}")));
        }
        if drive.n_qubits() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: drive.n_qubits(),
            });
        }
        let gap = find_unique_gap(&spectrum_l0(geom))?;
        let (t1, t2) = (gap.t1, gap.t2);
        let hp = eig_hermitian(&build_hp(geom))?;
        let eigengate = hp.propagator(FRAC_PI_2);
        let flip = hp.propagator(PI);
        let background = build_l1(Axis::Z, geom);
        let drive_matrix = drive.to_matrix();

        let (a, b) = (t1.index(), t2.index());
        let into = &eigengate;
        let out = eigengate.adjoint();
        // Eigenvalues of L_1^z on the mapped states.
        let energy = |v: nalgebra::DVectorView<'_, C64>| (v.adjoint() * &background * v)[(0, 0)].re;
        let omega = (energy(into.column(a)) - energy(into.column(b))).abs();
        let element = |m: &CMatrix| (m.column(a).adjoint() * &drive_matrix * m.column(b))[(0, 0)];
        let coupling_halfway = element(into);
        let coupling_plain = element(&out);
        let label = drive.label();
        for m in [coupling_halfway, coupling_plain] {
            if m.norm() < MIN_COUPLING {
                return Err(Error::ZeroCoupling {
                    label,
                    magnitude: m.norm(),
                });
            }
        }
        let default_step = crate::driving::default_step(&background, omega)?;
        Ok(ResonantGate {
            geom: geom.clone(),
            drive_label: label,
            drive: drive_matrix,
            background,
            eigengate,
            flip,
            t1,
            t2,
            omega,
            coupling_halfway,
            coupling_plain,
            default_step,
        })
    }

    pub fn geometry(&self) -> &ChainGeometry {
        &self.geom
    }

    pub fn drive_label(&self) -> &str {
        &self.drive_label
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn t1(&self) -> &BasisLabel {
        &self.t1
    }

    pub fn t2(&self) -> &BasisLabel {
        &self.t2
    }

    pub fn eigengate(&self) -> &CMatrix {
        &self.eigengate
    }

    pub fn background(&self) -> &CMatrix {
        &self.background
    }

    pub fn default_step(&self) -> f64 {
        self.default_step
    }

    /// Drive matrix element between the driven eigenstates in the frame
    /// used by `mode`.
    pub fn coupling(&self, mode: ProtocolMode) -> C64 {
        match mode {
            ProtocolMode::Halfway => self.coupling_halfway,
            _ => self.coupling_plain,
        }
    }

    fn drive_stage(&self, amplitude: f64, phase: f64, duration: f64, opts: &RunOptions) -> Result<crate::driving::Propagation> {
        let cfg = DriveConfig {
            drive: self.drive.clone(),
            amplitude,
            frequency: self.omega,
            phase,
            duration,
            start: 0.0,
            step: Some(opts.step.unwrap_or(self.default_step).min(duration)),
            integrator: opts.integrator,
            verify: opts.verify,
        };
        propagate_driven(&self.background, &cfg)
    }

    pub fn run(&self, mode: ProtocolMode, t_d: f64, phi: f64, opts: &RunOptions) -> Result<ProtocolReport> {
        if !(t_d > 0.0 && t_d.is_finite()) {
            return Err(Error::InvalidConfig(format!("duration must be positive, got {t_d}")));
        }
        let coupling = self.coupling(mode);
        let omega_p = match opts.amplitude {
            Some(a) => a,
            None => calibrate_amplitude(coupling.norm(), t_d).map_err(|e| match e {
                Error::ZeroCoupling { magnitude, .. } => Error::ZeroCoupling {
                    label: self.drive_label.clone(),
                    magnitude,
                },
                other => other,
            })?,
        };
        let u = &self.eigengate;
        let (total, step, n_steps) = match mode {
            ProtocolMode::Halfway => {
                let first = self.drive_stage(omega_p, phi, t_d / 2.0, opts)?;
                let phi2 = second_half_phase(phi, self.omega, t_d);
                let second = self.drive_stage(omega_p, phi2, t_d / 2.0, opts)?;
                let total = u.adjoint() * &self.flip * &second.unitary * &self.flip * &first.unitary * u;
                (total, first.step.min(second.step), first.n_steps + second.n_steps)
            }
            ProtocolMode::PhaseUndoEigenbasis | ProtocolMode::PhaseUndoComputational => {
                let pulse = self.drive_stage(omega_p, phi, t_d, opts)?;
                let total = if mode == ProtocolMode::PhaseUndoEigenbasis {
                    let undo = eig_hermitian(&self.background)?.propagator(-t_d);
                    u * undo * &pulse.unitary * u.adjoint()
                } else {
                    let h_cb = u * &self.background * u.adjoint();
                    let h_cb = (&h_cb + h_cb.adjoint()).scale(0.5);
                    eig_hermitian(&h_cb)?.propagator(-t_d) * u * &pulse.unitary * u.adjoint()
                };
                (total, pulse.step, pulse.n_steps)
            }
        };
        let target_phase = phi + coupling.arg();
        let target = IswapTarget::new(self.t1.clone(), self.t2.clone(), target_phase)?;
        let goal = target_iswap(&target);
        let error = gate_error(&total, &goal)?;
        Ok(ProtocolReport {
            per_state_phase_defect: phase_defects(&total, &goal),
            unitarity_defect: unitarity_defect(&total),
            total_unitary: total,
            error,
            mode,
            t_d,
            step,
            n_steps,
            omega_p,
            omega: self.omega,
            t1: self.t1.clone(),
            t2: self.t2.clone(),
            drive_label: self.drive_label.clone(),
            coupling,
            phase: phi,
            target_phase,
        })
    }
}

/// Halfway-inverted protocol at the default step, with the convergence
/// check enabled.
pub fn run_protocol_halfway(geom: &ChainGeometry, drive: &PauliString, t_d: f64, phi: f64) -> Result<ProtocolReport> {
    ResonantGate::new(geom, drive)?.run(ProtocolMode::Halfway, t_d, phi, &RunOptions::verified())
}

/// Where the phase-undo exponential is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UndoFrame {
    Eigenbasis,
    Computational,
}

pub fn run_protocol_phase_undo(
    geom: &ChainGeometry,
    drive: &PauliString,
    t_d: f64,
    phi: f64,
    frame: UndoFrame,
) -> Result<ProtocolReport> {
    let mode = match frame {
        UndoFrame::Eigenbasis => ProtocolMode::PhaseUndoEigenbasis,
        UndoFrame::Computational => ProtocolMode::PhaseUndoComputational,
    };
    ResonantGate::new(geom, drive)?.run(mode, t_d, phi, &RunOptions::verified())
}

/// Free-evolution phases per qubit and the single-qubit gates undoing them.
#[derive(Debug, Clone)]
pub struct PhaseLedger {
    /// `x_j t_d` reduced to `[0, 2 pi)`.
    pub phases: Vec<f64>,
    /// `prod_j diag(1, exp(-i x_j t_d))`.
    pub correction: CMatrix,
}

/// `U_eg^dag exp(-i L_1^z t) U_eg = exp(-i L_0^z t)` is a product of
/// single-qubit `z` rotations by `x_j t`, undone up to a global phase by
/// `diag(1, exp(-i x_j t))` on each qubit.
pub fn dynamical_phase_ledger(geom: &ChainGeometry, t_d: f64) -> PhaseLedger {
    let phases: Vec<f64> = geom
        .positions()
        .iter()
        .map(|&x| {
            let p = (x * t_d).rem_euclid(2.0 * PI);
            if p >= 2.0 * PI - 1e-12 {
                0.0
            } else {
                p
            }
        })
        .collect();
    let n = geom.n_qubits();
    let dim = geom.dim();
    let mut correction = CMatrix::zeros(dim, dim);
    for index in 0..dim {
        let label = BasisLabel::from_index(index, n);
        let angle: f64 = label.excited_set().iter().map(|&s| phases[s - 1]).sum();
        correction[(index, index)] = C64::from_polar(1.0, -angle);
    }
    PhaseLedger { phases, correction }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expm_i, max_abs_diff};
    use crate::model::{build_l0, calogero_positions};

    fn label(s: &str) -> BasisLabel {
        BasisLabel::parse(s).unwrap()
    }

    #[test]
    fn gate_error_basics() {
        let x = PauliString::single(1, 1, Axis::X).unwrap().to_matrix();
        let id = CMatrix::identity(2, 2);
        assert!(gate_error(&x, &x).unwrap() < 1e-15);
        assert!((gate_error(&x, &id).unwrap() - 1.0).abs() < 1e-15);
        let rotated = &x * C64::from_polar(1.0, 0.77);
        assert!(gate_error(&rotated, &x).unwrap() < 1e-15);
        assert!(matches!(gate_error(&x, &CMatrix::identity(4, 4)), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(gate_error(&x.scale(2.0), &x), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn toffoli_and_fredkin_patterns() {
        let toffoli = target_iswap(&IswapTarget::new(label("110"), label("111"), 0.3).unwrap());
        let fredkin = target_iswap(&IswapTarget::new(label("110"), label("101"), 0.3).unwrap());
        let pattern = |m: &CMatrix| -> Vec<usize> {
            (0..8).map(|c| (0..8).find(|&r| m[(r, c)].norm() > 0.5).unwrap()).collect()
        };
        assert_eq!(pattern(&toffoli), vec![0, 1, 2, 3, 4, 5, 7, 6]);
        assert_eq!(pattern(&fredkin), vec![0, 1, 2, 3, 4, 6, 5, 7]);
        assert!(unitarity_defect(&toffoli) < 1e-15);
        assert_eq!(toffoli[(6, 7)], c64(0.0, -1.0) * C64::from_polar(1.0, 0.3));
        assert_eq!(toffoli[(7, 6)], c64(0.0, -1.0) * C64::from_polar(1.0, -0.3));
        assert!(IswapTarget::new(label("11"), label("11"), 0.0).is_err());
    }

    #[test]
    fn ledger_examples() {
        let g2 = calogero_positions(2).unwrap();
        let zero = dynamical_phase_ledger(&g2, 0.0);
        assert!(zero.phases.iter().all(|&p| p == 0.0));

        // x t = -pi and +pi both reduce to pi: the correction is Z (x) Z.
        let ledger = dynamical_phase_ledger(&g2, PI * 2.0_f64.sqrt());
        for p in &ledger.phases {
            assert!((p - PI).abs() < 1e-12);
        }
        let zz = PauliString::parse("z1z2", 2).unwrap().to_matrix();
        assert!(max_abs_diff(&ledger.correction, &zz) < 1e-12);

        for n in [2, 4] {
            let g = calogero_positions(n).unwrap();
            let t_d = 3.21;
            let gate = ResonantGate::new(&g, &PauliString::parse(if n == 2 { "x1x2" } else { "z2z3" }, n).unwrap()).unwrap();
            let u = gate.eigengate();
            let free = u.adjoint() * expm_i(&build_l1(Axis::Z, &g), t_d).unwrap() * u;
            assert!(max_abs_diff(&free, &expm_i(&build_l0(Axis::Z, &g), t_d).unwrap()) < 1e-9);
            let corrected = dynamical_phase_ledger(&g, t_d).correction * free;
            assert!(gate_error(&corrected, &CMatrix::identity(g.dim(), g.dim())).unwrap() < 1e-9);
        }
    }

    #[test]
    fn gate_setup_for_four_sites() {
        let g = calogero_positions(4).unwrap();
        let gate = ResonantGate::new(&g, &PauliString::parse("z2z3", 4).unwrap()).unwrap();
        assert_eq!(gate.t1().to_string(), "0011");
        assert_eq!(gate.t2().to_string(), "1100");
        let x = g.positions();
        assert!((gate.omega() - (x[2] + x[3] - x[0] - x[1])).abs() < 1e-10);
        assert!((gate.coupling(ProtocolMode::Halfway).norm() - 0.829345).abs() < 1e-6);
    }

    #[test]
    fn uncoupled_and_odd_chains_rejected() {
        let g = calogero_positions(4).unwrap();
        let err = ResonantGate::new(&g, &PauliString::parse("x2y3", 4).unwrap()).unwrap_err();
        assert!(matches!(err, Error::ZeroCoupling { ref label, .. } if label == "x2y3"));
        let g3 = calogero_positions(3).unwrap();
        assert!(matches!(ResonantGate::new(&g3, &PauliString::parse("z1", 3).unwrap()), Err(Error::Domain(_))));
    }

    #[test]
    fn undo_frames_agree_and_cancel_free_evolution() {
        let g = calogero_positions(4).unwrap();
        let gate = ResonantGate::new(&g, &PauliString::parse("z2z3", 4).unwrap()).unwrap();
        let opts = RunOptions::default();
        let a = gate.run(ProtocolMode::PhaseUndoEigenbasis, 6.0, 0.2, &opts).unwrap();
        let b = gate.run(ProtocolMode::PhaseUndoComputational, 6.0, 0.2, &opts).unwrap();
        assert!(max_abs_diff(&a.total_unitary, &b.total_unitary) < 1e-10);

        let idle = RunOptions {
            amplitude: Some(0.0),
            ..RunOptions::default()
        };
        let free = gate.run(ProtocolMode::PhaseUndoEigenbasis, 6.0, 0.0, &idle).unwrap();
        assert!(max_abs_diff(&free.total_unitary, &CMatrix::identity(16, 16)) < 1e-8);
    }

    #[test]
    fn rejects_nonpositive_duration() {
        let g = calogero_positions(4).unwrap();
        let gate = ResonantGate::new(&g, &PauliString::parse("z2z3", 4).unwrap()).unwrap();
        let opts = RunOptions {
            amplitude: Some(0.0),
            ..RunOptions::default()
        };
        assert!(matches!(gate.run(ProtocolMode::Halfway, 0.0, 0.0, &opts), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn halfway_headline_four_sites() {
        let g = calogero_positions(4).unwrap();
        let report = run_protocol_halfway(&g, &PauliString::parse("z2z3", 4).unwrap(), 11.55, 0.0).unwrap();
        assert!(report.error < 1e-3, "error {}", report.error);
        assert!(report.unitarity_defect < 1e-9);
        let (a, b) = (report.t1.index(), report.t2.index());
        for (s, pop) in report.populations().iter().enumerate() {
            if s != a && s != b {
                assert!(*pop > 0.999, "state {s}: {pop}");
            }
        }
    }

    mod props {
        use super::super::*;
        use crate::linalg::expm_i;
        use crate::model::calogero_positions;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn error_ignores_global_phase(t in 0.0f64..6.0, theta in -3.2f64..3.2, alpha in -3.2f64..3.2) {
                let g = calogero_positions(2).unwrap();
                let u = expm_i(&crate::model::build_hp(&g), t).unwrap();
                let goal = target_iswap(&IswapTarget::new(
                    BasisLabel::parse("01").unwrap(),
                    BasisLabel::parse("10").unwrap(),
                    theta,
                ).unwrap());
                let e = gate_error(&u, &goal).unwrap();
                let shifted = gate_error(&(&u * C64::from_polar(1.0, alpha)), &goal).unwrap();
                prop_assert!((e - shifted).abs() < 1e-12);
                prop_assert!((0.0..=1.0 + 1e-12).contains(&e));
            }
        }
    }
}

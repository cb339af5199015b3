//! Resonant driving: closed-form two-level Rabi algebra and the time-ordered
//! propagator of `H(t) = H_bg + amp * cos(omega t + phi) * H_drive`.
//!
//! Two-level conventions: the rotating-frame Hamiltonian is
//! `n . sigma` with `n = (Omega cos phi, Omega sin phi, delta/2)`, and the lab
//! frame adds `exp(-i omega sigma^z t / 2)` on the left.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::linalg::{c64, eig_hermitian, hermiticity_defect, max_abs_diff, validate, CMatrix, HERMITIAN_TOL};
use crate::pauli::{Axis, PauliString};

/// Entrywise change allowed between a propagator and its half-step rerun.
pub const CONVERGENCE_TOL: f64 = 1e-6;

/// Carrier periods must be resolved by at least this many steps.
pub const MIN_STEPS_PER_PERIOD: f64 = 20.0;

/// Divisor applied to the shorter of the carrier and background periods.
pub const DEFAULT_STEPS_PER_PERIOD: f64 = 40.0;

const MAX_HALVINGS: usize = 8;
const POLE_TOL: f64 = 1e-6;
const RESONANCE_TOL: f64 = 1e-12;

fn pauli2(axis: Axis) -> CMatrix {
    PauliString::single(1, 1, axis)
        .expect("single site on one qubit")
        .to_matrix()
}

/// Parameters of a driven two-level system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelParams {
    /// Level splitting `Delta E`.
    pub gap: f64,
    /// Rabi frequency `Omega`.
    pub rabi: f64,
    /// Drive frequency `omega`.
    pub frequency: f64,
    /// Drive phase `phi`.
    pub phase: f64,
}

impl TwoLevelParams {
    pub fn new(gap: f64, rabi: f64, frequency: f64, phase: f64) -> Self {
        TwoLevelParams {
            gap,
            rabi,
            frequency,
            phase,
        }
    }

    pub fn resonant(frequency: f64, rabi: f64, phase: f64) -> Self {
        Self::new(frequency, rabi, frequency, phase)
    }

    /// `delta = Delta E - omega`.
    pub fn detuning(&self) -> f64 {
        self.gap - self.frequency
    }

    pub fn with_phase(self, phase: f64) -> Self {
        TwoLevelParams { phase, ..self }
    }

    fn field(&self) -> [f64; 3] {
        [
            self.rabi * self.phase.cos(),
            self.rabi * self.phase.sin(),
            self.detuning() / 2.0,
        ]
    }

    /// Generalized Rabi frequency `n = sqrt(Omega^2 + delta^2/4)`.
    pub fn generalized_rabi(&self) -> f64 {
        let [x, y, z] = self.field();
        (x * x + y * y + z * z).sqrt()
    }
}

/// `exp(-i t n . sigma) = cos(|n| t) I - i sin(|n| t) n.sigma / |n|`.
fn spin_rotation(field: [f64; 3], t: f64) -> CMatrix {
    let norm = (field[0].powi(2) + field[1].powi(2) + field[2].powi(2)).sqrt();
    if norm == 0.0 {
        return CMatrix::identity(2, 2);
    }
    let (s, c) = (norm * t).sin_cos();
    let mut generator = CMatrix::zeros(2, 2);
    for (axis, &component) in Axis::ALL.iter().zip(field.iter()) {
        generator += pauli2(*axis) * c64(component / norm, 0.0);
    }
    CMatrix::identity(2, 2) * c64(c, 0.0) - generator * c64(0.0, s)
}

fn frame_shift(frequency: f64, t: f64) -> CMatrix {
    spin_rotation([0.0, 0.0, frequency / 2.0], t)
}

/// Rotating-frame propagator `exp(-i H_rf t)`.
pub fn rabi_unitary_rf(p: &TwoLevelParams, t: f64) -> CMatrix {
    spin_rotation(p.field(), t)
}

/// Lab-frame propagator `exp(-i omega sigma^z t/2) U_rf(t)`.
pub fn rabi_unitary_lab(p: &TwoLevelParams, t: f64) -> CMatrix {
    frame_shift(p.frequency, t) * rabi_unitary_rf(p, t)
}

/// Phase of the second half pulse that cancels the first half's free phase:
/// `phi_2 = -phi_1 - omega t_d / 2`.
pub fn second_half_phase(phi1: f64, frequency: f64, t_d: f64) -> f64 {
    -phi1 - frequency * t_d / 2.0
}

/// `sigma^x U_lab(phi_2, t_d/2) sigma^x U_lab(phi_1, t_d/2)`.
pub fn halfway_inversion_2level(p: &TwoLevelParams, t_d: f64, phi1: f64) -> CMatrix {
    let x = pauli2(Axis::X);
    let half = t_d / 2.0;
    let first = rabi_unitary_lab(&p.with_phase(phi1), half);
    let phi2 = second_half_phase(phi1, p.frequency, t_d);
    let second = rabi_unitary_lab(&p.with_phase(phi2), half);
    &x * second * &x * first
}

/// Closed form of [`halfway_inversion_2level`]: two rotations about axes
/// sharing the transverse component and opposite longitudinal parts.
pub fn halfway_inversion_closed_form(p: &TwoLevelParams, t_d: f64, phi1: f64) -> CMatrix {
    let [x, y, z] = p.with_phase(phi1).field();
    let half = t_d / 2.0;
    spin_rotation([x, y, -z], half) * spin_rotation([x, y, z], half)
}

/// Exact error of the halfway-inverted pulse against the identity:
/// `1 - |1 - 2 sin^2(n t_d / 2) Omega^2 / n^2|`.
pub fn offresonant_error_formula(p: &TwoLevelParams, t_d: f64) -> Result<f64> {
    let delta = p.detuning();
    if delta == 0.0 {
        return Err(Error::DivergentCase);
    }
    let n = p.generalized_rabi();
    let s = (n * t_d / 2.0).sin();
    Ok(1.0 - (1.0 - 2.0 * s * s * p.rabi * p.rabi / (n * n)).abs())
}

/// One checkpoint of the two-level phase trace.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseCheckpoint {
    pub label: &'static str,
    /// Predicted relative phase, wrapped to `(-pi, pi]`.
    pub predicted: f64,
    /// Relative phase of the simulated state, wrapped to `(-pi, pi]`.
    pub simulated: f64,
}

impl PhaseCheckpoint {
    /// Wrapped difference between simulation and prediction.
    pub fn mismatch(&self) -> f64 {
        wrap_phase(self.simulated - self.predicted).abs()
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_phase(x: f64) -> f64 {
    let r = x.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Bloch azimuth `arg(c_1) - arg(c_0)`; `None` on a pole.
fn azimuth(state: &CMatrix) -> Option<f64> {
    let (c0, c1) = (state[(0, 0)], state[(1, 0)]);
    if c0.norm() < POLE_TOL || c1.norm() < POLE_TOL {
        None
    } else {
        Some(wrap_phase(c1.arg() - c0.arg()))
    }
}

/// Follows the relative phase of a state that starts in `|1>` through the
/// halfway-inverted resonant sequence.
///
/// A state sitting on a pole has no azimuth of its own; it is assigned the
/// azimuth of the meridian it travelled along, read off mid-pulse.
pub fn phase_trace_2level(p: &TwoLevelParams, phi1: f64, t_d: f64) -> Result<Vec<PhaseCheckpoint>> {
    let detuning = p.detuning();
    if detuning.abs() > RESONANCE_TOL {
        return Err(Error::OffResonant { detuning });
    }
    let half = t_d / 2.0;
    let omega_t = p.frequency * half;
    let first = p.with_phase(phi1);
    let second = p.with_phase(second_half_phase(phi1, p.frequency, t_d));
    let x = pauli2(Axis::X);

    let mut state = CMatrix::from_column_slice(2, 1, &[c64(0.0, 0.0), c64(1.0, 0.0)]);
    let mut out = Vec::with_capacity(5);
    let mut record = |label, predicted: f64, state: &CMatrix, fallback: f64| {
        let simulated = azimuth(state).unwrap_or(wrap_phase(fallback));
        out.push(PhaseCheckpoint {
            label,
            predicted: wrap_phase(predicted),
            simulated,
        });
        simulated
    };

    let meridian = |params: &TwoLevelParams, from: &CMatrix| {
        azimuth(&(rabi_unitary_rf(params, half / 2.0) * from)).unwrap_or(0.0)
    };

    let fallback = meridian(&first, &state);
    state = rabi_unitary_rf(&first, half) * state;
    let phase = record("first pulse", phi1 + FRAC_PI_2, &state, fallback);

    state = frame_shift(p.frequency, half) * state;
    let phase = record("frame shift", phi1 + FRAC_PI_2 + omega_t, &state, phase + omega_t);

    state = &x * state;
    record("first flip", -phi1 - FRAC_PI_2 - omega_t, &state, -phase);

    let fallback = meridian(&second, &state) + omega_t;
    state = rabi_unitary_lab(&second, half) * state;
    let phase = record("second pulse", -phi1 - FRAC_PI_2, &state, fallback);

    state = &x * state;
    record("second flip", phi1 + FRAC_PI_2, &state, -phase);
    Ok(out)
}

/// How a propagation step is discretised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    /// One exponential of `H` at the step midpoint. Second order.
    Midpoint,
    /// Two exponentials on Gauss-Legendre nodes, commutator free. Fourth
    /// order.
    #[default]
    Magnus4,
}

/// A cosine drive applied on top of a static background Hamiltonian.
#[derive(Debug, Clone)]
pub struct DriveConfig {
    pub drive: CMatrix,
    /// `Omega'`.
    pub amplitude: f64,
    /// `omega`.
    pub frequency: f64,
    /// `phi`.
    pub phase: f64,
    /// `t_d`.
    pub duration: f64,
    /// Time on the carrier clock at which the propagation starts.
    pub start: f64,
    /// Integrator step; `None` uses [`default_step`].
    pub step: Option<f64>,
    pub integrator: Integrator,
    /// Rerun with halved steps until two runs agree to [`CONVERGENCE_TOL`].
    pub verify: bool,
}

impl DriveConfig {
    pub fn new(drive: CMatrix, amplitude: f64, frequency: f64, phase: f64, duration: f64) -> Self {
        DriveConfig {
            drive,
            amplitude,
            frequency,
            phase,
            duration,
            start: 0.0,
            step: None,
            integrator: Integrator::default(),
            verify: false,
        }
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = Some(step);
        self
    }

    pub fn with_start(mut self, start: f64) -> Self {
        self.start = start;
        self
    }

    pub fn with_integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn verified(mut self, verify: bool) -> Self {
        self.verify = verify;
        self
    }

    fn coefficient(&self, t: f64) -> f64 {
        self.amplitude * (self.frequency * t + self.phase).cos()
    }

    fn check(&self) -> Result<()> {
        let finite = [self.amplitude, self.frequency, self.phase, self.duration, self.start]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidConfig("drive parameters must be finite".into()));
        }
        if self.amplitude < 0.0 {
            return Err(Error::InvalidConfig("amplitude must be non-negative".into()));
        }
        if self.frequency < 0.0 {
            return Err(Error::InvalidConfig("frequency must be non-negative".into()));
        }
        if !(self.duration > 0.0) {
            return Err(Error::InvalidConfig("duration must be positive".into()));
        }
        if let Some(step) = self.step {
            if !(step > 0.0) || step > self.duration {
                return Err(Error::InvalidConfig(format!(
                    "step {step} must lie in (0, duration = {}]",
                    self.duration
                )));
            }
            if self.frequency > 0.0 && step > 2.0 * PI / self.frequency / MIN_STEPS_PER_PERIOD {
                return Err(Error::InvalidConfig(format!(
                    "step {step} does not resolve the carrier period {}",
                    2.0 * PI / self.frequency
                )));
            }
        }
        Ok(())
    }
}

/// `min(2 pi / omega, 2 pi / ||H_bg||) / 40`, ignoring vanishing scales.
pub fn default_step(background: &CMatrix, frequency: f64) -> Result<f64> {
    let norm = eig_hermitian(background)?
        .values
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut period = f64::INFINITY;
    if frequency > 0.0 {
        period = period.min(2.0 * PI / frequency);
    }
    if norm > 0.0 {
        period = period.min(2.0 * PI / norm);
    }
    if period.is_infinite() {
        period = 2.0 * PI;
    }
    Ok(period / DEFAULT_STEPS_PER_PERIOD)
}

/// Result of [`propagate_driven`].
#[derive(Debug, Clone)]
pub struct Propagation {
    pub unitary: CMatrix,
    /// Step actually used for `unitary`.
    pub step: f64,
    pub n_steps: usize,
}

// Gauss-Legendre nodes and mixing weights of the fourth-order
// commutator-free exponential scheme.
const CF4_C1: f64 = 0.5 - 0.288_675_134_594_812_9;
const CF4_C2: f64 = 0.5 + 0.288_675_134_594_812_9;
const CF4_A1: f64 = 0.25 - 0.288_675_134_594_812_9;
const CF4_A2: f64 = 0.25 + 0.288_675_134_594_812_9;

fn run_fixed(background: &CMatrix, cfg: &DriveConfig, n_steps: usize) -> Result<CMatrix> {
    let dim = background.nrows();
    let h = cfg.duration / n_steps as f64;
    let mut u = CMatrix::identity(dim, dim);
    let at = |t: f64| background + &cfg.drive * c64(cfg.coefficient(t), 0.0);
    for i in 0..n_steps {
        let t0 = cfg.start + i as f64 * h;
        match cfg.integrator {
            Integrator::Midpoint => {
                u = eig_hermitian(&at(t0 + 0.5 * h))?.propagator(h) * u;
            }
            Integrator::Magnus4 => {
                let f1 = cfg.coefficient(t0 + CF4_C1 * h);
                let f2 = cfg.coefficient(t0 + CF4_C2 * h);
                let mix = |a: f64, b: f64| background * c64(a + b, 0.0) + &cfg.drive * c64(a * f1 + b * f2, 0.0);
                let early = eig_hermitian(&mix(CF4_A2, CF4_A1))?.propagator(h);
                let late = eig_hermitian(&mix(CF4_A1, CF4_A2))?.propagator(h);
                u = late * early * u;
            }
        }
    }
    Ok(u)
}

/// Time-ordered propagator of `H_bg + amp cos(omega t + phi) H_drive` over
/// `[start, start + duration]`.
///
/// With `verify` set the run is repeated at half the step until successive
/// results agree entrywise to [`CONVERGENCE_TOL`]; the finer result is
/// returned.
pub fn propagate_driven(background: &CMatrix, cfg: &DriveConfig) -> Result<Propagation> {
    validate(background)?;
    validate(&cfg.drive)?;
    if cfg.drive.nrows() != background.nrows() {
        return Err(Error::DimensionMismatch {
            expected: background.nrows(),
            found: cfg.drive.nrows(),
        });
    }
    for m in [background, &cfg.drive] {
        let defect = hermiticity_defect(m);
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian { defect });
        }
    }
    cfg.check()?;
    let step = match cfg.step {
        Some(step) => step,
        None => default_step(background, cfg.frequency)?.min(cfg.duration),
    };
    let mut n_steps = (cfg.duration / step - 1e-9).ceil().max(1.0) as usize;
    let mut u = run_fixed(background, cfg, n_steps)?;
    if cfg.verify {
        let mut change = f64::INFINITY;
        for _ in 0..MAX_HALVINGS {
            let finer = run_fixed(background, cfg, 2 * n_steps)?;
            change = max_abs_diff(&finer, &u);
            u = finer;
            n_steps *= 2;
            if change < CONVERGENCE_TOL {
                break;
            }
        }
        if !(change < CONVERGENCE_TOL) {
            return Err(Error::StepTooCoarse { step, change });
        }
    }
    Ok(Propagation {
        unitary: u,
        step: cfg.duration / n_steps as f64,
        n_steps,
    })
}

/// Amplitude producing a pi rotation of the driven pair:
/// `Omega_P = pi / (|m| t_d)`.
pub fn calibrate_amplitude(matrix_element: f64, t_d: f64) -> Result<f64> {
    let magnitude = matrix_element.abs();
    if magnitude < 1e-12 {
        return Err(Error::ZeroCoupling {
            label: String::from("drive"),
            magnitude,
        });
    }
    if !(t_d > 0.0) {
        return Err(Error::Domain(format!("gate time must be positive, got {t_d}")));
    }
    Ok(PI / (magnitude * t_d))
}

#[doc(hidden)]
pub fn two_level_background(gap: f64) -> CMatrix {
    pauli2(Axis::Z) * c64(gap / 2.0, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expm_i, unitarity_defect};
    use proptest::prelude::*;

    fn minus_i_times(m: CMatrix) -> CMatrix {
        m * c64(0.0, -1.0)
    }

    fn gate_error(u: &CMatrix, goal: &CMatrix) -> f64 {
        1.0 - (u * goal.adjoint()).trace().norm() / u.nrows() as f64
    }

    #[test]
    fn resonant_pi_pulses() {
        let omega = 0.7;
        let p = TwoLevelParams::resonant(5.0, omega, 0.0);
        let t = PI / (2.0 * omega);
        assert!(max_abs_diff(&rabi_unitary_rf(&p, t), &minus_i_times(pauli2(Axis::X))) < 1e-15);
        let py = p.with_phase(FRAC_PI_2);
        assert!(max_abs_diff(&rabi_unitary_rf(&py, t), &minus_i_times(pauli2(Axis::Y))) < 1e-15);
        assert!(max_abs_diff(&rabi_unitary_rf(&p, 0.0), &CMatrix::identity(2, 2)) < 1e-15);
    }

    #[test]
    fn lab_frame_without_carrier() {
        let p = TwoLevelParams::new(1.3, 0.4, 0.0, 0.2);
        assert!(max_abs_diff(&rabi_unitary_lab(&p, 2.1), &rabi_unitary_rf(&p, 2.1)) < 1e-15);
    }

    #[test]
    fn lab_frame_inversion_probability() {
        let p = TwoLevelParams::resonant(3.0, 0.25, 0.8);
        let u = rabi_unitary_lab(&p, PI / (2.0 * 0.25));
        assert!(unitarity_defect(&u) < 1e-12);
        assert!((u[(1, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn halfway_resonant_is_perfect_inversion() {
        // Each half is a quarter turn about the same transverse axis.
        let omega = 0.3;
        let p = TwoLevelParams::resonant(4.2, omega, 0.0);
        let u = halfway_inversion_2level(&p, PI / (2.0 * omega), 0.0);
        assert!(gate_error(&u, &pauli2(Axis::X)) < 1e-12);
    }

    #[test]
    fn halfway_without_drive_is_echo() {
        let p = TwoLevelParams::resonant(2.5, 0.0, 0.4);
        let u = halfway_inversion_2level(&p, 3.7, 0.4);
        assert!((u.trace().norm() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn offresonant_error_leading_order() {
        let rabi = 0.01;
        let p = TwoLevelParams::new(1.0 + 20.0 * rabi, rabi, 1.0, 0.0);
        let delta = p.detuning();
        let n = p.generalized_rabi();
        for t_d in [3.0, 7.7, 12.4] {
            let u = halfway_inversion_2level(&p, t_d, 0.0);
            let measured = gate_error(&u, &CMatrix::identity(2, 2));
            let leading = (n * t_d / 2.0).sin().powi(2) * 8.0 * rabi * rabi / (delta * delta);
            assert!((measured - leading).abs() < 0.1 * leading, "t_d={t_d}");
            assert!((measured - offresonant_error_formula(&p, t_d).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn offresonant_formula_edges() {
        let p = TwoLevelParams::new(1.0, 0.0, 0.5, 0.0);
        assert_eq!(offresonant_error_formula(&p, 3.0).unwrap(), 0.0);
        let resonant = TwoLevelParams::resonant(1.0, 0.1, 0.0);
        assert_eq!(offresonant_error_formula(&resonant, 3.0), Err(Error::DivergentCase));
        let q = TwoLevelParams::new(1.5, 0.2, 1.0, 0.0);
        let t_d = 2.0 * 2.0 * PI / q.generalized_rabi();
        assert!(offresonant_error_formula(&q, t_d).unwrap() < 1e-12);
    }

    #[test]
    fn phase_trace_checkpoints() {
        let omega = 0.4;
        let t_d = PI / (2.0 * omega);
        for phi1 in [0.0, 0.3, FRAC_PI_2] {
            let p = TwoLevelParams::resonant(3.7, omega, 0.0);
            let trace = phase_trace_2level(&p, phi1, t_d).unwrap();
            assert_eq!(trace.len(), 5);
            for c in &trace {
                assert!(c.mismatch() < 1e-8, "phi1={phi1} {c:?}");
            }
        }
        let p = TwoLevelParams::resonant(3.7, omega, 0.0);
        let last = phase_trace_2level(&p, 0.0, t_d).unwrap()[4].simulated;
        assert!((last - FRAC_PI_2).abs() < 1e-8);
        let last = phase_trace_2level(&p, FRAC_PI_2, t_d).unwrap()[4].simulated;
        assert!((wrap_phase(last - PI)).abs() < 1e-8);
    }

    #[test]
    fn phase_trace_requires_resonance() {
        let p = TwoLevelParams::new(1.1, 0.1, 1.0, 0.0);
        assert!(matches!(phase_trace_2level(&p, 0.0, 1.0), Err(Error::OffResonant { .. })));
    }

    #[test]
    fn undriven_propagation_is_free_evolution() {
        let bg = two_level_background(1.7);
        let cfg = DriveConfig::new(pauli2(Axis::X), 0.0, 1.7, 0.0, 4.3).verified(true);
        let run = propagate_driven(&bg, &cfg).unwrap();
        assert!(max_abs_diff(&run.unitary, &expm_i(&bg, 4.3).unwrap()) < 1e-9);
    }

    #[test]
    fn rwa_rabi_transfer() {
        let gap = 10.0;
        let amp = 0.1;
        let rabi = amp / 2.0;
        let t = PI / (2.0 * rabi);
        let cfg = DriveConfig::new(pauli2(Axis::X), amp, gap, 0.0, t).verified(true);
        let run = propagate_driven(&two_level_background(gap), &cfg).unwrap();
        assert!(unitarity_defect(&run.unitary) < 1e-9);
        let transfer = run.unitary[(1, 0)].norm_sqr();
        assert!((transfer - 1.0).abs() < 1e-3, "transfer {transfer}");
    }

    #[test]
    fn integrators_agree() {
        let bg = two_level_background(2.0);
        let base = DriveConfig::new(pauli2(Axis::X), 0.3, 2.0, 0.4, 5.0);
        let mid = propagate_driven(&bg, &base.clone().with_integrator(Integrator::Midpoint).with_step(0.002)).unwrap();
        let cf4 = propagate_driven(&bg, &base.with_step(0.05)).unwrap();
        assert!(max_abs_diff(&mid.unitary, &cf4.unitary) < 1e-5);
    }

    #[test]
    fn configuration_checks() {
        let bg = two_level_background(1.0);
        let x = pauli2(Axis::X);
        let zero = DriveConfig::new(x.clone(), 0.1, 1.0, 0.0, 0.0);
        assert!(matches!(propagate_driven(&bg, &zero), Err(Error::InvalidConfig(_))));
        let coarse = DriveConfig::new(x.clone(), 0.1, 1.0, 0.0, 10.0).with_step(1.0);
        assert!(matches!(propagate_driven(&bg, &coarse), Err(Error::InvalidConfig(_))));
        let wrong = DriveConfig::new(CMatrix::identity(4, 4), 0.1, 1.0, 0.0, 1.0);
        assert!(matches!(propagate_driven(&bg, &wrong), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn calibration() {
        let amp = calibrate_amplitude(0.829345, 11.55).unwrap();
        assert!((amp - PI / (0.829345 * 11.55)).abs() < 1e-15);
        assert!((amp - 0.32797).abs() < 1e-5);
        assert!((calibrate_amplitude(1.0, PI).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(calibrate_amplitude(0.0, 1.0), Err(Error::ZeroCoupling { .. })));
    }

    proptest! {
        #[test]
        fn halfway_matches_closed_form(
            gap in 0.5f64..5.0, rabi in 0.0f64..1.0, freq in 0.5f64..5.0,
            t_d in 0.1f64..20.0, phi1 in -PI..PI,
        ) {
            let p = TwoLevelParams::new(gap, rabi, freq, 0.0);
            let lhs = halfway_inversion_2level(&p, t_d, phi1);
            let rhs = halfway_inversion_closed_form(&p, t_d, phi1);
            prop_assert!(max_abs_diff(&lhs, &rhs) < 1e-10);
        }

        #[test]
        fn frames_share_populations(
            gap in 0.5f64..5.0, rabi in 0.0f64..1.0, freq in 0.0f64..5.0,
            phase in -PI..PI, t in 0.0f64..10.0,
        ) {
            let p = TwoLevelParams::new(gap, rabi, freq, phase);
            let lab = rabi_unitary_lab(&p, t);
            let rf = rabi_unitary_rf(&p, t);
            prop_assert!(unitarity_defect(&lab) < 1e-12);
            for r in 0..2 {
                for c in 0..2 {
                    prop_assert!((lab[(r, c)].norm() - rf[(r, c)].norm()).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn propagation_composes() {
        let bg = two_level_background(1.3);
        let x = pauli2(Axis::X);
        let step = 0.01;
        let whole = DriveConfig::new(x.clone(), 0.4, 1.3, 0.2, 6.0).with_step(step);
        let head = DriveConfig::new(x.clone(), 0.4, 1.3, 0.2, 2.5).with_step(step);
        let tail = DriveConfig::new(x, 0.4, 1.3, 0.2, 3.5).with_start(2.5).with_step(step);
        let u = propagate_driven(&bg, &whole).unwrap().unitary;
        let v = propagate_driven(&bg, &tail).unwrap().unitary * propagate_driven(&bg, &head).unwrap().unitary;
        assert!(max_abs_diff(&u, &v) < 1e-8);
    }
}

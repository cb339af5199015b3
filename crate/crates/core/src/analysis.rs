//! Quantities read off the chain and the protocol: drive matrix elements,
//! error sweeps over the gate time, near-resonant phase bookkeeping and
//! two-qubit gate-time estimates.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;

use crate::driving::wrap_phase;
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, CMatrix, C64, DEGENERACY_TOL};
use crate::model::{build_hp, find_unique_gap, spectrum_l0, ChainGeometry};
use crate::pauli::{Axis, BasisLabel, PauliString};
use crate::protocol::{ProtocolMode, ResonantGate, RunOptions};

/// A published matrix element `<t1| U^dag D U |t2>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrintedElement {
    pub n_qubits: usize,
    /// Label as printed.
    pub printed_label: &'static str,
    /// Label whose computed magnitude matches the printed value. Differs
    /// from `printed_label` where the printed label is a typo.
    pub resolved_label: &'static str,
    pub re: f64,
    pub im: f64,
}

impl PrintedElement {
    pub fn value(&self) -> C64 {
        C64::new(self.re, self.im)
    }
}

const fn row(n_qubits: usize, printed: &'static str, resolved: &'static str, re: f64, im: f64) -> PrintedElement {
    PrintedElement {
        n_qubits,
        printed_label: printed,
        resolved_label: resolved,
        re,
        im,
    }
}

/// Reference matrix elements for N = 4, 6 and 8.
pub const PRINTED_TABLES: [PrintedElement; 21] = [
    row(4, "z2", "z2", 0.0, -0.413049),
    row(4, "z2z3", "z2z3", 0.829345, 0.0),
    row(4, "z1z4", "z1z4", 0.829345, 0.0),
    row(4, "x2x3", "x2x3", -0.552743, 0.0),
    row(4, "y2y3", "y2y3", -0.552743, 0.0),
    row(4, "x1x4", "x1x4", 0.390066, 0.0),
    row(4, "x2y3", "x2y3", 0.0, 0.0),
    row(6, "z3", "z3", 0.0, 0.116012),
    row(6, "z3z4", "z3z4", -0.327919, 0.0),
    row(6, "z1z5", "z1z5", -0.353636, 0.0),
    row(6, "z1z5", "z2z5", 0.265128, 0.0),
    row(6, "x3x4", "x3x4", 0.200378, 0.0),
    row(6, "x2x3", "x2x3", -0.147838, 0.0),
    row(6, "x1x5", "x1x5", -0.14341, 0.0),
    row(8, "z4", "z4", 0.0, -0.027894),
    row(8, "z4z5", "z3z4", -0.0839009, 0.0),
    row(8, "z1z6", "z1z6", 0.120287, 0.0),
    row(8, "z2z7", "z2z7", 0.131574, 0.0),
    row(8, "x4x5", "x3x4", 0.0471167, 0.0),
    row(8, "x1x6", "x1x6", 0.0502561, 0.0),
    row(8, "x2x7", "x2x7", 0.0452589, 0.0),
];

/// Printed rows for one chain length.
pub fn printed_table(n_qubits: usize) -> Vec<PrintedElement> {
    PRINTED_TABLES
        .iter()
        .filter(|r| r.n_qubits == n_qubits)
        .copied()
        .collect()
}

/// The two driven states after the eigengate, `U_eg |t1>` and `U_eg |t2>`.
#[derive(Debug, Clone)]
pub struct DrivenPair {
    pub t1: BasisLabel,
    pub t2: BasisLabel,
    v1: Vec<C64>,
    v2: Vec<C64>,
}

impl DrivenPair {
    pub fn new(geom: &ChainGeometry) -> Result<Self> {
        if geom.n_qubits() % 2 != 0 {
            return Err(Error::Domain(format!(
                "matrix elements need an even chain, got N = {}",
                geom.n_qubits()
            )));
        }
        let gap = find_unique_gap(&spectrum_l0(geom))?;
        let u = eig_hermitian(&build_hp(geom))?.propagator(FRAC_PI_2);
        let column = |label: &BasisLabel| u.column(label.index()).iter().copied().collect();
        Ok(DrivenPair {
            v1: column(&gap.t1),
            v2: column(&gap.t2),
            t1: gap.t1,
            t2: gap.t2,
        })
    }

    /// `<t1| U^dag D U |t2>` without forming `D`.
    pub fn element(&self, drive: &PauliString) -> C64 {
        let mut total = C64::new(0.0, 0.0);
        for (col, &amp_in) in self.v2.iter().enumerate() {
            if amp_in.norm() == 0.0 {
                continue;
            }
            let (row, amp) = drive.apply_basis(col);
            total += self.v1[row].conj() * amp * amp_in;
        }
        total
    }
}

/// One table row.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub label: String,
    pub value: C64,
}

/// `<t1| U^dag D U |t2>` for each drive, in the order given.
pub fn matrix_element_table(geom: &ChainGeometry, drives: &[PauliString]) -> Result<Vec<TableRow>> {
    let pair = DrivenPair::new(geom)?;
    Ok(drives
        .iter()
        .map(|d| TableRow {
            label: d.label(),
            value: pair.element(d),
        })
        .collect())
}

/// Labels with the same axis pattern as `printed` whose element magnitude
/// is within `tol` of the printed magnitude.
pub fn match_printed_value(geom: &ChainGeometry, printed: &PrintedElement, tol: f64) -> Result<Vec<String>> {
    let n = geom.n_qubits();
    let template = PauliString::parse(printed.printed_label, n)?;
    let axes: Vec<Axis> = template.factors().iter().map(|&(_, a)| a).collect();
    let pair = DrivenPair::new(geom)?;
    let target = printed.value().norm();
    let mut sites = vec![0usize; axes.len()];
    let mut out = Vec::new();
    fn advance(sites: &mut [usize], n: usize) -> bool {
        // Next strictly increasing site tuple in lexicographic order.
        let k = sites.len();
        for i in (0..k).rev() {
            if sites[i] < n - (k - 1 - i) {
                sites[i] += 1;
                for j in i + 1..k {
                    sites[j] = sites[j - 1] + 1;
                }
                return true;
            }
        }
        false
    }
    for (i, s) in sites.iter_mut().enumerate() {
        *s = i + 1;
    }
    loop {
        let drive = PauliString::new(n, sites.iter().copied().zip(axes.iter().copied()))?;
        if (pair.element(&drive).norm() - target).abs() < tol {
            out.push(drive.label());
        }
        if !advance(&mut sites, n) {
            break;
        }
    }
    Ok(out)
}

/// Whether `drive` can change `Q_0^axis` by zero. Every factor off that axis
/// flips one spin, so the count of such factors must be even. Necessary,
/// not sufficient: a permitted drive may still have a vanishing element.
pub fn coupling_selection_rule(drive: &PauliString, axis: Axis) -> bool {
    drive.factors().iter().filter(|&&(_, a)| a != axis).count() % 2 == 0
}

/// Parses `lo:hi:step` into `lo, lo + step, ...` up to and including `hi`.
/// Points are rounded to 1e-9 so that printed grids are stable.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::Parse {
        what: "grid (lo:hi:step)",
        input: spec.to_string(),
    };
    let parts: Vec<f64> = spec
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let [lo, hi, step] = parts[..] else {
        return Err(bad());
    };
    if !(lo.is_finite() && hi.is_finite() && step.is_finite()) || hi < lo {
        return Err(bad());
    }
    if lo == hi {
        return Ok(vec![lo]);
    }
    if !(step > 0.0) {
        return Err(bad());
    }
    let count = ((hi - lo) / step + 1e-9).floor();
    if count > 1e6 {
        return Err(Error::Domain(format!("grid {spec} has too many points")));
    }
    Ok((0..=count as usize)
        .map(|k| ((lo + k as f64 * step) * 1e9).round() / 1e9)
        .collect())
}

/// One gate time of a sweep. Failed runs carry NaN errors.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub t_d: f64,
    pub error_halfway: f64,
    pub error_plain: f64,
    pub omega_p: f64,
    pub n_steps: usize,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub n_qubits: usize,
    pub drive_label: String,
    pub omega: f64,
    pub rows: Vec<SweepRow>,
    /// Gate times whose run failed, with the reason.
    pub failures: Vec<(f64, String)>,
}

impl SweepResult {
    pub fn t_d(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t_d).collect()
    }
}

/// Runs both the halfway and the phase-undo protocol at every grid point.
/// Points are independent and run in parallel; rows keep grid order.
pub fn error_sweep(gate: &ResonantGate, grid: &[f64], opts: &RunOptions) -> Result<SweepResult> {
    if grid.is_empty() {
        return Err(Error::Domain("empty gate-time grid".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("gate-time grid must be strictly increasing".into()));
    }
    let outcomes: Vec<(SweepRow, Option<String>)> = grid
        .par_iter()
        .map(|&t_d| {
            let halfway = gate.run(ProtocolMode::Halfway, t_d, 0.0, opts);
            let plain = gate.run(ProtocolMode::PhaseUndoEigenbasis, t_d, 0.0, opts);
            let mut reasons = Vec::new();
            let mut row = SweepRow {
                t_d,
                error_halfway: f64::NAN,
                error_plain: f64::NAN,
                omega_p: f64::NAN,
                n_steps: 0,
            };
            match halfway {
                Ok(r) => {
                    row.error_halfway = r.error;
                    row.omega_p = r.omega_p;
                    row.n_steps = r.n_steps;
                }
                Err(e) => reasons.push(format!("halfway: {e}")),
            }
            match plain {
                Ok(r) => {
                    row.error_plain = r.error;
                    if row.omega_p.is_nan() {
                        row.omega_p = r.omega_p;
                    }
                }
                Err(e) => reasons.push(format!("plain: {e}")),
            }
            let failure = (!reasons.is_empty()).then(|| reasons.join("; "));
            (row, failure)
        })
        .collect();
    let mut rows = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    for (row, failure) in outcomes {
        if let Some(reason) = failure {
            failures.push((row.t_d, reason));
        }
        rows.push(row);
    }
    Ok(SweepResult {
        n_qubits: gate.geometry().n_qubits(),
        drive_label: gate.drive_label().to_string(),
        omega: gate.omega(),
        rows,
        failures,
    })
}

/// Strict interior local minima of `ys` over `xs`, skipping NaN neighbours.
pub fn local_minima(xs: &[f64], ys: &[f64]) -> Vec<(f64, f64)> {
    assert_eq!(xs.len(), ys.len(), "abscissa and ordinate lengths differ");
    (1..ys.len().saturating_sub(1))
        .filter(|&i| ys[i] < ys[i - 1] && ys[i] < ys[i + 1])
        .map(|i| (xs[i], ys[i]))
        .collect()
}

/// Strict interior local maxima of `ys` over `xs`.
pub fn local_maxima(xs: &[f64], ys: &[f64]) -> Vec<(f64, f64)> {
    let negated: Vec<f64> = ys.iter().map(|y| -y).collect();
    local_minima(xs, &negated)
        .into_iter()
        .map(|(x, y)| (x, -y))
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Result<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 2 {
        return Err(Error::Domain("need at least two positive points to fit a slope".into()));
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("abscissae coincide; slope undefined".into()));
    }
    Ok(sxy / sxx)
}

/// A group of drive-coupled transitions sharing one detuning.
#[derive(Debug, Clone, PartialEq)]
pub struct PairPhase {
    /// Representative transition, `higher->lower` by `L_1^z` energy.
    pub label: String,
    /// Number of coupled transitions with this detuning.
    pub multiplicity: usize,
    /// `(E_a - E_b) - omega`.
    pub delta: f64,
    /// `delta * t_d / 2`, wrapped to `(-pi, pi]`.
    pub phase_at_half: f64,
}

/// Number of near-resonant detunings tracked by the diagnostic.
pub const TRACKED_PAIRS: usize = 3;

/// Phases `delta t_d / 2` at the spectrum flip for the three off-resonant
/// detunings closest to zero among transitions the drive couples.
///
/// A spectator pair with detuning `delta` leaves the first half pulse with
/// a small rotation whose phase is `delta t_d / 2`; the flip cancels it only
/// when that phase is near zero.
pub fn phase_alignment_diagnostic(gate: &ResonantGate, t_d: f64) -> Result<Vec<PairPhase>> {
    let u = gate.eigengate();
    let n = gate.geometry().n_qubits();
    let dim = gate.geometry().dim();
    let drive = PauliString::parse(gate.drive_label(), n)?.to_matrix();
    let mapped: CMatrix = u.adjoint() * drive * u;
    let background = u.adjoint() * gate.background() * u;
    let energy: Vec<f64> = (0..dim).map(|i| background[(i, i)].re).collect();
    let (r1, r2) = (gate.t1().index(), gate.t2().index());

    let mut groups: Vec<PairPhase> = Vec::new();
    for a in 0..dim {
        for b in 0..dim {
            if energy[a] <= energy[b] + DEGENERACY_TOL || mapped[(a, b)].norm() < 1e-10 {
                continue;
            }
            if (a, b) == (r1, r2) || (a, b) == (r2, r1) {
                continue;
            }
            let delta = (energy[a] - energy[b]) - gate.omega();
            if let Some(g) = groups.iter_mut().find(|g| (g.delta - delta).abs() < 1e-9) {
                g.multiplicity += 1;
                continue;
            }
            groups.push(PairPhase {
                label: format!("{}->{}", BasisLabel::from_index(a, n), BasisLabel::from_index(b, n)),
                multiplicity: 1,
                delta,
                phase_at_half: wrap_phase(delta * t_d / 2.0),
            });
        }
    }
    groups.retain(|g| g.delta.abs() > 1e-9);
    groups.sort_by(|p, q| p.delta.abs().total_cmp(&q.delta.abs()).then(p.delta.total_cmp(&q.delta)));
    groups.truncate(TRACKED_PAIRS);
    Ok(groups)
}

/// Time for a direct two-qubit `pi/4` exchange pulse on one pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairTime {
    pub j: usize,
    pub k: usize,
    pub coupling: f64,
    /// `pi / (4 h_jk)`.
    pub pi4_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeBudget {
    pub pairs: Vec<PairTime>,
    pub min_neighbor: f64,
    pub max_neighbor: f64,
    pub max_distant: f64,
}

pub fn two_qubit_time_budget(geom: &ChainGeometry) -> Result<TimeBudget> {
    let n = geom.n_qubits();
    if n < 2 {
        return Err(Error::Domain("a time budget needs at least two qubits".into()));
    }
    let mut pairs = Vec::new();
    for j in 1..=n {
        for k in j + 1..=n {
            let coupling = geom.coupling(j, k);
            pairs.push(PairTime {
                j,
                k,
                coupling,
                pi4_time: PI / (4.0 * coupling),
            });
        }
    }
    let neighbors: Vec<f64> = pairs.iter().filter(|p| p.k == p.j + 1).map(|p| p.pi4_time).collect();
    Ok(TimeBudget {
        min_neighbor: neighbors.iter().copied().fold(f64::INFINITY, f64::min),
        max_neighbor: neighbors.iter().copied().fold(0.0, f64::max),
        max_distant: pairs.iter().map(|p| p.pi4_time).fold(0.0, f64::max),
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::calogero_positions;

    fn drives(n: usize, labels: &[&str]) -> Vec<PauliString> {
        labels.iter().map(|l| PauliString::parse(l, n).unwrap()).collect()
    }

    #[test]
    fn four_site_table_values() {
        let g = calogero_positions(4).unwrap();
        let rows = matrix_element_table(&g, &drives(4, &["z2", "x2y3", "z2z3"])).unwrap();
        assert!((rows[0].value.norm() - 0.413049).abs() < 1e-6);
        assert!(rows[0].value.re.abs() < 1e-8);
        assert!(rows[1].value.norm() < 1e-10);
        assert!((rows[2].value.re - 0.829345).abs() < 1e-6);
    }

    #[test]
    fn element_is_hermitian_conjugate_pair() {
        let g = calogero_positions(4).unwrap();
        let pair = DrivenPair::new(&g).unwrap();
        let swapped = DrivenPair {
            t1: pair.t2.clone(),
            t2: pair.t1.clone(),
            v1: pair.v2.clone(),
            v2: pair.v1.clone(),
        };
        for d in drives(4, &["z2", "x1x4", "x2y3", "y2y3"]) {
            assert!((pair.element(&d) - swapped.element(&d).conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn printed_six_site_duplicate_resolves() {
        let g = calogero_positions(6).unwrap();
        let matches = match_printed_value(&g, &PRINTED_TABLES[10], 1e-4).unwrap();
        assert!(matches.contains(&"z2z5".to_string()), "{matches:?}");
    }

    #[test]
    fn selection_rule() {
        let p = |l: &str| PauliString::parse(l, 4).unwrap();
        assert!(!coupling_selection_rule(&p("x2"), Axis::Z));
        assert!(!coupling_selection_rule(&p("z1y2"), Axis::Z));
        assert!(coupling_selection_rule(&p("x1x2"), Axis::Z));
        assert!(coupling_selection_rule(&PauliString::identity(4).unwrap(), Axis::Z));
        let g = calogero_positions(4).unwrap();
        let rows = matrix_element_table(&g, &[PauliString::identity(4).unwrap()]).unwrap();
        assert!(rows[0].value.norm() < 1e-12);
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("5:5:1").unwrap(), vec![5.0]);
        let g = parse_grid("10:40:0.1").unwrap();
        assert_eq!(g.len(), 301);
        assert_eq!(g[15], 11.5);
        assert_eq!(g[300], 40.0);
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("2:1:0.1").is_err());
        assert!(parse_grid("1:2:0").is_err());
        assert!(parse_grid("a:2:0.1").is_err());
    }

    #[test]
    fn extrema_and_slope() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        let ys = [3.0, 1.0, 2.0, 0.5, 4.0];
        assert_eq!(local_minima(&xs, &ys), vec![(2.0, 1.0), (4.0, 0.5)]);
        assert_eq!(local_maxima(&xs, &ys), vec![(3.0, 2.0)]);
        let pts: Vec<(f64, f64)> = (1..6).map(|i| (i as f64, 3.0 / (i as f64).powi(2))).collect();
        assert!((loglog_slope(&pts).unwrap() + 2.0).abs() < 1e-12);
        assert!(loglog_slope(&pts[..1]).is_err());
    }

    #[test]
    fn time_budgets() {
        let b4 = two_qubit_time_budget(&calogero_positions(4).unwrap()).unwrap();
        assert!(b4.min_neighbor > 0.86 && b4.max_neighbor < 1.0);
        assert!((b4.max_distant - 8.56).abs() < 0.01);
        let b2 = two_qubit_time_budget(&calogero_positions(2).unwrap()).unwrap();
        assert_eq!(b2.pairs.len(), 1);
        assert_eq!(b2.min_neighbor, b2.max_neighbor);
    }

    #[test]
    fn diagnostic_phases() {
        let g = calogero_positions(4).unwrap();
        let gate = ResonantGate::new(&g, &PauliString::parse("z2z3", 4).unwrap()).unwrap();
        let at_zero = phase_alignment_diagnostic(&gate, 0.0).unwrap();
        assert_eq!(at_zero.len(), TRACKED_PAIRS);
        assert!(at_zero.iter().all(|p| p.phase_at_half == 0.0));
        let best = phase_alignment_diagnostic(&gate, 11.55).unwrap();
        assert!(best.iter().all(|p| p.phase_at_half.abs() < 0.5), "{best:?}");
    }

    #[test]
    fn sweep_single_point_and_order() {
        let g = calogero_positions(4).unwrap();
        let gate = ResonantGate::new(&g, &PauliString::parse("z2z3", 4).unwrap()).unwrap();
        let one = error_sweep(&gate, &[5.0], &RunOptions::default()).unwrap();
        assert_eq!(one.rows.len(), 1);
        let grid = [11.5, 11.55, 11.6];
        let sweep = error_sweep(&gate, &grid, &RunOptions::default()).unwrap();
        assert_eq!(sweep.t_d(), grid.to_vec());
        assert!(sweep.rows[1].error_halfway < 1e-3);
        assert!(error_sweep(&gate, &[2.0, 1.0], &RunOptions::default()).is_err());
    }
}

//! The BFN iteration driver: forward and backward sweeps per regime, error
//! records, oracle comparisons, decrease-rate profiles and the ill-posedness
//! diagnostic for spatially supported gains on the viscous linear equation.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::burgers::cole_hopf::{cole_hopf_reference, k0_sweep};
use crate::burgers::inviscid::{
    observation_gradient_bound, observation_trajectory, proposition7_check, solve_inviscid_burgers,
    theorem6_bound_check, BoundSample,
};
use crate::characteristics::{
    chi, observability_certificate, shock_time, solve_inviscid_linear, trace, BoundaryData,
    CharacteristicRun, ObservabilityCertificate, Velocity,
};
use crate::equation::{Advection, EquationClass, EquationSpec};
use crate::error::{BfnError, Result};
use crate::field::{l2_norm, Field, Profile};
use crate::gain::{Gain, Support};
use crate::grid::Grid1D;
use crate::interp::resample_periodic;
use crate::linear_pde::{
    backward_solve_modal, from_interior, interior, modal_propagator, select_integrator,
    sine_rates, solve_forward_linear, theorem1_oracle, LinearIntegrator, Nudging,
    DEFAULT_AMPLIFICATION_CAP,
};
use crate::spectral::SineTransform;
use crate::trajectory::{Observations, Stepping, Sweep, Trajectory};

/// Nodes where `|w0|` is below this fraction of `max |w0|` get no rate.
pub const RATE_EXCLUSION: f64 = 1e-10;

/// Initial data: a named profile or raw node values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldSource {
    Profile(Profile),
    Samples(Vec<f64>),
}

impl FieldSource {
    pub fn sample(&self, grid: Grid1D) -> Result<Field> {
        match self {
            FieldSource::Profile(p) => Ok(p.sample(grid)),
            FieldSource::Samples(v) => Field::new(grid, v.clone(), 0.0),
        }
    }
}

impl From<Profile> for FieldSource {
    fn from(p: Profile) -> Self {
        FieldSource::Profile(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BfnConfig {
    pub spec: EquationSpec,
    pub gain: Gain,
    pub u0: FieldSource,
    pub uobs0: FieldSource,
    pub iterations: usize,
    /// Steps per sweep.
    pub nt: usize,
    /// Snapshot stride of grid solvers; characteristic sweeps keep every step.
    pub record_every: usize,
}

impl BfnConfig {
    pub fn new(spec: EquationSpec, gain: Gain, u0: impl Into<FieldSource>, uobs0: impl Into<FieldSource>) -> Self {
        Self {
            spec,
            gain,
            u0: u0.into(),
            uobs0: uobs0.into(),
            iterations: 1,
            nt: 2048,
            record_every: 1,
        }
    }

    pub fn with_iterations(mut self, iterations: usize) -> Self {
        self.iterations = iterations;
        self
    }

    pub fn with_nt(mut self, nt: usize) -> Self {
        self.nt = nt;
        self
    }

    pub fn with_record_every(mut self, record_every: usize) -> Self {
        self.record_every = record_every;
        self
    }

    fn stepping(&self) -> Stepping {
        Stepping::with_stride(self.nt, self.record_every)
    }

    /// Samples both fields and checks the invariants.
    pub fn validate(&self) -> Result<(Field, Field)> {
        if self.iterations == 0 {
            return Err(BfnError::Config("iterations must be at least 1".into()));
        }
        self.stepping().validate()?;
        let grid = self.spec.grid();
        let u0 = self.u0.sample(grid)?;
        let uobs0 = self.uobs0.sample(grid)?;
        if self.spec.class() == EquationClass::InviscidBurgers {
            let t = self.spec.t_final();
            for (name, f) in [("u0", &u0), ("uobs0", &uobs0)] {
                let ts = shock_time(f);
                if t >= ts {
                    return Err(BfnError::Config(format!(
                        "T = {t} is not below the shock time {ts:.6} of {name}"
                    )));
                }
            }
        }
        Ok((u0, uobs0))
    }
}

/// Theory results a run can be compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleCase {
    /// Viscous linear, constant or windowed gain: `w~(t) = e^{-(K+K')|[t,T]∩W|} w(t)`.
    Theorem1,
    /// Inviscid linear: the same ratio along each characteristic.
    Theorem4,
    /// Inviscid Bürgers norm bound; the deviation is the largest violation.
    Theorem6,
    /// Inviscid Bürgers along-curve error formula.
    Proposition7,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub w0_norm: f64,
    pub wt_norm: f64,
    pub wtilde0_norm: f64,
    /// `||w(t)||` at the stored times.
    pub forward_norms: Vec<f64>,
    /// `||w~(t)||` at the stored times.
    pub backward_norms: Vec<f64>,
}

impl IterationRecord {
    pub fn contraction(&self) -> Option<f64> {
        (self.w0_norm > 0.0).then(|| self.wtilde0_norm / self.w0_norm)
    }
}

/// First-iteration `w0`, `w~0` and `-ln(w~0 / w0)` on the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateProfile {
    pub x: Vec<f64>,
    pub w0: Vec<f64>,
    pub wtilde0: Vec<f64>,
    pub rate: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Flags {
    pub integrator: Option<LinearIntegrator>,
    pub observability: Option<ObservabilityCertificate>,
    /// `max_t ||d_x u_obs(t)||_inf` (inviscid Bürgers).
    pub m_bound: Option<f64>,
    /// Grid nodes without a decrease rate.
    pub excluded_nodes: Vec<usize>,
    /// Modes refused by the backward amplification cap, summed over iterations.
    pub truncated_modes: usize,
    /// `||S_-(0,T) w~(0) - w(T)|| / ||w(T)||` for closed-form backward fields
    /// re-evolved on the finite-difference path.
    pub backward_mismatch: Option<f64>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BfnReport {
    pub class: EquationClass,
    pub times: Vec<f64>,
    pub iterations: Vec<IterationRecord>,
    pub profile: RateProfile,
    /// Occupation times of the first forward sweep's curves (inviscid runs).
    pub chi: Option<Vec<f64>>,
    pub oracle: BTreeMap<OracleCase, f64>,
    /// Norm-bound samples of the first iteration (inviscid Bürgers, uniform gain).
    pub bound_samples: Option<Vec<BoundSample>>,
    pub flags: Flags,
}

/// `-ln(w~0(x) / w0(x))` per node; `None` where `|w0|` is negligible or the
/// ratio is not positive.
pub fn decrease_rate_profile(w0: &Field, wtilde0: &Field) -> Result<Vec<Option<f64>>> {
    if w0.grid() != wtilde0.grid() {
        return Err(BfnError::InvalidField("rate profile needs fields on one grid".into()));
    }
    let floor = RATE_EXCLUSION * w0.max_abs();
    Ok(w0
        .values()
        .iter()
        .zip(wtilde0.values())
        .map(|(&a, &b)| {
            if a.abs() <= floor || a == 0.0 {
                return None;
            }
            let ratio = b / a;
            (ratio > 0.0).then(|| -ratio.ln())
        })
        .collect())
}

fn profile_of(w0: &Field, wtilde0: &Field, flags: &mut Flags) -> Result<RateProfile> {
    let rate = decrease_rate_profile(w0, wtilde0)?;
    flags.excluded_nodes = rate
        .iter()
        .enumerate()
        .filter_map(|(j, r)| r.is_none().then_some(j))
        .collect();
    Ok(RateProfile {
        x: w0.grid().nodes(),
        w0: w0.values().to_vec(),
        wtilde0: wtilde0.values().to_vec(),
        rate,
    })
}

fn error_norms(u: &Trajectory, obs: &Trajectory) -> Result<Vec<f64>> {
    u.snapshots()
        .iter()
        .zip(obs.snapshots())
        .map(|(a, b)| Ok(l2_norm(&a.sub(b)?)))
        .collect()
}

/// Error carried by the curves at stored time `i`, resampled on the grid.
fn curve_error_field(run: &CharacteristicRun, i: usize) -> Result<Field> {
    let grid = run.trajectory.spec().grid();
    let t = run.chars.times()[i];
    let values = resample_periodic(&run.chars.lifted_at(i), &run.errors_at(i), grid.n())?;
    Field::new(grid, values, t)
}

fn curve_error_norms(run: &CharacteristicRun) -> Result<Vec<f64>> {
    (0..run.chars.times().len())
        .map(|i| Ok(l2_norm(&curve_error_field(run, i)?)))
        .collect()
}

/// Discrete L2 norm of values carried by curves whose feet are the grid nodes.
fn foot_norm(values: &[f64]) -> f64 {
    let h = 1.0 / values.len() as f64;
    (h * values.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

/// Output of one sweep pair.
struct Step {
    w0: Field,
    wt_norm: f64,
    next_u0: Field,
    wtilde0: Field,
    forward_norms: Vec<f64>,
    backward_norms: Vec<f64>,
}

/// Runs the configured number of BFN iterations.
pub fn run_bfn(cfg: &BfnConfig) -> Result<BfnReport> {
    let (u0, uobs0) = cfg.validate()?;
    match cfg.spec.class() {
        EquationClass::ViscousLinear => run_viscous_linear(cfg, u0, uobs0),
        EquationClass::InviscidLinear => run_inviscid_linear(cfg, u0, uobs0),
        EquationClass::InviscidBurgers => run_inviscid_burgers(cfg, u0, uobs0),
        EquationClass::ViscousBurgers => run_viscous_burgers(cfg, u0, uobs0),
    }
}

fn assemble(
    cfg: &BfnConfig,
    times: Vec<f64>,
    steps: Vec<Step>,
    mut flags: Flags,
    chi: Option<Vec<f64>>,
    oracle: BTreeMap<OracleCase, f64>,
    bound_samples: Option<Vec<BoundSample>>,
) -> Result<BfnReport> {
    let profile = profile_of(&steps[0].w0, &steps[0].wtilde0, &mut flags)?;
    let iterations = steps
        .into_iter()
        .enumerate()
        .map(|(j, s)| IterationRecord {
            iteration: j + 1,
            w0_norm: l2_norm(&s.w0),
            wt_norm: s.wt_norm,
            wtilde0_norm: l2_norm(&s.wtilde0),
            forward_norms: s.forward_norms,
            backward_norms: s.backward_norms,
        })
        .collect();
    Ok(BfnReport {
        class: cfg.spec.class(),
        times,
        iterations,
        profile,
        chi,
        oracle,
        bound_samples,
        flags,
    })
}

fn run_viscous_linear(cfg: &BfnConfig, u0: Field, uobs0: Field) -> Result<BfnReport> {
    let (spec, gain) = (&cfg.spec, &cfg.gain);
    if !gain.is_spatially_uniform() {
        return Err(BfnError::UnsupportedRegime {
            anchor: "Theorem 1, case 2".into(),
            reason: "with a spatially supported gain the backward initial field does not exist in \
                     general; quantify the gap with illposedness_diagnostic"
                .into(),
        });
    }
    let integrator = select_integrator(spec, gain)?;
    let stepping = cfg.stepping();
    let t_final = spec.t_final();
    let zero = Gain::zero();
    let obs_tr = solve_forward_linear(spec, &zero, Nudging::Damping, &uobs0, &Observations::Zero, stepping)?;
    let obs = Observations::Free(uobs0.clone());
    let mut flags = Flags {
        integrator: Some(integrator),
        ..Flags::default()
    };
    let mut oracle = BTreeMap::new();
    let mut steps = Vec::with_capacity(cfg.iterations);
    let mut u = u0;
    for it in 0..cfg.iterations {
        let fwd = solve_forward_linear(spec, gain, Nudging::Damping, &u, &obs, stepping)?;
        let w0 = u.sub(&uobs0)?;
        let w_t = fwd.last().sub(obs_tr.last())?;
        let wtilde0 = match integrator {
            LinearIntegrator::CrankNicolson => {
                w0.scaled((-(1.0 + gain.kappa()) * gain.temporal_exposure(0.0, t_final)).exp())
            }
            _ => {
                let rec = backward_solve_modal(spec, gain, &w_t, DEFAULT_AMPLIFICATION_CAP)?;
                flags.truncated_modes += rec.truncated_modes;
                rec.field
            }
        };
        // backward sweep as the anti-damped system run forward from w~(0)
        let bwd = solve_forward_linear(spec, gain, Nudging::AntiDamping, &wtilde0, &Observations::Zero, stepping)?;
        let w_norm_t = l2_norm(&w_t);
        if integrator == LinearIntegrator::CrankNicolson && it == 0 {
            let gap = l2_norm(&bwd.last().sub(&w_t)?);
            flags.backward_mismatch = Some(if w_norm_t > 0.0 { gap / w_norm_t } else { gap });
        }
        let forward_norms = error_norms(&fwd, &obs_tr)?;
        let backward_norms: Vec<f64> = bwd.snapshots().iter().map(l2_norm).collect();
        if it == 0 {
            let scale = l2_norm(&w0);
            let mut worst: f64 = 0.0;
            for ((uf, of), wb) in fwd.snapshots().iter().zip(obs_tr.snapshots()).zip(bwd.snapshots()) {
                let w = uf.sub(of)?;
                let ratio = theorem1_oracle(gain, t_final, uf.time())?;
                let dev = l2_norm(&wb.sub(&w.scaled(ratio))?);
                worst = worst.max(if scale > 0.0 { dev / scale } else { dev });
            }
            oracle.insert(OracleCase::Theorem1, worst);
        }
        let next = uobs0.add(&wtilde0)?;
        steps.push(Step {
            w0,
            wt_norm: w_norm_t,
            next_u0: next.clone(),
            wtilde0,
            forward_norms,
            backward_norms,
        });
        u = next;
    }
    debug_assert!(steps.iter().all(|s| s.next_u0.grid() == u.grid()));
    assemble(cfg, obs_tr.times().to_vec(), steps, flags, None, oracle, None)
}

fn run_inviscid_linear(cfg: &BfnConfig, u0: Field, uobs0: Field) -> Result<BfnReport> {
    let (spec, gain) = (&cfg.spec, &cfg.gain);
    let grid = spec.grid();
    let t_final = spec.t_final();
    let cf = trace(&Velocity::from_spec(spec)?, &grid.nodes(), t_final, cfg.nt)?;
    let obs = Observations::Free(uobs0.clone());
    let chi_values = chi(gain, &cf);
    let mut flags = Flags {
        observability: Some(observability_certificate(gain, &cf, 0.0)),
        ..Flags::default()
    };
    let mut oracle = BTreeMap::new();
    let mut steps = Vec::with_capacity(cfg.iterations);
    let mut u = u0;
    for it in 0..cfg.iterations {
        let fwd = solve_inviscid_linear(spec, gain, Sweep::Forward, &BoundaryData::Initial(u.clone()), &obs, &cf)?;
        let bwd = solve_inviscid_linear(spec, gain, Sweep::Backward, &fwd.final_carried(), &obs, &cf)?;
        let last = cf.times().len() - 1;
        let w0 = u.sub(&uobs0)?;
        let wtilde0 = Field::new(grid, bwd.errors_at(0), 0.0)?;
        let next = Field::new(grid, bwd.chars.carried_at(0).expect("runs carry values"), 0.0)?;
        if it == 0 {
            oracle.insert(OracleCase::Theorem4, theorem4_deviation(gain, &fwd, &bwd));
        }
        steps.push(Step {
            wt_norm: foot_norm(&fwd.errors_at(last)),
            forward_norms: (0..=last).map(|i| foot_norm(&fwd.errors_at(i))).collect(),
            backward_norms: (0..=last).map(|i| foot_norm(&bwd.errors_at(i))).collect(),
            w0,
            next_u0: next.clone(),
            wtilde0,
        });
        u = next;
    }
    flags.notes.push("per-time norms are taken over the curves' feet".into());
    assemble(cfg, cf.times().to_vec(), steps, flags, Some(chi_values), oracle, None)
}

/// `max |w~ - e^{-(1+kappa) int_t^T K} w| / max |w(0)|` over feet and stored times.
fn theorem4_deviation(gain: &Gain, fwd: &CharacteristicRun, bwd: &CharacteristicRun) -> f64 {
    let cf = &fwd.chars;
    let times = cf.times();
    let n_t = times.len();
    let scale = 1.0 + gain.kappa();
    let w_max = fwd.errors.iter().map(|w| w[0].abs()).fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for j in 0..cf.n_feet() {
        // tail[i] = int_{t_i}^T K along curve j
        let mut tail = vec![0.0; n_t];
        for i in (0..n_t - 1).rev() {
            tail[i] = tail[i + 1] + cf.integrate_gain(gain, j, times[i], times[i + 1]);
        }
        for i in 0..n_t {
            let predicted = (-scale * tail[i]).exp() * fwd.errors[j][i];
            worst = worst.max((bwd.errors[j][i] - predicted).abs());
        }
    }
    if w_max > 0.0 {
        worst / w_max
    } else {
        worst
    }
}

fn run_inviscid_burgers(cfg: &BfnConfig, u0: Field, uobs0: Field) -> Result<BfnReport> {
    let (spec, gain) = (&cfg.spec, &cfg.gain);
    let obs = Observations::Free(uobs0.clone());
    let mut flags = Flags::default();
    let mut oracle = BTreeMap::new();
    let mut bound_samples = None;
    let mut chi_values = None;
    let mut times = Vec::new();
    let mut steps = Vec::with_capacity(cfg.iterations);
    let mut u = u0;
    for it in 0..cfg.iterations {
        let fwd = solve_inviscid_burgers(spec, gain, Sweep::Forward, &BoundaryData::Initial(u.clone()), &obs, cfg.nt)?;
        let bwd = solve_inviscid_burgers(spec, gain, Sweep::Backward, &fwd.final_carried(), &obs, cfg.nt)?;
        let obs_tr = observation_trajectory(spec, &obs, fwd.trajectory.times())?;
        let w0 = u.sub(&uobs0)?;
        let wtilde0 = curve_error_field(&bwd, 0)?;
        let next = uobs0.add(&wtilde0)?;
        if it == 0 {
            times = fwd.trajectory.times().to_vec();
            let m_bound = observation_gradient_bound(&obs_tr);
            flags.m_bound = Some(m_bound);
            flags.observability = Some(observability_certificate(gain, &fwd.chars, m_bound));
            chi_values = Some(chi(gain, &fwd.chars));
            let p7 = proposition7_check(gain, &fwd, &obs);
            oracle.insert(OracleCase::Proposition7, p7.into_iter().fold(0.0, f64::max));
            if gain.is_spatially_uniform() {
                let samples = theorem6_bound_check(gain, &fwd.trajectory, &bwd.trajectory, &obs_tr, m_bound)?;
                let scale = l2_norm(&w0);
                let violation = samples.iter().map(|s| (s.lhs - s.rhs).max(0.0)).fold(0.0, f64::max);
                oracle.insert(
                    OracleCase::Theorem6,
                    if scale > 0.0 { violation / scale } else { violation },
                );
                bound_samples = Some(samples);
            }
        }
        steps.push(Step {
            wt_norm: l2_norm(&curve_error_field(&fwd, fwd.chars.times().len() - 1)?),
            forward_norms: curve_error_norms(&fwd)?,
            backward_norms: curve_error_norms(&bwd)?,
            w0,
            next_u0: next.clone(),
            wtilde0,
        });
        u = next;
    }
    assemble(cfg, times, steps, flags, chi_values, oracle, bound_samples)
}

fn run_viscous_burgers(cfg: &BfnConfig, u0: Field, uobs0: Field) -> Result<BfnReport> {
    let (spec, gain) = (&cfg.spec, &cfg.gain);
    if gain.amplitude() > 0.0 {
        return Err(BfnError::UnsupportedRegime {
            anchor: "Theorem 2".into(),
            reason: "for K > 0 the viscous Bürgers backward final condition does not exist in \
                     general; see the growth of its coefficients with bn_sequence (bn-growth)"
                .into(),
        });
    }
    let stepping = cfg.stepping();
    let obs_tr = cole_hopf_reference(spec, &uobs0, stepping)?;
    let mut flags = Flags::default();
    flags.notes.push("K = 0: both sweeps solved through the heat equation".into());
    let mut steps = Vec::with_capacity(cfg.iterations);
    let mut u = u0;
    for _ in 0..cfg.iterations {
        let (u_t, next, refused) = k0_sweep(spec, &u, DEFAULT_AMPLIFICATION_CAP)?;
        flags.truncated_modes += refused;
        let fwd = cole_hopf_reference(spec, &u, stepping)?;
        let bwd = cole_hopf_reference(spec, &next, stepping)?;
        let w0 = u.sub(&uobs0)?;
        let wtilde0 = next.sub(&uobs0)?;
        steps.push(Step {
            wt_norm: l2_norm(&u_t.sub(obs_tr.last())?),
            forward_norms: error_norms(&fwd, &obs_tr)?,
            backward_norms: error_norms(&bwd, &obs_tr)?,
            w0,
            next_u0: next.clone(),
            wtilde0,
        });
        u = next;
    }
    assemble(cfg, obs_tr.times().to_vec(), steps, flags, None, BTreeMap::new(), None)
}

/// Looks up one oracle comparison of a report.
pub fn oracle_deviation(report: &BfnReport, case: OracleCase) -> Result<f64> {
    report
        .oracle
        .get(&case)
        .copied()
        .ok_or_else(|| BfnError::NoOracle(format!("{case:?} was not evaluated for a {:?} run", report.class)))
}

/// Least-squares distance of `w(T)` from the image of the anti-damped
/// evolution restricted to modes below the amplification cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IllPosedness {
    pub residual: f64,
    /// Same pipeline with the gain spread over the whole domain.
    pub reference_residual: f64,
    /// `residual / max(reference_residual, f64::EPSILON)`.
    pub ratio: f64,
    pub kept_modes: usize,
}

pub fn illposedness_diagnostic(spec: &EquationSpec, gain: &Gain, w0: &Field) -> Result<IllPosedness> {
    if spec.class() != EquationClass::ViscousLinear || *spec.advection() != Advection::Constant(0.0) {
        return Err(BfnError::InvalidSpec(
            "the diagnostic needs the viscous linear equation with c = 0".into(),
        ));
    }
    if *w0.grid() != spec.grid() {
        return Err(BfnError::InvalidArgument("w0 does not live on the equation's grid".into()));
    }
    let (residual, kept) = preimage_residual(spec, gain, w0)?;
    let full = gain.with_support(Support::Full)?;
    let (reference_residual, _) = preimage_residual(spec, &full, w0)?;
    Ok(IllPosedness {
        residual,
        reference_residual,
        ratio: residual / reference_residual.max(f64::EPSILON),
        kept_modes: kept,
    })
}

fn preimage_residual(spec: &EquationSpec, gain: &Gain, w0: &Field) -> Result<(f64, usize)> {
    let t_final = spec.t_final();
    let m = spec.grid().n() - 2;
    let dst = SineTransform::new(m);
    let c0 = DVector::from_vec(dst.analyze(interior(w0)));
    let w_t = modal_propagator(spec, gain, Nudging::Damping, 0.0, t_final) * c0;
    let target = w_t.norm();
    let kept: Vec<usize> = sine_rates(spec)
        .iter()
        .enumerate()
        .filter_map(|(k, r)| (r * t_final <= DEFAULT_AMPLIFICATION_CAP).then_some(k))
        .collect();
    if kept.is_empty() {
        return Err(BfnError::Truncation {
            refused_modes: m,
            refused_energy_fraction: 1.0,
        });
    }
    if target == 0.0 {
        return Ok((0.0, kept.len()));
    }
    let anti = modal_propagator(spec, gain, Nudging::AntiDamping, 0.0, t_final);
    let mut a = DMatrix::<f64>::zeros(m, kept.len());
    for (col, &k) in kept.iter().enumerate() {
        let column = anti.column(k);
        let norm = column.norm();
        a.set_column(col, &(column / norm));
    }
    let svd = a.clone().svd(true, true);
    let phi = svd
        .solve(&w_t, f64::EPSILON)
        .map_err(|e| BfnError::InvalidArgument(format!("least squares failed: {e}")))?;
    Ok(((a * phi - w_t).norm() / target, kept.len()))
}

/// Initial error recovered for a single field (used by tests and the FFI).
pub fn modal_field(spec: &EquationSpec, coeffs: &[f64]) -> Result<Field> {
    let m = spec.grid().n() - 2;
    if coeffs.len() > m {
        return Err(BfnError::InvalidArgument(format!("at most {m} sine modes fit the grid")));
    }
    let mut full = vec![0.0; m];
    full[..coeffs.len()].copy_from_slice(coeffs);
    Ok(from_interior(spec.grid(), &SineTransform::new(m).synthesize(&full), 0.0))
}

/// The two setups of the decrease-rate figure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Figure1Variant {
    Linear,
    Burgers,
}

/// Default amplitude of the Bürgers setup.
pub const FIGURE1_BURGERS_ALPHA: f64 = 0.2;

/// `alpha` for `u0 = alpha sin(2 pi x)`: 1 for transport (rates do not depend
/// on it); for Bürgers the default unless `T` would reach the shock time
/// `1 / (2 pi alpha)`, in which case `0.9 / (2 pi T)`.
pub fn figure1_alpha(variant: Figure1Variant, t_final: f64) -> f64 {
    match variant {
        Figure1Variant::Linear => 1.0,
        Figure1Variant::Burgers => FIGURE1_BURGERS_ALPHA.min(0.9 / (2.0 * PI * t_final)),
    }
}

/// `u_obs = 0`, `u0 = alpha sin(2 pi x)`, `K = K' = 1` on `[0, 0.5]`, periodic grid.
pub fn figure1_config(variant: Figure1Variant, t_final: f64, n: usize, nt: usize) -> Result<BfnConfig> {
    let spec = match variant {
        Figure1Variant::Linear => EquationSpec::inviscid_linear(Advection::Constant(1.0), n, t_final)?,
        Figure1Variant::Burgers => EquationSpec::inviscid_burgers(n, t_final)?,
    };
    let gain = Gain::spatial(1.0, 1.0, 0.0, 0.5)?;
    let alpha = figure1_alpha(variant, t_final);
    Ok(BfnConfig::new(spec, gain, Profile::sin_2pi(alpha), Profile::Zero).with_nt(nt))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine_modes(spec: &EquationSpec) -> Field {
        modal_field(spec, &[1.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.25]).unwrap()
    }

    #[test]
    fn rate_profile_sentinels() {
        let g = Grid1D::periodic(4).unwrap();
        let w0 = Field::new(g, vec![0.0, 1.0, -2.0, 1.0], 0.0).unwrap();
        let wt = Field::new(g, vec![0.0, (-2.0f64).exp(), 1.0, 0.5], 0.0).unwrap();
        let r = decrease_rate_profile(&w0, &wt).unwrap();
        assert_eq!(r[0], None);
        assert!((r[1].unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(r[2], None);
        assert!((r[3].unwrap() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn viscous_constant_gain_matches_oracle() {
        let spec = EquationSpec::viscous_linear(0.01, 0.0, 129, 1.0).unwrap();
        let u0 = sine_modes(&spec);
        let cfg = BfnConfig::new(spec.clone(), Gain::constant(1.0, 1.0).unwrap(), FieldSource::Samples(u0.values().to_vec()), Profile::Zero)
            .with_nt(64);
        let rep = run_bfn(&cfg).unwrap();
        let dev = oracle_deviation(&rep, OracleCase::Theorem1).unwrap();
        assert!(dev < 1e-10, "{dev:e} {:?}", rep.flags);
        let c = rep.iterations[0].contraction().unwrap();
        assert!((c - (-2.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn spatial_gain_is_refused() {
        let spec = EquationSpec::viscous_linear(0.01, 0.0, 65, 1.0).unwrap();
        let cfg = BfnConfig::new(spec, Gain::spatial(1.0, 1.0, 0.0, 0.5).unwrap(), Profile::sin_pi(1.0), Profile::Zero);
        match run_bfn(&cfg) {
            Err(BfnError::UnsupportedRegime { anchor, .. }) => assert!(anchor.contains("Theorem 1")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn viscous_burgers_with_gain_is_refused() {
        let spec = EquationSpec::viscous_burgers(0.05, 65, 0.5).unwrap();
        let cfg = BfnConfig::new(spec, Gain::constant(1.0, 1.0).unwrap(), Profile::sin_pi(0.2), Profile::Zero);
        match run_bfn(&cfg) {
            Err(BfnError::UnsupportedRegime { anchor, reason }) => {
                assert_eq!(anchor, "Theorem 2");
                assert!(reason.contains("bn_sequence"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fixed_point_has_zero_norms() {
        let spec = EquationSpec::inviscid_linear(Advection::Constant(1.0), 64, 0.5).unwrap();
        let p = Profile::sin_2pi(0.3);
        let cfg = BfnConfig::new(spec, Gain::constant(1.0, 1.0).unwrap(), p, p).with_nt(32);
        let rep = run_bfn(&cfg).unwrap();
        let it = &rep.iterations[0];
        assert_eq!((it.w0_norm, it.wt_norm, it.wtilde0_norm), (0.0, 0.0, 0.0));
        assert_eq!(oracle_deviation(&rep, OracleCase::Theorem4).unwrap(), 0.0);
    }

    #[test]
    fn full_support_has_exact_preimage() {
        let spec = EquationSpec::viscous_linear(0.01, 0.0, 65, 1.0).unwrap();
        let d = illposedness_diagnostic(&spec, &Gain::constant(1.0, 1.0).unwrap(), &sine_modes(&spec)).unwrap();
        assert!(d.residual <= 1e-8 && d.reference_residual <= 1e-8, "{d:?}");
    }

    #[test]
    fn burgers_alpha_stays_below_shock() {
        assert_eq!(figure1_alpha(Figure1Variant::Burgers, 0.05), 0.2);
        let a = figure1_alpha(Figure1Variant::Burgers, 1.0);
        assert!(1.0 < 1.0 / (2.0 * PI * a));
    }
}

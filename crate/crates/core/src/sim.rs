//! Fixed-step integration of the closed loops, reconstruction of the group
//! trajectory, transport checks, and linearization at equilibria.
//!
//! The integrated vector is the phase point (Π, P, advected fields) in the
//! flat layout of [`crate::poisson::PhasePoint::to_flat`]; body velocities
//! are recovered through the inverse Legendre map.

use nalgebra::{Complex, DMatrix};

use crate::algebra::{hat, orthogonality_residual, AlgebraVector, Mat3, SE3Element, Vec3, Vec4};
use crate::control::ClosedLoop;
use crate::error::{Error, Result};
use crate::poisson::{casimirs, BracketId, PhasePoint};
use crate::scenario::Scenario;
use crate::systems::{
    legendre, legendre_inverse, InertiaParams, ReducedRate, ReducedState, SystemId,
};

/// Orthogonality residual above which reconstruction projects R back onto SO(3).
pub const REPAIR_TOL: f64 = 1e-9;
/// Largest |rhs| accepted at a point passed to [`linearize`].
pub const EQUILIBRIUM_TOL: f64 = 1e-10;
pub const DEFAULT_FD_STEP: f64 = 1e-6;
/// Below this max real part a spectrum is reported as spectrally stable.
pub const STABLE_TOL: f64 = 1e-6;
/// Above this max real part a spectrum is reported as unstable.
pub const UNSTABLE_TOL: f64 = 1e-4;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Method {
    #[default]
    Rk4,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub step: f64,
    pub t_final: f64,
    pub method: Method,
}

impl IntegratorConfig {
    pub fn new(step: f64, t_final: f64) -> Result<Self> {
        let c = Self {
            step,
            t_final,
            method: Method::Rk4,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::validation(
                "integrator.step",
                "step must be positive and finite",
            ));
        }
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(Error::validation(
                "integrator.t_final",
                "t_final must be positive and finite",
            ));
        }
        if self.step > self.t_final {
            return Err(Error::validation("integrator.step", "step exceeds t_final"));
        }
        Ok(())
    }

    /// Sample times 0, h, 2h, …, t_final; the last step is shortened if h
    /// does not divide t_final.
    pub fn times(&self) -> Vec<f64> {
        let n = (self.t_final / self.step - 1e-9).ceil().max(1.0) as usize;
        let mut t: Vec<f64> = (0..n).map(|k| k as f64 * self.step).collect();
        t.push(self.t_final);
        t
    }
}

/// Flat coordinates of the reduced state for one closed loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub bracket: BracketId,
    pub system: SystemId,
}

impl Layout {
    pub fn of(cl: &ClosedLoop, state: &ReducedState) -> Self {
        Self {
            bracket: cl.bracket_id(state),
            system: cl.system,
        }
    }

    pub fn dim(&self) -> usize {
        self.bracket.dim()
    }

    pub fn flatten(&self, p: &InertiaParams, s: &ReducedState) -> Result<Vec<f64>> {
        PhasePoint::from_reduced(&legendre(p, &s.xi), s).to_flat(self.bracket)
    }

    pub fn unflatten(&self, p: &InertiaParams, x: &[f64]) -> Result<ReducedState> {
        let z = PhasePoint::from_flat(self.bracket, x)?;
        let xi = legendre_inverse(p, &crate::algebra::MomentumCovector::new(z.pi, z.p))?;
        let mut s = ReducedState {
            xi,
            theta: z.theta,
            ..Default::default()
        };
        let gamma = z.gamma.ok_or(Error::MissingField("gamma"))?;
        match self.system {
            SystemId::UnderwaterVehicle => s.a_r3 = Some(gamma),
            SystemId::HeavyTopMovableBase => s.a_r4 = Some(Vec4::new(gamma, z.h.unwrap_or(0.0))),
        }
        s.deltas = z.d1.zip(z.d2);
        Ok(s)
    }

    pub fn flatten_rate(&self, r: &ReducedRate) -> Result<Vec<f64>> {
        rate_point(r).to_flat(self.bracket)
    }
}

/// A rate of the reduced system arranged as a phase point.
pub fn rate_point(r: &ReducedRate) -> PhasePoint {
    PhasePoint {
        pi: r.momentum.pi,
        p: r.momentum.p,
        gamma: r.a_r3.or(r.a_r4.map(|a| a.spatial)),
        h: r.a_r4.map(|a| a.scalar),
        theta: r.theta,
        d1: r.deltas.map(|d| d.0),
        d2: r.deltas.map(|d| d.1),
    }
}

/// The closed-loop vector field on flat coordinates.
pub fn flat_rhs<'a>(
    cl: &'a ClosedLoop,
    layout: Layout,
) -> impl Fn(&[f64]) -> Result<Vec<f64>> + 'a {
    move |x: &[f64]| {
        let s = layout.unflatten(&cl.params, x)?;
        layout.flatten_rate(&cl.rhs(&s)?)
    }
}

fn all_finite(x: &[f64]) -> bool {
    x.iter().all(|c| c.is_finite())
}

fn axpy(x: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    x.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

/// One classical RK4 step of size h from x at time t.
pub fn rk4_step(
    rhs: &dyn Fn(&[f64]) -> Result<Vec<f64>>,
    x: &[f64],
    h: f64,
    t: f64,
) -> Result<Vec<f64>> {
    let stage = |y: &[f64]| -> Result<Vec<f64>> {
        let k = rhs(y)?;
        if all_finite(&k) && all_finite(y) {
            Ok(k)
        } else {
            Err(Error::NonFiniteState { t })
        }
    };
    let k1 = stage(x)?;
    let k2 = stage(&axpy(x, 0.5 * h, &k1))?;
    let k3 = stage(&axpy(x, 0.5 * h, &k2))?;
    let k4 = stage(&axpy(x, h, &k3))?;
    let out: Vec<f64> = (0..x.len())
        .map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    if all_finite(&out) {
        Ok(out)
    } else {
        Err(Error::NonFiniteState { t: t + h })
    }
}

/// Integrates x' = rhs(x) over the given sample times, returning every sample.
pub fn integrate(
    rhs: &dyn Fn(&[f64]) -> Result<Vec<f64>>,
    x0: &[f64],
    times: &[f64],
) -> Result<Vec<Vec<f64>>> {
    if !all_finite(x0) {
        return Err(Error::NonFiniteState {
            t: times.first().copied().unwrap_or(0.0),
        });
    }
    let mut out = Vec::with_capacity(times.len());
    out.push(x0.to_vec());
    for w in times.windows(2) {
        let next = rk4_step(rhs, out.last().unwrap(), w[1] - w[0], w[0])?;
        out.push(next);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ReducedState>,
    /// ξ̇ at each sample, used to interpolate ξ inside a step.
    pub xi_rates: Vec<AlgebraVector>,
    pub layout: Layout,
    pub energy: Vec<f64>,
    pub casimir_names: Vec<&'static str>,
    /// casimirs[k][j] is Casimir j at sample k.
    pub casimirs: Vec<Vec<f64>>,
    /// Group samples, filled by [`simulate_with_poses`] or [`reconstruct`].
    pub poses: Option<Vec<SE3Element>>,
}

/// Initial, final and worst deviation of one monitored quantity.
#[derive(Clone, Debug, PartialEq)]
pub struct ConservationRow {
    pub name: String,
    pub initial: f64,
    pub final_value: f64,
    pub max_drift: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn conservation(&self) -> Vec<ConservationRow> {
        let row = |name: &str, v: &mut dyn Iterator<Item = f64>| {
            let vals: Vec<f64> = v.collect();
            let first = vals[0];
            ConservationRow {
                name: name.to_string(),
                initial: first,
                final_value: *vals.last().unwrap(),
                max_drift: vals.iter().map(|x| (x - first).abs()).fold(0.0, f64::max),
            }
        };
        let mut rows = vec![row("energy", &mut self.energy.iter().copied())];
        for (j, name) in self.casimir_names.iter().enumerate() {
            rows.push(row(name, &mut self.casimirs.iter().map(|c| c[j])));
        }
        rows
    }
}

/// Integrates the closed loop from `initial` with diagnostics at every step.
pub fn simulate_loop(
    cl: &ClosedLoop,
    initial: &ReducedState,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    run_loop(cl, initial, cfg, None)
}

/// Like [`simulate_loop`], but also integrates Ṙ = RΩ̂, ẋ = Rv from `s0`
/// inside the same RK4 stages, so advected and transported quantities agree
/// to rounding. R is not re-orthogonalized; see `TransportReport::rotation_residual`.
pub fn simulate_with_poses(
    cl: &ClosedLoop,
    initial: &ReducedState,
    cfg: &IntegratorConfig,
    s0: &SE3Element,
) -> Result<Trajectory> {
    run_loop(cl, initial, cfg, Some(s0))
}

fn pose_to_flat(r: &Mat3, x: &Vec3) -> Vec<f64> {
    r.iter().chain(x.iter()).copied().collect()
}

fn pose_from_flat(x: &[f64]) -> (Mat3, Vec3) {
    (
        Mat3::from_column_slice(&x[..9]),
        Vec3::from_column_slice(&x[9..12]),
    )
}

fn run_loop(
    cl: &ClosedLoop,
    initial: &ReducedState,
    cfg: &IntegratorConfig,
    s0: Option<&SE3Element>,
) -> Result<Trajectory> {
    cfg.validate()?;
    cl.check_state(initial)?;
    let layout = Layout::of(cl, initial);
    let times = cfg.times();
    let rhs = flat_rhs(cl, layout);
    let mut x0 = layout.flatten(&cl.params, initial)?;
    let n = x0.len();
    let flat = match s0 {
        None => integrate(&rhs, &x0, &times)?,
        Some(s0) => {
            x0.extend(pose_to_flat(s0.rotation(), s0.translation()));
            let aug = |x: &[f64]| -> Result<Vec<f64>> {
                let xi = layout.unflatten(&cl.params, &x[..n])?.xi;
                let (r, _) = pose_from_flat(&x[n..]);
                let (dr, dx) = pose_rate(&r, &xi);
                let mut k = rhs(&x[..n])?;
                k.extend(pose_to_flat(&dr, &dx));
                Ok(k)
            };
            if !all_finite(&x0) {
                return Err(Error::NonFiniteState { t: times[0] });
            }
            let mut out = Vec::with_capacity(times.len());
            out.push(x0);
            for w in times.windows(2) {
                // no polar repair here: it would decouple R from the advected fields
                out.push(rk4_step(&aug, out.last().unwrap(), w[1] - w[0], w[0])?);
            }
            out
        }
    };

    let list = casimirs(layout.bracket);
    let mut traj = Trajectory {
        times: times.clone(),
        states: Vec::with_capacity(times.len()),
        xi_rates: Vec::with_capacity(times.len()),
        layout,
        energy: Vec::with_capacity(times.len()),
        casimir_names: list.iter().map(|c| c.name).collect(),
        casimirs: Vec::with_capacity(times.len()),
        poses: None,
    };
    let mut poses = s0.map(|_| Vec::with_capacity(times.len()));
    for (full, t) in flat.iter().zip(&times) {
        let x = &full[..n];
        if let Some(poses) = poses.as_mut() {
            let (r, p) = pose_from_flat(&full[n..]);
            poses.push(SE3Element::new_unchecked(r, p));
        }
        let s = layout.unflatten(&cl.params, x)?;
        let rate = cl.rhs(&s)?;
        let xi_rate = legendre_inverse(&cl.params, &rate.momentum)?;
        let z = PhasePoint::from_flat(layout.bracket, x)?;
        let e = cl.energy(&s)?;
        if !e.is_finite() || !s.is_finite() {
            return Err(Error::NonFiniteState { t: *t });
        }
        traj.energy.push(e);
        traj.casimirs
            .push(list.iter().map(|c| (c.value)(&z)).collect());
        traj.states.push(s);
        traj.xi_rates.push(xi_rate);
    }
    traj.poses = poses;
    Ok(traj)
}

/// Runs a validated scenario.
pub fn simulate(scenario: &Scenario) -> Result<Trajectory> {
    simulate_loop(
        &scenario.closed_loop()?,
        &scenario.initial,
        &scenario.integrator,
    )
}

/// Cubic Hermite interpolant of ξ on [t_k, t_k+1] at fraction θ ∈ [0, 1].
fn hermite(
    x0: &AlgebraVector,
    d0: &AlgebraVector,
    x1: &AlgebraVector,
    d1: &AlgebraVector,
    h: f64,
    s: f64,
) -> AlgebraVector {
    let h00 = 2.0 * s.powi(3) - 3.0 * s * s + 1.0;
    let h10 = s.powi(3) - 2.0 * s * s + s;
    let h01 = -2.0 * s.powi(3) + 3.0 * s * s;
    let h11 = s.powi(3) - s * s;
    *x0 * h00 + *d0 * (h10 * h) + *x1 * h01 + *d1 * (h11 * h)
}

fn pose_rate(r: &Mat3, xi: &AlgebraVector) -> (Mat3, Vec3) {
    (r * hat(&xi.omega), r * xi.vel)
}

/// Nearest rotation to `r` in the Frobenius norm.
pub fn polar_projection(r: &Mat3) -> Mat3 {
    let svd = r.svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut q = u * vt;
    if q.determinant() < 0.0 {
        let mut u = u;
        u.column_mut(2).neg_mut();
        q = u * vt;
    }
    q
}

/// Integrates Ṙ = RΩ̂, ẋ = Rv along an existing trajectory from s0 with RK4,
/// using a cubic Hermite interpolant of ξ at the half steps. Accurate to
/// O(h⁴); prefer [`simulate_with_poses`] when the closed loop is at hand.
pub fn reconstruct(traj: &Trajectory, s0: &SE3Element) -> Result<Trajectory> {
    let mut out = traj.clone();
    let mut poses = Vec::with_capacity(traj.len());
    let (mut r, mut x) = (*s0.rotation(), *s0.translation());
    poses.push(*s0);
    for k in 0..traj.len().saturating_sub(1) {
        let h = traj.times[k + 1] - traj.times[k];
        let (a, b) = (&traj.states[k].xi, &traj.states[k + 1].xi);
        let (da, db) = (&traj.xi_rates[k], &traj.xi_rates[k + 1]);
        let mid = hermite(a, da, b, db, h, 0.5);
        let (kr1, kx1) = pose_rate(&r, a);
        let (kr2, kx2) = pose_rate(&(r + kr1 * (0.5 * h)), &mid);
        let (kr3, kx3) = pose_rate(&(r + kr2 * (0.5 * h)), &mid);
        let (kr4, kx4) = pose_rate(&(r + kr3 * h), b);
        r += (kr1 + kr2 * 2.0 + kr3 * 2.0 + kr4) * (h / 6.0);
        x += (kx1 + kx2 * 2.0 + kx3 * 2.0 + kx4) * (h / 6.0);
        if !r.iter().chain(x.iter()).all(|c| c.is_finite()) {
            return Err(Error::NonFiniteState {
                t: traj.times[k + 1],
            });
        }
        if orthogonality_residual(&r) > REPAIR_TOL {
            r = polar_projection(&r);
        }
        poses.push(SE3Element::new_unchecked(r, x));
    }
    out.poses = Some(poses);
    Ok(out)
}

/// Worst deviation between each advected quantity and its transport along the
/// reconstructed group trajectory, a(t) = s(t)ᵀ σ*(s(0)) a(0). `None` marks
/// a field the trajectory does not carry.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TransportReport {
    pub gamma: Option<f64>,
    pub h: Option<f64>,
    pub theta: Option<f64>,
    pub deltas: Option<f64>,
    /// max |Θ − Δ₁×Δ₂| when Δ is carried, with Θ = Rᵀw₃ if not tracked.
    pub theta_vs_cross: Option<f64>,
    /// max orthogonality residual of the reconstructed rotations.
    pub rotation_residual: f64,
}

impl TransportReport {
    pub fn max(&self) -> f64 {
        [
            self.gamma,
            self.h,
            self.theta,
            self.deltas,
            self.theta_vs_cross,
        ]
        .into_iter()
        .flatten()
        .fold(0.0, f64::max)
    }
}

pub fn transport_residuals(traj: &Trajectory) -> Result<TransportReport> {
    let poses = traj.poses.as_ref().ok_or(Error::MissingField("poses"))?;
    let s0 = poses[0];
    let first = &traj.states[0];
    let r0 = s0.rotation();
    let to_spatial4 = |a: &Vec4| {
        let rg = r0 * a.spatial;
        Vec4::new(rg, a.scalar - s0.translation().dot(&rg))
    };
    let g_sp = first.gamma().map(|g| r0 * g);
    let h_sp = first.a_r4.map(|a| to_spatial4(&a));
    let t_sp = first.theta.map(|t| r0 * t);
    let d_sp = first
        .deltas
        .map(|(a, b)| (to_spatial4(&a), to_spatial4(&b)));
    let w3_sp = first.deltas.map(|(a, b)| r0 * a.spatial.cross(&b.spatial));

    let mut rep = TransportReport::default();
    let upd = |slot: &mut Option<f64>, v: f64| *slot = Some(slot.unwrap_or(0.0).max(v));
    let v4diff = |a: &Vec4, b: &Vec4| (*a - *b).to_vector4().amax();
    for (s, pose) in traj.states.iter().zip(poses) {
        rep.rotation_residual = rep
            .rotation_residual
            .max(orthogonality_residual(pose.rotation()));
        let rt = pose.rotation().transpose();
        if let (Some(g), Some(gs)) = (s.gamma(), g_sp) {
            upd(&mut rep.gamma, (g - rt * gs).amax());
        }
        if let (Some(a), Some(asp)) = (s.a_r4, h_sp) {
            upd(
                &mut rep.h,
                (a.scalar - pose.transpose_apply(&asp).scalar).abs(),
            );
        }
        if let (Some(t), Some(ts)) = (s.theta, t_sp) {
            upd(&mut rep.theta, (t - rt * ts).amax());
        }
        if let (Some((d1, d2)), Some((s1, s2))) = (s.deltas, d_sp) {
            let e = v4diff(&d1, &pose.transpose_apply(&s1))
                .max(v4diff(&d2, &pose.transpose_apply(&s2)));
            upd(&mut rep.deltas, e);
        }
        if let (Some((d1, d2)), Some(w3)) = (s.deltas, w3_sp) {
            // Θ itself when tracked, otherwise Rᵀw₃ from the reconstruction
            let theta = s.theta.unwrap_or(rt * w3);
            upd(
                &mut rep.theta_vs_cross,
                (theta - d1.spatial.cross(&d2.spatial)).amax(),
            );
        }
    }
    Ok(rep)
}

/// Central-difference Jacobian of `rhs` at x0, step eps·(1 + |x_i|).
pub fn linearize(
    rhs: &dyn Fn(&[f64]) -> Result<Vec<f64>>,
    x0: &[f64],
    eps: f64,
) -> Result<DMatrix<f64>> {
    let f0 = rhs(x0)?;
    let residual = f0.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if residual.is_nan() || residual > EQUILIBRIUM_TOL {
        return Err(Error::NotAnEquilibrium { residual });
    }
    let n = x0.len();
    let mut jac = DMatrix::zeros(f0.len(), n);
    let mut x = x0.to_vec();
    for j in 0..n {
        let step = eps * (1.0 + x0[j].abs());
        x[j] = x0[j] + step;
        let fp = rhs(&x)?;
        x[j] = x0[j] - step;
        let fm = rhs(&x)?;
        x[j] = x0[j];
        for i in 0..f0.len() {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * step);
        }
    }
    Ok(jac)
}

const SCHUR_MAX_ITER: usize = 10_000;

pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    if !m.is_square() || !m.iter().all(|c| c.is_finite()) {
        return Err(Error::NoConvergence);
    }
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), f64::EPSILON, SCHUR_MAX_ITER)
        .ok_or(Error::NoConvergence)?;
    let mut ev: Vec<Complex<f64>> = schur.complex_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    Ok(ev)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    SpectrallyStable,
    Unstable,
    Marginal,
}

impl Classification {
    pub fn from_max_real_part(m: f64) -> Self {
        if m < STABLE_TOL {
            Classification::SpectrallyStable
        } else if m > UNSTABLE_TOL {
            Classification::Unstable
        } else {
            Classification::Marginal
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Classification::SpectrallyStable => "SpectrallyStable",
            Classification::Unstable => "Unstable",
            Classification::Marginal => "Marginal",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    pub equilibrium: ReducedState,
    pub residual: f64,
    pub jacobian: DMatrix<f64>,
    pub eigenvalues: Vec<Complex<f64>>,
    pub max_real_part: f64,
    pub classification: Classification,
    pub caveat: Option<String>,
}

pub const STABLE_CAVEAT: &str =
    "spectral stability only: the closed loop is conservative, so the spectrum lies on the \
imaginary axis and nonlinear stability is not implied";

/// Linearizes the closed loop at `eq` and classifies the spectrum.
pub fn stability(cl: &ClosedLoop, eq: &ReducedState, eps: f64) -> Result<StabilityReport> {
    cl.check_state(eq)?;
    let layout = Layout::of(cl, eq);
    let rhs = flat_rhs(cl, layout);
    let x0 = layout.flatten(&cl.params, eq)?;
    let residual = rhs(&x0)?.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let jacobian = linearize(&rhs, &x0, eps)?;
    let eigenvalues = eigenvalues(&jacobian)?;
    let max_real_part = eigenvalues
        .iter()
        .map(|c| c.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let classification = Classification::from_max_real_part(max_real_part);
    let caveat =
        (classification == Classification::SpectrallyStable).then(|| STABLE_CAVEAT.to_string());
    Ok(StabilityReport {
        equilibrium: *eq,
        residual,
        jacobian,
        eigenvalues,
        max_real_part,
        classification,
        caveat,
    })
}

/// Richardson ratio (x_h − x_{h/2}) / (x_{h/2} − x_{h/4}) at t_final, in the
/// sup norm. Close to 16 for a fourth-order method.
pub fn convergence_ratio(
    cl: &ClosedLoop,
    initial: &ReducedState,
    t_final: f64,
    h: f64,
) -> Result<f64> {
    let end = |step: f64| -> Result<Vec<f64>> {
        let cfg = IntegratorConfig::new(step, t_final)?;
        let layout = Layout::of(cl, initial);
        let x0 = layout.flatten(&cl.params, initial)?;
        let rhs = flat_rhs(cl, layout);
        Ok(integrate(&rhs, &x0, &cfg.times())?.pop().unwrap())
    };
    let (a, b, c) = (end(h)?, end(h / 2.0)?, end(h / 4.0)?);
    let d = |x: &[f64], y: &[f64]| {
        x.iter()
            .zip(y)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max)
    };
    Ok(d(&a, &b) / d(&b, &c))
}

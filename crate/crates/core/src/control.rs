//! Potential-shaping feedback: the heavy-top base force, the desired-steady-motion
//! law and the drift-prevention law for the underwater vehicle, their shaped
//! potentials Ũ, and the matching identities as executable residuals.

use nalgebra::Matrix2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    coad, ep_momentum_rate, AlgebraVector, Homogeneous, Mat3, MomentumCovector, Product,
    Representation, Rotational, SE3Element, Vec3, Vec4,
};
use crate::error::{Error, Result};
use crate::poisson::{BracketId, GradientEval, PhasePoint};
use crate::systems::{
    advect_extras_rhs, ep_rhs, kinetic_energy, legendre, potential_energy, potential_gradient,
    InertiaParams, PotentialId, ReducedRate, ReducedState, SystemId,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gains {
    pub alpha: f64,
    pub beta: f64,
    /// 𝒦, the position gain of the drift law.
    pub k_matrix: Matrix2<f64>,
}

impl Gains {
    pub fn new(alpha: f64, beta: f64, k_matrix: Matrix2<f64>) -> Self {
        Self {
            alpha,
            beta,
            k_matrix,
        }
    }

    pub fn validate(&self, drift: bool) -> Result<()> {
        if !self.alpha.is_finite() {
            return Err(Error::validation("gains.alpha", "non-finite value"));
        }
        if !self.beta.is_finite() {
            return Err(Error::validation("gains.beta", "non-finite value"));
        }
        if !self.k_matrix.iter().all(|c| c.is_finite()) {
            return Err(Error::validation("gains.k", "non-finite entry"));
        }
        if drift {
            let k = &self.k_matrix;
            if k[(0, 1)] != k[(1, 0)] {
                return Err(Error::validation("gains.k", "matrix must be symmetric"));
            }
            if k[(0, 0)] <= 0.0 || k.determinant() <= 0.0 {
                return Err(Error::validation(
                    "gains.k",
                    "matrix must be positive definite",
                ));
            }
        }
        Ok(())
    }
}

/// Desired orientation R_d and body velocity v_d ≠ 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DesiredMotion {
    r_d: Mat3,
    v_d: Vec3,
}

impl DesiredMotion {
    pub fn new(r_d: Mat3, v_d: Vec3) -> Result<Self> {
        SE3Element::new(r_d, Vec3::zeros())?;
        if !v_d.iter().all(|c| c.is_finite()) {
            return Err(Error::NonFinite("v_d"));
        }
        if v_d.norm() == 0.0 {
            return Err(Error::ZeroDesiredVelocity);
        }
        Ok(Self { r_d, v_d })
    }

    pub fn r_d(&self) -> &Mat3 {
        &self.r_d
    }

    pub fn v_d(&self) -> &Vec3 {
        &self.v_d
    }

    /// Γ_e = −R_dᵀe₃.
    pub fn gamma_e(&self) -> Vec3 {
        -(self.r_d.transpose() * Vec3::z())
    }
}

/// Right-handed frame (w₁, w₂, w₃) with w₃ along the desired spatial velocity,
/// and Q = [w₁ w₂ w₃]ᵀ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DesiredFrame {
    pub w1: Vec3,
    pub w2: Vec3,
    pub w3: Vec3,
    pub q: Mat3,
}

pub fn frame_from_desired(d: &DesiredMotion) -> Result<DesiredFrame> {
    let n = d.v_d.norm();
    if n == 0.0 || !n.is_finite() {
        return Err(Error::ZeroDesiredVelocity);
    }
    let w3 = (d.r_d * d.v_d / n).normalize();
    // complete with the coordinate axis least aligned with w₃
    let axis = (0..3)
        .min_by(|&i, &j| w3[i].abs().total_cmp(&w3[j].abs()))
        .unwrap_or(0);
    let e = Vec3::ith(axis, 1.0);
    let w1 = (e - w3 * w3.dot(&e)).normalize();
    let w2 = w3.cross(&w1);
    let q = Mat3::from_rows(&[w1.transpose(), w2.transpose(), w3.transpose()]);
    Ok(DesiredFrame { w1, w2, w3, q })
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ControlOutput {
    pub u_rot: Vec3,
    pub u_lin: Vec3,
}

impl ControlOutput {
    pub fn is_finite(&self) -> bool {
        self.u_rot
            .iter()
            .chain(self.u_lin.iter())
            .all(|c| c.is_finite())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerId {
    None,
    HtmbShaping,
    UwvSteady,
    UwvDrift,
}

/// A single additive term of one of the control laws. Used as a test hook:
/// [`ClosedLoop::with_mutation`] flips the sign of the chosen term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ControlTerm {
    HtmbBase,
    SteadyGravity,
    SteadyHeading,
    DriftGravity,
    DriftHeading,
    DriftPosition,
}

impl ControlTerm {
    pub const ALL: [ControlTerm; 6] = [
        ControlTerm::HtmbBase,
        ControlTerm::SteadyGravity,
        ControlTerm::SteadyHeading,
        ControlTerm::DriftGravity,
        ControlTerm::DriftHeading,
        ControlTerm::DriftPosition,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ControlTerm::HtmbBase => "htmb_base",
            ControlTerm::SteadyGravity => "steady_gravity",
            ControlTerm::SteadyHeading => "steady_heading",
            ControlTerm::DriftGravity => "drift_gravity",
            ControlTerm::DriftHeading => "drift_heading",
            ControlTerm::DriftPosition => "drift_position",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name() == name)
    }

    pub fn controller(self) -> ControllerId {
        match self {
            ControlTerm::HtmbBase => ControllerId::HtmbShaping,
            ControlTerm::SteadyGravity | ControlTerm::SteadyHeading => ControllerId::UwvSteady,
            _ => ControllerId::UwvDrift,
        }
    }
}

fn sign(mutation: Option<ControlTerm>, term: ControlTerm) -> f64 {
    if mutation == Some(term) {
        -1.0
    } else {
        1.0
    }
}

/// ‖v_d‖ (M − αI) v_d
fn heading_vector(p: &InertiaParams, g: &Gains, d: &DesiredMotion) -> Vec3 {
    (p.m_block - Mat3::identity() * g.alpha) * d.v_d * d.v_d.norm()
}

/// m g l (χ + β Γ_e)
fn gravity_vector(p: &InertiaParams, g: &Gains, d: &DesiredMotion) -> Vec3 {
    (p.chi + d.gamma_e() * g.beta) * p.mgl()
}

/// Base force cancelling gravity on the heavy top: u = (0, m̄ g Γ).
pub fn u_htmb_shaping(p: &InertiaParams, gamma: &Vec3) -> ControlOutput {
    htmb_law(p, gamma, None)
}

fn htmb_law(p: &InertiaParams, gamma: &Vec3, m: Option<ControlTerm>) -> ControlOutput {
    ControlOutput {
        u_rot: Vec3::zeros(),
        u_lin: gamma * (p.m_total * p.g) * sign(m, ControlTerm::HtmbBase),
    }
}

pub fn u_uwv_steady(
    p: &InertiaParams,
    g: &Gains,
    d: &DesiredMotion,
    gamma: &Vec3,
    theta: &Vec3,
) -> ControlOutput {
    steady_law(p, g, d, gamma, theta, None)
}

fn steady_law(
    p: &InertiaParams,
    g: &Gains,
    d: &DesiredMotion,
    gamma: &Vec3,
    theta: &Vec3,
    m: Option<ControlTerm>,
) -> ControlOutput {
    let grav = gravity_vector(p, g, d).cross(gamma) * sign(m, ControlTerm::SteadyGravity);
    let head = theta.cross(&heading_vector(p, g, d)) * sign(m, ControlTerm::SteadyHeading);
    ControlOutput {
        u_rot: grav + head,
        u_lin: Vec3::zeros(),
    }
}

pub fn u_uwv_drift(
    p: &InertiaParams,
    g: &Gains,
    d: &DesiredMotion,
    gamma: &Vec3,
    d1: &Vec4,
    d2: &Vec4,
) -> ControlOutput {
    drift_law(p, g, d, gamma, d1, d2, None)
}

fn drift_law(
    p: &InertiaParams,
    g: &Gains,
    d: &DesiredMotion,
    gamma: &Vec3,
    d1: &Vec4,
    d2: &Vec4,
    m: Option<ControlTerm>,
) -> ControlOutput {
    let grav = gravity_vector(p, g, d).cross(gamma) * sign(m, ControlTerm::DriftGravity);
    let head = d1
        .spatial
        .cross(&d2.spatial)
        .cross(&heading_vector(p, g, d))
        * sign(m, ControlTerm::DriftHeading);
    let kd = g.k_matrix * nalgebra::Vector2::new(d1.scalar, d2.scalar);
    let pos = -(d1.spatial * kd.x + d2.spatial * kd.y) * sign(m, ControlTerm::DriftPosition);
    ControlOutput {
        u_rot: grav + head,
        u_lin: pos,
    }
}

/// Ũ(Γ, Θ) = −m g l (χ + β Γ_e)·Γ + ‖v_d‖ ((M − αI) v_d)·Θ
pub fn shaped_potential_steady(
    p: &InertiaParams,
    g: &Gains,
    d: &DesiredMotion,
    gamma: &Vec3,
    theta: &Vec3,
) -> f64 {
    -gravity_vector(p, g, d).dot(gamma) + heading_vector(p, g, d).dot(theta)
}

/// (∂Ũ/∂Γ, ∂Ũ/∂Θ) of [`shaped_potential_steady`].
pub fn shaped_gradient_steady(p: &InertiaParams, g: &Gains, d: &DesiredMotion) -> (Vec3, Vec3) {
    (-gravity_vector(p, g, d), heading_vector(p, g, d))
}

/// Ũ = −m g l (χ + β Γ_e)·Γ + ‖v_d‖ Δ₁·(Δ₂ × (M − αI) v_d) + ½ δᵀ𝒦δ
pub fn shaped_potential_drift(
    p: &InertiaParams,
    g: &Gains,
    d: &DesiredMotion,
    gamma: &Vec3,
    d1: &Vec4,
    d2: &Vec4,
) -> f64 {
    let delta = nalgebra::Vector2::new(d1.scalar, d2.scalar);
    -gravity_vector(p, g, d).dot(gamma)
        + d1.spatial.dot(&d2.spatial.cross(&heading_vector(p, g, d)))
        + 0.5 * delta.dot(&(g.k_matrix * delta))
}

/// (∂Ũ/∂Γ, ∂Ũ/∂Δ₁, ∂Ũ/∂Δ₂) of [`shaped_potential_drift`]; the ℝ⁴ gradients
/// carry ∂Ũ/∂δᵢ in their scalar slot.
pub fn shaped_gradient_drift(
    p: &InertiaParams,
    g: &Gains,
    d: &DesiredMotion,
    d1: &Vec4,
    d2: &Vec4,
) -> (Vec3, Vec4, Vec4) {
    let c = heading_vector(p, g, d);
    let kd = g.k_matrix * nalgebra::Vector2::new(d1.scalar, d2.scalar);
    (
        -gravity_vector(p, g, d),
        Vec4::new(d2.spatial.cross(&c), kd.x),
        Vec4::new(c.cross(&d1.spatial), kd.y),
    )
}

/// Warnings for gains outside the stability region αl I − M ≻ 0, lβ > 0.
pub fn stability_condition(p: &InertiaParams, g: &Gains) -> Vec<String> {
    let mut out = Vec::new();
    let a = Mat3::identity() * (g.alpha * p.l) - p.m_block;
    if a.cholesky().is_none() {
        out.push(format!(
            "stability condition violated: alpha*l*I - M is not positive definite (alpha = {}, l = {})",
            g.alpha, p.l
        ));
    }
    if p.l * g.beta <= 0.0 {
        out.push(format!(
            "stability condition violated: l*beta = {} is not positive",
            p.l * g.beta
        ));
    }
    out
}

/// ζ_e = (Ω = 0, v = v_d, Γ_e = −R_dᵀe₃, Θ_e = v_d/‖v_d‖).
pub fn steady_equilibrium(d: &DesiredMotion) -> ReducedState {
    ReducedState {
        xi: AlgebraVector::new(Vec3::zeros(), d.v_d),
        a_r3: Some(d.gamma_e()),
        theta: Some(d.v_d / d.v_d.norm()),
        ..Default::default()
    }
}

/// ζ_e = (0, v_d, Γ_e, (R_dᵀw₁, 0), (R_dᵀw₂, 0)).
pub fn drift_equilibrium(d: &DesiredMotion) -> Result<ReducedState> {
    let f = frame_from_desired(d)?;
    let rt = d.r_d.transpose();
    Ok(ReducedState {
        xi: AlgebraVector::new(Vec3::zeros(), d.v_d),
        a_r3: Some(d.gamma_e()),
        deltas: Some((Vec4::new(rt * f.w1, 0.0), Vec4::new(rt * f.w2, 0.0))),
        ..Default::default()
    })
}

/// A controller bound to its gains and desired motion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Controller {
    None,
    HtmbShaping,
    UwvSteady {
        gains: Gains,
        desired: DesiredMotion,
    },
    UwvDrift {
        gains: Gains,
        desired: DesiredMotion,
    },
}

impl Controller {
    pub fn id(&self) -> ControllerId {
        match self {
            Controller::None => ControllerId::None,
            Controller::HtmbShaping => ControllerId::HtmbShaping,
            Controller::UwvSteady { .. } => ControllerId::UwvSteady,
            Controller::UwvDrift { .. } => ControllerId::UwvDrift,
        }
    }
}

/// Gradient of the shaped potential Ũ with respect to every advected slot.
/// Slots the controller does not use are zero or absent.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ShapedGradient {
    pub d_gamma: Vec3,
    pub d_h: f64,
    pub d_theta: Option<Vec3>,
    pub d_deltas: Option<(Vec4, Vec4)>,
}

/// Plant, parameters and controller: the closed-loop vector field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedLoop {
    pub system: SystemId,
    pub params: InertiaParams,
    pub controller: Controller,
    mutation: Option<ControlTerm>,
}

impl ClosedLoop {
    pub fn new(system: SystemId, params: InertiaParams, controller: Controller) -> Result<Self> {
        let ok = matches!(
            (system, controller.id()),
            (_, ControllerId::None)
                | (SystemId::HeavyTopMovableBase, ControllerId::HtmbShaping)
                | (
                    SystemId::UnderwaterVehicle,
                    ControllerId::UwvSteady | ControllerId::UwvDrift
                )
        );
        if !ok {
            return Err(Error::validation(
                "controller",
                format!(
                    "controller {:?} does not apply to system {:?}",
                    controller.id(),
                    system
                ),
            ));
        }
        match controller {
            Controller::UwvSteady { gains, .. } => gains.validate(false)?,
            Controller::UwvDrift { gains, .. } => gains.validate(true)?,
            _ => {}
        }
        Ok(Self {
            system,
            params,
            controller,
            mutation: None,
        })
    }

    /// Flips the sign of one control-law term. Test hook only.
    pub fn with_mutation(mut self, term: Option<ControlTerm>) -> Self {
        self.mutation = term;
        self
    }

    pub fn mutation(&self) -> Option<ControlTerm> {
        self.mutation
    }

    /// Checks that `state` carries exactly the fields this loop integrates.
    pub fn check_state(&self, state: &ReducedState) -> Result<()> {
        match self.system {
            SystemId::UnderwaterVehicle => {
                state.require_a_r3()?;
                if state.a_r4.is_some() {
                    return Err(Error::validation(
                        "initial.a_r4",
                        "not used by the underwater vehicle",
                    ));
                }
            }
            SystemId::HeavyTopMovableBase => {
                state.require_a_r4()?;
                if state.a_r3.is_some() || state.theta.is_some() || state.deltas.is_some() {
                    return Err(Error::validation(
                        "initial",
                        "the heavy top carries only (gamma, h) as advected parameters",
                    ));
                }
            }
        }
        match self.controller {
            Controller::UwvSteady { .. } => {
                state.require_theta()?;
            }
            Controller::UwvDrift { .. } => {
                state.require_deltas()?;
            }
            _ => {}
        }
        Ok(())
    }

    /// Feedback u(state).
    pub fn control(&self, state: &ReducedState) -> Result<ControlOutput> {
        let m = self.mutation;
        let p = &self.params;
        Ok(match self.controller {
            Controller::None => ControlOutput::default(),
            Controller::HtmbShaping => htmb_law(p, &state.require_a_r4()?.spatial, m),
            Controller::UwvSteady { gains, desired } => steady_law(
                p,
                &gains,
                &desired,
                &state.require_gamma()?,
                &state.require_theta()?,
                m,
            ),
            Controller::UwvDrift { gains, desired } => {
                let (d1, d2) = state.require_deltas()?;
                drift_law(p, &gains, &desired, &state.require_gamma()?, &d1, &d2, m)
            }
        })
    }

    /// Controlled EP right-hand side: plant rhs plus u, plus the extra
    /// advected parameters present in `state`.
    pub fn rhs(&self, state: &ReducedState) -> Result<ReducedRate> {
        let mut rate = ep_rhs(self.system, &self.params, state)?;
        let u = self.control(state)?;
        rate.momentum += MomentumCovector::new(u.u_rot, u.u_lin);
        if state.theta.is_some() || state.deltas.is_some() {
            let (theta, deltas) = advect_extras_rhs(state)?;
            rate.theta = theta;
            rate.deltas = deltas;
        }
        Ok(rate)
    }

    pub fn shaped_gradient(&self, state: &ReducedState) -> Result<ShapedGradient> {
        let p = &self.params;
        Ok(match self.controller {
            Controller::None => ShapedGradient::default(),
            // Ũ(Γ, h) = −m̄ g h removes the base weight from U.
            Controller::HtmbShaping => ShapedGradient {
                d_h: -p.m_total * p.g,
                ..Default::default()
            },
            Controller::UwvSteady { gains, desired } => {
                let (d_gamma, d_theta) = shaped_gradient_steady(p, &gains, &desired);
                ShapedGradient {
                    d_gamma,
                    d_theta: Some(d_theta),
                    ..Default::default()
                }
            }
            Controller::UwvDrift { gains, desired } => {
                let (d1, d2) = state.require_deltas()?;
                let (d_gamma, g1, g2) = shaped_gradient_drift(p, &gains, &desired, &d1, &d2);
                ShapedGradient {
                    d_gamma,
                    d_deltas: Some((g1, g2)),
                    ..Default::default()
                }
            }
        })
    }

    pub fn shaped_potential(&self, state: &ReducedState) -> Result<f64> {
        let p = &self.params;
        Ok(match self.controller {
            Controller::None => 0.0,
            Controller::HtmbShaping => -p.m_total * p.g * state.require_a_r4()?.scalar,
            Controller::UwvSteady { gains, desired } => shaped_potential_steady(
                p,
                &gains,
                &desired,
                &state.require_gamma()?,
                &state.require_theta()?,
            ),
            Controller::UwvDrift { gains, desired } => {
                let (d1, d2) = state.require_deltas()?;
                shaped_potential_drift(p, &gains, &desired, &state.require_gamma()?, &d1, &d2)
            }
        })
    }

    /// Closed-loop energy h̃ = ½⟨ξ, ξ⟩ + U + Ũ.
    pub fn energy(&self, state: &ReducedState) -> Result<f64> {
        let u = potential_energy(&self.params, state, PotentialId::from(self.system))?;
        Ok(kinetic_energy(&self.params, &state.xi) + u + self.shaped_potential(state)?)
    }

    /// Bracket whose phase space matches the states of this loop.
    pub fn bracket_id(&self, state: &ReducedState) -> BracketId {
        match self.system {
            SystemId::HeavyTopMovableBase => BracketId::Se3R4,
            SystemId::UnderwaterVehicle if state.deltas.is_some() => BracketId::Drift,
            SystemId::UnderwaterVehicle if state.theta.is_some() => BracketId::SteadyMotion,
            SystemId::UnderwaterVehicle => BracketId::Se3R3,
        }
    }

    pub fn phase_point(&self, state: &ReducedState) -> PhasePoint {
        PhasePoint::from_reduced(&legendre(&self.params, &state.xi), state)
    }

    /// Gradient of h̃ in the phase-space coordinates: (Ω, v, ∂(U+Ũ)/∂a, ∂Ũ/∂b).
    pub fn hamiltonian_gradient(&self, state: &ReducedState) -> Result<GradientEval> {
        let (du, du_h) = potential_gradient(&self.params, PotentialId::from(self.system));
        let s = self.shaped_gradient(state)?;
        let mut g = GradientEval::zeros(self.bracket_id(state));
        g.d_pi = state.xi.omega;
        g.d_p = state.xi.vel;
        g.d_gamma = Some(du + s.d_gamma);
        if self.system == SystemId::HeavyTopMovableBase {
            g.d_h = Some(du_h + s.d_h);
        }
        if state.theta.is_some() {
            g.d_theta = Some(s.d_theta.unwrap_or_else(Vec3::zeros));
        }
        if state.deltas.is_some() {
            let (g1, g2) = s.d_deltas.unwrap_or_default();
            g.d_d1 = Some(g1);
            g.d_d2 = Some(g2);
        }
        Ok(g)
    }

    /// Equilibrium ζ_e defined by the controller's desired motion.
    pub fn equilibrium(&self) -> Option<Result<ReducedState>> {
        match self.controller {
            Controller::UwvSteady { desired, .. } => Some(Ok(steady_equilibrium(&desired))),
            Controller::UwvDrift { desired, .. } => Some(drift_equilibrium(&desired)),
            _ => None,
        }
    }

    /// Random state with the fields of this loop, entries in [−1, 1].
    pub fn random_state(&self, rng: &mut impl Rng) -> ReducedState {
        let mut v3 = || Vec3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        let xi = AlgebraVector::new(v3(), v3());
        let gamma = v3();
        let theta = v3();
        let d1 = v3();
        let d2 = v3();
        let mut s = ReducedState {
            xi,
            ..Default::default()
        };
        match self.system {
            SystemId::UnderwaterVehicle => s.a_r3 = Some(gamma),
            SystemId::HeavyTopMovableBase => {
                s.a_r4 = Some(Vec4::new(gamma, rng.gen_range(-1.0..1.0)))
            }
        }
        match self.controller {
            Controller::UwvSteady { .. } => s.theta = Some(theta),
            Controller::UwvDrift { .. } => {
                s.deltas = Some((
                    Vec4::new(d1, rng.gen_range(-1.0..1.0)),
                    Vec4::new(d2, rng.gen_range(-1.0..1.0)),
                ))
            }
            _ => {}
        }
        s
    }
}

/// Sup-norm between the controlled EP rhs (plant + u) and the EP rhs of the
/// controlled Lagrangian ℓ̃ = ℓ − Ũ, the latter assembled through the generic
/// representation interface: ṁ = ad*_ξ m + 𝐊(−∂(U+Ũ)/∂a, a) + 𝐌(−∂Ũ/∂b, b).
pub fn matching_residual_extended(cl: &ClosedLoop, state: &ReducedState) -> Result<f64> {
    cl.check_state(state)?;
    let controlled = cl.rhs(state)?;
    let p = &cl.params;
    let m = legendre(p, &state.xi);
    let xi = &state.xi;
    let (du, du_h) = potential_gradient(p, PotentialId::from(cl.system));
    let s = cl.shaped_gradient(state)?;

    let mut shaped = ReducedRate::default();
    let mut momentum = coad(xi, &m);
    match cl.system {
        SystemId::UnderwaterVehicle => {
            let gamma = state.require_a_r3()?;
            momentum += Rotational.momentum(&-(du + s.d_gamma), &gamma);
            shaped.a_r3 = Some(Rotational.advect_rate(xi, &gamma));
        }
        SystemId::HeavyTopMovableBase => {
            let a = state.require_a_r4()?;
            momentum += Homogeneous.momentum(&-Vec4::new(du + s.d_gamma, du_h + s.d_h), &a);
            shaped.a_r4 = Some(Homogeneous.advect_rate(xi, &a));
        }
    }
    if let Some(theta) = state.theta {
        let d_theta = s.d_theta.unwrap_or_else(Vec3::zeros);
        momentum += Rotational.momentum(&-d_theta, &theta);
        shaped.theta = Some(Rotational.advect_rate(xi, &theta));
    }
    if let Some(b) = state.deltas {
        let rep = Product(Homogeneous, Homogeneous);
        let (g1, g2) = s.d_deltas.unwrap_or_default();
        momentum += rep.momentum(&(-g1, -g2), &b);
        shaped.deltas = Some(rep.advect_rate(xi, &b));
    }
    shaped.momentum = momentum;
    Ok(controlled.max_abs_diff(&shaped))
}

/// Sup-norm between the heavy top under u = (0, m̄gΓ), restricted to (Π, P, Γ),
/// and the EP system on (𝔰𝔢(3) ⋉ ℝ³)* with potential Ũ(Γ) = m g l χ·Γ.
pub fn matching_residual_subrep(state: &ReducedState, p: &InertiaParams) -> Result<f64> {
    matching_residual_subrep_with(state, p, None)
}

/// [`matching_residual_subrep`] with an optional sign flip in the base force.
pub fn matching_residual_subrep_with(
    state: &ReducedState,
    p: &InertiaParams,
    mutation: Option<ControlTerm>,
) -> Result<f64> {
    let cl = ClosedLoop::new(SystemId::HeavyTopMovableBase, *p, Controller::HtmbShaping)?
        .with_mutation(mutation);
    let full = cl.rhs(state)?;
    let gamma = state.require_a_r4()?.spatial;
    let m = legendre(p, &state.xi);
    let reduced_momentum =
        ep_momentum_rate(&Rotational, &state.xi, &m, &-(p.chi * p.mgl()), &gamma);
    let reduced_gamma = Rotational.advect_rate(&state.xi, &gamma);
    let full_gamma = full.a_r4.ok_or(Error::MissingField("a_r4"))?.spatial;
    Ok((full.momentum - reduced_momentum)
        .sup_norm()
        .max((full_gamma - reduced_gamma).amax()))
}

//! Reduced Lagrangians and Euler–Poincaré right-hand sides for the underwater
//! vehicle (advected Γ ∈ ℝ³) and the heavy top on a movable base (advected
//! (Γ, h) ∈ ℝ⁴), plus the extra tracked parameters Θ and (Δ₁, δ₁), (Δ₂, δ₂).

use nalgebra::{Matrix6, Vector6};
use serde::{Deserialize, Serialize};

use crate::algebra::{
    advect_rate_r3, advect_rate_r4, AlgebraVector, Mat3, MomentumCovector, Vec3, Vec4,
};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemId {
    UnderwaterVehicle,
    HeavyTopMovableBase,
}

/// Which reduced potential [`energy`] adds to the kinetic term.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PotentialId {
    /// U(Γ) = m g l χ·Γ
    UnderwaterVehicle,
    /// U(Γ, h) = m g l χ·Γ + m̄ g h
    HeavyTopMovableBase,
    /// Ũ(Γ) = U(Γ, 0), the heavy top after the base force cancels gravity.
    HeavyTopShaped,
}

impl From<SystemId> for PotentialId {
    fn from(id: SystemId) -> Self {
        match id {
            SystemId::UnderwaterVehicle => PotentialId::UnderwaterVehicle,
            SystemId::HeavyTopMovableBase => PotentialId::HeavyTopMovableBase,
        }
    }
}

/// Kinetic-energy blocks [J D; Dᵀ M] together with the gravity data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InertiaParams {
    pub j_block: Mat3,
    pub d_block: Mat3,
    pub m_block: Mat3,
    /// Body mass m.
    pub m_body: f64,
    /// m̄ = base mass + m; only the heavy top uses it.
    pub m_total: f64,
    pub g: f64,
    pub l: f64,
    /// Unit direction of the center-of-mass offset.
    pub chi: Vec3,
}

const SYMMETRY_TOL: f64 = 1e-12;
const UNIT_TOL: f64 = 1e-9;

impl InertiaParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        j_block: Mat3,
        d_block: Mat3,
        m_block: Mat3,
        m_body: f64,
        m_total: f64,
        g: f64,
        l: f64,
        chi: Vec3,
    ) -> Result<Self> {
        let p = Self {
            j_block,
            d_block,
            m_block,
            m_body,
            m_total,
            g,
            l,
            chi,
        };
        p.validate()?;
        Ok(p)
    }

    /// Default desk-scale vehicle: J = diag(3,2,1), M = diag(1.2,1.5,2.0),
    /// D = 0, χ = e₃, g = 9.81, and m, l chosen so that m g l = 1. These are
    /// convenient test values, not measured vehicle data.
    pub fn desk_scale() -> Self {
        Self {
            j_block: Mat3::from_diagonal(&Vec3::new(3.0, 2.0, 1.0)),
            d_block: Mat3::zeros(),
            m_block: Mat3::from_diagonal(&Vec3::new(1.2, 1.5, 2.0)),
            m_body: 1.0,
            m_total: 3.0,
            g: 9.81,
            l: 1.0 / 9.81,
            chi: Vec3::z(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let blocks = [
            ("inertia.j", &self.j_block),
            ("inertia.d", &self.d_block),
            ("inertia.m", &self.m_block),
        ];
        for (path, b) in blocks {
            if !b.iter().all(|c| c.is_finite()) {
                return Err(Error::validation(path, "non-finite entry"));
            }
        }
        for (path, b) in [("inertia.j", &self.j_block), ("inertia.m", &self.m_block)] {
            let asym = (b - b.transpose()).amax();
            if asym > SYMMETRY_TOL * (1.0 + b.amax()) {
                return Err(Error::validation(
                    path,
                    format!("block is not symmetric (residual {asym:e})"),
                ));
            }
        }
        let scalars = [
            ("inertia.m_body", self.m_body),
            ("inertia.m_total", self.m_total),
            ("inertia.g", self.g),
            ("inertia.l", self.l),
        ];
        for (path, v) in scalars {
            if !v.is_finite() {
                return Err(Error::validation(path, "non-finite value"));
            }
        }
        if self.m_body < 0.0 {
            return Err(Error::validation(
                "inertia.m_body",
                "mass must be nonnegative",
            ));
        }
        if !self.chi.iter().all(|c| c.is_finite()) || (self.chi.norm() - 1.0).abs() > UNIT_TOL {
            return Err(Error::validation(
                "inertia.chi",
                format!(
                    "offset direction must be a unit vector (norm {})",
                    self.chi.norm()
                ),
            ));
        }
        if self.metric().cholesky().is_none() {
            return Err(Error::validation(
                "inertia",
                "block matrix [J D; Dᵀ M] is not positive definite",
            ));
        }
        Ok(())
    }

    /// The 6×6 kinetic-energy matrix [J D; Dᵀ M].
    pub fn metric(&self) -> Matrix6<f64> {
        let mut m = Matrix6::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.j_block);
        m.fixed_view_mut::<3, 3>(0, 3).copy_from(&self.d_block);
        m.fixed_view_mut::<3, 3>(3, 0)
            .copy_from(&self.d_block.transpose());
        m.fixed_view_mut::<3, 3>(3, 3).copy_from(&self.m_block);
        m
    }

    pub fn mgl(&self) -> f64 {
        self.m_body * self.g * self.l
    }
}

/// Reduced state (ξ, a, b). Which optional fields are present is fixed by the
/// active system and controller.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ReducedState {
    pub xi: AlgebraVector,
    /// Γ for the underwater vehicle.
    pub a_r3: Option<Vec3>,
    /// (Γ, h) for the heavy top on a movable base.
    pub a_r4: Option<Vec4>,
    /// Θ, tracked for the desired-steady-motion controller.
    pub theta: Option<Vec3>,
    /// ((Δ₁, δ₁), (Δ₂, δ₂)), tracked for the drift controller.
    pub deltas: Option<(Vec4, Vec4)>,
}

impl ReducedState {
    /// Γ from whichever advected field carries it.
    pub fn gamma(&self) -> Option<Vec3> {
        self.a_r3.or(self.a_r4.map(|a| a.spatial))
    }

    pub fn require_gamma(&self) -> Result<Vec3> {
        self.gamma().ok_or(Error::MissingField("gamma"))
    }

    pub fn require_a_r3(&self) -> Result<Vec3> {
        self.a_r3.ok_or(Error::MissingField("a_r3"))
    }

    pub fn require_a_r4(&self) -> Result<Vec4> {
        self.a_r4.ok_or(Error::MissingField("a_r4"))
    }

    pub fn require_theta(&self) -> Result<Vec3> {
        self.theta.ok_or(Error::MissingField("theta"))
    }

    pub fn require_deltas(&self) -> Result<(Vec4, Vec4)> {
        self.deltas.ok_or(Error::MissingField("deltas"))
    }

    pub fn is_finite(&self) -> bool {
        self.xi.is_finite()
            && self.a_r3.is_none_or(|g| g.iter().all(|c| c.is_finite()))
            && self.a_r4.is_none_or(|a| a.is_finite())
            && self.theta.is_none_or(|t| t.iter().all(|c| c.is_finite()))
            && self
                .deltas
                .is_none_or(|(d1, d2)| d1.is_finite() && d2.is_finite())
    }
}

/// Time derivative of the integrated variables: impulses plus advected fields.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ReducedRate {
    pub momentum: MomentumCovector,
    pub a_r3: Option<Vec3>,
    pub a_r4: Option<Vec4>,
    pub theta: Option<Vec3>,
    pub deltas: Option<(Vec4, Vec4)>,
}

fn opt_diff<T>(a: &Option<T>, b: &Option<T>, f: impl Fn(&T, &T) -> f64) -> f64 {
    match (a, b) {
        (Some(x), Some(y)) => f(x, y),
        (None, None) => 0.0,
        _ => f64::INFINITY,
    }
}

impl ReducedRate {
    /// Sup-norm of the difference; infinite when the two carry different fields.
    pub fn max_abs_diff(&self, other: &ReducedRate) -> f64 {
        let v4 = |a: &Vec4, b: &Vec4| (*a - *b).to_vector4().amax();
        [
            (self.momentum - other.momentum).sup_norm(),
            opt_diff(&self.a_r3, &other.a_r3, |a, b| (a - b).amax()),
            opt_diff(&self.a_r4, &other.a_r4, v4),
            opt_diff(&self.theta, &other.theta, |a, b| (a - b).amax()),
            opt_diff(&self.deltas, &other.deltas, |a, b| {
                v4(&a.0, &b.0).max(v4(&a.1, &b.1))
            }),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.max_abs_diff(&ReducedRate {
            momentum: MomentumCovector::zeros(),
            a_r3: self.a_r3.map(|_| Vec3::zeros()),
            a_r4: self.a_r4.map(|_| Vec4::zeros()),
            theta: self.theta.map(|_| Vec3::zeros()),
            deltas: self.deltas.map(|_| (Vec4::zeros(), Vec4::zeros())),
        })
    }
}

/// Π = JΩ + Dv, P = DᵀΩ + Mv.
pub fn legendre(p: &InertiaParams, xi: &AlgebraVector) -> MomentumCovector {
    MomentumCovector::new(
        p.j_block * xi.omega + p.d_block * xi.vel,
        p.d_block.transpose() * xi.omega + p.m_block * xi.vel,
    )
}

/// Solves [J D; Dᵀ M] (Ω, v) = (Π, P).
pub fn legendre_inverse(p: &InertiaParams, m: &MomentumCovector) -> Result<AlgebraVector> {
    let chol = p.metric().cholesky().ok_or(Error::SingularInertia)?;
    let rhs = Vector6::new(m.pi.x, m.pi.y, m.pi.z, m.p.x, m.p.y, m.p.z);
    let x = chol.solve(&rhs);
    Ok(AlgebraVector::new(
        Vec3::new(x[0], x[1], x[2]),
        Vec3::new(x[3], x[4], x[5]),
    ))
}

/// Uncontrolled underwater vehicle:
/// Π̇ = Π×Ω + P×v − m g l χ×Γ, Ṗ = P×Ω, Γ̇ = Γ×Ω.
pub fn ep_rhs_uwv(p: &InertiaParams, state: &ReducedState) -> Result<ReducedRate> {
    let gamma = state.require_a_r3()?;
    let m = legendre(p, &state.xi);
    let (omega, v) = (state.xi.omega, state.xi.vel);
    Ok(ReducedRate {
        momentum: MomentumCovector::new(
            m.pi.cross(&omega) + m.p.cross(&v) - p.chi.cross(&gamma) * p.mgl(),
            m.p.cross(&omega),
        ),
        a_r3: Some(advect_rate_r3(&state.xi, &gamma)),
        ..Default::default()
    })
}

/// Uncontrolled heavy top on a movable base:
/// Π̇ = Π×Ω + P×v − m g l χ×Γ, Ṗ = P×Ω − m̄ g Γ, Γ̇ = Γ×Ω, ḣ = Γ·v.
pub fn ep_rhs_htmb(p: &InertiaParams, state: &ReducedState) -> Result<ReducedRate> {
    let a = state.require_a_r4()?;
    let gamma = a.spatial;
    let m = legendre(p, &state.xi);
    let (omega, v) = (state.xi.omega, state.xi.vel);
    Ok(ReducedRate {
        momentum: MomentumCovector::new(
            m.pi.cross(&omega) + m.p.cross(&v) - p.chi.cross(&gamma) * p.mgl(),
            m.p.cross(&omega) - gamma * (p.m_total * p.g),
        ),
        a_r4: Some(advect_rate_r4(&state.xi, &a)),
        ..Default::default()
    })
}

pub fn ep_rhs(system: SystemId, p: &InertiaParams, state: &ReducedState) -> Result<ReducedRate> {
    match system {
        SystemId::UnderwaterVehicle => ep_rhs_uwv(p, state),
        SystemId::HeavyTopMovableBase => ep_rhs_htmb(p, state),
    }
}

/// Rates of Θ and (Δ₁, Δ₂), each present only if the state carries it.
pub type ExtrasRate = (Option<Vec3>, Option<(Vec4, Vec4)>);

/// Rates of the extra tracked parameters present in `state`:
/// Θ̇ = Θ×Ω, Δ̇ᵢ = Δᵢ×Ω, δ̇ᵢ = Δᵢ·v. Fails if neither Θ nor Δ is present.
pub fn advect_extras_rhs(state: &ReducedState) -> Result<ExtrasRate> {
    if state.theta.is_none() && state.deltas.is_none() {
        return Err(Error::MissingField("theta or deltas"));
    }
    let theta = state.theta.map(|t| advect_rate_r3(&state.xi, &t));
    let deltas = state.deltas.map(|(d1, d2)| {
        (
            advect_rate_r4(&state.xi, &d1),
            advect_rate_r4(&state.xi, &d2),
        )
    });
    Ok((theta, deltas))
}

/// ½ ξᵀ[J D; Dᵀ M]ξ.
pub fn kinetic_energy(p: &InertiaParams, xi: &AlgebraVector) -> f64 {
    0.5 * legendre(p, xi).pair(xi)
}

pub fn potential_energy(
    p: &InertiaParams,
    state: &ReducedState,
    potential: PotentialId,
) -> Result<f64> {
    Ok(match potential {
        PotentialId::UnderwaterVehicle => p.mgl() * p.chi.dot(&state.require_a_r3()?),
        PotentialId::HeavyTopMovableBase => {
            let a = state.require_a_r4()?;
            p.mgl() * p.chi.dot(&a.spatial) + p.m_total * p.g * a.scalar
        }
        PotentialId::HeavyTopShaped => p.mgl() * p.chi.dot(&state.require_a_r4()?.spatial),
    })
}

/// Total energy ½⟨ξ, ξ⟩ + U(a).
pub fn energy(p: &InertiaParams, state: &ReducedState, potential: PotentialId) -> Result<f64> {
    Ok(kinetic_energy(p, &state.xi) + potential_energy(p, state, potential)?)
}

/// (∂U/∂Γ, ∂U/∂h) of the chosen potential; ∂U/∂h is zero where h is absent.
pub fn potential_gradient(p: &InertiaParams, potential: PotentialId) -> (Vec3, f64) {
    let d_gamma = p.chi * p.mgl();
    match potential {
        PotentialId::HeavyTopMovableBase => (d_gamma, p.m_total * p.g),
        PotentialId::UnderwaterVehicle | PotentialId::HeavyTopShaped => (d_gamma, 0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{ep_momentum_rate, Homogeneous, Rotational};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rv3(rng: &mut ChaCha8Rng) -> Vec3 {
        Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        )
    }

    fn random_params(rng: &mut ChaCha8Rng) -> InertiaParams {
        // A = LLᵀ + I gives a generic positive definite metric with nonzero D.
        let l = nalgebra::Matrix6::from_fn(|_, _| rng.gen_range(-0.5..0.5));
        let a = l * l.transpose() + Matrix6::identity();
        InertiaParams::new(
            a.fixed_view::<3, 3>(0, 0).into(),
            a.fixed_view::<3, 3>(0, 3).into(),
            a.fixed_view::<3, 3>(3, 3).into(),
            rng.gen_range(0.5..2.0),
            rng.gen_range(2.0..4.0),
            9.81,
            rng.gen_range(0.05..0.3),
            rv3(rng).normalize(),
        )
        .unwrap()
    }

    #[test]
    fn legendre_examples() {
        let mut p = InertiaParams::desk_scale();
        p.m_block = Mat3::identity();
        let m = legendre(&p, &AlgebraVector::new(Vec3::x(), Vec3::y()));
        assert_eq!(m, MomentumCovector::new(Vec3::x() * 3.0, Vec3::y()));
        assert_eq!(
            legendre(&p, &AlgebraVector::zeros()),
            MomentumCovector::zeros()
        );
        assert_eq!(
            legendre_inverse(&p, &MomentumCovector::zeros()).unwrap(),
            AlgebraVector::zeros()
        );
        let xi = legendre_inverse(&p, &MomentumCovector::new(Vec3::x() * 3.0, Vec3::y())).unwrap();
        assert!((xi - AlgebraVector::new(Vec3::x(), Vec3::y())).omega.amax() < 1e-15);
    }

    #[test]
    fn legendre_round_trip_against_dense_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let p = random_params(&mut rng);
            let xi = AlgebraVector::new(rv3(&mut rng), rv3(&mut rng));
            let m = legendre(&p, &xi);
            let back = legendre_inverse(&p, &m).unwrap();
            let d = back - xi;
            assert!(d.omega.amax().max(d.vel.amax()) < 1e-12);
            // LU solve as an independent route
            let rhs = Vector6::new(m.pi.x, m.pi.y, m.pi.z, m.p.x, m.p.y, m.p.z);
            let lu = p.metric().lu().solve(&rhs).unwrap();
            assert!(
                (lu - Vector6::new(
                    xi.omega.x, xi.omega.y, xi.omega.z, xi.vel.x, xi.vel.y, xi.vel.z
                ))
                .amax()
                    < 1e-12
            );
        }
    }

    #[test]
    fn corrupted_inertia_is_reported() {
        let mut p = InertiaParams::desk_scale();
        p.m_block = -Mat3::identity();
        assert_eq!(
            legendre_inverse(&p, &MomentumCovector::zeros()),
            Err(Error::SingularInertia)
        );
        assert!(matches!(p.validate(), Err(Error::Validation { .. })));
    }

    #[test]
    fn validation_names_paths() {
        let mut p = InertiaParams::desk_scale();
        p.chi = Vec3::new(0.0, 0.0, 2.0);
        match p.validate() {
            Err(Error::Validation { path, .. }) => assert_eq!(path, "inertia.chi"),
            other => panic!("unexpected {other:?}"),
        }
        let mut p = InertiaParams::desk_scale();
        p.j_block[(0, 1)] = 0.5;
        assert!(matches!(p.validate(), Err(Error::Validation { path, .. }) if path == "inertia.j"));
        let mut p = InertiaParams::desk_scale();
        p.m_body = -1.0;
        assert!(
            matches!(p.validate(), Err(Error::Validation { path, .. }) if path == "inertia.m_body")
        );
    }

    #[test]
    fn uwv_rhs_examples() {
        let p = InertiaParams::desk_scale();
        let rest = ReducedState {
            a_r3: Some(Vec3::z()),
            ..Default::default()
        };
        assert_eq!(ep_rhs_uwv(&p, &rest).unwrap().sup_norm(), 0.0);

        let mut q = p;
        q.m_block = Mat3::identity();
        let s = ReducedState {
            xi: AlgebraVector::new(Vec3::zeros(), Vec3::x()),
            a_r3: Some(Vec3::z()),
            ..Default::default()
        };
        assert_eq!(ep_rhs_uwv(&q, &s).unwrap().sup_norm(), 0.0);

        let missing = ReducedState::default();
        assert_eq!(ep_rhs_uwv(&p, &missing), Err(Error::MissingField("a_r3")));
    }

    #[test]
    fn htmb_rhs_examples() {
        let p = InertiaParams::desk_scale();
        let s = ReducedState {
            a_r4: Some(Vec4::new(Vec3::z(), 0.0)),
            ..Default::default()
        };
        let r = ep_rhs_htmb(&p, &s).unwrap();
        assert_eq!(r.momentum.pi, Vec3::zeros());
        assert_eq!(r.momentum.p, -Vec3::z() * (p.m_total * p.g));
        assert_eq!(r.a_r4.unwrap().scalar, 0.0);

        let probe = ReducedState {
            xi: AlgebraVector::new(Vec3::new(0.1, 0.2, 0.3), Vec3::zeros()),
            a_r4: Some(Vec4::new(Vec3::zeros(), 4.0)),
            ..Default::default()
        };
        let r = ep_rhs_htmb(&p, &probe).unwrap();
        let m = legendre(&p, &probe.xi);
        assert_eq!(r.momentum.pi, m.pi.cross(&probe.xi.omega));
        assert_eq!(r.momentum.p, m.p.cross(&probe.xi.omega));
        assert_eq!(
            ep_rhs_htmb(&p, &ReducedState::default()),
            Err(Error::MissingField("a_r4"))
        );
    }

    #[test]
    fn closed_form_rhs_matches_generic_representation_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..200 {
            let p = random_params(&mut rng);
            let xi = AlgebraVector::new(rv3(&mut rng), rv3(&mut rng));
            let m = legendre(&p, &xi);
            let gamma = rv3(&mut rng);
            let s = ReducedState {
                xi,
                a_r3: Some(gamma),
                ..Default::default()
            };
            // δℓ/δΓ = −∂U/∂Γ
            let generic = ep_momentum_rate(&Rotational, &xi, &m, &(-p.chi * p.mgl()), &gamma);
            let closed = ep_rhs_uwv(&p, &s).unwrap();
            assert!((generic - closed.momentum).sup_norm() < 1e-12);

            let a = Vec4::new(gamma, rng.gen_range(-1.0..1.0));
            let s = ReducedState {
                xi,
                a_r4: Some(a),
                ..Default::default()
            };
            let dl_da = Vec4::new(-p.chi * p.mgl(), -p.m_total * p.g);
            let generic = ep_momentum_rate(&Homogeneous, &xi, &m, &dl_da, &a);
            let closed = ep_rhs_htmb(&p, &s).unwrap();
            assert!((generic - closed.momentum).sup_norm() < 1e-12);
        }
    }

    #[test]
    fn extras_rates() {
        let z = Vec3::zeros();
        let d1 = Vec4::new(Vec3::x(), 0.3);
        let d2 = Vec4::new(Vec3::y(), -0.1);
        let s = ReducedState {
            xi: AlgebraVector::new(z, Vec3::z()),
            theta: Some(Vec3::z()),
            deltas: Some((d1, d2)),
            ..Default::default()
        };
        let (t, d) = advect_extras_rhs(&s).unwrap();
        assert_eq!(t.unwrap(), z);
        let (r1, r2) = d.unwrap();
        assert_eq!(r1, Vec4::zeros());
        assert_eq!(r2, Vec4::zeros());
        assert_eq!(
            advect_extras_rhs(&ReducedState::default()),
            Err(Error::MissingField("theta or deltas"))
        );

        // d/dt(Δ₁×Δ₂) = Δ̇₁×Δ₂ + Δ₁×Δ̇₂ = (Δ₁×Δ₂)×Ω
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let xi = AlgebraVector::new(rv3(&mut rng), rv3(&mut rng));
            let (a, b) = (Vec4::new(rv3(&mut rng), 0.0), Vec4::new(rv3(&mut rng), 0.0));
            let s = ReducedState {
                xi,
                deltas: Some((a, b)),
                ..Default::default()
            };
            let (_, d) = advect_extras_rhs(&s).unwrap();
            let (ra, rb) = d.unwrap();
            let product_rule = ra.spatial.cross(&b.spatial) + a.spatial.cross(&rb.spatial);
            let theta_law = a.spatial.cross(&b.spatial).cross(&xi.omega);
            assert!((product_rule - theta_law).amax() < 1e-14);
        }
    }

    #[test]
    fn energy_examples_and_rate_level_conservation() {
        let p = InertiaParams::desk_scale();
        let s = ReducedState {
            a_r3: Some(Vec3::z()),
            ..Default::default()
        };
        assert!((energy(&p, &s, PotentialId::UnderwaterVehicle).unwrap() - 1.0).abs() < 1e-15);
        let s = ReducedState {
            a_r4: Some(Vec4::zeros()),
            ..Default::default()
        };
        assert_eq!(
            energy(&p, &s, PotentialId::HeavyTopMovableBase).unwrap(),
            0.0
        );
        assert_eq!(
            energy(&p, &ReducedState::default(), PotentialId::UnderwaterVehicle),
            Err(Error::MissingField("a_r3"))
        );

        // ⟨dH, rhs⟩ = Ω·Π̇ + v·Ṗ + ∂U/∂Γ·Γ̇ + ∂U/∂h·ḣ
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..200 {
            let p = random_params(&mut rng);
            let xi = AlgebraVector::new(rv3(&mut rng), rv3(&mut rng));
            let gamma = rv3(&mut rng);
            let s = ReducedState {
                xi,
                a_r3: Some(gamma),
                ..Default::default()
            };
            let r = ep_rhs_uwv(&p, &s).unwrap();
            let (du, _) = potential_gradient(&p, PotentialId::UnderwaterVehicle);
            let dh = r.momentum.pair(&xi) + du.dot(&r.a_r3.unwrap());
            assert!(dh.abs() < 1e-12, "{dh}");

            let s = ReducedState {
                xi,
                a_r4: Some(Vec4::new(gamma, 0.4)),
                ..Default::default()
            };
            let r = ep_rhs_htmb(&p, &s).unwrap();
            let (dg, dhh) = potential_gradient(&p, PotentialId::HeavyTopMovableBase);
            let a = r.a_r4.unwrap();
            let dh = r.momentum.pair(&xi) + dg.dot(&a.spatial) + dhh * a.scalar;
            assert!(dh.abs() < 1e-12, "{dh}");
        }
    }

    #[test]
    fn uwv_rate_level_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let p = InertiaParams::desk_scale();
        for _ in 0..100 {
            let xi = AlgebraVector::new(rv3(&mut rng), rv3(&mut rng));
            let gamma = rv3(&mut rng);
            let s = ReducedState {
                xi,
                a_r3: Some(gamma),
                ..Default::default()
            };
            let r = ep_rhs_uwv(&p, &s).unwrap();
            let m = legendre(&p, &xi);
            let g_dot = r.a_r3.unwrap();
            assert!(gamma.dot(&g_dot).abs() < 1e-14);
            assert!(m.p.dot(&r.momentum.p).abs() < 1e-14);
            assert!((r.momentum.p.dot(&gamma) + m.p.dot(&g_dot)).abs() < 1e-14);
        }
    }
}

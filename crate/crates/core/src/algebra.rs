//! Closed-form Lie-algebraic machinery for SE(3) = SO(3) ⋉ ℝ³.
//!
//! Dual spaces are identified with their primal spaces through the dot
//! product, so (ℝ³)* ≅ ℝ³ and (ℝ⁴)* ≅ ℝ⁴. Covectors of 𝔰𝔢(3)* still get their
//! own type ([`MomentumCovector`]) so that impulses cannot be mixed up with
//! velocities.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Tolerance on ‖RᵀR − I‖_F for a matrix to count as a rotation.
pub const ROTATION_TOL: f64 = 1e-9;
/// Tolerance on the symmetric part of a matrix passed to [`vee`].
pub const SKEW_TOL: f64 = 1e-9;
/// Below this angle [`exp_so3`] switches to its Taylor expansion.
pub const EXP_SMALL_ANGLE: f64 = 1e-8;

/// An element of ℝ⁴ split as (spatial part, scalar part), e.g. a = (Γ, h).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec4 {
    pub spatial: Vec3,
    pub scalar: f64,
}

impl Vec4 {
    pub fn new(spatial: Vec3, scalar: f64) -> Self {
        Self { spatial, scalar }
    }

    pub fn zeros() -> Self {
        Self::default()
    }

    pub fn dot(&self, other: &Vec4) -> f64 {
        self.spatial.dot(&other.spatial) + self.scalar * other.scalar
    }

    pub fn to_vector4(&self) -> Vector4<f64> {
        Vector4::new(self.spatial.x, self.spatial.y, self.spatial.z, self.scalar)
    }

    pub fn from_vector4(v: &Vector4<f64>) -> Self {
        Self::new(Vec3::new(v.x, v.y, v.z), v.w)
    }

    pub fn is_finite(&self) -> bool {
        self.spatial.iter().all(|c| c.is_finite()) && self.scalar.is_finite()
    }
}

impl Add for Vec4 {
    type Output = Vec4;
    fn add(self, rhs: Vec4) -> Vec4 {
        Vec4::new(self.spatial + rhs.spatial, self.scalar + rhs.scalar)
    }
}

impl Sub for Vec4 {
    type Output = Vec4;
    fn sub(self, rhs: Vec4) -> Vec4 {
        Vec4::new(self.spatial - rhs.spatial, self.scalar - rhs.scalar)
    }
}

impl Neg for Vec4 {
    type Output = Vec4;
    fn neg(self) -> Vec4 {
        Vec4::new(-self.spatial, -self.scalar)
    }
}

impl Mul<f64> for Vec4 {
    type Output = Vec4;
    fn mul(self, k: f64) -> Vec4 {
        Vec4::new(self.spatial * k, self.scalar * k)
    }
}

/// Body velocity ξ = (Ω, v) ∈ 𝔰𝔢(3).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AlgebraVector {
    pub omega: Vec3,
    pub vel: Vec3,
}

impl AlgebraVector {
    pub fn new(omega: Vec3, vel: Vec3) -> Self {
        Self { omega, vel }
    }

    pub fn zeros() -> Self {
        Self::default()
    }

    pub fn is_finite(&self) -> bool {
        self.omega
            .iter()
            .chain(self.vel.iter())
            .all(|c| c.is_finite())
    }
}

impl Add for AlgebraVector {
    type Output = AlgebraVector;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.omega + rhs.omega, self.vel + rhs.vel)
    }
}

impl Sub for AlgebraVector {
    type Output = AlgebraVector;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.omega - rhs.omega, self.vel - rhs.vel)
    }
}

impl Neg for AlgebraVector {
    type Output = AlgebraVector;
    fn neg(self) -> Self {
        Self::new(-self.omega, -self.vel)
    }
}

impl Mul<f64> for AlgebraVector {
    type Output = AlgebraVector;
    fn mul(self, k: f64) -> Self {
        Self::new(self.omega * k, self.vel * k)
    }
}

/// Impulse (Π, P) ∈ 𝔰𝔢(3)*.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MomentumCovector {
    pub pi: Vec3,
    pub p: Vec3,
}

impl MomentumCovector {
    pub fn new(pi: Vec3, p: Vec3) -> Self {
        Self { pi, p }
    }

    pub fn zeros() -> Self {
        Self::default()
    }

    /// Dual pairing ⟨(Π, P), (Ω, v)⟩ = Π·Ω + P·v.
    pub fn pair(&self, xi: &AlgebraVector) -> f64 {
        self.pi.dot(&xi.omega) + self.p.dot(&xi.vel)
    }

    /// Largest absolute component.
    pub fn sup_norm(&self) -> f64 {
        self.pi.amax().max(self.p.amax())
    }

    pub fn is_finite(&self) -> bool {
        self.pi.iter().chain(self.p.iter()).all(|c| c.is_finite())
    }
}

impl Add for MomentumCovector {
    type Output = MomentumCovector;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.pi + rhs.pi, self.p + rhs.p)
    }
}

impl AddAssign for MomentumCovector {
    fn add_assign(&mut self, rhs: Self) {
        self.pi += rhs.pi;
        self.p += rhs.p;
    }
}

impl Sub for MomentumCovector {
    type Output = MomentumCovector;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.pi - rhs.pi, self.p - rhs.p)
    }
}

impl Neg for MomentumCovector {
    type Output = MomentumCovector;
    fn neg(self) -> Self {
        Self::new(-self.pi, -self.p)
    }
}

impl Mul<f64> for MomentumCovector {
    type Output = MomentumCovector;
    fn mul(self, k: f64) -> Self {
        Self::new(self.pi * k, self.p * k)
    }
}

/// Frobenius norm of RᵀR − I.
pub fn orthogonality_residual(r: &Mat3) -> f64 {
    (r.transpose() * r - Mat3::identity()).norm()
}

fn check_rotation(r: &Mat3) -> Result<()> {
    if !r.iter().all(|c| c.is_finite()) {
        return Err(Error::NonFinite("rotation"));
    }
    let residual = orthogonality_residual(r);
    let det = r.determinant();
    if residual > ROTATION_TOL || det <= 0.0 {
        return Err(Error::InvalidRotation { residual, det });
    }
    Ok(())
}

/// A rigid placement s = (R, 𝐱) ∈ SE(3).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SE3Element {
    rotation: Mat3,
    translation: Vec3,
}

impl SE3Element {
    pub fn new(rotation: Mat3, translation: Vec3) -> Result<Self> {
        check_rotation(&rotation)?;
        if !translation.iter().all(|c| c.is_finite()) {
            return Err(Error::NonFinite("translation"));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    /// Builds an element without the orthogonality check. The caller is
    /// responsible for keeping `rotation` in SO(3).
    pub(crate) fn new_unchecked(rotation: Mat3, translation: Vec3) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn identity() -> Self {
        Self::new_unchecked(Mat3::identity(), Vec3::zeros())
    }

    pub fn rotation(&self) -> &Mat3 {
        &self.rotation
    }

    pub fn translation(&self) -> &Vec3 {
        &self.translation
    }

    /// The 4×4 homogeneous matrix [R 𝐱; 0ᵀ 1].
    pub fn homogeneous(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    /// sᵀ a, the transport of an ℝ⁴ advected parameter along s.
    pub fn transpose_apply(&self, a: &Vec4) -> Vec4 {
        Vec4::new(
            self.rotation.transpose() * a.spatial,
            self.translation.dot(&a.spatial) + a.scalar,
        )
    }
}

pub fn se3_compose(s1: &SE3Element, s2: &SE3Element) -> Result<SE3Element> {
    check_rotation(&s1.rotation)?;
    check_rotation(&s2.rotation)?;
    Ok(SE3Element::new_unchecked(
        s1.rotation * s2.rotation,
        s1.rotation * s2.translation + s1.translation,
    ))
}

pub fn se3_inverse(s: &SE3Element) -> Result<SE3Element> {
    check_rotation(&s.rotation)?;
    let rt = s.rotation.transpose();
    Ok(SE3Element::new_unchecked(rt, -(rt * s.translation)))
}

/// σ*(s) a = (sᵀ)⁻¹ a for the homogeneous representation on ℝ⁴.
pub fn sigma_star(s: &SE3Element, a: &Vec4) -> Result<Vec4> {
    check_rotation(&s.rotation)?;
    // (sᵀ)⁻¹ = [R 0; −𝐱ᵀR 1]
    let r_gamma = s.rotation * a.spatial;
    Ok(Vec4::new(r_gamma, a.scalar - s.translation.dot(&r_gamma)))
}

pub fn hat(a: &Vec3) -> Mat3 {
    Mat3::new(0.0, -a.z, a.y, a.z, 0.0, -a.x, -a.y, a.x, 0.0)
}

pub fn vee(m: &Mat3) -> Result<Vec3> {
    let residual = (m + m.transpose()).amax();
    if !residual.is_finite() || residual > SKEW_TOL {
        return Err(Error::NotSkew { residual });
    }
    Ok(Vec3::new(
        0.5 * (m[(2, 1)] - m[(1, 2)]),
        0.5 * (m[(0, 2)] - m[(2, 0)]),
        0.5 * (m[(1, 0)] - m[(0, 1)]),
    ))
}

/// ad_(Ω,v)(η,w) = (Ω×η, Ω×w − η×v).
pub fn ad(x: &AlgebraVector, y: &AlgebraVector) -> AlgebraVector {
    AlgebraVector::new(
        x.omega.cross(&y.omega),
        x.omega.cross(&y.vel) - y.omega.cross(&x.vel),
    )
}

/// ad*_(Ω,v)(μ,α) = (μ×Ω − v×α, α×Ω).
pub fn coad(x: &AlgebraVector, m: &MomentumCovector) -> MomentumCovector {
    MomentumCovector::new(
        m.pi.cross(&x.omega) - x.vel.cross(&m.p),
        m.p.cross(&x.omega),
    )
}

/// v ⋄ α = 𝐉(v, α) = v × α.
pub fn diamond(v: &Vec3, alpha: &Vec3) -> Vec3 {
    v.cross(alpha)
}

/// 𝐊(𝐲, Γ) = (𝐲×Γ, 0) for σ(R, 𝐱)𝐲 = R𝐲 on ℝ³.
pub fn momentum_k_r3(y: &Vec3, gamma: &Vec3) -> MomentumCovector {
    MomentumCovector::new(y.cross(gamma), Vec3::zeros())
}

/// 𝐊(y, a) = (𝐲×Γ, y₄Γ) for σ(s)y = s y on ℝ⁴, with a = (Γ, h).
pub fn momentum_k_r4(y: &Vec4, a: &Vec4) -> MomentumCovector {
    MomentumCovector::new(y.spatial.cross(&a.spatial), a.spatial * y.scalar)
}

/// 𝐌((y, z), (Δ₁, Δ₂)) = (𝐲×Δ₁ + 𝐳×Δ₂, y₄Δ₁ + z₄Δ₂) for two copies of the ℝ⁴ representation.
pub fn momentum_m_drift(y: &Vec4, z: &Vec4, d1: &Vec4, d2: &Vec4) -> MomentumCovector {
    momentum_k_r4(y, d1) + momentum_k_r4(z, d2)
}

/// σ'(Ω, v)* Γ = Γ×Ω.
pub fn advect_rate_r3(x: &AlgebraVector, gamma: &Vec3) -> Vec3 {
    gamma.cross(&x.omega)
}

/// σ'(Ω, v)* a = (Γ×Ω, Γ·v).
pub fn advect_rate_r4(x: &AlgebraVector, a: &Vec4) -> Vec4 {
    Vec4::new(a.spatial.cross(&x.omega), a.spatial.dot(&x.vel))
}

/// Rodrigues' formula for exp: 𝔰𝔬(3) → SO(3).
pub fn exp_so3(omega: &Vec3) -> Mat3 {
    let theta = omega.norm();
    let k = hat(omega);
    let k2 = k * k;
    let (a, b) = if theta < EXP_SMALL_ANGLE {
        (1.0 - theta * theta / 6.0, 0.5 - theta * theta / 24.0)
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / (theta * theta))
    };
    Mat3::identity() + k * a + k2 * b
}

/// A linear representation σ of SE(3) on a parameter space X, with X*
/// identified with X through the dot product. This is the extension point for
/// semidirect products other than the two shipped here: the Euler–Poincaré
/// right-hand side and the momentum maps are written against this trait.
pub trait Representation {
    type Element: Copy + std::fmt::Debug;

    /// Infinitesimal action σ'(ξ) y.
    fn infinitesimal(&self, xi: &AlgebraVector, y: &Self::Element) -> Self::Element;

    /// Dual infinitesimal action σ'(ξ)* a, i.e. the advection rate ȧ.
    fn advect_rate(&self, xi: &AlgebraVector, a: &Self::Element) -> Self::Element;

    /// Momentum map 𝐊(y, a) = (σ'_y)* a.
    fn momentum(&self, y: &Self::Element, a: &Self::Element) -> MomentumCovector;

    /// Dual action σ*(s) a.
    fn act_dual(&self, s: &SE3Element, a: &Self::Element) -> Self::Element;

    fn pairing(&self, a: &Self::Element, y: &Self::Element) -> f64;
}

/// σ(R, 𝐱) 𝐲 = R 𝐲 on ℝ³.
#[derive(Clone, Copy, Debug, Default)]
pub struct Rotational;

/// σ(s) y = s y on ℝ⁴ using the homogeneous matrix of s.
#[derive(Clone, Copy, Debug, Default)]
pub struct Homogeneous;

/// Direct sum of two representations, acting componentwise on X × Y.
#[derive(Clone, Copy, Debug, Default)]
pub struct Product<A, B>(pub A, pub B);

impl Representation for Rotational {
    type Element = Vec3;

    fn infinitesimal(&self, xi: &AlgebraVector, y: &Vec3) -> Vec3 {
        xi.omega.cross(y)
    }

    fn advect_rate(&self, xi: &AlgebraVector, a: &Vec3) -> Vec3 {
        advect_rate_r3(xi, a)
    }

    fn momentum(&self, y: &Vec3, a: &Vec3) -> MomentumCovector {
        momentum_k_r3(y, a)
    }

    fn act_dual(&self, s: &SE3Element, a: &Vec3) -> Vec3 {
        s.rotation * a
    }

    fn pairing(&self, a: &Vec3, y: &Vec3) -> f64 {
        a.dot(y)
    }
}

impl Representation for Homogeneous {
    type Element = Vec4;

    fn infinitesimal(&self, xi: &AlgebraVector, y: &Vec4) -> Vec4 {
        Vec4::new(xi.omega.cross(&y.spatial) + xi.vel * y.scalar, 0.0)
    }

    fn advect_rate(&self, xi: &AlgebraVector, a: &Vec4) -> Vec4 {
        advect_rate_r4(xi, a)
    }

    fn momentum(&self, y: &Vec4, a: &Vec4) -> MomentumCovector {
        momentum_k_r4(y, a)
    }

    fn act_dual(&self, s: &SE3Element, a: &Vec4) -> Vec4 {
        let r_gamma = s.rotation * a.spatial;
        Vec4::new(r_gamma, a.scalar - s.translation.dot(&r_gamma))
    }

    fn pairing(&self, a: &Vec4, y: &Vec4) -> f64 {
        a.dot(y)
    }
}

impl<A: Representation, B: Representation> Representation for Product<A, B> {
    type Element = (A::Element, B::Element);

    fn infinitesimal(&self, xi: &AlgebraVector, y: &Self::Element) -> Self::Element {
        (
            self.0.infinitesimal(xi, &y.0),
            self.1.infinitesimal(xi, &y.1),
        )
    }

    fn advect_rate(&self, xi: &AlgebraVector, a: &Self::Element) -> Self::Element {
        (self.0.advect_rate(xi, &a.0), self.1.advect_rate(xi, &a.1))
    }

    fn momentum(&self, y: &Self::Element, a: &Self::Element) -> MomentumCovector {
        self.0.momentum(&y.0, &a.0) + self.1.momentum(&y.1, &a.1)
    }

    fn act_dual(&self, s: &SE3Element, a: &Self::Element) -> Self::Element {
        (self.0.act_dual(s, &a.0), self.1.act_dual(s, &a.1))
    }

    fn pairing(&self, a: &Self::Element, y: &Self::Element) -> f64 {
        self.0.pairing(&a.0, &y.0) + self.1.pairing(&a.1, &y.1)
    }
}

/// Momentum rate of the Euler–Poincaré equation with advected parameters,
/// d/dt δℓ/δξ = ad*_ξ δℓ/δξ + 𝐊(δℓ/δa, a), for any representation.
pub fn ep_momentum_rate<R: Representation>(
    rep: &R,
    xi: &AlgebraVector,
    momentum: &MomentumCovector,
    dl_da: &R::Element,
    a: &R::Element,
) -> MomentumCovector {
    coad(xi, momentum) + rep.momentum(dl_da, a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn e1() -> Vec3 {
        Vec3::x()
    }
    fn e2() -> Vec3 {
        Vec3::y()
    }
    fn e3() -> Vec3 {
        Vec3::z()
    }

    fn rv3(rng: &mut ChaCha8Rng) -> Vec3 {
        Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        )
    }
    fn rv4(rng: &mut ChaCha8Rng) -> Vec4 {
        Vec4::new(rv3(rng), rng.gen_range(-1.0..1.0))
    }
    fn rxi(rng: &mut ChaCha8Rng) -> AlgebraVector {
        AlgebraVector::new(rv3(rng), rv3(rng))
    }
    fn rse3(rng: &mut ChaCha8Rng) -> SE3Element {
        SE3Element::new(exp_so3(&(rv3(rng) * 3.0)), rv3(rng) * 5.0).unwrap()
    }

    #[test]
    fn hat_basis_and_cross_product() {
        let expected = Mat3::new(0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0);
        assert_eq!(hat(&e1()), expected);
        assert_eq!(hat(&Vec3::zeros()), Mat3::zeros());
        // (1,2,3)×(4,5,6) = (2·6−3·5, 3·4−1·6, 1·5−2·4)
        let got = hat(&Vec3::new(1.0, 2.0, 3.0)) * Vec3::new(4.0, 5.0, 6.0);
        assert_eq!(got, Vec3::new(-3.0, 6.0, -3.0));
    }

    #[test]
    fn vee_inverts_hat_and_rejects_symmetric() {
        let a = Vec3::new(1.0, 2.0, 3.0);
        assert_eq!(vee(&hat(&a)).unwrap(), a);
        assert_eq!(vee(&Mat3::zeros()).unwrap(), Vec3::zeros());
        assert!(matches!(vee(&Mat3::identity()), Err(Error::NotSkew { .. })));
    }

    #[test]
    fn ad_examples() {
        let z = Vec3::zeros();
        let r = ad(&AlgebraVector::new(e3(), z), &AlgebraVector::new(e1(), z));
        assert_eq!(r, AlgebraVector::new(e2(), z));
        let v = Vec3::new(0.3, -1.0, 2.0);
        let w = Vec3::new(1.5, 0.2, -0.7);
        assert_eq!(
            ad(&AlgebraVector::new(z, v), &AlgebraVector::new(z, w)),
            AlgebraVector::zeros()
        );
        // (Ω×η, Ω×w − η×v) with Ω=e₁, v=e₂, η=e₂, w=e₃ gives (e₃, −e₂ − 0)
        let r = ad(
            &AlgebraVector::new(e1(), e2()),
            &AlgebraVector::new(e2(), e3()),
        );
        assert_eq!(r, AlgebraVector::new(e3(), -e2()));
    }

    #[test]
    fn coad_examples() {
        let x = AlgebraVector::new(e3(), Vec3::zeros());
        let m = MomentumCovector::new(e1(), e2());
        assert_eq!(coad(&x, &m), MomentumCovector::new(-e2(), e1()));
        let m = MomentumCovector::new(Vec3::new(1.0, 2.0, 3.0), Vec3::new(-1.0, 0.5, 4.0));
        assert_eq!(coad(&AlgebraVector::zeros(), &m), MomentumCovector::zeros());
    }

    #[test]
    fn coad_is_dual_of_ad() {
        // ⟨ad*_x m, y⟩ = ⟨m, ad_x y⟩ evaluated componentwise.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let (x, y) = (rxi(&mut rng), rxi(&mut rng));
            let m = MomentumCovector::new(rv3(&mut rng), rv3(&mut rng));
            let lhs = coad(&x, &m).pair(&y);
            let rhs = m.pair(&ad(&x, &y));
            assert!((lhs - rhs).abs() < 1e-12, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn ad_antisymmetry_and_jacobi() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let (x, y, z) = (rxi(&mut rng), rxi(&mut rng), rxi(&mut rng));
            let s = ad(&x, &y) + ad(&y, &x);
            assert!(s.omega.amax().max(s.vel.amax()) < 1e-15);
            let j = ad(&x, &ad(&y, &z)) + ad(&y, &ad(&z, &x)) + ad(&z, &ad(&x, &y));
            assert!(j.omega.amax().max(j.vel.amax()) < 1e-12);
        }
    }

    #[test]
    fn diamond_examples() {
        assert_eq!(diamond(&e1(), &e2()), e3());
        let v = Vec3::new(0.4, -2.0, 1.0);
        assert_eq!(diamond(&v, &v), Vec3::zeros());
        assert_eq!(
            diamond(&Vec3::new(1.0, 2.0, 3.0), &Vec3::new(4.0, 5.0, 6.0)),
            Vec3::new(-3.0, 6.0, -3.0)
        );
    }

    #[test]
    fn momentum_map_examples() {
        assert_eq!(
            momentum_k_r3(&e1(), &e3()),
            MomentumCovector::new(-e2(), Vec3::zeros())
        );
        let g = Vec3::new(0.2, 0.3, -0.9);
        assert_eq!(momentum_k_r3(&g, &g), MomentumCovector::zeros());

        let k = momentum_k_r4(&Vec4::new(e1(), 1.0), &Vec4::new(e3(), 2.0));
        assert_eq!(k, MomentumCovector::new(-e2(), e3()));
        let k = momentum_k_r4(&Vec4::zeros(), &Vec4::new(g, 3.0));
        assert_eq!(k, MomentumCovector::zeros());

        let m = momentum_m_drift(
            &Vec4::new(e1(), 0.0),
            &Vec4::zeros(),
            &Vec4::new(e2(), 0.0),
            &Vec4::new(Vec3::new(5.0, 6.0, 7.0), 8.0),
        );
        assert_eq!(m, MomentumCovector::new(e3(), Vec3::zeros()));
        let (d1, d2) = (Vec3::new(1.0, 2.0, 3.0), Vec3::new(-1.0, 0.0, 4.0));
        let m = momentum_m_drift(
            &Vec4::new(Vec3::zeros(), 1.0),
            &Vec4::new(Vec3::zeros(), 1.0),
            &Vec4::new(d1, 0.7),
            &Vec4::new(d2, -0.2),
        );
        assert_eq!(m, MomentumCovector::new(Vec3::zeros(), d1 + d2));
    }

    #[test]
    fn momentum_maps_satisfy_pairing_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let xi = rxi(&mut rng);
            // ⟨K(y,Γ), ξ⟩ = Γ·(Ω×y)
            let (y, g) = (rv3(&mut rng), rv3(&mut rng));
            let lhs = momentum_k_r3(&y, &g).pair(&xi);
            assert!((lhs - g.dot(&xi.omega.cross(&y))).abs() < 1e-12);
            // ⟨K(y,a), ξ⟩ = Γ·(Ω×𝐲) + y₄ Γ·v
            let (y4, a) = (rv4(&mut rng), rv4(&mut rng));
            let lhs = momentum_k_r4(&y4, &a).pair(&xi);
            let rhs =
                a.spatial.dot(&xi.omega.cross(&y4.spatial)) + y4.scalar * a.spatial.dot(&xi.vel);
            assert!((lhs - rhs).abs() < 1e-12);
            // ⟨M((y,z),(Δ₁,Δ₂)), ξ⟩ = ⟨(Δ₁,Δ₂), τ'(ξ)(y,z)⟩
            let (z4, d1, d2) = (rv4(&mut rng), rv4(&mut rng), rv4(&mut rng));
            let lhs = momentum_m_drift(&y4, &z4, &d1, &d2).pair(&xi);
            let tau_y = xi.omega.cross(&y4.spatial) + xi.vel * y4.scalar;
            let tau_z = xi.omega.cross(&z4.spatial) + xi.vel * z4.scalar;
            let rhs = d1.spatial.dot(&tau_y) + d2.spatial.dot(&tau_z);
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn generic_representations_are_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let drift = Product(Homogeneous, Homogeneous);
        for _ in 0..100 {
            let xi = rxi(&mut rng);
            let (y, a) = (rv3(&mut rng), rv3(&mut rng));
            let k = Rotational.momentum(&y, &a).pair(&xi);
            let t = Rotational.pairing(&a, &Rotational.infinitesimal(&xi, &y));
            assert!((k - t).abs() < 1e-12);
            let r = Rotational.pairing(&Rotational.advect_rate(&xi, &a), &y);
            assert!((r - t).abs() < 1e-12);

            let (y, a) = (
                (rv4(&mut rng), rv4(&mut rng)),
                (rv4(&mut rng), rv4(&mut rng)),
            );
            let k = drift.momentum(&y, &a).pair(&xi);
            let t = drift.pairing(&a, &drift.infinitesimal(&xi, &y));
            assert!((k - t).abs() < 1e-12);
            let r = drift.pairing(&drift.advect_rate(&xi, &a), &y);
            assert!((r - t).abs() < 1e-12);
        }
    }

    #[test]
    fn advection_rate_examples() {
        let z = Vec3::zeros();
        assert_eq!(advect_rate_r3(&AlgebraVector::new(e3(), z), &e1()), -e2());
        let g = Vec3::new(0.1, 0.2, 0.3);
        assert_eq!(advect_rate_r3(&AlgebraVector::new(g * 2.0, z), &g), z);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let g = rv3(&mut rng);
            assert!(g.dot(&advect_rate_r3(&rxi(&mut rng), &g)).abs() < 1e-15);
        }
        assert_eq!(
            advect_rate_r4(&AlgebraVector::new(z, e3()), &Vec4::new(e3(), 0.0)),
            Vec4::new(z, 1.0)
        );
        assert_eq!(
            advect_rate_r4(&AlgebraVector::new(e3(), z), &Vec4::new(e1(), 5.0)),
            Vec4::new(-e2(), 0.0)
        );
    }

    #[test]
    fn group_operations() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let s = rse3(&mut rng);
            let c = se3_compose(&s, &SE3Element::identity()).unwrap();
            assert_eq!(c, s);
            let id = se3_compose(&s, &se3_inverse(&s).unwrap()).unwrap();
            assert!((id.rotation() - Mat3::identity()).amax() < 1e-12);
            assert!(id.translation().amax() < 1e-12);
            // σ*(s) σ*(s⁻¹) a = a
            let a = rv4(&mut rng);
            let back = sigma_star(&s, &sigma_star(&se3_inverse(&s).unwrap(), &a).unwrap()).unwrap();
            assert!((back - a).to_vector4().amax() < 1e-12);
            // σ*(s) a agrees with the explicit (sᵀ)⁻¹ a
            let m = s.homogeneous().transpose().try_inverse().unwrap() * a.to_vector4();
            let got = sigma_star(&s, &a).unwrap().to_vector4();
            assert!((m - got).amax() < 1e-12);
            // σ*(s⁻¹) a = sᵀ a
            let t = sigma_star(&se3_inverse(&s).unwrap(), &a).unwrap();
            assert!((t - s.transpose_apply(&a)).to_vector4().amax() < 1e-12);
        }
    }

    #[test]
    fn invalid_rotation_rejected() {
        let bad = Mat3::identity() * 1.01;
        assert!(matches!(
            SE3Element::new(bad, Vec3::zeros()),
            Err(Error::InvalidRotation { .. })
        ));
        let reflection = Mat3::from_diagonal(&Vec3::new(1.0, 1.0, -1.0));
        assert!(SE3Element::new(reflection, Vec3::zeros()).is_err());
        let broken = SE3Element::new_unchecked(bad, Vec3::zeros());
        assert!(se3_inverse(&broken).is_err());
        assert!(sigma_star(&broken, &Vec4::zeros()).is_err());
    }

    #[test]
    fn exponential_map() {
        assert_eq!(exp_so3(&Vec3::zeros()), Mat3::identity());
        let q = exp_so3(&Vec3::new(0.0, 0.0, FRAC_PI_2));
        assert_relative_eq!(q * e1(), e2(), epsilon = 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let w = rv3(&mut rng) * 4.0;
            let r = exp_so3(&w);
            assert!(orthogonality_residual(&r) < 1e-13);
            assert!((r.determinant() - 1.0).abs() < 1e-13);
            assert!((r * exp_so3(&-w) - Mat3::identity()).amax() < 1e-13);
        }
        // Taylor branch stays consistent with the closed form near the threshold.
        let w = Vec3::new(3e-9, -2e-9, 1e-9);
        assert!((exp_so3(&w) - (Mat3::identity() + hat(&w))).amax() < 1e-16);
    }
}

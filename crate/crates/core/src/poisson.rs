//! Lie–Poisson brackets on the duals of the SE(3) semidirect-product algebras
//! used by the shipped systems, written as bilinear forms on pre-evaluated
//! gradients. The brackets drive an independent route to the equations of
//! motion (`ż_i = {z_i, h}`) and certify Casimirs.
//!
//! Only the SE(3) specializations are implemented. A new semidirect product
//! would add a [`BracketId`] whose terms follow the same pattern: one
//! `advected_r3_term` per ℝ³ parameter and one `advected_r4_term` per ℝ⁴
//! parameter on top of the 𝔰𝔢(3)* bracket.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{MomentumCovector, Vec3, Vec4};
use crate::error::{Error, Result};
use crate::systems::ReducedState;

/// Phase spaces with a shipped bracket.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BracketId {
    /// 𝔰𝔢(3)*: (Π, P).
    Se3,
    /// (𝔰𝔢(3) ⋉ ℝ³)*: (Π, P, Γ). Uncontrolled vehicle; heavy top after shaping.
    Se3R3,
    /// (𝔰𝔢(3) ⋉ ℝ⁴)*: (Π, P, Γ, h). Heavy top on a movable base.
    Se3R4,
    /// (𝔰𝔢(3) ⋉ (ℝ³ × ℝ³))*: (Π, P, Γ, Θ). Desired-steady-motion closed loop.
    SteadyMotion,
    /// (𝔰𝔢(3) ⋉ (ℝ³ × (ℝ⁴ × ℝ⁴)))*: (Π, P, Γ, Δ₁, Δ₂). Drift closed loop.
    Drift,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Shape {
    gamma: bool,
    h: bool,
    theta: bool,
    deltas: bool,
}

impl BracketId {
    pub const ALL: [BracketId; 5] = [
        BracketId::Se3,
        BracketId::Se3R3,
        BracketId::Se3R4,
        BracketId::SteadyMotion,
        BracketId::Drift,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BracketId::Se3 => "se3",
            BracketId::Se3R3 => "se3_r3",
            BracketId::Se3R4 => "se3_r4",
            BracketId::SteadyMotion => "steady_motion",
            BracketId::Drift => "drift",
        }
    }

    fn shape(self) -> Shape {
        let (gamma, h, theta, deltas) = match self {
            BracketId::Se3 => (false, false, false, false),
            BracketId::Se3R3 => (true, false, false, false),
            BracketId::Se3R4 => (true, true, false, false),
            BracketId::SteadyMotion => (true, false, true, false),
            BracketId::Drift => (true, false, false, true),
        };
        Shape {
            gamma,
            h,
            theta,
            deltas,
        }
    }

    /// Dimension of the phase space.
    pub fn dim(self) -> usize {
        let s = self.shape();
        6 + 3 * s.gamma as usize + s.h as usize + 3 * s.theta as usize + 8 * s.deltas as usize
    }
}

/// A point of the Lie–Poisson phase space. Also used for rate vectors.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhasePoint {
    pub pi: Vec3,
    pub p: Vec3,
    pub gamma: Option<Vec3>,
    pub h: Option<f64>,
    pub theta: Option<Vec3>,
    pub d1: Option<Vec4>,
    pub d2: Option<Vec4>,
}

/// Gradient of a function on the phase space, one slot per coordinate block.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GradientEval {
    pub d_pi: Vec3,
    pub d_p: Vec3,
    pub d_gamma: Option<Vec3>,
    pub d_h: Option<f64>,
    pub d_theta: Option<Vec3>,
    pub d_d1: Option<Vec4>,
    pub d_d2: Option<Vec4>,
}

type Slots = (
    Vec3,
    Vec3,
    Option<Vec3>,
    Option<f64>,
    Option<Vec3>,
    Option<Vec4>,
    Option<Vec4>,
);

fn shape_of(s: &Slots) -> Shape {
    Shape {
        gamma: s.2.is_some(),
        h: s.3.is_some(),
        theta: s.4.is_some(),
        deltas: s.5.is_some() && s.6.is_some(),
    }
}

fn check_shape(id: BracketId, s: &Slots) -> Result<()> {
    let ok = shape_of(s) == id.shape() && s.5.is_some() == s.6.is_some();
    if ok {
        Ok(())
    } else {
        Err(Error::ArityMismatch(id.name()))
    }
}

fn flatten(id: BracketId, s: &Slots) -> Result<Vec<f64>> {
    check_shape(id, s)?;
    let mut out = Vec::with_capacity(id.dim());
    out.extend(s.0.iter());
    out.extend(s.1.iter());
    if let Some(g) = s.2 {
        out.extend(g.iter());
    }
    if let Some(h) = s.3 {
        out.push(h);
    }
    if let Some(t) = s.4 {
        out.extend(t.iter());
    }
    for d in [s.5, s.6].into_iter().flatten() {
        out.extend(d.spatial.iter());
        out.push(d.scalar);
    }
    Ok(out)
}

fn unflatten(id: BracketId, x: &[f64]) -> Result<Slots> {
    if x.len() != id.dim() {
        return Err(Error::ArityMismatch(id.name()));
    }
    let shape = id.shape();
    let mut i = 0;
    let v3 = |i: &mut usize| {
        let v = Vec3::new(x[*i], x[*i + 1], x[*i + 2]);
        *i += 3;
        v
    };
    let pi = v3(&mut i);
    let p = v3(&mut i);
    let gamma = shape.gamma.then(|| v3(&mut i));
    let h = shape.h.then(|| {
        i += 1;
        x[i - 1]
    });
    let theta = shape.theta.then(|| v3(&mut i));
    let v4 = |i: &mut usize| {
        let v = Vec4::new(Vec3::new(x[*i], x[*i + 1], x[*i + 2]), x[*i + 3]);
        *i += 4;
        v
    };
    let d1 = shape.deltas.then(|| v4(&mut i));
    let d2 = shape.deltas.then(|| v4(&mut i));
    Ok((pi, p, gamma, h, theta, d1, d2))
}

impl PhasePoint {
    fn slots(&self) -> Slots {
        (
            self.pi, self.p, self.gamma, self.h, self.theta, self.d1, self.d2,
        )
    }

    fn from_slots(s: Slots) -> Self {
        Self {
            pi: s.0,
            p: s.1,
            gamma: s.2,
            h: s.3,
            theta: s.4,
            d1: s.5,
            d2: s.6,
        }
    }

    pub fn to_flat(&self, id: BracketId) -> Result<Vec<f64>> {
        flatten(id, &self.slots())
    }

    pub fn from_flat(id: BracketId, x: &[f64]) -> Result<Self> {
        Ok(Self::from_slots(unflatten(id, x)?))
    }

    /// Phase point of a reduced state whose impulses are `momentum`.
    pub fn from_reduced(momentum: &MomentumCovector, state: &ReducedState) -> Self {
        Self {
            pi: momentum.pi,
            p: momentum.p,
            gamma: state.gamma(),
            h: state.a_r4.map(|a| a.scalar),
            theta: state.theta,
            d1: state.deltas.map(|d| d.0),
            d2: state.deltas.map(|d| d.1),
        }
    }

    pub fn max_abs_diff(&self, other: &PhasePoint) -> f64 {
        match (self.slots_flat(), other.slots_flat()) {
            (a, b) if a.len() == b.len() && shape_of(&self.slots()) == shape_of(&other.slots()) => {
                a.iter()
                    .zip(&b)
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max)
            }
            _ => f64::INFINITY,
        }
    }

    fn slots_flat(&self) -> Vec<f64> {
        let s = self.slots();
        let mut out: Vec<f64> = s.0.iter().chain(s.1.iter()).copied().collect();
        out.extend(s.2.iter().flat_map(|v| v.iter().copied()));
        out.extend(s.3);
        out.extend(s.4.iter().flat_map(|v| v.iter().copied()));
        for d in [s.5, s.6].into_iter().flatten() {
            out.extend(d.to_vector4().iter());
        }
        out
    }
}

impl GradientEval {
    fn slots(&self) -> Slots {
        (
            self.d_pi,
            self.d_p,
            self.d_gamma,
            self.d_h,
            self.d_theta,
            self.d_d1,
            self.d_d2,
        )
    }

    fn from_slots(s: Slots) -> Self {
        Self {
            d_pi: s.0,
            d_p: s.1,
            d_gamma: s.2,
            d_h: s.3,
            d_theta: s.4,
            d_d1: s.5,
            d_d2: s.6,
        }
    }

    /// All-zero gradient with the slots of `id`.
    pub fn zeros(id: BracketId) -> Self {
        let s = id.shape();
        Self {
            d_pi: Vec3::zeros(),
            d_p: Vec3::zeros(),
            d_gamma: s.gamma.then(Vec3::zeros),
            d_h: s.h.then_some(0.0),
            d_theta: s.theta.then(Vec3::zeros),
            d_d1: s.deltas.then(Vec4::zeros),
            d_d2: s.deltas.then(Vec4::zeros),
        }
    }

    pub fn to_flat(&self, id: BracketId) -> Result<Vec<f64>> {
        flatten(id, &self.slots())
    }

    pub fn from_flat(id: BracketId, x: &[f64]) -> Result<Self> {
        Ok(Self::from_slots(unflatten(id, x)?))
    }
}

fn get3(v: Option<Vec3>) -> Vec3 {
    v.unwrap_or_else(Vec3::zeros)
}

fn get4(v: Option<Vec4>) -> Vec4 {
    v.unwrap_or_else(Vec4::zeros)
}

/// −Π·(∂f/∂Π × ∂h/∂Π) − P·(∂f/∂Π × ∂h/∂P − ∂h/∂Π × ∂f/∂P)
fn se3_terms(z: &PhasePoint, df: &GradientEval, dh: &GradientEval) -> f64 {
    -z.pi.dot(&df.d_pi.cross(&dh.d_pi))
        - z.p.dot(&(df.d_pi.cross(&dh.d_p) - dh.d_pi.cross(&df.d_p)))
}

/// −a·(∂f/∂Π × ∂h/∂a − ∂h/∂Π × ∂f/∂a) for an ℝ³ advected parameter.
fn advected_r3_term(a: &Vec3, df_pi: &Vec3, dh_pi: &Vec3, df_a: &Vec3, dh_a: &Vec3) -> f64 {
    -a.dot(&(df_pi.cross(dh_a) - dh_pi.cross(df_a)))
}

/// −A·(∂f/∂Π × ∂h/∂A − ∂h/∂Π × ∂f/∂A − ∂f/∂α ∂h/∂P + ∂h/∂α ∂f/∂P) for an
/// ℝ⁴ advected parameter (A, α).
fn advected_r4_term(
    a: &Vec4,
    df: &GradientEval,
    dh: &GradientEval,
    df_a: &Vec4,
    dh_a: &Vec4,
) -> f64 {
    -a.spatial.dot(
        &(df.d_pi.cross(&dh_a.spatial) - dh.d_pi.cross(&df_a.spatial) - dh.d_p * df_a.scalar
            + df.d_p * dh_a.scalar),
    )
}

/// {f, h} on 𝔰𝔢(3)*.
pub fn bracket_se3(z: &PhasePoint, df: &GradientEval, dh: &GradientEval) -> f64 {
    se3_terms(z, df, dh)
}

/// {f, h} on (𝔰𝔢(3) ⋉ ℝ³)*.
pub fn bracket_se3_r3(z: &PhasePoint, df: &GradientEval, dh: &GradientEval) -> f64 {
    se3_terms(z, df, dh)
        + advected_r3_term(
            &get3(z.gamma),
            &df.d_pi,
            &dh.d_pi,
            &get3(df.d_gamma),
            &get3(dh.d_gamma),
        )
}

/// {f, h} on (𝔰𝔢(3) ⋉ ℝ⁴)* with a = (Γ, h).
pub fn bracket_se3_r4(z: &PhasePoint, df: &GradientEval, dh: &GradientEval) -> f64 {
    let a = Vec4::new(get3(z.gamma), z.h.unwrap_or(0.0));
    let fa = Vec4::new(get3(df.d_gamma), df.d_h.unwrap_or(0.0));
    let ha = Vec4::new(get3(dh.d_gamma), dh.d_h.unwrap_or(0.0));
    se3_terms(z, df, dh) + advected_r4_term(&a, df, dh, &fa, &ha)
}

/// {f, h} on (𝔰𝔢(3) ⋉ (ℝ³ × ℝ³))* with advected (Γ, Θ).
pub fn bracket_steady(z: &PhasePoint, df: &GradientEval, dh: &GradientEval) -> f64 {
    bracket_se3_r3(z, df, dh)
        + advected_r3_term(
            &get3(z.theta),
            &df.d_pi,
            &dh.d_pi,
            &get3(df.d_theta),
            &get3(dh.d_theta),
        )
}

/// {f, h} on (𝔰𝔢(3) ⋉ (ℝ³ × (ℝ⁴ × ℝ⁴)))* with advected Γ and Δᵢ = (Δᵢ, δᵢ).
pub fn bracket_drift(z: &PhasePoint, df: &GradientEval, dh: &GradientEval) -> f64 {
    let pairs = [(z.d1, df.d_d1, dh.d_d1), (z.d2, df.d_d2, dh.d_d2)];
    bracket_se3_r3(z, df, dh)
        + pairs
            .iter()
            .map(|(d, fd, hd)| advected_r4_term(&get4(*d), df, dh, &get4(*fd), &get4(*hd)))
            .sum::<f64>()
}

/// Evaluates the bracket `id` after checking that all three arguments carry
/// exactly the slots of its phase space.
pub fn bracket(id: BracketId, z: &PhasePoint, df: &GradientEval, dh: &GradientEval) -> Result<f64> {
    check_shape(id, &z.slots())?;
    check_shape(id, &df.slots())?;
    check_shape(id, &dh.slots())?;
    Ok(bracket_unchecked(id, z, df, dh))
}

fn bracket_unchecked(id: BracketId, z: &PhasePoint, df: &GradientEval, dh: &GradientEval) -> f64 {
    match id {
        BracketId::Se3 => bracket_se3(z, df, dh),
        BracketId::Se3R3 => bracket_se3_r3(z, df, dh),
        BracketId::Se3R4 => bracket_se3_r4(z, df, dh),
        BracketId::SteadyMotion => bracket_steady(z, df, dh),
        BracketId::Drift => bracket_drift(z, df, dh),
    }
}

/// The bracket on flat coordinate vectors, in the layout of [`PhasePoint::to_flat`].
pub fn bracket_flat(id: BracketId, z: &[f64], df: &[f64], dh: &[f64]) -> Result<f64> {
    let z = PhasePoint::from_flat(id, z)?;
    let df = GradientEval::from_flat(id, df)?;
    let dh = GradientEval::from_flat(id, dh)?;
    Ok(bracket_unchecked(id, &z, &df, &dh))
}

/// Rates ż_i = {z_i, h} assembled by bracketing every coordinate function with h.
pub fn hamiltonian_rhs(id: BracketId, z: &PhasePoint, grad_h: &GradientEval) -> Result<PhasePoint> {
    check_shape(id, &z.slots())?;
    check_shape(id, &grad_h.slots())?;
    let n = id.dim();
    let mut unit = vec![0.0; n];
    let mut rates = Vec::with_capacity(n);
    for i in 0..n {
        unit[i] = 1.0;
        let df = GradientEval::from_flat(id, &unit)?;
        rates.push(bracket_unchecked(id, z, &df, grad_h));
        unit[i] = 0.0;
    }
    PhasePoint::from_flat(id, &rates)
}

/// A Casimir function with its analytic gradient.
#[derive(Clone, Copy)]
pub struct Casimir {
    pub name: &'static str,
    pub value: fn(&PhasePoint) -> f64,
    gradient: fn(&PhasePoint, &mut GradientEval),
}

impl std::fmt::Debug for Casimir {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Casimir").field("name", &self.name).finish()
    }
}

impl Casimir {
    pub fn gradient(&self, id: BracketId, z: &PhasePoint) -> GradientEval {
        let mut g = GradientEval::zeros(id);
        (self.gradient)(z, &mut g);
        g
    }
}

fn d1s(z: &PhasePoint) -> Vec3 {
    get4(z.d1).spatial
}
fn d2s(z: &PhasePoint) -> Vec3 {
    get4(z.d2).spatial
}
fn set_d1(g: &mut GradientEval, v: Vec3) {
    g.d_d1 = Some(Vec4::new(v, 0.0));
}
fn set_d2(g: &mut GradientEval, v: Vec3) {
    g.d_d2 = Some(Vec4::new(v, 0.0));
}

const P_SQUARED: Casimir = Casimir {
    name: "|P|^2",
    value: |z| z.p.norm_squared(),
    gradient: |z, g| g.d_p = 2.0 * z.p,
};
const PI_DOT_P: Casimir = Casimir {
    name: "Pi.P",
    value: |z| z.pi.dot(&z.p),
    gradient: |z, g| {
        g.d_pi = z.p;
        g.d_p = z.pi;
    },
};
const GAMMA_SQUARED: Casimir = Casimir {
    name: "|Gamma|^2",
    value: |z| get3(z.gamma).norm_squared(),
    gradient: |z, g| g.d_gamma = Some(2.0 * get3(z.gamma)),
};
const P_DOT_GAMMA: Casimir = Casimir {
    name: "P.Gamma",
    value: |z| z.p.dot(&get3(z.gamma)),
    gradient: |z, g| {
        g.d_p = get3(z.gamma);
        g.d_gamma = Some(z.p);
    },
};
const THETA_SQUARED: Casimir = Casimir {
    name: "|Theta|^2",
    value: |z| get3(z.theta).norm_squared(),
    gradient: |z, g| g.d_theta = Some(2.0 * get3(z.theta)),
};
const P_DOT_THETA: Casimir = Casimir {
    name: "P.Theta",
    value: |z| z.p.dot(&get3(z.theta)),
    gradient: |z, g| {
        g.d_p = get3(z.theta);
        g.d_theta = Some(z.p);
    },
};
const GAMMA_DOT_THETA: Casimir = Casimir {
    name: "Gamma.Theta",
    value: |z| get3(z.gamma).dot(&get3(z.theta)),
    gradient: |z, g| {
        g.d_gamma = Some(get3(z.theta));
        g.d_theta = Some(get3(z.gamma));
    },
};

const DRIFT_CASIMIRS: [Casimir; 7] = [
    Casimir {
        name: "P.(Delta1xDelta2)",
        value: |z| z.p.dot(&d1s(z).cross(&d2s(z))),
        gradient: |z, g| {
            g.d_p = d1s(z).cross(&d2s(z));
            set_d1(g, d2s(z).cross(&z.p));
            set_d2(g, z.p.cross(&d1s(z)));
        },
    },
    GAMMA_SQUARED,
    Casimir {
        name: "|Delta1|^2",
        value: |z| d1s(z).norm_squared(),
        gradient: |z, g| set_d1(g, 2.0 * d1s(z)),
    },
    Casimir {
        name: "|Delta2|^2",
        value: |z| d2s(z).norm_squared(),
        gradient: |z, g| set_d2(g, 2.0 * d2s(z)),
    },
    Casimir {
        name: "Gamma.Delta1",
        value: |z| get3(z.gamma).dot(&d1s(z)),
        gradient: |z, g| {
            g.d_gamma = Some(d1s(z));
            set_d1(g, get3(z.gamma));
        },
    },
    Casimir {
        name: "Gamma.Delta2",
        value: |z| get3(z.gamma).dot(&d2s(z)),
        gradient: |z, g| {
            g.d_gamma = Some(d2s(z));
            set_d2(g, get3(z.gamma));
        },
    },
    Casimir {
        name: "Delta1.Delta2",
        value: |z| d1s(z).dot(&d2s(z)),
        gradient: |z, g| {
            set_d1(g, d2s(z));
            set_d2(g, d1s(z));
        },
    },
];

/// Casimirs shipped for each bracket. The drift list is the published one;
/// the others were found by hand and are certified only by the tests below.
pub fn casimirs(id: BracketId) -> &'static [Casimir] {
    const SE3: [Casimir; 2] = [P_SQUARED, PI_DOT_P];
    const SE3_R3: [Casimir; 3] = [P_SQUARED, P_DOT_GAMMA, GAMMA_SQUARED];
    const SE3_R4: [Casimir; 1] = [GAMMA_SQUARED];
    const STEADY: [Casimir; 6] = [
        P_SQUARED,
        P_DOT_GAMMA,
        GAMMA_SQUARED,
        THETA_SQUARED,
        P_DOT_THETA,
        GAMMA_DOT_THETA,
    ];
    match id {
        BracketId::Se3 => &SE3,
        BracketId::Se3R3 => &SE3_R3,
        BracketId::Se3R4 => &SE3_R4,
        BracketId::SteadyMotion => &STEADY,
        BracketId::Drift => &DRIFT_CASIMIRS,
    }
}

/// A quadratic test function ½ zᵀAz + bᵀz.
struct Quadratic {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
}

impl Quadratic {
    #[allow(clippy::needless_range_loop)] // symmetric fill
    fn random(rng: &mut ChaCha8Rng, n: usize, linear_only: bool) -> Self {
        let mut a = vec![vec![0.0; n]; n];
        if !linear_only {
            for i in 0..n {
                for j in i..n {
                    let v = rng.gen_range(-1.0..1.0);
                    a[i][j] = v;
                    a[j][i] = v;
                }
            }
        }
        let b = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Self { a, b }
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        self.a
            .iter()
            .zip(&self.b)
            .map(|(row, bi)| row.iter().zip(z).map(|(x, y)| x * y).sum::<f64>() + bi)
            .collect()
    }
}

const JACOBI_SEED: u64 = 0x6a61_636f_6269;
const JACOBI_FD_STEP: f64 = 1e-2;

/// Gradient by the five-point central stencil. The stencil is exact for
/// polynomials of degree ≤ 4, which covers brackets of quadratic functions.
fn fd_gradient(f: &dyn Fn(&[f64]) -> f64, z: &[f64]) -> Vec<f64> {
    let mut x = z.to_vec();
    (0..z.len())
        .map(|i| {
            let step = JACOBI_FD_STEP * (1.0 + z[i].abs());
            let mut eval = |k: f64| {
                x[i] = z[i] + k * step;
                let v = f(&x);
                x[i] = z[i];
                v
            };
            (-eval(2.0) + 8.0 * eval(1.0) - 8.0 * eval(-1.0) + eval(-2.0)) / (12.0 * step)
        })
        .collect()
}

/// A bracket {f, g}(z) given z, ∇f and ∇g in flat coordinates.
pub type FlatBracket<'a> = dyn Fn(&[f64], &[f64], &[f64]) -> f64 + 'a;

/// Jacobi-identity residual max|{f,{g,h}} + {g,{h,f}} + {h,{f,g}}| for an
/// arbitrary bracket on flat coordinates, over three fixed test functions.
/// Inner brackets are differentiated numerically.
pub fn jacobi_probe_fn(bracket: &FlatBracket<'_>, z: &[f64], linear_only: bool) -> f64 {
    let n = z.len();
    let mut rng = ChaCha8Rng::seed_from_u64(JACOBI_SEED);
    let fns: Vec<Quadratic> = (0..3)
        .map(|_| Quadratic::random(&mut rng, n, linear_only))
        .collect();
    let outer = |f: &Quadratic, g: &Quadratic, h: &Quadratic| {
        let inner = |x: &[f64]| bracket(x, &g.gradient(x), &h.gradient(x));
        let d_gh = fd_gradient(&inner, z);
        bracket(z, &f.gradient(z), &d_gh)
    };
    let (f, g, h) = (&fns[0], &fns[1], &fns[2]);
    (outer(f, g, h) + outer(g, h, f) + outer(h, f, g)).abs()
}

/// Jacobi residual of a shipped bracket at `z` using quadratic test functions.
pub fn jacobi_probe(id: BracketId, z: &PhasePoint) -> Result<f64> {
    let flat = z.to_flat(id)?;
    let b = |x: &[f64], df: &[f64], dh: &[f64]| bracket_flat(id, x, df, dh).unwrap_or(f64::NAN);
    Ok(jacobi_probe_fn(&b, &flat, false))
}

/// Same as [`jacobi_probe`] with linear test functions only.
pub fn jacobi_probe_linear(id: BracketId, z: &PhasePoint) -> Result<f64> {
    let flat = z.to_flat(id)?;
    let b = |x: &[f64], df: &[f64], dh: &[f64]| bracket_flat(id, x, df, dh).unwrap_or(f64::NAN);
    Ok(jacobi_probe_fn(&b, &flat, true))
}

/// Random phase point / gradient with the slots of `id`, entries in [−1, 1].
pub fn random_phase_point(id: BracketId, rng: &mut impl Rng) -> PhasePoint {
    let x: Vec<f64> = (0..id.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    PhasePoint::from_flat(id, &x).expect("layout matches dimension")
}

pub fn random_gradient(id: BracketId, rng: &mut impl Rng) -> GradientEval {
    let x: Vec<f64> = (0..id.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    GradientEval::from_flat(id, &x).expect("layout matches dimension")
}

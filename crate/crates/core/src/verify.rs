//! The property suite behind `epshape verify`: matching identities, bracket
//! and Casimir checks, equilibria, spectra, transport and integrator order,
//! each reduced to one measured number and a threshold.

use std::time::Instant;

use nalgebra::Matrix2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{exp_so3, AlgebraVector, SE3Element, Vec3, Vec4};
use crate::control::{
    matching_residual_subrep_with, matching_residual_extended, ClosedLoop, ControlTerm,
    Controller, ControllerId, DesiredMotion, Gains,
};
use crate::error::Result;
use crate::poisson::{
    bracket, casimirs, hamiltonian_rhs, jacobi_probe, random_gradient, random_phase_point,
    BracketId,
};
use crate::sim::{
    convergence_ratio, rate_point, simulate_loop, simulate_with_poses, stability,
    transport_residuals, Classification, IntegratorConfig, DEFAULT_FD_STEP,
};
use crate::systems::{InertiaParams, ReducedState, SystemId};

pub const DEFAULT_SEED: u64 = 42;
const RANDOM_STATES: usize = 200;
const CASIMIR_GRADIENTS: usize = 50;

/// How a measured value is compared against its threshold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bound {
    Below(f64),
    Above(f64),
    Within(f64, f64),
}

impl Bound {
    pub fn holds(&self, v: f64) -> bool {
        match *self {
            Bound::Below(t) => v < t,
            Bound::Above(t) => v > t,
            Bound::Within(lo, hi) => (lo..=hi).contains(&v),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Bound::Below(t) => format!("< {t:e}"),
            Bound::Above(t) => format!("> {t:e}"),
            Bound::Within(lo, hi) => format!("in [{lo}, {hi}]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropertyResult {
    pub name: &'static str,
    /// Acceptance criterion this property backs; 0 for structural extras.
    pub criterion: u8,
    pub measured: f64,
    pub bound: Bound,
    pub passed: bool,
    pub error: Option<String>,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub seed: u64,
    pub mutation: Option<ControlTerm>,
    pub results: Vec<PropertyResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.results
            .iter()
            .filter(|r| !r.passed)
            .map(|r| r.name)
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "seed": self.seed,
            "mutation": self.mutation.map(|m| m.name()),
            "passed": self.passed(),
            "properties": self.results.iter().map(|r| serde_json::json!({
                "name": r.name,
                "criterion": r.criterion,
                "passed": r.passed,
                "measured": finite_or_null(r.measured),
                "threshold": r.bound.describe(),
                "error": r.error,
                "seconds": r.seconds,
            })).collect::<Vec<_>>(),
        })
    }
}

fn finite_or_null(v: f64) -> serde_json::Value {
    if v.is_finite() {
        serde_json::json!(v)
    } else {
        serde_json::Value::Null
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Substring filter on property names.
    pub filter: Option<String>,
    /// Sign flip applied to every closed loop the suite builds.
    pub mutation: Option<ControlTerm>,
}

/// Shared reference configuration of the suite.
pub struct Context {
    pub seed: u64,
    pub mutation: Option<ControlTerm>,
    pub params: InertiaParams,
    pub desired: DesiredMotion,
    pub stable_gains: Gains,
    pub violating_gains: Gains,
}

impl Context {
    pub fn new(seed: u64, mutation: Option<ControlTerm>) -> Self {
        let desired = DesiredMotion::new(
            exp_so3(&Vec3::new(0.1, 0.2, 0.0)),
            Vec3::new(0.2, -0.1, 1.0),
        )
        .expect("reference desired motion is valid");
        let k = Matrix2::new(2.0, 0.5, 0.5, 1.0);
        Self {
            seed,
            mutation,
            params: InertiaParams::desk_scale(),
            desired,
            stable_gains: Gains::new(25.0, 1.0, k),
            violating_gains: Gains::new(25.0, -1.0, k),
        }
    }

    pub fn rng(&self, name: &str) -> ChaCha8Rng {
        // FNV-1a of the property name keeps per-property streams independent of order
        let h = name.bytes().fold(0xcbf2_9ce4_8422_2325_u64, |h, b| {
            (h ^ b as u64).wrapping_mul(0x1000_0000_01b3)
        });
        ChaCha8Rng::seed_from_u64(self.seed ^ h)
    }

    pub fn closed_loop(
        &self,
        system: SystemId,
        controller: ControllerId,
        gains: Gains,
    ) -> ClosedLoop {
        let c = match controller {
            ControllerId::None => Controller::None,
            ControllerId::HtmbShaping => Controller::HtmbShaping,
            ControllerId::UwvSteady => Controller::UwvSteady {
                gains,
                desired: self.desired,
            },
            ControllerId::UwvDrift => Controller::UwvDrift {
                gains,
                desired: self.desired,
            },
        };
        ClosedLoop::new(system, self.params, c)
            .expect("reference closed loop is valid")
            .with_mutation(self.mutation)
    }

    pub fn steady(&self) -> ClosedLoop {
        self.closed_loop(
            SystemId::UnderwaterVehicle,
            ControllerId::UwvSteady,
            self.stable_gains,
        )
    }

    pub fn drift(&self) -> ClosedLoop {
        self.closed_loop(
            SystemId::UnderwaterVehicle,
            ControllerId::UwvDrift,
            self.stable_gains,
        )
    }

    pub fn htmb_shaped(&self) -> ClosedLoop {
        self.closed_loop(
            SystemId::HeavyTopMovableBase,
            ControllerId::HtmbShaping,
            self.stable_gains,
        )
    }

    pub fn uwv(&self) -> ClosedLoop {
        self.closed_loop(
            SystemId::UnderwaterVehicle,
            ControllerId::None,
            self.stable_gains,
        )
    }

    pub fn htmb(&self) -> ClosedLoop {
        self.closed_loop(
            SystemId::HeavyTopMovableBase,
            ControllerId::None,
            self.stable_gains,
        )
    }

    /// ζ_e of `cl` rotated by a small tilt, with velocity and drift offsets.
    pub fn perturbed_equilibrium(&self, cl: &ClosedLoop) -> ReducedState {
        let eq = cl
            .equilibrium()
            .expect("controller defines ζ_e")
            .expect("valid desired motion");
        let qt = exp_so3(&Vec3::new(0.05, -0.03, 0.02)).transpose();
        ReducedState {
            xi: AlgebraVector::new(
                eq.xi.omega + Vec3::new(0.02, -0.01, 0.03),
                eq.xi.vel + Vec3::new(0.01, 0.02, -0.01),
            ),
            a_r3: eq.a_r3.map(|g| qt * g),
            a_r4: None,
            theta: eq.theta.map(|t| qt * t),
            deltas: eq.deltas.map(|(a, b)| {
                (
                    Vec4::new(qt * a.spatial, 0.03),
                    Vec4::new(qt * b.spatial, -0.02),
                )
            }),
        }
    }

    /// Generic uncontrolled vehicle state with |Γ| = 1.
    pub fn uwv_state(&self) -> ReducedState {
        ReducedState {
            xi: AlgebraVector::new(Vec3::new(0.3, -0.2, 0.4), Vec3::new(0.5, 0.1, -0.3)),
            a_r3: Some(Vec3::new(0.2, -0.3, -0.93).normalize()),
            ..Default::default()
        }
    }

    pub fn htmb_state(&self) -> ReducedState {
        ReducedState {
            xi: AlgebraVector::new(Vec3::new(0.3, -0.2, 0.4), Vec3::new(0.5, 0.1, -0.3)),
            a_r4: Some(Vec4::new(Vec3::new(0.2, -0.3, -0.93).normalize(), 0.5)),
            ..Default::default()
        }
    }
}

/// Max over random states of the extended-Lagrangian matching residual.
pub fn extended_matching_residual(ctx: &Context, cl: &ClosedLoop, name: &str) -> Result<f64> {
    let mut rng = ctx.rng(name);
    let mut worst = 0.0_f64;
    for _ in 0..RANDOM_STATES {
        worst = worst.max(matching_residual_extended(cl, &cl.random_state(&mut rng))?);
    }
    Ok(worst)
}

/// Max over random states of |hamiltonian_rhs − closed-loop rhs|.
pub fn bracket_ep_residual(ctx: &Context, cl: &ClosedLoop, name: &str) -> Result<f64> {
    let mut rng = ctx.rng(name);
    let mut worst = 0.0_f64;
    for _ in 0..RANDOM_STATES {
        let s = cl.random_state(&mut rng);
        let id = cl.bracket_id(&s);
        let lp = hamiltonian_rhs(id, &cl.phase_point(&s), &cl.hamiltonian_gradient(&s)?)?;
        worst = worst.max(lp.max_abs_diff(&rate_point(&cl.rhs(&s)?)));
    }
    Ok(worst)
}

/// Max |{C, h}| over the listed Casimirs of `id`, random points and gradients.
pub fn casimir_bracket_residual(ctx: &Context, id: BracketId, name: &str) -> Result<f64> {
    let mut rng = ctx.rng(name);
    let mut worst = 0.0_f64;
    for _ in 0..4 {
        let z = random_phase_point(id, &mut rng);
        for c in casimirs(id) {
            let dc = c.gradient(id, &z);
            for _ in 0..CASIMIR_GRADIENTS {
                worst = worst.max(bracket(id, &z, &dc, &random_gradient(id, &mut rng))?.abs());
            }
        }
    }
    Ok(worst)
}

fn long_run() -> IntegratorConfig {
    IntegratorConfig::new(1e-3, 10.0).expect("valid integrator")
}

/// Max drift of every listed Casimir (or energy) along a T = 10 run.
pub fn trajectory_drift(cl: &ClosedLoop, initial: &ReducedState, energy: bool) -> Result<f64> {
    let traj = simulate_loop(cl, initial, &long_run())?;
    Ok(traj
        .conservation()
        .into_iter()
        .filter(|r| (r.name == "energy") == energy)
        .map(|r| r.max_drift)
        .fold(0.0, f64::max))
}

/// Max transport deviation along a T = 10 run reconstructed from s0.
pub fn transport_residual(cl: &ClosedLoop, initial: &ReducedState, s0: &SE3Element) -> Result<f64> {
    let traj = simulate_with_poses(cl, initial, &long_run(), s0)?;
    let rep = transport_residuals(&traj)?;
    Ok(rep.max().max(rep.rotation_residual))
}

type Check = fn(&Context) -> Result<f64>;

pub struct Property {
    pub name: &'static str,
    pub criterion: u8,
    pub bound: Bound,
    pub check: Check,
}

fn stability_max_real(ctx: &Context, drift: bool, gains: Gains) -> Result<(f64, Classification)> {
    let c = if drift {
        ControllerId::UwvDrift
    } else {
        ControllerId::UwvSteady
    };
    let cl = ctx.closed_loop(SystemId::UnderwaterVehicle, c, gains);
    let eq = cl.equilibrium().expect("controller defines ζ_e")?;
    let r = stability(&cl, &eq, DEFAULT_FD_STEP)?;
    Ok((r.max_real_part, r.classification))
}

/// Measured value is 1 when the violated-gain spectrum is classified non-stable.
fn violated_flag(ctx: &Context, drift: bool) -> Result<f64> {
    let (_, class) = stability_max_real(ctx, drift, ctx.violating_gains)?;
    Ok(if class == Classification::SpectrallyStable {
        0.0
    } else {
        1.0
    })
}

pub fn properties() -> Vec<Property> {
    use Bound::*;
    let p = |name, criterion, bound, check: Check| Property {
        name,
        criterion,
        bound,
        check,
    };
    vec![
        p("matching_extended_steady", 1, Below(1e-12), |c| {
            extended_matching_residual(c, &c.steady(), "matching_extended_steady")
        }),
        p("matching_extended_drift", 1, Below(1e-12), |c| {
            extended_matching_residual(c, &c.drift(), "matching_extended_drift")
        }),
        p("matching_subrep_htmb", 2, Below(1e-12), |c| {
            let cl = c.htmb_shaped();
            let mut rng = c.rng("matching_subrep_htmb");
            let mut worst = 0.0_f64;
            for _ in 0..RANDOM_STATES {
                worst = worst.max(matching_residual_subrep_with(
                    &cl.random_state(&mut rng),
                    &c.params,
                    c.mutation,
                )?);
            }
            Ok(worst)
        }),
        p("bracket_ep_uwv", 3, Below(1e-10), |c| {
            bracket_ep_residual(c, &c.uwv(), "bracket_ep_uwv")
        }),
        p("bracket_ep_htmb", 3, Below(1e-10), |c| {
            bracket_ep_residual(c, &c.htmb(), "bracket_ep_htmb")
        }),
        p("bracket_ep_htmb_shaped", 3, Below(1e-10), |c| {
            bracket_ep_residual(c, &c.htmb_shaped(), "bracket_ep_htmb_shaped")
        }),
        p("bracket_ep_steady", 3, Below(1e-10), |c| {
            bracket_ep_residual(c, &c.steady(), "bracket_ep_steady")
        }),
        p("bracket_ep_drift", 3, Below(1e-10), |c| {
            bracket_ep_residual(c, &c.drift(), "bracket_ep_drift")
        }),
        p("casimir_bracket_drift", 4, Below(1e-12), |c| {
            casimir_bracket_residual(c, BracketId::Drift, "casimir_bracket_drift")
        }),
        p("casimir_bracket_se3_r3", 4, Below(1e-12), |c| {
            casimir_bracket_residual(c, BracketId::Se3R3, "casimir_bracket_se3_r3")
        }),
        p("casimir_bracket_steady", 4, Below(1e-12), |c| {
            casimir_bracket_residual(c, BracketId::SteadyMotion, "casimir_bracket_steady")
        }),
        p("casimir_trajectory_drift", 4, Below(1e-8), |c| {
            let cl = c.drift();
            trajectory_drift(&cl, &c.perturbed_equilibrium(&cl), false)
        }),
        p("energy_trajectory_drift", 4, Below(1e-8), |c| {
            let cl = c.drift();
            trajectory_drift(&cl, &c.perturbed_equilibrium(&cl), true)
        }),
        p("equilibrium_steady", 5, Below(1e-12), |c| {
            let cl = c.steady();
            Ok(cl.rhs(&cl.equilibrium().expect("ζ_e")?)?.sup_norm())
        }),
        p("equilibrium_drift", 5, Below(1e-12), |c| {
            let cl = c.drift();
            Ok(cl.rhs(&cl.equilibrium().expect("ζ_e")?)?.sup_norm())
        }),
        p("stability_stable_steady", 6, Below(1e-6), |c| {
            Ok(stability_max_real(c, false, c.stable_gains)?.0)
        }),
        p("stability_stable_drift", 6, Below(1e-6), |c| {
            Ok(stability_max_real(c, true, c.stable_gains)?.0)
        }),
        p("stability_violated_steady", 6, Above(0.5), |c| {
            violated_flag(c, false)
        }),
        p("stability_violated_drift", 6, Above(0.5), |c| {
            violated_flag(c, true)
        }),
        p("transport_uwv", 7, Below(1e-6), |c| {
            transport_residual(&c.uwv(), &c.uwv_state(), &SE3Element::identity())
        }),
        p("transport_htmb", 7, Below(1e-6), |c| {
            transport_residual(&c.htmb(), &c.htmb_state(), &SE3Element::identity())
        }),
        p("transport_steady", 7, Below(1e-6), |c| {
            let cl = c.steady();
            transport_residual(&cl, &c.perturbed_equilibrium(&cl), &SE3Element::identity())
        }),
        p("transport_drift", 7, Below(1e-6), |c| {
            let cl = c.drift();
            transport_residual(&cl, &c.perturbed_equilibrium(&cl), &SE3Element::identity())
        }),
        p("integrator_order", 8, Within(12.0, 20.0), |c| {
            convergence_ratio(&c.uwv(), &c.uwv_state(), 2.0, 0.05)
        }),
        p("conservation_uwv", 8, Below(1e-8), |c| {
            let traj = simulate_loop(&c.uwv(), &c.uwv_state(), &long_run())?;
            Ok(traj
                .conservation()
                .iter()
                .map(|r| r.max_drift)
                .fold(0.0, f64::max))
        }),
        p("mutation_sensitivity", 9, Above(1e-3), |c| {
            // smallest matching residual over all single sign flips
            let mut worst = f64::INFINITY;
            for term in ControlTerm::ALL {
                let mutated = Context::new(c.seed, Some(term));
                let r = match term.controller() {
                    ControllerId::UwvSteady => {
                        extended_matching_residual(&mutated, &mutated.steady(), "mutation")?
                    }
                    ControllerId::UwvDrift => {
                        extended_matching_residual(&mutated, &mutated.drift(), "mutation")?
                    }
                    _ => {
                        let cl = mutated.htmb_shaped();
                        let mut rng = mutated.rng("mutation");
                        matching_residual_subrep_with(
                            &cl.random_state(&mut rng),
                            &c.params,
                            Some(term),
                        )?
                    }
                };
                worst = worst.min(r);
            }
            Ok(worst)
        }),
        p("jacobi_brackets", 0, Below(1e-6), |c| {
            let mut rng = c.rng("jacobi_brackets");
            let mut worst = 0.0_f64;
            for id in BracketId::ALL {
                for _ in 0..20 {
                    worst = worst.max(jacobi_probe(id, &random_phase_point(id, &mut rng))?);
                }
            }
            Ok(worst)
        }),
    ]
}

/// Evaluates one property, timing it and folding errors into a failed result.
pub fn run_property(ctx: &Context, p: &Property) -> PropertyResult {
    let start = Instant::now();
    let outcome = (p.check)(ctx);
    let seconds = start.elapsed().as_secs_f64();
    let (measured, error) = match outcome {
        Ok(v) => (v, None),
        Err(e) => (f64::NAN, Some(e.to_string())),
    };
    PropertyResult {
        name: p.name,
        criterion: p.criterion,
        measured,
        bound: p.bound,
        passed: error.is_none() && p.bound.holds(measured),
        error,
        seconds,
    }
}

pub fn run(opts: &VerifyOptions) -> VerifyReport {
    let ctx = Context::new(opts.seed, opts.mutation);
    let results = properties()
        .iter()
        .filter(|p| opts.filter.as_deref().is_none_or(|f| p.name.contains(f)))
        .map(|p| run_property(&ctx, p))
        .collect();
    VerifyReport {
        seed: opts.seed,
        mutation: opts.mutation,
        results,
    }
}

//! Acceptance run: one PASS/FAIL line per criterion, with wall time and budget.

use std::process::{Command, ExitCode};
use std::time::Instant;

use epshape::algebra::{exp_so3, SE3Element, Vec3};
use epshape::control::{frame_from_desired, ControlTerm};
use epshape::sim::{simulate_with_poses, IntegratorConfig};
use epshape::verify::{properties, run_property, Context, PropertyResult, DEFAULT_SEED};

struct Line {
    criterion: u8,
    title: &'static str,
    budget: Option<f64>,
    checks: Vec<(String, bool, String)>,
    seconds: f64,
}

fn from_property(r: &PropertyResult) -> (String, bool, String) {
    let detail = match &r.error {
        Some(e) => format!("error: {e}"),
        None => format!("{:.3e} {}", r.measured, r.bound.describe()),
    };
    (r.name.to_string(), r.passed, detail)
}

/// Transport against the geometric definitions: starting from
/// s0 = (R_d Q_tilt, x0), Γ = −Rᵀe₃, Θ = Rᵀw₃, Δᵢ = Rᵀwᵢ, δᵢ = x·wᵢ and
/// Δ₁×Δ₂ = Rᵀw₃ must hold along the closed-loop trajectory.
fn geometric_transport(ctx: &Context, drift: bool) -> Result<f64, String> {
    let cl = if drift { ctx.drift() } else { ctx.steady() };
    let initial = ctx.perturbed_equilibrium(&cl);
    let f = frame_from_desired(&ctx.desired).map_err(|e| e.to_string())?;
    let r0 = ctx.desired.r_d() * exp_so3(&Vec3::new(0.05, -0.03, 0.02));
    // the perturbed state starts with δ = (0.03, −0.02)
    let x0 = if drift {
        f.w1 * 0.03 - f.w2 * 0.02
    } else {
        Vec3::zeros()
    };
    let s0 = SE3Element::new(r0, x0).map_err(|e| e.to_string())?;
    let cfg = IntegratorConfig::new(1e-3, 10.0).map_err(|e| e.to_string())?;
    let traj = simulate_with_poses(&cl, &initial, &cfg, &s0).map_err(|e| e.to_string())?;
    let poses = traj.poses.as_ref().ok_or("no poses")?;
    let mut worst = 0.0_f64;
    for (s, pose) in traj.states.iter().zip(poses) {
        let rt = pose.rotation().transpose();
        let x = pose.translation();
        let gamma = s.gamma().ok_or("no gamma")?;
        worst = worst.max((gamma + rt * Vec3::z()).amax());
        if let Some(theta) = s.theta {
            worst = worst.max((theta - rt * f.w3).amax());
        }
        if let Some((d1, d2)) = s.deltas {
            worst = worst.max((d1.spatial - rt * f.w1).amax());
            worst = worst.max((d2.spatial - rt * f.w2).amax());
            worst = worst.max((d1.scalar - x.dot(&f.w1)).abs());
            worst = worst.max((d2.scalar - x.dot(&f.w2)).abs());
            worst = worst.max((d1.spatial.cross(&d2.spatial) - rt * f.w3).amax());
        }
    }
    Ok(worst)
}

fn geometric_check(ctx: &Context, drift: bool) -> (String, bool, String) {
    let name = if drift {
        "geometric_transport_drift"
    } else {
        "geometric_transport_steady"
    };
    match geometric_transport(ctx, drift) {
        Ok(v) => (name.into(), v < 1e-6, format!("{v:.3e} < 1e-6")),
        Err(e) => (name.into(), false, format!("error: {e}")),
    }
}

/// `epshape verify` under each single sign flip exits nonzero and names a property.
fn cli_mutation_check() -> (String, bool, String) {
    let exe = env!("CARGO_BIN_EXE_epshape");
    let mut named = Vec::new();
    for term in ControlTerm::ALL {
        let out = Command::new(exe)
            .args(["verify", "--filter", "matching", "--mutate", term.name()])
            .env("EPSHAPE_SEED", DEFAULT_SEED.to_string())
            .output();
        let Ok(out) = out else {
            return (
                "cli_mutation_exit".into(),
                false,
                "could not start epshape".into(),
            );
        };
        let stderr = String::from_utf8_lossy(&out.stderr);
        if out.status.code() != Some(1) || !stderr.contains("FAILED: matching_") {
            return (
                "cli_mutation_exit".into(),
                false,
                format!(
                    "{}: exit {:?}, stderr {stderr:?}",
                    term.name(),
                    out.status.code()
                ),
            );
        }
        named.push(term.name());
    }
    (
        "cli_mutation_exit".into(),
        true,
        format!("exit 1 for {}", named.join(", ")),
    )
}

fn main() -> ExitCode {
    let ctx = Context::new(DEFAULT_SEED, None);
    let props = properties();
    let titles: [(u8, &str, Option<f64>); 9] = [
        (1, "matching with additional variables (steady, drift)", Some(1.0)),
        (2, "matching via subrepresentation (htmb shaping)", Some(1.0)),
        (3, "bracket / EP equivalence", Some(2.0)),
        (4, "Casimirs and energy", Some(10.0)),
        (5, "equilibria are fixed points", None),
        (6, "spectral stability surrogate", Some(5.0)),
        (7, "transport consistency", Some(10.0)),
        (8, "integrator order and conservation", None),
        (9, "mutation sensitivity", None),
    ];
    let mut lines = Vec::new();
    for (criterion, title, budget) in titles {
        let start = Instant::now();
        let mut checks: Vec<_> = props
            .iter()
            .filter(|p| p.criterion == criterion)
            .map(|p| from_property(&run_property(&ctx, p)))
            .collect();
        if criterion == 7 {
            checks.push(geometric_check(&ctx, false));
            checks.push(geometric_check(&ctx, true));
        }
        if criterion == 9 {
            checks.push(cli_mutation_check());
        }
        lines.push(Line {
            criterion,
            title,
            budget,
            checks,
            seconds: start.elapsed().as_secs_f64(),
        });
    }

    let mut all = true;
    for l in &lines {
        let in_budget = l.budget.is_none_or(|b| l.seconds < b);
        let ok = !l.checks.is_empty() && l.checks.iter().all(|c| c.1) && in_budget;
        all &= ok;
        let budget = l
            .budget
            .map(|b| format!(" (budget {b} s)"))
            .unwrap_or_default();
        println!(
            "criterion {}: {} {} [{:.3} s{}]",
            l.criterion,
            if ok { "PASS" } else { "FAIL" },
            l.title,
            l.seconds,
            budget
        );
        for (name, passed, detail) in &l.checks {
            println!(
                "    {} {name}: {detail}",
                if *passed { "ok  " } else { "FAIL" }
            );
        }
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

//! `epshape` command line: `run`, `verify` and `stability`.
//!
//! Exit codes: 0 success, 1 verify failure, 2 invalid input, 3 numerical
//! failure, 4 the scenario's ζ_e is not an equilibrium.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::algebra::{SE3Element, Vec3, Vec4};
use crate::control::ControlTerm;
use crate::error::Error;
use crate::scenario::{load_scenario, write_atomic, OutputFormat, Scenario};
use crate::sim::{
    simulate_loop, simulate_with_poses, stability, transport_residuals, StabilityReport,
    Trajectory, DEFAULT_FD_STEP,
};
use crate::systems::{legendre, InertiaParams, ReducedState};
use crate::verify::{self, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_NOT_EQUILIBRIUM: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "epshape",
    version,
    about = "Simulate and verify potential-shaping controllers on SE(3)"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a scenario and write its trajectory and run report.
    Run {
        scenario: PathBuf,
        /// Directory that relative output paths are resolved against.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also reconstruct the group trajectory and check transport.
        #[arg(long)]
        reconstruct: bool,
    },
    /// Run the property suite and print a JSON report.
    Verify {
        /// Only run properties whose name contains this string.
        #[arg(long)]
        filter: Option<String>,
        #[arg(long, env = "EPSHAPE_SEED", default_value_t = verify::DEFAULT_SEED)]
        seed: u64,
        /// Flip the sign of one control-law term (test hook).
        #[arg(long, hide = true)]
        mutate: Option<String>,
    },
    /// Linearize the closed loop at the scenario's ζ_e and report the spectrum.
    Stability { scenario: PathBuf },
}

/// Parses `args` (including the program name) and executes the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
        }
    };
    match cli.command {
        Command::Run {
            scenario,
            out,
            reconstruct,
        } => cmd_run(&scenario, out.as_deref(), reconstruct),
        Command::Verify {
            filter,
            seed,
            mutate,
        } => {
            let mutation = match mutate
                .as_deref()
                .map(|m| ControlTerm::from_name(m).ok_or(m))
            {
                None => None,
                Some(Ok(t)) => Some(t),
                Some(Err(m)) => {
                    eprintln!("error: unknown control term `{m}`");
                    return EXIT_INVALID;
                }
            };
            cmd_verify(&VerifyOptions {
                seed,
                filter,
                mutation,
            })
        }
        Command::Stability { scenario } => cmd_stability(&scenario),
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotAnEquilibrium { .. } => EXIT_NOT_EQUILIBRIUM,
        Error::NonFiniteState { .. }
        | Error::NoConvergence
        | Error::SingularInertia
        | Error::NonFinite(_) => EXIT_NUMERICAL,
        _ => EXIT_INVALID,
    }
}

/// Pretty JSON to stdout; a closed pipe is not an error worth panicking over.
fn emit(v: &Value) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{v:#}").and_then(|_| out.flush());
}

fn load(path: &Path) -> Result<Scenario, i32> {
    match load_scenario(path) {
        Ok(s) => {
            for w in &s.warnings {
                eprintln!("warning: {w}");
            }
            Ok(s)
        }
        Err(e) => {
            eprintln!("error: {e}");
            Err(EXIT_INVALID)
        }
    }
}

const CSV_HEADER: &str = "t,Pi_x,Pi_y,Pi_z,P_x,P_y,P_z,Omega_x,Omega_y,Omega_z,v_x,v_y,v_z,\
Gamma_x,Gamma_y,Gamma_z,h,Theta_x,Theta_y,Theta_z,Delta1_x,Delta1_y,Delta1_z,delta_1,\
Delta2_x,Delta2_y,Delta2_z,delta_2";

/// Shortest representation that parses back to the same double.
fn num(v: f64) -> String {
    format!("{v:?}")
}

fn push3(row: &mut Vec<String>, v: Option<Vec3>) {
    match v {
        Some(v) => row.extend(v.iter().map(|c| num(*c))),
        None => row.extend(std::iter::repeat_n(String::new(), 3)),
    }
}

fn push4(row: &mut Vec<String>, v: Option<Vec4>) {
    push3(row, v.map(|v| v.spatial));
    row.push(v.map(|v| num(v.scalar)).unwrap_or_default());
}

/// Trajectory CSV with a fixed column set; fields a system does not carry are empty.
pub fn trajectory_csv(traj: &Trajectory, p: &InertiaParams) -> String {
    let mut out = String::with_capacity(traj.len() * 400);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let m = legendre(p, &s.xi);
        let mut row = vec![num(*t)];
        push3(&mut row, Some(m.pi));
        push3(&mut row, Some(m.p));
        push3(&mut row, Some(s.xi.omega));
        push3(&mut row, Some(s.xi.vel));
        push3(&mut row, s.gamma());
        row.push(s.a_r4.map(|a| num(a.scalar)).unwrap_or_default());
        push3(&mut row, s.theta);
        push4(&mut row, s.deltas.map(|d| d.0));
        push4(&mut row, s.deltas.map(|d| d.1));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Group samples as t, R (row-major), x.
pub fn pose_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,R11,R12,R13,R21,R22,R23,R31,R32,R33,x,y,z\n");
    for (t, pose) in traj.times.iter().zip(traj.poses.iter().flatten()) {
        let r = pose.rotation();
        let mut row = vec![num(*t)];
        for i in 0..3 {
            for j in 0..3 {
                row.push(num(r[(i, j)]));
            }
        }
        row.extend(pose.translation().iter().map(|c| num(*c)));
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

fn v3json(v: &Vec3) -> Value {
    json!([v.x, v.y, v.z])
}

pub fn state_json(s: &ReducedState) -> Value {
    let mut m = serde_json::Map::new();
    m.insert("omega".into(), v3json(&s.xi.omega));
    m.insert("vel".into(), v3json(&s.xi.vel));
    if let Some(g) = s.gamma() {
        m.insert("gamma".into(), v3json(&g));
    }
    if let Some(a) = s.a_r4 {
        m.insert("h".into(), json!(a.scalar));
    }
    if let Some(t) = s.theta {
        m.insert("theta".into(), v3json(&t));
    }
    if let Some((a, b)) = s.deltas {
        let v4 = |v: Vec4| json!([v.spatial.x, v.spatial.y, v.spatial.z, v.scalar]);
        m.insert("deltas".into(), json!([v4(a), v4(b)]));
    }
    Value::Object(m)
}

pub fn stability_json(r: &StabilityReport) -> Value {
    let n = r.jacobian.nrows();
    json!({
        "equilibrium": state_json(&r.equilibrium),
        "equilibrium_residual": r.residual,
        "jacobian": (0..n).map(|i| r.jacobian.row(i).iter().copied().collect::<Vec<f64>>()).collect::<Vec<_>>(),
        "eigenvalues": r.eigenvalues.iter().map(|c| json!({"re": c.re, "im": c.im})).collect::<Vec<_>>(),
        "max_real_part": r.max_real_part,
        "classification": r.classification.name(),
        "caveat": r.caveat,
    })
}

fn resolve(out: Option<&Path>, p: &Path) -> PathBuf {
    match out {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p.to_path_buf(),
    }
}

fn poses_path(csv: &Path) -> PathBuf {
    let stem = csv
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "trajectory".into());
    csv.with_file_name(format!("{stem}_poses.csv"))
}

fn write_or_report(path: &Path, bytes: &[u8]) -> Result<(), i32> {
    write_atomic(path, bytes).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_INVALID
    })
}

fn run_report(
    s: &Scenario,
    traj: Result<&Trajectory, &Error>,
    transport: Option<Value>,
    stab: Option<Value>,
) -> Value {
    let (status, error, conservation, samples) = match traj {
        Ok(t) => {
            let rows: Vec<Value> = t
                .conservation()
                .iter()
                .map(|r| json!({"name": r.name, "initial": r.initial, "final": r.final_value, "max_drift": r.max_drift}))
                .collect();
            (EXIT_OK, None, rows, t.len())
        }
        Err(e) => (exit_code(e), Some(e.to_string()), Vec::new(), 0),
    };
    json!({
        "scenario_digest": s.digest(),
        "system": s.system,
        "controller": s.controller,
        "samples": samples,
        "t_final": s.integrator.t_final,
        "step": s.integrator.step,
        "warnings": s.warnings,
        "conservation": conservation,
        "transport": transport,
        "stability": stab,
        "exit_status": status,
        "error": error,
    })
}

pub fn cmd_run(path: &Path, out: Option<&Path>, with_poses: bool) -> i32 {
    let s = match load(path) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let mut outputs = s.outputs.clone();
    if !outputs.iter().any(|o| o.format == OutputFormat::Csv) {
        outputs.push(crate::scenario::OutputSpec {
            format: OutputFormat::Csv,
            path: "trajectory.csv".into(),
        });
    }
    if !outputs.iter().any(|o| o.format == OutputFormat::Json) {
        outputs.push(crate::scenario::OutputSpec {
            format: OutputFormat::Json,
            path: "report.json".into(),
        });
    }
    let report_paths: Vec<PathBuf> = outputs
        .iter()
        .filter(|o| o.format == OutputFormat::Json)
        .map(|o| resolve(out, &o.path))
        .collect();

    let traj = s.closed_loop().and_then(|cl| {
        if with_poses {
            simulate_with_poses(&cl, &s.initial, &s.integrator, &SE3Element::identity())
        } else {
            simulate_loop(&cl, &s.initial, &s.integrator)
        }
    });
    let traj = match traj {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            let report = run_report(&s, Err(&e), None, None);
            for p in &report_paths {
                let _ = write_atomic(p, format!("{report:#}\n").as_bytes());
            }
            return exit_code(&e);
        }
    };
    let transport = if with_poses {
        transport_residuals(&traj).ok().map(|r| {
            json!({
                "gamma": r.gamma, "h": r.h, "theta": r.theta, "deltas": r.deltas,
                "theta_vs_delta_cross": r.theta_vs_cross, "rotation_residual": r.rotation_residual,
            })
        })
    } else {
        None
    };
    let stab = s.closed_loop().ok().and_then(|cl| {
        let eq = cl.equilibrium()?.ok()?;
        stability(&cl, &eq, DEFAULT_FD_STEP).ok().map(|r| {
            json!({"max_real_part": r.max_real_part, "classification": r.classification.name(), "caveat": r.caveat})
        })
    });

    let csv = trajectory_csv(&traj, &s.inertia);
    for o in &outputs {
        let p = resolve(out, &o.path);
        let written = match o.format {
            OutputFormat::Csv => write_or_report(&p, csv.as_bytes()).and_then(|_| {
                if with_poses {
                    write_or_report(&poses_path(&p), pose_csv(&traj).as_bytes())
                } else {
                    Ok(())
                }
            }),
            OutputFormat::Json => {
                let report = run_report(&s, Ok(&traj), transport.clone(), stab.clone());
                write_or_report(&p, format!("{report:#}\n").as_bytes())
            }
        };
        if let Err(code) = written {
            return code;
        }
    }
    EXIT_OK
}

pub fn cmd_verify(opts: &VerifyOptions) -> i32 {
    let report = verify::run(opts);
    emit(&report.to_json());
    if report.results.is_empty() {
        eprintln!("error: no property matches the filter");
        return EXIT_INVALID;
    }
    if report.passed() {
        EXIT_OK
    } else {
        for name in report.failures() {
            eprintln!("FAILED: {name}");
        }
        EXIT_VERIFY_FAILED
    }
}

pub fn cmd_stability(path: &Path) -> i32 {
    let s = match load(path) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let eq = match s.equilibrium_for_initial() {
        Some(Ok(eq)) => eq,
        Some(Err(e)) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
        None => {
            eprintln!("error: the scenario defines no equilibrium (needs a desired motion on the underwater vehicle)");
            return EXIT_INVALID;
        }
    };
    let result = s
        .closed_loop()
        .and_then(|cl| stability(&cl, &eq, DEFAULT_FD_STEP));
    match result {
        Ok(r) => {
            let mut v = stability_json(&r);
            v["warnings"] = json!(s.warnings);
            emit(&v);
            EXIT_OK
        }
        Err(e) => {
            let mut v = json!({"error": e.to_string(), "equilibrium": state_json(&eq)});
            if let Error::NotAnEquilibrium { residual } = e {
                v["equilibrium_residual"] = json!(residual);
            }
            emit(&v);
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

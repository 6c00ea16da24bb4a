//! Scenario files: a JSON description of plant, controller, initial state and
//! integrator, validated into domain types before anything runs.

use std::path::{Path, PathBuf};

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algebra::{exp_so3, AlgebraVector, Mat3, Vec3, Vec4};
use crate::control::{
    drift_equilibrium, stability_condition, steady_equilibrium, ClosedLoop, Controller,
    ControllerId, DesiredMotion, Gains,
};
use crate::error::{Error, Result};
use crate::sim::IntegratorConfig;
use crate::systems::{InertiaParams, ReducedState, SystemId};

type Rows3 = [[f64; 3]; 3];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDto {
    system: SystemId,
    controller: ControllerId,
    inertia: InertiaDto,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gains: Option<GainsDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    desired: Option<DesiredDto>,
    initial: InitialDto,
    integrator: IntegratorDto,
    #[serde(default)]
    outputs: Vec<OutputSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InertiaDto {
    j: Rows3,
    d: Rows3,
    m: Rows3,
    m_body: f64,
    m_total: f64,
    g: f64,
    l: f64,
    chi: [f64; 3],
}

fn identity2() -> [[f64; 2]; 2] {
    [[1.0, 0.0], [0.0, 1.0]]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GainsDto {
    alpha: f64,
    beta: f64,
    #[serde(default = "identity2")]
    k: [[f64; 2]; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DesiredDto {
    r_d: Rows3,
    v_d: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum InitialDto {
    Explicit {
        omega: [f64; 3],
        vel: [f64; 3],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma: Option<[f64; 3]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        h: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta: Option<[f64; 3]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        deltas: Option<[[f64; 4]; 2]>,
    },
    /// The controller's equilibrium, body-rotated by exp(tilt), with velocity
    /// offsets and drift offsets δ added.
    PerturbedEquilibrium {
        #[serde(default)]
        tilt: [f64; 3],
        #[serde(default)]
        omega: [f64; 3],
        #[serde(default)]
        vel: [f64; 3],
        #[serde(default)]
        drift: [f64; 2],
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum MethodDto {
    #[default]
    Rk4,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntegratorDto {
    step: f64,
    t_final: f64,
    #[serde(default)]
    method: MethodDto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    /// Trajectory samples.
    Csv,
    /// Run report.
    Json,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub format: OutputFormat,
    pub path: PathBuf,
}

/// A validated scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub system: SystemId,
    pub controller: ControllerId,
    pub inertia: InertiaParams,
    pub gains: Option<Gains>,
    pub desired: Option<DesiredMotion>,
    pub initial: ReducedState,
    pub integrator: IntegratorConfig,
    pub outputs: Vec<OutputSpec>,
    /// Non-fatal findings, e.g. gains outside the stability region.
    pub warnings: Vec<String>,
}

fn mat3(rows: &Rows3) -> Mat3 {
    Mat3::from_row_slice(&rows.concat())
}

fn rows3(m: &Mat3) -> Rows3 {
    [0, 1, 2].map(|i| [0, 1, 2].map(|j| m[(i, j)]))
}

fn v3(a: &[f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

fn arr3(v: &Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

fn v4(a: &[f64; 4]) -> Vec4 {
    Vec4::new(Vec3::new(a[0], a[1], a[2]), a[3])
}

fn arr4(v: &Vec4) -> [f64; 4] {
    [v.spatial.x, v.spatial.y, v.spatial.z, v.scalar]
}

fn serde_error(e: serde_path_to_error::Error<serde_json::Error>) -> Error {
    let path = e.path().to_string();
    let inner = e.into_inner();
    match inner.classify() {
        serde_json::error::Category::Data => Error::validation(path, inner.to_string()),
        _ => Error::Parse {
            path,
            message: inner.to_string(),
        },
    }
}

/// Parses and validates scenario JSON.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let dto: ScenarioDto = serde_path_to_error::deserialize(de).map_err(serde_error)?;
    Scenario::from_dto(dto)
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_scenario(&text)
}

fn path_err(path: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::Validation { .. } | Error::Parse { .. } => e,
        other => Error::validation(path, other.to_string()),
    }
}

impl Scenario {
    fn from_dto(dto: ScenarioDto) -> Result<Self> {
        let i = &dto.inertia;
        let inertia = InertiaParams::new(
            mat3(&i.j),
            mat3(&i.d),
            mat3(&i.m),
            i.m_body,
            i.m_total,
            i.g,
            i.l,
            v3(&i.chi),
        )?;

        let needs_shaping = matches!(
            dto.controller,
            ControllerId::UwvSteady | ControllerId::UwvDrift
        );
        let gains = dto.gains.as_ref().map(|g| {
            let k = Matrix2::new(g.k[0][0], g.k[0][1], g.k[1][0], g.k[1][1]);
            Gains::new(g.alpha, g.beta, k)
        });
        if let Some(g) = &gains {
            g.validate(dto.controller == ControllerId::UwvDrift)?;
        }
        let desired = match &dto.desired {
            Some(d) => {
                let v = v3(&d.v_d);
                let r = mat3(&d.r_d);
                Some(DesiredMotion::new(r, v).map_err(|e| match e {
                    Error::ZeroDesiredVelocity => Error::validation("desired.v_d", e.to_string()),
                    Error::NonFinite(_) => Error::validation("desired.v_d", e.to_string()),
                    _ => Error::validation("desired.r_d", e.to_string()),
                })?)
            }
            None => None,
        };
        if needs_shaping {
            if gains.is_none() {
                return Err(Error::validation(
                    "gains",
                    "required by the selected controller",
                ));
            }
            if desired.is_none() {
                return Err(Error::validation(
                    "desired",
                    "required by the selected controller",
                ));
            }
        }
        let integrator = IntegratorConfig::new(dto.integrator.step, dto.integrator.t_final)?;

        let mut s = Scenario {
            system: dto.system,
            controller: dto.controller,
            inertia,
            gains,
            desired,
            initial: ReducedState::default(),
            integrator,
            outputs: dto.outputs.clone(),
            warnings: Vec::new(),
        };
        let cl = s.closed_loop()?;
        s.initial = s.build_initial(&dto.initial)?;
        cl.check_state(&s.initial).map_err(|e| match e {
            Error::MissingField(f) => Error::validation(
                format!("initial.{f}"),
                "required by the selected controller",
            ),
            other => other,
        })?;
        if !s.initial.is_finite() {
            return Err(Error::validation("initial", "non-finite value"));
        }
        for (k, o) in s.outputs.iter().enumerate() {
            if o.path.as_os_str().is_empty() {
                return Err(Error::validation(
                    format!("outputs[{k}].path"),
                    "empty path",
                ));
            }
        }
        if let (true, Some(g)) = (needs_shaping, &s.gains) {
            s.warnings = stability_condition(&s.inertia, g);
        }
        Ok(s)
    }

    fn build_initial(&self, dto: &InitialDto) -> Result<ReducedState> {
        match dto {
            InitialDto::Explicit {
                omega,
                vel,
                gamma,
                h,
                theta,
                deltas,
            } => {
                let gamma = v3(gamma
                    .as_ref()
                    .ok_or_else(|| Error::validation("initial.gamma", "missing field"))?);
                if gamma.norm() == 0.0 {
                    return Err(Error::validation(
                        "initial.gamma",
                        "gravity direction must be nonzero",
                    ));
                }
                let mut s = ReducedState {
                    xi: AlgebraVector::new(v3(omega), v3(vel)),
                    ..Default::default()
                };
                match self.system {
                    SystemId::UnderwaterVehicle => {
                        if h.is_some() {
                            return Err(Error::validation(
                                "initial.h",
                                "only the heavy top carries a height",
                            ));
                        }
                        s.a_r3 = Some(gamma);
                    }
                    SystemId::HeavyTopMovableBase => {
                        let h = h.ok_or_else(|| Error::validation("initial.h", "missing field"))?;
                        s.a_r4 = Some(Vec4::new(gamma, h));
                    }
                }
                s.theta = theta.as_ref().map(v3);
                s.deltas = deltas.as_ref().map(|d| (v4(&d[0]), v4(&d[1])));
                if s.theta.is_some() && s.deltas.is_some() {
                    return Err(Error::validation(
                        "initial",
                        "theta and deltas cannot both be tracked",
                    ));
                }
                if self.system == SystemId::HeavyTopMovableBase
                    && (s.theta.is_some() || s.deltas.is_some())
                {
                    return Err(Error::validation(
                        "initial",
                        "the heavy top tracks no extra parameters",
                    ));
                }
                if self.controller == ControllerId::UwvSteady && s.deltas.is_some() {
                    return Err(Error::validation(
                        "initial.deltas",
                        "not used by the steady-motion controller",
                    ));
                }
                if self.controller == ControllerId::UwvDrift && s.theta.is_some() {
                    return Err(Error::validation(
                        "initial.theta",
                        "not used by the drift controller",
                    ));
                }
                Ok(s)
            }
            InitialDto::PerturbedEquilibrium {
                tilt,
                omega,
                vel,
                drift,
            } => {
                let eq = self.equilibrium_candidate().ok_or_else(|| {
                    Error::validation(
                        "initial.kind",
                        "perturbed_equilibrium needs a desired motion on the underwater vehicle",
                    )
                })??;
                let q = exp_so3(&v3(tilt));
                let qt = q.transpose();
                let rot4 = |a: Vec4| Vec4::new(qt * a.spatial, a.scalar);
                Ok(ReducedState {
                    xi: AlgebraVector::new(eq.xi.omega + v3(omega), eq.xi.vel + v3(vel)),
                    a_r3: eq.a_r3.map(|g| qt * g),
                    a_r4: None,
                    theta: eq.theta.map(|t| qt * t),
                    deltas: eq.deltas.map(|(a, b)| {
                        (
                            rot4(a) + Vec4::new(Vec3::zeros(), drift[0]),
                            rot4(b) + Vec4::new(Vec3::zeros(), drift[1]),
                        )
                    }),
                })
            }
        }
    }

    /// The equilibrium ζ_e implied by the desired motion: the controller's own
    /// equilibrium, or for the uncontrolled vehicle the steady-motion point
    /// without Θ. `None` when the scenario defines no desired motion.
    pub fn equilibrium_candidate(&self) -> Option<Result<ReducedState>> {
        if self.system != SystemId::UnderwaterVehicle {
            return None;
        }
        let d = self.desired?;
        Some(match self.controller {
            ControllerId::UwvDrift => drift_equilibrium(&d),
            ControllerId::UwvSteady => Ok(steady_equilibrium(&d)),
            _ => {
                let mut eq = steady_equilibrium(&d);
                eq.theta = None;
                Ok(eq)
            }
        })
    }

    /// Equilibrium matched to the fields the initial state carries.
    pub fn equilibrium_for_initial(&self) -> Option<Result<ReducedState>> {
        let d = self.desired?;
        if self.system != SystemId::UnderwaterVehicle {
            return None;
        }
        Some((|| {
            let mut eq = if self.initial.deltas.is_some() {
                drift_equilibrium(&d)?
            } else {
                steady_equilibrium(&d)
            };
            if self.initial.theta.is_none() {
                eq.theta = None;
            }
            Ok(eq)
        })())
    }

    pub fn closed_loop(&self) -> Result<ClosedLoop> {
        let shaping = || -> Result<(Gains, DesiredMotion)> {
            Ok((
                self.gains.ok_or_else(|| {
                    Error::validation("gains", "required by the selected controller")
                })?,
                self.desired.ok_or_else(|| {
                    Error::validation("desired", "required by the selected controller")
                })?,
            ))
        };
        let controller = match self.controller {
            ControllerId::None => Controller::None,
            ControllerId::HtmbShaping => Controller::HtmbShaping,
            ControllerId::UwvSteady => {
                let (gains, desired) = shaping()?;
                Controller::UwvSteady { gains, desired }
            }
            ControllerId::UwvDrift => {
                let (gains, desired) = shaping()?;
                Controller::UwvDrift { gains, desired }
            }
        };
        ClosedLoop::new(self.system, self.inertia, controller).map_err(path_err("controller"))
    }

    fn to_dto(&self) -> ScenarioDto {
        let p = &self.inertia;
        let s = &self.initial;
        ScenarioDto {
            system: self.system,
            controller: self.controller,
            inertia: InertiaDto {
                j: rows3(&p.j_block),
                d: rows3(&p.d_block),
                m: rows3(&p.m_block),
                m_body: p.m_body,
                m_total: p.m_total,
                g: p.g,
                l: p.l,
                chi: arr3(&p.chi),
            },
            gains: self.gains.map(|g| GainsDto {
                alpha: g.alpha,
                beta: g.beta,
                k: [
                    [g.k_matrix[(0, 0)], g.k_matrix[(0, 1)]],
                    [g.k_matrix[(1, 0)], g.k_matrix[(1, 1)]],
                ],
            }),
            desired: self.desired.map(|d| DesiredDto {
                r_d: rows3(d.r_d()),
                v_d: arr3(d.v_d()),
            }),
            initial: InitialDto::Explicit {
                omega: arr3(&s.xi.omega),
                vel: arr3(&s.xi.vel),
                gamma: s.gamma().map(|g| arr3(&g)),
                h: s.a_r4.map(|a| a.scalar),
                theta: s.theta.map(|t| arr3(&t)),
                deltas: s.deltas.map(|(a, b)| [arr4(&a), arr4(&b)]),
            },
            integrator: IntegratorDto {
                step: self.integrator.step,
                t_final: self.integrator.t_final,
                method: MethodDto::Rk4,
            },
            outputs: self.outputs.clone(),
        }
    }

    /// Canonical JSON with the initial state written out explicitly.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_dto()).expect("scenario serializes")
    }

    /// SHA-256 of the canonical compact JSON.
    pub fn digest(&self) -> String {
        let text = serde_json::to_string(&self.to_dto()).expect("scenario serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory
/// and a rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    use std::io::Write;
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path)
        .map_err(|e| Error::Io(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const STEADY: &str = r#"{
        "system": "underwater_vehicle",
        "controller": "uwv_steady",
        "inertia": {
            "j": [[3,0,0],[0,2,0],[0,0,1]], "d": [[0,0,0],[0,0,0],[0,0,0]],
            "m": [[1.2,0,0],[0,1.5,0],[0,0,2]],
            "m_body": 1.0, "m_total": 3.0, "g": 9.81, "l": 0.10193679918450561, "chi": [0,0,1]
        },
        "gains": {"alpha": 25.0, "beta": 1.0},
        "desired": {"r_d": [[1,0,0],[0,1,0],[0,0,1]], "v_d": [0, 0, 1]},
        "initial": {"kind": "perturbed_equilibrium", "tilt": [0.01, 0, 0]},
        "integrator": {"step": 0.01, "t_final": 1.0}
    }"#;

    fn edit(f: impl FnOnce(&mut serde_json::Value)) -> String {
        let mut v: serde_json::Value = serde_json::from_str(STEADY).unwrap();
        f(&mut v);
        v.to_string()
    }

    #[test]
    fn parses_and_round_trips() {
        let s = parse_scenario(STEADY).unwrap();
        assert!(s.warnings.is_empty());
        assert!(s.initial.theta.is_some());
        let text = s.to_json();
        let again = parse_scenario(&text).unwrap();
        assert_eq!(again, s);
        assert_eq!(again.to_json(), text);
        assert_eq!(again.digest(), s.digest());
        assert_eq!(s.digest().len(), 64);
    }

    #[test]
    fn non_unit_chi_names_path() {
        let t = edit(|v| v["inertia"]["chi"] = serde_json::json!([0, 0, 2]));
        assert!(
            matches!(parse_scenario(&t), Err(Error::Validation { path, .. }) if path == "inertia.chi")
        );
    }

    #[test]
    fn negative_beta_warns() {
        let t = edit(|v| v["gains"]["beta"] = serde_json::json!(-1.0));
        let s = parse_scenario(&t).unwrap();
        assert_eq!(s.warnings.len(), 1);
        assert!(s.warnings[0].contains("stability condition violated"));
    }

    #[test]
    fn structural_errors_carry_paths() {
        let t = edit(|v| v["inertia"]["bogus"] = serde_json::json!(1));
        let e = parse_scenario(&t);
        assert!(
            matches!(&e, Err(Error::Validation { path, .. }) if path == "inertia.bogus"),
            "{e:?}"
        );
        let t = edit(|v| v["desired"]["v_d"] = serde_json::json!([0, 0]));
        assert!(
            matches!(parse_scenario(&t), Err(Error::Validation { path, .. }) if path.starts_with("desired.v_d"))
        );
        let t = edit(|v| v["desired"]["v_d"] = serde_json::json!([0, 0, 0]));
        assert!(
            matches!(parse_scenario(&t), Err(Error::Validation { path, .. }) if path == "desired.v_d")
        );
        let t = edit(|v| {
            v.as_object_mut().unwrap().remove("gains");
        });
        assert!(
            matches!(parse_scenario(&t), Err(Error::Validation { path, .. }) if path == "gains")
        );
        assert!(matches!(
            parse_scenario("{ not json"),
            Err(Error::Parse { .. })
        ));
        let t = edit(|v| v["integrator"]["step"] = serde_json::json!(-1));
        assert!(
            matches!(parse_scenario(&t), Err(Error::Validation { path, .. }) if path == "integrator.step")
        );
    }

    #[test]
    fn controller_fields_required() {
        let t = edit(
            |v| v["initial"] = serde_json::json!({"kind": "explicit", "omega": [0,0,0], "vel": [0,0,1], "gamma": [0,0,-1]}),
        );
        assert!(
            matches!(parse_scenario(&t), Err(Error::Validation { path, .. }) if path == "initial.theta")
        );
        let t = edit(
            |v| v["initial"] = serde_json::json!({"kind": "explicit", "omega": [0,0,0], "vel": [0,0,1], "gamma": [0,0,0], "theta": [0,0,1]}),
        );
        assert!(
            matches!(parse_scenario(&t), Err(Error::Validation { path, .. }) if path == "initial.gamma")
        );
        let t = edit(|v| v["controller"] = serde_json::json!("htmb_shaping"));
        assert!(
            matches!(parse_scenario(&t), Err(Error::Validation { path, .. }) if path == "controller")
        );
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub").join("x.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}

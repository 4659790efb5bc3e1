//! Adapter protocol for delegating grasp trials to an external physics
//! simulator.
//!
//! The protocol is newline-delimited JSON over a byte stream: one
//! request object per line, answered by exactly one response object per
//! line, in order. Supported endpoints:
//!
//! - `cmd:<shell command>` — spawn a subprocess, speak over stdin/stdout
//! - `tcp:<host:port>` — connect a TCP socket
//! - `unix:<path>` — connect a Unix domain socket

use super::{FailureStage, GripperModel, Outcome, OutcomeModel, TrialError, TrialSpec};
use crate::se3::RigidTransform;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

/// Pose wire format: row-major 3x3 rotation and translation in mm.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoseMessage {
    pub rotation: [f64; 9],
    pub translation: [f64; 3],
}

impl From<&RigidTransform> for PoseMessage {
    fn from(t: &RigidTransform) -> Self {
        let r = t.rotation();
        let mut rotation = [0.0; 9];
        for row in 0..3 {
            for col in 0..3 {
                rotation[row * 3 + col] = r[(row, col)];
            }
        }
        let tr = t.translation();
        Self {
            rotation,
            translation: [tr.x, tr.y, tr.z],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GripperMessage {
    pub name: String,
    pub max_opening_mm: f64,
    pub finger_depth_mm: f64,
    pub friction_with_object: f64,
    pub rotation_tolerance_deg: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StagesMessage {
    /// Hand-frame offset from the grasp pose to the approach standoff.
    pub approach_offset: [f64; 3],
    /// Vertical lift after closure (mm).
    pub lift_height: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuccessCriterionMessage {
    /// Allowed deviation of the final hand-to-object distance (mm).
    pub tolerance_mm: f64,
    /// Post-lift hold period the simulator must sustain (s).
    pub hold_s: f64,
}

/// One trial request sent to the simulator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdapterRequest {
    pub trial_id: u64,
    pub object_id: u32,
    pub mesh_path: String,
    pub object_pose_sim: PoseMessage,
    pub gripper: GripperMessage,
    pub plan_pose: PoseMessage,
    pub stages: StagesMessage,
    pub success_criterion: SuccessCriterionMessage,
}

/// One verdict read back from the simulator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdapterResponse {
    pub trial_id: u64,
    pub success: bool,
    #[serde(default)]
    pub failure_stage: Option<String>,
    pub final_distance_mm: f64,
}

/// Parsed adapter endpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    Command(String),
    Tcp(String),
    Unix(PathBuf),
}

impl Endpoint {
    pub fn parse(spec: &str) -> Result<Self, TrialError> {
        if let Some(cmd) = spec.strip_prefix("cmd:") {
            Ok(Endpoint::Command(cmd.to_string()))
        } else if let Some(addr) = spec.strip_prefix("tcp:") {
            Ok(Endpoint::Tcp(addr.to_string()))
        } else if let Some(path) = spec.strip_prefix("unix:") {
            Ok(Endpoint::Unix(PathBuf::from(path)))
        } else {
            Err(TrialError::OutcomeModelUnavailable(format!(
                "unrecognized adapter endpoint {spec:?} (expected cmd:, tcp: or unix: prefix)"
            )))
        }
    }

    /// Opens the byte stream for this endpoint.
    pub fn connect(&self) -> Result<Box<dyn Transport>, TrialError> {
        let unavailable =
            |e: std::io::Error| TrialError::OutcomeModelUnavailable(format!("{self:?}: {e}"));
        match self {
            Endpoint::Command(cmd) => {
                let child = std::process::Command::new("sh")
                    .arg("-c")
                    .arg(cmd)
                    .stdin(std::process::Stdio::piped())
                    .stdout(std::process::Stdio::piped())
                    .spawn()
                    .map_err(unavailable)?;
                Ok(Box::new(ChildStream {
                    stdin: child.stdin.expect("piped stdin"),
                    stdout: child.stdout.expect("piped stdout"),
                }))
            }
            Endpoint::Tcp(addr) => {
                let stream = std::net::TcpStream::connect(addr).map_err(unavailable)?;
                Ok(Box::new(stream))
            }
            Endpoint::Unix(path) => {
                let stream = std::os::unix::net::UnixStream::connect(path).map_err(unavailable)?;
                Ok(Box::new(stream))
            }
        }
    }
}

/// A duplex byte stream the adapter can speak over.
pub trait Transport: Read + Write + Send {}
impl<T: Read + Write + Send> Transport for T {}

/// Stdin/stdout of a spawned simulator subprocess as one duplex stream.
struct ChildStream {
    stdin: std::process::ChildStdin,
    stdout: std::process::ChildStdout,
}

impl Read for ChildStream {
    fn read(&mut self, buf: &mut [u8]) -> std::io::Result<usize> {
        self.stdout.read(buf)
    }
}

impl Write for ChildStream {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.stdin.write(buf)
    }
    fn flush(&mut self) -> std::io::Result<()> {
        self.stdin.flush()
    }
}

/// Outcome model that forwards trials to an external simulator over a
/// line-delimited JSON stream.
pub struct ExternalAdapter<S: Read + Write + Send> {
    stream: Mutex<BufReader<S>>,
    mesh_dir: PathBuf,
    next_trial_id: AtomicU64,
}

impl ExternalAdapter<Box<dyn Transport>> {
    /// Connects to an endpoint spec (`cmd:`, `tcp:` or `unix:`).
    pub fn connect(endpoint: &str, mesh_dir: &Path) -> Result<Self, TrialError> {
        let transport = Endpoint::parse(endpoint)?.connect()?;
        Ok(Self::new(transport, mesh_dir))
    }
}

impl<S: Read + Write + Send> ExternalAdapter<S> {
    pub fn new(stream: S, mesh_dir: &Path) -> Self {
        Self {
            stream: Mutex::new(BufReader::new(stream)),
            mesh_dir: mesh_dir.to_path_buf(),
            next_trial_id: AtomicU64::new(1),
        }
    }

    fn build_request(&self, spec: &TrialSpec, gripper: &GripperModel) -> AdapterRequest {
        let mesh_path = self
            .mesh_dir
            .join(format!("obj_{:06}.ply", spec.object.object_id));
        AdapterRequest {
            trial_id: self.next_trial_id.fetch_add(1, Ordering::SeqCst),
            object_id: spec.object.object_id,
            mesh_path: mesh_path.to_string_lossy().into_owned(),
            object_pose_sim: (&spec.object_pose_sim).into(),
            gripper: GripperMessage {
                name: gripper.gripper.name().to_string(),
                max_opening_mm: gripper.max_opening_mm,
                finger_depth_mm: gripper.finger_depth_mm,
                friction_with_object: gripper.friction_with_object,
                rotation_tolerance_deg: gripper.rotation_tolerance_deg,
            },
            plan_pose: (&spec.plan).into(),
            stages: StagesMessage {
                approach_offset: [
                    spec.grasp.approach_offset.x,
                    spec.grasp.approach_offset.y,
                    spec.grasp.approach_offset.z,
                ],
                lift_height: spec.grasp.lift_height,
            },
            success_criterion: SuccessCriterionMessage {
                tolerance_mm: super::DEFAULT_TOLERANCE_MM,
                hold_s: super::DEFAULT_HOLD_S,
            },
        }
    }
}

fn parse_failure_stage(name: &str) -> Result<FailureStage, TrialError> {
    match name {
        "none" => Ok(FailureStage::None),
        "pre_grasp_collision" => Ok(FailureStage::PreGraspCollision),
        "no_closure" => Ok(FailureStage::NoClosure),
        "slip_or_eject" => Ok(FailureStage::SlipOrEject),
        "tolerance_exceeded" => Ok(FailureStage::ToleranceExceeded),
        "missing_estimate" => Ok(FailureStage::MissingEstimate),
        other => Err(TrialError::ProtocolError {
            detail: format!("unknown failure_stage {other:?}"),
        }),
    }
}

impl<S: Read + Write + Send> OutcomeModel for ExternalAdapter<S> {
    fn evaluate(&self, spec: &TrialSpec, gripper: &GripperModel) -> Result<Outcome, TrialError> {
        let request = self.build_request(spec, gripper);
        let mut line = serde_json::to_string(&request).map_err(|e| TrialError::ProtocolError {
            detail: format!("serializing request: {e}"),
        })?;
        line.push('\n');

        let mut stream = self.stream.lock().expect("adapter stream poisoned");
        let io_err = |e: std::io::Error| TrialError::ProtocolError {
            detail: format!("adapter i/o: {e}"),
        };
        stream.get_mut().write_all(line.as_bytes()).map_err(io_err)?;
        stream.get_mut().flush().map_err(io_err)?;

        let mut reply = String::new();
        let n = stream.read_line(&mut reply).map_err(io_err)?;
        if n == 0 {
            return Err(TrialError::ProtocolError {
                detail: "adapter closed the stream before responding".to_string(),
            });
        }
        let response: AdapterResponse =
            serde_json::from_str(reply.trim_end()).map_err(|e| TrialError::ProtocolError {
                detail: format!(
                    "malformed response ({e}): {:?}",
                    reply.trim_end().chars().take(120).collect::<String>()
                ),
            })?;
        if response.trial_id != request.trial_id {
            return Err(TrialError::ProtocolError {
                detail: format!(
                    "response trial_id {} does not match request {}",
                    response.trial_id, request.trial_id
                ),
            });
        }
        let failure_stage = match (&response.failure_stage, response.success) {
            (Some(name), _) => parse_failure_stage(name)?,
            (None, true) => FailureStage::None,
            (None, false) => {
                return Err(TrialError::ProtocolError {
                    detail: "failed response without failure_stage".to_string(),
                })
            }
        };
        if response.success && failure_stage != FailureStage::None {
            return Err(TrialError::ProtocolError {
                detail: format!(
                    "successful response with failure_stage {:?}",
                    failure_stage.name()
                ),
            });
        }
        Ok(Outcome {
            success: response.success,
            failure_stage,
            final_distance_mm: response.final_distance_mm,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bop::{ObjectModel, SymmetrySpec};
    use crate::catalog::{Gripper, ReferenceGrasp};
    use crate::shapes;
    use nalgebra::Vector3;
    use std::os::unix::net::UnixStream;

    fn fixture<'a>(object: &'a ObjectModel, grasp: &'a ReferenceGrasp) -> TrialSpec<'a> {
        TrialSpec {
            object,
            object_pose_sim: RigidTransform::from_translation(Vector3::new(0.0, 0.0, 10.0)),
            plan: grasp.hand_pose_ref,
            grasp,
        }
    }

    fn fixture_object() -> ObjectModel {
        ObjectModel {
            object_id: 7,
            vertices: shapes::box_surface(Vector3::new(20.0, 20.0, 20.0), 5.0),
            full_vertex_count: 0,
            diameter: 20.0 * 3f64.sqrt(),
            symmetry: SymmetrySpec::trivial(),
            mass_kg: 0.2,
            friction_coefficient: 0.5,
        }
    }

    fn fixture_grasp() -> ReferenceGrasp {
        ReferenceGrasp {
            object_id: 7,
            gripper: Gripper::Parallel,
            grasp_index: 0,
            hand_pose_ref: RigidTransform::from_translation(Vector3::new(0.0, 0.0, 40.0)),
            approach_offset: Vector3::new(0.0, 0.0, -80.0),
            lift_height: 150.0,
            target_hand_object_distance: 30.0,
        }
    }

    /// Stub simulator: reads one request, replies via `f`.
    fn with_stub<T>(
        reply: impl FnOnce(AdapterRequest) -> String + Send + 'static,
        run: impl FnOnce(&ExternalAdapter<UnixStream>) -> T,
    ) -> T {
        let (ours, theirs) = UnixStream::pair().unwrap();
        let responder = std::thread::spawn(move || {
            let mut reader = BufReader::new(theirs);
            let mut line = String::new();
            reader.read_line(&mut line).unwrap();
            let request: AdapterRequest = serde_json::from_str(line.trim_end()).unwrap();
            let mut out = reply(request);
            out.push('\n');
            reader.get_mut().write_all(out.as_bytes()).unwrap();
        });
        let adapter = ExternalAdapter::new(ours, Path::new("/tmp/meshes"));
        let result = run(&adapter);
        responder.join().unwrap();
        result
    }

    #[test]
    fn round_trip_success() {
        let object = fixture_object();
        let grasp = fixture_grasp();
        let outcome = with_stub(
            |request| {
                assert_eq!(request.object_id, 7);
                assert!(request.mesh_path.ends_with("obj_000007.ply"));
                assert_eq!(request.success_criterion.tolerance_mm, 50.0);
                assert_eq!(request.success_criterion.hold_s, 15.0);
                assert_eq!(request.object_pose_sim.translation, [0.0, 0.0, 10.0]);
                serde_json::to_string(&AdapterResponse {
                    trial_id: request.trial_id,
                    success: true,
                    failure_stage: None,
                    final_distance_mm: 30.5,
                })
                .unwrap()
            },
            |adapter| {
                adapter
                    .evaluate(&fixture(&object, &grasp), &GripperModel::default_parallel())
                    .unwrap()
            },
        );
        assert!(outcome.success);
        assert_eq!(outcome.failure_stage, FailureStage::None);
        assert_eq!(outcome.final_distance_mm, 30.5);
    }

    #[test]
    fn round_trip_failure_stage() {
        let object = fixture_object();
        let grasp = fixture_grasp();
        let outcome = with_stub(
            |request| {
                serde_json::to_string(&AdapterResponse {
                    trial_id: request.trial_id,
                    success: false,
                    failure_stage: Some("slip_or_eject".to_string()),
                    final_distance_mm: 181.0,
                })
                .unwrap()
            },
            |adapter| {
                adapter
                    .evaluate(&fixture(&object, &grasp), &GripperModel::default_parallel())
                    .unwrap()
            },
        );
        assert!(!outcome.success);
        assert_eq!(outcome.failure_stage, FailureStage::SlipOrEject);
    }

    #[test]
    fn malformed_response_is_protocol_error() {
        let object = fixture_object();
        let grasp = fixture_grasp();
        let err = with_stub(
            |_| "this is not json".to_string(),
            |adapter| {
                adapter
                    .evaluate(&fixture(&object, &grasp), &GripperModel::default_parallel())
                    .unwrap_err()
            },
        );
        match err {
            TrialError::ProtocolError { detail } => {
                assert!(detail.contains("this is not json"), "{detail}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn mismatched_trial_id_is_protocol_error() {
        let object = fixture_object();
        let grasp = fixture_grasp();
        let err = with_stub(
            |request| {
                serde_json::to_string(&AdapterResponse {
                    trial_id: request.trial_id + 99,
                    success: true,
                    failure_stage: None,
                    final_distance_mm: 0.0,
                })
                .unwrap()
            },
            |adapter| {
                adapter
                    .evaluate(&fixture(&object, &grasp), &GripperModel::default_parallel())
                    .unwrap_err()
            },
        );
        assert!(matches!(err, TrialError::ProtocolError { .. }));
    }

    #[test]
    fn endpoint_parsing() {
        assert_eq!(
            Endpoint::parse("cmd:python sim.py").unwrap(),
            Endpoint::Command("python sim.py".to_string())
        );
        assert_eq!(
            Endpoint::parse("tcp:localhost:9000").unwrap(),
            Endpoint::Tcp("localhost:9000".to_string())
        );
        assert_eq!(
            Endpoint::parse("unix:/tmp/sim.sock").unwrap(),
            Endpoint::Unix(PathBuf::from("/tmp/sim.sock"))
        );
        assert!(Endpoint::parse("http://nope").is_err());
    }
}

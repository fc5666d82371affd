//! Client side of the worker protocol: spawns a worker process and exchanges
//! one request/response line at a time.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use crate::pipeline::PromptSet;
use crate::types::{BinaryMask, FrameRef, MaskTrack, VideoSequence};

use super::protocol::{decode_response, Handshake, Request, WireMask, PROTOCOL_VERSION};
use super::{BackendError, PredictorBackend, PredictorRequest, PropagateRequest, PropagatorBackend};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(120);

struct WorkerState {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    next_id: u64,
    broken: bool,
}

/// One worker process. Requests are serialised: one in flight at a time.
pub struct WorkerEndpoint {
    command: String,
    timeout: Duration,
    state: Mutex<WorkerState>,
}

impl std::fmt::Debug for WorkerEndpoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WorkerEndpoint")
            .field("command", &self.command)
            .field("timeout", &self.timeout)
            .finish()
    }
}

impl WorkerEndpoint {
    /// Spawns `command` (whitespace-separated program and arguments) and
    /// waits for the protocol handshake.
    pub fn spawn(command: &str, timeout: Duration) -> Result<Self, BackendError> {
        let state = start_worker(command, timeout)?;
        Ok(Self {
            command: command.to_string(),
            timeout,
            state: Mutex::new(state),
        })
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    fn exchange(
        &self,
        build: impl FnOnce(String) -> Request,
        expected_frames: &[usize],
        dims: (usize, usize),
    ) -> Result<Vec<(usize, BinaryMask)>, BackendError> {
        let mut state = self.state.lock().expect("worker lock poisoned");
        if state.broken {
            // the stream may be out of sync; replace the worker
            let fresh = start_worker(&self.command, self.timeout)?;
            let mut old = std::mem::replace(&mut *state, fresh);
            shutdown(&mut old);
        }
        let id = format!("req-{}", state.next_id);
        state.next_id += 1;
        let req = build(id.clone());
        let mut line = serde_json::to_string(&req).expect("requests serialise");
        line.push('\n');
        let write = match state.stdin.as_mut() {
            Some(stdin) => stdin.write_all(line.as_bytes()).and_then(|_| stdin.flush()),
            None => Err(std::io::Error::new(std::io::ErrorKind::BrokenPipe, "stdin closed")),
        };
        if let Err(e) = write {
            state.broken = true;
            return Err(crash_or(&mut state, BackendError::Io(e)));
        }
        let reply = read_line(&mut state, self.timeout)?;
        decode_response(&reply, &id, expected_frames, dims).inspect_err(|e| {
            // a remote error leaves the stream in sync; anything else may not
            if !matches!(e, BackendError::Remote(_)) {
                state.broken = true;
            }
        })
    }
}

fn start_worker(command: &str, timeout: Duration) -> Result<WorkerState, BackendError> {
    let mut parts = command.split_whitespace();
    let program = parts.next().ok_or_else(|| BackendError::Spawn {
        command: command.to_string(),
        source: std::io::Error::new(std::io::ErrorKind::InvalidInput, "empty command"),
    })?;
    let mut child = Command::new(program)
        .args(parts)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::inherit())
        .spawn()
        .map_err(|source| BackendError::Spawn {
            command: command.to_string(),
            source,
        })?;
    let stdout = child.stdout.take().expect("piped stdout");
    let stdin = child.stdin.take();
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for line in BufReader::new(stdout).lines() {
            if tx.send(line).is_err() {
                break;
            }
        }
    });
    let mut state = WorkerState {
        child,
        stdin,
        lines: rx,
        next_id: 0,
        broken: false,
    };
    let handshake = read_line(&mut state, timeout).and_then(|line| {
        let hs: Handshake =
            serde_json::from_str(&line).map_err(|e| BackendError::Protocol(format!("bad handshake '{line}': {e}")))?;
        if !hs.ready || hs.protocol != PROTOCOL_VERSION {
            return Err(BackendError::Protocol(format!(
                "worker speaks protocol {} (ready={}), harness needs {PROTOCOL_VERSION}",
                hs.protocol, hs.ready
            )));
        }
        Ok(())
    });
    if let Err(e) = handshake {
        shutdown(&mut state);
        return Err(e);
    }
    Ok(state)
}

fn shutdown(state: &mut WorkerState) {
    // closing stdin asks the worker to exit
    state.stdin.take();
    for _ in 0..50 {
        if let Ok(Some(_)) = state.child.try_wait() {
            return;
        }
        thread::sleep(Duration::from_millis(10));
    }
    let _ = state.child.kill();
    let _ = state.child.wait();
}

fn crash_or(state: &mut WorkerState, fallback: BackendError) -> BackendError {
    match state.child.try_wait() {
        Ok(Some(status)) => BackendError::WorkerCrashed(status.to_string()),
        _ => fallback,
    }
}

fn read_line(state: &mut WorkerState, timeout: Duration) -> Result<String, BackendError> {
    match state.lines.recv_timeout(timeout) {
        Ok(Ok(line)) => Ok(line),
        Ok(Err(e)) => {
            state.broken = true;
            Err(BackendError::Io(e))
        }
        Err(RecvTimeoutError::Timeout) => {
            state.broken = true;
            Err(BackendError::Timeout(timeout))
        }
        Err(RecvTimeoutError::Disconnected) => {
            state.broken = true;
            let status = (0..100)
                .find_map(|_| match state.child.try_wait() {
                    Ok(Some(s)) => Some(s.to_string()),
                    Ok(None) => {
                        thread::sleep(Duration::from_millis(10));
                        None
                    }
                    Err(e) => Some(e.to_string()),
                })
                .unwrap_or_else(|| "stdout closed".to_string());
            Err(BackendError::WorkerCrashed(status))
        }
    }
}

impl Drop for WorkerEndpoint {
    fn drop(&mut self) {
        if let Ok(state) = self.state.get_mut() {
            shutdown(state);
        }
    }
}

fn frame_paths(video: &VideoSequence) -> Result<Vec<String>, BackendError> {
    video
        .frames()
        .iter()
        .enumerate()
        .map(|(i, f)| match f {
            FrameRef::Path(p) => Ok(p.to_string_lossy().into_owned()),
            FrameRef::Pixels(_) => Err(BackendError::InMemoryFrame(i)),
        })
        .collect()
}

/// Sends a predict request to `endpoint`.
pub fn external_predict(req: &PredictorRequest<'_>, endpoint: &WorkerEndpoint) -> Result<MaskTrack, BackendError> {
    let frames = frame_paths(req.video)?;
    let (height, width) = req.video.dims();
    let masks = endpoint.exchange(
        |id| Request::Predict {
            id,
            expression: req.expression.to_string(),
            frames,
            indices: req.indices.to_vec(),
            height,
            width,
        },
        req.indices,
        (height, width),
    )?;
    Ok(MaskTrack::from_entries(req.video.id(), masks)?)
}

fn wire_prompts(prompts: &PromptSet) -> Vec<WireMask> {
    prompts.entries().iter().map(|(f, m)| WireMask::encode(*f, m)).collect()
}

/// Sends a propagate request for one segment to `endpoint`.
pub fn external_propagate(
    req: &PropagateRequest<'_>,
    endpoint: &WorkerEndpoint,
) -> Result<Vec<(usize, BinaryMask)>, BackendError> {
    let frames = frame_paths(req.video)?;
    let (height, width) = req.video.dims();
    endpoint.exchange(
        |id| Request::Propagate {
            id,
            frames,
            prompts: wire_prompts(req.prompts),
            targets: req.segment.target_frames.clone(),
            direction: req.segment.direction.wire_name().to_string(),
            height,
            width,
        },
        &req.segment.target_frames,
        (height, width),
    )
}

impl PredictorBackend for WorkerEndpoint {
    fn predict(&self, req: &PredictorRequest<'_>) -> Result<MaskTrack, BackendError> {
        external_predict(req, self)
    }
}

impl PropagatorBackend for WorkerEndpoint {
    fn propagate(&self, req: &PropagateRequest<'_>) -> Result<Vec<(usize, BinaryMask)>, BackendError> {
        external_propagate(req, self)
    }
}

//! Minimal protocol worker used to exercise the external backend path.
//!
//! Predict answers with empty masks; propagate copies the nearest prompt mask
//! (ties to the earlier prompt) onto every target. Faults can be injected to
//! test the harness's error handling.

use std::io::{self, BufRead, Write};
use std::str::FromStr;
use std::time::Duration;

use crate::types::BinaryMask;

use super::protocol::{Handshake, Request, Response, WireMask};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StubFault {
    /// Reply with a line that is not JSON.
    Malformed,
    /// Drop the last mask of the reply.
    MissingTarget,
    /// Exit without replying.
    Crash,
    /// Never reply.
    Hang,
    /// Reply with masks one row too tall.
    WrongDims,
    /// Reply with a different id.
    WrongId,
    /// Reply with an error object.
    RemoteError,
}

impl FromStr for StubFault {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "malformed" => StubFault::Malformed,
            "missing-target" => StubFault::MissingTarget,
            "crash" => StubFault::Crash,
            "hang" => StubFault::Hang,
            "wrong-dims" => StubFault::WrongDims,
            "wrong-id" => StubFault::WrongId,
            "remote-error" => StubFault::RemoteError,
            other => return Err(format!("unknown fault '{other}'")),
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct StubOptions {
    pub protocol: Option<u32>,
    pub fault: Option<StubFault>,
    /// Only inject the fault into predict requests whose expression contains
    /// this text; `None` injects into every request.
    pub fault_trigger: Option<String>,
}

/// Outcome of a stub session.
#[derive(Debug, PartialEq, Eq)]
pub enum StubExit {
    InputClosed,
    Crashed,
}

fn nearest_prompt(prompts: &[(usize, BinaryMask)], target: usize) -> Option<&BinaryMask> {
    prompts
        .iter()
        .min_by_key(|(f, _)| (f.abs_diff(target), *f))
        .map(|(_, m)| m)
}

fn answer(req: &Request) -> Result<Vec<WireMask>, String> {
    match req {
        Request::Predict {
            indices, height, width, ..
        } => {
            let empty = BinaryMask::empty(*height, *width).map_err(|e| e.to_string())?;
            Ok(indices.iter().map(|&i| WireMask::encode(i, &empty)).collect())
        }
        Request::Propagate { prompts, targets, .. } => {
            let decoded = prompts
                .iter()
                .map(|p| p.decode().map(|m| (p.index, m)).map_err(|e| e.to_string()))
                .collect::<Result<Vec<_>, _>>()?;
            targets
                .iter()
                .map(|&t| {
                    nearest_prompt(&decoded, t)
                        .map(|m| WireMask::encode(t, m))
                        .ok_or_else(|| "propagate request without prompts".to_string())
                })
                .collect()
        }
    }
}

fn write_line(out: &mut impl Write, line: &str) -> io::Result<()> {
    out.write_all(line.as_bytes())?;
    out.write_all(b"\n")?;
    out.flush()
}

/// Serves requests from `input` until it closes.
pub fn serve_stub(input: impl BufRead, mut output: impl Write, opts: &StubOptions) -> io::Result<StubExit> {
    let hs = Handshake {
        protocol: opts.protocol.unwrap_or(Handshake::current().protocol),
        ..Handshake::current()
    };
    write_line(&mut output, &serde_json::to_string(&hs)?)?;
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let req: Request = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                let id = serde_json::from_str::<serde_json::Value>(&line)
                    .ok()
                    .and_then(|v| v.get("id").cloned())
                    .unwrap_or(serde_json::Value::Null);
                let resp = Response::error(id, format!("malformed request: {e}"));
                write_line(&mut output, &serde_json::to_string(&resp)?)?;
                continue;
            }
        };
        let triggered = match (&opts.fault_trigger, &req) {
            (None, _) => true,
            (Some(t), Request::Predict { expression, .. }) => expression.contains(t.as_str()),
            (Some(_), Request::Propagate { .. }) => false,
        };
        let fault = opts.fault.filter(|_| triggered);
        let id = req.id().to_string();
        let resp = match answer(&req) {
            Err(msg) => Response::error(serde_json::Value::String(id), msg),
            Ok(mut masks) => match fault {
                None => Response::masks(&id, masks),
                Some(StubFault::Malformed) => {
                    write_line(&mut output, "this is not json")?;
                    continue;
                }
                Some(StubFault::Crash) => return Ok(StubExit::Crashed),
                Some(StubFault::Hang) => {
                    std::thread::sleep(Duration::from_secs(3600));
                    continue;
                }
                Some(StubFault::MissingTarget) => {
                    masks.pop();
                    Response::masks(&id, masks)
                }
                Some(StubFault::WrongDims) => {
                    let (h, w) = match &req {
                        Request::Predict { height, width, .. } | Request::Propagate { height, width, .. } => {
                            (*height, *width)
                        }
                    };
                    let tall = BinaryMask::empty(h + 1, w).expect("positive dims");
                    let masks = masks.iter().map(|m| WireMask::encode(m.index, &tall)).collect();
                    Response::masks(&id, masks)
                }
                Some(StubFault::WrongId) => Response::masks(&format!("{id}-x"), masks),
                Some(StubFault::RemoteError) => Response::error(serde_json::Value::String(id), "injected failure"),
            },
        };
        write_line(&mut output, &serde_json::to_string(&resp)?)?;
    }
    Ok(StubExit::InputClosed)
}

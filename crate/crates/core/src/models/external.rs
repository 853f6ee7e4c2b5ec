//! Subprocess adapter for external black-box models.
//!
//! Protocol: one JSON object per line on the child's stdin/stdout.
//!
//! ```text
//! {"op":"hello"}                        -> {"op":"hello","representation":"sparse-vector","name":"..."}
//! {"op":"predict","inputs":[...]}       -> {"op":"predict","probs":[...]}
//! {"op":"bye"}                          -> process exits with status 0
//! ```
//!
//! Sparse vectors are encoded `{"dim":V,"idx":[...],"val":[...]}`; token
//! sequences as string arrays.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use super::{logit, Classifier, Input, RepresentationKind, Target, VectorModel};
use crate::error::{Error, Result};
use crate::sparse::SparseVector;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

/// A live connection to one adapter subprocess. Requests are serialized.
pub struct ExternalModelHandle {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    timeout: Duration,
    representation: RepresentationKind,
    name: String,
    /// Responses owed for requests that timed out and were re-sent.
    stale: usize,
    closed: bool,
}

fn protocol(message: impl Into<String>, line: impl Into<String>) -> Error {
    Error::Protocol {
        message: message.into(),
        line: line.into(),
    }
}

impl ExternalModelHandle {
    /// Spawns the adapter and performs the hello handshake.
    pub fn spawn(command: &[String], timeout: Duration) -> Result<Self> {
        let (program, args) = command
            .split_first()
            .ok_or_else(|| Error::Config("adapter command is empty".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = child.stdin.take();
        let stdout = child.stdout.take().expect("stdout is piped");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        let mut handle = Self {
            child,
            stdin,
            lines: rx,
            timeout,
            representation: RepresentationKind::SparseVector,
            name: String::new(),
            stale: 0,
            closed: false,
        };
        let reply = handle.request(&json!({"op": "hello"}))?;
        let (value, raw) = reply;
        if value.get("op") != Some(&json!("hello")) {
            return Err(protocol("expected hello response", raw));
        }
        handle.representation = match value.get("representation").and_then(Value::as_str) {
            Some("sparse-vector") => RepresentationKind::SparseVector,
            Some("token-sequence") => RepresentationKind::TokenSequence,
            _ => return Err(protocol("hello response lacks a valid representation", raw)),
        };
        handle.name = value
            .get("name")
            .and_then(Value::as_str)
            .ok_or_else(|| protocol("hello response lacks a name", raw.clone()))?
            .to_string();
        Ok(handle)
    }

    pub fn representation(&self) -> RepresentationKind {
        self.representation
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    fn send(&mut self, msg: &Value) -> Result<()> {
        if self.closed {
            return Err(protocol("adapter handle is closed", ""));
        }
        let stdin = self.stdin.as_mut().ok_or_else(|| protocol("adapter stdin closed", ""))?;
        let mut line = serde_json::to_string(msg)?;
        line.push('\n');
        if let Err(e) = stdin.write_all(line.as_bytes()).and_then(|_| stdin.flush()) {
            self.closed = true;
            return Err(e.into());
        }
        Ok(())
    }

    fn receive(&mut self) -> Result<String> {
        let deadline = Instant::now() + self.timeout;
        loop {
            let left = deadline.saturating_duration_since(Instant::now());
            match self.lines.recv_timeout(left) {
                Ok(Ok(line)) if line.trim().is_empty() => continue,
                Ok(Ok(line)) => {
                    if self.stale > 0 {
                        self.stale -= 1;
                        continue;
                    }
                    return Ok(line);
                }
                Ok(Err(e)) => {
                    self.closed = true;
                    return Err(e.into());
                }
                Err(RecvTimeoutError::Timeout) => return Err(Error::Timeout(self.timeout)),
                Err(RecvTimeoutError::Disconnected) => {
                    self.closed = true;
                    return Err(protocol("adapter exited", ""));
                }
            }
        }
    }

    /// Sends one request; on timeout the request is re-sent once.
    fn request(&mut self, msg: &Value) -> Result<(Value, String)> {
        self.send(msg)?;
        let line = match self.receive() {
            Err(Error::Timeout(_)) => {
                log::warn!("adapter {:?} timed out; retrying once", self.name);
                self.send(msg)?;
                match self.receive() {
                    Ok(line) => {
                        // The first answer may still arrive; it belongs to the same request.
                        self.stale += 1;
                        line
                    }
                    Err(e) => {
                        self.closed = true;
                        return Err(e);
                    }
                }
            }
            other => other?,
        };
        let value: Value = serde_json::from_str(&line).map_err(|e| protocol(format!("malformed JSON: {e}"), line.clone()))?;
        if !value.is_object() {
            return Err(protocol("response is not a JSON object", line));
        }
        Ok((value, line))
    }

    pub fn predict(&mut self, inputs: &[Input<'_>]) -> Result<Vec<f64>> {
        let mut encoded = Vec::with_capacity(inputs.len());
        for input in inputs {
            if input.kind() != self.representation {
                return Err(Error::RepresentationMismatch {
                    expected: self.representation.as_str(),
                    actual: input.kind().as_str(),
                });
            }
            encoded.push(match input {
                Input::Sparse(x) => serde_json::to_value(x)?,
                Input::Tokens(t) => json!(t),
            });
        }
        let (value, raw) = self.request(&json!({"op": "predict", "inputs": encoded}))?;
        if value.get("op") != Some(&json!("predict")) {
            return Err(protocol("expected predict response", raw));
        }
        let probs = value
            .get("probs")
            .and_then(Value::as_array)
            .ok_or_else(|| protocol("predict response lacks probs", raw.clone()))?;
        if probs.len() != inputs.len() {
            return Err(protocol(
                format!("expected {} probabilities, got {}", inputs.len(), probs.len()),
                raw,
            ));
        }
        probs
            .iter()
            .map(|p| match p.as_f64() {
                Some(v) if (0.0..=1.0).contains(&v) => Ok(v),
                _ => Err(protocol(format!("probability {p} not in [0,1]"), raw.clone())),
            })
            .collect()
    }

    /// Sends `bye` and waits for a clean exit.
    pub fn close(mut self) -> Result<()> {
        self.shutdown()
    }

    fn shutdown(&mut self) -> Result<()> {
        if self.closed {
            let _ = self.child.kill();
            let _ = self.child.wait();
            return Ok(());
        }
        let sent = self.send(&json!({"op": "bye"}));
        self.closed = true;
        self.stdin.take();
        let deadline = Instant::now() + self.timeout;
        loop {
            if let Some(status) = self.child.try_wait()? {
                sent?;
                return if status.success() {
                    Ok(())
                } else {
                    Err(protocol(format!("adapter exited with {status}"), ""))
                };
            }
            if Instant::now() >= deadline {
                let _ = self.child.kill();
                let _ = self.child.wait();
                return Err(Error::Timeout(self.timeout));
            }
            thread::sleep(Duration::from_millis(5));
        }
    }
}

impl Drop for ExternalModelHandle {
    fn drop(&mut self) {
        if !self.closed {
            let _ = self.shutdown();
        }
    }
}

/// An external model usable from many workers: each rayon worker lazily
/// spawns and owns its own subprocess.
pub struct ExternalModel {
    command: Vec<String>,
    timeout: Duration,
    dim: usize,
    representation: RepresentationKind,
    name: String,
    handles: Mutex<HashMap<Option<usize>, Arc<Mutex<ExternalModelHandle>>>>,
}

impl ExternalModel {
    /// Connects once to learn the adapter's representation. `dim` is the
    /// feature dimension for sparse-vector adapters.
    pub fn connect(command: Vec<String>, dim: usize, timeout: Duration) -> Result<Self> {
        let handle = ExternalModelHandle::spawn(&command, timeout)?;
        let representation = handle.representation();
        let name = handle.name().to_string();
        let mut handles = HashMap::new();
        handles.insert(rayon::current_thread_index(), Arc::new(Mutex::new(handle)));
        Ok(Self {
            command,
            timeout,
            dim,
            representation,
            name,
            handles: Mutex::new(handles),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    fn worker_handle(&self) -> Result<Arc<Mutex<ExternalModelHandle>>> {
        let key = rayon::current_thread_index();
        if let Some(h) = self.handles.lock().expect("handle map poisoned").get(&key) {
            return Ok(Arc::clone(h));
        }
        let handle = Arc::new(Mutex::new(ExternalModelHandle::spawn(&self.command, self.timeout)?));
        self.handles
            .lock()
            .expect("handle map poisoned")
            .insert(key, Arc::clone(&handle));
        Ok(handle)
    }

    pub fn predict(&self, inputs: &[Input<'_>]) -> Result<Vec<f64>> {
        let handle = self.worker_handle()?;
        let mut guard = handle.lock().expect("adapter handle poisoned");
        guard.predict(inputs)
    }
}

impl VectorModel for ExternalModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn proba(&self, x: &SparseVector) -> Result<f64> {
        Ok(self.predict(&[Input::Sparse(x)])?[0])
    }

    fn logit(&self, x: &SparseVector) -> Result<f64> {
        self.proba(x).map(logit)
    }

    fn eval_batch(&self, xs: &[SparseVector], target: Target) -> Result<Vec<f64>> {
        let inputs: Vec<Input<'_>> = xs.iter().map(Input::Sparse).collect();
        let probs = self.predict(&inputs)?;
        Ok(match target {
            Target::Probability => probs,
            Target::Logit => probs.into_iter().map(logit).collect(),
        })
    }
}

impl Classifier for ExternalModel {
    fn representation(&self) -> RepresentationKind {
        self.representation
    }

    fn predict_proba(&self, input: Input<'_>) -> Result<f64> {
        Ok(self.predict(&[input])?[0])
    }
}

//! Bridge to an external simulator process speaking newline-delimited JSON
//! over its standard input/output.
//!
//! Message flow (one JSON object per line, field order irrelevant):
//!
//! ```text
//! -> {"cmd":"init","dt":<seconds>,"schema_in":[...],"schema_out":[...]}
//! <- {"ok":true,"state":[...]}
//! -> {"cmd":"step","u":[...]}          (dt is fixed at init)
//! <- {"ok":true,"state":[...]}
//! -> {"cmd":"reset"}
//! <- {"ok":true,"state":[...]}
//! -> {"cmd":"end"}                     (no reply; child exits)
//! ```
//!
//! A child may refuse any request with `{"ok":false,"error":"..."}`.
//! Protocol violations, child death, and reply timeouts all surface as
//! model errors that abort the episode — the engine never guesses at
//! missing simulator state.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use serde::Deserialize;
use serde_json::json;

use crate::stl::SignalSchema;
use crate::system::{clamp_input, InputChannel, ModelError, SystemModel};

pub const DEFAULT_REPLY_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Deserialize)]
struct Reply {
    ok: bool,
    #[serde(default)]
    state: Option<Vec<f64>>,
    #[serde(default)]
    error: Option<String>,
}

/// A system model backed by a child process.
#[derive(Debug)]
pub struct ExternalModel {
    child: Child,
    stdin: ChildStdin,
    replies: mpsc::Receiver<std::io::Result<String>>,
    timeout: Duration,
    channels: Vec<InputChannel>,
    schema: SignalSchema,
    dt: f64,
    command: String,
    ended: bool,
}

impl ExternalModel {
    /// Launches `command` (split on whitespace) and performs the `init`
    /// handshake. `dt` is the sample period every later `step` must use.
    pub fn connect(
        command: &str,
        channels: Vec<InputChannel>,
        schema: SignalSchema,
        dt: f64,
    ) -> Result<Self, ModelError> {
        Self::connect_with_timeout(command, channels, schema, dt, DEFAULT_REPLY_TIMEOUT)
    }

    pub fn connect_with_timeout(
        command: &str,
        channels: Vec<InputChannel>,
        schema: SignalSchema,
        dt: f64,
        timeout: Duration,
    ) -> Result<Self, ModelError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(ModelError::InvalidSamplePeriod(dt));
        }
        let mut words = command.split_whitespace();
        let program = words
            .next()
            .ok_or_else(|| ModelError::Protocol("empty simulator command".into()))?;
        let mut child = Command::new(program)
            .args(words)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|source| ModelError::Spawn { command: command.to_string(), source })?;
        let stdin = child.stdin.take().expect("stdin was piped");
        let stdout = child.stdout.take().expect("stdout was piped");

        // Reading happens on a helper thread so a silent child becomes a
        // bounded recv timeout instead of a hung engine.
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            let mut reader = BufReader::new(stdout);
            loop {
                let mut line = String::new();
                match reader.read_line(&mut line) {
                    Ok(0) => break,
                    Ok(_) => {
                        if tx.send(Ok(line)).is_err() {
                            break;
                        }
                    }
                    Err(e) => {
                        let _ = tx.send(Err(e));
                        break;
                    }
                }
            }
        });

        let mut model = Self {
            child,
            stdin,
            replies: rx,
            timeout,
            channels,
            schema,
            dt,
            command: command.to_string(),
            ended: false,
        };
        let init = json!({
            "cmd": "init",
            "dt": dt,
            "schema_in": model.channels.iter().map(|c| c.name.clone()).collect::<Vec<_>>(),
            "schema_out": model.schema.iter().map(|(n, _)| n.to_string()).collect::<Vec<_>>(),
        });
        model.request(&init)?;
        Ok(model)
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    fn child_diagnostics(&mut self) -> String {
        match self.child.try_wait() {
            Ok(Some(status)) => format!("`{}` exited with {status}", self.command),
            Ok(None) => format!("`{}` closed its output but is still running", self.command),
            Err(e) => format!("`{}` status unavailable: {e}", self.command),
        }
    }

    fn request(&mut self, msg: &serde_json::Value) -> Result<Vec<f64>, ModelError> {
        if writeln!(self.stdin, "{msg}").and_then(|()| self.stdin.flush()).is_err() {
            self.ended = true;
            return Err(ModelError::ChildGone(self.child_diagnostics()));
        }
        let line = match self.replies.recv_timeout(self.timeout) {
            Ok(Ok(line)) => line,
            Ok(Err(e)) => return Err(ModelError::Io(e)),
            Err(mpsc::RecvTimeoutError::Timeout) => return Err(ModelError::Timeout(self.timeout)),
            Err(mpsc::RecvTimeoutError::Disconnected) => {
                self.ended = true;
                return Err(ModelError::ChildGone(self.child_diagnostics()));
            }
        };
        let reply: Reply = serde_json::from_str(line.trim()).map_err(|e| {
            ModelError::Protocol(format!("unparseable reply line {:?}: {e}", line.trim()))
        })?;
        if !reply.ok {
            return Err(ModelError::Protocol(format!(
                "simulator refused request: {}",
                reply.error.as_deref().unwrap_or("no reason given")
            )));
        }
        let state = reply
            .state
            .ok_or_else(|| ModelError::Protocol("ok reply without a state".into()))?;
        if state.len() != self.schema.len() {
            return Err(ModelError::OutputWidth { got: state.len(), want: self.schema.len() });
        }
        Ok(state)
    }
}

impl SystemModel for ExternalModel {
    fn input_channels(&self) -> &[InputChannel] {
        &self.channels
    }

    fn output_schema(&self) -> &SignalSchema {
        &self.schema
    }

    fn reset(&mut self) -> Result<Vec<f64>, ModelError> {
        self.request(&json!({"cmd": "reset"}))
    }

    fn step(&mut self, u: &[f64], dt: f64) -> Result<Vec<f64>, ModelError> {
        if dt != self.dt {
            return Err(ModelError::Protocol(format!(
                "step asked for dt = {dt} but {} was negotiated at init",
                self.dt
            )));
        }
        let u = clamp_input(&self.channels, u)?;
        self.request(&json!({"cmd": "step", "u": u}))
    }
}

impl Drop for ExternalModel {
    fn drop(&mut self) {
        if !self.ended {
            let _ = writeln!(self.stdin, "{}", json!({"cmd": "end"}));
            let _ = self.stdin.flush();
        }
        // Give a cooperative child a moment to exit, then make sure.
        for _ in 0..20 {
            match self.child.try_wait() {
                Ok(Some(_)) => return,
                Ok(None) => thread::sleep(Duration::from_millis(10)),
                Err(_) => break,
            }
        }
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

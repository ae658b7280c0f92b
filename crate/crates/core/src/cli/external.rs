//! `HOSI/1`: evaluating a model in a child process over a line protocol.
//!
//! The child is started with `sh -c <command>` and first writes the
//! handshake `HOSI/1 d=<d>` on stdout. The host then sends batches: one
//! point per line as `d` space-separated decimals, followed by an empty
//! line. The child answers with one decimal per point, in order, and must
//! flush when it reads the empty line.
//!
//! Each worker thread checks a session out of a pool, so concurrent batches
//! go to different children.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use crate::error::{Error, Result};
use crate::model::BlackBox;

pub const PROTOCOL: &str = "HOSI/1";

struct Session {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
    /// Lines received so far, handshake included.
    line_no: usize,
}

impl Session {
    fn spawn(command: &str, timeout: Duration) -> Result<(Self, usize)> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::External(format!("cannot start `{command}`: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        let mut session = Session {
            child,
            stdin,
            lines: rx,
            line_no: 0,
        };
        let hello = session.next_line(timeout)?;
        let dim = parse_handshake(&hello).ok_or_else(|| {
            Error::External(format!(
                "line 1: expected handshake `{PROTOCOL} d=<d>`, got `{hello}`"
            ))
        })?;
        Ok((session, dim))
    }

    fn next_line(&mut self, timeout: Duration) -> Result<String> {
        let line_no = self.line_no + 1;
        match self.lines.recv_timeout(timeout) {
            Ok(Ok(line)) => {
                self.line_no = line_no;
                Ok(line)
            }
            Ok(Err(e)) => Err(Error::External(format!("line {line_no}: read failed: {e}"))),
            Err(RecvTimeoutError::Timeout) => Err(Error::External(format!(
                "line {line_no}: no answer within {:.1} s",
                timeout.as_secs_f64()
            ))),
            Err(RecvTimeoutError::Disconnected) => {
                let status = self
                    .child
                    .wait()
                    .map(|s| s.to_string())
                    .unwrap_or_else(|e| e.to_string());
                Err(Error::External(format!(
                    "line {line_no}: evaluator exited ({status})"
                )))
            }
        }
    }

    fn evaluate(&mut self, dim: usize, points: &[f64], out: &mut [f64], timeout: Duration) -> Result<()> {
        let mut request = String::with_capacity(points.len() * 20);
        for x in points.chunks_exact(dim) {
            for (i, v) in x.iter().enumerate() {
                if i > 0 {
                    request.push(' ');
                }
                request.push_str(&v.to_string());
            }
            request.push('\n');
        }
        request.push('\n');
        let written = self
            .stdin
            .write_all(request.as_bytes())
            .and_then(|_| self.stdin.flush());
        if let Err(e) = written {
            return Err(Error::External(format!(
                "line {}: cannot write to evaluator: {e}",
                self.line_no + 1
            )));
        }
        for slot in out.iter_mut() {
            let line = self.next_line(timeout)?;
            let value: f64 = line.trim().parse().map_err(|_| {
                Error::External(format!("line {}: malformed value `{line}`", self.line_no))
            })?;
            if !value.is_finite() {
                return Err(Error::External(format!(
                    "line {}: non-finite value `{}`",
                    self.line_no,
                    line.trim()
                )));
            }
            *slot = value;
        }
        Ok(())
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn parse_handshake(line: &str) -> Option<usize> {
    let rest = line.trim().strip_prefix(PROTOCOL)?;
    rest.trim().strip_prefix("d=")?.parse().ok().filter(|&d| d > 0)
}

/// A [`BlackBox`] backed by child processes speaking `HOSI/1`.
pub struct ExternalEvaluator {
    command: String,
    dim: usize,
    timeout: Duration,
    idle: Mutex<Vec<Session>>,
}

impl ExternalEvaluator {
    /// Starts one child to learn the dimension; more are started on demand.
    pub fn spawn(command: &str, timeout: Duration) -> Result<Self> {
        let (session, dim) = Session::spawn(command, timeout)?;
        Ok(ExternalEvaluator {
            command: command.to_string(),
            dim,
            timeout,
            idle: Mutex::new(vec![session]),
        })
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    fn checkout(&self) -> Result<Session> {
        if let Some(s) = self.idle.lock().expect("session pool").pop() {
            return Ok(s);
        }
        let (session, dim) = Session::spawn(&self.command, self.timeout)?;
        if dim != self.dim {
            return Err(Error::External(format!(
                "line 1: evaluator announced d={dim}, earlier sessions used d={}",
                self.dim
            )));
        }
        Ok(session)
    }
}

impl BlackBox for ExternalEvaluator {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        let mut out = [0.0];
        self.eval_batch(x, &mut out)?;
        Ok(out[0])
    }

    fn eval_batch(&self, points: &[f64], out: &mut [f64]) -> Result<()> {
        if points.len() != out.len() * self.dim {
            return Err(Error::DimensionMismatch {
                expected: out.len() * self.dim,
                got: points.len(),
            });
        }
        let mut session = self.checkout()?;
        // a failed session is dropped (and killed) instead of returned
        session.evaluate(self.dim, points, out, self.timeout)?;
        self.idle.lock().expect("session pool").push(session);
        Ok(())
    }
}

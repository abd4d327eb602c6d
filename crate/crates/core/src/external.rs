//! Line protocol for oracles living in a subprocess.
//!
//! ```text
//! -> HELLO n=<n>          (toolkit)
//! <- HELLO n=<n>          (oracle acknowledges the dimension)
//! -> +1 -1 +1 ...         one request per line, n tokens
//! <- 0.25                 one decimal float per request
//! -> BYE
//! ```
//!
//! Both sides flush after every line. Any malformed reply ends the session.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use crate::cube::SignedPoint;
use crate::error::{Error, Result};

pub(crate) struct ExternalProcess {
    command: String,
    child: Child,
    stdin: Option<ChildStdin>,
    replies: Receiver<std::io::Result<String>>,
    timeout: Duration,
    broken: Option<String>,
}

impl ExternalProcess {
    pub(crate) fn spawn(command: &[String], n: usize, timeout: Duration) -> Result<Self> {
        let (program, args) = command
            .split_first()
            .ok_or_else(|| Error::InvalidArgument("empty external oracle command".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::Oracle {
                request: "<spawn>".into(),
                reason: format!("cannot start `{}`: {e}", command.join(" ")),
            })?;
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, replies) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        let mut process = Self {
            command: command.join(" "),
            stdin: child.stdin.take(),
            child,
            replies,
            timeout,
            broken: None,
        };
        let hello = format!("HELLO n={n}");
        let ack = process.exchange(&hello)?;
        if ack.trim() != hello {
            return Err(process.fail(&hello, format!("expected handshake `{hello}`, got `{ack}`")));
        }
        Ok(process)
    }

    fn fail(&mut self, request: &str, reason: String) -> Error {
        let reason = format!("{reason} (oracle `{}`)", self.command);
        self.broken = Some(reason.clone());
        Error::Oracle {
            request: request.to_string(),
            reason,
        }
    }

    fn exchange(&mut self, request: &str) -> Result<String> {
        if let Some(reason) = &self.broken {
            return Err(Error::Oracle {
                request: request.to_string(),
                reason: format!("session already aborted: {reason}"),
            });
        }
        let written = match self.stdin.as_mut() {
            Some(stdin) => writeln!(stdin, "{request}").and_then(|_| stdin.flush()),
            None => Err(std::io::ErrorKind::BrokenPipe.into()),
        };
        if let Err(e) = written {
            return Err(self.fail(request, format!("write failed: {e}")));
        }
        match self.replies.recv_timeout(self.timeout) {
            Ok(Ok(line)) => Ok(line),
            Ok(Err(e)) => Err(self.fail(request, format!("read failed: {e}"))),
            Err(RecvTimeoutError::Timeout) => {
                Err(self.fail(request, format!("no reply within {:?}", self.timeout)))
            }
            Err(RecvTimeoutError::Disconnected) => {
                Err(self.fail(request, "oracle closed its output before replying".into()))
            }
        }
    }

    pub(crate) fn query(&mut self, x: &SignedPoint) -> Result<f64> {
        let request = x.to_string();
        let reply = self.exchange(&request)?;
        match reply.trim().parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.fail(&request, format!("malformed reply `{reply}`"))),
        }
    }
}

impl Drop for ExternalProcess {
    fn drop(&mut self) {
        if let Some(mut stdin) = self.stdin.take() {
            let _ = writeln!(stdin, "BYE").and_then(|_| stdin.flush());
        }
        let deadline = Instant::now() + Duration::from_millis(500);
        loop {
            match self.child.try_wait() {
                Ok(Some(_)) => return,
                Ok(None) if Instant::now() < deadline => thread::sleep(Duration::from_millis(5)),
                _ => break,
            }
        }
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

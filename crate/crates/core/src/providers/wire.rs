//! Line-delimited JSON protocol for external providers.
//!
//! Each request is one JSON object on its own line and receives exactly one
//! reply line:
//!
//! ```text
//! {"op":"hello"}                                  -> {"dim":384,"name":"..."}
//! {"op":"embed","texts":["..",".."]}               -> {"vectors":[[..],[..]]}
//! {"op":"nli","premise":"..","hypothesis":".."}   -> {"entailment":..,"neutral":..,"contradiction":..}
//! ```
//!
//! Any request may instead be answered with `{"error":"message"}`. The server
//! runs as a child process speaking over stdio or listens on TCP.

use std::io::{self, BufRead, BufReader, Write};
use std::net::TcpStream;
use std::process::{Child, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{EmbeddingProvider, NliProvider, ProviderError, ProviderSpec};
use crate::logic::NliScores;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Request {
    Hello,
    Embed { texts: Vec<String> },
    Nli { premise: String, hypothesis: String },
}

struct Channel {
    writer: Box<dyn Write + Send>,
    replies: Receiver<io::Result<String>>,
    poisoned: bool,
}

/// Client side of the protocol. Requests are serialized; a timed-out
/// connection is unusable afterwards because a late reply would desync it.
pub struct ExternalProvider {
    channel: Mutex<Channel>,
    child: Option<Mutex<Child>>,
    timeout: Duration,
    dim: usize,
    name: String,
}

impl ExternalProvider {
    pub fn connect(spec: &ProviderSpec, timeout: Duration) -> Result<Self, ProviderError> {
        match spec {
            ProviderSpec::Builtin => Err(ProviderError::InvalidInput(
                "the builtin provider is not an external service".into(),
            )),
            ProviderSpec::Command(cmd) => Self::spawn(cmd, timeout),
            ProviderSpec::Tcp(addr) => Self::tcp(addr, timeout),
        }
    }

    /// Runs `command` (whitespace-separated program and arguments) and talks over its stdio.
    pub fn spawn(command: &str, timeout: Duration) -> Result<Self, ProviderError> {
        let mut parts = command.split_whitespace();
        let program = parts
            .next()
            .ok_or_else(|| ProviderError::InvalidInput("empty provider command".into()))?;
        let mut child = Command::new(program)
            .args(parts)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| ProviderError::Unavailable(format!("cannot start {program:?}: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        Self::handshake(Box::new(stdin), stdout, Some(child), timeout)
    }

    pub fn tcp(addr: &str, timeout: Duration) -> Result<Self, ProviderError> {
        let stream = TcpStream::connect(addr)
            .map_err(|e| ProviderError::Unavailable(format!("cannot connect to {addr}: {e}")))?;
        let _ = stream.set_nodelay(true);
        let reader = stream
            .try_clone()
            .map_err(|e| ProviderError::Unavailable(e.to_string()))?;
        Self::handshake(Box::new(stream), reader, None, timeout)
    }

    fn handshake<R: io::Read + Send + 'static>(
        writer: Box<dyn Write + Send>,
        reader: R,
        child: Option<Child>,
        timeout: Duration,
    ) -> Result<Self, ProviderError> {
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(reader).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        let mut provider = Self {
            channel: Mutex::new(Channel {
                writer,
                replies: rx,
                poisoned: false,
            }),
            child: child.map(Mutex::new),
            timeout,
            dim: 0,
            name: String::new(),
        };
        let hello = provider.request(&Request::Hello)?;
        provider.dim = hello
            .get("dim")
            .and_then(Value::as_u64)
            .filter(|&d| d > 0)
            .ok_or_else(|| ProviderError::Protocol("hello reply lacks a positive dim".into()))?
            as usize;
        provider.name = hello
            .get("name")
            .and_then(Value::as_str)
            .unwrap_or("external")
            .to_string();
        Ok(provider)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    fn request(&self, req: &Request) -> Result<Value, ProviderError> {
        let mut ch = self
            .channel
            .lock()
            .map_err(|_| ProviderError::Unavailable("channel lock poisoned".into()))?;
        if ch.poisoned {
            return Err(ProviderError::Unavailable(
                "connection closed after an earlier failure".into(),
            ));
        }
        let mut line = serde_json::to_string(req).expect("request serializes");
        line.push('\n');
        if let Err(e) = ch
            .writer
            .write_all(line.as_bytes())
            .and_then(|_| ch.writer.flush())
        {
            ch.poisoned = true;
            return Err(ProviderError::Unavailable(format!("write failed: {e}")));
        }
        let reply = match ch.replies.recv_timeout(self.timeout) {
            Ok(Ok(reply)) => reply,
            Ok(Err(e)) => {
                ch.poisoned = true;
                return Err(ProviderError::Unavailable(format!("read failed: {e}")));
            }
            Err(RecvTimeoutError::Timeout) => {
                ch.poisoned = true;
                return Err(ProviderError::Timeout(self.timeout.as_millis()));
            }
            Err(RecvTimeoutError::Disconnected) => {
                ch.poisoned = true;
                return Err(ProviderError::Unavailable(
                    "provider closed the connection".into(),
                ));
            }
        };
        drop(ch);
        let value: Value = serde_json::from_str(&reply)
            .map_err(|e| ProviderError::Protocol(format!("malformed reply {reply:?}: {e}")))?;
        if let Some(err) = value.get("error") {
            let msg = err
                .as_str()
                .map(str::to_string)
                .unwrap_or_else(|| err.to_string());
            return Err(ProviderError::Protocol(format!("provider error: {msg}")));
        }
        Ok(value)
    }
}

impl Drop for ExternalProvider {
    fn drop(&mut self) {
        if let Some(child) = &self.child {
            if let Ok(mut c) = child.lock() {
                let _ = c.kill();
                let _ = c.wait();
            }
        }
    }
}

impl EmbeddingProvider for ExternalProvider {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, ProviderError> {
        let reply = self.request(&Request::Embed {
            texts: texts.iter().map(|t| t.to_string()).collect(),
        })?;
        let vectors: Vec<Vec<f64>> =
            serde_json::from_value(reply.get("vectors").cloned().unwrap_or(Value::Null))
                .map_err(|e| ProviderError::Protocol(format!("bad embed reply: {e}")))?;
        if vectors.len() != texts.len() {
            return Err(ProviderError::Protocol(format!(
                "asked for {} vectors, got {}",
                texts.len(),
                vectors.len()
            )));
        }
        for v in &vectors {
            if v.len() != self.dim {
                return Err(ProviderError::DimensionMismatch {
                    expected: self.dim,
                    got: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(ProviderError::Protocol(
                    "non-finite embedding component".into(),
                ));
            }
        }
        Ok(vectors)
    }
}

impl NliProvider for ExternalProvider {
    fn nli(&self, premise: &str, hypothesis: &str) -> Result<NliScores, ProviderError> {
        let reply = self.request(&Request::Nli {
            premise: premise.to_string(),
            hypothesis: hypothesis.to_string(),
        })?;
        let scores: NliScores = serde_json::from_value(reply)
            .map_err(|e| ProviderError::Protocol(format!("bad nli reply: {e}")))?;
        scores
            .validate()
            .map_err(|e| ProviderError::Protocol(e.to_string()))?;
        Ok(scores)
    }
}

/// Serves the protocol until `reader` hits end of input.
pub fn serve<R: BufRead, W: Write>(
    reader: R,
    mut writer: W,
    embedder: &dyn EmbeddingProvider,
    nli: &dyn NliProvider,
    name: &str,
) -> io::Result<()> {
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let reply = match serde_json::from_str::<Request>(&line) {
            Err(e) => json!({ "error": format!("bad request: {e}") }),
            Ok(Request::Hello) => json!({ "dim": embedder.dim(), "name": name }),
            Ok(Request::Embed { texts }) => {
                let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
                match embedder.embed(&refs) {
                    Ok(vectors) => json!({ "vectors": vectors }),
                    Err(e) => json!({ "error": e.to_string() }),
                }
            }
            Ok(Request::Nli {
                premise,
                hypothesis,
            }) => match nli.nli(&premise, &hypothesis) {
                Ok(s) => serde_json::to_value(s).expect("scores serialize"),
                Err(e) => json!({ "error": e.to_string() }),
            },
        };
        serde_json::to_writer(&mut writer, &reply)?;
        writer.write_all(b"\n")?;
        writer.flush()?;
    }
    Ok(())
}

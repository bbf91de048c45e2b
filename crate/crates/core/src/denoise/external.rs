//! A denoiser living in a child process, spoken to over PPDN/1.

use std::io::{BufReader, BufWriter};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use super::protocol::{self, ProtocolError, Response};
use crate::error::{Error, Phase, Result};
use crate::tensor::Image;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

type Reply = std::result::Result<Response, ProtocolError>;

/// Owns one child process. Single-flight: one request at a time.
pub struct ExternalDenoiser {
    command: Vec<String>,
    child: Child,
    stdin: Option<BufWriter<ChildStdin>>,
    replies: Receiver<Reply>,
    reader: Option<JoinHandle<()>>,
    timeout: Duration,
}

impl std::fmt::Debug for ExternalDenoiser {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExternalDenoiser")
            .field("command", &self.command)
            .field("timeout", &self.timeout)
            .finish()
    }
}

impl ExternalDenoiser {
    pub fn spawn(command: &[String], timeout: Duration) -> Result<Self> {
        let (program, args) = command
            .split_first()
            .ok_or_else(|| Error::denoiser(Phase::Spawn, "empty command line"))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::denoiser(Phase::Spawn, format!("{program}: {e}")))?;

        let stdin = child.stdin.take().map(BufWriter::new);
        let stdout = child
            .stdout
            .take()
            .ok_or_else(|| Error::denoiser(Phase::Spawn, "no stdout pipe"))?;
        let (tx, rx) = mpsc::channel();
        let reader = thread::spawn(move || {
            let mut stdout = BufReader::new(stdout);
            loop {
                let reply = protocol::read_response(&mut stdout);
                let stop = reply.is_err();
                if tx.send(reply).is_err() || stop {
                    break;
                }
            }
        });

        Ok(Self {
            command: command.to_vec(),
            child,
            stdin,
            replies: rx,
            reader: Some(reader),
            timeout,
        })
    }

    pub fn command(&self) -> &[String] {
        &self.command
    }

    pub fn denoise(&mut self, img: &Image, sigma255: f64) -> Result<Image> {
        let stdin = self
            .stdin
            .as_mut()
            .ok_or_else(|| Error::denoiser(Phase::WriteRequest, "denoiser already shut down"))?;
        protocol::write_request(stdin, (sigma255 / 255.0) as f32, img)
            .map_err(|e| Error::denoiser(Phase::WriteRequest, e.to_string()))?;

        let reply = match self.replies.recv_timeout(self.timeout) {
            Ok(reply) => reply,
            Err(RecvTimeoutError::Timeout) => {
                let _ = self.child.kill();
                self.stdin = None;
                return Err(Error::denoiser(
                    Phase::Timeout,
                    format!("no response within {:?}", self.timeout),
                ));
            }
            Err(RecvTimeoutError::Disconnected) => {
                return Err(Error::denoiser(Phase::ReadResponse, "child closed its output"))
            }
        };
        match reply {
            Ok(Response::Ok(frame)) => {
                if frame.image.shape() != img.shape() {
                    return Err(Error::denoiser(
                        Phase::Protocol,
                        format!(
                            "response shape {:?} does not match request {:?}",
                            frame.image.shape(),
                            img.shape()
                        ),
                    ));
                }
                Ok(frame.image)
            }
            Ok(Response::Error { status, message }) => Err(Error::denoiser(
                Phase::Remote,
                format!("status {status}: {message}"),
            )),
            Err(ProtocolError::Io(e)) => Err(Error::denoiser(Phase::ReadResponse, e.to_string())),
            Err(ProtocolError::Malformed(m)) => Err(Error::denoiser(Phase::Protocol, m)),
        }
    }
}

impl Drop for ExternalDenoiser {
    fn drop(&mut self) {
        // Closing stdin is the shutdown signal.
        self.stdin = None;
        let deadline = Instant::now() + Duration::from_secs(2);
        loop {
            match self.child.try_wait() {
                Ok(Some(_)) => break,
                Ok(None) if Instant::now() < deadline => thread::sleep(Duration::from_millis(10)),
                _ => {
                    let _ = self.child.kill();
                    let _ = self.child.wait();
                    break;
                }
            }
        }
        if let Some(reader) = self.reader.take() {
            let _ = reader.join();
        }
    }
}

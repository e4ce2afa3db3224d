//! Trajectory files: raw little-endian f64 frames (u then v, index
//! i·n_θ + j) in one file, described by a JSON manifest.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::sync::mpsc::{sync_channel, SyncSender};
use std::thread::JoinHandle;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{hex, CODE_VERSION};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::simulator::{Field, Frame, InitialHistory, PolarGrid, Scheme, Trajectory};

pub const FRAMES_FILE: &str = "frames.f64";
pub const MANIFEST_FILE: &str = "trajectory.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub n_r: usize,
    pub n_theta: usize,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryManifest {
    pub format: String,
    pub grid: GridInfo,
    pub dt: f64,
    pub steps: Vec<i64>,
    pub times: Vec<f64>,
    pub params: ModelParams,
    pub seed: u64,
    pub scheme: Scheme,
    pub history: InitialHistory,
    pub code_version: String,
    pub frames_file: String,
    pub bytes: u64,
    pub sha256: String,
}

/// What the writer thread reports back.
#[derive(Debug, Clone)]
pub struct WrittenFrames {
    pub steps: Vec<i64>,
    pub times: Vec<f64>,
    pub bytes: u64,
    pub sha256: String,
}

/// Background writer fed through a bounded queue.
pub struct FrameWriter {
    tx: Option<SyncSender<Frame>>,
    handle: Option<JoinHandle<Result<WrittenFrames>>>,
}

impl FrameWriter {
    pub fn spawn(path: &Path, capacity: usize) -> Result<Self> {
        let file = File::create(path)?;
        let (tx, rx) = sync_channel::<Frame>(capacity);
        let handle = std::thread::spawn(move || -> Result<WrittenFrames> {
            let mut out = BufWriter::new(file);
            let mut hasher = Sha256::new();
            let mut written = WrittenFrames { steps: Vec::new(), times: Vec::new(), bytes: 0, sha256: String::new() };
            let mut buf = Vec::new();
            for frame in rx {
                buf.clear();
                for x in frame.field.u.iter().chain(&frame.field.v) {
                    buf.extend_from_slice(&x.to_le_bytes());
                }
                out.write_all(&buf)?;
                hasher.update(&buf);
                written.bytes += buf.len() as u64;
                written.steps.push(frame.step);
                written.times.push(frame.time);
            }
            out.flush()?;
            written.sha256 = hex(&hasher.finalize());
            Ok(written)
        });
        Ok(Self { tx: Some(tx), handle: Some(handle) })
    }

    pub fn send(&self, frame: Frame) -> Result<()> {
        self.tx
            .as_ref()
            .expect("writer open")
            .send(frame)
            .map_err(|_| Error::Io(std::io::Error::other("frame writer stopped")))
    }

    pub fn finish(mut self) -> Result<WrittenFrames> {
        drop(self.tx.take());
        self.handle.take().expect("writer open").join().map_err(|_| Error::Io(std::io::Error::other("frame writer panicked")))?
    }
}

impl TrajectoryManifest {
    pub fn new(
        grid: &PolarGrid,
        dt: f64,
        params: ModelParams,
        seed: u64,
        scheme: Scheme,
        history: InitialHistory,
        written: WrittenFrames,
    ) -> Self {
        Self {
            format: "f64-le; per frame u then v; index i*n_theta + j (r-major)".into(),
            grid: GridInfo { n_r: grid.n_r, n_theta: grid.n_theta, radius: grid.radius },
            dt,
            steps: written.steps,
            times: written.times,
            params,
            seed,
            scheme,
            history,
            code_version: CODE_VERSION.into(),
            frames_file: FRAMES_FILE.into(),
            bytes: written.bytes,
            sha256: written.sha256,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// Reads a trajectory given its manifest path, verifying the checksum.
pub fn read_trajectory(manifest_path: &Path) -> Result<(TrajectoryManifest, Trajectory)> {
    let m = TrajectoryManifest::load(manifest_path)?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let mut bytes = Vec::new();
    File::open(dir.join(&m.frames_file))?.read_to_end(&mut bytes)?;
    let digest = hex(&Sha256::digest(&bytes));
    if digest != m.sha256 {
        return Err(Error::Config(format!("frame file checksum {digest} does not match manifest {}", m.sha256)));
    }
    let grid = PolarGrid::new(m.grid.n_r, m.grid.n_theta, m.grid.radius)?;
    let len = grid.len();
    if bytes.len() != m.times.len() * 2 * len * 8 {
        return Err(Error::GridMismatch(format!(
            "frame file holds {} bytes, expected {} frames of {} cells",
            bytes.len(),
            m.times.len(),
            len
        )));
    }
    let values: Vec<f64> = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let frames = values
        .chunks_exact(2 * len)
        .zip(m.steps.iter().zip(&m.times))
        .map(|(chunk, (&step, &time))| Frame {
            step,
            time,
            field: Field { u: chunk[..len].to_vec(), v: chunk[len..].to_vec() },
        })
        .collect();
    let traj = Trajectory { grid, dt: m.dt, frames };
    Ok((m, traj))
}

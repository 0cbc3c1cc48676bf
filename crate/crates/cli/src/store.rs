//! Binary kernel cache and field checkpoints.
//!
//! Both files are a fixed little-endian header followed by raw `f64`s:
//!
//! ```text
//! magic [u8; 8] | version u32 | kind-specific header | count u64 | count × f64
//! ```
//!
//! Kernel tables (`LANDAUKT`): quadrature version `u32`, `n u64`, `L f64`,
//! `γ f64`, components `u64`, then the component-major padded samples.
//! Checkpoints (`LANDAUCP`): `n u64`, `L f64`, `t f64`, then the field in
//! grid order. A checkpoint has a JSON sidecar with the configuration and `t`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use landau_core::kernel::{Component, QUADRATURE_VERSION};
use landau_core::{Gamma, KernelTables, ScalarField, SimulationConfig, VelocityGrid};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const FORMAT_VERSION: u32 = 1;
const KERNEL_MAGIC: &[u8; 8] = b"LANDAUKT";
const CHECKPOINT_MAGIC: &[u8; 8] = b"LANDAUCP";

struct Cursor<'a> {
    path: &'a Path,
    reader: BufReader<File>,
}

impl Cursor<'_> {
    fn bytes<const N: usize>(&mut self) -> CliResult<[u8; N]> {
        let mut buf = [0u8; N];
        self.reader.read_exact(&mut buf).map_err(|e| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                CliError::format(self.path, "truncated")
            } else {
                CliError::io(self.path, e)
            }
        })?;
        Ok(buf)
    }
    fn u32(&mut self) -> CliResult<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }
    fn u64(&mut self) -> CliResult<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }
    fn f64(&mut self) -> CliResult<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
    fn doubles(&mut self, count: usize) -> CliResult<Vec<f64>> {
        (0..count).map(|_| self.f64()).collect()
    }
    fn expect_end(&mut self) -> CliResult<()> {
        let mut extra = [0u8; 1];
        match self.reader.read(&mut extra) {
            Ok(0) => Ok(()),
            Ok(_) => Err(CliError::format(self.path, "trailing bytes")),
            Err(e) => Err(CliError::io(self.path, e)),
        }
    }
}

fn open<'a>(path: &'a Path, magic: &[u8; 8]) -> CliResult<Cursor<'a>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut cur = Cursor {
        path,
        reader: BufReader::new(file),
    };
    if &cur.bytes::<8>()? != magic {
        return Err(CliError::format(path, "bad magic"));
    }
    let version = cur.u32()?;
    if version != FORMAT_VERSION {
        return Err(CliError::format(path, format!("unsupported version {version}")));
    }
    Ok(cur)
}

fn write_all(path: &Path, header: &[u8], data: &[&[f64]]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let tmp = path.with_extension("tmp");
    let file = File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
    let mut w = BufWriter::new(file);
    let count: usize = data.iter().map(|d| d.len()).sum();
    let write = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        w.write_all(header)?;
        w.write_all(&(count as u64).to_le_bytes())?;
        for chunk in data {
            for x in chunk.iter() {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        w.flush()
    };
    write(&mut w).map_err(|e| CliError::io(&tmp, e))?;
    drop(w);
    std::fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

/// File name keyed on the exact bits of `(n, L, γ)` and the quadrature version.
pub fn kernel_cache_path(dir: &Path, grid: &VelocityGrid, gamma: Gamma) -> PathBuf {
    dir.join(format!(
        "kernels_n{}_L{:016x}_g{:016x}_q{}.bin",
        grid.n(),
        grid.half_width().to_bits(),
        gamma.value().to_bits(),
        QUADRATURE_VERSION
    ))
}

pub fn write_kernel_tables(tables: &KernelTables, path: &Path) -> CliResult<()> {
    let mut header = Vec::new();
    header.extend_from_slice(KERNEL_MAGIC);
    header.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    header.extend_from_slice(&QUADRATURE_VERSION.to_le_bytes());
    header.extend_from_slice(&(tables.grid().n() as u64).to_le_bytes());
    header.extend_from_slice(&tables.grid().half_width().to_le_bytes());
    header.extend_from_slice(&tables.gamma().value().to_le_bytes());
    header.extend_from_slice(&(Component::COUNT as u64).to_le_bytes());
    let data: Vec<&[f64]> = tables.all_samples().iter().map(Vec::as_slice).collect();
    write_all(path, &header, &data)
}

pub fn read_kernel_tables(path: &Path) -> CliResult<KernelTables> {
    let mut cur = open(path, KERNEL_MAGIC)?;
    let quad = cur.u32()?;
    if quad != QUADRATURE_VERSION {
        return Err(CliError::format(path, format!("quadrature version {quad}, expected {QUADRATURE_VERSION}")));
    }
    let n = cur.u64()? as usize;
    let l = cur.f64()?;
    let gamma = cur.f64()?;
    let comps = cur.u64()? as usize;
    let count = cur.u64()? as usize;
    let grid = VelocityGrid::new(n, l).map_err(|e| CliError::format(path, e.to_string()))?;
    let gamma = Gamma::new(gamma).map_err(|e| CliError::format(path, e.to_string()))?;
    let per = 8 * n * n * n;
    if comps != Component::COUNT || count != comps * per {
        return Err(CliError::format(path, "sample count does not match header"));
    }
    let samples = (0..comps).map(|_| cur.doubles(per)).collect::<CliResult<Vec<_>>>()?;
    cur.expect_end()?;
    KernelTables::from_samples(grid, gamma, samples).map_err(|e| CliError::format(path, e.to_string()))
}

/// Cached tables for `(grid, γ)`, built and stored on a miss.
pub fn load_or_build_tables(dir: &Path, grid: VelocityGrid, gamma: Gamma) -> CliResult<KernelTables> {
    let path = kernel_cache_path(dir, &grid, gamma);
    if path.exists() {
        match read_kernel_tables(&path) {
            Ok(t) if t.matches(&grid) && t.gamma() == gamma => {
                log::info!("kernel tables loaded from {}", path.display());
                return Ok(t);
            }
            Ok(_) => log::warn!("{} holds other parameters; rebuilding", path.display()),
            Err(e) => log::warn!("ignoring unreadable cache: {e}"),
        }
    }
    let tables = KernelTables::build(grid, gamma)?;
    write_kernel_tables(&tables, &path)?;
    log::info!("kernel tables written to {}", path.display());
    Ok(tables)
}

/// JSON sidecar of a checkpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub format_version: u32,
    pub t: f64,
    pub config: SimulationConfig,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn write_checkpoint(f: &ScalarField, t: f64, config: &SimulationConfig, path: &Path) -> CliResult<()> {
    let grid = f.grid();
    let mut header = Vec::new();
    header.extend_from_slice(CHECKPOINT_MAGIC);
    header.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    header.extend_from_slice(&(grid.n() as u64).to_le_bytes());
    header.extend_from_slice(&grid.half_width().to_le_bytes());
    header.extend_from_slice(&t.to_le_bytes());
    write_all(path, &header, &[f.values()])?;
    let meta = CheckpointMeta {
        format_version: FORMAT_VERSION,
        t,
        config: config.clone(),
    };
    let side = sidecar_path(path);
    let text = serde_json::to_string_pretty(&meta).map_err(|e| CliError::format(&side, e.to_string()))?;
    std::fs::write(&side, text).map_err(|e| CliError::io(&side, e))
}

/// Field and time; the sidecar is read when present.
pub fn read_checkpoint(path: &Path) -> CliResult<(ScalarField, f64, Option<CheckpointMeta>)> {
    let mut cur = open(path, CHECKPOINT_MAGIC)?;
    let n = cur.u64()? as usize;
    let l = cur.f64()?;
    let t = cur.f64()?;
    let count = cur.u64()? as usize;
    let grid = VelocityGrid::new(n, l).map_err(|e| CliError::format(path, e.to_string()))?;
    if count != grid.len() {
        return Err(CliError::format(path, "value count does not match n³"));
    }
    let values = cur.doubles(count)?;
    cur.expect_end()?;
    let field = ScalarField::from_values(grid, values).map_err(|e| CliError::format(path, e.to_string()))?;
    let side = sidecar_path(path);
    let meta = if side.exists() {
        let text = std::fs::read_to_string(&side).map_err(|e| CliError::io(&side, e))?;
        Some(serde_json::from_str(&text).map_err(|e| CliError::format(&side, e.to_string()))?)
    } else {
        None
    };
    Ok((field, t, meta))
}

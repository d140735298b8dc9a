//! File formats: binary fibre realizations (`FFR1`), binary channel
//! estimates (`FCE1`), and the CSV exports consumed by plotting tools.
//!
//! All binary values are little-endian. CSV files use `.` decimals, `,`
//! separators, one header row and LF line endings.

use num_complex::Complex64;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::estimation::{FadingMap, StdvProfile};
use crate::fiber::{FiberRealization, Segment};
use crate::interrogation::{ChannelEstimate, Scheme};
use crate::jones::{JonesMatrix, StokesVector};

const FIBER_MAGIC: &[u8; 4] = b"FFR1";
const ESTIMATE_MAGIC: &[u8; 4] = b"FCE1";

fn write_f64<W: Write>(w: &mut W, v: f64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn write_u32<W: Write>(w: &mut W, v: u32) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

/// Persist a fibre realization.
///
/// Layout: magic `FFR1`, `N: u32`, `L_s: f64`, `seed: u64`, then per segment
/// the four unitary entries row-major as re/im `f64` pairs, the complex
/// phasor, and the attenuation.
pub fn write_fiber(path: &Path, fib: &FiberRealization) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(FIBER_MAGIC)?;
    write_u32(&mut w, fib.segments.len() as u32)?;
    write_f64(&mut w, fib.segment_length_m)?;
    w.write_all(&fib.seed.to_le_bytes())?;
    for seg in &fib.segments {
        for c in [
            seg.unitary.xx,
            seg.unitary.xy,
            seg.unitary.yx,
            seg.unitary.yy,
        ] {
            write_f64(&mut w, c.re)?;
            write_f64(&mut w, c.im)?;
        }
        write_f64(&mut w, seg.phasor.re)?;
        write_f64(&mut w, seg.phasor.im)?;
        write_f64(&mut w, seg.attenuation)?;
    }
    w.flush()?;
    Ok(())
}

/// Load a fibre realization written by [`write_fiber`].
///
/// The polarization parameter triples are not part of the format; the
/// returned realization carries only the matrices.
pub fn read_fiber(path: &Path) -> Result<FiberRealization> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != FIBER_MAGIC {
        return Err(Error::Format(format!(
            "{}: bad magic, expected FFR1",
            path.display()
        )));
    }
    let n = read_u32(&mut r)? as usize;
    let segment_length_m = read_f64(&mut r)?;
    let seed = read_u64(&mut r)?;
    let mut segments = Vec::with_capacity(n);
    for _ in 0..n {
        let mut entries = [Complex64::default(); 4];
        for e in entries.iter_mut() {
            let re = read_f64(&mut r)?;
            let im = read_f64(&mut r)?;
            *e = Complex64::new(re, im);
        }
        let phasor = Complex64::new(read_f64(&mut r)?, read_f64(&mut r)?);
        let attenuation = read_f64(&mut r)?;
        segments.push(Segment {
            unitary: JonesMatrix::new(entries[0], entries[1], entries[2], entries[3]),
            phasor,
            attenuation,
        });
    }
    Ok(FiberRealization {
        segments,
        params: Vec::new(),
        segment_length_m,
        seed,
    })
}

fn scheme_code(scheme: Scheme) -> u8 {
    match scheme {
        Scheme::Siso => 0,
        Scheme::Simo => 1,
        Scheme::Miso => 2,
        Scheme::Mimo => 3,
    }
}

fn scheme_from_code(code: u8) -> Result<Scheme> {
    Ok(match code {
        0 => Scheme::Siso,
        1 => Scheme::Simo,
        2 => Scheme::Miso,
        3 => Scheme::Mimo,
        other => return Err(Error::Format(format!("unknown scheme code {other}"))),
    })
}

/// Persist a channel estimate.
///
/// Layout: magic `FCE1`, `scheme: u8`, `frames: u32`, `segments: u32`,
/// `frame_period: f64`, then frame-major complex `f32` entries.
pub fn write_channel_estimate(path: &Path, est: &ChannelEstimate) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(ESTIMATE_MAGIC)?;
    w.write_all(&[scheme_code(est.scheme)])?;
    write_u32(&mut w, est.frames)?;
    write_u32(&mut w, est.segments)?;
    write_f64(&mut w, est.frame_period_s)?;
    for c in &est.entries {
        w.write_all(&(c.re as f32).to_le_bytes())?;
        w.write_all(&(c.im as f32).to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Load a channel estimate written by [`write_channel_estimate`].
///
/// The segment spacing is not part of the format and must be supplied for
/// distance bookkeeping.
pub fn read_channel_estimate(path: &Path, segment_length_m: f64) -> Result<ChannelEstimate> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != ESTIMATE_MAGIC {
        return Err(Error::Format(format!(
            "{}: bad magic, expected FCE1",
            path.display()
        )));
    }
    let mut code = [0u8; 1];
    r.read_exact(&mut code)?;
    let scheme = scheme_from_code(code[0])?;
    let frames = read_u32(&mut r)?;
    let segments = read_u32(&mut r)?;
    let frame_period_s = read_f64(&mut r)?;
    let count = frames as usize * segments as usize * scheme.entries_per_segment();
    let mut entries = Vec::with_capacity(count);
    let mut buf = [0u8; 4];
    for _ in 0..count {
        r.read_exact(&mut buf)?;
        let re = f32::from_le_bytes(buf) as f64;
        r.read_exact(&mut buf)?;
        let im = f32::from_le_bytes(buf) as f64;
        entries.push(Complex64::new(re, im));
    }
    Ok(ChannelEstimate {
        scheme,
        frames,
        segments,
        frame_period_s,
        segment_length_m,
        entries,
    })
}

/// Per-segment phasor summary of a realization.
pub fn write_fiber_csv(path: &Path, fib: &FiberRealization) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "segment_index,distance_m,phasor_abs,phasor_phase_rad,attenuation"
    )?;
    for (i, seg) in fib.segments.iter().enumerate() {
        writeln!(
            w,
            "{},{},{},{},{}",
            i,
            fib.distance_m(i),
            seg.phasor.norm(),
            seg.phasor.arg(),
            seg.attenuation
        )?;
    }
    w.flush()?;
    Ok(())
}

/// StDv/SNR profile rows: `segment_index,distance_m,stdv_rad,snr_db,flagged_fraction`.
pub fn write_stdv_csv(path: &Path, profile: &StdvProfile) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "segment_index,distance_m,stdv_rad,snr_db,flagged_fraction")?;
    for i in 0..profile.stdv_rad.len() {
        writeln!(
            w,
            "{},{},{},{},{}",
            i,
            profile.distance_m(i),
            profile.stdv_rad[i],
            profile.snr_db[i],
            profile.flagged_fraction[i]
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Fading-coefficient grid with the column parameter values in the header
/// row and the row parameter value leading each line.
pub fn write_fading_map_csv(path: &Path, map: &FadingMap) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "row_param")?;
    for v in &map.col_values {
        write!(w, ",{v}")?;
    }
    writeln!(w)?;
    for (rv, line) in map.row_values.iter().zip(&map.magnitude) {
        write!(w, "{rv}")?;
        for v in line {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

/// Stokes trajectory rows: `segment_index,s0,s1,s2,s3`.
pub fn write_stokes_csv(path: &Path, trajectory: &[StokesVector]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "segment_index,s0,s1,s2,s3")?;
    for (i, s) in trajectory.iter().enumerate() {
        writeln!(w, "{},{},{},{},{}", i, s.s0, s.s1, s.s2, s.s3)?;
    }
    w.flush()?;
    Ok(())
}

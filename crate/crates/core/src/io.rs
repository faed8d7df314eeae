//! Binary ball-file format and CSV exports.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! offset  size  field
//! 0       4     magic "BLC1"
//! 4       2     endianness marker 0x0102 (bytes 02 01 on disk)
//! 6       1     kind: 0 = coeffs, 1 = samples, 2 = mask
//! 7       1     reality flag (0/1)
//! 8       4     L (u32)
//! 12      4     P (u32)
//! 16      4     spin (i32)
//! 20      8     tau (f64)
//! 28      8     payload word count (u64, 64-bit words)
//! 36      ...   payload
//! ```
//!
//! Payloads: coefficient files hold complex values as interleaved re/im f64
//! pairs; sample files hold plain f64 values when the reality flag is set and
//! interleaved pairs otherwise; mask files hold three extra header words
//! (fraction f64, seed u64, entry count u64) followed by bit-packed u64
//! words. Every reader validates magic, endianness, kind, and payload size
//! before touching the data.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_complex::Complex64;

use crate::ball::{BallBandProfile, BallCoeffs, BallPlan, BallSamples};
use crate::error::{Error, FormatError, Result};
use crate::ops::Mask;
use crate::uq::IntervalReport;

const MAGIC: &[u8; 4] = b"BLC1";
const ENDIAN_MARK: u16 = 0x0102;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileKind {
    Coeffs = 0,
    Samples = 1,
    Mask = 2,
}

impl FileKind {
    fn name(self) -> &'static str {
        match self {
            FileKind::Coeffs => "coeffs",
            FileKind::Samples => "samples",
            FileKind::Mask => "mask",
        }
    }

    fn from_tag(tag: u8) -> std::result::Result<Self, FormatError> {
        match tag {
            0 => Ok(FileKind::Coeffs),
            1 => Ok(FileKind::Samples),
            2 => Ok(FileKind::Mask),
            other => Err(FormatError::UnknownKind(other)),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Header {
    pub kind: FileKind,
    pub reality: bool,
    pub profile: BallBandProfile,
    pub word_count: u64,
}

fn write_header<W: Write>(w: &mut W, header: &Header) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_u16::<LittleEndian>(ENDIAN_MARK)?;
    w.write_u8(header.kind as u8)?;
    w.write_u8(header.reality as u8)?;
    w.write_u32::<LittleEndian>(header.profile.l as u32)?;
    w.write_u32::<LittleEndian>(header.profile.p as u32)?;
    w.write_i32::<LittleEndian>(header.profile.spin)?;
    w.write_f64::<LittleEndian>(header.profile.tau)?;
    w.write_u64::<LittleEndian>(header.word_count)?;
    Ok(())
}

fn read_header<R: Read>(r: &mut R) -> Result<Header> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(FormatError::BadMagic.into());
    }
    let mark = r.read_u16::<LittleEndian>()?;
    if mark != ENDIAN_MARK {
        return Err(FormatError::Endianness.into());
    }
    let kind = FileKind::from_tag(r.read_u8()?)?;
    let reality = r.read_u8()? != 0;
    let l = r.read_u32::<LittleEndian>()? as usize;
    let p = r.read_u32::<LittleEndian>()? as usize;
    let spin = r.read_i32::<LittleEndian>()?;
    let tau = r.read_f64::<LittleEndian>()?;
    let word_count = r.read_u64::<LittleEndian>()?;
    let profile = BallBandProfile::new(l, p, spin, tau)
        .map_err(|e| FormatError::Header(e.to_string()))?;
    Ok(Header {
        kind,
        reality,
        profile,
        word_count,
    })
}

/// Read the remaining payload as exactly `count` 64-bit words, rejecting
/// truncated or oversized files.
fn read_words<R: Read>(r: &mut R, count: u64) -> Result<Vec<u64>> {
    let mut words = Vec::with_capacity(count as usize);
    for _ in 0..count {
        match r.read_u64::<LittleEndian>() {
            Ok(w) => words.push(w),
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => {
                return Err(FormatError::SizeMismatch {
                    declared: count,
                    actual: words.len() as u64,
                }
                .into())
            }
            Err(e) => return Err(e.into()),
        }
    }
    let mut probe = [0u8; 1];
    match r.read(&mut probe)? {
        0 => Ok(words),
        _ => Err(FormatError::SizeMismatch {
            declared: count,
            actual: count + 1,
        }
        .into()),
    }
}

pub fn write_samples(path: &Path, samples: &BallSamples) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let n = samples.values.len() as u64;
    let header = Header {
        kind: FileKind::Samples,
        reality: samples.reality,
        profile: samples.plan.profile(),
        word_count: if samples.reality { n } else { 2 * n },
    };
    write_header(&mut w, &header)?;
    for v in &samples.values {
        w.write_f64::<LittleEndian>(v.re)?;
        if !samples.reality {
            w.write_f64::<LittleEndian>(v.im)?;
        }
    }
    Ok(())
}

pub fn read_samples(path: &Path) -> Result<BallSamples> {
    let mut r = BufReader::new(File::open(path)?);
    let header = read_header(&mut r)?;
    if header.kind != FileKind::Samples {
        return Err(FormatError::KindMismatch {
            expected: FileKind::Samples.name(),
            found: header.kind.name(),
        }
        .into());
    }
    let plan = BallPlan::build(header.profile)?;
    let n = plan.n_samples() as u64;
    let expect = if header.reality { n } else { 2 * n };
    if header.word_count != expect {
        return Err(FormatError::Header(format!(
            "payload count {} does not match the profile ({} expected)",
            header.word_count, expect
        ))
        .into());
    }
    let words = read_words(&mut r, header.word_count)?;
    let values: Vec<Complex64> = if header.reality {
        words
            .iter()
            .map(|&w| Complex64::new(f64::from_bits(w), 0.0))
            .collect()
    } else {
        words
            .chunks(2)
            .map(|c| Complex64::new(f64::from_bits(c[0]), f64::from_bits(c[1])))
            .collect()
    };
    Ok(BallSamples {
        plan,
        values,
        reality: header.reality,
    })
}

pub fn write_coeffs(path: &Path, coeffs: &BallCoeffs) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let header = Header {
        kind: FileKind::Coeffs,
        reality: false,
        profile: coeffs.plan.profile(),
        word_count: 2 * coeffs.values.len() as u64,
    };
    write_header(&mut w, &header)?;
    for v in &coeffs.values {
        w.write_f64::<LittleEndian>(v.re)?;
        w.write_f64::<LittleEndian>(v.im)?;
    }
    Ok(())
}

pub fn read_coeffs(path: &Path) -> Result<BallCoeffs> {
    let mut r = BufReader::new(File::open(path)?);
    let header = read_header(&mut r)?;
    if header.kind != FileKind::Coeffs {
        return Err(FormatError::KindMismatch {
            expected: FileKind::Coeffs.name(),
            found: header.kind.name(),
        }
        .into());
    }
    let plan = BallPlan::build(header.profile)?;
    let expect = 2 * plan.n_coeffs() as u64;
    if header.word_count != expect {
        return Err(FormatError::Header(format!(
            "payload count {} does not match the profile ({expect} expected)",
            header.word_count
        ))
        .into());
    }
    let words = read_words(&mut r, header.word_count)?;
    let values = words
        .chunks(2)
        .map(|c| Complex64::new(f64::from_bits(c[0]), f64::from_bits(c[1])))
        .collect();
    Ok(BallCoeffs { plan, values })
}

/// Mask payload: fraction (f64 bits), seed, entry count, then bit-packed keep
/// flags, 64 per word.
pub fn write_mask(path: &Path, mask: &Mask, profile: BallBandProfile) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let n = mask.len() as u64;
    let n_words = n.div_ceil(64);
    let header = Header {
        kind: FileKind::Mask,
        reality: false,
        profile,
        word_count: 3 + n_words,
    };
    write_header(&mut w, &header)?;
    w.write_f64::<LittleEndian>(mask.fraction)?;
    w.write_u64::<LittleEndian>(mask.seed)?;
    w.write_u64::<LittleEndian>(n)?;
    for chunk in mask.keep().chunks(64) {
        let mut word = 0u64;
        for (bit, &k) in chunk.iter().enumerate() {
            if k {
                word |= 1u64 << bit;
            }
        }
        w.write_u64::<LittleEndian>(word)?;
    }
    Ok(())
}

pub fn read_mask(path: &Path) -> Result<(Mask, BallBandProfile)> {
    let mut r = BufReader::new(File::open(path)?);
    let header = read_header(&mut r)?;
    if header.kind != FileKind::Mask {
        return Err(FormatError::KindMismatch {
            expected: FileKind::Mask.name(),
            found: header.kind.name(),
        }
        .into());
    }
    let words = read_words(&mut r, header.word_count)?;
    if words.len() < 3 {
        return Err(FormatError::Header("mask payload shorter than its preamble".into()).into());
    }
    let fraction = f64::from_bits(words[0]);
    let seed = words[1];
    let n = words[2] as usize;
    let n_words = (n as u64).div_ceil(64);
    if header.word_count != 3 + n_words {
        return Err(FormatError::SizeMismatch {
            declared: header.word_count,
            actual: 3 + n_words,
        }
        .into());
    }
    let mut keep = vec![false; n];
    for (i, flag) in keep.iter_mut().enumerate() {
        let word = words[3 + i / 64];
        *flag = (word >> (i % 64)) & 1 == 1;
    }
    Ok((Mask::from_keep(keep, fraction, seed), header.profile))
}

/// Peek at a file's kind without loading the payload.
pub fn peek_kind(path: &Path) -> Result<FileKind> {
    let mut r = BufReader::new(File::open(path)?);
    Ok(read_header(&mut r)?.kind)
}

// ---------------------------------------------------------------------------
// CSV exports
// ---------------------------------------------------------------------------

/// Convergence trace rows: iteration, objective, step, lambda.
pub fn write_trace_csv(
    path: &Path,
    trace: &[f64],
    step: f64,
    lambda: f64,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "iteration,objective,step,lambda")?;
    for (i, h) in trace.iter().enumerate() {
        writeln!(w, "{i},{h:.17e},{step:.17e},{lambda:.17e}")?;
    }
    Ok(())
}

/// One spherical shell at radial node `p` as rows (theta, phi, value).
pub fn write_slice_csv(path: &Path, samples: &BallSamples, p: usize) -> Result<()> {
    let plan = &samples.plan;
    if p >= plan.profile().p {
        return Err(Error::InvalidArg(format!(
            "slice node {p} outside the radial grid (P = {})",
            plan.profile().p
        )));
    }
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "theta,phi,value")?;
    for (t, &theta) in plan.sphere().thetas().iter().enumerate() {
        for (f, &phi) in plan.sphere().phis().iter().enumerate() {
            let v = samples.values[plan.sample_index(p, t, f)];
            writeln!(w, "{theta:.17e},{phi:.17e},{:.17e}", v.re)?;
        }
    }
    Ok(())
}

/// Local credible intervals as rows (region, lower, upper, width).
pub fn write_lci_csv(path: &Path, reports: &[IntervalReport]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "region,lower,upper,width")?;
    for r in reports {
        writeln!(
            w,
            "\"{}\",{:.17e},{:.17e},{:.17e}",
            r.region_label, r.lower, r.upper, r.width
        )?;
    }
    Ok(())
}

/// Rebuild the plan referenced by a samples file without keeping the data.
pub fn read_profile(path: &Path) -> Result<(BallBandProfile, Arc<BallPlan>)> {
    let mut r = BufReader::new(File::open(path)?);
    let header = read_header(&mut r)?;
    let plan = BallPlan::build(header.profile)?;
    Ok((header.profile, plan))
}

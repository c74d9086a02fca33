//! Ground-motion records: parsing, integration to velocity and
//! displacement, peak values, elastic response spectra and Froude time
//! scaling.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ScaleModel;
use crate::par::{self, Exec};

/// Acceleration of one `g` in records that declare units of g.
pub const G_UNIT: f64 = 9.81;

/// Tolerated jitter between successive time stamps of a two-column record.
pub const DT_JITTER: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordFormat {
    /// `time, acceleration` rows.
    TwoColumnCsv,
    /// `dt = ...` header followed by one acceleration value per line.
    SingleColumnWithDtHeader,
    /// PEER NGA `.AT2` layout: four header lines, then values in rows.
    PeerFixedWidth,
}

impl std::str::FromStr for RecordFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" | "two_column_csv" => Ok(Self::TwoColumnCsv),
            "single" | "single_column" | "single_column_with_dt_header" => {
                Ok(Self::SingleColumnWithDtHeader)
            }
            "peer" | "at2" | "peer_fixed_width" => Ok(Self::PeerFixedWidth),
            other => Err(Error::Config(format!("unknown record format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    G,
    MetersPerSecondSquared,
}

impl Units {
    pub fn to_si(self) -> f64 {
        match self {
            Units::G => G_UNIT,
            Units::MetersPerSecondSquared => 1.0,
        }
    }

    fn parse(text: &str) -> Option<Units> {
        let t = text.trim().to_ascii_lowercase();
        match t.as_str() {
            "g" => Some(Units::G),
            "m/s2" | "m/s^2" | "m/s/s" | "m/s²" | "mps2" => Some(Units::MetersPerSecondSquared),
            _ => None,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Units::G => "g",
            Units::MetersPerSecondSquared => "m/s2",
        }
    }
}

/// Uniformly sampled horizontal acceleration history, m/s².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundMotion {
    pub name: String,
    pub dt: f64,
    pub accel: Vec<f64>,
}

impl GroundMotion {
    pub fn new(name: impl Into<String>, dt: f64, accel: Vec<f64>) -> Result<Self> {
        let gm = Self {
            name: name.into(),
            dt,
            accel,
        };
        gm.check()?;
        Ok(gm)
    }

    fn check(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidInput(format!("dt must be > 0, got {}", self.dt)));
        }
        if self.accel.is_empty() {
            return Err(Error::InvalidInput("empty record".into()));
        }
        if let Some(i) = self.accel.iter().position(|a| !a.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite sample at index {i}")));
        }
        Ok(())
    }

    /// All-zero record.
    pub fn zeros(name: impl Into<String>, dt: f64, len: usize) -> Self {
        Self {
            name: name.into(),
            dt,
            accel: vec![0.0; len.max(1)],
        }
    }

    /// `amplitude * sin(2 pi f t)` sampled at `dt` for `duration` seconds.
    pub fn sine(name: impl Into<String>, amplitude: f64, frequency: f64, dt: f64, duration: f64) -> Self {
        let n = (duration / dt).round() as usize + 1;
        let w = 2.0 * std::f64::consts::PI * frequency;
        Self {
            name: name.into(),
            dt,
            accel: (0..n).map(|k| amplitude * (w * k as f64 * dt).sin()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.accel.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accel.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.dt * (self.accel.len().saturating_sub(1)) as f64
    }

    /// Linear interpolation at time `t`; zero outside the record.
    pub fn at(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        let x = t / self.dt;
        let i = x.floor() as usize;
        if i + 1 >= self.accel.len() {
            return if i + 1 == self.accel.len() && (x - i as f64) < 1e-9 {
                self.accel[i]
            } else {
                0.0
            };
        }
        let f = x - i as f64;
        self.accel[i] * (1.0 - f) + self.accel[i + 1] * f
    }

    /// The record multiplied by `factor`.
    pub fn scaled_amplitude(&self, factor: f64) -> Self {
        Self {
            name: self.name.clone(),
            dt: self.dt,
            accel: self.accel.iter().map(|a| a * factor).collect(),
        }
    }
}

/// A parsed record plus what is needed to write it back in its own format.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedRecord {
    pub motion: GroundMotion,
    pub format: RecordFormat,
    pub units: Units,
    /// Free-text header lines carried through (PEER title lines).
    pub header: Vec<String>,
}

fn parse_err(row: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        row,
        message: message.into(),
    }
}

fn parse_f64(tok: &str, row: usize) -> Result<f64> {
    let v: f64 = tok
        .trim()
        .parse()
        .map_err(|_| parse_err(row, format!("not a number: {tok:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(row, format!("non-finite value {tok:?}")));
    }
    Ok(v)
}

/// `key = value` or `key: value` directive, optionally behind `#`.
fn directive(line: &str) -> Option<(String, String)> {
    let body = line.trim().trim_start_matches('#').trim();
    let pos = body.find(['=', ':'])?;
    let key = body[..pos].trim().to_ascii_lowercase();
    let value = body[pos + 1..].trim().to_string();
    if key.is_empty() || key.contains(char::is_whitespace) {
        return None;
    }
    Some((key, value))
}

fn split_fields(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c == ',' || c == ';' || c.is_whitespace())
        .filter(|s| !s.is_empty())
}

/// Parses a record from raw bytes. Row numbers in errors are 1-based line
/// numbers of the source.
pub fn parse_record(source: &[u8], format: RecordFormat, name: &str) -> Result<ParsedRecord> {
    let text = std::str::from_utf8(source).map_err(|e| parse_err(0, format!("not UTF-8 text: {e}")))?;
    match format {
        RecordFormat::TwoColumnCsv => parse_csv(text, name),
        RecordFormat::SingleColumnWithDtHeader => parse_single(text, name),
        RecordFormat::PeerFixedWidth => parse_peer(text, name),
    }
}

fn parse_csv(text: &str, name: &str) -> Result<ParsedRecord> {
    let mut units = Units::MetersPerSecondSquared;
    let mut times = Vec::new();
    let mut accel = Vec::new();
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let row = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('#') {
            if let Some((k, v)) = directive(trimmed) {
                if k == "units" {
                    units = Units::parse(&v).ok_or_else(|| parse_err(row, format!("unknown units {v:?}")))?;
                }
            }
            continue;
        }
        let fields: Vec<&str> = split_fields(trimmed).collect();
        if fields.len() != 2 {
            return Err(parse_err(row, format!("expected 2 columns, found {}", fields.len())));
        }
        times.push(parse_f64(fields[0], row)?);
        accel.push(parse_f64(fields[1], row)?);
        rows.push(row);
    }
    if accel.is_empty() {
        return Err(parse_err(0, "empty record"));
    }
    if accel.len() < 2 {
        return Err(parse_err(rows[0], "a single sample does not define dt"));
    }
    let n = times.len();
    let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
    if !(dt > 0.0) {
        return Err(parse_err(rows[1], "time stamps must increase"));
    }
    for k in 1..n {
        let step = times[k] - times[k - 1];
        if (step - dt).abs() > DT_JITTER {
            return Err(parse_err(
                rows[k],
                format!("time step {step} differs from mean dt {dt} by more than {DT_JITTER} s"),
            ));
        }
    }
    let scale = units.to_si();
    let motion = GroundMotion::new(name, dt, accel.into_iter().map(|a| a * scale).collect())?;
    Ok(ParsedRecord {
        motion,
        format: RecordFormat::TwoColumnCsv,
        units,
        header: Vec::new(),
    })
}

fn parse_single(text: &str, name: &str) -> Result<ParsedRecord> {
    let mut units = Units::MetersPerSecondSquared;
    let mut dt = None;
    let mut accel = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let row = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some((k, v)) = directive(trimmed) {
            match k.as_str() {
                "dt" => dt = Some(parse_f64(&v, row)?),
                "units" => {
                    units = Units::parse(&v).ok_or_else(|| parse_err(row, format!("unknown units {v:?}")))?
                }
                _ => {}
            }
            continue;
        }
        if trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = split_fields(trimmed).collect();
        if fields.len() != 1 {
            return Err(parse_err(row, format!("expected 1 column, found {}", fields.len())));
        }
        accel.push(parse_f64(fields[0], row)?);
    }
    let dt = dt.ok_or_else(|| parse_err(0, "missing dt header"))?;
    if !(dt > 0.0) {
        return Err(parse_err(0, format!("dt must be > 0, got {dt}")));
    }
    if accel.is_empty() {
        return Err(parse_err(0, "empty record"));
    }
    let scale = units.to_si();
    let motion = GroundMotion::new(name, dt, accel.into_iter().map(|a| a * scale).collect())?;
    Ok(ParsedRecord {
        motion,
        format: RecordFormat::SingleColumnWithDtHeader,
        units,
        header: Vec::new(),
    })
}

fn parse_peer(text: &str, name: &str) -> Result<ParsedRecord> {
    let lines: Vec<&str> = text.lines().collect();
    if lines.len() < 4 {
        return Err(parse_err(lines.len(), "PEER record needs four header lines"));
    }
    let units_line = lines[2].to_ascii_uppercase();
    let units = if units_line.contains("M/S") || units_line.contains("CM/S") {
        if units_line.contains("CM/S") {
            return Err(parse_err(3, "cm/s² records are not supported"));
        }
        Units::MetersPerSecondSquared
    } else {
        Units::G
    };

    let (npts, dt) = parse_peer_counts(lines[3]).ok_or_else(|| parse_err(4, "cannot read NPTS and DT"))?;
    let mut accel = Vec::with_capacity(npts);
    for (idx, line) in lines.iter().enumerate().skip(4) {
        for tok in line.split_whitespace() {
            accel.push(parse_f64(tok, idx + 1)?);
        }
    }
    if accel.is_empty() {
        return Err(parse_err(0, "empty record"));
    }
    if accel.len() != npts {
        return Err(parse_err(
            lines.len(),
            format!("header declares {npts} points, found {}", accel.len()),
        ));
    }
    let scale = units.to_si();
    let motion = GroundMotion::new(name, dt, accel.into_iter().map(|a| a * scale).collect())?;
    Ok(ParsedRecord {
        motion,
        format: RecordFormat::PeerFixedWidth,
        units,
        header: lines[..2].iter().map(|s| s.to_string()).collect(),
    })
}

/// Reads either `NPTS= 5000, DT= .0050 SEC` or the older `5000 .0050 ...`.
fn parse_peer_counts(line: &str) -> Option<(usize, f64)> {
    let upper = line.to_ascii_uppercase();
    let keyed = upper
        .find("NPTS")
        .is_some_and(|p| upper[p + 4..].trim_start().starts_with('='));
    if keyed {
        let grab = |key: &str| -> Option<&str> {
            let start = upper.find(key)? + key.len();
            let rest = line[start..].trim_start_matches(|c: char| c == '=' || c.is_whitespace());
            let end = rest
                .find(|c: char| !(c.is_ascii_digit() || c == '.' || c == 'E' || c == 'e' || c == '-' || c == '+'))
                .unwrap_or(rest.len());
            Some(&rest[..end])
        };
        let npts = grab("NPTS")?.parse().ok()?;
        let dt = grab("DT")?.parse().ok()?;
        return Some((npts, dt));
    }
    let mut it = line.split_whitespace();
    let npts = it.next()?.parse().ok()?;
    let dt = it.next()?.parse().ok()?;
    Some((npts, dt))
}

/// Renders `motion` in `format`, with accelerations expressed in `units`.
pub fn write_record(motion: &GroundMotion, format: RecordFormat, units: Units, header: &[String]) -> String {
    let scale = 1.0 / units.to_si();
    let mut out = String::new();
    match format {
        RecordFormat::TwoColumnCsv => {
            let _ = writeln!(out, "# units: {}", units.label());
            for (k, a) in motion.accel.iter().enumerate() {
                let _ = writeln!(out, "{},{}", k as f64 * motion.dt, a * scale);
            }
        }
        RecordFormat::SingleColumnWithDtHeader => {
            let _ = writeln!(out, "dt = {}", motion.dt);
            let _ = writeln!(out, "units = {}", units.label());
            for a in &motion.accel {
                let _ = writeln!(out, "{}", a * scale);
            }
        }
        RecordFormat::PeerFixedWidth => {
            let title = header.first().map(String::as_str).unwrap_or("PEER-FORMAT RECORD");
            let event = header.get(1).map(String::as_str).unwrap_or(motion.name.as_str());
            let _ = writeln!(out, "{title}");
            let _ = writeln!(out, "{event}");
            let unit_text = match units {
                Units::G => "G",
                Units::MetersPerSecondSquared => "M/S2",
            };
            let _ = writeln!(out, "ACCELERATION TIME SERIES IN UNITS OF {unit_text}");
            let _ = writeln!(out, "NPTS= {}, DT= {} SEC", motion.accel.len(), motion.dt);
            for chunk in motion.accel.chunks(5) {
                let row: Vec<String> = chunk.iter().map(|a| format!("{:e}", a * scale)).collect();
                let _ = writeln!(out, "{}", row.join(" "));
            }
        }
    }
    out
}

/// Froude time scaling: `dt' = dt * sqrt(lambda)`, accelerations unchanged.
pub fn froude_scale(gm: &GroundMotion, scale: ScaleModel) -> GroundMotion {
    GroundMotion {
        name: gm.name.clone(),
        dt: gm.dt * scale.time_ratio(),
        accel: gm.accel.clone(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    None,
    /// Subtract the least-squares line through the velocity history before
    /// integrating to displacement.
    #[default]
    LinearVelocity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakValues {
    pub pga: f64,
    pub pgv: f64,
    pub pgd: f64,
}

/// Velocity and displacement histories by trapezoidal integration.
pub fn integrate(gm: &GroundMotion, baseline: Baseline) -> (Vec<f64>, Vec<f64>) {
    let n = gm.accel.len();
    let dt = gm.dt;
    let mut vel = vec![0.0; n];
    for k in 1..n {
        vel[k] = vel[k - 1] + 0.5 * dt * (gm.accel[k - 1] + gm.accel[k]);
    }
    if baseline == Baseline::LinearVelocity && n >= 2 {
        let (c0, c1) = line_fit(dt, &vel);
        for (k, v) in vel.iter_mut().enumerate() {
            *v -= c0 + c1 * k as f64 * dt;
        }
    }
    let mut disp = vec![0.0; n];
    for k in 1..n {
        disp[k] = disp[k - 1] + 0.5 * dt * (vel[k - 1] + vel[k]);
    }
    (vel, disp)
}

/// Least-squares `y ~ c0 + c1 t` on the uniform grid `t_k = k dt`.
fn line_fit(dt: f64, y: &[f64]) -> (f64, f64) {
    let n = y.len() as f64;
    let (mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0);
    for (k, &v) in y.iter().enumerate() {
        let t = k as f64 * dt;
        st += t;
        sy += v;
        stt += t * t;
        sty += t * v;
    }
    let den = n * stt - st * st;
    if den.abs() < 1e-300 {
        return (sy / n, 0.0);
    }
    let c1 = (n * sty - st * sy) / den;
    let c0 = (sy - c1 * st) / n;
    (c0, c1)
}

fn abs_max(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Peak ground acceleration, velocity and displacement.
pub fn peaks(gm: &GroundMotion) -> Result<PeakValues> {
    peaks_with(gm, Baseline::LinearVelocity)
}

pub fn peaks_with(gm: &GroundMotion, baseline: Baseline) -> Result<PeakValues> {
    if gm.accel.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "record needs at least 3 samples for peak values, has {}",
            gm.accel.len()
        )));
    }
    let (vel, disp) = integrate(gm, baseline);
    Ok(PeakValues {
        pga: abs_max(&gm.accel),
        pgv: abs_max(&vel),
        pgd: abs_max(&disp),
    })
}

/// Newmark parameters for single-degree-of-freedom sweeps.
const BETA: f64 = 0.25;
const GAMMA: f64 = 0.5;

/// Peak absolute relative displacement of a linear oscillator with period
/// `period` and damping ratio `damping` under `gm`.
pub fn sdof_peak_displacement(gm: &GroundMotion, damping: f64, period: f64) -> f64 {
    let w = 2.0 * std::f64::consts::PI / period;
    let k = w * w;
    let c = 2.0 * damping * w;
    let substeps = (gm.dt / (period / 20.0)).ceil().max(1.0) as usize;
    let h = gm.dt / substeps as f64;

    let khat = k + GAMMA / (BETA * h) * c + 1.0 / (BETA * h * h);
    let (mut u, mut v) = (0.0f64, 0.0f64);
    let mut a = -gm.accel[0];
    let mut peak = 0.0f64;
    let n = gm.accel.len();
    for i in 0..n - 1 {
        let a0 = gm.accel[i];
        let a1 = gm.accel[i + 1];
        for s in 1..=substeps {
            let ag = a0 + (a1 - a0) * s as f64 / substeps as f64;
            let p = -ag
                + (u / (BETA * h * h) + v / (BETA * h) + (0.5 / BETA - 1.0) * a)
                + c * (GAMMA * u / (BETA * h) + (GAMMA / BETA - 1.0) * v + h * (0.5 * GAMMA / BETA - 1.0) * a);
            let u1 = p / khat;
            let a1n = (u1 - u) / (BETA * h * h) - v / (BETA * h) - (0.5 / BETA - 1.0) * a;
            let v1 = v + h * ((1.0 - GAMMA) * a + GAMMA * a1n);
            u = u1;
            v = v1;
            a = a1n;
            peak = peak.max(u.abs());
        }
    }
    peak
}

/// Pseudo-acceleration spectrum `w² |u|max` at each of `periods`, in input
/// order.
pub fn response_spectrum(gm: &GroundMotion, damping: f64, periods: &[f64], exec: Exec) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&damping) {
        return Err(Error::InvalidInput(format!("damping must lie in [0, 1), got {damping}")));
    }
    if let Some(t) = periods.iter().find(|t| !(**t > 0.0)) {
        return Err(Error::InvalidInput(format!("periods must be > 0, got {t}")));
    }
    gm.check()?;
    Ok(par::map_slice(exec, periods, |&t| {
        let w = 2.0 * std::f64::consts::PI / t;
        w * w * sdof_peak_displacement(gm, damping, t)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn csv_direct_read() {
        let rec = parse_record(b"0.0,0.0\n0.01,1.0\n", RecordFormat::TwoColumnCsv, "t").unwrap();
        assert_eq!(rec.motion.dt, 0.01);
        assert_eq!(rec.motion.accel, vec![0.0, 1.0]);
        let again = parse_record(b"0.0,0.0\n0.01,1.0\n", RecordFormat::TwoColumnCsv, "t").unwrap();
        assert_eq!(rec, again);
    }

    #[test]
    fn csv_units_directive() {
        let rec = parse_record(b"# units: g\n0,0.5\n0.02,-1\n", RecordFormat::TwoColumnCsv, "t").unwrap();
        assert_eq!(rec.units, Units::G);
        assert_eq!(rec.motion.accel, vec![0.5 * G_UNIT, -G_UNIT]);
    }

    #[test]
    fn csv_errors_report_rows() {
        let err = parse_record(b"0,0\n0.01,x\n", RecordFormat::TwoColumnCsv, "t").unwrap_err();
        assert!(matches!(err, Error::Parse { row: 2, .. }), "{err}");
        let err = parse_record(b"0,0\n0.01,1\n0.03,1\n", RecordFormat::TwoColumnCsv, "t").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
        let err = parse_record(b"# nothing\n", RecordFormat::TwoColumnCsv, "t").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn csv_tolerates_small_jitter() {
        let rec = parse_record(b"0,0\n0.0100004,1\n0.02,2\n", RecordFormat::TwoColumnCsv, "t").unwrap();
        assert!((rec.motion.dt - 0.01).abs() < 1e-12);
    }

    #[test]
    fn synthetic_sine_through_csv() {
        // 5 Hz, 0.3 g generator; the generator's amplitude is the oracle.
        let gm = GroundMotion::sine("s", 0.3 * G_UNIT, 5.0, 0.001, 2.0);
        let text = write_record(&gm, RecordFormat::TwoColumnCsv, Units::MetersPerSecondSquared, &[]);
        let back = parse_record(text.as_bytes(), RecordFormat::TwoColumnCsv, "s").unwrap();
        let pga = peaks(&back.motion).unwrap().pga;
        assert!((pga - 2.943).abs() < 1e-9, "{pga}");
    }

    #[test]
    fn single_column_and_peer() {
        let single = "dt = 0.005\nunits = g\n0.1\n-0.2\n0.3\n";
        let rec = parse_record(single.as_bytes(), RecordFormat::SingleColumnWithDtHeader, "s").unwrap();
        assert_eq!(rec.motion.dt, 0.005);
        assert_eq!(rec.motion.accel.len(), 3);
        assert!((rec.motion.accel[2] - 0.3 * G_UNIT).abs() < 1e-12);

        let peer = "PEER NGA STRONG MOTION DATABASE RECORD\nTEST 01/01/00, STATION, 000\n\
                    ACCELERATION TIME SERIES IN UNITS OF G\nNPTS=    7, DT=   .0100 SEC\n\
                    .1000E-01 -.2000E-01 .3000E-01 .4000E-01 .5000E-01\n.6000E-01 .7000E-01\n";
        let rec = parse_record(peer.as_bytes(), RecordFormat::PeerFixedWidth, "p").unwrap();
        assert_eq!(rec.units, Units::G);
        assert_eq!(rec.motion.dt, 0.01);
        assert_eq!(rec.motion.accel.len(), 7);
        assert!((rec.motion.accel[1] + 0.02 * G_UNIT).abs() < 1e-12);

        let text = write_record(&rec.motion, rec.format, rec.units, &rec.header);
        let back = parse_record(text.as_bytes(), RecordFormat::PeerFixedWidth, "p").unwrap();
        assert_eq!(back.motion.dt, rec.motion.dt);
        for (a, b) in back.motion.accel.iter().zip(&rec.motion.accel) {
            assert!((a - b).abs() < 1e-14);
        }

        let short = peer.replace("NPTS=    7", "NPTS=    8");
        assert!(parse_record(short.as_bytes(), RecordFormat::PeerFixedWidth, "p").is_err());
    }

    #[test]
    fn peer_old_style_counts() {
        assert_eq!(parse_peer_counts("  4000    0.0050    NPTS, DT"), Some((4000, 0.005)));
    }

    #[test]
    fn froude_identity_and_quarter_scale() {
        let gm = GroundMotion::sine("s", 1.0, 2.0, 0.01, 3.0);
        assert_eq!(froude_scale(&gm, ScaleModel::unit()), gm);
        let q = froude_scale(&gm, ScaleModel::new(0.25).unwrap());
        assert_eq!(q.dt, 0.005);
        assert_eq!(peaks(&q).unwrap().pga, peaks(&gm).unwrap().pga);
    }

    #[test]
    fn froude_displacement_scales_by_lambda() {
        // a = A sin(w t) over whole cycles has displacement amplitude A / w².
        let (a, f) = (2.0, 1.0);
        let w = 2.0 * PI * f;
        let gm = GroundMotion::sine("s", a, f, 0.0002, 20.0);
        let lam = 1.0 / 18.0;
        let scaled = froude_scale(&gm, ScaleModel::new(lam).unwrap());
        let d = a / (w * w);
        let pgd = peaks(&scaled).unwrap().pgd;
        assert!((pgd / (d * lam) - 1.0).abs() < 0.005, "{pgd} vs {}", d * lam);
    }

    #[test]
    fn peaks_of_zero_and_sine() {
        let z = GroundMotion::zeros("z", 0.01, 100);
        let p = peaks(&z).unwrap();
        assert_eq!((p.pga, p.pgv, p.pgd), (0.0, 0.0, 0.0));

        let (a, f) = (3.0, 2.0);
        let w = 2.0 * PI * f;
        let gm = GroundMotion::sine("s", a, f, 0.0005, 30.0);
        let p = peaks(&gm).unwrap();
        assert!((p.pga - a).abs() < 1e-9);
        assert!((p.pgv / (a / w) - 1.0).abs() < 0.01, "pgv {}", p.pgv);
        assert!((p.pgd / (a / (w * w)) - 1.0).abs() < 0.01, "pgd {}", p.pgd);

        assert!(peaks(&GroundMotion::zeros("z", 0.01, 2)).is_err());
    }

    #[test]
    fn spectrum_zero_record() {
        let z = GroundMotion::zeros("z", 0.01, 200);
        let sa = response_spectrum(&z, 0.05, &[0.1, 1.0, 3.0], Exec::Sequential).unwrap();
        assert!(sa.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn spectrum_resonant_steady_state() {
        // Steady resonant amplitude of u'' + 2 xi w u' + w² u = -A sin(w t)
        // is A / (2 xi w²).
        let (t, xi, a) = (1.0, 0.02, 1.0);
        let w = 2.0 * PI / t;
        let gm = GroundMotion::sine("s", a, 1.0 / t, 0.002, 150.0);
        let u = sdof_peak_displacement(&gm, xi, t);
        let expect = a / (w * w) / (2.0 * xi);
        assert!((u / expect - 1.0).abs() < 0.02, "{u} vs {expect}");
    }

    #[test]
    fn spectrum_rigid_limit() {
        let gm = GroundMotion::sine("s", 2.0, 1.3, 0.01, 10.0);
        let sa = response_spectrum(&gm, 0.05, &[gm.dt], Exec::Sequential).unwrap()[0];
        let pga = peaks(&gm).unwrap().pga;
        assert!((sa / pga - 1.0).abs() < 0.05, "{sa} vs {pga}");
    }

    #[test]
    fn spectrum_rejects_bad_inputs() {
        let gm = GroundMotion::sine("s", 1.0, 1.0, 0.01, 1.0);
        assert!(response_spectrum(&gm, 1.0, &[1.0], Exec::Sequential).is_err());
        assert!(response_spectrum(&gm, 0.05, &[0.0], Exec::Sequential).is_err());
    }

    fn arb_record() -> impl Strategy<Value = GroundMotion> {
        (0.002f64..0.05, proptest::collection::vec(-5.0f64..5.0, 3..200))
            .prop_map(|(dt, accel)| GroundMotion::new("p", dt, accel).unwrap())
    }

    proptest! {
        #[test]
        fn froude_composes(gm in arb_record(), l1 in 0.01f64..=1.0, l2 in 0.01f64..=1.0) {
            let a = froude_scale(&froude_scale(&gm, ScaleModel::new(l1).unwrap()), ScaleModel::new(l2).unwrap());
            let b = froude_scale(&gm, ScaleModel::new(l1 * l2).unwrap());
            prop_assert_eq!(&a.accel, &b.accel);
            // sqrt(l1) * sqrt(l2) and sqrt(l1 l2) agree to a few ulps only.
            prop_assert!((a.dt - b.dt).abs() <= 4.0 * f64::EPSILON * b.dt);
        }

        #[test]
        fn spectrum_nonnegative_and_sign_invariant(gm in arb_record(), xi in 0.0f64..0.2) {
            let periods = [0.05, 0.3, 1.0];
            let sa = response_spectrum(&gm, xi, &periods, Exec::Sequential).unwrap();
            let flipped = response_spectrum(&gm.scaled_amplitude(-1.0), xi, &periods, Exec::Sequential).unwrap();
            prop_assert!(sa.iter().all(|&s| s >= 0.0));
            prop_assert_eq!(sa, flipped);
        }

        #[test]
        fn baseline_leaves_pga(gm in arb_record()) {
            let a = peaks_with(&gm, Baseline::None).unwrap();
            let b = peaks_with(&gm, Baseline::LinearVelocity).unwrap();
            prop_assert_eq!(a.pga, b.pga);
        }

        #[test]
        fn parallel_spectrum_matches_sequential(gm in arb_record()) {
            let periods: Vec<f64> = (1..20).map(|k| 0.05 * k as f64).collect();
            let s = response_spectrum(&gm, 0.05, &periods, Exec::Sequential).unwrap();
            let p = response_spectrum(&gm, 0.05, &periods, Exec::Parallel).unwrap();
            prop_assert_eq!(s, p);
        }
    }
}

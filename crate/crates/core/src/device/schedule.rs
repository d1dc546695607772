//! Piecewise-constant qubit frequency trajectories.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Boundaries closer than this are treated as equal.
const TIME_TOL: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    /// Absolute frequency ω/2π, Hz.
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FrequencySchedule {
    tracks: Vec<Vec<Segment>>,
    duration: f64,
}

impl FrequencySchedule {
    /// Validates that every track tiles `[0, duration]` without gaps or overlaps.
    pub fn new(tracks: Vec<Vec<Segment>>, duration: f64) -> Result<Self> {
        if !(duration >= 0.0 && duration.is_finite()) {
            return Err(Error::Schedule(format!("duration {duration}")));
        }
        for (q, track) in tracks.iter().enumerate() {
            let mut t = 0.0;
            for s in track {
                if (s.start - t).abs() > TIME_TOL {
                    let kind = if s.start > t { "gap" } else { "overlap" };
                    return Err(Error::Schedule(format!("{kind} on qubit {q} at {t:e} s")));
                }
                if s.end < s.start || !(s.frequency > 0.0 && s.frequency.is_finite()) {
                    return Err(Error::Schedule(format!("bad segment on qubit {q}: {s:?}")));
                }
                t = s.end;
            }
            if (t - duration).abs() > TIME_TOL {
                return Err(Error::Schedule(format!("qubit {q} ends at {t:e}, not {duration:e}")));
            }
        }
        Ok(Self { tracks, duration })
    }

    /// All qubits held at fixed frequencies.
    pub fn constant(frequencies: &[f64], duration: f64) -> Result<Self> {
        let tracks = frequencies
            .iter()
            .map(|&f| vec![Segment { start: 0.0, end: duration, frequency: f }])
            .collect();
        Self::new(tracks, duration)
    }

    /// Consecutive steps, each a duration and the frequency of every qubit.
    pub fn from_steps(steps: &[(f64, Vec<f64>)]) -> Result<Self> {
        let n = steps.first().map(|s| s.1.len()).ok_or(Error::EmptyInput)?;
        let mut tracks = vec![Vec::new(); n];
        let mut t = 0.0;
        for (len, freqs) in steps {
            if freqs.len() != n {
                return Err(Error::DimensionMismatch { expected: n, actual: freqs.len() });
            }
            for (q, &f) in freqs.iter().enumerate() {
                tracks[q].push(Segment { start: t, end: t + len, frequency: f });
            }
            t += len;
        }
        Self::new(tracks, t)
    }

    pub fn n_qubits(&self) -> usize {
        self.tracks.len()
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn tracks(&self) -> &[Vec<Segment>] {
        &self.tracks
    }

    /// Union of all segment boundaries, ascending, including 0 and the end.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = vec![0.0, self.duration];
        for track in &self.tracks {
            for s in track {
                pts.push(s.start);
                pts.push(s.end);
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() <= TIME_TOL);
        pts
    }

    /// Frequency of every qubit at time `t` (segment containing `t`, right-open).
    pub fn frequencies_at(&self, t: f64) -> Vec<f64> {
        self.tracks
            .iter()
            .map(|track| {
                track
                    .iter()
                    .find(|s| t >= s.start - TIME_TOL && t < s.end - TIME_TOL)
                    .or_else(|| track.last())
                    .map(|s| s.frequency)
                    .unwrap_or(f64::NAN)
            })
            .collect()
    }

    /// `qubit,start_ns,end_ns,frequency_ghz` rows for plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("qubit,start_ns,end_ns,frequency_ghz\n");
        for (q, track) in self.tracks.iter().enumerate() {
            for s in track {
                let _ = writeln!(out, "Q{},{},{},{}", q + 1, s.start * 1e9, s.end * 1e9, s.frequency * 1e-9);
            }
        }
        out
    }
}

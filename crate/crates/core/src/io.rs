//! Deterministic text serialization: floats at full precision, JSON with a
//! fixed number format, and CSV builders for the scan outputs.
//!
//! Every float is written as `{:.16e}` (17 significant digits), which is
//! enough to round-trip any f64 bit pattern, with negative zero normalized
//! so equal values always produce equal bytes. All output uses `.` as the
//! decimal separator, `,` as the CSV field separator, and LF line endings.

use std::io::Write;

use serde::Serialize;

use crate::equilibrium::{CrystalState, ShellDecomposition};
use crate::modes::{BandOutcome, BandScan, ModeSpectrum};
use crate::spin::DetuningPoint;
use crate::trap::StabilityMap;

/// Full-precision scientific form of a float, negative zero normalized.
pub fn fmt_f64(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

/// JSON formatter that writes every f64 through [`fmt_f64`]. Non-finite
/// values never reach it; the serializer maps them to null first.
pub struct ScientificFormatter;

impl serde_json::ser::Formatter for ScientificFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + Write,
    {
        writer.write_all(fmt_f64(value).as_bytes())
    }
}

/// Compact JSON with full-precision floats.
pub fn to_json_string<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, ScientificFormatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serde_json writes UTF-8"))
}

/// `v_ring,v_endcap,beta1_sq,beta3_sq,stable` over the whole grid.
pub fn stability_csv(map: &StabilityMap) -> String {
    let mut s = String::from("v_ring,v_endcap,beta1_sq,beta3_sq,stable\n");
    for p in &map.points {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(p.v_ring),
            fmt_f64(p.v_endcap),
            fmt_f64(p.beta1_sq),
            fmt_f64(p.beta3_sq),
            p.stable
        ));
    }
    s
}

/// `index,x,y,radius,ring` for a solved crystal.
pub fn crystal_csv(state: &CrystalState, shells: &ShellDecomposition) -> String {
    let mut s = String::from("index,x,y,radius,ring\n");
    for (i, p) in state.positions.iter().enumerate() {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            i,
            fmt_f64(p[0]),
            fmt_f64(p[1]),
            fmt_f64(p[0].hypot(p[1])),
            shells.ring_of[i]
        ));
    }
    s
}

fn push_spectrum_rows(s: &mut String, v_ring: f64, spectrum: &ModeSpectrum) {
    for (k, &f) in spectrum.axial_freqs.iter().enumerate() {
        s.push_str(&format!("{},axial,{},{}\n", fmt_f64(v_ring), k, fmt_f64(f)));
    }
    for (k, &f) in spectrum.planar_freqs.iter().enumerate() {
        s.push_str(&format!("{},planar,{},{}\n", fmt_f64(v_ring), k, fmt_f64(f)));
    }
}

/// `v_ring,sector,mode_index,frequency` for every converged scan point.
pub fn band_csv(scan: &BandScan) -> String {
    let mut s = String::from("v_ring,sector,mode_index,frequency\n");
    for point in &scan.points {
        if let BandOutcome::Converged { spectrum, .. } = &point.outcome {
            push_spectrum_rows(&mut s, point.v_ring, spectrum);
        }
    }
    s
}

/// `mu,m,n,distance,j` for every successful detuning point.
pub fn pairs_csv(points: &[DetuningPoint]) -> String {
    let mut s = String::from("mu,m,n,distance,j\n");
    for point in points {
        if let Ok(result) = &point.outcome {
            for pair in &result.pairs {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    fmt_f64(point.mu),
                    pair.m,
                    pair.n,
                    fmt_f64(pair.distance),
                    fmt_f64(pair.j)
                ));
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_f64(-2.5), "-2.5000000000000000e0");
    }

    #[test]
    fn negative_zero_normalized() {
        assert_eq!(fmt_f64(-0.0), "0.0000000000000000e0");
        assert_eq!(fmt_f64(0.0), "0.0000000000000000e0");
    }

    #[test]
    fn round_trips_exactly() {
        for &x in &[
            0.1,
            std::f64::consts::PI,
            -2.5e-17,
            1.0e300,
            f64::MIN_POSITIVE,
            6.92089648158909380e6,
        ] {
            let back: f64 = fmt_f64(x).parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{x}");
        }
    }

    #[test]
    fn json_floats_use_scientific_form() {
        let s = to_json_string(&vec![0.1, -0.0]).unwrap();
        assert_eq!(s, "[1.0000000000000001e-1,0.0000000000000000e0]");
    }

    #[test]
    fn json_integers_unaffected() {
        #[derive(Serialize)]
        struct Rec {
            n: usize,
            x: f64,
        }
        let s = to_json_string(&Rec { n: 7, x: 2.0 }).unwrap();
        assert_eq!(s, "{\"n\":7,\"x\":2.0000000000000000e0}");
    }

    #[test]
    fn csv_uses_lf_only() {
        let state = CrystalState {
            positions: vec![[1.0, 0.0]],
            plane_z: 0.0,
            energy: 0.0,
            gradient_norm: 0.0,
            converged: true,
            seed_id: "t".into(),
        };
        let shells = ShellDecomposition {
            ring_counts: vec![1],
            ring_radii: vec![1.0],
            ring_of: vec![0],
            ambiguous: false,
        };
        let csv = crystal_csv(&state, &shells);
        assert!(!csv.contains('\r'));
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.ends_with('\n'));
        assert_eq!(csv.lines().next().unwrap(), "index,x,y,radius,ring");
    }
}

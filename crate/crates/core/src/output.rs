//! CSV writers. Every file starts with the comment line
//! `# fsi-bem v<version>, scenario-hash=<hex>`.

use std::io::Write;

use num_complex::Complex64;

use crate::fields::ErrorReport;
use crate::oracle::OracleSolution;
use crate::systems::SweepPoint;

pub fn provenance_line(scenario_hash: &str) -> String {
    format!("# fsi-bem v{}, scenario-hash={}", crate::VERSION, scenario_hash)
}

/// Shortest representation that round-trips.
fn num(v: f64) -> String {
    format!("{v:?}")
}

/// 17 significant digits.
fn num17(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn writer<W: Write>(mut out: W, scenario_hash: &str) -> csv::Result<csv::Writer<W>> {
    writeln!(out, "{}", provenance_line(scenario_hash))?;
    Ok(csv::Writer::from_writer(out))
}

pub const TRACE_HEADER: [&str; 7] = ["theta", "re_u1", "im_u1", "re_u2", "im_u2", "re_p", "im_p"];

/// One boundary sample: angle, vector value, scalar value.
pub type TraceRow = (f64, [Complex64; 2], Complex64);

pub fn write_trace_csv<W: Write>(out: W, scenario_hash: &str, header: [&str; 7], rows: &[TraceRow]) -> csv::Result<()> {
    let mut w = writer(out, scenario_hash)?;
    w.write_record(header)?;
    for (t, u, p) in rows {
        w.write_record([num(*t), num(u[0].re), num(u[0].im), num(u[1].re), num(u[1].im), num(p.re), num(p.im)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep_csv<W: Write>(out: W, scenario_hash: &str, sweep: &[SweepPoint]) -> csv::Result<()> {
    let mut w = writer(out, scenario_hash)?;
    w.write_record(["omega", "logdet"])?;
    for p in sweep {
        w.write_record([num17(p.omega), num17(p.logdet)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_study_csv<W: Write>(out: W, scenario_hash: &str, rows: &[ErrorReport]) -> csv::Result<()> {
    let mut w = writer(out, scenario_hash)?;
    w.write_record(["N", "err_u_abs", "err_u_rel", "order_u", "err_p_abs", "err_p_rel", "order_p"])?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            num(r.err_u_abs),
            num(r.err_u_rel),
            opt(r.order_u),
            num(r.err_p_abs),
            num(r.err_p_rel),
            opt(r.order_p),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reference frequency line of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceLine {
    /// `jones` or `neumann`.
    pub kind: &'static str,
    pub omega: f64,
    /// Mode or Bessel order the frequency belongs to, when known.
    pub order: Option<u32>,
    pub expected_dip: bool,
}

pub fn write_reference_csv<W: Write>(out: W, scenario_hash: &str, lines: &[ReferenceLine]) -> csv::Result<()> {
    let mut w = writer(out, scenario_hash)?;
    w.write_record(["kind", "omega", "order", "expected_dip"])?;
    for l in lines {
        w.write_record([
            l.kind.to_string(),
            num17(l.omega),
            l.order.map(|o| o.to_string()).unwrap_or_default(),
            l.expected_dip.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_modes_csv<W: Write>(out: W, scenario_hash: &str, solution: &OracleSolution) -> csv::Result<()> {
    let mut w = writer(out, scenario_hash)?;
    w.write_record(["n", "re_A", "im_A", "re_B", "im_B", "re_C", "im_C"])?;
    for m in &solution.modes {
        let x = m.xn.unwrap_or([Complex64::new(0.0, 0.0); 3]);
        w.write_record([
            m.n.to_string(),
            num(x[0].re),
            num(x[0].im),
            num(x[1].re),
            num(x[1].im),
            num(x[2].re),
            num(x[2].im),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a trace CSV written by [`write_trace_csv`], skipping comment lines.
pub fn read_trace_csv(text: &str) -> csv::Result<Vec<TraceRow>> {
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let mut rows = Vec::new();
    for rec in r.deserialize::<[f64; 7]>() {
        let v = rec?;
        rows.push((v[0], [Complex64::new(v[1], v[2]), Complex64::new(v[3], v[4])], Complex64::new(v[5], v[6])));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_rows_carry_seventeen_digits() {
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, "abc", &[SweepPoint { omega: 5.0, logdet: -1.0 / 3.0 }]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], format!("# fsi-bem v{}, scenario-hash=abc", crate::VERSION));
        assert_eq!(lines[1], "omega,logdet");
        assert_eq!(lines[2], "5.0000000000000000e0,-3.3333333333333331e-1");
        let back: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(back, -1.0 / 3.0);
    }

    #[test]
    fn trace_round_trip() {
        let rows = vec![
            (0.0, [Complex64::new(1e-14, -2e-15), Complex64::new(0.0, 3.5)], Complex64::new(0.25, -0.125)),
            (1.5, [Complex64::new(-1.0, 1.0), Complex64::new(2.0, -2.0)], Complex64::new(1.0 / 3.0, 0.1)),
        ];
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, "00ff", TRACE_HEADER, &rows).unwrap();
        let back = read_trace_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, rows);
    }
}

use std::io::Write;

use crate::error::{Error, Result};

use super::montecarlo::ResultRecord;

pub const HEADER: [&str; 12] = [
    "power_dbm", "detector", "n_b", "n_z", "eta", "bits", "errors", "ber", "q2_db", "seed", "failed_bursts",
    "wall_time_s",
];

/// `printf("%.9g")`.
pub fn fmt_g9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (8 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn row(r: &ResultRecord) -> [String; 12] {
    [
        fmt_g9(r.power_dbm),
        r.detector.to_string(),
        r.n_b.to_string(),
        r.n_z.to_string(),
        fmt_g9(r.eta),
        r.bits.to_string(),
        r.errors.to_string(),
        fmt_g9(r.ber),
        fmt_g9(r.q2_db),
        r.seed.to_string(),
        r.failed_bursts.to_string(),
        fmt_g9(r.wall_time_s),
    ]
}

pub fn write_records<W: Write>(out: W, records: &[ResultRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(HEADER).map_err(io)?;
    for r in records {
        w.write_record(row(r)).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(records: &[ResultRecord]) -> String {
    let mut buf = Vec::new();
    write_records(&mut buf, records).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

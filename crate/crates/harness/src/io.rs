//! Deterministic file output: trace CSVs and hashing.

use std::fmt::Write as _;

use saddlebench_core::solvers::RunTrace;

/// FNV-1a 64-bit hash for config integrity stamps.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

/// Shortest-roundtrip float formatting; stable across runs and platforms.
fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// Renders a trace as CSV: the fixed telemetry columns followed by one
/// column per recorded invariant flag (1/0, empty when a flag did not apply
/// at that step).
pub fn trace_to_csv(trace: &RunTrace) -> String {
    let mut header = String::from("t,eta,lambda,norm_F,norm_e,step_len,residual");
    let flag_columns: Vec<&'static str> = trace
        .records
        .first()
        .and_then(|r| r.flags.as_ref())
        .map(|flags| {
            flags
                .named()
                .iter()
                .filter_map(|(name, v)| v.map(|_| *name))
                .collect()
        })
        .unwrap_or_default();
    for name in &flag_columns {
        header.push(',');
        header.push_str(name);
    }
    header.push('\n');

    let mut out = header;
    for rec in &trace.records {
        let _ = write!(
            out,
            "{},{},{},{},{},{},{}",
            rec.t,
            fmt_f64(rec.eta),
            fmt_f64(rec.lambda),
            fmt_f64(rec.norm_f),
            fmt_f64(rec.norm_e),
            fmt_f64(rec.step_len),
            fmt_f64(rec.residual),
        );
        if !flag_columns.is_empty() {
            let named = rec
                .flags
                .as_ref()
                .map(|f| f.named())
                .unwrap_or([("", None); 11]);
            for col in &flag_columns {
                let v = named
                    .iter()
                    .find(|(name, _)| name == col)
                    .and_then(|(_, v)| *v);
                out.push(',');
                match v {
                    Some(true) => out.push('1'),
                    Some(false) => out.push('0'),
                    None => {}
                }
            }
        }
        out.push('\n');
    }
    out
}

/// Parses the `t` and `norm_F` columns back out of a trace CSV.
pub fn parse_trace_csv(text: &str) -> Option<Vec<(usize, f64)>> {
    let mut lines = text.lines();
    let header = lines.next()?;
    let cols: Vec<&str> = header.split(',').collect();
    let t_idx = cols.iter().position(|c| *c == "t")?;
    let nf_idx = cols.iter().position(|c| *c == "norm_F")?;
    let mut out = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let t = fields.get(t_idx)?.parse().ok()?;
        let nf = fields.get(nf_idx)?.parse().ok()?;
        out.push((t, nf));
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_is_stable() {
        assert_eq!(fnv1a64(b""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(fnv1a64(b"a"), fnv1a64(b"a"));
        assert_ne!(fnv1a64(b"a"), fnv1a64(b"b"));
    }

    #[test]
    fn float_formatting_roundtrips() {
        for v in [0.5, 1.0 / 3.0, 1e-300, 2.225e-308, 1.7976931348623157e308] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
    }
}

//! Line-oriented trace files.
//!
//! ```text
//! #vne-trace v1 F=12 T=12 K=3 seed=7 horizon=1000
//! 0,0,2,1,3,11
//! 0,1,1,2,2,4
//! ```
//!
//! Records are `slot,id,p,f,td,d` sorted by `(slot, id)`.

use std::collections::HashSet;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::Path;

use thiserror::Error;
use vne_core::traffic::{TraceHeader, TrafficError};
use vne_core::{NetworkId, SubstrateDims, Trace, VnRequest};

const MAGIC: &str = "#vne-trace v1";

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Invalid { line: usize, source: TrafficError },
    #[error("trace file is empty")]
    MissingHeader,
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        message: message.into(),
    }
}

pub fn write_trace(trace: &Trace, mut out: impl Write) -> io::Result<()> {
    let h = trace.header();
    writeln!(
        out,
        "{MAGIC} F={} T={} K={} seed={} horizon={}",
        h.dims.f_blocks(),
        h.dims.t_blocks(),
        h.priority_levels,
        h.seed,
        h.horizon
    )?;
    for r in trace.requests() {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.arrival_slot, r.id, r.priority, r.f, r.td, r.duration
        )?;
    }
    Ok(())
}

pub fn save_trace(trace: &Trace, path: &Path) -> io::Result<()> {
    let mut buf = Vec::new();
    write_trace(trace, &mut buf)?;
    fs::write(path, buf)
}

fn parse_header(line: &str) -> Result<TraceHeader, ParseError> {
    let rest = line
        .strip_prefix(MAGIC)
        .ok_or_else(|| syntax(1, format!("expected header starting with `{MAGIC}`")))?;
    let (mut f, mut t, mut k, mut seed, mut horizon) = (None, None, None, None, None);
    for field in rest.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| syntax(1, format!("header field `{field}` is not key=value")))?;
        let num = |v: &str| {
            v.parse::<u64>()
                .map_err(|_| syntax(1, format!("header field `{field}` is not an integer")))
        };
        match key {
            "F" => f = Some(num(value)?),
            "T" => t = Some(num(value)?),
            "K" => k = Some(num(value)?),
            "seed" => seed = Some(num(value)?),
            "horizon" => horizon = Some(num(value)?),
            _ => return Err(syntax(1, format!("unknown header field `{key}`"))),
        }
    }
    let need = |v: Option<u64>, name: &str| v.ok_or_else(|| syntax(1, format!("header is missing {name}")));
    let dims =
        SubstrateDims::new(need(f, "F")? as usize, need(t, "T")? as usize).map_err(|e| syntax(1, e.to_string()))?;
    let k = need(k, "K")?;
    if k == 0 || k > u32::MAX as u64 {
        return Err(syntax(1, "K must be a positive 32-bit integer"));
    }
    Ok(TraceHeader {
        dims,
        priority_levels: k as u32,
        seed: need(seed, "seed")?,
        horizon: need(horizon, "horizon")?,
    })
}

fn parse_record(line: usize, text: &str, header: &TraceHeader) -> Result<VnRequest, ParseError> {
    let fields: Vec<&str> = text.split(',').collect();
    if fields.len() != 6 {
        return Err(syntax(line, format!("expected 6 fields, found {}", fields.len())));
    }
    let num = |k: usize| {
        fields[k].trim().parse::<u64>().map_err(|_| {
            syntax(
                line,
                format!("field {} (`{}`) is not a non-negative integer", k + 1, fields[k]),
            )
        })
    };
    let small = |k: usize| {
        num(k).and_then(|v| u32::try_from(v).map_err(|_| syntax(line, format!("field {} is out of range", k + 1))))
    };
    let r = VnRequest {
        arrival_slot: num(0)?,
        id: NetworkId(num(1)?),
        priority: small(2)?,
        f: num(3)? as usize,
        td: num(4)? as usize,
        duration: small(5)?,
    };
    // single-record validation so the error can point at this line
    let probe = TraceHeader {
        horizon: header.horizon.max(r.arrival_slot + 1),
        ..*header
    };
    Trace::new(probe, vec![r]).map_err(|source| ParseError::Invalid { line, source })?;
    if r.arrival_slot >= header.horizon {
        return Err(syntax(
            line,
            format!("slot {} is not below the horizon {}", r.arrival_slot, header.horizon),
        ));
    }
    Ok(r)
}

pub fn read_trace(input: impl BufRead) -> Result<Trace, ParseError> {
    let mut lines = input.lines();
    let header = parse_header(&lines.next().ok_or(ParseError::MissingHeader)??)?;
    let mut requests = Vec::new();
    let mut last: Option<(u64, NetworkId)> = None;
    let mut ids = HashSet::new();
    for (k, text) in lines.enumerate() {
        let line = k + 2;
        let text = text?;
        if text.trim().is_empty() {
            continue;
        }
        let r = parse_record(line, &text, &header)?;
        let key = (r.arrival_slot, r.id);
        if last.is_some_and(|prev| prev >= key) {
            return Err(syntax(line, "records are not sorted by (slot, id)"));
        }
        last = Some(key);
        if !ids.insert(r.id) {
            return Err(ParseError::Invalid {
                line,
                source: TrafficError::DuplicateId(r.id),
            });
        }
        requests.push(r);
    }
    Trace::new(header, requests).map_err(|source| ParseError::Invalid { line: 0, source })
}

pub fn load_trace(path: &Path) -> Result<Trace, ParseError> {
    read_trace(io::BufReader::new(fs::File::open(path)?))
}

/// Parses a trace held in memory, e.g. one embedded in the binary.
pub fn parse_trace(text: &str) -> Result<Trace, ParseError> {
    read_trace(text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use vne_core::traffic::generate_trace;
    use vne_core::TrafficConfig;

    fn round_trip(trace: &Trace) -> Trace {
        let mut buf = Vec::new();
        write_trace(trace, &mut buf).unwrap();
        read_trace(buf.as_slice()).unwrap()
    }

    #[test]
    fn generated_trace_round_trips() {
        let trace = generate_trace(&TrafficConfig {
            horizon: 50,
            ..TrafficConfig::default_scenario(3)
        })
        .unwrap();
        assert_eq!(round_trip(&trace), trace);
    }

    #[test]
    fn empty_trace_is_header_only() {
        let trace = generate_trace(&TrafficConfig {
            horizon: 0,
            ..TrafficConfig::default_scenario(3)
        })
        .unwrap();
        let mut buf = Vec::new();
        write_trace(&trace, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "#vne-trace v1 F=12 T=12 K=3 seed=3 horizon=0\n"
        );
        let back = round_trip(&trace);
        assert!(back.is_empty());
        assert_eq!(back, trace);
    }

    #[test]
    fn zero_duration_reports_line() {
        let text = "#vne-trace v1 F=5 T=5 K=1 seed=0 horizon=3\n1,0,1,2,3,1\n1,1,1,2,3,0\n";
        match parse_trace(text) {
            Err(ParseError::Invalid { line: 3, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_inputs() {
        let head = "#vne-trace v1 F=5 T=5 K=1 seed=0 horizon=3\n";
        let cases = [
            ("", None),
            ("#vne-trace v2 F=5 T=5 K=1 seed=0 horizon=3\n", Some(1)),
            ("#vne-trace v1 F=5 T=5 seed=0 horizon=3\n", Some(1)),
            ("#vne-trace v1 F=0 T=5 K=1 seed=0 horizon=3\n", Some(1)),
            ("1,0,1,2\n", Some(2)),
            ("1,0,1,2,x,1\n", Some(2)),
            ("1,0,2,2,2,1\n", Some(2)),
            ("1,0,1,6,2,1\n", Some(2)),
            ("3,0,1,1,1,1\n", Some(2)),
            ("1,1,1,1,1,1\n1,0,1,1,1,1\n", Some(3)),
            ("1,0,1,1,1,1\n2,0,1,1,1,1\n", Some(3)),
        ];
        for (body, line) in cases {
            let text = if line == Some(1) || line.is_none() {
                body.to_string()
            } else {
                format!("{head}{body}")
            };
            let err = parse_trace(&text).unwrap_err();
            let got = match err {
                ParseError::Syntax { line, .. } | ParseError::Invalid { line, .. } => Some(line),
                ParseError::MissingHeader => None,
                ParseError::Io(e) => panic!("{e}"),
            };
            assert_eq!(got, line, "{text:?}");
        }
    }
}

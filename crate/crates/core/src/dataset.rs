//! Labeled segment datasets: pool sampling, oracle labeling and the text
//! file format (a descriptor block followed by a `LABEL` line per record).

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::content_space::{parse_block, sample_segment, AttributeRanges, ElementCaps, Fields, SegmentDescriptor};
use crate::error::{Error, Result};
use crate::oracle::{annotate_clean, OracleConfig, Quality, QualityLabel, Reason};
use crate::{rules, seed};

pub const DATASET_HEADER: &str = "CPDATA v1";

#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub segment: SegmentDescriptor,
    pub label: QualityLabel,
}

/// Outcome of pool sampling.
#[derive(Clone, Debug)]
pub struct Pool {
    pub segments: Vec<SegmentDescriptor>,
    /// Raw draws needed to collect the rule-clean segments.
    pub draws: u64,
}

impl Pool {
    pub fn retention(&self) -> f64 {
        self.segments.len() as f64 / self.draws.max(1) as f64
    }
}

const CHUNK: u64 = 4096;

/// Draws segments uniformly (draw `i` uses seed stream `i` of `rng_seed`)
/// and keeps the first `n` that pass the conflict rules.
pub fn sample_pool(n: usize, rng_seed: u64, caps: &ElementCaps, ranges: &AttributeRanges) -> Pool {
    let mut segments = Vec::with_capacity(n);
    let mut next = 0u64;
    while segments.len() < n {
        let chunk: Vec<(u64, SegmentDescriptor)> = (next..next + CHUNK)
            .into_par_iter()
            .filter_map(|i| {
                let s = sample_segment(seed::derive(rng_seed, i), caps, ranges);
                rules::is_clean(&s).then_some((i, s))
            })
            .collect();
        for (i, s) in chunk {
            if segments.len() == n {
                return Pool { segments, draws: i };
            }
            segments.push(s);
        }
        next += CHUNK;
    }
    Pool { segments, draws: next }
}

/// Oracle labels for rule-clean segments.
pub fn label_all(segments: &[SegmentDescriptor], cfg: &OracleConfig) -> Result<Vec<QualityLabel>> {
    segments
        .par_iter()
        .map(|s| {
            s.validate()?;
            if !rules::is_clean(s) {
                return Err(Error::Conflicting(rules::check_conflicts(s).summary()));
            }
            Ok(annotate_clean(s, cfg))
        })
        .collect()
}

pub fn to_text(records: &[Record]) -> String {
    let mut s = format!("{DATASET_HEADER} n={}\n", records.len());
    for r in records {
        r.segment.write_text(&mut s);
        match r.label.quality() {
            Quality::High => s.push_str("LABEL high\n"),
            Quality::Low => {
                let reasons: Vec<&str> = r.label.reasons().iter().map(|r| r.name()).collect();
                let _ = writeln!(s, "LABEL low reasons={}", reasons.join(","));
            }
        }
    }
    s
}

fn parse_label(line: &str, lineno: usize) -> Result<QualityLabel> {
    let mut it = line.split_whitespace();
    if it.next() != Some("LABEL") {
        return Err(Error::parse(lineno, "expected LABEL line"));
    }
    let quality = it.next().and_then(Quality::from_name).ok_or_else(|| Error::parse(lineno, "LABEL needs high or low"))?;
    let rest = format!("LABEL {}", it.collect::<Vec<_>>().join(" "));
    let (_, mut f) = Fields::split(&rest, lineno)?;
    let label = match quality {
        Quality::High => QualityLabel::high(),
        Quality::Low => {
            let reasons = f
                .raw("reasons")?
                .split(',')
                .map(|r| Reason::from_name(r).ok_or_else(|| Error::parse(lineno, format!("unknown reason '{r}'"))))
                .collect::<Result<Vec<_>>>()?;
            QualityLabel::low(reasons)
        }
    };
    f.finish()?;
    if label.quality() != quality {
        return Err(Error::parse(lineno, "low label without reasons"));
    }
    Ok(label)
}

pub fn parse_text(text: &str) -> Result<Vec<Record>> {
    let lines: Vec<&str> = text.lines().collect();
    let header = lines.first().ok_or_else(|| Error::parse(1, "empty dataset"))?;
    let n: usize = header
        .strip_prefix(DATASET_HEADER)
        .and_then(|r| r.trim().strip_prefix("n="))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::parse(1, format!("expected '{DATASET_HEADER} n=<count>'")))?;
    let mut records = Vec::with_capacity(n);
    let mut i = 1;
    while i < lines.len() {
        if lines[i].trim().is_empty() {
            i += 1;
            continue;
        }
        let (segment, used) = parse_block(&lines[i..], i + 1)?;
        i += used;
        let line = lines.get(i).ok_or_else(|| Error::parse(i + 1, "missing LABEL line"))?;
        let label = parse_label(line, i + 1)?;
        i += 1;
        records.push(Record { segment, label });
    }
    if records.len() != n {
        return Err(Error::parse(1, format!("header says n={n}, found {} records", records.len())));
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pool_is_clean_and_deterministic() {
        let caps = ElementCaps::MAX;
        let r = AttributeRanges::default();
        let a = sample_pool(50, 9, &caps, &r);
        let b = sample_pool(50, 9, &caps, &r);
        assert_eq!(a.segments, b.segments);
        assert_eq!(a.draws, b.draws);
        assert_eq!(a.segments.len(), 50);
        assert!(a.segments.iter().all(rules::is_clean));
        assert!(a.retention() > 0.0 && a.retention() < 0.2);
    }

    #[test]
    fn text_round_trip() {
        let pool = sample_pool(40, 3, &ElementCaps::MAX, &AttributeRanges::default());
        let labels = label_all(&pool.segments, &OracleConfig::default()).unwrap();
        let records: Vec<Record> =
            pool.segments.into_iter().zip(labels).map(|(segment, label)| Record { segment, label }).collect();
        let text = to_text(&records);
        let back = parse_text(&text).unwrap();
        assert_eq!(back, records);
        assert_eq!(to_text(&back), text);
    }

    #[test]
    fn rejects_bad_labels() {
        let seg = SegmentDescriptor::empty(2).to_text();
        for bad in ["LABEL maybe", "LABEL low", "LABEL low reasons=", "LABEL low reasons=bogus", "LABEL high x=1"] {
            let text = format!("{DATASET_HEADER} n=1\n{seg}{bad}\n");
            assert!(parse_text(&text).is_err(), "{bad}");
        }
        let text = format!("{DATASET_HEADER} n=2\n{seg}LABEL high\n");
        assert!(parse_text(&text).is_err());
    }
}

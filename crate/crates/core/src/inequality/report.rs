//! Machine-readable check report: one CSV row per check.

use std::io::Write;

use serde::Serialize;

use super::Verdict;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub verdict: &'static str,
    pub seed: Option<u64>,
}

impl CheckRow {
    pub fn new(
        name: impl Into<String>,
        lhs: f64,
        rhs: f64,
        verdict: Verdict,
        seed: Option<u64>,
    ) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            margin: rhs - lhs,
            verdict: verdict.name(),
            seed,
        }
    }

    pub fn failed(&self) -> bool {
        self.verdict == Verdict::Fail.name()
    }
}

pub fn write_report<W: Write>(out: W, rows: &[CheckRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_rows() {
        let rows = [
            CheckRow::new("a", 1.0, 2.0, Verdict::Pass, Some(4)),
            CheckRow::new("b", 0.5, 0.0, Verdict::Fail, None),
        ];
        let mut buf = Vec::new();
        write_report(&mut buf, &rows).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("name,lhs,rhs,margin,verdict,seed"));
        assert_eq!(lines.next(), Some("a,1.0,2.0,1.0,pass,4"));
        assert_eq!(lines.next(), Some("b,0.5,0.0,-0.5,fail,"));
        assert!(rows[1].failed());
    }
}

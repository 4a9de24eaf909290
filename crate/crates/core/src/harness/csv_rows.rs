//! CSV layout for surface and sweep rows: `K,r,c,L,kind,region`, rationals as
//! reduced `p/q` strings. With `float` set, decimal `r_f,c_f,L_f` columns are
//! appended.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::analytics::SurfacePoint;
use crate::error::Result;
use crate::rational::{serde_q, to_f64, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowKind {
    Surface,
    Ocp,
    Ocm,
    Corner,
    Measured,
}

/// Whether `c` lies on the sloped envelope or in the flat region `c ≥ c*(r)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Envelope,
    Flat,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SurfaceRow {
    #[serde(rename = "K")]
    pub nodes: usize,
    #[serde(with = "serde_q")]
    pub r: Q,
    #[serde(with = "serde_q")]
    pub c: Q,
    #[serde(rename = "L", with = "serde_q")]
    pub l: Q,
    pub kind: RowKind,
    pub region: Region,
}

impl SurfaceRow {
    pub fn from_point(nodes: usize, p: &SurfacePoint, kind: RowKind) -> Self {
        SurfaceRow {
            nodes,
            r: p.r,
            c: p.c,
            l: p.l,
            kind,
            region: if p.flat {
                Region::Flat
            } else {
                Region::Envelope
            },
        }
    }
}

#[derive(Serialize)]
struct FloatRow<'a> {
    #[serde(flatten)]
    row: &'a SurfaceRow,
    r_f: f64,
    c_f: f64,
    #[serde(rename = "L_f")]
    l_f: f64,
}

pub fn write_rows<W: Write>(rows: &[SurfaceRow], float: bool, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if float {
        // Flattened structs need explicit headers with the csv crate.
        w.write_record(["K", "r", "c", "L", "kind", "region", "r_f", "c_f", "L_f"])?;
        for row in rows {
            let f = FloatRow {
                row,
                r_f: to_f64(&row.r),
                c_f: to_f64(&row.c),
                l_f: to_f64(&row.l),
            };
            w.write_record([
                f.row.nodes.to_string(),
                f.row.r.to_string(),
                f.row.c.to_string(),
                f.row.l.to_string(),
                kind_str(f.row.kind).into(),
                region_str(f.row.region).into(),
                f.r_f.to_string(),
                f.c_f.to_string(),
                f.l_f.to_string(),
            ])?;
        }
    } else {
        for row in rows {
            w.serialize(row)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn kind_str(k: RowKind) -> &'static str {
    match k {
        RowKind::Surface => "surface",
        RowKind::Ocp => "ocp",
        RowKind::Ocm => "ocm",
        RowKind::Corner => "corner",
        RowKind::Measured => "measured",
    }
}

fn region_str(r: Region) -> &'static str {
    match r {
        Region::Envelope => "envelope",
        Region::Flat => "flat",
    }
}

/// Reads rows back; decimal columns, if present, are ignored.
pub fn read_rows<R: Read>(input: R) -> Result<Vec<SurfaceRow>> {
    #[derive(Deserialize)]
    struct Loose {
        #[serde(rename = "K")]
        nodes: usize,
        r: String,
        c: String,
        #[serde(rename = "L")]
        l: String,
        kind: RowKind,
        region: Region,
    }
    let mut rd = csv::Reader::from_reader(input);
    rd.deserialize::<Loose>()
        .map(|row| {
            let row = row?;
            Ok(SurfaceRow {
                nodes: row.nodes,
                r: crate::rational::parse_q(&row.r)?,
                c: crate::rational::parse_q(&row.c)?,
                l: crate::rational::parse_q(&row.l)?,
                kind: row.kind,
                region: row.region,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn sample() -> Vec<SurfaceRow> {
        vec![
            SurfaceRow {
                nodes: 10,
                r: qi(2),
                c: q(9, 5),
                l: q(2, 5),
                kind: RowKind::Surface,
                region: Region::Flat,
            },
            SurfaceRow {
                nodes: 10,
                r: q(5, 2),
                c: qi(1),
                l: q(3, 4),
                kind: RowKind::Ocp,
                region: Region::Envelope,
            },
        ]
    }

    #[test]
    fn header_and_format() {
        let mut buf = Vec::new();
        write_rows(&sample(), false, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("K,r,c,L,kind,region"));
        assert_eq!(lines.next(), Some("10,2,9/5,2/5,surface,flat"));
        assert_eq!(lines.next(), Some("10,5/2,1,3/4,ocp,envelope"));
    }

    #[test]
    fn round_trip_with_and_without_floats() {
        for float in [false, true] {
            let mut buf = Vec::new();
            write_rows(&sample(), float, &mut buf).unwrap();
            assert_eq!(read_rows(buf.as_slice()).unwrap(), sample());
        }
        let mut buf = Vec::new();
        write_rows(&sample(), true, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text
            .starts_with("K,r,c,L,kind,region,r_f,c_f,L_f\n10,2,9/5,2/5,surface,flat,2,1.8,0.4"));
    }
}

//! Persistence diagrams and their CSV form.

use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A `(birth, death)` pair in homology degree `degree`. Essential classes have
/// `death == f64::INFINITY`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagramPoint {
    pub degree: usize,
    pub birth: f64,
    pub death: f64,
}

impl DiagramPoint {
    pub fn new(degree: usize, birth: f64, death: f64) -> Self {
        DiagramPoint { degree, birth, death }
    }

    pub fn is_essential(&self) -> bool {
        self.death == f64::INFINITY
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    /// Whether the class is alive at level `lambda`: `birth <= lambda < death`.
    pub fn alive_at(&self, lambda: f64) -> bool {
        self.birth <= lambda && lambda < self.death
    }
}

/// Multiset of diagram points across all degrees.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PersistenceDiagram {
    points: Vec<DiagramPoint>,
}

impl PersistenceDiagram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a diagram, validating every point.
    pub fn from_points(points: impl IntoIterator<Item = DiagramPoint>) -> Result<Self> {
        let mut d = Self::new();
        for p in points {
            d.push(p)?;
        }
        Ok(d)
    }

    pub fn push(&mut self, p: DiagramPoint) -> Result<()> {
        if !p.birth.is_finite() || p.death.is_nan() || p.death == f64::NEG_INFINITY {
            return Err(Error::Domain(format!("invalid diagram point ({}, {})", p.birth, p.death)));
        }
        if p.birth >= p.death {
            return Err(Error::Domain(format!(
                "diagram point must satisfy birth < death, got ({}, {})",
                p.birth, p.death
            )));
        }
        self.points.push(p);
        Ok(())
    }

    pub(crate) fn push_unchecked(&mut self, p: DiagramPoint) {
        debug_assert!(p.birth < p.death);
        self.points.push(p);
    }

    pub fn points(&self) -> &[DiagramPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn degree(&self, s: usize) -> impl Iterator<Item = &DiagramPoint> + '_ {
        self.points.iter().filter(move |p| p.degree == s)
    }

    pub fn finite(&self, s: usize) -> impl Iterator<Item = &DiagramPoint> + '_ {
        self.degree(s).filter(|p| !p.is_essential())
    }

    pub fn essential(&self, s: usize) -> impl Iterator<Item = &DiagramPoint> + '_ {
        self.degree(s).filter(|p| p.is_essential())
    }

    /// Largest degree carrying a point, if any.
    pub fn max_degree(&self) -> Option<usize> {
        self.points.iter().map(|p| p.degree).max()
    }

    /// Number of classes of degree `s` alive at `lambda`.
    pub fn betti_at(&self, s: usize, lambda: f64) -> usize {
        self.degree(s).filter(|p| p.alive_at(lambda)).count()
    }

    /// Points ordered by `(degree, birth, death)`.
    pub fn sorted(&self) -> Self {
        let mut points = self.points.clone();
        points.sort_by(|a, b| {
            a.degree
                .cmp(&b.degree)
                .then(a.birth.total_cmp(&b.birth))
                .then(a.death.total_cmp(&b.death))
        });
        PersistenceDiagram { points }
    }

    /// Applies `f` to every birth and finite death.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        let points = self
            .points
            .iter()
            .map(|p| {
                let death = if p.is_essential() { p.death } else { f(p.death) };
                DiagramPoint::new(p.degree, f(p.birth), death)
            })
            .collect();
        PersistenceDiagram { points }
    }

    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["degree", "birth", "death"])?;
        for p in &self.points {
            w.write_record([p.degree.to_string(), fmt_value(p.birth), fmt_value(p.death)])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: io::Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let headers = r.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["degree", "birth", "death"] {
            return Err(Error::Parse(format!(
                "diagram CSV header must be degree,birth,death, found {}",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut d = Self::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let degree = rec[0]
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("row {}: degree: {e}", line + 1)))?;
            let birth = parse_value(&rec[1])
                .ok_or_else(|| Error::Parse(format!("row {}: bad birth {:?}", line + 1, &rec[1])))?;
            let death = parse_value(&rec[2])
                .ok_or_else(|| Error::Parse(format!("row {}: bad death {:?}", line + 1, &rec[2])))?;
            d.push(DiagramPoint::new(degree, birth, death))
                .map_err(|e| Error::Parse(format!("row {}: {e}", line + 1)))?;
        }
        Ok(d)
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn read_csv_file(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

/// Shortest round-trip decimal, with `inf` for positive infinity.
pub fn fmt_value(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{v}")
    }
}

pub fn parse_value(s: &str) -> Option<f64> {
    match s.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => Some(f64::INFINITY),
        "-inf" | "-infinity" => Some(f64::NEG_INFINITY),
        other => other.parse::<f64>().ok().filter(|v| v.is_finite()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn csv_writes_inf_literal() {
        let d = PersistenceDiagram::from_points([
            DiagramPoint::new(0, -1.0, f64::INFINITY),
            DiagramPoint::new(0, 0.0, 2.0),
            DiagramPoint::new(1, 0.25, 0.5),
        ])
        .unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "degree,birth,death\n0,-1,inf\n0,0,2\n1,0.25,0.5\n");
        assert_eq!(PersistenceDiagram::read_csv(text.as_bytes()).unwrap(), d);
    }

    #[test]
    fn rejects_bad_points_and_headers() {
        assert!(PersistenceDiagram::from_points([DiagramPoint::new(0, 1.0, 1.0)]).is_err());
        assert!(PersistenceDiagram::from_points([DiagramPoint::new(0, 2.0, 1.0)]).is_err());
        assert!(PersistenceDiagram::read_csv("a,b,c\n".as_bytes()).is_err());
        assert!(PersistenceDiagram::read_csv("degree,birth,death\n0,x,1\n".as_bytes()).is_err());
        assert!(PersistenceDiagram::read_csv("degree,birth,death\n0,inf,inf\n".as_bytes()).is_err());
    }

    #[test]
    fn empty_diagram_is_header_only() {
        let mut buf = Vec::new();
        PersistenceDiagram::new().write_csv(&mut buf).unwrap();
        assert_eq!(buf, b"degree,birth,death\n");
        assert!(PersistenceDiagram::read_csv(&buf[..]).unwrap().is_empty());
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_exact(pts in proptest::collection::vec(
            (0usize..3, -1e3f64..1e3, 1e-9f64..1e3, any::<bool>()), 0..20)) {
            let d = PersistenceDiagram::from_points(pts.iter().map(|&(s, b, l, ess)| {
                DiagramPoint::new(s, b, if ess { f64::INFINITY } else { b + l })
            })).unwrap();
            let mut buf = Vec::new();
            d.write_csv(&mut buf).unwrap();
            prop_assert_eq!(PersistenceDiagram::read_csv(&buf[..]).unwrap(), d);
        }
    }
}

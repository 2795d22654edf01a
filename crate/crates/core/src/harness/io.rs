//! File formats: market/bids/schedule/certificate JSON and trajectory CSV.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::dynamics::{ActivationSchedule, Trajectory};
use crate::market::{BidProfile, MarketInstance};
use crate::{Error, Result};

/// Reals in CSV output carry 17 significant digits, enough to round-trip
/// any `f64`.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn load_market(path: &Path) -> Result<MarketInstance> {
    read_json(path)
}

pub fn save_market(path: &Path, market: &MarketInstance) -> Result<()> {
    write_json(path, market)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum BidsFile {
    Rows(BidProfile),
    Wrapped { bids: BidProfile },
}

/// Reads a bid profile stored either as an array of rows or as any object
/// with a `"bids"` field (such as a certificate).
pub fn load_bids(path: &Path) -> Result<BidProfile> {
    Ok(match read_json::<BidsFile>(path)? {
        BidsFile::Rows(b) | BidsFile::Wrapped { bids: b } => b,
    })
}

pub fn save_bids(path: &Path, bids: &BidProfile) -> Result<()> {
    write_json(path, bids)
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ScheduleFile {
    Steps(Vec<Vec<usize>>),
    WithLiveness {
        #[serde(rename = "T")]
        liveness: Option<usize>,
        steps: Vec<Vec<usize>>,
    },
}

/// Parses a schedule: an array with one array of buyer indices per step, or
/// `{"T": k, "steps": [...]}` to declare a liveness bound.
pub fn schedule_from_json(text: &str, n: usize) -> Result<ActivationSchedule> {
    match serde_json::from_str::<ScheduleFile>(text)? {
        ScheduleFile::Steps(steps) => ActivationSchedule::new(n, steps, None),
        ScheduleFile::WithLiveness { liveness, steps } => ActivationSchedule::new(n, steps, liveness),
    }
}

pub fn schedule_to_json(schedule: &ActivationSchedule) -> Result<String> {
    let steps = schedule.to_vecs();
    let file = match schedule.liveness() {
        Some(t) => ScheduleFile::WithLiveness { liveness: Some(t), steps },
        None => ScheduleFile::Steps(steps),
    };
    Ok(serde_json::to_string(&file)?)
}

pub fn load_schedule(path: &Path, n: usize) -> Result<ActivationSchedule> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    schedule_from_json(&text, n)
}

/// One row of a trajectory CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRow {
    pub t: usize,
    pub potential: f64,
    pub nsw: f64,
    pub distance: Option<f64>,
    pub prices: Vec<f64>,
}

impl TrajectoryRow {
    pub fn from_trajectory(traj: &Trajectory) -> Vec<TrajectoryRow> {
        traj.points
            .iter()
            .map(|p| TrajectoryRow {
                t: p.t,
                potential: p.potential,
                nsw: p.nsw,
                distance: p.distance,
                prices: p.prices.clone(),
            })
            .collect()
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Csv(e.to_string())
}

/// Writes `t,potential,nsw,distance,price_0,...,price_{m-1}`; the distance
/// cell is empty when no reference was supplied.
pub fn write_trajectory_csv<W: Write>(out: W, rows: &[TrajectoryRow]) -> Result<()> {
    let m = rows.first().map_or(0, |r| r.prices.len());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string(), "potential".into(), "nsw".into(), "distance".into()];
    header.extend((0..m).map(|j| format!("price_{j}")));
    w.write_record(&header).map_err(csv_err)?;
    for row in rows {
        let mut rec = vec![
            row.t.to_string(),
            format_real(row.potential),
            format_real(row.nsw),
            row.distance.map(format_real).unwrap_or_default(),
        ];
        rec.extend(row.prices.iter().map(|&p| format_real(p)));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))
}

pub fn read_trajectory_csv<R: std::io::Read>(input: R) -> Result<Vec<TrajectoryRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_err)?.clone();
    if header.len() < 4 || &header[0] != "t" || &header[1] != "potential" || &header[2] != "nsw" || &header[3] != "distance"
    {
        return Err(Error::Csv("not a trajectory CSV header".into()));
    }
    let real = |s: &str| s.parse::<f64>().map_err(|e| Error::Csv(format!("`{s}`: {e}")));
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        rows.push(TrajectoryRow {
            t: rec[0].parse().map_err(|e| Error::Csv(format!("`{}`: {e}", &rec[0])))?,
            potential: real(&rec[1])?,
            nsw: real(&rec[2])?,
            distance: if rec[3].is_empty() { None } else { Some(real(&rec[3])?) },
            prices: rec.iter().skip(4).map(real).collect::<Result<_>>()?,
        });
    }
    Ok(rows)
}

pub fn save_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_trajectory_csv(BufWriter::new(file), &TrajectoryRow::from_trajectory(traj))
}

pub fn load_trajectory_csv(path: &Path) -> Result<Vec<TrajectoryRow>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_trajectory_csv(BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::make_round_robin_schedule;

    #[test]
    fn real_format_has_17_significant_digits() {
        assert_eq!(format_real(0.1), "1.0000000000000001e-1");
        for x in [0.1, 1.0 / 3.0, 1e-300, 123456.789, 0.0] {
            assert_eq!(format_real(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn schedule_json_forms() {
        let s = schedule_from_json("[[0],[1],[0,1]]", 2).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.liveness(), None);
        let s = schedule_from_json(r#"{"T": 2, "steps": [[0],[1],[0]]}"#, 2).unwrap();
        assert_eq!(s.liveness(), Some(2));
        assert!(schedule_from_json(r#"{"T": 1, "steps": [[0],[1]]}"#, 2).is_err());
        assert!(schedule_from_json("[[3]]", 2).is_err());

        let rr = make_round_robin_schedule(3, 5);
        let back = schedule_from_json(&schedule_to_json(&rr).unwrap(), 3).unwrap();
        assert_eq!(back, rr);
    }

    #[test]
    fn trajectory_csv_round_trip() {
        let rows = vec![
            TrajectoryRow {
                t: 0,
                potential: 0.1 + 0.2,
                nsw: 1.0 / 7.0,
                distance: None,
                prices: vec![0.3, 0.7],
            },
            TrajectoryRow {
                t: 10,
                potential: 2.0f64.ln(),
                nsw: 0.0,
                distance: Some(1e-17),
                prices: vec![std::f64::consts::PI / 10.0, 1.0 - std::f64::consts::PI / 10.0],
            },
        ];
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,potential,nsw,distance,price_0,price_1\n"));
        assert_eq!(read_trajectory_csv(buf.as_slice()).unwrap(), rows);
        assert!(read_trajectory_csv("a,b\n1,2\n".as_bytes()).is_err());
    }
}

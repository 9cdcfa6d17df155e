//! CSV ingest and CSV/JSON export.
//!
//! Input files have a header row and columns `y, w1..wp, z1..zq`; the header
//! names decide which block each column belongs to. Column names starting
//! with `w` go to `W`, names starting with `z` go to `Z`. Without any `z`
//! column the break regressor is a constant.

use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::inference::{BreakInference, ConfidenceSet, GlEstimate, MultipleBreakInference, SingleBreakInference};
use crate::limit_laws::PriorDensity;
use crate::ls::{CriterionProfile, SupWaldTest};
use crate::lrv::RegimeMoments;
use crate::model::{RegressionData, SegmentedFit};

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        match e.position() {
            Some(p) => Error::Parse {
                line: p.line() as usize,
                message: e.to_string(),
            },
            None => Error::Io(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Role {
    Y,
    W,
    Z,
}

fn role(name: &str, index: usize) -> Result<Role> {
    let n = name.trim().to_ascii_lowercase();
    if index == 0 {
        return if n == "y" {
            Ok(Role::Y)
        } else {
            Err(Error::Parse {
                line: 1,
                message: format!("first column must be y, found {name:?}"),
            })
        };
    }
    match n.chars().next() {
        Some('w') => Ok(Role::W),
        Some('z') => Ok(Role::Z),
        _ => Err(Error::Parse {
            line: 1,
            message: format!("column {name:?} is neither a w nor a z regressor"),
        }),
    }
}

/// Reads `y, w.., z..` from CSV text.
pub fn read_data<R: Read>(reader: R) -> Result<RegressionData> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let roles: Vec<Role> = rdr
        .headers()?
        .iter()
        .enumerate()
        .map(|(i, h)| role(h, i))
        .collect::<Result<_>>()?;
    if roles.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "empty header".into(),
        });
    }
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); roles.len()];
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != roles.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", roles.len(), record.len()),
            });
        }
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("field {} is not a number: {field:?}", j + 1),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("field {} is not finite", j + 1),
                });
            }
            cols[j].push(v);
        }
    }
    let t = cols[0].len();
    let pick = |r: Role| -> Vec<Vec<f64>> {
        roles
            .iter()
            .zip(&cols)
            .filter(|(x, _)| **x == r)
            .map(|(_, c)| c.clone())
            .collect()
    };
    let w = pick(Role::W);
    let mut z = pick(Role::Z);
    if z.is_empty() {
        z.push(vec![1.0; t]);
    }
    RegressionData::from_columns(cols.swap_remove(0), &w, &z)
}

pub fn read_data_file(path: &Path) -> Result<RegressionData> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_data(std::io::BufReader::new(file))
}

fn write_csv<W: Write, S: Serialize>(writer: W, rows: impl IntoIterator<Item = S>) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct ProfileRow {
    date: usize,
    q_value: f64,
    ssr: f64,
}

#[derive(Serialize)]
struct PmfRow {
    date: usize,
    pmf: f64,
}

#[derive(Serialize)]
struct PriorRow {
    date: usize,
    prob: f64,
}

#[derive(Serialize)]
struct DrawRow {
    draw: f64,
}

/// `date,q_value,ssr`
pub fn write_profile<W: Write>(writer: W, profile: &CriterionProfile) -> Result<()> {
    write_csv(
        writer,
        profile
            .dates
            .iter()
            .zip(&profile.q_values)
            .zip(&profile.ssr_values)
            .map(|((&date, &q_value), &ssr)| ProfileRow { date, q_value, ssr }),
    )
}

/// `date,pmf`
pub fn write_pmf<W: Write>(writer: W, dates: &[usize], pmf: &[f64]) -> Result<()> {
    write_csv(writer, dates.iter().zip(pmf).map(|(&date, &pmf)| PmfRow { date, pmf }))
}

/// `date,prob`
pub fn write_prior<W: Write>(writer: W, prior: &PriorDensity) -> Result<()> {
    write_csv(
        writer,
        prior.support.iter().zip(&prior.pmf).map(|(&date, &prob)| PriorRow { date, prob }),
    )
}

/// One draw per row under a `draw` header.
pub fn write_draws<W: Write>(writer: W, draws: &[f64]) -> Result<()> {
    write_csv(writer, draws.iter().map(|&draw| DrawRow { draw }))
}

/// Moments reported in JSON.
#[derive(Debug, Clone, Serialize)]
pub struct MomentsReport {
    pub xi_e: f64,
    pub xi_z: f64,
    pub sigma2_1: f64,
    pub sigma2_2: f64,
    pub clipped: bool,
}

impl From<&RegimeMoments> for MomentsReport {
    fn from(m: &RegimeMoments) -> Self {
        Self {
            xi_e: m.xi_e,
            xi_z: m.xi_z,
            sigma2_1: m.sigma2_1,
            sigma2_2: m.sigma2_2,
            clipped: m.clipped,
        }
    }
}

/// JSON summary of inference on one break.
#[derive(Debug, Clone, Serialize)]
pub struct BreakReport {
    pub index: usize,
    pub ls_date: usize,
    pub delta_hat: Vec<f64>,
    /// `null` when the fit is exact.
    pub scale_factor: Option<f64>,
    pub moments: Option<MomentsReport>,
    pub prior_dropped: usize,
    pub non_integrable_paths: usize,
    pub estimates: Vec<GlEstimate>,
    pub hdr: ConfidenceSet,
    pub bai: ConfidenceSet,
    pub dates: Vec<usize>,
    pub pmf: Vec<f64>,
}

impl From<&BreakInference> for BreakReport {
    fn from(b: &BreakInference) -> Self {
        Self {
            index: b.index,
            ls_date: b.ls_date,
            delta_hat: b.profile.delta_hat.clone(),
            scale_factor: b.scale_factor.is_finite().then_some(b.scale_factor),
            moments: b.moments.as_ref().map(MomentsReport::from),
            prior_dropped: b.prior.dropped,
            non_integrable_paths: b.argmax_sample.as_ref().map_or(0, |s| s.non_integrable_paths),
            estimates: b.estimates.clone(),
            hdr: b.hdr.clone(),
            bai: b.bai.clone(),
            dates: b.posterior.dates.clone(),
            pmf: b.posterior.pmf.clone(),
        }
    }
}

/// Top-level JSON document of `infer`.
#[derive(Debug, Clone, Serialize)]
pub struct InferenceReport {
    pub t: usize,
    pub fit: SegmentedFit,
    pub breaks: Vec<BreakReport>,
    pub sup_wald: Option<SupWaldTest>,
    pub seed: u64,
}

impl InferenceReport {
    pub fn single(t: usize, out: &SingleBreakInference, seed: u64) -> Self {
        Self {
            t,
            fit: out.fit.clone(),
            breaks: vec![BreakReport::from(&out.inference)],
            sup_wald: out.supwald.clone(),
            seed,
        }
    }

    pub fn multiple(t: usize, out: &MultipleBreakInference, seed: u64) -> Self {
        Self {
            t,
            fit: out.fit.clone(),
            breaks: out.breaks.iter().map(BreakReport::from).collect(),
            sup_wald: None,
            seed,
        }
    }
}

/// Pretty JSON followed by a newline.
pub fn write_json<W: Write, S: Serialize>(mut writer: W, value: &S) -> Result<()> {
    serde_json::to_writer_pretty(&mut writer, value)?;
    writer.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_columns_by_role() {
        let mut text = String::from("y, w1, z1\n");
        for i in 0..8 {
            text.push_str(&format!("{}, {}, {}\n", i, (i * i) % 5, 10 + i));
        }
        let d = read_data(text.as_bytes()).unwrap();
        assert_eq!(d.len(), 8);
        assert_eq!((d.p(), d.q()), (1, 1));
        assert_eq!(d.w()[(3, 0)], 4.0);
        assert_eq!(d.z()[(1, 0)], 11.0);
    }

    #[test]
    fn y_only_gets_a_constant() {
        let d = read_data("y\n1\n2\n3\n4\n5\n".as_bytes()).unwrap();
        assert_eq!((d.p(), d.q()), (0, 1));
        assert!(d.z().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn bad_rows_report_their_line() {
        let err = read_data("y\n1\n2\nabc\n4\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err:?}");
        let err = read_data("y,z1\n1,1\n2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        let err = read_data("x\n1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn csv_exports_have_headers() {
        let mut buf = Vec::new();
        write_pmf(&mut buf, &[3, 4], &[0.25, 0.75]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "date,pmf\n3,0.25\n4,0.75\n");
        let mut buf = Vec::new();
        write_prior(&mut buf, &PriorDensity::uniform(&[1, 2])).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("date,prob\n1,0.5\n"));
        let mut buf = Vec::new();
        write_draws(&mut buf, &[-1.5]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "draw\n-1.5\n");
    }
}

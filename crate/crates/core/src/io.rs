//! File formats: JSON specifications of systems and offspring laws, cloud CSV
//! and binary PGM rasters.

use std::io::{Read, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::galton_watson::OffspringDistribution;
use crate::geometry::PointCloud;
use crate::similarity::{Ifs, OpenBox, SimilarityMap};
use crate::symbols::Subset;

/// Parses JSON, reporting the path of the offending field on failure.
pub fn from_json_str<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OrthogonalSpec {
    /// The string `"identity"`.
    Named(String),
    /// Rows of the matrix.
    Rows(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub ratio: f64,
    #[serde(default)]
    pub orthogonal: Option<OrthogonalSpec>,
    pub translation: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PercolationSpec {
    pub base: usize,
    pub dim: usize,
}

/// A system given explicitly, by a named preset, or as a percolation grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IfsSpec {
    Explicit {
        dim: usize,
        maps: Vec<MapSpec>,
        #[serde(default)]
        osc_box: Option<BoxSpec>,
    },
    Preset {
        preset: String,
    },
    Percolation {
        percolation: PercolationSpec,
    },
}

fn build_map(dim: usize, index: usize, spec: &MapSpec) -> Result<SimilarityMap> {
    let at = |m: String| Error::Parse {
        path: format!("maps[{index}]"),
        message: m,
    };
    if spec.translation.len() != dim {
        return Err(at(format!(
            "translation has {} coordinates, expected {dim}",
            spec.translation.len()
        )));
    }
    let orthogonal = match &spec.orthogonal {
        None => None,
        Some(OrthogonalSpec::Named(n)) if n == "identity" => None,
        Some(OrthogonalSpec::Named(n)) => {
            return Err(at(format!("unknown orthogonal part \"{n}\"")))
        }
        Some(OrthogonalSpec::Rows(rows)) => {
            if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                return Err(at(format!("orthogonal part must be {dim}×{dim}")));
            }
            Some(rows.concat())
        }
    };
    SimilarityMap::new(spec.ratio, orthogonal, spec.translation.clone())
        .map_err(|e| at(e.to_string()))
}

impl IfsSpec {
    pub fn build(&self) -> Result<Ifs> {
        match self {
            IfsSpec::Explicit { dim, maps, osc_box } => {
                let maps = maps
                    .iter()
                    .enumerate()
                    .map(|(i, m)| build_map(*dim, i, m))
                    .collect::<Result<Vec<_>>>()?;
                let osc = osc_box
                    .as_ref()
                    .map(|b| OpenBox::new(b.lo.clone(), b.hi.clone()))
                    .transpose()?;
                Ifs::new(maps, osc)
            }
            IfsSpec::Preset { preset } => match preset.as_str() {
                "cantor" => Ok(Ifs::cantor()),
                "unit_interval" => Ok(Ifs::unit_interval()),
                other => Err(Error::Parse {
                    path: "preset".into(),
                    message: format!("unknown preset \"{other}\" (known: cantor, unit_interval)"),
                }),
            },
            IfsSpec::Percolation { percolation } => {
                Ifs::percolation(percolation.base, percolation.dim)
            }
        }
    }

    /// The explicit form of a system.
    pub fn from_ifs(ifs: &Ifs) -> IfsSpec {
        let d = ifs.dim();
        IfsSpec::Explicit {
            dim: d,
            maps: ifs
                .maps()
                .iter()
                .map(|m| MapSpec {
                    ratio: m.ratio(),
                    orthogonal: m
                        .orthogonal()
                        .map(|o| OrthogonalSpec::Rows(o.chunks(d).map(|r| r.to_vec()).collect())),
                    translation: m.translation().to_vec(),
                })
                .collect(),
            osc_box: ifs.osc_box().map(|b| BoxSpec {
                lo: b.lo.clone(),
                hi: b.hi.clone(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub subset: Subset,
    pub prob: f64,
}

/// An offspring law by its atoms, as percolation with retention `p`, or as a
/// fixed child set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OffspringSpec {
    Atoms { atoms: Vec<AtomSpec> },
    Binomial { binomial_p: f64 },
    Deterministic { deterministic: Subset },
}

impl OffspringSpec {
    pub fn build(&self, alphabet: usize) -> Result<OffspringDistribution> {
        match self {
            OffspringSpec::Atoms { atoms } => OffspringDistribution::new(
                alphabet,
                atoms.iter().map(|a| (a.subset, a.prob)).collect(),
            ),
            OffspringSpec::Binomial { binomial_p } => {
                OffspringDistribution::binomial(alphabet, *binomial_p)
            }
            OffspringSpec::Deterministic { deterministic } => {
                OffspringDistribution::deterministic(alphabet, *deterministic)
            }
        }
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Parse {
        path: "csv".into(),
        message: e.to_string(),
    }
}

/// Writes a cloud as CSV: a record `ambient_dim,epsilon`, its values, a
/// coordinate header `x0,x1,…` and one record per point.
pub fn write_cloud_csv<W: Write>(cloud: &PointCloud, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    let wrap = |r: csv::Result<()>| r.map_err(csv_error);
    wrap(w.write_record(["ambient_dim", "epsilon"]))?;
    wrap(w.write_record([cloud.dim().to_string(), cloud.epsilon().to_string()]))?;
    wrap(w.write_record((0..cloud.dim()).map(|k| format!("x{k}"))))?;
    for p in cloud.points() {
        wrap(w.write_record(p.iter().map(|x| x.to_string())))?;
    }
    w.flush().map_err(|e| Error::Parse {
        path: "csv".into(),
        message: e.to_string(),
    })
}

pub fn read_cloud_csv<R: Read>(input: R) -> Result<PointCloud> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let mut records = r.records();
    let mut next = |what: &str| -> Result<csv::StringRecord> {
        records
            .next()
            .ok_or_else(|| Error::Parse {
                path: what.into(),
                message: "missing record".into(),
            })?
            .map_err(csv_error)
    };
    let parse = |field: Option<&str>, path: &str| -> Result<f64> {
        field
            .and_then(|f| f.trim().parse::<f64>().ok())
            .ok_or_else(|| Error::Parse {
                path: path.into(),
                message: format!("bad number {field:?}"),
            })
    };
    next("header")?;
    let meta = next("metadata")?;
    let dim = parse(meta.get(0), "ambient_dim")? as usize;
    let epsilon = parse(meta.get(1), "epsilon")?;
    next("coordinate header")?;
    let mut coords = Vec::new();
    for (i, rec) in records.enumerate() {
        let rec = rec.map_err(csv_error)?;
        if rec.len() != dim {
            return Err(Error::Parse {
                path: format!("point {i}"),
                message: format!("expected {dim} coordinates, found {}", rec.len()),
            });
        }
        for (k, f) in rec.iter().enumerate() {
            coords.push(parse(Some(f), &format!("point {i} coordinate {k}"))?);
        }
    }
    PointCloud::new(dim, coords, epsilon)
}

/// Binary PGM raster of a cloud of dimension 1 or 2 over the box `[lo, hi]`.
/// Occupied pixels are black on white; row 0 is the top (largest `y`).
pub fn render_pgm(
    cloud: &PointCloud,
    lo: [f64; 2],
    hi: [f64; 2],
    width: usize,
    height: usize,
) -> Result<Vec<u8>> {
    if cloud.dim() > 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: cloud.dim(),
        });
    }
    if width == 0 || height == 0 || !(hi[0] > lo[0]) || !(hi[1] > lo[1]) {
        return Err(Error::Domain(
            "raster needs a positive size and a nondegenerate box".into(),
        ));
    }
    let mut pixels = vec![255u8; width * height];
    for p in cloud.points() {
        let x = p[0];
        let y = if cloud.dim() == 2 {
            p[1]
        } else {
            0.5 * (lo[1] + hi[1])
        };
        let fx = (x - lo[0]) / (hi[0] - lo[0]);
        let fy = (y - lo[1]) / (hi[1] - lo[1]);
        if !(0.0..=1.0).contains(&fx) || !(0.0..=1.0).contains(&fy) {
            continue;
        }
        let col = ((fx * width as f64) as usize).min(width - 1);
        let row = height - 1 - ((fy * height as f64) as usize).min(height - 1);
        pixels[row * width + col] = 0;
    }
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(&pixels);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_ifs_round_trip() {
        let text = r#"{"dim": 1, "maps": [
            {"ratio": 0.3333333333333333, "orthogonal": "identity", "translation": [0.0]},
            {"ratio": 0.3333333333333333, "translation": [0.6666666666666666]}],
            "osc_box": {"lo": [0.0], "hi": [1.0]}}"#;
        let ifs = from_json_str::<IfsSpec>(text).unwrap().build().unwrap();
        assert_eq!(ifs.len(), 2);
        let again = IfsSpec::from_ifs(&ifs).build().unwrap();
        assert_eq!(again, ifs);
    }

    #[test]
    fn rotation_rows_and_presets() {
        let text = r#"{"dim": 2, "maps": [
            {"ratio": 0.5, "orthogonal": [[0, -1], [1, 0]], "translation": [0.5, 0]}]}"#;
        let ifs = from_json_str::<IfsSpec>(text).unwrap().build().unwrap();
        assert!(!ifs.map(0).is_homothety());
        let c = from_json_str::<IfsSpec>(r#"{"preset": "cantor"}"#)
            .unwrap()
            .build()
            .unwrap();
        assert_eq!(c, Ifs::cantor());
        let p = from_json_str::<IfsSpec>(r#"{"percolation": {"base": 2, "dim": 2}}"#)
            .unwrap()
            .build()
            .unwrap();
        assert_eq!(p.len(), 4);
    }

    #[test]
    fn errors_carry_a_path() {
        let err = from_json_str::<IfsSpec>(
            r#"{"dim": 1, "maps": [{"ratio": 0.5, "translation": [0, 1]}]}"#,
        )
        .unwrap()
        .build()
        .unwrap_err();
        assert!(matches!(err, Error::Parse { ref path, .. } if path == "maps[0]"));
        let err = from_json_str::<OffspringSpec>(r#"{"atoms": [{"subset": [0], "prob": "x"}]}"#);
        assert!(err.is_err());
    }

    #[test]
    fn offspring_forms() {
        let w = from_json_str::<OffspringSpec>(
            r#"{"atoms": [{"subset": [0], "prob": 0.5}, {"subset": [0, 1], "prob": 0.5}]}"#,
        )
        .unwrap()
        .build(2)
        .unwrap();
        assert_eq!(w.probability(Subset(3)), 0.5);
        let b = from_json_str::<OffspringSpec>(r#"{"binomial_p": 0.7}"#)
            .unwrap()
            .build(4)
            .unwrap();
        assert!((b.mean() - 2.8).abs() < 1e-12);
        let d = from_json_str::<OffspringSpec>(r#"{"deterministic": [0, 1]}"#)
            .unwrap()
            .build(2)
            .unwrap();
        assert_eq!(d.support(), vec![Subset(3)]);
    }

    #[test]
    fn cloud_csv_round_trip() {
        let c = PointCloud::new(2, vec![0.1, 0.2, 1.0 / 3.0, 2.5e-17], 0.015625).unwrap();
        let mut buf = Vec::new();
        write_cloud_csv(&c, &mut buf).unwrap();
        assert!(String::from_utf8(buf.clone())
            .unwrap()
            .starts_with("ambient_dim,epsilon\n2,0.015625\nx0,x1\n"));
        assert_eq!(read_cloud_csv(buf.as_slice()).unwrap(), c);
    }

    #[test]
    fn pgm_header_and_pixels() {
        let c = PointCloud::new(2, vec![0.0, 0.0, 0.99, 0.99], 0.0).unwrap();
        let img = render_pgm(&c, [0.0, 0.0], [1.0, 1.0], 4, 4).unwrap();
        let header = b"P5\n4 4\n255\n";
        assert_eq!(&img[..header.len()], header);
        let px = &img[header.len()..];
        assert_eq!(px.iter().filter(|&&p| p == 0).count(), 2);
        assert_eq!(px[12], 0); // bottom-left
        assert_eq!(px[3], 0); // top-right
    }
}

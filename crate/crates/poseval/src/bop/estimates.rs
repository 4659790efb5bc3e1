//! BOP challenge result CSV: `scene_id,im_id,obj_id,score,R,t,time` with
//! R as 9 space-separated floats (row-major) and t as 3 (mm).

use super::{parse_mat3_row_major, BopError, EstimateRecord, MAX_ROTATION_DRIFT};
use crate::se3::RigidTransform;
use nalgebra::Vector3;
use std::io::Write;
use std::path::Path;

const HEADER: &str = "scene_id,im_id,obj_id,score,R,t,time";

pub fn load_estimates(path: &Path) -> Result<Vec<EstimateRecord>, BopError> {
    let content = std::fs::read_to_string(path).map_err(|e| BopError::io(path, e))?;
    let mut lines = content.lines().enumerate();

    let (_, first) = lines
        .next()
        .ok_or_else(|| BopError::EmptyFile(path.display().to_string()))?;
    let has_header = first.trim_start().starts_with("scene_id");
    let data_lines: Vec<(usize, &str)> = if has_header {
        lines.filter(|(_, l)| !l.trim().is_empty()).collect()
    } else {
        std::iter::once((0usize, first))
            .chain(lines)
            .filter(|(_, l)| !l.trim().is_empty())
            .collect()
    };
    if data_lines.is_empty() {
        return Err(BopError::EmptyFile(path.display().to_string()));
    }

    let mut records = Vec::with_capacity(data_lines.len());
    for (line_idx, line) in data_lines {
        let row = line_idx + 1; // 1-based, as editors show it
        let err = |detail: String| BopError::parse(path, format!("row {row}: {detail}"));
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(err(format!("expected 7 columns, got {}", fields.len())));
        }
        let scene_id: u64 = fields[0]
            .trim()
            .parse()
            .map_err(|_| err(format!("bad scene_id '{}'", fields[0])))?;
        let image_id: u64 = fields[1]
            .trim()
            .parse()
            .map_err(|_| err(format!("bad im_id '{}'", fields[1])))?;
        let object_id: u32 = fields[2]
            .trim()
            .parse()
            .map_err(|_| err(format!("bad obj_id '{}'", fields[2])))?;
        let score: f64 = fields[3]
            .trim()
            .parse()
            .map_err(|_| err(format!("bad score '{}'", fields[3])))?;
        let r_values = parse_floats(fields[4]).map_err(&err)?;
        if r_values.len() != 9 {
            return Err(err(format!("R has {} values, expected 9", r_values.len())));
        }
        let t_values = parse_floats(fields[5]).map_err(&err)?;
        if t_values.len() != 3 {
            return Err(err(format!("t has {} values, expected 3", t_values.len())));
        }
        let time: f64 = fields[6]
            .trim()
            .parse()
            .map_err(|_| err(format!("bad time '{}'", fields[6])))?;

        let pose = RigidTransform::renormalized(
            parse_mat3_row_major(&r_values),
            Vector3::new(t_values[0], t_values[1], t_values[2]),
            MAX_ROTATION_DRIFT,
        )
        .map_err(|e| err(e.to_string()))?;

        records.push(EstimateRecord {
            scene_id,
            image_id,
            object_id,
            score,
            pose,
            inference_time: time,
        });
    }
    Ok(records)
}

fn parse_floats(field: &str) -> Result<Vec<f64>, String> {
    field
        .split_whitespace()
        .map(|v| v.parse().map_err(|_| format!("bad float '{v}'")))
        .collect()
}

/// Writes records back in BOP result-CSV form. Floats use the shortest
/// round-trip representation, so load -> write -> load is lossless.
pub fn write_estimates(path: &Path, records: &[EstimateRecord]) -> Result<(), BopError> {
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(path).map_err(|e| BopError::io(path, e))?,
    );
    let mut write = |s: String| -> Result<(), BopError> {
        out.write_all(s.as_bytes()).map_err(|e| BopError::io(path, e))
    };
    write(format!("{HEADER}\n"))?;
    for rec in records {
        let r = rec.pose.rotation();
        let t = rec.pose.translation();
        let r_str = (0..3)
            .flat_map(|i| (0..3).map(move |j| format!("{}", r[(i, j)])))
            .collect::<Vec<_>>()
            .join(" ");
        write(format!(
            "{},{},{},{},{},{} {} {},{}\n",
            rec.scene_id, rec.image_id, rec.object_id, rec.score, r_str, t.x, t.y, t.z,
            rec.inference_time
        ))?;
    }
    Ok(())
}

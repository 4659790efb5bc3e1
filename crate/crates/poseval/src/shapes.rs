//! Surface-sampled primitive meshes for demo datasets and tests. The
//! surrogate estimates contact normals from vertex neighborhoods, so
//! these generators emit dense surface grids rather than corner-only
//! hulls.

use nalgebra::Vector3;
use std::io::Write;
use std::path::Path;

/// Axis-aligned box surface centered at the origin, sampled on a grid
/// with roughly `spacing` mm between points.
pub fn box_surface(size: Vector3<f64>, spacing: f64) -> Vec<Vector3<f64>> {
    let half = size / 2.0;
    let steps = |extent: f64| ((extent / spacing).ceil() as usize).max(2);
    let (nx, ny, nz) = (steps(size.x), steps(size.y), steps(size.z));
    let lin = |n: usize, h: f64, i: usize| -h + 2.0 * h * i as f64 / n as f64;
    let mut out = Vec::new();
    // x-faces
    for j in 0..=ny {
        for k in 0..=nz {
            for sx in [-half.x, half.x] {
                out.push(Vector3::new(sx, lin(ny, half.y, j), lin(nz, half.z, k)));
            }
        }
    }
    // y-faces (interior grid only, edges covered above)
    for i in 1..nx {
        for k in 0..=nz {
            for sy in [-half.y, half.y] {
                out.push(Vector3::new(lin(nx, half.x, i), sy, lin(nz, half.z, k)));
            }
        }
    }
    // z-faces
    for i in 1..nx {
        for j in 1..ny {
            for sz in [-half.z, half.z] {
                out.push(Vector3::new(lin(nx, half.x, i), lin(ny, half.y, j), sz));
            }
        }
    }
    out
}

/// Closed cylinder surface, axis along z, centered at the origin.
pub fn cylinder_surface(radius: f64, height: f64, spacing: f64) -> Vec<Vector3<f64>> {
    let n_around = ((2.0 * std::f64::consts::PI * radius / spacing).ceil() as usize).max(8);
    let n_height = ((height / spacing).ceil() as usize).max(2);
    let n_radial = ((radius / spacing).ceil() as usize).max(1);
    let mut out = Vec::new();
    for i in 0..n_around {
        let angle = 2.0 * std::f64::consts::PI * i as f64 / n_around as f64;
        let (s, c) = angle.sin_cos();
        for j in 0..=n_height {
            let z = -height / 2.0 + height * j as f64 / n_height as f64;
            out.push(Vector3::new(radius * c, radius * s, z));
        }
        // caps
        for r in 0..n_radial {
            let rr = radius * r as f64 / n_radial as f64;
            for z in [-height / 2.0, height / 2.0] {
                out.push(Vector3::new(rr * c, rr * s, z));
            }
        }
    }
    out
}

/// Ellipsoid surface (an "ergonomic bottle" stand-in), semi-axes in mm.
pub fn ellipsoid_surface(semi: Vector3<f64>, n_lat: usize, n_lon: usize) -> Vec<Vector3<f64>> {
    let mut out = Vec::new();
    for i in 0..=n_lat {
        let theta = std::f64::consts::PI * i as f64 / n_lat as f64;
        for j in 0..n_lon {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / n_lon as f64;
            out.push(Vector3::new(
                semi.x * theta.sin() * phi.cos(),
                semi.y * theta.sin() * phi.sin(),
                semi.z * theta.cos(),
            ));
        }
    }
    out
}

/// Writes vertices as an ASCII PLY file (positions only).
pub fn write_ascii_ply(path: &Path, vertices: &[Vector3<f64>]) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "ply")?;
    writeln!(out, "format ascii 1.0")?;
    writeln!(out, "element vertex {}", vertices.len())?;
    writeln!(out, "property float x")?;
    writeln!(out, "property float y")?;
    writeln!(out, "property float z")?;
    writeln!(out, "end_header")?;
    for v in vertices {
        writeln!(out, "{} {} {}", v.x, v.y, v.z)?;
    }
    Ok(())
}

//! Minimal PLY reader: vertex positions only, ASCII and
//! binary_little_endian variants.

use super::BopError;
use nalgebra::Vector3;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq)]
enum ScalarType {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl ScalarType {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "char" | "int8" => Self::I8,
            "uchar" | "uint8" => Self::U8,
            "short" | "int16" => Self::I16,
            "ushort" | "uint16" => Self::U16,
            "int" | "int32" => Self::I32,
            "uint" | "uint32" => Self::U32,
            "float" | "float32" => Self::F32,
            "double" | "float64" => Self::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Self::I8 | Self::U8 => 1,
            Self::I16 | Self::U16 => 2,
            Self::I32 | Self::U32 | Self::F32 => 4,
            Self::F64 => 8,
        }
    }

    fn read_le_f64(self, bytes: &[u8]) -> f64 {
        match self {
            Self::I8 => bytes[0] as i8 as f64,
            Self::U8 => bytes[0] as f64,
            Self::I16 => i16::from_le_bytes([bytes[0], bytes[1]]) as f64,
            Self::U16 => u16::from_le_bytes([bytes[0], bytes[1]]) as f64,
            Self::I32 => i32::from_le_bytes(bytes[..4].try_into().unwrap()) as f64,
            Self::U32 => u32::from_le_bytes(bytes[..4].try_into().unwrap()) as f64,
            Self::F32 => f32::from_le_bytes(bytes[..4].try_into().unwrap()) as f64,
            Self::F64 => f64::from_le_bytes(bytes[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug)]
struct Property {
    name: String,
    ty: ScalarType,
    is_list: bool,
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

#[derive(Debug, PartialEq)]
enum Format {
    Ascii,
    BinaryLittleEndian,
}

/// Reads vertex positions from a PLY file. Elements after `vertex` are
/// not consumed; list-typed elements before it are rejected.
pub fn parse_ply_vertices(path: &Path) -> Result<Vec<Vector3<f64>>, BopError> {
    let file = std::fs::File::open(path).map_err(|e| BopError::io(path, e))?;
    let mut reader = BufReader::new(file);

    let mut line = String::new();
    let mut read_line = |reader: &mut BufReader<std::fs::File>| -> Result<String, BopError> {
        line.clear();
        let n = reader
            .read_line(&mut line)
            .map_err(|e| BopError::io(path, e))?;
        if n == 0 {
            return Err(BopError::parse(path, "unexpected end of header"));
        }
        Ok(line.trim_end().to_string())
    };

    let magic = read_line(&mut reader)?;
    if magic.trim() != "ply" {
        return Err(BopError::parse(path, "missing 'ply' magic"));
    }

    let mut format = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let l = read_line(&mut reader)?;
        let l = l.trim();
        if l.is_empty() || l.starts_with("comment") || l.starts_with("obj_info") {
            continue;
        }
        if l == "end_header" {
            break;
        }
        let mut tokens = l.split_whitespace();
        match tokens.next() {
            Some("format") => {
                format = Some(match tokens.next() {
                    Some("ascii") => Format::Ascii,
                    Some("binary_little_endian") => Format::BinaryLittleEndian,
                    Some(other) => {
                        return Err(BopError::parse(
                            path,
                            format!("unsupported PLY format '{other}'"),
                        ))
                    }
                    None => return Err(BopError::parse(path, "format line missing variant")),
                });
            }
            Some("element") => {
                let name = tokens
                    .next()
                    .ok_or_else(|| BopError::parse(path, "element line missing name"))?;
                let count: usize = tokens
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| BopError::parse(path, "element line missing count"))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            Some("property") => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| BopError::parse(path, "property before any element"))?;
                let first = tokens
                    .next()
                    .ok_or_else(|| BopError::parse(path, "property line missing type"))?;
                if first == "list" {
                    // count type + value type + name
                    let _count_ty = tokens.next();
                    let _val_ty = tokens.next();
                    let name = tokens.next().unwrap_or("").to_string();
                    element.properties.push(Property {
                        name,
                        ty: ScalarType::U8,
                        is_list: true,
                    });
                } else {
                    let ty = ScalarType::parse(first).ok_or_else(|| {
                        BopError::parse(path, format!("unknown property type '{first}'"))
                    })?;
                    let name = tokens
                        .next()
                        .ok_or_else(|| BopError::parse(path, "property line missing name"))?
                        .to_string();
                    element.properties.push(Property {
                        name,
                        ty,
                        is_list: false,
                    });
                }
            }
            Some(other) => {
                return Err(BopError::parse(
                    path,
                    format!("unexpected header keyword '{other}'"),
                ))
            }
            None => {}
        }
    }

    let format = format.ok_or_else(|| BopError::parse(path, "header missing format line"))?;

    let mut vertices = Vec::new();
    for element in &elements {
        if element.name == "vertex" {
            let idx = |name: &str| -> Result<usize, BopError> {
                element
                    .properties
                    .iter()
                    .position(|p| p.name == name)
                    .ok_or_else(|| {
                        BopError::parse(path, format!("vertex element missing property '{name}'"))
                    })
            };
            let (xi, yi, zi) = (idx("x")?, idx("y")?, idx("z")?);
            if element.properties.iter().any(|p| p.is_list) {
                return Err(BopError::parse(path, "list property on vertex element"));
            }
            vertices.reserve(element.count);
            match format {
                Format::Ascii => {
                    let mut buf = String::new();
                    for row in 0..element.count {
                        buf.clear();
                        let n = reader
                            .read_line(&mut buf)
                            .map_err(|e| BopError::io(path, e))?;
                        if n == 0 {
                            return Err(BopError::parse(
                                path,
                                format!("vertex data truncated at row {row}"),
                            ));
                        }
                        let fields: Vec<&str> = buf.split_whitespace().collect();
                        if fields.len() < element.properties.len() {
                            return Err(BopError::parse(
                                path,
                                format!(
                                    "vertex row {row}: expected {} fields, got {}",
                                    element.properties.len(),
                                    fields.len()
                                ),
                            ));
                        }
                        let get = |i: usize| -> Result<f64, BopError> {
                            fields[i].parse().map_err(|_| {
                                BopError::parse(
                                    path,
                                    format!("vertex row {row}: bad float '{}'", fields[i]),
                                )
                            })
                        };
                        vertices.push(Vector3::new(get(xi)?, get(yi)?, get(zi)?));
                    }
                }
                Format::BinaryLittleEndian => {
                    let offsets: Vec<usize> = element
                        .properties
                        .iter()
                        .scan(0usize, |acc, p| {
                            let o = *acc;
                            *acc += p.ty.size();
                            Some(o)
                        })
                        .collect();
                    let record_size: usize =
                        element.properties.iter().map(|p| p.ty.size()).sum();
                    let mut record = vec![0u8; record_size];
                    for row in 0..element.count {
                        reader.read_exact(&mut record).map_err(|_| {
                            BopError::parse(path, format!("vertex data truncated at row {row}"))
                        })?;
                        let read = |i: usize| {
                            element.properties[i].ty.read_le_f64(&record[offsets[i]..])
                        };
                        vertices.push(Vector3::new(read(xi), read(yi), read(zi)));
                    }
                }
            }
            break;
        } else {
            // Skip a preceding element. Fixed-size records only; list
            // properties would need per-record length decoding.
            if element.properties.iter().any(|p| p.is_list) {
                return Err(BopError::parse(
                    path,
                    format!("list-typed element '{}' precedes vertex data", element.name),
                ));
            }
            match format {
                Format::Ascii => {
                    let mut buf = String::new();
                    for _ in 0..element.count {
                        buf.clear();
                        reader
                            .read_line(&mut buf)
                            .map_err(|e| BopError::io(path, e))?;
                    }
                }
                Format::BinaryLittleEndian => {
                    let record_size: usize =
                        element.properties.iter().map(|p| p.ty.size()).sum();
                    let mut skip = vec![0u8; record_size * element.count];
                    reader
                        .read_exact(&mut skip)
                        .map_err(|e| BopError::io(path, e))?;
                }
            }
        }
    }

    if vertices.is_empty() {
        return Err(BopError::parse(path, "no vertex element or zero vertices"));
    }
    Ok(vertices)
}

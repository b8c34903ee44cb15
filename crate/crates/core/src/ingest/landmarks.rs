use indexmap::IndexMap;

use super::{lf_lines, ParseError};
use crate::metrics::{LandmarkSet, Point2D, Scheme};

/// Landmark sets keyed by id, in file order.
pub type LandmarkTable = IndexMap<String, LandmarkSet>;

fn header_for(n: usize) -> String {
    let mut header = String::from("id");
    for i in 0..n {
        header.push_str(&format!(",x{i},y{i}"));
    }
    header
}

fn is_decimal(token: &str) -> bool {
    fn digits(s: &[u8]) -> usize {
        s.iter().take_while(|b| b.is_ascii_digit()).count()
    }
    let b = token.as_bytes();
    let mut i = usize::from(matches!(b.first(), Some(b'+' | b'-')));
    let int = digits(&b[i..]);
    if int == 0 {
        return false;
    }
    i += int;
    if b.get(i) == Some(&b'.') {
        let frac = digits(&b[i + 1..]);
        if frac == 0 {
            return false;
        }
        i += 1 + frac;
    }
    if matches!(b.get(i), Some(b'e' | b'E')) {
        i += 1;
        i += usize::from(matches!(b.get(i), Some(b'+' | b'-')));
        let exp = digits(&b[i..]);
        if exp == 0 {
            return false;
        }
        i += exp;
    }
    i == b.len()
}

/// Parses a landmark CSV for `scheme`; see the module docs for the grammar.
pub fn parse_landmark_csv(content: &str, scheme: &str) -> Result<LandmarkTable, ParseError> {
    let scheme = Scheme::from_id(scheme).map_err(|e| ParseError::new(1, e.to_string()))?;
    let lines = lf_lines(content)?;
    let Some(&(_, header)) = lines.first() else {
        return Err(ParseError::new(1, "missing header"));
    };
    let expected = header_for(scheme.num_points());
    if header != expected {
        let found = header.split(',').count().saturating_sub(1);
        return Err(ParseError::new(
            1,
            format!(
                "header does not match scheme `{}` ({} coordinates expected, header has {found} columns after id)",
                scheme.id(),
                2 * scheme.num_points()
            ),
        ));
    }

    let mut table = LandmarkTable::with_capacity(lines.len() - 1);
    for &(line, row) in &lines[1..] {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 1 + 2 * scheme.num_points() {
            return Err(ParseError::new(
                line,
                format!("expected {} coordinates, found {}", 2 * scheme.num_points(), fields.len() - 1),
            ));
        }
        let id = fields[0];
        if id.is_empty() {
            return Err(ParseError::at(line, 1, "empty id"));
        }
        let mut coords = Vec::with_capacity(fields.len() - 1);
        for (col, token) in fields.iter().enumerate().skip(1) {
            let value = is_decimal(token)
                .then(|| token.parse::<f64>().ok())
                .flatten()
                .filter(|v| v.is_finite())
                .ok_or_else(|| ParseError::at(line, col + 1, format!("invalid coordinate `{token}`")))?;
            coords.push(value);
        }
        let points = coords.chunks_exact(2).map(|c| Point2D::new(c[0], c[1])).collect();
        let set = LandmarkSet::with_scheme(scheme.clone(), points).map_err(|e| ParseError::new(line, e.to_string()))?;
        if table.insert(id.to_string(), set).is_some() {
            return Err(ParseError::at(line, 1, format!("duplicate id `{id}`")));
        }
    }
    Ok(table)
}

/// Writes a table in the landmark CSV format. Coordinates use the shortest
/// representation that parses back to the same `f64`.
pub fn write_landmark_csv(table: &LandmarkTable, scheme: &Scheme) -> String {
    let mut out = header_for(scheme.num_points());
    out.push('\n');
    for (id, set) in table {
        out.push_str(id);
        for p in set.points() {
            out.push_str(&format!(",{},{}", p.x, p.y));
        }
        out.push('\n');
    }
    out
}

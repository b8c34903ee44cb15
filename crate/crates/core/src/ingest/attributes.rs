use indexmap::IndexMap;
use serde_json::{Map, Value};

use super::{lf_lines, ParseError};

/// A raw attribute cell before aliasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AttrValue {
    /// `true` means the face has the attribute.
    Flag(bool),
    Label(String),
}

/// Attribute cells keyed by id (file order) and column. `None` is unknown.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AttributeTable {
    pub columns: Vec<String>,
    pub rows: IndexMap<String, Vec<Option<AttrValue>>>,
}

impl AttributeTable {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn get(&self, id: &str, column: usize) -> Option<&AttrValue> {
        self.rows.get(id).and_then(|row| row.get(column)).and_then(Option::as_ref)
    }
}

fn insert_row(
    table: &mut AttributeTable,
    line: usize,
    id: &str,
    row: Vec<Option<AttrValue>>,
) -> Result<(), ParseError> {
    if table.rows.insert(id.to_string(), row).is_some() {
        return Err(ParseError::at(line, 1, format!("duplicate id `{id}`")));
    }
    Ok(())
}

fn check_unique_columns(columns: &[String], line: usize) -> Result<(), ParseError> {
    for (i, c) in columns.iter().enumerate() {
        if columns[..i].contains(c) {
            return Err(ParseError::at(line, i + 1, format!("duplicate attribute name `{c}`")));
        }
    }
    Ok(())
}

/// CelebA `list_attr_celeba.txt` layout.
pub fn parse_celeba_attributes(content: &str) -> Result<AttributeTable, ParseError> {
    let mut lines = content.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, count_line) = lines.next().ok_or_else(|| ParseError::new(1, "missing record count"))?;
    let declared: usize = count_line
        .trim()
        .parse()
        .map_err(|_| ParseError::at(1, 1, format!("record count `{}` is not an integer", count_line.trim())))?;
    let (_, names) = lines.next().ok_or_else(|| ParseError::new(2, "missing attribute names"))?;
    let columns: Vec<String> = names.split_whitespace().map(String::from).collect();
    if columns.is_empty() {
        return Err(ParseError::new(2, "no attribute names"));
    }
    check_unique_columns(&columns, 2)?;

    let mut table = AttributeTable { columns, rows: IndexMap::with_capacity(declared) };
    for (line, text) in lines {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if tokens.len() != table.columns.len() + 1 {
            return Err(ParseError::new(
                line,
                format!("expected {} values, found {}", table.columns.len(), tokens.len() - 1),
            ));
        }
        let row = tokens[1..]
            .iter()
            .enumerate()
            .map(|(i, &tok)| match tok {
                "1" => Ok(Some(AttrValue::Flag(true))),
                "-1" => Ok(Some(AttrValue::Flag(false))),
                other => Err(ParseError::at(line, i + 2, format!("invalid value `{other}`, expected 1 or -1"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        insert_row(&mut table, line, tokens[0], row)?;
    }
    if table.rows.len() != declared {
        return Err(ParseError::at(
            1,
            1,
            format!("record count mismatch: header declares {declared}, found {}", table.rows.len()),
        ));
    }
    Ok(table)
}

pub fn write_celeba_attributes(table: &AttributeTable) -> Result<String, String> {
    let mut out = format!("{}\n{}\n", table.rows.len(), table.columns.join(" "));
    for (id, row) in &table.rows {
        out.push_str(id);
        for cell in row {
            match cell {
                Some(AttrValue::Flag(true)) => out.push_str(" 1"),
                Some(AttrValue::Flag(false)) => out.push_str(" -1"),
                _ => return Err(format!("record `{id}` has a value the CelebA format cannot hold")),
            }
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_attribute_csv(content: &str) -> Result<AttributeTable, ParseError> {
    let lines = lf_lines(content)?;
    let Some(&(_, header)) = lines.first() else {
        return Err(ParseError::new(1, "missing header"));
    };
    let mut fields = header.split(',');
    if fields.next() != Some("id") {
        return Err(ParseError::at(1, 1, "header must start with `id`"));
    }
    let columns: Vec<String> = fields.map(String::from).collect();
    if let Some(i) = columns.iter().position(String::is_empty) {
        return Err(ParseError::at(1, i + 2, "empty attribute name"));
    }
    check_unique_columns(&columns, 1)?;

    let mut table = AttributeTable { columns, rows: IndexMap::with_capacity(lines.len()) };
    for &(line, text) in &lines[1..] {
        let cells: Vec<&str> = text.split(',').collect();
        if cells.len() != table.columns.len() + 1 {
            return Err(ParseError::new(
                line,
                format!("expected {} values, found {}", table.columns.len(), cells.len() - 1),
            ));
        }
        if cells[0].is_empty() {
            return Err(ParseError::at(line, 1, "empty id"));
        }
        let row = cells[1..]
            .iter()
            .map(|&c| match c {
                "" => None,
                "1" => Some(AttrValue::Flag(true)),
                "-1" => Some(AttrValue::Flag(false)),
                label => Some(AttrValue::Label(label.to_string())),
            })
            .collect();
        insert_row(&mut table, line, cells[0], row)?;
    }
    Ok(table)
}

pub fn write_attribute_csv(table: &AttributeTable) -> Result<String, String> {
    let bad = |s: &str| s.contains([',', '\n', '\r']);
    if let Some(c) = table.columns.iter().find(|c| bad(c)) {
        return Err(format!("column `{c}` cannot be written as CSV"));
    }
    let mut out = String::from("id");
    for c in &table.columns {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for (id, row) in &table.rows {
        if bad(id) {
            return Err(format!("id `{id}` cannot be written as CSV"));
        }
        out.push_str(id);
        for cell in row {
            out.push(',');
            match cell {
                None => {}
                Some(AttrValue::Flag(true)) => out.push('1'),
                Some(AttrValue::Flag(false)) => out.push_str("-1"),
                Some(AttrValue::Label(l)) if l.is_empty() || l == "1" || l == "-1" || bad(l) => {
                    return Err(format!("label `{l}` of `{id}` cannot be written as CSV"))
                }
                Some(AttrValue::Label(l)) => out.push_str(l),
            }
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_attribute_jsonl(content: &str) -> Result<AttributeTable, ParseError> {
    let mut table = AttributeTable::default();
    for (i, text) in content.lines().enumerate() {
        let line = i + 1;
        if text.trim().is_empty() {
            continue;
        }
        let obj: Map<String, Value> =
            serde_json::from_str(text).map_err(|e| ParseError::at(line, e.column(), e.to_string()))?;
        let id = match obj.get("id") {
            Some(Value::String(s)) if !s.is_empty() => s.clone(),
            _ => return Err(ParseError::new(line, "missing string field `id`")),
        };
        let mut row = vec![None; table.columns.len()];
        for (key, value) in obj {
            if key == "id" {
                continue;
            }
            let cell = match value {
                Value::Null => None,
                Value::Bool(b) => Some(AttrValue::Flag(b)),
                Value::Number(n) if n.as_i64() == Some(1) => Some(AttrValue::Flag(true)),
                Value::Number(n) if n.as_i64() == Some(-1) => Some(AttrValue::Flag(false)),
                Value::Number(n) => Some(AttrValue::Label(n.to_string())),
                Value::String(s) => Some(AttrValue::Label(s)),
                Value::Array(_) | Value::Object(_) => {
                    return Err(ParseError::new(line, format!("field `{key}` must be a scalar")))
                }
            };
            let col = match table.column_index(&key) {
                Some(c) => c,
                None => {
                    table.columns.push(key);
                    row.push(None);
                    table.columns.len() - 1
                }
            };
            row[col] = cell;
        }
        insert_row(&mut table, line, &id, row)?;
    }
    let width = table.columns.len();
    for row in table.rows.values_mut() {
        row.resize(width, None);
    }
    Ok(table)
}

/// Unknown cells are written as `null` so every column survives a round
/// trip, even one with no known value.
pub fn write_attribute_jsonl(table: &AttributeTable) -> String {
    let mut out = String::new();
    for (id, row) in &table.rows {
        let mut obj = Map::new();
        obj.insert("id".into(), Value::String(id.clone()));
        for (col, cell) in table.columns.iter().zip(row) {
            let value = match cell {
                None => Value::Null,
                Some(AttrValue::Flag(b)) => Value::Bool(*b),
                Some(AttrValue::Label(l)) => Value::String(l.clone()),
            };
            obj.insert(col.clone(), value);
        }
        out.push_str(&Value::Object(obj).to_string());
        out.push('\n');
    }
    out
}

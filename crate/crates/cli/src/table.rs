use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Missing,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Float)
    }
}

/// Floats print as the shortest decimal that round-trips (`{:?}`), so output
/// is byte-stable and loses no precision.
fn csv_cell(c: &Cell) -> String {
    match c {
        Cell::Float(v) => format!("{v:?}"),
        Cell::Int(v) => v.to_string(),
        Cell::Bool(v) => v.to_string(),
        Cell::Text(s) => s.clone(),
        Cell::Missing => String::new(),
    }
}

fn json_cell(c: &Cell) -> Value {
    match c {
        Cell::Float(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
        Cell::Int(v) => Value::from(*v),
        Cell::Bool(v) => Value::from(*v),
        Cell::Text(s) => Value::from(s.as_str()),
        Cell::Missing => Value::Null,
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra results such as fits: `# key=value ...` lines in CSV, an object in JSON.
    pub extras: Vec<(&'static str, Vec<(&'static str, Cell)>)>,
    pub notes: Vec<String>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            ..Self::default()
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for note in &self.notes {
            out.push_str(&format!("# {note}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(csv_cell).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        for (name, fields) in &self.extras {
            let kv: Vec<String> = fields
                .iter()
                .map(|(k, v)| format!("{k}={}", csv_cell(v)))
                .collect();
            out.push_str(&format!("# {name} {}\n", kv.join(" ")));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(k, v)| (k.clone(), json_cell(v)))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let mut doc = Map::new();
        doc.insert("rows".into(), Value::Array(rows));
        if !self.extras.is_empty() {
            let mut extras = Map::new();
            for (name, fields) in &self.extras {
                let obj: Map<String, Value> = fields
                    .iter()
                    .map(|(k, v)| (k.to_string(), json_cell(v)))
                    .collect();
                extras.insert(name.to_string(), Value::Object(obj));
            }
            doc.insert("results".into(), Value::Object(extras));
        }
        if !self.notes.is_empty() {
            doc.insert("notes".into(), Value::from(self.notes.clone()));
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("serialisable");
        s.push('\n');
        s
    }
}

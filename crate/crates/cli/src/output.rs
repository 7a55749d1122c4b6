use serde_json::{json, Value};

use balanced_carries::wire::stringify_numbers;

pub struct Output {
    pub text: String,
    pub status: u8,
}

impl Output {
    pub fn ok(text: String) -> Self {
        Self { text, status: 0 }
    }
}

/// Common JSON wrapper. Every number is emitted as a decimal string.
pub struct Envelope {
    command: &'static str,
    parameters: Value,
    method: String,
    payload: Value,
}

impl Envelope {
    pub fn new(command: &'static str, parameters: Value, method: &str, payload: Value) -> Self {
        Self { command, parameters, method: method.to_string(), payload }
    }

    pub fn json(self) -> Output {
        let v = stringify_numbers(json!({
            "command": self.command,
            "parameters": self.parameters,
            "method": self.method,
            "payload": self.payload,
        }));
        Output::ok(serde_json::to_string_pretty(&v).expect("serializable") + "\n")
    }
}

/// Right-aligned text table with row and column labels.
pub fn table(row_labels: &[String], col_labels: &[String], cells: &[Vec<String>]) -> String {
    let lw = row_labels.iter().map(String::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..col_labels.len())
        .map(|c| {
            cells
                .iter()
                .map(|r| r[c].len())
                .chain(std::iter::once(col_labels[c].len()))
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut s = format!("{:>lw$}", "");
    for (c, l) in col_labels.iter().enumerate() {
        s += &format!("  {:>w$}", l, w = widths[c]);
    }
    s.push('\n');
    for (r, row) in cells.iter().enumerate() {
        s += &format!("{:>lw$}", row_labels[r]);
        for (c, v) in row.iter().enumerate() {
            s += &format!("  {:>w$}", v, w = widths[c]);
        }
        s.push('\n');
    }
    s
}

use std::io::{self, IsTerminal, Write};

/// Rows printed as TSV when stdout is piped and as aligned columns on a
/// terminal.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    pub fn render(&self, aligned: bool) -> String {
        let all = std::iter::once(&self.header).chain(&self.rows);
        if !aligned {
            return all.map(|r| r.join("\t") + "\n").collect();
        }
        let mut widths = vec![0; self.header.len()];
        for r in std::iter::once(&self.header).chain(&self.rows) {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        all.map(|r| {
            let cells: Vec<String> = r.iter().zip(&widths).map(|(c, &w)| format!("{c:<w$}")).collect();
            cells.join("  ").trim_end().to_string() + "\n"
        })
        .collect()
    }

    pub fn print(&self) {
        let out = io::stdout();
        let text = self.render(out.is_terminal());
        let _ = out.lock().write_all(text.as_bytes());
    }
}

pub fn num(x: f64) -> String {
    format!("{x:.4}")
}

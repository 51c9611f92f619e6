//! Brute-force Mamdani reference: unit-spaced triangles written out by hand,
//! rule tables read from the golden transcription, centroid by uniform
//! trapezoid quadrature. Shares no code with the library.

#![allow(dead_code, clippy::needless_range_loop)]

pub const LABELS: [&str; 7] = ["NB", "NM", "NS", "ZO", "PS", "PM", "PB"];
pub const GRID: usize = 10_001;

/// `tables[t][i][j]`: output label index for e-label i, ec-label j.
pub type Tables = Vec<[[usize; 7]; 7]>;

pub fn golden_text() -> &'static str {
    include_str!("../golden/rule_tables.txt")
}

/// Parses the golden file: a name line, a header line, then seven rows.
pub fn golden_tables() -> Tables {
    let lines: Vec<&str> = golden_text().lines().filter(|l| !l.trim().is_empty()).collect();
    assert_eq!(lines.len(), 27, "three blocks of nine lines");
    let mut out = Vec::new();
    for block in lines.chunks(9) {
        let mut t = [[0usize; 7]; 7];
        for (i, row) in block[2..].iter().enumerate() {
            let toks: Vec<&str> = row.split_whitespace().collect();
            assert_eq!(toks[0], LABELS[i]);
            for j in 0..7 {
                t[i][j] = LABELS.iter().position(|l| *l == toks[j + 1]).unwrap();
            }
        }
        out.push(t);
    }
    out
}

fn tri(x: f64, c: f64) -> f64 {
    (1.0 - (x - c).abs()).max(0.0)
}

/// Input membership on [-3, 3], clamped so the outer sets saturate.
fn input_mu(x: f64, label: usize) -> f64 {
    tri(x.clamp(-3.0, 3.0), label as f64 - 3.0)
}

pub fn infer(table: &[[usize; 7]; 7], e: f64, ec: f64) -> f64 {
    let mut fire = [0.0f64; 7];
    for i in 0..7 {
        for j in 0..7 {
            let w = input_mu(e, i).min(input_mu(ec, j));
            let k = table[i][j];
            fire[k] = fire[k].max(w);
        }
    }
    // Grid spans the support of the aggregated shape: one unit either side
    // of the outermost fired consequent.
    let fired: Vec<usize> = (0..7).filter(|&k| fire[k] > 0.0).collect();
    let lo = *fired.first().unwrap() as f64 - 4.0;
    let hi = *fired.last().unwrap() as f64 - 2.0;
    let h = (hi - lo) / (GRID - 1) as f64;
    let mut area = 0.0;
    let mut moment = 0.0;
    for n in 0..GRID {
        let y = lo + h * n as f64;
        let mut mu = 0.0f64;
        for k in 0..7 {
            mu = mu.max(fire[k].min(tri(y, k as f64 - 3.0)));
        }
        let w = if n == 0 || n == GRID - 1 { 0.5 } else { 1.0 };
        area += w * mu;
        moment += w * mu * y;
    }
    moment / area
}

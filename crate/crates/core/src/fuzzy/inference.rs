use super::{fuzzify, FuzzyError, FuzzyPartition, GainTarget, LinguisticLabel, RuleTable};

/// Sample count used when a membership function has to be discretized.
pub const QUADRATURE_POINTS: usize = 1001;

const MIN_AREA: f64 = 1e-12;

/// Samples `mu` at `n` evenly spaced points over `[lo, hi]`.
pub fn sample_shape(mu: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2 && hi > lo);
    let step = (hi - lo) / (n - 1) as f64;
    let xs: Vec<f64> = (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
        .collect();
    let mus = xs.iter().map(|&x| mu(x)).collect();
    (xs, mus)
}

/// Centre of mass of the piecewise-linear interpolant through `(xs, mus)`.
///
/// `xs` must be nondecreasing. Each linear piece is integrated in closed
/// form, so the result is exact whenever the true shape is linear between
/// consecutive samples.
pub fn centroid(xs: &[f64], mus: &[f64]) -> Result<f64, FuzzyError> {
    debug_assert_eq!(xs.len(), mus.len());
    let mut area = 0.0;
    let mut moment = 0.0;
    for i in 1..xs.len() {
        let (x0, x1) = (xs[i - 1], xs[i]);
        let (m0, m1) = (mus[i - 1], mus[i]);
        let h = x1 - x0;
        area += 0.5 * h * (m0 + m1);
        moment += h / 6.0 * (x0 * (2.0 * m0 + m1) + x1 * (m0 + 2.0 * m1));
    }
    if area < MIN_AREA {
        return Err(FuzzyError::ZeroActivation);
    }
    Ok(moment / area)
}

/// Activation level of each output label after min-AND firing and max
/// aggregation over all 49 rules.
fn activations(
    e: f64,
    ec: f64,
    table: &RuleTable,
    e_part: &FuzzyPartition,
    ec_part: &FuzzyPartition,
) -> [f64; 7] {
    let me = fuzzify(e, e_part);
    let mec = fuzzify(ec, ec_part);
    let mut act = [0.0f64; 7];
    for (i, de) in me.active() {
        for (j, dec) in mec.active() {
            let c = table.at(i, j).index();
            act[c] = act[c].max(de.min(dec));
        }
    }
    act
}

fn aggregated(out: &FuzzyPartition, act: &[f64; 7], y: f64) -> f64 {
    act.iter()
        .enumerate()
        .filter(|(_, &a)| a > 0.0)
        .map(|(c, &a)| a.min(out.triangle(c, y)))
        .fold(0.0, f64::max)
}

/// Crisp output of one rule table for normalized error `e` and error rate `ec`.
///
/// The aggregated shape is piecewise linear; it is sampled at every kink
/// (clip points, edge crossings and set centers) and integrated exactly.
pub fn infer(
    e: f64,
    ec: f64,
    table: &RuleTable,
    e_part: &FuzzyPartition,
    ec_part: &FuzzyPartition,
    out: &FuzzyPartition,
) -> Result<f64, FuzzyError> {
    let act = activations(e, ec, table, e_part, ec_part);

    // Nodes bounding the intervals on which at most one falling and one
    // rising edge are present.
    let c = out.centers();
    let mut nodes = [0.0; 9];
    nodes[0] = out.feet(0).0;
    nodes[1..8].copy_from_slice(c);
    nodes[8] = out.feet(6).1;

    let mut xs = Vec::with_capacity(64);
    for k in 0..8 {
        let (a, b) = (nodes[k], nodes[k + 1]);
        // Set k-1 falls and set k rises across [nodes[k], nodes[k+1]].
        let falling = k.checked_sub(1).map_or(0.0, |i| act[i]);
        let rising = if k < 7 { act[k] } else { 0.0 };
        let mut us = [0.0, 1.0 - falling, rising, 0.5, 1.0 - rising, falling];
        us.sort_by(f64::total_cmp);
        xs.push(a);
        for u in us {
            if u > 0.0 && u < 1.0 {
                xs.push(a + u * (b - a));
            }
        }
    }
    xs.push(nodes[8]);
    xs.dedup();

    let mus: Vec<f64> = xs.iter().map(|&y| aggregated(out, &act, y)).collect();
    centroid(&xs, &mus)
}

/// Crisp increments for the three PID gains, in normalized output units.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GainIncrements {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

/// The three rule tables plus the input and output partitions.
#[derive(Debug, Clone)]
pub struct GainScheduler {
    pub kp_rules: RuleTable,
    pub ki_rules: RuleTable,
    pub kd_rules: RuleTable,
    pub e_partition: FuzzyPartition,
    pub ec_partition: FuzzyPartition,
    pub out_partition: FuzzyPartition,
}

impl Default for GainScheduler {
    fn default() -> Self {
        Self {
            kp_rules: RuleTable::builtin(GainTarget::Kp),
            ki_rules: RuleTable::builtin(GainTarget::Ki),
            kd_rules: RuleTable::builtin(GainTarget::Kd),
            e_partition: FuzzyPartition::standard(),
            ec_partition: FuzzyPartition::standard(),
            out_partition: FuzzyPartition::standard(),
        }
    }
}

impl GainScheduler {
    pub fn table(&self, target: GainTarget) -> &RuleTable {
        match target {
            GainTarget::Kp => &self.kp_rules,
            GainTarget::Ki => &self.ki_rules,
            GainTarget::Kd => &self.kd_rules,
        }
    }

    pub fn infer(&self, target: GainTarget, e: f64, ec: f64) -> Result<f64, FuzzyError> {
        infer(
            e,
            ec,
            self.table(target),
            &self.e_partition,
            &self.ec_partition,
            &self.out_partition,
        )
    }

    pub fn increments(&self, e: f64, ec: f64) -> Result<GainIncrements, FuzzyError> {
        Ok(GainIncrements {
            kp: self.infer(GainTarget::Kp, e, ec)?,
            ki: self.infer(GainTarget::Ki, e, ec)?,
            kd: self.infer(GainTarget::Kd, e, ec)?,
        })
    }

    pub fn output_center(&self, label: LinguisticLabel) -> f64 {
        self.out_partition.center(label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use LinguisticLabel::*;

    /// Plain trapezoid centroid on a uniform grid, independent of `centroid`.
    fn trapezoid_centroid(mu: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
        let h = (hi - lo) / (n - 1) as f64;
        let (mut a, mut m) = (0.0, 0.0);
        for i in 0..n {
            let x = lo + h * i as f64;
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            a += w * mu(x);
            m += w * x * mu(x);
        }
        m / a
    }

    fn tri(x: f64, l: f64, c: f64, r: f64) -> f64 {
        if x <= l || x >= r {
            0.0
        } else if x <= c {
            (x - l) / (c - l)
        } else {
            (r - x) / (r - c)
        }
    }

    #[test]
    fn centroid_of_isoceles_triangle_is_its_center() {
        let (xs, mus) = sample_shape(|x| tri(x, 0.0, 1.2, 2.4), -3.0, 3.0, QUADRATURE_POINTS);
        assert!((centroid(&xs, &mus).unwrap() - 1.2).abs() < 1e-12);
    }

    #[test]
    fn centroid_of_symmetric_pair_is_zero() {
        let shape = |x: f64| tri(x, -2.0, -1.0, 0.0).max(tri(x, 0.0, 1.0, 2.0));
        let (xs, mus) = sample_shape(shape, -3.0, 3.0, QUADRATURE_POINTS);
        assert!(centroid(&xs, &mus).unwrap().abs() < 1e-12);
    }

    #[test]
    fn sampled_clipped_triangle_converges() {
        // Kinks at 0.5 and 1.5 fall between grid points; exact centroid is 1.
        let shape = |x: f64| tri(x, 0.0, 1.0, 2.0).min(0.5);
        let (xs, mus) = sample_shape(shape, -3.0, 3.0, QUADRATURE_POINTS);
        let coarse = (centroid(&xs, &mus).unwrap() - 1.0).abs();
        let fine = (trapezoid_centroid(shape, -3.0, 3.0, 10 * (QUADRATURE_POINTS - 1) + 1) - 1.0).abs();
        assert!(coarse < 1e-4, "{coarse}");
        assert!(fine < coarse / 10.0, "{fine} vs {coarse}");
    }

    #[test]
    fn zero_shape_is_an_error() {
        let (xs, mus) = sample_shape(|_| 0.0, -3.0, 3.0, 11);
        assert_eq!(centroid(&xs, &mus), Err(FuzzyError::ZeroActivation));
    }

    #[test]
    fn single_boundary_rule_gives_its_center() {
        let s = GainScheduler::default();
        let v = s.infer(GainTarget::Kp, -3.0, -3.0).unwrap();
        let oracle = trapezoid_centroid(|y| tri(y, 2.0, 3.0, 4.0), -4.0, 4.0, 80_001);
        assert!((v - oracle).abs() < 1e-9);
        assert!((v - 3.0).abs() < 1e-12);
    }

    #[test]
    fn equilibrium_kp_is_ns_center() {
        let s = GainScheduler::default();
        let v = s.infer(GainTarget::Kp, 0.0, 0.0).unwrap();
        assert!((v - s.output_center(NS)).abs() < 1e-12);
    }

    #[test]
    fn output_stays_in_universe() {
        let s = GainScheduler::default();
        for t in GainTarget::ALL {
            for i in 0..=100 {
                for j in 0..=100 {
                    let e = -3.0 + 0.06 * i as f64;
                    let ec = -3.0 + 0.06 * j as f64;
                    let v = s.infer(t, e, ec).unwrap();
                    assert!(v.abs() <= 3.0 + 1e-12, "{t:?} {e} {ec} -> {v}");
                }
            }
        }
    }

    #[test]
    fn continuous_in_error() {
        let s = GainScheduler::default();
        for t in GainTarget::ALL {
            for i in 0..600 {
                let e = -3.0 + 0.01 * i as f64 + 0.0037;
                let ec = 0.4 * (e * 1.7).sin();
                let a = s.infer(t, e, ec).unwrap();
                let b = s.infer(t, e + 1e-6, ec).unwrap();
                assert!((a - b).abs() < 1e-3, "{t:?} jump at e={e}");
            }
        }
    }
}

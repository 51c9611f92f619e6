use super::{FuzzyError, LinguisticLabel};
use serde::{Deserialize, Serialize};

/// Seven triangular sets laid out so that each set's feet sit on its
/// neighbours' peaks. Inputs outside `[lo, hi]` saturate on the boundary set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 7]", into = "[f64; 7]")]
pub struct FuzzyPartition {
    centers: [f64; 7],
}

impl FuzzyPartition {
    pub fn new(centers: [f64; 7]) -> Result<Self, FuzzyError> {
        if centers.iter().any(|c| !c.is_finite()) {
            return Err(FuzzyError::BadPartition("non-finite center".into()));
        }
        if centers.windows(2).any(|w| w[1] <= w[0]) {
            return Err(FuzzyError::BadPartition(
                "centers must be strictly increasing".into(),
            ));
        }
        Ok(Self { centers })
    }

    /// Unit-spaced centers on [-3, 3].
    pub fn standard() -> Self {
        Self {
            centers: [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0],
        }
    }

    pub fn centers(&self) -> &[f64; 7] {
        &self.centers
    }

    pub fn center(&self, label: LinguisticLabel) -> f64 {
        self.centers[label.index()]
    }

    pub fn lo(&self) -> f64 {
        self.centers[0]
    }

    pub fn hi(&self) -> f64 {
        self.centers[6]
    }

    /// Left and right feet of a set's full triangle. Boundary sets mirror
    /// their inner half-width outward.
    pub(crate) fn feet(&self, i: usize) -> (f64, f64) {
        let c = &self.centers;
        let left = if i == 0 { 2.0 * c[0] - c[1] } else { c[i - 1] };
        let right = if i == 6 { 2.0 * c[6] - c[5] } else { c[i + 1] };
        (left, right)
    }

    /// Full (non-saturating) triangle of set `i`, used for output consequents.
    pub(crate) fn triangle(&self, i: usize, x: f64) -> f64 {
        let c = self.centers[i];
        let (l, r) = self.feet(i);
        if x <= l || x >= r {
            0.0
        } else if x <= c {
            (x - l) / (c - l)
        } else {
            (r - x) / (r - c)
        }
    }
}

impl TryFrom<[f64; 7]> for FuzzyPartition {
    type Error = FuzzyError;

    fn try_from(centers: [f64; 7]) -> Result<Self, Self::Error> {
        Self::new(centers)
    }
}

impl From<FuzzyPartition> for [f64; 7] {
    fn from(p: FuzzyPartition) -> Self {
        p.centers
    }
}

impl Default for FuzzyPartition {
    fn default() -> Self {
        Self::standard()
    }
}

/// Membership degree of each label, indexed by `LinguisticLabel::index`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembershipVector {
    pub degrees: [f64; 7],
}

impl MembershipVector {
    pub fn degree(&self, label: LinguisticLabel) -> f64 {
        self.degrees[label.index()]
    }

    pub fn sum(&self) -> f64 {
        self.degrees.iter().sum()
    }

    /// Labels with nonzero membership, with their degree.
    pub fn active(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.degrees
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, d)| d > 0.0)
    }
}

pub fn fuzzify(x: f64, p: &FuzzyPartition) -> MembershipVector {
    let c = p.centers();
    let mut degrees = [0.0; 7];
    let x = if x.is_nan() { 0.0 } else { x.clamp(c[0], c[6]) };
    // Find the interval [c[k], c[k+1]] holding x; the two sets meeting there
    // share the unit mass linearly.
    let k = match c.iter().rposition(|&ck| ck <= x) {
        Some(6) => {
            degrees[6] = 1.0;
            return MembershipVector { degrees };
        }
        Some(k) => k,
        None => 0,
    };
    let u = (x - c[k]) / (c[k + 1] - c[k]);
    degrees[k] = 1.0 - u;
    degrees[k + 1] = u;
    MembershipVector { degrees }
}

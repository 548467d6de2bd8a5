//! The pattern moving space: an ordered set of pattern classes, each measured
//! by the interval spanned by its members, plus nearest-neighbor
//! classification under the Hausdorff distance.

mod fcm;

use std::convert::TryFrom;

use serde::{Deserialize, Serialize};

pub use fcm::{fcm_cluster, objective as fcm_objective, FcmConfig, FcmResult};

use crate::error::{Error, Result};
use crate::interval::Interval;

/// Number of reseeded attempts [`build_space_with_retries`] makes.
pub const DEFAULT_RESEED_ATTEMPTS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct PatternClass {
    /// 1-based, in ascending center order.
    pub id: usize,
    pub interval: Interval,
    /// FCM cluster center.
    pub center: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceDocument", into = "SpaceDocument")]
pub struct PatternSpace {
    classes: Vec<PatternClass>,
}

impl PatternSpace {
    /// Validates ordering: ids `1..=cpms`, strictly increasing centers and
    /// non-decreasing lower bounds.
    pub fn new(classes: Vec<PatternClass>) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::Config("pattern space needs at least one class".into()));
        }
        for (i, class) in classes.iter().enumerate() {
            if class.id != i + 1 {
                return Err(Error::Config(format!(
                    "class at position {} has id {}",
                    i + 1,
                    class.id
                )));
            }
        }
        for w in classes.windows(2) {
            if !(w[0].center < w[1].center) {
                return Err(Error::Clustering(format!(
                    "class centers not strictly ascending at id {}",
                    w[1].id
                )));
            }
            if w[1].interval.lower() < w[0].interval.lower() {
                return Err(Error::Clustering(format!(
                    "class lower bounds decrease at id {}",
                    w[1].id
                )));
            }
        }
        Ok(Self { classes })
    }

    /// The cardinality of the space.
    pub fn cpms(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[PatternClass] {
        &self.classes
    }

    pub fn intervals(&self) -> impl Iterator<Item = Interval> + '_ {
        self.classes.iter().map(|c| c.interval)
    }

    /// Nearest class by Hausdorff distance; ties go to the lowest id.
    pub fn classify(&self, x: &Interval) -> usize {
        let mut best = &self.classes[0];
        let mut best_d = x.hausdorff(&best.interval);
        for class in &self.classes[1..] {
            let d = x.hausdorff(&class.interval);
            if d < best_d {
                best = class;
                best_d = d;
            }
        }
        best.id
    }

    pub fn measure(&self, id: usize) -> Result<Interval> {
        if id == 0 || id > self.cpms() {
            return Err(Error::ClassOutOfRange {
                id,
                cpms: self.cpms(),
            });
        }
        Ok(self.classes[id - 1].interval)
    }

    /// Maps each scalar to the interval of the class nearest to `[x, x]`.
    pub fn encode_series(&self, data: &[f64]) -> Vec<Interval> {
        data.iter()
            .map(|&x| self.classes[self.classify(&Interval::point(x)) - 1].interval)
            .collect()
    }

    /// Class ids for each scalar under the same rule as [`encode_series`](Self::encode_series).
    pub fn encode_ids(&self, data: &[f64]) -> Vec<usize> {
        data.iter()
            .map(|&x| self.classify(&Interval::point(x)))
            .collect()
    }
}

/// Clusters `data` and measures each cluster by `[min, max]` of its members.
pub fn build_space(data: &[f64], config: &FcmConfig) -> Result<PatternSpace> {
    let fcm = fcm_cluster(data, config)?;
    let k = config.k;
    let mut bounds = vec![(f64::INFINITY, f64::NEG_INFINITY); k];
    for (&x, &a) in data.iter().zip(&fcm.assignments) {
        let b = &mut bounds[a];
        b.0 = b.0.min(x);
        b.1 = b.1.max(x);
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| fcm.centers[a].total_cmp(&fcm.centers[b]));
    let classes = order
        .iter()
        .enumerate()
        .map(|(rank, &j)| {
            Ok(PatternClass {
                id: rank + 1,
                interval: Interval::new(bounds[j].0, bounds[j].1)?,
                center: fcm.centers[j],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    PatternSpace::new(classes)
}

/// [`build_space`], reseeding after an empty-cluster failure. Attempt `i`
/// uses seed `config.seed + i`. Configuration errors are not retried.
pub fn build_space_with_retries(
    data: &[f64],
    config: &FcmConfig,
    attempts: usize,
) -> Result<PatternSpace> {
    let mut last = None;
    for attempt in 0..attempts.max(1) {
        let cfg = FcmConfig {
            seed: config.seed.wrapping_add(attempt as u64),
            ..config.clone()
        };
        match build_space(data, &cfg) {
            Ok(space) => return Ok(space),
            Err(Error::Clustering(msg)) if msg.contains("no members") => {
                last = Some(Error::Clustering(msg))
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ClassDocument {
    id: usize,
    lower: f64,
    upper: f64,
    center: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SpaceDocument {
    cpms: usize,
    classes: Vec<ClassDocument>,
}

impl TryFrom<SpaceDocument> for PatternSpace {
    type Error = Error;

    fn try_from(doc: SpaceDocument) -> Result<Self> {
        if doc.cpms != doc.classes.len() {
            return Err(Error::Config(format!(
                "cpms = {} but {} classes listed",
                doc.cpms,
                doc.classes.len()
            )));
        }
        let classes = doc
            .classes
            .into_iter()
            .map(|c| {
                Ok(PatternClass {
                    id: c.id,
                    interval: Interval::new(c.lower, c.upper)?,
                    center: c.center,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        PatternSpace::new(classes)
    }
}

impl From<PatternSpace> for SpaceDocument {
    fn from(space: PatternSpace) -> Self {
        SpaceDocument {
            cpms: space.cpms(),
            classes: space
                .classes
                .into_iter()
                .map(|c| ClassDocument {
                    id: c.id,
                    lower: c.interval.lower(),
                    upper: c.interval.upper(),
                    center: c.center,
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(bounds: &[(f64, f64)]) -> PatternSpace {
        PatternSpace::new(
            bounds
                .iter()
                .enumerate()
                .map(|(i, &(l, u))| PatternClass {
                    id: i + 1,
                    interval: Interval::new(l, u).unwrap(),
                    center: (l + u) / 2.0,
                })
                .collect(),
        )
        .unwrap()
    }

    /// Exhaustive 2-partition of sorted data into a prefix and a suffix,
    /// minimizing the summed spread of the two groups.
    fn best_split(sorted: &[f64]) -> ((f64, f64), (f64, f64)) {
        (1..sorted.len())
            .map(|s| {
                let a = (sorted[0], sorted[s - 1]);
                let b = (sorted[s], sorted[sorted.len() - 1]);
                (a, b, (a.1 - a.0) + (b.1 - b.0))
            })
            .min_by(|x, y| x.2.total_cmp(&y.2))
            .map(|(a, b, _)| (a, b))
            .unwrap()
    }

    #[test]
    fn two_class_space_matches_exhaustive_split() {
        let data = [0.0, 0.1, 9.9, 10.0];
        let s = build_space(&data, &FcmConfig::with_k(2)).unwrap();
        let (a, b) = best_split(&data);
        assert_eq!(s.cpms(), 2);
        assert_eq!(s.measure(1).unwrap(), Interval::new(a.0, a.1).unwrap());
        assert_eq!(s.measure(2).unwrap(), Interval::new(b.0, b.1).unwrap());
    }

    #[test]
    fn single_class_of_constant_data() {
        let data = [5.0; 7];
        let s = build_space(&data, &FcmConfig::with_k(1)).unwrap();
        assert_eq!(s.cpms(), 1);
        assert_eq!(s.measure(1).unwrap(), Interval::point(5.0));
    }

    #[test]
    fn classify_examples() {
        let s = space(&[(0.0, 1.0), (10.0, 11.0)]);
        assert_eq!(s.classify(&Interval::new(0.2, 0.9).unwrap()), 1);
        for (i, iv) in s.intervals().enumerate() {
            assert_eq!(s.classify(&iv), i + 1);
        }
        // Equal distances resolve to the lower id.
        let s = space(&[(0.0, 1.0), (2.0, 3.0)]);
        assert_eq!(s.classify(&Interval::new(1.0, 2.0).unwrap()), 1);
    }

    #[test]
    fn measure_range_checks() {
        let s = space(&[(0.0, 1.0), (2.0, 3.0)]);
        assert!(matches!(s.measure(0), Err(Error::ClassOutOfRange { .. })));
        assert!(s.measure(3).is_err());
        assert_eq!(s.measure(s.classify(&s.measure(2).unwrap())).unwrap(), s.measure(2).unwrap());
    }

    #[test]
    fn encode_examples() {
        let s = space(&[(0.0, 0.1), (9.9, 10.0)]);
        let encoded = s.encode_series(&[0.05, 9.95]);
        // Enumerate both distances per point.
        for (&x, e) in [0.05, 9.95].iter().zip(&encoded) {
            let d: Vec<f64> = s.intervals().map(|c| Interval::point(x).hausdorff(&c)).collect();
            let want = if d[0] <= d[1] { 1 } else { 2 };
            assert_eq!(*e, s.measure(want).unwrap());
        }
        assert_eq!(encoded[0], Interval::new(0.0, 0.1).unwrap());
        assert_eq!(encoded[1], Interval::new(9.9, 10.0).unwrap());

        let constant = s.encode_series(&[9.95; 4]);
        assert!(constant.iter().all(|iv| *iv == constant[0]));
    }

    #[test]
    fn rejects_unordered_space() {
        let bad = vec![
            PatternClass {
                id: 1,
                interval: Interval::new(2.0, 3.0).unwrap(),
                center: 2.5,
            },
            PatternClass {
                id: 2,
                interval: Interval::new(0.0, 1.0).unwrap(),
                center: 0.5,
            },
        ];
        assert!(PatternSpace::new(bad).is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = space(&[(-4.4856, -4.2777), (-4.1184, -3.8815), (0.1 + 0.2, 0.7)]);
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.starts_with("{\"cpms\":3,\"classes\":[{\"id\":1,\"lower\":-4.4856"));
        let back: PatternSpace = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);

        let bad = r#"{"cpms":2,"classes":[{"id":1,"lower":0,"upper":1,"center":0.5}]}"#;
        assert!(serde_json::from_str::<PatternSpace>(bad).is_err());
    }
}

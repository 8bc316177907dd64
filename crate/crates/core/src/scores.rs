//! Training targets from evaluated candidates.
//!
//! Candidates are grouped by exact grasp center. Each group gets a center
//! score (sum of its simulation scores), each (group, direction class) cell an
//! approach score, and each candidate its own score. Center and direction
//! scores are min-max normalized per scene; a degenerate range maps to 0.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::codec::DirectionLattice;
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::sampler::GraspCandidate;

#[derive(Clone, Debug, PartialEq)]
pub struct CenterGroup {
    pub k: usize,
    pub center: Vec3,
    pub members: Vec<usize>,
}

fn center_key(c: &Vec3) -> [u64; 3] {
    [c.x.to_bits(), c.y.to_bits(), c.z.to_bits()]
}

/// Groups candidates by bit-identical center, in order of first occurrence.
pub fn group_by_center(candidates: &[GraspCandidate]) -> Vec<CenterGroup> {
    let mut index: HashMap<[u64; 3], usize> = HashMap::new();
    let mut groups: Vec<CenterGroup> = Vec::new();
    for (i, c) in candidates.iter().enumerate() {
        let k = *index.entry(center_key(&c.center)).or_insert_with(|| {
            groups.push(CenterGroup {
                k: groups.len(),
                center: c.center,
                members: Vec::new(),
            });
            groups.len() - 1
        });
        groups[k].members.push(i);
    }
    groups
}

/// `(x - min) / (max - min)`, or all zeros when the range is empty.
pub fn min_max_normalize(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if values.is_empty() || hi <= lo {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| (v - lo) / (hi - lo)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScorePair {
    pub raw: f64,
    pub normalized: f64,
}

fn sim(c: &GraspCandidate, i: usize) -> Result<f64> {
    c.sim_score
        .map(f64::from)
        .ok_or_else(|| Error::invalid(format!("candidate {i} has no simulation score")))
}

/// Grasp center scores, one per group.
pub fn compute_gcs(groups: &[CenterGroup], candidates: &[GraspCandidate]) -> Result<Vec<ScorePair>> {
    let raws = groups
        .iter()
        .map(|g| g.members.iter().map(|&i| sim(&candidates[i], i)).sum::<Result<f64>>())
        .collect::<Result<Vec<_>>>()?;
    let norms = min_max_normalize(&raws);
    Ok(raws
        .into_iter()
        .zip(norms)
        .map(|(raw, normalized)| ScorePair { raw, normalized })
        .collect())
}

/// Approach direction score of one populated (group, class) cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdsCell {
    pub k: usize,
    pub v: usize,
    pub score: ScorePair,
}

/// Approach direction scores over populated cells, sorted by `(k, v)`.
/// Normalization spans every populated cell in the scene.
pub fn compute_ads(
    groups: &[CenterGroup],
    candidates: &[GraspCandidate],
    lattice: &DirectionLattice,
) -> Result<Vec<AdsCell>> {
    let mut cells: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for g in groups {
        for &i in &g.members {
            let v = lattice.encode(&candidates[i].approach);
            *cells.entry((g.k, v)).or_default() += sim(&candidates[i], i)?;
        }
    }
    let raws: Vec<f64> = cells.values().copied().collect();
    let norms = min_max_normalize(&raws);
    Ok(cells
        .into_keys()
        .zip(raws.into_iter().zip(norms))
        .map(|((k, v), (raw, normalized))| AdsCell {
            k,
            v,
            score: ScorePair { raw, normalized },
        })
        .collect())
}

/// Individual grasp score: the candidate's own simulation score.
pub fn compute_igs(candidate: &GraspCandidate) -> Result<f64> {
    candidate
        .sim_score
        .map(f64::from)
        .ok_or_else(|| Error::invalid("candidate has no simulation score"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupLabel {
    pub k: usize,
    pub center: [f64; 3],
    pub gcs_raw: f64,
    pub gcs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdsLabel {
    pub k: usize,
    pub v: usize,
    pub raw: f64,
    pub norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateLabel {
    pub k: usize,
    pub v: usize,
    pub a: f64,
    pub d: f64,
    pub collision: f64,
    pub igs: f64,
}

/// One scene's worth of labels; one JSON line on disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelRecord {
    pub scene_id: String,
    pub cloud: String,
    pub groups: Vec<GroupLabel>,
    pub ads: Vec<AdsLabel>,
    pub candidates: Vec<CandidateLabel>,
}

impl LabelRecord {
    pub fn assemble(
        scene_id: &str,
        cloud: &str,
        candidates: &[GraspCandidate],
        lattice: &DirectionLattice,
    ) -> Result<Self> {
        let groups = group_by_center(candidates);
        let gcs = compute_gcs(&groups, candidates)?;
        let ads = compute_ads(&groups, candidates, lattice)?;
        let mut group_of = vec![0usize; candidates.len()];
        for g in &groups {
            for &i in &g.members {
                group_of[i] = g.k;
            }
        }
        let candidate_labels = candidates
            .iter()
            .enumerate()
            .map(|(i, c)| {
                Ok(CandidateLabel {
                    k: group_of[i],
                    v: lattice.encode(&c.approach),
                    a: c.inplane_angle,
                    d: c.depth,
                    collision: c.collision_score,
                    igs: compute_igs(c)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let record = Self {
            scene_id: scene_id.to_owned(),
            cloud: cloud.to_owned(),
            groups: groups
                .iter()
                .zip(&gcs)
                .map(|(g, s)| GroupLabel {
                    k: g.k,
                    center: [g.center.x, g.center.y, g.center.z],
                    gcs_raw: s.raw,
                    gcs: s.normalized,
                })
                .collect(),
            ads: ads
                .iter()
                .map(|c| AdsLabel {
                    k: c.k,
                    v: c.v,
                    raw: c.score.raw,
                    norm: c.score.normalized,
                })
                .collect(),
            candidates: candidate_labels,
        };
        record.validate()?;
        Ok(record)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if let Some(g) = self.groups.iter().find(|g| !unit(g.gcs)) {
            return Err(Error::invariant(format!("group {} normalized GCS {} outside [0, 1]", g.k, g.gcs)));
        }
        if let Some(a) = self.ads.iter().find(|a| !unit(a.norm)) {
            return Err(Error::invariant(format!(
                "cell ({}, {}) normalized ADS {} outside [0, 1]",
                a.k, a.v, a.norm
            )));
        }
        let cells: std::collections::HashSet<(usize, usize)> = self.ads.iter().map(|a| (a.k, a.v)).collect();
        for (i, c) in self.candidates.iter().enumerate() {
            if !cells.contains(&(c.k, c.v)) {
                return Err(Error::invariant(format!(
                    "candidate {i} cell ({}, {}) missing from ADS table",
                    c.k, c.v
                )));
            }
            if c.k >= self.groups.len() {
                return Err(Error::invariant(format!("candidate {i} group {} out of range", c.k)));
            }
        }
        Ok(())
    }
}

/// Validates every record, then writes them as JSON Lines.
pub fn write_label_records(path: &Path, records: &[LabelRecord]) -> Result<()> {
    for r in records {
        r.validate()?;
    }
    write_jsonl(path, records)
}

pub fn read_label_records(path: &Path) -> Result<Vec<LabelRecord>> {
    read_jsonl(path)
}

/// Writes one compact JSON object per line.
pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for item in items {
        serde_json::to_writer(&mut out, item).map_err(|e| Error::format(e.to_string()))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads JSON Lines, skipping blank lines; errors carry the line number and
/// the offending field path.
pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|source| Error::UnreadableFile {
        path: path.to_owned(),
        source,
    })?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let de = &mut serde_json::Deserializer::from_str(&line);
        let item = serde_path_to_error::deserialize(de).map_err(|e| {
            Error::format(format!("{}:{}: {} at `{}`", path.display(), n + 1, e.inner(), e.path()))
        })?;
        out.push(item);
    }
    Ok(out)
}

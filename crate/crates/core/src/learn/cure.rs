//! CURE-style hierarchical clustering on mixed-type feature vectors.
//!
//! Points live in a "presence/mass" embedding: every slot is a presence
//! weight plus mass coordinates (the scaled value for ordinal slots, the
//! category indicators for nominal ones). Crisp points reproduce
//! [`mixed_distance`](super::mixed_distance) exactly, and the embedding is
//! closed under the centroid shrinking that CURE needs.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::content_space::*;
use crate::error::{Error, Result};
use crate::seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CureParams {
    /// Fraction of the data agglomerated.
    pub sample_rate: f64,
    /// Pull of representatives toward the cluster centroid.
    pub shrink: f64,
    pub representatives: usize,
}

impl Default for CureParams {
    fn default() -> Self {
        CureParams { sample_rate: 0.025, shrink: 0.5, representatives: 10 }
    }
}

#[derive(Clone, Debug)]
struct Layout {
    /// (offset into mass coordinates, width) for every slot.
    slots: Vec<(usize, usize, SlotKind)>,
    width: usize,
    /// Ordinal range per slot.
    scale: Vec<f64>,
}

impl Layout {
    fn new(ranges: &AttributeRanges) -> Self {
        let mut off = 0;
        let mut v = Vec::with_capacity(FEATURE_COUNT);
        let mut scale = Vec::with_capacity(FEATURE_COUNT);
        for (i, s) in slots().iter().enumerate() {
            let w = match s.kind {
                SlotKind::Ordinal => 1,
                SlotKind::Nominal => nominal_arity(s.attr),
            };
            v.push((off, w, s.kind));
            scale.push(slot_range(i, ranges));
            off += w;
        }
        Layout { slots: v, width: off, scale }
    }
}

/// A point in the presence/mass embedding.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Embedded {
    presence: Vec<f64>,
    mass: Vec<f64>,
}

impl Embedded {
    fn crisp(v: &FeatureVector, layout: &Layout) -> Embedded {
        let mut presence = vec![0.0; FEATURE_COUNT];
        let mut mass = vec![0.0; layout.width];
        for (i, &(off, _, kind)) in layout.slots.iter().enumerate() {
            let x = v.values[i];
            if x == ABSENT {
                continue;
            }
            presence[i] = 1.0;
            match kind {
                SlotKind::Ordinal => mass[off] = x / layout.scale[i],
                SlotKind::Nominal => mass[off + x as usize] = 1.0,
            }
        }
        Embedded { presence, mass }
    }

    fn zero(layout: &Layout) -> Embedded {
        Embedded { presence: vec![0.0; FEATURE_COUNT], mass: vec![0.0; layout.width] }
    }

    fn add(&mut self, o: &Embedded) {
        for (a, b) in self.presence.iter_mut().zip(&o.presence) {
            *a += b;
        }
        for (a, b) in self.mass.iter_mut().zip(&o.mass) {
            *a += b;
        }
    }

    fn scale(&mut self, k: f64) {
        self.presence.iter_mut().for_each(|a| *a *= k);
        self.mass.iter_mut().for_each(|a| *a *= k);
    }

    /// Moves `self` a fraction `t` of the way toward `to`.
    fn toward(&self, to: &Embedded, t: f64) -> Embedded {
        let lerp = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect();
        Embedded { presence: lerp(&self.presence, &to.presence), mass: lerp(&self.mass, &to.mass) }
    }

    /// Presence difference plus the shared presence times the value difference.
    fn distance(&self, o: &Embedded, layout: &Layout) -> f64 {
        let mut total = 0.0;
        for (i, &(off, w, kind)) in layout.slots.iter().enumerate() {
            let (pa, pb) = (self.presence[i], o.presence[i]);
            let shared = pa.min(pb);
            let mut d = (pa - pb).abs();
            if shared > 0.0 {
                let ma = &self.mass[off..off + w];
                let mb = &o.mass[off..off + w];
                let diff = match kind {
                    SlotKind::Ordinal => (ma[0] / pa - mb[0] / pb).abs().min(1.0),
                    SlotKind::Nominal => {
                        0.5 * ma.iter().zip(mb).map(|(x, y)| (x / pa - y / pb).abs()).sum::<f64>()
                    }
                };
                d += shared * diff;
            }
            total += d;
        }
        total / FEATURE_COUNT as f64
    }
}

/// One agglomeration step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Merge {
    /// Ids of the merged clusters; leaves are 0..n, merge j creates id n + j.
    pub left: usize,
    pub right: usize,
    /// Representative distance at this merge.
    pub raw_distance: f64,
    /// Running maximum of raw distances, used for lifetimes.
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dendrogram {
    pub leaves: usize,
    pub merges: Vec<Merge>,
}

/// Number of clusters with the longest lifetime. The lifetime of k clusters
/// is the gap between the merge that creates them and the next one. The
/// all-singleton state starts at zero distance by construction and is not a
/// candidate; ties go to the smaller k.
pub fn choose_k(d: &Dendrogram) -> usize {
    let m = d.merges.len();
    if m < 2 {
        return 1;
    }
    let n = d.leaves;
    let dist = |j: usize| d.merges[j - 1].distance;
    let mut best = (1, 0.0);
    for k in 2..n {
        // k clusters exist after n - k merges
        let life = dist(n - k + 1) - dist(n - k);
        if life > best.1 {
            best = (k, life);
        }
    }
    best.0
}

fn scattered(members: &[usize], points: &[Embedded], centroid: &Embedded, count: usize, layout: &Layout) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::with_capacity(count.min(members.len()));
    let mut near = vec![f64::INFINITY; members.len()];
    while chosen.len() < count.min(members.len()) {
        let mut best: Option<(usize, f64)> = None;
        for (k, &p) in members.iter().enumerate() {
            if chosen.contains(&p) {
                continue;
            }
            let d = if chosen.is_empty() { points[p].distance(centroid, layout) } else { near[k] };
            if best.is_none_or(|(_, bd)| d > bd) {
                best = Some((k, d));
            }
        }
        let (k, _) = best.expect("unchosen member exists");
        let p = members[k];
        chosen.push(p);
        for (j, &q) in members.iter().enumerate() {
            near[j] = near[j].min(points[q].distance(&points[p], layout));
        }
    }
    chosen
}

#[derive(Clone, Debug)]
struct Cluster {
    id: usize,
    members: Vec<usize>,
    reps: Vec<Embedded>,
}

fn build_cluster(id: usize, members: Vec<usize>, points: &[Embedded], p: &CureParams, layout: &Layout) -> Cluster {
    let mut centroid = Embedded::zero(layout);
    for &m in &members {
        centroid.add(&points[m]);
    }
    centroid.scale(1.0 / members.len() as f64);
    let reps = scattered(&members, points, &centroid, p.representatives, layout)
        .into_iter()
        .map(|i| points[i].toward(&centroid, p.shrink))
        .collect();
    Cluster { id, members, reps }
}

fn cluster_distance(a: &Cluster, b: &Cluster, layout: &Layout) -> f64 {
    let mut best = f64::INFINITY;
    for x in &a.reps {
        for y in &b.reps {
            best = best.min(x.distance(y, layout));
        }
    }
    best
}

/// Full agglomeration of `points` down to one cluster.
fn agglomerate(points: &[Embedded], p: &CureParams, layout: &Layout) -> Dendrogram {
    let n = points.len();
    let mut clusters: Vec<Cluster> = (0..n).map(|i| build_cluster(i, vec![i], points, p, layout)).collect();
    let mut dist = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = cluster_distance(&clusters[i], &clusters[j], layout);
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    // slot i of `clusters`/`dist` stays in use until merged away
    let mut alive = vec![true; n];
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    let mut envelope = 0.0f64;
    for step in 0..n.saturating_sub(1) {
        let mut best = (usize::MAX, usize::MAX, f64::INFINITY);
        for i in (0..n).filter(|&i| alive[i]) {
            for j in (i + 1..n).filter(|&j| alive[j]) {
                if dist[i][j] < best.2 {
                    best = (i, j, dist[i][j]);
                }
            }
        }
        let (i, j, d) = best;
        envelope = envelope.max(d);
        merges.push(Merge { left: clusters[i].id, right: clusters[j].id, raw_distance: d, distance: envelope });
        let mut members = std::mem::take(&mut clusters[i].members);
        members.extend(std::mem::take(&mut clusters[j].members));
        members.sort_unstable();
        clusters[i] = build_cluster(n + step, members, points, p, layout);
        alive[j] = false;
        for k in (0..n).filter(|&k| alive[k] && k != i) {
            let d = cluster_distance(&clusters[i], &clusters[k], layout);
            dist[i][k] = d;
            dist[k][i] = d;
        }
    }
    Dendrogram { leaves: n, merges }
}

/// Sample-point membership after the first `n - k` merges, as sorted member lists.
fn cut(d: &Dendrogram, k: usize) -> Vec<Vec<usize>> {
    let n = d.leaves;
    let mut groups: Vec<Option<Vec<usize>>> = (0..n).map(|i| Some(vec![i])).collect();
    for m in &d.merges[..n - k] {
        let mut a = groups[m.left].take().expect("live cluster");
        a.extend(groups[m.right].take().expect("live cluster"));
        a.sort_unstable();
        groups.push(Some(a));
    }
    let mut live: Vec<Vec<usize>> = groups.into_iter().flatten().collect();
    live.sort();
    live
}

#[derive(Clone, Debug)]
pub struct Clustering {
    /// Cluster id of every input point, in 0..k.
    pub assignments: Vec<usize>,
    pub k: usize,
    /// Agglomeration over the sampled points.
    pub dendrogram: Dendrogram,
    /// Input indices of the sampled points, dendrogram leaf order.
    pub sample: Vec<usize>,
}

impl Clustering {
    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &a in &self.assignments {
            s[a] += 1;
        }
        s
    }
}

/// Clusters `data` with CURE: agglomerate a random sample, cut the tree at
/// the longest-lived cluster count, then assign every point to the cluster
/// of its nearest representative.
pub fn cure_cluster(data: &[FeatureVector], params: &CureParams, ranges: &AttributeRanges, rng_seed: u64) -> Result<Clustering> {
    if data.is_empty() {
        return Err(Error::EmptyInput("clustering input"));
    }
    if !(params.sample_rate > 0.0 && params.sample_rate <= 1.0) || params.representatives == 0 {
        return Err(Error::InvalidArgument("CURE needs a sample rate in (0, 1] and at least one representative".into()));
    }
    for v in data {
        super::distance::check_kinds(v)?;
    }
    let layout = Layout::new(ranges);
    let n = data.len();
    let size = ((params.sample_rate * n as f64).round() as usize).clamp(n.min(2), n);
    let mut rng = seed::rng(rng_seed);
    let mut picked: Vec<usize> = sample(&mut rng, n, size).into_vec();
    picked.sort_unstable();
    let points: Vec<Embedded> = picked.iter().map(|&i| Embedded::crisp(&data[i], &layout)).collect();
    let dendrogram = agglomerate(&points, params, &layout);
    let k = choose_k(&dendrogram);
    let clusters: Vec<Cluster> = cut(&dendrogram, k)
        .into_iter()
        .enumerate()
        .map(|(id, m)| build_cluster(id, m, &points, params, &layout))
        .collect();
    let assignments = data
        .iter()
        .map(|v| {
            let e = Embedded::crisp(v, &layout);
            let mut best = (0, f64::INFINITY);
            for c in &clusters {
                for r in &c.reps {
                    let d = e.distance(r, &layout);
                    if d < best.1 {
                        best = (c.id, d);
                    }
                }
            }
            best.0
        })
        .collect();
    Ok(Clustering { assignments, k, dendrogram, sample: picked })
}

/// Per-cluster quotas summing to `total`: the floor of the proportional
/// share plus one for the largest remainders (ties to the lower cluster id).
pub fn stratified_quotas(sizes: &[usize], total: usize) -> Vec<usize> {
    let n: usize = sizes.iter().sum();
    if n == 0 {
        return vec![0; sizes.len()];
    }
    let total = total.min(n);
    let mut q: Vec<usize> = sizes.iter().map(|&s| s * total / n).collect();
    let mut rest: Vec<(usize, usize)> = sizes.iter().enumerate().map(|(i, &s)| (s * total % n, i)).collect();
    rest.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut missing = total - q.iter().sum::<usize>();
    for &(_, i) in &rest {
        if missing == 0 {
            break;
        }
        if q[i] < sizes[i] {
            q[i] += 1;
            missing -= 1;
        }
    }
    q
}

/// Draws a validation subset with cluster-proportional quotas. Returns sorted input indices.
pub fn stratified_sample(clustering: &Clustering, total: usize, rng_seed: u64) -> Vec<usize> {
    let quotas = stratified_quotas(&clustering.sizes(), total);
    let mut by_cluster: Vec<Vec<usize>> = vec![Vec::new(); clustering.k];
    for (i, &c) in clustering.assignments.iter().enumerate() {
        by_cluster[c].push(i);
    }
    let mut rng = seed::rng(rng_seed);
    let mut out = Vec::with_capacity(total);
    for (members, &q) in by_cluster.iter().zip(&quotas) {
        for j in sample(&mut rng, members.len(), q) {
            out.push(members[j]);
        }
    }
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::mixed_distance;
    use rand::Rng;

    fn dendro(ds: &[f64]) -> Dendrogram {
        let mut env = 0.0f64;
        Dendrogram {
            leaves: ds.len() + 1,
            merges: ds
                .iter()
                .map(|&d| {
                    env = env.max(d);
                    Merge { left: 0, right: 0, raw_distance: d, distance: env }
                })
                .collect(),
        }
    }

    #[test]
    fn choose_k_hand_cases() {
        assert_eq!(choose_k(&dendro(&[0.1, 0.12, 0.9])), 2);
        // lifetimes k=3: 0.2, k=2: 0.2
        assert_eq!(choose_k(&dendro(&[0.1, 0.3, 0.5])), 2);
        assert_eq!(choose_k(&dendro(&[0.4])), 1);
        assert_eq!(choose_k(&dendro(&[])), 1);
        assert_eq!(choose_k(&dendro(&[0.0, 0.0, 0.0])), 1);
        // lifetime of k=3 dominates
        assert_eq!(choose_k(&dendro(&[0.05, 0.1, 0.8, 0.85])), 3);
    }

    #[test]
    fn crisp_embedding_matches_mixed_distance() {
        let r = AttributeRanges::default();
        let layout = Layout::new(&r);
        for seed in 0..200 {
            let a = sample_segment(seed, &ElementCaps::MAX, &r).to_feature_vector();
            let b = sample_segment(seed + 777, &ElementCaps::MAX, &r).to_feature_vector();
            let d = Embedded::crisp(&a, &layout).distance(&Embedded::crisp(&b, &layout), &layout);
            assert!((d - mixed_distance(&a, &b, &r).unwrap()).abs() < 1e-12);
        }
    }

    fn blob(rng: &mut seed::Rng, high: bool) -> FeatureVector {
        let mut s = SegmentDescriptor::empty(if high { 6 } else { 2 });
        for _ in 0..3 {
            let x = if high { rng.random_range(15..=17) } else { rng.random_range(1..=3) };
            let k = if high { EnemyKind::Spiky } else { EnemyKind::Goomba };
            s.enemies.push(Enemy { x, y: 8, kind: k });
        }
        if high {
            s.coins.push(CoinRun { x: 5, y: 3, width: rng.random_range(1..=2) });
            s.gaps.push(Gap { x: 9, width: 4, kind: GapKind::Stepped });
        }
        s.canonicalize().unwrap().to_feature_vector()
    }

    #[test]
    fn separated_blobs_give_two_clusters() {
        let mut rng = seed::rng(5);
        let mut data = Vec::new();
        let mut truth = Vec::new();
        for i in 0..400 {
            let high = i % 2 == 1;
            data.push(blob(&mut rng, high));
            truth.push(high);
        }
        let p = CureParams { sample_rate: 0.1, ..CureParams::default() };
        let c = cure_cluster(&data, &p, &AttributeRanges::default(), 11).unwrap();
        assert_eq!(c.k, 2);
        let agree = c
            .assignments
            .iter()
            .zip(&truth)
            .filter(|(a, t)| (**a == c.assignments[1]) == **t)
            .count();
        assert!(agree as f64 / 400.0 >= 0.99);
    }

    #[test]
    fn single_point_and_duplicates() {
        let v = SegmentDescriptor::empty(3).to_feature_vector();
        let r = AttributeRanges::default();
        let c = cure_cluster(std::slice::from_ref(&v), &CureParams::default(), &r, 1).unwrap();
        assert_eq!(c.k, 1);
        let same = vec![v; 50];
        let c = cure_cluster(&same, &CureParams { sample_rate: 0.5, ..CureParams::default() }, &r, 1).unwrap();
        assert_eq!(c.k, 1);
        assert!(c.assignments.iter().all(|&a| a == 0));
    }

    #[test]
    fn quotas_sum_exactly() {
        let sizes = [5000, 3000, 1999, 1];
        let q = stratified_quotas(&sizes, 800);
        assert_eq!(q.iter().sum::<usize>(), 800);
        assert_eq!(q, vec![400, 240, 160, 0]);
        let q = stratified_quotas(&[1, 1, 1], 2);
        assert_eq!(q, vec![1, 1, 0]);
    }
}

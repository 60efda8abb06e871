#![allow(dead_code)]

use std::collections::BTreeSet;

use dreams::layout::{Orders, ProperGraph};
use dreams::{EvidenceKind, ModelDocument, ModelKind, NodeKind, Polarity};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const WORDS: &[&str] = &[
    "time", "pressure", "sketch", "sketches", "quality", "protocol", "study", "designer", "experience",
    "review", "rework", "scope", "team", "morale", "prototype", "test", "cost", "schedule", "risk",
    "requirement", "feedback", "iteration", "concept", "idea", "fluency", "Übergabe", "Qualität",
    "Straße", "ΣΟΦΙΑ", "σχέδιο", "設計", "研究", "モデル", "données", "évaluation", "naïve", "café",
    "42", "v2", "ISO9001", "😀", "→", "x-ray", "co-design", "C++", "\"quoted\"", "a<b>&c", "tab\there",
];

pub fn text(rng: &mut impl Rng, max_words: usize) -> String {
    let n = rng.random_range(1..=max_words);
    let mut words = Vec::with_capacity(n);
    for _ in 0..n {
        words.push(*WORDS.choose(rng).unwrap());
    }
    let sep = [" ", " ", " ", ", ", "-", " / ", "\n"];
    let mut out = String::new();
    for (i, w) in words.iter().enumerate() {
        if i > 0 {
            out.push_str(sep.choose(rng).unwrap());
        }
        out.push_str(w);
    }
    if out.trim().is_empty() {
        out.push('x');
    }
    out
}

pub fn pick<T: Copy>(rng: &mut impl Rng, items: &[T]) -> T {
    *items.choose(rng).unwrap()
}

pub fn polarity(rng: &mut impl Rng) -> Polarity {
    if rng.random_bool(0.5) {
        Polarity::Positive
    } else {
        Polarity::Negative
    }
}

/// A random valid model built through the editing API.
pub fn model(rng: &mut impl Rng, nodes: usize, links: usize, evidence: usize) -> ModelDocument {
    let kind = if rng.random_bool(0.5) { ModelKind::ReferenceModel } else { ModelKind::ImpactModel };
    let mut m = ModelDocument::new(kind, &text(rng, 4)).unwrap();
    let mut ids = Vec::new();
    for _ in 0..nodes {
        let details = dreams::model::NodeDetails {
            notes: rng.random_bool(0.3).then(|| text(rng, 6)),
            tags: (0..rng.random_range(0..3)).map(|_| text(rng, 1)).collect(),
        };
        ids.push(m.add_node_with(pick(rng, &NodeKind::ALL), &text(rng, 3), details).unwrap());
    }
    let mut link_ids = Vec::new();
    let mut attempts = 0;
    while link_ids.len() < links && ids.len() > 1 && attempts < links * 20 {
        attempts += 1;
        let s = ids.choose(rng).unwrap().clone();
        let t = ids.choose(rng).unwrap().clone();
        if let Ok(l) = m.add_link(&s, &t, polarity(rng)) {
            if rng.random_bool(0.2) {
                m.update_link(
                    &l,
                    dreams::model::LinkPatch {
                        notes: Some(Some(text(rng, 5))),
                        ..Default::default()
                    },
                )
                .unwrap();
            }
            link_ids.push(l);
        }
    }
    if !link_ids.is_empty() {
        for _ in 0..evidence {
            let l = link_ids.choose(rng).unwrap().clone();
            let locator = rng.random_bool(0.3).then(|| text(rng, 2));
            m.attach_evidence(&l, pick(rng, &EvidenceKind::ALL), &text(rng, 8), locator.as_deref())
                .unwrap();
        }
    }
    m
}

/// Random simple digraph, self-loops excluded. With `two_cycles` false no
/// pair of opposite edges is produced.
pub fn digraph(rng: &mut impl Rng, n: usize, m: usize, two_cycles: bool) -> Vec<(usize, usize)> {
    let mut seen = BTreeSet::new();
    let mut edges = Vec::new();
    if n < 2 {
        return edges;
    }
    let mut attempts = 0;
    while edges.len() < m && attempts < m * 50 {
        attempts += 1;
        let s = rng.random_range(0..n);
        let t = rng.random_range(0..n);
        if s == t || seen.contains(&(s, t)) || (!two_cycles && seen.contains(&(t, s))) {
            continue;
        }
        seen.insert((s, t));
        edges.push((s, t));
    }
    edges
}

/// Weakly connected random digraph without 2-cycles: a random spanning
/// tree with random orientations plus extra edges.
pub fn connected_digraph(rng: &mut impl Rng, n: usize, extra: usize) -> Vec<(usize, usize)> {
    let mut seen = BTreeSet::new();
    let mut edges = Vec::new();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for i in 1..n {
        let a = order[i];
        let b = order[rng.random_range(0..i)];
        let e = if rng.random_bool(0.5) { (a, b) } else { (b, a) };
        seen.insert(e);
        edges.push(e);
    }
    let mut attempts = 0;
    let target = edges.len() + extra;
    while edges.len() < target && attempts < extra * 50 + 10 {
        attempts += 1;
        let s = rng.random_range(0..n);
        let t = rng.random_range(0..n);
        if s == t || seen.contains(&(s, t)) || seen.contains(&(t, s)) {
            continue;
        }
        seen.insert((s, t));
        edges.push((s, t));
    }
    edges
}

/// Random proper layered graph with random in-layer orders.
pub fn proper_graph(rng: &mut impl Rng, max_nodes: usize, max_edges: usize) -> (ProperGraph, Orders) {
    let n = rng.random_range(2..=max_nodes);
    let layers = rng.random_range(2..=n.min(6));
    // every layer gets at least one vertex
    let mut layer: Vec<usize> = (0..layers).collect();
    while layer.len() < n {
        layer.push(rng.random_range(0..layers));
    }
    layer.shuffle(rng);
    let mut candidates = Vec::new();
    for s in 0..n {
        for t in 0..n {
            if layer[t] == layer[s] + 1 {
                candidates.push((s, t));
            }
        }
    }
    candidates.shuffle(rng);
    let m = rng.random_range(0..=max_edges.min(candidates.len()));
    candidates.truncate(m);
    let g = ProperGraph::new(layer, candidates).unwrap();
    let mut orders = g.identity_orders();
    for o in &mut orders {
        o.shuffle(rng);
    }
    (g, orders)
}

/// Two-layer graph with `top` and `bottom` vertices and edge density `p`.
pub fn two_layer(rng: &mut impl Rng, top: usize, bottom: usize, p: f64) -> ProperGraph {
    let mut layer = vec![0; top];
    layer.extend(std::iter::repeat_n(1, bottom));
    let mut edges = Vec::new();
    for s in 0..top {
        for t in top..top + bottom {
            if rng.random_bool(p) {
                edges.push((s, t));
            }
        }
    }
    ProperGraph::new(layer, edges).unwrap()
}

/// Crossings by comparing every pair of edges between the same layers.
pub fn brute_force_crossings(g: &ProperGraph, orders: &Orders) -> u64 {
    let mut pos = vec![0usize; g.vertex_count()];
    for o in orders {
        for (i, &v) in o.iter().enumerate() {
            pos[v] = i;
        }
    }
    let mut count = 0;
    for (i, &(a, b)) in g.edges.iter().enumerate() {
        for &(c, d) in &g.edges[i + 1..] {
            if g.layer[a] != g.layer[c] {
                continue;
            }
            let x = pos[a] as i64 - pos[c] as i64;
            let y = pos[b] as i64 - pos[d] as i64;
            if x * y < 0 {
                count += 1;
            }
        }
    }
    count
}

/// Rearranges `p` into the next lexicographic permutation; false after the
/// last one.
pub fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Fewest crossings of a two-layer graph when only the `free` side may be
/// reordered, given positions of the other side. `nb[v]` lists the fixed
/// positions adjacent to free vertex `v`. Exact, by dynamic programming
/// over subsets of the free side.
pub fn one_sided_optimum(nb: &[Vec<usize>]) -> u64 {
    let k = nb.len();
    // c[u][v]: crossings between the edges of u and v when u is left of v
    let mut c = vec![vec![0u64; k]; k];
    for u in 0..k {
        for v in 0..k {
            if u != v {
                c[u][v] = nb[u]
                    .iter()
                    .map(|&a| nb[v].iter().filter(|&&b| a > b).count() as u64)
                    .sum();
            }
        }
    }
    let full = 1usize << k;
    let mut add = vec![vec![0u64; full]; k];
    for v in 0..k {
        for s in 1..full {
            let low = s.trailing_zeros() as usize;
            add[v][s] = add[v][s & (s - 1)] + c[low][v];
        }
    }
    let mut dp = vec![u64::MAX; full];
    dp[0] = 0;
    for s in 0..full {
        if dp[s] == u64::MAX {
            continue;
        }
        for (v, add_v) in add.iter().enumerate() {
            if s & (1 << v) == 0 {
                let next = s | (1 << v);
                let cost = dp[s] + add_v[s];
                if cost < dp[next] {
                    dp[next] = cost;
                }
            }
        }
    }
    dp[full - 1]
}

/// Fewest crossings of a two-layer graph over all orderings of both layers.
/// Every permutation of the smaller side is tried, each with the exact best
/// order of the larger side.
pub fn two_layer_optimum(g: &ProperGraph) -> u64 {
    let top: Vec<usize> = (0..g.vertex_count()).filter(|&v| g.layer[v] == 0).collect();
    let bottom: Vec<usize> = (0..g.vertex_count()).filter(|&v| g.layer[v] == 1).collect();
    let (fixed, free, flip) = if top.len() <= bottom.len() { (top, bottom, false) } else { (bottom, top, true) };
    let free_index = |v: usize| free.iter().position(|&x| x == v).unwrap();
    let fixed_index = |v: usize| fixed.iter().position(|&x| x == v).unwrap();
    let edges: Vec<(usize, usize)> = g
        .edges
        .iter()
        .map(|&(s, t)| if flip { (fixed_index(t), free_index(s)) } else { (fixed_index(s), free_index(t)) })
        .collect();
    let mut perm: Vec<usize> = (0..fixed.len()).collect();
    let mut best = u64::MAX;
    loop {
        // reversing both layers keeps the count, so half the permutations suffice
        if perm.len() < 2 || perm[0] < perm[perm.len() - 1] {
            let mut pos = vec![0; perm.len()];
            for (i, &f) in perm.iter().enumerate() {
                pos[f] = i;
            }
            let mut nb = vec![Vec::new(); free.len()];
            for &(f, v) in &edges {
                nb[v].push(pos[f]);
            }
            best = best.min(one_sided_optimum(&nb));
            if best == 0 {
                return 0;
            }
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    best
}

/// Full-scan search oracle: re-reads every text field of every item on each
/// query. Returns `(target id, score)` in ranking order.
pub fn naive_search(m: &ModelDocument, q: &dreams::search::SearchQuery) -> Vec<(String, f64)> {
    fn words(text: &str) -> Vec<String> {
        text.split(|c: char| !c.is_alphanumeric())
            .filter(|w| !w.is_empty())
            .map(|w| w.chars().flat_map(char::to_lowercase).collect())
            .collect()
    }
    let query: Vec<String> = {
        let mut seen = Vec::new();
        for w in words(&q.text) {
            if !seen.contains(&w) {
                seen.push(w);
            }
        }
        seen
    };
    // id, weighted fields, primary weight, passes the filters
    type Item = (String, Vec<(f64, String)>, f64, bool);
    let mut items: Vec<Item> = Vec::new();
    for n in &m.nodes {
        let mut fields = vec![(3.0, n.label.clone())];
        fields.extend(n.notes.iter().map(|t| (1.0, t.clone())));
        fields.extend(n.tags.iter().map(|t| (1.5, t.clone())));
        let ok = q.polarity_filter.is_none() && q.evidence_filter.is_none() && q.kind_filter.is_none_or(|k| k == n.kind);
        items.push((n.id.clone(), fields, 3.0, ok));
    }
    for l in &m.links {
        let fields = l.notes.iter().map(|t| (1.0, t.clone())).collect();
        let ok = q.kind_filter.is_none() && q.evidence_filter.is_none() && q.polarity_filter.is_none_or(|p| p == l.polarity);
        items.push((l.id.clone(), fields, 1.0, ok));
        for e in &l.evidence {
            let mut fields = vec![(2.0, e.text.clone())];
            fields.extend(e.locator.iter().map(|t| (1.0, t.clone())));
            let ok = q.kind_filter.is_none()
                && q.polarity_filter.is_none_or(|p| p == l.polarity)
                && q.evidence_filter.is_none_or(|k| k == e.kind);
            items.push((e.id.clone(), fields, 2.0, ok));
        }
    }
    let mut hits = Vec::new();
    for (id, fields, main, ok) in items {
        if !ok {
            continue;
        }
        if query.is_empty() {
            hits.push((id, main));
            continue;
        }
        let mut score = 0.0;
        let mut all = true;
        for qt in &query {
            let best = fields
                .iter()
                .filter(|(_, text)| words(text).iter().any(|w| w.starts_with(qt.as_str())))
                .map(|(w, _)| *w)
                .fold(None, |acc: Option<f64>, w| Some(acc.map_or(w, |a| a.max(w))));
            match best {
                Some(w) => score += w,
                None => {
                    all = false;
                    break;
                }
            }
        }
        if all {
            hits.push((id, score));
        }
    }
    hits.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    hits.truncate(q.limit);
    hits
}

/// A random query: words or word prefixes taken from the model's own text,
/// sometimes noise, with random filters.
pub fn random_query(rng: &mut impl Rng, m: &ModelDocument) -> dreams::search::SearchQuery {
    let mut pool: Vec<String> = Vec::new();
    for n in &m.nodes {
        pool.push(n.label.clone());
        pool.extend(n.tags.iter().cloned());
    }
    for l in &m.links {
        pool.extend(l.notes.iter().cloned());
        pool.extend(l.evidence.iter().map(|e| e.text.clone()));
    }
    let mut words: Vec<String> = Vec::new();
    for _ in 0..rng.random_range(0..=3) {
        if pool.is_empty() || rng.random_bool(0.15) {
            words.push(text(rng, 1));
            continue;
        }
        let source = pool.choose(rng).unwrap();
        let toks: Vec<&str> = source.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()).collect();
        if let Some(w) = toks.choose(rng) {
            let chars: Vec<char> = w.chars().collect();
            let cut = rng.random_range(1..=chars.len());
            let mut word: String = chars[..cut].iter().collect();
            if rng.random_bool(0.3) {
                word = word.to_uppercase();
            }
            words.push(word);
        }
    }
    dreams::search::SearchQuery {
        text: words.join(if rng.random_bool(0.5) { " " } else { ", " }),
        kind_filter: rng.random_bool(0.2).then(|| pick(rng, &NodeKind::ALL)),
        polarity_filter: rng.random_bool(0.2).then(|| polarity(rng)),
        evidence_filter: rng.random_bool(0.2).then(|| pick(rng, &EvidenceKind::ALL)),
        limit: if rng.random_bool(0.5) { usize::MAX } else { rng.random_range(1..=10) },
    }
}

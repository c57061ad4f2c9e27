use super::{Graph, Vertex};

/// Degree plus the sorted multiset of neighbor degrees; invariant under
/// isomorphism, used to prune candidate images.
fn degree_profiles(g: &Graph) -> Vec<(usize, Vec<usize>)> {
    let adj = g.adjacency();
    let deg = g.degrees();
    adj.iter()
        .enumerate()
        .map(|(v, nbrs)| {
            let mut around: Vec<usize> = nbrs.iter().map(|&w| deg[w]).collect();
            around.sort_unstable();
            (deg[v], around)
        })
        .collect()
}

/// Searches for an isomorphism `g1 -> g2` that extends the `fixed` pairs.
/// Returns the image of every vertex of `g1`.
pub fn find_isomorphism(g1: &Graph, g2: &Graph, fixed: &[(Vertex, Vertex)]) -> Option<Vec<Vertex>> {
    let n = g1.n_vertices();
    if n != g2.n_vertices() || g1.n_edges() != g2.n_edges() {
        return None;
    }
    let p1 = degree_profiles(g1);
    let p2 = degree_profiles(g2);
    let mut s1: Vec<_> = p1.clone();
    let mut s2: Vec<_> = p2.clone();
    s1.sort();
    s2.sort();
    if s1 != s2 {
        return None;
    }

    let adj1 = g1.adjacency();
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for &(a, b) in fixed {
        if a >= n || b >= n || p1[a] != p2[b] {
            return None;
        }
        if map[a] != usize::MAX {
            if map[a] != b {
                return None;
            }
            continue;
        }
        if used[b] {
            return None;
        }
        map[a] = b;
        used[b] = true;
    }
    // fixed pairs must already be consistent with each other
    for &(a, _) in fixed {
        for &(c, _) in fixed {
            if a < c && g1.has_edge(a, c) != g2.has_edge(map[a], map[c]) {
                return None;
            }
        }
    }

    // Static order: repeatedly take the unassigned vertex with most assigned
    // neighbors, then highest degree, then lowest index.
    let mut placed: Vec<bool> = map.iter().map(|&m| m != usize::MAX).collect();
    let mut order = Vec::with_capacity(n);
    let mut weight = vec![0usize; n];
    for v in 0..n {
        if placed[v] {
            for &w in &adj1[v] {
                weight[w] += 1;
            }
        }
    }
    while order.len() + fixed_count(&map) < n {
        let v = (0..n)
            .filter(|&v| !placed[v])
            .max_by(|&a, &b| (weight[a], p1[a].0).cmp(&(weight[b], p1[b].0)).then(b.cmp(&a)))
            .expect("unplaced vertex remains");
        placed[v] = true;
        order.push(v);
        for &w in &adj1[v] {
            weight[w] += 1;
        }
    }

    fn fixed_count(map: &[usize]) -> usize {
        map.iter().filter(|&&m| m != usize::MAX).count()
    }

    struct Search<'a> {
        g2: &'a Graph,
        adj1: &'a [Vec<Vertex>],
        p1: &'a [(usize, Vec<usize>)],
        p2: &'a [(usize, Vec<usize>)],
        order: &'a [Vertex],
    }

    impl Search<'_> {
        fn extend(&self, depth: usize, map: &mut [usize], used: &mut [bool]) -> bool {
            let Some(&v) = self.order.get(depth) else {
                return true;
            };
            let n = map.len();
            for w in 0..n {
                if used[w] || self.p1[v] != self.p2[w] {
                    continue;
                }
                // adjacency to already-mapped vertices must be preserved both ways
                let mut ok = true;
                let mut mapped_nbrs = 0;
                for &u in &self.adj1[v] {
                    if map[u] != usize::MAX {
                        mapped_nbrs += 1;
                        if !self.g2.has_edge(map[u], w) {
                            ok = false;
                            break;
                        }
                    }
                }
                if !ok {
                    continue;
                }
                let image_nbrs = (0..n).filter(|&x| used[x] && self.g2.has_edge(x, w)).count();
                if image_nbrs != mapped_nbrs {
                    continue;
                }
                map[v] = w;
                used[w] = true;
                if self.extend(depth + 1, map, used) {
                    return true;
                }
                map[v] = usize::MAX;
                used[w] = false;
            }
            false
        }
    }

    let search = Search { g2, adj1: &adj1, p1: &p1, p2: &p2, order: &order };
    search.extend(0, &mut map, &mut used).then_some(map)
}

/// An automorphism of `g` exchanging `r1` and `r2`, if one exists.
pub fn find_root_swap(g: &Graph, r1: Vertex, r2: Vertex) -> Option<Vec<Vertex>> {
    find_isomorphism(g, g, &[(r1, r2), (r2, r1)])
}

pub fn is_isomorphic(g1: &Graph, g2: &Graph) -> bool {
    find_isomorphism(g1, g2, &[]).is_some()
}

/// Lexicographically largest adjacency string over all labelings that list
/// vertices by non-increasing degree. The string is built column by column
/// (`adj(p0,pk), .., adj(p(k-1),pk)` for k = 1..n). Two graphs are isomorphic
/// iff their forms agree. Only defined for at most 12 vertices.
pub fn canonical_form(g: &Graph) -> Option<String> {
    let n = g.n_vertices();
    if n > 12 {
        return None;
    }
    let deg = g.degrees();
    let mut best: Option<Vec<u8>> = None;
    let mut perm = Vec::with_capacity(n);
    let mut used = vec![false; n];
    let mut bits = Vec::with_capacity(n * n.saturating_sub(1) / 2);

    #[allow(clippy::too_many_arguments)]
    fn go(
        g: &Graph,
        deg: &[usize],
        perm: &mut Vec<Vertex>,
        used: &mut [bool],
        bits: &mut Vec<u8>,
        best: &mut Option<Vec<u8>>,
        ahead: bool,
    ) {
        let n = g.n_vertices();
        if perm.len() == n {
            if best.as_ref().is_none_or(|b| bits.as_slice() > b.as_slice()) {
                *best = Some(bits.clone());
            }
            return;
        }
        let next_deg = perm.last().map(|&p| deg[p]).unwrap_or(usize::MAX);
        for v in 0..n {
            if used[v] || deg[v] > next_deg {
                continue;
            }
            // degree order must stay non-increasing and every remaining vertex
            // must still fit, so take only the largest remaining degree
            let max_left = (0..n).filter(|&u| !used[u]).map(|u| deg[u]).max().unwrap_or(0);
            if deg[v] != max_left {
                continue;
            }
            let start = bits.len();
            bits.extend(perm.iter().map(|&u| g.has_edge(u, v) as u8));
            let mut now_ahead = ahead;
            if !ahead {
                if let Some(b) = best.as_ref() {
                    match bits[start..].cmp(&b[start..bits.len()]) {
                        std::cmp::Ordering::Less => {
                            bits.truncate(start);
                            continue;
                        }
                        std::cmp::Ordering::Greater => now_ahead = true,
                        std::cmp::Ordering::Equal => {}
                    }
                } else {
                    now_ahead = true;
                }
            }
            used[v] = true;
            perm.push(v);
            go(g, deg, perm, used, bits, best, now_ahead);
            perm.pop();
            used[v] = false;
            bits.truncate(start);
        }
    }

    go(g, &deg, &mut perm, &mut used, &mut bits, &mut best, false);
    let body: String = best.unwrap_or_default().iter().map(|&b| char::from(b'0' + b)).collect();
    Some(format!("{n}:{}:{body}", g.n_edges()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_relabelings_are_isomorphic() {
        let c6 = Graph::cycle(6).unwrap();
        let perm = [3, 5, 0, 2, 4, 1];
        let other = c6.relabel(&perm);
        assert!(is_isomorphic(&c6, &other));
        assert_eq!(canonical_form(&c6), canonical_form(&other));
    }

    #[test]
    fn distinguishes_same_degree_sequences() {
        // C6 versus two disjoint triangles: both 2-regular on 6 vertices
        let c6 = Graph::cycle(6).unwrap();
        let two_k3 = Graph::new(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        assert!(!is_isomorphic(&c6, &two_k3));
        assert_ne!(canonical_form(&c6), canonical_form(&two_k3));
    }

    #[test]
    fn root_swap_on_paths_and_asymmetric_graphs() {
        let p = Graph::path(4);
        let swap = find_root_swap(&p, 0, 4).unwrap();
        assert_eq!(swap, vec![4, 3, 2, 1, 0]);
        // a path with a pendant at one end has no swap of its ends
        let g = Graph::new(5, [(0, 1), (1, 2), (2, 3), (1, 4)]).unwrap();
        assert!(find_root_swap(&g, 0, 3).is_none());
    }

    #[test]
    fn fixed_pairs_are_respected() {
        let c4 = Graph::cycle(4).unwrap();
        let m = find_isomorphism(&c4, &c4, &[(0, 2)]).unwrap();
        assert_eq!(m[0], 2);
        assert!(find_isomorphism(&c4, &c4, &[(0, 1), (1, 3)]).is_none());
    }

    #[test]
    fn canonical_form_limits() {
        assert!(canonical_form(&Graph::empty(13)).is_none());
        assert_eq!(canonical_form(&Graph::empty(0)).unwrap(), "0:0:");
    }
}

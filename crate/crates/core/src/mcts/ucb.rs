use super::{Node, NodeId, Tree};

/// Upper confidence bound of a child with mean `x` and `n_child` visits
/// under a parent with `n_parent` visits. Unvisited children are unbounded.
pub fn ucb1(x: f64, c: f64, n_parent: u64, n_child: u64) -> f64 {
    if n_child == 0 {
        return f64::INFINITY;
    }
    let n = (n_parent.max(1)) as f64;
    x + c * (2.0 * n.ln() / n_child as f64).sqrt()
}

/// Child of `node` maximising UCB1 with value `x`, skipping exhausted
/// children. The first unvisited child is returned at once; ties go to the
/// earlier child.
pub fn ucb1_select(tree: &Tree, node: NodeId, c: f64, x: impl Fn(&Node) -> f64) -> Option<NodeId> {
    let parent = &tree[node];
    let mut best: Option<(NodeId, f64)> = None;
    for &ch in &parent.children {
        let child = &tree[ch];
        if child.exhausted {
            continue;
        }
        if child.n_visit == 0 {
            return Some(ch);
        }
        let v = x(child);
        let u = if v == f64::INFINITY {
            v
        } else {
            ucb1(v, c, parent.n_visit, child.n_visit)
        };
        if best.is_none_or(|(_, b)| u > b) {
            best = Some((ch, u));
        }
    }
    best.map(|(id, _)| id)
}

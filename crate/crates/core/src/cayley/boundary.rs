use super::{Ball, VertexSet};

/// `{x ∉ A : x has a neighbor in A}`, restricted to the ball.
pub fn outer_boundary(ball: &Ball, a: &VertexSet) -> VertexSet {
    let mut out = ball.empty_set();
    for v in a.iter() {
        for n in ball.inner_neighbors(v) {
            if !a.contains(n) {
                out.insert(n);
            }
        }
    }
    out
}

/// `{x ∈ A : x has a neighbor outside A}`. A neighbor beyond the ball counts as
/// outside `A`, so the inner boundary of the whole ball is its outer sphere.
pub fn inner_boundary(ball: &Ball, a: &VertexSet) -> VertexSet {
    let mut out = ball.empty_set();
    for v in a.iter() {
        if ball.neighbors(v).any(|n| n.is_none_or(|n| !a.contains(n))) {
            out.insert(v);
        }
    }
    out
}

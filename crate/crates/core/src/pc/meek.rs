use crate::graph::Pdag;

/// Applies Meek's rules R1-R4 until no undirected edge can be oriented.
pub fn meek_closure(pdag: &Pdag) -> Pdag {
    let mut g = pdag.clone();
    loop {
        let mut changed = false;
        let undirected: Vec<(usize, usize)> = g.undirected_edges().iter().copied().collect();
        for (u, v) in undirected {
            for (a, b) in [(u, v), (v, u)] {
                if g.is_undirected(a, b) && rule_applies(&g, a, b) {
                    g.orient(a, b);
                    changed = true;
                }
            }
        }
        if !changed {
            return g;
        }
    }
}

/// Whether some rule forces the undirected edge `a - b` into `a -> b`.
pub(crate) fn rule_applies(g: &Pdag, a: usize, b: usize) -> bool {
    r1(g, a, b) || r2(g, a, b) || r3(g, a, b) || r4(g, a, b)
}

// c -> a - b, c and b nonadjacent
fn r1(g: &Pdag, a: usize, b: usize) -> bool {
    g.parents(a).into_iter().any(|c| c != b && !g.adjacent(c, b))
}

// a -> c -> b
fn r2(g: &Pdag, a: usize, b: usize) -> bool {
    g.children(a).into_iter().any(|c| g.is_directed(c, b))
}

// a - c -> b, a - d -> b, c and d nonadjacent
fn r3(g: &Pdag, a: usize, b: usize) -> bool {
    let cs: Vec<usize> = g
        .undirected_neighbors(a)
        .into_iter()
        .filter(|&c| c != b && g.is_directed(c, b))
        .collect();
    cs.iter()
        .enumerate()
        .any(|(i, &c)| cs[i + 1..].iter().any(|&d| !g.adjacent(c, d)))
}

// a - c -> d -> b, a adjacent to d, c and b nonadjacent
fn r4(g: &Pdag, a: usize, b: usize) -> bool {
    g.undirected_neighbors(a).into_iter().any(|c| {
        c != b
            && !g.adjacent(c, b)
            && g
                .children(c)
                .into_iter()
                .any(|d| d != a && g.is_directed(d, b) && g.adjacent(a, d))
    })
}

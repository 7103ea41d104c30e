use std::collections::{BTreeSet, VecDeque};

use super::{Dag, VSet};
use crate::error::{invalid, Error, Result};

fn check(g: &Dag, y: &VSet, z: &VSet, w: &VSet) -> Result<()> {
    for v in y.iter().chain(z).chain(w) {
        if !g.has_vertex(v) {
            return Err(Error::UnknownName(v.clone()));
        }
    }
    if !y.is_disjoint(z) || !y.is_disjoint(w) || !z.is_disjoint(w) {
        return Err(invalid("d-separation sets must be disjoint"));
    }
    Ok(())
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Dir {
    /// arrived from a child, travelling against the edge
    Up,
    /// arrived from a parent, travelling along the edge
    Down,
}

/// `true` iff every path between `y` and `z` is blocked by `w`.
/// Ball-passing reachability over (vertex, direction) states.
pub fn d_separated(g: &Dag, y: &VSet, z: &VSet, w: &VSet) -> Result<bool> {
    check(g, y, z, w)?;
    let anc_w = g.ancestors(w);
    let mut visited: BTreeSet<(String, Dir)> = BTreeSet::new();
    let mut queue: VecDeque<(String, Dir)> = y.iter().map(|v| (v.clone(), Dir::Up)).collect();
    while let Some((v, dir)) = queue.pop_front() {
        if !visited.insert((v.clone(), dir)) {
            continue;
        }
        let observed = w.contains(&v);
        if !observed && z.contains(&v) {
            return Ok(false);
        }
        match dir {
            Dir::Up if !observed => {
                for p in g.parents(&v) {
                    queue.push_back((p, Dir::Up));
                }
                for c in g.children(&v) {
                    queue.push_back((c, Dir::Down));
                }
            }
            Dir::Down => {
                if !observed {
                    for c in g.children(&v) {
                        queue.push_back((c, Dir::Down));
                    }
                }
                if anc_w.contains(&v) {
                    for p in g.parents(&v) {
                        queue.push_back((p, Dir::Up));
                    }
                }
            }
            _ => {}
        }
    }
    Ok(true)
}

/// Literal path definition: enumerates every simple path of the skeleton
/// and checks the chain/fork/collider blocking rules one by one.
pub fn d_separated_by_paths(g: &Dag, y: &VSet, z: &VSet, w: &VSet) -> Result<bool> {
    Ok(open_path(g, y, z, w)?.is_none())
}

/// First simple path from `y` to `z` not blocked by `w`, if any.
pub fn open_path(g: &Dag, y: &VSet, z: &VSet, w: &VSet) -> Result<Option<Vec<String>>> {
    check(g, y, z, w)?;
    let adjacent = |v: &str| -> Vec<String> {
        let mut n = g.parents(v);
        n.extend(g.children(v));
        n
    };
    let edge = |a: &str, b: &str| g.edges().contains(&(a.to_string(), b.to_string()));
    let blocked = |path: &[String]| -> bool {
        for k in 1..path.len().saturating_sub(1) {
            let (a, m, b) = (&path[k - 1], &path[k], &path[k + 1]);
            let collider = edge(a, m) && edge(b, m);
            if collider {
                let desc = g.descendants(m);
                if desc.is_disjoint(w) {
                    return true;
                }
            } else if w.contains(m) {
                return true;
            }
        }
        false
    };
    fn walk(
        path: &mut Vec<String>,
        z: &VSet,
        adjacent: &dyn Fn(&str) -> Vec<String>,
        blocked: &dyn Fn(&[String]) -> bool,
    ) -> bool {
        let last = path.last().unwrap().clone();
        if path.len() > 1 && z.contains(&last) {
            return !blocked(path);
        }
        for n in adjacent(&last) {
            if path.contains(&n) {
                continue;
            }
            path.push(n);
            if walk(path, z, adjacent, blocked) {
                return true;
            }
            path.pop();
        }
        false
    }
    for s in y {
        let mut path = vec![s.clone()];
        if walk(&mut path, z, &adjacent, &blocked) {
            return Ok(Some(path));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::vset;

    #[test]
    fn textbook_cases() {
        let chain = Dag::new(&["X", "M", "Y"], &[("X", "M"), ("M", "Y")]).unwrap();
        assert!(d_separated(&chain, &vset(&["X"]), &vset(&["Y"]), &vset(&["M"])).unwrap());
        assert!(!d_separated(&chain, &vset(&["X"]), &vset(&["Y"]), &VSet::new()).unwrap());
        let coll = Dag::new(&["X", "C", "Y", "D"], &[("X", "C"), ("Y", "C"), ("C", "D")]).unwrap();
        assert!(d_separated(&coll, &vset(&["X"]), &vset(&["Y"]), &VSet::new()).unwrap());
        assert!(!d_separated(&coll, &vset(&["X"]), &vset(&["Y"]), &vset(&["C"])).unwrap());
        assert!(!d_separated(&coll, &vset(&["X"]), &vset(&["Y"]), &vset(&["D"])).unwrap());
        for w in [VSet::new(), vset(&["C"]), vset(&["D"])] {
            assert_eq!(
                d_separated(&coll, &vset(&["X"]), &vset(&["Y"]), &w).unwrap(),
                d_separated_by_paths(&coll, &vset(&["X"]), &vset(&["Y"]), &w).unwrap()
            );
        }
    }

    #[test]
    fn overlap_rejected() {
        let chain = Dag::new(&["X", "Y"], &[("X", "Y")]).unwrap();
        assert!(d_separated(&chain, &vset(&["X"]), &vset(&["X"]), &VSet::new()).is_err());
    }
}

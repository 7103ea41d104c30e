//! DAG and ADMG combinatorics.

mod dsep;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub use dsep::{d_separated, d_separated_by_paths, open_path};

pub type VSet = BTreeSet<String>;

pub fn vset<S: AsRef<str>>(items: &[S]) -> VSet {
    items.iter().map(|s| s.as_ref().to_string()).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dag {
    vertices: Vec<String>,
    edges: BTreeSet<(String, String)>,
}

impl Dag {
    pub fn new<S: AsRef<str>>(vertices: &[S], edges: &[(S, S)]) -> Result<Self> {
        let vertices: Vec<String> = vertices.iter().map(|v| v.as_ref().to_string()).collect();
        let edges = edges.iter().map(|(a, b)| (a.as_ref().to_string(), b.as_ref().to_string())).collect();
        Self::from_parts(vertices, edges)
    }

    pub fn from_parts(vertices: Vec<String>, edges: BTreeSet<(String, String)>) -> Result<Self> {
        let uniq: VSet = vertices.iter().cloned().collect();
        if uniq.len() != vertices.len() {
            return Err(invalid("duplicate vertex"));
        }
        for (a, b) in &edges {
            if !uniq.contains(a) || !uniq.contains(b) {
                return Err(Error::UnknownName(format!("{}→{}", a, b)));
            }
            if a == b {
                return Err(Error::Cycle(format!("self-loop at {}", a)));
            }
        }
        let g = Dag { vertices, edges };
        g.topological_order()?;
        Ok(g)
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeSet<(String, String)> {
        &self.edges
    }

    pub fn has_vertex(&self, v: &str) -> bool {
        self.vertices.iter().any(|w| w == v)
    }

    pub fn parents(&self, v: &str) -> Vec<String> {
        self.edges.iter().filter(|(_, b)| b == v).map(|(a, _)| a.clone()).collect()
    }

    pub fn children(&self, v: &str) -> Vec<String> {
        self.edges.iter().filter(|(a, _)| a == v).map(|(_, b)| b.clone()).collect()
    }

    /// Vertices reachable from `v` by directed paths, including `v`.
    pub fn descendants(&self, v: &str) -> VSet {
        let mut seen = VSet::new();
        let mut stack = vec![v.to_string()];
        while let Some(x) = stack.pop() {
            if seen.insert(x.clone()) {
                stack.extend(self.children(&x));
            }
        }
        seen
    }

    /// Vertices with a directed path into some member of `set`, including `set`.
    pub fn ancestors(&self, set: &VSet) -> VSet {
        let mut seen = VSet::new();
        let mut stack: Vec<String> = set.iter().cloned().collect();
        while let Some(x) = stack.pop() {
            if seen.insert(x.clone()) {
                stack.extend(self.parents(&x));
            }
        }
        seen
    }

    /// Kahn's algorithm, always taking the lexicographically smallest ready vertex.
    pub fn topological_order(&self) -> Result<Vec<String>> {
        let mut indeg: BTreeMap<&str, usize> = self.vertices.iter().map(|v| (v.as_str(), 0)).collect();
        for (_, b) in &self.edges {
            *indeg.get_mut(b.as_str()).unwrap() += 1;
        }
        let mut ready: BTreeSet<&str> = indeg.iter().filter(|(_, d)| **d == 0).map(|(v, _)| *v).collect();
        let mut order = Vec::with_capacity(self.vertices.len());
        while let Some(v) = ready.pop_first() {
            order.push(v.to_string());
            for (a, b) in &self.edges {
                if a == v {
                    let d = indeg.get_mut(b.as_str()).unwrap();
                    *d -= 1;
                    if *d == 0 {
                        ready.insert(b.as_str());
                    }
                }
            }
        }
        if order.len() != self.vertices.len() {
            let stuck: Vec<&str> = indeg.iter().filter(|(v, _)| !order.iter().any(|o| o == *v)).map(|(v, _)| *v).collect();
            return Err(Error::Cycle(format!("among {:?}", stuck)));
        }
        Ok(order)
    }

    pub fn with_edge(&self, a: &str, b: &str) -> Result<Dag> {
        let mut edges = self.edges.clone();
        edges.insert((a.to_string(), b.to_string()));
        Dag::from_parts(self.vertices.clone(), edges)
    }

    pub fn to_dot(&self, name: &str) -> String {
        let mut s = format!("digraph {} {{\n", dot_id(name));
        let mut vs = self.vertices.clone();
        vs.sort();
        for v in &vs {
            s.push_str(&format!("  {};\n", dot_id(v)));
        }
        for (a, b) in &self.edges {
            s.push_str(&format!("  {} -> {};\n", dot_id(a), dot_id(b)));
        }
        s.push_str("}\n");
        s
    }
}

pub(crate) fn dot_id(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Acyclic directed mixed graph: directed edges plus unordered bidirected
/// pairs, stored with the smaller name first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Admg {
    dag: Dag,
    bidirected: BTreeSet<(String, String)>,
}

fn ordered(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl Admg {
    pub fn new<S: AsRef<str>>(vertices: &[S], directed: &[(S, S)], bidirected: &[(S, S)]) -> Result<Self> {
        let dag = Dag::new(vertices, directed)?;
        let mut bi = BTreeSet::new();
        for (a, b) in bidirected {
            let (a, b) = (a.as_ref(), b.as_ref());
            if a == b {
                return Err(invalid(format!("bidirected self-loop at {}", a)));
            }
            if !dag.has_vertex(a) || !dag.has_vertex(b) {
                return Err(Error::UnknownName(format!("{}↔{}", a, b)));
            }
            bi.insert(ordered(a, b));
        }
        Ok(Admg { dag, bidirected: bi })
    }

    pub fn from_dag(dag: Dag) -> Self {
        Admg { dag, bidirected: BTreeSet::new() }
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn vertices(&self) -> &[String] {
        self.dag.vertices()
    }

    pub fn directed(&self) -> &BTreeSet<(String, String)> {
        self.dag.edges()
    }

    pub fn bidirected(&self) -> &BTreeSet<(String, String)> {
        &self.bidirected
    }

    pub fn has_bidirected(&self, a: &str, b: &str) -> bool {
        self.bidirected.contains(&ordered(a, b))
    }

    pub fn parents(&self, v: &str) -> Vec<String> {
        self.dag.parents(v)
    }

    pub fn children(&self, v: &str) -> Vec<String> {
        self.dag.children(v)
    }

    pub fn spouses(&self, v: &str) -> Vec<String> {
        self.bidirected
            .iter()
            .filter_map(|(a, b)| if a == v { Some(b.clone()) } else if b == v { Some(a.clone()) } else { None })
            .collect()
    }

    /// Vertices joined to `x` by a path of bidirected edges, including `x`.
    pub fn c_component(&self, x: &str) -> Result<VSet> {
        if !self.dag.has_vertex(x) {
            return Err(Error::UnknownName(x.to_string()));
        }
        let mut seen = VSet::new();
        let mut queue = VecDeque::from([x.to_string()]);
        while let Some(v) = queue.pop_front() {
            if seen.insert(v.clone()) {
                queue.extend(self.spouses(&v));
            }
        }
        Ok(seen)
    }

    /// All c-components, each sorted, listed by smallest member.
    pub fn c_components(&self) -> Vec<VSet> {
        let mut out: Vec<VSet> = Vec::new();
        let mut vs = self.vertices().to_vec();
        vs.sort();
        for v in vs {
            if !out.iter().any(|c| c.contains(&v)) {
                out.push(self.c_component(&v).unwrap());
            }
        }
        out
    }

    /// `Ch(X) ∩ C(X) = ∅`.
    pub fn c_condition(&self, x: &str) -> Result<bool> {
        let c = self.c_component(x)?;
        Ok(self.children(x).iter().all(|ch| !c.contains(ch)))
    }

    /// Maximal cliques (size ≥ 2) of the bidirected part, exhaustively
    /// enumerated; each clique is sorted and the list is sorted.
    pub fn maximal_bidirected_cliques(&self) -> Result<Vec<Vec<String>>> {
        let touched: Vec<String> = self
            .bidirected
            .iter()
            .flat_map(|(a, b)| [a.clone(), b.clone()])
            .collect::<VSet>()
            .into_iter()
            .collect();
        if touched.len() > 32 {
            return Err(Error::Budget(format!("{} confounded vertices exceed the clique limit of 32", touched.len())));
        }
        let mut cliques = Vec::new();
        bron_kerbosch(self, Vec::new(), touched.clone(), Vec::new(), &mut cliques);
        let mut cliques: Vec<Vec<String>> = cliques
            .into_iter()
            .filter(|c: &Vec<String>| c.len() >= 2)
            .map(|mut c| {
                c.sort();
                c
            })
            .collect();
        cliques.sort();
        Ok(cliques)
    }

    pub fn to_dot(&self, name: &str) -> String {
        let mut s = format!("digraph {} {{\n", dot_id(name));
        let mut vs = self.vertices().to_vec();
        vs.sort();
        for v in &vs {
            s.push_str(&format!("  {};\n", dot_id(v)));
        }
        for (a, b) in self.directed() {
            s.push_str(&format!("  {} -> {};\n", dot_id(a), dot_id(b)));
        }
        for (a, b) in &self.bidirected {
            s.push_str(&format!("  {} -> {} [dir=both, style=dashed];\n", dot_id(a), dot_id(b)));
        }
        s.push_str("}\n");
        s
    }
}

fn bron_kerbosch(g: &Admg, r: Vec<String>, mut p: Vec<String>, mut x: Vec<String>, out: &mut Vec<Vec<String>>) {
    if p.is_empty() && x.is_empty() {
        out.push(r);
        return;
    }
    for v in p.clone() {
        let nbrs: VSet = g.spouses(&v).into_iter().collect();
        let mut r2 = r.clone();
        r2.push(v.clone());
        let p2 = p.iter().filter(|w| nbrs.contains(*w)).cloned().collect();
        let x2 = x.iter().filter(|w| nbrs.contains(*w)).cloned().collect();
        bron_kerbosch(g, r2, p2, x2, out);
        p.retain(|w| w != &v);
        x.push(v);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rootification {
    /// One root per bidirected edge.
    Rho,
    /// One root per maximal bidirected clique.
    RhoTilde,
}

/// A DAG over `observed ∪ roots` whose latent projection onto `observed`
/// is the source ADMG.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rootified {
    pub dag: Dag,
    pub roots: Vec<String>,
}

fn fresh(base: String, taken: &VSet) -> String {
    let mut name = base;
    while taken.contains(&name) {
        name.push('\'');
    }
    name
}

pub fn rootify(a: &Admg, method: Rootification) -> Result<Rootified> {
    let groups: Vec<Vec<String>> = match method {
        Rootification::Rho => a.bidirected.iter().map(|(x, y)| vec![x.clone(), y.clone()]).collect(),
        Rootification::RhoTilde => a.maximal_bidirected_cliques()?,
    };
    let mut taken: VSet = a.vertices().iter().cloned().collect();
    let mut vertices = a.vertices().to_vec();
    let mut edges = a.directed().clone();
    let mut roots = Vec::new();
    for g in groups {
        let name = fresh(format!("R_{{{}}}", g.join(",")), &taken);
        taken.insert(name.clone());
        vertices.push(name.clone());
        for child in g {
            edges.insert((name.clone(), child));
        }
        roots.push(name);
    }
    Ok(Rootified { dag: Dag::from_parts(vertices, edges)?, roots })
}

/// Latent projection of `g` onto `observed`.
pub fn latent_projection(g: &Dag, observed: &VSet) -> Result<Admg> {
    for o in observed {
        if !g.has_vertex(o) {
            return Err(Error::UnknownName(o.clone()));
        }
    }
    // observed vertices hit first along directed paths from v through latents
    let first_observed = |v: &str| -> VSet {
        let mut hit = VSet::new();
        let mut seen = VSet::new();
        let mut stack = g.children(v);
        while let Some(x) = stack.pop() {
            if !seen.insert(x.clone()) {
                continue;
            }
            if observed.contains(&x) {
                hit.insert(x);
            } else {
                stack.extend(g.children(&x));
            }
        }
        hit
    };
    let vertices: Vec<String> = g.vertices().iter().filter(|v| observed.contains(*v)).cloned().collect();
    let mut directed = BTreeSet::new();
    for a in &vertices {
        for b in first_observed(a) {
            directed.insert((a.clone(), b));
        }
    }
    let mut bidirected = BTreeSet::new();
    for l in g.vertices().iter().filter(|v| !observed.contains(*v)) {
        let hits: Vec<String> = first_observed(l).into_iter().collect();
        for i in 0..hits.len() {
            for j in i + 1..hits.len() {
                bidirected.insert(ordered(&hits[i], &hits[j]));
            }
        }
    }
    Ok(Admg { dag: Dag::from_parts(vertices, directed)?, bidirected })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn topological_examples() {
        let g = Dag::new(&["C", "B", "A"], &[("A", "B"), ("B", "C")]).unwrap();
        assert_eq!(g.topological_order().unwrap(), vec!["A", "B", "C"]);
        let e = Dag::new::<&str>(&["B", "A"], &[]).unwrap();
        assert_eq!(e.topological_order().unwrap(), vec!["A", "B"]);
        assert!(matches!(Dag::new(&["A", "B"], &[("A", "B"), ("B", "A")]), Err(Error::Cycle(_))));
    }

    #[test]
    fn smoking_projection_is_front_door() {
        let g = Dag::new(&["B", "S", "T", "L"], &[("B", "S"), ("B", "L"), ("S", "T"), ("T", "L")]).unwrap();
        let a = latent_projection(&g, &vset(&["S", "T", "L"])).unwrap();
        let want = Admg::new(&["S", "T", "L"], &[("S", "T"), ("T", "L")], &[("S", "L")]).unwrap();
        assert_eq!(a.directed(), want.directed());
        assert_eq!(a.bidirected(), want.bidirected());
        let r = rootify(&a, Rootification::Rho).unwrap();
        assert_eq!(r.roots, vec!["R_{L,S}"]);
        assert!(r.dag.edges().contains(&("R_{L,S}".to_string(), "S".to_string())));
    }

    #[test]
    fn chain_projection() {
        let g = Dag::new(&["A", "B", "C"], &[("A", "B"), ("B", "C")]).unwrap();
        let a = latent_projection(&g, &vset(&["A", "C"])).unwrap();
        assert_eq!(a.directed().len(), 1);
        assert!(a.bidirected().is_empty());
    }

    #[test]
    fn triangle_rootifications() {
        let a = Admg::new(&["X1", "X2", "X3"], &[], &[("X1", "X2"), ("X2", "X3"), ("X1", "X3")]).unwrap();
        assert_eq!(rootify(&a, Rootification::Rho).unwrap().roots.len(), 3);
        let t = rootify(&a, Rootification::RhoTilde).unwrap();
        assert_eq!(t.roots, vec!["R_{X1,X2,X3}"]);
        assert_eq!(t.dag.children("R_{X1,X2,X3}").len(), 3);
    }

    #[test]
    fn c_components() {
        let a = Admg::new(&["X", "Z", "Y"], &[("X", "Z"), ("Z", "Y")], &[("X", "Z")]).unwrap();
        assert_eq!(a.c_component("X").unwrap(), vset(&["X", "Z"]));
        assert!(!a.c_condition("X").unwrap());
        let f = Admg::new(&["S", "T", "L"], &[("S", "T"), ("T", "L")], &[("S", "L")]).unwrap();
        assert_eq!(f.c_component("T").unwrap(), vset(&["T"]));
        assert!(f.c_condition("T").unwrap());
    }
}

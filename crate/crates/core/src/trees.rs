//! Decorated rooted trees, planted trees and forests, with grafting and cutting combinatorics.
//!
//! Trees are kept in canonical form: children sorted by (edge label, subtree).
//! Operations that need stable vertex ids across several steps work on
//! [`Flat`], an exploded layout, and canonicalize at the end.

use std::fmt;

use crate::decorations::Label;
use crate::error::{Error, Result};

/// A rooted tree with one label per vertex and per edge, in canonical form.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Tree {
    root: Label,
    children: Vec<(Label, Tree)>,
}

/// Address of a vertex: child indices from the root, in canonical order.
/// An edge is addressed by the id of its upper end.
pub type VertexId = Vec<usize>;

impl Tree {
    pub fn vertex(label: Label) -> Self {
        Tree { root: label, children: Vec::new() }
    }

    /// Builds a tree and sorts the children into canonical position.
    pub fn new(root: Label, mut children: Vec<(Label, Tree)>) -> Self {
        children.sort();
        Tree { root, children }
    }

    /// Builds a tree without sorting; pass it through [`Tree::canonicalize`] before use.
    pub fn raw(root: Label, children: Vec<(Label, Tree)>) -> Self {
        Tree { root, children }
    }

    pub fn canonicalize(&self) -> Tree {
        Tree::new(
            self.root.clone(),
            self.children.iter().map(|(a, t)| (a.clone(), t.canonicalize())).collect(),
        )
    }

    pub fn is_canonical(&self) -> bool {
        self.children.windows(2).all(|w| w[0] <= w[1])
            && self.children.iter().all(|(_, t)| t.is_canonical())
    }

    pub fn root(&self) -> &Label {
        &self.root
    }

    pub fn children(&self) -> &[(Label, Tree)] {
        &self.children
    }

    pub fn vertex_count(&self) -> usize {
        1 + self.children.iter().map(|(_, t)| t.vertex_count()).sum::<usize>()
    }

    pub fn edge_count(&self) -> usize {
        self.vertex_count() - 1
    }

    /// Vertex ids in preorder; position `i` matches index `i` of [`Flat::from_tree`].
    pub fn vertex_ids(&self) -> Vec<VertexId> {
        let mut out = Vec::new();
        fn walk(t: &Tree, path: &mut VertexId, out: &mut Vec<VertexId>) {
            out.push(path.clone());
            for (i, (_, c)) in t.children.iter().enumerate() {
                path.push(i);
                walk(c, path, out);
                path.pop();
            }
        }
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn subtree(&self, v: &[usize]) -> Option<&Tree> {
        match v.split_first() {
            None => Some(self),
            Some((&i, rest)) => self.children.get(i)?.1.subtree(rest),
        }
    }

    /// Every vertex and edge label, vertices first, each in preorder.
    pub fn labels(&self) -> (Vec<&Label>, Vec<&Label>) {
        let mut vs = Vec::new();
        let mut es = Vec::new();
        fn walk<'a>(t: &'a Tree, vs: &mut Vec<&'a Label>, es: &mut Vec<&'a Label>) {
            vs.push(&t.root);
            for (a, c) in &t.children {
                es.push(a);
                walk(c, vs, es);
            }
        }
        walk(self, &mut vs, &mut es);
        (vs, es)
    }
}

/// `x ↷_v y`: attaches `x` under vertex `v` of `y` through a new edge labelled `a`.
pub fn graft_at(x: &Tree, v: &[usize], y: &Tree, a: &Label) -> Result<Tree> {
    match v.split_first() {
        None => {
            let mut children = y.children.clone();
            children.push((a.clone(), x.clone()));
            Ok(Tree::new(y.root.clone(), children))
        }
        Some((&i, rest)) => {
            let (e, c) = y.children.get(i).ok_or_else(|| Error::InvalidVertex(v.to_vec()))?;
            let grafted = graft_at(x, rest, c, a).map_err(|_| Error::InvalidVertex(v.to_vec()))?;
            let mut children = y.children.clone();
            children[i] = (e.clone(), grafted);
            Ok(Tree::new(y.root.clone(), children))
        }
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.root)?;
        for (a, t) in &self.children {
            write!(f, " [{a}]{t}")?;
        }
        f.write_str(")")
    }
}

/// A tree hanging from an undecorated root through an edge labelled `edge`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Planted {
    pub edge: Label,
    pub body: Tree,
}

impl Planted {
    pub fn new(edge: Label, body: Tree) -> Self {
        Planted { edge, body }
    }

    pub fn vertex_count(&self) -> usize {
        self.body.vertex_count()
    }
}

impl fmt::Display for Planted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]{}", self.edge, self.body)
    }
}

/// Splits off the branch above root-child edge `e` of the body.
///
/// Returns the branch as a planted tree and the remaining planted tree.
pub fn split_root_edge(p: &Planted, e: &[usize]) -> Result<(Planted, Planted)> {
    let &[i] = e else {
        return Err(Error::InvalidVertex(e.to_vec()));
    };
    let children = p.body.children();
    let (a, branch) = children.get(i).ok_or_else(|| Error::InvalidVertex(e.to_vec()))?;
    let mut rest = children.to_vec();
    rest.remove(i);
    Ok((
        Planted::new(a.clone(), branch.clone()),
        Planted::new(p.edge.clone(), Tree { root: p.body.root.clone(), children: rest }),
    ))
}

/// A commutative monomial of planted trees; the empty forest is the unit.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Forest(Vec<Planted>);

impl Forest {
    pub fn unit() -> Self {
        Forest(Vec::new())
    }

    pub fn new(mut trees: Vec<Planted>) -> Self {
        trees.sort();
        Forest(trees)
    }

    pub fn single(p: Planted) -> Self {
        Forest(vec![p])
    }

    pub fn trees(&self) -> &[Planted] {
        &self.0
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }

    pub fn vertex_count(&self) -> usize {
        self.0.iter().map(Planted::vertex_count).sum()
    }

    /// Commutative product.
    pub fn mul(&self, other: &Forest) -> Forest {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        Forest::new(v)
    }
}

impl fmt::Display for Forest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// Exploded layout of a tree or a planted forest with stable vertex indices.
///
/// `edge[v]` is the label of the edge whose upper end is `v`; it is `None`
/// only for the root of an unplanted tree. Components are the vertices with
/// no parent.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Flat {
    pub parent: Vec<Option<usize>>,
    pub vertex: Vec<Label>,
    pub edge: Vec<Option<Label>>,
}

impl Flat {
    pub fn len(&self) -> usize {
        self.vertex.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertex.is_empty()
    }

    fn push_tree(&mut self, t: &Tree, parent: Option<usize>, edge: Option<Label>) -> usize {
        let me = self.vertex.len();
        self.parent.push(parent);
        self.vertex.push(t.root.clone());
        self.edge.push(edge);
        for (a, c) in &t.children {
            self.push_tree(c, Some(me), Some(a.clone()));
        }
        me
    }

    pub fn from_tree(t: &Tree) -> Self {
        let mut f = Flat::default();
        f.push_tree(t, None, None);
        f
    }

    pub fn from_planted(p: &Planted) -> Self {
        let mut f = Flat::default();
        f.push_tree(&p.body, None, Some(p.edge.clone()));
        f
    }

    /// Components in forest order, each in preorder.
    pub fn from_forest(forest: &Forest) -> Self {
        let mut f = Flat::default();
        for p in forest.trees() {
            f.push_tree(&p.body, None, Some(p.edge.clone()));
        }
        f
    }

    /// Index of the first vertex of each component.
    pub fn roots(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.parent[v].is_none()).collect()
    }

    pub fn children_of(&self, v: usize) -> Vec<usize> {
        (0..self.len()).filter(|&c| self.parent[c] == Some(v)).collect()
    }

    /// Appends `other` as new components and returns the index offset.
    pub fn append(&mut self, other: &Flat) -> usize {
        let off = self.len();
        self.parent.extend(other.parent.iter().map(|p| p.map(|x| x + off)));
        self.vertex.extend(other.vertex.iter().cloned());
        self.edge.extend(other.edge.iter().cloned());
        off
    }

    fn build(&self, v: usize, kids: &[Vec<usize>]) -> Tree {
        Tree::new(
            self.vertex[v].clone(),
            kids[v]
                .iter()
                .map(|&c| (self.edge[c].clone().expect("non-root vertex without edge"), self.build(c, kids)))
                .collect(),
        )
    }

    fn kids(&self) -> Vec<Vec<usize>> {
        let mut kids = vec![Vec::new(); self.len()];
        for (v, p) in self.parent.iter().enumerate() {
            if let Some(p) = p {
                kids[*p].push(v);
            }
        }
        kids
    }

    /// Canonical tree; the layout must hold exactly one unplanted component.
    pub fn to_tree(&self) -> Tree {
        let roots = self.roots();
        assert!(roots.len() == 1 && self.edge[roots[0]].is_none(), "layout is not a single tree");
        self.build(roots[0], &self.kids())
    }

    /// Canonical forest; every component must be planted.
    pub fn to_forest(&self) -> Forest {
        let kids = self.kids();
        Forest::new(
            self.roots()
                .into_iter()
                .map(|r| Planted::new(self.edge[r].clone().expect("unplanted component"), self.build(r, &kids)))
                .collect(),
        )
    }

    pub fn to_planted(&self) -> Planted {
        let f = self.to_forest();
        assert!(f.0.len() == 1, "layout is not a single planted tree");
        f.0.into_iter().next().unwrap()
    }

    /// The sublayout induced on `keep`; vertices whose parent is dropped become
    /// component roots and keep their edge as plant edge.
    pub fn restrict(&self, keep: &[bool]) -> Flat {
        let mut index = vec![usize::MAX; self.len()];
        let mut out = Flat::default();
        for v in 0..self.len() {
            if keep[v] {
                index[v] = out.len();
                out.parent.push(self.parent[v].filter(|&p| keep[p]).map(|p| index[p]));
                out.vertex.push(self.vertex[v].clone());
                out.edge.push(self.edge[v].clone());
            }
        }
        out
    }

    /// All upper parts as membership masks: sets closed under moving to children.
    pub fn upper_parts(&self) -> Vec<Vec<bool>> {
        let kids = self.kids();
        fn combine(parts: &[Vec<Vec<usize>>]) -> Vec<Vec<usize>> {
            let mut acc = vec![Vec::new()];
            for options in parts {
                acc = acc
                    .iter()
                    .flat_map(|base| {
                        options.iter().map(move |o| {
                            let mut v = base.clone();
                            v.extend(o);
                            v
                        })
                    })
                    .collect();
            }
            acc
        }
        fn subtree(v: usize, kids: &[Vec<usize>], out: &mut Vec<usize>) {
            out.push(v);
            for &c in &kids[v] {
                subtree(c, kids, out);
            }
        }
        fn ups(v: usize, kids: &[Vec<usize>]) -> Vec<Vec<usize>> {
            let below: Vec<_> = kids[v].iter().map(|&c| ups(c, kids)).collect();
            let mut out = combine(&below);
            let mut whole = Vec::new();
            subtree(v, kids, &mut whole);
            out.push(whole);
            out
        }
        let per_root: Vec<_> = self.roots().into_iter().map(|r| ups(r, &kids)).collect();
        combine(&per_root)
            .into_iter()
            .map(|set| {
                let mut mask = vec![false; self.len()];
                for v in set {
                    mask[v] = true;
                }
                mask
            })
            .collect()
    }
}

/// Upper parts of a forest, as sorted index lists into [`Flat::from_forest`].
pub fn upper_parts(f: &Forest) -> Vec<Vec<usize>> {
    Flat::from_forest(f)
        .upper_parts()
        .into_iter()
        .map(|mask| mask_to_set(&mask))
        .collect()
}

fn mask_to_set(mask: &[bool]) -> Vec<usize> {
    mask.iter().enumerate().filter(|(_, &k)| k).map(|(i, _)| i).collect()
}

/// `F|I` with `I` given as indices into [`Flat::from_forest`].
pub fn restrict(f: &Forest, subset: &[usize]) -> Result<Forest> {
    let flat = Flat::from_forest(f);
    let mut keep = vec![false; flat.len()];
    for &v in subset {
        *keep.get_mut(v).ok_or_else(|| Error::InvalidVertex(vec![v]))? = true;
    }
    Ok(flat.restrict(&keep).to_forest())
}

/// All maps from the trees of `f` to the vertices of `g` or to 0 (`None`).
/// Vertices are indices into [`Flat::from_forest`] of `g`.
pub fn grafting_maps(f: &Forest, g: &Forest) -> Vec<Vec<Option<usize>>> {
    let targets: Vec<Option<usize>> =
        std::iter::once(None).chain((0..g.vertex_count()).map(Some)).collect();
    let mut out = vec![Vec::new()];
    for _ in f.trees() {
        out = out
            .into_iter()
            .flat_map(|m: Vec<Option<usize>>| {
                targets.iter().map(move |t| {
                    let mut m = m.clone();
                    m.push(*t);
                    m
                })
            })
            .collect();
    }
    out
}

/// Layout of `F ↷_g G` together with the grafting sites `(new edge, target vertex)`.
///
/// Vertices of `g` keep their indices; the trees of `f` follow in order.
pub fn graft_forest_flat(f: &Forest, map: &[Option<usize>], g: &Forest) -> Result<(Flat, Vec<(usize, usize)>)> {
    if map.len() != f.trees().len() {
        return Err(Error::InvalidGrafting);
    }
    let mut flat = Flat::from_forest(g);
    let n = flat.len();
    let mut sites = Vec::new();
    for (p, target) in f.trees().iter().zip(map) {
        let off = flat.append(&Flat::from_planted(p));
        if let Some(v) = *target {
            if v >= n {
                return Err(Error::InvalidGrafting);
            }
            flat.parent[off] = Some(v);
            sites.push((off, v));
        }
    }
    Ok((flat, sites))
}

/// `F ↷_g G`: each tree of `f` is attached by its plant edge to its target
/// vertex; trees mapped to 0 stay separate.
pub fn graft_forest(f: &Forest, map: &[Option<usize>], g: &Forest) -> Result<Forest> {
    Ok(graft_forest_flat(f, map, g)?.0.to_forest())
}

/// Isomorphisms of the underlying undecorated planted forests.
///
/// Each is a vertex bijection `σ` from [`Flat::from_forest`] of `f1` to that
/// of `f2`; edges follow through their upper ends.
pub fn isomorphisms(f1: &Forest, f2: &Forest) -> Vec<Vec<usize>> {
    let a = Flat::from_forest(f1);
    let b = Flat::from_forest(f2);
    flat_isomorphisms(&a, &b)
}

/// Vertex bijections between two layouts that preserve parents; both layouts
/// must list every parent before its children.
pub fn flat_isomorphisms(a: &Flat, b: &Flat) -> Vec<Vec<usize>> {
    if a.len() != b.len() {
        return Vec::new();
    }
    let sizes = |f: &Flat| {
        let mut s = vec![1usize; f.len()];
        // Preorder layout: children come after parents.
        for v in (0..f.len()).rev() {
            if let Some(p) = f.parent[v] {
                s[p] += s[v];
            }
        }
        s
    };
    // (subtree size, out-degree) must agree under any isomorphism.
    let signature = |f: &Flat| -> Vec<(usize, usize)> {
        sizes(f).into_iter().enumerate().map(|(v, s)| (s, f.children_of(v).len())).collect()
    };
    let (sa, sb) = (signature(a), signature(b));
    let mut out = Vec::new();
    let mut sigma = vec![usize::MAX; a.len()];
    let mut used = vec![false; b.len()];
    type Side<'a> = (&'a Flat, &'a [(usize, usize)]);
    fn go(
        v: usize,
        ctx: (Side<'_>, Side<'_>),
        sigma: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let ((a, sa), (b, sb)) = ctx;
        if v == a.len() {
            out.push(sigma.clone());
            return;
        }
        let want_parent = a.parent[v].map(|p| sigma[p]);
        for w in 0..b.len() {
            if used[w] || b.parent[w] != want_parent || sa[v] != sb[w] {
                continue;
            }
            used[w] = true;
            sigma[v] = w;
            go(v + 1, ctx, sigma, used, out);
            used[w] = false;
        }
        sigma[v] = usize::MAX;
    }
    go(0, ((a, &sa), (b, &sb)), &mut sigma, &mut used, &mut out);
    out
}

/// Exhaustive generation of decorated trees, planted trees and forests over
/// finite label sets, each in canonical order.
pub mod enumerate {
    use super::*;

    /// Multisets drawn from `items` (sorted) whose weights sum to `total`,
    /// each returned as a nondecreasing list.
    fn multisets<T: Clone>(items: &[(usize, T)], total: usize) -> Vec<Vec<T>> {
        fn go<T: Clone>(items: &[(usize, T)], start: usize, left: usize, cur: &mut Vec<T>, out: &mut Vec<Vec<T>>) {
            if left == 0 {
                out.push(cur.clone());
                return;
            }
            for i in start..items.len() {
                let (w, ref x) = items[i];
                if w <= left {
                    cur.push(x.clone());
                    go(items, i, left - w, cur, out);
                    cur.pop();
                }
            }
        }
        let mut out = Vec::new();
        go(items, 0, total, &mut Vec::new(), &mut out);
        out
    }

    /// All trees with exactly `n` vertices; index `k` of the result holds size `k`.
    fn trees_by_size(n: usize, edges: &[Label], vertices: &[Label]) -> Vec<Vec<Tree>> {
        let mut by_size: Vec<Vec<Tree>> = vec![Vec::new(); n + 1];
        for size in 1..=n {
            let mut branches: Vec<(usize, (Label, Tree))> = Vec::new();
            for (s, ts) in by_size.iter().enumerate().take(size) {
                for a in edges {
                    for t in ts {
                        branches.push((s, (a.clone(), t.clone())));
                    }
                }
            }
            branches.sort_by(|x, y| x.1.cmp(&y.1));
            let mut out = Vec::new();
            for kids in multisets(&branches, size - 1) {
                for b in vertices {
                    out.push(Tree { root: b.clone(), children: kids.clone() });
                }
            }
            out.sort();
            by_size[size] = out;
        }
        by_size
    }

    /// All decorated trees with `min..=max` vertices.
    pub fn trees(min: usize, max: usize, edges: &[Label], vertices: &[Label]) -> Vec<Tree> {
        trees_by_size(max, edges, vertices).into_iter().skip(min.max(1)).flatten().collect()
    }

    pub fn planted(min: usize, max: usize, edges: &[Label], vertices: &[Label]) -> Vec<Planted> {
        let ts = trees(min, max, edges, vertices);
        edges
            .iter()
            .flat_map(|a| ts.iter().map(move |t| Planted::new(a.clone(), t.clone())))
            .collect()
    }

    /// All forests with total vertex count in `min..=max`, including the unit when `min == 0`.
    pub fn forests(min: usize, max: usize, edges: &[Label], vertices: &[Label]) -> Vec<Forest> {
        let items: Vec<(usize, Planted)> = {
            let mut v: Vec<_> =
                planted(1, max, edges, vertices).into_iter().map(|p| (p.vertex_count(), p)).collect();
            v.sort_by(|x, y| x.1.cmp(&y.1));
            v
        };
        let mut out = Vec::new();
        for total in min..=max {
            for ms in multisets(&items, total) {
                out.push(Forest(ms));
            }
        }
        out
    }
}

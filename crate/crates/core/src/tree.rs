//! Truncated trees over the alphabet `0..|Λ|`.
//!
//! A tree is a prefix-closed set of words of length at most `horizon`, stored
//! as an arena in breadth-first order with the children of every node
//! contiguous and sorted by symbol. That layout is canonical, so the derived
//! equality and hash agree with equality of word sets.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::similarity::{walk_section, Ifs, DEFAULT_SECTION_CAP};
use crate::symbols::{check_symbols, Subset, Symbol, Word, MAX_ALPHABET};

pub type NodeId = u32;

/// Default limit on the number of nodes of a grown tree.
pub const DEFAULT_NODE_CAP: usize = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Node {
    parent: NodeId,
    first_child: NodeId,
    children: u64,
    symbol: Symbol,
    depth: u16,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tree {
    alphabet: usize,
    horizon: usize,
    nodes: Vec<Node>,
    /// `levels[k]..levels[k+1]` are the node ids at depth `k`.
    levels: Vec<usize>,
}

/// Result of pruning a tree to the nodes that reach a given depth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reduction {
    Survives(Tree),
    Extinct,
}

impl Reduction {
    pub fn tree(&self) -> Option<&Tree> {
        match self {
            Reduction::Survives(t) => Some(t),
            Reduction::Extinct => None,
        }
    }

    pub fn into_tree(self) -> Option<Tree> {
        match self {
            Reduction::Survives(t) => Some(t),
            Reduction::Extinct => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeSectionEntry {
    pub word: Word,
    pub ratio: f64,
    /// `ratio / scale^power`, in `(r_min, 1]`.
    pub a_value: f64,
}

fn check_alphabet(alphabet: usize) -> Result<()> {
    if alphabet == 0 || alphabet > MAX_ALPHABET {
        return Err(Error::Validation(format!(
            "alphabet size must lie in 1..={MAX_ALPHABET}, got {alphabet}"
        )));
    }
    Ok(())
}

impl Tree {
    /// Breadth-first growth. `children(state, depth)` gives the child mask of a
    /// node (never called at the horizon) and `child_state(state, symbol)` the
    /// state handed to a child.
    pub fn grow<S>(
        alphabet: usize,
        horizon: usize,
        root: S,
        cap: usize,
        mut children: impl FnMut(&S, usize) -> u64,
        mut child_state: impl FnMut(&S, Symbol) -> S,
    ) -> Result<Tree> {
        check_alphabet(alphabet)?;
        if horizon > u16::MAX as usize {
            return Err(Error::Validation(format!("horizon {horizon} is too large")));
        }
        let full = Subset::full(alphabet).0;
        let mut nodes = vec![Node {
            parent: 0,
            first_child: 0,
            children: 0,
            symbol: 0,
            depth: 0,
        }];
        let mut levels = vec![0, 1];
        let mut states = vec![root];
        for depth in 0..horizon {
            let (start, end) = (levels[depth], levels[depth + 1]);
            if start == end {
                break;
            }
            let mut next_states = Vec::new();
            for (offset, state) in states.iter().enumerate() {
                let id = start + offset;
                let mask = children(state, depth) & full;
                nodes[id].children = mask;
                nodes[id].first_child = nodes.len() as NodeId;
                if nodes.len() + mask.count_ones() as usize > cap {
                    return Err(Error::Resource { what: "tree", cap });
                }
                for s in Subset(mask).iter() {
                    nodes.push(Node {
                        parent: id as NodeId,
                        first_child: 0,
                        children: 0,
                        symbol: s,
                        depth: depth as u16 + 1,
                    });
                    next_states.push(child_state(state, s));
                }
            }
            states = next_states;
            levels.push(nodes.len());
        }
        // trailing empty levels carry no information
        while levels.len() > 2 && levels[levels.len() - 1] == levels[levels.len() - 2] {
            levels.pop();
        }
        for n in nodes.iter_mut() {
            if n.children == 0 {
                n.first_child = 0;
            }
        }
        Ok(Tree {
            alphabet,
            horizon,
            nodes,
            levels,
        })
    }

    /// All words of length at most `horizon`.
    pub fn full_tree(alphabet: usize, horizon: usize) -> Result<Tree> {
        let full = Subset::full(alphabet.min(MAX_ALPHABET)).0;
        Tree::grow(
            alphabet,
            horizon,
            (),
            DEFAULT_NODE_CAP,
            |_, _| full,
            |_, _| (),
        )
    }

    /// The prefixes of `word`; its horizon is the word length.
    pub fn ray_tree(alphabet: usize, word: &[Symbol]) -> Result<Tree> {
        check_alphabet(alphabet)?;
        check_symbols(word, alphabet)?;
        Tree::grow(
            alphabet,
            word.len(),
            0usize,
            DEFAULT_NODE_CAP,
            |&k, _| 1u64 << word[k],
            |&k, _| k + 1,
        )
    }

    /// Builds a tree from explicit child sets keyed by node word. Nodes without
    /// an entry are leaves. Fails when an entry's word is not reachable from
    /// the root or when a node at the horizon is given children.
    pub fn from_child_lists(
        alphabet: usize,
        horizon: usize,
        lists: &[(Word, Vec<Symbol>)],
    ) -> Result<Tree> {
        check_alphabet(alphabet)?;
        let mut map: BTreeMap<Word, Subset> = BTreeMap::new();
        for (word, kids) in lists {
            word.check(alphabet)?;
            check_symbols(kids, alphabet)?;
            if kids.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Validation(format!(
                    "children of {word} must be strictly increasing"
                )));
            }
            if !kids.is_empty() && word.len() >= horizon {
                return Err(Error::Validation(format!(
                    "node {word} lies at depth {} but the horizon is {horizon}",
                    word.len()
                )));
            }
            if map
                .insert(word.clone(), Subset::from_symbols(kids))
                .is_some()
            {
                return Err(Error::Validation(format!("node {word} listed twice")));
            }
        }
        let mut seen = 0usize;
        let tree = Tree::grow(
            alphabet,
            horizon,
            Word::empty(),
            DEFAULT_NODE_CAP,
            |w, _| match map.get(w) {
                Some(m) => {
                    seen += 1;
                    m.0
                }
                None => 0,
            },
            |w, s| w.child(s),
        )?;
        if seen != map.len() {
            let missing = map
                .keys()
                .find(|w| !tree.contains(w))
                .expect("an unreached entry exists");
            return Err(Error::Validation(format!(
                "node {missing} is listed but its parent is not in the tree"
            )));
        }
        Ok(tree)
    }

    /// Builds a tree from a prefix-closed word set. The root is implied.
    pub fn from_words(alphabet: usize, horizon: usize, words: &[Word]) -> Result<Tree> {
        check_alphabet(alphabet)?;
        let mut children: BTreeMap<Word, Subset> = BTreeMap::new();
        let set: std::collections::BTreeSet<&Word> = words.iter().collect();
        for w in words {
            w.check(alphabet)?;
            if w.len() > horizon {
                return Err(Error::Validation(format!(
                    "word {w} is longer than the horizon {horizon}"
                )));
            }
            if let Some((&last, parent)) = w.split_last() {
                let parent = Word::from(parent);
                if !parent.is_empty() && !set.contains(&parent) {
                    return Err(Error::Validation(format!(
                        "word set is not prefix-closed: {w} is present but {parent} is not"
                    )));
                }
                children.entry(parent).or_default().0 |= 1u64 << last;
            }
        }
        let lists: Vec<(Word, Vec<Symbol>)> = children
            .into_iter()
            .map(|(w, m)| (w, m.symbols()))
            .collect();
        Tree::from_child_lists(alphabet, horizon, &lists)
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Number of nodes, root included.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Never true: the root is always present.
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> NodeId {
        0
    }

    /// Largest depth that holds a node.
    pub fn height(&self) -> usize {
        self.levels.len() - 2
    }

    /// Node ids at depth `k`.
    pub fn level(&self, k: usize) -> std::ops::Range<usize> {
        if k + 1 < self.levels.len() {
            self.levels[k]..self.levels[k + 1]
        } else {
            0..0
        }
    }

    /// `|T_k|`, the number of nodes at depth `k`.
    pub fn generation_size(&self, k: usize) -> usize {
        self.level(k).len()
    }

    pub fn depth(&self, id: NodeId) -> usize {
        self.nodes[id as usize].depth as usize
    }

    pub fn children(&self, id: NodeId) -> Subset {
        Subset(self.nodes[id as usize].children)
    }

    pub fn child(&self, id: NodeId, s: Symbol) -> Option<NodeId> {
        let n = &self.nodes[id as usize];
        if s as usize >= 64 || n.children >> s & 1 == 0 {
            return None;
        }
        let below = n.children & ((1u64 << s) - 1);
        Some(n.first_child + below.count_ones())
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        (id != 0).then(|| self.nodes[id as usize].parent)
    }

    pub fn symbol(&self, id: NodeId) -> Option<Symbol> {
        (id != 0).then(|| self.nodes[id as usize].symbol)
    }

    pub fn word_of(&self, id: NodeId) -> Word {
        let mut out = Vec::with_capacity(self.depth(id));
        let mut cur = id;
        while cur != 0 {
            let n = &self.nodes[cur as usize];
            out.push(n.symbol);
            cur = n.parent;
        }
        out.reverse();
        Word(out)
    }

    pub fn find(&self, word: &[Symbol]) -> Option<NodeId> {
        let mut cur = 0;
        for &s in word {
            cur = self.child(cur, s)?;
        }
        Some(cur)
    }

    pub fn contains(&self, word: &[Symbol]) -> bool {
        self.find(word).is_some()
    }

    /// All words in lexicographic order (the root first).
    pub fn words(&self) -> Vec<Word> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = vec![(0 as NodeId, Word::empty())];
        while let Some((id, w)) = stack.pop() {
            for s in self.children(id).symbols().into_iter().rev() {
                stack.push((self.child(id, s).expect("child present"), w.child(s)));
            }
            out.push(w);
        }
        out
    }

    /// `T^v = {j : vj ∈ T}` with horizon reduced by `|v|`.
    pub fn descendant_tree(&self, v: &[Symbol]) -> Result<Tree> {
        let start = self
            .find(v)
            .ok_or_else(|| Error::NotFound(format!("node {} is not in the tree", Word::from(v))))?;
        Tree::grow(
            self.alphabet,
            self.horizon - v.len(),
            start,
            usize::MAX,
            |&id, _| self.nodes[id as usize].children,
            |&id, s| self.child(id, s).expect("child present"),
        )
    }

    /// Keeps the nodes that are at depth `≥ n` or have a descendant at depth `n`.
    /// The horizon is unchanged. `Extinct` when nothing reaches depth `n`.
    pub fn reduce_to_horizon(&self, n: usize) -> Result<Reduction> {
        if n > self.horizon {
            return Err(Error::Precondition(format!(
                "reduction depth {n} exceeds the horizon {}",
                self.horizon
            )));
        }
        if self.generation_size(n) == 0 {
            return Ok(Reduction::Extinct);
        }
        let mut keep = vec![false; self.len()];
        for k in (0..self.levels.len() - 1).rev() {
            for id in self.level(k) {
                keep[id] = k >= n || {
                    let node = &self.nodes[id];
                    node.children != 0 && {
                        let first = node.first_child as usize;
                        let count = node.children.count_ones() as usize;
                        keep[first..first + count].iter().any(|&b| b)
                    }
                };
            }
        }
        let kept_mask = |id: NodeId| -> u64 {
            let node = &self.nodes[id as usize];
            let mut mask = 0;
            for (k, s) in Subset(node.children).iter().enumerate() {
                if keep[node.first_child as usize + k] {
                    mask |= 1u64 << s;
                }
            }
            mask
        };
        let tree = Tree::grow(
            self.alphabet,
            self.horizon,
            0 as NodeId,
            usize::MAX,
            |&id, _| kept_mask(id),
            |&id, s| self.child(id, s).expect("child present"),
        )?;
        Ok(Reduction::Survives(tree))
    }

    /// Whether every node above the horizon has its child set in `family`.
    pub fn is_family_tree(&self, family: &[Subset]) -> bool {
        self.nodes
            .iter()
            .filter(|n| (n.depth as usize) < self.horizon)
            .all(|n| family.contains(&Subset(n.children)))
    }

    /// Node ids whose child set is not in `family` (nodes above the horizon).
    pub fn family_violations(&self, family: &[Subset]) -> Vec<NodeId> {
        (0..self.len() as NodeId)
            .filter(|&id| self.depth(id) < self.horizon && !family.contains(&self.children(id)))
            .collect()
    }

    /// `# alphabet=k horizon=n` followed by one word per line in lexicographic
    /// order; the root is the empty line.
    pub fn to_canonical_string(&self) -> String {
        let mut out = format!("# alphabet={} horizon={}\n", self.alphabet, self.horizon);
        for w in self.words() {
            let _ = writeln!(out, "{}", w.to_digits());
        }
        out
    }

    pub fn parse_canonical(text: &str) -> Result<Tree> {
        let parse_err = |message: String| Error::Parse {
            path: "tree".into(),
            message,
        };
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| parse_err("empty input".into()))?;
        let mut alphabet = None;
        let mut horizon = None;
        for field in header.trim_start_matches('#').split_whitespace() {
            match field.split_once('=') {
                Some(("alphabet", v)) => alphabet = v.parse::<usize>().ok(),
                Some(("horizon", v)) => horizon = v.parse::<usize>().ok(),
                _ => return Err(parse_err(format!("unknown header field {field:?}"))),
            }
        }
        let alphabet = alphabet.ok_or_else(|| parse_err("header lacks alphabet".into()))?;
        let horizon = horizon.ok_or_else(|| parse_err("header lacks horizon".into()))?;
        let mut words = Vec::new();
        for line in lines {
            let w = Word::parse_digits(line.trim_end_matches('\r'), alphabet)?;
            if !w.is_empty() {
                words.push(w);
            }
        }
        Tree::from_words(alphabet, horizon, &words)
    }

    /// `T ∩ Π_{scale^power}` with the values `a(i) = r_i / scale^power`.
    /// Fails with a horizon error when a branch at the horizon has not yet
    /// reached the section.
    pub fn tree_section(&self, ifs: &Ifs, scale: f64, power: u32) -> Result<Vec<TreeSectionEntry>> {
        self.check_ifs(ifs)?;
        if !(scale > 0.0 && scale <= ifs.r_min()) {
            return Err(Error::Domain(format!(
                "section scale must lie in (0, r_min = {}], got {scale}",
                ifs.r_min()
            )));
        }
        let target = scale.powi(power as i32);
        let mut out = Vec::new();
        self.walk(ifs, self.root(), target, &mut |w, r| {
            out.push(TreeSectionEntry {
                word: Word::from(w),
                ratio: r,
                a_value: r / target,
            })
        })?;
        Ok(out)
    }

    /// `|T ∩ Π_scale|`.
    pub fn section_count(&self, ifs: &Ifs, scale: f64) -> Result<usize> {
        self.check_ifs(ifs)?;
        self.walk(ifs, self.root(), scale, &mut |_, _| {})
    }

    /// Walks `T^start ∩ Π_scale`, words relative to `start`.
    pub(crate) fn walk(
        &self,
        ifs: &Ifs,
        start: NodeId,
        scale: f64,
        visit: &mut dyn FnMut(&[Symbol], f64),
    ) -> Result<usize> {
        let horizon = self.horizon;
        walk_section(
            ifs,
            scale,
            DEFAULT_SECTION_CAP,
            false,
            start,
            &mut |id, s| self.child(id, s),
            &mut |id, _| {
                if self.depth(id) >= horizon {
                    Err(Error::Horizon { horizon, scale })
                } else {
                    Ok(())
                }
            },
            &mut |w, r, _| visit(w, r),
        )
    }

    fn check_ifs(&self, ifs: &Ifs) -> Result<()> {
        if ifs.len() != self.alphabet {
            return Err(Error::DimensionMismatch {
                expected: self.alphabet,
                got: ifs.len(),
            });
        }
        Ok(())
    }

    /// The projected set `Γ(T)` at scale `scale`: one point per word of the
    /// reduced tree in the section. Resolution `2·scale·R_K`.
    pub fn project(&self, ifs: &Ifs, scale: f64) -> Result<PointCloud> {
        self.check_ifs(ifs)?;
        if !(scale > 0.0) {
            return Err(Error::Domain(format!(
                "projection scale must be positive, got {scale}"
            )));
        }
        let reduced = match self.reduce_to_horizon(self.horizon)? {
            Reduction::Survives(t) => t,
            Reduction::Extinct => {
                return Err(Error::EmptySet(
                    "the tree has no node at its horizon".into(),
                ))
            }
        };
        reduced.project_reduced(ifs, reduced.root(), scale)
    }

    /// Projection of `T^start` for an already reduced tree.
    pub(crate) fn project_reduced(
        &self,
        ifs: &Ifs,
        start: NodeId,
        scale: f64,
    ) -> Result<PointCloud> {
        let x0 = ifs.base_point();
        let d = ifs.dim();
        let mut coords = Vec::new();
        let mut buf = vec![0.0; d];
        let horizon = self.horizon;
        walk_section(
            ifs,
            scale,
            DEFAULT_SECTION_CAP,
            true,
            start,
            &mut |id, s| self.child(id, s),
            &mut |id, _| {
                if self.depth(id) >= horizon {
                    Err(Error::Horizon { horizon, scale })
                } else {
                    Ok(())
                }
            },
            &mut |_, _, m| {
                m.expect("maps are tracked").apply_into(&x0, &mut buf);
                coords.extend_from_slice(&buf);
            },
        )?;
        if coords.is_empty() {
            return Err(Error::EmptySet("no projected point".into()));
        }
        Ok(PointCloud::from_raw(
            d,
            coords,
            crate::similarity::cloud_resolution(ifs, scale),
        ))
    }
}

/// Outcome of comparing `{j : ij ∈ T ∩ Π_{ρ^{n+1}}}` with `T^i ∩ Π_{ρ/a(i)}`
/// for every `i ∈ T ∩ Π_{ρ^n}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NextGenerationReport {
    pub power: u32,
    pub entries_checked: usize,
    pub continuations_checked: usize,
    /// Section words `i` where the two sets differ.
    pub mismatches: Vec<Word>,
}

impl NextGenerationReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Exhaustive check of the passage from `Π_{ρ^n}` to `Π_{ρ^{n+1}}` through
/// the rescaled sections `Π_{ρ/a(i)}` of the descendant trees.
pub fn check_next_generation(
    tree: &Tree,
    ifs: &Ifs,
    scale: f64,
    power: u32,
) -> Result<NextGenerationReport> {
    let current = tree.tree_section(ifs, scale, power)?;
    let next = tree.tree_section(ifs, scale, power + 1)?;
    let mut by_prefix: BTreeMap<Word, Vec<Word>> = BTreeMap::new();
    let mut continuations = 0;
    for e in &next {
        let owner = current
            .iter()
            .find(|c| c.word.is_prefix_of(&e.word))
            .ok_or_else(|| {
                Error::Validation(format!("{} has no prefix in the coarser section", e.word))
            })?;
        by_prefix
            .entry(owner.word.clone())
            .or_default()
            .push(Word::from(&e.word[owner.word.len()..]));
    }
    let mut mismatches = Vec::new();
    for entry in &current {
        let node = tree
            .find(&entry.word)
            .expect("section words are tree nodes");
        let rescaled = scale / entry.a_value;
        let mut local = Vec::new();
        tree.walk(ifs, node, rescaled, &mut |w, _| local.push(Word::from(w)))?;
        continuations += local.len();
        let from_next = by_prefix.remove(&entry.word).unwrap_or_default();
        if from_next != local {
            mismatches.push(entry.word.clone());
        }
    }
    Ok(NextGenerationReport {
        power,
        entries_checked: current.len(),
        continuations_checked: continuations,
        mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::similarity::{attractor_cloud, SimilarityMap};

    fn w(s: &str) -> Word {
        Word::parse_digits(s, 10).unwrap()
    }

    #[test]
    fn builders() {
        assert_eq!(Tree::full_tree(2, 3).unwrap().len(), 15);
        let ray = Tree::ray_tree(2, &[0, 1, 0, 1]).unwrap();
        assert_eq!(ray.len(), 5);
        assert!(ray.contains(&[0, 1, 0]));
        assert!(!ray.contains(&[1]));
        let bad = Tree::from_child_lists(2, 3, &[(w(""), vec![0]), (w("1"), vec![0])]);
        assert!(matches!(bad, Err(Error::Validation(_))));
        let bad = Tree::from_words(2, 3, &[w("01")]);
        assert!(matches!(bad, Err(Error::Validation(_))));
    }

    #[test]
    fn word_lookup_round_trip() {
        let t = Tree::from_words(3, 3, &[w("0"), w("2"), w("20"), w("22"), w("221")]).unwrap();
        for id in 0..t.len() as NodeId {
            assert_eq!(t.find(&t.word_of(id)), Some(id));
        }
        assert_eq!(
            t.words(),
            vec![w(""), w("0"), w("2"), w("20"), w("22"), w("221")]
        );
    }

    #[test]
    fn canonical_round_trip() {
        let t = Tree::from_words(3, 4, &[w("0"), w("2"), w("20"), w("22"), w("221")]).unwrap();
        let text = t.to_canonical_string();
        assert!(text.starts_with("# alphabet=3 horizon=4\n\n0\n2\n20\n"));
        assert_eq!(Tree::parse_canonical(&text).unwrap(), t);
    }

    #[test]
    fn descendant_of_ray() {
        let ray = Tree::ray_tree(2, &[0; 5]).unwrap();
        let d = ray.descendant_tree(&[0, 0]).unwrap();
        assert_eq!(d, Tree::ray_tree(2, &[0; 3]).unwrap());
        assert_eq!(ray.descendant_tree(&[]).unwrap(), ray);
        assert!(matches!(ray.descendant_tree(&[1]), Err(Error::NotFound(_))));
        let full = Tree::full_tree(2, 4).unwrap();
        assert_eq!(
            full.descendant_tree(&[1, 0]).unwrap(),
            Tree::full_tree(2, 2).unwrap()
        );
    }

    #[test]
    fn reduce_prunes_dead_branch() {
        // full binary tree of depth 3 with the subtree below "1" cut at depth 2
        let t = Tree::from_words(
            2,
            3,
            &[
                w("0"),
                w("1"),
                w("00"),
                w("01"),
                w("10"),
                w("11"),
                w("000"),
                w("001"),
                w("010"),
                w("011"),
            ],
        )
        .unwrap();
        let r = t.reduce_to_horizon(3).unwrap().into_tree().unwrap();
        assert!(r.contains(&[0, 1, 1]));
        assert!(!r.contains(&[1]));
        assert_eq!(r.len(), 1 + 1 + 2 + 4);
        let shallow = Tree::ray_tree(2, &[0, 0]).unwrap();
        let shallow = Tree::from_words(2, 4, &shallow.words()[1..]).unwrap();
        assert_eq!(shallow.reduce_to_horizon(4).unwrap(), Reduction::Extinct);
        let full = Tree::full_tree(2, 4).unwrap();
        assert_eq!(
            full.reduce_to_horizon(4).unwrap().into_tree().unwrap(),
            full
        );
    }

    #[test]
    fn family_membership() {
        let full = Tree::full_tree(2, 3).unwrap();
        assert!(full.is_family_tree(&[Subset::full(2)]));
        assert!(!full.is_family_tree(&[Subset::singleton(0), Subset::singleton(1)]));
    }

    fn mixed() -> Ifs {
        let ratios = [0.5, 1.0 / 3.0, 0.25, 1.0 / 6.0];
        let mut t = 0.0;
        let maps = ratios
            .iter()
            .map(|&r| {
                let m = SimilarityMap::homothety(r, vec![t]).unwrap();
                t += r;
                m
            })
            .collect();
        Ifs::new(maps, None).unwrap()
    }

    #[test]
    fn next_generation_identity_on_full_tree() {
        let ifs = mixed();
        let t = Tree::full_tree(4, 8).unwrap();
        for n in 0..=2 {
            let rep = check_next_generation(&t, &ifs, 0.16, n).unwrap();
            assert!(rep.passed(), "{rep:?}");
            assert!(rep.entries_checked > 0);
        }
    }

    #[test]
    fn shallow_tree_is_a_horizon_error() {
        let t = Tree::full_tree(2, 2).unwrap();
        assert!(matches!(
            t.tree_section(&Ifs::cantor(), 0.3, 3),
            Err(Error::Horizon { .. })
        ));
    }

    #[test]
    fn tree_section_matches_build_section() {
        let ifs = Ifs::new(
            vec![
                SimilarityMap::homothety(0.5, vec![0.0]).unwrap(),
                SimilarityMap::homothety(0.25, vec![0.75]).unwrap(),
            ],
            None,
        )
        .unwrap();
        let t = Tree::full_tree(2, 4).unwrap();
        let sec = t.tree_section(&ifs, 0.25, 1).unwrap();
        let words: Vec<Word> = sec.iter().map(|e| e.word.clone()).collect();
        assert_eq!(words, vec![w("00"), w("01"), w("1")]);
        assert!(sec.iter().all(|e| e.a_value > 0.25 && e.a_value <= 1.0));
    }

    #[test]
    fn full_tree_projects_to_attractor() {
        let ifs = Ifs::cantor();
        let t = Tree::full_tree(2, 6).unwrap();
        assert_eq!(
            t.project(&ifs, 0.01).unwrap(),
            attractor_cloud(&ifs, 0.01).unwrap()
        );
        let ray = Tree::ray_tree(2, &[1; 6]).unwrap();
        let c = ray.project(&ifs, 0.01).unwrap();
        assert_eq!(c.len(), 1);
        assert!((c.point(0)[0] - 1.0).abs() <= c.epsilon());
    }
}

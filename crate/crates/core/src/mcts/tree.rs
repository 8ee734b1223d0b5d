//! Arena-backed search tree.

use crate::molgraph::Molecule;

/// Index of a node in its [`Tree`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

#[derive(Clone, Debug)]
pub struct SearchNode {
    pub state: Molecule,
    /// Canonical SMILES of `state`.
    pub smiles: String,
    /// Immediate objective score of `state`.
    pub score: f64,
    /// Accumulated scaled value.
    pub value: f64,
    pub visits: u64,
    /// Steps from the episode start.
    pub depth: usize,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    pub expanded: bool,
    /// Set when the node is at the step limit or has no admissible successor.
    pub terminal: bool,
    /// Simulations that started at this node because it was terminal.
    pub terminal_sims: u64,
}

impl SearchNode {
    pub fn new(state: Molecule, smiles: String, score: f64, depth: usize) -> Self {
        SearchNode {
            state,
            smiles,
            score,
            value: 0.0,
            visits: 1,
            depth,
            parent: None,
            children: Vec::new(),
            expanded: false,
            terminal: false,
            terminal_sims: 0,
        }
    }

    pub fn mean_value(&self) -> f64 {
        self.value / self.visits as f64
    }

    pub fn uct(&self, parent_visits: u64, c: f64) -> f64 {
        uct_score(self.value, self.visits, parent_visits, c)
    }

    pub fn is_leaf(&self) -> bool {
        !self.expanded || self.terminal || self.children.is_empty()
    }
}

/// `V/n + c * sqrt(ln N / n)`.
pub fn uct_score(value: f64, visits: u64, parent_visits: u64, c: f64) -> f64 {
    debug_assert!(visits >= 1 && parent_visits >= 1);
    let n = visits as f64;
    value / n + c * ((parent_visits as f64).ln() / n).sqrt()
}

#[derive(Clone, Debug, Default)]
pub struct Tree {
    nodes: Vec<SearchNode>,
}

impl Tree {
    pub fn with_root(root: SearchNode) -> (Self, NodeId) {
        (Tree { nodes: vec![root] }, NodeId(0))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &SearchNode {
        &self.nodes[id.0]
    }

    pub fn node_mut(&mut self, id: NodeId) -> &mut SearchNode {
        &mut self.nodes[id.0]
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &SearchNode)> {
        self.nodes.iter().enumerate().map(|(i, n)| (NodeId(i), n))
    }

    pub fn add_child(&mut self, parent: NodeId, mut child: SearchNode) -> NodeId {
        let id = NodeId(self.nodes.len());
        child.parent = Some(parent);
        self.nodes.push(child);
        self.nodes[parent.0].children.push(id);
        id
    }

    /// Nodes from the root down to `id`.
    pub fn path_to(&self, id: NodeId) -> Vec<NodeId> {
        let mut path = vec![id];
        let mut cur = id;
        while let Some(p) = self.nodes[cur.0].parent {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// Child of `parent` with the highest UCT score, ties going to the
    /// smallest canonical SMILES.
    pub fn best_uct_child(&self, parent: NodeId, c: f64) -> Option<NodeId> {
        let p = &self.nodes[parent.0];
        let mut best: Option<(f64, NodeId)> = None;
        for &id in &p.children {
            let u = self.nodes[id.0].uct(p.visits, c);
            best = match best {
                None => Some((u, id)),
                Some((bu, bid)) => {
                    if u > bu || (u == bu && self.nodes[id.0].smiles < self.nodes[bid.0].smiles) {
                        Some((u, id))
                    } else {
                        Some((bu, bid))
                    }
                }
            };
        }
        best.map(|(_, id)| id)
    }

    /// Descends from `root` by UCT until a leaf.
    pub fn select(&self, root: NodeId, c: f64) -> Vec<NodeId> {
        let mut path = vec![root];
        let mut cur = root;
        while !self.nodes[cur.0].is_leaf() {
            cur = self.best_uct_child(cur, c).expect("non-leaf has children");
            path.push(cur);
        }
        path
    }

    /// Adds `scaled` and one visit to every node on `path`.
    pub fn backpropagate(&mut self, path: &[NodeId], scaled: f64) {
        for id in path {
            let node = &mut self.nodes[id.0];
            node.value += scaled;
            node.visits += 1;
        }
    }

    /// Most visited child, ties by mean value then smallest SMILES.
    pub fn robust_child(&self, parent: NodeId) -> Option<NodeId> {
        self.nodes[parent.0].children.iter().copied().reduce(|a, b| {
            let (na, nb) = (&self.nodes[a.0], &self.nodes[b.0]);
            let better = nb.visits > na.visits
                || (nb.visits == na.visits
                    && (nb.mean_value() > na.mean_value()
                        || (nb.mean_value() == na.mean_value() && nb.smiles < na.smiles)));
            if better {
                b
            } else {
                a
            }
        })
    }

    /// Rebuilds the arena keeping only the subtree under `id`, which becomes
    /// the new root.
    pub fn reroot(&mut self, id: NodeId) -> NodeId {
        let old = std::mem::take(&mut self.nodes);
        let mut slots: Vec<Option<SearchNode>> = old.into_iter().map(Some).collect();
        let mut nodes = Vec::new();
        // (old id, new parent)
        let mut queue = std::collections::VecDeque::from([(id, None::<NodeId>)]);
        while let Some((old_id, parent)) = queue.pop_front() {
            let mut node = slots[old_id.0].take().expect("tree nodes have one parent");
            let new_id = NodeId(nodes.len());
            node.parent = parent;
            let children = std::mem::take(&mut node.children);
            nodes.push(node);
            if let Some(p) = parent {
                let p: &mut SearchNode = &mut nodes[p.0];
                p.children.push(new_id);
            }
            for c in children {
                queue.push_back((c, Some(new_id)));
            }
        }
        self.nodes = nodes;
        NodeId(0)
    }

    /// Whether some node below `root` can still be expanded.
    pub fn has_open_leaf(&self, root: NodeId) -> bool {
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id.0];
            if !node.expanded && !node.terminal {
                return true;
            }
            stack.extend(node.children.iter().copied());
        }
        false
    }

    /// Checks visit conservation below `root`: every node's count is its own
    /// initialization plus its children's counts plus the simulations started
    /// at it. Returns the first offending node.
    pub fn check_conservation(&self, root: NodeId) -> Result<(), NodeId> {
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id.0];
            let below: u64 = node.children.iter().map(|c| self.nodes[c.0].visits).sum();
            if node.visits != 1 + below + node.terminal_sims {
                return Err(id);
            }
            stack.extend(node.children.iter().copied());
        }
        Ok(())
    }
}

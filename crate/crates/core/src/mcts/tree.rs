use std::cmp::Ordering;
use std::ops::Index;

use super::actions::pending_actions;
use super::{PendingAction, SearchContext};
use crate::model::HexapodState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

impl NodeId {
    pub const ROOT: NodeId = NodeId(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// How a node's best descendant relates to the goal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum GoalFlag {
    #[default]
    None,
    /// A rollout from the subtree crossed the goal line.
    Rollout,
    /// A node in the subtree stands past the goal line.
    Node,
}

/// Node value. The goal flag outranks any finite value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub goal: GoalFlag,
    pub value: f64,
}

impl Score {
    pub const NONE: Score = Score {
        goal: GoalFlag::None,
        value: f64::NEG_INFINITY,
    };

    pub fn new(goal: GoalFlag, value: f64) -> Self {
        Self { goal, value }
    }

    /// Scalar for UCB1: goal-flagged nodes rank above everything.
    pub fn rank(self) -> f64 {
        if self.goal == GoalFlag::None {
            self.value
        } else {
            f64::INFINITY
        }
    }
}

impl PartialOrd for Score {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        match self.goal.cmp(&o.goal) {
            Ordering::Equal => self.value.partial_cmp(&o.value),
            ord => Some(ord),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Node {
    pub state: HexapodState,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    /// `None` until the action list is first needed.
    untried: Option<Vec<PendingAction>>,
    pub n_visit: u64,
    pub n_pass: u64,
    pub score: Score,
    pub depth: u32,
    /// No action list left anywhere in the subtree.
    pub exhausted: bool,
}

impl Node {
    fn new(state: HexapodState, parent: Option<NodeId>, depth: u32) -> Self {
        Self {
            state,
            parent,
            children: Vec::new(),
            untried: None,
            n_visit: 0,
            n_pass: 0,
            score: Score::NONE,
            depth,
            exhausted: false,
        }
    }

    /// Pass ratio under pass/visit scoring.
    pub fn pass_ratio(&self) -> f64 {
        if self.n_visit == 0 {
            0.0
        } else {
            self.n_pass as f64 / self.n_visit as f64
        }
    }

    /// Remaining untried actions, or `None` if never enumerated.
    pub fn untried(&self) -> Option<&[PendingAction]> {
        self.untried.as_deref()
    }
}

/// Arena-allocated search tree; node 0 is the root.
#[derive(Debug, Clone)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Index<NodeId> for Tree {
    type Output = Node;
    fn index(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }
}

impl Tree {
    pub fn new(root: HexapodState) -> Self {
        Self {
            nodes: vec![Node::new(root, None, 0)],
        }
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    pub(crate) fn node_mut(&mut self, id: NodeId) -> &mut Node {
        &mut self.nodes[id.index()]
    }

    pub fn add_child(&mut self, parent: NodeId, state: HexapodState) -> NodeId {
        let id = NodeId(u32::try_from(self.nodes.len()).expect("tree fits in u32 ids"));
        let depth = self[parent].depth + 1;
        self.nodes.push(Node::new(state, Some(parent), depth));
        self.nodes[parent.index()].children.push(id);
        id
    }

    /// Enumerates the node's actions if that has not happened yet. Nodes at
    /// the goal get none.
    pub fn ensure_untried(&mut self, id: NodeId, ctx: &SearchContext) {
        let node = &mut self.nodes[id.index()];
        if node.untried.is_none() {
            node.untried = Some(if node.state.reached(ctx.terrain.goal_x()) {
                Vec::new()
            } else {
                pending_actions(ctx, &node.state)
            });
        }
    }

    pub fn untried_len(&mut self, id: NodeId, ctx: &SearchContext) -> usize {
        self.ensure_untried(id, ctx);
        self[id].untried.as_ref().map_or(0, Vec::len)
    }

    /// Removes untried action `k` (order of the rest is kept).
    pub fn take_untried(&mut self, id: NodeId, k: usize) -> PendingAction {
        self.nodes[id.index()]
            .untried
            .as_mut()
            .expect("actions enumerated")
            .remove(k)
    }

    pub fn take_all_untried(&mut self, id: NodeId, ctx: &SearchContext) -> Vec<PendingAction> {
        self.ensure_untried(id, ctx);
        std::mem::take(
            self.nodes[id.index()]
                .untried
                .as_mut()
                .expect("actions enumerated"),
        )
    }

    /// Marks `id` and then its ancestors exhausted for as long as they have
    /// no untried actions and only exhausted children.
    pub fn refresh_exhausted(&mut self, id: NodeId) {
        let mut cur = Some(id);
        while let Some(c) = cur {
            let node = &self.nodes[c.index()];
            let done = node.untried.as_ref().is_some_and(Vec::is_empty)
                && node
                    .children
                    .iter()
                    .all(|ch| self.nodes[ch.index()].exhausted);
            if !done {
                break;
            }
            let parent = node.parent;
            self.nodes[c.index()].exhausted = true;
            cur = parent;
        }
    }

    /// Node ids from the root down to `id`.
    pub fn path_to(&self, id: NodeId) -> Vec<NodeId> {
        let mut path = vec![id];
        let mut cur = id;
        while let Some(p) = self[cur].parent {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    pub fn states_to(&self, id: NodeId) -> Vec<HexapodState> {
        self.path_to(id)
            .into_iter()
            .map(|n| self[n].state.clone())
            .collect()
    }

    /// The subtree under `id` as a new tree rooted at it. Everything else is
    /// dropped.
    pub fn reroot(&self, id: NodeId) -> Tree {
        let base = self[id].depth;
        let mut out = Tree { nodes: Vec::new() };
        // (old id, new parent)
        let mut queue = std::collections::VecDeque::from([(id, None::<NodeId>)]);
        while let Some((old, parent)) = queue.pop_front() {
            let new_id = NodeId(out.nodes.len() as u32);
            let src = &self[old];
            let mut node = src.clone();
            node.parent = parent;
            node.children = Vec::with_capacity(src.children.len());
            node.depth = src.depth - base;
            out.nodes.push(node);
            if let Some(p) = parent {
                out.nodes[p.index()].children.push(new_id);
            }
            for &ch in &src.children {
                queue.push_back((ch, Some(new_id)));
            }
        }
        out
    }

    /// Deepest node; the larger forward position wins ties, then the lower id.
    pub fn deepest(&self) -> NodeId {
        let mut best = NodeId::ROOT;
        for id in self.ids() {
            let (n, b) = (&self[id], &self[best]);
            if n.depth > b.depth || (n.depth == b.depth && n.state.cog.x > b.state.cog.x) {
                best = id;
            }
        }
        best
    }
}

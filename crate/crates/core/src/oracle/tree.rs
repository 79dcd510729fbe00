use crate::error::{ensure, Result};
use crate::momfun::MomentFunction;
use crate::report::CheckReport;
use crate::scalar::{csum, lit, Real};

use super::dist::DiscreteDist;

/// One transition out of a node: the difference `X_j`, its conditional
/// probability, and the subtree.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch<T> {
    pub diff: T,
    pub prob: T,
    pub node: Node<T>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Node<T> {
    pub children: Vec<Branch<T>>,
}

impl<T> Node<T> {
    pub fn leaf() -> Self {
        Self {
            children: Vec::new(),
        }
    }
}

/// A v-martingale `S_1, ..., S_n` (with `S_0 = 0`) as a finite tree.
///
/// All leaves sit at depth `n`. Transition probabilities at each node sum to
/// one; below the root, the differences at each node have conditional mean
/// zero. The first difference is unconstrained.
#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleTree<T> {
    root: Node<T>,
    depth: usize,
}

/// Per-path data: probability, partial sum, and `f(X_j)` terms.
struct Walk<T> {
    lhs: Vec<T>,
    per_step: Vec<Vec<T>>,
}

impl<T: Real> MartingaleTree<T> {
    pub fn new(root: Node<T>) -> Result<Self> {
        ensure!(
            !root.children.is_empty(),
            Precondition,
            "root needs at least one child"
        );
        let depth = Self::validate(&root, 0)?;
        Ok(Self { root, depth })
    }

    fn validate(node: &Node<T>, level: usize) -> Result<usize> {
        if node.children.is_empty() {
            return Ok(level);
        }
        ensure!(
            node.children
                .iter()
                .all(|b| b.diff.is_finite() && b.prob.is_finite() && b.prob >= T::zero()),
            Precondition,
            "transition probabilities must be nonnegative and values finite"
        );
        let total = csum(node.children.iter().map(|b| b.prob));
        ensure!(
            (total - T::one()).abs() <= lit(1e-14),
            Precondition,
            "transition probabilities at depth {level} sum to {total:?}"
        );
        if level >= 1 {
            let mean = csum(node.children.iter().map(|b| b.prob * b.diff));
            let scale = csum(node.children.iter().map(|b| b.prob * b.diff.abs()));
            ensure!(
                mean.abs() <= lit::<T>(1e-12) * scale.max(T::min_positive_value()),
                Precondition,
                "conditional mean {mean:?} at depth {level} is not zero"
            );
        }
        let mut depth = None;
        for b in &node.children {
            let d = Self::validate(&b.node, level + 1)?;
            ensure!(
                depth.is_none_or(|e| e == d),
                Precondition,
                "leaves at different depths"
            );
            depth = Some(d);
        }
        Ok(depth.expect("nonempty"))
    }

    /// The product tree of independent differences.
    pub fn from_independent(dists: &[DiscreteDist<T>]) -> Result<Self> {
        ensure!(
            !dists.is_empty(),
            Precondition,
            "need at least one difference"
        );
        fn build<T: Real>(rest: &[DiscreteDist<T>]) -> Node<T> {
            match rest.split_first() {
                None => Node::leaf(),
                Some((d, tail)) => Node {
                    children: d
                        .iter()
                        .map(|(x, p)| Branch {
                            diff: x,
                            prob: p,
                            node: build(tail),
                        })
                        .collect(),
                },
            }
        }
        Self::new(build(dists))
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn root(&self) -> &Node<T> {
        &self.root
    }

    fn walk(&self, f: &MomentFunction<T>) -> Walk<T> {
        let mut w = Walk {
            lhs: Vec::new(),
            per_step: vec![Vec::new(); self.depth],
        };
        fn go<T: Real>(
            node: &Node<T>,
            prob: T,
            sum: T,
            level: usize,
            f: &MomentFunction<T>,
            w: &mut Walk<T>,
        ) {
            if node.children.is_empty() {
                w.lhs.push(prob * f.eval(sum));
                return;
            }
            for b in &node.children {
                let p = prob * b.prob;
                w.per_step[level].push(p * f.eval(b.diff));
                go(&b.node, p, sum + b.diff, level + 1, f, w);
            }
        }
        go(&self.root, T::one(), T::zero(), 0, f, &mut w);
        w
    }

    /// `E f(S_n)` and `(E f(X_1), ..., E f(X_n))`.
    pub fn moments(&self, f: &MomentFunction<T>) -> (T, Vec<T>) {
        let w = self.walk(f);
        (csum(w.lhs), w.per_step.into_iter().map(csum).collect())
    }
}

/// `E f(S_n) <= E f(X_1) + C sum_{j>=2} E f(X_j)` on a tree.
pub fn check_tree_inequality<T: Real>(
    f: &MomentFunction<T>,
    tree: &MartingaleTree<T>,
    c: T,
) -> CheckReport<T> {
    let (lhs, steps) = tree.moments(f);
    let rest = csum(steps[1..].iter().copied());
    CheckReport::new(lhs, steps[0] + c * rest, c)
}

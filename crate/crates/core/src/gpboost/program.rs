use std::fmt::Write as _;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Denominators smaller than this make protected division return 1.
pub const PDIV_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Node {
    Add,
    Sub,
    Mul,
    PDiv,
    Min,
    Max,
    Neg,
    Feature(usize),
    Const(f64),
}

const FUNCTIONS: [Node; 7] = [
    Node::Add,
    Node::Sub,
    Node::Mul,
    Node::PDiv,
    Node::Min,
    Node::Max,
    Node::Neg,
];

impl Node {
    pub fn arity(self) -> usize {
        match self {
            Node::Add | Node::Sub | Node::Mul | Node::PDiv | Node::Min | Node::Max => 2,
            Node::Neg => 1,
            Node::Feature(_) | Node::Const(_) => 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Node::Add => "add",
            Node::Sub => "sub",
            Node::Mul => "mul",
            Node::PDiv => "pdiv",
            Node::Min => "min",
            Node::Max => "max",
            Node::Neg => "neg",
            Node::Feature(_) => "x",
            Node::Const(_) => "c",
        }
    }

    fn from_name(s: &str) -> Option<Node> {
        FUNCTIONS.iter().copied().find(|f| f.name() == s)
    }
}

#[inline(always)]
pub fn pdiv(a: f64, b: f64) -> f64 {
    if b.abs() < PDIV_EPS {
        1.0
    } else {
        a / b
    }
}

/// Expression tree stored as a prefix-order node list. A lone terminal has
/// depth 0.
#[derive(Clone, Debug, PartialEq)]
pub struct GpProgram {
    nodes: Vec<Node>,
}

impl GpProgram {
    /// Validates that `nodes` is exactly one well-formed prefix expression.
    pub fn from_nodes(nodes: Vec<Node>) -> Result<Self> {
        let mut need = 1usize;
        for (i, n) in nodes.iter().enumerate() {
            if need == 0 {
                return Err(Error::invalid(format!("trailing nodes after position {i}")));
            }
            need = need - 1 + n.arity();
        }
        if need != 0 || nodes.is_empty() {
            return Err(Error::invalid("incomplete prefix expression"));
        }
        Ok(GpProgram { nodes })
    }

    pub fn constant(c: f64) -> Self {
        GpProgram {
            nodes: vec![Node::Const(c)],
        }
    }

    pub fn feature(i: usize) -> Self {
        GpProgram {
            nodes: vec![Node::Feature(i)],
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Exclusive end of the subtree rooted at `start`.
    pub fn subtree_end(&self, start: usize) -> usize {
        let mut need = 1usize;
        let mut i = start;
        while need > 0 {
            need = need - 1 + self.nodes[i].arity();
            i += 1;
        }
        i
    }

    /// Depth of every node, root at 0.
    pub fn node_depths(&self) -> Vec<usize> {
        let mut depths = Vec::with_capacity(self.nodes.len());
        // stack of depths for pending child slots
        let mut pending = vec![0usize];
        for n in &self.nodes {
            let d = pending.pop().expect("well-formed prefix");
            depths.push(d);
            for _ in 0..n.arity() {
                pending.push(d + 1);
            }
        }
        depths
    }

    pub fn depth(&self) -> usize {
        self.node_depths().into_iter().max().unwrap_or(0)
    }

    pub fn max_feature(&self) -> Option<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Feature(i) => Some(*i),
                _ => None,
            })
            .max()
    }

    /// Evaluates the tree on one feature vector.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut stack: Vec<f64> = Vec::with_capacity(self.nodes.len());
        for n in self.nodes.iter().rev() {
            let v = match *n {
                Node::Feature(i) => x[i],
                Node::Const(c) => c,
                Node::Neg => -stack.pop().unwrap(),
                op => {
                    let a = stack.pop().unwrap();
                    let b = stack.pop().unwrap();
                    match op {
                        Node::Add => a + b,
                        Node::Sub => a - b,
                        Node::Mul => a * b,
                        Node::PDiv => pdiv(a, b),
                        Node::Min => a.min(b),
                        Node::Max => a.max(b),
                        _ => unreachable!(),
                    }
                }
            };
            stack.push(v);
        }
        stack.pop().expect("non-empty program")
    }

    /// One-class membership: output >= 0.
    pub fn fires(&self, x: &[f64]) -> bool {
        self.eval(x) >= 0.0
    }

    /// Copy with the subtree at `at` replaced by `sub`.
    pub fn replace_subtree(&self, at: usize, sub: &[Node]) -> GpProgram {
        let end = self.subtree_end(at);
        let mut nodes = Vec::with_capacity(self.nodes.len() - (end - at) + sub.len());
        nodes.extend_from_slice(&self.nodes[..at]);
        nodes.extend_from_slice(sub);
        nodes.extend_from_slice(&self.nodes[end..]);
        GpProgram { nodes }
    }

    /// Parenthesized prefix form, e.g. `(add (mul (x 0) (x 3)) (c 0.25))`.
    pub fn to_sexpr(&self) -> String {
        let mut s = String::new();
        self.write_sexpr(0, &mut s);
        s
    }

    fn write_sexpr(&self, at: usize, s: &mut String) -> usize {
        match self.nodes[at] {
            Node::Feature(i) => {
                write!(s, "(x {i})").unwrap();
                at + 1
            }
            // shortest representation that round-trips exactly
            Node::Const(c) => {
                write!(s, "(c {c:?})").unwrap();
                at + 1
            }
            op => {
                write!(s, "({}", op.name()).unwrap();
                let mut next = at + 1;
                for _ in 0..op.arity() {
                    s.push(' ');
                    next = self.write_sexpr(next, s);
                }
                s.push(')');
                next
            }
        }
    }

    pub fn parse(text: &str) -> Result<GpProgram> {
        let spaced = text.replace('(', " ( ").replace(')', " ) ");
        let tokens: Vec<&str> = spaced.split_whitespace().collect();
        let mut nodes = Vec::new();
        let mut pos = 0;
        parse_expr(&tokens, &mut pos, &mut nodes)?;
        if pos != tokens.len() {
            return Err(Error::invalid(format!("trailing tokens in '{text}'")));
        }
        GpProgram::from_nodes(nodes)
    }
}

fn parse_expr(tokens: &[&str], pos: &mut usize, out: &mut Vec<Node>) -> Result<()> {
    let bad = |m: &str| Error::invalid(format!("program syntax: {m}"));
    let next = |pos: &mut usize| -> Result<&str> {
        let t = tokens.get(*pos).copied().ok_or_else(|| bad("unexpected end"))?;
        *pos += 1;
        Ok(t)
    };
    if next(pos)? != "(" {
        return Err(bad("expected '('"));
    }
    let head = next(pos)?;
    match head {
        "x" => {
            let i = next(pos)?.parse().map_err(|_| bad("bad feature index"))?;
            out.push(Node::Feature(i));
        }
        "c" => {
            let c: f64 = next(pos)?.parse().map_err(|_| bad("bad constant"))?;
            out.push(Node::Const(c));
        }
        name => {
            let op = Node::from_name(name).ok_or_else(|| bad(&format!("unknown function '{name}'")))?;
            out.push(op);
            for _ in 0..op.arity() {
                parse_expr(tokens, pos, out)?;
            }
        }
    }
    if next(pos)? != ")" {
        return Err(bad("expected ')'"));
    }
    Ok(())
}

fn random_terminal(dim: usize, rng: &mut Rng) -> Node {
    if rng.random_bool(0.5) {
        Node::Feature(rng.random_range(0..dim))
    } else {
        Node::Const(rng.random_range(-1.0..=1.0))
    }
}

/// Appends a random subtree of depth at most `max_depth`. `full` grows every
/// branch to exactly `max_depth`; otherwise interior nodes stop early with
/// probability one half (the root is always a function when `max_depth > 0`).
pub(crate) fn grow_into(out: &mut Vec<Node>, depth: usize, max_depth: usize, full: bool, dim: usize, rng: &mut Rng) {
    let function = depth < max_depth && (full || depth == 0 || rng.random_bool(0.5));
    if !function {
        out.push(random_terminal(dim, rng));
        return;
    }
    let f = FUNCTIONS[rng.random_range(0..FUNCTIONS.len())];
    out.push(f);
    for _ in 0..f.arity() {
        grow_into(out, depth + 1, max_depth, full, dim, rng);
    }
}

/// Ramped half-and-half: target depth uniform in `2..=max_depth`, full or
/// grow with equal probability, constants uniform in [-1, 1].
pub fn random_program(max_depth: usize, dim: usize, rng: &mut Rng) -> GpProgram {
    assert!(dim >= 1, "programs need at least one feature");
    let lo = 2.min(max_depth);
    let depth = rng.random_range(lo..=max_depth);
    let full = rng.random_bool(0.5);
    let mut nodes = Vec::new();
    grow_into(&mut nodes, 0, depth, full, dim, rng);
    GpProgram { nodes }
}

/// Swaps the subtree at `at_a` in `a` with the subtree at `at_b` in `b`. An
/// offspring deeper than `max_depth` is replaced by its unchanged parent.
pub fn crossover_at(
    a: &GpProgram,
    at_a: usize,
    b: &GpProgram,
    at_b: usize,
    max_depth: usize,
) -> (GpProgram, GpProgram) {
    let sub_a = &a.nodes[at_a..a.subtree_end(at_a)];
    let sub_b = &b.nodes[at_b..b.subtree_end(at_b)];
    let child_a = a.replace_subtree(at_a, sub_b);
    let child_b = b.replace_subtree(at_b, sub_a);
    let keep_a = if child_a.depth() <= max_depth {
        child_a
    } else {
        a.clone()
    };
    let keep_b = if child_b.depth() <= max_depth {
        child_b
    } else {
        b.clone()
    };
    (keep_a, keep_b)
}

pub fn crossover(a: &GpProgram, b: &GpProgram, max_depth: usize, rng: &mut Rng) -> (GpProgram, GpProgram) {
    let i = rng.random_range(0..a.len());
    let j = rng.random_range(0..b.len());
    crossover_at(a, i, b, j, max_depth)
}

/// Largest subtree depth introduced by mutation.
pub const MUTATION_DEPTH: usize = 4;

/// Replaces the subtree at `at` with a random grown subtree that fits the
/// remaining depth budget.
pub fn mutate_at(p: &GpProgram, at: usize, max_depth: usize, dim: usize, rng: &mut Rng) -> GpProgram {
    let depth_here = p.node_depths()[at];
    let budget = max_depth.saturating_sub(depth_here).min(MUTATION_DEPTH);
    let mut sub = Vec::new();
    let target = rng.random_range(0..=budget);
    grow_into(&mut sub, 0, target, false, dim, rng);
    let child = p.replace_subtree(at, &sub);
    if child.depth() <= max_depth {
        child
    } else {
        p.clone()
    }
}

pub fn mutate(p: &GpProgram, max_depth: usize, dim: usize, rng: &mut Rng) -> GpProgram {
    let at = rng.random_range(0..p.len());
    mutate_at(p, at, max_depth, dim, rng)
}

/// Column-major sample matrix for fast whole-population evaluation.
#[derive(Clone, Debug)]
pub struct Columns {
    cols: Vec<Vec<f64>>,
    n: usize,
}

impl Columns {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::invalid("ragged feature rows"));
        }
        let cols = (0..dim).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
        Ok(Columns { cols, n: rows.len() })
    }

    pub fn n_samples(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.cols.len()
    }
}

enum Val<'a> {
    Col(&'a [f64]),
    Const(f64),
    Buf(Vec<f64>),
}

impl Val<'_> {
    #[inline(always)]
    fn at(&self, i: usize) -> f64 {
        match self {
            Val::Col(c) => c[i],
            Val::Const(c) => *c,
            Val::Buf(b) => b[i],
        }
    }
}

/// Reusable scratch space for [`GpProgram::eval_columns`].
#[derive(Default)]
pub struct EvalScratch {
    pool: Vec<Vec<f64>>,
}

impl EvalScratch {
    fn take(&mut self, n: usize) -> Vec<f64> {
        let mut v = self.pool.pop().unwrap_or_default();
        v.resize(n, 0.0);
        v
    }

    fn give(&mut self, v: Vec<f64>) {
        self.pool.push(v);
    }
}

#[inline(always)]
fn binop<'a, F: Fn(f64, f64) -> f64 + Copy>(
    a: Val<'a>,
    b: Val<'a>,
    n: usize,
    scratch: &mut EvalScratch,
    f: F,
) -> Val<'a> {
    match (a, b) {
        (Val::Const(x), Val::Const(y)) => Val::Const(f(x, y)),
        (Val::Buf(mut va), b) => {
            match b {
                Val::Const(y) => va.iter_mut().for_each(|v| *v = f(*v, y)),
                Val::Col(c) => va.iter_mut().zip(c).for_each(|(v, y)| *v = f(*v, *y)),
                Val::Buf(vb) => {
                    va.iter_mut().zip(&vb).for_each(|(v, y)| *v = f(*v, *y));
                    scratch.give(vb);
                }
            }
            Val::Buf(va)
        }
        (a, Val::Buf(mut vb)) => {
            match a {
                Val::Const(x) => vb.iter_mut().for_each(|v| *v = f(x, *v)),
                Val::Col(c) => vb.iter_mut().zip(c).for_each(|(v, x)| *v = f(*x, *v)),
                Val::Buf(_) => unreachable!(),
            }
            Val::Buf(vb)
        }
        (a, b) => {
            let mut out = scratch.take(n);
            match (&a, &b) {
                (Val::Col(x), Val::Col(y)) => out
                    .iter_mut()
                    .zip(x.iter().zip(*y))
                    .for_each(|(o, (x, y))| *o = f(*x, *y)),
                _ => out.iter_mut().enumerate().for_each(|(i, o)| *o = f(a.at(i), b.at(i))),
            }
            Val::Buf(out)
        }
    }
}

impl GpProgram {
    /// Evaluates the program on every sample; `out` receives one value per sample.
    pub fn eval_columns(&self, data: &Columns, scratch: &mut EvalScratch, out: &mut Vec<f64>) {
        let n = data.n;
        let mut stack: Vec<Val> = Vec::with_capacity(16);
        for node in self.nodes.iter().rev() {
            let v = match *node {
                Node::Feature(i) => Val::Col(&data.cols[i]),
                Node::Const(c) => Val::Const(c),
                Node::Neg => match stack.pop().unwrap() {
                    Val::Const(c) => Val::Const(-c),
                    Val::Col(c) => {
                        let mut b = scratch.take(n);
                        b.iter_mut().zip(c).for_each(|(o, x)| *o = -x);
                        Val::Buf(b)
                    }
                    Val::Buf(mut b) => {
                        b.iter_mut().for_each(|x| *x = -*x);
                        Val::Buf(b)
                    }
                },
                op => {
                    let a = stack.pop().unwrap();
                    let b = stack.pop().unwrap();
                    match op {
                        Node::Add => binop(a, b, n, scratch, |x, y| x + y),
                        Node::Sub => binop(a, b, n, scratch, |x, y| x - y),
                        Node::Mul => binop(a, b, n, scratch, |x, y| x * y),
                        Node::PDiv => binop(a, b, n, scratch, pdiv),
                        Node::Min => binop(a, b, n, scratch, f64::min),
                        Node::Max => binop(a, b, n, scratch, f64::max),
                        _ => unreachable!(),
                    }
                }
            };
            stack.push(v);
        }
        out.clear();
        match stack.pop().expect("non-empty program") {
            Val::Const(c) => out.resize(n, c),
            Val::Col(c) => out.extend_from_slice(c),
            Val::Buf(b) => {
                out.extend_from_slice(&b);
                scratch.give(b);
            }
        }
    }
}

//! Uncapacitated transportation problems by the primal network simplex method.
//!
//! Pricing is block search over the real arcs in index order; the leaving arc
//! follows the strongly feasible rule, which rules out cycling. The initial
//! basis uses one artificial arc per node to or from an extra root node.
//! Everything is deterministic.

use crate::error::{domain, Error, Result};

/// Solution of `min Σ c_ij x_ij` subject to `Σ_j x_ij = supply_i`,
/// `Σ_i x_ij = demand_j`, `x ≥ 0`.
#[derive(Debug, Clone)]
pub struct TransportSolution {
    pub cost: f64,
    /// Dual prices with `u_i + v_j ≤ c_ij`, equality on basic arcs, and
    /// `Σ supply·u + Σ demand·v = cost` at optimality.
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Nonzero flows `(i, j, x_ij)`.
    pub flows: Vec<(usize, usize, f64)>,
    pub pivots: usize,
}

const UP: bool = true;
const DOWN: bool = false;

struct Network<'a> {
    ns: usize,
    nt: usize,
    cost: &'a dyn Fn(usize, usize) -> f64,
    art_cost: f64,
    // arcs: real ones are i*nt + j; artificial arc for node k is real + k
    flow: Vec<f64>,
    in_tree: Vec<bool>,
    // tree structure, rebuilt after every pivot
    parent: Vec<usize>,
    pred: Vec<usize>,
    pred_dir: Vec<bool>,
    depth: Vec<usize>,
    pot: Vec<f64>,
    adj: Vec<Vec<usize>>,
}

impl Network<'_> {
    fn real_arcs(&self) -> usize {
        self.ns * self.nt
    }

    fn root(&self) -> usize {
        self.ns + self.nt
    }

    /// `(tail, head)` in node numbering (sources first, then sinks).
    fn ends(&self, a: usize) -> (usize, usize) {
        let real = self.real_arcs();
        if a < real {
            (a / self.nt, self.ns + a % self.nt)
        } else {
            let k = a - real;
            if k < self.ns {
                (k, self.root())
            } else {
                (self.root(), k)
            }
        }
    }

    fn arc_cost(&self, a: usize) -> f64 {
        let real = self.real_arcs();
        if a < real {
            (self.cost)(a / self.nt, a % self.nt)
        } else if a - real < self.ns {
            0.0
        } else {
            self.art_cost
        }
    }

    fn rebuild(&mut self, tree_arcs: &[usize]) {
        let nodes = self.root() + 1;
        for l in self.adj.iter_mut() {
            l.clear();
        }
        for &a in tree_arcs {
            let (s, t) = self.ends(a);
            self.adj[s].push(a);
            self.adj[t].push(a);
        }
        let root = self.root();
        let mut seen = vec![false; nodes];
        let mut queue = std::collections::VecDeque::with_capacity(nodes);
        seen[root] = true;
        self.pot[root] = 0.0;
        self.depth[root] = 0;
        queue.push_back(root);
        while let Some(x) = queue.pop_front() {
            for idx in 0..self.adj[x].len() {
                let a = self.adj[x][idx];
                let (s, t) = self.ends(a);
                let (y, dir) = if s == x { (t, DOWN) } else { (s, UP) };
                if seen[y] {
                    continue;
                }
                seen[y] = true;
                self.parent[y] = x;
                self.pred[y] = a;
                self.pred_dir[y] = dir;
                self.depth[y] = self.depth[x] + 1;
                // tree arcs have zero reduced cost: pot[head] = pot[tail] + c
                let c = self.arc_cost(a);
                self.pot[y] = if dir == DOWN { self.pot[x] + c } else { self.pot[x] - c };
                queue.push_back(y);
            }
        }
    }

    fn reduced_cost(&self, a: usize) -> f64 {
        let (s, t) = self.ends(a);
        self.arc_cost(a) + self.pot[s] - self.pot[t]
    }
}

/// Solves the balanced transportation problem with arc costs `cost(i, j)`.
/// Supplies and demands must be positive with equal totals up to rounding.
pub fn solve_transport(
    supply: &[f64],
    demand: &[f64],
    cost: &dyn Fn(usize, usize) -> f64,
    max_pivots: usize,
) -> Result<TransportSolution> {
    let (ns, nt) = (supply.len(), demand.len());
    if ns == 0 || nt == 0 {
        return Ok(TransportSolution { cost: 0.0, u: vec![0.0; ns], v: vec![0.0; nt], flows: Vec::new(), pivots: 0 });
    }
    if supply.iter().chain(demand).any(|&x| !(x > 0.0 && x.is_finite())) {
        return domain("supplies and demands must be positive and finite");
    }
    let total_s: f64 = supply.iter().sum();
    let total_d: f64 = demand.iter().sum();
    if (total_s - total_d).abs() > 1e-9 * total_s.max(total_d) {
        return domain(format!("unbalanced transport problem: {total_s} vs {total_d}"));
    }
    let mut max_cost = 0.0f64;
    for i in 0..ns {
        for j in 0..nt {
            let c = cost(i, j);
            if !(c >= 0.0 && c.is_finite()) {
                return domain(format!("arc cost c({i},{j}) = {c} must be finite and nonnegative"));
            }
            max_cost = max_cost.max(c);
        }
    }
    let nodes = ns + nt + 1;
    let real = ns * nt;
    let mut net = Network {
        ns,
        nt,
        cost,
        art_cost: (max_cost + 1.0) * nodes as f64,
        flow: vec![0.0; real + ns + nt],
        in_tree: vec![false; real + ns + nt],
        parent: vec![usize::MAX; nodes],
        pred: vec![usize::MAX; nodes],
        pred_dir: vec![UP; nodes],
        depth: vec![0; nodes],
        pot: vec![0.0; nodes],
        adj: vec![Vec::new(); nodes],
    };
    let mut tree: Vec<usize> = (real..real + ns + nt).collect();
    for (i, &s) in supply.iter().enumerate() {
        net.flow[real + i] = s;
        net.in_tree[real + i] = true;
    }
    for (j, &d) in demand.iter().enumerate() {
        net.flow[real + ns + j] = d;
        net.in_tree[real + ns + j] = true;
    }
    net.rebuild(&tree);

    let block = ((real as f64).sqrt().ceil() as usize).max(10);
    let rc_tol = 1e-13 * (max_cost + 1.0);
    let mut next = 0usize;
    let mut pivots = 0usize;
    loop {
        // block search pricing
        let mut best = None;
        let mut best_rc = -rc_tol;
        let mut scanned = 0usize;
        let mut in_block = 0usize;
        while scanned < real {
            let a = next;
            next = if next + 1 == real { 0 } else { next + 1 };
            scanned += 1;
            in_block += 1;
            if !net.in_tree[a] {
                let rc = net.reduced_cost(a);
                if rc < best_rc {
                    best_rc = rc;
                    best = Some(a);
                }
            }
            if in_block == block {
                if best.is_some() {
                    break;
                }
                in_block = 0;
            }
        }
        let Some(enter) = best else { break };
        if pivots == max_pivots {
            return Err(Error::Convergence(format!(
                "network simplex did not finish within {max_pivots} pivots"
            )));
        }
        pivots += 1;

        let (first, second) = net.ends(enter);
        // join node of the cycle
        let (mut x, mut y) = (first, second);
        while x != y {
            if net.depth[x] >= net.depth[y] {
                x = net.parent[x];
            } else {
                y = net.parent[y];
            }
        }
        let join = x;
        // leaving arc by the strongly feasible rule
        let mut delta = f64::INFINITY;
        let mut leave_node = usize::MAX;
        let mut u = first;
        while u != join {
            if net.pred_dir[u] == UP {
                let d = net.flow[net.pred[u]];
                if d < delta {
                    delta = d;
                    leave_node = u;
                }
            }
            u = net.parent[u];
        }
        let mut u = second;
        while u != join {
            if net.pred_dir[u] == DOWN {
                let d = net.flow[net.pred[u]];
                if d <= delta {
                    delta = d;
                    leave_node = u;
                }
            }
            u = net.parent[u];
        }
        if leave_node == usize::MAX {
            return Err(Error::Convergence("transport problem is unbounded".into()));
        }
        if delta > 0.0 {
            net.flow[enter] += delta;
            let mut u = first;
            while u != join {
                let a = net.pred[u];
                net.flow[a] += if net.pred_dir[u] == UP { -delta } else { delta };
                u = net.parent[u];
            }
            let mut u = second;
            while u != join {
                let a = net.pred[u];
                net.flow[a] += if net.pred_dir[u] == UP { delta } else { -delta };
                u = net.parent[u];
            }
        }
        let leave = net.pred[leave_node];
        net.flow[leave] = 0.0;
        net.in_tree[leave] = false;
        net.in_tree[enter] = true;
        let pos = tree.iter().position(|&a| a == leave).expect("leaving arc is a tree arc");
        tree[pos] = enter;
        net.rebuild(&tree);
    }

    let art_flow: f64 = (real..real + ns + nt).map(|a| net.flow[a]).sum();
    if art_flow > 1e-9 * total_s {
        return Err(Error::Convergence(format!(
            "transport problem left {art_flow:e} units on artificial arcs"
        )));
    }
    let mut flows = Vec::new();
    let mut total = 0.0;
    for a in 0..real {
        if net.flow[a] > 0.0 {
            let (i, j) = (a / nt, a % nt);
            total += net.flow[a] * cost(i, j);
            flows.push((i, j, net.flow[a]));
        }
    }
    // with c_ij + pot_i − pot_j ≥ 0 the prices are u = −pot (sources), v = pot (sinks)
    let u = (0..ns).map(|i| -net.pot[i]).collect();
    let v = (0..nt).map(|j| net.pot[ns + j]).collect();
    Ok(TransportSolution { cost: total, u, v, flows, pivots })
}

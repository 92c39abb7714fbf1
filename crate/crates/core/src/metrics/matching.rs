//! Maximum bipartite matching (Hopcroft–Karp).

const FREE: u32 = u32::MAX;

/// Size of a maximum matching. `adj[u]` lists the right vertices adjacent to
/// left vertex `u`; right vertices are `0..n_right`.
pub fn hopcroft_karp(adj: &[Vec<u32>], n_right: usize) -> usize {
    let n_left = adj.len();
    let mut match_l = vec![FREE; n_left];
    let mut match_r = vec![FREE; n_right];
    let mut dist = vec![0u32; n_left];
    let mut queue = Vec::with_capacity(n_left);
    let mut size = 0;

    // greedy warm start
    for u in 0..n_left {
        if let Some(&v) = adj[u].iter().find(|&&v| match_r[v as usize] == FREE) {
            match_l[u] = v;
            match_r[v as usize] = u as u32;
            size += 1;
        }
    }

    let mut next_edge = vec![0usize; n_left];
    let mut stack: Vec<u32> = Vec::new();
    loop {
        // BFS layering from free left vertices
        queue.clear();
        for u in 0..n_left {
            if match_l[u] == FREE {
                dist[u] = 0;
                queue.push(u as u32);
            } else {
                dist[u] = u32::MAX;
            }
        }
        let mut found = false;
        let mut head = 0;
        while head < queue.len() {
            let u = queue[head] as usize;
            head += 1;
            for &v in &adj[u] {
                let w = match_r[v as usize];
                if w == FREE {
                    found = true;
                } else if dist[w as usize] == u32::MAX {
                    dist[w as usize] = dist[u] + 1;
                    queue.push(w);
                }
            }
        }
        if !found {
            return size;
        }

        // iterative DFS along the layers
        next_edge.iter_mut().for_each(|e| *e = 0);
        for root in 0..n_left {
            if match_l[root] != FREE {
                continue;
            }
            stack.clear();
            stack.push(root as u32);
            let mut augmented = false;
            while let Some(&u) = stack.last() {
                let u = u as usize;
                if next_edge[u] >= adj[u].len() {
                    dist[u] = u32::MAX;
                    stack.pop();
                    continue;
                }
                let v = adj[u][next_edge[u]];
                let w = match_r[v as usize];
                if w == FREE {
                    // flip the path held on the stack
                    let mut v = v;
                    for &x in stack.iter().rev() {
                        let x = x as usize;
                        let prev = match_l[x];
                        match_l[x] = v;
                        match_r[v as usize] = x as u32;
                        v = prev;
                    }
                    augmented = true;
                    break;
                }
                if dist[w as usize] == dist[u] + 1 {
                    stack.push(w);
                } else {
                    next_edge[u] += 1;
                }
            }
            if augmented {
                size += 1;
                for &x in &stack {
                    next_edge[x as usize] += 1;
                }
            }
        }
    }
}

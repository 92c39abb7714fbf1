//! Exact squared Euclidean distance transform on a regular raster
//! (Felzenszwalb and Huttenlocher, lower envelope of parabolas).

/// Squared distance, in raster units, from every point of a row-major raster
/// of the given `shape` to the nearest point with `feature[i] == true`.
/// Points get `f64::INFINITY` when there is no feature at all.
pub fn squared_distance_transform(shape: &[usize], feature: &[bool]) -> Vec<f64> {
    let total: usize = shape.iter().product();
    assert_eq!(total, feature.len(), "raster size mismatch");
    let mut dist: Vec<f64> = feature.iter().map(|&f| if f { 0.0 } else { f64::INFINITY }).collect();
    if total == 0 {
        return dist;
    }
    let d = shape.len();
    let mut strides = vec![1usize; d];
    for a in (0..d.saturating_sub(1)).rev() {
        strides[a] = strides[a + 1] * shape[a + 1];
    }
    let longest = *shape.iter().max().unwrap();
    let mut line = vec![0.0; longest];
    let mut out = vec![0.0; longest];
    let mut scratch = Envelope::with_capacity(longest);
    for axis in 0..d {
        let len = shape[axis];
        let stride = strides[axis];
        // every line along `axis` starts at an index whose `axis` coordinate is 0
        for start in 0..total {
            if (start / stride) % len != 0 {
                continue;
            }
            for (k, v) in line[..len].iter_mut().enumerate() {
                *v = dist[start + k * stride];
            }
            scratch.transform(&line[..len], &mut out[..len]);
            for (k, v) in out[..len].iter().enumerate() {
                dist[start + k * stride] = *v;
            }
        }
    }
    dist
}

struct Envelope {
    vertex: Vec<usize>,
    bound: Vec<f64>,
}

impl Envelope {
    fn with_capacity(n: usize) -> Self {
        Envelope { vertex: Vec::with_capacity(n), bound: Vec::with_capacity(n + 1) }
    }

    fn transform(&mut self, f: &[f64], out: &mut [f64]) {
        self.vertex.clear();
        self.bound.clear();
        for (q, &fq) in f.iter().enumerate() {
            if !fq.is_finite() {
                continue;
            }
            loop {
                let Some(&p) = self.vertex.last() else {
                    self.vertex.push(q);
                    self.bound.push(f64::NEG_INFINITY);
                    break;
                };
                let s = intersect(f, p, q);
                if s <= *self.bound.last().unwrap() {
                    self.vertex.pop();
                    self.bound.pop();
                } else {
                    self.vertex.push(q);
                    self.bound.push(s);
                    break;
                }
            }
        }
        if self.vertex.is_empty() {
            out.fill(f64::INFINITY);
            return;
        }
        let mut k = 0;
        for (q, o) in out.iter_mut().enumerate() {
            let x = q as f64;
            while k + 1 < self.vertex.len() && self.bound[k + 1] < x {
                k += 1;
            }
            let p = self.vertex[k];
            let dx = x - p as f64;
            *o = dx * dx + f[p];
        }
    }
}

fn intersect(f: &[f64], p: usize, q: usize) -> f64 {
    let (pf, qf) = (p as f64, q as f64);
    ((f[q] + qf * qf) - (f[p] + pf * pf)) / (2.0 * (qf - pf))
}

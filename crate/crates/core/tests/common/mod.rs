//! Brute-force group-structure oracle, independent of the library's curve arithmetic.
#![allow(dead_code)]

use std::collections::HashMap;

type Pt = Option<(u64, u64)>;

fn pow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = (r as u128 * b as u128 % p as u128) as u64;
        }
        b = (b as u128 * b as u128 % p as u128) as u64;
        e >>= 1;
    }
    r
}

/// Square roots of every residue, by listing `y²` for all `y`.
pub struct Roots {
    p: u64,
    roots: Vec<Vec<u64>>,
}

impl Roots {
    pub fn new(p: u64) -> Self {
        let mut roots = vec![Vec::new(); p as usize];
        for y in 0..p {
            roots[(y * y % p) as usize].push(y);
        }
        Roots { p, roots }
    }
}

struct Oracle {
    p: u64,
    a: u64,
}

impl Oracle {
    fn add(&self, u: Pt, v: Pt) -> Pt {
        let p = self.p;
        let ((x1, y1), (x2, y2)) = match (u, v) {
            (None, w) | (w, None) => return w,
            (Some(s), Some(t)) => (s, t),
        };
        let lambda = if x1 == x2 {
            if (y1 + y2) % p == 0 {
                return None;
            }
            (3 * x1 % p * x1 % p + self.a) % p * pow(2 * y1 % p, p - 2, p) % p
        } else {
            (y2 + p - y1) % p * pow((x2 + p - x1) % p, p - 2, p) % p
        };
        let x3 = (lambda * lambda % p + 2 * p - x1 - x2) % p;
        let y3 = (lambda * ((x1 + p - x3) % p) % p + p - y1) % p;
        Some((x3, y3))
    }
}

/// `(N, i, e)` by listing every point and walking the cyclic subgroup of each unvisited one.
pub fn oracle_structure(roots: &Roots, a: u64, b: u64) -> (u64, u64, u64) {
    let p = roots.p;
    let o = Oracle { p, a };
    let mut points: Vec<Pt> = vec![None];
    for x in 0..p {
        let r = (x * x % p * x % p + a * x % p + b) % p;
        for &y in &roots.roots[r as usize] {
            points.push(Some((x, y)));
        }
    }
    let n = points.len() as u64;
    let mut order: HashMap<Pt, u64> = HashMap::from([(None, 1)]);
    let mut e = 1;
    for &start in &points {
        if order.contains_key(&start) {
            continue;
        }
        let mut cycle = vec![start];
        let mut q = o.add(start, start);
        while q.is_some() {
            cycle.push(q);
            q = o.add(q, start);
        }
        // cycle = [P, 2P, ..., (m-1)P] and mP = O
        let m = cycle.len() as u64 + 1;
        for (k, &pt) in cycle.iter().enumerate() {
            order.entry(pt).or_insert(m / num_integer::gcd(k as u64 + 1, m));
        }
        e = e.max(m);
    }
    (n, n / e, e)
}

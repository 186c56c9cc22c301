#![allow(dead_code)]

use csc_core::minkowski::{boost, LorentzMap, MinkVector};
use csc_core::sl::{ContactPoint, PairVector};
use csc_core::SMat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn vector(r: &mut impl Rng, d: usize, scale: f64) -> MinkVector {
    let c: Vec<f64> = (0..=d).map(|_| r.random_range(-scale..scale)).collect();
    MinkVector::new(&c).unwrap()
}

pub fn pair(r: &mut impl Rng, d: usize) -> PairVector {
    PairVector::new(vector(r, d, 2.0), vector(r, d, 2.0)).unwrap()
}

pub fn unit_spatial(r: &mut impl Rng, d: usize) -> MinkVector {
    loop {
        let mut s: Vec<f64> = (0..d).map(|_| r.random_range(-1.0..1.0)).collect();
        let n = s.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.1 {
            s.iter_mut().for_each(|x| *x /= n);
            return MinkVector::from_parts(&s, 0.0).unwrap();
        }
    }
}

/// Product of a few random rotations and boosts.
pub fn lorentz(r: &mut impl Rng, d: usize, max_rapidity: f64) -> LorentzMap {
    let mut l = LorentzMap::identity(d);
    for _ in 0..3 {
        if d >= 2 {
            let i = r.random_range(0..d);
            let j = (i + 1 + r.random_range(0..d - 1)) % d;
            l = l.compose(&LorentzMap::rotation(d, i, j, r.random_range(-3.0..3.0)).unwrap());
        }
        let n = unit_spatial(r, d);
        l = l.compose(&boost(&n, r.random_range(-max_rapidity..max_rapidity)).unwrap());
    }
    l
}

pub fn contact_point(r: &mut impl Rng, d: usize) -> ContactPoint {
    let s: Vec<f64> = (0..d).map(|_| r.random_range(-1.5..1.5)).collect();
    let y = MinkVector::hyperboloid_point(&s).unwrap();
    ContactPoint::new(vector(r, d, 3.0), y).unwrap()
}

pub fn symmetric(r: &mut impl Rng, d: usize, scale: f64) -> SMat {
    let m = SMat::from_fn(d, |_, _| r.random_range(-scale..scale));
    (m + m.transpose()).scale(0.5)
}

/// `QᵀQ + floor`, positive definite.
pub fn spd(r: &mut impl Rng, d: usize, floor: f64) -> SMat {
    let q = SMat::from_fn(d, |_, _| r.random_range(-1.0..1.0));
    q.transpose() * q + SMat::identity(d).scale(floor)
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

// ---- oracles -------------------------------------------------------------
// Independent of the library's eigen/determinant routines.

/// `σ₂(B) = (tr(B)² - tr(B²)) / 2`.
pub fn sigma2_by_traces(b: &SMat) -> f64 {
    let d = b.order();
    let tr: f64 = (0..d).map(|i| b[(i, i)]).sum();
    let tr2: f64 = (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| b[(i, j)] * b[(j, i)]).sum();
    0.5 * (tr * tr - tr2)
}

/// `det(Id + i B)` for `d = 3` from the characteristic coefficients:
/// `1 - σ₂ + i (σ₁ - σ₃)`.
pub fn det_id_plus_i_3(b: &SMat) -> (f64, f64) {
    assert_eq!(b.order(), 3);
    let s1 = b[(0, 0)] + b[(1, 1)] + b[(2, 2)];
    let s2 = sigma2_by_traces(b);
    let s3 = b[(0, 0)] * (b[(1, 1)] * b[(2, 2)] - b[(1, 2)] * b[(2, 1)])
        - b[(0, 1)] * (b[(1, 0)] * b[(2, 2)] - b[(1, 2)] * b[(2, 0)])
        + b[(0, 2)] * (b[(1, 0)] * b[(2, 1)] - b[(1, 1)] * b[(2, 0)]);
    (1.0 - s2, s1 - s3)
}

/// Gram–Schmidt with respect to `g` (assumed positive on the span).
pub fn g_gram_schmidt(vs: &[PairVector]) -> Vec<PairVector> {
    let mut out: Vec<PairVector> = Vec::new();
    for v in vs {
        let mut w = *v;
        for e in &out {
            w = w - *e * w.g(e);
        }
        let n = w.g(&w).sqrt();
        out.push(w * (1.0 / n));
    }
    out
}

fn random_orthonormal(r: &mut impl Rng, d: usize, k: usize) -> Vec<Vec<f64>> {
    let mut cols: Vec<Vec<f64>> = Vec::new();
    while cols.len() < k {
        let mut v: Vec<f64> = (0..d).map(|_| r.random_range(-1.0..1.0)).collect();
        for c in &cols {
            let dot: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(c).for_each(|(a, b)| *a -= dot * b);
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 {
            v.iter_mut().for_each(|x| *x /= n);
            cols.push(v);
        }
    }
    cols
}

fn orthonormalize_cols(cols: &mut Vec<Vec<f64>>) -> bool {
    for i in 0..cols.len() {
        for j in 0..i {
            let dot: f64 = cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum();
            let cj = cols[j].clone();
            cols[i].iter_mut().zip(&cj).for_each(|(a, b)| *a -= dot * b);
        }
        let n = cols[i].iter().map(|x| x * x).sum::<f64>().sqrt();
        if n < 1e-9 {
            return false;
        }
        cols[i].iter_mut().for_each(|x| *x /= n);
    }
    true
}

/// Randomized minimum of `Σ_{a≤k} m(X_a, X_a)` over `g`-orthonormal
/// `k`-tuples in the span of `frame`: uniform sampling followed by a shrinking
/// random walk around the incumbent, `samples` tuples in total. Always an
/// upper bound for `φ^k`.
pub fn brute_force_phi(r: &mut impl Rng, frame: &[PairVector], k: usize, samples: usize) -> f64 {
    let basis = g_gram_schmidt(frame);
    let d = basis.len();
    let m: Vec<Vec<f64>> = (0..d).map(|a| (0..d).map(|b| basis[a].m(&basis[b])).collect()).collect();
    let value = |cols: &[Vec<f64>]| -> f64 {
        cols.iter()
            .map(|c| (0..d).map(|a| (0..d).map(|b| c[a] * m[a][b] * c[b]).sum::<f64>()).sum::<f64>())
            .sum()
    };
    let uniform = samples / 5;
    let mut best = random_orthonormal(r, d, k);
    let mut best_v = value(&best);
    for _ in 1..uniform {
        let c = random_orthonormal(r, d, k);
        let v = value(&c);
        if v < best_v {
            best = c;
            best_v = v;
        }
    }
    let mut step = 0.3;
    for _ in uniform..samples {
        let mut c = best.clone();
        for col in &mut c {
            col.iter_mut().for_each(|x| *x += step * r.random_range(-1.0..1.0));
        }
        if !orthonormalize_cols(&mut c) {
            continue;
        }
        let v = value(&c);
        if v < best_v {
            best = c;
            best_v = v;
        } else {
            step = (step * 0.995).max(1e-6);
        }
    }
    best_v
}

/// Scales `b` by bisection so that `Σ arctan λ_i(s b) = target`; eigenvalues
/// via the library are fine here, the oracle is the bisection itself.
pub fn scale_to_angle(b: &SMat, target: f64) -> SMat {
    let theta = |s: f64| -> f64 { b.scale(s).sym_eigen().values().iter().map(|l| l.atan()).sum() };
    let (mut lo, mut hi) = (0.0, 1.0);
    while theta(hi) < target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if theta(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    b.scale(0.5 * (lo + hi))
}

/// Projection onto the contact fibre `y^⊥ × y^⊥` (`‖y‖² = -1`).
pub fn to_fibre(p: &ContactPoint, v: &PairVector) -> PairVector {
    let re = v.re + p.y * v.re.dot(&p.y);
    let im = v.im + p.y * v.im.dot(&p.y);
    PairVector::new(re, im).unwrap()
}

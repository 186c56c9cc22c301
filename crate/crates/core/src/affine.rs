//! Affine isometries `(α, x)` of Minkowski space, cocycles over finitely
//! generated groups of Lorentz maps, the future cone and the fuchsian time
//! function.
//!
//! Groups are whatever generators the caller supplies: nothing here checks
//! discreteness or cocompactness, and only finite words are ever evaluated.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minkowski::{LorentzMap, MinkVector};
use crate::num;

/// `(α, x)` acting by `v ↦ α v + x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineIsometry {
    pub linear: LorentzMap,
    pub translation: MinkVector,
}

impl AffineIsometry {
    pub fn new(linear: LorentzMap, translation: MinkVector) -> Result<Self> {
        if linear.dim() != translation.dim() {
            return Err(Error::DimensionMismatch {
                expected: linear.dim(),
                found: translation.dim(),
            });
        }
        Ok(AffineIsometry { linear, translation })
    }

    pub fn identity(dim: usize) -> Self {
        AffineIsometry {
            linear: LorentzMap::identity(dim),
            translation: MinkVector::zero(dim),
        }
    }

    pub fn translation_by(v: MinkVector) -> Self {
        AffineIsometry {
            linear: LorentzMap::identity(v.dim()),
            translation: v,
        }
    }

    pub fn dim(&self) -> usize {
        self.translation.dim()
    }

    /// `(α, x)·(β, y) = (αβ, x + α y)`.
    pub fn compose(&self, other: &AffineIsometry) -> AffineIsometry {
        AffineIsometry {
            linear: self.linear.compose(&other.linear),
            translation: self.translation + self.linear.apply(&other.translation),
        }
    }

    /// `(α⁻¹, -α⁻¹ x)`.
    pub fn inverse(&self) -> AffineIsometry {
        let inv = self.linear.inverse();
        AffineIsometry {
            linear: inv,
            translation: -inv.apply(&self.translation),
        }
    }

    pub fn apply(&self, v: &MinkVector) -> MinkVector {
        self.linear.apply(v) + self.translation
    }

    /// Max-abs distance on both components.
    pub fn distance(&self, other: &AffineIsometry) -> f64 {
        let t = (self.translation - other.translation)
            .coords()
            .iter()
            .fold(0.0_f64, |m, v| m.max(num::abs(*v)));
        t.max(self.linear.distance(&other.linear))
    }
}

/// One letter of a word: a generator name, possibly inverted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Letter {
    pub name: String,
    pub inverse: bool,
}

/// Parses whitespace-separated letters `a` / `a^-1`.
pub fn parse_word(word: &str) -> Result<Vec<Letter>> {
    word.split_whitespace()
        .map(|tok| {
            let (name, inverse) = match tok.strip_suffix("^-1") {
                Some(n) => (n, true),
                None => (tok, false),
            };
            if name.is_empty() || name.contains('^') {
                return Err(Error::UnknownGenerator(tok.to_string()));
            }
            Ok(Letter {
                name: name.to_string(),
                inverse,
            })
        })
        .collect()
}

/// Joins letters back into the textual form read by [`parse_word`].
pub fn format_word(letters: &[Letter]) -> String {
    let mut out = String::new();
    for (i, l) in letters.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&l.name);
        if l.inverse {
            out.push_str("^-1");
        }
    }
    out
}

/// Tolerance on `|τ(r)|` for relators, relative to `1 + |τ|`.
pub const RELATOR_TOL: f64 = 1e-9;

/// A representation given by generator matrices together with translation
/// parts `τ(γ)`; extended to words by `τ(γ w) = τ(γ) + γ τ(w)` and
/// `τ(γ⁻¹) = -γ⁻¹ τ(γ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cocycle {
    dim: usize,
    generators: BTreeMap<String, LorentzMap>,
    tau: BTreeMap<String, MinkVector>,
    relators: Vec<String>,
}

impl Cocycle {
    /// Validates dimensions and names and requires `τ(r) ≈ 0` and
    /// `ρ(r) ≈ Id` for every relator.
    pub fn new(
        generators: BTreeMap<String, LorentzMap>,
        tau: BTreeMap<String, MinkVector>,
        relators: Vec<String>,
    ) -> Result<Self> {
        let dim = generators
            .values()
            .next()
            .map(|g| g.dim())
            .ok_or_else(|| Error::Precondition("a cocycle needs at least one generator".into()))?;
        for (name, g) in &generators {
            if name.is_empty() || name.contains(char::is_whitespace) || name.contains('^') {
                return Err(Error::Precondition(format!("invalid generator name `{name}`")));
            }
            if g.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: g.dim(),
                });
            }
        }
        for (name, v) in &tau {
            if !generators.contains_key(name) {
                return Err(Error::UnknownGenerator(name.clone()));
            }
            if v.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.dim(),
                });
            }
        }
        if let Some(missing) = generators.keys().find(|n| !tau.contains_key(*n)) {
            return Err(Error::Precondition(format!("no translation part for `{missing}`")));
        }
        let c = Cocycle {
            dim,
            generators,
            tau,
            relators,
        };
        let scale = 1.0
            + c.tau
                .values()
                .map(|v| num::sqrt(v.euclid_norm_sq()))
                .fold(0.0, f64::max);
        for r in &c.relators {
            let e = c.element(r)?;
            let lin = e.linear.distance(&LorentzMap::identity(dim));
            let tr = num::sqrt(e.translation.euclid_norm_sq());
            if lin > RELATOR_TOL || tr > RELATOR_TOL * scale {
                return Err(Error::Precondition(format!(
                    "relator `{r}` is not trivial (linear {lin:.3e}, translation {tr:.3e})"
                )));
            }
        }
        Ok(c)
    }

    /// `τ ≡ 0`.
    pub fn zero(generators: BTreeMap<String, LorentzMap>, relators: Vec<String>) -> Result<Self> {
        let dim = generators.values().next().map(|g| g.dim()).unwrap_or(0);
        let tau = generators.keys().map(|n| (n.clone(), MinkVector::zero(dim))).collect();
        Self::new(generators, tau, relators)
    }

    /// The coboundary `τ(α) = v - α v`, i.e. conjugation by the translation
    /// `v`.
    pub fn coboundary(generators: BTreeMap<String, LorentzMap>, v: MinkVector, relators: Vec<String>) -> Result<Self> {
        let tau = generators
            .iter()
            .map(|(n, g)| {
                if g.dim() != v.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: v.dim(),
                        found: g.dim(),
                    });
                }
                Ok((n.clone(), v - g.apply(&v)))
            })
            .collect::<Result<_>>()?;
        Self::new(generators, tau, relators)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &BTreeMap<String, LorentzMap> {
        &self.generators
    }

    pub fn tau(&self) -> &BTreeMap<String, MinkVector> {
        &self.tau
    }

    pub fn relators(&self) -> &[String] {
        &self.relators
    }

    /// `(γ, τ(γ))` for one letter.
    pub fn letter(&self, l: &Letter) -> Result<AffineIsometry> {
        let g = self
            .generators
            .get(&l.name)
            .ok_or_else(|| Error::UnknownGenerator(l.name.clone()))?;
        let e = AffineIsometry {
            linear: *g,
            translation: self.tau[&l.name],
        };
        Ok(if l.inverse { e.inverse() } else { e })
    }

    /// `(ρ(w), τ(w))`.
    pub fn element(&self, word: &str) -> Result<AffineIsometry> {
        self.element_of(&parse_word(word)?)
    }

    pub fn element_of(&self, letters: &[Letter]) -> Result<AffineIsometry> {
        letters
            .iter()
            .try_fold(AffineIsometry::identity(self.dim), |acc, l| Ok(acc.compose(&self.letter(l)?)))
    }

    /// `τ(w)`.
    pub fn extend(&self, word: &str) -> Result<MinkVector> {
        Ok(self.element(word)?.translation)
    }

    /// `ρ(w)`.
    pub fn linear(&self, word: &str) -> Result<LorentzMap> {
        Ok(self.element(word)?.linear)
    }
}

/// Defect `|τ(αβ) - τ(α) - α τ(β)|_∞` of the cocycle identity for two words.
pub fn cocycle_defect(c: &Cocycle, a: &str, b: &str) -> Result<f64> {
    let joined = format!("{a} {b}");
    let ab = c.extend(&joined)?;
    let ea = c.element(a)?;
    let rhs = ea.translation + ea.linear.apply(&c.extend(b)?);
    Ok((ab - rhs).coords().iter().fold(0.0_f64, |m, v| m.max(num::abs(*v))))
}

/// Subsets of Minkowski space given by a membership predicate.
pub trait Region {
    fn contains(&self, x: &MinkVector) -> bool;
}

/// Closed future cone `{‖x - apex‖² ≤ 0, (x - apex)_t ≥ 0}`; membership
/// allows a relative slack `CONE_TOL (1 + |x - apex|²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cone {
    pub apex: MinkVector,
}

pub const CONE_TOL: f64 = 1e-12;

impl Cone {
    pub fn future(dim: usize) -> Self {
        Cone {
            apex: MinkVector::zero(dim),
        }
    }

    /// `√(-‖x - apex‖²)` for points of the cone, `None` outside.
    pub fn cosmological_time(&self, x: &MinkVector) -> Option<f64> {
        if !self.contains(x) {
            return None;
        }
        let v = *x - self.apex;
        Some(num::sqrt((-v.norm_sq()).max(0.0)))
    }
}

impl Region for Cone {
    fn contains(&self, x: &MinkVector) -> bool {
        if x.dim() != self.apex.dim() {
            return false;
        }
        let v = *x - self.apex;
        let slack = CONE_TOL * (1.0 + v.euclid_norm_sq());
        v.norm_sq() <= slack && v.time() >= -slack
    }
}

/// Euclidean ball; not future-complete.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ball {
    pub center: MinkVector,
    pub radius: f64,
}

impl Region for Ball {
    fn contains(&self, x: &MinkVector) -> bool {
        x.dim() == self.center.dim() && (*x - self.center).euclid_norm_sq() <= self.radius * self.radius
    }
}

pub struct Intersection(pub Vec<alloc::boxed::Box<dyn Region>>);

impl Region for Intersection {
    fn contains(&self, x: &MinkVector) -> bool {
        self.0.iter().all(|r| r.contains(x))
    }
}

pub struct Union(pub Vec<alloc::boxed::Box<dyn Region>>);

impl Region for Union {
    fn contains(&self, x: &MinkVector) -> bool {
        self.0.iter().any(|r| r.contains(x))
    }
}

/// `-1 / ‖y‖²` for `y` in the open future cone; the level set through `y`
/// is the leaf `Σ_k`, `k = √(value)`.
pub fn fuchsian_time(y: &MinkVector) -> Result<f64> {
    let n = y.norm_sq();
    if !(n < 0.0 && y.time() > 0.0) {
        return Err(Error::Precondition(format!(
            "point is not in the open future cone (‖y‖² = {n:.3e}, t = {:.3e})",
            y.time()
        )));
    }
    Ok(-1.0 / n)
}

/// Derivative of [`fuchsian_time`] along the future unit normal
/// `y / √(-‖y‖²)` of the leaf through `y`: `-2 k³`.
pub fn fuchsian_time_normal_derivative(y: &MinkVector) -> Result<f64> {
    let t = fuchsian_time(y)?;
    let k = num::sqrt(t);
    // d/ds of 1/(1/k + s)² at s = 0
    Ok(-2.0 * k * k * k)
}

/// The point of `Σ_k` above `spatial / k`, i.e. `y / k` for the unit
/// hyperboloid point `y` over `spatial`.
pub fn leaf_point(spatial: &[f64], k: f64) -> Result<MinkVector> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::OutOfRange { what: "k", value: k });
    }
    Ok(MinkVector::hyperboloid_point(spatial)? * (1.0 / k))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositionReport {
    pub samples: usize,
    pub all_in_cone: bool,
    /// Indices of samples outside the cone.
    pub outside: Vec<usize>,
    /// `max |T(x) - 1/k|` over samples in the cone, `T` the cosmological time.
    pub max_offset_error: f64,
    /// `min T(x) - 1/k`.
    pub min_margin: f64,
}

/// Checks that every sample lies in the future cone at cosmological time
/// `1/k`: in the fuchsian model the region at time at least `1/k` is exactly
/// the closed future of `Σ_k`.
pub fn cone_position_check(samples: &[MinkVector], k: f64) -> PositionReport {
    let cone = samples.first().map(|s| Cone::future(s.dim()));
    let mut outside = Vec::new();
    let mut max_err = 0.0_f64;
    let mut min_margin = f64::INFINITY;
    for (i, x) in samples.iter().enumerate() {
        match cone.as_ref().and_then(|c| c.cosmological_time(x)) {
            Some(t) => {
                max_err = max_err.max(num::abs(t - 1.0 / k));
                min_margin = min_margin.min(t - 1.0 / k);
            }
            None => outside.push(i),
        }
    }
    PositionReport {
        samples: samples.len(),
        all_in_cone: outside.is_empty(),
        outside,
        max_offset_error: max_err,
        min_margin,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FutureCompleteReport {
    /// Samples lying in the region.
    pub checked: usize,
    /// `(sample, displacement)` pairs with `x ∈ R` but `x + v ∉ R`.
    pub violations: Vec<(usize, usize)>,
}

impl FutureCompleteReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A fixed set of future causal vectors: `s e_t`, the null vectors
/// `s (e_t ± e_k)` and `s (2 e_t + e_k)`, at scales `s ∈ {0.1, 1, 10}`.
pub fn future_displacements(dim: usize) -> Vec<MinkVector> {
    let t = MinkVector::basis(dim, dim);
    let mut base = alloc::vec![t];
    for k in 0..dim {
        let e = MinkVector::basis(dim, k);
        base.push(t + e);
        base.push(t - e);
        base.push(t * 2.0 + e);
    }
    [0.1, 1.0, 10.0]
        .iter()
        .flat_map(|&s| base.iter().map(move |v| *v * s))
        .collect()
}

/// For every sample in `region` and every displacement, checks
/// `x + v ∈ region`.
pub fn future_complete_check(samples: &[MinkVector], region: &dyn Region, displacements: &[MinkVector]) -> FutureCompleteReport {
    let mut checked = 0;
    let mut violations = Vec::new();
    for (i, x) in samples.iter().enumerate() {
        if !region.contains(x) {
            continue;
        }
        checked += 1;
        for (j, v) in displacements.iter().enumerate() {
            if !region.contains(&(*x + *v)) {
                violations.push((i, j));
            }
        }
    }
    FutureCompleteReport { checked, violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minkowski::boost;
    use alloc::boxed::Box;
    use alloc::vec;

    fn gens() -> BTreeMap<String, LorentzMap> {
        let mut g = BTreeMap::new();
        g.insert("a".to_string(), boost(&MinkVector::basis(3, 0), 0.7).unwrap());
        g.insert(
            "b".to_string(),
            boost(&MinkVector::basis(3, 1), 0.4)
                .unwrap()
                .compose(&LorentzMap::rotation(3, 0, 2, 0.3).unwrap()),
        );
        g
    }

    #[test]
    fn group_law() {
        let g = gens();
        let a = AffineIsometry::new(g["a"], MinkVector::new(&[0.1, 0.2, -0.3, 0.4]).unwrap()).unwrap();
        let b = AffineIsometry::new(g["b"], MinkVector::new(&[1.0, 0.0, 0.5, 0.0]).unwrap()).unwrap();
        let id = AffineIsometry::identity(3);
        assert_eq!(id.compose(&b), b);
        assert!(a.compose(&a.inverse()).distance(&id) < 1e-12);
        let v = MinkVector::new(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(AffineIsometry::translation_by(v).inverse(), AffineIsometry::translation_by(-v));
        let x = MinkVector::new(&[0.3, -0.1, 0.2, 2.0]).unwrap();
        let lhs = a.compose(&b).apply(&x);
        let rhs = a.apply(&b.apply(&x));
        assert!((lhs - rhs).euclid_norm_sq() < 1e-24);
    }

    #[test]
    fn words() {
        assert_eq!(parse_word("a b^-1  a").unwrap().len(), 3);
        assert!(parse_word("a^2").is_err());
        let g = gens();
        let v = MinkVector::new(&[0.5, -1.0, 0.25, 2.0]).unwrap();
        let c = Cocycle::coboundary(g.clone(), v, vec![]).unwrap();
        let ta = c.extend("a").unwrap();
        let aa = c.extend("a a").unwrap();
        assert!((aa - (ta + g["a"].apply(&ta))).euclid_norm_sq() < 1e-24);
        assert!(cocycle_defect(&c, "a b^-1 a", "b b a^-1").unwrap() < 1e-12);
        let z = Cocycle::zero(g.clone(), vec![]).unwrap();
        assert!(z.extend("a b a^-1").unwrap().is_zero());
        assert!(matches!(c.extend("a q"), Err(Error::UnknownGenerator(_))));
        // empty word is the identity
        assert!(c.extend("").unwrap().is_zero());
        // a relator that does not hold is rejected
        assert!(Cocycle::coboundary(g, v, vec!["a a".into()]).is_err());
    }

    #[test]
    fn relator_accepted_for_commuting_generators() {
        let mut g = BTreeMap::new();
        g.insert("a".to_string(), boost(&MinkVector::basis(3, 0), 0.7).unwrap());
        g.insert("b".to_string(), boost(&MinkVector::basis(3, 0), -0.2).unwrap());
        let v = MinkVector::new(&[0.5, -1.0, 0.25, 2.0]).unwrap();
        assert!(Cocycle::coboundary(g, v, vec!["a b a^-1 b^-1".into()]).is_ok());
    }

    #[test]
    fn fuchsian_time_examples() {
        let y = MinkVector::new(&[0.0, 0.0, 0.0, 2.0]).unwrap();
        assert_eq!(fuchsian_time(&y).unwrap(), 0.25);
        let k = 1.7;
        let y = MinkVector::new(&[0.0, 0.0, 0.0, 1.0 / k]).unwrap();
        let l = boost(&MinkVector::new(&[0.6, 0.8, 0.0, 0.0]).unwrap(), 0.9).unwrap();
        assert!((fuchsian_time(&l.apply(&y)).unwrap() - k * k).abs() < 1e-12);
        assert!(fuchsian_time(&MinkVector::new(&[1.0, 0.0, 0.0, 0.5]).unwrap()).is_err());
        assert!(fuchsian_time(&MinkVector::new(&[0.0, 0.0, 0.0, -1.0]).unwrap()).is_err());
    }

    #[test]
    fn normal_derivative_matches_differences() {
        let k = 1.3;
        let y = leaf_point(&[0.2, -0.4, 0.1], k).unwrap();
        let n = y * k;
        let h = 1e-5;
        let fd = (fuchsian_time(&(y + n * h)).unwrap() - fuchsian_time(&(y - n * h)).unwrap()) / (2.0 * h);
        let exact = fuchsian_time_normal_derivative(&y).unwrap();
        assert!((fd - exact).abs() < 1e-6, "{fd} vs {exact}");
    }

    #[test]
    fn position() {
        let k = 1.0;
        let samples: Vec<MinkVector> = (0..10).map(|i| leaf_point(&[0.1 * i as f64, 0.0, 0.3], k).unwrap()).collect();
        let r = cone_position_check(&samples, k);
        assert!(r.all_in_cone && r.max_offset_error < 1e-12);
        let above = MinkVector::new(&[0.0, 0.0, 0.0, 2.0]).unwrap();
        assert!(cone_position_check(&[above], k).min_margin > 0.0);
        let out = MinkVector::new(&[2.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(cone_position_check(&[out], k).outside, vec![0]);
    }

    #[test]
    fn future_completeness() {
        let samples: Vec<MinkVector> = (0..50)
            .map(|i| {
                let s = i as f64;
                MinkVector::new(&[(s * 0.7).sin(), (s * 1.3).cos(), 0.2 * (s * 0.5).sin(), 0.1 * s]).unwrap()
            })
            .collect();
        let disp = future_displacements(3);
        assert!(future_complete_check(&samples, &Cone::future(3), &disp).passed());
        let shifted = MinkVector::new(&[0.2, 0.0, -0.1, 0.5]).unwrap();
        let region = Intersection(vec![
            Box::new(Cone { apex: shifted }),
            Box::new(Union(vec![
                Box::new(Cone {
                    apex: MinkVector::new(&[1.0, 0.0, 0.0, 0.0]).unwrap(),
                }),
                Box::new(Cone {
                    apex: MinkVector::new(&[-1.0, 0.5, 0.0, 0.2]).unwrap(),
                }),
            ])),
        ]);
        let r = future_complete_check(&samples, &region, &disp);
        assert!(r.checked > 0 && r.passed());
        let ball = Ball {
            center: MinkVector::zero(3),
            radius: 5.0,
        };
        assert!(!future_complete_check(&samples, &ball, &disp).passed());
    }
}

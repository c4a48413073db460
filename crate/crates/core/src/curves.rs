//! Simple closed curves on the one-holed torus, indexed by Farey slopes.
//!
//! The curve of slope `p/q` is represented by the Christoffel word with `|p|`
//! letters `a` and `q` letters `b`; negative slopes substitute `a ↦ a⁻¹` at
//! evaluation time. Traces follow the Farey recursion
//! `tr(UV) = tr(U) tr(V) − tr(UV⁻¹)` over dual numbers, so the same pass yields
//! lengths and Margulis invariants.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::dualnum::DualScalar;
use crate::error::{Error, Result};
use crate::identity;
use crate::math;
use crate::representation::HoledTorusRep;
use crate::sl2::{dual_length, DualMatrix2};

/// Relative agreement required between recursion and word evaluation.
pub const TRACE_AGREEMENT: f64 = 1e-9;
/// Relative disagreement at which enumeration aborts.
pub const TRACE_MISMATCH: f64 = 1e-6;

/// Reduced slope `p/q` in canonical form: `q > 0`, or `1/0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Slope {
    p: i64,
    q: i64,
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Slope {
    pub const INFINITY: Slope = Slope { p: 1, q: 0 };
    pub const ZERO: Slope = Slope { p: 0, q: 1 };
    pub const ONE: Slope = Slope { p: 1, q: 1 };

    /// Canonicalizes the sign; `None` unless `gcd(|p|, |q|) = 1`.
    pub fn new(p: i64, q: i64) -> Option<Slope> {
        if gcd(p, q) != 1 {
            return None;
        }
        Some(if q < 0 || (q == 0 && p < 0) {
            Slope { p: -p, q: -q }
        } else {
            Slope { p, q }
        })
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    pub fn is_negative(&self) -> bool {
        self.p < 0
    }

    /// `|p| + q`.
    pub fn height(&self) -> u64 {
        self.p.unsigned_abs() + self.q as u64
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    A,
    B,
}

/// Positive word in `a`, `b`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Word(pub Vec<Generator>);

impl Word {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Letter counts `(#a, #b)`.
    pub fn abelianization(&self) -> (usize, usize) {
        let a = self.0.iter().filter(|g| **g == Generator::A).count();
        (a, self.0.len() - a)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.0 {
            f.write_str(match g {
                Generator::A => "a",
                Generator::B => "b",
            })?;
        }
        Ok(())
    }
}

/// One isotopy class of simple closed curve, with data from a representation.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveClass {
    pub slope: Slope,
    pub word: Word,
    pub trace: f64,
    pub length: f64,
    /// Margulis invariant under the representation's deformation.
    pub alpha: f64,
}

impl CurveClass {
    /// Bin index `⌊2ℓ⌋`: the pair `{γ, γ}` has total length `2ℓ(γ)`.
    pub fn bin_index(&self) -> u32 {
        math::floor(2.0 * self.length) as u32
    }
}

/// Curves with `N ≤ 2ℓ(γ) < N + 1`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CurveBin {
    pub n: u32,
    pub members: Vec<CurveClass>,
}

/// All slopes with `|p| + q ≤ bound`: `1/0` and `0/1`, then the positive
/// Stern–Brocot tree and the negative one, each in pre-order.
pub fn farey_enumerate(max_denominator_sum: u32) -> Vec<Slope> {
    let bound = max_denominator_sum as i64;
    let mut out = Vec::new();
    if bound < 1 {
        return out;
    }
    out.push(Slope::INFINITY);
    out.push(Slope::ZERO);
    for sign in [1i64, -1] {
        // (left, right) Farey pair; visit the mediant then recurse.
        let mut stack = alloc::vec![((1i64, 0i64), (0i64, 1i64))];
        while let Some((l, r)) = stack.pop() {
            let m = (l.0 + r.0, l.1 + r.1);
            if m.0 + m.1 > bound {
                continue;
            }
            out.push(Slope {
                p: sign * m.0,
                q: m.1,
            });
            stack.push((m, r));
            stack.push((l, m));
        }
    }
    out
}

/// Christoffel word of slope `|p|/q`: letter `i` is `b` exactly when
/// `⌊iq/n⌋` increases, `n = |p| + q`.
pub fn slope_word(s: Slope) -> Word {
    let p = s.p.unsigned_abs();
    let q = s.q as u64;
    let n = p + q;
    let word = (1..=n)
        .map(|i| {
            if (i * q) / n > ((i - 1) * q) / n {
                Generator::B
            } else {
                Generator::A
            }
        })
        .collect();
    Word(word)
}

/// Direct product of the generators along the slope's word.
pub fn evaluate_word(rep: &HoledTorusRep, s: Slope) -> DualMatrix2 {
    let a = if s.is_negative() {
        rep.a.inverse()
    } else {
        rep.a
    };
    slope_word(s)
        .0
        .iter()
        .fold(DualMatrix2::IDENTITY, |acc, g| match g {
            Generator::A => acc.compose(&a),
            Generator::B => acc.compose(&rep.b),
        })
}

/// Farey parents `(U, V)` of `(p, q)` with `p, q ≥ 1`, `U + V = (p, q)` and
/// `det(U, V) = 1`.
fn farey_parents(p: i64, q: i64) -> ((i64, i64), (i64, i64)) {
    // p₁q − q₁p = 1 with 1 ≤ p₁ ≤ p
    let p1 = if p == 1 {
        1
    } else {
        mod_inverse(q.rem_euclid(p), p)
    };
    let q1 = (p1 * q - 1) / p;
    ((p1, q1), (p - p1, q - q1))
}

fn mod_inverse(a: i64, m: i64) -> i64 {
    let (mut old_r, mut r) = (a, m);
    let (mut old_s, mut s) = (1i64, 0i64);
    while r != 0 {
        let k = old_r / r;
        (old_r, r) = (r, old_r - k * r);
        (old_s, s) = (s, old_s - k * s);
    }
    old_s.rem_euclid(m)
}

/// Memoized Farey trace recursion over dual numbers.
///
/// Seeded by the traces of `1/0`, `0/1`, `1/1`; negative slopes use the seeds
/// `(tr A⁻¹, tr B, tr A⁻¹B)` on the mirrored tree.
#[derive(Debug, Clone)]
pub struct TraceTable {
    seeds: [[DualScalar; 3]; 2],
    memo: BTreeMap<Slope, DualScalar>,
}

impl TraceTable {
    pub fn new(rep: &HoledTorusRep) -> Self {
        let x = rep.a.dual_trace();
        let y = rep.b.dual_trace();
        let z = rep.a.compose(&rep.b).dual_trace();
        TraceTable {
            seeds: [[x, y, z], [x, y, x * y - z]],
            memo: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.memo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.memo.is_empty()
    }

    pub fn trace(&mut self, s: Slope) -> DualScalar {
        let neg = s.is_negative();
        self.trace_quadrant(neg, s.p.abs(), s.q)
    }

    fn trace_quadrant(&mut self, neg: bool, p: i64, q: i64) -> DualScalar {
        let seeds = self.seeds[neg as usize];
        match (p, q) {
            (1, 0) => return seeds[0],
            (0, 1) => return seeds[1],
            (1, 1) => return seeds[2],
            _ => {}
        }
        let key = Slope {
            p: if neg { -p } else { p },
            q,
        };
        if let Some(t) = self.memo.get(&key) {
            return *t;
        }
        let (u, v) = farey_parents(p, q);
        let z = (u.0 - v.0, u.1 - v.1);
        let z = if z.1 < 0 || (z.1 == 0 && z.0 < 0) {
            (-z.0, -z.1)
        } else {
            z
        };
        let tu = self.trace_quadrant(neg, u.0, u.1);
        let tv = self.trace_quadrant(neg, v.0, v.1);
        let tz = self.trace_quadrant(neg, z.0, z.1);
        let t = tu * tv - tz;
        self.memo.insert(key, t);
        t
    }
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Value-part trace of the curve, by word evaluation checked against the
/// trace recursion.
pub fn slope_trace(rep: &HoledTorusRep, s: Slope) -> Result<f64> {
    let mut table = TraceTable::new(rep);
    checked_trace(rep, &mut table, s).map(|(t, _)| t.re)
}

fn checked_trace(
    rep: &HoledTorusRep,
    table: &mut TraceTable,
    s: Slope,
) -> Result<(DualScalar, f64)> {
    let recursion = table.trace(s);
    let direct = evaluate_word(rep, s).dual_trace();
    let gap = relative_gap(recursion.re, direct.re);
    if !(gap <= TRACE_MISMATCH) {
        return Err(Error::RecursionMismatch {
            slope: s,
            recursion: recursion.re,
            direct: direct.re,
        });
    }
    Ok((direct, gap))
}

/// Curves with `2ℓ < cutoff` in traversal order, plus the largest relative
/// disagreement seen between recursion and word evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Enumeration {
    pub curves: Vec<CurveClass>,
    pub max_trace_discrepancy: f64,
}

impl Enumeration {
    /// Groups into bins `0..cutoff`, keeping traversal order inside a bin.
    pub fn into_bins(self, cutoff: u32) -> Vec<CurveBin> {
        let mut bins: Vec<CurveBin> = (0..cutoff)
            .map(|n| CurveBin {
                n,
                members: Vec::new(),
            })
            .collect();
        for c in self.curves {
            let n = c.bin_index();
            if let Some(b) = bins.get_mut(n as usize) {
                b.members.push(c);
            }
        }
        bins
    }
}

/// Every simple closed curve with `2ℓ(γ) < cutoff`.
///
/// Stern–Brocot subtrees are pruned once a node's length reaches the cutoff;
/// each child is checked to be longer than its parent, and a violation aborts
/// with [`Error::NonMonotone`].
pub fn enumerate_curves(rep: &HoledTorusRep, cutoff: f64) -> Result<Enumeration> {
    let mut table = TraceTable::new(rep);
    let mut out = Enumeration {
        curves: Vec::new(),
        max_trace_discrepancy: 0.0,
    };
    let emit = |table: &mut TraceTable, s: Slope, out: &mut Enumeration| -> Result<bool> {
        let (t, gap) = checked_trace(rep, table, s)?;
        let len = dual_length(t)?;
        if 2.0 * len.re >= cutoff {
            return Ok(false);
        }
        out.max_trace_discrepancy = out.max_trace_discrepancy.max(gap);
        out.curves.push(CurveClass {
            slope: s,
            word: slope_word(s),
            trace: t.re,
            length: len.re,
            alpha: len.inf,
        });
        Ok(true)
    };
    emit(&mut table, Slope::INFINITY, &mut out)?;
    emit(&mut table, Slope::ZERO, &mut out)?;

    for sign in [1i64, -1] {
        let root = Slope { p: sign, q: 1 };
        if !emit(&mut table, root, &mut out)? {
            continue;
        }
        // Farey pair (l, r) whose mediant m has already been emitted.
        let mut stack = alloc::vec![((1i64, 0i64), (0i64, 1i64))];
        while let Some((l, r)) = stack.pop() {
            let m = (l.0 + r.0, l.1 + r.1);
            let parent = table
                .trace(Slope {
                    p: sign * m.0,
                    q: m.1,
                })
                .re;
            for (cl, cr) in [(m, r), (l, m)] {
                let c = (cl.0 + cr.0, cl.1 + cr.1);
                let s = Slope {
                    p: sign * c.0,
                    q: c.1,
                };
                let t = table.trace(s).re;
                if !(t.abs() > parent.abs()) {
                    return Err(Error::NonMonotone {
                        slope: s,
                        parent_trace: parent,
                        trace: t,
                    });
                }
                if emit(&mut table, s, &mut out)? {
                    stack.push((cl, cr));
                }
            }
        }
    }
    Ok(out)
}

/// Bins `0..=n_max`, each complete.
pub fn enumerate_bins(rep: &HoledTorusRep, n_max: u32) -> Result<Vec<CurveBin>> {
    let cutoff = n_max + 1;
    Ok(enumerate_curves(rep, cutoff as f64)?.into_bins(cutoff))
}

/// Bins up to the truncation chosen so the certified identity tail is below
/// `tail_tolerance`.
pub fn enumerate_family(
    rep: &HoledTorusRep,
    tail_tolerance: f64,
    n_ceiling: u32,
) -> Result<Vec<CurveBin>> {
    let cfg = identity::EngineConfig {
        tail_tolerance,
        n_ceiling,
        ..identity::EngineConfig::default()
    };
    Ok(identity::truncate_for_identity(rep, &cfg)?.bins)
}
